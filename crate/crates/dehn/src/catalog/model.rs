//! Catalog data model. A profile is generic over its representation so the
//! same shapes serve concrete manifolds and parametrized family templates.

use std::collections::BTreeSet;
use std::fmt::Debug;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::expr::Expr;
use crate::alexander::LaurentPoly;
use crate::homology::{AbelianGroup, SurgeryDiagram};
use crate::slope::{self, ExtRational, Slope};

pub type Rational = ExtRational<i64>;

pub trait Repr: Clone + Debug + PartialEq + 'static {
    type Slope: Clone + Debug + PartialEq + Serialize + DeserializeOwned;
    type Group: Clone + Debug + PartialEq + Serialize + DeserializeOwned;
    type Poly: Clone + Debug + PartialEq + Serialize + DeserializeOwned;
    type Diagram: Clone + Debug + PartialEq + Serialize + DeserializeOwned;
}

/// Literal values.
#[derive(Debug, Clone, PartialEq)]
pub struct Concrete;

/// Expressions in the family parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Template;

impl Repr for Concrete {
    type Slope = Rational;
    type Group = AbelianGroup<i64>;
    type Poly = LaurentPoly<i64>;
    type Diagram = SurgeryDiagram<i64>;
}

impl Repr for Template {
    type Slope = Expr;
    type Group = HomologyTemplate;
    type Poly = AlexanderTemplate;
    type Diagram = DiagramTemplate;
}

/// How a stored slope list relates to the true set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Completeness {
    /// The stored slopes are the whole set.
    Exact,
    /// The true set contains the stored slopes.
    Superset,
    /// The true set is contained in the stored slopes.
    Subset,
}

/// A value with its citation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sourced<T> {
    pub value: T,
    #[serde(default)]
    pub provenance: String,
}

impl<T> Sourced<T> {
    pub fn new(value: T, provenance: impl Into<String>) -> Self {
        Sourced {
            value,
            provenance: provenance.into(),
        }
    }
}

/// Slopes on one boundary torus. `opaque` names slopes whose coordinates are
/// not recorded; `max_delta` is the largest intersection number in the true
/// set when that is known independently of coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "")]
pub struct SlopeSet<X: Repr> {
    pub completeness: Completeness,
    #[serde(default)]
    pub slopes: Vec<X::Slope>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub opaque: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_delta: Option<i64>,
    #[serde(default)]
    pub provenance: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetKind {
    E,
    Es,
    Et,
    Ek,
    SolidTorus,
}

impl SetKind {
    pub const ALL: [SetKind; 5] = [SetKind::E, SetKind::Es, SetKind::Et, SetKind::Ek, SetKind::SolidTorus];

    pub fn name(self) -> &'static str {
        match self {
            SetKind::E => "E",
            SetKind::Es => "E_s",
            SetKind::Et => "E_t",
            SetKind::Ek => "E_k",
            SetKind::SolidTorus => "solid_torus_fillings",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "")]
pub struct Cusp<X: Repr> {
    #[serde(default)]
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<SlopeSet<X>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_s: Option<SlopeSet<X>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_t: Option<SlopeSet<X>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_k: Option<SlopeSet<X>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solid_torus_fillings: Option<SlopeSet<X>>,
    /// The only non-integral toroidal slope, which is half-integral.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_integral_toroidal: Option<Sourced<X::Slope>>,
}

impl<X: Repr> Cusp<X> {
    pub fn labelled(label: impl Into<String>) -> Self {
        Cusp {
            label: label.into(),
            e: None,
            e_s: None,
            e_t: None,
            e_k: None,
            solid_torus_fillings: None,
            half_integral_toroidal: None,
        }
    }

    pub fn set(&self, kind: SetKind) -> Option<&SlopeSet<X>> {
        match kind {
            SetKind::E => self.e.as_ref(),
            SetKind::Es => self.e_s.as_ref(),
            SetKind::Et => self.e_t.as_ref(),
            SetKind::Ek => self.e_k.as_ref(),
            SetKind::SolidTorus => self.solid_torus_fillings.as_ref(),
        }
    }

    pub fn set_mut(&mut self, kind: SetKind) -> &mut Option<SlopeSet<X>> {
        match kind {
            SetKind::E => &mut self.e,
            SetKind::Es => &mut self.e_s,
            SetKind::Et => &mut self.e_t,
            SetKind::Ek => &mut self.e_k,
            SetKind::SolidTorus => &mut self.solid_torus_fillings,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnotType {
    Hyperbolic,
    HyperbolicSatellite,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flags {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knot_complement: Option<Sourced<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link_complement: Option<Sourced<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fibered: Option<Sourced<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knot_type: Option<Sourced<KnotType>>,
}

impl Flags {
    pub fn is_knot_complement(&self) -> Option<bool> {
        self.knot_complement.as_ref().map(|f| f.value)
    }

    pub fn is_link_complement(&self) -> Option<bool> {
        self.link_complement.as_ref().map(|f| f.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CharacterisingKind {
    Oriented,
    Unoriented,
}

/// Facts about one Dehn surgery of a knot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "")]
pub struct SurgeryFact<X: Repr> {
    pub slope: X::Slope,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub characterising: Option<Sourced<CharacterisingKind>>,
    /// The closed surgery is profinitely rigid among closed orientable
    /// 3-manifolds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_rigid: Option<Sourced<bool>>,
}

/// Observable data of a cusped manifold. Cusp `i` is the `i`-th unfilled
/// component of `linking` when a diagram is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "")]
pub struct Profile<X: Repr> {
    pub cusps: Vec<Cusp<X>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homology: Option<Sourced<X::Group>>,
    #[serde(default)]
    pub flags: Flags,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linking: Option<Sourced<X::Diagram>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alexander: Option<Sourced<X::Poly>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub surgeries: Vec<SurgeryFact<X>>,
}

pub type ManifoldProfile = Profile<Concrete>;
pub type ProfileTemplate = Profile<Template>;

/// `divides: [k, expr]` holds when `expr` is an integer divisible by `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Condition {
    Divides(i64, Expr),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomologyCase {
    pub when: Condition,
    pub group: AbelianGroup<i64>,
}

/// A fixed group or a case split on the parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HomologyTemplate {
    Fixed(AbelianGroup<i64>),
    Cases {
        cases: Vec<HomologyCase>,
        otherwise: AbelianGroup<i64>,
    },
}

impl HomologyTemplate {
    /// Every group the template can produce.
    pub fn possible(&self) -> BTreeSet<AbelianGroup<i64>> {
        match self {
            HomologyTemplate::Fixed(g) => [g.clone()].into(),
            HomologyTemplate::Cases { cases, otherwise } => cases
                .iter()
                .map(|c| c.group.clone())
                .chain([otherwise.clone()])
                .collect(),
        }
    }
}

/// A fixed polynomial or the twist-knot formula `m t^2 + (1-2m) t + m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlexanderTemplate {
    Fixed(LaurentPoly<i64>),
    Twist { twist: Expr },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagramTemplate {
    pub lk: Vec<Vec<i64>>,
    pub fill: Vec<Option<Expr>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Integer,
    Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameter {
    pub name: String,
    pub domain: Domain,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exclude: Vec<Rational>,
    #[serde(default)]
    pub provenance: String,
}

/// `F(x)` is homeomorphic to `F(map(x))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Relation {
    pub map: Expr,
    #[serde(default)]
    pub provenance: String,
}

/// States that a manifold entry is the instance of a family at a parameter
/// value where the family template does not apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Membership {
    pub family: String,
    pub parameter: Rational,
    #[serde(default)]
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
    #[serde(default)]
    pub description: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub member_of: Vec<Membership>,
    pub profile: ManifoldProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyEntry {
    pub id: String,
    #[serde(default)]
    pub description: String,
    pub parameter: Parameter,
    /// Instance naming pattern with one `{expr}` hole, e.g. `J_{n}`.
    pub instance_name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<Rational>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub relations: Vec<Relation>,
    pub template: ProfileTemplate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entry {
    Manifold(ManifoldEntry),
    Family(FamilyEntry),
}

impl Entry {
    pub fn id(&self) -> &str {
        match self {
            Entry::Manifold(m) => &m.id,
            Entry::Family(f) => &f.id,
        }
    }

    pub fn cusp_count(&self) -> usize {
        match self {
            Entry::Manifold(m) => m.profile.cusps.len(),
            Entry::Family(f) => f.template.cusps.len(),
        }
    }

    pub fn flags(&self) -> &Flags {
        match self {
            Entry::Manifold(m) => &m.profile.flags,
            Entry::Family(f) => &f.template.flags,
        }
    }
}

impl SlopeSet<Concrete> {
    pub fn exact(slopes: Vec<Rational>, provenance: impl Into<String>) -> Self {
        SlopeSet {
            completeness: Completeness::Exact,
            slopes,
            opaque: Vec::new(),
            max_delta: None,
            provenance: provenance.into(),
        }
    }

    /// Slopes certainly in the true set.
    pub fn members(&self) -> BTreeSet<Rational> {
        match self.completeness {
            Completeness::Exact | Completeness::Superset => self.slopes.iter().copied().collect(),
            Completeness::Subset => BTreeSet::new(),
        }
    }

    /// A finite set containing the true set, when one is recorded.
    pub fn upper(&self) -> Option<BTreeSet<Rational>> {
        match self.completeness {
            Completeness::Exact | Completeness::Subset if self.opaque.is_empty() => {
                Some(self.slopes.iter().copied().collect())
            }
            _ => None,
        }
    }

    /// Size of the true set when it is pinned down.
    pub fn size(&self) -> Option<usize> {
        (self.completeness == Completeness::Exact).then(|| self.slopes.len() + self.opaque.len())
    }

    /// Largest intersection number over the true set, when known.
    pub fn known_max_delta(&self) -> Option<i64> {
        if self.max_delta.is_some() {
            return self.max_delta;
        }
        if self.completeness == Completeness::Exact && self.opaque.is_empty() {
            return max_delta_of(self.slopes.iter());
        }
        None
    }

    /// Whether two members at distance `d` are certain to exist.
    pub fn has_pair_at(&self, d: i64) -> bool {
        if self.known_max_delta() == Some(d) {
            return true;
        }
        let m: Vec<Slope<i64>> = self.members().iter().map(slope::from_rational).collect();
        m.iter()
            .enumerate()
            .any(|(i, a)| m[i + 1..].iter().any(|b| a.delta(b).ok() == Some(d)))
    }

    /// Number of distinct slopes certainly in the true set.
    pub fn certain_count(&self) -> usize {
        match self.completeness {
            Completeness::Exact | Completeness::Superset => self.slopes.len() + self.opaque.len(),
            Completeness::Subset => 0,
        }
    }
}

/// Largest pairwise intersection number, `None` for fewer than two slopes.
pub fn max_delta_of<'a>(slopes: impl Iterator<Item = &'a Rational>) -> Option<i64> {
    let s: Vec<Slope<i64>> = slopes.map(slope::from_rational).collect();
    slope::unique_max_pair(&s).ok().flatten().map(|m| m.delta)
}

impl ManifoldProfile {
    /// First homology, either recorded or computed from the linking data.
    pub fn homology_value(&self) -> Option<AbelianGroup<i64>> {
        if let Some(h) = &self.homology {
            return Some(h.value.clone());
        }
        let d = &self.linking.as_ref()?.value;
        crate::homology::first_homology(d).ok()
    }

    /// Diagram component carrying cusp `i`.
    pub fn cusp_component(&self, i: usize) -> Option<usize> {
        self.linking.as_ref()?.value.unfilled().get(i).copied()
    }

    pub fn is_knot(&self) -> bool {
        self.flags.is_knot_complement() == Some(true)
    }
}
