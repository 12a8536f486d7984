//! Rule-based profinite rigidity checks over a catalog.
//!
//! The engine never decides rigidity from first principles. It chains a
//! characterisation rule (an extreme pattern of exceptional slopes leaves
//! finitely many candidates) with invariants that a profinite isomorphism
//! must preserve, and eliminates candidates whose recorded data
//! contradicts the target.

mod compare;
mod rules;
mod verdict;

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use num_rational::Rational64;
use thiserror::Error;

pub use rules::{
    characterize_by_klein, characterize_by_klein_max, characterize_by_solid_torus_fillings,
    characterize_by_toroidal_max, characterize_knot_by_toroidal_pair, rule, Premise, Rule, RULES,
};
pub use verdict::{
    CriterionConclusion, CuspMatch, Distinguisher, Elimination, FillingMatch, RigidityVerdict, Status, TraceStep,
};

use crate::catalog::{
    AlexanderTemplate, Catalog, CatalogError, CharacterisingKind, Completeness, FamilyEntry, KnotType,
    ManifoldProfile, Rational, Resolved, SetKind,
};
use crate::homology::{null_slope_transform, BoundaryKernel, HomologyError, SurgeryDiagram};
use crate::slope::{self, Sign, SlopeError};
use crate::Overflow;
use compare::{Depth, Map, Mismatch, Transport};

/// Citation strings attached to trace steps and eliminations.
pub mod cite {
    pub const HYPERBOLIC: &str = "hyperbolic and cusp detection [WZ17, WZ17b, WZ19]";
    pub const KNOT_DETECTION: &str = "knot-complement detection";
    pub const LINK_DETECTION: &str = "knot-complement detection, link version";
    pub const HOMOLOGY: &str = "[Xu, Prop 2.11]";
    pub const FILLING: &str = "filling transport";
    pub const SLOPES: &str = "exceptional-slope transport; intersection numbers are preserved";
    pub const SLOPES_KNOT: &str = "exceptional-slope transport; knot surgery sign";
    pub const DISTANCE_FOUR: &str = "distance-4 lemma";
    pub const INJECTIVITY: &str = "[Xu, Prop 2.11]; boundary H1-injectivity";
    pub const NULL: &str = "null-homologous slope lemma";
    pub const SIGN: &str = "knot surgery sign";
    pub const HALF_INTEGRAL: &str = "[GWZ, Thm 1]; knot surgery sign";
    pub const ALEXANDER: &str = "[Ueki, Thm 1.1]";
    pub const MAX_GUARD: &str = "[Lee07, Cor 1.5]; [MP02, Tables A.2, A.4]";
    pub const CRITERION: &str = "characterising-slope criterion";
    pub const ZERO_UPGRADE: &str = "characterising slope 0 is unoriented";
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("unknown candidate `{0}`")]
    UnknownCandidate(String),
    #[error("`{0}` is not a knot complement")]
    NotKnotComplement(String),
    #[error("`{0}` is not covered by a rigidity rule")]
    NotCovered(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Slope(#[from] SlopeError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error(transparent)]
    Overflow(#[from] Overflow),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchOptions {
    /// Also require boundary maps to respect rational null-homologous slopes.
    pub null_slopes: bool,
}

impl Default for MatchOptions {
    fn default() -> Self {
        MatchOptions { null_slopes: true }
    }
}

/// Targets checked by `verify --all`: every single manifold plus sample
/// members of each family.
pub const COVERED_TARGETS: &[&str] = &[
    "W(-2)", "W(5/2)", "W(-4)", "W(-1)", "W(5)", "M1", "M2", "M3", "M14", "Berge", "L_B(0)",
    "L_B(0,1)", "L_B(0,2)", "L_B(0,3)", "L_B(0,-1)",
    "L(-1/2)", "L(1/2)", "L(3/2)", "L(-7/2)",
    "K_-1", "K_2", "K_3",
    "J_2", "J_-2", "J_3",
    "EM(1)", "EM(2)", "EM(-1)",
];

/// Manifolds whose Klein-bottle slopes can reach distance above 4.
const KLEIN_MAX_EXCEPTIONS: &[&str] = &["W(5)", "W(-1)", "W(-2)", "W(-4)"];

fn fixed_rule(id: &str) -> Option<&'static str> {
    Some(match id {
        "W(-2)" => "toroidal-max-1-6",
        "W(5/2)" => "toroidal-max-1-7",
        "W(-1)" | "W(5)" => "toroidal-max-1-8",
        "W(-4)" => "klein-max-1-5",
        "M1" | "M2" | "M14" => "toroidal-max-2-4",
        "M3" => "toroidal-max-2-5",
        "Berge" => "solid-torus-2-3",
        "L_B(0)" => "klein-pair-2",
        "K_n" | "J_n" => "knot-toroidal-4",
        "EM(n)" => "knot-toroidal-5",
        "L(n-1/2)" | "L_B(0,r)" => "klein-pair-1",
        _ => return None,
    })
}

fn ext(r: Rational64) -> Rational {
    Rational::new(*r.numer(), *r.denom()).expect("nonzero denominator")
}

fn show_set(s: &BTreeSet<Rational>) -> String {
    format!("{{{}}}", s.iter().map(|x| x.to_string()).join(", "))
}

#[derive(Debug, Clone)]
struct Member<'a> {
    id: String,
    family: Option<(&'a FamilyEntry, Rational)>,
}

/// Candidate parameter values from one kind of observation, or `None` when
/// that observation says nothing.
struct Pin {
    distinguisher: Distinguisher,
    citation: &'static str,
    what: String,
    values: BTreeSet<Rational>,
}

pub struct Engine<'a> {
    catalog: &'a Catalog,
}

impl<'a> Engine<'a> {
    pub fn new(catalog: &'a Catalog) -> Self {
        Engine { catalog }
    }

    pub fn catalog(&self) -> &'a Catalog {
        self.catalog
    }

    /// Sign `s` with `K(r)` matching `K'(s r)` for every recorded slope.
    /// `None` when no sign is consistent with the data; `+1` is preferred.
    pub fn knot_surgery_sign(&self, k: &ManifoldProfile, kp: &ManifoldProfile) -> Result<Option<Sign>, EngineError> {
        for (p, name) in [(k, "first profile"), (kp, "second profile")] {
            if !p.is_knot() {
                return Err(EngineError::NotKnotComplement(name.into()));
            }
        }
        let asg = match compare::assignments(k, kp, Depth::Full)? {
            Ok(a) => a,
            Err(_) => return Ok(None),
        };
        let maps: Vec<Map> = asg.iter().filter_map(|a| a.maps[0].maps()).flatten().copied().collect();
        let [plus, minus] = [compare::knot_maps()[0], compare::knot_maps()[1]];
        Ok(if maps.contains(&plus) {
            Some(Sign::Plus)
        } else if maps.contains(&minus) {
            Some(Sign::Minus)
        } else {
            None
        })
    }

    /// Cusp correspondences and boundary maps compatible with the recorded
    /// exceptional slopes of both manifolds.
    pub fn match_dehn_fillings(
        &self,
        m: &ManifoldProfile,
        n: &ManifoldProfile,
        opts: MatchOptions,
    ) -> Result<Vec<FillingMatch>, EngineError> {
        if m.cusps.len() != n.cusps.len() {
            return Ok(Vec::new());
        }
        let depth = if opts.null_slopes { Depth::NullSlopes } else { Depth::Slopes };
        let Ok(asg) = compare::assignments(m, n, depth)? else {
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        for a in asg {
            let choices: Vec<Vec<Option<Map>>> = a
                .maps
                .iter()
                .map(|t| match t {
                    Transport::Free => vec![None],
                    Transport::Pinned(ms) => ms.iter().copied().map(Some).collect(),
                })
                .collect();
            for pick in choices.into_iter().multi_cartesian_product() {
                out.push(FillingMatch {
                    cusps: pick
                        .into_iter()
                        .enumerate()
                        .map(|(i, map)| CuspMatch { from: i, to: a.perm[i], map })
                        .collect(),
                });
            }
        }
        Ok(out)
    }

    /// Checks that the manifolds able to exceed distance 4 among
    /// Klein-bottle slopes have no pair at distance 4. Returns the recorded
    /// maxima.
    pub fn klein_max_guard(&self) -> Result<Vec<(String, i64)>, EngineError> {
        let mut out = Vec::new();
        for id in KLEIN_MAX_EXCEPTIONS {
            let r = self.catalog.resolve(id)?;
            let p = r.profile().ok_or_else(|| EngineError::UnknownCandidate(id.to_string()))?;
            let s = p.cusps[0]
                .e_k
                .as_ref()
                .ok_or_else(|| EngineError::PreconditionViolated(format!("{id} has no E_k data")))?;
            let (Some(2), Some(d)) = (s.size(), s.known_max_delta()) else {
                return Err(EngineError::PreconditionViolated(format!(
                    "{id}: E_k must be two slopes with known distance"
                )));
            };
            if d <= 4 {
                return Err(EngineError::PreconditionViolated(format!("{id}: E_k distance {d} is not above 4")));
            }
            out.push((id.to_string(), d));
        }
        Ok(out)
    }

    fn family_pins(
        &self,
        f: &FamilyEntry,
        shadow: &ManifoldProfile,
        target: &ManifoldProfile,
    ) -> Result<Vec<Pin>, EngineError> {
        let mut pins = Vec::new();
        let t = &f.template;
        let one_cusp = t.cusps.len() == 1 && target.cusps.len() == 1;
        let maps: Option<Vec<Map>> = match compare::assignments(shadow, target, Depth::Slopes)? {
            Ok(asg) if one_cusp => {
                let mut all = Vec::new();
                let mut free = false;
                for a in &asg {
                    match a.maps[0].maps() {
                        Some(ms) => all.extend_from_slice(ms),
                        None => free = true,
                    }
                }
                (!free).then_some(all)
            }
            _ => None,
        };
        let inverses = |ms: &[Map]| ms.iter().map(|m| m.inverse()).collect::<Result<Vec<_>, _>>();
        let knots = shadow.is_knot() && target.is_knot();
        let slopes_cite = if knots { cite::SLOPES_KNOT } else { cite::SLOPES };

        if let Some(ms) = &maps {
            let inv = inverses(ms)?;
            for kind in SetKind::ALL {
                let (Some(st), Some(sp)) = (t.cusps[0].set(kind), target.cusps[0].set(kind)) else {
                    continue;
                };
                if st.completeness == Completeness::Subset {
                    continue;
                }
                let Some(upper) = sp.upper() else { continue };
                for e in st.slopes.iter().filter(|e| !e.is_constant()) {
                    let mut values = BTreeSet::new();
                    for m in &inv {
                        for u in &upper {
                            if let Some(x) = e.solve(&m.apply_rational(u)?) {
                                values.insert(ext(x));
                            }
                        }
                    }
                    pins.push(Pin {
                        distinguisher: Distinguisher::ExceptionalSlopes,
                        citation: slopes_cite,
                        what: format!("{} slope {e} lies in {}", kind.name(), show_set(&upper)),
                        values,
                    });
                }
            }
            if let (Some(h), Some(hp)) = (&t.cusps[0].half_integral_toroidal, &target.cusps[0].half_integral_toroidal) {
                if knots && !h.value.is_constant() {
                    let mut values = BTreeSet::new();
                    for m in &inv {
                        if let Some(x) = h.value.solve(&m.apply_rational(&hp.value)?) {
                            values.insert(ext(x));
                        }
                    }
                    pins.push(Pin {
                        distinguisher: Distinguisher::HalfIntegral,
                        citation: cite::HALF_INTEGRAL,
                        what: format!("half-integral toroidal slope {} matches {}", h.value, hp.value),
                        values,
                    });
                }
            }
            if let Some(values) = self.null_pin(f, target, &inv)? {
                pins.push(values);
            }
        }
        if let (Some(a), Some(g)) = (&t.alexander, &target.alexander) {
            if let AlexanderTemplate::Twist { twist } = &a.value {
                if knots {
                    let lead = g.value.max_exp().map(|e| g.value.coeff(e)).unwrap_or(0);
                    let values = [lead, -lead]
                        .into_iter()
                        .filter_map(|m| twist.solve(&Rational::integer(m)).map(ext))
                        .collect();
                    pins.push(Pin {
                        distinguisher: Distinguisher::Alexander,
                        citation: cite::ALEXANDER,
                        what: format!("twist-knot polynomial matches {}", g.value),
                        values,
                    });
                }
            }
        }
        Ok(pins)
    }

    /// Parameter values whose null-homologous slope can map to the target's.
    fn null_pin(&self, f: &FamilyEntry, target: &ManifoldProfile, inv: &[Map]) -> Result<Option<Pin>, EngineError> {
        let Some((k, fill)) = f.parametric_fill() else { return Ok(None) };
        let Some(BoundaryKernel::Line(sp)) = compare::cusp_kernel(target, 0)? else {
            return Ok(None);
        };
        let d = &f.template.linking.as_ref().expect("parametric fill implies linking").value;
        let mut fills = Vec::new();
        for (j, e) in d.fill.iter().enumerate() {
            fills.push(match e {
                Some(e) if j != k => Some(e.eval(None).map_err(|err| EngineError::PreconditionViolated(err.to_string()))?),
                _ => None,
            });
        }
        let Some(i) = d.fill.iter().position(|e| e.is_none()) else { return Ok(None) };
        let diagram = SurgeryDiagram::new(d.lk.clone(), fills)?;
        let Some(m) = null_slope_transform(&diagram, k, i)? else { return Ok(None) };
        let det = m[0][0] as i128 * m[1][1] as i128 - m[0][1] as i128 * m[1][0] as i128;
        if det == 0 {
            return Ok(None);
        }
        let mut values = BTreeSet::new();
        for psi in inv {
            let s = slope::from_rational(&psi.apply_rational(&sp)?);
            let (a, b) = (s.p() as i128, s.q() as i128);
            let p = m[1][1] as i128 * a - m[0][1] as i128 * b;
            let q = -(m[1][0] as i128) * a + m[0][0] as i128 * b;
            let (Ok(p), Ok(q)) = (i64::try_from(p), i64::try_from(q)) else {
                return Err(Overflow.into());
            };
            if p == 0 && q == 0 {
                continue;
            }
            let g = num_integer::gcd(p, q);
            let r = Rational::new(p / g, q / g)?;
            if let Some(x) = fill.solve(&r) {
                values.insert(ext(x));
            }
        }
        Ok(Some(Pin {
            distinguisher: Distinguisher::NullSlope,
            citation: cite::NULL,
            what: format!("null-homologous slope matches {sp}"),
            values,
        }))
    }

    /// Returns the surviving members of a family candidate; eliminations and
    /// trace steps are appended.
    fn family_candidate(
        &self,
        f: &'a FamilyEntry,
        target: &ManifoldProfile,
        eliminated: &mut Vec<Elimination>,
        trace: &mut Vec<TraceStep>,
    ) -> Result<Option<Vec<Member<'a>>>, EngineError> {
        let mut eliminate = |id: &str, m: Mismatch, trace: &mut Vec<TraceStep>| {
            trace.push(TraceStep::new(
                format!("distinguish:{}", m.distinguisher),
                m.citation.clone(),
                id.to_string(),
                format!("eliminated: {}", m.detail),
            ));
            eliminated.push(Elimination {
                id: id.to_string(),
                distinguisher: m.distinguisher,
                citation: m.citation,
                detail: m.detail,
            });
        };
        if let (Some(h), Some(g)) = (&f.template.homology, target.homology_value()) {
            let possible = h.value.possible();
            if !possible.contains(&g) {
                let detail = format!(
                    "every member has H1 in {{{}}}, target has {g}",
                    possible.iter().map(|x| x.to_string()).join(", ")
                );
                eliminate(&f.id, compare_mismatch(Distinguisher::Homology, cite::HOMOLOGY, detail), trace);
                return Ok(Some(Vec::new()));
            }
        }
        let shadow = f.shadow();
        if let Some(m) = compare::compare(&shadow, target)? {
            eliminate(&f.id, m, trace);
            return Ok(Some(Vec::new()));
        }
        let pins = self.family_pins(f, &shadow, target)?;
        if pins.is_empty() {
            trace.push(TraceStep::new(
                "pin-parameter",
                cite::FILLING,
                f.id.clone(),
                "no recorded invariant determines the parameter",
            ));
            return Ok(None);
        }
        let admissible =
            |x: &Rational| f.in_domain(x) || self.catalog.override_for(&f.id, x).is_some();
        let mut values: Option<BTreeSet<Rational>> = None;
        for pin in &pins {
            let here: BTreeSet<Rational> = pin.values.iter().filter(|x| admissible(x)).copied().collect();
            let next: BTreeSet<Rational> = match &values {
                None => here,
                Some(v) => v.intersection(&here).copied().collect(),
            };
            trace.push(TraceStep::new(
                "pin-parameter",
                pin.citation,
                format!("{}: {}", f.id, pin.what),
                format!("{} in {}", f.parameter.name, show_set(&next)),
            ));
            if next.is_empty() {
                let detail = format!("no admissible {} with {}", f.parameter.name, pin.what);
                eliminate(&f.id, compare_mismatch(pin.distinguisher, pin.citation, detail), trace);
                return Ok(Some(Vec::new()));
            }
            values = Some(next);
        }
        let mut members = Vec::new();
        for x in values.unwrap_or_default() {
            let r = self.catalog.instance(f, &x)?;
            let id = r.manifold_id().expect("instances are manifolds");
            let p = r.profile().expect("instances have profiles");
            match compare::compare(p, target)? {
                Some(m) => eliminate(&id, m, trace),
                None => {
                    trace.push(TraceStep::new("distinguish", cite::FILLING, id.clone(), "survives every invariant"));
                    members.push(Member { id, family: Some((f, x)) });
                }
            }
        }
        Ok(Some(members))
    }

    /// Eliminates candidates whose recorded data contradicts `target`.
    pub fn distinguish_candidates(
        &self,
        candidates: &[&str],
        target: &ManifoldProfile,
        label: &str,
    ) -> Result<RigidityVerdict, EngineError> {
        let mut trace = Vec::new();
        let mut eliminated = Vec::new();
        let mut survivors: Vec<Member<'a>> = Vec::new();
        let mut undetermined = Vec::new();
        for c in candidates {
            let resolved = self
                .catalog
                .resolve(c)
                .map_err(|_| EngineError::UnknownCandidate(c.to_string()))?;
            match resolved {
                Resolved::Family(f) => match self.family_candidate(f, target, &mut eliminated, &mut trace)? {
                    Some(ms) => survivors.extend(ms),
                    None => undetermined.push(f.id.clone()),
                },
                r => {
                    let id = r.manifold_id().expect("not a family");
                    let family = match &r {
                        Resolved::Manifold { via: Some((f, x)), .. } => Some((*f, *x)),
                        Resolved::Instance { family, parameter, .. } => Some((*family, *parameter)),
                        _ => None,
                    };
                    match compare::compare(r.profile().expect("not a family"), target)? {
                        Some(m) => {
                            trace.push(TraceStep::new(
                                format!("distinguish:{}", m.distinguisher),
                                m.citation.clone(),
                                id.clone(),
                                format!("eliminated: {}", m.detail),
                            ));
                            eliminated.push(Elimination {
                                id,
                                distinguisher: m.distinguisher,
                                citation: m.citation,
                                detail: m.detail,
                            });
                        }
                        None => {
                            trace.push(TraceStep::new("distinguish", cite::FILLING, id.clone(), "survives every invariant"));
                            survivors.push(Member { id, family });
                        }
                    }
                }
            }
        }
        let mut classes = self.quotient(&survivors, &mut trace);
        classes.extend(undetermined.iter().map(|f| vec![f.clone()]));
        let status = if !undetermined.is_empty() || classes.len() > 1 {
            Status::Ambiguous
        } else if classes.len() == 1 {
            Status::Rigid
        } else {
            Status::Unknown
        };
        Ok(RigidityVerdict {
            target: label.to_string(),
            candidates: candidates.iter().map(|s| s.to_string()).collect(),
            eliminated,
            survivors: classes,
            status,
            trace,
        })
    }

    /// Groups survivors identified by recorded homeomorphisms.
    fn quotient(&self, survivors: &[Member<'a>], trace: &mut Vec<TraceStep>) -> Vec<Vec<String>> {
        let ids: Vec<String> = survivors.iter().map(|m| m.id.clone()).unique().collect();
        let index: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut parent: Vec<usize> = (0..ids.len()).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for m in survivors {
            let Some((f, x)) = &m.family else { continue };
            let mut seen = BTreeSet::from([*x]);
            let mut frontier = vec![*x];
            while let Some(y) = frontier.pop() {
                for (rel, z) in f.relations.iter().zip(f.related(&y)) {
                    if seen.len() > 32 || !seen.insert(z) {
                        continue;
                    }
                    frontier.push(z);
                    let Ok(r) = self.catalog.instance(f, &z) else { continue };
                    let Some(other) = r.manifold_id() else { continue };
                    if let (Some(&a), Some(&b)) = (index.get(m.id.as_str()), index.get(other.as_str())) {
                        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                        if ra != rb {
                            parent[ra.max(rb)] = ra.min(rb);
                            trace.push(TraceStep::new(
                                "homeomorphism",
                                rel.provenance.clone(),
                                format!("{}: {} -> {}", f.id, f.parameter.name, rel.map),
                                format!("{} = {}", m.id, other),
                            ));
                        }
                    }
                }
            }
        }
        let mut classes: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for i in 0..ids.len() {
            let r = find(&mut parent, i);
            classes.entry(r).or_default().push(ids[i].clone());
        }
        classes.into_values().collect()
    }

    fn preamble(&self, p: &ManifoldProfile, label: &str) -> Vec<TraceStep> {
        let mut t = vec![TraceStep::new(
            "hyperbolic-detection",
            cite::HYPERBOLIC,
            label.to_string(),
            format!("any profinitely isomorphic N is finite-volume hyperbolic with {} cusp(s)", p.cusps.len()),
        )];
        if p.is_knot() {
            t.push(TraceStep::new(
                "knot-complement-detection",
                cite::KNOT_DETECTION,
                label.to_string(),
                "N is a hyperbolic knot complement in S^3",
            ));
            t.push(TraceStep::new(
                "knot-surgery-sign",
                cite::SIGN,
                label.to_string(),
                "K(r) and K'(s r) correspond for one sign s",
            ));
        }
        t.push(TraceStep::new(
            "filling-transport",
            cite::FILLING,
            label.to_string(),
            "boundary maps carry exceptional slopes of each type to slopes of the same type",
        ));
        t
    }

    fn run_rule(
        &self,
        rule: &'static Rule,
        p: &ManifoldProfile,
        label: &str,
    ) -> Result<RigidityVerdict, EngineError> {
        let mut trace = self.preamble(p, label);
        if !rule.premise.holds(p) {
            trace.push(TraceStep::new(
                rule.id,
                rule.citation,
                rule.premise.describe(),
                "premise not established by the recorded data",
            ));
            return Ok(unknown(label, trace));
        }
        trace.push(TraceStep::new(
            rule.id,
            rule.citation,
            rule.premise.describe(),
            format!("N is one of {}", rule.candidates.join(", ")),
        ));
        if rule.id == "klein-pair-1" {
            match self.klein_max_guard() {
                Ok(maxima) => trace.push(TraceStep::new(
                    "klein-max-guard",
                    cite::MAX_GUARD,
                    maxima.iter().map(|(id, d)| format!("{id}: {d}")).join(", "),
                    "none has Klein-bottle slopes at distance 4, so the maximum is exactly 4",
                )),
                Err(e) => {
                    trace.push(TraceStep::new("klein-max-guard", cite::MAX_GUARD, label.to_string(), e.to_string()));
                    return Ok(unknown(label, trace));
                }
            }
        }
        if matches!(rule.premise, Premise::KleinPair { .. }) {
            trace.push(TraceStep::new(
                "distance-4-pair",
                cite::DISTANCE_FOUR,
                "Klein-bottle slopes at distance 4",
                "the boundary map is one of two classes",
            ));
        }
        let mut v = self.distinguish_candidates(rule.candidates, p, label)?;
        trace.append(&mut v.trace);
        v.trace = trace;
        Ok(v)
    }

    /// Applies the first rule whose premise the profile satisfies.
    pub fn decide(&self, p: &ManifoldProfile, label: &str) -> Result<RigidityVerdict, EngineError> {
        match RULES.iter().find(|r| r.premise.holds(p)) {
            Some(r) => self.run_rule(r, p, label),
            None => {
                let mut trace = self.preamble(p, label);
                trace.push(TraceStep::new(
                    "no-rule",
                    cite::FILLING,
                    label.to_string(),
                    "no characterisation rule applies",
                ));
                Ok(unknown(label, trace))
            }
        }
    }

    /// Runs the rigidity argument for a catalog manifold.
    pub fn verify_rigidity_theorem(&self, target: &str) -> Result<RigidityVerdict, EngineError> {
        let not_covered = || EngineError::NotCovered(target.to_string());
        let resolved = self.catalog.resolve(target).map_err(|_| not_covered())?;
        let rule_id = match &resolved {
            Resolved::Manifold { entry, via: Some(_) } => RULES
                .iter()
                .find(|r| matches!(r.premise, Premise::KnotToroidalPair { .. }) && r.premise.holds(&entry.profile))
                .map(|r| r.id),
            Resolved::Manifold { entry, via: None } => fixed_rule(&entry.id),
            Resolved::Instance { family, .. } => fixed_rule(&family.id),
            Resolved::Family(_) => None,
        }
        .ok_or_else(not_covered)?;
        let p = resolved.profile().ok_or_else(not_covered)?;
        self.run_rule(rule(rule_id).expect("fixed rules exist"), p, target)
    }

    /// `verify_rigidity_theorem` over `COVERED_TARGETS`, in that order.
    pub fn covered_targets() -> &'static [&'static str] {
        COVERED_TARGETS
    }

    /// Rigidity of the knot exterior from a rigid closed surgery along an
    /// unoriented characterising slope. Slope 0 needs only an oriented
    /// characterisation, since it is then unoriented as well.
    pub fn apply_characterising_slope_criterion(
        &self,
        knot: &str,
        alpha: Rational,
        closed_rigid: bool,
        characterising: bool,
    ) -> Result<Option<CriterionConclusion>, EngineError> {
        let r = self.catalog.resolve(knot).map_err(|_| EngineError::UnknownCandidate(knot.to_string()))?;
        let p = r.profile().ok_or_else(|| EngineError::PreconditionViolated(format!("{knot} is a family")))?;
        let kind = p.flags.knot_type.as_ref().map(|k| k.value);
        if !p.is_knot() || kind.is_none() {
            return Err(EngineError::PreconditionViolated(format!(
                "{knot} is not flagged as a hyperbolic or hyperbolic-type satellite knot"
            )));
        }
        if !(closed_rigid && characterising) {
            return Ok(None);
        }
        let upgraded = alpha == Rational::integer(0);
        let mut citations = vec![cite::CRITERION.to_string(), cite::HYPERBOLIC.to_string()];
        if upgraded {
            citations.push(cite::ZERO_UPGRADE.to_string());
        }
        let kind = match kind.expect("checked") {
            KnotType::Hyperbolic => "hyperbolic",
            KnotType::HyperbolicSatellite => "hyperbolic-type satellite",
        };
        Ok(Some(CriterionConclusion {
            knot: r.manifold_id().unwrap_or_else(|| knot.to_string()),
            slope: alpha.to_string(),
            upgraded,
            statement: format!(
                "the exterior of the {kind} knot {knot} is profinitely rigid among compact orientable 3-manifolds"
            ),
            citations,
        }))
    }

    /// The criterion with both inputs read from the catalog's surgery facts.
    pub fn criterion_from_catalog(&self, knot: &str) -> Result<Option<CriterionConclusion>, EngineError> {
        let r = self.catalog.resolve(knot).map_err(|_| EngineError::UnknownCandidate(knot.to_string()))?;
        let p = r.profile().ok_or_else(|| EngineError::PreconditionViolated(format!("{knot} is a family")))?;
        for s in &p.surgeries {
            let rigid = s.closed_rigid.as_ref().is_some_and(|c| c.value);
            let characterising = match s.characterising.as_ref().map(|c| c.value) {
                Some(CharacterisingKind::Unoriented) => true,
                Some(CharacterisingKind::Oriented) => s.slope == Rational::integer(0),
                None => false,
            };
            if let Some(c) = self.apply_characterising_slope_criterion(knot, s.slope, rigid, characterising)? {
                return Ok(Some(c));
            }
        }
        Ok(None)
    }
}

fn compare_mismatch(d: Distinguisher, citation: &str, detail: String) -> Mismatch {
    Mismatch {
        distinguisher: d,
        citation: citation.to_string(),
        detail,
    }
}

fn unknown(label: &str, trace: Vec<TraceStep>) -> RigidityVerdict {
    RigidityVerdict {
        target: label.to_string(),
        candidates: Vec::new(),
        eliminated: Vec::new(),
        survivors: Vec::new(),
        status: Status::Unknown,
        trace,
    }
}

#[cfg(test)]
mod tests;
