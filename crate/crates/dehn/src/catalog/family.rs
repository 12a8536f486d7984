//! Instantiating family templates.

use num_rational::Rational64;

use super::expr::{from_ext, Expr, ExprError};
use super::model::*;
use super::CatalogError;
use crate::alexander::twist_knot_alexander;
use crate::homology::SurgeryDiagram;

fn inst_err(f: &FamilyEntry, x: &Rational, e: impl std::fmt::Display) -> CatalogError {
    CatalogError::Instantiate {
        family: f.id.clone(),
        value: x.to_string(),
        message: e.to_string(),
    }
}

impl Condition {
    pub fn holds(&self, var: Option<(&str, Rational64)>) -> Result<bool, ExprError> {
        match self {
            Condition::Divides(k, e) => {
                let v = e.eval_rational(var)?;
                Ok(v.is_integer() && *k != 0 && (v.to_integer() % k) == 0)
            }
        }
    }
}

impl FamilyEntry {
    fn var(&self, x: Rational64) -> Option<(&str, Rational64)> {
        Some((self.parameter.name.as_str(), x))
    }

    /// Whether `x` is an admissible parameter value for the template.
    pub fn in_domain(&self, x: &Rational) -> bool {
        if x.is_infinite() || self.parameter.exclude.contains(x) {
            return false;
        }
        match self.parameter.domain {
            Domain::Integer => x.is_integral(),
            Domain::Rational => true,
        }
    }

    fn name_parts(&self) -> Result<(&str, Expr, &str), CatalogError> {
        let bad = |msg: &str| CatalogError::InvariantViolation {
            entry: self.id.clone(),
            rule: "instance-name".into(),
            detail: msg.into(),
        };
        let open = self.instance_name.find('{').ok_or_else(|| bad("missing `{`"))?;
        let close = self.instance_name.rfind('}').ok_or_else(|| bad("missing `}`"))?;
        if close < open || self.instance_name[open + 1..close].contains(['{', '}']) {
            return Err(bad("expected exactly one {expr} hole"));
        }
        let expr = self.instance_name[open + 1..close]
            .parse()
            .map_err(|e: ExprError| bad(&e.to_string()))?;
        Ok((&self.instance_name[..open], expr, &self.instance_name[close + 1..]))
    }

    /// Canonical id of the instance at `x`.
    pub fn instance_id(&self, x: &Rational) -> Result<String, CatalogError> {
        let (pre, e, post) = self.name_parts()?;
        let xr = from_ext(x).ok_or_else(|| inst_err(self, x, "infinite parameter"))?;
        let v = e.eval(self.var(xr)).map_err(|err| inst_err(self, x, err))?;
        Ok(format!("{pre}{v}{post}"))
    }

    /// Parameter value named by `id` when `id` is a canonical instance
    /// name, ignoring the excluded values.
    pub fn parse_parameter(&self, id: &str) -> Option<Rational> {
        let (pre, e, post) = self.name_parts().ok()?;
        let middle = id.strip_prefix(pre)?.strip_suffix(post)?;
        let v: Rational = middle.parse().ok()?;
        let x = super::expr::to_ext(e.solve(&v)?);
        if self.parameter.domain == Domain::Integer && !x.is_integral() {
            return None;
        }
        (self.instance_id(&x).ok()? == id).then_some(x)
    }

    /// Parameter value named by `id`, if `id` names an instance of the template.
    pub fn parse_instance(&self, id: &str) -> Option<Rational> {
        self.parse_parameter(id).filter(|x| self.in_domain(x))
    }

    /// Parameter values identified with `x` by the recorded homeomorphisms.
    pub fn related(&self, x: &Rational) -> Vec<Rational> {
        let Some(xr) = from_ext(x) else { return Vec::new() };
        self.relations
            .iter()
            .filter_map(|r| r.map.eval(self.var(xr)).ok())
            .collect()
    }

    /// The concrete profile at `x`. Does not consult manifold entries that
    /// override the template at special parameter values.
    pub fn instantiate(&self, x: &Rational) -> Result<ManifoldProfile, CatalogError> {
        if !self.in_domain(x) {
            return Err(CatalogError::OutsideDomain {
                family: self.id.clone(),
                value: x.to_string(),
            });
        }
        let xr = from_ext(x).expect("domain values are finite");
        let var = self.var(xr);
        let err = |e: ExprError| inst_err(self, x, e);
        let slope = |e: &Expr| e.eval(var).map_err(err);
        let set = |s: &SlopeSet<Template>| -> Result<SlopeSet<Concrete>, CatalogError> {
            Ok(SlopeSet {
                completeness: s.completeness,
                slopes: s.slopes.iter().map(slope).collect::<Result<_, _>>()?,
                opaque: s.opaque.clone(),
                max_delta: s.max_delta,
                provenance: s.provenance.clone(),
            })
        };
        let opt_set = |s: &Option<SlopeSet<Template>>| s.as_ref().map(set).transpose();
        let mut cusps = Vec::new();
        for c in &self.template.cusps {
            cusps.push(Cusp {
                label: c.label.clone(),
                e: opt_set(&c.e)?,
                e_s: opt_set(&c.e_s)?,
                e_t: opt_set(&c.e_t)?,
                e_k: opt_set(&c.e_k)?,
                solid_torus_fillings: opt_set(&c.solid_torus_fillings)?,
                half_integral_toroidal: c
                    .half_integral_toroidal
                    .as_ref()
                    .map(|h| Ok::<_, CatalogError>(Sourced::new(slope(&h.value)?, h.provenance.clone())))
                    .transpose()?,
            });
        }
        let homology = match &self.template.homology {
            None => None,
            Some(h) => Some(Sourced::new(
                match &h.value {
                    HomologyTemplate::Fixed(g) => g.clone(),
                    HomologyTemplate::Cases { cases, otherwise } => {
                        let mut pick = otherwise.clone();
                        for c in cases {
                            if c.when.holds(var).map_err(err)? {
                                pick = c.group.clone();
                                break;
                            }
                        }
                        pick
                    }
                },
                h.provenance.clone(),
            )),
        };
        let linking = match &self.template.linking {
            None => None,
            Some(d) => {
                let fill = d
                    .value
                    .fill
                    .iter()
                    .map(|f| f.as_ref().map(slope).transpose())
                    .collect::<Result<Vec<_>, _>>()?;
                let diagram = SurgeryDiagram::new(d.value.lk.clone(), fill).map_err(|e| inst_err(self, x, e))?;
                Some(Sourced::new(diagram, d.provenance.clone()))
            }
        };
        let alexander = match &self.template.alexander {
            None => None,
            Some(a) => Some(Sourced::new(
                match &a.value {
                    AlexanderTemplate::Fixed(p) => p.clone(),
                    AlexanderTemplate::Twist { twist } => {
                        let m = twist.eval_rational(var).map_err(err)?;
                        if !m.is_integer() {
                            return Err(inst_err(self, x, "twist parameter must be an integer"));
                        }
                        twist_knot_alexander(m.to_integer()).map_err(|e| inst_err(self, x, e))?
                    }
                },
                a.provenance.clone(),
            )),
        };
        let surgeries = self
            .template
            .surgeries
            .iter()
            .map(|s| {
                Ok(SurgeryFact {
                    slope: slope(&s.slope)?,
                    characterising: s.characterising.clone(),
                    closed_rigid: s.closed_rigid.clone(),
                })
            })
            .collect::<Result<_, CatalogError>>()?;
        Ok(Profile {
            cusps,
            homology,
            flags: self.template.flags.clone(),
            linking,
            alexander,
            surgeries,
        })
    }

    /// The data shared by every instance: parameter-dependent slopes are
    /// dropped (so exact sets become supersets) and parameter-dependent
    /// fields are omitted.
    pub fn shadow(&self) -> ManifoldProfile {
        let konst = |e: &Expr| if e.is_constant() { e.eval(None).ok() } else { None };
        let set = |s: &Option<SlopeSet<Template>>| -> Option<SlopeSet<Concrete>> {
            let s = s.as_ref()?;
            let kept: Vec<Rational> = s.slopes.iter().filter_map(konst).collect();
            let dropped = kept.len() != s.slopes.len();
            let completeness = match (s.completeness, dropped) {
                (c, false) => c,
                (Completeness::Subset, true) => return None,
                (_, true) => Completeness::Superset,
            };
            Some(SlopeSet {
                completeness,
                slopes: kept,
                opaque: s.opaque.clone(),
                max_delta: s.max_delta,
                provenance: s.provenance.clone(),
            })
        };
        let cusps = self
            .template
            .cusps
            .iter()
            .map(|c| Cusp {
                label: c.label.clone(),
                e: set(&c.e),
                e_s: set(&c.e_s),
                e_t: set(&c.e_t),
                e_k: set(&c.e_k),
                solid_torus_fillings: set(&c.solid_torus_fillings),
                half_integral_toroidal: c
                    .half_integral_toroidal
                    .as_ref()
                    .and_then(|h| Some(Sourced::new(konst(&h.value)?, h.provenance.clone()))),
            })
            .collect();
        let homology = self.template.homology.as_ref().and_then(|h| match &h.value {
            HomologyTemplate::Fixed(g) => Some(Sourced::new(g.clone(), h.provenance.clone())),
            HomologyTemplate::Cases { .. } => None,
        });
        let linking = self.template.linking.as_ref().and_then(|d| {
            let fill = d
                .value
                .fill
                .iter()
                .map(|f| match f {
                    None => Some(None),
                    Some(e) => konst(e).map(Some),
                })
                .collect::<Option<Vec<_>>>()?;
            let diagram = SurgeryDiagram::new(d.value.lk.clone(), fill).ok()?;
            Some(Sourced::new(diagram, d.provenance.clone()))
        });
        let alexander = self.template.alexander.as_ref().and_then(|a| match &a.value {
            AlexanderTemplate::Fixed(p) => Some(Sourced::new(p.clone(), a.provenance.clone())),
            AlexanderTemplate::Twist { .. } => None,
        });
        Profile {
            cusps,
            homology,
            flags: self.template.flags.clone(),
            linking,
            alexander,
            surgeries: Vec::new(),
        }
    }

    /// Every expression appearing in the entry, for variable checks.
    pub(crate) fn expressions(&self) -> Vec<&Expr> {
        let t = &self.template;
        let mut out: Vec<&Expr> = Vec::new();
        for c in &t.cusps {
            for kind in SetKind::ALL {
                if let Some(s) = c.set(kind) {
                    out.extend(s.slopes.iter());
                }
            }
            if let Some(h) = &c.half_integral_toroidal {
                out.push(&h.value);
            }
        }
        if let Some(h) = &t.homology {
            if let HomologyTemplate::Cases { cases, .. } = &h.value {
                out.extend(cases.iter().map(|c| match &c.when {
                    Condition::Divides(_, e) => e,
                }));
            }
        }
        if let Some(d) = &t.linking {
            out.extend(d.value.fill.iter().flatten());
        }
        if let Some(a) = &t.alexander {
            if let AlexanderTemplate::Twist { twist } = &a.value {
                out.push(twist);
            }
        }
        out.extend(t.surgeries.iter().map(|s| &s.slope));
        out.extend(self.relations.iter().map(|r| &r.map));
        out
    }

    /// Index of the single linking component whose fill depends on the
    /// parameter, with that fill expression.
    pub fn parametric_fill(&self) -> Option<(usize, &Expr)> {
        let d = &self.template.linking.as_ref()?.value;
        let mut it = d
            .fill
            .iter()
            .enumerate()
            .filter_map(|(i, f)| f.as_ref().filter(|e| !e.is_constant()).map(|e| (i, e)));
        let first = it.next()?;
        it.next().is_none().then_some(first)
    }
}
