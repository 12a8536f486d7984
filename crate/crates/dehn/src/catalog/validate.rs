//! Consistency rules checked on every load.

use std::collections::{BTreeMap, BTreeSet};

use super::model::*;
use super::{Catalog, CatalogError};
use crate::homology::first_homology;

fn violation(entry: &str, rule: &str, detail: impl Into<String>) -> CatalogError {
    CatalogError::InvariantViolation {
        entry: entry.to_string(),
        rule: rule.to_string(),
        detail: detail.into(),
    }
}

pub(super) fn validate(catalog: &Catalog) -> Result<(), CatalogError> {
    let mut names: BTreeMap<&str, &str> = BTreeMap::new();
    for e in catalog.entries() {
        names.insert(e.id(), e.id());
    }
    for m in catalog.manifolds() {
        for a in &m.aliases {
            if let Some(prev) = names.insert(a, &m.id) {
                return Err(violation(&m.id, "unique-id", format!("alias `{a}` already names `{prev}`")));
            }
        }
    }
    for e in catalog.entries() {
        match e {
            Entry::Manifold(m) => {
                check_profile(&m.id, &m.profile)?;
                check_memberships(catalog, m)?;
            }
            Entry::Family(f) => check_family(f)?,
        }
    }
    Ok(())
}

fn check_provenance(id: &str, what: &str, p: &str) -> Result<(), CatalogError> {
    if p.trim().is_empty() {
        return Err(violation(id, "provenance", format!("{what} has no citation")));
    }
    Ok(())
}

fn check_set(id: &str, where_: &str, s: &SlopeSet<Concrete>) -> Result<(), CatalogError> {
    check_provenance(id, where_, &s.provenance)?;
    let distinct: BTreeSet<_> = s.slopes.iter().collect();
    if distinct.len() != s.slopes.len() {
        return Err(violation(id, "duplicate-slope", format!("{where_} lists a slope twice")));
    }
    let tokens: BTreeSet<_> = s.opaque.iter().collect();
    if tokens.len() != s.opaque.len() {
        return Err(violation(id, "duplicate-slope", format!("{where_} lists an opaque slope twice")));
    }
    let listed = max_delta_of(s.slopes.iter());
    if let Some(d) = s.max_delta {
        if d < 0 {
            return Err(violation(id, "max-delta", format!("{where_} has negative max_delta")));
        }
        let exact_coords = s.completeness == Completeness::Exact && s.opaque.is_empty();
        match (s.completeness, listed) {
            (_, Some(l)) if exact_coords && l != d => {
                return Err(violation(id, "max-delta", format!("{where_}: slopes give {l}, recorded {d}")));
            }
            (Completeness::Superset, Some(l)) if l > d => {
                return Err(violation(id, "max-delta", format!("{where_}: members reach {l} > {d}")));
            }
            (Completeness::Subset, l) if s.opaque.is_empty() && l.unwrap_or(0) < d => {
                return Err(violation(id, "max-delta", format!("{where_}: bound cannot reach {d}")));
            }
            _ => {}
        }
    }
    Ok(())
}

fn check_profile(id: &str, p: &ManifoldProfile) -> Result<(), CatalogError> {
    if p.cusps.is_empty() {
        return Err(violation(id, "cusps", "a cusped manifold needs at least one cusp"));
    }
    for (i, c) in p.cusps.iter().enumerate() {
        for kind in SetKind::ALL {
            if let Some(s) = c.set(kind) {
                check_set(id, &format!("cusps[{i}].{}", kind.name()), s)?;
            }
        }
        let upper = c.e.as_ref().and_then(|e| e.upper());
        for kind in [SetKind::Es, SetKind::Et, SetKind::Ek, SetKind::SolidTorus] {
            let (Some(sub), Some(u)) = (c.set(kind), &upper) else { continue };
            if let Some(x) = sub.members().iter().find(|x| !u.contains(x)) {
                return Err(violation(id, "inclusion", format!("cusps[{i}]: {x} in {} but not in E", kind.name())));
            }
            if sub.certain_count() > u.len() {
                return Err(violation(id, "inclusion", format!("cusps[{i}]: {} larger than E", kind.name())));
            }
            if let (Some(d), Some(bound)) = (sub.known_max_delta(), max_delta_of(u.iter())) {
                if d > bound {
                    return Err(violation(
                        id,
                        "inclusion",
                        format!("cusps[{i}]: {} reaches distance {d} beyond E", kind.name()),
                    ));
                }
            }
        }
        if let (Some(k), Some(s)) = (&c.e_k, &c.e_s) {
            if let Some(x) = k.members().intersection(&s.members()).next() {
                return Err(violation(id, "disjoint", format!("cusps[{i}]: {x} in both E_k and E_s")));
            }
        }
        if let Some(h) = &c.half_integral_toroidal {
            check_provenance(id, "half_integral_toroidal", &h.provenance)?;
            if !h.value.is_half_integral() {
                return Err(violation(id, "half-integral", format!("cusps[{i}]: {} is not half-integral", h.value)));
            }
            if let Some(t) = &c.e_t {
                if let Some(u) = t.upper() {
                    if !u.contains(&h.value) {
                        return Err(violation(id, "half-integral", format!("cusps[{i}]: {} not in E_t", h.value)));
                    }
                }
                if let Some(x) = t.members().iter().find(|x| !x.is_integral() && **x != h.value) {
                    return Err(violation(
                        id,
                        "half-integral",
                        format!("cusps[{i}]: {x} is a second non-integral toroidal slope"),
                    ));
                }
            }
        }
    }
    if let Some(h) = &p.homology {
        check_provenance(id, "homology", &h.provenance)?;
    }
    if let Some(d) = &p.linking {
        check_provenance(id, "linking", &d.provenance)?;
        if d.value.unfilled().len() != p.cusps.len() {
            return Err(violation(id, "linking-cusps", "unfilled components must match the cusps"));
        }
        let computed = first_homology(&d.value).map_err(|e| violation(id, "homology-linking", e.to_string()))?;
        if let Some(h) = &p.homology {
            if h.value != computed {
                return Err(violation(
                    id,
                    "homology-linking",
                    format!("recorded {} but the diagram gives {computed}", h.value),
                ));
            }
        }
    }
    let f = &p.flags;
    for (name, prov) in [
        ("knot_complement", f.knot_complement.as_ref().map(|x| &x.provenance)),
        ("link_complement", f.link_complement.as_ref().map(|x| &x.provenance)),
        ("fibered", f.fibered.as_ref().map(|x| &x.provenance)),
        ("knot_type", f.knot_type.as_ref().map(|x| &x.provenance)),
    ] {
        if let Some(pr) = prov {
            check_provenance(id, name, pr)?;
        }
    }
    if p.is_knot() {
        if p.cusps.len() != 1 {
            return Err(violation(id, "knot", "a knot complement has one cusp"));
        }
        if let Some(h) = p.homology_value() {
            if h != crate::homology::AbelianGroup::free(1) {
                return Err(violation(id, "knot", format!("a knot complement has H1 = Z, not {h}")));
            }
        }
        if f.is_link_complement() == Some(false) {
            return Err(violation(id, "knot", "a knot complement is a link complement"));
        }
    }
    if let Some(a) = &p.alexander {
        check_provenance(id, "alexander", &a.provenance)?;
    }
    for s in &p.surgeries {
        if let Some(c) = &s.characterising {
            check_provenance(id, "characterising", &c.provenance)?;
        }
        if let Some(c) = &s.closed_rigid {
            check_provenance(id, "closed_rigid", &c.provenance)?;
        }
    }
    Ok(())
}

fn check_memberships(catalog: &Catalog, m: &ManifoldEntry) -> Result<(), CatalogError> {
    for mb in &m.member_of {
        check_provenance(&m.id, "member_of", &mb.provenance)?;
        let Some(Entry::Family(f)) = catalog.get(&mb.family) else {
            return Err(violation(&m.id, "membership", format!("`{}` is not a family", mb.family)));
        };
        if mb.parameter.is_infinite()
            || (f.parameter.domain == Domain::Integer && !mb.parameter.is_integral())
        {
            return Err(violation(&m.id, "membership", format!("{} is not a parameter of {}", mb.parameter, f.id)));
        }
        if m.profile.cusps.len() != f.template.cusps.len() {
            return Err(violation(&m.id, "membership", format!("cusp count differs from {}", f.id)));
        }
    }
    Ok(())
}

fn check_family(f: &FamilyEntry) -> Result<(), CatalogError> {
    let id = &f.id;
    check_provenance(id, "parameter", &f.parameter.provenance)?;
    if f.template.cusps.is_empty() {
        return Err(violation(id, "cusps", "a cusped manifold needs at least one cusp"));
    }
    for e in f.expressions() {
        if let Some(v) = e.variables().iter().find(|v| **v != f.parameter.name) {
            return Err(violation(id, "parameter", format!("`{e}` uses unknown variable `{v}`")));
        }
    }
    if f.samples.is_empty() {
        return Err(violation(id, "samples", "a family needs sample parameters"));
    }
    for r in &f.relations {
        check_provenance(id, "relation", &r.provenance)?;
    }
    for x in &f.samples {
        if !f.in_domain(x) {
            return Err(violation(id, "samples", format!("{x} is outside the parameter domain")));
        }
        let inst = f.instance_id(x)?;
        if f.parse_instance(&inst) != Some(*x) {
            return Err(violation(id, "instance-name", format!("`{inst}` does not parse back to {x}")));
        }
        for y in f.related(x) {
            if !f.in_domain(&y) {
                return Err(violation(id, "relation", format!("{x} maps to {y}, outside the domain")));
            }
        }
        let p = f.instantiate(x)?;
        check_profile(&inst, &p)?;
    }
    Ok(())
}
