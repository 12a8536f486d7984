//! Filtering catalog entries.

use super::model::*;
use super::Catalog;

/// Conjunctive filter. Unset fields match everything.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Query {
    pub cusps: Option<usize>,
    /// Some cusp has a set of this kind whose largest distance is this value.
    pub max_delta: Option<(SetKind, i64)>,
    pub knot_complement: Option<bool>,
    pub link_complement: Option<bool>,
    /// The family entry itself and manifolds recorded as its members.
    pub family: Option<String>,
}

fn template_max_delta(s: &SlopeSet<Template>) -> Option<i64> {
    if s.max_delta.is_some() {
        return s.max_delta;
    }
    if s.completeness != Completeness::Exact || !s.opaque.is_empty() {
        return None;
    }
    let values = s
        .slopes
        .iter()
        .map(|e| if e.is_constant() { e.eval(None).ok() } else { None })
        .collect::<Option<Vec<_>>>()?;
    max_delta_of(values.iter())
}

fn matches(e: &Entry, q: &Query) -> bool {
    if q.cusps.is_some_and(|c| c != e.cusp_count()) {
        return false;
    }
    let flags = e.flags();
    if q.knot_complement.is_some_and(|k| flags.is_knot_complement() != Some(k)) {
        return false;
    }
    if q.link_complement.is_some_and(|k| flags.is_link_complement() != Some(k)) {
        return false;
    }
    if let Some(fam) = &q.family {
        let hit = match e {
            Entry::Family(f) => &f.id == fam,
            Entry::Manifold(m) => m.member_of.iter().any(|mb| &mb.family == fam),
        };
        if !hit {
            return false;
        }
    }
    if let Some((kind, d)) = q.max_delta {
        let hit = match e {
            Entry::Manifold(m) => m
                .profile
                .cusps
                .iter()
                .any(|c| c.set(kind).and_then(|s| s.known_max_delta()) == Some(d)),
            Entry::Family(f) => f
                .template
                .cusps
                .iter()
                .any(|c| c.set(kind).and_then(template_max_delta) == Some(d)),
        };
        if !hit {
            return false;
        }
    }
    true
}

/// Entries satisfying every set field of `q`, ordered by id.
pub fn query<'a>(catalog: &'a Catalog, q: &Query) -> Vec<&'a Entry> {
    catalog.entries().filter(|e| matches(e, q)).collect()
}
