//! Pairwise comparison of two profiles.
//!
//! A comparison keeps every way the cusps could correspond. Each cusp pair
//! carries either no information about the boundary map or a finite list
//! of candidate classes in PGL(2,Z); later stages only shrink those lists.

use std::collections::BTreeSet;

use itertools::Itertools;

use super::cite;
use super::verdict::Distinguisher;
use super::EngineError;
use crate::alexander::equivalent_up_to_unit;
use crate::catalog::{Completeness, ManifoldProfile, Rational, SetKind, SlopeSet};
use crate::homology::{boundary_kernel, BoundaryKernel};
use crate::slope::{self, find_pair_maps, BasisMap, Slope};

pub(crate) type Map = BasisMap<i64>;

/// The identity and the orientation flip `mu -> -mu` of a knot exterior.
pub(crate) fn knot_maps() -> Vec<Map> {
    vec![BasisMap::identity(), BasisMap::new(-1, 0, 0, 1).expect("unimodular")]
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Transport {
    Free,
    Pinned(Vec<Map>),
}

impl Transport {
    fn restrict(self, maps: &[Map]) -> Transport {
        match self {
            Transport::Free => Transport::Pinned(maps.to_vec()),
            Transport::Pinned(m) => Transport::Pinned(m.into_iter().filter(|x| maps.contains(x)).collect()),
        }
    }

    fn is_dead(&self) -> bool {
        matches!(self, Transport::Pinned(m) if m.is_empty())
    }

    fn retain(&mut self, mut keep: impl FnMut(&Map) -> Result<bool, EngineError>) -> Result<(), EngineError> {
        if let Transport::Pinned(maps) = self {
            let mut out = Vec::with_capacity(maps.len());
            for m in maps.drain(..) {
                if keep(&m)? {
                    out.push(m);
                }
            }
            *maps = out;
        }
        Ok(())
    }

    pub(crate) fn maps(&self) -> Option<&[Map]> {
        match self {
            Transport::Free => None,
            Transport::Pinned(m) => Some(m),
        }
    }
}

/// Cusp `i` of the first manifold goes to cusp `perm[i]` of the second.
#[derive(Debug, Clone)]
pub(crate) struct Assignment {
    pub perm: Vec<usize>,
    pub maps: Vec<Transport>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Mismatch {
    pub distinguisher: Distinguisher,
    pub citation: String,
    pub detail: String,
}

fn mismatch(d: Distinguisher, citation: &str, detail: impl Into<String>) -> Mismatch {
    Mismatch {
        distinguisher: d,
        citation: citation.to_string(),
        detail: detail.into(),
    }
}

/// How far the staged comparison runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Depth {
    Slopes,
    NullSlopes,
    Full,
}

fn flag_text(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "yes",
        Some(false) => "no",
        None => "unknown",
    }
}

pub(crate) fn flags_mismatch(a: &ManifoldProfile, p: &ManifoldProfile) -> Option<Mismatch> {
    if a.cusps.len() != p.cusps.len() {
        return Some(mismatch(
            Distinguisher::Cusps,
            cite::HYPERBOLIC,
            format!("{} cusps vs {}", a.cusps.len(), p.cusps.len()),
        ));
    }
    let (ka, kp) = (a.flags.is_knot_complement(), p.flags.is_knot_complement());
    if let (Some(x), Some(y)) = (ka, kp) {
        if x != y {
            return Some(mismatch(
                Distinguisher::KnotComplement,
                cite::KNOT_DETECTION,
                format!("knot complement: {} vs {}", flag_text(ka), flag_text(kp)),
            ));
        }
    }
    let (la, lp) = (a.flags.is_link_complement(), p.flags.is_link_complement());
    if let (Some(x), Some(y)) = (la, lp) {
        if x != y {
            return Some(mismatch(
                Distinguisher::LinkComplement,
                cite::LINK_DETECTION,
                format!("link complement: {} vs {}", flag_text(la), flag_text(lp)),
            ));
        }
    }
    None
}

pub(crate) fn homology_mismatch(a: &ManifoldProfile, p: &ManifoldProfile) -> Option<Mismatch> {
    let (Some(x), Some(y)) = (a.homology_value(), p.homology_value()) else {
        return None;
    };
    (x != y).then(|| mismatch(Distinguisher::Homology, cite::HOMOLOGY, format!("H1 {x} vs {y}")))
}

fn to_slopes(s: &BTreeSet<Rational>) -> Vec<Slope<i64>> {
    s.iter().map(slope::from_rational).collect()
}

type SlopePair = (Slope<i64>, Slope<i64>);

/// The unique pair at distance 4 when the set is known to have maximal
/// distance exactly 4.
fn certified_pair(s: &SlopeSet<crate::catalog::Concrete>) -> Result<Option<SlopePair>, EngineError> {
    if s.known_max_delta() != Some(4) {
        return Ok(None);
    }
    Ok(match slope::unique_max_pair(&to_slopes(&s.members()))? {
        Some(mp) if mp.delta == 4 && mp.unique => Some((mp.first, mp.second)),
        _ => None,
    })
}

fn spectrum(s: &BTreeSet<Rational>) -> Result<Vec<i64>, EngineError> {
    let v = to_slopes(s);
    let mut out = Vec::new();
    for (i, x) in v.iter().enumerate() {
        for y in &v[i + 1..] {
            out.push(x.delta(y)?);
        }
    }
    out.sort_unstable();
    Ok(out)
}

fn exact_coords(s: &SlopeSet<crate::catalog::Concrete>) -> bool {
    s.completeness == Completeness::Exact && s.opaque.is_empty()
}

/// Checks that need no boundary map. Returns the reason on failure.
fn free_incompatibility(
    a: &SlopeSet<crate::catalog::Concrete>,
    p: &SlopeSet<crate::catalog::Concrete>,
) -> Result<Option<String>, EngineError> {
    if let (Some(x), Some(y)) = (a.known_max_delta(), p.known_max_delta()) {
        if x != y {
            return Ok(Some(format!("max distance {x} vs {y}")));
        }
    }
    if let (Some(x), Some(y)) = (a.size(), p.size()) {
        if x != y {
            return Ok(Some(format!("{x} slopes vs {y}")));
        }
    }
    for (s, t) in [(a, p), (p, a)] {
        if let Some(n) = t.size() {
            if s.certain_count() > n {
                return Ok(Some(format!("at least {} slopes vs exactly {n}", s.certain_count())));
            }
        }
        if let (Some(m), Some(bound)) = (max_delta_of_members(s), t.known_max_delta()) {
            if m > bound {
                return Ok(Some(format!("a pair at distance {m} vs maximum {bound}")));
            }
        }
    }
    if exact_coords(a) && exact_coords(p) && spectrum(&a.members())? != spectrum(&p.members())? {
        return Ok(Some("pairwise distances differ".into()));
    }
    Ok(None)
}

fn max_delta_of_members(s: &SlopeSet<crate::catalog::Concrete>) -> Option<i64> {
    crate::catalog::max_delta_of(s.members().iter())
}

fn image_within(map: &Map, from: &BTreeSet<Rational>, to: &Option<BTreeSet<Rational>>) -> Result<bool, EngineError> {
    let Some(to) = to else { return Ok(true) };
    for x in from {
        if !to.contains(&map.apply_rational(x)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every cusp correspondence, with boundary maps pinned where the data
/// forces them.
pub(crate) fn initial_assignments(a: &ManifoldProfile, p: &ManifoldProfile) -> Result<Vec<Assignment>, EngineError> {
    let n = a.cusps.len();
    if n != p.cusps.len() {
        return Ok(Vec::new());
    }
    let knots = a.is_knot() && p.is_knot();
    let mut out = Vec::new();
    for perm in (0..n).permutations(n) {
        let mut maps = Vec::with_capacity(n);
        for (i, &j) in perm.iter().enumerate() {
            let mut t = if knots {
                Transport::Pinned(knot_maps())
            } else {
                Transport::Free
            };
            for kind in SetKind::ALL {
                let (Some(sa), Some(sp)) = (a.cusps[i].set(kind), p.cusps[j].set(kind)) else {
                    continue;
                };
                if let (Some(ca), Some(cp)) = (certified_pair(sa)?, certified_pair(sp)?) {
                    t = t.restrict(&find_pair_maps(&ca.0, &ca.1, &cp.0, &cp.1)?);
                }
            }
            maps.push(t);
        }
        out.push(Assignment { perm, maps });
    }
    Ok(out)
}

/// Narrows `asg` by the exceptional sets; `Some(reason)` if it dies.
fn exceptional_filter(
    a: &ManifoldProfile,
    p: &ManifoldProfile,
    asg: &mut Assignment,
) -> Result<Option<String>, EngineError> {
    for i in 0..asg.perm.len() {
        let j = asg.perm[i];
        if asg.maps[i].is_dead() {
            return Ok(Some(format!("cusp {i} -> {j}: no boundary map fits the distance-4 pairs")));
        }
        for kind in SetKind::ALL {
            let (Some(sa), Some(sp)) = (a.cusps[i].set(kind), p.cusps[j].set(kind)) else {
                continue;
            };
            if let Some(reason) = free_incompatibility(sa, sp)? {
                return Ok(Some(format!("cusp {i} -> {j}, {}: {reason}", kind.name())));
            }
            let (ma, ua, mp, up) = (sa.members(), sa.upper(), sp.members(), sp.upper());
            asg.maps[i].retain(|m| Ok(image_within(m, &ma, &up)? && image_within(&m.inverse()?, &mp, &ua)?))?;
            if asg.maps[i].is_dead() {
                return Ok(Some(format!("cusp {i} -> {j}: no boundary map carries {} onto {}", kind.name(), kind.name())));
            }
        }
    }
    Ok(None)
}

/// Kernel of `H1(cusp) -> H1(M; Q)`, when the data determines it.
pub(crate) fn cusp_kernel(p: &ManifoldProfile, i: usize) -> Result<Option<BoundaryKernel<i64>>, EngineError> {
    if let (Some(d), Some(c)) = (&p.linking, p.cusp_component(i)) {
        return Ok(Some(boundary_kernel(&d.value, c)?));
    }
    if p.is_knot() {
        // the longitude of a knot in S^3 bounds a Seifert surface
        return Ok(Some(BoundaryKernel::Line(Rational::integer(0))));
    }
    Ok(None)
}

fn kernel_rank(k: &BoundaryKernel<i64>) -> u8 {
    match k {
        BoundaryKernel::Injective => 0,
        BoundaryKernel::Line(_) => 1,
        BoundaryKernel::Full => 2,
    }
}

fn kernel_text(k: &BoundaryKernel<i64>) -> String {
    match k {
        BoundaryKernel::Injective => "injective".into(),
        BoundaryKernel::Line(s) => format!("kernel spanned by {s}"),
        BoundaryKernel::Full => "zero map".into(),
    }
}

fn kernel_filter(a: &ManifoldProfile, p: &ManifoldProfile, asg: &Assignment) -> Result<Option<String>, EngineError> {
    for (i, &j) in asg.perm.iter().enumerate() {
        let (Some(ka), Some(kp)) = (cusp_kernel(a, i)?, cusp_kernel(p, j)?) else {
            continue;
        };
        if kernel_rank(&ka) != kernel_rank(&kp) {
            return Ok(Some(format!("cusp {i} -> {j}: {} vs {}", kernel_text(&ka), kernel_text(&kp))));
        }
    }
    Ok(None)
}

fn null_filter(a: &ManifoldProfile, p: &ManifoldProfile, asg: &mut Assignment) -> Result<Option<String>, EngineError> {
    for i in 0..asg.perm.len() {
        let j = asg.perm[i];
        let (Some(BoundaryKernel::Line(sa)), Some(BoundaryKernel::Line(sp))) = (cusp_kernel(a, i)?, cusp_kernel(p, j)?)
        else {
            continue;
        };
        asg.maps[i].retain(|m| Ok(m.apply_rational(&sa)? == sp))?;
        if asg.maps[i].is_dead() {
            return Ok(Some(format!("cusp {i} -> {j}: null slope {sa} cannot go to {sp}")));
        }
    }
    Ok(None)
}

fn half_integral_filter(
    a: &ManifoldProfile,
    p: &ManifoldProfile,
    asg: &mut Assignment,
) -> Result<Option<String>, EngineError> {
    if !(a.is_knot() && p.is_knot()) {
        return Ok(None);
    }
    let has_non_integral = |m: &ManifoldProfile| {
        m.cusps[0]
            .e_t
            .as_ref()
            .and_then(|s| s.upper())
            .map(|u| u.iter().any(|x| !x.is_integral()))
    };
    let ha = a.cusps[0].half_integral_toroidal.as_ref().map(|h| h.value);
    let hp = p.cusps[0].half_integral_toroidal.as_ref().map(|h| h.value);
    match (ha, hp) {
        (Some(x), Some(y)) => {
            asg.maps[0].retain(|m| Ok(m.apply_rational(&x)? == y))?;
            if asg.maps[0].is_dead() {
                return Ok(Some(format!("half-integral toroidal slope {x} vs {y}")));
            }
        }
        (Some(x), None) if has_non_integral(p) == Some(false) => {
            return Ok(Some(format!("half-integral toroidal slope {x} vs none")));
        }
        (None, Some(y)) if has_non_integral(a) == Some(false) => {
            return Ok(Some(format!("no half-integral toroidal slope vs {y}")));
        }
        _ => {}
    }
    Ok(None)
}

pub(crate) fn alexander_mismatch(a: &ManifoldProfile, p: &ManifoldProfile) -> Option<Mismatch> {
    if !(a.is_knot() && p.is_knot()) {
        return None;
    }
    let (Some(x), Some(y)) = (&a.alexander, &p.alexander) else {
        return None;
    };
    (!equivalent_up_to_unit(&x.value, &y.value)).then(|| {
        mismatch(
            Distinguisher::Alexander,
            cite::ALEXANDER,
            format!("Alexander polynomials {} vs {}", x.value, y.value),
        )
    })
}

/// Runs one filtering stage over all assignments; a mismatch if none survive.
fn stage(
    asg: &mut Vec<Assignment>,
    d: Distinguisher,
    citation: &str,
    mut f: impl FnMut(&mut Assignment) -> Result<Option<String>, EngineError>,
) -> Result<Option<Mismatch>, EngineError> {
    let mut reasons = Vec::new();
    let mut kept = Vec::with_capacity(asg.len());
    for mut x in asg.drain(..) {
        match f(&mut x)? {
            None => kept.push(x),
            Some(r) => reasons.push(r),
        }
    }
    *asg = kept;
    if asg.is_empty() {
        reasons.dedup();
        return Ok(Some(mismatch(d, citation, reasons.join("; "))));
    }
    Ok(None)
}

/// Cusp correspondences between `a` and `p` surviving every stage up to
/// `depth`, or the first stage that rules them all out.
pub(crate) fn assignments(
    a: &ManifoldProfile,
    p: &ManifoldProfile,
    depth: Depth,
) -> Result<Result<Vec<Assignment>, Mismatch>, EngineError> {
    let mut asg = initial_assignments(a, p)?;
    if asg.is_empty() {
        return Ok(Err(mismatch(Distinguisher::Cusps, cite::HYPERBOLIC, "cusp counts differ")));
    }
    let slopes_cite = if a.is_knot() && p.is_knot() {
        cite::SLOPES_KNOT
    } else {
        cite::SLOPES
    };
    if let Some(m) = stage(&mut asg, Distinguisher::ExceptionalSlopes, slopes_cite, |x| exceptional_filter(a, p, x))? {
        return Ok(Err(m));
    }
    if depth >= Depth::NullSlopes {
        if let Some(m) = stage(&mut asg, Distinguisher::H1Injectivity, cite::INJECTIVITY, |x| kernel_filter(a, p, x))? {
            return Ok(Err(m));
        }
        if let Some(m) = stage(&mut asg, Distinguisher::NullSlope, cite::NULL, |x| null_filter(a, p, x))? {
            return Ok(Err(m));
        }
    }
    if depth >= Depth::Full {
        if let Some(m) = stage(&mut asg, Distinguisher::HalfIntegral, cite::HALF_INTEGRAL, |x| {
            half_integral_filter(a, p, x)
        })? {
            return Ok(Err(m));
        }
    }
    Ok(Ok(asg))
}

/// The first invariant telling `a` from `p`, if any.
pub(crate) fn compare(a: &ManifoldProfile, p: &ManifoldProfile) -> Result<Option<Mismatch>, EngineError> {
    if let Some(m) = flags_mismatch(a, p) {
        return Ok(Some(m));
    }
    if let Some(m) = homology_mismatch(a, p) {
        return Ok(Some(m));
    }
    if let Err(m) = assignments(a, p, Depth::Full)? {
        return Ok(Some(m));
    }
    Ok(alexander_mismatch(a, p))
}
