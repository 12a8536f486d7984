//! Characterisation rules: an extreme exceptional-slope pattern pins a
//! manifold down to a short list of candidates.

use serde::Serialize;

use crate::catalog::{ManifoldProfile, SetKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Premise {
    /// Some cusp has toroidal slopes at maximal distance `max`.
    ToroidalMax { cusps: usize, max: i64 },
    /// Some cusp has Klein-bottle slopes at maximal distance `max`.
    KleinMax { cusps: usize, max: i64 },
    /// A hyperbolic knot exterior with two toroidal slopes at distance `delta`.
    KnotToroidalPair { delta: i64 },
    /// Klein-bottle slopes at distance 4 on every cusp, with the cusp count
    /// in `min_cusps..=max_cusps`.
    KleinPair { min_cusps: usize, max_cusps: usize },
    /// One cusp with at least `count` solid-torus fillings.
    SolidTorus { cusps: usize, count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Rule {
    pub id: &'static str,
    pub citation: &'static str,
    pub premise: Premise,
    pub candidates: &'static [&'static str],
}

pub const RULES: &[Rule] = &[
    Rule {
        id: "knot-toroidal-8",
        citation: "[GW, Thm 24.4]",
        premise: Premise::KnotToroidalPair { delta: 8 },
        candidates: &["W(-1)"],
    },
    Rule {
        id: "knot-toroidal-5",
        citation: "[GW, Thm 24.4]",
        premise: Premise::KnotToroidalPair { delta: 5 },
        candidates: &["EM(n)"],
    },
    Rule {
        id: "knot-toroidal-4",
        citation: "[GW, Thm 24.4]",
        premise: Premise::KnotToroidalPair { delta: 4 },
        candidates: &["K_n", "J_n"],
    },
    Rule {
        id: "toroidal-max-1-6",
        citation: "[Gor98, Thm 1.1]",
        premise: Premise::ToroidalMax { cusps: 1, max: 6 },
        candidates: &["W(-2)"],
    },
    Rule {
        id: "toroidal-max-1-7",
        citation: "[Gor98, Thm 1.1]",
        premise: Premise::ToroidalMax { cusps: 1, max: 7 },
        candidates: &["W(5/2)"],
    },
    Rule {
        id: "toroidal-max-1-8",
        citation: "[Gor98, Thm 1.1]",
        premise: Premise::ToroidalMax { cusps: 1, max: 8 },
        candidates: &["W(-1)", "W(5)"],
    },
    Rule {
        id: "toroidal-max-2-4",
        citation: "[GW, Cor 1.3]",
        premise: Premise::ToroidalMax { cusps: 2, max: 4 },
        candidates: &["M1", "M2", "M14"],
    },
    Rule {
        id: "toroidal-max-2-5",
        citation: "[GW, Cor 1.3]",
        premise: Premise::ToroidalMax { cusps: 2, max: 5 },
        candidates: &["M3"],
    },
    Rule {
        id: "klein-max-1-5",
        citation: "[Lee07, Cor 1.5]; [MP02, Table A.4]",
        premise: Premise::KleinMax { cusps: 1, max: 5 },
        candidates: &["W(-4)"],
    },
    Rule {
        id: "klein-pair-1",
        citation: "[Lee06, Thm 1.1]",
        premise: Premise::KleinPair { min_cusps: 1, max_cusps: 1 },
        candidates: &["L(n-1/2)", "L_B(0,r)"],
    },
    Rule {
        id: "klein-pair-2",
        citation: "[Lee06, Thm 1.1]",
        premise: Premise::KleinPair { min_cusps: 2, max_cusps: usize::MAX },
        candidates: &["L_B(0)"],
    },
    Rule {
        id: "solid-torus-2-3",
        citation: "[Ber91, Cor 2.9]",
        premise: Premise::SolidTorus { cusps: 2, count: 3 },
        candidates: &["Berge"],
    },
];

pub fn rule(id: &str) -> Option<&'static Rule> {
    RULES.iter().find(|r| r.id == id)
}

impl Premise {
    /// Whether the recorded data certainly satisfies the premise.
    pub fn holds(&self, p: &ManifoldProfile) -> bool {
        let n = p.cusps.len();
        let known_max = |kind: SetKind, max: i64| {
            p.cusps
                .iter()
                .any(|c| c.set(kind).and_then(|s| s.known_max_delta()) == Some(max))
        };
        match *self {
            Premise::ToroidalMax { cusps, max } => n == cusps && known_max(SetKind::Et, max),
            Premise::KleinMax { cusps, max } => n == cusps && known_max(SetKind::Ek, max),
            Premise::KnotToroidalPair { delta } => {
                p.is_knot() && p.cusps[0].e_t.as_ref().is_some_and(|s| s.has_pair_at(delta))
            }
            Premise::KleinPair { min_cusps, max_cusps } => {
                (min_cusps..=max_cusps).contains(&n)
                    && p.cusps.iter().all(|c| c.e_k.as_ref().is_some_and(|s| s.has_pair_at(4)))
            }
            Premise::SolidTorus { cusps, count } => {
                n == cusps
                    && p.cusps.iter().any(|c| {
                        c.solid_torus_fillings
                            .as_ref()
                            .is_some_and(|s| s.certain_count() >= count)
                    })
            }
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Premise::ToroidalMax { cusps, max } => format!("{cusps} cusp(s), max distance of E_t on a cusp is {max}"),
            Premise::KleinMax { cusps, max } => format!("{cusps} cusp(s), max distance of E_k is {max}"),
            Premise::KnotToroidalPair { delta } => format!("hyperbolic knot exterior with toroidal slopes at distance {delta}"),
            Premise::KleinPair { min_cusps, max_cusps } if min_cusps == max_cusps => {
                format!("{min_cusps} cusp(s), each with Klein-bottle slopes at distance 4")
            }
            Premise::KleinPair { min_cusps, .. } => {
                format!("at least {min_cusps} cusps, each with Klein-bottle slopes at distance 4")
            }
            Premise::SolidTorus { cusps, count } => {
                format!("{cusps} cusps, at least {count} solid-torus fillings on one cusp")
            }
        }
    }
}

fn ids(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn matching(pred: impl Fn(&Premise) -> bool) -> Vec<String> {
    RULES
        .iter()
        .filter(|r| pred(&r.premise))
        .flat_map(|r| ids(r.candidates))
        .collect()
}

/// Candidates for a manifold with `cusps` cusps whose toroidal slopes on
/// some cusp reach maximal distance `max_delta`.
pub fn characterize_by_toroidal_max(cusps: usize, max_delta: i64) -> Vec<String> {
    matching(|p| *p == Premise::ToroidalMax { cusps, max: max_delta })
}

/// Candidates for a hyperbolic knot exterior with toroidal slopes at
/// distance `delta`.
pub fn characterize_knot_by_toroidal_pair(delta: i64) -> Vec<String> {
    matching(|p| *p == Premise::KnotToroidalPair { delta })
}

/// Candidates among manifolds with Klein-bottle slopes at distance 4 on
/// every cusp. Empty when `has_distance_four_pair` is false.
pub fn characterize_by_klein(cusps: usize, has_distance_four_pair: bool) -> Vec<String> {
    if !has_distance_four_pair {
        return Vec::new();
    }
    matching(|p| matches!(*p, Premise::KleinPair { min_cusps, max_cusps } if (min_cusps..=max_cusps).contains(&cusps)))
}

/// Candidates with maximal Klein-bottle distance `max_delta`.
pub fn characterize_by_klein_max(cusps: usize, max_delta: i64) -> Vec<String> {
    matching(|p| *p == Premise::KleinMax { cusps, max: max_delta })
}

/// Candidates with `count` solid-torus fillings on one cusp.
pub fn characterize_by_solid_torus_fillings(cusps: usize, count: usize) -> Vec<String> {
    matching(|p| matches!(*p, Premise::SolidTorus { cusps: c, count: k } if c == cusps && count >= k))
}
