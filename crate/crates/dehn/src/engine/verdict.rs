//! Serializable outputs of the engine.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::slope::BasisMap;

/// The invariant that separated a candidate from the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distinguisher {
    Cusps,
    KnotComplement,
    LinkComplement,
    Homology,
    ExceptionalSlopes,
    H1Injectivity,
    NullSlope,
    HalfIntegral,
    Alexander,
}

impl Distinguisher {
    pub fn name(self) -> &'static str {
        match self {
            Distinguisher::Cusps => "cusps",
            Distinguisher::KnotComplement => "knot_complement",
            Distinguisher::LinkComplement => "link_complement",
            Distinguisher::Homology => "homology",
            Distinguisher::ExceptionalSlopes => "exceptional_slopes",
            Distinguisher::H1Injectivity => "h1_injectivity",
            Distinguisher::NullSlope => "null_slope",
            Distinguisher::HalfIntegral => "half_integral",
            Distinguisher::Alexander => "alexander",
        }
    }
}

impl fmt::Display for Distinguisher {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Rigid,
    Ambiguous,
    Unknown,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Rigid => "rigid",
            Status::Ambiguous => "ambiguous",
            Status::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Elimination {
    pub id: String,
    pub distinguisher: Distinguisher,
    pub citation: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub rule: String,
    pub citation: String,
    pub inputs: String,
    pub outcome: String,
}

impl TraceStep {
    pub fn new(
        rule: impl Into<String>,
        citation: impl Into<String>,
        inputs: impl Into<String>,
        outcome: impl Into<String>,
    ) -> Self {
        TraceStep {
            rule: rule.into(),
            citation: citation.into(),
            inputs: inputs.into(),
            outcome: outcome.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RigidityVerdict {
    /// Catalog id of the target, or a label for an ad hoc profile.
    pub target: String,
    pub candidates: Vec<String>,
    pub eliminated: Vec<Elimination>,
    /// Surviving manifolds, grouped into homeomorphism classes.
    pub survivors: Vec<Vec<String>>,
    pub status: Status,
    pub trace: Vec<TraceStep>,
}

impl RigidityVerdict {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("verdicts serialize");
        s.push('\n');
        s
    }

    /// Human-readable report ending in the status line.
    pub fn to_text(&self) -> String {
        let mut out = format!("target: {}\n", self.target);
        out += &format!("candidates: {}\n", list(&self.candidates));
        for s in &self.trace {
            out += &format!("  [{}] {} | {} -> {}\n", s.rule, s.citation, s.inputs, s.outcome);
        }
        for e in &self.eliminated {
            out += &format!("eliminated {} by {} ({}): {}\n", e.id, e.distinguisher, e.citation, e.detail);
        }
        let classes: Vec<String> = self.survivors.iter().map(|c| format!("{{{}}}", c.join(" = "))).collect();
        out += &format!("survivors: {}\n", list(&classes));
        out += &format!("status: {}\n", self.status);
        out
    }
}

fn list(items: &[String]) -> String {
    if items.is_empty() {
        "(none)".into()
    } else {
        items.join(", ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CuspMatch {
    pub from: usize,
    pub to: usize,
    /// `None` when the data does not pin down the boundary map.
    pub map: Option<BasisMap<i64>>,
}

/// One way of pairing the cusps of two manifolds compatible with all
/// recorded exceptional slopes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillingMatch {
    pub cusps: Vec<CuspMatch>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionConclusion {
    pub knot: String,
    pub slope: String,
    /// Oriented characterisation at slope 0 was promoted to unoriented.
    pub upgraded: bool,
    pub statement: String,
    pub citations: Vec<String>,
}
