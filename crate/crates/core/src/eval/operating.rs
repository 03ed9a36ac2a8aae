use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::RocCurve;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatingMode {
    HighSensitivity,
    HighSpecificity,
}

impl OperatingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            OperatingMode::HighSensitivity => "high_sensitivity",
            OperatingMode::HighSpecificity => "high_specificity",
        }
    }
}

impl FromStr for OperatingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "high_sensitivity" => Ok(OperatingMode::HighSensitivity),
            "high_specificity" => Ok(OperatingMode::HighSpecificity),
            other => Err(Error::InvalidConfig(format!("unknown operating mode {other:?}"))),
        }
    }
}

impl fmt::Display for OperatingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub mode: OperatingMode,
    pub threshold: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub constraint: f64,
    /// False when no threshold met the constraint and the closest one was
    /// taken instead.
    pub constraint_met: bool,
}

/// Sensitivity and specificity of the rule `score >= threshold`.
pub fn rates_at(scores: &[f64], labels: &[bool], threshold: f64) -> (f64, f64) {
    let (mut tp, mut fnr, mut tn, mut fp) = (0usize, 0usize, 0usize, 0usize);
    for (&s, &l) in scores.iter().zip(labels) {
        match (l, s >= threshold) {
            (true, true) => tp += 1,
            (true, false) => fnr += 1,
            (false, false) => tn += 1,
            (false, true) => fp += 1,
        }
    }
    let ratio = |a: usize, b: usize| if a + b == 0 { 0.0 } else { a as f64 / (a + b) as f64 };
    (ratio(tp, fnr), ratio(tn, fp))
}

/// Picks a curve threshold for clinical use.
///
/// High-sensitivity mode keeps thresholds with sensitivity at least
/// `constraint` and maximises specificity; high-specificity mode is the
/// mirror image. Ties go to the larger secondary rate, then to the higher
/// threshold. If no threshold is feasible, the one closest to the constraint
/// is returned with `constraint_met = false`. Reported rates are recomputed
/// from the predictions at the chosen threshold.
pub fn select_operating_point(
    curve: &RocCurve,
    scores: &[f64],
    labels: &[bool],
    mode: OperatingMode,
    constraint: f64,
) -> Result<OperatingPoint> {
    if !(constraint > 0.0 && constraint < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "operating-point constraint {constraint} must lie in (0, 1)"
        )));
    }
    if curve.points.is_empty() {
        return Err(Error::EmptyInput);
    }
    // (constrained rate, optimised rate) for each point.
    let key = |i: usize| {
        let p = &curve.points[i];
        match mode {
            OperatingMode::HighSensitivity => (p.sensitivity, p.specificity),
            OperatingMode::HighSpecificity => (p.specificity, p.sensitivity),
        }
    };
    let better = |a: (f64, f64), b: (f64, f64)| a.1 > b.1 || (a.1 == b.1 && a.0 > b.0);

    let mut best: Option<usize> = None;
    for i in 0..curve.points.len() {
        if key(i).0 >= constraint && best.is_none_or(|b| better(key(i), key(b))) {
            best = Some(i);
        }
    }
    let constraint_met = best.is_some();
    let chosen = best.unwrap_or_else(|| {
        let mut closest = 0;
        for i in 1..curve.points.len() {
            let (a, b) = (key(i), key(closest));
            if a.0 > b.0 || (a.0 == b.0 && a.1 > b.1) {
                closest = i;
            }
        }
        closest
    });

    let threshold = curve.points[chosen].threshold;
    let (sensitivity, specificity) = rates_at(scores, labels, threshold);
    Ok(OperatingPoint {
        mode,
        threshold,
        sensitivity,
        specificity,
        constraint,
        constraint_met,
    })
}
