use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{auc, roc_curve, select_operating_point, OperatingMode, OperatingPoint, RocCurve};
use crate::error::Result;
use crate::preprocess::NormalizationMethod;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub normalization: NormalizationMethod,
    pub ensemble_size: usize,
    pub n_thresholds: usize,
    pub sensitivity_constraint: f64,
    pub specificity_constraint: f64,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            normalization: NormalizationMethod::SymmetricRange,
            ensemble_size: 1,
            n_thresholds: super::DEFAULT_THRESHOLDS,
            sensitivity_constraint: 0.95,
            specificity_constraint: 0.98,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub test_set_name: String,
    pub auc: f64,
    pub high_sensitivity: OperatingPoint,
    pub high_specificity: OperatingPoint,
    pub n_images: usize,
    pub positives: usize,
    pub negatives: usize,
    pub normalization: NormalizationMethod,
    pub ensemble_size: usize,
    pub n_thresholds: usize,
}

impl EvaluationReport {
    pub fn operating_points(&self) -> [&OperatingPoint; 2] {
        [&self.high_sensitivity, &self.high_specificity]
    }
}

/// AUC and both operating points for one test set.
pub fn build_report(
    test_set_name: &str,
    scores: &[f64],
    labels: &[bool],
    config: &ReportConfig,
) -> Result<(EvaluationReport, RocCurve)> {
    let curve = roc_curve(scores, labels, config.n_thresholds)?;
    let high_sensitivity = select_operating_point(
        &curve,
        scores,
        labels,
        OperatingMode::HighSensitivity,
        config.sensitivity_constraint,
    )?;
    let high_specificity = select_operating_point(
        &curve,
        scores,
        labels,
        OperatingMode::HighSpecificity,
        config.specificity_constraint,
    )?;
    let report = EvaluationReport {
        test_set_name: test_set_name.to_string(),
        auc: auc(&curve),
        high_sensitivity,
        high_specificity,
        n_images: scores.len(),
        positives: curve.positives,
        negatives: curve.negatives,
        normalization: config.normalization,
        ensemble_size: config.ensemble_size,
        n_thresholds: config.n_thresholds,
    };
    Ok((report, curve))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReferenceTestSet {
    KaggleEyepacs,
    Messidor2,
}

impl ReferenceTestSet {
    pub fn label(self) -> &'static str {
        match self {
            ReferenceTestSet::KaggleEyepacs => "Kaggle EyePACS test (orig. EyePACS-1)",
            ReferenceTestSet::Messidor2 => "Messidor-2",
        }
    }
}

/// Published full-scale results for one normalisation method and test set,
/// with the original study's numbers alongside. Percentages for the rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub normalization: NormalizationMethod,
    pub test_set: ReferenceTestSet,
    /// (sensitivity, specificity) at the high-sensitivity point.
    pub high_sensitivity: (f64, f64),
    pub high_specificity: (f64, f64),
    pub auc: f64,
    pub original_high_sensitivity: (f64, f64),
    pub original_high_specificity: (f64, f64),
    pub original_auc: f64,
}

const EYEPACS_ORIGINAL: ((f64, f64), (f64, f64)) = ((97.5, 93.4), (90.3, 98.1));
const MESSIDOR_ORIGINAL: ((f64, f64), (f64, f64)) = ((96.1, 93.9), (87.0, 98.5));

const fn row(
    normalization: NormalizationMethod,
    test_set: ReferenceTestSet,
    high_sensitivity: (f64, f64),
    high_specificity: (f64, f64),
    auc: f64,
) -> ReferenceRow {
    let original = match test_set {
        ReferenceTestSet::KaggleEyepacs => EYEPACS_ORIGINAL,
        ReferenceTestSet::Messidor2 => MESSIDOR_ORIGINAL,
    };
    ReferenceRow {
        normalization,
        test_set,
        high_sensitivity,
        high_specificity,
        auc,
        original_high_sensitivity: original.0,
        original_high_specificity: original.1,
        original_auc: 0.99,
    }
}

const REFERENCE: [ReferenceRow; 6] = {
    use NormalizationMethod::*;
    use ReferenceTestSet::*;
    [
        row(SymmetricRange, KaggleEyepacs, (89.9, 83.8), (83.4, 90.1), 0.94),
        row(SymmetricRange, Messidor2, (73.7, 69.7), (67.9, 76.4), 0.80),
        row(Standardize, KaggleEyepacs, (88.3, 77.1), (78.8, 88.9), 0.91),
        row(Standardize, Messidor2, (73.4, 60.9), (65.0, 74.1), 0.76),
        row(UnitRange, KaggleEyepacs, (83.4, 72.7), (73.9, 82.7), 0.86),
        row(UnitRange, Messidor2, (73.7, 65.9), (64.5, 75.1), 0.75),
    ]
};

/// The full-scale replication results, symmetric range first.
pub fn reference_rows() -> &'static [ReferenceRow] {
    &REFERENCE
}

fn block_title(method: NormalizationMethod) -> &'static str {
    match method {
        NormalizationMethod::SymmetricRange => "Normalizing images to [-1, 1] range",
        NormalizationMethod::Standardize => "Image standardization",
        NormalizationMethod::UnitRange => "Normalizing images to [0, 1] range",
    }
}

const COL_SET: usize = 40;
const COL_RATE: usize = 40;

fn header(out: &mut String, title: &str) {
    let width = COL_SET + 2 * COL_RATE + 12;
    let _ = writeln!(out, "{title:^width$}");
    let _ = writeln!(out, "{}", "-".repeat(width));
    let _ = writeln!(
        out,
        "{:<COL_SET$}{:<COL_RATE$}{:<COL_RATE$}{}",
        "Test set", "High sensitivity", "High specificity", "AUC score"
    );
}

/// Table 1 of the full-scale replication: replication values with the
/// original study's values in parentheses.
pub fn render_reference_table() -> String {
    let mut out = String::from("Replication results (reference)\n\n");
    for method in NormalizationMethod::ALL {
        header(&mut out, block_title(method));
        for r in REFERENCE.iter().filter(|r| r.normalization == method) {
            let cell = |(s, p): (f64, f64), (os, op): (f64, f64)| {
                format!("{s:.1} ({os:.1})% sens. {p:.1} ({op:.1})% spec.")
            };
            let _ = writeln!(
                out,
                "{:<COL_SET$}{:<COL_RATE$}{:<COL_RATE$}{:.2} ({:.2})",
                r.test_set.label(),
                cell(r.high_sensitivity, r.original_high_sensitivity),
                cell(r.high_specificity, r.original_high_specificity),
                r.auc,
                r.original_auc
            );
        }
        out.push('\n');
    }
    out
}

/// Fixed-width table of this run's reports grouped by normalisation in the
/// Table 1 layout, optionally followed by the reference block.
pub fn render_table(reports: &[EvaluationReport], include_reference: bool) -> String {
    let mut out = String::from("Evaluation results\n\n");
    for method in NormalizationMethod::ALL {
        let rows: Vec<_> = reports.iter().filter(|r| r.normalization == method).collect();
        if rows.is_empty() {
            continue;
        }
        header(&mut out, block_title(method));
        for r in rows {
            let cell = |p: &OperatingPoint| {
                format!(
                    "{:.1}% sens. {:.1}% spec.{}",
                    100.0 * p.sensitivity,
                    100.0 * p.specificity,
                    if p.constraint_met { "" } else { " *" }
                )
            };
            let _ = writeln!(
                out,
                "{:<COL_SET$}{:<COL_RATE$}{:<COL_RATE$}{:.3}",
                format!("{} (n={}, k={})", r.test_set_name, r.n_images, r.ensemble_size),
                cell(&r.high_sensitivity),
                cell(&r.high_specificity),
                r.auc
            );
        }
        out.push('\n');
    }
    if reports
        .iter()
        .flat_map(|r| r.operating_points())
        .any(|p| !p.constraint_met)
    {
        out.push_str("* operating-point constraint not met; closest threshold shown\n\n");
    }
    if include_reference {
        out.push_str(&render_reference_table());
    }
    out
}
