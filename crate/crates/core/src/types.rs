//! Shared domain vocabulary: ICDR grades, the binary rDR label, gradability
//! judgements and per-image prediction records.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Severity on the International Clinical Diabetic Retinopathy scale.
///
/// `0` none, `1` mild, `2` moderate, `3` severe, `4` proliferative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub struct IcdrGrade(u8);

impl IcdrGrade {
    pub const NONE: IcdrGrade = IcdrGrade(0);
    pub const MILD: IcdrGrade = IcdrGrade(1);
    pub const MODERATE: IcdrGrade = IcdrGrade(2);
    pub const SEVERE: IcdrGrade = IcdrGrade(3);
    pub const PROLIFERATIVE: IcdrGrade = IcdrGrade(4);

    pub fn new(value: i64) -> Result<Self> {
        match value {
            0..=4 => Ok(IcdrGrade(value as u8)),
            other => Err(Error::InvalidGrade(other)),
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = IcdrGrade> {
        (0..=4).map(IcdrGrade)
    }
}

impl TryFrom<i64> for IcdrGrade {
    type Error = Error;

    fn try_from(value: i64) -> Result<Self> {
        IcdrGrade::new(value)
    }
}

impl From<IcdrGrade> for u8 {
    fn from(grade: IcdrGrade) -> u8 {
        grade.0
    }
}

impl fmt::Display for IcdrGrade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Binary target of the classifier: moderate or worse retinopathy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RdrLabel {
    pub referable: bool,
}

impl RdrLabel {
    pub fn as_f64(self) -> f64 {
        if self.referable {
            1.0
        } else {
            0.0
        }
    }
}

/// Referable iff the grade is moderate (2) or worse.
pub fn binarize_rdr(grade: IcdrGrade) -> RdrLabel {
    RdrLabel {
        referable: grade >= IcdrGrade::MODERATE,
    }
}

/// Four-level image quality captured by the grading tool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quality {
    Excellent,
    Good,
    Adequate,
    Insufficient,
}

impl Quality {
    pub const ALL: [Quality; 4] = [
        Quality::Excellent,
        Quality::Good,
        Quality::Adequate,
        Quality::Insufficient,
    ];

    /// At least adequate quality counts as gradable.
    pub fn is_gradable(self) -> bool {
        !matches!(self, Quality::Insufficient)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Quality::Excellent => "excellent",
            Quality::Good => "good",
            Quality::Adequate => "adequate",
            Quality::Insufficient => "insufficient",
        }
    }
}

impl FromStr for Quality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quality::ALL
            .into_iter()
            .find(|q| q.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown quality {s:?}")))
    }
}

impl fmt::Display for Quality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradabilityStatus {
    Gradable,
    Ungradable,
    /// Not yet judged by a human grader.
    Unknown,
}

impl GradabilityStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            GradabilityStatus::Gradable => "gradable",
            GradabilityStatus::Ungradable => "ungradable",
            GradabilityStatus::Unknown => "unknown",
        }
    }
}

impl FromStr for GradabilityStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gradable" => Ok(GradabilityStatus::Gradable),
            "ungradable" => Ok(GradabilityStatus::Ungradable),
            "unknown" => Ok(GradabilityStatus::Unknown),
            other => Err(Error::InvalidConfig(format!(
                "unknown gradability status {other:?}"
            ))),
        }
    }
}

impl fmt::Display for GradabilityStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Coarse gradability status plus the optional finer quality judgement it
/// was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gradability {
    status: GradabilityStatus,
    quality: Option<Quality>,
}

impl Gradability {
    pub fn unknown() -> Self {
        Gradability {
            status: GradabilityStatus::Unknown,
            quality: None,
        }
    }

    pub fn from_quality(quality: Quality) -> Self {
        let status = if quality.is_gradable() {
            GradabilityStatus::Gradable
        } else {
            GradabilityStatus::Ungradable
        };
        Gradability {
            status,
            quality: Some(quality),
        }
    }

    /// Builds a gradability value, rejecting a status that contradicts the
    /// quality it claims to come from.
    pub fn new(status: GradabilityStatus, quality: Option<Quality>) -> Result<Self> {
        match quality {
            Some(q) => {
                let derived = Gradability::from_quality(q);
                if derived.status != status {
                    return Err(Error::InvalidConfig(format!(
                        "status {status} contradicts quality {q}"
                    )));
                }
                Ok(derived)
            }
            None => Ok(Gradability {
                status,
                quality: None,
            }),
        }
    }

    pub fn status(&self) -> GradabilityStatus {
        self.status
    }

    pub fn quality(&self) -> Option<Quality> {
        self.quality
    }

    pub fn is_gradable(&self) -> bool {
        self.status == GradabilityStatus::Gradable
    }
}

impl Default for Gradability {
    fn default() -> Self {
        Gradability::unknown()
    }
}

/// Everything known about one image's grading.
///
/// The rDR label is always derived from the grade; there is no way to set
/// it independently.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradeRecord {
    image_id: String,
    grade: IcdrGrade,
    rdr: RdrLabel,
    pub gradability: Gradability,
    /// Who judged gradability, when a human has.
    pub grader_id: Option<String>,
    /// When gradability was judged.
    pub timestamp: Option<DateTime<Utc>>,
}

impl GradeRecord {
    pub fn new(image_id: impl Into<String>, grade: IcdrGrade) -> Self {
        GradeRecord {
            image_id: image_id.into(),
            grade,
            rdr: binarize_rdr(grade),
            gradability: Gradability::unknown(),
            grader_id: None,
            timestamp: None,
        }
    }

    pub fn with_gradability(
        mut self,
        gradability: Gradability,
        grader_id: Option<String>,
        timestamp: Option<DateTime<Utc>>,
    ) -> Self {
        self.gradability = gradability;
        self.grader_id = grader_id;
        self.timestamp = timestamp;
        self
    }

    pub fn image_id(&self) -> &str {
        &self.image_id
    }

    pub fn grade(&self) -> IcdrGrade {
        self.grade
    }

    pub fn rdr(&self) -> RdrLabel {
        self.rdr
    }
}

/// One model's score for one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub image_id: String,
    score: f64,
    pub model_id: String,
}

impl PredictionRecord {
    pub fn new(image_id: impl Into<String>, score: f64, model_id: impl Into<String>) -> Result<Self> {
        let image_id = image_id.into();
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::ScoreOutOfRange { image_id, score });
        }
        Ok(PredictionRecord {
            image_id,
            score,
            model_id: model_id.into(),
        })
    }

    pub fn score(&self) -> f64 {
        self.score
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binarize_is_moderate_or_worse() {
        for g in IcdrGrade::all() {
            assert_eq!(binarize_rdr(g).referable, g.value() >= 2, "grade {g}");
        }
        assert!(binarize_rdr(IcdrGrade::new(2).unwrap()).referable);
        assert!(!binarize_rdr(IcdrGrade::new(1).unwrap()).referable);
        assert!(!binarize_rdr(IcdrGrade::new(0).unwrap()).referable);
    }

    #[test]
    fn grade_construction_rejects_out_of_scale() {
        assert!(matches!(IcdrGrade::new(5), Err(Error::InvalidGrade(5))));
        assert!(matches!(IcdrGrade::new(-1), Err(Error::InvalidGrade(-1))));
        assert!(serde_json::from_str::<IcdrGrade>("7").is_err());
        assert_eq!(serde_json::from_str::<IcdrGrade>("3").unwrap(), IcdrGrade::SEVERE);
    }

    #[test]
    fn gradability_follows_quality() {
        assert!(Gradability::from_quality(Quality::Adequate).is_gradable());
        assert!(Gradability::from_quality(Quality::Excellent).is_gradable());
        assert!(!Gradability::from_quality(Quality::Insufficient).is_gradable());
        assert!(Gradability::new(GradabilityStatus::Gradable, Some(Quality::Insufficient)).is_err());
        assert!(Gradability::new(GradabilityStatus::Ungradable, None).is_ok());
        assert_eq!(Gradability::default().status(), GradabilityStatus::Unknown);
    }

    #[test]
    fn prediction_scores_are_probabilities() {
        assert!(PredictionRecord::new("a", 0.0, "m").is_ok());
        assert!(PredictionRecord::new("a", 1.0, "m").is_ok());
        assert!(PredictionRecord::new("a", 1.5, "m").is_err());
        assert!(PredictionRecord::new("a", f64::NAN, "m").is_err());
    }

    #[test]
    fn quality_parses_its_own_names() {
        for q in Quality::ALL {
            assert_eq!(q.as_str().parse::<Quality>().unwrap(), q);
        }
        assert!("great".parse::<Quality>().is_err());
    }
}
