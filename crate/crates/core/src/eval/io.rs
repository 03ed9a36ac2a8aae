use std::path::Path;

use super::RocCurve;
use crate::error::{Error, Result};
use crate::types::PredictionRecord;

/// Writes `image_id,score,model_id`. Scores use the shortest representation
/// that parses back to the same value.
pub fn write_predictions(path: &Path, predictions: &[PredictionRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["image_id", "score", "model_id"])?;
    for p in predictions {
        w.write_record([p.image_id.as_str(), &p.score().to_string(), p.model_id.as_str()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    if r.headers()?.iter().ne(["image_id", "score", "model_id"]) {
        return Err(Error::MalformedRow {
            row: 1,
            reason: "expected header image_id,score,model_id".into(),
        });
    }
    r.records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec?;
            let score: f64 = rec[1].parse().map_err(|_| Error::MalformedRow {
                row: i + 2,
                reason: format!("score {:?}", &rec[1]),
            })?;
            PredictionRecord::new(&rec[0], score, &rec[2])
        })
        .collect()
}

/// Writes `threshold,sensitivity,specificity`, one row per curve point.
pub fn write_roc_csv(path: &Path, curve: &RocCurve) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["threshold", "sensitivity", "specificity"])?;
    for p in &curve.points {
        w.write_record([
            p.threshold.to_string(),
            p.sensitivity.to_string(),
            p.specificity.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predictions_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let preds = vec![
            PredictionRecord::new("a", 0.1 + 0.2, "m1").unwrap(),
            PredictionRecord::new("b", 1.0, "m1").unwrap(),
        ];
        write_predictions(&path, &preds).unwrap();
        assert_eq!(read_predictions(&path).unwrap(), preds);
    }

    #[test]
    fn roc_csv_has_one_row_per_threshold() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("roc.csv");
        let c = crate::eval::roc_curve(&[0.2, 0.9], &[false, true], 200).unwrap();
        write_roc_csv(&path, &c).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("threshold,sensitivity,specificity"));
        assert_eq!(lines.next(), Some("1,0,1"));
        assert_eq!(text.lines().count(), 201);
        assert_eq!(text.lines().last(), Some("0,1,0"));
    }
}
