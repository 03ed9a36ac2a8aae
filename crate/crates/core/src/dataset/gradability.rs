use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};

use super::{DatasetManifest, Split};
use crate::error::{Error, Result};
use crate::types::{Gradability, GradabilityStatus, Quality};

pub const GRADABILITY_HEADER: [&str; 5] = ["image_id", "quality", "status", "grader_id", "timestamp"];

/// One line of the append-only image-quality grades file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradabilityEntry {
    pub image_id: String,
    pub gradability: Gradability,
    pub grader_id: Option<String>,
    pub timestamp: DateTime<Utc>,
}

impl GradabilityEntry {
    pub fn from_quality(
        image_id: impl Into<String>,
        quality: Quality,
        grader_id: Option<String>,
        timestamp: DateTime<Utc>,
    ) -> Self {
        GradabilityEntry {
            image_id: image_id.into(),
            gradability: Gradability::from_quality(quality),
            grader_id,
            timestamp,
        }
    }
}

pub fn read_gradability_file(path: &Path) -> Result<Vec<GradabilityEntry>> {
    let mut r = csv::Reader::from_path(path)?;
    if r.headers()?.iter().ne(GRADABILITY_HEADER) {
        return Err(Error::MalformedRow {
            row: 1,
            reason: format!("expected header {}", GRADABILITY_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let row = i + 2;
        let rec = rec?;
        let bad = |reason: String| Error::MalformedRow { row, reason };
        let quality = match &rec[1] {
            "" => None,
            q => Some(q.parse::<Quality>().map_err(|e| bad(e.to_string()))?),
        };
        let status: GradabilityStatus = rec[2].parse().map_err(|e: Error| bad(e.to_string()))?;
        let gradability = Gradability::new(status, quality).map_err(|e| bad(e.to_string()))?;
        let timestamp = DateTime::parse_from_rfc3339(&rec[4])
            .map_err(|e| bad(format!("timestamp {:?}: {e}", &rec[4])))?
            .with_timezone(&Utc);
        out.push(GradabilityEntry {
            image_id: rec[0].to_string(),
            gradability,
            grader_id: (!rec[3].is_empty()).then(|| rec[3].to_string()),
            timestamp,
        });
    }
    Ok(out)
}

/// Appends one record and syncs it to disk before returning. Writes the
/// header first when the file is new or empty.
pub fn append_gradability(path: &Path, entry: &GradabilityEntry) -> Result<()> {
    let needs_header = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        if needs_header {
            w.write_record(GRADABILITY_HEADER)?;
        }
        w.write_record([
            entry.image_id.as_str(),
            entry.gradability.quality().map(Quality::as_str).unwrap_or(""),
            entry.gradability.status().as_str(),
            entry.grader_id.as_deref().unwrap_or(""),
            &entry.timestamp.to_rfc3339_opts(SecondsFormat::AutoSi, true),
        ])?;
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    let mut file = file;
    file.write_all(&buf).map_err(|e| Error::io(path, e))?;
    file.sync_data().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Last write wins: the record with the latest timestamp per image, ties
/// going to the later line.
pub fn resolve_latest(entries: &[GradabilityEntry]) -> HashMap<String, GradabilityEntry> {
    let mut latest: HashMap<String, GradabilityEntry> = HashMap::new();
    for e in entries {
        match latest.get(&e.image_id) {
            Some(prev) if prev.timestamp > e.timestamp => {}
            _ => {
                latest.insert(e.image_id.clone(), e.clone());
            }
        }
    }
    latest
}

/// Copies resolved gradability judgements onto matching manifest entries.
/// Returns how many entries were updated.
pub fn apply_gradability(
    manifest: &mut DatasetManifest,
    resolved: &HashMap<String, GradabilityEntry>,
) -> usize {
    let mut n = 0;
    for e in &mut manifest.entries {
        if let Some(g) = resolved.get(e.image_id()) {
            e.grade_record.gradability = g.gradability;
            e.grade_record.grader_id = g.grader_id.clone();
            e.grade_record.timestamp = Some(g.timestamp);
            n += 1;
        }
    }
    n
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FilterReport {
    pub retained: usize,
    pub removed_ungradable: usize,
    /// Unknown gradability counts as not gradable.
    pub removed_unknown: usize,
}

impl FilterReport {
    pub fn removed(&self) -> usize {
        self.removed_ungradable + self.removed_unknown
    }
}

/// Moves every active entry that is not known to be gradable into
/// [`Split::Excluded`]. Grade records are left untouched.
pub fn filter_gradable(manifest: &DatasetManifest) -> (DatasetManifest, FilterReport) {
    let mut out = manifest.clone();
    let mut report = FilterReport::default();
    for e in out.entries.iter_mut().filter(|e| e.split.is_active()) {
        match e.grade_record.gradability.status() {
            GradabilityStatus::Gradable => report.retained += 1,
            GradabilityStatus::Ungradable => {
                e.split = Split::Excluded;
                report.removed_ungradable += 1;
            }
            GradabilityStatus::Unknown => {
                e.split = Split::Excluded;
                report.removed_unknown += 1;
            }
        }
    }
    (out, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ManifestEntry, Source};
    use crate::types::{GradeRecord, IcdrGrade};
    use chrono::TimeZone;

    fn manifest(statuses: &[Option<Quality>]) -> DatasetManifest {
        let entries = statuses
            .iter()
            .enumerate()
            .map(|(i, q)| ManifestEntry {
                file_path: format!("{i}.png").into(),
                grade_record: GradeRecord::new(format!("i{i:04}"), IcdrGrade::new((i % 5) as i64).unwrap())
                    .with_gradability(q.map(Gradability::from_quality).unwrap_or_default(), None, None),
                split: if i % 3 == 0 { Split::Validation } else { Split::Train },
                source: Source::Eyepacs,
            })
            .collect();
        DatasetManifest::new(entries, 0).unwrap()
    }

    #[test]
    fn two_ungradable_of_ten() {
        let mut q = vec![Some(Quality::Good); 10];
        q[3] = Some(Quality::Insufficient);
        q[7] = Some(Quality::Insufficient);
        let (out, rep) = filter_gradable(&manifest(&q));
        assert_eq!(rep.retained, 8);
        assert_eq!(rep.removed_ungradable, 2);
        assert_eq!(out.entries.iter().filter(|e| e.split.is_active()).count(), 8);
    }

    #[test]
    fn ungradable_share_of_kaggle_size() {
        // 199 of 1000 ungradable leaves 80.1% of the active images.
        let q: Vec<_> = (0..1000)
            .map(|i| Some(if i < 199 { Quality::Insufficient } else { Quality::Adequate }))
            .collect();
        let (_, rep) = filter_gradable(&manifest(&q));
        assert_eq!(rep.retained as f64 / 1000.0, 0.801);
    }

    #[test]
    fn unknown_is_excluded_and_records_unchanged() {
        let m = manifest(&[None; 6]);
        let (out, rep) = filter_gradable(&m);
        assert_eq!(rep.removed_unknown, 6);
        assert!(out.entries.iter().all(|e| e.split == Split::Excluded));
        for (a, b) in m.entries.iter().zip(&out.entries) {
            assert_eq!(a.grade_record, b.grade_record);
        }
    }

    #[test]
    fn append_read_and_last_write_wins() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("quality.csv");
        let t0 = Utc.with_ymd_and_hms(2026, 1, 1, 12, 0, 0).unwrap();
        let t1 = t0 + chrono::Duration::seconds(5);
        append_gradability(&path, &GradabilityEntry::from_quality("a", Quality::Insufficient, Some("mv".into()), t0)).unwrap();
        append_gradability(&path, &GradabilityEntry::from_quality("b", Quality::Good, None, t0)).unwrap();
        append_gradability(&path, &GradabilityEntry::from_quality("a", Quality::Adequate, Some("mv".into()), t1)).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("image_id,quality,status,grader_id,timestamp\n"));
        assert_eq!(text.lines().count(), 4);

        let all = read_gradability_file(&path).unwrap();
        assert_eq!(all.len(), 3);
        let latest = resolve_latest(&all);
        assert_eq!(latest["a"].gradability.quality(), Some(Quality::Adequate));
        assert!(latest["a"].gradability.is_gradable());
        assert_eq!(latest["a"].timestamp, t1);
        assert_eq!(latest["b"].grader_id, None);
    }

    #[test]
    fn older_record_later_in_file_does_not_win() {
        let t0 = Utc.with_ymd_and_hms(2026, 1, 1, 0, 0, 0).unwrap();
        let newer = GradabilityEntry::from_quality("a", Quality::Good, None, t0 + chrono::Duration::hours(1));
        let older = GradabilityEntry::from_quality("a", Quality::Insufficient, None, t0);
        let latest = resolve_latest(&[newer.clone(), older]);
        assert_eq!(latest["a"], newer);
    }
}
