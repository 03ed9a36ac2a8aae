use std::collections::HashSet;
use std::path::{Path, PathBuf};

use super::{DatasetManifest, ManifestEntry, Source, Split};
use crate::error::{Error, Result};
use crate::types::{GradeRecord, IcdrGrade};

const ID_COLUMNS: [&str; 3] = ["image", "image_id", "id"];
// `level` is the Kaggle EyePACS column name, `adjudicated_dr_grade` the
// Messidor-2 one.
const GRADE_COLUMNS: [&str; 4] = ["grade", "level", "adjudicated_dr_grade", "dr_grade"];
const EXTENSIONS: [&str; 6] = ["png", "jpeg", "jpg", "tif", "tiff", "JPG"];

/// A grade CSV row that could not be ingested.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowIssue {
    /// 1-based line number; the header is row 1.
    pub row: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct IngestReport {
    pub manifest: DatasetManifest,
    pub malformed: Vec<RowIssue>,
    /// Entries whose image file was not found; they stay in the manifest.
    pub missing: Vec<String>,
}

/// Reads a grade CSV into a manifest with every entry in
/// [`Split::Excluded`].
///
/// Rows with unparseable or out-of-scale grades are reported and skipped.
/// When `image_dir` is given, each entry's file is resolved there (ids
/// without an extension are tried against common image extensions) and
/// entries without a file are listed in [`IngestReport::missing`].
pub fn ingest_grades(
    csv_path: &Path,
    source: Source,
    image_dir: Option<&Path>,
) -> Result<IngestReport> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(csv_path)?;
    let header = reader.headers()?.clone();
    let find = |names: &[&str]| header.iter().position(|h| names.contains(&h));
    let (id_col, grade_col) = match (find(&ID_COLUMNS), find(&GRADE_COLUMNS)) {
        (Some(i), Some(g)) => (i, g),
        _ => {
            return Err(Error::MalformedRow {
                row: 1,
                reason: format!(
                    "header must name an image column ({}) and a grade column ({})",
                    ID_COLUMNS.join("/"),
                    GRADE_COLUMNS.join("/")
                ),
            })
        }
    };

    let mut entries = Vec::new();
    let mut malformed = Vec::new();
    let mut missing = Vec::new();
    let mut seen = HashSet::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 2;
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                malformed.push(RowIssue {
                    row,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let (Some(id), Some(raw_grade)) = (rec.get(id_col), rec.get(grade_col)) else {
            malformed.push(RowIssue {
                row,
                reason: "missing column".into(),
            });
            continue;
        };
        if id.is_empty() {
            malformed.push(RowIssue {
                row,
                reason: "empty image id".into(),
            });
            continue;
        }
        let grade = match raw_grade.parse::<i64>().map_err(|_| Error::MalformedRow {
            row,
            reason: format!("grade {raw_grade:?} is not an integer"),
        }).and_then(IcdrGrade::new)
        {
            Ok(g) => g,
            Err(e) => {
                malformed.push(RowIssue {
                    row,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        if !seen.insert(id.to_string()) {
            malformed.push(RowIssue {
                row,
                reason: format!("duplicate image id {id}"),
            });
            continue;
        }

        let file_path = match image_dir {
            Some(dir) => match resolve_file(dir, id) {
                Some(p) => p,
                None => {
                    missing.push(id.to_string());
                    default_file(id, source)
                }
            },
            None => default_file(id, source),
        };
        entries.push(ManifestEntry {
            file_path,
            grade_record: GradeRecord::new(id, grade),
            split: Split::Excluded,
            source,
        });
    }

    Ok(IngestReport {
        manifest: DatasetManifest::new(entries, 0)?,
        malformed,
        missing,
    })
}

fn has_extension(id: &str) -> bool {
    Path::new(id)
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| EXTENSIONS.iter().any(|x| x.eq_ignore_ascii_case(e)))
}

fn resolve_file(dir: &Path, id: &str) -> Option<PathBuf> {
    if has_extension(id) {
        return dir.join(id).is_file().then(|| PathBuf::from(id));
    }
    EXTENSIONS
        .iter()
        .map(|ext| PathBuf::from(format!("{id}.{ext}")))
        .find(|p| dir.join(p).is_file())
}

fn default_file(id: &str, source: Source) -> PathBuf {
    if has_extension(id) {
        return PathBuf::from(id);
    }
    let ext = match source {
        Source::Eyepacs => "jpeg",
        Source::Messidor2 => "tif",
        Source::Synthetic => "png",
    };
    PathBuf::from(format!("{id}.{ext}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &Path, body: &str) -> PathBuf {
        let p = dir.join("grades.csv");
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn maps_rows_to_excluded_entries() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "image,grade\nimg_007,2\nimg_001,1\n");
        let rep = ingest_grades(&p, Source::Eyepacs, None).unwrap();
        assert!(rep.malformed.is_empty());
        let e = &rep.manifest.entries[0];
        assert_eq!(e.image_id(), "img_007");
        assert_eq!(e.grade_record.grade().value(), 2);
        assert!(e.referable());
        assert_eq!(e.split, Split::Excluded);
        assert_eq!(e.file_path, PathBuf::from("img_007.jpeg"));
        assert!(!rep.manifest.entries[1].referable());
    }

    #[test]
    fn out_of_scale_grade_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "image,grade\nimg_007,2\nimg_008,5\nimg_009,x\n");
        let rep = ingest_grades(&p, Source::Eyepacs, None).unwrap();
        assert_eq!(rep.manifest.entries.len(), 1);
        assert_eq!(rep.malformed.len(), 2);
        assert_eq!(rep.malformed[0].row, 3);
        assert!(rep.malformed[0].reason.contains('5'));
        assert_eq!(rep.malformed[1].row, 4);
    }

    #[test]
    fn header_only_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "image,grade\n");
        let rep = ingest_grades(&p, Source::Eyepacs, None).unwrap();
        assert!(rep.manifest.entries.is_empty());
        assert!(rep.malformed.is_empty());
    }

    #[test]
    fn kaggle_and_messidor_headers() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "image,level\n10_left,0\n");
        assert_eq!(ingest_grades(&p, Source::Eyepacs, None).unwrap().manifest.entries.len(), 1);
        let p = write(
            dir.path(),
            "image_id,adjudicated_dr_grade,adjudicated_dme,adjudicated_gradable\nIM1.png,3,0,1\n",
        );
        let rep = ingest_grades(&p, Source::Messidor2, None).unwrap();
        assert_eq!(rep.manifest.entries[0].file_path, PathBuf::from("IM1.png"));
        assert!(rep.manifest.entries[0].referable());
        let p = write(dir.path(), "name,score\na,1\n");
        assert!(matches!(
            ingest_grades(&p, Source::Eyepacs, None),
            Err(Error::MalformedRow { row: 1, .. })
        ));
    }

    #[test]
    fn missing_files_are_flagged_not_dropped() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.png"), b"x").unwrap();
        let p = write(dir.path(), "image,grade\na,0\nb,3\n");
        let rep = ingest_grades(&p, Source::Synthetic, Some(dir.path())).unwrap();
        assert_eq!(rep.manifest.entries.len(), 2);
        assert_eq!(rep.missing, vec!["b".to_string()]);
        assert_eq!(rep.manifest.entries[0].file_path, PathBuf::from("a.png"));
    }
}
