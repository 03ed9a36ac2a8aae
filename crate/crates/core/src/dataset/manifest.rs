use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Gradability, GradabilityStatus, GradeRecord, IcdrGrade, Quality};

pub const MANIFEST_HEADER: [&str; 7] = [
    "image_id",
    "file_path",
    "grade",
    "referable",
    "gradability",
    "split",
    "source",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
    Excluded,
}

impl Split {
    pub const ALL: [Split; 4] = [Split::Train, Split::Validation, Split::Test, Split::Excluded];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
            Split::Excluded => "excluded",
        }
    }

    pub fn is_active(self) -> bool {
        self != Split::Excluded
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Split::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown split {s:?}")))
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Eyepacs,
    Messidor2,
    Synthetic,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Eyepacs => "eyepacs",
            Source::Messidor2 => "messidor2",
            Source::Synthetic => "synthetic",
        }
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eyepacs" => Ok(Source::Eyepacs),
            "messidor2" => Ok(Source::Messidor2),
            "synthetic" => Ok(Source::Synthetic),
            other => Err(Error::InvalidConfig(format!("unknown source {other:?}"))),
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    /// Path relative to the corpus image root.
    pub file_path: PathBuf,
    pub grade_record: GradeRecord,
    pub split: Split,
    pub source: Source,
}

impl ManifestEntry {
    pub fn image_id(&self) -> &str {
        self.grade_record.image_id()
    }

    pub fn referable(&self) -> bool {
        self.grade_record.rdr().referable
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub positive: usize,
    pub negative: usize,
}

impl ClassCounts {
    pub fn total(&self) -> usize {
        self.positive + self.negative
    }

    pub fn positive_fraction(&self) -> f64 {
        if self.total() == 0 {
            0.0
        } else {
            self.positive as f64 / self.total() as f64
        }
    }
}

/// rDR positive/negative counts per split.
pub type BalanceSummary = BTreeMap<Split, ClassCounts>;

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    pub seed: u64,
    pub created: DateTime<Utc>,
}

impl DatasetManifest {
    pub fn new(entries: Vec<ManifestEntry>, seed: u64) -> Result<Self> {
        let mut seen = HashSet::with_capacity(entries.len());
        for e in &entries {
            if !seen.insert(e.image_id()) {
                return Err(Error::DuplicateImage(e.image_id().to_string()));
            }
        }
        Ok(DatasetManifest {
            entries,
            seed,
            created: Utc::now(),
        })
    }

    pub fn balance_summary(&self) -> BalanceSummary {
        let mut summary: BalanceSummary = Split::ALL.iter().map(|&s| (s, ClassCounts::default())).collect();
        for e in &self.entries {
            let counts = summary.entry(e.split).or_default();
            if e.referable() {
                counts.positive += 1;
            } else {
                counts.negative += 1;
            }
        }
        summary
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }

    pub fn get(&self, image_id: &str) -> Option<&ManifestEntry> {
        self.entries.iter().find(|e| e.image_id() == image_id)
    }
}

#[derive(Serialize, Deserialize)]
struct ManifestMeta {
    seed: u64,
    created: DateTime<Utc>,
    balance_summary: BalanceSummary,
}

fn meta_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    path.with_file_name(name)
}

/// Encodes gradability, grader and timestamp into the single `gradability`
/// column as `status[|quality[|grader_id[|timestamp]]]`, trailing empty
/// fields dropped.
fn encode_gradability(record: &GradeRecord) -> String {
    let mut fields = vec![
        record.gradability.status().as_str().to_string(),
        record
            .gradability
            .quality()
            .map(|q| q.as_str().to_string())
            .unwrap_or_default(),
        record.grader_id.clone().unwrap_or_default(),
        record
            .timestamp
            .map(|t| t.to_rfc3339_opts(SecondsFormat::AutoSi, true))
            .unwrap_or_default(),
    ];
    while fields.len() > 1 && fields.last().is_some_and(String::is_empty) {
        fields.pop();
    }
    fields.join("|")
}

fn decode_gradability(
    field: &str,
    row: usize,
) -> Result<(Gradability, Option<String>, Option<DateTime<Utc>>)> {
    let bad = |reason: String| Error::MalformedRow { row, reason };
    let mut parts = field.split('|');
    let status: GradabilityStatus = parts
        .next()
        .unwrap_or_default()
        .parse()
        .map_err(|e: Error| bad(e.to_string()))?;
    let quality = match parts.next() {
        Some("") | None => None,
        Some(q) => Some(q.parse::<Quality>().map_err(|e| bad(e.to_string()))?),
    };
    let grader = parts.next().filter(|s| !s.is_empty()).map(str::to_string);
    let timestamp = match parts.next() {
        Some("") | None => None,
        Some(t) => Some(
            DateTime::parse_from_rfc3339(t)
                .map_err(|e| bad(format!("timestamp {t:?}: {e}")))?
                .with_timezone(&Utc),
        ),
    };
    let gradability = Gradability::new(status, quality).map_err(|e| bad(e.to_string()))?;
    Ok((gradability, grader, timestamp))
}

/// Writes the manifest CSV plus a `<name>.meta.json` sidecar holding the seed,
/// creation time and balance summary. The CSV depends only on the entries,
/// so equal inputs give byte-identical files.
pub fn write_manifest(manifest: &DatasetManifest, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(MANIFEST_HEADER)?;
    for e in &manifest.entries {
        let r = &e.grade_record;
        w.write_record([
            r.image_id(),
            &e.file_path.to_string_lossy(),
            &r.grade().to_string(),
            if r.rdr().referable { "true" } else { "false" },
            &encode_gradability(r),
            e.split.as_str(),
            e.source.as_str(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;

    let meta = ManifestMeta {
        seed: manifest.seed,
        created: manifest.created,
        balance_summary: manifest.balance_summary(),
    };
    let meta_file = meta_path(path);
    fs::write(&meta_file, serde_json::to_vec_pretty(&meta)?).map_err(|e| Error::io(meta_file, e))?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<DatasetManifest> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    if header.iter().ne(MANIFEST_HEADER) {
        return Err(Error::MalformedRow {
            row: 1,
            reason: format!("expected header {}", MANIFEST_HEADER.join(",")),
        });
    }
    let mut entries = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let row = i + 2;
        let rec = rec?;
        let bad = |reason: String| Error::MalformedRow { row, reason };
        let grade: i64 = rec[2].parse().map_err(|_| bad(format!("grade {:?}", &rec[2])))?;
        let grade = IcdrGrade::new(grade).map_err(|e| bad(e.to_string()))?;
        let referable = match &rec[3] {
            "true" => true,
            "false" => false,
            other => return Err(bad(format!("referable {other:?}"))),
        };
        let (gradability, grader, ts) = decode_gradability(&rec[4], row)?;
        let grade_record =
            GradeRecord::new(&rec[0], grade).with_gradability(gradability, grader, ts);
        if grade_record.rdr().referable != referable {
            return Err(bad("referable flag contradicts grade".into()));
        }
        entries.push(ManifestEntry {
            file_path: PathBuf::from(&rec[1]),
            grade_record,
            split: rec[5].parse().map_err(|e: Error| bad(e.to_string()))?,
            source: rec[6].parse().map_err(|e: Error| bad(e.to_string()))?,
        });
    }

    let mut manifest = DatasetManifest::new(entries, 0)?;
    if let Ok(bytes) = fs::read(meta_path(path)) {
        let meta: ManifestMeta = serde_json::from_slice(&bytes)?;
        manifest.seed = meta.seed;
        manifest.created = meta.created;
    }
    Ok(manifest)
}
