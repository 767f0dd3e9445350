use std::collections::{BTreeMap, HashMap};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{classify_dof_bucket, parse_exif, BlurLabel, Denylist, DofBucket, ExifRecord, RejectReason};

#[derive(Debug, Clone, Default)]
pub struct PartitionConfig {
    pub denylist: Denylist,
    /// Optional classifier verdicts keyed by manifest path.
    pub blur_labels: HashMap<PathBuf, BlurLabel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionEntry {
    pub path: PathBuf,
    pub record: Option<ExifRecord>,
    pub bucket: DofBucket,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PartitionReport {
    /// One entry per manifest line, in manifest order.
    pub entries: Vec<PartitionEntry>,
}

impl PartitionReport {
    fn in_bucket(&self, bucket: DofBucket) -> impl Iterator<Item = &PartitionEntry> {
        self.entries.iter().filter(move |e| e.bucket == bucket)
    }

    pub fn deep(&self) -> impl Iterator<Item = &PartitionEntry> {
        self.in_bucket(DofBucket::DeepDoF)
    }

    pub fn shallow(&self) -> impl Iterator<Item = &PartitionEntry> {
        self.in_bucket(DofBucket::ShallowDoF)
    }

    pub fn rejected(&self) -> impl Iterator<Item = (&PartitionEntry, RejectReason)> {
        self.entries.iter().filter_map(|e| match e.bucket {
            DofBucket::Rejected(r) => Some((e, r)),
            _ => None,
        })
    }

    pub fn rejection_counts(&self) -> BTreeMap<RejectReason, usize> {
        let mut counts = BTreeMap::new();
        for (_, reason) in self.rejected() {
            *counts.entry(reason).or_insert(0) += 1;
        }
        counts
    }

    /// `key=value` lines: totals followed by one line per rejection reason.
    pub fn summary(&self) -> String {
        let counts = self.rejection_counts();
        let mut out = format!(
            "total={}\ndeep={}\nshallow={}\nrejected={}\n",
            self.entries.len(),
            self.deep().count(),
            self.shallow().count(),
            self.rejected().count()
        );
        for reason in RejectReason::ALL {
            out.push_str(&format!(
                "rejected.{}={}\n",
                reason.code(),
                counts.get(&reason).copied().unwrap_or(0)
            ));
        }
        out
    }
}

/// Parses and classifies every file. Per-file failures become
/// `Rejected(ParseError)`; the stream never aborts.
pub fn partition_corpus<P: AsRef<Path> + Sync>(paths: &[P], config: &PartitionConfig) -> PartitionReport {
    let entries = paths
        .par_iter()
        .map(|p| {
            let path = p.as_ref().to_path_buf();
            let parsed = std::fs::read(&path)
                .ok()
                .and_then(|bytes| parse_exif(&bytes).ok());
            match parsed {
                Some(rec) => {
                    let label = config.blur_labels.get(&path).copied();
                    let bucket = classify_dof_bucket(&rec, &config.denylist, label);
                    PartitionEntry {
                        path,
                        record: Some(rec),
                        bucket,
                    }
                }
                None => PartitionEntry {
                    path,
                    record: None,
                    bucket: DofBucket::Rejected(RejectReason::ParseError),
                },
            }
        })
        .collect();
    PartitionReport { entries }
}

fn field(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn manifest_line(out: &mut impl Write, e: &PartitionEntry) -> io::Result<()> {
    let rec = e.record.clone().unwrap_or_default();
    writeln!(
        out,
        "{}\t{}\t{}\t{}",
        e.path.display(),
        field(rec.f_number),
        field(rec.focal_length_mm),
        field(rec.exposure_time_s)
    )
}

/// Writes the deep and shallow manifests (`path<TAB>N<TAB>f<TAB>exposure`,
/// absent values empty) and the rejection log (`path<TAB>reason`).
pub fn write_partition(
    report: &PartitionReport,
    mut deep: impl Write,
    mut shallow: impl Write,
    mut rejected: impl Write,
) -> io::Result<()> {
    for e in report.deep() {
        manifest_line(&mut deep, e)?;
    }
    for e in report.shallow() {
        manifest_line(&mut shallow, e)?;
    }
    for (e, reason) in report.rejected() {
        writeln!(rejected, "{}\t{}", e.path.display(), reason.code())?;
    }
    deep.flush()?;
    shallow.flush()?;
    rejected.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_manifest() {
        let report = partition_corpus::<PathBuf>(&[], &PartitionConfig::default());
        assert!(report.entries.is_empty());
        let (mut a, mut b, mut c) = (Vec::new(), Vec::new(), Vec::new());
        write_partition(&report, &mut a, &mut b, &mut c).unwrap();
        assert!(a.is_empty() && b.is_empty() && c.is_empty());
    }

    #[test]
    fn unreadable_path_is_isolated() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("good.jpg");
        std::fs::write(&good, [0xFF, 0xD8, 0xFF, 0xD9]).unwrap();
        let missing = dir.path().join("missing.jpg");
        let report = partition_corpus(&[missing.clone(), good.clone()], &PartitionConfig::default());
        assert_eq!(report.entries[0].bucket, DofBucket::Rejected(RejectReason::ParseError));
        assert_eq!(report.entries[1].bucket, DofBucket::Rejected(RejectReason::NoAperture));
        assert_eq!(report.entries[1].path, good);
        assert!(report.summary().contains("rejected.parse_error=1\n"));
    }
}
