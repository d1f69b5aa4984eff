//! Rule catalog persistence and resumable sweeps.
//!
//! A catalog is a JSONL file: one [`CatalogEntry`] object per line, appended
//! and never rewritten. Exhaustive sweeps additionally keep a small progress
//! file ([`SweepProgress`]) naming the first table index not yet processed.
//! Since the table index of a sweep *is* its Wolfram number, a resumed sweep
//! can drop any results that were appended after the last saved progress.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{self, DEFAULT_EXHAUSTIVE_BOUND};
use crate::oracle::{self, OracleError};
use crate::rules::{self, classify_trivial, RuleError, RuleRecord, RuleTable, Triviality};

/// Version written into progress files.
pub const PROGRESS_FORMAT_VERSION: u32 = 1;

/// Period up to which catalog entries are checked by default.
pub const DEFAULT_VERIFY_PERIOD: usize = 12;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("progress file is for {found}, this sweep is {expected}")]
    ProgressMismatch { expected: String, found: String },
    #[error("unsupported progress format version {0}")]
    ProgressVersion(u32),
}

/// One catalogued rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub diameter: usize,
    pub anchor: usize,
    pub wolfram_decimal: String,
    pub table_hex: String,
    #[serde(default)]
    pub provenance: Vec<String>,
    /// `projection(j)`, `complement(j)` or `nontrivial`.
    pub classification: String,
    #[serde(default)]
    pub verified_debruijn: bool,
    /// Largest period checked for bijectivity; 0 when unchecked.
    #[serde(default)]
    pub verified_periodic_to: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<String>,
}

impl CatalogEntry {
    /// Unverified entry; the verification flags are only set by [`verify`].
    pub fn new(rt: &RuleTable, provenance: Vec<String>) -> Self {
        let record = RuleRecord::new(rt, provenance);
        CatalogEntry {
            diameter: record.diameter,
            anchor: record.anchor,
            wolfram_decimal: record.wolfram_decimal,
            table_hex: record.table_hex,
            provenance: record.provenance,
            classification: classify_trivial(rt).to_string(),
            verified_debruijn: false,
            verified_periodic_to: 0,
            created_at: None,
        }
    }

    pub fn with_timestamp(mut self, stamp: impl Into<String>) -> Self {
        self.created_at = Some(stamp.into());
        self
    }

    /// Decodes the table, checking that decimal and hex agree.
    pub fn rule(&self) -> Result<RuleTable, RuleError> {
        rules::decode_rule(self.diameter, self.anchor, &self.wolfram_decimal, &self.table_hex)
    }

    pub fn record(&self) -> RuleRecord {
        RuleRecord {
            diameter: self.diameter,
            anchor: self.anchor,
            wolfram_decimal: self.wolfram_decimal.clone(),
            table_hex: self.table_hex.clone(),
            provenance: self.provenance.clone(),
        }
    }
}

/// Outcome of running both oracles on a rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verification {
    pub debruijn: bool,
    /// Every period `1..=periodic_to` was checked and found bijective.
    pub periodic_to: usize,
    pub checked_to: usize,
    pub triviality: Triviality,
    pub balanced: bool,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.debruijn && self.periodic_to == self.checked_to
    }
}

/// Runs the pair-graph decision and periodic bijectivity for periods
/// `1..=max_period`.
pub fn verify(rt: &RuleTable, max_period: usize) -> Verification {
    let checked_to = max_period.min(DEFAULT_EXHAUSTIVE_BOUND);
    let periodic_to = (1..=checked_to)
        .take_while(|&n| oracle::periodic_bijective(rt, n) == Ok(true))
        .last()
        .unwrap_or(0);
    Verification {
        debruijn: oracle::is_injective(rt),
        periodic_to,
        checked_to,
        triviality: classify_trivial(rt),
        balanced: rules::is_balanced(rt),
    }
}

/// Sets the entry's verification flags from a fresh oracle run.
pub fn verify_entry(entry: &mut CatalogEntry, max_period: usize) -> Result<Verification, RuleError> {
    let v = verify(&entry.rule()?, max_period);
    entry.verified_debruijn = v.debruijn;
    entry.verified_periodic_to = v.periodic_to;
    Ok(v)
}

/// `τ² = id` for every period `1..=max_period`.
pub fn involution_up_to(rt: &RuleTable, max_period: usize) -> bool {
    (1..=max_period).all(|n| engine::check_involution(rt, n) == Ok(true))
}

/// Appends entries as JSON lines, creating the file if needed.
pub fn append_entries(path: &Path, entries: &[CatalogEntry]) -> Result<(), CatalogError> {
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut out = BufWriter::new(file);
    for e in entries {
        serde_json::to_writer(&mut out, e).map_err(|source| CatalogError::Json { line: 0, source })?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads every entry; blank lines are skipped.
pub fn read_catalog(path: &Path) -> Result<Vec<CatalogEntry>, CatalogError> {
    let reader = BufReader::new(File::open(path)?);
    let mut entries = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let e = serde_json::from_str(&line).map_err(|source| CatalogError::Json { line: i + 1, source })?;
        entries.push(e);
    }
    Ok(entries)
}

/// Checkpoint of an exhaustive sweep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepProgress {
    pub format_version: u32,
    pub diameter: usize,
    pub exclude_trivial: bool,
    /// First table index not yet processed.
    pub next_index: u64,
    pub total: u64,
    pub found: u64,
}

impl SweepProgress {
    pub fn start(diameter: usize, exclude_trivial: bool) -> Result<Self, CatalogError> {
        Ok(SweepProgress {
            format_version: PROGRESS_FORMAT_VERSION,
            diameter,
            exclude_trivial,
            next_index: 0,
            total: oracle::table_space(diameter)?,
            found: 0,
        })
    }

    pub fn is_done(&self) -> bool {
        self.next_index >= self.total
    }

    fn describe(&self) -> String {
        format!(
            "diameter {} (exclude_trivial = {})",
            self.diameter, self.exclude_trivial
        )
    }

    pub fn load(path: &Path) -> Result<Option<Self>, CatalogError> {
        match fs::read_to_string(path) {
            Ok(text) => {
                let p: SweepProgress = serde_json::from_str(&text)
                    .map_err(|source| CatalogError::Json { line: 1, source })?;
                if p.format_version != PROGRESS_FORMAT_VERSION {
                    return Err(CatalogError::ProgressVersion(p.format_version));
                }
                Ok(Some(p))
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    /// Writes via a temporary file and rename.
    pub fn save(&self, path: &Path) -> Result<(), CatalogError> {
        let tmp = path.with_extension("tmp");
        let text = serde_json::to_string_pretty(self).map_err(|source| CatalogError::Json { line: 0, source })?;
        fs::write(&tmp, text + "\n")?;
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

/// A resumable exhaustive sweep writing to a progress file and a results
/// catalog.
pub struct Sweep<'a> {
    pub progress_path: &'a Path,
    pub results_path: &'a Path,
    /// Tables processed between checkpoints.
    pub chunk: u64,
}

impl Sweep<'_> {
    /// Runs (or resumes) the sweep until done or until `budget` tables have
    /// been processed in this call. `on_entry` sees each new result in order.
    pub fn run(
        &self,
        diameter: usize,
        exclude_trivial: bool,
        budget: Option<u64>,
        mut on_entry: impl FnMut(&CatalogEntry),
    ) -> Result<SweepProgress, CatalogError> {
        let mut progress = match SweepProgress::load(self.progress_path)? {
            Some(p) => {
                if p.diameter != diameter || p.exclude_trivial != exclude_trivial {
                    let want = SweepProgress::start(diameter, exclude_trivial)?;
                    return Err(CatalogError::ProgressMismatch {
                        expected: want.describe(),
                        found: p.describe(),
                    });
                }
                self.truncate_results(p.next_index)?;
                p
            }
            None => {
                if self.results_path.exists() {
                    fs::remove_file(self.results_path)?;
                }
                SweepProgress::start(diameter, exclude_trivial)?
            }
        };
        let stop = budget.map_or(progress.total, |b| {
            progress.next_index.saturating_add(b).min(progress.total)
        });
        while progress.next_index < stop {
            let hi = progress.next_index.saturating_add(self.chunk.max(1)).min(stop);
            let found = oracle::sweep_range(diameter, progress.next_index..hi, exclude_trivial);
            let entries: Vec<CatalogEntry> = found
                .into_iter()
                .map(|t| {
                    let rt = RuleTable::from_word(diameter, t).expect("sweep index in range");
                    let mut e = CatalogEntry::new(&rt, Vec::new());
                    e.verified_debruijn = true;
                    e
                })
                .collect();
            append_entries(self.results_path, &entries)?;
            entries.iter().for_each(&mut on_entry);
            progress.found += entries.len() as u64;
            progress.next_index = hi;
            progress.save(self.progress_path)?;
        }
        Ok(progress)
    }

    /// Drops results past the checkpoint, left over from an interrupted run.
    fn truncate_results(&self, next_index: u64) -> Result<(), CatalogError> {
        if !self.results_path.exists() {
            return Ok(());
        }
        let entries = read_catalog(self.results_path)?;
        let keep: Vec<CatalogEntry> = entries
            .into_iter()
            .filter(|e| e.wolfram_decimal.parse::<u64>().is_ok_and(|w| w < next_index))
            .collect();
        fs::remove_file(self.results_path)?;
        append_entries(self.results_path, &keep)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::build_mixture;
    use crate::rules::induce;

    fn induced(text: &str) -> RuleTable {
        induce(&build_mixture(&[text.parse().unwrap()]).unwrap()).unwrap()
    }

    #[test]
    fn entry_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("catalog.jsonl");
        let rules: Vec<RuleTable> = ["0X011", "10X1a", "X"].iter().map(|t| induced(t)).collect();
        let entries: Vec<CatalogEntry> = rules
            .iter()
            .map(|r| CatalogEntry::new(r, vec!["p".into()]).with_timestamp("2026-01-01T00:00:00Z"))
            .collect();
        append_entries(&path, &entries[..2]).unwrap();
        append_entries(&path, &entries[2..]).unwrap();
        let back = read_catalog(&path).unwrap();
        assert_eq!(back, entries);
        for (e, r) in back.iter().zip(&rules) {
            let decoded = e.rule().unwrap();
            assert_eq!(&decoded, r);
            assert_eq!(decoded.anchor(), r.anchor());
        }
    }

    #[test]
    fn verification_flags() {
        let mut e = CatalogEntry::new(&induced("0X011"), vec!["0X011".into()]);
        assert!(!e.verified_debruijn);
        let v = verify_entry(&mut e, 12).unwrap();
        assert!(v.passed() && v.balanced);
        assert!(e.verified_debruijn);
        assert_eq!(e.verified_periodic_to, 12);
        assert_eq!(e.classification, "nontrivial");
        assert_eq!(CatalogEntry::new(&induced("X"), vec![]).classification, "complement(0)");
    }

    #[test]
    fn timestamp_omitted_when_absent() {
        let e = CatalogEntry::new(&induced("0X011"), vec![]);
        let text = serde_json::to_string(&e).unwrap();
        assert!(!text.contains("created_at"));
    }

    #[test]
    fn bad_line_reports_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        fs::write(&path, "\n{}\n").unwrap();
        assert!(matches!(read_catalog(&path), Err(CatalogError::Json { line: 2, .. })));
    }

    #[test]
    fn sweep_resumes() {
        let dir = tempfile::tempdir().unwrap();
        let sweep = Sweep {
            progress_path: &dir.path().join("progress.json"),
            results_path: &dir.path().join("results.jsonl"),
            chunk: 4096,
        };
        let first = sweep.run(4, true, Some(20_000), |_| {}).unwrap();
        assert_eq!(first.next_index, 20_000);
        assert!(!first.is_done());
        // Simulate an interrupted chunk: a stray result past the checkpoint.
        let stray = CatalogEntry::new(&RuleTable::from_word(4, 60_000).unwrap(), vec![]);
        append_entries(sweep.results_path, &[stray]).unwrap();

        let done = sweep.run(4, true, None, |_| {}).unwrap();
        assert!(done.is_done());
        assert_eq!(done.found, 8);
        let results = read_catalog(sweep.results_path).unwrap();
        assert_eq!(results.len(), 8);
        assert!(results.iter().all(|e| e.verified_debruijn));

        assert!(matches!(
            sweep.run(3, true, None, |_| {}),
            Err(CatalogError::ProgressMismatch { .. })
        ));
    }
}
