//! Random-poset experiments: relative variance against poset size.
//!
//! For each size `n`, a number of random posets is drawn (every pair gets a
//! relation with probability `edge_prob`, then closed), and each poset gets a
//! batch of samples under each importance function, with and without the
//! component recursion. Poset `j` at size `n` uses seed
//! `derive_seed(derive_seed(master, n), j)`; its samples use substreams of that
//! seed, shared by every importance and mode. Output is identical for any
//! thread count.
//!
//! CSV columns are fixed:
//!
//! ```text
//! n,spec,recursive,poset_index,seed,samples,mean_log_estimate,relative_variance
//! ```
//!
//! and the summary file:
//!
//! ```text
//! n,spec,recursive,posets,mean_relative_variance
//! ```
//!
//! `mean_log_estimate` is the natural log of the batch mean. Reals are
//! written with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::poset::Poset;
use crate::rng::derive_seed;
use crate::sis::{run_batch, ImportanceSpec};

pub const ROW_HEADER: &str =
    "n,spec,recursive,poset_index,seed,samples,mean_log_estimate,relative_variance";
pub const SUMMARY_HEADER: &str = "n,spec,recursive,posets,mean_relative_variance";

/// A count that is either fixed or `n²` for poset size `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PerSize {
    Fixed(usize),
    Squared,
}

impl PerSize {
    pub fn at(self, n: usize) -> usize {
        match self {
            PerSize::Fixed(k) => k,
            PerSize::Squared => n * n,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub n_values: Vec<usize>,
    pub edge_prob: f64,
    pub posets_per_n: PerSize,
    pub samples_per_poset: PerSize,
    pub specs: Vec<ImportanceSpec>,
    /// Which modes to run: `false` plain, `true` recursive.
    pub recursive: Vec<bool>,
    pub master_seed: u64,
    pub out: PathBuf,
}

impl ExperimentConfig {
    /// Sizes 10, 15, …, 40 with 64 posets of 256 samples each.
    pub fn desk_scale(master_seed: u64, out: PathBuf) -> Self {
        Self {
            n_values: (10..=40).step_by(5).collect(),
            edge_prob: 0.2,
            posets_per_n: PerSize::Fixed(64),
            samples_per_poset: PerSize::Fixed(256),
            specs: ImportanceSpec::SHIPPED.to_vec(),
            recursive: vec![false, true],
            master_seed,
            out,
        }
    }

    /// Sizes 10, 15, …, 150 with `n²` posets of `n²` samples each. Hours of
    /// compute.
    pub fn paper_scale(master_seed: u64, out: PathBuf) -> Self {
        Self {
            n_values: (10..=150).step_by(5).collect(),
            posets_per_n: PerSize::Squared,
            samples_per_poset: PerSize::Squared,
            ..Self::desk_scale(master_seed, out)
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return Err("sizes must be a nonempty list of positive integers".into());
        }
        if !(0.0..=1.0).contains(&self.edge_prob) {
            return Err(format!(
                "edge probability {} outside [0, 1]",
                self.edge_prob
            ));
        }
        for (what, c) in [
            ("posets", self.posets_per_n),
            ("samples", self.samples_per_poset),
        ] {
            if c == PerSize::Fixed(0) {
                return Err(format!("{what} count must be at least 1"));
            }
        }
        if self.specs.is_empty() || self.recursive.is_empty() {
            return Err("at least one importance and one mode are required".into());
        }
        Ok(())
    }

    /// Path of the summary file written next to `out`.
    pub fn summary_path(&self) -> PathBuf {
        let stem = self
            .out
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "experiment".into());
        self.out.with_file_name(format!("{stem}.summary.csv"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRow {
    pub n: usize,
    pub spec: String,
    pub recursive: bool,
    pub poset_index: usize,
    pub seed: u64,
    pub samples: usize,
    pub mean_log_estimate: f64,
    pub relative_variance: f64,
}

impl ExperimentRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.16e},{:.16e}",
            self.n,
            self.spec,
            self.recursive,
            self.poset_index,
            self.seed,
            self.samples,
            self.mean_log_estimate,
            self.relative_variance
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub n: usize,
    pub spec: String,
    pub recursive: bool,
    pub posets: usize,
    pub mean_relative_variance: f64,
}

#[derive(Clone, Debug, Default)]
pub struct ExperimentOutput {
    pub rows: Vec<ExperimentRow>,
    pub summary: Vec<SummaryRow>,
}

pub fn poset_seed(master: u64, n: usize, index: usize) -> u64 {
    derive_seed(derive_seed(master, n as u64), index as u64)
}

/// Runs the experiment in memory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let mut rows = Vec::new();
    for &n in &config.n_values {
        let posets = config.posets_per_n.at(n);
        let samples = config.samples_per_poset.at(n);
        let per_poset: Vec<Vec<ExperimentRow>> = (0..posets)
            .into_par_iter()
            .map(|j| {
                let seed = poset_seed(config.master_seed, n, j);
                let p = Poset::random(n, config.edge_prob, seed);
                let mut out = Vec::new();
                for spec in &config.specs {
                    for &recursive in &config.recursive {
                        let stats = run_batch(&p, spec, samples, seed, recursive)?;
                        out.push(ExperimentRow {
                            n,
                            spec: spec.name().to_owned(),
                            recursive,
                            poset_index: j,
                            seed,
                            samples,
                            mean_log_estimate: stats.mean_log_estimate,
                            relative_variance: stats.relative_variance,
                        });
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        // Reorder to (spec, mode, poset).
        for spec in &config.specs {
            for &recursive in &config.recursive {
                rows.extend(
                    per_poset
                        .iter()
                        .flatten()
                        .filter(|r| r.spec == spec.name() && r.recursive == recursive)
                        .cloned(),
                );
            }
        }
    }
    let summary = summarize(&rows);
    Ok(ExperimentOutput { rows, summary })
}

fn summarize(rows: &[ExperimentRow]) -> Vec<SummaryRow> {
    let mut out: Vec<SummaryRow> = Vec::new();
    for r in rows {
        match out.last_mut() {
            Some(s) if s.n == r.n && s.spec == r.spec && s.recursive == r.recursive => {
                s.posets += 1;
                s.mean_relative_variance += r.relative_variance;
            }
            _ => out.push(SummaryRow {
                n: r.n,
                spec: r.spec.clone(),
                recursive: r.recursive,
                posets: 1,
                mean_relative_variance: r.relative_variance,
            }),
        }
    }
    for s in &mut out {
        s.mean_relative_variance /= s.posets as f64;
    }
    out
}

impl ExperimentOutput {
    pub fn rows_csv(&self) -> String {
        let mut s = String::from(ROW_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.csv());
            s.push('\n');
        }
        s
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from(SUMMARY_HEADER);
        s.push('\n');
        for r in &self.summary {
            let _ = writeln!(
                s,
                "{},{},{},{},{:.16e}",
                r.n, r.spec, r.recursive, r.posets, r.mean_relative_variance
            );
        }
        s
    }

    pub fn mean_rv(&self, n: usize, spec: &str, recursive: bool) -> Option<f64> {
        self.summary
            .iter()
            .find(|s| s.n == n && s.spec == spec && s.recursive == recursive)
            .map(|s| s.mean_relative_variance)
    }

    fn sizes(&self) -> Vec<usize> {
        let mut ns: Vec<usize> = self.summary.iter().map(|s| s.n).collect();
        ns.dedup();
        ns
    }

    /// Fraction of sizes with mean RV ordered asq ≤ desc ≤ uniform in the
    /// given mode.
    pub fn ordering_fraction(&self, recursive: bool) -> f64 {
        let ns = self.sizes();
        let good = ns
            .iter()
            .filter(|&&n| {
                match (
                    self.mean_rv(n, "asq", recursive),
                    self.mean_rv(n, "desc", recursive),
                    self.mean_rv(n, "uniform", recursive),
                ) {
                    (Some(a), Some(d), Some(u)) => a <= d && d <= u,
                    _ => false,
                }
            })
            .count();
        good as f64 / ns.len().max(1) as f64
    }

    /// Fraction of (size, importance) cells where the recursive mean RV does
    /// not exceed the plain one.
    pub fn recursion_gain_fraction(&self) -> f64 {
        let cells: Vec<(usize, &str)> = self
            .summary
            .iter()
            .filter(|s| !s.recursive)
            .map(|s| (s.n, s.spec.as_str()))
            .collect();
        let good = cells
            .iter()
            .filter(|&&(n, spec)| {
                match (self.mean_rv(n, spec, true), self.mean_rv(n, spec, false)) {
                    (Some(r), Some(p)) => r <= p,
                    _ => false,
                }
            })
            .count();
        good as f64 / cells.len().max(1) as f64
    }
}

/// Runs the experiment and writes the row and summary CSVs. Nothing is left
/// on disk if any step fails.
pub fn write_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let output = run_experiment(config)?;
    let summary_path = config.summary_path();
    let write = |path: &Path, text: String| {
        fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })
    };
    let result = write(&config.out, output.rows_csv())
        .and_then(|_| write(&summary_path, output.summary_csv()));
    if let Err(e) = result {
        let _ = fs::remove_file(&config.out);
        let _ = fs::remove_file(&summary_path);
        return Err(e);
    }
    Ok(output)
}
