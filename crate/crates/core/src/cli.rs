//! Command implementations for the `linext` binary.
//!
//! Exit codes: 0 on success, 1 for usage, parse and other errors, 2 when an
//! exact computation exceeds its size limit.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::experiment::{write_experiment, ExperimentConfig, PerSize};
use crate::format::{load_poset, save_poset};
use crate::oracle::exact_count;
use crate::poset::Poset;
use crate::sis::{lower_bound, run_batch, ImportanceSpec};
use crate::variance::RvReport;

#[derive(Debug, Parser)]
#[command(
    name = "linext",
    version,
    about = "Estimate the number of linear extensions of a poset"
)]
pub struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random poset in the `.poset` format.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.2)]
        edge_prob: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample estimates of the number of linear extensions.
    Estimate {
        poset: PathBuf,
        #[arg(long, default_value = "asq")]
        spec: ImportanceSpec,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use the connected-components recursion.
        #[arg(long)]
        recursive: bool,
    },
    /// Count linear extensions exactly (small posets only).
    Exact { poset: PathBuf },
    /// Exact relative variance by both evaluation routes.
    Rv {
        poset: PathBuf,
        #[arg(long, default_value = "uniform")]
        spec: ImportanceSpec,
    },
    /// Relative variance against size on random posets, written as CSV.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Comma-separated sizes.
    #[arg(long, value_delimiter = ',')]
    pub n_values: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0.2)]
    pub edge_prob: f64,
    #[arg(long)]
    pub posets_per_n: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Comma-separated importance functions.
    #[arg(long, value_delimiter = ',')]
    pub spec: Option<Vec<ImportanceSpec>>,
    /// Only run the connected-components recursion.
    #[arg(long, conflicts_with = "non_recursive")]
    pub recursive: bool,
    /// Only run the plain sampler.
    #[arg(long)]
    pub non_recursive: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sizes 10..=150 step 5 with n² posets and n² samples. Takes hours.
    #[arg(long)]
    pub paper_scale: bool,
    #[arg(long)]
    pub out: PathBuf,
}

impl ExperimentArgs {
    pub fn to_config(&self) -> std::result::Result<ExperimentConfig, String> {
        let mut c = if self.paper_scale {
            ExperimentConfig::paper_scale(self.seed, self.out.clone())
        } else {
            ExperimentConfig::desk_scale(self.seed, self.out.clone())
        };
        if let Some(ns) = &self.n_values {
            c.n_values = ns.clone();
        }
        c.edge_prob = self.edge_prob;
        if let Some(m) = self.posets_per_n {
            c.posets_per_n = PerSize::Fixed(m);
        }
        if let Some(k) = self.samples {
            c.samples_per_poset = PerSize::Fixed(k);
        }
        if let Some(specs) = &self.spec {
            c.specs = specs.clone();
        }
        if self.recursive {
            c.recursive = vec![true];
        } else if self.non_recursive {
            c.recursive = vec![false];
        }
        c.validate()?;
        Ok(c)
    }
}

pub fn cmd_generate(n: usize, edge_prob: f64, seed: u64, out: &Path) -> Result<()> {
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::Usage(format!(
            "edge probability {edge_prob} outside [0, 1]"
        )));
    }
    let p = Poset::random(n, edge_prob, seed);
    save_poset(
        out,
        &p,
        &[format!(
            "random poset n={n} edge_prob={edge_prob} seed={seed}"
        )],
    )
}

pub fn cmd_estimate(
    path: &Path,
    spec: &ImportanceSpec,
    samples: usize,
    seed: u64,
    recursive: bool,
    out: &mut dyn Write,
) -> Result<()> {
    let p = load_poset(path)?;
    if samples == 0 {
        return Err(Error::Usage("sample count must be at least 1".into()));
    }
    let stats = run_batch(&p, spec, samples, seed, recursive)?;
    let io = |e| Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    };
    let mut lines = vec![
        format!("elements          {}", p.len()),
        format!("spec              {}", spec.name()),
        format!("recursive         {recursive}"),
        format!("samples           {}", stats.samples),
        format!("mean_estimate     {:.12e}", stats.mean_estimate),
        format!("ln_mean_estimate  {:.12}", stats.mean_log_estimate),
        format!("relative_variance {:.12e}", stats.relative_variance),
        format!("standard_error    {:.12e}", stats.standard_error()),
    ];
    if *spec == ImportanceSpec::Descendants {
        let lb = lower_bound(&p);
        lines.push(format!(
            "lower_bound       {:.12e} (ln {:.12})",
            lb.exp(),
            lb
        ));
        match stats.best_upper_bound_log {
            Some(ub) => lines.push(format!(
                "upper_bound       {:.12e} (ln {:.12})",
                ub.exp(),
                ub
            )),
            None => lines.push("upper_bound       n/a (recursive)".into()),
        }
    }
    for l in lines {
        writeln!(out, "{l}").map_err(io)?;
    }
    Ok(())
}

pub fn cmd_exact(path: &Path, out: &mut dyn Write) -> Result<()> {
    let p = load_poset(path)?;
    let count = exact_count(&p)?;
    writeln!(out, "{count}").map_err(|e| Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    })
}

pub fn cmd_rv(path: &Path, spec: &ImportanceSpec, out: &mut dyn Write) -> Result<()> {
    let p = load_poset(path)?;
    let label = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let report = RvReport::exact(&label, &p, spec)?;
    writeln!(out, "{}", RvReport::CSV_HEADER)
        .and_then(|_| writeln!(out, "{}", report.csv_row()))
        .map_err(|e| Error::Io {
            path: PathBuf::from("<stdout>"),
            source: e,
        })
}

pub fn cmd_experiment(config: &ExperimentConfig, out: &mut dyn Write) -> Result<()> {
    let output = write_experiment(config)?;
    let _ = writeln!(
        out,
        "wrote {} rows to {} and {} summary rows to {}",
        output.rows.len(),
        config.out.display(),
        output.summary.len(),
        config.summary_path().display()
    );
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::SizeLimit { .. } => 2,
        _ => 1,
    }
}

/// Parses `args` and runs the command, writing results to `out` and
/// diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    let go = |out: &mut dyn Write| -> Result<()> {
        match &cli.command {
            Command::Generate {
                n,
                edge_prob,
                seed,
                out: path,
            } => cmd_generate(*n, *edge_prob, *seed, path),
            Command::Estimate {
                poset,
                spec,
                samples,
                seed,
                recursive,
            } => cmd_estimate(poset, spec, *samples, *seed, *recursive, out),
            Command::Exact { poset } => cmd_exact(poset, out),
            Command::Rv { poset, spec } => cmd_rv(poset, spec, out),
            Command::Experiment(args) => {
                let config = args.to_config().map_err(Error::Usage)?;
                if args.paper_scale {
                    eprintln!("warning: --paper-scale runs n² posets × n² samples up to n = 150");
                }
                cmd_experiment(&config, out)
            }
        }
    };
    let result = match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => {
                let mut buf = Vec::new();
                let r = pool.install(|| go(&mut buf));
                let _ = out.write_all(&buf);
                r
            }
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return 1;
            }
        },
        None => go(out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if matches!(e, Error::SizeLimit { .. }) {
                let _ = writeln!(err, "hint: use `linext estimate` for posets this large");
            }
            exit_code(&e)
        }
    }
}

/// Entry point used by the binary.
pub fn main_from_env() -> i32 {
    run(
        std::env::args_os(),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    )
}
