use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wclmmse::dataio::{self, load_csv};
use wclmmse::filters::FilterKind;
use wclmmse::harness::{self, LPolicy, RunOptions, Source};
use wclmmse::linalg::MatrixNorm;
use wclmmse::model::{self, CovarianceModel, Spectrum};
use wclmmse::{Error, Result};

#[derive(Parser)]
#[command(name = "wclmmse", version, about = "Well-conditioned LMMSE filter experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SourceArgs {
    /// Time-series CSV with a header row.
    #[arg(long, conflicts_with = "model")]
    data: Option<PathBuf>,
    /// Binary covariance model written by `synth`.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value = "DATE")]
    date_col: String,
    #[arg(long, default_value = "CLOSE")]
    value_col: String,
    #[arg(long, default_value_t = 0.2)]
    test_fraction: f64,
    /// Test vectors drawn per cell when running from a model.
    #[arg(long, default_value_t = harness::DEFAULT_MODEL_TEST_SAMPLES)]
    test_samples: usize,
    #[arg(long, env = "WCLMMSE_SEED", default_value_t = 0)]
    seed: u64,
}

impl SourceArgs {
    fn load(&self) -> Result<Source> {
        match (&self.data, &self.model) {
            (Some(path), None) => Ok(Source::Series {
                series: load_csv(path, &self.date_col, &self.value_col)?,
                test_fraction: self.test_fraction,
            }),
            (None, Some(path)) => Ok(Source::Model {
                model: CovarianceModel::load(path)?,
                test_samples: self.test_samples,
            }),
            _ => Err(Error::Config("exactly one of --data or --model is required".into())),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic covariance model.
    Synth {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// `geometric:a,r`, `constant:a`, or `explicit:l1,l2,...`
        #[arg(long, default_value = "geometric:1,0.5")]
        spectrum: String,
        #[arg(long, env = "WCLMMSE_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep the truncation parameter at fixed M.
    SweepL {
        #[command(flatten)]
        source: SourceArgs,
        /// Defaults to the model's input length when running from a model.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1)]
        l_min: usize,
        #[arg(long)]
        l_max: Option<usize>,
        #[arg(long, default_value_t = 1)]
        l_step: usize,
        #[arg(long, default_value = "wiener,lrw,jpc,lsjpc")]
        filters: String,
        /// Record wall-clock milliseconds per row.
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep M with L chosen per M.
    SweepM {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value = "400:3200:400")]
        m_grid: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value = "wiener,lrw,jpc,lsjpc")]
        filters: String,
        /// `best`, `best:lmin:lmax:step`, or `fixed:L`
        #[arg(long, default_value = "best")]
        l_policy: String,
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Condition number of the input covariance over M.
    Cond {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value = "400:3200:400")]
        m_grid: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Distance to the Wiener filter against truncation-power loss.
    Scaling {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value = "jpc")]
        filter: String,
        #[arg(long, default_value = "nuclear")]
        norm: String,
        #[arg(long, default_value_t = 1)]
        l_min: usize,
        #[arg(long)]
        l_max: Option<usize>,
        #[arg(long, default_value_t = 1)]
        l_step: usize,
        /// Absolute eigenvalue floor for whitening (default 1e-12·λ_max).
        #[arg(long)]
        floor: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn model_m(source: &Source) -> Option<usize> {
    match source {
        Source::Model { model, .. } => Some(model.m()),
        Source::Series { .. } => None,
    }
}

fn write_csv_file<F>(path: &Path, write: F) -> Result<()>
where
    F: FnOnce(&mut std::io::BufWriter<std::fs::File>) -> Result<()>,
{
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write(&mut w)
}

fn report_failures(rows: &[harness::ExperimentResult]) {
    for r in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "warning: {} m={} l={:?}: {}",
            r.filter,
            r.m,
            r.l,
            r.error.as_deref().unwrap_or_default()
        );
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth {
            n,
            m,
            spectrum,
            seed,
            out,
        } => {
            let spectrum: Spectrum = spectrum.parse()?;
            model::synthetic_model(n, m, &spectrum, seed)?.save(&out)?;
        }
        Command::SweepL {
            source,
            m,
            n,
            l_min,
            l_max,
            l_step,
            filters,
            timing,
            out,
        } => {
            let seed = source.seed;
            let src = source.load()?;
            let m = m
                .or_else(|| model_m(&src))
                .ok_or_else(|| Error::Config("--m is required with --data".into()))?;
            let grid = wclmmse::diagnostics::l_grid(l_min, l_max.unwrap_or(m), l_step)?;
            let kinds = harness::parse_filters(&filters)?;
            let rows = harness::run_l_sweep(&src, m, n, &grid, &kinds, RunOptions { seed, timing })?;
            report_failures(&rows);
            dataio::write_results(&rows, &out)?;
        }
        Command::SweepM {
            source,
            m_grid,
            n,
            filters,
            l_policy,
            timing,
            out,
        } => {
            let seed = source.seed;
            let src = source.load()?;
            let grid = harness::parse_grid(&m_grid)?;
            let kinds = harness::parse_filters(&filters)?;
            let policy: LPolicy = l_policy.parse()?;
            let rows = harness::run_m_sweep(&src, &grid, n, &kinds, policy, RunOptions { seed, timing })?;
            report_failures(&rows);
            dataio::write_results(&rows, &out)?;
        }
        Command::Cond {
            source,
            m_grid,
            n,
            out,
        } => {
            let seed = source.seed;
            let src = source.load()?;
            let grid = harness::parse_grid(&m_grid)?;
            let n = n.unwrap_or(match &src {
                Source::Model { model, .. } => model.n(),
                Source::Series { .. } => 7,
            });
            let report = harness::run_condition_report(&src, &grid, Some(n), seed)?;
            dataio::write_results(&harness::condition_rows(&report, n), &out)?;
        }
        Command::Scaling {
            model,
            filter,
            norm,
            l_min,
            l_max,
            l_step,
            floor,
            out,
        } => {
            let model = CovarianceModel::load(&model)?;
            let kind: FilterKind = filter.parse()?;
            let norm: MatrixNorm = norm.parse()?;
            let grid = wclmmse::diagnostics::l_grid(l_min, l_max.unwrap_or(model.m()), l_step)?;
            let study = harness::run_scaling_report(&model, kind, &grid, norm, floor)?;
            write_csv_file(&out, |w| harness::write_scaling_csv(&study, w))?;
            eprintln!(
                "{}: slope {:e}, max dist/rho {:e}",
                study.kind, study.slope, study.max_ratio
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
