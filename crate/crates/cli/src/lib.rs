//! Command-line front end for `locband-core`: experiment files, CSV samples,
//! JSON envelopes and a threaded executor for the studies.

pub mod config;
pub mod error;
pub mod exec;
pub mod io;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use locband_core::harness::{self, Executor};
use locband_core::selectors::{self, SelectorResult};
use locband_core::strassen::{extreme_point, gram};
use locband_core::{kde, make_bandwidth_grid, process, DensityModel, FiniteFunctional, Kernel, KernelFamily};
use serde::{Deserialize, Serialize};

pub use config::FileConfig;
pub use error::CliError;
pub use exec::Threaded;
pub use io::{load_sample, write_sample};
pub use report::{emit_report, ResultEnvelope, Tables};

#[derive(Debug, Parser)]
#[command(name = "locband", version, about = "Local empirical processes and uniform-in-bandwidth KDE bands")]
pub struct Cli {
    /// Experiment file (TOML); a built-in default is used when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the JSON envelope here, with CSV tables alongside.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed; overrides the file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for the studies.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Geometric bandwidth net of [hlo, hhi] as CSV.
    Grid {
        #[arg(long)]
        hlo: f64,
        #[arg(long)]
        hhi: f64,
        #[arg(long, default_value_t = 1.1)]
        rho: f64,
    },
    /// Local empirical process of the configured family at (h, z).
    Gn {
        #[command(flatten)]
        point: PointArgs,
        /// Divide by sqrt(2 f(z) n h log(1/h)).
        #[arg(long)]
        normalize: bool,
    },
    /// Kernel density estimate at (h, z).
    Kde {
        #[command(flatten)]
        point: PointArgs,
    },
    /// Exact-constant confidence band at (h, z).
    Band {
        #[command(flatten)]
        point: PointArgs,
        /// Density value at z; taken from the configured model when absent.
        #[arg(long)]
        fz: Option<f64>,
    },
    /// Silverman and Sheather-Jones bandwidths of a one-dimensional sample.
    Selectors {
        #[arg(long)]
        data: PathBuf,
    },
    /// Monte-Carlo and exact checks.
    Verify {
        #[command(subcommand)]
        study: Study,
    },
}

#[derive(Debug, Args)]
pub struct PointArgs {
    /// Sample CSV with header x1,...,xd.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub h: f64,
    /// Location, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub z: Vec<f64>,
    /// `uniform` or `triangular`; the configured kernel otherwise.
    #[arg(long)]
    pub kernel: Option<String>,
}

#[derive(Debug, Args, Default)]
pub struct StudyArgs {
    /// Sample sizes, comma separated; overrides the file.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<u64>>,
    /// Replications per sample size; overrides the file.
    #[arg(long)]
    pub replications: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Study {
    /// Distance from the normalized process to the limit ball.
    #[command(name = "thm1-i")]
    Thm1I(StudyArgs),
    /// Approach to a fixed target in the ball.
    #[command(name = "thm1-ii")]
    Thm1Ii(StudyArgs),
    /// Sup and inf of the normalized KDE deviation against +-sqrt(int K^2).
    Cor11(StudyArgs),
    /// Tail decay of the maximal partial-sum process.
    Conc(StudyArgs),
    /// Exact Poisson tails against the Chernoff bound.
    Chernoff {
        /// Defaults to 1..=200.
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<u64>>,
    },
    /// Greedy packing numbers of the configured family.
    Covering,
    /// Tail frequencies of the process and its Poissonized version.
    Poissonize(StudyArgs),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectorsPayload {
    pub silverman: SelectorResult,
    pub sheather_jones: SelectorResult,
}

/// Parses `argv` (program name first) and runs it. Returns the exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Loads the configuration with command-line overrides applied.
pub fn resolve_config(cli: &Cli, study: Option<&StudyArgs>) -> Result<FileConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default_config(),
    };
    if let Some(s) = cli.seed {
        cfg.experiment.seed = s;
    }
    if let Some(a) = study {
        if let Some(n) = &a.n {
            cfg.experiment.n = n.clone();
        }
        if let Some(r) = a.replications {
            cfg.experiment.replications = r;
        }
    }
    Ok(cfg)
}

fn emit<T: Serialize + Tables>(cli: &Cli, command: &str, cfg: &FileConfig, payload: T, start: Instant) -> Result<(), CliError> {
    let echo = serde_json::to_value(cfg).expect("configurations serialize to JSON");
    let env = ResultEnvelope::new(command, echo, cfg.experiment.seed, payload, start.elapsed().as_secs_f64());
    match &cli.out {
        Some(path) => emit_report(&env, path),
        None => {
            println!("{}", env.to_json());
            Ok(())
        }
    }
}

fn pick_kernel(cfg: &FileConfig, name: Option<&str>) -> Result<Kernel, CliError> {
    let d = cfg.experiment.dim();
    match name {
        None => Ok(cfg.experiment.kernel()),
        Some("uniform") => Ok(Kernel::uniform(d)),
        Some("triangular") => Ok(Kernel::triangular(d)),
        Some(other) => Err(CliError::Usage(format!("unknown kernel {other:?}; expected uniform or triangular"))),
    }
}

/// Target of the fixed-target study from the `thm1_ii` section.
pub fn thm1_ii_target(cfg: &FileConfig) -> Result<FiniteFunctional, CliError> {
    let fam = cfg.experiment.family()?;
    if let Some(t) = &cfg.thm1_ii.target {
        return Ok(FiniteFunctional::new(t.clone())?);
    }
    let dir = cfg.thm1_ii.direction.clone().unwrap_or_else(|| {
        let mut e = vec![0.0; fam.len()];
        e[0] = 1.0;
        e
    });
    Ok(extreme_point(&gram(&fam)?, &dir)?)
}

fn covering_report(cfg: &FileConfig) -> Result<harness::CoveringReport, CliError> {
    let fam = cfg.experiment.family()?;
    let d = fam.dim();
    let probe = match &cfg.covering.probe {
        Some(p) => p.clone(),
        None => DensityModel::uniform(vec![0.0; d], vec![1.0; d])?,
    };
    let c = &cfg.covering;
    Ok(harness::estimate_covering(&fam, &c.eps, &probe, c.m_probe, cfg.experiment.seed, c.declared)?)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let start = Instant::now();
    let exec = Threaded::new(cli.threads);
    match &cli.command {
        Command::Grid { hlo, hhi, rho } => {
            let cfg = resolve_config(cli, None)?;
            let grid = make_bandwidth_grid(*hlo, *hhi, *rho)?;
            let rows: Vec<Vec<String>> = grid.levels.iter().map(|h| vec![h.to_string()]).collect();
            print!("{}", io::table_string(&["h"], &rows));
            if cli.out.is_some() {
                emit(cli, "grid", &cfg, grid, start)?;
            }
            Ok(())
        }
        Command::Gn { point, normalize } => {
            let cfg = resolve_config(cli, None)?;
            let sample = load_sample(&point.data)?;
            let fam = match &point.kernel {
                Some(name) => KernelFamily::with_default_rule(vec![pick_kernel(&cfg, Some(name))?])?,
                None => cfg.experiment.family()?,
            };
            let mut ev = process::evaluate_family(&sample, &fam, point.h, &point.z, &cfg.experiment.density)?;
            if *normalize {
                ev = ev.normalized(cfg.experiment.density.pdf(&point.z))?;
            }
            emit(cli, "gn", &cfg, ev, start)
        }
        Command::Kde { point } => {
            let cfg = resolve_config(cli, None)?;
            let sample = load_sample(&point.data)?;
            let k = pick_kernel(&cfg, point.kernel.as_deref())?;
            emit(cli, "kde", &cfg, kde::kde(&sample, &k, point.h, &point.z)?, start)
        }
        Command::Band { point, fz } => {
            let cfg = resolve_config(cli, None)?;
            let sample = load_sample(&point.data)?;
            let k = pick_kernel(&cfg, point.kernel.as_deref())?;
            let est = kde::kde(&sample, &k, point.h, &point.z)?;
            let f_z = fz.unwrap_or_else(|| cfg.experiment.density.pdf(&point.z));
            emit(cli, "band", &cfg, kde::band_cor11(&est, f_z, &k)?, start)
        }
        Command::Selectors { data } => {
            let cfg = resolve_config(cli, None)?;
            let sample = load_sample(data)?;
            let payload = SelectorsPayload { silverman: selectors::silverman(&sample)?, sheather_jones: selectors::sheather_jones(&sample)? };
            emit(cli, "selectors", &cfg, payload, start)
        }
        Command::Verify { study } => run_study(cli, study, &exec, start),
    }
}

fn run_study<E: Executor>(cli: &Cli, study: &Study, exec: &E, start: Instant) -> Result<(), CliError> {
    match study {
        Study::Thm1I(a) => {
            let cfg = resolve_config(cli, Some(a))?;
            emit(cli, "verify thm1-i", &cfg, harness::run_thm1_i(&cfg.experiment, exec)?, start)
        }
        Study::Thm1Ii(a) => {
            let cfg = resolve_config(cli, Some(a))?;
            let target = thm1_ii_target(&cfg)?;
            emit(cli, "verify thm1-ii", &cfg, harness::run_thm1_ii(&cfg.experiment, &target, exec)?, start)
        }
        Study::Cor11(a) => {
            let cfg = resolve_config(cli, Some(a))?;
            let k = cfg.experiment.kernel();
            emit(cli, "verify cor11", &cfg, harness::run_cor11(&cfg.experiment, &k, exec)?, start)
        }
        Study::Conc(a) => {
            let cfg = resolve_config(cli, Some(a))?;
            let fam = cfg.experiment.family()?;
            let r = harness::run_concentration(&cfg.experiment, &fam, &cfg.concentration, exec)?;
            emit(cli, "verify conc", &cfg, r, start)
        }
        Study::Chernoff { n } => {
            let cfg = resolve_config(cli, None)?;
            let list = n.clone().unwrap_or_else(|| (1..=200).collect());
            if list.contains(&0) {
                return Err(CliError::Usage("chernoff needs n >= 1".into()));
            }
            emit(cli, "verify chernoff", &cfg, harness::chernoff_check(&list), start)
        }
        Study::Covering => {
            let cfg = resolve_config(cli, None)?;
            let r = covering_report(&cfg)?;
            emit(cli, "verify covering", &cfg, r, start)
        }
        Study::Poissonize(a) => {
            let cfg = resolve_config(cli, Some(a))?;
            let k = cfg.experiment.kernel();
            let r = harness::poissonization_gap(&cfg.experiment, &k, &cfg.poissonize.threshold, exec)?;
            emit(cli, "verify poissonize", &cfg, r, start)
        }
    }
}
