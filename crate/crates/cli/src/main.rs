mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qmaxent::limits::default_n_max;
use qmaxent::output::{to_csv, to_json};
use qmaxent::{Level, SpectrumSpec};

use crate::commands::{CliError, Outcome};
use crate::config::{
    load_spectrum, parse_levels, ConfigError, FamilyFlags, FamilyKind, Format, RunConfig,
};

#[derive(Parser, Debug)]
#[command(
    name = "qmaxent",
    version,
    about = "Generalized maximum-entropy distributions over energy spectra"
)]
struct Cli {
    /// TOML run configuration; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (default: one per core)
    #[arg(long, global = true, env = "QMAXENT_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one problem and print beta, T, the multipliers, S and the head of p
    Solve {
        #[command(flatten)]
        spectrum: SpectrumArgs,
        #[command(flatten)]
        problem: ProblemArgs,
        /// Rows of p to emit (0 for all)
        #[arg(long)]
        head: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Solve a family at increasing truncations N and extrapolate
    Sweep {
        #[command(flatten)]
        spectrum: SpectrumArgs,
        #[command(flatten)]
        problem: ProblemArgs,
        /// First truncation of the doubling schedule
        #[arg(long)]
        n0: Option<u64>,
        /// Explicit truncations, comma separated
        #[arg(long, value_delimiter = ',')]
        schedule: Option<Vec<u64>>,
        /// Rows used by the rate fit
        #[arg(long)]
        tail: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Emit the dataset of figure 1 to 7
    Figure {
        id: Option<u8>,
        #[arg(long)]
        points: Option<usize>,
        /// q series, comma separated
        #[arg(long = "q", value_delimiter = ',')]
        qs: Option<Vec<f64>>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Ionization temperatures from the Saha equation over a density range
    Saha {
        #[arg(long)]
        eta_min: Option<f64>,
        #[arg(long)]
        eta_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        /// Target ionized fraction
        #[arg(long)]
        x: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the acceptance criteria; exit 0 only if all pass
    Accept {
        /// Criteria to run, comma separated (default: all)
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<u8>>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[arg(long, value_enum)]
    family: Option<FamilyKind>,
    /// Number of levels (largest truncation for sweeps)
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    emax: Option<f64>,
    /// Degeneracy of every uniform level
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    hbar_omega: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    e_ion: Option<f64>,
    /// Explicit levels as "energy:degeneracy,..."
    #[arg(long, conflicts_with_all = ["family", "spectrum"])]
    levels: Option<String>,
    /// Spectrum file (TOML, or JSON by extension)
    #[arg(long, conflicts_with = "family")]
    spectrum: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ProblemArgs {
    /// Internal energy
    #[arg(long)]
    u: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    /// Exponent on the microstate count in the scale factor
    #[arg(long)]
    sigma: Option<f64>,
    /// Boltzmann constant in the units of energy per temperature
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output file (default: standard output)
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl SpectrumArgs {
    /// `default_n` fills in a missing `--n` for a family.
    fn spec(&self, default_n: bool) -> Result<Option<SpectrumSpec>, ConfigError> {
        if let Some(text) = &self.levels {
            let levels = parse_levels(text).map_err(ConfigError::Invalid)?;
            return Ok(Some(SpectrumSpec::Levels {
                levels: levels
                    .iter()
                    .map(|&Level { energy, degeneracy }| (energy, degeneracy))
                    .collect(),
            }));
        }
        if let Some(path) = &self.spectrum {
            return load_spectrum(path).map(Some);
        }
        let Some(kind) = self.family else {
            return Ok(None);
        };
        let family = FamilyFlags {
            kind,
            e_max: self.emax,
            m: self.m,
            hbar_omega: self.hbar_omega,
            gamma: self.gamma,
            e_ion: self.e_ion,
        }
        .family();
        let n = match (self.n, default_n) {
            (Some(n), _) => n,
            (None, true) => default_n_max(&family),
            (None, false) => return Err(ConfigError::Invalid("missing --n".into())),
        };
        Ok(Some(SpectrumSpec::Family { family, n }))
    }
}

impl ProblemArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        cfg.u = self.u;
        cfg.q = self.q;
        cfg.sigma = self.sigma;
        cfg.k = self.k;
        cfg.tol = self.tol;
    }
}

impl OutputArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        cfg.output = self.out.clone();
        cfg.format = self.format;
    }
}

/// The config given by flags alone, and the command to run.
fn flag_config(command: &Command) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    match command {
        Command::Solve {
            spectrum,
            problem,
            head,
            output,
        } => {
            cfg.command = Some("solve".into());
            cfg.spectrum = spectrum.spec(false)?;
            problem.apply(&mut cfg);
            cfg.head = *head;
            output.apply(&mut cfg);
        }
        Command::Sweep {
            spectrum,
            problem,
            n0,
            schedule,
            tail,
            output,
        } => {
            cfg.command = Some("sweep".into());
            cfg.spectrum = spectrum.spec(true)?;
            problem.apply(&mut cfg);
            cfg.n0 = *n0;
            cfg.schedule = schedule.clone();
            cfg.tail = *tail;
            output.apply(&mut cfg);
        }
        Command::Figure {
            id,
            points,
            qs,
            output,
        } => {
            cfg.command = Some("figure".into());
            cfg.figure = *id;
            cfg.points = *points;
            cfg.qs = qs.clone();
            output.apply(&mut cfg);
        }
        Command::Saha {
            eta_min,
            eta_max,
            points,
            x,
            output,
        } => {
            cfg.command = Some("saha".into());
            cfg.eta_min = *eta_min;
            cfg.eta_max = *eta_max;
            cfg.points = *points;
            cfg.x = *x;
            output.apply(&mut cfg);
        }
        Command::Accept { only, output } => {
            cfg.command = Some("accept".into());
            cfg.criteria = only.clone();
            output.apply(&mut cfg);
        }
    }
    Ok(cfg)
}

fn write_outcome(cfg: &RunConfig, outcome: &Outcome) -> Result<(), CliError> {
    let recorded = cfg.recorded();
    let text = match cfg.format.unwrap_or_default() {
        Format::Csv => to_csv(&outcome.table, &recorded),
        Format::Json => to_json(&outcome.table, &recorded),
    };
    match &cfg.output {
        Some(path) => {
            std::fs::write(path, text)?;
            let mut out = std::io::stdout().lock();
            for note in &outcome.notes {
                writeln!(out, "{note}")?;
            }
            writeln!(out, "wrote {}", path.display())?;
        }
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| ConfigError::Invalid(format!("cannot start {n} threads: {e}")))?;
    }
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.overlay(&flag_config(&cli.command)?);
    let outcome = match &cli.command {
        Command::Solve { .. } => commands::run_solve(&cfg)?,
        Command::Sweep { .. } => commands::run_sweep(&cfg)?,
        Command::Figure { .. } => commands::run_figure(&cfg)?,
        Command::Saha { .. } => commands::run_saha(&cfg)?,
        Command::Accept { .. } => commands::run_accept(&cfg)?,
    };
    write_outcome(&cfg, &outcome)?;
    Ok(outcome.success)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
