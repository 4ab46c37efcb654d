//! Subcommand bodies: each turns a resolved config into a table.

use std::fmt;

use qmaxent::acceptance::{self, CRITERIA};
use qmaxent::figures::{figure, FigureOptions};
use qmaxent::hydrogen_saha::saha_sweep;
use qmaxent::limits::{
    delta_rate_constant, fit_rate, geometric_schedule, lemma_constant, sweep, DEFAULT_N0,
};
use qmaxent::output::{Cell, Table};
use qmaxent::qmath::{scale_factor, EntropicParams};
use qmaxent::solver::{multipliers, solve, solve_summary, SolveOptions};
use qmaxent::spectra::MATERIALIZE_LIMIT;
use qmaxent::{Family, LevelSource, SpectrumSpec};
use serde_json::json;

use crate::config::{ConfigError, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Core(qmaxent::Error),
    Config(ConfigError),
    Io(std::io::Error),
}

impl CliError {
    /// 2 for bad input, 3 when a computation did not converge, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_domain() => 2,
            CliError::Core(_) => 3,
            CliError::Config(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<qmaxent::Error> for CliError {
    fn from(e: qmaxent::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub struct Outcome {
    pub table: Table,
    /// Human-readable lines for the terminal.
    pub notes: Vec<String>,
    pub success: bool,
}

impl Outcome {
    fn ok(table: Table, notes: Vec<String>) -> Self {
        Outcome {
            table,
            notes,
            success: true,
        }
    }
}

fn solve_options(cfg: &RunConfig) -> SolveOptions {
    SolveOptions {
        tol: cfg.tol.unwrap_or(SolveOptions::default().tol),
        ..SolveOptions::default()
    }
}

fn params(cfg: &RunConfig, family: Option<&Family>) -> Result<EntropicParams, CliError> {
    let sigma = cfg
        .sigma
        .unwrap_or_else(|| family.map_or(1.0, Family::natural_sigma));
    Ok(EntropicParams::new(
        cfg.require_q()?,
        cfg.k.unwrap_or(1.0),
        sigma,
    )?)
}

pub fn run_solve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.require_spectrum()?;
    let family = match spec {
        SpectrumSpec::Family { family, .. } => Some(*family),
        SpectrumSpec::Levels { .. } => None,
    };
    let spectrum = spec.build()?;
    let params = params(cfg, family.as_ref())?;
    let u = cfg.require_u()?;
    let opts = solve_options(cfg);
    let mut table = Table::new(&["n", "energy", "degeneracy", "p"]);
    table.set_extra("spectrum", spectrum.label());

    let (beta, temperature, lambda1, lambda2, entropy) = if spectrum.len() <= MATERIALIZE_LIMIT {
        let sol = solve(&spectrum, u, &params, &opts)?;
        let head = match cfg.head.unwrap_or(10) {
            0 => sol.p.len(),
            h => h.min(sol.p.len()),
        };
        for (i, p) in sol.p.iter().take(head).enumerate() {
            let n = i as u64 + 1;
            table.push(vec![
                Cell::Int(n),
                Cell::Num(LevelSource::energy(&spectrum, n)),
                Cell::Int(spectrum.level(n).degeneracy),
                Cell::Num(*p),
            ]);
        }
        table.set_extra("delta", sol.delta);
        table.set_extra("z", sol.z);
        table.set_extra("k_s", sol.k_s);
        table.set_extra("iterations", sol.iterations);
        (
            sol.beta,
            sol.temperature,
            sol.lambda1,
            sol.lambda2,
            sol.entropy,
        )
    } else {
        let k_s = scale_factor(&params, spectrum.e_max(), spectrum.microstates())?;
        let s = solve_summary(&spectrum, u, params.q, k_s, &opts)?;
        let agg = s.aggregates;
        let (l1, l2) = multipliers(&agg, k_s);
        table.push(vec![
            Cell::Int(1),
            Cell::Num(0.0),
            Cell::Int(spectrum.level(1).degeneracy),
            Cell::Num(agg.p1),
        ]);
        table.set_extra("delta", agg.structural.delta);
        table.set_extra("z", agg.ln_z.exp());
        table.set_extra("k_s", k_s);
        table.set_extra("iterations", agg.structural.iterations);
        (agg.structural.beta, s.temperature, l1, l2, s.entropy)
    };
    for (key, v) in [
        ("beta", beta),
        ("temperature", temperature.unwrap_or(f64::INFINITY)),
        ("lambda1", lambda1),
        ("lambda2", lambda2),
        ("entropy", entropy),
    ] {
        table.set_num(key, v);
    }
    let notes = vec![format!(
        "beta = {beta:.12}  T = {}  lambda1 = {lambda1:.12}  lambda2 = {lambda2:.12}  S = {entropy:.12}",
        temperature.map_or("inf".to_string(), |t| format!("{t:.12}"))
    )];
    Ok(Outcome::ok(table, notes))
}

pub fn run_sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (family, n_max) = match cfg.require_spectrum()? {
        SpectrumSpec::Family { family, n } => (*family, *n),
        SpectrumSpec::Levels { .. } => {
            return Err(ConfigError::Invalid(
                "sweep needs a spectrum family, not explicit levels".into(),
            )
            .into())
        }
    };
    let schedule = match &cfg.schedule {
        Some(s) => s.clone(),
        None => geometric_schedule(cfg.n0.unwrap_or(DEFAULT_N0), n_max),
    };
    let params = params(cfg, Some(&family))?;
    let u = cfg.require_u()?;
    let mut seq = sweep(family, u, &params, &schedule, &solve_options(cfg))?;
    if let Some(tail) = cfg.tail {
        seq.fit = fit_rate(&seq, tail).ok();
    }

    let mut table = Table::new(&[
        "N",
        "beta",
        "delta",
        "T",
        "p1",
        "ground_mass",
        "margin",
        "failure",
    ]);
    for r in &seq.rows {
        table.push(vec![
            Cell::Int(r.n),
            Cell::Num(r.beta),
            Cell::Num(r.delta),
            Cell::Num(r.temperature),
            Cell::Num(r.p1),
            Cell::Num(r.ground_mass),
            Cell::Num(r.margin),
            Cell::from(r.failure.clone().unwrap_or_default()),
        ]);
    }
    table.set_extra("fit", seq.fit);
    table.set_extra("beta_limit", seq.beta_limit);
    table.set_extra("t_limit", seq.t_limit);
    table.set_extra("beta_nondecreasing", seq.beta_nondecreasing);
    table.set_extra("delta_decreasing", seq.delta_decreasing);
    let mut notes = Vec::new();
    if let Some(fit) = seq.fit {
        notes.push(format!(
            "fitted exponent {:.6} over {} rows",
            fit.exponent, fit.rows_used
        ));
    }
    if let Family::Hydrogen { e_ion } = family {
        if params.q < 1.0 && u < e_ion {
            let printed = lemma_constant(u, params.q, e_ion)?;
            let carried = delta_rate_constant(u, params.q, e_ion)?;
            table.set_extra("lemma_constant", printed);
            table.set_extra("delta_rate_constant", carried);
            notes.push(format!(
                "rate constant {printed:.6}, with 2n^2 carried {carried:.6}"
            ));
        }
    }
    if let Some(t) = seq.t_limit {
        notes.push(format!("T limit {:.12}", t.limit));
    }
    Ok(Outcome::ok(table, notes))
}

pub fn run_figure(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let id = cfg
        .figure
        .ok_or_else(|| ConfigError::Invalid("missing figure id".into()))?;
    let defaults = FigureOptions::default();
    let opts = FigureOptions {
        points: cfg.points.unwrap_or(defaults.points),
        qs: cfg.qs.clone(),
    };
    let table = figure(id, &opts)?;
    let notes = vec![format!("figure {id}: {} rows", table.rows.len())];
    Ok(Outcome::ok(table, notes))
}

pub fn run_saha(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let rows = saha_sweep(
        cfg.eta_min.unwrap_or(1e13),
        cfg.eta_max.unwrap_or(1e27),
        cfg.points.unwrap_or(15),
        cfg.x.unwrap_or(0.999),
    )?;
    let mut table = Table::new(&["eta", "T", "sign"]);
    for r in &rows {
        table.push(vec![
            Cell::Num(r.eta),
            Cell::Num(r.temperature),
            Cell::from(format!("{:?}", r.sign).to_lowercase()),
        ]);
    }
    let (lo, hi) = (rows[0].temperature, rows[rows.len() - 1].temperature);
    table.set_extra("range", json!([lo, hi]));
    let notes = vec![format!(
        "T from {lo:.4e} K to {hi:.4e} K ({} sign)",
        format!("{:?}", rows[0].sign).to_lowercase()
    )];
    Ok(Outcome::ok(table, notes))
}

pub fn run_accept(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ids: Vec<u8> = cfg
        .criteria
        .clone()
        .unwrap_or_else(|| CRITERIA.iter().map(|c| c.0).collect());
    if let Some(bad) = ids
        .iter()
        .find(|&&i| !(1..=CRITERIA.len() as u8).contains(&i))
    {
        return Err(ConfigError::Invalid(format!("no criterion {bad}")).into());
    }
    let mut table = Table::new(&["id", "name", "passed", "detail"]);
    let mut notes = Vec::new();
    let mut success = true;
    for id in ids {
        let r = acceptance::run(id);
        println!("{}", r.line());
        success &= r.passed;
        table.push(vec![
            Cell::Int(r.id as u64),
            Cell::from(r.name.as_str()),
            Cell::from(if r.passed { "true" } else { "false" }),
            Cell::from(r.detail.as_str()),
        ]);
    }
    let passed = table
        .rows
        .iter()
        .filter(|r| r[2] == Cell::from("true"))
        .count();
    notes.push(format!("{passed} of {} criteria passed", table.rows.len()));
    Ok(Outcome {
        table,
        notes,
        success,
    })
}
