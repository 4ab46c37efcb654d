//! Truncation sweeps `N -> inf`, extrapolation, and the closed-form limits
//! they are checked against.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{integrate, integrate_to_infinity, secant_bisect, RootOptions};
use crate::qmath::{scale_factor, EntropicParams};
use crate::solver::{solve_summary, PointSummary, SolveOptions};
use crate::spectra::{Family, Spectrum, UnboundedSpectrum};

/// `N_j = ceil(n0 2^j)` up to `n_max`, with `n_max` itself appended.
pub fn geometric_schedule(n0: u64, n_max: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut n = n0.max(2) as f64;
    while (n.ceil() as u64) < n_max {
        out.push(n.ceil() as u64);
        n *= 2.0;
    }
    out.push(n_max.max(2));
    out.dedup();
    out
}

/// Default largest truncation for sweeps of a family.
pub fn default_n_max(family: &Family) -> u64 {
    match family {
        Family::ParticleBox { .. } => 10_000,
        _ => 100_000,
    }
}

pub const DEFAULT_N0: u64 = 64;
/// Rows used by the automatic rate fit of a sweep.
pub const DEFAULT_TAIL: usize = 10;

/// One truncation of a sweep. Failed rows carry NaN values and a message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: u64,
    pub beta: f64,
    pub delta: f64,
    pub temperature: f64,
    /// Probability of one ground microstate.
    pub p1: f64,
    /// `g_1 p_1`.
    pub ground_mass: f64,
    pub margin: f64,
    pub failure: Option<String>,
}

impl SweepRow {
    pub fn ok(&self) -> bool {
        self.failure.is_none()
    }

    fn failed(n: u64, margin: f64, err: &Error) -> Self {
        SweepRow {
            n,
            beta: f64::NAN,
            delta: f64::NAN,
            temperature: f64::NAN,
            p1: f64::NAN,
            ground_mass: f64::NAN,
            margin,
            failure: Some(err.to_string()),
        }
    }
}

/// Least-squares power law `delta_N ~ prefactor * N^(-exponent)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub rows_used: usize,
}

/// Three-point fit `T_N = limit + a N^(-exponent)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub limit: f64,
    /// `None` when the data did not support a fit and the last value is used.
    pub exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSequence {
    pub family: Family,
    pub u: f64,
    pub params: EntropicParams,
    pub rows: Vec<SweepRow>,
    pub fit: Option<RateFit>,
    pub beta_limit: Option<Extrapolation>,
    pub t_limit: Option<Extrapolation>,
    /// `beta_N` nondecreasing over rows with positive margin.
    pub beta_nondecreasing: bool,
    /// `delta_N` strictly decreasing over rows with positive margin.
    pub delta_decreasing: bool,
}

fn sweep_row(
    family: Family,
    u: f64,
    params: &EntropicParams,
    n: u64,
    opts: &SolveOptions,
) -> SweepRow {
    let spectrum = match Spectrum::from_family(family, n) {
        Ok(s) => s,
        Err(e) => return SweepRow::failed(n, f64::NAN, &e),
    };
    let margin = match spectrum.beta_positivity_margin(u) {
        Ok(m) => m,
        Err(e) => return SweepRow::failed(n, f64::NAN, &e),
    };
    let summary = scale_factor(params, spectrum.e_max(), spectrum.microstates())
        .and_then(|k_s| solve_summary(&spectrum, u, params.q, k_s, opts));
    match summary {
        Ok(s) => {
            let a = s.aggregates;
            SweepRow {
                n,
                beta: a.structural.beta,
                delta: a.structural.delta.unwrap_or(f64::NAN),
                temperature: s.temperature.unwrap_or(f64::INFINITY),
                p1: a.p1,
                ground_mass: a.ground_mass,
                margin,
                failure: None,
            }
        }
        Err(e) => SweepRow::failed(n, margin, &e),
    }
}

/// One solver run per `N`; rows run in parallel and come back sorted by `N`.
pub fn sweep(
    family: Family,
    u: f64,
    params: &EntropicParams,
    schedule: &[u64],
    opts: &SolveOptions,
) -> Result<LimitSequence> {
    params.validate()?;
    if schedule.is_empty() || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(
            "N schedule must be nonempty and increasing".into(),
        ));
    }
    let rows: Vec<SweepRow> = schedule
        .par_iter()
        .map(|&n| sweep_row(family, u, params, n, opts))
        .collect();

    let positive: Vec<&SweepRow> = rows.iter().filter(|r| r.ok() && r.margin > 0.0).collect();
    let slack = 10.0 * opts.tol;
    let beta_nondecreasing = positive
        .windows(2)
        .all(|w| w[1].beta >= w[0].beta - slack * w[0].beta.abs());
    let delta_decreasing = params.q == 1.0
        || positive.windows(2).all(|w| {
            w[1].delta < w[0].delta || (w[1].delta - w[0].delta).abs() <= slack * w[0].delta
        });

    let good: Vec<&SweepRow> = rows.iter().filter(|r| r.ok()).collect();
    let fit = if params.q < 1.0 {
        let pts: Vec<(f64, f64)> = good.iter().map(|r| (r.n as f64, r.delta)).collect();
        fit_power_law(&pts, DEFAULT_TAIL).ok()
    } else {
        None
    };
    let ns: Vec<f64> = good.iter().map(|r| r.n as f64).collect();
    let betas: Vec<f64> = good.iter().map(|r| r.beta).collect();
    let temps: Vec<f64> = good.iter().map(|r| r.temperature).collect();
    Ok(LimitSequence {
        family,
        u,
        params: *params,
        fit,
        beta_limit: extrapolate(&ns, &betas),
        t_limit: extrapolate(&ns, &temps),
        beta_nondecreasing,
        delta_decreasing,
        rows,
    })
}

/// Least squares on `(ln N, ln delta)` over the last `tail_count` points.
pub fn fit_power_law(points: &[(f64, f64)], tail_count: usize) -> Result<RateFit> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(n, d)| n > 0.0 && d > 0.0 && d.is_finite())
        .collect();
    let tail = &usable[usable.len().saturating_sub(tail_count)..];
    if tail.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need 3 points, have {}",
            tail.len()
        )));
    }
    let span = tail[tail.len() - 1].0 / tail[0].0;
    if span < 100.0 {
        return Err(Error::DegenerateFit(format!(
            "tail covers N ratio {span:.1}, less than 2 decades"
        )));
    }
    let m = tail.len() as f64;
    let xs: Vec<f64> = tail.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = tail.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok(RateFit {
        exponent: -slope,
        prefactor: (my - slope * mx).exp(),
        rows_used: tail.len(),
    })
}

/// [`fit_power_law`] on the `delta_N` column of a sweep.
pub fn fit_rate(seq: &LimitSequence, tail_count: usize) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = seq
        .rows
        .iter()
        .filter(|r| r.ok())
        .map(|r| (r.n as f64, r.delta))
        .collect();
    fit_power_law(&pts, tail_count)
}

/// Fits `v_N = L + a N^(-c)` through the last three points.
pub fn extrapolate(ns: &[f64], vals: &[f64]) -> Option<Extrapolation> {
    let k = ns.len();
    if k == 0 {
        return None;
    }
    let last = vals[k - 1];
    let fallback = Some(Extrapolation {
        limit: last,
        exponent: None,
    });
    if k < 3 || !vals[k - 3..].iter().all(|v| v.is_finite()) {
        return fallback;
    }
    let (n1, n2, n3) = (ns[k - 3], ns[k - 2], ns[k - 1]);
    let (v1, v2, v3) = (vals[k - 3], vals[k - 2], vals[k - 1]);
    let d12 = v1 - v2;
    let d23 = v2 - v3;
    if d23 == 0.0 {
        return Some(Extrapolation {
            limit: v3,
            exponent: None,
        });
    }
    let target = d12 / d23;
    // the ratio of successive differences as a function of c
    let ratio = |c: f64| (n1.powf(-c) - n2.powf(-c)) / (n2.powf(-c) - n3.powf(-c));
    let g = |c: f64| Ok(ratio(c) - target);
    let (lo, hi) = (0.05, 12.0);
    let (glo, ghi) = (ratio(lo) - target, ratio(hi) - target);
    if !(target > 0.0) || glo.signum() == ghi.signum() {
        return fallback;
    }
    let c = secant_bisect(
        g,
        lo,
        hi,
        glo,
        ghi,
        RootOptions {
            rel: 1e-12,
            abs: 1e-12,
            max_iter: 200,
        },
    )
    .ok()?
    .x;
    let a = d23 / (n2.powf(-c) - n3.powf(-c));
    Some(Extrapolation {
        limit: v3 - a * n3.powf(-c),
        exponent: Some(c),
    })
}

/// Closed form for the limit of `N^(3(1-q)) delta_N` in the hydrogen
/// family, counting each shell once rather than `2n^2` times.
pub fn lemma_constant(u: f64, q: f64, e_ion: f64) -> Result<f64> {
    check_hydrogen(u, q, e_ion)?;
    let omq = 1.0 - q;
    Ok(3f64.powf(omq) * e_ion / (2f64.powf(omq) * omq * (e_ion - u).powf(omq) * u.powf(1.0 + q)))
}

/// The limit of `N^(3(1-q)) delta_N` with degeneracies `2n^2` carried
/// through: [`lemma_constant`] times `2^(1-q)`.
pub fn delta_rate_constant(u: f64, q: f64, e_ion: f64) -> Result<f64> {
    Ok(lemma_constant(u, q, e_ion)? * 2f64.powf(1.0 - q))
}

fn check_hydrogen(u: f64, q: f64, e_ion: f64) -> Result<()> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("q must lie in (0, 1), got {q}")));
    }
    if !(e_ion > 0.0) {
        return Err(Error::Domain(format!(
            "e_ion must be positive, got {e_ion}"
        )));
    }
    if !(u > 0.0 && u < e_ion) {
        return Err(Error::EnergyOutOfRange { u, e_max: e_ion });
    }
    Ok(())
}

/// Limiting hydrogen distribution: `(g_1 p_1, p_inf) = (1 - U/e_ion, U/e_ion)`.
pub fn two_tier(u: f64, e_ion: f64) -> Result<(f64, f64)> {
    if !(u > 0.0 && u < e_ion) {
        return Err(Error::EnergyOutOfRange { u, e_max: e_ion });
    }
    let p_inf = u / e_ion;
    Ok((1.0 - p_inf, p_inf))
}

/// Uniform grid used for the continuum temperature: wide enough that the
/// cut at `e_max` is invisible, fine enough that the spacing extrapolates away.
pub const CONTINUUM_EMAX: f64 = 1e6;

pub fn continuum_schedule() -> Vec<u64> {
    (26..=32).map(|j| 1u64 << j).collect()
}

/// `(U, extrapolated T)` points for the continuum specific heat.
pub fn continuum_ut(q: f64, us: &[f64]) -> Result<Vec<(f64, f64)>> {
    let family = Family::Uniform {
        e_max: CONTINUUM_EMAX,
        m: 1,
    };
    let params = EntropicParams::unit(q)?;
    let schedule = continuum_schedule();
    us.iter()
        .map(|&u| {
            let seq = sweep(family, u, &params, &schedule, &SolveOptions::default())?;
            let t = seq.t_limit.map(|x| x.limit).unwrap_or(f64::NAN);
            Ok((u, t))
        })
        .collect()
}

/// `k_s` of the full oscillator (`sigma = 1`) or box (`sigma = 2`) spectrum.
pub fn limiting_scale_factor(family: &Family, q: f64, k: f64) -> Result<f64> {
    let unit = match *family {
        Family::Oscillator { hbar_omega } => hbar_omega,
        Family::ParticleBox { gamma } => gamma,
        _ => {
            return Err(Error::Domain(format!(
                "{} has no N-independent scale factor",
                family.name()
            )))
        }
    };
    Ok(k.powf(q) * unit.powf(1.0 - q))
}

/// Solves the untruncated oscillator or box problem directly.
pub fn limit_solve(
    family: Family,
    u: f64,
    q: f64,
    k: f64,
    opts: &SolveOptions,
) -> Result<PointSummary> {
    let src = UnboundedSpectrum::new(family)?;
    let k_s = limiting_scale_factor(&family, q, k)?;
    solve_summary(&src, u, q, k_s, opts)
}

/// `(1/k) (p_1^(1-q) (1 - (1-q) beta U) / (q beta unit^(1-q)))^(1/q)`, the
/// temperature of the full oscillator (`unit = hbar_omega`) or box
/// (`unit = gamma`) in terms of its structural parameter and ground probability.
pub fn spectrum_limit_temperature(beta: f64, p1: f64, u: f64, q: f64, k: f64, unit: f64) -> f64 {
    if q == 1.0 {
        return 1.0 / (k * beta);
    }
    let inner = p1.powf(1.0 - q) * (1.0 - (1.0 - q) * beta * u) / (q * beta * unit.powf(1.0 - q));
    inner.powf(1.0 / q) / k
}

/// Classical oscillator: `beta = ln((hbar_omega + U)/U) / hbar_omega`.
pub fn oscillator_classical_beta(u: f64, hbar_omega: f64) -> f64 {
    ((hbar_omega + u) / u).ln() / hbar_omega
}

/// Sampled continuous density at fixed temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub q: f64,
    pub temperature: f64,
    pub k: f64,
    /// `(e, rho)` pairs.
    pub samples: Vec<(f64, f64)>,
}

/// `rho(e, T) = (1/kT) (1 + (1-q) e / (q k T))^(-1/(1-q))`; `exp(-e/kT)/kT` at `q = 1`.
pub fn density(e: f64, t: f64, q: f64, k: f64) -> f64 {
    let kt = k * t;
    if q == 1.0 {
        return (-e / kt).exp() / kt;
    }
    ((-1.0 / (1.0 - q)) * ((1.0 - q) * e / (q * kt)).ln_1p()).exp() / kt
}

fn check_density(t: f64, q: f64, k: f64) -> Result<()> {
    if !(0.5..=1.0).contains(&q) {
        return Err(Error::Domain(format!(
            "density needs q in [1/2, 1], got {q}"
        )));
    }
    if !(t > 0.0 && k > 0.0) {
        return Err(Error::Domain("temperature and k must be positive".into()));
    }
    Ok(())
}

/// Temperature of the continuum with internal energy `U`: `(2q-1) U / (q k)`.
pub fn continuum_temperature(u: f64, q: f64, k: f64) -> Result<f64> {
    if !(q > 0.5 && q <= 1.0) {
        return Err(Error::Domain(format!(
            "the continuum needs q in (1/2, 1], got {q}"
        )));
    }
    Ok((2.0 * q - 1.0) * u / (q * k))
}

pub fn density_curve(t: f64, q: f64, k: f64, e_grid: &[f64]) -> Result<DensityCurve> {
    check_density(t, q, k)?;
    Ok(DensityCurve {
        q,
        temperature: t,
        k,
        samples: e_grid.iter().map(|&e| (e, density(e, t, q, k))).collect(),
    })
}

/// `(mass, mean)` of the density over `[0, upper]` (`None` for `[0, inf)`), by quadrature.
pub fn density_moments(t: f64, q: f64, k: f64, upper: Option<f64>) -> Result<(f64, f64)> {
    check_density(t, q, k)?;
    if upper.is_none() && q <= 0.5 {
        return Err(Error::Divergent("the mean diverges at q = 1/2".into()));
    }
    let f = |e: f64| {
        let r = density(e, t, q, k);
        [r, e * r]
    };
    let r = match upper {
        Some(x) => integrate(f, 0.0, x, 1e-13, 0.0, 4000),
        None => integrate_to_infinity(f, 0.0, 1e-13, 0.0, 4000),
    };
    Ok((r.value[0], r.value[1]))
}

/// Continuum integrals of the energy balance at a trial `beta`, and their
/// discrete counterparts on the uniform grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiemannCheck {
    pub beta: f64,
    /// For `q < 1`: the integrals of `base^(1/(q-1))` and `base^(q/(q-1))`
    /// with `base = 1 + (1-q) beta (e - U)`. For `q = 1`: the integral of
    /// `exp(-beta (e - U)) (e - U)` and zero.
    pub integrals: (f64, f64),
    /// The same integrands summed on `N` grid points times `e_max/(N-1)`;
    /// `None` when `e_max` is infinite.
    pub sums: Option<(f64, f64)>,
}

impl RiemannCheck {
    pub fn residual(&self) -> f64 {
        self.integrals.0 - self.integrals.1
    }
}

/// Evaluates the continuum energy balance at `beta` (default `1/(qU)`).
pub fn riemann_check(
    u: f64,
    q: f64,
    e_max: f64,
    n: u64,
    beta: Option<f64>,
) -> Result<RiemannCheck> {
    crate::qmath::check_q(q)?;
    if q <= 0.5 {
        return Err(Error::Domain(format!(
            "the continuum balance needs q > 1/2, got {q}"
        )));
    }
    if !(u > 0.0 && e_max > u) {
        return Err(Error::EnergyOutOfRange { u, e_max });
    }
    let beta = beta.unwrap_or(1.0 / (q * u));
    let f = move |e: f64| -> [f64; 2] {
        if q == 1.0 {
            [(-beta * (e - u)).exp() * (e - u), 0.0]
        } else {
            let base = 1.0 + (1.0 - q) * beta * (e - u);
            if base <= 0.0 {
                return [0.0, 0.0];
            }
            [base.powf(1.0 / (q - 1.0)), base.powf(q / (q - 1.0))]
        }
    };
    let r = if e_max.is_finite() {
        integrate(f, 0.0, e_max, 1e-14, 1e-300, 4000)
    } else {
        // split at U where the classical integrand changes sign
        let a = integrate(f, 0.0, u, 1e-14, 1e-300, 4000);
        let b = integrate_to_infinity(f, u, 1e-14, 1e-300, 4000);
        crate::numeric::Integral {
            value: [a.value[0] + b.value[0], a.value[1] + b.value[1]],
            error: [a.error[0] + b.error[0], a.error[1] + b.error[1]],
            converged: a.converged && b.converged,
        }
    };
    let sums = if e_max.is_finite() {
        if n < 2 {
            return Err(Error::InvalidSpectrum("need N >= 2".into()));
        }
        let spectrum = Spectrum::uniform_grid(n, e_max, 1)?;
        let h = e_max / (n - 1) as f64;
        let s = crate::spectra::LevelSource::sum(&spectrum, |e, _g| f(e))?;
        Some((h * s[0], h * s[1]))
    } else {
        None
    };
    Ok(RiemannCheck {
        beta,
        integrals: (r.value[0], r.value[1]),
        sums,
    })
}
