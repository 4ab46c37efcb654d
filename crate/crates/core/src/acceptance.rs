//! The acceptance checks, each returning a one-line verdict with numbers.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hydrogen_saha::{constants, saha_sweep, t_ion};
use crate::limits::{
    continuum_ut, default_n_max, delta_rate_constant, geometric_schedule, lemma_constant,
    oscillator_classical_beta, sweep, LimitSequence, DEFAULT_N0,
};
use crate::numeric::KahanSum;
use crate::oracle::brute_force;
use crate::qmath::{scale_factor, EntropicParams};
use crate::solver::{
    aggregates, entropy, multipliers, residual_scaled, solve, solve_beta, SolveOptions, Structural,
};
use crate::spectra::{Family, Level, Spectrum};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} [{}] {} ({:.2} s): {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.seconds,
            self.detail
        )
    }
}

pub const CRITERIA: [(u8, &str); 11] = [
    (1, "continuum beta on the uniform grid"),
    (2, "classical limit on the uniform grid"),
    (3, "constant specific heat of the continuum"),
    (4, "classical oscillator closed form"),
    (5, "endpoint regime of oscillator and box"),
    (6, "hydrogen gap rate and constant"),
    (7, "hydrogen two-tier ground mass"),
    (8, "hydrogen temperature in physical units"),
    (9, "solver against brute force"),
    (10, "randomized invariants"),
    (11, "Saha ionization range"),
];

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn finish(id: u8, start: Instant, outcome: Result<(bool, String)>) -> CriterionReport {
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionReport {
        id,
        name: CRITERIA[id as usize - 1].1.to_string(),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs one criterion by number (1 to 11).
pub fn run(id: u8) -> CriterionReport {
    let start = Instant::now();
    let outcome = match id {
        1 => continuum_beta(),
        2 => classical_grid(),
        3 => specific_heat(),
        4 => oscillator_classical(),
        5 => endpoint_regime(),
        6 => hydrogen_rate(),
        7 => two_tier_mass(),
        8 => hydrogen_physical(),
        9 => oracle_equivalence(),
        10 => {
            property_suite(PROPERTY_SEED, PROPERTY_INSTANCES).map(|r| (r.all_passed(), r.summary()))
        }
        11 => saha_range(),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    finish(id, start, outcome)
}

pub fn run_all() -> Vec<CriterionReport> {
    CRITERIA.iter().map(|&(id, _)| run(id)).collect()
}

fn grid_6001() -> Result<Spectrum> {
    Spectrum::uniform_grid(6001, 30.0, 1)
}

fn continuum_beta() -> Result<(bool, String)> {
    let spectrum = grid_6001()?;
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for q in [0.6, 0.75, 0.9] {
        let beta = solve_beta(&spectrum, 1.0, q, &SolveOptions::default())?.beta;
        let target = 1.0 / q;
        let err = rel(beta, target);
        ok &= err <= 0.02;
        parts.push(format!(
            "q={q}: beta={beta:.6} target={target:.6} rel={err:.2e}"
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 5.0;
    Ok((ok, format!("{}; {secs:.2} s", parts.join("; "))))
}

fn classical_grid() -> Result<(bool, String)> {
    let spectrum = grid_6001()?;
    let start = Instant::now();
    let sol = solve(
        &spectrum,
        1.0,
        &EntropicParams::unit(1.0)?,
        &SolveOptions::default(),
    )?;
    let t = sol.temperature.unwrap_or(f64::INFINITY);
    let secs = start.elapsed().as_secs_f64();
    let (eb, et) = (rel(sol.beta, 1.0), rel(t, 1.0));
    Ok((
        eb <= 0.02 && et <= 0.02 && secs < 5.0,
        format!(
            "beta={:.6} rel={eb:.2e}; T={t:.6} rel={et:.2e}; {secs:.2} s",
            sol.beta
        ),
    ))
}

/// Least-squares slope of `y` on `x`.
fn slope(points: &[(f64, f64)]) -> f64 {
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

fn specific_heat() -> Result<(bool, String)> {
    let us = [0.5, 1.0, 1.5, 2.0];
    let mut ok = true;
    let mut parts = Vec::new();
    for q in [0.6, 0.8, 0.95] {
        let ut = continuum_ut(q, &us)?;
        let tu: Vec<(f64, f64)> = ut.iter().map(|&(u, t)| (t, u)).collect();
        let c = slope(&tu);
        let target = q / (2.0 * q - 1.0);
        let err = rel(c, target);
        ok &= err <= 0.02;
        parts.push(format!(
            "q={q}: dU/dT={c:.6} target={target:.6} rel={err:.2e}"
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn oscillator_classical() -> Result<(bool, String)> {
    let start = Instant::now();
    let family = Family::Oscillator { hbar_omega: 1.0 };
    let schedule = geometric_schedule(DEFAULT_N0, default_n_max(&family));
    let params = EntropicParams::unit(1.0)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for u in [0.5, 1.5, 3.0] {
        let seq = sweep(family, u, &params, &schedule, &SolveOptions::default())?;
        let beta = seq.beta_limit.map(|x| x.limit).unwrap_or(f64::NAN);
        let target = oscillator_classical_beta(u, 1.0);
        let err = rel(beta, target);
        ok &= err <= 1e-4;
        parts.push(format!(
            "U={u}: beta={beta:.10} target={target:.10} rel={err:.1e}"
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 10.0;
    Ok((ok, format!("{}; {secs:.2} s", parts.join("; "))))
}

/// Largest truncations for the endpoint-regime sweeps.
pub const OSCILLATOR_ENDPOINT_N: u64 = 1 << 32;
pub const BOX_ENDPOINT_N: u64 = 1 << 45;

fn endpoint_case(family: Family, q: f64, u: f64, n_max: u64) -> Result<(bool, String)> {
    let params = EntropicParams::new(q, 1.0, family.natural_sigma())?;
    let seq = sweep(
        family,
        u,
        &params,
        &geometric_schedule(DEFAULT_N0, n_max),
        &SolveOptions::default(),
    )?;
    let last = seq.rows.last().expect("nonempty schedule");
    let c = crate::solver::endpoint(q, u);
    let all_ok = seq.rows.iter().all(|r| r.ok());
    let gap = (c - last.beta) / c;
    let first_delta = seq.rows[0].delta;
    let ok = all_ok && seq.delta_decreasing && last.delta < first_delta && gap.abs() <= 0.01;
    Ok((
        ok,
        format!(
            "{} q={q} U={u}: N={} beta/c=1-{gap:.2e}, delta {first_delta:.3e} -> {:.3e}, decreasing={}",
            family.name(),
            last.n,
            last.delta,
            seq.delta_decreasing
        ),
    ))
}

fn endpoint_regime() -> Result<(bool, String)> {
    let (a, da) = endpoint_case(
        Family::Oscillator { hbar_omega: 1.0 },
        0.4,
        1.5,
        OSCILLATOR_ENDPOINT_N,
    )?;
    let (b, db) = endpoint_case(Family::ParticleBox { gamma: 1.0 }, 0.3, 2.0, BOX_ENDPOINT_N)?;
    Ok((a && b, format!("{da}; {db}")))
}

pub fn hydrogen_sweep(q: f64, u: f64, e_ion: f64, k: f64) -> Result<LimitSequence> {
    let family = Family::Hydrogen { e_ion };
    let params = EntropicParams::new(q, k, 1.0)?;
    sweep(
        family,
        u,
        &params,
        &geometric_schedule(DEFAULT_N0, default_n_max(&family)),
        &SolveOptions::default(),
    )
}

fn hydrogen_rate() -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for q in [0.4, 0.5, 0.7] {
        let start = Instant::now();
        let seq = hydrogen_sweep(q, 0.5, 1.0, 1.0)?;
        let secs = start.elapsed().as_secs_f64();
        let rate = 3.0 * (1.0 - q);
        let exponent = seq.fit.map(|f| f.exponent).unwrap_or(f64::NAN);
        let last = seq.rows.last().expect("nonempty schedule");
        let scaled = (last.n as f64).powf(rate) * last.delta;
        let printed = lemma_constant(0.5, q, 1.0)?;
        let carried = delta_rate_constant(0.5, q, 1.0)?;
        let pass = (exponent - rate).abs() <= 0.05 && rel(scaled, printed) <= 0.05 && secs < 60.0;
        ok &= pass;
        parts.push(format!(
            "q={q}: exponent={exponent:.4} (want {rate:.2}), N^r delta={scaled:.5} vs constant {printed:.5} \
             (ratio {:.4}; with 2n^2 carried {carried:.5}, ratio {:.4}), {secs:.1} s",
            scaled / printed,
            scaled / carried
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn two_tier_mass() -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for q in [0.3, 0.5, 0.7] {
        let seq = hydrogen_sweep(q, 0.5, 1.0, 1.0)?;
        let last = seq.rows.last().expect("nonempty schedule");
        let err = (last.ground_mass - 0.5).abs();
        ok &= err <= 1e-3;
        parts.push(format!(
            "q={q}: g1p1={:.6} at N={} err={err:.1e}",
            last.ground_mass, last.n
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn hydrogen_physical() -> Result<(bool, String)> {
    let (e_ion, k) = (constants::E_ION_EV, constants::K_B_EV);
    let u = 0.5 * e_ion;
    let seq = hydrogen_sweep(0.5, u, e_ion, k)?;
    let t = seq.t_limit.map(|x| x.limit).unwrap_or(f64::NAN);
    let et = rel(t, u / k);
    let ti = t_ion(0.5, e_ion, k)?;
    let ei = rel(ti, e_ion / k);
    let ep = rel(ti, 1.578e5);
    Ok((
        et <= 0.02 && ei <= 0.01 && ep <= 0.01,
        format!("T_limit={t:.1} K vs U/k={:.1} K (rel {et:.2e}); T_ion={ti:.1} K (rel to 1.578e5: {ep:.2e})", u / k),
    ))
}

fn oracle_equivalence() -> Result<(bool, String)> {
    let spectrum = Spectrum::from_levels(vec![
        Level {
            energy: 0.0,
            degeneracy: 1,
        },
        Level {
            energy: 0.5,
            degeneracy: 1,
        },
        Level {
            energy: 1.0,
            degeneracy: 1,
        },
    ])?;
    let cases: Vec<(f64, f64)> = (0..10)
        .flat_map(|i| (0..10).map(move |j| (0.05 + 0.1 * i as f64, 0.1 * (j + 1) as f64)))
        .collect();
    let results: Vec<Result<(f64, f64)>> = cases
        .par_iter()
        .map(|&(u, q)| {
            let params = EntropicParams::unit(q)?;
            let sol = solve(&spectrum, u, &params, &SolveOptions::default())?;
            let brute = brute_force(&spectrum, u, q, sol.k_s)?;
            let dp = sol
                .p
                .iter()
                .zip(&brute.p)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            Ok((dp, (sol.entropy - brute.entropy).abs()))
        })
        .collect();
    let (mut dp, mut ds) = (0.0f64, 0.0f64);
    for r in results {
        let (a, b) = r?;
        dp = dp.max(a);
        ds = ds.max(b);
    }
    Ok((
        dp <= 1e-6 && ds <= 1e-9,
        format!(
            "{} cases: max |dp|={dp:.2e}, max |dS|={ds:.2e}",
            cases.len()
        ),
    ))
}

fn saha_range() -> Result<(bool, String)> {
    let rows = saha_sweep(1e13, 1e27, 57, 0.999)?;
    let (lo, hi) = (rows[0].temperature, rows[rows.len() - 1].temperature);
    let ok = rel(lo, 6.2e3) <= 0.1 && rel(hi, 6.5e5) <= 0.1;
    Ok((
        ok,
        format!(
            "T from {lo:.4e} K to {hi:.4e} K, sign convention {:?}",
            rows[0].sign
        ),
    ))
}

pub const PROPERTY_SEED: u64 = 0x5eed_0001;
pub const PROPERTY_INSTANCES: usize = 1000;

/// Failure counts of the randomized invariant checks.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub instances: usize,
    pub constraints: usize,
    pub residual_monotone: usize,
    pub beta_monotone: usize,
    /// Instances where the nested-truncation check applies.
    pub beta_monotone_checked: usize,
    pub scale_independence: usize,
    pub envelope: usize,
    pub errors: usize,
    pub first_failure: Option<String>,
}

impl PropertyReport {
    pub fn all_passed(&self) -> bool {
        self.constraints
            + self.residual_monotone
            + self.beta_monotone
            + self.scale_independence
            + self.envelope
            + self.errors
            == 0
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} instances; failures: constraints {}, residual monotonicity {}, beta_N monotonicity {} (of {}), \
             k_s independence {}, envelope {}, errors {}",
            self.instances,
            self.constraints,
            self.residual_monotone,
            self.beta_monotone,
            self.beta_monotone_checked,
            self.scale_independence,
            self.envelope,
            self.errors
        );
        if let Some(f) = &self.first_failure {
            s.push_str(&format!("; first: {f}"));
        }
        s
    }
}

#[derive(Debug, Clone)]
struct Instance {
    spectrum: Spectrum,
    family: Option<Family>,
    u: f64,
    q: f64,
}

fn random_instance(rng: &mut ChaCha8Rng) -> Result<Instance> {
    let q = if rng.random_bool(0.2) {
        1.0
    } else {
        rng.random_range(0.05..1.0)
    };
    let kind = rng.random_range(0..5u8);
    let (spectrum, family) = if kind == 0 {
        let n = rng.random_range(2..40usize);
        let mut e = 0.0;
        let mut levels = Vec::with_capacity(n);
        for i in 0..n {
            if i > 0 {
                e += rng.random_range(0.01..2.0);
            }
            levels.push(Level {
                energy: e,
                degeneracy: rng.random_range(1..6),
            });
        }
        (Spectrum::from_levels(levels)?, None)
    } else {
        let family = match kind {
            1 => Family::Uniform {
                e_max: rng.random_range(1.0..50.0),
                m: rng.random_range(1..4),
            },
            2 => Family::Oscillator {
                hbar_omega: rng.random_range(0.1..3.0),
            },
            3 => Family::ParticleBox {
                gamma: rng.random_range(0.1..3.0),
            },
            _ => Family::Hydrogen {
                e_ion: rng.random_range(1.0..20.0),
            },
        };
        let n = rng.random_range(2..300u64);
        (Spectrum::from_family(family, n)?, Some(family))
    };
    let u = spectrum.e_max() * rng.random_range(0.02..0.98);
    Ok(Instance {
        spectrum,
        family,
        u,
        q,
    })
}

#[derive(Debug, Default)]
struct InstanceOutcome {
    constraints: bool,
    residual_monotone: bool,
    beta_monotone: Option<bool>,
    scale_independence: bool,
    envelope: bool,
    note: String,
}

/// `a < b` for values `r exp(ln_scale)`.
fn scaled_less(a: (f64, f64), b: (f64, f64)) -> bool {
    let key = |(r, l): (f64, f64)| (r.signum(), r.abs().ln() + l);
    let ((sa, la), (sb, lb)) = (key(a), key(b));
    match (sa > 0.0, sb > 0.0) {
        (true, true) => la < lb,
        (false, false) => la > lb,
        (a_pos, _) => !a_pos,
    }
}

fn check_instance(inst: &Instance) -> Result<InstanceOutcome> {
    let opts = SolveOptions::default();
    let Instance { spectrum, u, q, .. } = inst;
    let (u, q) = (*u, *q);
    let e_max = spectrum.e_max();
    let levels = spectrum.levels()?;
    let mut out = InstanceOutcome::default();

    let base = EntropicParams::new(q, 1.0, 1.0)?;
    let sol = solve(spectrum, u, &base, &opts)?;
    let mut norm = KahanSum::new();
    let mut mean = KahanSum::new();
    for (l, p) in levels.iter().zip(&sol.p) {
        norm.add(l.degeneracy as f64 * p);
        mean.add(l.degeneracy as f64 * p * l.energy);
    }
    let (rn, ru) = ((norm.value() - 1.0).abs(), (mean.value() - u).abs());
    out.constraints = rn <= 1e-10 && ru <= 1e-9 * e_max;
    if !out.constraints {
        out.note = format!("norm residual {rn:.2e}, energy residual {ru:.2e}");
    }

    let (lo, hi) = if q == 1.0 {
        let s = u.max(e_max - u);
        (-30.0 / s, 30.0 / s)
    } else {
        (
            -1.0 / ((1.0 - q) * (e_max - u)),
            crate::solver::endpoint(q, u),
        )
    };
    let mut prev: Option<(f64, f64)> = None;
    out.residual_monotone = true;
    for i in 0..100 {
        let beta = lo + (hi - lo) * (i as f64 + 0.5) / 100.0;
        let r = residual_scaled(spectrum, u, q, beta)?;
        if prev.is_some_and(|p| !scaled_less(r, p)) {
            out.residual_monotone = false;
            out.note = format!("residual not decreasing at beta={beta}");
            break;
        }
        prev = Some(r);
    }

    if let Some(family) = inst.family.filter(|f| !matches!(f, Family::Uniform { .. })) {
        let n = spectrum.len();
        let mut betas = Vec::new();
        for m in [n, 2 * n, 4 * n] {
            let s = Spectrum::from_family(family, m)?;
            if s.beta_positivity_margin(u)? > 0.0 {
                betas.push(solve_beta(&s, u, q, &opts)?.beta);
            }
        }
        if betas.len() >= 2 {
            let ok = betas
                .windows(2)
                .all(|w| w[1] >= w[0] - 10.0 * opts.tol * w[0].abs());
            if !ok {
                out.note = format!("beta_N not monotone: {betas:?}");
            }
            out.beta_monotone = Some(ok);
        }
    }

    let other = EntropicParams::new(q, 3.7, 2.0)?;
    let sol2 = solve(spectrum, u, &other, &opts)?;
    out.scale_independence = sol.beta.to_bits() == sol2.beta.to_bits()
        && sol
            .p
            .iter()
            .zip(&sol2.p)
            .all(|(a, b)| a.to_bits() == b.to_bits());
    if !out.scale_independence {
        out.note = "beta or p changed with k_s".into();
    }

    let k_s = scale_factor(&base, e_max, spectrum.microstates())?;
    let value = |uu: f64| -> Result<f64> {
        let s: Structural = solve_beta(spectrum, uu, q, &opts)?;
        Ok(entropy(&aggregates(spectrum, &s)?, k_s))
    };
    let h = 1e-3 * u.min(e_max - u);
    let fd = (value(u + h)? - value(u - h)?) / (2.0 * h);
    let agg = aggregates(spectrum, &solve_beta(spectrum, u, q, &opts)?)?;
    let (_, lambda2) = multipliers(&agg, k_s);
    // lambda2 vanishes at beta = 0; measure against its size at beta = 1/e_scale
    let floor = if q == 1.0 {
        k_s / e_max
    } else {
        k_s * q * ((1.0 - q) * agg.ln_z).exp() / e_max
    };
    out.envelope = (fd - lambda2).abs() <= 1e-4 * lambda2.abs().max(floor);
    if !out.envelope {
        out.note = format!("dS/dU={fd:.10e} vs lambda2={lambda2:.10e}");
    }
    Ok(out)
}

/// Randomized invariant checks over `count` instances drawn from `seed`.
pub fn property_suite(seed: u64, count: usize) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let instances: Vec<Instance> = (0..count)
        .map(|_| random_instance(&mut rng))
        .collect::<Result<_>>()?;
    let outcomes: Vec<(usize, Result<InstanceOutcome>)> = instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| (i, check_instance(inst)))
        .collect();
    let mut rep = PropertyReport {
        instances: count,
        ..Default::default()
    };
    for (i, o) in outcomes {
        let inst = &instances[i];
        let label = format!(
            "#{i} {} U={:.6} q={:.4}",
            inst.spectrum.label(),
            inst.u,
            inst.q
        );
        match o {
            Err(e) => {
                rep.errors += 1;
                rep.first_failure.get_or_insert(format!("{label}: {e}"));
            }
            Ok(o) => {
                let failed = [
                    (!o.constraints, &mut rep.constraints),
                    (!o.residual_monotone, &mut rep.residual_monotone),
                    (o.beta_monotone == Some(false), &mut rep.beta_monotone),
                    (!o.scale_independence, &mut rep.scale_independence),
                    (!o.envelope, &mut rep.envelope),
                ];
                let mut any = false;
                for (bad, count) in failed {
                    if bad {
                        *count += 1;
                        any = true;
                    }
                }
                if o.beta_monotone.is_some() {
                    rep.beta_monotone_checked += 1;
                }
                if any {
                    rep.first_failure
                        .get_or_insert(format!("{label}: {}", o.note));
                }
            }
        }
    }
    Ok(rep)
}
