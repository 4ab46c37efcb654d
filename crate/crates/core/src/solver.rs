//! Structural parameter, optimal distribution, multipliers and temperature
//! of one truncated maximization problem.
//!
//! Weights `w_n = exp_{2-q}(-beta E_n)` with `E_n = e_n - U` are never
//! formed directly. They are anchored at the heaviest level so the sums
//! stay finite, and near the singular end of the domain the solver works
//! in `delta = 1/((1-q)U) - beta` on a log scale.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{secant_bisect, RootOptions};
use crate::qmath::{scale_factor, EntropicParams};
use crate::spectra::{LevelSource, Spectrum, MATERIALIZE_LIMIT};

/// Root-finding controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Relative tolerance on `beta` (on `delta` near the endpoint).
    pub tol: f64,
    pub max_iter: u32,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-12,
            max_iter: 200,
        }
    }
}

/// The structural parameter of a problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Structural {
    pub q: f64,
    pub u: f64,
    pub beta: f64,
    /// `1/((1-q)U) - beta`, carried separately for precision; `None` at `q = 1`.
    pub delta: Option<f64>,
    pub iterations: u32,
    /// True when the root was found in the `delta` variable.
    pub reparameterized: bool,
}

impl Structural {
    /// Wraps a given `beta`.
    pub fn from_beta(q: f64, u: f64, beta: f64) -> Self {
        let delta = (q < 1.0).then(|| endpoint(q, u) - beta);
        Structural {
            q,
            u,
            beta,
            delta,
            iterations: 0,
            reparameterized: false,
        }
    }

    fn from_delta(q: f64, u: f64, delta: f64) -> Self {
        Structural {
            q,
            u,
            beta: endpoint(q, u) - delta,
            delta: Some(delta),
            iterations: 0,
            reparameterized: true,
        }
    }
}

/// `1/((1-q)U)`, the upper end of the admissible `beta` range.
pub fn endpoint(q: f64, u: f64) -> f64 {
    1.0 / ((1.0 - q) * u)
}

#[derive(Debug, Clone, Copy)]
enum Kernel {
    /// `(1 + ratio e)^(-a)`
    Bottom { a: f64, ratio: f64 },
    /// `(1 + slope (e - top))^(-a)`
    Top { a: f64, slope: f64, top: f64 },
    /// `exp(-beta (e - shift))`
    Exp { beta: f64, shift: f64 },
}

impl Kernel {
    #[inline]
    fn ln_weight(&self, e: f64) -> f64 {
        match *self {
            Kernel::Bottom { a, ratio } => -a * (ratio * e).ln_1p(),
            Kernel::Top { a, slope, top } => -a * (slope * (e - top)).ln_1p(),
            Kernel::Exp { beta, shift } => -beta * (e - shift),
        }
    }
}

/// Anchored weights: `w_n = exp(ln_scale) * kernel(e_n)`.
#[derive(Debug, Clone, Copy)]
struct Weights {
    kernel: Kernel,
    ln_scale: f64,
}

fn weights<S: LevelSource>(src: &S, s: &Structural) -> Result<Weights> {
    let (q, u, beta) = (s.q, s.u, s.beta);
    if q == 1.0 {
        if beta >= 0.0 {
            return Ok(Weights {
                kernel: Kernel::Exp { beta, shift: 0.0 },
                ln_scale: beta * u,
            });
        }
        let top = src
            .e_top()
            .ok_or_else(|| Error::Divergent("negative beta on an unbounded spectrum".into()))?;
        return Ok(Weights {
            kernel: Kernel::Exp { beta, shift: top },
            ln_scale: -beta * (top - u),
        });
    }
    let a = 1.0 / (1.0 - q);
    let delta = s.delta.unwrap_or_else(|| endpoint(q, u) - beta);
    if !(delta > 0.0) {
        return Err(Error::Domain(format!(
            "beta = {beta} is not below 1/((1-q)U) = {}",
            endpoint(q, u)
        )));
    }
    if beta >= 0.0 {
        let base = (1.0 - q) * u * delta;
        return Ok(Weights {
            kernel: Kernel::Bottom {
                a,
                ratio: beta / (u * delta),
            },
            ln_scale: -a * base.ln(),
        });
    }
    let top = src
        .e_top()
        .ok_or_else(|| Error::Divergent("negative beta on an unbounded spectrum".into()))?;
    let base_top = 1.0 + (1.0 - q) * beta * (top - u);
    if !(base_top > 0.0) {
        return Err(Error::Domain(format!(
            "beta = {beta} is not above -1/((1-q)(e_max - U)) = {}",
            -1.0 / ((1.0 - q) * (top - u))
        )));
    }
    Ok(Weights {
        kernel: Kernel::Top {
            a,
            slope: (1.0 - q) * beta / base_top,
            top,
        },
        ln_scale: -a * base_top.ln(),
    })
}

/// `[sum g w~, sum g w~ E]` with anchored weights.
fn moment_sums<S: LevelSource>(src: &S, s: &Structural) -> Result<(Weights, [f64; 2])> {
    let w = weights(src, s)?;
    let u = s.u;
    let kernel = w.kernel;
    let sums = src.sum(move |e, g| {
        let wt = kernel.ln_weight(e).exp();
        if wt == 0.0 {
            return [0.0, 0.0];
        }
        let gw = g * wt;
        [gw, gw * (e - u)]
    })?;
    Ok((w, sums))
}

/// Mean energy mismatch `<e>_p - U`: same sign as the residual, bounded.
fn mismatch<S: LevelSource>(src: &S, s: &Structural) -> Result<f64> {
    let (_, [z, r]) = moment_sums(src, s)?;
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Accuracy(format!("weight sum is {z}")));
    }
    Ok(r / z)
}

fn check_problem<S: LevelSource>(src: &S, u: f64, q: f64) -> Result<()> {
    crate::qmath::check_q(q)?;
    match src.e_top() {
        Some(top) if !(u > 0.0 && u < top) => Err(Error::EnergyOutOfRange { u, e_max: top }),
        None if !(u > 0.0 && u.is_finite()) => Err(Error::EnergyOutOfRange {
            u,
            e_max: f64::INFINITY,
        }),
        _ => Ok(()),
    }
}

/// The degeneracy-weighted residual `sum_n g_n w_n E_n`, strictly
/// decreasing in `beta` and zero at the structural parameter.
/// Overflows to infinity near the ends of the `beta` range for `q` close
/// to 1; [`residual_scaled`] does not.
pub fn residual<S: LevelSource>(src: &S, u: f64, q: f64, beta: f64) -> Result<f64> {
    let (r, ln_scale) = residual_scaled(src, u, q, beta)?;
    Ok(ln_scale.exp() * r)
}

/// The residual as `(r, ln_scale)` with value `r exp(ln_scale)`.
pub fn residual_scaled<S: LevelSource>(src: &S, u: f64, q: f64, beta: f64) -> Result<(f64, f64)> {
    check_problem(src, u, q)?;
    let (w, [_, r]) = moment_sums(src, &Structural::from_beta(q, u, beta))?;
    Ok((r, w.ln_scale))
}

/// Solves for the structural parameter.
pub fn solve_beta<S: LevelSource>(
    src: &S,
    u: f64,
    q: f64,
    opts: &SolveOptions,
) -> Result<Structural> {
    check_problem(src, u, q)?;
    if !(opts.tol > 0.0) {
        return Err(Error::Domain(format!(
            "tol must be positive, got {}",
            opts.tol
        )));
    }
    let e_scale = match src.e_top() {
        Some(top) => u.max(top - u),
        None => u,
    };
    let beta_opts = RootOptions {
        rel: opts.tol,
        abs: opts.tol / e_scale,
        max_iter: opts.max_iter,
    };
    let at_beta = |beta: f64| mismatch(src, &Structural::from_beta(q, u, beta));
    // unbounded spectra have an infinite mean at beta = 0, so the lower
    // bracket end is moved to a small positive beta with a positive mismatch
    let (b0, m0) = if src.level_count().is_none() {
        let mut b = if q == 1.0 {
            1.0 / e_scale
        } else {
            1e-3 * endpoint(q, u)
        };
        let mut m = at_beta(b)?;
        let mut tries = 0;
        while m <= 0.0 {
            tries += 1;
            if tries > 60 {
                return Err(Error::BracketFailure(
                    "no positive mismatch near beta = 0".into(),
                ));
            }
            b *= 0.1;
            m = at_beta(b)?;
        }
        (b, m)
    } else {
        (0.0, at_beta(0.0)?)
    };
    if m0 == 0.0 {
        return Ok(Structural::from_beta(q, u, b0));
    }
    let finish = |root: crate::numeric::Root, mut s: Structural| {
        s.iterations = root.iterations;
        s
    };

    if q == 1.0 {
        // expand a bracket by doubling
        let dir = if m0 > 0.0 { 1.0 } else { -1.0 };
        let mut b = dir / e_scale;
        if dir > 0.0 && b <= b0 {
            b = 2.0 * b0;
        }
        let mut fb = at_beta(b)?;
        let mut expansions = 0;
        while fb.signum() == m0.signum() {
            expansions += 1;
            if expansions > 2000 {
                return Err(Error::BracketFailure(
                    "no sign change found for q = 1".into(),
                ));
            }
            b *= 2.0;
            fb = at_beta(b)?;
        }
        let root = secant_bisect(at_beta, b0, b, m0, fb, beta_opts)?;
        return Ok(finish(root, Structural::from_beta(q, u, root.x)));
    }

    let c = endpoint(q, u);
    if m0 < 0.0 {
        let top = src.e_top().ok_or_else(|| {
            Error::BracketFailure("negative margin on an unbounded spectrum".into())
        })?;
        let lo = -1.0 / ((1.0 - q) * (top - u)) * (1.0 - 1e-15);
        let flo = at_beta(lo)?;
        let root = secant_bisect(at_beta, lo, 0.0, flo, m0, beta_opts)?;
        return Ok(finish(root, Structural::from_beta(q, u, root.x)));
    }

    let switch = 0.9 * c;
    let f_switch = at_beta(switch)?;
    if f_switch <= 0.0 {
        let root = secant_bisect(at_beta, b0, switch, m0, f_switch, beta_opts)?;
        return Ok(finish(root, Structural::from_beta(q, u, root.x)));
    }

    // near the endpoint: search s = ln(delta)
    let at_log_delta = |s: f64| mismatch(src, &Structural::from_delta(q, u, s.exp()));
    let s_hi = (0.1 * c).ln();
    let s_lo = (1e-300 * c).max(f64::MIN_POSITIVE).ln();
    let f_lo = at_log_delta(s_lo)?;
    if f_lo > 0.0 {
        return Err(Error::BracketFailure(format!(
            "residual still positive at delta = {:e}",
            s_lo.exp()
        )));
    }
    let delta_opts = RootOptions {
        rel: 0.0,
        abs: opts.tol,
        max_iter: opts.max_iter,
    };
    let root = secant_bisect(at_log_delta, s_lo, s_hi, f_lo, f_switch, delta_opts)?;
    Ok(finish(root, Structural::from_delta(q, u, root.x.exp())))
}

/// Aggregate quantities of the optimal distribution, available for
/// spectra of any length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub structural: Structural,
    /// `ln Z` with `Z = sum_i exp_{2-q}(-beta E_i)` over microstates.
    pub ln_z: f64,
    /// Probability of one ground-level microstate.
    pub p1: f64,
    /// Ground-level mass `g_1 p_1`.
    pub ground_mass: f64,
    /// `sum_i p_i^q` over microstates (1 at `q = 1`).
    pub sum_pq: f64,
    /// `sum_i p_i ln(1/p_i)`, only meaningful at `q = 1`.
    pub shannon: f64,
    /// Realized `sum_i p_i e_i`.
    pub mean_energy: f64,
}

/// Computes [`Aggregates`] at a given structural parameter.
pub fn aggregates<S: LevelSource>(src: &S, s: &Structural) -> Result<Aggregates> {
    let w = weights(src, s)?;
    let (q, u) = (s.q, s.u);
    let kernel = w.kernel;
    let [z, r, c] = src.sum(move |e, g| {
        let lw = kernel.ln_weight(e);
        let wt = lw.exp();
        if wt == 0.0 {
            return [0.0; 3];
        }
        let gw = g * wt;
        let third = if q == 1.0 {
            -gw * lw
        } else {
            g * (q * lw).exp()
        };
        [gw, gw * (e - u), third]
    })?;
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Accuracy(format!("weight sum is {z}")));
    }
    let g1 = src.degeneracy(1);
    let p1 = kernel.ln_weight(0.0).exp() / z;
    let (sum_pq, shannon) = if q == 1.0 {
        (1.0, z.ln() + c / z)
    } else {
        (c / z.powf(q), f64::NAN)
    };
    Ok(Aggregates {
        structural: *s,
        ln_z: w.ln_scale + z.ln(),
        p1,
        ground_mass: g1 * p1,
        sum_pq,
        shannon,
        mean_energy: u + r / z,
    })
}

/// Per-level microstate probabilities and `Z` of the optimal distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub aggregates: Aggregates,
    /// One microstate probability per distinct level.
    pub p: Vec<f64>,
}

impl Distribution {
    pub fn z(&self) -> f64 {
        self.aggregates.ln_z.exp()
    }
}

/// `p_n = exp_{2-q}(-beta E_n) / Z` for each level of a finite spectrum.
pub fn distribution(spectrum: &Spectrum, s: &Structural) -> Result<Distribution> {
    let n = spectrum.len();
    if n > MATERIALIZE_LIMIT {
        return Err(Error::TooLarge {
            levels: n,
            limit: MATERIALIZE_LIMIT,
        });
    }
    let agg = aggregates(spectrum, s)?;
    let w = weights(spectrum, s)?;
    let z_scaled = (agg.ln_z - w.ln_scale).exp();
    let p = (1..=n)
        .map(|i| w.kernel.ln_weight(LevelSource::energy(spectrum, i)).exp() / z_scaled)
        .collect();
    Ok(Distribution { aggregates: agg, p })
}

/// `r_n = p_n / p_1 = (U delta / (U delta + e_n beta))^(1/(1-q))`.
pub fn ratios(spectrum: &Spectrum, s: &Structural) -> Result<Vec<f64>> {
    let delta = s
        .delta
        .ok_or_else(|| Error::Domain("ratios need q < 1".into()))?;
    let n = spectrum.len();
    if n > MATERIALIZE_LIMIT {
        return Err(Error::TooLarge {
            levels: n,
            limit: MATERIALIZE_LIMIT,
        });
    }
    let a = 1.0 / (1.0 - s.q);
    let ud = s.u * delta;
    Ok((1..=n)
        .map(|i| {
            let e = LevelSource::energy(spectrum, i);
            (ud / (ud + e * s.beta)).powf(a)
        })
        .collect())
}

/// Lagrange multipliers `(lambda1, lambda2)` for the normalization and
/// the centered energy constraint.
///
/// For `q < 1`: `lambda1 = k_s q sum p^q / (1-q)`, `lambda2 = beta k_s q Z^(1-q)`.
/// For `q = 1`: `lambda1 = k (ln Z - 1)`, `lambda2 = k beta`.
pub fn multipliers(agg: &Aggregates, k_s: f64) -> (f64, f64) {
    let q = agg.structural.q;
    let beta = agg.structural.beta;
    if q == 1.0 {
        return (k_s * (agg.ln_z - 1.0), k_s * beta);
    }
    let lambda1 = k_s * q * agg.sum_pq / (1.0 - q);
    let lambda2 = beta * k_s * q * ((1.0 - q) * agg.ln_z).exp();
    (lambda1, lambda2)
}

/// Signed temperature `sign(beta) (1 / (q |beta| k_s Z^(1-q)))^(1/q)`.
pub fn temperature(agg: &Aggregates, k_s: f64) -> Result<f64> {
    let q = agg.structural.q;
    let beta = agg.structural.beta;
    if beta == 0.0 {
        return Err(Error::InfiniteTemperature);
    }
    if q == 1.0 {
        return Ok(1.0 / (k_s * beta));
    }
    let ln_t = -(q.ln() + beta.abs().ln() + k_s.ln() + (1.0 - q) * agg.ln_z) / q;
    Ok(beta.signum() * ln_t.exp())
}

/// Entropy at the optimum.
pub fn entropy(agg: &Aggregates, k_s: f64) -> f64 {
    let q = agg.structural.q;
    if q == 1.0 {
        k_s * agg.shannon
    } else {
        k_s * (agg.sum_pq - 1.0) / (1.0 - q)
    }
}

/// Everything about one solved problem on a finite spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxEntSolution {
    pub params: EntropicParams,
    pub beta: f64,
    pub delta: Option<f64>,
    /// Microstate probability per distinct level.
    pub p: Vec<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub z: f64,
    pub ln_z: f64,
    pub k_s: f64,
    pub entropy: f64,
    /// `None` when `beta = 0` (infinite temperature).
    pub temperature: Option<f64>,
    pub iterations: u32,
    pub reparameterized: bool,
}

/// Solves one problem end to end, using the spectrum's own scale factor.
pub fn solve(
    spectrum: &Spectrum,
    u: f64,
    params: &EntropicParams,
    opts: &SolveOptions,
) -> Result<MaxEntSolution> {
    params.validate()?;
    let k_s = scale_factor(params, spectrum.e_max(), spectrum.microstates())?;
    let s = solve_beta(spectrum, u, params.q, opts)?;
    let dist = distribution(spectrum, &s)?;
    let agg = dist.aggregates;
    let (lambda1, lambda2) = multipliers(&agg, k_s);
    let temperature = match temperature(&agg, k_s) {
        Ok(t) => Some(t),
        Err(Error::InfiniteTemperature) => None,
        Err(e) => return Err(e),
    };
    Ok(MaxEntSolution {
        params: *params,
        beta: s.beta,
        delta: s.delta,
        p: dist.p,
        lambda1,
        lambda2,
        z: agg.ln_z.exp(),
        ln_z: agg.ln_z,
        k_s,
        entropy: entropy(&agg, k_s),
        temperature,
        iterations: s.iterations,
        reparameterized: s.reparameterized,
    })
}

/// Solution summary for a spectrum of any length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub aggregates: Aggregates,
    pub k_s: f64,
    pub temperature: Option<f64>,
    pub entropy: f64,
}

/// Solves and summarizes without materializing probabilities; `k_s` is
/// supplied by the caller (it is undefined for unbounded spectra).
pub fn solve_summary<S: LevelSource>(
    src: &S,
    u: f64,
    q: f64,
    k_s: f64,
    opts: &SolveOptions,
) -> Result<PointSummary> {
    let s = solve_beta(src, u, q, opts)?;
    let agg = aggregates(src, &s)?;
    let temperature = match temperature(&agg, k_s) {
        Ok(t) => Some(t),
        Err(Error::InfiniteTemperature) => None,
        Err(e) => return Err(e),
    };
    Ok(PointSummary {
        aggregates: agg,
        k_s,
        temperature,
        entropy: entropy(&agg, k_s),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::Level;

    fn levels(v: &[(f64, u64)]) -> Spectrum {
        Spectrum::from_levels(
            v.iter()
                .map(|&(energy, degeneracy)| Level { energy, degeneracy })
                .collect(),
        )
        .unwrap()
    }

    fn example_one() -> Spectrum {
        levels(&[(0.0, 1), (0.5, 1), (1.0, 1)])
    }

    #[test]
    fn symmetric_two_level() {
        let s = levels(&[(0.0, 1), (1.0, 1)]);
        for q in [0.3, 0.7, 1.0] {
            assert_eq!(residual(&s, 0.5, q, 0.0).unwrap(), 0.0);
            let b = solve_beta(&s, 0.5, q, &SolveOptions::default()).unwrap();
            assert_eq!(b.beta, 0.0);
            let d = distribution(&s, &b).unwrap();
            assert_eq!(d.p, vec![0.5, 0.5]);
        }
    }

    #[test]
    fn residual_diverges_at_endpoint() {
        let s = example_one();
        let c = endpoint(0.5, 0.3);
        let near = residual(&s, 0.3, 0.5, c * (1.0 - 1e-9)).unwrap();
        assert!(near < -1e10);
        assert!(residual(&s, 0.3, 0.5, c).is_err());
    }

    #[test]
    fn uniform_grid_continuum_regime() {
        let s = Spectrum::uniform_grid(6001, 30.0, 1).unwrap();
        let b = solve_beta(&s, 1.0, 0.75, &SolveOptions::default()).unwrap();
        assert!((b.beta * 0.75 - 1.0).abs() < 0.02, "{}", b.beta);
    }

    #[test]
    fn classical_temperature() {
        let agg = Aggregates {
            structural: Structural::from_beta(1.0, 1.0, 2.0),
            ln_z: 0.3,
            p1: 0.5,
            ground_mass: 0.5,
            sum_pq: 1.0,
            shannon: 0.0,
            mean_energy: 1.0,
        };
        assert_eq!(temperature(&agg, 1.0).unwrap(), 0.5);
        let zero = Aggregates {
            structural: Structural::from_beta(0.5, 1.0, 0.0),
            ..agg
        };
        assert_eq!(temperature(&zero, 1.0), Err(Error::InfiniteTemperature));
        assert_eq!(multipliers(&zero, 1.0).1, 0.0);
    }

    #[test]
    fn uniform_at_zero_beta() {
        let s = levels(&[(0.0, 2), (0.4, 1), (1.0, 3)]);
        let d = distribution(&s, &Structural::from_beta(0.6, 0.5, 0.0)).unwrap();
        for p in d.p {
            assert!((p - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn ratios_match_distribution() {
        let s = example_one();
        let b = solve_beta(&s, 0.3, 0.5, &SolveOptions::default()).unwrap();
        let d = distribution(&s, &b).unwrap();
        let r = ratios(&s, &b).unwrap();
        assert_eq!(r[0], 1.0);
        for (ri, pi) in r.iter().zip(&d.p) {
            assert!((ri - pi / d.p[0]).abs() < 1e-10);
        }
        assert!(r[1] < r[0] && r[2] < r[1]);
        let flat = ratios(&s, &Structural::from_beta(0.5, 0.3, 0.0)).unwrap();
        assert!(flat.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn constraints_hold() {
        let cases: Vec<(Spectrum, f64, f64)> = vec![
            (example_one(), 0.3, 0.5),
            (example_one(), 0.8, 0.2),
            (Spectrum::oscillator(200, 1.0).unwrap(), 1.5, 0.4),
            (Spectrum::particle_box(300, 1.0).unwrap(), 2.0, 0.3),
            (Spectrum::hydrogen(500, 1.0).unwrap(), 0.5, 0.5),
            (Spectrum::uniform_grid(100, 3.0, 2).unwrap(), 2.5, 0.9),
            (Spectrum::hydrogen(50, 1.0).unwrap(), 0.999, 1.0),
        ];
        for (s, u, q) in cases {
            let b = solve_beta(&s, u, q, &SolveOptions::default()).unwrap();
            let d = distribution(&s, &b).unwrap();
            let lv = s.levels().unwrap();
            let mass: f64 = lv
                .iter()
                .zip(&d.p)
                .map(|(l, p)| l.degeneracy as f64 * p)
                .sum();
            let mean: f64 = lv
                .iter()
                .zip(&d.p)
                .map(|(l, p)| l.degeneracy as f64 * p * l.energy)
                .sum();
            assert!((mass - 1.0).abs() < 1e-10, "{}", s.label());
            assert!((mean - u).abs() < 1e-9 * s.e_max(), "{} {mean}", s.label());
            assert!(d.p.iter().all(|&p| p > 0.0));
            if q < 1.0 {
                assert!(b.delta.unwrap() > 0.0);
                assert!(((1.0 - q) * d.aggregates.ln_z).exp() / d.aggregates.sum_pq - 1.0 < 1e-9);
            }
        }
    }

    #[test]
    fn hydrogen_endpoint_regime_uses_delta() {
        let s = Spectrum::hydrogen(100_000, 1.0).unwrap();
        let b = solve_beta(&s, 0.5, 0.5, &SolveOptions::default()).unwrap();
        assert!(b.reparameterized);
        let delta = b.delta.unwrap();
        assert!(delta > 0.0 && delta < 1e-5, "{delta}");
        let agg = aggregates(&s, &b).unwrap();
        assert!((agg.mean_energy - 0.5).abs() < 1e-9);
    }

    #[test]
    fn oscillator_classical_closed_form() {
        let s = Spectrum::oscillator(2000, 1.0).unwrap();
        for u in [0.5, 1.5, 3.0] {
            let b = solve_beta(&s, u, 1.0, &SolveOptions::default()).unwrap();
            let exact = ((1.0 + u) / u).ln();
            assert!(
                (b.beta / exact - 1.0).abs() < 1e-6,
                "{u}: {} {exact}",
                b.beta
            );
        }
    }

    #[test]
    fn negative_margin_gives_negative_beta() {
        let s = Spectrum::uniform_grid(50, 1.0, 1).unwrap();
        for q in [0.4, 1.0] {
            let b = solve_beta(&s, 0.8, q, &SolveOptions::default()).unwrap();
            assert!(b.beta < 0.0);
            let sol = solve(
                &s,
                0.8,
                &EntropicParams::unit(q).unwrap(),
                &SolveOptions::default(),
            )
            .unwrap();
            assert!(sol.temperature.unwrap() < 0.0);
            let mean: f64 = s
                .levels()
                .unwrap()
                .iter()
                .zip(&sol.p)
                .map(|(l, p)| p * l.energy)
                .sum();
            assert!((mean - 0.8).abs() < 1e-10);
        }
    }

    #[test]
    fn out_of_range_energy() {
        let s = example_one();
        assert!(matches!(
            solve_beta(&s, 1.0, 0.5, &SolveOptions::default()),
            Err(Error::EnergyOutOfRange { .. })
        ));
        assert!(solve_beta(&s, 0.0, 0.5, &SolveOptions::default()).is_err());
        assert!(solve_beta(&s, 0.5, 1.5, &SolveOptions::default()).is_err());
    }
}
