//! Independent brute-force maximizer for spectra with at most four levels.
//!
//! Works on level masses `m_n = g_n p_n`, eliminates the two constraints
//! and maximizes the remaining one or two free masses directly. Shares no
//! code with the solver's weight evaluation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::golden_section_max;
use crate::spectra::{Level, Spectrum};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    /// Microstate probability per distinct level.
    pub p: Vec<f64>,
    pub entropy: f64,
    /// Realized mean energy.
    pub u_check: f64,
}

const GRID: usize = 2000;

/// Per-level contribution to `sum_i p_i^q` (or to `sum_i p_i ln(1/p_i)` at `q = 1`).
fn term(m: f64, g: f64, q: f64) -> f64 {
    if m <= 0.0 {
        return 0.0;
    }
    if q == 1.0 {
        m * (g / m).ln()
    } else {
        g.powf(1.0 - q) * m.powf(q)
    }
}

/// Derivative of [`term`] with respect to `m`, without the constant `-1`
/// of the `q = 1` case (it cancels along any feasible direction).
fn dterm(m: f64, g: f64, q: f64) -> f64 {
    if m <= 0.0 {
        return f64::INFINITY;
    }
    if q == 1.0 {
        (g / m).ln()
    } else {
        q * g.powf(1.0 - q) * m.powf(q - 1.0)
    }
}

/// Maximizes a strictly concave `f` on `[lo, hi]`: grid scan, golden
/// section, then bisection on the derivative `df`.
fn maximize<F, D>(f: F, df: D, lo: f64, hi: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if !(hi > lo) {
        return lo;
    }
    let h = (hi - lo) / GRID as f64;
    let at = |i: usize| if i == GRID { hi } else { lo + i as f64 * h };
    let best = (0..=GRID)
        .map(|i| (i, f(at(i))))
        .fold((0, f64::NEG_INFINITY), |b, x| if x.1 > b.1 { x } else { b });
    let (a, b) = (at(best.0.saturating_sub(1)), at((best.0 + 1).min(GRID)));
    let (mut x, mut fx) = golden_section_max(&f, a, b, 1e-14 * (hi - lo));
    for (cand, fc) in [(lo, f(lo)), (hi, f(hi))] {
        if fc > fx {
            x = cand;
            fx = fc;
        }
    }
    // derivative polish inside the golden bracket
    let (mut l, mut r) = (a.max(lo), b.min(hi));
    let inner = 1e-3 * (r - l);
    if df(l + inner * 1e-9) > 0.0 && df(r - inner * 1e-9) < 0.0 {
        l += inner * 1e-9;
        r -= inner * 1e-9;
        for _ in 0..200 {
            let mid = 0.5 * (l + r);
            if mid <= l || mid >= r {
                break;
            }
            if df(mid) > 0.0 {
                l = mid;
            } else {
                r = mid;
            }
        }
        let polished = 0.5 * (l + r);
        if f(polished) >= fx - 1e-15 * fx.abs() {
            x = polished;
        }
    }
    x
}

fn masses_three(lv: &[Level], u: f64) -> impl Fn(f64) -> [f64; 3] + '_ {
    move |m1: f64| {
        let (e2, e3) = (lv[1].energy, lv[2].energy);
        let rest = 1.0 - m1;
        let m2 = (rest * e3 - u) / (e3 - e2);
        let m3 = (u - e2 * rest) / (e3 - e2);
        [m1, m2.max(0.0), m3.max(0.0)]
    }
}

fn solve_three(lv: &[Level], u: f64, q: f64) -> Vec<f64> {
    let g: Vec<f64> = lv.iter().map(|l| l.degeneracy as f64).collect();
    let (e2, e3) = (lv[1].energy, lv[2].energy);
    let lo = (1.0 - u / e2).max(0.0);
    let hi = 1.0 - u / e3;
    let ms = masses_three(lv, u);
    let f = |m1: f64| {
        let m = ms(m1);
        (0..3).map(|i| term(m[i], g[i], q)).sum::<f64>()
    };
    let df = |m1: f64| {
        let m = ms(m1);
        dterm(m[0], g[0], q) - e3 / (e3 - e2) * dterm(m[1], g[1], q)
            + e2 / (e3 - e2) * dterm(m[2], g[2], q)
    };
    ms(maximize(f, df, lo, hi)).to_vec()
}

fn solve_four(lv: &[Level], u: f64, q: f64) -> Vec<f64> {
    let g_all: Vec<f64> = lv.iter().map(|l| l.degeneracy as f64).collect();
    let g = &g_all;
    let (e2, e3, e4) = (lv[1].energy, lv[2].energy, lv[3].energy);
    let masses = move |m1: f64, m4: f64| {
        let a = 1.0 - m1 - m4;
        let b = u - m4 * e4;
        let m2 = (e3 * a - b) / (e3 - e2);
        let m3 = (b - e2 * a) / (e3 - e2);
        [m1, m2.max(0.0), m3.max(0.0), m4]
    };
    let value = move |m: [f64; 4]| (0..4).map(|i| term(m[i], g[i], q)).sum::<f64>();
    let inner = move |m4: f64| {
        let b = u - m4 * e4;
        let lo = (1.0 - m4 - b / e2).max(0.0);
        let hi = 1.0 - m4 - b / e3;
        let f = |m1: f64| value(masses(m1, m4));
        let df = |m1: f64| {
            let m = masses(m1, m4);
            dterm(m[0], g[0], q) - e3 / (e3 - e2) * dterm(m[1], g[1], q)
                + e2 / (e3 - e2) * dterm(m[2], g[2], q)
        };
        maximize(f, df, lo, hi.max(lo))
    };
    let lo4 = ((u - e3) / (e4 - e3)).max(0.0);
    let hi4 = u / e4;
    let outer = |m4: f64| value(masses(inner(m4), m4));
    // envelope: the inner optimum makes the m1 derivative vanish
    let douter = |m4: f64| {
        let m = masses(inner(m4), m4);
        dterm(m[3], g[3], q) + (e4 - e3) / (e3 - e2) * dterm(m[1], g[1], q)
            - (e4 - e2) / (e3 - e2) * dterm(m[2], g[2], q)
    };
    let m4 = maximize_coarse(outer, douter, lo4, hi4);
    masses(inner(m4), m4).to_vec()
}

/// Like [`maximize`] with a coarser grid, for the nested outer search.
fn maximize_coarse<F, D>(f: F, df: D, lo: f64, hi: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    const COARSE: usize = 64;
    if !(hi > lo) {
        return lo;
    }
    let h = (hi - lo) / COARSE as f64;
    let at = |i: usize| if i == COARSE { hi } else { lo + i as f64 * h };
    let best = (0..=COARSE)
        .map(|i| (i, f(at(i))))
        .fold((0, f64::NEG_INFINITY), |b, x| if x.1 > b.1 { x } else { b });
    let (a, b) = (at(best.0.saturating_sub(1)), at((best.0 + 1).min(COARSE)));
    let (mut x, fx) = golden_section_max(&f, a, b, 1e-10 * (hi - lo));
    let (mut l, mut r) = (a + 1e-12 * (b - a), b - 1e-12 * (b - a));
    if df(l) > 0.0 && df(r) < 0.0 {
        for _ in 0..200 {
            let mid = 0.5 * (l + r);
            if mid <= l || mid >= r {
                break;
            }
            if df(mid) > 0.0 {
                l = mid;
            } else {
                r = mid;
            }
        }
        let polished = 0.5 * (l + r);
        if f(polished) >= fx - 1e-15 * fx.abs() {
            x = polished;
        }
    }
    x
}

fn entropy_from_masses(m: &[f64], g: &[f64], q: f64, k_s: f64) -> f64 {
    let total: f64 = m.iter().zip(g).map(|(&mi, &gi)| term(mi, gi, q)).sum();
    if q == 1.0 {
        k_s * total
    } else {
        k_s * (total - 1.0) / (1.0 - q)
    }
}

fn finish(lv: &[Level], m: Vec<f64>, q: f64, k_s: f64) -> OracleResult {
    let g: Vec<f64> = lv.iter().map(|l| l.degeneracy as f64).collect();
    let entropy = entropy_from_masses(&m, &g, q, k_s);
    let u_check = m.iter().zip(lv).map(|(mi, l)| mi * l.energy).sum();
    let p = m.iter().zip(&g).map(|(mi, gi)| mi / gi).collect();
    OracleResult {
        p,
        entropy,
        u_check,
    }
}

/// Maximizes the entropy over the constrained simplex by brute force.
pub fn brute_force(spectrum: &Spectrum, u: f64, q: f64, k_s: f64) -> Result<OracleResult> {
    crate::qmath::check_q(q)?;
    let n = spectrum.len();
    if n > 4 {
        return Err(Error::Domain(format!(
            "brute force supports at most 4 levels, got {n}"
        )));
    }
    let lv = spectrum.levels()?;
    let e_max = spectrum.e_max();
    if !(u > 0.0 && u < e_max) {
        return Err(Error::Infeasible(format!("U = {u} outside (0, {e_max})")));
    }
    let m = match n {
        2 => {
            let m2 = u / lv[1].energy;
            vec![1.0 - m2, m2]
        }
        3 => solve_three(&lv, u, q),
        _ => solve_four(&lv, u, q),
    };
    Ok(finish(&lv, m, q, k_s))
}

/// `(U, S(U))` over a grid; the closed endpoints `0` and `e_max` are
/// accepted and give the single-level distributions.
pub fn value_curve(
    spectrum: &Spectrum,
    q: f64,
    k_s: f64,
    u_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let lv = spectrum.levels()?;
    let e_max = spectrum.e_max();
    u_grid
        .par_iter()
        .map(|&u| {
            let edge = if u == 0.0 {
                Some(0)
            } else if u == e_max {
                Some(lv.len() - 1)
            } else {
                None
            };
            let s = match edge {
                Some(i) => {
                    let mut m = vec![0.0; lv.len()];
                    m[i] = 1.0;
                    finish(&lv, m, q, k_s).entropy
                }
                None => brute_force(spectrum, u, q, k_s)?.entropy,
            };
            Ok((u, s))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{distribution, solve_beta, SolveOptions};

    fn levels(v: &[(f64, u64)]) -> Spectrum {
        Spectrum::from_levels(
            v.iter()
                .map(|&(energy, degeneracy)| Level { energy, degeneracy })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn two_level_midpoint() {
        let s = levels(&[(0.0, 1), (1.0, 1)]);
        for q in [0.2, 0.5, 1.0] {
            let r = brute_force(&s, 0.5, q, 1.0).unwrap();
            assert_eq!(r.p, vec![0.5, 0.5]);
        }
    }

    #[test]
    fn matches_solver_on_three_and_four_levels() {
        let cases = [
            levels(&[(0.0, 1), (0.5, 1), (1.0, 1)]),
            levels(&[(0.0, 2), (0.3, 1), (1.0, 3)]),
            levels(&[(0.0, 1), (0.2, 2), (0.7, 1), (1.0, 1)]),
        ];
        for s in &cases {
            for &q in &[0.15, 0.5, 0.85, 1.0] {
                for &u in &[0.1, 0.3, 0.55, 0.9] {
                    let o = brute_force(s, u, q, 1.0).unwrap();
                    let b = solve_beta(s, u, q, &SolveOptions::default()).unwrap();
                    let d = distribution(s, &b).unwrap();
                    for (a, b) in o.p.iter().zip(&d.p) {
                        assert!((a - b).abs() < 1e-6, "{} q={q} u={u}: {a} {b}", s.label());
                    }
                    assert!((o.u_check - u).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn infeasible_energy() {
        let s = levels(&[(0.0, 1), (0.5, 1), (1.0, 1)]);
        assert!(matches!(
            brute_force(&s, 1.0, 0.5, 1.0),
            Err(Error::Infeasible(_))
        ));
        assert!(brute_force(&s, -0.1, 0.5, 1.0).is_err());
    }

    #[test]
    fn value_curve_endpoints_and_concavity() {
        let s = levels(&[(0.0, 1), (0.5, 1), (1.0, 1)]);
        let grid: Vec<f64> = (0..=50).map(|i| i as f64 / 50.0).collect();
        let curve = value_curve(&s, 0.8, 1.0 / 2f64.powf(0.2), &grid).unwrap();
        assert_eq!(curve[0].1, 0.0);
        assert_eq!(curve[50].1, 0.0);
        for w in curve.windows(3) {
            assert!(w[1].1 * 2.0 >= w[0].1 + w[2].1 - 1e-9);
        }
        let sym = levels(&[(0.0, 1), (1.0, 1)]);
        let c = value_curve(&sym, 0.6, 1.0, &[0.5 - 1e-5, 0.5 + 1e-5]).unwrap();
        assert!((c[0].1 - c[1].1).abs() < 1e-12);
    }
}
