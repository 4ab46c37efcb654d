//! Level sums over family spectra of arbitrary length.
//!
//! Short spectra are summed directly. Long ones sum a head directly and
//! replace the rest by Gregory's endpoint-corrected integral, which is
//! accurate because every family is a smooth function of the level index.

use std::cell::Cell;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::{integrate, KahanArray};

/// Family spectra up to this many levels are summed term by term.
pub const DIRECT_LIMIT: u64 = 1 << 18;
/// Largest level count accepted; beyond it level indices lose integer precision.
pub const INDEX_LIMIT: u64 = 1 << 50;
const HEAD: u64 = 1 << 16;
const FALLBACK_LIMIT: u64 = 1 << 24;
const CHUNK: u64 = 1 << 13;
const REL_ACCURACY: f64 = 1e-12;
const GREGORY: [f64; 5] = [
    1.0 / 12.0,
    1.0 / 24.0,
    19.0 / 720.0,
    3.0 / 160.0,
    863.0 / 60480.0,
];

fn add_into<const K: usize>(acc: &mut [f64; K], x: [f64; K]) {
    for (a, v) in acc.iter_mut().zip(x) {
        *a += v;
    }
}

/// Compensated sum of `f(level(n))` for `n = first..=last` in ascending order.
///
/// Long ranges are cut into fixed chunks that may be summed on different
/// threads; the chunk partials are then combined in index order, so the
/// result does not depend on the thread count.
pub(crate) fn direct<const K: usize, L, F>(first: u64, last: u64, level: &L, f: &F) -> [f64; K]
where
    L: Fn(f64) -> (f64, f64) + Sync,
    F: Fn(f64, f64) -> [f64; K] + Sync,
{
    if last < first {
        return [0.0; K];
    }
    let run = |lo: u64, hi: u64| {
        let mut acc = KahanArray::<K>::new();
        for n in lo..=hi {
            let (e, g) = level(n as f64);
            acc.add(f(e, g));
        }
        acc.value()
    };
    let count = last - first + 1;
    if count <= 4 * CHUNK {
        return run(first, last);
    }
    let chunks = count.div_ceil(CHUNK);
    let parts: Vec<[f64; K]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = first + c * CHUNK;
            run(lo, (lo + CHUNK - 1).min(last))
        })
        .collect();
    let mut acc = KahanArray::<K>::new();
    for p in parts {
        acc.add(p);
    }
    acc.value()
}

/// Forward differences of order 0..=5 at the first sample and backward
/// differences at the last one.
fn differences<const K: usize>(v: [[f64; K]; 6]) -> ([[f64; K]; 6], [[f64; K]; 6]) {
    let mut fwd = [[0.0; K]; 6];
    let mut bwd = [[0.0; K]; 6];
    let mut cur = v.to_vec();
    for order in 0..6 {
        fwd[order] = cur[0];
        bwd[order] = cur[cur.len() - 1];
        cur = cur
            .windows(2)
            .map(|w| std::array::from_fn(|i| w[1][i] - w[0][i]))
            .collect();
    }
    (fwd, bwd)
}

struct Tail<const K: usize> {
    value: [f64; K],
    error: [f64; K],
}

/// Sum over `n = a..=b` (or `a..` when `b` is `None`) by Gregory's formula.
fn gregory<const K: usize, L, F>(a: u64, b: Option<u64>, level: &L, f: &F) -> Result<Tail<K>>
where
    L: Fn(f64) -> (f64, f64) + Sync,
    F: Fn(f64, f64) -> [f64; K] + Sync,
{
    let overflow = Cell::new(false);
    let at = |x: f64| {
        let (e, g) = level(x);
        if !e.is_finite() || !g.is_finite() {
            overflow.set(true);
            return [0.0; K];
        }
        let v = f(e, g);
        std::array::from_fn(|i| if v[i].is_finite() { v[i] } else { 0.0 })
    };
    let in_log = |s: f64| {
        let x = s.exp();
        let v = at(x);
        std::array::from_fn(|i| v[i] * x)
    };

    let (fwd, _) = differences::<K>(std::array::from_fn(|j| at((a + j as u64) as f64)));
    let mut value = [0.0; K];
    let mut error = [0.0; K];
    for i in 0..K {
        value[i] = 0.5 * fwd[0][i];
        for (k, c) in GREGORY.iter().enumerate() {
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            value[i] += sign * c * fwd[k + 1][i];
        }
        error[i] = (GREGORY[4] * fwd[5][i]).abs();
    }

    let s0 = (a as f64).ln();
    match b {
        Some(b) => {
            let (_, bwd) = differences::<K>(std::array::from_fn(|j| at((b - 5 + j as u64) as f64)));
            for i in 0..K {
                value[i] += 0.5 * bwd[0][i];
                for (k, c) in GREGORY.iter().enumerate() {
                    value[i] += c * bwd[k + 1][i];
                }
                error[i] += (GREGORY[4] * bwd[5][i]).abs();
            }
            let integral = integrate(in_log, s0, (b as f64).ln(), 1e-14, 0.0, 2000);
            add_into(&mut value, integral.value);
            add_into(&mut error, integral.error);
        }
        None => {
            let mut s = s0;
            let mut steps = 0;
            loop {
                let piece = integrate(in_log, s, s + 1.0, 1e-14, 0.0, 200);
                add_into(&mut value, piece.value);
                add_into(&mut error, piece.error);
                steps += 1;
                s += 1.0;
                if overflow.get() {
                    return Err(Error::Divergent(format!(
                        "level sum has not converged when levels overflow (index e^{s:.0})"
                    )));
                }
                let settled = (0..K).all(|i| piece.value[i].abs() <= 1e-17 * value[i].abs());
                if steps >= 3 && settled {
                    break;
                }
                if s > 700.0 {
                    return Err(Error::Divergent("level sum tail does not decay".into()));
                }
            }
        }
    }
    if overflow.get() {
        return Err(Error::Divergent("level values overflow".into()));
    }
    Ok(Tail { value, error })
}

/// Sum over levels `1..=n` of a smooth family, or over all levels when `n` is `None`.
pub(crate) fn family_sum<const K: usize, L, F>(n: Option<u64>, level: &L, f: &F) -> Result<[f64; K]>
where
    L: Fn(f64) -> (f64, f64) + Sync,
    F: Fn(f64, f64) -> [f64; K] + Sync,
{
    if let Some(n) = n {
        if n <= DIRECT_LIMIT {
            return Ok(direct(1, n, level, f));
        }
        if n > INDEX_LIMIT {
            return Err(Error::TooLarge {
                levels: n,
                limit: INDEX_LIMIT,
            });
        }
    }
    let head = direct(1, HEAD - 1, level, f);
    let tail = gregory(HEAD, n, level, f)?;
    let mut total = head;
    add_into(&mut total, tail.value);
    let accurate = (0..K).all(|i| {
        let scale = head[i].abs() + tail.value[i].abs();
        tail.error[i] <= REL_ACCURACY * scale
    });
    if accurate {
        return Ok(total);
    }
    match n {
        Some(n) if n <= FALLBACK_LIMIT => Ok(direct(1, n, level, f)),
        _ => Err(Error::Accuracy(format!(
            "tail error {:e} exceeds tolerance",
            tail.error.iter().fold(0.0f64, |m, e| m.max(*e))
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic_like(x: f64) -> (f64, f64) {
        (x, 1.0)
    }

    #[test]
    fn gregory_matches_direct_sum_for_power_law() {
        let f = |e: f64, _g: f64| [e.powf(-1.7), e.powf(-0.5) * 1e-3];
        let n = FALLBACK_LIMIT / 8;
        let em = {
            let head = direct(1, HEAD - 1, &harmonic_like, &f);
            let tail = gregory(HEAD, Some(n), &harmonic_like, &f).unwrap();
            [head[0] + tail.value[0], head[1] + tail.value[1]]
        };
        let exact = direct(1, n, &harmonic_like, &f);
        for i in 0..2 {
            assert!(
                (em[i] / exact[i] - 1.0).abs() < 1e-13,
                "{i}: {} {}",
                em[i],
                exact[i]
            );
        }
    }

    #[test]
    fn unbounded_zeta() {
        let f = |e: f64, _g: f64| [e.powi(-2), e.powi(-4)];
        let s = family_sum(None, &harmonic_like, &f).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((s[0] / (pi2 / 6.0) - 1.0).abs() < 1e-14);
        assert!((s[1] / (pi2 * pi2 / 90.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn divergent_tail_is_reported() {
        let f = |e: f64, _g: f64| [1.0 / e.sqrt()];
        assert!(family_sum(None, &|x: f64| (x * x, 1.0), &f).is_err());
    }

    #[test]
    fn huge_closed_form_sums() {
        // sum of n over 1..=N
        let n = 1u64 << 40;
        let s = family_sum(Some(n), &harmonic_like, &|e: f64, _g| [e]).unwrap();
        let nf = n as f64;
        assert!((s[0] / (nf * (nf + 1.0) / 2.0) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn chunked_sum_is_order_stable() {
        let f = |e: f64, _g: f64| [1.0 / e];
        let a = direct(1, 200_000, &harmonic_like, &f);
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| direct(1, 200_000, &harmonic_like, &f));
        assert_eq!(a[0].to_bits(), b[0].to_bits());
    }
}
