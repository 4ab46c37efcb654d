//! Globally adaptive Gauss-Kronrod (7/15) quadrature over `K` integrands at once.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral<const K: usize> {
    pub value: [f64; K],
    pub error: [f64; K],
    pub converged: bool,
}

struct Piece<const K: usize> {
    a: f64,
    b: f64,
    value: [f64; K],
    error: [f64; K],
}

fn gk15<const K: usize, F: Fn(f64) -> [f64; K]>(f: &F, a: f64, b: f64) -> Piece<K> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron: [f64; K] = std::array::from_fn(|i| fc[i] * WGK[7]);
    let mut gauss: [f64; K] = std::array::from_fn(|i| fc[i] * WG[3]);
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        for i in 0..K {
            let s = f1[i] + f2[i];
            kron[i] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[i] += WG[j / 2] * s;
            }
        }
    }
    let value = std::array::from_fn(|i| kron[i] * h);
    let error = std::array::from_fn(|i| ((kron[i] - gauss[i]) * h).abs());
    Piece { a, b, value, error }
}

fn badness<const K: usize>(p: &Piece<K>, total: &[f64; K], rel: f64, abs: f64) -> f64 {
    (0..K)
        .map(|i| p.error[i] / abs.max(rel * total[i].abs()).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// Integrates `f` over `[a, b]` until every component satisfies
/// `err <= max(abs_tol, rel_tol * |I|)`, or `max_pieces` is reached.
pub fn integrate<const K: usize, F>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_pieces: usize,
) -> Integral<K>
where
    F: Fn(f64) -> [f64; K],
{
    if a == b {
        return Integral {
            value: [0.0; K],
            error: [0.0; K],
            converged: true,
        };
    }
    let mut pieces = vec![gk15(&f, a, b)];
    loop {
        let mut total = [0.0; K];
        let mut err = [0.0; K];
        for p in &pieces {
            for i in 0..K {
                total[i] += p.value[i];
                err[i] += p.error[i];
            }
        }
        let done = (0..K).all(|i| err[i] <= abs_tol.max(rel_tol * total[i].abs()));
        if done || pieces.len() >= max_pieces {
            return Integral {
                value: total,
                error: err,
                converged: done,
            };
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .map(|(i, p)| (i, badness(p, &total, rel_tol, abs_tol)))
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, x| if x.1 > acc.1 { x } else { acc },
            );
        let p = pieces.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            // interval cannot be split further in f64
            pieces.push(p);
            let mut total = [0.0; K];
            let mut err = [0.0; K];
            for p in &pieces {
                for i in 0..K {
                    total[i] += p.value[i];
                    err[i] += p.error[i];
                }
            }
            return Integral {
                value: total,
                error: err,
                converged: false,
            };
        }
        pieces.push(gk15(&f, p.a, mid));
        pieces.push(gk15(&f, mid, p.b));
    }
}

/// Integrates over `[a, inf)` through the substitution `x = a + t / (1 - t)`.
pub fn integrate_to_infinity<const K: usize, F>(
    f: F,
    a: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_pieces: usize,
) -> Integral<K>
where
    F: Fn(f64) -> [f64; K],
{
    let g = |t: f64| {
        let one_minus = 1.0 - t;
        let x = a + t / one_minus;
        let jac = 1.0 / (one_minus * one_minus);
        let v = f(x);
        std::array::from_fn(|i| {
            let y = v[i] * jac;
            if y.is_finite() {
                y
            } else {
                0.0
            }
        })
    };
    integrate(g, 0.0, 1.0, rel_tol, abs_tol, max_pieces)
}
