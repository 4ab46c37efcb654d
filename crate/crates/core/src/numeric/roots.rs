use crate::error::{Error, Result};

/// Stopping rule: bracket width `<= rel * |x| + abs`.
#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    pub rel: f64,
    pub abs: f64,
    pub max_iter: u32,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            rel: 1e-12,
            abs: 1e-12,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: u32,
    /// Final bracket width.
    pub width: f64,
}

/// Finds a sign change of `f` in `[a, b]` with Illinois-style false position,
/// forcing a bisection whenever two steps fail to halve the bracket.
///
/// `fa` and `fb` are the already known endpoint values.
pub fn secant_bisect<F>(
    mut f: F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    opts: RootOptions,
) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut lo, mut hi, mut flo, mut fhi) = if a <= b {
        (a, b, fa, fb)
    } else {
        (b, a, fb, fa)
    };
    if flo == 0.0 {
        return Ok(Root {
            x: lo,
            fx: 0.0,
            iterations: 0,
            width: 0.0,
        });
    }
    if fhi == 0.0 {
        return Ok(Root {
            x: hi,
            fx: 0.0,
            iterations: 0,
            width: 0.0,
        });
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(Error::BracketFailure(format!(
            "no sign change on [{lo:e}, {hi:e}]: f = ({flo:e}, {fhi:e})"
        )));
    }
    // Illinois scaling of the stale endpoint
    let (mut wlo, mut whi) = (flo, fhi);
    let mut last_side = 0i8;
    let mut widths = [hi - lo; 3];
    let mut iterations = 0;
    loop {
        let width = hi - lo;
        let scale = lo.abs().max(hi.abs());
        if width <= opts.rel * scale + opts.abs {
            break;
        }
        if iterations >= opts.max_iter {
            return Err(Error::NoConvergence { iterations, width });
        }
        iterations += 1;
        let mid = lo + 0.5 * width;
        let force_bisect = widths[2] < 2.0 * width;
        let mut x = if force_bisect {
            mid
        } else {
            lo - wlo * width / (whi - wlo)
        };
        let guard = 0.25 * (opts.rel * scale + opts.abs);
        if !(x.is_finite()) || x <= lo || x >= hi {
            x = mid;
        } else {
            x = x.clamp(lo + guard, hi - guard);
            if x <= lo || x >= hi {
                x = mid;
            }
        }
        let fx = f(x)?;
        if fx == 0.0 {
            return Ok(Root {
                x,
                fx,
                iterations,
                width: 0.0,
            });
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
            wlo = fx;
            if last_side == -1 {
                whi *= 0.5;
            }
            last_side = -1;
        } else {
            hi = x;
            fhi = fx;
            whi = fx;
            if last_side == 1 {
                wlo *= 0.5;
            }
            last_side = 1;
        }
        widths = [hi - lo, widths[0], widths[1]];
    }
    let (x, fx) = if flo.abs() <= fhi.abs() {
        (lo, flo)
    } else {
        (hi, fhi)
    };
    Ok(Root {
        x,
        fx,
        iterations,
        width: hi - lo,
    })
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a, b);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if c >= d {
            break;
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .fold((x, fx), |best, p| if p.1 > best.1 { p } else { best })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cube_root() {
        let f = |x: f64| Ok(x * x * x - 2.0);
        let r = secant_bisect(f, 0.0, 2.0, -2.0, 6.0, RootOptions::default()).unwrap();
        assert!((r.x - 2f64.cbrt()).abs() < 1e-11);
    }

    #[test]
    fn handles_steep_decreasing_function() {
        let f = |x: f64| Ok((1.0 - x).powf(-10.0) - 5.0);
        let fa = f(0.0).unwrap();
        let b = 1.0 - 1e-15;
        let fb = f(b).unwrap();
        let r = secant_bisect(
            f,
            0.0,
            b,
            fa,
            fb,
            RootOptions {
                rel: 1e-14,
                abs: 1e-14,
                max_iter: 200,
            },
        )
        .unwrap();
        let exact = 1.0 - 5f64.powf(-1.0 / 10.0);
        assert!((r.x - exact).abs() < 1e-12, "{} {}", r.x, exact);
        assert!(r.iterations < 100);
    }

    #[test]
    fn rejects_missing_sign_change() {
        let f = |x: f64| Ok(x * x + 1.0);
        assert!(matches!(
            secant_bisect(f, -1.0, 1.0, 2.0, 2.0, RootOptions::default()),
            Err(Error::BracketFailure(_))
        ));
    }

    #[test]
    fn golden_section_parabola() {
        let (x, fx) = golden_section_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
        assert!(fx <= 0.0 && fx > -1e-12);
    }
}
