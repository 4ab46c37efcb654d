//! q-deformed special functions and the spectrum-dependent scale factor.
//!
//! Every function here is pure. `q = 1` is accepted wherever the classical
//! limit is well defined and dispatches to `ln`/`exp`/Boltzmann-Gibbs forms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the entropic functional: the index `q`, the Boltzmann
/// constant `k` and the exponent `sigma` of the scale factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropicParams {
    pub q: f64,
    pub k: f64,
    pub sigma: f64,
}

impl EntropicParams {
    pub fn new(q: f64, k: f64, sigma: f64) -> Result<Self> {
        let params = EntropicParams { q, k, sigma };
        params.validate()?;
        Ok(params)
    }

    /// Dimensionless units: `k = 1`, `sigma = 1`.
    pub fn unit(q: f64) -> Result<Self> {
        Self::new(q, 1.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        check_q(self.q)?;
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(Error::Domain(format!("k must be positive, got {}", self.k)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Domain(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    pub fn is_classical(&self) -> bool {
        self.q == 1.0
    }
}

/// Checks `0 < q <= 1`.
pub fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("q must lie in (0, 1], got {q}")))
    }
}

/// The q-logarithm `(z^(1-q) - 1) / (1 - q)`; `ln z` at `q = 1`.
pub fn q_log(z: f64, q: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::Domain(format!("q_log needs z >= 0, got {z}")));
    }
    if q == 1.0 {
        return Ok(z.ln());
    }
    let one_minus_q = 1.0 - q;
    if z == 0.0 {
        // 0^(1-q) is 0 for q < 1 and +inf for q > 1.
        return Ok(if one_minus_q > 0.0 {
            -1.0 / one_minus_q
        } else {
            f64::NEG_INFINITY
        });
    }
    Ok((one_minus_q * z.ln()).exp_m1() / one_minus_q)
}

/// The q-exponential `[1 + (1-q) z]_+^(1/(1-q))`; `exp z` at `q = 1`.
///
/// Callers needing the generalized Boltzmann factor pass `2 - q`.
pub fn q_exp(z: f64, q: f64) -> f64 {
    if q == 1.0 {
        return z.exp();
    }
    let one_minus_q = 1.0 - q;
    let base = 1.0 + one_minus_q * z;
    if base <= 0.0 {
        // [.]_+ clipping. For q > 1 the exponent is negative and the clipped
        // base is a pole.
        return if one_minus_q > 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    if base < 2.0 {
        ((one_minus_q * z).ln_1p() / one_minus_q).exp()
    } else {
        base.powf(1.0 / one_minus_q)
    }
}

/// `k^q (e_max / (W^sigma - 1))^(1-q)`, exactly `k` when `q = 1`.
pub fn scale_factor(params: &EntropicParams, e_max: f64, microstates: f64) -> Result<f64> {
    params.validate()?;
    if !(e_max > 0.0) {
        return Err(Error::Domain(format!(
            "e_max must be positive, got {e_max}"
        )));
    }
    if !(microstates >= 2.0) {
        return Err(Error::Domain(format!(
            "need at least 2 microstates, got {microstates}"
        )));
    }
    if params.q == 1.0 {
        return Ok(params.k);
    }
    let denom = microstates.powf(params.sigma) - 1.0;
    if !(denom > 0.0) {
        return Err(Error::Domain("W^sigma - 1 must be positive".into()));
    }
    let q = params.q;
    Ok(params.k.powf(q) * (e_max / denom).powf(1.0 - q))
}

/// `sign(z) |z|^q`.
pub fn signed_power(z: f64, q: f64) -> f64 {
    if z == 0.0 {
        0.0
    } else {
        z.signum() * z.abs().powf(q)
    }
}

/// Generalized entropy of a microstate probability vector.
///
/// `k_s (sum p^q - 1) / (1 - q)` for `q < 1`; `k sum p ln(1/p)` with
/// `0 ln(1/0) = 0` for `q = 1` (where `k_s = k`).
pub fn entropy_value(p: &[f64], params: &EntropicParams, k_s: f64) -> Result<f64> {
    entropy_value_weighted(p.iter().map(|&pi| (pi, 1.0)), params, k_s)
}

/// Same as [`entropy_value`] but over `(probability, multiplicity)` pairs,
/// e.g. per-level microstate probabilities with their degeneracies.
pub fn entropy_value_weighted<I>(p: I, params: &EntropicParams, k_s: f64) -> Result<f64>
where
    I: IntoIterator<Item = (f64, f64)>,
{
    params.validate()?;
    let q = params.q;
    let mut total = crate::numeric::KahanSum::new();
    let mut acc = crate::numeric::KahanSum::new();
    for (pi, mult) in p {
        if !(pi >= 0.0) || !(mult >= 0.0) {
            return Err(Error::Domain(format!("negative probability {pi}")));
        }
        total.add(mult * pi);
        if pi > 0.0 {
            if q == 1.0 {
                acc.add(-mult * pi * pi.ln());
            } else {
                acc.add(mult * pi.powf(q));
            }
        }
    }
    let total = total.value();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "probabilities sum to {total}, not 1"
        )));
    }
    if q == 1.0 {
        Ok(k_s * acc.value())
    } else {
        Ok(k_s * (acc.value() - 1.0) / (1.0 - q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn q_log_examples() {
        assert_eq!(q_log(1.0, 0.5).unwrap(), 0.0);
        let v = q_log(2.0, 0.5).unwrap();
        assert!((v - 2.0 * (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!((v - 0.828427).abs() < 1e-6);
        let near = q_log(std::f64::consts::E, 0.999999).unwrap();
        assert!((near - 1.0).abs() < 1e-5);
        assert!(q_log(-1.0, 0.5).is_err());
        assert_eq!(q_log(0.0, 0.5).unwrap(), -2.0);
    }

    #[test]
    fn q_exp_examples() {
        assert_eq!(q_exp(0.0, 0.3), 1.0);
        // index 1.5: base 1 + (1 - 1.5)(-3) = 2.5, exponent -2
        assert!((q_exp(-3.0, 1.5) - 2.5f64.powi(-2)).abs() < 1e-15);
        // index 0.5 at z = 3 gives the same base with exponent +2
        assert!((q_exp(3.0, 0.5) - 6.25).abs() < 1e-12);
        // clipping boundary: 1 + (1-q) z = 0
        assert_eq!(q_exp(-1.0 / 0.7, 0.3), 0.0);
        assert_eq!(q_exp(-10.0, 0.3), 0.0);
    }

    #[test]
    fn scale_factor_examples() {
        let k = 1.380649e-23;
        let p = EntropicParams::new(1.0, k, 1.0).unwrap();
        assert_eq!(scale_factor(&p, 123.0, 77.0).unwrap(), k);
        for q in [0.1, 0.5, 0.9] {
            let p = EntropicParams::unit(q).unwrap();
            let ks = scale_factor(&p, 1.0, 3.0).unwrap();
            assert!((ks - 1.0 / 2f64.powf(1.0 - q)).abs() < 1e-15);
        }
        // oscillator, sigma = 1: k^q (hbar omega)^(1-q) for every N
        let (q, k, hw) = (0.7, 2.0, 0.3);
        let p = EntropicParams::new(q, k, 1.0).unwrap();
        for n in [2u32, 10, 1000] {
            let ks = scale_factor(&p, (n - 1) as f64 * hw, n as f64).unwrap();
            let expect = k.powf(q) * hw.powf(1.0 - q);
            assert!((ks / expect - 1.0).abs() < 1e-13);
        }
        assert!(scale_factor(&p, 1.0, 1.0).is_err());
        assert!(scale_factor(&p, 0.0, 4.0).is_err());
    }

    #[test]
    fn signed_power_examples() {
        assert_eq!(signed_power(-4.0, 0.5), -2.0);
        assert_eq!(signed_power(0.0, 0.3), 0.0);
        assert_eq!(signed_power(9.0, 0.5), 3.0);
        assert_eq!(signed_power(-2.5, 1.0), -2.5);
    }

    #[test]
    fn entropy_examples() {
        let p = EntropicParams::unit(0.4).unwrap();
        assert_eq!(entropy_value(&[1.0, 0.0, 0.0], &p, 1.3).unwrap(), 0.0);
        let bg = EntropicParams::unit(1.0).unwrap();
        assert_eq!(entropy_value(&[0.0, 1.0], &bg, 1.0).unwrap(), 0.0);
        for w in [2usize, 5, 17] {
            let uniform = vec![1.0 / w as f64; w];
            let ks = 0.8;
            let s = entropy_value(&uniform, &p, ks).unwrap();
            let expect = ks * q_log(w as f64, 0.4).unwrap();
            assert!((s - expect).abs() < 1e-12);
        }
        assert!(entropy_value(&[0.5, 0.6], &p, 1.0).is_err());
        assert!(entropy_value(&[1.5, -0.5], &p, 1.0).is_err());
    }

    #[test]
    fn scale_factor_continuous_at_one() {
        let k = 1.7;
        let near = EntropicParams::new(1.0 - 1e-8, k, 1.3).unwrap();
        let at = EntropicParams::new(1.0, k, 1.3).unwrap();
        let a = scale_factor(&near, 40.0, 900.0).unwrap();
        let b = scale_factor(&at, 40.0, 900.0).unwrap();
        assert!((a / b - 1.0).abs() < 1e-6);
    }

    #[test]
    fn deformed_functions_approach_log_exp() {
        let q = 1.0 - 1e-6;
        let mut worst: f64 = 0.0;
        for i in 0..=1000 {
            let z = 0.1 + 9.9 * i as f64 / 1000.0;
            worst = worst.max((q_log(z, q).unwrap() - z.ln()).abs());
            worst = worst.max((q_exp(z, q) - z.exp()).abs() / z.exp().max(1.0));
        }
        assert!(worst < 1e-4, "{worst}");
    }

    fn simplex(len: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.0f64..1.0, len).prop_map(|v| {
            let s: f64 = v.iter().sum::<f64>() + 1e-12;
            v.into_iter().map(|x| (x + 1e-12 / 8.0) / s).collect()
        })
    }

    proptest! {
        #[test]
        fn q_exp_inverts_q_log(z in 1e-6f64..1e6, q in 0.01f64..0.999) {
            let l = q_log(z, q).unwrap();
            prop_assume!(1.0 + (1.0 - q) * l > 0.0);
            let back = q_exp(l, q);
            prop_assert!((back / z - 1.0).abs() < 1e-12, "{} vs {}", back, z);
        }

        #[test]
        fn signed_power_is_odd_and_monotone(z in -1e6f64..1e6, dz in 1e-3f64..10.0, q in 0.01f64..1.0) {
            prop_assert_eq!(signed_power(-z, q), -signed_power(z, q));
            prop_assert!(signed_power(z + dz, q) > signed_power(z, q));
        }

        #[test]
        fn entropy_is_concave(
            pair in (2usize..9).prop_flat_map(|w| (simplex(w), simplex(w))),
            lambda in 0.0f64..1.0,
            q in 0.05f64..1.0,
            classical in proptest::bool::ANY,
        ) {
            let q = if classical { 1.0 } else { q };
            let params = EntropicParams::unit(q).unwrap();
            let (p, r) = pair;
            let mix: Vec<f64> = p.iter().zip(&r).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
            let s_mix = entropy_value(&mix, &params, 1.0).unwrap();
            let s_p = entropy_value(&p, &params, 1.0).unwrap();
            let s_r = entropy_value(&r, &params, 1.0).unwrap();
            prop_assert!(s_mix >= lambda * s_p + (1.0 - lambda) * s_r - 1e-12);
        }

        #[test]
        fn scale_factor_positive(q in 0.01f64..=1.0, emax in 1e-3f64..1e3, w in 2.0f64..1e6, sigma in 0.1f64..3.0) {
            let p = EntropicParams::new(q, 1.0, sigma).unwrap();
            let ks = scale_factor(&p, emax, w).unwrap();
            prop_assert!(ks > 0.0 && ks.is_finite());
        }
    }
}
