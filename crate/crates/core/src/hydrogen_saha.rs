//! Closed-form hydrogen thermodynamics and the Saha ionization cross-check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{secant_bisect, RootOptions};

/// Physical constants (SI unless noted).
pub mod constants {
    /// Electron mass, kg.
    pub const M_E: f64 = 9.109_383_701_5e-31;
    /// Planck constant, J s.
    pub const H: f64 = 6.626_070_15e-34;
    /// Boltzmann constant, J/K.
    pub const K_B: f64 = 1.380_649e-23;
    /// Joules per electronvolt.
    pub const EV: f64 = 1.602_176_634e-19;
    /// Boltzmann constant, eV/K.
    pub const K_B_EV: f64 = 8.617_333_262e-5;
    /// Hydrogen ionization energy, eV.
    pub const E_ION_EV: f64 = 13.6;
}

fn check_open_q(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("q must lie in (0, 1), got {q}")))
    }
}

/// Hydrogen temperature `((1-q)/q)^(1/q) (U/e_ion)^((1-q)/q) e_ion / k`.
pub fn hydrogen_t(u: f64, q: f64, e_ion: f64, k: f64) -> Result<f64> {
    check_open_q(q)?;
    if !(e_ion > 0.0 && k > 0.0) {
        return Err(Error::Domain("e_ion and k must be positive".into()));
    }
    if !(u > 0.0 && u <= e_ion) {
        return Err(Error::EnergyOutOfRange { u, e_max: e_ion });
    }
    Ok(t_ion(q, e_ion, k)? * (u / e_ion).powf((1.0 - q) / q))
}

/// Critical ionization temperature `((1-q)/q)^(1/q) e_ion / k`.
pub fn t_ion(q: f64, e_ion: f64, k: f64) -> Result<f64> {
    check_open_q(q)?;
    if !(e_ion > 0.0 && k > 0.0) {
        return Err(Error::Domain("e_ion and k must be positive".into()));
    }
    Ok(((1.0 - q) / q).powf(1.0 / q) * e_ion / k)
}

/// Sign of the exponential in the Saha right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SahaSign {
    /// `exp(+e_ion / kT)`.
    Printed,
    /// `exp(-e_ion / kT)`, the textbook Saha form.
    Conventional,
}

impl SahaSign {
    fn factor(self) -> f64 {
        match self {
            SahaSign::Printed => 1.0,
            SahaSign::Conventional => -1.0,
        }
    }
}

/// Density and constants for the hydrogen Saha equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SahaConditions {
    /// Density parameter, m^-3.
    pub eta: f64,
    pub m_e: f64,
    pub h: f64,
    /// Boltzmann constant, J/K.
    pub k: f64,
    pub e_ion_ev: f64,
    pub sign: SahaSign,
}

impl SahaConditions {
    pub fn hydrogen(eta: f64, sign: SahaSign) -> Self {
        use constants::*;
        SahaConditions {
            eta,
            m_e: M_E,
            h: H,
            k: K_B,
            e_ion_ev: E_ION_EV,
            sign,
        }
    }

    /// `ln A(T)` with `A = (1/eta) (2 pi m_e k T / h^2)^(3/2) exp(+-e_ion/kT)`.
    pub fn ln_rhs(&self, t: f64) -> f64 {
        let thermal = 2.0 * std::f64::consts::PI * self.m_e * self.k * t / (self.h * self.h);
        let e = self.e_ion_ev * constants::EV;
        1.5 * thermal.ln() - self.eta.ln() + self.sign.factor() * e / (self.k * t)
    }
}

/// Positive root of `x^2 / (1-x) = a`.
pub fn ionized_fraction_from_rhs(a: f64) -> f64 {
    if !(a > 0.0) {
        return 0.0;
    }
    2.0 / (1.0 + (1.0 + 4.0 / a).sqrt())
}

/// Ionized fraction at temperature `t` (K).
pub fn saha_ionized_fraction(t: f64, cond: &SahaConditions) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!(
            "temperature must be positive, got {t}"
        )));
    }
    Ok(ionized_fraction_from_rhs(cond.ln_rhs(t).exp()))
}

/// Temperature bracket for the ionization search, K.
pub const SAHA_BRACKET: (f64, f64) = (1e3, 1e7);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SahaSolution {
    pub eta: f64,
    pub temperature: f64,
    pub sign: SahaSign,
}

/// Temperature at which the ionized fraction reaches `x_target` under one
/// sign convention. The right-hand side must be monotone over the bracket.
pub fn saha_t_ion_with(eta: f64, x_target: f64, sign: SahaSign) -> Result<SahaSolution> {
    if !(eta > 0.0) {
        return Err(Error::Domain(format!("eta must be positive, got {eta}")));
    }
    if !(x_target > 0.0 && x_target < 1.0) {
        return Err(Error::Domain(format!(
            "x must lie in (0, 1), got {x_target}"
        )));
    }
    let cond = SahaConditions::hydrogen(eta, sign);
    let goal = (x_target * x_target / (1.0 - x_target)).ln();
    let (lo, hi) = (SAHA_BRACKET.0.ln(), SAHA_BRACKET.1.ln());
    let f = |s: f64| cond.ln_rhs(s.exp()) - goal;

    let probes: Vec<f64> = (0..=200)
        .map(|i| f(lo + (hi - lo) * i as f64 / 200.0))
        .collect();
    let rising = probes.windows(2).all(|w| w[1] > w[0]);
    let falling = probes.windows(2).all(|w| w[1] < w[0]);
    if !(rising || falling) {
        return Err(Error::BracketFailure(format!(
            "Saha right-hand side is not monotone on [{:e}, {:e}] K under the {sign:?} sign",
            SAHA_BRACKET.0, SAHA_BRACKET.1
        )));
    }
    let root = secant_bisect(
        |s| Ok(f(s)),
        lo,
        hi,
        probes[0],
        probes[200],
        RootOptions {
            rel: 0.0,
            abs: 1e-14,
            max_iter: 200,
        },
    )?;
    Ok(SahaSolution {
        eta,
        temperature: root.x.exp(),
        sign,
    })
}

/// Tries [`SahaSign::Printed`] first, then [`SahaSign::Conventional`].
pub fn saha_t_ion(eta: f64, x_target: f64) -> Result<SahaSolution> {
    saha_t_ion_with(eta, x_target, SahaSign::Printed)
        .or_else(|_| saha_t_ion_with(eta, x_target, SahaSign::Conventional))
}

/// Ionization temperatures over log-spaced densities, all under one sign
/// convention: [`SahaSign::Printed`] if it works for every density, else
/// [`SahaSign::Conventional`].
pub fn saha_sweep(
    eta_min: f64,
    eta_max: f64,
    points: usize,
    x_target: f64,
) -> Result<Vec<SahaSolution>> {
    if !(eta_min > 0.0 && eta_max >= eta_min && points >= 1) {
        return Err(Error::Domain(
            "need 0 < eta_min <= eta_max and at least one point".into(),
        ));
    }
    let etas: Vec<f64> = (0..points)
        .map(|i| {
            if i == 0 {
                eta_min
            } else if i == points - 1 {
                eta_max
            } else {
                let t = i as f64 / (points - 1) as f64;
                10f64.powf(eta_min.log10() + t * (eta_max.log10() - eta_min.log10()))
            }
        })
        .collect();
    let printed: Result<Vec<_>> = etas
        .iter()
        .map(|&e| saha_t_ion_with(e, x_target, SahaSign::Printed))
        .collect();
    printed.or_else(|_| {
        etas.iter()
            .map(|&e| saha_t_ion_with(e, x_target, SahaSign::Conventional))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::constants::*;
    use super::*;

    #[test]
    fn hydrogen_t_examples() {
        assert!((hydrogen_t(1.0, 0.5, 13.6, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let t = hydrogen_t(E_ION_EV, 0.5, E_ION_EV, K_B_EV).unwrap();
        assert!((t / 1.578e5 - 1.0).abs() < 0.01, "{t}");
        assert!(hydrogen_t(1e-12, 0.3, 1.0, 1.0).unwrap() < 1e-20);
        assert!(hydrogen_t(0.0, 0.3, 1.0, 1.0).is_err());
    }

    #[test]
    fn t_ion_examples() {
        assert_eq!(t_ion(0.5, 13.6, 2.0).unwrap(), 6.8);
        let a = t_ion(0.99, 1.0, 1.0).unwrap();
        let b = t_ion(0.999, 1.0, 1.0).unwrap();
        assert!(b < a && a < 0.02);
        for q in [0.2, 0.5, 0.8] {
            let x = hydrogen_t(3.0, q, 3.0, 1.0).unwrap();
            assert!((x - t_ion(q, 3.0, 1.0).unwrap()).abs() < 1e-14 * x);
        }
    }

    #[test]
    fn composition_identity_and_monotonicity() {
        for q in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let ti = t_ion(q, 2.0, 1.0).unwrap();
            let mut prev = 0.0;
            for i in 1..=100 {
                let u = 2.0 * i as f64 / 100.0;
                let t = hydrogen_t(u, q, 2.0, 1.0).unwrap();
                let composed = ti * (u / 2.0).powf((1.0 - q) / q);
                assert!((t / composed - 1.0).abs() < 1e-12);
                assert!(t > prev);
                prev = t;
            }
        }
    }

    #[test]
    fn specific_heat_at_half() {
        let k = 0.37;
        let h = 1e-4;
        let (u, e) = (0.8, 2.0);
        let dt = (hydrogen_t(u + h, 0.5, e, k).unwrap() - hydrogen_t(u - h, 0.5, e, k).unwrap())
            / (2.0 * h);
        assert!((1.0 / dt - k).abs() < 1e-8);
    }

    #[test]
    fn fraction_examples() {
        assert!((ionized_fraction_from_rhs(1000.0) - 0.999).abs() < 1e-5);
        assert!(ionized_fraction_from_rhs(1e-300) < 1e-149);
        assert!((ionized_fraction_from_rhs(2.0) - (3f64.sqrt() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn printed_sign_is_not_monotone_at_low_density() {
        assert!(saha_t_ion_with(1e13, 0.999, SahaSign::Printed).is_err());
        let s = saha_t_ion(1e13, 0.999).unwrap();
        assert_eq!(s.sign, SahaSign::Conventional);
    }

    #[test]
    fn roundtrip_and_range() {
        for eta in [1e13, 1e18, 1e27] {
            let s = saha_t_ion_with(eta, 0.999, SahaSign::Conventional).unwrap();
            let cond = SahaConditions::hydrogen(eta, SahaSign::Conventional);
            let x = saha_ionized_fraction(s.temperature, &cond).unwrap();
            assert!((x - 0.999).abs() < 1e-9);
        }
        let rows = saha_sweep(1e13, 1e27, 15, 0.999).unwrap();
        assert!(rows.iter().all(|r| r.sign == SahaSign::Conventional));
        let (lo, hi) = (rows[0].temperature, rows[14].temperature);
        assert!(
            (lo / 6.2e3 - 1.0).abs() < 0.1 && (hi / 6.5e5 - 1.0).abs() < 0.1,
            "{lo} {hi}"
        );
        let ti = t_ion(0.5, E_ION_EV, K_B_EV).unwrap();
        assert!(ti > lo && ti < hi);
    }
}
