//! Energy spectra: explicit level lists and the four analytic families.

mod summation;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use summation::{DIRECT_LIMIT, INDEX_LIMIT};

/// Largest spectrum that [`Spectrum::levels`] will materialize.
pub const MATERIALIZE_LIMIT: u64 = 1 << 21;

/// One distinct energy level and its degeneracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub energy: f64,
    pub degeneracy: u64,
}

/// Analytic spectrum families. Level indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `e_n = (n-1) e_max / (N-1)`, `g_n = m`.
    Uniform { e_max: f64, m: u64 },
    /// `e_n = (n-1) hbar_omega`, `g_n = 1`.
    Oscillator { hbar_omega: f64 },
    /// `e_n = (n^2-1) gamma`, `g_n = 1`.
    #[serde(rename = "box")]
    ParticleBox { gamma: f64 },
    /// `e_n = (1 - 1/n^2) e_ion`, `g_n = 2 n^2`.
    Hydrogen { e_ion: f64 },
}

impl Family {
    fn validate(&self) -> Result<()> {
        let (name, v) = match *self {
            Family::Uniform { e_max, m } => {
                if m == 0 {
                    return Err(Error::InvalidSpectrum("degeneracy m must be >= 1".into()));
                }
                ("e_max", e_max)
            }
            Family::Oscillator { hbar_omega } => ("hbar_omega", hbar_omega),
            Family::ParticleBox { gamma } => ("gamma", gamma),
            Family::Hydrogen { e_ion } => ("e_ion", e_ion),
        };
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidSpectrum(format!(
                "{name} must be positive, got {v}"
            )))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Uniform { .. } => "uniform",
            Family::Oscillator { .. } => "oscillator",
            Family::ParticleBox { .. } => "box",
            Family::Hydrogen { .. } => "hydrogen",
        }
    }

    /// Energy at a (possibly fractional) index `x` of an `n`-level truncation.
    #[inline]
    pub fn energy(&self, x: f64, n: u64) -> f64 {
        match *self {
            Family::Uniform { e_max, .. } => (x - 1.0) * e_max / (n - 1) as f64,
            Family::Oscillator { hbar_omega } => (x - 1.0) * hbar_omega,
            Family::ParticleBox { gamma } => (x * x - 1.0) * gamma,
            Family::Hydrogen { e_ion } => (1.0 - 1.0 / (x * x)) * e_ion,
        }
    }

    #[inline]
    pub fn degeneracy(&self, x: f64) -> f64 {
        match *self {
            Family::Uniform { m, .. } => m as f64,
            Family::Oscillator { .. } | Family::ParticleBox { .. } => 1.0,
            Family::Hydrogen { .. } => 2.0 * x * x,
        }
    }

    /// Total microstate count of the `n`-level truncation.
    pub fn microstates(&self, n: u64) -> f64 {
        let nf = n as f64;
        match *self {
            Family::Uniform { m, .. } => m as f64 * nf,
            Family::Oscillator { .. } | Family::ParticleBox { .. } => nf,
            Family::Hydrogen { .. } => nf * (nf + 1.0) * (2.0 * nf + 1.0) / 3.0,
        }
    }

    /// The scale-factor exponent under which `k_s` has an `N`-independent
    /// or convergent form for this family.
    pub fn natural_sigma(&self) -> f64 {
        match self {
            Family::ParticleBox { .. } => 2.0,
            _ => 1.0,
        }
    }

    /// Ionization energy or level spacing: the natural energy unit.
    pub fn energy_unit(&self) -> f64 {
        match *self {
            Family::Uniform { e_max, .. } => e_max,
            Family::Oscillator { hbar_omega } => hbar_omega,
            Family::ParticleBox { gamma } => gamma,
            Family::Hydrogen { e_ion } => e_ion,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Family::Uniform { e_max, m } => format!("uniform(e_max={e_max}, m={m})"),
            Family::Oscillator { hbar_omega } => format!("oscillator(hbar_omega={hbar_omega})"),
            Family::ParticleBox { gamma } => format!("box(gamma={gamma})"),
            Family::Hydrogen { e_ion } => format!("hydrogen(e_ion={e_ion})"),
        }
    }
}

/// `e_t < U <= e_{t+1}` with `t` 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergySplit {
    pub u: f64,
    pub t: u64,
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Explicit(Vec<Level>),
    Family { family: Family, n: u64 },
}

/// A finite spectrum: `N >= 2` strictly increasing levels starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    repr: Repr,
}

/// Sources of energy levels that the solver can sum over.
pub trait LevelSource: Sync {
    /// Number of levels, `None` if unbounded.
    fn level_count(&self) -> Option<u64>;
    /// Highest level, `None` if unbounded.
    fn e_top(&self) -> Option<f64>;
    /// Energy of level `n` (1-based).
    fn energy(&self, n: u64) -> f64;
    /// Degeneracy of level `n` as a float (it may exceed `u64`).
    fn degeneracy(&self, n: u64) -> f64;
    /// Sums `f(e_n, g_n)` over all levels in ascending order.
    fn sum<const K: usize, F>(&self, f: F) -> Result<[f64; K]>
    where
        F: Fn(f64, f64) -> [f64; K] + Sync;
    fn label(&self) -> String;
}

impl Spectrum {
    fn family(family: Family, n: u64) -> Result<Self> {
        family.validate()?;
        if n < 2 {
            return Err(Error::InvalidSpectrum(format!(
                "need N >= 2 levels, got {n}"
            )));
        }
        if n > INDEX_LIMIT {
            return Err(Error::TooLarge {
                levels: n,
                limit: INDEX_LIMIT,
            });
        }
        Ok(Spectrum {
            repr: Repr::Family { family, n },
        })
    }

    pub fn uniform_grid(n: u64, e_max: f64, m: u64) -> Result<Self> {
        Self::family(Family::Uniform { e_max, m }, n)
    }

    pub fn oscillator(n: u64, hbar_omega: f64) -> Result<Self> {
        Self::family(Family::Oscillator { hbar_omega }, n)
    }

    pub fn particle_box(n: u64, gamma: f64) -> Result<Self> {
        Self::family(Family::ParticleBox { gamma }, n)
    }

    pub fn hydrogen(n: u64, e_ion: f64) -> Result<Self> {
        Self::family(Family::Hydrogen { e_ion }, n)
    }

    /// Builds a truncation of `family` with `n` levels.
    pub fn from_family(family: Family, n: u64) -> Result<Self> {
        Self::family(family, n)
    }

    /// Custom spectrum; checks `e_1 = 0`, strict increase and `g >= 1`.
    pub fn from_levels(levels: Vec<Level>) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::InvalidSpectrum(format!(
                "need N >= 2 levels, got {}",
                levels.len()
            )));
        }
        if levels[0].energy != 0.0 {
            return Err(Error::InvalidSpectrum(format!(
                "ground level must be 0, got {}",
                levels[0].energy
            )));
        }
        for (i, l) in levels.iter().enumerate() {
            if l.degeneracy == 0 {
                return Err(Error::InvalidSpectrum(format!(
                    "level {} has degeneracy 0",
                    i + 1
                )));
            }
            if !l.energy.is_finite() {
                return Err(Error::InvalidSpectrum(format!(
                    "level {} is not finite",
                    i + 1
                )));
            }
            if i > 0 && !(l.energy > levels[i - 1].energy) {
                return Err(Error::InvalidSpectrum(format!(
                    "levels must strictly increase (level {})",
                    i + 1
                )));
            }
        }
        Ok(Spectrum {
            repr: Repr::Explicit(levels),
        })
    }

    /// Family tag and parameters, for provenance in output files.
    pub fn label(&self) -> String {
        LevelSource::label(self)
    }

    /// Number of distinct levels `N`.
    pub fn len(&self) -> u64 {
        match &self.repr {
            Repr::Explicit(l) => l.len() as u64,
            Repr::Family { n, .. } => *n,
        }
    }

    /// Always false: a spectrum has at least two levels.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn family_kind(&self) -> Option<Family> {
        match self.repr {
            Repr::Family { family, .. } => Some(family),
            Repr::Explicit(_) => None,
        }
    }

    /// Level `n` (1-based). Panics when `n` is out of range or the
    /// degeneracy does not fit in `u64`.
    pub fn level(&self, n: u64) -> Level {
        assert!(n >= 1 && n <= self.len(), "level {n} out of range");
        match &self.repr {
            Repr::Explicit(l) => l[(n - 1) as usize],
            Repr::Family { family, n: total } => {
                let g = match *family {
                    Family::Uniform { m, .. } => m,
                    Family::Oscillator { .. } | Family::ParticleBox { .. } => 1,
                    Family::Hydrogen { .. } => n
                        .checked_mul(n)
                        .and_then(|v| v.checked_mul(2))
                        .expect("degeneracy overflows u64"),
                };
                Level {
                    energy: family.energy(n as f64, *total),
                    degeneracy: g,
                }
            }
        }
    }

    /// All levels as a vector, refused beyond [`MATERIALIZE_LIMIT`].
    pub fn levels(&self) -> Result<Vec<Level>> {
        let n = self.len();
        if n > MATERIALIZE_LIMIT {
            return Err(Error::TooLarge {
                levels: n,
                limit: MATERIALIZE_LIMIT,
            });
        }
        Ok((1..=n).map(|i| self.level(i)).collect())
    }

    pub fn e_max(&self) -> f64 {
        match &self.repr {
            Repr::Explicit(l) => l[l.len() - 1].energy,
            Repr::Family { family, n } => family.energy(*n as f64, *n),
        }
    }

    /// Total microstate count `W`.
    pub fn microstates(&self) -> f64 {
        match &self.repr {
            Repr::Explicit(l) => l.iter().map(|x| x.degeneracy as f64).sum(),
            Repr::Family { family, n } => family.microstates(*n),
        }
    }

    /// The unique `t` with `e_t < U <= e_{t+1}`.
    pub fn split(&self, u: f64) -> Result<EnergySplit> {
        let e_max = self.e_max();
        if !(u > 0.0 && u < e_max) {
            return Err(Error::EnergyOutOfRange { u, e_max });
        }
        // invariant: e_lo < u <= e_hi
        let (mut lo, mut hi) = (1u64, self.len());
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if LevelSource::energy(self, mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(EnergySplit { u, t: lo })
    }

    /// `sum_n g_n (e_n - U)`; positive means the structural parameter is positive.
    pub fn beta_positivity_margin(&self, u: f64) -> Result<f64> {
        self.split(u)?;
        let [m] = LevelSource::sum(self, |e, g| [g * (e - u)])?;
        Ok(m)
    }
}

impl LevelSource for Spectrum {
    fn level_count(&self) -> Option<u64> {
        Some(self.len())
    }

    fn e_top(&self) -> Option<f64> {
        Some(self.e_max())
    }

    fn energy(&self, n: u64) -> f64 {
        match &self.repr {
            Repr::Explicit(l) => l[(n - 1) as usize].energy,
            Repr::Family { family, n: total } => family.energy(n as f64, *total),
        }
    }

    fn degeneracy(&self, n: u64) -> f64 {
        match &self.repr {
            Repr::Explicit(l) => l[(n - 1) as usize].degeneracy as f64,
            Repr::Family { family, .. } => family.degeneracy(n as f64),
        }
    }

    fn sum<const K: usize, F>(&self, f: F) -> Result<[f64; K]>
    where
        F: Fn(f64, f64) -> [f64; K] + Sync,
    {
        match &self.repr {
            Repr::Explicit(levels) => {
                let mut acc = crate::numeric::KahanArray::<K>::new();
                for l in levels {
                    acc.add(f(l.energy, l.degeneracy as f64));
                }
                Ok(acc.value())
            }
            Repr::Family { family, n } => {
                let total = *n;
                let level = |x: f64| (family.energy(x, total), family.degeneracy(x));
                summation::family_sum(Some(total), &level, &f)
            }
        }
    }

    fn label(&self) -> String {
        match &self.repr {
            Repr::Explicit(l) => {
                let body: Vec<String> = l
                    .iter()
                    .map(|x| format!("{}:{}", x.energy, x.degeneracy))
                    .collect();
                format!("levels({})", body.join(","))
            }
            Repr::Family { family, n } => {
                let mut s = family.label();
                s.insert_str(s.len() - 1, &format!(", N={n}"));
                s
            }
        }
    }
}

/// The full infinite spectrum of the oscillator or the box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnboundedSpectrum {
    family: Family,
}

impl UnboundedSpectrum {
    pub fn new(family: Family) -> Result<Self> {
        family.validate()?;
        match family {
            Family::Oscillator { .. } | Family::ParticleBox { .. } => {
                Ok(UnboundedSpectrum { family })
            }
            _ => Err(Error::InvalidSpectrum(format!(
                "{} has no usable unbounded form",
                family.name()
            ))),
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }
}

impl LevelSource for UnboundedSpectrum {
    fn level_count(&self) -> Option<u64> {
        None
    }

    fn e_top(&self) -> Option<f64> {
        None
    }

    fn energy(&self, n: u64) -> f64 {
        self.family.energy(n as f64, 0)
    }

    fn degeneracy(&self, n: u64) -> f64 {
        self.family.degeneracy(n as f64)
    }

    fn sum<const K: usize, F>(&self, f: F) -> Result<[f64; K]>
    where
        F: Fn(f64, f64) -> [f64; K] + Sync,
    {
        let family = self.family;
        let level = |x: f64| (family.energy(x, 0), family.degeneracy(x));
        summation::family_sum(None, &level, &f)
    }

    fn label(&self) -> String {
        let mut s = self.family.label();
        s.insert_str(s.len() - 1, ", N=inf");
        s
    }
}

/// Serializable spectrum description: a family with `n`, or explicit levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpectrumSpec {
    Levels {
        levels: Vec<(f64, u64)>,
    },
    Family {
        #[serde(flatten)]
        family: Family,
        n: u64,
    },
}

impl SpectrumSpec {
    pub fn build(&self) -> Result<Spectrum> {
        match self {
            SpectrumSpec::Levels { levels } => Spectrum::from_levels(
                levels
                    .iter()
                    .map(|&(energy, degeneracy)| Level { energy, degeneracy })
                    .collect(),
            ),
            SpectrumSpec::Family { family, n } => Spectrum::from_family(*family, *n),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn energies(s: &Spectrum) -> Vec<f64> {
        s.levels().unwrap().iter().map(|l| l.energy).collect()
    }

    #[test]
    fn uniform_examples() {
        let s = Spectrum::uniform_grid(2, 5.0, 1).unwrap();
        assert_eq!(
            s.levels().unwrap(),
            vec![
                Level {
                    energy: 0.0,
                    degeneracy: 1
                },
                Level {
                    energy: 5.0,
                    degeneracy: 1
                }
            ]
        );
        assert_eq!(
            Spectrum::uniform_grid(5, 1.0, 1).unwrap().level(3).energy,
            0.5
        );
        assert_eq!(
            Spectrum::uniform_grid(4, 1.0, 3).unwrap().microstates(),
            12.0
        );
    }

    #[test]
    fn oscillator_examples() {
        assert_eq!(
            energies(&Spectrum::oscillator(3, 1.0).unwrap()),
            vec![0.0, 1.0, 2.0]
        );
        let s = Spectrum::oscillator(50, 0.7).unwrap();
        assert_eq!(s.level(2).energy, 0.7);
        assert!(s.levels().unwrap().iter().all(|l| l.degeneracy == 1));
    }

    #[test]
    fn box_examples() {
        assert_eq!(
            energies(&Spectrum::particle_box(2, 1.0).unwrap()),
            vec![0.0, 3.0]
        );
        assert_eq!(
            Spectrum::particle_box(10, 0.25).unwrap().level(2).energy,
            0.75
        );
        assert_eq!(Spectrum::particle_box(4, 0.5).unwrap().e_max(), 7.5);
    }

    #[test]
    fn hydrogen_examples() {
        let s = Spectrum::hydrogen(10, 13.6).unwrap();
        assert!((s.level(2).energy - 10.2).abs() < 1e-12);
        assert_eq!(s.level(3).degeneracy, 18);
        let s = Spectrum::hydrogen(2, 1.0).unwrap();
        assert_eq!(
            s.levels().unwrap(),
            vec![
                Level {
                    energy: 0.0,
                    degeneracy: 2
                },
                Level {
                    energy: 0.75,
                    degeneracy: 8
                }
            ]
        );
        let s = Spectrum::hydrogen(7, 1.0).unwrap();
        let direct: u64 = s.levels().unwrap().iter().map(|l| l.degeneracy).sum();
        assert_eq!(s.microstates(), direct as f64);
    }

    #[test]
    fn split_examples() {
        let s = Spectrum::uniform_grid(5, 1.0, 1).unwrap();
        assert_eq!(s.split(0.5).unwrap().t, 2);
        let s = Spectrum::oscillator(10, 1.0).unwrap();
        assert_eq!(s.split(2.5).unwrap().t, 3);
        for n in 2..10 {
            assert_eq!(s.split((n - 1) as f64).unwrap().t, n - 1);
        }
        assert!(matches!(s.split(0.0), Err(Error::EnergyOutOfRange { .. })));
        assert!(s.split(9.0).is_err());
        assert!(s.split(8.999).is_ok());
    }

    #[test]
    fn margin_examples() {
        let s = Spectrum::from_levels(vec![
            Level {
                energy: 0.0,
                degeneracy: 1,
            },
            Level {
                energy: 1.0,
                degeneracy: 1,
            },
        ])
        .unwrap();
        assert_eq!(s.beta_positivity_margin(0.5).unwrap(), 0.0);
        let (hw, u) = (1.0, 1.5);
        for n in [5u64, 40, 1000] {
            let s = Spectrum::oscillator(n, hw).unwrap();
            let nf = n as f64;
            let closed = nf * (nf - 1.0) / 2.0 * hw - u * nf;
            assert!(
                (s.beta_positivity_margin(u).unwrap() - closed).abs()
                    < 1e-9 * closed.abs().max(1.0)
            );
        }
        let s = Spectrum::hydrogen(200, 13.6).unwrap();
        assert!(s.beta_positivity_margin(13.0).unwrap() > 0.0);
    }

    #[test]
    fn margin_increases_with_n() {
        let mk: [fn(u64) -> Spectrum; 3] = [
            |n| Spectrum::oscillator(n, 1.0).unwrap(),
            |n| Spectrum::particle_box(n, 1.0).unwrap(),
            |n| Spectrum::hydrogen(n, 1.0).unwrap(),
        ];
        for make in mk {
            let mut prev = f64::NEG_INFINITY;
            for n in 2..300 {
                let m = make(n).beta_positivity_margin(0.5).unwrap();
                if prev > 0.0 {
                    assert!(m > prev);
                }
                prev = m;
            }
        }
    }

    #[test]
    fn uniform_scale_factor_limit() {
        let (q, k, e_max, m) = (0.6, 1.3, 30.0, 2u64);
        let n = 100_000u64;
        let s = Spectrum::uniform_grid(n, e_max, m).unwrap();
        let p = crate::qmath::EntropicParams::new(q, k, 1.0).unwrap();
        let ks = crate::qmath::scale_factor(&p, s.e_max(), s.microstates()).unwrap();
        let ratio =
            e_max.powf(1.0 - q) / (((n - 1) as f64).powf(1.0 - q) * (m as f64).powf(1.0 - q) * ks);
        assert!((ratio * k.powf(q) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn invalid_spectra_rejected() {
        let lv = |v: &[(f64, u64)]| {
            Spectrum::from_levels(
                v.iter()
                    .map(|&(e, g)| Level {
                        energy: e,
                        degeneracy: g,
                    })
                    .collect(),
            )
        };
        assert!(lv(&[(0.0, 1)]).is_err());
        assert!(lv(&[(0.1, 1), (1.0, 1)]).is_err());
        assert!(lv(&[(0.0, 1), (0.0, 1)]).is_err());
        assert!(lv(&[(0.0, 0), (1.0, 1)]).is_err());
        assert!(Spectrum::oscillator(1, 1.0).is_err());
        assert!(Spectrum::particle_box(5, -1.0).is_err());
        assert!(Spectrum::uniform_grid(5, 1.0, 0).is_err());
    }

    #[test]
    fn long_family_sums_match_closed_forms() {
        let n = 1u64 << 30;
        let s = Spectrum::hydrogen(n, 1.0).unwrap();
        let [w] = LevelSource::sum(&s, |_e, g| [g]).unwrap();
        assert!((w / s.microstates() - 1.0).abs() < 1e-13);
        let s = Spectrum::uniform_grid(n, 2.0, 3).unwrap();
        let [mean] = LevelSource::sum(&s, |e, g| [g * e]).unwrap();
        assert!((mean / (3.0 * n as f64) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn spec_roundtrip() {
        let spec = SpectrumSpec::Family {
            family: Family::ParticleBox { gamma: 0.5 },
            n: 4,
        };
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"family\":\"box\""));
        let back: SpectrumSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        assert_eq!(back.build().unwrap().e_max(), 7.5);
        let lv: SpectrumSpec = serde_json::from_str(r#"{"levels": [[0.0, 1], [0.5, 2]]}"#).unwrap();
        assert_eq!(lv.build().unwrap().microstates(), 3.0);
    }

    proptest! {
        #[test]
        fn families_start_at_zero_and_increase(
            n in 2u64..10_000,
            scale in 1e-3f64..1e3,
            which in 0usize..4,
        ) {
            let s = match which {
                0 => Spectrum::uniform_grid(n, scale, 2),
                1 => Spectrum::oscillator(n, scale),
                2 => Spectrum::particle_box(n, scale),
                _ => Spectrum::hydrogen(n, scale),
            }.unwrap();
            let lv = s.levels().unwrap();
            prop_assert_eq!(lv[0].energy, 0.0);
            for w in lv.windows(2) {
                prop_assert!(w[1].energy > w[0].energy);
            }
            prop_assert!(lv.iter().all(|l| l.degeneracy >= 1));
        }
    }
}
