//! Run configuration: TOML file values overlaid by command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qmaxent::{Family, Level, SpectrumSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Uniform,
    Oscillator,
    Box,
    Hydrogen,
}

/// Everything a run depends on. Absent fields take command defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    /// A family with `n` levels, or explicit levels.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    /// `q` series for figures.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Explicit truncations for a sweep; overrides `n0` and the spectrum's `n`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n0: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail: Option<usize>,
    /// Rows of `p` printed by `solve` (0 for all).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub head: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub figure: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_max: Option<f64>,
    /// Target ionized fraction for `saha`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criteria: Option<Vec<u8>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Debug)]
pub enum ConfigError {
    Io(PathBuf, std::io::Error),
    Parse(PathBuf, String),
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(p, e) => write!(f, "cannot read {}: {e}", p.display()),
            ConfigError::Parse(p, e) => write!(f, "cannot parse {}: {e}", p.display()),
            ConfigError::Invalid(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for ConfigError {}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($field:ident),* $(,)?) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field.clone(); } )*
    };
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
        Self::from_toml_str(&text).map_err(|e| ConfigError::Parse(path.to_path_buf(), e))
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overlay(&mut self, other: &RunConfig) {
        overlay!(self, other; command, spectrum, u, q, qs, sigma, k, tol, schedule, n0, tail, head,
            figure, points, eta_min, eta_max, x, criteria, output, format);
    }

    /// The config as recorded in output files: without the output path,
    /// which does not affect the numbers.
    pub fn recorded(&self) -> RunConfig {
        RunConfig {
            output: None,
            ..self.clone()
        }
    }

    pub fn require_u(&self) -> Result<f64, ConfigError> {
        self.u
            .ok_or_else(|| ConfigError::Invalid("missing --u".into()))
    }

    pub fn require_q(&self) -> Result<f64, ConfigError> {
        self.q
            .ok_or_else(|| ConfigError::Invalid("missing --q".into()))
    }

    pub fn require_spectrum(&self) -> Result<&SpectrumSpec, ConfigError> {
        self.spectrum.as_ref().ok_or_else(|| {
            ConfigError::Invalid("missing spectrum: give --family, --levels or --spectrum".into())
        })
    }
}

/// `"e:g,e:g,..."`; a bare `e` means degeneracy 1.
pub fn parse_levels(text: &str) -> Result<Vec<Level>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (e, g) = match item.split_once(':') {
                Some((e, g)) => (e, g),
                None => (item, "1"),
            };
            let energy =
                f64::from_str(e.trim()).map_err(|err| format!("bad energy {e:?}: {err}"))?;
            let degeneracy =
                u64::from_str(g.trim()).map_err(|err| format!("bad degeneracy {g:?}: {err}"))?;
            Ok(Level { energy, degeneracy })
        })
        .collect()
}

/// Family parameters given as flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyFlags {
    pub kind: FamilyKind,
    pub e_max: Option<f64>,
    pub m: Option<u64>,
    pub hbar_omega: Option<f64>,
    pub gamma: Option<f64>,
    pub e_ion: Option<f64>,
}

/// Hydrogen defaults to 13.6 so `U` can be given in eV.
pub const DEFAULT_E_ION: f64 = 13.6;

impl FamilyFlags {
    pub fn family(&self) -> Family {
        match self.kind {
            FamilyKind::Uniform => Family::Uniform {
                e_max: self.e_max.unwrap_or(1.0),
                m: self.m.unwrap_or(1),
            },
            FamilyKind::Oscillator => Family::Oscillator {
                hbar_omega: self.hbar_omega.unwrap_or(1.0),
            },
            FamilyKind::Box => Family::ParticleBox {
                gamma: self.gamma.unwrap_or(1.0),
            },
            FamilyKind::Hydrogen => Family::Hydrogen {
                e_ion: self.e_ion.unwrap_or(DEFAULT_E_ION),
            },
        }
    }
}

/// Reads a spectrum file: JSON when the extension is `.json`, TOML otherwise.
pub fn load_spectrum(path: &Path) -> Result<SpectrumSpec, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| ConfigError::Parse(path.to_path_buf(), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![
            -1e300..1e300f64,
            -1.0..1.0f64,
            Just(0.0),
            Just(1.0 / 3.0),
            Just(5e-324)
        ]
    }

    fn spectrum() -> impl Strategy<Value = SpectrumSpec> {
        prop_oneof![
            proptest::collection::vec((finite(), 1..1000u64), 1..6)
                .prop_map(|levels| SpectrumSpec::Levels { levels }),
            (finite(), 1..5u64, 2..1_000_000u64).prop_map(|(e_max, m, n)| SpectrumSpec::Family {
                family: Family::Uniform { e_max, m },
                n
            }),
            (finite(), 2..1_000_000u64).prop_map(|(hbar_omega, n)| SpectrumSpec::Family {
                family: Family::Oscillator { hbar_omega },
                n
            }),
            (finite(), 2..1_000_000u64).prop_map(|(gamma, n)| SpectrumSpec::Family {
                family: Family::ParticleBox { gamma },
                n
            }),
            (finite(), 2..1_000_000u64).prop_map(|(e_ion, n)| SpectrumSpec::Family {
                family: Family::Hydrogen { e_ion },
                n
            }),
        ]
    }

    prop_compose! {
        fn config()(
            command in proptest::option::of("[a-z]{1,8}"),
            spectrum in proptest::option::of(spectrum()),
            u in proptest::option::of(finite()),
            q in proptest::option::of(finite()),
            qs in proptest::option::of(proptest::collection::vec(finite(), 0..4)),
            sigma in proptest::option::of(finite()),
            k in proptest::option::of(finite()),
            schedule in proptest::option::of(proptest::collection::vec(0..u64::MAX / 2, 0..4)),
            n0 in proptest::option::of(0..1_000_000u64),
            points in proptest::option::of(0..10_000usize),
            figure in proptest::option::of(1..8u8),
            x in proptest::option::of(finite()),
            output in proptest::option::of("[a-z]{1,8}(/[a-z]{1,8})?\\.csv"),
            format in proptest::option::of(prop_oneof![Just(Format::Csv), Just(Format::Json)]),
        ) -> RunConfig {
            RunConfig {
                command, spectrum, u, q, qs, sigma, k, schedule, n0, points, figure, x,
                output: output.map(PathBuf::from), format,
                ..RunConfig::default()
            }
        }
    }

    proptest! {
        #[test]
        fn toml_roundtrip(cfg in config()) {
            let text = toml::to_string(&cfg).unwrap();
            let back = RunConfig::from_toml_str(&text).unwrap();
            prop_assert_eq!(back, cfg, "{}", text);
        }
    }

    #[test]
    fn file_layout() {
        let cfg = RunConfig::from_toml_str(
            r#"
            u = 1.0
            q = 0.75
            format = "json"
            [spectrum]
            family = "uniform"
            e_max = 30.0
            m = 1
            n = 6001
            "#,
        )
        .unwrap();
        assert_eq!(
            cfg.spectrum,
            Some(SpectrumSpec::Family {
                family: Family::Uniform { e_max: 30.0, m: 1 },
                n: 6001
            })
        );
        assert_eq!(cfg.format, Some(Format::Json));
        let levels =
            RunConfig::from_toml_str("[spectrum]\nlevels = [[0.0, 1], [0.5, 2]]\n").unwrap();
        assert!(matches!(levels.spectrum, Some(SpectrumSpec::Levels { .. })));
        assert!(RunConfig::from_toml_str("bogus = 1").is_err());
    }

    #[test]
    fn overlay_prefers_flags() {
        let mut file = RunConfig {
            u: Some(1.0),
            q: Some(0.5),
            ..Default::default()
        };
        file.overlay(&RunConfig {
            q: Some(0.9),
            ..Default::default()
        });
        assert_eq!((file.u, file.q), (Some(1.0), Some(0.9)));
    }

    #[test]
    fn levels_flag() {
        let l = parse_levels("0:1, 0.5:2,1").unwrap();
        assert_eq!(l.len(), 3);
        assert_eq!((l[1].energy, l[1].degeneracy, l[2].degeneracy), (0.5, 2, 1));
        assert!(parse_levels("0:x").is_err());
    }
}
