//! Datasets behind the seven figures, as `(x, y, series)` tables.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hydrogen_saha::{constants, hydrogen_t, t_ion};
use crate::limits::{continuum_temperature, continuum_ut, density_curve, limit_solve};
use crate::oracle::value_curve;
use crate::output::{Cell, Table};
use crate::qmath::{scale_factor, EntropicParams};
use crate::solver::SolveOptions;
use crate::spectra::{Family, Level, Spectrum};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FigureOptions {
    /// Samples per series.
    pub points: usize,
    /// Replaces the default `q` series when set.
    pub qs: Option<Vec<f64>>,
}

impl Default for FigureOptions {
    fn default() -> Self {
        FigureOptions {
            points: 101,
            qs: None,
        }
    }
}

/// Default `q` series of each figure.
pub fn default_qs(id: u8) -> Vec<f64> {
    match id {
        1 => vec![0.2, 0.3, 0.8, 1.0],
        2..=5 => vec![0.6, 0.8, 0.95, 1.0],
        6 => vec![0.3, 0.5, 0.7],
        _ => Vec::new(),
    }
}

fn series(q: f64) -> String {
    format!("q={q}")
}

fn xy_table() -> Table {
    Table::new(&["x", "y", "series"])
}

fn push(t: &mut Table, x: f64, y: f64, s: &str) {
    t.push(vec![Cell::Num(x), Cell::Num(y), Cell::from(s)]);
}

/// `points` values evenly spaced over `(a, b]`, or `[a, b]` when `closed`.
fn grid(a: f64, b: f64, points: usize, closed: bool) -> Vec<f64> {
    let n = points.max(2);
    if closed {
        (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect()
    } else {
        (1..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
    }
}

pub fn figure(id: u8, opts: &FigureOptions) -> Result<Table> {
    if opts.points < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 points, got {}",
            opts.points
        )));
    }
    let qs = opts.qs.clone().unwrap_or_else(|| default_qs(id));
    match id {
        1 => value_curves(&qs, opts.points),
        2 => continuum_ut_lines(&qs, opts.points),
        3 => densities(&qs, opts.points),
        4 => unbounded_ut(Family::Oscillator { hbar_omega: 1.0 }, &qs, opts.points),
        5 => unbounded_ut(Family::ParticleBox { gamma: 1.0 }, &qs, opts.points),
        6 => hydrogen_ut(&qs, opts.points),
        7 => ionization_temperature(opts.points),
        _ => Err(Error::Domain(format!("figure id must be 1 to 7, got {id}"))),
    }
}

/// Maximized entropy against `U` on the levels `0, 1/2, 1`.
fn value_curves(qs: &[f64], points: usize) -> Result<Table> {
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
    let us = grid(0.0, 1.0, points, true);
    let mut t = xy_table();
    for &q in qs {
        let k_s = scale_factor(
            &EntropicParams::unit(q)?,
            spectrum.e_max(),
            spectrum.microstates(),
        )?;
        for (u, s) in value_curve(&spectrum, q, k_s, &us)? {
            push(&mut t, u, s, &series(q));
        }
    }
    Ok(t)
}

/// Continuum `T(U)` lines, plus sweep-extrapolated points on a fine uniform grid.
fn continuum_ut_lines(qs: &[f64], points: usize) -> Result<Table> {
    let us = grid(0.0, 3.0, points, false);
    let mut t = xy_table();
    for &q in qs {
        for &u in &us {
            push(&mut t, u, continuum_temperature(u, q, 1.0)?, &series(q));
        }
    }
    for &q in qs {
        for (u, temp) in continuum_ut(q, &[0.5, 1.0, 1.5, 2.0])? {
            push(&mut t, u, temp, &format!("q={q} sweep"));
        }
    }
    Ok(t)
}

fn densities(qs: &[f64], points: usize) -> Result<Table> {
    let es = grid(0.0, 10.0, points, true);
    let mut t = xy_table();
    for &q in qs {
        for (e, rho) in density_curve(1.0, q, 1.0, &es)?.samples {
            push(&mut t, e, rho, &series(q));
        }
    }
    Ok(t)
}

/// `T(U)` of the full oscillator or box with unit level spacing and `k = 1`.
fn unbounded_ut(family: Family, qs: &[f64], points: usize) -> Result<Table> {
    let us = grid(0.0, 3.0, points, false);
    let opts = SolveOptions::default();
    let mut t = xy_table();
    for &q in qs {
        let temps: Vec<Result<f64>> = us
            .par_iter()
            .map(|&u| {
                let s = limit_solve(family, u, q, 1.0, &opts)?;
                s.temperature.ok_or(Error::InfiniteTemperature)
            })
            .collect();
        for (&u, temp) in us.iter().zip(temps) {
            push(&mut t, u, temp?, &series(q));
        }
    }
    Ok(t)
}

fn hydrogen_ut(qs: &[f64], points: usize) -> Result<Table> {
    let us = grid(0.0, 1.0, points, false);
    let mut t = xy_table();
    for &q in qs {
        // U = e_ion itself is the ionization point
        for &u in &us[..us.len() - 1] {
            push(&mut t, u, hydrogen_t(u, q, 1.0, 1.0)?, &series(q));
        }
        push(&mut t, 1.0, t_ion(q, 1.0, 1.0)?, &series(q));
    }
    Ok(t)
}

/// `log10 T_ion(q)` in kelvin for hydrogen.
fn ionization_temperature(points: usize) -> Result<Table> {
    let mut t = xy_table();
    for i in 1..=points {
        let q = i as f64 / (points + 1) as f64;
        let temp = t_ion(q, constants::E_ION_EV, constants::K_B_EV)?;
        push(&mut t, q, temp.log10(), "log10 T_ion");
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column(t: &Table, series: &str) -> Vec<(f64, f64)> {
        t.rows
            .iter()
            .filter(|r| r[2] == Cell::from(series))
            .map(|r| match (&r[0], &r[1]) {
                (Cell::Num(x), Cell::Num(y)) => (*x, *y),
                _ => panic!("non-numeric cell"),
            })
            .collect()
    }

    fn small() -> FigureOptions {
        FigureOptions {
            points: 21,
            qs: None,
        }
    }

    #[test]
    fn value_curves_vanish_at_the_ends() {
        let t = figure(1, &small()).unwrap();
        for q in default_qs(1) {
            let c = column(&t, &series(q));
            assert_eq!(c.len(), 21);
            assert!(c[0].1.abs() < 1e-12 && c[20].1.abs() < 1e-12, "q={q}");
            assert!(c[10].1 > 0.0);
        }
    }

    #[test]
    fn hydrogen_half_is_identity() {
        let t = figure(6, &small()).unwrap();
        for (u, temp) in column(&t, "q=0.5") {
            assert!((temp - u).abs() < 1e-12 * u.max(1e-300), "{u} {temp}");
        }
    }

    #[test]
    fn density_closest_to_exponential_at_q_095() {
        let t = figure(3, &small()).unwrap();
        let classical = column(&t, "q=1");
        let distance = |q: &str| -> f64 {
            column(&t, q)
                .iter()
                .zip(&classical)
                .map(|(a, b)| (a.1 - b.1).abs())
                .sum()
        };
        let d = [distance("q=0.6"), distance("q=0.8"), distance("q=0.95")];
        assert!(d[2] < d[1] && d[1] < d[0], "{d:?}");
    }

    #[test]
    fn oscillator_classical_series_matches_closed_form() {
        let opts = FigureOptions {
            points: 11,
            qs: Some(vec![1.0]),
        };
        let t = figure(4, &opts).unwrap();
        for (u, temp) in column(&t, "q=1") {
            let exact = 1.0 / ((1.0 + u) / u).ln();
            assert!((temp / exact - 1.0).abs() < 1e-9, "{u}: {temp} vs {exact}");
        }
    }

    #[test]
    fn box_temperatures_increase() {
        let opts = FigureOptions {
            points: 11,
            qs: Some(vec![0.6, 1.0]),
        };
        let t = figure(5, &opts).unwrap();
        for s in ["q=0.6", "q=1"] {
            let c = column(&t, s);
            assert!(c.windows(2).all(|w| w[1].1 > w[0].1), "{s}: {c:?}");
        }
    }

    #[test]
    fn ionization_temperature_at_half() {
        let opts = FigureOptions {
            points: 1,
            qs: None,
        };
        assert!(figure(7, &opts).is_err());
        let t = figure(
            7,
            &FigureOptions {
                points: 99,
                qs: None,
            },
        )
        .unwrap();
        let c = column(&t, "log10 T_ion");
        let half = c.iter().find(|p| (p.0 - 0.5).abs() < 1e-12).unwrap();
        assert!((half.1 - 1.578e5f64.log10()).abs() < 1e-3);
        assert!(c.windows(2).all(|w| w[1].1 < w[0].1));
    }

    #[test]
    fn unknown_figure() {
        assert!(figure(8, &small()).unwrap_err().is_domain());
    }
}
