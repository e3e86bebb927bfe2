//! Datasets behind the numbered figures.
//!
//! | id | files | columns |
//! |----|-------|---------|
//! | 1  | `fig1a`, `fig1b` | `delta,E2_down,E2_up,E2_pol`; steady-state table at Δ = 2 |
//! | 2  | `fig2`, `fig2_inset` | `delta,psi_opt,beta_minus_phi1`; `omega,q` at Δ = 0 |
//! | 3  | `fig3` | `delta,omega,q` for mode 1, ψ = 0, at the polarization threshold |
//! | 4  | `fig4` | `delta,q_opt,omega_opt` for mode 1, ψ = 0, at the polarization threshold |
//! | 5  | `fig5` | `delta,omega,q` for mode 2, ψ = π, at the upper-branch fold |
//! | 6  | `fig6` | `delta,q_opt,omega_opt` for mode 2, ψ = π, at the upper-branch fold |
//! | 7  | `fig7` | as 5, lower-branch fold |
//! | 8  | `fig8` | as 6, lower-branch fold |
//! | 9  | `fig9` | `delta,V3_up,omega_up,V3_down,omega_down` |
//! | 10 | `fig10` | `E2,branch,twin,I1,I2,S1n,S2n,S3n` at Δ = 1 |
//! | 11 | `fig11` | the `stokes` table at Δ = 1 |
//!
//! Everything except figures 10 and 11 is evaluated from the closed forms
//! exactly at the bifurcation intensity.

use std::f64::consts::PI;

use vkerr_core::squeeze::{analytic_bifurcation_q, minimize_over_frequency, psi_pol_opt, FrequencyOptimum, Mode};
use vkerr_core::steady::{bimode_states, bistability_range, polarization_threshold, singlemode_states};
use vkerr_core::stokes::{bifurcation_stokes, stokes_means};
use vkerr_core::{Error as CoreError, ModelParams, Result as CoreResult};

use crate::cli::{steady_table, stokes_table, PointArgs, Range};
use crate::output::{Cell, Table};
use crate::CliError;

/// Smallest frequency used when a closed form must be taken as a limit at
/// ω = 0.
const OMEGA_LIMIT: f64 = 1e-4;

pub fn figure(id: u32) -> Result<Vec<Table>, CliError> {
    Ok(match id {
        1 => vec![fig1a(), fig1b()?],
        2 => vec![fig2(), fig2_inset()?],
        3 => vec![spectra("fig3", Which::Pol, Mode::Parallel, 0.0, &[0.0, 2.0])?],
        4 => vec![optima("fig4", Which::Pol, Mode::Parallel, 0.0, &linspace(-5.0, 10.0, 151))?],
        5 => vec![spectra("fig5", Which::Up, Mode::Orthogonal, PI, &[1.8, 3.0])?],
        6 => vec![optima("fig6", Which::Up, Mode::Orthogonal, PI, &geomspace(3f64.sqrt(), 100.0, 121))?],
        7 => vec![spectra("fig7", Which::Down, Mode::Orthogonal, PI, &[2.0, 3.0])?],
        8 => vec![optima("fig8", Which::Down, Mode::Orthogonal, PI, &linspace(3f64.sqrt(), 10.0, 121))?],
        9 => vec![fig9(&linspace(3f64.sqrt(), 10.0, 121))?],
        10 => vec![fig10()?],
        11 => vec![fig11()?],
        _ => return Err(CliError::Config(format!("unknown figure id {id}; expected 1 to 11"))),
    })
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    Range { lo, hi, n }.values()
}

fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = linspace(lo.ln(), hi.ln(), n).into_iter().map(f64::exp).collect();
    v[0] = lo;
    v[n - 1] = hi;
    v
}

/// `delta,E2_down,E2_up,E2_pol`; empty cells where a bifurcation does not
/// exist.
pub fn bifurcation_curves(m: &ModelParams, deltas: &[f64]) -> Table {
    let mut t = Table::new("bifurcations", &["delta", "E2_down", "E2_up", "E2_pol"]);
    for &d in deltas {
        let mm = m.with_delta(d);
        let b = bistability_range(&mm);
        t.push(vec![
            d.into(),
            b.map(|b| b.lower.e2).into(),
            b.map(|b| b.upper.e2).into(),
            polarization_threshold(&mm).ok().map(|p| p.e2_pol).into(),
        ]);
    }
    t
}

fn fig1a() -> Table {
    let mut t = bifurcation_curves(&ModelParams::liquid(0.0, 0.0), &linspace(-2.0, 5.0, 141));
    t.name = "fig1a".into();
    t
}

fn fig1b() -> Result<Table, CliError> {
    let r = Some(Range {
        lo: 0.0,
        hi: 3.5,
        n: 141,
    });
    let mut t = steady_table(&ModelParams::liquid(2.0, 0.0), &r)?;
    t.name = "fig1b".into();
    Ok(t)
}

#[derive(Debug, Clone, Copy)]
enum Which {
    Pol,
    Up,
    Down,
}

fn intensity(which: Which, delta: f64) -> Result<f64, CliError> {
    let m = ModelParams::liquid(delta, 0.0);
    let i = match which {
        Which::Pol => polarization_threshold(&m).ok().map(|p| p.i_pol),
        Which::Up => bistability_range(&m).map(|b| b.i_plus),
        Which::Down => bistability_range(&m).map(|b| b.i_minus),
    };
    i.ok_or_else(|| CliError::Config(format!("no such bifurcation at delta = {delta}")))
}

/// Evaluates `f(ω)`, replacing a removable singularity by its limit.
fn limit_safe(f: impl Fn(f64) -> CoreResult<f64>, w: f64) -> CoreResult<f64> {
    match f(w) {
        Err(CoreError::LimitRequired) => f(w.max(OMEGA_LIMIT)),
        r => r,
    }
}

fn q_at(which: Which, mode: Mode, psi: f64, delta: f64) -> Result<impl Fn(f64) -> CoreResult<f64>, CliError> {
    let i = intensity(which, delta)?;
    let m = ModelParams::liquid(delta, 0.0);
    Ok(move |w: f64| limit_safe(|w| analytic_bifurcation_q(i, &m, mode, psi, w), w))
}

fn w_max(delta: f64) -> f64 {
    10.0 + 5.0 * delta.abs()
}

fn spectra(name: &str, which: Which, mode: Mode, psi: f64, deltas: &[f64]) -> Result<Table, CliError> {
    let mut t = Table::new(name, &["delta", "omega", "q"]);
    for &d in deltas {
        let q = q_at(which, mode, psi, d)?;
        for w in linspace(0.0, 5.0, 501) {
            t.push(vec![d.into(), w.into(), q(w)?.into()]);
        }
    }
    Ok(t)
}

fn optimum(which: Which, mode: Mode, psi: f64, delta: f64) -> Result<FrequencyOptimum, CliError> {
    Ok(minimize_over_frequency(q_at(which, mode, psi, delta)?, w_max(delta))?)
}

fn optima(name: &str, which: Which, mode: Mode, psi: f64, deltas: &[f64]) -> Result<Table, CliError> {
    let mut t = Table::new(name, &["delta", "q_opt", "omega_opt"]);
    for &d in deltas {
        let o = optimum(which, mode, psi, d)?;
        t.push(vec![d.into(), o.q_min.into(), o.omega.into()]);
    }
    Ok(t)
}

fn fig2() -> Table {
    let mut t = Table::new("fig2", &["delta", "psi_opt", "beta_minus_phi1"]);
    for d in linspace(-10.0, 10.0, 201) {
        let psi = psi_pol_opt(d);
        t.push(vec![d.into(), psi.into(), (psi / 2.0).into()]);
    }
    t
}

fn fig2_inset() -> Result<Table, CliError> {
    let q = q_at(Which::Pol, Mode::Orthogonal, psi_pol_opt(0.0), 0.0)?;
    let mut t = Table::new("fig2_inset", &["omega", "q"]);
    for w in linspace(0.0, 3.0, 301) {
        t.push(vec![w.into(), q(w)?.into()]);
    }
    Ok(t)
}

fn fig9(deltas: &[f64]) -> Result<Table, CliError> {
    let mut t = Table::new("fig9", &["delta", "V3_up", "omega_up", "V3_down", "omega_down"]);
    for &d in deltas {
        let m = ModelParams::liquid(d, 0.0);
        let mut row: Vec<Cell> = vec![d.into()];
        for which in [Which::Up, Which::Down] {
            let i = intensity(which, d)?;
            let v3 = |w: f64| limit_safe(|w| bifurcation_stokes(i, &m, w).map(|v| v.v_norm[3]), w);
            let o = minimize_over_frequency(v3, w_max(d))?;
            row.push(o.q_min.into());
            row.push(o.omega.into());
        }
        t.push(row);
    }
    Ok(t)
}

fn fig10() -> Result<Table, CliError> {
    let mut t = Table::new("fig10", &["E2", "branch", "twin", "I1", "I2", "S1n", "S2n", "S3n"]);
    for e2 in linspace(0.0, 8.0, 161) {
        let m = ModelParams::liquid(1.0, e2);
        let mut states: Vec<_> = bimode_states(&m).into_iter().filter(|s| s.is_stable()).collect();
        if states.is_empty() {
            states = singlemode_states(&m)?.into_iter().filter(|s| s.is_stable()).collect();
        }
        for s in states {
            let means = stokes_means(&s);
            let mut row: Vec<Cell> = vec![e2.into(), s.branch.name().into(), s.phase_partner.into(), s.i1.into(), s.i2.into()];
            for k in 1..=3 {
                let r = (means.s0 != 0.0).then(|| means.as_array()[k] / means.s0);
                row.push(r.into());
            }
            t.push(row);
        }
    }
    Ok(t)
}

fn fig11() -> Result<Table, CliError> {
    let point = PointArgs {
        at_bifurcation: None,
        epsilon: 0.0,
        state: None,
    };
    let r = Some(Range {
        lo: 2.1,
        hi: 8.0,
        n: 119,
    });
    let mut t = stokes_table(&ModelParams::liquid(1.0, 0.0), &r, 200, &point)?;
    t.name = "fig11".into();
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_id() {
        assert!(matches!(figure(0), Err(CliError::Config(_))));
        assert!(matches!(figure(12), Err(CliError::Config(_))));
    }

    #[test]
    fn fig6_range() {
        let t = &figure(6).unwrap()[0];
        let q: Vec<f64> = t
            .rows
            .iter()
            .map(|r| match r[1] {
                Cell::Num(x) => x,
                _ => panic!(),
            })
            .collect();
        assert!((q[0] + 0.75).abs() < 1e-3, "{}", q[0]);
        let last = *q.last().unwrap();
        assert!((-0.99..=-0.97).contains(&last), "{last}");
        assert!(q.iter().all(|x| (-0.99..=-0.74).contains(x)));
    }

    #[test]
    fn fig4_matches_closed_frequency() {
        let o = optimum(Which::Pol, Mode::Parallel, 0.0, 0.0).unwrap();
        assert!((o.omega - 5f64.sqrt()).abs() < 1e-3, "{}", o.omega);
    }

    #[test]
    fn fig2_inset_reaches_minus_one() {
        let t = fig2_inset().unwrap();
        let Cell::Num(q0) = t.rows[0][1] else { panic!() };
        assert!(q0 < -0.999, "{q0}");
    }
}
