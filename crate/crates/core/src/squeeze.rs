//! Quadrature and cross-quadrature squeezing spectra of the output fields,
//! the closed forms valid on the singlemode branch, and optimizers over
//! quadrature angle and frequency.
//!
//! Spectra are normal ordered (`:q:`, zero at shot noise, −1 for perfect
//! squeezing). The quadrature of mode `j` at angle `β` probes the vector
//! `u = (e^{−iβ}, e^{iβ})` on that mode's `(δα, δα⁺)` slots, and
//! `:q_j:(β, ω) = uᵀ M^out(ω) u`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Zero;

use crate::linalg::{Vec4, C64};
use crate::linfluct::SpectralPoint;
use crate::steady::{wrap_angle, Stability};
use crate::{Error, ModelParams, Result, SteadyState};

/// Largest tolerated imaginary part of a real spectrum (relative to
/// `max(1, |value|)`).
pub const IMAG_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Polarized along the pump.
    Parallel,
    /// Polarized orthogonally to the pump.
    Orthogonal,
}

impl Mode {
    pub fn index(self) -> usize {
        match self {
            Mode::Parallel => 1,
            Mode::Orthogonal => 2,
        }
    }

    pub fn from_index(j: usize) -> Option<Mode> {
        match j {
            1 => Some(Mode::Parallel),
            2 => Some(Mode::Orthogonal),
            _ => None,
        }
    }

    fn offset(self) -> usize {
        match self {
            Mode::Parallel => 0,
            Mode::Orthogonal => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub mode: Mode,
    /// Quadrature angle in `(−π, π]`.
    pub beta: f64,
}

impl QuadratureSpec {
    pub fn new(mode: Mode, beta: f64) -> Self {
        QuadratureSpec {
            mode,
            beta: wrap_angle(beta),
        }
    }

    pub fn vector(&self) -> Vec4 {
        let mut u = [C64::zero(); 4];
        let o = self.mode.offset();
        u[o] = C64::from_polar(1.0, -self.beta);
        u[o + 1] = C64::from_polar(1.0, self.beta);
        u
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRecord {
    pub omega: f64,
    pub normal_ordered: f64,
    /// `1 + :q:`.
    pub symmetric: f64,
    pub spec: QuadratureSpec,
    /// `2(β − φ1)`, reduced to `(−π, π]`.
    pub psi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CrossOrder {
    /// Mode-1 quadrature first.
    OneTwo,
    /// Mode-2 quadrature first.
    TwoOne,
}

/// Cross spectrum between quadratures of the two modes. Individual cross
/// spectra are complex; `:q12:(β1, β2) + :q21:(β2, β1)` is real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossSpectrumRecord {
    pub omega: f64,
    pub order: CrossOrder,
    pub first: QuadratureSpec,
    pub second: QuadratureSpec,
    pub value: C64,
}

/// `ψ = 2(β − φ1)` reduced to `(−π, π]`.
pub fn psi_of(s: &SteadyState, beta: f64) -> f64 {
    wrap_angle(2.0 * (beta - s.phi1))
}

/// Quadrature angle for a given `ψ`.
pub fn beta_of(s: &SteadyState, psi: f64) -> f64 {
    wrap_angle(s.phi1 + psi / 2.0)
}

fn require_usable(s: &SteadyState) -> Result<()> {
    if s.stability == Stability::Unstable {
        return Err(Error::UnstableState);
    }
    Ok(())
}

/// Relative size of the imaginary residue tolerated at `p`; rounding grows
/// with the resolvent condition number near bifurcations.
pub fn imag_tolerance(p: &SpectralPoint) -> f64 {
    IMAG_TOL.max(p.condition() * 1e-15)
}

pub(crate) fn real_part(z: C64, tol: f64) -> Result<f64> {
    if z.im.abs() > tol * z.re.abs().max(1.0) || !z.re.is_finite() {
        return Err(Error::NumericalConsistency { residue: z.im });
    }
    Ok(z.re)
}

/// `:q_j:(β)` at a prepared frequency point.
pub fn quad_value(p: &SpectralPoint, mode: Mode, beta: f64) -> Result<f64> {
    let u = QuadratureSpec::new(mode, beta).vector();
    real_part(p.output_bilinear(&u, &u), imag_tolerance(p))
}

pub fn quad_spectrum(s: &SteadyState, m: &ModelParams, mode: Mode, beta: f64, omega: f64) -> Result<SpectrumRecord> {
    require_usable(s)?;
    let p = SpectralPoint::new(s, m, omega)?;
    let q = quad_value(&p, mode, beta)?;
    Ok(SpectrumRecord {
        omega,
        normal_ordered: q,
        symmetric: 1.0 + q,
        spec: QuadratureSpec::new(mode, beta),
        psi: psi_of(s, beta),
    })
}

/// Complex `:q_jk:` at a prepared frequency point.
pub fn cross_value(p: &SpectralPoint, order: CrossOrder, beta_first: f64, beta_second: f64) -> C64 {
    let (mf, ms) = match order {
        CrossOrder::OneTwo => (Mode::Parallel, Mode::Orthogonal),
        CrossOrder::TwoOne => (Mode::Orthogonal, Mode::Parallel),
    };
    let u = QuadratureSpec::new(mf, beta_first).vector();
    let v = QuadratureSpec::new(ms, beta_second).vector();
    p.output_bilinear(&u, &v)
}

/// `:q12:(β1, β2, ω)` for [`CrossOrder::OneTwo`], `:q21:(β2, β1, ω)` for
/// [`CrossOrder::TwoOne`]; the first angle always belongs to the first mode
/// of the pair.
pub fn cross_spectrum(
    s: &SteadyState,
    m: &ModelParams,
    order: CrossOrder,
    beta_first: f64,
    beta_second: f64,
    omega: f64,
) -> Result<CrossSpectrumRecord> {
    require_usable(s)?;
    let p = SpectralPoint::new(s, m, omega)?;
    let (mf, ms) = match order {
        CrossOrder::OneTwo => (Mode::Parallel, Mode::Orthogonal),
        CrossOrder::TwoOne => (Mode::Orthogonal, Mode::Parallel),
    };
    Ok(CrossSpectrumRecord {
        omega,
        order,
        first: QuadratureSpec::new(mf, beta_first),
        second: QuadratureSpec::new(ms, beta_second),
        value: cross_value(&p, order, beta_first, beta_second),
    })
}

/// `3I² − 4IΔ + Δ² + 1`; vanishes at the folds.
pub fn fold_denominator(i: f64, delta: f64) -> f64 {
    3.0 * i * i - 4.0 * i * delta + delta * delta + 1.0
}

/// `I² + ΔI − 2Δ² − 2`; vanishes at the polarization threshold.
pub fn pol_denominator(i: f64, delta: f64) -> f64 {
    i * i + delta * i - 2.0 * delta * delta - 2.0
}

pub fn fold_numerator(i: f64, delta: f64, psi: f64, omega: f64) -> f64 {
    let w2 = omega * omega;
    -(3.0 * i * i - 4.0 * i * delta + delta * delta - 1.0 - w2) * libm::sin(psi)
        + 2.0 * (delta - 2.0 * i) * libm::cos(psi)
        + 2.0 * i
}

pub fn pol_numerator(i: f64, delta: f64, psi: f64, omega: f64) -> f64 {
    let w2 = omega * omega;
    (i * i + delta * i - 2.0 * (delta * delta - 1.0 - w2)) * libm::sin(psi)
        + (4.0 * delta - i) * libm::cos(psi)
        + 3.0 * i
}

/// Closed-form `:q_j:` on the singlemode branch at intensity `i1` for the
/// liquid coefficients.
pub fn analytic_bifurcation_q(i1: f64, m: &ModelParams, mode: Mode, psi: f64, omega: f64) -> Result<f64> {
    if !m.is_liquid() {
        return Err(Error::NotLiquid);
    }
    let d = m.delta;
    // ψ → −ψ under η → −η.
    let psi = m.eta() * psi;
    let w2 = omega * omega;
    let (num, den, scale) = match mode {
        Mode::Parallel => {
            let qd = fold_denominator(i1, d);
            let den = (qd - w2) * (qd - w2) + 4.0 * w2;
            (4.0 * i1 * fold_numerator(i1, d, psi, omega), den, 3.0 * i1 * i1 + 4.0 * (i1 * d).abs() + d * d + 1.0)
        }
        Mode::Orthogonal => {
            let qd = pol_denominator(i1, d);
            let den = (qd + 2.0 * w2) * (qd + 2.0 * w2) + 16.0 * w2;
            (6.0 * i1 * pol_numerator(i1, d, psi, omega), den, i1 * i1 + (d * i1).abs() + 2.0 * d * d + 2.0)
        }
    };
    if den <= (1e-12 * scale) * (1e-12 * scale) {
        return Err(Error::LimitRequired);
    }
    Ok(num / den)
}

/// Optimal `ψ` at the polarization threshold from the closed form.
///
/// Equals `−arccos[(1 − Δ√(8+9Δ²)) / (3(1+Δ²))]`: the minimum of
/// `:q2:(ψ, 0)` at `I_pol` lies where `tan ψ` equals the ratio of the
/// `sin ψ` and `cos ψ` coefficients of the numerator.
pub fn psi_pol_opt(delta: f64) -> f64 {
    let r = libm::sqrt(8.0 + 9.0 * delta * delta);
    -libm::acos(((1.0 - delta * r) / (3.0 * (1.0 + delta * delta))).clamp(-1.0, 1.0))
}

/// Frequency of best amplitude squeezing of mode 1 at the polarization
/// threshold.
pub fn omega_pol_opt(delta: f64) -> f64 {
    let r = libm::sqrt(8.0 + 9.0 * delta * delta);
    libm::sqrt(5.0 - 3.5 * delta * (-3.0 * delta + r))
}

/// Perfectly squeezed mode-1 quadrature at the upper-branch fold.
pub fn psi_up_opt(delta: f64) -> f64 {
    let r = libm::sqrt(delta * delta - 3.0);
    -libm::acos(((2.0 + delta * r) / (1.0 + delta * delta)).clamp(-1.0, 1.0))
}

/// Perfectly squeezed mode-1 quadrature at the lower-branch fold.
pub fn psi_down_opt(delta: f64) -> f64 {
    let r = libm::sqrt(delta * delta - 3.0);
    -libm::acos(((2.0 - delta * r) / (1.0 + delta * delta)).clamp(-1.0, 1.0))
}

/// Frequency of best `ψ = π` squeezing of mode 2 at the lower-branch fold.
pub fn omega_down_opt(delta: f64) -> f64 {
    let r = libm::sqrt(delta * delta - 3.0);
    libm::sqrt((7.0 * delta * (delta + r) - 15.0) / 18.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptimum {
    /// Minimizing angle in `[0, π)`.
    pub beta: f64,
    pub psi: f64,
    pub q_min: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyOptimum {
    pub omega: f64,
    pub q_min: f64,
}

/// Minimizes `:q_j:(β, ω)` over `β ∈ [0, π)`. The spectrum is exactly
/// `c + a·cos 2β + b·sin 2β`, so three evaluations fix the minimizer; the
/// value is then evaluated directly, which stays accurate when `c` is huge
/// near a bifurcation.
pub fn optimal_quadrature(s: &SteadyState, m: &ModelParams, mode: Mode, omega: f64) -> Result<QuadratureOptimum> {
    require_usable(s)?;
    let p = SpectralPoint::new(s, m, omega)?;
    let q0 = quad_value(&p, mode, 0.0)?;
    let q1 = quad_value(&p, mode, PI / 4.0)?;
    let q2 = quad_value(&p, mode, PI / 2.0)?;
    let c = 0.5 * (q0 + q2);
    let (a, b) = (0.5 * (q0 - q2), q1 - c);
    let beta = 0.5 * (libm::atan2(b, a) + PI);
    let beta = if beta >= PI { beta - PI } else { beta };
    Ok(QuadratureOptimum {
        beta,
        psi: psi_of(s, beta),
        q_min: quad_value(&p, mode, beta)?,
    })
}

/// Minimizes `:q_j:(β, ω)` over `ω ∈ [0, 10 + 5|Δ|]`.
pub fn optimal_frequency(s: &SteadyState, m: &ModelParams, mode: Mode, beta: f64) -> Result<FrequencyOptimum> {
    require_usable(s)?;
    minimize_over_frequency(
        |w| SpectralPoint::new(s, m, w).and_then(|p| quad_value(&p, mode, beta)),
        10.0 + 5.0 * m.delta.abs(),
    )
}

/// Global minimum of `f` on `[0, w_max]`: a linear grid refined near zero,
/// then golden-section search around the best grid point.
pub fn minimize_over_frequency(f: impl Fn(f64) -> Result<f64>, w_max: f64) -> Result<FrequencyOptimum> {
    let mut grid: Vec<f64> = (0..=2000).map(|k| w_max * k as f64 / 2000.0).collect();
    grid.extend((0..200).map(|k| libm::pow(10.0, -5.0 + 3.0 * k as f64 / 199.0)));
    grid.retain(|w| *w <= w_max);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut vals = Vec::with_capacity(grid.len());
    for &w in &grid {
        vals.push(f(w)?);
    }
    let k = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let lo = grid[k.saturating_sub(1)];
    let hi = grid[(k + 1).min(grid.len() - 1)];
    let (w, v) = golden_min(f, lo, hi)?;
    Ok(if v < vals[k] {
        FrequencyOptimum { omega: w, q_min: v }
    } else {
        FrequencyOptimum {
            omega: grid[k],
            q_min: vals[k],
        }
    })
}

/// Golden-section search on `[a, b]` down to rounding level.
pub(crate) fn golden_min(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    const G: f64 = 0.618_033_988_749_894_9;
    let mut c = b - G * (b - a);
    let mut d = a + G * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..200 {
        if (b - a).abs() <= 4.0 * f64::EPSILON * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - G * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + G * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{mirror, Sign};
    use crate::steady::{approach, bimode_states, singlemode_state, vacuum, Bifurcation};
    use proptest::prelude::*;

    fn unit() -> (SteadyState, ModelParams) {
        let m = ModelParams::liquid(1.0, 1.0);
        (singlemode_state(&m, 1.0).unwrap(), m)
    }

    #[test]
    fn vacuum_is_shot_noise() {
        let m = ModelParams::liquid(0.7, 0.0);
        let v = vacuum(&m);
        for mode in [Mode::Parallel, Mode::Orthogonal] {
            for b in [0.0, 0.4, 2.0] {
                let r = quad_spectrum(&v, &m, mode, b, 0.3).unwrap();
                assert_eq!(r.normal_ordered, 0.0);
                assert_eq!(r.symmetric, 1.0);
            }
        }
        let o = optimal_quadrature(&v, &m, Mode::Parallel, 0.0).unwrap();
        assert_eq!(o.q_min, 0.0);
    }

    #[test]
    fn unit_point_values() {
        let (s, m) = unit();
        assert!(quad_spectrum(&s, &m, Mode::Parallel, 0.0, 0.0).unwrap().normal_ordered.abs() < 1e-13);
        assert!((quad_spectrum(&s, &m, Mode::Orthogonal, 0.0, 0.0).unwrap().normal_ordered - 9.0).abs() < 1e-12);
        assert_eq!(analytic_bifurcation_q(1.0, &m, Mode::Parallel, 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(analytic_bifurcation_q(1.0, &m, Mode::Orthogonal, 0.0, 0.0).unwrap(), 9.0);
    }

    #[test]
    fn lower_fold_at_cusp() {
        let d = 3f64.sqrt();
        let m = ModelParams::liquid(d, 0.0);
        let q = analytic_bifurcation_q(2.0 / d, &m, Mode::Orthogonal, PI, 1.0 / d).unwrap();
        assert!((q + 0.75).abs() < 1e-12);
    }

    #[test]
    fn closed_form_zeros() {
        for k in 0..50 {
            let d = 1.75 + 0.2 * k as f64;
            let b = crate::steady::bistability_range(&ModelParams::liquid(d, 1.0)).unwrap();
            assert!(fold_denominator(b.i_plus, d).abs() < 1e-10);
            assert!(fold_denominator(b.i_minus, d).abs() < 1e-10);
            let t = crate::steady::polarization_threshold(&ModelParams::liquid(d, 1.0)).unwrap();
            assert!(pol_denominator(t.i_pol, d).abs() < 1e-10);
        }
    }

    #[test]
    fn analytic_refuses_singular_point_and_non_liquids() {
        let m = ModelParams::liquid(2.0, 0.0);
        let b = crate::steady::bistability_range(&m).unwrap();
        assert_eq!(
            analytic_bifurcation_q(b.i_plus, &m, Mode::Parallel, 0.3, 0.0),
            Err(Error::LimitRequired)
        );
        let mut other = m;
        other.a_mt = 1.0;
        other.b_mt = 0.0;
        assert_eq!(analytic_bifurcation_q(1.0, &other, Mode::Parallel, 0.0, 0.0), Err(Error::NotLiquid));
    }

    #[test]
    fn cross_spectra_vanish_on_singlemode_branch() {
        let (s, m) = unit();
        for order in [CrossOrder::OneTwo, CrossOrder::TwoOne] {
            let c = cross_spectrum(&s, &m, order, 0.3, -1.1, 0.7).unwrap();
            assert_eq!(c.value, C64::zero());
        }
    }

    #[test]
    fn cross_spectra_on_bimode_state() {
        let m = ModelParams::liquid(1.0, 3.0);
        let s = bimode_states(&m).into_iter().find(|s| s.is_stable()).unwrap();
        let a = cross_spectrum(&s, &m, CrossOrder::OneTwo, 0.2, 0.9, 0.5).unwrap().value;
        let b = cross_spectrum(&s, &m, CrossOrder::TwoOne, 0.9, 0.2, 0.5).unwrap().value;
        assert!(a.norm() > 1e-3 && a.norm().is_finite());
        assert!((a + b).im.abs() < 1e-12 * (1.0 + a.norm()));
    }

    #[test]
    fn unstable_points_are_refused() {
        let m = ModelParams::liquid(2.0, 1.93);
        let s = crate::steady::singlemode_states(&m).unwrap()[1];
        assert_eq!(quad_spectrum(&s, &m, Mode::Parallel, 0.0, 0.0), Err(Error::UnstableState));
    }

    #[test]
    fn optimal_angles_at_bifurcations() {
        let m = ModelParams::liquid(0.0, 0.0);
        let s = approach(&m, Bifurcation::Polarization, 1e-8).unwrap();
        let o = optimal_quadrature(&s, &m, Mode::Orthogonal, 0.0).unwrap();
        assert!(wrap_angle(o.psi - psi_pol_opt(0.0)).abs() < 1e-3, "{o:?}");
        assert!((psi_pol_opt(0.0) + libm::acos(1.0 / 3.0)).abs() < 1e-15);

        let m = ModelParams::liquid(2.0, 0.0);
        let s = approach(&m, Bifurcation::UpperFold, 1e-8).unwrap();
        let o = optimal_quadrature(&s, &m, Mode::Parallel, 0.0).unwrap();
        assert!((psi_up_opt(2.0) + libm::acos(0.8)).abs() < 1e-15);
        assert!(wrap_angle(o.psi - psi_up_opt(2.0)).abs() < 1e-3, "{o:?}");
    }

    #[test]
    fn optimal_frequencies() {
        let m = ModelParams::liquid(0.0, 0.0);
        let s = approach(&m, Bifurcation::Polarization, 1e-6).unwrap();
        let o = optimal_frequency(&s, &m, Mode::Parallel, s.phi1).unwrap();
        assert!((o.omega - 5f64.sqrt()).abs() < 1e-3, "{o:?}");

        let m = ModelParams::liquid(2.0, 0.0);
        let s = approach(&m, Bifurcation::LowerFold, 1e-8).unwrap();
        let o = optimal_frequency(&s, &m, Mode::Orthogonal, s.phi1 + PI / 2.0).unwrap();
        assert!((o.omega - 1.5f64.sqrt()).abs() < 1e-3, "{o:?}");
        assert!((o.q_min + 0.6).abs() < 1e-3, "{o:?}");

        let s = approach(&m, Bifurcation::UpperFold, 1e-6).unwrap();
        let o = optimal_frequency(&s, &m, Mode::Orthogonal, s.phi1 + PI / 2.0).unwrap();
        assert!(o.omega < 1e-3, "{o:?}");
    }

    #[test]
    fn negative_eta_matches_closed_forms() {
        let mut m = ModelParams::liquid(1.3, 2.0);
        m.eta = Sign::Minus;
        for s in crate::steady::singlemode_states(&m).unwrap() {
            for psi in [-2.0, -0.4, 0.9, 2.5] {
                for mode in [Mode::Parallel, Mode::Orthogonal] {
                    let q = quad_spectrum(&s, &m, mode, beta_of(&s, psi), 0.6).unwrap().normal_ordered;
                    let a = analytic_bifurcation_q(s.i1, &m, mode, psi, 0.6).unwrap();
                    assert!((q - a).abs() < 1e-9 * (1.0 + a.abs()));
                }
            }
        }
        let _ = mirror(&m);
    }

    #[test]
    fn narrow_window_at_pitchfork() {
        for d in [0.0, 2.0] {
            let m = ModelParams::liquid(d, 0.0);
            let s = approach(&m, Bifurcation::Polarization, 1e-6).unwrap();
            let p = SpectralPoint::new(&s, &m, 0.0).unwrap();
            let at = |psi: f64| quad_value(&p, Mode::Orthogonal, beta_of(&s, psi)).unwrap();
            let o = optimal_quadrature(&s, &m, Mode::Orthogonal, 0.0).unwrap();
            let best = o.psi;
            assert!((best - psi_pol_opt(d)).abs() < 1e-5);
            assert!(at(best) < -0.999, "Δ={d}: {}", at(best));
            assert!(at(best + 0.01) > 0.0 && at(best - 0.01) > 0.0);
        }
    }

    proptest! {
        #[test]
        fn pipeline_matches_closed_forms(d in -3.0f64..6.0, e2 in 0.05f64..8.0, psi in -3.1f64..3.1, w in 0.0f64..4.0) {
            let m = ModelParams::liquid(d, e2);
            for s in crate::steady::singlemode_states(&m).unwrap() {
                if !s.is_stable() {
                    continue;
                }
                for mode in [Mode::Parallel, Mode::Orthogonal] {
                    let q = quad_spectrum(&s, &m, mode, beta_of(&s, psi), w);
                    let a = analytic_bifurcation_q(s.i1, &m, mode, psi, w);
                    if let (Ok(q), Ok(a)) = (q, a) {
                        prop_assert!((q.normal_ordered - a).abs() < 1e-9 * (1.0 + a.abs()));
                    }
                }
            }
        }

        #[test]
        fn spectra_even_periodic_and_bounded(e2 in 0.1f64..8.0, b in -3.0f64..3.0, w in 0.0f64..5.0) {
            let m = ModelParams::liquid(1.0, e2);
            let mut states = crate::steady::singlemode_states(&m).unwrap();
            states.extend(bimode_states(&m));
            for s in states.into_iter().filter(|s| s.is_stable()) {
                for mode in [Mode::Parallel, Mode::Orthogonal] {
                    let q = quad_spectrum(&s, &m, mode, b, w).unwrap().normal_ordered;
                    let qn = quad_spectrum(&s, &m, mode, b, -w).unwrap().normal_ordered;
                    let qp = quad_spectrum(&s, &m, mode, b + PI, w).unwrap().normal_ordered;
                    prop_assert!(q >= -1.0 - 1e-9);
                    prop_assert!((q - qn).abs() < 1e-10 * (1.0 + q.abs()));
                    prop_assert!((q - qp).abs() < 1e-10 * (1.0 + q.abs()));
                }
            }
        }
    }
}
