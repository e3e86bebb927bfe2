//! Drift, drift Jacobian and diffusion of the generalized-P Fokker–Planck
//! equation, and the linearized spectral matrix
//! `M(ω) = (Ā + iω)⁻¹ D (Āᵀ − iω)⁻¹`.

use alloc::vec::Vec;

use num_traits::Zero;

use crate::linalg::{ComplexMatrix4, Lu4, Vec4, C64, I};
use crate::{Error, ModelParams, Result, SteadyState};

/// Condition number above which a spectral solve is refused.
pub const MAX_CONDITION: f64 = 1e14;

/// Phase-space point `(α1, α1⁺, α2, α2⁺)` of a classical amplitude pair.
pub fn phase_point(a1: C64, a2: C64) -> Vec4 {
    [a1, a1.conj(), a2, a2.conj()]
}

/// Normalized drift `A1..A4` at phase-space point `a`.
pub fn drift(a: &Vec4, m: &ModelParams) -> Vec4 {
    let [x1, y1, x2, y2] = *a;
    let ie = I * m.eta();
    let e = C64::new(m.pump, 0.0);
    let (ca, hb) = (m.a_mt, m.b_mt / 2.0);
    let p = C64::new(1.0, 0.0) + ie * m.delta;
    let q = C64::new(1.0, 0.0) - ie * m.delta;
    [
        e - p * x1 + ie * (x1 * x1 * y1 + x1 * x2 * y2 * ca + y1 * x2 * x2 * hb),
        e - q * y1 - ie * (x1 * y1 * y1 + y1 * x2 * y2 * ca + x1 * y2 * y2 * hb),
        -p * x2 + ie * (x2 * x2 * y2 + x1 * x2 * y1 * ca + x1 * x1 * y2 * hb),
        -q * y2 - ie * (x2 * y2 * y2 + x1 * y2 * y1 * ca + y1 * y1 * x2 * hb),
    ]
}

/// Analytic Jacobian `∂A_i/∂a_j` of [`drift`].
pub fn jacobian_at(a: &Vec4, m: &ModelParams) -> ComplexMatrix4 {
    let [x1, y1, x2, y2] = *a;
    let ie = I * m.eta();
    let (ca, cb) = (m.a_mt, m.b_mt);
    let hb = cb / 2.0;
    let p = C64::new(1.0, 0.0) + ie * m.delta;
    let q = C64::new(1.0, 0.0) - ie * m.delta;
    let n1 = x1 * y1;
    let n2 = x2 * y2;
    ComplexMatrix4([
        [
            -p + ie * (n1 * 2.0 + n2 * ca),
            ie * (x1 * x1 + x2 * x2 * hb),
            ie * (x1 * y2 * ca + y1 * x2 * cb),
            ie * x1 * x2 * ca,
        ],
        [
            -ie * (y1 * y1 + y2 * y2 * hb),
            -q - ie * (n1 * 2.0 + n2 * ca),
            -ie * y1 * y2 * ca,
            -ie * (y1 * x2 * ca + x1 * y2 * cb),
        ],
        [
            ie * (x2 * y1 * ca + x1 * y2 * cb),
            ie * x1 * x2 * ca,
            -p + ie * (n2 * 2.0 + n1 * ca),
            ie * (x2 * x2 + x1 * x1 * hb),
        ],
        [
            -ie * y1 * y2 * ca,
            -ie * (x1 * y2 * ca + y1 * x2 * cb),
            -ie * (y2 * y2 + y1 * y1 * hb),
            -q - ie * (n2 * 2.0 + n1 * ca),
        ],
    ])
}

/// Diffusion matrix at phase-space point `a`.
pub fn diffusion_matrix(a: &Vec4, m: &ModelParams) -> ComplexMatrix4 {
    let [x1, y1, x2, y2] = *a;
    let ie = I * m.eta();
    let hb = m.b_mt / 2.0;
    let mut d = ComplexMatrix4::zeros();
    d.0[0][0] = ie * (x1 * x1 + x2 * x2 * hb);
    d.0[1][1] = -ie * (y1 * y1 + y2 * y2 * hb);
    d.0[2][2] = ie * (x2 * x2 + x1 * x1 * hb);
    d.0[3][3] = -ie * (y2 * y2 + y1 * y1 * hb);
    d.0[0][2] = ie * x1 * x2 * m.a_mt;
    d.0[2][0] = d.0[0][2];
    d.0[1][3] = -ie * y1 * y2 * m.a_mt;
    d.0[3][1] = d.0[1][3];
    d
}

pub fn drift_jacobian(s: &SteadyState, m: &ModelParams) -> ComplexMatrix4 {
    jacobian_at(&phase_point(s.a1, s.a2), m)
}

pub fn diffusion_at(s: &SteadyState, m: &ModelParams) -> ComplexMatrix4 {
    diffusion_matrix(&phase_point(s.a1, s.a2), m)
}

/// Factorized resolvents `Ā ± iω` at one frequency, reusable for many
/// quadrature contractions.
#[derive(Debug, Clone)]
pub struct SpectralPoint {
    pub omega: f64,
    condition: f64,
    diffusion: ComplexMatrix4,
    plus: Lu4,
    minus: Lu4,
}

impl SpectralPoint {
    pub fn new(s: &SteadyState, m: &ModelParams, omega: f64) -> Result<Self> {
        let jac = drift_jacobian(s, m);
        let diffusion = diffusion_at(s, m);
        let singular = |condition: f64| Error::NearBifurcation {
            omega,
            delta: m.delta,
            pump_e2: s.pump_e2,
            i1: s.i1,
            condition,
        };
        let factor = |z: C64| -> Result<(Lu4, f64)> {
            let lu = Lu4::new(&jac.shift(z)).ok_or_else(|| singular(f64::INFINITY))?;
            let k = lu.condition();
            if k > MAX_CONDITION || !k.is_finite() {
                return Err(singular(k));
            }
            Ok((lu, k))
        };
        let (plus, kp) = factor(I * omega)?;
        let (minus, km) = factor(-I * omega)?;
        Ok(SpectralPoint {
            omega,
            condition: kp.max(km),
            diffusion,
            plus,
            minus,
        })
    }

    /// Condition estimate of the worse of the two resolvents.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Intracavity spectral matrix `M(ω)`.
    pub fn matrix(&self) -> ComplexMatrix4 {
        // X = (Ā + iω)⁻¹ D, column by column.
        let mut x = ComplexMatrix4::zeros();
        for c in 0..4 {
            let col = [
                self.diffusion.0[0][c],
                self.diffusion.0[1][c],
                self.diffusion.0[2][c],
                self.diffusion.0[3][c],
            ];
            let sol = self.plus.solve(&col);
            for r in 0..4 {
                x.0[r][c] = sol[r];
            }
        }
        // Each row of M is row·(Āᵀ − iω)⁻¹, i.e. (Ā − iω)⁻¹ applied to it.
        let mut out = ComplexMatrix4::zeros();
        for r in 0..4 {
            out.0[r] = self.minus.solve(&x.0[r]);
        }
        out
    }

    /// `uᵀ M^out(ω) v` evaluated through two solves, without forming `M`.
    /// This keeps full relative accuracy close to bifurcations, where the
    /// entries of `M` are large and quadrature combinations cancel.
    pub fn output_bilinear(&self, u: &Vec4, v: &Vec4) -> C64 {
        let left = self.plus.solve_transpose(u);
        let right = self.minus.solve_transpose(v);
        let dv = self.diffusion.mul_vec(&right);
        let mut acc = C64::zero();
        for k in 0..4 {
            acc += left[k] * dv[k];
        }
        acc * 2.0
    }
}

pub fn spectral_matrix(s: &SteadyState, m: &ModelParams, omega: f64) -> Result<ComplexMatrix4> {
    Ok(SpectralPoint::new(s, m, omega)?.matrix())
}

/// Output-field spectral matrix `2·M(ω)` (cavity decay rate set to one).
pub fn output_spectral_matrix(s: &SteadyState, m: &ModelParams, omega: f64) -> Result<ComplexMatrix4> {
    Ok(spectral_matrix(s, m, omega)?.scale(C64::new(2.0, 0.0)))
}

/// Finite, strictly increasing list of frequencies (units of the cavity
/// decay rate).
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    omegas: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(omegas: Vec<f64>) -> Result<Self> {
        if omegas.iter().any(|w| !w.is_finite()) || omegas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid);
        }
        Ok(FrequencyGrid { omegas })
    }

    /// `n` evenly spaced points from `lo` to `hi` inclusive.
    pub fn linear(lo: f64, hi: f64, n: usize) -> Result<Self> {
        let omegas = match n {
            0 => Vec::new(),
            1 => alloc::vec![lo],
            _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
        };
        Self::new(omegas)
    }

    /// `n` log-spaced points from `lo` to `hi`, optionally preceded by zero.
    pub fn log_dense(lo: f64, hi: f64, n: usize, with_zero: bool) -> Result<Self> {
        if !(lo > 0.0 && hi > lo) || n < 2 {
            return Err(Error::InvalidGrid);
        }
        let (a, b) = (libm::log(lo), libm::log(hi));
        let mut omegas = Vec::with_capacity(n + 1);
        if with_zero {
            omegas.push(0.0);
        }
        omegas.extend((0..n).map(|k| libm::exp(a + (b - a) * k as f64 / (n - 1) as f64)));
        Self::new(omegas)
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }
}
