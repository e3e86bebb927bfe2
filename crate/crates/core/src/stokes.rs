//! Mean Stokes parameters, Stokes variance spectra and the polarization
//! squeezing criterion `Ṽ_l < |⟨S_m⟩/⟨S0⟩| < Ṽ_k`.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::linfluct::{FrequencyGrid, SpectralPoint};
use crate::squeeze::{cross_value, imag_tolerance, quad_value, real_part, CrossOrder, Mode};
use crate::steady::{bimode_states, singlemode_states, Stability};
use crate::{Error, ModelParams, Result, SteadyState};

/// Margin applied to both strict inequalities of the criterion.
pub const VERDICT_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesMeans {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl StokesMeans {
    pub fn as_array(&self) -> [f64; 4] {
        [self.s0, self.s1, self.s2, self.s3]
    }

    /// `|⟨S_k⟩/⟨S0⟩|`, or `None` for an empty cavity.
    pub fn ratio(&self, k: usize) -> Option<f64> {
        if self.s0 == 0.0 {
            None
        } else {
            Some((self.as_array()[k] / self.s0).abs())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesVariances {
    pub omega: f64,
    pub v: [f64; 4],
    /// `V_k/⟨S0⟩`; the coherent value 1 for an empty cavity.
    pub v_norm: [f64; 4],
}

/// One satisfied triple of the squeezing criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub l: usize,
    pub m: usize,
    pub k: usize,
    pub v_l: f64,
    pub ratio_m: f64,
    pub v_k: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolSqueezeVerdict {
    pub squeezed_param: Option<usize>,
    pub witnesses: Vec<Witness>,
}

pub fn stokes_means(s: &SteadyState) -> StokesMeans {
    let p = s.a1.conj() * s.a2;
    StokesMeans {
        s0: s.i1 + s.i2,
        s1: s.i1 - s.i2,
        s2: 2.0 * p.re,
        s3: 2.0 * p.im,
    }
}

/// Variance spectra at a prepared frequency point.
pub fn stokes_variances_at(s: &SteadyState, p: &SpectralPoint) -> Result<StokesVariances> {
    let (i1, i2) = (s.i1, s.i2);
    let (f1, f2) = (s.phi1, s.phi2);
    let r = libm::sqrt(i1 * i2);
    let sym = |mode: Mode, b: f64| quad_value(p, mode, b).map(|q| 1.0 + q);
    let cross = |b1: f64, b2: f64, sign: f64| {
        // q12(b1, b2) + q21(b2, b1) is real; its parts are not.
        let z = cross_value(p, CrossOrder::OneTwo, b1, b2) + cross_value(p, CrossOrder::TwoOne, b2, b1);
        real_part(z * (sign * r), imag_tolerance(p))
    };
    let h = FRAC_PI_2;
    let base01 = i1 * sym(Mode::Parallel, f1)? + i2 * sym(Mode::Orthogonal, f2)?;
    let c01 = if r > 0.0 { cross(f1, f2, 1.0)? } else { 0.0 };
    let v0 = base01 + c01;
    let v1 = base01 - c01;
    let v2 = i2 * sym(Mode::Parallel, f2)?
        + i1 * sym(Mode::Orthogonal, f1)?
        + if r > 0.0 { cross(f2, f1, 1.0)? } else { 0.0 };
    let v3 = i2 * sym(Mode::Parallel, f2 + h)?
        + i1 * sym(Mode::Orthogonal, f1 + h)?
        + if r > 0.0 { cross(f2 + h, f1 + h, -1.0)? } else { 0.0 };
    let v = [v0, v1, v2, v3];
    let s0 = i1 + i2;
    let v_norm = if s0 > 0.0 { v.map(|x| x / s0) } else { [1.0; 4] };
    Ok(StokesVariances {
        omega: p.omega,
        v,
        v_norm,
    })
}

pub fn stokes_variance_spectra(s: &SteadyState, m: &ModelParams, omega: f64) -> Result<StokesVariances> {
    if s.stability == Stability::Unstable {
        return Err(Error::UnstableState);
    }
    stokes_variances_at(s, &SpectralPoint::new(s, m, omega)?)
}

/// Closed-form normalized variances on the singlemode branch at intensity
/// `i1` (liquid coefficients):
///
/// `Ṽ0 = Ṽ1 = 1 + 8I(Δ−I)/C1`, `Ṽ2 = 1 + 12I(I+2Δ)/C2`,
/// `Ṽ3 = 1 + 2(I−Δ)/(I+2Δ)·(Ṽ2 − 1)`, with
/// `C1 = (ω²+1−3I²+4IΔ−Δ²)² + 4(3I²−4IΔ+Δ²)` and
/// `C2 = (2ω²+2+I²+IΔ−2Δ²)² − 8(I−Δ)(I+2Δ)`.
pub fn bifurcation_stokes(i1: f64, m: &ModelParams, omega: f64) -> Result<StokesVariances> {
    if !m.is_liquid() {
        return Err(Error::NotLiquid);
    }
    let (i, d, w2) = (i1, m.delta, omega * omega);
    let x = 3.0 * i * i - 4.0 * i * d + d * d;
    let c1 = (w2 + 1.0 - x) * (w2 + 1.0 - x) + 4.0 * x;
    let y = 2.0 * w2 + 2.0 + i * i + i * d - 2.0 * d * d;
    let c2 = y * y - 8.0 * (i - d) * (i + 2.0 * d);
    let scale1 = (w2 + 1.0 + x.abs()) * (w2 + 1.0 + x.abs());
    let scale2 = 2.0 * w2 + 2.0 + i * i + (i * d).abs() + 2.0 * d * d;
    let scale2 = scale2 * scale2;
    if c1.abs() <= 1e-24 * scale1 || c2.abs() <= 1e-24 * scale2 {
        return Err(Error::LimitRequired);
    }
    let v01 = 1.0 + 8.0 * i * (d - i) / c1;
    let v2 = 1.0 + 12.0 * i * (i + 2.0 * d) / c2;
    let v3 = if i == d {
        1.0
    } else {
        1.0 + 2.0 * (i - d) / (i + 2.0 * d) * (v2 - 1.0)
    };
    let v_norm = [v01, v01, v2, v3];
    Ok(StokesVariances {
        omega,
        v: v_norm.map(|x| x * i),
        v_norm,
    })
}

/// Checks every ordered triple `(l, m, k)` of distinct indices in `1..=3`.
pub fn classify_polarization(means: &StokesMeans, v: &StokesVariances) -> PolSqueezeVerdict {
    let mut out = PolSqueezeVerdict::default();
    for l in 1..=3 {
        for m in 1..=3 {
            for k in 1..=3 {
                if l == m || m == k || l == k {
                    continue;
                }
                let Some(ratio) = means.ratio(m) else { continue };
                let (vl, vk) = (v.v_norm[l], v.v_norm[k]);
                if vl + VERDICT_MARGIN < ratio && ratio + VERDICT_MARGIN < vk {
                    if out.squeezed_param.is_none() {
                        out.squeezed_param = Some(l);
                    }
                    out.witnesses.push(Witness {
                        l,
                        m,
                        k,
                        v_l: vl,
                        ratio_m: ratio,
                        v_k: vk,
                    });
                }
            }
        }
    }
    out
}

/// Standard frequency grid for minima over ω: zero plus `n` log-spaced
/// points in `[1e−3, 10 + 5|Δ|]`.
pub fn search_grid(m: &ModelParams, n: usize) -> FrequencyGrid {
    FrequencyGrid::log_dense(1e-3, 10.0 + 5.0 * m.delta.abs(), n.max(2), true)
        .expect("log grid bounds are valid")
}

/// Minima over a frequency grid plus all verdicts found on it.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceSummary {
    pub min_v: [f64; 4],
    pub omega_at_min: [f64; 4],
    /// Squeezed Stokes indices found at any frequency, ascending.
    pub squeezed: Vec<usize>,
    /// First verdict-bearing frequency and its witness.
    pub first_witness: Option<(f64, Witness)>,
}

/// Scans a frequency grid. Points where the spectral solve is singular
/// (an exact bifurcation at ω = 0) are skipped.
pub fn summarize(s: &SteadyState, m: &ModelParams, grid: &FrequencyGrid) -> Result<VarianceSummary> {
    let means = stokes_means(s);
    let mut out = VarianceSummary {
        min_v: [f64::INFINITY; 4],
        omega_at_min: [f64::NAN; 4],
        squeezed: Vec::new(),
        first_witness: None,
    };
    for &w in grid.omegas() {
        let v = match stokes_variance_spectra(s, m, w) {
            Ok(v) => v,
            Err(Error::NearBifurcation { .. }) => continue,
            Err(e) => return Err(e),
        };
        for k in 0..4 {
            if v.v_norm[k] < out.min_v[k] {
                out.min_v[k] = v.v_norm[k];
                out.omega_at_min[k] = w;
            }
        }
        let verdict = classify_polarization(&means, &v);
        for wit in &verdict.witnesses {
            if !out.squeezed.contains(&wit.l) {
                out.squeezed.push(wit.l);
            }
        }
        if out.first_witness.is_none() {
            out.first_witness = verdict.witnesses.first().map(|x| (w, *x));
        }
    }
    out.squeezed.sort_unstable();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub e2: f64,
    /// `None` when no stable state exists at this pump.
    pub state: Option<SteadyState>,
    pub means: Option<StokesMeans>,
    pub summary: Option<VarianceSummary>,
}

/// For each pump, the stable states (bimode when present, twins
/// included, otherwise singlemode) with their variance minima and verdicts.
pub fn pump_scan(m: &ModelParams, e2_values: &[f64], grid: &FrequencyGrid) -> Result<Vec<ScanRow>> {
    let mut rows = Vec::new();
    for &e2 in e2_values {
        let mm = m.with_pump_e2(e2);
        let bimode: Vec<_> = bimode_states(&mm).into_iter().filter(|s| s.is_stable()).collect();
        let chosen = if bimode.is_empty() {
            singlemode_states(&mm)?.into_iter().filter(|s| s.is_stable()).collect()
        } else {
            bimode
        };
        if chosen.is_empty() {
            rows.push(ScanRow {
                e2,
                state: None,
                means: None,
                summary: None,
            });
            continue;
        }
        for s in chosen {
            rows.push(ScanRow {
                e2,
                state: Some(s),
                means: Some(stokes_means(&s)),
                summary: Some(summarize(&s, &mm, grid)?),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steady::{approach, polarization_threshold, singlemode_state, vacuum, Bifurcation, Branch};
    use crate::C64;
    use proptest::prelude::*;

    #[test]
    fn means_examples() {
        let m = ModelParams::liquid(1.0, 1.0);
        let s = singlemode_state(&m, 1.0).unwrap();
        assert_eq!(stokes_means(&s).as_array(), [1.0, 1.0, 0.0, 0.0]);

        let mut c = s;
        c.i2 = 1.0;
        c.phi2 = FRAC_PI_2;
        c.a2 = C64::new(0.0, 1.0);
        let cm = stokes_means(&c);
        assert!((cm.s0 - 2.0).abs() < 1e-15 && cm.s1.abs() < 1e-15 && cm.s2.abs() < 1e-15);
        assert!((cm.s3 - 2.0).abs() < 1e-15);
    }

    #[test]
    fn twins_flip_s2_s3_only() {
        let m = ModelParams::liquid(1.0, 3.0);
        let b = bimode_states(&m);
        let (x, y) = (stokes_means(&b[0]), stokes_means(&b[1]));
        assert_eq!((x.s0, x.s1), (y.s0, y.s1));
        assert!((x.s2 + y.s2).abs() < 1e-12 && (x.s3 + y.s3).abs() < 1e-12);
        let vx = stokes_variance_spectra(&b[0], &m, 0.4).unwrap();
        let vy = stokes_variance_spectra(&b[1], &m, 0.4).unwrap();
        for k in 0..4 {
            assert!((vx.v_norm[k] - vy.v_norm[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn vacuum_is_coherent() {
        let m = ModelParams::liquid(1.0, 0.0);
        let v = stokes_variance_spectra(&vacuum(&m), &m, 0.3).unwrap();
        assert_eq!(v.v_norm, [1.0; 4]);
        let means = StokesMeans {
            s0: 1.0,
            s1: 1.0,
            s2: 0.0,
            s3: 0.0,
        };
        assert!(classify_polarization(&means, &v).squeezed_param.is_none());
    }

    #[test]
    fn singlemode_reduction() {
        let m = ModelParams::liquid(1.5, 1.2);
        for s in singlemode_states(&m).unwrap() {
            let v = stokes_variance_spectra(&s, &m, 0.8).unwrap();
            let q = |mode, b| crate::squeeze::quad_spectrum(&s, &m, mode, b, 0.8).unwrap().symmetric;
            assert_eq!(v.v_norm[0], v.v_norm[1]);
            assert!((v.v_norm[0] - q(Mode::Parallel, s.phi1)).abs() < 1e-12);
            assert!((v.v_norm[2] - q(Mode::Orthogonal, s.phi1)).abs() < 1e-12);
            assert!((v.v_norm[3] - q(Mode::Orthogonal, s.phi1 + FRAC_PI_2)).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_special_cases() {
        let m = ModelParams::liquid(1.3, 0.0);
        assert_eq!(bifurcation_stokes(1.3, &m, 0.5).unwrap().v_norm[3], 1.0);
        let m = ModelParams::liquid(2.0, 0.0);
        let v = bifurcation_stokes(5.0 / 3.0, &m, 1e-4).unwrap();
        assert!(v.v_norm[3] < 1.0);
        let b = crate::steady::bistability_range(&m).unwrap();
        assert_eq!(bifurcation_stokes(b.i_plus, &m, 0.0), Err(Error::LimitRequired));
    }

    #[test]
    fn s3_squeezed_at_upper_fold() {
        let m = ModelParams::liquid(2.0, 0.0);
        let s = approach(&m, Bifurcation::UpperFold, 1e-6).unwrap();
        let mm = m.with_pump_e2(s.pump_e2);
        let v = stokes_variance_spectra(&s, &mm, 1e-3).unwrap();
        let verdict = classify_polarization(&stokes_means(&s), &v);
        assert_eq!(verdict.squeezed_param, Some(3), "{v:?}");
    }

    #[test]
    fn no_verdict_at_pitchfork() {
        for d in [0.0, 1.0, 2.0] {
            let m = ModelParams::liquid(d, 0.0);
            let s = approach(&m, Bifurcation::Polarization, 1e-6).unwrap();
            let mm = m.with_pump_e2(s.pump_e2);
            let sum = summarize(&s, &mm, &search_grid(&mm, 200)).unwrap();
            assert!(sum.squeezed.is_empty(), "Δ={d}: {sum:?}");
        }
    }

    #[test]
    fn scan_below_threshold_is_singlemode() {
        let m = ModelParams::liquid(1.0, 0.0);
        let th = polarization_threshold(&m).unwrap();
        let rows = pump_scan(&m, &[0.5, 1.0, th.e2_pol * 0.99], &search_grid(&m, 40)).unwrap();
        assert_eq!(rows.len(), 3);
        for r in rows {
            assert_eq!(r.state.unwrap().branch, Branch::Singlemode);
            let sum = r.summary.unwrap();
            assert_eq!(sum.min_v[0], sum.min_v[1]);
        }
    }

    proptest! {
        #[test]
        fn closed_forms_match_pipeline(d in -3.0f64..6.0, e2 in 0.05f64..8.0, w in 0.0f64..4.0) {
            let m = ModelParams::liquid(d, e2);
            for s in singlemode_states(&m).unwrap().into_iter().filter(|s| s.is_stable()) {
                let a = stokes_variance_spectra(&s, &m, w).unwrap();
                if let Ok(b) = bifurcation_stokes(s.i1, &m, w) {
                    for k in 0..4 {
                        prop_assert!((a.v_norm[k] - b.v_norm[k]).abs() < 1e-9 * (1.0 + b.v_norm[k].abs()));
                    }
                }
                prop_assert!((a.v_norm[0] - a.v_norm[1]).abs() <= 1e-12 * a.v_norm[0].abs().max(1.0));
            }
        }
    }
}
