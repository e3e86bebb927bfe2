//! Classical steady states, bifurcation loci and linear stability.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Zero;

use crate::linalg::{eigenvalues, C64};
use crate::linfluct::{drift, drift_jacobian, phase_point};
use crate::{Error, ModelParams, Result};

/// Largest accepted steady-state residual.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Eigenvalues with `|Re λ|` below this count as marginal.
pub const STABILITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Linearly polarized along the pump, `I2 = 0`.
    Singlemode,
    /// Elliptically polarized, `+` root of the `I2(I1)` relation.
    BimodePlus,
    /// Elliptically polarized, `−` root of the `I2(I1)` relation.
    BimodeMinus,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::Singlemode => "singlemode",
            Branch::BimodePlus => "bimode_plus",
            Branch::BimodeMinus => "bimode_minus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stability {
    Stable,
    Marginal,
    Unstable,
}

impl Stability {
    pub fn name(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Marginal => "marginal",
            Stability::Unstable => "unstable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub branch: Branch,
    /// Twin obtained by `φ2 → φ2 + π`.
    pub phase_partner: bool,
    pub i1: f64,
    pub i2: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub a1: C64,
    pub a2: C64,
    pub stability: Stability,
    /// Pump intensity `E²` the state belongs to.
    pub pump_e2: f64,
}

impl SteadyState {
    pub fn is_stable(&self) -> bool {
        self.stability == Stability::Stable
    }
}

/// A fold of the singlemode S-curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fold {
    pub i: f64,
    pub e2: f64,
}

/// Bistable window of the singlemode branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bistability {
    /// Lower edge of the window in pump intensity.
    pub e2_minus: f64,
    /// Upper edge of the window in pump intensity.
    pub e2_plus: f64,
    /// `(2Δ − √(Δ²−3))/3`.
    pub i_minus: f64,
    /// `(2Δ + √(Δ²−3))/3`.
    pub i_plus: f64,
    /// Fold ending the upper branch, at intensity `i_plus`.
    pub upper: Fold,
    /// Fold ending the lower branch, at intensity `i_minus`.
    pub lower: Fold,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationThreshold {
    pub e2_pol: f64,
    pub i_pol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BifurcationSet {
    pub bistable: Option<Bistability>,
    pub polarization: Option<PolarizationThreshold>,
}

/// Which bifurcation to approach.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bifurcation {
    Polarization,
    /// Fold at the end of the upper singlemode branch.
    UpperFold,
    /// Fold at the end of the lower singlemode branch.
    LowerFold,
}

impl Bifurcation {
    pub fn name(self) -> &'static str {
        match self {
            Bifurcation::Polarization => "pol",
            Bifurcation::UpperFold => "up",
            Bifurcation::LowerFold => "down",
        }
    }
}

/// Pump intensity of the singlemode branch at intracavity intensity `i`.
pub fn singlemode_pump_e2(i: f64, delta: f64) -> f64 {
    let d = delta - i;
    i * (1.0 + d * d)
}

/// Real roots of `I³ − 2ΔI² + (Δ²+1)I − E² = 0`, ascending, with
/// multiplicity.
pub fn singlemode_intensities(m: &ModelParams) -> Vec<f64> {
    let e2 = m.pump_e2();
    let delta = m.delta;
    if e2 == 0.0 {
        return alloc::vec![0.0];
    }
    let c2 = -2.0 * delta;
    let c1 = delta * delta + 1.0;
    let c0 = -e2;
    let p = |x: f64| ((x + c2) * x + c1) * x + c0;
    let dp = |x: f64| (3.0 * x + 2.0 * c2) * x + c1;
    let scale = |x: f64| {
        let a = x.abs();
        a * a * a + 2.0 * delta.abs() * a * a + c1 * a + e2
    };

    let comp = [
        [C64::new(-c2, 0.0), C64::new(-c1, 0.0), C64::new(-c0, 0.0)],
        [C64::new(1.0, 0.0), C64::zero(), C64::zero()],
        [C64::zero(), C64::new(1.0, 0.0), C64::zero()],
    ];
    let mut cand: Vec<C64> = eigenvalues(comp).to_vec();
    let mut roots = Vec::with_capacity(3);

    // Turning points are exact double roots; the eigenvalue solver splits
    // them by O(√ε). Snap any pair sitting on a critical point.
    let disc = 4.0 * c2 * c2 - 12.0 * c1;
    if disc >= 0.0 {
        let sq = libm::sqrt(disc);
        for xc in [(-2.0 * c2 - sq) / 6.0, (-2.0 * c2 + sq) / 6.0] {
            if xc <= 0.0 || p(xc).abs() > 64.0 * f64::EPSILON * scale(xc) || cand.len() < 2 {
                continue;
            }
            cand.sort_by(|a, b| (a - C64::new(xc, 0.0)).norm().total_cmp(&(b - C64::new(xc, 0.0)).norm()));
            if (cand[1] - C64::new(xc, 0.0)).norm() < 1e-5 * (1.0 + xc) {
                cand.drain(..2);
                roots.push(xc);
                roots.push(xc);
            }
        }
    }

    for z in cand {
        if z.im.abs() >= 1e-10 {
            continue;
        }
        let mut x = z.re;
        for _ in 0..4 {
            let d = dp(x);
            if d == 0.0 {
                break;
            }
            let nx = x - p(x) / d;
            if p(nx).abs() < p(x).abs() {
                x = nx;
            } else {
                break;
            }
        }
        if x >= 0.0 {
            roots.push(x);
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

/// Largest component of the steady-state residual at `(a1, a2)`.
pub fn residual(a1: C64, a2: C64, m: &ModelParams) -> f64 {
    let r = drift(&phase_point(a1, a2), m);
    r[0].norm().max(r[2].norm())
}

pub fn vacuum(m: &ModelParams) -> SteadyState {
    let mut s = SteadyState {
        branch: Branch::Singlemode,
        phase_partner: false,
        i1: 0.0,
        i2: 0.0,
        phi1: 0.0,
        phi2: 0.0,
        a1: C64::zero(),
        a2: C64::zero(),
        stability: Stability::Stable,
        pump_e2: m.pump_e2(),
    };
    s.stability = classify_stability(&s, m);
    s
}

/// Singlemode state at intensity root `i` of the pump in `m`.
pub fn singlemode_state(m: &ModelParams, i: f64) -> Result<SteadyState> {
    let e = m.pump;
    if e == 0.0 {
        if i != 0.0 {
            return Err(Error::InconsistentSteadyState { residual: i });
        }
        return Ok(vacuum(m));
    }
    if !(i > 0.0) {
        return Err(Error::InvalidParameter("singlemode intensity must be positive"));
    }
    let r = libm::sqrt(i);
    let cos = r / e;
    let sin = (m.delta - i).abs() * r / e;
    let mag = libm::atan2(sin, cos);
    let (mut best_phi, mut best_res) = (0.0f64, f64::INFINITY);
    for phi in [mag, -mag] {
        let a1 = C64::from_polar(r, phi);
        let res = residual(a1, C64::zero(), m);
        if res < best_res || (res == best_res && phi.abs() < best_phi.abs()) {
            best_phi = phi;
            best_res = res;
        }
    }
    if best_res > RESIDUAL_TOL {
        return Err(Error::InconsistentSteadyState { residual: best_res });
    }
    let mut s = SteadyState {
        branch: Branch::Singlemode,
        phase_partner: false,
        i1: i,
        i2: 0.0,
        phi1: best_phi,
        phi2: 0.0,
        a1: C64::from_polar(r, best_phi),
        a2: C64::zero(),
        stability: Stability::Stable,
        pump_e2: m.pump_e2(),
    };
    s.stability = classify_stability(&s, m);
    Ok(s)
}

/// All singlemode states at the pump in `m`, ascending in intensity.
pub fn singlemode_states(m: &ModelParams) -> Result<Vec<SteadyState>> {
    singlemode_intensities(m)
        .into_iter()
        .map(|i| singlemode_state(m, i))
        .collect()
}

/// Elliptically polarized states at the pump in `m`, both phase twins
/// included.
pub fn bimode_states(m: &ModelParams) -> Vec<SteadyState> {
    let e2 = m.pump_e2();
    let hb = m.b_mt / 2.0;
    let mut out = Vec::new();
    if e2 <= 0.0 || hb == 0.0 {
        return out;
    }
    let lo = (1.0 / hb.abs()).max(1e-6);
    // Any bimode root obeys I1 ≤ E².
    let hi = (4.0 * (m.delta.abs() + m.pump) + 10.0).max(e2 * (1.0 + 1e-9)).max(2.0 * lo);
    const N: usize = 2000;

    for (branch, sign) in [(Branch::BimodeMinus, -1.0), (Branch::BimodePlus, 1.0)] {
        let i2_of = |i1: f64| {
            let s = hb * hb * i1 * i1 - 1.0;
            m.delta - m.a_mt * i1 + sign * libm::sqrt(s.max(0.0))
        };
        let f = |i1: f64, i2: f64| {
            let s = i1 + i2;
            let d = i1 - i2;
            let t = s - m.delta;
            s * s + d * d * t * t - e2 * i1
        };
        let f_at = |i1: f64| f(i1, i2_of(i1).max(0.0));

        let mut roots = Vec::new();
        let mut x0 = lo;
        let mut i20 = i2_of(x0);
        for k in 1..=N {
            let x1 = lo + (hi - lo) * k as f64 / N as f64;
            let i21 = i2_of(x1);
            let (a, b) = match (i20 >= 0.0, i21 >= 0.0) {
                (true, true) => (Some(x0), Some(x1)),
                (false, false) => (None, None),
                (ok0, _) => {
                    // Split at the point where I2 reaches zero.
                    let (mut l, mut r) = (x0, x1);
                    for _ in 0..200 {
                        let mid = 0.5 * (l + r);
                        if (i2_of(mid) >= 0.0) == ok0 {
                            l = mid;
                        } else {
                            r = mid;
                        }
                        if r - l <= 1e-15 * r {
                            break;
                        }
                    }
                    if ok0 {
                        (Some(x0), Some(l))
                    } else {
                        (Some(r), Some(x1))
                    }
                }
            };
            if let (Some(a), Some(b)) = (a, b) {
                let (fa, fb) = (f_at(a), f_at(b));
                if fa == 0.0 && a == lo {
                    roots.push(a);
                }
                if fb == 0.0 {
                    roots.push(b);
                } else if fa * fb < 0.0 {
                    roots.push(bisect(&f_at, a, b, fa));
                }
            }
            x0 = x1;
            i20 = i21;
        }

        for i1 in roots {
            let i2 = i2_of(i1);
            if i2 <= 0.0 {
                continue;
            }
            if let Some(s) = bimode_phases(m, branch, i1, i2) {
                let mut twin = s;
                twin.phase_partner = true;
                twin.phi2 = wrap_angle(s.phi2 + PI);
                twin.a2 = -s.a2;
                out.push(s);
                out.push(twin);
            }
        }
    }
    for s in out.iter_mut() {
        s.stability = classify_stability(s, m);
    }
    out
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Phases of a bimode root. `cos φ1 = (√I1/E)(1 + I2/I1)` and the relative
/// phase `θ = φ2 − φ1` obeys `cos 2θ = (Δ − I2 − 𝒜I1)/((ℬ/2)I1)`,
/// `sin 2θ = η/((ℬ/2)I1)`; the signs are fixed by the residual.
fn bimode_phases(m: &ModelParams, branch: Branch, i1: f64, i2: f64) -> Option<SteadyState> {
    let e = m.pump;
    let hb = m.b_mt / 2.0;
    let (r1, r2) = (libm::sqrt(i1), libm::sqrt(i2));
    let cos1 = r1 / e * (1.0 + i2 / i1);
    if cos1 > 1.0 + 1e-9 {
        return None;
    }
    let sin1 = r1 / e * ((i1 - i2) * (m.delta - i1 - i2) / i1).abs();
    let mag1 = libm::atan2(sin1, cos1);
    let c2 = (m.delta - i2 - m.a_mt * i1) / (hb * i1);
    if c2.abs() > 1.0 + 1e-9 {
        return None;
    }
    let mag2 = libm::atan2(1.0 / (hb * i1).abs(), c2 * hb.signum());

    let mut best: Option<(f64, f64, f64)> = None;
    for phi1 in [mag1, -mag1] {
        for two_theta in [mag2, -mag2] {
            let phi2 = wrap_angle(phi1 + 0.5 * two_theta);
            let res = residual(C64::from_polar(r1, phi1), C64::from_polar(r2, phi2), m);
            let better = match best {
                None => true,
                Some((b1, b2, bres)) => {
                    res < bres || (res == bres && (phi1.abs(), phi2.abs()) < (b1.abs(), b2.abs()))
                }
            };
            if better {
                best = Some((phi1, phi2, res));
            }
        }
    }
    let (phi1, phi2, res) = best?;
    if res > RESIDUAL_TOL {
        return None;
    }
    Some(SteadyState {
        branch,
        phase_partner: false,
        i1,
        i2,
        phi1,
        phi2,
        a1: C64::from_polar(r1, phi1),
        a2: C64::from_polar(r2, phi2),
        stability: Stability::Stable,
        pump_e2: m.pump_e2(),
    })
}

/// Every steady state (singlemode first, then bimode) at the pump in `m`.
pub fn all_states(m: &ModelParams) -> Result<Vec<SteadyState>> {
    let mut v = singlemode_states(m)?;
    v.extend(bimode_states(m));
    Ok(v)
}

pub fn bistability_range(m: &ModelParams) -> Option<Bistability> {
    let d = m.delta;
    let disc = d * d - 3.0;
    if d <= 0.0 || disc < -1e-12 {
        return None;
    }
    let disc = disc.max(0.0);
    let root = libm::sqrt(disc);
    let cube = libm::sqrt(disc * disc * disc);
    let eta = m.eta();
    let e2a = 2.0 / 27.0 * (d * (d * d + 9.0) + eta * cube);
    let e2b = 2.0 / 27.0 * (d * (d * d + 9.0) - eta * cube);
    let i_minus = (2.0 * d - root) / 3.0;
    let i_plus = (2.0 * d + root) / 3.0;
    Some(Bistability {
        e2_minus: e2a.min(e2b),
        e2_plus: e2a.max(e2b),
        i_minus,
        i_plus,
        upper: Fold {
            i: i_plus,
            e2: singlemode_pump_e2(i_plus, d),
        },
        lower: Fold {
            i: i_minus,
            e2: singlemode_pump_e2(i_minus, d),
        },
    })
}

/// Onset of the orthogonally polarized mode on the singlemode branch.
///
/// The orthogonal-mode block of the Jacobian has eigenvalues
/// `−1 ± √((ℬ/2)²I² − (Δ − 𝒜I)²)`; the threshold is the smallest positive
/// `I` at which one of them reaches zero.
pub fn polarization_threshold(m: &ModelParams) -> Result<PolarizationThreshold> {
    let hb = m.b_mt / 2.0;
    if hb == 0.0 {
        return Err(Error::NoPolarizationThreshold);
    }
    let (ca, d) = (m.a_mt, m.delta);
    let qa = hb * hb - ca * ca;
    let qb = 2.0 * ca * d;
    let qc = -(1.0 + d * d);
    let mut cands: Vec<f64> = Vec::new();
    if qa == 0.0 {
        if qb != 0.0 {
            cands.push(-qc / qb);
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let sq = libm::sqrt(disc);
            let q = -0.5 * (qb + if qb >= 0.0 { sq } else { -sq });
            if q != 0.0 {
                cands.push(q / qa);
                cands.push(qc / q);
            }
        }
    }
    let i_pol = cands
        .into_iter()
        .filter(|x| *x > 0.0 && x.is_finite())
        .fold(f64::INFINITY, f64::min);
    if !i_pol.is_finite() {
        return Err(Error::NoPolarizationThreshold);
    }
    Ok(PolarizationThreshold {
        e2_pol: singlemode_pump_e2(i_pol, d),
        i_pol,
    })
}

pub fn bifurcations(m: &ModelParams) -> BifurcationSet {
    BifurcationSet {
        bistable: bistability_range(m),
        polarization: polarization_threshold(m).ok(),
    }
}

/// Intensity and pump of a bifurcation point.
pub fn bifurcation_point(m: &ModelParams, kind: Bifurcation) -> Result<Fold> {
    match kind {
        Bifurcation::Polarization => {
            let t = polarization_threshold(m)?;
            Ok(Fold {
                i: t.i_pol,
                e2: t.e2_pol,
            })
        }
        Bifurcation::UpperFold | Bifurcation::LowerFold => {
            let b = bistability_range(m).ok_or(Error::InvalidParameter("no bistable window at this detuning"))?;
            Ok(if kind == Bifurcation::UpperFold { b.upper } else { b.lower })
        }
    }
}

/// Singlemode state at relative pump offset `eps` from a bifurcation, on
/// the side where the branch ending there exists.
pub fn approach(m: &ModelParams, kind: Bifurcation, eps: f64) -> Result<SteadyState> {
    let p = bifurcation_point(m, kind)?;
    let e2 = match kind {
        Bifurcation::UpperFold => p.e2 * (1.0 + eps),
        Bifurcation::LowerFold | Bifurcation::Polarization => p.e2 * (1.0 - eps),
    };
    let mm = m.with_pump_e2(e2);
    let roots = singlemode_intensities(&mm);
    let i = roots
        .iter()
        .copied()
        .min_by(|a, b| (a - p.i).abs().total_cmp(&(b - p.i).abs()))
        .ok_or(Error::InvalidParameter("no singlemode root near the bifurcation"))?;
    singlemode_state(&mm, i)
}

pub fn classify_stability(s: &SteadyState, m: &ModelParams) -> Stability {
    let ev = drift_jacobian(s, m).eigenvalues();
    let max_re = ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    if max_re > STABILITY_TOL || max_re.is_nan() {
        Stability::Unstable
    } else if max_re >= -STABILITY_TOL {
        Stability::Marginal
    } else {
        Stability::Stable
    }
}

/// Integrates the classical mean-field equations from `a0` and returns the
/// steady state the trajectory settles on.
pub fn relax(m: &ModelParams, a0: (C64, C64), t_max: f64) -> Result<SteadyState> {
    if !(t_max > 0.0) {
        return Err(Error::InvalidParameter("t_max must be positive"));
    }
    let (a1, a2, deriv) = integrate_classical(m, a0, t_max, 1e-10);
    if !(deriv < 1e-10) {
        return Err(Error::NotSettled { t_max, derivative: deriv });
    }
    let scale = 1.0 + a1.norm() + a2.norm();
    all_states(m)?
        .into_iter()
        .map(|s| ((s.a1 - a1).norm() + (s.a2 - a2).norm(), s))
        .filter(|(d, _)| *d < 1e-5 * scale)
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .map(|(_, s)| s)
        .ok_or(Error::NoMatchingState)
}

/// Fixed-step RK4 for the classical equations. Stops early once the
/// derivative norm drops below `settle`; returns the final amplitudes and
/// derivative norm.
pub fn integrate_classical(m: &ModelParams, a0: (C64, C64), t_max: f64, settle: f64) -> (C64, C64, f64) {
    const H: f64 = 0.01;
    let rhs = |a1: C64, a2: C64| {
        let d = drift(&phase_point(a1, a2), m);
        (d[0], d[2])
    };
    let (mut a1, mut a2) = a0;
    let mut t = 0.0;
    loop {
        let (k1a, k1b) = rhs(a1, a2);
        let deriv = libm::sqrt(k1a.norm_sqr() + k1b.norm_sqr());
        if deriv < settle || t >= t_max || !deriv.is_finite() {
            return (a1, a2, deriv);
        }
        let h = H.min(t_max - t);
        let (k2a, k2b) = rhs(a1 + k1a * (h / 2.0), a2 + k1b * (h / 2.0));
        let (k3a, k3b) = rhs(a1 + k2a * (h / 2.0), a2 + k2b * (h / 2.0));
        let (k4a, k4b) = rhs(a1 + k3a * h, a2 + k3b * h);
        a1 += (k1a + k2a * 2.0 + k3a * 2.0 + k4a) * (h / 6.0);
        a2 += (k1b + k2b * 2.0 + k3b * 2.0 + k4b) * (h / 6.0);
        t += h;
    }
}

/// Reduces an angle to `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = libm::remainder(x, 2.0 * PI);
    if y <= -PI {
        y += 2.0 * PI;
    }
    y
}
