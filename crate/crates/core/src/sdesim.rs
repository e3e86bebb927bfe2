//! Monte Carlo integration of the linearized and full Langevin equations
//! and Welch estimation of the fluctuation spectral matrix.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Zero;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{ComplexMatrix4, Vec4, C64};
use crate::linfluct::{diffusion_at, diffusion_matrix, drift, drift_jacobian, phase_point, FrequencyGrid};
use crate::squeeze::{Mode, QuadratureSpec};
use crate::{Error, ModelParams, Result, SteadyState};

/// Entries below this magnitude count as zero in [`noise_factor`].
pub const BLOCK_TOL: f64 = 1e-14;
/// Full-equation trajectories are dropped once `max |a_k|` exceeds this.
pub const DIVERGENCE_BOUND: f64 = 1e3;
pub const MIN_SEGMENTS: usize = 8;

/// Noise matrix `B` with `B·Bᵀ = D` (plain transpose). Column pairs
/// `{0, 1}` and `{2, 3}` drive the index blocks `{0, 2}` and `{1, 3}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseFactor {
    pub b: ComplexMatrix4,
}

impl NoiseFactor {
    pub fn reconstruct(&self) -> ComplexMatrix4 {
        self.b * self.b.transpose()
    }

    fn apply(&self, xi: &[f64; 4]) -> Vec4 {
        let mut out = [C64::zero(); 4];
        for (r, o) in out.iter_mut().enumerate() {
            for c in 0..4 {
                *o += self.b.0[r][c] * xi[c];
            }
        }
        out
    }
}

/// Block Cholesky factor of a diffusion matrix whose only nonzero
/// entries lie in the `{0, 2}` and `{1, 3}` blocks. The larger diagonal of
/// each block is used as pivot.
pub fn noise_factor(d: &ComplexMatrix4) -> Result<NoiseFactor> {
    let mut b = ComplexMatrix4::zeros();
    for (i, j, col) in [(0usize, 2usize, 0usize), (1, 3, 2)] {
        let (p, q) = if d.0[i][i].norm() >= d.0[j][j].norm() { (i, j) } else { (j, i) };
        let dpp = d.0[p][p];
        let dqq = d.0[q][q];
        let dpq = d.0[p][q];
        if dpp.norm() < BLOCK_TOL {
            if dpq.norm() >= BLOCK_TOL {
                return Err(Error::DegenerateBlock);
            }
            // Both diagonals vanish with no coupling; keep whatever is left.
            b.0[p][col] = dpp.sqrt();
            b.0[q][col + 1] = dqq.sqrt();
            continue;
        }
        let bpp = dpp.sqrt();
        let bqp = dpq / bpp;
        b.0[p][col] = bpp;
        b.0[q][col] = bqp;
        b.0[q][col + 1] = (dqq - bqp * bqp).sqrt();
    }
    Ok(NoiseFactor { b })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    /// Total integration time, burn-in included.
    pub duration: f64,
    pub n_traj: usize,
    pub seed: u64,
    pub burn_in: f64,
    /// Integration steps between stored samples.
    pub sample_every: usize,
    /// The Welch segment length is the recorded time divided by this.
    pub welch_segments: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 1e-3,
            duration: 200.0,
            n_traj: 400,
            seed: 0,
            burn_in: 20.0,
            sample_every: 20,
            welch_segments: 2,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig("dt must be positive"));
        }
        if !(self.burn_in >= 0.0 && self.duration > self.burn_in && self.duration.is_finite()) {
            return Err(Error::InvalidConfig("duration must exceed burn_in"));
        }
        if self.n_traj == 0 {
            return Err(Error::InvalidConfig("n_traj must be at least 1"));
        }
        if self.sample_every == 0 || self.welch_segments == 0 {
            return Err(Error::InvalidConfig("sample_every and welch_segments must be positive"));
        }
        if self.record_samples() < 2 {
            return Err(Error::InvalidConfig("record is shorter than two samples"));
        }
        Ok(())
    }

    pub fn total_steps(&self) -> usize {
        libm::round(self.duration / self.dt) as usize
    }

    pub fn burn_in_steps(&self) -> usize {
        libm::round(self.burn_in / self.dt) as usize
    }

    pub fn sample_dt(&self) -> f64 {
        self.dt * self.sample_every as f64
    }

    pub fn record_samples(&self) -> usize {
        self.total_steps().saturating_sub(self.burn_in_steps()) / self.sample_every
    }

    pub fn segment_len(&self) -> usize {
        self.record_samples() / self.welch_segments
    }
}

/// Stored samples of an ensemble, one row per surviving trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub sample_dt: f64,
    pub trajectories: Vec<Vec<Vec4>>,
    /// Original trajectory index of each stored row.
    pub indices: Vec<usize>,
    pub diverged: usize,
}

impl Ensemble {
    /// Subtracts `center` from every sample.
    pub fn centered(&self, center: &Vec4) -> Ensemble {
        let mut out = self.clone();
        for tr in &mut out.trajectories {
            for x in tr.iter_mut() {
                for k in 0..4 {
                    x[k] -= center[k];
                }
            }
        }
        out
    }

    /// Time and ensemble average of every channel.
    pub fn mean(&self) -> Vec4 {
        let mut acc = [C64::zero(); 4];
        let mut n = 0usize;
        for tr in &self.trajectories {
            for x in tr {
                for k in 0..4 {
                    acc[k] += x[k];
                }
            }
            n += tr.len();
        }
        acc.map(|z| z / (n.max(1) as f64))
    }
}

fn trajectory_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn normals(rng: &mut ChaCha8Rng) -> [f64; 4] {
    [
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
    ]
}

fn ordered_map<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

struct Linearized {
    jac: ComplexMatrix4,
    noise: NoiseFactor,
}

impl Linearized {
    fn new(s: &SteadyState, m: &ModelParams) -> Result<Self> {
        if !s.is_stable() {
            return Err(Error::UnstableState);
        }
        Ok(Linearized {
            jac: drift_jacobian(s, m),
            noise: noise_factor(&diffusion_at(s, m))?,
        })
    }

    /// Runs trajectory `index` from zero and passes every kept sample to `sink`.
    fn run(&self, cfg: &SimConfig, index: usize, mut sink: impl FnMut(&Vec4)) -> Result<()> {
        let mut rng = trajectory_rng(cfg.seed, index);
        let sq = libm::sqrt(cfg.dt);
        let burn = cfg.burn_in_steps();
        let kept = cfg.record_samples() * cfg.sample_every;
        let mut x = [C64::zero(); 4];
        for step in 1..=burn + kept {
            let dx = self.jac.mul_vec(&x);
            let dw = self.noise.apply(&normals(&mut rng));
            for k in 0..4 {
                x[k] += dx[k] * cfg.dt + dw[k] * sq;
            }
            if step > burn && (step - burn) % cfg.sample_every == 0 {
                if x.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                    return Err(Error::NonFinite { trajectory: index, step });
                }
                sink(&x);
            }
        }
        Ok(())
    }
}

/// Euler–Maruyama integration of the linearized fluctuations `δa` about a
/// stable state, started at `δa = 0`. Trajectory `k` draws from stream `k`
/// of a ChaCha8 generator seeded with `cfg.seed`.
pub fn integrate_linearized(s: &SteadyState, m: &ModelParams, cfg: &SimConfig) -> Result<Ensemble> {
    cfg.validate()?;
    let lin = Linearized::new(s, m)?;
    let runs = ordered_map(cfg.n_traj, |k| {
        let mut out = Vec::with_capacity(cfg.record_samples());
        lin.run(cfg, k, |x| out.push(*x)).map(|_| out)
    });
    let trajectories = runs.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(Ensemble {
        sample_dt: cfg.sample_dt(),
        indices: (0..trajectories.len()).collect(),
        trajectories,
        diverged: 0,
    })
}

/// Euler–Maruyama integration of the full equations from `a0` with noise
/// scaled by `√coupling` (`coupling = g/γ`; zero gives the classical
/// flow). Samples are the phase-space point `(α1, α1⁺, α2, α2⁺)`.
/// Diverging trajectories are dropped and counted.
pub fn integrate_full(m: &ModelParams, a0: (C64, C64), cfg: &SimConfig, coupling: f64) -> Result<Ensemble> {
    cfg.validate()?;
    if !(coupling >= 0.0 && coupling.is_finite()) {
        return Err(Error::InvalidConfig("coupling must be finite and non-negative"));
    }
    let start = phase_point(a0.0, a0.1);
    let scale = libm::sqrt(coupling * cfg.dt);
    let burn = cfg.burn_in_steps();
    let kept = cfg.record_samples() * cfg.sample_every;
    let runs = ordered_map(cfg.n_traj, |index| -> Result<Option<Vec<Vec4>>> {
        let mut rng = trajectory_rng(cfg.seed, index);
        let mut x = start;
        let mut out = Vec::with_capacity(cfg.record_samples());
        for step in 1..=burn + kept {
            let a = drift(&x, m);
            let dw = if coupling > 0.0 {
                noise_factor(&diffusion_matrix(&x, m))?.apply(&normals(&mut rng))
            } else {
                [C64::zero(); 4]
            };
            for k in 0..4 {
                x[k] += a[k] * cfg.dt + dw[k] * scale;
            }
            let size = x.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
            if !(size <= DIVERGENCE_BOUND) {
                return Ok(None);
            }
            if step > burn && (step - burn) % cfg.sample_every == 0 {
                out.push(x);
            }
        }
        Ok(Some(out))
    });
    let mut ens = Ensemble {
        sample_dt: cfg.sample_dt(),
        trajectories: Vec::new(),
        indices: Vec::new(),
        diverged: 0,
    };
    for (k, r) in runs.into_iter().enumerate() {
        match r? {
            Some(tr) => {
                ens.trajectories.push(tr);
                ens.indices.push(k);
            }
            None => ens.diverged += 1,
        }
    }
    if 2 * ens.diverged > cfg.n_traj {
        return Err(Error::UnreliableRegime {
            diverged: ens.diverged,
            total: cfg.n_traj,
        });
    }
    Ok(ens)
}

/// Welch accumulator for one trajectory: Hann window, 50% overlap.
struct Welch<'a> {
    omegas: &'a [f64],
    seg_len: usize,
    ds: f64,
    window: Vec<f64>,
    /// Per-frequency phase factors `e^{−iωn·ds}` for one segment.
    phases: Vec<Vec<C64>>,
    buf: Vec<Vec4>,
    sum: Vec<ComplexMatrix4>,
    segments: usize,
    per_segment: Option<Vec<Vec<ComplexMatrix4>>>,
}

impl<'a> Welch<'a> {
    fn new(omegas: &'a [f64], seg_len: usize, ds: f64, keep_segments: bool) -> Self {
        let window: Vec<f64> = (0..seg_len)
            .map(|n| {
                let s = libm::sin(PI * n as f64 / seg_len as f64);
                s * s
            })
            .collect();
        let phases = omegas
            .iter()
            .map(|&w| {
                (0..seg_len)
                    .map(|n| {
                        let (s, c) = libm::sincos(w * n as f64 * ds);
                        C64::new(c, -s)
                    })
                    .collect()
            })
            .collect();
        Welch {
            omegas,
            seg_len,
            ds,
            window,
            phases,
            buf: Vec::with_capacity(seg_len),
            sum: vec![ComplexMatrix4::zeros(); omegas.len()],
            segments: 0,
            per_segment: keep_segments.then(Vec::new),
        }
    }

    fn push(&mut self, x: &Vec4) {
        self.buf.push(*x);
        if self.buf.len() == self.seg_len {
            self.segment();
            let half = self.seg_len / 2;
            self.buf.drain(..self.seg_len - half);
        }
    }

    fn segment(&mut self) {
        let norm = self.ds / self.window.iter().map(|w| w * w).sum::<f64>();
        let mut est = Vec::with_capacity(self.omegas.len());
        for (k, ph) in self.phases.iter().enumerate() {
            let mut fp = [C64::zero(); 4];
            let mut fm = [C64::zero(); 4];
            for ((x, &w), &e) in self.buf.iter().zip(&self.window).zip(ph) {
                for c in 0..4 {
                    let wx = x[c] * w;
                    fp[c] += wx * e;
                    fm[c] += wx * e.conj();
                }
            }
            let mut mh = ComplexMatrix4::zeros();
            for i in 0..4 {
                for j in 0..4 {
                    mh.0[i][j] = fm[i] * fp[j] * norm;
                }
            }
            self.sum[k] = self.sum[k] + mh;
            est.push(mh);
        }
        self.segments += 1;
        if let Some(p) = &mut self.per_segment {
            p.push(est);
        }
    }
}

/// Estimated spectral matrix on a frequency grid, with the per-unit
/// estimates kept for jackknife errors. Units are trajectories, or
/// individual segments when there is a single trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEstimate {
    pub omegas: Vec<f64>,
    pub segments: usize,
    units: Vec<Vec<ComplexMatrix4>>,
}

impl SpectralEstimate {
    fn from_units(omegas: &[f64], segments: usize, units: Vec<Vec<ComplexMatrix4>>) -> Result<Self> {
        if segments < MIN_SEGMENTS || units.len() < 2 {
            return Err(Error::InsufficientData { segments });
        }
        Ok(SpectralEstimate {
            omegas: omegas.to_vec(),
            segments,
            units,
        })
    }

    pub fn n_units(&self) -> usize {
        self.units.len()
    }

    /// Estimate of `M(ω_k)`.
    pub fn matrix(&self, k: usize) -> ComplexMatrix4 {
        let mut acc = ComplexMatrix4::zeros();
        for u in &self.units {
            acc = acc + u[k];
        }
        acc.scale(C64::new(1.0 / self.units.len() as f64, 0.0))
    }

    /// Delete-one jackknife mean and standard error of a real functional of
    /// `M(ω_k)`.
    pub fn stderr_of(&self, k: usize, f: impl Fn(&ComplexMatrix4) -> f64) -> (f64, f64) {
        let n = self.units.len();
        let total = self.matrix(k).scale(C64::new(n as f64, 0.0));
        let inv = C64::new(1.0 / (n - 1) as f64, 0.0);
        let loo: Vec<f64> = self.units.iter().map(|u| f(&(total - u[k]).scale(inv))).collect();
        let mean = loo.iter().sum::<f64>() / n as f64;
        let var = loo.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() * (n - 1) as f64 / n as f64;
        (f(&self.matrix(k)), libm::sqrt(var))
    }

    /// Elementwise jackknife errors of `M(ω_k)`, real and imaginary parts.
    pub fn elementwise_stderr(&self, k: usize) -> [[(f64, f64); 4]; 4] {
        let mut out = [[(0.0, 0.0); 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                e.0 = self.stderr_of(k, |m| m.0[i][j].re).1;
                e.1 = self.stderr_of(k, |m| m.0[i][j].im).1;
            }
        }
        out
    }

    /// Normal-ordered output quadrature spectrum `uᵀ·2M̂·u` and its error.
    pub fn quadrature(&self, k: usize, mode: Mode, beta: f64) -> (f64, f64) {
        let u = QuadratureSpec::new(mode, beta).vector();
        self.stderr_of(k, |m| {
            let mu = m.mul_vec(&u);
            let mut acc = C64::zero();
            for c in 0..4 {
                acc += u[c] * mu[c];
            }
            2.0 * acc.re
        })
    }
}

fn segment_len(total: usize, welch_segments: usize) -> usize {
    total / welch_segments.max(1)
}

/// Welch estimate from stored samples. Every trajectory is cut into
/// segments of `len / welch_segments` samples.
pub fn estimate_spectral_matrix(ens: &Ensemble, grid: &FrequencyGrid, welch_segments: usize) -> Result<SpectralEstimate> {
    let omegas = grid.omegas();
    let single = ens.trajectories.len() == 1;
    let mut units = Vec::new();
    let mut segments = 0;
    for tr in &ens.trajectories {
        let len = segment_len(tr.len(), welch_segments);
        if len < 2 {
            continue;
        }
        let mut w = Welch::new(omegas, len, ens.sample_dt, single);
        for x in tr {
            w.push(x);
        }
        segments += w.segments;
        if single {
            units = w.per_segment.take().unwrap_or_default();
        } else if w.segments > 0 {
            let inv = C64::new(1.0 / w.segments as f64, 0.0);
            units.push(w.sum.iter().map(|m| m.scale(inv)).collect());
        }
    }
    SpectralEstimate::from_units(omegas, segments, units)
}

/// Integrates the linearized equations and estimates `M(ω)` trajectory by
/// trajectory, without storing samples.
pub fn simulate_spectra(s: &SteadyState, m: &ModelParams, cfg: &SimConfig, grid: &FrequencyGrid) -> Result<SpectralEstimate> {
    cfg.validate()?;
    let lin = Linearized::new(s, m)?;
    let omegas = grid.omegas();
    let len = cfg.segment_len();
    if len < 2 {
        return Err(Error::InsufficientData { segments: 0 });
    }
    let single = cfg.n_traj == 1;
    let runs = ordered_map(cfg.n_traj, |k| -> Result<(usize, Vec<Vec<ComplexMatrix4>>)> {
        let mut w = Welch::new(omegas, len, cfg.sample_dt(), single);
        lin.run(cfg, k, |x| w.push(x))?;
        if single {
            return Ok((w.segments, w.per_segment.take().unwrap_or_default()));
        }
        let inv = C64::new(1.0 / w.segments.max(1) as f64, 0.0);
        Ok((w.segments, vec![w.sum.iter().map(|m| m.scale(inv)).collect()]))
    });
    let mut units = Vec::new();
    let mut segments = 0;
    for r in runs {
        let (n, u) = r?;
        segments += n;
        units.extend(u);
    }
    SpectralEstimate::from_units(omegas, segments, units)
}
