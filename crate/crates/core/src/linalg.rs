//! Small dense complex linear algebra: a fixed 4×4 matrix type, LU with
//! partial pivoting and a shifted QR eigenvalue routine.

use core::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use num_traits::Zero;

pub type C64 = Complex64;

pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Row-major 4×4 complex matrix indexed in fluctuation order
/// `(δα1, δα1⁺, δα2, δα2⁺)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMatrix4(pub [[C64; 4]; 4]);

pub type Vec4 = [C64; 4];

impl Default for ComplexMatrix4 {
    fn default() -> Self {
        Self::zeros()
    }
}

impl ComplexMatrix4 {
    pub fn zeros() -> Self {
        ComplexMatrix4([[C64::zero(); 4]; 4])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for k in 0..4 {
            m.0[k][k] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros();
        for r in 0..4 {
            for c in 0..4 {
                t.0[c][r] = self.0[r][c];
            }
        }
        t
    }

    pub fn scale(&self, k: C64) -> Self {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for x in row.iter_mut() {
                *x *= k;
            }
        }
        out
    }

    /// `self + z·I`.
    pub fn shift(&self, z: C64) -> Self {
        let mut out = *self;
        for k in 0..4 {
            out.0[k][k] += z;
        }
        out
    }

    pub fn mul_vec(&self, v: &Vec4) -> Vec4 {
        let mut out = [C64::zero(); 4];
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.0[r][0] * v[0] + self.0[r][1] * v[1] + self.0[r][2] * v[2] + self.0[r][3] * v[3];
        }
        out
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.0
            .iter()
            .map(|row| row.iter().map(|x| x.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest absolute column sum.
    pub fn norm_1(&self) -> f64 {
        self.transpose().norm_inf()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|row| row.iter())
            .map(|x| x.norm())
            .fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> [C64; 4] {
        eigenvalues(self.0)
    }
}

impl Index<(usize, usize)> for ComplexMatrix4 {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.0[r][c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix4 {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.0[r][c]
    }
}

impl Add for ComplexMatrix4 {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for r in 0..4 {
            for c in 0..4 {
                self.0[r][c] += rhs.0[r][c];
            }
        }
        self
    }
}

impl Sub for ComplexMatrix4 {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for r in 0..4 {
            for c in 0..4 {
                self.0[r][c] -= rhs.0[r][c];
            }
        }
        self
    }
}

impl Mul for ComplexMatrix4 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zeros();
        for r in 0..4 {
            for c in 0..4 {
                let mut acc = C64::zero();
                for k in 0..4 {
                    acc += self.0[r][k] * rhs.0[k][c];
                }
                out.0[r][c] = acc;
            }
        }
        out
    }
}

/// LU factorization `P·A = L·U` with partial pivoting.
#[derive(Debug, Clone, Copy)]
pub struct Lu4 {
    lu: [[C64; 4]; 4],
    perm: [usize; 4],
    norm1: f64,
}

impl Lu4 {
    /// Returns `None` when a pivot is exactly zero.
    pub fn new(a: &ComplexMatrix4) -> Option<Self> {
        let mut lu = a.0;
        let mut perm = [0, 1, 2, 3];
        for k in 0..4 {
            let p = (k..4)
                .max_by(|&i, &j| lu[i][k].norm().total_cmp(&lu[j][k].norm()))
                .unwrap_or(k);
            if lu[p][k].is_zero() {
                return None;
            }
            lu.swap(k, p);
            perm.swap(k, p);
            let pivot = lu[k][k];
            for i in k + 1..4 {
                let f = lu[i][k] / pivot;
                lu[i][k] = f;
                for j in k + 1..4 {
                    let u = lu[k][j];
                    lu[i][j] -= f * u;
                }
            }
        }
        Some(Lu4 {
            lu,
            perm,
            norm1: a.norm_1(),
        })
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &Vec4) -> Vec4 {
        let mut x = [C64::zero(); 4];
        for i in 0..4 {
            let mut s = b[self.perm[i]];
            for j in 0..i {
                s -= self.lu[i][j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..4).rev() {
            let mut s = x[i];
            for j in i + 1..4 {
                s -= self.lu[i][j] * x[j];
            }
            x[i] = s / self.lu[i][i];
        }
        x
    }

    /// Solves `Aᵀ x = b` (plain transpose).
    pub fn solve_transpose(&self, b: &Vec4) -> Vec4 {
        // Aᵀ = Uᵀ Lᵀ P, so solve Uᵀ y = b, Lᵀ z = y, x = Pᵀ z.
        let mut y = [C64::zero(); 4];
        for i in 0..4 {
            let mut s = b[i];
            for j in 0..i {
                s -= self.lu[j][i] * y[j];
            }
            y[i] = s / self.lu[i][i];
        }
        for i in (0..4).rev() {
            let mut s = y[i];
            for j in i + 1..4 {
                s -= self.lu[j][i] * y[j];
            }
            y[i] = s;
        }
        let mut x = [C64::zero(); 4];
        for i in 0..4 {
            x[self.perm[i]] = y[i];
        }
        x
    }

    fn solve_adjoint(&self, b: &Vec4) -> Vec4 {
        let cb = b.map(|z| z.conj());
        self.solve_transpose(&cb).map(|z| z.conj())
    }

    /// 1-norm condition number, with `‖A⁻¹‖₁` from Hager's estimator.
    pub fn condition(&self) -> f64 {
        let mut x = [C64::new(0.25, 0.0); 4];
        let mut est = 0.0;
        for iter in 0..5 {
            let y = self.solve(&x);
            let new_est: f64 = y.iter().map(|z| z.norm()).sum();
            if !new_est.is_finite() {
                return f64::INFINITY;
            }
            if iter > 0 && new_est <= est {
                break;
            }
            est = new_est;
            let xi = y.map(|z| {
                let n = z.norm();
                if n == 0.0 {
                    C64::new(1.0, 0.0)
                } else {
                    z / n
                }
            });
            let z = self.solve_adjoint(&xi);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.norm()))
                .fold((0, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
            if iter > 0 && zmax <= ztx {
                break;
            }
            x = [C64::zero(); 4];
            x[j] = C64::new(1.0, 0.0);
        }
        est * self.norm1
    }
}

/// Eigenvalues of a small dense complex matrix by Hessenberg reduction and
/// single-shift QR with Wilkinson shifts. Order is unspecified.
pub fn eigenvalues<const N: usize>(mut h: [[C64; N]; N]) -> [C64; N] {
    let mut eig = [C64::zero(); N];
    if N == 0 {
        return eig;
    }

    // Hessenberg form via Givens similarity rotations.
    for k in 0..N.saturating_sub(2) {
        for i in (k + 2..N).rev() {
            let (c, s) = givens(h[i - 1][k], h[i][k]);
            rotate_rows(&mut h, i - 1, i, c, s, 0, N - 1);
            rotate_cols(&mut h, i - 1, i, c, s, 0, N - 1);
            h[i][k] = C64::zero();
        }
    }

    let mut hi = N - 1;
    let mut iter = 0usize;
    let mut rot = [(0.0, C64::zero()); N];
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let scale = h[l][l].norm() + h[l - 1][l - 1].norm();
            if h[l][l - 1].norm() <= f64::EPSILON * scale || h[l][l - 1].norm() < f64::MIN_POSITIVE {
                h[l][l - 1] = C64::zero();
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[hi][hi];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > 60 * N {
            // No convergence; report the diagonal of the active window.
            for k in l..=hi {
                eig[k] = h[k][k];
            }
            hi = l;
            if hi == 0 {
                break;
            }
            continue;
        }

        let mu = if iter % 11 == 0 {
            // Exceptional shift to break cycles.
            h[hi][hi] + C64::new(h[hi][hi - 1].norm(), 0.0)
        } else {
            wilkinson_shift(h[hi - 1][hi - 1], h[hi - 1][hi], h[hi][hi - 1], h[hi][hi])
        };

        for k in l..=hi {
            h[k][k] -= mu;
        }
        for k in l..hi {
            let (c, s) = givens(h[k][k], h[k + 1][k]);
            rot[k] = (c, s);
            rotate_rows(&mut h, k, k + 1, c, s, k, hi);
            h[k + 1][k] = C64::zero();
        }
        for k in l..hi {
            let (c, s) = rot[k];
            rotate_cols(&mut h, k, k + 1, c, s, l, (k + 2).min(hi));
        }
        for k in l..=hi {
            h[k][k] += mu;
        }
    }
    eig[0] = h[0][0];
    eig
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let m = (a + d) * 0.5;
    let r1 = m + disc;
    let r2 = m - disc;
    if (r1 - d).norm() <= (r2 - d).norm() {
        r1
    } else {
        r2
    }
}

/// Rotation `[c s; -s̄ c]` mapping `(a, b)` to `(r, 0)`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, C64::zero());
    }
    if na == 0.0 {
        return (0.0, C64::new(1.0, 0.0));
    }
    let r = libm::hypot(na, nb);
    let c = na / r;
    let s = (a / na) * b.conj() / r;
    (c, s)
}

fn rotate_rows<const N: usize>(h: &mut [[C64; N]; N], p: usize, q: usize, c: f64, s: C64, c0: usize, c1: usize) {
    for j in c0..=c1 {
        let hp = h[p][j];
        let hq = h[q][j];
        h[p][j] = hp * c + s * hq;
        h[q][j] = -s.conj() * hp + hq * c;
    }
}

fn rotate_cols<const N: usize>(h: &mut [[C64; N]; N], p: usize, q: usize, c: f64, s: C64, r0: usize, r1: usize) {
    for row in h.iter_mut().take(r1 + 1).skip(r0) {
        let hp = row[p];
        let hq = row[q];
        row[p] = hp * c + hq * s.conj();
        row[q] = -hp * s + hq * c;
    }
}
