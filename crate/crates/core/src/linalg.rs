//! Small dense complex linear algebra: Hermitian Jacobi eigensolver and
//! Gaussian elimination with partial pivoting.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::ops::{Index, IndexMut};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(r, c, |i, j| Complex64::new(rows[i][j], 0.0))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, x.len(), "matvec dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn sub(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest deviation from Hermitian symmetry, `max |A_ij − conj(A_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    fn frobenius_sqr(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending; column `i` of
/// `vectors` belongs to `values[i]`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }

    /// `V · diag(f(μ)) · V*`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        let weights: Vec<f64> = self.values.iter().map(|&mu| f(mu)).collect();
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = ZERO;
                for k in 0..n {
                    acc += v[(i, k)] * v[(j, k)].conj() * weights[k];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }
}

/// Off-diagonal tolerance relative to the Frobenius norm.
pub const JACOBI_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix.
///
/// Each rotation first removes the phase of the pivot entry with a diagonal
/// unitary, then applies the real symmetric Jacobi rotation. Sweeps stop once
/// the off-diagonal mass drops below `JACOBI_TOL · ‖A‖_F`.
pub fn hermitian_eigen(a: &CMatrix) -> Result<HermitianEigen> {
    if !a.is_square() {
        return Err(Error::InvalidInput(format!(
            "eigensolver needs a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    let n = a.rows;
    let mut m = a.clone();
    // Symmetrize so roundoff in the input cannot break the rotations.
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in i + 1..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
    let mut v = CMatrix::identity(n);
    let total = m.frobenius_sqr().sqrt();
    let threshold = JACOBI_TOL * total;

    let off_mass = |m: &CMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_mass(&m);
        if off <= threshold || total == 0.0 {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let beta = m[(p, q)];
                let mag = beta.norm();
                if mag <= f64::MIN_POSITIVE {
                    continue;
                }
                let alpha = m[(p, p)].re;
                let gamma = m[(q, q)].re;
                // Skip rotations that cannot change the diagonal at working precision.
                if sweeps > 3 && mag < 1e-18 * (alpha.abs() + gamma.abs()) {
                    m[(p, q)] = ZERO;
                    m[(q, p)] = ZERO;
                    continue;
                }
                let phase = beta / mag;
                let tau = (gamma - alpha) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G = diag(1, conj(phase)) · [[c, s], [−s, c]]
                let g_pp = Complex64::new(c, 0.0);
                let g_pq = Complex64::new(s, 0.0);
                let g_qp = -phase.conj() * s;
                let g_qq = phase.conj() * c;

                // m ← m·G
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * g_pp + mkq * g_qp;
                    m[(k, q)] = mkp * g_pq + mkq * g_qq;
                }
                // m ← G*·m
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = g_pp.conj() * mpk + g_qp.conj() * mqk;
                    m[(q, k)] = g_pq.conj() * mpk + g_qq.conj() * mqk;
                }
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * g_pp + vkq * g_qp;
                    v[(k, q)] = vkp * g_pq + vkq * g_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues only (ascending).
pub fn hermitian_eigenvalues(a: &CMatrix) -> Result<Vec<f64>> {
    hermitian_eigen(a).map(|e| e.values)
}

/// LU factorization with partial pivoting, `P·A = L·U`, stored compactly.
#[derive(Debug, Clone)]
pub struct LuFactor {
    lu: CMatrix,
    perm: Vec<usize>,
    sign: f64,
}

/// Pivots below this fraction of the largest entry count as singular.
pub const SINGULAR_TOL: f64 = 1e-14;

pub fn lu_factor(a: &CMatrix) -> Result<LuFactor> {
    if !a.is_square() {
        return Err(Error::InvalidInput("LU needs a square matrix".into()));
    }
    let n = a.rows;
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    for col in 0..n {
        let (piv, piv_abs) =
            (col..n)
                .map(|r| (r, lu[(r, col)].norm()))
                .fold(
                    (col, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if piv_abs <= SINGULAR_TOL * scale {
            return Err(Error::Singular {
                col,
                pivot: piv_abs,
            });
        }
        if piv != col {
            for j in 0..n {
                let tmp = lu[(col, j)];
                lu[(col, j)] = lu[(piv, j)];
                lu[(piv, j)] = tmp;
            }
            perm.swap(col, piv);
            sign = -sign;
        }
        let d = lu[(col, col)];
        for r in col + 1..n {
            let factor = lu[(r, col)] / d;
            lu[(r, col)] = factor;
            if factor == ZERO {
                continue;
            }
            for j in col + 1..n {
                let u = lu[(col, j)];
                lu[(r, j)] -= factor * u;
            }
        }
    }
    Ok(LuFactor { lu, perm, sign })
}

impl LuFactor {
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.perm.len();
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc / self.lu[(i, i)];
        }
        x
    }

    pub fn det(&self) -> Complex64 {
        let n = self.perm.len();
        (0..n).map(|i| self.lu[(i, i)]).product::<Complex64>() * self.sign
    }
}

/// Dense solve by Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &CMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    Ok(lu_factor(a)?.solve(b))
}

/// Determinant; zero when elimination breaks down on an exactly singular matrix.
pub fn determinant(a: &CMatrix) -> Complex64 {
    match lu_factor(a) {
        Ok(lu) => lu.det(),
        Err(_) => ZERO,
    }
}

/// Smallest singular value of a Hermitian matrix, `min |μ|`.
pub fn hermitian_sigma_min(a: &CMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(a)?
        .into_iter()
        .map(f64::abs)
        .fold(f64::INFINITY, f64::min))
}

pub fn vec_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_dist(x: &[Complex64], y: &[Complex64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `‖x − y‖ / ‖y‖`, with `‖y‖ = 0` treated as absolute.
pub fn rel_dist(x: &[Complex64], y: &[Complex64]) -> f64 {
    let scale = vec_norm(y);
    let d = vec_dist(x, y);
    if scale == 0.0 {
        d
    } else {
        d / scale
    }
}
