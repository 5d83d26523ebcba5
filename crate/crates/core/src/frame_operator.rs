//! The frame operator as a banded Hermitian (block Laurent) matrix, its
//! `a×a` matrix symbol and frame-bound estimates from symbol samples.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, CMatrix};
use crate::sis::ShiftSystem;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Hermitian matrix with `entry(k, l) = 0` for `|k − l| > half_bw`.
///
/// Only the diagonal and the lower diagonals are stored: `bands[d][i]` holds the
/// local entry `(i + d, i)`. Global row `index_origin` is local row 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedHermitian {
    dim: usize,
    half_bw: usize,
    bands: Vec<Vec<Complex64>>,
    index_origin: i64,
}

impl BandedHermitian {
    pub fn zeros(dim: usize, half_bw: usize, index_origin: i64) -> Self {
        let stored = if dim == 0 {
            0
        } else {
            half_bw.min(dim - 1) + 1
        };
        let bands = (0..stored).map(|d| vec![ZERO; dim - d]).collect();
        BandedHermitian {
            dim,
            half_bw,
            bands,
            index_origin,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_bw(&self) -> usize {
        self.half_bw
    }

    pub fn index_origin(&self) -> i64 {
        self.index_origin
    }

    /// Inclusive global index range covered by the matrix.
    pub fn index_range(&self) -> (i64, i64) {
        (self.index_origin, self.index_origin + self.dim as i64 - 1)
    }

    pub(crate) fn stored_bands(&self) -> usize {
        self.bands.len()
    }

    /// Local entry `(i, j)`.
    pub fn local(&self, i: usize, j: usize) -> Complex64 {
        if i >= j {
            self.bands.get(i - j).map_or(ZERO, |b| b[j])
        } else {
            self.bands.get(j - i).map_or(ZERO, |b| b[i].conj())
        }
    }

    /// Entry at global indices; zero outside the stored window.
    pub fn entry(&self, k: i64, l: i64) -> Complex64 {
        let i = k - self.index_origin;
        let j = l - self.index_origin;
        if i < 0 || j < 0 || i >= self.dim as i64 || j >= self.dim as i64 {
            return ZERO;
        }
        self.local(i as usize, j as usize)
    }

    /// Adds `v` to local entry `(i, j)` with `i ≥ j`.
    pub(crate) fn add_lower(&mut self, i: usize, j: usize, v: Complex64) {
        debug_assert!(i >= j);
        if let Some(b) = self.bands.get_mut(i - j) {
            b[j] += v;
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        CMatrix::from_fn(self.dim, self.dim, |i, j| self.local(i, j))
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim);
        let mut y = vec![ZERO; self.dim];
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += self.bands[0][i] * x[i];
        }
        for (d, band) in self.bands.iter().enumerate().skip(1) {
            for (j, &v) in band.iter().enumerate() {
                y[j + d] += v * x[j];
                y[j] += v.conj() * x[j + d];
            }
        }
        y
    }

    /// Sub-matrix on global indices `lo..=hi` (clipped to the stored window).
    pub fn section(&self, lo: i64, hi: i64) -> BandedHermitian {
        let (wlo, whi) = self.index_range();
        let lo = lo.max(wlo);
        let hi = hi.min(whi);
        let dim = if hi < lo { 0 } else { (hi - lo + 1) as usize };
        let mut out = BandedHermitian::zeros(dim, self.half_bw, lo);
        for d in 0..out.bands.len() {
            for j in 0..dim - d {
                out.bands[d][j] = self.entry(lo + (j + d) as i64, lo + j as i64);
            }
        }
        out
    }

    /// Number of eigenvalues strictly below `sigma`, from the inertia of a
    /// banded `LDL*` factorization of `H − σI` (Sylvester's law of inertia).
    pub fn count_eigenvalues_below(&self, sigma: f64) -> usize {
        let n = self.dim;
        let w = self.bands.len().saturating_sub(1);
        let (glo, ghi) = self.gershgorin();
        let scale = glo.abs().max(ghi.abs()).max(f64::MIN_POSITIVE);
        let tiny = f64::EPSILON * scale;
        // l[d][j] = L_{j+d, j}
        let mut l: Vec<Vec<Complex64>> = (0..=w).map(|d| vec![ZERO; n.saturating_sub(d)]).collect();
        let mut diag = vec![0.0f64; n];
        let mut negatives = 0;
        for j in 0..n {
            let kmin = j.saturating_sub(w);
            let mut dj = self.bands[0][j].re - sigma;
            for k in kmin..j {
                dj -= l[j - k][k].norm_sqr() * diag[k];
            }
            if dj == 0.0 {
                dj = tiny;
            }
            diag[j] = dj;
            if dj < 0.0 {
                negatives += 1;
            }
            for i in j + 1..(j + w + 1).min(n) {
                let mut v = self.bands[i - j][j];
                let kmin_i = i.saturating_sub(w).max(kmin);
                for k in kmin_i..j {
                    v -= l[i - k][k] * l[j - k][k].conj() * diag[k];
                }
                l[i - j][j] = v / dj;
            }
        }
        negatives
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.dim {
            let mut radius = 0.0;
            for d in 1..self.bands.len() {
                if i >= d {
                    radius += self.bands[d][i - d].norm();
                }
                if i + d < self.dim {
                    radius += self.bands[d][i].norm();
                }
            }
            let c = self.bands[0][i].re;
            lo = lo.min(c - radius);
            hi = hi.max(c + radius);
        }
        (lo, hi)
    }

    /// Smallest and largest eigenvalue by inertia bisection.
    pub fn extreme_eigenvalues(&self) -> (f64, f64) {
        if self.dim == 0 {
            return (f64::NAN, f64::NAN);
        }
        let (glo, ghi) = self.gershgorin();
        let pad = 1e-12 * (glo.abs().max(ghi.abs())).max(1e-300);
        let (glo, ghi) = (glo - pad, ghi + pad);
        let n = self.dim;
        let bisect = |pred: &dyn Fn(f64) -> bool| {
            // smallest σ with pred(σ) true; pred is monotone in σ
            let (mut lo, mut hi) = (glo, ghi);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if pred(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let min = bisect(&|s| self.count_eigenvalues_below(s) >= 1);
        let max = bisect(&|s| self.count_eigenvalues_below(s) >= n);
        (min, max)
    }

    /// Spectral condition number `λ_max / λ_min`.
    pub fn condition_number(&self) -> f64 {
        let (lo, hi) = self.extreme_eigenvalues();
        hi / lo
    }
}

/// Full frame operator `S` restricted to rows and columns `row_lo..=row_hi`:
/// `entry(k, l) = Σ_m Σ_n g_m(k − na)·conj(g_m(l − na))`, summed over every `n`
/// whose element meets the window. Bandwidth is `2s`.
pub fn assemble_banded(sys: &ShiftSystem, row_lo: i64, row_hi: i64) -> Result<BandedHermitian> {
    if row_lo > row_hi {
        return Err(Error::Precondition(format!(
            "row range needs row_lo <= row_hi, got {row_lo} > {row_hi}"
        )));
    }
    let dim = (row_hi - row_lo + 1) as usize;
    let half_bw = 2 * sys.s() as usize;
    let mut out = BandedHermitian::zeros(dim, half_bw, row_lo);
    let a = sys.a_i64();
    let (n_lo, n_hi) = sys.shifts_touching(row_lo, row_hi);
    for g in sys.generators() {
        let (glo, ghi) = g.support().expect("generators are nonzero");
        for n in n_lo..=n_hi {
            let lo = (glo + n * a).max(row_lo);
            let hi = (ghi + n * a).min(row_hi);
            for k in lo..=hi {
                let gk = g.get(k - n * a);
                if gk == ZERO {
                    continue;
                }
                for l in lo..=k {
                    let gl = g.get(l - n * a);
                    out.add_lower((k - row_lo) as usize, (l - row_lo) as usize, gk * gl.conj());
                }
            }
        }
    }
    Ok(out)
}

/// `S_N = P_N S P_N` on `[−N, N]`: the Gram matrix of the truncated elements
/// `P_N g_{m,n}`.
pub fn truncate_section(sys: &ShiftSystem, n: usize) -> BandedHermitian {
    let n = n as i64;
    let dim = (2 * n + 1) as usize;
    let mut out = BandedHermitian::zeros(dim, 2 * sys.s() as usize, -n);
    let (s_lo, s_hi) = sys.shifts_touching(-n, n);
    for m in 0..sys.channels() {
        for shift in s_lo..=s_hi {
            let truncated = sys.element(m, shift).restrict(-n, n);
            let Some((lo, hi)) = truncated.support() else {
                continue;
            };
            for k in lo..=hi {
                let gk = truncated.get(k);
                for l in lo..=k {
                    out.add_lower(
                        (k + n) as usize,
                        (l + n) as usize,
                        gk * truncated.get(l).conj(),
                    );
                }
            }
        }
    }
    out
}

/// Matrix-valued trigonometric polynomial `τ(ω) = Σ_{|j| ≤ J} τ_j e^{2πijω}`
/// generating the block Laurent operator `S`, with
/// `S_{ra+p, ta+q} = (τ_{r−t})_{p,q}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSymbol {
    a: usize,
    degree: usize,
    coeffs: Vec<CMatrix>,
}

impl MatrixSymbol {
    pub fn block_size(&self) -> usize {
        self.a
    }

    /// `J`, the largest `|j|` with a stored coefficient.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff(&self, j: i64) -> CMatrix {
        let idx = j + self.degree as i64;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            CMatrix::zeros(self.a, self.a)
        } else {
            self.coeffs[idx as usize].clone()
        }
    }

    pub fn eval(&self, omega: f64) -> CMatrix {
        let mut out = CMatrix::zeros(self.a, self.a);
        for (idx, c) in self.coeffs.iter().enumerate() {
            let j = idx as f64 - self.degree as f64;
            let e = Complex64::from_polar(1.0, 2.0 * PI * j * omega);
            for p in 0..self.a {
                for q in 0..self.a {
                    out[(p, q)] += c[(p, q)] * e;
                }
            }
        }
        out
    }

    /// Ascending eigenvalues of `τ(ω)`.
    pub fn eigenvalues_at(&self, omega: f64) -> Vec<f64> {
        let t = self.eval(omega);
        if self.a == 1 {
            return vec![t[(0, 0)].re];
        }
        hermitian_eigenvalues(&t).expect("small Hermitian eigenproblem converges")
    }
}

/// Symbol coefficients read off one block period of the assembled operator.
pub fn symbol(sys: &ShiftSystem) -> MatrixSymbol {
    let a = sys.a();
    let a_i = a as i64;
    let degree = (2 * sys.s() as usize + a - 1).div_ceil(a);
    let j = degree as i64;
    let s_mat = assemble_banded(sys, -j * a_i, j * a_i + a_i - 1).expect("non-empty range");
    let coeffs = (-j..=j)
        .map(|r| CMatrix::from_fn(a, a, |p, q| s_mat.entry(r * a_i + p as i64, q as i64)))
        .collect();
    MatrixSymbol { a, degree, coeffs }
}

/// Frame bounds estimated from symbol eigenvalue extrema.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
    pub grid: usize,
}

impl FrameBounds {
    pub fn ratio(&self) -> f64 {
        self.upper / self.lower
    }
}

pub const MIN_GRID: usize = 64;
/// Lower bounds at or below this value mean "not a frame".
pub const FRAME_TOL: f64 = 1e-12;

/// Raw extrema `(min λ_min, max λ_max)` over the grid plus local refinement,
/// without the frame check.
pub fn symbol_extrema(sym: &MatrixSymbol, grid: usize) -> Result<(f64, f64)> {
    if grid < MIN_GRID {
        return Err(Error::Precondition(format!(
            "symbol grid must have at least {MIN_GRID} points, got {grid}"
        )));
    }
    let samples: Vec<(f64, f64)> = (0..grid)
        .into_par_iter()
        .map(|i| {
            let ev = sym.eigenvalues_at(i as f64 / grid as f64);
            (ev[0], ev[ev.len() - 1])
        })
        .collect();
    let lows: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let highs: Vec<f64> = samples.iter().map(|s| -s.1).collect();

    let lower = refine_minimum(&lows, grid, |w| sym.eigenvalues_at(w)[0]);
    let upper = -refine_minimum(&highs, grid, |w| {
        let ev = sym.eigenvalues_at(w);
        -ev[ev.len() - 1]
    });
    Ok((lower, upper))
}

/// Number of sampled local minima that get a golden-section pass.
const REFINE_CANDIDATES: usize = 8;

fn refine_minimum(values: &[f64], grid: usize, f: impl Fn(f64) -> f64) -> f64 {
    let n = values.len();
    let mut best = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut candidates: Vec<usize> = (0..n)
        .filter(|&i| {
            let prev = values[(i + n - 1) % n];
            let next = values[(i + 1) % n];
            values[i] <= prev && values[i] <= next && (values[i] < prev || values[i] < next)
        })
        .collect();
    candidates.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    candidates.truncate(REFINE_CANDIDATES);
    let h = 1.0 / grid as f64;
    for i in candidates {
        let center = i as f64 * h;
        best = best.min(golden_section(&f, center - h, center + h));
    }
    best
}

fn golden_section(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut best = f1.min(f2);
    for _ in 0..80 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
        best = best.min(f1).min(f2);
        if hi - lo < 1e-15 {
            break;
        }
    }
    best
}

/// `A = min_ω λ_min(τ(ω))`, `B = max_ω λ_max(τ(ω))` on a uniform grid with
/// golden-section refinement around the sampled extrema.
pub fn frame_bounds(sym: &MatrixSymbol, grid: usize) -> Result<FrameBounds> {
    let (lower, upper) = symbol_extrema(sym, grid)?;
    if lower <= FRAME_TOL {
        return Err(Error::NotAFrame { lower, upper });
    }
    Ok(FrameBounds { lower, upper, grid })
}

/// Frame bounds of a system on the default grid `1024·J`.
pub fn system_frame_bounds(sys: &ShiftSystem) -> Result<FrameBounds> {
    let sym = symbol(sys);
    frame_bounds(&sym, (1024 * sym.degree()).max(MIN_GRID))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::FiniteSeq;
    use crate::systems;

    fn assert_close_matrix(m: &BandedHermitian, f: impl Fn(i64, i64) -> f64, tol: f64) {
        let (lo, hi) = m.index_range();
        for k in lo..=hi {
            for l in lo..=hi {
                let got = m.entry(k, l);
                assert!(
                    (got - f(k, l)).norm() <= tol,
                    "entry ({k},{l}) = {got}, expected {}",
                    f(k, l)
                );
            }
        }
    }

    fn tridiag(k: i64, l: i64) -> f64 {
        match (k - l).abs() {
            0 => 2.0,
            1 => 0.5,
            _ => 0.0,
        }
    }

    #[test]
    fn haar_operator_is_identity() {
        let s = assemble_banded(&systems::haar(), -4, 4).unwrap();
        assert_close_matrix(&s, |k, l| if k == l { 1.0 } else { 0.0 }, 1e-15);
        let s3 = truncate_section(&systems::haar(), 3);
        assert_eq!(s3.dim(), 7);
        assert_close_matrix(&s3, |k, l| if k == l { 1.0 } else { 0.0 }, 1e-15);
    }

    #[test]
    fn system_b_operator_is_tridiagonal() {
        let s = assemble_banded(&systems::system_b(), -4, 4).unwrap();
        assert_eq!(s.half_bw(), 2);
        assert_close_matrix(&s, tridiag, 1e-15);
        let s2 = truncate_section(&systems::system_b(), 2);
        assert_eq!(s2.dim(), 5);
        assert_close_matrix(&s2, tridiag, 1e-15);
    }

    #[test]
    fn section_equals_central_block_of_full_operator() {
        let g0 = FiniteSeq::from_real(-2, &[0.3, -0.5, 1.0, 0.2]);
        let g1 = FiniteSeq::new(
            -1,
            vec![
                Complex64::new(0.1, 0.4),
                Complex64::new(-0.7, 0.2),
                Complex64::new(0.5, 0.0),
            ],
        );
        let sys = ShiftSystem::new(vec![g0, g1], 2).unwrap();
        let full = assemble_banded(&sys, -12, 12).unwrap();
        for n in [0usize, 1, 3, 6] {
            assert_eq!(
                truncate_section(&sys, n),
                full.section(-(n as i64), n as i64)
            );
        }
    }

    #[test]
    fn block_shift_invariance() {
        let g = FiniteSeq::from_real(-1, &[0.4, 1.0, -0.3]);
        let sys = ShiftSystem::new(vec![g], 2).unwrap();
        let s = assemble_banded(&sys, -10, 10).unwrap();
        for k in -6..=4 {
            for l in -6..=4 {
                assert_eq!(s.entry(k + 2, l + 2), s.entry(k, l));
            }
        }
    }

    #[test]
    fn system_b_symbol_coefficients() {
        let sym = symbol(&systems::system_b());
        assert_eq!(sym.block_size(), 1);
        assert!((sym.coeff(0)[(0, 0)] - 2.0).norm() < 1e-15);
        assert!((sym.coeff(1)[(0, 0)] - 0.5).norm() < 1e-15);
        assert!((sym.coeff(-1)[(0, 0)] - 0.5).norm() < 1e-15);
        for w in [0.0, 0.1, 0.25, 0.5, 0.9] {
            assert!((sym.eval(w)[(0, 0)] - (2.0 + (2.0 * PI * w).cos())).norm() < 1e-14);
        }
    }

    #[test]
    fn haar_symbol_is_identity() {
        let sym = symbol(&systems::haar());
        for w in [0.0, 0.3, 0.77] {
            assert!(sym.eval(w).sub(&CMatrix::identity(2)).max_abs() < 1e-15);
        }
        let fb = frame_bounds(&sym, 256).unwrap();
        assert!((fb.lower - 1.0).abs() < 1e-15 && (fb.upper - 1.0).abs() < 1e-15);
    }

    #[test]
    fn symbol_block_consistency_and_hermitian_coefficients() {
        let g0 = FiniteSeq::new(
            -1,
            vec![
                Complex64::new(0.2, 0.1),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, -0.4),
            ],
        );
        let sys = ShiftSystem::new(vec![g0, FiniteSeq::delta(1)], 3).unwrap();
        let sym = symbol(&sys);
        let s = assemble_banded(&sys, -15, 15).unwrap();
        for r in -2i64..=2 {
            for t in -2i64..=2 {
                let tau = sym.coeff(r - t);
                for p in 0..3 {
                    for q in 0..3 {
                        assert!(
                            (s.entry(3 * r + p, 3 * t + q) - tau[(p as usize, q as usize)]).norm()
                                < 1e-15
                        );
                    }
                }
            }
        }
        for j in 0..=sym.degree() as i64 {
            assert!(sym.coeff(-j).sub(&sym.coeff(j).adjoint()).max_abs() < 1e-15);
        }
    }

    #[test]
    fn system_b_frame_bounds() {
        let fb = frame_bounds(&symbol(&systems::system_b()), 1024).unwrap();
        assert!((fb.lower - 1.0).abs() < 1e-6);
        assert!((fb.upper - 3.0).abs() < 1e-6);
    }

    #[test]
    fn rank_one_symbol_is_not_a_frame() {
        let sys = ShiftSystem::new(vec![FiniteSeq::from_real(0, &[1.0, 1.0])], 2).unwrap();
        let sym = symbol(&sys);
        let (lo, hi) = symbol_extrema(&sym, 128).unwrap();
        assert!(lo.abs() < 1e-12 && (hi - 2.0).abs() < 1e-12);
        assert!(matches!(
            frame_bounds(&sym, 128),
            Err(Error::NotAFrame { .. })
        ));
        assert!(matches!(
            frame_bounds(&sym, 16),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn inertia_bisection_matches_dense_eigenvalues() {
        let s = truncate_section(&systems::system_b(), 7);
        let ev = hermitian_eigenvalues(&s.to_dense()).unwrap();
        let (lo, hi) = s.extreme_eigenvalues();
        assert!((lo - ev[0]).abs() < 1e-13);
        assert!((hi - ev[ev.len() - 1]).abs() < 1e-13);
        assert_eq!(
            s.count_eigenvalues_below(2.0 + 1e-9),
            ev.iter().filter(|&&e| e < 2.0 + 1e-9).count()
        );
    }

    #[test]
    fn banded_matvec_matches_dense() {
        let g = FiniteSeq::new(
            -1,
            vec![
                Complex64::new(0.5, 0.5),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.3),
            ],
        );
        let sys = ShiftSystem::new(vec![g, FiniteSeq::delta(0)], 1).unwrap();
        let s = truncate_section(&sys, 4);
        let x: Vec<Complex64> = (0..9)
            .map(|i| Complex64::new(i as f64, -(i as f64) * 0.5))
            .collect();
        let dense = s.to_dense().matvec(&x);
        let banded = s.matvec(&x);
        assert!(crate::linalg::vec_dist(&dense, &banded) < 1e-13);
        assert!(s.to_dense().hermitian_defect() == 0.0);
    }
}
