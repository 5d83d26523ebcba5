//! Finite section method: approximate duals `γ_m^(N) = S_N^{-1} P_N g_m` on
//! growing windows `[−N, N]`, convergence sweeps against a large reference
//! section, and empirical decay fits.

use crate::decay::DecayCertificate;
use crate::error::{Error, Result};
use crate::frame_operator::{system_frame_bounds, truncate_section, BandedHermitian};
use crate::linalg::{vec_dist, CMatrix};
use crate::seq::FiniteSeq;
use crate::sis::ShiftSystem;
use num_complex::Complex64;
use rayon::prelude::*;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Pivots at or below this fraction of the diagonal entry abort the factorization.
pub const PIVOT_TOL: f64 = 1e-14;

/// Lower banded Cholesky factor `L` with `L·L* = S`; `lower[d][j] = L_{j+d, j}`.
#[derive(Debug, Clone)]
pub struct BandedFactor {
    dim: usize,
    lower: Vec<Vec<Complex64>>,
    index_origin: i64,
}

pub fn banded_cholesky(sn: &BandedHermitian) -> Result<BandedFactor> {
    let n = sn.dim();
    let w = sn.stored_bands().saturating_sub(1);
    let mut lower: Vec<Vec<Complex64>> = (0..=w).map(|d| vec![ZERO; n.saturating_sub(d)]).collect();
    if n == 0 {
        lower.clear();
    }
    for j in 0..n {
        let kmin = j.saturating_sub(w);
        let diag = sn.local(j, j).re;
        let mut pivot = diag;
        for k in kmin..j {
            pivot -= lower[j - k][k].norm_sqr();
        }
        if !(pivot > PIVOT_TOL * diag.abs()) || pivot <= 0.0 {
            return Err(Error::NotPositiveDefinite { row: j, pivot });
        }
        let ljj = pivot.sqrt();
        lower[0][j] = Complex64::new(ljj, 0.0);
        for i in j + 1..(j + w + 1).min(n) {
            let mut v = sn.local(i, j);
            for k in i.saturating_sub(w)..j {
                v -= lower[i - k][k] * lower[j - k][k].conj();
            }
            lower[i - j][j] = v / ljj;
        }
    }
    Ok(BandedFactor {
        dim: n,
        lower,
        index_origin: sn.index_origin(),
    })
}

impl BandedFactor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index_origin(&self) -> i64 {
        self.index_origin
    }

    pub fn l_entry(&self, i: usize, j: usize) -> Complex64 {
        if i < j {
            return ZERO;
        }
        self.lower.get(i - j).map_or(ZERO, |b| b[j])
    }

    /// Solves `L L* x = b`.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(b.len(), self.dim);
        let w = self.lower.len().saturating_sub(1);
        let mut y = b.to_vec();
        for i in 0..self.dim {
            let mut acc = y[i];
            for k in i.saturating_sub(w)..i {
                acc -= self.lower[i - k][k] * y[k];
            }
            y[i] = acc / self.lower[0][i].re;
        }
        for i in (0..self.dim).rev() {
            let mut acc = y[i];
            for k in i + 1..(i + w + 1).min(self.dim) {
                acc -= self.lower[k - i][i].conj() * y[k];
            }
            y[i] = acc / self.lower[0][i].re;
        }
        y
    }

    /// `L·L*` as a dense matrix.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.dim;
        CMatrix::from_fn(n, n, |i, j| {
            (0..=i.min(j))
                .map(|k| self.l_entry(i, k) * self.l_entry(j, k).conj())
                .sum()
        })
    }

    /// Dense inverse, one solve per unit column.
    pub fn inverse_dense(&self) -> CMatrix {
        let n = self.dim;
        let mut inv = CMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![ZERO; n];
            e[j] = Complex64::new(1.0, 0.0);
            let col = self.solve(&e);
            for (i, v) in col.into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        inv
    }
}

/// Finite-section duals on `[−N, N]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub n: usize,
    pub duals: Vec<FiniteSeq>,
    /// `‖S_N γ_m − P_N g_m‖` per channel.
    pub residuals: Vec<f64>,
}

/// A dual solve together with its factor, for callers that need `S_N^{-1}` itself.
pub(crate) fn solve_with_factor(
    sys: &ShiftSystem,
    n: usize,
) -> Result<(DualSolution, BandedHermitian, BandedFactor)> {
    let sn = truncate_section(sys, n);
    let factor = banded_cholesky(&sn)?;
    let ni = n as i64;
    let mut duals = Vec::with_capacity(sys.channels());
    let mut residuals = Vec::with_capacity(sys.channels());
    for g in sys.generators() {
        let rhs = g.window(-ni, ni);
        let x = factor.solve(&rhs);
        residuals.push(vec_dist(&sn.matvec(&x), &rhs));
        duals.push(FiniteSeq::new(-ni, x));
    }
    Ok((
        DualSolution {
            n,
            duals,
            residuals,
        },
        sn,
        factor,
    ))
}

/// `γ_m^(N) = S_N^{-1} P_N g_m` for every channel, via banded Cholesky.
///
/// Any `N ≥ 0` is accepted; for `N < s` the right-hand side is the truncated generator.
pub fn solve_dual_fs(sys: &ShiftSystem, n: usize) -> Result<DualSolution> {
    solve_with_factor(sys, n).map(|(sol, _, _)| sol)
}

/// Tail masses above this threshold mark a reference section as untrustworthy.
pub const REFERENCE_TAIL_WARN: f64 = 1e-16;

/// Large finite section standing in for the `ℓ²(ℤ)` dual.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceDual {
    pub solution: DualSolution,
    /// `max_m Σ_{|k| > N_ref/2} |γ_m(k)|²`.
    pub tail_mass: f64,
    pub warning: Option<String>,
}

pub fn reference_dual(sys: &ShiftSystem, n_ref: usize) -> Result<ReferenceDual> {
    let solution = solve_dual_fs(sys, n_ref)?;
    let radius = (n_ref / 2) as i64;
    let tail_mass = solution
        .duals
        .iter()
        .map(|d| d.tail_mass(radius))
        .fold(0.0, f64::max);
    let warning = (tail_mass > REFERENCE_TAIL_WARN).then(|| {
        format!(
            "reference section N_ref = {n_ref} keeps tail mass {tail_mass:e} beyond |k| > {radius}; \
             increase N_ref"
        )
    });
    Ok(ReferenceDual {
        solution,
        tail_mass,
        warning,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    /// `‖γ_m^(N_ref) − γ_m^(N)‖` per channel.
    pub measured_err: Vec<f64>,
    pub bound: f64,
    pub cond_n: f64,
    pub lambda: f64,
}

/// Measures the finite-section error for each `N` against a reference section
/// and pairs it with the a-priori bound.
pub fn convergence_sweep(
    sys: &ShiftSystem,
    n_list: &[usize],
    n_ref: usize,
) -> Result<(Vec<ConvergenceRow>, ReferenceDual, DecayCertificate)> {
    let s = sys.s_bound();
    for &n in n_list {
        let n = n as i64;
        if n <= 2 * s || 2 * n >= n_ref as i64 {
            return Err(Error::Precondition(format!(
                "sweep needs 2s < N < N_ref/2 (N = {n}, s = {s}, N_ref = {n_ref})"
            )));
        }
    }
    let bounds = system_frame_bounds(sys)?;
    let cert = DecayCertificate::from_bounds(&bounds, s.max(1))?;
    let reference = reference_dual(sys, n_ref)?;
    let mut rows = n_list
        .par_iter()
        .map(|&n| -> Result<ConvergenceRow> {
            let (sol, sn, _) = solve_with_factor(sys, n)?;
            let measured_err = sol
                .duals
                .iter()
                .zip(&reference.solution.duals)
                .map(|(d, r)| d.dist2(r))
                .collect();
            Ok(ConvergenceRow {
                n,
                measured_err,
                bound: cert.fs_error_bound(n as i64)?,
                cond_n: sn.condition_number(),
                lambda: cert.lambda,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| r.n);
    Ok((rows, reference, cert))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayModel {
    Exponential,
    Polynomial,
}

/// Least-squares fit of a decay profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub model: DecayModel,
    /// `λ̂` for the exponential model, `α̂` for the polynomial one.
    pub rate: f64,
    /// R² of the chosen model.
    pub quality: f64,
    pub exp_rate: f64,
    pub exp_r2: f64,
    pub poly_alpha: f64,
    pub poly_r2: f64,
}

/// Samples below this fraction of the peak are treated as roundoff and skipped.
pub const FIT_FLOOR: f64 = 1e-13;
/// Both models within this R² margin: prefer exponential.
pub const FIT_TIE: f64 = 0.01;

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return (0.0, 0.0);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    (slope, r2)
}

/// Fits `log|x|` against the distance `t` (exponential model) and against
/// `log(1 + t)` (polynomial model). Points are `(t, |x|)`.
pub fn fit_decay_points(points: &[(f64, f64)]) -> Result<DecayFit> {
    let peak = points.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    let kept: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.1.abs() > FIT_FLOOR * peak && p.1 != 0.0)
        .map(|p| (p.0, p.1.abs().ln()))
        .collect();
    if kept.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "decay fit needs at least 4 nonzero samples, got {}",
            kept.len()
        )));
    }
    let ts: Vec<f64> = kept.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = kept.iter().map(|p| p.1).collect();
    let logs: Vec<f64> = ts.iter().map(|t| (1.0 + t).ln()).collect();
    let (exp_slope, exp_r2) = linear_fit(&ts, &ys);
    let (poly_slope, poly_r2) = linear_fit(&logs, &ys);
    let exp_rate = exp_slope.exp();
    let poly_alpha = -poly_slope;
    let (model, rate, quality) = if exp_r2 + FIT_TIE >= poly_r2 {
        (DecayModel::Exponential, exp_rate, exp_r2)
    } else {
        (DecayModel::Polynomial, poly_alpha, poly_r2)
    };
    Ok(DecayFit {
        model,
        rate,
        quality,
        exp_rate,
        exp_r2,
        poly_alpha,
        poly_r2,
    })
}

/// Decay profile of a sequence as a function of `|k|`.
pub fn fit_decay(x: &FiniteSeq) -> Result<DecayFit> {
    if x.is_zero() {
        return Err(Error::Precondition(
            "decay fit needs a nonzero sequence".into(),
        ));
    }
    let points: Vec<(f64, f64)> = x.iter().map(|(k, v)| (k.abs() as f64, v.norm())).collect();
    fit_decay_points(&points)
}

/// Reconstruction `Σ_{m,n} ⟨f, γ_{m,n}⟩ g_{m,n}` with the shifted finite-section duals.
pub fn reconstruct_with_duals(
    sys: &ShiftSystem,
    duals: &[FiniteSeq],
    f: &FiniteSeq,
) -> Result<FiniteSeq> {
    let dual_sys = ShiftSystem::new(duals.to_vec(), sys.a())?;
    let coeffs = dual_sys.analyze(f, crate::sis::CoeffRange::Auto)?;
    Ok(sys.synthesize(&coeffs))
}
