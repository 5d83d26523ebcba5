//! Tight generators `φ_m = S^{-1/2} g_m`, by finite section and on `ℤ_L`.

use crate::error::{Error, Result};
use crate::finite_section::{fit_decay_points, DecayFit};
use crate::frame_operator::{assemble_banded, truncate_section};
use crate::linalg::{hermitian_eigen, CMatrix};
use crate::periodic::{periodic_spectrum, PeriodicSeq, PeriodicSystem};
use crate::seq::FiniteSeq;
use crate::sis::ShiftSystem;
use rayon::prelude::*;

/// Eigenvalues at or below this value reject the inverse square root.
pub const EIGEN_FLOOR: f64 = 1e-12;
/// Sweep errors at or below this level are eigensolver roundoff and are left out of the fit.
pub const SWEEP_NOISE_FLOOR: f64 = 1e-12;

/// Tight generators from the finite section `S_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TightFs {
    pub n: usize,
    pub generators: Vec<FiniteSeq>,
    /// `max |S_φ − I|` over the window `[−N/3, N/3]`.
    pub tightness_defect: f64,
}

/// Tight generators of the periodized system on `ℤ_L`.
#[derive(Debug, Clone, PartialEq)]
pub struct TightPeriodic {
    pub period: usize,
    pub generators: Vec<PeriodicSeq>,
    /// `max |ᴾS_φ − I|` over all unit probes.
    pub tightness_defect: f64,
}

/// `X^{-1/2}` of a Hermitian positive definite matrix, spectrally.
pub fn inverse_sqrt_dense(x: &CMatrix) -> Result<CMatrix> {
    let eig = hermitian_eigen(x)?;
    if let Some((row, &pivot)) = eig
        .values
        .iter()
        .enumerate()
        .find(|(_, &v)| v <= EIGEN_FLOOR)
    {
        return Err(Error::NotPositiveDefinite { row, pivot });
    }
    Ok(eig.apply_fn(|v| 1.0 / v.sqrt()))
}

/// Frame operator of a finite shift system on the global window `lo..=hi`, minus the identity.
pub fn identity_defect(sys: &ShiftSystem, lo: i64, hi: i64) -> Result<f64> {
    let s = assemble_banded(sys, lo, hi)?.to_dense();
    Ok(s.sub(&CMatrix::identity(s.rows())).max_abs())
}

/// `φ_m^(N) = S_N^{-1/2} P_N g_m`.
pub fn tight_fs(sys: &ShiftSystem, n: usize) -> Result<TightFs> {
    if (n as i64) < sys.s() {
        return Err(Error::Precondition(format!(
            "tight finite section needs N >= s (N = {n}, s = {})",
            sys.s()
        )));
    }
    let root = inverse_sqrt_dense(&truncate_section(sys, n).to_dense())?;
    let ni = n as i64;
    let generators: Vec<FiniteSeq> = sys
        .generators()
        .iter()
        .map(|g| FiniteSeq::new(-ni, root.matvec(&g.window(-ni, ni))))
        .collect();
    let radius = ni / 3;
    let phi = ShiftSystem::new(generators.clone(), sys.a())?;
    let tightness_defect = identity_defect(&phi, -radius, radius)?;
    Ok(TightFs {
        n,
        generators,
        tightness_defect,
    })
}

/// `φ̂_j = B_j^{-1/2} ĝ_j` per DFT block.
pub fn tight_periodic(sys: &ShiftSystem, period: usize) -> Result<TightPeriodic> {
    let (psys, spec) = periodic_spectrum(sys, period)?;
    let generators: Vec<PeriodicSeq> = psys
        .generators()
        .iter()
        .map(|g| PeriodicSeq::new(spec.apply_fn(g.values(), |mu| 1.0 / mu.sqrt())))
        .collect();
    let phi = PeriodicSystem::new(generators.clone(), sys.a())?;
    let op = phi.frame_operator_dense();
    let tightness_defect = op.sub(&CMatrix::identity(period)).max_abs();
    Ok(TightPeriodic {
        period,
        generators,
        tightness_defect,
    })
}

/// `|Σ_{m,n} |⟨f, φ_{m,n}⟩|² − ‖f‖²| / ‖f‖²` for one probe.
pub fn parseval_defect(phi: &PeriodicSystem, f: &PeriodicSeq) -> f64 {
    let energy: f64 = phi.analyze(f).iter().flatten().map(|c| c.norm_sqr()).sum();
    let norm = f.norm2().powi(2);
    (energy - norm).abs() / norm
}

#[derive(Debug, Clone, PartialEq)]
pub struct TightConvergence {
    /// `(N, max_m ‖φ_m^(N_ref) − φ_m^(N)‖)` on `[−N, N]`.
    pub rows: Vec<(usize, f64)>,
    /// Fit of the errors above [`SWEEP_NOISE_FLOOR`]; `None` when fewer than four remain.
    pub fit: Option<DecayFit>,
}

pub fn tight_convergence(
    sys: &ShiftSystem,
    n_list: &[usize],
    n_ref: usize,
) -> Result<TightConvergence> {
    let s = sys.s_bound();
    for &n in n_list {
        let n = n as i64;
        if n <= 2 * s || 2 * n >= n_ref as i64 {
            return Err(Error::Precondition(format!(
                "sweep needs 2s < N < N_ref/2 (N = {n}, s = {s}, N_ref = {n_ref})"
            )));
        }
    }
    let reference = tight_fs(sys, n_ref)?;
    let mut rows = n_list
        .par_iter()
        .map(|&n| -> Result<(usize, f64)> {
            let t = tight_fs(sys, n)?;
            let ni = n as i64;
            let err = t
                .generators
                .iter()
                .zip(&reference.generators)
                .map(|(p, r)| p.dist2(&r.restrict(-ni, ni)))
                .fold(0.0, f64::max);
            Ok((n, err))
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| r.0);
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.1 > SWEEP_NOISE_FLOOR)
        .map(|&(n, e)| (n as f64, e))
        .collect();
    let fit = fit_decay_points(&points).ok();
    Ok(TightConvergence { rows, fit })
}
