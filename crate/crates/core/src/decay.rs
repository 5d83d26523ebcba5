//! Explicit decay constants for inverses of banded positive definite
//! matrices and the resulting error bounds for finite-section and periodic duals.
//!
//! With frame bounds `A ≤ B` and half support `s`:
//!
//! ```text
//! κ = B/A,  q = (√κ − 1)/(√κ + 1),  λ = q^{1/(2s)}
//! D = (1/A)·max{1, (1 + √κ)²/(2κ)}       inverse-entry constant
//! C = (1/A)·max{2κ, (1 + √κ)²}           finite-section constant
//! |S⁻¹_{k,l}| ≤ D λ^{|k−l|}
//! ‖γ_m − γ_m^(N)‖ ≤ √2 C λ^N (λ^s − λ^{s+1})^{−3}            (N > 2s)
//! ‖P_N γ_m − ᴾγ_m^(N)‖ ≤ 3√2 C λ^N (λ^s − λ^{s+1})^{−3}      (N > 3s)
//! ```
//!
//! `A` is always the lower spectral bound. When `κ = 1` (tight frame) the
//! inverse is diagonal and every off-diagonal bound is exactly zero.

use crate::error::{Error, Result};
use crate::frame_operator::FrameBounds;
use crate::linalg::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayCertificate {
    pub lower: f64,
    pub upper: f64,
    pub s: i64,
    pub kappa: f64,
    pub q: f64,
    pub lambda: f64,
    /// Inverse-entry constant `D` (also the dual-decay constant).
    pub d_demko: f64,
    /// Finite-section constant `C`.
    pub c_section: f64,
    /// Symbol grid the bounds were estimated on, if they came from [`FrameBounds`].
    pub grid: Option<usize>,
}

pub fn demko_certificate(lower: f64, upper: f64, s: i64) -> Result<DecayCertificate> {
    if !(lower > 0.0) {
        return Err(Error::Precondition(format!(
            "lower spectral bound must be positive, got {lower:e}"
        )));
    }
    if upper < lower {
        return Err(Error::Precondition(format!(
            "upper bound {upper:e} below lower bound {lower:e}"
        )));
    }
    if s < 1 {
        return Err(Error::Precondition(format!(
            "half support s must be at least 1, got {s}"
        )));
    }
    let kappa = upper / lower;
    let root = kappa.sqrt();
    let q = if kappa == 1.0 {
        0.0
    } else {
        (root - 1.0) / (root + 1.0)
    };
    let lambda = if q == 0.0 {
        0.0
    } else {
        q.powf(1.0 / (2.0 * s as f64))
    };
    let d_demko = (1.0 / lower) * f64::max(1.0, (1.0 + root).powi(2) / (2.0 * kappa));
    let c_section = (1.0 / lower) * f64::max(2.0 * kappa, (1.0 + root).powi(2));
    Ok(DecayCertificate {
        lower,
        upper,
        s,
        kappa,
        q,
        lambda,
        d_demko,
        c_section,
        grid: None,
    })
}

/// `λ^e` with the convention `0⁰ = 1`.
fn lpow(lambda: f64, e: i64) -> f64 {
    if e == 0 {
        1.0
    } else {
        lambda.powi(e as i32)
    }
}

impl DecayCertificate {
    pub fn from_bounds(bounds: &FrameBounds, s: i64) -> Result<Self> {
        let mut cert = demko_certificate(bounds.lower, bounds.upper, s)?;
        cert.grid = Some(bounds.grid);
        Ok(cert)
    }

    pub fn is_tight(&self) -> bool {
        self.lambda == 0.0
    }

    /// `D·λ^d`.
    pub fn entry_bound(&self, d: i64) -> f64 {
        self.d_demko * lpow(self.lambda, d.abs())
    }

    /// Circulant variant: `D·λ^{min(d, L − d)}` with `d = |k − l|`.
    pub fn cyclic_entry_bound(&self, d: i64, period: i64) -> f64 {
        let d = d.abs() % period;
        self.entry_bound(d.min(period - d))
    }

    /// `c·λ^{−s}/(1 − λ)·λ^{|k|}`: decay of `T y` for `|T_{kl}| ≤ cλ^{|k−l|}` and a
    /// unit vector `y` supported in `[−s, s]`. At `λ = 0` this is the limit
    /// of the underlying sum, `c` on `[−s, s]` and zero outside.
    pub fn vector_decay_bound(&self, c: f64, k: i64) -> Result<f64> {
        if self.lambda >= 1.0 {
            return Err(Error::Precondition(format!(
                "decay rate λ = {} is not below 1",
                self.lambda
            )));
        }
        if self.is_tight() {
            return Ok(if k.abs() <= self.s { c } else { 0.0 });
        }
        Ok(c * self.lambda.powi(-(self.s as i32)) / (1.0 - self.lambda)
            * self.lambda.powi(k.abs() as i32))
    }

    /// `|γ_m(k)| ≤ D·λ^{|k|}·λ^{−s}/(1 − λ)`.
    pub fn dual_decay_bound(&self, k: i64) -> Result<f64> {
        self.vector_decay_bound(self.d_demko, k)
    }

    fn fs_factor(&self, n: i64) -> f64 {
        if self.is_tight() {
            return 0.0;
        }
        let l = self.lambda;
        let s = self.s as i32;
        std::f64::consts::SQRT_2
            * self.c_section
            * l.powi(n as i32)
            * (l.powi(s) - l.powi(s + 1)).powi(-3)
    }

    /// `√2·C·λ^N·(λ^s − λ^{s+1})^{−3}`, valid for `N > 2s`.
    pub fn fs_error_bound(&self, n: i64) -> Result<f64> {
        if n <= 2 * self.s {
            return Err(Error::Precondition(format!(
                "N must exceed 2s for the finite-section error bound (N = {n}, s = {})",
                self.s
            )));
        }
        Ok(self.fs_factor(n))
    }

    /// Three times [`Self::fs_error_bound`], valid for `N > 3s`.
    pub fn periodic_error_bound(&self, n: i64) -> Result<f64> {
        if n <= 3 * self.s {
            return Err(Error::Precondition(format!(
                "N must exceed 3s for the periodic error bound (N = {n}, s = {})",
                self.s
            )));
        }
        Ok(3.0 * self.fs_factor(n))
    }

    /// Smallest `N > 2s` whose finite-section bound is at most `delta`.
    pub fn invert_bound_for_n(&self, delta: f64) -> Result<i64> {
        if !(delta > 0.0) {
            return Err(Error::Precondition(format!(
                "tolerance must be positive, got {delta:e}"
            )));
        }
        let floor = 2 * self.s + 1;
        if self.is_tight() {
            return Ok(floor);
        }
        let l = self.lambda;
        let s = self.s as i32;
        let k = std::f64::consts::SQRT_2 * self.c_section * (l.powi(s) - l.powi(s + 1)).powi(-3);
        let guess = ((delta / k).ln() / l.ln()).ceil();
        let mut n = if guess.is_finite() {
            (guess as i64).max(floor)
        } else {
            floor
        };
        while n > floor && self.fs_factor(n - 1) <= delta {
            n -= 1;
        }
        while self.fs_factor(n) > delta {
            n += 1;
        }
        Ok(n)
    }
}

/// Distance model for [`verify_entry_decay`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayGeometry {
    /// Finite section: distance `|k − l|`.
    Toeplitz,
    /// Block circulant of the given order: cyclic distance.
    Cyclic { period: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayViolation {
    pub row: usize,
    pub col: usize,
    pub entry: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntryDecayReport {
    /// `max |entry| / bound` over entries whose bound exceeds the roundoff floor.
    pub max_ratio: f64,
    pub violations: Vec<DecayViolation>,
}

impl EntryDecayReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Relative slack allowed on top of `D·λ^d`.
pub const ENTRY_DECAY_REL_TOL: f64 = 1e-9;
/// Absolute slack, relative to the largest entry, for entries whose bound is below roundoff.
pub const ROUNDOFF_FLOOR: f64 = 1e-14;

/// `value ≤ bound·(1 + ENTRY_DECAY_REL_TOL) + ROUNDOFF_FLOOR·scale`.
pub fn within_bound(value: f64, bound: f64, scale: f64) -> bool {
    value <= bound * (1.0 + ENTRY_DECAY_REL_TOL) + ROUNDOFF_FLOOR * scale
}

/// Checks every entry of an inverse against the entrywise decay bound.
pub fn verify_entry_decay(
    inverse: &CMatrix,
    cert: &DecayCertificate,
    geometry: DecayGeometry,
) -> EntryDecayReport {
    let mut max_ratio = 0.0f64;
    let mut violations = Vec::new();
    let scale = inverse.max_abs();
    for i in 0..inverse.rows() {
        for j in 0..inverse.cols() {
            let d = (i as i64 - j as i64).abs();
            let bound = match geometry {
                DecayGeometry::Toeplitz => cert.entry_bound(d),
                DecayGeometry::Cyclic { period } => cert.cyclic_entry_bound(d, period as i64),
            };
            let entry = inverse[(i, j)].norm();
            if bound > ROUNDOFF_FLOOR * scale {
                max_ratio = max_ratio.max(entry / bound);
            }
            if !within_bound(entry, bound, scale) {
                violations.push(DecayViolation {
                    row: i,
                    col: j,
                    entry,
                    bound,
                });
            }
        }
    }
    EntryDecayReport {
        max_ratio,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values computed with 30-digit arithmetic from the closed forms.
    const Q_B: f64 = 0.267949192431122706472553658494;
    const LAMBDA_B: f64 = 0.517638090205041524697797675248;
    const D_B: f64 = 1.24401693585629243117581544717;
    const C_B: f64 = 7.46410161513775458705489268301;
    const VEC0_B: f64 = 4.9822677217418349358305493988;
    const FS10_B: f64 = 0.936606369093760336487329995917;
    const PER10_B: f64 = 2.80981910728128100946198998775;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn certificate_for_bounds_one_and_three() {
        let c = demko_certificate(1.0, 3.0, 1).unwrap();
        assert!(rel(c.kappa, 3.0) < 1e-15);
        assert!(rel(c.q, Q_B) < 1e-14);
        assert!(rel(c.lambda, LAMBDA_B) < 1e-14);
        assert!(rel(c.d_demko, D_B) < 1e-14);
        assert!(rel(c.c_section, C_B) < 1e-14);
        // independent route: C = max{2κ,(1+√κ)²}/A and D·2κ agree when (1+√κ)² ≥ 2κ
        assert!(rel(c.c_section, 2.0 * c.kappa * c.d_demko) < 1e-14);
    }

    #[test]
    fn tight_certificate() {
        let c = demko_certificate(2.0, 2.0, 3).unwrap();
        assert_eq!(c.q, 0.0);
        assert_eq!(c.lambda, 0.0);
        assert_eq!(c.d_demko, 0.5 * 2.0);
        assert_eq!(c.entry_bound(0), c.d_demko);
        assert_eq!(c.entry_bound(1), 0.0);
        assert_eq!(c.fs_error_bound(7).unwrap(), 0.0);
        assert_eq!(c.dual_decay_bound(3).unwrap(), c.d_demko);
        assert_eq!(c.dual_decay_bound(4).unwrap(), 0.0);
        assert_eq!(c.invert_bound_for_n(1e-9).unwrap(), 7);
    }

    #[test]
    fn ill_conditioned_lambda() {
        let c = demko_certificate(1.0, 100.0, 2).unwrap();
        assert!((c.lambda - 0.951069941557029163).abs() < 1e-14);
    }

    #[test]
    fn invalid_certificates() {
        assert!(demko_certificate(0.0, 1.0, 1).is_err());
        assert!(demko_certificate(-1.0, 1.0, 1).is_err());
        assert!(demko_certificate(2.0, 1.0, 1).is_err());
        assert!(demko_certificate(1.0, 2.0, 0).is_err());
    }

    #[test]
    fn vector_and_dual_bounds() {
        let c = demko_certificate(1.0, 3.0, 1).unwrap();
        assert!(rel(c.vector_decay_bound(c.d_demko, 0).unwrap(), VEC0_B) < 1e-14);
        assert!(rel(c.dual_decay_bound(0).unwrap(), VEC0_B) < 1e-14);
        for k in 0..20 {
            let r = c.dual_decay_bound(k + 1).unwrap() / c.dual_decay_bound(k).unwrap();
            assert!(rel(r, c.lambda) < 1e-12);
        }
        let sqrt3 = 3f64.sqrt();
        for k in -30i64..=30 {
            let analytic = (2.0 - sqrt3).powi(k.abs() as i32) / sqrt3;
            assert!(analytic <= c.dual_decay_bound(k).unwrap());
        }
        let mut bad = c;
        bad.lambda = 1.0;
        assert!(bad.vector_decay_bound(1.0, 0).is_err());
    }

    #[test]
    fn finite_section_and_periodic_bounds() {
        let c = demko_certificate(1.0, 3.0, 1).unwrap();
        assert!(rel(c.fs_error_bound(10).unwrap(), FS10_B) < 1e-13);
        assert!(rel(c.periodic_error_bound(10).unwrap(), PER10_B) < 1e-13);
        for n in 4..40 {
            let r = c.fs_error_bound(n + 1).unwrap() / c.fs_error_bound(n).unwrap();
            assert!(rel(r, c.lambda) < 1e-12);
            assert_eq!(
                c.periodic_error_bound(n).unwrap(),
                3.0 * c.fs_error_bound(n).unwrap()
            );
        }
        assert!(c.fs_error_bound(2).is_err());
        assert!(c.periodic_error_bound(3).is_err());
        assert!(c.fs_error_bound(3).is_ok());
    }

    #[test]
    fn bound_inversion_is_minimal() {
        let c = demko_certificate(1.0, 3.0, 1).unwrap();
        // 30-digit evaluation gives N = 31 for δ = 1e−6
        assert_eq!(c.invert_bound_for_n(1e-6).unwrap(), 31);
        for delta in [1e-2, 1e-6, 1e-10, 1e-14] {
            let n = c.invert_bound_for_n(delta).unwrap();
            assert!(c.fs_error_bound(n).unwrap() <= delta);
            assert!(n - 1 <= 2 * c.s || c.fs_error_bound(n - 1).unwrap() > delta);
        }
        assert_eq!(c.invert_bound_for_n(1e6).unwrap(), 3);
        assert!(c.invert_bound_for_n(0.0).is_err());
    }

    #[test]
    fn lambda_monotone_in_kappa_and_s() {
        let k1 = demko_certificate(1.0, 2.0, 2).unwrap();
        let k2 = demko_certificate(1.0, 5.0, 2).unwrap();
        let s3 = demko_certificate(1.0, 5.0, 3).unwrap();
        assert!(k1.lambda < k2.lambda && k2.lambda < s3.lambda);
    }

    #[test]
    fn perturbation_stability() {
        let c = demko_certificate(1.0, 3.0, 2).unwrap();
        let p = demko_certificate(1.0 + 1e-12, 3.0 + 1e-12, 2).unwrap();
        for (x, y) in [
            (c.lambda, p.lambda),
            (c.d_demko, p.d_demko),
            (c.c_section, p.c_section),
            (c.fs_error_bound(9).unwrap(), p.fs_error_bound(9).unwrap()),
        ] {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn identity_passes_tight_entry_check() {
        let c = demko_certificate(1.0, 1.0, 1).unwrap();
        let r = verify_entry_decay(&CMatrix::identity(5), &c, DecayGeometry::Toeplitz);
        assert!(r.passed());
        // D = max{1, 4/2} = 2 at κ = 1
        assert_eq!(r.max_ratio, 0.5);
    }

    #[test]
    fn cyclic_distance() {
        let c = demko_certificate(1.0, 3.0, 1).unwrap();
        assert_eq!(c.cyclic_entry_bound(30, 31), c.entry_bound(1));
        assert_eq!(c.cyclic_entry_bound(15, 31), c.entry_bound(15));
        assert_eq!(c.cyclic_entry_bound(16, 31), c.entry_bound(15));
    }
}
