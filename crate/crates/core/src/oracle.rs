//! Brute-force references and seeded random test systems.

use crate::error::{Error, Result};
use crate::finite_section::DualSolution;
use crate::frame_operator::system_frame_bounds;
use crate::linalg::{determinant, gauss_solve, hermitian_sigma_min, vec_dist, CMatrix};
use crate::periodic::{PeriodicSeq, PeriodicSystem};
use crate::seq::FiniteSeq;
use crate::sis::{div_ceil, div_floor, ShiftSystem};
use num_complex::Complex64;
use rand::Rng;

pub const DEFAULT_SEED: u64 = 0x00f2_a3e5_b4c7_d001;
pub const SEED_ENV: &str = "FRAMEBANK_SEED";
pub const MAX_ORACLE_ORDER: usize = 512;
/// Random frames are kept only when `A > FRAME_RATIO·B`.
pub const FRAME_RATIO: f64 = 0.05;
const MAX_ATTEMPTS: usize = 10_000;

/// Seed from `FRAMEBANK_SEED` (decimal or `0x` hex), else [`DEFAULT_SEED`].
pub fn seed_from_env() -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|v| {
            let v = v.trim();
            match v.strip_prefix("0x") {
                Some(hex) => u64::from_str_radix(hex, 16).ok(),
                None => v.parse().ok(),
            }
        })
        .unwrap_or(DEFAULT_SEED)
}

/// `S_N` entry by entry from the raw double sum over channels and every shift,
/// then dense Gaussian elimination.
pub fn dense_oracle_dual(sys: &ShiftSystem, n: usize) -> Result<DualSolution> {
    let dim = 2 * n + 1;
    if dim > MAX_ORACLE_ORDER {
        return Err(Error::Precondition(format!(
            "dense oracle limited to order {MAX_ORACLE_ORDER}, got 2N+1 = {dim}"
        )));
    }
    let ni = n as i64;
    let a = sys.a() as i64;
    let reach = ni + sys.s();
    let (n_lo, n_hi) = (div_floor(-reach, a), div_ceil(reach, a));
    let sn = CMatrix::from_fn(dim, dim, |i, j| {
        let (k, l) = (i as i64 - ni, j as i64 - ni);
        let mut acc = Complex64::new(0.0, 0.0);
        for g in sys.generators() {
            for shift in n_lo..=n_hi {
                acc += g.get(k - shift * a) * g.get(l - shift * a).conj();
            }
        }
        acc
    });
    let mut duals = Vec::new();
    let mut residuals = Vec::new();
    for g in sys.generators() {
        let rhs = g.window(-ni, ni);
        let x = gauss_solve(&sn, &rhs)?;
        residuals.push(vec_dist(&sn.matvec(&x), &rhs));
        duals.push(FiniteSeq::new(-ni, x));
    }
    Ok(DualSolution {
        n,
        duals,
        residuals,
    })
}

/// Periodic duals from a dense `L×L` solve of the periodized frame operator.
pub fn dense_periodic_dual(sys: &ShiftSystem, period: usize) -> Result<Vec<PeriodicSeq>> {
    let psys = PeriodicSystem::from_system(sys, period)?;
    let op = psys.frame_operator_dense();
    psys.generators()
        .iter()
        .map(|g| gauss_solve(&op, g.values()).map(PeriodicSeq::new))
        .collect()
}

#[derive(Debug, Clone)]
pub struct Counterexample {
    /// `tridiag(−1, 2, −1)` of order 4.
    pub t: CMatrix,
    /// Its circulant completion.
    pub pt: CMatrix,
    pub det_t: f64,
    pub sigma_min_pt: f64,
}

/// A nonsingular banded Toeplitz matrix whose circulant completion is singular.
pub fn counterexample() -> Result<Counterexample> {
    let n = 4usize;
    let band = |i: usize, j: usize| match i.abs_diff(j) {
        0 => 2.0,
        1 => -1.0,
        _ => 0.0,
    };
    let t = CMatrix::from_fn(n, n, |i, j| Complex64::new(band(i, j), 0.0));
    let pt = CMatrix::from_fn(n, n, |i, j| {
        let d = (i + n - j) % n;
        Complex64::new(
            match d {
                0 => 2.0,
                1 | 3 => -1.0,
                _ => 0.0,
            },
            0.0,
        )
    });
    Ok(Counterexample {
        det_t: determinant(&t).re,
        sigma_min_pt: hermitian_sigma_min(&pt)?,
        t,
        pt,
    })
}

fn random_seq(rng: &mut impl Rng, lo: i64, hi: i64, complex: bool) -> FiniteSeq {
    FiniteSeq::from_fn(lo, hi, |_| {
        let re = rng.gen_range(-1.0..1.0);
        let im = if complex {
            rng.gen_range(-1.0..1.0)
        } else {
            0.0
        };
        Complex64::new(re, im)
    })
}

fn accept(sys: &ShiftSystem) -> bool {
    matches!(system_frame_bounds(sys), Ok(fb) if fb.lower > FRAME_RATIO * fb.upper)
}

/// Random normalized FIR frame with shift step `a`, `M ∈ a..=a+3` channels and
/// `s ≤ s_max`, regenerated until `A > 0.05·B`.
pub fn random_fir_frame_with(rng: &mut impl Rng, a: usize, s_max: i64) -> ShiftSystem {
    assert!(a >= 1 && s_max >= 1);
    for _ in 0..MAX_ATTEMPTS {
        let m = rng.gen_range(a..=a + 3);
        let complex = rng.gen_bool(0.5);
        let gens: Vec<FiniteSeq> = (0..m)
            .map(|_| {
                let lo = rng.gen_range(-s_max..=0);
                let hi = rng.gen_range(0..=s_max);
                random_seq(rng, lo, hi, complex)
            })
            .collect();
        let Ok(sys) = ShiftSystem::new(gens, a) else {
            continue;
        };
        let sys = sys.normalize();
        if accept(&sys) {
            return sys;
        }
    }
    panic!("no frame found after {MAX_ATTEMPTS} attempts (a = {a}, s_max = {s_max})");
}

/// [`random_fir_frame_with`] with `a ∈ 1..=4` and `s ≤ 4`.
pub fn random_fir_frame(rng: &mut impl Rng) -> ShiftSystem {
    let a = rng.gen_range(1..=4);
    random_fir_frame_with(rng, a, 4)
}

/// Random Gabor frame with a window supported in `[−s, s]`, `s ≤ s_max`, and `M ∈ a..=a+3`.
pub fn random_gabor_frame(rng: &mut impl Rng, a: usize, s_max: i64) -> ShiftSystem {
    assert!(a >= 1 && s_max >= 1);
    for _ in 0..MAX_ATTEMPTS {
        let m = rng.gen_range(a..=a + 3);
        let s = rng.gen_range(1..=s_max);
        let complex = rng.gen_bool(0.5);
        let window = random_seq(rng, -s, s, complex);
        let Ok(sys) = ShiftSystem::gabor(window, a, m) else {
            continue;
        };
        let sys = sys.normalize();
        if accept(&sys) {
            return sys;
        }
    }
    panic!("no Gabor frame found after {MAX_ATTEMPTS} attempts (a = {a}, s_max = {s_max})");
}
