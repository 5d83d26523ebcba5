//! Periodic model on `ℤ_L`: periodized generators, the block-circulant frame
//! operator and its DFT block diagonalization.
//!
//! Residue `r` of a [`PeriodicSeq`] stands for every global index `k ≡ r (mod L)`;
//! in particular the window `[−N, N]` maps onto `ℤ_{2N+1}` by `k ↦ k mod (2N+1)`.
//!
//! With the forward DFT `B_j = Σ_t C_t e^{−2πi jt/K}` of the first block column,
//! `B_j` equals the symbol sample `τ(−j/K)` whenever `L > 4s`.

use crate::decay::DecayCertificate;
use crate::error::{Error, Result};
use crate::finite_section::reference_dual;
use crate::frame_operator::{frame_bounds, symbol, system_frame_bounds};
use crate::linalg::{hermitian_eigen, CMatrix, HermitianEigen};
use crate::seq::FiniteSeq;
use crate::sis::ShiftSystem;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Block eigenvalues at or below this value make the periodized system singular.
pub const SINGULAR_BLOCK_TOL: f64 = 1e-12;
/// Slack for the spectrum inclusion check.
pub const SPECTRUM_SLACK: f64 = 1e-8;

/// A sequence on `ℤ_L`, indexed by residues.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSeq {
    values: Vec<Complex64>,
}

impl PeriodicSeq {
    pub fn new(values: Vec<Complex64>) -> Self {
        assert!(!values.is_empty(), "period must be at least 1");
        PeriodicSeq { values }
    }

    pub fn zeros(period: usize) -> Self {
        Self::new(vec![ZERO; period])
    }

    pub fn delta(period: usize, r: usize) -> Self {
        let mut v = vec![ZERO; period];
        v[r % period] = Complex64::new(1.0, 0.0);
        Self::new(v)
    }

    pub fn period(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Value at any integer index, reduced mod `L`.
    pub fn get(&self, k: i64) -> Complex64 {
        self.values[k.rem_euclid(self.values.len() as i64) as usize]
    }

    /// Cyclic shift `x(· − d)`.
    pub fn shift(&self, d: i64) -> PeriodicSeq {
        let l = self.period() as i64;
        PeriodicSeq::new((0..l).map(|r| self.get(r - d)).collect())
    }

    pub fn inner(&self, other: &PeriodicSeq) -> Complex64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn norm2(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn dist2(&self, other: &PeriodicSeq) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, other: &PeriodicSeq) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Samples at global indices `lo..=hi`.
    pub fn window(&self, lo: i64, hi: i64) -> Vec<Complex64> {
        (lo..=hi).map(|k| self.get(k)).collect()
    }

    /// The window `[−N, N]` of `ℤ_{2N+1}` as a sequence on ℤ.
    pub fn centered(&self) -> FiniteSeq {
        let l = self.period() as i64;
        let lo = -(l / 2);
        FiniteSeq::new(lo, self.window(lo, lo + l - 1))
    }
}

/// Folds `x` onto `ℤ_L`: residue `r` receives `Σ_j x(r + jL)`.
/// The flag reports whether two samples landed on the same residue.
pub fn periodize(x: &FiniteSeq, period: usize) -> Result<(PeriodicSeq, bool)> {
    if period == 0 {
        return Err(Error::InvalidInput("period L must be at least 1".into()));
    }
    let mut values = vec![ZERO; period];
    for (k, v) in x.iter() {
        values[k.rem_euclid(period as i64) as usize] += v;
    }
    let overlap = x.len() > period;
    Ok((PeriodicSeq::new(values), overlap))
}

/// A shift-invariant system on `ℤ_L` with shift step `a | L`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSystem {
    a: usize,
    generators: Vec<PeriodicSeq>,
}

impl PeriodicSystem {
    pub fn new(generators: Vec<PeriodicSeq>, a: usize) -> Result<Self> {
        let Some(first) = generators.first() else {
            return Err(Error::InvalidInput("generator list is empty".into()));
        };
        let period = first.period();
        if generators.iter().any(|g| g.period() != period) {
            return Err(Error::InvalidInput(
                "generators have different periods".into(),
            ));
        }
        if a == 0 || period % a != 0 {
            return Err(Error::Precondition(format!(
                "shift step a = {a} must divide the period L = {period}"
            )));
        }
        Ok(PeriodicSystem { a, generators })
    }

    /// Periodizes every generator of `sys` onto `ℤ_L`.
    pub fn from_system(sys: &ShiftSystem, period: usize) -> Result<Self> {
        let generators = sys
            .generators()
            .iter()
            .map(|g| periodize(g, period).map(|p| p.0))
            .collect::<Result<Vec<_>>>()?;
        Self::new(generators, sys.a())
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn period(&self) -> usize {
        self.generators[0].period()
    }

    /// Number of distinct shifts, `K = L/a`.
    pub fn shifts(&self) -> usize {
        self.period() / self.a
    }

    pub fn channels(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[PeriodicSeq] {
        &self.generators
    }

    /// `⟨f, g_{m,n}⟩` for `n = 0..K`, indexed `[m][n]`.
    pub fn analyze(&self, f: &PeriodicSeq) -> Vec<Vec<Complex64>> {
        let a = self.a as i64;
        self.generators
            .iter()
            .map(|g| {
                (0..self.shifts() as i64)
                    .map(|n| f.inner(&g.shift(n * a)))
                    .collect()
            })
            .collect()
    }

    pub fn synthesize(&self, coeffs: &[Vec<Complex64>]) -> PeriodicSeq {
        let l = self.period() as i64;
        let a = self.a as i64;
        let mut out = vec![ZERO; l as usize];
        for (g, row) in self.generators.iter().zip(coeffs) {
            for (n, &c) in row.iter().enumerate() {
                if c == ZERO {
                    continue;
                }
                for (r, slot) in out.iter_mut().enumerate() {
                    *slot += c * g.get(r as i64 - n as i64 * a);
                }
            }
        }
        PeriodicSeq::new(out)
    }

    pub fn apply_frame_operator(&self, f: &PeriodicSeq) -> PeriodicSeq {
        self.synthesize(&self.analyze(f))
    }

    /// `L×L` frame operator from the raw double sum over channels and shifts.
    pub fn frame_operator_dense(&self) -> CMatrix {
        let l = self.period();
        let a = self.a as i64;
        let mut out = CMatrix::zeros(l, l);
        for g in &self.generators {
            for n in 0..self.shifts() as i64 {
                let e = g.shift(n * a);
                for k in 0..l {
                    let ek = e.values[k];
                    if ek == ZERO {
                        continue;
                    }
                    for j in 0..l {
                        out[(k, j)] += ek * e.values[j].conj();
                    }
                }
            }
        }
        out
    }

    /// First block column of the frame operator.
    pub fn block_circulant(&self) -> BlockCirculant {
        let l = self.period();
        let a = self.a;
        let k_blocks = self.shifts();
        let mut column = CMatrix::zeros(l, a);
        for g in &self.generators {
            for n in 0..k_blocks as i64 {
                let shift = n * a as i64;
                for q in 0..a {
                    let gq = g.get(q as i64 - shift).conj();
                    if gq == ZERO {
                        continue;
                    }
                    for row in 0..l {
                        column[(row, q)] += g.get(row as i64 - shift) * gq;
                    }
                }
            }
        }
        let blocks = (0..k_blocks)
            .map(|t| CMatrix::from_fn(a, a, |p, q| column[(t * a + p, q)]))
            .collect();
        BlockCirculant { a, blocks }
    }
}

/// Block circulant matrix of order `L = K·a` stored by its first block column
/// `C_t(p, q) = entry(ta + p, q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCirculant {
    a: usize,
    blocks: Vec<CMatrix>,
}

impl BlockCirculant {
    pub fn block_size(&self) -> usize {
        self.a
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn order(&self) -> usize {
        self.a * self.blocks.len()
    }

    pub fn first_block_column(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn entry(&self, k: usize, l: usize) -> Complex64 {
        let kb = self.blocks.len();
        let (r, p) = (k / self.a, k % self.a);
        let (t, q) = (l / self.a, l % self.a);
        self.blocks[(r + kb - t) % kb][(p, q)]
    }

    pub fn to_dense(&self) -> CMatrix {
        let n = self.order();
        CMatrix::from_fn(n, n, |k, l| self.entry(k, l))
    }

    /// `B_j = Σ_t C_t e^{−2πi jt/K}` for `j = 0..K`.
    pub fn block_diagonalize(&self) -> Vec<CMatrix> {
        let a = self.a;
        let kb = self.blocks.len();
        let fft = FftPlanner::<f64>::new().plan_fft_forward(kb);
        let mut out = vec![CMatrix::zeros(a, a); kb];
        let mut buf = vec![ZERO; kb];
        for p in 0..a {
            for q in 0..a {
                for (t, b) in buf.iter_mut().enumerate() {
                    *b = self.blocks[t][(p, q)];
                }
                fft.process(&mut buf);
                for (j, &v) in buf.iter().enumerate() {
                    out[j][(p, q)] = v;
                }
            }
        }
        out
    }

    /// Eigendecompositions of every DFT block.
    pub fn block_spectrum(&self) -> Result<BlockSpectrum> {
        let blocks = self.block_diagonalize();
        let eig = blocks
            .par_iter()
            .map(hermitian_eigen)
            .collect::<Result<Vec<_>>>()?;
        Ok(BlockSpectrum {
            a: self.a,
            blocks: eig,
        })
    }
}

/// Eigendecomposed DFT blocks of a Hermitian block circulant.
#[derive(Debug, Clone)]
pub struct BlockSpectrum {
    a: usize,
    blocks: Vec<HermitianEigen>,
}

impl BlockSpectrum {
    pub fn blocks(&self) -> &[HermitianEigen] {
        &self.blocks
    }

    pub fn min(&self) -> f64 {
        self.blocks
            .iter()
            .map(HermitianEigen::min)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.blocks
            .iter()
            .map(HermitianEigen::max)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// First block whose smallest eigenvalue is at or below `tol`.
    pub fn singular_block(&self, tol: f64) -> Option<(usize, f64)> {
        self.blocks
            .iter()
            .enumerate()
            .find(|(_, e)| e.min() <= tol)
            .map(|(j, e)| (j, e.min()))
    }

    /// Applies `f(C)` to `y`, where `f` acts on the eigenvalues of each block.
    pub fn apply_fn(&self, y: &[Complex64], f: impl Fn(f64) -> f64 + Sync) -> Vec<Complex64> {
        let a = self.a;
        let kb = self.blocks.len();
        assert_eq!(y.len(), a * kb);
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(kb);
        let inv = planner.plan_fft_inverse(kb);
        // hat[p][j]
        let mut hat: Vec<Vec<Complex64>> = (0..a)
            .map(|p| {
                let mut b: Vec<Complex64> = (0..kb).map(|r| y[r * a + p]).collect();
                fwd.process(&mut b);
                b
            })
            .collect();
        let mapped: Vec<CMatrix> = self.blocks.par_iter().map(|e| e.apply_fn(&f)).collect();
        for (j, m) in mapped.iter().enumerate() {
            let v: Vec<Complex64> = (0..a).map(|p| hat[p][j]).collect();
            let w = m.matvec(&v);
            for p in 0..a {
                hat[p][j] = w[p];
            }
        }
        let mut out = vec![ZERO; a * kb];
        let scale = 1.0 / kb as f64;
        for (p, b) in hat.iter_mut().enumerate() {
            inv.process(b);
            for (r, v) in b.iter().enumerate() {
                out[r * a + p] = v * scale;
            }
        }
        out
    }

    /// Dense matrix `f(C)`, column by column.
    pub fn dense_fn(&self, f: impl Fn(f64) -> f64 + Sync + Copy) -> CMatrix {
        let n = self.a * self.blocks.len();
        let mut out = CMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![ZERO; n];
            e[j] = Complex64::new(1.0, 0.0);
            for (i, v) in self.apply_fn(&e, f).into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }
}

fn check_period(sys: &ShiftSystem, period: usize) -> Result<()> {
    if period == 0 || period % sys.a() != 0 {
        return Err(Error::Precondition(format!(
            "shift step a = {} must divide the period L = {period}",
            sys.a()
        )));
    }
    if period as i64 <= 4 * sys.s() {
        return Err(Error::Precondition(format!(
            "period L = {period} must exceed 4s = {} so the wrapped bands stay apart",
            4 * sys.s()
        )));
    }
    Ok(())
}

/// Block circulant frame operator of the system periodized onto `ℤ_L`.
pub fn assemble_circulant(sys: &ShiftSystem, period: usize) -> Result<BlockCirculant> {
    check_period(sys, period)?;
    Ok(PeriodicSystem::from_system(sys, period)?.block_circulant())
}

pub fn block_diagonalize(c: &BlockCirculant) -> Vec<CMatrix> {
    c.block_diagonalize()
}

/// Duals of the periodized system, `ᴾγ_m = ᴾS^{-1} ᴾg_m`.
#[derive(Debug, Clone)]
pub struct PeriodicDual {
    pub period: usize,
    pub duals: Vec<PeriodicSeq>,
    pub spectrum_lo: f64,
    pub spectrum_hi: f64,
}

pub(crate) fn periodic_spectrum(
    sys: &ShiftSystem,
    period: usize,
) -> Result<(PeriodicSystem, BlockSpectrum)> {
    check_period(sys, period)?;
    let psys = PeriodicSystem::from_system(sys, period)?;
    let spec = psys.block_circulant().block_spectrum()?;
    if let Some((block, eigenvalue)) = spec.singular_block(SINGULAR_BLOCK_TOL) {
        return Err(Error::PeriodicNotAFrame {
            period,
            block,
            eigenvalue,
        });
    }
    Ok((psys, spec))
}

pub fn solve_dual_periodic(sys: &ShiftSystem, period: usize) -> Result<PeriodicDual> {
    let (psys, spec) = periodic_spectrum(sys, period)?;
    let duals = psys
        .generators()
        .iter()
        .map(|g| PeriodicSeq::new(spec.apply_fn(g.values(), |mu| 1.0 / mu)))
        .collect();
    Ok(PeriodicDual {
        period,
        duals,
        spectrum_lo: spec.min(),
        spectrum_hi: spec.max(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub frame_lower: f64,
    pub frame_upper: f64,
    pub block_min: f64,
    pub block_max: f64,
    /// `(block index, eigenvalue)` pairs outside `[A − ε, B + ε]`.
    pub violations: Vec<(usize, f64)>,
}

impl SpectrumReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that every block eigenvalue of the periodized operator lies in the
/// frame-bound interval of the original system.
pub fn spectrum_inclusion_check(
    sys: &ShiftSystem,
    period: usize,
    grid: usize,
) -> Result<SpectrumReport> {
    check_period(sys, period)?;
    let fb = frame_bounds(&symbol(sys), grid)?;
    let spec = PeriodicSystem::from_system(sys, period)?
        .block_circulant()
        .block_spectrum()?;
    let mut violations = Vec::new();
    for (j, e) in spec.blocks().iter().enumerate() {
        for &mu in &e.values {
            if mu < fb.lower - SPECTRUM_SLACK || mu > fb.upper + SPECTRUM_SLACK {
                violations.push((j, mu));
            }
        }
    }
    Ok(SpectrumReport {
        frame_lower: fb.lower,
        frame_upper: fb.upper,
        block_min: spec.min(),
        block_max: spec.max(),
        violations,
    })
}

/// Periodic duals on `ℤ_{2N+1}` compared with the reference dual restricted to `[−N, N]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicComparison {
    pub n: usize,
    pub period: usize,
    /// `‖P_N γ_ref − ᴾγ_m^(N)‖` per channel.
    pub measured: Vec<f64>,
    /// Periodic error bound at `N`.
    pub bound: f64,
    /// Finite-section bound of the reference itself.
    pub reference_bound: f64,
}

pub fn compare_periodic_vs_fs(
    sys: &ShiftSystem,
    n: usize,
    n_ref: usize,
) -> Result<PeriodicComparison> {
    let period = 2 * n + 1;
    if period % sys.a() != 0 {
        return Err(Error::Precondition(format!(
            "shift step a = {} does not divide the window length 2N+1 = {period}",
            sys.a()
        )));
    }
    let s = sys.s_bound();
    if n as i64 <= 3 * s {
        return Err(Error::Precondition(format!(
            "N must exceed 3s for the periodic error bound (N = {n}, s = {s})"
        )));
    }
    let cert = DecayCertificate::from_bounds(&system_frame_bounds(sys)?, s.max(1))?;
    let bound = cert.periodic_error_bound(n as i64)?;
    let reference_bound = cert.fs_error_bound(n_ref as i64)?;
    let reference = reference_dual(sys, n_ref)?;
    let pd = solve_dual_periodic(sys, period)?;
    let ni = n as i64;
    let measured = reference
        .solution
        .duals
        .iter()
        .zip(&pd.duals)
        .map(|(r, p)| r.restrict(-ni, ni).dist2(&p.centered()))
        .collect();
    Ok(PeriodicComparison {
        n,
        period,
        measured,
        bound,
        reference_bound,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct JanssenReport {
    pub period: usize,
    /// `max_m ‖periodize(γ_m^ref, L) − ᴾγ_m‖`.
    pub deviation: f64,
    pub reference_tail: f64,
    pub reference_bound: f64,
    /// `max_m ‖ᴾγ_m‖`, the scale for roundoff comparisons.
    pub dual_norm: f64,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Periodic Gabor duals versus the periodized reference duals.
pub fn janssen_periodization_check(
    sys: &ShiftSystem,
    period: usize,
    n_ref: usize,
) -> Result<JanssenReport> {
    let info = sys
        .gabor_info()
        .ok_or_else(|| Error::Precondition("periodization check needs a Gabor system".into()))?;
    let a = sys.a();
    let lcm = a / gcd(a, info.channels) * info.channels;
    if period % lcm != 0 {
        return Err(Error::Precondition(format!(
            "period L = {period} must be a multiple of the least common multiple lcm(a, M) = {lcm}"
        )));
    }
    let pd = solve_dual_periodic(sys, period)?;
    let reference = reference_dual(sys, n_ref)?;
    let cert = DecayCertificate::from_bounds(&system_frame_bounds(sys)?, sys.s_bound())?;
    let mut deviation = 0.0f64;
    for (r, p) in reference.solution.duals.iter().zip(&pd.duals) {
        deviation = deviation.max(periodize(r, period)?.0.dist2(p));
    }
    Ok(JanssenReport {
        period,
        deviation,
        dual_norm: pd.duals.iter().map(PeriodicSeq::norm2).fold(0.0, f64::max),
        reference_tail: reference.tail_mass,
        reference_bound: cert.fs_error_bound(n_ref as i64)?,
    })
}
