//! Shift-invariant systems `g_{m,n}(k) = g_m(k − na)` and their analysis,
//! synthesis and frame operators, evaluated as exact finite sums.

use crate::error::{Error, Result};
use crate::seq::FiniteSeq;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Tolerance for the unit-norm check behind [`ShiftSystem::is_normalized`].
pub const NORMALIZED_TOL: f64 = 1e-12;

/// Window and channel count of a Gabor system, kept for periodization checks.
#[derive(Debug, Clone, PartialEq)]
pub struct GaborInfo {
    pub window: FiniteSeq,
    pub channels: usize,
}

/// `M` finitely supported generators together with the shift step `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftSystem {
    a: usize,
    generators: Vec<FiniteSeq>,
    s: i64,
    normalized: bool,
    gabor: Option<GaborInfo>,
}

impl ShiftSystem {
    pub fn new(generators: Vec<FiniteSeq>, a: usize) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidInput("generator list is empty".into()));
        }
        if a == 0 {
            return Err(Error::InvalidInput(
                "shift step a must be at least 1".into(),
            ));
        }
        if let Some(m) = generators.iter().position(FiniteSeq::is_zero) {
            return Err(Error::InvalidInput(format!(
                "generator {m} is identically zero"
            )));
        }
        let s = generators
            .iter()
            .filter_map(FiniteSeq::support)
            .map(|(lo, hi)| lo.abs().max(hi.abs()))
            .max()
            .unwrap_or(0);
        let normalized = generators
            .iter()
            .all(|g| (g.norm2() - 1.0).abs() <= NORMALIZED_TOL);
        Ok(ShiftSystem {
            a,
            generators,
            s,
            normalized,
            gabor: None,
        })
    }

    /// Gabor system: `g_m(k) = e^{2πi mk/M} g(k)` for `m = 0..M`.
    pub fn gabor(window: FiniteSeq, a: usize, channels: usize) -> Result<Self> {
        if channels == 0 {
            return Err(Error::InvalidInput(
                "channel count M must be at least 1".into(),
            ));
        }
        let generators = (0..channels)
            .map(|m| {
                let (lo, hi) = window.support().unwrap_or((0, -1));
                FiniteSeq::from_fn(lo, hi, |k| {
                    window.get(k) * modulation(m as i64 * k, channels)
                })
            })
            .collect();
        let mut sys = Self::new(generators, a)?;
        sys.gabor = Some(GaborInfo { window, channels });
        Ok(sys)
    }

    /// Same system with every generator rescaled to unit ℓ²-norm.
    pub fn normalize(&self) -> ShiftSystem {
        let generators = self.generators.iter().map(FiniteSeq::normalized).collect();
        let mut sys = ShiftSystem::new(generators, self.a).expect("non-empty nonzero generators");
        if let Some(info) = &self.gabor {
            sys.gabor = Some(GaborInfo {
                window: info.window.normalized(),
                channels: info.channels,
            });
        }
        sys
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub(crate) fn a_i64(&self) -> i64 {
        self.a as i64
    }

    pub fn channels(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[FiniteSeq] {
        &self.generators
    }

    /// Half support: every generator vanishes for `|k| > s`.
    pub fn s(&self) -> i64 {
        self.s
    }

    /// `max(s, 1)`: the half support entering the decay constants.
    pub fn s_bound(&self) -> i64 {
        self.s.max(1)
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn gabor_info(&self) -> Option<&GaborInfo> {
        self.gabor.as_ref()
    }

    pub fn is_gabor(&self) -> bool {
        self.gabor.is_some()
    }

    /// Union of generator supports.
    pub(crate) fn generator_span(&self) -> (i64, i64) {
        self.generators
            .iter()
            .filter_map(FiniteSeq::support)
            .fold((i64::MAX, i64::MIN), |(lo, hi), (a, b)| {
                (lo.min(a), hi.max(b))
            })
    }

    /// Shifts `n` for which `g_{m,n}` can touch `lo..=hi`.
    pub(crate) fn shifts_touching(&self, lo: i64, hi: i64) -> (i64, i64) {
        let (glo, ghi) = self.generator_span();
        let a = self.a_i64();
        // g_m(k − na) ≠ 0 needs glo ≤ k − na ≤ ghi for some k in the window
        (div_ceil(lo - ghi, a), div_floor(hi - glo, a))
    }

    /// `g_{m,n} = g_m(· − na)`.
    pub fn element(&self, m: usize, n: i64) -> FiniteSeq {
        self.generators[m].shift(n * self.a_i64())
    }

    /// `⟨f, g_{m,n}⟩` for every `(m, n)` in the requested shift range.
    pub fn analyze(&self, f: &FiniteSeq, range: CoeffRange) -> Result<CoeffArray> {
        let (n_lo, n_hi) = match range {
            CoeffRange::Span(lo, hi) => {
                if lo > hi {
                    return Err(Error::Precondition(format!(
                        "coefficient range needs n_lo <= n_hi, got {lo} > {hi}"
                    )));
                }
                (lo, hi)
            }
            CoeffRange::Auto => match f.support() {
                None => return Ok(CoeffArray::zeros(self.channels(), 0, 0)),
                Some((lo, hi)) => self.shifts_touching(lo, hi),
            },
        };
        let len = (n_hi - n_lo + 1) as usize;
        let mut out = CoeffArray::zeros(self.channels(), n_lo, len);
        for m in 0..self.channels() {
            for n in n_lo..=n_hi {
                out.set(m, n, f.inner(&self.element(m, n)));
            }
        }
        Ok(out)
    }

    /// `Σ_{m,n} c_{m,n} g_{m,n}`.
    pub fn synthesize(&self, c: &CoeffArray) -> FiniteSeq {
        if c.n_len() == 0 {
            return FiniteSeq::zero();
        }
        let (glo, ghi) = self.generator_span();
        let a = self.a_i64();
        let lo = glo + c.n_lo() * a;
        let hi = ghi + c.n_hi() * a;
        let mut acc = vec![Complex64::new(0.0, 0.0); (hi - lo + 1) as usize];
        for m in 0..self.channels().min(c.channels()) {
            let g = &self.generators[m];
            for n in c.n_lo()..=c.n_hi() {
                let coef = c.get(m, n);
                if coef == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (k, v) in g.iter() {
                    acc[(k + n * a - lo) as usize] += coef * v;
                }
            }
        }
        FiniteSeq::new(lo, acc)
    }

    /// `Sf = Σ_{m,n} ⟨f, g_{m,n}⟩ g_{m,n}` with `n` over the shifts overlapping `supp f`.
    pub fn apply_frame_operator(&self, f: &FiniteSeq) -> FiniteSeq {
        let coeffs = self
            .analyze(f, CoeffRange::Auto)
            .expect("automatic range is always valid");
        self.synthesize(&coeffs)
    }
}

/// `e^{2πi·j/M}`, with `j` reduced mod `M` first so large indices stay accurate.
pub(crate) fn modulation(j: i64, m: usize) -> Complex64 {
    let r = j.rem_euclid(m as i64);
    Complex64::from_polar(1.0, 2.0 * PI * r as f64 / m as f64)
}

pub fn make_system(generators: Vec<FiniteSeq>, a: usize) -> Result<ShiftSystem> {
    ShiftSystem::new(generators, a)
}

pub fn make_gabor_system(window: FiniteSeq, a: usize, channels: usize) -> Result<ShiftSystem> {
    ShiftSystem::gabor(window, a, channels)
}

pub(crate) fn div_floor(x: i64, d: i64) -> i64 {
    x.div_euclid(d)
}

pub(crate) fn div_ceil(x: i64, d: i64) -> i64 {
    -((-x).div_euclid(d))
}

/// Shift range for [`ShiftSystem::analyze`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoeffRange {
    /// Every shift whose element overlaps the signal support.
    Auto,
    /// Inclusive `n_lo..=n_hi`.
    Span(i64, i64),
}

/// Frame coefficients indexed by channel `m` and shift `n`; zero outside the stored rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffArray {
    channels: usize,
    n_lo: i64,
    n_len: usize,
    data: Vec<Complex64>,
}

impl CoeffArray {
    pub fn zeros(channels: usize, n_lo: i64, n_len: usize) -> Self {
        CoeffArray {
            channels,
            n_lo,
            n_len,
            data: vec![Complex64::new(0.0, 0.0); channels * n_len],
        }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn n_lo(&self) -> i64 {
        self.n_lo
    }

    pub fn n_hi(&self) -> i64 {
        self.n_lo + self.n_len as i64 - 1
    }

    pub fn n_len(&self) -> usize {
        self.n_len
    }

    fn slot(&self, m: usize, n: i64) -> Option<usize> {
        let j = n - self.n_lo;
        (m < self.channels && j >= 0 && (j as usize) < self.n_len)
            .then(|| m * self.n_len + j as usize)
    }

    pub fn get(&self, m: usize, n: i64) -> Complex64 {
        self.slot(m, n)
            .map_or(Complex64::new(0.0, 0.0), |i| self.data[i])
    }

    /// Panics if `(m, n)` lies outside the stored rectangle.
    pub fn set(&mut self, m: usize, n: i64, v: Complex64) {
        let i = self
            .slot(m, n)
            .expect("coefficient index outside stored range");
        self.data[i] = v;
    }

    /// `Σ_{m,n} self(m,n)·conj(other(m,n))`.
    pub fn inner(&self, other: &CoeffArray) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..self.channels {
            for j in 0..self.n_len {
                let n = self.n_lo + j as i64;
                acc += self.data[m * self.n_len + j] * other.get(m, n).conj();
            }
        }
        acc
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn haar_system_shape() {
        let haar = systems::haar();
        assert_eq!(haar.channels(), 2);
        assert_eq!(haar.a(), 2);
        assert_eq!(haar.s(), 1);
        assert!(haar.is_normalized());
    }

    #[test]
    fn system_b_shape() {
        let b = systems::system_b();
        assert_eq!((b.channels(), b.a(), b.s()), (2, 1, 1));
    }

    #[test]
    fn construction_errors() {
        assert!(make_system(Vec::new(), 2).is_err());
        assert!(make_system(vec![FiniteSeq::delta(0)], 0).is_err());
        assert!(make_system(vec![FiniteSeq::delta(0), FiniteSeq::zero()], 1).is_err());
        assert!(make_gabor_system(FiniteSeq::delta(0), 1, 0).is_err());
    }

    #[test]
    fn gabor_modulation_values() {
        let sys = make_gabor_system(FiniteSeq::delta(0), 1, 2).unwrap();
        assert_eq!(sys.generators()[0], FiniteSeq::delta(0));
        assert_eq!(sys.generators()[1], FiniteSeq::delta(0));

        let g = FiniteSeq::from_real(0, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        let sys = make_gabor_system(g, 1, 2).unwrap();
        let g1 = &sys.generators()[1];
        assert!((g1.get(0) - FRAC_1_SQRT_2).norm() < 1e-15);
        assert!((g1.get(1) + FRAC_1_SQRT_2).norm() < 1e-15);

        let g = FiniteSeq::from_real(-1, &[FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2]);
        let sys = make_gabor_system(g, 2, 4).unwrap();
        assert!((sys.generators()[2].get(1) + FRAC_1_SQRT_2).norm() < 1e-15);
        assert!(sys.is_gabor());
    }

    #[test]
    fn haar_analysis_of_delta() {
        let haar = systems::haar();
        let c = haar
            .analyze(&FiniteSeq::delta(0), CoeffRange::Span(-3, 3))
            .unwrap();
        for n in -3..=3 {
            let expect = if n == 0 { FRAC_1_SQRT_2 } else { 0.0 };
            assert!((c.get(0, n) - expect).norm() < 1e-15);
            assert!((c.get(1, n) - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_signal_gives_zero_coefficients() {
        let b = systems::system_b();
        let c = b
            .analyze(&FiniteSeq::zero(), CoeffRange::Span(-2, 2))
            .unwrap();
        assert_eq!(c.max_abs(), 0.0);
        assert_eq!(b.synthesize(&c), FiniteSeq::zero());
        assert_eq!(
            b.apply_frame_operator(&FiniteSeq::zero()),
            FiniteSeq::zero()
        );
    }

    #[test]
    fn point_mass_system_picks_shift() {
        let sys = make_system(vec![FiniteSeq::delta(0)], 1).unwrap();
        let c = sys
            .analyze(&FiniteSeq::delta(3), CoeffRange::Span(-5, 5))
            .unwrap();
        for n in -5..=5 {
            assert_eq!(c.get(0, n).re, if n == 3 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn reversed_range_rejected() {
        let c = systems::haar().analyze(&FiniteSeq::delta(0), CoeffRange::Span(2, 1));
        assert!(matches!(c, Err(Error::Precondition(_))));
    }

    #[test]
    fn synthesis_single_coefficient_and_haar_roundtrip() {
        let haar = systems::haar();
        let mut c = CoeffArray::zeros(2, 0, 1);
        c.set(0, 0, Complex64::new(1.0, 0.0));
        assert!(haar.synthesize(&c).approx_eq(&haar.generators()[0], 1e-15));

        let f = FiniteSeq::from_real(-3, &[0.5, -1.0, 2.0, 0.25, 3.0, -0.75]);
        let coeffs = haar.analyze(&f, CoeffRange::Auto).unwrap();
        assert!(haar.synthesize(&coeffs).approx_eq(&f, 1e-14));
    }

    #[test]
    fn frame_operator_examples() {
        let haar = systems::haar();
        let f = FiniteSeq::from_real(-2, &[1.0, -2.0, 0.5, 4.0]);
        assert!(haar.apply_frame_operator(&f).approx_eq(&f, 1e-14));

        let sf = systems::system_b().apply_frame_operator(&FiniteSeq::delta(0));
        let expect = FiniteSeq::from_real(-1, &[0.5, 2.0, 0.5]);
        assert!(sf.approx_eq(&expect, 1e-14));
    }

    #[test]
    fn floor_and_ceil_division() {
        assert_eq!(div_floor(-3, 2), -2);
        assert_eq!(div_ceil(-3, 2), -1);
        assert_eq!(div_ceil(3, 2), 2);
        assert_eq!(div_floor(3, 2), 1);
    }
}
