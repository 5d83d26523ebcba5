//! Finitely supported complex sequences on the integers.

use num_complex::Complex64;
use std::ops::{Add, Sub};

/// A complex sequence on ℤ with finite support.
///
/// Samples are stored contiguously starting at `offset`; everything outside the
/// stored window is zero. Constructors canonicalize: leading and trailing exact
/// zeros are trimmed and the zero sequence has no stored samples (offset 0).
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSeq {
    offset: i64,
    values: Vec<Complex64>,
}

impl FiniteSeq {
    pub fn new(offset: i64, values: Vec<Complex64>) -> Self {
        let mut seq = FiniteSeq { offset, values };
        seq.canonicalize();
        seq
    }

    pub fn from_real(offset: i64, values: &[f64]) -> Self {
        Self::new(
            offset,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    pub fn zero() -> Self {
        FiniteSeq {
            offset: 0,
            values: Vec::new(),
        }
    }

    /// Unit point mass at `k`.
    pub fn delta(k: i64) -> Self {
        FiniteSeq {
            offset: k,
            values: vec![Complex64::new(1.0, 0.0)],
        }
    }

    /// Builds a sequence on `lo..=hi` from a sample function, then canonicalizes.
    pub fn from_fn(lo: i64, hi: i64, mut f: impl FnMut(i64) -> Complex64) -> Self {
        if hi < lo {
            return Self::zero();
        }
        Self::new(lo, (lo..=hi).map(&mut f).collect())
    }

    fn canonicalize(&mut self) {
        let zero = Complex64::new(0.0, 0.0);
        let Some(first) = self.values.iter().position(|&v| v != zero) else {
            self.values.clear();
            self.offset = 0;
            return;
        };
        let last = self.values.iter().rposition(|&v| v != zero).unwrap();
        self.values.truncate(last + 1);
        self.values.drain(..first);
        self.offset += first as i64;
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Inclusive index range of the stored window, `None` for the zero sequence.
    pub fn support(&self) -> Option<(i64, i64)> {
        if self.values.is_empty() {
            None
        } else {
            Some((self.offset, self.offset + self.values.len() as i64 - 1))
        }
    }

    pub fn get(&self, k: i64) -> Complex64 {
        let idx = k - self.offset;
        if idx < 0 || idx >= self.values.len() as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[idx as usize]
        }
    }

    /// Iterates `(k, x(k))` over the stored window.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.offset + i as i64, v))
    }

    pub fn norm2(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `⟨self, other⟩ = Σ_k self(k)·conj(other(k))`.
    pub fn inner(&self, other: &FiniteSeq) -> Complex64 {
        let (Some((lo1, hi1)), Some((lo2, hi2))) = (self.support(), other.support()) else {
            return Complex64::new(0.0, 0.0);
        };
        let lo = lo1.max(lo2);
        let hi = hi1.min(hi2);
        (lo..=hi).map(|k| self.get(k) * other.get(k).conj()).sum()
    }

    /// `x(· − d)`: moves the support right by `d`.
    pub fn shift(&self, d: i64) -> FiniteSeq {
        FiniteSeq {
            offset: if self.is_zero() { 0 } else { self.offset + d },
            values: self.values.clone(),
        }
    }

    pub fn scale(&self, c: Complex64) -> FiniteSeq {
        FiniteSeq::new(self.offset, self.values.iter().map(|&v| v * c).collect())
    }

    pub fn conj(&self) -> FiniteSeq {
        FiniteSeq {
            offset: self.offset,
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    /// Restriction to `lo..=hi` (the projection `P_N` when the range is `[−N, N]`).
    pub fn restrict(&self, lo: i64, hi: i64) -> FiniteSeq {
        match self.support() {
            None => FiniteSeq::zero(),
            Some((a, b)) => {
                let lo = lo.max(a);
                let hi = hi.min(b);
                FiniteSeq::from_fn(lo, hi, |k| self.get(k))
            }
        }
    }

    /// Dense samples on `lo..=hi`.
    pub fn window(&self, lo: i64, hi: i64) -> Vec<Complex64> {
        if hi < lo {
            return Vec::new();
        }
        (lo..=hi).map(|k| self.get(k)).collect()
    }

    pub fn normalized(&self) -> FiniteSeq {
        let n = self.norm2();
        if n == 0.0 {
            self.clone()
        } else {
            self.scale(Complex64::new(1.0 / n, 0.0))
        }
    }

    /// Canonical-form equality up to a per-entry tolerance.
    pub fn approx_eq(&self, other: &FiniteSeq, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn max_abs_diff(&self, other: &FiniteSeq) -> f64 {
        let (lo, hi) = union_support(self, other);
        (lo..=hi)
            .map(|k| (self.get(k) - other.get(k)).norm())
            .fold(0.0, f64::max)
    }

    /// ℓ² distance over the union of supports.
    pub fn dist2(&self, other: &FiniteSeq) -> f64 {
        let (lo, hi) = union_support(self, other);
        (lo..=hi)
            .map(|k| (self.get(k) - other.get(k)).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `Σ_{|k| > radius} |x(k)|²`.
    pub fn tail_mass(&self, radius: i64) -> f64 {
        self.iter()
            .filter(|(k, _)| k.abs() > radius)
            .map(|(_, v)| v.norm_sqr())
            .sum()
    }
}

fn union_support(x: &FiniteSeq, y: &FiniteSeq) -> (i64, i64) {
    match (x.support(), y.support()) {
        (None, None) => (0, -1),
        (Some(s), None) | (None, Some(s)) => s,
        (Some((a, b)), Some((c, d))) => (a.min(c), b.max(d)),
    }
}

fn combine(
    x: &FiniteSeq,
    y: &FiniteSeq,
    op: impl Fn(Complex64, Complex64) -> Complex64,
) -> FiniteSeq {
    let (lo, hi) = union_support(x, y);
    FiniteSeq::from_fn(lo, hi, |k| op(x.get(k), y.get(k)))
}

impl Add for &FiniteSeq {
    type Output = FiniteSeq;
    fn add(self, rhs: &FiniteSeq) -> FiniteSeq {
        combine(self, rhs, |a, b| a + b)
    }
}

impl Sub for &FiniteSeq {
    type Output = FiniteSeq;
    fn sub(self, rhs: &FiniteSeq) -> FiniteSeq {
        combine(self, rhs, |a, b| a - b)
    }
}
