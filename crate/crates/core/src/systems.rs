//! Named example systems used throughout the tests and the shipped spec files.

use crate::seq::FiniteSeq;
use crate::sis::ShiftSystem;
use std::f64::consts::FRAC_1_SQRT_2;

/// Haar pair `(δ₀ ± δ₁)/√2` with `a = 2`: an orthonormal basis, so `S = I`.
pub fn haar() -> ShiftSystem {
    ShiftSystem::new(
        vec![
            FiniteSeq::from_real(0, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2]),
            FiniteSeq::from_real(0, &[FRAC_1_SQRT_2, -FRAC_1_SQRT_2]),
        ],
        2,
    )
    .expect("valid Haar system")
}

/// `g₀ = δ₀`, `g₁ = (δ₀ + δ₁)/√2`, `a = 1`. Symbol `2 + cos 2πω`, frame bounds 1 and 3.
pub fn system_b() -> ShiftSystem {
    ShiftSystem::new(
        vec![
            FiniteSeq::delta(0),
            FiniteSeq::from_real(0, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2]),
        ],
        1,
    )
    .expect("valid system B")
}

/// Box window `(1,1,1,1)/2` on `{0..3}` with `a = 2`, `M = 4` (a tight Gabor frame, `A = B = 2`).
pub fn gabor_box() -> ShiftSystem {
    ShiftSystem::gabor(FiniteSeq::from_real(0, &[0.5; 4]), 2, 4).expect("valid Gabor system")
}
