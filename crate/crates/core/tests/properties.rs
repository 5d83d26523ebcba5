use framebank::frame_operator::{assemble_banded, symbol, system_frame_bounds, truncate_section};
use framebank::periodic::{periodize, solve_dual_periodic, PeriodicSeq, PeriodicSystem};
use framebank::seq::FiniteSeq;
use framebank::sis::{CoeffRange, ShiftSystem};
use framebank::tight::tight_periodic;
use framebank::{finite_section, oracle};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn seq_strategy(max_len: usize, span: i64) -> impl Strategy<Value = FiniteSeq> {
    (
        -span..=span,
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..=max_len),
    )
        .prop_map(|(off, v)| {
            FiniteSeq::new(
                off,
                v.into_iter().map(|(r, i)| Complex64::new(r, i)).collect(),
            )
        })
}

fn system_strategy() -> impl Strategy<Value = ShiftSystem> {
    (1usize..=3, prop::collection::vec(seq_strategy(5, 3), 1..=4))
        .prop_filter_map("zero generator", |(a, gens)| ShiftSystem::new(gens, a).ok())
}

fn frame_from_seed() -> impl Strategy<Value = ShiftSystem> {
    any::<u64>().prop_map(|seed| oracle::random_fir_frame(&mut ChaCha8Rng::seed_from_u64(seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn analysis_and_synthesis_are_adjoint(sys in system_strategy(), f in seq_strategy(9, 6)) {
        let c = sys.analyze(&f, CoeffRange::Auto).unwrap();
        let mut d = c.clone();
        for m in 0..d.channels() {
            for n in d.n_lo()..=d.n_hi() {
                d.set(m, n, Complex64::new((n as f64).cos(), m as f64 * 0.25));
            }
        }
        let lhs = f.inner(&sys.synthesize(&d));
        let rhs = c.inner(&d);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn frame_operator_is_hermitian(sys in system_strategy(), f in seq_strategy(7, 5), h in seq_strategy(7, 5)) {
        let lhs = sys.apply_frame_operator(&f).inner(&h);
        let rhs = f.inner(&sys.apply_frame_operator(&h));
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn frame_operator_commutes_with_block_shift(sys in system_strategy(), f in seq_strategy(7, 5), j in -3i64..=3) {
        let a = sys.a() as i64;
        let lhs = sys.apply_frame_operator(&f.shift(j * a));
        let rhs = sys.apply_frame_operator(&f).shift(j * a);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-13);
    }

    #[test]
    fn banded_assembly_matches_operator(sys in system_strategy(), k in -6i64..=6) {
        let band = assemble_banded(&sys, -8, 8).unwrap();
        let col = sys.apply_frame_operator(&FiniteSeq::delta(k));
        for i in -8..=8 {
            prop_assert!((band.entry(i, k) - col.get(i)).norm() <= 1e-13);
        }
    }

    #[test]
    fn section_is_compression_and_interlaces(sys in frame_from_seed(), n in 0usize..12) {
        let full = assemble_banded(&sys, -(n as i64), n as i64).unwrap();
        let sec = truncate_section(&sys, n);
        prop_assert!(full.to_dense().sub(&sec.to_dense()).max_abs() <= 1e-14);
        let fb = system_frame_bounds(&sys).unwrap();
        let (lo, hi) = sec.extreme_eigenvalues();
        prop_assert!(lo >= fb.lower * (1.0 - 1e-9) && hi <= fb.upper * (1.0 + 1e-9));
    }

    #[test]
    fn symbol_is_hermitian(sys in system_strategy(), w in 0.0f64..1.0) {
        prop_assert!(symbol(&sys).eval(w).hermitian_defect() <= 1e-14);
    }

    #[test]
    fn dual_solve_has_small_residual(sys in frame_from_seed(), n in 9usize..25) {
        let sol = finite_section::solve_dual_fs(&sys, n).unwrap();
        for r in sol.residuals {
            prop_assert!(r <= 1e-12);
        }
    }

    #[test]
    fn periodize_preserves_sum(x in seq_strategy(12, 10), l in 1usize..20) {
        let (p, overlap) = periodize(&x, l).unwrap();
        let total: Complex64 = x.values().iter().sum();
        let folded: Complex64 = p.values().iter().sum();
        prop_assert!((total - folded).norm() <= 1e-12);
        prop_assert_eq!(overlap, x.len() > l);
    }

    #[test]
    fn periodic_duals_reconstruct(sys in frame_from_seed(), mult in 0usize..3) {
        let a = sys.a();
        let l = a * ((4 * sys.s() as usize + 1).div_ceil(a) + mult);
        let pd = solve_dual_periodic(&sys, l).unwrap();
        let g = PeriodicSystem::from_system(&sys, l).unwrap();
        let d = PeriodicSystem::new(pd.duals, a).unwrap();
        let f = PeriodicSeq::new((0..l).map(|r| Complex64::new((r as f64 * 0.7).sin(), 0.3)).collect());
        prop_assert!(g.synthesize(&d.analyze(&f)).max_abs_diff(&f) <= 1e-10);
    }

    #[test]
    fn tight_generators_keep_shift_covariance(sys in frame_from_seed()) {
        let a = sys.a();
        let l = a * ((4 * sys.s() as usize + 1).div_ceil(a) + 2);
        let t = tight_periodic(&sys, l).unwrap();
        prop_assert!(t.tightness_defect <= 1e-10);
        let phi = PeriodicSystem::new(t.generators, a).unwrap();
        let f = PeriodicSeq::delta(l, 1);
        let lhs = phi.apply_frame_operator(&f.shift(a as i64));
        let rhs = phi.apply_frame_operator(&f).shift(a as i64);
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
    }
}
