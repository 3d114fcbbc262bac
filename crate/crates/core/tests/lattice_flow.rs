//! Property tests for exact minima, duality and the flow.

use minima_forge::flow::{
    dual_flow_identity_check, flow_matrix, flow_point, minima_trace, random_a,
    translate_by_integers, AMatrix,
};
use minima_forge::lattice::{
    brute_force_minima, dual_basis, is_dual_pair, lll_reduce, minkowski_second_check,
    required_box, successive_minima_with, LatticeBasis, MinimaOptions, Norm,
};
use minima_forge::matrix::Matrix;
use minima_forge::rational::{int, rat, Rational};
use minima_forge::sample::{rational_unimodular_basis, unimodular_integer};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn basis(seed: u64, d: usize) -> LatticeBasis {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    LatticeBasis::exact(rational_unimodular_basis(&mut rng, d)).unwrap()
}

fn norm_strategy() -> impl Strategy<Value = Norm> {
    prop_oneof![Just(Norm::L2), Just(Norm::LInf)]
}

fn minima(b: &LatticeBasis, norm: Norm) -> Vec<Rational> {
    successive_minima_with(b, &MinimaOptions::with_norm(norm)).unwrap().values
}

/// Runs the box oracle when its required radius stays small.
fn oracle(b: &LatticeBasis, norm: Norm, cap: u64) -> Option<Vec<Rational>> {
    let need = required_box(b, norm).ok()?.to_u64()?;
    if need > cap {
        return None;
    }
    brute_force_minima(b, need, norm).ok().map(|r| r.values)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn enumeration_matches_oracle(seed in any::<u64>(), d in 2usize..=3, norm in norm_strategy()) {
        let b = basis(seed, d);
        let cap = if d == 2 { 40 } else { 12 };
        if let Some(expected) = oracle(&b, norm, cap) {
            prop_assert_eq!(minima(&b, norm), expected);
        }
    }

    // Skewed d >= 3 lattices exercise the l∞ LP pruning.
    #[test]
    fn linf_flow_minima_match_oracle(seed in any::<u64>(), n in 1usize..=2, k in 0i32..=2) {
        let a = random_a(seed, 1, n);
        let u = rational_pow2(k);
        let b = LatticeBasis::exact(flow_matrix(1, n, &a, &u)).unwrap();
        if let Some(expected) = oracle(&b, Norm::LInf, 24) {
            prop_assert_eq!(minima(&b, Norm::LInf), expected);
        }
    }

    #[test]
    fn minima_scale_linearly(seed in any::<u64>(), d in 2usize..=4, p in 1i64..=5, q in 1i64..=5) {
        let b = basis(seed, d);
        let c = rat(p, q);
        let base = minima(&b, Norm::L2);
        let scaled = minima(&b.scaled(&c).unwrap(), Norm::L2);
        let c2 = &c * &c;
        prop_assert_eq!(scaled, base.iter().map(|x| x * &c2).collect::<Vec<_>>());
        let base = minima(&b, Norm::LInf);
        let scaled = minima(&b.scaled(&c).unwrap(), Norm::LInf);
        prop_assert_eq!(scaled, base.iter().map(|x| x * &c).collect::<Vec<_>>());
    }

    #[test]
    fn unimodular_change_keeps_minima(seed in any::<u64>(), d in 2usize..=4, norm in norm_strategy()) {
        let b = basis(seed, d);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let t = unimodular_integer(&mut rng, d, 2 * d);
        let moved = LatticeBasis::exact(b.exact_matrix().unwrap().mul(&t)).unwrap();
        prop_assert!(moved.same_lattice(&b).unwrap());
        prop_assert_eq!(minima(&moved, norm), minima(&b, norm));
    }

    #[test]
    fn dual_is_involutive(seed in any::<u64>(), d in 2usize..=5) {
        let b = basis(seed, d);
        let dual = dual_basis(&b).unwrap();
        prop_assert!(is_dual_pair(&b, &dual).unwrap());
        let back = dual_basis(&dual).unwrap();
        prop_assert_eq!(back.exact_matrix(), b.exact_matrix());
    }

    #[test]
    fn dual_of_transform(seed in any::<u64>(), d in 2usize..=4) {
        // (TΛ)* = T^{-T} Λ*
        let b = basis(seed, d);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let t = rational_unimodular_basis(&mut rng, d);
        let tb = LatticeBasis::exact(t.mul(b.exact_matrix().unwrap())).unwrap();
        let lhs = dual_basis(&tb).unwrap();
        let b_dual = dual_basis(&b).unwrap();
        let rhs = t.inverse().unwrap().transpose().mul(b_dual.exact_matrix().unwrap());
        prop_assert!(lhs.same_lattice(&LatticeBasis::exact(rhs).unwrap()).unwrap());
    }

    #[test]
    fn lll_transform_reproduces_basis(seed in any::<u64>(), d in 2usize..=5) {
        let b = basis(seed, d);
        let out = lll_reduce(&b, &rat(3, 4)).unwrap();
        let cols: Vec<Vec<Rational>> = out.transform.iter()
            .map(|c| c.iter().cloned().map(Rational::from_integer).collect())
            .collect();
        let t = Matrix::from_columns(&cols).unwrap();
        prop_assert_eq!(t.det().abs(), Rational::one());
        prop_assert_eq!(&b.exact_matrix().unwrap().mul(&t), out.basis.exact_matrix().unwrap());
    }

    #[test]
    fn minkowski_bounds_hold(seed in any::<u64>(), d in 2usize..=4, norm in norm_strategy()) {
        let b = basis(seed, d);
        let report = minkowski_second_check(&b, norm).unwrap();
        prop_assert!(report.pass, "{:?}", report);
    }

    #[test]
    fn flow_has_unit_determinant(seed in any::<u64>(), m in 1usize..=3, n in 1usize..=3, k in 0i32..=4) {
        let a = random_a(seed, m, n);
        prop_assert_eq!(flow_matrix(m, n, &a, &rational_pow2(k)).det(), int(1));
    }

    #[test]
    fn dual_flow_formula_holds(seed in any::<u64>(), m in 1usize..=2, n in 1usize..=2, k in 0i32..=3) {
        let a = AMatrix::Exact(random_a(seed, m, n));
        prop_assert!(dual_flow_identity_check(m, n, &a, &rational_pow2(k)).unwrap().pass);
    }

    #[test]
    fn integer_translation_keeps_lattice(seed in any::<u64>(), shift in prop::collection::vec(-3i64..=3, 2), k in 0i32..=3) {
        let a = random_a(seed, 1, 2);
        let moved = translate_by_integers(&a, &[shift]);
        let u = rational_pow2(k);
        let p = flow_point(1, 2, &AMatrix::Exact(a), &u).unwrap();
        let q = flow_point(1, 2, &AMatrix::Exact(moved), &u).unwrap();
        prop_assert!(p.basis.same_lattice(&q.basis).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn trace_samples_are_monotone(seed in any::<u64>(), norm in norm_strategy()) {
        let a = AMatrix::Exact(random_a(seed, 1, 2));
        let grid: Vec<Rational> = (0..4).map(rational_pow2).collect();
        let trace = minima_trace(1, 2, &a, &grid, norm).unwrap();
        for s in &trace.samples {
            prop_assert!(s.monotone);
            prop_assert!(s.minkowski_pass);
        }
    }
}

fn rational_pow2(k: i32) -> Rational {
    Rational::from_integer(BigInt::from(1u64 << k))
}

#[test]
fn linf_oracle_coverage_on_flow_lattices() {
    // Guards against the oracle cap silently skipping every instance.
    let mut checked = 0;
    for seed in 0..40u64 {
        for k in 0..=2 {
            let a = random_a(seed, 1, 2);
            let b = LatticeBasis::exact(flow_matrix(1, 2, &a, &rational_pow2(k))).unwrap();
            if let Some(expected) = oracle(&b, Norm::LInf, 24) {
                assert_eq!(minima(&b, Norm::LInf), expected, "seed {seed}, u = 2^{k}");
                checked += 1;
            }
        }
    }
    assert!(checked >= 40, "only {checked} instances fit the oracle box");
}
