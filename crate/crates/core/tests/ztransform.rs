mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zlattice::generators::{gaussian_decay, geometric};
use zlattice::lattice::{IndexBox, LatticeDomain, MultiIndex};
use zlattice::sequence::{SequenceTable, ValueKind};
use zlattice::ztransform::{convergence_region, eval_forward, invert_contour, modulation, shift_identity, TransformEvaluator};

fn rand_kind(rng: &mut ChaCha8Rng) -> ValueKind {
    match rng.random_range(0..3) {
        0 => ValueKind::Scalar,
        1 => ValueKind::Vector(rng.random_range(1..=3)),
        _ => ValueKind::Matrix(2),
    }
}

fn rel(a: &[Complex64], b: &[Complex64]) -> f64 {
    let d: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&d) / norm(b).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inversion_recovers_finite_tables(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kind = rand_kind(&mut rng);
        let support = rand_box(&mut rng, n, -5..=5, [10, 5, 3][n - 1]);
        let f = rand_table(&mut rng, LatticeDomain::full(n), support.clone(), kind);
        let radii: Vec<f64> = (0..n).map(|_| rng.random_range(0.6..1.6)).collect();
        // the minimal grid 2 span + 1 is enough for exact recovery as well
        let grid: Vec<usize> = support.spans().iter().map(|s| 2 * s + 1).collect();
        let inv = invert_contour(&TransformEvaluator::from_sequence(&f).unwrap(), &radii, &support, Some(&grid)).unwrap();
        prop_assert!(f.max_abs_diff(&inv.table, &support) <= 1e-10);
    }

    #[test]
    fn forward_transform_is_linear(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kind = rand_kind(&mut rng);
        let sf = rand_box(&mut rng, n, -3..=3, 4);
        let f = rand_table(&mut rng, LatticeDomain::full(n), sf, kind);
        let sg = rand_box(&mut rng, n, -3..=3, 4);
        let g = rand_table(&mut rng, LatticeDomain::full(n), sg, kind);
        let (alpha, beta) = (rand_complex(&mut rng), rand_complex(&mut rng));
        let z = rand_point(&mut rng, n, 0.7..1.4);
        let combo = SequenceTable::linear_combination(alpha, &f, beta, &g).unwrap();
        let lhs = eval_forward(&combo, &z).unwrap().value;
        let (ef, eg) = (eval_forward(&f, &z).unwrap().value, eval_forward(&g, &z).unwrap().value);
        let rhs: Vec<Complex64> = ef.iter().zip(&eg).map(|(x, y)| alpha * x + beta * y).collect();
        let scale = ef.iter().chain(&eg).map(|x| x.norm()).sum::<f64>() * (alpha.norm() + beta.norm());
        let diff: Vec<Complex64> = lhs.iter().zip(&rhs).map(|(x, y)| x - y).collect();
        prop_assert!(norm(&diff) <= 1e-13 * scale.max(1.0));
    }

    #[test]
    fn region_membership_ignores_arguments(seed in any::<u64>(), n in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ratio: Vec<Complex64> = (0..n).map(|_| rand_complex(&mut rng)).collect();
        let center: Vec<i64> = (0..n).map(|_| rng.random_range(-2..=2)).collect();
        let beta = rng.random_range(0.2..2.0);
        for f in [
            geometric(&ratio, 8, ValueKind::Scalar, &[c(1.0, 0.0)]).unwrap(),
            gaussian_decay(&center, 3, Some(beta), ValueKind::Scalar, &[c(1.0, 0.0)]).unwrap(),
        ] {
            let region = convergence_region(&f).unwrap();
            for _ in 0..20 {
                let z = rand_point(&mut rng, n, 0.05..4.0);
                let turned: Vec<Complex64> =
                    z.iter().map(|x| x * Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))).collect();
                prop_assert_eq!(region.contains(&z), region.contains(&turned));
            }
        }
    }

    #[test]
    fn shift_identity_matches_shifted_table(seed in any::<u64>(), n in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = MultiIndex::new((0..n).map(|_| rng.random_range(0..=3)).collect());
        // an infinite geometric sequence on N_0, or finite data on N_0^2 whose
        // boundary strip D \ (a + D) lies inside the stored box
        let f = if n == 1 {
            geometric(&[rand_complex(&mut rng) * 0.7], 40, ValueKind::Vector(2), &[c(1.0, 0.5), c(-0.5, 0.0)]).unwrap()
        } else {
            let support = IndexBox::cube(2, 0, 6).unwrap();
            rand_table(&mut rng, LatticeDomain::nonneg(2), support, ValueKind::Vector(2))
        };
        let g = SequenceTable::from_fn(LatticeDomain::nonneg(n), IndexBox::cube(n, 0, 40).unwrap(), f.kind(), None, |k| {
            f.value_or_zero(&(k + &a))
        })
        .unwrap();
        let evaluator = shift_identity(&TransformEvaluator::from_sequence(&f).unwrap(), &f, &a).unwrap();
        for _ in 0..20 {
            let z = rand_point(&mut rng, n, 1.5..3.0);
            let ev = evaluator.evaluate(&z).unwrap();
            prop_assert!(rel(&ev.value, &naive_transform(&g, &z)) <= 1e-10, "a = {:?}, z = {:?}", a, z);
        }
    }

    #[test]
    fn modulation_rescales_the_argument(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kind = rand_kind(&mut rng);
        let support = rand_box(&mut rng, n, -3..=3, 4);
        let f = rand_table(&mut rng, LatticeDomain::full(n), support, kind);
        let a: Vec<Complex64> = (0..n).map(|_| Complex64::from_polar(rng.random_range(0.5..2.0), rng.random_range(0.0..6.0))).collect();
        let g = modulation(&f, &a).unwrap();
        let z = rand_point(&mut rng, n, 0.8..1.25);
        let scaled: Vec<Complex64> = z.iter().zip(&a).map(|(x, y)| x / y).collect();
        prop_assert!(rel(&naive_transform(&g, &z), &naive_transform(&f, &scaled)) <= 1e-10);
    }
}

#[test]
fn shift_with_infinite_boundary_is_rejected() {
    let f = geometric(&[c(0.5, 0.0), c(0.5, 0.0)], 10, ValueKind::Scalar, &[c(1.0, 0.0)]).unwrap();
    let ev = TransformEvaluator::from_sequence(&f).unwrap();
    let err = shift_identity(&ev, &f, &MultiIndex::new(vec![1, 0])).unwrap_err();
    assert!(matches!(err, zlattice::error::Error::BoundaryNotFinite));
    let err = shift_identity(&ev, &f, &MultiIndex::new(vec![-1, 0])).unwrap_err();
    assert!(matches!(err, zlattice::error::Error::ShiftLeavesDomain { .. }));
}

#[test]
fn constant_transform_inverts_to_delta() {
    let one = TransformEvaluator::constant(2, ValueKind::Scalar, vec![c(1.0, 0.0)]).unwrap();
    let window = IndexBox::cube(2, -3, 3).unwrap();
    let inv = invert_contour(&one, &[0.8, 1.3], &window, None).unwrap();
    for k in window.iter() {
        let expected = if k.coords() == [0, 0] { 1.0 } else { 0.0 };
        assert!((inv.table.scalar_at(k.coords()) - expected).norm() < 1e-14);
    }
}

#[test]
fn aliasing_bound_covers_geometric_tail() {
    // f(k) = 0.5^k on N_0 inverted on a window shorter than its support
    let f = geometric(&[c(0.5, 0.0)], 200, ValueKind::Scalar, &[c(1.0, 0.0)]).unwrap();
    let window = IndexBox::cube(1, 0, 10).unwrap();
    let inv = invert_contour(&TransformEvaluator::from_sequence(&f).unwrap(), &[1.0], &window, Some(&[16])).unwrap();
    let bound = inv.aliasing_bound.expect("envelope gives an aliasing bound");
    for k in 0..=10 {
        let err = (inv.table.scalar_at(&[k]) - 0.5f64.powi(k as i32)).norm();
        assert!(err <= bound + inv.node_error_bound + 1e-15, "k = {k}: {err} > {bound}");
    }
    assert!(bound > 0.0);
}
