mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zlattice::convolution::{conv_general, conv_theorem_check, convolve, ConvOptions, ConvPlan};
use zlattice::fractional::cesaro;
use zlattice::generators::{delta, gaussian_decay};
use zlattice::lattice::{IndexBox, LatticeDomain, MultiIndex};
use zlattice::sequence::{SequenceTable, ValueKind};

fn product_box(a: &IndexBox, b: &IndexBox) -> IndexBox {
    a.minkowski(b)
}

fn rand_factor(rng: &mut ChaCha8Rng, n: usize, kind: ValueKind) -> SequenceTable {
    let (domain, support) = match rng.random_range(0..3) {
        0 => (LatticeDomain::full(n), rand_box(rng, n, -3..=3, 4)),
        1 => (LatticeDomain::nonneg(n), rand_box(rng, n, 0..=3, 4)),
        _ => {
            let b = rand_box(rng, n, -3..=3, 4);
            (LatticeDomain::boxed(b.clone()), b)
        }
    };
    rand_table(rng, domain, support, kind)
}

fn gen(a: &SequenceTable, b: &SequenceTable, window: &IndexBox) -> SequenceTable {
    let plan = ConvPlan::general(a.domain().clone(), b.domain().clone()).unwrap();
    convolve(&plan, a, b, window, &ConvOptions::default()).unwrap().table
}

fn weyl(a: &SequenceTable, c: &SequenceTable, window: &IndexBox) -> SequenceTable {
    convolve(&ConvPlan::weyl(1), a, c, window, &ConvOptions::default()).unwrap().table
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn scalar_products_commute(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = rand_factor(&mut rng, n, ValueKind::Scalar);
        let b = rand_factor(&mut rng, n, ValueKind::Scalar);
        let w = product_box(a.support(), b.support());
        let ab = gen(&a, &b, &w);
        let ba = gen(&b, &a, &w);
        prop_assert!(ab.max_abs_diff(&ba, &w) <= 1e-12);
    }

    #[test]
    fn products_associate(seed in any::<u64>(), n in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = rand_factor(&mut rng, n, ValueKind::Scalar);
        let b = rand_factor(&mut rng, n, ValueKind::Scalar);
        let c = rand_factor(&mut rng, n, ValueKind::Vector(2));
        let ab_box = product_box(a.support(), b.support());
        let bc_box = product_box(b.support(), c.support());
        let w = product_box(&ab_box, c.support());
        let left = gen(&gen(&a, &b, &ab_box), &c, &w);
        let right = gen(&a, &gen(&b, &c, &bc_box), &w);
        prop_assert!(left.max_abs_diff(&right, &w) <= 1e-12);
    }

    #[test]
    fn faltung_and_weyl_products_chain(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sa = rand_box(&mut rng, 1, 0..=3, 6);
        let a = rand_table(&mut rng, LatticeDomain::nonneg(1), sa, ValueKind::Scalar);
        let sb = rand_box(&mut rng, 1, 0..=3, 6);
        let b = rand_table(&mut rng, LatticeDomain::nonneg(1), sb, ValueKind::Scalar);
        let sc = rand_box(&mut rng, 1, -6..=6, 8);
        let c = rand_table(&mut rng, LatticeDomain::full(1), sc, ValueKind::Vector(2));
        let w = IndexBox::cube(1, -10, 40).unwrap();
        let ab = convolve(&ConvPlan::faltung(1), &a, &b, &w, &ConvOptions::default()).unwrap().table;
        let first = weyl(&ab, &c, &w);
        let second = weyl(&b, &weyl(&a, &c, &w), &w);
        let third = weyl(&a, &weyl(&b, &c, &w), &w);
        prop_assert!(first.max_abs_diff(&second, &w) <= 1e-10);
        prop_assert!(first.max_abs_diff(&third, &w) <= 1e-10);
    }

    #[test]
    fn matrix_products_commute_with_linear_maps(seed in any::<u64>(), n in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = rand_factor(&mut rng, n, ValueKind::Scalar);
        let b = rand_factor(&mut rng, n, ValueKind::Matrix(2));
        let l = rand_matrix(&mut rng, 2);
        // X -> L X on row-major 2x2 blocks
        let map = |x: &[Complex64]| -> Vec<Complex64> {
            (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| l[(i, 0)] * x[j] + l[(i, 1)] * x[2 + j]).collect()
        };
        let w = product_box(a.support(), b.support());
        let lhs = conv_general(&a, &b.map_values(ValueKind::Matrix(2), map).unwrap(), &w).unwrap();
        let rhs = conv_general(&a, &b, &w).unwrap().map_values(ValueKind::Matrix(2), map).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs, &w) <= 1e-12);
    }

    #[test]
    fn one_axis_products_obey_the_convolution_theorem(seed in any::<u64>(), n in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let axis = rng.random_range(0..n);
        let sa = rand_box(&mut rng, 1, -2..=2, 5);
        let a = rand_table(&mut rng, LatticeDomain::full(1), sa, ValueKind::Scalar);
        let sb = rand_box(&mut rng, n, -3..=3, 4);
        let b = rand_table(&mut rng, LatticeDomain::full(n), sb, ValueKind::Vector(2));
        let plan = ConvPlan::axes(LatticeDomain::full(1), LatticeDomain::full(n), vec![axis]).unwrap();
        let points: Vec<Vec<Complex64>> = (0..20).map(|_| rand_point(&mut rng, n, 0.8..1.25)).collect();
        let report = conv_theorem_check(&a, &b, &plan, &points).unwrap();
        prop_assert!(report.max_rel_deviation <= 1e-10);
    }
}

#[test]
fn delta_is_the_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let b = rand_table(&mut rng, LatticeDomain::full(2), IndexBox::cube(2, -2, 3).unwrap(), ValueKind::Vector(2));
    let d = delta(LatticeDomain::nonneg(2), &MultiIndex::zeros(2), ValueKind::Scalar, &[c(1.0, 0.0)]).unwrap();
    let out = convolve(&ConvPlan::weyl(2), &d, &b, b.support(), &ConvOptions::default()).unwrap().table;
    assert_eq!(out.values(), b.values());
    let points: Vec<Vec<Complex64>> = (0..5).map(|_| rand_point(&mut rng, 2, 0.9..1.1)).collect();
    let report = conv_theorem_check(&d, &b, &ConvPlan::weyl(2), &points).unwrap();
    assert_eq!(report.max_rel_deviation, 0.0);
}

#[test]
fn chain_holds_for_envelope_bounded_factors() {
    let a = cesaro(0.5, 300).unwrap().into_table();
    let b = cesaro(0.3, 300).unwrap().into_table();
    let c = gaussian_decay(&[2], 12, None, ValueKind::Vector(2), &[c(1.0, 0.0), c(0.0, -0.5)]).unwrap();
    let w = IndexBox::cube(1, -20, 20).unwrap();
    let opts = ConvOptions::recording();
    let ab = convolve(&ConvPlan::faltung(1), &a, &b, &IndexBox::cube(1, 0, 300).unwrap(), &opts).unwrap().table;
    let wide = IndexBox::cube(1, -20, 40).unwrap();
    let first = convolve(&ConvPlan::weyl(1), &ab, &c, &w, &opts).unwrap();
    let inner = convolve(&ConvPlan::weyl(1), &a, &c, &wide, &opts).unwrap().table;
    let second = convolve(&ConvPlan::weyl(1), &b, &inner, &w, &opts).unwrap();
    let dev = first.table.max_abs_diff(&second.table, &w);
    assert!(dev <= 1e-10 + first.max_tail() + second.max_tail(), "{dev}");
}
