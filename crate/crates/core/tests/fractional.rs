mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;
use zlattice::convolution::{convolve, ConvOptions, ConvPlan};
use zlattice::fractional::{cesaro, cesaro_values, forward_difference, weyl_am, WeylOperatorSpec};
use zlattice::generators::delta;
use zlattice::lattice::{IndexBox, LatticeDomain, MultiIndex};
use zlattice::sequence::{SequenceTable, ValueKind};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cesaro_kernels_form_a_semigroup(alpha in 0.0f64..2.5, beta in 0.0f64..2.5) {
        let last = 64;
        let prod = convolve(
            &ConvPlan::faltung(1),
            cesaro(alpha, last).unwrap().table(),
            cesaro(beta, last).unwrap().table(),
            &IndexBox::cube(1, 0, last as i64).unwrap(),
            &ConvOptions::default(),
        )
        .unwrap()
        .table;
        for (k, e) in cesaro_oracle(alpha + beta, last).iter().enumerate() {
            let got = prod.scalar_at(&[k as i64]);
            prop_assert!((got - e).norm() <= 1e-12 * e.abs().max(1e-300), "k = {}: {} vs {}", k, got, e);
        }
    }

    #[test]
    fn weyl_operators_are_linear(seed in any::<u64>(), alpha in 0.1f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = WeylOperatorSpec::fractional(alpha, 300).unwrap();
        let sf = rand_box(&mut rng, 1, -5..=5, 10);
        let f = rand_table(&mut rng, LatticeDomain::full(1), sf, ValueKind::Vector(2));
        let sg = rand_box(&mut rng, 1, -5..=5, 10);
        let g = rand_table(&mut rng, LatticeDomain::full(1), sg, ValueKind::Vector(2));
        let (x, y) = (rand_complex(&mut rng), rand_complex(&mut rng));
        let w = IndexBox::cube(1, -10, 20).unwrap();
        let opts = ConvOptions::default();
        let combo = SequenceTable::linear_combination(x, &f, y, &g).unwrap();
        let lhs = weyl_am(&spec, &combo, &w, &opts).unwrap().table;
        let rhs = SequenceTable::linear_combination(
            x,
            &weyl_am(&spec, &f, &w, &opts).unwrap().table,
            y,
            &weyl_am(&spec, &g, &w, &opts).unwrap().table,
        )
        .unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs, &w) <= 1e-12);
        let m = rng.random_range(0..=3);
        let lhs = forward_difference(&combo, m, &w).unwrap();
        let rhs = SequenceTable::linear_combination(
            x,
            &forward_difference(&f, m, &w).unwrap(),
            y,
            &forward_difference(&g, m, &w).unwrap(),
        )
        .unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs, &w) <= 1e-12);
    }
}

/// `k |c^alpha(k) / g_alpha(k) - 1|` maximised over `10 <= k <= 10^4`.
fn fitted_constant(alpha: f64) -> f64 {
    let values = cesaro_values(alpha, 10_000);
    (10..=10_000)
        .map(|k| {
            let g = (k as f64).powf(alpha - 1.0) / gamma(alpha);
            k as f64 * (values[k] / g - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn cesaro_numbers_follow_the_power_law() {
    for alpha in [0.1, 0.3, 0.5, 0.9, 1.0, 1.3, 1.7, 2.0, 2.5, 3.5] {
        let c = fitted_constant(alpha);
        let allowed = 2.0 * (alpha * (alpha - 1.0) / 2.0).abs() + 1.0;
        assert!(c <= allowed, "alpha = {alpha}: C = {c} > {allowed}");
    }
}

#[test]
fn low_order_kernels_are_exact() {
    assert!(cesaro_values(1.0, 500).iter().all(|&v| v == 1.0));
    for (k, v) in cesaro_values(2.0, 500).iter().enumerate() {
        assert_eq!(*v, (k + 1) as f64);
    }
    let c0 = cesaro_values(0.0, 10);
    assert_eq!(c0[0], 1.0);
    assert!(c0[1..].iter().all(|&v| v == 0.0));
}

#[test]
fn order_zero_difference_is_plain_convolution() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let u = rand_table(&mut rng, LatticeDomain::full(1), IndexBox::cube(1, -4, 6).unwrap(), ValueKind::Scalar);
    let kernel = cesaro(0.3, 400).unwrap();
    let w = IndexBox::cube(1, -30, 10).unwrap();
    let opts = ConvOptions::recording();
    let via_weyl = weyl_am(&WeylOperatorSpec::with_order(&kernel, 0).unwrap(), &u, &w, &opts).unwrap().table;
    let direct = convolve(&ConvPlan::weyl(1), kernel.table(), &u, &w, &opts).unwrap().table;
    assert_eq!(via_weyl.values(), direct.values());
}

#[test]
fn delta_data_gives_the_difference_polynomial() {
    // u = delta_0 and a = c^0 = delta_0: F = sum_j (-1)^{m-j} C(m, j) z^j
    let u = delta(LatticeDomain::full(1), &MultiIndex::zeros(1), ValueKind::Scalar, &[c(1.0, 0.0)]).unwrap();
    for m in 0..=3usize {
        let spec = WeylOperatorSpec::with_order(&cesaro(0.0, 8).unwrap(), m).unwrap();
        let w = IndexBox::cube(1, -(m as i64), 0).unwrap();
        let out = weyl_am(&spec, &u, &w, &ConvOptions::default()).unwrap().table;
        let z = c(1.7, -0.4);
        let poly: Complex64 = (0..=m)
            .map(|j| {
                let sign = if (m - j) % 2 == 0 { 1.0 } else { -1.0 };
                z.powi(j as i32) * (sign * binomial(m as u64, j as u64))
            })
            .sum();
        assert!((naive_transform(&out, &[z])[0] - poly).norm() < 1e-14, "m = {m}");
    }
}
