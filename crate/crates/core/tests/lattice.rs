mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zlattice::document::{emit, ingest};
use zlattice::error::Error;
use zlattice::fractional::cesaro;
use zlattice::generators::{gaussian_decay, geometric};
use zlattice::lattice::{beta_shift, IndexBox, LatticeDomain, MultiIndex, Sign};
use zlattice::sequence::{SequenceTable, ValueKind};

fn rand_domain(rng: &mut ChaCha8Rng, n: usize) -> LatticeDomain {
    match rng.random_range(0..6) {
        0 => LatticeDomain::full(n),
        1 => LatticeDomain::nonneg(n),
        2 => LatticeDomain::orthant((0..n).map(|_| if rng.random_bool(0.5) { Sign::Plus } else { Sign::Minus }).collect()),
        3 => LatticeDomain::boxed(rand_box(rng, n, -3..=3, 4)),
        4 => {
            let offset: Vec<i64> = (0..n).map(|_| rng.random_range(-3..=3)).collect();
            LatticeDomain::shifted(LatticeDomain::nonpos(n), MultiIndex::new(offset)).unwrap()
        }
        _ => {
            let pts: Vec<MultiIndex> = (0..rng.random_range(1..=4))
                .map(|_| MultiIndex::new((0..n).map(|_| rng.random_range(-3..=3)).collect()))
                .collect();
            LatticeDomain::finite(n, pts).unwrap()
        }
    }
}

fn sample_box(n: usize) -> IndexBox {
    IndexBox::cube(n, -8, 8).unwrap()
}

fn same_points(a: &LatticeDomain, b: &LatticeDomain, n: usize) -> bool {
    sample_box(n).iter().all(|k| a.contains(&k) == b.contains(&k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn beta_shift_round_trip(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let domain = if rng.random_bool(0.5) { LatticeDomain::full(n) } else { LatticeDomain::nonneg(n) };
        let support = rand_box(&mut rng, n, 0..=4, 5);
        let f = rand_table(&mut rng, domain.clone(), support, ValueKind::Vector(2));
        let beta = MultiIndex::new((0..n).map(|_| rng.random_range(-3..=3)).collect());
        let back = beta_shift(&beta_shift(&f, &beta).unwrap(), &-&beta).unwrap();
        for k in f.support().iter() {
            if domain.contains(&(&k - &beta)) {
                prop_assert_eq!(back.value_or_zero(&k), f.value_or_zero(&k));
            }
        }
    }

    #[test]
    fn minkowski_sum_commutes_and_associates(seed in any::<u64>(), n in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (rand_domain(&mut rng, n), rand_domain(&mut rng, n), rand_domain(&mut rng, n));
        if let (Ok(ab), Ok(ba)) = (a.minkowski_sum(&b), b.minkowski_sum(&a)) {
            prop_assert!(same_points(&ab, &ba, n));
        }
        let left = a.minkowski_sum(&b).and_then(|ab| ab.minkowski_sum(&c));
        let right = b.minkowski_sum(&c).and_then(|bc| a.minkowski_sum(&bc));
        if let (Ok(l), Ok(r)) = (left, right) {
            prop_assert!(same_points(&l, &r, n));
        }
    }

    #[test]
    fn minkowski_sum_of_finite_sets_is_pairwise_sums(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pick = |rng: &mut ChaCha8Rng| loop {
            let d = rand_domain(rng, 2);
            if d.is_finite() {
                break d;
            }
        };
        let (a, b) = (pick(&mut rng), pick(&mut rng));
        let sum = a.minkowski_sum(&b).unwrap();
        let small = sample_box(2);
        for k in IndexBox::cube(2, -14, 14).unwrap().iter() {
            let brute = small.iter().any(|p| a.contains(&p) && b.contains(&(&k - &p)));
            prop_assert_eq!(sum.contains(&k), brute);
        }
    }

    #[test]
    fn generated_tables_respect_their_envelopes(seed in any::<u64>(), n in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = [rand_complex(&mut rng), rand_complex(&mut rng)];
        let ratio: Vec<Complex64> = (0..n).map(|_| rand_complex(&mut rng) * 0.9).collect();
        let center: Vec<i64> = (0..n).map(|_| rng.random_range(-3..=3)).collect();
        let tables = [
            geometric(&ratio, 12, ValueKind::Vector(2), &v).unwrap(),
            gaussian_decay(&center, 5, None, ValueKind::Vector(2), &v).unwrap(),
            cesaro(rng.random_range(0.0..3.0), 200).unwrap().into_table(),
        ];
        for f in &tables {
            let env = f.envelope().unwrap();
            for (o, k) in f.support().iter().enumerate() {
                let bound = k.coords().iter().enumerate().fold(env.bound(), |acc, (i, &ki)| {
                    acc * if ki >= 0 { env.rates()[i].powi(ki as i32) } else { env.negative_rate(i).powi(ki as i32) }
                });
                prop_assert!(norm(f.value_at_offset(o)) <= bound + 1e-12, "{:?} at {:?}", f.kind(), k);
            }
        }
    }
}

#[test]
fn document_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for kind in [ValueKind::Scalar, ValueKind::Vector(3), ValueKind::Matrix(2)] {
        let f = rand_table(&mut rng, LatticeDomain::nonneg(2), IndexBox::cube(2, 0, 3).unwrap(), kind);
        let text = emit(&f);
        let back = ingest(&text).unwrap();
        assert_eq!(back.kind(), kind);
        assert_eq!(back.values(), f.values());
        assert_eq!(emit(&back), text);
    }
}

#[test]
fn matrix_documents_keep_their_blocks() {
    let doc = r#"{"n":1,"value_kind":"matrix","m":2,"domain":{"kind":"full","params":{}},
        "support_lo":[0],"support_hi":[1],
        "values":[[1,0],[2,0],[3,0],[4,0],[5,0],[6,0],[7,0],[8,0]],"envelope":null}"#;
    let f = ingest(doc).unwrap();
    assert_eq!(f.kind(), ValueKind::Matrix(2));
    assert_eq!(f.get_coords(&[1]).unwrap(), &[c(5.0, 0.0), c(6.0, 0.0), c(7.0, 0.0), c(8.0, 0.0)]);
}

#[test]
fn documents_with_wrong_length_are_rejected() {
    let doc = r#"{"n":1,"value_kind":"scalar","domain":{"kind":"full","params":{}},
        "support_lo":[0],"support_hi":[2],"values":[[1,0],[2,0]],"envelope":null}"#;
    assert!(matches!(ingest(doc), Err(Error::LengthMismatch { .. })));
}

#[test]
fn values_outside_the_domain_are_rejected() {
    let support = IndexBox::cube(1, -1, 1).unwrap();
    let values = vec![c(1.0, 0.0); 3];
    let err = SequenceTable::new(LatticeDomain::nonneg(1), support, ValueKind::Scalar, values, None).unwrap_err();
    assert!(matches!(err, Error::SupportOutsideDomain { .. }));
}
