//! Helpers shared by the integration tests: naive transform sums, direct
//! residuals and random tables. None of these call the library's own routines
//! for the quantity being checked.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use zlattice::lattice::{IndexBox, LatticeDomain, MultiIndex};
use zlattice::linalg::CMatrix;
use zlattice::sequence::{SequenceTable, ValueKind};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `sum_k f(k) z^{-k}` over the stored window, summed in storage order.
pub fn naive_transform(f: &SequenceTable, z: &[Complex64]) -> Vec<Complex64> {
    let e = f.kind().entries();
    let mut acc = vec![Complex64::ZERO; e];
    for (o, k) in f.support().iter().enumerate() {
        let mut w = c(1.0, 0.0);
        for (i, &ki) in k.coords().iter().enumerate() {
            w *= z[i].powi(-ki as i32);
        }
        for (s, v) in acc.iter_mut().zip(f.value_at_offset(o)) {
            *s += v * w;
        }
    }
    acc
}

/// Binomial coefficient as a float by the multiplicative formula.
pub fn binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// `c^gamma(k) = prod_{j=1}^k (j - 1 + gamma) / j`.
pub fn cesaro_oracle(gamma: f64, last: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(last + 1);
    let mut v = 1.0;
    out.push(v);
    for j in 1..=last {
        v *= (j as f64 - 1.0 + gamma) / j as f64;
        out.push(v);
    }
    out
}

pub fn rand_complex<R: Rng>(rng: &mut R) -> Complex64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn rand_matrix<R: Rng>(rng: &mut R, m: usize) -> CMatrix {
    CMatrix::from_fn(m, m, |_, _| rand_complex(rng))
}

pub fn rand_box<R: Rng>(rng: &mut R, n: usize, lo: std::ops::RangeInclusive<i64>, max_span: usize) -> IndexBox {
    let l: Vec<i64> = (0..n).map(|_| rng.random_range(lo.clone())).collect();
    let h: Vec<i64> = l.iter().map(|x| x + rng.random_range(0..max_span as i64)).collect();
    IndexBox::from_bounds(&l, &h).unwrap()
}

pub fn rand_table<R: Rng>(rng: &mut R, domain: LatticeDomain, support: IndexBox, kind: ValueKind) -> SequenceTable {
    SequenceTable::from_fn(domain, support, kind, None, |_| (0..kind.entries()).map(|_| rand_complex(rng)).collect())
        .unwrap()
}

/// `z_i = r_i e^{i theta_i}` with moduli drawn from `moduli`.
pub fn rand_point<R: Rng>(rng: &mut R, n: usize, moduli: std::ops::Range<f64>) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::from_polar(rng.random_range(moduli.clone()), rng.random_range(0.0..std::f64::consts::TAU)))
        .collect()
}

fn mat_vec(a: &CMatrix, x: &[Complex64]) -> Vec<Complex64> {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum()).collect()
}

/// `max_{k in check} |sum_j A_j u(k + j) - C f(k)|`, reading unstored `f` as zero.
pub fn pencil_residual(
    terms: &[(Vec<i64>, CMatrix)],
    cmat: &CMatrix,
    u: &SequenceTable,
    f: &SequenceTable,
    check: &IndexBox,
) -> f64 {
    let m = cmat.nrows();
    let mut worst: f64 = 0.0;
    for k in check.iter() {
        let mut r: Vec<Complex64> = mat_vec(cmat, &f.value_or_zero(&k)).into_iter().map(|x| -x).collect();
        for (j, a) in terms {
            let at: Vec<i64> = k.coords().iter().zip(j).map(|(x, y)| x + y).collect();
            let v = u.get_coords(&at).expect("u stored on the shifted check window");
            let v = if v.len() == m { v.to_vec() } else { panic!("state size mismatch") };
            for (s, y) in r.iter_mut().zip(mat_vec(a, &v)) {
                *s += y;
            }
        }
        worst = worst.max(norm(&r));
    }
    worst
}

/// Zero-initial-data recursion for `sum_{s=0}^{p} A_s u(k + s) = C f(k)`, `A_p = I`,
/// on `0..=last`.
pub fn forward_recursion(a: &[CMatrix], cmat: &CMatrix, f: &dyn Fn(i64) -> Vec<Complex64>, last: i64) -> Vec<Vec<Complex64>> {
    let p = a.len() - 1;
    let m = cmat.nrows();
    let mut u: Vec<Vec<Complex64>> = vec![vec![Complex64::ZERO; m]; p];
    for k in 0..=(last - p as i64) {
        let mut next = mat_vec(cmat, &f(k));
        for (s, a_s) in a.iter().enumerate().take(p) {
            for (x, y) in next.iter_mut().zip(mat_vec(a_s, &u[k as usize + s])) {
                *x -= y;
            }
        }
        u.push(next);
    }
    u
}

pub fn index(coords: &[i64]) -> MultiIndex {
    MultiIndex::new(coords.to_vec())
}
