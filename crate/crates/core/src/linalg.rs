//! Small dense complex linear algebra helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub fn identity(m: usize) -> CMatrix {
    CMatrix::identity(m, m)
}

pub fn scalar_matrix(v: Complex64) -> CMatrix {
    CMatrix::from_element(1, 1, v)
}

/// Build an `m x m` matrix from row-major entries.
pub fn from_row_major(m: usize, entries: &[Complex64]) -> CMatrix {
    CMatrix::from_row_slice(m, m, entries)
}

pub fn to_row_major(a: &CMatrix) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.nrows() * a.ncols());
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            out.push(a[(i, j)]);
        }
    }
    out
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral norm (largest singular value).
pub fn norm2(a: &CMatrix) -> f64 {
    if a.nrows() == 1 && a.ncols() == 1 {
        return a[(0, 0)].norm();
    }
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().max()
}

/// Norm of a table entry: modulus, Euclidean norm or spectral norm depending on shape.
pub fn entry_norm(entries: &[Complex64], matrix_order: Option<usize>) -> f64 {
    match matrix_order {
        Some(m) if m > 1 => norm2(&from_row_major(m, entries)),
        _ => vec_norm(entries),
    }
}

/// Smallest and largest singular values.
pub fn singular_range(a: &CMatrix) -> (f64, f64) {
    if a.nrows() == 1 && a.ncols() == 1 {
        let v = a[(0, 0)].norm();
        return (v, v);
    }
    let s = a.singular_values();
    (s.min(), s.max())
}

/// Reciprocal 2-norm condition number.
pub fn rcond(a: &CMatrix) -> f64 {
    let (lo, hi) = singular_range(a);
    if hi == 0.0 || !hi.is_finite() {
        0.0
    } else {
        lo / hi
    }
}

/// Solution of `a x = rhs` together with the reciprocal condition number of `a`.
pub struct Solved {
    pub x: CMatrix,
    pub rcond: f64,
    pub inverse_norm: f64,
}

/// Solve `a x = rhs`, refusing when `rcond(a) < threshold`.
pub fn solve_checked(a: &CMatrix, rhs: &CMatrix, threshold: f64, z: &[Complex64]) -> Result<Solved> {
    let (lo, hi) = singular_range(a);
    let rc = if hi > 0.0 && hi.is_finite() { lo / hi } else { 0.0 };
    if !(rc >= threshold) {
        return Err(Error::SingularSymbol { z: z.to_vec(), rcond: rc });
    }
    let x = a
        .clone()
        .lu()
        .solve(rhs)
        .ok_or_else(|| Error::SingularSymbol { z: z.to_vec(), rcond: rc })?;
    Ok(Solved { x, rcond: rc, inverse_norm: 1.0 / lo })
}

/// `y = a x` with `x` given as a slice.
pub fn apply(a: &CMatrix, x: &[Complex64]) -> Vec<Complex64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum())
        .collect()
}

/// Compensated (Neumaier) complex accumulator. The result depends only on the
/// order in which terms are added.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
}

fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex64) {
        neumaier(&mut self.re, &mut self.re_c, z.re);
        neumaier(&mut self.im, &mut self.im_c, z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re + self.re_c, self.im + self.im_c)
    }
}
