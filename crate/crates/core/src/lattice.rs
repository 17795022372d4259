//! Integer lattice points, index boxes and the lattice domains sequences live on.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the integer lattice. Ordered lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<i64>);

impl MultiIndex {
    pub fn new(coords: Vec<i64>) -> Self {
        MultiIndex(coords)
    }

    pub fn zeros(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn splat(n: usize, v: i64) -> Self {
        MultiIndex(vec![v; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<i64> {
        self.0
    }

    pub fn checked_add(&self, other: &MultiIndex) -> Result<MultiIndex> {
        Error::check_dim(self.dim(), other.dim())?;
        Ok(MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    pub fn checked_sub(&self, other: &MultiIndex) -> Result<MultiIndex> {
        Error::check_dim(self.dim(), other.dim())?;
        Ok(MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    /// Componentwise partial order.
    pub fn le_all(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Coordinates restricted to the given axes, in that order.
    pub fn select(&self, axes: &[usize]) -> MultiIndex {
        MultiIndex(axes.iter().map(|&a| self.0[a]).collect())
    }
}

impl From<Vec<i64>> for MultiIndex {
    fn from(v: Vec<i64>) -> Self {
        MultiIndex(v)
    }
}

impl From<&[i64]> for MultiIndex {
    fn from(v: &[i64]) -> Self {
        MultiIndex(v.to_vec())
    }
}

impl std::ops::Index<usize> for MultiIndex {
    type Output = i64;
    fn index(&self, i: usize) -> &i64 {
        &self.0[i]
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Add for &MultiIndex {
    type Output = MultiIndex;
    fn add(self, rhs: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dim(), rhs.dim(), "multi-index dimension mismatch");
        MultiIndex(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &MultiIndex {
    type Output = MultiIndex;
    fn sub(self, rhs: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dim(), rhs.dim(), "multi-index dimension mismatch");
        MultiIndex(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &MultiIndex {
    type Output = MultiIndex;
    fn neg(self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|a| -a).collect())
    }
}

/// A closed integer interval, possibly unbounded on either side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AxisInterval {
    pub lo: Option<i64>,
    pub hi: Option<i64>,
}

impl AxisInterval {
    pub const FULL: AxisInterval = AxisInterval { lo: None, hi: None };

    pub fn finite(lo: i64, hi: i64) -> Self {
        AxisInterval { lo: Some(lo), hi: Some(hi) }
    }

    pub fn contains(&self, k: i64) -> bool {
        self.lo.is_none_or(|lo| k >= lo) && self.hi.is_none_or(|hi| k <= hi)
    }

    pub fn is_empty(&self) -> bool {
        matches!((self.lo, self.hi), (Some(lo), Some(hi)) if lo > hi)
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_some() && self.hi.is_some()
    }

    pub fn intersect(&self, other: &AxisInterval) -> AxisInterval {
        let lo = match (self.lo, other.lo) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, None) => a,
            (None, b) => b,
        };
        let hi = match (self.hi, other.hi) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, None) => a,
            (None, b) => b,
        };
        AxisInterval { lo, hi }
    }

    pub fn shift(&self, by: i64) -> AxisInterval {
        AxisInterval { lo: self.lo.map(|v| v + by), hi: self.hi.map(|v| v + by) }
    }

    /// `{k - x : x in self}`.
    pub fn reflect_from(&self, k: i64) -> AxisInterval {
        AxisInterval { lo: self.hi.map(|h| k - h), hi: self.lo.map(|l| k - l) }
    }

    pub fn minkowski(&self, other: &AxisInterval) -> AxisInterval {
        AxisInterval {
            lo: self.lo.zip(other.lo).map(|(a, b)| a + b),
            hi: self.hi.zip(other.hi).map(|(a, b)| a + b),
        }
    }
}

/// Half-line direction of an orthant axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn interval(self) -> AxisInterval {
        match self {
            Sign::Plus => AxisInterval { lo: Some(0), hi: None },
            Sign::Minus => AxisInterval { lo: None, hi: Some(0) },
        }
    }
}

/// A finite box of lattice points `lo <= k <= hi`, iterated in row-major order
/// (last axis fastest).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexBox {
    lo: MultiIndex,
    hi: MultiIndex,
}

impl IndexBox {
    pub fn new(lo: MultiIndex, hi: MultiIndex) -> Result<Self> {
        Error::check_dim(lo.dim(), hi.dim())?;
        if !lo.le_all(&hi) {
            return Err(Error::InvalidBox { lo: lo.into_vec(), hi: hi.into_vec() });
        }
        Ok(IndexBox { lo, hi })
    }

    pub fn from_bounds(lo: &[i64], hi: &[i64]) -> Result<Self> {
        Self::new(MultiIndex::from(lo), MultiIndex::from(hi))
    }

    /// The cube `[lo, hi]^n`.
    pub fn cube(n: usize, lo: i64, hi: i64) -> Result<Self> {
        Self::new(MultiIndex::splat(n, lo), MultiIndex::splat(n, hi))
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn lo(&self) -> &MultiIndex {
        &self.lo
    }

    pub fn hi(&self) -> &MultiIndex {
        &self.hi
    }

    pub fn span(&self, axis: usize) -> usize {
        (self.hi[axis] - self.lo[axis] + 1) as usize
    }

    pub fn spans(&self) -> Vec<usize> {
        (0..self.dim()).map(|i| self.span(i)).collect()
    }

    pub fn len(&self) -> usize {
        (0..self.dim()).map(|i| self.span(i)).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn axis(&self, axis: usize) -> AxisInterval {
        AxisInterval::finite(self.lo[axis], self.hi[axis])
    }

    pub fn intervals(&self) -> Vec<AxisInterval> {
        (0..self.dim()).map(|i| self.axis(i)).collect()
    }

    pub fn contains(&self, k: &MultiIndex) -> bool {
        k.dim() == self.dim()
            && k.coords().iter().enumerate().all(|(i, &c)| c >= self.lo[i] && c <= self.hi[i])
    }

    /// Row-major offset of `k`, or `None` when `k` lies outside the box.
    pub fn offset(&self, k: &MultiIndex) -> Option<usize> {
        self.offset_of(k.coords())
    }

    pub fn offset_of(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dim() {
            return None;
        }
        let mut off = 0usize;
        for (i, &c) in k.iter().enumerate() {
            if c < self.lo[i] || c > self.hi[i] {
                return None;
            }
            off = off * self.span(i) + (c - self.lo[i]) as usize;
        }
        Some(off)
    }

    pub fn index_at(&self, mut offset: usize) -> MultiIndex {
        let n = self.dim();
        let mut coords = vec![0i64; n];
        for i in (0..n).rev() {
            let s = self.span(i);
            coords[i] = self.lo[i] + (offset % s) as i64;
            offset /= s;
        }
        MultiIndex(coords)
    }

    pub fn iter(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        (0..self.len()).map(move |o| self.index_at(o))
    }

    pub fn intersect(&self, other: &IndexBox) -> Option<IndexBox> {
        if self.dim() != other.dim() {
            return None;
        }
        let lo: Vec<i64> = (0..self.dim()).map(|i| self.lo[i].max(other.lo[i])).collect();
        let hi: Vec<i64> = (0..self.dim()).map(|i| self.hi[i].min(other.hi[i])).collect();
        IndexBox::new(lo.into(), hi.into()).ok()
    }

    pub fn translate(&self, by: &MultiIndex) -> IndexBox {
        IndexBox { lo: &self.lo + by, hi: &self.hi + by }
    }

    pub fn minkowski(&self, other: &IndexBox) -> IndexBox {
        IndexBox { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    /// Smallest box containing both.
    pub fn hull(&self, other: &IndexBox) -> IndexBox {
        let lo: Vec<i64> = (0..self.dim()).map(|i| self.lo[i].min(other.lo[i])).collect();
        let hi: Vec<i64> = (0..self.dim()).map(|i| self.hi[i].max(other.hi[i])).collect();
        IndexBox { lo: lo.into(), hi: hi.into() }
    }

    /// Grow every axis by `lo_pad` below and `hi_pad` above.
    pub fn expand(&self, lo_pad: &[i64], hi_pad: &[i64]) -> Result<IndexBox> {
        let lo: Vec<i64> = (0..self.dim()).map(|i| self.lo[i] - lo_pad[i]).collect();
        let hi: Vec<i64> = (0..self.dim()).map(|i| self.hi[i] + hi_pad[i]).collect();
        IndexBox::new(lo.into(), hi.into())
    }

    pub fn from_intervals(ivs: &[AxisInterval]) -> Option<IndexBox> {
        let mut lo = Vec::with_capacity(ivs.len());
        let mut hi = Vec::with_capacity(ivs.len());
        for iv in ivs {
            lo.push(iv.lo?);
            hi.push(iv.hi?);
        }
        IndexBox::new(lo.into(), hi.into()).ok()
    }
}

impl fmt::Display for IndexBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} .. {}]", self.lo, self.hi)
    }
}

/// Subset of the integer lattice on which a sequence is defined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LatticeDomain {
    Full { dim: usize },
    Orthant { signs: Vec<Sign> },
    Box(IndexBox),
    Shifted { base: Box<LatticeDomain>, offset: MultiIndex },
    FiniteSet { dim: usize, points: BTreeSet<MultiIndex> },
}

impl LatticeDomain {
    pub fn full(n: usize) -> Self {
        LatticeDomain::Full { dim: n }
    }

    /// The non-negative orthant.
    pub fn nonneg(n: usize) -> Self {
        LatticeDomain::Orthant { signs: vec![Sign::Plus; n] }
    }

    pub fn nonpos(n: usize) -> Self {
        LatticeDomain::Orthant { signs: vec![Sign::Minus; n] }
    }

    pub fn orthant(signs: Vec<Sign>) -> Self {
        LatticeDomain::Orthant { signs }
    }

    pub fn boxed(b: IndexBox) -> Self {
        LatticeDomain::Box(b)
    }

    pub fn shifted(base: LatticeDomain, offset: MultiIndex) -> Result<Self> {
        Error::check_dim(base.dim(), offset.dim())?;
        Ok(LatticeDomain::Shifted { base: Box::new(base), offset })
    }

    pub fn finite<I: IntoIterator<Item = MultiIndex>>(dim: usize, points: I) -> Result<Self> {
        let points: BTreeSet<MultiIndex> = points.into_iter().collect();
        for p in &points {
            Error::check_dim(dim, p.dim())?;
        }
        Ok(LatticeDomain::FiniteSet { dim, points })
    }

    pub fn dim(&self) -> usize {
        match self {
            LatticeDomain::Full { dim } => *dim,
            LatticeDomain::Orthant { signs } => signs.len(),
            LatticeDomain::Box(b) => b.dim(),
            LatticeDomain::Shifted { base, .. } => base.dim(),
            LatticeDomain::FiniteSet { dim, .. } => *dim,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            LatticeDomain::Full { .. } => "full",
            LatticeDomain::Orthant { .. } => "orthant",
            LatticeDomain::Box(_) => "box",
            LatticeDomain::Shifted { .. } => "shifted",
            LatticeDomain::FiniteSet { .. } => "finite",
        }
    }

    pub fn membership(&self, k: &MultiIndex) -> Result<bool> {
        Error::check_dim(self.dim(), k.dim())?;
        Ok(self.contains(k))
    }

    /// Membership test; a point of the wrong dimension is never a member.
    pub fn contains(&self, k: &MultiIndex) -> bool {
        if k.dim() != self.dim() {
            return false;
        }
        match self {
            LatticeDomain::Full { .. } => true,
            LatticeDomain::Orthant { signs } => signs.iter().zip(k.coords()).all(|(s, &c)| match s {
                Sign::Plus => c >= 0,
                Sign::Minus => c <= 0,
            }),
            LatticeDomain::Box(b) => b.contains(k),
            LatticeDomain::Shifted { base, offset } => base.contains(&(k - offset)),
            LatticeDomain::FiniteSet { points, .. } => points.contains(k),
        }
    }

    /// Per-axis intervals when the domain is a product of intervals.
    pub fn axis_intervals(&self) -> Option<Vec<AxisInterval>> {
        match self {
            LatticeDomain::Full { dim } => Some(vec![AxisInterval::FULL; *dim]),
            LatticeDomain::Orthant { signs } => Some(signs.iter().map(|s| s.interval()).collect()),
            LatticeDomain::Box(b) => Some(b.intervals()),
            LatticeDomain::Shifted { base, offset } => base
                .axis_intervals()
                .map(|ivs| ivs.iter().enumerate().map(|(i, iv)| iv.shift(offset[i])).collect()),
            LatticeDomain::FiniteSet { .. } => None,
        }
    }

    /// Per-axis intervals of the smallest product set containing the domain.
    pub fn bounding_intervals(&self) -> Vec<AxisInterval> {
        if let Some(ivs) = self.axis_intervals() {
            return ivs;
        }
        let n = self.dim();
        match self.finite_points() {
            Some(pts) if !pts.is_empty() => (0..n)
                .map(|i| {
                    let lo = pts.iter().map(|p| p[i]).min().unwrap();
                    let hi = pts.iter().map(|p| p[i]).max().unwrap();
                    AxisInterval::finite(lo, hi)
                })
                .collect(),
            _ => vec![AxisInterval { lo: Some(1), hi: Some(0) }; n],
        }
    }

    pub fn is_product(&self) -> bool {
        self.axis_intervals().is_some()
    }

    /// All points of a finite domain in lexicographic order.
    pub fn finite_points(&self) -> Option<Vec<MultiIndex>> {
        match self {
            LatticeDomain::FiniteSet { points, .. } => Some(points.iter().cloned().collect()),
            LatticeDomain::Box(b) => Some(b.iter().collect()),
            LatticeDomain::Shifted { base, offset } => base
                .finite_points()
                .map(|pts| pts.iter().map(|p| p + offset).collect()),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            LatticeDomain::FiniteSet { .. } | LatticeDomain::Box(_) => true,
            LatticeDomain::Shifted { base, .. } => base.is_finite(),
            _ => false,
        }
    }

    /// Rebuild a domain from per-axis intervals, if one of the product kinds fits.
    pub fn from_intervals(ivs: &[AxisInterval]) -> Option<LatticeDomain> {
        let n = ivs.len();
        if ivs.iter().any(|iv| iv.is_empty()) {
            return None;
        }
        if ivs.iter().all(|iv| iv.lo.is_none() && iv.hi.is_none()) {
            return Some(LatticeDomain::full(n));
        }
        if let Some(b) = IndexBox::from_intervals(ivs) {
            return Some(LatticeDomain::Box(b));
        }
        let mut signs = Vec::with_capacity(n);
        let mut corner = Vec::with_capacity(n);
        for iv in ivs {
            match (iv.lo, iv.hi) {
                (Some(lo), None) => {
                    signs.push(Sign::Plus);
                    corner.push(lo);
                }
                (None, Some(hi)) => {
                    signs.push(Sign::Minus);
                    corner.push(hi);
                }
                _ => return None,
            }
        }
        let orthant = LatticeDomain::Orthant { signs };
        if corner.iter().all(|&c| c == 0) {
            Some(orthant)
        } else {
            Some(LatticeDomain::Shifted { base: Box::new(orthant), offset: corner.into() })
        }
    }

    /// `{a + b : a in self, b in other}`.
    pub fn minkowski_sum(&self, other: &LatticeDomain) -> Result<LatticeDomain> {
        Error::check_dim(self.dim(), other.dim())?;
        let unrepresentable = || Error::UnrepresentableSum {
            left: self.kind_name().to_string(),
            right: other.kind_name().to_string(),
        };
        if let (Some(a), Some(b)) = (self.axis_intervals(), other.axis_intervals()) {
            let sum: Vec<AxisInterval> = a.iter().zip(&b).map(|(x, y)| x.minkowski(y)).collect();
            return LatticeDomain::from_intervals(&sum).ok_or_else(unrepresentable);
        }
        if let (Some(a), Some(b)) = (self.finite_points(), other.finite_points()) {
            let pts = a.iter().flat_map(|p| b.iter().map(move |q| p + q));
            return LatticeDomain::finite(self.dim(), pts);
        }
        // A single point just translates the other set.
        for (single, rest) in [(self, other), (other, self)] {
            if let Some(pts) = single.finite_points() {
                if pts.len() == 1 {
                    if let Some(ivs) = rest.axis_intervals() {
                        let shifted: Vec<AxisInterval> =
                            ivs.iter().enumerate().map(|(i, iv)| iv.shift(pts[0][i])).collect();
                        return LatticeDomain::from_intervals(&shifted).ok_or_else(unrepresentable);
                    }
                }
            }
        }
        Err(unrepresentable())
    }

    /// `k + D ⊆ D`, checked for the kinds where this is decidable exactly.
    pub fn shift_preserves(&self, k: &MultiIndex) -> bool {
        match self.axis_intervals() {
            Some(ivs) => ivs.iter().enumerate().all(|(i, iv)| {
                let s = iv.shift(k[i]);
                (iv.lo.is_none() || s.lo.is_some_and(|lo| lo >= iv.lo.unwrap()))
                    && (iv.hi.is_none() || s.hi.is_some_and(|hi| hi <= iv.hi.unwrap()))
            }),
            None => self
                .finite_points()
                .map(|pts| pts.iter().all(|p| self.contains(&(p + k))))
                .unwrap_or(false),
        }
    }

    /// Domain restricted to the given axes (product kinds only).
    pub fn project(&self, axes: &[usize]) -> Option<LatticeDomain> {
        let ivs = self.axis_intervals()?;
        let sel: Vec<AxisInterval> = axes.iter().map(|&a| ivs[a]).collect();
        LatticeDomain::from_intervals(&sel)
    }
}

/// Shift `f` by `beta`: `g(k) = f(k + beta)` when `k + beta` lies in the domain of `f`,
/// zero otherwise. The support box moves by `-beta`.
pub fn beta_shift(f: &crate::sequence::SequenceTable, beta: &MultiIndex) -> Result<crate::sequence::SequenceTable> {
    f.beta_shift(beta)
}
