//! Point sets, blocks, family generators, and truncation.

use crate::expr::{Bindings, EvalError, Expr};
use crate::exponent::Exponent;
use crate::scalar::{c, Scalar};
use crate::sum::Accumulator;

use super::function::SpaceFn;
use super::region::{NonAtomicRegion, RegionError};

/// Cap on materialized point counts; larger truncations must use the
/// streaming evaluation paths.
pub const MAX_MATERIALIZED_POINTS: usize = 2_000_000;

/// One atom of the full sigma-algebra: a weighted labeled point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<T> {
    pub label: T,
    pub weight: T,
}

/// Identity of a block within the declared space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BlockKey {
    /// Block `n` (1-based) of family `family` (declaration order).
    Family { family: usize, n: u64 },
    /// Explicitly listed block, by declaration index.
    Explicit { index: usize },
}

impl std::fmt::Display for BlockKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BlockKey::Family { family, n } => write!(f, "family{family}[{n}]"),
            BlockKey::Explicit { index } => write!(f, "explicit[{index}]"),
        }
    }
}

/// A materialized block: a contiguous run of points plus its measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Block<T> {
    pub key: BlockKey,
    pub start: usize,
    pub len: usize,
    pub measure: T,
}

impl<T> Block<T> {
    pub fn point_range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// A finite measure space: points grouped into blocks, plus an optional
/// non-atomic region. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpace<T> {
    points: Vec<Point<T>>,
    blocks: Vec<Block<T>>,
    point_block: Vec<usize>,
    region: Option<NonAtomicRegion<T>>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuildError {
    #[error("{context}: weight {value} is not positive and finite")]
    NonpositiveWeight { context: String, value: f64 },
    #[error("{context}: value is not finite")]
    NonFinite { context: String },
    #[error("duplicate point label {label}")]
    DuplicateLabel { label: f64 },
    #[error("{context}: block has no points")]
    EmptyBlock { context: String },
    #[error("family `{family}`, block {n}: points-per-block evaluated to {value}, need a positive integer")]
    InvalidPointCount { family: String, n: u64, value: f64 },
    #[error("{context}: {source}")]
    Eval { context: String, source: EvalError },
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error("truncation materializes {points} points, cap is {cap}")]
    TooManyPoints { points: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NormError {
    #[error("norm overflowed to a non-finite value")]
    Overflow,
}

/// Incremental constructor for [`FiniteSpace`].
#[derive(Debug)]
pub struct SpaceBuilder<T> {
    points: Vec<Point<T>>,
    blocks: Vec<Block<T>>,
    point_block: Vec<usize>,
    region: Option<NonAtomicRegion<T>>,
}

impl<T: Scalar> Default for SpaceBuilder<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> SpaceBuilder<T> {
    pub fn new() -> Self {
        Self { points: Vec::new(), blocks: Vec::new(), point_block: Vec::new(), region: None }
    }

    pub fn add_block(
        &mut self,
        key: BlockKey,
        pts: impl IntoIterator<Item = (T, T)>,
    ) -> Result<&mut Self, BuildError> {
        let start = self.points.len();
        let block_index = self.blocks.len();
        let mut measure = Accumulator::new();
        for (label, weight) in pts {
            if !label.is_finite() {
                return Err(BuildError::NonFinite { context: format!("{key}: point label") });
            }
            if !(weight > T::zero()) || !weight.is_finite() {
                return Err(BuildError::NonpositiveWeight {
                    context: key.to_string(),
                    value: weight.to_f64().unwrap_or(f64::NAN),
                });
            }
            self.points.push(Point { label, weight });
            self.point_block.push(block_index);
            measure.add(weight);
        }
        let len = self.points.len() - start;
        if len == 0 {
            return Err(BuildError::EmptyBlock { context: key.to_string() });
        }
        if self.points.len() > MAX_MATERIALIZED_POINTS {
            return Err(BuildError::TooManyPoints {
                points: self.points.len(),
                cap: MAX_MATERIALIZED_POINTS,
            });
        }
        self.blocks.push(Block { key, start, len, measure: measure.value() });
        Ok(self)
    }

    pub fn with_region(&mut self, region: NonAtomicRegion<T>) -> &mut Self {
        self.region = Some(region);
        self
    }

    pub fn finish(self) -> Result<FiniteSpace<T>, BuildError> {
        // labels must be distinct across the whole space
        let mut order: Vec<usize> = (0..self.points.len()).collect();
        order.sort_by(|&a, &b| {
            self.points[a].label.partial_cmp(&self.points[b].label).expect("finite labels")
        });
        for w in order.windows(2) {
            if self.points[w[0]].label == self.points[w[1]].label {
                return Err(BuildError::DuplicateLabel {
                    label: self.points[w[0]].label.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(FiniteSpace {
            points: self.points,
            blocks: self.blocks,
            point_block: self.point_block,
            region: self.region,
        })
    }
}

impl<T: Scalar> FiniteSpace<T> {
    pub fn points(&self) -> &[Point<T>] {
        &self.points
    }

    pub fn blocks(&self) -> &[Block<T>] {
        &self.blocks
    }

    pub fn region(&self) -> Option<&NonAtomicRegion<T>> {
        self.region.as_ref()
    }

    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_of_point(&self, point: usize) -> usize {
        self.point_block[point]
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && self.region.is_none()
    }

    /// Total measure of the atomic part.
    pub fn atomic_measure(&self) -> T {
        let mut acc = Accumulator::new();
        for b in &self.blocks {
            acc.add(b.measure);
        }
        acc.value()
    }

    /// Integral of `f` over the whole space (points plus region).
    pub fn integrate(&self, f: &SpaceFn<T>) -> T {
        f.check_matches(self);
        let mut acc = Accumulator::new();
        for (p, &v) in self.points.iter().zip(f.point_values()) {
            acc.add(v * p.weight);
        }
        let mut total = acc.value();
        if let (Some(region), Some(rf)) = (&self.region, f.region_part()) {
            total = total + rf.integrate(region);
        }
        total
    }

    /// Integral of `f` over one block.
    pub fn integrate_block(&self, f: &SpaceFn<T>, block: usize) -> T {
        f.check_matches(self);
        let b = &self.blocks[block];
        let mut acc = Accumulator::new();
        for i in b.point_range() {
            acc.add(f.point_values()[i] * self.points[i].weight);
        }
        acc.value()
    }

    /// Integral of `f` over an arbitrary set of points.
    pub fn integrate_points(&self, f: &SpaceFn<T>, ids: &[usize]) -> T {
        f.check_matches(self);
        let mut acc = Accumulator::new();
        for &i in ids {
            acc.add(f.point_values()[i] * self.points[i].weight);
        }
        acc.value()
    }

    /// `(integral of |f|^p)^(1/p)`, or the max of `|f|` for `p = inf`.
    pub fn lp_norm(&self, f: &SpaceFn<T>, e: Exponent<T>) -> Result<T, NormError> {
        f.check_matches(self);
        match e {
            Exponent::Infinity => {
                let mut m = f.point_values().iter().fold(T::zero(), |m, &v| m.max(v.abs()));
                if let Some(rf) = f.region_part() {
                    m = m.max(rf.max_abs());
                }
                Ok(m)
            }
            Exponent::Finite(p) => {
                let mut acc = Accumulator::new();
                for (pt, &v) in self.points.iter().zip(f.point_values()) {
                    acc.add(crate::scalar::abs_pow(v, p) * pt.weight);
                }
                let mut total = acc.value();
                if let (Some(region), Some(rf)) = (&self.region, f.region_part()) {
                    total = total + rf.abs_pow_integral(region, p);
                }
                let norm = total.powf(T::one() / p);
                if norm.is_finite() {
                    Ok(norm)
                } else {
                    Err(NormError::Overflow)
                }
            }
        }
    }
}

/// How many blocks a family declares.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockCount {
    Finite(u64),
    Infinite,
}

/// Generator for a (possibly infinite) sequence of blocks.
///
/// Block `n` (1-based) has `points_per_block(n)` points; point `j`
/// (0-based) has label `label(n, j)` and weight `weight(n, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomFamily<T> {
    pub name: String,
    pub count: BlockCount,
    pub points_per_block: Expr<T>,
    pub label: Expr<T>,
    pub weight: Expr<T>,
}

impl<T: Scalar> AtomFamily<T> {
    /// Evaluate and validate the number of points in block `n`.
    pub fn points_in_block(&self, n: u64) -> Result<u64, BuildError> {
        let nv = c(n as f64);
        let v = self
            .points_per_block
            .eval(&Bindings::of_n(nv))
            .map_err(|source| BuildError::Eval {
                context: format!("family `{}`, block {n}: points-per-block", self.name),
                source,
            })?;
        let vf = v.to_f64().unwrap_or(f64::NAN);
        if !vf.is_finite() || vf < 1.0 || vf.fract() != 0.0 || vf > 1e12 {
            return Err(BuildError::InvalidPointCount { family: self.name.clone(), n, value: vf });
        }
        Ok(vf as u64)
    }

    /// Label and weight of point `j` of block `n`.
    #[inline]
    pub fn point(&self, n: u64, j: u64) -> Result<(T, T), BuildError> {
        let b = Bindings::of_nj(c(n as f64), c(j as f64));
        let label = self.label.eval(&b).map_err(|source| BuildError::Eval {
            context: format!("family `{}`, block {n}, point {j}: label", self.name),
            source,
        })?;
        let weight = self.weight.eval(&b).map_err(|source| BuildError::Eval {
            context: format!("family `{}`, block {n}, point {j}: weight", self.name),
            source,
        })?;
        if !(weight > T::zero()) || !weight.is_finite() {
            return Err(BuildError::NonpositiveWeight {
                context: format!("family `{}`, block {n}, point {j}", self.name),
                value: weight.to_f64().unwrap_or(f64::NAN),
            });
        }
        if !label.is_finite() {
            return Err(BuildError::NonFinite {
                context: format!("family `{}`, block {n}, point {j}: label", self.name),
            });
        }
        Ok((label, weight))
    }
}

/// An explicitly listed block of `(label, weight)` points.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitBlock<T> {
    pub points: Vec<(T, T)>,
}

/// Declarative description of a sigma-finite space: family generators,
/// explicit blocks, and an optional non-atomic region.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpace<T> {
    pub families: Vec<AtomFamily<T>>,
    pub explicit: Vec<ExplicitBlock<T>>,
    pub region: Option<NonAtomicRegion<T>>,
}

/// Finite window into a declared space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truncation {
    /// At most this many leading blocks of each family.
    pub blocks_per_family: u64,
    /// Region refinement level (the declared level acts as a floor).
    pub region_level: u32,
}

impl Truncation {
    pub fn new(blocks_per_family: u64, region_level: u32) -> Self {
        Self { blocks_per_family, region_level }
    }
}

impl<T: Scalar> MeasureSpace<T> {
    pub fn purely_atomic(families: Vec<AtomFamily<T>>, explicit: Vec<ExplicitBlock<T>>) -> Self {
        Self { families, explicit, region: None }
    }

    pub fn has_infinite_family(&self) -> bool {
        self.families.iter().any(|f| f.count == BlockCount::Infinite)
    }

    /// Blocks of family `fi` visible under a per-family cap of `limit`.
    pub fn family_blocks_within(&self, fi: usize, limit: u64) -> u64 {
        match self.families[fi].count {
            BlockCount::Finite(k) => k.min(limit),
            BlockCount::Infinite => limit,
        }
    }

    /// Materialize the first `N` blocks of each family, all explicit
    /// blocks, and the region at the requested level. Truncations that
    /// already cover a finite space reproduce it identically.
    pub fn truncate(&self, t: &Truncation) -> Result<FiniteSpace<T>, BuildError> {
        let mut builder = SpaceBuilder::new();
        for (fi, family) in self.families.iter().enumerate() {
            let count = self.family_blocks_within(fi, t.blocks_per_family);
            for n in 1..=count {
                let ppb = family.points_in_block(n)?;
                let pts: Result<Vec<(T, T)>, BuildError> =
                    (0..ppb).map(|j| family.point(n, j)).collect();
                builder.add_block(BlockKey::Family { family: fi, n }, pts?)?;
            }
        }
        for (i, block) in self.explicit.iter().enumerate() {
            builder.add_block(BlockKey::Explicit { index: i }, block.points.iter().copied())?;
        }
        if let Some(region) = &self.region {
            let level = region.level().max(t.region_level);
            builder.with_region(region.at_level(level)?);
        }
        builder.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn staircase_families() -> Vec<AtomFamily<f64>> {
        vec![
            AtomFamily {
                name: "evens".into(),
                count: BlockCount::Infinite,
                points_per_block: parse("n").unwrap(),
                label: parse("2*(k(n)+j)").unwrap(),
                weight: parse("1").unwrap(),
            },
            AtomFamily {
                name: "odds".into(),
                count: BlockCount::Infinite,
                points_per_block: parse("1").unwrap(),
                label: parse("2*n-1").unwrap(),
                weight: parse("1").unwrap(),
            },
        ]
    }

    #[test]
    fn staircase_truncation_matches_hand_blocks() {
        let space = MeasureSpace::purely_atomic(staircase_families(), vec![]);
        let fin = space.truncate(&Truncation::new(3, 0)).unwrap();
        let labels: Vec<Vec<f64>> = fin
            .blocks()
            .iter()
            .map(|b| b.point_range().map(|i| fin.points()[i].label).collect())
            .collect();
        assert_eq!(
            labels,
            vec![
                vec![2.0],
                vec![4.0, 6.0],
                vec![8.0, 10.0, 12.0],
                vec![1.0],
                vec![3.0],
                vec![5.0],
            ]
        );
        // mu(A_n) = n for the even family
        assert_eq!(fin.blocks()[0].measure, 1.0);
        assert_eq!(fin.blocks()[1].measure, 2.0);
        assert_eq!(fin.blocks()[2].measure, 3.0);
    }

    #[test]
    fn block_start_indices() {
        // k_n = 1 + n(n-1)/2 gives block starts 2*k_n
        let space = MeasureSpace::purely_atomic(staircase_families(), vec![]);
        let fin = space.truncate(&Truncation::new(4, 0)).unwrap();
        let starts: Vec<f64> = fin.blocks()[..4]
            .iter()
            .map(|b| fin.points()[b.start].label)
            .collect();
        assert_eq!(starts, vec![2.0, 4.0, 8.0, 14.0]); // 2*{1, 2, 4, 7}
    }

    #[test]
    fn truncation_idempotent_on_finite_spaces() {
        let families = vec![AtomFamily {
            name: "f".into(),
            count: BlockCount::Finite(3),
            points_per_block: parse("1").unwrap(),
            label: parse("n").unwrap(),
            weight: parse("1/n").unwrap(),
        }];
        let space = MeasureSpace::purely_atomic(families, vec![]);
        let a = space.truncate(&Truncation::new(3, 0)).unwrap();
        let b = space.truncate(&Truncation::new(1000, 0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_truncation_is_empty() {
        let space = MeasureSpace::purely_atomic(staircase_families(), vec![]);
        let fin = space.truncate(&Truncation::new(0, 0)).unwrap();
        assert!(fin.is_empty());
    }

    #[test]
    fn duplicate_labels_rejected() {
        let mut builder = SpaceBuilder::new();
        builder.add_block(BlockKey::Explicit { index: 0 }, [(1.0f64, 1.0), (2.0, 1.0)]).unwrap();
        builder.add_block(BlockKey::Explicit { index: 1 }, [(2.0f64, 1.0)]).unwrap();
        assert!(matches!(builder.finish(), Err(BuildError::DuplicateLabel { .. })));
    }

    #[test]
    fn nonpositive_weight_rejected() {
        let mut builder = SpaceBuilder::<f64>::new();
        let err = builder.add_block(BlockKey::Explicit { index: 0 }, [(1.0, -1.0)]).unwrap_err();
        assert!(matches!(err, BuildError::NonpositiveWeight { .. }));
    }
}
