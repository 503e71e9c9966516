//! Discrete sigma-finite measure spaces with a block sub-sigma-algebra.
//!
//! A space is a countable weighted point set partitioned into blocks (the
//! atoms of the sub-sigma-algebra), plus an optional non-atomic region
//! modeled as a refinable dyadic grid. Infinite spaces exist only through
//! family generators; all numeric evaluation happens on truncations.

mod function;
mod region;
mod space;

pub use function::{FunctionDef, PointRule, RegionRule, SpaceFn};
pub use region::{NonAtomicRegion, RegionFn, MAX_REGION_LEVEL};
pub use space::{
    AtomFamily, Block, BlockCount, BlockKey, BuildError, ExplicitBlock, FiniteSpace, MeasureSpace,
    NormError, Point, SpaceBuilder, Truncation, MAX_MATERIALIZED_POINTS,
};
