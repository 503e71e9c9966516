//! Measurable functions: materialized value tables and declarative rules.

use crate::expr::{Bindings, Expr};
use crate::scalar::{c, Scalar};

use super::region::RegionFn;
use super::space::{BlockKey, BuildError, FiniteSpace};

/// A function materialized on a [`FiniteSpace`]: one value per point,
/// plus a step function on the region when the space has one.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceFn<T> {
    point_values: Vec<T>,
    region: Option<RegionFn<T>>,
}

impl<T: Scalar> SpaceFn<T> {
    pub fn from_parts(
        space: &FiniteSpace<T>,
        point_values: Vec<T>,
        region: Option<RegionFn<T>>,
    ) -> Self {
        assert_eq!(point_values.len(), space.point_count(), "value table must cover every point");
        assert_eq!(region.is_some(), space.region().is_some(), "region values iff region present");
        Self { point_values, region }
    }

    pub fn from_point_values(space: &FiniteSpace<T>, point_values: Vec<T>) -> Self {
        let region = space.region().map(|r| RegionFn::constant(r.level(), T::zero()));
        Self::from_parts(space, point_values, region)
    }

    /// Evaluate a closure of the point label at every point; the region
    /// part, if any, is the given constant.
    pub fn of_labels(space: &FiniteSpace<T>, f: impl Fn(T) -> T, region_value: T) -> Self {
        let point_values = space.points().iter().map(|p| f(p.label)).collect();
        let region = space.region().map(|r| RegionFn::constant(r.level(), region_value));
        Self { point_values, region }
    }

    pub fn constant(space: &FiniteSpace<T>, v: T) -> Self {
        Self::of_labels(space, |_| v, v)
    }

    pub fn zero(space: &FiniteSpace<T>) -> Self {
        Self::constant(space, T::zero())
    }

    pub fn point_values(&self) -> &[T] {
        &self.point_values
    }

    pub fn region_part(&self) -> Option<&RegionFn<T>> {
        self.region.as_ref()
    }

    pub fn with_region(mut self, region: RegionFn<T>) -> Self {
        self.region = Some(region);
        self
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            point_values: self.point_values.iter().map(|&v| f(v)).collect(),
            region: self.region.as_ref().map(|r| r.map(&f)),
        }
    }

    pub fn zip(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!(self.point_values.len(), other.point_values.len());
        let region = match (&self.region, &other.region) {
            (Some(a), Some(b)) => Some(a.zip(b, &f)),
            (None, None) => None,
            _ => panic!("cannot combine functions with mismatched region parts"),
        };
        Self {
            point_values: self
                .point_values
                .iter()
                .zip(&other.point_values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            region,
        }
    }

    pub(crate) fn check_matches(&self, space: &FiniteSpace<T>) {
        assert_eq!(
            self.point_values.len(),
            space.point_count(),
            "function does not match this space"
        );
    }
}

/// How point values are produced from a declared space.
#[derive(Debug, Clone, PartialEq)]
pub enum PointRule<T> {
    /// `value = f(label)`.
    OfLabel(Expr<T>),
    /// One expression per family, in the variables `(n, j)`. Spaces with
    /// explicit blocks cannot use this rule.
    PerFamily(Vec<Expr<T>>),
    /// Explicit `(label, value)` table; every point label must appear.
    Table(Vec<(T, T)>),
}

/// How region cell values are produced.
#[derive(Debug, Clone, PartialEq)]
pub enum RegionRule<T> {
    Constant(T),
    /// Expression in `x` = the strip center abscissa in `[0, 1]`,
    /// evaluated at the space's region level (a strip-constant function).
    OfStripCenter(Expr<T>),
    /// Explicit step table at its own native level.
    Cells(RegionFn<T>),
}

/// Declarative function definition, usable both for materialization on a
/// truncation and for streaming evaluation over generated blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDef<T> {
    pub points: PointRule<T>,
    pub region: Option<RegionRule<T>>,
}

impl<T: Scalar> FunctionDef<T> {
    pub fn of_label(expr: Expr<T>) -> Self {
        Self { points: PointRule::OfLabel(expr), region: None }
    }

    pub fn with_region(mut self, rule: RegionRule<T>) -> Self {
        self.region = Some(rule);
        self
    }

    /// Value at a generated point, for the streaming paths.
    #[inline]
    pub fn eval_family_point(
        &self,
        family: usize,
        n: u64,
        j: u64,
        label: T,
    ) -> Result<T, BuildError> {
        match &self.points {
            PointRule::OfLabel(e) => e.eval(&Bindings::of_x(label)).map_err(|source| {
                BuildError::Eval { context: format!("function at label {label}"), source }
            }),
            PointRule::PerFamily(exprs) => {
                let e = exprs.get(family).ok_or_else(|| BuildError::Eval {
                    context: format!("per-family function: no rule for family {family}"),
                    source: crate::expr::EvalError::Unbound("n"),
                })?;
                e.eval(&Bindings::of_nj(c(n as f64), c(j as f64))).map_err(|source| {
                    BuildError::Eval {
                        context: format!("per-family function at (n={n}, j={j})"),
                        source,
                    }
                })
            }
            PointRule::Table(table) => lookup_label(table, label),
        }
    }

    /// Materialize on a truncated space.
    pub fn materialize(&self, space: &FiniteSpace<T>) -> Result<SpaceFn<T>, BuildError> {
        let mut point_values = Vec::with_capacity(space.point_count());
        for block in space.blocks() {
            for (offset, i) in block.point_range().enumerate() {
                let label = space.points()[i].label;
                let v = match (&self.points, block.key) {
                    (PointRule::PerFamily(_), BlockKey::Family { family, n }) => {
                        self.eval_family_point(family, n, offset as u64, label)?
                    }
                    (PointRule::PerFamily(_), BlockKey::Explicit { index }) => {
                        return Err(BuildError::NonFinite {
                            context: format!(
                                "per-family function cannot cover explicit block {index}"
                            ),
                        })
                    }
                    (PointRule::OfLabel(e), _) => {
                        e.eval(&Bindings::of_x(label)).map_err(|source| BuildError::Eval {
                            context: format!("function at label {label}"),
                            source,
                        })?
                    }
                    (PointRule::Table(t), _) => lookup_label(t, label)?,
                };
                if !v.is_finite() {
                    return Err(BuildError::NonFinite {
                        context: format!("function value at label {label}"),
                    });
                }
                point_values.push(v);
            }
        }
        let region = match (space.region(), &self.region) {
            (None, _) => None,
            (Some(r), Some(rule)) => Some(self.region_fn_at(rule, r.level())?),
            (Some(_), None) => {
                return Err(BuildError::NonFinite {
                    context: "function has no values on the non-atomic region".into(),
                })
            }
        };
        Ok(SpaceFn { point_values, region })
    }

    fn region_fn_at(&self, rule: &RegionRule<T>, level: u32) -> Result<RegionFn<T>, BuildError> {
        match rule {
            RegionRule::Constant(v) => Ok(RegionFn::constant(level, *v)),
            RegionRule::OfStripCenter(e) => {
                let side = 1usize << level;
                let mut strip_values = Vec::with_capacity(side);
                for s in 0..side {
                    let x = (c::<T>(s as f64) + c(0.5)) / c(side as f64);
                    let v = e.eval(&Bindings::of_x(x)).map_err(|source| BuildError::Eval {
                        context: format!("region function at strip {s}"),
                        source,
                    })?;
                    if !v.is_finite() {
                        return Err(BuildError::NonFinite {
                            context: format!("region function value at strip {s}"),
                        });
                    }
                    strip_values.push(v);
                }
                Ok(RegionFn::from_strip_values(level, &strip_values))
            }
            RegionRule::Cells(f) => {
                if f.cells().iter().any(|v| !v.is_finite()) {
                    return Err(BuildError::NonFinite { context: "region cell value".into() });
                }
                Ok(if f.level() >= level { f.clone() } else { f.refine_to(level) })
            }
        }
    }
}

fn lookup_label<T: Scalar>(table: &[(T, T)], label: T) -> Result<T, BuildError> {
    for (l, v) in table {
        if *l == label {
            return Ok(*v);
        }
    }
    Err(BuildError::NonFinite {
        context: format!("function table has no value at point label {label}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::Exponent;
    use crate::expr::parse;
    use crate::measure::space::SpaceBuilder;

    fn unit_block_space(labels: &[f64]) -> FiniteSpace<f64> {
        let mut b = SpaceBuilder::new();
        b.add_block(BlockKey::Explicit { index: 0 }, labels.iter().map(|&l| (l, 1.0)))
            .unwrap();
        b.finish().unwrap()
    }

    #[test]
    fn integrate_indicator_gives_measure() {
        let space = unit_block_space(&[1.0, 2.0]);
        let one = SpaceFn::constant(&space, 1.0);
        assert_eq!(space.integrate(&one), 2.0);
    }

    #[test]
    fn integrate_identity_hand_sum() {
        let space = unit_block_space(&[4.0, 6.0]);
        let f = SpaceFn::of_labels(&space, |x| x, 0.0);
        assert_eq!(space.integrate(&f), 10.0);
    }

    #[test]
    fn integrate_zero() {
        let space = unit_block_space(&[1.0, 2.0, 3.0]);
        assert_eq!(space.integrate(&SpaceFn::zero(&space)), 0.0);
    }

    #[test]
    fn lp_norm_examples() {
        let space = unit_block_space(&[1.0, 2.0, 3.0]);
        let f = SpaceFn::from_point_values(&space, vec![2.0, 4.0, 5.0]);
        assert_eq!(space.lp_norm(&f, Exponent::Finite(1.0)).unwrap(), 11.0);

        let g = SpaceFn::from_point_values(&space, vec![3.0, 0.0, 0.0]);
        assert_eq!(space.lp_norm(&g, Exponent::Finite(2.0)).unwrap(), 3.0);
        assert_eq!(space.lp_norm(&g, Exponent::Infinity).unwrap(), 3.0);

        // indicator of a measure-1 block has norm 1 for every p
        let unit = unit_block_space(&[7.0]);
        let ind = SpaceFn::constant(&unit, 1.0);
        for p in [1.0, 1.5, 2.0, 3.0] {
            assert_eq!(unit.lp_norm(&ind, Exponent::Finite(p)).unwrap(), 1.0);
        }
    }

    #[test]
    fn table_missing_point_names_label() {
        let space = unit_block_space(&[1.0, 2.0]);
        let def =
            FunctionDef { points: PointRule::Table(vec![(1.0, 5.0)]), region: None };
        let err = def.materialize(&space).unwrap_err();
        assert!(err.to_string().contains('2'));
    }

    #[test]
    fn of_label_materialization() {
        let space = unit_block_space(&[2.0, 4.0]);
        let def = FunctionDef::of_label(parse("1/x^3").unwrap());
        let f = def.materialize(&space).unwrap();
        assert_eq!(f.point_values(), &[0.125, 1.0 / 64.0]);
    }
}
