//! Conditional expectation with respect to the block sub-sigma-algebra.
//!
//! On the atomic part this is block averaging; on the region it is the
//! per-strip average. Blocks and strips on which the input is exactly
//! constant keep that constant bit-for-bit, which makes idempotence an
//! exact identity rather than a tolerance statement.

use crate::exponent::{Exponent, ExponentPair};
use crate::measure::{FiniteSpace, RegionFn, SpaceFn};
use crate::scalar::{abs_pow, Scalar};
use crate::sum::Accumulator;

/// `E(f)`: constant on every block and every region strip, with the same
/// integral as `f` over each of them.
pub fn conditional_expectation<T: Scalar>(space: &FiniteSpace<T>, f: &SpaceFn<T>) -> SpaceFn<T> {
    let mut values = vec![T::zero(); space.point_count()];
    for block in space.blocks() {
        let vals = &f.point_values()[block.point_range()];
        let first = vals[0];
        let avg = if vals.iter().all(|&v| v == first) {
            first
        } else {
            let mut acc = Accumulator::new();
            for i in block.point_range() {
                acc.add(f.point_values()[i] * space.points()[i].weight);
            }
            acc.value() / block.measure
        };
        for slot in &mut values[block.point_range()] {
            *slot = avg;
        }
    }
    let region = match (space.region(), f.region_part()) {
        (Some(r), Some(rf)) => Some(region_conditional_expectation(rf, r.level())),
        _ => None,
    };
    SpaceFn::from_parts(space, values, region)
}

/// Strip averages of a region step function, with respect to the strips
/// of the given space level. Functions finer than the space level are
/// averaged per strip group; coarser ones per native column (the two
/// agree wherever both make sense).
pub fn region_conditional_expectation<T: Scalar>(
    rf: &RegionFn<T>,
    space_level: u32,
) -> RegionFn<T> {
    let m = rf.level();
    if m <= space_level {
        return RegionFn::from_strip_values(m, &rf.strip_averages());
    }
    // group 2^(m - space_level) native columns per space strip
    let group = 1usize << (m - space_level);
    let side = rf.side();
    let mut strip_values = vec![T::zero(); side];
    for strip in 0..(side / group) {
        let cells: Vec<T> = (strip * group..(strip + 1) * group)
            .flat_map(|s| (0..side).map(move |y| rf.cell(s, y)))
            .collect();
        let first = cells[0];
        let avg = if cells.iter().all(|&v| v == first) {
            first
        } else {
            let mut acc = Accumulator::new();
            for &v in &cells {
                acc.add(v);
            }
            acc.value() / crate::scalar::c(cells.len() as f64)
        };
        for s in strip * group..(strip + 1) * group {
            strip_values[s] = avg;
        }
    }
    RegionFn::from_strip_values(m, &strip_values)
}

/// Blockwise (and stripwise) supremum of `|f|`: the conditional
/// essential sup, used as the `q = inf` factor in the Hoelder bullet.
pub fn conditional_sup_abs<T: Scalar>(space: &FiniteSpace<T>, f: &SpaceFn<T>) -> SpaceFn<T> {
    let mut values = vec![T::zero(); space.point_count()];
    for block in space.blocks() {
        let m = f.point_values()[block.point_range()]
            .iter()
            .fold(T::zero(), |m, &v| m.max(v.abs()));
        for slot in &mut values[block.point_range()] {
            *slot = m;
        }
    }
    let region = match (space.region(), f.region_part()) {
        (Some(r), Some(rf)) => {
            let level = rf.level().max(r.level());
            let fine = rf.refine_to(level);
            let side = fine.side();
            let group = 1usize << (level - r.level().min(level));
            let mut strips = vec![T::zero(); side];
            for strip in 0..(side / group) {
                let mut m = T::zero();
                for s in strip * group..(strip + 1) * group {
                    for y in 0..side {
                        m = m.max(fine.cell(s, y).abs());
                    }
                }
                for s in strip * group..(strip + 1) * group {
                    strips[s] = m;
                }
            }
            Some(RegionFn::from_strip_values(level, &strips))
        }
        _ => None,
    };
    SpaceFn::from_parts(space, values, region)
}

/// Outcome of one axiom check.
#[derive(Debug, Clone, Copy)]
pub struct AxiomCheck<T> {
    pub holds: bool,
    pub max_violation: T,
}

/// The five textbook properties of `E`, each with its worst violation.
#[derive(Debug, Clone)]
pub struct CeAxiomsReport<T> {
    /// `E(f g) = E(f) g` for `A`-measurable `g` (here `g := E(g)`).
    pub module_property: AxiomCheck<T>,
    /// `|E(f)|^p <= E(|f|^p)`.
    pub jensen: AxiomCheck<T>,
    /// `f >= 0` implies `E(f) >= 0` (checked on `|f|`).
    pub positivity: AxiomCheck<T>,
    /// `|E(f g)| <= E(|f|^p)^(1/p) E(|g|^q)^(1/q)`.
    pub hoelder: AxiomCheck<T>,
    /// `S(f) subset of S(E(f))` for `f >= 0` (checked on `|f|`).
    pub support: AxiomCheck<T>,
}

impl<T: Scalar> CeAxiomsReport<T> {
    pub fn all_hold(&self) -> bool {
        self.module_property.holds
            && self.jensen.holds
            && self.positivity.holds
            && self.hoelder.holds
            && self.support.holds
    }

    pub fn max_violation(&self) -> T {
        self.module_property
            .max_violation
            .max(self.jensen.max_violation)
            .max(self.positivity.max_violation)
            .max(self.hoelder.max_violation)
            .max(self.support.max_violation)
    }
}

fn sup_over<T: Scalar>(f: &SpaceFn<T>) -> T {
    let mut m = f.point_values().iter().fold(T::neg_infinity(), |m, &v| m.max(v));
    if let Some(r) = f.region_part() {
        m = r.cells().iter().fold(m, |m, &v| m.max(v));
    }
    m
}

fn check<T: Scalar>(violation: T, tol: T) -> AxiomCheck<T> {
    let v = violation.max(T::zero());
    AxiomCheck { holds: v <= tol, max_violation: v }
}

/// Check the five properties on a finite space at tolerance `tol`.
///
/// `g` is replaced by `E(g)` to manufacture the `A`-measurable factor of
/// the module property; the positivity and support checks run on `|f|`.
pub fn check_ce_axioms<T: Scalar>(
    space: &FiniteSpace<T>,
    f: &SpaceFn<T>,
    g: &SpaceFn<T>,
    pair: ExponentPair<T>,
    tol: T,
) -> CeAxiomsReport<T> {
    let p = pair.p.finite().expect("axiom checks need a finite exponent");
    let ef = conditional_expectation(space, f);
    let g_meas = conditional_expectation(space, g);

    // module property
    let e_fg = conditional_expectation(space, &f.zip(&g_meas, |a, b| a * b));
    let prod = ef.zip(&g_meas, |a, b| a * b);
    let module_violation = sup_over(&e_fg.zip(&prod, |a, b| (a - b).abs()));

    // conditional Jensen at p
    let lhs = ef.map(|v| abs_pow(v, p));
    let rhs = conditional_expectation(space, &f.map(|v| abs_pow(v, p)));
    let jensen_violation = sup_over(&lhs.zip(&rhs, |a, b| a - b));

    // positivity on |f|
    let e_abs = conditional_expectation(space, &f.map(|v| v.abs()));
    let positivity_violation = -sup_over(&e_abs.map(|v| -v));

    // conditional Hoelder
    let e_fg_raw = conditional_expectation(space, &f.zip(g, |a, b| a * b));
    let f_factor = conditional_expectation(space, &f.map(|v| abs_pow(v, p)))
        .map(|v| v.powf(T::one() / p));
    let g_factor = match pair.q {
        Exponent::Finite(q) => conditional_expectation(space, &g.map(|v| abs_pow(v, q)))
            .map(|v| v.powf(T::one() / q)),
        Exponent::Infinity => conditional_sup_abs(space, g),
    };
    let bound = f_factor.zip(&g_factor, |a, b| a * b);
    let hoelder_violation = sup_over(&e_fg_raw.zip(&bound, |a, b| a.abs() - b));

    // support inclusion on |f|
    let abs_f = f.map(|v| v.abs());
    let support_violation =
        sup_over(&abs_f.zip(&e_abs, |h, eh| if h > T::zero() && eh <= T::zero() { h } else { T::zero() }));

    CeAxiomsReport {
        module_property: check(module_violation, tol),
        jensen: check(jensen_violation, tol),
        positivity: check(positivity_violation, tol),
        hoelder: check(hoelder_violation, tol),
        support: check(support_violation, tol),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{BlockKey, SpaceBuilder};

    fn two_block_space() -> FiniteSpace<f64> {
        let mut b = SpaceBuilder::new();
        b.add_block(BlockKey::Explicit { index: 0 }, [(1.0, 1.0), (2.0, 1.0)]).unwrap();
        b.add_block(BlockKey::Explicit { index: 1 }, [(3.0, 1.0)]).unwrap();
        b.finish().unwrap()
    }

    #[test]
    fn block_averages() {
        let space = two_block_space();
        let f = SpaceFn::from_point_values(&space, vec![2.0, 4.0, 5.0]);
        let ef = conditional_expectation(&space, &f);
        assert_eq!(ef.point_values(), &[3.0, 3.0, 5.0]);
    }

    #[test]
    fn constants_fixed_exactly() {
        let space = two_block_space();
        let f = SpaceFn::constant(&space, 0.1);
        let ef = conditional_expectation(&space, &f);
        assert_eq!(ef.point_values(), f.point_values());
    }

    #[test]
    fn idempotent_exactly() {
        let space = two_block_space();
        let f = SpaceFn::from_point_values(&space, vec![0.3, 0.7, -1.9]);
        let ef = conditional_expectation(&space, &f);
        let eef = conditional_expectation(&space, &ef);
        assert_eq!(ef.point_values(), eef.point_values());
    }

    #[test]
    fn averaging_property() {
        let space = two_block_space();
        let f = SpaceFn::from_point_values(&space, vec![1.25, -0.5, 2.0]);
        let ef = conditional_expectation(&space, &f);
        for b in 0..space.block_count() {
            let lhs = space.integrate_block(&ef, b);
            let rhs = space.integrate_block(&f, b);
            assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn sign_cancellation_hand_case() {
        // f = (1, -1) on one two-point block: E(f) = 0, E(|f|^p) = 1
        let mut b = SpaceBuilder::new();
        b.add_block(BlockKey::Explicit { index: 0 }, [(1.0, 1.0), (2.0, 1.0)]).unwrap();
        let space = b.finish().unwrap();
        let f = SpaceFn::from_point_values(&space, vec![1.0, -1.0]);
        let ef = conditional_expectation(&space, &f);
        assert_eq!(ef.point_values(), &[0.0, 0.0]);
        let report = check_ce_axioms(&space, &f, &f, ExponentPair::two(), 1e-10);
        assert!(report.all_hold());
    }

    #[test]
    fn support_inclusion_hand_case() {
        // f = (1, 0) >= 0 on one block: E(f) = 1/2 everywhere
        let mut b = SpaceBuilder::new();
        b.add_block(BlockKey::Explicit { index: 0 }, [(1.0, 1.0), (2.0, 1.0)]).unwrap();
        let space = b.finish().unwrap();
        let f = SpaceFn::from_point_values(&space, vec![1.0, 0.0]);
        let ef = conditional_expectation(&space, &f);
        assert_eq!(ef.point_values(), &[0.5, 0.5]);
        let report = check_ce_axioms(&space, &f, &f, ExponentPair::two(), 1e-10);
        assert!(report.support.holds);
    }

    #[test]
    fn axioms_hold_for_p_one() {
        let space = two_block_space();
        let f = SpaceFn::from_point_values(&space, vec![1.5, -2.0, 0.25]);
        let g = SpaceFn::from_point_values(&space, vec![-1.0, 3.0, 2.0]);
        let pair = ExponentPair::new(1.0).unwrap();
        let report = check_ce_axioms(&space, &f, &g, pair, 1e-10);
        assert!(report.all_hold(), "{report:?}");
    }
}
