//! Nodal coefficient and solution fields, boundary data, weighted quadrature.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Geometry, Side};
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("field on side {side} has {found} values, mesh has {expected} nodes")]
    LengthMismatch {
        side: Side,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value at node {index} on side {side}")]
    NonFinite { side: Side, index: usize },
    #[error("Robin coefficient and datum must be finite and nonnegative")]
    InvalidRobin,
}

/// Nodal samples of a coefficient or solution on one subdomain.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefField<T> {
    side: Side,
    values: Vec<T>,
}

impl<T: Real> CoefField<T> {
    pub fn new(side: Side, values: Vec<T>) -> Result<Self, FieldError> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(FieldError::NonFinite { side, index });
        }
        Ok(CoefField { side, values })
    }

    pub fn constant(g: &Geometry<T>, side: Side, value: T) -> Self {
        CoefField {
            side,
            values: vec![value; g.nodes(side)],
        }
    }

    /// Samples `f` at the nodes of `side`.
    pub fn from_fn(g: &Geometry<T>, side: Side, f: impl Fn(T) -> T) -> Self {
        CoefField {
            side,
            values: g.mesh(side).iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Checks that the field lives on the given side of `g`.
    pub fn check(&self, g: &Geometry<T>) -> Result<(), FieldError> {
        let expected = g.nodes(self.side);
        if self.values.len() != expected {
            return Err(FieldError::LengthMismatch {
                side: self.side,
                expected,
                found: self.values.len(),
            });
        }
        Ok(())
    }

    /// `(min, max)` over the nodes.
    pub fn extrema(&self) -> (T, T) {
        self.values.iter().fold(
            (T::infinity(), T::neg_infinity()),
            |(lo, hi), &v| (lo.min(v), hi.max(v)),
        )
    }

    pub fn lower(&self) -> T {
        self.extrema().0
    }

    pub fn upper(&self) -> T {
        self.extrema().1
    }

    /// Nodewise `max(0, f)`.
    pub fn positive_part(&self) -> Self {
        self.map(|v| v.max(T::zero()))
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        CoefField {
            side: self.side,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Nodewise combination of two fields on the same side.
    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!(self.side, other.side, "fields on different sides");
        CoefField {
            side: self.side,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Weighted integral over the field's subdomain.
    pub fn integrate(&self, g: &Geometry<T>) -> T {
        integrate(self, g)
    }

    /// Value at the interface copy of this side.
    pub fn interface_value(&self, g: &Geometry<T>) -> T {
        self.values[g.interface_node(self.side)]
    }
}

impl<T> std::ops::Index<usize> for CoefField<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.values[i]
    }
}

/// Nodal quadrature against the radial measure: each value is weighted by its
/// lumped mass, which reduces to the composite trapezoid rule when `w = 1`.
///
/// Panics if the field does not match the geometry.
pub fn integrate<T: Real>(f: &CoefField<T>, g: &Geometry<T>) -> T {
    f.check(g).expect("field matches geometry");
    f.values
        .iter()
        .zip(g.lumped_mass(f.side))
        .map(|(&v, &m)| v * m)
        .sum()
}

/// A pair `(u1, u2)` living on both subdomains.
#[derive(Clone, Debug, PartialEq)]
pub struct PairField<T> {
    pub u1: CoefField<T>,
    pub u2: CoefField<T>,
}

impl<T: Real> PairField<T> {
    pub fn new(u1: CoefField<T>, u2: CoefField<T>) -> Self {
        debug_assert_eq!(u1.side(), Side::One);
        debug_assert_eq!(u2.side(), Side::Two);
        PairField { u1, u2 }
    }

    pub fn constant(g: &Geometry<T>, value: T) -> Self {
        PairField {
            u1: CoefField::constant(g, Side::One, value),
            u2: CoefField::constant(g, Side::Two, value),
        }
    }

    pub fn from_fn(g: &Geometry<T>, f1: impl Fn(T) -> T, f2: impl Fn(T) -> T) -> Self {
        PairField {
            u1: CoefField::from_fn(g, Side::One, f1),
            u2: CoefField::from_fn(g, Side::Two, f2),
        }
    }

    pub fn side(&self, side: Side) -> &CoefField<T> {
        match side {
            Side::One => &self.u1,
            Side::Two => &self.u2,
        }
    }

    pub fn check(&self, g: &Geometry<T>) -> Result<(), FieldError> {
        if self.u1.side != Side::One || self.u2.side != Side::Two {
            return Err(FieldError::LengthMismatch {
                side: Side::One,
                expected: g.nodes(Side::One),
                found: 0,
            });
        }
        self.u1.check(g)?;
        self.u2.check(g)
    }

    /// Values of side 1 followed by side 2.
    pub fn stacked(&self) -> Vec<T> {
        self.u1
            .values
            .iter()
            .chain(&self.u2.values)
            .copied()
            .collect()
    }

    /// Inverse of [`PairField::stacked`]; `n1` is the node count of side 1.
    pub fn from_stacked(values: &[T], n1: usize) -> Self {
        PairField {
            u1: CoefField {
                side: Side::One,
                values: values[..n1].to_vec(),
            },
            u2: CoefField {
                side: Side::Two,
                values: values[n1..].to_vec(),
            },
        }
    }

    pub fn extrema(&self) -> (T, T) {
        let (a, b) = self.u1.extrema();
        let (c, d) = self.u2.extrema();
        (a.min(c), b.max(d))
    }

    pub fn map(&self, f: impl Fn(T) -> T + Copy) -> Self {
        PairField {
            u1: self.u1.map(f),
            u2: self.u2.map(f),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T + Copy) -> Self {
        PairField {
            u1: self.u1.zip_with(&other.u1, f),
            u2: self.u2.zip_with(&other.u2, f),
        }
    }

    /// Largest nodal distance to another pair.
    pub fn dist_inf(&self, other: &Self) -> T {
        crate::scalar::dist_inf(&self.u1.values, &other.u1.values)
            .max(crate::scalar::dist_inf(&self.u2.values, &other.u2.values))
    }

    /// Writes `coordinate,side,value` rows.
    pub fn write_csv<W: Write>(&self, g: &Geometry<T>, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["coordinate", "side", "value"])?;
        for f in [&self.u1, &self.u2] {
            for (x, v) in g.mesh(f.side).iter().zip(&f.values) {
                w.write_record([x.to_string(), f.side.to_string(), v.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

impl<T: Real> CoefField<T> {
    /// Writes `coordinate,side,value` rows.
    pub fn write_csv<W: Write>(&self, g: &Geometry<T>, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["coordinate", "side", "value"])?;
        for (x, v) in g.mesh(self.side).iter().zip(&self.values) {
            w.write_record([x.to_string(), self.side.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Condition on one boundary piece: `∂ₙu + g u = h`, Neumann when `g = h = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Bc<T> {
    Neumann,
    Robin { g: T, h: T },
}

impl<T: Real> Bc<T> {
    pub fn robin(g: T) -> Self {
        Bc::Robin { g, h: T::zero() }
    }

    pub fn coefficient(&self) -> T {
        match *self {
            Bc::Neumann => T::zero(),
            Bc::Robin { g, .. } => g,
        }
    }

    pub fn datum(&self) -> T {
        match *self {
            Bc::Neumann => T::zero(),
            Bc::Robin { h, .. } => h,
        }
    }
}

/// Boundary conditions of a standalone subdomain: one entry for the interface
/// piece and one for the outer piece (ignored at the centre of a ball).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobinSpec<T> {
    pub interface: Bc<T>,
    pub outer: Bc<T>,
}

impl<T: Real> RobinSpec<T> {
    pub fn neumann() -> Self {
        RobinSpec {
            interface: Bc::Neumann,
            outer: Bc::Neumann,
        }
    }

    /// Robin coefficient `g` on the interface, Neumann elsewhere.
    pub fn interface_robin(g: T) -> Self {
        RobinSpec {
            interface: Bc::robin(g),
            outer: Bc::Neumann,
        }
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        for bc in [self.interface, self.outer] {
            let (g, h) = (bc.coefficient(), bc.datum());
            if !g.is_finite() || !h.is_finite() || g < T::zero() || h < T::zero() {
                return Err(FieldError::InvalidRobin);
            }
        }
        Ok(())
    }

    /// Whether any boundary datum is nonzero on a piece that exists in `g`.
    pub fn has_datum(&self, g: &Geometry<T>, side: Side) -> bool {
        self.interface.datum() > T::zero()
            || (g.outer_measure(side).is_some() && self.outer.datum() > T::zero())
    }

    /// Whether the condition is pure Neumann on every piece that exists in `g`.
    pub fn is_neumann(&self, g: &Geometry<T>, side: Side) -> bool {
        self.interface.coefficient() == T::zero()
            && (g.outer_measure(side).is_none() || self.outer.coefficient() == T::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_geometry, GeometrySpec};
    use approx::assert_relative_eq;

    fn unit() -> Geometry<f64> {
        build_geometry(&GeometrySpec::two_interval(0.0, 0.5, 1.0, 65, 65)).unwrap()
    }

    #[test]
    fn extrema_and_positive_part() {
        let f = CoefField::new(Side::One, vec![-1.0, 0.0, 2.0]).unwrap();
        assert_eq!(f.extrema(), (-1.0, 2.0));
        assert_eq!(f.map(|v| -v).extrema(), (-2.0, 1.0));
        assert_eq!(f.positive_part().values(), &[0.0, 0.0, 2.0]);
        let g = unit();
        assert_eq!(CoefField::constant(&g, Side::Two, 3.0).extrema(), (3.0, 3.0));
        assert_eq!(
            CoefField::constant(&g, Side::Two, -2.0).positive_part().extrema(),
            (0.0, 0.0)
        );
    }

    #[test]
    fn rejects_non_finite() {
        assert_eq!(
            CoefField::new(Side::Two, vec![1.0, f64::NAN]),
            Err(FieldError::NonFinite {
                side: Side::Two,
                index: 1
            })
        );
    }

    #[test]
    fn quadrature() {
        let g = unit();
        assert_relative_eq!(
            CoefField::constant(&g, Side::One, 1.0).integrate(&g),
            0.5,
            max_relative = 1e-14
        );
        let whole: Geometry<f64> =
            build_geometry(&GeometrySpec::two_interval(0.0, 0.5, 1.0, 65, 65)).unwrap();
        let x1 = CoefField::from_fn(&whole, Side::One, |x| x).integrate(&whole);
        let x2 = CoefField::from_fn(&whole, Side::Two, |x| x).integrate(&whole);
        assert!((x1 + x2 - 0.5).abs() < 1e-14);
        let disk: Geometry<f64> =
            build_geometry(&GeometrySpec::radial(2, 1.0, 2.0, 129, 129)).unwrap();
        let area = CoefField::constant(&disk, Side::One, 1.0).integrate(&disk);
        assert!((area - std::f64::consts::PI).abs() < 1e-6);
    }

    #[test]
    fn stacking_round_trip() {
        let g = unit();
        let p = PairField::from_fn(&g, |x| x, |x| 2.0 * x);
        let s = p.stacked();
        assert_eq!(PairField::from_stacked(&s, g.nodes(Side::One)), p);
    }

    #[test]
    fn robin_validation() {
        assert!(RobinSpec::interface_robin(1.0).validate().is_ok());
        let bad = RobinSpec {
            interface: Bc::Robin { g: -1.0, h: 0.0 },
            outer: Bc::Neumann,
        };
        assert_eq!(bad.validate(), Err(FieldError::InvalidRobin));
    }

    #[test]
    fn csv_rows() {
        let g: Geometry<f64> =
            build_geometry(&GeometrySpec::two_interval(0.0, 0.5, 1.0, 3, 3)).unwrap();
        let mut buf = Vec::new();
        PairField::constant(&g, 1.5).write_csv(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 7);
        assert!(text.starts_with("coordinate,side,value\n0,1,1.5\n"));
    }
}
