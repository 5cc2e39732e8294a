//! The split domain reduced to one radial or Cartesian coordinate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

/// One of the two subdomains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl Side {
    pub fn index(self) -> usize {
        match self {
            Side::One => 0,
            Side::Two => 1,
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::One => Side::Two,
            Side::Two => Side::One,
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::One => f.write_str("1"),
            Side::Two => f.write_str("2"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryKind {
    TwoInterval,
    ConcentricRadial,
}

/// User-facing description of a geometry, as read from a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeometrySpec {
    /// `(x0, a) ∪ (a, x1)` with the membrane at `a`.
    TwoInterval {
        x0: f64,
        a: f64,
        x1: f64,
        nodes1: usize,
        nodes2: usize,
    },
    /// Ball of radius `r1` inside the ball of radius `r2` in dimension `dim`.
    ConcentricRadial {
        dim: usize,
        r1: f64,
        r2: f64,
        nodes1: usize,
        nodes2: usize,
    },
}

impl GeometrySpec {
    pub fn two_interval(x0: f64, a: f64, x1: f64, nodes1: usize, nodes2: usize) -> Self {
        GeometrySpec::TwoInterval {
            x0,
            a,
            x1,
            nodes1,
            nodes2,
        }
    }

    pub fn radial(dim: usize, r1: f64, r2: f64, nodes1: usize, nodes2: usize) -> Self {
        GeometrySpec::ConcentricRadial {
            dim,
            r1,
            r2,
            nodes1,
            nodes2,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("side {side} has {nodes} nodes, at least 3 are required")]
    TooFewNodes { side: Side, nodes: usize },
    #[error("spatial dimension must be at least 1")]
    InvalidDimension,
}

/// Exact weighted integrals of the two hat functions living on one element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElementMoments<T> {
    pub h: T,
    /// `[∫φ0 w, ∫φ1 w]`
    pub linear: [T; 2],
    /// `[∫φ0² w, ∫φ0φ1 w, ∫φ1² w]`
    pub quadratic: [T; 3],
}

impl<T: Real> ElementMoments<T> {
    /// `∫ w` over the element.
    pub fn weight(&self) -> T {
        self.linear[0] + self.linear[1]
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Subdomain<T> {
    nodes: Vec<T>,
    elements: Vec<ElementMoments<T>>,
    lumped: Vec<T>,
    volume: T,
}

/// Immutable discretized geometry: two meshes sharing the interface coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct Geometry<T> {
    kind: GeometryKind,
    dim: usize,
    sphere_area: T,
    sides: [Subdomain<T>; 2],
    interface_measure: T,
    outer_measure: [Option<T>; 2],
}

/// Surface area of the unit sphere in `R^n`.
pub fn unit_sphere_area<T: Real>(n: usize) -> T {
    let two_pi = T::lit(2.0) * T::PI();
    match n {
        0 => T::zero(),
        1 => T::lit(2.0),
        2 => two_pi,
        _ => two_pi * unit_sphere_area::<T>(n - 2) / T::count(n - 2),
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub(crate) fn gauss_legendre<T: Real>(points: usize) -> Vec<(T, T)> {
    let n = points.max(1);
    let nf = T::count(n);
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (T::PI() * (T::count(i) + T::lit(0.75)) / (nf + T::lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let step = p / d;
            x = x - step;
            if step.abs() <= T::epsilon() * T::lit(4.0) {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != T::zero() {
            dp = d;
        }
        let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
        rule.push((x, w));
    }
    rule
}

fn legendre<T: Real>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::count(k);
        let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = T::count(n) * (x * p1 - p0) / (x * x - T::one());
    (p1, dp)
}

impl<T: Real> Geometry<T> {
    pub fn kind(&self) -> GeometryKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mesh(&self, side: Side) -> &[T] {
        &self.sides[side.index()].nodes
    }

    pub fn nodes(&self, side: Side) -> usize {
        self.sides[side.index()].nodes.len()
    }

    pub fn elements(&self, side: Side) -> &[ElementMoments<T>] {
        &self.sides[side.index()].elements
    }

    /// Row sums of the weighted mass matrix: `∫ φ_i w` per node.
    pub fn lumped_mass(&self, side: Side) -> &[T] {
        &self.sides[side.index()].lumped
    }

    pub fn volume(&self, side: Side) -> T {
        self.sides[side.index()].volume
    }

    /// `|Σ|`.
    pub fn interface_measure(&self) -> T {
        self.interface_measure
    }

    /// Measure of the outer boundary piece of a side, `None` for the ball's centre.
    pub fn outer_measure(&self, side: Side) -> Option<T> {
        self.outer_measure[side.index()]
    }

    /// The interface coordinate.
    pub fn interface(&self) -> T {
        *self.sides[1].nodes.first().expect("nonempty mesh")
    }

    /// Node index of the interface copy on `side`.
    pub fn interface_node(&self, side: Side) -> usize {
        match side {
            Side::One => self.nodes(Side::One) - 1,
            Side::Two => 0,
        }
    }

    /// Node index of the outer boundary on `side`, if that side has one.
    pub fn outer_node(&self, side: Side) -> Option<usize> {
        self.outer_measure(side)?;
        Some(match side {
            Side::One => 0,
            Side::Two => self.nodes(Side::Two) - 1,
        })
    }

    /// Largest mesh width of a side.
    pub fn h(&self, side: Side) -> T {
        self.elements(side)
            .iter()
            .fold(T::zero(), |m, e| m.max(e.h))
    }

    /// Largest mesh width over both sides.
    pub fn h_max(&self) -> T {
        self.h(Side::One).max(self.h(Side::Two))
    }

    /// Radial measure density `ω_{N-1} r^{N-1}` (identically 1 for two intervals).
    pub fn weight(&self, r: T) -> T {
        match self.kind {
            GeometryKind::TwoInterval => T::one(),
            GeometryKind::ConcentricRadial => self.sphere_area * r.abs().powi(self.dim as i32 - 1),
        }
    }

    /// Distance from a node coordinate to the interface.
    pub fn distance_to_interface(&self, r: T) -> T {
        (r - self.interface()).abs()
    }

    fn from_meshes(
        kind: GeometryKind,
        dim: usize,
        mesh1: Vec<T>,
        mesh2: Vec<T>,
        interface_measure: T,
        outer_measure: [Option<T>; 2],
    ) -> Self {
        let sphere_area = match kind {
            GeometryKind::TwoInterval => T::one(),
            GeometryKind::ConcentricRadial => unit_sphere_area(dim),
        };
        let exponent = match kind {
            GeometryKind::TwoInterval => 0,
            GeometryKind::ConcentricRadial => dim - 1,
        };
        let rule = gauss_legendre::<T>(exponent / 2 + 2);
        let build = |nodes: Vec<T>| {
            let elements: Vec<ElementMoments<T>> = nodes
                .windows(2)
                .map(|w| element_moments(w[0], w[1], sphere_area, exponent, &rule))
                .collect();
            let mut lumped = vec![T::zero(); nodes.len()];
            for (e, m) in elements.iter().enumerate() {
                lumped[e] = lumped[e] + m.linear[0];
                lumped[e + 1] = lumped[e + 1] + m.linear[1];
            }
            let volume = lumped.iter().copied().sum();
            Subdomain {
                nodes,
                elements,
                lumped,
                volume,
            }
        };
        Geometry {
            kind,
            dim,
            sphere_area,
            sides: [build(mesh1), build(mesh2)],
            interface_measure,
            outer_measure,
        }
    }

    /// Bisects every element; each side goes from `n` to `2n - 1` nodes.
    pub fn refine(&self) -> Self {
        let bisect = |nodes: &[T]| {
            let mut out = Vec::with_capacity(2 * nodes.len() - 1);
            for w in nodes.windows(2) {
                out.push(w[0]);
                out.push((w[0] + w[1]) * T::lit(0.5));
            }
            out.push(*nodes.last().expect("nonempty mesh"));
            out
        };
        Self::from_meshes(
            self.kind,
            self.dim,
            bisect(self.mesh(Side::One)),
            bisect(self.mesh(Side::Two)),
            self.interface_measure,
            self.outer_measure,
        )
    }
}

fn element_moments<T: Real>(
    r0: T,
    r1: T,
    scale: T,
    exponent: usize,
    rule: &[(T, T)],
) -> ElementMoments<T> {
    let h = r1 - r0;
    let half = h * T::lit(0.5);
    let mid = (r0 + r1) * T::lit(0.5);
    let mut linear = [T::zero(); 2];
    let mut quadratic = [T::zero(); 3];
    for &(xi, wq) in rule {
        let r = mid + half * xi;
        let w = scale * r.powi(exponent as i32) * wq * half;
        let p1 = (r - r0) / h;
        let p0 = T::one() - p1;
        linear[0] = linear[0] + p0 * w;
        linear[1] = linear[1] + p1 * w;
        quadratic[0] = quadratic[0] + p0 * p0 * w;
        quadratic[1] = quadratic[1] + p0 * p1 * w;
        quadratic[2] = quadratic[2] + p1 * p1 * w;
    }
    ElementMoments {
        h,
        linear,
        quadratic,
    }
}

fn uniform<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let step = (hi - lo) / T::count(n - 1);
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + step * T::count(i) })
        .collect()
}

/// Builds a geometry with uniform meshes on each side.
pub fn build_geometry<T: Real>(spec: &GeometrySpec) -> Result<Geometry<T>, GeometryError> {
    let check_nodes = |side, nodes: usize| {
        if nodes < 3 {
            Err(GeometryError::TooFewNodes { side, nodes })
        } else {
            Ok(())
        }
    };
    let finite = |vals: &[f64]| vals.iter().all(|v| v.is_finite());
    match *spec {
        GeometrySpec::TwoInterval {
            x0,
            a,
            x1,
            nodes1,
            nodes2,
        } => {
            if !finite(&[x0, a, x1]) || !(x0 < a && a < x1) {
                return Err(GeometryError::InvalidBounds(format!(
                    "need x0 < a < x1, got {x0}, {a}, {x1}"
                )));
            }
            check_nodes(Side::One, nodes1)?;
            check_nodes(Side::Two, nodes2)?;
            let (x0, a, x1) = (T::lit(x0), T::lit(a), T::lit(x1));
            Ok(Geometry::from_meshes(
                GeometryKind::TwoInterval,
                1,
                uniform(x0, a, nodes1),
                uniform(a, x1, nodes2),
                T::one(),
                [Some(T::one()), Some(T::one())],
            ))
        }
        GeometrySpec::ConcentricRadial {
            dim,
            r1,
            r2,
            nodes1,
            nodes2,
        } => {
            if dim == 0 {
                return Err(GeometryError::InvalidDimension);
            }
            if !finite(&[r1, r2]) || !(0.0 < r1 && r1 < r2) {
                return Err(GeometryError::InvalidBounds(format!(
                    "need 0 < r1 < r2, got {r1}, {r2}"
                )));
            }
            check_nodes(Side::One, nodes1)?;
            check_nodes(Side::Two, nodes2)?;
            let (r1, r2) = (T::lit(r1), T::lit(r2));
            let area = unit_sphere_area::<T>(dim);
            let surface = |r: T| area * r.powi(dim as i32 - 1);
            Ok(Geometry::from_meshes(
                GeometryKind::ConcentricRadial,
                dim,
                uniform(T::zero(), r1, nodes1),
                uniform(r1, r2, nodes2),
                surface(r1),
                [None, Some(surface(r2))],
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn unit() -> Geometry<f64> {
        build_geometry(&GeometrySpec::two_interval(0.0, 0.5, 1.0, 65, 65)).unwrap()
    }

    #[test]
    fn two_interval_measures() {
        let g = unit();
        assert_relative_eq!(g.volume(Side::One), 0.5, max_relative = 1e-14);
        assert_relative_eq!(g.volume(Side::Two), 0.5, max_relative = 1e-14);
        assert_eq!(g.interface_measure(), 1.0);
        assert_eq!(g.mesh(Side::One).last(), g.mesh(Side::Two).first());
        assert_eq!(g.interface(), 0.5);
    }

    #[test]
    fn radial_measures() {
        let g2: Geometry<f64> =
            build_geometry(&GeometrySpec::radial(2, 1.0, 2.0, 33, 33)).unwrap();
        assert_relative_eq!(g2.volume(Side::One), PI, max_relative = 1e-13);
        assert_relative_eq!(g2.volume(Side::Two), 3.0 * PI, max_relative = 1e-13);
        assert_relative_eq!(g2.interface_measure(), 2.0 * PI, max_relative = 1e-15);
        let g3: Geometry<f64> =
            build_geometry(&GeometrySpec::radial(3, 1.0, 2.0, 17, 17)).unwrap();
        assert_relative_eq!(g3.interface_measure(), 4.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(g3.volume(Side::One), 4.0 * PI / 3.0, max_relative = 1e-13);
        assert_relative_eq!(g3.volume(Side::Two), 28.0 * PI / 3.0, max_relative = 1e-13);
        assert!(g3.outer_node(Side::One).is_none());
    }

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(unit_sphere_area::<f64>(1), 2.0);
        assert_relative_eq!(unit_sphere_area::<f64>(4), 2.0 * PI * PI, max_relative = 1e-15);
        assert_relative_eq!(unit_sphere_area::<f64>(5), 8.0 * PI * PI / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn gauss_rule_is_exact() {
        let rule = gauss_legendre::<f64>(5);
        for k in 0..10 {
            let q: f64 = rule.iter().map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "degree {k}");
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let e = build_geometry::<f64>(&GeometrySpec::two_interval(0.0, 1.0, 1.0, 5, 5));
        assert!(matches!(e, Err(GeometryError::InvalidBounds(_))));
        let e = build_geometry::<f64>(&GeometrySpec::two_interval(0.0, 0.5, 1.0, 2, 5));
        assert!(matches!(e, Err(GeometryError::TooFewNodes { side: Side::One, nodes: 2 })));
        let e = build_geometry::<f64>(&GeometrySpec::radial(2, 0.0, 1.0, 5, 5));
        assert!(matches!(e, Err(GeometryError::InvalidBounds(_))));
        let e = build_geometry::<f64>(&GeometrySpec::radial(0, 0.5, 1.0, 5, 5));
        assert_eq!(e, Err(GeometryError::InvalidDimension));
    }

    #[test]
    fn refinement_counts_and_volumes() {
        let g: Geometry<f64> =
            build_geometry(&GeometrySpec::radial(3, 0.7, 1.3, 65, 40)).unwrap();
        let r = g.refine();
        assert_eq!(r.nodes(Side::One), 129);
        assert_eq!(r.nodes(Side::Two), 79);
        for side in [Side::One, Side::Two] {
            assert_relative_eq!(r.volume(side), g.volume(side), max_relative = 1e-14);
        }
        let twice = g.refine().refine();
        assert_eq!(twice, r.refine());
    }

    #[test]
    fn single_precision_builds() {
        let g: Geometry<f32> =
            build_geometry(&GeometrySpec::radial(2, 1.0, 2.0, 33, 33)).unwrap();
        assert!((g.volume(Side::One) - std::f32::consts::PI).abs() < 1e-5);
    }
}
