//! Discrete weighted forms for the membrane system and the standalone Robin problem.

use thiserror::Error;

use crate::fields::{CoefField, FieldError, PairField, RobinSpec};
use crate::geometry::{Geometry, Side};
use crate::linalg::{LinalgError, Tridiag};
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(#[from] FieldError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    SingularOperator(#[from] LinalgError),
}

/// How the unknown vector maps onto the geometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    /// Side 1 nodes followed by side 2 nodes; the interface appears twice.
    Membrane { n1: usize, n2: usize },
    Scalar { side: Side, n: usize },
}

impl Layout {
    pub fn len(&self) -> usize {
        match *self {
            Layout::Membrane { n1, n2 } => n1 + n2,
            Layout::Scalar { n, .. } => n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Assembled stiffness-plus-reaction form `a`, diagonal mass `b` and the
/// reaction-free part `form_part`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorPair<T> {
    pub a: Tridiag<T>,
    /// Diagonal of the weighted (lumped) mass matrix.
    pub b: Vec<T>,
    pub form_part: Tridiag<T>,
    /// Boundary datum contributions `d·h·|piece|` (zero for the membrane).
    pub load: Vec<T>,
    pub layout: Layout,
    pub diffusion: T,
}

impl<T: Real> OperatorPair<T> {
    /// `form_part + diag(c ∘ b)` for a stacked nodal coefficient `c`.
    pub fn with_reaction(&self, c: &[T]) -> Tridiag<T> {
        let r: Vec<T> = c.iter().zip(&self.b).map(|(&c, &m)| c * m).collect();
        self.form_part.plus_diagonal(&r)
    }

    pub fn mass_norm_inf(&self) -> T {
        crate::scalar::norm_inf(&self.b)
    }

    /// `B x`.
    pub fn mass_apply(&self, x: &[T]) -> Vec<T> {
        x.iter().zip(&self.b).map(|(&x, &m)| x * m).collect()
    }

    /// Writes `A` then `B` as `row col value` triplets separated by a blank line.
    pub fn write_triplets<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        self.a.write_triplets(&mut out)?;
        writeln!(out)?;
        for (i, m) in self.b.iter().enumerate() {
            writeln!(out, "{i} {i} {m:e}")?;
        }
        Ok(())
    }
}

fn check_positive<T: Real>(name: &str, v: T) -> Result<(), AssemblyError> {
    if v.is_finite() && v > T::zero() {
        Ok(())
    } else {
        Err(AssemblyError::InvalidParameter(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

/// Adds `scale · d∫u'v'w` of one side into `a` starting at row `offset`.
fn add_stiffness<T: Real>(a: &mut Tridiag<T>, g: &Geometry<T>, side: Side, offset: usize, k: T) {
    for (e, m) in g.elements(side).iter().enumerate() {
        a.add_coupling(offset + e, k * m.weight() / (m.h * m.h));
    }
}

/// Membrane form with the second equation weighted by `γ1/γ2`.
pub fn assemble_membrane<T: Real>(
    d: T,
    c1: &CoefField<T>,
    c2: &CoefField<T>,
    gamma1: T,
    gamma2: T,
    g: &Geometry<T>,
) -> Result<OperatorPair<T>, AssemblyError> {
    check_positive("d", d)?;
    check_positive("gamma1", gamma1)?;
    check_positive("gamma2", gamma2)?;
    PairField::new(c1.clone(), c2.clone()).check(g)?;
    let (n1, n2) = (g.nodes(Side::One), g.nodes(Side::Two));
    let kappa = gamma1 / gamma2;
    let mut form = Tridiag::zeros(n1 + n2);
    add_stiffness(&mut form, g, Side::One, 0, d);
    add_stiffness(&mut form, g, Side::Two, n1, d * kappa);
    form.add_coupling(n1 - 1, d * gamma1 * g.interface_measure());
    let b: Vec<T> = g
        .lumped_mass(Side::One)
        .iter()
        .copied()
        .chain(g.lumped_mass(Side::Two).iter().map(|&m| kappa * m))
        .collect();
    let c: Vec<T> = c1.values().iter().chain(c2.values()).copied().collect();
    let mut op = OperatorPair {
        a: form.clone(),
        b,
        form_part: form,
        load: vec![T::zero(); n1 + n2],
        layout: Layout::Membrane { n1, n2 },
        diffusion: d,
    };
    op.a = op.with_reaction(&c);
    Ok(op)
}

/// Standalone form `d∫u'v'w + ∫cuvw + d Σ g u v` on one side.
pub fn assemble_scalar<T: Real>(
    d: T,
    c: &CoefField<T>,
    robin: &RobinSpec<T>,
    g: &Geometry<T>,
    side: Side,
) -> Result<OperatorPair<T>, AssemblyError> {
    check_positive("d", d)?;
    robin.validate()?;
    if c.side() != side {
        return Err(AssemblyError::InvalidParameter(format!(
            "coefficient lives on side {}, problem on side {side}",
            c.side()
        )));
    }
    c.check(g)?;
    let n = g.nodes(side);
    let mut form = Tridiag::zeros(n);
    add_stiffness(&mut form, g, side, 0, d);
    let mut load = vec![T::zero(); n];
    let mut pieces = vec![(g.interface_node(side), g.interface_measure(), robin.interface)];
    if let (Some(node), Some(measure)) = (g.outer_node(side), g.outer_measure(side)) {
        pieces.push((node, measure, robin.outer));
    }
    for (node, measure, bc) in pieces {
        form.diag[node] = form.diag[node] + d * bc.coefficient() * measure;
        load[node] = load[node] + d * bc.datum() * measure;
    }
    let mut op = OperatorPair {
        a: form.clone(),
        b: g.lumped_mass(side).to_vec(),
        form_part: form,
        load,
        layout: Layout::Scalar { side, n },
        diffusion: d,
    };
    op.a = op.with_reaction(c.values());
    Ok(op)
}

/// Fields that can be flattened into the unknown vector of an operator.
pub trait Nodal<T>: Sized {
    fn to_stacked(&self) -> Vec<T>;
    fn with_values(&self, values: Vec<T>) -> Self;
}

impl<T: Real> Nodal<T> for CoefField<T> {
    fn to_stacked(&self) -> Vec<T> {
        self.values().to_vec()
    }

    fn with_values(&self, values: Vec<T>) -> Self {
        CoefField::new(self.side(), values).expect("finite solution")
    }
}

impl<T: Real> Nodal<T> for PairField<T> {
    fn to_stacked(&self) -> Vec<T> {
        self.stacked()
    }

    fn with_values(&self, values: Vec<T>) -> Self {
        PairField::from_stacked(&values, self.u1.len())
    }
}

/// Solves `A u = B f + load` by banded LU.
pub fn solve_forced<T: Real, F: Nodal<T>>(op: &OperatorPair<T>, f: &F) -> Result<F, AssemblyError> {
    let rhs = f.to_stacked();
    if rhs.len() != op.layout.len() {
        return Err(AssemblyError::SingularOperator(LinalgError::DimensionMismatch {
            expected: op.layout.len(),
            found: rhs.len(),
        }));
    }
    let rhs: Vec<T> = op
        .mass_apply(&rhs)
        .into_iter()
        .zip(&op.load)
        .map(|(a, &b)| a + b)
        .collect();
    let u = op.a.lu()?.solve(&rhs);
    if u.iter().any(|v| !v.is_finite()) {
        return Err(AssemblyError::InvalidParameter("non-finite solution".into()));
    }
    Ok(f.with_values(u))
}
