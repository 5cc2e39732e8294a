//! Principal eigenpairs by shifted inverse iteration.

use thiserror::Error;

use crate::assembly::{assemble_membrane, assemble_scalar, AssemblyError, Layout, OperatorPair};
use crate::fields::{CoefField, PairField, RobinSpec};
use crate::geometry::{Geometry, Side};
use crate::linalg::{LinalgError, Tridiag};
use crate::scalar::{dist_inf, dot, norm_inf, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("inverse iteration did not converge in {iterations} iterations (last change {change:e})")]
    NoConvergence { iterations: usize, change: f64 },
    #[error("eigenvector has nonpositive entry {value:e} at index {index}; refine the mesh")]
    NonPositiveEigenvector { index: usize, value: f64 },
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error("shifted operator is not positive definite: {0}")]
    BadShift(LinalgError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenOptions<T> {
    /// Stop when successive Rayleigh quotients differ by less than this (relative to max(1, |ν|)).
    pub rayleigh_tol: T,
    /// ... and successive normalized iterates differ by less than this.
    pub vector_tol: T,
    pub max_iterations: usize,
    /// Accepted residual `‖Aφ − νBφ‖∞ / (‖A‖∞ + |ν|‖B‖∞)`.
    pub residual_tol: T,
    /// Move the shift towards the Rayleigh quotient whenever an `LDLᵀ`
    /// inertia check certifies it stays below the principal eigenvalue.
    pub refine_shift: bool,
}

impl<T: Real> Default for EigenOptions<T> {
    fn default() -> Self {
        EigenOptions {
            rayleigh_tol: T::lit(1e-12),
            vector_tol: T::lit(1e-11),
            max_iterations: 10_000,
            residual_tol: T::lit(1e-9),
            refine_shift: true,
        }
    }
}

impl<T: Real> EigenOptions<T> {
    /// Tolerances scaled to the precision of `T`.
    pub fn for_precision() -> Self {
        let eps = T::epsilon();
        let base = Self::default();
        EigenOptions {
            rayleigh_tol: base.rayleigh_tol.max(eps * T::lit(16.0)),
            vector_tol: base.vector_tol.max(eps.sqrt() * T::lit(4.0)),
            residual_tol: base.residual_tol.max(eps.sqrt()),
            ..base
        }
    }
}

/// Principal eigenvalue with its positive eigenvector, normalized to `max = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair<T> {
    pub value: T,
    pub vector: Vec<T>,
    pub layout: Layout,
    pub iterations: usize,
    pub residual: T,
}

impl<T: Real> EigenPair<T> {
    /// Eigenfunction as a pair; `None` for a scalar problem.
    pub fn pair(&self) -> Option<PairField<T>> {
        match self.layout {
            Layout::Membrane { n1, .. } => Some(PairField::from_stacked(&self.vector, n1)),
            Layout::Scalar { .. } => None,
        }
    }

    /// Eigenfunction on one side; `None` for a membrane problem.
    pub fn field(&self) -> Option<CoefField<T>> {
        match self.layout {
            Layout::Scalar { side, .. } => CoefField::new(side, self.vector.clone()).ok(),
            Layout::Membrane { .. } => None,
        }
    }
}

fn rayleigh<T: Real>(a: &Tridiag<T>, b: &[T], x: &[T]) -> T {
    let bx: Vec<T> = x.iter().zip(b).map(|(&x, &m)| x * m).collect();
    dot(x, &a.matvec(x)) / dot(x, &bx)
}

/// `max_i Σ_j |A_ij| / b_i`.
fn row_scale<T: Real>(a: &Tridiag<T>, b: &[T]) -> T {
    let n = b.len();
    (0..n)
        .map(|i| {
            let mut s = a.diag[i].abs();
            if i > 0 {
                s = s + a.lower[i - 1].abs();
            }
            if i + 1 < n {
                s = s + a.upper[i].abs();
            }
            s / b[i]
        })
        .fold(T::zero(), T::max)
}

fn shifted<T: Real>(a: &Tridiag<T>, b: &[T], shift: T) -> Tridiag<T> {
    let minus: Vec<T> = b.iter().map(|&m| -shift * m).collect();
    a.plus_diagonal(&minus)
}

/// Principal pair of `A φ = ν B φ` with default options.
///
/// `c_lower` must not exceed the principal eigenvalue; the iteration starts
/// from the shift `c_lower − 1`.
pub fn principal_pair<T: Real>(op: &OperatorPair<T>, c_lower: T) -> Result<EigenPair<T>, EigenError> {
    principal_pair_with(op, c_lower, &EigenOptions::for_precision())
}

pub fn principal_pair_with<T: Real>(
    op: &OperatorPair<T>,
    c_lower: T,
    opts: &EigenOptions<T>,
) -> Result<EigenPair<T>, EigenError> {
    let a = &op.a;
    let b = &op.b;
    let mut shift = c_lower - T::one();
    let mut factor = shifted(a, b, shift)
        .ldl_positive()
        .map_err(EigenError::BadShift)?;
    let mut x = vec![T::one(); op.layout.len()];
    let mut rq_prev = rayleigh(a, b, &x);
    let mut step = T::lit(0.9);
    let mut change = T::infinity();
    // Roundoff floor of the Rayleigh quotient: cancellation in xᵀAx is
    // relative to the largest row of B⁻¹A, not to the quotient itself.
    let noise = T::epsilon() * T::lit(64.0) * row_scale(a, b);
    for it in 1..=opts.max_iterations {
        let bx: Vec<T> = x.iter().zip(b).map(|(&x, &m)| x * m).collect();
        let mut y = factor.solve(&bx);
        let pivot = y
            .iter()
            .copied()
            .fold(T::zero(), |m, v| if v.abs() > m.abs() { v } else { m });
        if pivot == T::zero() || !pivot.is_finite() {
            return Err(EigenError::NoConvergence {
                iterations: it,
                change: f64::NAN,
            });
        }
        for v in &mut y {
            *v = *v / pivot;
        }
        let rq = rayleigh(a, b, &y);
        change = dist_inf(&x, &y);
        x = y;
        let drq = (rq - rq_prev).abs();
        rq_prev = rq;
        let rq_tol = (opts.rayleigh_tol * rq.abs().max(T::one())).max(noise);
        if drq <= rq_tol && change <= opts.vector_tol {
            return finish(op, rq, x, it, opts);
        }
        if opts.refine_shift && rq > shift {
            let candidate = shift + step * (rq - shift);
            match shifted(a, b, candidate).ldl_positive() {
                Ok(f) => {
                    shift = candidate;
                    factor = f;
                }
                Err(_) => step = step * T::lit(0.5),
            }
        }
    }
    Err(EigenError::NoConvergence {
        iterations: opts.max_iterations,
        change: change.as_f64(),
    })
}

fn finish<T: Real>(
    op: &OperatorPair<T>,
    value: T,
    vector: Vec<T>,
    iterations: usize,
    opts: &EigenOptions<T>,
) -> Result<EigenPair<T>, EigenError> {
    if let Some((index, &v)) = vector.iter().enumerate().find(|(_, &v)| !(v > T::zero())) {
        return Err(EigenError::NonPositiveEigenvector {
            index,
            value: v.as_f64(),
        });
    }
    let ax = op.a.matvec(&vector);
    let r: Vec<T> = ax
        .iter()
        .zip(&vector)
        .zip(&op.b)
        .map(|((&ax, &x), &m)| ax - value * m * x)
        .collect();
    let scale = op.a.norm_inf() + value.abs() * op.mass_norm_inf();
    let residual = norm_inf(&r) / scale;
    if residual > opts.residual_tol {
        return Err(EigenError::NoConvergence {
            iterations,
            change: residual.as_f64(),
        });
    }
    Ok(EigenPair {
        value,
        vector,
        layout: op.layout,
        iterations,
        residual,
    })
}

/// Principal membrane pair for `(−dΔ + c1, −dΔ + c2)`.
pub fn membrane_pair<T: Real>(
    d: T,
    c1: &CoefField<T>,
    c2: &CoefField<T>,
    gamma1: T,
    gamma2: T,
    g: &Geometry<T>,
) -> Result<EigenPair<T>, EigenError> {
    let op = assemble_membrane(d, c1, c2, gamma1, gamma2, g)?;
    principal_pair(&op, c1.lower().min(c2.lower()))
}

/// Principal eigenvalue `Λ₁(−dΔ + c1, −dΔ + c2)` of the membrane problem.
pub fn lambda1<T: Real>(
    d: T,
    c1: &CoefField<T>,
    c2: &CoefField<T>,
    gamma1: T,
    gamma2: T,
    g: &Geometry<T>,
) -> Result<T, EigenError> {
    membrane_pair(d, c1, c2, gamma1, gamma2, g).map(|p| p.value)
}

/// Principal pair of the standalone problem `−dΔ + c` with Robin conditions.
pub fn scalar_pair<T: Real>(
    d: T,
    c: &CoefField<T>,
    robin: &RobinSpec<T>,
    g: &Geometry<T>,
    side: Side,
) -> Result<EigenPair<T>, EigenError> {
    let op = assemble_scalar(d, c, robin, g, side)?;
    principal_pair(&op, c.lower())
}

/// `σ1` (side 1, Robin `γ1` on the interface) and `σ2` (side 2, Robin `γ2`
/// on the interface, Neumann outside), both for `−Δ`.
pub fn sigma_uncoupled<T: Real>(g: &Geometry<T>, gamma1: T, gamma2: T) -> Result<(T, T), EigenError> {
    let sigma = |side, gamma| {
        let c = CoefField::constant(g, side, T::zero());
        scalar_pair(T::one(), &c, &RobinSpec::interface_robin(gamma), g, side).map(|p| p.value)
    };
    Ok((sigma(Side::One, gamma1)?, sigma(Side::Two, gamma2)?))
}
