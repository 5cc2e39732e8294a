//! Positive steady states of the logistic membrane system and its scalar
//! relatives, plus the increasing-boundary-data approximation of large solutions.

use log::warn;
use thiserror::Error;

use crate::assembly::{assemble_membrane, assemble_scalar, AssemblyError, Layout, Nodal};
use crate::eigen::{membrane_pair, scalar_pair, EigenError, EigenOptions, EigenPair};
use crate::fields::{Bc, CoefField, PairField, RobinSpec};
use crate::geometry::{Geometry, Side};
use crate::linalg::{LinalgError, Tridiag};
use crate::scalar::{norm_inf, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LogisticError {
    #[error("no positive solution: gate eigenvalue {lambda1:e} is not negative")]
    GateFailed { lambda1: f64 },
    #[error("nonlinear iteration did not converge after {iterations} iterations (last change {change:e})")]
    NoConvergence { iterations: usize, change: f64 },
    #[error("iterate lost positivity at node {index} in iteration {iteration}")]
    NegativeIterate { iteration: usize, index: usize },
    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),
    #[error("blow-up fit failed: {0}")]
    FitFailed(String),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogisticOptions<T> {
    /// Converged when `|u⁺ᵢ − uᵢ| ≤ step_tol · max(1, |uᵢ|)` at every node.
    pub step_tol: T,
    /// Monotone sweeps before handing over to Newton (when enabled).
    pub monotone_sweeps: usize,
    /// Hard cap on monotone sweeps.
    pub max_iterations: usize,
    /// Finish with damped Newton.
    pub newton: bool,
    pub newton_max: usize,
    pub max_halvings: usize,
    /// Warn and tighten tolerances when `|Λ₁|` falls below this.
    pub near_gate: T,
    pub eigen: EigenOptions<T>,
}

impl<T: Real> Default for LogisticOptions<T> {
    fn default() -> Self {
        LogisticOptions {
            step_tol: T::lit(1e-10),
            monotone_sweeps: 200,
            max_iterations: 100_000,
            newton: true,
            newton_max: 200,
            max_halvings: 30,
            near_gate: T::lit(1e-6),
            eigen: EigenOptions::for_precision(),
        }
    }
}

impl<T: Real> LogisticOptions<T> {
    /// Plain monotone iteration, no Newton stage.
    pub fn monotone_only() -> Self {
        LogisticOptions {
            newton: false,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LogisticStatus<T, F> {
    Positive(F),
    /// The gate eigenvalue, which is `≥ 0`.
    NoPositiveSolution(T),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogisticResult<T, F> {
    pub status: LogisticStatus<T, F>,
    pub iterations: usize,
    /// Nodewise relative residual of the discrete equations, see
    /// [`DiscreteLogistic::relative_residual`].
    pub residual: T,
    /// Gate eigenvalue, `None` when no gate applies.
    pub gate: Option<T>,
}

impl<T: Real, F> LogisticResult<T, F> {
    pub fn positive(&self) -> Option<&F> {
        match &self.status {
            LogisticStatus::Positive(f) => Some(f),
            LogisticStatus::NoPositiveSolution(_) => None,
        }
    }

    /// The solution, or `GateFailed` with the gate eigenvalue.
    pub fn into_positive(self) -> Result<F, LogisticError> {
        match self.status {
            LogisticStatus::Positive(f) => Ok(f),
            LogisticStatus::NoPositiveSolution(l) => Err(LogisticError::GateFailed {
                lambda1: l.as_f64(),
            }),
        }
    }
}

/// Discrete system `F(u) = K u + b∘(−β u + α u²) − load = 0`, where `K` is the
/// reaction-free form and `b` the lumped mass.
#[derive(Clone, Debug)]
pub struct DiscreteLogistic<T> {
    pub form: Tridiag<T>,
    pub mass: Vec<T>,
    pub beta: Vec<T>,
    pub alpha: Vec<T>,
    pub load: Vec<T>,
    pub layout: Layout,
}

impl<T: Real> DiscreteLogistic<T> {
    pub fn residual(&self, u: &[T]) -> Vec<T> {
        let ku = self.form.matvec(u);
        (0..u.len())
            .map(|i| {
                ku[i] + self.mass[i] * u[i] * (self.alpha[i] * u[i] - self.beta[i]) - self.load[i]
            })
            .collect()
    }

    /// `max_i |F_i(u)| / b_i`.
    pub fn scaled_residual(&self, u: &[T]) -> T {
        self.residual(u)
            .iter()
            .zip(&self.mass)
            .fold(T::zero(), |m, (r, b)| m.max((*r / *b).abs()))
    }

    /// Residual together with the nodewise magnitude `D_i` of the terms
    /// making up `F_i` (plus `b_i`, so that a vanishing field is not divided
    /// by zero).
    fn residual_with_scale(&self, u: &[T]) -> (Vec<T>, Vec<T>) {
        let n = u.len();
        let t = &self.form;
        let scale = (0..n)
            .map(|i| {
                let mut s = (t.diag[i] * u[i]).abs();
                if i > 0 {
                    s = s + (t.lower[i - 1] * u[i - 1]).abs();
                }
                if i + 1 < n {
                    s = s + (t.upper[i] * u[i + 1]).abs();
                }
                let m = self.mass[i];
                s + m * ((self.beta[i] * u[i]).abs() + self.alpha[i] * u[i] * u[i] + T::one())
                    + self.load[i].abs()
            })
            .collect();
        (self.residual(u), scale)
    }

    /// `max_i |F_i(u)| / D_i` with `D_i` the magnitude of the terms in `F_i`.
    /// Roundoff keeps this near machine epsilon even when `u` spans many
    /// orders of magnitude.
    pub fn relative_residual(&self, u: &[T]) -> T {
        let (f, scale) = self.residual_with_scale(u);
        f.iter()
            .zip(&scale)
            .fold(T::zero(), |m, (r, s)| m.max(r.abs() / *s))
    }

    /// `F(u) ≥ 0` nodewise, up to roundoff.
    pub fn is_supersolution(&self, u: &[T]) -> bool {
        let (f, scale) = self.residual_with_scale(u);
        let tol = T::epsilon() * T::lit(64.0);
        f.iter().zip(&scale).all(|(r, s)| *r >= -tol * *s)
    }

    pub fn jacobian(&self, u: &[T]) -> Tridiag<T> {
        let d: Vec<T> = (0..u.len())
            .map(|i| self.mass[i] * (T::lit(2.0) * self.alpha[i] * u[i] - self.beta[i]))
            .collect();
        self.form.plus_diagonal(&d)
    }

    /// `ρ = 2 max(α s + |β|_M)`: makes `u ↦ βu − αu² + ρu` nondecreasing on `[0, s]`.
    pub fn monotone_shift(&self, s: T) -> T {
        let beta_m = norm_inf(&self.beta);
        let alpha_m = self.alpha.iter().copied().fold(T::zero(), T::max);
        T::lit(2.0) * (alpha_m * s + beta_m)
    }

    /// Monotone iterates `u⁺ = (K + ρB)⁻¹ (b∘(βu − αu² + ρu) + load)`.
    pub fn monotone(&self, start: Vec<T>, rho: T) -> Result<MonotoneIter<'_, T>, LinalgError> {
        let shifted: Vec<T> = self.mass.iter().map(|&m| rho * m).collect();
        let factor = self.form.plus_diagonal(&shifted).ldl_positive()?;
        Ok(MonotoneIter {
            problem: self,
            factor,
            rho,
            current: start,
        })
    }

    /// Damped Newton from `start`. Steps are halved until the iterate stays
    /// positive and the residual decreases.
    pub fn newton(&self, start: Vec<T>, opts: &LogisticOptions<T>) -> Result<(Vec<T>, usize), LogisticError> {
        let mut u = start;
        let mut fnorm = self.scaled_residual(&u);
        let mut change = T::infinity();
        for it in 1..=opts.newton_max {
            let f = self.residual(&u);
            let rhs: Vec<T> = f.iter().map(|&v| -v).collect();
            let delta = self.jacobian(&u).lu()?.solve(&rhs);
            let size = relative_size(&delta, &u);
            if size <= opts.step_tol {
                let next: Vec<T> = u.iter().zip(&delta).map(|(&a, &b)| a + b).collect();
                if next.iter().all(|&v| v > T::zero()) {
                    u = next;
                }
                return Ok((u, it));
            }
            // From a supersolution, convexity keeps full Newton steps above
            // the solution, so they are taken without a residual test.
            let above = self.is_supersolution(&u);
            let mut t = T::one();
            let mut accepted = None;
            for _ in 0..=opts.max_halvings {
                let cand: Vec<T> = u.iter().zip(&delta).map(|(&a, &b)| a + t * b).collect();
                if cand.iter().all(|&v| v > T::zero()) {
                    let cn = self.scaled_residual(&cand);
                    if cn < fnorm
                        || (above && self.is_supersolution(&cand))
                        || self.relative_residual(&cand) <= T::epsilon() * T::lit(64.0)
                    {
                        accepted = Some((cand, cn));
                        break;
                    }
                }
                t = t * T::lit(0.5);
            }
            let Some((cand, cn)) = accepted else {
                return Err(LogisticError::NoConvergence {
                    iterations: it,
                    change: change.as_f64(),
                });
            };
            change = size * t;
            u = cand;
            fnorm = cn;
        }
        Err(LogisticError::NoConvergence {
            iterations: opts.newton_max,
            change: change.as_f64(),
        })
    }

    /// Monotone iteration from the supersolution `start`, handing over to
    /// Newton after `monotone_sweeps` sweeps when enabled.
    pub fn solve_from_above(&self, start: Vec<T>, opts: &LogisticOptions<T>) -> Result<(Vec<T>, usize), LogisticError> {
        let rho = self.monotone_shift(norm_inf(&start));
        let mut iter = self.monotone(start, rho)?;
        let mut iterations = 0;
        let mut change = T::infinity();
        let first_budget = if opts.newton {
            opts.monotone_sweeps.min(opts.max_iterations)
        } else {
            opts.max_iterations
        };
        let mut budget = first_budget;
        loop {
            while iterations < budget {
                let next = iter.step(iterations)?;
                iterations += 1;
                change = next;
                if change <= opts.step_tol {
                    break;
                }
            }
            let converged = change <= opts.step_tol;
            if opts.newton {
                match self.newton(iter.current().to_vec(), opts) {
                    Ok((u, n)) => return Ok((u, iterations + n)),
                    Err(e) if converged || budget >= opts.max_iterations => {
                        if converged {
                            return Ok((iter.into_current(), iterations));
                        }
                        return Err(e);
                    }
                    Err(_) => budget = opts.max_iterations,
                }
            } else if converged {
                return Ok((iter.into_current(), iterations));
            } else {
                return Err(LogisticError::NoConvergence {
                    iterations,
                    change: change.as_f64(),
                });
            }
        }
    }
}

/// `max_i |δᵢ| / max(1, |uᵢ|)`.
fn relative_size<T: Real>(delta: &[T], u: &[T]) -> T {
    delta
        .iter()
        .zip(u)
        .fold(T::zero(), |m, (d, v)| m.max(d.abs() / v.abs().max(T::one())))
}

/// Iterator state for the monotone scheme.
pub struct MonotoneIter<'a, T> {
    problem: &'a DiscreteLogistic<T>,
    factor: crate::linalg::Ldl<T>,
    rho: T,
    current: Vec<T>,
}

impl<T: Real> MonotoneIter<'_, T> {
    pub fn current(&self) -> &[T] {
        &self.current
    }

    pub fn into_current(self) -> Vec<T> {
        self.current
    }

    /// Advances one sweep, returning `max_i |u⁺ᵢ − uᵢ| / max(1, |uᵢ|)`.
    pub fn step(&mut self, iteration: usize) -> Result<T, LogisticError> {
        let p = self.problem;
        let rhs: Vec<T> = (0..self.current.len())
            .map(|i| {
                let u = self.current[i];
                p.mass[i] * u * (p.beta[i] - p.alpha[i] * u + self.rho) + p.load[i]
            })
            .collect();
        let next = self.factor.solve(&rhs);
        if let Some(index) = next.iter().position(|&v| !(v > T::zero())) {
            return Err(LogisticError::NegativeIterate { iteration, index });
        }
        let diff: Vec<T> = next.iter().zip(&self.current).map(|(a, b)| *a - *b).collect();
        let change = relative_size(&diff, &self.current);
        self.current = next;
        Ok(change)
    }
}

/// Coefficients of the membrane logistic system
/// `−dΔuᵢ = uᵢ(βᵢ − αᵢuᵢ)` with the flux coupling `γ1, γ2`.
#[derive(Clone, Debug, PartialEq)]
pub struct MembraneLogistic<T> {
    pub d: T,
    pub beta1: CoefField<T>,
    pub beta2: CoefField<T>,
    pub alpha1: CoefField<T>,
    pub alpha2: CoefField<T>,
    pub gamma1: T,
    pub gamma2: T,
}

impl<T: Real> MembraneLogistic<T> {
    /// Constant growth rates and crowding coefficients.
    pub fn constant(g: &Geometry<T>, d: T, beta: (T, T), alpha: (T, T), gamma: (T, T)) -> Self {
        MembraneLogistic {
            d,
            beta1: CoefField::constant(g, Side::One, beta.0),
            beta2: CoefField::constant(g, Side::Two, beta.1),
            alpha1: CoefField::constant(g, Side::One, alpha.0),
            alpha2: CoefField::constant(g, Side::Two, alpha.1),
            gamma1: gamma.0,
            gamma2: gamma.1,
        }
    }

    /// The a-priori bound `max{(β1)_M/(α1)_L, (β2)_M/(α2)_L}`.
    pub fn upper_bound(&self) -> T {
        (self.beta1.upper() / self.alpha1.lower()).max(self.beta2.upper() / self.alpha2.lower())
    }

    fn validate(&self, g: &Geometry<T>) -> Result<(), LogisticError> {
        for f in [&self.beta1, &self.beta2, &self.alpha1, &self.alpha2] {
            f.check(g).map_err(AssemblyError::from)?;
        }
        if !(self.alpha1.lower() > T::zero() && self.alpha2.lower() > T::zero()) {
            return Err(LogisticError::InvalidCoefficient("alpha must be positive".into()));
        }
        Ok(())
    }

    /// Principal pair of the gate operator `(−dΔ − β1, −dΔ − β2)`.
    pub fn gate(&self, g: &Geometry<T>) -> Result<EigenPair<T>, LogisticError> {
        let c1 = self.beta1.map(|v| -v);
        let c2 = self.beta2.map(|v| -v);
        Ok(membrane_pair(self.d, &c1, &c2, self.gamma1, self.gamma2, g)?)
    }

    pub fn discrete(&self, g: &Geometry<T>) -> Result<DiscreteLogistic<T>, LogisticError> {
        let zero1 = CoefField::constant(g, Side::One, T::zero());
        let zero2 = CoefField::constant(g, Side::Two, T::zero());
        let op = assemble_membrane(self.d, &zero1, &zero2, self.gamma1, self.gamma2, g)?;
        let stack = |a: &CoefField<T>, b: &CoefField<T>| {
            a.values().iter().chain(b.values()).copied().collect::<Vec<T>>()
        };
        Ok(DiscreteLogistic {
            form: op.form_part,
            mass: op.b,
            beta: stack(&self.beta1, &self.beta2),
            alpha: stack(&self.alpha1, &self.alpha2),
            load: op.load,
            layout: op.layout,
        })
    }
}

fn tightened<T: Real>(opts: &LogisticOptions<T>, gate: T) -> LogisticOptions<T> {
    if gate.abs() >= opts.near_gate {
        return *opts;
    }
    warn!(
        "gate eigenvalue {:e} is within {:e} of zero; the positive solution is of the same order",
        gate, opts.near_gate
    );
    let factor = (gate.abs() / opts.near_gate).max(T::epsilon());
    LogisticOptions {
        step_tol: (opts.step_tol * factor).max(T::epsilon() * T::lit(4.0)),
        ..*opts
    }
}

/// Unique positive solution of the membrane system, or the reason it does not exist.
pub fn solve_logistic_membrane<T: Real>(
    problem: &MembraneLogistic<T>,
    g: &Geometry<T>,
) -> Result<LogisticResult<T, PairField<T>>, LogisticError> {
    solve_logistic_membrane_with(problem, g, &LogisticOptions::default())
}

pub fn solve_logistic_membrane_with<T: Real>(
    problem: &MembraneLogistic<T>,
    g: &Geometry<T>,
    opts: &LogisticOptions<T>,
) -> Result<LogisticResult<T, PairField<T>>, LogisticError> {
    problem.validate(g)?;
    let gate = problem.gate(g)?.value;
    if gate >= T::zero() {
        return Ok(LogisticResult {
            status: LogisticStatus::NoPositiveSolution(gate),
            iterations: 0,
            residual: T::zero(),
            gate: Some(gate),
        });
    }
    let opts = tightened(opts, gate);
    let sys = problem.discrete(g)?;
    let s = problem.upper_bound();
    let (u, iterations) = sys.solve_from_above(vec![s; sys.layout.len()], &opts)?;
    let residual = sys.relative_residual(&u);
    Ok(LogisticResult {
        status: LogisticStatus::Positive(PairField::from_stacked(&u, g.nodes(Side::One))),
        iterations,
        residual,
        gate: Some(gate),
    })
}

/// Damped Newton started from `ε·Φ`, `Φ` the gate eigenfunction and `ε` a
/// fraction of the largest value keeping `εΦ` a subsolution. Steps that
/// cannot be damped into a decrease are replaced by monotone sweeps, which
/// increase from a subsolution.
pub fn solve_membrane_from_below<T: Real>(
    problem: &MembraneLogistic<T>,
    g: &Geometry<T>,
    opts: &LogisticOptions<T>,
) -> Result<PairField<T>, LogisticError> {
    problem.validate(g)?;
    let pair = problem.gate(g)?;
    if pair.value >= T::zero() {
        return Err(LogisticError::GateFailed {
            lambda1: pair.value.as_f64(),
        });
    }
    let sys = problem.discrete(g)?;
    let peak = pair
        .vector
        .iter()
        .zip(&sys.alpha)
        .fold(T::zero(), |m, (&p, &a)| m.max(p * a));
    let eps = T::lit(0.9) * (-pair.value) / peak;
    let mut u: Vec<T> = pair.vector.iter().map(|&p| eps * p).collect();
    let rho = sys.monotone_shift(problem.upper_bound().max(norm_inf(&u)));
    // Iterates from a subsolution increase towards the solution; a Newton
    // result is only trusted if it stays above the latest of them, which
    // rules out collapse onto the trivial state.
    let floor = T::lit(1e-8);
    for _ in 0..opts.max_iterations / opts.monotone_sweeps.max(1) {
        match sys.newton(u.clone(), opts) {
            Ok((sol, _)) if sol.iter().zip(&u).all(|(&s, &b)| s >= b * (T::one() - floor)) => {
                return Ok(PairField::from_stacked(&sol, g.nodes(Side::One)));
            }
            Ok(_) | Err(LogisticError::NoConvergence { .. }) => {
                let mut it = sys.monotone(u, rho)?;
                for k in 0..opts.monotone_sweeps {
                    it.step(k)?;
                }
                u = it.into_current();
            }
            Err(e) => return Err(e),
        }
    }
    Err(LogisticError::NoConvergence {
        iterations: opts.max_iterations,
        change: f64::NAN,
    })
}

/// Standalone logistic problem `−dΔu = u(β − αu)` on one side with
/// `∂ₙu + g u = h` on each boundary piece.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarLogistic<T> {
    pub d: T,
    pub beta: CoefField<T>,
    pub alpha: CoefField<T>,
    pub robin: RobinSpec<T>,
}

impl<T: Real> ScalarLogistic<T> {
    fn validate(&self, g: &Geometry<T>) -> Result<(), LogisticError> {
        self.beta.check(g).map_err(AssemblyError::from)?;
        self.alpha.check(g).map_err(AssemblyError::from)?;
        if self.beta.side() != self.alpha.side() {
            return Err(LogisticError::InvalidCoefficient(
                "beta and alpha live on different sides".into(),
            ));
        }
        if !(self.alpha.lower() > T::zero()) {
            return Err(LogisticError::InvalidCoefficient("alpha must be positive".into()));
        }
        self.robin.validate().map_err(AssemblyError::from)?;
        Ok(())
    }

    pub fn side(&self) -> Side {
        self.beta.side()
    }

    pub fn discrete(&self, g: &Geometry<T>) -> Result<DiscreteLogistic<T>, LogisticError> {
        let side = self.side();
        let zero = CoefField::constant(g, side, T::zero());
        let op = assemble_scalar(self.d, &zero, &self.robin, g, side)?;
        Ok(DiscreteLogistic {
            form: op.form_part,
            mass: op.b,
            beta: self.beta.values().to_vec(),
            alpha: self.alpha.values().to_vec(),
            load: op.load,
            layout: op.layout,
        })
    }

    /// Supersolution `Sψ` with `−dΔψ + ρψ = 1`, `∂ₙψ + gψ = 1`.
    fn datum_supersolution(&self, g: &Geometry<T>) -> Result<Vec<T>, LogisticError> {
        let side = self.side();
        let rho = T::one() + norm_inf(self.beta.values());
        let ones = |bc: Bc<T>| Bc::Robin {
            g: bc.coefficient(),
            h: T::one(),
        };
        let robin = RobinSpec {
            interface: ones(self.robin.interface),
            outer: ones(self.robin.outer),
        };
        let c = CoefField::constant(g, side, rho);
        let op = assemble_scalar(self.d, &c, &robin, g, side)?;
        let psi = crate::assembly::solve_forced(&op, &CoefField::constant(g, side, T::one()))?;
        let psi = psi.values();
        let mut s = self.robin.interface.datum();
        if g.outer_measure(side).is_some() {
            s = s.max(self.robin.outer.datum());
        }
        for ((&p, &b), &a) in psi.iter().zip(self.beta.values()).zip(self.alpha.values()) {
            s = s.max((p * (b + rho) - T::one()) / (a * p * p));
        }
        let s = s.max(T::epsilon());
        Ok(psi.iter().map(|&p| s * p).collect())
    }
}

/// Solves the standalone problem. With zero boundary data the principal
/// eigenvalue of `−dΔ − β` decides existence; with a nonzero datum a positive
/// solution always exists.
pub fn solve_logistic_scalar<T: Real>(
    problem: &ScalarLogistic<T>,
    g: &Geometry<T>,
) -> Result<LogisticResult<T, CoefField<T>>, LogisticError> {
    solve_logistic_scalar_with(problem, g, &LogisticOptions::default())
}

pub fn solve_logistic_scalar_with<T: Real>(
    problem: &ScalarLogistic<T>,
    g: &Geometry<T>,
    opts: &LogisticOptions<T>,
) -> Result<LogisticResult<T, CoefField<T>>, LogisticError> {
    problem.validate(g)?;
    let side = problem.side();
    let sys = problem.discrete(g)?;
    let (start, gate, opts) = if problem.robin.has_datum(g, side) {
        (problem.datum_supersolution(g)?, None, *opts)
    } else {
        let c = problem.beta.map(|v| -v);
        let gate = scalar_pair(problem.d, &c, &problem.robin, g, side)?.value;
        if gate >= T::zero() {
            return Ok(LogisticResult {
                status: LogisticStatus::NoPositiveSolution(gate),
                iterations: 0,
                residual: T::zero(),
                gate: Some(gate),
            });
        }
        let s = problem.beta.upper() / problem.alpha.lower();
        (vec![s; sys.layout.len()], Some(gate), tightened(opts, gate))
    };
    let (u, iterations) = sys.solve_from_above(start, &opts)?;
    let residual = sys.relative_residual(&u);
    Ok(LogisticResult {
        status: LogisticStatus::Positive(problem.beta.with_values(u)),
        iterations,
        residual,
        gate,
    })
}

/// Log-log fit `v ≈ C δ^{−p}` near the interface.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlowupFit<T> {
    pub exponent: T,
    pub prefactor: T,
    /// Root-mean-square residual of the fit in `ln v`.
    pub residual: T,
    pub points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LargeSolutionOptions<T> {
    /// Fit window in multiples of the side-2 mesh width.
    pub window: (T, T),
    /// Interior compact `{δ ≥ interior}` used for saturation increments.
    pub interior: T,
    pub max_fit_residual: T,
    pub logistic: LogisticOptions<T>,
}

impl<T: Real> Default for LargeSolutionOptions<T> {
    fn default() -> Self {
        LargeSolutionOptions {
            window: (T::lit(5.0), T::lit(50.0)),
            interior: T::lit(0.2),
            max_fit_residual: T::lit(0.1),
            logistic: LogisticOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LargeSolution<T> {
    pub m_values: Vec<T>,
    pub fields: Vec<CoefField<T>>,
    pub fit: BlowupFit<T>,
    /// `min (v_{m_{k+1}} − v_{m_k}) / max(1, v_{m_k})` over all nodes, per
    /// consecutive pair. Nonnegative up to roundoff.
    pub min_increments: Vec<T>,
    /// `max |v_{m_{k+1}} − v_{m_k}|` over `{δ ≥ interior}`, per consecutive pair.
    pub interior_increments: Vec<T>,
}

impl<T: Real> LargeSolution<T> {
    /// Approximation at the largest boundary datum.
    pub fn last(&self) -> &CoefField<T> {
        self.fields.last().expect("at least one field")
    }
}

/// Solves `−Δv = v(λ2 − α2 v)` on side 2 with `∂ₙv + γ2 v = m` on the
/// interface for every `m`, then fits the blow-up profile at the largest `m`.
pub fn approximate_large_solution<T: Real>(
    lambda2: T,
    alpha2: &CoefField<T>,
    gamma2: T,
    g: &Geometry<T>,
    m_list: &[T],
    opts: &LargeSolutionOptions<T>,
) -> Result<LargeSolution<T>, LogisticError> {
    if m_list.len() < 2 || m_list.windows(2).any(|w| !(w[0] < w[1])) || !(m_list[0] > T::zero()) {
        return Err(LogisticError::InvalidCoefficient(
            "m_list must be positive and strictly increasing".into(),
        ));
    }
    if alpha2.side() != Side::Two {
        return Err(LogisticError::InvalidCoefficient("alpha2 must live on side 2".into()));
    }
    let beta = CoefField::constant(g, Side::Two, lambda2);
    let fields = m_list
        .iter()
        .map(|&m| {
            let problem = ScalarLogistic {
                d: T::one(),
                beta: beta.clone(),
                alpha: alpha2.clone(),
                robin: RobinSpec {
                    interface: Bc::Robin { g: gamma2, h: m },
                    outer: Bc::Neumann,
                },
            };
            solve_logistic_scalar_with(&problem, g, &opts.logistic)?.into_positive()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let delta: Vec<T> = g
        .mesh(Side::Two)
        .iter()
        .map(|&x| g.distance_to_interface(x))
        .collect();
    let mut min_increments = Vec::new();
    let mut interior_increments = Vec::new();
    for w in fields.windows(2) {
        let (a, b) = (w[0].values(), w[1].values());
        min_increments.push(
            a.iter()
                .zip(b)
                .fold(T::infinity(), |m, (x, y)| m.min((*y - *x) / x.abs().max(T::one()))),
        );
        interior_increments.push(
            a.iter()
                .zip(b)
                .zip(&delta)
                .filter(|(_, &dl)| dl >= opts.interior)
                .fold(T::zero(), |m, ((x, y), _)| m.max((*y - *x).abs())),
        );
    }
    let h = g.h(Side::Two);
    let (lo, hi) = (opts.window.0 * h, opts.window.1 * h);
    let last = fields.last().expect("nonempty").values();
    let pts: Vec<(T, T)> = delta
        .iter()
        .zip(last)
        .filter(|(&dl, _)| dl >= lo && dl <= hi)
        .map(|(&dl, &v)| (dl.ln(), v.ln()))
        .collect();
    let fit = fit_power_law(&pts)?;
    if !(fit.residual <= opts.max_fit_residual) {
        return Err(LogisticError::FitFailed(format!(
            "log-log residual {} exceeds {}",
            fit.residual, opts.max_fit_residual
        )));
    }
    Ok(LargeSolution {
        m_values: m_list.to_vec(),
        fields,
        fit,
        min_increments,
        interior_increments,
    })
}

/// Least squares `ln v = ln C − p ln δ` on `(ln δ, ln v)` points.
pub fn fit_power_law<T: Real>(pts: &[(T, T)]) -> Result<BlowupFit<T>, LogisticError> {
    if pts.len() < 3 {
        return Err(LogisticError::FitFailed(format!(
            "{} points in the fit window, need at least 3",
            pts.len()
        )));
    }
    let n = T::count(pts.len());
    let mx = pts.iter().map(|p| p.0).sum::<T>() / n;
    let my = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxx: T = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: T = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: T = pts
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum();
    Ok(BlowupFit {
        exponent: -slope,
        prefactor: intercept.exp(),
        residual: (ss / n).sqrt(),
        points: pts.len(),
    })
}
