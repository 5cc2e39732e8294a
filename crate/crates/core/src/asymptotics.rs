//! Parameter sweeps against limit formulas, and the existence curve `H`.

use std::collections::BTreeMap;
use std::hash::Hasher;
use std::io::Write;
use std::path::Path;

use fnv::FnvHasher;
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::eigen::{lambda1, scalar_pair, sigma_uncoupled, EigenError};
use crate::fields::{Bc, CoefField, PairField, RobinSpec};
use crate::geometry::{Geometry, Side};
use crate::logistic::{
    approximate_large_solution, solve_logistic_membrane_with, solve_logistic_scalar_with,
    LargeSolutionOptions, LogisticError, LogisticOptions, LogisticStatus, MembraneLogistic,
    ScalarLogistic,
};
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum AsymptoticsError {
    #[error("d = {d:e} is below the resolvable range d >= {min_d:e} (refine the mesh)")]
    Unresolved { d: f64, min_d: f64 },
    #[error("could not bracket the curve at lambda2 = {lambda2:e}")]
    BracketFailed { lambda2: f64 },
    #[error("invalid parameter list: {0}")]
    InvalidList(String),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Logistic(#[from] LogisticError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// One sweep point. For field comparisons `value` and `target` are taken at
/// the node of largest deviation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow<T> {
    pub param: T,
    pub value: T,
    pub target: T,
    pub deviation: T,
}

/// Which end of the parameter range a limit is taken at.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tail {
    Low,
    High,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable<T> {
    pub name: String,
    /// The limit statement being checked.
    pub check: String,
    pub rows: Vec<SweepRow<T>>,
    pub metadata: BTreeMap<String, Value>,
}

pub const SWEEP_COLUMNS: [&str; 4] = ["param", "value_or_summary", "target", "deviation"];

impl<T: Real> SweepTable<T> {
    pub fn new(name: &str, check: &str) -> Self {
        SweepTable {
            name: name.into(),
            check: check.into(),
            rows: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_rows(mut self, rows: Vec<SweepRow<T>>) -> Self {
        self.rows = rows;
        self
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Value>) {
        self.metadata.insert(key.into(), value.into());
    }

    pub fn row(&self, param: T) -> Option<&SweepRow<T>> {
        self.rows.iter().find(|r| r.param == param)
    }

    /// Parameters strictly monotone and deviations finite.
    pub fn is_well_formed(&self) -> bool {
        let inc = self.rows.windows(2).all(|w| w[0].param < w[1].param);
        let dec = self.rows.windows(2).all(|w| w[0].param > w[1].param);
        (inc || dec) && self.rows.iter().all(|r| r.deviation.is_finite())
    }

    /// Deviations shrink toward `tail` among rows beyond `split`, each step
    /// allowed to grow by the fraction `noise` (plus an absolute floor
    /// `floor` for deviations at roundoff level).
    pub fn tail_monotone(&self, tail: Tail, split: T, noise: T, floor: T) -> bool {
        let mut rows: Vec<&SweepRow<T>> = self
            .rows
            .iter()
            .filter(|r| match tail {
                Tail::Low => r.param <= split,
                Tail::High => r.param >= split,
            })
            .collect();
        rows.sort_by(|a, b| a.param.partial_cmp(&b.param).expect("finite parameters"));
        if tail == Tail::Low {
            rows.reverse();
        }
        rows.windows(2)
            .all(|w| w[1].deviation <= (T::one() + noise) * w[0].deviation + floor)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(SWEEP_COLUMNS)?;
        for r in &self.rows {
            w.write_record([r.param, r.value, r.target, r.deviation].map(|v| format!("{v:e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn sidecar(&self) -> Value {
        json!({
            "name": self.name,
            "check": self.check,
            "columns": SWEEP_COLUMNS,
            "rows": self.rows.len(),
            "metadata": self.metadata,
        })
    }

    /// Writes `<dir>/<name>.csv` and `<dir>/<name>.json`.
    pub fn write(&self, dir: &Path) -> Result<(), AsymptoticsError> {
        std::fs::create_dir_all(dir)?;
        self.write_csv(std::fs::File::create(dir.join(format!("{}.csv", self.name)))?)?;
        let mut f = std::fs::File::create(dir.join(format!("{}.json", self.name)))?;
        serde_json::to_writer_pretty(&mut f, &self.sidecar())?;
        writeln!(f)?;
        Ok(())
    }
}

/// Stable fingerprint of sampled fields, for sidecar metadata.
pub fn fingerprint<T: Real>(parts: &[&[T]]) -> String {
    let mut h = FnvHasher::default();
    for p in parts {
        h.write_usize(p.len());
        for v in *p {
            h.write_u64(v.as_f64().to_bits());
        }
    }
    format!("{:016x}", h.finish())
}

fn geometry_hash<T: Real>(g: &Geometry<T>) -> String {
    fingerprint(&[g.mesh(Side::One), g.mesh(Side::Two), &[T::count(g.dim())]])
}

fn check_list<T: Real>(list: &[T], positive: bool) -> Result<(), AsymptoticsError> {
    if list.is_empty() {
        return Err(AsymptoticsError::InvalidList("empty".into()));
    }
    if list.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(AsymptoticsError::InvalidList("values must be strictly increasing".into()));
    }
    if positive && !(list[0] > T::zero()) {
        return Err(AsymptoticsError::InvalidList("values must be positive".into()));
    }
    if list.iter().any(|v| !v.is_finite()) {
        return Err(AsymptoticsError::InvalidList("values must be finite".into()));
    }
    Ok(())
}

/// Smallest diffusion whose boundary layers the mesh resolves: `(10 h)²`.
pub fn min_resolvable_d<T: Real>(g: &Geometry<T>) -> T {
    let h = T::lit(10.0) * g.h_max();
    h * h
}

fn check_resolution<T: Real>(d_list: &[T], g: &Geometry<T>) -> Result<(), AsymptoticsError> {
    let min_d = min_resolvable_d(g);
    match d_list.iter().find(|&&d| d < min_d * (T::one() - T::lit(1e-9))) {
        Some(&d) => Err(AsymptoticsError::Unresolved {
            d: d.as_f64(),
            min_d: min_d.as_f64(),
        }),
        None => Ok(()),
    }
}

/// `(γ2 ∫f1 + γ1 ∫f2) / (γ2 ∫g1 + γ1 ∫g2)`.
fn weighted_ratio<T: Real>(
    f: (&CoefField<T>, &CoefField<T>),
    w: (&CoefField<T>, &CoefField<T>),
    gamma: (T, T),
    g: &Geometry<T>,
) -> T {
    let num = gamma.1 * f.0.integrate(g) + gamma.0 * f.1.integrate(g);
    let den = gamma.1 * w.0.integrate(g) + gamma.0 * w.1.integrate(g);
    num / den
}

/// Largest nodal deviation between a pair and a target pair, restricted to
/// nodes accepted by `keep`. Returns `(value, target, deviation)` at the worst node.
fn worst_node<T: Real>(
    u: &PairField<T>,
    target: &PairField<T>,
    g: &Geometry<T>,
    keep: impl Fn(Side, T) -> bool,
) -> (T, T, T) {
    let mut worst = (T::zero(), T::zero(), -T::one());
    for side in [Side::One, Side::Two] {
        let (a, b) = (u.side(side).values(), target.side(side).values());
        for ((x, &v), &t) in g.mesh(side).iter().zip(a).zip(b) {
            if keep(side, *x) && (v - t).abs() > worst.2 {
                worst = (v, t, (v - t).abs());
            }
        }
    }
    worst
}

/// `Λ₁(d)` against the small-diffusion limit `min{(c1)_L, (c2)_L}` (rows
/// with `d ≤ 1`) and the large-diffusion weighted mean (rows with `d > 1`).
pub fn sweep_eigen_d<T: Real>(
    d_list: &[T],
    c1: &CoefField<T>,
    c2: &CoefField<T>,
    gamma1: T,
    gamma2: T,
    g: &Geometry<T>,
) -> Result<SweepTable<T>, AsymptoticsError> {
    check_list(d_list, true)?;
    check_resolution(d_list, g)?;
    let small = c1.lower().min(c2.lower());
    let ones = (CoefField::constant(g, Side::One, T::one()), CoefField::constant(g, Side::Two, T::one()));
    let large = weighted_ratio((c1, c2), (&ones.0, &ones.1), (gamma1, gamma2), g);
    let rows = d_list
        .par_iter()
        .map(|&d| {
            let value = lambda1(d, c1, c2, gamma1, gamma2, g)?;
            let target = if d <= T::one() { small } else { large };
            Ok(SweepRow { param: d, value, target, deviation: (value - target).abs() })
        })
        .collect::<Result<Vec<_>, EigenError>>()?;
    let mut t = SweepTable::new("sweep_eigen_d", "principal eigenvalue limits as d -> 0 and d -> infinity")
        .with_rows(rows);
    t.meta("small_d_target", small.as_f64());
    t.meta("large_d_target", large.as_f64());
    t.meta("split", 1.0);
    t.meta("gamma", vec![gamma1.as_f64(), gamma2.as_f64()]);
    t.meta("geometry_hash", geometry_hash(g));
    t.meta("coefficient_hash", fingerprint(&[c1.values(), c2.values()]));
    Ok(t)
}

/// Existence record for one sweep point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateRecord<T> {
    pub param: T,
    pub lambda1: T,
    pub exists: bool,
}

fn gates_json<T: Real>(gates: &[GateRecord<T>]) -> Value {
    gates
        .iter()
        .map(|r| json!({"param": r.param.as_f64(), "lambda1": r.lambda1.as_f64(), "exists": r.exists}))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogisticSweep<T> {
    pub table: SweepTable<T>,
    pub gates: Vec<GateRecord<T>>,
    /// Smallest listed parameter from which on no positive solution exists.
    pub nonexistence_from: Option<T>,
    pub solutions: Vec<Option<PairField<T>>>,
}

/// Logistic steady states over `d`: small-`d` rows against `β₊/α` nodewise,
/// large-`d` rows against the weighted constant (when its numerator is
/// positive). The `d` stored in `problem` is ignored.
pub fn sweep_logistic_d<T: Real>(
    d_list: &[T],
    problem: &MembraneLogistic<T>,
    g: &Geometry<T>,
    opts: &LogisticOptions<T>,
) -> Result<LogisticSweep<T>, AsymptoticsError> {
    check_list(d_list, true)?;
    check_resolution(d_list, g)?;
    let p = problem;
    let small = PairField::new(
        p.beta1.zip_with(&p.alpha1, |b, a| b.max(T::zero()) / a),
        p.beta2.zip_with(&p.alpha2, |b, a| b.max(T::zero()) / a),
    );
    let numerator = p.gamma2 * p.beta1.integrate(g) + p.gamma1 * p.beta2.integrate(g);
    let large = weighted_ratio((&p.beta1, &p.beta2), (&p.alpha1, &p.alpha2), (p.gamma1, p.gamma2), g);
    let results = d_list
        .par_iter()
        .map(|&d| {
            let inst = MembraneLogistic { d, ..p.clone() };
            solve_logistic_membrane_with(&inst, g, opts)
        })
        .collect::<Result<Vec<_>, LogisticError>>()?;
    let mut rows = Vec::new();
    let mut gates = Vec::new();
    let mut solutions = Vec::new();
    for (&d, r) in d_list.iter().zip(results) {
        let gate = r.gate.unwrap_or(T::nan());
        match r.status {
            LogisticStatus::Positive(u) => {
                gates.push(GateRecord { param: d, lambda1: gate, exists: true });
                if d <= T::one() {
                    let (value, target, deviation) = worst_node(&u, &small, g, |_, _| true);
                    rows.push(SweepRow { param: d, value, target, deviation });
                } else if numerator > T::zero() {
                    let target = PairField::constant(g, large);
                    let (value, target, deviation) = worst_node(&u, &target, g, |_, _| true);
                    rows.push(SweepRow { param: d, value, target, deviation });
                }
                solutions.push(Some(u));
            }
            LogisticStatus::NoPositiveSolution(l) => {
                gates.push(GateRecord { param: d, lambda1: l, exists: false });
                solutions.push(None);
            }
        }
    }
    let nonexistence_from = gates
        .iter()
        .rposition(|r| r.exists)
        .map_or(Some(0), |i| (i + 1 < gates.len()).then_some(i + 1))
        .map(|i| gates[i].param);
    let mut t = SweepTable::new("sweep_logistic_d", "logistic steady state limits as d -> 0 and d -> infinity")
        .with_rows(rows);
    t.meta("small_d_target", "positive part of beta over alpha, nodewise");
    t.meta("large_d_target", large.as_f64());
    t.meta("large_d_numerator", numerator.as_f64());
    t.meta("split", 1.0);
    t.meta("gates", gates_json(&gates));
    t.meta("nonexistence_from", nonexistence_from.map(|v| v.as_f64()));
    t.meta("geometry_hash", geometry_hash(g));
    t.meta(
        "coefficient_hash",
        fingerprint(&[p.beta1.values(), p.beta2.values(), p.alpha1.values(), p.alpha2.values()]),
    );
    Ok(LogisticSweep { table: t, gates, nonexistence_from, solutions })
}

/// Equal growth rates `λ1 = λ2 = λ`, `d = 1`: `θ/λ` against the small-`λ`
/// constant (rows with `λ ≤ 1`) and `1/αᵢ` on `{δ ≥ interior}` (rows with `λ > 1`).
///
/// Two small-`λ` constants are recorded: the plain volume ratio and the
/// `γ`-weighted one. Rows use the plain ratio; the sidecar lists the
/// deviation from both and names the one the smallest `λ` is closer to.
#[allow(clippy::too_many_arguments)]
pub fn sweep_theta_over_lambda<T: Real>(
    lambda_list: &[T],
    alpha1: &CoefField<T>,
    alpha2: &CoefField<T>,
    gamma1: T,
    gamma2: T,
    g: &Geometry<T>,
    interior: T,
    opts: &LogisticOptions<T>,
) -> Result<SweepTable<T>, AsymptoticsError> {
    check_list(lambda_list, true)?;
    let ones = (CoefField::constant(g, Side::One, T::one()), CoefField::constant(g, Side::Two, T::one()));
    let plain = weighted_ratio((&ones.0, &ones.1), (alpha1, alpha2), (T::one(), T::one()), g);
    let weighted = weighted_ratio((&ones.0, &ones.1), (alpha1, alpha2), (gamma1, gamma2), g);
    let inverse = PairField::new(alpha1.map(|a| T::one() / a), alpha2.map(|a| T::one() / a));
    let solved = lambda_list
        .par_iter()
        .map(|&lambda| {
            let p = MembraneLogistic {
                d: T::one(),
                beta1: CoefField::constant(g, Side::One, lambda),
                beta2: CoefField::constant(g, Side::Two, lambda),
                alpha1: alpha1.clone(),
                alpha2: alpha2.clone(),
                gamma1,
                gamma2,
            };
            let u = solve_logistic_membrane_with(&p, g, opts)?.into_positive()?;
            Ok(u.map(|v| v / lambda))
        })
        .collect::<Result<Vec<_>, LogisticError>>()?;
    let mut rows = Vec::new();
    let mut both = Vec::new();
    for (&lambda, ratio) in lambda_list.iter().zip(&solved) {
        if lambda <= T::one() {
            let (v, t, dev) = worst_node(ratio, &PairField::constant(g, plain), g, |_, _| true);
            let (_, _, dev_w) = worst_node(ratio, &PairField::constant(g, weighted), g, |_, _| true);
            both.push(json!({"param": lambda.as_f64(), "plain": dev.as_f64(), "weighted": dev_w.as_f64()}));
            rows.push(SweepRow { param: lambda, value: v, target: t, deviation: dev });
        } else {
            let keep = |_, x: T| g.distance_to_interface(x) >= interior;
            let (value, target, deviation) = worst_node(ratio, &inverse, g, keep);
            rows.push(SweepRow { param: lambda, value, target, deviation });
        }
    }
    let closer = both.first().map(|first| {
        let p = first["plain"].as_f64().unwrap_or(f64::NAN);
        let w = first["weighted"].as_f64().unwrap_or(f64::NAN);
        if (p - w).abs() <= f64::EPSILON * 16.0 * p.abs().max(1.0) {
            "both"
        } else if p < w {
            "plain"
        } else {
            "weighted"
        }
    });
    let mut t = SweepTable::new("sweep_theta_over_lambda", "equal growth rates: theta/lambda as lambda -> 0 and lambda -> infinity")
        .with_rows(rows);
    t.meta("small_lambda_target_plain", plain.as_f64());
    t.meta("small_lambda_target_weighted", weighted.as_f64());
    t.meta("small_lambda_deviations", Value::Array(both));
    t.meta("small_lambda_closer_to", closer);
    t.meta("large_lambda_target", "1/alpha_i on the interior compact");
    t.meta("interior", interior.as_f64());
    t.meta("split", 1.0);
    t.meta("geometry_hash", geometry_hash(g));
    t.meta("coefficient_hash", fingerprint(&[alpha1.values(), alpha2.values()]));
    Ok(t)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HSample<T> {
    pub lambda2: T,
    pub h: T,
    /// `|Λ₁(−h, −λ2)|` at the returned root.
    pub residual: T,
    pub bracket: (T, T),
}

#[derive(Clone, Debug, PartialEq)]
pub struct HCurve<T> {
    pub samples: Vec<HSample<T>>,
    pub sigma1: T,
    pub sigma2: T,
}

pub const HCURVE_COLUMNS: [&str; 3] = ["lambda2", "h", "residual"];

impl<T: Real> HCurve<T> {
    pub fn strictly_decreasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].h < w[0].h)
    }

    pub fn max_residual(&self) -> T {
        self.samples.iter().fold(T::zero(), |m, s| m.max(s.residual))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(HCURVE_COLUMNS)?;
        for s in &self.samples {
            w.write_record([s.lambda2, s.h, s.residual].map(|v| format!("{v:e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn sidecar(&self) -> Value {
        json!({
            "name": "hcurve",
            "columns": HCURVE_COLUMNS,
            "sigma1": self.sigma1.as_f64(),
            "sigma2": self.sigma2.as_f64(),
            "samples": self.samples.len(),
        })
    }

    /// Writes `<dir>/hcurve.csv` and `<dir>/hcurve.json`.
    pub fn write(&self, dir: &Path) -> Result<(), AsymptoticsError> {
        std::fs::create_dir_all(dir)?;
        self.write_csv(std::fs::File::create(dir.join("hcurve.csv"))?)?;
        let mut f = std::fs::File::create(dir.join("hcurve.json"))?;
        serde_json::to_writer_pretty(&mut f, &self.sidecar())?;
        writeln!(f)?;
        Ok(())
    }
}

/// `Λ₁(−λ1, −λ2)` with `d = 1`.
pub fn growth_gate<T: Real>(lambda1_: T, lambda2: T, gamma1: T, gamma2: T, g: &Geometry<T>) -> Result<T, EigenError> {
    let c1 = CoefField::constant(g, Side::One, -lambda1_);
    let c2 = CoefField::constant(g, Side::Two, -lambda2);
    lambda1(T::one(), &c1, &c2, gamma1, gamma2, g)
}

/// Root `λ1 = H(λ2)` of `Λ₁(−λ1, −λ2) = 0` by bisection; the gate is
/// strictly decreasing in `λ1`.
pub fn h_value<T: Real>(
    lambda2: T,
    gamma1: T,
    gamma2: T,
    sigma1: T,
    g: &Geometry<T>,
    tol: T,
) -> Result<HSample<T>, AsymptoticsError> {
    let f = |l1: T| growth_gate(l1, lambda2, gamma1, gamma2, g);
    let fail = || AsymptoticsError::BracketFailed { lambda2: lambda2.as_f64() };
    let mut margin = T::one();
    let mut hi = sigma1 + margin;
    let mut f_hi = f(hi)?;
    while f_hi >= T::zero() {
        margin = margin * T::lit(2.0);
        hi = sigma1 + margin;
        f_hi = f(hi)?;
        if margin > T::lit(1e12) {
            return Err(fail());
        }
    }
    margin = T::one();
    let mut lo = lambda2.min(hi) - margin;
    let mut f_lo = f(lo)?;
    while f_lo <= T::zero() {
        margin = margin * T::lit(2.0);
        lo = lambda2.min(hi) - margin;
        f_lo = f(lo)?;
        if margin > T::lit(1e12) {
            return Err(fail());
        }
    }
    let bracket = (lo, hi);
    let mut mid = (lo + hi) * T::lit(0.5);
    let mut f_mid = f(mid)?;
    while hi - lo > tol * mid.abs().max(T::one()) && f_mid != T::zero() {
        if f_mid > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        let next = (lo + hi) * T::lit(0.5);
        if next == mid {
            break;
        }
        mid = next;
        f_mid = f(mid)?;
    }
    Ok(HSample { lambda2, h: mid, residual: f_mid.abs(), bracket })
}

/// Samples of `H` at each `λ2 < σ2`.
pub fn trace_h<T: Real>(
    lambda2_list: &[T],
    gamma1: T,
    gamma2: T,
    g: &Geometry<T>,
    tol: T,
) -> Result<HCurve<T>, AsymptoticsError> {
    check_list(lambda2_list, false)?;
    let (sigma1, sigma2) = sigma_uncoupled(g, gamma1, gamma2)?;
    if let Some(&bad) = lambda2_list.iter().find(|&&l| l >= sigma2) {
        return Err(AsymptoticsError::InvalidList(format!(
            "lambda2 = {bad} is not below sigma2 = {sigma2}"
        )));
    }
    let samples = lambda2_list
        .par_iter()
        .map(|&l2| h_value(l2, gamma1, gamma2, sigma1, g, tol))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(HCurve { samples, sigma1, sigma2 })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lambda1Options<T> {
    pub logistic: LogisticOptions<T>,
    pub large: LargeSolutionOptions<T>,
}

impl<T: Real> Default for Lambda1Options<T> {
    fn default() -> Self {
        Lambda1Options {
            logistic: LogisticOptions::default(),
            large: LargeSolutionOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lambda1Sweep<T> {
    /// `min θ1` for `λ1 > σ1`; target is the minimum of the subsolution bound,
    /// deviation the smallest nodal slack `θ1 − bound` (nonnegative when the bound holds).
    pub growth: SweepTable<T>,
    /// `θ2` against the large-solution approximation on `{δ ≥ interior}`, `λ1 > 0`.
    pub large: SweepTable<T>,
    /// `sup θ1 · (−λ1)^{1/2}` for `λ1 < 0`; target is the geometric mean over rows.
    pub decay: SweepTable<T>,
    /// `θ2` against the standalone side-2 steady state, `λ1 < 0`.
    pub w2: SweepTable<T>,
    pub gates: Vec<GateRecord<T>>,
    pub sigma1: T,
    pub sigma2: T,
}

impl<T: Real> Lambda1Sweep<T> {
    pub fn tables(&self) -> [&SweepTable<T>; 4] {
        [&self.growth, &self.large, &self.decay, &self.w2]
    }

    /// `max/min` of the decay column.
    pub fn decay_spread(&self) -> T {
        let (lo, hi) = self
            .decay
            .rows
            .iter()
            .fold((T::infinity(), T::zero()), |(a, b), r| (a.min(r.value), b.max(r.value)));
        hi / lo
    }
}

/// Fixed `λ2`, varying `λ1`, `d = 1`. `m_list` drives the large-solution
/// approximation; pass an empty list to skip it.
#[allow(clippy::too_many_arguments)]
pub fn sweep_lambda1<T: Real>(
    lambda2: T,
    lambda1_list: &[T],
    alpha1: &CoefField<T>,
    alpha2: &CoefField<T>,
    gamma1: T,
    gamma2: T,
    g: &Geometry<T>,
    m_list: &[T],
    opts: &Lambda1Options<T>,
) -> Result<Lambda1Sweep<T>, AsymptoticsError> {
    check_list(lambda1_list, false)?;
    let (sigma1, sigma2) = sigma_uncoupled(g, gamma1, gamma2)?;
    let zero1 = CoefField::constant(g, Side::One, T::zero());
    let phi1 = scalar_pair(T::one(), &zero1, &RobinSpec::interface_robin(gamma1), g, Side::One)?
        .field()
        .expect("scalar layout");
    let phi_max = phi1.upper();
    let interior = opts.large.interior;
    let results = lambda1_list
        .par_iter()
        .map(|&l1| {
            let p = MembraneLogistic {
                d: T::one(),
                beta1: CoefField::constant(g, Side::One, l1),
                beta2: CoefField::constant(g, Side::Two, lambda2),
                alpha1: alpha1.clone(),
                alpha2: alpha2.clone(),
                gamma1,
                gamma2,
            };
            solve_logistic_membrane_with(&p, g, &opts.logistic)
        })
        .collect::<Result<Vec<_>, LogisticError>>()?;
    let large_solution = if m_list.is_empty() || !lambda1_list.iter().any(|&l| l > T::zero()) {
        None
    } else {
        Some(approximate_large_solution(lambda2, alpha2, gamma2, g, m_list, &opts.large)?)
    };
    let w2 = if lambda2 > sigma2 && lambda1_list.iter().any(|&l| l < T::zero()) {
        let p = ScalarLogistic {
            d: T::one(),
            beta: CoefField::constant(g, Side::Two, lambda2),
            alpha: alpha2.clone(),
            robin: RobinSpec { interface: Bc::robin(gamma2), outer: Bc::Neumann },
        };
        solve_logistic_scalar_with(&p, g, &opts.logistic)?.positive().cloned()
    } else {
        None
    };
    let interior_of = |side: Side, x: T| side == Side::Two && g.distance_to_interface(x) >= interior;
    let (mut growth, mut large, mut decay, mut w2_rows, mut gates) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (&l1, r) in lambda1_list.iter().zip(results) {
        let gate = r.gate.unwrap_or(T::nan());
        let u = match r.status {
            LogisticStatus::Positive(u) => u,
            LogisticStatus::NoPositiveSolution(l) => {
                gates.push(GateRecord { param: l1, lambda1: l, exists: false });
                continue;
            }
        };
        gates.push(GateRecord { param: l1, lambda1: gate, exists: true });
        if l1 > sigma1 {
            let scale = (l1 - sigma1) / (alpha1.upper() * phi_max);
            let bound = phi1.map(|p| scale * p);
            let slack = u
                .u1
                .values()
                .iter()
                .zip(bound.values())
                .fold(T::infinity(), |m, (v, b)| m.min(*v - *b));
            growth.push(SweepRow { param: l1, value: u.u1.lower(), target: bound.lower(), deviation: slack });
        }
        if l1 > T::zero() {
            if let Some(ls) = &large_solution {
                let target = PairField::new(u.u1.clone(), ls.last().clone());
                let (value, target, deviation) = worst_node(&u, &target, g, interior_of);
                large.push(SweepRow { param: l1, value, target, deviation });
            }
        } else {
            let scaled = u.u1.upper() * (-l1).sqrt();
            decay.push(SweepRow { param: l1, value: scaled, target: T::zero(), deviation: T::zero() });
            if let Some(w) = &w2 {
                let target = PairField::new(u.u1.clone(), w.clone());
                let (value, target, deviation) = worst_node(&u, &target, g, |s, _| s == Side::Two);
                w2_rows.push(SweepRow { param: l1, value, target, deviation });
            }
        }
    }
    if !decay.is_empty() {
        let logs: T = decay.iter().map(|r| r.value.ln()).sum::<T>() / T::count(decay.len());
        let c = logs.exp();
        for r in &mut decay {
            r.target = c;
            r.deviation = (r.value - c).abs();
        }
    }
    let hash = geometry_hash(g);
    let coef = fingerprint(&[alpha1.values(), alpha2.values()]);
    let finish = |name: &str, check: &str, rows| {
        let mut t = SweepTable::new(name, check).with_rows(rows);
        t.meta("lambda2", lambda2.as_f64());
        t.meta("sigma1", sigma1.as_f64());
        t.meta("sigma2", sigma2.as_f64());
        t.meta("geometry_hash", hash.clone());
        t.meta("coefficient_hash", coef.clone());
        t.meta("gates", gates_json(&gates));
        t
    };
    let mut large_t = finish("sweep_lambda1_large", "theta_2 approaches the large solution as lambda1 -> infinity", large);
    large_t.meta("interior", interior.as_f64());
    if let Some(ls) = &large_solution {
        large_t.meta("blowup_exponent", ls.fit.exponent.as_f64());
        large_t.meta("blowup_prefactor", ls.fit.prefactor.as_f64());
        large_t.meta("m_list", ls.m_values.iter().map(|m| m.as_f64()).collect::<Vec<_>>());
    }
    let sweep = Lambda1Sweep {
        growth: finish("sweep_lambda1_growth", "min theta_1 grows without bound as lambda1 -> infinity", growth),
        large: large_t,
        decay: finish("sweep_lambda1_decay", "sup theta_1 * sqrt(-lambda1) stays bounded as lambda1 -> -infinity", decay),
        w2: finish("sweep_lambda1_w2", "theta_2 approaches the standalone side-2 state as lambda1 -> -infinity", w2_rows),
        gates,
        sigma1,
        sigma2,
    };
    Ok(sweep)
}
