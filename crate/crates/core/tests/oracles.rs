//! Independent oracles: dense eigensolves, transcendental roots and shooting
//! solutions of the continuous problems, against the library's solvers.

use nalgebra::{DMatrix, SymmetricEigen};

use membrana::assembly::{assemble_membrane, OperatorPair};
use membrana::eigen::{membrane_pair, scalar_pair, sigma_uncoupled};
use membrana::fields::{Bc, CoefField, RobinSpec};
use membrana::geometry::{build_geometry, Geometry, GeometrySpec, Side};
use membrana::logistic::{solve_logistic_membrane, solve_logistic_scalar, MembraneLogistic, ScalarLogistic};

fn two_interval(x0: f64, a: f64, x1: f64, n1: usize, n2: usize) -> Geometry<f64> {
    build_geometry(&GeometrySpec::two_interval(x0, a, x1, n1, n2)).unwrap()
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    assert!(flo * f(hi) < 0.0, "no sign change on [{lo}, {hi}]");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Smallest eigenvalue of `B^{-1/2} A B^{-1/2}` by a dense symmetric solve.
fn dense_smallest(op: &OperatorPair<f64>) -> f64 {
    let n = op.b.len();
    let s: Vec<f64> = op.b.iter().map(|m| 1.0 / m.sqrt()).collect();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = op.a.diag[i] * s[i] * s[i];
        if i + 1 < n {
            m[(i, i + 1)] = op.a.upper[i] * s[i] * s[i + 1];
            m[(i + 1, i)] = op.a.lower[i] * s[i + 1] * s[i];
        }
    }
    SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

fn pinned_operator(nodes: usize) -> OperatorPair<f64> {
    let g = two_interval(0.0, 0.5, 1.0, nodes, nodes);
    let c1 = CoefField::constant(&g, Side::One, 0.0);
    let c2 = CoefField::constant(&g, Side::Two, 1.0);
    assemble_membrane(1.0, &c1, &c2, 1.0, 2.0, &g).unwrap()
}

/// Continuous principal eigenvalue of `(−u1'' , −u2'' + u2)` on
/// `(0, 0.5) ∪ (0.5, 1)` with `γ1 = 1`, `γ2 = 2`: `u1 = cos(√ν x)`,
/// `u2 = C cosh(√(1 − ν)(1 − x))`.
fn pinned_continuous() -> f64 {
    let (a, g1, g2) = (0.5, 1.0, 2.0);
    let mismatch = |nu: f64| {
        let s = nu.sqrt();
        let (u1, du1) = ((s * a).cos(), -s * (s * a).sin());
        let k = (1.0 - nu).sqrt();
        let trace = u1 + du1 / g1;
        let c = trace / (k * (1.0 - a)).cosh();
        let du2 = -c * k * (k * (1.0 - a)).sinh();
        du2 - g2 * du1 / g1
    };
    bisect(mismatch, 1e-6, 1.0 - 1e-9)
}

/// Value pinned from the dense oracle at 513+513 nodes, Richardson
/// extrapolated from 257+257.
const PINNED_MEMBRANE_EIGENVALUE: f64 = 0.282_739_557;

#[test]
fn membrane_eigenvalue_matches_dense_solve() {
    let op = pinned_operator(513);
    let dense = dense_smallest(&op);
    let g = two_interval(0.0, 0.5, 1.0, 513, 513);
    let c1 = CoefField::constant(&g, Side::One, 0.0);
    let c2 = CoefField::constant(&g, Side::Two, 1.0);
    let iterative = membrane_pair(1.0, &c1, &c2, 1.0, 2.0, &g).unwrap().value;
    assert!((iterative - dense).abs() <= 1e-8, "{iterative} vs {dense}");
}

#[test]
fn membrane_eigenvalue_pinned_and_extrapolated() {
    let coarse = dense_smallest(&pinned_operator(257));
    let fine = dense_smallest(&pinned_operator(513));
    let extrapolated = fine + (fine - coarse) / 3.0;
    let continuous = pinned_continuous();
    assert!((extrapolated - continuous).abs() <= 1e-7, "{extrapolated} vs {continuous}");
    assert!((extrapolated - PINNED_MEMBRANE_EIGENVALUE).abs() <= 1e-9, "{extrapolated}");
}

#[test]
fn robin_eigenvalue_solves_tangent_equation() {
    // s tan s = 1 on (0, π/2)
    let s = bisect(|s| s * s.tan() - 1.0, 0.1, 1.5);
    let exact = s * s;
    assert!((exact - 0.740174).abs() < 1e-6);
    let errors: Vec<f64> = [201, 401, 801]
        .iter()
        .map(|&n| {
            let g = two_interval(-1.0, 0.0, 1.0, 3, n);
            let c = CoefField::constant(&g, Side::Two, 0.0);
            let v = scalar_pair(1.0, &c, &RobinSpec::interface_robin(1.0), &g, Side::Two)
                .unwrap()
                .value;
            (v - exact).abs()
        })
        .collect();
    assert!(errors[2] < 1e-6, "{errors:?}");
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.1, "order {order}");
    }
}

#[test]
fn uncoupled_sigma_two_solves_half_tangent_equation() {
    // side 2 is (0.5, 1): s tan(s/2) = 1
    let s = bisect(|s| s * (0.5 * s).tan() - 1.0, 0.1, 3.0);
    let g = two_interval(0.0, 0.5, 1.0, 801, 801);
    let (sigma1, sigma2) = sigma_uncoupled(&g, 1.0, 1.0).unwrap();
    assert!((sigma2 - s * s).abs() < 1e-5, "{sigma2} vs {}", s * s);
    // by symmetry of the two halves
    assert!((sigma1 - sigma2).abs() < 1e-9);
}

/// RK4 integration of `u'' = f(u)` from `x` over `length` (negative to go
/// left), returning `(u, u')` at the end.
fn rk4(f: impl Fn(f64) -> f64, mut u: f64, mut du: f64, length: f64, steps: usize) -> (f64, f64) {
    let h = length / steps as f64;
    for _ in 0..steps {
        let (k1u, k1v) = (du, f(u));
        let (k2u, k2v) = (du + 0.5 * h * k1v, f(u + 0.5 * h * k1u));
        let (k3u, k3v) = (du + 0.5 * h * k2v, f(u + 0.5 * h * k2u));
        let (k4u, k4v) = (du + h * k3v, f(u + h * k3u));
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        du += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    (u, du)
}

/// Shooting solution of `−u'' = u(β − u)` on `(0, 0.5) ∪ (0.5, 1)` with
/// constant `β1`, `β2`, Neumann ends and membrane coupling `γ1 = γ2 = 1`.
/// Returns `(u1(0), u1(a), u2(a), u2(1))`.
fn membrane_shooting(beta1: f64, beta2: f64, guess: (f64, f64)) -> (f64, f64, f64, f64) {
    let a = 0.5;
    let steps = 4000;
    let ends = |p: f64, q: f64| {
        let (u1, du1) = rk4(|u| -u * (beta1 - u), p, 0.0, a, steps);
        let (u2, du2) = rk4(|u| -u * (beta2 - u), q, 0.0, -(1.0 - a), steps);
        // u1'(a) = γ1 (u2 − u1), u2'(a) = γ2 (u2 − u1)
        ([du1 - (u2 - u1), du2 - (u2 - u1)], u1, u2)
    };
    let (mut p, mut q) = guess;
    for _ in 0..50 {
        let (r, _, _) = ends(p, q);
        if r[0].abs().max(r[1].abs()) < 1e-14 {
            break;
        }
        let e = 1e-7;
        let (rp, _, _) = ends(p + e, q);
        let (rq, _, _) = ends(p, q + e);
        let j = [[(rp[0] - r[0]) / e, (rq[0] - r[0]) / e], [(rp[1] - r[1]) / e, (rq[1] - r[1]) / e]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        p -= (r[0] * j[1][1] - r[1] * j[0][1]) / det;
        q -= (j[0][0] * r[1] - j[1][0] * r[0]) / det;
    }
    let (r, u1a, u2a) = ends(p, q);
    assert!(r[0].abs().max(r[1].abs()) < 1e-10, "shooting did not converge: {r:?}");
    (p, u1a, u2a, q)
}

#[test]
fn membrane_logistic_matches_shooting() {
    let exact = membrane_shooting(2.0, -1.0, (1.5, 0.3));
    let errors: Vec<f64> = [257, 513]
        .iter()
        .map(|&n| {
            let g = two_interval(0.0, 0.5, 1.0, n, n);
            let p = MembraneLogistic::constant(&g, 1.0, (2.0, -1.0), (1.0, 1.0), (1.0, 1.0));
            let u = solve_logistic_membrane(&p, &g).unwrap().into_positive().unwrap();
            let (u1, u2) = (u.side(Side::One).values(), u.side(Side::Two).values());
            [
                u1[0] - exact.0,
                u1[n - 1] - exact.1,
                u2[0] - exact.2,
                u2[n - 1] - exact.3,
            ]
            .iter()
            .fold(0.0f64, |m, e| m.max(e.abs()))
        })
        .collect();
    assert!(errors[1] < 1e-5, "{errors:?}");
    // Richardson check: second order
    let order = (errors[0] / errors[1]).log2();
    assert!((order - 2.0).abs() < 0.2, "order {order}");
}

#[test]
fn scalar_logistic_with_datum_matches_shooting() {
    // −u'' = u(−5 − u) on (0, 1), −u'(0) + u(0) = 2, u'(1) = 0
    let shoot = |q: f64| {
        let (u, du) = rk4(|u| -u * (-5.0 - u), q, 0.0, -1.0, 4000);
        (-du + u - 2.0, u)
    };
    let q = bisect(|q| shoot(q).0, 1e-6, 2.0);
    let u0 = shoot(q).1;
    let g = two_interval(-1.0, 0.0, 1.0, 3, 1025);
    let p = ScalarLogistic {
        d: 1.0,
        beta: CoefField::constant(&g, Side::Two, -5.0),
        alpha: CoefField::constant(&g, Side::Two, 1.0),
        robin: RobinSpec {
            interface: Bc::Robin { g: 1.0, h: 2.0 },
            outer: Bc::Neumann,
        },
    };
    let u = solve_logistic_scalar(&p, &g).unwrap().into_positive().unwrap();
    let v = u.values();
    assert!(v.iter().all(|&x| x > 0.0));
    assert!((v[0] - u0).abs() < 1e-5, "{} vs {u0}", v[0]);
    assert!((v[v.len() - 1] - q).abs() < 1e-5, "{} vs {q}", v[v.len() - 1]);
}

#[test]
fn picone_residual_small_at_257_nodes() {
    let r = membrana::checks::picone_instance(257).unwrap();
    assert!(r < 1e-4, "{r}");
}
