//! Convex Tikhonov regularization `‖Ax − y‖² + α·R(x)` for ℓ¹, ℓ^{3/2} and
//! 1-D total variation penalties, solved with FISTA, together with the second
//! Bregman iterate and the difference-based parameter choice functionals
//! built from it.

mod tv;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

pub use tv::tv1d_prox;

use crate::error::{Error, Result};
use crate::par::Exec;
use crate::path::AlphaGrid;
use crate::spectral::{compute_svd, SpectralProblem};

/// A proper convex penalty with a computable proximity operator.
pub trait Penalty: Sync {
    fn value(&self, x: &[f64]) -> f64;
    /// `argmin_x ½‖x − v‖² + t·R(x)`.
    fn prox(&self, t: f64, v: &[f64]) -> Vec<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PenaltyKind {
    L1,
    /// `Σ |x_i|^{3/2}`
    Lp32,
    Tv1d,
}

impl PenaltyKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::L1 => "l1",
            Self::Lp32 => "lp32",
            Self::Tv1d => "tv",
        }
    }
}

impl fmt::Display for PenaltyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PenaltyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l1" => Ok(Self::L1),
            "lp32" | "l3/2" | "lp_3_2" => Ok(Self::Lp32),
            "tv" | "tv1d" => Ok(Self::Tv1d),
            other => Err(Error::param(format!("unknown penalty {other:?}"))),
        }
    }
}

pub fn soft_threshold(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

// Stationarity of ½(x − v)² + t|x|^{3/2} with x = sign(v)s²: 2s² + 3ts − 2|v| = 0.
fn lp32_prox_scalar(v: f64, t: f64) -> f64 {
    let s = (-3.0 * t + (9.0 * t * t + 16.0 * v.abs()).sqrt()) / 4.0;
    v.signum() * s * s
}

impl Penalty for PenaltyKind {
    fn value(&self, x: &[f64]) -> f64 {
        match self {
            Self::L1 => x.iter().map(|v| v.abs()).sum(),
            Self::Lp32 => x.iter().map(|v| v.abs().powf(1.5)).sum(),
            Self::Tv1d => x.windows(2).map(|w| (w[1] - w[0]).abs()).sum(),
        }
    }

    fn prox(&self, t: f64, v: &[f64]) -> Vec<f64> {
        match self {
            Self::L1 => v.iter().map(|&vi| soft_threshold(vi, t)).collect(),
            Self::Lp32 => v.iter().map(|&vi| lp32_prox_scalar(vi, t)).collect(),
            Self::Tv1d => tv1d_prox(v, t),
        }
    }
}

/// Linear forward operator as seen by the convex solvers.
pub trait Operator: Sync {
    fn domain_dim(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
    fn adjoint(&self, y: &[f64]) -> Vec<f64>;
    /// `‖A‖²`
    fn norm_sq(&self) -> f64;
}

impl Operator for SpectralProblem {
    fn domain_dim(&self) -> usize {
        SpectralProblem::domain_dim(self)
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        SpectralProblem::apply(self, x)
    }
    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        SpectralProblem::adjoint(self, y)
    }
    fn norm_sq(&self) -> f64 {
        self.sigma_max().powi(2)
    }
}

/// Dense matrix with its spectral norm computed once.
pub struct DenseOperator {
    a: DMatrix<f64>,
    norm_sq: f64,
}

impl DenseOperator {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        let s = compute_svd(&a)?;
        Ok(Self { norm_sq: s.sigma[0].powi(2), a })
    }
}

impl Operator for DenseOperator {
    fn domain_dim(&self) -> usize {
        self.a.ncols()
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (&self.a * DVector::from_column_slice(x)).iter().copied().collect()
    }
    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.a.tr_mul(&DVector::from_column_slice(y)).iter().copied().collect()
    }
    fn norm_sq(&self) -> f64 {
        self.norm_sq
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FistaOptions {
    pub max_iter: usize,
    /// Relative objective change that counts as stagnation.
    pub tol: f64,
    /// Number of iterations the change is measured over.
    pub window: usize,
    /// Largest iterate change over the window, relative to `1 + ‖x‖_∞`.
    /// Objective stagnation alone only pins `x` to about `√tol`.
    pub step_tol: f64,
}

impl Default for FistaOptions {
    fn default() -> Self {
        Self { max_iter: 20_000, tol: 1e-10, window: 10, step_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexSolveResult {
    pub alpha: f64,
    pub x: Vec<f64>,
    /// Value of the (possibly tilted) functional that was minimized.
    pub objective: f64,
    pub penalty_value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `ξ ∈ ∂R(x)` recovered from first-order optimality.
    pub subgradient: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn residual_sq<O: Operator + ?Sized>(op: &O, x: &[f64], y: &[f64]) -> f64 {
    op.apply(x).iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum()
}

/// Minimizes `‖Ax − y‖² + α(R(x) − ⟨tilt, x⟩)` by FISTA with step `1/(2‖A‖²)`.
/// Returns the best iterate seen.
pub fn fista_solve_tilted<O, P>(
    op: &O,
    y: &[f64],
    alpha: f64,
    penalty: &P,
    tilt: Option<&[f64]>,
    x0: Option<&[f64]>,
    opts: &FistaOptions,
) -> Result<ConvexSolveResult>
where
    O: Operator + ?Sized,
    P: Penalty + ?Sized,
{
    let n = op.domain_dim();
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::param(format!("alpha must be positive, got {alpha}")));
    }
    if tilt.is_some_and(|t| t.len() != n) || x0.is_some_and(|x| x.len() != n) {
        return Err(Error::param("tilt or start vector has the wrong length"));
    }
    if opts.window == 0 || opts.max_iter == 0 {
        return Err(Error::param("FISTA needs positive window and iteration cap"));
    }
    let lip = 2.0 * op.norm_sq();
    let t_prox = alpha / lip;
    let objective = |x: &[f64]| {
        let lin = tilt.map_or(0.0, |t| dot(t, x));
        residual_sq(op, x, y) + alpha * (penalty.value(x) - lin)
    };

    let mut x_prev = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut z = x_prev.clone();
    let mut tk = 1.0f64;
    // (value, iterate, prox input); the prox input is absent for the start vector
    let mut best = (objective(&x_prev), x_prev.clone(), None::<Vec<f64>>);
    let mut history = vec![best.0];
    let mut snapshots = std::collections::VecDeque::from([x_prev.clone()]);
    let mut converged = false;
    let mut iterations = 0;
    let mut v = vec![0.0; n];
    for it in 1..=opts.max_iter {
        iterations = it;
        let r: Vec<f64> = op.apply(&z).iter().zip(y).map(|(a, b)| a - b).collect();
        let g = op.adjoint(&r);
        for i in 0..n {
            v[i] = z[i] - 2.0 * g[i] / lip + tilt.map_or(0.0, |t| t_prox * t[i]);
        }
        let x = penalty.prox(t_prox, &v);
        let f = objective(&x);
        if f < best.0 {
            best = (f, x.clone(), Some(v.clone()));
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * tk * tk).sqrt());
        let mom = (tk - 1.0) / t_next;
        for i in 0..n {
            z[i] = x[i] + mom * (x[i] - x_prev[i]);
        }
        tk = t_next;
        history.push(f);
        snapshots.push_back(x.clone());
        if snapshots.len() > opts.window + 1 {
            snapshots.pop_front();
        }
        if history.len() > opts.window {
            let old = history[history.len() - 1 - opts.window];
            let scale = f.abs().max(old.abs());
            let step = x.iter().zip(&snapshots[0]).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            let xmax = x.iter().fold(0.0f64, |m, a| m.max(a.abs()));
            if (old - f).abs() <= opts.tol * scale && step <= opts.step_tol * (1.0 + xmax) {
                converged = true;
                break;
            }
        }
        x_prev = x;
    }
    let (objective, x, prox_input) = best;
    // x = prox_{tR}(v) gives (v − x)/t ∈ ∂R(x) up to rounding. The stationarity
    // form (2/α)Aᵀ(y − Ax) + tilt would amplify the solver error by 1/α.
    let subgradient = match prox_input {
        Some(v) => v.iter().zip(&x).map(|(vi, xi)| (vi - xi) / t_prox).collect(),
        None => {
            let r: Vec<f64> = y.iter().zip(op.apply(&x)).map(|(b, a)| b - a).collect();
            let mut g = op.adjoint(&r);
            for (i, s) in g.iter_mut().enumerate() {
                *s = 2.0 * *s / alpha + tilt.map_or(0.0, |t| t[i]);
            }
            g
        }
    };
    Ok(ConvexSolveResult {
        alpha,
        penalty_value: penalty.value(&x),
        x,
        objective,
        iterations,
        converged,
        subgradient,
    })
}

pub fn fista_solve<O, P>(op: &O, y: &[f64], alpha: f64, penalty: &P, opts: &FistaOptions) -> Result<ConvexSolveResult>
where
    O: Operator + ?Sized,
    P: Penalty + ?Sized,
{
    fista_solve_tilted(op, y, alpha, penalty, None, None, opts)
}

/// `x^{II} = argmin ‖Ax − y‖² + α(R(x) − ⟨ξ^I, x⟩)`, started from `x^I`.
pub fn bregman_second<O, P>(
    op: &O,
    y: &[f64],
    penalty: &P,
    first: &ConvexSolveResult,
    opts: &FistaOptions,
) -> Result<ConvexSolveResult>
where
    O: Operator + ?Sized,
    P: Penalty + ?Sized,
{
    if !first.converged {
        return Err(Error::Numerical(format!("first iterate at alpha={} did not converge", first.alpha)));
    }
    fista_solve_tilted(op, y, first.alpha, penalty, Some(&first.subgradient), Some(&first.x), opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConvexRule {
    SlBregman,
    SlrBregman,
    SlDiscrete,
    QoRight,
}

impl ConvexRule {
    pub const ALL: [ConvexRule; 4] = [Self::SlBregman, Self::SlrBregman, Self::SlDiscrete, Self::QoRight];

    pub fn name(self) -> &'static str {
        match self {
            Self::SlBregman => "simple-l-bregman",
            Self::SlrBregman => "simple-l-ratio-bregman",
            Self::SlDiscrete => "simple-l-discrete",
            Self::QoRight => "qo-right",
        }
    }
}

impl fmt::Display for ConvexRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConvexRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::param(format!("unknown convex rule {s:?}")))
    }
}

/// Negative Bregman distances above this are treated as rounding.
pub const CLAMP_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexRuleValue {
    /// `None` where the functional is undefined.
    pub value: Option<f64>,
    /// A negative Bregman distance beyond the slack was clamped to zero.
    pub clamped: bool,
}

pub fn convex_rule_value<P: Penalty + ?Sized>(
    rule: ConvexRule,
    penalty: &P,
    first: &ConvexSolveResult,
    second: &ConvexSolveResult,
    next_alpha: Option<&ConvexSolveResult>,
) -> ConvexRuleValue {
    let (r1, r2) = (first.penalty_value, second.penalty_value);
    let plain = |value| ConvexRuleValue { value, clamped: false };
    match rule {
        ConvexRule::SlBregman => plain(Some((r2 - r1).abs())),
        ConvexRule::SlrBregman => plain((r1 > 0.0).then(|| (r2 - r1).abs() / r1)),
        ConvexRule::SlDiscrete => plain(next_alpha.map(|nx| (penalty.value(&nx.x) - r1).abs())),
        ConvexRule::QoRight => {
            let diff: Vec<f64> = second.x.iter().zip(&first.x).map(|(a, b)| a - b).collect();
            let d = r2 - r1 - dot(&first.subgradient, &diff);
            if d >= 0.0 {
                plain(Some(d))
            } else {
                ConvexRuleValue { value: Some(0.0), clamped: d < -CLAMP_SLACK }
            }
        }
    }
}

/// `|R(x) − R(x†)| + ‖x − x†‖₁`
pub fn strict_metric<P: Penalty + ?Sized>(x: &[f64], xdag: &[f64], penalty: &P) -> Result<f64> {
    if x.len() != xdag.len() {
        return Err(Error::param("strict metric needs equal lengths"));
    }
    let l1: f64 = x.iter().zip(xdag).map(|(a, b)| (a - b).abs()).sum();
    Ok((penalty.value(x) - penalty.value(xdag)).abs() + l1)
}

/// Default convex grid: 40 geometric values from `2‖Aᵀy‖_∞` down six decades.
pub fn default_convex_grid<O: Operator + ?Sized>(op: &O, y: &[f64], count: usize) -> Result<AlphaGrid> {
    let amax = 2.0 * op.adjoint(y).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(amax > 0.0) {
        return Err(Error::param("data are zero; no convex grid can be derived"));
    }
    AlphaGrid::new(1e-6 * amax, amax, count)
}

pub const DEFAULT_CONVEX_GRID: usize = 40;

/// First and second Bregman iterates at one grid value.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPathPoint {
    pub first: ConvexSolveResult,
    pub second: std::result::Result<ConvexSolveResult, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPath {
    pub alpha: Vec<f64>,
    pub points: Vec<ConvexPathPoint>,
}

pub fn convex_path<O, P>(op: &O, y: &[f64], grid: &AlphaGrid, penalty: &P, opts: &FistaOptions, exec: Exec) -> Result<ConvexPath>
where
    O: Operator + ?Sized,
    P: Penalty + ?Sized,
{
    let points = exec.map(grid.values(), |&a| -> Result<ConvexPathPoint> {
        let first = fista_solve(op, y, a, penalty, opts)?;
        let second = bregman_second(op, y, penalty, &first, opts).map_err(|e| e.to_string());
        Ok(ConvexPathPoint { first, second })
    });
    Ok(ConvexPath { alpha: grid.values().to_vec(), points: points.into_iter().collect::<Result<_>>()? })
}

/// Rule values along the path plus the number of clamp activations.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexRuleCurve {
    pub rule: ConvexRule,
    pub values: Vec<Option<f64>>,
    pub clamps: usize,
}

impl ConvexPath {
    pub fn rule_curve<P: Penalty + ?Sized>(&self, rule: ConvexRule, penalty: &P) -> ConvexRuleCurve {
        let mut clamps = 0;
        let values = (0..self.points.len())
            .map(|k| {
                let p = &self.points[k];
                let next = self.points.get(k + 1).map(|q| &q.first);
                match &p.second {
                    Ok(second) => {
                        let v = convex_rule_value(rule, penalty, &p.first, second, next);
                        clamps += usize::from(v.clamped);
                        v.value
                    }
                    // the discrete rule needs no Bregman iterate
                    Err(_) if rule == ConvexRule::SlDiscrete => next.map(|n| (n.penalty_value - p.first.penalty_value).abs()),
                    Err(_) => None,
                }
            })
            .collect();
        ConvexRuleCurve { rule, values, clamps }
    }

    /// Columns: alpha, objective, R_value, one per rule, iterations, converged.
    pub fn to_csv<P: Penalty + ?Sized>(&self, penalty: &P) -> String {
        let curves: Vec<ConvexRuleCurve> = ConvexRule::ALL.iter().map(|&r| self.rule_curve(r, penalty)).collect();
        let mut out = String::from("alpha,objective,R_value");
        for r in ConvexRule::ALL {
            out.push(',');
            out.push_str(r.name());
        }
        out.push_str(",iterations,converged\n");
        for (k, p) in self.points.iter().enumerate() {
            out.push_str(&format!("{},{},{}", self.alpha[k], p.first.objective, p.first.penalty_value));
            for c in &curves {
                out.push_str(&c.values[k].map_or_else(|| ",nan".to_string(), |v| format!(",{v}")));
            }
            out.push_str(&format!(",{},{}\n", p.first.iterations, p.first.converged));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_diagonal_problem;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct SquaredNorm;

    impl Penalty for SquaredNorm {
        fn value(&self, x: &[f64]) -> f64 {
            x.iter().map(|v| v * v).sum()
        }
        fn prox(&self, t: f64, v: &[f64]) -> Vec<f64> {
            v.iter().map(|vi| vi / (1.0 + 2.0 * t)).collect()
        }
    }

    fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) > 0.0) == (f(hi) > 0.0) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn prox_examples() {
        assert_eq!(PenaltyKind::L1.prox(1.0, &[2.0, -0.5]), vec![1.0, 0.0]);
        assert!((PenaltyKind::Lp32.prox(2.0, &[4.0])[0] - 1.0).abs() < 1e-15);
        assert_eq!(PenaltyKind::Tv1d.prox(1.0, &[4.0, 0.0]), vec![3.0, 1.0]);
        for k in [PenaltyKind::L1, PenaltyKind::Lp32, PenaltyKind::Tv1d] {
            assert_eq!(k.value(&[0.0; 4]), 0.0);
            assert_eq!(k.name().parse::<PenaltyKind>().unwrap(), k);
        }
    }

    #[test]
    fn lp32_prox_against_bisection() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let v: f64 = rng.random_range(-5.0..5.0);
            let t = rng.random_range(0.01..3.0);
            // derivative of ½(x − v)² + t|x|^{3/2} on the side of sign(v)
            let d = |x: f64| x - v.abs() + 1.5 * t * x.sqrt();
            let oracle = v.signum() * bisect(0.0, v.abs(), d);
            assert!((lp32_prox_scalar(v, t) - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn prox_is_firmly_nonexpansive() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in [PenaltyKind::L1, PenaltyKind::Lp32, PenaltyKind::Tv1d] {
            for _ in 0..100 {
                let n = rng.random_range(1..10);
                let v: Vec<f64> = (0..n).map(|_| rng.random_range(-4.0..4.0)).collect();
                let w: Vec<f64> = (0..n).map(|_| rng.random_range(-4.0..4.0)).collect();
                let t = rng.random_range(0.01..2.0);
                let (pv, pw) = (k.prox(t, &v), k.prox(t, &w));
                let dp: Vec<f64> = pv.iter().zip(&pw).map(|(a, b)| a - b).collect();
                let dv: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a - b).collect();
                // ‖p − q‖² ≤ ⟨p − q, v − w⟩
                assert!(dot(&dp, &dp) <= dot(&dp, &dv) + 1e-12, "{k}");
                assert!(dot(&dp, &dp).sqrt() <= dot(&dv, &dv).sqrt() + 1e-12);
            }
        }
    }

    #[test]
    fn penalties_are_midpoint_convex() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for k in [PenaltyKind::L1, PenaltyKind::Lp32, PenaltyKind::Tv1d] {
            for _ in 0..200 {
                let x: Vec<f64> = (0..6).map(|_| rng.random_range(-3.0..3.0)).collect();
                let y: Vec<f64> = (0..6).map(|_| rng.random_range(-3.0..3.0)).collect();
                let m: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
                assert!(k.value(&x) >= 0.0);
                assert!(k.value(&m) <= 0.5 * (k.value(&x) + k.value(&y)) + 1e-10);
            }
        }
    }

    #[test]
    fn identity_l1_closed_form() {
        let op = DenseOperator::new(DMatrix::identity(5, 5)).unwrap();
        let y = [1.5, -0.2, 0.7, -2.0, 0.05];
        let alpha = 0.8;
        let r = fista_solve(&op, &y, alpha, &PenaltyKind::L1, &FistaOptions::default()).unwrap();
        assert!(r.converged);
        for (xi, yi) in r.x.iter().zip(&y) {
            assert!((xi - soft_threshold(*yi, alpha / 2.0)).abs() < 1e-8);
        }
        // ξ ∈ ∂‖x‖₁
        for (xi, si) in r.x.iter().zip(&r.subgradient) {
            assert!(si.abs() <= 1.0 + 1e-6);
            if *xi != 0.0 {
                assert!((si - xi.signum()).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn large_alpha_kills_l1_solution() {
        let p = make_diagonal_problem(30, 1.0, 1.0, true).unwrap();
        let y = p.to_range(p.ydata_coeffs());
        let grid = default_convex_grid(&p, &y, 5).unwrap();
        let r = fista_solve(&p, &y, grid.alpha_max(), &PenaltyKind::L1, &FistaOptions::default()).unwrap();
        assert!(r.x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn diagonal_lp32_against_bisection() {
        let p = make_diagonal_problem(20, 0.5, 1.0, true).unwrap();
        let y = p.to_range(p.ydata_coeffs());
        let opts = FistaOptions { tol: 1e-14, max_iter: 50_000, ..Default::default() };
        for alpha in [1e-3, 1e-2, 0.1] {
            let r = fista_solve(&p, &y, alpha, &PenaltyKind::Lp32, &opts).unwrap();
            for (i, (&s, &yi)) in p.singular_values().iter().zip(&y).enumerate() {
                // (σx − y)² + α|x|^{3/2}: derivative 2σ(σx − y) + 1.5α√|x| sign x
                let target = (s * yi).abs();
                let d = |x: f64| 2.0 * s * s * x - 2.0 * target + 1.5 * alpha * x.sqrt();
                let oracle = (s * yi).signum() * bisect(0.0, target / (s * s), d);
                assert!((r.x[i] - oracle).abs() < 1e-7, "alpha {alpha} i {i}: {} vs {oracle}", r.x[i]);
            }
        }
    }

    #[test]
    fn zero_data_bregman() {
        let p = make_diagonal_problem(10, 1.0, 1.0, true).unwrap();
        let y = vec![0.0; 10];
        let opts = FistaOptions::default();
        let first = fista_solve(&p, &y, 0.1, &PenaltyKind::L1, &opts).unwrap();
        assert!(first.x.iter().all(|&v| v == 0.0));
        assert!(first.subgradient.iter().all(|&v| v == 0.0));
        let second = bregman_second(&p, &y, &PenaltyKind::L1, &first, &opts).unwrap();
        assert!(second.x.iter().all(|&v| v == 0.0));
        for rule in ConvexRule::ALL {
            let v = convex_rule_value(rule, &PenaltyKind::L1, &first, &second, Some(&first));
            assert!(v.value.is_none_or(|x| x == 0.0), "{rule}");
        }
    }

    #[test]
    fn quadratic_bregman_is_iterated_tikhonov() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = DMatrix::from_fn(8, 6, |_, _| rng.random_range(-1.0..1.0));
        let y: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let op = DenseOperator::new(a.clone()).unwrap();
        let alpha = 0.3;
        let opts = FistaOptions { tol: 1e-15, max_iter: 100_000, ..Default::default() };
        let first = fista_solve(&op, &y, alpha, &SquaredNorm, &opts).unwrap();
        let second = bregman_second(&op, &y, &SquaredNorm, &first, &opts).unwrap();
        let m = a.transpose() * &a + DMatrix::identity(6, 6) * alpha;
        let yv = DVector::from_column_slice(&y);
        let x1 = m.clone().lu().solve(&a.tr_mul(&yv)).unwrap();
        let x2 = m.lu().solve(&(a.tr_mul(&yv) + x1.clone() * alpha)).unwrap();
        for i in 0..6 {
            assert!((first.x[i] - x1[i]).abs() < 1e-8, "{} vs {} it {} conv {}", first.x[i], x1[i], first.iterations, first.converged);
            assert!((second.x[i] - x2[i]).abs() < 1e-8, "{} vs {}", second.x[i], x2[i]);
        }
    }

    #[test]
    fn single_coordinate_l1_bregman() {
        let p = SpectralProblem::from_coefficients("one", vec![0.5], vec![2.0], 0.0).unwrap();
        let y = vec![0.9];
        let alpha = 0.2;
        let opts = FistaOptions { tol: 1e-15, ..Default::default() };
        let first = fista_solve(&p, &y, alpha, &PenaltyKind::L1, &opts).unwrap();
        let second = bregman_second(&p, &y, &PenaltyKind::L1, &first, &opts).unwrap();
        let xi = first.subgradient[0];
        let grid_min = |f: &dyn Fn(f64) -> f64| {
            (0..=800_000).map(|k| -1.0 + k as f64 * 5e-6).min_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap()
        };
        let x1 = grid_min(&|x| (0.5 * x - 0.9f64).powi(2) + alpha * x.abs());
        let x2 = grid_min(&|x| (0.5 * x - 0.9f64).powi(2) + alpha * (x.abs() - xi * x));
        assert!((first.x[0] - x1).abs() < 1e-5);
        assert!((second.x[0] - x2).abs() < 1e-5);
        let v = convex_rule_value(ConvexRule::SlBregman, &PenaltyKind::L1, &first, &second, None);
        assert!((v.value.unwrap() - (x2.abs() - x1.abs()).abs()).abs() < 1e-5);
    }

    #[test]
    fn coincident_iterates_give_zero() {
        let r = ConvexSolveResult {
            alpha: 1.0,
            x: vec![1.0, -2.0],
            objective: 0.0,
            penalty_value: 3.0,
            iterations: 1,
            converged: true,
            subgradient: vec![1.0, -1.0],
        };
        for rule in ConvexRule::ALL {
            let v = convex_rule_value(rule, &PenaltyKind::L1, &r, &r, Some(&r));
            assert_eq!(v.value, Some(0.0), "{rule}");
            assert!(!v.clamped);
        }
    }

    #[test]
    fn strict_metric_examples() {
        let tv = PenaltyKind::Tv1d;
        assert_eq!(strict_metric(&[1.0, 1.0], &[0.0, 0.0], &tv).unwrap(), 2.0);
        assert_eq!(strict_metric(&[2.0, 0.0], &[0.0, 0.0], &tv).unwrap(), 4.0);
        assert_eq!(strict_metric(&[0.3, -1.0], &[0.3, -1.0], &tv).unwrap(), 0.0);
        assert!(strict_metric(&[1.0], &[1.0, 2.0], &tv).is_err());
    }

    #[test]
    fn rule_names_parse() {
        for r in ConvexRule::ALL {
            assert_eq!(r.name().parse::<ConvexRule>().unwrap(), r);
        }
    }
}
