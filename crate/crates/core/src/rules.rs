//! Heuristic parameter choice functionals for Tikhonov regularization and
//! the selection policy applied to them.
//!
//! The residual-type functionals share the singular-value form
//! `ψ² = Σ α^{n−k−1} λ^k / (α+λ)^n · d²`:
//!
//! | rule     | (n, k) |
//! |----------|--------|
//! | simple-L | (3, 1) |
//! | QO       | (4, 1) |
//! | HR       | (3, 0) |
//! | HD       | (2, 0) |
//!
//! The simple-L ratio divides by `‖x_α^δ‖`; the V-curve, CRESO and BRS
//! functionals and the L-curve curvature are expressed through the path
//! quantities `η, ρ, η′, ζ`.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::noise::NoisySpectrum;
use crate::path::{curvature_tikhonov, AlphaGrid, PathCurve};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    SimpleL,
    SimpleLRatio,
    Qo,
    Hd,
    Hr,
    LCurveCurvature,
    VCurve,
    Creso,
    Brs,
}

impl RuleId {
    pub const ALL: [RuleId; 9] = [
        Self::SimpleL,
        Self::SimpleLRatio,
        Self::Qo,
        Self::Hd,
        Self::Hr,
        Self::LCurveCurvature,
        Self::VCurve,
        Self::Creso,
        Self::Brs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::SimpleL => "simple-l",
            Self::SimpleLRatio => "simple-l-ratio",
            Self::Qo => "qo",
            Self::Hd => "hd",
            Self::Hr => "hr",
            Self::LCurveCurvature => "l-curve",
            Self::VCurve => "v-curve",
            Self::Creso => "creso",
            Self::Brs => "brs",
        }
    }

    pub fn sense(self) -> Sense {
        match self {
            Self::LCurveCurvature => Sense::Maximize,
            _ => Sense::Minimize,
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RuleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .or(match s.as_str() {
                "sl" => Some(Self::SimpleL),
                "slr" => Some(Self::SimpleLRatio),
                "lcurve" | "l-curve-curvature" => Some(Self::LCurveCurvature),
                "vcurve" => Some(Self::VCurve),
                _ => None,
            })
            .ok_or_else(|| Error::param(format!("unknown rule {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleCurve {
    pub rule: RuleId,
    pub alpha: Vec<f64>,
    /// `None` where the functional is undefined.
    pub values: Vec<Option<f64>>,
    pub sense: Sense,
}

impl RuleCurve {
    pub fn to_csv_rows(&self, out: &mut String) {
        for (a, v) in self.alpha.iter().zip(&self.values) {
            let v = v.map_or_else(|| "nan".to_string(), |v| v.to_string());
            let _ = writeln!(out, "{a},{v},{}", self.rule);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionResult {
    pub alpha_star: f64,
    pub grid_index: usize,
    /// Strict local extremum away from the grid ends.
    pub interior: bool,
    pub value_at_star: f64,
}

impl SelectionResult {
    pub fn record(&self, rule: RuleId) -> String {
        format!("{rule},{},{},{}", self.alpha_star, self.interior, self.value_at_star)
    }
}

// (n, k) weight α^{n−k−1} λ^k / (α+λ)^n
fn nk_weight(alpha: f64, lambda: f64, n: i32, k: i32) -> f64 {
    alpha.powi(n - k - 1) * lambda.powi(k) / (alpha + lambda).powi(n)
}

/// `Σ α^{n−k−1} λ_i^k/(α+λ_i)^n d_i²` in ascending index order.
pub fn nk_sum(data: &NoisySpectrum, alpha: f64, n: i32, k: i32) -> f64 {
    data.problem()
        .lambdas()
        .iter()
        .zip(data.data_coeffs())
        .map(|(&l, d)| nk_weight(alpha, l, n, k) * d * d)
        .sum()
}

pub fn rule_curve(rule: RuleId, data: &NoisySpectrum, path: &PathCurve, grid: &AlphaGrid) -> Result<RuleCurve> {
    if path.alpha != grid.values() {
        return Err(Error::param("path was computed on a different grid"));
    }
    let oor2 = data.problem().out_of_range_norm().powi(2);
    let values = (0..grid.len())
        .map(|k| {
            let q = path.point(k);
            let a = q.alpha;
            let sl = || nk_sum(data, a, 3, 1).abs().sqrt();
            match rule {
                RuleId::SimpleL => Some(sl()),
                RuleId::SimpleLRatio => (q.eta > 0.0).then(|| sl() / q.eta.sqrt()),
                RuleId::Qo => Some(nk_sum(data, a, 4, 1).abs().sqrt()),
                RuleId::Hr => Some((nk_sum(data, a, 3, 0) + oor2 / a).abs().sqrt()),
                RuleId::Hd => Some((q.rho / a).abs().sqrt()),
                RuleId::LCurveCurvature => curvature_tikhonov(path, k).ok(),
                RuleId::VCurve => (q.rho > 0.0 && q.eta > 0.0)
                    .then(|| a * q.eta_prime.abs() * (a * a / (q.rho * q.rho) + 1.0 / (q.eta * q.eta)).sqrt()),
                RuleId::Creso => Some(-(q.eta + 2.0 * a * q.eta_prime)),
                RuleId::Brs => (q.eta > 0.0).then(|| q.rho / (a * q.eta.sqrt())),
            }
            .filter(|v| v.is_finite())
        })
        .collect();
    Ok(RuleCurve { rule, alpha: grid.values().to_vec(), values, sense: rule.sense() })
}

/// Picks the best strict interior local extremum of `values`; plateaus count
/// as one extremum located at their first index. Without an interior
/// extremum the better of the first and last defined entries is returned
/// with `interior = false`. Ties go to the smaller index.
pub fn select_extremum(values: &[Option<f64>], sense: Sense) -> Option<(usize, bool, f64)> {
    let score = |v: f64| if sense == Sense::Minimize { v } else { -v };
    let n = values.len();
    let mut best: Option<(usize, f64)> = None;
    let mut start = 0;
    while start < n {
        let Some(v) = values[start] else {
            start += 1;
            continue;
        };
        let mut end = start;
        while end + 1 < n && values[end + 1] == Some(v) {
            end += 1;
        }
        let left = start.checked_sub(1).and_then(|i| values[i]);
        let right = values.get(end + 1).copied().flatten();
        if let (Some(l), Some(r)) = (left, right) {
            let s = score(v);
            if s < score(l) && s < score(r) && best.is_none_or(|(_, b)| s < b) {
                best = Some((start, s));
            }
        }
        start = end + 1;
    }
    if let Some((i, _)) = best {
        return Some((i, true, values[i].unwrap()));
    }
    let first = values.iter().position(Option::is_some)?;
    let last = values.iter().rposition(Option::is_some)?;
    let (fv, lv) = (values[first].unwrap(), values[last].unwrap());
    Some(if score(lv) < score(fv) { (last, false, lv) } else { (first, false, fv) })
}

pub fn select_alpha(curve: &RuleCurve) -> Result<SelectionResult> {
    if curve.values.len() < 3 {
        return Err(Error::Selection("need at least 3 grid points".into()));
    }
    let (k, interior, value) = select_extremum(&curve.values, curve.sense)
        .ok_or_else(|| Error::Selection(format!("{} is undefined on the whole grid", curve.rule)))?;
    Ok(SelectionResult { alpha_star: curve.alpha[k], grid_index: k, interior, value_at_star: value })
}

/// Noise and solution parts of `ψ_SL` and the monotone bounds `B`, `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCurves {
    pub alpha: Vec<f64>,
    /// `ψ_SL(α, e)`
    pub psi_sl_noise: Vec<f64>,
    /// `ψ_SL(α, x†)`
    pub psi_sl_sol: Vec<f64>,
    /// `B(α) = ⟨x† − x_α, x†⟩^{1/2}`
    pub b: Vec<f64>,
    /// `V(α) = ‖x_α^δ − x_α‖`
    pub v: Vec<f64>,
}

pub fn bound_curves(data: &NoisySpectrum, grid: &AlphaGrid) -> BoundCurves {
    let p = data.problem();
    let mut out = BoundCurves {
        alpha: grid.values().to_vec(),
        psi_sl_noise: Vec::with_capacity(grid.len()),
        psi_sl_sol: Vec::with_capacity(grid.len()),
        b: Vec::with_capacity(grid.len()),
        v: Vec::with_capacity(grid.len()),
    };
    for &a in grid.values() {
        let (mut pn, mut ps, mut b, mut v) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..p.len() {
            let l = p.lambdas()[i];
            let e2 = data.noise_coeffs()[i].powi(2);
            let x2 = p.xdag_coeffs()[i].powi(2);
            let den = l + a;
            let den3 = den * den * den;
            pn += a * l / den3 * e2;
            ps += a * l * l / den3 * x2;
            b += a / den * x2;
            v += l / (den * den) * e2;
        }
        out.psi_sl_noise.push(pn.sqrt());
        out.psi_sl_sol.push(ps.sqrt());
        out.b.push(b.sqrt());
        out.v.push(v.sqrt());
    }
    out
}
