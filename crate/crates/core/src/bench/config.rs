use std::fmt;
use std::str::FromStr;

use crate::convex::{ConvexRule, FistaOptions, PenaltyKind, DEFAULT_CONVEX_GRID};
use crate::error::{Error, Result};
use crate::problem_spec::ProblemSpec;
use crate::rules::RuleId;

/// Number of grid points for Tikhonov paths when the config does not say.
pub const DEFAULT_GRID_COUNT: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSpec {
    /// Problem-derived bounds with the given number of points.
    Auto(usize),
    Explicit { min: f64, max: f64, count: usize },
}

impl FromStr for GridSpec {
    type Err = Error;

    /// `default`, `count=N`, or `min,max,count`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "default" {
            return Ok(Self::Auto(0));
        }
        if let Some(n) = s.strip_prefix("count=") {
            return Ok(Self::Auto(n.trim().parse().map_err(|_| Error::Parse(format!("bad grid count {n:?}")))?));
        }
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("grid must be `default`, `count=N` or `min,max,count`, got {s:?}")));
        }
        let num = |v: &str| v.parse::<f64>().map_err(|_| Error::Parse(format!("bad grid value {v:?}")));
        let count = parts[2].parse().map_err(|_| Error::Parse(format!("bad grid count {:?}", parts[2])))?;
        Ok(Self::Explicit { min: num(parts[0])?, max: num(parts[1])?, count })
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Auto(0) => f.write_str("default"),
            Self::Auto(n) => write!(f, "count={n}"),
            Self::Explicit { min, max, count } => write!(f, "{min},{max},{count}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    L2,
    L1,
    Strict,
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "l2" => Ok(Self::L2),
            "l1" => Ok(Self::L1),
            "strict" => Ok(Self::Strict),
            other => Err(Error::Parse(format!("unknown metric {other:?}"))),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::L2 => "l2",
            Self::L1 => "l1",
            Self::Strict => "strict",
        })
    }
}

/// A rule as it appears in an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchRule {
    Tikhonov(RuleId),
    Convex(ConvexRule),
    /// Discrete Menger curvature of the convex L-curve.
    ConvexLCurve,
}

impl BenchRule {
    pub fn name(self) -> &'static str {
        match self {
            Self::Tikhonov(r) => r.name(),
            Self::Convex(r) => r.name(),
            Self::ConvexLCurve => "l-curve-discrete",
        }
    }

    fn parse(s: &str, convex: bool) -> Result<Self> {
        if convex {
            if s.trim() == "l-curve-discrete" {
                return Ok(Self::ConvexLCurve);
            }
            s.parse().map(Self::Convex)
        } else {
            s.parse().map(Self::Tikhonov)
        }
    }
}

impl fmt::Display for BenchRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub problem: ProblemSpec,
    pub levels: Vec<f64>,
    pub runs: usize,
    pub rules: Vec<BenchRule>,
    pub grid: GridSpec,
    pub seed_base: u64,
    pub metric: Metric,
    /// Noise decay exponent `q`; 0.6 for diagonal problems, 0 otherwise.
    pub noise_decay: f64,
    /// Set for the convex branch.
    pub penalty: Option<PenaltyKind>,
    pub fista: FistaOptions,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rules.is_empty() {
            return Err(Error::param(format!("experiment {}: rule list is empty", self.name)));
        }
        if self.levels.is_empty() || self.levels.iter().any(|&l| !(l > 0.0 && l <= 1.0)) {
            return Err(Error::param(format!("experiment {}: noise levels must lie in (0, 1]", self.name)));
        }
        if self.runs == 0 {
            return Err(Error::param(format!("experiment {}: runs must be at least 1", self.name)));
        }
        if !(self.noise_decay.is_finite() && self.noise_decay >= 0.0) {
            return Err(Error::param("noise_decay must be a nonnegative number"));
        }
        let convex = self.penalty.is_some();
        for r in &self.rules {
            if matches!(r, BenchRule::Tikhonov(_)) == convex {
                return Err(Error::param(format!("rule {r} does not fit the {} branch", if convex { "convex" } else { "Tikhonov" })));
            }
        }
        if self.metric == Metric::Strict && !convex {
            return Err(Error::param("the strict metric needs a penalty"));
        }
        Ok(())
    }

    pub fn grid_count(&self) -> usize {
        match self.grid {
            GridSpec::Auto(0) if self.penalty.is_some() => DEFAULT_CONVEX_GRID,
            GridSpec::Auto(0) => DEFAULT_GRID_COUNT,
            GridSpec::Auto(n) | GridSpec::Explicit { count: n, .. } => n,
        }
    }
}

fn parse_list<T>(v: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(f).collect()
}

fn build(name: String, kv: Vec<(String, String)>) -> Result<ExperimentConfig> {
    let get = |key: &str| kv.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
    for (k, _) in &kv {
        const KNOWN: [&str; 11] =
            ["problem", "levels", "runs", "rules", "grid", "metric", "noise_decay", "penalty", "seed", "max_iter", "tol"];
        if !KNOWN.contains(&k.as_str()) {
            return Err(Error::Parse(format!("[{name}]: unknown key {k:?}")));
        }
    }
    let need = |key: &str| get(key).ok_or_else(|| Error::Parse(format!("[{name}]: missing key {key:?}")));
    let num = |key: &str, v: &str| -> Result<f64> {
        v.trim().parse().map_err(|_| Error::Parse(format!("[{name}]: bad number {v:?} for {key}")))
    };
    let problem: ProblemSpec = need("problem")?.parse()?;
    let penalty = get("penalty").map(str::parse::<PenaltyKind>).transpose()?;
    let convex = penalty.is_some();
    let rules = parse_list(need("rules")?, |s| BenchRule::parse(s, convex))?;
    let default_q = if matches!(problem, ProblemSpec::Diagonal { .. }) { 0.6 } else { 0.0 };
    let mut fista = FistaOptions::default();
    if let Some(v) = get("max_iter") {
        fista.max_iter = v.trim().parse().map_err(|_| Error::Parse(format!("[{name}]: bad max_iter {v:?}")))?;
    }
    if let Some(v) = get("tol") {
        fista.tol = num("tol", v)?;
    }
    let default_metric = if convex { Metric::L1 } else { Metric::L2 };
    let cfg = ExperimentConfig {
        levels: parse_list(need("levels")?, |s| num("levels", s))?,
        runs: need("runs")?.trim().parse().map_err(|_| Error::Parse(format!("[{name}]: bad runs")))?,
        rules,
        grid: get("grid").map(str::parse).transpose()?.unwrap_or(GridSpec::Auto(0)),
        seed_base: get("seed").map(|v| v.trim().parse()).transpose().map_err(|_| Error::Parse(format!("[{name}]: bad seed")))?.unwrap_or(0),
        metric: get("metric").map(str::parse).transpose()?.unwrap_or(default_metric),
        noise_decay: get("noise_decay").map(|v| num("noise_decay", v)).transpose()?.unwrap_or(default_q),
        penalty,
        fista,
        problem,
        name,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Parses `[name]` sections of `key = value` lines; `#` starts a comment.
pub fn parse_configs(text: &str) -> Result<Vec<ExperimentConfig>> {
    let mut sections: Vec<(String, Vec<(String, String)>)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim();
            if name.is_empty() || sections.iter().any(|(n, _)| n == name) {
                return Err(Error::Parse(format!("line {}: empty or duplicate section [{name}]", lineno + 1)));
            }
            sections.push((name.to_string(), Vec::new()));
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
        let section = sections
            .last_mut()
            .ok_or_else(|| Error::Parse(format!("line {}: key outside of any [section]", lineno + 1)))?;
        section.1.push((k.trim().to_string(), v.trim().to_string()));
    }
    if sections.is_empty() {
        return Err(Error::Parse("config defines no experiment".into()));
    }
    sections.into_iter().map(|(n, kv)| build(n, kv)).collect()
}
