use std::sync::Arc;

use crate::error::{Error, Result};
use crate::noise::add_noise;
use crate::par::Exec;
use crate::path::{error_curve, path_quantities, AlphaGrid};
use crate::problem_spec::ProblemSpec;
use crate::rules::{rule_curve, select_alpha, RuleId};

use super::cell_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateRule {
    Rule(RuleId),
    /// Grid minimizer of the true error.
    Oracle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateConfig {
    pub problem: ProblemSpec,
    pub levels: Vec<f64>,
    pub seeds: usize,
    pub seed_base: u64,
    pub rule: RateRule,
    pub noise_decay: f64,
    pub grid_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateResult {
    pub slope: f64,
    pub intercept: f64,
    /// `(log δ, mean over seeds of log error)`
    pub points: Vec<(f64, f64)>,
}

/// Least-squares fit of the seed-averaged `log error(α*)` against `log δ`.
pub fn rate_regression(config: &RateConfig, exec: Exec) -> Result<RateResult> {
    if config.levels.len() < 4 {
        return Err(Error::param("rate regression needs at least 4 noise levels"));
    }
    let (lo, hi) = config.levels.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &l| (a.min(l), b.max(l)));
    if !(lo > 0.0) || hi / lo < 100.0 * (1.0 - 1e-12) {
        return Err(Error::param("noise levels must be positive and span at least two decades"));
    }
    if config.seeds == 0 {
        return Err(Error::param("rate regression needs at least one seed"));
    }
    let problem = Arc::new(config.problem.build()?);
    let grid = AlphaGrid::for_problem_with(&problem, config.grid_count);
    let cells: Vec<(usize, usize)> =
        (0..config.levels.len()).flat_map(|li| (0..config.seeds).map(move |s| (li, s))).collect();
    let logs = exec.map(&cells, |&(li, run)| -> Result<f64> {
        let data = add_noise(&problem, config.levels[li], config.noise_decay, cell_seed(config.seed_base, run, li))?;
        let errors = error_curve(&data, &grid);
        let k = match config.rule {
            RateRule::Oracle => errors.argmin,
            RateRule::Rule(r) => select_alpha(&rule_curve(r, &data, &path_quantities(&data, &grid), &grid)?)?.grid_index,
        };
        let e = errors.total[k];
        if !(e > 0.0) {
            return Err(Error::Numerical("zero error; rate is undefined".into()));
        }
        Ok(e.ln())
    });
    let logs: Vec<f64> = logs.into_iter().collect::<Result<_>>()?;
    let points: Vec<(f64, f64)> = config
        .levels
        .iter()
        .enumerate()
        .map(|(li, &l)| {
            let chunk = &logs[li * config.seeds..(li + 1) * config.seeds];
            (l.ln(), chunk.iter().sum::<f64>() / chunk.len() as f64)
        })
        .collect();
    let (slope, intercept) = fit_line(&points);
    Ok(RateResult { slope, intercept, points })
}

fn fit_line(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(rule: RateRule) -> RateConfig {
        RateConfig {
            problem: "diag:s=2,mu=0.25,n=400".parse().unwrap(),
            levels: vec![1e-5, 1e-4, 1e-3, 1e-2],
            seeds: 2,
            seed_base: 3,
            rule,
            noise_decay: 0.6,
            grid_count: 100,
        }
    }

    #[test]
    fn line_fit() {
        let (m, b) = fit_line(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0), (3.0, 7.0)]);
        assert!((m - 2.0).abs() < 1e-15 && (b - 1.0).abs() < 1e-15);
        // by hand: sxy = 4, sxx = 5
        let (m, _) = fit_line(&[(0.0, 0.5), (1.0, 0.5), (2.0, 2.5), (3.0, 2.5)]);
        assert!((m - 0.8).abs() < 1e-15);
    }

    #[test]
    fn oracle_rate_is_positive_and_below_one() {
        let r = rate_regression(&cfg(RateRule::Oracle), Exec::Serial).unwrap();
        assert!(r.slope > 0.1 && r.slope < 1.0, "{}", r.slope);
        assert_eq!(r.points.len(), 4);
    }

    #[test]
    fn preconditions() {
        let mut c = cfg(RateRule::Oracle);
        c.levels = vec![1e-3, 2e-3, 4e-3, 8e-3];
        assert!(rate_regression(&c, Exec::Serial).is_err());
        c.levels.truncate(3);
        assert!(rate_regression(&c, Exec::Serial).is_err());
    }
}
