//! Experiment harness: noise-level sweeps over repeated seeds, efficiency
//! ratios `J = error(α*) / min_α error(α)`, medians per noise class, rate
//! regressions and report rendering.

mod config;
mod rate;
mod report;

use std::sync::Arc;

pub use config::{parse_configs, BenchRule, ExperimentConfig, GridSpec, Metric, DEFAULT_GRID_COUNT};
pub use rate::{rate_regression, RateConfig, RateResult, RateRule};
pub use report::{render_report, ReportFormat};

use crate::convex::{convex_path, default_convex_grid, strict_metric, ConvexPath, PenaltyKind};
use crate::error::{Error, Result};
use crate::noise::{add_noise, condition_summary, NoisySpectrum};
use crate::par::Exec;
use crate::path::{discrete_curvature, error_curve, path_quantities, tikhonov_coeffs, AlphaGrid, ErrorCurve};
use crate::rules::{rule_curve, select_alpha, select_extremum, Sense};
use crate::spectral::SpectralProblem;

/// `selected_error / min_error`; undefined when the minimum is zero.
pub fn efficiency_ratio_from(selected_error: f64, min_error: f64) -> Result<f64> {
    if !(min_error > 0.0) || !selected_error.is_finite() {
        return Err(Error::Numerical(format!("efficiency ratio undefined (min error {min_error})")));
    }
    Ok(selected_error / min_error)
}

pub fn efficiency_ratio(selected_error: f64, curve: &ErrorCurve) -> Result<f64> {
    efficiency_ratio_from(selected_error, curve.min_total)
}

/// Lower median; `None` for an empty sample.
pub fn lower_median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(v[(v.len() - 1) / 2])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NoiseClass {
    Small,
    Medium,
    Large,
    Half,
}

impl NoiseClass {
    pub const ALL: [NoiseClass; 4] = [Self::Small, Self::Medium, Self::Large, Self::Half];

    /// small ≤ 0.5% < medium ≤ 7.5% < large ≤ 35% < the 50% row.
    pub fn of(level: f64) -> Self {
        if level <= 0.005 {
            Self::Small
        } else if level <= 0.075 {
            Self::Medium
        } else if level <= 0.35 {
            Self::Large
        } else {
            Self::Half
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Small => "δ small",
            Self::Medium => "δ medium",
            Self::Large => "δ large",
            Self::Half => "δ=50%",
        }
    }
}

pub fn cell_seed(seed_base: u64, run: usize, level_index: usize) -> u64 {
    seed_base.wrapping_add(run as u64 * 1009).wrapping_add(level_index as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub level: f64,
    pub seed: u64,
    pub rule: String,
    /// NaN when the rule failed.
    pub alpha_star: f64,
    pub interior: bool,
    pub j: Option<f64>,
    pub selected_error: f64,
    pub min_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassMedian {
    pub class: NoiseClass,
    pub rule: String,
    pub median: Option<f64>,
    pub count: usize,
    pub failures: usize,
}

/// Measured condition constants of one noise draw.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionRow {
    pub level: f64,
    pub seed: u64,
    pub c1: f64,
    pub c2: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Curves of one representative run, used for the SVG figure.
#[derive(Debug, Clone, PartialEq)]
pub struct Showcase {
    pub level: f64,
    pub seed: u64,
    pub residual: Vec<f64>,
    pub size: Vec<f64>,
    pub size_label: String,
    pub alpha: Vec<f64>,
    /// Rule name, values, selected grid index.
    pub curves: Vec<(String, Vec<Option<f64>>, Option<usize>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub records: Vec<RawRecord>,
    pub medians: Vec<ClassMedian>,
    pub conditions: Vec<ConditionRow>,
    pub showcase: Option<Showcase>,
    /// Bregman distances clamped at zero, out of all evaluated.
    pub clamps: (usize, usize),
}

pub fn aggregate(config: &ExperimentConfig, records: &[RawRecord]) -> Vec<ClassMedian> {
    let mut out = Vec::new();
    for class in NoiseClass::ALL {
        if !config.levels.iter().any(|&l| NoiseClass::of(l) == class) {
            continue;
        }
        for rule in &config.rules {
            let rs: Vec<&RawRecord> =
                records.iter().filter(|r| r.rule == rule.name() && NoiseClass::of(r.level) == class).collect();
            let js: Vec<f64> = rs.iter().filter_map(|r| r.j).collect();
            out.push(ClassMedian {
                class,
                rule: rule.name().to_string(),
                median: lower_median(&js),
                count: js.len(),
                failures: rs.len() - js.len(),
            });
        }
    }
    out
}

fn linear_grid(config: &ExperimentConfig, problem: &SpectralProblem) -> Result<AlphaGrid> {
    match config.grid {
        GridSpec::Explicit { min, max, count } => AlphaGrid::new(min, max, count),
        GridSpec::Auto(_) => Ok(AlphaGrid::for_problem_with(problem, config.grid_count())),
    }
}

fn vec_metric(metric: Metric, x: &[f64], xdag: &[f64], penalty: Option<&PenaltyKind>) -> Result<f64> {
    match metric {
        Metric::L2 => Ok(x.iter().zip(xdag).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()),
        Metric::L1 => Ok(x.iter().zip(xdag).map(|(a, b)| (a - b).abs()).sum()),
        Metric::Strict => strict_metric(x, xdag, penalty.ok_or_else(|| Error::param("strict metric needs a penalty"))?),
    }
}

struct CellOutput {
    records: Vec<RawRecord>,
    condition: Option<ConditionRow>,
    showcase: Option<Showcase>,
    clamps: (usize, usize),
}

fn failed(level: f64, seed: u64, rule: &BenchRule, min_error: f64) -> RawRecord {
    RawRecord {
        level,
        seed,
        rule: rule.name().to_string(),
        alpha_star: f64::NAN,
        interior: false,
        j: None,
        selected_error: f64::NAN,
        min_error,
    }
}

fn record(level: f64, seed: u64, rule: &BenchRule, alpha: &[f64], pick: Option<(usize, bool)>, errors: &[f64], min: f64) -> RawRecord {
    match pick {
        Some((k, interior)) => RawRecord {
            level,
            seed,
            rule: rule.name().to_string(),
            alpha_star: alpha[k],
            interior,
            j: efficiency_ratio_from(errors[k], min).ok(),
            selected_error: errors[k],
            min_error: min,
        },
        None => failed(level, seed, rule, min),
    }
}

fn min_of(errors: &[f64]) -> f64 {
    errors.iter().copied().fold(f64::INFINITY, f64::min)
}

fn linear_cell(config: &ExperimentConfig, data: &NoisySpectrum, showcase: bool) -> Result<CellOutput> {
    let p = data.problem();
    let grid = linear_grid(config, p)?;
    let path = path_quantities(data, &grid);
    let errors: Vec<f64> = match config.metric {
        Metric::L2 => error_curve(data, &grid).total,
        metric => {
            let xdag = p.xdag_domain();
            grid.values()
                .iter()
                .map(|&a| vec_metric(metric, &p.to_domain(&tikhonov_coeffs(data, a)?.x), &xdag, None))
                .collect::<Result<_>>()?
        }
    };
    let min = min_of(&errors);
    let (level, seed) = (data.rel_level(), data.seed());
    let mut records = Vec::with_capacity(config.rules.len());
    let mut curves = Vec::new();
    for rule in &config.rules {
        let BenchRule::Tikhonov(id) = rule else { unreachable!("validated") };
        let sel = rule_curve(*id, data, &path, &grid).and_then(|c| {
            let s = select_alpha(&c);
            if showcase {
                curves.push((id.name().to_string(), c.values.clone(), s.as_ref().ok().map(|s| s.grid_index)));
            }
            s
        });
        let pick = sel.ok().map(|s| (s.grid_index, s.interior));
        records.push(record(level, seed, rule, grid.values(), pick, &errors, min));
    }
    let [c1, c2, d1, d2] = condition_summary(data, &grid)?;
    let condition = Some(ConditionRow { level, seed, c1: c1.constant, c2: c2.constant, d1: d1.constant, d2: d2.constant });
    let showcase = showcase.then(|| Showcase {
        level,
        seed,
        residual: path.rho.iter().map(|r| r.sqrt()).collect(),
        size: path.eta.iter().map(|e| e.sqrt()).collect(),
        size_label: "‖x‖".into(),
        alpha: grid.values().to_vec(),
        curves,
    });
    Ok(CellOutput { records, condition, showcase, clamps: (0, 0) })
}

fn convex_cell(config: &ExperimentConfig, data: &NoisySpectrum, penalty: PenaltyKind, showcase: bool) -> Result<CellOutput> {
    let p = data.problem();
    let y = data.y_delta();
    let grid = match config.grid {
        GridSpec::Explicit { min, max, count } => AlphaGrid::new(min, max, count)?,
        GridSpec::Auto(_) => default_convex_grid(p, &y, config.grid_count())?,
    };
    let path: ConvexPath = convex_path(p, &y, &grid, &penalty, &config.fista, Exec::Serial)?;
    let xdag = p.xdag_domain();
    let errors: Vec<f64> =
        path.points.iter().map(|pt| vec_metric(config.metric, &pt.first.x, &xdag, Some(&penalty))).collect::<Result<_>>()?;
    let min = min_of(&errors);
    let residual: Vec<f64> = path
        .points
        .iter()
        .map(|pt| p.apply(&pt.first.x).iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
        .collect();
    let size: Vec<f64> = path.points.iter().map(|pt| pt.first.penalty_value).collect();
    let (level, seed) = (data.rel_level(), data.seed());
    let mut records = Vec::new();
    let mut curves = Vec::new();
    let mut clamps = (0, 0);
    for rule in &config.rules {
        let (values, sense) = match rule {
            BenchRule::Convex(r) => {
                let c = path.rule_curve(*r, &penalty);
                if *r == crate::convex::ConvexRule::QoRight {
                    clamps.0 += c.clamps;
                    clamps.1 += c.values.iter().filter(|v| v.is_some()).count();
                }
                (c.values, Sense::Minimize)
            }
            BenchRule::ConvexLCurve => {
                let ok = residual.iter().chain(&size).all(|&v| v > 0.0);
                let v = if ok {
                    let xs: Vec<f64> = residual.iter().map(|r| r.ln()).collect();
                    let ys: Vec<f64> = size.iter().map(|r| r.ln()).collect();
                    discrete_curvature(&xs, &ys).unwrap_or_else(|_| vec![None; xs.len()])
                } else {
                    vec![None; residual.len()]
                };
                (v, Sense::Maximize)
            }
            BenchRule::Tikhonov(_) => unreachable!("validated"),
        };
        let pick = select_extremum(&values, sense).map(|(k, interior, _)| (k, interior));
        if showcase {
            curves.push((rule.name().to_string(), values, pick.map(|(k, _)| k)));
        }
        records.push(record(level, seed, rule, grid.values(), pick, &errors, min));
    }
    let showcase = showcase.then(|| Showcase {
        level,
        seed,
        residual,
        size,
        size_label: format!("R(x), {penalty}"),
        alpha: grid.values().to_vec(),
        curves,
    });
    Ok(CellOutput { records, condition: None, showcase, clamps })
}

pub fn run_experiment(config: &ExperimentConfig, exec: Exec) -> Result<ExperimentReport> {
    config.validate()?;
    let problem = Arc::new(config.problem.build()?);
    let cells: Vec<(usize, usize)> =
        (0..config.levels.len()).flat_map(|li| (0..config.runs).map(move |run| (li, run))).collect();
    let show_level = config.levels.len() / 2;
    let outputs = exec.map(&cells, |&(li, run)| {
        let level = config.levels[li];
        let seed = cell_seed(config.seed_base, run, li);
        let showcase = li == show_level && run == 0;
        let out = add_noise(&problem, level, config.noise_decay, seed).and_then(|data| match config.penalty {
            Some(pen) => convex_cell(config, &data, pen, showcase),
            None => linear_cell(config, &data, showcase),
        });
        out.unwrap_or_else(|_| CellOutput {
            records: config.rules.iter().map(|r| failed(level, seed, r, f64::NAN)).collect(),
            condition: None,
            showcase: None,
            clamps: (0, 0),
        })
    });
    let mut report = ExperimentReport {
        config: config.clone(),
        records: Vec::new(),
        medians: Vec::new(),
        conditions: Vec::new(),
        showcase: None,
        clamps: (0, 0),
    };
    for out in outputs {
        report.records.extend(out.records);
        report.conditions.extend(out.condition);
        if out.showcase.is_some() {
            report.showcase = out.showcase;
        }
        report.clamps.0 += out.clamps.0;
        report.clamps.1 += out.clamps.1;
    }
    report.medians = aggregate(config, &report.records);
    Ok(report)
}

/// Median of the named rule in the given class, if present.
pub fn class_median(report: &ExperimentReport, class: NoiseClass, rule: &str) -> Option<f64> {
    report.medians.iter().find(|m| m.class == class && m.rule == rule).and_then(|m| m.median)
}

pub fn records_to_csv(records: &[RawRecord]) -> String {
    let mut s = String::from("level,seed,rule,alpha_star,interior,J,selected_error,min_error\n");
    for r in records {
        let j = r.j.map_or_else(|| "nan".to_string(), |j| j.to_string());
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.level, r.seed, r.rule, r.alpha_star, r.interior, j, r.selected_error, r.min_error
        ));
    }
    s
}

pub fn records_from_csv(text: &str) -> Result<Vec<RawRecord>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty raw CSV".into()))?;
    if header != "level,seed,rule,alpha_star,interior,J,selected_error,min_error" {
        return Err(Error::Parse(format!("unexpected raw CSV header {header:?}")));
    }
    let num = |v: &str| v.parse::<f64>().map_err(|_| Error::Parse(format!("bad number {v:?}")));
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 8 {
                return Err(Error::Parse(format!("raw CSV row has {} fields", f.len())));
            }
            let j = num(f[5])?;
            Ok(RawRecord {
                level: num(f[0])?,
                seed: f[1].parse().map_err(|_| Error::Parse(format!("bad seed {:?}", f[1])))?,
                rule: f[2].to_string(),
                alpha_star: num(f[3])?,
                interior: f[4].parse().map_err(|_| Error::Parse(format!("bad flag {:?}", f[4])))?,
                j: (!j.is_nan()).then_some(j),
                selected_error: num(f[6])?,
                min_error: num(f[7])?,
            })
        })
        .collect()
}

/// Rebuilds the aggregate part of a report from its raw CSV.
pub fn report_from_raw_csv(config: &ExperimentConfig, text: &str) -> Result<ExperimentReport> {
    let records = records_from_csv(text)?;
    let medians = aggregate(config, &records);
    Ok(ExperimentReport { config: config.clone(), records, medians, conditions: Vec::new(), showcase: None, clamps: (0, 0) })
}

pub fn conditions_to_csv(rows: &[ConditionRow]) -> String {
    let mut s = String::from("level,seed,C1,C2,D1,D2\n");
    for r in rows {
        s.push_str(&format!("{},{},{},{},{},{}\n", r.level, r.seed, r.c1, r.c2, r.d1, r.d2));
    }
    s
}
