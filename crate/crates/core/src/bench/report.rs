use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::problem_spec::ProblemSpec;

use super::{records_to_csv, ExperimentReport, GridSpec, NoiseClass, Showcase};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
    Svg,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "markdown" | "md" => Ok(Self::Markdown),
            "csv" => Ok(Self::Csv),
            "svg" => Ok(Self::Svg),
            other => Err(Error::param(format!("unknown report format {other:?}"))),
        }
    }
}

pub fn render_report(report: &ExperimentReport, format: ReportFormat) -> Result<String> {
    if report.config.rules.is_empty() {
        return Err(Error::param("report has an empty rule list"));
    }
    match format {
        ReportFormat::Markdown => Ok(markdown(report)),
        ReportFormat::Csv => Ok(records_to_csv(&report.records)),
        ReportFormat::Svg => {
            let show = report.showcase.as_ref().ok_or_else(|| Error::param("report carries no curves to plot"))?;
            Ok(svg(&report.config.name, show))
        }
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(", ")
}

fn markdown(report: &ExperimentReport) -> String {
    let c = &report.config;
    let convex = c.penalty.is_some();
    let mut s = String::new();
    let _ = writeln!(s, "# {}\n", c.name);
    let _ = writeln!(s, "- problem: `{}`", c.problem);
    let _ = writeln!(s, "- relative noise levels: {}", join(&c.levels));
    let _ = writeln!(s, "- runs per level: {}", c.runs);
    let _ = writeln!(s, "- seed base: {}", c.seed_base);
    let _ = writeln!(s, "- noise decay exponent: {}", c.noise_decay);
    let grid = match (c.grid, convex) {
        (GridSpec::Explicit { min, max, count }, _) => format!("{count} geometric points on [{min}, {max}]"),
        (_, false) => format!("{} geometric points on [max(σ_min², 1e-9·σ_1²), σ_1²]", c.grid_count()),
        (_, true) => format!("{} geometric points on [1e-6·α_max, α_max], α_max = 2‖Aᵀy_δ‖_∞", c.grid_count()),
    };
    let _ = writeln!(s, "- α-grid: {grid}");
    let _ = writeln!(s, "- error metric: {}", c.metric);
    if let Some(p) = c.penalty {
        let _ = writeln!(s, "- penalty: {p} (FISTA, at most {} iterations)", c.fista.max_iter);
    }
    s.push('\n');

    s.push('|');
    for r in &c.rules {
        let _ = write!(s, " | {r}");
    }
    s.push_str(" |\n|---");
    for _ in &c.rules {
        s.push_str("|---:");
    }
    s.push_str("|\n");
    for class in NoiseClass::ALL {
        let row: Vec<_> = report.medians.iter().filter(|m| m.class == class).collect();
        if row.is_empty() {
            continue;
        }
        let _ = write!(s, "| {}", class.label());
        for m in row {
            let cell = m.median.map_or_else(|| "n/a".to_string(), |v| format!("{v:.2}"));
            let mark = if m.failures > 0 { format!(" *{}", m.failures) } else { String::new() };
            let _ = write!(s, " | {cell}{mark}");
        }
        s.push_str(" |\n");
    }
    s.push_str(
        "\nEntries are medians of the efficiency ratio J = error(α*) / min over the grid of error(α), \
taken over all (level, seed) pairs of a class; even sample sizes use the lower median. \
`*k` marks k records where the rule produced no ratio.\n\n\
Noise classes: small = {0.01%, 0.1%}, medium = {1%, 5%}, large = {10%, 20%}, and a separate 50% row. \
Levels in between fall into the nearest class by the cut points 0.5%, 7.5% and 35%.\n",
    );
    if !convex {
        s.push_str("\nSelections at a grid end are counted as the rule's answer.\n");
    }
    if matches!(c.problem, ProblemSpec::Radon { .. }) {
        s.push_str("\nThe operator is a small ray-driven parallel-beam analogue of a tomography matrix, not a bit-compatible copy of any toolbox operator.\n");
    }
    s
}

const PALETTE: [&str; 10] =
    ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

struct Panel {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xr: (f64, f64),
    yr: (f64, f64),
}

impl Panel {
    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let fx = if self.xr.1 > self.xr.0 { (x - self.xr.0) / (self.xr.1 - self.xr.0) } else { 0.5 };
        let fy = if self.yr.1 > self.yr.0 { (y - self.yr.0) / (self.yr.1 - self.yr.0) } else { 0.5 };
        (self.x0 + fx * self.w, self.y0 + (1.0 - fy) * self.h)
    }
}

fn range(v: impl Iterator<Item = f64>) -> (f64, f64) {
    v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)))
}

fn polyline(s: &mut String, panel: &Panel, pts: &[Option<(f64, f64)>], colour: &str) {
    for run in pts.split(|p| p.is_none()) {
        if run.len() < 2 {
            continue;
        }
        s.push_str("<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"");
        s.push_str(colour);
        s.push_str("\" points=\"");
        for p in run.iter().flatten() {
            let (x, y) = panel.map(p.0, p.1);
            let _ = write!(s, "{x:.2},{y:.2} ");
        }
        s.push_str("\"/>\n");
    }
}

fn svg(name: &str, show: &Showcase) -> String {
    let (w, h) = (960.0, 420.0);
    let mut s = String::new();
    let _ = writeln!(s, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">");
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    let _ = writeln!(s, "<text x=\"20\" y=\"20\">{name}: δ = {}, seed {}</text>", show.level, show.seed);

    // left: log-log L-curve with selected points
    let lc: Vec<Option<(f64, f64)>> = show
        .residual
        .iter()
        .zip(&show.size)
        .map(|(&r, &z)| (r > 0.0 && z > 0.0).then(|| (r.log10(), z.log10())))
        .collect();
    let left = Panel {
        x0: 60.0,
        y0: 40.0,
        w: 380.0,
        h: 320.0,
        xr: range(lc.iter().flatten().map(|p| p.0)),
        yr: range(lc.iter().flatten().map(|p| p.1)),
    };
    let _ = writeln!(s, "<rect x=\"60\" y=\"40\" width=\"380\" height=\"320\" fill=\"none\" stroke=\"black\"/>");
    let _ = writeln!(s, "<text x=\"160\" y=\"385\">log10 ‖Ax − y_δ‖</text>");
    let _ = writeln!(s, "<text x=\"10\" y=\"30\">log10 {}</text>", show.size_label);
    polyline(&mut s, &left, &lc, "black");
    for (i, (_, _, sel)) in show.curves.iter().enumerate() {
        if let Some(p) = sel.and_then(|k| lc[k]) {
            let (x, y) = left.map(p.0, p.1);
            let _ = writeln!(s, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"4\" fill=\"{}\"/>", PALETTE[i % PALETTE.len()]);
        }
    }

    // right: rule functionals over log α, each scaled to [0, 1]
    let la: Vec<f64> = show.alpha.iter().map(|a| a.log10()).collect();
    let right = Panel { x0: 520.0, y0: 40.0, w: 300.0, h: 320.0, xr: range(la.iter().copied()), yr: (0.0, 1.0) };
    let _ = writeln!(s, "<rect x=\"520\" y=\"40\" width=\"300\" height=\"320\" fill=\"none\" stroke=\"black\"/>");
    let _ = writeln!(s, "<text x=\"620\" y=\"385\">log10 α</text>");
    for (i, (rule, vals, sel)) in show.curves.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let (lo, hi) = range(vals.iter().flatten().copied());
        let scale = |v: f64| if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
        let pts: Vec<Option<(f64, f64)>> = vals.iter().zip(&la).map(|(v, &a)| v.map(|v| (a, scale(v)))).collect();
        polyline(&mut s, &right, &pts, colour);
        if let Some(p) = sel.and_then(|k| pts[k]) {
            let (x, y) = right.map(p.0, p.1);
            let _ = writeln!(s, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"{colour}\"/>");
        }
        let ly = 50.0 + 16.0 * i as f64;
        let _ = writeln!(s, "<rect x=\"835\" y=\"{:.2}\" width=\"10\" height=\"10\" fill=\"{colour}\"/>", ly - 9.0);
        let _ = writeln!(s, "<text x=\"850\" y=\"{ly:.2}\">{rule}</text>");
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;
    use crate::rules::RuleId;

    fn config() -> ExperimentConfig {
        ExperimentConfig {
            name: "unit".into(),
            problem: "diag:s=2,mu=0.25,n=10".parse().unwrap(),
            levels: vec![0.01],
            runs: 1,
            rules: vec![BenchRule::Tikhonov(RuleId::SimpleL)],
            grid: GridSpec::Auto(0),
            seed_base: 0,
            metric: Metric::L2,
            noise_decay: 0.6,
            penalty: None,
            fista: Default::default(),
        }
    }

    #[test]
    fn one_record_one_row() {
        let cfg = config();
        let records = vec![RawRecord {
            level: 0.01,
            seed: 0,
            rule: "simple-l".into(),
            alpha_star: 0.1,
            interior: true,
            j: Some(1.5),
            selected_error: 0.3,
            min_error: 0.2,
        }];
        let medians = aggregate(&cfg, &records);
        let rep = ExperimentReport { config: cfg, records, medians, conditions: vec![], showcase: None, clamps: (0, 0) };
        let md = render_report(&rep, ReportFormat::Markdown).unwrap();
        let rows: Vec<&str> = md.lines().filter(|l| l.starts_with("| δ")).collect();
        assert_eq!(rows, vec!["| δ medium | 1.50 |"]);
        assert!(render_report(&rep, ReportFormat::Svg).is_err());
        assert_eq!(render_report(&rep, ReportFormat::Csv).unwrap().lines().count(), 2);
    }

    #[test]
    fn empty_rules_rejected() {
        let mut cfg = config();
        cfg.rules.clear();
        let rep = ExperimentReport { config: cfg, records: vec![], medians: vec![], conditions: vec![], showcase: None, clamps: (0, 0) };
        assert!(render_report(&rep, ReportFormat::Markdown).is_err());
        assert!("pdf".parse::<ReportFormat>().is_err());
    }
}
