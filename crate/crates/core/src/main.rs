use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use simple_lcurve::bench::{
    conditions_to_csv, parse_configs, rate_regression, render_report, run_experiment, GridSpec, Metric, RateConfig,
    RateRule, ReportFormat,
};
use simple_lcurve::landweber::{default_stepsize, landweber_run};
use simple_lcurve::noise::condition_summary;
use simple_lcurve::par::with_jobs;
use simple_lcurve::path::{error_curve, path_quantities, tikhonov_coeffs, AlphaGrid};
use simple_lcurve::problem_spec::ProblemSpec;
use simple_lcurve::rules::{rule_curve, select_alpha, RuleId};
use simple_lcurve::spectral::{write_problem, SpectralProblem};
use simple_lcurve::{add_noise, Error, NoisySpectrum, Result};

const PROBLEM_HELP: &str = "Problem spec: diag:s=2,mu=0.25,n=1000[,margin=0.1][,p=..][,alt=true] | \
heat:n=64[,solution=sawtooth|blocks] | radon:img=8,angles=12,rays=12 | file:PATH";

#[derive(Parser)]
#[command(name = "simple-lcurve", version, about = "Heuristic parameter choice for Tikhonov-type regularization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a test problem in singular-value form to a file.
    Gen {
        #[arg(long, help = PROBLEM_HELP)]
        problem: ProblemSpec,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write path, rule and error curves of one noisy dataset as CSV.
    Curve {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_delimiter = ',', default_value = "simple-l,simple-l-ratio,qo,hd,hr,l-curve,v-curve,creso,brs")]
        rules: Vec<RuleId>,
        /// Also run this many Landweber steps.
        #[arg(long)]
        landweber: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Select α for one dataset and print α*, the ratio J and the interior flag.
    Select {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_delimiter = ',', required_unless_present = "rules")]
        rule: Vec<RuleId>,
        #[arg(long, value_delimiter = ',')]
        rules: Vec<RuleId>,
        /// l2 or l1 (strict needs a convex experiment).
        #[arg(long, default_value = "l2")]
        metric: Metric,
    },
    /// Run the experiments of a config file and write CSV, markdown and SVG reports.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Override the rule list of every experiment.
        #[arg(long)]
        rules: Option<String>,
        #[arg(long)]
        metric: Option<Metric>,
        #[arg(long)]
        grid: Option<GridSpec>,
    },
    /// Measure the noise and solution regularity constants of one dataset.
    Diagnose {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the convergence rate of a rule against the noise level.
    Rate {
        #[arg(long, help = PROBLEM_HELP)]
        problem: ProblemSpec,
        #[arg(long, value_delimiter = ',', default_value = "1e-5,1e-4,1e-3,3e-3,1e-2")]
        levels: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        seeds: usize,
        /// A rule name or `oracle`.
        #[arg(long, default_value = "simple-l")]
        rule: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        noise_decay: Option<f64>,
        #[arg(long, default_value_t = 200)]
        grid_count: usize,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Args)]
struct DataArgs {
    #[arg(long, help = PROBLEM_HELP)]
    problem: ProblemSpec,
    /// Relative noise level ‖e‖/‖y‖.
    #[arg(long)]
    noise: f64,
    #[arg(long)]
    seed: u64,
    /// Noise decay exponent; defaults to 0.6 for diagonal problems, 0 otherwise.
    #[arg(long)]
    noise_decay: Option<f64>,
    /// `default`, `count=N` or `min,max,count`.
    #[arg(long, default_value = "default")]
    grid: GridSpec,
}

impl DataArgs {
    fn load(&self) -> Result<(NoisySpectrum, AlphaGrid)> {
        let q = self.noise_decay.unwrap_or(if matches!(self.problem, ProblemSpec::Diagonal { .. }) { 0.6 } else { 0.0 });
        let problem: Arc<SpectralProblem> = Arc::new(self.problem.build()?);
        let data = add_noise(&problem, self.noise, q, self.seed)?;
        let grid = match self.grid {
            GridSpec::Auto(0) => AlphaGrid::for_problem(&problem),
            GridSpec::Auto(n) => AlphaGrid::for_problem_with(&problem, n),
            GridSpec::Explicit { min, max, count } => AlphaGrid::new(min, max, count)?,
        };
        Ok((data, grid))
    }
}

fn write_out(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    println!("{}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { problem, out } => {
            let p = problem.build()?;
            let mut buf = Vec::new();
            write_problem(&p, &mut buf)?;
            write_out(&out, &String::from_utf8_lossy(&buf))
        }
        Command::Curve { data, rules, landweber, out } => {
            let (d, grid) = data.load()?;
            let path = path_quantities(&d, &grid);
            write_out(&out.join("path.csv"), &path.to_csv())?;
            write_out(&out.join("errors.csv"), &error_curve(&d, &grid).to_csv())?;
            let mut rc = String::from("alpha,value,rule\n");
            for r in rules {
                rule_curve(r, &d, &path, &grid)?.to_csv_rows(&mut rc);
            }
            write_out(&out.join("rules.csv"), &rc)?;
            if let Some(steps) = landweber {
                let run = landweber_run(&d, steps, default_stepsize(&d))?;
                let mut s = String::from("k,psi_residual,psi_doubling,residual_norm,error\n");
                for k in 0..run.psi_residual.len() {
                    let dbl = run.psi_doubling.get(k).map_or_else(|| "nan".to_string(), f64::to_string);
                    s.push_str(&format!("{k},{},{dbl},{},{}\n", run.psi_residual[k], run.residual_norm[k], run.error[k]));
                }
                write_out(&out.join("landweber.csv"), &s)?;
            }
            Ok(())
        }
        Command::Select { data, rule, rules, metric } => {
            let (d, grid) = data.load()?;
            let path = path_quantities(&d, &grid);
            let p = d.problem();
            let errors: Vec<f64> = match metric {
                Metric::L2 => error_curve(&d, &grid).total,
                Metric::L1 => {
                    let xdag = p.xdag_domain();
                    grid.values()
                        .iter()
                        .map(|&a| -> Result<f64> {
                            let x = p.to_domain(&tikhonov_coeffs(&d, a)?.x);
                            Ok(x.iter().zip(&xdag).map(|(u, v)| (u - v).abs()).sum())
                        })
                        .collect::<Result<_>>()?
                }
                Metric::Strict => return Err(Error::Parameter("the strict metric needs a penalty; use `bench`".into())),
            };
            let min = errors.iter().copied().fold(f64::INFINITY, f64::min);
            println!("rule,alpha_star,interior,value,J");
            for r in rule.into_iter().chain(rules) {
                let sel = select_alpha(&rule_curve(r, &d, &path, &grid)?)?;
                let j = simple_lcurve::bench::efficiency_ratio_from(errors[sel.grid_index], min)?;
                println!("{},{j}", sel.record(r));
            }
            Ok(())
        }
        Command::Bench { config, seed, out, jobs, rules, metric, grid } => {
            let text = fs::read_to_string(&config)?;
            let mut cfgs = parse_configs(&text)?;
            let many = cfgs.len() > 1;
            for cfg in &mut cfgs {
                cfg.seed_base = seed;
                if let Some(m) = metric {
                    cfg.metric = m;
                }
                if let Some(g) = grid {
                    cfg.grid = g;
                }
                if let Some(r) = &rules {
                    let convex = cfg.penalty.is_some();
                    let line = format!("[x]\nproblem = {}\nlevels = 0.1\nruns = 1\nrules = {r}\n{}", cfg.problem, if convex { format!("penalty = {}", cfg.penalty.unwrap()) } else { String::new() });
                    cfg.rules = parse_configs(&line)?.remove(0).rules;
                }
                cfg.validate()?;
            }
            for cfg in &cfgs {
                eprintln!("running {} ({} levels x {} runs, {} rules)", cfg.name, cfg.levels.len(), cfg.runs, cfg.rules.len());
                let report = with_jobs(jobs, |exec| run_experiment(cfg, exec))?;
                let dir = if many { out.join(&cfg.name) } else { out.clone() };
                write_out(&dir.join("raw.csv"), &render_report(&report, ReportFormat::Csv)?)?;
                write_out(&dir.join("report.md"), &render_report(&report, ReportFormat::Markdown)?)?;
                if report.showcase.is_some() {
                    write_out(&dir.join("report.svg"), &render_report(&report, ReportFormat::Svg)?)?;
                }
                if !report.conditions.is_empty() {
                    write_out(&dir.join("conditions.csv"), &conditions_to_csv(&report.conditions))?;
                }
                if report.clamps.1 > 0 {
                    eprintln!("{}: {} of {} Bregman distances clamped at zero", cfg.name, report.clamps.0, report.clamps.1);
                }
            }
            Ok(())
        }
        Command::Diagnose { data, out } => {
            let (d, grid) = data.load()?;
            let reports = condition_summary(&d, &grid)?;
            println!("condition,constant,argmax_alpha");
            for r in &reports {
                let arg = r.argmax_alpha.map_or_else(|| "nan".to_string(), |a| a.to_string());
                let c = if r.is_bounded() { r.constant.to_string() } else { "unbounded".to_string() };
                println!("{},{c},{arg}", r.variant.name());
            }
            if let Some(dir) = out {
                for r in &reports {
                    write_out(&dir.join(format!("{}.csv", r.variant.name().to_ascii_lowercase())), &r.to_csv())?;
                }
            }
            Ok(())
        }
        Command::Rate { problem, levels, seeds, rule, seed, noise_decay, grid_count, jobs } => {
            let rule = if rule == "oracle" { RateRule::Oracle } else { RateRule::Rule(rule.parse()?) };
            let q = noise_decay.unwrap_or(if matches!(problem, ProblemSpec::Diagonal { .. }) { 0.6 } else { 0.0 });
            let cfg = RateConfig { problem, levels, seeds, seed_base: seed, rule, noise_decay: q, grid_count };
            let r = with_jobs(jobs, |exec| rate_regression(&cfg, exec))?;
            println!("slope,intercept");
            println!("{},{}", r.slope, r.intercept);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
