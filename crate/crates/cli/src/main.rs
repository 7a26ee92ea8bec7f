//! `expmoments`: moments of weighted exponential sums, verification suites,
//! Schur scans and the acceptance battery from the command line.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use expmoments_core::analysis::{
    logconvexity_probe, minimize_sphere, reproduce, solve_p0, solve_p0_in, solve_pstar, solve_pstar_in,
    tang_density_check, verify_all_equal, verify_claim, verify_gamma_extension, verify_hunter_exact, verify_mrtt,
    verify_stepii_bound, verify_theorem1, VerificationReport,
};
use expmoments_core::engines::{moment_with, Engine, EngineConfig};
use expmoments_core::model::{GammaSumModel, MomentQuery};
use expmoments_core::schur::failure::profile_value;
use expmoments_core::schur::failure_profile;
use expmoments_core::schur::scan::schur_scan_with;
use expmoments_core::{Error, ExecMode};

use output::{Format, Output, Table};

#[derive(Parser)]
#[command(name = "expmoments", version, about = "Sharp moment comparisons for weighted sums of exponentials")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Base seed for every random stream.
    #[arg(long, global = true, env = "EXPMOMENTS_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Relative quadrature tolerance for the numerical engines.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Run data-parallel loops on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
}

impl Global {
    fn mode(&self) -> ExecMode {
        if self.sequential {
            ExecMode::Sequential
        } else {
            ExecMode::Parallel
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// E|S - shift|^p for a model literal such as `1,-1` or `1,2^3`.
    Moment {
        #[arg(short, long)]
        model: String,
        #[arg(short, allow_negative_numbers = true)]
        p: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        shift: f64,
        /// exact, density, fourier or montecarlo; chosen automatically if absent.
        #[arg(long)]
        engine: Option<String>,
        /// E|S - shift|^p sgn(S - shift) instead.
        #[arg(long)]
        signed: bool,
        /// Monte Carlo sample count.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Run a verification suite; exits 1 on violations.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(short, allow_negative_numbers = true)]
        p: Option<f64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Largest dimension (theorem1) or largest n (all-equal).
        #[arg(short)]
        n: Option<usize>,
    },
    /// Randomized Schur-monotonicity scan along T-transforms.
    Schur {
        #[arg(short, allow_negative_numbers = true)]
        p: f64,
        #[arg(short, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 500)]
        trials: usize,
    },
    /// Two-point profile whose interior maximum breaks Schur-concavity past p = 4.
    Failure {
        #[arg(short, allow_negative_numbers = true)]
        p: f64,
    },
    /// Solve for a phase-transition exponent.
    Solve {
        #[arg(value_enum)]
        constant: Constant,
        /// Bracket, defaulting to [2, 4] for pstar and [-0.99, -0.01] for p0.
        #[arg(long, allow_negative_numbers = true, requires = "hi")]
        lo: Option<f64>,
        #[arg(long, allow_negative_numbers = true, requires = "lo")]
        hi: Option<f64>,
    },
    /// Minimize E|S_x|^p over the unit sphere.
    Minimize {
        #[arg(short, default_value_t = 2)]
        n: usize,
        #[arg(short, default_value_t = 3.0)]
        p: f64,
        #[arg(long, default_value_t = 8)]
        multistart: usize,
    },
    /// Exploratory probes that are reported, not asserted.
    Probe {
        #[arg(value_enum)]
        kind: Probe,
        #[arg(short, long)]
        model: String,
    },
    /// Run the whole acceptance battery; exits 1 if any criterion fails.
    Reproduce,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Theorem1,
    Hunter,
    Mrtt,
    AllEqual,
    Gamma,
    Claim,
    #[value(name = "stepII-bound", alias = "stepii-bound")]
    StepIiBound,
}

#[derive(Clone, Copy, ValueEnum)]
enum Constant {
    Pstar,
    P0,
}

#[derive(Clone, Copy, ValueEnum)]
enum Probe {
    /// Second differences of log(E|S|^p / E|G|^p) on p = 2, 2.5, ..., 6.
    Logconvexity,
    /// Density of the centered sum at 0 against 1/e.
    Density,
}

fn parse_model(s: &str) -> Result<GammaSumModel, Error> {
    s.parse()
}

enum Failure {
    Core(Error),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let g = &cli.global;
    let out = Output::new(g.format, g.out.clone());
    match cli.command {
        Command::Moment { model, p, shift, engine, signed, trials } => {
            let m = parse_model(&model)?;
            let engine = engine.map(|e| e.parse::<Engine>()).transpose()?;
            let q = MomentQuery::new(p, shift, signed)?;
            let mut cfg = EngineConfig::default().with_seed(g.seed).with_mode(g.mode());
            if let Some(t) = g.tol {
                cfg = cfg.with_rel_tol(t);
            }
            if let Some(n) = trials {
                cfg = cfg.with_samples(n);
            }
            let e = moment_with(&m, &q, engine, &cfg)?;
            out.emit(
                "moment",
                json!({"model": m.to_string(), "estimate": e}),
                || Table::new(&["model", "p", "shift", "engine", "value", "error"]).row(&[
                    m.to_string(),
                    p.to_string(),
                    shift.to_string(),
                    e.engine.to_string(),
                    output::num(e.value),
                    output::num(e.error),
                ]),
                || {
                    output::csv(
                        &["model", "p", "shift", "signed", "engine", "value", "error"],
                        [vec![
                            m.to_string(),
                            p.to_string(),
                            shift.to_string(),
                            signed.to_string(),
                            e.engine.to_string(),
                            output::num(e.value),
                            output::num(e.error),
                        ]],
                    )
                },
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite, p, trials, n } => {
            let seed = g.seed;
            let report = match suite {
                Suite::Theorem1 => verify_theorem1(p.unwrap_or(3.0), trials.unwrap_or(200), n.unwrap_or(8), seed)?,
                Suite::Hunter => verify_hunter_exact(trials.unwrap_or(1000), &[2, 4, 6, 8], seed)?,
                Suite::Mrtt => verify_mrtt(p.unwrap_or(0.5), trials.unwrap_or(100), seed)?,
                Suite::AllEqual => {
                    let ps = p.map_or_else(|| vec![2.0, 3.0, 4.0, 6.0], |p| vec![p]);
                    verify_all_equal(n.unwrap_or(20), &ps)?
                }
                Suite::Gamma => {
                    let ps = p.map_or_else(|| vec![2.0, 3.0, 4.5], |p| vec![p]);
                    verify_gamma_extension(&ps, trials.unwrap_or(100), seed)?
                }
                Suite::Claim => verify_claim(trials.unwrap_or(1000), seed)?,
                Suite::StepIiBound => verify_stepii_bound(p.unwrap_or(3.0), trials.unwrap_or(50), seed)?,
            };
            emit_report(&out, &report)?;
            Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Schur { p, n, trials } => {
            let r = schur_scan_with(p, n, trials, g.seed, g.mode())?;
            out.emit(
                "schur",
                serde_json::to_value(&r).expect("scan report serializes"),
                || {
                    let mut t = Table::new(&["p", "n", "trials", "verdict", "convex_hits", "concave_hits", "within_budget"])
                        .row(&[
                            p.to_string(),
                            n.to_string(),
                            trials.to_string(),
                            r.verdict.to_string(),
                            r.convex_hits.to_string(),
                            r.concave_hits.to_string(),
                            r.within_budget.to_string(),
                        ]);
                    for (label, w) in [("M_p(x) > M_p(y)", &r.convex_witness), ("M_p(x) < M_p(y)", &r.concave_witness)] {
                        if let Some(w) = w {
                            t = t.note(format!(
                                "{label}: x = {:?}, y = {:?}, M_p = {} vs {}",
                                w.x,
                                w.y,
                                output::num(w.mx),
                                output::num(w.my)
                            ));
                        }
                    }
                    t
                },
                || r.to_csv(),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Failure { p } => {
            let f = failure_profile(p)?;
            let slope = |x: f64| {
                let h = 1e-6;
                let (a, b) = ((x - h).max(0.0), x + h);
                (profile_value(b, p) - profile_value(a, p)) / (b - a)
            };
            let rows: Vec<[f64; 3]> = f.f_samples.iter().map(|&(x, v)| [x, v, slope(x)]).collect();
            out.emit(
                "failure",
                json!({"profile": f, "slopes": rows.iter().map(|r| r[2]).collect::<Vec<_>>()}),
                || {
                    let mut t = Table::new(&["quantity", "value"])
                        .row(&["p".into(), p.to_string()])
                        .row(&["f(0)".into(), output::num(f.f_at_ends.0)])
                        .row(&["f(1/sqrt2)".into(), output::num(f.f_at_ends.1)])
                        .row(&["f'(0)".into(), output::num(f.d1_at_0)])
                        .row(&["f'(1/sqrt2)".into(), output::num(f.d1_at_right)])
                        .row(&["f''(1/sqrt2)".into(), output::num(f.d2_at_right)])
                        .row(&["f''(1/sqrt2) closed form".into(), output::num(f.d2_closed_form)]);
                    t = match f.critical_point {
                        Some((x, v)) => t.row(&["interior max x".into(), output::num(x)]).row(&["interior max f".into(), output::num(v)]),
                        None => t.note("no interior maximum".into()),
                    };
                    t
                },
                || output::csv(&["x", "f", "df"], rows.iter().map(|r| r.iter().map(|v| output::num(*v)).collect::<Vec<_>>())),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve { constant, lo, hi } => {
            let (name, r) = match (constant, lo.zip(hi)) {
                (Constant::Pstar, None) => ("pstar", solve_pstar()?),
                (Constant::Pstar, Some((a, b))) => ("pstar", solve_pstar_in(a, b)?),
                (Constant::P0, None) => ("p0", solve_p0()?),
                (Constant::P0, Some((a, b))) => ("p0", solve_p0_in(a, b)?),
            };
            let cells = [name.to_string(), output::num(r.value), output::num(r.residual), r.iterations.to_string()];
            out.emit(
                "solve",
                json!({"constant": name, "root": r}),
                || Table::new(&["constant", "value", "residual", "iterations"]).row(&cells),
                || output::csv(&["constant", "value", "residual", "iterations"], [cells.to_vec()]),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Minimize { n, p, multistart } => {
            let r = minimize_sphere(n, p, multistart, g.seed)?;
            out.emit(
                "minimize",
                serde_json::to_value(&r).expect("minimizer result serializes"),
                || {
                    Table::new(&["quantity", "value"])
                        .row(&["x_min".into(), format!("{:?}", r.x_min)])
                        .row(&["value".into(), output::num(r.value)])
                        .row(&["crux residual".into(), output::num(r.crux_residual)])
                        .row(&["gradient norm".into(), output::num(r.gradient_norm)])
                        .row(&["iterations".into(), r.iterations.to_string()])
                        .row(&["converged".into(), r.converged.to_string()])
                },
                || output::csv(&["index", "x"], r.x_min.iter().enumerate().map(|(i, v)| vec![i.to_string(), output::num(*v)])),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Probe { kind, model } => {
            let m = parse_model(&model)?;
            let x = m.weights().to_vec();
            match kind {
                Probe::Logconvexity => {
                    let grid: Vec<f64> = (0..9).map(|k| 2.0 + 0.5 * f64::from(k)).collect();
                    let r = logconvexity_probe(&x, &grid)?;
                    out.emit(
                        "probe",
                        serde_json::to_value(&r).expect("probe report serializes"),
                        || {
                            let mut t = Table::new(&["p", "log_ratio", "second_difference"]);
                            for (i, (p, l)) in r.grid.iter().zip(&r.log_ratio).enumerate() {
                                let d = if i == 0 || i + 1 == r.grid.len() { "-".into() } else { output::num(r.second_differences[i - 1]) };
                                t = t.row(&[p.to_string(), output::num(*l), d]);
                            }
                            t.note(match r.pass {
                                Some(ok) => format!("symmetric model, log-convex on the grid: {ok}"),
                                None => "asymmetric model: reported only".into(),
                            })
                        },
                        || {
                            output::csv(
                                &["p", "log_ratio"],
                                r.grid.iter().zip(&r.log_ratio).map(|(p, l)| vec![p.to_string(), output::num(*l)]),
                            )
                        },
                    )?;
                }
                Probe::Density => {
                    let r = tang_density_check(&x)?;
                    let cells = [output::num(r.value), output::num(r.reference), r.at_least_reference.to_string()];
                    out.emit(
                        "probe",
                        serde_json::to_value(&r).expect("probe report serializes"),
                        || Table::new(&["density_at_0", "reference", "at_least_reference"]).row(&cells),
                        || output::csv(&["density_at_0", "reference", "at_least_reference"], [cells.to_vec()]),
                    )?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Reproduce => {
            let r = reproduce(g.seed);
            out.emit(
                "reproduce",
                serde_json::to_value(&r).expect("reproduce report serializes"),
                || {
                    let mut t = Table::plain();
                    for c in &r.criteria {
                        t = t.note(format!("{} [{:>2}] {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.id, c.name, c.detail));
                    }
                    for n in &r.notes {
                        t = t.note(format!("note: {n}"));
                    }
                    t
                },
                || {
                    output::csv(
                        &["id", "name", "pass", "detail"],
                        r.criteria.iter().map(|c| vec![c.id.to_string(), c.name.to_string(), c.pass.to_string(), c.detail.clone()]),
                    )
                },
            )?;
            Ok(if r.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn emit_report(out: &Output, r: &VerificationReport) -> std::io::Result<()> {
    let value: Value = serde_json::to_value(r).expect("verification report serializes");
    out.emit(
        "verify",
        value,
        || {
            let mut t = Table::new(&["suite", "pass", "trials", "violations"]).row(&[
                r.suite.clone(),
                r.pass.to_string(),
                r.trials.to_string(),
                r.violations.len().to_string(),
            ]);
            for (k, v) in &r.observations {
                t = t.note(format!("{k} = {}", output::num(*v)));
            }
            for v in r.violations.iter().take(10) {
                t = t.note(format!("violation: {} p={} lhs={} rhs={} {}", v.model, v.p, output::num(v.lhs), output::num(v.rhs), v.detail));
            }
            for n in &r.notes {
                t = t.note(format!("note: {n}"));
            }
            t
        },
        || {
            output::csv(
                &["model", "p", "lhs", "rhs", "budget", "detail"],
                r.violations.iter().map(|v| {
                    vec![v.model.clone(), v.p.to_string(), output::num(v.lhs), output::num(v.rhs), output::num(v.budget), v.detail.clone()]
                }),
            )
        },
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Core(e)) => {
            eprintln!("expmoments: {e}");
            ExitCode::from(match e {
                Error::Parse(_) => 2,
                _ => 3,
            })
        }
        Err(Failure::Io(e)) => {
            eprintln!("expmoments: cannot write output: {e}");
            ExitCode::from(4)
        }
    }
}
