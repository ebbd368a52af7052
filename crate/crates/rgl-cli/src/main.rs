//! `rgl` command line: run experiments from a JSON config, bisect
//! thresholds, evaluate the analytical oracles, or run the verification
//! battery. Exit codes: 0 success, 1 predicate or assertion failure,
//! 2 configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use rgl_core::diagnostics;
use rgl_core::lab::{self, ExperimentConfig, Predicate};
use rgl_core::oracles::{
    self, adaptive_thresholds, block_eigen_closed_form, build_projective_plane, integrate_x,
    kpartite_threshold, lower_bound_general, lower_bound_two_colors, optimize_adaptive,
    optimize_gamma_general, optimize_gamma_two_colors, KernelMatrix,
};

#[derive(Parser)]
#[command(name = "rgl", version, about = "Edge-coloring games on random graph processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Bisect the scaled time where a predicate flips its majority.
    Threshold {
        #[arg(long)]
        config: PathBuf,
        /// Predicate name: giant | not-all-giant | small-log | below.
        #[arg(long)]
        predicate: String,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long)]
        res: f64,
        /// Fraction parameter for giant/not-all-giant/below (default 0.005)
        /// or factor for small-log (default 30).
        #[arg(long)]
        frac: Option<f64>,
    },
    /// Print an analytical oracle as JSON.
    Oracle {
        #[command(subcommand)]
        oracle: OracleCmd,
    },
    /// Run the structural verification battery.
    Verify,
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Integrate the avoidance ODE and report its blow-up.
    XBlowup {
        #[arg(long, default_value_t = 1e-4)]
        step: f64,
        #[arg(long, default_value_t = 1.2)]
        t_max: f64,
    },
    /// The 20-term checkpoint sequence driven by the ODE.
    Checkpoints,
    /// Closed-form susceptibility evolution (1/L - 2t)^-1.
    Phi {
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 1.0)]
        l: f64,
    },
    /// Isolated-vertex and matching curves at scaled time t.
    Matching {
        #[arg(long)]
        t: f64,
    },
    /// Creation lower-bound ledger for r colors (r a power of two).
    GeneralBound {
        #[arg(long)]
        r: u64,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        optimize: bool,
    },
    /// Two-color creation lower bound.
    TwoColorBound {
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        optimize: bool,
    },
    /// Projective plane of prime order q.
    Plane {
        #[arg(long)]
        q: u32,
    },
    /// Spectral radius of a symmetric matrix, rows separated by ';'.
    Spectral {
        #[arg(long)]
        matrix: String,
        /// Normalize by the dimension before taking the radius.
        #[arg(long)]
        normalized: bool,
    },
    /// Closed-form radii of the top-left block split.
    BlockEigen {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        t: f64,
    },
    /// Giant threshold of the k-partite model.
    Kpartite {
        #[arg(long)]
        k: usize,
    },
    /// Adaptive two-phase thresholds at switch t, or their optimum.
    Adaptive {
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        optimize: bool,
    },
}

enum CliError {
    /// Bad input or configuration: exit 2.
    Config(String),
    /// A predicate or assertion did not hold: exit 1.
    Check(String),
}

impl From<rgl_core::Error> for CliError {
    fn from(e: rgl_core::Error) -> Self {
        match e {
            rgl_core::Error::InconsistentBracket(msg) => CliError::Check(msg),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Check(msg)) => {
            eprintln!("rgl: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Config(msg)) => {
            eprintln!("rgl: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}

fn parse_predicate(name: &str, frac: Option<f64>) -> Result<Predicate, CliError> {
    match name {
        "giant" => Ok(Predicate::AllColorsGiant {
            min_frac: frac.unwrap_or(0.005),
        }),
        "not-all-giant" => Ok(Predicate::NotAllColorsGiant {
            min_frac: frac.unwrap_or(0.005),
        }),
        "below" => Ok(Predicate::AllColorsBelow {
            max_frac: frac.ok_or_else(|| {
                CliError::Config("predicate 'below' needs --frac".into())
            })?,
        }),
        "small-log" => Ok(Predicate::AllColorsSmallLog {
            factor: frac.unwrap_or(30.0),
        }),
        other => Err(CliError::Config(format!(
            "unknown predicate {other:?}; use giant | not-all-giant | below | small-log"
        ))),
    }
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json encoding"));
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { config } => {
            let config = load_config(&config)?;
            let report = lab::run_experiment(&config)?;
            if let Some(output) = &config.output {
                lab::emit(&report, output)?;
            }
            print_json(&json!({
                "n": report.n,
                "r": report.r,
                "trials": report.trials,
                "aggregates": report.aggregates,
                "success_fraction": report.success_fraction,
            }));
            if let Some(fraction) = report.success_fraction {
                if fraction < config.require_fraction {
                    return Err(CliError::Check(format!(
                        "predicate held in fraction {fraction:.3} of trials, below the required {:.3}",
                        config.require_fraction
                    )));
                }
            }
            Ok(())
        }
        Command::Threshold {
            config,
            predicate,
            lo,
            hi,
            res,
            frac,
        } => {
            let config = load_config(&config)?;
            let predicate = parse_predicate(&predicate, frac)?;
            let estimate = lab::estimate_threshold(&config, predicate, lo, hi, res)?;
            print_json(&serde_json::to_value(&estimate)?);
            Ok(())
        }
        Command::Oracle { oracle } => run_oracle(oracle),
        Command::Verify => verify(),
    }
}

fn run_oracle(cmd: OracleCmd) -> Result<(), CliError> {
    match cmd {
        OracleCmd::XBlowup { step, t_max } => {
            let sol = integrate_x(t_max, step)?;
            print_json(&json!({
                "step": sol.step,
                "blow_up_time": sol.blow_up_time,
                "last_grid_t": sol.grid.last(),
                "x_at_1_0": sol.value_at(1.0),
                "x_at_1_06": sol.value_at(1.06),
            }));
        }
        OracleCmd::Checkpoints => {
            let ts = oracles::checkpoint_sequence();
            print_json(&json!({ "t": ts, "t19": ts[19] }));
        }
        OracleCmd::Phi { t, l } => match oracles::phi(t, l) {
            Ok(value) => print_json(&json!({ "t": t, "l": l, "phi": value })),
            Err(_) => print_json(&json!({
                "t": t,
                "l": l,
                "phi": null,
                "blow_up_at": 1.0 / (2.0 * l),
            })),
        },
        OracleCmd::Matching { t } => {
            let (i, b) = oracles::matching_curves(t);
            print_json(&json!({ "t": t, "isolated": i, "matching": b }));
        }
        OracleCmd::GeneralBound { r, gamma, optimize } => match (optimize, gamma) {
            (false, Some(gamma)) => {
                print_json(&serde_json::to_value(lower_bound_general(r, gamma)?)?)
            }
            _ => {
                let (g, objective) = optimize_gamma_general();
                let ledger = lower_bound_general(r, g)?;
                print_json(&json!({
                    "optimal_gamma": g,
                    "objective_per_doubling": objective,
                    "edge_coefficient_per_log2_r": objective / 2.0,
                    "ledger": ledger,
                }));
            }
        },
        OracleCmd::TwoColorBound { gamma, optimize } => match (optimize, gamma) {
            (false, Some(gamma)) => print_json(&json!({
                "gamma": gamma,
                "edge_coefficient": lower_bound_two_colors(gamma)?,
            })),
            _ => {
                let (g, value) = optimize_gamma_two_colors();
                print_json(&json!({ "optimal_gamma": g, "edge_coefficient": value }));
            }
        },
        OracleCmd::Plane { q } => {
            let plane = build_projective_plane(q)?;
            print_json(&json!({
                "q": plane.q,
                "order": plane.order,
                "lines": plane.lines,
            }));
        }
        OracleCmd::Spectral { matrix, normalized } => {
            let rows: Vec<Vec<f64>> = matrix
                .split(';')
                .map(|row| {
                    row.split(',')
                        .map(|x| x.trim().parse::<f64>())
                        .collect::<Result<Vec<f64>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Config(format!("bad matrix entry: {e}")))?;
            let m = KernelMatrix::from_rows(&rows)?;
            let m = if normalized { m.normalized() } else { m };
            print_json(&json!({
                "k": m.dim(),
                "normalized": normalized,
                "spectral_radius": m.spectral_radius(),
            }));
        }
        OracleCmd::BlockEigen { k, t } => {
            let eig = block_eigen_closed_form(k, t)?;
            print_json(&serde_json::to_value(eig)?);
        }
        OracleCmd::Kpartite { k } => {
            print_json(&json!({ "k": k, "threshold": kpartite_threshold(k)? }));
        }
        OracleCmd::Adaptive { t, optimize } => match (optimize, t) {
            (false, Some(t)) => print_json(&serde_json::to_value(adaptive_thresholds(t)?)?),
            _ => {
                let (t_star, thresholds) = optimize_adaptive();
                print_json(&json!({
                    "optimal_t": t_star,
                    "alpha": thresholds.alpha,
                    "red_rounds": thresholds.red_rounds,
                    "blue_rounds": thresholds.blue_rounds,
                    "rounds": thresholds.red_rounds.max(thresholds.blue_rounds),
                }));
            }
        },
    }
    Ok(())
}

fn verify() -> Result<(), CliError> {
    let mut failures = 0usize;
    for check in diagnostics::run_battery() {
        let status = if check.passed { "ok" } else { "FAIL" };
        println!("{:<24} {} ({})", check.name, status, check.detail);
        if !check.passed {
            failures += 1;
        }
    }

    // plane incidence and spectral cross-checks on top of the battery
    for q in [2u32, 3, 5, 7] {
        let ok = build_projective_plane(q).is_ok();
        println!("{:<24} {} (order {q})", "plane-incidence", if ok { "ok" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    }
    let mut spectral_ok = true;
    for k in 2..=50usize {
        let eig = block_eigen_closed_form(k, (2 * k / 3) as f64)?;
        let a1 = KernelMatrix::top_left_ones(k, 2 * k / 3);
        if (a1.spectral_radius() - eig.rho1).abs() > 1e-9
            || (a1.complement().spectral_radius() - eig.rho2).abs() > 1e-9
        {
            spectral_ok = false;
        }
    }
    println!(
        "{:<24} {} (closed forms vs power iteration, k <= 50)",
        "spectral-cross-check",
        if spectral_ok { "ok" } else { "FAIL" }
    );
    if !spectral_ok {
        failures += 1;
    }

    if failures > 0 {
        return Err(CliError::Check(format!("{failures} verification checks failed")));
    }
    Ok(())
}
