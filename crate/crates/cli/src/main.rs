mod input;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use parrondo_core::diffusion::{self, DriftProfile};
use parrondo_core::game::{self, EpsilonFamily, GameClass, DEFAULT_TOL};
use parrondo_core::mixture::{self, MixtureProblem, PatternSchedule, StartParity};
use parrondo_core::montecarlo::{self, SimConfig, SimGame, DEFAULT_BURN_IN};
use parrondo_core::{hitting, stationary, Error, GainReport, Result};
use serde_json::{json, Value};

use input::{parse_list, parse_reals, GameArgs};
use output::{Format, Output};

#[derive(Debug, Parser)]
#[command(
    name = "parrondo",
    version,
    about = "Exact analysis and simulation of mod-m random walks and Parrondo games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// output format (each command has its own default)
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// write to FILE instead of stdout
    #[arg(long, short, global = true, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify one walk and compute its gain by both routes
    Analyze {
        #[command(flatten)]
        games: GameArgs,
        /// relative tolerance of the fairness test
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Random or periodic mixture of two games
    Mix {
        #[command(subcommand)]
        mode: MixMode,
    },
    /// Coefficients of the mixture polynomial Q
    Qpoly {
        /// lower-game odds a
        #[arg(long, requires_all = ["lambda", "r"])]
        a: Option<f64>,
        /// mixing odds (1 - π)/π
        #[arg(long)]
        lambda: Option<f64>,
        /// r = m - 1
        #[arg(long)]
        r: Option<usize>,
        /// weight of the first game when deriving a, λ, r from two games
        #[arg(long)]
        pi: Option<f64>,
        #[command(flatten)]
        games: GameArgs,
    },
    /// Periodic shift diffusions
    Diffusion {
        #[command(subcommand)]
        dir: DiffusionDir,
    },
    /// Monte Carlo estimates against exact values
    Simulate {
        #[command(flatten)]
        games: GameArgs,
        /// play the first game with this probability each step (two games)
        #[arg(long, conflicts_with = "sched")]
        pi: Option<f64>,
        /// periodic schedule over A and B (two games)
        #[arg(long)]
        sched: Option<String>,
        /// steps per replica
        #[arg(long, default_value_t = 10_000)]
        steps: u64,
        /// independent replicas
        #[arg(long, default_value_t = 1_000)]
        replicas: u64,
        /// base seed; replica k uses stream k
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// steps discarded before the stationary estimate
        #[arg(long, default_value_t = DEFAULT_BURN_IN)]
        burn_in: u64,
        /// write the path of replica 0 as CSV (step, fortune)
        #[arg(long, value_name = "FILE")]
        trace: Option<PathBuf>,
    },
    /// Exact gain over a grid of ε for a perturbed game family
    Sweep {
        /// game-a, game-b or mixed
        #[arg(long, default_value = "mixed")]
        family: String,
        /// first ε of the grid
        #[arg(long, default_value_t = 0.0)]
        eps_from: f64,
        /// last ε of the grid
        #[arg(long, default_value_t = 0.01)]
        eps_to: f64,
        /// grid spacing
        #[arg(long, default_value_t = 0.001)]
        eps_step: f64,
        /// horizon n for the n·λ column
        #[arg(long, default_value_t = 100)]
        n: u64,
    },
}

#[derive(Debug, Subcommand)]
enum MixMode {
    /// Play the first game with probability --pi at each step
    Random {
        /// probability of playing the first game at each step
        #[arg(long)]
        pi: f64,
        #[command(flatten)]
        games: GameArgs,
        /// relative tolerance of the fairness test
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Play the games in the periodic order --sched (e.g. AB, AABB)
    Pattern {
        /// periodic schedule over A and B, such as AABB
        #[arg(long)]
        sched: String,
        #[command(flatten)]
        games: GameArgs,
        /// relative tolerance of the fairness test
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
}

#[derive(Debug, Subcommand)]
enum DiffusionDir {
    /// Embedded walk of a drift profile
    Forward {
        /// comma-separated drift rates μ_0, ..., μ_{m-1}
        #[arg(long, allow_hyphen_values = true)]
        mu: String,
    },
    /// Drift rates of a recurrent m = 3 walk
    Invert {
        /// comma-separated p0, p1, p2
        #[arg(long)]
        p: String,
    },
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn analyze(games: &GameArgs, tol: f64) -> Result<Output> {
    let w = games.one()?.walk()?;
    let report = GainReport::compute(&w, tol)?;
    let mut doc = to_value(&report);
    let cofactors = stationary::diag_cofactors_det(&stationary::congruence_matrix(&w))?;
    doc["cofactors"] = to_value(&cofactors);
    doc["stationary"] = to_value(&stationary::stationary(&cofactors)?);
    doc["tau"] = to_value(&hitting::expected_interoccurrence(&w)?);
    Ok(Output::Doc(doc))
}

fn mix(mode: &MixMode) -> Result<Output> {
    match mode {
        MixMode::Random { pi, games, tol } => {
            let (a, b) = games.two()?;
            let mixed = game::mix_random(&a.walk()?, &b.walk()?, *pi)?;
            let report = GainReport::compute(&mixed, *tol)?;
            let mut doc = json!({
                "mode": "random",
                "pi": pi,
                "class": report.class,
                "lambda": report.lambda,
                "report": report,
            });
            if let (Some(sa), Some(sb)) = (a.parrondo(), b.parrondo()) {
                let mp = MixtureProblem::new(sa, sb, *pi)?;
                let odds = mp.odds();
                doc["odds"] = to_value(&odds);
                if sa.m >= 3
                    && game::classify(&a.walk()?, *tol) == GameClass::Fair
                    && game::classify(&b.walk()?, *tol) == GameClass::Fair
                {
                    doc["q_at_x"] = json!(mp.certificate()?.eval(odds.x));
                }
            }
            Ok(Output::Doc(doc))
        }
        MixMode::Pattern { sched, games, tol } => {
            let (a, b) = games.two()?;
            let (wa, wb) = (a.walk()?, b.walk()?);
            let sched = PatternSchedule::new(sched)?;
            let gain = mixture::pattern_gain(&wa, &wb, &sched)?;
            let class = if gain.abs() <= *tol {
                GameClass::Fair
            } else if gain > 0.0 {
                GameClass::Winning
            } else {
                GameClass::Losing
            };
            let mut doc = json!({
                "mode": "pattern",
                "schedule": sched.as_str(),
                "class": class,
                "lambda": gain,
            });
            if sched.as_str() == "AB" && wa.m() % 2 == 0 && wa.has_no_holds(0.0) && wb.has_no_holds(0.0) {
                doc["quotient_even"] = json!(mixture::alternation_quotient(&wa, &wb, StartParity::Even)?);
                doc["quotient_odd"] = json!(mixture::alternation_quotient(&wa, &wb, StartParity::Odd)?);
            }
            Ok(Output::Doc(doc))
        }
    }
}

fn qpoly(
    a: Option<f64>,
    lambda: Option<f64>,
    r: Option<usize>,
    pi: Option<f64>,
    games: &GameArgs,
) -> Result<(mixture::QPolynomial, Option<f64>)> {
    match (a, lambda, r) {
        (Some(a), Some(lam), Some(r)) => {
            if !games.games()?.is_empty() || pi.is_some() {
                return Err(Error::InvalidSpec(
                    "give either --a/--lambda/--r or two games with --pi".into(),
                ));
            }
            if !(a > 0.0 && lam > 0.0 && r >= 1) {
                return Err(Error::InvalidSpec("need a > 0, lambda > 0, r >= 1".into()));
            }
            Ok((mixture::q_polynomial(a, lam, r), None))
        }
        _ => {
            let (ga, gb) = games.two()?;
            let (sa, sb) = ga
                .parrondo()
                .zip(gb.parrondo())
                .ok_or_else(|| Error::InvalidSpec("Q is defined for two Parrondo games".into()))?;
            let pi = pi.ok_or_else(|| Error::InvalidSpec("--pi is required with two games".into()))?;
            let mp = MixtureProblem::new(sa, sb, pi)?;
            Ok((mp.certificate()?, Some(mp.odds().x)))
        }
    }
}

fn diffusion_cmd(dir: &DiffusionDir) -> Result<Output> {
    match dir {
        DiffusionDir::Forward { mu } => {
            let d = DriftProfile::new(parse_reals(mu)?)?;
            Ok(Output::Doc(to_value(&diffusion::embedded_probs(&d))))
        }
        DiffusionDir::Invert { p } => {
            let p = parse_list(p)?;
            if p.len() != 3 {
                return Err(Error::InvalidSpec(format!(
                    "inversion needs three probabilities, got {}",
                    p.len()
                )));
            }
            let inv = diffusion::invert_drifts_m3(p[0], p[1], p[2])?;
            let mut doc = to_value(&inv);
            if let Some(obj) = doc.as_object_mut() {
                obj.remove("profile");
                obj.insert("mu".into(), to_value(&inv.profile.mu));
            }
            Ok(Output::Doc(doc))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    games: &GameArgs,
    pi: Option<f64>,
    sched: Option<&str>,
    steps: u64,
    replicas: u64,
    seed: u64,
    burn_in: u64,
    trace: Option<&PathBuf>,
) -> Result<Output> {
    let game = match (pi, sched) {
        (Some(pi), _) => {
            let (a, b) = games.two()?;
            SimGame::RandomMix {
                a: a.walk()?,
                b: b.walk()?,
                pi,
            }
        }
        (None, Some(s)) => {
            let (a, b) = games.two()?;
            SimGame::Pattern {
                a: a.walk()?,
                b: b.walk()?,
                sched: PatternSchedule::new(s)?,
            }
        }
        (None, None) => SimGame::Walk(games.one()?.walk()?),
    };
    let cfg = SimConfig {
        steps,
        replicas,
        seed,
        burn_in,
    };
    cfg.validate()?;
    let cmp = montecarlo::estimate_vs_exact(&game, &cfg)?;
    if let Some(path) = trace {
        let path_values = montecarlo::trace(&game, steps, seed, 0)?;
        let rows = path_values
            .iter()
            .enumerate()
            .map(|(t, &s)| vec![t as f64, s as f64])
            .collect();
        let table = Output::Table {
            header: vec!["step".into(), "fortune".into()],
            rows,
        };
        write_file(path, &table.render(Format::Csv))?;
    }
    let mut doc = to_value(&cmp);
    doc["config"] = to_value(&cfg);
    Ok(Output::Doc(doc))
}

fn sweep(family: &str, from: f64, to: f64, step: f64, n: u64) -> Result<Output> {
    let family: EpsilonFamily = family.parse()?;
    if step.is_nan() || step <= 0.0 || to < from || !from.is_finite() || !to.is_finite() {
        return Err(Error::InvalidSpec("need eps-step > 0 and eps-from <= eps-to".into()));
    }
    let count = ((to - from) / step + 1e-9).floor() as u64;
    let mut rows = Vec::new();
    for k in 0..=count {
        let eps = from + k as f64 * step;
        let lambda = stationary::asymptotic_gain_cofactor(&family.walk(eps)?)?;
        rows.push(vec![eps, lambda, n as f64 * lambda]);
    }
    Ok(Output::Table {
        header: vec!["eps".into(), "lambda".into(), "n_lambda".into()],
        rows,
    })
}

fn write_file(path: &PathBuf, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::InvalidSpec(format!("cannot write {}: {e}", path.display())))
}

fn run(cli: &Cli) -> Result<()> {
    let (out, default_format) = match &cli.command {
        Command::Analyze { games, tol } => (analyze(games, *tol)?, Format::Json),
        Command::Mix { mode } => (mix(mode)?, Format::Json),
        Command::Qpoly {
            a,
            lambda,
            r,
            pi,
            games,
        } => {
            let (qp, x) = qpoly(*a, *lambda, *r, *pi, games)?;
            let out = if cli.format == Some(Format::Json) {
                let mut doc = to_value(&qp);
                doc["diagnostics"] = to_value(&mixture::q_diagnostics(&qp)?);
                if let Some(x) = x {
                    doc["x"] = json!(x);
                    doc["q_at_x"] = json!(qp.eval(x));
                }
                Output::Doc(doc)
            } else {
                Output::Table {
                    header: vec!["degree".into(), "coefficient".into()],
                    rows: qp.coeffs.iter().enumerate().map(|(i, &c)| vec![i as f64, c]).collect(),
                }
            };
            (out, Format::Csv)
        }
        Command::Diffusion { dir } => (diffusion_cmd(dir)?, Format::Json),
        Command::Simulate {
            games,
            pi,
            sched,
            steps,
            replicas,
            seed,
            burn_in,
            trace,
        } => (
            simulate(
                games,
                *pi,
                sched.as_deref(),
                *steps,
                *replicas,
                *seed,
                *burn_in,
                trace.as_ref(),
            )?,
            Format::Json,
        ),
        Command::Sweep {
            family,
            eps_from,
            eps_to,
            eps_step,
            n,
        } => (sweep(family, *eps_from, *eps_to, *eps_step, *n)?, Format::Csv),
    };
    let text = out.render(cli.format.unwrap_or(default_format));
    match &cli.output {
        Some(path) => write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::RootBracket(_) | Error::Singular(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("parrondo: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
