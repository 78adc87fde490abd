//! `hornet`: inspect, explore and simulate `.hornet` models.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hornet_core::rate::{parse_rational, Arith, Rate, Rational};
use hornet_core::scenario::bos::{run_bos, BosParams};
use hornet_core::stochastic::export::{events_csv, observations_csv, to_dot_named, to_json, trace_csv};
use hornet_core::stochastic::{build_dmc, firing_probabilities, simulate, transient_distribution, Limits};
use hornet_core::{bundled, parse_model, print_model, EngineError, Error, Model};

const EXIT_USAGE: u8 = 2;
const EXIT_MODEL: u8 = 3;
const EXIT_LIMIT: u8 = 4;

#[derive(Parser)]
#[command(
    name = "hornet",
    version,
    about = "Stochastic nets-within-nets: events, Markov chains and simulation"
)]
struct Cli {
    /// Replace every system rate by gamma^TC when the model is loaded.
    #[arg(long, global = true, value_name = "GAMMA")]
    mape_gamma: Option<String>,

    /// Arithmetic for probabilities (overrides the model's options).
    #[arg(long, global = true, value_enum)]
    arith: Option<ArithArg>,

    /// Maximum number of modes per event (overrides the model's options).
    #[arg(long, global = true, value_name = "N")]
    mode_cap: Option<usize>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ArithArg {
    Exact,
    Float,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the events enabled in the initial marking with their probabilities (CSV).
    Events {
        /// Model file, or a bundled model name (fig2, fig3).
        model: String,
    },
    /// Build the reachable Markov chain and export it.
    Rg(RgArgs),
    /// Run one seeded trajectory and print its trace (CSV).
    Simulate {
        model: String,
        /// Seed; defaults to HORNET_SEED, then 0.
        #[arg(long, env = "HORNET_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run the Battle-of-Sexes adaptation scenario (CSV: step, prA0, prA1, structureFlag).
    Bos(BosArgs),
    /// Parse and check a model.
    Validate {
        model: String,
        /// Print the model in canonical form.
        #[arg(long)]
        print: bool,
    },
}

#[derive(Args)]
struct RgArgs {
    model: String,
    #[arg(long, default_value_t = 100_000)]
    max_states: usize,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Dot)]
    format: Format,
    /// Expand each BFS level on all cores.
    #[arg(long)]
    parallel: bool,
    /// Also print the state distribution after this many steps.
    #[arg(long, value_name = "STEPS")]
    transient: Option<usize>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BosArgs {
    #[arg(long, default_value = "70")]
    a0: String,
    #[arg(long, default_value = "30")]
    b0: String,
    #[arg(long, default_value = "55")]
    a1: String,
    #[arg(long, default_value = "45")]
    b1: String,
    /// Rewards for (a0,a1), (a0,b1), (b0,a1), (b0,b1) as `r0,r1` pairs separated by `;`.
    #[arg(long, default_value = "3,1;0,0;0,0;1,3")]
    payoff: String,
    #[arg(long, default_value = "0.8")]
    threshold: String,
    /// MAPE base; falls back to --mape-gamma, then 0.5.
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long, default_value_t = 200)]
    horizon: usize,
    #[arg(long, env = "HORNET_SEED", default_value_t = 0)]
    seed: u64,
    /// Include the fired events (full trace CSV instead of observations only).
    #[arg(long)]
    trace: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Engine(EngineError::ModeCap { .. }) | Error::Transient(_) => EXIT_LIMIT,
            _ => EXIT_MODEL,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn err(e: impl Into<Error>) -> Failure {
    Failure::from(e.into())
}

fn rational(flag: &str, s: &str) -> Result<Rational, Failure> {
    parse_rational(s).map_err(|e| Failure::usage(format!("--{flag}: {e}")))
}

fn rate(flag: &str, s: &str) -> Result<Rate, Failure> {
    Rate::parse(s).map_err(|e| Failure::usage(format!("--{flag}: {e}")))
}

fn load(cli: &Cli, spec: &str) -> Result<Model, Failure> {
    let path = Path::new(spec);
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(io) => {
            let stem = spec.strip_suffix(".hornet").unwrap_or(spec);
            match bundled::source(stem) {
                Some(s) if !path.exists() => s.to_string(),
                _ => {
                    return Err(Failure {
                        code: EXIT_MODEL,
                        message: format!("{spec}: {io}"),
                    })
                }
            }
        }
    };
    let mut m = parse_model(&text).map_err(|e| Failure {
        code: EXIT_MODEL,
        message: format!("{spec}: {e}"),
    })?;
    if let Some(g) = &cli.mape_gamma {
        m = m.with_mape_gamma(rational("mape-gamma", g)?).map_err(err)?;
    }
    if let Some(a) = cli.arith {
        m.options.arith = match a {
            ArithArg::Exact => Arith::Exact,
            ArithArg::Float => Arith::Float,
        };
    }
    if let Some(c) = cli.mode_cap {
        if c == 0 {
            return Err(Failure::usage("--mode-cap must be positive"));
        }
        m.options.mode_cap = c;
    }
    Ok(m)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure {
            code: 1,
            message: format!("{}: {e}", p.display()),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.cmd {
        Cmd::Events { model } => {
            let m = load(cli, model)?;
            let evs = firing_probabilities(&m.system, &m.marking, &m.stochastic_config()).map_err(err)?;
            print!("{}", events_csv(&evs));
        }
        Cmd::Rg(a) => {
            let m = load(cli, &a.model)?;
            let limits = Limits {
                max_states: a.max_states,
                max_depth: a.max_depth,
            };
            let dmc = build_dmc(&m.system, &m.marking, limits, &m.stochastic_config(), a.parallel).map_err(err)?;
            let mut text = match a.format {
                Format::Dot => to_dot_named(&dmc, &m.net_names()),
                Format::Json => to_json(&dmc),
            };
            if let Some(k) = a.transient {
                let dist = transient_distribution(&dmc, k, false).map_err(err)?;
                let prefix = if matches!(a.format, Format::Dot) { "// " } else { "" };
                text.push_str(&format!("{prefix}transient after {k} steps\n"));
                for (s, p) in dist.iter().enumerate().filter(|(_, p)| **p > 0.0) {
                    text.push_str(&format!("{prefix}s{s} {}\n", hornet_core::rate::format_f64_12(*p)));
                }
            }
            emit(&a.out, &text)?;
            if dmc.truncated {
                return Err(Failure {
                    code: EXIT_LIMIT,
                    message: format!(
                        "exploration stopped at {} states with {} unexpanded; output is partial",
                        dmc.states.len(),
                        dmc.frontier()
                    ),
                });
            }
        }
        Cmd::Simulate {
            model,
            seed,
            steps,
            out,
        } => {
            let m = load(cli, model)?;
            let trace = simulate(&m.system, &m.marking, *seed, *steps, &m.stochastic_config(), None).map_err(err)?;
            emit(out, &trace_csv(&trace))?;
        }
        Cmd::Bos(a) => {
            let pair = |s: &str| -> Result<(Rational, Rational), Failure> {
                let (x, y) = s
                    .split_once(',')
                    .ok_or_else(|| Failure::usage(format!("--payoff: `{s}` is not a pair")))?;
                Ok((rational("payoff", x.trim())?, rational("payoff", y.trim())?))
            };
            let cells: Vec<&str> = a.payoff.split(';').collect();
            if cells.len() != 4 {
                return Err(Failure::usage("--payoff needs four pairs"));
            }
            let gamma = a.gamma.as_deref().or(cli.mape_gamma.as_deref()).unwrap_or("0.5");
            let p = BosParams {
                a0: rate("a0", &a.a0)?,
                b0: rate("b0", &a.b0)?,
                a1: rate("a1", &a.a1)?,
                b1: rate("b1", &a.b1)?,
                payoff: [[pair(cells[0])?, pair(cells[1])?], [pair(cells[2])?, pair(cells[3])?]],
                threshold: rational("threshold", &a.threshold)?,
                gamma: rational("gamma", gamma)?,
                horizon: a.horizon,
            };
            let mut cfg = hornet_core::StochasticConfig::default();
            if let Some(ArithArg::Float) = cli.arith {
                cfg.arith = Arith::Float;
            }
            if let Some(c) = cli.mode_cap {
                cfg.engine.mode_cap = c;
            }
            let (trace, _) = run_bos(&p, a.seed, &cfg).map_err(err)?;
            let text = if a.trace {
                trace_csv(&trace)
            } else {
                observations_csv(&trace)
            };
            emit(&a.out, &text)?;
        }
        Cmd::Validate { model, print } => {
            let m = load(cli, model)?;
            if *print {
                print!("{}", print_model(&m));
            } else {
                println!(
                    "ok: {} kinds, {} places, {} transitions, {} nets, {} initial net-tokens, digest {}",
                    m.system.kinds().len(),
                    m.system.places().len(),
                    m.system.transitions().len(),
                    m.nets.len(),
                    m.marking.len(),
                    m.digest_hex()
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("hornet: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
