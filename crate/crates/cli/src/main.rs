use std::io::Read as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use freegame::constructions::{
    birthday_repetition, clause_variable_game, counterexample_game, free_to_2csp, kfree_to_kcsp,
    parallel_repetition, threshold_repetition,
};
use freegame::experiments::{self, BipartiteRegular};
use freegame::game::FreeGame;
use freegame::json::{
    csp_from_str, game_from_str, to_json_string, CspSpec, GameSpec, LoadedGame, SCHEMA_VERSION,
};
use freegame::solvers::{self, SubsampleMode, Verdict};
use freegame::{Budget, Error};

const EXIT_BELOW_GAP: u8 = 1;
const EXIT_ERROR: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_BUDGET: u8 = 65;

#[derive(Parser)]
#[command(name = "freegame", version, about = "Free-game values, repetitions, CSP encodings, and quasipolynomial estimators")]
struct Cli {
    /// Size of the global worker pool; defaults to the machine's cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Work budget in verifier evaluations (env FREEGAME_BUDGET overrides the
    /// built-in default of 10^8).
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a game and print its JSON description.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Compute or estimate a game value.
    Solve(SolveArgs),
    /// Dense CSP operations.
    #[command(subcommand)]
    Csp(CspCommand),
    /// Convert between representations.
    #[command(subcommand)]
    Convert(ConvertCommand),
    /// Exact small-scale verification experiments.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

#[derive(Subcommand)]
enum GenCommand {
    /// The footnote game where repetition fails to amplify.
    Counterexample {
        #[arg(long)]
        n: usize,
    },
    /// A seeded random free game with a dense [0,1] payoff table.
    Random {
        #[arg(long)]
        x: usize,
        #[arg(long)]
        y: usize,
        #[arg(long)]
        a: usize,
        #[arg(long)]
        b: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Make the table {0,1} with this win probability.
        #[arg(long)]
        boolean: Option<f64>,
    },
    /// Clause/variable game of a 3-CNF formula (DIMACS file, or - for stdin).
    Cvgame {
        #[arg(long)]
        dimacs: String,
    },
    /// Birthday repetition, kept implicit as base + (k, l).
    Birthday {
        /// DIMACS formula for a clause/variable base.
        #[arg(long, conflicts_with = "game")]
        dimacs: Option<String>,
        /// Game JSON base (free or general two-prover).
        #[arg(long)]
        game: Option<String>,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        ell: usize,
    },
    /// m-fold parallel repetition of a two-prover game.
    Parrep {
        #[arg(long)]
        game: String,
        #[arg(long)]
        m: usize,
    },
    /// N-fold repetition accepting when at least ceil(threshold * N) rounds pass.
    Threshold {
        #[arg(long)]
        game: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        threshold: f64,
    },
}

#[derive(Args)]
struct SolveArgs {
    /// Game JSON file, or - for stdin.
    #[arg(long)]
    game: String,
    /// Exact value by strategy enumeration.
    #[arg(long)]
    exact: bool,
    /// Deterministic subset estimator with this epsilon.
    #[arg(long, value_name = "EPS")]
    est: Option<f64>,
    /// Randomized single-subset estimator with this epsilon.
    #[arg(long, value_name = "EPS")]
    rest: Option<f64>,
    /// Decide value 1 versus value <= 1 - epsilon.
    #[arg(long, value_name = "EPS")]
    decide_gap: Option<f64>,
    /// Decide value 1 versus value <= delta.
    #[arg(long, value_name = "DELTA")]
    decide_delta: Option<f64>,
    /// Recursive k-player estimator with this epsilon.
    #[arg(long, value_name = "EPS")]
    est_k: Option<f64>,
    /// k-player perfect-completeness decider with this epsilon.
    #[arg(long, value_name = "EPS")]
    est_k_perfect: Option<f64>,
    /// Subsampling estimator with this epsilon.
    #[arg(long, value_name = "EPS")]
    subsample: Option<f64>,
    /// Subset-size exponent for --subsample.
    #[arg(long, default_value_t = 2.0)]
    lambda: f64,
    /// Monte Carlo trials for --subsample (exact enumeration if omitted).
    #[arg(long)]
    mc: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum CspCommand {
    /// Exact SAT value of a dense CSP JSON file.
    Sat {
        #[arg(long)]
        csp: String,
    },
    /// Exact SAT value of a DIMACS 3-CNF formula.
    Dimacs {
        #[arg(long)]
        dimacs: String,
    },
}

#[derive(Subcommand)]
enum ConvertCommand {
    /// Encode a free game as a dense 2-CSP with the same value.
    GameToCsp {
        #[arg(long)]
        game: String,
    },
    /// Encode a k-player free game as a dense k-CSP with the same value.
    KgameToCsp {
        #[arg(long)]
        game: String,
    },
    /// Materialize a game (useful to flatten an implicit birthday game).
    Materialize {
        #[arg(long)]
        game: String,
    },
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Closed-form strategy-embedding distribution vs process enumeration.
    Vardist {
        #[arg(long)]
        dimacs: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        ell: usize,
    },
    /// Exact collision probability vs the analytic bound on a biregular graph.
    Collision {
        /// Graph spec: "matching:N", "complete:A,B", or a DIMACS file for the
        /// incidence graph.
        #[arg(long)]
        graph: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        ell: usize,
    },
    /// Exact birthday soundness gap against the variation-distance bound.
    BirthdayGap {
        #[arg(long)]
        dimacs: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        ell: usize,
    },
    /// Mean subsampled value per subset size, as CSV.
    Subsample {
        #[arg(long)]
        game: String,
        /// Comma-separated subset sizes.
        #[arg(long, value_delimiter = ',')]
        kappas: Vec<usize>,
    },
    /// Threshold-repetition value per repetition count, as CSV.
    Amplify {
        #[arg(long)]
        game: String,
        #[arg(long, value_delimiter = ',')]
        ns: Vec<usize>,
        #[arg(long)]
        threshold: f64,
    },
    /// Run every corpus check and print a markdown report.
    Report,
}

fn read_input(path: &str) -> Result<String, Error> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        Ok(std::fs::read_to_string(path)?)
    }
}

fn load_game(path: &str) -> Result<LoadedGame, Error> {
    game_from_str(&read_input(path)?)?.load()
}

fn load_free(path: &str) -> Result<FreeGame, Error> {
    match load_game(path)? {
        LoadedGame::Free(g) => Ok(g),
        LoadedGame::Birthday(b) => b.as_free_game(),
        _ => Err(Error::InvalidGame(
            "this solver needs a free (uniform-product) two-prover game".into(),
        )),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn budget_from(cli_budget: Option<u64>) -> Budget {
    if let Some(b) = cli_budget {
        return Budget(b);
    }
    if let Ok(s) = std::env::var("FREEGAME_BUDGET") {
        if let Ok(b) = s.parse() {
            return Budget(b);
        }
    }
    Budget::default()
}

fn run(cli: Cli) -> Result<u8, Error> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    }
    let budget = budget_from(cli.budget);
    let out = &cli.out;

    match cli.command {
        Command::Gen(gen) => {
            let spec = match gen {
                GenCommand::Counterexample { n } => {
                    GameSpec::from_two_prover(counterexample_game(n)?.game())?
                }
                GenCommand::Random {
                    x,
                    y,
                    a,
                    b,
                    seed,
                    boolean,
                } => {
                    let g = match boolean {
                        Some(p) => freegame::testgames::seeded_boolean_game(x, y, a, b, p, seed),
                        None => freegame::testgames::seeded_free_game(x, y, a, b, seed),
                    };
                    GameSpec::from_two_prover(g.game())?
                }
                GenCommand::Cvgame { dimacs } => {
                    let phi = freegame::cnf::parse_dimacs(&read_input(&dimacs)?)?;
                    GameSpec::from_two_prover(&clause_variable_game(&phi)?)?
                }
                GenCommand::Birthday { dimacs, game, k, ell } => {
                    let base = match (dimacs, game) {
                        (Some(d), None) => {
                            let phi = freegame::cnf::parse_dimacs(&read_input(&d)?)?;
                            clause_variable_game(&phi)?
                        }
                        (None, Some(g)) => match load_game(&g)? {
                            LoadedGame::Two(b) => b,
                            LoadedGame::Free(b) => b.into_inner().with_explicit_support(),
                            _ => {
                                return Err(Error::InvalidGame(
                                    "birthday base must be a two-prover game".into(),
                                ))
                            }
                        },
                        _ => {
                            return Err(Error::InvalidParameter(
                                "give exactly one of --dimacs or --game".into(),
                            ))
                        }
                    };
                    GameSpec::from_birthday(&birthday_repetition(base, k, ell)?)?
                }
                GenCommand::Parrep { game, m } => {
                    let base = match load_game(&game)? {
                        LoadedGame::Two(g) => g,
                        LoadedGame::Free(g) => g.into_inner(),
                        LoadedGame::Birthday(b) => b.materialize()?.into_inner(),
                        LoadedGame::K(_) => {
                            return Err(Error::InvalidGame(
                                "parallel repetition needs a two-prover game".into(),
                            ))
                        }
                    };
                    GameSpec::from_two_prover(&parallel_repetition(&base, m)?)?
                }
                GenCommand::Threshold { game, n, threshold } => {
                    let base = match load_game(&game)? {
                        LoadedGame::Two(g) => g,
                        LoadedGame::Free(g) => g.into_inner(),
                        LoadedGame::Birthday(b) => b.materialize()?.into_inner(),
                        LoadedGame::K(_) => {
                            return Err(Error::InvalidGame(
                                "threshold repetition needs a two-prover game".into(),
                            ))
                        }
                    };
                    GameSpec::from_two_prover(&threshold_repetition(&base, n, threshold)?)?
                }
            };
            emit(out, &to_json_string(&spec)?)?;
            Ok(0)
        }

        Command::Solve(args) => {
            let methods = [
                args.exact,
                args.est.is_some(),
                args.rest.is_some(),
                args.decide_gap.is_some(),
                args.decide_delta.is_some(),
                args.est_k.is_some(),
                args.est_k_perfect.is_some(),
                args.subsample.is_some(),
            ];
            if methods.iter().filter(|&&m| m).count() != 1 {
                return Err(Error::InvalidParameter(
                    "pick exactly one of --exact, --est, --rest, --decide-gap, \
                     --decide-delta, --est-k, --est-k-perfect, --subsample"
                        .into(),
                ));
            }
            let mut exit = 0u8;
            let (method, params, report) = if args.exact {
                let value = match load_game(&args.game)? {
                    LoadedGame::Two(g) => g.exact_value(budget)?,
                    LoadedGame::Free(g) => g.exact_value(budget)?,
                    LoadedGame::K(g) => g.exact_value_k(budget)?,
                    LoadedGame::Birthday(b) => b.as_free_game()?.exact_value(budget)?,
                };
                ("exact", json!({}), serde_json::to_value(&value)?)
            } else if let Some(eps) = args.est {
                let g = load_free(&args.game)?;
                let rep = solvers::est_deterministic(&g, eps, budget)?;
                ("est", json!({ "epsilon": eps }), serde_json::to_value(&rep)?)
            } else if let Some(eps) = args.rest {
                let g = load_free(&args.game)?;
                let rep = solvers::est_randomized(&g, eps, args.seed, budget)?;
                (
                    "rest",
                    json!({ "epsilon": eps, "seed": args.seed }),
                    serde_json::to_value(&rep)?,
                )
            } else if let Some(eps) = args.decide_gap {
                let g = load_free(&args.game)?;
                let rep = solvers::decide_one_vs_gap(&g, eps, budget)?;
                if rep.verdict == Verdict::BelowGap {
                    exit = EXIT_BELOW_GAP;
                }
                (
                    "decide-gap",
                    json!({ "epsilon": eps }),
                    serde_json::to_value(&rep)?,
                )
            } else if let Some(delta) = args.decide_delta {
                let g = load_free(&args.game)?;
                let rep = solvers::decide_one_vs_delta(&g, delta, budget)?;
                if rep.verdict == Verdict::BelowGap {
                    exit = EXIT_BELOW_GAP;
                }
                (
                    "decide-delta",
                    json!({ "delta": delta }),
                    serde_json::to_value(&rep)?,
                )
            } else if let Some(eps) = args.est_k {
                let g = match load_game(&args.game)? {
                    LoadedGame::K(g) => g,
                    LoadedGame::Free(g) => g.to_k_player(),
                    _ => {
                        return Err(Error::InvalidGame(
                            "--est-k needs a k-player or free game".into(),
                        ))
                    }
                };
                let rep = solvers::est_k(&g, eps, budget)?;
                ("est-k", json!({ "epsilon": eps }), serde_json::to_value(&rep)?)
            } else if let Some(eps) = args.est_k_perfect {
                let g = match load_game(&args.game)? {
                    LoadedGame::K(g) => g,
                    LoadedGame::Free(g) => g.to_k_player(),
                    _ => {
                        return Err(Error::InvalidGame(
                            "--est-k-perfect needs a k-player or free game".into(),
                        ))
                    }
                };
                let rep = solvers::est_k_perfect(&g, eps, budget)?;
                if rep.verdict == Verdict::BelowGap {
                    exit = EXIT_BELOW_GAP;
                }
                (
                    "est-k-perfect",
                    json!({ "epsilon": eps }),
                    serde_json::to_value(&rep)?,
                )
            } else {
                let eps = args.subsample.unwrap();
                let g = match load_game(&args.game)? {
                    LoadedGame::K(g) => g,
                    LoadedGame::Free(g) => g.to_k_player(),
                    _ => {
                        return Err(Error::InvalidGame(
                            "--subsample needs a k-player or free game".into(),
                        ))
                    }
                };
                let mode = match args.mc {
                    Some(trials) => SubsampleMode::MonteCarlo {
                        trials,
                        seed: args.seed,
                    },
                    None => SubsampleMode::Exact,
                };
                let rep = solvers::subsample_estimate(&g, eps, args.lambda, mode, budget)?;
                (
                    "subsample",
                    json!({ "epsilon": eps, "lambda": args.lambda, "mc": args.mc, "seed": args.seed }),
                    serde_json::to_value(&rep)?,
                )
            };
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "method": method,
                "budget": budget.0,
                "params": params,
                "report": report,
            });
            emit(out, &to_json_string(&doc)?)?;
            Ok(exit)
        }

        Command::Csp(cmd) => {
            let sat = match cmd {
                CspCommand::Sat { csp } => {
                    csp_from_str(&read_input(&csp)?)?.load()?.sat_value(budget)?
                }
                CspCommand::Dimacs { dimacs } => {
                    freegame::cnf::parse_dimacs(&read_input(&dimacs)?)?.sat_value(budget)?
                }
            };
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "method": "sat",
                "report": serde_json::to_value(&sat)?,
            });
            emit(out, &to_json_string(&doc)?)?;
            Ok(0)
        }

        Command::Convert(cmd) => {
            let text = match cmd {
                ConvertCommand::GameToCsp { game } => {
                    let g = load_free(&game)?;
                    to_json_string(&CspSpec::from_csp(&free_to_2csp(&g)?)?)?
                }
                ConvertCommand::KgameToCsp { game } => {
                    let g = match load_game(&game)? {
                        LoadedGame::K(g) => g,
                        LoadedGame::Free(g) => g.to_k_player(),
                        _ => {
                            return Err(Error::InvalidGame(
                                "kgame-to-csp needs a k-player or free game".into(),
                            ))
                        }
                    };
                    to_json_string(&CspSpec::from_csp(&kfree_to_kcsp(&g)?)?)?
                }
                ConvertCommand::Materialize { game } => {
                    let spec = match load_game(&game)? {
                        LoadedGame::Birthday(b) => {
                            GameSpec::from_two_prover(b.materialize()?.game())?
                        }
                        other => {
                            let g = match other {
                                LoadedGame::Two(g) => g,
                                LoadedGame::Free(g) => g.into_inner(),
                                _ => unreachable!(),
                            };
                            GameSpec::from_two_prover(&g)?
                        }
                    };
                    to_json_string(&spec)?
                }
            };
            emit(out, &text)?;
            Ok(0)
        }

        Command::Experiment(cmd) => {
            let text = match cmd {
                ExperimentCommand::Vardist { dimacs, k, ell } => {
                    let phi = freegame::cnf::parse_dimacs(&read_input(&dimacs)?)?;
                    let rep = experiments::variation_distance(&phi, k, ell)?;
                    let doc = json!({
                        "schema_version": SCHEMA_VERSION,
                        "method": "vardist",
                        "params": { "k": k, "ell": ell },
                        "distance": rep.distance.to_string(),
                        "distance_f64": experiments::rat_to_f64(&rep.distance),
                        "bound_rhs": rep.bound_rhs,
                    });
                    to_json_string(&doc)?
                }
                ExperimentCommand::Collision { graph, k, ell } => {
                    let g = parse_graph(&graph)?;
                    let rep = experiments::collision_probability(&g, k, ell)?;
                    let doc = json!({
                        "schema_version": SCHEMA_VERSION,
                        "method": "collision",
                        "params": { "k": k, "ell": ell },
                        "exact": rep.exact.to_string(),
                        "bound": rep.bound.to_string(),
                    });
                    to_json_string(&doc)?
                }
                ExperimentCommand::BirthdayGap { dimacs, k, ell } => {
                    let phi = freegame::cnf::parse_dimacs(&read_input(&dimacs)?)?;
                    let rep = experiments::birthday_gap(&phi, k, ell, budget)?;
                    let doc = json!({
                        "schema_version": SCHEMA_VERSION,
                        "method": "birthday-gap",
                        "params": { "k": k, "ell": ell },
                        "omega_base": rep.omega_base.to_string(),
                        "omega_birthday": rep.omega_birthday.to_string(),
                        "gap": rep.gap.to_string(),
                        "distance": rep.distance.to_string(),
                        "sharp_inequality_holds": rep.sharp_inequality_holds,
                        "smallkl_ratio": rep.smallkl_ratio,
                    });
                    to_json_string(&doc)?
                }
                ExperimentCommand::Subsample { game, kappas } => {
                    let g = match load_game(&game)? {
                        LoadedGame::K(g) => g,
                        LoadedGame::Free(g) => g.to_k_player(),
                        _ => {
                            return Err(Error::InvalidGame(
                                "subsample experiment needs a k-player or free game".into(),
                            ))
                        }
                    };
                    let rows = experiments::subsample_gap_curve(&g, &kappas, budget)?;
                    experiments::subsample_curve_csv(&rows)
                }
                ExperimentCommand::Amplify { game, ns, threshold } => {
                    let base = match load_game(&game)? {
                        LoadedGame::Two(g) => g,
                        LoadedGame::Free(g) => g.into_inner(),
                        _ => {
                            return Err(Error::InvalidGame(
                                "amplify experiment needs a two-prover game".into(),
                            ))
                        }
                    };
                    let rows = experiments::amplification_curve(&base, &ns, threshold, budget)?;
                    experiments::amplification_csv(&rows)
                }
                ExperimentCommand::Report => experiments::report(budget),
            };
            emit(out, &text)?;
            Ok(0)
        }
    }
}

fn parse_graph(spec: &str) -> Result<BipartiteRegular, Error> {
    if let Some(n) = spec.strip_prefix("matching:") {
        let n = n
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad matching size in {spec:?}")))?;
        return Ok(BipartiteRegular::matching(n));
    }
    if let Some(ab) = spec.strip_prefix("complete:") {
        let (a, b) = ab
            .split_once(',')
            .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
            .ok_or_else(|| Error::InvalidParameter(format!("bad complete sizes in {spec:?}")))?;
        return Ok(BipartiteRegular::complete(a, b));
    }
    let phi = freegame::cnf::parse_dimacs(&read_input(spec)?)?;
    BipartiteRegular::from_formula(&phi)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not usage errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Error::BudgetExceeded { required, budget }) => {
            eprintln!("error: budget exceeded (needs {required} evaluations, budget {budget})");
            ExitCode::from(EXIT_BUDGET)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
