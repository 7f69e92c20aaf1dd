//! Command-line front end. Every command reads a game JSON file and prints
//! one JSON document `{"command", "inputs_digest", "result"}`.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::approachability::test_assignment_valid;
use crate::commit_general::{optimize_general, GeneralOptions};
use crate::commit_nr::{optimal_no_regret_commitment_with, NrObjective};
use crate::error::{Error, Result};
use crate::game::{BimatrixGame, CspAssignment};
use crate::maximin::{current_threshold, maximin_learner, run_maximin};
use crate::menus::{incentive_gap, menu_violation, no_regret_check, no_swap_regret_menu, HalfspaceMenu, HullMenu};
use crate::oracle::{grid_bruteforce_nr, grid_maximin_opt, grid_menu_validity_eps};
use crate::playback::{
    compose_abortable, realize_menu_learner, simulate, Adversary, AdversaryKind, Composed, RoundRecord, SimulateOptions,
};
use crate::stackelberg::optimizer_stackelberg;

#[derive(Parser, Debug)]
#[command(
    name = "menu-commit",
    version,
    about = "Commitment menus for repeated Bayesian bimatrix games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct GameArg {
    /// Game JSON file.
    #[arg(long)]
    game: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stackelberg commitment of one optimizer type against the learner.
    Stackelberg {
        #[command(flatten)]
        game: GameArg,
        /// Optimizer type index.
        #[arg(long = "type", default_value_t = 0)]
        type_index: usize,
    },
    /// Optimal commitment among no-regret menus (one LP).
    CommitNr {
        #[command(flatten)]
        game: GameArg,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::Expected)]
        objective: ObjectiveArg,
    },
    /// Approximately optimal commitment over all valid menus.
    CommitGeneral {
        #[command(flatten)]
        game: GameArg,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        /// Tester resolution [default: eps / (8 sqrt(mn))].
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 20_000)]
        max_iters: usize,
        /// Include the full cut log in the result.
        #[arg(long)]
        cuts: bool,
    },
    /// Maximin learner run against one optimizer type.
    Maximin {
        #[command(flatten)]
        game: GameArg,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long = "T", default_value_t = 10_000)]
        rounds: u64,
        #[arg(long, value_enum, default_value_t = AdversaryArg::Aborter)]
        adversary: AdversaryArg,
        /// Tester resolution used by the aborter adversary.
        #[arg(long, default_value_t = 0.02)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "type", default_value_t = 0)]
        type_index: usize,
    },
    /// Repeated play of a learner against an optimizer policy.
    Simulate {
        #[command(flatten)]
        game: GameArg,
        #[arg(long, value_enum, default_value_t = LearnerArg::CommitNr)]
        learner: LearnerArg,
        /// Halfspace menu JSON, for `--learner menu`.
        #[arg(long)]
        menu: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long = "T", default_value_t = 10_000)]
        rounds: u64,
        #[arg(long, value_enum, default_value_t = AdversaryArg::Bestresponse)]
        adversary: AdversaryArg,
        #[arg(long, default_value_t = 0.02)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "type", default_value_t = 0)]
        type_index: usize,
        /// Emit one JSON line per round before the report.
        #[arg(long)]
        stream: bool,
    },
    /// Checks a CSP assignment: regret, incentives and approachability.
    CheckMenu {
        #[command(flatten)]
        game: GameArg,
        /// Assignment JSON `{"profiles": [[...], ...]}`.
        #[arg(long)]
        assignment: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
    },
    /// Grid-search oracles for small instances.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
}

#[derive(Subcommand, Debug)]
enum OracleCommand {
    /// Brute-force no-regret commitment.
    Nr {
        #[command(flatten)]
        game: GameArg,
        #[arg(long, default_value_t = 0.1)]
        resolution: f64,
    },
    /// Samples menu validity on a grid of optimizer strategies.
    MenuValidity {
        #[command(flatten)]
        game: GameArg,
        #[arg(long)]
        assignment: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        resolution: f64,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
    },
    /// Descending threshold scan for the maximin value.
    Maximin {
        #[command(flatten)]
        game: GameArg,
        #[arg(long, default_value_t = 0.05)]
        resolution: f64,
        #[arg(long, default_value_t = 0.02)]
        delta: f64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ObjectiveArg {
    Expected,
    Maximin,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum AdversaryArg {
    Bestresponse,
    Aborter,
    Random,
    Schedule,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum LearnerArg {
    /// Menu of the no-regret commitment.
    CommitNr,
    /// No-swap-regret menu.
    Nsr,
    /// General commitment menu.
    CommitGeneral,
    /// Maximin epoch learner.
    Maximin,
    /// Halfspace menu from `--menu`.
    Menu,
}

fn adversary_kind(a: AdversaryArg, delta: f64, seed: u64) -> AdversaryKind {
    match a {
        AdversaryArg::Bestresponse => AdversaryKind::BestResponse,
        AdversaryArg::Aborter => AdversaryKind::Aborter { delta },
        AdversaryArg::Random => AdversaryKind::Random { seed },
        AdversaryArg::Schedule => AdversaryKind::Schedule,
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))
}

/// Collects what the result depends on: file contents, not paths.
struct Inputs {
    hasher: Sha256,
}

impl Inputs {
    fn new(command: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(command.as_bytes());
        Self { hasher }
    }

    fn add(&mut self, label: &str, value: impl std::fmt::Display) {
        self.hasher.update([0u8]);
        self.hasher.update(label.as_bytes());
        self.hasher.update(*b"=");
        self.hasher.update(value.to_string().as_bytes());
    }

    fn file(&mut self, label: &str, path: &Path) -> Result<String> {
        let text = read(path)?;
        self.add(label, &text);
        Ok(text)
    }

    fn game(&mut self, arg: &GameArg) -> Result<BimatrixGame> {
        let text = self.file("game", &arg.game)?;
        BimatrixGame::from_json(&text)
    }

    fn digest(self) -> String {
        self.hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NumericalFailure(_) | Error::IterationCapExceeded { .. } => 3,
        _ => 2,
    }
}

fn error_doc(kind: &str, message: &str) -> String {
    let doc = json!({"error": {"kind": kind, "message": message}});
    serde_json::to_string_pretty(&doc).expect("serializes") + "\n"
}

/// Runs one command; returns the exit code and everything destined for
/// standard output.
pub fn run<I, T>(argv: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => (0, e.to_string()),
                _ => (2, error_doc("InvalidInput", e.to_string().trim())),
            };
        }
    };
    let mut out = String::new();
    match execute(cli.command, &mut out) {
        Ok((command, digest, result)) => {
            let doc = json!({"command": command, "inputs_digest": digest, "result": result});
            out.push_str(&serde_json::to_string_pretty(&doc).expect("serializes"));
            out.push('\n');
            (0, out)
        }
        Err(e) => (exit_code(&e), error_doc(e.kind(), &e.to_string())),
    }
}

fn execute(command: Command, out: &mut String) -> Result<(&'static str, String, Value)> {
    match command {
        Command::Stackelberg { game, type_index } => {
            let mut inputs = Inputs::new("stackelberg");
            let g = inputs.game(&game)?;
            inputs.add("type", type_index);
            let sol = optimizer_stackelberg(&g, type_index)?;
            Ok((
                "stackelberg",
                inputs.digest(),
                json!({
                    "value": sol.value,
                    "learner_value": sol.follower_value,
                    "optimizer_mix": sol.leader_mix,
                    "learner_action": sol.follower_action,
                    "csp": sol.csp.weights(),
                }),
            ))
        }
        Command::CommitNr { game, objective } => {
            let mut inputs = Inputs::new("commit-nr");
            let g = inputs.game(&game)?;
            inputs.add("objective", format!("{objective:?}"));
            let obj = match objective {
                ObjectiveArg::Expected => NrObjective::Expected,
                ObjectiveArg::Maximin => NrObjective::Maximin,
            };
            let res = optimal_no_regret_commitment_with(&g, &obj)?;
            Ok(("commit-nr", inputs.digest(), res.to_value()))
        }
        Command::CommitGeneral {
            game,
            eps,
            delta,
            max_iters,
            cuts,
        } => {
            let mut inputs = Inputs::new("commit-general");
            let g = inputs.game(&game)?;
            inputs.add("eps", eps);
            inputs.add("delta", format!("{delta:?}"));
            inputs.add("max_iters", max_iters);
            inputs.add("cuts", cuts);
            let res = optimize_general(&g, &GeneralOptions { eps, delta, max_iters })?;
            let mut v = json!({
                "value_lower_bound": res.value_lower_bound,
                "upper_bound": res.upper_bound,
                "status": res.status,
                "iterations": res.iterations,
                "delta": res.delta,
                "assignment": res.assignment.profiles().iter().map(|p| p.weights()).collect::<Vec<_>>(),
                "menu": res.menu.base.to_value(),
                "cut_count": res.cuts.len(),
            });
            if cuts {
                v["cuts"] = serde_json::to_value(&res.cuts).expect("serializes");
            }
            Ok(("commit-general", inputs.digest(), v))
        }
        Command::Maximin {
            game,
            eps,
            rounds,
            adversary,
            delta,
            seed,
            type_index,
        } => {
            let mut inputs = Inputs::new("maximin");
            let g = inputs.game(&game)?;
            for (l, v) in [
                ("eps", eps.to_string()),
                ("T", rounds.to_string()),
                ("adversary", format!("{adversary:?}")),
            ] {
                inputs.add(l, v);
            }
            inputs.add("delta", delta);
            inputs.add("seed", seed);
            inputs.add("type", type_index);
            let report = run_maximin(&g, eps, adversary_kind(adversary, delta, seed), rounds, type_index)?;
            Ok((
                "maximin",
                inputs.digest(),
                serde_json::to_value(&report).expect("serializes"),
            ))
        }
        Command::Simulate {
            game,
            learner,
            menu,
            eps,
            rounds,
            adversary,
            delta,
            seed,
            type_index,
            stream,
        } => {
            let mut inputs = Inputs::new("simulate");
            let g = inputs.game(&game)?;
            inputs.add("learner", format!("{learner:?}"));
            let menu_text = match &menu {
                Some(p) => Some(inputs.file("menu", p)?),
                None => None,
            };
            inputs.add("eps", eps);
            inputs.add("T", rounds);
            inputs.add("adversary", format!("{adversary:?}"));
            inputs.add("delta", delta);
            inputs.add("seed", seed);
            inputs.add("type", type_index);
            inputs.add("stream", stream);

            let (mut composed, tracked): (Composed, Option<HalfspaceMenu>) = match learner {
                LearnerArg::Maximin => (maximin_learner(&g, eps)?, None),
                other => {
                    let (hull, targets) = match other {
                        LearnerArg::CommitNr => {
                            let r = optimal_no_regret_commitment_with(&g, &NrObjective::Expected)?;
                            (r.menu, r.assignment.profiles().to_vec())
                        }
                        LearnerArg::Nsr => (HullMenu::from(no_swap_regret_menu(&g)), vec![]),
                        LearnerArg::CommitGeneral => {
                            let r = optimize_general(&g, &GeneralOptions::new(eps))?;
                            (r.menu, r.assignment.profiles().to_vec())
                        }
                        _ => {
                            let text = menu_text.ok_or_else(|| Error::invalid("--learner menu needs --menu FILE"))?;
                            (HalfspaceMenu::from_json(&text, g.m(), g.n())?.into(), vec![])
                        }
                    };
                    let base = hull.base.clone();
                    (
                        compose_abortable(vec![Box::new(realize_menu_learner(&hull, targets)?)])?,
                        Some(base),
                    )
                }
            };
            let mut opt = Adversary::new(adversary_kind(adversary, delta, seed), &g, type_index)?;
            let mut lines = String::new();
            let mut emit = |r: &RoundRecord| {
                lines.push_str(&serde_json::to_string(r).expect("serializes"));
                lines.push('\n');
            };
            let report = simulate(
                &g,
                &mut composed,
                &mut opt,
                rounds,
                SimulateOptions {
                    keep_transcript: false,
                    menu: tracked.as_ref(),
                    on_round: if stream { Some(&mut emit) } else { None },
                },
            )?;
            out.push_str(&lines);
            let mut v = serde_json::to_value(&report).expect("serializes");
            if matches!(learner, LearnerArg::Maximin) {
                v["final_v"] = json!(current_threshold(&composed, &g, eps));
            }
            Ok(("simulate", inputs.digest(), v))
        }
        Command::CheckMenu {
            game,
            assignment,
            delta,
        } => {
            let mut inputs = Inputs::new("check-menu");
            let g = inputs.game(&game)?;
            let a = CspAssignment::from_json(&inputs.file("assignment", &assignment)?, &g)?;
            inputs.add("delta", delta);
            let verdict = test_assignment_valid(&a, &g, delta)?;
            let nsr = no_swap_regret_menu(&g);
            Ok((
                "check-menu",
                inputs.digest(),
                json!({
                    "approachability": verdict,
                    "incentive_gap": incentive_gap(&a, &g),
                    "no_regret": a.profiles().iter().map(|p| no_regret_check(p, &g, 1e-9)).collect::<Vec<_>>(),
                    "swap_regret_violation": a.profiles().iter().map(|p| menu_violation(p, &nsr)).collect::<Vec<_>>(),
                    "thresholds": a.thresholds(&g),
                }),
            ))
        }
        Command::Oracle { which } => match which {
            OracleCommand::Nr { game, resolution } => {
                let mut inputs = Inputs::new("oracle nr");
                let g = inputs.game(&game)?;
                inputs.add("resolution", resolution);
                let r = grid_bruteforce_nr(&g, resolution)?;
                Ok((
                    "oracle nr",
                    inputs.digest(),
                    json!({
                        "value": r.value,
                        "assignment": r.assignment.profiles().iter().map(|p| p.weights()).collect::<Vec<_>>(),
                        "lattice_points": r.lattice_points as f64,
                    }),
                ))
            }
            OracleCommand::MenuValidity {
                game,
                assignment,
                resolution,
                eps,
            } => {
                let mut inputs = Inputs::new("oracle menu-validity");
                let g = inputs.game(&game)?;
                let a = CspAssignment::from_json(&inputs.file("assignment", &assignment)?, &g)?;
                inputs.add("resolution", resolution);
                inputs.add("eps", eps);
                let r = grid_menu_validity_eps(&a, &g, eps, resolution)?;
                Ok((
                    "oracle menu-validity",
                    inputs.digest(),
                    serde_json::to_value(&r).expect("serializes"),
                ))
            }
            OracleCommand::Maximin {
                game,
                resolution,
                delta,
            } => {
                let mut inputs = Inputs::new("oracle maximin");
                let g = inputs.game(&game)?;
                inputs.add("resolution", resolution);
                inputs.add("delta", delta);
                let v = grid_maximin_opt(&g, resolution, delta)?;
                Ok(("oracle maximin", inputs.digest(), json!({"value": v})))
            }
        },
    }
}
