//! `hddl` command line: validate, ground, plan, verify and format HDDL
//! domain/problem files.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{ArgAction, Args, Parser, Subcommand};

use hddl::diag::{Diagnostic, Diagnostics};
use hddl::ground::{ground, GroundModel, GroundOptions};
use hddl::model::{analyze, compile_method_preconditions, AnalyzeOptions, Model};
use hddl::planner::{plan, PlanOutcome, PlannerOptions, SearchLimits};
use hddl::syntax::{emit, parse_domain, parse_problem};
use hddl::verify::witness::{emit_witness, parse_witness, WitnessIssue};
use hddl::verify::{verify, Stage, Verdict};

// Exit codes are a stable contract for test harnesses.
const EXIT_OK: u8 = 0;
const EXIT_REJECTED: u8 = 1; // rejected / unsolvable within limits
const EXIT_USAGE: u8 = 2;
const EXIT_INPUT: u8 = 3; // parse or semantic error
const EXIT_INTERNAL: u8 = 4; // internal limit or invariant failure

#[derive(Parser)]
#[command(
    name = "hddl",
    version,
    about = "Toolchain for the HDDL hierarchical planning language",
    max_term_width = 100
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Send everything except the main output to standard error.
    #[arg(long, global = true)]
    quiet: bool,
    /// Emit diagnostics as one JSON object per line.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Args)]
struct ModelArgs {
    /// Domain file.
    domain: PathBuf,
    /// Problem file.
    problem: PathBuf,
    /// Error when a feature is used without its requirement flag.
    #[arg(long)]
    strict_requirements: bool,
    /// Compile method preconditions into effect-free actions placed before
    /// the method's subtasks. Disabling this ignores method preconditions.
    #[arg(long, default_value_t = true, action = ArgAction::Set,
          num_args = 0..=1, default_missing_value = "true")]
    compile_method_prec: bool,
    /// Keep ground tasks and methods unreachable from the initial network.
    #[arg(long)]
    no_prune: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and semantically validate a domain/problem pair.
    Validate {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Write the instantiated ground model as a textual listing.
    Ground {
        #[command(flatten)]
        model: ModelArgs,
        /// Output path for the listing (default: standard output).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Print grounding statistics as key=value lines.
        #[arg(long)]
        stats: bool,
    },
    /// Search for a plan and write a verifiable witness.
    Plan {
        #[command(flatten)]
        model: ModelArgs,
        /// Output path for the witness (default: standard output).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the ground model listing to this path.
        #[arg(long, value_name = "PATH")]
        emit_ground: Option<PathBuf>,
        /// Node budget.
        #[arg(long, default_value_t = 1_000_000)]
        max_nodes: u64,
        /// Wall-clock budget in seconds.
        #[arg(long, default_value_t = 60.0)]
        max_seconds: f64,
        /// Cap on the decomposition count (default: deepen without bound).
        #[arg(long)]
        max_decompositions: Option<u32>,
        /// Cap on the plan length.
        #[arg(long)]
        max_length: Option<u32>,
        /// Remove all budgets and search until the space is exhausted.
        #[arg(long)]
        exhaustive: bool,
        /// Print search statistics as key=value lines.
        #[arg(long)]
        stats: bool,
        /// Disable duplicate detection (kept for comparisons).
        #[arg(long)]
        no_duplicate_detection: bool,
        /// Disable the dead-task reduction (kept for comparisons).
        #[arg(long)]
        no_reduction: bool,
    },
    /// Check a plan/decomposition witness against the solution criterion.
    Verify {
        #[command(flatten)]
        model: ModelArgs,
        /// Witness file as produced by `hddl plan`.
        witness: PathBuf,
    },
    /// Rewrite a domain or problem file into canonical form.
    Fmt {
        /// File to format.
        path: PathBuf,
        /// Write here instead of rewriting the input in place.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Printing context: where informational output goes and how diagnostics
/// are rendered.
struct Io {
    quiet: bool,
    json: bool,
    color: bool,
}

impl Io {
    fn info(&self, msg: &str) {
        if self.quiet {
            eprintln!("{msg}");
        } else {
            println!("{msg}");
        }
    }

    fn diagnostic(&self, d: &Diagnostic) {
        if self.json {
            eprintln!("{}", d.render_json());
        } else {
            eprintln!("{}", d.render_text(self.color));
        }
    }

    fn diagnostics(&self, diags: &Diagnostics) {
        for d in diags.iter() {
            self.diagnostic(d);
        }
    }
}

fn read_file(path: &Path, io: &Io) -> Result<String, u8> {
    std::fs::read_to_string(path).map_err(|e| {
        io.info(&format!("error: cannot read {}: {e}", path.display()));
        EXIT_USAGE
    })
}

fn write_file(path: &Path, text: &str, io: &Io) -> Result<(), u8> {
    std::fs::write(path, text).map_err(|e| {
        io.info(&format!("error: cannot write {}: {e}", path.display()));
        EXIT_USAGE
    })
}

fn load_model(args: &ModelArgs, io: &Io) -> Result<Model, u8> {
    let domain_text = read_file(&args.domain, io)?;
    let problem_text = read_file(&args.problem, io)?;
    let domain_name = args.domain.to_string_lossy();
    let problem_name = args.problem.to_string_lossy();
    let domain = parse_domain(&domain_name, &domain_text).map_err(|d| {
        io.diagnostic(&d);
        EXIT_INPUT
    })?;
    let problem = parse_problem(&problem_name, &problem_text).map_err(|d| {
        io.diagnostic(&d);
        EXIT_INPUT
    })?;
    let opts = AnalyzeOptions { strict_requirements: args.strict_requirements };
    let (model, diags) = analyze(&domain, &problem, &opts);
    io.diagnostics(&diags);
    let mut model = model.ok_or(EXIT_INPUT)?;
    if args.compile_method_prec {
        model = compile_method_preconditions(model);
    } else if model.methods.iter().any(|m| m.precondition.is_some()) {
        io.info("warning: method preconditions are ignored (--compile-method-prec false)");
        for m in &mut model.methods {
            m.precondition = None;
        }
    }
    Ok(model)
}

fn ground_model(model: &Model, args: &ModelArgs, io: &Io) -> Result<GroundModel, u8> {
    ground(model, &GroundOptions { prune: !args.no_prune }).map_err(|e| {
        io.info(&format!("error: {e}"));
        EXIT_INPUT
    })
}

fn cmd_validate(model_args: &ModelArgs, io: &Io) -> u8 {
    match load_model(model_args, io) {
        Ok(model) => {
            io.info(&format!(
                "ok: domain `{}` with problem `{}` ({} actions, {} compound tasks, {} methods)",
                model.domain_name,
                model.problem_name,
                model.actions.iter().filter(|a| a.compiled_from.is_none()).count(),
                model.compounds.len(),
                model.methods.len(),
            ));
            EXIT_OK
        }
        Err(code) => code,
    }
}

fn cmd_ground(model_args: &ModelArgs, output: Option<&Path>, stats: bool, io: &Io) -> u8 {
    let model = match load_model(model_args, io) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let gm = match ground_model(&model, model_args, io) {
        Ok(gm) => gm,
        Err(code) => return code,
    };
    let listing = gm.emit_listing();
    match output {
        Some(path) => {
            if let Err(code) = write_file(path, &listing, io) {
                return code;
            }
        }
        None => print!("{listing}"),
    }
    if stats {
        io.info(gm.stats.render().trim_end());
    }
    EXIT_OK
}

fn cmd_plan(
    model_args: &ModelArgs,
    output: Option<&Path>,
    emit_ground: Option<&Path>,
    limits: SearchLimits,
    planner_opts: PlannerOptions,
    stats: bool,
    io: &Io,
) -> u8 {
    let model = match load_model(model_args, io) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let gm = match ground_model(&model, model_args, io) {
        Ok(gm) => gm,
        Err(code) => return code,
    };
    if let Some(path) = emit_ground {
        if let Err(code) = write_file(path, &gm.emit_listing(), io) {
            return code;
        }
    }
    let outcome = plan(&gm, &limits, &planner_opts);
    match outcome {
        PlanOutcome::Solution { plan, tree, stats: search_stats } => {
            let witness = emit_witness(&gm, &plan, &tree);
            // Self-verification through the textual format before reporting
            // success.
            let verdict = match parse_witness(&gm, &witness) {
                Ok((p, t)) => verify(&gm, &p, &t),
                Err(_) => Verdict::rejected(Stage::Parse, "witness", "round trip failed"),
            };
            if !verdict.accepted {
                io.info(&format!(
                    "internal error: produced witness failed verification: {}",
                    verdict.render()
                ));
                return EXIT_INTERNAL;
            }
            match output {
                Some(path) => {
                    if let Err(code) = write_file(path, &witness, io) {
                        return code;
                    }
                    io.info(&format!("solution with {} action(s), verified", plan.steps.len()));
                }
                None => print!("{witness}"),
            }
            if stats {
                io.info(search_stats.render().trim_end());
            }
            EXIT_OK
        }
        PlanOutcome::UnsolvableWithinLimits { stats: search_stats, reason } => {
            io.info(&format!("no solution within limits (reason: {reason})"));
            if stats {
                io.info(search_stats.render().trim_end());
            }
            EXIT_REJECTED
        }
        PlanOutcome::ProvenUnsolvable { stats: search_stats } => {
            io.info("proven unsolvable");
            if stats {
                io.info(search_stats.render().trim_end());
            }
            EXIT_REJECTED
        }
    }
}

fn cmd_verify(model_args: &ModelArgs, witness_path: &Path, io: &Io) -> u8 {
    let model = match load_model(model_args, io) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let gm = match ground_model(&model, model_args, io) {
        Ok(gm) => gm,
        Err(code) => return code,
    };
    let text = match read_file(witness_path, io) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let (plan, tree) = match parse_witness(&gm, &text) {
        Ok(pair) => pair,
        Err(WitnessIssue::Syntax(msg)) => {
            io.info(&format!("malformed witness: {msg}"));
            return EXIT_INPUT;
        }
        Err(WitnessIssue::Mapping(msg)) => {
            io.info(&Verdict::rejected(Stage::Mapping, "witness", msg).render());
            return EXIT_REJECTED;
        }
    };
    let verdict = verify(&gm, &plan, &tree);
    io.info(&verdict.render());
    if verdict.accepted {
        EXIT_OK
    } else {
        EXIT_REJECTED
    }
}

fn cmd_fmt(path: &Path, output: Option<&Path>, io: &Io) -> u8 {
    let text = match read_file(path, io) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let name = path.to_string_lossy();
    let ast = match hddl::syntax::parse_file(&name, &text) {
        Ok(ast) => ast,
        Err(d) => {
            // Parse error: report and leave the file untouched.
            io.diagnostic(&d);
            return EXIT_INPUT;
        }
    };
    let formatted = emit(&ast);
    let target = output.unwrap_or(path);
    match write_file(target, &formatted, io) {
        Ok(()) => EXIT_OK,
        Err(code) => code,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let io = Io {
        quiet: cli.quiet,
        json: cli.json,
        color: std::env::var("HDDL_COLOR").map(|v| v == "1").unwrap_or(false),
    };
    let code = match &cli.cmd {
        Cmd::Validate { model } => cmd_validate(model, &io),
        Cmd::Ground { model, output, stats } => cmd_ground(model, output.as_deref(), *stats, &io),
        Cmd::Plan {
            model,
            output,
            emit_ground,
            max_nodes,
            max_seconds,
            max_decompositions,
            max_length,
            exhaustive,
            stats,
            no_duplicate_detection,
            no_reduction,
        } => {
            let limits = if *exhaustive {
                SearchLimits {
                    max_decompositions: *max_decompositions,
                    max_plan_length: *max_length,
                    ..SearchLimits::exhaustive()
                }
            } else {
                SearchLimits {
                    max_decompositions: *max_decompositions,
                    max_plan_length: *max_length,
                    node_budget: Some(*max_nodes),
                    wall_clock: Some(Duration::from_secs_f64(*max_seconds)),
                }
            };
            let planner_opts = PlannerOptions {
                no_duplicate_detection: *no_duplicate_detection,
                no_reduction: *no_reduction,
            };
            cmd_plan(
                model,
                output.as_deref(),
                emit_ground.as_deref(),
                limits,
                planner_opts,
                *stats,
                &io,
            )
        }
        Cmd::Verify { model, witness } => cmd_verify(model, witness, &io),
        Cmd::Fmt { path, output } => cmd_fmt(path, output.as_deref(), &io),
    };
    ExitCode::from(code)
}
