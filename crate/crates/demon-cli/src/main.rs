//! Command-line front end: exact denotation dumps, Monte-Carlo
//! simulation, termination bounds, proof checking, and the case-study
//! corpus.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use demon::proof::{check_derivation, parse_script, CheckerConfig};
use demon::semantics::{denote, loop_iterate, min_termination_prob};
use demon::simulate::mc_simulate;
use demon::syntax::ast::Cmd;
use demon::value::enumerate_states;
use demon_cli::{corpus, load_program, output, scheduler_by_name, start_state, GlobalFlags};

#[derive(Parser)]
#[command(
    name = "demon",
    version,
    about = "Verifier for randomized programs with adversarial choice"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Loop unrolling budget (iterate count).
    #[arg(long, global = true, default_value_t = 64)]
    budget: usize,
    /// Generator cap for convex-set operations.
    #[arg(long, global = true, default_value_t = 10_000)]
    cap: usize,
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Reject undecided proof obligations instead of leaving them open.
    #[arg(long, global = true)]
    strict: bool,
    /// Output format.
    #[arg(long, global = true, value_parser = ["text", "records"], default_value = "text")]
    format: String,
}

impl Cli {
    fn flags(&self) -> GlobalFlags {
        GlobalFlags {
            budget: self.budget,
            cap: self.cap,
            seed: self.seed,
            strict: self.strict,
            format: self.format.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a program's exact denotation from a start state.
    Denote {
        file: PathBuf,
        /// Start-state bindings, e.g. `x=true,n=3`. Unbound variables
        /// default to the first declared domain value, or 0.
        #[arg(long)]
        state: Option<String>,
    },
    /// Dump the n-th loop iterate of a program that is a single loop.
    Iterate {
        file: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        state: Option<String>,
    },
    /// Run a program operationally many times under a scheduler.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        state: Option<String>,
        /// Scheduler: left (first option; the committed adversary, also
        /// named worst), right, or uniform.
        #[arg(long, default_value = "uniform")]
        sched: String,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value_t = 100_000)]
        max_steps: u64,
    },
    /// Lower bounds on the minimum termination probability of the
    /// program's top-level loop, per start state.
    Minterm {
        file: PathBuf,
        #[arg(long, default_value_t = 2000)]
        iters: usize,
    },
    /// Check a proof script against a program.
    Check { program: PathBuf, script: PathBuf },
    /// Run the bundled case-study corpus (optionally filtered by name
    /// substring). Set DEMON_CORPUS to point at a corpus directory.
    Corpus { filter: Option<String> },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let flags = cli.flags();
    match &cli.command {
        Command::Denote { file, state } => {
            let prog = load_program(file)?;
            let sigma = start_state(&prog, state.as_deref())?;
            let r = denote(&prog.cmd, &sigma, &flags.engine()).map_err(|e| e.to_string())?;
            output::denote_result(&r, &flags.format);
            Ok(ExitCode::SUCCESS)
        }
        Command::Iterate { file, n, state } => {
            let prog = load_program(file)?;
            let sigma = start_state(&prog, state.as_deref())?;
            let Cmd::While(guard, body) = &prog.cmd else {
                return Err("iterate expects a program that is a single loop".into());
            };
            let set = loop_iterate(body, guard, *n, &sigma, &flags.engine())
                .map_err(|e| e.to_string())?;
            println!("{}", set.dump());
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate {
            file,
            state,
            sched,
            samples,
            max_steps,
        } => {
            let prog = load_program(file)?;
            let sigma = start_state(&prog, state.as_deref())?;
            let scheduler = scheduler_by_name(sched)?;
            let report = mc_simulate(
                &prog.cmd,
                &sigma,
                scheduler.as_ref(),
                *samples,
                flags.seed,
                *max_steps,
            )
            .map_err(|e| e.to_string())?;
            output::sim_report(&report, &flags.format);
            Ok(ExitCode::SUCCESS)
        }
        Command::Minterm { file, iters } => {
            let prog = load_program(file)?;
            let Cmd::While(guard, body) = &prog.cmd else {
                return Err("minterm expects a program that is a single loop".into());
            };
            let states = enumerate_states(&prog.table, 1 << 20)
                .ok_or("minterm needs declared finite domains for every variable")?;
            let bounds = min_termination_prob(body, guard, &states, *iters, &flags.engine())
                .map_err(|e| e.to_string())?;
            output::minterm_bounds(&bounds, *iters, &flags.format);
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { program, script } => {
            let prog = load_program(program)?;
            let text = std::fs::read_to_string(script)
                .map_err(|e| format!("{}: {e}", script.display()))?;
            let script = parse_script(&text).map_err(|e| e.to_string())?;
            let cfg = CheckerConfig {
                engine: flags.engine(),
                strict: flags.strict,
                ..CheckerConfig::default()
            };
            let report = check_derivation(&script, &prog, &cfg);
            output::check_report(&report, &flags.format);
            Ok(ExitCode::from(report.verdict.exit_code() as u8))
        }
        Command::Corpus { filter } => {
            let ok = corpus::run_corpus(filter.as_deref(), &flags)?;
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}
