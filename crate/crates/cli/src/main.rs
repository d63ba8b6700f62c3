//! `nlfluid`: run bundled or user-written scenarios.
//!
//! Exit status: 0 on success, 2 when the configuration is invalid, 3 when a
//! run fails numerically (partial artifacts are still written).

use clap::{Args, Parser, Subcommand};
use nlfluid::parallel::Execution;
use nlfluid::scenario::{bundled, bundled_names, list_models, run_batch, Command, RunOptions, Scenario, Status};
use nlfluid::{Backend, Error};
use std::path::PathBuf;
use std::process::ExitCode;

const OUT_ENV: &str = "NLFLUID_OUT";

#[derive(Parser)]
#[command(name = "nlfluid", version, about = "Weakly nonlocal fluid experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate the fluid equations and write diagnostics.
    Simulate(RunArgs),
    /// Run the fluid and split-step solvers side by side.
    Compare(RunArgs),
    /// Solve for ground and excited stationary states.
    Stationary(RunArgs),
    /// Run verification suites (all bundled suites when none is named).
    Verify(RunArgs),
    /// Print the entropy catalogue.
    ListModels,
    /// Print the names of the bundled scenarios.
    ListScenarios,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (TOML); may be repeated.
    #[arg(long, value_name = "PATH")]
    config: Vec<PathBuf>,
    /// Bundled scenario by name; may be repeated.
    #[arg(long, value_name = "NAME")]
    scenario: Vec<String>,
    /// Output root; each scenario writes to <out>/<name>. Defaults to the
    /// scenario's output.dir, else $NLFLUID_OUT/<name>, else nlfluid-out/<name>.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Run up to this many scenarios at once (0: one per core).
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Step past the stability bound instead of refusing.
    #[arg(long)]
    override_stability: bool,
    /// Derivative backend for the time integrator.
    #[arg(long, value_parser = ["spectral", "fd2", "fd4"])]
    backend: Option<String>,
}

fn exit_code(e: &Error) -> u8 {
    if e.is_validation() {
        2
    } else {
        3
    }
}

fn load(args: &RunArgs, command: Command) -> Result<Vec<Scenario>, Error> {
    let mut out = Vec::new();
    for p in &args.config {
        out.push(Scenario::load(p).map_err(|e| match e {
            Error::Io(m) => Error::Config(m),
            other => other,
        })?);
    }
    for name in &args.scenario {
        out.push(bundled(name)?);
    }
    if out.is_empty() {
        if command != Command::Verify {
            return Err(Error::Config("give at least one --config or --scenario".into()));
        }
        for name in bundled_names() {
            let s = bundled(name)?;
            if s.verify.is_some() {
                out.push(s);
            }
        }
    }
    Ok(out)
}

fn execute(command: Command, args: &RunArgs) -> u8 {
    let scenarios = match load(args, command) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let backend = match args.backend.as_deref().map(str::parse::<Backend>).transpose() {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let opts = RunOptions {
        out: args.out.clone(),
        default_root: std::env::var_os(OUT_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("nlfluid-out")),
        backend,
        override_stability: args.override_stability,
        execution: Execution::Parallel,
    };
    let mut code = 0u8;
    for (s, r) in scenarios.iter().zip(run_batch(command, &scenarios, &opts, args.jobs)) {
        match r {
            Ok(report) => {
                let dir = report.artifacts.dir.display();
                match &report.status {
                    Status::Ok => println!("{} {}: ok ({dir})", command.name(), s.name),
                    Status::Failed(why) => {
                        println!("{} {}: FAILED: {why} ({dir})", command.name(), s.name);
                        code = code.max(3);
                    }
                }
            }
            Err(e) => {
                eprintln!("{} {}: error: {e}", command.name(), s.name);
                code = code.max(exit_code(&e));
            }
        }
    }
    code
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Cmd::Simulate(a) => execute(Command::Simulate, a),
        Cmd::Compare(a) => execute(Command::Compare, a),
        Cmd::Stationary(a) => execute(Command::Stationary, a),
        Cmd::Verify(a) => execute(Command::Verify, a),
        Cmd::ListModels => {
            print!("{}", list_models());
            0
        }
        Cmd::ListScenarios => {
            for name in bundled_names() {
                let s = bundled(name).expect("bundled scenarios parse");
                println!("{name:<22}{}", s.description);
            }
            0
        }
    };
    ExitCode::from(code)
}
