use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod output;

use output::{emit, Format};

#[derive(Debug, Parser)]
#[command(name = "drac", version, about = "Distributed random access codes: evaluation, bounds and search")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the result to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Built-in and user-supplied tasks.
    #[command(subcommand)]
    Tasks(TasksCmd),
    /// Exhaustive classical optimum of a task.
    Classical(TaskArg),
    /// Qubit-communication protocols.
    #[command(subcommand)]
    Qrac(QracCmd),
    /// Entanglement-assisted protocols.
    #[command(subcommand)]
    Earac(EaracCmd),
    /// Tripartite Bell functional bounds.
    #[command(subcommand)]
    Bell(BellCmd),
    /// Channel feasibility of reflections and cube rotations.
    #[command(subcommand)]
    Nogo(NogoCmd),
    /// See-saw search over qubit strategies.
    #[command(subcommand)]
    Seesaw(SeesawCmd),
    /// Waveplate design checks and measured-data comparison.
    #[command(subcommand)]
    Optics(OpticsCmd),
    /// Reproduction reports.
    #[command(subcommand)]
    Report(ReportCmd),
}

#[derive(Debug, Args)]
pub struct TaskArg {
    /// Table I row 1-8, `standard`, or a path to a task JSON file.
    #[arg(long, default_value = "1")]
    task: String,
}

#[derive(Debug, Subcommand)]
enum TasksCmd {
    /// List the eight Table I tasks.
    List,
    /// Print the truth table of a task.
    Show(TaskArg),
}

#[derive(Debug, Subcommand)]
enum QracCmd {
    /// Evaluate a QRAC strategy (built-in for rows 1-8, or --strategy JSON).
    Eval {
        #[command(flatten)]
        task: TaskArg,
        /// Strategy JSON file.
        #[arg(long)]
        strategy: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum EaracCmd {
    /// Evaluate GHZ-assisted strategies (built-in for rows 1-4, or every family member).
    Eval {
        #[command(flatten)]
        task: TaskArg,
        /// Mirror plane XY, XZ or YZ.
        #[arg(long)]
        reflection: Option<String>,
        /// Phase offset 0, pi, pi/2 or 3pi/2.
        #[arg(long, default_value = "0")]
        offset: String,
        /// Complement Charlie's answer.
        #[arg(long)]
        invert: bool,
    },
}

#[derive(Debug, Subcommand)]
enum BellCmd {
    /// Local, bilocal and quantum values on a grid of q.
    Scan {
        #[arg(long, default_value_t = 0)]
        t: u8,
        #[arg(long, default_value_t = 0.0)]
        qmin: f64,
        #[arg(long, default_value_t = 1.0 / 6.0)]
        qmax: f64,
        #[arg(long, default_value_t = 9)]
        steps: usize,
    },
}

#[derive(Debug, Subcommand)]
enum NogoCmd {
    /// Check reflections (default all three) or a cube rotation label.
    Check {
        #[arg(long)]
        reflection: Option<String>,
        #[arg(long, conflicts_with = "reflection")]
        rotation: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
enum SeesawCmd {
    /// Run restarts from seeded random strategies and keep the best.
    Run {
        #[command(flatten)]
        task: TaskArg,
        #[arg(long, default_value_t = drac::seesaw::DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Save the best strategy as JSON.
        #[arg(long)]
        save: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum OpticsCmd {
    /// Check every Table II row against the intended states and unitaries.
    Verify,
    /// Compare measured success probabilities with the ideal model.
    Compare {
        /// CSV with header task,state,unitary,basis,p,sigma (defaults to the bundled tables).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Compare the per-task averages instead (CSV header task,p,sigma when --input is given).
        #[arg(long)]
        averages: bool,
    },
}

#[derive(Debug, Subcommand)]
enum ReportCmd {
    /// Classical, EARAC and QRAC values for the eight Table I tasks.
    Table1 {
        #[arg(long, default_value_t = drac::seesaw::DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = commands::run(&cli.command).and_then(|report| {
        report.render(cli.common.format).map_err(commands::Failure::Internal)
    });
    let text = match result {
        Ok(t) => t,
        Err(f) => return f.report(),
    };
    match emit(&text, cli.common.output.as_deref()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => commands::Failure::Validation(e).report(),
    }
}
