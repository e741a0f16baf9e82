//! `rtnc`: graph transforms, cuts, decompositions, simulation and sweeps.
//!
//! Exit codes: 0 ok, 1 usage or bad input, 2 infeasible, 3 internal
//! assertion.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "rtnc", version, about = "Real-time network coding over wireless graphs with bounded delays")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
pub struct GraphArgs {
    /// Graph in the text format.
    #[arg(long, value_name = "FILE")]
    pub graph: PathBuf,
    /// Override the sources named in the graph file.
    #[arg(long, value_name = "a,b,c", value_delimiter = ',')]
    pub sources: Option<Vec<u32>>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SessionArg {
    Multicast,
    Unicast,
    Combined,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Sync,
    Async,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Print the relay-split directed graph.
    Transform {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Print the cuts between sources and h.
    Mincut {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Decompose into rings, line-stars and lines and print the blocks.
    Decompose {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long, value_enum, default_value = "multicast")]
        session: SessionArg,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Simulate the decomposed network and print the trace.
    Simulate {
        #[command(flatten)]
        g: GraphArgs,
        #[arg(long, value_enum, default_value = "multicast")]
        session: SessionArg,
        #[arg(long, value_enum, default_value = "async")]
        mode: ModeArg,
        #[arg(long = "delay-bound", value_name = "D")]
        delay_bound: Option<u32>,
        /// Explicit per-transmission delays, cycled; replaces random draws.
        #[arg(long, value_name = "d1,d2,...", value_delimiter = ',')]
        delays: Option<Vec<u32>>,
        /// Keep each link's packets in order.
        #[arg(long)]
        fifo: bool,
        #[arg(long, value_name = "S", default_value_t = 0)]
        seed: u64,
        /// Slots to simulate.
        #[arg(long, value_name = "T", default_value_t = 200)]
        horizon: i64,
        /// Run the store-and-forward baseline instead of coding.
        #[arg(long)]
        routing: bool,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Random-graph sweep; writes experiment.csv, averages.dat and meta.txt.
    Experiment {
        #[arg(long, value_enum, default_value = "multicast")]
        session: SessionArg,
        #[arg(long, value_name = "n1,n2,...", value_delimiter = ',', default_value = "8,16,32,64,128")]
        sizes: Vec<u32>,
        /// Graphs per size; expected degree runs from 2 to 8 across them.
        #[arg(long, value_name = "N", default_value_t = 10)]
        graphs: usize,
        #[arg(long = "delay-bound", value_name = "D", default_value_t = 2)]
        delay_bound: u32,
        #[arg(long, value_name = "S", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run_cmd(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
