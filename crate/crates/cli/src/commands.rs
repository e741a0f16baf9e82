use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use rtnc_core::decompose::{
    combined_corners, decompose_multicast, dump_blocks, two_way_lines, unicast_corner, Block, DecomposeConfig,
};
use rtnc_core::experiment::{metadata, run_experiment, ExperimentSpec, Session};
use rtnc_core::graph::{compute_metrics, min_cut, split_relays};
use rtnc_core::sim::{run, run_routing_baseline, verify_rt_per_block, DelayModel, SimConfig, SimTrace};
use rtnc_core::{Error, Result, WirelessGraph};

use crate::{Cmd, GraphArgs, ModeArg, SessionArg};

fn session(s: SessionArg) -> Session {
    match s {
        SessionArg::Multicast => Session::Multicast,
        SessionArg::Unicast => Session::Unicast,
        SessionArg::Combined => Session::Combined,
    }
}

fn load(g: &GraphArgs) -> Result<WirelessGraph> {
    let text = fs::read_to_string(&g.graph)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", g.graph.display())))?;
    let graph = WirelessGraph::parse(&text)?;
    match &g.sources {
        Some(s) => graph.with_sources(s.clone()),
        None => Ok(graph),
    }
}

/// Write `text` to `dir/name`, or to stdout without `--out`.
fn emit(out: &Option<PathBuf>, name: &str, text: &str) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// Blocks for the session and whether the solvers were exact.
fn blocks_for(g: &WirelessGraph, s: SessionArg) -> Result<(Vec<Block>, bool)> {
    let cfg = DecomposeConfig::default();
    if g.sources().len() == 2 {
        return Ok((two_way_lines(g)?, true));
    }
    Ok(match s {
        SessionArg::Multicast => {
            let d = decompose_multicast(g, &cfg)?;
            (d.blocks, d.exact)
        }
        SessionArg::Unicast => {
            let s = g.sources();
            let p = unicast_corner(g, (s[0], s[1]), &cfg)?;
            (p.blocks, p.exact)
        }
        SessionArg::Combined => {
            let c = combined_corners(g, &cfg)?.pop().expect("multicast corner");
            (c.blocks, c.exact)
        }
    })
}

fn cuts(g: &WirelessGraph) -> String {
    let mut s = String::new();
    let src = g.sources();
    if src.len() == 2 {
        let _ = writeln!(s, "pair {} {} {}", src[0], src[1], min_cut(g, &[src[0]], &[src[1]]));
        return s;
    }
    let m = compute_metrics(g);
    for (&(i, j), v) in &m.pair {
        let _ = writeln!(s, "pair {i} {j} {v}");
    }
    for (i, v) in &m.to_rest {
        let _ = writeln!(s, "rest {i} {v}");
    }
    let _ = writeln!(s, "h {}", m.h);
    s
}

fn counters(g: &WirelessGraph, seed: u64, trace: &SimTrace, exact: bool) -> String {
    let m = trace.summary();
    let flag = if exact { "exact" } else { "heuristic" };
    let n = g.node_count();
    let mut s = String::from(rtnc_core::experiment::CSV_HEADER);
    s.push('\n');
    let rows: [(&str, String); 5] = [
        ("relay_tx", m.relay_tx.to_string()),
        ("src_tx", m.src_tx.to_string()),
        ("max_delay", m.max_delay.to_string()),
        ("rate", m.rate.to_string()),
        ("rt_ok", u8::from(verify_rt_per_block(trace)).to_string()),
    ];
    for (metric, v) in rows {
        let _ = writeln!(s, "{n},-,{seed},{metric},{v},{flag}");
    }
    s
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    g: &WirelessGraph,
    s: SessionArg,
    mode: ModeArg,
    delay_bound: Option<u32>,
    delays: Option<Vec<u32>>,
    fifo: bool,
    seed: u64,
    horizon: i64,
    routing: bool,
) -> Result<(SimTrace, bool)> {
    let mut cfg = match mode {
        ModeArg::Sync => {
            if delay_bound.is_some_and(|d| d != 1) || delays.is_some() {
                return Err(Error::Config("sync mode uses unit delays; drop --delay-bound/--delays".into()));
            }
            let mut c = SimConfig::sync(horizon);
            c.seed = seed;
            c
        }
        ModeArg::Async => {
            let d = delay_bound.unwrap_or(2);
            let model = match delays {
                Some(list) => DelayModel::adversarial(d, list),
                None => DelayModel::uniform(d),
            };
            SimConfig::asynchronous(horizon, model, seed)
        }
    };
    cfg.delay.fifo = fifo;
    let (blocks, exact) = blocks_for(g, s)?;
    if blocks.is_empty() {
        return Err(Error::Infeasible("no block connects the sources".into()));
    }
    let trace = if routing { run_routing_baseline(&blocks, &cfg)? } else { run(&blocks, &cfg)? };
    Ok((trace, exact))
}

pub fn run_cmd(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Transform { g, out } => {
            let graph = load(&g)?;
            emit(&out, "wired.txt", &split_relays(&graph).to_text())
        }
        Cmd::Mincut { g, out } => {
            let graph = load(&g)?;
            emit(&out, "cuts.txt", &cuts(&graph))
        }
        Cmd::Decompose { g, session, out } => {
            let graph = load(&g)?;
            let (blocks, _) = blocks_for(&graph, session)?;
            emit(&out, "blocks.txt", &dump_blocks(&blocks))
        }
        Cmd::Simulate {
            g,
            session,
            mode,
            delay_bound,
            delays,
            fifo,
            seed,
            horizon,
            routing,
            out,
        } => {
            let graph = load(&g)?;
            let (trace, exact) = simulate(&graph, session, mode, delay_bound, delays, fifo, seed, horizon, routing)?;
            emit(&out, "trace.txt", &trace.dump())?;
            if out.is_some() {
                emit(&out, "counters.csv", &counters(&graph, seed, &trace, exact))?;
            }
            Ok(())
        }
        Cmd::Experiment {
            session: s,
            sizes,
            graphs,
            delay_bound,
            seed,
            out,
        } => {
            let spec = ExperimentSpec {
                sizes: sizes.clone(),
                graphs_per_size: graphs,
                session: session(s),
                delay_bound,
                seed,
                ..ExperimentSpec::default()
            };
            let meta = metadata(&spec)?;
            let res = run_experiment(&spec)?;
            emit(&out, "experiment.csv", &res.csv())?;
            if out.is_some() {
                emit(&out, "averages.dat", &res.averages_dat(&sizes))?;
                emit(&out, "meta.txt", &meta)?;
            }
            Ok(())
        }
    }
}
