//! Random-graph sweeps.
//!
//! Each sweep draws G(n, p) graphs with the first three nodes as sources,
//! decomposes them for the chosen session, and counts relay transmissions
//! of coding against routing on the resulting blocks. Every graph is an
//! independent job; jobs run on the rayon pool and are collected in sweep
//! order, so output does not depend on the thread count.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::decompose::{combined_corners, decompose_multicast, unicast_corner, pair_slot, Block, DecomposeConfig};
use crate::error::{Error, Result};
use crate::field::GaloisField;
use crate::graph::{NodeId, WirelessGraph};
use crate::sim::{count_transmissions, run, run_routing_baseline, verify_rt_per_block, DelayModel, Role, SimConfig};

pub const CSV_HEADER: &str = "n,p,seed,metric,value,exact_flag";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Session {
    Multicast,
    Unicast,
    Combined,
}

impl Session {
    pub fn name(self) -> &'static str {
        match self {
            Session::Multicast => "multicast",
            Session::Unicast => "unicast",
            Session::Combined => "combined",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "multicast" => Ok(Session::Multicast),
            "unicast" => Ok(Session::Unicast),
            "combined" => Ok(Session::Combined),
            _ => Err(Error::Config(format!("unknown session `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub sizes: Vec<u32>,
    pub graphs_per_size: usize,
    pub session: Session,
    pub delay_bound: u32,
    pub seed: u64,
    /// Expected degrees swept linearly across the graphs of one size.
    pub degree_range: (f64, f64),
    /// Field size C, also the capacity written into generated graphs.
    pub field_bits: u8,
    pub decompose: DecomposeConfig,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            sizes: vec![8, 16, 32, 64, 128],
            graphs_per_size: 10,
            session: Session::Multicast,
            delay_bound: 2,
            seed: 0,
            degree_range: (2.0, 8.0),
            field_bits: 8,
            decompose: DecomposeConfig::default(),
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.graphs_per_size == 0 {
            return Err(Error::Config("need at least one size and one graph per size".into()));
        }
        if let Some(&n) = self.sizes.iter().find(|&&n| n < 4) {
            return Err(Error::Config(format!("node count {n} below 4")));
        }
        let (lo, hi) = self.degree_range;
        if !(lo > 0.0 && lo <= hi) {
            return Err(Error::Config("degree range must satisfy 0 < lo <= hi".into()));
        }
        if self.delay_bound == 0 {
            return Err(Error::Config("delay bound must be at least 1".into()));
        }
        Ok(())
    }

    /// Expected degree of graph `k` of a size.
    pub fn degree(&self, k: usize) -> f64 {
        let (lo, hi) = self.degree_range;
        if self.graphs_per_size == 1 {
            return lo;
        }
        lo + (hi - lo) * k as f64 / (self.graphs_per_size - 1) as f64
    }

    pub fn edge_probability(&self, n: u32, k: usize) -> f64 {
        (self.degree(k) / f64::from(n - 1)).min(1.0)
    }

    /// Seed of graph `k` among the graphs with `n` nodes. It is also the
    /// seed column of the CSV, so `generate_er(n, p, seed)` redraws it.
    pub fn graph_seed(&self, n: u32, k: usize) -> u64 {
        self.seed * 1_000_000 + u64::from(n) * 1000 + k as u64
    }
}

/// G(n, p): every unordered pair independently, in lexicographic order, one
/// Bernoulli draw from ChaCha8 each. Nodes 1, 2, 3 are the sources.
pub fn generate_er(n: u32, p: f64, seed: u64, capacity: u32) -> Result<WirelessGraph> {
    if n < 3 {
        return Err(Error::Config(format!("need at least 3 nodes, got {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Config(format!("edge probability {p} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = WirelessGraph::new(n, vec![1, 2, 3], capacity)?;
    for u in 1..=n {
        for v in u + 1..=n {
            if rng.gen_bool(p) {
                g.add_edge(u, v, 1)?;
            }
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub n: u32,
    pub p: f64,
    pub seed: u64,
    pub metric: &'static str,
    pub value: f64,
    pub exact: bool,
}

impl Row {
    pub fn csv(&self) -> String {
        format!(
            "{},{:.6},{},{},{},{}",
            self.n,
            self.p,
            self.seed,
            self.metric,
            self.value,
            if self.exact { "exact" } else { "heuristic" }
        )
    }
}

/// Relay transmissions, coding and routing, in a steady-state window of
/// the slotted schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TxCounts {
    pub coding: u64,
    pub routing: u64,
    pub window: i64,
}

/// Run both schemes with unit delays and count fresh relay broadcasts in
/// `[w0, w0 + window)`, after every block has filled up and before
/// generation stops.
pub fn steady_state_tx(blocks: &[Block], window: i64) -> Result<TxCounts> {
    if blocks.is_empty() {
        return Ok(TxCounts { window, ..TxCounts::default() });
    }
    let l = blocks.iter().map(Block::hops).max().unwrap_or(0) as i64;
    let w0 = 2 * (l + 2);
    let mut cfg = SimConfig::sync(w0 + window + l + 4);
    cfg.record_events = false;
    let w = Some((w0, w0 + window));
    Ok(TxCounts {
        coding: count_transmissions(&run(blocks, &cfg)?, Role::Relay, w),
        routing: count_transmissions(&run_routing_baseline(blocks, &cfg)?, Role::Relay, w),
        window,
    })
}

/// Async run with uniform delays; true when every decode met its block's
/// `L*D + c` deadline and nothing was lost.
pub fn async_rt_ok(blocks: &[Block], delay_bound: u32, seed: u64) -> Result<bool> {
    if blocks.is_empty() {
        return Ok(true);
    }
    let l = blocks.iter().map(Block::hops).max().unwrap_or(0) as i64;
    let horizon = 40 + 3 * l * i64::from(delay_bound);
    let mut cfg = SimConfig::asynchronous(horizon, DelayModel::uniform(delay_bound), seed);
    cfg.record_events = false;
    Ok(verify_rt_per_block(&run(blocks, &cfg)?))
}

const TX_WINDOW: i64 = 40;

fn graph_rows(spec: &ExperimentSpec, n: u32, k: usize) -> Result<Vec<Row>> {
    let p = spec.edge_probability(n, k);
    let seed = spec.graph_seed(n, k);
    let g = generate_er(n, p, seed, u32::from(spec.field_bits))?;
    let with_graph = |e: Error| -> Error {
        let msg = format!("{e}\ngraph n={n} p={p:.6} seed={seed}:\n{}", g.to_text());
        match e {
            Error::Infeasible(_) => Error::Infeasible(msg),
            _ => Error::Assertion(msg),
        }
    };
    let mut metrics: Vec<(&'static str, f64)> = Vec::new();
    let s: [NodeId; 3] = [1, 2, 3];
    let (blocks, exact) = match spec.session {
        Session::Multicast => {
            let d = decompose_multicast(&g, &spec.decompose).map_err(with_graph)?;
            metrics.push(("rings", d.rings.len() as f64));
            metrics.push(("linestars", d.linestars.len() as f64));
            metrics.push(("h", f64::from(d.h)));
            metrics.push(("rate_halves", f64::from(d.rate_halves())));
            (d.blocks, d.exact)
        }
        Session::Unicast => {
            let plan = unicast_corner(&g, (1, 2), &spec.decompose).map_err(with_graph)?;
            metrics.push(("p12", f64::from(plan.rates[pair_slot(&s, 1, 2)])));
            metrics.push(("p13", f64::from(plan.rates[pair_slot(&s, 1, 3)])));
            metrics.push(("p23", f64::from(plan.rates[pair_slot(&s, 2, 3)])));
            (plan.blocks, plan.exact)
        }
        Session::Combined => {
            let mut corners = combined_corners(&g, &spec.decompose).map_err(with_graph)?;
            let c = corners.pop().expect("multicast corner is last");
            metrics.push(("mc_halves", f64::from(c.multicast_halves)));
            metrics.push(("residual", c.unicast.iter().sum::<u32>() as f64));
            let exact = c.exact && corners.iter().all(|x| x.exact);
            (c.blocks, exact)
        }
    };
    let tx = steady_state_tx(&blocks, TX_WINDOW).map_err(with_graph)?;
    metrics.push(("relay_tx_coding", tx.coding as f64));
    metrics.push(("relay_tx_routing", tx.routing as f64));
    if tx.routing > 0 {
        metrics.push(("tx_ratio", tx.coding as f64 / tx.routing as f64));
    }
    let ok = async_rt_ok(&blocks, spec.delay_bound, seed).map_err(with_graph)?;
    metrics.push(("rt_ok", if ok { 1.0 } else { 0.0 }));
    Ok(metrics
        .into_iter()
        .map(|(metric, value)| Row {
            n,
            p,
            seed,
            metric,
            value,
            exact,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub rows: Vec<Row>,
}

impl ExperimentOutput {
    pub fn csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.csv());
            s.push('\n');
        }
        s
    }

    /// Metric names in first-seen order.
    pub fn metrics(&self) -> Vec<&'static str> {
        let mut out: Vec<&'static str> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.metric) {
                out.push(r.metric);
            }
        }
        out
    }

    /// Mean of a metric over the graphs of size `n`, if any graph has it.
    pub fn mean(&self, n: u32, metric: &str) -> Option<f64> {
        let v: Vec<f64> = self.rows.iter().filter(|r| r.n == n && r.metric == metric).map(|r| r.value).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    /// Sum of a metric over the graphs of size `n`.
    pub fn total(&self, n: u32, metric: &str) -> f64 {
        self.rows.iter().filter(|r| r.n == n && r.metric == metric).map(|r| r.value).sum()
    }

    /// Per-size means as a gnuplot data block: one row per size, one column
    /// per metric.
    pub fn averages_dat(&self, sizes: &[u32]) -> String {
        let metrics = self.metrics();
        let mut s = format!("# n {}\n", metrics.join(" "));
        for &n in sizes {
            let _ = write!(s, "{n}");
            for m in &metrics {
                match self.mean(n, m) {
                    Some(v) => {
                        let _ = write!(s, " {v:.6}");
                    }
                    None => s.push_str(" NaN"),
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Run metadata: generator, field and the p schedule.
pub fn metadata(spec: &ExperimentSpec) -> Result<String> {
    let field = GaloisField::new(spec.field_bits)?;
    let mut s = format!(
        "session={}\nseed={}\ngraph_model=G(n,p) rng=chacha8 sources=1,2,3\ndelay_bound={}\nfield_bits={} polynomial=0x{:x}\ngraphs_per_size={}\n",
        spec.session.name(),
        spec.seed,
        spec.delay_bound,
        spec.field_bits,
        field.polynomial(),
        spec.graphs_per_size,
    );
    for &n in &spec.sizes {
        for k in 0..spec.graphs_per_size {
            let _ = writeln!(
                s,
                "graph n={n} k={k} degree={:.6} p={:.6} seed={}",
                spec.degree(k),
                spec.edge_probability(n, k),
                spec.graph_seed(n, k)
            );
        }
    }
    Ok(s)
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    let jobs: Vec<(u32, usize)> = spec
        .sizes
        .iter()
        .flat_map(|&n| (0..spec.graphs_per_size).map(move |k| (n, k)))
        .collect();
    let per_graph = jobs
        .par_iter()
        .map(|&(n, k)| graph_rows(spec, n, k))
        .collect::<Vec<Result<Vec<Row>>>>();
    let mut rows = Vec::new();
    for r in per_graph {
        rows.extend(r?);
    }
    Ok(ExperimentOutput { rows })
}
