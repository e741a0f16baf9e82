//! Slot-level simulation of deployed blocks.
//!
//! Each block runs on its own: blocks share no edges or relays, so they do
//! not interact. Within a slot, packets due at that slot are delivered and
//! decoded first, then sources generate, then every node encodes and sends
//! one packet to each neighbour in the block with a fresh delay draw.
//!
//! Randomness comes from ChaCha8 seeded with the run seed, one stream per
//! block id, used for payloads and delays in the order they are needed.

mod delay;
mod routing;
mod trace;

pub use delay::{DelayKind, DelayModel};
pub use routing::run_routing_baseline;
pub use trace::{
    count_transmissions, verify_rt, verify_rt_per_block, BlockStats, Broadcast, DecodeRecord, Event, EventKind,
    PairReport, Role, RtReport, SimTrace, Summary,
};

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::header::index_bits;
use crate::codec::{header_hex, payload_hex, Header, LineCoeffs, LineNode, LineRole, LineSide, TreeLink, TreeNode, TreeRole, Tx};
use crate::decompose::{Block, BlockKind, BlockShape};
use crate::error::{Error, Result};
use crate::field::{choose_triplets, FieldElement, GaloisField};
use crate::graph::NodeId;

use delay::DelaySource;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Unit delays; the header-driven codecs then follow the slotted
    /// schedule.
    Sync,
    Async,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Sync => "sync",
            Mode::Async => "async",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimConfig {
    pub mode: Mode,
    pub delay: DelayModel,
    pub horizon: i64,
    pub field_bits: u8,
    pub seed: u64,
    /// Keep the per-event log; off for large sweeps.
    pub record_events: bool,
    pub retention: Option<i64>,
}

impl SimConfig {
    pub fn sync(horizon: i64) -> Self {
        SimConfig {
            mode: Mode::Sync,
            delay: DelayModel::fixed(),
            horizon,
            field_bits: 8,
            seed: 0,
            record_events: true,
            retention: None,
        }
    }

    pub fn asynchronous(horizon: i64, delay: DelayModel, seed: u64) -> Self {
        SimConfig {
            mode: Mode::Async,
            delay,
            horizon,
            field_bits: 8,
            seed,
            record_events: true,
            retention: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.delay.validate()?;
        if self.mode == Mode::Sync && (self.delay.kind != DelayKind::Fixed1 || self.delay.bound != 1) {
            return Err(Error::Config("sync mode needs fixed unit delays".into()));
        }
        if self.horizon <= 0 {
            return Err(Error::Config("horizon must be positive".into()));
        }
        Ok(())
    }

    fn meta(&self, cutoff: i64, blocks: usize, what: &str) -> String {
        let delay = match &self.delay.kind {
            DelayKind::Uniform => "uniform".to_string(),
            DelayKind::Fixed1 => "fixed1".to_string(),
            DelayKind::Adversarial(l) => format!("list{}", l.len()),
        };
        format!(
            "{what} rng=chacha8 seed={} stream=block mode={} delay={delay} fifo={} D={} T={} cutoff={cutoff} C={} blocks={blocks}",
            self.seed,
            self.mode.name(),
            self.delay.fifo,
            self.delay.bound,
            self.horizon,
            self.field_bits
        )
    }
}

/// Delay constant per block kind: 0 for lines, 1 for trees.
pub fn scheme_constant(b: &Block) -> i64 {
    match b.shape {
        BlockShape::Line { .. } => 0,
        BlockShape::Tree { .. } => 1,
    }
}

/// Generation stops at `T - (L*D + c)`, rounded down to an even slot so
/// trees see whole message periods.
pub fn cutoff(blocks: &[Block], cfg: &SimConfig) -> Result<i64> {
    let l = blocks.iter().map(Block::hops).max().unwrap_or(0) as i64;
    let c = blocks.iter().map(scheme_constant).max().unwrap_or(0);
    let mut t = cfg.horizon - (l * i64::from(cfg.delay.bound) + c);
    t -= t.rem_euclid(2);
    if t <= 0 {
        return Err(Error::Config(format!(
            "horizon {} too short for L = {l}, D = {}",
            cfg.horizon, cfg.delay.bound
        )));
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Tag {
    Line(LineSide),
    Tree(TreeLink),
}

/// A block as local nodes and directed links.
pub(crate) struct Topology {
    pub nodes: Vec<NodeId>,
    /// Per node: (peer, wireless edge, tag the peer receives it under).
    pub links: Vec<Vec<(usize, usize, Tag)>>,
    /// Origin generated by each node, if any.
    pub own: Vec<Option<usize>>,
    /// Source node of each origin, and its local index.
    pub origins: Vec<(NodeId, usize)>,
    pub line: bool,
    pub line_roles: Vec<LineRole>,
    pub tree_roles: Vec<TreeRole>,
}

pub(crate) fn topology(b: &Block) -> Topology {
    match &b.shape {
        BlockShape::Line { nodes, edges } => {
            let n = nodes.len();
            let mut links = vec![Vec::new(); n];
            for k in 0..n - 1 {
                links[k].push((k + 1, edges[k], Tag::Line(LineSide::TowardA)));
                links[k + 1].push((k, edges[k], Tag::Line(LineSide::TowardB)));
            }
            let line_roles = (0..n)
                .map(|k| match k {
                    0 => LineRole::EndA,
                    _ if k == n - 1 => LineRole::EndB,
                    _ => LineRole::Relay,
                })
                .collect();
            let mut own = vec![None; n];
            own[0] = Some(0);
            own[n - 1] = Some(1);
            Topology {
                nodes: nodes.clone(),
                links,
                own,
                origins: vec![(nodes[0], 0), (nodes[n - 1], n - 1)],
                line: true,
                line_roles,
                tree_roles: Vec::new(),
            }
        }
        BlockShape::Tree { sources, center, arms } => {
            let center_own = sources.iter().position(|s| s == center);
            let mut nodes = vec![*center];
            let mut roles = vec![TreeRole::Center { own: center_own }];
            let mut own = vec![center_own];
            let mut links: Vec<Vec<(usize, usize, Tag)>> = vec![Vec::new()];
            let mut origins = vec![(0, 0); 3];
            if let Some(o) = center_own {
                origins[o] = (*center, 0);
            }
            for arm in arms {
                let mut prev = 0usize;
                for (k, (&v, &e)) in arm.nodes.iter().zip(&arm.edges).enumerate() {
                    let idx = nodes.len();
                    let terminal = k + 1 == arm.nodes.len();
                    nodes.push(v);
                    links.push(Vec::new());
                    if terminal {
                        roles.push(TreeRole::Terminal { origin: arm.origin });
                        own.push(Some(arm.origin));
                        origins[arm.origin] = (v, idx);
                    } else {
                        roles.push(TreeRole::Arm { origin: arm.origin });
                        own.push(None);
                    }
                    let down = if terminal { TreeLink::Up } else { TreeLink::Inner };
                    let up = if prev == 0 { TreeLink::Arm(arm.origin) } else { TreeLink::Outer };
                    links[prev].push((idx, e, Tag::Tree(down)));
                    links[idx].push((prev, e, Tag::Tree(up)));
                    prev = idx;
                }
            }
            Topology {
                nodes,
                links,
                own,
                origins,
                line: false,
                line_roles: Vec::new(),
                tree_roles: roles,
            }
        }
    }
}

enum Codec {
    Line(LineNode),
    Tree(TreeNode),
}

impl Codec {
    fn encode(&mut self) -> Result<Tx> {
        match self {
            Codec::Line(n) => n.encode(),
            Codec::Tree(n) => n.encode(),
        }
    }

    fn receive(&mut self, tag: Tag, header: &Header, payload: FieldElement) -> Result<Vec<(usize, i64)>> {
        match (self, tag) {
            (Codec::Line(n), Tag::Line(s)) => n.receive(s, header, payload),
            (Codec::Tree(n), Tag::Tree(l)) => n.receive(l, header, payload),
            _ => Err(Error::Protocol("link kind does not match the codec".into())),
        }
    }

    fn inject(&mut self, seq: i64, v: FieldElement) {
        match self {
            Codec::Line(n) => n.inject(seq, v),
            Codec::Tree(n) => n.inject(seq, v),
        }
    }

    fn value(&self, origin: usize, seq: i64) -> Result<FieldElement> {
        match self {
            Codec::Line(n) => n.store().require(origin, seq),
            Codec::Tree(n) => n.store().require(origin, seq),
        }
    }

    fn watermark(&self, origin: usize) -> i64 {
        match self {
            Codec::Line(n) => n.store().watermark(origin),
            Codec::Tree(n) => n.store().watermark(origin),
        }
    }
}

struct InFlight {
    to: usize,
    edge: usize,
    tag: Tag,
    sent: i64,
    header: Header,
    payload: FieldElement,
}

pub(crate) struct BlockRun {
    pub events: Vec<(i64, Event)>,
    pub broadcasts: Vec<Broadcast>,
    pub decodes: Vec<DecodeRecord>,
    pub stats: BlockStats,
}

pub(crate) fn block_rng(cfg: &SimConfig, block: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(u64::from(block));
    rng
}

fn run_block(b: &Block, n_blocks: u32, cfg: &SimConfig, cutoff: i64) -> Result<BlockRun> {
    let field = GaloisField::new(cfg.field_bits)?;
    let topo = topology(b);
    let d = cfg.delay.bound;
    let w = index_bits(d);
    let mut rng = block_rng(cfg, b.id);
    let mut delays = DelaySource::new(&cfg.delay);
    let mut codecs: Vec<Codec> = if topo.line {
        topo.line_roles
            .iter()
            .map(|&r| Codec::Line(LineNode::new(r, field, LineCoeffs::ones(&field), w, cfg.retention)))
            .collect()
    } else {
        let coeffs = choose_triplets(&field)?;
        topo.tree_roles
            .iter()
            .map(|&r| Codec::Tree(TreeNode::new(r, field, coeffs, w, cfg.retention)))
            .collect()
    };
    let period = if topo.line { 1 } else { 2 };
    let n_origins = topo.origins.len();
    let mut payloads: Vec<Vec<FieldElement>> = vec![Vec::new(); n_origins];
    let mut flight: BTreeMap<i64, Vec<InFlight>> = BTreeMap::new();
    let mut out = BlockRun {
        events: Vec::new(),
        broadcasts: Vec::new(),
        decodes: Vec::new(),
        stats: BlockStats {
            id: b.id,
            kind: b.kind,
            hops: b.hops(),
            c: scheme_constant(b),
            relays: topo.own.iter().filter(|o| o.is_none()).count(),
            origins: topo.origins.iter().map(|o| o.0).collect(),
            generated: vec![0; n_origins],
            period,
            missing: Vec::new(),
        },
    };
    let mut event_id = 0usize;
    let rec = cfg.record_events;
    let hex = |h: &Header| header_hex(h, b.id, d, n_blocks.max(1));
    for t in 0..cfg.horizon {
        for p in flight.remove(&t).unwrap_or_default() {
            if t - p.sent < 1 || t - p.sent > i64::from(d) {
                return Err(Error::Assertion(format!("event {event_id}: delay {} outside 1..={d}", t - p.sent)));
            }
            let node = topo.nodes[p.to];
            if rec {
                out.events.push((
                    t,
                    Event {
                        slot: t,
                        node,
                        edge: p.edge,
                        kind: EventKind::Recv,
                        header_hex: hex(&p.header)?,
                        payload_hex: payload_hex(p.payload),
                    },
                ));
            }
            event_id += 1;
            let got = codecs[p.to]
                .receive(p.tag, &p.header, p.payload)
                .map_err(|e| Error::Protocol(format!("event {event_id}: node {node}: {e}")))?;
            for (o, seq) in got {
                let v = codecs[p.to].value(o, seq)?;
                if seq < 0 || seq as usize >= payloads[o].len() || payloads[o][seq as usize] != v {
                    return Err(Error::Protocol(format!(
                        "event {event_id}: node {node} decoded a wrong value for origin {o} message {seq}"
                    )));
                }
                if rec {
                    out.events.push((
                        t,
                        Event {
                            slot: t,
                            node,
                            edge: p.edge,
                            kind: EventKind::Decode,
                            header_hex: hex(&p.header)?,
                            payload_hex: payload_hex(v),
                        },
                    ));
                }
                event_id += 1;
                if topo.own[p.to].is_some() {
                    out.decodes.push(DecodeRecord {
                        block: b.id,
                        origin: topo.origins[o].0,
                        dest: node,
                        seq,
                        generated: seq * period,
                        decoded: t,
                    });
                }
            }
        }
        if t < cutoff && t % period == 0 {
            for (o, &(_, idx)) in topo.origins.iter().enumerate() {
                let v = field.element(rng.gen_range(0..field.order()))?;
                let seq = payloads[o].len() as i64;
                payloads[o].push(v);
                codecs[idx].inject(seq, v);
                out.stats.generated[o] += 1;
            }
        }
        for k in 0..topo.nodes.len() {
            let tx = codecs[k]
                .encode()
                .map_err(|e| Error::Protocol(format!("event {event_id}: node {}: {e}", topo.nodes[k])))?;
            out.broadcasts.push(Broadcast {
                slot: t,
                node: topo.nodes[k],
                block: b.id,
                relay: topo.own[k].is_none(),
                fresh: tx.fresh,
            });
            for &(peer, edge, tag) in &topo.links[k] {
                if rec {
                    out.events.push((
                        t,
                        Event {
                            slot: t,
                            node: topo.nodes[k],
                            edge,
                            kind: EventKind::Send,
                            header_hex: hex(&tx.header)?,
                            payload_hex: payload_hex(tx.payload),
                        },
                    ));
                }
                event_id += 1;
                let at = delays.arrival(&mut rng, t, (k, peer));
                flight.entry(at).or_default().push(InFlight {
                    to: peer,
                    edge,
                    tag,
                    sent: t,
                    header: tx.header,
                    payload: tx.payload,
                });
            }
        }
    }
    for (o, &(src, _)) in topo.origins.iter().enumerate() {
        for &(dst, idx) in &topo.origins {
            if dst == src {
                continue;
            }
            let wm = codecs[idx].watermark(o);
            for seq in wm + 1..out.stats.generated[o] {
                out.stats.missing.push((src, dst, seq));
            }
        }
    }
    Ok(out)
}

pub(crate) fn merge(cfg: &SimConfig, cutoff: i64, runs: Vec<BlockRun>, what: &str) -> SimTrace {
    let n = runs.len();
    let mut events: Vec<(i64, usize, Event)> = Vec::new();
    let mut trace = SimTrace {
        meta: cfg.meta(cutoff, n, what),
        horizon: cfg.horizon,
        cutoff,
        delay_bound: cfg.delay.bound,
        events: Vec::new(),
        broadcasts: Vec::new(),
        decodes: Vec::new(),
        blocks: Vec::new(),
    };
    for r in runs {
        for (t, e) in r.events {
            events.push((t, events.len(), e));
        }
        trace.broadcasts.extend(r.broadcasts);
        trace.decodes.extend(r.decodes);
        trace.blocks.push(r.stats);
    }
    // Stable by slot, then block order, then emission order.
    events.sort_by_key(|(t, k, _)| (*t, *k));
    trace.events = events.into_iter().map(|(_, _, e)| e).collect();
    trace.broadcasts.sort_by_key(|b| (b.slot, b.block));
    trace
}

/// Simulate coded operation of every block.
pub fn run(blocks: &[Block], cfg: &SimConfig) -> Result<SimTrace> {
    cfg.validate()?;
    let cut = cutoff(blocks, cfg)?;
    let n = blocks.len() as u32;
    let runs = blocks
        .iter()
        .map(|b| run_block(b, n, cfg, cut))
        .collect::<Result<Vec<_>>>()?;
    Ok(merge(cfg, cut, runs, "coding"))
}

/// A one-block line `1 - 2 - ... - m` with ends 1 and m.
pub fn line_block(m: u32) -> Block {
    let nodes: Vec<NodeId> = (1..=m).collect();
    let edges: Vec<usize> = (0..m as usize - 1).collect();
    Block {
        id: 0,
        kind: BlockKind::Line,
        edges: edges.iter().copied().collect(),
        relays: nodes[1..nodes.len() - 1].iter().copied().collect(),
        shape: BlockShape::Line { nodes, edges },
    }
}

/// A tree with sources 1, 2, 3 and the given number of relays on each arm
/// between the center (node 4) and the source. Relays are numbered from 5.
pub fn tree_block(arm_relays: [usize; 3]) -> Block {
    use crate::decompose::TreeArm;
    let mut next = 5;
    let mut edge = 0;
    let mut arms = Vec::new();
    let mut relays = std::collections::BTreeSet::from([4]);
    for (o, &k) in arm_relays.iter().enumerate() {
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        for _ in 0..k {
            nodes.push(next);
            relays.insert(next);
            next += 1;
            edges.push(edge);
            edge += 1;
        }
        nodes.push(o as NodeId + 1);
        edges.push(edge);
        edge += 1;
        arms.push(TreeArm { origin: o, nodes, edges });
    }
    Block {
        id: 0,
        kind: BlockKind::LineStar,
        edges: (0..edge).collect(),
        relays,
        shape: BlockShape::Tree {
            sources: [1, 2, 3],
            center: 4,
            arms,
        },
    }
}

#[cfg(test)]
mod tests;
