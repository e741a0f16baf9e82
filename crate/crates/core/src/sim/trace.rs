use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::decompose::BlockKind;
use crate::graph::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EventKind {
    Send,
    Recv,
    Decode,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Send => "send",
            EventKind::Recv => "recv",
            EventKind::Decode => "decode",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub slot: i64,
    pub node: NodeId,
    pub edge: usize,
    pub kind: EventKind,
    pub header_hex: String,
    pub payload_hex: String,
}

/// One broadcast by one node in one slot, whatever the number of
/// neighbours that hear it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Broadcast {
    pub slot: i64,
    pub node: NodeId,
    pub block: u32,
    pub relay: bool,
    pub fresh: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeRecord {
    pub block: u32,
    pub origin: NodeId,
    pub dest: NodeId,
    pub seq: i64,
    pub generated: i64,
    pub decoded: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockStats {
    pub id: u32,
    pub kind: BlockKind,
    pub hops: usize,
    /// Delay constant of the scheme: 0 for a line, 1 for a tree.
    pub c: i64,
    pub relays: usize,
    /// Source node of each origin.
    pub origins: Vec<NodeId>,
    /// Messages generated per origin.
    pub generated: Vec<i64>,
    /// Slots between consecutive messages of one origin.
    pub period: i64,
    /// Origins' messages some destination never decoded.
    pub missing: Vec<(NodeId, NodeId, i64)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimTrace {
    pub meta: String,
    pub horizon: i64,
    /// Sources generate only before this slot.
    pub cutoff: i64,
    pub delay_bound: u32,
    pub events: Vec<Event>,
    pub broadcasts: Vec<Broadcast>,
    pub decodes: Vec<DecodeRecord>,
    pub blocks: Vec<BlockStats>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub relay_tx: u64,
    pub src_tx: u64,
    pub max_delay: i64,
    /// Worst directed source pair, in units of C.
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Relay,
    Source,
}

impl SimTrace {
    pub fn max_delay(&self) -> i64 {
        self.decodes.iter().map(|d| d.decoded - d.generated).max().unwrap_or(0)
    }

    /// Rate delivered to the worst directed pair of sources that any block
    /// serves, in units of C, over the generating part of the run.
    pub fn rate(&self) -> f64 {
        let mut per_pair: BTreeMap<(NodeId, NodeId), i64> = BTreeMap::new();
        for d in &self.decodes {
            *per_pair.entry((d.origin, d.dest)).or_default() += 1;
        }
        for b in &self.blocks {
            for &o in &b.origins {
                for &x in &b.origins {
                    if o != x {
                        per_pair.entry((o, x)).or_default();
                    }
                }
            }
        }
        if self.cutoff <= 0 || per_pair.is_empty() {
            return 0.0;
        }
        per_pair.values().map(|&n| n as f64 / self.cutoff as f64).fold(f64::INFINITY, f64::min)
    }

    pub fn summary(&self) -> Summary {
        Summary {
            relay_tx: count_transmissions(self, Role::Relay, None),
            src_tx: count_transmissions(self, Role::Source, None),
            max_delay: self.max_delay(),
            rate: self.rate(),
        }
    }

    /// Every message generated before the cutoff reached every destination.
    pub fn loss_free(&self) -> bool {
        self.blocks.iter().all(|b| b.missing.is_empty())
    }

    /// The trace dump: metadata comment, one line per event, then the
    /// summary record.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# {}", self.meta).unwrap();
        for e in &self.events {
            writeln!(
                s,
                "{},{},{},{},{},{}",
                e.slot,
                e.node,
                e.edge,
                e.kind.name(),
                e.header_hex,
                e.payload_hex
            )
            .unwrap();
        }
        let m = self.summary();
        writeln!(
            s,
            "summary: relay_tx={}, src_tx={}, max_delay={}, rate={}",
            m.relay_tx, m.src_tx, m.max_delay, m.rate
        )
        .unwrap();
        s
    }
}

/// Broadcasts carrying something new, by relays or by sources, optionally
/// restricted to slots in `window = [from, to)`. A broadcast counts once
/// however many neighbours hear it.
pub fn count_transmissions(trace: &SimTrace, role: Role, window: Option<(i64, i64)>) -> u64 {
    trace
        .broadcasts
        .iter()
        .filter(|b| b.fresh && b.relay == (role == Role::Relay))
        .filter(|b| window.map_or(true, |(a, z)| b.slot >= a && b.slot < z))
        .count() as u64
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairReport {
    pub origin: NodeId,
    pub dest: NodeId,
    pub worst_delay: i64,
    pub bound: i64,
    /// `bound - worst_delay`; negative on failure.
    pub slack: i64,
    /// First decode that broke the bound, as an index into `decodes`.
    pub first_violation: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RtReport {
    pub pairs: Vec<PairReport>,
    pub loss_free: bool,
}

impl RtReport {
    pub fn pass(&self) -> bool {
        self.loss_free && self.pairs.iter().all(|p| p.slack >= 0)
    }
}

/// Check that every message generated at slot t reached each destination
/// by `t + L*D + c`.
pub fn verify_rt(trace: &SimTrace, l: i64, d: i64, c: i64) -> RtReport {
    let bound = l * d + c;
    let mut pairs: BTreeMap<(NodeId, NodeId), PairReport> = BTreeMap::new();
    for (k, r) in trace.decodes.iter().enumerate() {
        let delay = r.decoded - r.generated;
        let p = pairs.entry((r.origin, r.dest)).or_insert(PairReport {
            origin: r.origin,
            dest: r.dest,
            worst_delay: i64::MIN,
            bound,
            slack: 0,
            first_violation: None,
        });
        p.worst_delay = p.worst_delay.max(delay);
        p.slack = bound - p.worst_delay;
        if delay > bound && p.first_violation.is_none() {
            p.first_violation = Some(k);
        }
    }
    RtReport {
        pairs: pairs.into_values().collect(),
        loss_free: trace.loss_free(),
    }
}

/// [`verify_rt`] with each block's own hop count and constant.
pub fn verify_rt_per_block(trace: &SimTrace) -> bool {
    let d = i64::from(trace.delay_bound);
    trace.loss_free()
        && trace.decodes.iter().all(|r| {
            let b = trace.blocks.iter().find(|b| b.id == r.block).unwrap();
            r.decoded - r.generated <= b.hops as i64 * d + b.c
        })
}
