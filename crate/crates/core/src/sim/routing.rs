//! Store-and-forward routing over the same blocks, for comparison.
//!
//! Sources broadcast each message once. A relay, or a source at the center
//! of a tree, rebroadcasts every message the first time it hears it; end
//! nodes only listen. A node may forward several messages in one slot, each
//! as its own broadcast.

use std::collections::{BTreeMap, HashSet};

use rand::Rng;

use crate::codec::payload_hex;
use crate::decompose::Block;
use crate::error::{Error, Result};
use crate::field::{FieldElement, GaloisField};

use super::delay::DelaySource;
use super::trace::{BlockStats, Broadcast, DecodeRecord, Event, EventKind, SimTrace};
use super::{block_rng, cutoff, merge, scheme_constant, topology, BlockRun, SimConfig};

struct Hop {
    from: usize,
    to: usize,
    edge: usize,
    sent: i64,
    origin: usize,
    seq: i64,
    value: FieldElement,
}

fn route_block(b: &Block, cfg: &SimConfig, cut: i64) -> Result<BlockRun> {
    let field = GaloisField::new(cfg.field_bits)?;
    let topo = topology(b);
    let d = cfg.delay.bound;
    let mut rng = block_rng(cfg, b.id);
    let mut delays = DelaySource::new(&cfg.delay);
    let period = if topo.line { 1 } else { 2 };
    let n = topo.nodes.len();
    let forwards: Vec<bool> = (0..n).map(|k| topo.links[k].len() > 1).collect();
    let mut have: Vec<HashSet<(usize, i64)>> = vec![HashSet::new(); n];
    let mut flight: BTreeMap<i64, Vec<Hop>> = BTreeMap::new();
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
            generated: vec![0; topo.origins.len()],
            period,
            missing: Vec::new(),
        },
    };
    let rec = cfg.record_events;
    for t in 0..cfg.horizon {
        // (node, origin, seq, value, heard from)
        let mut send: Vec<(usize, usize, i64, FieldElement, Option<usize>)> = Vec::new();
        for h in flight.remove(&t).unwrap_or_default() {
            if t - h.sent < 1 || t - h.sent > i64::from(d) {
                return Err(Error::Assertion(format!("routing delay {} outside 1..={d}", t - h.sent)));
            }
            let node = topo.nodes[h.to];
            if rec {
                out.events.push((t, ev(t, node, h.edge, EventKind::Recv, h.value)));
            }
            if !have[h.to].insert((h.origin, h.seq)) {
                continue;
            }
            if topo.own[h.to].is_some() {
                if rec {
                    out.events.push((t, ev(t, node, h.edge, EventKind::Decode, h.value)));
                }
                out.decodes.push(DecodeRecord {
                    block: b.id,
                    origin: topo.origins[h.origin].0,
                    dest: node,
                    seq: h.seq,
                    generated: h.seq * period,
                    decoded: t,
                });
            }
            if forwards[h.to] {
                send.push((h.to, h.origin, h.seq, h.value, Some(h.from)));
            }
        }
        if t < cut && t % period == 0 {
            for (o, &(_, idx)) in topo.origins.iter().enumerate() {
                let v = field.element(rng.gen_range(0..field.order()))?;
                let seq = out.stats.generated[o];
                out.stats.generated[o] += 1;
                have[idx].insert((o, seq));
                send.push((idx, o, seq, v, None));
            }
        }
        for (k, o, seq, v, from) in send {
            out.broadcasts.push(Broadcast {
                slot: t,
                node: topo.nodes[k],
                block: b.id,
                relay: topo.own[k].is_none(),
                fresh: true,
            });
            for &(peer, edge, _) in &topo.links[k] {
                if Some(peer) == from {
                    continue;
                }
                if rec {
                    out.events.push((t, ev(t, topo.nodes[k], edge, EventKind::Send, v)));
                }
                let at = delays.arrival(&mut rng, t, (k, peer));
                flight.entry(at).or_default().push(Hop {
                    from: k,
                    to: peer,
                    edge,
                    sent: t,
                    origin: o,
                    seq,
                    value: v,
                });
            }
        }
    }
    for (o, &(src, _)) in topo.origins.iter().enumerate() {
        for &(dst, idx) in &topo.origins {
            if dst != src {
                for seq in 0..out.stats.generated[o] {
                    if !have[idx].contains(&(o, seq)) {
                        out.stats.missing.push((src, dst, seq));
                    }
                }
            }
        }
    }
    Ok(out)
}

fn ev(slot: i64, node: u32, edge: usize, kind: EventKind, v: FieldElement) -> Event {
    Event {
        slot,
        node,
        edge,
        kind,
        header_hex: "-".into(),
        payload_hex: payload_hex(v),
    }
}

/// Routing counterpart of [`super::run`] on the same blocks and delays.
pub fn run_routing_baseline(blocks: &[Block], cfg: &SimConfig) -> Result<SimTrace> {
    cfg.validate()?;
    let cut = cutoff(blocks, cfg)?;
    let runs = blocks
        .iter()
        .map(|b| route_block(b, cfg, cut))
        .collect::<Result<Vec<_>>>()?;
    Ok(merge(cfg, cut, runs, "routing"))
}
