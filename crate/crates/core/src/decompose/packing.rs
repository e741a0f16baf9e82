//! Joint search over rings and line-stars, for graphs where taking rings
//! first leaves too little for the line-stars.
//!
//! Both kinds of block spend one edge per source for every C/2 of rate, so
//! what decides a packing is how many relays each block eats. Options are
//! ranked by relays per C/2 and the search backtracks within a budget.

use std::collections::BTreeSet;

use crate::graph::{compute_metrics_masked, min_cut_masked, EdgeMask, NodeId, WiredGraph, WiredPath};

use super::pair_mask;
use super::rings::{pairs, remove_path, tree_options, without, LineStar, Ring, RingPath};

/// Shortest simple `i`-to-`j` lines through relays, by wireless hop count,
/// at most `k` of them. The search gives up deepening after `visits` DFS
/// steps.
fn short_paths(w: &WiredGraph, mask: &EdgeMask, i: NodeId, j: NodeId, k: usize, visits: usize) -> Vec<WiredPath> {
    let m = pair_mask(w, mask, i, j);
    let target = w.receive_index(j);
    let mut out: Vec<WiredPath> = Vec::new();
    let mut steps = 0usize;
    struct Dfs<'a> {
        w: &'a WiredGraph,
        m: &'a EdgeMask,
        target: usize,
        on: Vec<bool>,
        arcs: Vec<usize>,
    }
    fn go(d: &mut Dfs, u: usize, hops_left: usize, out: &mut Vec<WiredPath>, k: usize, steps: &mut usize, cap: usize) {
        if out.len() >= k || *steps >= cap {
            return;
        }
        *steps += 1;
        if u == d.target {
            if hops_left == 0 {
                out.push(WiredPath { arcs: d.arcs.clone() });
            }
            return;
        }
        d.on[u] = true;
        for &a in d.w.out_arcs(u) {
            let arc = d.w.arc(a);
            let wireless = matches!(arc.kind, crate::graph::ArcKind::Wireless { .. });
            if !d.m.is_active(a) || d.on[arc.to] || (wireless && hops_left == 0) {
                continue;
            }
            d.arcs.push(a);
            go(d, arc.to, hops_left - usize::from(wireless), out, k, steps, cap);
            d.arcs.pop();
        }
        d.on[u] = false;
    }
    let mut d = Dfs {
        w,
        m: &m,
        target,
        on: vec![false; w.nodes().len()],
        arcs: Vec::new(),
    };
    let max_hops = w.nodes().len();
    for hops in 1..=max_hops {
        go(&mut d, w.transmit_index(i), hops, &mut out, k, &mut steps, visits);
        if out.len() >= k || steps >= visits {
            break;
        }
    }
    out
}

#[derive(Debug, Clone)]
pub(crate) enum Choice {
    Ring(Ring),
    Star(LineStar),
}

/// A candidate line with its wireless edges and relays.
type Line = (WiredPath, BTreeSet<usize>, BTreeSet<NodeId>);

fn relays_of(w: &WiredGraph, ps: &[&WiredPath]) -> usize {
    let mut r = BTreeSet::new();
    for p in ps {
        r.extend(p.relays(w));
    }
    r.len()
}

/// Rings on the current graph built from short lines: each line keeps the
/// third source's cut when deleted, and the three lines are disjoint.
fn ring_options(w: &WiredGraph, mask: &EdgeMask, s: &[NodeId; 3], per_pair: usize, keep: usize) -> Vec<(usize, Ring)> {
    let mut lists: Vec<Vec<Line>> = Vec::new();
    for (i, j, l) in pairs(s) {
        let c_l = min_cut_masked(w, mask, &[l], &[i, j]);
        let ok: Vec<_> = short_paths(w, mask, i, j, per_pair, 20_000)
            .into_iter()
            .filter(|p| min_cut_masked(w, &without(w, mask, p), &[l], &[i, j]) == c_l)
            .map(|p| {
                let (e, r) = p.footprint(w);
                (p, e, r)
            })
            .collect();
        if ok.is_empty() {
            return Vec::new();
        }
        lists.push(ok);
    }
    let clash = |a: &Line, b: &Line| {
        !a.1.is_disjoint(&b.1) || !a.2.is_disjoint(&b.2)
    };
    let ps = pairs(s);
    let mut out = Vec::new();
    for a in &lists[0] {
        for b in &lists[1] {
            if clash(a, b) {
                continue;
            }
            for c in &lists[2] {
                if clash(a, c) || clash(b, c) {
                    continue;
                }
                let relays = a.2.len() + b.2.len() + c.2.len();
                let mk = |k: usize, p: &WiredPath| RingPath {
                    i: ps[k].0,
                    j: ps[k].1,
                    path: p.clone(),
                };
                out.push((
                    relays,
                    Ring {
                        paths: [mk(0, &a.0), mk(1, &b.0), mk(2, &c.0)],
                    },
                ));
            }
        }
    }
    out.sort_by_key(|(r, ring)| (*r, ring.paths.iter().map(|p| p.path.arcs.len()).sum::<usize>()));
    out.truncate(keep);
    out
}

fn options(w: &WiredGraph, mask: &EdgeMask, s: &[NodeId; 3], need: usize) -> Vec<Choice> {
    // Sort key: relays per C/2 (doubled so both kinds stay integral), then
    // rings before stars.
    let mut opts: Vec<(usize, u8, usize, Choice)> = Vec::new();
    if need >= 2 {
        for (k, (relays, ring)) in ring_options(w, mask, s, 12, 6).into_iter().enumerate() {
            opts.push((relays, 0, k, Choice::Ring(ring)));
        }
    }
    for (k, q) in tree_options(w, mask, s).into_iter().take(6).enumerate() {
        let relays = relays_of(w, &[&q.p_ij, &q.p_il]);
        opts.push((2 * relays, 1, k, Choice::Star(q)));
    }
    opts.sort_by_key(|(key, kind, k, _)| (*key, *kind, *k));
    opts.into_iter().map(|(_, _, _, c)| c).collect()
}

fn apply(w: &WiredGraph, mask: &EdgeMask, c: &Choice) -> EdgeMask {
    let mut m = mask.clone();
    match c {
        Choice::Ring(r) => {
            for rp in &r.paths {
                remove_path(w, &mut m, &rp.path);
            }
        }
        Choice::Star(q) => {
            remove_path(w, &mut m, &q.p_ij);
            remove_path(w, &mut m, &q.p_il);
        }
    }
    m
}

fn search(w: &WiredGraph, mask: &EdgeMask, s: &[NodeId; 3], need: usize, budget: &mut usize, got: &mut Vec<Choice>) -> bool {
    if need == 0 {
        return true;
    }
    for c in options(w, mask, s, need) {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        let m = apply(w, mask, &c);
        let halves = if matches!(c, Choice::Ring(_)) { 2 } else { 1 };
        // A block takes at least `halves` from every cut around a source.
        if (compute_metrics_masked(w, &m).h as usize) + halves < need {
            continue;
        }
        got.push(c);
        if search(w, &m, s, need - halves, budget, got) {
            return true;
        }
        got.pop();
    }
    false
}

/// Rings and line-stars worth at least `h` halves of C, or `None` when the
/// budget runs out first.
pub(crate) fn pack_blocks(w: &WiredGraph, mask: &EdgeMask, s: &[NodeId; 3], h: u32) -> Option<(Vec<Ring>, Vec<LineStar>)> {
    let mut budget = 300;
    let mut got = Vec::new();
    if !search(w, mask, s, h as usize, &mut budget, &mut got) {
        return None;
    }
    let mut rings = Vec::new();
    let mut stars = Vec::new();
    for c in got {
        match c {
            Choice::Ring(r) => rings.push(r),
            Choice::Star(q) => stars.push(q),
        }
    }
    Some((rings, stars))
}
