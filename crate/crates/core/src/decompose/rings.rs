//! Rings and line-stars for the multicast session.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{
    cancel_cycles, compute_metrics_masked, decompose_paths, min_cut_masked, split_relays, ArcKind, EdgeMask, FlowNet,
    NodeId, WiredGraph, WiredNode, WiredPath, WirelessGraph,
};

use super::binary_flow::{solve_binary_flow, BinaryFlowProblem, SolveRoute};
use super::blocks::{Block, BlockKind};
use super::packing::pack_blocks;
use super::{pair_mask, sorted_sources, DecomposeConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingPath {
    pub i: NodeId,
    pub j: NodeId,
    pub path: WiredPath,
}

/// Three edge-disjoint lines joining the sources pairwise, in pair order
/// (s0,s1), (s0,s2), (s1,s2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ring {
    pub paths: [RingPath; 3],
}

/// `P_ij` and `P_il` leaving source `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineStar {
    pub i: NodeId,
    pub j: NodeId,
    pub l: NodeId,
    pub p_ij: WiredPath,
    pub p_il: WiredPath,
}

#[derive(Debug, Clone)]
pub struct MulticastDecomposition {
    pub wired: WiredGraph,
    pub sources: [NodeId; 3],
    pub h: u32,
    pub rings: Vec<Ring>,
    pub linestars: Vec<LineStar>,
    /// Arcs not claimed by any block.
    pub leftover: EdgeMask,
    /// Every flow subproblem went through branch-and-bound and the ring
    /// set is provably maximum.
    pub exact: bool,
    /// Ring lines first (three per ring), then line-stars.
    pub blocks: Vec<Block>,
}

impl MulticastDecomposition {
    /// Equal rate per session in units of C/2: `2|R| + |Q|`.
    pub fn rate_halves(&self) -> u32 {
        (2 * self.rings.len() + self.linestars.len()) as u32
    }

    /// Longest source-to-source hop count over all blocks.
    pub fn max_hops(&self) -> usize {
        self.blocks.iter().map(Block::hops).max().unwrap_or(0)
    }
}

fn third(s: &[NodeId; 3], i: NodeId, j: NodeId) -> NodeId {
    *s.iter().find(|&&x| x != i && x != j).unwrap()
}

pub(super) fn pairs(s: &[NodeId; 3]) -> [(NodeId, NodeId, NodeId); 3] {
    [(s[0], s[1], s[2]), (s[0], s[2], s[1]), (s[1], s[2], s[0])]
}

pub(super) fn remove_path(w: &WiredGraph, mask: &mut EdgeMask, p: &WiredPath) {
    let (e, r) = p.footprint(w);
    mask.remove_footprint(w, &e.into_iter().collect::<Vec<_>>(), &r.into_iter().collect::<Vec<_>>());
}

pub(super) fn without(w: &WiredGraph, mask: &EdgeMask, p: &WiredPath) -> EdgeMask {
    let mut m = mask.clone();
    remove_path(w, &mut m, p);
    m
}

fn disjoint(w: &WiredGraph, a: &WiredPath, b: &WiredPath) -> bool {
    let (ea, ra) = a.footprint(w);
    let (eb, rb) = b.footprint(w);
    ea.is_disjoint(&eb) && ra.is_disjoint(&rb)
}

/// Ring test on the graph the ring was taken from: the three lines are
/// disjoint, and deleting any one of them leaves the third source's cut
/// to the other two unchanged.
pub fn ring_is_valid(w: &WiredGraph, mask: &EdgeMask, ring: &Ring) -> bool {
    let s = match sorted_sources(w) {
        Ok(s) => s,
        Err(_) => return false,
    };
    for a in 0..3 {
        for b in a + 1..3 {
            if !disjoint(w, &ring.paths[a].path, &ring.paths[b].path) {
                return false;
            }
        }
    }
    ring.paths.iter().all(|rp| {
        let l = third(&s, rp.i, rp.j);
        let before = min_cut_masked(w, mask, &[l], &[rp.i, rp.j]);
        let after = min_cut_masked(w, &without(w, mask, &rp.path), &[l], &[rp.i, rp.j]);
        before == after
    })
}

/// Problem (13)-style ring-grade search for the pair (i, j). Returns the
/// candidate i-to-j lines in the cycle-free optimum, or none when no flow
/// from i reaches j.
fn ring_grade_paths(
    w: &WiredGraph,
    mask: &EdgeMask,
    i: NodeId,
    j: NodeId,
    l: NodeId,
    cfg: &DecomposeConfig,
    exact: &mut bool,
) -> Result<Vec<WiredPath>> {
    let c_l = min_cut_masked(w, mask, &[l], &[i, j]);
    let p = BinaryFlowProblem::ring(i, j, l, c_l);
    let sol = solve_binary_flow(w, mask, &p, &cfg.solver)?;
    *exact &= sol.route == SolveRoute::BranchAndBound;
    let mut used = sol.used;
    cancel_cycles(w, &mut used, &[w.transmit_index(i), w.transmit_index(l)]);
    let into_j = w
        .arcs()
        .iter()
        .filter(|a| used[a.id] && a.to == w.receive_index(j))
        .count();
    if into_j == 0 {
        return Ok(Vec::new());
    }
    let mut out = BTreeSet::new();
    for path in decompose_paths(w, &used) {
        if path.start(w) != i {
            continue;
        }
        if let Some(k) = path.arcs.iter().position(|&a| w.arc(a).to == w.receive_index(j)) {
            out.insert(WiredPath {
                arcs: path.arcs[..=k].to_vec(),
            });
        }
    }
    Ok(out.into_iter().collect())
}

/// Algorithm 1 with deterministic choices. Pairs are handled one after
/// another so the three lines of a ring come out disjoint. Returns the
/// rings found; `mask` loses their footprints.
pub fn find_rings(w: &WiredGraph, mask: &mut EdgeMask, cfg: &DecomposeConfig, exact: &mut bool) -> Result<Vec<Ring>> {
    let s = sorted_sources(w)?;
    let mut rings = Vec::new();
    'outer: loop {
        let before = mask.clone();
        let mut got: Vec<RingPath> = Vec::new();
        for (i, j, l) in pairs(&s) {
            let cands = ring_grade_paths(w, mask, i, j, l, cfg, exact)?;
            let c_l = min_cut_masked(w, mask, &[l], &[i, j]);
            let pick = cands
                .into_iter()
                .find(|p| min_cut_masked(w, &without(w, mask, p), &[l], &[i, j]) == c_l);
            let Some(path) = pick else {
                *mask = before;
                break 'outer;
            };
            remove_path(w, mask, &path);
            got.push(RingPath { i, j, path });
        }
        let ring = Ring {
            paths: [got[0].clone(), got[1].clone(), got[2].clone()],
        };
        if !ring_is_valid(w, &before, &ring) {
            *mask = before;
            break;
        }
        rings.push(ring);
    }
    Ok(rings)
}

/// Simple paths from `i` to `j` through relays only.
fn simple_paths(w: &WiredGraph, mask: &EdgeMask, i: NodeId, j: NodeId, limit: usize) -> Vec<WiredPath> {
    let m = pair_mask(w, mask, i, j);
    let target = w.receive_index(j);
    let mut out = Vec::new();
    let mut on = vec![false; w.nodes().len()];
    let mut arcs = Vec::new();
    fn go(
        w: &WiredGraph,
        m: &EdgeMask,
        u: usize,
        target: usize,
        on: &mut [bool],
        arcs: &mut Vec<usize>,
        out: &mut Vec<WiredPath>,
        limit: usize,
    ) {
        if out.len() >= limit {
            return;
        }
        if u == target {
            out.push(WiredPath { arcs: arcs.clone() });
            return;
        }
        on[u] = true;
        for &a in w.out_arcs(u) {
            let v = w.arc(a).to;
            if m.is_active(a) && !on[v] {
                arcs.push(a);
                go(w, m, v, target, on, arcs, out, limit);
                arcs.pop();
            }
        }
        on[u] = false;
    }
    go(w, &m, w.transmit_index(i), target, &mut on, &mut arcs, &mut out, limit);
    out
}

/// Largest set of rings by exhaustive search, each ring valid on the graph
/// left by the rings before it. `None` when the path count explodes.
fn max_rings_exhaustive(w: &WiredGraph, mask: &EdgeMask) -> Option<Vec<Ring>> {
    const LIMIT: usize = 2000;
    let s = sorted_sources(w).ok()?;
    let ps = pairs(&s);
    let mut lists = Vec::new();
    for &(i, j, _) in &ps {
        let l = simple_paths(w, mask, i, j, LIMIT + 1);
        if l.len() > LIMIT {
            return None;
        }
        lists.push(l);
    }
    let mut cands = Vec::new();
    for a in &lists[0] {
        for b in &lists[1] {
            if !disjoint(w, a, b) {
                continue;
            }
            for c in &lists[2] {
                if disjoint(w, a, c) && disjoint(w, b, c) {
                    let mk = |k: usize, p: &WiredPath| RingPath {
                        i: ps[k].0,
                        j: ps[k].1,
                        path: p.clone(),
                    };
                    cands.push(Ring {
                        paths: [mk(0, a), mk(1, b), mk(2, c)],
                    });
                }
            }
        }
    }
    fn best(w: &WiredGraph, mask: &EdgeMask, cands: &[Ring], from: usize) -> Vec<Ring> {
        let mut top: Vec<Ring> = Vec::new();
        for k in from..cands.len() {
            let r = &cands[k];
            let alive = r.paths.iter().all(|rp| rp.path.arcs.iter().all(|&a| mask.is_active(a)));
            if !alive || !ring_is_valid(w, mask, r) {
                continue;
            }
            let mut m = mask.clone();
            for rp in &r.paths {
                remove_path(w, &mut m, &rp.path);
            }
            let mut rest = best(w, &m, cands, k + 1);
            if rest.len() + 1 > top.len() {
                rest.insert(0, r.clone());
                top = rest;
            }
        }
        top
    }
    Some(best(w, mask, &cands, 0))
}

/// Reverse a path arc by arc: each wireless arc turns into its twin and
/// broadcast arcs stay.
fn reversed(w: &WiredGraph, p: &WiredPath) -> WiredPath {
    let arcs = p
        .arcs
        .iter()
        .rev()
        .map(|&a| match w.arc(a).kind {
            ArcKind::Wireless { .. } => a ^ 1,
            ArcKind::Broadcast { .. } => a,
        })
        .collect();
    WiredPath { arcs }
}

/// Cheapest tree joining the three sources with its branch point at `c`:
/// arms from `c` to every other source that share no relay, found as a
/// min-cost flow out of `c'`. Cost is the number of wireless edges.
fn tree_at(w: &WiredGraph, mask: &EdgeMask, s: &[NodeId; 3], c: NodeId) -> Option<(i64, LineStar)> {
    let start = w.transmit_index(c);
    let targets: Vec<NodeId> = s.iter().copied().filter(|&x| x != c).collect();
    let n = w.nodes().len();
    let mut net = FlowNet::new(n + 1);
    let sink = n;
    let mut ids = Vec::new();
    for a in w.arcs() {
        if !mask.is_active(a.id) || a.to == w.receive_index(c) {
            continue;
        }
        if let WiredNode::Source(v) = w.nodes()[a.from] {
            if v != c {
                continue;
            }
        }
        let cost = match a.kind {
            ArcKind::Wireless { .. } => 1,
            ArcKind::Broadcast { .. } => 0,
        };
        ids.push((net.add_edge(a.from, a.to, 1, cost), a.id));
    }
    for &t in &targets {
        net.add_edge(w.receive_index(t), sink, 1, 0);
    }
    let want = targets.len() as i64;
    let (flow, cost) = net.min_cost_flow(start, sink, want, false);
    if flow < want {
        return None;
    }
    let mut used = vec![false; w.arcs().len()];
    for &(e, a) in &ids {
        if net.flow(e) > 0 {
            used[a] = true;
        }
    }
    // Follow each unit from c' to the source it ends at.
    let mut arms = Vec::new();
    for _ in 0..want {
        let mut u = start;
        let mut arcs = Vec::new();
        loop {
            let a = *w.out_arcs(u).iter().find(|&&a| used[a]).expect("flow is conserved");
            used[a] = false;
            arcs.push(a);
            u = w.arc(a).to;
            if matches!(w.nodes()[u], WiredNode::Source(_)) {
                break;
            }
        }
        arms.push(WiredPath { arcs });
    }
    arms.sort_by_key(|p| p.end(w));
    if arms.iter().map(|p| p.end(w)).collect::<Vec<_>>() != targets {
        return None;
    }
    let q = if targets.len() == 2 {
        LineStar {
            i: c,
            j: targets[0],
            l: targets[1],
            p_ij: arms[0].clone(),
            p_il: arms[1].clone(),
        }
    } else {
        let mut stem = reversed(w, &arms[0]);
        stem.arcs.push(w.broadcast_arc(c).expect("a relay center"));
        let join = |rest: &WiredPath| WiredPath {
            arcs: stem.arcs.iter().chain(&rest.arcs).copied().collect(),
        };
        LineStar {
            i: targets[0],
            j: targets[1],
            l: targets[2],
            p_ij: join(&arms[1]),
            p_il: join(&arms[2]),
        }
    };
    Some((cost, q))
}

/// Candidate line-stars on the remaining graph, at most one per branch
/// point. Relay branch points come first, since a tree centred on a source
/// spends two of that source's edges; then fewer edges, then lower id.
pub(super) fn tree_options(w: &WiredGraph, mask: &EdgeMask, s: &[NodeId; 3]) -> Vec<LineStar> {
    let mut opts: Vec<(bool, i64, NodeId, LineStar)> = Vec::new();
    for node in w.nodes() {
        let c = match *node {
            WiredNode::Source(v) => v,
            WiredNode::In(v) => match w.broadcast_arc(v) {
                Some(b) if mask.is_active(b) => v,
                _ => continue,
            },
            WiredNode::Out(_) => continue,
        };
        if let Some((cost, q)) = tree_at(w, mask, s, c) {
            opts.push((s.contains(&c), cost, c, q));
        }
    }
    opts.sort_by_key(|(src, cost, c, _)| (*src, *cost, *c));
    opts.into_iter().map(|(_, _, _, q)| q).collect()
}

/// Adds line-stars until `2|R| + |Q| >= h`. Each step takes the cheapest
/// tree over all branch points; when that greedy sequence gets stuck the
/// search backtracks over the next cheapest trees, within a fixed budget.
pub fn find_linestars(w: &WiredGraph, mask: &mut EdgeMask, h: u32, n_rings: usize) -> Result<Vec<LineStar>> {
    let s = sorted_sources(w)?;
    let need = (h as usize).saturating_sub(2 * n_rings);
    let mut budget = 400usize;
    let mut found = Vec::new();
    if search_linestars(w, mask, &s, need, &mut budget, &mut found) {
        for q in &found {
            remove_path(w, mask, &q.p_ij);
            remove_path(w, mask, &q.p_il);
        }
        return Ok(found);
    }
    Err(Error::Assertion(format!(
        "line-star search stuck: {n_rings} rings, need {need} line-stars for h = {h}"
    )))
}

fn search_linestars(
    w: &WiredGraph,
    mask: &EdgeMask,
    s: &[NodeId; 3],
    need: usize,
    budget: &mut usize,
    found: &mut Vec<LineStar>,
) -> bool {
    if need == 0 {
        return true;
    }
    // Every tree crosses each cut around a source, so what is left must
    // keep h >= need - 1. Trees that keep the most come first.
    let mut opts: Vec<(u32, usize, LineStar, EdgeMask)> = Vec::new();
    for (k, q) in tree_options(w, mask, s).into_iter().enumerate() {
        let mut m = without(w, mask, &q.p_ij);
        remove_path(w, &mut m, &q.p_il);
        let left = compute_metrics_masked(w, &m).h;
        if left as usize + 1 >= need {
            opts.push((left, k, q, m));
        }
    }
    opts.sort_by_key(|(left, k, _, _)| (std::cmp::Reverse(*left), *k));
    for (_, _, q, m) in opts {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        found.push(q);
        if search_linestars(w, &m, s, need - 1, budget, found) {
            return true;
        }
        found.pop();
    }
    false
}

pub fn decompose_multicast(g: &WirelessGraph, cfg: &DecomposeConfig) -> Result<MulticastDecomposition> {
    let w = split_relays(g);
    let s = sorted_sources(&w)?;
    let full = w.full_mask();
    let h = compute_metrics_masked(&w, &full).h;
    let mut exact = true;
    let mut mask = full.clone();
    let rings = match (g.edges().len() <= cfg.exact_ring_edges)
        .then(|| max_rings_exhaustive(&w, &mask))
        .flatten()
    {
        Some(r) => {
            for ring in &r {
                for rp in &ring.paths {
                    remove_path(&w, &mut mask, &rp.path);
                }
            }
            r
        }
        None => {
            exact = false;
            find_rings(&w, &mut mask, cfg, &mut exact)?
        }
    };
    let mut rings = rings;
    let linestars = match find_linestars(&w, &mut mask, h, rings.len()) {
        Ok(q) => q,
        Err(first) => {
            // Taking rings first left too little: search rings and
            // line-stars jointly, and failing that give rings back one at a
            // time, last first.
            exact = false;
            if let Some((r, q)) = pack_blocks(&w, &full, &s, h) {
                rings = r;
                mask = full.clone();
                for ring in &rings {
                    for rp in &ring.paths {
                        remove_path(&w, &mut mask, &rp.path);
                    }
                }
                for x in &q {
                    remove_path(&w, &mut mask, &x.p_ij);
                    remove_path(&w, &mut mask, &x.p_il);
                }
                q
            } else {
                loop {
                    if rings.is_empty() {
                        return Err(first);
                    }
                    rings.pop();
                    let mut m = full.clone();
                    for ring in &rings {
                        for rp in &ring.paths {
                            remove_path(&w, &mut m, &rp.path);
                        }
                    }
                    if let Ok(q) = find_linestars(&w, &mut m, h, rings.len()) {
                        mask = m;
                        break q;
                    }
                }
            }
        }
    };
    let mut blocks = Vec::new();
    for ring in &rings {
        for rp in &ring.paths {
            blocks.push(Block::line(blocks.len() as u32, BlockKind::Ring, &w, &rp.path));
        }
    }
    for q in &linestars {
        blocks.push(Block::tree(blocks.len() as u32, &w, s, &q.p_ij, &q.p_il));
    }
    let d = MulticastDecomposition {
        wired: w,
        sources: s,
        h,
        rings,
        linestars,
        leftover: mask,
        exact,
        blocks,
    };
    check_blocks_disjoint(&d.blocks)?;
    if d.rate_halves() < h {
        return Err(Error::Assertion(format!("2|R| + |Q| = {} < h = {h}", d.rate_halves())));
    }
    let min_deg = s.iter().map(|&v| g.degree(v)).min().unwrap_or(0);
    if d.rings.len() + d.linestars.len() > min_deg {
        return Err(Error::Assertion(format!(
            "|R| + |Q| = {} exceeds the smallest source degree {min_deg}",
            d.rings.len() + d.linestars.len()
        )));
    }
    Ok(d)
}

pub(crate) fn check_blocks_disjoint(blocks: &[Block]) -> Result<()> {
    for a in 0..blocks.len() {
        for b in a + 1..blocks.len() {
            if !blocks[a].edges.is_disjoint(&blocks[b].edges) || !blocks[a].relays.is_disjoint(&blocks[b].relays) {
                return Err(Error::Assertion(format!(
                    "blocks {} and {} share edges or relays",
                    blocks[a].id, blocks[b].id
                )));
            }
        }
    }
    Ok(())
}

