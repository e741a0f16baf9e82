use std::collections::BTreeMap;

use super::flow::{cancel_cycles, decompose_paths, FlowNet, INF};
use super::{split_relays, EdgeMask, NodeId, WiredGraph, WiredPath, WirelessGraph};

/// Build the residual network for `mask` with a supersource feeding `from`
/// and a supersink draining `to`. Returns the net, (s, t) and the forward
/// edge index of every wired arc (`usize::MAX` when masked out).
fn build(w: &WiredGraph, mask: &EdgeMask, from: &[NodeId], to: &[NodeId]) -> (FlowNet, usize, usize, Vec<usize>) {
    let n = w.nodes().len();
    let mut net = FlowNet::new(n + 2);
    let (s, t) = (n, n + 1);
    let mut fwd = vec![usize::MAX; w.arcs().len()];
    for a in w.arcs() {
        if mask.is_active(a.id) {
            fwd[a.id] = net.add_edge(a.from, a.to, 1, 0);
        }
    }
    for &v in from {
        net.add_edge(s, w.transmit_index(v), INF, 0);
    }
    for &v in to {
        net.add_edge(w.receive_index(v), t, INF, 0);
    }
    (net, s, t, fwd)
}

/// Min cut in units of C between node sets, over the arcs left in `mask`.
pub fn min_cut_masked(w: &WiredGraph, mask: &EdgeMask, from: &[NodeId], to: &[NodeId]) -> u32 {
    let (mut net, s, t, _) = build(w, mask, from, to);
    net.max_flow(s, t, INF) as u32
}

/// A maximum packing of arc-disjoint paths from `from` to `to`, cycles
/// cancelled and decomposed by ascending arc id.
pub fn paths_masked(w: &WiredGraph, mask: &EdgeMask, from: &[NodeId], to: &[NodeId]) -> Vec<WiredPath> {
    let (mut net, s, t, fwd) = build(w, mask, from, to);
    net.max_flow(s, t, INF);
    let mut used: Vec<bool> = fwd
        .iter()
        .map(|&e| e != usize::MAX && net.flow(e) > 0)
        .collect();
    cancel_cycles(w, &mut used, &[]);
    decompose_paths(w, &used)
}

/// `C_{from;to}`: min cut between two sets of wireless nodes, in units of C.
pub fn min_cut(g: &WirelessGraph, from: &[NodeId], to: &[NodeId]) -> u32 {
    let w = split_relays(g);
    min_cut_masked(&w, &w.full_mask(), from, to)
}

/// Maximum set of edge-disjoint wired paths from `from` to `to`.
pub fn edge_disjoint_paths(g: &WirelessGraph, from: NodeId, to: NodeId) -> Vec<WiredPath> {
    let w = split_relays(g);
    paths_masked(&w, &w.full_mask(), &[from], &[to])
}

/// Reference min cut by enumerating every vertex set that contains `from`
/// and avoids `to`. Exponential; meant for small test graphs.
pub fn brute_force_min_cut(w: &WiredGraph, mask: &EdgeMask, from: &[NodeId], to: &[NodeId]) -> u32 {
    let n = w.nodes().len();
    let fixed_in: Vec<usize> = from.iter().map(|&v| w.transmit_index(v)).collect();
    let fixed_out: Vec<usize> = to.iter().map(|&v| w.receive_index(v)).collect();
    // Sources are single wired nodes, so the free set excludes both lists.
    let free: Vec<usize> = (0..n)
        .filter(|x| !fixed_in.contains(x) && !fixed_out.contains(x))
        .collect();
    assert!(free.len() <= 24, "brute force cut on {} free nodes", free.len());
    let mut best = u32::MAX;
    for bits in 0u32..(1 << free.len()) {
        let mut side = vec![false; n];
        for &x in &fixed_in {
            side[x] = true;
        }
        for (k, &x) in free.iter().enumerate() {
            side[x] = bits >> k & 1 == 1;
        }
        let cut = w
            .arcs()
            .iter()
            .filter(|a| mask.is_active(a.id) && side[a.from] && !side[a.to])
            .count() as u32;
        best = best.min(cut);
    }
    best
}

/// Cut values between the sources.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metrics {
    /// `C_{i;j}` for every ordered pair of distinct sources.
    pub pair: BTreeMap<(NodeId, NodeId), u32>,
    /// `C_{i;S\i}` for every source `i`.
    pub to_rest: BTreeMap<NodeId, u32>,
    /// `min_i C_{i;S\i}`.
    pub h: u32,
}

impl Metrics {
    pub fn pair(&self, i: NodeId, j: NodeId) -> u32 {
        self.pair[&(i, j)]
    }

    pub fn to_rest(&self, i: NodeId) -> u32 {
        self.to_rest[&i]
    }
}

pub fn compute_metrics(g: &WirelessGraph) -> Metrics {
    let w = split_relays(g);
    compute_metrics_masked(&w, &w.full_mask())
}

pub(crate) fn compute_metrics_masked(w: &WiredGraph, mask: &EdgeMask) -> Metrics {
    let src = w.sources().to_vec();
    let mut pair = BTreeMap::new();
    for &i in &src {
        for &j in &src {
            if i != j {
                pair.insert((i, j), min_cut_masked(w, mask, &[i], &[j]));
            }
        }
    }
    let mut to_rest = BTreeMap::new();
    for &i in &src {
        let rest: Vec<NodeId> = src.iter().copied().filter(|&x| x != i).collect();
        to_rest.insert(i, min_cut_masked(w, mask, &[i], &rest));
    }
    let h = to_rest.values().copied().min().unwrap_or(0);
    Metrics { pair, to_rest, h }
}
