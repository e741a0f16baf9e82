//! Decomposition of a three-source network into coding blocks.
//!
//! Multicast uses rings (three edge-disjoint source-to-source lines) and
//! line-stars (trees joining the three sources). Unicast corner points use
//! families of disjoint lines. Every search runs on the split graph and
//! reports blocks as wireless edges.

pub mod binary_flow;
mod blocks;
mod packing;
mod rings;
mod unicast;

pub use binary_flow::{
    check_solution, enumerate_binary_flow, solve_binary_flow, BinaryFlowProblem,
    BinaryFlowSolution, Constraint, ProblemKind, SolveRoute, SolverConfig, Var,
};
pub use blocks::{dump_blocks, Block, BlockKind, BlockShape, TreeArm};
pub use rings::{
    decompose_multicast, find_linestars, find_rings, ring_is_valid, LineStar, MulticastDecomposition, Ring,
    RingPath,
};
pub use unicast::{combined_corners, time_share, two_way_lines, unicast_corner, CombinedCorner, UnicastPlan};

use crate::graph::{EdgeMask, NodeId, WiredGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecomposeConfig {
    pub solver: SolverConfig,
    /// Graphs with at most this many wireless edges get an exhaustive
    /// search for the largest ring set.
    pub exact_ring_edges: usize,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        DecomposeConfig {
            solver: SolverConfig::default(),
            exact_ring_edges: 9,
        }
    }
}

/// Position of an unordered source pair: (s0,s1) -> 0, (s0,s2) -> 1,
/// (s1,s2) -> 2, with sources sorted by id.
pub fn pair_slot(sources: &[NodeId; 3], a: NodeId, b: NodeId) -> usize {
    let ia = sources.iter().position(|&s| s == a).expect("source");
    let ib = sources.iter().position(|&s| s == b).expect("source");
    match (ia.min(ib), ia.max(ib)) {
        (0, 1) => 0,
        (0, 2) => 1,
        _ => 2,
    }
}

pub(crate) fn sorted_sources(w: &WiredGraph) -> crate::Result<[NodeId; 3]> {
    let mut s: Vec<NodeId> = w.sources().to_vec();
    if s.len() != 3 {
        return Err(crate::Error::Config(format!(
            "decomposition needs 3 sources, got {}",
            s.len()
        )));
    }
    s.sort_unstable();
    Ok([s[0], s[1], s[2]])
}

/// `mask` restricted to paths that leave `from`, end at `to` and never
/// pass through another source.
pub(crate) fn pair_mask(w: &WiredGraph, mask: &EdgeMask, from: NodeId, to: NodeId) -> EdgeMask {
    let mut m = mask.clone();
    let (tx_from, rx_to) = (w.transmit_index(from), w.receive_index(to));
    for a in w.arcs() {
        let touches_other = w.sources().iter().any(|&s| {
            s != from && s != to && (a.from == w.transmit_index(s) || a.to == w.receive_index(s))
        });
        if touches_other || a.to == tx_from || a.from == rx_to {
            m.0[a.id] = false;
        }
    }
    m
}
