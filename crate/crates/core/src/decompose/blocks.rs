use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::graph::{NodeId, WiredGraph, WiredPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BlockKind {
    /// One line of a ring.
    Ring,
    LineStar,
    /// A unicast line.
    Line,
}

impl BlockKind {
    pub fn name(self) -> &'static str {
        match self {
            BlockKind::Ring => "ring",
            BlockKind::LineStar => "linestar",
            BlockKind::Line => "line",
        }
    }
}

/// One arm of a tree, leaving the center. `edges[k]` joins `nodes[k]` to the
/// node before it (the center for `k = 0`). The last node is the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeArm {
    pub origin: usize,
    pub nodes: Vec<NodeId>,
    pub edges: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlockShape {
    /// Nodes from end A to end B; `edges[k]` joins `nodes[k]` and `nodes[k+1]`.
    Line { nodes: Vec<NodeId>, edges: Vec<usize> },
    /// `arms[o]` leads to `sources[o]`; it is empty when the center is that
    /// source.
    Tree {
        sources: [NodeId; 3],
        center: NodeId,
        arms: Vec<TreeArm>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub id: u32,
    pub kind: BlockKind,
    pub shape: BlockShape,
    /// Every wireless edge claimed by the block, used or not.
    pub edges: BTreeSet<usize>,
    pub relays: BTreeSet<NodeId>,
}

impl Block {
    pub(crate) fn line(id: u32, kind: BlockKind, w: &WiredGraph, path: &WiredPath) -> Block {
        let (edges, relays) = path.footprint(w);
        Block {
            id,
            kind,
            shape: BlockShape::Line {
                nodes: path.wireless_nodes(w),
                edges: path.wireless_edges(w),
            },
            edges,
            relays,
        }
    }

    /// Tree from `P_ij` and `P_il`: all of `P_ij` plus the part of `P_il`
    /// after the last node it shares with `P_ij`. That node is the center.
    pub(crate) fn tree(id: u32, w: &WiredGraph, sources: [NodeId; 3], p_ij: &WiredPath, p_il: &WiredPath) -> Block {
        let nj = p_ij.wireless_nodes(w);
        let ej = p_ij.wireless_edges(w);
        let nl = p_il.wireless_nodes(w);
        let el = p_il.wireless_edges(w);
        let k = nl.iter().rposition(|x| nj.contains(x)).expect("paths share their start");
        let center = nl[k];
        let m = nj.iter().position(|&x| x == center).unwrap();
        let origin = |v: NodeId| sources.iter().position(|&s| s == v).unwrap();
        let mut arms: Vec<TreeArm> = (0..3)
            .map(|o| TreeArm {
                origin: o,
                nodes: Vec::new(),
                edges: Vec::new(),
            })
            .collect();
        // Back along P_ij to its start.
        let a = &mut arms[origin(nj[0])];
        for x in (0..m).rev() {
            a.nodes.push(nj[x]);
            a.edges.push(ej[x]);
        }
        let a = &mut arms[origin(*nj.last().unwrap())];
        for x in m + 1..nj.len() {
            a.nodes.push(nj[x]);
            a.edges.push(ej[x - 1]);
        }
        let a = &mut arms[origin(*nl.last().unwrap())];
        for x in k + 1..nl.len() {
            a.nodes.push(nl[x]);
            a.edges.push(el[x - 1]);
        }
        let (mut edges, mut relays) = p_ij.footprint(w);
        let (e2, r2) = p_il.footprint(w);
        edges.extend(e2);
        relays.extend(r2);
        Block {
            id,
            kind: BlockKind::LineStar,
            shape: BlockShape::Tree { sources, center, arms },
            edges,
            relays,
        }
    }

    /// Longest source-to-source distance inside the block, in hops.
    pub fn hops(&self) -> usize {
        match &self.shape {
            BlockShape::Line { edges, .. } => edges.len(),
            BlockShape::Tree { arms, .. } => {
                let mut best = 0;
                for a in 0..3 {
                    for b in a + 1..3 {
                        best = best.max(arms[a].nodes.len() + arms[b].nodes.len());
                    }
                }
                best
            }
        }
    }

    /// Wireless edges the codec actually transmits over.
    pub fn active_edges(&self) -> BTreeSet<usize> {
        match &self.shape {
            BlockShape::Line { edges, .. } => edges.iter().copied().collect(),
            BlockShape::Tree { arms, .. } => arms.iter().flat_map(|a| a.edges.iter().copied()).collect(),
        }
    }

    /// Relays that forward inside the block.
    pub fn active_relays(&self) -> Vec<NodeId> {
        match &self.shape {
            BlockShape::Line { nodes, .. } => nodes[1..nodes.len() - 1].to_vec(),
            BlockShape::Tree { sources, center, arms } => {
                let mut out: Vec<NodeId> = Vec::new();
                if !sources.contains(center) {
                    out.push(*center);
                }
                for a in arms {
                    if let Some((_, inner)) = a.nodes.split_last() {
                        out.extend(inner);
                    }
                }
                out
            }
        }
    }
}

/// One line per block: `block <id> type <kind> edges e1,e2,...`.
pub fn dump_blocks(blocks: &[Block]) -> String {
    let mut s = String::new();
    for b in blocks {
        let edges: Vec<String> = b.edges.iter().map(|e| e.to_string()).collect();
        writeln!(s, "block {} type {} edges {}", b.id, b.kind.name(), edges.join(",")).unwrap();
    }
    s
}
