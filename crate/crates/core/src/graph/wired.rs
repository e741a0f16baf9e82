use std::collections::BTreeSet;
use std::fmt;

use super::{NodeId, WirelessGraph};

/// A node of the split graph. Sources stay whole; a relay `r` becomes
/// `In(r)` (written `r`) and `Out(r)` (written `r'`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WiredNode {
    Source(NodeId),
    In(NodeId),
    Out(NodeId),
}

impl WiredNode {
    pub fn wireless(self) -> NodeId {
        match self {
            WiredNode::Source(v) | WiredNode::In(v) | WiredNode::Out(v) => v,
        }
    }
}

impl fmt::Display for WiredNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WiredNode::Source(v) | WiredNode::In(v) => write!(f, "{v}"),
            WiredNode::Out(v) => write!(f, "{v}'"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArcKind {
    /// One direction of wireless edge `edge`.
    Wireless { edge: usize },
    /// The unit arc `r -> r'` that carries everything relay `r` transmits.
    Broadcast { relay: NodeId },
}

/// A directed unit-capacity arc between wired node indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub id: usize,
    pub from: usize,
    pub to: usize,
    pub kind: ArcKind,
}

/// The directed graph produced by [`split_relays`].
///
/// Arc ids: wireless edge `k = {u, v}` gives arc `2k` = out(u) -> in(v) and
/// `2k + 1` = out(v) -> in(u); broadcast arcs follow in ascending relay order.
#[derive(Debug, Clone)]
pub struct WiredGraph {
    nodes: Vec<WiredNode>,
    arcs: Vec<Arc>,
    /// (receive index, transmit index) for every wireless node, 1-based.
    ends: Vec<(usize, usize)>,
    sources: Vec<NodeId>,
    broadcast_arc: Vec<Option<usize>>,
    out: Vec<Vec<usize>>,
}

/// Split every relay; see [`WiredGraph`] for the arc numbering.
pub fn split_relays(g: &WirelessGraph) -> WiredGraph {
    let n = g.node_count() as usize;
    let mut nodes = Vec::new();
    let mut ends = vec![(usize::MAX, usize::MAX); n + 1];
    for v in g.nodes() {
        if g.is_source(v) {
            ends[v as usize] = (nodes.len(), nodes.len());
            nodes.push(WiredNode::Source(v));
        } else {
            ends[v as usize] = (nodes.len(), nodes.len() + 1);
            nodes.push(WiredNode::In(v));
            nodes.push(WiredNode::Out(v));
        }
    }
    let mut arcs = Vec::new();
    for e in g.edges() {
        for (a, b) in [(e.u, e.v), (e.v, e.u)] {
            arcs.push(Arc {
                id: arcs.len(),
                from: ends[a as usize].1,
                to: ends[b as usize].0,
                kind: ArcKind::Wireless { edge: e.id },
            });
        }
    }
    let mut broadcast_arc = vec![None; n + 1];
    for r in g.relays() {
        let (i, o) = ends[r as usize];
        broadcast_arc[r as usize] = Some(arcs.len());
        arcs.push(Arc {
            id: arcs.len(),
            from: i,
            to: o,
            kind: ArcKind::Broadcast { relay: r },
        });
    }
    let mut out = vec![Vec::new(); nodes.len()];
    for a in &arcs {
        out[a.from].push(a.id);
    }
    WiredGraph {
        nodes,
        arcs,
        ends,
        sources: g.sources().to_vec(),
        broadcast_arc,
        out,
    }
}

impl WiredGraph {
    pub fn nodes(&self) -> &[WiredNode] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, id: usize) -> &Arc {
        &self.arcs[id]
    }

    pub fn sources(&self) -> &[NodeId] {
        &self.sources
    }

    /// Arcs leaving wired node `x`, ascending id.
    pub fn out_arcs(&self, x: usize) -> &[usize] {
        &self.out[x]
    }

    /// Wired index where arcs into wireless node `v` land.
    pub fn receive_index(&self, v: NodeId) -> usize {
        self.ends[v as usize].0
    }

    /// Wired index that arcs out of wireless node `v` leave from.
    pub fn transmit_index(&self, v: NodeId) -> usize {
        self.ends[v as usize].1
    }

    pub fn broadcast_arc(&self, relay: NodeId) -> Option<usize> {
        self.broadcast_arc.get(relay as usize).copied().flatten()
    }

    pub fn wireless_arcs(&self, edge: usize) -> [usize; 2] {
        [2 * edge, 2 * edge + 1]
    }

    pub fn full_mask(&self) -> EdgeMask {
        EdgeMask(vec![true; self.arcs.len()])
    }

    /// Text listing used by the `transform` subcommand.
    pub fn to_text(&self) -> String {
        let mut s = format!("wired nodes {} arcs {}\n", self.nodes.len(), self.arcs.len());
        for a in &self.arcs {
            let kind = match a.kind {
                ArcKind::Wireless { edge } => format!("wireless {edge}"),
                ArcKind::Broadcast { relay } => format!("broadcast {relay}"),
            };
            s.push_str(&format!(
                "arc {} {} {} {}\n",
                a.id, self.nodes[a.from], self.nodes[a.to], kind
            ));
        }
        s
    }
}

/// Which wired arcs are still available.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMask(pub Vec<bool>);

impl EdgeMask {
    pub fn is_active(&self, arc: usize) -> bool {
        self.0[arc]
    }

    pub fn active_count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Remove the footprint of some wireless edges and relays: both
    /// directions of each edge and the relay broadcast arcs.
    pub fn remove_footprint(&mut self, g: &WiredGraph, edges: &[usize], relays: &[NodeId]) {
        for &e in edges {
            for a in g.wireless_arcs(e) {
                self.0[a] = false;
            }
        }
        for &r in relays {
            if let Some(a) = g.broadcast_arc(r) {
                self.0[a] = false;
            }
        }
    }

    pub fn restore_footprint(&mut self, g: &WiredGraph, edges: &[usize], relays: &[NodeId]) {
        for &e in edges {
            for a in g.wireless_arcs(e) {
                self.0[a] = true;
            }
        }
        for &r in relays {
            if let Some(a) = g.broadcast_arc(r) {
                self.0[a] = true;
            }
        }
    }
}

/// A path in the wired graph, as arc ids in travel order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WiredPath {
    pub arcs: Vec<usize>,
}

impl WiredPath {
    /// Wireless hops, not counting broadcast arcs.
    pub fn wireless_hops(&self, g: &WiredGraph) -> usize {
        self.arcs
            .iter()
            .filter(|&&a| matches!(g.arc(a).kind, ArcKind::Wireless { .. }))
            .count()
    }

    /// Wireless edges used, in travel order.
    pub fn wireless_edges(&self, g: &WiredGraph) -> Vec<usize> {
        self.arcs
            .iter()
            .filter_map(|&a| match g.arc(a).kind {
                ArcKind::Wireless { edge } => Some(edge),
                ArcKind::Broadcast { .. } => None,
            })
            .collect()
    }

    /// Relays whose broadcast arc the path uses.
    pub fn relays(&self, g: &WiredGraph) -> Vec<NodeId> {
        self.arcs
            .iter()
            .filter_map(|&a| match g.arc(a).kind {
                ArcKind::Broadcast { relay } => Some(relay),
                ArcKind::Wireless { .. } => None,
            })
            .collect()
    }

    /// Wireless nodes visited, start to end.
    pub fn wireless_nodes(&self, g: &WiredGraph) -> Vec<NodeId> {
        let mut out = Vec::new();
        if let Some(&first) = self.arcs.first() {
            out.push(g.nodes()[g.arc(first).from].wireless());
        }
        for &a in &self.arcs {
            if let ArcKind::Wireless { .. } = g.arc(a).kind {
                out.push(g.nodes()[g.arc(a).to].wireless());
            }
        }
        out
    }

    pub fn start(&self, g: &WiredGraph) -> NodeId {
        g.nodes()[g.arc(self.arcs[0]).from].wireless()
    }

    pub fn end(&self, g: &WiredGraph) -> NodeId {
        g.nodes()[g.arc(*self.arcs.last().unwrap()).to].wireless()
    }

    /// The footprint as (wireless edges, relays), each sorted.
    pub fn footprint(&self, g: &WiredGraph) -> (BTreeSet<usize>, BTreeSet<NodeId>) {
        (
            self.wireless_edges(g).into_iter().collect(),
            self.relays(g).into_iter().collect(),
        )
    }
}
