//! Wireless graphs, the node-splitting transform and cut computations.
//!
//! A wireless graph is undirected; every relay broadcasts, so one
//! transmission reaches all of its neighbours. Splitting each relay `r` into
//! `r` (receive side) and `r'` (transmit side) joined by one unit arc turns
//! the broadcast constraint into an ordinary edge capacity, after which
//! min-cut and path packing are plain flow problems.

mod flow;
mod metrics;
mod wired;

pub use flow::{cancel_cycles, decompose_paths, FlowNet, INF};
pub use metrics::{
    brute_force_min_cut, compute_metrics, edge_disjoint_paths, min_cut, min_cut_masked,
    paths_masked, Metrics,
};
pub(crate) use metrics::compute_metrics_masked;
pub use wired::{split_relays, Arc, ArcKind, EdgeMask, WiredGraph, WiredNode, WiredPath};

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Node ids are 1-based, as in the text format.
pub type NodeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WirelessEdge {
    pub id: usize,
    pub u: NodeId,
    pub v: NodeId,
}

impl WirelessEdge {
    pub fn other(&self, x: NodeId) -> NodeId {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// An undirected wireless network with two or three sources. Parallel edges
/// are kept as separate edges with their own ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WirelessGraph {
    nodes: u32,
    sources: Vec<NodeId>,
    capacity: u32,
    edges: Vec<WirelessEdge>,
}

impl WirelessGraph {
    pub fn new(nodes: u32, sources: Vec<NodeId>, capacity: u32) -> Result<Self> {
        if !(2..=3).contains(&sources.len()) {
            return Err(Error::InvalidGraph(format!(
                "expected 2 or 3 sources, got {}",
                sources.len()
            )));
        }
        let distinct: BTreeSet<_> = sources.iter().collect();
        if distinct.len() != sources.len() {
            return Err(Error::InvalidGraph("duplicate source".into()));
        }
        if let Some(&s) = sources.iter().find(|&&s| s == 0 || s > nodes) {
            return Err(Error::InvalidGraph(format!("source {s} out of range")));
        }
        if capacity == 0 {
            return Err(Error::InvalidGraph("capacity must be positive".into()));
        }
        Ok(WirelessGraph {
            nodes,
            sources,
            capacity,
            edges: Vec::new(),
        })
    }

    /// Add `multiplicity` parallel copies of edge `{u, v}`.
    pub fn add_edge(&mut self, u: NodeId, v: NodeId, multiplicity: u32) -> Result<()> {
        for x in [u, v] {
            if x == 0 || x > self.nodes {
                return Err(Error::InvalidGraph(format!("node {x} out of range")));
            }
        }
        if u == v {
            return Err(Error::InvalidGraph(format!("self-loop on node {u}")));
        }
        for _ in 0..multiplicity {
            let id = self.edges.len();
            self.edges.push(WirelessEdge { id, u, v });
        }
        Ok(())
    }

    pub fn node_count(&self) -> u32 {
        self.nodes
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        1..=self.nodes
    }

    pub fn sources(&self) -> &[NodeId] {
        &self.sources
    }

    /// Replace the source list, keeping the edges.
    pub fn with_sources(&self, sources: Vec<NodeId>) -> Result<Self> {
        let mut g = WirelessGraph::new(self.nodes, sources, self.capacity)?;
        g.edges = self.edges.clone();
        Ok(g)
    }

    pub fn is_source(&self, v: NodeId) -> bool {
        self.sources.contains(&v)
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn edges(&self) -> &[WirelessEdge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &WirelessEdge {
        &self.edges[id]
    }

    /// Number of wireless edges at `v`, counting parallel copies.
    pub fn degree(&self, v: NodeId) -> usize {
        self.edges.iter().filter(|e| e.u == v || e.v == v).count()
    }

    pub fn relays(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes().filter(|v| !self.is_source(*v))
    }

    /// Parse the text format:
    ///
    /// ```text
    /// # comment
    /// nodes 5 sources 1,2,3 capacity 8
    /// edge 1 4
    /// edge 2 4 2
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut graph: Option<WirelessGraph> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line, msg };
            let tok: Vec<&str> = body.split_whitespace().collect();
            match tok[0] {
                "nodes" => {
                    if graph.is_some() {
                        return Err(err("duplicate header".into()));
                    }
                    if tok.len() != 6 || tok[2] != "sources" || tok[4] != "capacity" {
                        return Err(err(
                            "expected `nodes M sources a,b[,c] capacity C`".into(),
                        ));
                    }
                    let nodes = parse_num(tok[1], line)?;
                    let sources = tok[3]
                        .split(',')
                        .map(|s| parse_num(s, line))
                        .collect::<Result<Vec<_>>>()?;
                    let capacity = parse_num(tok[5], line)?;
                    graph = Some(
                        WirelessGraph::new(nodes, sources, capacity)
                            .map_err(|e| err(e.to_string()))?,
                    );
                }
                "edge" => {
                    let g = graph
                        .as_mut()
                        .ok_or_else(|| err("edge before header".into()))?;
                    if !(3..=4).contains(&tok.len()) {
                        return Err(err("expected `edge u v [multiplicity]`".into()));
                    }
                    let u = parse_num(tok[1], line)?;
                    let v = parse_num(tok[2], line)?;
                    let m = match tok.get(3) {
                        Some(t) => parse_num(t, line)?,
                        None => 1,
                    };
                    if m == 0 {
                        return Err(err("multiplicity must be positive".into()));
                    }
                    g.add_edge(u, v, m).map_err(|e| err(e.to_string()))?;
                }
                other => return Err(err(format!("unknown directive `{other}`"))),
            }
        }
        graph.ok_or(Error::Parse {
            line: 0,
            msg: "missing `nodes` header".into(),
        })
    }

    /// Serialize; parallel copies are written out one line each so edge ids
    /// survive a round trip.
    pub fn to_text(&self) -> String {
        let src: Vec<String> = self.sources.iter().map(|s| s.to_string()).collect();
        let mut out = format!(
            "nodes {} sources {} capacity {}\n",
            self.nodes,
            src.join(","),
            self.capacity
        );
        for e in &self.edges {
            let _ = writeln!(out, "edge {} {}", e.u, e.v);
        }
        out
    }
}

fn parse_num(s: &str, line: usize) -> Result<u32> {
    s.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("`{s}` is not a non-negative integer"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        let text = "# demo\nnodes 5 sources 1,2,3 capacity 8\nedge 1 4\nedge 2 4 2 # twice\nedge 5 3\n";
        let g = WirelessGraph::parse(text).unwrap();
        assert_eq!(g.edges().len(), 4);
        assert_eq!(g.degree(4), 3);
        assert_eq!(g.edges()[2].id, 2);
        let again = WirelessGraph::parse(&g.to_text()).unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn parse_errors_name_line() {
        let bad = "nodes 3 sources 1,2 capacity 8\nedge 1 1\n";
        match WirelessGraph::parse(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(WirelessGraph::parse("edge 1 2\n").is_err());
        assert!(WirelessGraph::parse("nodes 3 sources 1,1 capacity 8\n").is_err());
        assert!(WirelessGraph::parse("nodes 3 sources 1,2 capacity 8\nedge 1 9\n").is_err());
        assert!(WirelessGraph::parse("nodes 3 sources 1,2 capacity 8\nfoo\n").is_err());
    }
}
