//! Residual-network flow: Edmonds-Karp max-flow, successive-shortest-path
//! min-cost flow and deterministic path decomposition.

use std::collections::VecDeque;

use super::{WiredGraph, WiredPath};

/// A residual network. Edge `e` and `e ^ 1` are a forward/backward pair.
/// Adjacency is kept in insertion order, which makes every search
/// deterministic.
#[derive(Debug, Clone)]
pub struct FlowNet {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
    orig: Vec<i64>,
    cost: Vec<i64>,
}

pub const INF: i64 = i64::MAX / 4;

impl FlowNet {
    pub fn new(n: usize) -> Self {
        FlowNet {
            adj: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
            orig: Vec::new(),
            cost: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn add_node(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    /// Add `u -> v` and return the forward edge index.
    pub fn add_edge(&mut self, u: usize, v: usize, cap: i64, cost: i64) -> usize {
        let e = self.to.len();
        self.to.extend([v, u]);
        self.cap.extend([cap, 0]);
        self.orig.extend([cap, 0]);
        self.cost.extend([cost, -cost]);
        self.adj[u].push(e);
        self.adj[v].push(e + 1);
        e
    }

    /// Flow currently on forward edge `e`.
    pub fn flow(&self, e: usize) -> i64 {
        self.orig[e] - self.cap[e]
    }

    /// Edmonds-Karp; stops once `limit` units are routed.
    pub fn max_flow(&mut self, s: usize, t: usize, limit: i64) -> i64 {
        let mut total = 0;
        while total < limit {
            let mut prev = vec![usize::MAX; self.adj.len()];
            let mut seen = vec![false; self.adj.len()];
            seen[s] = true;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                if u == t {
                    break;
                }
                for &e in &self.adj[u] {
                    let v = self.to[e];
                    if self.cap[e] > 0 && !seen[v] {
                        seen[v] = true;
                        prev[v] = e;
                        q.push_back(v);
                    }
                }
            }
            if !seen[t] {
                break;
            }
            let mut push = limit - total;
            let mut v = t;
            while v != s {
                let e = prev[v];
                push = push.min(self.cap[e]);
                v = self.to[e ^ 1];
            }
            let mut v = t;
            while v != s {
                let e = prev[v];
                self.cap[e] -= push;
                self.cap[e ^ 1] += push;
                v = self.to[e ^ 1];
            }
            total += push;
        }
        total
    }

    /// Successive shortest paths with Bellman-Ford. Augments while the
    /// cheapest path costs less than zero (`negative_only`) or until `limit`
    /// units flow. Returns (flow, cost).
    pub fn min_cost_flow(&mut self, s: usize, t: usize, limit: i64, negative_only: bool) -> (i64, i64) {
        let n = self.adj.len();
        let (mut flow, mut cost) = (0, 0);
        while flow < limit {
            let mut dist = vec![INF; n];
            let mut prev = vec![usize::MAX; n];
            let mut in_q = vec![false; n];
            dist[s] = 0;
            let mut q = VecDeque::from([s]);
            in_q[s] = true;
            while let Some(u) = q.pop_front() {
                in_q[u] = false;
                for &e in &self.adj[u] {
                    let v = self.to[e];
                    if self.cap[e] > 0 && dist[u] + self.cost[e] < dist[v] {
                        dist[v] = dist[u] + self.cost[e];
                        prev[v] = e;
                        if !in_q[v] {
                            in_q[v] = true;
                            q.push_back(v);
                        }
                    }
                }
            }
            if dist[t] == INF || (negative_only && dist[t] >= 0) {
                break;
            }
            let mut push = limit - flow;
            let mut v = t;
            while v != s {
                let e = prev[v];
                push = push.min(self.cap[e]);
                v = self.to[e ^ 1];
            }
            let mut v = t;
            while v != s {
                let e = prev[v];
                self.cap[e] -= push;
                self.cap[e ^ 1] += push;
                v = self.to[e ^ 1];
            }
            flow += push;
            cost += push * dist[t];
        }
        (flow, cost)
    }
}

/// Remove directed cycles from a 0/1 flow (`used[arc]`) that avoid every
/// wired node in `protected`. Cycles are found by DFS from the lowest node
/// index along the lowest arc ids, so the result is deterministic.
pub fn cancel_cycles(g: &WiredGraph, used: &mut [bool], protected: &[usize]) {
    let n = g.nodes().len();
    let blocked = |x: usize| protected.contains(&x);
    'restart: loop {
        let mut state = vec![0u8; n];
        for root in 0..n {
            if state[root] != 0 || blocked(root) {
                continue;
            }
            // Iterative DFS holding (node, next out-arc position, arc taken to get here).
            let mut stack: Vec<(usize, usize, usize)> = vec![(root, 0, usize::MAX)];
            state[root] = 1;
            while let Some(&mut (u, ref mut pos, _)) = stack.last_mut() {
                let outs = g.out_arcs(u);
                let mut next = None;
                while *pos < outs.len() {
                    let a = outs[*pos];
                    *pos += 1;
                    if used[a] && !blocked(g.arc(a).to) {
                        next = Some(a);
                        break;
                    }
                }
                match next {
                    Some(a) => {
                        let v = g.arc(a).to;
                        if state[v] == 1 {
                            used[a] = false;
                            for &(x, _, via) in stack.iter().rev() {
                                if x == v {
                                    break;
                                }
                                used[via] = false;
                            }
                            continue 'restart;
                        }
                        if state[v] == 0 {
                            state[v] = 1;
                            stack.push((v, 0, a));
                        }
                    }
                    None => {
                        state[u] = 2;
                        stack.pop();
                    }
                }
            }
        }
        break;
    }
}

/// Split an acyclic 0/1 flow into paths. Paths start at nodes with more
/// outflow than inflow (ascending index) and follow the lowest unused arc;
/// a path stops at the first node that still has unabsorbed net inflow.
pub fn decompose_paths(g: &WiredGraph, used: &[bool]) -> Vec<WiredPath> {
    let n = g.nodes().len();
    let mut net = vec![0i64; n];
    for a in g.arcs() {
        if used[a.id] {
            net[a.from] -= 1;
            net[a.to] += 1;
        }
    }
    let mut left = used.to_vec();
    let mut paths = Vec::new();
    for start in 0..n {
        while net[start] < 0 {
            let mut arcs = Vec::new();
            let mut u = start;
            loop {
                if u != start && net[u] > 0 {
                    break;
                }
                let Some(&a) = g.out_arcs(u).iter().find(|&&a| left[a]) else {
                    break;
                };
                left[a] = false;
                arcs.push(a);
                u = g.arc(a).to;
            }
            if arcs.is_empty() {
                break;
            }
            net[start] += 1;
            net[u] -= 1;
            paths.push(WiredPath { arcs });
        }
    }
    paths
}
