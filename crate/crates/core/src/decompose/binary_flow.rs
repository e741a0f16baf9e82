//! 0/1 flow problems on the split graph.
//!
//! Two problem families drive the decomposition:
//!
//! * ring search between sources `i` and `j` with third source `l`:
//!   `I_l = C_{l;i,j}`, `I_i = 0`, `O_l = 0`, `O_i + O_j = I_j + I_l`, flow
//!   conservation at relays, maximise `I_j - O_j`;
//! * the unicast corner:
//!   `I_j = 0`, `I_i = C_{i;j}`, `I_l - O_l = C_{j;i,l} - C_{i;j}`,
//!   `O_j = C_{j;i,l}`, `O_i = 0`, conservation, minimise total flow.
//!
//! `I_m` and `O_m` are the flow into and out of source `m`. Up to an arc
//! budget the problem is solved by depth-first branch-and-bound over the
//! arc variables with bound propagation on every constraint. Above the
//! budget it is solved through a min-cost-flow relaxation whose integral
//! solution is checked against every constraint.

use crate::error::{Error, Result};
use crate::graph::{EdgeMask, FlowNet, NodeId, WiredGraph, WiredNode, INF};

/// A source-side quantity appearing in a constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    In(NodeId),
    Out(NodeId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub name: &'static str,
    pub terms: Vec<(Var, i64)>,
    pub rhs: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Ring { i: NodeId, j: NodeId, l: NodeId },
    Unicast { i: NodeId, j: NodeId, l: NodeId },
}

/// Equality constraints over source in/out flows, conservation at every
/// relay, and a linear objective.
#[derive(Debug, Clone)]
pub struct BinaryFlowProblem {
    pub kind: ProblemKind,
    pub constraints: Vec<Constraint>,
    /// Objective to maximise over source flows; `total_flow_weight` adds
    /// that weight times the number of arcs used.
    pub objective: Vec<(Var, i64)>,
    pub total_flow_weight: i64,
}

impl BinaryFlowProblem {
    /// Ring search for pair (i, j) given `c_l = C_{l;i,j}`.
    pub fn ring(i: NodeId, j: NodeId, l: NodeId, c_l: u32) -> Self {
        use Var::*;
        BinaryFlowProblem {
            kind: ProblemKind::Ring { i, j, l },
            constraints: vec![
                Constraint { name: "I_l = C_{l;i,j}", terms: vec![(In(l), 1)], rhs: i64::from(c_l) },
                Constraint { name: "I_i = 0", terms: vec![(In(i), 1)], rhs: 0 },
                Constraint { name: "O_l = 0", terms: vec![(Out(l), 1)], rhs: 0 },
                Constraint {
                    name: "O_i + O_j = I_j + I_l",
                    terms: vec![(Out(i), 1), (Out(j), 1), (In(j), -1), (In(l), -1)],
                    rhs: 0,
                },
            ],
            objective: vec![(In(j), 1), (Out(j), -1)],
            total_flow_weight: 0,
        }
    }

    /// Unicast corner with `c_ij = C_{i;j}` and `c_j = C_{j;i,l}`.
    pub fn unicast(i: NodeId, j: NodeId, l: NodeId, c_ij: u32, c_j: u32) -> Self {
        use Var::*;
        let (c_ij, c_j) = (i64::from(c_ij), i64::from(c_j));
        BinaryFlowProblem {
            kind: ProblemKind::Unicast { i, j, l },
            constraints: vec![
                Constraint { name: "I_j = 0", terms: vec![(In(j), 1)], rhs: 0 },
                Constraint { name: "I_i = C_{i;j}", terms: vec![(In(i), 1)], rhs: c_ij },
                Constraint {
                    name: "I_l - O_l = C_{j;i,l} - C_{i;j}",
                    terms: vec![(In(l), 1), (Out(l), -1)],
                    rhs: c_j - c_ij,
                },
                Constraint { name: "O_j = C_{j;i,l}", terms: vec![(Out(j), 1)], rhs: c_j },
                Constraint { name: "O_i = 0", terms: vec![(Out(i), 1)], rhs: 0 },
            ],
            objective: Vec::new(),
            total_flow_weight: -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveRoute {
    BranchAndBound,
    Relaxation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryFlowSolution {
    /// `used[arc]` over every wired arc; masked arcs are always false.
    pub used: Vec<bool>,
    pub objective: i64,
    pub route: SolveRoute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    /// Largest number of active arcs solved by branch-and-bound.
    pub exact_arc_budget: usize,
    /// Search-node limit for branch-and-bound before giving up on it.
    pub node_limit: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            exact_arc_budget: 64,
            node_limit: 20_000_000,
        }
    }
}

/// Coefficient rows over arc variables, one per constraint plus one per
/// relay-side wired node for conservation.
struct Rows {
    rows: Vec<Vec<(usize, i64)>>,
    rhs: Vec<i64>,
    names: Vec<String>,
    objective: Vec<i64>,
}

fn var_arcs(w: &WiredGraph, mask: &EdgeMask, v: Var) -> Vec<usize> {
    w.arcs()
        .iter()
        .filter(|a| mask.is_active(a.id))
        .filter(|a| match v {
            Var::In(s) => a.to == w.receive_index(s),
            Var::Out(s) => a.from == w.transmit_index(s),
        })
        .map(|a| a.id)
        .collect()
}

fn build_rows(w: &WiredGraph, mask: &EdgeMask, p: &BinaryFlowProblem) -> Rows {
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut names = Vec::new();
    for c in &p.constraints {
        let mut row: Vec<(usize, i64)> = Vec::new();
        for &(v, k) in &c.terms {
            for a in var_arcs(w, mask, v) {
                match row.iter_mut().find(|(x, _)| *x == a) {
                    Some(e) => e.1 += k,
                    None => row.push((a, k)),
                }
            }
        }
        row.retain(|&(_, k)| k != 0);
        rows.push(row);
        rhs.push(c.rhs);
        names.push(c.name.to_string());
    }
    for (x, node) in w.nodes().iter().enumerate() {
        if matches!(node, WiredNode::Source(_)) {
            continue;
        }
        let mut row = Vec::new();
        for a in w.arcs().iter().filter(|a| mask.is_active(a.id)) {
            if a.to == x {
                row.push((a.id, 1));
            }
            if a.from == x {
                row.push((a.id, -1));
            }
        }
        if !row.is_empty() {
            rows.push(row);
            rhs.push(0);
            names.push(format!("conservation at {node}"));
        }
    }
    let mut objective = vec![0i64; w.arcs().len()];
    for &(v, k) in &p.objective {
        for a in var_arcs(w, mask, v) {
            objective[a] += k;
        }
    }
    for a in w.arcs().iter().filter(|a| mask.is_active(a.id)) {
        objective[a.id] += p.total_flow_weight;
    }
    Rows { rows, rhs, names, objective }
}

/// Check a 0/1 assignment against every constraint; returns the first
/// violated constraint's name.
pub fn check_solution(w: &WiredGraph, mask: &EdgeMask, p: &BinaryFlowProblem, used: &[bool]) -> std::result::Result<i64, String> {
    let r = build_rows(w, mask, p);
    for a in w.arcs() {
        if used[a.id] && !mask.is_active(a.id) {
            return Err(format!("masked arc {} used", a.id));
        }
    }
    for (k, row) in r.rows.iter().enumerate() {
        let s: i64 = row.iter().filter(|(a, _)| used[*a]).map(|(_, c)| c).sum();
        if s != r.rhs[k] {
            return Err(r.names[k].clone());
        }
    }
    Ok((0..used.len()).filter(|&a| used[a]).map(|a| r.objective[a]).sum())
}

pub fn solve_binary_flow(w: &WiredGraph, mask: &EdgeMask, p: &BinaryFlowProblem, cfg: &SolverConfig) -> Result<BinaryFlowSolution> {
    if mask.active_count() <= cfg.exact_arc_budget {
        if let Some(sol) = branch_and_bound(w, mask, p, cfg.node_limit)? {
            return Ok(sol);
        }
    }
    relaxation(w, mask, p)
}

/// Exhaustive enumeration, for cross-checking on tiny graphs.
pub fn enumerate_binary_flow(w: &WiredGraph, mask: &EdgeMask, p: &BinaryFlowProblem) -> Option<(i64, Vec<bool>)> {
    let active: Vec<usize> = (0..w.arcs().len()).filter(|&a| mask.is_active(a)).collect();
    assert!(active.len() <= 20, "enumeration over {} arcs", active.len());
    let r = build_rows(w, mask, p);
    let pos = |a: usize| active.iter().position(|&x| x == a).unwrap();
    let rows: Vec<Vec<(usize, i64)>> = r
        .rows
        .iter()
        .map(|row| row.iter().map(|&(a, c)| (pos(a), c)).collect())
        .collect();
    let mut best: Option<(i64, u32)> = None;
    for bits in 0u32..(1 << active.len()) {
        let ok = rows.iter().zip(&r.rhs).all(|(row, &rhs)| {
            row.iter().filter(|(k, _)| bits >> k & 1 == 1).map(|(_, c)| c).sum::<i64>() == rhs
        });
        if !ok {
            continue;
        }
        let obj: i64 = (0..active.len())
            .filter(|k| bits >> k & 1 == 1)
            .map(|k| r.objective[active[k]])
            .sum();
        if best.is_none_or(|(b, _)| obj > b) {
            best = Some((obj, bits));
        }
    }
    best.map(|(obj, bits)| {
        let mut used = vec![false; w.arcs().len()];
        for (k, &a) in active.iter().enumerate() {
            used[a] = bits >> k & 1 == 1;
        }
        (obj, used)
    })
}

struct Search<'a> {
    rows: &'a Rows,
    by_var: Vec<Vec<(usize, i64)>>,
    order: Vec<usize>,
    value: Vec<i8>,
    fixed: Vec<i64>,
    pos_free: Vec<i64>,
    neg_free: Vec<i64>,
    obj_fixed: i64,
    obj_free_pos: i64,
    trail: Vec<usize>,
    best: Option<(i64, Vec<i8>)>,
    nodes: u64,
    limit: u64,
}

impl Search<'_> {
    fn set(&mut self, a: usize, v: i8) {
        self.value[a] = v;
        self.trail.push(a);
        for &(r, c) in &self.by_var[a] {
            if c > 0 {
                self.pos_free[r] -= c;
            } else {
                self.neg_free[r] -= c;
            }
            self.fixed[r] += c * i64::from(v);
        }
        let o = self.rows.objective[a];
        if o > 0 {
            self.obj_free_pos -= o;
        }
        self.obj_fixed += o * i64::from(v);
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let a = self.trail.pop().unwrap();
            let v = self.value[a];
            for &(r, c) in &self.by_var[a] {
                if c > 0 {
                    self.pos_free[r] += c;
                } else {
                    self.neg_free[r] += c;
                }
                self.fixed[r] -= c * i64::from(v);
            }
            let o = self.rows.objective[a];
            if o > 0 {
                self.obj_free_pos += o;
            }
            self.obj_fixed -= o * i64::from(v);
            self.value[a] = -1;
        }
    }

    /// Tighten rows until nothing changes; false on a conflict.
    fn propagate(&mut self, mut queue: Vec<usize>) -> bool {
        while let Some(r) = queue.pop() {
            let lo = self.fixed[r] + self.neg_free[r];
            let hi = self.fixed[r] + self.pos_free[r];
            let rhs = self.rows.rhs[r];
            if rhs < lo || rhs > hi {
                return false;
            }
            if lo == hi {
                continue;
            }
            if rhs == lo || rhs == hi {
                let at_lo = rhs == lo;
                let free: Vec<(usize, i64)> = self.rows.rows[r]
                    .iter()
                    .copied()
                    .filter(|&(a, _)| self.value[a] < 0)
                    .collect();
                for (a, c) in free {
                    // At the low end positive coefficients go to 0 and
                    // negative ones to 1; the high end is the mirror image.
                    let v = if (c > 0) == at_lo { 0 } else { 1 };
                    self.set(a, v);
                    queue.extend(self.by_var[a].iter().map(|&(rr, _)| rr));
                }
            }
        }
        true
    }

    fn dfs(&mut self, depth: usize) -> bool {
        self.nodes += 1;
        if self.nodes > self.limit {
            return false;
        }
        if let Some((b, _)) = &self.best {
            if self.obj_fixed + self.obj_free_pos <= *b {
                return true;
            }
        }
        let mut d = depth;
        while d < self.order.len() && self.value[self.order[d]] >= 0 {
            d += 1;
        }
        if d == self.order.len() {
            let ok = (0..self.rows.rows.len()).all(|r| self.fixed[r] == self.rows.rhs[r]);
            if ok && self.best.as_ref().is_none_or(|(b, _)| self.obj_fixed > *b) {
                self.best = Some((self.obj_fixed, self.value.clone()));
            }
            return true;
        }
        let a = self.order[d];
        for v in [1i8, 0] {
            let mark = self.trail.len();
            self.set(a, v);
            let rows: Vec<usize> = self.by_var[a].iter().map(|&(r, _)| r).collect();
            if self.propagate(rows) && !self.dfs(d + 1) {
                self.undo_to(mark);
                return false;
            }
            self.undo_to(mark);
        }
        true
    }
}

/// `Ok(None)` when the node limit was hit; `Err` when infeasible.
fn branch_and_bound(w: &WiredGraph, mask: &EdgeMask, p: &BinaryFlowProblem, limit: u64) -> Result<Option<BinaryFlowSolution>> {
    let rows = build_rows(w, mask, p);
    let n = w.arcs().len();
    let mut by_var = vec![Vec::new(); n];
    for (r, row) in rows.rows.iter().enumerate() {
        for &(a, c) in row {
            by_var[a].push((r, c));
        }
    }
    // Branch outward from the sources: arcs sorted by BFS depth from them.
    let mut depth = vec![usize::MAX; w.nodes().len()];
    let mut q = std::collections::VecDeque::new();
    for &s in w.sources() {
        depth[w.transmit_index(s)] = 0;
        q.push_back(w.transmit_index(s));
    }
    while let Some(x) = q.pop_front() {
        for &a in w.out_arcs(x) {
            let y = w.arc(a).to;
            if mask.is_active(a) && depth[y] == usize::MAX {
                depth[y] = depth[x] + 1;
                q.push_back(y);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).filter(|&a| mask.is_active(a)).collect();
    order.sort_by_key(|&a| (depth[w.arc(a).from], a));
    let mut value = vec![-1i8; n];
    for (a, v) in value.iter_mut().enumerate() {
        if !mask.is_active(a) {
            *v = 0;
        }
    }
    let m = rows.rows.len();
    let mut s = Search {
        rows: &rows,
        by_var,
        order,
        value,
        fixed: vec![0; m],
        pos_free: vec![0; m],
        neg_free: vec![0; m],
        obj_fixed: 0,
        obj_free_pos: 0,
        trail: Vec::new(),
        best: None,
        nodes: 0,
        limit,
    };
    for (r, row) in rows.rows.iter().enumerate() {
        for &(_, c) in row {
            if c > 0 {
                s.pos_free[r] += c;
            } else {
                s.neg_free[r] += c;
            }
        }
    }
    s.obj_free_pos = (0..n)
        .filter(|&a| mask.is_active(a) && rows.objective[a] > 0)
        .map(|a| rows.objective[a])
        .sum();
    let complete = s.propagate((0..m).collect()) && s.dfs(0);
    if !complete && s.nodes > s.limit {
        return Ok(None);
    }
    match s.best {
        Some((obj, value)) => Ok(Some(BinaryFlowSolution {
            used: value.iter().map(|&v| v == 1).collect(),
            objective: obj,
            route: SolveRoute::BranchAndBound,
        })),
        None => Err(Error::Infeasible(format!("{:?} has no 0/1 flow", p.kind))),
    }
}

/// Min-cost-flow relaxation. Both problem families are single-commodity
/// flows, so the relaxation has an integral optimum; the result is still
/// checked against every constraint before it is returned.
fn relaxation(w: &WiredGraph, mask: &EdgeMask, p: &BinaryFlowProblem) -> Result<BinaryFlowSolution> {
    let n = w.nodes().len();
    let mut net = FlowNet::new(n + 2);
    let (s, t) = (n, n + 1);
    let arcs_active = mask.active_count() as i64 + 1;
    let mut fwd = vec![usize::MAX; w.arcs().len()];
    let (blocked_in, blocked_out, plan): (NodeId, NodeId, Box<dyn Fn(&mut FlowNet)>) = match p.kind {
        ProblemKind::Ring { i, j, l } => {
            let c_l = p.constraints[0].rhs;
            let (ri, rj, rl) = (w.transmit_index(i), w.receive_index(j), w.receive_index(l));
            let big_i = arcs_active;
            let big_l = arcs_active * (arcs_active + 1);
            (
                i,
                l,
                Box::new(move |net: &mut FlowNet| {
                    net.add_edge(s, ri, INF, -big_i);
                    net.add_edge(s, rj, INF, 0);
                    net.add_edge(rj, t, INF, 0);
                    net.add_edge(rl, t, c_l, -big_l);
                }),
            )
        }
        ProblemKind::Unicast { i, j, l } => {
            let c_ij = p.constraints[1].rhs;
            let c_j = p.constraints[3].rhs;
            let (ri, rj, rl) = (w.receive_index(i), w.transmit_index(j), w.receive_index(l));
            (
                j,
                i,
                Box::new(move |net: &mut FlowNet| {
                    net.add_edge(s, rj, c_j, 0);
                    net.add_edge(ri, t, c_ij, 0);
                    net.add_edge(rl, t, c_j - c_ij, 0);
                }),
            )
        }
    };
    for a in w.arcs() {
        if !mask.is_active(a.id) {
            continue;
        }
        if a.to == w.receive_index(blocked_in) || a.from == w.transmit_index(blocked_out) {
            continue;
        }
        fwd[a.id] = net.add_edge(a.from, a.to, 1, 1);
    }
    plan(&mut net);
    match p.kind {
        ProblemKind::Ring { .. } => {
            net.min_cost_flow(s, t, INF, true);
        }
        ProblemKind::Unicast { .. } => {
            net.min_cost_flow(s, t, p.constraints[3].rhs, false);
        }
    }
    let used: Vec<bool> = fwd
        .iter()
        .map(|&e| e != usize::MAX && net.flow(e) > 0)
        .collect();
    match check_solution(w, mask, p, &used) {
        Ok(objective) => Ok(BinaryFlowSolution {
            used,
            objective,
            route: SolveRoute::Relaxation,
        }),
        Err(name) => Err(Error::Infeasible(format!(
            "{:?}: relaxation violates {name}",
            p.kind
        ))),
    }
}
