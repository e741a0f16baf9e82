//! Unicast corner points and their combination with multicast.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{
    decompose_paths, min_cut_masked, paths_masked, split_relays, EdgeMask, NodeId, WiredGraph, WiredPath,
    WirelessGraph,
};

use super::binary_flow::{solve_binary_flow, BinaryFlowProblem, SolveRoute};
use super::blocks::{Block, BlockKind};
use super::rings::{check_blocks_disjoint, decompose_multicast, MulticastDecomposition};
use super::{pair_mask, pair_slot, sorted_sources, DecomposeConfig};

/// Disjoint line families for one unicast corner point.
#[derive(Debug, Clone)]
pub struct UnicastPlan {
    pub sources: [NodeId; 3],
    /// The requested anchor pair.
    pub anchor: (NodeId, NodeId),
    /// Roles after orienting the anchor so that `C_{i;j} = C_{i;j,l}`.
    pub i: NodeId,
    pub j: NodeId,
    pub l: NodeId,
    /// Lines per unordered pair, keyed `(min, max)`. Each line runs from
    /// `j`, the source both families share.
    pub families: BTreeMap<(NodeId, NodeId), Vec<WiredPath>>,
    /// Two-way rate per pair in units of C, indexed by [`pair_slot`].
    pub rates: [u32; 3],
    pub exact: bool,
    pub blocks: Vec<Block>,
}

fn key(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    (a.min(b), a.max(b))
}

fn plan_on(w: &WiredGraph, mask: &EdgeMask, anchor: (NodeId, NodeId), cfg: &DecomposeConfig) -> Result<UnicastPlan> {
    let s = sorted_sources(w)?;
    let (a, b) = anchor;
    if a == b || !s.contains(&a) || !s.contains(&b) {
        return Err(Error::Config(format!("anchor ({a},{b}) is not a pair of sources")));
    }
    let c = s.iter().copied().find(|&x| x != a && x != b).unwrap();
    let c_ab = min_cut_masked(w, mask, &[a], &[b]);
    let (i, j) = if c_ab == min_cut_masked(w, mask, &[a], &[b, c]) {
        (a, b)
    } else if c_ab == min_cut_masked(w, mask, &[b], &[a, c]) {
        (b, a)
    } else {
        return Err(Error::Assertion(format!(
            "C_{{{a};{b}}} = {c_ab} matches neither C_{{{a};{b},{c}}} nor C_{{{b};{a},{c}}}"
        )));
    };
    let l = c;
    let c_j = min_cut_masked(w, mask, &[j], &[i, l]);
    let p = BinaryFlowProblem::unicast(i, j, l, c_ab, c_j);
    let sol = solve_binary_flow(w, mask, &p, &cfg.solver)?;
    let mut families: BTreeMap<(NodeId, NodeId), Vec<WiredPath>> = BTreeMap::new();
    families.insert(key(i, j), Vec::new());
    families.insert(key(j, l), Vec::new());
    for path in decompose_paths(w, &sol.used) {
        let end = path.end(w);
        if end != i && end != l {
            return Err(Error::Assertion(format!("unicast line from {} ends at {end}", path.start(w))));
        }
        families.get_mut(&key(j, end)).unwrap().push(path);
    }
    let n_ij = families[&key(i, j)].len() as u32;
    let n_jl = families[&key(j, l)].len() as u32;
    let c_ijl = min_cut_masked(w, mask, &[i], &[j, l]);
    if n_ij != c_ijl || n_jl != c_j - c_ijl {
        return Err(Error::Assertion(format!(
            "line counts {n_ij}, {n_jl} do not match {c_ijl}, {}",
            c_j - c_ijl
        )));
    }
    let mut rates = [0u32; 3];
    rates[pair_slot(&s, i, j)] = n_ij;
    rates[pair_slot(&s, j, l)] = n_jl;
    let mut blocks = Vec::new();
    for fam in families.values() {
        for p in fam {
            blocks.push(Block::line(blocks.len() as u32, BlockKind::Line, w, p));
        }
    }
    check_blocks_disjoint(&blocks)?;
    Ok(UnicastPlan {
        sources: s,
        anchor,
        i,
        j,
        l,
        families,
        rates,
        exact: sol.route == SolveRoute::BranchAndBound,
        blocks,
    })
}

/// Corner point anchored at the pair `anchor`: that pair gets its full cut
/// `C_{i;j}` and the leftover capacity of the shared source goes to the
/// third source.
pub fn unicast_corner(g: &WirelessGraph, anchor: (NodeId, NodeId), cfg: &DecomposeConfig) -> Result<UnicastPlan> {
    let w = split_relays(g);
    let mask = w.full_mask();
    plan_on(&w, &mask, anchor, cfg)
}

#[derive(Debug, Clone)]
pub struct CombinedCorner {
    /// Multicast rate in units of C/2.
    pub multicast_halves: u32,
    /// Unicast two-way rates in units of C, indexed by pair slot.
    pub unicast: [u32; 3],
    pub multicast: Option<MulticastDecomposition>,
    pub unicast_plan: Option<UnicastPlan>,
    /// Extra lines between the two sources whose cut exceeds h, found on
    /// what the multicast blocks leave over.
    pub residual: Vec<WiredPath>,
    pub blocks: Vec<Block>,
    pub exact: bool,
}

/// The three pure-unicast corners followed by the multicast corner.
pub fn combined_corners(g: &WirelessGraph, cfg: &DecomposeConfig) -> Result<Vec<CombinedCorner>> {
    let w = split_relays(g);
    let s = sorted_sources(&w)?;
    let mut out = Vec::new();
    for (a, b) in [(s[0], s[1]), (s[0], s[2]), (s[1], s[2])] {
        let plan = plan_on(&w, &w.full_mask(), (a, b), cfg)?;
        out.push(CombinedCorner {
            multicast_halves: 0,
            unicast: plan.rates,
            blocks: plan.blocks.clone(),
            exact: plan.exact,
            multicast: None,
            unicast_plan: Some(plan),
            residual: Vec::new(),
        });
    }
    let d = decompose_multicast(g, cfg)?;
    let full = w.full_mask();
    let bottleneck = *s
        .iter()
        .min_by_key(|&&v| {
            let rest: Vec<NodeId> = s.iter().copied().filter(|&x| x != v).collect();
            (min_cut_masked(&w, &full, &[v], &rest), v)
        })
        .unwrap();
    let others: Vec<NodeId> = s.iter().copied().filter(|&x| x != bottleneck).collect();
    let (j, l) = (others[0], others[1]);
    let residual = paths_masked(&w, &pair_mask(&w, &d.leftover, j, l), &[j], &[l]);
    let mut unicast = [0u32; 3];
    unicast[pair_slot(&s, j, l)] = residual.len() as u32;
    let mut blocks = d.blocks.clone();
    for p in &residual {
        blocks.push(Block::line(blocks.len() as u32, BlockKind::Line, &w, p));
    }
    check_blocks_disjoint(&blocks)?;
    out.push(CombinedCorner {
        multicast_halves: d.rate_halves(),
        unicast,
        exact: d.exact,
        multicast: Some(d),
        unicast_plan: None,
        residual,
        blocks,
    });
    Ok(out)
}

/// Time sharing between corners. Weights must be nonnegative and sum to 1.
/// Returns (multicast rate, unicast rates) in units of C.
pub fn time_share(corners: &[CombinedCorner], weights: &[f64]) -> Result<(f64, [f64; 3])> {
    if corners.len() != weights.len() {
        return Err(Error::Config("one weight per corner".into()));
    }
    let total: f64 = weights.iter().sum();
    if weights.iter().any(|&x| x < 0.0) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::Config("weights must be nonnegative and sum to 1".into()));
    }
    let mut r = 0.0;
    let mut u = [0.0; 3];
    for (c, &x) in corners.iter().zip(weights) {
        r += x * f64::from(c.multicast_halves) / 2.0;
        for k in 0..3 {
            u[k] += x * f64::from(c.unicast[k]);
        }
    }
    Ok((r, u))
}

/// Two-source session: a largest set of disjoint lines between the sources.
pub fn two_way_lines(g: &WirelessGraph) -> Result<Vec<Block>> {
    let w = split_relays(g);
    let s = w.sources().to_vec();
    if s.len() != 2 {
        return Err(Error::InvalidGraph(format!("expected 2 sources, got {}", s.len())));
    }
    let blocks: Vec<Block> = paths_masked(&w, &w.full_mask(), &[s[0]], &[s[1]])
        .iter()
        .enumerate()
        .map(|(k, p)| Block::line(k as u32, BlockKind::Line, &w, p))
        .collect();
    check_blocks_disjoint(&blocks)?;
    Ok(blocks)
}
