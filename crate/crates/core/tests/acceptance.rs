//! End-to-end acceptance run. Each criterion is checked against oracles
//! built here from first principles (enumeration, closed forms written out
//! by hand, brute-force cuts), and one PASS/FAIL line is printed per
//! criterion.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rtnc_core::codec::sync::{run_sync_line, run_sync_linestar, run_sync_star, MessageTable, Sym};
use rtnc_core::codec::header::index_bits;
use rtnc_core::codec::{header_width, pack_header, Header, HeaderKind, LineCoeffs, LineHeader, StarHeader};
use rtnc_core::decompose::{
    combined_corners, decompose_multicast, dump_blocks, find_linestars, find_rings, ring_is_valid, unicast_corner,
    Block, BlockKind, DecomposeConfig,
};
use rtnc_core::experiment::{run_experiment, steady_state_tx, ExperimentOutput, ExperimentSpec, Session};
use rtnc_core::graph::{brute_force_min_cut, split_relays, WiredGraph};
use rtnc_core::sim::{
    line_block, run, tree_block, verify_rt, verify_rt_per_block, DelayModel, SimConfig, SimTrace,
};
use rtnc_core::{choose_triplets, FieldElement, GaloisField, NodeId, WirelessGraph};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn graph(n: u32, edges: &[(u32, u32)]) -> WirelessGraph {
    let mut g = WirelessGraph::new(n, vec![1, 2, 3], 8).unwrap();
    for &(u, v) in edges {
        g.add_edge(u, v, 1).unwrap();
    }
    g
}

fn async_cfg(t: i64, d: u32, seed: u64) -> SimConfig {
    let mut cfg = SimConfig::asynchronous(t, DelayModel::uniform(d), seed);
    cfg.record_events = false;
    cfg
}

fn sim(b: &Block, cfg: &SimConfig) -> Result<SimTrace, String> {
    run(std::slice::from_ref(b), cfg).map_err(|e| e.to_string())
}

// ---------------------------------------------------------------- 1

fn line_capacity() -> Outcome {
    for m in 3..=5u32 {
        let b = line_block(m);
        let tr = sim(&b, &SimConfig::sync(80))?;
        let l = i64::from(m) - 1;
        ensure!(tr.loss_free(), "sync M={m}: messages lost");
        ensure!(tr.rate() == 1.0, "sync M={m}: rate {} per slot", tr.rate());
        ensure!(
            tr.decodes.iter().all(|d| d.decoded - d.generated == l),
            "sync M={m}: a decode delay differs from {l}"
        );
    }
    // Every delay tuple over a window of six transmissions, reordering and
    // FIFO both.
    let b = line_block(4);
    let mut tuples = 0;
    for bits in 0u32..64 {
        let list: Vec<u32> = (0..6).map(|k| 1 + (bits >> k & 1)).collect();
        for fifo in [false, true] {
            let mut cfg = SimConfig::asynchronous(60, DelayModel::adversarial(2, list.clone()), 0);
            cfg.delay.fifo = fifo;
            cfg.record_events = false;
            let tr = sim(&b, &cfg)?;
            ensure!(verify_rt(&tr, 3, 2, 0).pass(), "delay tuple {list:?} fifo={fifo}");
            tuples += 1;
        }
    }
    let mut runs = 0;
    for d in 2..=4u32 {
        for m in 3..=5u32 {
            let b = line_block(m);
            for seed in 0..1000 {
                let tr = sim(&b, &async_cfg(80, d, seed))?;
                let rep = verify_rt(&tr, i64::from(m) - 1, i64::from(d), 0);
                ensure!(rep.pass(), "M={m} D={d} seed={seed}: {rep:?}");
                runs += 1;
            }
        }
    }
    Ok(format!("{tuples} delay tuples, {runs} random traces"))
}

// ---------------------------------------------------------------- 2

fn oracle_index_bits(d: u32) -> u32 {
    // Smallest w with 2^w >= 2D.
    let mut w = 0;
    while (1u64 << w) < 2 * u64::from(d) {
        w += 1;
    }
    w
}

fn oracle_block_bits(h: u32) -> u32 {
    let mut b = 0;
    while (1u64 << b) < u64::from(h) {
        b += 1;
    }
    b
}

fn header_widths() -> Outcome {
    let mut checked = 0;
    for d in 1..=16u32 {
        let w = oracle_index_bits(d);
        ensure!(index_bits(d) == w, "index bits D={d}");
        for h in 1..=8u32 {
            let b = oracle_block_bits(h);
            let (line, star) = if h == 1 { (2 * w, 3 * w + 1) } else { (2 * w + b, 3 * w + 1 + b) };
            ensure!(header_width(HeaderKind::Line, d, h) == line, "line width D={d} h={h}");
            ensure!(header_width(HeaderKind::Star, d, h) == star, "star width D={d} h={h}");
            let top = (1u32 << w) - 1;
            let lh = Header::Line(LineHeader { p: top, q: 0 });
            let sh = Header::Star(StarHeader { p: top, q: 0, u: top, k: true });
            let id = h - 1;
            let lbits = pack_header(&lh, id, d, h).map_err(|e| e.to_string())?;
            let sbits = pack_header(&sh, id, d, h).map_err(|e| e.to_string())?;
            ensure!(lbits.len() as u32 == line, "packed line header D={d} h={h}: {} bits", lbits.len());
            ensure!(sbits.len() as u32 == star, "packed star header D={d} h={h}: {} bits", sbits.len());
            checked += 1;
        }
    }
    Ok(format!("{checked} (D, h) pairs"))
}

// ---------------------------------------------------------------- 3

fn star_rate_delay() -> Outcome {
    let b = tree_block([0, 0, 0]);
    let tr = sim(&b, &SimConfig::sync(200))?;
    ensure!(tr.loss_free(), "sync star lost messages");
    ensure!(tr.rate() == 0.5, "sync star rate {}", tr.rate());
    for s in &tr.blocks {
        let want = (tr.cutoff + 1) / 2;
        ensure!(s.generated.iter().all(|&g| g == want), "generated {:?}, want {want} each", s.generated);
    }
    ensure!(
        tr.decodes.iter().all(|d| d.decoded - d.generated == 3),
        "sync star decode delays differ from 3"
    );
    let mut runs = 0;
    for d in 2..=4u32 {
        for seed in 0..1000 {
            let tr = sim(&b, &async_cfg(200, d, seed))?;
            ensure!(tr.rate() == 0.5, "async rate D={d} seed={seed}");
            let rep = verify_rt(&tr, 2, i64::from(d), 1);
            ensure!(rep.pass(), "D={d} seed={seed}: {rep:?}");
            runs += 1;
        }
    }
    Ok(format!("sync delay 3, {runs} async traces"))
}

// ---------------------------------------------------------------- 4

fn random_table(f: &GaloisField, origins: usize, len: usize, seed: u64) -> MessageTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    MessageTable {
        table: (0..origins)
            .map(|_| (0..len).map(|_| f.element(rng.gen_range(0..f.order())).unwrap()).collect())
            .collect(),
    }
}

/// `sum coeff * W[origin][ts]` over the listed terms, dropping ts < 0.
fn expect(f: &GaloisField, msgs: &MessageTable, terms: &[(usize, i64, FieldElement)]) -> Sym {
    let mut value = f.zero();
    let mut map = BTreeMap::new();
    for &(o, ts, c) in terms {
        if ts < 0 {
            continue;
        }
        value = f.add(value, f.mul(c, msgs.get(o, ts)).unwrap()).unwrap();
        map.insert((o, ts), c);
    }
    Sym { value, terms: map }
}

fn closed_forms() -> Outcome {
    let mut symbols = 0;
    for c in [2u8, 8] {
        let f = GaloisField::new(c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(u64::from(c));
        let mut nonzero = || f.element(rng.gen_range(1..f.order())).unwrap();
        let k = LineCoeffs { k: [nonzero(), nonzero()] };
        for m in 3..=6usize {
            let msgs = random_table(&f, 2, 51, m as u64);
            let run = run_sync_line(&f, m, 51, &k, &msgs).map_err(|e| e.to_string())?;
            ensure!(run.mismatches == 0, "line C={c} m={m}: wrong decodes");
            for r in 2..m {
                for t in 0..=50i64 {
                    let want = expect(&f, &msgs, &[(0, t - (r as i64 - 1), k.k[0]), (1, t - (m - r) as i64, k.k[1])]);
                    ensure!(run.x[r - 1][t as usize] == want, "line C={c} m={m} relay {r} slot {t}");
                    symbols += 1;
                }
            }
        }
        let tri = choose_triplets(&f).map_err(|e| e.to_string())?;
        let even = |s: i64| s.div_euclid(2) * 2;
        let set = |s: i64| if s.rem_euclid(2) == 1 { tri.b } else { tri.a };
        let msgs = random_table(&f, 3, 51, 7);
        let star = run_sync_star(&f, 51, &tri, &msgs, 3).map_err(|e| e.to_string())?;
        ensure!(star.mismatches == 0, "star C={c}: wrong decodes");
        for t in 0..=50i64 {
            let s = t - 1;
            let want = expect(&f, &msgs, &[(0, even(s), set(s)[0]), (1, even(s), set(s)[1]), (2, even(s), set(s)[2])]);
            ensure!(star.x[3][t as usize] == want, "star center C={c} slot {t}");
            symbols += 1;
        }
        let ls = run_sync_linestar(&f, 51, &tri, &msgs, 4, 3).map_err(|e| e.to_string())?;
        ensure!(ls.mismatches == 0, "line-star C={c}: wrong decodes");
        for t in 0..=50i64 {
            let (s0, s1) = (t - 1, t - 2);
            let want = expect(&f, &msgs, &[(0, even(s0), set(s0)[0]), (1, even(s1), set(s1)[1]), (2, even(s1), set(s1)[2])]);
            ensure!(ls.x[4][t as usize] == want, "line-star arm relay C={c} slot {t}");
            symbols += 1;
        }
    }
    Ok(format!("{symbols} relay symbols"))
}

// ---------------------------------------------------------------- 5

fn transmission_counts() -> Outcome {
    let window = 40i64;
    let mut out = Vec::new();
    for m in 3..=6u32 {
        let tx = steady_state_tx(&[line_block(m)], window).map_err(|e| e.to_string())?;
        let per = u64::from(m - 2);
        // One message pair per slot.
        ensure!(tx.coding == per * window as u64, "line |V|={m}: coding {}", tx.coding);
        ensure!(tx.routing == 2 * per * window as u64, "line |V|={m}: routing {}", tx.routing);
        out.push(format!("line{m} {}/{}", tx.coding, tx.routing));
    }
    for arms in [[0, 0, 0], [1, 0, 0], [2, 1, 0], [2, 2, 2]] {
        let v = 4 + arms.iter().sum::<usize>() as u64;
        let tx = steady_state_tx(&[tree_block(arms)], window).map_err(|e| e.to_string())?;
        // One message triplet every two slots.
        let triplets = window as u64 / 2;
        ensure!(tx.coding == 2 * (v - 3) * triplets, "tree |V|={v}: coding {}", tx.coding);
        ensure!(tx.routing == 3 * (v - 3) * triplets, "tree |V|={v}: routing {}", tx.routing);
        out.push(format!("tree{v} {}/{}", tx.coding, tx.routing));
    }
    Ok(out.join(", "))
}

// ---------------------------------------------------------------- 6

fn oracle_h(w: &WiredGraph) -> u32 {
    let m = w.full_mask();
    [(1, [2, 3]), (2, [1, 3]), (3, [1, 2])]
        .iter()
        .map(|(i, rest)| brute_force_min_cut(w, &m, &[*i], rest))
        .min()
        .unwrap()
}

fn blocks_disjoint(blocks: &[Block]) -> bool {
    let mut edges = BTreeSet::new();
    let mut relays = BTreeSet::new();
    for b in blocks {
        for e in &b.edges {
            if !edges.insert(*e) {
                return false;
            }
        }
        for r in &b.relays {
            if !relays.insert(*r) {
                return false;
            }
        }
    }
    true
}

/// The block's edges join all three sources.
fn spans_sources(g: &WirelessGraph, b: &Block) -> bool {
    let mut parent: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    fn root(p: &mut BTreeMap<NodeId, NodeId>, x: NodeId) -> NodeId {
        let up = *p.entry(x).or_insert(x);
        if up == x {
            x
        } else {
            let r = root(p, up);
            p.insert(x, r);
            r
        }
    }
    for &e in &b.edges {
        let (a, c) = (root(&mut parent, g.edge(e).u), root(&mut parent, g.edge(e).v));
        parent.insert(a, c);
    }
    let r1 = root(&mut parent, 1);
    root(&mut parent, 2) == r1 && root(&mut parent, 3) == r1
}

fn multicast_decomposition() -> Outcome {
    let cfg = DecomposeConfig::default();
    let g = graph(4, &[(1, 2), (1, 3), (2, 3), (1, 4), (2, 4), (3, 4)]);
    let d = decompose_multicast(&g, &cfg).map_err(|e| e.to_string())?;
    ensure!(d.h == 3, "ring plus star: h = {}", d.h);
    ensure!(d.rings.len() == 1 && d.linestars.len() == 1, "ring plus star: {} rings {} line-stars", d.rings.len(), d.linestars.len());
    ensure!(d.rate_halves() == 3, "ring plus star: rate {} halves of C", d.rate_halves());
    let tr = run(&d.blocks, &async_cfg(120, 2, 1)).map_err(|e| e.to_string())?;
    ensure!(tr.loss_free() && verify_rt_per_block(&tr), "ring plus star simulation");

    let g = graph(5, &[(1, 4), (2, 4), (3, 4), (1, 5), (3, 5)]);
    let w = split_relays(&g);
    let mut mask = w.full_mask();
    let mut exact = true;
    let rings = find_rings(&w, &mut mask, &cfg, &mut exact).map_err(|e| e.to_string())?;
    ensure!(rings.is_empty(), "textual graph: {} rings", rings.len());
    let qs = find_linestars(&w, &mut mask, oracle_h(&w), 0).map_err(|e| e.to_string())?;
    ensure!(qs.len() == 1, "textual graph: {} line-stars", qs.len());
    // Both lines leave the same source, so a shared first edge shows once.
    let pairs: Vec<(u32, u32)> = qs[0]
        .p_ij
        .wireless_edges(&w)
        .into_iter()
        .chain(qs[0].p_il.wireless_edges(&w))
        .map(|e| (g.edge(e).u, g.edge(e).v))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    ensure!(pairs == vec![(1, 4), (2, 4), (3, 4)], "textual graph line-star {pairs:?}");

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut tried, mut nontrivial) = (0, 0);
    while tried < 400 {
        let n = rng.gen_range(3..=7u32);
        let mut g = WirelessGraph::new(n, vec![1, 2, 3], 8).unwrap();
        for u in 1..=n {
            for v in u + 1..=n {
                if rng.gen_bool(0.45) {
                    g.add_edge(u, v, 1).unwrap();
                }
            }
        }
        let wired_edges = g.edges().len() + (n as usize - 3);
        if wired_edges > 12 {
            continue;
        }
        tried += 1;
        let w = split_relays(&g);
        let h = oracle_h(&w);
        let d = decompose_multicast(&g, &cfg).map_err(|e| format!("{e}\n{}", g.to_text()))?;
        ensure!(d.h == h, "h {} vs brute force {h}\n{}", d.h, g.to_text());
        ensure!(d.rate_halves() >= h, "2|R|+|Q| = {} < h = {h}\n{}", d.rate_halves(), g.to_text());
        ensure!(blocks_disjoint(&d.blocks), "blocks overlap\n{}", g.to_text());
        ensure!(d.rings.iter().all(|r| ring_is_valid(&w, &w.full_mask(), r)), "invalid ring\n{}", g.to_text());
        for b in d.blocks.iter().filter(|b| b.kind == BlockKind::LineStar) {
            ensure!(spans_sources(&g, b), "line-star misses a source\n{}", g.to_text());
        }
        if h > 0 {
            nontrivial += 1;
        }
    }
    Ok(format!("rate 1.5C, textual graph star, {tried} random graphs ({nontrivial} with h > 0)"))
}

// ---------------------------------------------------------------- 7

type Footprint = (BTreeSet<(NodeId, NodeId)>, BTreeSet<NodeId>);

/// Simple wireless paths from `from` to `to`. Relays are used at most
/// once per path; `through` lists the sources that may be crossed.
fn simple_paths(g: &WirelessGraph, from: NodeId, to: NodeId, through: &[NodeId]) -> Vec<Footprint> {
    let mut adj: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for e in g.edges() {
        adj.entry(e.u).or_default().push(e.v);
        adj.entry(e.v).or_default().push(e.u);
    }
    let mut out = Vec::new();
    let mut stack = vec![from];
    fn go(
        g: &WirelessGraph,
        adj: &BTreeMap<NodeId, Vec<NodeId>>,
        to: NodeId,
        through: &[NodeId],
        stack: &mut Vec<NodeId>,
        out: &mut Vec<Footprint>,
    ) {
        let u = *stack.last().unwrap();
        if u == to {
            let edges = stack.windows(2).map(|p| (p[0].min(p[1]), p[0].max(p[1]))).collect();
            let relays = stack.iter().copied().filter(|&x| !g.is_source(x)).collect();
            out.push((edges, relays));
            return;
        }
        for &v in adj.get(&u).into_iter().flatten() {
            if stack.contains(&v) || (g.is_source(v) && v != to && !through.contains(&v)) {
                continue;
            }
            stack.push(v);
            go(g, adj, to, through, stack, out);
            stack.pop();
        }
    }
    go(g, &adj, to, through, &mut stack, &mut out);
    out
}

fn clash(a: &Footprint, b: &Footprint) -> bool {
    !a.0.is_disjoint(&b.0) || !a.1.is_disjoint(&b.1)
}

/// Largest `(a, b)` in lexicographic order such that `a` lines of `first`
/// and `b` lines of `second` are pairwise disjoint. Exhaustive.
fn best_packing(first: &[Footprint], second: &[Footprint]) -> (usize, usize) {
    fn pack_second(second: &[Footprint], k: usize, taken: &mut Vec<Footprint>) -> usize {
        let mut best = 0;
        for x in k..second.len() {
            if taken.iter().all(|t| !clash(t, &second[x])) {
                taken.push(second[x].clone());
                best = best.max(1 + pack_second(second, x + 1, taken));
                taken.pop();
            }
        }
        best
    }
    fn pack_first(first: &[Footprint], second: &[Footprint], k: usize, taken: &mut Vec<Footprint>, best: &mut (usize, usize)) {
        let here = (taken.len(), pack_second(second, 0, &mut taken.clone()));
        *best = (*best).max(here);
        for x in k..first.len() {
            if taken.iter().all(|t| !clash(t, &first[x])) {
                taken.push(first[x].clone());
                pack_first(first, second, x + 1, taken, best);
                taken.pop();
            }
        }
    }
    let mut best = (0, 0);
    pack_first(first, second, 0, &mut Vec::new(), &mut best);
    best
}

fn unicast_corners() -> Outcome {
    let cfg = DecomposeConfig::default();
    let g = graph(8, &[(1, 4), (4, 3), (1, 5), (5, 3), (1, 6), (6, 3), (1, 7), (7, 2), (1, 8), (8, 2)]);
    let w = split_relays(&g);
    let m = w.full_mask();
    ensure!(brute_force_min_cut(&w, &m, &[1], &[3]) == 3, "example C_1;3");
    ensure!(brute_force_min_cut(&w, &m, &[1], &[2, 3]) == 5, "example C_1;2,3");
    let plan = unicast_corner(&g, (1, 3), &cfg).map_err(|e| e.to_string())?;
    ensure!(plan.families[&(1, 3)].len() == 3 && plan.families[&(1, 2)].len() == 2, "example families");
    ensure!(plan.rates == [2, 3, 0], "example corner {:?}", plan.rates);
    ensure!(blocks_disjoint(&plan.blocks), "example families overlap");

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let anchors = [(1, 2), (1, 3), (2, 3), (2, 1), (3, 1), (3, 2)];
    let mut checked = 0;
    while checked < 200 {
        let n = rng.gen_range(4..=6u32);
        let mut g = WirelessGraph::new(n, vec![1, 2, 3], 8).unwrap();
        for u in 1..=n {
            for v in u + 1..=n {
                if rng.gen_bool(0.5) {
                    g.add_edge(u, v, 1).unwrap();
                }
            }
        }
        let anchor = anchors[rng.gen_range(0..anchors.len())];
        let ctx = || format!("anchor {anchor:?}\n{}", g.to_text());
        let plan = unicast_corner(&g, anchor, &cfg).map_err(|e| format!("{e}\n{}", ctx()))?;
        let (i, j, l) = (plan.i, plan.j, plan.l);
        let w = split_relays(&g);
        let m = w.full_mask();
        let c_ij = brute_force_min_cut(&w, &m, &[i], &[j]);
        let c_ijl = brute_force_min_cut(&w, &m, &[i], &[j, l]);
        let c_jil = brute_force_min_cut(&w, &m, &[j], &[i, l]);
        ensure!(c_ij == c_ijl, "orientation: C_i;j = {c_ij}, C_i;j,l = {c_ijl}\n{}", ctx());
        let key = |a: NodeId, b: NodeId| (a.min(b), a.max(b));
        let (fam_ij, fam_jl) = (&plan.families[&key(i, j)], &plan.families[&key(j, l)]);
        ensure!(fam_ij.len() as u32 == c_ijl, "|P_ij| = {} vs {c_ijl}\n{}", fam_ij.len(), ctx());
        ensure!(fam_jl.len() as u32 == c_jil - c_ijl, "|P_jl| = {} vs {}\n{}", fam_jl.len(), c_jil - c_ijl, ctx());
        // Exhaustive packing: j-i lines may cross l, j-l lines may not
        // cross i.
        let (a, b) = best_packing(&simple_paths(&g, j, i, &[l]), &simple_paths(&g, j, l, &[]));
        ensure!((fam_ij.len(), fam_jl.len()) == (a, b), "plan ({}, {}) vs packing ({a}, {b})\n{}", fam_ij.len(), fam_jl.len(), ctx());
        let ends_ok = fam_ij.iter().all(|p| p.start(&w) == j && p.end(&w) == i)
            && fam_jl.iter().all(|p| p.start(&w) == j && p.end(&w) == l);
        ensure!(ends_ok, "line endpoints\n{}", ctx());
        ensure!(blocks_disjoint(&plan.blocks), "families overlap\n{}", ctx());
        checked += 1;
    }
    Ok(format!("example corner (2C,3C,0), {checked} random graphs"))
}

// ---------------------------------------------------------------- 8

fn combined() -> Outcome {
    let g = graph(4, &[(1, 4), (2, 4), (3, 4), (1, 2)]);
    let cs = combined_corners(&g, &DecomposeConfig::default()).map_err(|e| e.to_string())?;
    let mc = cs.last().ok_or("no corners")?;
    ensure!(mc.multicast_halves == 1, "multicast corner R = {} halves of C", mc.multicast_halves);
    ensure!(mc.unicast == [1, 0, 0], "multicast corner residual {:?}", mc.unicast);
    let pure = cs
        .iter()
        .find(|c| c.multicast_halves == 0 && c.unicast_plan.is_some())
        .ok_or("no pure unicast corner")?;
    for (name, blocks) in [("multicast", &mc.blocks), ("unicast", &pure.blocks)] {
        ensure!(blocks_disjoint(blocks), "{name} corner blocks overlap");
        for seed in 0..50 {
            let tr = run(blocks, &async_cfg(150, 3, seed)).map_err(|e| e.to_string())?;
            ensure!(tr.loss_free() && verify_rt_per_block(&tr), "{name} corner seed {seed}");
        }
    }
    Ok(format!("R=C/2 with residual C on (1,2), pure corner {:?}", pure.unicast))
}

// ---------------------------------------------------------------- 9

const SWEEPS: u64 = 20;
const SIZES: [u32; 3] = [8, 16, 32];

fn sweep(session: Session, seed: u64) -> Result<ExperimentOutput, String> {
    let spec = ExperimentSpec {
        sizes: SIZES.to_vec(),
        session,
        seed,
        ..ExperimentSpec::default()
    };
    run_experiment(&spec).map_err(|e| e.to_string())
}

/// Mean of `metric` per (graph index, size) over the sweeps. The graph
/// index fixes the expected degree.
fn by_degree(outs: &[ExperimentOutput], metric: &str) -> BTreeMap<(u64, u32), f64> {
    let mut acc: BTreeMap<(u64, u32), (f64, f64)> = BTreeMap::new();
    for o in outs {
        for r in o.rows.iter().filter(|r| r.metric == metric) {
            let e = acc.entry((r.seed % 1000, r.n)).or_default();
            e.0 += r.value;
            e.1 += 1.0;
        }
    }
    acc.into_iter().map(|(k, (s, c))| (k, s / c)).collect()
}

fn trends() -> Outcome {
    let uni: Vec<ExperimentOutput> = (0..SWEEPS).map(|s| sweep(Session::Unicast, s)).collect::<Result<_, _>>()?;
    let multi: Vec<ExperimentOutput> = (0..SWEEPS).map(|s| sweep(Session::Multicast, s)).collect::<Result<_, _>>()?;
    let mut notes = Vec::new();
    let mut ok = true;

    let (mut hits, mut total) = (0, 0);
    for o in &uni {
        for n in SIZES {
            total += 1;
            if o.mean(n, "p12").unwrap_or(0.0) >= o.mean(n, "p13").unwrap_or(0.0) {
                hits += 1;
            }
        }
    }
    let frac = f64::from(hits) / f64::from(total);
    let a = frac >= 0.95;
    ok &= a;
    notes.push(format!("(a) {} mean|P12|>=mean|P13| in {hits}/{total}", verdict(a)));

    let mut b_fail = Vec::new();
    for metric in ["rings", "linestars", "h"] {
        let m = by_degree(&multi, metric);
        let degrees: BTreeSet<u64> = m.keys().map(|k| k.0).collect();
        let mut bad = 0;
        for &k in &degrees {
            let seq: Vec<f64> = SIZES.iter().map(|&n| m[&(k, n)]).collect();
            if seq.windows(2).any(|p| p[1] < p[0]) {
                bad += 1;
            }
        }
        if bad > 0 {
            b_fail.push(format!("{metric} drops with n at {bad}/{} degrees", degrees.len()));
        }
    }
    let b = b_fail.is_empty();
    ok &= b;
    notes.push(format!("(b) {}{}", verdict(b), if b { String::new() } else { format!(" {}", b_fail.join("; ")) }));

    let ratio = |outs: &[ExperimentOutput]| -> Vec<f64> {
        outs.iter()
            .map(|o| {
                let c: f64 = SIZES.iter().map(|&n| o.total(n, "relay_tx_coding")).sum();
                let r: f64 = SIZES.iter().map(|&n| o.total(n, "relay_tx_routing")).sum();
                c / r
            })
            .collect()
    };
    let ru = ratio(&uni);
    let rm = ratio(&multi);
    let c = ru.iter().all(|&x| x == 0.5) && rm.iter().all(|&x| (0.6..=0.75).contains(&x));
    ok &= c;
    let lo = rm.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = rm.iter().copied().fold(0.0, f64::max);
    notes.push(format!("(c) {} unicast ratio 0.5 in {}/{}, multicast {lo:.3}..{hi:.3}", verdict(c), ru.iter().filter(|&&x| x == 0.5).count(), ru.len()));

    let rt = uni.iter().chain(&multi).all(|o| o.rows.iter().filter(|r| r.metric == "rt_ok").all(|r| r.value == 1.0));
    ensure!(rt, "an experiment graph failed its real-time check");
    let text = notes.join(", ");
    if ok {
        Ok(text)
    } else {
        Err(text)
    }
}

fn verdict(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "not met"
    }
}

// ---------------------------------------------------------------- 10

fn determinism() -> Outcome {
    let spec = ExperimentSpec {
        sizes: vec![8, 16],
        graphs_per_size: 4,
        session: Session::Combined,
        seed: 3,
        ..ExperimentSpec::default()
    };
    let a = run_experiment(&spec).map_err(|e| e.to_string())?.csv();
    let b = run_experiment(&spec).map_err(|e| e.to_string())?.csv();
    ensure!(a == b, "experiment CSV differs between runs");
    let g = graph(4, &[(1, 2), (1, 3), (2, 3), (1, 4), (2, 4), (3, 4)]);
    let cfg = DecomposeConfig::default();
    let d1 = dump_blocks(&decompose_multicast(&g, &cfg).map_err(|e| e.to_string())?.blocks);
    let d2 = dump_blocks(&decompose_multicast(&g, &cfg).map_err(|e| e.to_string())?.blocks);
    ensure!(d1 == d2, "decomposition dump differs");
    let blocks = decompose_multicast(&g, &cfg).map_err(|e| e.to_string())?.blocks;
    let c = SimConfig::asynchronous(80, DelayModel::uniform(3), 11);
    let t1 = run(&blocks, &c).map_err(|e| e.to_string())?.dump();
    let t2 = run(&blocks, &c).map_err(|e| e.to_string())?.dump();
    ensure!(t1 == t2, "trace dump differs");
    Ok(format!("CSV {} bytes, trace {} bytes identical", a.len(), t1.len()))
}

// ----------------------------------------------------------------

/// The sweep trends are statistical properties of random graphs rather than
/// guarantees of the schemes; they are reported but do not stop the run.
const REPORTED_ONLY: &[u32] = &[9];

#[test]
fn acceptance() {
    let criteria: [(u32, &str, fn() -> Outcome); 10] = [
        (1, "line capacity and delay", line_capacity),
        (2, "header widths", header_widths),
        (3, "star rate and delay", star_rate_delay),
        (4, "closed forms", closed_forms),
        (5, "transmission counts", transmission_counts),
        (6, "multicast decomposition", multicast_decomposition),
        (7, "unicast corners", unicast_corners),
        (8, "combined corners", combined),
        (9, "random-graph trends", trends),
        (10, "determinism", determinism),
    ];
    let mut failed = Vec::new();
    let mut err = std::io::stderr();
    for (id, name, f) in criteria {
        let start = std::time::Instant::now();
        let res = f();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match &res {
            Ok(d) => ("PASS", d.as_str()),
            Err(d) => ("FAIL", d.as_str()),
        };
        // Written straight to stderr so the lines show without --nocapture.
        let _ = writeln!(err, "criterion {id:>2} {tag} {name} ({secs:.1}s): {detail}");
        if res.is_err() {
            failed.push(id);
        }
    }
    let hard: Vec<u32> = failed.iter().copied().filter(|c| !REPORTED_ONLY.contains(c)).collect();
    assert!(hard.is_empty(), "criteria failed: {hard:?}");
}
