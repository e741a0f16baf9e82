use super::*;

fn sync_run(b: &Block, t: i64) -> SimTrace {
    run(std::slice::from_ref(b), &SimConfig::sync(t)).unwrap()
}

fn async_run(b: &Block, t: i64, d: u32, seed: u64) -> SimTrace {
    let mut cfg = SimConfig::asynchronous(t, DelayModel::uniform(d), seed);
    cfg.record_events = false;
    run(std::slice::from_ref(b), &cfg).unwrap()
}

#[test]
fn sync_line_delay_and_rate() {
    for m in 3..=6u32 {
        let b = line_block(m);
        let tr = sync_run(&b, 60);
        assert!(tr.loss_free());
        assert_eq!(tr.max_delay(), i64::from(m) - 1);
        assert!(tr.decodes.iter().all(|d| d.decoded - d.generated == i64::from(m) - 1));
        assert_eq!(tr.rate(), 1.0);
        let rep = verify_rt(&tr, i64::from(m) - 1, 1, 0);
        assert!(rep.pass());
        assert!(rep.pairs.iter().all(|p| p.slack == 0));
    }
}

#[test]
fn sync_line_three_nodes_far_end() {
    // Node 1 gets W3 generated at t in slot t + 2.
    let tr = sync_run(&line_block(3), 20);
    let got: Vec<(i64, i64)> = tr
        .decodes
        .iter()
        .filter(|d| d.dest == 1)
        .map(|d| (d.generated, d.decoded))
        .collect();
    assert!(!got.is_empty());
    assert!(got.iter().all(|&(g, d)| d == g + 2));
}

#[test]
fn async_line_random_delays() {
    for d in 2..=4u32 {
        for m in 3..=5u32 {
            let b = line_block(m);
            for seed in 0..40 {
                let tr = async_run(&b, 120, d, seed);
                let rep = verify_rt(&tr, i64::from(m) - 1, i64::from(d), 0);
                assert!(rep.pass(), "m={m} D={d} seed={seed}: {rep:?}");
            }
        }
    }
}

#[test]
fn async_line_every_delay_tuple() {
    let b = line_block(4);
    for bits in 0u32..64 {
        let list: Vec<u32> = (0..6).map(|k| 1 + (bits >> k & 1)).collect();
        for fifo in [false, true] {
            let mut cfg = SimConfig::asynchronous(60, DelayModel::adversarial(2, list.clone()), 0);
            cfg.delay.fifo = fifo;
            cfg.record_events = false;
            let tr = run(std::slice::from_ref(&b), &cfg).unwrap();
            assert!(verify_rt(&tr, 3, 2, 0).pass(), "{list:?}");
        }
    }
}

#[test]
fn sync_star_delay_three() {
    let b = tree_block([0, 0, 0]);
    let tr = sync_run(&b, 200);
    assert!(tr.loss_free());
    assert_eq!(tr.max_delay(), 3);
    assert_eq!(tr.rate(), 0.5);
}

#[test]
fn async_star_random_delays() {
    let b = tree_block([0, 0, 0]);
    for d in 1..=4u32 {
        for seed in 0..60 {
            let tr = async_run(&b, 200, d, seed);
            let rep = verify_rt(&tr, 2, i64::from(d), 1);
            assert!(rep.pass(), "D={d} seed={seed}: {rep:?}");
        }
    }
}

#[test]
fn sync_linestar_delay() {
    let b = tree_block([1, 0, 0]);
    assert_eq!(b.hops(), 3);
    let tr = sync_run(&b, 200);
    assert!(tr.loss_free());
    assert_eq!(tr.max_delay(), 4);
}

#[test]
fn async_trees_random_delays() {
    for arms in [[1, 0, 0], [2, 1, 0], [1, 1, 1], [3, 0, 2]] {
        let b = tree_block(arms);
        let l = b.hops() as i64;
        for d in 1..=4u32 {
            for seed in 0..25 {
                let tr = async_run(&b, 250, d, seed);
                let rep = verify_rt(&tr, l, i64::from(d), 1);
                assert!(rep.pass(), "{arms:?} D={d} seed={seed}: {rep:?}");
            }
        }
    }
}

#[test]
fn async_long_arms() {
    // A burst on a long arm lets the first relay run ahead of the center's
    // echo of its own origin; this used to alias the echoed index.
    for (arms, dmax) in [([4, 0, 0], 4u32), ([6, 3, 1], 4), ([0, 3, 1], 4), ([8, 0, 0], 2), ([10, 2, 0], 2)] {
        let b = tree_block(arms);
        for d in 1..=dmax {
            for seed in 0..60 {
                let mut cfg = SimConfig::asynchronous(200, DelayModel::uniform(d), seed);
                cfg.record_events = false;
                let tr = run(std::slice::from_ref(&b), &cfg).unwrap_or_else(|e| panic!("{arms:?} D={d} seed={seed}: {e}"));
                assert!(verify_rt(&tr, b.hops() as i64, i64::from(d), 1).pass(), "{arms:?} D={d} seed={seed}");
            }
        }
    }
}

#[test]
fn async_star_every_delay_tuple() {
    let b = tree_block([1, 0, 0]);
    for bits in 0u32..256 {
        let list: Vec<u32> = (0..8).map(|k| 1 + (bits >> k & 1)).collect();
        let mut cfg = SimConfig::asynchronous(80, DelayModel::adversarial(2, list.clone()), 0);
        cfg.record_events = false;
        let tr = run(std::slice::from_ref(&b), &cfg).unwrap();
        assert!(verify_rt(&tr, 3, 2, 1).pass(), "{list:?}");
    }
}

fn per_unit(tr: &SimTrace, period: i64) -> (u64, i64) {
    let w = (20, 20 + 40 * period);
    (count_transmissions(tr, Role::Relay, Some(w)), 40)
}

#[test]
fn transmission_counts() {
    let cfg = SimConfig::sync(200);
    for m in 3..=6u32 {
        let b = line_block(m);
        let (c, units) = per_unit(&run(std::slice::from_ref(&b), &cfg).unwrap(), 1);
        let (r, _) = per_unit(&run_routing_baseline(std::slice::from_ref(&b), &cfg).unwrap(), 1);
        assert_eq!(c, u64::from(m - 2) * units as u64);
        assert_eq!(r, 2 * u64::from(m - 2) * units as u64);
    }
    for arms in [[0, 0, 0], [1, 0, 0], [2, 1, 1]] {
        let b = tree_block(arms);
        let relays = 1 + arms.iter().sum::<usize>() as u64;
        let (c, units) = per_unit(&run(std::slice::from_ref(&b), &cfg).unwrap(), 2);
        let (r, _) = per_unit(&run_routing_baseline(std::slice::from_ref(&b), &cfg).unwrap(), 2);
        assert_eq!(c, 2 * relays * units as u64, "{arms:?}");
        assert_eq!(r, 3 * relays * units as u64, "{arms:?}");
    }
}

#[test]
fn routing_is_loss_free() {
    for b in [line_block(5), tree_block([2, 0, 1])] {
        let cfg = SimConfig::asynchronous(150, DelayModel::uniform(3), 4);
        let tr = run_routing_baseline(std::slice::from_ref(&b), &cfg).unwrap();
        assert!(tr.loss_free());
    }
}

#[test]
fn same_seed_same_trace() {
    let b = tree_block([1, 1, 0]);
    let cfg = SimConfig::asynchronous(60, DelayModel::uniform(3), 17);
    let a = run(std::slice::from_ref(&b), &cfg).unwrap().dump();
    let c = run(std::slice::from_ref(&b), &cfg).unwrap().dump();
    assert_eq!(a, c);
    let other = SimConfig { seed: 18, ..cfg };
    assert_ne!(a, run(std::slice::from_ref(&b), &other).unwrap().dump());
}

#[test]
fn trace_format() {
    let tr = sync_run(&line_block(3), 6);
    let dump = tr.dump();
    let lines: Vec<&str> = dump.lines().collect();
    assert!(lines[0].starts_with("# coding rng=chacha8 seed=0"));
    // Slot 0: node 1 sends its first message to 2 over edge 0. Its own
    // index is 0 and the other end's is the all-ones "none" pattern.
    assert!(lines[1].starts_with("0,1,0,send,40,"), "{}", lines[1]);
    assert!(lines.last().unwrap().starts_with("summary: relay_tx="));
    for l in &lines[1..lines.len() - 1] {
        let f: Vec<&str> = l.split(',').collect();
        assert_eq!(f.len(), 6, "{l}");
        assert!(["send", "recv", "decode"].contains(&f[3]));
    }
}

#[test]
fn injected_late_decode_fails() {
    let mut tr = sync_run(&line_block(4), 40);
    assert!(verify_rt(&tr, 3, 1, 0).pass());
    let mut late = tr.decodes[5];
    late.decoded += 5;
    tr.decodes.push(late);
    let rep = verify_rt(&tr, 3, 1, 0);
    assert!(!rep.pass());
    let bad = rep.pairs.iter().find(|p| p.slack < 0).unwrap();
    assert_eq!(bad.first_violation, Some(tr.decodes.len() - 1));
}

#[test]
fn fifo_lines_deliver_in_order() {
    let b = line_block(5);
    for seed in 0..20 {
        let mut cfg = SimConfig::asynchronous(80, DelayModel::uniform(3), seed);
        cfg.delay.fifo = true;
        let tr = run(std::slice::from_ref(&b), &cfg).unwrap();
        assert!(tr.loss_free());
        let mut last: BTreeMap<(u32, u32), i64> = BTreeMap::new();
        for d in &tr.decodes {
            let prev = last.insert((d.origin, d.dest), d.seq).unwrap_or(-1);
            assert_eq!(d.seq, prev + 1, "seed {seed}");
        }
    }
}

#[test]
fn sync_mode_rejects_random_delays() {
    let mut cfg = SimConfig::sync(10);
    cfg.delay = DelayModel::uniform(2);
    assert_eq!(run(&[line_block(3)], &cfg).unwrap_err().exit_code(), 1);
}
