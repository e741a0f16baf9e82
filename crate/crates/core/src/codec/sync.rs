//! Slotted coding for unit delays.
//!
//! Sources and relays follow fixed linear recursions, so no header is
//! needed: every receiver can work out which messages a packet combines.
//! To make that explicit each transmitted symbol is a [`Sym`], the payload
//! together with its expansion over messages.
//!
//! Messages are keyed by origin (0-based) and generation slot. A line
//! source generates every slot; star and line-star sources generate on even
//! slots, so the message in force at slot `t` is the one from `2*floor(t/2)`.
//!
//! Coefficient sets: in a star the set used for a term is chosen by the
//! parity of the slot that term refers to. A source's own term at slot `t`
//! uses set `t mod 2`; an echo delayed by `e` slots uses set `(t - e) mod 2`.
//! With this choice the center of a star or line-star sees, after the echoes
//! cancel, `sum_i k_i W_i(2 floor((t-1)/2))` with `k` from set `(t-1) mod 2`.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::field::{CoeffTriplets, FieldElement, GaloisField};

use super::decoder::{Decoder, Equation, Term};
use super::line::LineCoeffs;
use super::store::MessageStore;

/// A payload with its expansion `sum coeff * W[origin][slot]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sym {
    pub value: FieldElement,
    pub terms: BTreeMap<(usize, i64), FieldElement>,
}

impl Sym {
    pub fn zero(f: &GaloisField) -> Self {
        Sym {
            value: f.zero(),
            terms: BTreeMap::new(),
        }
    }

    /// `coeff * W[origin][ts]`; messages before slot 0 are zero.
    pub fn message(f: &GaloisField, coeff: FieldElement, origin: usize, ts: i64, value: FieldElement) -> Result<Self> {
        let mut s = Sym::zero(f);
        if ts >= 0 && !coeff.is_zero() {
            s.value = f.mul(coeff, value)?;
            s.terms.insert((origin, ts), coeff);
        }
        Ok(s)
    }

    pub fn add(&self, f: &GaloisField, other: &Sym) -> Result<Sym> {
        let mut terms = self.terms.clone();
        for (k, c) in &other.terms {
            let e = terms.entry(*k).or_insert_with(|| f.zero());
            *e = f.add(*e, *c)?;
            if e.is_zero() {
                terms.remove(k);
            }
        }
        Ok(Sym {
            value: f.add(self.value, other.value)?,
            terms,
        })
    }
}

/// Generated messages: `table[origin][slot]`. Line sources use every slot,
/// star sources only even ones.
#[derive(Debug, Clone)]
pub struct MessageTable {
    pub table: Vec<Vec<FieldElement>>,
}

impl MessageTable {
    pub fn get(&self, origin: usize, ts: i64) -> FieldElement {
        self.table[origin][ts as usize]
    }
}

fn floor_even(t: i64) -> i64 {
    t.div_euclid(2) * 2
}

fn parity(t: i64) -> bool {
    t.rem_euclid(2) == 1
}

/// Look up a message a source must already know, as a symbol.
fn known(f: &GaloisField, store: &MessageStore, coeff: FieldElement, origin: usize, ts: i64, at: i64) -> Result<Sym> {
    if ts < 0 {
        return Ok(Sym::zero(f));
    }
    let v = store.get(origin, ts)?.ok_or_else(|| {
        Error::Protocol(format!(
            "slot {at}: origin {origin} message {ts} used before it was decoded"
        ))
    })?;
    Sym::message(f, coeff, origin, ts, v)
}

/// Line source `i` (1 or `m`) at slot `t`:
/// `k1 W1(t - (i-1)) + kM WM(t - (m-i))`. `store` holds the source's own
/// messages and whatever it has decoded.
pub fn line_source_encode_sync(f: &GaloisField, i: usize, m: usize, t: i64, store: &MessageStore, coeffs: &LineCoeffs) -> Result<Sym> {
    let a = known(f, store, coeffs.k[0], 0, t - (i as i64 - 1), t)?;
    let b = known(f, store, coeffs.k[1], 1, t - (m - i) as i64, t)?;
    a.add(f, &b)
}

/// Line relay: `X_r(t) = X_{r-1}(t-1) + X_{r+1}(t-1) + X_r(t-2)`.
pub fn line_relay_encode_sync(f: &GaloisField, left_prev: &Sym, right_prev: &Sym, own_prev2: &Sym) -> Result<Sym> {
    left_prev.add(f, right_prev)?.add(f, own_prev2)
}

/// Closed form of what relay `r` sends at slot `t` on an `m`-node line:
/// `k1 W1(t - (r-1)) + kM WM(t - (m-r))`.
pub fn line_closed_form(f: &GaloisField, r: usize, m: usize, t: i64, coeffs: &LineCoeffs, msgs: &MessageTable) -> Result<Sym> {
    let ta = t - (r as i64 - 1);
    let tb = t - (m - r) as i64;
    let a = if ta >= 0 { Sym::message(f, coeffs.k[0], 0, ta, msgs.get(0, ta))? } else { Sym::zero(f) };
    let b = if tb >= 0 { Sym::message(f, coeffs.k[1], 1, tb, msgs.get(1, tb))? } else { Sym::zero(f) };
    a.add(f, &b)
}

/// Star or line-star source `i` (origin index) at slot `t`: its own message
/// plus echoes of the other two delayed by `echo` slots.
pub fn star_source_encode(f: &GaloisField, i: usize, t: i64, store: &MessageStore, coeffs: &CoeffTriplets, echo: i64) -> Result<Sym> {
    let own_ts = floor_even(t);
    let mut x = known(f, store, coeffs.set(parity(t))[i], i, own_ts, t)?;
    let te = t - echo;
    for j in (0..3).filter(|&j| j != i) {
        let e = known(f, store, coeffs.set(parity(te))[j], j, floor_even(te), t)?;
        x = x.add(f, &e)?;
    }
    Ok(x)
}

/// Star relay: the sum of what it heard in the previous slot.
pub fn star_relay_encode(f: &GaloisField, heard: &[&Sym]) -> Result<Sym> {
    let mut acc = Sym::zero(f);
    for x in heard {
        acc = acc.add(f, x)?;
    }
    Ok(acc)
}

/// Line-star arm relay: same recursion as a line relay, with the center as
/// one neighbour and the arm source as the other.
pub fn linestar_relay_encode_sync(f: &GaloisField, source_prev: &Sym, center_prev: &Sym, own_prev2: &Sym) -> Result<Sym> {
    line_relay_encode_sync(f, source_prev, center_prev, own_prev2)
}

/// `sum_o k_o W_o(2 floor((t - lag[o]) / 2))` with set `(t - lag[o]) mod 2`:
/// the closed form of the star center (`lag = [1, 1, 1]`) and of the
/// line-star arm relay (`lag = [1, 2, 2]`).
pub fn star_closed_form(f: &GaloisField, t: i64, lag: [i64; 3], coeffs: &CoeffTriplets, msgs: &MessageTable) -> Result<Sym> {
    let mut acc = Sym::zero(f);
    for (o, &d) in lag.iter().enumerate() {
        let s = t - d;
        let ts = floor_even(s);
        if ts >= 0 {
            acc = acc.add(f, &Sym::message(f, coeffs.set(parity(s))[o], o, ts, msgs.get(o, ts))?)?;
        }
    }
    Ok(acc)
}

/// Everything a slotted run produced.
#[derive(Debug, Clone)]
pub struct SyncRun {
    /// `x[node][t]`, nodes 0-based in topology order.
    pub x: Vec<Vec<Sym>>,
    /// Slot at which (receiving node, origin, timestamp) was decoded.
    pub decoded: BTreeMap<(usize, usize, i64), i64>,
    /// Messages generated: (origin, timestamp, value).
    pub generated: Vec<(usize, i64, FieldElement)>,
    /// Decoded values that disagreed with the generated ones.
    pub mismatches: usize,
}

impl SyncRun {
    /// Largest decode delay over all messages delivered to `nodes`.
    pub fn max_delay(&self) -> i64 {
        self.decoded
            .iter()
            .map(|(&(_, _, ts), &slot)| slot - ts)
            .max()
            .unwrap_or(0)
    }
}

/// Receiving state of one source in a slotted run.
struct SyncSink {
    node: usize,
    origin: usize,
    store: MessageStore,
    decoder: Decoder,
}

impl SyncSink {
    fn new(f: GaloisField, node: usize, origin: usize, origins: usize) -> Self {
        SyncSink {
            node,
            origin,
            store: MessageStore::new(f, origins, None),
            decoder: Decoder::new(),
        }
    }

    fn hear(&mut self, sym: &Sym, slot: i64, run: &mut SyncRun) -> Result<()> {
        let eq = Equation {
            terms: sym
                .terms
                .iter()
                .map(|(&(origin, seq), &coeff)| Term { origin, seq, coeff })
                .collect(),
            rhs: sym.value,
        };
        for (o, ts) in self.decoder.add(eq, &mut self.store)? {
            run.decoded.insert((self.node, o, ts), slot);
        }
        Ok(())
    }
}

fn check(run: &mut SyncRun, sinks: &[SyncSink]) {
    for &(o, ts, v) in &run.generated {
        for s in sinks.iter().filter(|s| s.origin != o) {
            if let Ok(Some(got)) = s.store.get(o, ts) {
                if got != v {
                    run.mismatches += 1;
                }
            }
        }
    }
}

/// Two-way line `1 - 2 - ... - m` with sources at both ends, run for
/// `horizon` slots. Nodes are indexed 0..m.
pub fn run_sync_line(f: &GaloisField, m: usize, horizon: i64, coeffs: &LineCoeffs, msgs: &MessageTable) -> Result<SyncRun> {
    if m < 2 {
        return Err(Error::Config("a line needs at least two nodes".into()));
    }
    let mut run = SyncRun {
        x: vec![Vec::new(); m],
        decoded: BTreeMap::new(),
        generated: Vec::new(),
        mismatches: 0,
    };
    let mut sinks = [SyncSink::new(*f, 0, 0, 2), SyncSink::new(*f, m - 1, 1, 2)];
    let zero = Sym::zero(f);
    for t in 0..horizon {
        // Deliveries from slot t - 1 happen before anyone encodes at t.
        if t > 0 {
            let from_right = run.x[1][t as usize - 1].clone();
            sinks[0].hear(&from_right, t, &mut run)?;
            let from_left = run.x[m - 2][t as usize - 1].clone();
            sinks[1].hear(&from_left, t, &mut run)?;
        }
        for (s, o) in sinks.iter_mut().zip([0, 1]) {
            s.store.insert(o, t, msgs.get(o, t));
            run.generated.push((o, t, msgs.get(o, t)));
        }
        let prev = |v: usize, back: i64| -> &Sym {
            if t - back >= 0 {
                &run.x[v][(t - back) as usize]
            } else {
                &zero
            }
        };
        let mut row = Vec::with_capacity(m);
        for v in 0..m {
            let x = if v == 0 {
                line_source_encode_sync(f, 1, m, t, &sinks[0].store, coeffs)?
            } else if v == m - 1 {
                line_source_encode_sync(f, m, m, t, &sinks[1].store, coeffs)?
            } else {
                line_relay_encode_sync(f, prev(v - 1, 1), prev(v + 1, 1), prev(v, 2))?
            };
            row.push(x);
        }
        for (v, x) in row.into_iter().enumerate() {
            run.x[v].push(x);
        }
    }
    check(&mut run, &sinks);
    Ok(run)
}

/// Star: sources at nodes 0, 1, 2, center at node 3.
pub fn run_sync_star(f: &GaloisField, horizon: i64, coeffs: &CoeffTriplets, msgs: &MessageTable, echo: i64) -> Result<SyncRun> {
    let topo = SyncTopology {
        neighbours: vec![vec![3], vec![3], vec![3], vec![0, 1, 2]],
        relays: vec![(3, RelayRule::Sum)],
        echo: [echo; 3],
    };
    run_sync_tree(f, horizon, coeffs, msgs, &topo)
}

/// Line-star: sources at nodes 0, 1, 2; center at node 3 next to sources 1
/// and 2; arm relay at node 4 between source 0 and the center.
pub fn run_sync_linestar(f: &GaloisField, horizon: i64, coeffs: &CoeffTriplets, msgs: &MessageTable, echo_arm: i64, echo_star: i64) -> Result<SyncRun> {
    let topo = SyncTopology {
        neighbours: vec![vec![4], vec![3], vec![3], vec![4, 1, 2], vec![0, 3]],
        relays: vec![(3, RelayRule::Sum), (4, RelayRule::Line)],
        echo: [echo_arm, echo_star, echo_star],
    };
    run_sync_tree(f, horizon, coeffs, msgs, &topo)
}

#[derive(Debug, Clone, Copy)]
enum RelayRule {
    /// Sum of every neighbour's previous symbol.
    Sum,
    /// Two neighbours' previous symbols plus its own from two slots back.
    Line,
}

struct SyncTopology {
    neighbours: Vec<Vec<usize>>,
    relays: Vec<(usize, RelayRule)>,
    echo: [i64; 3],
}

fn run_sync_tree(f: &GaloisField, horizon: i64, coeffs: &CoeffTriplets, msgs: &MessageTable, topo: &SyncTopology) -> Result<SyncRun> {
    let n = topo.neighbours.len();
    let mut run = SyncRun {
        x: vec![Vec::new(); n],
        decoded: BTreeMap::new(),
        generated: Vec::new(),
        mismatches: 0,
    };
    let mut sinks: Vec<SyncSink> = (0..3).map(|o| SyncSink::new(*f, o, o, 3)).collect();
    let relay_rule: BTreeMap<usize, RelayRule> = topo.relays.iter().copied().collect();
    let seen: BTreeSet<usize> = (0..3).collect();
    let zero = Sym::zero(f);
    for t in 0..horizon {
        if t > 0 {
            for s in sinks.iter_mut() {
                for &nb in &topo.neighbours[s.node] {
                    if !seen.contains(&nb) {
                        let heard = run.x[nb][t as usize - 1].clone();
                        s.hear(&heard, t, &mut run)?;
                    }
                }
            }
        }
        if t % 2 == 0 {
            for s in sinks.iter_mut() {
                let v = msgs.get(s.origin, t);
                s.store.insert(s.origin, t, v);
                run.generated.push((s.origin, t, v));
            }
        }
        let prev = |v: usize, back: i64| -> &Sym {
            if t - back >= 0 {
                &run.x[v][(t - back) as usize]
            } else {
                &zero
            }
        };
        let mut row = Vec::with_capacity(n);
        for v in 0..n {
            let x = match relay_rule.get(&v) {
                None => star_source_encode(f, v, t, &sinks[v].store, coeffs, topo.echo[v])?,
                Some(RelayRule::Sum) => {
                    let heard: Vec<&Sym> = topo.neighbours[v].iter().map(|&u| prev(u, 1)).collect();
                    star_relay_encode(f, &heard)?
                }
                Some(RelayRule::Line) => {
                    let nb = &topo.neighbours[v];
                    linestar_relay_encode_sync(f, prev(nb[0], 1), prev(nb[1], 1), prev(v, 2))?
                }
            };
            row.push(x);
        }
        for (v, x) in row.into_iter().enumerate() {
            run.x[v].push(x);
        }
    }
    check(&mut run, &sinks);
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::choose_triplets;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table(f: &GaloisField, origins: usize, len: usize, seed: u64) -> MessageTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        MessageTable {
            table: (0..origins)
                .map(|_| (0..len).map(|_| f.element(rng.gen_range(0..f.order())).unwrap()).collect())
                .collect(),
        }
    }

    #[test]
    fn line_relays_match_closed_form() {
        let f = GaloisField::new(8).unwrap();
        let c = LineCoeffs { k: [f.element(3).unwrap(), f.element(7).unwrap()] };
        let msgs = table(&f, 2, 40, 1);
        let run = run_sync_line(&f, 6, 40, &c, &msgs).unwrap();
        for r in 2..6 {
            for t in 0..40 {
                let want = line_closed_form(&f, r, 6, t, &c, &msgs).unwrap();
                assert_eq!(run.x[r - 1][t as usize], want, "relay {r} slot {t}");
            }
        }
        assert_eq!(run.max_delay(), 5);
        assert_eq!(run.mismatches, 0);
    }

    #[test]
    fn star_center_closed_form_and_delay() {
        let f = GaloisField::new(8).unwrap();
        let c = choose_triplets(&f).unwrap();
        let msgs = table(&f, 3, 40, 2);
        let run = run_sync_star(&f, 40, &c, &msgs, 3).unwrap();
        for t in 0..40 {
            let want = star_closed_form(&f, t, [1, 1, 1], &c, &msgs).unwrap();
            assert_eq!(run.x[3][t as usize], want, "slot {t}");
        }
        assert_eq!(run.max_delay(), 3);
        assert_eq!(run.mismatches, 0);
    }

    #[test]
    fn star_echo_two_is_not_causal() {
        let f = GaloisField::new(8).unwrap();
        let c = choose_triplets(&f).unwrap();
        let msgs = table(&f, 3, 20, 3);
        assert!(matches!(run_sync_star(&f, 20, &c, &msgs, 2), Err(Error::Protocol(_))));
    }

    #[test]
    fn linestar_relay_closed_form() {
        let f = GaloisField::new(8).unwrap();
        let c = choose_triplets(&f).unwrap();
        let msgs = table(&f, 3, 60, 4);
        let run = run_sync_linestar(&f, 60, &c, &msgs, 4, 3).unwrap();
        for t in 0..60 {
            let want = star_closed_form(&f, t, [1, 2, 2], &c, &msgs).unwrap();
            assert_eq!(run.x[4][t as usize], want, "slot {t}");
        }
        assert_eq!(run.max_delay(), 4);
        assert_eq!(run.mismatches, 0);
    }
}
