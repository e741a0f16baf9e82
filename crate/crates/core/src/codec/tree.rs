//! Asynchronous star and line-star coding.
//!
//! A block is a tree joining three sources. Its center is where the three
//! source-to-source paths meet; each arm runs from the center out to one
//! source (the terminal). Origins are numbered 0..3 by ascending source id.
//!
//! * Terminals send `k_s W_s[own] + sum over o != s of k_o W_o[watermark_o]`
//!   every slot with the coefficient set alternating a, b, a, ... Their own
//!   messages appear every other slot, so each message goes out once with
//!   each set.
//! * The center decodes everything and sends one combination of all three
//!   origins per slot, alternating sets. Each origin's index advances by one
//!   at most every other slot, so every index it sends appears in two
//!   consecutive slots: once with set a, once with set b.
//! * An arm relay forwards the center's combinations outward unchanged, in
//!   the order the center produced them, and carries its own arm's origin
//!   inward in the same packet. It also decodes the combinations itself so
//!   it can strip the terminal's echo terms.
//!
//! Whatever a neighbour includes about origins arriving from our side came
//! from us, so at most two unknowns remain per packet, and the alternating
//! coefficient sets make every pair of them solvable.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::field::{CoeffTriplets, FieldElement, GaloisField};

use super::decoder::{Decoder, Equation, Term};
use super::header::{Header, StarHeader};
use super::index::{resolve_known, resolve_new, to_index};
use super::store::MessageStore;
use super::Tx;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeRole {
    /// The source at the end of an arm.
    Terminal { origin: usize },
    /// The branch point; `own` is set when the center is itself a source.
    Center { own: Option<usize> },
    /// A relay on the arm leading to `origin`.
    Arm { origin: usize },
}

/// Where a packet came from, relative to the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeLink {
    /// For a terminal: its only neighbour.
    Up,
    /// For the center: the first node of the arm leading to `origin`.
    Arm(usize),
    /// For an arm relay: the neighbour closer to the center.
    Inner,
    /// For an arm relay: the neighbour closer to the terminal.
    Outer,
}

type ComboKey = (i64, i64, bool);

#[derive(Debug, Clone)]
pub struct TreeNode {
    role: TreeRole,
    field: GaloisField,
    coeffs: CoeffTriplets,
    w: u32,
    store: MessageStore,
    decoder: Decoder,
    /// Center and terminal alternate sets each slot.
    phase: bool,
    /// Center: index last sent per origin and the slot it last changed.
    cur: [i64; 3],
    changed_at: [i64; 3],
    /// Arm relay: index sent last for the arm origin.
    sent_own: i64,
    /// Arm relay: combinations of the two outer origins seen so far.
    combos: HashMap<ComboKey, FieldElement>,
    queue: BTreeSet<(i64, i64, i64, bool)>,
    last_combo: ComboKey,
    /// Arm relay: largest index forwarded per outer origin.
    sent_hi: [i64; 3],
    /// Arm relay and terminal: largest index heard from the center side
    /// per origin. New indices are resolved around it; the decoded
    /// watermark can trail it by more than the index window while
    /// equations wait for a partner.
    heard_hi: [i64; 3],
    slot: i64,
}

impl TreeNode {
    pub fn new(role: TreeRole, field: GaloisField, coeffs: CoeffTriplets, index_bits: u32, retention: Option<i64>) -> Self {
        TreeNode {
            role,
            field,
            coeffs,
            w: index_bits,
            store: MessageStore::new(field, 3, retention),
            decoder: Decoder::new(),
            phase: false,
            cur: [-1; 3],
            changed_at: [i64::MIN / 2; 3],
            sent_own: -1,
            combos: HashMap::new(),
            queue: BTreeSet::new(),
            last_combo: (-1, -1, false),
            sent_hi: [-1; 3],
            heard_hi: [-1; 3],
            slot: 0,
        }
    }

    pub fn role(&self) -> TreeRole {
        self.role
    }

    pub fn own_origin(&self) -> Option<usize> {
        match self.role {
            TreeRole::Terminal { origin } => Some(origin),
            TreeRole::Center { own } => own,
            TreeRole::Arm { .. } => None,
        }
    }

    pub fn store(&self) -> &MessageStore {
        &self.store
    }

    pub fn inject(&mut self, seq: i64, value: FieldElement) {
        let o = self.own_origin().expect("relays do not generate");
        self.store.insert(o, seq, value);
    }

    fn others(origin: usize) -> [usize; 2] {
        match origin {
            0 => [1, 2],
            1 => [0, 2],
            _ => [0, 1],
        }
    }

    fn combine(&self, k: bool, seqs: [i64; 3]) -> Result<FieldElement> {
        let f = &self.field;
        let set = self.coeffs.set(k);
        let mut acc = f.zero();
        for o in 0..3 {
            let v = self.store.require(o, seqs[o])?;
            acc = f.add(acc, f.mul(set[o], v)?)?;
        }
        Ok(acc)
    }

    /// Value of `k_j W_j[nj] + k_l W_l[nl]` for the two origins other than
    /// `origin`.
    fn pair_value(&self, origin: usize, key: ComboKey) -> Result<FieldElement> {
        if let Some(v) = self.combos.get(&key) {
            return Ok(*v);
        }
        let [j, l] = Self::others(origin);
        let set = self.coeffs.set(key.2);
        let f = &self.field;
        let vj = self.store.require(j, key.0)?;
        let vl = self.store.require(l, key.1)?;
        Ok(f.add(f.mul(set[j], vj)?, f.mul(set[l], vl)?)?)
    }

    fn star_header(&self, seqs: [i64; 3], k: bool) -> Header {
        Header::Star(StarHeader {
            p: to_index(seqs[0], self.w),
            q: to_index(seqs[1], self.w),
            u: to_index(seqs[2], self.w),
            k,
        })
    }

    pub fn encode(&mut self) -> Result<Tx> {
        let t = self.slot;
        self.slot += 1;
        match self.role {
            TreeRole::Terminal { origin } => {
                let k = self.phase;
                self.phase = !self.phase;
                let mut seqs = [0i64; 3];
                for (o, s) in seqs.iter_mut().enumerate() {
                    *s = self.store.watermark(o);
                }
                let own = seqs[origin];
                let fresh = own >= 0 && own > self.cur[origin] || t - self.changed_at[origin] <= 1;
                if own > self.cur[origin] {
                    self.cur[origin] = own;
                    self.changed_at[origin] = t;
                }
                let payload = self.combine(k, seqs)?;
                Ok(Tx {
                    header: self.star_header(seqs, k),
                    payload,
                    fresh,
                    seqs: seqs.to_vec(),
                })
            }
            TreeRole::Center { .. } => {
                let k = self.phase;
                self.phase = !self.phase;
                let mut fresh = false;
                for o in 0..3 {
                    if self.store.watermark(o) > self.cur[o] && t - self.changed_at[o] >= 2 {
                        self.cur[o] += 1;
                        self.changed_at[o] = t;
                    }
                    fresh |= t - self.changed_at[o] <= 1;
                }
                let seqs = self.cur;
                let payload = self.combine(k, seqs)?;
                Ok(Tx {
                    header: self.star_header(seqs, k),
                    payload,
                    fresh,
                    seqs: seqs.to_vec(),
                })
            }
            TreeRole::Arm { origin } => {
                let [j, l] = Self::others(origin);
                let mut fresh = false;
                let key = match self.queue.pop_first() {
                    Some((_, nj, nl, k)) => {
                        fresh = true;
                        self.sent_hi[j] = self.sent_hi[j].max(nj);
                        self.sent_hi[l] = self.sent_hi[l].max(nl);
                        (nj, nl, k)
                    }
                    None => self.last_combo,
                };
                self.last_combo = key;
                if self.store.watermark(origin) > self.sent_own {
                    self.sent_own += 1;
                    fresh = true;
                }
                let f = self.field;
                let own = self.store.require(origin, self.sent_own)?;
                let own_term = f.mul(self.coeffs.set(key.2)[origin], own)?;
                let payload = f.add(own_term, self.pair_value(origin, key)?)?;
                let mut seqs = [0i64; 3];
                seqs[origin] = self.sent_own;
                seqs[j] = key.0;
                seqs[l] = key.1;
                Ok(Tx {
                    header: self.star_header(seqs, key.2),
                    payload,
                    fresh,
                    seqs: seqs.to_vec(),
                })
            }
        }
    }

    pub fn receive(&mut self, link: TreeLink, header: &Header, payload: FieldElement) -> Result<Vec<(usize, i64)>> {
        let Header::Star(h) = *header else {
            return Err(Error::Protocol("line header in a star block".into()));
        };
        let idx = [h.p, h.q, h.u];
        let set = *self.coeffs.set(h.k);
        let f = self.field;
        match (self.role, link) {
            (TreeRole::Center { .. }, TreeLink::Arm(s)) => {
                // Only origin s is new; the other two came from us.
                let mut rest = payload;
                for o in Self::others(s) {
                    let n = resolve_known(idx[o], self.cur[o], self.w);
                    rest = f.sub(rest, f.mul(set[o], self.store.require(o, n)?)?)?;
                }
                self.take_single(s, idx[s], rest, set[s])
            }
            (TreeRole::Arm { origin }, TreeLink::Outer) => {
                let [j, l] = Self::others(origin);
                let key = (
                    resolve_known(idx[j], self.sent_hi[j], self.w),
                    resolve_known(idx[l], self.sent_hi[l], self.w),
                    h.k,
                );
                let rest = f.sub(payload, self.pair_value(origin, key)?)?;
                self.take_single(origin, idx[origin], rest, set[origin])
            }
            (TreeRole::Arm { origin }, TreeLink::Inner) => {
                let [j, l] = Self::others(origin);
                // The center steps each index at most every other slot, so
                // its echo of our origin can trail sent_own by more than the
                // window after a burst. Consecutive echoes stay close.
                let n_own = resolve_new(idx[origin], self.heard_hi[origin], self.w);
                self.heard_hi[origin] = self.heard_hi[origin].max(n_own);
                let own = self.store.require(origin, n_own)?;
                let combo = f.sub(payload, f.mul(set[origin], own)?)?;
                let nj = self.resolve_heard(j, idx[j]);
                let nl = self.resolve_heard(l, idx[l]);
                let key = (nj, nl, h.k);
                if (nj >= 0 || nl >= 0) && !self.combos.contains_key(&key) {
                    self.combos.insert(key, combo);
                    self.queue.insert((nj + nl, nj, nl, h.k));
                }
                let eq = Equation {
                    terms: vec![
                        Term { origin: j, seq: nj, coeff: set[j] },
                        Term { origin: l, seq: nl, coeff: set[l] },
                    ],
                    rhs: combo,
                };
                self.decoder.add(eq, &mut self.store)
            }
            (TreeRole::Terminal { origin }, TreeLink::Up) => {
                let [j, l] = Self::others(origin);
                let n_own = resolve_known(idx[origin], self.store.watermark(origin), self.w);
                let own = self.store.require(origin, n_own)?;
                let rhs = f.sub(payload, f.mul(set[origin], own)?)?;
                let nj = self.resolve_heard(j, idx[j]);
                let nl = self.resolve_heard(l, idx[l]);
                let eq = Equation {
                    terms: vec![
                        Term { origin: j, seq: nj, coeff: set[j] },
                        Term { origin: l, seq: nl, coeff: set[l] },
                    ],
                    rhs,
                };
                self.decoder.add(eq, &mut self.store)
            }
            (role, link) => Err(Error::Protocol(format!(
                "{role:?} cannot receive over {link:?}"
            ))),
        }
    }

    fn resolve_heard(&mut self, o: usize, idx: u32) -> i64 {
        let reference = self.heard_hi[o].max(self.store.watermark(o));
        let n = resolve_new(idx, reference, self.w);
        self.heard_hi[o] = self.heard_hi[o].max(n);
        n
    }

    fn take_single(&mut self, o: usize, idx: u32, rest: FieldElement, coeff: FieldElement) -> Result<Vec<(usize, i64)>> {
        let n = resolve_new(idx, self.store.watermark(o), self.w);
        if self.store.contains(o, n) {
            return Ok(Vec::new());
        }
        let v = self.field.div(rest, coeff)?;
        self.store.insert(o, n, v);
        // A new message may unlock pending equations at an arm relay.
        let mut out = vec![(o, n)];
        if self.decoder.pending() > 0 {
            let none = Equation {
                terms: Vec::new(),
                rhs: self.field.zero(),
            };
            out.extend(self.decoder.add(none, &mut self.store)?);
        }
        Ok(out)
    }
}
