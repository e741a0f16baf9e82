//! Asynchronous two-way line coding.
//!
//! Every node on a line `A = v0, v1, ..., vk = B` sends one packet per slot,
//! `kA * W_A[p] + kB * W_B[q]`, to both neighbours. A node forwards each
//! direction strictly in sequence: it sends the next message after the one
//! it sent last, as soon as that message is decoded, and repeats otherwise.
//! Forwarding the freshest message instead would skip messages whenever
//! delays reorder two arrivals.
//!
//! A receiver always knows the term travelling towards the sender, because
//! the sender learned it from the receiver. Subtracting it leaves exactly
//! one new message, so every packet decodes on arrival.

use crate::error::Result;
use crate::field::{FieldElement, GaloisField};

use super::header::{Header, LineHeader};
use super::index::{resolve_known, resolve_new, to_index};
use super::store::MessageStore;
use super::Tx;

/// Origin index of the two ends.
pub const END_A: usize = 0;
pub const END_B: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineRole {
    EndA,
    EndB,
    Relay,
}

/// Which side a packet came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineSide {
    /// From the neighbour closer to end A.
    TowardA,
    TowardB,
}

/// Two-way line coefficients `(k_A, k_B)`, both nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineCoeffs {
    pub k: [FieldElement; 2],
}

impl LineCoeffs {
    /// `k_A = k_B = 1`: plain XOR of the two messages.
    pub fn ones(field: &GaloisField) -> Self {
        LineCoeffs {
            k: [field.one(), field.one()],
        }
    }
}

#[derive(Debug, Clone)]
pub struct LineNode {
    role: LineRole,
    field: GaloisField,
    coeffs: LineCoeffs,
    w: u32,
    store: MessageStore,
    sent: [i64; 2],
}

impl LineNode {
    pub fn new(role: LineRole, field: GaloisField, coeffs: LineCoeffs, index_bits: u32, retention: Option<i64>) -> Self {
        LineNode {
            role,
            field,
            coeffs,
            w: index_bits,
            store: MessageStore::new(field, 2, retention),
            sent: [-1, -1],
        }
    }

    pub fn role(&self) -> LineRole {
        self.role
    }

    pub fn own_origin(&self) -> Option<usize> {
        match self.role {
            LineRole::EndA => Some(END_A),
            LineRole::EndB => Some(END_B),
            LineRole::Relay => None,
        }
    }

    pub fn store(&self) -> &MessageStore {
        &self.store
    }

    /// A source hands over its message `seq`.
    pub fn inject(&mut self, seq: i64, value: FieldElement) {
        let o = self.own_origin().expect("relays do not generate");
        self.store.insert(o, seq, value);
    }

    pub fn encode(&mut self) -> Result<Tx> {
        let mut fresh = false;
        let mut next = self.sent;
        for (o, n) in next.iter_mut().enumerate() {
            if self.store.watermark(o) > *n {
                *n += 1;
                fresh = true;
            }
        }
        let mut payload = self.field.zero();
        for (o, &n) in next.iter().enumerate() {
            let v = self.store.require(o, n)?;
            payload = self.field.add(payload, self.field.mul(self.coeffs.k[o], v)?)?;
        }
        self.sent = next;
        Ok(Tx {
            header: Header::Line(LineHeader {
                p: to_index(next[0], self.w),
                q: to_index(next[1], self.w),
            }),
            payload,
            fresh,
            seqs: next.to_vec(),
        })
    }

    /// Decode a packet; returns newly decoded (origin, seq).
    pub fn receive(&mut self, side: LineSide, header: &Header, payload: FieldElement) -> Result<Vec<(usize, i64)>> {
        let Header::Line(h) = header else {
            return Err(crate::Error::Protocol("star header on a line".into()));
        };
        let (new_o, known_o, new_idx, known_idx) = match side {
            LineSide::TowardA => (END_A, END_B, h.p, h.q),
            LineSide::TowardB => (END_B, END_A, h.q, h.p),
        };
        if Some(new_o) == self.own_origin() {
            return Err(crate::Error::Protocol("packet from beyond the line end".into()));
        }
        let known_seq = resolve_known(known_idx, self.sent[known_o], self.w);
        let known = self.store.require(known_o, known_seq)?;
        let seq = resolve_new(new_idx, self.store.watermark(new_o), self.w);
        if self.store.contains(new_o, seq) {
            return Ok(Vec::new());
        }
        let f = &self.field;
        let rest = f.sub(payload, f.mul(self.coeffs.k[known_o], known)?)?;
        let value = f.div(rest, self.coeffs.k[new_o])?;
        self.store.insert(new_o, seq, value);
        Ok(vec![(new_o, seq)])
    }
}
