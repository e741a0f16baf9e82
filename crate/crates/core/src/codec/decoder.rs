//! Incremental decoding of received linear combinations.
//!
//! Every received packet becomes an equation over messages identified by
//! (origin, sequence). Known messages are substituted, single-unknown
//! equations are solved directly, and two equations over the same two
//! unknowns are solved together. Each solved message is substituted into
//! the remaining equations, so chains of packets resolve as they arrive.

use crate::error::{Error, Result};
use crate::field::{FieldElement, GaloisField};

use super::store::MessageStore;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Term {
    pub origin: usize,
    pub seq: i64,
    pub coeff: FieldElement,
}

/// `sum(coeff * W[origin][seq]) = rhs`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    pub terms: Vec<Term>,
    pub rhs: FieldElement,
}

#[derive(Debug, Clone, Default)]
pub struct Decoder {
    pending: Vec<Equation>,
}

fn reduce(f: &GaloisField, eq: &Equation, store: &MessageStore) -> Result<Equation> {
    let mut rhs = eq.rhs;
    let mut terms: Vec<Term> = Vec::with_capacity(eq.terms.len());
    for t in &eq.terms {
        if t.coeff.is_zero() {
            continue;
        }
        if let Some(v) = store.get(t.origin, t.seq)? {
            rhs = f.sub(rhs, f.mul(t.coeff, v)?)?;
        } else if let Some(same) = terms
            .iter_mut()
            .find(|x| x.origin == t.origin && x.seq == t.seq)
        {
            same.coeff = f.add(same.coeff, t.coeff)?;
        } else {
            terms.push(*t);
        }
    }
    terms.retain(|t| !t.coeff.is_zero());
    terms.sort_by_key(|t| (t.origin, t.seq));
    Ok(Equation { terms, rhs })
}

impl Decoder {
    pub fn new() -> Self {
        Decoder::default()
    }

    /// Equations still waiting for more information.
    pub fn pending(&self) -> usize {
        self.pending.len()
    }

    /// Add an equation and decode whatever becomes solvable. Returns the
    /// newly decoded (origin, seq) pairs in the order they were solved.
    pub fn add(&mut self, eq: Equation, store: &mut MessageStore) -> Result<Vec<(usize, i64)>> {
        let f = *store.field();
        let mut out = Vec::new();
        self.pending.push(eq);
        loop {
            let mut progress = false;
            let mut next = Vec::with_capacity(self.pending.len());
            for eq in self.pending.drain(..) {
                let r = reduce(&f, &eq, store)?;
                match r.terms.len() {
                    0 => {
                        if !r.rhs.is_zero() {
                            return Err(Error::Protocol("inconsistent equation".into()));
                        }
                    }
                    1 => {
                        let t = r.terms[0];
                        let v = f.div(r.rhs, t.coeff)?;
                        store.insert(t.origin, t.seq, v);
                        out.push((t.origin, t.seq));
                        progress = true;
                    }
                    _ => next.push(r),
                }
            }
            self.pending = next;
            if !progress {
                if let Some((i, j)) = self.find_pair(&f)? {
                    let (e1, e2) = (self.pending[i].clone(), self.pending[j].clone());
                    let (x, y) = (e1.terms[0], e1.terms[1]);
                    let (a1, b1, a2, b2) = (x.coeff, y.coeff, e2.terms[0].coeff, e2.terms[1].coeff);
                    let det = f.sub(f.mul(a1, b2)?, f.mul(a2, b1)?)?;
                    let vx = f.div(f.sub(f.mul(e1.rhs, b2)?, f.mul(e2.rhs, b1)?)?, det)?;
                    let vy = f.div(f.sub(f.mul(a1, e2.rhs)?, f.mul(a2, e1.rhs)?)?, det)?;
                    store.insert(x.origin, x.seq, vx);
                    store.insert(y.origin, y.seq, vy);
                    out.push((x.origin, x.seq));
                    out.push((y.origin, y.seq));
                    progress = true;
                }
            }
            if !progress {
                break;
            }
        }
        Ok(out)
    }

    /// Two pending equations over the same two unknowns with an invertible
    /// coefficient matrix. Exact duplicates are dropped on the way.
    fn find_pair(&mut self, f: &GaloisField) -> Result<Option<(usize, usize)>> {
        let mut i = 0;
        while i < self.pending.len() {
            let mut j = i + 1;
            while j < self.pending.len() {
                let (e1, e2) = (&self.pending[i], &self.pending[j]);
                let same = e1.terms.len() == 2
                    && e2.terms.len() == 2
                    && e1.terms[0].origin == e2.terms[0].origin
                    && e1.terms[0].seq == e2.terms[0].seq
                    && e1.terms[1].origin == e2.terms[1].origin
                    && e1.terms[1].seq == e2.terms[1].seq;
                if same {
                    let det = f.sub(
                        f.mul(e1.terms[0].coeff, e2.terms[1].coeff)?,
                        f.mul(e2.terms[0].coeff, e1.terms[1].coeff)?,
                    )?;
                    if !det.is_zero() {
                        return Ok(Some((i, j)));
                    }
                    self.pending.remove(j);
                    continue;
                }
                j += 1;
            }
            i += 1;
        }
        Ok(None)
    }
}
