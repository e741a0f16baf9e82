use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DelayKind {
    /// Independent draws from `1..=D`.
    Uniform,
    /// Every packet takes one slot.
    Fixed1,
    /// Delays taken from the list in transmission order, cycling when it
    /// runs out.
    Adversarial(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelayModel {
    pub bound: u32,
    pub kind: DelayKind,
    /// Keep packets on each directed link in sending order.
    pub fifo: bool,
}

impl DelayModel {
    pub fn fixed() -> Self {
        DelayModel {
            bound: 1,
            kind: DelayKind::Fixed1,
            fifo: false,
        }
    }

    pub fn uniform(bound: u32) -> Self {
        DelayModel {
            bound,
            kind: DelayKind::Uniform,
            fifo: false,
        }
    }

    pub fn adversarial(bound: u32, list: Vec<u32>) -> Self {
        DelayModel {
            bound,
            kind: DelayKind::Adversarial(list),
            fifo: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bound == 0 {
            return Err(Error::Config("delay bound must be at least 1".into()));
        }
        if let DelayKind::Adversarial(list) = &self.kind {
            if list.is_empty() {
                return Err(Error::Config("empty delay list".into()));
            }
            if let Some(d) = list.iter().find(|&&d| d == 0 || d > self.bound) {
                return Err(Error::Config(format!("delay {d} outside 1..={}", self.bound)));
            }
        }
        Ok(())
    }
}

/// Per-run delay source.
pub(crate) struct DelaySource<'a> {
    model: &'a DelayModel,
    pos: usize,
    last_arrival: HashMap<(usize, usize), i64>,
}

impl<'a> DelaySource<'a> {
    pub fn new(model: &'a DelayModel) -> Self {
        DelaySource {
            model,
            pos: 0,
            last_arrival: HashMap::new(),
        }
    }

    /// Arrival slot of a packet sent at `slot` over the directed link
    /// `(from, to)`.
    pub fn arrival(&mut self, rng: &mut ChaCha8Rng, slot: i64, link: (usize, usize)) -> i64 {
        let d = match &self.model.kind {
            DelayKind::Uniform => rng.gen_range(1..=self.model.bound),
            DelayKind::Fixed1 => 1,
            DelayKind::Adversarial(list) => {
                let d = list[self.pos % list.len()];
                self.pos += 1;
                d
            }
        };
        let mut at = slot + i64::from(d);
        if self.model.fifo {
            let last = self.last_arrival.entry(link).or_insert(i64::MIN);
            at = at.max(*last);
            *last = at;
        }
        at
    }
}
