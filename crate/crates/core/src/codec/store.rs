//! Per-node message store.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::{FieldElement, GaloisField};

/// Decoded messages per origin, keyed by sequence number, with a watermark:
/// the largest `n` such that every message `0..=n` is present. Negative
/// sequence numbers stand for "no message yet" and read as zero.
#[derive(Debug, Clone)]
pub struct MessageStore {
    field: GaloisField,
    msgs: Vec<BTreeMap<i64, FieldElement>>,
    watermark: Vec<i64>,
    /// Keep this many sequence numbers below the watermark; `None` keeps all.
    retention: Option<i64>,
    evicted_below: Vec<i64>,
}

impl MessageStore {
    pub fn new(field: GaloisField, origins: usize, retention: Option<i64>) -> Self {
        MessageStore {
            field,
            msgs: vec![BTreeMap::new(); origins],
            watermark: vec![-1; origins],
            retention,
            evicted_below: vec![i64::MIN; origins],
        }
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    pub fn watermark(&self, origin: usize) -> i64 {
        self.watermark[origin]
    }

    pub fn contains(&self, origin: usize, seq: i64) -> bool {
        seq < 0 || self.msgs[origin].contains_key(&seq) || seq < self.evicted_below[origin]
    }

    /// The message if known; zero for negative sequence numbers.
    pub fn get(&self, origin: usize, seq: i64) -> Result<Option<FieldElement>> {
        if seq < 0 {
            return Ok(Some(self.field.zero()));
        }
        if seq < self.evicted_below[origin] {
            return Err(Error::Protocol(format!(
                "origin {origin} message {seq} was evicted"
            )));
        }
        Ok(self.msgs[origin].get(&seq).copied())
    }

    /// Like [`get`], but an unknown message is a protocol error.
    ///
    /// [`get`]: MessageStore::get
    pub fn require(&self, origin: usize, seq: i64) -> Result<FieldElement> {
        self.get(origin, seq)?.ok_or_else(|| {
            Error::Protocol(format!("origin {origin} message {seq} not known here"))
        })
    }

    /// Store a message. Returns false if it was already present.
    pub fn insert(&mut self, origin: usize, seq: i64, value: FieldElement) -> bool {
        if seq < 0 || self.contains(origin, seq) {
            return false;
        }
        self.msgs[origin].insert(seq, value);
        let map = &self.msgs[origin];
        let mut wm = self.watermark[origin];
        while map.contains_key(&(wm + 1)) {
            wm += 1;
        }
        self.watermark[origin] = wm;
        if let Some(keep) = self.retention {
            let floor = wm - keep;
            if floor > self.evicted_below[origin] {
                self.msgs[origin] = self.msgs[origin].split_off(&floor);
                self.evicted_below[origin] = floor;
            }
        }
        true
    }

    pub fn len(&self, origin: usize) -> usize {
        self.msgs[origin].len()
    }

    pub fn is_empty(&self, origin: usize) -> bool {
        self.msgs[origin].is_empty()
    }
}
