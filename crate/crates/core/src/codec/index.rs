//! Recovering absolute sequence numbers from `w`-bit header indices.
//!
//! Headers carry sequence numbers modulo `2^w` with `w = ceil(log2(2D))`.
//! The receiver recovers the absolute value from a reference it holds,
//! inside a window of `2^w` consecutive values:
//!
//! * a message new to the receiver lies within `D - 1` of the receiver's
//!   watermark for that origin, so the window is centred on the watermark;
//! * a message the receiver must already know was, at the sender, learned
//!   from the receiver itself, so it is at most the last sequence number the
//!   receiver transmitted and at most `2D - 1` below it.
//!
//! "Nothing yet" travels as sequence number -1 (all ones); it decodes to the
//! zero message, so no extra header pattern is needed.

/// Reduce a sequence number to its `w`-bit header field.
pub fn to_index(seq: i64, w: u32) -> u32 {
    seq.rem_euclid(1i64 << w) as u32
}

/// The unique `n ≡ idx (mod 2^w)` with `lo <= n < lo + 2^w`.
fn in_window(idx: u32, lo: i64, w: u32) -> i64 {
    let m = 1i64 << w;
    lo + (i64::from(idx) - lo).rem_euclid(m)
}

/// Resolve an index that may be new to the receiver; the window is
/// `[watermark - 2^(w-1) + 1, watermark + 2^(w-1)]`.
pub fn resolve_new(idx: u32, watermark: i64, w: u32) -> i64 {
    let half = 1i64 << (w - 1);
    in_window(idx, watermark - half + 1, w)
}

/// Resolve an index the receiver is expected to know; the window is
/// `[reference - 2^w + 1, reference]`.
pub fn resolve_known(idx: u32, reference: i64, w: u32) -> i64 {
    in_window(idx, reference - (1i64 << w) + 1, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sentinel_is_minus_one() {
        for w in 1..6 {
            assert_eq!(to_index(-1, w), (1 << w) - 1);
            assert_eq!(resolve_new(to_index(-1, w), -1, w), -1);
            assert_eq!(resolve_known(to_index(-1, w), -1, w), -1);
        }
    }

    proptest! {
        #[test]
        fn new_window_round_trips(d in 1u32..17, wm in -1i64..10_000, off in 0i64..64) {
            let w = crate::codec::header::index_bits(d);
            let off = off % (2 * i64::from(d) - 1) - (i64::from(d) - 1);
            let seq = wm + off;
            prop_assert_eq!(resolve_new(to_index(seq, w), wm, w), seq);
        }

        #[test]
        fn known_window_round_trips(d in 1u32..17, r in -1i64..10_000, back in 0i64..64) {
            let w = crate::codec::header::index_bits(d);
            let seq = r - back % (2 * i64::from(d));
            prop_assert_eq!(resolve_known(to_index(seq, w), r, w), seq);
        }
    }
}
