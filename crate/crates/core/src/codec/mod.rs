//! Coding schemes for the three building blocks: the two-way line, the star
//! and the line-star.
//!
//! [`sync`] holds the slotted recursions for unit delays; they need no
//! headers. [`line`] and [`tree`] hold the header-driven versions that
//! tolerate any delay in `1..=D`.

pub mod decoder;
pub mod header;
pub mod index;
pub mod line;
pub mod store;
pub mod sync;
pub mod tree;

pub use decoder::{Decoder, Equation, Term};
pub use header::{
    header_hex, header_width, pack_header, pack_packet, payload_hex, unpack_header,
    unpack_packet, Header, HeaderKind, LineHeader, Packet, StarHeader,
};
pub use line::{LineCoeffs, LineNode, LineRole, LineSide};
pub use store::MessageStore;
pub use tree::{TreeLink, TreeNode, TreeRole};

use crate::field::FieldElement;

/// One transmission produced by a node's encoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tx {
    pub header: Header,
    pub payload: FieldElement,
    /// Carries something the node has not sent before. Repeats sent only
    /// to fill a slot are not fresh.
    pub fresh: bool,
    /// Absolute sequence numbers behind the header indices, per origin.
    /// Kept for traces and checks; receivers only see the header.
    pub seqs: Vec<i64>,
}
