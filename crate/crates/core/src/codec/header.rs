//! Packet headers and the wire format.
//!
//! Layout, most significant bit first: the index fields, then the
//! coefficient-set bit for star packets, then the block id when more than
//! one block is deployed. The payload follows as C bits and the whole packet
//! is zero-padded to a byte boundary at the tail.

use bitvec::prelude::*;

use crate::error::{Error, Result};
use crate::field::{FieldElement, GaloisField};

/// Bits per index field: `ceil(log2(2D))`.
pub fn index_bits(delay_bound: u32) -> u32 {
    assert!(delay_bound >= 1, "delay bound must be at least 1");
    ceil_log2(2 * delay_bound)
}

/// Bits for the block id: `ceil(log2(h))`, zero when h is 1.
pub fn block_bits(h: u32) -> u32 {
    assert!(h >= 1, "h must be at least 1");
    ceil_log2(h)
}

fn ceil_log2(x: u32) -> u32 {
    if x <= 1 {
        0
    } else {
        32 - (x - 1).leading_zeros()
    }
}

/// Two index fields: the message from end A and the one from end B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LineHeader {
    pub p: u32,
    pub q: u32,
}

/// Three index fields (one per source, ascending source id) and the
/// coefficient-set bit, `false` for set a.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StarHeader {
    pub p: u32,
    pub q: u32,
    pub u: u32,
    pub k: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Header {
    Line(LineHeader),
    Star(StarHeader),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HeaderKind {
    Line,
    Star,
}

impl Header {
    pub fn kind(&self) -> HeaderKind {
        match self {
            Header::Line(_) => HeaderKind::Line,
            Header::Star(_) => HeaderKind::Star,
        }
    }

    pub fn indices(&self) -> Vec<u32> {
        match *self {
            Header::Line(h) => vec![h.p, h.q],
            Header::Star(h) => vec![h.p, h.q, h.u],
        }
    }
}

/// Header width in bits for a packet kind, delay bound and block count.
pub fn header_width(kind: HeaderKind, delay_bound: u32, h: u32) -> u32 {
    let w = index_bits(delay_bound);
    let b = block_bits(h);
    match kind {
        HeaderKind::Line => 2 * w + b,
        HeaderKind::Star => 3 * w + 1 + b,
    }
}

fn push(bits: &mut BitVec<u8, Msb0>, value: u32, width: u32, what: &str) -> Result<()> {
    if width < 32 && value >> width != 0 {
        return Err(Error::Protocol(format!(
            "{what} {value} does not fit in {width} bits"
        )));
    }
    for k in (0..width).rev() {
        bits.push(value >> k & 1 == 1);
    }
    Ok(())
}

fn take(bits: &BitSlice<u8, Msb0>, pos: &mut usize, width: u32) -> Result<u32> {
    let end = *pos + width as usize;
    if end > bits.len() {
        return Err(Error::Protocol("packet truncated".into()));
    }
    let mut v = 0u32;
    for b in &bits[*pos..end] {
        v = v << 1 | u32::from(*b);
    }
    *pos = end;
    Ok(v)
}

pub fn pack_header(header: &Header, block_id: u32, delay_bound: u32, h: u32) -> Result<BitVec<u8, Msb0>> {
    let w = index_bits(delay_bound);
    let mut bits = BitVec::new();
    match *header {
        Header::Line(x) => {
            push(&mut bits, x.p, w, "index")?;
            push(&mut bits, x.q, w, "index")?;
        }
        Header::Star(x) => {
            push(&mut bits, x.p, w, "index")?;
            push(&mut bits, x.q, w, "index")?;
            push(&mut bits, x.u, w, "index")?;
            bits.push(x.k);
        }
    }
    push(&mut bits, block_id, block_bits(h), "block id")?;
    Ok(bits)
}

/// Inverse of [`pack_header`]; returns the header, block id and bits read.
pub fn unpack_header(bits: &BitSlice<u8, Msb0>, kind: HeaderKind, delay_bound: u32, h: u32) -> Result<(Header, u32, usize)> {
    let w = index_bits(delay_bound);
    let mut pos = 0;
    let header = match kind {
        HeaderKind::Line => Header::Line(LineHeader {
            p: take(bits, &mut pos, w)?,
            q: take(bits, &mut pos, w)?,
        }),
        HeaderKind::Star => {
            let p = take(bits, &mut pos, w)?;
            let q = take(bits, &mut pos, w)?;
            let u = take(bits, &mut pos, w)?;
            let k = take(bits, &mut pos, 1)? == 1;
            Header::Star(StarHeader { p, q, u, k })
        }
    };
    let block = take(bits, &mut pos, block_bits(h))?;
    Ok((header, block, pos))
}

/// What travels over a wireless link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Packet {
    pub header: Header,
    pub block_id: u32,
    pub payload: FieldElement,
}

/// Header, then payload, zero-padded to whole bytes.
pub fn pack_packet(pkt: &Packet, delay_bound: u32, h: u32) -> Result<Vec<u8>> {
    let mut bits = pack_header(&pkt.header, pkt.block_id, delay_bound, h)?;
    push(&mut bits, pkt.payload.value(), u32::from(pkt.payload.bits()), "payload")?;
    bits.set_uninitialized(false);
    Ok(bits.into_vec())
}

pub fn unpack_packet(bytes: &[u8], kind: HeaderKind, delay_bound: u32, h: u32, field: &GaloisField) -> Result<Packet> {
    let bits = bytes.view_bits::<Msb0>();
    let (header, block_id, mut pos) = unpack_header(bits, kind, delay_bound, h)?;
    let value = take(bits, &mut pos, u32::from(field.bits()))?;
    if bits[pos..].any() {
        return Err(Error::Protocol("nonzero padding".into()));
    }
    if (bits.len() - pos) >= 8 {
        return Err(Error::Protocol("trailing bytes after packet".into()));
    }
    Ok(Packet {
        header,
        block_id,
        payload: field.element(value)?,
    })
}

/// Lowercase hex of the header bits, zero-padded to whole bytes.
pub fn header_hex(header: &Header, block_id: u32, delay_bound: u32, h: u32) -> Result<String> {
    let mut bits = pack_header(header, block_id, delay_bound, h)?;
    bits.set_uninitialized(false);
    Ok(to_hex(&bits.into_vec()))
}

/// Lowercase hex of a payload's C bits, zero-padded at the tail.
pub fn payload_hex(x: FieldElement) -> String {
    let mut bits: BitVec<u8, Msb0> = BitVec::new();
    push(&mut bits, x.value(), u32::from(x.bits()), "payload").expect("element fits its field");
    bits.set_uninitialized(false);
    to_hex(&bits.into_vec())
}

pub fn to_hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
