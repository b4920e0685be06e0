//! XOR self-encryption of packet blocks.
//!
//! Every processed packet is the XOR of all original packets except its own
//! index, `P_n = (I_1 ^ ... ^ I_N) ^ I_n`. For even `N` the generator matrix
//! (all ones minus the identity) is its own inverse over GF(2), so decoding
//! is the same transform. Fewer than `N - 1` processed packets reveal nothing
//! about any original packet; `N - 1` reveal exactly one.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("block has {0} packets; encoding needs an even count, call pad_to_even first")]
    OddPacketCount(usize),
    #[error("block is empty")]
    Empty,
    #[error("packet {index} has {found} bits, expected {expected}")]
    LengthMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("packets must carry at least one bit")]
    ZeroLength,
    #[error("packet index {index} outside 1..={n_total}")]
    IndexOutOfRange { index: usize, n_total: usize },
    #[error("invalid bit character {0:?}")]
    InvalidBit(char),
    #[error("{found} bytes cannot hold a {bit_len}-bit packet")]
    ByteLength { bit_len: usize, found: usize },
}

/// A packet of `bit_len` bits stored MSB-first in 64-bit words.
///
/// Bit `i` lives in word `i / 64` at position `63 - i % 64`; bits past
/// `bit_len` in the last word are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitPacket {
    words: Vec<u64>,
    bit_len: usize,
}

impl BitPacket {
    pub fn zeros(bit_len: usize) -> Self {
        BitPacket {
            words: vec![0; bit_len.div_ceil(64)],
            bit_len,
        }
    }

    /// Parses a string of `'0'`/`'1'` characters, leftmost character first.
    pub fn from_bit_str(bits: &str) -> Result<Self, CodecError> {
        let mut packet = BitPacket::zeros(bits.chars().count());
        for (i, c) in bits.chars().enumerate() {
            match c {
                '0' => {}
                '1' => packet.set(i, true),
                other => return Err(CodecError::InvalidBit(other)),
            }
        }
        Ok(packet)
    }

    /// Builds a packet from MSB-first bytes. Extra trailing bits in the last
    /// byte are ignored.
    pub fn from_bytes(bytes: &[u8], bit_len: usize) -> Result<Self, CodecError> {
        if bytes.len() != bit_len.div_ceil(8) {
            return Err(CodecError::ByteLength {
                bit_len,
                found: bytes.len(),
            });
        }
        let mut packet = BitPacket::zeros(bit_len);
        for (w, chunk) in packet.words.iter_mut().zip(bytes.chunks(8)) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            *w = u64::from_be_bytes(buf);
        }
        packet.clear_tail();
        Ok(packet)
    }

    /// MSB-first bytes, `ceil(bit_len / 8)` of them.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out: Vec<u8> = self.words.iter().flat_map(|w| w.to_be_bytes()).collect();
        out.truncate(self.bit_len.div_ceil(8));
        out
    }

    pub fn random<R: Rng + ?Sized>(bit_len: usize, rng: &mut R) -> Self {
        let mut packet = BitPacket {
            words: (0..bit_len.div_ceil(64)).map(|_| rng.random()).collect(),
            bit_len,
        };
        packet.clear_tail();
        packet
    }

    pub fn bit_len(&self) -> usize {
        self.bit_len
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.bit_len, "bit {i} out of range");
        self.words[i / 64] >> (63 - i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.bit_len, "bit {i} out of range");
        let mask = 1u64 << (63 - i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn xor_assign(&mut self, other: &BitPacket) {
        debug_assert_eq!(self.bit_len, other.bit_len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    fn clear_tail(&mut self) {
        let rem = self.bit_len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= !0u64 << (64 - rem);
            }
        }
    }
}

impl fmt::Debug for BitPacket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bit_len <= 64 {
            let s: String = (0..self.bit_len)
                .map(|i| if self.get(i) { '1' } else { '0' })
                .collect();
            write!(f, "BitPacket({s})")
        } else {
            write!(f, "BitPacket({} bits)", self.bit_len)
        }
    }
}

/// An ordered block of `N` equal-length packets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketBlock {
    packets: Vec<BitPacket>,
    bit_len: usize,
}

impl PacketBlock {
    pub fn new(packets: Vec<BitPacket>) -> Result<Self, CodecError> {
        let bit_len = packets.first().ok_or(CodecError::Empty)?.bit_len;
        if bit_len == 0 {
            return Err(CodecError::ZeroLength);
        }
        if let Some((index, p)) = packets
            .iter()
            .enumerate()
            .find(|(_, p)| p.bit_len != bit_len)
        {
            return Err(CodecError::LengthMismatch {
                index,
                expected: bit_len,
                found: p.bit_len,
            });
        }
        Ok(PacketBlock { packets, bit_len })
    }

    pub fn from_bit_strs(bits: &[&str]) -> Result<Self, CodecError> {
        PacketBlock::new(
            bits.iter()
                .map(|s| BitPacket::from_bit_str(s))
                .collect::<Result<_, _>>()?,
        )
    }

    pub fn random<R: Rng + ?Sized>(n: usize, bit_len: usize, rng: &mut R) -> Self {
        assert!(n >= 1 && bit_len >= 1);
        PacketBlock {
            packets: (0..n).map(|_| BitPacket::random(bit_len, rng)).collect(),
            bit_len,
        }
    }

    pub fn n_count(&self) -> usize {
        self.packets.len()
    }

    pub fn bit_len(&self) -> usize {
        self.bit_len
    }

    pub fn packets(&self) -> &[BitPacket] {
        &self.packets
    }

    pub fn into_packets(self) -> Vec<BitPacket> {
        self.packets
    }
}

/// Padding record for blocks whose original size was odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodecMeta {
    pub original_n: usize,
    pub padded: bool,
    pub pad_seed: Option<u64>,
}

/// Work performed by one encode call, counted in whole-packet XORs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct XorCount {
    pub packet_xors: usize,
}

/// Encodes an even-sized block. See [`encode_counted`].
pub fn encode(block: &PacketBlock) -> Result<PacketBlock, CodecError> {
    encode_counted(block).map(|(out, _)| out)
}

/// Encodes and reports the number of packet XORs used: `N - 1` to form the
/// running total and `N` to strip each packet back out.
pub fn encode_counted(block: &PacketBlock) -> Result<(PacketBlock, XorCount), CodecError> {
    let n = block.n_count();
    if n % 2 == 1 {
        return Err(CodecError::OddPacketCount(n));
    }
    let mut count = XorCount::default();
    let mut total = block.packets[0].clone();
    for p in &block.packets[1..] {
        total.xor_assign(p);
        count.packet_xors += 1;
    }
    let packets = block
        .packets
        .iter()
        .map(|p| {
            let mut out = total.clone();
            out.xor_assign(p);
            count.packet_xors += 1;
            out
        })
        .collect();
    Ok((
        PacketBlock {
            packets,
            bit_len: block.bit_len,
        },
        count,
    ))
}

/// Inverse of [`encode`]; the transform is an involution for even `N`.
pub fn decode(block: &PacketBlock) -> Result<PacketBlock, CodecError> {
    encode(block)
}

/// Appends one seeded random packet when `N` is odd.
pub fn pad_to_even(block: &PacketBlock, seed: u64) -> (PacketBlock, CodecMeta) {
    let original_n = block.n_count();
    if original_n.is_multiple_of(2) {
        return (
            block.clone(),
            CodecMeta {
                original_n,
                padded: false,
                pad_seed: None,
            },
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut packets = block.packets.clone();
    packets.push(BitPacket::random(block.bit_len, &mut rng));
    (
        PacketBlock {
            packets,
            bit_len: block.bit_len,
        },
        CodecMeta {
            original_n,
            padded: true,
            pad_seed: Some(seed),
        },
    )
}

/// Drops the pad packet added by [`pad_to_even`] from a decoded block.
pub fn strip_padding(block: PacketBlock, meta: &CodecMeta) -> PacketBlock {
    let mut packets = block.packets;
    packets.truncate(meta.original_n);
    PacketBlock {
        packets,
        bit_len: block.bit_len,
    }
}

/// Original-packet indices (1-based) an observer can solve for from the
/// given processed-packet indices of an `n_total`-packet encoding.
///
/// Solves over GF(2): the observed rows of the generator matrix are reduced
/// to echelon form and each unit vector is tested for membership in their
/// span.
pub fn recoverable_indices(
    received: &BTreeSet<usize>,
    n_total: usize,
) -> Result<BTreeSet<usize>, CodecError> {
    if n_total % 2 == 1 {
        return Err(CodecError::OddPacketCount(n_total));
    }
    if let Some(&index) = received.iter().find(|&&i| i == 0 || i > n_total) {
        return Err(CodecError::IndexOutOfRange { index, n_total });
    }
    let mut basis = Gf2Basis::new(n_total);
    for &i in received {
        basis.insert(processed_row(i - 1, n_total));
    }
    Ok((0..n_total)
        .filter(|&j| {
            let mut unit = BitRow::zeros(n_total);
            unit.flip(j);
            basis.contains(unit)
        })
        .map(|j| j + 1)
        .collect())
}

/// The original packets whose XOR equals the XOR of the given processed
/// packets. Indices are 1-based; bit `j` of the row is original `j + 1`.
///
/// # Panics
/// If an index is 0 or exceeds `n_total`.
pub fn processed_combination(processed: &[usize], n_total: usize) -> BitRow {
    let mut acc = BitRow::zeros(n_total);
    for &i in processed {
        assert!((1..=n_total).contains(&i), "processed index {i} outside 1..={n_total}");
        acc.xor_assign(&processed_row(i - 1, n_total));
    }
    acc
}

fn processed_row(i: usize, n_total: usize) -> BitRow {
    let mut row = BitRow::ones(n_total);
    row.flip(i);
    row
}

/// A row vector over GF(2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitRow {
    words: Vec<u64>,
    len: usize,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        BitRow {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut row = BitRow::zeros(len);
        for i in 0..len {
            row.flip(i);
        }
        row
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} outside row of length {}", self.len);
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }

    fn xor_assign(&mut self, other: &BitRow) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    fn leading(&self) -> Option<usize> {
        (0..self.len).find(|&i| self.get(i))
    }
}

/// Echelon basis keyed by pivot column.
struct Gf2Basis {
    rows: Vec<Option<BitRow>>,
}

impl Gf2Basis {
    fn new(len: usize) -> Self {
        Gf2Basis {
            rows: vec![None; len],
        }
    }

    fn reduce(&self, mut row: BitRow) -> BitRow {
        while let Some(p) = row.leading() {
            match &self.rows[p] {
                Some(pivot) => row.xor_assign(pivot),
                None => break,
            }
        }
        row
    }

    fn insert(&mut self, row: BitRow) {
        let row = self.reduce(row);
        if let Some(p) = row.leading() {
            self.rows[p] = Some(row);
        }
    }

    fn contains(&self, row: BitRow) -> bool {
        self.reduce(row).leading().is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(bits: &[&str]) -> PacketBlock {
        PacketBlock::from_bit_strs(bits).unwrap()
    }

    fn set(items: &[usize]) -> BTreeSet<usize> {
        items.iter().copied().collect()
    }

    #[test]
    fn encode_two_packets_swaps() {
        assert_eq!(encode(&block(&["01", "10"])).unwrap(), block(&["10", "01"]));
        assert_eq!(decode(&block(&["10", "01"])).unwrap(), block(&["01", "10"]));
    }

    #[test]
    fn encode_unit_packets() {
        let input = block(&["0001", "0010", "0100", "1000"]);
        let expected = block(&["1110", "1101", "1011", "0111"]);
        assert_eq!(encode(&input).unwrap(), expected);
        assert_eq!(decode(&expected).unwrap(), input);
    }

    #[test]
    fn encode_zero_block() {
        let zeros = block(&["0000"; 4]);
        assert_eq!(encode(&zeros).unwrap(), zeros);
    }

    #[test]
    fn encode_rejects_odd_and_mismatched() {
        assert_eq!(
            encode(&block(&["0", "1", "1"])),
            Err(CodecError::OddPacketCount(3))
        );
        assert!(matches!(
            PacketBlock::from_bit_strs(&["01", "011"]),
            Err(CodecError::LengthMismatch { index: 1, .. })
        ));
    }

    #[test]
    fn decode_inverts_random_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let original = PacketBlock::random(6, 32, &mut rng);
        assert_eq!(decode(&encode(&original).unwrap()).unwrap(), original);
    }

    #[test]
    fn recoverable_thresholds() {
        assert_eq!(recoverable_indices(&set(&[1, 2, 3]), 4).unwrap(), set(&[4]));
        assert_eq!(recoverable_indices(&set(&[1, 2]), 4).unwrap(), set(&[]));
        assert_eq!(
            recoverable_indices(&set(&[1, 2, 3, 4]), 4).unwrap(),
            set(&[1, 2, 3, 4])
        );
        assert_eq!(
            recoverable_indices(&set(&[0]), 4),
            Err(CodecError::IndexOutOfRange {
                index: 0,
                n_total: 4
            })
        );
        assert!(recoverable_indices(&set(&[5]), 4).is_err());
    }

    #[test]
    fn pad_even_block_is_untouched() {
        let b = block(&["01", "10", "11", "00"]);
        let (out, meta) = pad_to_even(&b, 3);
        assert_eq!(out, b);
        assert!(!meta.padded);
        assert_eq!(meta.pad_seed, None);
    }

    #[test]
    fn pad_odd_block_is_seeded() {
        let b = block(&["0101", "1100", "0011"]);
        let (first, meta) = pad_to_even(&b, 99);
        let (second, _) = pad_to_even(&b, 99);
        assert_eq!(first.n_count(), 4);
        assert!(meta.padded);
        assert_eq!(meta.original_n, 3);
        assert_eq!(first, second);
        assert_eq!(&first.packets()[..3], b.packets());
    }

    #[test]
    fn single_packet_round_trip() {
        let b = block(&["1011001"]);
        let (padded, meta) = pad_to_even(&b, 0);
        assert_eq!(padded.n_count(), 2);
        let restored = strip_padding(decode(&encode(&padded).unwrap()).unwrap(), &meta);
        assert_eq!(restored, b);
    }

    #[test]
    fn byte_conversion_is_msb_first() {
        let p = BitPacket::from_bit_str("1000000011").unwrap();
        assert_eq!(p.to_bytes(), vec![0x80, 0xC0]);
        assert_eq!(BitPacket::from_bytes(&[0x80, 0xFF], 10).unwrap(), p);
        assert!(BitPacket::from_bytes(&[0x80], 10).is_err());
    }

    #[test]
    fn xor_counter_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in (2..=20).step_by(2) {
            let (_, count) = encode_counted(&PacketBlock::random(n, 8, &mut rng)).unwrap();
            assert_eq!(count.packet_xors, 2 * n - 1);
        }
    }
}
