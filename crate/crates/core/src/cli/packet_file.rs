//! Binary packet files: a 12-byte little-endian header `(N, L_bits, padded)`
//! followed by `N` packets of `ceil(L_bits / 8)` bytes, bits MSB first.

use thiserror::Error;

use crate::codec::{BitPacket, CodecError, PacketBlock};

const HEADER_LEN: usize = 12;

#[derive(Debug, Error, PartialEq)]
pub enum PacketFileError {
    #[error("file is {0} bytes, shorter than the 12-byte header")]
    ShortHeader(usize),
    #[error("header declares zero packets or zero bits per packet")]
    EmptyHeader,
    #[error("pad flag must be 0 or 1, got {0}")]
    PadFlag(u32),
    #[error("expected {expected} payload bytes, found {found}")]
    PayloadLength { expected: usize, found: usize },
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// A packet block and whether its last packet is padding.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketFile {
    pub block: PacketBlock,
    pub padded: bool,
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("four bytes"))
}

pub fn read_packet_file(bytes: &[u8]) -> Result<PacketFile, PacketFileError> {
    if bytes.len() < HEADER_LEN {
        return Err(PacketFileError::ShortHeader(bytes.len()));
    }
    let n = u32_at(bytes, 0) as usize;
    let bit_len = u32_at(bytes, 4) as usize;
    let padded = match u32_at(bytes, 8) {
        0 => false,
        1 => true,
        other => return Err(PacketFileError::PadFlag(other)),
    };
    if n == 0 || bit_len == 0 {
        return Err(PacketFileError::EmptyHeader);
    }
    let stride = bit_len.div_ceil(8);
    let payload = &bytes[HEADER_LEN..];
    let expected = n.saturating_mul(stride);
    if payload.len() != expected {
        return Err(PacketFileError::PayloadLength {
            expected,
            found: payload.len(),
        });
    }
    let packets = payload
        .chunks_exact(stride)
        .map(|chunk| BitPacket::from_bytes(chunk, bit_len))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PacketFile {
        block: PacketBlock::new(packets)?,
        padded,
    })
}

pub fn write_packet_file(file: &PacketFile) -> Vec<u8> {
    let block = &file.block;
    let mut out = Vec::with_capacity(HEADER_LEN + block.n_count() * block.bit_len().div_ceil(8));
    out.extend_from_slice(&(block.n_count() as u32).to_le_bytes());
    out.extend_from_slice(&(block.bit_len() as u32).to_le_bytes());
    out.extend_from_slice(&u32::from(file.padded).to_le_bytes());
    for p in block.packets() {
        out.extend_from_slice(&p.to_bytes());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let block = PacketBlock::from_bit_strs(&["1010110011", "0000000001", "1111111111"]).unwrap();
        let file = PacketFile { block, padded: true };
        let bytes = write_packet_file(&file);
        assert_eq!(bytes.len(), 12 + 3 * 2);
        assert_eq!(&bytes[..12], &[3, 0, 0, 0, 10, 0, 0, 0, 1, 0, 0, 0]);
        assert_eq!(&bytes[12..14], &[0b1010_1100, 0b1100_0000]);
        assert_eq!(read_packet_file(&bytes).unwrap(), file);
    }

    #[test]
    fn corrupt_files_rejected() {
        assert_eq!(read_packet_file(&[1, 2, 3]), Err(PacketFileError::ShortHeader(3)));
        let mut bytes = write_packet_file(&PacketFile {
            block: PacketBlock::from_bit_strs(&["1", "0"]).unwrap(),
            padded: false,
        });
        bytes[8] = 7;
        assert_eq!(read_packet_file(&bytes), Err(PacketFileError::PadFlag(7)));
        bytes[8] = 0;
        bytes.pop();
        assert!(matches!(read_packet_file(&bytes), Err(PacketFileError::PayloadLength { .. })));
        bytes[0] = 0;
        assert_eq!(read_packet_file(&bytes), Err(PacketFileError::EmptyHeader));
    }
}
