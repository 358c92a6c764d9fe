//! Bit-packing for boolean planes: LSB-first within each byte, pixels in
//! row-major order, trailing pad bits zero.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedPlane {
    pub width: u32,
    pub height: u32,
    pub bytes: Vec<u8>,
}

pub fn packed_len(pixels: usize) -> usize {
    pixels.div_ceil(8)
}

/// Pack a row-major boolean grid of `width * height` pixels.
pub fn pack_bits(width: u32, height: u32, pixels: &[bool]) -> PackedPlane {
    let n = width as usize * height as usize;
    assert_eq!(pixels.len(), n, "plane has {} pixels, expected {n}", pixels.len());
    let mut bytes = vec![0u8; packed_len(n)];
    for (i, _) in pixels.iter().enumerate().filter(|(_, &p)| p) {
        bytes[i / 8] |= 1 << (i % 8);
    }
    PackedPlane {
        width,
        height,
        bytes,
    }
}

pub fn unpack_bits(packed: &PackedPlane) -> Result<Vec<bool>> {
    let n = packed.width as usize * packed.height as usize;
    if packed.bytes.len() != packed_len(n) {
        return Err(Error::malformed(format!(
            "packed plane holds {} bytes, {}x{} needs {}",
            packed.bytes.len(),
            packed.width,
            packed.height,
            packed_len(n)
        )));
    }
    if !n.is_multiple_of(8) {
        let last = packed.bytes[packed.bytes.len() - 1];
        if last >> (n % 8) != 0 {
            return Err(Error::NonZeroPadding);
        }
    }
    Ok((0..n)
        .map(|i| packed.bytes[i / 8] >> (i % 8) & 1 == 1)
        .collect())
}
