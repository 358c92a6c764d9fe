//! Fixed binary structures of the container file. All integers are
//! little-endian.
//!
//! ```text
//! ContainerHeader   30 bytes  magic "TERC0001", version u16, schema_hash u64,
//!                             index_offset u64, flags u32
//! schema text       u32 length + canonical schema text
//! entry*            4 x (SectionHeader 24 bytes + zlib payload),
//!                   sections in Metadata, Scalars, Planes, Entities order
//! EntryIndex        entry_count u64, then per entry:
//!                   replay_id (u32 length + utf-8), byte_offset u64, byte_length u64
//! ```

use crate::container::SectionKind;
use crate::error::{Error, Result};

pub const MAGIC: [u8; 8] = *b"TERC0001";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 30;
pub const SECTION_HEADER_LEN: usize = 24;
/// Byte offset of `index_offset` within the header.
pub const INDEX_OFFSET_POS: u64 = 18;
/// DEFLATE level used for every section.
pub const CODEC_LEVEL: u32 = 6;

pub const FLAG_FINALIZED: u32 = 1;
const LEVEL_SHIFT: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContainerHeader {
    pub magic: [u8; 8],
    pub format_version: u16,
    pub schema_hash: u64,
    pub index_offset: u64,
    /// bit 0: finalized; bits 8..16: codec level.
    pub flags: u32,
}

impl ContainerHeader {
    pub fn new(schema_hash: u64) -> Self {
        ContainerHeader {
            magic: MAGIC,
            format_version: FORMAT_VERSION,
            schema_hash,
            index_offset: 0,
            flags: CODEC_LEVEL << LEVEL_SHIFT,
        }
    }

    pub fn finalized(&self) -> bool {
        self.flags & FLAG_FINALIZED != 0
    }

    pub fn codec_level(&self) -> u32 {
        (self.flags >> LEVEL_SHIFT) & 0xff
    }

    pub fn encode(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0..8].copy_from_slice(&self.magic);
        out[8..10].copy_from_slice(&self.format_version.to_le_bytes());
        out[10..18].copy_from_slice(&self.schema_hash.to_le_bytes());
        out[18..26].copy_from_slice(&self.index_offset.to_le_bytes());
        out[26..30].copy_from_slice(&self.flags.to_le_bytes());
        out
    }

    /// Decode without semantic checks; see [`ContainerHeader::check`].
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::malformed("file shorter than container header"));
        }
        Ok(ContainerHeader {
            magic: bytes[0..8].try_into().unwrap(),
            format_version: u16::from_le_bytes(bytes[8..10].try_into().unwrap()),
            schema_hash: u64::from_le_bytes(bytes[10..18].try_into().unwrap()),
            index_offset: u64::from_le_bytes(bytes[18..26].try_into().unwrap()),
            flags: u32::from_le_bytes(bytes[26..30].try_into().unwrap()),
        })
    }

    /// Magic, version, finalized flag, and index offset sanity.
    pub fn check(&self) -> Result<()> {
        if self.magic != MAGIC {
            return Err(Error::BadMagic(self.magic));
        }
        if self.format_version != FORMAT_VERSION {
            return Err(Error::VersionUnsupported(self.format_version));
        }
        if !self.finalized() {
            return Err(Error::UnfinalizedContainer);
        }
        if self.index_offset < HEADER_LEN as u64 {
            return Err(Error::malformed(format!(
                "index offset {} inside the header",
                self.index_offset
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectionHeader {
    pub section_id: u32,
    pub uncompressed_len: u64,
    pub compressed_len: u64,
    /// CRC-32 of the compressed payload.
    pub checksum: u32,
}

impl SectionHeader {
    pub fn kind(&self) -> Result<SectionKind> {
        SectionKind::from_id(self.section_id)
    }

    pub fn encode(&self) -> [u8; SECTION_HEADER_LEN] {
        let mut out = [0u8; SECTION_HEADER_LEN];
        out[0..4].copy_from_slice(&self.section_id.to_le_bytes());
        out[4..12].copy_from_slice(&self.uncompressed_len.to_le_bytes());
        out[12..20].copy_from_slice(&self.compressed_len.to_le_bytes());
        out[20..24].copy_from_slice(&self.checksum.to_le_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < SECTION_HEADER_LEN {
            return Err(Error::malformed("truncated section header"));
        }
        Ok(SectionHeader {
            section_id: u32::from_le_bytes(bytes[0..4].try_into().unwrap()),
            uncompressed_len: u64::from_le_bytes(bytes[4..12].try_into().unwrap()),
            compressed_len: u64::from_le_bytes(bytes[12..20].try_into().unwrap()),
            checksum: u32::from_le_bytes(bytes[20..24].try_into().unwrap()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexEntry {
    pub replay_id: String,
    pub byte_offset: u64,
    pub byte_length: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntryIndex {
    pub entries: Vec<IndexEntry>,
}

impl EntryIndex {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&(self.entries.len() as u64).to_le_bytes());
        for e in &self.entries {
            put_str(&mut out, &e.replay_id);
            out.extend_from_slice(&e.byte_offset.to_le_bytes());
            out.extend_from_slice(&e.byte_length.to_le_bytes());
        }
        out
    }

    /// Decode an index that must occupy all of `bytes`.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor::new(bytes);
        let count = cur.u64()?;
        // Each entry takes at least 20 bytes; reject absurd counts before allocating.
        if count > (bytes.len() as u64) / 20 {
            return Err(Error::malformed(format!("index claims {count} entries")));
        }
        let mut entries = Vec::with_capacity(count as usize);
        for _ in 0..count {
            entries.push(IndexEntry {
                replay_id: cur.string()?,
                byte_offset: cur.u64()?,
                byte_length: cur.u64()?,
            });
        }
        if !cur.is_empty() {
            return Err(Error::malformed(format!(
                "{} trailing bytes after index",
                cur.remaining()
            )));
        }
        Ok(EntryIndex { entries })
    }
}

pub(crate) fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

/// Bounds-checked little-endian reader over a byte slice.
pub(crate) struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Cursor { bytes, pos: 0 }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::malformed(format!("need {n} bytes at offset {}", self.pos)))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn i32(&mut self) -> Result<i32> {
        Ok(i32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let raw = self.take(len)?;
        String::from_utf8(raw.to_vec()).map_err(|_| Error::malformed("string is not utf-8"))
    }

    pub fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    pub fn is_empty(&self) -> bool {
        self.remaining() == 0
    }
}
