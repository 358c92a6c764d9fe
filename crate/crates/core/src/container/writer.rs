use std::fs::File;
use std::io::{BufWriter, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use super::format::{
    ContainerHeader, EntryIndex, IndexEntry, SectionHeader, CODEC_LEVEL, FLAG_FINALIZED,
    HEADER_LEN, INDEX_OFFSET_POS, SECTION_HEADER_LEN,
};
use super::sections::{compress, encode_metadata, encode_planes, encode_scalars};
use super::SectionKind;
use crate::error::{Error, Result};
use crate::layout::flatten_sort;
use crate::model::ReplaySequence;
use crate::schema::Schema;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SectionBytes {
    pub compressed: u64,
    pub uncompressed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinalizeSummary {
    pub entry_count: u64,
    pub total_bytes: u64,
    /// Container header plus embedded schema text.
    pub header_bytes: u64,
    /// Section header bytes across all entries.
    pub framing_bytes: u64,
    pub index_bytes: u64,
    /// Indexed by `SectionKind as usize`.
    pub per_section: [SectionBytes; 4],
}

/// Exclusive, streaming writer. Each appended replay is encoded, written,
/// and dropped; only the small entry index stays in memory.
pub struct ContainerWriter {
    path: PathBuf,
    out: BufWriter<File>,
    schema: Schema,
    schema_hash: u64,
    position: u64,
    header_bytes: u64,
    index: EntryIndex,
    per_section: [SectionBytes; 4],
    summary: Option<FinalizeSummary>,
}

impl ContainerWriter {
    pub fn create(path: impl AsRef<Path>, schema: &Schema) -> Result<Self> {
        schema.validate()?;
        let path = path.as_ref().to_path_buf();
        let mut out = BufWriter::with_capacity(1 << 20, File::create(&path)?);
        let schema_hash = schema.hash();
        let text = schema.canonical_text();
        out.write_all(&ContainerHeader::new(schema_hash).encode())?;
        out.write_all(&(text.len() as u32).to_le_bytes())?;
        out.write_all(text.as_bytes())?;
        out.flush()?;
        let position = (HEADER_LEN + 4 + text.len()) as u64;
        Ok(ContainerWriter {
            path,
            out,
            schema: schema.clone(),
            schema_hash,
            position,
            header_bytes: position,
            index: EntryIndex::default(),
            per_section: [SectionBytes::default(); 4],
            summary: None,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn entry_count(&self) -> u64 {
        self.index.entries.len() as u64
    }

    /// Append one replay as four sections; returns its entry ordinal.
    pub fn append(&mut self, seq: &ReplaySequence) -> Result<u64> {
        if self.summary.is_some() {
            return Err(Error::WriterFinalized);
        }
        if seq.metadata.schema_hash != self.schema_hash {
            return Err(Error::SchemaMismatch {
                expected: self.schema_hash,
                found: seq.metadata.schema_hash,
            });
        }
        seq.validate(&self.schema)?;

        let start = self.position;
        for kind in SectionKind::ALL {
            let body = match kind {
                SectionKind::Metadata => encode_metadata(&seq.metadata),
                SectionKind::Scalars => encode_scalars(&self.schema, &seq.observations),
                SectionKind::Planes => encode_planes(&self.schema, &seq.observations),
                SectionKind::Entities => flatten_sort(seq, &self.schema).to_bytes(&self.schema),
            };
            self.write_section(kind, &body)?;
        }
        self.index.entries.push(IndexEntry {
            replay_id: seq.metadata.replay_id.clone(),
            byte_offset: start,
            byte_length: self.position - start,
        });
        Ok(self.index.entries.len() as u64 - 1)
    }

    fn write_section(&mut self, kind: SectionKind, body: &[u8]) -> Result<()> {
        let payload = compress(body, CODEC_LEVEL);
        let header = SectionHeader {
            section_id: kind as u32,
            uncompressed_len: body.len() as u64,
            compressed_len: payload.len() as u64,
            checksum: crc32fast::hash(&payload),
        };
        self.out.write_all(&header.encode())?;
        self.out.write_all(&payload)?;
        self.position += (SECTION_HEADER_LEN + payload.len()) as u64;
        let acc = &mut self.per_section[kind as usize];
        acc.compressed += payload.len() as u64;
        acc.uncompressed += body.len() as u64;
        Ok(())
    }

    /// Write the index and patch the header. Calling again returns the
    /// first summary without touching the file.
    pub fn finalize(&mut self) -> Result<FinalizeSummary> {
        if let Some(summary) = &self.summary {
            return Ok(summary.clone());
        }
        let index_offset = self.position;
        let index = self.index.encode();
        self.out.write_all(&index)?;
        self.out.flush()?;

        let file = self.out.get_mut();
        let mut header = ContainerHeader::new(self.schema_hash);
        header.index_offset = index_offset;
        header.flags |= FLAG_FINALIZED;
        let encoded = header.encode();
        file.seek(SeekFrom::Start(INDEX_OFFSET_POS))?;
        file.write_all(&encoded[INDEX_OFFSET_POS as usize..])?;
        file.seek(SeekFrom::End(0))?;
        file.flush()?;

        let entry_count = self.index.entries.len() as u64;
        let summary = FinalizeSummary {
            entry_count,
            total_bytes: index_offset + index.len() as u64,
            header_bytes: self.header_bytes,
            framing_bytes: entry_count * 4 * SECTION_HEADER_LEN as u64,
            index_bytes: index.len() as u64,
            per_section: self.per_section,
        };
        self.summary = Some(summary.clone());
        Ok(summary)
    }
}
