use std::fs::File;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use super::format::{ContainerHeader, EntryIndex, IndexEntry, SectionHeader, HEADER_LEN, SECTION_HEADER_LEN};
use super::sections::{decode_metadata, decode_planes, decode_scalars, decompress};
use super::{ReadLevel, SectionKind};
use crate::error::{Error, Result};
use crate::layout::{reconstruct, FlattenedSoA};
use crate::model::ReplaySequence;
use crate::schema::Schema;

/// Where one section of an entry lives in the file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectionLocation {
    pub kind: SectionKind,
    pub header_offset: u64,
    pub payload_offset: u64,
    pub header: SectionHeader,
}

/// Read handle over a finalized container.
///
/// Reads are positional, so one handle can serve concurrent `read` calls
/// from many threads.
#[derive(Debug)]
pub struct ContainerReader {
    path: PathBuf,
    file: File,
    header: ContainerHeader,
    schema: Schema,
    index: EntryIndex,
    file_len: u64,
    decompressed: AtomicU64,
}

#[cfg(unix)]
fn read_exact_at(file: &File, buf: &mut [u8], offset: u64) -> std::io::Result<()> {
    std::os::unix::fs::FileExt::read_exact_at(file, buf, offset)
}

#[cfg(windows)]
fn read_exact_at(file: &File, mut buf: &mut [u8], mut offset: u64) -> std::io::Result<()> {
    use std::os::windows::fs::FileExt;
    while !buf.is_empty() {
        match file.seek_read(buf, offset)? {
            0 => return Err(std::io::ErrorKind::UnexpectedEof.into()),
            n => {
                buf = &mut buf[n..];
                offset += n as u64;
            }
        }
    }
    Ok(())
}

pub(super) fn read_vec_at(file: &File, offset: u64, len: u64, file_len: u64) -> Result<Vec<u8>> {
    if offset.checked_add(len).is_none_or(|end| end > file_len) {
        return Err(Error::malformed(format!(
            "range {offset}+{len} past end of file ({file_len} bytes)"
        )));
    }
    let mut buf = vec![0u8; len as usize];
    read_exact_at(file, &mut buf, offset)?;
    Ok(buf)
}

impl ContainerReader {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::open(&path)?;
        let file_len = file.metadata()?.len();
        if file_len < HEADER_LEN as u64 {
            let mut magic = [0u8; 8];
            let n = (file_len as usize).min(8);
            read_exact_at(&file, &mut magic[..n], 0)?;
            if magic[..n] != super::format::MAGIC[..n] || n < 8 {
                return Err(Error::BadMagic(magic));
            }
            return Err(Error::malformed("file shorter than container header"));
        }
        let header = ContainerHeader::decode(&read_vec_at(&file, 0, HEADER_LEN as u64, file_len)?)?;
        header.check()?;
        if header.index_offset > file_len {
            return Err(Error::malformed("index offset past end of file"));
        }

        let text_len = u32::from_le_bytes(
            read_vec_at(&file, HEADER_LEN as u64, 4, file_len)?
                .try_into()
                .unwrap(),
        ) as u64;
        let text = read_vec_at(&file, HEADER_LEN as u64 + 4, text_len, file_len)?;
        let text = String::from_utf8(text).map_err(|_| Error::malformed("schema text is not utf-8"))?;
        let schema = Schema::from_canonical_text(&text)?;
        if schema.hash() != header.schema_hash {
            return Err(Error::malformed("embedded schema does not match header hash"));
        }

        let index_bytes = read_vec_at(&file, header.index_offset, file_len - header.index_offset, file_len)?;
        let index = EntryIndex::decode(&index_bytes)?;
        Ok(ContainerReader {
            path,
            file,
            header,
            schema,
            index,
            file_len,
            decompressed: AtomicU64::new(0),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn header(&self) -> &ContainerHeader {
        &self.header
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn entry_count(&self) -> u64 {
        self.index.entries.len() as u64
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.index.entries
    }

    pub fn file_len(&self) -> u64 {
        self.file_len
    }

    /// Total uncompressed bytes produced by decompression on this handle.
    pub fn decompressed_bytes(&self) -> u64 {
        self.decompressed.load(Ordering::Relaxed)
    }

    pub fn reset_counter(&self) {
        self.decompressed.store(0, Ordering::Relaxed);
    }

    fn entry(&self, entry: u64) -> Result<&IndexEntry> {
        self.index.entries.get(entry as usize).ok_or(Error::EntryOutOfRange {
            entry,
            count: self.entry_count(),
        })
    }

    fn section_at(&self, offset: u64, expected: SectionKind) -> Result<SectionLocation> {
        let raw = read_vec_at(&self.file, offset, SECTION_HEADER_LEN as u64, self.file_len)?;
        let header = SectionHeader::decode(&raw)?;
        let kind = header.kind()?;
        if kind != expected {
            return Err(Error::malformed(format!(
                "expected {expected} section at offset {offset}, found {kind}"
            )));
        }
        Ok(SectionLocation {
            kind,
            header_offset: offset,
            payload_offset: offset + SECTION_HEADER_LEN as u64,
            header,
        })
    }

    /// Locate the first `count` sections of an entry by walking their
    /// headers. Nothing is decompressed.
    pub fn sections(&self, entry: u64, count: usize) -> Result<Vec<SectionLocation>> {
        let mut offset = self.entry(entry)?.byte_offset;
        let mut out = Vec::with_capacity(count);
        for &kind in &SectionKind::ALL[..count.min(4)] {
            let loc = self.section_at(offset, kind)?;
            offset = loc.payload_offset + loc.header.compressed_len;
            out.push(loc);
        }
        Ok(out)
    }

    /// Compressed payload bytes of one section, checksum-verified.
    pub fn raw_payload(&self, entry: u64, loc: &SectionLocation) -> Result<Vec<u8>> {
        let payload = read_vec_at(
            &self.file,
            loc.payload_offset,
            loc.header.compressed_len,
            self.file_len,
        )?;
        if crc32fast::hash(&payload) != loc.header.checksum {
            return Err(Error::ChecksumMismatch {
                entry,
                section: loc.kind,
            });
        }
        Ok(payload)
    }

    fn inflate(&self, entry: u64, loc: &SectionLocation) -> Result<Vec<u8>> {
        let payload = self.raw_payload(entry, loc)?;
        let body = decompress(&payload, loc.header.uncompressed_len)?;
        self.decompressed
            .fetch_add(body.len() as u64, Ordering::Relaxed);
        Ok(body)
    }

    pub fn read(&self, entry: u64, level: ReadLevel) -> Result<ReplaySequence> {
        self.read_counted(entry, level).map(|(seq, _)| seq)
    }

    /// Decode `entry` up to `level`, also returning the bytes decompressed
    /// by this call alone.
    pub fn read_counted(&self, entry: u64, level: ReadLevel) -> Result<(ReplaySequence, u64)> {
        let locs = self.sections(entry, level.section_count())?;
        let mut decompressed = 0u64;
        let mut body_of = |loc: &SectionLocation| -> Result<Vec<u8>> {
            let body = self.inflate(entry, loc)?;
            decompressed += body.len() as u64;
            Ok(body)
        };

        let metadata = decode_metadata(&body_of(&locs[0])?)?;
        if metadata.schema_hash != self.header.schema_hash {
            return Err(Error::SchemaMismatch {
                expected: self.header.schema_hash,
                found: metadata.schema_hash,
            });
        }
        let declared_step_count = metadata.duration_steps;
        let mut observations = Vec::new();
        if level >= ReadLevel::Scalars {
            observations = decode_scalars(&self.schema, &body_of(&locs[1])?)?;
        }
        if level >= ReadLevel::Planes {
            decode_planes(&self.schema, &body_of(&locs[2])?, &mut observations)?;
        }
        if level >= ReadLevel::Full {
            let flat = FlattenedSoA::from_bytes(&self.schema, &body_of(&locs[3])?)?;
            if flat.declared_step_count != declared_step_count {
                return Err(Error::malformed(format!(
                    "entity section declares {} steps, metadata {}",
                    flat.declared_step_count, declared_step_count
                )));
            }
            let per_step = reconstruct(&flat)?;
            drop(flat);
            for (step, entities) in per_step.into_iter().enumerate() {
                if entities.is_empty() {
                    continue;
                }
                let k = observations
                    .binary_search_by_key(&(step as u32), |o| o.step)
                    .map_err(|_| {
                        Error::malformed(format!("entities recorded at unobserved step {step}"))
                    })?;
                observations[k].entities = entities;
            }
        }
        let seq = ReplaySequence {
            metadata,
            observations,
            declared_step_count,
        };
        Ok((seq, decompressed))
    }
}
