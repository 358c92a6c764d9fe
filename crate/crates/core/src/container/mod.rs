//! Multi-replay container: one file holding many replays, each stored as
//! four independently compressed sections ordered smallest-first, with a
//! trailing index for constant-time entry lookup.

pub mod format;
mod reader;
pub mod sections;
mod verify;
mod writer;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

pub use self::format::{ContainerHeader, EntryIndex, IndexEntry, SectionHeader};
pub use self::reader::{ContainerReader, SectionLocation};
pub use self::verify::{db_verify, ChecksumFailure, VerifyReport};
pub use self::writer::{ContainerWriter, FinalizeSummary, SectionBytes};

use crate::error::{Error, Result};
use crate::model::ReplaySequence;
use crate::schema::Schema;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SectionKind {
    Metadata = 0,
    Scalars = 1,
    Planes = 2,
    Entities = 3,
}

impl SectionKind {
    pub const ALL: [SectionKind; 4] = [
        SectionKind::Metadata,
        SectionKind::Scalars,
        SectionKind::Planes,
        SectionKind::Entities,
    ];

    pub fn from_id(id: u32) -> Result<Self> {
        SectionKind::ALL
            .get(id as usize)
            .copied()
            .ok_or_else(|| Error::malformed(format!("unknown section id {id}")))
    }

    pub fn name(self) -> &'static str {
        match self {
            SectionKind::Metadata => "metadata",
            SectionKind::Scalars => "scalars",
            SectionKind::Planes => "planes",
            SectionKind::Entities => "entities",
        }
    }
}

impl fmt::Display for SectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How much of an entry to decode. Each level decompresses its own section
/// and every section before it.
///
/// Parts above the requested level come back empty: `Scalars` yields
/// observations with steps and scalars but no planes or entities;
/// `MetadataOnly` yields no observations at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReadLevel {
    MetadataOnly,
    Scalars,
    Planes,
    Full,
}

impl ReadLevel {
    pub const ALL: [ReadLevel; 4] = [
        ReadLevel::MetadataOnly,
        ReadLevel::Scalars,
        ReadLevel::Planes,
        ReadLevel::Full,
    ];

    pub fn section_count(self) -> usize {
        self as usize + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            ReadLevel::MetadataOnly => "metadata",
            ReadLevel::Scalars => "scalars",
            ReadLevel::Planes => "planes",
            ReadLevel::Full => "full",
        }
    }
}

impl fmt::Display for ReadLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReadLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "metadata" | "metadata_only" | "metadataonly" => Ok(ReadLevel::MetadataOnly),
            "scalars" => Ok(ReadLevel::Scalars),
            "planes" => Ok(ReadLevel::Planes),
            "full" => Ok(ReadLevel::Full),
            _ => Err(Error::InvalidFilter(format!("unknown read level {s:?}"))),
        }
    }
}

pub fn db_create(path: impl AsRef<Path>, schema: &Schema) -> Result<ContainerWriter> {
    ContainerWriter::create(path, schema)
}

pub fn db_append(writer: &mut ContainerWriter, seq: &ReplaySequence) -> Result<u64> {
    writer.append(seq)
}

pub fn db_finalize(writer: &mut ContainerWriter) -> Result<FinalizeSummary> {
    writer.finalize()
}

pub fn db_open(path: impl AsRef<Path>) -> Result<ContainerReader> {
    ContainerReader::open(path)
}

pub fn db_read(reader: &ContainerReader, entry: u64, level: ReadLevel) -> Result<ReplaySequence> {
    reader.read(entry, level)
}
