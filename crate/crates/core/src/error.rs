use std::io;

use crate::container::SectionKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),

    #[error("invalid schema: {0}")]
    SchemaInvalid(String),

    #[error("schema mismatch: container expects {expected:#018x}, replay carries {found:#018x}")]
    SchemaMismatch { expected: u64, found: u64 },

    #[error("invalid replay: {0}")]
    InvalidReplay(String),

    #[error("ambiguous positional match at step {step}: candidates {candidates:?} are all within the match radius")]
    AmbiguousMatch { step: u32, candidates: Vec<u64> },

    #[error("timestep index {index} at position {position} is outside declared step count {declared}")]
    CorruptIndex {
        position: usize,
        index: u64,
        declared: u64,
    },

    #[error("packed plane has nonzero padding bits")]
    NonZeroPadding,

    #[error("bad magic bytes {0:?}")]
    BadMagic([u8; 8]),

    #[error("container is not finalized")]
    UnfinalizedContainer,

    #[error("unsupported container format version {0}")]
    VersionUnsupported(u16),

    #[error("checksum mismatch in entry {entry}, section {section:?}")]
    ChecksumMismatch { entry: u64, section: SectionKind },

    #[error("entry {entry} out of range (container holds {count})")]
    EntryOutOfRange { entry: u64, count: u64 },

    #[error("container writer already finalized")]
    WriterFinalized,

    #[error("malformed data: {0}")]
    Malformed(String),

    #[error("unknown field {0:?}")]
    UnknownField(String),

    #[error("invalid filter: {0}")]
    InvalidFilter(String),

    #[error("invalid workload spec: {0}")]
    SpecInvalid(String),
}

impl Error {
    pub(crate) fn malformed(msg: impl Into<String>) -> Self {
        Error::Malformed(msg.into())
    }
}
