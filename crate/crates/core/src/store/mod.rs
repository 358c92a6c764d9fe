//! Queryable sidecar of replay metadata: one row per container entry,
//! built from metadata sections only.

mod filter;
mod persist;
mod stats;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::container::{ContainerReader, ReadLevel};
use crate::error::{Error, Result};
use crate::model::ReplayMetadata;

pub use filter::{FilterOp, FilterSpec, Predicate};
pub use stats::{stats, Histogram, Measure, StatsRow, StatsTable};

/// Type of a row field, as used by filters and the store file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Text,
    U64,
    /// Nullable signed integer.
    OptI32,
    F64,
}

impl FieldKind {
    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Text => "text",
            FieldKind::U64 => "u64",
            FieldKind::OptI32 => "i32?",
            FieldKind::F64 => "f64",
        }
    }

    pub fn is_numeric(self) -> bool {
        self != FieldKind::Text
    }
}

/// Row fields in column order.
pub const FIELDS: [(&str, FieldKind); 10] = [
    ("container_path", FieldKind::Text),
    ("entry_ordinal", FieldKind::U64),
    ("replay_id", FieldKind::Text),
    ("scenario_tag", FieldKind::Text),
    ("duration_steps", FieldKind::U64),
    ("entity_count_peak", FieldKind::U64),
    ("action_count", FieldKind::U64),
    ("outcome_label", FieldKind::OptI32),
    ("schema_hash", FieldKind::U64),
    ("apm_analog", FieldKind::F64),
];

pub fn field_kind(name: &str) -> Result<FieldKind> {
    FIELDS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, k)| *k)
        .ok_or_else(|| Error::UnknownField(name.to_string()))
}

/// A typed field value.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(i128),
    Float(f64),
    Null,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Text(s) => f.write_str(s),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) => write!(f, "{v}"),
            Cell::Null => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetadataRow {
    pub container_path: String,
    pub entry_ordinal: u64,
    pub replay_id: String,
    pub scenario_tag: String,
    pub duration_steps: u64,
    pub entity_count_peak: u64,
    pub action_count: u64,
    pub outcome_label: Option<i32>,
    pub schema_hash: u64,
    /// Actions per minute of simulated time; 0 for zero-length replays.
    pub apm_analog: f64,
}

/// Actions per minute given the step duration in seconds.
pub fn apm(action_count: u64, duration_steps: u64, step_seconds: f64) -> f64 {
    let minutes = duration_steps as f64 * step_seconds / 60.0;
    if minutes > 0.0 {
        action_count as f64 / minutes
    } else {
        0.0
    }
}

impl MetadataRow {
    pub fn from_metadata(
        container_path: impl Into<String>,
        entry_ordinal: u64,
        meta: &ReplayMetadata,
        step_seconds: f64,
    ) -> Self {
        MetadataRow {
            container_path: container_path.into(),
            entry_ordinal,
            replay_id: meta.replay_id.clone(),
            scenario_tag: meta.scenario_tag.clone(),
            duration_steps: meta.duration_steps,
            entity_count_peak: meta.entity_count_peak,
            action_count: meta.action_count,
            outcome_label: meta.outcome_label,
            schema_hash: meta.schema_hash,
            apm_analog: apm(meta.action_count, meta.duration_steps, step_seconds),
        }
    }

    pub fn cell(&self, field: &str) -> Result<Cell> {
        Ok(match field {
            "container_path" => Cell::Text(self.container_path.clone()),
            "entry_ordinal" => Cell::Int(self.entry_ordinal as i128),
            "replay_id" => Cell::Text(self.replay_id.clone()),
            "scenario_tag" => Cell::Text(self.scenario_tag.clone()),
            "duration_steps" => Cell::Int(self.duration_steps as i128),
            "entity_count_peak" => Cell::Int(self.entity_count_peak as i128),
            "action_count" => Cell::Int(self.action_count as i128),
            "outcome_label" => self.outcome_label.map_or(Cell::Null, |v| Cell::Int(v as i128)),
            "schema_hash" => Cell::Int(self.schema_hash as i128),
            "apm_analog" => Cell::Float(self.apm_analog),
            other => return Err(Error::UnknownField(other.to_string())),
        })
    }

    fn key(&self) -> (&str, u64) {
        (&self.container_path, self.entry_ordinal)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetadataStore {
    rows: Vec<MetadataRow>,
}

/// A container that could not be indexed.
#[derive(Debug)]
pub struct BuildFailure {
    pub path: PathBuf,
    pub error: Error,
}

#[derive(Debug, Default)]
pub struct BuildReport {
    pub store: MetadataStore,
    pub failures: Vec<BuildFailure>,
    /// Bytes decompressed while building (metadata sections only).
    pub decompressed_bytes: u64,
}

/// Index every entry of every container through metadata-only reads.
/// Containers that fail to open or read are reported and skipped.
pub fn index_build<P: AsRef<Path>>(container_paths: &[P]) -> BuildReport {
    let mut report = BuildReport::default();
    let mut rows = Vec::new();
    for path in container_paths {
        let path = path.as_ref();
        match index_container(path) {
            Ok((mut r, bytes)) => {
                rows.append(&mut r);
                report.decompressed_bytes += bytes;
            }
            Err(error) => report.failures.push(BuildFailure {
                path: path.to_path_buf(),
                error,
            }),
        }
    }
    report.store = MetadataStore::from_rows(rows);
    report
}

fn index_container(path: &Path) -> Result<(Vec<MetadataRow>, u64)> {
    let reader = ContainerReader::open(path)?;
    let step_seconds = reader.schema().step_seconds;
    let name = path.to_string_lossy().into_owned();
    let mut rows = Vec::with_capacity(reader.entry_count() as usize);
    for entry in 0..reader.entry_count() {
        let (seq, _) = reader.read_counted(entry, ReadLevel::MetadataOnly)?;
        rows.push(MetadataRow::from_metadata(name.clone(), entry, &seq.metadata, step_seconds));
    }
    Ok((rows, reader.decompressed_bytes()))
}

impl MetadataStore {
    /// Build from rows, sorted by (container_path, entry_ordinal).
    /// Duplicate keys keep the first row.
    pub fn from_rows(mut rows: Vec<MetadataRow>) -> Self {
        rows.sort_by(|a, b| a.key().cmp(&b.key()));
        rows.dedup_by(|a, b| a.key() == b.key());
        MetadataStore { rows }
    }

    pub fn rows(&self) -> &[MetadataRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Keys of rows matching every predicate, in (path, ordinal) order.
    pub fn query(&self, filter: &FilterSpec) -> Result<Vec<(String, u64)>> {
        Ok(self
            .select(filter)?
            .into_iter()
            .map(|r| (r.container_path.clone(), r.entry_ordinal))
            .collect())
    }

    /// Rows matching every predicate, in (path, ordinal) order.
    pub fn select(&self, filter: &FilterSpec) -> Result<Vec<&MetadataRow>> {
        filter.check()?;
        let mut out = Vec::new();
        for row in &self.rows {
            if filter.matches(row)? {
                out.push(row);
            }
        }
        Ok(out)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let bytes = persist::encode(&self.rows);
        let mut file = std::fs::File::create(path)?;
        file.write_all(&bytes)?;
        file.sync_all()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Ok(MetadataStore::from_rows(persist::decode(&bytes)?))
    }

    /// Write `rows` as comma-separated text with a header line.
    pub fn export_csv<'a, W: Write>(
        rows: impl IntoIterator<Item = &'a MetadataRow>,
        out: W,
    ) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(FIELDS.iter().map(|(n, _)| *n)).map_err(csv_error)?;
        for row in rows {
            let cells: Vec<String> = FIELDS
                .iter()
                .map(|(n, _)| row.cell(n).map(|c| c.to_string()))
                .collect::<Result<_>>()?;
            w.write_record(&cells).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::malformed(format!("csv: {other:?}")),
    }
}

#[cfg(test)]
mod tests;
