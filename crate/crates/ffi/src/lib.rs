//! C ABI over `terc`.
//!
//! Every object is an opaque handle created by a `*_new`/`*_open`/`*_create`
//! style function and released by its `*_free`. Fallible calls return a
//! [`TercStatus`]; on failure `terc_last_error()` describes the error for
//! the calling thread until its next failing call.
//!
//! Entity records and scalar rows cross the boundary as little-endian
//! bytes laid out like the schema: fields back to back in declaration
//! order, bools as one byte. Plane pixels are one byte each.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use terc::container::{db_verify, ContainerReader, ContainerWriter, ReadLevel};
use terc::model::{EntityRecord, Observation, PlaneData, ReplayMetadata, ReplaySequence};
use terc::schema::{PlaneElement, Schema};
use terc::semantics::stabilize_identity;
use terc::simgen::{generate, sample_owned, SamplingPolicy, WorkloadSpec};
use terc::store::{index_build, FilterSpec, MetadataStore};
use terc::value::Value;
use terc::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TercStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    Io = 3,
    Schema = 4,
    InvalidReplay = 5,
    Corrupt = 6,
    Checksum = 7,
    OutOfRange = 8,
    UnknownField = 9,
    Finalized = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TercReadLevel {
    MetadataOnly = 0,
    Scalars = 1,
    Planes = 2,
    Full = 3,
}

impl From<TercReadLevel> for ReadLevel {
    fn from(l: TercReadLevel) -> Self {
        match l {
            TercReadLevel::MetadataOnly => ReadLevel::MetadataOnly,
            TercReadLevel::Scalars => ReadLevel::Scalars,
            TercReadLevel::Planes => ReadLevel::Planes,
            TercReadLevel::Full => ReadLevel::Full,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TercVerifyReport {
    pub entries_checked: u64,
    pub entries_ok: u64,
    pub checksum_failures: u64,
    pub index_consistent: bool,
}

/// Entity/scalar/plane layout of replays.
pub struct TercSchema {
    schema: Schema,
}

/// One replay, either under construction or read back.
pub struct TercReplay {
    schema: Schema,
    seq: ReplaySequence,
    replay_id: CString,
}

pub struct TercWriter {
    writer: ContainerWriter,
}

pub struct TercReader {
    reader: ContainerReader,
}

pub struct TercStore {
    store: MetadataStore,
    paths: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Fail(TercStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io(_) => TercStatus::Io,
            Error::SchemaInvalid(_) | Error::SchemaMismatch { .. } => TercStatus::Schema,
            Error::InvalidReplay(_) | Error::AmbiguousMatch { .. } => TercStatus::InvalidReplay,
            Error::ChecksumMismatch { .. } => TercStatus::Checksum,
            Error::EntryOutOfRange { .. } => TercStatus::OutOfRange,
            Error::UnknownField(_) => TercStatus::UnknownField,
            Error::WriterFinalized => TercStatus::Finalized,
            Error::InvalidFilter(_) | Error::SpecInvalid(_) => TercStatus::InvalidArgument,
            _ => TercStatus::Corrupt,
        };
        Fail(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(TercStatus::InvalidArgument, msg.into())
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TercStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TercStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            TercStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| Fail(TercStatus::NullArgument, format!("{what} is null")))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut()
        .ok_or_else(|| Fail(TercStatus::NullArgument, format!("{what} is null")))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(TercStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not utf-8")))
}

unsafe fn bytes<'a>(p: *const u8, len: usize, what: &str) -> Result<&'a [u8], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail(TercStatus::NullArgument, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(TercStatus::NullArgument, format!("{what} is null")));
    }
    out.write(value);
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn terc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of this thread's most recent failure, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn terc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

// ---- schema ----

/// Parse a schema from its canonical text form.
#[no_mangle]
pub unsafe extern "C" fn terc_schema_from_text(text: *const c_char, out: *mut *mut TercSchema) -> TercStatus {
    guard(|| {
        let schema = Schema::from_canonical_text(c_str(text, "text")?)?;
        schema.validate()?;
        put(out, Box::into_raw(Box::new(TercSchema { schema })), "out")
    })
}

/// Schema of the workload spec file at `spec_path`.
#[no_mangle]
pub unsafe extern "C" fn terc_schema_from_spec_file(spec_path: *const c_char, out: *mut *mut TercSchema) -> TercStatus {
    guard(|| {
        let spec = read_spec(c_str(spec_path, "spec_path")?)?;
        put(out, Box::into_raw(Box::new(TercSchema { schema: spec.schema() })), "out")
    })
}

fn read_spec(path: &str) -> Result<WorkloadSpec, Fail> {
    let body = std::fs::read_to_string(path).map_err(Error::from)?;
    Ok(body.parse::<WorkloadSpec>()?)
}

#[no_mangle]
pub unsafe extern "C" fn terc_schema_hash(schema: *const TercSchema) -> u64 {
    schema.as_ref().map_or(0, |s| s.schema.hash())
}

/// Bytes of one entity record.
#[no_mangle]
pub unsafe extern "C" fn terc_schema_record_width(schema: *const TercSchema) -> usize {
    schema.as_ref().map_or(0, |s| s.schema.record_width())
}

/// Bytes of one row of scalar channel values.
#[no_mangle]
pub unsafe extern "C" fn terc_schema_scalar_width(schema: *const TercSchema) -> usize {
    schema.as_ref().map_or(0, |s| {
        s.schema.scalar_channels.iter().map(|c| c.scalar_type.width()).sum()
    })
}

/// Copy the canonical text (NUL-terminated) into `buf`. `needed` receives
/// the size including the terminator; with too small a buffer nothing is
/// written and BUFFER_TOO_SMALL is returned.
#[no_mangle]
pub unsafe extern "C" fn terc_schema_text(
    schema: *const TercSchema,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> TercStatus {
    guard(|| {
        let text = deref(schema, "schema")?.schema.canonical_text();
        let n = text.len() + 1;
        put(needed, n, "needed")?;
        if buf.is_null() || cap < n {
            return Err(Fail(TercStatus::BufferTooSmall, format!("need {n} bytes")));
        }
        ptr::copy_nonoverlapping(text.as_ptr(), buf.cast::<u8>(), text.len());
        *buf.add(text.len()) = 0;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn terc_schema_free(schema: *mut TercSchema) {
    free(schema)
}

// ---- replays ----

fn new_replay(schema: Schema, seq: ReplaySequence) -> *mut TercReplay {
    let replay_id = CString::new(seq.metadata.replay_id.replace('\0', " ")).unwrap_or_default();
    Box::into_raw(Box::new(TercReplay { schema, seq, replay_id }))
}

/// Empty replay with zero declared steps.
#[no_mangle]
pub unsafe extern "C" fn terc_replay_new(
    schema: *const TercSchema,
    replay_id: *const c_char,
    scenario_tag: *const c_char,
    out: *mut *mut TercReplay,
) -> TercStatus {
    guard(|| {
        let schema = deref(schema, "schema")?.schema.clone();
        let meta = ReplayMetadata::new(c_str(replay_id, "replay_id")?, c_str(scenario_tag, "scenario_tag")?, &schema);
        let seq = ReplaySequence::new(meta, Vec::new(), 0);
        put(out, new_replay(schema, seq), "out")
    })
}

/// Generate a replay from a workload spec file; `policy` is one of
/// `every_step`, `on_action`, `every_n:N`, `every_n_or_action:N`.
#[no_mangle]
pub unsafe extern "C" fn terc_replay_generate(
    spec_path: *const c_char,
    seed: u64,
    policy: *const c_char,
    out: *mut *mut TercReplay,
) -> TercStatus {
    guard(|| {
        let spec = read_spec(c_str(spec_path, "spec_path")?)?;
        let policy: SamplingPolicy = c_str(policy, "policy")?.parse()?;
        let seq = sample_owned(generate(&spec, seed)?, policy);
        put(out, new_replay(spec.schema(), seq), "out")
    })
}

/// Start a new observation at `step` with the given scalar row (may be
/// empty when the schema has no scalar channels). Planes start blank.
#[no_mangle]
pub unsafe extern "C" fn terc_replay_push_observation(
    replay: *mut TercReplay,
    step: u32,
    scalars: *const u8,
    scalars_len: usize,
) -> TercStatus {
    guard(|| {
        let r = deref_mut(replay, "replay")?;
        let raw = bytes(scalars, scalars_len, "scalars")?;
        let mut obs = Observation::blank(step, &r.schema);
        obs.scalars = decode_row(r.schema.scalar_channels.iter().map(|c| c.scalar_type), raw)?;
        r.seq.observations.push(obs);
        Ok(())
    })
}

fn decode_row(types: impl Iterator<Item = terc::value::ScalarType>, raw: &[u8]) -> Result<Vec<Value>, Fail> {
    let mut values = Vec::new();
    let mut offset = 0;
    for ty in types {
        let end = offset + ty.width();
        let chunk = raw
            .get(offset..end)
            .ok_or_else(|| invalid(format!("row of {} bytes is too short", raw.len())))?;
        values.push(Value::read_le(ty, chunk)?);
        offset = end;
    }
    if offset != raw.len() {
        return Err(invalid(format!("row has {} bytes, expected {offset}", raw.len())));
    }
    Ok(values)
}

fn last_observation(r: &mut TercReplay) -> Result<&mut Observation, Fail> {
    r.seq
        .observations
        .last_mut()
        .ok_or_else(|| invalid("no observation pushed yet"))
}

/// Append one entity record to the latest observation.
#[no_mangle]
pub unsafe extern "C" fn terc_replay_push_entity(replay: *mut TercReplay, record: *const u8, len: usize) -> TercStatus {
    guard(|| {
        let r = deref_mut(replay, "replay")?;
        let raw = bytes(record, len, "record")?;
        let values = decode_row(r.schema.entity_fields.iter().map(|f| f.scalar_type), raw)?;
        last_observation(r)?.entities.push(EntityRecord::new(values));
        Ok(())
    })
}

/// Set plane `channel` of the latest observation, one byte per pixel
/// (0/1 for boolean planes).
#[no_mangle]
pub unsafe extern "C" fn terc_replay_set_plane(
    replay: *mut TercReplay,
    channel: usize,
    pixels: *const u8,
    len: usize,
) -> TercStatus {
    guard(|| {
        let r = deref_mut(replay, "replay")?;
        let desc = r
            .schema
            .plane_channels
            .get(channel)
            .cloned()
            .ok_or_else(|| Fail(TercStatus::OutOfRange, format!("no plane channel {channel}")))?;
        let raw = bytes(pixels, len, "pixels")?;
        if raw.len() != desc.pixels() {
            return Err(invalid(format!("plane {} needs {} pixels, got {}", desc.name, desc.pixels(), raw.len())));
        }
        let data = match desc.element {
            PlaneElement::U8 => PlaneData::U8(raw.to_vec()),
            PlaneElement::Bool => PlaneData::Bool(
                raw.iter()
                    .map(|&b| match b {
                        0 => Ok(false),
                        1 => Ok(true),
                        _ => Err(invalid("boolean pixels must be 0 or 1")),
                    })
                    .collect::<Result<_, _>>()?,
            ),
        };
        last_observation(r)?.planes[channel] = data;
        Ok(())
    })
}

/// Set the declared step count and action/outcome metadata; recomputes
/// duration and peak entity count. `has_outcome` = 0 clears the outcome.
#[no_mangle]
pub unsafe extern "C" fn terc_replay_finish(
    replay: *mut TercReplay,
    declared_step_count: u64,
    action_count: u64,
    has_outcome: bool,
    outcome_label: i32,
) -> TercStatus {
    guard(|| {
        let r = deref_mut(replay, "replay")?;
        let mut meta = r.seq.metadata.clone();
        meta.action_count = action_count;
        meta.outcome_label = has_outcome.then_some(outcome_label);
        let observations = std::mem::take(&mut r.seq.observations);
        r.seq = ReplaySequence::new(meta, observations, declared_step_count);
        r.seq.validate(&r.schema)?;
        Ok(())
    })
}

/// Rewrite instance ids broken by re-observation using positional matching
/// within `match_radius`.
#[no_mangle]
pub unsafe extern "C" fn terc_replay_stabilize(replay: *mut TercReplay, match_radius: f64) -> TercStatus {
    guard(|| {
        let r = deref_mut(replay, "replay")?;
        r.seq = stabilize_identity(&r.seq, &r.schema, match_radius)?;
        Ok(())
    })
}

/// NUL-terminated replay id owned by the replay.
#[no_mangle]
pub unsafe extern "C" fn terc_replay_id(replay: *const TercReplay) -> *const c_char {
    replay.as_ref().map_or(ptr::null(), |r| r.replay_id.as_ptr())
}

#[no_mangle]
pub unsafe extern "C" fn terc_replay_declared_steps(replay: *const TercReplay) -> u64 {
    replay.as_ref().map_or(0, |r| r.seq.declared_step_count)
}

#[no_mangle]
pub unsafe extern "C" fn terc_replay_action_count(replay: *const TercReplay) -> u64 {
    replay.as_ref().map_or(0, |r| r.seq.metadata.action_count)
}

#[no_mangle]
pub unsafe extern "C" fn terc_replay_observation_count(replay: *const TercReplay) -> usize {
    replay.as_ref().map_or(0, |r| r.seq.observations.len())
}

fn observation(r: &TercReplay, k: usize) -> Result<&Observation, Fail> {
    r.seq
        .observations
        .get(k)
        .ok_or_else(|| Fail(TercStatus::OutOfRange, format!("no observation {k}")))
}

#[no_mangle]
pub unsafe extern "C" fn terc_replay_observation_step(replay: *const TercReplay, k: usize, step: *mut u32) -> TercStatus {
    guard(|| put(step, observation(deref(replay, "replay")?, k)?.step, "step"))
}

#[no_mangle]
pub unsafe extern "C" fn terc_replay_entity_count(replay: *const TercReplay, k: usize, count: *mut usize) -> TercStatus {
    guard(|| put(count, observation(deref(replay, "replay")?, k)?.entities.len(), "count"))
}

/// Copy entity `e` of observation `k` into `buf` (record width bytes).
#[no_mangle]
pub unsafe extern "C" fn terc_replay_entity(
    replay: *const TercReplay,
    k: usize,
    e: usize,
    buf: *mut u8,
    cap: usize,
) -> TercStatus {
    guard(|| {
        let r = deref(replay, "replay")?;
        let record = observation(r, k)?
            .entities
            .get(e)
            .ok_or_else(|| Fail(TercStatus::OutOfRange, format!("no entity {e} in observation {k}")))?;
        let mut raw = Vec::with_capacity(r.schema.record_width());
        record.values().iter().for_each(|v| v.write_le(&mut raw));
        if buf.is_null() || cap < raw.len() {
            return Err(Fail(TercStatus::BufferTooSmall, format!("need {} bytes", raw.len())));
        }
        ptr::copy_nonoverlapping(raw.as_ptr(), buf, raw.len());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn terc_replay_free(replay: *mut TercReplay) {
    free(replay)
}

// ---- containers ----

unsafe fn path_arg(p: *const c_char, what: &str) -> Result<PathBuf, Fail> {
    Ok(PathBuf::from(c_str(p, what)?))
}

#[no_mangle]
pub unsafe extern "C" fn terc_writer_create(
    path: *const c_char,
    schema: *const TercSchema,
    out: *mut *mut TercWriter,
) -> TercStatus {
    guard(|| {
        let writer = ContainerWriter::create(path_arg(path, "path")?, &deref(schema, "schema")?.schema)?;
        put(out, Box::into_raw(Box::new(TercWriter { writer })), "out")
    })
}

/// Append a replay; `ordinal` (may be NULL) receives its entry number.
#[no_mangle]
pub unsafe extern "C" fn terc_writer_append(
    writer: *mut TercWriter,
    replay: *const TercReplay,
    ordinal: *mut u64,
) -> TercStatus {
    guard(|| {
        let w = deref_mut(writer, "writer")?;
        let k = w.writer.append(&deref(replay, "replay")?.seq)?;
        if !ordinal.is_null() {
            ordinal.write(k);
        }
        Ok(())
    })
}

/// Write the index and mark the file finalized. Idempotent.
#[no_mangle]
pub unsafe extern "C" fn terc_writer_finalize(writer: *mut TercWriter) -> TercStatus {
    guard(|| {
        deref_mut(writer, "writer")?.writer.finalize()?;
        Ok(())
    })
}

/// Release a writer. An unfinalized container is left unreadable.
#[no_mangle]
pub unsafe extern "C" fn terc_writer_free(writer: *mut TercWriter) {
    free(writer)
}

#[no_mangle]
pub unsafe extern "C" fn terc_reader_open(path: *const c_char, out: *mut *mut TercReader) -> TercStatus {
    guard(|| {
        let reader = ContainerReader::open(path_arg(path, "path")?)?;
        put(out, Box::into_raw(Box::new(TercReader { reader })), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn terc_reader_entry_count(reader: *const TercReader) -> u64 {
    reader.as_ref().map_or(0, |r| r.reader.entry_count())
}

/// Decode `entry` up to `level` into a new replay.
#[no_mangle]
pub unsafe extern "C" fn terc_reader_read(
    reader: *const TercReader,
    entry: u64,
    level: TercReadLevel,
    out: *mut *mut TercReplay,
) -> TercStatus {
    guard(|| {
        let r = deref(reader, "reader")?;
        let seq = r.reader.read(entry, level.into())?;
        put(out, new_replay(r.reader.schema().clone(), seq), "out")
    })
}

/// Total bytes decompressed by this reader so far.
#[no_mangle]
pub unsafe extern "C" fn terc_reader_decompressed_bytes(reader: *const TercReader) -> u64 {
    reader.as_ref().map_or(0, |r| r.reader.decompressed_bytes())
}

#[no_mangle]
pub unsafe extern "C" fn terc_reader_free(reader: *mut TercReader) {
    free(reader)
}

/// Recheck all checksums and the index. Returns OK when the report was
/// produced; inspect the report for the verdict.
#[no_mangle]
pub unsafe extern "C" fn terc_verify(path: *const c_char, report: *mut TercVerifyReport) -> TercStatus {
    guard(|| {
        let r = db_verify(path_arg(path, "path")?);
        if let Some(p) = r.problems.first() {
            set_error(p.clone());
        }
        put(
            report,
            TercVerifyReport {
                entries_checked: r.entries_checked,
                entries_ok: r.entries_ok,
                checksum_failures: r.checksum_failures.len() as u64,
                index_consistent: r.index_consistent,
            },
            "report",
        )
    })
}

// ---- metadata store ----

fn new_store(store: MetadataStore) -> *mut TercStore {
    let paths = store
        .rows()
        .iter()
        .map(|r| CString::new(r.container_path.replace('\0', " ")).unwrap_or_default())
        .collect();
    Box::into_raw(Box::new(TercStore { store, paths }))
}

/// Index `count` containers. Unreadable containers are skipped and
/// counted in `failures` (may be NULL).
#[no_mangle]
pub unsafe extern "C" fn terc_store_build(
    paths: *const *const c_char,
    count: usize,
    out: *mut *mut TercStore,
    failures: *mut usize,
) -> TercStatus {
    guard(|| {
        if count > 0 && paths.is_null() {
            return Err(Fail(TercStatus::NullArgument, "paths is null".into()));
        }
        let list = (0..count)
            .map(|i| path_arg(*paths.add(i), "path"))
            .collect::<Result<Vec<_>, _>>()?;
        let report = index_build(&list);
        if let Some(f) = report.failures.first() {
            set_error(format!("{}: {}", f.path.display(), f.error));
        }
        if !failures.is_null() {
            failures.write(report.failures.len());
        }
        put(out, new_store(report.store), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn terc_store_load(path: *const c_char, out: *mut *mut TercStore) -> TercStatus {
    guard(|| {
        let store = MetadataStore::load(path_arg(path, "path")?)?;
        put(out, new_store(store), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn terc_store_save(store: *const TercStore, path: *const c_char) -> TercStatus {
    guard(|| {
        deref(store, "store")?.store.save(path_arg(path, "path")?)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn terc_store_len(store: *const TercStore) -> usize {
    store.as_ref().map_or(0, |s| s.store.len())
}

/// Rows matching every predicate (e.g. `"duration_steps>=5000"`). Row
/// positions go to `rows` (up to `cap`), the match count to `matched`;
/// when `cap` is too small BUFFER_TOO_SMALL is returned with `matched` set.
#[no_mangle]
pub unsafe extern "C" fn terc_store_query(
    store: *const TercStore,
    predicates: *const *const c_char,
    predicate_count: usize,
    rows: *mut usize,
    cap: usize,
    matched: *mut usize,
) -> TercStatus {
    guard(|| {
        let s = deref(store, "store")?;
        if predicate_count > 0 && predicates.is_null() {
            return Err(Fail(TercStatus::NullArgument, "predicates is null".into()));
        }
        let terms = (0..predicate_count)
            .map(|i| c_str(*predicates.add(i), "predicate"))
            .collect::<Result<Vec<_>, _>>()?;
        let filter = FilterSpec::parse_all(&terms)?;
        filter.check()?;
        let mut hits = Vec::new();
        for (i, row) in s.store.rows().iter().enumerate() {
            if filter.matches(row)? {
                hits.push(i);
            }
        }
        put(matched, hits.len(), "matched")?;
        if hits.len() > cap || (rows.is_null() && !hits.is_empty()) {
            return Err(Fail(TercStatus::BufferTooSmall, format!("{} rows matched", hits.len())));
        }
        if !hits.is_empty() {
            ptr::copy_nonoverlapping(hits.as_ptr(), rows, hits.len());
        }
        Ok(())
    })
}

/// Container path of row `row`, owned by the store; NULL when out of range.
#[no_mangle]
pub unsafe extern "C" fn terc_store_row_path(store: *const TercStore, row: usize) -> *const c_char {
    store
        .as_ref()
        .and_then(|s| s.paths.get(row))
        .map_or(ptr::null(), |c| c.as_ptr())
}

#[no_mangle]
pub unsafe extern "C" fn terc_store_row_ordinal(store: *const TercStore, row: usize, ordinal: *mut u64) -> TercStatus {
    guard(|| {
        let s = deref(store, "store")?;
        let r = s
            .store
            .rows()
            .get(row)
            .ok_or_else(|| Fail(TercStatus::OutOfRange, format!("no row {row}")))?;
        put(ordinal, r.entry_ordinal, "ordinal")
    })
}

#[no_mangle]
pub unsafe extern "C" fn terc_store_free(store: *mut TercStore) {
    free(store)
}
