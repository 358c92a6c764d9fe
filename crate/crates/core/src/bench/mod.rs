//! Benchmark drivers behind the CLI: layout sizes, per-section size
//! breakdown, read timing, a naive per-step baseline, and multi-process
//! throughput with memory sampling.

mod parallel;
mod report;
pub mod rss;

use std::time::Instant;

use crate::container::sections::{compress, encode_planes, encode_scalars};
use crate::container::{ContainerReader, ReadLevel, SectionKind};
use crate::container::format::{CODEC_LEVEL, SECTION_HEADER_LEN};
use crate::error::Result;
use crate::layout::{relayout, LayoutOrder};
use crate::model::ReplaySequence;
use crate::schema::Schema;

pub use parallel::{bench_parallel, run_worker, worker_summary_line, ParallelOptions, WorkerResult, WORKER_COMMAND};
pub use report::{core_count, mean_std, BenchReport, BenchRow, REPORT_HEADER};

/// Compressed entity bytes of every layout order summed over all entries,
/// rows sorted by size (ties by order name).
pub fn bench_layout(reader: &ContainerReader) -> Result<BenchReport> {
    let schema = reader.schema();
    let mut totals = [0u64; 4];
    for entry in 0..reader.entry_count() {
        let seq = reader.read(entry, ReadLevel::Full)?;
        for (total, order) in totals.iter_mut().zip(LayoutOrder::ALL) {
            *total += compress(&relayout(&seq, schema, order), CODEC_LEVEL).len() as u64;
        }
    }
    let mut rows: Vec<BenchRow> = LayoutOrder::ALL
        .iter()
        .zip(totals)
        .map(|(o, size)| BenchRow::sized(o.name(), size))
        .collect();
    rows.sort_by(|a, b| (a.size_bytes, &a.label).cmp(&(b.size_bytes, &b.label)));
    Ok(BenchReport::new("layout", rows))
}

/// Labels of the breakdown rows, in report order.
pub const BREAKDOWN_LABELS: [&str; 8] = [
    "header",
    "section_framing",
    "Metadata",
    "Scalars",
    "Planes",
    "Entities",
    "index",
    "file",
];

/// Compressed bytes per section kind over all entries, plus the fixed
/// header (with schema text), per-section headers, the trailing index and
/// the file size. The parts add up to the file size exactly for a
/// well-formed container.
pub fn bench_breakdown(reader: &ContainerReader) -> Result<BenchReport> {
    let mut sections = [0u64; 4];
    let mut framing = 0u64;
    for entry in 0..reader.entry_count() {
        for loc in reader.sections(entry, SectionKind::ALL.len())? {
            sections[loc.kind as usize] += loc.header.compressed_len;
            framing += SECTION_HEADER_LEN as u64;
        }
    }
    let index_offset = reader.header().index_offset;
    let header = reader.entries().first().map_or(index_offset, |e| e.byte_offset);
    let index = reader.file_len() - index_offset;
    let values = [
        header,
        framing,
        sections[0],
        sections[1],
        sections[2],
        sections[3],
        index,
        reader.file_len(),
    ];
    let rows = BREAKDOWN_LABELS
        .iter()
        .zip(values)
        .map(|(label, v)| BenchRow::sized(*label, v))
        .collect();
    Ok(BenchReport::new("breakdown", rows))
}

/// Time `trials` reads of `entry` at `level`. The row also carries the
/// bytes decompressed by one read.
pub fn bench_read(reader: &ContainerReader, entry: u64, level: ReadLevel, trials: u32) -> Result<BenchReport> {
    assert!(trials >= 1, "at least one trial");
    let mut samples = Vec::with_capacity(trials as usize);
    let mut decompressed = 0;
    for _ in 0..trials {
        let start = Instant::now();
        let (seq, bytes) = reader.read_counted(entry, level)?;
        samples.push(start.elapsed().as_secs_f64() * 1e3);
        drop(seq);
        decompressed = bytes;
    }
    let mut row = BenchRow::timed(level.name(), &samples);
    row.decompressed_bytes = Some(decompressed);
    Ok(BenchReport::new("read", vec![row]))
}

/// Size of `seq` stored naively: every observation compressed on its own
/// (same codec and level) as one record holding the step, the entity
/// records in time-major AoS order, the scalar values and the packed
/// planes, each record prefixed by its u32 length.
pub fn naive_size(seq: &ReplaySequence, schema: &Schema) -> u64 {
    let mut total = 0u64;
    for obs in &seq.observations {
        let one = std::slice::from_ref(obs);
        let mut record = Vec::new();
        record.extend_from_slice(&obs.step.to_le_bytes());
        record.extend_from_slice(&(obs.entities.len() as u32).to_le_bytes());
        for e in &obs.entities {
            e.values().iter().for_each(|v| v.write_le(&mut record));
        }
        // Both encoders start with a count and the step list; skip them.
        record.extend_from_slice(&encode_scalars(schema, one)[12..]);
        record.extend_from_slice(&encode_planes(schema, one));
        total += 4 + compress(&record, CODEC_LEVEL).len() as u64;
    }
    total
}
