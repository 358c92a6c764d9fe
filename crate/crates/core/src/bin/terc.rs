use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use terc::bench::{self, BenchReport, ParallelOptions, BREAKDOWN_LABELS};
use terc::container::{db_verify, ContainerReader, ContainerWriter, ReadLevel, SectionKind};
use terc::simgen::{generate, rng::derive_seed, sample_owned, SamplingPolicy, WorkloadSpec};
use terc::store::{index_build, stats, FilterSpec, Measure, MetadataStore};
use terc::Error;

#[derive(Parser)]
#[command(name = "terc", version, about = "Instance-major replay containers and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate replays from a workload spec into a new container.
    Convert {
        #[arg(long)]
        spec: PathBuf,
        /// Base seed; replay k uses a seed derived from it and k.
        #[arg(long)]
        seed: u64,
        /// every_step | on_action | every_n:N | every_n_or_action:N
        #[arg(long)]
        policy: SamplingPolicy,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        count: u32,
    },
    /// Compressed entity bytes under each layout order.
    BenchLayout {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compressed bytes per section kind, framing and index.
    Breakdown {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time repeated reads of one entry at a given level.
    BenchRead {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        entry: u64,
        /// metadata | scalars | planes | full
        #[arg(long)]
        level: ReadLevel,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
        trials: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run N concurrent generate+write worker processes.
    BenchParallel {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        instances: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a metadata store from containers.
    BuildIndex {
        #[arg(long)]
        out: PathBuf,
        #[arg(required = true)]
        containers: Vec<PathBuf>,
    },
    /// Rows of a store matching every predicate, e.g. `duration_steps>=5000`.
    Query {
        #[arg(long)]
        store: PathBuf,
        #[arg(long = "where")]
        predicates: Vec<String>,
    },
    /// Per-group aggregates over a store.
    Stats {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        group_by: String,
        /// Numeric field aggregated by mean, std and histogram.
        #[arg(long)]
        field: Option<String>,
        /// count | mean | std | histogram:BINS (repeatable)
        #[arg(long = "measure", default_values_t = vec!["count".to_string()])]
        measures: Vec<String>,
    },
    /// Recheck section checksums and the entry index.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
    },
    #[command(name = "__worker", hide = true)]
    Worker {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::UnknownField(_) | Error::InvalidFilter(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::from(e).into()
    }
}

fn fail(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("terc: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn emit(report: &BenchReport, out: Option<&Path>) -> Result<(), Failure> {
    if let Some(path) = out {
        report.save(path)?;
    }
    print!("{}", report.to_csv_string());
    Ok(())
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Convert {
            spec,
            seed,
            policy,
            out,
            count,
        } => {
            let spec: WorkloadSpec = std::fs::read_to_string(&spec)?.parse()?;
            let mut writer = ContainerWriter::create(&out, &spec.schema())?;
            for k in 0..count {
                let stream = generate(&spec, derive_seed(seed, k as u64))?;
                writer.append(&sample_owned(stream, policy))?;
            }
            let s = writer.finalize()?;
            let mut o = io::stdout().lock();
            writeln!(o, "entries,{}", s.entry_count)?;
            for kind in SectionKind::ALL {
                let b = s.per_section[kind as usize];
                writeln!(o, "{kind},{},{}", b.compressed, b.uncompressed)?;
            }
            writeln!(o, "header,{}", s.header_bytes)?;
            writeln!(o, "section_framing,{}", s.framing_bytes)?;
            writeln!(o, "index,{}", s.index_bytes)?;
            writeln!(o, "file,{}", s.total_bytes)?;
        }
        Cmd::BenchLayout { input, out } => {
            let reader = ContainerReader::open(&input)?;
            emit(&bench::bench_layout(&reader)?, Some(&out))?;
        }
        Cmd::Breakdown { input, out } => {
            let reader = ContainerReader::open(&input)?;
            let report = bench::bench_breakdown(&reader)?;
            let size = |l: &str| report.row(l).and_then(|r| r.size_bytes).unwrap_or(0);
            let parts: u64 = BREAKDOWN_LABELS[..7].iter().map(|l| size(l)).sum();
            if parts != size("file") {
                return Err(fail(format!("parts add up to {parts} bytes, file has {}", size("file"))));
            }
            emit(&report, Some(&out))?;
        }
        Cmd::BenchRead {
            input,
            entry,
            level,
            trials,
            out,
        } => {
            let reader = ContainerReader::open(&input)?;
            emit(&bench::bench_read(&reader, entry, level, trials)?, out.as_deref())?;
        }
        Cmd::BenchParallel { spec, instances, out } => {
            let work = std::env::temp_dir().join(format!("terc-parallel-{}", std::process::id()));
            let exe = std::env::current_exe()?;
            let result = bench::bench_parallel(&ParallelOptions::new(exe, spec, instances, &work));
            let _ = std::fs::remove_dir_all(&work);
            let (report, workers) = result?;
            emit(&report, Some(&out))?;
            let failed: Vec<_> = workers.iter().filter(|w| w.error.is_some()).collect();
            for w in &failed {
                eprintln!("worker-{}: {}", w.index, w.error.as_deref().unwrap_or(""));
            }
            if !failed.is_empty() {
                return Err(fail(format!("{} of {instances} workers failed", failed.len())));
            }
        }
        Cmd::BuildIndex { out, containers } => {
            let report = index_build(&containers);
            report.store.save(&out)?;
            println!("rows,{}", report.store.len());
            for f in &report.failures {
                eprintln!("{}: {}", f.path.display(), f.error);
            }
            if !report.failures.is_empty() {
                return Err(fail(format!("{} of {} containers failed", report.failures.len(), containers.len())));
            }
        }
        Cmd::Query { store, predicates } => {
            let filter = FilterSpec::parse_all(&predicates)?;
            let store = MetadataStore::load(&store)?;
            let rows = store.select(&filter)?;
            MetadataStore::export_csv(rows, io::stdout().lock())?;
        }
        Cmd::Stats {
            store,
            group_by,
            field,
            measures,
        } => {
            let measures: Vec<Measure> = measures.iter().map(|m| m.parse()).collect::<Result<_, _>>()?;
            let store = MetadataStore::load(&store)?;
            stats(&store, &group_by, field.as_deref(), &measures)?.write_csv(io::stdout().lock())?;
        }
        Cmd::Verify { input } => {
            let r = db_verify(&input);
            let mut o = io::stdout().lock();
            writeln!(o, "entries_checked,{}", r.entries_checked)?;
            writeln!(o, "entries_ok,{}", r.entries_ok)?;
            writeln!(o, "index_consistent,{}", r.index_consistent)?;
            for f in &r.checksum_failures {
                writeln!(o, "checksum_failure,{},{}", f.entry, f.section)?;
            }
            for p in &r.problems {
                writeln!(o, "problem,\"{}\"", p.replace('"', "\"\""))?;
            }
            if !r.is_ok() {
                return Err(fail(format!("{} failed verification", input.display())));
            }
        }
        Cmd::Worker { spec, seed, out } => {
            let ms = bench::run_worker(&spec, seed, &out)?;
            println!("{}", bench::worker_summary_line(ms));
        }
    }
    Ok(())
}
