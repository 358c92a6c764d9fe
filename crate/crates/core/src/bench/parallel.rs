use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::time::{Duration, Instant};

use super::report::{mean_std, BenchReport, BenchRow};
use super::rss;
use crate::container::ContainerWriter;
use crate::error::{Error, Result};
use crate::simgen::{generate, rng::derive_seed, sample_owned, SamplingPolicy, WorkloadSpec};

/// Name of the hidden CLI subcommand that runs one worker.
pub const WORKER_COMMAND: &str = "__worker";

#[derive(Debug, Clone)]
pub struct ParallelOptions {
    /// Executable that understands the worker subcommand.
    pub worker_exe: PathBuf,
    pub spec_path: PathBuf,
    pub instances: u32,
    /// Directory receiving one container per worker.
    pub out_dir: PathBuf,
    pub base_seed: u64,
    pub poll_interval: Duration,
}

impl ParallelOptions {
    pub fn new(worker_exe: impl Into<PathBuf>, spec_path: impl Into<PathBuf>, instances: u32, out_dir: impl Into<PathBuf>) -> Self {
        ParallelOptions {
            worker_exe: worker_exe.into(),
            spec_path: spec_path.into(),
            instances,
            out_dir: out_dir.into(),
            base_seed: 42,
            poll_interval: Duration::from_millis(50),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkerResult {
    pub index: u32,
    /// Generate + write time measured inside the worker.
    pub elapsed_ms: Option<f64>,
    /// Largest of the sampled resident size and the worker's own peak.
    pub peak_rss_bytes: Option<u64>,
    pub error: Option<String>,
}

/// Generate one replay from the spec file and write it to a fresh
/// container. Returns elapsed milliseconds.
pub fn run_worker(spec_path: &Path, seed: u64, out: &Path) -> Result<f64> {
    let spec: WorkloadSpec = std::fs::read_to_string(spec_path)?.parse()?;
    let start = Instant::now();
    let seq = sample_owned(generate(&spec, seed)?, SamplingPolicy::EveryStep);
    let mut writer = ContainerWriter::create(out, &spec.schema())?;
    writer.append(&seq)?;
    drop(seq);
    writer.finalize()?;
    Ok(start.elapsed().as_secs_f64() * 1e3)
}

/// Line a worker prints on success.
pub fn worker_summary_line(elapsed_ms: f64) -> String {
    format!(
        "elapsed_ms={elapsed_ms} peak_rss_bytes={}",
        rss::self_peak_rss_bytes().unwrap_or(0)
    )
}

fn parse_summary(stdout: &str) -> Option<(f64, u64)> {
    let line = stdout.lines().rev().find(|l| l.starts_with("elapsed_ms="))?;
    let mut elapsed = None;
    let mut peak = None;
    for part in line.split_whitespace() {
        match part.split_once('=') {
            Some(("elapsed_ms", v)) => elapsed = v.parse().ok(),
            Some(("peak_rss_bytes", v)) => peak = v.parse().ok(),
            _ => {}
        }
    }
    Some((elapsed?, peak?))
}

struct Running {
    index: u32,
    child: Child,
    sampled_peak: u64,
}

/// Run `instances` worker processes at once on the same spec (distinct
/// seeds and output files), sampling each worker's resident memory at the
/// poll interval until all exit.
///
/// The report has one row per successful worker plus an `instances=N`
/// summary row; failures appear only in the returned worker results.
pub fn bench_parallel(opts: &ParallelOptions) -> Result<(BenchReport, Vec<WorkerResult>)> {
    if opts.instances == 0 {
        return Err(Error::SpecInvalid("instances must be at least 1".into()));
    }
    std::fs::create_dir_all(&opts.out_dir)?;
    let mut running = Vec::with_capacity(opts.instances as usize);
    for index in 0..opts.instances {
        let out = opts.out_dir.join(format!("worker-{index}.terc"));
        let child = Command::new(&opts.worker_exe)
            .arg(WORKER_COMMAND)
            .arg("--spec")
            .arg(&opts.spec_path)
            .arg("--seed")
            .arg(derive_seed(opts.base_seed, index as u64).to_string())
            .arg("--out")
            .arg(&out)
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()?;
        running.push(Running {
            index,
            child,
            sampled_peak: 0,
        });
    }

    let mut results = Vec::with_capacity(running.len());
    while !running.is_empty() {
        let mut still = Vec::with_capacity(running.len());
        for mut r in running {
            if let Some(rss) = rss::rss_bytes(r.child.id()) {
                r.sampled_peak = r.sampled_peak.max(rss);
            }
            match r.child.try_wait()? {
                None => still.push(r),
                Some(status) => results.push(collect(r, status)),
            }
        }
        running = still;
        if !running.is_empty() {
            std::thread::sleep(opts.poll_interval);
        }
    }
    results.sort_by_key(|r| r.index);

    let mut rows = Vec::new();
    let mut times = Vec::new();
    let mut peak = None::<u64>;
    for r in &results {
        if let (Some(ms), None) = (r.elapsed_ms, &r.error) {
            let mut row = BenchRow::timed(format!("worker-{}", r.index), &[ms]);
            row.peak_rss_bytes = r.peak_rss_bytes;
            rows.push(row);
            times.push(ms);
            peak = peak.max(r.peak_rss_bytes);
        }
    }
    if !times.is_empty() {
        let (mean, std) = mean_std(&times);
        rows.push(BenchRow {
            label: format!("instances={}", opts.instances),
            size_bytes: None,
            decompressed_bytes: None,
            mean_ms: Some(mean),
            std_ms: std,
            trials: times.len() as u32,
            peak_rss_bytes: peak,
        });
    }
    Ok((BenchReport::new("parallel", rows), results))
}

fn collect(mut r: Running, status: std::process::ExitStatus) -> WorkerResult {
    let mut stdout = String::new();
    let mut stderr = String::new();
    if let Some(mut s) = r.child.stdout.take() {
        let _ = s.read_to_string(&mut stdout);
    }
    if let Some(mut s) = r.child.stderr.take() {
        let _ = s.read_to_string(&mut stderr);
    }
    let summary = parse_summary(&stdout);
    let error = match (status.success(), summary) {
        (true, Some(_)) => None,
        (true, None) => Some("worker printed no summary".to_string()),
        (false, _) => Some(format!("worker exited with {status}: {}", stderr.trim())),
    };
    WorkerResult {
        index: r.index,
        elapsed_ms: summary.map(|s| s.0),
        peak_rss_bytes: Some(r.sampled_peak.max(summary.map_or(0, |s| s.1))).filter(|&p| p > 0),
        error,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_line_round_trip() {
        assert_eq!(parse_summary("noise\nelapsed_ms=12.5 peak_rss_bytes=4096\n"), Some((12.5, 4096)));
        assert_eq!(parse_summary("elapsed_ms=x peak_rss_bytes=1"), None);
        assert_eq!(parse_summary(""), None);
    }
}
