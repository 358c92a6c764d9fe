use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::store::csv_error;

/// Column header shared by every report kind.
pub const REPORT_HEADER: [&str; 9] = [
    "kind",
    "label",
    "size_bytes",
    "decompressed_bytes",
    "mean_ms",
    "std_ms",
    "trials",
    "peak_rss_bytes",
    "cores",
];

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub label: String,
    pub size_bytes: Option<u64>,
    pub decompressed_bytes: Option<u64>,
    pub mean_ms: Option<f64>,
    /// Present only when `trials >= 2`.
    pub std_ms: Option<f64>,
    pub trials: u32,
    pub peak_rss_bytes: Option<u64>,
}

impl BenchRow {
    pub fn sized(label: impl Into<String>, size_bytes: u64) -> Self {
        BenchRow {
            label: label.into(),
            size_bytes: Some(size_bytes),
            decompressed_bytes: None,
            mean_ms: None,
            std_ms: None,
            trials: 1,
            peak_rss_bytes: None,
        }
    }

    /// Row with mean and (for two or more samples) sample std of `samples_ms`.
    pub fn timed(label: impl Into<String>, samples_ms: &[f64]) -> Self {
        assert!(!samples_ms.is_empty(), "a timed row needs at least one trial");
        let (mean, std) = mean_std(samples_ms);
        BenchRow {
            label: label.into(),
            size_bytes: None,
            decompressed_bytes: None,
            mean_ms: Some(mean),
            std_ms: std,
            trials: samples_ms.len() as u32,
            peak_rss_bytes: None,
        }
    }
}

/// Mean and unbiased standard deviation (`None` below two samples).
pub fn mean_std(samples: &[f64]) -> (f64, Option<f64>) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let std = (samples.len() >= 2).then(|| {
        let ss: f64 = samples.iter().map(|s| (s - mean) * (s - mean)).sum();
        (ss / (n - 1.0)).sqrt()
    });
    (mean, std)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub kind: String,
    pub rows: Vec<BenchRow>,
    pub cores: usize,
}

pub fn core_count() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl BenchReport {
    pub fn new(kind: impl Into<String>, rows: Vec<BenchRow>) -> Self {
        BenchReport {
            kind: kind.into(),
            rows,
            cores: core_count(),
        }
    }

    pub fn row(&self, label: &str) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(REPORT_HEADER).map_err(csv_error)?;
        let opt = |v: Option<String>| v.unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                self.kind.clone(),
                r.label.clone(),
                opt(r.size_bytes.map(|v| v.to_string())),
                opt(r.decompressed_bytes.map(|v| v.to_string())),
                opt(r.mean_ms.map(|v| format!("{v:.4}"))),
                opt(r.std_ms.map(|v| format!("{v:.4}"))),
                r.trials.to_string(),
                opt(r.peak_rss_bytes.map(|v| v.to_string())),
                self.cores.to_string(),
            ])
            .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = Vec::new();
        self.write_csv(&mut out).expect("writing to memory");
        String::from_utf8(out).expect("csv output is utf-8")
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    /// Parse a report written by [`BenchReport::write_csv`].
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let bad = |m: String| Error::malformed(format!("report: {m}"));
        let mut rdr = csv::Reader::from_reader(input);
        let header = rdr.headers().map_err(csv_error)?.clone();
        if header.iter().ne(REPORT_HEADER) {
            return Err(bad(format!("unexpected header {header:?}")));
        }
        let mut kind = None;
        let mut cores = 0;
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(csv_error)?;
            let cell = |i: usize| rec.get(i).unwrap_or("");
            let num = |i: usize| -> Result<Option<f64>> {
                match cell(i) {
                    "" => Ok(None),
                    s => s.parse().map(Some).map_err(|_| bad(format!("bad number {s:?}"))),
                }
            };
            let int = |i: usize| -> Result<Option<u64>> {
                match cell(i) {
                    "" => Ok(None),
                    s => s.parse().map(Some).map_err(|_| bad(format!("bad integer {s:?}"))),
                }
            };
            kind.get_or_insert_with(|| cell(0).to_string());
            cores = int(8)?.unwrap_or(0) as usize;
            rows.push(BenchRow {
                label: cell(1).to_string(),
                size_bytes: int(2)?,
                decompressed_bytes: int(3)?,
                mean_ms: num(4)?,
                std_ms: num(5)?,
                trials: int(6)?.ok_or_else(|| bad("missing trials".into()))? as u32,
                peak_rss_bytes: int(7)?,
            });
        }
        Ok(BenchReport {
            kind: kind.unwrap_or_default(),
            rows,
            cores,
        })
    }
}
