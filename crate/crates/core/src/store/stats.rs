use std::collections::BTreeMap;
use std::io::Write;
use std::str::FromStr;

use super::{csv_error, field_kind, Cell, MetadataStore};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Count,
    Mean,
    Std,
    Histogram(u32),
}

/// Accepts `count`, `mean`, `std`, `histogram:BINS`.
impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None => match s {
                "count" => Ok(Measure::Count),
                "mean" => Ok(Measure::Mean),
                "std" => Ok(Measure::Std),
                _ => Err(Error::InvalidFilter(format!("unknown measure {s:?}"))),
            },
            Some(("histogram", bins)) => match bins.parse::<u32>() {
                Ok(b) if b > 0 => Ok(Measure::Histogram(b)),
                _ => Err(Error::InvalidFilter(format!("histogram needs a positive bin count, got {bins:?}"))),
            },
            Some(_) => Err(Error::InvalidFilter(format!("unknown measure {s:?}"))),
        }
    }
}

/// Equal-width bins; `edges` has one more element than `counts`, the last
/// bin is closed on the right.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatsRow {
    pub group: String,
    /// Rows in the group, including rows whose value is null.
    pub count: u64,
    pub mean: Option<f64>,
    /// Unbiased sample standard deviation; needs two values.
    pub std: Option<f64>,
    pub histogram: Option<Histogram>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatsTable {
    pub group_by: String,
    pub value_field: Option<String>,
    pub measures: Vec<Measure>,
    pub rows: Vec<StatsRow>,
}

/// Aggregate `value_field` per distinct `group_by` value, groups in
/// ascending text order. Null values are excluded from mean, std and
/// histograms. Histogram edges span the value range over all groups so
/// groups are directly comparable.
pub fn stats(
    store: &MetadataStore,
    group_by: &str,
    value_field: Option<&str>,
    measures: &[Measure],
) -> Result<StatsTable> {
    if !field_kind(group_by)?.is_categorical() {
        return Err(Error::InvalidFilter(format!("{group_by} is not categorical")));
    }
    let needs_value = measures.iter().any(|m| *m != Measure::Count);
    let value_field = match value_field {
        Some(f) => {
            if !field_kind(f)?.is_numeric() {
                return Err(Error::InvalidFilter(format!("{f} is not numeric")));
            }
            Some(f)
        }
        None if needs_value => {
            return Err(Error::InvalidFilter("mean, std and histogram need a value field".into()))
        }
        None => None,
    };

    let mut groups: BTreeMap<String, (u64, Vec<f64>)> = BTreeMap::new();
    for row in store.rows() {
        let entry = groups.entry(row.cell(group_by)?.to_string()).or_default();
        entry.0 += 1;
        if let Some(f) = value_field {
            match row.cell(f)? {
                Cell::Int(v) => entry.1.push(v as f64),
                Cell::Float(v) => entry.1.push(v),
                _ => {}
            }
        }
    }

    let all = groups.values().flat_map(|(_, v)| v.iter().copied());
    let range = all.fold(None, |acc: Option<(f64, f64)>, v| {
        Some(acc.map_or((v, v), |(lo, hi)| (lo.min(v), hi.max(v))))
    });

    let rows = groups
        .into_iter()
        .map(|(group, (count, values))| {
            let mean = mean(&values);
            let mut row = StatsRow {
                group,
                count,
                mean: None,
                std: None,
                histogram: None,
            };
            for m in measures {
                match *m {
                    Measure::Count => {}
                    Measure::Mean => row.mean = mean,
                    Measure::Std => row.std = sample_std(&values),
                    Measure::Histogram(bins) => row.histogram = Some(histogram(&values, bins, range)),
                }
            }
            row
        })
        .collect();
    Ok(StatsTable {
        group_by: group_by.to_string(),
        value_field: value_field.map(str::to_string),
        measures: measures.to_vec(),
        rows,
    })
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

fn sample_std(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values)?;
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    Some((ss / (values.len() - 1) as f64).sqrt())
}

fn histogram(values: &[f64], bins: u32, range: Option<(f64, f64)>) -> Histogram {
    let (lo, hi) = range.unwrap_or((0.0, 0.0));
    let width = (hi - lo) / bins as f64;
    let edges = (0..=bins).map(|i| if i == bins { hi } else { lo + width * i as f64 }).collect();
    let mut counts = vec![0u64; bins as usize];
    for &v in values {
        let bin = if width > 0.0 { ((v - lo) / width).floor() as usize } else { 0 };
        counts[bin.min(bins as usize - 1)] += 1;
    }
    Histogram { edges, counts }
}

impl StatsTable {
    /// Comma-separated output: group, count, then one column per requested
    /// measure (histograms as `;`-joined edges and counts).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![self.group_by.clone(), "count".to_string()];
        for m in &self.measures {
            match m {
                Measure::Count => {}
                Measure::Mean => header.push("mean".into()),
                Measure::Std => header.push("std".into()),
                Measure::Histogram(_) => {
                    header.push("hist_edges".into());
                    header.push("hist_counts".into());
                }
            }
        }
        w.write_record(&header).map_err(csv_error)?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let join = |xs: Vec<String>| xs.join(";");
        for row in &self.rows {
            let mut rec = vec![row.group.clone(), row.count.to_string()];
            for m in &self.measures {
                match m {
                    Measure::Count => {}
                    Measure::Mean => rec.push(opt(row.mean)),
                    Measure::Std => rec.push(opt(row.std)),
                    Measure::Histogram(_) => {
                        let h = row.histogram.as_ref().expect("histogram requested");
                        rec.push(join(h.edges.iter().map(f64::to_string).collect()));
                        rec.push(join(h.counts.iter().map(u64::to_string).collect()));
                    }
                }
            }
            w.write_record(&rec).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}
