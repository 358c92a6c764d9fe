use std::fs::File;
use std::path::Path;

use super::format::{ContainerHeader, EntryIndex, SectionHeader, HEADER_LEN, SECTION_HEADER_LEN};
use super::reader::read_vec_at;
use super::SectionKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChecksumFailure {
    pub entry: u64,
    pub section: SectionKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifyReport {
    /// Entries found by walking section headers.
    pub entries_checked: u64,
    /// Entries whose four sections all passed their checksums.
    pub entries_ok: u64,
    pub checksum_failures: Vec<ChecksumFailure>,
    /// Header, walked entries, and trailing index agree and the index ends
    /// exactly at end of file.
    pub index_consistent: bool,
    pub problems: Vec<String>,
}

impl VerifyReport {
    pub fn is_ok(&self) -> bool {
        self.index_consistent && self.checksum_failures.is_empty() && self.problems.is_empty()
    }
}

struct Walked {
    offset: u64,
    length: u64,
}

/// Revalidate every section checksum and cross-check entry offsets against
/// section lengths and the trailing index. Never fails: unreadable files
/// produce a report listing the problem.
pub fn db_verify(path: impl AsRef<Path>) -> VerifyReport {
    let mut report = VerifyReport::default();
    let file = match File::open(path.as_ref()) {
        Ok(f) => f,
        Err(e) => {
            report.problems.push(format!("open: {e}"));
            return report;
        }
    };
    let file_len = match file.metadata() {
        Ok(m) => m.len(),
        Err(e) => {
            report.problems.push(format!("stat: {e}"));
            return report;
        }
    };

    let header = match read_vec_at(&file, 0, HEADER_LEN as u64, file_len)
        .and_then(|b| ContainerHeader::decode(&b))
    {
        Ok(h) => h,
        Err(e) => {
            report.problems.push(format!("header: {e}"));
            return report;
        }
    };
    let header_ok = match header.check() {
        Ok(()) => true,
        Err(e) => {
            report.problems.push(format!("header: {e}"));
            false
        }
    };
    if header.magic != super::format::MAGIC {
        return report;
    }

    let data_start = match read_vec_at(&file, HEADER_LEN as u64, 4, file_len) {
        Ok(b) => HEADER_LEN as u64 + 4 + u32::from_le_bytes(b.try_into().unwrap()) as u64,
        Err(e) => {
            report.problems.push(format!("schema text: {e}"));
            return report;
        }
    };
    let data_end = if header_ok && header.index_offset <= file_len {
        header.index_offset
    } else {
        file_len
    };

    let walked = walk_entries(&file, data_start, data_end, &mut report);

    report.index_consistent = header_ok
        && match index_matches(&file, &header, file_len, &walked) {
            Ok(()) => true,
            Err(problem) => {
                report.problems.push(problem);
                false
            }
        };
    report
}

fn walk_entries(file: &File, start: u64, end: u64, report: &mut VerifyReport) -> Vec<Walked> {
    let mut walked = Vec::new();
    let mut offset = start;
    'entries: while offset < end {
        let entry = walked.len() as u64;
        let entry_start = offset;
        let mut ok = true;
        for kind in SectionKind::ALL {
            let header = match read_vec_at(file, offset, SECTION_HEADER_LEN as u64, end)
                .and_then(|b| SectionHeader::decode(&b))
            {
                Ok(h) => h,
                Err(e) => {
                    report
                        .problems
                        .push(format!("entry {entry} {kind} header at {offset}: {e}"));
                    break 'entries;
                }
            };
            if header.section_id != kind as u32 {
                report.problems.push(format!(
                    "entry {entry}: expected {kind} section at {offset}, found id {}",
                    header.section_id
                ));
                break 'entries;
            }
            let payload_offset = offset + SECTION_HEADER_LEN as u64;
            let payload = match read_vec_at(file, payload_offset, header.compressed_len, end) {
                Ok(p) => p,
                Err(e) => {
                    report
                        .problems
                        .push(format!("entry {entry} {kind} payload: {e}"));
                    break 'entries;
                }
            };
            if crc32fast::hash(&payload) != header.checksum {
                report.checksum_failures.push(ChecksumFailure {
                    entry,
                    section: kind,
                });
                ok = false;
            }
            offset = payload_offset + header.compressed_len;
        }
        report.entries_checked += 1;
        if ok {
            report.entries_ok += 1;
        }
        walked.push(Walked {
            offset: entry_start,
            length: offset - entry_start,
        });
    }
    walked
}

fn index_matches(
    file: &File,
    header: &ContainerHeader,
    file_len: u64,
    walked: &[Walked],
) -> Result<(), String> {
    if header.index_offset > file_len {
        return Err(format!(
            "index offset {} past end of file ({file_len} bytes)",
            header.index_offset
        ));
    }
    let bytes = read_vec_at(file, header.index_offset, file_len - header.index_offset, file_len)
        .map_err(|e| format!("index: {e}"))?;
    let index = EntryIndex::decode(&bytes).map_err(|e| format!("index: {e}"))?;
    if index.entries.len() != walked.len() {
        return Err(format!(
            "index lists {} entries, file holds {}",
            index.entries.len(),
            walked.len()
        ));
    }
    for (k, (e, w)) in index.entries.iter().zip(walked).enumerate() {
        if e.byte_offset != w.offset || e.byte_length != w.length {
            return Err(format!(
                "entry {k}: index says {}+{}, sections span {}+{}",
                e.byte_offset, e.byte_length, w.offset, w.length
            ));
        }
    }
    if let Some(last) = walked.last() {
        if last.offset + last.length != header.index_offset {
            return Err("gap between last entry and index".into());
        }
    }
    Ok(())
}
