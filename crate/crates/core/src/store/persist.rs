//! Store file: a text header naming the columns and their types, then
//! fixed-width little-endian binary columns, then a string heap.
//!
//! ```text
//! TERCIDX1
//! rows <n>
//! heap <bytes>
//! column <name> <type>      one line per field, in row field order
//! end
//! <columns>                 text: n x (u64 heap offset, u32 length)
//!                           u64/f64: n x 8 bytes; i32?: n x (u8 present, i32)
//! <heap>                    concatenated utf-8 strings
//! ```

use super::{FieldKind, MetadataRow, FIELDS};
use crate::container::format::Cursor;
use crate::error::{Error, Result};

const MAGIC: &str = "TERCIDX1";

pub(super) fn encode(rows: &[MetadataRow]) -> Vec<u8> {
    let mut heap = Vec::new();
    let mut body = Vec::new();
    for (name, kind) in FIELDS {
        for row in rows {
            match kind {
                FieldKind::Text => {
                    let s = text_field(row, name);
                    body.extend_from_slice(&(heap.len() as u64).to_le_bytes());
                    body.extend_from_slice(&(s.len() as u32).to_le_bytes());
                    heap.extend_from_slice(s.as_bytes());
                }
                FieldKind::U64 => body.extend_from_slice(&u64_field(row, name).to_le_bytes()),
                FieldKind::OptI32 => {
                    body.push(row.outcome_label.is_some() as u8);
                    body.extend_from_slice(&row.outcome_label.unwrap_or(0).to_le_bytes());
                }
                FieldKind::F64 => body.extend_from_slice(&row.apm_analog.to_le_bytes()),
            }
        }
    }
    let mut out = format!("{MAGIC}\nrows {}\nheap {}\n", rows.len(), heap.len());
    for (name, kind) in FIELDS {
        out.push_str(&format!("column {name} {}\n", kind.name()));
    }
    out.push_str("end\n");
    let mut out = out.into_bytes();
    out.extend_from_slice(&body);
    out.extend_from_slice(&heap);
    out
}

fn text_field<'a>(row: &'a MetadataRow, name: &str) -> &'a str {
    match name {
        "container_path" => &row.container_path,
        "replay_id" => &row.replay_id,
        "scenario_tag" => &row.scenario_tag,
        _ => unreachable!("{name} is not a text field"),
    }
}

fn u64_field(row: &MetadataRow, name: &str) -> u64 {
    match name {
        "entry_ordinal" => row.entry_ordinal,
        "duration_steps" => row.duration_steps,
        "entity_count_peak" => row.entity_count_peak,
        "action_count" => row.action_count,
        "schema_hash" => row.schema_hash,
        _ => unreachable!("{name} is not a u64 field"),
    }
}

fn width(kind: FieldKind) -> usize {
    match kind {
        FieldKind::Text => 12,
        FieldKind::U64 | FieldKind::F64 => 8,
        FieldKind::OptI32 => 5,
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::malformed(format!("store file: {}", msg.into()))
}

/// Split off one `\n`-terminated header line.
fn line<'a>(bytes: &mut &'a [u8]) -> Result<&'a str> {
    let end = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| bad("truncated header"))?;
    let text = std::str::from_utf8(&bytes[..end]).map_err(|_| bad("header is not utf-8"))?;
    *bytes = &bytes[end + 1..];
    Ok(text)
}

fn count(text: &str, key: &str) -> Result<usize> {
    text.strip_prefix(key)
        .and_then(|v| v.strip_prefix(' '))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad(format!("expected `{key} <n>`, found {text:?}")))
}

pub(super) fn decode(bytes: &[u8]) -> Result<Vec<MetadataRow>> {
    let mut rest = bytes;
    if line(&mut rest)? != MAGIC {
        return Err(bad("bad magic"));
    }
    let n = count(line(&mut rest)?, "rows")?;
    let heap_len = count(line(&mut rest)?, "heap")?;
    for (name, kind) in FIELDS {
        let expected = format!("column {name} {}", kind.name());
        let found = line(&mut rest)?;
        if found != expected {
            return Err(bad(format!("expected {expected:?}, found {found:?}")));
        }
    }
    if line(&mut rest)? != "end" {
        return Err(bad("missing end of header"));
    }
    let row_width: usize = FIELDS.iter().map(|(_, k)| width(*k)).sum();
    let body_len = n
        .checked_mul(row_width)
        .and_then(|b| b.checked_add(heap_len))
        .ok_or_else(|| bad("sizes overflow"))?;
    if rest.len() != body_len {
        return Err(bad(format!("expected {body_len} data bytes, found {}", rest.len())));
    }
    let heap = &rest[n * row_width..];

    let mut rows: Vec<MetadataRow> = (0..n)
        .map(|_| MetadataRow {
            container_path: String::new(),
            entry_ordinal: 0,
            replay_id: String::new(),
            scenario_tag: String::new(),
            duration_steps: 0,
            entity_count_peak: 0,
            action_count: 0,
            outcome_label: None,
            schema_hash: 0,
            apm_analog: 0.0,
        })
        .collect();
    let mut cur = Cursor::new(&rest[..n * row_width]);
    for (name, kind) in FIELDS {
        for row in rows.iter_mut() {
            match kind {
                FieldKind::Text => {
                    let offset = cur.u64()? as usize;
                    let len = cur.u32()? as usize;
                    let raw = offset
                        .checked_add(len)
                        .and_then(|end| heap.get(offset..end))
                        .ok_or_else(|| bad("string outside heap"))?;
                    let s = String::from_utf8(raw.to_vec()).map_err(|_| bad("string is not utf-8"))?;
                    match name {
                        "container_path" => row.container_path = s,
                        "replay_id" => row.replay_id = s,
                        _ => row.scenario_tag = s,
                    }
                }
                FieldKind::U64 => {
                    let v = cur.u64()?;
                    match name {
                        "entry_ordinal" => row.entry_ordinal = v,
                        "duration_steps" => row.duration_steps = v,
                        "entity_count_peak" => row.entity_count_peak = v,
                        "action_count" => row.action_count = v,
                        _ => row.schema_hash = v,
                    }
                }
                FieldKind::OptI32 => {
                    let present = cur.u8()?;
                    let v = cur.i32()?;
                    row.outcome_label = match present {
                        0 => None,
                        1 => Some(v),
                        _ => return Err(bad("bad null flag")),
                    };
                }
                FieldKind::F64 => row.apm_analog = f64::from_bits(cur.u64()?),
            }
        }
    }
    Ok(rows)
}
