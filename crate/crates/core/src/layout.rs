//! Entity data layouts.
//!
//! [`flatten_sort`] turns time-major observations into instance-major
//! structure-of-arrays: every (step, entity) pair is flattened, stably
//! sorted by instance id (so each instance stays in time order), and
//! transposed into one column per field. The step of every element is kept
//! in `indices` so [`reconstruct`] can rebuild the time-major form.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{EntityRecord, ReplaySequence};
use crate::schema::Schema;
use crate::value::{ScalarType, Value};

/// One contiguous array of a single field's values.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    U8(Vec<u8>),
    U16(Vec<u16>),
    U32(Vec<u32>),
    U64(Vec<u64>),
    I32(Vec<i32>),
    F32(Vec<f32>),
    F64(Vec<f64>),
    Bool(Vec<bool>),
}

macro_rules! each_column {
    ($col:expr, $v:ident => $body:expr) => {
        match $col {
            Column::U8($v) => $body,
            Column::U16($v) => $body,
            Column::U32($v) => $body,
            Column::U64($v) => $body,
            Column::I32($v) => $body,
            Column::F32($v) => $body,
            Column::F64($v) => $body,
            Column::Bool($v) => $body,
        }
    };
}

impl Column {
    pub fn with_capacity(ty: ScalarType, capacity: usize) -> Column {
        match ty {
            ScalarType::U8 => Column::U8(Vec::with_capacity(capacity)),
            ScalarType::U16 => Column::U16(Vec::with_capacity(capacity)),
            ScalarType::U32 => Column::U32(Vec::with_capacity(capacity)),
            ScalarType::U64 => Column::U64(Vec::with_capacity(capacity)),
            ScalarType::I32 => Column::I32(Vec::with_capacity(capacity)),
            ScalarType::F32 => Column::F32(Vec::with_capacity(capacity)),
            ScalarType::F64 => Column::F64(Vec::with_capacity(capacity)),
            ScalarType::Bool => Column::Bool(Vec::with_capacity(capacity)),
        }
    }

    pub fn scalar_type(&self) -> ScalarType {
        match self {
            Column::U8(_) => ScalarType::U8,
            Column::U16(_) => ScalarType::U16,
            Column::U32(_) => ScalarType::U32,
            Column::U64(_) => ScalarType::U64,
            Column::I32(_) => ScalarType::I32,
            Column::F32(_) => ScalarType::F32,
            Column::F64(_) => ScalarType::F64,
            Column::Bool(_) => ScalarType::Bool,
        }
    }

    pub fn len(&self) -> usize {
        each_column!(self, v => v.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Append `value`; panics if its type differs from the column's.
    pub fn push(&mut self, value: Value) {
        match (self, value) {
            (Column::U8(c), Value::U8(v)) => c.push(v),
            (Column::U16(c), Value::U16(v)) => c.push(v),
            (Column::U32(c), Value::U32(v)) => c.push(v),
            (Column::U64(c), Value::U64(v)) => c.push(v),
            (Column::I32(c), Value::I32(v)) => c.push(v),
            (Column::F32(c), Value::F32(v)) => c.push(v),
            (Column::F64(c), Value::F64(v)) => c.push(v),
            (Column::Bool(c), Value::Bool(v)) => c.push(v),
            (c, v) => panic!("{} value pushed to {} column", v.scalar_type(), c.scalar_type()),
        }
    }

    pub fn get(&self, i: usize) -> Value {
        match self {
            Column::U8(c) => Value::U8(c[i]),
            Column::U16(c) => Value::U16(c[i]),
            Column::U32(c) => Value::U32(c[i]),
            Column::U64(c) => Value::U64(c[i]),
            Column::I32(c) => Value::I32(c[i]),
            Column::F32(c) => Value::F32(c[i]),
            Column::F64(c) => Value::F64(c[i]),
            Column::Bool(c) => Value::Bool(c[i]),
        }
    }

    pub fn write_le(&self, out: &mut Vec<u8>) {
        out.reserve(self.len() * self.scalar_type().width());
        match self {
            Column::U8(c) => out.extend_from_slice(c),
            Column::U16(c) => c.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes())),
            Column::U32(c) => c.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes())),
            Column::U64(c) => c.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes())),
            Column::I32(c) => c.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes())),
            Column::F32(c) => c.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes())),
            Column::F64(c) => c.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes())),
            Column::Bool(c) => out.extend(c.iter().map(|&b| b as u8)),
        }
    }

    /// Decode `len` values of type `ty` from the front of `bytes`.
    pub fn read_le(ty: ScalarType, bytes: &[u8], len: usize) -> Result<Column> {
        let need = len * ty.width();
        if bytes.len() < need {
            return Err(Error::malformed(format!(
                "{ty} column of {len} values needs {need} bytes, have {}",
                bytes.len()
            )));
        }
        let mut col = Column::with_capacity(ty, len);
        for chunk in bytes[..need].chunks_exact(ty.width()) {
            col.push(Value::read_le(ty, chunk)?);
        }
        Ok(col)
    }
}

/// Instance-major structure-of-arrays form of a replay's entity data.
#[derive(Debug, Clone, PartialEq)]
pub struct FlattenedSoA {
    /// One column per schema entity field, all of the same length.
    pub columns: Vec<Column>,
    /// Step of each flattened element.
    pub indices: Vec<u32>,
    pub declared_step_count: u64,
}

impl FlattenedSoA {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Encoded size of the entity section body.
    pub fn encoded_len(&self) -> usize {
        let widths: usize = self.columns.iter().map(|c| c.scalar_type().width()).sum();
        self.len() * (widths + 4) + 8
    }

    /// Serialize as the columns in field order, then the u32 step indices,
    /// then the u64 declared step count. The element count is implied by
    /// the total length.
    ///
    /// Indices are run-delta coded: an element whose instance id equals
    /// the previous element's stores the difference from the previous
    /// index, every other element stores its index as is. In instance-major
    /// order this turns each instance's time steps into a run of small
    /// deltas.
    pub fn to_bytes(&self, schema: &Schema) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        for c in &self.columns {
            c.write_le(&mut out);
        }
        self.write_indices(schema, &mut out);
        out.extend_from_slice(&self.declared_step_count.to_le_bytes());
        out
    }

    fn write_indices(&self, schema: &Schema, out: &mut Vec<u8>) {
        let ids = schema.instance_id_index().map(|f| &self.columns[f]);
        for (k, &index) in self.indices.iter().enumerate() {
            let coded = match ids {
                Some(ids) if k > 0 && ids.get(k) == ids.get(k - 1) => {
                    index.wrapping_sub(self.indices[k - 1])
                }
                _ => index,
            };
            out.extend_from_slice(&coded.to_le_bytes());
        }
    }

    pub fn from_bytes(schema: &Schema, bytes: &[u8]) -> Result<FlattenedSoA> {
        let body_len = bytes
            .len()
            .checked_sub(8)
            .ok_or_else(|| Error::malformed("entity section shorter than its trailer"))?;
        let stride = schema.record_width() + 4;
        if body_len % stride != 0 {
            return Err(Error::malformed(format!(
                "entity section body of {body_len} bytes is not a multiple of {stride}"
            )));
        }
        let len = body_len / stride;
        let mut offset = 0;
        let mut columns = Vec::with_capacity(schema.entity_fields.len());
        for f in &schema.entity_fields {
            columns.push(Column::read_le(f.scalar_type, &bytes[offset..], len)?);
            offset += len * f.scalar_type.width();
        }
        let ids = schema.instance_id_index().map(|f| &columns[f]);
        let mut indices: Vec<u32> = Vec::with_capacity(len);
        for (k, c) in bytes[offset..offset + 4 * len].chunks_exact(4).enumerate() {
            let coded = u32::from_le_bytes(c.try_into().unwrap());
            indices.push(match ids {
                Some(ids) if k > 0 && ids.get(k) == ids.get(k - 1) => indices[k - 1].wrapping_add(coded),
                _ => coded,
            });
        }
        offset += 4 * len;
        let declared_step_count = u64::from_le_bytes(bytes[offset..offset + 8].try_into().unwrap());
        Ok(FlattenedSoA {
            columns,
            indices,
            declared_step_count,
        })
    }
}

/// Flatten, stably sort by `key`, and transpose to columns.
///
/// The sort is stable, so elements with equal keys keep their flattening
/// order, which is time order.
pub fn flatten_sort_by<K: Ord>(
    seq: &ReplaySequence,
    schema: &Schema,
    mut key: impl FnMut(&EntityRecord) -> K,
) -> FlattenedSoA {
    let mut pairs: Vec<(u32, &EntityRecord)> = seq
        .observations
        .iter()
        .flat_map(|o| o.entities.iter().map(move |e| (o.step, e)))
        .collect();
    pairs.sort_by_key(|(_, e)| key(e));

    let mut columns: Vec<Column> = schema
        .entity_fields
        .iter()
        .map(|f| Column::with_capacity(f.scalar_type, pairs.len()))
        .collect();
    for (_, e) in &pairs {
        for (col, v) in columns.iter_mut().zip(e.values()) {
            col.push(*v);
        }
    }
    FlattenedSoA {
        columns,
        indices: pairs.iter().map(|(step, _)| *step).collect(),
        declared_step_count: seq.declared_step_count,
    }
}

/// Instance-major transform grouped by instance id.
pub fn flatten_sort(seq: &ReplaySequence, schema: &Schema) -> FlattenedSoA {
    let id = schema
        .instance_id_index()
        .expect("flatten_sort requires a schema with an instance_id field");
    flatten_sort_by(seq, schema, |e| e.uid(id))
}

/// Rebuild time-major entity lists: exactly `declared_step_count` steps,
/// element `k` appended to step `indices[k]` in flattened order.
pub fn reconstruct(flat: &FlattenedSoA) -> Result<Vec<Vec<EntityRecord>>> {
    let len = flat.indices.len();
    if let Some(c) = flat.columns.iter().find(|c| c.len() != len) {
        return Err(Error::malformed(format!(
            "column of {} values alongside {len} indices",
            c.len()
        )));
    }
    if let Some((position, &index)) = flat
        .indices
        .iter()
        .enumerate()
        .find(|(_, &i)| i as u64 >= flat.declared_step_count)
    {
        return Err(Error::CorruptIndex {
            position,
            index: index as u64,
            declared: flat.declared_step_count,
        });
    }
    let mut steps: Vec<Vec<EntityRecord>> = vec![Vec::new(); flat.declared_step_count as usize];
    for (k, &step) in flat.indices.iter().enumerate() {
        let record = EntityRecord::new(flat.columns.iter().map(|c| c.get(k)).collect());
        steps[step as usize].push(record);
    }
    Ok(steps)
}

/// Orderings of the (timestep, unit, attribute) cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayoutOrder {
    /// Timestep x units x attributes: array of structures per step.
    Tnu,
    /// Timestep x attributes x units: structure of arrays per step.
    Tun,
    /// Attributes x timestep x units: time-major columns.
    Utn,
    /// Attributes x units x timestep: instance-major columns.
    Unt,
}

impl LayoutOrder {
    pub const ALL: [LayoutOrder; 4] = [
        LayoutOrder::Tnu,
        LayoutOrder::Tun,
        LayoutOrder::Utn,
        LayoutOrder::Unt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LayoutOrder::Tnu => "TNU",
            LayoutOrder::Tun => "TUN",
            LayoutOrder::Utn => "UTN",
            LayoutOrder::Unt => "UNT",
        }
    }
}

impl fmt::Display for LayoutOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LayoutOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LayoutOrder::ALL
            .into_iter()
            .find(|o| o.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidFilter(format!("unknown layout order {s:?}")))
    }
}

/// Entity values of `seq` laid out in `order`, ready for compression.
///
/// The three time-first orders emit ragged steps without padding. `Unt`
/// is the flattened column data followed by the run-delta coded step
/// indices: a container's entity section minus its 8-byte step count.
pub fn relayout(seq: &ReplaySequence, schema: &Schema, order: LayoutOrder) -> Vec<u8> {
    let fields = schema.entity_fields.len();
    let mut out = Vec::with_capacity(seq.entity_observation_count() * schema.record_width());
    match order {
        LayoutOrder::Tnu => {
            for obs in &seq.observations {
                for e in &obs.entities {
                    e.values().iter().for_each(|v| v.write_le(&mut out));
                }
            }
        }
        LayoutOrder::Tun => {
            for obs in &seq.observations {
                for f in 0..fields {
                    obs.entities.iter().for_each(|e| e.get(f).write_le(&mut out));
                }
            }
        }
        LayoutOrder::Utn => {
            for f in 0..fields {
                for obs in &seq.observations {
                    obs.entities.iter().for_each(|e| e.get(f).write_le(&mut out));
                }
            }
        }
        LayoutOrder::Unt => {
            let flat = flatten_sort(seq, schema);
            for c in &flat.columns {
                c.write_le(&mut out);
            }
            flat.write_indices(schema, &mut out);
        }
    }
    out
}
