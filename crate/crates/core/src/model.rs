//! Time-major replay data: observations of a dynamic entity set.

use crate::error::{Error, Result};
use crate::schema::{PlaneElement, Schema};
use crate::value::Value;

/// One entity's values, in schema field order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EntityRecord(pub Vec<Value>);

impl EntityRecord {
    pub fn new(values: Vec<Value>) -> Self {
        EntityRecord(values)
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }

    pub fn get(&self, field: usize) -> Value {
        self.0[field]
    }

    pub fn set(&mut self, field: usize, value: Value) {
        self.0[field] = value;
    }

    /// Instance id as an unsigned integer; panics if `id_field` is not an
    /// unsigned integer column, which a validated schema rules out.
    pub fn uid(&self, id_field: usize) -> u64 {
        self.0[id_field]
            .as_u64()
            .expect("instance_id field holds an unsigned integer")
    }
}

/// Row-major 2-D grid for one plane channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlaneData {
    Bool(Vec<bool>),
    U8(Vec<u8>),
}

impl PlaneData {
    pub fn len(&self) -> usize {
        match self {
            PlaneData::Bool(v) => v.len(),
            PlaneData::U8(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn element(&self) -> PlaneElement {
        match self {
            PlaneData::Bool(_) => PlaneElement::Bool,
            PlaneData::U8(_) => PlaneElement::U8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub step: u32,
    pub entities: Vec<EntityRecord>,
    pub scalars: Vec<Value>,
    pub planes: Vec<PlaneData>,
}

impl Observation {
    pub fn new(step: u32) -> Self {
        Observation {
            step,
            entities: Vec::new(),
            scalars: Vec::new(),
            planes: Vec::new(),
        }
    }

    /// Empty observation whose scalars are zero and planes blank, shaped for `schema`.
    pub fn blank(step: u32, schema: &Schema) -> Self {
        Observation {
            step,
            entities: Vec::new(),
            scalars: schema
                .scalar_channels
                .iter()
                .map(|c| c.scalar_type.zero())
                .collect(),
            planes: schema
                .plane_channels
                .iter()
                .map(|p| match p.element {
                    PlaneElement::Bool => PlaneData::Bool(vec![false; p.pixels()]),
                    PlaneElement::U8 => PlaneData::U8(vec![0; p.pixels()]),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayMetadata {
    pub replay_id: String,
    pub scenario_tag: String,
    pub duration_steps: u64,
    pub entity_count_peak: u64,
    pub action_count: u64,
    pub outcome_label: Option<i32>,
    pub schema_hash: u64,
}

impl ReplayMetadata {
    pub fn new(replay_id: impl Into<String>, scenario_tag: impl Into<String>, schema: &Schema) -> Self {
        ReplayMetadata {
            replay_id: replay_id.into(),
            scenario_tag: scenario_tag.into(),
            duration_steps: 0,
            entity_count_peak: 0,
            action_count: 0,
            outcome_label: None,
            schema_hash: schema.hash(),
        }
    }
}

/// A recorded replay: metadata plus observations in strictly increasing
/// step order. `declared_step_count` may exceed the last observed step so
/// that trailing empty steps survive a round trip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplaySequence {
    pub metadata: ReplayMetadata,
    pub observations: Vec<Observation>,
    pub declared_step_count: u64,
}

impl ReplaySequence {
    /// Build a sequence, deriving `duration_steps` and `entity_count_peak`.
    pub fn new(
        mut metadata: ReplayMetadata,
        observations: Vec<Observation>,
        declared_step_count: u64,
    ) -> Self {
        metadata.duration_steps = declared_step_count;
        metadata.entity_count_peak = observations
            .iter()
            .map(|o| o.entities.len() as u64)
            .max()
            .unwrap_or(0);
        ReplaySequence {
            metadata,
            observations,
            declared_step_count,
        }
    }

    pub fn entity_observation_count(&self) -> usize {
        self.observations.iter().map(|o| o.entities.len()).sum()
    }

    /// Check the sequence against `schema`: step ordering, declared length,
    /// metadata consistency, and the shape and types of every value.
    pub fn validate(&self, schema: &Schema) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidReplay(msg));
        if self.metadata.schema_hash != schema.hash() {
            return Err(Error::SchemaMismatch {
                expected: schema.hash(),
                found: self.metadata.schema_hash,
            });
        }
        if self.metadata.duration_steps != self.declared_step_count {
            return bad(format!(
                "duration_steps {} differs from declared_step_count {}",
                self.metadata.duration_steps, self.declared_step_count
            ));
        }
        if self.declared_step_count > u32::MAX as u64 + 1 {
            return bad(format!(
                "declared_step_count {} exceeds the 32-bit step index range",
                self.declared_step_count
            ));
        }
        let mut prev: Option<u32> = None;
        for obs in &self.observations {
            if prev.is_some_and(|p| obs.step <= p) {
                return bad(format!("step {} does not increase", obs.step));
            }
            prev = Some(obs.step);
            if obs.step as u64 >= self.declared_step_count {
                return bad(format!(
                    "step {} not covered by declared_step_count {}",
                    obs.step, self.declared_step_count
                ));
            }
            for e in &obs.entities {
                if e.0.len() != schema.entity_fields.len() {
                    return bad(format!(
                        "entity at step {} has {} values, schema has {} fields",
                        obs.step,
                        e.0.len(),
                        schema.entity_fields.len()
                    ));
                }
                for (v, f) in e.0.iter().zip(&schema.entity_fields) {
                    if v.scalar_type() != f.scalar_type {
                        return bad(format!(
                            "field {} at step {} holds {} not {}",
                            f.name,
                            obs.step,
                            v.scalar_type(),
                            f.scalar_type
                        ));
                    }
                }
            }
            if obs.scalars.len() != schema.scalar_channels.len()
                || obs
                    .scalars
                    .iter()
                    .zip(&schema.scalar_channels)
                    .any(|(v, c)| v.scalar_type() != c.scalar_type)
            {
                return bad(format!("scalars at step {} do not match schema", obs.step));
            }
            if obs.planes.len() != schema.plane_channels.len() {
                return bad(format!("plane count at step {} does not match schema", obs.step));
            }
            for (p, d) in obs.planes.iter().zip(&schema.plane_channels) {
                if p.element() != d.element || p.len() != d.pixels() {
                    return bad(format!(
                        "plane {} at step {} has wrong shape or element type",
                        d.name, obs.step
                    ));
                }
            }
        }
        let peak = self
            .observations
            .iter()
            .map(|o| o.entities.len() as u64)
            .max()
            .unwrap_or(0);
        if peak != self.metadata.entity_count_peak {
            return bad(format!(
                "entity_count_peak {} but observed peak is {peak}",
                self.metadata.entity_count_peak
            ));
        }
        Ok(())
    }

    /// Copy with every observation's entities stably sorted by instance id,
    /// the order a flatten/reconstruct round trip produces.
    pub fn canonicalize(&self, schema: &Schema) -> ReplaySequence {
        let mut out = self.clone();
        if let Some(id) = schema.instance_id_index() {
            for obs in &mut out.observations {
                obs.entities.sort_by_key(|e| e.uid(id));
            }
        }
        out
    }
}
