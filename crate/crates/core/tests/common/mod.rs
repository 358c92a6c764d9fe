#![allow(dead_code)]

use std::path::Path;

use proptest::prelude::*;
use terc::container::ContainerWriter;
use terc::model::{EntityRecord, Observation, PlaneData, ReplayMetadata, ReplaySequence};
use terc::schema::{Dynamics, FieldDescriptor, FieldRole, PlaneDescriptor, PlaneElement, Schema};
use terc::simgen::{generate, rng::derive_seed, sample_owned, SamplingPolicy, WorkloadSpec};
use terc::value::{ScalarType, Value};

/// A schema exercising every scalar type, an odd-sized bool plane (so
/// packing needs padding) and a u8 plane.
pub fn mixed_schema() -> Schema {
    use Dynamics::*;
    Schema::new(vec![
        FieldDescriptor::new("uid", ScalarType::U16, Static, FieldRole::InstanceId),
        FieldDescriptor::new("x", ScalarType::F32, Fast, FieldRole::Position),
        FieldDescriptor::new("y", ScalarType::F32, Fast, FieldRole::Position),
        FieldDescriptor::generic("kind", ScalarType::U8, Static),
        FieldDescriptor::generic("alive", ScalarType::Bool, Slow),
        FieldDescriptor::generic("energy", ScalarType::F64, Fast),
        FieldDescriptor::generic("delta", ScalarType::I32, Fast),
        FieldDescriptor::generic("tag", ScalarType::U64, Static),
        FieldDescriptor::generic("count", ScalarType::U32, Slow),
    ])
    .with_scalar(FieldDescriptor::generic("score", ScalarType::U32, Slow))
    .with_scalar(FieldDescriptor::generic("ratio", ScalarType::F32, Fast))
    .with_plane(PlaneDescriptor::new("seen", 5, 3, PlaneElement::Bool))
    .with_plane(PlaneDescriptor::new("heat", 2, 2, PlaneElement::U8))
}

fn value(ty: ScalarType) -> BoxedStrategy<Value> {
    match ty {
        ScalarType::F32 => any::<u32>().prop_map(|b| Value::F32(f32::from_bits(b))).boxed(),
        ScalarType::F64 => any::<u64>().prop_map(|b| Value::F64(f64::from_bits(b))).boxed(),
        // Small ranges so runs and repeated values occur.
        ScalarType::U8 | ScalarType::Bool => (0u64..4).prop_map(move |v| Value::from_u64(ty, v)).boxed(),
        _ => any::<u64>().prop_map(move |v| Value::from_u64(ty, v)).boxed(),
    }
}

fn entity(schema: &Schema) -> impl Strategy<Value = EntityRecord> {
    let parts: Vec<BoxedStrategy<Value>> = schema
        .entity_fields
        .iter()
        .map(|f| {
            if f.role == FieldRole::InstanceId {
                (0u64..200).prop_map(|v| Value::U16(v as u16)).boxed()
            } else {
                value(f.scalar_type)
            }
        })
        .collect();
    parts.prop_map(EntityRecord::new)
}

fn observation(schema: &Schema, step: u32, max_entities: usize) -> impl Strategy<Value = Observation> {
    let scalars: Vec<BoxedStrategy<Value>> = schema.scalar_channels.iter().map(|c| value(c.scalar_type)).collect();
    let planes: Vec<BoxedStrategy<PlaneData>> = schema
        .plane_channels
        .iter()
        .map(|p| match p.element {
            PlaneElement::Bool => proptest::collection::vec(any::<bool>(), p.pixels()).prop_map(PlaneData::Bool).boxed(),
            PlaneElement::U8 => proptest::collection::vec(any::<u8>(), p.pixels()).prop_map(PlaneData::U8).boxed(),
        })
        .collect();
    (
        proptest::collection::vec(entity(schema), 0..=max_entities),
        scalars,
        planes,
    )
        .prop_map(move |(entities, scalars, planes)| Observation {
            step,
            entities,
            scalars,
            planes,
        })
}

/// Arbitrary valid sequences: possibly empty, with empty observations,
/// gaps, trailing unobserved steps, and up to `max_entities` per step.
pub fn sequence(schema: Schema, max_entities: usize) -> impl Strategy<Value = ReplaySequence> {
    (proptest::collection::vec(1u32..5, 0..6), 0u64..4, any::<bool>())
        .prop_flat_map(move |(gaps, trailing, sparse)| {
            let mut step = 0u32;
            let steps: Vec<u32> = gaps
                .iter()
                .enumerate()
                .map(|(i, g)| {
                    if i > 0 {
                        step += g;
                    }
                    step
                })
                .collect();
            let declared = steps.last().map_or(0, |s| *s as u64 + 1) + trailing;
            let cap = if sparse { 2 } else { max_entities };
            let obs: Vec<_> = steps.iter().map(|s| observation(&schema, *s, cap)).collect();
            let schema = schema.clone();
            (obs, Just(declared), any::<u64>(), any::<Option<i32>>()).prop_map(move |(obs, declared, actions, label)| {
                let mut meta = ReplayMetadata::new(format!("p-{actions:x}"), "prop", &schema);
                meta.action_count = actions;
                meta.outcome_label = label;
                ReplaySequence::new(meta, obs, declared)
            })
        })
}

/// W1 with a different step count.
pub fn w1_with_steps(steps: u32) -> WorkloadSpec {
    let mut spec = WorkloadSpec::w1();
    spec.step_count = steps;
    spec
}

/// Replay `k` of a corpus generated from `base_seed`, every step recorded.
pub fn w1_replay(spec: &WorkloadSpec, base_seed: u64, k: u64) -> ReplaySequence {
    sample_owned(generate(spec, derive_seed(base_seed, k)).unwrap(), SamplingPolicy::EveryStep)
}

/// Write `replays` to a finalized container at `path`.
pub fn write_container(path: &Path, schema: &Schema, replays: &[ReplaySequence]) {
    let mut w = ContainerWriter::create(path, schema).unwrap();
    for r in replays {
        w.append(r).unwrap();
    }
    w.finalize().unwrap();
}

pub mod store {
    use std::cmp::Ordering;

    use terc::simgen::rng::SimRng;
    use terc::store::{FilterOp, MetadataRow, Predicate, FIELDS};

    const TAGS: [&str; 4] = ["warehouse", "harbor", "mine", "warehouse-b"];

    /// `n` rows with repeated values, nulls, and zero-length replays.
    pub fn random_rows(rng: &mut SimRng, n: usize) -> Vec<MetadataRow> {
        (0..n)
            .map(|i| {
                let duration = [0, 1, 500, 5000, 10_000][rng.below(5) as usize] + rng.below(3);
                let actions = rng.below(3000);
                MetadataRow {
                    container_path: format!("/data/c{}.terc", rng.below(7)),
                    entry_ordinal: i as u64,
                    replay_id: format!("{}-{:04}", TAGS[rng.below(4) as usize], rng.below(1000)),
                    scenario_tag: TAGS[rng.below(4) as usize].to_string(),
                    duration_steps: duration,
                    entity_count_peak: rng.below(130),
                    action_count: actions,
                    outcome_label: if rng.below(4) == 0 { None } else { Some(rng.below(3) as i32 - 1) },
                    schema_hash: [0xdead_beef, u64::MAX, 42][rng.below(3) as usize],
                    apm_analog: terc::store::apm(actions, duration, 1.0 / 22.4),
                }
            })
            .collect()
    }

    /// A random predicate whose operand is usually drawn from `rows`.
    pub fn random_predicate(rng: &mut SimRng, rows: &[MetadataRow]) -> Predicate {
        let field = FIELDS[rng.below(FIELDS.len() as u64) as usize].0;
        let row = &rows[rng.below(rows.len() as u64) as usize];
        let text = rendered(row, field).unwrap_or_else(|| "0".into());
        let numeric = !matches!(field, "container_path" | "replay_id" | "scenario_tag");
        let op = FilterOp::ALL[rng.below(6) as usize];
        let value = match (numeric, op, rng.below(4)) {
            (_, FilterOp::StrEq, _) | (_, _, 0 | 1) => text,
            (true, _, 2) => format!("{}", text.parse::<f64>().unwrap() + 0.5),
            (true, _, _) => format!("{}", rng.below(20_000) as i64 - 100),
            (false, _, _) => text.chars().take(rng.below(6) as usize).collect(),
        };
        Predicate::new(field, op, value)
    }

    fn rendered(row: &MetadataRow, field: &str) -> Option<String> {
        Some(match field {
            "container_path" => row.container_path.clone(),
            "entry_ordinal" => row.entry_ordinal.to_string(),
            "replay_id" => row.replay_id.clone(),
            "scenario_tag" => row.scenario_tag.clone(),
            "duration_steps" => row.duration_steps.to_string(),
            "entity_count_peak" => row.entity_count_peak.to_string(),
            "action_count" => row.action_count.to_string(),
            "outcome_label" => row.outcome_label?.to_string(),
            "schema_hash" => row.schema_hash.to_string(),
            "apm_analog" => row.apm_analog.to_string(),
            _ => unreachable!(),
        })
    }

    /// Direct evaluation of one predicate against a row's typed fields.
    pub fn oracle(row: &MetadataRow, p: &Predicate) -> bool {
        let accept = |o: Ordering| match p.op {
            FilterOp::Lt => o == Ordering::Less,
            FilterOp::Le => o != Ordering::Greater,
            FilterOp::Eq | FilterOp::StrEq => o == Ordering::Equal,
            FilterOp::Ge => o != Ordering::Less,
            FilterOp::Gt => o == Ordering::Greater,
        };
        let Some(text) = rendered(row, &p.field) else { return false };
        if p.op == FilterOp::StrEq {
            return text == p.value;
        }
        let int: Option<i128> = match p.field.as_str() {
            "container_path" | "replay_id" | "scenario_tag" => return accept(text.as_bytes().cmp(p.value.as_bytes())),
            "apm_analog" => None,
            _ => Some(text.parse().unwrap()),
        };
        match (int, p.value.parse::<i128>()) {
            (Some(a), Ok(b)) => accept(a.cmp(&b)),
            (Some(a), Err(_)) => accept((a as f64).total_cmp(&p.value.parse::<f64>().unwrap())),
            (None, Ok(b)) => accept(row.apm_analog.total_cmp(&(b as f64))),
            (None, Err(_)) => accept(row.apm_analog.total_cmp(&p.value.parse::<f64>().unwrap())),
        }
    }
}
