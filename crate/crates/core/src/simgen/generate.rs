use super::rng::SimRng;
use super::spec::{FieldModel, PlaneModel, ScalarModel, WorkloadSpec};
use crate::error::Result;
use crate::model::{EntityRecord, PlaneData};
use crate::schema::{FieldRole, Schema};
use crate::value::{ScalarType, Value};

/// Full simulated state at one step.
///
/// Entity `k` of every step is logical entity `k`; its instance id may
/// change over time when churn is enabled.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepState {
    pub entities: Vec<EntityRecord>,
    pub scalars: Vec<Value>,
    pub planes: Vec<PlaneData>,
}

/// Ground truth produced by [`generate`]: every step's state plus the
/// action event stream.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthStream {
    pub schema: Schema,
    pub scenario_tag: String,
    pub seed: u64,
    pub steps: Vec<StepState>,
    /// Steps with at least one action event, ascending.
    pub action_steps: Vec<u32>,
    pub action_count: u64,
    pub outcome_label: Option<i32>,
}

impl GroundTruthStream {
    pub fn step_count(&self) -> u32 {
        self.steps.len() as u32
    }
}

fn type_span(ty: ScalarType) -> u64 {
    match ty {
        ScalarType::U8 => 1 << 8,
        ScalarType::U16 => 1 << 16,
        ScalarType::U32 | ScalarType::I32 => 1 << 32,
        ScalarType::U64 => 0,
        ScalarType::F32 | ScalarType::F64 => 1 << 16,
        ScalarType::Bool => 2,
    }
}

fn random_value(rng: &mut SimRng, ty: ScalarType) -> Value {
    match ty {
        ScalarType::U64 => Value::U64(rng.next_u64()),
        ScalarType::Bool => Value::Bool(rng.below(2) == 1),
        _ => Value::from_u64(ty, rng.below(type_span(ty))),
    }
}

/// A random value of the same type that differs from `old`.
fn different_value(rng: &mut SimRng, old: Value) -> Value {
    let ty = old.scalar_type();
    match old {
        Value::Bool(b) => Value::Bool(!b),
        Value::U64(v) => {
            let draw = rng.next_u64();
            Value::U64(if draw == v { draw.wrapping_add(1) } else { draw })
        }
        Value::F32(_) | Value::F64(_) => {
            let span = type_span(ty);
            let current = old.as_f64();
            let mut draw = rng.below(span) as f64;
            if draw == current {
                draw = (draw + 1.0) % span as f64;
            }
            Value::from_f64(ty, draw)
        }
        _ => {
            let span = type_span(ty);
            let shifted = (old.bits() + 1 + rng.below(span - 1)) % span;
            Value::from_u64(ty, shifted)
        }
    }
}

fn decremented(v: Value) -> Value {
    match v {
        Value::U8(x) => Value::U8(x.wrapping_sub(1)),
        Value::U16(x) => Value::U16(x.wrapping_sub(1)),
        Value::U32(x) => Value::U32(x.wrapping_sub(1)),
        Value::U64(x) => Value::U64(x.wrapping_sub(1)),
        Value::I32(x) => Value::I32(x.wrapping_sub(1)),
        Value::F32(x) => Value::F32(x - 1.0),
        Value::F64(x) => Value::F64(x - 1.0),
        Value::Bool(x) => Value::Bool(!x),
    }
}

/// Step granularity of a walk: a quarter of the bound, whole units for
/// integer fields.
fn walk_quantum(ty: ScalarType, bound: f64) -> f64 {
    match ty {
        ScalarType::F32 | ScalarType::F64 => bound / 4.0,
        _ => (bound / 4.0).floor().max(1.0),
    }
}

/// One nonzero walk step, reflected to stay inside `[lo, hi]`.
fn walk_step(rng: &mut SimRng, current: f64, quantum: f64, lo: f64, hi: f64) -> f64 {
    let magnitude = (1 + rng.below(4)) as f64 * quantum;
    let delta = if rng.below(2) == 0 { magnitude } else { -magnitude };
    let next = current + delta;
    if next < lo || next > hi {
        current - delta
    } else {
        next
    }
}

struct Bounds {
    lo: f64,
    hi: f64,
}

/// Run the simulation for `spec.step_count` steps from `seed`.
pub fn generate(spec: &WorkloadSpec, seed: u64) -> Result<GroundTruthStream> {
    spec.validate()?;
    let schema = spec.schema();
    let mut rng = SimRng::new(seed);
    let outcome_label = Some(rng.below(2) as i32);

    let n = spec.entity_count as usize;
    let (zone_side, zone_width, margin) = spec.zones();
    let id_field = schema.instance_id_index().expect("validated");
    let id_type = schema.entity_fields[id_field].scalar_type;
    let position = schema.position_indices();

    // Per entity, per field walk bounds; position walks stay inside the zone.
    let bounds: Vec<Vec<Bounds>> = (0..n)
        .map(|e| {
            let zone = [(e as u32 % zone_side) as f64, (e as u32 / zone_side) as f64];
            spec.fields
                .iter()
                .enumerate()
                .map(|(f, fs)| match (fs.model.clone(), position) {
                    (FieldModel::Walk { .. }, Some((px, py))) if f == px || f == py => {
                        let axis = if f == px { zone[0] } else { zone[1] };
                        Bounds {
                            lo: axis * zone_width + margin,
                            hi: (axis + 1.0) * zone_width - margin,
                        }
                    }
                    (FieldModel::Walk { bound }, _) => Bounds {
                        lo: 0.0,
                        hi: 256.0 * walk_quantum(fs.descriptor.scalar_type, bound),
                    },
                    _ => Bounds { lo: 0.0, hi: 0.0 },
                })
                .collect()
        })
        .collect();

    let mut state: Vec<Vec<Value>> = Vec::with_capacity(n);
    for (e, entity_bounds) in bounds.iter().enumerate() {
        let mut values = Vec::with_capacity(spec.fields.len());
        for (f, fs) in spec.fields.iter().enumerate() {
            let ty = fs.descriptor.scalar_type;
            let v = match &fs.model {
                FieldModel::Id => Value::from_u64(ty, e as u64 + 1),
                FieldModel::Static { pool } => Value::from_u64(ty, rng.below(*pool as u64)),
                FieldModel::Walk { bound } => {
                    let q = walk_quantum(ty, *bound);
                    let b = &entity_bounds[f];
                    let slots = ((b.hi - b.lo) / q).floor() as u64 + 1;
                    Value::from_f64(ty, b.lo + q * rng.below(slots) as f64)
                }
                FieldModel::Change { .. } | FieldModel::Flip { .. } | FieldModel::Decrement { .. } => {
                    random_value(&mut rng, ty)
                }
            };
            values.push(v);
        }
        state.push(values);
    }

    let mut next_uid = n as u64 + 1;
    let mut changes = vec![0u64; spec.fields.len()];
    let mut scalar_walks: Vec<f64> = vec![0.0; spec.scalars.len()];
    let mut action_steps = Vec::new();
    let mut action_count = 0u64;
    let mut steps = Vec::with_capacity(spec.step_count as usize);

    for t in 0..spec.step_count {
        let actions = rng.poisson(spec.action_rate);
        if actions > 0 {
            action_steps.push(t);
            action_count += actions;
        }

        if t > 0 {
            for (values, entity_bounds) in state.iter_mut().zip(&bounds) {
                if spec.uid_churn_probability > 0.0 && rng.bernoulli(spec.uid_churn_probability) {
                    values[id_field] = Value::from_u64(id_type, next_uid);
                    next_uid += 1;
                }
                for (f, fs) in spec.fields.iter().enumerate() {
                    let old = values[f];
                    let new = match &fs.model {
                        FieldModel::Id | FieldModel::Static { .. } => old,
                        FieldModel::Walk { bound } => {
                            let q = walk_quantum(old.scalar_type(), *bound);
                            let b = &entity_bounds[f];
                            Value::from_f64(old.scalar_type(), walk_step(&mut rng, old.as_f64(), q, b.lo, b.hi))
                        }
                        FieldModel::Change { probability } => {
                            if rng.bernoulli(*probability) {
                                different_value(&mut rng, old)
                            } else {
                                old
                            }
                        }
                        FieldModel::Flip { probability } => {
                            if rng.bernoulli(*probability) {
                                different_value(&mut rng, old)
                            } else {
                                old
                            }
                        }
                        FieldModel::Decrement { every } => {
                            if t % every == 0 {
                                decremented(old)
                            } else {
                                old
                            }
                        }
                    };
                    if new != old && fs.descriptor.role != FieldRole::InstanceId {
                        changes[f] += 1;
                    }
                    values[f] = new;
                }
            }
        }

        let scalars = spec
            .scalars
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let raw = match &s.model {
                    ScalarModel::ChangesOf(field) => changes[schema.field_index(field).unwrap()] as f64,
                    ScalarModel::CountFalse(field) => {
                        let f = schema.field_index(field).unwrap();
                        state.iter().filter(|v| v[f] == Value::Bool(false)).count() as f64
                    }
                    ScalarModel::Actions => action_count as f64,
                    ScalarModel::Walk { bound } => {
                        let q = walk_quantum(s.descriptor.scalar_type, *bound);
                        if t > 0 {
                            scalar_walks[i] = walk_step(&mut rng, scalar_walks[i], q, 0.0, f64::MAX);
                        }
                        scalar_walks[i]
                    }
                };
                Value::from_f64(s.descriptor.scalar_type, raw)
            })
            .collect();

        let planes = spec
            .planes
            .iter()
            .map(|p| rasterize(spec, &state, position.expect("validated"), p.model, &p.descriptor))
            .collect();

        steps.push(StepState {
            entities: state.iter().map(|v| EntityRecord::new(v.clone())).collect(),
            scalars,
            planes,
        });
    }

    Ok(GroundTruthStream {
        schema,
        scenario_tag: spec.scenario_tag.clone(),
        seed,
        steps,
        action_steps,
        action_count,
        outcome_label,
    })
}

fn rasterize(
    spec: &WorkloadSpec,
    state: &[Vec<Value>],
    (px, py): (usize, usize),
    model: PlaneModel,
    desc: &crate::schema::PlaneDescriptor,
) -> PlaneData {
    let (w, h) = (desc.width as usize, desc.height as usize);
    let cell = |coord: f64, cells: usize| -> usize {
        ((coord / spec.world_size * cells as f64).floor().max(0.0) as usize).min(cells - 1)
    };
    let pixels = state
        .iter()
        .map(|v| cell(v[py].as_f64(), h) * w + cell(v[px].as_f64(), w));
    match model {
        PlaneModel::Occupancy => {
            let mut grid = vec![false; w * h];
            pixels.for_each(|i| grid[i] = true);
            PlaneData::Bool(grid)
        }
        PlaneModel::Density => {
            let mut grid = vec![0u8; w * h];
            pixels.for_each(|i| grid[i] = grid[i].saturating_add(1));
            PlaneData::U8(grid)
        }
    }
}
