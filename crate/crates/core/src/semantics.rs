//! Semantic fixups applied to recorded sequences: event activation
//! encoding, instance-id stabilization, and last-known quantity recall.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::model::ReplaySequence;
use crate::schema::{FieldRole, Schema};
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventActivation {
    pub event_id: u32,
    pub finished_step: u64,
}

/// Completion steps of one-shot events (upgrades, research, unlocks).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventActivationTable {
    entries: Vec<EventActivation>,
    total_events: u32,
}

impl EventActivationTable {
    pub fn new(entries: Vec<EventActivation>, total_events: u32) -> Result<Self> {
        let mut seen = HashSet::new();
        for e in &entries {
            if e.event_id >= total_events {
                return Err(Error::InvalidReplay(format!(
                    "event id {} outside one-hot width {total_events}",
                    e.event_id
                )));
            }
            if !seen.insert(e.event_id) {
                return Err(Error::InvalidReplay(format!("duplicate event id {}", e.event_id)));
            }
        }
        Ok(EventActivationTable {
            entries,
            total_events,
        })
    }

    pub fn entries(&self) -> &[EventActivation] {
        &self.entries
    }

    pub fn total_events(&self) -> u32 {
        self.total_events
    }
}

/// One-hot vector of events active at `step`. An event counts as active
/// only strictly after its finishing step.
pub fn active_onehot(table: &EventActivationTable, step: u64) -> Vec<bool> {
    let mut bits = vec![false; table.total_events as usize];
    for e in &table.entries {
        if step > e.finished_step {
            bits[e.event_id as usize] = true;
        }
    }
    bits
}

/// Repair instance-id churn and zeroed quantities.
///
/// An entity whose id has never been seen is matched against previously
/// seen ids that are absent at the current step; if exactly one of them was
/// last seen within `match_radius` (Euclidean, in position units) the new id
/// is rewritten to the old one for the rest of the sequence. Two or more
/// candidates are an [`Error::AmbiguousMatch`].
///
/// For quantity-role fields a zero reading is replaced with the last nonzero
/// value seen for that identity, or with the field's schema default when no
/// nonzero value has been seen yet.
pub fn stabilize_identity(
    seq: &ReplaySequence,
    schema: &Schema,
    match_radius: f64,
) -> Result<ReplaySequence> {
    let id_field = schema
        .instance_id_index()
        .ok_or_else(|| Error::SchemaInvalid("no instance_id field".into()))?;
    let (px, py) = schema
        .position_indices()
        .ok_or_else(|| Error::SchemaInvalid("identity stabilization needs a position pair".into()))?;
    let quantity_fields: Vec<(usize, Option<Value>)> = schema
        .entity_fields
        .iter()
        .enumerate()
        .filter(|(_, f)| f.role == FieldRole::Quantity)
        .map(|(i, f)| (i, f.default))
        .collect();
    let id_type = schema.entity_fields[id_field].scalar_type;

    let mut out = seq.clone();
    let mut last_position: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    let mut alias: HashMap<u64, u64> = HashMap::new();
    let mut last_quantity: HashMap<(u64, usize), Value> = HashMap::new();

    for obs in &mut out.observations {
        let mapped: Vec<u64> = obs
            .entities
            .iter()
            .map(|e| {
                let raw = e.uid(id_field);
                alias.get(&raw).copied().unwrap_or(raw)
            })
            .collect();
        let mut present: HashSet<u64> = mapped
            .iter()
            .copied()
            .filter(|u| last_position.contains_key(u))
            .collect();

        for (entity, mut uid) in obs.entities.iter_mut().zip(mapped) {
            let pos = (entity.get(px).as_f64(), entity.get(py).as_f64());
            if !last_position.contains_key(&uid) && !present.contains(&uid) {
                let candidates: Vec<u64> = last_position
                    .iter()
                    .filter(|(k, _)| !present.contains(k))
                    .filter(|(_, &(x, y))| (x - pos.0).hypot(y - pos.1) <= match_radius)
                    .map(|(&k, _)| k)
                    .collect();
                match candidates.as_slice() {
                    [] => {}
                    [original] => {
                        alias.insert(entity.uid(id_field), *original);
                        uid = *original;
                    }
                    _ => {
                        return Err(Error::AmbiguousMatch {
                            step: obs.step,
                            candidates,
                        })
                    }
                }
                present.insert(uid);
            }
            entity.set(id_field, Value::from_u64(id_type, uid));

            for &(q, default) in &quantity_fields {
                let value = entity.get(q);
                if value.is_zero() {
                    if let Some(recalled) = last_quantity.get(&(uid, q)).copied().or(default) {
                        entity.set(q, recalled);
                    }
                } else {
                    last_quantity.insert((uid, q), value);
                }
            }
        }

        for entity in &obs.entities {
            last_position.insert(
                entity.uid(id_field),
                (entity.get(px).as_f64(), entity.get(py).as_f64()),
            );
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EntityRecord, Observation, ReplayMetadata};
    use crate::schema::{Dynamics, FieldDescriptor};
    use crate::value::ScalarType;

    fn schema() -> Schema {
        Schema::new(vec![
            FieldDescriptor::new("uid", ScalarType::U32, Dynamics::Static, FieldRole::InstanceId),
            FieldDescriptor::new("x", ScalarType::F32, Dynamics::Static, FieldRole::Position),
            FieldDescriptor::new("y", ScalarType::F32, Dynamics::Static, FieldRole::Position),
            FieldDescriptor::new("qty", ScalarType::U32, Dynamics::Slow, FieldRole::Quantity)
                .with_default(Value::U32(900)),
        ])
    }

    fn ent(uid: u32, x: f32, y: f32, qty: u32) -> EntityRecord {
        EntityRecord::new(vec![
            Value::U32(uid),
            Value::F32(x),
            Value::F32(y),
            Value::U32(qty),
        ])
    }

    fn seq(steps: Vec<(u32, Vec<EntityRecord>)>, declared: u64) -> ReplaySequence {
        let s = schema();
        let obs = steps
            .into_iter()
            .map(|(step, entities)| Observation {
                entities,
                ..Observation::new(step)
            })
            .collect();
        ReplaySequence::new(ReplayMetadata::new("r", "test", &s), obs, declared)
    }

    fn table(entries: &[(u32, u64)], total: u32) -> EventActivationTable {
        EventActivationTable::new(
            entries
                .iter()
                .map(|&(event_id, finished_step)| EventActivation {
                    event_id,
                    finished_step,
                })
                .collect(),
            total,
        )
        .unwrap()
    }

    #[test]
    fn onehot_uses_strict_comparison() {
        let t = table(&[(0, 10)], 2);
        assert_eq!(active_onehot(&t, 10), vec![false, false]);
        assert_eq!(active_onehot(&t, 11), vec![true, false]);
        assert_eq!(active_onehot(&table(&[], 4), 1234), vec![false; 4]);
    }

    #[test]
    fn table_rejects_bad_entries() {
        let e = |event_id| EventActivation {
            event_id,
            finished_step: 0,
        };
        assert!(EventActivationTable::new(vec![e(2)], 2).is_err());
        assert!(EventActivationTable::new(vec![e(1), e(1)], 2).is_err());
    }

    #[test]
    fn churned_uid_rewritten_to_original() {
        let mut steps = Vec::new();
        for t in 0..5 {
            steps.push((t, vec![ent(7, 3.0, 4.0, 10), ent(8, 9.0, 9.0, 10)]));
        }
        for t in 5..9 {
            steps.push((t, vec![ent(8, 9.0, 9.0, 10)]));
        }
        steps.push((9, vec![ent(8, 9.0, 9.0, 10), ent(21, 3.0, 4.0, 10)]));
        steps.push((10, vec![ent(21, 3.0, 4.0, 10)]));
        let out = stabilize_identity(&seq(steps, 11), &schema(), 0.0).unwrap();
        assert_eq!(out.observations[9].entities[1].get(0), Value::U32(7));
        assert_eq!(out.observations[10].entities[0].get(0), Value::U32(7));
    }

    #[test]
    fn no_churn_is_identity() {
        let steps = (0..6)
            .map(|t| (t, vec![ent(1, 0.0, 0.0, 5), ent(2, 1.0, t as f32, 6)]))
            .collect();
        let s = seq(steps, 6);
        assert_eq!(stabilize_identity(&s, &schema(), 0.5).unwrap(), s);
    }

    #[test]
    fn zero_quantity_recalls_last_observed() {
        // Two entities over four steps; entity 1 drops out of view at step 3.
        let s = seq(
            vec![
                (0, vec![ent(1, 0.0, 0.0, 0), ent(2, 5.0, 5.0, 300)]),
                (1, vec![ent(1, 0.0, 0.0, 0), ent(2, 5.0, 5.0, 300)]),
                (2, vec![ent(1, 0.0, 0.0, 1500), ent(2, 5.0, 5.0, 250)]),
                (3, vec![ent(1, 0.0, 0.0, 0), ent(2, 5.0, 5.0, 250)]),
            ],
            4,
        );
        let out = stabilize_identity(&s, &schema(), 0.0).unwrap();
        let qty = |t: usize, i: usize| out.observations[t].entities[i].get(3);
        assert_eq!(qty(0, 0), Value::U32(900));
        assert_eq!(qty(1, 0), Value::U32(900));
        assert_eq!(qty(2, 0), Value::U32(1500));
        assert_eq!(qty(3, 0), Value::U32(1500));
        assert_eq!(qty(3, 1), Value::U32(250));
    }

    #[test]
    fn two_candidates_is_ambiguous() {
        let s = seq(
            vec![
                (0, vec![ent(1, 0.0, 0.0, 1), ent(2, 1.0, 0.0, 1)]),
                (1, vec![ent(3, 0.5, 0.0, 1)]),
            ],
            2,
        );
        match stabilize_identity(&s, &schema(), 0.6) {
            Err(Error::AmbiguousMatch { step, candidates }) => {
                assert_eq!(step, 1);
                assert_eq!(candidates, vec![1, 2]);
            }
            other => panic!("expected AmbiguousMatch, got {other:?}"),
        }
        // Tightening the radius removes the ambiguity.
        assert!(stabilize_identity(&s, &schema(), 0.4).is_ok());
    }

    #[test]
    fn requires_position_pair() {
        let s = Schema::new(vec![FieldDescriptor::new(
            "uid",
            ScalarType::U32,
            Dynamics::Static,
            FieldRole::InstanceId,
        )]);
        let r = ReplaySequence::new(ReplayMetadata::new("r", "t", &s), vec![], 0);
        assert!(matches!(
            stabilize_identity(&r, &s, 0.0),
            Err(Error::SchemaInvalid(_))
        ));
    }
}
