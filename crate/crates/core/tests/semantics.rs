mod common;

use terc::semantics::stabilize_identity;
use terc::simgen::{generate, sample_owned, SamplingPolicy};
use terc::Error;

#[test]
fn churned_ids_are_restored_to_ground_truth() {
    let mut spec = common::w1_with_steps(300);
    spec.uid_churn_probability = 0.05;
    let schema = spec.schema();
    let id = schema.instance_id_index().unwrap();
    let seq = sample_owned(generate(&spec, 8).unwrap(), SamplingPolicy::EveryStep);
    let churned = seq.observations.iter().flat_map(|o| &o.entities).any(|e| e.uid(id) > 64);
    assert!(churned);

    let fixed = stabilize_identity(&seq, &schema, 1.0).unwrap();
    for obs in &fixed.observations {
        for (k, e) in obs.entities.iter().enumerate() {
            assert_eq!(e.uid(id), k as u64 + 1, "step {}", obs.step);
        }
    }
    assert_eq!(stabilize_identity(&fixed, &schema, 1.0).unwrap(), fixed);
}

#[test]
fn oversized_radius_is_ambiguous() {
    let mut spec = common::w1_with_steps(200);
    spec.uid_churn_probability = 0.05;
    let seq = sample_owned(generate(&spec, 8).unwrap(), SamplingPolicy::EveryStep);
    assert!(matches!(
        stabilize_identity(&seq, &spec.schema(), 1000.0),
        Err(Error::AmbiguousMatch { .. })
    ));
}
