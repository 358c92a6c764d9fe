use std::fmt;
use std::num::NonZeroU32;
use std::str::FromStr;

use super::generate::GroundTruthStream;
use crate::error::{Error, Result};
use crate::model::{Observation, ReplayMetadata, ReplaySequence};

/// Which simulation steps become recorded observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SamplingPolicy {
    EveryStep,
    OnAction,
    EveryN(NonZeroU32),
    EveryNOrAction(NonZeroU32),
}

impl SamplingPolicy {
    fn keeps(self, step: u32, is_action: bool) -> bool {
        match self {
            SamplingPolicy::EveryStep => true,
            SamplingPolicy::OnAction => is_action,
            SamplingPolicy::EveryN(n) => step.is_multiple_of(n.get()),
            SamplingPolicy::EveryNOrAction(n) => step.is_multiple_of(n.get()) || is_action,
        }
    }
}

impl fmt::Display for SamplingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SamplingPolicy::EveryStep => f.write_str("every_step"),
            SamplingPolicy::OnAction => f.write_str("on_action"),
            SamplingPolicy::EveryN(n) => write!(f, "every_n:{n}"),
            SamplingPolicy::EveryNOrAction(n) => write!(f, "every_n_or_action:{n}"),
        }
    }
}

/// Accepts `every_step`, `on_action`, `every_n:N`, `every_n_or_action:N`.
impl FromStr for SamplingPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::SpecInvalid(format!("unknown sampling policy {s:?}"));
        let n = |arg: &str| -> Result<NonZeroU32> {
            arg.parse()
                .map_err(|_| Error::SpecInvalid(format!("sampling period must be a positive integer, got {arg:?}")))
        };
        match s.split_once(':') {
            None => match s {
                "every_step" => Ok(SamplingPolicy::EveryStep),
                "on_action" => Ok(SamplingPolicy::OnAction),
                _ => Err(bad()),
            },
            Some(("every_n", arg)) => Ok(SamplingPolicy::EveryN(n(arg)?)),
            Some(("every_n_or_action", arg)) => Ok(SamplingPolicy::EveryNOrAction(n(arg)?)),
            Some(_) => Err(bad()),
        }
    }
}

/// Steps of `stream` selected by `policy`, ascending.
pub fn observation_steps(stream: &GroundTruthStream, policy: SamplingPolicy) -> Vec<u32> {
    let mut actions = stream.action_steps.iter().peekable();
    (0..stream.step_count())
        .filter(|&t| {
            while actions.next_if(|&&a| a < t).is_some() {}
            let is_action = actions.peek() == Some(&&t);
            policy.keeps(t, is_action)
        })
        .collect()
}

/// Replay id used for sampled streams: scenario tag plus hex seed.
pub fn replay_id(stream: &GroundTruthStream) -> String {
    format!("{}-{:016x}", stream.scenario_tag, stream.seed)
}

/// Record the steps selected by `policy` as a replay.
pub fn sample(stream: &GroundTruthStream, policy: SamplingPolicy) -> ReplaySequence {
    let observations = observation_steps(stream, policy)
        .into_iter()
        .map(|t| {
            let s = &stream.steps[t as usize];
            Observation {
                step: t,
                entities: s.entities.clone(),
                scalars: s.scalars.clone(),
                planes: s.planes.clone(),
            }
        })
        .collect();
    finish(stream, observations)
}

/// Like [`sample`] but moves step state out of the stream instead of
/// cloning it.
pub fn sample_owned(mut stream: GroundTruthStream, policy: SamplingPolicy) -> ReplaySequence {
    let observations = observation_steps(&stream, policy)
        .into_iter()
        .map(|t| {
            let s = std::mem::take(&mut stream.steps[t as usize]);
            Observation {
                step: t,
                entities: s.entities,
                scalars: s.scalars,
                planes: s.planes,
            }
        })
        .collect();
    finish(&stream, observations)
}

fn finish(stream: &GroundTruthStream, observations: Vec<Observation>) -> ReplaySequence {
    let mut meta = ReplayMetadata::new(replay_id(stream), stream.scenario_tag.clone(), &stream.schema);
    meta.action_count = stream.action_count;
    meta.outcome_label = stream.outcome_label;
    ReplaySequence::new(meta, observations, stream.step_count() as u64)
}
