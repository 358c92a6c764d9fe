use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::schema::{
    validate_schema, Dynamics, FieldDescriptor, FieldRole, PlaneDescriptor, PlaneElement, Schema,
    DEFAULT_STEP_SECONDS,
};
use crate::value::{ScalarType, Value};

/// How one entity field evolves over time.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldModel {
    /// Sequential ids starting at 1; churn draws fresh ids above the range.
    Id,
    /// Drawn once from `0..pool`, then never changes.
    Static { pool: u32 },
    /// Moves by a nonzero multiple of `bound / 4`, at most `bound`, every step.
    Walk { bound: f64 },
    /// Replaced by a different random value with this probability per step.
    Change { probability: f64 },
    /// Boolean toggle with this probability per step.
    Flip { probability: f64 },
    /// Decreases by one every `every` steps, wrapping at zero.
    Decrement { every: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpec {
    pub descriptor: FieldDescriptor,
    pub model: FieldModel,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScalarModel {
    /// Running total of value changes in the named entity field.
    ChangesOf(String),
    /// Entities whose named bool field is false at this step.
    CountFalse(String),
    /// Running total of action events.
    Actions,
    Walk { bound: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSpec {
    pub descriptor: FieldDescriptor,
    pub model: ScalarModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaneModel {
    /// Pixel is set when any entity's position falls in its cell (bool).
    Occupancy,
    /// Saturating count of entities per cell (u8).
    Density,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlaneSpec {
    pub descriptor: PlaneDescriptor,
    pub model: PlaneModel,
}

/// Parameters of a synthetic workload.
///
/// Entities live in a square world of side `world_size`. Position walks are
/// confined to one zone per entity (a `ceil(sqrt(n))` grid with a margin),
/// so distinct entities never come within two zone margins of each other.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadSpec {
    pub scenario_tag: String,
    pub entity_count: u32,
    pub step_count: u32,
    pub fields: Vec<FieldSpec>,
    pub scalars: Vec<ScalarSpec>,
    pub planes: Vec<PlaneSpec>,
    /// Expected action events per step (Poisson).
    pub action_rate: f64,
    /// Per entity, per step probability that the observed id is replaced.
    pub uid_churn_probability: f64,
    pub world_size: f64,
    pub step_seconds: f64,
}

impl WorkloadSpec {
    /// The pinned W1 warehouse workload: 64 robots over 10,000 steps.
    pub fn w1() -> Self {
        use Dynamics::*;
        let field = |name: &str, ty, dynamics, role, model| FieldSpec {
            descriptor: FieldDescriptor::new(name, ty, dynamics, role),
            model,
        };
        WorkloadSpec {
            scenario_tag: "warehouse".into(),
            entity_count: 64,
            step_count: 10_000,
            fields: vec![
                field("uid", ScalarType::U32, Static, FieldRole::InstanceId, FieldModel::Id),
                field("robot_type", ScalarType::U8, Static, FieldRole::Generic, FieldModel::Static { pool: 4 }),
                field("x_pos", ScalarType::F32, Fast, FieldRole::Position, FieldModel::Walk { bound: 0.5 }),
                field("y_pos", ScalarType::F32, Fast, FieldRole::Position, FieldModel::Walk { bound: 0.5 }),
                field("payload_id", ScalarType::U16, Slow, FieldRole::Generic, FieldModel::Change { probability: 0.02 }),
                field("battery_charge", ScalarType::U8, Slow, FieldRole::Generic, FieldModel::Decrement { every: 50 }),
                field("need_assistance", ScalarType::Bool, Slow, FieldRole::Generic, FieldModel::Flip { probability: 0.01 }),
            ],
            scalars: vec![
                ScalarSpec {
                    descriptor: FieldDescriptor::generic("total_throughput", ScalarType::F32, Slow),
                    model: ScalarModel::ChangesOf("payload_id".into()),
                },
                ScalarSpec {
                    descriptor: FieldDescriptor::generic("active_robots", ScalarType::U16, Slow),
                    model: ScalarModel::CountFalse("need_assistance".into()),
                },
            ],
            planes: vec![PlaneSpec {
                descriptor: PlaneDescriptor::new("occupancy", 64, 64, PlaneElement::Bool),
                model: PlaneModel::Occupancy,
            }],
            action_rate: 0.2,
            uid_churn_probability: 0.0,
            world_size: 64.0,
            step_seconds: DEFAULT_STEP_SECONDS,
        }
    }

    pub fn schema(&self) -> Schema {
        Schema {
            entity_fields: self.fields.iter().map(|f| f.descriptor.clone()).collect(),
            scalar_channels: self.scalars.iter().map(|s| s.descriptor.clone()).collect(),
            plane_channels: self.planes.iter().map(|p| p.descriptor.clone()).collect(),
            step_seconds: self.step_seconds,
        }
    }

    /// Zone grid side, zone width, and margin for position walks.
    pub(crate) fn zones(&self) -> (u32, f64, f64) {
        let side = (self.entity_count as f64).sqrt().ceil().max(1.0) as u32;
        let width = self.world_size / side as f64;
        (side, width, (width / 4.0).min(1.0))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::SpecInvalid(msg));
        let report = validate_schema(&self.schema());
        if !report.is_ok() {
            let msgs: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
            return bad(msgs.join("; "));
        }
        if self.entity_count == 0 || self.step_count == 0 {
            return bad("entity_count and step_count must be positive".into());
        }
        if !(self.world_size.is_finite() && self.world_size > 0.0) {
            return bad("world_size must be positive".into());
        }
        if !(self.action_rate.is_finite() && self.action_rate >= 0.0) {
            return bad("action_rate must be non-negative".into());
        }
        if !(0.0..=1.0).contains(&self.uid_churn_probability) {
            return bad("uid_churn_probability must lie in [0, 1]".into());
        }
        let (_, zone, margin) = self.zones();
        for f in &self.fields {
            let name = &f.descriptor.name;
            let ty = f.descriptor.scalar_type;
            match (&f.model, f.descriptor.role) {
                (FieldModel::Id, FieldRole::InstanceId) => {
                    let max_id = match ty {
                        ScalarType::U8 => u8::MAX as u64,
                        ScalarType::U16 => u16::MAX as u64,
                        _ => u32::MAX as u64,
                    };
                    if self.entity_count as u64 > max_id / 2 {
                        return bad(format!("{name}: {ty} cannot hold {} ids plus churn", self.entity_count));
                    }
                }
                (FieldModel::Id, _) | (_, FieldRole::InstanceId) => {
                    return bad(format!("{name}: the id model and instance_id role go together"))
                }
                (FieldModel::Walk { bound }, role) => {
                    if !(bound.is_finite() && *bound > 0.0) || ty == ScalarType::Bool {
                        return bad(format!("{name}: walk needs a positive bound on a numeric field"));
                    }
                    if role == FieldRole::Position && zone - 2.0 * margin < 2.0 * bound {
                        return bad(format!("{name}: zones of width {zone} are too small for walk bound {bound}"));
                    }
                }
                (_, FieldRole::Position) => {
                    return bad(format!("{name}: position fields must use the walk model"))
                }
                (FieldModel::Static { pool }, _) if *pool == 0 => {
                    return bad(format!("{name}: static pool must be positive"))
                }
                (FieldModel::Change { probability } | FieldModel::Flip { probability }, _)
                    if !(0.0..=1.0).contains(probability) =>
                {
                    return bad(format!("{name}: probability must lie in [0, 1]"))
                }
                (FieldModel::Flip { .. }, _) if ty != ScalarType::Bool => {
                    return bad(format!("{name}: flip needs a bool field"))
                }
                (FieldModel::Decrement { every }, _) if *every == 0 || ty == ScalarType::Bool => {
                    return bad(format!("{name}: decrement needs a positive period on a numeric field"))
                }
                _ => {}
            }
        }
        let schema = self.schema();
        for s in &self.scalars {
            match &s.model {
                ScalarModel::ChangesOf(field) if schema.field_index(field).is_none() => {
                    return bad(format!("{}: unknown field {field}", s.descriptor.name))
                }
                ScalarModel::CountFalse(field) => match schema.field_index(field) {
                    Some(i) if schema.entity_fields[i].scalar_type == ScalarType::Bool => {}
                    _ => return bad(format!("{}: {field} is not a bool field", s.descriptor.name)),
                },
                ScalarModel::Walk { bound } if !(bound.is_finite() && *bound > 0.0) => {
                    return bad(format!("{}: walk bound must be positive", s.descriptor.name))
                }
                _ => {}
            }
        }
        for p in &self.planes {
            let expected = match p.model {
                PlaneModel::Occupancy => PlaneElement::Bool,
                PlaneModel::Density => PlaneElement::U8,
            };
            if p.descriptor.element != expected {
                return bad(format!("{}: element type does not suit the plane model", p.descriptor.name));
            }
            if schema.position_indices().is_none() {
                return bad(format!("{}: planes are rasterized from positions", p.descriptor.name));
            }
        }
        Ok(())
    }

    /// Render as the key-value text format read by [`WorkloadSpec::from_str`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario = {}", self.scenario_tag);
        let _ = writeln!(out, "entity_count = {}", self.entity_count);
        let _ = writeln!(out, "step_count = {}", self.step_count);
        let _ = writeln!(out, "action_rate = {}", self.action_rate);
        let _ = writeln!(out, "uid_churn_probability = {}", self.uid_churn_probability);
        let _ = writeln!(out, "world_size = {}", self.world_size);
        let _ = writeln!(out, "step_seconds = {}", self.step_seconds);
        for f in &self.fields {
            let d = &f.descriptor;
            let model = match &f.model {
                FieldModel::Id => "id".to_string(),
                FieldModel::Static { pool } => format!("pool={pool}"),
                FieldModel::Walk { bound } => format!("walk={bound}"),
                FieldModel::Change { probability } => format!("change={probability}"),
                FieldModel::Flip { probability } => format!("flip={probability}"),
                FieldModel::Decrement { every } => format!("decrement={every}"),
            };
            let _ = write!(
                out,
                "field.{} = {} {} {} {model}",
                d.name,
                d.scalar_type,
                d.dynamics.name(),
                d.role.name()
            );
            if let Some(v) = d.default {
                let _ = write!(out, " default={v}");
            }
            out.push('\n');
        }
        for s in &self.scalars {
            let model = match &s.model {
                ScalarModel::ChangesOf(f) => format!("changes_of={f}"),
                ScalarModel::CountFalse(f) => format!("count_false={f}"),
                ScalarModel::Actions => "actions".to_string(),
                ScalarModel::Walk { bound } => format!("walk={bound}"),
            };
            let _ = writeln!(
                out,
                "scalar.{} = {} {} {model}",
                s.descriptor.name,
                s.descriptor.scalar_type,
                s.descriptor.dynamics.name()
            );
        }
        for p in &self.planes {
            let model = match p.model {
                PlaneModel::Occupancy => "occupancy",
                PlaneModel::Density => "density",
            };
            let _ = writeln!(
                out,
                "plane.{} = {}x{} {} {model}",
                p.descriptor.name,
                p.descriptor.width,
                p.descriptor.height,
                p.descriptor.element.name()
            );
        }
        out
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::SpecInvalid(format!("{key}: cannot parse {v:?}")))
}

fn parse_field(name: &str, value: &str) -> Result<FieldSpec> {
    let key = format!("field.{name}");
    let tokens: Vec<&str> = value.split_whitespace().collect();
    let [ty, dynamics, role, model, rest @ ..] = tokens.as_slice() else {
        return Err(Error::SpecInvalid(format!(
            "{key}: expected `type dynamics role model [default=v]`"
        )));
    };
    let scalar_type: ScalarType = ty.parse()?;
    let mut descriptor = FieldDescriptor::new(name, scalar_type, dynamics.parse()?, role.parse()?);
    let model = match model.split_once('=') {
        None if *model == "id" => FieldModel::Id,
        Some(("pool", v)) => FieldModel::Static { pool: parse_num(&key, v)? },
        Some(("walk", v)) => FieldModel::Walk { bound: parse_num(&key, v)? },
        Some(("change", v)) => FieldModel::Change { probability: parse_num(&key, v)? },
        Some(("flip", v)) => FieldModel::Flip { probability: parse_num(&key, v)? },
        Some(("decrement", v)) => FieldModel::Decrement { every: parse_num(&key, v)? },
        _ => return Err(Error::SpecInvalid(format!("{key}: unknown model {model:?}"))),
    };
    for extra in rest {
        match extra.split_once('=') {
            Some(("default", v)) => {
                descriptor.default = Some(
                    Value::parse(scalar_type, v).map_err(|e| Error::SpecInvalid(format!("{key}: {e}")))?,
                )
            }
            _ => return Err(Error::SpecInvalid(format!("{key}: unexpected {extra:?}"))),
        }
    }
    Ok(FieldSpec { descriptor, model })
}

fn parse_scalar(name: &str, value: &str) -> Result<ScalarSpec> {
    let key = format!("scalar.{name}");
    let tokens: Vec<&str> = value.split_whitespace().collect();
    let [ty, dynamics, model] = tokens.as_slice() else {
        return Err(Error::SpecInvalid(format!("{key}: expected `type dynamics model`")));
    };
    let model = match model.split_once('=') {
        None if *model == "actions" => ScalarModel::Actions,
        Some(("changes_of", f)) => ScalarModel::ChangesOf(f.to_string()),
        Some(("count_false", f)) => ScalarModel::CountFalse(f.to_string()),
        Some(("walk", v)) => ScalarModel::Walk { bound: parse_num(&key, v)? },
        _ => return Err(Error::SpecInvalid(format!("{key}: unknown model {model:?}"))),
    };
    Ok(ScalarSpec {
        descriptor: FieldDescriptor::generic(name, ty.parse()?, dynamics.parse()?),
        model,
    })
}

fn parse_plane(name: &str, value: &str) -> Result<PlaneSpec> {
    let key = format!("plane.{name}");
    let tokens: Vec<&str> = value.split_whitespace().collect();
    let [dims, element, model] = tokens.as_slice() else {
        return Err(Error::SpecInvalid(format!("{key}: expected `WxH element model`")));
    };
    let (w, h) = dims
        .split_once('x')
        .ok_or_else(|| Error::SpecInvalid(format!("{key}: dimensions must be WxH")))?;
    let element = match *element {
        "bool" => PlaneElement::Bool,
        "u8" => PlaneElement::U8,
        other => return Err(Error::SpecInvalid(format!("{key}: unknown element {other:?}"))),
    };
    let model = match *model {
        "occupancy" => PlaneModel::Occupancy,
        "density" => PlaneModel::Density,
        other => return Err(Error::SpecInvalid(format!("{key}: unknown model {other:?}"))),
    };
    Ok(PlaneSpec {
        descriptor: PlaneDescriptor::new(name, parse_num(&key, w)?, parse_num(&key, h)?, element),
        model,
    })
}

impl FromStr for WorkloadSpec {
    type Err = Error;

    /// Parse `key = value` lines; `#` starts a comment. Field, scalar, and
    /// plane lines keep their file order, which becomes schema order.
    fn from_str(text: &str) -> Result<Self> {
        let mut spec = WorkloadSpec {
            scenario_tag: "synthetic".into(),
            entity_count: 0,
            step_count: 0,
            fields: Vec::new(),
            scalars: Vec::new(),
            planes: Vec::new(),
            action_rate: 0.0,
            uid_churn_probability: 0.0,
            world_size: 64.0,
            step_seconds: DEFAULT_STEP_SECONDS,
        };
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::SpecInvalid(format!("line {}: expected key = value", lineno + 1)))?;
            match key {
                "scenario" => spec.scenario_tag = value.to_string(),
                "entity_count" => spec.entity_count = parse_num(key, value)?,
                "step_count" => spec.step_count = parse_num(key, value)?,
                "action_rate" => spec.action_rate = parse_num(key, value)?,
                "uid_churn_probability" => spec.uid_churn_probability = parse_num(key, value)?,
                "world_size" => spec.world_size = parse_num(key, value)?,
                "step_seconds" => spec.step_seconds = parse_num(key, value)?,
                _ => {
                    if let Some(name) = key.strip_prefix("field.") {
                        spec.fields.push(parse_field(name, value)?);
                    } else if let Some(name) = key.strip_prefix("scalar.") {
                        spec.scalars.push(parse_scalar(name, value)?);
                    } else if let Some(name) = key.strip_prefix("plane.") {
                        spec.planes.push(parse_plane(name, value)?);
                    } else {
                        return Err(Error::SpecInvalid(format!("line {}: unknown key {key:?}", lineno + 1)));
                    }
                }
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn w1_is_valid_and_text_round_trips() {
        let w1 = WorkloadSpec::w1();
        w1.validate().unwrap();
        let parsed: WorkloadSpec = w1.to_text().parse().unwrap();
        assert_eq!(parsed, w1);
        assert_eq!(parsed.schema().hash(), w1.schema().hash());
    }

    #[test]
    fn shipped_w1_file_matches_builtin() {
        let text = include_str!("../../specs/w1.spec");
        assert_eq!(text.parse::<WorkloadSpec>().unwrap(), WorkloadSpec::w1());
    }

    #[test]
    fn rejects_bad_probability() {
        let text = WorkloadSpec::w1()
            .to_text()
            .replace("change=0.02", "change=1.5");
        assert!(matches!(text.parse::<WorkloadSpec>(), Err(Error::SpecInvalid(_))));
    }

    #[test]
    fn rejects_zero_counts_and_unknown_keys() {
        let text = WorkloadSpec::w1().to_text();
        let zero = text.replace("entity_count = 64", "entity_count = 0");
        assert!(zero.parse::<WorkloadSpec>().is_err());
        let unknown = format!("{text}colour = blue\n");
        assert!(unknown.parse::<WorkloadSpec>().is_err());
    }

    #[test]
    fn quantity_default_parses() {
        let mut text = WorkloadSpec::w1().to_text();
        text.push_str("field.minerals = u16 slow quantity change=0.01 default=1800\n");
        let spec: WorkloadSpec = text.parse().unwrap();
        assert_eq!(spec.fields.last().unwrap().descriptor.default, Some(Value::U16(1800)));
    }
}
