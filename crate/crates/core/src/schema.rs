//! Runtime schema describing entity fields, scalar channels, and planes.
//!
//! The schema replaces compile-time reflection: every generic layout routine
//! walks `entity_fields` in declaration order, so field order is part of the
//! wire format. A schema serializes to a canonical text document whose
//! 64-bit FNV-1a digest identifies it inside containers.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::value::{ScalarType, Value};

/// Default game-step duration: 22.4 steps per second.
pub const DEFAULT_STEP_SECONDS: f64 = 1.0 / 22.4;

const CANONICAL_MAGIC: &str = "terc-schema 1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dynamics {
    Static,
    Slow,
    Fast,
}

impl Dynamics {
    pub fn name(self) -> &'static str {
        match self {
            Dynamics::Static => "static",
            Dynamics::Slow => "slow",
            Dynamics::Fast => "fast",
        }
    }
}

impl FromStr for Dynamics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" => Ok(Dynamics::Static),
            "slow" => Ok(Dynamics::Slow),
            "fast" => Ok(Dynamics::Fast),
            _ => Err(Error::SchemaInvalid(format!("unknown dynamics {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldRole {
    InstanceId,
    Position,
    Quantity,
    Generic,
}

impl FieldRole {
    pub fn name(self) -> &'static str {
        match self {
            FieldRole::InstanceId => "instance_id",
            FieldRole::Position => "position",
            FieldRole::Quantity => "quantity",
            FieldRole::Generic => "generic",
        }
    }
}

impl FromStr for FieldRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "instance_id" => Ok(FieldRole::InstanceId),
            "position" => Ok(FieldRole::Position),
            "quantity" => Ok(FieldRole::Quantity),
            "generic" => Ok(FieldRole::Generic),
            _ => Err(Error::SchemaInvalid(format!("unknown role {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDescriptor {
    pub name: String,
    pub scalar_type: ScalarType,
    pub dynamics: Dynamics,
    pub role: FieldRole,
    /// Value reported for a quantity field before its first nonzero observation.
    pub default: Option<Value>,
}

impl FieldDescriptor {
    pub fn new(
        name: impl Into<String>,
        scalar_type: ScalarType,
        dynamics: Dynamics,
        role: FieldRole,
    ) -> Self {
        FieldDescriptor {
            name: name.into(),
            scalar_type,
            dynamics,
            role,
            default: None,
        }
    }

    pub fn generic(name: impl Into<String>, scalar_type: ScalarType, dynamics: Dynamics) -> Self {
        Self::new(name, scalar_type, dynamics, FieldRole::Generic)
    }

    pub fn with_default(mut self, value: Value) -> Self {
        self.default = Some(value);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlaneElement {
    Bool,
    U8,
}

impl PlaneElement {
    pub fn name(self) -> &'static str {
        match self {
            PlaneElement::Bool => "bool",
            PlaneElement::U8 => "u8",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaneDescriptor {
    pub name: String,
    pub width: u32,
    pub height: u32,
    pub element: PlaneElement,
}

impl PlaneDescriptor {
    pub fn new(name: impl Into<String>, width: u32, height: u32, element: PlaneElement) -> Self {
        PlaneDescriptor {
            name: name.into(),
            width,
            height,
            element,
        }
    }

    pub fn pixels(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Serialized size of one plane in bytes (bit-packed for bool planes).
    pub fn encoded_len(&self) -> usize {
        match self.element {
            PlaneElement::Bool => self.pixels().div_ceil(8),
            PlaneElement::U8 => self.pixels(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    pub entity_fields: Vec<FieldDescriptor>,
    pub scalar_channels: Vec<FieldDescriptor>,
    pub plane_channels: Vec<PlaneDescriptor>,
    /// Wall-clock duration of one step, used for the APM analog.
    pub step_seconds: f64,
}

impl Default for Schema {
    fn default() -> Self {
        Schema {
            entity_fields: Vec::new(),
            scalar_channels: Vec::new(),
            plane_channels: Vec::new(),
            step_seconds: DEFAULT_STEP_SECONDS,
        }
    }
}

/// One schema defect, tied to the field that caused it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.field, self.message)
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, field: &str, message: impl Into<String>) {
        self.violations.push(Violation {
            field: field.to_string(),
            message: message.into(),
        });
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
            Err(Error::SchemaInvalid(msgs.join("; ")))
        }
    }
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Check every schema invariant, collecting all violations instead of
/// stopping at the first.
pub fn validate_schema(schema: &Schema) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut seen = HashSet::new();

    let names = schema
        .entity_fields
        .iter()
        .map(|f| f.name.as_str())
        .chain(schema.scalar_channels.iter().map(|f| f.name.as_str()))
        .chain(schema.plane_channels.iter().map(|p| p.name.as_str()));
    for name in names {
        if !is_identifier(name) {
            report.push(name, format!("name {name:?} is not an identifier"));
        }
        if !seen.insert(name) {
            report.push(name, format!("duplicate name {name}"));
        }
    }

    let ids: Vec<&FieldDescriptor> = schema
        .entity_fields
        .iter()
        .filter(|f| f.role == FieldRole::InstanceId)
        .collect();
    match ids.as_slice() {
        [] => report.push("", "no instance_id field"),
        [id] => {
            if !id.scalar_type.is_unsigned_int() {
                report.push(&id.name, "instance_id field must be an unsigned integer");
            }
        }
        many => {
            for f in many {
                report.push(&f.name, "more than one instance_id field");
            }
        }
    }

    let positions: Vec<&FieldDescriptor> = schema
        .entity_fields
        .iter()
        .filter(|f| f.role == FieldRole::Position)
        .collect();
    if !(positions.is_empty() || positions.len() == 2) {
        for f in &positions {
            report.push(
                &f.name,
                format!("position role needs exactly two fields, found {}", positions.len()),
            );
        }
    }
    for f in &positions {
        if !f.scalar_type.is_numeric() {
            report.push(&f.name, "position field must be numeric");
        }
    }

    for f in &schema.entity_fields {
        if f.role == FieldRole::Quantity && !f.scalar_type.is_numeric() {
            report.push(&f.name, "quantity field must be numeric");
        }
        if let Some(d) = f.default {
            if d.scalar_type() != f.scalar_type {
                report.push(
                    &f.name,
                    format!("default has type {} but field is {}", d.scalar_type(), f.scalar_type),
                );
            }
        }
    }

    for c in &schema.scalar_channels {
        if c.role != FieldRole::Generic {
            report.push(&c.name, "scalar channels must have role generic");
        }
        if c.default.is_some() {
            report.push(&c.name, "scalar channels take no default");
        }
    }

    for p in &schema.plane_channels {
        if p.pixels() == 0 {
            report.push(&p.name, "plane width*height must be positive");
        }
    }

    if !(schema.step_seconds.is_finite() && schema.step_seconds > 0.0) {
        report.push("step_seconds", "step_seconds must be positive and finite");
    }

    report
}

impl Schema {
    pub fn new(entity_fields: Vec<FieldDescriptor>) -> Self {
        Schema {
            entity_fields,
            ..Schema::default()
        }
    }

    pub fn with_scalar(mut self, channel: FieldDescriptor) -> Self {
        self.scalar_channels.push(channel);
        self
    }

    pub fn with_plane(mut self, plane: PlaneDescriptor) -> Self {
        self.plane_channels.push(plane);
        self
    }

    pub fn with_step_seconds(mut self, step_seconds: f64) -> Self {
        self.step_seconds = step_seconds;
        self
    }

    pub fn validate(&self) -> Result<()> {
        validate_schema(self).into_result()
    }

    pub fn instance_id_index(&self) -> Option<usize> {
        self.entity_fields
            .iter()
            .position(|f| f.role == FieldRole::InstanceId)
    }

    pub fn position_indices(&self) -> Option<(usize, usize)> {
        let mut it = self
            .entity_fields
            .iter()
            .enumerate()
            .filter(|(_, f)| f.role == FieldRole::Position)
            .map(|(i, _)| i);
        match (it.next(), it.next(), it.next()) {
            (Some(a), Some(b), None) => Some((a, b)),
            _ => None,
        }
    }

    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.entity_fields.iter().position(|f| f.name == name)
    }

    /// Bytes per entity record in the fixed-width encoding.
    pub fn record_width(&self) -> usize {
        self.entity_fields.iter().map(|f| f.scalar_type.width()).sum()
    }

    /// Canonical text form; its bytes are hashed into `schema_hash`.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        out.push_str(CANONICAL_MAGIC);
        out.push('\n');
        out.push_str(&format!("step_seconds {:?}\n", self.step_seconds));
        for f in &self.entity_fields {
            out.push_str(&format!(
                "entity {} {} {} {}",
                f.name,
                f.scalar_type,
                f.dynamics.name(),
                f.role.name()
            ));
            if let Some(d) = f.default {
                out.push_str(&format!(" default={d}"));
            }
            out.push('\n');
        }
        for c in &self.scalar_channels {
            out.push_str(&format!(
                "scalar {} {} {} {}\n",
                c.name,
                c.scalar_type,
                c.dynamics.name(),
                c.role.name()
            ));
        }
        for p in &self.plane_channels {
            out.push_str(&format!(
                "plane {} {} {} {}\n",
                p.name,
                p.width,
                p.height,
                p.element.name()
            ));
        }
        out
    }

    /// Parse a canonical text document. Structural validity is checked;
    /// call [`Schema::validate`] for the semantic invariants.
    pub fn from_canonical_text(text: &str) -> Result<Schema> {
        let bad = |line: &str| Error::SchemaInvalid(format!("malformed schema line {line:?}"));
        let mut lines = text.lines();
        if lines.next() != Some(CANONICAL_MAGIC) {
            return Err(Error::SchemaInvalid("missing schema header line".into()));
        }
        let mut schema = Schema::default();
        for line in lines {
            let parts: Vec<&str> = line.split(' ').collect();
            match parts.as_slice() {
                ["step_seconds", v] => {
                    schema.step_seconds = v.parse().map_err(|_| bad(line))?;
                }
                ["entity", name, ty, dynamics, role, rest @ ..] => {
                    let scalar_type: ScalarType = ty.parse()?;
                    let mut field = FieldDescriptor::new(
                        *name,
                        scalar_type,
                        dynamics.parse()?,
                        role.parse()?,
                    );
                    match rest {
                        [] => {}
                        [d] => {
                            let v = d.strip_prefix("default=").ok_or_else(|| bad(line))?;
                            field.default = Some(Value::parse(scalar_type, v)?);
                        }
                        _ => return Err(bad(line)),
                    }
                    schema.entity_fields.push(field);
                }
                ["scalar", name, ty, dynamics, role] => {
                    schema.scalar_channels.push(FieldDescriptor::new(
                        *name,
                        ty.parse()?,
                        dynamics.parse()?,
                        role.parse()?,
                    ));
                }
                ["plane", name, w, h, element] => {
                    let element = match *element {
                        "bool" => PlaneElement::Bool,
                        "u8" => PlaneElement::U8,
                        _ => return Err(bad(line)),
                    };
                    schema.plane_channels.push(PlaneDescriptor::new(
                        *name,
                        w.parse().map_err(|_| bad(line))?,
                        h.parse().map_err(|_| bad(line))?,
                        element,
                    ));
                }
                [""] => {}
                _ => return Err(bad(line)),
            }
        }
        Ok(schema)
    }

    pub fn hash(&self) -> u64 {
        fnv1a64(self.canonical_text().as_bytes())
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes.iter().fold(OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(PRIME))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn warehouse() -> Schema {
        Schema::new(vec![
            FieldDescriptor::new("robot_id", ScalarType::U32, Dynamics::Static, FieldRole::InstanceId),
            FieldDescriptor::generic("robot_type", ScalarType::U8, Dynamics::Static),
            FieldDescriptor::new("x_pos", ScalarType::F32, Dynamics::Fast, FieldRole::Position),
            FieldDescriptor::new("y_pos", ScalarType::F32, Dynamics::Fast, FieldRole::Position),
        ])
    }

    #[test]
    fn warehouse_schema_is_valid() {
        assert!(validate_schema(&warehouse()).is_ok());
    }

    #[test]
    fn empty_schema_lacks_instance_id() {
        let report = validate_schema(&Schema::default());
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].message, "no instance_id field");
    }

    #[test]
    fn duplicate_names_reported() {
        let mut s = warehouse();
        s.entity_fields
            .push(FieldDescriptor::generic("x", ScalarType::U8, Dynamics::Slow));
        s.entity_fields
            .push(FieldDescriptor::generic("x", ScalarType::U16, Dynamics::Slow));
        let report = validate_schema(&s);
        assert!(report
            .violations
            .iter()
            .any(|v| v.field == "x" && v.message == "duplicate name x"));
    }

    #[test]
    fn lists_every_violation() {
        let s = Schema::new(vec![
            FieldDescriptor::new("id", ScalarType::F32, Dynamics::Static, FieldRole::InstanceId),
            FieldDescriptor::new("px", ScalarType::F32, Dynamics::Fast, FieldRole::Position),
        ])
        .with_plane(PlaneDescriptor::new("map", 0, 4, PlaneElement::Bool));
        let fields: Vec<_> = validate_schema(&s)
            .violations
            .into_iter()
            .map(|v| v.field)
            .collect();
        assert_eq!(fields, vec!["id", "px", "map"]);
    }

    #[test]
    fn canonical_text_round_trips() {
        let s = warehouse()
            .with_scalar(FieldDescriptor::generic("score", ScalarType::F32, Dynamics::Fast))
            .with_plane(PlaneDescriptor::new("creep", 64, 64, PlaneElement::Bool));
        let mut s = s;
        s.entity_fields.push(
            FieldDescriptor::new("minerals", ScalarType::U16, Dynamics::Slow, FieldRole::Quantity)
                .with_default(Value::U16(1800)),
        );
        let text = s.canonical_text();
        assert_eq!(Schema::from_canonical_text(&text).unwrap(), s);
        assert_eq!(Schema::from_canonical_text(&text).unwrap().hash(), s.hash());
    }

    #[test]
    fn hash_is_deterministic_and_order_sensitive() {
        assert_eq!(warehouse().hash(), warehouse().hash());
        let mut swapped = warehouse();
        swapped.entity_fields.swap(2, 3);
        assert_ne!(warehouse().hash(), swapped.hash());
    }

    #[test]
    fn fnv_reference_vectors() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }
}
