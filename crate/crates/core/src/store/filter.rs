use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use super::{field_kind, Cell, FieldKind, MetadataRow};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterOp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
    /// Exact match on the field's text rendering.
    StrEq,
}

impl FilterOp {
    pub const ALL: [FilterOp; 6] = [
        FilterOp::Lt,
        FilterOp::Le,
        FilterOp::Eq,
        FilterOp::Ge,
        FilterOp::Gt,
        FilterOp::StrEq,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            FilterOp::Lt => "<",
            FilterOp::Le => "<=",
            FilterOp::Eq => "=",
            FilterOp::Ge => ">=",
            FilterOp::Gt => ">",
            FilterOp::StrEq => "=string",
        }
    }

    fn accepts(self, ord: Ordering) -> bool {
        match self {
            FilterOp::Lt => ord.is_lt(),
            FilterOp::Le => ord.is_le(),
            FilterOp::Eq | FilterOp::StrEq => ord.is_eq(),
            FilterOp::Ge => ord.is_ge(),
            FilterOp::Gt => ord.is_gt(),
        }
    }
}

/// One `field op value` condition.
///
/// Numeric fields compare numerically (integers exactly when the value is
/// an integer literal); text fields compare by byte order. `=string`
/// compares the rendered text of any field. Null cells satisfy nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct Predicate {
    pub field: String,
    pub op: FilterOp,
    pub value: String,
}

enum Operand {
    Int(i128),
    Float(f64),
    Text(String),
}

impl Predicate {
    pub fn new(field: impl Into<String>, op: FilterOp, value: impl Into<String>) -> Self {
        Predicate {
            field: field.into(),
            op,
            value: value.into(),
        }
    }

    fn operand(&self) -> Result<Operand> {
        let kind = field_kind(&self.field)?;
        if self.op == FilterOp::StrEq || !kind.is_numeric() {
            return Ok(Operand::Text(self.value.clone()));
        }
        let v = self.value.trim();
        if let Ok(i) = v.parse::<i128>() {
            return Ok(Operand::Int(i));
        }
        match v.parse::<f64>() {
            Ok(f) if !f.is_nan() => Ok(Operand::Float(f)),
            _ => Err(Error::InvalidFilter(format!(
                "{} is numeric; {:?} is not a number",
                self.field, self.value
            ))),
        }
    }

    pub fn matches(&self, row: &MetadataRow) -> Result<bool> {
        let operand = self.operand()?;
        let cell = row.cell(&self.field)?;
        let ord = match (&cell, &operand) {
            (Cell::Null, _) => return Ok(false),
            (_, Operand::Text(t)) if self.op == FilterOp::StrEq => cell.to_string().as_str().cmp(t.as_str()),
            (Cell::Text(s), Operand::Text(t)) => s.as_str().cmp(t.as_str()),
            (Cell::Int(a), Operand::Int(b)) => a.cmp(b),
            (Cell::Int(a), Operand::Float(b)) => (*a as f64).total_cmp(b),
            (Cell::Float(a), Operand::Int(b)) => a.total_cmp(&(*b as f64)),
            (Cell::Float(a), Operand::Float(b)) => a.total_cmp(b),
            _ => unreachable!("operand kind follows field kind"),
        };
        Ok(self.op.accepts(ord))
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.op {
            FilterOp::StrEq => write!(f, "{} =string {}", self.field, self.value),
            op => write!(f, "{}{}{}", self.field, op.symbol(), self.value),
        }
    }
}

/// Parses `field<op>value`, e.g. `duration_steps>=5000`,
/// `scenario_tag=warehouse` or `replay_id =string w-01`.
impl FromStr for Predicate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let split = s
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .ok_or_else(|| Error::InvalidFilter(format!("no operator in {s:?}")))?;
        let field = &s[..split];
        let rest = s[split..].trim_start();
        if field.is_empty() {
            return Err(Error::InvalidFilter(format!("no field name in {s:?}")));
        }
        let (op, value) = if let Some(v) = rest.strip_prefix("=string").filter(|v| v.starts_with(char::is_whitespace)) {
            (FilterOp::StrEq, v.trim_start())
        } else if let Some(v) = rest.strip_prefix("<=").or_else(|| rest.strip_prefix('≤')) {
            (FilterOp::Le, v)
        } else if let Some(v) = rest.strip_prefix(">=").or_else(|| rest.strip_prefix('≥')) {
            (FilterOp::Ge, v)
        } else if let Some(v) = rest.strip_prefix('<') {
            (FilterOp::Lt, v)
        } else if let Some(v) = rest.strip_prefix('>') {
            (FilterOp::Gt, v)
        } else if let Some(v) = rest.strip_prefix("==").or_else(|| rest.strip_prefix('=')) {
            (FilterOp::Eq, v)
        } else {
            return Err(Error::InvalidFilter(format!("unknown operator in {s:?}")));
        };
        Ok(Predicate::new(field, op, value.trim()))
    }
}

/// Conjunction of predicates; empty matches every row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FilterSpec {
    pub predicates: Vec<Predicate>,
}

impl FilterSpec {
    pub fn new(predicates: Vec<Predicate>) -> Self {
        FilterSpec { predicates }
    }

    pub fn parse_all<S: AsRef<str>>(terms: &[S]) -> Result<Self> {
        Ok(FilterSpec::new(
            terms.iter().map(|t| t.as_ref().parse()).collect::<Result<_>>()?,
        ))
    }

    /// Every field exists and every numeric operand parses.
    pub fn check(&self) -> Result<()> {
        for p in &self.predicates {
            p.operand()?;
        }
        Ok(())
    }

    pub fn matches(&self, row: &MetadataRow) -> Result<bool> {
        for p in &self.predicates {
            if !p.matches(row)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl FieldKind {
    /// Whether grouping by a field of this kind makes sense.
    pub fn is_categorical(self) -> bool {
        self != FieldKind::F64
    }
}
