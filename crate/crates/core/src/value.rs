//! Typed scalar values stored in entity fields, scalar channels, and defaults.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Wire type of one field. Every type is fixed width and little-endian on disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalarType {
    U8,
    U16,
    U32,
    U64,
    I32,
    F32,
    F64,
    Bool,
}

impl ScalarType {
    pub const ALL: [ScalarType; 8] = [
        ScalarType::U8,
        ScalarType::U16,
        ScalarType::U32,
        ScalarType::U64,
        ScalarType::I32,
        ScalarType::F32,
        ScalarType::F64,
        ScalarType::Bool,
    ];

    /// Encoded width in bytes.
    pub fn width(self) -> usize {
        match self {
            ScalarType::U8 | ScalarType::Bool => 1,
            ScalarType::U16 => 2,
            ScalarType::U32 | ScalarType::I32 | ScalarType::F32 => 4,
            ScalarType::U64 | ScalarType::F64 => 8,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScalarType::U8 => "u8",
            ScalarType::U16 => "u16",
            ScalarType::U32 => "u32",
            ScalarType::U64 => "u64",
            ScalarType::I32 => "i32",
            ScalarType::F32 => "f32",
            ScalarType::F64 => "f64",
            ScalarType::Bool => "bool",
        }
    }

    pub fn is_unsigned_int(self) -> bool {
        matches!(
            self,
            ScalarType::U8 | ScalarType::U16 | ScalarType::U32 | ScalarType::U64
        )
    }

    pub fn is_numeric(self) -> bool {
        !matches!(self, ScalarType::Bool)
    }

    /// The all-zero value of this type.
    pub fn zero(self) -> Value {
        match self {
            ScalarType::U8 => Value::U8(0),
            ScalarType::U16 => Value::U16(0),
            ScalarType::U32 => Value::U32(0),
            ScalarType::U64 => Value::U64(0),
            ScalarType::I32 => Value::I32(0),
            ScalarType::F32 => Value::F32(0.0),
            ScalarType::F64 => Value::F64(0.0),
            ScalarType::Bool => Value::Bool(false),
        }
    }
}

impl fmt::Display for ScalarType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScalarType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScalarType::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::SchemaInvalid(format!("unknown scalar type {s:?}")))
    }
}

/// A single typed value.
///
/// Equality and hashing are bitwise for the float variants so that NaN
/// payloads and signed zeros survive round trips and compare equal to
/// themselves.
#[derive(Debug, Clone, Copy)]
pub enum Value {
    U8(u8),
    U16(u16),
    U32(u32),
    U64(u64),
    I32(i32),
    F32(f32),
    F64(f64),
    Bool(bool),
}

impl Value {
    pub fn scalar_type(&self) -> ScalarType {
        match self {
            Value::U8(_) => ScalarType::U8,
            Value::U16(_) => ScalarType::U16,
            Value::U32(_) => ScalarType::U32,
            Value::U64(_) => ScalarType::U64,
            Value::I32(_) => ScalarType::I32,
            Value::F32(_) => ScalarType::F32,
            Value::F64(_) => ScalarType::F64,
            Value::Bool(_) => ScalarType::Bool,
        }
    }

    /// Raw bit pattern widened to 64 bits; the basis of equality.
    pub fn bits(&self) -> u64 {
        match *self {
            Value::U8(v) => v as u64,
            Value::U16(v) => v as u64,
            Value::U32(v) => v as u64,
            Value::U64(v) => v,
            Value::I32(v) => v as u32 as u64,
            Value::F32(v) => v.to_bits() as u64,
            Value::F64(v) => v.to_bits(),
            Value::Bool(v) => v as u64,
        }
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            Value::U8(v) => v as f64,
            Value::U16(v) => v as f64,
            Value::U32(v) => v as f64,
            Value::U64(v) => v as f64,
            Value::I32(v) => v as f64,
            Value::F32(v) => v as f64,
            Value::F64(v) => v,
            Value::Bool(v) => v as u8 as f64,
        }
    }

    /// Unsigned integer view, used for instance ids.
    pub fn as_u64(&self) -> Option<u64> {
        match *self {
            Value::U8(v) => Some(v as u64),
            Value::U16(v) => Some(v as u64),
            Value::U32(v) => Some(v as u64),
            Value::U64(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Value::F32(v) => v == 0.0,
            Value::F64(v) => v == 0.0,
            _ => self.bits() == 0,
        }
    }

    /// Build a value of type `ty` from an unsigned integer, truncating to width.
    pub fn from_u64(ty: ScalarType, v: u64) -> Value {
        match ty {
            ScalarType::U8 => Value::U8(v as u8),
            ScalarType::U16 => Value::U16(v as u16),
            ScalarType::U32 => Value::U32(v as u32),
            ScalarType::U64 => Value::U64(v),
            ScalarType::I32 => Value::I32(v as i32),
            ScalarType::F32 => Value::F32(v as f32),
            ScalarType::F64 => Value::F64(v as f64),
            ScalarType::Bool => Value::Bool(v != 0),
        }
    }

    /// Build a value of type `ty` from a float, saturating for integer types.
    pub fn from_f64(ty: ScalarType, v: f64) -> Value {
        match ty {
            ScalarType::U8 => Value::U8(v as u8),
            ScalarType::U16 => Value::U16(v as u16),
            ScalarType::U32 => Value::U32(v as u32),
            ScalarType::U64 => Value::U64(v as u64),
            ScalarType::I32 => Value::I32(v as i32),
            ScalarType::F32 => Value::F32(v as f32),
            ScalarType::F64 => Value::F64(v),
            ScalarType::Bool => Value::Bool(v != 0.0),
        }
    }

    pub fn write_le(&self, out: &mut Vec<u8>) {
        match *self {
            Value::U8(v) => out.push(v),
            Value::U16(v) => out.extend_from_slice(&v.to_le_bytes()),
            Value::U32(v) => out.extend_from_slice(&v.to_le_bytes()),
            Value::U64(v) => out.extend_from_slice(&v.to_le_bytes()),
            Value::I32(v) => out.extend_from_slice(&v.to_le_bytes()),
            Value::F32(v) => out.extend_from_slice(&v.to_le_bytes()),
            Value::F64(v) => out.extend_from_slice(&v.to_le_bytes()),
            Value::Bool(v) => out.push(v as u8),
        }
    }

    /// Decode one value from the front of `bytes`, which must hold at least
    /// `ty.width()` bytes.
    pub fn read_le(ty: ScalarType, bytes: &[u8]) -> Result<Value> {
        let w = ty.width();
        let b = bytes
            .get(..w)
            .ok_or_else(|| Error::malformed(format!("truncated {ty} value")))?;
        Ok(match ty {
            ScalarType::U8 => Value::U8(b[0]),
            ScalarType::U16 => Value::U16(u16::from_le_bytes([b[0], b[1]])),
            ScalarType::U32 => Value::U32(u32::from_le_bytes(b.try_into().unwrap())),
            ScalarType::U64 => Value::U64(u64::from_le_bytes(b.try_into().unwrap())),
            ScalarType::I32 => Value::I32(i32::from_le_bytes(b.try_into().unwrap())),
            ScalarType::F32 => Value::F32(f32::from_le_bytes(b.try_into().unwrap())),
            ScalarType::F64 => Value::F64(f64::from_le_bytes(b.try_into().unwrap())),
            ScalarType::Bool => match b[0] {
                0 => Value::Bool(false),
                1 => Value::Bool(true),
                other => return Err(Error::malformed(format!("bool byte {other:#04x}"))),
            },
        })
    }

    pub fn parse(ty: ScalarType, s: &str) -> Result<Value> {
        let bad = || Error::SchemaInvalid(format!("cannot parse {s:?} as {ty}"));
        Ok(match ty {
            ScalarType::U8 => Value::U8(s.parse().map_err(|_| bad())?),
            ScalarType::U16 => Value::U16(s.parse().map_err(|_| bad())?),
            ScalarType::U32 => Value::U32(s.parse().map_err(|_| bad())?),
            ScalarType::U64 => Value::U64(s.parse().map_err(|_| bad())?),
            ScalarType::I32 => Value::I32(s.parse().map_err(|_| bad())?),
            ScalarType::F32 => Value::F32(s.parse().map_err(|_| bad())?),
            ScalarType::F64 => Value::F64(s.parse().map_err(|_| bad())?),
            ScalarType::Bool => match s {
                "true" | "1" => Value::Bool(true),
                "false" | "0" => Value::Bool(false),
                _ => return Err(bad()),
            },
        })
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.scalar_type() == other.scalar_type() && self.bits() == other.bits()
    }
}

impl Eq for Value {}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.scalar_type().hash(state);
        self.bits().hash(state);
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::U8(v) => write!(f, "{v}"),
            Value::U16(v) => write!(f, "{v}"),
            Value::U32(v) => write!(f, "{v}"),
            Value::U64(v) => write!(f, "{v}"),
            Value::I32(v) => write!(f, "{v}"),
            Value::F32(v) => write!(f, "{v}"),
            Value::F64(v) => write!(f, "{v}"),
            Value::Bool(v) => write!(f, "{v}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_equals_itself() {
        let v = Value::F32(f32::NAN);
        assert_eq!(v, v);
        assert_ne!(Value::F64(0.0), Value::F64(-0.0));
    }

    #[test]
    fn le_round_trip_every_type() {
        let vals = [
            Value::U8(200),
            Value::U16(0xBEEF),
            Value::U32(0xDEAD_BEEF),
            Value::U64(u64::MAX - 3),
            Value::I32(-17),
            Value::F32(1.5),
            Value::F64(-2.25),
            Value::Bool(true),
        ];
        for v in vals {
            let mut buf = Vec::new();
            v.write_le(&mut buf);
            assert_eq!(buf.len(), v.scalar_type().width());
            assert_eq!(Value::read_le(v.scalar_type(), &buf).unwrap(), v);
            assert_eq!(Value::parse(v.scalar_type(), &v.to_string()).unwrap(), v);
        }
    }

    #[test]
    fn bool_rejects_non_canonical_byte() {
        assert!(Value::read_le(ScalarType::Bool, &[2]).is_err());
    }
}
