//! Runtime values, the type universe, and their JSON encodings.

use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueType {
    Control,
    Integer,
    Float,
    Text,
    Boolean,
}

impl ValueType {
    /// Short name used on the wire.
    pub fn wire_name(self) -> &'static str {
        match self {
            ValueType::Control => "control",
            ValueType::Integer => "int",
            ValueType::Float => "float",
            ValueType::Text => "text",
            ValueType::Boolean => "bool",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "control" => ValueType::Control,
            "int" | "integer" => ValueType::Integer,
            "float" => ValueType::Float,
            "text" => ValueType::Text,
            "bool" | "boolean" => ValueType::Boolean,
            _ => return None,
        })
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.wire_name())
    }
}

/// A port value. `Absent` marks an empty port.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Control,
    Integer(BigInt),
    Float(f64),
    Text(String),
    Boolean(bool),
    Absent,
}

impl Value {
    pub fn int(n: i64) -> Self {
        Value::Integer(BigInt::from(n))
    }

    pub fn value_type(&self) -> Option<ValueType> {
        Some(match self {
            Value::Control => ValueType::Control,
            Value::Integer(_) => ValueType::Integer,
            Value::Float(_) => ValueType::Float,
            Value::Text(_) => ValueType::Text,
            Value::Boolean(_) => ValueType::Boolean,
            Value::Absent => return None,
        })
    }

    pub fn is_absent(&self) -> bool {
        matches!(self, Value::Absent)
    }

    /// Bare JSON form: `"*"` for control, numbers, strings, booleans, and
    /// `null` for absent. Integers beyond 64 bits become decimal strings;
    /// non-finite floats become `"NaN"`, `"inf"` or `"-inf"`.
    pub fn to_json(&self) -> Json {
        match self {
            Value::Control => json!("*"),
            Value::Integer(n) => match n.to_i64() {
                Some(i) => json!(i),
                None => json!(n.to_string()),
            },
            Value::Float(x) if x.is_finite() => json!(x),
            Value::Float(x) if x.is_nan() => json!("NaN"),
            Value::Float(x) if *x > 0.0 => json!("inf"),
            Value::Float(_) => json!("-inf"),
            Value::Text(s) => json!(s),
            Value::Boolean(b) => json!(b),
            Value::Absent => Json::Null,
        }
    }

    /// Reads a bare JSON value at the given type.
    pub fn from_json(ty: ValueType, json: &Json) -> Result<Value, ValueError> {
        let bad = || ValueError::Mismatch {
            expected: ty,
            found: json.to_string(),
        };
        match ty {
            ValueType::Control => match json {
                Json::String(s) if s == "*" => Ok(Value::Control),
                Json::Bool(true) => Ok(Value::Control),
                Json::Object(m) if m.get("control") == Some(&Json::Bool(true)) => {
                    Ok(Value::Control)
                }
                _ => Err(bad()),
            },
            ValueType::Integer => match json {
                Json::Number(n) => {
                    if let Some(i) = n.as_i64() {
                        Ok(Value::int(i))
                    } else if let Some(u) = n.as_u64() {
                        Ok(Value::Integer(BigInt::from(u)))
                    } else {
                        Err(bad())
                    }
                }
                Json::String(s) => s.parse::<BigInt>().map(Value::Integer).map_err(|_| bad()),
                _ => Err(bad()),
            },
            ValueType::Float => match json {
                Json::Number(n) => n.as_f64().map(Value::Float).ok_or_else(bad),
                Json::String(s) => match s.as_str() {
                    "NaN" => Ok(Value::Float(f64::NAN)),
                    "inf" => Ok(Value::Float(f64::INFINITY)),
                    "-inf" => Ok(Value::Float(f64::NEG_INFINITY)),
                    _ => Err(bad()),
                },
                _ => Err(bad()),
            },
            ValueType::Text => match json {
                Json::String(s) => Ok(Value::Text(s.clone())),
                _ => Err(bad()),
            },
            ValueType::Boolean => match json {
                Json::Bool(b) => Ok(Value::Boolean(*b)),
                _ => Err(bad()),
            },
        }
    }

    /// Wire form `{"type": .., "value": .., "label": ..}`.
    pub fn to_typed_json(&self, label: Option<&str>) -> Result<Json, ValueError> {
        let ty = self.value_type().ok_or(ValueError::AbsentOnWire)?;
        let mut obj = json!({ "type": ty.wire_name(), "value": self.to_json() });
        if let Some(l) = label {
            obj["label"] = json!(l);
        }
        Ok(obj)
    }

    pub fn from_typed_json(json: &Json) -> Result<Value, ValueError> {
        let ty = json
            .get("type")
            .and_then(Json::as_str)
            .ok_or_else(|| ValueError::Malformed(json.to_string()))?;
        let ty = ValueType::from_name(ty).ok_or_else(|| ValueError::UnknownType(ty.to_owned()))?;
        let value = json
            .get("value")
            .ok_or_else(|| ValueError::Malformed(json.to_string()))?;
        Value::from_json(ty, value)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Control => f.write_str("*"),
            Value::Integer(n) => write!(f, "{n}"),
            Value::Float(x) => write!(f, "{x:?}"),
            Value::Text(s) => write!(f, "{s:?}"),
            Value::Boolean(b) => write!(f, "{b}"),
            Value::Absent => f.write_str("⊥"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValueError {
    #[error("expected a {expected} value, found {found}")]
    Mismatch { expected: ValueType, found: String },
    #[error("unknown value type `{0}`")]
    UnknownType(String),
    #[error("malformed typed value {0}")]
    Malformed(String),
    #[error("an absent value cannot be transmitted")]
    AbsentOnWire,
    #[error("colour 0 must be the control type")]
    ControlColour,
    #[error("colour {0} has no type")]
    Uncovered(usize),
}

/// Concrete type of each colour.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ValueType>", into = "Vec<ValueType>")]
pub struct TypeUniverse(Vec<ValueType>);

impl TypeUniverse {
    pub fn new(types: Vec<ValueType>) -> Result<Self, ValueError> {
        if types.first() != Some(&ValueType::Control) {
            return Err(ValueError::ControlColour);
        }
        Ok(TypeUniverse(types))
    }

    /// Colours 0..n mapped to control, integer, float, text, boolean, then
    /// text for any further colours.
    pub fn standard(colours: usize) -> Self {
        const ORDER: [ValueType; 5] = [
            ValueType::Control,
            ValueType::Integer,
            ValueType::Float,
            ValueType::Text,
            ValueType::Boolean,
        ];
        TypeUniverse(
            (0..colours.max(1))
                .map(|c| ORDER.get(c).copied().unwrap_or(ValueType::Text))
                .collect(),
        )
    }

    pub fn get(&self, colour: usize) -> Option<ValueType> {
        self.0.get(colour).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Replaces the type of one colour; colour 0 stays control.
    pub fn with(mut self, colour: usize, ty: ValueType) -> Result<Self, ValueError> {
        if colour == 0 && ty != ValueType::Control {
            return Err(ValueError::ControlColour);
        }
        if colour >= self.0.len() {
            self.0.resize(colour + 1, ValueType::Text);
        }
        self.0[colour] = ty;
        Ok(self)
    }

    pub fn inhabits(&self, colour: usize, v: &Value) -> bool {
        v.is_absent() || v.value_type() == self.get(colour)
    }
}

impl TryFrom<Vec<ValueType>> for TypeUniverse {
    type Error = ValueError;
    fn try_from(v: Vec<ValueType>) -> Result<Self, Self::Error> {
        TypeUniverse::new(v)
    }
}

impl From<TypeUniverse> for Vec<ValueType> {
    fn from(u: TypeUniverse) -> Self {
        u.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let big: BigInt = "123456789012345678901234567890".parse().unwrap();
        for (ty, v) in [
            (ValueType::Control, Value::Control),
            (ValueType::Integer, Value::int(-7)),
            (ValueType::Integer, Value::Integer(big)),
            (ValueType::Float, Value::Float(1.5)),
            (ValueType::Float, Value::Float(f64::INFINITY)),
            (ValueType::Text, Value::Text("hi".into())),
            (ValueType::Boolean, Value::Boolean(false)),
        ] {
            assert_eq!(Value::from_json(ty, &v.to_json()).unwrap(), v);
            let typed = v.to_typed_json(Some("p")).unwrap();
            assert_eq!(typed["label"], "p");
            assert_eq!(Value::from_typed_json(&typed).unwrap(), v);
        }
        assert!(Value::Absent.to_typed_json(None).is_err());
    }

    #[test]
    fn mismatches() {
        assert!(Value::from_json(ValueType::Integer, &json!("x")).is_err());
        assert!(Value::from_json(ValueType::Integer, &json!(1.5)).is_err());
        assert!(Value::from_json(ValueType::Control, &json!(1)).is_err());
        assert_eq!(
            Value::from_json(ValueType::Control, &json!({"control": true})).unwrap(),
            Value::Control
        );
    }

    #[test]
    fn universe() {
        assert!(TypeUniverse::new(vec![ValueType::Integer]).is_err());
        let u = TypeUniverse::standard(3);
        assert_eq!(u.get(2), Some(ValueType::Float));
        assert!(u.inhabits(1, &Value::int(3)));
        assert!(!u.inhabits(1, &Value::Float(3.0)));
        assert!(u.inhabits(1, &Value::Absent));
        let u = u.with(2, ValueType::Integer).unwrap();
        assert_eq!(u.get(2), Some(ValueType::Integer));
        assert!(u.with(0, ValueType::Text).is_err());
    }
}
