//! Typed security parameters.
//!
//! Parameters are re-resolved on every call; nothing is cached per site.
//! Expression parameters are carried as opaque text and never evaluated.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::generators::{GeneratorError, GeneratorHandle, RuntimeArgs};

#[derive(Debug, Error)]
pub enum ParameterError {
    #[error("parameter '{name}': cannot coerce '{value}' to an integer")]
    TypeCoercion { name: String, value: String },
    #[error("unknown parameter type '{0}' (expected integer, string or expression)")]
    UnknownType(String),
    #[error("parameter '{name}': {source}")]
    Generator {
        name: String,
        #[source]
        source: GeneratorError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamType {
    Integer,
    String,
    Expression,
}

impl ParamType {
    pub fn as_str(self) -> &'static str {
        match self {
            ParamType::Integer => "integer",
            ParamType::String => "string",
            ParamType::Expression => "expression",
        }
    }

    /// Type for a generator context's `"type"`; anything unrecognized is text.
    pub fn from_type_tag(tag: &str) -> ParamType {
        tag.parse().unwrap_or(ParamType::String)
    }
}

impl FromStr for ParamType {
    type Err = ParameterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "integer" | "int" => Ok(ParamType::Integer),
            "string" | "str" | "text" => Ok(ParamType::String),
            "expression" | "expr" => Ok(ParamType::Expression),
            _ => Err(ParameterError::UnknownType(s.to_string())),
        }
    }
}

impl fmt::Display for ParamType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug)]
pub enum ParameterValue {
    Literal(String),
    Generator(GeneratorHandle),
}

#[derive(Debug)]
pub struct Parameter {
    pub name: String,
    pub ptype: ParamType,
    pub value: ParameterValue,
}

impl Parameter {
    pub fn literal(name: impl Into<String>, ptype: ParamType, value: impl Into<String>) -> Self {
        Self { name: name.into(), ptype, value: ParameterValue::Literal(value.into()) }
    }

    pub fn generated(name: impl Into<String>, ptype: ParamType, handle: GeneratorHandle) -> Self {
        Self { name: name.into(), ptype, value: ParameterValue::Generator(handle) }
    }

    pub fn resolve(&mut self, args: &RuntimeArgs) -> Result<ResolvedValue, ParameterError> {
        resolve_parameter(self, args)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", content = "value", rename_all = "lowercase")]
pub enum ResolvedValue {
    Integer(i64),
    String(String),
    Expression(String),
}

impl ResolvedValue {
    pub fn ptype(&self) -> ParamType {
        match self {
            ResolvedValue::Integer(_) => ParamType::Integer,
            ResolvedValue::String(_) => ParamType::String,
            ResolvedValue::Expression(_) => ParamType::Expression,
        }
    }
}

impl fmt::Display for ResolvedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResolvedValue::Integer(i) => write!(f, "{i}"),
            ResolvedValue::String(s) | ResolvedValue::Expression(s) => f.write_str(s),
        }
    }
}

/// Resolve a parameter to a value of its declared type. Generator-backed
/// parameters advance their generator on every call.
pub fn resolve_parameter(p: &mut Parameter, args: &RuntimeArgs) -> Result<ResolvedValue, ParameterError> {
    let raw = match &mut p.value {
        ParameterValue::Literal(text) => text.clone(),
        ParameterValue::Generator(handle) => {
            handle
                .generate(args)
                .map_err(|source| ParameterError::Generator { name: p.name.clone(), source })?
                .value
        }
    };
    coerce(&p.name, p.ptype, raw)
}

fn coerce(name: &str, ptype: ParamType, raw: String) -> Result<ResolvedValue, ParameterError> {
    Ok(match ptype {
        ParamType::Integer => ResolvedValue::Integer(parse_integer(&raw).ok_or_else(|| {
            ParameterError::TypeCoercion { name: name.to_string(), value: raw.clone() }
        })?),
        ParamType::String => ResolvedValue::String(raw),
        ParamType::Expression => ResolvedValue::Expression(raw),
    })
}

/// Base-10, optional sign, surrounding whitespace allowed.
fn parse_integer(text: &str) -> Option<i64> {
    let trimmed = text.trim();
    let digits = trimmed.strip_prefix(['+', '-']).unwrap_or(trimmed);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    trimmed.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::parse_context_literal;
    use crate::generators::GeneratorRegistry;

    fn generated(ptype: ParamType, ctx: &str) -> Parameter {
        let handle = GeneratorRegistry::with_builtins()
            .load_generator("RoundRobinGenerator", parse_context_literal(ctx).unwrap())
            .unwrap();
        Parameter::generated("p", ptype, handle)
    }

    #[test]
    fn literal_integer() {
        let mut p = Parameter::literal("slots", ParamType::Integer, "8");
        assert_eq!(p.resolve(&RuntimeArgs::new()).unwrap(), ResolvedValue::Integer(8));
        assert_eq!(p.resolve(&RuntimeArgs::new()).unwrap(), ResolvedValue::Integer(8));
    }

    #[test]
    fn generated_string_follows_round_robin() {
        let mut p = generated(ParamType::String, "{'items': ['vm1', 'vm2', 'vm3'], 'type': 'string'}");
        let args = RuntimeArgs::new();
        assert_eq!(p.resolve(&args).unwrap(), ResolvedValue::String("vm1".into()));
        assert_eq!(p.resolve(&args).unwrap(), ResolvedValue::String("vm2".into()));
    }

    #[test]
    fn unparseable_integer_is_coercion_error() {
        let mut p = generated(ParamType::Integer, "{'items': ['abc'], 'type': 'integer'}");
        assert!(matches!(p.resolve(&RuntimeArgs::new()), Err(ParameterError::TypeCoercion { .. })));
    }

    #[test]
    fn integer_coercion_rules() {
        assert_eq!(parse_integer(" -12 "), Some(-12));
        assert_eq!(parse_integer("+7"), Some(7));
        assert_eq!(parse_integer("0x10"), None);
        assert_eq!(parse_integer("1_000"), None);
        assert_eq!(parse_integer(""), None);
        assert_eq!(parse_integer("-"), None);
        assert_eq!(parse_integer("99999999999999999999"), None);
    }

    #[test]
    fn expressions_stay_opaque() {
        let mut p = Parameter::literal("req", ParamType::Expression, "Memory > 2048 && Cpus >= 4");
        assert_eq!(
            p.resolve(&RuntimeArgs::new()).unwrap(),
            ResolvedValue::Expression("Memory > 2048 && Cpus >= 4".into())
        );
    }

    #[test]
    fn generator_errors_propagate() {
        let mut p = generated(ParamType::String, "{'items': [], 'type': 'string'}");
        let err = p.resolve(&RuntimeArgs::new()).unwrap_err();
        assert!(matches!(err, ParameterError::Generator { .. }));
    }

    #[test]
    fn type_tags() {
        assert_eq!(ParamType::from_type_tag("string"), ParamType::String);
        assert_eq!(ParamType::from_type_tag("integer"), ParamType::Integer);
        assert_eq!(ParamType::from_type_tag("expression"), ParamType::Expression);
        assert_eq!(ParamType::from_type_tag("vmid"), ParamType::String);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn resolved_value_matches_declared_type(text in ".{0,12}", pick in 0usize..3) {
                let ptype = [ParamType::Integer, ParamType::String, ParamType::Expression][pick];
                let mut p = Parameter::literal("x", ptype, text);
                if let Ok(v) = p.resolve(&RuntimeArgs::new()) {
                    prop_assert_eq!(v.ptype(), ptype);
                }
            }

            #[test]
            fn integers_round_trip(n in any::<i64>()) {
                let mut p = Parameter::literal("n", ParamType::Integer, format!(" {n}\n"));
                prop_assert_eq!(p.resolve(&RuntimeArgs::new()).unwrap(), ResolvedValue::Integer(n));
            }
        }
    }
}
