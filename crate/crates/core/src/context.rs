//! Generator context maps and the literal syntax used to write them.
//!
//! Contexts appear in declaration attributes either in single-quoted literal
//! style (`{'items': ['a', 'b'], 'type': 'text'}`) or as JSON. Both parse to
//! the same [`GeneratorContext`]. The value model is deliberately small:
//! text, integers, lists and maps. Anything else (floats, booleans, null,
//! expressions) is a syntax error.

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::{Serialize, SerializeMap, SerializeSeq, Serializer};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("context syntax error at byte {offset}: {message}")]
pub struct ContextSyntaxError {
    pub offset: usize,
    pub message: String,
}

impl ContextSyntaxError {
    fn new(offset: usize, message: impl Into<String>) -> Self {
        Self { offset, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ContextValue {
    Text(String),
    Integer(i64),
    List(Vec<ContextValue>),
    Map(BTreeMap<String, ContextValue>),
}

impl ContextValue {
    pub fn as_str(&self) -> Option<&str> {
        match self {
            ContextValue::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        match self {
            ContextValue::Integer(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[ContextValue]> {
        match self {
            ContextValue::List(items) => Some(items),
            _ => None,
        }
    }

    pub fn as_map(&self) -> Option<&BTreeMap<String, ContextValue>> {
        match self {
            ContextValue::Map(map) => Some(map),
            _ => None,
        }
    }

    /// Plain text for scalars, literal syntax for containers.
    pub fn render(&self) -> String {
        match self {
            ContextValue::Text(s) => s.clone(),
            ContextValue::Integer(i) => i.to_string(),
            other => other.to_literal(),
        }
    }

    pub fn to_literal(&self) -> String {
        let mut out = String::new();
        write_literal(self, &mut out);
        out
    }

    pub fn to_json(&self) -> Value {
        match self {
            ContextValue::Text(s) => Value::String(s.clone()),
            ContextValue::Integer(i) => Value::from(*i),
            ContextValue::List(items) => Value::Array(items.iter().map(ContextValue::to_json).collect()),
            ContextValue::Map(map) => {
                Value::Object(map.iter().map(|(k, v)| (k.clone(), v.to_json())).collect())
            }
        }
    }

    /// Convert a JSON value, rejecting types outside the context model.
    pub fn from_json(value: &Value) -> Result<Self, String> {
        Ok(match value {
            Value::String(s) => ContextValue::Text(s.clone()),
            Value::Number(n) => ContextValue::Integer(
                n.as_i64().ok_or_else(|| format!("unsupported number {n} (integers only)"))?,
            ),
            Value::Array(items) => {
                ContextValue::List(items.iter().map(ContextValue::from_json).collect::<Result<_, _>>()?)
            }
            Value::Object(map) => ContextValue::Map(
                map.iter()
                    .map(|(k, v)| Ok((k.clone(), ContextValue::from_json(v)?)))
                    .collect::<Result<_, String>>()?,
            ),
            Value::Bool(_) => return Err("booleans are not supported".into()),
            Value::Null => return Err("null is not supported".into()),
        })
    }
}

impl From<&str> for ContextValue {
    fn from(s: &str) -> Self {
        ContextValue::Text(s.to_string())
    }
}

impl From<String> for ContextValue {
    fn from(s: String) -> Self {
        ContextValue::Text(s)
    }
}

impl From<i64> for ContextValue {
    fn from(i: i64) -> Self {
        ContextValue::Integer(i)
    }
}

impl Serialize for ContextValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ContextValue::Text(s) => serializer.serialize_str(s),
            ContextValue::Integer(i) => serializer.serialize_i64(*i),
            ContextValue::List(items) => {
                let mut seq = serializer.serialize_seq(Some(items.len()))?;
                for item in items {
                    seq.serialize_element(item)?;
                }
                seq.end()
            }
            ContextValue::Map(map) => {
                let mut m = serializer.serialize_map(Some(map.len()))?;
                for (k, v) in map {
                    m.serialize_entry(k, v)?;
                }
                m.end()
            }
        }
    }
}

fn write_literal(value: &ContextValue, out: &mut String) {
    match value {
        ContextValue::Text(s) => write_quoted(s, out),
        ContextValue::Integer(i) => out.push_str(&i.to_string()),
        ContextValue::List(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_literal(item, out);
            }
            out.push(']');
        }
        ContextValue::Map(map) => write_map(map, out),
    }
}

fn write_map(map: &BTreeMap<String, ContextValue>, out: &mut String) {
    out.push('{');
    for (i, (k, v)) in map.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_quoted(k, out);
        out.push_str(": ");
        write_literal(v, out);
    }
    out.push('}');
}

fn write_quoted(s: &str, out: &mut String) {
    out.push('\'');
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\'' => out.push_str("\\'"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('\'');
}

/// The settings map handed to a generator. Must carry a `"type"` entry
/// naming the kind of content generated; see [`GeneratorContext::validate`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GeneratorContext {
    entries: BTreeMap<String, ContextValue>,
}

impl GeneratorContext {
    pub const TYPE_KEY: &'static str = "type";

    pub fn new(entries: BTreeMap<String, ContextValue>) -> Self {
        Self { entries }
    }

    pub fn parse(text: &str) -> Result<Self, ContextSyntaxError> {
        parse_context_literal(text)
    }

    pub fn entries(&self) -> &BTreeMap<String, ContextValue> {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&ContextValue> {
        self.entries.get(key)
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.get(key).and_then(ContextValue::as_str)
    }

    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<ContextValue>) {
        self.entries.insert(key.into(), value.into());
    }

    pub fn type_tag(&self) -> Option<&str> {
        self.get_str(Self::TYPE_KEY).filter(|t| !t.is_empty())
    }

    /// Checks the `"type"` key is present, textual and non-empty.
    pub fn validate(&self) -> Result<&str, String> {
        match self.get(Self::TYPE_KEY) {
            None => Err("context is missing the required \"type\" key".into()),
            Some(ContextValue::Text(t)) if !t.is_empty() => Ok(t),
            Some(_) => Err("context \"type\" must be a non-empty string".into()),
        }
    }

    pub fn to_literal(&self) -> String {
        let mut out = String::new();
        write_map(&self.entries, &mut out);
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Object(self.entries.iter().map(|(k, v)| (k.clone(), v.to_json())).collect())
    }
}

impl Serialize for GeneratorContext {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.entries.serialize(serializer)
    }
}

impl fmt::Display for GeneratorContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_literal())
    }
}

impl<K: Into<String>, V: Into<ContextValue>> FromIterator<(K, V)> for GeneratorContext {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        Self::new(iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }
}

/// Parse a context map written either as JSON or in single-quoted literal
/// style. Duplicate keys keep the last value.
pub fn parse_context_literal(text: &str) -> Result<GeneratorContext, ContextSyntaxError> {
    if let Ok(json) = serde_json::from_str::<Value>(text) {
        return match ContextValue::from_json(&json) {
            Ok(ContextValue::Map(entries)) => Ok(GeneratorContext::new(entries)),
            Ok(_) => Err(ContextSyntaxError::new(first_non_ws(text), "context must be a map")),
            Err(message) => Err(ContextSyntaxError::new(0, message)),
        };
    }

    let mut parser = LiteralParser { text, pos: 0 };
    parser.skip_ws();
    let start = parser.pos;
    let value = parser.value()?;
    parser.skip_ws();
    if parser.pos != text.len() {
        return Err(ContextSyntaxError::new(parser.pos, "unexpected trailing input"));
    }
    match value {
        ContextValue::Map(entries) => Ok(GeneratorContext::new(entries)),
        _ => Err(ContextSyntaxError::new(start, "context must be a map")),
    }
}

fn first_non_ws(text: &str) -> usize {
    text.len() - text.trim_start().len()
}

struct LiteralParser<'a> {
    text: &'a str,
    pos: usize,
}

impl LiteralParser<'_> {
    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t' | '\n' | '\r')) {
            self.pos += 1;
        }
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ContextSyntaxError> {
        Err(ContextSyntaxError::new(self.pos, message))
    }

    fn expect(&mut self, want: char) -> Result<(), ContextSyntaxError> {
        match self.peek() {
            Some(c) if c == want => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => self.error(format!("expected '{want}', found '{c}'")),
            None => self.error(format!("expected '{want}', found end of input")),
        }
    }

    fn value(&mut self) -> Result<ContextValue, ContextSyntaxError> {
        match self.peek() {
            Some('{') => self.map(),
            Some('[') => self.list(),
            Some('\'' | '"') => self.string().map(ContextValue::Text),
            Some(c) if c == '-' || c.is_ascii_digit() => self.integer(),
            Some(c) => self.error(format!("expected a value, found '{c}'")),
            None => self.error("expected a value, found end of input"),
        }
    }

    fn map(&mut self) -> Result<ContextValue, ContextSyntaxError> {
        self.expect('{')?;
        let mut entries = BTreeMap::new();
        loop {
            self.skip_ws();
            if self.peek() == Some('}') {
                self.pos += 1;
                return Ok(ContextValue::Map(entries));
            }
            if !matches!(self.peek(), Some('\'' | '"')) {
                return self.error("expected a quoted key");
            }
            let key = self.string()?;
            self.skip_ws();
            self.expect(':')?;
            self.skip_ws();
            let value = self.value()?;
            entries.insert(key, value);
            self.skip_ws();
            match self.peek() {
                Some(',') => self.pos += 1,
                Some('}') => {}
                _ => return self.error("expected ',' or '}'"),
            }
        }
    }

    fn list(&mut self) -> Result<ContextValue, ContextSyntaxError> {
        self.expect('[')?;
        let mut items = Vec::new();
        loop {
            self.skip_ws();
            if self.peek() == Some(']') {
                self.pos += 1;
                return Ok(ContextValue::List(items));
            }
            items.push(self.value()?);
            self.skip_ws();
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(']') => {}
                _ => return self.error("expected ',' or ']'"),
            }
        }
    }

    fn string(&mut self) -> Result<String, ContextSyntaxError> {
        let quote = self.bump().expect("caller checked quote");
        let mut out = String::new();
        loop {
            let at = self.pos;
            match self.bump() {
                None => return Err(ContextSyntaxError::new(at, "unterminated string")),
                Some(c) if c == quote => return Ok(out),
                Some('\\') => out.push(self.escape()?),
                Some(c) => out.push(c),
            }
        }
    }

    fn escape(&mut self) -> Result<char, ContextSyntaxError> {
        let at = self.pos;
        Ok(match self.bump() {
            Some('\\') => '\\',
            Some('\'') => '\'',
            Some('"') => '"',
            Some('/') => '/',
            Some('n') => '\n',
            Some('r') => '\r',
            Some('t') => '\t',
            Some('b') => '\u{8}',
            Some('f') => '\u{c}',
            Some('u') => {
                let high = self.hex4()?;
                if (0xD800..0xDC00).contains(&high) {
                    if !self.text[self.pos..].starts_with("\\u") {
                        return Err(ContextSyntaxError::new(at, "unpaired surrogate escape"));
                    }
                    self.pos += 2;
                    let low = self.hex4()?;
                    if !(0xDC00..0xE000).contains(&low) {
                        return Err(ContextSyntaxError::new(at, "invalid surrogate pair"));
                    }
                    let code = 0x10000 + ((high - 0xD800) << 10) + (low - 0xDC00);
                    char::from_u32(code).ok_or_else(|| ContextSyntaxError::new(at, "invalid escape"))?
                } else {
                    char::from_u32(high).ok_or_else(|| ContextSyntaxError::new(at, "invalid escape"))?
                }
            }
            Some(c) => return Err(ContextSyntaxError::new(at, format!("unknown escape '\\{c}'"))),
            None => return Err(ContextSyntaxError::new(at, "unterminated escape")),
        })
    }

    fn hex4(&mut self) -> Result<u32, ContextSyntaxError> {
        let digits = self.text.get(self.pos..self.pos + 4);
        match digits.and_then(|d| u32::from_str_radix(d, 16).ok()) {
            Some(v) if digits.is_some_and(|d| d.bytes().all(|b| b.is_ascii_hexdigit())) => {
                self.pos += 4;
                Ok(v)
            }
            _ => self.error("expected four hex digits"),
        }
    }

    fn integer(&mut self) -> Result<ContextValue, ContextSyntaxError> {
        let start = self.pos;
        if self.peek() == Some('-') {
            self.pos += 1;
        }
        let digits_start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == digits_start {
            return self.error("expected digits");
        }
        if matches!(self.peek(), Some('.' | 'e' | 'E')) {
            return self.error("only integers are supported");
        }
        self.text[start..self.pos]
            .parse::<i64>()
            .map(ContextValue::Integer)
            .map_err(|_| ContextSyntaxError::new(start, "integer out of range"))
    }
}
