//! Deterministic JSON reports: objects keep sorted keys (BTreeMap), all
//! floats are rendered as `%.12e`, and serialization is byte-stable so
//! reports can be diffed against checked-in baselines.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    Array(Vec<Value>),
    Object(BTreeMap<String, Value>),
}

impl From<bool> for Value {
    fn from(v: bool) -> Value {
        Value::Bool(v)
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Value {
        Value::Int(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Value {
        Value::Int(v as i64)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Value {
        Value::Float(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Value {
        Value::Str(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Value {
        Value::Str(v)
    }
}

impl From<Vec<Value>> for Value {
    fn from(v: Vec<Value>) -> Value {
        Value::Array(v)
    }
}

impl Value {
    /// Object from key/value pairs (keys are sorted on output regardless
    /// of the order given here).
    pub fn object(pairs: Vec<(&str, Value)>) -> Value {
        Value::Object(
            pairs
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
        )
    }

    pub fn floats(xs: &[f64]) -> Value {
        Value::Array(xs.iter().map(|&x| Value::Float(x)).collect())
    }

    pub fn strings<S: AsRef<str>>(xs: &[S]) -> Value {
        Value::Array(xs.iter().map(|x| Value::Str(x.as_ref().to_string())).collect())
    }

    pub fn set(&mut self, key: &str, v: Value) {
        if let Value::Object(map) = self {
            map.insert(key.to_string(), v);
        } else {
            panic!("set on a non-object value");
        }
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        match self {
            Value::Object(map) => map.get(key),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Float(v) => Some(*v),
            Value::Int(v) => Some(*v as f64),
            _ => None,
        }
    }

    /// Pretty serialization: two-space indent, sorted keys, `%.12e` floats,
    /// trailing newline.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        write_value(&mut out, self, 0);
        out.push('\n');
        out
    }
}

/// Fixed-precision scientific float, matching C's `%.12e`
/// (e.g. `-5.000000000000e-01`, `0.000000000000e+00`).
pub fn fmt_float(v: f64) -> String {
    if !v.is_finite() {
        // JSON has no literals for these; encode as strings upstream if
        // ever needed.  Reports only carry finite values.
        return if v.is_nan() {
            "\"nan\"".to_string()
        } else if v > 0.0 {
            "\"inf\"".to_string()
        } else {
            "\"-inf\"".to_string()
        };
    }
    let v = if v == 0.0 { 0.0 } else { v }; // normalize −0.0
    let s = format!("{:.12e}", v);
    let (mantissa, exp) = s.split_once('e').expect("{:e} always contains e");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if exp < 0 {
        format!("{}e-{:02}", mantissa, -exp)
    } else {
        format!("{}e+{:02}", mantissa, exp)
    }
}

fn escape_into(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => {
                out.push_str(&format!("\\u{:04x}", c as u32));
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Int(i) => out.push_str(&i.to_string()),
        Value::Float(f) => out.push_str(&fmt_float(*f)),
        Value::Str(s) => escape_into(out, s),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                out.push_str(&"  ".repeat(indent + 1));
                write_value(out, item, indent + 1);
            }
            out.push('\n');
            out.push_str(&"  ".repeat(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push('{');
            for (i, (k, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                out.push_str(&"  ".repeat(indent + 1));
                escape_into(out, k);
                out.push_str(": ");
                write_value(out, item, indent + 1);
            }
            out.push('\n');
            out.push_str(&"  ".repeat(indent));
            out.push('}');
        }
    }
}
