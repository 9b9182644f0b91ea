//! JSON emission with fixed float formatting.
//!
//! Every float is written with 17 significant digits in scientific notation,
//! which round-trips exactly through any correctly rounding parser. Object
//! keys come out sorted because `serde_json::Map` is ordered by key.

use std::fmt::Write as _;

use serde_json::Value;

/// 17 significant digits; `null` for non-finite values.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

/// Serializes a value. Objects are indented by two spaces per level, arrays
/// stay on one line unless they hold objects or nested arrays.
pub fn to_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&fmt_f64(n.as_f64().unwrap_or(f64::NAN)));
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            let nested = items.iter().any(|x| matches!(x, Value::Object(_)) || is_deep_array(x));
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                if nested {
                    newline(out, indent + 1);
                }
                write_value(out, item, indent + 1);
            }
            if nested && !items.is_empty() {
                newline(out, indent);
            }
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            for (i, (k, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                newline(out, indent + 1);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, item, indent + 1);
            }
            if !map.is_empty() {
                newline(out, indent);
            }
            out.push('}');
        }
    }
}

fn is_deep_array(v: &Value) -> bool {
    matches!(v, Value::Array(a) if a.iter().any(|x| matches!(x, Value::Array(_) | Value::Object(_))))
}

fn newline(out: &mut String, indent: usize) {
    out.push('\n');
    for _ in 0..indent {
        out.push_str("  ");
    }
}
