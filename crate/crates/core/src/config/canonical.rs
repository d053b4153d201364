use std::fmt::Write;

use serde_json::Value;
use sha2::{Digest, Sha256};

/// Renders a JSON value with sorted keys, no whitespace, and floats printed
/// with 17 significant digits so the text is bit-stable across platforms.
pub fn canonical_json(value: &Value) -> String {
    let mut out = String::new();
    render_canonical(value, &mut out);
    out
}

pub fn render_canonical(value: &Value, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                write!(out, "{u}").unwrap();
            } else if let Some(i) = n.as_i64() {
                write!(out, "{i}").unwrap();
            } else {
                let f = n.as_f64().expect("json number");
                write!(out, "{f:.16e}").unwrap();
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string escapes")),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                render_canonical(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("key escapes"));
                out.push(':');
                render_canonical(&map[k], out);
            }
            out.push('}');
        }
    }
}

pub fn digest_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}
