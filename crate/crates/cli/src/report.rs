//! Deterministic JSON report emission.
//!
//! Reports are printed by a canonical writer: keys sorted (serde_json's
//! map order), two-space indentation, LF line endings, integers verbatim
//! and every float as a fixed 17-significant-digit scientific literal
//! (which uniquely round-trips any f64). Identical runs therefore produce
//! byte-identical files.

use serde_json::Value;

pub const SCHEMA_VERSION: u64 = 1;

fn write_indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn write_value(value: &Value, out: &mut String, depth: usize) -> Result<(), String> {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_i64() || n.is_u64() {
                out.push_str(&n.to_string());
            } else {
                let f = n.as_f64().ok_or_else(|| format!("bad number {n}"))?;
                if !f.is_finite() {
                    return Err(format!("non-finite number in report: {f}"));
                }
                out.push_str(&format!("{f:.16e}"));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).map_err(|e| e.to_string())?),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
            } else {
                out.push_str("[\n");
                for (i, item) in items.iter().enumerate() {
                    write_indent(out, depth + 1);
                    write_value(item, out, depth + 1)?;
                    out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
                }
                write_indent(out, depth);
                out.push(']');
            }
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
            } else {
                out.push_str("{\n");
                for (i, (k, v)) in map.iter().enumerate() {
                    write_indent(out, depth + 1);
                    out.push_str(&serde_json::to_string(k).map_err(|e| e.to_string())?);
                    out.push_str(": ");
                    write_value(v, out, depth + 1)?;
                    out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
                }
                write_indent(out, depth);
                out.push('}');
            }
        }
    }
    Ok(())
}

/// Render a JSON value with the canonical float formatting.
pub fn canonical_json(value: &Value) -> Result<String, String> {
    let mut out = String::new();
    write_value(value, &mut out, 0)?;
    out.push('\n');
    Ok(out)
}

/// Assemble the report envelope around a command payload.
pub fn envelope(
    command: &str,
    config: &crate::config::RunConfig,
    warnings: &[String],
    payload: serde_json::Map<String, Value>,
) -> Result<String, String> {
    let mut root = serde_json::Map::new();
    root.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    root.insert("command".into(), Value::from(command));
    root.insert(
        "config".into(),
        serde_json::to_value(config.resolved_for_report()).map_err(|e| e.to_string())?,
    );
    root.insert(
        "warnings".into(),
        Value::Array(warnings.iter().map(|w| Value::from(w.as_str())).collect()),
    );
    for (k, v) in payload {
        root.insert(k, v);
    }
    canonical_json(&Value::Object(root))
}

pub fn to_value<T: serde::Serialize>(v: &T) -> Result<Value, String> {
    serde_json::to_value(v).map_err(|e| e.to_string())
}
