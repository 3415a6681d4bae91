//! Output: pretty JSON in machine mode, `key = value` lines otherwise.

use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

/// Six significant decimals, trailing zeros dropped; scientific notation
/// outside `[1e-4, 1e6)`.
pub fn human_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let a = x.abs();
    if (1e-4..1e6).contains(&a) {
        let s = format!("{x:.6}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".into()
        } else {
            s.to_string()
        }
    } else {
        format!("{x:.6e}")
    }
}

fn human_value(v: &Value) -> String {
    match v {
        Value::Null => "none".into(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if !n.is_u64() && !n.is_i64() => human_number(x),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(human_value).collect();
            format!("[{}]", parts.join(", "))
        }
        Value::Object(map) => {
            let parts: Vec<String> = map
                .iter()
                .map(|(k, v)| format!("{k}: {}", human_value(v)))
                .collect();
            format!("{{{}}}", parts.join(", "))
        }
    }
}

fn human_lines(prefix: &str, map: &Map<String, Value>, out: &mut Vec<String>) {
    for (k, v) in map {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Object(inner) => human_lines(&key, inner, out),
            other => out.push(format!("{key} = {}", human_value(other))),
        }
    }
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize to JSON")
}

pub struct Printer {
    pub json: bool,
    pub tol: f64,
}

impl Printer {
    /// Prints a report object; machine mode prepends a `meta` block.
    pub fn report(&self, command: &str, body: Value) -> Result<(), CliError> {
        let Value::Object(fields) = body else {
            unreachable!("reports are JSON objects")
        };
        let mut stdout = std::io::stdout().lock();
        if self.json {
            let mut top = Map::new();
            top.insert(
                "meta".into(),
                serde_json::json!({
                    "command": command,
                    "tol": self.tol,
                    "format_version": crate::input::FORMAT_VERSION,
                }),
            );
            top.extend(fields);
            let text =
                serde_json::to_string_pretty(&Value::Object(top)).expect("JSON values serialize");
            writeln!(stdout, "{text}")?;
        } else {
            let mut lines = Vec::new();
            human_lines("", &fields, &mut lines);
            for line in lines {
                writeln!(stdout, "{line}")?;
            }
        }
        Ok(())
    }

    /// CSV rows with a header, in both modes.
    pub fn csv<T: Serialize>(&self, rows: &[T]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(std::io::stdout().lock());
        for r in rows {
            w.serialize(r).map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_to_six_places() {
        assert_eq!(human_number(1.0 / 3.0), "0.333333");
        assert_eq!(human_number(1.5), "1.5");
        assert_eq!(human_number(2.0), "2");
        assert_eq!(human_number(1e-9), "1.000000e-9");
    }

    #[test]
    fn nested_objects_flatten() {
        let v = serde_json::json!({"a": {"b": 0.25, "c": "inf"}, "d": [1, 2]});
        let Value::Object(m) = v else { unreachable!() };
        let mut out = Vec::new();
        human_lines("", &m, &mut out);
        assert_eq!(out, vec!["a.b = 0.25", "a.c = inf", "d = [1, 2]"]);
    }
}
