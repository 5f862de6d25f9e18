use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::RunConfig;

pub const SCHEMA: &str = "cycleguess/v1";

/// Rounds to 12 significant digits so output does not depend on the last ulp.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round12(n.as_f64().expect("f64"));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(normalize).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, normalize(v))).collect::<Map<_, _>>()),
        other => other,
    }
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

/// One versioned document per invocation.
pub fn document(command: &str, cfg: &RunConfig, status: &str, result: Value) -> String {
    let doc = json!({
        "schema": SCHEMA,
        "command": command,
        "status": status,
        "config": to_value(cfg),
        "result": result,
    });
    serde_json::to_string_pretty(&normalize(doc)).expect("json")
}

/// 12 significant digits, trailing zeros trimmed.
pub fn fmt_f(x: f64) -> String {
    let r = round12(x) + 0.0;
    if r == r.trunc() && r.abs() < 1e15 {
        return format!("{r:.1}");
    }
    if r.abs() < 1e-4 {
        return format!("{r:e}");
    }
    let s = format!("{r:.12}");
    s.trim_end_matches('0').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round12(0.1 + 0.2), 0.3);
        assert_eq!(fmt_f(1.0), "1.0");
        assert_eq!(fmt_f(0.5), "0.5");
        assert_eq!(fmt_f(181.01933598375618), "181.019335984");
        assert_eq!(fmt_f(2.5e-10), "2.5e-10");
        assert_eq!(fmt_f(-0.0), "0.0");
        assert_eq!(normalize(json!({"x": [0.30000000000000004]})), json!({"x": [0.3]}));
    }
}
