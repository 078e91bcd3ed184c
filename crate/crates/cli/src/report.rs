use serde_json::{Map, Value};

/// Significant digits kept for every floating-point number in a report.
pub const SIGNIFICANT: usize = 10;

pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{:.*e}", SIGNIFICANT - 1, v).parse().unwrap_or(v)
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|f| serde_json::Number::from_f64(round_sig(f)))
            .map(Value::Number)
            .unwrap_or(Value::Null),
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

/// JSON document written by every subcommand. Keys are emitted in insertion
/// order, so two runs with the same inputs give the same bytes.
pub struct Report {
    fields: Map<String, Value>,
}

impl Report {
    pub fn new(command: &str, args: &[String]) -> Self {
        let mut fields = Map::new();
        fields.insert("command".into(), Value::from(command));
        fields.insert("args".into(), Value::from(args.to_vec()));
        Report { fields }
    }

    pub fn set(mut self, key: &str, value: impl serde::Serialize) -> Self {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.fields.insert(key.into(), v);
        self
    }

    pub fn render(self) -> String {
        let v = round_value(Value::Object(self.fields));
        let mut s = serde_json::to_string_pretty(&v).expect("report serializes");
        s.push('\n');
        s
    }
}
