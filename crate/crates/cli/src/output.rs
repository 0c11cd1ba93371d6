//! Canonical wire formats.
//!
//! JSON is written with sorted keys, no whitespace and every float as
//! `%.12e`, so parsing and re-emitting a record is byte-identical. CSV
//! starts with a header line; comment lines start with `#`.

use serde_json::Value;

/// `%.12e` with a signed, at-least-two-digit exponent: `3.500000000000e+02`.
pub fn fmt_float(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

pub fn to_canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, &mut out);
    out
}

fn write_value(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&fmt_float(n.as_f64().unwrap_or(f64::NAN)));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            // serde_json's default map is ordered by key
            out.push('{');
            for (i, (k, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_value(item, out);
            }
            out.push('}');
        }
    }
}

/// A float as a JSON value; non-finite values become `null`.
pub fn float(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

pub fn floats(vs: &[f64]) -> Value {
    Value::Array(vs.iter().map(|&v| float(v)).collect())
}

/// CSV document: header, rows, trailing `#` comments.
#[derive(Debug, Clone, Default)]
pub struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    comments: Vec<String>,
}

impl Csv {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), ..Self::default() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    pub fn comment(&mut self, text: impl Into<String>) {
        self.comments.push(text.into());
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn float_format() {
        assert_eq!(fmt_float(350.0), "3.500000000000e+02");
        assert_eq!(fmt_float(-0.053452248382484875), "-5.345224838248e-02");
        assert_eq!(fmt_float(0.0), "0.000000000000e+00");
        assert_eq!(fmt_float(1.5e-120), "1.500000000000e-120");
    }

    #[test]
    fn canonical_json_round_trips() {
        let v = json!({"z": 1.0, "a": [0, 2.5, -3e-9], "m": {"y": "q\"t", "b": true, "n": null}});
        let s = to_canonical_json(&v);
        assert_eq!(s, r#"{"a":[0,2.500000000000e+00,-3.000000000000e-09],"m":{"b":true,"n":null,"y":"q\"t"},"z":1.000000000000e+00}"#);
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(to_canonical_json(&back), s);
    }

    #[test]
    fn csv_layout() {
        let mut c = Csv::new(["n", "energy"]);
        c.row(vec!["0".into(), fmt_float(5.0)]);
        c.comment("phase=broken");
        assert_eq!(c.render(), "n,energy\n0,5.000000000000e+00\n# phase=broken\n");
    }
}
