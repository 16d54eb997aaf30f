use std::fmt::Write as _;

use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Command output: a JSON document or a numeric table.
pub enum Output {
    Doc(Value),
    Table { header: Vec<String>, rows: Vec<Vec<f64>> },
}

/// `%.15g`: 15 significant digits, trailing zeros trimmed.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.14e}", x);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-5..15).contains(&exp) {
        let decimals = (14 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), sign, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&key(k), v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), v, out);
            }
        }
        Value::Number(n) => out.push((prefix.into(), n.as_f64().map(fmt_num).unwrap_or_else(|| n.to_string()))),
        Value::Null => out.push((prefix.into(), String::new())),
        Value::Bool(b) => out.push((prefix.into(), b.to_string())),
        Value::String(s) => out.push((prefix.into(), s.clone())),
    }
}

impl Output {
    pub fn render(&self, format: Format) -> String {
        match (self, format) {
            (Output::Doc(v), Format::Json) => {
                let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
                s.push('\n');
                s
            }
            (Output::Doc(v), Format::Csv) => {
                let mut rows = Vec::new();
                flatten("", v, &mut rows);
                let mut s = String::from("field,value\n");
                for (k, v) in rows {
                    let _ = writeln!(s, "{k},{v}");
                }
                s
            }
            (Output::Table { header, rows }, Format::Csv) => {
                let mut s = header.join(",");
                s.push('\n');
                for row in rows {
                    let cells: Vec<String> = row.iter().map(|&x| fmt_num(x)).collect();
                    s.push_str(&cells.join(","));
                    s.push('\n');
                }
                s
            }
            (Output::Table { header, rows }, Format::Json) => {
                let records: Vec<Value> = rows
                    .iter()
                    .map(|row| {
                        let obj: Map<String, Value> = header
                            .iter()
                            .zip(row)
                            .map(|(h, &x)| (h.clone(), serde_json::json!(x)))
                            .collect();
                        Value::Object(obj)
                    })
                    .collect();
                let mut s = serde_json::to_string_pretty(&records).expect("JSON values serialize");
                s.push('\n');
                s
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifteen_significant_digits() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(0.2), "0.2");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333333");
        assert_eq!(fmt_num(-2.5e-7), "-2.5e-07");
        assert_eq!(fmt_num(123456.0), "123456");
        assert_eq!(fmt_num(1e20), "1e+20");
        assert_eq!(fmt_num(0.025387870239774), "0.025387870239774");
    }

    #[test]
    fn documents_flatten_to_field_rows() {
        let v = serde_json::json!({"a": 1.5, "b": [1, 2], "c": {"d": "x"}});
        let csv = Output::Doc(v).render(Format::Csv);
        assert_eq!(csv, "field,value\na,1.5\nb[0],1\nb[1],2\nc.d,x\n");
    }
}
