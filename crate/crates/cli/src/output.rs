//! Serialization: JSON with 17 significant digits per float, CSV scan tables,
//! and timing-field stripping for reproducibility comparisons.

use std::io::{self, Write};

use ckn_core::spectral::ScanRow;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_value::Value;

use crate::error::{CliError, CliResult};

/// Top-level key holding wall times; everything else is deterministic.
pub const TIMINGS_KEY: &str = "timings";

/// Shortest-free float text with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Pretty JSON formatter that writes every float with 17 significant digits.
struct Sig17<'a>(PrettyFormatter<'a>);

impl Formatter for Sig17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(format_f64(v).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// First non-finite float in a serialized tree. serde_json would print it as
/// `null`, indistinguishable from an absent value.
fn non_finite(v: &Value) -> Option<f64> {
    match v {
        Value::F32(x) if !x.is_finite() => Some(*x as f64),
        Value::F64(x) if !x.is_finite() => Some(*x),
        Value::Option(Some(x)) | Value::Newtype(x) => non_finite(x),
        Value::Seq(xs) => xs.iter().find_map(non_finite),
        Value::Map(m) => m
            .iter()
            .find_map(|(k, x)| non_finite(k).or_else(|| non_finite(x))),
        _ => None,
    }
}

/// Pretty JSON with 17-digit floats. Non-finite values are an error.
pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let tree = serde_value::to_value(value).map_err(|e| CliError::Output(e.to_string()))?;
    if let Some(x) = non_finite(&tree) {
        return Err(CliError::Output(format!("non-finite value {x} in report")));
    }
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| CliError::Output(e.to_string()))
}

/// Removes the top-level timing object from a JSON document and reprints it
/// in the same format.
pub fn strip_timings(json: &str) -> CliResult<String> {
    let mut v: serde_json::Value = serde_json::from_str(json)?;
    if let Some(map) = v.as_object_mut() {
        map.remove(TIMINGS_KEY);
    }
    to_json(&v)
}

pub const SCAN_COLUMNS: [&str; 10] = [
    "a",
    "b",
    "alpha_sq",
    "fs_bound",
    "regime",
    "lambda_theta_1",
    "quotient",
    "threshold",
    "verdict",
    "agree",
];

fn opt_f64(v: Option<f64>) -> String {
    v.map(format_f64).unwrap_or_default()
}

/// Scan table in grid order. Skipped rows leave the numeric columns empty and
/// carry the reason in the verdict column.
pub fn scan_csv(rows: &[ScanRow]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SCAN_COLUMNS)?;
    for r in rows {
        let verdict = match (&r.verdict, &r.skipped) {
            (Some(v), _) => v.as_str().to_string(),
            (None, Some(reason)) => format!("skipped: {reason}"),
            (None, None) => String::new(),
        };
        w.write_record([
            format_f64(r.a),
            format_f64(r.b),
            opt_f64(r.alpha_sq),
            opt_f64(r.fs_bound),
            r.regime.map(|g| g.as_str().to_string()).unwrap_or_default(),
            opt_f64(r.lambda_theta_1),
            opt_f64(r.quotient),
            opt_f64(r.threshold),
            verdict,
            r.agree.map(|a| a.to_string()).unwrap_or_default(),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Sample {
        x: f64,
        n: u32,
        v: Vec<f64>,
    }

    #[test]
    fn floats_round_trip_with_seventeen_digits() {
        for v in [0.1, 1.0 / 3.0, std::f64::consts::PI, 1e-300, -2.5e17, 0.0] {
            let s = format_f64(v);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn json_uses_the_fixed_float_format() {
        let s = to_json(&Sample {
            x: 0.1,
            n: 3,
            v: vec![2.0],
        })
        .unwrap();
        assert!(s.contains("\"x\": 1.0000000000000001e-1"), "{s}");
        assert!(s.contains("\"n\": 3"));
        assert!(s.contains("2.0000000000000000e0"));
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
    }

    #[test]
    fn non_finite_values_are_rejected() {
        assert!(to_json(&Sample {
            x: f64::NAN,
            n: 0,
            v: vec![]
        })
        .is_err());
        assert!(to_json(&Sample {
            x: 0.0,
            n: 0,
            v: vec![f64::INFINITY]
        })
        .is_err());
    }

    #[test]
    fn stripping_removes_only_the_timing_object() {
        let s = r#"{"a": 1.5, "timings": {"total": 3.0}, "b": {"timings": 1}}"#;
        let out = strip_timings(s).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(v.get("timings").is_none());
        assert_eq!(v["b"]["timings"], 1);
        assert_eq!(v["a"].as_f64(), Some(1.5));
    }
}
