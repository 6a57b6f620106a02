//! Deterministic serialization: pretty JSON with every float written at
//! 17 significant digits, and CSV files whose first line is a `#`
//! comment carrying the effective configuration.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

use crate::Result;

/// `{:.16e}`: 17 significant digits, round-trips every f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Pretty printer that writes floats in fixed scientific notation.
pub struct FixedFloatFormatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl Default for FixedFloatFormatter<'_> {
    fn default() -> Self {
        Self {
            inner: PrettyFormatter::with_indent(b"  "),
        }
    }
}

impl Formatter for FixedFloatFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

/// Single-line variant, for CSV headers.
struct CompactFixedFormatter;

impl Formatter for CompactFixedFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloatFormatter::default());
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// `{"config": ..., "report": ...}`
pub fn envelope<T: Serialize + ?Sized>(config: &Value, report: &T) -> Result<String> {
    #[derive(Serialize)]
    struct Envelope<'a, T: ?Sized> {
        config: &'a Value,
        report: &'a T,
    }
    to_json_string(&Envelope { config, report })
}

/// First line of every CSV file.
pub fn csv_header_line(config: &Value) -> String {
    let mut buf = b"# ".to_vec();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, CompactFixedFormatter);
    config.serialize(&mut ser).expect("Value serializes");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// Parses the `# {...}` header back into the configuration.
pub fn parse_csv_header(line: &str) -> Option<Value> {
    serde_json::from_str(line.strip_prefix('#')?.trim()).ok()
}

/// Writes one CSV row of floats.
pub fn write_csv_row<W: Write>(w: &mut W, row: &[f64]) -> io::Result<()> {
    let mut first = true;
    for x in row {
        if !first {
            w.write_all(b",")?;
        }
        first = false;
        w.write_all(fmt_f64(*x).as_bytes())?;
    }
    w.write_all(b"\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_round_trip_at_17_digits() {
        for &x in &[0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_is_deterministic_and_valid() {
        let v = json!({"b": [1.5, 2], "a": {"x": 0.1}});
        let s1 = to_json_string(&v).unwrap();
        let s2 = to_json_string(&v).unwrap();
        assert_eq!(s1, s2);
        assert!(s1.contains("1.5000000000000000e0"));
        let back: Value = serde_json::from_str(&s1).unwrap();
        assert_eq!(back["a"]["x"].as_f64(), Some(0.1));
        assert_eq!(back["b"][1].as_i64(), Some(2));
    }

    #[test]
    fn csv_header_round_trips() {
        let cfg = json!({"omega": 0.5, "ic": {"rule": "sign"}});
        let line = csv_header_line(&cfg);
        assert!(line.contains("5.0000000000000000e-1"));
        assert_eq!(line.lines().count(), 1);
        assert_eq!(parse_csv_header(line.trim_end()).unwrap(), cfg);
    }
}
