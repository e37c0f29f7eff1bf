//! Output encoding. Floating-point numbers are written with 17 significant
//! digits so files round-trip doubles exactly and stay byte-stable.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{CliError, Result};

pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Pretty JSON with fixed-precision floats.
struct ReportFormatter(PrettyFormatter<'static>);

impl Formatter for ReportFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut out, ReportFormatter(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Serialize(e.to_string()))?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| CliError::Serialize(e.to_string()))
}

/// One-line JSON with fixed-precision floats, for CSV comment headers.
pub fn to_json_line<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, CompactFloats);
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Serialize(e.to_string()))?;
    String::from_utf8(out).map_err(|e| CliError::Serialize(e.to_string()))
}

struct CompactFloats;

impl Formatter for CompactFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }
}

/// CSV text with the configuration as a leading `#` comment line.
pub fn csv_with_config<T: Serialize>(
    config: &T,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<String> {
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    writer
        .write_record(header)
        .map_err(|e| CliError::Serialize(e.to_string()))?;
    for row in rows {
        writer
            .write_record(row)
            .map_err(|e| CliError::Serialize(e.to_string()))?;
    }
    let body = writer
        .into_inner()
        .map_err(|e| CliError::Serialize(e.to_string()))?;
    let body = String::from_utf8(body).map_err(|e| CliError::Serialize(e.to_string()))?;
    Ok(format!("# {}\n{body}", to_json_line(config)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Sample {
        x: f64,
        n: usize,
        v: Vec<f64>,
        missing: Option<f64>,
    }

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 123456.789, 0.0] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            assert_eq!(
                s.split('e').next().unwrap().trim_start_matches('-').len(),
                18
            );
        }
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn json_layout() {
        let s = Sample {
            x: 0.25,
            n: 3,
            v: vec![1.0],
            missing: None,
        };
        let json = to_json(&s).unwrap();
        assert!(json.contains("\"x\": 2.5000000000000000e-1"));
        assert!(json.contains("\"n\": 3"));
        assert!(json.ends_with("}\n"));
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["v"][0], 1.0);
        assert!(parsed["missing"].is_null());
        assert!(!to_json_line(&s).unwrap().contains('\n'));
    }

    #[test]
    fn csv_layout() {
        let text = csv_with_config(&[1u8], &["a", "b"], &[vec!["x".into(), "1".into()]]).unwrap();
        assert_eq!(text, "# [1]\na,b\nx,1\n");
    }
}
