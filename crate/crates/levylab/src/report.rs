//! Report serialization. Every float is written with 17 significant digits
//! ({:.16e}), enough to round-trip f64 exactly, so reports produced under
//! different thread counts can be compared byte for byte.

use crate::error::Result;
use serde::Serialize;
use std::io::{self, Write as IoWrite};
use std::path::Path;

/// Full-precision float string; round-trips f64 bit-exactly.
pub fn fmt_full(v: f64) -> String {
    format!("{v:.16e}")
}

struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + IoWrite>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FullPrecision);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json emits utf-8"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json(value)? + "\n")?;
    Ok(())
}

/// One-column CSV with a header line.
pub fn write_column_csv(path: &Path, header: &str, values: &[f64]) -> Result<()> {
    let mut s = String::with_capacity(values.len() * 26 + header.len() + 1);
    s.push_str(header);
    s.push('\n');
    for v in values {
        s.push_str(&fmt_full(*v));
        s.push('\n');
    }
    std::fs::write(path, s)?;
    Ok(())
}

/// Multi-column CSV; every row must match the header width.
pub fn write_csv(path: &Path, headers: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut s = String::new();
    s.push_str(&headers.join(","));
    s.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), headers.len());
        let cells: Vec<String> = row.iter().map(|v| fmt_full(*v)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    std::fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Demo {
        a: f64,
        xs: Vec<f64>,
        label: String,
    }

    #[test]
    fn floats_round_trip_exactly() {
        let vals = [
            std::f64::consts::PI,
            0.1,
            4.0 / 3.0 * 1e300,
            4.0 / 3.0 * 1e-300,
            1.0,
            -0.0,
            1.2930165132208758,
        ];
        for v in vals {
            let back: f64 = fmt_full(v).parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{v}");
        }
    }

    #[test]
    fn json_uses_full_precision() {
        let d = Demo {
            a: 0.1,
            xs: vec![1.0, std::f64::consts::SQRT_2],
            label: "x".into(),
        };
        let s = to_json(&d).unwrap();
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        let parsed: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(
            parsed["xs"][1].as_f64().unwrap().to_bits(),
            std::f64::consts::SQRT_2.to_bits()
        );
    }

    #[test]
    fn csv_shape() {
        let dir = std::env::temp_dir().join("levylab_report_test");
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("col.csv");
        write_column_csv(&p, "z", &[1.0, 2.5]).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "z");
        assert_eq!(lines[1].parse::<f64>().unwrap(), 1.0);
        std::fs::remove_dir_all(&dir).ok();
    }
}
