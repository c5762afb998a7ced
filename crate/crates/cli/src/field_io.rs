//! CSV serialization of sampled fields.
//!
//! One sample per row, full 17-significant-digit columns, header `t,x,re,im`
//! (with a trailing `abs` column for files meant for plotting). The `t`
//! column repeats the field's time stamp so a row is self-describing.

use std::path::Path;

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use tdnls_core::num_fmt::full_precision;
use tdnls_core::{ComplexField, GridSpec};

pub fn write_field(path: &Path, field: &ComplexField, with_abs: bool) -> Result<()> {
    write_field_rows(path, field, None, with_abs)
}

/// Like [`write_field`], but keeps only rows whose mask entry is true.
pub fn write_field_rows(
    path: &Path,
    field: &ComplexField,
    mask: Option<&[bool]>,
    with_abs: bool,
) -> Result<()> {
    let mut text = String::new();
    text.push_str(if with_abs { "t,x,re,im,abs\n" } else { "t,x,re,im\n" });
    let t = full_precision(field.time());
    for (j, (x, u)) in field.grid().points().iter().zip(field.samples()).enumerate() {
        if mask.is_some_and(|m| !m[j]) {
            continue;
        }
        text.push_str(&t);
        text.push(',');
        text.push_str(&full_precision(*x));
        text.push(',');
        text.push_str(&full_precision(u.re));
        text.push(',');
        text.push_str(&full_precision(u.im));
        if with_abs {
            text.push(',');
            text.push_str(&full_precision(u.norm()));
        }
        text.push('\n');
    }
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Reads a field written by [`write_field`]: a single time stamp and a
/// uniform ascending `x` column covering the whole periodic grid.
pub fn read_field(path: &Path) -> Result<ComplexField> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read field file {}", path.display()))?;
    parse_field(&text).with_context(|| format!("invalid field file {}", path.display()))
}

fn parse_field(text: &str) -> Result<ComplexField> {
    let mut lines = text.lines();
    let header = lines.next().map(str::trim).unwrap_or_default();
    let columns = match header {
        "t,x,re,im" => 4,
        "t,x,re,im,abs" => 5,
        other => bail!("unrecognized header {other:?}, expected t,x,re,im"),
    };

    let mut rows: Vec<(f64, f64, Complex64)> = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns {
            bail!("row {}: expected {columns} columns, got {}", idx + 2, fields.len());
        }
        let mut parsed = [0.0f64; 4];
        for (slot, raw) in parsed.iter_mut().zip(&fields) {
            *slot = raw
                .trim()
                .parse()
                .with_context(|| format!("row {}: bad number {raw:?}", idx + 2))?;
        }
        rows.push((parsed[0], parsed[1], Complex64::new(parsed[2], parsed[3])));
    }
    if rows.len() < 2 {
        bail!("need at least two sample rows, got {}", rows.len());
    }

    let t = rows[0].0;
    for (idx, row) in rows.iter().enumerate() {
        if (row.0 - t).abs() > 1e-12 * (1.0 + t.abs()) {
            bail!("row {}: time {} differs from the first row's {}", idx + 2, row.0, t);
        }
    }

    let x0 = rows[0].1;
    let h = rows[1].1 - x0;
    if !(h.is_finite() && h > 0.0) {
        bail!("x column must be strictly increasing");
    }
    for (j, row) in rows.iter().enumerate() {
        let expected = x0 + j as f64 * h;
        if (row.1 - expected).abs() > 1e-9 * (1.0 + expected.abs()) {
            bail!("row {}: x = {} breaks the uniform spacing {h}", j + 2, row.1);
        }
    }

    let n = rows.len();
    let grid = GridSpec::new(x0, x0 + n as f64 * h, n)?;
    let samples = rows.into_iter().map(|r| r.2).collect();
    Ok(ComplexField::new(grid, samples, t)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tdnls_core::analytic::standing_soliton;

    fn sample_field() -> ComplexField {
        let grid = GridSpec::new(-8.0, 8.0, 32).unwrap();
        ComplexField::from_wave(grid, &standing_soliton(0.3), 0.25).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = std::env::temp_dir().join("tdnls_field_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("field.csv");
        let field = sample_field();
        write_field(&path, &field, false).unwrap();
        let back = read_field(&path).unwrap();
        assert_eq!(back.time(), field.time());
        assert_eq!(back.grid(), field.grid());
        assert_eq!(back.samples(), field.samples());
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn abs_column_is_accepted_on_read() {
        let dir = std::env::temp_dir().join("tdnls_field_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("field_abs.csv");
        let field = sample_field();
        write_field(&path, &field, true).unwrap();
        let back = read_field(&path).unwrap();
        assert_eq!(back.samples(), field.samples());
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(parse_field("x,re,im\n").is_err());
        assert!(parse_field("t,x,re,im\n1,0,1,0\n").is_err());
        assert!(parse_field("t,x,re,im\n1,0,1,0\n2,1,1,0\n").is_err());
        assert!(parse_field("t,x,re,im\n1,0,1,0\n1,1,1,0\n1,2.5,1,0\n1,3,1,0\n").is_err());
        assert!(parse_field("t,x,re,im\n1,0,nope,0\n1,1,1,0\n").is_err());
    }
}
