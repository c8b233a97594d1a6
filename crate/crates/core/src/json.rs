//! JSON encoding of complex scalars and matrices.
//!
//! A complex scalar is a two-element array `[re, im]`; a matrix is an array
//! of rows, each an array of complex scalars. The empty matrix is `[]`.
//! Decoding errors carry the JSON path of the offending element, e.g.
//! `Z[0][0]`.

use std::io;

use num_complex::Complex64;
use serde_json::ser::{Formatter, Serializer};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::numkit::CMatrix;

pub fn complex_to_value(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn matrix_to_value(m: &CMatrix) -> Value {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Value::Array(Vec::new());
    }
    Value::Array(
        m.row_iter()
            .map(|row| Value::Array(row.iter().map(|&z| complex_to_value(z)).collect()))
            .collect(),
    )
}

fn finite_number(v: &Value, path: &str) -> Result<f64> {
    match v.as_f64() {
        Some(x) if x.is_finite() => Ok(x),
        Some(_) => Err(Error::parse(path, "number is not finite")),
        None => Err(Error::parse(path, "expected a number")),
    }
}

pub fn complex_from_value(v: &Value, path: &str) -> Result<Complex64> {
    match v {
        Value::Array(parts) if parts.len() == 2 => Ok(Complex64::new(
            finite_number(&parts[0], &format!("{path}[0]"))?,
            finite_number(&parts[1], &format!("{path}[1]"))?,
        )),
        _ => Err(Error::parse(path, "expected a complex number [re, im]")),
    }
}

/// Decode a matrix. Returns `None` for the empty encoding `[]` (or `[[]]`),
/// whose shape has to come from context.
pub fn matrix_from_value(v: &Value, path: &str) -> Result<Option<CMatrix>> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::parse(path, "expected an array of rows"))?;
    if rows.is_empty() {
        return Ok(None);
    }
    let mut entries = Vec::new();
    let mut width = None;
    for (i, row) in rows.iter().enumerate() {
        let row_path = format!("{path}[{i}]");
        let cells = row
            .as_array()
            .ok_or_else(|| Error::parse(&row_path, "expected a row array"))?;
        match width {
            None => width = Some(cells.len()),
            Some(w) if w != cells.len() => {
                return Err(Error::parse(
                    &row_path,
                    format!("row has {} entries, expected {w}", cells.len()),
                ))
            }
            _ => {}
        }
        for (j, cell) in cells.iter().enumerate() {
            entries.push(complex_from_value(cell, &format!("{row_path}[{j}]"))?);
        }
    }
    let cols = width.unwrap_or(0);
    if cols == 0 {
        return Ok(None);
    }
    Ok(Some(CMatrix::from_row_iterator(rows.len(), cols, entries)))
}

/// Decode a matrix whose shape is known in advance; empty encodings are
/// accepted when either expected dimension is zero.
pub fn matrix_with_shape(v: &Value, path: &str, rows: usize, cols: usize) -> Result<CMatrix> {
    match matrix_from_value(v, path)? {
        None if rows == 0 || cols == 0 => Ok(CMatrix::zeros(rows, cols)),
        None => Err(Error::parse(path, format!("expected a {rows}x{cols} matrix, got []"))),
        Some(m) if m.shape() == (rows, cols) => Ok(m),
        Some(m) => Err(Error::parse(
            path,
            format!("expected a {rows}x{cols} matrix, got {}x{}", m.nrows(), m.ncols()),
        )),
    }
}

pub fn field<'a>(obj: &'a Value, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::parse(join(path, key), "missing field"))
}

pub fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

/// Formatter printing every float with 17 significant digits.
struct SeventeenDigits {
    indent: usize,
    has_value: bool,
}

impl SeventeenDigits {
    fn newline<W: ?Sized + io::Write>(&self, w: &mut W) -> io::Result<()> {
        w.write_all(b"\n")?;
        for _ in 0..self.indent {
            w.write_all(b"  ")?;
        }
        Ok(())
    }
}

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value == 0.0 {
            // keep the sign of negative zero
            return w.write_all(if value.is_sign_negative() { b"-0.0" } else { b"0.0" });
        }
        write!(w, "{value:.16e}")
    }

    // Pretty layout, except that arrays of scalars stay on one line.
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.indent += 1;
        self.has_value = false;
        w.write_all(b"[")
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.indent -= 1;
        self.has_value = true;
        w.write_all(b"]")
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        if first {
            Ok(())
        } else {
            w.write_all(b", ")
        }
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.indent += 1;
        self.has_value = false;
        w.write_all(b"{")
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.indent -= 1;
        if self.has_value {
            self.newline(w)?;
        }
        self.has_value = true;
        w.write_all(b"}")
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        if !first {
            w.write_all(b",")?;
        }
        self.newline(w)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        w.write_all(b": ")
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, _w: &mut W) -> io::Result<()> {
        self.has_value = true;
        Ok(())
    }
}

/// Serialize with 17 significant digits per float.
pub fn to_string(value: &Value) -> String {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(
        &mut out,
        SeventeenDigits {
            indent: 0,
            has_value: false,
        },
    );
    serde::Serialize::serialize(value, &mut ser).expect("writing JSON to memory cannot fail");
    String::from_utf8(out).expect("serde_json emits UTF-8")
}
