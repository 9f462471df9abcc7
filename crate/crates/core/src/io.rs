//! The `mdm 1` text format.
//!
//! ```text
//! mdm 1
//! d=<d> n=<n>
//! <n^d whitespace-separated entries, row-major, last axis fastest>
//! ```
//!
//! Entries are non-negative decimals (`1`, `0`, `0.25`); no signs or exponents.
//! [`write_matrix`] emits one last-axis row per line with a blank line between
//! consecutive 2-dimensional blocks. Numbers are printed in shortest
//! round-trip form, so `parse_matrix(&write_matrix(a)) == a` bit for bit.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::tensor::{checked_volume, MultiMatrix};

const MAGIC: &str = "mdm 1";

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn is_decimal(tok: &str) -> bool {
    let (int, frac) = match tok.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (tok, None),
    };
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    digits(int) && frac.is_none_or(digits)
}

/// Whitespace-separated tokens with 1-based line and column.
fn tokens(text: &str) -> impl Iterator<Item = (usize, usize, &str)> {
    text.lines().enumerate().flat_map(|(li, line)| {
        let mut out = Vec::new();
        let mut start = None;
        for (ci, ch) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
            match (ch.is_whitespace(), start) {
                (false, None) => start = Some(ci),
                (true, Some(s)) => {
                    out.push((li + 1, s + 1, &line[s..ci]));
                    start = None;
                }
                _ => {}
            }
        }
        out
    })
}

fn parse_shape_field(line: usize, column: usize, tok: &str, key: &str) -> Result<usize> {
    let value = tok
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| parse_err(line, column, format!("expected `{key}=<integer>`, found {tok:?}")))?;
    value.parse::<usize>().ok().filter(|&v| v >= 1).ok_or_else(|| {
        parse_err(
            line,
            column,
            format!("`{key}` must be a positive integer, found {value:?}"),
        )
    })
}

pub fn parse_matrix(text: &str) -> Result<MultiMatrix> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header.trim() != MAGIC {
        return Err(parse_err(
            1,
            1,
            format!("expected header `{MAGIC}`, found {:?}", header.trim()),
        ));
    }
    let shape_line = lines
        .next()
        .ok_or_else(|| parse_err(2, 1, "missing `d=<d> n=<n>` line"))?;
    let shape: Vec<(usize, usize, &str)> = tokens(shape_line).map(|(_, c, t)| (2, c, t)).collect();
    if shape.len() != 2 {
        return Err(parse_err(
            2,
            1,
            format!("expected `d=<d> n=<n>`, found {:?}", shape_line.trim()),
        ));
    }
    let d = parse_shape_field(shape[0].0, shape[0].1, shape[0].2, "d")?;
    let n = parse_shape_field(shape[1].0, shape[1].1, shape[1].2, "n")?;
    let expected = checked_volume(d, n).map_err(|e| parse_err(2, 1, e.to_string()))?;

    let body_offset = 2;
    let body: String = text.lines().skip(2).collect::<Vec<_>>().join("\n");
    let mut entries = Vec::with_capacity(expected);
    let mut last_line = body_offset;
    for (li, col, tok) in tokens(&body) {
        let line = li + body_offset;
        last_line = line;
        if entries.len() == expected {
            let got = expected + tokens(&body).count() - entries.len();
            return Err(parse_err(line, col, format!("expected {expected} entries, got {got}")));
        }
        if !is_decimal(tok) {
            return Err(parse_err(
                line,
                col,
                format!("invalid entry {tok:?}: expected a decimal number"),
            ));
        }
        let value: f64 = tok
            .parse()
            .map_err(|_| parse_err(line, col, format!("invalid entry {tok:?}")))?;
        if value > 1.0 {
            return Err(parse_err(
                line,
                col,
                format!("entry {tok} is outside [0,1]: entries must satisfy 0 <= e <= 1"),
            ));
        }
        entries.push(value);
    }
    if entries.len() != expected {
        return Err(parse_err(
            last_line + 1,
            1,
            format!("expected {expected} entries, got {}", entries.len()),
        ));
    }
    MultiMatrix::from_entries(d, n, entries).map_err(|e| parse_err(3, 1, e.to_string()))
}

pub fn write_matrix(a: &MultiMatrix) -> String {
    let n = a.order();
    let mut out = format!("{MAGIC}\nd={} n={}\n", a.dim(), n);
    let block = if a.dim() >= 2 { n * n } else { n };
    for (r, row) in a.entries().chunks(n).enumerate() {
        if r > 0 && (r * n).is_multiple_of(block) {
            out.push('\n');
        }
        for (j, e) in row.iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            write!(out, "{e}").expect("writing to a String");
        }
        out.push('\n');
    }
    out
}
