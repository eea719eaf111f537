//! Plain-text formats.
//!
//! * `T3v1` tensors: header `t3 n1 n2 n3`, then `n1·n2·n3` floats in storage
//!   order (`k` outer, `j` middle, `i` inner).
//! * `M3v1` masks: header `m3 n1 n2 n3 count`, then `count` lines `i j k`
//!   (1-based).
//! * `Q1v1` transforms: header `q n r`, then `n·r` floats column-major.
//!
//! Floats are written with the shortest representation that parses back to
//! the same bits.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::orth::OrthoMatrix;
use crate::tensor3::{Dims, ObservationMask, Tensor3};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Tokens paired with their 1-based line numbers.
fn tokens(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .flat_map(|(n, l)| l.split_whitespace().map(move |t| (n + 1, t)))
}

fn parse_usize(line: usize, tok: Option<(usize, &str)>, what: &str) -> Result<usize> {
    let (l, t) = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    t.parse()
        .map_err(|_| parse_err(l, format!("invalid {what} '{t}'")))
}

fn parse_header<'a>(
    it: &mut impl Iterator<Item = (usize, &'a str)>,
    tag: &str,
) -> Result<()> {
    match it.next() {
        Some((_, t)) if t == tag => Ok(()),
        Some((l, t)) => Err(parse_err(l, format!("expected '{tag}' header, found '{t}'"))),
        None => Err(parse_err(1, "empty input")),
    }
}

fn parse_floats<'a>(
    it: &mut impl Iterator<Item = (usize, &'a str)>,
    count: usize,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    let mut last_line = 1;
    for _ in 0..count {
        let (l, t) = it
            .next()
            .ok_or_else(|| parse_err(last_line, format!("expected {count} values, got {}", out.len())))?;
        last_line = l;
        let v: f64 = t
            .parse()
            .map_err(|_| parse_err(l, format!("invalid number '{t}'")))?;
        if !v.is_finite() {
            return Err(parse_err(l, format!("non-finite value '{t}'")));
        }
        out.push(v);
    }
    if let Some((l, t)) = it.next() {
        return Err(parse_err(l, format!("unexpected trailing token '{t}'")));
    }
    Ok(out)
}

fn dims_line<'a>(it: &mut impl Iterator<Item = (usize, &'a str)>) -> Result<Dims> {
    let n1 = parse_usize(1, it.next(), "n1")?;
    let n2 = parse_usize(1, it.next(), "n2")?;
    let n3 = parse_usize(1, it.next(), "n3")?;
    if n1 == 0 || n2 == 0 || n3 == 0 {
        return Err(parse_err(1, "dimensions must be positive"));
    }
    Ok((n1, n2, n3))
}

pub fn parse_tensor(text: &str) -> Result<Tensor3> {
    let mut it = tokens(text);
    parse_header(&mut it, "t3")?;
    let dims = dims_line(&mut it)?;
    let data = parse_floats(&mut it, dims.0 * dims.1 * dims.2)?;
    Tensor3::from_vec(dims, data)
}

/// One line per slice column (`n1` values).
pub fn format_tensor(t: &Tensor3) -> String {
    let (n1, n2, n3) = t.dims();
    let mut out = format!("t3 {n1} {n2} {n3}\n");
    for col in t.data().chunks(n1) {
        push_row(&mut out, col);
    }
    out
}

pub fn parse_mask(text: &str) -> Result<ObservationMask> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let hl = hl + 1;
    let mut h = header.split_whitespace().map(|t| (hl, t));
    parse_header(&mut h, "m3")?;
    let dims = dims_line(&mut h)?;
    let count = parse_usize(hl, h.next(), "count")?;
    if let Some((_, t)) = h.next() {
        return Err(parse_err(hl, format!("unexpected header token '{t}'")));
    }
    let (n1, n2, n3) = dims;
    let mut seen = vec![false; n1 * n2 * n3];
    let mut indices = Vec::with_capacity(count);
    for (n, line) in lines {
        let l = n + 1;
        if indices.len() == count {
            return Err(parse_err(l, format!("more than {count} index lines")));
        }
        let mut f = line.split_whitespace().map(|t| (l, t));
        let i = parse_usize(l, f.next(), "i")?;
        let j = parse_usize(l, f.next(), "j")?;
        let k = parse_usize(l, f.next(), "k")?;
        if f.next().is_some() {
            return Err(parse_err(l, "expected exactly three indices"));
        }
        if i == 0 || j == 0 || k == 0 || i > n1 || j > n2 || k > n3 {
            return Err(parse_err(
                l,
                format!("index ({i}, {j}, {k}) outside dims ({n1}, {n2}, {n3})"),
            ));
        }
        let off = (i - 1) + (j - 1) * n1 + (k - 1) * n1 * n2;
        if seen[off] {
            return Err(parse_err(l, format!("duplicate index ({i}, {j}, {k})")));
        }
        seen[off] = true;
        indices.push((i, j, k));
    }
    if indices.len() != count {
        return Err(parse_err(
            text.lines().count().max(1),
            format!("header declares {count} indices, found {}", indices.len()),
        ));
    }
    ObservationMask::new(dims, indices)
}

pub fn format_mask(m: &ObservationMask) -> String {
    let (n1, n2, n3) = m.dims();
    let mut out = format!("m3 {n1} {n2} {n3} {}\n", m.len());
    for &(i, j, k) in m.indices() {
        let _ = writeln!(out, "{i} {j} {k}");
    }
    out
}

/// Parses a `Q1v1` transform and checks orthonormality to `tol`.
pub fn parse_q(text: &str, tol: f64) -> Result<OrthoMatrix> {
    let mut it = tokens(text);
    parse_header(&mut it, "q")?;
    let n = parse_usize(1, it.next(), "n")?;
    let r = parse_usize(1, it.next(), "r")?;
    if n == 0 || r == 0 || r > n {
        return Err(parse_err(1, format!("need 1 <= r <= n, got n={n} r={r}")));
    }
    let data = parse_floats(&mut it, n * r)?;
    OrthoMatrix::from_matrix(DMatrix::from_column_slice(n, r, &data), tol)
}

/// One line per column.
pub fn format_q(q: &OrthoMatrix) -> String {
    let mut out = format!("q {} {}\n", q.rows(), q.cols());
    for col in q.as_matrix().as_slice().chunks(q.rows()) {
        push_row(&mut out, col);
    }
    out
}

fn push_row(out: &mut String, vals: &[f64]) {
    for (i, v) in vals.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{v:?}");
    }
    out.push('\n');
}
