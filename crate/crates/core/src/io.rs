//! Text and image formats for far-field data, indicator grids and fields.
//!
//! All floats are written with Rust's shortest round-trip `Display`, so
//! reading a file back reproduces every value bit for bit.
//!
//! Far-field CSV:
//!
//! ```text
//! channel,omega,lambda,mu,n_dir,delta,seed
//! ff,8,2,1,64,0.01,7
//! row,col,k,j,re,im
//! p,p,0,0,-0.0123,0.456
//! ...
//! ```
//!
//! `k` is the observation and `j` the incidence direction index. The `row`/`col`
//! component tags only appear for the `ff` channel.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::farfield::{Channel, DirectionGrid, FarFieldMatrix};
use crate::greens::{CVector, ElasticMedium, Point};
use crate::imaging::IndicatorGrid;
use crate::linalg::CMatrix;
use crate::{Error, Result};

const FARFIELD_HEADER: &str = "channel,omega,lambda,mu,n_dir,delta,seed";

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn field<T: std::str::FromStr>(line: usize, name: &str, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| parse_err(line, format!("cannot parse {name} from {s:?}")))
}

fn tag(kind: usize) -> &'static str {
    if kind == 0 {
        "p"
    } else {
        "s"
    }
}

pub fn write_farfield<W: Write>(m: &FarFieldMatrix, mut out: W) -> Result<()> {
    m.validate()?;
    let n = m.grid.len();
    let med = &m.medium;
    let mut s = String::new();
    writeln!(s, "{FARFIELD_HEADER}").unwrap();
    writeln!(
        s,
        "{},{},{},{},{},{},{}",
        m.channel, med.omega, med.lambda, med.mu, n, m.delta, m.seed
    )
    .unwrap();
    let ff = m.channel == Channel::Ff;
    writeln!(s, "{}", if ff { "row,col,k,j,re,im" } else { "k,j,re,im" }).unwrap();
    for r in 0..m.data.nrows() {
        for c in 0..m.data.ncols() {
            let z = m.data[(r, c)];
            if ff {
                writeln!(s, "{},{},{},{},{},{}", tag(r / n), tag(c / n), r % n, c % n, z.re, z.im).unwrap();
            } else {
                writeln!(s, "{r},{c},{},{}", z.re, z.im).unwrap();
            }
        }
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

pub fn read_farfield<R: BufRead>(input: R) -> Result<FarFieldMatrix> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((no, l)) => Ok((no, l?)),
            None => Err(parse_err(0, format!("unexpected end of file, expected {what}"))),
        }
    };
    let (no, header) = next("header")?;
    if header.trim() != FARFIELD_HEADER {
        return Err(parse_err(no, format!("expected header {FARFIELD_HEADER:?}")));
    }
    let (no, meta) = next("parameter line")?;
    let parts: Vec<&str> = meta.split(',').collect();
    if parts.len() != 7 {
        return Err(parse_err(no, format!("expected 7 parameters, got {}", parts.len())));
    }
    let channel: Channel = parts[0]
        .trim()
        .parse()
        .map_err(|e: Error| parse_err(no, e.to_string()))?;
    let omega: f64 = field(no, "omega", parts[1])?;
    let lambda: f64 = field(no, "lambda", parts[2])?;
    let mu: f64 = field(no, "mu", parts[3])?;
    let n_dir: usize = field(no, "n_dir", parts[4])?;
    let delta: f64 = field(no, "delta", parts[5])?;
    let seed: u64 = field(no, "seed", parts[6])?;
    let medium = ElasticMedium::new(lambda, mu, omega).map_err(|e| parse_err(no, e.to_string()))?;
    let grid = DirectionGrid::new(n_dir).map_err(|e| parse_err(no, e.to_string()))?;

    let ff = channel == Channel::Ff;
    let (no, cols) = next("column header")?;
    let expect = if ff { "row,col,k,j,re,im" } else { "k,j,re,im" };
    if cols.trim() != expect {
        return Err(parse_err(no, format!("expected column header {expect:?}")));
    }
    let size = if ff { 2 * n_dir } else { n_dir };
    let mut data = CMatrix::zeros(size, size);
    let mut seen = vec![false; size * size];
    let offset = |no: usize, t: &str| match t.trim() {
        "p" => Ok(0),
        "s" => Ok(n_dir),
        other => Err(parse_err(no, format!("component tag must be p or s, got {other:?}"))),
    };
    let mut count = 0;
    for (no, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let p: Vec<&str> = line.split(',').collect();
        let width = if ff { 6 } else { 4 };
        if p.len() != width {
            return Err(parse_err(no, format!("expected {width} fields, got {}", p.len())));
        }
        let (ro, co, rest) = if ff {
            (offset(no, p[0])?, offset(no, p[1])?, &p[2..])
        } else {
            (0, 0, &p[..])
        };
        let k: usize = field(no, "k", rest[0])?;
        let j: usize = field(no, "j", rest[1])?;
        if k >= n_dir || j >= n_dir {
            return Err(parse_err(
                no,
                format!("direction index out of range for n_dir = {n_dir}"),
            ));
        }
        let re: f64 = field(no, "re", rest[2])?;
        let im: f64 = field(no, "im", rest[3])?;
        let (r, c) = (ro + k, co + j);
        if std::mem::replace(&mut seen[r * size + c], true) {
            return Err(parse_err(no, format!("duplicate entry ({r}, {c})")));
        }
        data[(r, c)] = Complex64::new(re, im);
        count += 1;
    }
    if count != size * size {
        return Err(parse_err(0, format!("expected {} entries, found {count}", size * size)));
    }
    let m = FarFieldMatrix {
        channel,
        medium,
        grid,
        delta,
        seed,
        data,
    };
    m.validate()?;
    Ok(m)
}

/// `x,y,W` rows in grid order (row `j` by row).
pub fn write_indicator_csv<W: Write>(grid: &IndicatorGrid, mut out: W) -> Result<()> {
    let mut s = String::from("x,y,W\n");
    let s_ = &grid.spec;
    for j in 0..s_.ny() {
        for i in 0..s_.nx() {
            writeln!(s, "{},{},{}", s_.x(i), s_.y(j), grid.get(i, j)).unwrap();
        }
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

/// Reads back `(x, y, W)` triples.
pub fn read_indicator_csv<R: BufRead>(input: R) -> Result<Vec<(f64, f64, f64)>> {
    let mut rows = vec![];
    for (i, line) in input.lines().enumerate() {
        let (no, line) = (i + 1, line?);
        if no == 1 {
            if line.trim() != "x,y,W" {
                return Err(parse_err(no, "expected header \"x,y,W\""));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let p: Vec<&str> = line.split(',').collect();
        if p.len() != 3 {
            return Err(parse_err(no, format!("expected 3 fields, got {}", p.len())));
        }
        rows.push((field(no, "x", p[0])?, field(no, "y", p[1])?, field(no, "W", p[2])?));
    }
    Ok(rows)
}

/// Binary 16-bit PGM, min-max normalized. The first image row is the largest `y`
/// so the picture has the usual orientation. Returns `(min, max)` used for scaling.
pub fn write_indicator_pgm<W: Write>(grid: &IndicatorGrid, mut out: W) -> Result<(f64, f64)> {
    let (nx, ny) = (grid.spec.nx(), grid.spec.ny());
    let (lo, hi) = (grid.min(), grid.max());
    let span = hi - lo;
    let mut buf = format!("P5\n{nx} {ny}\n65535\n").into_bytes();
    buf.reserve(2 * nx * ny);
    for j in (0..ny).rev() {
        for i in 0..nx {
            let t = if span > 0.0 { (grid.get(i, j) - lo) / span } else { 0.0 };
            let v = (t * 65535.0).round().clamp(0.0, 65535.0) as u16;
            buf.extend_from_slice(&v.to_be_bytes());
        }
    }
    out.write_all(&buf)?;
    Ok((lo, hi))
}

/// Sidecar text recording the PGM normalization.
pub fn pgm_sidecar(lo: f64, hi: f64) -> String {
    format!("w_min = {lo}\nw_max = {hi}\n")
}

/// Width, height and samples of a 16-bit binary PGM.
pub fn read_pgm16(bytes: &[u8]) -> Result<(usize, usize, Vec<u16>)> {
    let mut tokens = Vec::new();
    let mut pos = 0;
    while tokens.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(parse_err(1, "truncated PGM header"));
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    pos += 1;
    if tokens[0] != "P5" || tokens[3] != "65535" {
        return Err(parse_err(1, "not a 16-bit P5 image"));
    }
    let w: usize = field(2, "width", &tokens[1])?;
    let h: usize = field(2, "height", &tokens[2])?;
    let body = bytes.get(pos..).unwrap_or(&[]);
    if body.len() != 2 * w * h {
        return Err(parse_err(
            3,
            format!("expected {} data bytes, got {}", 2 * w * h, body.len()),
        ));
    }
    Ok((w, h, body.chunks(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()))
}

/// One evaluation of a total field; `value` carries a per-point error message.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRow {
    pub x: Point<2>,
    pub value: std::result::Result<CVector<2>, String>,
}

const FIELD_HEADER: &str = "x1,x2,re_u1,im_u1,re_u2,im_u2,error";

/// Failed rows have `NaN` values and the message (commas replaced) in `error`.
pub fn write_field_csv<W: Write>(rows: &[FieldRow], mut out: W) -> Result<()> {
    let mut s = format!("{FIELD_HEADER}\n");
    for r in rows {
        match &r.value {
            Ok(u) => writeln!(
                s,
                "{},{},{},{},{},{},",
                r.x[0], r.x[1], u[0].re, u[0].im, u[1].re, u[1].im
            ),
            Err(e) => writeln!(
                s,
                "{},{},NaN,NaN,NaN,NaN,{}",
                r.x[0],
                r.x[1],
                e.replace([',', '\n'], ";")
            ),
        }
        .unwrap();
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

pub fn read_field_csv<R: BufRead>(input: R) -> Result<Vec<FieldRow>> {
    let mut rows = vec![];
    for (i, line) in input.lines().enumerate() {
        let (no, line) = (i + 1, line?);
        if no == 1 {
            if line.trim() != FIELD_HEADER {
                return Err(parse_err(no, format!("expected header {FIELD_HEADER:?}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let p: Vec<&str> = line.splitn(7, ',').collect();
        if p.len() != 7 {
            return Err(parse_err(no, format!("expected 7 fields, got {}", p.len())));
        }
        let x = Point::<2>::new(field(no, "x1", p[0])?, field(no, "x2", p[1])?);
        let value = if p[6].is_empty() {
            let v: Vec<f64> = p[2..6]
                .iter()
                .map(|s| field(no, "field value", s))
                .collect::<Result<_>>()?;
            Ok(CVector::<2>::new(
                Complex64::new(v[0], v[1]),
                Complex64::new(v[2], v[3]),
            ))
        } else {
            Err(p[6].to_string())
        };
        rows.push(FieldRow { x, value });
    }
    Ok(rows)
}

/// Evaluation points, one `x1,x2` pair per line. Blank lines, `#` comments and
/// a non-numeric first line (header) are skipped.
pub fn read_points<R: BufRead>(input: R) -> Result<Vec<Point<2>>> {
    let mut pts = vec![];
    for (i, line) in input.lines().enumerate() {
        let (no, line) = (i + 1, line?);
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let p: Vec<&str> = t.split(',').collect();
        if p.len() != 2 {
            return Err(parse_err(no, format!("expected 2 coordinates, got {}", p.len())));
        }
        if no == 1 && p[0].trim().parse::<f64>().is_err() {
            continue;
        }
        let x: f64 = field(no, "x1", p[0])?;
        let y: f64 = field(no, "x2", p[1])?;
        if !x.is_finite() || !y.is_finite() {
            return Err(parse_err(no, "coordinates must be finite"));
        }
        pts.push(Point::<2>::new(x, y));
    }
    Ok(pts)
}
