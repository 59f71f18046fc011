//! JSON point records and line-oriented data files.
//!
//! A point record is `{"manifold": <tag>, "data": [..], ..shape fields}` where
//! `data` is a flat array: coordinates for sphere and hyperboloid points, angles
//! for torus points, and row-major entries for SPD and Stiefel matrices.
//!
//! A data file starts with one header line `# manifold=<tag> [key=value ..]`
//! followed by one JSON array per line in the same flat layout.

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value};

use super::points::{
    HyperboloidPoint, ManifoldKind, ManifoldPoint, SpdMatrix, StiefelFrame, TorusPoint,
    UnitVector,
};
use crate::error::{Error, Result};

/// Shape metadata needed to decode flat arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct DataHeader {
    pub kind: ManifoldKind,
    /// Hyperboloid radius; defaults to 1.
    pub radius: Option<f64>,
    /// Stiefel column count; the row count follows from the array length.
    pub cols: Option<usize>,
}

impl DataHeader {
    pub fn for_point(x: &ManifoldPoint<f64>) -> Self {
        DataHeader {
            kind: x.kind(),
            radius: x.as_hyperboloid().map(|h| h.radius()),
            cols: x.as_stiefel().map(|s| s.shape().1),
        }
    }

    pub fn to_line(&self) -> String {
        let mut s = format!("# manifold={}", self.kind.name());
        if let Some(r) = self.radius {
            s.push_str(&format!(" radius={r}"));
        }
        if let Some(c) = self.cols {
            s.push_str(&format!(" cols={c}"));
        }
        s
    }

    pub fn parse(line: &str) -> Result<Self> {
        let body = line
            .trim()
            .strip_prefix('#')
            .ok_or_else(|| Error::Config("data file header must start with '#'".into()))?;
        let mut kind = None;
        let mut radius = None;
        let mut cols = None;
        for tok in body.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("malformed header token '{tok}'")))?;
            match k {
                "manifold" => kind = Some(ManifoldKind::parse(v)?),
                "radius" => {
                    radius = Some(v.parse::<f64>().map_err(|_| {
                        Error::Config(format!("bad radius '{v}'"))
                    })?)
                }
                "cols" => {
                    cols = Some(v.parse::<usize>().map_err(|_| {
                        Error::Config(format!("bad column count '{v}'"))
                    })?)
                }
                other => return Err(Error::Config(format!("unknown header key '{other}'"))),
            }
        }
        let kind = kind.ok_or_else(|| Error::Config("header does not name a manifold".into()))?;
        Ok(DataHeader { kind, radius, cols })
    }
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

fn square_side(len: usize) -> Result<usize> {
    let p = (len as f64).sqrt().round() as usize;
    if p * p != len || p == 0 {
        return Err(Error::InvalidPoint(format!(
            "SPD array of length {len} is not a square matrix"
        )));
    }
    Ok(p)
}

/// Flat array layout of a point.
pub fn point_to_array(x: &ManifoldPoint<f64>) -> Vec<f64> {
    match x {
        ManifoldPoint::Sphere(u) => u.coords().as_slice().to_vec(),
        ManifoldPoint::Hyperboloid(h) => h.coords().as_slice().to_vec(),
        ManifoldPoint::Torus(t) => t.angles(),
        ManifoldPoint::Spd(s) => row_major(s.matrix()),
        ManifoldPoint::Stiefel(s) => row_major(s.matrix()),
    }
}

/// Decodes a flat array, validating the manifold invariant.
pub fn point_from_array(header: &DataHeader, data: &[f64]) -> Result<ManifoldPoint<f64>> {
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(match header.kind {
        ManifoldKind::Sphere => UnitVector::from_slice(data)?.into(),
        ManifoldKind::Hyperboloid => {
            HyperboloidPoint::new(DVector::from_column_slice(data), header.radius.unwrap_or(1.0))?
                .into()
        }
        ManifoldKind::Torus => TorusPoint::from_angles(data).into(),
        ManifoldKind::Spd => {
            let p = square_side(data.len())?;
            SpdMatrix::new(DMatrix::from_row_slice(p, p, data))?.into()
        }
        ManifoldKind::Stiefel => {
            let k = header
                .cols
                .ok_or_else(|| Error::Config("Stiefel data needs cols=<k> in the header".into()))?;
            if k == 0 || data.len() % k != 0 {
                return Err(Error::InvalidPoint(format!(
                    "array of length {} does not have {k} columns",
                    data.len()
                )));
            }
            StiefelFrame::new(DMatrix::from_row_slice(data.len() / k, k, data))?.into()
        }
    })
}

/// Self-describing JSON record of a point.
pub fn point_to_json(x: &ManifoldPoint<f64>) -> Value {
    let mut v = json!({
        "manifold": x.kind().name(),
        "data": point_to_array(x),
    });
    match x {
        ManifoldPoint::Hyperboloid(h) => v["radius"] = json!(h.radius()),
        ManifoldPoint::Spd(s) => v["shape"] = json!([s.p(), s.p()]),
        ManifoldPoint::Stiefel(s) => v["shape"] = json!([s.shape().0, s.shape().1]),
        _ => {}
    }
    v
}

pub fn point_from_json(v: &Value) -> Result<ManifoldPoint<f64>> {
    let tag = v
        .get("manifold")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Config("point record lacks a \"manifold\" tag".into()))?;
    let kind = ManifoldKind::parse(tag)?;
    let data: Vec<f64> = serde_json::from_value(
        v.get("data")
            .cloned()
            .ok_or_else(|| Error::Config("point record lacks \"data\"".into()))?,
    )?;
    let cols = v
        .get("shape")
        .and_then(|s| s.get(1))
        .and_then(Value::as_u64)
        .map(|c| c as usize);
    let header = DataHeader {
        kind,
        radius: v.get("radius").and_then(Value::as_f64),
        cols,
    };
    point_from_array(&header, &data)
}

/// Writes a header line followed by one JSON array per point.
pub fn write_data_file<W: Write>(mut w: W, points: &[ManifoldPoint<f64>]) -> Result<()> {
    let first = points.first().ok_or(Error::EmptyInput)?;
    let header = DataHeader::for_point(first);
    writeln!(w, "{}", header.to_line())?;
    for x in points {
        if x.kind() != header.kind {
            return Err(Error::VariantMismatch);
        }
        writeln!(w, "{}", serde_json::to_string(&point_to_array(x))?)?;
    }
    Ok(())
}

/// Reads a data file; blank lines after the header are skipped.
pub fn read_data_file<R: BufRead>(r: R) -> Result<(DataHeader, Vec<ManifoldPoint<f64>>)> {
    let mut lines = r.lines();
    let header_line = lines.next().ok_or(Error::EmptyInput)??;
    let header = DataHeader::parse(&header_line)?;
    let mut points = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let data: Vec<f64> = serde_json::from_str(&line)
            .map_err(|e| Error::Config(format!("line {}: {e}", i + 2)))?;
        points.push(point_from_array(&header, &data)?);
    }
    Ok((header, points))
}
