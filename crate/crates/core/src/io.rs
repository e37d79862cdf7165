//! Deterministic JSON and CSV export.
//!
//! JSON objects are emitted with sorted keys and every float written with 17
//! significant digits, so identical inputs give identical bytes and values
//! round-trip exactly. Non-finite floats become `null`.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::{build_mesh, Field, Mesh, MeshSpec};

/// Fixed scientific notation with 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

struct FixedFloats;

impl serde_json::ser::Formatter for FixedFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(fmt_float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    // Going through `Value` sorts object keys.
    let tree = serde_json::to_value(value).map_err(|e| Error::Parse(e.to_string()))?;
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats);
    tree.serialize(&mut ser).map_err(|e| Error::Parse(e.to_string()))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &to_json(value)?)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    from_json(&read_text(path)?)
}

/// Field as CSV: a `#` metadata line describing the mesh, a column header,
/// then one row per node with coordinates and value.
pub fn field_to_csv(mesh: &Mesh, v: &Field) -> Result<String> {
    mesh.check_field(v)?;
    let spec = mesh.spec();
    let mut out = format!(
        "# dimension={} extents={} nodes={}\n",
        spec.dimension,
        spec.extents.iter().map(|x| fmt_float(*x)).collect::<Vec<_>>().join(";"),
        spec.nodes.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(";"),
    );
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let header: &[&str] = if spec.dimension == 1 {
        &["x", "value"]
    } else {
        &["x", "y", "value"]
    };
    wtr.write_record(header).map_err(csv_err)?;
    for (c, val) in mesh.coords().iter().zip(v.values()) {
        let mut row = vec![fmt_float(c[0])];
        if spec.dimension == 2 {
            row.push(fmt_float(c[1]));
        }
        row.push(fmt_float(*val));
        wtr.write_record(&row).map_err(csv_err)?;
    }
    let body = wtr.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    out.push_str(std::str::from_utf8(&body).expect("csv writes UTF-8"));
    Ok(out)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

pub fn field_from_csv(text: &str) -> Result<(Mesh, Field)> {
    let (meta, body) = text
        .split_once('\n')
        .ok_or_else(|| Error::Parse("empty field file".into()))?;
    let meta = meta
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse("missing mesh metadata line".into()))?;
    let (mut dim, mut extents, mut nodes) = (None, None, None);
    for kv in meta.split_whitespace() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad metadata entry {kv}")))?;
        match k {
            "dimension" => dim = v.parse::<usize>().ok(),
            "extents" => extents = v.split(';').map(|s| s.parse::<f64>().ok()).collect::<Option<Vec<_>>>(),
            "nodes" => {
                nodes = v
                    .split(';')
                    .map(|s| s.parse::<usize>().ok())
                    .collect::<Option<Vec<_>>>()
            }
            _ => {}
        }
    }
    let spec = MeshSpec {
        dimension: dim.ok_or_else(|| Error::Parse("metadata lacks dimension".into()))?,
        extents: extents.ok_or_else(|| Error::Parse("metadata lacks extents".into()))?,
        nodes: nodes.ok_or_else(|| Error::Parse("metadata lacks nodes".into()))?,
    };
    let mesh = build_mesh(&spec)?;
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let mut values = Vec::with_capacity(mesh.len());
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let last = rec
            .get(rec.len().saturating_sub(1))
            .ok_or_else(|| Error::Parse("empty row".into()))?;
        values.push(
            last.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("{last}: {e}")))?,
        );
    }
    let field = mesh.field(values)?;
    Ok((mesh, field))
}

pub fn write_field_csv(path: &Path, mesh: &Mesh, v: &Field) -> Result<()> {
    write_text(path, &field_to_csv(mesh, v)?)
}

pub fn read_field_csv(path: &Path) -> Result<(Mesh, Field)> {
    field_from_csv(&read_text(path)?)
}

/// Generic CSV writer: one header line then rows.
pub fn table_to_csv(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(header).map_err(csv_err)?;
    for r in rows {
        wtr.write_record(r).map_err(csv_err)?;
    }
    let body = wtr.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(body).expect("csv writes UTF-8"))
}

/// One row of a fibering root table.
#[derive(Clone, Debug, PartialEq)]
pub struct RootRow {
    pub lambda: f64,
    pub moments: crate::Moments,
    pub roots: Vec<f64>,
    pub in_u_lambda: bool,
}

pub const ROOT_TABLE_HEADER: [&str; 8] = ["lambda", "A", "B", "C", "t1", "t2", "t3", "in_u_lambda"];

pub fn root_table_to_csv(rows: &[RootRow]) -> Result<String> {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut row = vec![
                fmt_float(r.lambda),
                fmt_float(r.moments.a),
                fmt_float(r.moments.b),
                fmt_float(r.moments.c),
            ];
            for i in 0..3 {
                row.push(r.roots.get(i).map(|t| fmt_float(*t)).unwrap_or_default());
            }
            row.push(r.in_u_lambda.to_string());
            row
        })
        .collect();
    table_to_csv(&ROOT_TABLE_HEADER, &body)
}
