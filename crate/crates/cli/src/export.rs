//! Field files: one CSV per field and one legacy ASCII VTK file per slab.
//!
//! Floats are written as `{:.16e}` (17 significant digits), so reading a CSV
//! back reproduces the nodal values bit for bit.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use biofilm_core::coupled::SlabState;
use biofilm_core::fem::Field;
use thiserror::Error;

use crate::config::Format;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {message}")]
    Malformed { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ExportError + '_ {
    move |source| ExportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ExportError + '_ {
    move |source| ExportError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Shared file stem of slab `index` at time `t`.
pub fn slab_stem(index: usize, t: f64) -> String {
    format!("slab_{index:04}_t{t:.6}")
}

/// Column names of a field's components.
fn component_names(name: &str, components: usize) -> Vec<String> {
    if components == 1 {
        vec![name.to_string()]
    } else {
        (1..=components).map(|k| format!("{name}_{k}")).collect()
    }
}

/// Writes `node,x1,x2,<components>` for every node of the field's space.
pub fn write_field_csv(path: &Path, name: &str, field: &Field) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    let mut header = vec!["node".to_string(), "x1".into(), "x2".into()];
    header.extend(component_names(name, field.components()));
    w.write_record(&header).map_err(csv_err(path))?;
    let nc = field.components();
    for (k, x) in field.space().nodes().iter().enumerate() {
        let mut row = vec![k.to_string(), float(x[0]), float(x[1])];
        row.extend(field.values()[k * nc..(k + 1) * nc].iter().map(|&v| float(v)));
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Contents of a field CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTable {
    pub columns: Vec<String>,
    pub nodes: Vec<[f64; 2]>,
    /// Node-major component values.
    pub values: Vec<f64>,
}

pub fn read_field_csv(path: &Path) -> Result<FieldTable, ExportError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = r.headers().map_err(csv_err(path))?.clone();
    if header.len() < 4 || &header[0] != "node" || &header[1] != "x1" || &header[2] != "x2" {
        return Err(ExportError::Malformed {
            path: path.to_path_buf(),
            message: "expected a node,x1,x2,... header".into(),
        });
    }
    let columns: Vec<String> = header.iter().skip(3).map(str::to_string).collect();
    let mut nodes = Vec::new();
    let mut values = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let parse = |i: usize| -> Result<f64, ExportError> {
            rec[i].trim().parse().map_err(|_| ExportError::Malformed {
                path: path.to_path_buf(),
                message: format!("row {}: bad number '{}'", line + 2, &rec[i]),
            })
        };
        if rec.len() != header.len() {
            return Err(ExportError::Malformed {
                path: path.to_path_buf(),
                message: format!("row {} has {} columns, expected {}", line + 2, rec.len(), header.len()),
            });
        }
        nodes.push([parse(1)?, parse(2)?]);
        for i in 3..rec.len() {
            values.push(parse(i)?);
        }
    }
    Ok(FieldTable { columns, nodes, values })
}

/// Legacy ASCII unstructured grid with every field as point data at the
/// mesh vertices.
pub fn write_vtk(path: &Path, state: &SlabState) -> Result<(), ExportError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    write_vtk_to(&mut w, state).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

fn write_vtk_to(w: &mut impl Write, state: &SlabState) -> io::Result<()> {
    let mesh = &state.mesh;
    let verts = mesh.vertices();
    let tris = mesh.triangles();
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "biofilm slab t = {}", float(state.t))?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", verts.len())?;
    for v in verts {
        writeln!(w, "{} {} 0", float(v[0]), float(v[1]))?;
    }
    writeln!(w, "CELLS {} {}", tris.len(), 4 * tris.len())?;
    for t in tris {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(w, "CELL_TYPES {}", tris.len())?;
    for _ in tris {
        writeln!(w, "5")?;
    }
    writeln!(w, "POINT_DATA {}", verts.len())?;
    for (name, field) in state.fields() {
        let nc = field.components();
        let vals = field.values();
        if nc == 1 {
            writeln!(w, "SCALARS {name} double 1")?;
            writeln!(w, "LOOKUP_TABLE default")?;
            for k in 0..verts.len() {
                writeln!(w, "{}", float(vals[k]))?;
            }
        } else {
            writeln!(w, "VECTORS {name} double")?;
            for k in 0..verts.len() {
                writeln!(w, "{} {} 0", float(vals[k * nc]), float(vals[k * nc + 1]))?;
            }
        }
    }
    Ok(())
}

/// Writes the slab in the requested formats and returns the created paths.
pub fn export_fields(
    state: &SlabState,
    index: usize,
    dir: &Path,
    formats: impl IntoIterator<Item = Format>,
) -> Result<Vec<PathBuf>, ExportError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let stem = slab_stem(index, state.t);
    let mut out = Vec::new();
    for format in formats {
        match format {
            Format::Csv => {
                for (name, field) in state.fields() {
                    let path = dir.join(format!("{stem}_{name}.csv"));
                    write_field_csv(&path, name, field)?;
                    out.push(path);
                }
            }
            Format::Vtk => {
                let path = dir.join(format!("{stem}.vtk"));
                write_vtk(&path, state)?;
                out.push(path);
            }
        }
    }
    Ok(out)
}
