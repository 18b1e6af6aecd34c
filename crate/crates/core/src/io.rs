//! CSV ingestion and export.
//!
//! Floats are written in Rust's shortest round-trip form, so every value
//! reads back bit for bit.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::halfspace::{HalfSpaceFunction, RegionMask, TimeGrid};
use crate::space::Space;

fn parse_f64(field: &str, what: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Malformed(format!("line {line}: cannot parse {what} `{field}`")))
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r)
}

fn header(rdr: &mut csv::Reader<impl Read>) -> Result<Vec<String>> {
    Ok(rdr.headers()?.iter().map(str::to_string).collect())
}

/// `id,x0,…,x{d-1},weight` with Euclidean distances.
pub fn read_coordinates(r: impl Read) -> Result<Space> {
    let mut rdr = reader(r);
    let head = header(&mut rdr)?;
    if head.len() < 3 || head[0] != "id" || head[head.len() - 1] != "weight" {
        return Err(Error::Malformed(
            "coordinate CSV needs header `id,<coordinates…>,weight`".into(),
        ));
    }
    let dim = head.len() - 2;
    let (mut ids, mut coords, mut weights) = (Vec::new(), Vec::new(), Vec::new());
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        if rec.len() != dim + 2 {
            return Err(Error::Malformed(format!(
                "line {line}: expected {} fields, found {}",
                dim + 2,
                rec.len()
            )));
        }
        ids.push(rec[0].to_string());
        coords.push(
            (1..=dim)
                .map(|c| parse_f64(&rec[c], "coordinate", line))
                .collect::<Result<Vec<_>>>()?,
        );
        weights.push(parse_f64(&rec[dim + 1], "weight", line)?);
    }
    Space::from_coordinates(ids, coords, weights)
}

pub fn write_coordinates(space: &Space, w: impl Write) -> Result<()> {
    let coords = space
        .coordinates()
        .ok_or_else(|| Error::Malformed("space has no coordinates; export the distance matrix".into()))?;
    let dim = coords.first().map_or(0, Vec::len);
    let mut wtr = csv::Writer::from_writer(w);
    let mut head = vec!["id".to_string()];
    head.extend((0..dim).map(|c| format!("x{c}")));
    head.push("weight".into());
    wtr.write_record(&head)?;
    for (i, c) in coords.iter().enumerate() {
        let mut row = vec![space.ids()[i].clone()];
        row.extend(c.iter().map(|v| v.to_string()));
        row.push(space.weight(i).to_string());
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Square distance matrix with header `id,<ids…>` and one row per point,
/// plus a weight table `id,weight` in any order.
pub fn read_distance_matrix(dist: impl Read, weights: impl Read) -> Result<Space> {
    let mut rdr = reader(dist);
    let head = header(&mut rdr)?;
    if head.first().map(String::as_str) != Some("id") {
        return Err(Error::Malformed("distance CSV header must start with `id`".into()));
    }
    let ids: Vec<String> = head[1..].to_vec();
    let n = ids.len();
    let mut rows = Vec::with_capacity(n);
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        if rec.len() != n + 1 {
            return Err(Error::Malformed(format!("line {line}: expected {} fields, found {}", n + 1, rec.len())));
        }
        if k >= n || rec[0] != ids[k] {
            return Err(Error::Malformed(format!(
                "line {line}: row id `{}` does not match column order",
                &rec[0]
            )));
        }
        rows.push(
            (1..=n)
                .map(|c| parse_f64(&rec[c], "distance", line))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    if rows.len() != n {
        return Err(Error::Malformed(format!("distance matrix has {} rows for {n} columns", rows.len())));
    }
    let table = read_point_values(weights)?;
    let mut w = vec![f64::NAN; n];
    for (id, v) in table {
        let i = ids
            .iter()
            .position(|x| *x == id)
            .ok_or_else(|| Error::UnknownPoint(id.clone()))?;
        w[i] = v;
    }
    if let Some(i) = w.iter().position(|v| v.is_nan()) {
        return Err(Error::Malformed(format!("no weight given for point `{}`", ids[i])));
    }
    Space::from_distances(ids, rows, w)
}

pub fn write_distance_matrix(space: &Space, w: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut head = vec!["id".to_string()];
    head.extend(space.ids().iter().cloned());
    wtr.write_record(&head)?;
    for x in 0..space.len() {
        let mut row = vec![space.ids()[x].clone()];
        row.extend(space.distance_row(x).iter().map(|v| v.to_string()));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_weights(space: &Space, w: impl Write) -> Result<()> {
    write_point_values(space, space.weights(), "weight", w)
}

/// Reads a space from a coordinate file, or from a distance matrix when a
/// weight file is given.
pub fn load_space(path: &Path, weights: Option<&Path>) -> Result<Space> {
    let space = match weights {
        Some(wp) => read_distance_matrix(File::open(path)?, File::open(wp)?)?,
        None => read_coordinates(File::open(path)?)?,
    };
    Ok(space.with_label(path.display().to_string()))
}

/// Two-column `id,<value>` table.
pub fn read_point_values(r: impl Read) -> Result<Vec<(String, f64)>> {
    let mut rdr = reader(r);
    let head = header(&mut rdr)?;
    if head.len() != 2 || head[0] != "id" {
        return Err(Error::Malformed("per-point CSV needs header `id,<value>`".into()));
    }
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::Malformed(format!("line {}: expected 2 fields", k + 2)));
        }
        out.push((rec[0].to_string(), parse_f64(&rec[1], "value", k + 2)?));
    }
    Ok(out)
}

/// Per-point values in the order of the space.
pub fn read_point_vector(space: &Space, r: impl Read) -> Result<Vec<f64>> {
    let table = read_point_values(r)?;
    if table.len() != space.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} values for a space of {} points",
            table.len(),
            space.len()
        )));
    }
    let mut out = vec![f64::NAN; space.len()];
    for (id, v) in table {
        out[space.index_of(&id)?] = v;
    }
    if let Some(i) = out.iter().position(|v| v.is_nan()) {
        return Err(Error::Malformed(format!("no value for point `{}`", space.ids()[i])));
    }
    Ok(out)
}

pub fn write_point_values(space: &Space, values: &[f64], column: &str, w: impl Write) -> Result<()> {
    if values.len() != space.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} values for a space of {} points",
            values.len(),
            space.len()
        )));
    }
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["id", column])?;
    for (id, v) in space.ids().iter().zip(values) {
        wtr.write_record([id.as_str(), &v.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a `(slab × point)` table with header `tau,<ids…>` and the slab
/// representative in the first column. Columns may appear in any order;
/// rows must follow the grid.
fn read_grid_table(space: &Space, grid: &TimeGrid, r: impl Read, what: &str) -> Result<Vec<Vec<String>>> {
    let mut rdr = reader(r);
    let head = header(&mut rdr)?;
    if head.first().map(String::as_str) != Some("tau") {
        return Err(Error::Malformed(format!("{what} CSV header must start with `tau`")));
    }
    if head.len() != space.len() + 1 {
        return Err(Error::DimensionMismatch(format!(
            "{what} has {} point columns, space has {} points",
            head.len() - 1,
            space.len()
        )));
    }
    let cols = head[1..]
        .iter()
        .map(|id| space.index_of(id))
        .collect::<Result<Vec<_>>>()?;
    let mut table = vec![vec![String::new(); space.len()]; grid.slabs()];
    let mut rows = 0;
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        if k >= grid.slabs() {
            return Err(Error::DimensionMismatch(format!(
                "{what} has more than {} slab rows",
                grid.slabs()
            )));
        }
        if rec.len() != head.len() {
            return Err(Error::Malformed(format!("line {line}: expected {} fields, found {}", head.len(), rec.len())));
        }
        let tau = parse_f64(&rec[0], "tau", line)?;
        if crate::tolerance::relative_defect(tau, grid.tau(k)) > 1e-9 {
            return Err(Error::Malformed(format!(
                "line {line}: tau {tau} does not match grid representative {}",
                grid.tau(k)
            )));
        }
        for (c, &i) in cols.iter().enumerate() {
            table[k][i] = rec[c + 1].to_string();
        }
        rows += 1;
    }
    if rows != grid.slabs() {
        return Err(Error::DimensionMismatch(format!(
            "{what} has {rows} slab rows, grid has {}",
            grid.slabs()
        )));
    }
    Ok(table)
}

fn write_grid_table(space: &Space, grid: &TimeGrid, w: impl Write, cell: impl Fn(usize, usize) -> String) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut head = vec!["tau".to_string()];
    head.extend(space.ids().iter().cloned());
    wtr.write_record(&head)?;
    for j in 0..grid.slabs() {
        let mut row = vec![grid.tau(j).to_string()];
        row.extend((0..space.len()).map(|i| cell(j, i)));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_function(space: &Space, grid: &TimeGrid, r: impl Read) -> Result<HalfSpaceFunction> {
    let table = read_grid_table(space, grid, r, "function")?;
    let mut values = Vec::with_capacity(grid.slabs() * space.len());
    for (j, row) in table.iter().enumerate() {
        for cell in row {
            values.push(parse_f64(cell, "value", j + 2)?);
        }
    }
    HalfSpaceFunction::from_values(grid.slabs(), space.len(), values)
}

pub fn write_function(space: &Space, grid: &TimeGrid, f: &HalfSpaceFunction, w: impl Write) -> Result<()> {
    f.check_fits(space, grid)?;
    write_grid_table(space, grid, w, |j, i| f.get(j, i).to_string())
}

/// Masks use `0`/`1` cells.
pub fn read_mask(space: &Space, grid: &TimeGrid, r: impl Read) -> Result<RegionMask> {
    let table = read_grid_table(space, grid, r, "mask")?;
    let mut bits = Vec::with_capacity(grid.slabs() * space.len());
    for (j, row) in table.iter().enumerate() {
        for cell in row {
            bits.push(match cell.as_str() {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::Malformed(format!("line {}: mask cell `{other}` is not 0 or 1", j + 2)))
                }
            });
        }
    }
    RegionMask::from_bits(grid.slabs(), space.len(), bits)
}

pub fn write_mask(space: &Space, grid: &TimeGrid, m: &RegionMask, w: impl Write) -> Result<()> {
    m.check_shape(grid.slabs(), space.len())?;
    write_grid_table(space, grid, w, |j, i| if m.get(j, i) { "1" } else { "0" }.to_string())
}
