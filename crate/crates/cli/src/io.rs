//! File formats: point input, potential output, benchmark rows and the mesh dump.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use fmm2d_core::{Complex64, FmmTree, ParticleSet, PotentialField};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Reads `x y gamma` per line. Blank lines and lines starting with `#` are skipped.
pub fn read_points(path: &Path) -> Result<ParticleSet> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    parse_points(BufReader::new(file), path)
}

pub fn parse_points<R: BufRead>(reader: R, path: &Path) -> Result<ParticleSet> {
    let mut z = Vec::new();
    let mut g = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |msg: String| CliError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_err(format!("expected `x y gamma`, found {} fields", fields.len())));
        }
        let mut vals = [0.0; 3];
        for (v, f) in vals.iter_mut().zip(&fields) {
            *v = f.parse().map_err(|_| parse_err(format!("not a number: {f:?}")))?;
        }
        z.push(Complex64::new(vals[0], vals[1]));
        g.push(vals[2]);
    }
    Ok(ParticleSet::new(z, g)?)
}

/// Inverse of [`parse_points`]; values are written in shortest round-trip form.
pub fn write_points<W: Write>(mut w: W, points: &ParticleSet) -> std::io::Result<()> {
    writeln!(w, "# x y gamma")?;
    for (z, g) in points.positions().iter().zip(points.strengths()) {
        writeln!(w, "{} {} {}", z.re, z.im, g)?;
    }
    Ok(())
}

/// CSV `index,re,im` in input order.
pub fn write_potentials<W: Write>(mut w: W, field: &PotentialField) -> std::io::Result<()> {
    writeln!(w, "index,re,im")?;
    for (i, v) in field.values.iter().enumerate() {
        writeln!(w, "{i},{},{}", v.re, v.im)?;
    }
    Ok(())
}

pub fn read_potentials<R: Read>(r: R) -> Result<PotentialField> {
    #[derive(Deserialize)]
    struct Row {
        index: usize,
        re: f64,
        im: f64,
    }
    let mut values = Vec::new();
    for (i, row) in csv::Reader::from_reader(r).deserialize::<Row>().enumerate() {
        let row = row?;
        if row.index != i {
            return Err(CliError::BadArgs(format!("row {i} has index {}", row.index)));
        }
        values.push(Complex64::new(row.re, row.im));
    }
    Ok(PotentialField { values })
}

/// One line of the benchmark CSV.
///
/// Most rows carry wall seconds for one phase. A few derived rows reuse the
/// schema: `normalized` holds a dimensionless time ratio in `seconds`,
/// `optimum` marks the best `nd` of a calibration sweep and `crossover` the
/// first `n` of a break-even sweep from which the FMM stays faster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub experiment: String,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub nd: usize,
    pub theta: f64,
    pub levels: usize,
    pub phase: String,
    pub seconds: f64,
    pub tol: Option<f64>,
}

pub fn write_rows<W: Write>(w: W, rows: &[BenchmarkRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_rows<R: Read>(r: R) -> Result<Vec<BenchmarkRow>> {
    let rows = csv::Reader::from_reader(r).deserialize().collect::<csv::Result<_>>()?;
    Ok(rows)
}

/// CSV `level,box,x0,y0,x1,y1` for every box of every level.
pub fn write_boxes<W: Write>(mut w: W, tree: &FmmTree) -> std::io::Result<()> {
    writeln!(w, "level,box,x0,y0,x1,y1")?;
    for l in 0..=tree.n_levels() {
        for (b, node) in tree.level(l).iter().enumerate() {
            let (x0, y0, x1, y1) = node.geometry.corners();
            writeln!(w, "{l},{b},{x0},{y0},{x1},{y1}")?;
        }
    }
    Ok(())
}

/// Runs `f` against a buffered writer on `path`, or on stdout when `path` is `None`.
pub fn with_output<F>(path: Option<&Path>, f: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match path {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::io(path, e))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush().map_err(|e| CliError::io(path, e))
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            f(&mut w)?;
            w.flush().map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}
