//! File formats: hierarchy CSV, label lists, score matrices (CSV or binary)
//! and curve reports.
//!
//! Numbers are written with Rust's shortest round-trip formatting and a `.`
//! decimal point regardless of locale, so identical inputs always produce
//! byte-identical outputs.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use hierop::curve::Curve;
use hierop::hierarchy::Hierarchy;
use hierop::util::Matrix;

use crate::error::{CliError, Result};

/// Magic prefix of the binary score format.
pub const SCORE_MAGIC: &[u8; 4] = b"HSC1";

/// Reads the `name,parent` hierarchy file; row order defines node indices.
pub fn read_hierarchy(path: &Path, allow_unary: bool) -> Result<Hierarchy> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    if headers.iter().collect::<Vec<_>>() != ["name", "parent"] {
        return Err(CliError::data(format!(
            "{}: expected header \"name,parent\", got {:?}",
            path.display(),
            headers
        )));
    }
    let mut edges: Vec<(String, Option<String>)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        let name = record.get(0).unwrap_or("").to_owned();
        let parent = match record.get(1) {
            None | Some("") => None,
            Some(p) => Some(p.to_owned()),
        };
        edges.push((name, parent));
    }
    Ok(Hierarchy::from_edges(&edges, allow_unary)?)
}

pub fn write_hierarchy(path: &Path, h: &Hierarchy) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    w.write_record(["name", "parent"]).map_err(CliError::from_csv)?;
    for y in 0..h.num_nodes() {
        let parent = h.parent(y).map(|p| h.name(p)).unwrap_or("");
        w.write_record([h.name(y), parent]).map_err(CliError::from_csv)?;
    }
    w.flush().map_err(|e| CliError::data(e.to_string()))?;
    Ok(())
}

/// Reads one node name per line and resolves indices.
pub fn read_labels(path: &Path, h: &Hierarchy) -> Result<Vec<usize>> {
    let file = File::open(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let mut labels = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::data(e.to_string()))?;
        let name = line.trim();
        if name.is_empty() {
            continue;
        }
        let idx = h.index_of(name).ok_or_else(|| {
            CliError::data(format!(
                "{}:{}: unknown node name {:?}",
                path.display(),
                lineno + 1,
                name
            ))
        })?;
        labels.push(idx);
    }
    if labels.is_empty() {
        return Err(CliError::data(format!("{}: no labels", path.display())));
    }
    Ok(labels)
}

pub fn write_node_names(path: &Path, h: &Hierarchy, nodes: &[usize]) -> Result<()> {
    let mut w = BufWriter::new(
        File::create(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?,
    );
    for &y in nodes {
        writeln!(w, "{}", h.name(y)).map_err(|e| CliError::data(e.to_string()))?;
    }
    Ok(())
}

/// Reads a score matrix, sniffing the binary magic and falling back to CSV.
pub fn read_scores(path: &Path) -> Result<Matrix> {
    let mut file =
        File::open(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let mut magic = [0u8; 4];
    let read = file.read(&mut magic).map_err(|e| CliError::data(e.to_string()))?;
    if read == 4 && &magic == SCORE_MAGIC {
        read_scores_binary(&mut file, path)
    } else {
        drop(file);
        read_scores_csv(path)
    }
}

fn read_scores_binary(file: &mut File, path: &Path) -> Result<Matrix> {
    let mut header = [0u8; 8];
    file.read_exact(&mut header)
        .map_err(|e| CliError::data(format!("{}: truncated header: {e}", path.display())))?;
    let rows = u32::from_le_bytes(header[0..4].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let mut payload = vec![0u8; rows * cols * 4];
    file.read_exact(&mut payload)
        .map_err(|e| CliError::data(format!("{}: truncated payload: {e}", path.display())))?;
    let mut trailing = [0u8; 1];
    if file.read(&mut trailing).map_err(|e| CliError::data(e.to_string()))? != 0 {
        return Err(CliError::data(format!(
            "{}: trailing bytes after {rows}x{cols} values",
            path.display()
        )));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for chunk in payload.chunks_exact(4) {
        let v = f32::from_le_bytes(chunk.try_into().unwrap()) as f64;
        if !v.is_finite() {
            return Err(CliError::data(format!(
                "{}: non-finite value at element {}",
                path.display(),
                data.len()
            )));
        }
        data.push(v);
    }
    Ok(Matrix::new(rows, cols, data)?)
}

fn read_scores_csv(path: &Path) -> Result<Matrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let mut data = Vec::new();
    let mut rows = 0usize;
    let mut cols = None;
    for record in reader.records() {
        let record = record.map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        let row: Vec<f64> = record
            .iter()
            .map(|field| {
                field.trim().parse::<f64>().map_err(|e| {
                    CliError::data(format!("{}: bad number {field:?}: {e}", path.display()))
                })
            })
            .collect::<Result<_>>()?;
        if row.iter().any(|v| !v.is_finite()) {
            return Err(CliError::data(format!(
                "{}: non-finite value in row {rows}",
                path.display()
            )));
        }
        match cols {
            None => cols = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(CliError::data(format!(
                    "{}: row {rows} has {} columns, expected {c}",
                    path.display(),
                    row.len()
                )))
            }
            _ => {}
        }
        data.extend(row);
        rows += 1;
    }
    let cols = cols.ok_or_else(|| CliError::data(format!("{}: empty file", path.display())))?;
    Ok(Matrix::new(rows, cols, data)?)
}

pub fn write_scores_csv(path: &Path, scores: &Matrix) -> Result<()> {
    let mut w = BufWriter::new(
        File::create(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?,
    );
    for i in 0..scores.rows() {
        let row: Vec<String> = scores.row(i).iter().map(|v| format!("{v}")).collect();
        writeln!(w, "{}", row.join(",")).map_err(|e| CliError::data(e.to_string()))?;
    }
    Ok(())
}

pub fn write_scores_binary(path: &Path, scores: &Matrix) -> Result<()> {
    let mut w = BufWriter::new(
        File::create(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?,
    );
    w.write_all(SCORE_MAGIC).map_err(|e| CliError::data(e.to_string()))?;
    w.write_all(&(scores.rows() as u32).to_le_bytes())
        .map_err(|e| CliError::data(e.to_string()))?;
    w.write_all(&(scores.cols() as u32).to_le_bytes())
        .map_err(|e| CliError::data(e.to_string()))?;
    for v in scores.data() {
        w.write_all(&(*v as f32).to_le_bytes())
            .map_err(|e| CliError::data(e.to_string()))?;
    }
    Ok(())
}

/// Writes the per-threshold table of one or more curves: header
/// `threshold,<metric>...`, first row at threshold 1 with the base values,
/// then one row per breakpoint of the union, descending.
pub fn write_report_csv(path: &Path, names: &[String], curves: &[Curve]) -> Result<()> {
    let mut thresholds: Vec<f64> = curves
        .iter()
        .flat_map(|c| c.steps().iter().map(|&(s, _)| s))
        .collect();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();

    let mut w = BufWriter::new(
        File::create(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?,
    );
    writeln!(w, "threshold,{}", names.join(",")).map_err(|e| CliError::data(e.to_string()))?;
    let mut write_row = |tau_label: f64, values: Vec<f64>| -> Result<()> {
        let cells: Vec<String> = values.iter().map(|v| format!("{v}")).collect();
        writeln!(w, "{tau_label},{}", cells.join(","))
            .map_err(|e| CliError::data(e.to_string()))
    };
    write_row(1.0, curves.iter().map(|c| c.base()).collect())?;
    for &s in &thresholds {
        // value on the interval just below s: evaluate at any tau in
        // [next_s, s); s is excluded by the strict comparison, so nudging is
        // unnecessary
        let values: Vec<f64> = curves.iter().map(|c| c.value_below(s)).collect();
        write_row(s, values)?;
    }
    Ok(())
}

/// A report parsed back from CSV; thresholds descending, first row is the
/// base at threshold 1.
#[derive(Debug, Clone)]
pub struct ParsedReport {
    pub names: Vec<String>,
    pub thresholds: Vec<f64>,
    /// `columns[m][r]` is metric `m`'s value on the interval starting at
    /// `thresholds[r]` going down.
    pub columns: Vec<Vec<f64>>,
}

impl ParsedReport {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|m| self.columns[m].as_slice())
    }

    /// Reconstructs a curve from one column: breakpoints are the rows where
    /// the value changes.
    pub fn to_curve(&self, name: &str, n: usize, tau_min: f64) -> Option<Curve> {
        let col = self.column(name)?;
        let base = col[0];
        let mut steps = Vec::new();
        let mut last = base;
        for (r, &v) in col.iter().enumerate().skip(1) {
            if v != last {
                steps.push((self.thresholds[r], v));
                last = v;
            }
        }
        Some(Curve::from_parts(n, tau_min, base, steps))
    }
}

pub fn read_report_csv(path: &Path) -> Result<ParsedReport> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::data(e.to_string()))?
        .clone();
    if headers.get(0) != Some("threshold") {
        return Err(CliError::data(format!(
            "{}: first column must be \"threshold\"",
            path.display()
        )));
    }
    let names: Vec<String> = headers.iter().skip(1).map(str::to_owned).collect();
    let mut thresholds = Vec::new();
    let mut columns = vec![Vec::new(); names.len()];
    for record in reader.records() {
        let record = record.map_err(|e| CliError::data(e.to_string()))?;
        let mut fields = record.iter();
        let tau: f64 = fields
            .next()
            .unwrap_or("")
            .parse()
            .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        thresholds.push(tau);
        for (m, field) in fields.enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
            columns[m].push(v);
        }
    }
    if thresholds.is_empty() {
        return Err(CliError::data(format!("{}: empty report", path.display())));
    }
    Ok(ParsedReport {
        names,
        thresholds,
        columns,
    })
}

/// Summary block mirroring the overall-metrics table layout.
#[derive(Debug, serde::Serialize)]
pub struct ReportSummary {
    #[serde(rename = "AP")]
    pub ap: f64,
    #[serde(rename = "AC")]
    pub ac: f64,
    #[serde(rename = "R@90C")]
    pub r_at_90c: f64,
    #[serde(rename = "R@95C")]
    pub r_at_95c: f64,
    #[serde(rename = "F1_majority")]
    pub f1_majority: f64,
    #[serde(rename = "F1_leaf")]
    pub f1_leaf: f64,
    pub n_examples: usize,
    pub method: String,
    pub metric_names: Vec<String>,
}

pub fn write_summary_json(path: &Path, summary: &ReportSummary) -> Result<()> {
    let file =
        File::create(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    serde_json::to_writer_pretty(BufWriter::new(file), summary)
        .map_err(|e| CliError::data(e.to_string()))?;
    Ok(())
}
