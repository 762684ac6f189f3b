//! Point-set CSV files: optional `# d=<dim>` header, then one point per line with
//! `d` comma-separated decimals written at 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::PointSet;
use crate::error::{Error, Result};

pub fn write_csv_to<W: Write>(points: &PointSet, mut out: W) -> Result<()> {
    let mut text = format!("# d={}\n", points.dim());
    for p in points.iter() {
        for (k, c) in p.iter().enumerate() {
            if k > 0 {
                text.push(',');
            }
            write!(text, "{c:.16e}").expect("writing to a String");
        }
        text.push('\n');
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

pub fn write_csv(points: &PointSet, path: &Path) -> Result<()> {
    let file = fs::File::create(path)?;
    write_csv_to(points, std::io::BufWriter::new(file))
}

/// Reads a point file. The domain is left unset.
pub fn read_csv(path: &Path) -> Result<PointSet> {
    parse_csv(&fs::read_to_string(path)?)
}

pub(crate) fn parse_csv(text: &str) -> Result<PointSet> {
    let mut dim: Option<usize> = None;
    let mut coords = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(value) = comment.trim().strip_prefix("d=") {
                let d = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad dimension header on line {}", line_no + 1)))?;
                dim = Some(d);
            }
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|field| field.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("line {}: {e}", line_no + 1)))?;
        match dim {
            Some(d) if d != row.len() => {
                return Err(Error::Parse(format!(
                    "line {} has {} columns, expected {d}",
                    line_no + 1,
                    row.len()
                )))
            }
            None => dim = Some(row.len()),
            _ => {}
        }
        coords.extend(row);
    }
    let dim = dim.ok_or_else(|| Error::Parse("empty point file without a dimension header".into()))?;
    PointSet::new(dim, coords, None)
}
