//! CSV artifacts.

use std::path::Path;

use anyhow::Result;
use contact_lab_core::flow::Trajectory;

/// Column names `x1..xn, y1..yn, z`.
pub fn point_columns(n: usize) -> Vec<String> {
    let mut h: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    h.extend((1..=n).map(|i| format!("y{i}")));
    h.push("z".into());
    h
}

/// Writes a table; floats go through the shortest round-trip representation, so
/// equal inputs give byte-identical files.
pub fn write_table(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|v| format!("{v:?}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `t, x1..xn, y1..yn, z, logf`.
pub fn write_trajectory(path: &Path, n: usize, tr: &Trajectory) -> Result<()> {
    let mut header = vec!["t".to_string()];
    header.extend(point_columns(n));
    header.push("logf".into());
    let rows: Vec<Vec<f64>> = tr
        .times
        .iter()
        .zip(&tr.points)
        .zip(&tr.log_f)
        .map(|((t, p), l)| {
            let mut r = vec![*t];
            r.extend_from_slice(p.as_slice());
            r.push(*l);
            r
        })
        .collect();
    write_table(path, &header, &rows)
}

/// Reads a table of `w1..wd, value` rows on a tensor grid into a multilinear interpolant.
pub fn read_grid_samples(path: &Path) -> Result<contact_lab_core::bo::GridInterpolant> {
    let mut r = csv::Reader::from_path(path)?;
    let d = r.headers()?.len().checked_sub(1).filter(|d| *d > 0).ok_or_else(|| anyhow::anyhow!("samples file needs w columns and a value column"))?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let v: Vec<f64> = rec.iter().map(|s| s.trim().parse::<f64>()).collect::<Result<_, _>>()?;
        if v.len() != d + 1 {
            anyhow::bail!("ragged row in samples file");
        }
        rows.push(v);
    }
    let mut axes: Vec<Vec<f64>> = (0..d).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    for a in &mut axes {
        a.sort_by(f64::total_cmp);
        a.dedup();
    }
    let count: usize = axes.iter().map(|a| a.len()).product();
    if count != rows.len() {
        anyhow::bail!("samples do not form a full tensor grid ({} rows for {count} nodes)", rows.len());
    }
    let mut values = vec![f64::NAN; count];
    for r in &rows {
        let mut idx = 0;
        let mut stride = 1;
        for (j, a) in axes.iter().enumerate() {
            idx += stride * a.partition_point(|&v| v < r[j]);
            stride *= a.len();
        }
        values[idx] = r[d];
    }
    if values.iter().any(|v| v.is_nan()) {
        anyhow::bail!("duplicate grid node in samples file");
    }
    Ok(contact_lab_core::bo::GridInterpolant::new(axes, values)?)
}
