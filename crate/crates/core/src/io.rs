//! CSV serialization. Floats are written with 17 significant digits so every
//! value parses back to the identical double.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context};

use crate::observables::{DensityProfile, PortraitPoint, TimeSeries};

/// Scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// `t,SP,PR,norm`
pub fn write_timeseries(
    path: &Path,
    sp: &TimeSeries,
    pr: &TimeSeries,
    norm: &TimeSeries,
) -> anyhow::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "t,SP,PR,norm")?;
    for (((t, s), (_, p)), (_, n)) in sp.iter().zip(pr.iter()).zip(norm.iter()) {
        writeln!(w, "{t},{},{},{}", fmt_f64(s), fmt_f64(p), fmt_f64(n))?;
    }
    w.flush()?;
    Ok(())
}

/// `n,pL,pS,pR,pTotal`
pub fn write_density(path: &Path, d: &DensityProfile) -> anyhow::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "n,pL,pS,pR,pTotal")?;
    for (n, p) in d.iter() {
        writeln!(
            w,
            "{n},{},{},{},{}",
            fmt_f64(p[0]),
            fmt_f64(p[1]),
            fmt_f64(p[2]),
            fmt_f64(p[3])
        )?;
    }
    w.flush()?;
    Ok(())
}

/// `t,SP,dSP_dt`
pub fn write_portrait(path: &Path, points: &[PortraitPoint]) -> anyhow::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "t,SP,dSP_dt")?;
    for p in points {
        writeln!(w, "{},{},{}", p.t, fmt_f64(p.sp), fmt_f64(p.velocity))?;
    }
    w.flush()?;
    Ok(())
}

/// A CSV file held as named numeric columns.
#[derive(Clone, Debug)]
pub struct Table {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .with_context(|| format!("opening {}", path.display()))?;
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut columns = vec![Vec::new(); headers.len()];
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.with_context(|| format!("{} row {}", path.display(), row + 2))?;
            for (col, field) in rec.iter().enumerate().take(headers.len()) {
                let v = if field.is_empty() {
                    f64::NAN
                } else {
                    field.parse::<f64>().map_err(|_| {
                        anyhow!(
                            "{} row {}: `{field}` in column `{}` is not a number",
                            path.display(),
                            row + 2,
                            headers[col]
                        )
                    })?
                };
                columns[col].push(v);
            }
        }
        Ok(Self { headers, columns })
    }

    pub fn column(&self, name: &str) -> anyhow::Result<&[f64]> {
        self.headers
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| anyhow!("no column `{name}` (have: {})", self.headers.join(", ")))
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    /// `column` as a [`TimeSeries`] indexed by the `t` column, which must
    /// hold consecutive integers. Without a `t` column rows count from 0.
    pub fn series(&self, column: &str) -> anyhow::Result<TimeSeries> {
        let values = self.column(column)?.to_vec();
        let start = match self.column("t") {
            Ok(t) => {
                let start = t.first().copied().unwrap_or(0.0);
                for (i, &ti) in t.iter().enumerate() {
                    if ti != start + i as f64 {
                        bail!("column `t` is not a dense run of steps (row {})", i + 2);
                    }
                }
                if start < 0.0 || start.fract() != 0.0 {
                    bail!("column `t` must start at a non-negative integer");
                }
                start as u64
            }
            Err(_) => 0,
        };
        Ok(TimeSeries::new(column, start, values))
    }
}
