//! Output files. Data files carry no timestamps and use a fixed field order
//! and `{:.16e}` formatting so identical runs give identical bytes.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use radial_dirac::dynamics::{RunRecord, Snapshot};
use radial_dirac::spinor::reconstruct_cartesian;
use radial_dirac::{RadialGrid, SpinorField};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const SNAPSHOTS_FILE: &str = "snapshots.jsonl";
pub const META_FILE: &str = "meta.json";

pub fn fmt(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".into(), fmt)
}

pub fn timeseries_header(radii: &[f64]) -> String {
    let mut cols: Vec<String> = [
        "t", "mass", "energy", "j1", "k1t", "j2", "k2t", "j_total", "h_total", "n1", "n2", "n3",
        "n4", "dj_rhs", "dh_rhs", "linf", "l2_rdr", "e_delta",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    cols.extend(radii.iter().map(|r| format!("local_l2@{r}")));
    cols.join(",")
}

pub fn write_timeseries(path: &Path, run: &RunRecord) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", timeseries_header(&run.options.radii))?;
    for k in 0..run.len() {
        let v = &run.virial_series[k];
        let nm = &run.norm_series[k];
        let mut row = vec![
            fmt(run.times[k]),
            fmt(run.mass_series[k]),
            fmt_opt(run.energy_series[k]),
        ];
        row.extend(
            [
                v.j1, v.k1t, v.j2, v.k2t, v.j_total, v.h_total, v.n1, v.n2, v.n3, v.n4, v.dj_rhs,
                v.dh_rhs, nm.l_inf, nm.l2_rdr, nm.e_delta,
            ]
            .map(fmt),
        );
        row.extend(run.local_series[k].iter().map(|&x| fmt(x)));
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartesianRecord {
    pub thetas: Vec<f64>,
    /// Row-major (r, theta).
    pub psi1_re: Vec<f64>,
    pub psi1_im: Vec<f64>,
    pub psi2_re: Vec<f64>,
    pub psi2_im: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRecord {
    pub t: f64,
    pub n: usize,
    pub rmax: f64,
    pub h: f64,
    pub p11: Vec<f64>,
    pub p12: Vec<f64>,
    pub p21: Vec<f64>,
    pub p22: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cartesian: Option<CartesianRecord>,
}

impl SnapshotRecord {
    pub fn new(snap: &Snapshot, vorticity: i64, theta_samples: usize) -> Result<Self, CliError> {
        let f = &snap.field;
        let g = f.grid();
        let cartesian = if theta_samples > 0 {
            let c = reconstruct_cartesian(f, vorticity, theta_samples)?;
            Some(CartesianRecord {
                thetas: c.thetas,
                psi1_re: c.psi1.iter().map(|z| z.re).collect(),
                psi1_im: c.psi1.iter().map(|z| z.im).collect(),
                psi2_re: c.psi2.iter().map(|z| z.re).collect(),
                psi2_im: c.psi2.iter().map(|z| z.im).collect(),
            })
        } else {
            None
        };
        Ok(Self {
            t: snap.t,
            n: g.n(),
            rmax: g.rmax(),
            h: g.h(),
            p11: f.p11.clone(),
            p12: f.p12.clone(),
            p21: f.p21.clone(),
            p22: f.p22.clone(),
            cartesian,
        })
    }

    pub fn to_snapshot(&self, grid: &Arc<RadialGrid>) -> Result<Snapshot, CliError> {
        if grid.n() != self.n || grid.rmax() != self.rmax {
            return Err(CliError::Config(format!(
                "snapshot at t={} has grid (n={}, rmax={}), expected (n={}, rmax={})",
                self.t,
                self.n,
                self.rmax,
                grid.n(),
                grid.rmax()
            )));
        }
        let field = SpinorField::from_components(
            grid.clone(),
            [self.p11.clone(), self.p12.clone(), self.p21.clone(), self.p22.clone()],
        )?;
        Ok(Snapshot { t: self.t, field })
    }
}

pub fn write_snapshots(
    path: &Path,
    snapshots: &[Snapshot],
    vorticity: i64,
    theta_samples: usize,
) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    for s in snapshots {
        let rec = SnapshotRecord::new(s, vorticity, theta_samples)?;
        serde_json::to_writer(&mut w, &rec)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshots(path: &Path) -> Result<Vec<SnapshotRecord>, CliError> {
    let r = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .map_err(|e| CliError::Config(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

/// Writes `rows` under `header` with every value formatted by `fmt`.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt(-2.5), "-2.5000000000000000e0");
        assert_eq!(fmt(f64::NAN), "nan");
        assert_eq!(fmt_opt(None), "nan");
        for x in [0.1, 1.0 / 3.0, -7.25e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn header_column_order() {
        let h = timeseries_header(&[5.0, 10.5]);
        assert!(h.starts_with("t,mass,energy,j1,k1t,j2,k2t,j_total,h_total,n1,n2,n3,n4,dj_rhs,dh_rhs,linf,l2_rdr,e_delta,"));
        assert!(h.ends_with("local_l2@5,local_l2@10.5"));
    }

    #[test]
    fn snapshot_round_trip() {
        let grid = Arc::new(RadialGrid::new(10.0, 64).unwrap());
        let field = SpinorField::from_fn(grid.clone(), |r| {
            [(r / 3.0).sin() / 7.0, 1e-300 * r, -r.exp() / 11.0, 1.0 / (3.0 + r)]
        });
        let snap = Snapshot { t: 0.1 + 0.2, field };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.jsonl");
        write_snapshots(&path, &[snap.clone(), snap.clone()], 1, 8).unwrap();
        let back = read_snapshots(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].to_snapshot(&grid).unwrap(), snap);
        assert_eq!(back[1].cartesian.as_ref().unwrap().thetas.len(), 8);
    }
}
