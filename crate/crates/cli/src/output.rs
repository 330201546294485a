//! CSV and JSON writers for run directories.
//!
//! Density grids are written one site per row in row-major order with the
//! last axis fastest, so `iz` (or `iy` in 2D) cycles first.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use wallwalk::{probability_density, Axis, ObservableSeries, SpinorField};

const AXES: [&str; 3] = ["x", "y", "z"];

pub fn density_file_name(step: u64) -> String {
    format!("density_j{step:04}.csv")
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Per-site probability with site indices and physical coordinates.
pub fn write_density(path: &Path, field: &SpinorField) -> io::Result<()> {
    let g = field.geometry();
    let dims = g.dims();
    let density = probability_density(field);
    let mut out = create(path)?;
    let header: Vec<String> = AXES[..dims]
        .iter()
        .map(|a| format!("i{a}"))
        .chain(AXES[..dims].iter().map(|a| a.to_string()))
        .chain(["density".to_string()])
        .collect();
    writeln!(out, "{}", header.join(","))?;
    let coords: Vec<Vec<f64>> = (0..dims)
        .map(|a| {
            let axis = Axis::from_index(a).unwrap();
            (0..g.size(axis)).map(|k| g.coordinate(axis, k)).collect()
        })
        .collect();
    for (site, p) in density.iter().enumerate() {
        let c = g.coords(site);
        for k in &c[..dims] {
            write!(out, "{k},")?;
        }
        for a in 0..dims {
            write!(out, "{},", coords[a][c[a]])?;
        }
        writeln!(out, "{p:e}")?;
    }
    out.flush()
}

/// One row per recorded step: `j,t,norm,mean_<axis>…,sigma_<axis>…`.
pub fn write_series(path: &Path, series: &ObservableSeries, dims: usize) -> io::Result<()> {
    let mut out = create(path)?;
    let mut header = vec!["j".to_string(), "t".into(), "norm".into()];
    header.extend(AXES[..dims].iter().map(|a| format!("mean_{a}")));
    header.extend(AXES[..dims].iter().map(|a| format!("sigma_{a}")));
    writeln!(out, "{}", header.join(","))?;
    for r in &series.records {
        write!(out, "{},{},{:e}", r.step, r.time, r.norm)?;
        for v in r.mean.iter().chain(&r.sigma) {
            write!(out, ",{v:e}")?;
        }
        writeln!(out)?;
    }
    out.flush()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()
}

/// Writes density snapshots at `j = 0`, every `every` steps and the last step.
pub struct SnapshotWriter {
    dir: PathBuf,
    every: u64,
    last: u64,
    pub written: Vec<String>,
    pub error: Option<(PathBuf, io::Error)>,
}

impl SnapshotWriter {
    pub fn new(dir: &Path, every: u64, last: u64) -> Self {
        Self {
            dir: dir.to_path_buf(),
            every,
            last,
            written: Vec::new(),
            error: None,
        }
    }

    pub fn scheduled(&self, step: u64) -> bool {
        step == 0 || step == self.last || (self.every > 0 && step.is_multiple_of(self.every))
    }
}

impl wallwalk::Observer for SnapshotWriter {
    fn observe(&mut self, step: u64, field: &SpinorField) -> wallwalk::Result<()> {
        if self.error.is_some() || !self.scheduled(step) {
            return Ok(());
        }
        let name = density_file_name(step);
        let path = self.dir.join(&name);
        match write_density(&path, field) {
            Ok(()) => self.written.push(name),
            Err(e) => self.error = Some((path, e)),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use wallwalk::LatticeGeometry;

    #[test]
    fn density_rows_are_row_major() {
        let dir = tempfile::tempdir().unwrap();
        let g = LatticeGeometry::new(&[2, 3], 0.5).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let f = SpinorField::delta(g, &[1, 2], &[zero, one]).unwrap();
        let path = dir.path().join("d.csv");
        write_density(&path, &f).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "ix,iy,x,y,density");
        assert_eq!(lines[1], "0,0,-0.5,-0.5,0e0");
        assert_eq!(lines[2], "0,1,-0.5,0,0e0");
        assert_eq!(lines[6], "1,2,0,0.5,1e0");
        assert_eq!(lines.len(), 7);
    }

    #[test]
    fn schedule_includes_ends() {
        let w = SnapshotWriter::new(Path::new("."), 0, 7);
        let due: Vec<u64> = (0..=7).filter(|&j| w.scheduled(j)).collect();
        assert_eq!(due, vec![0, 7]);
        let w = SnapshotWriter::new(Path::new("."), 3, 7);
        let due: Vec<u64> = (0..=7).filter(|&j| w.scheduled(j)).collect();
        assert_eq!(due, vec![0, 3, 6, 7]);
    }
}
