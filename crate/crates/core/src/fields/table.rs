use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::{TimeGrid, XGrid};
use super::norm::{weighted_norm_slices, NormKind, NormReport, SliceSup};
use super::spectral::{inverse_real, SliceModes};
use crate::error::{Error, Result};

/// Real values on `XGrid x TimeGrid`, stored slice by slice: `values[n * nx + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTable {
    x: XGrid,
    time: TimeGrid,
    values: Vec<f64>,
}

impl FieldTable {
    pub fn new(x: XGrid, time: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != x.len() * time.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                x.len() * time.len(),
                values.len()
            )));
        }
        Ok(Self { x, time, values })
    }

    pub fn zeros(x: XGrid, time: TimeGrid) -> Self {
        Self {
            x,
            time,
            values: vec![0.0; x.len() * time.len()],
        }
    }

    pub fn from_fn(x: XGrid, time: TimeGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(x.len() * time.len());
        for n in 0..time.len() {
            let t = time.time(n);
            for i in 0..x.len() {
                values.push(f(x.point(i), t));
            }
        }
        Self { x, time, values }
    }

    /// Builds the table from per-slice half spectra (`k = 0..=nx/2`).
    pub fn from_modes(x: XGrid, time: TimeGrid, modes: &[Vec<Complex64>]) -> Result<Self> {
        if modes.len() != time.len() {
            return Err(Error::GridMismatch(format!(
                "{} mode slices for {} times",
                modes.len(),
                time.len()
            )));
        }
        let mut values = Vec::with_capacity(x.len() * time.len());
        for m in modes {
            values.extend(inverse_real(m, x.len()));
        }
        Ok(Self { x, time, values })
    }

    pub fn x_grid(&self) -> XGrid {
        self.x
    }

    pub fn time_grid(&self) -> TimeGrid {
        self.time
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize, n: usize) -> f64 {
        self.values[n * self.x.len() + i]
    }

    pub fn slice(&self, n: usize) -> &[f64] {
        let nx = self.x.len();
        &self.values[n * nx..(n + 1) * nx]
    }

    pub fn slice_modes(&self, n: usize) -> SliceModes {
        SliceModes::from_values(self.slice(n))
    }

    pub fn spectral(&self) -> Vec<SliceModes> {
        (0..self.time.len()).map(|n| self.slice_modes(n)).collect()
    }

    pub fn x_mean(&self, n: usize) -> f64 {
        self.slice(n).iter().sum::<f64>() / self.x.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn check_same_grid(&self, other: &FieldTable) -> Result<()> {
        if self.x != other.x || self.time != other.time {
            return Err(Error::GridMismatch("field tables live on different grids".into()));
        }
        Ok(())
    }

    pub fn sub(&self, other: &FieldTable) -> Result<FieldTable> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(FieldTable { values, ..*self })
    }

    pub fn add(&self, other: &FieldTable) -> Result<FieldTable> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(FieldTable { values, ..*self })
    }

    pub fn scaled(&self, factor: f64) -> FieldTable {
        FieldTable {
            values: self.values.iter().map(|v| v * factor).collect(),
            ..*self
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> FieldTable {
        FieldTable {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..*self
        }
    }

    pub fn max_abs_diff(&self, other: &FieldTable) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Trigonometric interpolation in x, linear interpolation in t, zero past
    /// the horizon.
    pub fn interp(&self, x: f64, t: f64) -> Result<f64> {
        let t0 = self.time.t0();
        if t < t0 {
            return Err(Error::TimeBeforeStart { t, t0 });
        }
        if t > self.time.t_end() {
            return Ok(0.0);
        }
        let h = self.time.step();
        let mut s = (t - t0) / h;
        if (s - s.round()).abs() < 1e-9 {
            s = s.round();
        }
        let n = (s.floor() as usize).min(self.time.len() - 2);
        let frac = s - n as f64;
        let at = |n: usize| -> f64 {
            let nx = self.x.len();
            let dx = self.x.dx();
            let r = x.rem_euclid(2.0 * std::f64::consts::PI) / dx;
            let i = r.round();
            if (r - i).abs() < 1e-12 {
                self.value(i as usize % nx, n)
            } else {
                self.slice_modes(n).eval(x)
            }
        };
        if frac == 0.0 {
            return Ok(at(n));
        }
        if frac == 1.0 {
            return Ok(at(n + 1));
        }
        Ok((1.0 - frac) * at(n) + frac * at(n + 1))
    }

    /// x-derivative per slice by the multiplier `ik`; the Nyquist mode is dropped.
    pub fn spectral_dx(&self) -> FieldTable {
        let nx = self.x.len();
        let modes: Vec<Vec<Complex64>> = (0..self.time.len())
            .map(|n| {
                let mut m = self.slice_modes(n).modes;
                for (k, c) in m.iter_mut().enumerate() {
                    *c *= Complex64::new(0.0, k as f64);
                }
                m[0] = Complex64::new(0.0, 0.0);
                m[nx / 2] = Complex64::new(0.0, 0.0);
                m
            })
            .collect();
        FieldTable::from_modes(self.x, self.time, &modes).expect("same grid")
    }

    /// `sup_n t_n^{-k} e^{a t_n} max_i |E(x_i, t_n)|`.
    pub fn weighted_norm(&self, a: f64, k: u32) -> Result<NormReport> {
        let slices: Vec<SliceSup> = (0..self.time.len())
            .map(|n| SliceSup::of(self.slice(n).iter().copied()))
            .collect();
        weighted_norm_slices(NormKind::new(a, self.time.t0(), k), &self.time.times(), &slices)
    }

    /// As [`weighted_norm`](Self::weighted_norm) with the x-sup taken over the
    /// trigonometric interpolant instead of the grid points.
    pub fn weighted_norm_interpolated(&self, a: f64, k: u32) -> Result<NormReport> {
        let slices: Vec<SliceSup> = (0..self.time.len())
            .map(|n| {
                let grid = SliceSup::of(self.slice(n).iter().copied());
                SliceSup {
                    value: self.slice_modes(n).continuous_sup(grid.value),
                    ..grid
                }
            })
            .collect();
        weighted_norm_slices(NormKind::new(a, self.time.t0(), k), &self.time.times(), &slices)
    }

    /// Writes `<stem>.csv` (header `t,x_0,...`) and the `<stem>.json` sidecar
    /// describing the grids; `extra` is stored under `"meta"`.
    pub fn save(&self, dir: &Path, stem: &str, extra: serde_json::Value) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let csv = dir.join(format!("{stem}.csv"));
        let mut out = std::io::BufWriter::new(fs::File::create(&csv)?);
        write!(out, "t")?;
        for i in 0..self.x.len() {
            write!(out, ",x_{i}")?;
        }
        writeln!(out)?;
        for n in 0..self.time.len() {
            write!(out, "{:e}", self.time.time(n))?;
            for v in self.slice(n) {
                write!(out, ",{v:e}")?;
            }
            writeln!(out)?;
        }
        out.flush()?;
        let sidecar = Sidecar {
            x_grid: self.x,
            time_grid: self.time,
            meta: extra,
        };
        fs::write(
            dir.join(format!("{stem}.json")),
            serde_json::to_string_pretty(&sidecar)?,
        )?;
        Ok(csv)
    }

    /// Reads a table written by [`save`](Self::save), given the CSV path.
    pub fn load(csv: &Path) -> Result<FieldTable> {
        let sidecar: Sidecar = serde_json::from_str(&fs::read_to_string(csv.with_extension("json"))?)?;
        let text = fs::read_to_string(csv)?;
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("missing header".into()))?;
        let columns = header.split(',').count();
        if columns != sidecar.x_grid.len() + 1 {
            return Err(Error::Parse(format!(
                "header has {} x columns, sidecar says {}",
                columns - 1,
                sidecar.x_grid.len()
            )));
        }
        let mut values = Vec::with_capacity(sidecar.x_grid.len() * sidecar.time_grid.len());
        for (row, line) in lines.enumerate() {
            let mut cells = line.split(',');
            let t: f64 = parse_cell(cells.next(), row)?;
            let expected = sidecar.time_grid.time(row.min(sidecar.time_grid.len() - 1));
            if (t - expected).abs() > 1e-12 * expected.abs().max(1.0) {
                return Err(Error::Parse(format!(
                    "row {}: time {t} does not match grid time {expected}",
                    row + 2
                )));
            }
            for _ in 0..sidecar.x_grid.len() {
                values.push(parse_cell(cells.next(), row)?);
            }
        }
        FieldTable::new(sidecar.x_grid, sidecar.time_grid, values)
    }
}

fn parse_cell(cell: Option<&str>, row: usize) -> Result<f64> {
    let cell = cell.ok_or_else(|| Error::Parse(format!("row {}: too few columns", row + 2)))?;
    cell.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("row {}: cannot parse `{cell}`", row + 2)))
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    x_grid: XGrid,
    time_grid: TimeGrid,
    meta: serde_json::Value,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grids() -> (XGrid, TimeGrid) {
        (XGrid::new(32).unwrap(), TimeGrid::new(8.0, 12.0, 21).unwrap())
    }

    #[test]
    fn on_grid_interpolation_is_exact() {
        let (x, t) = grids();
        let e = FieldTable::from_fn(x, t, |x, t| (x.sin() + 0.3 * (2.0 * x).cos()) * (-t).exp());
        for &(i, n) in &[(0, 0), (5, 3), (31, 20)] {
            assert_eq!(e.interp(x.point(i), t.time(n)).unwrap(), e.value(i, n));
        }
    }

    #[test]
    fn single_mode_off_grid() {
        let (x, t) = grids();
        let g = |t: f64| (-0.5 * t).exp();
        let e = FieldTable::from_fn(x, t, |x, t| x.cos() * g(t));
        let tn = t.time(7);
        for &q in &[0.05, 1.234, 4.0, 6.2] {
            assert!((e.interp(q, tn).unwrap() - q.cos() * g(tn)).abs() < 1e-15);
        }
        assert_eq!(e.interp(1.0, 12.5).unwrap(), 0.0);
        assert!(e.interp(1.0, 7.9).is_err());
    }

    #[test]
    fn spectral_derivative() {
        let (x, t) = grids();
        let c = FieldTable::from_fn(x, t, |_, t| t);
        assert!(c.spectral_dx().max_abs() < 1e-13);
        let e = FieldTable::from_fn(x, t, |x, _| x.cos());
        let d = e.spectral_dx();
        let expected = FieldTable::from_fn(x, t, |x, _| -x.sin());
        assert!(d.max_abs_diff(&expected).unwrap() < 1e-14);
        let e = FieldTable::from_fn(x, t, |x, _| (3.0 * x).cos());
        let expected = FieldTable::from_fn(x, t, |x, _| -3.0 * (3.0 * x).sin());
        assert!(e.spectral_dx().max_abs_diff(&expected).unwrap() < 1e-13);
    }

    #[test]
    fn csv_round_trip() {
        let (x, t) = grids();
        let e = FieldTable::from_fn(x, t, |x, t| (x - 0.1 * t).sin() * (-t).exp() * 1e-3);
        let dir = tempfile::tempdir().unwrap();
        let path = e.save(dir.path(), "field", serde_json::json!({"hash": "abc"})).unwrap();
        let back = FieldTable::load(&path).unwrap();
        assert_eq!(back.x_grid(), x);
        assert_eq!(back.time_grid(), t);
        assert!(back.max_abs_diff(&e).unwrap() <= 1e-12 * e.max_abs());
        assert_eq!(back, e);
    }

    #[test]
    fn interpolated_norm_dominates_grid_norm() {
        let (x, t) = grids();
        let e = FieldTable::from_fn(x, t, |x, t| (x - 0.05).sin() * (-t).exp());
        let g = e.weighted_norm(1.0, 0).unwrap();
        let c = e.weighted_norm_interpolated(1.0, 0).unwrap();
        assert!(c.value >= g.value);
        assert!((c.value - 1.0).abs() < 1e-13);
    }
}
