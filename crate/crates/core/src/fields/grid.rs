use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::DampingParams;

/// Uniform time nodes `t_n = t0 + n dt`, `n = 0..nt`, with `t_{nt-1} = T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t0: f64,
    t_end: f64,
    nt: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t_end: f64, nt: usize) -> Result<Self> {
        if !(t0.is_finite() && t_end.is_finite()) || t_end <= t0 {
            return Err(Error::InvalidGrid(format!("need t0 < T, got t0 = {t0}, T = {t_end}")));
        }
        if nt < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 time nodes, got {nt}")));
        }
        Ok(Self { t0, t_end, nt })
    }

    /// `T = t0 + 35/a` with spacing at most `0.2/a`.
    pub fn default_for(params: &DampingParams) -> Self {
        let t_end = params.t0 + 35.0 / params.a;
        // 175 steps of 0.2 / a
        let nt = 176;
        Self {
            t0: params.t0,
            t_end,
            nt,
        }
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn len(&self) -> usize {
        self.nt
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        (self.t_end - self.t0) / (self.nt - 1) as f64
    }

    pub fn time(&self, n: usize) -> f64 {
        if n + 1 == self.nt {
            self.t_end
        } else {
            self.t0 + n as f64 * self.step()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.nt).map(|n| self.time(n)).collect()
    }

    /// `e^{-a (T - t0)}`, the relative weight of the neglected tail.
    pub fn tail_weight(&self, a: f64) -> f64 {
        (-a * (self.t_end - self.t0)).exp()
    }
}

/// `nx` equispaced points `x_i = 2 pi i / nx` on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct XGrid {
    nx: usize,
}

impl XGrid {
    pub fn new(nx: usize) -> Result<Self> {
        if nx < 4 || !nx.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("nx must be a power of two >= 4, got {nx}")));
        }
        Ok(Self { nx })
    }

    pub fn len(&self) -> usize {
        self.nx
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        2.0 * PI / self.nx as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.dx() * i as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.point(i)).collect()
    }

    /// Largest wavenumber resolved below the Nyquist mode.
    pub fn max_wavenumber(&self) -> usize {
        self.nx / 2 - 1
    }
}

/// `XGrid` times `nv` uniform velocities on `[-v_max, v_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    x: XGrid,
    nv: usize,
    v_max: f64,
}

impl PhaseGrid {
    pub fn new(x: XGrid, nv: usize, v_max: f64) -> Result<Self> {
        if nv < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 velocity nodes, got {nv}")));
        }
        if !(v_max > 0.0) || !v_max.is_finite() {
            return Err(Error::InvalidGrid(format!("v_max must be positive, got {v_max}")));
        }
        Ok(Self { x, nv, v_max })
    }

    pub fn x_grid(&self) -> XGrid {
        self.x
    }

    pub fn nx(&self) -> usize {
        self.x.len()
    }

    pub fn nv(&self) -> usize {
        self.nv
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    pub fn dv(&self) -> f64 {
        2.0 * self.v_max / (self.nv - 1) as f64
    }

    pub fn v(&self, j: usize) -> f64 {
        -self.v_max + self.dv() * j as f64
    }

    /// Trapezoid weight of velocity node `j`.
    pub fn v_weight(&self, j: usize) -> f64 {
        if j == 0 || j + 1 == self.nv {
            0.5 * self.dv()
        } else {
            self.dv()
        }
    }

    /// Phase-space measure `dx dv` carried by node `(i, j)`.
    pub fn weight(&self, j: usize) -> f64 {
        self.x.dx() * self.v_weight(j)
    }

    pub fn nodes(&self) -> usize {
        self.x.len() * self.nv
    }

    /// Flat index of `(i, j)`, velocity fastest.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.nv + j
    }

    pub fn split(&self, node: usize) -> (usize, usize) {
        (node / self.nv, node % self.nv)
    }

    /// `int_{|v| > v_max} a2 / (1 + v^4) dv <= 2 a2 / (3 v_max^3)`, the mass a
    /// profile obeying the decay bound can lose to velocity truncation, per unit x.
    pub fn truncated_mass_bound(&self, a2: f64) -> f64 {
        2.0 * a2 / (3.0 * self.v_max.powi(3))
    }
}
