//! Collocation nodes on `[-1, 1]`, orthonormal Legendre polynomials and the
//! linear rules that turn node values into z-derivatives at a point.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NodeFamily {
    #[default]
    GaussLegendre,
    /// Chebyshev points of the first kind.
    Chebyshev,
}

/// Nodes in increasing order with weights of the uniform probability measure
/// `dz / 2` on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollocationNodes {
    pub family: NodeFamily,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CollocationNodes {
    pub fn new(family: NodeFamily, n: usize) -> Result<Self> {
        let n1 = NonZeroUsize::new(n).ok_or_else(|| Error::param("n_z", "need at least one node"))?;
        let mut nodes: Vec<f64> = match family {
            NodeFamily::GaussLegendre => GaussLegendre::new(n1).nodes().copied().collect(),
            NodeFamily::Chebyshev => (0..n)
                .map(|j| ((2 * j + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos())
                .collect(),
        };
        nodes.sort_by(f64::total_cmp);
        symmetrize(&mut nodes);
        let weights = match family {
            NodeFamily::GaussLegendre => {
                let mut pairs: Vec<(f64, f64)> = GaussLegendre::new(n1).as_node_weight_pairs().to_vec();
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut w: Vec<f64> = pairs.iter().map(|p| 0.5 * p.1).collect();
                symmetrize_weights(&mut w);
                w
            }
            NodeFamily::Chebyshev => interpolatory_weights(&nodes)?,
        };
        Ok(Self { family, nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `V[j][m] = P_m(z_j)` in the orthonormal basis, `m < N`.
    fn vandermonde(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |j, m| legendre_orthonormal(m, self.nodes[j]))
    }

    /// Rule mapping node values to gPC coefficients: `c_m = sum_j R[m][j] u_j`.
    pub fn projection(&self) -> Result<DMatrix<f64>> {
        let n = self.len();
        match self.family {
            NodeFamily::GaussLegendre => Ok(DMatrix::from_fn(n, n, |m, j| {
                self.weights[j] * legendre_orthonormal(m, self.nodes[j])
            })),
            NodeFamily::Chebyshev => self
                .vandermonde()
                .try_inverse()
                .ok_or_else(|| Error::param("n_z", "collocation matrix is singular")),
        }
    }

    /// Weights `d_j` with `sum_j d_j u_j = d^k/dz^k` of the interpolant at `z0`.
    pub fn spectral_rule(&self, k: usize, z0: f64) -> Result<Vec<f64>> {
        let n = self.len();
        if k > 0 && k + 2 > n {
            return Err(Error::DerivativeOrder {
                order: k,
                needed: k + 2,
                available: n,
            });
        }
        let proj = self.projection()?;
        let p: Vec<f64> = (0..n).map(|m| legendre_orthonormal_derivative(m, k, z0)).collect();
        Ok((0..n).map(|j| (0..n).map(|m| p[m] * proj[(m, j)]).sum()).collect())
    }

    /// Finite-difference rule on the `stencil` nodes closest to `z0`, as
    /// `(node index, weight)` pairs.
    pub fn finite_difference_rule(&self, k: usize, z0: f64, stencil: usize) -> Result<Vec<(usize, f64)>> {
        let n = self.len();
        let stencil = stencil.min(n);
        if k > 0 && (k + 2 > n || stencil < k + 1) {
            return Err(Error::DerivativeOrder {
                order: k,
                needed: k + 2,
                available: n,
            });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            (self.nodes[a] - z0)
                .abs()
                .total_cmp(&(self.nodes[b] - z0).abs())
                .then(a.cmp(&b))
        });
        let mut picked: Vec<usize> = order[..stencil].to_vec();
        picked.sort_unstable();
        let xs: Vec<f64> = picked.iter().map(|&j| self.nodes[j]).collect();
        let w = fornberg_weights(z0, &xs, k);
        Ok(picked.into_iter().zip(w).collect())
    }
}

fn symmetrize(nodes: &mut [f64]) {
    let n = nodes.len();
    for j in 0..n / 2 {
        let m = 0.5 * (nodes[n - 1 - j] - nodes[j]);
        nodes[j] = -m;
        nodes[n - 1 - j] = m;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
}

fn symmetrize_weights(w: &mut [f64]) {
    let n = w.len();
    for j in 0..n / 2 {
        let m = 0.5 * (w[j] + w[n - 1 - j]);
        w[j] = m;
        w[n - 1 - j] = m;
    }
}

/// Weights integrating the interpolant exactly against `dz / 2`.
fn interpolatory_weights(nodes: &[f64]) -> Result<Vec<f64>> {
    let n = nodes.len();
    let vt = DMatrix::from_fn(n, n, |m, j| legendre_orthonormal(m, nodes[j]));
    let mut rhs = DVector::zeros(n);
    rhs[0] = 1.0;
    let w = vt
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::param("n_z", "collocation matrix is singular"))?;
    Ok(w.iter().copied().collect())
}

/// `sqrt(2m + 1) P_m(z)`, orthonormal under `dz / 2`.
pub fn legendre_orthonormal(m: usize, z: f64) -> f64 {
    legendre_orthonormal_derivative(m, 0, z)
}

/// `d^k/dz^k` of the orthonormal Legendre polynomial of degree `m`.
pub fn legendre_orthonormal_derivative(m: usize, k: usize, z: f64) -> f64 {
    (2.0 * m as f64 + 1.0).sqrt() * legendre_derivatives(m, k, z)[k]
}

/// `[P_m(z), P_m'(z), ..., P_m^{(k)}(z)]` from
/// `(m+1) P_{m+1}^{(r)} = (2m+1)(z P_m^{(r)} + r P_m^{(r-1)}) - m P_{m-1}^{(r)}`.
pub fn legendre_derivatives(m: usize, k: usize, z: f64) -> Vec<f64> {
    let mut prev = vec![0.0; k + 1];
    let mut cur = vec![0.0; k + 1];
    cur[0] = 1.0;
    for deg in 0..m {
        let d = deg as f64;
        let mut next = vec![0.0; k + 1];
        for r in 0..=k {
            let lower = if r > 0 { r as f64 * cur[r - 1] } else { 0.0 };
            next[r] = ((2.0 * d + 1.0) * (z * cur[r] + lower) - d * prev[r]) / (d + 1.0);
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// Weights for the `k`-th derivative at `z0` from values at `xs`.
pub fn fornberg_weights(z0: f64, xs: &[f64], k: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; k + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(k);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for s in (1..=mn).rev() {
                    c[i][s] = c1 * (s as f64 * c[i - 1][s - 1] - c5 * c[i - 1][s]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for s in (1..=mn).rev() {
                c[j][s] = (c4 * c[j][s] - s as f64 * c[j][s - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[k]).collect()
}
