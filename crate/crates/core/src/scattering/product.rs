//! Weighted norm of a product of `n >= 2` factors:
//! `|prod f_i|_(a,t0,k) <= C prod |f_i|_(a,t0,k_i)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{weighted_norm_series, NormKind};

/// `C = sup_{t >= t0} t^s e^{-(n-1)at}` with `s = sum k_i - k`: the value at
/// `t0` when `t0 >= s / ((n-1) a)`, otherwise the value at that maximiser.
pub fn product_constant(a: f64, t0: f64, orders: &[u32], k: u32) -> f64 {
    let n = orders.len() as f64;
    let s = orders.iter().map(|&o| o as f64).sum::<f64>() - k as f64;
    let t1 = s / ((n - 1.0) * a);
    let t = if t0 >= t1 { t0 } else { t1 };
    t.powf(s) * (-(n - 1.0) * a * t).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductCheck {
    pub constant: f64,
    /// `|prod f_i|_(a,t0,k)` on the samples.
    pub lhs: f64,
    /// `C prod |f_i|_(a,t0,k_i)` on the samples.
    pub rhs: f64,
    pub pass: bool,
}

/// Checks the product estimate on sampled factors `(values, k_i)` at `times`.
pub fn check_nonlinear_norm_product(
    factors: &[(Vec<f64>, u32)],
    times: &[f64],
    a: f64,
    t0: f64,
    k: u32,
) -> Result<ProductCheck> {
    if factors.len() < 2 {
        return Err(Error::param("factors", "need at least two factors"));
    }
    let mut product = vec![1.0; times.len()];
    let mut rhs = 1.0;
    for (values, ki) in factors {
        if values.len() != times.len() {
            return Err(Error::GridMismatch(
                "factor length differs from the time samples".into(),
            ));
        }
        rhs *= weighted_norm_series(NormKind::new(a, t0, *ki), times, values)?.value;
        product.iter_mut().zip(values).for_each(|(p, v)| *p *= v);
    }
    let orders: Vec<u32> = factors.iter().map(|f| f.1).collect();
    let constant = product_constant(a, t0, &orders, k);
    let lhs = weighted_norm_series(NormKind::new(a, t0, k), times, &product)?.value;
    let rhs = constant * rhs;
    Ok(ProductCheck {
        constant,
        lhs,
        rhs,
        pass: lhs <= rhs * (1.0 + 1e-12),
    })
}
