//! Backward tail integrals on a uniform time grid.
//!
//! On each interval `e^{as} g(s)` is interpolated linearly and integrated
//! against `e^{-as}` exactly, so the rule is exact for `g = e^{-as}` and its
//! weights are positive. The part of the integrals beyond the last node is
//! neglected.

/// Below this value of `a h` the fitted weights are replaced by the plain
/// trapezoid rule to avoid cancellation.
const FIT_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub struct TailQuadrature {
    h: f64,
    /// weights of `g_m` and `g_{m+1}` in `int_{s_m}^{s_{m+1}} g`
    w0: f64,
    w1: f64,
    /// weights of `g_m` and `g_{m+1}` in `int_{s_m}^{s_{m+1}} (s - s_m) g`
    m0: f64,
    m1: f64,
}

impl TailQuadrature {
    pub fn new(a: f64, h: f64) -> Self {
        let u = a * h;
        if u.abs() < FIT_THRESHOLD {
            return Self {
                h,
                w0: 0.5 * h,
                w1: 0.5 * h,
                m0: h * h / 6.0,
                m1: h * h / 3.0,
            };
        }
        let emu = (-u).exp();
        // int_0^h tau^p e^{-a tau} d tau for p = 0, 1, 2
        let j0 = -(-u).exp_m1() / a;
        let j1 = (1.0 - emu * (1.0 + u)) / (a * a);
        let j2 = (2.0 - emu * (u * u + 2.0 * u + 2.0)) / (a * a * a);
        let eah = u.exp();
        let i1 = j1 / h;
        let i0 = j0 - i1;
        let k1 = j2 / h;
        let k0 = j1 - k1;
        Self {
            h,
            w0: i0,
            w1: i1 * eah,
            m0: k0,
            m1: k1 * eah,
        }
    }

    /// `r0[n] = int_{t_n}^T g` and `r1[n] = int_{t_n}^T (s - t_n) g` from samples `g`.
    pub fn tails(&self, g: &[f64], r0: &mut [f64], r1: &mut [f64]) {
        let nt = g.len();
        debug_assert!(r0.len() == nt && r1.len() == nt);
        r0[nt - 1] = 0.0;
        r1[nt - 1] = 0.0;
        for n in (0..nt - 1).rev() {
            let interval = self.w0 * g[n] + self.w1 * g[n + 1];
            let moment = self.m0 * g[n] + self.m1 * g[n + 1];
            r1[n] = r1[n + 1] + self.h * r0[n + 1] + moment;
            r0[n] = r0[n + 1] + interval;
        }
    }

    pub fn r0(&self, g: &[f64], r0: &mut [f64]) {
        let nt = g.len();
        r0[nt - 1] = 0.0;
        for n in (0..nt - 1).rev() {
            r0[n] = r0[n + 1] + self.w0 * g[n] + self.w1 * g[n + 1];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(t0: f64, h: f64, nt: usize) -> Vec<f64> {
        (0..nt).map(|n| t0 + h * n as f64).collect()
    }

    #[test]
    fn exact_for_the_decay_profile() {
        let (a, h, nt) = (1.0, 0.2, 176);
        let t = grid(8.0, h, nt);
        let tend = t[nt - 1];
        let g: Vec<f64> = t.iter().map(|&s| (-a * s).exp()).collect();
        let q = TailQuadrature::new(a, h);
        let (mut r0, mut r1) = (vec![0.0; nt], vec![0.0; nt]);
        q.tails(&g, &mut r0, &mut r1);
        for n in 0..nt {
            let tn = t[n];
            let e0 = ((-a * tn).exp() - (-a * tend).exp()) / a;
            let e1 = (-a * tn).exp() / (a * a) - (-a * tend).exp() * ((tend - tn) / a + 1.0 / (a * a));
            assert!((r0[n] - e0).abs() <= 1e-14 * (-a * tn).exp(), "n={n}");
            assert!((r1[n] - e1).abs() <= 1e-14 * (-a * tn).exp(), "n={n}");
        }
    }

    #[test]
    fn second_order_for_smooth_integrands() {
        let a = 1.0;
        let f = |s: f64| (-a * s).exp() * (1.0 + 0.5 * (0.3 * s).sin());
        let errors: Vec<f64> = [0.4, 0.2, 0.1]
            .iter()
            .map(|&h| {
                let nt = (8.0 / h) as usize + 1;
                let t = grid(2.0, h, nt);
                let g: Vec<f64> = t.iter().map(|&s| f(s)).collect();
                let (mut r0, mut r1) = (vec![0.0; nt], vec![0.0; nt]);
                TailQuadrature::new(a, h).tails(&g, &mut r0, &mut r1);
                // reference by fine Simpson on [2, 10]
                let m = 20_000;
                let hh = 8.0 / m as f64;
                let mut acc = 0.0;
                for i in 0..=m {
                    let s = 2.0 + hh * i as f64;
                    let w = if i == 0 || i == m {
                        1.0
                    } else if i % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    acc += w * (s - 2.0) * f(s);
                }
                (r1[0] - acc * hh / 3.0).abs()
            })
            .collect();
        assert!(errors[0] / errors[1] > 3.5 && errors[1] / errors[2] > 3.5, "{errors:?}");
    }

    #[test]
    fn positive_weights() {
        for &(a, h) in &[(1.0, 0.2), (2.0, 0.5), (1e-9, 0.1)] {
            let q = TailQuadrature::new(a, h);
            assert!(q.w0 > 0.0 && q.w1 > 0.0 && q.m0 > 0.0 && q.m1 > 0.0);
        }
    }
}
