use num_complex::Complex64;
use rustfft::FftPlanner;

/// Modes below this fraction of the slice's total amplitude are skipped when
/// evaluating off-grid.
const ACTIVE_CUTOFF: f64 = 1e-18;

/// `c_k = (1/N) sum_i f_i e^{-ik x_i}` for all `k = 0..N`.
pub fn forward(values: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// Grid values of `sum_{k=0}^{N/2} c_k e^{ikx} + conj`, the inverse of
/// [`forward`] restricted to a real signal; `half[k]` for `k = 0..=N/2`.
pub fn inverse_real(half: &[Complex64], n: usize) -> Vec<f64> {
    assert_eq!(half.len(), n / 2 + 1);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    buf[0] = Complex64::new(half[0].re, 0.0);
    for k in 1..n / 2 {
        buf[k] = half[k];
        buf[n - k] = half[k].conj();
    }
    buf[n / 2] = Complex64::new(half[n / 2].re, 0.0);
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|c| c.re).collect()
}

/// Trigonometric interpolant of one real, periodic slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceModes {
    /// `c_k` for `k = 0..=N/2`; the Nyquist entry is real.
    pub modes: Vec<Complex64>,
    active: usize,
}

impl SliceModes {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        let full = forward(values);
        let mut modes: Vec<Complex64> = full[..=n / 2].to_vec();
        modes[0].im = 0.0;
        modes[n / 2].im = 0.0;
        Self::from_modes(modes)
    }

    pub fn from_modes(modes: Vec<Complex64>) -> Self {
        let total: f64 = modes.iter().map(|c| c.norm()).sum();
        let active = modes
            .iter()
            .rposition(|c| c.norm() > ACTIVE_CUTOFF * total)
            .map_or(0, |k| k + 1);
        Self { modes, active }
    }

    pub fn nx(&self) -> usize {
        2 * (self.modes.len() - 1)
    }

    fn nyquist(&self) -> usize {
        self.modes.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.active == 0
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.active == 0 {
            return 0.0;
        }
        let e = Complex64::from_polar(1.0, x);
        let mut p = Complex64::new(1.0, 0.0);
        let mut acc = self.modes[0].re;
        let ny = self.nyquist();
        for k in 1..self.active {
            p *= e;
            if k == ny {
                acc += self.modes[k].re * p.re;
            } else {
                acc += 2.0 * (self.modes[k] * p).re;
            }
        }
        acc
    }

    /// Value and x-derivative; the derivative drops the Nyquist mode, matching
    /// the spectral derivative of the table.
    pub fn eval_with_dx(&self, x: f64) -> (f64, f64) {
        if self.active == 0 {
            return (0.0, 0.0);
        }
        let e = Complex64::from_polar(1.0, x);
        let mut p = Complex64::new(1.0, 0.0);
        let mut f = self.modes[0].re;
        let mut df = 0.0;
        let ny = self.nyquist();
        for k in 1..self.active {
            p *= e;
            let cp = self.modes[k] * p;
            if k == ny {
                f += cp.re;
            } else {
                f += 2.0 * cp.re;
                df -= 2.0 * k as f64 * cp.im;
            }
        }
        (f, df)
    }

    /// Value and the first two derivatives of the full interpolant.
    fn eval_derivs(&self, x: f64) -> (f64, f64, f64) {
        let e = Complex64::from_polar(1.0, x);
        let mut p = Complex64::new(1.0, 0.0);
        let mut f = self.modes[0].re;
        let (mut d1, mut d2) = (0.0, 0.0);
        let ny = self.nyquist();
        for k in 1..self.active {
            p *= e;
            let kk = k as f64;
            if k == ny {
                let c = self.modes[k].re;
                f += c * p.re;
                d1 -= kk * c * p.im;
                d2 -= kk * kk * c * p.re;
            } else {
                let cp = self.modes[k] * p;
                f += 2.0 * cp.re;
                d1 -= 2.0 * kk * cp.im;
                d2 -= 2.0 * kk * kk * cp.re;
            }
        }
        (f, d1, d2)
    }

    /// `sup_x |f(x)|` of the interpolant: dense oversampling followed by Newton
    /// refinement of the best candidates. Never below the grid maximum.
    pub fn continuous_sup(&self, grid_max: f64) -> f64 {
        if self.active == 0 {
            return grid_max;
        }
        let n = self.nx() * 16;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let samples: Vec<f64> = (0..n).map(|i| self.eval(h * i as f64).abs()).collect();
        let mut peaks: Vec<(f64, usize)> = (0..n)
            .filter(|&i| {
                let l = samples[(i + n - 1) % n];
                let r = samples[(i + 1) % n];
                samples[i] >= l && samples[i] >= r
            })
            .map(|i| (samples[i], i))
            .collect();
        peaks.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut best = grid_max.max(peaks.first().map_or(0.0, |p| p.0));
        for &(_, i) in peaks.iter().take(4) {
            let mut x = h * i as f64;
            for _ in 0..30 {
                let (_, d1, d2) = self.eval_derivs(x);
                if d2 == 0.0 {
                    break;
                }
                let step = d1 / d2;
                if !step.is_finite() || step.abs() > h {
                    break;
                }
                x -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            best = best.max(self.eval(x).abs());
        }
        best
    }
}
