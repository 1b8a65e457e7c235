//! The time-asymptotic profile `f*(x, v, z) = scale * s(v) * sum_k c_k(z) e^{ikx}`
//! and the checks of its smoothness and decay hypotheses.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Velocity factor of the profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum VelocityShape {
    /// `e^{-v^2}`
    Gaussian,
    /// `sech(rate * v)`
    Sech { rate: f64 },
}

impl VelocityShape {
    pub fn value(&self, v: f64) -> f64 {
        match *self {
            VelocityShape::Gaussian => (-v * v).exp(),
            VelocityShape::Sech { rate } => sech(rate * v),
        }
    }

    pub fn derivative(&self, v: f64) -> f64 {
        match *self {
            VelocityShape::Gaussian => -2.0 * v * (-v * v).exp(),
            VelocityShape::Sech { rate } => -rate * sech(rate * v) * (rate * v).tanh(),
        }
    }

    /// `s(v + dv) - s(v)` without cancellation for small `dv`.
    pub fn difference(&self, v: f64, dv: f64) -> f64 {
        match *self {
            VelocityShape::Gaussian => (-v * v).exp() * (-(2.0 * v + dv) * dv).exp_m1(),
            VelocityShape::Sech { rate } => {
                let u = rate * v;
                let d = rate * dv;
                // cosh(u+d) - cosh(u) = 2 sinh(u + d/2) sinh(d/2)
                let dcosh = 2.0 * (u + 0.5 * d).sinh() * (0.5 * d).sinh();
                -dcosh * sech(u) * sech(u + d)
            }
        }
    }

    /// `int s(v) e^{-i w v} dv` (real since `s` is even).
    pub fn transform(&self, w: f64) -> f64 {
        match *self {
            VelocityShape::Gaussian => PI.sqrt() * (-w * w / 4.0).exp(),
            VelocityShape::Sech { rate } => PI / rate * sech(PI * w / (2.0 * rate)),
        }
    }

    /// `int s(v) dv`.
    pub fn integral(&self) -> f64 {
        self.transform(0.0)
    }

    /// `sup_w |transform(w)| e^{a|w|}`, or `None` when it is infinite.
    pub fn transform_envelope(&self, a: f64) -> Option<f64> {
        match *self {
            VelocityShape::Gaussian => Some(PI.sqrt() * (a * a).exp()),
            VelocityShape::Sech { rate } => {
                let beta = PI / (2.0 * rate);
                let amp = PI / rate;
                if beta < a {
                    None
                } else if beta == a {
                    // 2 e^{au} / (e^{au} + e^{-au}) increases towards 2.
                    Some(2.0 * amp)
                } else if a <= 0.0 {
                    Some(amp)
                } else {
                    let u = ((beta + a) / (beta - a)).ln() / (2.0 * beta);
                    Some(amp * sech(beta * u) * (a * u).exp())
                }
            }
        }
    }

    /// Half-width beyond which `s` is below `1e-16` relative to its peak.
    pub fn default_v_max(&self) -> f64 {
        match *self {
            VelocityShape::Gaussian => 6.0,
            VelocityShape::Sech { rate } => 8.0 / rate * (2.0_f64).asinh(),
        }
    }
}

fn sech(x: f64) -> f64 {
    let ax = x.abs();
    if ax > 700.0 {
        return 0.0;
    }
    let e = (-ax).exp();
    2.0 * e / (1.0 + e * e)
}

/// Dependence of one Fourier coefficient on the random parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ZDependence {
    /// `sum_p coeffs[p] z^p`
    Polynomial { coeffs: Vec<Complex64> },
    /// `offset + cos_amp cos(freq z) + sin_amp sin(freq z)`
    Trigonometric {
        offset: Complex64,
        cos_amp: Complex64,
        sin_amp: Complex64,
        frequency: f64,
    },
}

impl ZDependence {
    pub fn constant(c: Complex64) -> Self {
        ZDependence::Polynomial { coeffs: vec![c] }
    }

    pub fn eval(&self, z: f64) -> Complex64 {
        self.derivative(z, 0)
    }

    /// `d^order/dz^order` evaluated at `z`.
    pub fn derivative(&self, z: f64, order: u32) -> Complex64 {
        match self {
            ZDependence::Polynomial { coeffs } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (p, c) in coeffs.iter().enumerate().rev() {
                    let p = p as u32;
                    if p < order {
                        break;
                    }
                    let falling: f64 = ((p - order + 1)..=p).map(f64::from).product();
                    acc += c * falling * z.powi((p - order) as i32);
                }
                acc
            }
            ZDependence::Trigonometric {
                offset,
                cos_amp,
                sin_amp,
                frequency,
            } => {
                let w = *frequency;
                let phase = w * z + order as f64 * PI / 2.0;
                let scale = w.powi(order as i32);
                let base = if order == 0 { *offset } else { Complex64::new(0.0, 0.0) };
                base + cos_amp * scale * phase.cos() + sin_amp * scale * phase.sin()
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            ZDependence::Polynomial { coeffs } => coeffs.iter().skip(1).all(|c| c.norm() == 0.0),
            ZDependence::Trigonometric {
                cos_amp,
                sin_amp,
                frequency,
                ..
            } => *frequency == 0.0 || (cos_amp.norm() == 0.0 && sin_amp.norm() == 0.0),
        }
    }
}

/// A retained x-mode; the `-k` partner is the complex conjugate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XMode {
    pub wavenumber: u32,
    pub coefficient: ZDependence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    modes: Vec<XMode>,
    shape: VelocityShape,
    scale: f64,
}

impl ProfileSpec {
    pub const DEFAULT_MAX_WAVENUMBER: u32 = 8;

    pub fn new(modes: Vec<XMode>, shape: VelocityShape, scale: f64) -> Result<Self> {
        if !scale.is_finite() {
            return Err(Error::InvalidProfile(format!("scale must be finite, got {scale}")));
        }
        if let VelocityShape::Sech { rate } = shape {
            if !(rate > 0.0) || !rate.is_finite() {
                return Err(Error::InvalidProfile(format!("sech rate must be positive, got {rate}")));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for m in &modes {
            if !seen.insert(m.wavenumber) {
                return Err(Error::InvalidProfile(format!(
                    "wavenumber {} listed twice",
                    m.wavenumber
                )));
            }
            if m.wavenumber == 0 && !zero_mode_is_real(&m.coefficient) {
                return Err(Error::InvalidProfile(
                    "the k = 0 coefficient must be real for a real profile".into(),
                ));
            }
        }
        let mut modes = modes;
        modes.sort_by_key(|m| m.wavenumber);
        Ok(Self { modes, shape, scale })
    }

    /// A profile with no modes at all.
    pub fn zero(shape: VelocityShape) -> Self {
        Self {
            modes: Vec::new(),
            shape,
            scale: 1.0,
        }
    }

    pub fn modes(&self) -> &[XMode] {
        &self.modes
    }

    pub fn shape(&self) -> VelocityShape {
        self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn max_wavenumber(&self) -> u32 {
        self.modes.iter().map(|m| m.wavenumber).max().unwrap_or(0)
    }

    pub fn is_z_independent(&self) -> bool {
        self.modes.iter().all(|m| m.coefficient.is_constant())
    }

    /// True when all modes with `k != 0` vanish identically.
    pub fn is_homogeneous(&self) -> bool {
        self.modes.iter().all(|m| {
            m.wavenumber == 0
                || match &m.coefficient {
                    ZDependence::Polynomial { coeffs } => coeffs.iter().all(|c| c.norm() == 0.0),
                    ZDependence::Trigonometric {
                        offset,
                        cos_amp,
                        sin_amp,
                        ..
                    } => offset.norm() == 0.0 && cos_amp.norm() == 0.0 && sin_amp.norm() == 0.0,
                }
        })
    }

    /// `d^order c_k / dz^order` for a signed wavenumber, without the scale.
    pub fn coefficient(&self, k: i64, z: f64, order: u32) -> Complex64 {
        let kk = k.unsigned_abs() as u32;
        match self.modes.iter().find(|m| m.wavenumber == kk) {
            None => Complex64::new(0.0, 0.0),
            Some(m) => {
                let c = m.coefficient.derivative(z, order);
                if k < 0 {
                    c.conj()
                } else if k == 0 {
                    Complex64::new(c.re, 0.0)
                } else {
                    c
                }
            }
        }
    }

    /// `sum_k d^order c_k e^{ikx}` and its x-derivative, both real.
    fn x_series(&self, x: f64, z: f64, order: u32) -> (f64, f64) {
        let mut value = 0.0;
        let mut dx = 0.0;
        for m in &self.modes {
            let c = m.coefficient.derivative(z, order);
            if m.wavenumber == 0 {
                value += c.re;
                continue;
            }
            let k = m.wavenumber as f64;
            let e = Complex64::from_polar(1.0, k * x);
            let ce = c * e;
            value += 2.0 * ce.re;
            dx += 2.0 * (ce * Complex64::new(0.0, k)).re;
        }
        (value, dx)
    }

    pub fn eval(&self, x: f64, v: f64, z: f64) -> f64 {
        self.eval_z_derivative(x, v, z, 0)
    }

    /// `(d f*/dx, d f*/dv)`.
    pub fn eval_grad(&self, x: f64, v: f64, z: f64) -> (f64, f64) {
        self.grad_z_derivative(x, v, z, 0)
    }

    /// `d^order f* / dz^order`.
    pub fn eval_z_derivative(&self, x: f64, v: f64, z: f64, order: u32) -> f64 {
        let (series, _) = self.x_series(x, z, order);
        self.scale * series * self.shape.value(v)
    }

    pub fn grad_z_derivative(&self, x: f64, v: f64, z: f64, order: u32) -> (f64, f64) {
        let (series, dx) = self.x_series(x, z, order);
        (
            self.scale * dx * self.shape.value(v),
            self.scale * series * self.shape.derivative(v),
        )
    }

    /// `f*(x + dx, v + dv) - f*(x, v)`, accurate to relative precision even when
    /// the displacement is far below the resolution of `x` and `v`.
    pub fn increment(&self, x: f64, v: f64, dx: f64, dv: f64, z: f64) -> f64 {
        let s_new = self.shape.value(v + dv);
        let ds = self.shape.difference(v, dv);
        let mut acc = 0.0;
        for m in &self.modes {
            let c = m.coefficient.eval(z);
            if m.wavenumber == 0 {
                acc += c.re * ds;
                continue;
            }
            let k = m.wavenumber as f64;
            let half = 0.5 * k * dx;
            // e^{ik dx} - 1
            let shift = Complex64::new(-2.0 * half.sin().powi(2), (k * dx).sin());
            let ce = c * Complex64::from_polar(1.0, k * x);
            acc += 2.0 * (ce * (shift * s_new + ds)).re;
        }
        self.scale * acc
    }

    /// `(1/2pi) int int f* e^{i(kx x + kv v)} dv dx = c_{-kx} S(kv) scale`.
    pub fn fourier(&self, kx: i64, kv: f64, z: f64) -> Complex64 {
        self.coefficient(-kx, z, 0) * self.shape.transform(kv) * self.scale
    }

    /// Same as [`fourier`](Self::fourier) for `d^order f*/dz^order`.
    pub fn fourier_z_derivative(&self, kx: i64, kv: f64, z: f64, order: u32) -> Complex64 {
        self.coefficient(-kx, z, order) * self.shape.transform(kv) * self.scale
    }

    /// x-mode `k` of the free-streaming density `int f*(y - vt, v) dv`,
    /// i.e. `c_k(z) S(kt) scale`.
    pub fn free_density_mode(&self, k: i64, t: f64, z: f64) -> Complex64 {
        self.coefficient(k, z, 0) * self.shape.transform(k as f64 * t) * self.scale
    }

    /// Mean density `(1/2pi) int int f* dv dx`.
    pub fn neutral_density(&self, z: f64) -> f64 {
        self.coefficient(0, z, 0).re * self.shape.integral() * self.scale
    }
}

fn zero_mode_is_real(c: &ZDependence) -> bool {
    match c {
        ZDependence::Polynomial { coeffs } => coeffs.iter().all(|c| c.im == 0.0),
        ZDependence::Trigonometric {
            offset,
            cos_amp,
            sin_amp,
            ..
        } => offset.im == 0.0 && cos_amp.im == 0.0 && sin_amp.im == 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessReport {
    /// `sup |f^(kx, kv)| (1 + kx^2) e^{a|kv|} / a1` from the analytic envelope.
    pub margin: f64,
    /// The same quantity on the kv sample grid (never above `margin`).
    pub sampled_margin: f64,
    pub worst_wavenumber: u32,
    pub worst_z: f64,
    /// Set when the velocity transform decays slower than `e^{-a|kv|}`.
    pub structural_failure: Option<String>,
    pub pass: bool,
}

fn kv_samples() -> impl Iterator<Item = f64> {
    (0..=400).map(|i| i as f64 * 0.05)
}

/// Checks `|f^*(kx, kv)| <= a1 / (1 + kx^2) e^{-a|kv|}` for the z-derivative of
/// the given order (order 0 is the profile itself).
pub fn check_smoothness(spec: &ProfileSpec, a: f64, a1: f64, z_samples: &[f64], order: u32) -> SmoothnessReport {
    let mut report = SmoothnessReport {
        margin: 0.0,
        sampled_margin: 0.0,
        worst_wavenumber: 0,
        worst_z: z_samples.first().copied().unwrap_or(0.0),
        structural_failure: None,
        pass: true,
    };
    let envelope = spec.shape.transform_envelope(a);
    for m in &spec.modes {
        let k = m.wavenumber as i64;
        let weight = (1.0 + (k * k) as f64) / a1;
        for &z in z_samples {
            let amp = spec.coefficient(k, z, order).norm() * spec.scale.abs();
            if amp == 0.0 {
                continue;
            }
            let sampled = kv_samples()
                .map(|kv| spec.fourier_z_derivative(k, kv, z, order).norm() * (a * kv).exp() * weight)
                .fold(0.0, f64::max);
            report.sampled_margin = report.sampled_margin.max(sampled);
            match envelope {
                None => {
                    let rate = match spec.shape {
                        VelocityShape::Sech { rate } => PI / (2.0 * rate),
                        VelocityShape::Gaussian => f64::INFINITY,
                    };
                    report.structural_failure = Some(format!(
                        "velocity transform decays at rate {rate} < a = {a}; no amplitude satisfies the bound"
                    ));
                    report.margin = f64::INFINITY;
                    report.worst_wavenumber = m.wavenumber;
                    report.worst_z = z;
                }
                Some(env) => {
                    let margin = amp * env * weight;
                    if margin > report.margin {
                        report.margin = margin;
                        report.worst_wavenumber = m.wavenumber;
                        report.worst_z = z;
                    }
                }
            }
        }
    }
    report.pass = report.structural_failure.is_none() && report.margin <= 1.0;
    report
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub derivative_order: u32,
    /// `sup (1 + v^4) |.| / a2` per z sample.
    pub margins: Vec<f64>,
    pub worst: f64,
    pub pass: bool,
}

/// Sample grid used for the decay suprema: 128 points in x, `|v| <= 20` at
/// spacing `0.005`.
fn decay_grid() -> (Vec<f64>, Vec<f64>) {
    let xs = (0..128).map(|i| 2.0 * PI * i as f64 / 128.0).collect();
    let vs = (0..=8000).map(|j| -20.0 + 0.005 * j as f64).collect();
    (xs, vs)
}

/// `sup (1 + v^4) |g|` over the decay grid, where `g` is `d^z_order f*`
/// (`derivative_order = 0`) or the larger of its x and v derivatives
/// (`derivative_order = 1`).
pub fn decay_supremum(spec: &ProfileSpec, z: f64, derivative_order: u32, z_order: u32) -> f64 {
    let (xs, vs) = decay_grid();
    let mut worst = 0.0_f64;
    for &x in &xs {
        let (series, dseries) = spec.x_series(x, z, z_order);
        for &v in &vs {
            let w = 1.0 + v.powi(4);
            let value = if derivative_order == 0 {
                (series * spec.shape.value(v)).abs()
            } else {
                (dseries * spec.shape.value(v))
                    .abs()
                    .max((series * spec.shape.derivative(v)).abs())
            };
            worst = worst.max(w * value * spec.scale.abs());
        }
    }
    worst
}

/// `sup_{x,v} max(|d_x g|, |d_v g|)` for `g = d^z_order f*` on the decay grid.
pub fn gradient_supremum(spec: &ProfileSpec, z: f64, z_order: u32) -> f64 {
    let (xs, vs) = decay_grid();
    let mut worst = 0.0_f64;
    for &x in &xs {
        let (series, dseries) = spec.x_series(x, z, z_order);
        for &v in &vs {
            let gx = (dseries * spec.shape.value(v)).abs();
            let gv = (series * spec.shape.derivative(v)).abs();
            worst = worst.max(gx.max(gv) * spec.scale.abs());
        }
    }
    worst
}

/// Checks `|f*(x, v)| <= a2 / (1 + v^4)` (order 0) or the same bound for both
/// gradient components (order 1).
pub fn check_decay(spec: &ProfileSpec, a2: f64, z_samples: &[f64], derivative_order: u32) -> DecayReport {
    let margins: Vec<f64> = z_samples
        .iter()
        .map(|&z| decay_supremum(spec, z, derivative_order, 0) / a2)
        .collect();
    let worst = margins.iter().copied().fold(0.0, f64::max);
    DecayReport {
        derivative_order,
        margins,
        worst,
        pass: worst <= 1.0,
    }
}

/// Constants `(C1, C2)` for which `d^order f*/dz^order` satisfies
/// (Smoothness)(C1) and, with its gradient, (Decay)(C2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeConstants {
    pub order: u32,
    pub smoothness: f64,
    pub decay: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCheckReport {
    pub smoothness: SmoothnessReport,
    pub decay: DecayReport,
    pub gradient_decay: DecayReport,
    pub derivative_constants: Vec<DerivativeConstants>,
    /// `c_0(z) > 0` at every sample; needed for a meaningful neutral density.
    pub positive_background: bool,
    pub pass: bool,
}

impl ProfileCheckReport {
    pub fn summary(&self) -> String {
        format!(
            "smoothness margin {:.4} ({}), decay margin {:.4} ({}), gradient decay margin {:.4} ({})",
            self.smoothness.margin,
            pass_word(self.smoothness.pass),
            self.decay.worst,
            pass_word(self.decay.pass),
            self.gradient_decay.worst,
            pass_word(self.gradient_decay.pass)
        )
    }
}

fn pass_word(p: bool) -> &'static str {
    if p {
        "pass"
    } else {
        "FAIL"
    }
}

/// Runs the smoothness, decay and gradient-decay checks at amplitude `(a1, a2)`
/// and reports finite constants for z-derivatives up to `k_max`.
pub fn check_profile(
    spec: &ProfileSpec,
    a: f64,
    a1: f64,
    a2: f64,
    k_max: u32,
    z_samples: &[f64],
) -> ProfileCheckReport {
    let smoothness = check_smoothness(spec, a, a1, z_samples, 0);
    let decay = check_decay(spec, a2, z_samples, 0);
    let gradient_decay = check_decay(spec, a2, z_samples, 1);
    let derivative_constants = (0..=k_max)
        .map(|order| {
            let s = check_smoothness(spec, a, 1.0, z_samples, order);
            let d = z_samples
                .iter()
                .map(|&z| decay_supremum(spec, z, 0, order).max(decay_supremum(spec, z, 1, order)))
                .fold(0.0, f64::max);
            DerivativeConstants {
                order,
                smoothness: s.margin,
                decay: d,
            }
        })
        .collect();
    let positive_background = z_samples.iter().all(|&z| spec.neutral_density(z) > 0.0);
    let pass = smoothness.pass && decay.pass && gradient_decay.pass;
    ProfileCheckReport {
        smoothness,
        decay,
        gradient_decay,
        derivative_constants,
        positive_background,
        pass,
    }
}

/// Uniform z samples on `[-1, 1]` used by the hypothesis checks.
pub fn default_z_samples() -> Vec<f64> {
    (0..=20).map(|i| -1.0 + 0.1 * i as f64).collect()
}
