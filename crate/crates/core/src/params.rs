//! Scalar constants, the (A1)-(A5) admissibility gate, and the closed-form
//! tail integrals `int_t^inf s^k e^{-as} ds` and `int_t^inf (s-t) s^k e^{-as} ds`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The constants `a, a1, a2, K, t0` together with the derived field-derivative
/// bound `C_E = 240 a1 a2 / a + 4 a1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DampingParams {
    /// Decay rate of the field.
    pub a: f64,
    /// Smoothness amplitude of the profile.
    pub a1: f64,
    /// Decay amplitude of the profile.
    pub a2: f64,
    /// Largest z-derivative order that is estimated.
    pub k_max: u32,
    /// Time from which the estimates hold.
    pub t0: f64,
    /// `240 a1 a2 / a + 4 a1`.
    pub c_e: f64,
}

pub fn field_derivative_bound(a: f64, a1: f64, a2: f64) -> f64 {
    240.0 * a1 * a2 / a + 4.0 * a1
}

/// Smallest `t0` admitted by (A2): `max{2, 4K, log(8 a1)/a}`.
pub fn minimal_t0(a: f64, a1: f64, k_max: u32) -> f64 {
    let log_term = (8.0 * a1).ln() / a;
    2.0_f64.max(4.0 * k_max as f64).max(log_term)
}

impl DampingParams {
    /// Builds the parameter set with `t0` at the smallest value allowed by (A2).
    pub fn derive(a: f64, a1: f64, a2: f64, k_max: u32) -> Result<Self> {
        for (name, value) in [("a", a), ("a1", a1), ("a2", a2)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::param(name, format!("must be positive and finite, got {value}")));
            }
        }
        Ok(Self {
            a,
            a1,
            a2,
            k_max,
            t0: minimal_t0(a, a1, k_max),
            c_e: field_derivative_bound(a, a1, a2),
        })
    }

    /// Replaces `t0`; the gate decides later whether the value is admissible.
    pub fn with_t0(mut self, t0: f64) -> Result<Self> {
        if !(t0 > 0.0) || !t0.is_finite() {
            return Err(Error::param("t0", format!("must be positive and finite, got {t0}")));
        }
        self.t0 = t0;
        Ok(self)
    }

    /// Lipschitz constant of the field map, `88 a2 / (a^2 - 80 a2)`.
    ///
    /// Infinite when `a^2 <= 80 a2`.
    pub fn contraction_bound(&self) -> f64 {
        let denom = self.a * self.a - 80.0 * self.a2;
        if denom > 0.0 {
            88.0 * self.a2 / denom
        } else {
            f64::INFINITY
        }
    }

    /// Lipschitz constant of the linear waveform-relaxation operator, `80 a2 / a^2`.
    pub fn relaxation_bound(&self) -> f64 {
        80.0 * self.a2 / (self.a * self.a)
    }
}

/// One inequality of the gate, stored as `lhs <= rhs` with `margin = rhs - lhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

impl ConditionCheck {
    fn new(name: &str, lhs: f64, rhs: f64) -> Self {
        let margin = rhs - lhs;
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            margin,
            pass: margin >= 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// (A1) through (A5) in order.
    pub conditions: Vec<ConditionCheck>,
    /// The consequence `(50 C_E / a) t0^3 e^{-a t0} <= 1` of (A3).
    pub a3_at_t0: ConditionCheck,
    /// The step from (A3) to its consequence uses that `t^3 e^{-at}` peaks at
    /// `3/a`; it only applies for `t0 >= 3/a`.
    pub a3_implication_applies: bool,
    pub minimal_t0: f64,
    pub pass: bool,
}

impl AssumptionReport {
    pub fn failing(&self) -> Vec<&str> {
        self.conditions
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }
}

/// Evaluates (A1)-(A5) literally. Failure is a report outcome, not an error.
pub fn check_assumptions(p: &DampingParams) -> AssumptionReport {
    let a = p.a;
    let e = std::f64::consts::E;
    let a1 = ConditionCheck::new("A1", 1.0_f64.max(15.0 * p.a2.sqrt()), a);
    let t0_min = minimal_t0(a, p.a1, p.k_max);
    let a2 = ConditionCheck::new("A2", t0_min, p.t0);
    let lead = 50.0 * p.c_e / a;
    let a3 = ConditionCheck::new("A3", lead * (3.0 / a).powi(3) * (-3.0_f64).exp(), 1.0);
    let a4 = ConditionCheck::new("A4", 8.0 * e, 1.0 / (20.0 * p.a2));
    let a5 = ConditionCheck::new("A5", 8.0 * p.c_e, a * a);
    let a3_at_t0 = ConditionCheck::new("A3(t0)", lead * p.t0.powi(3) * (-a * p.t0).exp(), 1.0);
    let conditions = vec![a1, a2, a3, a4, a5];
    let pass = conditions.iter().all(|c| c.pass);
    AssumptionReport {
        conditions,
        a3_at_t0,
        a3_implication_applies: p.t0 >= 3.0 / a,
        minimal_t0: t0_min,
        pass,
    }
}

fn check_tail_args(a: f64, t: f64, k: i64) -> Result<u32> {
    if k < 0 {
        return Err(Error::param("k", format!("must be nonnegative, got {k}")));
    }
    if !(a > 0.0) {
        return Err(Error::param("a", format!("must be positive, got {a}")));
    }
    if !(t >= 0.0) {
        return Err(Error::param("t", format!("must be nonnegative, got {t}")));
    }
    Ok(k as u32)
}

/// `int_t^inf s^k e^{-as} ds = e^{-at} sum_{j=0}^k k!/(j! a^{k-j+1}) t^j`.
pub fn tail_integral(a: f64, t: f64, k: i64) -> Result<f64> {
    let k = check_tail_args(a, t, k)?;
    let kf = factorial(k);
    let sum: f64 = (0..=k)
        .map(|j| kf / factorial(j) * t.powi(j as i32) / a.powi((k - j + 1) as i32))
        .sum();
    Ok((-a * t).exp() * sum)
}

/// `int_t^inf (s-t) s^k e^{-as} ds`
/// `= e^{-at} [ (k+1)!/a^{k+2} + t sum_{j=0}^{k-1} k!(k-j)/(j+1)! t^j / a^{k-j+1} ]`.
pub fn tail_integral_moment(a: f64, t: f64, k: i64) -> Result<f64> {
    let k = check_tail_args(a, t, k)?;
    let kf = factorial(k);
    let mut sum = factorial(k + 1) / a.powi(k as i32 + 2);
    let mut inner = 0.0;
    for j in 0..k {
        let coeff = kf * (k - j) as f64 / factorial(j + 1);
        inner += coeff * t.powi(j as i32) / a.powi((k - j + 1) as i32);
    }
    sum += t * inner;
    Ok((-a * t).exp() * sum)
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailViolation {
    pub k: u32,
    pub t: f64,
    pub which: String,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailBoundReport {
    /// Largest `moment / (4 t^k e^{-at} / a^2)` over all samples.
    pub worst_moment_ratio: f64,
    /// Largest `integral / (2 t^k e^{-at} / a)` over all samples.
    pub worst_integral_ratio: f64,
    pub worst_moment_at: (u32, f64),
    pub worst_integral_at: (u32, f64),
    pub violations: Vec<TailViolation>,
    pub pass: bool,
}

/// Checks `int (s-t) s^k e^{-as} <= 4 t^k e^{-at}/a^2` and
/// `int s^k e^{-as} <= 2 t^k e^{-at}/a` for all `k <= 2K` at the given times.
///
/// The bounds are only claimed under (A1) and (A2); calling with parameters
/// that fail either is an error.
pub fn verify_tail_bounds(p: &DampingParams, times: &[f64]) -> Result<TailBoundReport> {
    let gate = check_assumptions(p);
    if !gate.conditions[0].pass || !gate.conditions[1].pass {
        return Err(Error::GateFailed("tail bounds need (A1) and (A2)".into()));
    }
    if times.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut report = TailBoundReport {
        worst_moment_ratio: 0.0,
        worst_integral_ratio: 0.0,
        worst_moment_at: (0, times[0]),
        worst_integral_at: (0, times[0]),
        violations: Vec::new(),
        pass: true,
    };
    for k in 0..=2 * p.k_max {
        for &t in times {
            if t < p.t0 {
                return Err(Error::TimeBeforeStart { t, t0: p.t0 });
            }
            // Ratios are formed with the common e^{-at} factor cancelled so that
            // they stay meaningful far beyond the underflow of e^{-at}.
            let scale = (-p.a * t).exp();
            let tk = t.powi(k as i32);
            let moment = tail_integral_moment(p.a, t, k as i64)? / scale;
            let integral = tail_integral(p.a, t, k as i64)? / scale;
            let rm = moment / (4.0 * tk / (p.a * p.a));
            let ri = integral / (2.0 * tk / p.a);
            if rm > report.worst_moment_ratio {
                report.worst_moment_ratio = rm;
                report.worst_moment_at = (k, t);
            }
            if ri > report.worst_integral_ratio {
                report.worst_integral_ratio = ri;
                report.worst_integral_at = (k, t);
            }
            for (which, ratio) in [("moment", rm), ("integral", ri)] {
                if ratio > 1.0 {
                    report.violations.push(TailViolation {
                        k,
                        t,
                        which: which.into(),
                        ratio,
                    });
                }
            }
        }
    }
    report.pass = report.violations.is_empty();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn reference() -> DampingParams {
        DampingParams::derive(1.0, 0.002, 0.002, 2).unwrap()
    }

    /// Adaptive Simpson on [lo, hi].
    fn simpson(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
        #[allow(clippy::too_many_arguments)]
        fn rec(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = f(lm);
            let frm = f(rm);
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let fa = f(lo);
        let fb = f(hi);
        let fm = f(0.5 * (lo + hi));
        let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, lo, hi, fa, fm, fb, whole, tol, 40)
    }

    /// Unit panels from t outwards until the integrand drops below 1e-16 of
    /// the running total.
    fn tail_oracle(f: &dyn Fn(f64) -> f64, t: f64) -> f64 {
        let mut total = 0.0_f64;
        let mut lo = t;
        loop {
            let hi = lo + 1.0;
            total += simpson(f, lo, hi, 1e-16 * total.max(1e-300) + 1e-300);
            if f(hi).abs() < 1e-16 * total.abs() {
                return total;
            }
            lo = hi;
        }
    }

    #[test]
    fn derive_reference() {
        let p = reference();
        assert!((p.c_e - 0.00896).abs() < 1e-15);
        assert_eq!(p.t0, 8.0);
    }

    #[test]
    fn derive_log_term_vanishes_at_unit_argument() {
        let p = DampingParams::derive(1.0, 0.125, 1e-6, 0).unwrap();
        assert_eq!(p.t0, 2.0);
    }

    #[test]
    fn derive_second_rate() {
        let p = DampingParams::derive(2.0, 0.002, 0.002, 1).unwrap();
        assert!((p.c_e - 0.00848).abs() < 1e-15);
    }

    #[test]
    fn derive_rejects_nonpositive() {
        assert!(DampingParams::derive(0.0, 0.1, 0.1, 1).is_err());
        assert!(DampingParams::derive(1.0, -0.1, 0.1, 1).is_err());
        assert!(DampingParams::derive(1.0, 0.1, f64::NAN, 1).is_err());
    }

    #[test]
    fn gate_reference_passes() {
        let r = check_assumptions(&reference());
        assert!(r.pass, "{r:?}");
        assert!(r.a3_implication_applies);
        assert!(r.a3_at_t0.pass);
        let a4 = &r.conditions[3];
        assert!((a4.lhs - 8.0 * E).abs() < 1e-12);
        assert!((a4.rhs - 25.0).abs() < 1e-12);
    }

    #[test]
    fn gate_a4_fails_for_larger_decay_amplitude() {
        let p = DampingParams {
            a2: 0.01,
            ..reference()
        };
        let r = check_assumptions(&p);
        assert!(!r.pass);
        // 15 sqrt(0.01) = 1.5 > a breaks (A1) as well
        assert_eq!(r.failing(), vec!["A1", "A4"]);
        assert!(r.conditions[3].margin < 0.0);
    }

    #[test]
    fn gate_a1_zero_margin() {
        let p = DampingParams::derive(1.5, 0.002, 0.01, 2).unwrap();
        let r = check_assumptions(&p);
        assert!(r.conditions[0].pass);
        assert_eq!(r.conditions[0].margin, 0.0);
    }

    #[test]
    fn gate_flags_small_t0_for_a3_implication() {
        let p = DampingParams::derive(0.2, 0.002, 1e-5, 0)
            .unwrap()
            .with_t0(3.0)
            .unwrap();
        let r = check_assumptions(&p);
        assert!(!r.a3_implication_applies);
    }

    #[test]
    fn tail_integral_trivial_values() {
        assert!((tail_integral(1.0, 0.0, 0).unwrap() - 1.0).abs() < 1e-15);
        assert!((tail_integral(1.0, 0.0, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!((tail_integral_moment(1.0, 0.0, 0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tail_integral_at_two() {
        let expected = 10.0 * (-2.0_f64).exp();
        let oracle = tail_oracle(&|s: f64| s * s * (-s).exp(), 2.0);
        assert!((oracle - expected).abs() < 1e-12 * expected);
        assert!((tail_integral(1.0, 2.0, 2).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn moment_matches_exponential_tail() {
        let oracle = tail_oracle(&|s: f64| (s - 3.0) * (-s).exp(), 3.0);
        let value = tail_integral_moment(1.0, 3.0, 0).unwrap();
        assert!((value - (-3.0_f64).exp()).abs() < 1e-15);
        assert!((oracle - value).abs() < 1e-11 * value);
    }

    #[test]
    fn moment_obeys_lemma_bound_at_reference_start() {
        let value = tail_integral_moment(1.0, 8.0, 2).unwrap();
        assert!(value <= 4.0 * 64.0 * (-8.0_f64).exp());
    }

    #[test]
    fn negative_order_rejected() {
        assert!(tail_integral(1.0, 1.0, -1).is_err());
        assert!(tail_integral_moment(1.0, 1.0, -2).is_err());
    }

    #[test]
    fn closed_forms_match_quadrature_oracle() {
        for &a in &[1.0, 2.0] {
            for &t in &[0.0, 2.0, 8.0] {
                for k in 0..=4 {
                    let i = tail_integral(a, t, k).unwrap();
                    let m = tail_integral_moment(a, t, k).unwrap();
                    let oi = tail_oracle(&|s: f64| s.powi(k as i32) * (-a * s).exp(), t);
                    let om = tail_oracle(&|s: f64| (s - t) * s.powi(k as i32) * (-a * s).exp(), t);
                    assert!((i - oi).abs() <= 1e-10 * oi, "a={a} t={t} k={k}: {i} vs {oi}");
                    assert!((m - om).abs() <= 1e-10 * om, "a={a} t={t} k={k}: {m} vs {om}");
                }
            }
        }
    }

    #[test]
    fn tail_bounds_on_reference_grid() {
        let p = reference();
        let times: Vec<f64> = (0..=40).map(|i| 8.0 + i as f64).collect();
        let r = verify_tail_bounds(&p, &times).unwrap();
        assert!(r.pass);
        assert!(r.worst_moment_ratio <= 1.0 && r.worst_integral_ratio <= 1.0);
        // k = 0: exact values e^{-at}/a and e^{-at}/a^2.
        for &t in &times {
            let s = (-t).exp();
            assert!((tail_integral(1.0, t, 0).unwrap() / (2.0 * s) - 0.5).abs() < 1e-14);
            assert!((tail_integral_moment(1.0, t, 0).unwrap() / (4.0 * s) - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn tail_bounds_need_gate() {
        let p = DampingParams::derive(0.5, 0.002, 0.002, 2).unwrap();
        assert!(verify_tail_bounds(&p, &[8.0]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn tail_integral_decreasing_in_t_and_a(a in 0.5f64..3.0, t in 0.0f64..20.0, dt in 0.01f64..2.0, da in 0.01f64..1.0, k in 0i64..5) {
            let base = tail_integral(a, t, k).unwrap();
            proptest::prop_assert!(tail_integral(a, t + dt, k).unwrap() < base);
            proptest::prop_assert!(tail_integral(a + da, t, k).unwrap() < base);
        }

        #[test]
        fn passing_gate_is_sound(a in 1.0f64..4.0, a1 in 1e-4f64..0.01, a2 in 1e-5f64..0.003, k in 0u32..4) {
            let p = DampingParams::derive(a, a1, a2, k).unwrap();
            let r = check_assumptions(&p);
            if r.pass {
                let ce = 240.0 * a1 * a2 / a + 4.0 * a1;
                proptest::prop_assert!(a >= 1.0_f64.max(15.0 * a2.sqrt()));
                proptest::prop_assert!(p.t0 >= 2.0_f64.max(4.0 * k as f64).max((8.0 * a1).ln() / a));
                proptest::prop_assert!(50.0 * ce / a * (3.0 / a).powi(3) * (-3.0f64).exp() <= 1.0);
                proptest::prop_assert!(8.0 * E <= 1.0 / (20.0 * a2));
                proptest::prop_assert!(8.0 * ce <= a * a);
            }
            for c in &r.conditions {
                proptest::prop_assert_eq!(c.pass, c.margin >= 0.0);
            }
        }
    }
}
