//! Density and field generated by transporting `f*` along the characteristics.
//!
//! With the field `E(y, t) = int B(y - X) f* dx dv` and the density
//! `rho(y, t) = int delta(y - X) f* dx dv`, two quadratures are available:
//!
//! * [`PhaseQuadrature::Direct`] sums the kernels over the phase nodes as they
//!   stand. Sampling the sawtooth `B` costs an error of order `dx`.
//! * [`PhaseQuadrature::Spectral`] sums `e^{-ikX}` over the phase nodes for
//!   the resolved modes, which is the direct sum with `B` replaced by its
//!   band-limited Fourier series.
//! * [`PhaseQuadrature::Split`] writes `X = x + vt + xi` and separates the
//!   free-streaming part, which has a closed form in Fourier space, from the
//!   part driven by the displacement `xi`. Only the latter is summed over the
//!   phase nodes, against kernel differences evaluated without cancellation.
//!
//! The split form matters because the decay norms multiply the field by
//! `e^{at}`: the direct sum carries velocity-truncation and aliasing errors
//! of fixed size, which the weight amplifies beyond any use, while the
//! displacement-driven part is itself of size `e^{-at}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::characteristics::TrajectoryTable;
use crate::error::{Error, Result};
use crate::fields::{kernel_b, FieldTable, PhaseGrid, TimeGrid, XGrid};
use crate::profiles::ProfileSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PhaseQuadrature {
    #[default]
    Split,
    Direct,
    Spectral,
}

/// How the per-slice sums over phase nodes are ordered; results depend only
/// on this partition, not on the number of threads.
pub const REDUCTION_PARTITION: &str =
    "one task per time slice; within a slice, phase nodes are summed sequentially in (x index, v index) order";

fn check_resolution(spec: &ProfileSpec, x: XGrid) -> Result<()> {
    let k = spec.max_wavenumber() as usize;
    if k > x.max_wavenumber() {
        return Err(Error::InvalidGrid(format!(
            "profile wavenumber {k} is not resolved by nx = {} (largest resolved mode {})",
            x.len(),
            x.max_wavenumber()
        )));
    }
    Ok(())
}

/// Half spectrum (`k = 0..=nx/2`) of the free-streaming field at time `t`:
/// `c_k S(kt) / (ik)` for `k >= 1`.
fn free_field_modes(spec: &ProfileSpec, z: f64, x: XGrid, t: f64) -> Vec<Complex64> {
    let mut modes = vec![Complex64::new(0.0, 0.0); x.len() / 2 + 1];
    for m in spec.modes() {
        let k = m.wavenumber as i64;
        if k == 0 {
            continue;
        }
        modes[k as usize] = spec.free_density_mode(k, t, z) / Complex64::new(0.0, k as f64);
    }
    modes
}

fn free_density_modes(spec: &ProfileSpec, z: f64, x: XGrid, t: f64) -> Vec<Complex64> {
    let mut modes = vec![Complex64::new(0.0, 0.0); x.len() / 2 + 1];
    for m in spec.modes() {
        let k = m.wavenumber as i64;
        modes[k as usize] = spec.free_density_mode(k, t, z);
    }
    modes[0].im = 0.0;
    modes
}

/// The field generated by the zero field, `sum_{k != 0} c_k S(kt) e^{ikx} / (ik)`,
/// in closed form.
pub fn field_map_zero(spec: &ProfileSpec, z: f64, x: XGrid, time: TimeGrid) -> Result<FieldTable> {
    check_resolution(spec, x)?;
    let modes: Vec<Vec<Complex64>> = (0..time.len())
        .map(|n| free_field_modes(spec, z, x, time.time(n)))
        .collect();
    FieldTable::from_modes(x, time, &modes)
}

/// Span, in units of `1/a`, sampled past the horizon by [`free_tail_norm`].
pub const TAIL_SPAN: f64 = 40.0;

/// `sup_{t >= T} e^{at} |E|` for the field beyond the horizon `T`. The
/// characteristics are free there, so the field is the free-streaming one;
/// it is sampled on `[T, T + 40/a]` with the interpolated x-sup.
pub fn free_tail_norm(spec: &ProfileSpec, z: f64, x: XGrid, t_end: f64, a: f64) -> Result<crate::fields::NormReport> {
    let tail = TimeGrid::new(t_end, t_end + TAIL_SPAN / a, 401)?;
    field_map_zero(spec, z, x, tail)?.weighted_norm_interpolated(a, 0)
}

/// The free-streaming density `int f*(y - vt, v) dv` in closed form.
pub fn free_density(spec: &ProfileSpec, z: f64, x: XGrid, time: TimeGrid) -> Result<FieldTable> {
    check_resolution(spec, x)?;
    let modes: Vec<Vec<Complex64>> = (0..time.len())
        .map(|n| free_density_modes(spec, z, x, time.time(n)))
        .collect();
    FieldTable::from_modes(x, time, &modes)
}

/// `f*(x_i, v_j, z)` times the phase-space weight, per node.
fn weighted_profile(spec: &ProfileSpec, z: f64, phase: PhaseGrid) -> Vec<f64> {
    (0..phase.nodes())
        .map(|node| {
            let (i, j) = phase.split(node);
            spec.eval(phase.x_grid().point(i), phase.v(j), z) * phase.weight(j)
        })
        .collect()
}

/// The field `int B(y - X) f* dx dv` generated by the given trajectories.
pub fn field_from_trajectories(
    traj: &TrajectoryTable,
    spec: &ProfileSpec,
    z: f64,
    quadrature: PhaseQuadrature,
) -> Result<FieldTable> {
    let phase = traj.phase_grid();
    let time = traj.time_grid();
    let x = phase.x_grid();
    check_resolution(spec, x)?;
    let wf = weighted_profile(spec, z, phase);
    let nx = x.len();
    match quadrature {
        PhaseQuadrature::Direct => {
            let slices: Vec<Vec<f64>> = (0..time.len())
                .into_par_iter()
                .map(|n| {
                    let mut out = vec![0.0; nx];
                    for (node, &w) in wf.iter().enumerate() {
                        if w == 0.0 {
                            continue;
                        }
                        let pos = traj.x(node, n);
                        for (l, o) in out.iter_mut().enumerate() {
                            *o += w * kernel_b(x.point(l) - pos);
                        }
                    }
                    let mean = out.iter().sum::<f64>() / nx as f64;
                    out.iter_mut().for_each(|o| *o -= mean);
                    out
                })
                .collect();
            FieldTable::new(x, time, slices.concat())
        }
        PhaseQuadrature::Spectral => {
            let kmax = x.max_wavenumber();
            let modes: Vec<Vec<Complex64>> = (0..time.len())
                .into_par_iter()
                .map(|n| {
                    let mut acc = vec![Complex64::new(0.0, 0.0); x.len() / 2 + 1];
                    for (node, &w) in wf.iter().enumerate() {
                        if w == 0.0 {
                            continue;
                        }
                        let e1 = Complex64::from_polar(1.0, -traj.x(node, n).rem_euclid(2.0 * PI));
                        let mut pk = e1;
                        for a in acc.iter_mut().take(kmax + 1).skip(1) {
                            *a += w * pk;
                            pk *= e1;
                        }
                    }
                    for (k, a) in acc.iter_mut().enumerate().take(kmax + 1).skip(1) {
                        *a /= Complex64::new(0.0, 2.0 * PI * k as f64);
                    }
                    acc
                })
                .collect();
            FieldTable::from_modes(x, time, &modes)
        }
        PhaseQuadrature::Split => {
            let kmax = x.max_wavenumber();
            let modes: Vec<Vec<Complex64>> = (0..time.len())
                .into_par_iter()
                .map(|n| {
                    let t = time.time(n);
                    let mut acc = vec![Complex64::new(0.0, 0.0); kmax + 1];
                    for (node, &w) in wf.iter().enumerate() {
                        let xi = traj.displacement_x(node, n);
                        if w == 0.0 || xi == 0.0 {
                            continue;
                        }
                        let p0 = traj.free_position(node, n);
                        let e1 = Complex64::from_polar(1.0, -p0);
                        // q = e^{-i xi} - 1, d_k = e^{-ik xi} - 1 by d_{k+1} = d_k + q + d_k q
                        let half = (0.5 * xi).sin();
                        let q = Complex64::new(-2.0 * half * half, -xi.sin());
                        let mut pk = e1;
                        let mut dk = q;
                        for a in acc.iter_mut().skip(1) {
                            *a += w * pk * dk;
                            pk *= e1;
                            dk = dk + q + dk * q;
                        }
                    }
                    let mut modes = free_field_modes(spec, z, x, t);
                    for k in 1..=kmax {
                        modes[k] += acc[k] / Complex64::new(0.0, 2.0 * PI * k as f64);
                    }
                    modes
                })
                .collect();
            FieldTable::from_modes(x, time, &modes)
        }
    }
}

/// Linear-hat weights `(cell, 1 - frac), (cell + 1, frac)` of position `u`
/// measured in cells.
fn hat_cells(u: f64, nx: usize) -> (usize, f64) {
    let m = u.floor();
    let frac = u - m;
    ((m as i64).rem_euclid(nx as i64) as usize, frac)
}

/// Cloud-in-cell density `int delta(y - X) f* dx dv` with the delta replaced
/// by a hat of one cell width.
pub fn deposit_density(
    traj: &TrajectoryTable,
    spec: &ProfileSpec,
    z: f64,
    quadrature: PhaseQuadrature,
) -> Result<FieldTable> {
    let phase = traj.phase_grid();
    let time = traj.time_grid();
    let x = phase.x_grid();
    check_resolution(spec, x)?;
    let wf = weighted_profile(spec, z, phase);
    let nx = x.len();
    let dx = x.dx();
    let slices: Vec<Vec<f64>> = (0..time.len())
        .into_par_iter()
        .map(|n| {
            let mut out = vec![0.0; nx];
            match quadrature {
                PhaseQuadrature::Direct | PhaseQuadrature::Spectral => {
                    for (node, &w) in wf.iter().enumerate() {
                        let u = traj.x(node, n).rem_euclid(2.0 * PI) / dx;
                        let (m, frac) = hat_cells(u, nx);
                        out[m] += w * (1.0 - frac);
                        out[(m + 1) % nx] += w * frac;
                    }
                    out.iter_mut().for_each(|o| *o /= dx);
                }
                PhaseQuadrature::Split => {
                    let mut corr = vec![0.0; nx];
                    for (node, &w) in wf.iter().enumerate() {
                        let xi = traj.displacement_x(node, n);
                        if w == 0.0 || xi == 0.0 {
                            continue;
                        }
                        let u = traj.free_position(node, n).rem_euclid(2.0 * PI) / dx;
                        let (m, frac) = hat_cells(u, nx);
                        let d = xi / dx;
                        let moved = frac + d;
                        if (0.0..1.0).contains(&moved) {
                            corr[m] -= w * d;
                            corr[(m + 1) % nx] += w * d;
                        } else {
                            corr[m] -= w * (1.0 - frac);
                            corr[(m + 1) % nx] -= w * frac;
                            let (m2, frac2) = hat_cells(m as f64 + moved, nx);
                            corr[m2] += w * (1.0 - frac2);
                            corr[(m2 + 1) % nx] += w * frac2;
                        }
                    }
                    let free = crate::fields::spectral::inverse_real(&free_density_modes(spec, z, x, time.time(n)), nx);
                    for l in 0..nx {
                        out[l] = free[l] + corr[l] / dx;
                    }
                }
            }
            out
        })
        .collect();
    FieldTable::new(x, time, slices.concat())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{VelocityShape, XMode, ZDependence};
    use crate::scattering::characteristics::{solve_characteristics, TrajectoryOptions};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn profile(c0: f64, c1: Complex64) -> ProfileSpec {
        ProfileSpec::new(
            vec![
                XMode {
                    wavenumber: 0,
                    coefficient: ZDependence::constant(c(c0)),
                },
                XMode {
                    wavenumber: 1,
                    coefficient: ZDependence::constant(c1),
                },
            ],
            VelocityShape::Sech { rate: PI / 2.0 },
            1.0,
        )
        .unwrap()
    }

    fn grids() -> (PhaseGrid, TimeGrid) {
        let x = XGrid::new(32).unwrap();
        (
            PhaseGrid::new(x, 129, 6.0).unwrap(),
            TimeGrid::new(8.0, 43.0, 176).unwrap(),
        )
    }

    #[test]
    fn single_mode_closed_form() {
        let (phase, time) = grids();
        let c1 = Complex64::new(1.5e-4, 0.5e-4);
        let spec = profile(3.5e-4, c1);
        let f0 = field_map_zero(&spec, 0.0, phase.x_grid(), time).unwrap();
        for n in [0, 10, 175] {
            let t = time.time(n);
            let amp = 2.0 * c1.norm() * 2.0 / t.cosh();
            for i in 0..phase.nx() {
                let x = phase.x_grid().point(i);
                // 2 Re(c1 S(t) e^{ix} / i)
                let expected = amp * (x + c1.arg() - PI / 2.0).cos();
                assert!((f0.value(i, n) - expected).abs() < 1e-15 * amp.max(1e-300) + 1e-30);
            }
        }
    }

    #[test]
    fn homogeneous_profile_gives_no_field() {
        let (phase, time) = grids();
        let spec = profile(1e-3, c(0.0));
        assert_eq!(field_map_zero(&spec, 0.0, phase.x_grid(), time).unwrap().max_abs(), 0.0);
        let traj = TrajectoryTable::free(phase, time);
        for q in [
            PhaseQuadrature::Split,
            PhaseQuadrature::Direct,
            PhaseQuadrature::Spectral,
        ] {
            let e = field_from_trajectories(&traj, &spec, 0.0, q).unwrap();
            assert!(e.max_abs() < 1e-16, "{q:?}");
            let rho = deposit_density(&traj, &spec, 0.0, q).unwrap();
            let rho0 = spec.neutral_density(0.0);
            // trapezoid in v of sech on [-6, 6]: truncation ~ 2 e^{-3 pi} relative
            assert!(rho.map(|r| r - rho0).max_abs() < 2e-4 * rho0, "{q:?}");
        }
    }

    #[test]
    fn zero_field_matches_series() {
        let (phase, time) = grids();
        let spec = profile(3.5e-4, c(1.5e-4));
        let traj = TrajectoryTable::free(phase, time);
        let series = field_map_zero(&spec, 0.0, phase.x_grid(), time).unwrap();
        let spectral = field_from_trajectories(&traj, &spec, 0.0, PhaseQuadrature::Spectral).unwrap();
        // velocity truncation at |v| = 6 leaves ~ 2 |c1| int_6^inf S
        let gap = spectral.max_abs_diff(&series).unwrap();
        assert!(gap < 3e-8, "{gap}");
        let split = field_from_trajectories(&traj, &spec, 0.0, PhaseQuadrature::Split).unwrap();
        assert_eq!(split, series);
        // the sampled sawtooth errs by about c0 dx / 2 per unit velocity mass
        let direct = field_from_trajectories(&traj, &spec, 0.0, PhaseQuadrature::Direct).unwrap();
        let gap = direct.max_abs_diff(&series).unwrap();
        let dx = phase.x_grid().dx();
        assert!(gap < 3.5e-4 * dx * 2.0, "{gap}");
    }

    #[test]
    fn split_sum_matches_whole_sum_for_resolved_displacements() {
        let (phase, time) = grids();
        let spec = profile(3.5e-4, c(1.5e-4));
        let e = FieldTable::from_fn(phase.x_grid(), time, |x, t| 0.9 * x.sin() * (8.0 - t).exp());
        let traj = solve_characteristics(&e, phase, 1.0, &TrajectoryOptions::default(), None).unwrap();
        let split = field_from_trajectories(&traj, &spec, 0.0, PhaseQuadrature::Split).unwrap();
        let free = field_map_zero(&spec, 0.0, phase.x_grid(), time).unwrap();
        let whole = field_from_trajectories(&traj, &spec, 0.0, PhaseQuadrature::Spectral).unwrap();
        for n in [0, 5] {
            let w = whole.slice_modes(n).modes;
            let s = split.slice_modes(n).modes;
            let f = free.slice_modes(n).modes;
            for k in 1..=3 {
                let correction = (w[k] - f[k]).norm();
                let gap = (s[k] - w[k]).norm();
                // both carry the same displacement sum; the free parts differ by
                // the velocity truncation only
                assert!(
                    gap < 3e-8 && gap < 1e-3 * correction,
                    "n={n} k={k}: {gap:e} vs {correction:e}"
                );
            }
        }
    }

    #[test]
    fn derivative_of_field_is_density() {
        let (phase, time) = grids();
        let spec = profile(3.5e-4, c(1.5e-4));
        let gap = |nv: usize| {
            let phase = PhaseGrid::new(phase.x_grid(), nv, 6.0).unwrap();
            let e = FieldTable::from_fn(phase.x_grid(), time, |x, t| 0.3 * (x + 0.2).sin() * (8.0 - t).exp());
            let traj = solve_characteristics(&e, phase, 1.0, &TrajectoryOptions::default(), None).unwrap();
            let field = field_from_trajectories(&traj, &spec, 0.0, PhaseQuadrature::Split).unwrap();
            let rho = deposit_density(&traj, &spec, 0.0, PhaseQuadrature::Split).unwrap();
            let rho0 = spec.neutral_density(0.0);
            field.spectral_dx().max_abs_diff(&rho.map(|r| r - rho0)).unwrap()
        };
        // cloud-in-cell aliasing of filamented velocity structure, at the
        // admissibility limit of the field
        let (coarse, fine) = (gap(129), gap(385));
        assert!(coarse < 5e-5, "{coarse}");
        assert!(fine < coarse, "{fine} vs {coarse}");
    }

    #[test]
    fn reduction_is_deterministic() {
        let (phase, time) = grids();
        let spec = profile(3.5e-4, c(1.5e-4));
        let e = FieldTable::from_fn(phase.x_grid(), time, |x, t| 1e-3 * x.cos() * (-t).exp() * 40.0);
        let traj = solve_characteristics(&e, phase, 1.0, &TrajectoryOptions::default(), None).unwrap();
        let a = field_from_trajectories(&traj, &spec, 0.0, PhaseQuadrature::Split).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| field_from_trajectories(&traj, &spec, 0.0, PhaseQuadrature::Split).unwrap());
        assert_eq!(a, b);
    }
}
