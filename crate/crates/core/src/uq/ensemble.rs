//! Per-node solves, gPC projection, z-derivatives and the regularity reports.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::CollocationNodes;
use crate::checks::{ratio, BoundCheck};
use crate::error::{Error, Result};
use crate::fields::{weighted_norm_phase, FieldTable, NormKind, PhaseGrid, TimeGrid};
use crate::params::DampingParams;
use crate::profiles::{gradient_supremum, ProfileSpec};
use crate::scattering::{picard_solve, PicardOptions, SolveGrids, SolveSummary, TrajectoryTable};

/// Stencil of the finite-difference cross-check.
pub const FD_STENCIL: usize = 5;

/// Relative drift allowed between two node counts.
pub const REFINEMENT_TOL: f64 = 0.05;

/// Relative gap allowed between the spectral and finite-difference estimates.
pub const ESTIMATOR_TOL: f64 = 1e-4;

/// Norms below this fraction of the `k = 0` norm are node-to-node roundoff
/// amplified by differencing; relative comparisons use it as the denominator
/// when the norm itself is smaller.
pub const NOISE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMember {
    pub z: f64,
    pub field: FieldTable,
    pub summary: Option<SolveSummary>,
}

/// `Delta = f*(x, v) - f*(X - V t, V)` at the phase nodes, reduced on the fly
/// to its z-derivatives at `z = 0` so that trajectories need not be kept.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualDerivatives {
    pub phase: PhaseGrid,
    pub time: TimeGrid,
    /// `tables[k]` holds `d^k Delta / dz^k`, node-major.
    pub tables: Vec<Vec<f64>>,
    /// Per-node `|Delta|_(a,t0,1)`.
    pub node_norms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZEnsemble {
    nodes: CollocationNodes,
    a: f64,
    params: Option<DampingParams>,
    /// Serialized params, grids and options shared by every node.
    setup: String,
    members: Vec<EnsembleMember>,
    residual: Option<ResidualDerivatives>,
}

impl ZEnsemble {
    /// An ensemble from precomputed node fields, for manufactured data.
    pub fn from_fields(nodes: CollocationNodes, fields: Vec<FieldTable>, a: f64) -> Result<Self> {
        if fields.len() != nodes.len() || fields.is_empty() {
            return Err(Error::GridMismatch(format!(
                "{} fields for {} nodes",
                fields.len(),
                nodes.len()
            )));
        }
        let grid = (fields[0].x_grid(), fields[0].time_grid());
        if fields.iter().any(|f| (f.x_grid(), f.time_grid()) != grid) {
            return Err(Error::GridMismatch("node fields live on different grids".into()));
        }
        let members = nodes
            .nodes
            .iter()
            .zip(fields)
            .map(|(&z, field)| EnsembleMember {
                z,
                field,
                summary: None,
            })
            .collect();
        Ok(Self {
            nodes,
            a,
            params: None,
            setup: String::new(),
            members,
            residual: None,
        })
    }

    pub fn nodes(&self) -> &CollocationNodes {
        &self.nodes
    }

    pub fn members(&self) -> &[EnsembleMember] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn params(&self) -> Option<&DampingParams> {
        self.params.as_ref()
    }

    pub fn setup(&self) -> &str {
        &self.setup
    }

    pub fn residual(&self) -> Option<&ResidualDerivatives> {
        self.residual.as_ref()
    }

    fn combine(&self, weights: &[(usize, f64)]) -> Result<FieldTable> {
        let first = &self.members[0].field;
        let mut values = vec![0.0; first.values().len()];
        for &(j, w) in weights {
            for (acc, v) in values.iter_mut().zip(self.members[j].field.values()) {
                *acc += w * v;
            }
        }
        FieldTable::new(first.x_grid(), first.time_grid(), values)
    }

    /// `d^k E / dz^k` at `z = 0` from the collocation interpolant.
    pub fn z_derivative(&self, k: usize) -> Result<FieldTable> {
        let rule = self.nodes.spectral_rule(k, 0.0)?;
        self.combine(&rule.into_iter().enumerate().collect::<Vec<_>>())
    }

    /// `d^k E / dz^k` at `z = 0` by finite differences on the nodes nearest 0.
    pub fn z_derivative_fd(&self, k: usize) -> Result<FieldTable> {
        let rule = self.nodes.finite_difference_rule(k, 0.0, FD_STENCIL)?;
        self.combine(&rule)
    }

    /// Ensemble manifest: nodes, weights and per-node summaries.
    pub fn manifest(&self) -> serde_json::Value {
        serde_json::json!({
            "family": self.nodes.family,
            "nodes": self.nodes.nodes,
            "weights": self.nodes.weights,
            "setup": self.setup,
            "members": self.members.iter().map(|m| serde_json::json!({
                "z": m.z,
                "summary": m.summary,
            })).collect::<Vec<_>>(),
        })
    }
}

struct NodeOutput {
    field: FieldTable,
    summary: SolveSummary,
    delta: Vec<f64>,
}

fn residual_table(traj: &TrajectoryTable, spec: &ProfileSpec, z: f64) -> Vec<f64> {
    let phase = traj.phase_grid();
    let nt = traj.time_grid().len();
    let mut out = vec![0.0; phase.nodes() * nt];
    out.par_chunks_mut(nt).enumerate().for_each(|(node, row)| {
        let (i, j) = phase.split(node);
        let (x, v) = (phase.x_grid().point(i), phase.v(j));
        for (n, r) in row.iter_mut().enumerate() {
            *r = -spec.increment(x, v, traj.asymptotic_offset(node, n), traj.displacement_v(node, n), z);
        }
    });
    out
}

/// Solves at every node, in parallel, keeping the fields, the summaries and the
/// z-derivatives of the solution residual up to order `min(K, N_z - 2)`.
pub fn run_collocation(
    spec: &ProfileSpec,
    params: &DampingParams,
    nodes: &CollocationNodes,
    grids: &SolveGrids,
    opts: &PicardOptions,
) -> Result<ZEnsemble> {
    if nodes.is_empty() {
        return Err(Error::param("n_z", "need at least one node"));
    }
    let setup = serde_json::to_string(&(params, grids, opts))?;
    let outputs: Vec<Result<NodeOutput>> = nodes
        .nodes
        .par_iter()
        .enumerate()
        .map(|(index, &z)| {
            let result = picard_solve(spec, params, z, grids, opts).map_err(|e| Error::NodeFailed {
                index,
                z,
                source: Box::new(e),
            })?;
            let delta = residual_table(&result.trajectories, spec, z);
            Ok(NodeOutput {
                field: result.field,
                summary: result.summary,
                delta,
            })
        })
        .collect();
    let outputs = outputs.into_iter().collect::<Result<Vec<_>>>()?;

    let max_order = if nodes.len() >= 3 {
        (params.k_max as usize).min(nodes.len() - 2)
    } else {
        0
    };
    let rules = (0..=max_order)
        .map(|k| nodes.spectral_rule(k, 0.0))
        .collect::<Result<Vec<_>>>()?;
    let size = outputs[0].delta.len();
    let mut tables = vec![vec![0.0; size]; max_order + 1];
    let kind = NormKind::new(params.a, grids.time.t0(), 1);
    let times = grids.time.times();
    let mut node_norms = Vec::with_capacity(outputs.len());
    let mut members = Vec::with_capacity(outputs.len());
    for (j, out) in outputs.into_iter().enumerate() {
        node_norms.push(weighted_norm_phase(kind, &times, grids.phase.nv(), &out.delta)?.value);
        for (table, rule) in tables.iter_mut().zip(&rules) {
            let w = rule[j];
            table.iter_mut().zip(&out.delta).for_each(|(t, d)| *t += w * d);
        }
        members.push(EnsembleMember {
            z: nodes.nodes[j],
            field: out.field,
            summary: Some(out.summary),
        });
    }
    Ok(ZEnsemble {
        nodes: nodes.clone(),
        a: params.a,
        params: Some(*params),
        setup,
        members,
        residual: Some(ResidualDerivatives {
            phase: grids.phase,
            time: grids.time,
            tables,
            node_norms,
        }),
    })
}

/// Coefficients of `E` in the orthonormal Legendre basis, `m = 0..N_z`.
#[derive(Debug, Clone, PartialEq)]
pub struct GpcTable {
    pub nodes: CollocationNodes,
    pub coefficients: Vec<FieldTable>,
    /// `|c_m|_(a,t0)` per degree.
    pub norms: Vec<f64>,
    /// Coefficients below this are treated as noise in the decay fit.
    pub noise_floor: f64,
    /// Least-squares rate `r` of `|c_m| ~ e^{-r m}` over coefficients above the floor.
    pub decay_rate: Option<f64>,
}

impl GpcTable {
    /// `sum_m c_m P_m(z)`.
    pub fn eval(&self, z: f64) -> Result<FieldTable> {
        let first = &self.coefficients[0];
        let mut values = vec![0.0; first.values().len()];
        for (m, c) in self.coefficients.iter().enumerate() {
            let p = super::basis::legendre_orthonormal(m, z);
            values.iter_mut().zip(c.values()).for_each(|(acc, v)| *acc += p * v);
        }
        FieldTable::new(first.x_grid(), first.time_grid(), values)
    }

    /// Long-format CSV `m,i,n,x,t,coefficient`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{stem}.csv"));
        let mut out = std::io::BufWriter::new(fs::File::create(&path)?);
        writeln!(out, "m,i,n,x,t,coefficient")?;
        for (m, c) in self.coefficients.iter().enumerate() {
            let (xg, tg) = (c.x_grid(), c.time_grid());
            for n in 0..tg.len() {
                for i in 0..xg.len() {
                    writeln!(
                        out,
                        "{m},{i},{n},{:e},{:e},{:e}",
                        xg.point(i),
                        tg.time(n),
                        c.value(i, n)
                    )?;
                }
            }
        }
        out.flush()?;
        Ok(path)
    }
}

pub fn gpc_coefficients(ensemble: &ZEnsemble) -> Result<GpcTable> {
    let proj = ensemble.nodes.projection()?;
    let n = ensemble.len();
    let coefficients = (0..n)
        .map(|m| ensemble.combine(&(0..n).map(|j| (j, proj[(m, j)])).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    let norms = coefficients
        .iter()
        .map(|c| c.weighted_norm(ensemble.a, 0).map(|r| r.value))
        .collect::<Result<Vec<_>>>()?;
    let peak = norms.iter().copied().fold(0.0, f64::max);
    let noise_floor = 1e-11 * peak;
    let decay_rate = fit_decay(&norms, noise_floor);
    Ok(GpcTable {
        nodes: ensemble.nodes.clone(),
        coefficients,
        norms,
        noise_floor,
        decay_rate,
    })
}

fn fit_decay(norms: &[f64], floor: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = norms
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > floor && c > 0.0)
        .map(|(m, &c)| (m as f64, c.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(-sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeEstimate {
    pub k: usize,
    /// `|d^k E / dz^k|_(a,t0)` from the collocation interpolant.
    pub spectral: f64,
    /// Same norm from finite differences, when the nodes allow a stencil.
    pub finite_difference: Option<f64>,
    /// `|spectral - fd|_(a,t0) / |spectral|_(a,t0)`.
    pub estimator_gap: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub field_bound: BoundCheck,
    pub orders: Vec<DerivativeEstimate>,
    pub pass: bool,
}

impl TheoremReport {
    pub fn norms(&self) -> Vec<(usize, f64)> {
        self.orders.iter().map(|o| (o.k, o.spectral)).collect()
    }
}

/// `|d^k E / dz^k|_(a,t0)` at `z = 0` for `k <= min(K, N_z - 2)`, with the
/// `k = 0` value checked against `8 a1`.
pub fn check_theorem_bounds(ensemble: &ZEnsemble, k_max: usize, a1: f64) -> Result<TheoremReport> {
    let a = ensemble.a;
    let e0 = ensemble.z_derivative(0)?;
    let field_bound = BoundCheck::new("|E(z=0)|_(a,t0) <= 8 a1", e0.weighted_norm(a, 0)?.value, 8.0 * a1);
    let floor = NOISE_FLOOR * field_bound.value;
    let top = if ensemble.len() >= 3 {
        k_max.min(ensemble.len() - 2)
    } else {
        0
    };
    let mut orders = Vec::new();
    for k in 1..=top {
        let spec = ensemble.z_derivative(k)?;
        let spectral = spec.weighted_norm(a, 0)?.value;
        let (finite_difference, estimator_gap) = match ensemble.z_derivative_fd(k) {
            Ok(fd) => {
                let gap = spec.sub(&fd)?.weighted_norm(a, 0)?.value;
                let fd_norm = fd.weighted_norm(a, 0)?.value;
                (Some(fd_norm), Some(ratio(gap, spectral.max(floor))))
            }
            Err(Error::DerivativeOrder { .. }) => (None, None),
            Err(e) => return Err(e),
        };
        let pass = spectral.is_finite() && estimator_gap.is_none_or(|g| g <= ESTIMATOR_TOL);
        orders.push(DerivativeEstimate {
            k,
            spectral,
            finite_difference,
            estimator_gap,
            pass,
        });
    }
    let pass = field_bound.pass && orders.iter().all(|o| o.pass);
    Ok(TheoremReport {
        field_bound,
        orders,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementRow {
    pub k: usize,
    pub coarse: f64,
    pub fine: f64,
    pub drift: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub coarse_nodes: usize,
    pub fine_nodes: usize,
    pub rows: Vec<RefinementRow>,
    pub pass: bool,
}

/// Relative change `|fine - coarse| / max(|fine|, |coarse|, floor)` of each
/// order `k >= 1` present in both.
pub fn compare_refinement(
    coarse: &[(usize, f64)],
    fine: &[(usize, f64)],
    coarse_nodes: usize,
    fine_nodes: usize,
    tol: f64,
    floor: f64,
) -> RefinementReport {
    let rows: Vec<RefinementRow> = coarse
        .iter()
        .filter(|c| c.0 >= 1)
        .filter_map(|&(k, c)| fine.iter().find(|f| f.0 == k).map(|&(_, f)| (k, c, f)))
        .map(|(k, c, f)| {
            let drift = ratio((f - c).abs(), f.abs().max(c.abs()).max(floor));
            RefinementRow {
                k,
                coarse: c,
                fine: f,
                drift,
                pass: c.is_finite() && f.is_finite() && drift <= tol,
            }
        })
        .collect();
    let pass = rows.iter().all(|r| r.pass);
    RefinementReport {
        coarse_nodes,
        fine_nodes,
        rows,
        pass,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryOrder {
    pub k: usize,
    /// `|d^k Delta / dz^k|_(a,t0,1)` at `z = 0`.
    pub norm: f64,
    /// `sup |grad_(x,v) d^k f* / dz^k|` at `z = 0`.
    pub gradient_sup: f64,
    /// `gradient_sup |E| (2/a + 1/(a t0))`: the first-order displacement bound.
    pub reported_bound: f64,
    pub finite: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryReport {
    /// Largest `|E|_(a,t0)` over the nodes, interpolated sup in x and free tail included.
    pub field_norm: f64,
    /// `|Delta(z_j)|_(a,t0,1) <= 3 |grad f*(z_j)| |E(z_j)| / a` per node.
    pub node_checks: Vec<BoundCheck>,
    /// The same inequality for the interpolant at `z = 0`.
    pub center_check: BoundCheck,
    pub orders: Vec<CorollaryOrder>,
    pub pass: bool,
}

impl CorollaryReport {
    pub fn norms(&self) -> Vec<(usize, f64)> {
        self.orders.iter().map(|o| (o.k, o.norm)).collect()
    }
}

pub fn check_corollary(ensemble: &ZEnsemble, spec: &ProfileSpec) -> Result<CorollaryReport> {
    let res = ensemble
        .residual
        .as_ref()
        .ok_or_else(|| Error::param("ensemble", "no trajectory residuals recorded"))?;
    let a = ensemble.a;
    let t0 = res.time.t0();
    let node_field: Vec<f64> = ensemble
        .members
        .iter()
        .map(|m| match &m.summary {
            Some(s) => Ok(s.field_norm_bound),
            None => m.field.weighted_norm_interpolated(a, 0).map(|r| r.value),
        })
        .collect::<Result<_>>()?;
    let field_norm = node_field.iter().copied().fold(0.0, f64::max);
    let node_checks = ensemble
        .members
        .iter()
        .zip(&node_field)
        .zip(&res.node_norms)
        .map(|((m, &e), &d)| {
            BoundCheck::new(
                "|Delta|_(a,t0,1) <= 3 |grad f*| |E|_(a,t0) / a",
                d,
                3.0 * gradient_supremum(spec, m.z, 0) * e / a,
            )
        })
        .collect::<Vec<_>>();
    let kind = NormKind::new(a, t0, 1);
    let times = res.time.times();
    let mut orders = Vec::new();
    for (k, table) in res.tables.iter().enumerate() {
        let norm = weighted_norm_phase(kind, &times, res.phase.nv(), table)?.value;
        let gradient_sup = gradient_supremum(spec, 0.0, k as u32);
        orders.push(CorollaryOrder {
            k,
            norm,
            gradient_sup,
            reported_bound: gradient_sup * field_norm * (2.0 / a + 1.0 / (a * t0)),
            finite: norm.is_finite(),
        });
    }
    let center_check = BoundCheck::new(
        "|Delta(z=0)|_(a,t0,1) <= 3 |grad f*| |E|_(a,t0) / a",
        orders[0].norm,
        3.0 * orders[0].gradient_sup * field_norm / a,
    );
    let pass = center_check.pass && node_checks.iter().all(|c| c.pass) && orders.iter().all(|o| o.finite);
    Ok(CorollaryReport {
        field_norm,
        node_checks,
        center_check,
        orders,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::XGrid;
    use crate::uq::NodeFamily;

    fn grids() -> (XGrid, TimeGrid) {
        (XGrid::new(16).unwrap(), TimeGrid::new(8.0, 20.0, 25).unwrap())
    }

    fn g(x: f64, t: f64) -> f64 {
        (x.sin() + 0.3 * (2.0 * x).cos()) * (-t).exp()
    }

    fn manufactured(family: NodeFamily, n: usize, f: impl Fn(f64) -> f64) -> ZEnsemble {
        let nodes = CollocationNodes::new(family, n).unwrap();
        let (xg, tg) = grids();
        let fields = nodes
            .nodes
            .iter()
            .map(|&z| FieldTable::from_fn(xg, tg, |x, t| f(z) * g(x, t)))
            .collect();
        ZEnsemble::from_fields(nodes, fields, 1.0).unwrap()
    }

    #[test]
    fn constant_ensemble_has_no_z_content() {
        let ens = manufactured(NodeFamily::GaussLegendre, 9, |_| 1.0);
        let gpc = gpc_coefficients(&ens).unwrap();
        assert!(gpc.norms[1..].iter().all(|&c| c <= 1e-12), "{:?}", gpc.norms);
        for k in 1..=2 {
            assert!(ens.z_derivative(k).unwrap().weighted_norm(1.0, 0).unwrap().value <= 1e-12);
        }
    }

    #[test]
    fn linear_ensemble_differentiates_exactly() {
        for family in [NodeFamily::GaussLegendre, NodeFamily::Chebyshev] {
            let ens = manufactured(family, 9, |z| 1.0 + z);
            let (xg, tg) = grids();
            let exact = FieldTable::from_fn(xg, tg, g);
            let d = ens.z_derivative(1).unwrap();
            assert!(d.sub(&exact).unwrap().weighted_norm(1.0, 0).unwrap().value <= 1e-12);
            let gpc = gpc_coefficients(&ens).unwrap();
            assert!(gpc.norms[2..].iter().all(|&c| c <= 1e-12), "{:?}", gpc.norms);
            assert!(gpc.norms[1] > 0.1);
        }
    }

    #[test]
    fn polynomial_ensembles_are_exact() {
        // degree 4 < N_z
        let p = |z: f64| 0.5 - z + 2.0 * z * z + 0.7 * z.powi(3) - 0.2 * z.powi(4);
        let ens = manufactured(NodeFamily::GaussLegendre, 7, p);
        let gpc = gpc_coefficients(&ens).unwrap();
        assert!(gpc.norms[5..].iter().all(|&c| c <= 1e-12));
        let (xg, tg) = grids();
        let d2 = FieldTable::from_fn(xg, tg, |x, t| 4.0 * g(x, t));
        assert!(ens.z_derivative(2).unwrap().sub(&d2).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn interpolant_reproduces_nodes() {
        let ens = manufactured(NodeFamily::Chebyshev, 8, |z| (0.7 * z).exp());
        let gpc = gpc_coefficients(&ens).unwrap();
        for (j, m) in ens.members().iter().enumerate() {
            let r = gpc.eval(ens.nodes().nodes[j]).unwrap();
            assert!(r.max_abs_diff(&m.field).unwrap() <= 1e-10 * m.field.max_abs().max(1e-300));
        }
        // analytic dependence decays geometrically
        let rate = gpc.decay_rate.unwrap();
        assert!(rate > 1.0, "{rate}");
    }

    #[test]
    fn estimators_agree_on_analytic_dependence() {
        let ens = manufactured(NodeFamily::GaussLegendre, 13, |z| (0.3 * z).exp());
        let report = check_theorem_bounds(&ens, 2, 1.0).unwrap();
        assert_eq!(report.orders.len(), 2);
        for o in &report.orders {
            assert!(o.estimator_gap.unwrap() < 1e-4, "{o:?}");
        }
        let exact = [0.3, 0.09];
        let scale = (-8.0f64).exp() * 8.0f64.exp();
        let peak = FieldTable::from_fn(grids().0, grids().1, g)
            .weighted_norm(1.0, 0)
            .unwrap()
            .value;
        for (o, e) in report.orders.iter().zip(exact) {
            assert!((o.spectral - e * peak * scale).abs() < 1e-10, "{o:?}");
        }
    }

    #[test]
    fn refinement_rows() {
        let r = compare_refinement(&[(1, 1.0), (2, 2.0)], &[(1, 1.01), (2, 2.5)], 9, 13, 0.05, 0.0);
        assert!(r.rows[0].pass);
        assert!(!r.rows[1].pass);
        assert!(!r.pass);
        let z = compare_refinement(&[(1, 0.0)], &[(1, 0.0)], 9, 13, 0.05, 0.0);
        assert!(z.pass);
        let noise = compare_refinement(&[(1, 0.0)], &[(1, 3e-20)], 9, 13, 0.05, 1e-15);
        assert!(noise.pass && noise.rows[0].drift < 1e-4);
        assert!(z.pass);
        let empty = compare_refinement(&[(0, 1.0)], &[(0, 1.0)], 1, 5, 0.05, 0.0);
        assert!(empty.rows.is_empty() && empty.pass);
    }

    #[test]
    fn too_few_nodes_for_order() {
        let ens = manufactured(NodeFamily::GaussLegendre, 3, |z| z);
        assert!(ens.z_derivative(1).is_ok());
        assert!(matches!(ens.z_derivative(2), Err(Error::DerivativeOrder { .. })));
    }
}
