use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use landau_core::checks::BoundCheck;
use landau_core::params::{check_assumptions, AssumptionReport};
use landau_core::profiles::{check_profile, default_z_samples, ProfileCheckReport};
use landau_core::scattering::{picard_solve, SolveSummary, REDUCTION_PARTITION};
use landau_core::uq::{
    check_corollary, check_theorem_bounds, compare_refinement, gpc_coefficients, run_collocation, CorollaryReport,
    GpcTable, RefinementReport, TheoremReport, ESTIMATOR_TOL, NOISE_FLOOR, REFINEMENT_TOL,
};
use landau_core::{SolveResult, ZEnsemble};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::{render_rows, CheckRow};

/// What a command reports; the exit status is 1 iff `failures` is non-empty.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub text: String,
    pub json: Value,
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass() {
            crate::error::EXIT_PASS
        } else {
            crate::error::EXIT_CHECK_FAILED
        }
    }
}

fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("manifest serializes");
    fs::write(path, text).map_err(CliError::io(path))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))
}

fn failing(rows: &[CheckRow]) -> Vec<String> {
    rows.iter().filter(|r| !r.pass).map(CheckRow::label).collect()
}

fn table(rows: &[CheckRow]) -> String {
    render_rows(rows.iter().map(|r| ("", r)))
}

pub struct CheckRun {
    pub gate: AssumptionReport,
    pub profile: ProfileCheckReport,
}

pub fn run_check(cfg: &RunConfig) -> Result<CheckRun, CliError> {
    let params = cfg.params()?;
    let spec = cfg.profile()?;
    Ok(CheckRun {
        gate: check_assumptions(&params),
        profile: check_profile(
            &spec,
            params.a,
            params.a1,
            params.a2,
            params.k_max,
            &default_z_samples(),
        ),
    })
}

/// The admissibility gate and the profile hypotheses.
pub fn cmd_check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let CheckRun { gate, profile } = run_check(cfg)?;
    let mut failures: Vec<String> = gate.failing().iter().map(|s| s.to_string()).collect();
    for (pass, name) in [
        (profile.smoothness.pass, "profile smoothness"),
        (profile.decay.pass, "profile decay"),
        (profile.gradient_decay.pass, "profile gradient decay"),
    ] {
        if !pass {
            failures.push(name.into());
        }
    }
    let rows: Vec<CheckRow> = gate
        .conditions
        .iter()
        .chain([&gate.a3_at_t0])
        .map(|c| CheckRow::from_condition("gate", c))
        .collect();
    let mut text = table(&rows);
    let _ = writeln!(
        text,
        "t0 = {} (smallest admissible {})",
        cfg.params()?.t0,
        gate.minimal_t0
    );
    let _ = writeln!(text, "profile: {}", profile.summary());
    if !profile.positive_background {
        let _ = writeln!(text, "warning: c_0(z) is not positive at every sample");
    }
    if failures.is_empty() {
        let _ = writeln!(text, "check: pass");
    } else {
        let _ = writeln!(text, "check: FAIL ({})", failures.join(", "));
    }
    let json = json!({
        "gate": gate,
        "profile": profile,
        "pass": failures.is_empty(),
        "failing": failures,
    });
    Ok(Outcome { text, json, failures })
}

fn check_z(z: f64) -> Result<(), CliError> {
    if !(-1.0..=1.0).contains(&z) {
        return Err(CliError::Usage(format!("z = {z} lies outside [-1, 1]")));
    }
    Ok(())
}

pub fn run_solve(cfg: &RunConfig, z: f64) -> Result<SolveResult, CliError> {
    check_z(z)?;
    let params = cfg.params()?;
    Ok(picard_solve(
        &cfg.profile()?,
        &params,
        z,
        &cfg.grids()?,
        &cfg.picard_options(),
    )?)
}

/// Bound-check rows of one converged solve.
pub fn solve_rows(source: &str, s: &SolveSummary) -> Vec<CheckRow> {
    s.checks.all().iter().map(|c| CheckRow::from_check(source, c)).collect()
}

/// One fixed-point solve at `z`; writes `field`, `density` and `solve_manifest.json`.
pub fn cmd_solve(cfg: &RunConfig, z: f64, out: &Path) -> Result<Outcome, CliError> {
    let result = run_solve(cfg, z)?;
    create_dir(out)?;
    let hash = cfg.hash();
    let meta = |kind: &str| json!({"kind": kind, "z": z, "config_hash": hash});
    result.field.save(out, "field", meta("field"))?;
    result.density.save(out, "density", meta("density"))?;

    let gate = check_assumptions(&cfg.params()?);
    let mut rows: Vec<CheckRow> = gate
        .conditions
        .iter()
        .map(|c| CheckRow::from_condition("gate", c))
        .collect();
    rows.extend(solve_rows("solve", &result.summary));
    let s = &result.summary;
    let manifest = json!({
        "kind": "solve",
        "config_hash": hash,
        "config": cfg,
        "z": z,
        "threads": rayon::current_num_threads(),
        "reduction_partition": REDUCTION_PARTITION,
        "files": ["field.csv", "field.json", "density.csv", "density.json"],
        "summary": s,
        "checks": rows,
    });
    write_json(&out.join("solve_manifest.json"), &manifest)?;

    let mut text = String::new();
    let _ = writeln!(
        text,
        "z = {z}: converged in {} iterations, |E|_(a,t0) = {:.6e}, residual {:.3e}",
        s.iterations, s.field_norm_bound, s.residual
    );
    let incs: Vec<String> = s.increments.iter().map(|v| format!("{v:.3e}")).collect();
    let _ = writeln!(text, "increments: {}", incs.join(" "));
    text.push_str(&table(&rows));
    let failures = failing(&rows);
    let _ = writeln!(text, "wrote {}", out.display());
    Ok(Outcome {
        text,
        json: manifest,
        failures,
    })
}

pub struct UqLevel {
    pub ensemble: ZEnsemble,
    pub gpc: GpcTable,
    pub theorem: TheoremReport,
    pub corollary: CorollaryReport,
}

pub struct UqRun {
    pub coarse: UqLevel,
    pub fine: Option<UqLevel>,
    pub theorem_refinement: Option<RefinementReport>,
    pub corollary_refinement: Option<RefinementReport>,
}

fn run_level(cfg: &RunConfig, n_z: usize) -> Result<UqLevel, CliError> {
    let params = cfg.params()?;
    let spec = cfg.profile()?;
    let nodes = cfg.nodes(n_z)?;
    let ensemble = run_collocation(&spec, &params, &nodes, &cfg.grids()?, &cfg.picard_options())?;
    Ok(UqLevel {
        gpc: gpc_coefficients(&ensemble)?,
        theorem: check_theorem_bounds(&ensemble, params.k_max as usize, params.a1)?,
        corollary: check_corollary(&ensemble, &spec)?,
        ensemble,
    })
}

/// Collocation at `N_z` nodes and, unless `refinement_step` is 0, at
/// `N_z + refinement_step` nodes for the refinement comparison.
pub fn run_uq(cfg: &RunConfig) -> Result<UqRun, CliError> {
    let n_z = cfg.grids.n_z;
    let coarse = run_level(cfg, n_z)?;
    let step = cfg.solver.refinement_step;
    if step == 0 {
        return Ok(UqRun {
            coarse,
            fine: None,
            theorem_refinement: None,
            corollary_refinement: None,
        });
    }
    let fine = run_level(cfg, n_z + step)?;
    let n_f = n_z + step;
    let theorem_refinement = compare_refinement(
        &coarse.theorem.norms(),
        &fine.theorem.norms(),
        n_z,
        n_f,
        REFINEMENT_TOL,
        NOISE_FLOOR * coarse.theorem.field_bound.value,
    );
    let residual_scale = coarse.corollary.orders.first().map_or(0.0, |o| o.norm);
    let corollary_refinement = compare_refinement(
        &coarse.corollary.norms(),
        &fine.corollary.norms(),
        n_z,
        n_f,
        REFINEMENT_TOL,
        NOISE_FLOOR * residual_scale,
    );
    Ok(UqRun {
        coarse,
        fine: Some(fine),
        theorem_refinement: Some(theorem_refinement),
        corollary_refinement: Some(corollary_refinement),
    })
}

fn finite(what: String, v: f64) -> BoundCheck {
    BoundCheck::new(what, v, f64::MAX)
}

fn level_rows(tag: &str, level: &UqLevel) -> Vec<CheckRow> {
    let mut rows = vec![CheckRow::from_check(
        format!("{tag}/theorem"),
        &level.theorem.field_bound,
    )];
    for o in &level.theorem.orders {
        rows.push(CheckRow::from_check(
            format!("{tag}/theorem"),
            &finite(format!("|d^{k}E/dz^{k}|_(a,t0) finite", k = o.k), o.spectral),
        ));
        if let Some(gap) = o.estimator_gap {
            rows.push(CheckRow::from_check(
                format!("{tag}/theorem"),
                &BoundCheck::new(
                    format!("spectral vs finite-difference gap of d^{k}E/dz^{k} <= 1e-4", k = o.k),
                    gap,
                    ESTIMATOR_TOL,
                ),
            ));
        }
    }
    for (j, c) in level.corollary.node_checks.iter().enumerate() {
        rows.push(CheckRow::from_check(format!("{tag}/corollary/node{j}"), c));
    }
    rows.push(CheckRow::from_check(
        format!("{tag}/corollary/z=0"),
        &level.corollary.center_check,
    ));
    for o in &level.corollary.orders {
        rows.push(CheckRow::from_check(
            format!("{tag}/corollary"),
            &finite(format!("|d^{k}Delta/dz^{k}|_(a,t0,1) finite", k = o.k), o.norm),
        ));
    }
    for (j, m) in level.ensemble.members().iter().enumerate() {
        if let Some(s) = &m.summary {
            rows.extend(solve_rows(&format!("{tag}/node{j}"), s).into_iter().filter(|r| !r.pass));
            let worst = s.checks.all().iter().map(|c| c.ratio / c.limit).fold(0.0, f64::max);
            rows.push(CheckRow::from_check(
                format!("{tag}/node{j}"),
                &BoundCheck::new("largest solve-check ratio / limit <= 1", worst, 1.0),
            ));
        }
    }
    rows
}

fn refinement_rows(label: &str, what: &str, r: &RefinementReport) -> Vec<CheckRow> {
    r.rows
        .iter()
        .map(|row| {
            CheckRow::from_check(
                format!("refinement/{label}"),
                &BoundCheck::new(
                    format!(
                        "relative change of {what} (k = {}) from {} to {} nodes <= 5%",
                        row.k, r.coarse_nodes, r.fine_nodes
                    ),
                    row.drift,
                    REFINEMENT_TOL,
                ),
            )
        })
        .collect()
}

/// All check rows of a collocation study.
pub fn uq_rows(run: &UqRun) -> Vec<CheckRow> {
    let mut rows = level_rows(&format!("nz{}", run.coarse.ensemble.len()), &run.coarse);
    if let Some(fine) = &run.fine {
        rows.extend(level_rows(&format!("nz{}", fine.ensemble.len()), fine));
    }
    if let Some(r) = &run.theorem_refinement {
        rows.extend(refinement_rows("theorem", "|d^kE/dz^k|_(a,t0)", r));
    }
    if let Some(r) = &run.corollary_refinement {
        rows.extend(refinement_rows("corollary", "|d^kDelta/dz^k|_(a,t0,1)", r));
    }
    rows
}

fn save_level(dir: &Path, level: &UqLevel, hash: &str) -> Result<Value, CliError> {
    create_dir(dir)?;
    level.gpc.save(dir, "gpc")?;
    for (j, m) in level.ensemble.members().iter().enumerate() {
        m.field.save(
            dir,
            &format!("node_{j:02}"),
            json!({"kind": "field", "z": m.z, "config_hash": hash}),
        )?;
    }
    let report = json!({
        "theorem": level.theorem,
        "corollary": level.corollary,
        "gpc_norms": level.gpc.norms,
        "gpc_noise_floor": level.gpc.noise_floor,
        "gpc_decay_rate": level.gpc.decay_rate,
    });
    write_json(&dir.join("reports.json"), &report)?;
    write_json(&dir.join("ensemble.json"), &level.ensemble.manifest())?;
    Ok(report)
}

/// Collocation sweep with the z-regularity checks of the field and of the
/// residual; writes one subdirectory per ensemble and `uq_manifest.json`.
pub fn cmd_uq(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let run = run_uq(cfg)?;
    create_dir(out)?;
    let hash = cfg.hash();
    let coarse_dir = format!("nz{}", run.coarse.ensemble.len());
    save_level(&out.join(&coarse_dir), &run.coarse, &hash)?;
    let fine_dir = match &run.fine {
        Some(f) => {
            let d = format!("nz{}", f.ensemble.len());
            save_level(&out.join(&d), f, &hash)?;
            Some(d)
        }
        None => None,
    };
    let rows = uq_rows(&run);
    let manifest = json!({
        "kind": "uq",
        "config_hash": hash,
        "config": cfg,
        "threads": rayon::current_num_threads(),
        "n_z": run.coarse.ensemble.len(),
        "refined_n_z": run.fine.as_ref().map(|f| f.ensemble.len()),
        "directories": [Some(coarse_dir), fine_dir],
        "gpc_decay_rate": run.coarse.gpc.decay_rate,
        "theorem_norms": run.coarse.theorem.norms(),
        "corollary_norms": run.coarse.corollary.norms(),
        "theorem_refinement": run.theorem_refinement,
        "corollary_refinement": run.corollary_refinement,
        "checks": rows,
    });
    write_json(&out.join("uq_manifest.json"), &manifest)?;

    let mut text = String::new();
    let norms = |n: Vec<(usize, f64)>| {
        n.iter()
            .map(|(k, v)| format!("k={k}: {v:.4e}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let _ = writeln!(
        text,
        "{} nodes: |d^kE/dz^k|_(a,t0) {}; |d^kDelta/dz^k|_(a,t0,1) {}",
        run.coarse.ensemble.len(),
        norms(run.coarse.theorem.norms()),
        norms(run.coarse.corollary.norms())
    );
    if let Some(f) = &run.fine {
        let _ = writeln!(
            text,
            "{} nodes: |d^kE/dz^k|_(a,t0) {}; |d^kDelta/dz^k|_(a,t0,1) {}",
            f.ensemble.len(),
            norms(f.theorem.norms()),
            norms(f.corollary.norms())
        );
    }
    text.push_str(&table(&rows));
    let failures = failing(&rows);
    let _ = writeln!(text, "wrote {}", out.display());
    Ok(Outcome {
        text,
        json: manifest,
        failures,
    })
}
