//! Check rows shared by the manifests, and their aggregation into a summary table.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use landau_core::checks::{ratio, BoundCheck};
use landau_core::params::ConditionCheck;
use serde::{Deserialize, Deserializer, Serialize};

use crate::commands::Outcome;
use crate::error::CliError;

/// JSON has no NaN or infinity; serde_json writes them as `null`.
fn nullable<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub source: String,
    pub inequality: String,
    #[serde(deserialize_with = "nullable")]
    pub value: f64,
    #[serde(deserialize_with = "nullable")]
    pub bound: f64,
    #[serde(deserialize_with = "nullable")]
    pub ratio: f64,
    #[serde(deserialize_with = "nullable")]
    pub limit: f64,
    pub pass: bool,
}

impl CheckRow {
    pub fn from_check(source: impl Into<String>, c: &BoundCheck) -> Self {
        Self {
            source: source.into(),
            inequality: c.inequality.clone(),
            value: c.value,
            bound: c.bound,
            ratio: c.ratio,
            limit: c.limit,
            pass: c.pass,
        }
    }

    pub fn from_condition(source: impl Into<String>, c: &ConditionCheck) -> Self {
        Self {
            source: source.into(),
            inequality: c.name.clone(),
            value: c.lhs,
            bound: c.rhs,
            ratio: ratio(c.lhs, c.rhs),
            limit: 1.0,
            pass: c.pass,
        }
    }

    pub fn label(&self) -> String {
        format!("{}: {}", self.source, self.inequality)
    }
}

/// Fixed-width table; failing rows start with `FAIL`.
pub fn render_rows<'a>(rows: impl IntoIterator<Item = (&'a str, &'a CheckRow)>) -> String {
    let rows: Vec<_> = rows.into_iter().collect();
    let mut out = String::new();
    let src_w = rows
        .iter()
        .map(|(m, r)| m.len() + r.source.len() + usize::from(!m.is_empty()))
        .chain([6])
        .max()
        .unwrap_or(6);
    let ineq_w = rows
        .iter()
        .map(|(_, r)| r.inequality.len())
        .chain([10])
        .max()
        .unwrap_or(10);
    let _ = writeln!(
        out,
        "{:<4}  {:<src_w$}  {:<ineq_w$}  {:>11}  {:>11}  {:>9}",
        "", "source", "inequality", "value", "bound", "ratio"
    );
    for (m, r) in rows {
        let source = if m.is_empty() {
            r.source.clone()
        } else {
            format!("{m}/{}", r.source)
        };
        let _ = writeln!(
            out,
            "{:<4}  {:<src_w$}  {:<ineq_w$}  {:>11.4e}  {:>11.4e}  {:>9.5}",
            if r.pass { "ok" } else { "FAIL" },
            source,
            r.inequality,
            r.value,
            r.bound,
            r.ratio
        );
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn manifests(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let mut entries = fs::read_dir(dir)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", dir.display())))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", dir.display())))?;
    entries.sort();
    for p in entries {
        if p.is_dir() {
            manifests(&p, out)?;
        } else if p
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.ends_with("manifest.json"))
        {
            out.push(p);
        }
    }
    Ok(())
}

struct Loaded {
    name: String,
    headline: String,
    rows: Vec<CheckRow>,
}

fn load(path: &Path, root: &Path) -> Result<Loaded, CliError> {
    let bad = |reason: String| CliError::Manifest {
        path: path.to_path_buf(),
        reason,
    };
    let text = fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
    let json: serde_json::Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    let checks = json.get("checks").ok_or_else(|| bad("no `checks` array".into()))?;
    let rows: Vec<CheckRow> = serde_json::from_value(checks.clone()).map_err(|e| bad(e.to_string()))?;
    let name = path
        .strip_prefix(root)
        .unwrap_or(path)
        .to_string_lossy()
        .trim_end_matches(".json")
        .to_string();
    Ok(Loaded {
        headline: headline(&name, &json),
        name,
        rows,
    })
}

fn headline(name: &str, json: &serde_json::Value) -> String {
    let kind = json.get("kind").and_then(|k| k.as_str()).unwrap_or("run");
    match kind {
        "solve" => {
            let s = &json["summary"];
            let max_ratio = s["ratios"]
                .as_array()
                .map(|r| r.iter().filter_map(|v| v.as_f64()).skip(1).fold(0.0, f64::max))
                .unwrap_or(f64::NAN);
            format!(
                "{name}: solve at z = {}, {} iterations, contraction ratio <= {:.3e} (bound {:.3e}), |E|_(a,t0) = {:.4e}",
                s["z"],
                s["iterations"],
                max_ratio,
                s["contraction_bound"].as_f64().unwrap_or(f64::NAN),
                s["field_norm_bound"].as_f64().unwrap_or(f64::NAN)
            )
        }
        "uq" => format!(
            "{name}: collocation with {} nodes, refinement to {}, gPC decay rate {}",
            json["n_z"], json["refined_n_z"], json["gpc_decay_rate"]
        ),
        other => format!("{name}: {other}"),
    }
}

/// Aggregates every `*manifest.json` under `dir` into `dir/summary.csv`.
pub fn cmd_report(dir: &Path) -> Result<Outcome, CliError> {
    if !dir.is_dir() {
        return Err(CliError::Usage(format!("{} is not a directory", dir.display())));
    }
    let mut paths = Vec::new();
    manifests(dir, &mut paths)?;
    let loaded = paths.iter().map(|p| load(p, dir)).collect::<Result<Vec<_>, _>>()?;

    let mut csv = String::from("manifest,source,inequality,value,bound,ratio,limit,pass\n");
    let mut flat = Vec::new();
    for l in &loaded {
        for r in &l.rows {
            let _ = writeln!(
                csv,
                "{},{},{},{:e},{:e},{:e},{:e},{}",
                csv_field(&l.name),
                csv_field(&r.source),
                csv_field(&r.inequality),
                r.value,
                r.bound,
                r.ratio,
                r.limit,
                r.pass
            );
            flat.push((l.name.as_str(), r));
        }
    }
    let csv_path = dir.join("summary.csv");
    fs::write(&csv_path, csv).map_err(CliError::io(&csv_path))?;

    let failures: Vec<String> = flat
        .iter()
        .filter(|(_, r)| !r.pass)
        .map(|(m, r)| format!("{m}/{}", r.label()))
        .collect();
    let mut text = String::new();
    for l in &loaded {
        let _ = writeln!(text, "{}", l.headline);
    }
    text.push_str(&render_rows(flat.iter().copied()));
    let _ = writeln!(
        text,
        "{} manifests, {} checks, {} failing",
        loaded.len(),
        flat.len(),
        failures.len()
    );
    let json = serde_json::json!({
        "manifests": loaded.iter().map(|l| &l.name).collect::<Vec<_>>(),
        "rows": flat.iter().map(|(m, r)| serde_json::json!({"manifest": m, "check": r})).collect::<Vec<_>>(),
        "summary_csv": csv_path,
        "failing": failures,
    });
    Ok(Outcome { text, json, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_reads_as_nan() {
        let row: CheckRow = serde_json::from_str(
            r#"{"source":"s","inequality":"i","value":null,"bound":1.0,"ratio":null,"limit":1.0,"pass":false}"#,
        )
        .unwrap();
        assert!(row.value.is_nan() && row.ratio.is_nan());
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("|E|_(a,t0)"), "\"|E|_(a,t0)\"");
        assert_eq!(csv_field("plain"), "plain");
    }
}
