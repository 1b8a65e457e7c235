//! TOML run configuration. Every block and field is optional; omitted values
//! take the reference configuration.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use landau_core::scattering::SolveGrids;
use landau_core::uq::CollocationNodes;
use landau_core::{
    DampingParams, NodeFamily, PhaseGrid, PhaseQuadrature, PicardOptions, ProfileSpec, TimeGrid, TrajectoryOptions,
    VelocityShape, XGrid, XMode, ZDependence,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "config line {line}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    /// Field decay rate. Default 1.
    pub a: f64,
    /// Profile smoothness amplitude. Default 0.002.
    pub a1: f64,
    /// Profile decay amplitude. Default 0.002.
    pub a2: f64,
    /// Largest z-derivative order. Default 2.
    #[serde(rename = "K")]
    pub k_max: u32,
    /// Start time; defaults to the smallest value the gate admits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self {
            a: 1.0,
            a1: 0.002,
            a2: 0.002,
            k_max: 2,
            t0: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeName {
    Sech,
    Gaussian,
}

/// `offset + cos cos(frequency z) + sin sin(frequency z)`, complex values as `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigConfig {
    pub offset: [f64; 2],
    pub cos: [f64; 2],
    pub sin: [f64; 2],
    pub frequency: f64,
}

/// One x-mode: polynomial `coefficients[p] z^p` or a `trigonometric` block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub k: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coefficients: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trigonometric: Option<TrigConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileConfig {
    /// Default "sech".
    pub shape: ShapeName,
    /// Sech rate `b`; defaults to `pi/2`. Ignored by the gaussian.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    /// Default 1.
    pub scale: f64,
    /// Default: `c0 = 3.5e-4` and `c1(z) = 1.5e-4 (1 + 0.3 z)`.
    pub modes: Vec<ModeConfig>,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            shape: ShapeName::Sech,
            rate: None,
            scale: 1.0,
            modes: vec![
                ModeConfig {
                    k: 0,
                    coefficients: vec![[3.5e-4, 0.0]],
                    trigonometric: None,
                },
                ModeConfig {
                    k: 1,
                    coefficients: vec![[1.5e-4, 0.0], [4.5e-5, 0.0]],
                    trigonometric: None,
                },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridsConfig {
    /// Default 64; a power of two.
    pub nx: usize,
    /// Default 129.
    pub nv: usize,
    /// Default 6.
    pub v_max: f64,
    /// Default 176.
    pub nt: usize,
    /// Horizon; defaults to `t0 + 35 / a`.
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    /// Collocation nodes in z. Default 9.
    pub n_z: usize,
    /// "gauss-legendre" (default) or "chebyshev".
    pub nodes: NodeFamily,
}

impl Default for GridsConfig {
    fn default() -> Self {
        Self {
            nx: 64,
            nv: 129,
            v_max: 6.0,
            nt: 176,
            t_end: None,
            n_z: 9,
            nodes: NodeFamily::GaussLegendre,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Picard stopping tolerance on `|E_(n+1) - E_n|_(a,t0)`. Default 1e-13.
    pub tol: f64,
    /// Default 40.
    pub max_iter: usize,
    /// Relative tolerance of the trajectory relaxation. Default 1e-13.
    pub trajectory_tol: f64,
    /// Default 60.
    pub trajectory_max_iter: usize,
    /// "split" (default), "spectral" or "direct".
    pub quadrature: PhaseQuadrature,
    /// Relative slack on observed contraction ratios. Default 0.10.
    pub contraction_slack: f64,
    /// Bound on `|dF(E)/dx - (rho - rho0)|_inf`. Default 5e-5.
    pub consistency_tol: f64,
    /// Consecutive growing increments that abort. Default 3.
    pub divergence_window: usize,
    /// Extra nodes of the refinement ensemble in `uq`; 0 disables it. Default 4.
    pub refinement_step: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let p = PicardOptions::default();
        Self {
            tol: p.tol,
            max_iter: p.max_iter,
            trajectory_tol: p.trajectory.tol,
            trajectory_max_iter: p.trajectory.max_iter,
            quadrature: p.quadrature,
            contraction_slack: p.contraction_slack,
            consistency_tol: p.consistency_tol,
            divergence_window: p.divergence_window,
            refinement_step: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Default "out"; `--out` overrides it.
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsConfig,
    pub profile: ProfileConfig,
    pub grids: GridsConfig,
    pub solver: SolverConfig,
    pub output: OutputConfig,
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

/// Line of `key = ...` inside `[table]` (or `[[table]]`), if present.
fn locate(src: &str, table: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (n, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            current = line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            continue;
        }
        if current == table {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(n + 1);
                }
            }
        }
    }
    None
}

/// Line of the header of the `index`-th `[[table]]` entry.
fn locate_entry(src: &str, table: &str, index: usize) -> Option<usize> {
    let header = format!("[[{table}]]");
    src.lines()
        .enumerate()
        .filter(|(_, l)| l.trim() == header)
        .nth(index)
        .map(|(n, _)| n + 1)
}

fn complex(c: [f64; 2]) -> Complex64 {
    Complex64::new(c[0], c[1])
}

impl RunConfig {
    /// Parses and validates; errors carry the offending line when known.
    pub fn from_toml(src: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(src).map_err(|e| ConfigError {
            line: e.span().map(|s| line_of(src, s.start)),
            message: e.message().to_string(),
        })?;
        cfg.validate(src)?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_toml().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    fn validate(&self, src: &str) -> Result<(), ConfigError> {
        let fail = |table: &str, key: &str, message: String| ConfigError {
            line: locate(src, table, key),
            message,
        };
        let params = self
            .params()
            .map_err(|e| fail("params", param_key(&e), e.to_string()))?;
        if let Some(t) = self.grids.t_end {
            if !(t > params.t0) {
                return Err(fail("grids", "T", format!("T = {t} must exceed t0 = {}", params.t0)));
            }
        }
        XGrid::new(self.grids.nx).map_err(|e| fail("grids", "nx", e.to_string()))?;
        self.phase_grid().map_err(|e| {
            let key = if self.grids.nv < 3 { "nv" } else { "v_max" };
            fail("grids", key, e.to_string())
        })?;
        self.time_grid(&params)
            .map_err(|e| fail("grids", "nt", e.to_string()))?;
        if self.grids.n_z == 0 {
            return Err(fail("grids", "n_z", "need at least one collocation node".into()));
        }
        for (i, m) in self.profile.modes.iter().enumerate() {
            let at = || locate_entry(src, "profile.modes", i);
            match (m.coefficients.is_empty(), &m.trigonometric) {
                (true, None) | (false, Some(_)) => {
                    return Err(ConfigError {
                        line: at(),
                        message: format!(
                            "mode k = {} needs exactly one of `coefficients` or `trigonometric`",
                            m.k
                        ),
                    })
                }
                _ => {}
            }
            if m.k as usize > self.grids.nx / 2 - 1 {
                return Err(ConfigError {
                    line: at(),
                    message: format!("mode k = {} is not resolved by nx = {}", m.k, self.grids.nx),
                });
            }
        }
        self.profile().map_err(|e| ConfigError {
            line: locate(src, "profile", "shape").or_else(|| locate_entry(src, "profile.modes", 0)),
            message: e.to_string(),
        })?;
        for (key, v) in [
            ("tol", self.solver.tol),
            ("trajectory_tol", self.solver.trajectory_tol),
            ("contraction_slack", self.solver.contraction_slack),
            ("consistency_tol", self.solver.consistency_tol),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(fail("solver", key, format!("`{key}` must be non-negative, got {v}")));
            }
        }
        for (key, v) in [
            ("max_iter", self.solver.max_iter),
            ("trajectory_max_iter", self.solver.trajectory_max_iter),
            ("divergence_window", self.solver.divergence_window),
        ] {
            if v == 0 {
                return Err(fail("solver", key, format!("`{key}` must be at least 1")));
            }
        }
        Ok(())
    }

    pub fn params(&self) -> landau_core::Result<DampingParams> {
        let p = &self.params;
        let d = DampingParams::derive(p.a, p.a1, p.a2, p.k_max)?;
        match p.t0 {
            Some(t0) => d.with_t0(t0),
            None => Ok(d),
        }
    }

    pub fn shape(&self) -> VelocityShape {
        match self.profile.shape {
            ShapeName::Sech => VelocityShape::Sech {
                rate: self.profile.rate.unwrap_or(FRAC_PI_2),
            },
            ShapeName::Gaussian => VelocityShape::Gaussian,
        }
    }

    pub fn profile(&self) -> landau_core::Result<ProfileSpec> {
        let modes = self
            .profile
            .modes
            .iter()
            .map(|m| XMode {
                wavenumber: m.k,
                coefficient: match &m.trigonometric {
                    Some(t) => ZDependence::Trigonometric {
                        offset: complex(t.offset),
                        cos_amp: complex(t.cos),
                        sin_amp: complex(t.sin),
                        frequency: t.frequency,
                    },
                    None => ZDependence::Polynomial {
                        coeffs: m.coefficients.iter().copied().map(complex).collect(),
                    },
                },
            })
            .collect();
        ProfileSpec::new(modes, self.shape(), self.profile.scale)
    }

    fn phase_grid(&self) -> landau_core::Result<PhaseGrid> {
        PhaseGrid::new(XGrid::new(self.grids.nx)?, self.grids.nv, self.grids.v_max)
    }

    fn time_grid(&self, params: &DampingParams) -> landau_core::Result<TimeGrid> {
        let t_end = self.grids.t_end.unwrap_or(params.t0 + 35.0 / params.a);
        TimeGrid::new(params.t0, t_end, self.grids.nt)
    }

    pub fn grids(&self) -> landau_core::Result<SolveGrids> {
        let params = self.params()?;
        Ok(SolveGrids {
            phase: self.phase_grid()?,
            time: self.time_grid(&params)?,
        })
    }

    pub fn picard_options(&self) -> PicardOptions {
        let s = &self.solver;
        PicardOptions {
            tol: s.tol,
            max_iter: s.max_iter,
            trajectory: TrajectoryOptions {
                tol: s.trajectory_tol,
                max_iter: s.trajectory_max_iter,
            },
            quadrature: s.quadrature,
            divergence_window: s.divergence_window,
            contraction_slack: s.contraction_slack,
            consistency_tol: s.consistency_tol,
        }
    }

    pub fn nodes(&self, n_z: usize) -> landau_core::Result<CollocationNodes> {
        CollocationNodes::new(self.grids.nodes, n_z)
    }
}

fn param_key(e: &landau_core::Error) -> &'static str {
    match e {
        landau_core::Error::InvalidParameter { name, .. } => name,
        _ => "a",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFERENCE: &str = include_str!("../examples/reference.cfg");

    #[test]
    fn reference_file_is_the_default() {
        let cfg = RunConfig::from_toml(REFERENCE).unwrap();
        let defaults = RunConfig::default();
        assert_eq!(cfg.params().unwrap(), defaults.params().unwrap());
        assert_eq!(cfg.profile().unwrap(), defaults.profile().unwrap());
        assert_eq!(cfg.grids().unwrap(), defaults.grids().unwrap());
        assert_eq!(cfg.profile().unwrap(), landau_core::reference::profile());
        assert_eq!(cfg.grids().unwrap(), landau_core::reference::grids());
        assert_eq!(cfg.params().unwrap(), landau_core::reference::params());
    }

    #[test]
    fn round_trip() {
        let cfg = RunConfig::from_toml(REFERENCE).unwrap();
        let again = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash(), again.hash());
        let empty = RunConfig::from_toml("").unwrap();
        assert_eq!(RunConfig::from_toml(&empty.to_toml()).unwrap(), empty);
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.grids.nt = 177;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn syntax_error_has_line() {
        let err = RunConfig::from_toml("[params]\na = 1.0\na1 = = 2\n").unwrap_err();
        assert_eq!(err.line, Some(3));
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = RunConfig::from_toml("[grids]\nnx = 64\nny = 3\n").unwrap_err();
        assert_eq!(err.line, Some(3), "{err}");
    }

    #[test]
    fn semantic_errors_have_lines() {
        let err = RunConfig::from_toml("[params]\na = 1.0\n\n[grids]\nnx = 48\n").unwrap_err();
        assert_eq!(err.line, Some(5), "{err}");
        let err = RunConfig::from_toml("[params]\na = -1.0\n").unwrap_err();
        assert_eq!(err.line, Some(2), "{err}");
        let src = "[[profile.modes]]\nk = 0\ncoefficients = [[1e-4, 0.0]]\n\n[[profile.modes]]\nk = 1\n";
        let err = RunConfig::from_toml(src).unwrap_err();
        assert_eq!(err.line, Some(5), "{err}");
    }

    #[test]
    fn trigonometric_modes_parse() {
        let src = "[[profile.modes]]\nk = 0\ncoefficients = [[3e-4, 0.0]]\n\n[[profile.modes]]\nk = 1\n\
                   trigonometric = { offset = [1e-4, 0.0], cos = [0.0, 0.0], sin = [2e-5, 0.0], frequency = 1.0 }\n";
        let cfg = RunConfig::from_toml(src).unwrap();
        let spec = cfg.profile().unwrap();
        assert!(!spec.is_z_independent());
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }
}
