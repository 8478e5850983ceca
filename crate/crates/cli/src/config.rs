//! Run configuration: a TOML file with `model`, `geometry`, `experiment` and
//! `output` tables. Every field is optional at parse time; commands resolve
//! the fields they need, filling defaults in place so that the resolved
//! config written next to the results is complete.

use std::fmt;
use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use spinprobe::spinwave::validity_check;
use spinprobe::{Axis, Contraction, LatticeSpec, ModelParams};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("{0}: required field is missing")]
    Missing(String),
    #[error("{path}: {reason}")]
    Invalid { path: String, reason: String },
}

fn invalid(path: impl Into<String>, reason: impl fmt::Display) -> ConfigError {
    ConfigError::Invalid { path: path.into(), reason: reason.to_string() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: ModelBlock,
    #[serde(default)]
    pub geometry: GeometryBlock,
    #[serde(default)]
    pub experiment: ExperimentBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    #[serde(rename = "B", skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(rename = "J", skip_serializing_if = "Option::is_none")]
    pub j: Option<f64>,
    /// Sites per lattice axis, one to three entries.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extent: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub occupancy: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryBlock {
    /// Dimensionless `k_L r0`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub klr0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub laser_dir: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_l: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contraction: Option<Contraction>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentBlock {
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strength: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polarization: Option<String>,
    #[serde(rename = "J_over_B", skip_serializing_if = "Option::is_none")]
    pub j_over_b: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub photon_target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub repetitions: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sites: Option<Vec<SiteValue>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlations: Option<Vec<CorrelationRequest>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Sites that get a `σ_z` before verification.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturb: Option<Vec<usize>>,
}

/// Mean transverse spin on one site of a synthetic field.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteValue {
    pub site: Vec<i64>,
    #[serde(default)]
    pub x: f64,
    #[serde(default)]
    pub y: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationRequest {
    pub a: Vec<i64>,
    pub b: Vec<i64>,
    pub beta: String,
    pub beta_prime: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

pub const DEFAULT_OUT_DIR: &str = "out";

pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string().trim_end().to_string()))
}

pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
    parse(&text).map_err(|e| match e {
        ConfigError::Parse(msg) => ConfigError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn positive(path: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(path, format!("must be positive and finite, got {v}")))
    }
}

fn axis(path: &str, s: &str) -> Result<Axis, ConfigError> {
    let mut chars = s.chars();
    match (chars.next().and_then(Axis::from_char), chars.next()) {
        (Some(a), None) => Ok(a),
        _ => Err(invalid(path, format!("expected one of \"x\", \"y\", \"z\", got {s:?}"))),
    }
}

fn site(path: &str, v: &[i64], dims: usize) -> Result<[i64; 3], ConfigError> {
    if v.len() != dims {
        return Err(invalid(path, format!("expected {dims} coordinates, got {}", v.len())));
    }
    let mut out = [0; 3];
    out[..dims].copy_from_slice(v);
    Ok(out)
}

fn fill<T: Clone>(slot: &mut Option<T>, default: T) -> T {
    slot.get_or_insert(default).clone()
}

/// Geometry shared by the scattering commands.
#[derive(Debug, Clone, Copy)]
pub struct Laser {
    pub k_l: f64,
    pub dir: Vector3<f64>,
    pub sigma_l: Axis,
    pub contraction: Contraction,
}

/// One synthetic site field request, resolved against the lattice.
#[derive(Debug, Clone, Copy)]
pub struct ResolvedSite {
    pub site: [i64; 3],
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ResolvedCorrelation {
    pub a: [i64; 3],
    pub b: [i64; 3],
    pub beta: Axis,
}

impl RunConfig {
    pub fn format(&mut self) -> Format {
        fill(&mut self.output.format, Format::default())
    }

    pub fn out_dir(&mut self) -> String {
        fill(&mut self.output.dir, DEFAULT_OUT_DIR.to_string())
    }

    pub fn seed(&mut self) -> u64 {
        fill(&mut self.experiment.seed, 0)
    }

    pub fn lattice(&mut self) -> Result<LatticeSpec, ConfigError> {
        let extent = self.model.extent.clone().ok_or_else(|| ConfigError::Missing("model.extent".into()))?;
        let r0 = positive("model.r0", fill(&mut self.model.r0, 1.0))?;
        let occupancy = fill(&mut self.model.occupancy, 1.0);
        LatticeSpec::with_occupancy(&extent, r0, occupancy).map_err(|e| {
            let path = if matches!(e, spinprobe::geometry::GeometryError::BadOccupancy(_)) {
                "model.occupancy"
            } else {
                "model.extent"
            };
            invalid(path, e)
        })
    }

    pub fn field(&self) -> Result<f64, ConfigError> {
        let b = self.model.b.ok_or_else(|| ConfigError::Missing("model.B".into()))?;
        positive("model.B", b)
    }

    /// Model with coupling `J`, checked to lie inside the paramagnetic phase.
    pub fn model_with(&mut self, j: f64, j_path: &str) -> Result<ModelParams, ConfigError> {
        let b = self.field()?;
        let lattice = self.lattice()?;
        let model = ModelParams::new(b, j, lattice).map_err(|e| invalid(j_path, e))?;
        let v = validity_check(&model);
        if !v.valid {
            return Err(invalid(
                j_path,
                format!("J/B = {} is outside the paramagnetic phase (minimum squeeze factor {:.4})", j / b, v.min_squeeze),
            ));
        }
        Ok(model)
    }

    pub fn model(&mut self) -> Result<ModelParams, ConfigError> {
        let j = self.model.j.ok_or_else(|| ConfigError::Missing("model.J".into()))?;
        self.model_with(j, "model.J")
    }

    pub fn laser(&mut self, r0: f64) -> Result<Laser, ConfigError> {
        let klr0 = self.geometry.klr0.ok_or_else(|| ConfigError::Missing("geometry.klr0".into()))?;
        let klr0 = positive("geometry.klr0", klr0)?;
        let d = fill(&mut self.geometry.laser_dir, [0.0, 0.0, 1.0]);
        let dir = Vector3::new(d[0], d[1], d[2]);
        if !(dir.iter().all(|c| c.is_finite()) && dir.norm() > 0.0) {
            return Err(invalid("geometry.laser_dir", "must be a non-zero finite vector"));
        }
        let sigma = fill(&mut self.geometry.sigma_l, "z".to_string());
        let sigma_l = axis("geometry.sigma_l", &sigma)?;
        let contraction = fill(&mut self.geometry.contraction, Contraction::default());
        Ok(Laser { k_l: klr0 / r0, dir: dir.normalize(), sigma_l, contraction })
    }

    /// Laser for the commands that need `σ_L = z`.
    pub fn laser_z(&mut self, r0: f64) -> Result<Laser, ConfigError> {
        let laser = self.laser(r0)?;
        if laser.sigma_l != Axis::Z {
            return Err(invalid("geometry.sigma_l", "only \"z\" is supported by this command"));
        }
        Ok(laser)
    }

    pub fn windows(&mut self, default: Vec<f64>) -> Result<Vec<f64>, ConfigError> {
        let t = fill(&mut self.experiment.t, default);
        if t.is_empty() {
            return Err(invalid("experiment.T", "needs at least one value"));
        }
        for (i, &v) in t.iter().enumerate() {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(format!("experiment.T[{i}]"), format!("must be non-negative, got {v}")));
            }
        }
        Ok(t)
    }

    pub fn radiative(&mut self) -> Result<(f64, f64), ConfigError> {
        let gamma0 = positive("experiment.gamma0", fill(&mut self.experiment.gamma0, 1.0))?;
        let strength = fill(&mut self.experiment.strength, 1.0);
        if !(strength.is_finite() && strength >= 0.0) {
            return Err(invalid("experiment.strength", format!("must be non-negative, got {strength}")));
        }
        Ok((gamma0, strength))
    }

    pub fn phi(&mut self) -> Result<f64, ConfigError> {
        let phi = fill(&mut self.experiment.phi, 0.0);
        if !phi.is_finite() {
            return Err(invalid("experiment.phi", "must be finite"));
        }
        Ok(phi)
    }

    pub fn theta_points(&mut self, default: usize) -> Result<usize, ConfigError> {
        let n = fill(&mut self.experiment.theta_points, default);
        if n < 2 {
            return Err(invalid("experiment.theta_points", "needs at least 2 points"));
        }
        Ok(n)
    }

    pub fn polarization(&mut self) -> Result<Axis, ConfigError> {
        let p = fill(&mut self.experiment.polarization, "y".to_string());
        axis("experiment.polarization", &p)
    }

    pub fn photon_target(&mut self) -> Result<f64, ConfigError> {
        positive("experiment.photon_target", fill(&mut self.experiment.photon_target, 600.0))
    }

    pub fn series(&mut self, default: Vec<f64>) -> Result<Vec<f64>, ConfigError> {
        let s = fill(&mut self.experiment.j_over_b, default);
        if s.is_empty() {
            return Err(invalid("experiment.J_over_B", "needs at least one value"));
        }
        Ok(s)
    }

    pub fn resolution(&mut self, default: usize) -> Result<usize, ConfigError> {
        let r = fill(&mut self.experiment.resolution, default);
        if r == 0 {
            return Err(invalid("experiment.resolution", "must be at least 1"));
        }
        Ok(r)
    }

    pub fn repetitions(&mut self) -> Result<u64, ConfigError> {
        let m = fill(&mut self.experiment.repetitions, 100);
        if m == 0 {
            return Err(invalid("experiment.M", "must be at least 1"));
        }
        Ok(m)
    }

    pub fn kappa(&mut self) -> Result<f64, ConfigError> {
        positive("experiment.kappa", fill(&mut self.experiment.kappa, 1.0))
    }

    pub fn shots(&mut self) -> Result<usize, ConfigError> {
        let needed = self.experiment.correlations.as_ref().is_some_and(|c| !c.is_empty());
        let s = fill(&mut self.experiment.shots, if needed { 200 } else { 0 });
        if needed && s < 2 {
            return Err(invalid("experiment.shots", "correlations need at least 2 shots"));
        }
        Ok(s)
    }

    pub fn sites(&mut self, lattice: &LatticeSpec) -> Result<Vec<ResolvedSite>, ConfigError> {
        let list = fill(&mut self.experiment.sites, Vec::new());
        list.iter()
            .enumerate()
            .map(|(i, s)| {
                let path = format!("experiment.sites[{i}]");
                let site = site(&format!("{path}.site"), &s.site, lattice.dims())?;
                if !lattice.contains(site) {
                    return Err(invalid(format!("{path}.site"), "not a lattice site"));
                }
                if !(s.x.is_finite() && s.y.is_finite()) {
                    return Err(invalid(path, "values must be finite"));
                }
                Ok(ResolvedSite { site, x: s.x, y: s.y })
            })
            .collect()
    }

    pub fn correlations(&mut self, lattice: &LatticeSpec) -> Result<Vec<ResolvedCorrelation>, ConfigError> {
        let list = fill(&mut self.experiment.correlations, Vec::new());
        list.iter()
            .enumerate()
            .map(|(i, c)| {
                let path = format!("experiment.correlations[{i}]");
                let a = site(&format!("{path}.a"), &c.a, lattice.dims())?;
                let b = site(&format!("{path}.b"), &c.b, lattice.dims())?;
                for (name, s) in [("a", a), ("b", b)] {
                    if !lattice.contains(s) {
                        return Err(invalid(format!("{path}.{name}"), "not a lattice site"));
                    }
                }
                let beta = axis(&format!("{path}.beta"), &c.beta)?;
                let beta_prime = axis(&format!("{path}.beta_prime"), &c.beta_prime)?;
                if beta == Axis::Z || beta_prime == Axis::Z {
                    return Err(invalid(path, "the longitudinal component is not read out"));
                }
                if beta != beta_prime {
                    return Err(invalid(
                        path,
                        "mixed components need simultaneous readout of both polarizations; only beta = beta_prime is supported",
                    ));
                }
                Ok(ResolvedCorrelation { a, b, beta })
            })
            .collect()
    }

    pub fn cluster_size(&mut self, max_sites: usize) -> Result<(usize, usize), ConfigError> {
        let rows = fill(&mut self.experiment.rows, 2);
        let cols = fill(&mut self.experiment.cols, 2);
        if rows == 0 || cols == 0 {
            return Err(invalid("experiment.rows", "cluster needs at least one row and one column"));
        }
        if rows * cols > max_sites {
            return Err(invalid(
                "experiment.rows",
                format!("{rows}x{cols} = {} sites exceed the limit of {max_sites}", rows * cols),
            ));
        }
        Ok((rows, cols))
    }

    pub fn tolerance(&mut self) -> Result<f64, ConfigError> {
        positive("experiment.tolerance", fill(&mut self.experiment.tolerance, 1e-12))
    }

    pub fn perturb(&mut self, sites: usize) -> Result<Vec<usize>, ConfigError> {
        let list = fill(&mut self.experiment.perturb, Vec::new());
        for (i, &s) in list.iter().enumerate() {
            if s >= sites {
                return Err(invalid(format!("experiment.perturb[{i}]"), format!("site {s} outside {sites} sites")));
            }
        }
        Ok(list)
    }

    /// Resolved config as TOML text.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
