//! Homodyne quadratures of the scattered field and their inversion to
//! cosine/sine spin components.
//!
//! The `X` quadrature at detector direction `k` measures
//! `κ Σ_β M_{αβ} J_{Cβ}^{Δk}` and `P` the matching sine combination, with
//!
//! ```text
//! J_C^{Δk} = N^{-1/2} Σ_j cos(Δk·r_j) J^j,   J_S^{Δk} = N^{-1/2} Σ_j sin(Δk·r_j) J^j.
//! ```
//!
//! `κ` absorbs the unobservable prefactor `2√N Γ0/g`. Noisy samples are
//! Gaussian with the spin-wave ground-state variances, each repetition on a
//! freshly prepared state.

use nalgebra::{Matrix2, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    invert_coupling, momentum_transfer, Axis, Contraction, GeometryError, LatticeSpec, ScatterGeometry,
};
use crate::spinwave::{ground_state_correlations, ModelParams, SpinWaveError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectionError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    SpinWave(#[from] SpinWaveError),
    #[error("repetition count must be at least 1")]
    NoRepetitions,
    #[error("negative variance {0}")]
    NegativeVariance(f64),
    #[error("ground-state noise is only modelled for the transverse components x, y (laser polarization {0})")]
    UnsupportedPolarization(Axis),
    #[error("spin field has {got} sites, lattice has {expected}")]
    FieldSize { expected: usize, got: usize },
    #[error("X and P samples disagree on direction or polarization")]
    MismatchedSamples,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuadratureKind {
    X,
    P,
}

impl QuadratureKind {
    pub fn field(self) -> FieldKind {
        match self {
            QuadratureKind::X => FieldKind::C,
            QuadratureKind::P => FieldKind::S,
        }
    }
}

/// Cosine or sine momentum component of a spin field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldKind {
    C,
    S,
}

impl FieldKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldKind::C => "C",
            FieldKind::S => "S",
        }
    }

    fn kernel(self, phase: f64) -> f64 {
        match self {
            FieldKind::C => phase.cos(),
            FieldKind::S => phase.sin(),
        }
    }
}

/// Site expectation values `⟨J_x^j⟩, ⟨J_y^j⟩, ⟨J_z^j⟩` on a lattice, in the
/// site order of [`LatticeSpec::sites`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpinField {
    lattice: LatticeSpec,
    sites: Vec<[i64; 3]>,
    values: Vec<[f64; 3]>,
}

impl SpinField {
    pub fn zeros(lattice: &LatticeSpec) -> Self {
        let sites = lattice.sites();
        let values = vec![[0.0; 3]; sites.len()];
        Self { lattice: lattice.clone(), sites, values }
    }

    pub fn from_fn(lattice: &LatticeSpec, mut f: impl FnMut([i64; 3]) -> [f64; 3]) -> Self {
        let sites = lattice.sites();
        let values = sites.iter().map(|&s| f(s)).collect();
        Self { lattice: lattice.clone(), sites, values }
    }

    pub fn from_values(lattice: &LatticeSpec, values: Vec<[f64; 3]>) -> Result<Self, DetectionError> {
        let sites = lattice.sites();
        if values.len() != sites.len() {
            return Err(DetectionError::FieldSize { expected: sites.len(), got: values.len() });
        }
        Ok(Self { lattice: lattice.clone(), sites, values })
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn sites(&self) -> &[[i64; 3]] {
        &self.sites
    }

    pub fn values(&self) -> &[[f64; 3]] {
        &self.values
    }

    /// Value at `site`, zero off the lattice.
    pub fn get(&self, site: [i64; 3], beta: Axis) -> f64 {
        self.sites.iter().position(|&s| s == site).map_or(0.0, |i| self.values[i][beta.index()])
    }

    pub fn set(&mut self, site: [i64; 3], beta: Axis, value: f64) -> bool {
        match self.sites.iter().position(|&s| s == site) {
            Some(i) => {
                self.values[i][beta.index()] = value;
                true
            }
            None => false,
        }
    }

    /// `J_{Cβ}^{Δk}` or `J_{Sβ}^{Δk}`, by the defining site sum.
    pub fn component(&self, dk: &Vector3<f64>, beta: Axis, kind: FieldKind) -> f64 {
        let norm = (self.sites.len() as f64).sqrt();
        self.sites
            .iter()
            .zip(&self.values)
            .map(|(&s, v)| kind.kernel(dk.dot(&self.lattice.position(s))) * v[beta.index()])
            .sum::<f64>()
            / norm
    }
}

/// Spin components read out at the laser polarization `sigma`: the two axes
/// other than `sigma`.
pub fn readout_axes(sigma: Axis) -> [Axis; 2] {
    sigma.complement()
}

/// Noiseless quadrature for the two photon polarizations other than `σ_L`,
/// in the order of [`readout_axes`].
pub fn quadrature(
    geom: &ScatterGeometry,
    contraction: Contraction,
    field: &SpinField,
    kind: QuadratureKind,
    kappa: f64,
) -> [f64; 2] {
    let dk = momentum_transfer(geom);
    let [a, b] = readout_axes(geom.sigma_l);
    let j = [field.component(&dk, a, kind.field()), field.component(&dk, b, kind.field())];
    let m = geom.coupling(contraction).restricted();
    [kappa * (m[(0, 0)] * j[0] + m[(0, 1)] * j[1]), kappa * (m[(1, 0)] * j[0] + m[(1, 1)] * j[1])]
}

pub fn quadrature_x(geom: &ScatterGeometry, contraction: Contraction, field: &SpinField, kappa: f64) -> [f64; 2] {
    quadrature(geom, contraction, field, QuadratureKind::X, kappa)
}

pub fn quadrature_p(geom: &ScatterGeometry, contraction: Contraction, field: &SpinField, kappa: f64) -> [f64; 2] {
    quadrature(geom, contraction, field, QuadratureKind::P, kappa)
}

/// Ground-state variances of `(J_{Cx}, J_{Cy})` or `(J_{Sx}, J_{Sy})` at `q`.
///
/// For generic `q` the operators `J^q` and `J^{-q}` are distinct modes and
/// each cosine/sine part carries half of `C_{ββ}(q)`. When `q ≡ -q` on the
/// lattice, `J^q` is Hermitian: the cosine part carries all of it and the
/// sine part vanishes.
pub fn ground_state_variances(
    q: &Vector3<f64>,
    model: &ModelParams,
    kind: FieldKind,
) -> Result<[f64; 2], DetectionError> {
    let c = ground_state_correlations(q, model)?;
    let r0 = model.lattice.r0();
    let self_conjugate = (0..model.lattice.dims()).all(|a| {
        let t = q[a] * r0 / std::f64::consts::PI;
        (t - t.round()).abs() < 1e-9
    });
    let share = match (self_conjugate, kind) {
        (true, FieldKind::C) => 1.0,
        (true, FieldKind::S) => 0.0,
        (false, _) => 0.5,
    };
    Ok([share * c.c[(0, 0)].re, share * c.c[(1, 1)].re])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSample {
    pub theta: f64,
    pub phi: f64,
    pub polarization: Axis,
    pub kind: QuadratureKind,
    pub value: f64,
    pub repetitions: u64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinFieldSample {
    /// Scaled momentum `r0 Δk / π`; components beyond the lattice
    /// dimensionality are zero.
    pub ktilde: [f64; 3],
    pub component: Axis,
    pub kind: FieldKind,
    pub value: f64,
    pub variance: f64,
}

/// Mean of `m` independent Gaussian repetitions, drawn as one normal variate
/// of variance `variance / m` (the exact distribution of the mean).
pub fn repetition_model(
    true_value: f64,
    variance: f64,
    m: u64,
    rng: &mut impl rand::Rng,
) -> Result<f64, DetectionError> {
    if m == 0 {
        return Err(DetectionError::NoRepetitions);
    }
    if !(variance >= 0.0) {
        return Err(DetectionError::NegativeVariance(variance));
    }
    let sd = (variance / m as f64).sqrt();
    if sd == 0.0 {
        return Ok(true_value);
    }
    let normal = Normal::new(true_value, sd).expect("finite positive standard deviation");
    Ok(normal.sample(rng))
}

/// Random stream for one detector direction: independent of how work is
/// split across threads.
pub fn direction_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Settings shared by every measurement in a sampling run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homodyne {
    pub contraction: Contraction,
    pub kappa: f64,
    pub repetitions: u64,
}

impl Default for Homodyne {
    fn default() -> Self {
        Self { contraction: Contraction::RowSum, kappa: 1.0, repetitions: 1 }
    }
}

/// Noisy `X` or `P` record for both readout polarizations. Each quadrature is
/// its own experiment, so the two polarizations are drawn independently.
pub fn sample_quadratures(
    geom: &ScatterGeometry,
    field: &SpinField,
    model: &ModelParams,
    kind: QuadratureKind,
    settings: &Homodyne,
    rng: &mut impl rand::Rng,
) -> Result<[QuadratureSample; 2], DetectionError> {
    if geom.sigma_l != Axis::Z {
        return Err(DetectionError::UnsupportedPolarization(geom.sigma_l));
    }
    let mean = quadrature(geom, settings.contraction, field, kind, settings.kappa);
    let var_j = ground_state_variances(&momentum_transfer(geom), model, kind.field())?;
    let m = geom.coupling(settings.contraction).restricted();
    let axes = readout_axes(geom.sigma_l);
    let mut out = [QuadratureSample {
        theta: geom.theta,
        phi: geom.phi,
        polarization: axes[0],
        kind,
        value: 0.0,
        repetitions: settings.repetitions,
        std_error: 0.0,
    }; 2];
    for (r, sample) in out.iter_mut().enumerate() {
        let var = settings.kappa.powi(2) * (m[(r, 0)].powi(2) * var_j[0] + m[(r, 1)].powi(2) * var_j[1]);
        sample.polarization = axes[r];
        sample.value = repetition_model(mean[r], var, settings.repetitions, rng)?;
        sample.std_error = (var / settings.repetitions as f64).sqrt();
    }
    Ok(out)
}

/// Invert the restricted coupling block: quadratures of one kind at one
/// direction to the two spin components, with linearly propagated variances.
pub fn solve_kind(
    samples: &[QuadratureSample; 2],
    geom: &ScatterGeometry,
    contraction: Contraction,
    kappa: f64,
    ktilde: [f64; 3],
) -> Result<[SpinFieldSample; 2], DetectionError> {
    let axes = readout_axes(geom.sigma_l);
    if samples[0].kind != samples[1].kind || samples[0].polarization != axes[0] || samples[1].polarization != axes[1] {
        return Err(DetectionError::MismatchedSamples);
    }
    let inv: Matrix2<f64> = invert_coupling(&geom.coupling(contraction))? / kappa;
    let x = [samples[0].value, samples[1].value];
    let v = [samples[0].std_error.powi(2), samples[1].std_error.powi(2)];
    let kind = samples[0].kind.field();
    let mut out = [SpinFieldSample { ktilde, component: axes[0], kind, value: 0.0, variance: 0.0 }; 2];
    for (b, s) in out.iter_mut().enumerate() {
        s.component = axes[b];
        s.value = inv[(b, 0)] * x[0] + inv[(b, 1)] * x[1];
        s.variance = inv[(b, 0)].powi(2) * v[0] + inv[(b, 1)].powi(2) * v[1];
    }
    Ok(out)
}

/// `J_C` and `J_S` for both readout components from one direction's `X`
/// and `P` records.
pub fn solve_spin_components(
    x: &[QuadratureSample; 2],
    p: &[QuadratureSample; 2],
    geom: &ScatterGeometry,
    contraction: Contraction,
    kappa: f64,
    ktilde: [f64; 3],
) -> Result<[SpinFieldSample; 4], DetectionError> {
    if x[0].kind != QuadratureKind::X || p[0].kind != QuadratureKind::P {
        return Err(DetectionError::MismatchedSamples);
    }
    let c = solve_kind(x, geom, contraction, kappa, ktilde)?;
    let s = solve_kind(p, geom, contraction, kappa, ktilde)?;
    Ok([c[0], c[1], s[0], s[1]])
}
