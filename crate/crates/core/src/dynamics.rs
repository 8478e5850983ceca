//! Radiative evolution of momentum-space spin quadratures and the
//! photon-counting observables built on it.
//!
//! Within the spin-wave picture the light–matter coupling for a laser
//! polarized along `z` closes on each momentum `q`:
//!
//! ```text
//! d⟨J_x^q⟩/dt = -U [⟨M_xx⟩₊ ⟨J_x^q⟩ + ⟨M_xy⟩₊ ⟨J_y^q⟩]
//! d⟨J_y^q⟩/dt =  U [⟨M_yx⟩₋ ⟨J_x^q⟩ + ⟨M_yy⟩₋ ⟨J_y^q⟩]
//! ```
//!
//! where `⟨·⟩₊` (`⟨·⟩₋`) averages the coupling matrix over emission
//! directions whose momentum transfer matches `+q` (`-q`), weighted by the
//! lattice peak function. The peak is modelled as a Gaussian in the
//! components of the mismatch along the lattice axes, of width
//! `1/(L r0 √d)`, normalized to unit integral over the sphere. Two-time
//! averages follow from the same generator by quantum regression.

use nalgebra::{Matrix2, Matrix3, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{
    momentum_transfer, Axis, Contraction, GeometryError, LatticeSpec, ScatterGeometry,
};
use crate::quadrature::{adaptive_simpson, GaussRule};
use crate::spinwave::{ground_state_correlations, ModelParams, MomentumCorrelation, SpinWaveError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    SpinWave(#[from] SpinWaveError),
    #[error("radiative closure is only available for a z-polarized laser, got {0}")]
    UnsupportedPolarization(Axis),
    #[error("invalid radiative parameter: {0}")]
    BadParameter(&'static str),
    #[error("relative error undefined: emitted-photon profile vanishes identically")]
    UndefinedRelativeError,
}

/// Rate and counting-window parameters; `gamma0 = 1` fixes the time unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiativeParams {
    pub gamma0: f64,
    /// `U / Γ0`.
    pub strength: f64,
    pub t: f64,
}

impl RadiativeParams {
    pub fn new(gamma0: f64, strength: f64, t: f64) -> Result<Self, DynamicsError> {
        if !(gamma0.is_finite() && gamma0 > 0.0) {
            return Err(DynamicsError::BadParameter("gamma0 must be positive"));
        }
        if !(strength.is_finite() && strength >= 0.0) {
            return Err(DynamicsError::BadParameter("emission strength must be non-negative"));
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(DynamicsError::BadParameter("counting window T must be non-negative"));
        }
        Ok(Self { gamma0, strength, t })
    }

    pub fn unit(t: f64) -> Result<Self, DynamicsError> {
        Self::new(1.0, 1.0, t)
    }

    pub fn with_t(&self, t: f64) -> Self {
        Self { t, ..*self }
    }

    pub fn coupling(&self) -> f64 {
        self.strength * self.gamma0
    }
}

/// Node counts for the angular integrals of the radiative closure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngularQuadrature {
    /// Gauss–Legendre nodes across the peak (per radial/polar panel).
    pub radial: usize,
    /// Uniform nodes around the peak (azimuthal).
    pub azimuthal: usize,
}

impl Default for AngularQuadrature {
    fn default() -> Self {
        Self { radial: 48, azimuthal: 32 }
    }
}

impl AngularQuadrature {
    pub fn refined(&self) -> Self {
        Self { radial: 2 * self.radial, azimuthal: 2 * self.azimuthal }
    }
}

/// Everything about the scattering setup except the detector angles.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionSetup {
    /// Laser configuration; its detector angles are ignored.
    pub geometry: ScatterGeometry,
    pub contraction: Contraction,
    pub lattice: LatticeSpec,
    pub quadrature: AngularQuadrature,
}

impl EmissionSetup {
    pub fn new(geometry: ScatterGeometry, lattice: LatticeSpec) -> Self {
        Self { geometry, contraction: Contraction::default(), lattice, quadrature: AngularQuadrature::default() }
    }

    /// Momentum width of the lattice peak.
    pub fn peak_width(&self) -> f64 {
        1.0 / (self.lattice.linear_size() * self.lattice.r0() * (self.lattice.dims() as f64).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorMatrix {
    pub q: Vector3<f64>,
    pub a: Matrix2<f64>,
    /// A direction with `Δk ≈ +q` exists (drives the `J_x` row).
    pub forward_reachable: bool,
    /// A direction with `Δk ≈ -q` exists (drives the `J_y` row).
    pub backward_reachable: bool,
}

impl GeneratorMatrix {
    pub fn zero(q: Vector3<f64>) -> Self {
        Self { q, a: Matrix2::zeros(), forward_reachable: false, backward_reachable: false }
    }

    /// No resonant emission channel at all.
    pub fn unreachable(&self) -> bool {
        !self.forward_reachable && !self.backward_reachable
    }
}

/// Window-weighted average of the coupling matrix over directions whose
/// momentum transfer resonates with `target`; `None` if none exists.
fn resonant_average(target: &Vector3<f64>, setup: &EmissionSetup) -> Option<Matrix3<f64>> {
    let geom = &setup.geometry;
    let k_l = geom.k_l;
    let dims = setup.lattice.dims();
    let sigma = setup.peak_width();
    let v = target + geom.laser_dir() * k_l;
    let mut proj = v;
    for a in dims..3 {
        proj[a] = 0.0;
    }
    let reach = 6.0 * sigma;
    let quad = setup.quadrature;

    let coupling_at = |khat: &Vector3<f64>| {
        let theta = khat[2].clamp(-1.0, 1.0).acos();
        let phi = khat[1].atan2(khat[0]);
        crate::geometry::coupling_matrix_with(setup.contraction, geom.sigma_l, theta, phi).entries
    };
    let window = |khat: &Vector3<f64>| {
        let mut d = proj - khat * k_l;
        for a in dims..3 {
            d[a] = 0.0;
        }
        (-d.norm_squared() / (2.0 * sigma * sigma)).exp()
    };

    let mut num = Matrix3::zeros();
    let mut den = 0.0;
    match dims {
        1 | 3 => {
            // the window depends on k̂ only through u = k̂·axis
            let (axis, lo, hi) = if dims == 3 {
                let r = v.norm();
                if (r - k_l).abs() > reach || r == 0.0 {
                    return None;
                }
                let rate = k_l * r / (sigma * sigma);
                (v / r, (1.0 - 60.0 / rate).max(-1.0), 1.0)
            } else {
                if proj[0].abs() > k_l + reach {
                    return None;
                }
                let c = proj[0] / k_l;
                let w = 10.0 * sigma / k_l;
                (Vector3::x(), (c - w).max(-1.0), (c + w).min(1.0))
            };
            if hi <= lo {
                return None;
            }
            let (e1, e2) = orthonormal_pair(&axis);
            let rule = GaussRule::composite(quad.radial, 2, lo, hi);
            let n_chi = quad.azimuthal;
            for (&u, &wu) in rule.nodes.iter().zip(&rule.weights) {
                let s = (1.0 - u * u).max(0.0).sqrt();
                for c in 0..n_chi {
                    let chi = std::f64::consts::TAU * c as f64 / n_chi as f64;
                    let khat = axis * u + (e1 * chi.cos() + e2 * chi.sin()) * s;
                    let w = wu * std::f64::consts::TAU / n_chi as f64 * window(&khat);
                    num += coupling_at(&khat) * w;
                    den += w;
                }
            }
        }
        2 => {
            // plane coordinates (k̂_x, k̂_y) on both hemispheres, polar
            // patch around the in-plane resonance point
            let centre = Vector3::new(proj[0] / k_l, proj[1] / k_l, 0.0);
            if centre.norm() > 1.0 + reach / k_l {
                return None;
            }
            let radius = 10.0 * sigma / k_l;
            let rule = GaussRule::composite(quad.radial, 2, 0.0, radius);
            let n_beta = quad.azimuthal;
            for (&r, &wr) in rule.nodes.iter().zip(&rule.weights) {
                for b in 0..n_beta {
                    let beta = std::f64::consts::TAU * b as f64 / n_beta as f64;
                    let x = centre[0] + r * beta.cos();
                    let y = centre[1] + r * beta.sin();
                    let rho2 = x * x + y * y;
                    if rho2 >= 1.0 {
                        continue;
                    }
                    let z = (1.0 - rho2).sqrt();
                    let jac = wr * r * std::f64::consts::TAU / n_beta as f64 / z;
                    for sign in [1.0, -1.0] {
                        let khat = Vector3::new(x, y, sign * z);
                        let w = jac * window(&khat);
                        num += coupling_at(&khat) * w;
                        den += w;
                    }
                }
            }
        }
        _ => unreachable!("lattice dimensionality is validated to 1..=3"),
    }
    if den > 0.0 && den.is_finite() {
        Some(num / den)
    } else {
        None
    }
}

fn orthonormal_pair(axis: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let seed = if axis[0].abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e1 = (seed - axis * axis.dot(&seed)).normalize();
    let e2 = axis.cross(&e1);
    (e1, e2)
}

pub fn radiative_generator(
    q: &Vector3<f64>,
    setup: &EmissionSetup,
    params: &RadiativeParams,
) -> Result<GeneratorMatrix, DynamicsError> {
    if setup.geometry.sigma_l != Axis::Z {
        return Err(DynamicsError::UnsupportedPolarization(setup.geometry.sigma_l));
    }
    let mut pq = *q;
    for a in setup.lattice.dims()..3 {
        pq[a] = 0.0;
    }
    if pq.norm() > 2.0 * setup.geometry.k_l + 6.0 * setup.peak_width() {
        return Ok(GeneratorMatrix::zero(*q));
    }
    let u = params.coupling();
    let plus = resonant_average(q, setup);
    let minus = resonant_average(&(-q), setup);
    let (x, y) = (Axis::X.index(), Axis::Y.index());
    let mut a = Matrix2::zeros();
    if let Some(m) = plus {
        a[(0, 0)] = -u * m[(x, x)];
        a[(0, 1)] = -u * m[(x, y)];
    }
    if let Some(m) = minus {
        a[(1, 0)] = u * m[(y, x)];
        a[(1, 1)] = u * m[(y, y)];
    }
    Ok(GeneratorMatrix { q: *q, a, forward_reachable: plus.is_some(), backward_reachable: minus.is_some() })
}

/// `C(t) = e^{At} C0 e^{Aᵀt}`.
pub fn evolve_correlations(c0: &MomentumCorrelation, a: &GeneratorMatrix, t: f64) -> MomentumCorrelation {
    MomentumCorrelation { q: c0.q, c: evolve_matrix(&c0.c, &a.a, t) }
}

fn evolve_matrix(c0: &Matrix2<Complex64>, a: &Matrix2<f64>, t: f64) -> Matrix2<Complex64> {
    let e = (a * t).exp().map(Complex64::from);
    e * c0 * e.transpose()
}

/// Relative tolerance of the time integral.
pub const TIME_RTOL: f64 = 1e-8;

fn integrate_correlations(c0: &Matrix2<Complex64>, a: &Matrix2<f64>, t: f64) -> Matrix2<Complex64> {
    let mut f = |s: f64| {
        let c = evolve_matrix(c0, a, s);
        [c[(0, 0)].re, c[(0, 0)].im, c[(0, 1)].re, c[(0, 1)].im, c[(1, 0)].re, c[(1, 0)].im, c[(1, 1)].re, c[(1, 1)].im]
    };
    let v = adaptive_simpson(&mut f, 0.0, t, TIME_RTOL, 0.0);
    Matrix2::new(
        Complex64::new(v[0], v[1]),
        Complex64::new(v[2], v[3]),
        Complex64::new(v[4], v[5]),
        Complex64::new(v[6], v[7]),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionRecord {
    pub theta: f64,
    pub phi: f64,
    pub n: Matrix3<Complex64>,
    pub n_tilde: Matrix3<Complex64>,
}

impl EmissionRecord {
    pub fn get(&self, a: Axis, b: Axis) -> Complex64 {
        self.n[(a.index(), b.index())]
    }

    pub fn get_tilde(&self, a: Axis, b: Axis) -> Complex64 {
        self.n_tilde[(a.index(), b.index())]
    }
}

/// Direction-dependent pieces of the emission calculation, independent of
/// the spin model and the counting window.
#[derive(Debug, Clone, Copy)]
pub struct DirectionData {
    pub theta: f64,
    pub phi: f64,
    pub q: Vector3<f64>,
    pub coupling: nalgebra::Matrix3x2<f64>,
    pub generator: GeneratorMatrix,
}

pub fn direction_data(
    theta: f64,
    phi: f64,
    setup: &EmissionSetup,
    rad: &RadiativeParams,
) -> Result<DirectionData, DynamicsError> {
    let geom = setup.geometry.with_angles(theta, phi);
    let q = momentum_transfer(&geom);
    let coupling = geom.coupling(setup.contraction).transverse_columns();
    let generator = radiative_generator(&q, setup, rad)?;
    Ok(DirectionData { theta, phi, q, coupling, generator })
}

fn record_from(
    d: &DirectionData,
    rad: &RadiativeParams,
    model: &ModelParams,
) -> Result<EmissionRecord, DynamicsError> {
    let c0 = ground_state_correlations(&d.q, model)?;
    let prefactor = model.lattice.atom_count() * rad.gamma0;
    let m = d.coupling.map(Complex64::from);
    let integrated = integrate_correlations(&c0.c, &d.generator.a, rad.t);
    let n = m * integrated * m.transpose() * Complex64::from(prefactor);
    let n_tilde = m * c0.c * m.transpose() * Complex64::from(prefactor * rad.t);
    Ok(EmissionRecord { theta: d.theta, phi: d.phi, n, n_tilde })
}

/// Photon-number matrix `N_{αβ}(T)` and its ground-state estimate `Ñ_{αβ}(T)`
/// in the detector direction of `geom`.
pub fn photon_counts(
    geom: &ScatterGeometry,
    setup: &EmissionSetup,
    rad: &RadiativeParams,
    model: &ModelParams,
) -> Result<EmissionRecord, DynamicsError> {
    let d = direction_data(geom.theta, geom.phi, setup, rad)?;
    record_from(&d, rad, model)
}

/// Emission records for many directions, evaluated in parallel and returned
/// in input order.
pub fn emission_scan(
    angles: &[(f64, f64)],
    setup: &EmissionSetup,
    rad: &RadiativeParams,
    model: &ModelParams,
) -> Result<Vec<EmissionRecord>, DynamicsError> {
    angles
        .par_iter()
        .map(|&(t, p)| {
            let d = direction_data(t, p, setup, rad)?;
            record_from(&d, rad, model)
        })
        .collect()
}

/// Reference photon counts from the double-time integral with a Gaussian
/// kernel of correlation time `tau_c` (normalized to unit area), for
/// comparison with the Markovian `photon_counts`.
pub fn photon_counts_double_time(
    geom: &ScatterGeometry,
    setup: &EmissionSetup,
    rad: &RadiativeParams,
    model: &ModelParams,
    tau_c: f64,
    nodes: usize,
) -> Result<Matrix3<Complex64>, DynamicsError> {
    if !(tau_c > 0.0) {
        return Err(DynamicsError::BadParameter("correlation time must be positive"));
    }
    let d = direction_data(geom.theta, geom.phi, setup, rad)?;
    let c0 = ground_state_correlations(&d.q, model)?;
    let a = d.generator.a;
    let t_end = rad.t;
    let kernel = |tau: f64| {
        (-tau * tau / (2.0 * tau_c * tau_c)).exp() / ((2.0 * std::f64::consts::PI).sqrt() * tau_c)
    };
    // ⟨J(t1) J(t2)⟩ = e^{A(t1-t2)} C(t2) for t1 ≥ t2, C(t1) e^{Aᵀ(t2-t1)} otherwise
    let two_time = |t1: f64, t2: f64| {
        if t1 >= t2 {
            (a * (t1 - t2)).exp().map(Complex64::from) * evolve_matrix(&c0.c, &a, t2)
        } else {
            evolve_matrix(&c0.c, &a, t1) * (a * (t2 - t1)).exp().transpose().map(Complex64::from)
        }
    };
    let mut total = Matrix2::<Complex64>::zeros();
    if t_end > 0.0 {
        let outer = GaussRule::composite(nodes, 8, 0.0, t_end);
        for (&t, &wt) in outer.nodes.iter().zip(&outer.weights) {
            let half = 2.0 * t.min(t_end - t);
            let span = half.min(8.0 * tau_c);
            if span <= 0.0 {
                continue;
            }
            let inner = GaussRule::composite(nodes, 4, -span, span);
            for (&tau, &wtau) in inner.nodes.iter().zip(&inner.weights) {
                let g = two_time(t + 0.5 * tau, t - 0.5 * tau);
                total += g * Complex64::from(wt * wtau * kernel(tau));
            }
        }
    }
    let m = d.coupling.map(Complex64::from);
    Ok(m * total * m.transpose() * Complex64::from(model.lattice.atom_count() * rad.gamma0))
}

/// Default number of `cos θ` nodes in θ-integrated observables.
pub const DEFAULT_THETA_NODES: usize = 64;

/// Gauss–Legendre nodes in `cos θ ∈ [-1, 1]` as `(θ, weight)`.
pub fn cos_theta_rule(n: usize) -> Vec<(f64, f64)> {
    let rule = GaussRule::new(n, -1.0, 1.0);
    rule.nodes.iter().zip(&rule.weights).rev().map(|(&u, &w)| (u.acos(), w)).collect()
}

/// θ-profile of the diagonal counts at fixed `phi`.
#[derive(Debug, Clone)]
pub struct ThetaProfile {
    pub theta: Vec<f64>,
    pub weight: Vec<f64>,
    pub n: Vec<f64>,
    pub n_tilde: Vec<f64>,
}

/// Precomputed directions for θ-integrated observables at fixed `phi`. The
/// generator does not depend on the spin model or on `T`, so one cache
/// serves a whole error curve.
#[derive(Debug, Clone)]
pub struct ThetaScan {
    pub phi: f64,
    pub directions: Vec<DirectionData>,
    pub weights: Vec<f64>,
}

impl ThetaScan {
    pub fn new(
        phi: f64,
        n_theta: usize,
        setup: &EmissionSetup,
        rad: &RadiativeParams,
    ) -> Result<Self, DynamicsError> {
        let rule = cos_theta_rule(n_theta);
        let directions = rule
            .par_iter()
            .map(|&(t, _)| direction_data(t, phi, setup, rad))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { phi, directions, weights: rule.iter().map(|&(_, w)| w).collect() })
    }

    pub fn profile(
        &self,
        alpha: Axis,
        rad: &RadiativeParams,
        model: &ModelParams,
    ) -> Result<ThetaProfile, DynamicsError> {
        let records = self
            .directions
            .par_iter()
            .map(|d| record_from(d, rad, model))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ThetaProfile {
            theta: self.directions.iter().map(|d| d.theta).collect(),
            weight: self.weights.clone(),
            n: records.iter().map(|r| r.get(alpha, alpha).re).collect(),
            n_tilde: records.iter().map(|r| r.get_tilde(alpha, alpha).re).collect(),
        })
    }
}

impl ThetaProfile {
    /// `E_R = sqrt(∫(N - Ñ)² / ∫N²)`, both over `d cos θ`.
    pub fn relative_error(&self) -> Result<f64, DynamicsError> {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&w, &n), &nt) in self.weight.iter().zip(&self.n).zip(&self.n_tilde) {
            num += w * (n - nt).powi(2);
            den += w * n * n;
        }
        if !(den > 0.0) {
            return Err(DynamicsError::UndefinedRelativeError);
        }
        Ok((num / den).sqrt())
    }

    /// `∫ d cos θ N(θ)`: emitted photons of this polarization at fixed φ.
    pub fn photons(&self) -> f64 {
        self.weight.iter().zip(&self.n).map(|(w, n)| w * n).sum()
    }
}

pub fn relative_error(
    alpha: Axis,
    phi: f64,
    setup: &EmissionSetup,
    rad: &RadiativeParams,
    model: &ModelParams,
) -> Result<f64, DynamicsError> {
    if !(rad.t > 0.0) {
        return Err(DynamicsError::BadParameter("relative error needs T > 0"));
    }
    ThetaScan::new(phi, DEFAULT_THETA_NODES, setup, rad)?
        .profile(alpha, rad, model)?
        .relative_error()
}

/// Weighted detection direction for photon budgets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedDirection {
    pub theta: f64,
    pub phi: f64,
    pub weight: f64,
}

/// Expected photon count `Σ_i w_i Σ_α N_αα(T)` over a direction set.
pub fn photon_budget(
    directions: &[WeightedDirection],
    polarizations: &[Axis],
    setup: &EmissionSetup,
    rad: &RadiativeParams,
    model: &ModelParams,
) -> Result<f64, DynamicsError> {
    let angles: Vec<(f64, f64)> = directions.iter().map(|d| (d.theta, d.phi)).collect();
    let records = emission_scan(&angles, setup, rad, model)?;
    Ok(records
        .iter()
        .zip(directions)
        .map(|(r, d)| d.weight * polarizations.iter().map(|&a| r.get(a, a).re).sum::<f64>())
        .sum())
}

/// Directions of the `d cos θ` rule at fixed `phi`.
pub fn theta_directions(phi: f64, n_theta: usize) -> Vec<WeightedDirection> {
    cos_theta_rule(n_theta)
        .into_iter()
        .map(|(theta, weight)| WeightedDirection { theta, phi, weight })
        .collect()
}

/// Counting window that yields `target` photons, by bisection on the
/// (monotone) budget curve.
pub fn window_for_photons(
    target: f64,
    scan: &ThetaScan,
    alpha: Axis,
    rad: &RadiativeParams,
    model: &ModelParams,
) -> Result<f64, DynamicsError> {
    let photons = |t: f64| scan.profile(alpha, &rad.with_t(t), model).map(|p| p.photons());
    let mut hi = 1e-3;
    while photons(hi)? < target {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(DynamicsError::BadParameter("photon target unreachable"));
        }
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if photons(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One point of a relative-error curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorPoint {
    pub t: f64,
    pub photons: f64,
    pub e_r: f64,
}

/// `E_R` against emitted photons for a sweep of counting windows.
pub fn error_curve(
    scan: &ThetaScan,
    alpha: Axis,
    rad: &RadiativeParams,
    model: &ModelParams,
    windows: &[f64],
) -> Result<Vec<ErrorPoint>, DynamicsError> {
    windows
        .iter()
        .map(|&t| {
            if t == 0.0 {
                return Ok(ErrorPoint { t, photons: 0.0, e_r: 0.0 });
            }
            let p = scan.profile(alpha, &rad.with_t(t), model)?;
            Ok(ErrorPoint { t, photons: p.photons(), e_r: p.relative_error()? })
        })
        .collect()
}
