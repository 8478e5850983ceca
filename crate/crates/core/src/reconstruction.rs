//! Position-space spin operators and correlations from momentum-grid
//! samples.
//!
//! With scaled momenta `k̃ = r0 Δk / π ∈ [-1, 1]^d`, the site operators are
//!
//! ```text
//! J_C^{(n)} = √N / 2^{d-1} ∫ dk̃ cos(π k̃·n) J_C^{Δk},   J^{(n)} = (J_C^{(n)} + J_S^{(n)}) / 2,
//! ```
//!
//! and similarly for the sine part. The integral is evaluated on a periodic
//! tensor grid of `K` points per axis (step `2/K`). For `K > 2 n_max` this is
//! an exact discrete transform of any field supported on `|n| ≤ n_max`.

use std::f64::consts::PI;

use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::detection::{FieldKind, SpinFieldSample};
use crate::geometry::{coverage_check, unit_direction, Axis, LatticeSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReconstructionError {
    #[error("momentum coverage fails: k_L r0 = {klr0:.6} is below the required {required:.6}")]
    CoverageRefused { klr0: f64, required: f64 },
    #[error("scaled momentum {ktilde:?} has no elastic scattering solution")]
    InfeasiblePoint { ktilde: [f64; 3] },
    #[error("grid resolution must be at least 1")]
    BadResolution,
    #[error("{} grid points have no sample, first at {:?}", .missing.len(), .missing.first())]
    IncompleteCoverage { missing: Vec<[f64; 3]> },
    #[error("sine part at the origin is {value:.3e}, expected zero")]
    OriginSinePart { value: f64 },
    #[error("site {0:?} is not on the lattice")]
    UnknownSite([i64; 3]),
    #[error("correlation input has {got} entries for {expected} grid points")]
    LengthMismatch { expected: usize, got: usize },
}

/// One detector (and laser) setting of a reconstruction scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub ktilde: [f64; 3],
    pub theta: f64,
    pub phi: f64,
    pub laser_dir: [f64; 3],
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentumGrid {
    pub dims: usize,
    pub resolution: usize,
    pub klr0: f64,
    pub coverage_margin: f64,
    pub points: Vec<GridPoint>,
}

/// Points per axis that make the grid exact for every site of `lattice`.
pub fn default_resolution(lattice: &LatticeSpec) -> usize {
    2 * lattice.max_offset() as usize + 1
}

/// Periodic nodes on `[-1, 1)` centred on zero: symmetric under `k̃ → -k̃`
/// for odd `k`.
fn axis_nodes(k: usize) -> Vec<f64> {
    let h = 2.0 / k as f64;
    let mid = (k as f64 - 1.0) / 2.0;
    (0..k).map(|i| h * (i as f64 - mid)).collect()
}

/// Detector direction for an in-plane scaled momentum with the laser along
/// `+z`, normal to the lattice; forward hemisphere.
fn planar_angles(kt: &[f64; 3], klr0: f64) -> Result<(f64, f64), ReconstructionError> {
    let s = PI * (kt[0] * kt[0] + kt[1] * kt[1]).sqrt() / klr0;
    if s > 1.0 + 1e-12 {
        return Err(ReconstructionError::InfeasiblePoint { ktilde: *kt });
    }
    let theta = s.min(1.0).asin();
    let phi = if s == 0.0 { 0.0 } else { kt[1].atan2(kt[0]) };
    Ok((theta, phi))
}

/// Detector and laser directions with `k̂ - l̂ = π k̃ / (k_L r0)`, placed
/// symmetrically about the momentum transfer.
fn reoriented_directions(kt: &[f64; 3], klr0: f64) -> Result<(Vector3<f64>, Vector3<f64>), ReconstructionError> {
    let d = Vector3::new(kt[0], kt[1], kt[2]) * (PI / klr0);
    let half = d.norm() / 2.0;
    if half > 1.0 + 1e-12 {
        return Err(ReconstructionError::InfeasiblePoint { ktilde: *kt });
    }
    if half == 0.0 {
        return Ok((Vector3::z(), Vector3::z()));
    }
    let dhat = d / d.norm();
    let seed = if dhat.z.abs() < 0.9 { Vector3::z() } else { Vector3::x() };
    let n = (seed - dhat * dhat.dot(&seed)).normalize();
    let a = (1.0 - half * half).max(0.0).sqrt();
    let half = half.min(1.0);
    Ok((n * a + dhat * half, n * a - dhat * half))
}

fn angles_of(v: &Vector3<f64>) -> (f64, f64) {
    let theta = v.z.clamp(-1.0, 1.0).acos();
    let phi = if v.x == 0.0 && v.y == 0.0 { 0.0 } else { v.y.atan2(v.x) };
    (theta, phi)
}

/// Tensor grid over `[-1, 1]^d` with detector settings for every point.
///
/// One- and two-dimensional lattices keep the laser along `z`; in three
/// dimensions the laser direction changes from point to point.
pub fn plan_grid(lattice: &LatticeSpec, k_l: f64, resolution: usize) -> Result<MomentumGrid, ReconstructionError> {
    let cov = coverage_check(lattice, k_l);
    let klr0 = k_l * lattice.r0();
    if !cov.pass {
        return Err(ReconstructionError::CoverageRefused { klr0, required: cov.required_klr0 });
    }
    if resolution == 0 {
        return Err(ReconstructionError::BadResolution);
    }
    let dims = lattice.dims();
    let nodes = axis_nodes(resolution);
    let h = 2.0 / resolution as f64;
    let weight = h.powi(dims as i32);
    let mut kts = vec![[0.0f64; 3]];
    for axis in 0..dims {
        kts = kts
            .into_iter()
            .flat_map(|p| {
                nodes.iter().map(move |&x| {
                    let mut q = p;
                    q[axis] = x;
                    q
                })
            })
            .collect();
    }
    let points = kts
        .into_iter()
        .map(|kt| {
            if dims < 3 {
                let (theta, phi) = planar_angles(&kt, klr0)?;
                Ok(GridPoint { ktilde: kt, theta, phi, laser_dir: [0.0, 0.0, 1.0], weight })
            } else {
                let (k, l) = reoriented_directions(&kt, klr0)?;
                let (theta, phi) = angles_of(&k);
                Ok(GridPoint { ktilde: kt, theta, phi, laser_dir: [l.x, l.y, l.z], weight })
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MomentumGrid { dims, resolution, klr0, coverage_margin: cov.margin, points })
}

impl MomentumGrid {
    /// Momentum transfer `π k̃ / r0` of point `i`.
    pub fn momentum(&self, i: usize, r0: f64) -> Vector3<f64> {
        let k = self.points[i].ktilde;
        Vector3::new(k[0], k[1], k[2]) * (PI / r0)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn locate(&self, kt: &[f64; 3]) -> Option<usize> {
        let h = 2.0 / self.resolution as f64;
        let mid = (self.resolution as f64 - 1.0) / 2.0;
        let mut index = 0usize;
        for a in 0..self.dims {
            let f = kt[a] / h + mid;
            let i = f.round();
            if (f - i).abs() > 1e-6 || i < 0.0 || i >= self.resolution as f64 {
                return None;
            }
            index = index * self.resolution + i as usize;
        }
        if (self.dims..3).any(|a| kt[a] != 0.0) {
            return None;
        }
        Some(index)
    }
}

/// Value and variance of an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub variance: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, variance: 0.0 }
    }

    pub fn std_error(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// One cosine- or sine-kind spin component on every grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub kind: FieldKind,
    pub component: Axis,
    pub values: Vec<Estimate>,
}

impl GridField {
    /// Collect the samples of `kind`/`component` onto the grid.
    pub fn from_samples(
        grid: &MomentumGrid,
        samples: &[SpinFieldSample],
        kind: FieldKind,
        component: Axis,
    ) -> Result<Self, ReconstructionError> {
        let mut values: Vec<Option<Estimate>> = vec![None; grid.len()];
        for s in samples.iter().filter(|s| s.kind == kind && s.component == component) {
            if let Some(i) = grid.locate(&s.ktilde) {
                values[i] = Some(Estimate { value: s.value, variance: s.variance });
            }
        }
        let missing: Vec<[f64; 3]> = values
            .iter()
            .zip(&grid.points)
            .filter(|(v, _)| v.is_none())
            .map(|(_, p)| p.ktilde)
            .collect();
        if !missing.is_empty() {
            return Err(ReconstructionError::IncompleteCoverage { missing });
        }
        Ok(Self { kind, component, values: values.into_iter().flatten().collect() })
    }

    /// Noiseless field from a function of the momentum transfer.
    pub fn from_fn(
        grid: &MomentumGrid,
        r0: f64,
        kind: FieldKind,
        component: Axis,
        f: impl Fn(&Vector3<f64>) -> f64,
    ) -> Self {
        let values = (0..grid.len()).map(|i| Estimate::exact(f(&grid.momentum(i, r0)))).collect();
        Self { kind, component, values }
    }
}

fn transform_constant(lattice: &LatticeSpec) -> f64 {
    (lattice.site_count() as f64).sqrt() / 2f64.powi(lattice.dims() as i32 - 1)
}

fn phase(kt: &[f64; 3], site: [i64; 3]) -> f64 {
    PI * (kt[0] * site[0] as f64 + kt[1] * site[1] as f64 + kt[2] * site[2] as f64)
}

/// `J_{Cβ}^{(n)}` or `J_{Sβ}^{(n)}` at `site`, according to the field kind.
pub fn inverse_fourier(grid: &MomentumGrid, field: &GridField, lattice: &LatticeSpec, site: [i64; 3]) -> Estimate {
    let c = transform_constant(lattice);
    let mut value = 0.0;
    let mut variance = 0.0;
    for (p, v) in grid.points.iter().zip(&field.values) {
        let ph = phase(&p.ktilde, site);
        let k = match field.kind {
            FieldKind::C => ph.cos(),
            FieldKind::S => ph.sin(),
        };
        value += p.weight * k * v.value;
        variance += (p.weight * k).powi(2) * v.variance;
    }
    Estimate { value: c * value, variance: c * c * variance }
}

pub fn inverse_fourier_c(grid: &MomentumGrid, field: &GridField, lattice: &LatticeSpec, site: [i64; 3]) -> Estimate {
    debug_assert_eq!(field.kind, FieldKind::C);
    inverse_fourier(grid, field, lattice, site)
}

pub fn inverse_fourier_s(grid: &MomentumGrid, field: &GridField, lattice: &LatticeSpec, site: [i64; 3]) -> Estimate {
    debug_assert_eq!(field.kind, FieldKind::S);
    inverse_fourier(grid, field, lattice, site)
}

/// A site operator and its mirror image through the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SitePair {
    pub site: Estimate,
    pub mirror: Estimate,
}

/// `J^{(n)} = (C + S)/2` and `J^{(-n)} = (C - S)/2`.
pub fn combine_site_operator(c: Estimate, s: Estimate) -> SitePair {
    let variance = (c.variance + s.variance) / 4.0;
    SitePair {
        site: Estimate { value: (c.value + s.value) / 2.0, variance },
        mirror: Estimate { value: (c.value - s.value) / 2.0, variance },
    }
}

/// [`combine_site_operator`] with the origin check: there the sine part must
/// vanish.
pub fn combine_at(site: [i64; 3], c: Estimate, s: Estimate) -> Result<SitePair, ReconstructionError> {
    if site == [0, 0, 0] && s.value.abs() > 1e-8 + 5.0 * s.std_error() {
        return Err(ReconstructionError::OriginSinePart { value: s.value });
    }
    Ok(combine_site_operator(c, s))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositionOperatorMap {
    pub component: Axis,
    pub sites: Vec<[i64; 3]>,
    pub values: Vec<Estimate>,
}

impl PositionOperatorMap {
    pub fn get(&self, site: [i64; 3]) -> Option<Estimate> {
        self.sites.iter().position(|&s| s == site).map(|i| self.values[i])
    }
}

/// Reconstruct `J_β^{(n)}` on every site of `lattice`.
pub fn reconstruct_sites(
    grid: &MomentumGrid,
    c: &GridField,
    s: &GridField,
    lattice: &LatticeSpec,
) -> Result<PositionOperatorMap, ReconstructionError> {
    let sites = lattice.sites();
    let values = sites
        .par_iter()
        .map(|&n| {
            let ce = inverse_fourier(grid, c, lattice, n);
            let se = inverse_fourier(grid, s, lattice, n);
            combine_at(n, ce, se).map(|p| p.site)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PositionOperatorMap { component: c.component, sites, values })
}

/// Real-space correlation `⟨J_α^{(0)} J_β^{(n)}⟩` of a translation-invariant
/// state from its structure factor `⟨J_α^q J_β^{-q}⟩` sampled on the grid.
pub fn position_correlation(grid: &MomentumGrid, structure: &[Complex64], offset: [i64; 3]) -> Result<Complex64, ReconstructionError> {
    if structure.len() != grid.len() {
        return Err(ReconstructionError::LengthMismatch { expected: grid.len(), got: structure.len() });
    }
    let norm = 2f64.powi(grid.dims as i32);
    Ok(grid
        .points
        .iter()
        .zip(structure)
        .map(|(p, s)| s * Complex64::from_polar(p.weight, phase(&p.ktilde, offset)))
        .sum::<Complex64>()
        / norm)
}

/// Structure factor `⟨J_C²⟩ + ⟨J_S²⟩` at one grid point from single-shot
/// cosine and sine readouts. For `q ≢ -q` this is `⟨J^q J^{-q}⟩`
/// symmetrized; at self-conjugate points the sine part vanishes.
pub fn structure_factor_estimate(c_shots: &[f64], s_shots: &[f64]) -> Estimate {
    let moment = |v: &[f64]| -> (f64, f64) {
        let n = v.len() as f64;
        if v.is_empty() {
            return (0.0, 0.0);
        }
        let m = v.iter().map(|x| x * x).sum::<f64>() / n;
        let var = if n > 1.0 { v.iter().map(|x| (x * x - m).powi(2)).sum::<f64>() / (n - 1.0) / n } else { 0.0 };
        (m, var)
    };
    let (mc, vc) = moment(c_shots);
    let (ms, vs) = moment(s_shots);
    Estimate { value: mc + ms, variance: vc + vs }
}

/// [`position_correlation`] for a real, even structure factor with
/// independent per-point errors.
pub fn position_correlation_estimate(
    grid: &MomentumGrid,
    structure: &[Estimate],
    offset: [i64; 3],
) -> Result<Estimate, ReconstructionError> {
    if structure.len() != grid.len() {
        return Err(ReconstructionError::LengthMismatch { expected: grid.len(), got: structure.len() });
    }
    let norm = 2f64.powi(grid.dims as i32);
    let mut value = 0.0;
    let mut variance = 0.0;
    for (p, s) in grid.points.iter().zip(structure) {
        let k = p.weight * phase(&p.ktilde, offset).cos() / norm;
        value += k * s.value;
        variance += k * k * s.variance;
    }
    Ok(Estimate { value, variance })
}

/// Finite-lattice momentum sum `(1/N) Σ_q e^{iq·r_n} S(q)` over the
/// Brillouin grid: the reference for [`position_correlation`].
pub fn lattice_momentum_sum(lattice: &LatticeSpec, structure: impl Fn(&Vector3<f64>) -> Complex64, offset: [i64; 3]) -> Complex64 {
    let r = lattice.position(offset);
    let grid = lattice.brillouin_grid();
    grid.iter().map(|q| structure(q) * Complex64::from_polar(1.0, q.dot(&r))).sum::<Complex64>() / grid.len() as f64
}

/// Nearest-neighbour bond strength `⟨J^{(0)}·J^{(e)}⟩` along each lattice
/// axis `e`, from the `xx` and `yy` structure factors. The longitudinal
/// component is frozen in the spin-wave picture and left out.
pub fn valence_bond(grid: &MomentumGrid, sxx: &[Complex64], syy: &[Complex64]) -> Result<Vec<f64>, ReconstructionError> {
    (0..grid.dims)
        .map(|a| {
            let mut e = [0i64; 3];
            e[a] = 1;
            Ok((position_correlation(grid, sxx, e)? + position_correlation(grid, syy, e)?).re)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationEntry {
    pub site_a: [i64; 3],
    pub site_b: [i64; 3],
    pub beta_a: Axis,
    pub beta_b: Axis,
    pub value: f64,
    pub std_error: f64,
}

/// Two-point correlations `⟨J_{β}^{a} J_{β'}^{b}⟩` averaged over shots, each
/// shot given as per-component site maps.
pub fn empirical_correlations(
    shots: &[Vec<PositionOperatorMap>],
    pairs: &[([i64; 3], Axis, [i64; 3], Axis)],
) -> Result<Vec<CorrelationEntry>, ReconstructionError> {
    let lookup = |shot: &[PositionOperatorMap], site: [i64; 3], beta: Axis| {
        shot.iter()
            .find(|m| m.component == beta)
            .and_then(|m| m.get(site))
            .map(|e| e.value)
            .ok_or(ReconstructionError::UnknownSite(site))
    };
    pairs
        .iter()
        .map(|&(a, ba, b, bb)| {
            let products = shots
                .iter()
                .map(|s| Ok(lookup(s, a, ba)? * lookup(s, b, bb)?))
                .collect::<Result<Vec<f64>, ReconstructionError>>()?;
            let n = products.len() as f64;
            let mean = products.iter().sum::<f64>() / n;
            let var = if n > 1.0 { products.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            Ok(CorrelationEntry { site_a: a, site_b: b, beta_a: ba, beta_b: bb, value: mean, std_error: (var / n).sqrt() })
        })
        .collect()
}

/// Detector direction for point `p`.
pub fn detector_direction(p: &GridPoint) -> Vector3<f64> {
    unit_direction(p.theta, p.phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::SpinField;
    use crate::geometry::required_klr0;
    use crate::spinwave::{ground_state_correlations, ModelParams};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn fields(grid: &MomentumGrid, f: &SpinField, beta: Axis) -> (GridField, GridField) {
        let r0 = f.lattice().r0();
        (
            GridField::from_fn(grid, r0, FieldKind::C, beta, |dk| f.component(dk, beta, FieldKind::C)),
            GridField::from_fn(grid, r0, FieldKind::S, beta, |dk| f.component(dk, beta, FieldKind::S)),
        )
    }

    #[test]
    fn grid_weights_and_symmetry() {
        let lat = LatticeSpec::square(6, 1.0).unwrap();
        let g = plan_grid(&lat, required_klr0(2), 7).unwrap();
        assert_eq!(g.len(), 49);
        assert_abs_diff_eq!(g.points.iter().map(|p| p.weight).sum::<f64>(), 4.0, epsilon = 1e-12);
        let centre = g.points.iter().find(|p| p.ktilde == [0.0; 3]).unwrap();
        assert_eq!(centre.theta, 0.0);
        for p in &g.points {
            let neg = [-p.ktilde[0], -p.ktilde[1], 0.0];
            assert!(g.locate(&neg).is_some());
            // detector direction realizes the requested in-plane transfer
            let k = detector_direction(p) * g.klr0 / PI;
            assert_abs_diff_eq!(k.x, p.ktilde[0], epsilon = 1e-12);
            assert_abs_diff_eq!(k.y, p.ktilde[1], epsilon = 1e-12);
        }
    }

    #[test]
    fn corner_is_boundary_feasible() {
        let (theta, phi) = planar_angles(&[1.0, 1.0, 0.0], required_klr0(2)).unwrap();
        assert_abs_diff_eq!(theta, PI / 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(phi, PI / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn refuses_without_coverage() {
        let lat = LatticeSpec::square(4, 1.0).unwrap();
        let err = plan_grid(&lat, PI, 5).unwrap_err();
        assert!(matches!(err, ReconstructionError::CoverageRefused { .. }));
        let cube = LatticeSpec::new(&[3, 3, 3], 1.0).unwrap();
        assert!(plan_grid(&cube, 1.7 * PI, 3).is_err());
        assert!(plan_grid(&cube, 1.75 * PI, 3).is_ok());
    }

    #[test]
    fn three_d_directions_realize_transfer() {
        let cube = LatticeSpec::new(&[4, 4, 4], 1.0).unwrap();
        let g = plan_grid(&cube, required_klr0(3), 9).unwrap();
        for p in &g.points {
            let l = Vector3::new(p.laser_dir[0], p.laser_dir[1], p.laser_dir[2]);
            assert_abs_diff_eq!(l.norm(), 1.0, epsilon = 1e-12);
            let dk = (detector_direction(p) - l) * g.klr0 / PI;
            for a in 0..3 {
                assert_abs_diff_eq!(dk[a], p.ktilde[a], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn constant_field_peaks_at_origin() {
        let lat = LatticeSpec::square(5, 1.0).unwrap();
        let g = plan_grid(&lat, required_klr0(2), default_resolution(&lat)).unwrap();
        let c = GridField::from_fn(&g, 1.0, FieldKind::C, Axis::X, |_| 1.0);
        let origin = inverse_fourier_c(&g, &c, &lat, [0, 0, 0]).value;
        assert_abs_diff_eq!(origin, 2.0 * 5.0, epsilon = 1e-10);
        for n in lat.sites().into_iter().filter(|&s| s != [0, 0, 0]) {
            assert_abs_diff_eq!(inverse_fourier_c(&g, &c, &lat, n).value, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn two_site_pattern_round_trip() {
        let lat = LatticeSpec::square(7, 1.0).unwrap();
        let mut f = SpinField::zeros(&lat);
        f.set([1, 2, 0], Axis::X, 0.8);
        f.set([-3, 1, 0], Axis::X, -0.25);
        let g = plan_grid(&lat, required_klr0(2), default_resolution(&lat)).unwrap();
        let (c, s) = fields(&g, &f, Axis::X);
        let map = reconstruct_sites(&g, &c, &s, &lat).unwrap();
        for (site, e) in map.sites.iter().zip(&map.values) {
            assert_abs_diff_eq!(e.value, f.get(*site, Axis::X), epsilon = 1e-10);
        }
        let pair = combine_site_operator(
            inverse_fourier_c(&g, &c, &lat, [1, 2, 0]),
            inverse_fourier_s(&g, &s, &lat, [1, 2, 0]),
        );
        assert_abs_diff_eq!(pair.mirror.value, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn combine_examples() {
        let p = combine_site_operator(Estimate::exact(2.0 * 0.4), Estimate::exact(0.0));
        assert_eq!(p.site.value, 0.4);
        assert_eq!(p.mirror.value, 0.4);
        assert!(combine_at([0, 0, 0], Estimate::exact(1.0), Estimate::exact(0.1)).is_err());
    }

    #[test]
    fn missing_points_reported() {
        let lat = LatticeSpec::square(3, 1.0).unwrap();
        let g = plan_grid(&lat, required_klr0(2), 3).unwrap();
        let samples: Vec<SpinFieldSample> = g.points[1..]
            .iter()
            .map(|p| SpinFieldSample { ktilde: p.ktilde, component: Axis::X, kind: FieldKind::C, value: 0.0, variance: 0.0 })
            .collect();
        match GridField::from_samples(&g, &samples, FieldKind::C, Axis::X) {
            Err(ReconstructionError::IncompleteCoverage { missing }) => assert_eq!(missing, vec![g.points[0].ktilde]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hp_correlations_match_momentum_sum() {
        // with resolution equal to the (odd) extent the grid is the
        // Brillouin grid and the two routes coincide
        let lat = LatticeSpec::square(9, 1.0).unwrap();
        let model = ModelParams::new(1.0, -0.3, lat.clone()).unwrap();
        let g = plan_grid(&lat, required_klr0(2), 9).unwrap();
        let sxx: Vec<Complex64> =
            (0..g.len()).map(|i| ground_state_correlations(&g.momentum(i, 1.0), &model).unwrap().c[(0, 0)]).collect();
        let mut prev = f64::INFINITY;
        for n in 0..4 {
            let r = position_correlation(&g, &sxx, [n, 0, 0]).unwrap();
            let oracle = lattice_momentum_sum(&lat, |q| ground_state_correlations(q, &model).unwrap().c[(0, 0)], [n, 0, 0]);
            assert_abs_diff_eq!(r.re, oracle.re, epsilon = 1e-12);
            assert_abs_diff_eq!(r.im, 0.0, epsilon = 1e-12);
            // ferromagnetic coupling: positive, decaying correlations
            assert!(r.re > 0.0 && r.re < prev);
            prev = r.re;
        }
        let syy: Vec<Complex64> =
            (0..g.len()).map(|i| ground_state_correlations(&g.momentum(i, 1.0), &model).unwrap().c[(1, 1)]).collect();
        let bonds = valence_bond(&g, &sxx, &syy).unwrap();
        assert_abs_diff_eq!(bonds[0], bonds[1], epsilon = 1e-12);
    }

    #[test]
    fn parseval() {
        let lat = LatticeSpec::square(5, 1.0).unwrap();
        let f = SpinField::from_fn(&lat, |s| [(s[0] as f64 * 0.3 + s[1] as f64).sin(), 0.0, 0.0]);
        let g = plan_grid(&lat, required_klr0(2), default_resolution(&lat)).unwrap();
        let (c, s) = fields(&g, &f, Axis::X);
        let lhs: f64 = g.points.iter().zip(c.values.iter().zip(&s.values)).map(|(p, (a, b))| p.weight * (a.value.powi(2) + b.value.powi(2))).sum();
        // ∫(J_C² + J_S²) = 2^d/N Σ_j (J^j)²
        let rhs: f64 = 4.0 / 25.0 * f.values().iter().map(|v| v[0] * v[0]).sum::<f64>();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
    }

    #[test]
    fn variance_propagates() {
        let lat = LatticeSpec::chain(3, 1.0).unwrap();
        let g = plan_grid(&lat, PI, 3).unwrap();
        let c = GridField { kind: FieldKind::C, component: Axis::X, values: vec![Estimate { value: 0.0, variance: 1.0 }; 3] };
        let e = inverse_fourier_c(&g, &c, &lat, [0, 0, 0]);
        // √N · h · √3 with h = 2/3
        assert_abs_diff_eq!(e.variance, 3.0 * (2.0f64 / 3.0).powi(2) * 3.0, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn round_trip_random_fields(side in 1usize..8, seed in 0u64..1000) {
            let lat = LatticeSpec::square(side, 1.0).unwrap();
            let f = SpinField::from_fn(&lat, |s| {
                let h = (s[0] * 31 + s[1] * 17) as f64 + seed as f64;
                [(h * 0.37).sin(), (h * 0.11).cos(), 0.0]
            });
            let g = plan_grid(&lat, required_klr0(2) * 1.1, default_resolution(&lat)).unwrap();
            for beta in [Axis::X, Axis::Y] {
                let (c, s) = fields(&g, &f, beta);
                let map = reconstruct_sites(&g, &c, &s, &lat).unwrap();
                for (site, e) in map.sites.iter().zip(&map.values) {
                    prop_assert!((e.value - f.get(*site, beta)).abs() < 1e-10);
                }
            }
        }

        #[test]
        fn linearity(a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let lat = LatticeSpec::square(4, 1.0).unwrap();
            let g = plan_grid(&lat, required_klr0(2), 9).unwrap();
            let f1 = |q: &Vector3<f64>| (q.x + 0.3).cos();
            let f2 = |q: &Vector3<f64>| (2.0 * q.y).sin() + q.x;
            let c1 = GridField::from_fn(&g, 1.0, FieldKind::C, Axis::X, f1);
            let c2 = GridField::from_fn(&g, 1.0, FieldKind::C, Axis::X, f2);
            let c12 = GridField::from_fn(&g, 1.0, FieldKind::C, Axis::X, |q| a * f1(q) + b * f2(q));
            let site = [1, -1, 0];
            let lhs = inverse_fourier_c(&g, &c12, &lat, site).value;
            let rhs = a * inverse_fourier_c(&g, &c1, &lat, site).value + b * inverse_fourier_c(&g, &c2, &lat, site).value;
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
