//! Small 2D cluster states as dense state vectors, their stabilizers, and
//! multi-point momentum correlators of collective spin operators.
//!
//! Sites are numbered row-major, `index = r * cols + c`, and site `i` is bit
//! `i` of the basis index. Correlators are in spin-1/2 units (`S = σ/2`);
//! multiply by `2^n` for Pauli units.

use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::Axis;
use crate::pauli::{self, Pauli, MAX_SITES};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("{sites} sites exceed the dense-state limit of {MAX_SITES}")]
    TooManySites { sites: usize },
    #[error("lattice needs at least one site")]
    Empty,
    #[error("site {site} outside a lattice of {sites} sites")]
    SiteOutOfRange { site: usize, sites: usize },
    #[error("site {neighbor} is not adjacent to {center}")]
    NotAdjacent { center: usize, neighbor: usize },
    #[error("correlator needs at least one operator")]
    EmptyPattern,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    rows: usize,
    cols: usize,
    amplitudes: Vec<Complex64>,
}

fn check_size(rows: usize, cols: usize) -> Result<usize, ClusterError> {
    let n = rows * cols;
    if n == 0 {
        return Err(ClusterError::Empty);
    }
    if n > MAX_SITES {
        return Err(ClusterError::TooManySites { sites: n });
    }
    Ok(n)
}

impl PureState {
    /// All spins in `σ_z = +1`.
    pub fn all_up(rows: usize, cols: usize) -> Result<Self, ClusterError> {
        let n = check_size(rows, cols)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self { rows, cols, amplitudes })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn sites(&self) -> usize {
        self.rows * self.cols
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        pauli::norm(&self.amplitudes)
    }

    pub fn site_index(&self, r: usize, c: usize) -> usize {
        r * self.cols + c
    }

    pub fn coords(&self, site: usize) -> (usize, usize) {
        (site / self.cols, site % self.cols)
    }

    /// Lattice neighbours of `site` in ascending order.
    pub fn neighbors(&self, site: usize) -> Vec<usize> {
        let (r, c) = self.coords(site);
        let mut out = Vec::with_capacity(4);
        if r > 0 {
            out.push(site - self.cols);
        }
        if c > 0 {
            out.push(site - 1);
        }
        if c + 1 < self.cols {
            out.push(site + 1);
        }
        if r + 1 < self.rows {
            out.push(site + self.cols);
        }
        out
    }

    fn check_site(&self, site: usize) -> Result<(), ClusterError> {
        if site >= self.sites() {
            return Err(ClusterError::SiteOutOfRange { site, sites: self.sites() });
        }
        Ok(())
    }

    pub fn apply_pauli(&mut self, p: Pauli, site: usize) -> Result<(), ClusterError> {
        self.check_site(site)?;
        self.amplitudes = pauli::apply_pauli(p, site, &self.amplitudes);
        Ok(())
    }
}

/// `|+⟩^{⊗n}` followed by a controlled-phase on every lattice edge.
pub fn build_cluster_state(rows: usize, cols: usize) -> Result<PureState, ClusterError> {
    let n = check_size(rows, cols)?;
    let dim = 1usize << n;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let s = r * cols + c;
            if c + 1 < cols {
                edges.push((s, s + 1));
            }
            if r + 1 < rows {
                edges.push((s, s + cols));
            }
        }
    }
    let amp = (dim as f64).sqrt().recip();
    let amplitudes = (0..dim)
        .map(|idx| {
            let flips = edges.iter().filter(|&&(a, b)| idx >> a & 1 == 1 && idx >> b & 1 == 1).count();
            Complex64::new(if flips % 2 == 0 { amp } else { -amp }, 0.0)
        })
        .collect();
    Ok(PureState { rows, cols, amplitudes })
}

/// `K^j = σ_x^j ⊗_{l ∈ neigh(j)} σ_z^l`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StabilizerSpec {
    pub center: usize,
    pub neighbors: Vec<usize>,
}

impl StabilizerSpec {
    pub fn new(state: &PureState, center: usize, neighbors: Vec<usize>) -> Result<Self, ClusterError> {
        state.check_site(center)?;
        let adjacent = state.neighbors(center);
        if let Some(&bad) = neighbors.iter().find(|n| !adjacent.contains(n)) {
            return Err(ClusterError::NotAdjacent { center, neighbor: bad });
        }
        Ok(Self { center, neighbors })
    }

    /// Stabilizer with every lattice neighbour of `center`.
    pub fn full(state: &PureState, center: usize) -> Result<Self, ClusterError> {
        state.check_site(center)?;
        Ok(Self { center, neighbors: state.neighbors(center) })
    }

    fn factors(&self) -> Vec<(usize, Pauli)> {
        let mut f = vec![(self.center, Pauli::X)];
        f.extend(self.neighbors.iter().map(|&n| (n, Pauli::Z)));
        f
    }
}

pub fn all_stabilizers(state: &PureState) -> Vec<StabilizerSpec> {
    (0..state.sites()).map(|j| StabilizerSpec { center: j, neighbors: state.neighbors(j) }).collect()
}

pub fn stabilizer_expectation(state: &PureState, spec: &StabilizerSpec) -> f64 {
    pauli::pauli_string_expectation(&state.amplitudes, &spec.factors()).re
}

/// `⟨Π_i S_{β_i}^{s_i}⟩` for a product of single-site spin operators, applied
/// right to left. Sites may coincide.
pub fn position_correlator(state: &PureState, ops: &[(usize, Axis)]) -> Result<Complex64, ClusterError> {
    for &(s, _) in ops {
        state.check_site(s)?;
    }
    let factors: Vec<(usize, Pauli)> = ops.iter().map(|&(s, a)| (s, a.into())).collect();
    let scale = 0.5f64.powi(ops.len() as i32);
    Ok(pauli::pauli_string_expectation(&state.amplitudes, &factors) * scale)
}

/// Five-point position correlator in spin units; real whenever the sites are
/// distinct.
pub fn position_five_point(state: &PureState, sites: [usize; 5], pattern: [Axis; 5]) -> Result<Complex64, ClusterError> {
    let ops: Vec<(usize, Axis)> = sites.into_iter().zip(pattern).collect();
    position_correlator(state, &ops)
}

/// The `(z, z, x, z, z)` ordering of the cluster correlator.
pub const CLUSTER_PATTERN: [Axis; 5] = [Axis::Z, Axis::Z, Axis::X, Axis::Z, Axis::Z];

/// Collective operator `Σ_j c_j S_β^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveOperator {
    pub axis: Axis,
    pub coefficients: Vec<Complex64>,
}

impl CollectiveOperator {
    /// `S_β^{k} = N^{-1/2} Σ_j e^{i k·r_j} S_β^j` with `r_j = (r, c)` in units of
    /// the lattice constant.
    pub fn momentum(state: &PureState, axis: Axis, k: &Vector3<f64>) -> Self {
        let n = state.sites();
        let norm = (n as f64).sqrt().recip();
        let coefficients = (0..n)
            .map(|j| {
                let (r, c) = state.coords(j);
                Complex64::from_polar(norm, k.x * r as f64 + k.y * c as f64)
            })
            .collect();
        Self { axis, coefficients }
    }

    fn apply(&self, psi: &[Complex64], out: &mut [Complex64], scratch: &mut [Complex64]) {
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (site, &c) in self.coefficients.iter().enumerate() {
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            pauli::apply_pauli_into(self.axis.into(), site, psi, scratch);
            let c = c * 0.5;
            for (o, s) in out.iter_mut().zip(scratch.iter()) {
                *o += c * s;
            }
        }
    }
}

/// `⟨O_1 O_2 … O_n⟩` for collective operators.
pub fn collective_correlator(state: &PureState, ops: &[CollectiveOperator]) -> Result<Complex64, ClusterError> {
    if ops.is_empty() {
        return Err(ClusterError::EmptyPattern);
    }
    let dim = state.amplitudes.len();
    let mut v = state.amplitudes.clone();
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    let mut scratch = vec![Complex64::new(0.0, 0.0); dim];
    for op in ops.iter().rev() {
        op.apply(&v, &mut out, &mut scratch);
        std::mem::swap(&mut v, &mut out);
    }
    Ok(pauli::inner(&state.amplitudes, &v))
}

/// `⟨S_{β_1}^{Δk_1} … S_{β_5}^{Δk_5}⟩`.
pub fn five_point_momentum_correlation(
    state: &PureState,
    dk: [Vector3<f64>; 5],
    pattern: [Axis; 5],
) -> Result<Complex64, ClusterError> {
    let ops: Vec<CollectiveOperator> =
        dk.iter().zip(pattern).map(|(k, a)| CollectiveOperator::momentum(state, a, k)).collect();
    collective_correlator(state, &ops)
}

/// Discrete momenta `2π(m_r / rows, m_c / cols)` of the lattice.
pub fn dft_momenta(state: &PureState) -> Vec<Vector3<f64>> {
    let tau = std::f64::consts::TAU;
    let mut out = Vec::with_capacity(state.sites());
    for mr in 0..state.rows {
        for mc in 0..state.cols {
            out.push(Vector3::new(tau * mr as f64 / state.rows as f64, tau * mc as f64 / state.cols as f64, 0.0));
        }
    }
    out
}

/// Position-space correlator recovered from the momentum correlator on every
/// tuple of lattice momenta,
/// `N^{-n/2} Σ_{k_1..k_n} e^{-i Σ k_i·r_i} ⟨S^{k_1} … S^{k_n}⟩`.
///
/// Cost grows as `N^n`; see [`momentum_route_factorized`] for large lattices.
pub fn momentum_route_correlator(state: &PureState, ops: &[(usize, Axis)]) -> Result<Complex64, ClusterError> {
    if ops.is_empty() {
        return Err(ClusterError::EmptyPattern);
    }
    for &(s, _) in ops {
        state.check_site(s)?;
    }
    let ks = dft_momenta(state);
    // slot operators and inverse-transform phases, innermost (rightmost) first
    let slots: Vec<Vec<(CollectiveOperator, Complex64)>> = ops
        .iter()
        .rev()
        .map(|&(site, axis)| ks.iter().map(|k| (CollectiveOperator::momentum(state, axis, k), inverse_phase(state, k, site))).collect())
        .collect();
    let dim = state.amplitudes.len();
    // collected before summing so the result does not depend on the thread count
    let parts: Vec<Complex64> = slots[0]
        .par_iter()
        .map(|(op, w)| {
            let mut scratch = vec![Complex64::new(0.0, 0.0); dim];
            let mut v = vec![Complex64::new(0.0, 0.0); dim];
            op.apply(&state.amplitudes, &mut v, &mut scratch);
            w * descend(state, &slots[1..], &v, &mut scratch)
        })
        .collect();
    let total: Complex64 = parts.iter().sum();
    Ok(total / (state.sites() as f64).powf(ops.len() as f64 / 2.0))
}

fn inverse_phase(state: &PureState, k: &Vector3<f64>, site: usize) -> Complex64 {
    let (r, c) = state.coords(site);
    Complex64::from_polar(1.0, -(k.x * r as f64 + k.y * c as f64))
}

fn descend(
    state: &PureState,
    slots: &[Vec<(CollectiveOperator, Complex64)>],
    v: &[Complex64],
    scratch: &mut [Complex64],
) -> Complex64 {
    match slots.split_first() {
        None => pauli::inner(&state.amplitudes, v),
        Some((slot, rest)) => {
            let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
            let mut sum = Complex64::new(0.0, 0.0);
            for (op, w) in slot {
                op.apply(v, &mut out, scratch);
                sum += w * descend(state, rest, &out, scratch);
            }
            sum
        }
    }
}

/// Same quantity as [`momentum_route_correlator`], summing each slot over
/// momenta before applying it: the slot operator
/// `N^{-1/2} Σ_k e^{-ik·r} S^k` is built numerically from the momentum-space
/// coefficients. Cost is linear in the number of operators.
pub fn momentum_route_factorized(state: &PureState, ops: &[(usize, Axis)]) -> Result<Complex64, ClusterError> {
    if ops.is_empty() {
        return Err(ClusterError::EmptyPattern);
    }
    for &(s, _) in ops {
        state.check_site(s)?;
    }
    let ks = dft_momenta(state);
    let norm = (state.sites() as f64).sqrt().recip();
    let slot_ops: Vec<CollectiveOperator> = ops
        .iter()
        .map(|&(site, axis)| {
            let mut coefficients = vec![Complex64::new(0.0, 0.0); state.sites()];
            for k in &ks {
                let op = CollectiveOperator::momentum(state, axis, k);
                let w = inverse_phase(state, k, site) * norm;
                for (c, o) in coefficients.iter_mut().zip(&op.coefficients) {
                    *c += w * o;
                }
            }
            CollectiveOperator { axis, coefficients }
        })
        .collect();
    collective_correlator(state, &slot_ops)
}

/// Work estimate above which verification switches to the factorized
/// momentum route.
pub const FULL_ROUTE_BUDGET: f64 = 2e8;

fn momentum_route(state: &PureState, ops: &[(usize, Axis)]) -> Result<(Complex64, bool), ClusterError> {
    let n = state.sites() as f64;
    let work = n.powi(ops.len() as i32) * n * state.amplitudes.len() as f64;
    if work <= FULL_ROUTE_BUDGET {
        Ok((momentum_route_correlator(state, ops)?, true))
    } else {
        Ok((momentum_route_factorized(state, ops)?, false))
    }
}

/// Five site operators for stabilizer `spec` in the cluster ordering. Centres
/// with two neighbours `a, b` use `Z_a Z_b Z_b Z_b = Z_a Z_b`;
/// other degrees have no five-factor form.
pub fn five_point_sites(spec: &StabilizerSpec) -> Option<[usize; 5]> {
    match spec.neighbors.as_slice() {
        [a, b, c, d] => Some([*a, *b, spec.center, *c, *d]),
        [a, b] => Some([*a, *b, spec.center, *b, *b]),
        _ => None,
    }
}

/// Stabilizer as an ordered spin-operator product: the cluster pattern when a
/// five-factor form exists, otherwise `x` on the centre followed by the
/// neighbour `z`s.
pub fn stabilizer_operators(spec: &StabilizerSpec) -> Vec<(usize, Axis)> {
    match five_point_sites(spec) {
        Some(sites) => sites.into_iter().zip(CLUSTER_PATTERN).collect(),
        None => {
            let mut ops = vec![(spec.center, Axis::X)];
            ops.extend(spec.neighbors.iter().map(|&n| (n, Axis::Z)));
            ops
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilizerCheck {
    pub center: usize,
    pub neighbors: Vec<usize>,
    pub expectation: f64,
    /// Operator count of the momentum-route correlator.
    pub order: usize,
    /// Momentum-route value in Pauli units.
    pub momentum_route: f64,
    pub momentum_imag: f64,
    /// Whether the momentum route enumerated every momentum tuple.
    pub full_route: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub rows: usize,
    pub cols: usize,
    pub tolerance: f64,
    pub stabilizers: Vec<StabilizerCheck>,
    /// Largest |momentum route − direct expectation| over all stabilizers.
    pub max_deviation: f64,
    pub min_expectation: f64,
    pub pass: bool,
}

/// Check every stabilizer of `state` directly and through the momentum
/// route; passes when each equals +1 within `tolerance`.
pub fn verify_cluster(state: &PureState, tolerance: f64) -> Result<VerificationReport, ClusterError> {
    let mut checks = Vec::new();
    for spec in all_stabilizers(state) {
        let expectation = stabilizer_expectation(state, &spec);
        let ops = stabilizer_operators(&spec);
        let (m, full) = momentum_route(state, &ops)?;
        let m = m * 2f64.powi(ops.len() as i32);
        checks.push(StabilizerCheck {
            center: spec.center,
            neighbors: spec.neighbors,
            expectation,
            order: ops.len(),
            momentum_route: m.re,
            momentum_imag: m.im,
            full_route: full,
        });
    }
    let max_deviation = checks
        .iter()
        .map(|c| (c.momentum_route - c.expectation).abs().max(c.momentum_imag.abs()))
        .fold(0.0, f64::max);
    let min_expectation = checks.iter().map(|c| c.expectation).fold(f64::INFINITY, f64::min);
    let pass = checks.iter().all(|c| (c.expectation - 1.0).abs() <= tolerance) && max_deviation <= tolerance.max(1e-8);
    Ok(VerificationReport {
        rows: state.rows,
        cols: state.cols,
        tolerance,
        stabilizers: checks,
        max_deviation,
        min_expectation,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_site_cluster_amplitudes() {
        let s = build_cluster_state(1, 2).unwrap();
        let expect = [0.5, 0.5, 0.5, -0.5];
        for (a, e) in s.amplitudes().iter().zip(expect) {
            assert_abs_diff_eq!(a.re, e, epsilon = 1e-15);
            assert_eq!(a.im, 0.0);
        }
    }

    #[test]
    fn size_limit() {
        assert!(build_cluster_state(4, 4).is_ok());
        assert_eq!(build_cluster_state(1, 17).unwrap_err(), ClusterError::TooManySites { sites: 17 });
        assert_eq!(build_cluster_state(0, 3).unwrap_err(), ClusterError::Empty);
    }

    #[test]
    fn stabilizers_hold() {
        for (r, c) in [(2, 2), (2, 3), (3, 3)] {
            let s = build_cluster_state(r, c).unwrap();
            assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-12);
            for spec in all_stabilizers(&s) {
                assert_abs_diff_eq!(stabilizer_expectation(&s, &spec), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn product_state_and_flip() {
        let p = PureState::all_up(2, 2).unwrap();
        let spec = StabilizerSpec::full(&p, 0).unwrap();
        assert_abs_diff_eq!(stabilizer_expectation(&p, &spec), 0.0, epsilon = 1e-15);

        let mut s = build_cluster_state(2, 3).unwrap();
        s.apply_pauli(Pauli::Z, 4).unwrap();
        for spec in all_stabilizers(&s) {
            let v = stabilizer_expectation(&s, &spec);
            let expect = if spec.center == 4 { -1.0 } else { 1.0 };
            assert_abs_diff_eq!(v, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn adjacency_enforced() {
        let s = build_cluster_state(2, 3).unwrap();
        assert!(StabilizerSpec::new(&s, 0, vec![1, 3]).is_ok());
        assert_eq!(StabilizerSpec::new(&s, 0, vec![4]).unwrap_err(), ClusterError::NotAdjacent { center: 0, neighbor: 4 });
    }

    #[test]
    fn five_point_corner_is_stabilizer() {
        let s = build_cluster_state(2, 2).unwrap();
        for spec in all_stabilizers(&s) {
            let sites = five_point_sites(&spec).unwrap();
            let v = position_five_point(&s, sites, CLUSTER_PATTERN).unwrap() * 32.0;
            assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-12);
        }
        // a non-neighbour placement loses the stabilizer value
        let v = position_five_point(&s, [3, 1, 0, 1, 1], CLUSTER_PATTERN).unwrap() * 32.0;
        assert!(v.norm() < 1.0 - 1e-6);
    }

    #[test]
    fn forward_momenta_give_collective_moments() {
        // |+…+⟩ is an eigenstate of every S_x with eigenvalue 1/2
        let mut s = PureState::all_up(2, 2).unwrap();
        s.amplitudes = (0..16).map(|_| Complex64::new(0.25, 0.0)).collect();
        let v = five_point_momentum_correlation(&s, [Vector3::zeros(); 5], [Axis::X; 5]).unwrap();
        let n = 4.0f64;
        assert_abs_diff_eq!(v.re, (n / 2.0).powi(5) / n.powf(2.5), epsilon = 1e-12);
    }

    #[test]
    fn slot_linearity() {
        let s = build_cluster_state(2, 2).unwrap();
        let k1 = Vector3::new(0.3, 1.1, 0.0);
        let k2 = Vector3::new(-0.7, 0.4, 0.0);
        let ks = [Vector3::new(PI2, 0.0, 0.0), Vector3::zeros(), k1, Vector3::new(0.0, 1.0, 0.0), k2];
        let base: Vec<CollectiveOperator> =
            ks.iter().zip(CLUSTER_PATTERN).map(|(k, a)| CollectiveOperator::momentum(&s, a, k)).collect();
        let other = CollectiveOperator::momentum(&s, Axis::X, &k2);
        let mut summed = base.clone();
        summed[2].coefficients = base[2].coefficients.iter().zip(&other.coefficients).map(|(a, b)| a + b).collect();
        let mut swapped = base.clone();
        swapped[2] = other;
        let lhs = collective_correlator(&s, &summed).unwrap();
        let rhs = collective_correlator(&s, &base).unwrap() + collective_correlator(&s, &swapped).unwrap();
        assert_abs_diff_eq!((lhs - rhs).norm(), 0.0, epsilon = 1e-14);
    }

    const PI2: f64 = std::f64::consts::FRAC_PI_2;

    #[test]
    fn momentum_route_matches_position_route() {
        let s = build_cluster_state(2, 3).unwrap();
        let tuples = [[0, 1, 4, 5, 3], [1, 1, 2, 0, 4], [5, 4, 3, 2, 1]];
        let patterns = [CLUSTER_PATTERN, [Axis::X, Axis::Y, Axis::Z, Axis::Y, Axis::X]];
        for t in tuples {
            for p in patterns {
                let ops: Vec<(usize, Axis)> = t.into_iter().zip(p).collect();
                let direct = position_correlator(&s, &ops).unwrap();
                let routed = momentum_route_correlator(&s, &ops).unwrap();
                assert_abs_diff_eq!((direct - routed).norm(), 0.0, epsilon = 1e-10);
                let factorized = momentum_route_factorized(&s, &ops).unwrap();
                assert_abs_diff_eq!((direct - factorized).norm(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn report_flags_perturbation() {
        let s = build_cluster_state(2, 2).unwrap();
        let r = verify_cluster(&s, 1e-12).unwrap();
        assert!(r.pass);
        assert!(r.max_deviation < 1e-10);
        assert!(r.stabilizers.iter().all(|c| c.full_route && c.order == 5));
        let big = verify_cluster(&build_cluster_state(4, 4).unwrap(), 1e-12).unwrap();
        assert!(big.pass);
        let mut bad = s.clone();
        bad.apply_pauli(Pauli::Z, 0).unwrap();
        let r = verify_cluster(&bad, 1e-12).unwrap();
        assert!(!r.pass);
        assert_abs_diff_eq!(r.min_expectation, -1.0, epsilon = 1e-12);
    }
}
