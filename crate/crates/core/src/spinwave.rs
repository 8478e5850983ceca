//! Holstein–Primakoff spin waves of the transverse-field ferromagnet
//! `H = B Σ S_z + J Σ_<ij> S_x^i S_x^j` in its paramagnetic phase.
//!
//! Spin fluctuations around the field-aligned state are described by
//! canonical quadratures with `[J_x, J_y] = i` per site. Relative to the
//! spin-1/2 operators this is `J_x = √2 S_x`, `J_y = -√2 S_y` (the minus sign
//! because the ordered spins point along `-z` for `B > 0`). In momentum
//! space the quadratic Hamiltonian is, up to an overall factor,
//! `Σ_q (2B + J_q) J_x^q J_x^{-q} + 2B J_y^q J_y^{-q}`.

use nalgebra::{DMatrix, Matrix2, SymmetricEigen, Vector3};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{Axis, LatticeSpec};
use crate::pauli;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinWaveError {
    #[error("transverse field B must be positive and finite, got {0}")]
    NonPositiveField(f64),
    #[error("coupling J must be finite, got {0}")]
    BadCoupling(f64),
    #[error(
        "outside the paramagnetic phase: squeeze factor {squeeze:.4} at q = ({:.4}, {:.4}, {:.4})",
        q[0], q[1], q[2]
    )]
    OutsideParamagneticPhase { q: [f64; 3], squeeze: f64 },
    #[error("exact oracle supports chains of 2..=14 sites, got {0}")]
    ChainLength(usize),
    #[error("exact diagonalization did not converge (residual {0:.3e})")]
    NoConvergence(f64),
}

/// Coefficient of `B` in the squeeze factor `s(q) = 1 + J_q / (FIELD_SCALE·B)`.
///
/// Fixed by the ratio of the two diagonal coefficients of the quadratic
/// form, and confirmed against the exact chain oracle (see tests).
pub const FIELD_SCALE: f64 = 2.0;

/// Default safety margin on the squeeze factor for `validity_check`.
pub const DEFAULT_SQUEEZE_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelParams {
    pub b: f64,
    pub j: f64,
    pub lattice: LatticeSpec,
}

impl ModelParams {
    pub fn new(b: f64, j: f64, lattice: LatticeSpec) -> Result<Self, SpinWaveError> {
        if !(b.is_finite() && b > 0.0) {
            return Err(SpinWaveError::NonPositiveField(b));
        }
        if !j.is_finite() {
            return Err(SpinWaveError::BadCoupling(j));
        }
        Ok(Self { b, j, lattice })
    }

    pub fn j_over_b(&self) -> f64 {
        self.j / self.b
    }

    /// `s(q) = 1 + J_q / (2B)`.
    pub fn squeeze(&self, q: &Vector3<f64>) -> f64 {
        squeeze_with_scale(q, self, FIELD_SCALE)
    }
}

fn squeeze_with_scale(q: &Vector3<f64>, params: &ModelParams, scale: f64) -> f64 {
    1.0 + fourier_coupling(q, params) / (scale * params.b)
}

/// `J_q = 2J Σ_a cos(q_a r0)` over the axes the lattice has.
pub fn fourier_coupling(q: &Vector3<f64>, params: &ModelParams) -> f64 {
    let r0 = params.lattice.r0();
    let s: f64 = (0..params.lattice.dims()).map(|a| (q[a] * r0).cos()).sum();
    2.0 * params.j * s
}

/// Equal-time correlations `C_{αβ} = ⟨J_α^q J_β^{-q}⟩`, `α, β ∈ {x, y}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumCorrelation {
    pub q: Vector3<f64>,
    pub c: Matrix2<Complex64>,
}

impl MomentumCorrelation {
    pub fn get(&self, a: Axis, b: Axis) -> Complex64 {
        assert!(a != Axis::Z && b != Axis::Z, "z is frozen in the spin-wave picture");
        self.c[(a.index(), b.index())]
    }

    /// `C_xx C_yy - |C_xy|²`; zero for a pure Gaussian state.
    pub fn uncertainty_defect(&self) -> f64 {
        (self.c[(0, 0)] * self.c[(1, 1)]).re - self.c[(0, 1)].norm_sqr()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (self.c - self.c.adjoint()).iter().all(|z| z.norm() <= tol)
    }
}

pub fn ground_state_correlations(
    q: &Vector3<f64>,
    params: &ModelParams,
) -> Result<MomentumCorrelation, SpinWaveError> {
    hp_correlations(q, params, FIELD_SCALE)
}

pub(crate) fn hp_correlations(
    q: &Vector3<f64>,
    params: &ModelParams,
    scale: f64,
) -> Result<MomentumCorrelation, SpinWaveError> {
    // quadratic form h = diag(h_xx, h_yy) ∝ diag(2B + J_q, 2B); for
    // H = (h_xx x² + h_yy p²)/2 the ground state has
    // ⟨x²⟩ = ½√(h_yy/h_xx), ⟨p²⟩ = ½√(h_xx/h_yy), ⟨xp⟩ = i/2
    let s = squeeze_with_scale(q, params, scale);
    if !(s > 0.0) {
        return Err(SpinWaveError::OutsideParamagneticPhase { q: [q[0], q[1], q[2]], squeeze: s });
    }
    let root = s.sqrt();
    let half_i = Complex64::new(0.0, 0.5);
    Ok(MomentumCorrelation {
        q: *q,
        c: Matrix2::new(Complex64::from(0.5 / root), half_i, -half_i, Complex64::from(0.5 * root)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Validity {
    pub valid: bool,
    pub min_squeeze: f64,
}

pub fn validity_check(params: &ModelParams) -> Validity {
    validity_check_with(params, DEFAULT_SQUEEZE_MARGIN)
}

pub fn validity_check_with(params: &ModelParams, margin: f64) -> Validity {
    let min_squeeze = params
        .lattice
        .brillouin_grid()
        .iter()
        .map(|q| params.squeeze(q))
        .fold(f64::INFINITY, f64::min);
    Validity { valid: min_squeeze > margin, min_squeeze }
}

pub const MAX_ORACLE_SITES: usize = 14;

/// Exact ground-state momentum correlations of a periodic spin-1/2 chain.
///
/// Diagonalizes `B Σ S_z + J Σ S_x^j S_x^{j+1}` (periodic, `S = σ/2`) by
/// Lanczos, Fourier transforms the real-space correlators, and rescales to
/// the canonical-quadrature normalization (factor 2 per two-point function,
/// `J_y = -√2 S_y`). Results are on the chain's grid `q_n = 2πn/(L r0)`.
pub fn exact_ising_oracle(
    chain_length: usize,
    params: &ModelParams,
) -> Result<Vec<MomentumCorrelation>, SpinWaveError> {
    if !(2..=MAX_ORACLE_SITES).contains(&chain_length) {
        return Err(SpinWaveError::ChainLength(chain_length));
    }
    let n = chain_length;
    let (_, ground) = chain_ground_state(n, params.b, params.j)?;
    let psi: Vec<Complex64> = ground.iter().map(|&v| Complex64::from(v)).collect();

    // S_β^l |ψ⟩ for β ∈ {x, y}
    let applied: Vec<[Vec<Complex64>; 2]> = (0..n)
        .map(|l| [pauli::apply_spin(Axis::X, l, &psi), pauli::apply_spin(Axis::Y, l, &psi)])
        .collect();
    let scale = [2f64.sqrt(), -(2f64.sqrt())];
    let mut real_space = vec![[[Complex64::new(0.0, 0.0); 2]; 2]; n * n];
    for j in 0..n {
        for l in 0..n {
            for a in 0..2 {
                for b in 0..2 {
                    real_space[j * n + l][a][b] =
                        pauli::inner(&applied[j][a], &applied[l][b]) * scale[a] * scale[b];
                }
            }
        }
    }

    let r0 = params.lattice.r0();
    let out = (0..n)
        .map(|m| {
            let qx = std::f64::consts::TAU * m as f64 / (n as f64 * r0);
            let mut c = Matrix2::<Complex64>::zeros();
            for j in 0..n {
                for l in 0..n {
                    let phase = Complex64::from_polar(1.0, qx * r0 * (j as f64 - l as f64));
                    for a in 0..2 {
                        for b in 0..2 {
                            c[(a, b)] += phase * real_space[j * n + l][a][b];
                        }
                    }
                }
            }
            MomentumCorrelation { q: Vector3::new(qx, 0.0, 0.0), c: c.unscale(n as f64) }
        })
        .collect();
    Ok(out)
}

/// `H v` for the periodic transverse-field Ising chain in the `σ_z` basis.
fn chain_matvec(n: usize, b: f64, j: f64, v: &[f64], out: &mut [f64]) {
    let bonds: Vec<(usize, usize)> = if n == 2 {
        vec![(0, 1)]
    } else {
        (0..n).map(|s| (s, (s + 1) % n)).collect()
    };
    for (s, o) in out.iter_mut().enumerate() {
        let sz = 0.5 * (n as f64 - 2.0 * s.count_ones() as f64);
        let mut acc = b * sz * v[s];
        for &(p, q) in &bonds {
            acc += 0.25 * j * v[s ^ (1 << p) ^ (1 << q)];
        }
        *o = acc;
    }
}

/// Ground energy and normalized ground vector by restarted Lanczos with full
/// reorthogonalization.
pub(crate) fn chain_ground_state(n: usize, b: f64, j: f64) -> Result<(f64, Vec<f64>), SpinWaveError> {
    let dim = 1usize << n;
    let krylov = dim.min(120);
    let matvec = |v: &[f64], out: &mut [f64]| chain_matvec(n, b, j, v, out);

    // deterministic start vector with overlap on every basis state
    let mut start: Vec<f64> = (0..dim).map(|s| 1.0 + 0.1 * ((s * 7919 % 101) as f64 / 101.0)).collect();
    let mut residual = f64::INFINITY;
    for _restart in 0..20 {
        normalize(&mut start);
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut w = vec![0.0; dim];
        for k in 0..krylov {
            matvec(&basis[k], &mut w);
            let a = dot(&w, &basis[k]);
            alpha.push(a);
            for v in &basis {
                let c = dot(&w, v);
                axpy(-c, v, &mut w);
            }
            // second pass keeps the basis orthogonal to machine precision
            for v in &basis {
                let c = dot(&w, v);
                axpy(-c, v, &mut w);
            }
            let bn = dot(&w, &w).sqrt();
            if k + 1 == krylov || bn < 1e-13 {
                break;
            }
            beta.push(bn);
            basis.push(w.iter().map(|x| x / bn).collect());
        }
        let m = alpha.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (idx, &e0) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty Krylov space");
        let coeffs = eig.eigenvectors.column(idx);
        let mut ritz = vec![0.0; dim];
        for (c, v) in coeffs.iter().zip(&basis) {
            axpy(*c, v, &mut ritz);
        }
        normalize(&mut ritz);
        matvec(&ritz, &mut w);
        axpy(-e0, &ritz, &mut w);
        residual = dot(&w, &w).sqrt();
        start = ritz;
        if residual < 1e-11 {
            return Ok((e0, start));
        }
    }
    Err(SpinWaveError::NoConvergence(residual))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(c: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += c * x);
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

/// Largest relative deviation of `C_yy` between the spin-wave ground state
/// and the exact chain oracle over the chain's momentum grid.
pub fn max_relative_deviation_yy(chain_length: usize, params: &ModelParams) -> Result<f64, SpinWaveError> {
    let exact = exact_ising_oracle(chain_length, params)?;
    let mut worst = 0.0f64;
    for e in &exact {
        let hp = ground_state_correlations(&e.q, params)?;
        let rel = ((hp.c[(1, 1)] - e.c[(1, 1)]).norm()) / e.c[(1, 1)].norm();
        worst = worst.max(rel);
    }
    Ok(worst)
}
