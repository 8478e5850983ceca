//! Dense state-vector Pauli algebra on at most 16 spin-1/2 sites.
//!
//! Site `i` is bit `i` of the basis index (little-endian). Bit value 0 is the
//! `σ_z = +1` state.

use num_complex::Complex64;

use crate::geometry::Axis;

pub const MAX_SITES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl From<Axis> for Pauli {
    fn from(a: Axis) -> Self {
        match a {
            Axis::X => Pauli::X,
            Axis::Y => Pauli::Y,
            Axis::Z => Pauli::Z,
        }
    }
}

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `σ_z` eigenvalue of `site` in basis state `index`.
#[inline]
pub fn z_sign(index: usize, site: usize) -> f64 {
    if index >> site & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `out = σ_p^site · psi`.
pub fn apply_pauli_into(p: Pauli, site: usize, psi: &[Complex64], out: &mut [Complex64]) {
    let mask = 1usize << site;
    match p {
        Pauli::I => out.copy_from_slice(psi),
        Pauli::X => {
            for (s, o) in out.iter_mut().enumerate() {
                *o = psi[s ^ mask];
            }
        }
        Pauli::Y => {
            for (s, o) in out.iter_mut().enumerate() {
                let phase = if s & mask != 0 { I } else { -I };
                *o = phase * psi[s ^ mask];
            }
        }
        Pauli::Z => {
            for (s, o) in out.iter_mut().enumerate() {
                *o = psi[s] * z_sign(s, site);
            }
        }
    }
}

pub fn apply_pauli(p: Pauli, site: usize, psi: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
    apply_pauli_into(p, site, psi, &mut out);
    out
}

/// Spin-1/2 operator `S_a = σ_a / 2`.
pub fn apply_spin(axis: Axis, site: usize, psi: &[Complex64]) -> Vec<Complex64> {
    let mut out = apply_pauli(axis.into(), site, psi);
    out.iter_mut().for_each(|v| *v *= 0.5);
    out
}

/// `⟨a|b⟩`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(psi: &[Complex64]) -> f64 {
    psi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Expectation of a Pauli string given as `(site, operator)` factors, applied
/// right to left.
pub fn pauli_string_expectation(psi: &[Complex64], factors: &[(usize, Pauli)]) -> Complex64 {
    let mut v = psi.to_vec();
    let mut tmp = vec![Complex64::new(0.0, 0.0); psi.len()];
    for &(site, p) in factors.iter().rev() {
        apply_pauli_into(p, site, &v, &mut tmp);
        std::mem::swap(&mut v, &mut tmp);
    }
    inner(psi, &v)
}
