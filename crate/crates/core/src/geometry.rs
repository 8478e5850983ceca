//! Lattice description, laser/detector frames and the polarization–spin
//! coupling matrix.

use std::f64::consts::{PI, TAU};
use std::fmt;

use nalgebra::{Matrix2, Matrix3, Matrix3x2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("direction is not a unit vector (|v| = {norm:.3e})")]
    InvalidDirection { norm: f64 },
    #[error("lattice must have 1 to 3 axes, got {0}")]
    BadDimensionality(usize),
    #[error("lattice extent must be positive on every axis")]
    EmptyLattice,
    #[error("lattice constant must be positive and finite, got {0}")]
    BadSpacing(f64),
    #[error("occupancy must lie in [0, 1], got {0}")]
    BadOccupancy(f64),
    #[error("laser wavenumber must be positive and finite, got {0}")]
    BadWavenumber(f64),
    #[error(
        "coupling block is singular at theta = {theta:.6}, phi = {phi:.6} \
         (reciprocal condition number {rcond:.3e})"
    )]
    SingularGeometry { theta: f64, phi: f64, rcond: f64 },
}

/// Cartesian lab axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Axis> {
        Axis::ALL.get(i).copied()
    }

    pub fn from_char(c: char) -> Option<Axis> {
        match c.to_ascii_lowercase() {
            'x' => Some(Axis::X),
            'y' => Some(Axis::Y),
            'z' => Some(Axis::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }

    /// The two axes other than `self`, in ascending order.
    pub fn complement(self) -> [Axis; 2] {
        match self {
            Axis::X => [Axis::Y, Axis::Z],
            Axis::Y => [Axis::X, Axis::Z],
            Axis::Z => [Axis::X, Axis::Y],
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Levi-Civita symbol on lab axes.
pub fn levi_civita(i: Axis, j: Axis, k: Axis) -> f64 {
    let (i, j, k) = (i.index(), j.index(), k.index());
    if i == j || j == k || i == k {
        0.0
    } else if (i, j, k) == (0, 1, 2) || (i, j, k) == (1, 2, 0) || (i, j, k) == (2, 0, 1) {
        1.0
    } else {
        -1.0
    }
}

/// Hypercubic lattice of `extent` sites per axis with spacing `r0`.
///
/// Site coordinates are integer offsets centred on the origin: an axis with
/// `L` sites carries offsets `-floor(L/2) ..= L - 1 - floor(L/2)`, so that
/// `(n, m)` and `(-n, -m)` are both lattice sites wherever possible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    extent: Vec<usize>,
    r0: f64,
    occupancy: f64,
}

impl LatticeSpec {
    pub fn new(extent: &[usize], r0: f64) -> Result<Self, GeometryError> {
        Self::with_occupancy(extent, r0, 1.0)
    }

    pub fn with_occupancy(extent: &[usize], r0: f64, occupancy: f64) -> Result<Self, GeometryError> {
        if extent.is_empty() || extent.len() > 3 {
            return Err(GeometryError::BadDimensionality(extent.len()));
        }
        if extent.contains(&0) {
            return Err(GeometryError::EmptyLattice);
        }
        if !(r0.is_finite() && r0 > 0.0) {
            return Err(GeometryError::BadSpacing(r0));
        }
        if !(0.0..=1.0).contains(&occupancy) {
            return Err(GeometryError::BadOccupancy(occupancy));
        }
        Ok(Self { extent: extent.to_vec(), r0, occupancy })
    }

    pub fn chain(length: usize, r0: f64) -> Result<Self, GeometryError> {
        Self::new(&[length], r0)
    }

    pub fn square(side: usize, r0: f64) -> Result<Self, GeometryError> {
        Self::new(&[side, side], r0)
    }

    pub fn dims(&self) -> usize {
        self.extent.len()
    }

    pub fn extent(&self) -> &[usize] {
        &self.extent
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn occupancy(&self) -> f64 {
        self.occupancy
    }

    pub fn site_count(&self) -> usize {
        self.extent.iter().product()
    }

    /// Number of atoms, `occupancy × sites`.
    pub fn atom_count(&self) -> f64 {
        self.occupancy * self.site_count() as f64
    }

    /// Geometric-mean linear size in sites.
    pub fn linear_size(&self) -> f64 {
        (self.site_count() as f64).powf(1.0 / self.dims() as f64)
    }

    /// Smallest and largest integer offset along `axis`.
    pub fn offset_range(&self, axis: usize) -> (i64, i64) {
        let l = self.extent[axis] as i64;
        let lo = -(l / 2);
        (lo, lo + l - 1)
    }

    /// Largest |offset| along any axis.
    pub fn max_offset(&self) -> i64 {
        (0..self.dims())
            .map(|a| {
                let (lo, hi) = self.offset_range(a);
                lo.abs().max(hi.abs())
            })
            .max()
            .unwrap_or(0)
    }

    /// Integer site offsets in row-major order (last axis fastest), padded to
    /// three components with zeros.
    pub fn sites(&self) -> Vec<[i64; 3]> {
        let mut out = vec![[0i64; 3]];
        for axis in 0..self.dims() {
            let (lo, hi) = self.offset_range(axis);
            out = out
                .into_iter()
                .flat_map(|s| {
                    (lo..=hi).map(move |n| {
                        let mut t = s;
                        t[axis] = n;
                        t
                    })
                })
                .collect();
        }
        out
    }

    pub fn position(&self, site: [i64; 3]) -> Vector3<f64> {
        Vector3::new(site[0] as f64, site[1] as f64, site[2] as f64) * self.r0
    }

    pub fn contains(&self, site: [i64; 3]) -> bool {
        (0..3).all(|a| {
            if a < self.dims() {
                let (lo, hi) = self.offset_range(a);
                (lo..=hi).contains(&site[a])
            } else {
                site[a] == 0
            }
        })
    }

    /// Brillouin-zone grid `q_n = 2πn/(L r0)` for the periodic lattice.
    pub fn brillouin_grid(&self) -> Vec<Vector3<f64>> {
        let mut out = vec![Vector3::zeros()];
        for axis in 0..self.dims() {
            let l = self.extent[axis];
            let step = TAU / (l as f64 * self.r0);
            out = out
                .into_iter()
                .flat_map(|q| {
                    (0..l).map(move |n| {
                        let mut p = q;
                        p[axis] = step * n as f64;
                        p
                    })
                })
                .collect();
        }
        out
    }
}

/// Which index of the transverse commutator the polarization sum contracts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Contraction {
    /// `M_{αα'} = ε^{σ α α'} Σ_β P_{α'β}`.
    #[default]
    RowSum,
    /// `M_{αα'} = Σ_β ε^{σ α β} P_{βα'}`.
    Projected,
}

/// Unit wavevector direction for polar angle `theta` and azimuth `phi`.
pub fn unit_direction(theta: f64, phi: f64) -> Vector3<f64> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vector3::new(st * cp, st * sp, ct)
}

/// Matrix taking mode-frame amplitudes `(a_1, a_2)` to lab amplitudes
/// `(a_x, a_y, a_z)`.
pub fn lab_polarization_map(theta: f64, phi: f64) -> Matrix3x2<f64> {
    let theta = theta.rem_euclid(TAU);
    let phi = phi.rem_euclid(TAU);
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Matrix3x2::new(ct * cp, sp, ct * sp, -cp, -st, 0.0)
}

pub fn transverse_projector(khat: &Vector3<f64>) -> Result<Matrix3<f64>, GeometryError> {
    let norm = khat.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(GeometryError::InvalidDirection { norm });
    }
    Ok(Matrix3::identity() - khat * khat.transpose())
}

/// Real 3×3 polarization–spin coupling at one detector direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingMatrix {
    pub entries: Matrix3<f64>,
    pub sigma_l: Axis,
    pub theta: f64,
    pub phi: f64,
}

impl CouplingMatrix {
    pub fn get(&self, row: Axis, col: Axis) -> f64 {
        self.entries[(row.index(), col.index())]
    }

    /// Block with row and column `sigma_l` removed.
    pub fn restricted(&self) -> Matrix2<f64> {
        let [a, b] = self.sigma_l.complement();
        Matrix2::new(
            self.get(a, a),
            self.get(a, b),
            self.get(b, a),
            self.get(b, b),
        )
    }

    /// Columns `x, y` for every photon polarization row: the part that acts on
    /// the transverse spin components.
    pub fn transverse_columns(&self) -> Matrix3x2<f64> {
        self.entries.fixed_view::<3, 2>(0, 0).into_owned()
    }
}

pub fn coupling_matrix(sigma_l: Axis, theta: f64, phi: f64) -> CouplingMatrix {
    coupling_matrix_with(Contraction::RowSum, sigma_l, theta, phi)
}

pub fn coupling_matrix_with(
    contraction: Contraction,
    sigma_l: Axis,
    theta: f64,
    phi: f64,
) -> CouplingMatrix {
    let l = lab_polarization_map(theta, phi);
    // completeness of the two transverse modes
    let p = l * l.transpose();
    let mut m = Matrix3::zeros();
    for a in Axis::ALL {
        for ap in Axis::ALL {
            m[(a.index(), ap.index())] = match contraction {
                Contraction::RowSum => {
                    levi_civita(sigma_l, a, ap) * p.row(ap.index()).sum()
                }
                Contraction::Projected => Axis::ALL
                    .iter()
                    .map(|&b| levi_civita(sigma_l, a, b) * p[(b.index(), ap.index())])
                    .sum(),
            };
        }
    }
    CouplingMatrix { entries: m, sigma_l, theta, phi }
}

/// Laser and detector configuration for one scattering measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterGeometry {
    pub k_l: f64,
    laser_dir: Vector3<f64>,
    pub sigma_l: Axis,
    pub theta: f64,
    pub phi: f64,
}

impl ScatterGeometry {
    pub fn new(
        k_l: f64,
        laser_dir: Vector3<f64>,
        sigma_l: Axis,
        theta: f64,
        phi: f64,
    ) -> Result<Self, GeometryError> {
        if !(k_l.is_finite() && k_l > 0.0) {
            return Err(GeometryError::BadWavenumber(k_l));
        }
        let norm = laser_dir.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(GeometryError::InvalidDirection { norm });
        }
        Ok(Self { k_l, laser_dir, sigma_l, theta, phi })
    }

    /// Laser along `+z`.
    pub fn along_z(k_l: f64, sigma_l: Axis, theta: f64, phi: f64) -> Result<Self, GeometryError> {
        Self::new(k_l, Vector3::z(), sigma_l, theta, phi)
    }

    pub fn laser_dir(&self) -> Vector3<f64> {
        self.laser_dir
    }

    pub fn with_angles(&self, theta: f64, phi: f64) -> Self {
        Self { theta, phi, ..*self }
    }

    /// Detector wavevector; its magnitude is `k_l` (elastic scattering).
    pub fn detector_wavevector(&self) -> Vector3<f64> {
        unit_direction(self.theta, self.phi) * self.k_l
    }

    pub fn coupling(&self, contraction: Contraction) -> CouplingMatrix {
        coupling_matrix_with(contraction, self.sigma_l, self.theta, self.phi)
    }
}

pub fn momentum_transfer(geom: &ScatterGeometry) -> Vector3<f64> {
    geom.detector_wavevector() - geom.laser_dir * geom.k_l
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coverage {
    pub pass: bool,
    pub margin: f64,
    /// Smallest `k_L r0` that passes for this dimensionality.
    pub required_klr0: f64,
}

/// `r0 k_L` needed for the square `[-1,1]^d` of scaled momenta to fit inside
/// the reachable in-plane disc: `√d π`.
pub fn required_klr0(dims: usize) -> f64 {
    (dims as f64).sqrt() * PI
}

pub fn coverage_check(lattice: &LatticeSpec, k_l: f64) -> Coverage {
    let required = required_klr0(lattice.dims());
    let ratio = lattice.r0() * k_l / required;
    // a few ulps of slack so that an exactly-at-threshold product passes
    Coverage { pass: ratio >= 1.0 - 4.0 * f64::EPSILON, margin: ratio - 1.0, required_klr0: required }
}

/// Reciprocal condition number below which the restricted block is rejected.
pub const SINGULAR_RCOND: f64 = 1e-8;

/// Singular values of a real 2×2 matrix, largest first.
pub(crate) fn singular_values_2x2(b: &Matrix2<f64>) -> (f64, f64) {
    let frob2 = b.norm_squared();
    let det = b.determinant().abs();
    let hi = ((frob2 + (frob2 * frob2 - 4.0 * det * det).max(0.0).sqrt()) / 2.0).sqrt();
    let lo = if hi > 0.0 { det / hi } else { 0.0 };
    (hi, lo)
}

pub fn invert_coupling(m: &CouplingMatrix) -> Result<Matrix2<f64>, GeometryError> {
    invert_coupling_with(m, SINGULAR_RCOND)
}

pub fn invert_coupling_with(m: &CouplingMatrix, min_rcond: f64) -> Result<Matrix2<f64>, GeometryError> {
    let block = m.restricted();
    let (hi, lo) = singular_values_2x2(&block);
    let rcond = if hi > 0.0 { lo / hi } else { 0.0 };
    if !(rcond >= min_rcond) {
        return Err(GeometryError::SingularGeometry { theta: m.theta, phi: m.phi, rcond });
    }
    let det = block.determinant();
    Ok(Matrix2::new(block[(1, 1)], -block[(0, 1)], -block[(1, 0)], block[(0, 0)]) / det)
}
