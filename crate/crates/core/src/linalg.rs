//! Small dense complex matrices and the helpers shared by every module.

use nalgebra::{DMatrix, Matrix2, Matrix4, SMatrix, SVector, Vector4};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;
pub type Mat16 = SMatrix<C64, 16, 16>;
pub type Vec4 = Vector4<C64>;
pub type Vec16 = SVector<C64, 16>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> Mat2 {
        match self {
            Pauli::I => Mat2::identity(),
            Pauli::X => Mat2::new(ZERO, ONE, ONE, ZERO),
            Pauli::Y => Mat2::new(ZERO, -I, I, ZERO),
            Pauli::Z => Mat2::new(ONE, ZERO, ZERO, -ONE),
        }
    }
}

pub fn hadamard() -> Mat2 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Mat2::new(r(h), r(h), r(h), r(-h))
}

/// Kronecker product `a ⊗ b` for square matrices; `AB` must equal `A * B`.
pub fn kron<const A: usize, const B: usize, const AB: usize>(
    a: &SMatrix<C64, A, A>,
    b: &SMatrix<C64, B, B>,
) -> SMatrix<C64, AB, AB> {
    assert_eq!(A * B, AB, "kron output dimension mismatch");
    SMatrix::from_fn(|row, col| a[(row / B, col / B)] * b[(row % B, col % B)])
}

pub fn kron_vec<const A: usize, const B: usize, const AB: usize>(
    a: &SVector<C64, A>,
    b: &SVector<C64, B>,
) -> SVector<C64, AB> {
    assert_eq!(A * B, AB, "kron output dimension mismatch");
    SVector::from_fn(|row, _| a[row / B] * b[row % B])
}

pub fn trace<const N: usize>(m: &SMatrix<C64, N, N>) -> C64 {
    (0..N).map(|k| m[(k, k)]).sum()
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_error<const N: usize>(m: &SMatrix<C64, N, N>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..N {
        for j in i..N {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part<const N: usize>(m: &SMatrix<C64, N, N>) -> SMatrix<C64, N, N> {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues of a Hermitian matrix, ascending. Only the Hermitian part is used.
pub fn hermitian_eigenvalues<const N: usize>(m: &SMatrix<C64, N, N>) -> Vec<f64> {
    let h = hermitian_part(m);
    let dynamic = DMatrix::from_iterator(N, N, h.iter().copied());
    let mut eig: Vec<f64> = dynamic.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| a.total_cmp(b));
    eig
}

/// `½ Σ |λ|` over the eigenvalues of `a − b`.
pub fn trace_distance<const N: usize>(a: &SMatrix<C64, N, N>, b: &SMatrix<C64, N, N>) -> f64 {
    0.5 * hermitian_eigenvalues(&(a - b))
        .iter()
        .map(|x| x.abs())
        .sum::<f64>()
}

/// `‖U·U† − 1‖_max`
pub fn unitarity_error<const N: usize>(u: &SMatrix<C64, N, N>) -> f64 {
    max_modulus(&(u * u.adjoint() - SMatrix::<C64, N, N>::identity()))
}

pub fn max_abs_diff<const R: usize, const C: usize>(
    a: &SMatrix<C64, R, C>,
    b: &SMatrix<C64, R, C>,
) -> f64 {
    max_modulus(&(a - b))
}

/// Largest entry modulus.
pub fn max_modulus<const R: usize, const C: usize>(m: &SMatrix<C64, R, C>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Entrywise distance between `a` and `b` after removing the best global
/// phase, i.e. `min_α ‖a − e^{iα} b‖_max` with α taken from `tr(b† a)`.
pub fn phase_invariant_distance<const N: usize>(
    a: &SMatrix<C64, N, N>,
    b: &SMatrix<C64, N, N>,
) -> f64 {
    let overlap = trace(&(b.adjoint() * a));
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        ONE
    };
    max_modulus(&(a - b * phase))
}

pub fn is_finite<const R: usize, const C: usize>(m: &SMatrix<C64, R, C>) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Projector onto `|v⟩` (not normalized by the caller's norm).
pub fn outer<const N: usize>(v: &SVector<C64, N>) -> SMatrix<C64, N, N> {
    v * v.adjoint()
}

/// Eigenprojectors `(I ± n·σ)/2` of the spin observable along a unit vector.
pub fn spin_projectors(n: [f64; 3]) -> [Mat2; 2] {
    let ns = Pauli::X.matrix().scale(n[0])
        + Pauli::Y.matrix().scale(n[1])
        + Pauli::Z.matrix().scale(n[2]);
    let id = Mat2::identity();
    [(id + ns).scale(0.5), (id - ns).scale(0.5)]
}

/// Sparse, row-major JSON form of a square complex matrix:
/// `{"dim": n, "entries": [[row, col, re, im], ...]}` listing nonzeros only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<(usize, usize, f64, f64)>,
}

impl MatrixJson {
    pub fn from_matrix<const N: usize>(m: &SMatrix<C64, N, N>) -> Self {
        let mut entries = Vec::new();
        for row in 0..N {
            for col in 0..N {
                let z = m[(row, col)];
                if z.re != 0.0 || z.im != 0.0 {
                    entries.push((row, col, z.re, z.im));
                }
            }
        }
        MatrixJson { dim: N, entries }
    }

    pub fn to_matrix<const N: usize>(&self) -> Result<SMatrix<C64, N, N>> {
        if self.dim != N {
            return Err(Error::InvalidArgument(format!(
                "matrix has dimension {}, expected {N}",
                self.dim
            )));
        }
        let mut m = SMatrix::<C64, N, N>::zeros();
        for &(row, col, re, im) in &self.entries {
            if row >= N || col >= N {
                return Err(Error::InvalidArgument(format!(
                    "entry ({row}, {col}) out of bounds for dimension {N}"
                )));
            }
            m[(row, col)] = c(re, im);
        }
        Ok(m)
    }
}
