//! Dense complex linear algebra helpers.
//!
//! Everything here works on `DMatrix<Complex64>`. Functions of Hermitian
//! matrices go through a full eigendecomposition; the dimensions handled by
//! this crate are small enough that accuracy wins over speed.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type Matrix = DMatrix<Complex64>;

/// Tolerance used for Hermiticity checks, relative to the largest entry.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> Matrix {
    Matrix::identity(dim, dim)
}

/// Real diagonal matrix.
pub fn diag(values: &[f64]) -> Matrix {
    let n = values.len();
    Matrix::from_fn(n, n, |i, j| if i == j { c(values[i], 0.0) } else { ZERO })
}

/// Matrix from real row-major entries.
pub fn real_matrix(rows: &[&[f64]]) -> Matrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    Matrix::from_fn(n, m, |i, j| c(rows[i][j], 0.0))
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a Matrix>) -> Matrix {
    factors.into_iter().fold(identity(1), |acc, f| kron(&acc, f))
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest entry magnitude of `A − A†`.
pub fn hermiticity_defect(m: &Matrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn is_hermitian(m: &Matrix) -> bool {
    m.is_square() && hermiticity_defect(m) <= HERMITIAN_TOL * (1.0 + max_abs(m))
}

/// `(A + A†)/2`.
pub fn hermitian_part(m: &Matrix) -> Matrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

pub fn trace(m: &Matrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `tr(A B)` without forming the product.
pub fn trace_product(a: &Matrix, b: &Matrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn commutator(a: &Matrix, b: &Matrix) -> Matrix {
    a * b - b * a
}

/// Largest singular value.
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().fold(0.0_f64, |acc, &s| acc.max(s))
}

/// Largest entry magnitude of `U†U − 1`.
pub fn unitarity_defect(u: &Matrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(u.adjoint() * u - identity(u.nrows())))
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues in ascending order.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: Matrix,
}

impl Eigh {
    /// Rebuild `Σ f(λ_k) |v_k⟩⟨v_k|`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, &lam) in self.values.iter().enumerate() {
            let w = c(f(lam), 0.0);
            for i in 0..n {
                scaled[(i, k)] *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// Hermitian eigendecomposition. The input is symmetrized first, so tiny
/// anti-Hermitian noise is ignored.
pub fn eigh(m: &Matrix) -> Eigh {
    let n = m.nrows();
    if n == 0 {
        return Eigh { values: vec![], vectors: Matrix::zeros(0, 0) };
    }
    let sym = hermitian_part(m);
    let decomp = nalgebra::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| decomp.eigenvalues[a].total_cmp(&decomp.eigenvalues[b]));
    let values = order.iter().map(|&k| decomp.eigenvalues[k]).collect();
    let vectors = Matrix::from_fn(n, n, |i, j| decomp.eigenvectors[(i, order[j])]);
    Eigh { values, vectors }
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn eigvalsh(m: &Matrix) -> Vec<f64> {
    let n = m.nrows();
    if n == 0 {
        return vec![];
    }
    let mut vals: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// `f(A)` for Hermitian `A`.
pub fn hermitian_fn(m: &Matrix, f: impl Fn(f64) -> f64) -> Matrix {
    eigh(m).map(f)
}

/// Pauli matrices.
pub mod pauli {
    use super::{c, Matrix, ONE, ZERO};

    pub fn x() -> Matrix {
        Matrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }

    pub fn y() -> Matrix {
        Matrix::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO])
    }

    pub fn z() -> Matrix {
        Matrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
    }

    pub fn id() -> Matrix {
        super::identity(2)
    }
}

/// Spin-1/2 angular momentum components `L_k = σ_k / 2` (ħ = 1).
pub fn spin_half() -> [Matrix; 3] {
    let half = c(0.5, 0.0);
    [pauli::x() * half, pauli::y() * half, pauli::z() * half]
}

/// Projector `|ψ⟩⟨ψ|` for a (not necessarily normalized) vector.
pub fn ket_bra(psi: &[Complex64]) -> Matrix {
    let n = psi.len();
    Matrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj())
}

/// Permutation matrix of the swap on `C^d ⊗ C^d`.
pub fn swap(d: usize) -> Matrix {
    let n = d * d;
    let mut m = Matrix::zeros(n, n);
    for a in 0..d {
        for b in 0..d {
            m[(b * d + a, a * d + b)] = ONE;
        }
    }
    m
}
