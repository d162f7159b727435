//! Observables and charge sets.

use crate::error::{Error, Result};
use crate::linalg::{self, c, Eigh, Matrix};

/// Kronecker product of two objects of the same kind.
///
/// Implemented for [`HermitianOperator`] and [`crate::DensityMatrix`], so a
/// state can never be tensored with an observable by accident.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Self;
}

/// `a ⊗ b`.
pub fn tensor<T: Tensor>(a: &T, b: &T) -> T {
    a.tensor(b)
}

/// A finite-dimensional Hermitian observable (Hamiltonian or conserved charge).
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: Matrix,
}

impl HermitianOperator {
    pub fn new(matrix: Matrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::NotSquare { rows: matrix.nrows(), cols: matrix.ncols() });
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("operator entries".into()));
        }
        if !linalg::is_hermitian(&matrix) {
            return Err(Error::NotHermitian(linalg::hermiticity_defect(&matrix)));
        }
        Ok(Self { matrix })
    }

    /// Symmetrizes instead of checking. Only for matrices Hermitian by construction.
    pub(crate) fn from_hermitian_unchecked(matrix: Matrix) -> Self {
        Self { matrix: linalg::hermitian_part(&matrix) }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self { matrix: linalg::diag(values) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: linalg::identity(dim) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    /// Eigenvalues in ascending order.
    pub fn spectrum(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.matrix)
    }

    pub fn eigh(&self) -> Eigh {
        linalg::eigh(&self.matrix)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { matrix: &self.matrix * c(factor, 0.0) }
    }

    /// `U C U†`.
    pub fn conjugated(&self, u: &Matrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: u.nrows() });
        }
        Ok(Self::from_hermitian_unchecked(u * &self.matrix * u.adjoint()))
    }

    /// `1 ⊗ … ⊗ C ⊗ … ⊗ 1` with `C` at `position` among factors of the given dims.
    pub fn embed(&self, position: usize, dims: &[usize]) -> Result<Self> {
        if position >= dims.len() {
            return Err(Error::InvalidParameter(format!(
                "position {position} out of range for {} factors",
                dims.len()
            )));
        }
        if dims[position] != self.dim() {
            return Err(Error::DimensionMismatch { expected: dims[position], got: self.dim() });
        }
        let left = linalg::identity(dims[..position].iter().product());
        let right = linalg::identity(dims[position + 1..].iter().product());
        Ok(Self { matrix: linalg::kron(&linalg::kron(&left, &self.matrix), &right) })
    }

    /// `Σ_k 1⊗…⊗C⊗…⊗1` over `n` copies.
    pub fn n_copy_total(&self, n: usize) -> Result<Self> {
        let dims = vec![self.dim(); n];
        let total_dim = self.dim().pow(n as u32);
        let mut acc = Matrix::zeros(total_dim, total_dim);
        for k in 0..n {
            acc += self.embed(k, &dims)?.matrix;
        }
        Ok(Self { matrix: acc })
    }

    /// `Σ_i w_i C_i`.
    pub fn linear_combination(weights: &[f64], ops: &[HermitianOperator]) -> Result<Self> {
        if weights.len() != ops.len() {
            return Err(Error::DimensionMismatch { expected: ops.len(), got: weights.len() });
        }
        let dim = ops.first().map(|o| o.dim()).ok_or_else(|| Error::InvalidParameter("empty operator list".into()))?;
        let mut acc = Matrix::zeros(dim, dim);
        for (w, op) in weights.iter().zip(ops) {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: op.dim() });
            }
            if !w.is_finite() {
                return Err(Error::NonFinite(format!("coefficient {w}")));
            }
            acc += &op.matrix * c(*w, 0.0);
        }
        Ok(Self { matrix: acc })
    }
}

impl AsRef<Matrix> for HermitianOperator {
    fn as_ref(&self) -> &Matrix {
        &self.matrix
    }
}

impl Tensor for HermitianOperator {
    fn tensor(&self, other: &Self) -> Self {
        Self { matrix: linalg::kron(&self.matrix, &other.matrix) }
    }
}

/// Ordered charges `C_0..C_n` with their multipliers `μ_0..μ_n`.
///
/// Index 0 is the Hamiltonian by convention and `μ_0` the inverse temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeSet {
    charges: Vec<HermitianOperator>,
    multipliers: Vec<f64>,
}

impl ChargeSet {
    pub fn new(charges: Vec<HermitianOperator>, multipliers: Vec<f64>) -> Result<Self> {
        let dim = charges
            .first()
            .map(HermitianOperator::dim)
            .ok_or_else(|| Error::InvalidParameter("a charge set needs at least one charge".into()))?;
        if let Some(bad) = charges.iter().find(|q| q.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: bad.dim() });
        }
        if multipliers.len() != charges.len() {
            return Err(Error::DimensionMismatch { expected: charges.len(), got: multipliers.len() });
        }
        if let Some(m) = multipliers.iter().find(|m| !m.is_finite()) {
            return Err(Error::NonFinite(format!("multiplier {m}")));
        }
        Ok(Self { charges, multipliers })
    }

    /// Plain Gibbs ensemble: a single Hamiltonian at inverse temperature `beta`.
    pub fn gibbs(hamiltonian: HermitianOperator, beta: f64) -> Result<Self> {
        Self::new(vec![hamiltonian], vec![beta])
    }

    pub fn dim(&self) -> usize {
        self.charges[0].dim()
    }

    pub fn len(&self) -> usize {
        self.charges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charges.is_empty()
    }

    pub fn charges(&self) -> &[HermitianOperator] {
        &self.charges
    }

    pub fn multipliers(&self) -> &[f64] {
        &self.multipliers
    }

    pub fn with_multipliers(&self, multipliers: Vec<f64>) -> Result<Self> {
        Self::new(self.charges.clone(), multipliers)
    }

    /// The combined charge `C(μ) = Σ_i μ_i C_i`.
    pub fn combined(&self) -> HermitianOperator {
        HermitianOperator::linear_combination(&self.multipliers, &self.charges).expect("validated at construction")
    }
}
