//! Density matrices and the state-level operations built on them.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, Matrix, ZERO};
use crate::operator::{ChargeSet, HermitianOperator, Tensor};

pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues down to `-PSD_TOL` are accepted as numerical zeros.
pub const PSD_TOL: f64 = 1e-9;

/// A quantum state: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: Matrix,
}

impl DensityMatrix {
    pub fn new(matrix: Matrix) -> Result<Self> {
        let op = HermitianOperator::new(matrix)?;
        let matrix = op.into_matrix();
        let tr = linalg::trace(&matrix).re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(tr));
        }
        let min = linalg::eigvalsh(&matrix)[0];
        if min < -PSD_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(Self { matrix })
    }

    /// Symmetrizes without validation. Used for outputs of operations that
    /// preserve states exactly (conjugation, partial trace, Gibbs forms).
    pub(crate) fn from_matrix_unchecked(matrix: Matrix) -> Self {
        Self { matrix: linalg::hermitian_part(&matrix) }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: linalg::identity(dim) * c(1.0 / dim as f64, 0.0) }
    }

    /// Diagonal state with the given populations.
    pub fn from_populations(populations: &[f64]) -> Result<Self> {
        Self::new(linalg::diag(populations))
    }

    /// `|ψ⟩⟨ψ|` for a normalized copy of `psi`.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParameter("state vector has zero or non-finite norm".into()));
        }
        let scaled: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self { matrix: linalg::ket_bra(&scaled) })
    }

    /// Qubit state `(1 + r·σ)/2`; requires `|r| ≤ 1`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let [x, y, z] = r;
        Self::new(bloch_operator(1.0, [x, y, z]))
    }

    /// Bloch vector of a qubit state.
    pub fn bloch_vector(&self) -> Result<[f64; 3]> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: self.dim() });
        }
        let m = &self.matrix;
        Ok([2.0 * m[(0, 1)].re, -2.0 * m[(0, 1)].im, (m[(0, 0)] - m[(1, 1)]).re])
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
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.matrix)
    }

    /// `U ρ U†`. Fails when `U` is not unitary within 1e-10.
    pub fn evolve(&self, u: &Matrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: u.nrows() });
        }
        let defect = linalg::unitarity_defect(u);
        if defect > 1e-10 {
            return Err(Error::NonUnitary(defect));
        }
        Ok(Self::from_matrix_unchecked(u * &self.matrix * u.adjoint()))
    }

    /// `ρ^{⊗n}`.
    pub fn n_copies(&self, n: usize) -> Self {
        (1..n).fold(self.clone(), |acc, _| acc.tensor(self))
    }
}

impl AsRef<Matrix> for DensityMatrix {
    fn as_ref(&self) -> &Matrix {
        &self.matrix
    }
}

impl Tensor for DensityMatrix {
    fn tensor(&self, other: &Self) -> Self {
        Self { matrix: linalg::kron(&self.matrix, &other.matrix) }
    }
}

/// `(a·1 + r·σ)/2` on a qubit.
pub(crate) fn bloch_operator(a: f64, r: [f64; 3]) -> Matrix {
    let half = 0.5;
    Matrix::from_row_slice(
        2,
        2,
        &[
            c(half * (a + r[2]), 0.0),
            c(half * r[0], -half * r[1]),
            c(half * r[0], half * r[1]),
            c(half * (a - r[2]), 0.0),
        ],
    )
}

fn check_dims(total: usize, dims: &[usize]) -> Result<()> {
    let prod: usize = dims.iter().product();
    if dims.is_empty() || prod != total {
        return Err(Error::DimensionMismatch { expected: total, got: prod });
    }
    Ok(())
}

/// Partial trace of an arbitrary square matrix over every factor not in `keep`.
///
/// `dims` lists the factor dimensions (first factor most significant); the
/// kept factors appear in the output in their original order.
pub fn partial_trace_matrix(m: &Matrix, dims: &[usize], keep: &[usize]) -> Result<Matrix> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    check_dims(m.nrows(), dims)?;
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::InvalidParameter(format!("factor index {bad} out of range")));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();

    // Stride of each factor in the flat index.
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let offsets = |factors: &[usize]| -> Vec<usize> {
        let count: usize = factors.iter().map(|&k| dims[k]).product();
        (0..count)
            .map(|mut flat| {
                let mut off = 0;
                for &k in factors.iter().rev() {
                    off += (flat % dims[k]) * strides[k];
                    flat /= dims[k];
                }
                off
            })
            .collect()
    };
    let kept_off = offsets(&keep);
    let traced_off = offsets(&traced);

    let n = kept_off.len();
    let mut out = Matrix::from_element(n, n, ZERO);
    for (a, &oa) in kept_off.iter().enumerate() {
        for (b, &ob) in kept_off.iter().enumerate() {
            out[(a, b)] = traced_off.iter().map(|&t| m[(oa + t, ob + t)]).sum();
        }
    }
    Ok(out)
}

/// Reduced state on the factors listed in `keep`.
pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    partial_trace_matrix(rho.matrix(), dims, keep).map(DensityMatrix::from_matrix_unchecked)
}

/// `tr(ρ C)`.
pub fn expectation(rho: &DensityMatrix, charge: &HermitianOperator) -> Result<f64> {
    if rho.dim() != charge.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: charge.dim() });
    }
    Ok(linalg::trace_product(rho.matrix(), charge.matrix()).re)
}

/// Spectral norm of `AB − BA`.
pub fn commutator_norm(a: &impl AsRef<Matrix>, b: &impl AsRef<Matrix>) -> Result<f64> {
    let (a, b) = (a.as_ref(), b.as_ref());
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: b.nrows() });
    }
    Ok(linalg::spectral_norm(&linalg::commutator(a, b)))
}

/// Exponential-family state together with its log-partition function.
#[derive(Debug, Clone)]
pub struct GibbsForm {
    pub state: DensityMatrix,
    pub log_partition: f64,
}

/// `e^{−K}/tr e^{−K}` for a Hermitian exponent `K`, shifted by the spectral
/// minimum before exponentiating.
pub fn exp_family_state(exponent: &HermitianOperator) -> Result<GibbsForm> {
    if exponent.matrix().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("exponent entries".into()));
    }
    let eig = exponent.eigh();
    let shift = eig.values[0];
    let weights: Vec<f64> = eig.values.iter().map(|&l| (-(l - shift)).exp()).collect();
    let z_shifted: f64 = weights.iter().sum();
    let log_partition = -shift + z_shifted.ln();
    if !log_partition.is_finite() {
        return Err(Error::NonFinite("log-partition".into()));
    }
    let state = eig.map(|l| (-(l - shift)).exp() / z_shifted);
    Ok(GibbsForm { state: DensityMatrix::from_matrix_unchecked(state), log_partition })
}

/// Generalised Gibbs ensemble `e^{−Σ μ_i C_i}/Z`.
pub fn gge_state(charges: &ChargeSet) -> Result<DensityMatrix> {
    gge_form(charges).map(|g| g.state)
}

/// Generalised Gibbs ensemble with its log-partition function.
pub fn gge_form(charges: &ChargeSet) -> Result<GibbsForm> {
    exp_family_state(&charges.combined())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, pauli};
    use crate::operator::tensor;

    fn op(m: Matrix) -> HermitianOperator {
        HermitianOperator::new(m).unwrap()
    }

    #[test]
    fn tensor_identity_and_projectors() {
        let id = DensityMatrix::maximally_mixed(2);
        let id4 = tensor(&id, &id);
        assert!(max_abs(&(id4.matrix() - DensityMatrix::maximally_mixed(4).matrix())) < 1e-15);

        let p = DensityMatrix::from_populations(&[1.0, 0.0]).unwrap();
        let pp = tensor(&p, &p);
        assert!(max_abs(&(pp.matrix() - linalg::diag(&[1.0, 0.0, 0.0, 0.0]))) < 1e-15);
    }

    #[test]
    fn tensor_of_z_has_doubled_spectrum() {
        let z = op(pauli::z());
        let zz = tensor(&z, &z);
        assert_eq!(zz.dim(), 4);
        let spec = zz.spectrum();
        let expected = [-1.0, -1.0, 1.0, 1.0];
        for (a, b) in spec.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn bell_state_marginals_are_maximally_mixed() {
        let s = 1.0 / 2f64.sqrt();
        let bell = DensityMatrix::pure(&[c(s, 0.0), ZERO, ZERO, c(s, 0.0)]).unwrap();
        for keep in [0, 1] {
            let r = partial_trace(&bell, &[2, 2], &[keep]).unwrap();
            assert!(max_abs(&(r.matrix() - DensityMatrix::maximally_mixed(2).matrix())) < 1e-15);
        }
    }

    #[test]
    fn partial_trace_recovers_each_factor() {
        let a = DensityMatrix::from_bloch([0.1, -0.3, 0.5]).unwrap();
        let b = DensityMatrix::from_populations(&[0.2, 0.5, 0.3]).unwrap();
        let ab = tensor(&a, &b);
        let ra = partial_trace(&ab, &[2, 3], &[0]).unwrap();
        let rb = partial_trace(&ab, &[2, 3], &[1]).unwrap();
        assert!(max_abs(&(ra.matrix() - a.matrix())) < 1e-15);
        assert!(max_abs(&(rb.matrix() - b.matrix())) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(matches!(partial_trace(&rho, &[2, 3], &[0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn middle_factor_of_three() {
        let a = DensityMatrix::from_populations(&[0.7, 0.3]).unwrap();
        let b = DensityMatrix::from_bloch([0.0, 0.6, 0.0]).unwrap();
        let cst = DensityMatrix::from_populations(&[0.1, 0.9]).unwrap();
        let abc = tensor(&tensor(&a, &b), &cst);
        let rb = partial_trace(&abc, &[2, 2, 2], &[1]).unwrap();
        assert!(max_abs(&(rb.matrix() - b.matrix())) < 1e-15);
        let rac = partial_trace(&abc, &[2, 2, 2], &[2, 0]).unwrap();
        assert!(max_abs(&(rac.matrix() - tensor(&a, &cst).matrix())) < 1e-15);
    }

    #[test]
    fn gge_infinite_temperature_and_two_level() {
        let h = HermitianOperator::diagonal(&[0.0, 1.0]);
        let hot = gge_state(&ChargeSet::gibbs(h.clone(), 0.0).unwrap()).unwrap();
        assert!(max_abs(&(hot.matrix() - DensityMatrix::maximally_mixed(2).matrix())) < 1e-15);

        let g = gge_state(&ChargeSet::gibbs(h, 1.0).unwrap()).unwrap();
        let e = (-1.0f64).exp();
        let expected = linalg::diag(&[1.0 / (1.0 + e), e / (1.0 + e)]);
        assert!(max_abs(&(g.matrix() - expected)) < 1e-15);
    }

    #[test]
    fn gge_with_identity_charge_matches_joint_exponent() {
        let (a, b) = (0.7, -0.4);
        let cs = ChargeSet::new(vec![HermitianOperator::identity(2), op(pauli::x()), op(pauli::y())], vec![0.0, a, b])
            .unwrap();
        let joint = op(pauli::x() * c(a, 0.0) + pauli::y() * c(b, 0.0));
        let single = gge_state(&ChargeSet::gibbs(joint, 1.0).unwrap()).unwrap();
        assert!(max_abs(&(gge_state(&cs).unwrap().matrix() - single.matrix())) < 1e-14);
    }

    #[test]
    fn gge_survives_large_multipliers() {
        let cs = ChargeSet::gibbs(HermitianOperator::diagonal(&[0.0, 1.0, 2.0]), 2000.0).unwrap();
        let g = gge_form(&cs).unwrap();
        assert!((g.state.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!(g.log_partition.abs() < 1e-12);
    }

    #[test]
    fn expectations_of_simple_states() {
        let z = op(pauli::z());
        assert!(expectation(&DensityMatrix::maximally_mixed(2), &z).unwrap().abs() < 1e-15);
        let up = DensityMatrix::from_populations(&[1.0, 0.0]).unwrap();
        assert_eq!(expectation(&up, &z).unwrap(), 1.0);
        for mu in [-2.0, -0.3, 0.0, 0.8, 3.0] {
            let g = gge_state(&ChargeSet::gibbs(z.clone(), mu).unwrap()).unwrap();
            assert!((expectation(&g, &z).unwrap() + f64::tanh(mu)).abs() < 1e-14);
        }
        assert!(matches!(expectation(&up, &HermitianOperator::identity(3)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn commutator_norms() {
        let (x, y, z) = (op(pauli::x()), op(pauli::y()), op(pauli::z()));
        assert_eq!(commutator_norm(&z, &z).unwrap(), 0.0);
        assert!((commutator_norm(&x, &y).unwrap() - 2.0).abs() < 1e-12);
        let id = HermitianOperator::identity(2);
        let zzz = tensor(&tensor(&z, &z), &z);
        let xx1 = tensor(&tensor(&x, &x), &id);
        assert!(commutator_norm(&zzz, &xx1).unwrap() < 1e-15);
    }

    #[test]
    fn state_validation() {
        assert!(matches!(DensityMatrix::new(linalg::diag(&[0.6, 0.6])), Err(Error::InvalidTrace(_))));
        assert!(matches!(DensityMatrix::new(linalg::diag(&[1.5, -0.5])), Err(Error::NotPositive(_))));
        assert!(DensityMatrix::new(linalg::diag(&[1.0 + 1e-11, -1e-11])).is_ok());
        let bloch = DensityMatrix::from_bloch([0.3, -0.2, 0.1]).unwrap().bloch_vector().unwrap();
        assert!((bloch[0] - 0.3).abs() < 1e-15 && (bloch[1] + 0.2).abs() < 1e-15);
    }
}
