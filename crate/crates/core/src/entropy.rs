//! Von Neumann entropy, relative entropy and mutual information, in nats.

use crate::error::{Error, Result};
use crate::linalg;
use crate::state::{partial_trace, DensityMatrix, PSD_TOL};

/// Eigenvalues at or below this are treated as exact zeros.
pub const ZERO_EIGENVALUE: f64 = 1e-12;

fn clip(lam: f64) -> f64 {
    if (-PSD_TOL..0.0).contains(&lam) {
        0.0
    } else {
        lam
    }
}

/// `−Σ p ln p` over a probability vector, ignoring entries `≤ 1e-12`.
pub fn shannon_entropy(probabilities: &[f64]) -> f64 {
    probabilities.iter().map(|&p| clip(p)).filter(|&p| p > ZERO_EIGENVALUE).map(|p| -p * p.ln()).sum()
}

/// `S(ρ) = −tr ρ ln ρ`.
pub fn entropy(rho: &DensityMatrix) -> f64 {
    shannon_entropy(&rho.eigenvalues()).max(0.0)
}

/// `S(ρ‖σ) = tr ρ ln ρ − tr ρ ln σ`; `+∞` when the support of `ρ` is not
/// contained in the support of `σ`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: sigma.dim() });
    }
    let eig = linalg::eigh(sigma.matrix());
    // Populations of ρ in the eigenbasis of σ.
    let rotated = eig.vectors.adjoint() * rho.matrix() * &eig.vectors;
    let mut cross = 0.0;
    for (k, &lam) in eig.values.iter().enumerate() {
        let weight = rotated[(k, k)].re;
        if clip(lam) <= ZERO_EIGENVALUE {
            if weight > ZERO_EIGENVALUE {
                return Ok(f64::INFINITY);
            }
        } else {
            cross += weight * lam.ln();
        }
    }
    Ok((-entropy(rho) - cross).max(0.0))
}

/// `I(A:B) = S(ρ_A) + S(ρ_B) − S(ρ_AB)`.
pub fn mutual_information(rho_ab: &DensityMatrix, dims: (usize, usize)) -> Result<f64> {
    let d = [dims.0, dims.1];
    let a = partial_trace(rho_ab, &d, &[0])?;
    let b = partial_trace(rho_ab, &d, &[1])?;
    Ok((entropy(&a) + entropy(&b) - entropy(rho_ab)).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, ZERO};
    use std::f64::consts::LN_2;

    #[test]
    fn entropy_of_pure_and_mixed() {
        let pure = DensityMatrix::pure(&[c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        assert!(entropy(&pure).abs() < 1e-12);
        for d in [2usize, 3, 5] {
            let mixed = DensityMatrix::maximally_mixed(d);
            assert!((entropy(&mixed) - (d as f64).ln()).abs() < 1e-13);
        }
        let half = DensityMatrix::from_populations(&[0.5, 0.5]).unwrap();
        assert!((entropy(&half) - LN_2).abs() < 1e-15);
    }

    #[test]
    fn relative_entropy_cases() {
        let rho = DensityMatrix::from_bloch([0.2, 0.1, -0.4]).unwrap();
        assert!(relative_entropy(&rho, &rho).unwrap() < 1e-14);

        let up = DensityMatrix::from_populations(&[1.0, 0.0]).unwrap();
        let down = DensityMatrix::from_populations(&[0.0, 1.0]).unwrap();
        assert_eq!(relative_entropy(&up, &down).unwrap(), f64::INFINITY);
        // σ with a kernel that ρ avoids stays finite.
        assert!(relative_entropy(&up, &up).unwrap().is_finite());

        // Diagonal case evaluated straight from the classical formula.
        let e = (-1.0f64).exp();
        let (g0, g1) = (1.0 / (1.0 + e), e / (1.0 + e));
        let gibbs = DensityMatrix::from_populations(&[g0, g1]).unwrap();
        let mixed = DensityMatrix::maximally_mixed(2);
        let expected = 0.5 * (0.5 / g0).ln() + 0.5 * (0.5 / g1).ln();
        assert!((relative_entropy(&mixed, &gibbs).unwrap() - expected).abs() < 1e-14);
        // ln((1+e^{-1})/2) + 1/2
        assert!((expected - (((1.0 + e) / 2.0).ln() + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn mutual_information_limits() {
        let a = DensityMatrix::from_bloch([0.3, 0.0, 0.5]).unwrap();
        let b = DensityMatrix::from_populations(&[0.25, 0.75]).unwrap();
        let ab = crate::operator::tensor(&a, &b);
        assert!(mutual_information(&ab, (2, 2)).unwrap() < 1e-13);

        let s = 1.0 / 2f64.sqrt();
        let bell = DensityMatrix::pure(&[c(s, 0.0), ZERO, ZERO, c(s, 0.0)]).unwrap();
        assert!((mutual_information(&bell, (2, 2)).unwrap() - 2.0 * LN_2).abs() < 1e-12);
    }

    #[test]
    fn tiny_negative_eigenvalues_are_clipped() {
        assert_eq!(shannon_entropy(&[1.0, -5e-10]), 0.0);
    }
}
