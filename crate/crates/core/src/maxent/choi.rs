//! Qubit maps given by an affine action on the Bloch vector, and their Choi
//! matrices.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, pauli, Matrix, ZERO};
use crate::state::{bloch_operator, partial_trace_matrix, DensityMatrix};

/// Trace- and Hermiticity-preserving qubit map `r ↦ linear·r + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochMapSpec {
    pub linear: [[f64; 3]; 3],
    pub offset: [f64; 3],
}

impl BlochMapSpec {
    pub fn identity() -> Self {
        Self { linear: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], offset: [0.0; 3] }
    }

    /// Everything goes to the maximally mixed state.
    pub fn fully_depolarizing() -> Self {
        Self { linear: [[0.0; 3]; 3], offset: [0.0; 3] }
    }

    /// Squash the Bloch ball onto a disc of radius `radius` in the x–y plane,
    /// lifted to height `z_offset`. `pancake(1, 0)` is the exact projection
    /// onto the equatorial plane.
    pub fn pancake(radius: f64, z_offset: f64) -> Self {
        Self { linear: [[radius, 0.0, 0.0], [0.0, radius, 0.0], [0.0, 0.0, 0.0]], offset: [0.0, 0.0, z_offset] }
    }

    pub fn map_bloch(&self, r: [f64; 3]) -> [f64; 3] {
        let mut out = self.offset;
        for (i, row) in self.linear.iter().enumerate() {
            out[i] += row.iter().zip(r).map(|(a, b)| a * b).sum::<f64>();
        }
        out
    }

    /// Linear extension to arbitrary 2×2 operators.
    pub fn apply_operator(&self, a: &Matrix) -> Result<Matrix> {
        if a.nrows() != 2 || a.ncols() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: a.nrows() });
        }
        // A = (α_0 1 + Σ_j α_j σ_j)/2 with complex α.
        let paulis = [pauli::x(), pauli::y(), pauli::z()];
        let alpha0 = linalg::trace(a);
        let alpha: Vec<Complex64> = paulis.iter().map(|p| linalg::trace_product(a, p)).collect();
        let mut out = linalg::identity(2) * alpha0;
        for (i, p) in paulis.iter().enumerate() {
            let linear: Complex64 = alpha.iter().zip(self.linear[i]).map(|(a, l)| a * l).sum();
            out += p * (alpha0 * self.offset[i] + linear);
        }
        Ok(out * c(0.5, 0.0))
    }

    /// Image of a state, as a Hermitian unit-trace operator (not necessarily PSD).
    pub fn apply(&self, rho: &DensityMatrix) -> Result<Matrix> {
        self.apply_operator(rho.matrix())
    }
}

/// Normalized Choi matrix `(ℰ ⊗ id)(|Ω⟩⟨Ω|)` with `|Ω⟩ = (|00⟩ + |11⟩)/√2`.
#[derive(Debug, Clone, Serialize)]
pub struct ChoiMatrix {
    pub dim: usize,
    #[serde(skip)]
    pub entries: Matrix,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub min_eigenvalue: f64,
    /// Largest deviation of the reference marginal from `1/2`.
    pub trace_preservation_residual: f64,
}

pub fn choi(map: &BlochMapSpec) -> ChoiMatrix {
    let mut entries = Matrix::from_element(4, 4, ZERO);
    for a in 0..2 {
        for b in 0..2 {
            let mut unit = Matrix::from_element(2, 2, ZERO);
            unit[(a, b)] = c(1.0, 0.0);
            let image = map.apply_operator(&unit).expect("2x2 input");
            entries += linalg::kron(&image, &unit) * c(0.5, 0.0);
        }
    }
    let eigenvalues = linalg::eigvalsh(&entries);
    let reference = partial_trace_matrix(&entries, &[2, 2], &[1]).expect("4 = 2·2");
    let trace_preservation_residual = linalg::max_abs(&(reference - linalg::identity(2) * c(0.5, 0.0)));
    ChoiMatrix { dim: 4, entries, min_eigenvalue: eigenvalues[0], eigenvalues, trace_preservation_residual }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CpVerdict {
    pub completely_positive: bool,
    pub min_eigenvalue: f64,
}

/// Complete positivity via the Choi criterion: min eigenvalue `≥ −tol`.
pub fn is_completely_positive(map: &BlochMapSpec, tol: f64) -> CpVerdict {
    let ch = choi(map);
    CpVerdict { completely_positive: ch.min_eigenvalue >= -tol, min_eigenvalue: ch.min_eigenvalue }
}

/// Largest Bloch-vector norm over the images of `samples` points spread on the
/// unit sphere. The map is affine, so the sphere attains the maximum over the
/// ball; a value `≤ 1` means the map is positive on the sampled set.
pub fn max_image_radius(map: &BlochMapSpec, samples: usize) -> f64 {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..samples.max(1))
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / samples.max(1) as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * k as f64;
            let img = map.map_bloch([rho * phi.cos(), rho * phi.sin(), z]);
            img.iter().map(|x| x * x).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max)
}

/// Outcome of scanning the approximate-pancake family along the radius.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CpBoundary {
    pub z_offset: f64,
    /// Largest grid radius whose map is completely positive.
    pub r_star: f64,
    pub grid_step: f64,
    /// `(1 + ε)/2`, the stated necessary bound, for comparison.
    pub necessary_bound: f64,
}

/// Scan radii `k/grid`, `k = 0..=grid`, for the approximate pancake with
/// height `z_offset ∈ [−1, 1]`.
pub fn cp_boundary_scan(z_offset: f64, grid: usize) -> Result<CpBoundary> {
    if !(-1.0..=1.0).contains(&z_offset) {
        return Err(Error::InvalidParameter(format!("z offset {z_offset} outside [-1, 1]")));
    }
    if grid == 0 {
        return Err(Error::InvalidParameter("grid resolution must be positive".into()));
    }
    let step = 1.0 / grid as f64;
    let r_star = (0..=grid)
        .map(|k| k as f64 * step)
        .filter(|&r| is_completely_positive(&BlochMapSpec::pancake(r, z_offset), 1e-10).completely_positive)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(CpBoundary { z_offset, r_star, grid_step: step, necessary_bound: (1.0 + z_offset) / 2.0 })
}

/// `(1 + r·σ)/2` as a raw operator; used to inspect non-positive images.
pub fn bloch_matrix(r: [f64; 3]) -> Matrix {
    bloch_operator(1.0, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    fn sorted_close(got: &[f64], expected: &[f64], tol: f64) {
        let mut e = expected.to_vec();
        e.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&e) {
            assert!((a - b).abs() <= tol, "{got:?} vs {e:?}");
        }
    }

    #[test]
    fn identity_map_gives_maximally_entangled_choi() {
        let ch = choi(&BlochMapSpec::identity());
        let s = 0.5;
        let mut omega = Matrix::from_element(4, 4, ZERO);
        for i in [0, 3] {
            for j in [0, 3] {
                omega[(i, j)] = c(s, 0.0);
            }
        }
        assert!(max_abs(&(&ch.entries - omega)) < 1e-15);
        sorted_close(&ch.eigenvalues, &[1.0, 0.0, 0.0, 0.0], 1e-14);
        assert!(ch.trace_preservation_residual < 1e-15);
    }

    #[test]
    fn exact_pancake_spectrum() {
        let ch = choi(&BlochMapSpec::pancake(1.0, 0.0));
        sorted_close(&ch.eigenvalues, &[0.75, 0.25, 0.25, -0.25], 1e-12);
        let v = is_completely_positive(&BlochMapSpec::pancake(1.0, 0.0), 1e-10);
        assert!(!v.completely_positive);
        assert!((v.min_eigenvalue + 0.25).abs() < 1e-12);
    }

    #[test]
    fn depolarizing_choi_is_maximally_mixed() {
        let ch = choi(&BlochMapSpec::fully_depolarizing());
        assert!(max_abs(&(&ch.entries - linalg::identity(4) * c(0.25, 0.0))) < 1e-15);
        assert!((ch.min_eigenvalue - 0.25).abs() < 1e-15);
    }

    #[test]
    fn operator_extension_matches_bloch_action() {
        let map =
            BlochMapSpec { linear: [[0.1, 0.2, 0.0], [0.0, -0.3, 0.4], [0.5, 0.0, 0.2]], offset: [0.1, 0.0, -0.2] };
        let r = [0.3, -0.4, 0.5];
        let rho = DensityMatrix::from_bloch(r).unwrap();
        let img = map.apply(&rho).unwrap();
        assert!(max_abs(&(img - bloch_matrix(map.map_bloch(r)))) < 1e-15);
    }

    #[test]
    fn exact_pancake_is_positive() {
        assert!(max_image_radius(&BlochMapSpec::pancake(1.0, 0.0), 2000) <= 1.0 + 1e-15);
        assert!(max_image_radius(&BlochMapSpec::pancake(1.0, 0.3), 2000) > 1.0);
    }

    #[test]
    fn scan_rejects_bad_inputs() {
        assert!(cp_boundary_scan(1.5, 10).is_err());
        assert!(cp_boundary_scan(0.0, 0).is_err());
    }
}
