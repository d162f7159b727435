//! Random matrices for property checks and Monte-Carlo sweeps.
//!
//! All samplers take the RNG explicitly so callers control seeding.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, c, Matrix};
use crate::operator::HermitianOperator;
use crate::state::DensityMatrix;

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-random unitary (QR of a Ginibre matrix with the phases of `R` removed).
pub fn haar_unitary(dim: usize, rng: &mut impl Rng) -> Matrix {
    let qr = ginibre(dim, dim, rng).qr();
    let (q, r) = qr.unpack();
    let mut q = q;
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random Hermitian matrix from the Gaussian unitary ensemble.
pub fn gue(dim: usize, rng: &mut impl Rng) -> HermitianOperator {
    let g = ginibre(dim, dim, rng);
    HermitianOperator::from_hermitian_unchecked(linalg::hermitian_part(&g))
}

/// Full-rank random state `G G† / tr(G G†)`.
pub fn ginibre_state(dim: usize, rng: &mut impl Rng) -> DensityMatrix {
    let g = ginibre(dim, dim, rng);
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m).re;
    DensityMatrix::from_matrix_unchecked(m * c(1.0 / tr, 0.0))
}

/// Random state of rank at most `rank`.
pub fn ginibre_state_with_rank(dim: usize, rank: usize, rng: &mut impl Rng) -> DensityMatrix {
    let g = ginibre(dim, rank.max(1), rng);
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m).re;
    DensityMatrix::from_matrix_unchecked(m * c(1.0 / tr, 0.0))
}

/// Unitary that is block diagonal in the computational basis, with a Haar
/// block on every set of basis states sharing the same label.
///
/// Labels are compared after rounding to 1e-9, so they may come straight from
/// sums of charge eigenvalues. Any such unitary commutes with every diagonal
/// operator constant on the label classes.
pub fn block_unitary(labels: &[Vec<f64>], rng: &mut impl Rng) -> Matrix {
    let n = labels.len();
    let key = |l: &Vec<f64>| -> Vec<i64> { l.iter().map(|x| (x * 1e9).round() as i64).collect() };
    let mut classes: Vec<(Vec<i64>, Vec<usize>)> = Vec::new();
    for (i, l) in labels.iter().enumerate() {
        let k = key(l);
        match classes.iter_mut().find(|(ck, _)| *ck == k) {
            Some((_, members)) => members.push(i),
            None => classes.push((k, vec![i])),
        }
    }
    let mut u = Matrix::zeros(n, n);
    for (_, members) in classes {
        let block = haar_unitary(members.len(), rng);
        for (a, &i) in members.iter().enumerate() {
            for (b, &j) in members.iter().enumerate() {
                u[(i, j)] = block[(a, b)];
            }
        }
    }
    u
}
