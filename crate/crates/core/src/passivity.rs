//! Work extraction and (complete) passivity with respect to arbitrary charges.
//!
//! The minimum of `tr(UρU†C)` over unitaries is reached by placing the largest
//! eigenvalue of `ρ` on the lowest eigenvalue of `C`, the next largest on the
//! next lowest, and so on. Every quantity here is computed from that pairing.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::entropy::entropy;
use crate::error::{Error, Result};
use crate::linalg::{self, c, Matrix, ZERO};
use crate::operator::{ChargeSet, HermitianOperator};
use crate::state::{self, commutator_norm, expectation, DensityMatrix};

/// Default absolute tolerance on ergotropy.
pub const PASSIVITY_TOL: f64 = 1e-10;
/// Cap on `d^n` for n-copy checks.
pub const MAX_TOTAL_DIM: usize = 4096;

#[derive(Debug, Clone, Serialize)]
pub struct ErgotropyResult {
    pub value: f64,
    /// `Σ_k p↓_k c↑_k`, the lowest reachable expectation.
    pub optimal_final_expectation: f64,
    pub passive: bool,
    /// `witness_permutation[k]` is the charge level (ascending order) whose
    /// population goes to level `k`. For states commuting with the charge,
    /// permuting levels this way attains the minimum.
    pub witness_permutation: Vec<usize>,
}

/// `Σ p↓ c↑` for matching spectra.
fn passive_value(state_eigs: &mut [f64], charge_eigs: &mut [f64]) -> f64 {
    state_eigs.sort_by(|a, b| b.total_cmp(a));
    charge_eigs.sort_by(f64::total_cmp);
    state_eigs.iter().zip(charge_eigs.iter()).map(|(p, c)| p * c).sum()
}

fn check_dims(rho: &DensityMatrix, charge: &HermitianOperator) -> Result<()> {
    if rho.dim() != charge.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: charge.dim() });
    }
    Ok(())
}

/// `tr(ρC) − min_U tr(UρU†C)`.
pub fn ergotropy(rho: &DensityMatrix, charge: &HermitianOperator) -> Result<ErgotropyResult> {
    check_dims(rho, charge)?;
    let eig = charge.eigh();
    let mut p = rho.eigenvalues();
    let mut cs = eig.values.clone();
    let optimal = passive_value(&mut p, &mut cs);
    let value = (expectation(rho, charge)? - optimal).max(0.0);

    let rotated = eig.vectors.adjoint() * rho.matrix() * &eig.vectors;
    let pops: Vec<f64> = (0..rho.dim()).map(|k| rotated[(k, k)].re).collect();
    let mut witness: Vec<usize> = (0..rho.dim()).collect();
    witness.sort_by(|&a, &b| pops[b].total_cmp(&pops[a]));

    Ok(ErgotropyResult {
        value,
        optimal_final_expectation: optimal,
        passive: value <= PASSIVITY_TOL,
        witness_permutation: witness,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PassivityReport {
    pub passive: bool,
    pub ergotropy: f64,
    pub commutator_norm: f64,
    /// Populations are non-increasing across the charge's eigenspaces.
    pub ordered: bool,
    /// Whether "ergotropy ≤ tol" agrees with "commutes and ordered".
    pub criteria_agree: bool,
    pub n: usize,
    pub witness_permutation: Vec<usize>,
}

/// Passivity by zero ergotropy, cross-checked against the structural
/// criterion (commutes with the charge and has no population inversion).
pub fn is_passive(rho: &DensityMatrix, charge: &HermitianOperator, tol: f64) -> Result<PassivityReport> {
    let erg = ergotropy(rho, charge)?;
    let comm = commutator_norm(rho, charge)?;
    let eig = charge.eigh();
    let scale = 1.0 + eig.values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));

    // Group degenerate charge levels and compare the extreme eigenvalues of ρ
    // inside neighbouring eigenspaces.
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for (k, &v) in eig.values.iter().enumerate() {
        match blocks.last_mut() {
            Some(b) if (v - eig.values[b[0]]).abs() <= 1e-9 * scale => b.push(k),
            _ => blocks.push(vec![k]),
        }
    }
    let extremes: Vec<(f64, f64)> = blocks
        .iter()
        .map(|b| {
            let v = Matrix::from_fn(rho.dim(), b.len(), |i, j| eig.vectors[(i, b[j])]);
            let block = v.adjoint() * rho.matrix() * &v;
            let e = linalg::eigvalsh(&block);
            (e[0], e[e.len() - 1])
        })
        .collect();
    let ordered = extremes.windows(2).all(|w| w[0].0 >= w[1].1 - tol);
    let commutes = comm <= tol.sqrt() * scale;
    let passive = erg.value <= tol;

    Ok(PassivityReport {
        passive,
        ergotropy: erg.value,
        commutator_norm: comm,
        ordered,
        criteria_agree: passive == (commutes && ordered),
        n: 1,
        witness_permutation: erg.witness_permutation,
    })
}

fn guard(dim: usize, n: usize) -> Result<()> {
    let total = u32::try_from(n).ok().and_then(|e| dim.checked_pow(e));
    match total {
        Some(t) if t <= MAX_TOTAL_DIM => Ok(()),
        _ => Err(Error::DimensionGuard { dim: total.unwrap_or(usize::MAX), limit: MAX_TOTAL_DIM }),
    }
}

/// Ergotropy of `ρ^{⊗n}` with respect to `Σ_k 1⊗…⊗C⊗…⊗1`, from the product
/// spectrum of the copies and the sum spectrum of the total charge.
pub fn n_copy_ergotropy(rho: &DensityMatrix, charge: &HermitianOperator, n: usize) -> Result<f64> {
    check_dims(rho, charge)?;
    if n == 0 {
        return Err(Error::InvalidParameter("number of copies must be at least 1".into()));
    }
    guard(rho.dim(), n)?;
    let p = rho.eigenvalues();
    let cvals = charge.spectrum();
    let mut probs = vec![1.0];
    let mut levels = vec![0.0];
    for _ in 0..n {
        probs = probs.iter().flat_map(|a| p.iter().map(move |b| a * b)).collect();
        levels = levels.iter().flat_map(|a| cvals.iter().map(move |b| a + b)).collect();
    }
    let current = n as f64 * expectation(rho, charge)?;
    Ok((current - passive_value(&mut probs, &mut levels)).max(0.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct NCopyReport {
    pub n: usize,
    pub value: f64,
    pub passive: bool,
}

pub fn is_n_copy_passive(rho: &DensityMatrix, charge: &HermitianOperator, n: usize, tol: f64) -> Result<NCopyReport> {
    let value = n_copy_ergotropy(rho, charge, n)?;
    Ok(NCopyReport { n, value, passive: value <= tol })
}

/// `F(ρ) = Σ_i μ_i tr(ρ C_i) − S(ρ)`.
pub fn free_energy(rho: &DensityMatrix, charges: &ChargeSet) -> Result<f64> {
    let mut f = -entropy(rho);
    for (q, mu) in charges.charges().iter().zip(charges.multipliers()) {
        f += mu * expectation(rho, q)?;
    }
    Ok(f)
}

#[derive(Debug, Clone, Serialize)]
pub struct CmuPassivityReport {
    pub copies: Vec<NCopyReport>,
    pub passes: bool,
    pub tol: f64,
}

/// Ergotropy of the GGE's copies with respect to `C(μ) = Σ μ_i C_i`, for
/// `n = 1..=max_copies`.
pub fn check_cmu_complete_passivity(charges: &ChargeSet, max_copies: usize, tol: f64) -> Result<CmuPassivityReport> {
    let gge = state::gge_state(charges)?;
    let combined = charges.combined();
    let copies = (1..=max_copies).map(|n| is_n_copy_passive(&gge, &combined, n, tol)).collect::<Result<Vec<_>>>()?;
    let passes = copies.iter().all(|r| r.passive);
    Ok(CmuPassivityReport { copies, passes, tol })
}

/// Hilbert–Schmidt orthonormal basis of Hermitian `d×d` matrices.
fn hermitian_basis(d: usize) -> Vec<Matrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(d * d);
    for j in 0..d {
        let mut m = Matrix::from_element(d, d, ZERO);
        m[(j, j)] = c(1.0, 0.0);
        basis.push(m);
    }
    for j in 0..d {
        for k in j + 1..d {
            let mut sym = Matrix::from_element(d, d, ZERO);
            sym[(j, k)] = c(s, 0.0);
            sym[(k, j)] = c(s, 0.0);
            basis.push(sym);
            let mut anti = Matrix::from_element(d, d, ZERO);
            anti[(j, k)] = c(0.0, s);
            anti[(k, j)] = c(0.0, -s);
            basis.push(anti);
        }
    }
    basis
}

fn hs_inner(a: &Matrix, b: &Matrix) -> f64 {
    linalg::trace_product(&a.adjoint(), b).re
}

/// Hermitian, Hilbert–Schmidt orthonormal basis of `{X : [X, C_i] = 0 ∀i}`.
/// The first element is always `1/√d`.
pub fn commutant_intersection(charges: &[HermitianOperator]) -> Result<Vec<HermitianOperator>> {
    let d = charges
        .first()
        .map(HermitianOperator::dim)
        .ok_or_else(|| Error::InvalidParameter("no charges given".into()))?;
    if let Some(bad) = charges.iter().find(|q| q.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: bad.dim() });
    }
    let basis = hermitian_basis(d);
    let n = basis.len();

    // Real matrix of X ↦ i[C, X] in the Hermitian basis, stacked over charges.
    let mut stacked = DMatrix::<f64>::zeros(charges.len() * n, n);
    for (ci, q) in charges.iter().enumerate() {
        for (b, eb) in basis.iter().enumerate() {
            let image = linalg::commutator(q.matrix(), eb) * c(0.0, 1.0);
            for (a, ea) in basis.iter().enumerate() {
                stacked[(ci * n + a, b)] = hs_inner(ea, &image);
            }
        }
    }
    let svd = stacked.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let smax = svd.singular_values.iter().fold(0.0_f64, |a, &s| a.max(s));
    let mut null: Vec<Matrix> = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if smax == 0.0 || s < 1e-10 * smax {
            let mut m = Matrix::from_element(d, d, ZERO);
            for (b, eb) in basis.iter().enumerate() {
                m += eb * c(v_t[(k, b)], 0.0);
            }
            null.push(m);
        }
    }
    // The row count is at least n, so every right singular vector is present.

    let mut ortho: Vec<Matrix> = vec![linalg::identity(d) * c(1.0 / (d as f64).sqrt(), 0.0)];
    for mut m in null {
        for o in &ortho {
            let coeff = hs_inner(o, &m);
            m -= o * c(coeff, 0.0);
        }
        let norm = hs_inner(&m, &m).sqrt();
        if norm > 1e-8 && ortho.len() < d * d {
            ortho.push(m * c(1.0 / norm, 0.0));
        }
    }
    Ok(ortho.into_iter().map(HermitianOperator::from_hermitian_unchecked).collect())
}

/// Hilbert–Schmidt distance from `op` to the span of an orthonormal basis.
pub fn distance_to_span(op: &Matrix, basis: &[HermitianOperator]) -> f64 {
    let mut rest = op.clone();
    for b in basis {
        let coeff = linalg::trace_product(b.matrix(), op);
        rest -= b.matrix() * coeff;
    }
    hs_inner(&rest, &rest).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli, spin_half};
    use crate::operator::tensor;

    fn op(m: Matrix) -> HermitianOperator {
        HermitianOperator::new(m).unwrap()
    }

    /// Minimum of Σ p_k c_{π(k)} over all permutations.
    fn brute_force_min(p: &[f64], cvals: &[f64]) -> f64 {
        fn rec(p: &[f64], cvals: &[f64], used: &mut Vec<bool>, k: usize, acc: f64, best: &mut f64) {
            if k == p.len() {
                *best = best.min(acc);
                return;
            }
            for j in 0..cvals.len() {
                if !used[j] {
                    used[j] = true;
                    rec(p, cvals, used, k + 1, acc + p[k] * cvals[j], best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(p, cvals, &mut vec![false; cvals.len()], 0, 0.0, &mut best);
        best
    }

    #[test]
    fn population_inversion() {
        let rho = DensityMatrix::from_populations(&[0.3, 0.7]).unwrap();
        let h = HermitianOperator::diagonal(&[0.0, 1.0]);
        let erg = ergotropy(&rho, &h).unwrap();
        let oracle = 0.7 - brute_force_min(&[0.3, 0.7], &[0.0, 1.0]);
        assert!((oracle - 0.4).abs() < 1e-15);
        assert!((erg.value - oracle).abs() < 1e-14);
        assert_eq!(erg.witness_permutation, vec![1, 0]);
        assert!(!erg.passive);
    }

    #[test]
    fn gibbs_and_flat_states_are_passive() {
        let h = HermitianOperator::diagonal(&[0.0, 0.4, 1.1]);
        for beta in [0.1, 1.0, 7.0] {
            let g = state::gge_state(&ChargeSet::gibbs(h.clone(), beta).unwrap()).unwrap();
            let erg = ergotropy(&g, &h).unwrap();
            assert!(erg.value <= 1e-14 && erg.passive);
            assert_eq!(erg.witness_permutation, vec![0, 1, 2]);
        }
        let flat = DensityMatrix::maximally_mixed(3);
        assert!(ergotropy(&flat, &h).unwrap().value < 1e-15);
    }

    #[test]
    fn spin_half_passivity_depends_on_axis() {
        let [lx, _, lz] = spin_half().map(op);
        let rho = state::gge_state(&ChargeSet::gibbs(lz.clone(), 1.3).unwrap()).unwrap();
        let along = is_passive(&rho, &lz, PASSIVITY_TOL).unwrap();
        assert!(along.passive && along.ordered && along.criteria_agree);
        let across = is_passive(&rho, &lx, PASSIVITY_TOL).unwrap();
        assert!(!across.passive && across.criteria_agree);
        // [ρ, L_x] for ρ = (1 − tanh(μ/2) Z)/2 is −i tanh(μ/2) Y/2.
        assert!((across.commutator_norm - (1.3f64 / 2.0).tanh() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn commuting_gge_violates_energy_passivity() {
        let h = HermitianOperator::diagonal(&[0.0, 1.0]);
        let c1 = HermitianOperator::diagonal(&[3.0, 0.0]);
        let cs = ChargeSet::new(vec![h.clone(), c1], vec![1.0, 1.0]).unwrap();
        let rho = state::gge_state(&cs).unwrap();
        let rep = is_passive(&rho, &h, PASSIVITY_TOL).unwrap();
        assert!(!rep.passive && !rep.ordered && rep.criteria_agree);
        assert!(rep.commutator_norm < 1e-15);
        let combined = is_passive(&rho, &cs.combined(), PASSIVITY_TOL).unwrap();
        assert!(combined.passive && combined.criteria_agree);
    }

    #[test]
    fn degenerate_levels_accept_any_order_inside() {
        let h = HermitianOperator::diagonal(&[0.0, 0.0, 1.0]);
        let rho = DensityMatrix::from_populations(&[0.2, 0.5, 0.3]).unwrap();
        // 0.2 sits in the ground eigenspace below the 0.3 on the excited level.
        let rep = is_passive(&rho, &h, PASSIVITY_TOL).unwrap();
        assert!(!rep.passive && !rep.ordered && rep.criteria_agree);
        let rho = DensityMatrix::from_populations(&[0.3, 0.5, 0.2]).unwrap();
        let rep = is_passive(&rho, &h, PASSIVITY_TOL).unwrap();
        assert!(rep.passive && rep.ordered);
    }

    #[test]
    fn n_copy_spectral_route_matches_full_matrices() {
        let rho = DensityMatrix::from_populations(&[0.5, 0.3, 0.2]).unwrap();
        let h = HermitianOperator::diagonal(&[0.0, 1.0, 2.5]);
        assert!(is_passive(&rho, &h, PASSIVITY_TOL).unwrap().passive);
        for n in 1..=3 {
            let fast = n_copy_ergotropy(&rho, &h, n).unwrap();
            let full = ergotropy(&rho.n_copies(n), &h.n_copy_total(n).unwrap()).unwrap().value;
            assert!((fast - full).abs() < 1e-12, "n = {n}: {fast} vs {full}");
        }
    }

    #[test]
    fn two_copies_of_non_gibbs_passive_state() {
        let p = [0.5, 0.3, 0.2];
        let levels = [0.0, 1.0, 2.5];
        let rho = DensityMatrix::from_populations(&p).unwrap();
        let h = HermitianOperator::diagonal(&levels);
        // Nine-level brute force over all 9! pairings.
        let p2: Vec<f64> = p.iter().flat_map(|a| p.iter().map(move |b| a * b)).collect();
        let l2: Vec<f64> = levels.iter().flat_map(|a| levels.iter().map(move |b| a + b)).collect();
        let current: f64 = p2.iter().zip(&l2).map(|(a, b)| a * b).sum();
        let oracle = current - brute_force_min(&p2, &l2);
        let got = is_n_copy_passive(&rho, &h, 2, PASSIVITY_TOL).unwrap();
        assert!((got.value - oracle).abs() < 1e-14);
        // Levels 2.0 (weight 0.09) and 2.5 (weight 0.10) are inverted.
        assert!((oracle - 0.005).abs() < 1e-14);
        assert!(!got.passive);
    }

    #[test]
    fn dimension_guard() {
        let rho = DensityMatrix::maximally_mixed(2);
        let z = op(pauli::z());
        assert!(n_copy_ergotropy(&rho, &z, 12).is_ok());
        assert!(matches!(n_copy_ergotropy(&rho, &z, 13), Err(Error::DimensionGuard { .. })));
        assert!(matches!(n_copy_ergotropy(&rho, &z, 100), Err(Error::DimensionGuard { .. })));
    }

    #[test]
    fn free_energy_reduces_to_gibbs_form() {
        let h = HermitianOperator::diagonal(&[0.0, 1.0]);
        let rho = DensityMatrix::from_populations(&[0.6, 0.4]).unwrap();
        let f = free_energy(&rho, &ChargeSet::gibbs(h, 2.0).unwrap()).unwrap();
        assert!((f - (2.0 * 0.4 - entropy(&rho))).abs() < 1e-15);
    }

    #[test]
    fn commutant_of_pauli_pair_is_trivial() {
        let basis = commutant_intersection(&[op(pauli::x()), op(pauli::y())]).unwrap();
        assert_eq!(basis.len(), 1);
        let half = DensityMatrix::maximally_mixed(2);
        assert!(distance_to_span(half.matrix(), &basis) < 1e-14);
        let tilted = DensityMatrix::from_bloch([0.0, 0.0, 0.2]).unwrap();
        assert!(distance_to_span(tilted.matrix(), &basis) > 0.1);
    }

    #[test]
    fn commutant_of_z_is_diagonal() {
        let basis = commutant_intersection(&[op(pauli::z())]).unwrap();
        assert_eq!(basis.len(), 2);
        assert!(distance_to_span(&pauli::z(), &basis) < 1e-14);
        assert!(distance_to_span(&pauli::x(), &basis) > 0.5);
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let ip = hs_inner(a.matrix(), b.matrix());
                assert!((ip - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn commutant_of_three_qubit_charges() {
        let (x, y, z, id) = (op(pauli::x()), op(pauli::y()), op(pauli::z()), HermitianOperator::identity(2));
        let charges = [tensor(&tensor(&z, &z), &z), tensor(&tensor(&x, &x), &id), tensor(&tensor(&id, &y), &y)];
        let basis = commutant_intersection(&charges).unwrap();
        for b in &basis {
            for q in &charges {
                assert!(commutator_norm(b, q).unwrap() < 1e-10);
            }
        }
        assert_eq!(basis.len(), complex_commutant_dim(&charges));
    }

    /// Independent route: nullspace of the stacked `1⊗C − Cᵀ⊗1` on vec(X).
    fn complex_commutant_dim(charges: &[HermitianOperator]) -> usize {
        let d = charges[0].dim();
        let id = linalg::identity(d);
        let mut stacked = Matrix::zeros(charges.len() * d * d, d * d);
        for (k, q) in charges.iter().enumerate() {
            let sup = linalg::kron(&id, q.matrix()) - linalg::kron(&q.matrix().transpose(), &id);
            stacked.view_mut((k * d * d, 0), (d * d, d * d)).copy_from(&sup);
        }
        let sv = stacked.singular_values();
        let smax = sv.iter().fold(0.0_f64, |a, &s| a.max(s));
        sv.iter().filter(|&&s| s < 1e-10 * smax).count()
    }
}
