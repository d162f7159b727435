//! Channels dilated by a unitary on system and bath, and checks of whether
//! that unitary conserves each total charge.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::serialize_matrix;
use crate::linalg::{self, c, Matrix, ZERO};
use crate::maxent::maxent_project;
use crate::operator::{tensor, ChargeSet, HermitianOperator};
use crate::passivity::{commutant_intersection, distance_to_span};
use crate::state::{expectation, gge_state, partial_trace, DensityMatrix};

/// Default threshold on conservation residuals.
pub const CONSERVATION_TOL: f64 = 1e-9;
const UNITARITY_TOL: f64 = 1e-10;

/// `ℰ(ρ) = tr_{traced_out}[U(ρ ⊗ γ_R)U†]` with `γ_R` the GGE of the bath.
#[derive(Debug, Clone)]
pub struct ThermalOpSpec {
    pub system_charges: ChargeSet,
    pub bath_charges: ChargeSet,
    pub unitary: Matrix,
    /// Factorization of the joint space. Defaults to `[d_S, d_R]`.
    pub subsystem_dims: Vec<usize>,
    /// Indices into `subsystem_dims` removed after the unitary.
    pub traced_out: Vec<usize>,
}

impl ThermalOpSpec {
    /// System first, bath second, bath traced out.
    pub fn new(system_charges: ChargeSet, bath_charges: ChargeSet, unitary: Matrix) -> Result<Self> {
        let dims = vec![system_charges.dim(), bath_charges.dim()];
        Self::with_partition(system_charges, bath_charges, unitary, dims, vec![1])
    }

    pub fn with_partition(
        system_charges: ChargeSet,
        bath_charges: ChargeSet,
        unitary: Matrix,
        subsystem_dims: Vec<usize>,
        traced_out: Vec<usize>,
    ) -> Result<Self> {
        if system_charges.len() != bath_charges.len() {
            return Err(Error::DimensionMismatch { expected: system_charges.len(), got: bath_charges.len() });
        }
        let joint = system_charges.dim() * bath_charges.dim();
        if unitary.nrows() != joint || unitary.ncols() != joint {
            return Err(Error::DimensionMismatch { expected: joint, got: unitary.nrows() });
        }
        let defect = linalg::unitarity_defect(&unitary);
        if defect > UNITARITY_TOL {
            return Err(Error::NonUnitary(defect));
        }
        if subsystem_dims.iter().product::<usize>() != joint {
            return Err(Error::InvalidParameter(format!(
                "subsystem dimensions {subsystem_dims:?} do not multiply to {joint}"
            )));
        }
        if let Some(&bad) = traced_out.iter().find(|&&k| k >= subsystem_dims.len()) {
            return Err(Error::InvalidParameter(format!("traced-out index {bad} out of range")));
        }
        Ok(Self { system_charges, bath_charges, unitary, subsystem_dims, traced_out })
    }

    pub fn joint_dim(&self) -> usize {
        self.unitary.nrows()
    }

    /// `C_i ⊗ 1 + 1 ⊗ C_i^R` for each charge index.
    pub fn total_charges(&self) -> Vec<HermitianOperator> {
        let dims = [self.system_charges.dim(), self.bath_charges.dim()];
        self.system_charges
            .charges()
            .iter()
            .zip(self.bath_charges.charges())
            .map(|(s, r)| {
                let sum = s.embed(0, &dims).expect("dims checked").matrix()
                    + r.embed(1, &dims).expect("dims checked").matrix();
                HermitianOperator::from_hermitian_unchecked(sum)
            })
            .collect()
    }

    fn joint_input(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.system_charges.dim() {
            return Err(Error::DimensionMismatch { expected: self.system_charges.dim(), got: rho.dim() });
        }
        Ok(tensor(rho, &gge_state(&self.bath_charges)?))
    }
}

/// Spectral norm of `[U, C_i ⊗ 1 + 1 ⊗ C_i^R]` for every charge.
pub fn conservation_residuals(spec: &ThermalOpSpec) -> Vec<f64> {
    spec.total_charges().iter().map(|t| linalg::spectral_norm(&linalg::commutator(&spec.unitary, t.matrix()))).collect()
}

pub fn is_conserving(spec: &ThermalOpSpec, tol: f64) -> bool {
    conservation_residuals(spec).iter().all(|&r| r <= tol)
}

pub fn apply_thermal_operation(spec: &ThermalOpSpec, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let out = spec.joint_input(rho)?.evolve(&spec.unitary)?;
    let keep: Vec<usize> = (0..spec.subsystem_dims.len()).filter(|k| !spec.traced_out.contains(k)).collect();
    partial_trace(&out, &spec.subsystem_dims, &keep)
}

/// Expectations of every total charge before and after the unitary.
#[derive(Debug, Clone, Serialize)]
pub struct JointChargeBalance {
    pub before: Vec<f64>,
    pub after: Vec<f64>,
    pub max_change: f64,
}

pub fn joint_charge_balance(spec: &ThermalOpSpec, rho: &DensityMatrix) -> Result<JointChargeBalance> {
    let joint = spec.joint_input(rho)?;
    let evolved = joint.evolve(&spec.unitary)?;
    let totals = spec.total_charges();
    let before = totals.iter().map(|t| expectation(&joint, t)).collect::<Result<Vec<_>>>()?;
    let after = totals.iter().map(|t| expectation(&evolved, t)).collect::<Result<Vec<_>>>()?;
    let max_change = before.iter().zip(&after).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(JointChargeBalance { before, after, max_change })
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    /// `|tr(UρU† C^k) − tr(ρ C^k)|` for `k = 1..=k_max`.
    pub residuals: Vec<f64>,
}

pub fn average_preservation_check(
    u: &Matrix,
    rho: &DensityMatrix,
    charge: &HermitianOperator,
    k_max: usize,
) -> Result<MomentReport> {
    if charge.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: charge.dim() });
    }
    let out = rho.evolve(u)?;
    Ok(MomentReport { residuals: moment_residuals(rho, &out, charge, k_max) })
}

fn moment_residuals(a: &DensityMatrix, b: &DensityMatrix, charge: &HermitianOperator, k_max: usize) -> Vec<f64> {
    let mut power = linalg::identity(charge.dim());
    (1..=k_max)
        .map(|_| {
            power = &power * charge.matrix();
            (linalg::trace_product(b.matrix(), &power) - linalg::trace_product(a.matrix(), &power)).norm()
        })
        .collect()
}

/// `|ψ⟩⟨ψ|` with `|ψ⟩ = Σ_k √(e^{−βE_k}/Z) |E_k⟩`: pure, yet with the same
/// energy statistics as the Gibbs state.
pub fn coherent_gibbs_state(hamiltonian: &HermitianOperator, beta: f64) -> Result<DensityMatrix> {
    let gibbs = gge_state(&ChargeSet::gibbs(hamiltonian.clone(), beta)?)?;
    let eig = hamiltonian.eigh();
    let d = hamiltonian.dim();
    let mut psi = vec![ZERO; d];
    for k in 0..d {
        let v = eig.vectors.column(k);
        let weight = (v.adjoint() * gibbs.matrix() * v)[(0, 0)].re.max(0.0).sqrt();
        for (i, z) in psi.iter_mut().enumerate() {
            *z += v[i] * weight;
        }
    }
    DensityMatrix::pure(&psi)
}

/// Largest off-diagonal magnitude in the eigenbasis of `charge`.
pub fn max_coherence(rho: &DensityMatrix, charge: &HermitianOperator) -> f64 {
    let eig = charge.eigh();
    let rotated = eig.vectors.adjoint() * rho.matrix() * &eig.vectors;
    let mut best = 0.0_f64;
    for i in 0..rotated.nrows() {
        for j in 0..rotated.ncols() {
            if i != j {
                best = best.max(rotated[(i, j)].norm());
            }
        }
    }
    best
}

#[derive(Debug, Clone, Serialize)]
pub struct GibbsToPureReport {
    pub moment_residuals: Vec<f64>,
    pub input_purity: f64,
    pub output_purity: f64,
    pub output_coherence: f64,
}

/// Compare the Gibbs state with [`coherent_gibbs_state`]: every moment of `H`
/// agrees although one is mixed and the other pure.
pub fn gibbs_to_pure_check(hamiltonian: &HermitianOperator, beta: f64, k_max: usize) -> Result<GibbsToPureReport> {
    let gibbs = gge_state(&ChargeSet::gibbs(hamiltonian.clone(), beta)?)?;
    let pure = coherent_gibbs_state(hamiltonian, beta)?;
    let purity = |r: &DensityMatrix| linalg::trace_product(r.matrix(), r.matrix()).re;
    Ok(GibbsToPureReport {
        moment_residuals: moment_residuals(&gibbs, &pure, hamiltonian, k_max),
        input_purity: purity(&gibbs),
        output_purity: purity(&pure),
        output_coherence: max_coherence(&pure, hamiltonian),
    })
}

/// Qutrit with `H = |1⟩⟨1| + 2|2⟩⟨2|`.
pub fn qutrit_hamiltonian() -> HermitianOperator {
    HermitianOperator::diagonal(&[0.0, 1.0, 2.0])
}

/// Real orthogonal qutrit unitary with `|1⟩ → (|0⟩ + |2⟩)/√2`, completed by
/// `|0⟩ → |1⟩` and `|2⟩ → (|0⟩ − |2⟩)/√2`. It keeps `⟨H⟩` of `|1⟩⟨1|` but
/// does not commute with `H`.
pub fn qutrit_injection_unitary() -> Matrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    linalg::real_matrix(&[&[0.0, s, s], &[1.0, 0.0, 0.0], &[0.0, s, -s]])
}

#[derive(Debug, Clone, Serialize)]
pub struct InjectionCase {
    pub label: String,
    /// `|⟨H⟩_out − ⟨H⟩_in|`.
    pub energy_residual: f64,
    pub max_coherence: f64,
    /// `|⟨0|ρ′|2⟩|`.
    pub coherence_02: f64,
    #[serde(serialize_with = "serialize_matrix")]
    pub output: Matrix,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoherenceInjectionReport {
    #[serde(serialize_with = "serialize_matrix")]
    pub unitary: Matrix,
    /// `‖[U, H]‖`.
    pub conservation_residual: f64,
    pub cases: Vec<InjectionCase>,
}

/// Apply [`qutrit_injection_unitary`] to `|1⟩⟨1|`, the Gibbs state at `β = 1`
/// and the maximally mixed state.
pub fn coherence_injection_demo() -> CoherenceInjectionReport {
    let h = qutrit_hamiltonian();
    let u = qutrit_injection_unitary();
    let inputs = [
        ("excited |1><1|", DensityMatrix::from_populations(&[0.0, 1.0, 0.0]).expect("valid")),
        ("gibbs beta=1", gge_state(&ChargeSet::gibbs(h.clone(), 1.0).expect("valid")).expect("finite")),
        ("maximally mixed", DensityMatrix::maximally_mixed(3)),
    ];
    let cases = inputs
        .into_iter()
        .map(|(label, rho)| {
            let out = rho.evolve(&u).expect("unitary of matching size");
            let energy_residual = (expectation(&out, &h).expect("dims") - expectation(&rho, &h).expect("dims")).abs();
            InjectionCase {
                label: label.to_owned(),
                energy_residual,
                max_coherence: max_coherence(&out, &h),
                coherence_02: out.matrix()[(0, 2)].norm(),
                output: out.into_matrix(),
            }
        })
        .collect();
    CoherenceInjectionReport {
        conservation_residual: linalg::spectral_norm(&linalg::commutator(&u, h.matrix())),
        unitary: u,
        cases,
    }
}

/// Distance of a state from the two candidate sets of free states: the span of
/// the charges' commutant, and the GGE family of the charges.
#[derive(Debug, Clone, Serialize)]
pub struct FreeStateReport {
    pub commutant_dimension: usize,
    /// Hilbert–Schmidt distance to the commutant span.
    pub commutant_distance: f64,
    /// Hilbert–Schmidt distance to the GGE with the same charge expectations.
    pub gge_distance: f64,
}

pub fn free_state_report(rho: &DensityMatrix, charges: &[HermitianOperator]) -> Result<FreeStateReport> {
    let basis = commutant_intersection(charges)?;
    let projected = maxent_project(rho, charges)?;
    let diff = rho.matrix() - projected.matrix();
    Ok(FreeStateReport {
        commutant_dimension: basis.len(),
        commutant_distance: distance_to_span(rho.matrix(), &basis),
        gge_distance: linalg::trace_product(&diff.adjoint(), &diff).re.max(0.0).sqrt(),
    })
}

/// `e^{−iAt}` for Hermitian `A`.
pub fn propagator(a: &HermitianOperator, t: f64) -> Matrix {
    let eig = a.eigh();
    let phases: Vec<_> = eig.values.iter().map(|&v| c(0.0, -v * t).exp()).collect();
    &eig.vectors * Matrix::from_diagonal(&nalgebra::DVector::from_vec(phases)) * eig.vectors.adjoint()
}
