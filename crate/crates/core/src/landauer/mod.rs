//! Erasure costs when a bath carries several conserved charges.
//!
//! The bound `Σ_i μ_i ΔC_i ≥ −ΔS_S` (bath charge changes on the left) follows
//! from the exact balance
//! `−ΔS_S + I(S′:R′) = Σ_i μ_i ΔC_i − S(ρ′_R‖γ_R)`, which [`verify_landauer`]
//! evaluates term by term.

mod protocol;

pub use protocol::{simulate_erasure_protocol, ProtocolParameters, ProtocolStep, ProtocolTrace};

use std::f64::consts::LN_2;

use rand::Rng;
use serde::Serialize;

use crate::entropy::{entropy, mutual_information, relative_entropy};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::operator::{tensor, ChargeSet, HermitianOperator};
use crate::random;
use crate::state::{expectation, gge_state, partial_trace, DensityMatrix};

/// Tolerance on `‖U†U − 1‖`.
pub const UNITARITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct LandauerReport {
    /// `S(ρ′_S) − S(ρ_S)`.
    pub d_s_system: f64,
    /// Change of each bath charge, in the order of the charge set.
    pub d_charges: Vec<f64>,
    pub mutual_info: f64,
    pub rel_entropy_bath: f64,
    /// `Σ_i μ_i ΔC_i`.
    pub lhs: f64,
    /// `lhs + ΔS_S`; non-negative whenever the bound holds.
    pub slack: f64,
    /// `|(−ΔS_S + I) − (lhs − S(ρ′_R‖γ_R))|`.
    pub identity_residual: f64,
}

/// Evolve `ρ_S ⊗ γ_R` with `u` and account for every term of the balance.
/// `dims` is `(d_S, d_R)`.
pub fn verify_landauer(
    rho_s: &DensityMatrix,
    bath: &ChargeSet,
    u: &Matrix,
    dims: (usize, usize),
) -> Result<LandauerReport> {
    let (ds, dr) = dims;
    if rho_s.dim() != ds {
        return Err(Error::DimensionMismatch { expected: ds, got: rho_s.dim() });
    }
    if bath.dim() != dr {
        return Err(Error::DimensionMismatch { expected: dr, got: bath.dim() });
    }
    if u.nrows() != ds * dr || u.ncols() != ds * dr {
        return Err(Error::DimensionMismatch { expected: ds * dr, got: u.nrows() });
    }
    let defect = linalg::unitarity_defect(u);
    if defect > UNITARITY_TOL {
        return Err(Error::NonUnitary(defect));
    }

    let gamma = gge_state(bath)?;
    let joint = tensor(rho_s, &gamma).evolve(u)?;
    let s_out = partial_trace(&joint, &[ds, dr], &[0])?;
    let r_out = partial_trace(&joint, &[ds, dr], &[1])?;

    let d_s_system = entropy(&s_out) - entropy(rho_s);
    let d_charges = bath
        .charges()
        .iter()
        .map(|q| Ok(expectation(&r_out, q)? - expectation(&gamma, q)?))
        .collect::<Result<Vec<f64>>>()?;
    let lhs: f64 = d_charges.iter().zip(bath.multipliers()).map(|(d, mu)| d * mu).sum();
    let mutual_info = mutual_information(&joint, (ds, dr))?;
    let rel_entropy_bath = relative_entropy(&r_out, &gamma)?;
    let identity_residual = ((mutual_info - d_s_system) - (lhs - rel_entropy_bath)).abs();

    Ok(LandauerReport {
        d_s_system,
        d_charges,
        mutual_info,
        rel_entropy_bath,
        lhs,
        slack: lhs + d_s_system,
        identity_residual,
    })
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {x}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErasureCosts {
    pub dh: f64,
    pub dq: f64,
}

/// Energy and charge cost of erasing one bit when the memory is swapped from
/// the energy qubit to the charge qubit at energy `eps` (`+∞` allowed).
pub fn analytic_erasure_costs(eps: f64, beta: f64, alpha: f64) -> Result<ErasureCosts> {
    check_positive("beta", beta)?;
    check_positive("alpha", alpha)?;
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::InvalidParameter(format!("eps must lie in [0, inf], got {eps}")));
    }
    if eps == f64::INFINITY {
        return Ok(ErasureCosts { dh: LN_2 / beta, dq: 0.0 });
    }
    let x = beta * eps;
    let log1p_boltz = (-x).exp().ln_1p();
    // Excited population after the energy raise, e^{−x}/(1 + e^{−x}).
    let p = 1.0 / (1.0 + x.exp());
    Ok(ErasureCosts { dh: (LN_2 - log1p_boltz) / beta - eps * p, dq: (log1p_boltz + x * p) / alpha })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TradeoffPoint {
    pub epsilon: f64,
    pub dh: f64,
    pub dq: f64,
    /// `|β ΔH + α ΔQ − ln 2|`.
    pub identity_residual: f64,
}

pub fn tradeoff_curve(beta: f64, alpha: f64, eps_grid: &[f64]) -> Result<Vec<TradeoffPoint>> {
    eps_grid
        .iter()
        .map(|&eps| {
            let ErasureCosts { dh, dq } = analytic_erasure_costs(eps, beta, alpha)?;
            Ok(TradeoffPoint { epsilon: eps, dh, dq, identity_residual: (beta * dh + alpha * dq - LN_2).abs() })
        })
        .collect()
}

pub const TRADEOFF_HEADER: [&str; 4] = ["epsilon", "dH", "dQ", "identity_residual"];

pub fn tradeoff_csv(points: &[TradeoffPoint]) -> String {
    crate::io::write_csv(&TRADEOFF_HEADER, points.iter().map(|p| vec![p.epsilon, p.dh, p.dq, p.identity_residual]))
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Charge cost of erasure against a spin bath whose levels move in steps of
/// `hbar`: `Σ_{n≥0} ħ e^{−αn}/(1 + e^{−αn})`.
///
/// The sum starts at `n = 0`, so the cost tends to `ħ/2` as `α → ∞`. It stops
/// once the geometric bound `ħ e^{−αN}/(1 − e^{−α})` on the remainder drops
/// below `tail_tol`.
pub fn discrete_spin_bath_cost(alpha: f64, hbar: f64, tail_tol: f64) -> Result<f64> {
    check_positive("alpha", alpha)?;
    check_positive("hbar", hbar)?;
    check_positive("tail_tol", tail_tol)?;
    let ratio = (-alpha).exp();
    let mut total = 0.0;
    let mut n = 0u64;
    loop {
        let boltz = (-alpha * n as f64).exp();
        if hbar * boltz / (1.0 - ratio) < tail_tol {
            return Ok(total);
        }
        total += hbar / (1.0 + (alpha * n as f64).exp());
        n += 1;
    }
}

/// A random instance for checking the bound: a qubit system, a four-level bath
/// with commuting energy and charge, and a unitary conserving both totals.
#[derive(Debug, Clone)]
pub struct ConservingInstance {
    pub rho_s: DensityMatrix,
    pub system_charges: Vec<HermitianOperator>,
    pub bath: ChargeSet,
    pub unitary: Matrix,
    pub dims: (usize, usize),
}

pub fn random_conserving_instance(rng: &mut impl Rng) -> ConservingInstance {
    const LEVELS: [f64; 3] = [0.0, 1.0, 2.0];
    let pick = |rng: &mut dyn rand::RngCore, n: usize| -> Vec<f64> {
        (0..n).map(|_| LEVELS[rng.random_range(0..LEVELS.len())]).collect()
    };
    let hs = pick(rng, 2);
    let qs = pick(rng, 2);
    let hr = pick(rng, 4);
    let qr = pick(rng, 4);
    let beta = rng.random_range(0.1..3.0);
    let mu = rng.random_range(-2.0..2.0);

    let labels: Vec<Vec<f64>> = (0..8).map(|k| vec![hs[k / 4] + hr[k % 4], qs[k / 4] + qr[k % 4]]).collect();
    let unitary = random::block_unitary(&labels, rng);
    let rank = rng.random_range(1..=2);
    let bath = ChargeSet::new(vec![HermitianOperator::diagonal(&hr), HermitianOperator::diagonal(&qr)], vec![beta, mu])
        .expect("valid bath charges");
    ConservingInstance {
        rho_s: random::ginibre_state_with_rank(2, rank, rng),
        system_charges: vec![HermitianOperator::diagonal(&hs), HermitianOperator::diagonal(&qs)],
        bath,
        unitary,
        dims: (2, 4),
    }
}
