//! Finite-step version of the two-bath erasure protocol.
//!
//! The memory is a four-level system `|hq⟩` with an energy qubit `h` and a
//! charge qubit `q`. The bit starts spread over `|00⟩` and `|10⟩`. The `|10⟩`
//! energy is raised against the heat bath, the population is swapped into
//! `|01⟩`, and the `|01⟩` charge is raised against the spin bath until the
//! memory is erased. Every step keeps the state diagonal, so only populations
//! are tracked.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::serialize_state;
use crate::state::DensityMatrix;

/// Refuse traces longer than this many steps.
pub const MAX_PROTOCOL_STEPS: usize = 10_000_000;

#[derive(Debug, Clone, Serialize)]
pub struct ProtocolStep {
    pub label: &'static str,
    /// Level after the step, in energy or charge units.
    pub level_value: f64,
    /// Population that changed level during the step.
    pub population_moved: f64,
    pub dh: f64,
    pub dq: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProtocolParameters {
    pub beta: f64,
    pub alpha: f64,
    pub eps_swap: f64,
    pub n_steps: usize,
    pub tail_tol: f64,
    /// Increment used while raising the charge level.
    pub charge_step: f64,
    /// Charge level at which the raising stopped and the tail was added.
    pub truncation_level: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProtocolTrace {
    pub steps: Vec<ProtocolStep>,
    pub dh_total: f64,
    pub dq_total: f64,
    /// Populations of `|00⟩, |01⟩, |10⟩, |11⟩`.
    pub final_populations: Vec<f64>,
    #[serde(serialize_with = "serialize_state")]
    pub final_state: DensityMatrix,
    pub parameters: ProtocolParameters,
}

/// Excited population of a two-level system with gap `x` in units of `kT`.
fn excited(x: f64) -> f64 {
    1.0 / (1.0 + x.exp())
}

/// Run the protocol with `n_steps` increments for the energy raise. The
/// charge raise uses the increment `max(βε, 1)/(α·n_steps)` and stops once the
/// `|01⟩` population falls below `tail_tol`; the remaining cost
/// `ln(1 + e^{−αq})/α` is added in closed form.
pub fn simulate_erasure_protocol(
    eps_swap: f64,
    beta: f64,
    alpha: f64,
    n_steps: usize,
    tail_tol: f64,
) -> Result<ProtocolTrace> {
    for (name, v) in [("beta", beta), ("alpha", alpha), ("tail_tol", tail_tol)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
        }
    }
    if !(eps_swap >= 0.0 && eps_swap.is_finite()) {
        return Err(Error::InvalidParameter(format!("eps_swap must be finite and non-negative, got {eps_swap}")));
    }
    if n_steps == 0 {
        return Err(Error::InvalidParameter("n_steps must be at least 1".into()));
    }
    if tail_tol >= 0.5 {
        return Err(Error::InvalidParameter(format!("tail_tol must be below 1/2, got {tail_tol}")));
    }
    let x_swap = beta * eps_swap;
    let charge_step = x_swap.max(1.0) / (alpha * n_steps as f64);
    let q = x_swap / alpha;
    let x_stop = (1.0 / tail_tol - 1.0).ln();
    let estimate = n_steps as f64 + ((x_stop - x_swap).max(0.0) / (alpha * charge_step)).ceil();
    if estimate > MAX_PROTOCOL_STEPS as f64 {
        return Err(Error::InvalidParameter(format!(
            "protocol would need about {estimate:.0} steps; reduce n_steps or raise tail_tol"
        )));
    }

    let mut steps = Vec::with_capacity(estimate as usize + 3);
    // Population of the raised level; the bit starts maximally mixed.
    let mut p = 0.5;

    if eps_swap > 0.0 {
        let de = eps_swap / n_steps as f64;
        for k in 1..=n_steps {
            let level = if k == n_steps { eps_swap } else { k as f64 * de };
            let cost = p * de;
            let next = excited(beta * level);
            steps.push(ProtocolStep {
                label: "raise-energy",
                level_value: level,
                population_moved: p - next,
                dh: cost,
                dq: 0.0,
            });
            p = next;
        }
    }

    steps.push(ProtocolStep { label: "raise-empty-charge", level_value: q, population_moved: 0.0, dh: 0.0, dq: 0.0 });
    steps.push(ProtocolStep { label: "swap", level_value: q, population_moved: p, dh: -eps_swap * p, dq: q * p });

    let mut level = q;
    let mut k = 0usize;
    while p >= tail_tol {
        k += 1;
        let next_level = q + k as f64 * charge_step;
        let cost = p * charge_step;
        let next = excited(alpha * next_level);
        steps.push(ProtocolStep {
            label: "raise-charge",
            level_value: next_level,
            population_moved: p - next,
            dh: 0.0,
            dq: cost,
        });
        p = next;
        level = next_level;
    }
    let tail = (-alpha * level).exp().ln_1p() / alpha;
    steps.push(ProtocolStep { label: "tail", level_value: f64::INFINITY, population_moved: 0.0, dh: 0.0, dq: tail });

    let dh_total = steps.iter().map(|s| s.dh).sum();
    let dq_total = steps.iter().map(|s| s.dq).sum();
    let final_populations = vec![1.0 - p, p, 0.0, 0.0];
    let final_state = DensityMatrix::from_populations(&final_populations)?;
    Ok(ProtocolTrace {
        steps,
        dh_total,
        dq_total,
        final_populations,
        final_state,
        parameters: ProtocolParameters {
            beta,
            alpha,
            eps_swap,
            n_steps,
            tail_tol,
            charge_step,
            truncation_level: level,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landauer::analytic_erasure_costs;
    use std::f64::consts::LN_2;

    #[test]
    fn single_step_pays_half_the_gap() {
        let t = simulate_erasure_protocol(1.0, 1.0, 1.0, 1, 1e-8).unwrap();
        let raise: f64 = t.steps.iter().filter(|s| s.label == "raise-energy").map(|s| s.dh).sum();
        assert_eq!(raise, 0.5);
        let exact = analytic_erasure_costs(1.0, 1.0, 1.0).unwrap();
        assert!(t.dh_total > exact.dh);
    }

    #[test]
    fn zero_swap_energy_is_pure_charge_erasure() {
        let t = simulate_erasure_protocol(0.0, 1.0, 2.0, 4000, 1e-10).unwrap();
        assert!(t.steps.iter().all(|s| s.label != "raise-energy"));
        assert_eq!(t.dh_total, 0.0);
        assert!((t.dq_total - LN_2 / 2.0).abs() < 1e-3);
        assert!(t.dq_total > LN_2 / 2.0);
    }

    #[test]
    fn totals_and_final_state() {
        let t = simulate_erasure_protocol(0.7, 1.3, 0.8, 500, 1e-6).unwrap();
        let dh: f64 = t.steps.iter().map(|s| s.dh).sum();
        assert_eq!(dh, t.dh_total);
        assert!(t.final_populations[1] < 1e-6);
        assert!((t.final_populations.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        // The swap itself is free in the combined currency.
        let swap = t.steps.iter().find(|s| s.label == "swap").unwrap();
        assert!((1.3 * swap.dh + 0.8 * swap.dq).abs() < 1e-15);
        assert!(1.3 * t.dh_total + 0.8 * t.dq_total >= LN_2);
    }

    #[test]
    fn invalid_inputs() {
        assert!(simulate_erasure_protocol(1.0, 1.0, 1.0, 0, 1e-8).is_err());
        assert!(simulate_erasure_protocol(-1.0, 1.0, 1.0, 10, 1e-8).is_err());
        assert!(simulate_erasure_protocol(f64::INFINITY, 1.0, 1.0, 10, 1e-8).is_err());
        assert!(simulate_erasure_protocol(1.0, 1.0, 1.0, 10, 0.0).is_err());
        assert!(simulate_erasure_protocol(1.0, 1.0, 1.0, 1_000_000_000, 1e-8).is_err());
    }
}
