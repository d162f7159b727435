//! Maximum-entropy inference under expectation constraints.
//!
//! The constrained entropy maximization is solved through its convex dual
//!
//! ```text
//! f(μ) = ln tr exp(−Σ μ_i C_i) + Σ μ_i t_i,      ∂f/∂μ_i = t_i − tr(ρ_μ C_i)
//! ```
//!
//! which holds for non-commuting charges as well. The minimizer is found with
//! BFGS and a backtracking line search, starting from `μ = 0` and using the
//! inverse infinite-temperature covariance of the charges as the initial
//! inverse Hessian.

mod choi;

pub use choi::{
    bloch_matrix, choi, cp_boundary_scan, is_completely_positive, max_image_radius, BlochMapSpec, ChoiMatrix,
    CpBoundary, CpVerdict,
};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::operator::HermitianOperator;
use crate::state::{self, exp_family_state, DensityMatrix, GibbsForm};

/// Knobs for [`solve_gge_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Required bound on `max_i |tr(ρ C_i) − t_i|`.
    pub tol: f64,
    pub max_iter: usize,
    /// Targets are declared infeasible once `‖μ‖₂` exceeds this while the
    /// residual is still above `tol`.
    pub multiplier_bound: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 1000, multiplier_bound: 1e3 }
    }
}

/// Result of a maximum-entropy solve.
#[derive(Debug, Clone, Serialize)]
pub struct GgeSolution {
    pub multipliers: Vec<f64>,
    #[serde(skip)]
    pub state: DensityMatrix,
    pub log_partition: f64,
    pub achieved: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Dual objective at every accepted iterate, starting at `μ = 0`.
    pub dual_objective: Vec<f64>,
}

/// Solve with the default multiplier bound. Non-convergence is an error.
pub fn solve_gge(charges: &[HermitianOperator], targets: &[f64], tol: f64, max_iter: usize) -> Result<GgeSolution> {
    let opts = SolverOptions { tol, max_iter, ..SolverOptions::default() };
    let sol = solve_gge_with(charges, targets, &opts)?;
    if !sol.converged {
        return Err(Error::MaxIterations { iterations: sol.iterations, residual: sol.residual });
    }
    Ok(sol)
}

struct Dual<'a> {
    charges: &'a [HermitianOperator],
    targets: &'a [f64],
}

struct Point {
    mu: DVector<f64>,
    value: f64,
    grad: DVector<f64>,
    form: GibbsForm,
    achieved: Vec<f64>,
}

impl Dual<'_> {
    fn eval(&self, mu: DVector<f64>) -> Result<Point> {
        let exponent = HermitianOperator::linear_combination(mu.as_slice(), self.charges)?;
        let form = exp_family_state(&exponent)?;
        let achieved: Vec<f64> =
            self.charges.iter().map(|q| state::expectation(&form.state, q)).collect::<Result<_>>()?;
        let value = form.log_partition + mu.iter().zip(self.targets).map(|(m, t)| m * t).sum::<f64>();
        let grad = DVector::from_iterator(self.targets.len(), self.targets.iter().zip(&achieved).map(|(t, a)| t - a));
        if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("dual objective".into()));
        }
        Ok(Point { mu, value, grad, form, achieved })
    }
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Infinite-temperature covariance `tr(C_i C_j)/d − tr(C_i) tr(C_j)/d²`,
/// i.e. the dual Hessian at `μ = 0`.
fn covariance_at_origin(charges: &[HermitianOperator]) -> DMatrix<f64> {
    let n = charges.len();
    let d = charges[0].dim() as f64;
    let traces: Vec<f64> = charges.iter().map(|q| linalg::trace(q.matrix()).re).collect();
    DMatrix::from_fn(n, n, |i, j| {
        linalg::trace_product(charges[i].matrix(), charges[j].matrix()).re / d - traces[i] * traces[j] / (d * d)
    })
}

fn validate(charges: &[HermitianOperator], targets: &[f64], opts: &SolverOptions) -> Result<()> {
    let dim = charges
        .first()
        .map(HermitianOperator::dim)
        .ok_or_else(|| Error::InvalidParameter("no charges given".into()))?;
    if let Some(bad) = charges.iter().find(|q| q.dim() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: bad.dim() });
    }
    if targets.len() != charges.len() {
        return Err(Error::DimensionMismatch { expected: charges.len(), got: targets.len() });
    }
    if let Some(t) = targets.iter().find(|t| !t.is_finite()) {
        return Err(Error::NonFinite(format!("target {t}")));
    }
    let positive = |x: f64| x > 0.0;
    if !positive(opts.tol) || opts.max_iter == 0 || !positive(opts.multiplier_bound) {
        return Err(Error::InvalidParameter("tol, max_iter and multiplier_bound must be positive".into()));
    }
    Ok(())
}

/// Solve the maximum-entropy problem. Returns `converged = false` instead of
/// an error when the iteration budget runs out or the line search stalls.
pub fn solve_gge_with(charges: &[HermitianOperator], targets: &[f64], opts: &SolverOptions) -> Result<GgeSolution> {
    validate(charges, targets, opts)?;
    let n = charges.len();

    // Every target must lie strictly inside the spectral range of its charge.
    for (i, (q, &t)) in charges.iter().zip(targets).enumerate() {
        let spec = q.spectrum();
        let (lo, hi) = (spec[0], spec[spec.len() - 1]);
        let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        if hi - lo > slack && (t <= lo + slack || t >= hi - slack) {
            return Err(Error::InfeasibleTargets(format!(
                "target {t} for charge {i} is not strictly inside its spectral range [{lo}, {hi}]"
            )));
        }
    }

    let cov = covariance_at_origin(charges);
    let cov_eig = cov.clone().symmetric_eigen();
    let (cmin, cmax) = cov_eig.eigenvalues.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    if cmax <= 0.0 || cmin <= 1e-12 * cmax {
        return Err(Error::DegenerateCharges(format!(
            "charges are linearly dependent modulo the identity (covariance eigenvalues in [{cmin:.3e}, {cmax:.3e}])"
        )));
    }
    let initial_inverse = {
        let mut inv = cov_eig.clone();
        inv.eigenvalues.iter_mut().for_each(|e| *e = 1.0 / *e);
        inv.recompose()
    };

    let dual = Dual { charges, targets };
    let mut current = dual.eval(DVector::zeros(n))?;
    let mut inv_hessian = initial_inverse.clone();
    let mut objective = vec![current.value];
    let mut iterations = 0;
    let mut converged = max_abs(&current.grad) <= opts.tol;
    let mut fresh_restart = true;

    while !converged && iterations < opts.max_iter {
        iterations += 1;
        let residual = max_abs(&current.grad);
        if current.mu.norm() > opts.multiplier_bound {
            return Err(Error::InfeasibleTargets(format!(
                "multipliers diverged (|μ| = {:.3e}) with residual {residual:.3e}",
                current.mu.norm()
            )));
        }

        let mut direction = -(&inv_hessian * &current.grad);
        let mut slope = current.grad.dot(&direction);
        if slope >= 0.0 {
            inv_hessian = initial_inverse.clone();
            direction = -(&inv_hessian * &current.grad);
            slope = current.grad.dot(&direction);
        }

        // Backtracking (Armijo). Near the optimum the decrease drops below the
        // resolution of f, so a step that shrinks the gradient without raising
        // f beyond rounding is also accepted.
        let round = 1e-14 * (1.0 + current.value.abs());
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial_mu = &current.mu + &direction * step;
            match dual.eval(trial_mu) {
                Ok(trial) => {
                    let armijo = trial.value <= current.value + 1e-4 * step * slope;
                    let flat = trial.value <= current.value + round && trial.grad.norm() < current.grad.norm();
                    if armijo || flat {
                        accepted = Some(trial);
                        break;
                    }
                }
                Err(Error::NonFinite(_)) => {}
                Err(e) => return Err(e),
            }
            step *= 0.5;
        }

        let Some(next) = accepted else {
            if fresh_restart {
                break;
            }
            inv_hessian = initial_inverse.clone();
            fresh_restart = true;
            continue;
        };
        fresh_restart = false;

        let s = &next.mu - &current.mu;
        let y = &next.grad - &current.grad;
        let sy = s.dot(&y);
        if sy > 1e-300 && sy > 1e-12 * s.norm() * y.norm() {
            let rho = 1.0 / sy;
            let eye = DMatrix::<f64>::identity(n, n);
            let left = &eye - &s * y.transpose() * rho;
            let right = &eye - &y * s.transpose() * rho;
            inv_hessian = &left * &inv_hessian * &right + &s * s.transpose() * rho;
        }
        current = next;
        objective.push(current.value);
        converged = max_abs(&current.grad) <= opts.tol;
    }

    let residual = max_abs(&current.grad);
    Ok(GgeSolution {
        multipliers: current.mu.iter().copied().collect(),
        state: current.form.state,
        log_partition: current.form.log_partition,
        achieved: current.achieved,
        residual,
        iterations,
        converged,
        dual_objective: objective,
    })
}

/// The maximum-entropy state sharing all charge expectations with `rho`.
pub fn maxent_project(rho: &DensityMatrix, charges: &[HermitianOperator]) -> Result<DensityMatrix> {
    maxent_project_with(rho, charges, &SolverOptions::default())
}

pub fn maxent_project_with(
    rho: &DensityMatrix,
    charges: &[HermitianOperator],
    opts: &SolverOptions,
) -> Result<DensityMatrix> {
    let targets: Vec<f64> = charges.iter().map(|q| state::expectation(rho, q)).collect::<Result<_>>()?;
    let sol = solve_gge_with(charges, &targets, opts)?;
    if !sol.converged {
        return Err(Error::MaxIterations { iterations: sol.iterations, residual: sol.residual });
    }
    Ok(sol.state)
}
