use std::f64::consts::LN_2;
use std::path::Path;

use gge_thermo::io::{write_csv, MatrixJson, OperatorBundle};
use gge_thermo::landauer::{
    analytic_erasure_costs, discrete_spin_bath_cost, linspace, random_conserving_instance, simulate_erasure_protocol,
    tradeoff_csv, tradeoff_curve, verify_landauer, TradeoffPoint,
};
use gge_thermo::maxent::{self, choi, cp_boundary_scan, max_image_radius, BlochMapSpec, SolverOptions};
use gge_thermo::passivity::{self, ergotropy, is_passive, n_copy_ergotropy};
use gge_thermo::thermal_ops::{self, ThermalOpSpec};
use gge_thermo::{commutator_norm, ChargeSet, DensityMatrix, HermitianOperator, Matrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Format, Params};

#[derive(Debug)]
pub enum Failure {
    /// Bad input or parameters; exit code 1.
    Invalid(String),
    /// The numerics did not converge; exit code 2.
    NonConvergence(String),
}

impl From<gge_thermo::Error> for Failure {
    fn from(e: gge_thermo::Error) -> Self {
        if e.is_convergence_failure() {
            Failure::NonConvergence(e.to_string())
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

type Outcome = Result<(), Failure>;

const DISCRETE_SERIES_NOTE: &str =
    "discrete spin-bath series summed from n = 0, so the cost tends to hbar/2 as alpha grows";

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Invalid(msg.into())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data");
    s.push('\n');
    s
}

fn emit(p: &Params, text: &str) -> Outcome {
    match &p.output {
        Some(path) => std::fs::write(path, text).map_err(|e| invalid(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_bundle(p: &Params) -> Result<OperatorBundle, Failure> {
    let path = p.input.as_ref().ok_or_else(|| invalid("--input is required for this command"))?;
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    OperatorBundle::from_json(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn positive(name: &str, v: f64) -> Result<f64, Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("--{name} must be positive, got {v}")))
    }
}

#[derive(Serialize)]
struct GgeOutput<'a> {
    #[serde(flatten)]
    solution: &'a maxent::GgeSolution,
    state: MatrixJson,
}

/// Bundle: operator list `charges`, number list `targets`.
pub fn gge_solve(p: &Params) -> Outcome {
    let bundle = read_bundle(p)?;
    let charges = bundle.operator_list("charges")?;
    let targets = bundle.numbers("targets")?;
    let opts =
        SolverOptions { tol: p.tol.unwrap_or(1e-9), max_iter: p.max_iter.unwrap_or(1000), ..SolverOptions::default() };
    let sol = maxent::solve_gge_with(&charges, targets, &opts)?;
    if !sol.converged {
        return Err(Failure::NonConvergence(format!(
            "solver stopped after {} iterations with residual {:.3e}",
            sol.iterations, sol.residual
        )));
    }
    emit(p, &to_json(&GgeOutput { solution: &sol, state: MatrixJson::from_matrix(sol.state.matrix()) }))
}

fn eps_grid(p: &Params, default_max: f64) -> Result<Vec<f64>, Failure> {
    let lo = p.eps_min.unwrap_or(0.0);
    let hi = p.eps_max.unwrap_or(default_max);
    let n = p.eps_count.unwrap_or(100);
    if !(lo >= 0.0 && hi >= lo && hi.is_finite()) || n == 0 {
        return Err(invalid(format!("bad epsilon grid [{lo}, {hi}] x {n}")));
    }
    Ok(linspace(lo, hi, n))
}

fn curve(beta: f64, alpha: f64, grid: &[f64]) -> Result<Vec<TradeoffPoint>, Failure> {
    let points: Vec<_> = grid
        .par_iter()
        .map(|&e| tradeoff_curve(beta, alpha, &[e]).map(|mut v| v.remove(0)))
        .collect::<Result<_, _>>()?;
    Ok(points)
}

pub fn erasure_curve(p: &Params) -> Outcome {
    let beta = positive("beta", p.beta.unwrap_or(1.0))?;
    let alpha = positive("alpha", p.alpha.unwrap_or(1.0))?;
    let points = curve(beta, alpha, &eps_grid(p, 5.0)?)?;
    match p.format.unwrap_or(Format::Csv) {
        Format::Csv => emit(p, &tradeoff_csv(&points)),
        Format::Json => emit(p, &to_json(&points)),
    }
}

pub fn erasure_simulate(p: &Params) -> Outcome {
    if p.format == Some(Format::Csv) {
        return Err(invalid("erasure-simulate writes JSON only"));
    }
    let trace = simulate_erasure_protocol(
        p.eps.unwrap_or(1.0),
        p.beta.unwrap_or(1.0),
        p.alpha.unwrap_or(1.0),
        p.steps.unwrap_or(10_000),
        p.tail_tol.unwrap_or(1e-8),
    )?;
    emit(p, &to_json(&trace))
}

#[derive(Serialize)]
struct DiscreteRow {
    alpha: f64,
    discrete: f64,
    continuous: f64,
}

fn discrete_rows(alphas: &[f64], hbar: f64, tail_tol: f64) -> Result<Vec<DiscreteRow>, Failure> {
    let rows: Vec<_> = alphas
        .par_iter()
        .map(|&a| {
            discrete_spin_bath_cost(a, hbar, tail_tol).map(|d| DiscreteRow {
                alpha: a,
                discrete: d,
                continuous: LN_2 / a,
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(rows)
}

fn discrete_csv(rows: &[DiscreteRow]) -> String {
    write_csv(&["alpha", "discrete", "continuous"], rows.iter().map(|r| vec![r.alpha, r.discrete, r.continuous]))
}

/// A single `--alpha`, or a grid when any of `--alpha-min/--alpha-max/--alpha-count` is set.
pub fn discrete_cost(p: &Params) -> Outcome {
    let hbar = positive("hbar", p.hbar.unwrap_or(1.0))?;
    let tail_tol = positive("tail-tol", p.tail_tol.unwrap_or(1e-12))?;
    let grid_requested = p.alpha_min.is_some() || p.alpha_max.is_some() || p.alpha_count.is_some();
    let alphas = match (grid_requested, p.alpha) {
        (false, Some(a)) => vec![a],
        _ => {
            let lo = positive("alpha-min", p.alpha_min.unwrap_or(0.01))?;
            let hi = positive("alpha-max", p.alpha_max.unwrap_or(10.0))?;
            let n = p.alpha_count.unwrap_or(100);
            if hi < lo || n == 0 {
                return Err(invalid(format!("bad alpha grid [{lo}, {hi}] x {n}")));
            }
            linspace(lo, hi, n)
        }
    };
    let rows = discrete_rows(&alphas, hbar, tail_tol)?;
    eprintln!("note: {DISCRETE_SERIES_NOTE}");
    match p.format.unwrap_or(Format::Csv) {
        Format::Csv => emit(p, &discrete_csv(&rows)),
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                hbar: f64,
                tail_tol: f64,
                note: &'a str,
                rows: Vec<DiscreteRow>,
            }
            emit(p, &to_json(&Out { hbar, tail_tol, note: DISCRETE_SERIES_NOTE, rows }))
        }
    }
}

#[derive(Serialize)]
struct PassivityOutput {
    value: f64,
    passive: bool,
    commutator_norm: f64,
    n: usize,
    /// Empty when the copies are too large to diagonalize as a whole.
    witness_permutation: Vec<usize>,
    ordered: Option<bool>,
    criteria_agree: Option<bool>,
}

fn charge_from_bundle(bundle: &OperatorBundle) -> Result<HermitianOperator, Failure> {
    if bundle.operators.contains_key("charge") {
        return Ok(bundle.operator("charge")?);
    }
    let charges = bundle.operator_list("charges")?;
    let weights = bundle.numbers("multipliers")?;
    Ok(HermitianOperator::linear_combination(weights, &charges)?)
}

/// Bundle: operator `state` and either operator `charge` or operator list
/// `charges` with number list `multipliers` (checked against `Σ μ_i C_i`).
pub fn passivity_check(p: &Params) -> Outcome {
    let bundle = read_bundle(p)?;
    let rho = bundle.state("state")?;
    let charge = charge_from_bundle(&bundle)?;
    let tol = p.tol.unwrap_or(passivity::PASSIVITY_TOL);
    let n = p.copies.unwrap_or(1);
    let out = if n == 1 {
        let r = is_passive(&rho, &charge, tol)?;
        PassivityOutput {
            value: r.ergotropy,
            passive: r.passive,
            commutator_norm: r.commutator_norm,
            n,
            witness_permutation: r.witness_permutation,
            ordered: Some(r.ordered),
            criteria_agree: Some(r.criteria_agree),
        }
    } else {
        let value = n_copy_ergotropy(&rho, &charge, n)?;
        let small = u32::try_from(n).ok().and_then(|e| rho.dim().checked_pow(e)).is_some_and(|t| t <= 256);
        let witness_permutation =
            if small { ergotropy(&rho.n_copies(n), &charge.n_copy_total(n)?)?.witness_permutation } else { Vec::new() };
        PassivityOutput {
            value,
            passive: value <= tol,
            commutator_norm: commutator_norm(&rho, &charge)?,
            n,
            witness_permutation,
            ordered: None,
            criteria_agree: None,
        }
    };
    emit(p, &to_json(&out))
}

#[derive(Serialize)]
struct CpOutput {
    map: BlochMapSpec,
    choi_eigenvalues: Vec<f64>,
    min_eigenvalue: f64,
    completely_positive: bool,
    trace_preservation_residual: f64,
    max_image_radius: f64,
    positive_on_samples: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    boundary: Option<maxent::CpBoundary>,
}

/// Input: a JSON `{"linear": [[..]], "offset": [..]}` map, or the approximate
/// pancake from `--radius` and `--z-offset` (the exact pancake by default).
pub fn cp_check(p: &Params) -> Outcome {
    let map = match &p.input {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<BlochMapSpec>(&text)
                .map_err(|e| invalid(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column())))?
        }
        None => BlochMapSpec::pancake(p.radius.unwrap_or(1.0), p.z_offset.unwrap_or(0.0)),
    };
    let ch = choi(&map);
    let tol = p.tol.unwrap_or(1e-10);
    let radius = max_image_radius(&map, 4000);
    let boundary = match p.grid {
        Some(g) => Some(cp_boundary_scan(p.z_offset.unwrap_or(0.0), g)?),
        None => None,
    };
    emit(
        p,
        &to_json(&CpOutput {
            map,
            completely_positive: ch.min_eigenvalue >= -tol,
            min_eigenvalue: ch.min_eigenvalue,
            choi_eigenvalues: ch.eigenvalues,
            trace_preservation_residual: ch.trace_preservation_residual,
            max_image_radius: radius,
            positive_on_samples: radius <= 1.0 + 1e-12,
            boundary,
        }),
    )
}

#[derive(Serialize)]
struct LandauerSuite {
    trials: usize,
    seed: u64,
    max_identity_residual: f64,
    min_slack: f64,
    bound_holds: bool,
}

fn landauer_suite(trials: usize, seed: u64) -> Result<LandauerSuite, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let instances: Vec<_> = (0..trials).map(|_| random_conserving_instance(&mut rng)).collect();
    let reports: Vec<_> = instances
        .par_iter()
        .map(|i| verify_landauer(&i.rho_s, &i.bath, &i.unitary, i.dims))
        .collect::<Result<_, _>>()?;
    let max_identity_residual = reports.iter().map(|r| r.identity_residual).fold(0.0, f64::max);
    let min_slack = reports.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
    Ok(LandauerSuite {
        trials,
        seed,
        max_identity_residual,
        min_slack,
        bound_holds: max_identity_residual <= 1e-9 && min_slack >= -1e-9,
    })
}

/// Bundle: operators `state` and `unitary`, operator list `bath_charges`,
/// number list `multipliers`. Without `--input`, runs `--trials` random
/// conserving instances from `--seed`.
pub fn landauer_verify(p: &Params) -> Outcome {
    if p.input.is_none() {
        let suite = landauer_suite(p.trials.unwrap_or(1000), p.seed.unwrap_or(0))?;
        return emit(p, &to_json(&suite));
    }
    let bundle = read_bundle(p)?;
    let rho = bundle.state("state")?;
    let u = bundle.matrix("unitary")?;
    let bath = ChargeSet::new(bundle.operator_list("bath_charges")?, bundle.numbers("multipliers")?.to_vec())?;
    let report = verify_landauer(&rho, &bath, &u, (rho.dim(), bath.dim()))?;
    emit(p, &to_json(&report))
}

#[derive(Serialize)]
struct ThermalOpOutput {
    residuals: Vec<f64>,
    conserving: bool,
    tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    output_state: Option<MatrixJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    balance: Option<thermal_ops::JointChargeBalance>,
}

fn thermal_op_spec(bundle: &OperatorBundle) -> Result<ThermalOpSpec, Failure> {
    let bath_mu = bundle.numbers("bath_multipliers")?.to_vec();
    let system_mu = match bundle.numbers.get("system_multipliers") {
        Some(m) => m.clone(),
        None => bath_mu.clone(),
    };
    let system = ChargeSet::new(bundle.operator_list("system_charges")?, system_mu)?;
    let bath = ChargeSet::new(bundle.operator_list("bath_charges")?, bath_mu)?;
    let dims = bundle.indices.get("subsystem_dims").cloned().unwrap_or_else(|| vec![system.dim(), bath.dim()]);
    let traced = bundle.indices.get("traced_out").cloned().unwrap_or_else(|| vec![dims.len() - 1]);
    Ok(ThermalOpSpec::with_partition(system, bath, bundle.matrix("unitary")?, dims, traced)?)
}

/// Bundle: operator lists `system_charges` and `bath_charges`, number list
/// `bath_multipliers` (and optionally `system_multipliers`), operator
/// `unitary`, optional operator `state`, optional index lists
/// `subsystem_dims` and `traced_out`. Without `--input`, reports the qutrit
/// coherence-injection example.
pub fn thermalop_check(p: &Params) -> Outcome {
    if p.input.is_none() {
        return emit(p, &to_json(&thermal_ops::coherence_injection_demo()));
    }
    let bundle = read_bundle(p)?;
    let spec = thermal_op_spec(&bundle)?;
    let tol = p.tol.unwrap_or(thermal_ops::CONSERVATION_TOL);
    let residuals = thermal_ops::conservation_residuals(&spec);
    let (output_state, balance) = if bundle.operators.contains_key("state") {
        let rho: DensityMatrix = bundle.state("state")?;
        let out = thermal_ops::apply_thermal_operation(&spec, &rho)?;
        (Some(MatrixJson::from_matrix(out.matrix())), Some(thermal_ops::joint_charge_balance(&spec, &rho)?))
    } else {
        (None, None)
    };
    emit(
        p,
        &to_json(&ThermalOpOutput {
            conserving: residuals.iter().all(|&r| r <= tol),
            residuals,
            tol,
            output_state,
            balance,
        }),
    )
}

#[derive(Serialize)]
struct CurveSummary {
    beta: f64,
    alpha: f64,
    file: String,
    /// `(ΔH, ΔQ)` at the smallest and largest grid energy.
    first_point: (f64, f64),
    last_point: (f64, f64),
    /// Costs in the `ε → ∞` limit.
    energy_limit: (f64, f64),
    max_identity_residual: f64,
}

#[derive(Serialize)]
struct DemoSummary {
    tradeoff: Vec<CurveSummary>,
    discrete_file: String,
    discrete_cost_large_alpha: f64,
    continuous_cost_alpha_one: f64,
    protocol: ProtocolSummary,
    pancake_min_choi_eigenvalue: f64,
    landauer_suite: LandauerSuite,
    coherence_injection: thermal_ops::CoherenceInjectionReport,
    injection_bundle: String,
    notes: Vec<&'static str>,
}

#[derive(Serialize)]
struct ProtocolSummary {
    eps_swap: f64,
    n_steps: usize,
    simulated: (f64, f64),
    analytic: (f64, f64),
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<String, Failure> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))?;
    Ok(name.to_owned())
}

/// Trade-off curves, discrete costs and a summary of the headline checks, written into the
/// `--output` directory (default `gge-thermo-demo`).
pub fn demo(p: &Params) -> Outcome {
    let dir = p.output.clone().unwrap_or_else(|| "gge-thermo-demo".into());
    std::fs::create_dir_all(&dir).map_err(|e| invalid(format!("cannot create {}: {e}", dir.display())))?;
    let grid = eps_grid(p, 20.0)?;

    let mut tradeoff = Vec::new();
    for (tag, beta, alpha) in [("a", 1.0, 1.0), ("b", 2.0, 1.0), ("c", 1.0, 2.0)] {
        let points = curve(beta, alpha, &grid)?;
        let file = write_file(&dir, &format!("tradeoff_{tag}_beta{beta}_alpha{alpha}.csv"), &tradeoff_csv(&points))?;
        let first = points.first().expect("non-empty grid");
        let last = points.last().expect("non-empty grid");
        let limit = analytic_erasure_costs(f64::INFINITY, beta, alpha)?;
        tradeoff.push(CurveSummary {
            beta,
            alpha,
            file,
            first_point: (first.dh, first.dq),
            last_point: (last.dh, last.dq),
            energy_limit: (limit.dh, limit.dq),
            max_identity_residual: points.iter().map(|q| q.identity_residual).fold(0.0, f64::max),
        });
    }

    let hbar = p.hbar.unwrap_or(1.0);
    let alphas = linspace(p.alpha_min.unwrap_or(0.05), p.alpha_max.unwrap_or(10.0), p.alpha_count.unwrap_or(200));
    let rows = discrete_rows(&alphas, hbar, 1e-12)?;
    let discrete_file = write_file(&dir, "discrete_cost.csv", &discrete_csv(&rows))?;

    let steps = p.steps.unwrap_or(10_000);
    let trace = simulate_erasure_protocol(1.0, 1.0, 1.0, steps, p.tail_tol.unwrap_or(1e-8))?;
    let exact = analytic_erasure_costs(1.0, 1.0, 1.0)?;

    let (h, u) = (thermal_ops::qutrit_hamiltonian(), thermal_ops::qutrit_injection_unitary());
    let mut bundle = OperatorBundle::default();
    bundle.insert_list("system_charges", &[h.matrix().clone()]);
    bundle.insert_list("bath_charges", &[Matrix::zeros(1, 1)]);
    bundle.numbers.insert("bath_multipliers".into(), vec![1.0]);
    bundle.insert("unitary", &u);
    bundle.insert("state", gge_thermo::gge_state(&ChargeSet::gibbs(h, 1.0)?)?.matrix());
    let injection_bundle = write_file(&dir, "qutrit_injection_bundle.json", &bundle.to_json())?;

    let summary = DemoSummary {
        tradeoff,
        discrete_file,
        discrete_cost_large_alpha: discrete_spin_bath_cost(50.0, hbar, 1e-15)?,
        continuous_cost_alpha_one: LN_2,
        protocol: ProtocolSummary {
            eps_swap: 1.0,
            n_steps: steps,
            simulated: (trace.dh_total, trace.dq_total),
            analytic: (exact.dh, exact.dq),
        },
        pancake_min_choi_eigenvalue: choi(&BlochMapSpec::pancake(1.0, 0.0)).min_eigenvalue,
        landauer_suite: landauer_suite(p.trials.unwrap_or(200), p.seed.unwrap_or(0))?,
        coherence_injection: thermal_ops::coherence_injection_demo(),
        injection_bundle,
        notes: vec![DISCRETE_SERIES_NOTE],
    };
    write_file(&dir, "summary.json", &to_json(&summary))?;
    eprintln!("wrote demo outputs to {}", dir.display());
    Ok(())
}
