//! Feasibility sweep over coupling strength `ε` and mixing `α`.
//!
//! Every grid point is judged twice:
//!
//! * by simulation: exact evolution on a uniform time grid, with the ancilla
//!   PPT at every sample and the reduced `ab` state NPT at some sample;
//! * by an analytic chain that uses only the perturbative bounds.
//!
//! The analytic chain. Let `δ = max_± (𝒩₁(t_max) + 𝒩₂) ≥ ‖U − U_eff‖` and
//! write `ρ(t) = ρ_eff(t) + Δ` with `‖Δ‖_F ≤ 2δ‖ρ(0)‖_F`. Under `U_eff` the
//! ancilla stays diagonal, so `ρ_eff = Σ_k ⅓ ρ_ab⁽ᵏ⁾ ⊗ |k⟩⟨k|`, and each
//! `ρ_ab⁽ᵏ⁾` is a unitary image of `ρ_a ⊗ ρ_b` whose smallest eigenvalue is
//! `α²/(4(1+α)²)`. Hence with `q = (α/(1+α))²`,
//!
//! ```text
//! ρ = [ρ_eff − q I/12] + q [I/12 + Δ/q]
//! ```
//!
//! where the first bracket is positive and block diagonal in the ancilla
//! basis, hence separable across `c|(ab)`, and the second is separable as soon
//! as `‖Δ‖_F / q` fits inside the separable ball of radius `1/√(12·11)`.
//! For the pair, negativity moves by at most `‖ρ_ab − σ_ab‖_F ≤ 2δ` on a 2×2
//! system, so `max_t N(ρ_eff,ab) − 2δ` above the entanglement floor certifies
//! entanglement under the true evolution.

use rayon::prelude::*;
use serde::Serialize;

use super::evolution::{initial_state, EvolutionMode};
use super::ContinuousModel;
use crate::error::{Error, Result};
use crate::qstate::separable_ball_radius;

/// Largest `c|(ab)` negativity accepted as "ancilla separable".
pub const ANCILLA_SEPARABLE_TOL: f64 = 1e-10;

/// Smallest reduced `ab` negativity accepted as "entangled".
pub const AB_ENTANGLED_TOL: f64 = 1e-6;

/// Rounds to 15 significant digits, so `0.02:0.2:10` yields exactly the
/// doubles nearest `0.04`, `0.1`, ... rather than values one ulp away.
fn snap(x: f64) -> f64 {
    format!("{x:.14e}").parse().expect("formatted float parses")
}

/// Inclusive grid of `count` points from `start` to `stop`, each point
/// rounded to 15 significant digits.
pub fn range_grid(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 || !start.is_finite() || !stop.is_finite() {
        return Err(Error::InvalidArgument(
            "range needs finite bounds and a positive count".into(),
        ));
    }
    if count == 1 {
        return if start == stop {
            Ok(vec![start])
        } else {
            Err(Error::InvalidArgument(
                "a one-point range needs start == stop".into(),
            ))
        };
    }
    Ok((0..count)
        .map(|k| snap(start + (stop - start) * k as f64 / (count - 1) as f64))
        .collect())
}

/// Parses `start:stop:count` (inclusive) or a single number.
pub fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let bad = |what: &str| Error::InvalidArgument(format!("bad range '{spec}': {what}"));
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [single] => {
            let v: f64 = single.trim().parse().map_err(|_| bad("not a number"))?;
            if v.is_finite() {
                Ok(vec![v])
            } else {
                Err(bad("not finite"))
            }
        }
        [start, stop, count] => {
            let start: f64 = start
                .trim()
                .parse()
                .map_err(|_| bad("start is not a number"))?;
            let stop: f64 = stop
                .trim()
                .parse()
                .map_err(|_| bad("stop is not a number"))?;
            let count: usize = count
                .trim()
                .parse()
                .map_err(|_| bad("count is not a positive integer"))?;
            range_grid(start, stop, count)
        }
        _ => Err(bad("expected start:stop:count")),
    }
}

/// Analytic verdict for one `(ε, α)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticChain {
    /// `max_± (𝒩₁(t_max) + 𝒩₂)`.
    pub perturbation_budget: f64,
    /// Upper bound on `‖ρ(t) − ρ_eff(t)‖_F`.
    pub state_deviation: f64,
    /// Weight `q` of the maximally mixed state available to absorb the deviation.
    pub noise_weight: f64,
    pub ball_radius: f64,
    pub ancilla_certified: bool,
    /// Peak reduced `ab` negativity under `U_eff`.
    pub effective_max_neg_ab: f64,
    pub ab_certified: bool,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub alpha: f64,
    pub t_max: f64,
    pub max_neg_c_ab: f64,
    pub min_pt_eig_c_ab: f64,
    pub max_neg_a_bc: f64,
    pub max_neg_b_ac: f64,
    pub max_neg_ab: f64,
    pub ancilla_separable_all_t: bool,
    pub ab_entangled: bool,
    pub feasible_simulated: bool,
    pub analytic: AnalyticChain,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub t_max_factor: f64,
    pub steps: usize,
    pub rows: Vec<SweepRow>,
    /// Feasible at some ε implies feasible at every smaller grid ε.
    pub analytic_monotone: bool,
    /// Largest grid ε below which the analytic chain is feasible throughout.
    pub analytic_threshold: Option<f64>,
    /// Largest grid ε with some simulated-feasible α.
    pub simulated_max_feasible_epsilon: Option<f64>,
}

impl SweepTable {
    pub fn feasible_alphas(&self, epsilon: f64) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.epsilon == epsilon && r.feasible_simulated)
            .map(|r| r.alpha)
            .collect()
    }

    pub fn analytic_feasible_alphas(&self, epsilon: f64) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.epsilon == epsilon && r.analytic.feasible)
            .map(|r| r.alpha)
            .collect()
    }
}

fn analytic_chain(
    model: &ContinuousModel,
    alpha: f64,
    budget: f64,
    t_max: f64,
    steps: usize,
) -> Result<AnalyticChain> {
    let rho0 = initial_state(alpha)?;
    let state_deviation = 2.0 * budget * rho0.frobenius_norm();
    let noise_weight = (alpha / (1.0 + alpha)).powi(2);
    let ball_radius = separable_ball_radius(rho0.dim());
    let ancilla_certified = noise_weight > 0.0 && state_deviation <= noise_weight * ball_radius;
    let effective = model.run_trace(alpha, t_max, steps, EvolutionMode::Effective)?;
    let effective_max_neg_ab = effective.max_neg_ab();
    let ab_certified = effective_max_neg_ab - 2.0 * budget >= AB_ENTANGLED_TOL;
    Ok(AnalyticChain {
        perturbation_budget: budget,
        state_deviation,
        noise_weight,
        ball_radius,
        ancilla_certified,
        effective_max_neg_ab,
        ab_certified,
        feasible: ancilla_certified && ab_certified,
    })
}

/// Runs every `(ε, α)` pair; `t_max = t_max_factor / ε²`.
pub fn sweep(
    epsilons: &[f64],
    alphas: &[f64],
    t_max_factor: f64,
    steps: usize,
) -> Result<SweepTable> {
    if epsilons.is_empty() || alphas.is_empty() {
        return Err(Error::InvalidArgument(
            "sweep grids must be non-empty".into(),
        ));
    }
    if !(t_max_factor.is_finite() && t_max_factor > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t_max factor must be positive, got {t_max_factor}"
        )));
    }
    if let Some(&bad) = epsilons.iter().find(|&&e| e.is_nan() || e <= 0.0) {
        return Err(Error::BadEpsilon(bad));
    }
    let budgets: Vec<(ContinuousModel, f64, f64)> = epsilons
        .par_iter()
        .map(|&eps| {
            let model = ContinuousModel::new(eps)?;
            let t_max = t_max_factor / (eps * eps);
            Ok((model, t_max, model.perturbation_budget(t_max)?))
        })
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, f64)> = (0..epsilons.len())
        .flat_map(|i| alphas.iter().map(move |&a| (i, a)))
        .collect();
    let rows: Vec<SweepRow> = jobs
        .par_iter()
        .map(|&(i, alpha)| {
            let (model, t_max, budget) = budgets[i];
            let trace = model.run_trace(alpha, t_max, steps, EvolutionMode::Exact)?;
            let max_neg_c_ab = trace.max_neg_c_ab();
            let max_neg_ab = trace.max_neg_ab();
            let ancilla_separable_all_t = max_neg_c_ab <= ANCILLA_SEPARABLE_TOL;
            let ab_entangled = max_neg_ab >= AB_ENTANGLED_TOL;
            Ok(SweepRow {
                epsilon: model.epsilon(),
                alpha,
                t_max,
                max_neg_c_ab,
                min_pt_eig_c_ab: trace.min_pt_margin(),
                max_neg_a_bc: trace.max_neg_a_bc(),
                max_neg_b_ac: trace.max_neg_b_ac(),
                max_neg_ab,
                ancilla_separable_all_t,
                ab_entangled,
                feasible_simulated: ancilla_separable_all_t && ab_entangled,
                analytic: analytic_chain(&model, alpha, budget, t_max, steps)?,
            })
        })
        .collect::<Result<_>>()?;

    let mut eps_sorted: Vec<f64> = epsilons.to_vec();
    eps_sorted.sort_by(f64::total_cmp);
    eps_sorted.dedup();
    let any_row = |eps: f64, pred: &dyn Fn(&SweepRow) -> bool| {
        rows.iter().any(|r| r.epsilon == eps && pred(r))
    };
    let analytic_flags: Vec<bool> = eps_sorted
        .iter()
        .map(|&e| any_row(e, &|r| r.analytic.feasible))
        .collect();
    let analytic_monotone = analytic_flags.windows(2).all(|w| w[0] || !w[1]);
    let analytic_threshold = eps_sorted
        .iter()
        .zip(&analytic_flags)
        .take_while(|(_, &ok)| ok)
        .map(|(&e, _)| e)
        .last();
    let simulated_max_feasible_epsilon = eps_sorted
        .iter()
        .copied()
        .rev()
        .find(|&e| any_row(e, &|r| r.feasible_simulated));

    Ok(SweepTable {
        t_max_factor,
        steps,
        rows,
        analytic_monotone,
        analytic_threshold,
        simulated_max_feasible_epsilon,
    })
}
