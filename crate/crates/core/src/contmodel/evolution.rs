//! Exact, effective and Trotterized evolution of the product initial state,
//! with negativities recorded along the way.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sector_projector, ContinuousModel, Sign, DIMS};
use crate::error::{Error, Result};
use crate::matcore::{hermitian_eig_unchecked, kron, kron_all, CMat, HermitianEigen, C64};
use crate::qstate::{
    min_partial_transpose_eigenvalue, negativity, partial_trace, tripartite_cuts, Bipartition,
    DensityMatrix,
};

/// Which propagator drives the evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "steps", rename_all = "lowercase")]
pub enum EvolutionMode {
    /// `e^{−iHt}` from the exact spectrum.
    Exact,
    /// Block-diagonal `U_eff`.
    Effective,
    /// `(e^{−iH_B t/n} e^{−iH_A t/n})^n`.
    Trotter(usize),
}

impl fmt::Display for EvolutionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvolutionMode::Exact => write!(f, "exact"),
            EvolutionMode::Effective => write!(f, "effective"),
            EvolutionMode::Trotter(n) => write!(f, "trotter({n})"),
        }
    }
}

impl EvolutionMode {
    fn validate(self) -> Result<Self> {
        match self {
            EvolutionMode::Trotter(0) => Err(Error::BadMode(
                "trotter mode needs at least one step".into(),
            )),
            m => Ok(m),
        }
    }
}

/// Product state `ρ_a(α) ⊗ ρ_b(α) ⊗ I₃/3` with
/// `ρ_x(α) = (|0⟩⟨0| + α I₂/2)/(1+α)`.
pub fn initial_state(alpha: f64) -> Result<DensityMatrix> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::BadAlpha(alpha));
    }
    let qubit = CMat::from_real_diag(&[
        (1.0 + alpha / 2.0) / (1.0 + alpha),
        (alpha / 2.0) / (1.0 + alpha),
    ]);
    let ancilla = CMat::identity(3).scale_real(1.0 / 3.0);
    DensityMatrix::new(kron_all(&[&qubit, &qubit, &ancilla]), DIMS.to_vec())
}

fn diag_phases(levels: &[f64], t: f64) -> CMat {
    let phases: Vec<C64> = levels
        .iter()
        .map(|&l| C64::from_polar(1.0, -l * t))
        .collect();
    CMat::from_diag(&phases)
}

/// Propagator factory for one model; caches the spectra it needs.
pub(crate) struct Propagator {
    model: ContinuousModel,
    mode: EvolutionMode,
    exact: Option<HermitianEigen>,
    trotter: Option<(HermitianEigen, HermitianEigen)>,
}

impl Propagator {
    pub(crate) fn new(model: ContinuousModel, mode: EvolutionMode) -> Result<Self> {
        let mode = mode.validate()?;
        let exact = matches!(mode, EvolutionMode::Exact)
            .then(|| hermitian_eig_unchecked(&model.hamiltonian()));
        let trotter = matches!(mode, EvolutionMode::Trotter(_)).then(|| {
            let (h_a, h_b) = model.trotter_split();
            (hermitian_eig_unchecked(&h_a), hermitian_eig_unchecked(&h_b))
        });
        Ok(Propagator {
            model,
            mode,
            exact,
            trotter,
        })
    }

    pub(crate) fn at(&self, t: f64) -> CMat {
        match self.mode {
            EvolutionMode::Exact => self.exact.as_ref().expect("exact spectrum").propagator(t),
            EvolutionMode::Effective => self.model.u_eff(t),
            EvolutionMode::Trotter(n) => {
                let (a, b) = self.trotter.as_ref().expect("trotter spectra");
                let dt = t / n as f64;
                (&b.propagator(dt) * &a.propagator(dt)).powi(n as u32)
            }
        }
    }
}

impl ContinuousModel {
    /// `U_eff(t) = e^{−iDt} ⊕ e^{−iH₀t} ⊕ e^{−iH₀t} ⊕ e^{−iDt}` over the
    /// sectors `++, +−, −+, −−`, written back in `(a, b, c)` order.
    pub fn u_eff(&self, t: f64) -> CMat {
        let d_block = diag_phases(&self.approx_eigenvalues(), t);
        let h0_block = diag_phases(&[0.0, 1.0, 2.0], t);
        let equal =
            &sector_projector(Sign::Plus, Sign::Plus) + &sector_projector(Sign::Minus, Sign::Minus);
        let mixed =
            &sector_projector(Sign::Plus, Sign::Minus) + &sector_projector(Sign::Minus, Sign::Plus);
        &kron(&equal, &d_block) + &kron(&mixed, &h0_block)
    }

    pub fn exact_unitary(&self, t: f64) -> CMat {
        hermitian_eig_unchecked(&self.hamiltonian()).propagator(t)
    }

    /// First-order Trotter product with `n` steps.
    pub fn trotter_unitary(&self, t: f64, n: usize) -> Result<CMat> {
        Ok(Propagator::new(*self, EvolutionMode::Trotter(n))?.at(t))
    }

    pub fn unitary(&self, t: f64, mode: EvolutionMode) -> Result<CMat> {
        Ok(Propagator::new(*self, mode)?.at(t))
    }

    /// `U ρ U†` with `U` chosen by `mode`.
    pub fn evolve(
        &self,
        rho: &DensityMatrix,
        t: f64,
        mode: EvolutionMode,
    ) -> Result<DensityMatrix> {
        if rho.dims() != DIMS {
            return Err(Error::BadDims {
                expected: DIMS.to_vec(),
                got: rho.dims().to_vec(),
            });
        }
        rho.evolve_unitary(&self.unitary(t, mode)?)
    }

    /// Evolves [`initial_state`]`(alpha)` over `steps` uniformly spaced times in
    /// `[0, t_max]`.
    pub fn run_trace(
        &self,
        alpha: f64,
        t_max: f64,
        steps: usize,
        mode: EvolutionMode,
    ) -> Result<EvolutionTrace> {
        if steps < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 time steps, got {steps}"
            )));
        }
        if !(t_max.is_finite() && t_max >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "t_max must be non-negative, got {t_max}"
            )));
        }
        let rho0 = initial_state(alpha)?;
        let prop = Propagator::new(*self, mode)?;
        let times: Vec<f64> = (0..steps)
            .map(|k| t_max * k as f64 / (steps - 1) as f64)
            .collect();
        let points: Vec<TracePoint> = times
            .par_iter()
            .map(|&t| {
                let rho = rho0.evolve_unitary(&prop.at(t))?;
                TracePoint::measure(&rho)
            })
            .collect::<Result<_>>()?;
        Ok(EvolutionTrace::assemble(times, points, mode))
    }
}

/// Negativities of one tripartite `(a, b, c)` state.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TracePoint {
    pub neg_a_bc: f64,
    pub neg_b_ac: f64,
    pub neg_c_ab: f64,
    pub min_pt_c_ab: f64,
    pub neg_ab: f64,
}

impl TracePoint {
    pub(crate) fn measure(rho: &DensityMatrix) -> Result<Self> {
        let [a_bc, b_ac, c_ab] = tripartite_cuts();
        let ab = partial_trace(rho, &[0, 1])?;
        Ok(TracePoint {
            neg_a_bc: negativity(rho, &a_bc)?,
            neg_b_ac: negativity(rho, &b_ac)?,
            neg_c_ab: negativity(rho, &c_ab)?,
            min_pt_c_ab: min_partial_transpose_eigenvalue(rho, &c_ab)?,
            neg_ab: negativity(&ab, &Bipartition::split([0], 2)?)?,
        })
    }

    pub(crate) fn measure_ancilla_and_pair(rho: &DensityMatrix) -> Result<(f64, f64, f64)> {
        let c_ab = Bipartition::split([2], 3)?;
        let ab = partial_trace(rho, &[0, 1])?;
        Ok((
            negativity(rho, &c_ab)?,
            min_partial_transpose_eigenvalue(rho, &c_ab)?,
            negativity(&ab, &Bipartition::split([0], 2)?)?,
        ))
    }
}

/// Negativities of the evolving state on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionTrace {
    pub mode: EvolutionMode,
    pub times: Vec<f64>,
    /// Ancilla against the pair, `c|(ab)`.
    pub neg_c_ab: Vec<f64>,
    pub neg_a_bc: Vec<f64>,
    pub neg_b_ac: Vec<f64>,
    /// Negativity of the reduced `ab` state.
    pub neg_ab_reduced: Vec<f64>,
    /// Smallest eigenvalue of the `c|(ab)` partial transpose; its sign is the
    /// margin behind `neg_c_ab`.
    pub min_pt_eig_c_ab: Vec<f64>,
}

impl EvolutionTrace {
    fn assemble(times: Vec<f64>, points: Vec<TracePoint>, mode: EvolutionMode) -> Self {
        EvolutionTrace {
            mode,
            times,
            neg_c_ab: points.iter().map(|p| p.neg_c_ab).collect(),
            neg_a_bc: points.iter().map(|p| p.neg_a_bc).collect(),
            neg_b_ac: points.iter().map(|p| p.neg_b_ac).collect(),
            neg_ab_reduced: points.iter().map(|p| p.neg_ab).collect(),
            min_pt_eig_c_ab: points.iter().map(|p| p.min_pt_c_ab).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_neg_c_ab(&self) -> f64 {
        max_of(&self.neg_c_ab)
    }

    pub fn max_neg_b_ac(&self) -> f64 {
        max_of(&self.neg_b_ac)
    }

    pub fn max_neg_a_bc(&self) -> f64 {
        max_of(&self.neg_a_bc)
    }

    pub fn max_neg_ab(&self) -> f64 {
        max_of(&self.neg_ab_reduced)
    }

    pub fn min_pt_margin(&self) -> f64 {
        self.min_pt_eig_c_ab
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

/// Which party the ancilla just interacted with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BounceLeg {
    Alice,
    Bob,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BounceStep {
    /// Trotter step, starting at 1.
    pub step: usize,
    pub leg: BounceLeg,
    pub time: f64,
    pub neg_c_ab: f64,
    pub min_pt_eig_c_ab: f64,
    pub neg_ab_reduced: f64,
}

/// The Trotterized evolution read as an ancilla shuttling between the parties:
/// each step applies `e^{−iH_A δ}` (ancilla with `a`) then `e^{−iH_B δ}`
/// (ancilla with `b`), `δ = t_max/n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BounceTrace {
    pub epsilon: f64,
    pub alpha: f64,
    pub t_max: f64,
    pub n_steps: usize,
    pub steps: Vec<BounceStep>,
}

impl BounceTrace {
    pub fn max_neg_c_ab(&self) -> f64 {
        self.steps.iter().map(|s| s.neg_c_ab).fold(0.0, f64::max)
    }

    pub fn max_neg_ab(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| s.neg_ab_reduced)
            .fold(0.0, f64::max)
    }

    pub fn min_pt_margin(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| s.min_pt_eig_c_ab)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Records the ancilla negativity after every single interaction of the
/// `n`-step Trotter sequence that approximates evolution up to `t_max`.
pub fn bounce_simulation(
    model: &ContinuousModel,
    alpha: f64,
    t_max: f64,
    n: usize,
) -> Result<BounceTrace> {
    if n == 0 {
        return Err(Error::BadMode(
            "bounce simulation needs at least one step".into(),
        ));
    }
    if !(t_max.is_finite() && t_max >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "t_max must be non-negative, got {t_max}"
        )));
    }
    let dt = t_max / n as f64;
    let (h_a, h_b) = model.trotter_split();
    let u_a = hermitian_eig_unchecked(&h_a).propagator(dt);
    let u_b = hermitian_eig_unchecked(&h_b).propagator(dt);
    let mut rho = initial_state(alpha)?;
    let mut steps = Vec::with_capacity(2 * n);
    for step in 1..=n {
        for (leg, u) in [(BounceLeg::Alice, &u_a), (BounceLeg::Bob, &u_b)] {
            rho = rho.evolve_unitary(u)?;
            let (neg_c_ab, min_pt, neg_ab) = TracePoint::measure_ancilla_and_pair(&rho)?;
            let time = match leg {
                BounceLeg::Alice => (step as f64 - 0.5) * dt,
                BounceLeg::Bob => step as f64 * dt,
            };
            steps.push(BounceStep {
                step,
                leg,
                time,
                neg_c_ab,
                min_pt_eig_c_ab: min_pt,
                neg_ab_reduced: neg_ab,
            });
        }
    }
    Ok(BounceTrace {
        epsilon: model.epsilon(),
        alpha,
        t_max,
        n_steps: n,
        steps,
    })
}
