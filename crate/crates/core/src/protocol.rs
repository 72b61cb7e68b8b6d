//! Three-qubit protocol in which Alice (`a`) and Bob (`b`) become entangled by
//! passing an ancilla qubit `c` that is never entangled with them.
//!
//! 1. Prepare a classically correlated state `ρ`.
//! 2. Alice applies `CNOT(a→c)`, giving `σ`.
//! 3. Bob applies `CNOT(b→c)`, giving `τ`.
//!
//! Bob then extracts `ab` entanglement by measuring `c` or by a local
//! trace-preserving map on `bc`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::channels::KrausMap;
use crate::error::{Error, Result};
use crate::matcore::{c64, kron_vec, CMat, C64};
use crate::qstate::{
    ghz_vector, negativity, partial_trace, phi_plus, tripartite_cuts, Bipartition, DensityMatrix,
    ABC,
};

/// Tolerance for entrywise agreement with the closed-form states.
pub const PROTOCOL_TOL: f64 = 1e-12;

const DIMS: [usize; 3] = [2, 2, 2];

/// `(|0⟩ + e^{ikπ/2}|1⟩)/√2`.
pub fn psi_k(k: i32) -> Vec<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let phase = C64::from_polar(1.0, k as f64 * std::f64::consts::FRAC_PI_2);
    vec![c64(s, 0.0), phase * s]
}

fn basis(dim: usize, k: usize) -> Vec<C64> {
    let mut v = vec![c64(0.0, 0.0); dim];
    v[k] = c64(1.0, 0.0);
    v
}

/// `(1/6) Σ_k |Ψ_k, Ψ_{−k}, 0⟩⟨·| + (1/6) Σ_i |i, i, 1⟩⟨·|`.
pub fn initial_state_discrete() -> DensityMatrix {
    let mut mat = CMat::zeros(8);
    for k in 0..4 {
        let v = kron_vec(&kron_vec(&psi_k(k), &psi_k(-k)), &basis(2, 0));
        mat = &mat + &CMat::projector(&v).scale_real(1.0 / 6.0);
    }
    for i in 0..2 {
        let v = kron_vec(&kron_vec(&basis(2, i), &basis(2, i)), &basis(2, 1));
        mat = &mat + &CMat::projector(&v).scale_real(1.0 / 6.0);
    }
    DensityMatrix::from_parts_unchecked(mat, DIMS.to_vec())
}

/// CNOT on `n` qubits flipping `target` when `control` is `1`.
pub fn cnot(control: usize, target: usize, n_qubits: usize) -> Result<CMat> {
    for index in [control, target] {
        if index >= n_qubits {
            return Err(Error::BadIndex { index, n: n_qubits });
        }
    }
    if control == target {
        return Err(Error::InvalidArgument(format!(
            "control and target are both qubit {control}"
        )));
    }
    let d = 1usize << n_qubits;
    let bit = |q: usize| 1usize << (n_qubits - 1 - q);
    let mut u = CMat::zeros(d);
    for x in 0..d {
        let y = if x & bit(control) != 0 {
            x ^ bit(target)
        } else {
            x
        };
        u[(y, x)] = c64(1.0, 0.0);
    }
    Ok(u)
}

/// `σ = (1/3)|GHZ⟩⟨GHZ| + (1/6)(Π₀₀₁ + Π₀₁₀ + Π₁₀₁ + Π₁₁₀)`.
pub fn sigma_closed_form() -> CMat {
    let mut mat = CMat::projector(&ghz_vector(3)).scale_real(1.0 / 3.0);
    for k in [0b001, 0b010, 0b101, 0b110] {
        mat = &mat + &CMat::basis_op(8, k, k).scale_real(1.0 / 6.0);
    }
    mat
}

/// `τ = (1/3)|φ⁺⟩⟨φ⁺| ⊗ |0⟩⟨0| + (2/3)(𝟙/4) ⊗ |1⟩⟨1|`.
pub fn tau_closed_form() -> CMat {
    let zero = CMat::basis_op(2, 0, 0);
    let one = CMat::basis_op(2, 1, 1);
    let ent = crate::matcore::kron(phi_plus().mat(), &zero).scale_real(1.0 / 3.0);
    &ent + &crate::matcore::kron(&CMat::identity(4), &one).scale_real(1.0 / 6.0)
}

/// Negativities across the three single-party cuts, keyed by cut.
pub type CutNegativities = BTreeMap<Bipartition, f64>;

fn cut_negativities(rho: &DensityMatrix) -> Result<CutNegativities> {
    tripartite_cuts()
        .into_iter()
        .map(|cut| Ok((cut.clone(), negativity(rho, &cut)?)))
        .collect()
}

/// Outcome of measuring `c` in the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct AncillaBranch {
    pub outcome: usize,
    pub probability: f64,
    /// `None` when the branch has zero probability.
    pub post_state: Option<DensityMatrix>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolStep {
    pub name: &'static str,
    pub state: DensityMatrix,
    pub negativities: CutNegativities,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolTrace {
    /// Initial state, after Alice's CNOT, after Bob's CNOT.
    pub steps: [ProtocolStep; 3],
    pub branches: Vec<AncillaBranch>,
    /// `Tr_c ℰ_bc(τ)`.
    pub rho_ab: DensityMatrix,
    pub rho_ab_negativity: f64,
    pub rho_ab_min_pt_eigenvalue: f64,
    /// Entrywise distances of `σ` and `τ` from their closed forms.
    pub sigma_deviation: f64,
    pub tau_deviation: f64,
}

impl ProtocolTrace {
    pub fn rho_initial(&self) -> &DensityMatrix {
        &self.steps[0].state
    }

    pub fn sigma(&self) -> &DensityMatrix {
        &self.steps[1].state
    }

    pub fn tau(&self) -> &DensityMatrix {
        &self.steps[2].state
    }

    pub fn prob_outcome(&self, outcome: usize) -> f64 {
        self.branches
            .iter()
            .find(|b| b.outcome == outcome)
            .map_or(0.0, |b| b.probability)
    }

    /// Largest `c|(ab)` negativity over the three steps.
    pub fn max_ancilla_negativity(&self) -> f64 {
        let cut = &tripartite_cuts()[2];
        self.steps
            .iter()
            .map(|s| s.negativities[cut])
            .fold(0.0, f64::max)
    }
}

/// Serializable view of a [`ProtocolTrace`] with cut labels as keys.
#[derive(Debug, Clone, Serialize)]
pub struct ProtocolSummary {
    pub steps: Vec<StepSummary>,
    pub prob_outcome_0: f64,
    pub prob_outcome_1: f64,
    pub final_negativity: f64,
    pub final_min_pt_eigenvalue: f64,
    pub sigma_deviation: f64,
    pub tau_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepSummary {
    pub step: &'static str,
    pub negativities: BTreeMap<String, f64>,
}

impl ProtocolTrace {
    pub fn summary(&self) -> ProtocolSummary {
        ProtocolSummary {
            steps: self
                .steps
                .iter()
                .map(|s| StepSummary {
                    step: s.name,
                    negativities: s
                        .negativities
                        .iter()
                        .map(|(cut, &n)| (cut.label(&ABC), n))
                        .collect(),
                })
                .collect(),
            prob_outcome_0: self.prob_outcome(0),
            prob_outcome_1: self.prob_outcome(1),
            final_negativity: self.rho_ab_negativity,
            final_min_pt_eigenvalue: self.rho_ab_min_pt_eigenvalue,
            sigma_deviation: self.sigma_deviation,
            tau_deviation: self.tau_deviation,
        }
    }
}

fn check_qubits3(rho: &DensityMatrix) -> Result<()> {
    if rho.dims() != DIMS {
        return Err(Error::BadDims {
            expected: DIMS.to_vec(),
            got: rho.dims().to_vec(),
        });
    }
    Ok(())
}

/// Born-rule branches of a computational-basis measurement of `c`, with the
/// post-measurement `ab` states.
pub fn measure_ancilla(tau: &DensityMatrix) -> Result<Vec<AncillaBranch>> {
    check_qubits3(tau)?;
    (0..2)
        .map(|outcome| {
            let proj =
                crate::matcore::kron(&CMat::identity(4), &CMat::basis_op(2, outcome, outcome));
            let (probability, post) = tau.project(&proj);
            let post_state = post.map(|p| partial_trace(&p, &[0, 1])).transpose()?;
            Ok(AncillaBranch {
                outcome,
                probability,
                post_state,
            })
        })
        .collect()
}

/// Bob's deterministic extraction map on `bc`, padded with identity on `a`:
/// `O₁ = 𝟙_b ⊗ |0⟩⟨0|_c`, `O₂ = |0⟩⟨0|_b ⊗ |1⟩⟨1|_c`, `O₃ = |0⟩⟨1|_b ⊗ |1⟩⟨1|_c`.
pub fn extraction_channel() -> KrausMap {
    let one_c = CMat::basis_op(2, 1, 1);
    let kraus = [
        crate::matcore::kron(&CMat::identity(2), &CMat::basis_op(2, 0, 0)),
        crate::matcore::kron(&CMat::basis_op(2, 0, 0), &one_c),
        crate::matcore::kron(&CMat::basis_op(2, 0, 1), &one_c),
    ];
    KrausMap::local(&kraus, &[1, 2], DIMS.to_vec()).expect("static Kraus family")
}

/// `Tr_c ℰ_bc(τ)`.
pub fn extract(tau: &DensityMatrix) -> Result<DensityMatrix> {
    check_qubits3(tau)?;
    partial_trace(&extraction_channel().apply(tau)?, &[0, 1])
}

/// Runs the three steps and both extraction routes, checking every state
/// against its closed form.
pub fn run_protocol() -> Result<ProtocolTrace> {
    let rho = initial_state_discrete();
    let sigma = rho.evolve_unitary(&cnot(0, 2, 3)?)?;
    let tau = sigma.evolve_unitary(&cnot(1, 2, 3)?)?;

    let sigma_deviation = sigma.mat().max_abs_diff(&sigma_closed_form());
    if sigma_deviation > PROTOCOL_TOL {
        return Err(Error::Consistency(format!(
            "σ differs from its closed form by {sigma_deviation:.3e}"
        )));
    }
    let tau_deviation = tau.mat().max_abs_diff(&tau_closed_form());
    if tau_deviation > PROTOCOL_TOL {
        return Err(Error::Consistency(format!(
            "τ differs from its closed form by {tau_deviation:.3e}"
        )));
    }

    let steps = [
        ProtocolStep {
            name: "initial",
            negativities: cut_negativities(&rho)?,
            state: rho,
        },
        ProtocolStep {
            name: "alice_cnot",
            negativities: cut_negativities(&sigma)?,
            state: sigma,
        },
        ProtocolStep {
            name: "bob_cnot",
            negativities: cut_negativities(&tau)?,
            state: tau.clone(),
        },
    ];
    let ancilla_cut = &tripartite_cuts()[2];
    for step in &steps {
        let n = step.negativities[ancilla_cut];
        if n > PROTOCOL_TOL {
            return Err(Error::Consistency(format!(
                "ancilla is entangled after step '{}' (negativity {n:.3e})",
                step.name
            )));
        }
    }

    let branches = measure_ancilla(&tau)?;
    let rho_ab = extract(&tau)?;
    let ab = Bipartition::split([0], 2)?;
    let rho_ab_negativity = negativity(&rho_ab, &ab)?;
    let rho_ab_min_pt_eigenvalue = crate::qstate::min_partial_transpose_eigenvalue(&rho_ab, &ab)?;
    if rho_ab_negativity <= 0.0 {
        return Err(Error::Consistency(
            "extracted ab state is not entangled".into(),
        ));
    }
    Ok(ProtocolTrace {
        steps,
        branches,
        rho_ab,
        rho_ab_negativity,
        rho_ab_min_pt_eigenvalue,
        sigma_deviation,
        tau_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::phi_plus_vector;
    use approx::assert_abs_diff_eq;

    /// Negativity of a real symmetric 4×4 two-qubit state by writing out the
    /// partial transpose on `b` and diagonalizing its 2×2 blocks by hand.
    /// Only valid when the partial transpose has the X-shaped support of the
    /// states used here.
    fn x_state_negativity(m: &CMat) -> f64 {
        let r = |i: usize, j: usize| m[(i, j)].re;
        // PT on b swaps ⟨a b|ρ|a' b'⟩ ↔ ⟨a b'|ρ|a' b⟩
        let pt = |i: usize, j: usize| {
            let (a, b, a2, b2) = (i >> 1, i & 1, j >> 1, j & 1);
            r((a << 1) | b2, (a2 << 1) | b)
        };
        let block_min = |p: usize, q: usize| {
            let (x, y, z) = (pt(p, p), pt(q, q), pt(p, q));
            0.5 * (x + y) - (0.25 * (x - y).powi(2) + z * z).sqrt()
        };
        -(block_min(0b00, 0b11).min(0.0) + block_min(0b01, 0b10).min(0.0))
    }

    #[test]
    fn initial_state_properties() {
        let rho = initial_state_discrete();
        assert_abs_diff_eq!(rho.mat().trace().re, 1.0, epsilon = 1e-15);
        let c = partial_trace(&rho, &[2]).unwrap();
        assert!(
            c.mat()
                .max_abs_diff(&CMat::from_real_diag(&[2.0 / 3.0, 1.0 / 3.0]))
                < 1e-15
        );
        for n in cut_negativities(&rho).unwrap().values() {
            assert_eq!(*n, 0.0);
        }
    }

    #[test]
    fn cnot_basics() {
        let u = cnot(0, 1, 2).unwrap();
        assert_eq!(u.mat_vec(&basis(4, 0b10)), basis(4, 0b11));
        assert_eq!(u.mat_vec(&basis(4, 0b01)), basis(4, 0b01));
        for (c, t) in [(0, 1), (2, 0), (1, 2)] {
            let u = cnot(c, t, 3).unwrap();
            assert_eq!(&u * &u, CMat::identity(8));
        }
        assert!(matches!(
            cnot(0, 3, 3),
            Err(Error::BadIndex { index: 3, n: 3 })
        ));
        assert!(cnot(1, 1, 3).is_err());
    }

    #[test]
    fn cnot_on_psi0_copies_into_c() {
        let u = cnot(0, 2, 3).unwrap();
        for x in 0..2 {
            let input = kron_vec(&kron_vec(&psi_k(0), &basis(2, x)), &basis(2, 0));
            let out = u.mat_vec(&input);
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let mut expected = vec![c64(0.0, 0.0); 8];
            expected[x << 1] = c64(s, 0.0);
            expected[0b100 | (x << 1) | 1] = c64(s, 0.0);
            for (o, e) in out.iter().zip(&expected) {
                assert!((o - e).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn trace_matches_closed_forms() {
        let trace = run_protocol().unwrap();
        assert!(trace.sigma_deviation <= 1e-12);
        assert!(trace.tau_deviation <= 1e-12);
        assert!(trace.max_ancilla_negativity() <= 1e-12);
    }

    #[test]
    fn sigma_invariant_under_bc_swap() {
        let mut swap = CMat::zeros(8);
        for x in 0..8usize {
            let (a, b, c) = (x >> 2 & 1, x >> 1 & 1, x & 1);
            swap[((a << 2) | (c << 1) | b, x)] = c64(1.0, 0.0);
        }
        let sigma = run_protocol().unwrap().sigma().mat().clone();
        assert!(swap.conjugate(&sigma).max_abs_diff(&sigma) < 1e-12);
    }

    #[test]
    fn sigma_entangles_a_only() {
        let trace = run_protocol().unwrap();
        let cuts = tripartite_cuts();
        let sigma = &trace.steps[1].negativities;
        assert!(sigma[&cuts[0]] > 0.0);
        assert_eq!(sigma[&cuts[1]], 0.0);
        assert_eq!(sigma[&cuts[2]], 0.0);
        let tau = &trace.steps[2].negativities;
        assert!(tau[&cuts[1]] > 0.0);
        assert_eq!(tau[&cuts[2]], 0.0);
    }

    #[test]
    fn unitary_steps_preserve_spectrum() {
        let trace = run_protocol().unwrap();
        let e0 = trace.rho_initial().eigenvalues();
        for later in [trace.sigma(), trace.tau()] {
            for (x, y) in e0.iter().zip(later.eigenvalues()) {
                assert_abs_diff_eq!(*x, y, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn measurement_branches() {
        let trace = run_protocol().unwrap();
        let [b0, b1] = [&trace.branches[0], &trace.branches[1]];
        assert_abs_diff_eq!(b0.probability, 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b1.probability, 2.0 / 3.0, epsilon = 1e-12);
        let phi = CMat::projector(&phi_plus_vector());
        assert!(b0.post_state.as_ref().unwrap().mat().max_abs_diff(&phi) < 1e-12);
        let mixed = CMat::identity(4).scale_real(0.25);
        assert!(b1.post_state.as_ref().unwrap().mat().max_abs_diff(&mixed) < 1e-12);
        // branches recompose the reduced state
        let recomposed = trace.branches.iter().fold(CMat::zeros(4), |acc, b| {
            &acc + &b
                .post_state
                .as_ref()
                .unwrap()
                .mat()
                .scale_real(b.probability)
        });
        let reduced = partial_trace(trace.tau(), &[0, 1]).unwrap();
        assert!(recomposed.max_abs_diff(reduced.mat()) < 1e-12);
    }

    #[test]
    fn zero_probability_branch_has_no_state() {
        let pure0 = DensityMatrix::from_pure(&basis(8, 0), DIMS.to_vec()).unwrap();
        let branches = measure_ancilla(&pure0).unwrap();
        assert_eq!(branches[1].probability, 0.0);
        assert!(branches[1].post_state.is_none());
        assert!(measure_ancilla(&DensityMatrix::maximally_mixed(vec![2, 2])).is_err());
    }

    #[test]
    fn extraction_output() {
        let channel = extraction_channel();
        assert!(channel.trace_preservation_defect() <= 1e-15);
        let trace = run_protocol().unwrap();
        let expected = &(&phi_plus().mat().scale_real(1.0 / 3.0)
            + &CMat::basis_op(4, 0b00, 0b00).scale_real(1.0 / 3.0))
            + &CMat::basis_op(4, 0b10, 0b10).scale_real(1.0 / 3.0);
        assert!(trace.rho_ab.mat().max_abs_diff(&expected) < 1e-12);
        let oracle = x_state_negativity(&expected);
        assert_abs_diff_eq!(oracle, (2f64.sqrt() - 1.0) / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(trace.rho_ab_negativity, oracle, epsilon = 1e-10);
        assert!(trace.rho_ab_min_pt_eigenvalue < 0.0);
        assert_abs_diff_eq!(trace.rho_ab.mat().trace().re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn summary_uses_cut_labels() {
        let summary = run_protocol().unwrap().summary();
        assert_eq!(summary.steps.len(), 3);
        assert!(summary.steps[0].negativities.contains_key("c|(ab)"));
        assert_abs_diff_eq!(summary.prob_outcome_0, 1.0 / 3.0, epsilon = 1e-12);
    }
}
