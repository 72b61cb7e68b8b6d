//! Two qubits `a`, `b` coupled continuously through a truncated bosonic
//! ancilla `c` (a qutrit):
//!
//! ```text
//! H = I_ab ⊗ ĉ†ĉ + (ε/2)(σ_x^a + σ_x^b) ⊗ (ĉ + ĉ†),   ĉ = |0⟩⟨1| + √2|1⟩⟨2|
//! ```
//!
//! Subsystems are ordered `(a, b, c)`, so the ancilla factor sits last. `H`
//! splits into four invariant sectors labelled by the `σ_x` eigenstates of
//! `a` and `b`; on `|++⟩` and `|−−⟩` the ancilla sees `H_± = H₀ ± ε(ĉ+ĉ†)`,
//! on `|+−⟩` and `|−+⟩` it sees the bare ladder `H₀`.

mod evolution;
mod nogo;
mod perturbation;
mod sweep;

pub use evolution::{
    bounce_simulation, initial_state, BounceLeg, BounceStep, BounceTrace, EvolutionMode,
    EvolutionTrace,
};
pub use nogo::{
    coupled_local_hamiltonians, pure_firstorder_amplitude, random_firstorder_amplitudes,
};
pub use perturbation::{rayleigh_schrodinger, PerturbationData, RsSeries};
pub use sweep::{
    parse_range, range_grid, sweep, AnalyticChain, SweepRow, SweepTable, AB_ENTANGLED_TOL,
    ANCILLA_SEPARABLE_TOL,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{c64, kron, kron_all, sigma_x, CMat};

/// Subsystem dimensions `(a, b, c)`.
pub const DIMS: [usize; 3] = [2, 2, 3];

/// Selects `H_+` (sector `|++⟩`) or `H_−` (sector `|−−⟩`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];
}

/// Annihilation operator `ĉ = |0⟩⟨1| + √2|1⟩⟨2|` on the truncated ladder.
pub fn annihilation() -> CMat {
    let mut c = CMat::zeros(3);
    c[(0, 1)] = c64(1.0, 0.0);
    c[(1, 2)] = c64(2f64.sqrt(), 0.0);
    c
}

/// `H₀ = ĉ†ĉ = diag(0, 1, 2)`.
pub fn ladder_h0() -> CMat {
    CMat::from_real_diag(&[0.0, 1.0, 2.0])
}

/// `ĉ + ĉ†`.
pub fn ladder_coupling() -> CMat {
    let c = annihilation();
    &c + &c.adjoint()
}

/// `|+⟩` or `|−⟩`.
pub fn x_basis_state(sign: Sign) -> Vec<crate::C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    vec![c64(s, 0.0), c64(s * sign.factor(), 0.0)]
}

pub(crate) fn validate_epsilon(epsilon: f64) -> Result<()> {
    if epsilon.is_finite() && (0.0..1.0).contains(&epsilon) {
        Ok(())
    } else {
        Err(Error::BadEpsilon(epsilon))
    }
}

/// The continuous model at a fixed coupling strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousModel {
    epsilon: f64,
}

/// The four invariant sectors of `H`.
#[derive(Debug, Clone)]
pub struct SubspaceDecomposition {
    pub h_plus: CMat,
    pub h_minus: CMat,
    pub h_zero: CMat,
    /// `Π₊₊`, `Π₋₋`, `Π₊₋`, `Π₋₊` on the `ab` qubits.
    pub proj_pp: CMat,
    pub proj_mm: CMat,
    pub proj_pm: CMat,
    pub proj_mp: CMat,
}

impl SubspaceDecomposition {
    /// `Π₊₊⊗H₊ + Π₋₋⊗H₋ + (Π₊₋ + Π₋₊)⊗H₀` in `(a, b, c)` order.
    pub fn reassemble(&self) -> CMat {
        let mixed = &self.proj_pm + &self.proj_mp;
        let sum = &kron(&self.proj_pp, &self.h_plus) + &kron(&self.proj_mm, &self.h_minus);
        &sum + &kron(&mixed, &self.h_zero)
    }
}

/// Projector onto `|s_a s_b⟩` in the `σ_x` basis.
pub fn sector_projector(sa: Sign, sb: Sign) -> CMat {
    let v = crate::matcore::kron_vec(&x_basis_state(sa), &x_basis_state(sb));
    CMat::projector(&v)
}

impl ContinuousModel {
    /// `epsilon` must lie in `[0, 1)`; zero is the uncoupled limit.
    pub fn new(epsilon: f64) -> Result<Self> {
        validate_epsilon(epsilon)?;
        Ok(ContinuousModel { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// The 12×12 Hamiltonian in `(a, b, c)` order.
    pub fn hamiltonian(&self) -> CMat {
        let i2 = CMat::identity(2);
        let x = sigma_x();
        let drive = &kron(&x, &i2) + &kron(&i2, &x);
        let bare = kron(&CMat::identity(4), &ladder_h0());
        &bare + &kron(&drive, &ladder_coupling()).scale_real(self.epsilon / 2.0)
    }

    /// `H_± = H₀ ± ε(ĉ + ĉ†)`.
    pub fn sector_hamiltonian(&self, sign: Sign) -> CMat {
        &ladder_h0() + &ladder_coupling().scale_real(sign.factor() * self.epsilon)
    }

    pub fn subspace_decomposition(&self) -> SubspaceDecomposition {
        SubspaceDecomposition {
            h_plus: self.sector_hamiltonian(Sign::Plus),
            h_minus: self.sector_hamiltonian(Sign::Minus),
            h_zero: ladder_h0(),
            proj_pp: sector_projector(Sign::Plus, Sign::Plus),
            proj_mm: sector_projector(Sign::Minus, Sign::Minus),
            proj_pm: sector_projector(Sign::Plus, Sign::Minus),
            proj_mp: sector_projector(Sign::Minus, Sign::Plus),
        }
    }

    /// `D = diag(−ε², 1−ε², 2+2ε²)`, the sector eigenvalues through third order.
    pub fn approx_eigenvalues(&self) -> [f64; 3] {
        let e2 = self.epsilon * self.epsilon;
        [-e2, 1.0 - e2, 2.0 + 2.0 * e2]
    }

    /// Trotter halves `H_A` (coupling to `a`) and `H_B` (coupling to `b`),
    /// each carrying half of the ladder energy.
    pub fn trotter_split(&self) -> (CMat, CMat) {
        let i2 = CMat::identity(2);
        let half_bare = kron(&CMat::identity(4), &ladder_h0().scale_real(0.5));
        let coupling = ladder_coupling().scale_real(self.epsilon / 2.0);
        let h_a = &half_bare + &kron_all(&[&sigma_x(), &i2, &coupling]);
        let h_b = &half_bare + &kron_all(&[&i2, &sigma_x(), &coupling]);
        (h_a, h_b)
    }
}

/// Validated shorthand for [`ContinuousModel::hamiltonian`].
pub fn build_hamiltonian(epsilon: f64) -> Result<CMat> {
    Ok(ContinuousModel::new(epsilon)?.hamiltonian())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{hermitian_eig, kron_all};
    use approx::assert_abs_diff_eq;

    #[test]
    fn ladder_relations() {
        let c = annihilation();
        assert!((&c.adjoint() * &c).max_abs_diff(&ladder_h0()) < 1e-15);
    }

    #[test]
    fn rejects_bad_epsilon() {
        for eps in [-0.1, 1.0, 1.5, f64::NAN] {
            assert!(matches!(build_hamiltonian(eps), Err(Error::BadEpsilon(_))));
        }
    }

    #[test]
    fn uncoupled_spectrum() {
        let h = build_hamiltonian(0.0).unwrap();
        let e = hermitian_eig(&h).unwrap();
        let expected = [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0];
        for (l, x) in e.values.iter().zip(expected) {
            assert_abs_diff_eq!(*l, x, epsilon = 1e-14);
        }
    }

    #[test]
    fn hamiltonian_trace_and_hermiticity() {
        for eps in [0.0, 0.05, 0.3, 0.9] {
            let h = build_hamiltonian(eps).unwrap();
            assert_abs_diff_eq!(h.trace().re, 12.0, epsilon = 1e-13);
            assert_eq!(h.hermitian_deviation(), 0.0);
        }
    }

    #[test]
    fn hamiltonian_matches_operator_sum() {
        // direct construction: I₄⊗H₀ + (ε/2)(σx⊗I + I⊗σx)⊗(ĉ+ĉ†)
        let eps = 0.1;
        let h = build_hamiltonian(eps).unwrap();
        let x = sigma_x();
        let i2 = CMat::identity(2);
        let cc = ladder_coupling();
        let term_a = kron_all(&[&x, &i2, &cc]);
        let term_b = kron_all(&[&i2, &x, &cc]);
        let expected =
            &kron(&CMat::identity(4), &ladder_h0()) + &(&term_a + &term_b).scale_real(eps / 2.0);
        assert!(h.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn exact_sector_spectrum_close_to_d() {
        let eps: f64 = 0.1;
        let model = ContinuousModel::new(eps).unwrap();
        let d = model.approx_eigenvalues();
        for sign in Sign::BOTH {
            let e = hermitian_eig(&model.sector_hamiltonian(sign)).unwrap();
            for (l, di) in e.values.iter().zip(d) {
                // fourth-order remainder with a modest constant
                assert!((l - di).abs() < 10.0 * eps.powi(4), "{l} vs {di}");
            }
        }
        // whole-H spectrum: D twice (±± sectors) and {0,1,2} twice (mixed sectors)
        let all = hermitian_eig(&model.hamiltonian()).unwrap().values;
        let mut expected: Vec<f64> = d
            .iter()
            .chain(d.iter())
            .copied()
            .chain([0.0, 0.0, 1.0, 1.0, 2.0, 2.0])
            .collect();
        expected.sort_by(f64::total_cmp);
        for (l, x) in all.iter().zip(expected) {
            assert!((l - x).abs() < 10.0 * eps.powi(4));
        }
    }

    #[test]
    fn decomposition_identities() {
        let model = ContinuousModel::new(0.05).unwrap();
        let dec = model.subspace_decomposition();
        let total = &(&dec.proj_pp + &dec.proj_mm) + &(&dec.proj_pm + &dec.proj_mp);
        assert!(total.max_abs_diff(&CMat::identity(4)) < 1e-15);
        let diff = &dec.h_plus - &dec.h_minus;
        assert!(diff.max_abs_diff(&ladder_coupling().scale_real(2.0 * 0.05)) < 1e-15);
        for eps in [0.0, 0.05, 0.1, 0.5] {
            let m = ContinuousModel::new(eps).unwrap();
            assert!(
                m.subspace_decomposition()
                    .reassemble()
                    .max_abs_diff(&m.hamiltonian())
                    < 1e-12
            );
        }
    }

    #[test]
    fn trotter_halves_sum_to_h() {
        let model = ContinuousModel::new(0.2).unwrap();
        let (a, b) = model.trotter_split();
        assert!((&a + &b).max_abs_diff(&model.hamiltonian()) < 1e-15);
    }
}
