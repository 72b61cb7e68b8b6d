//! Rayleigh–Schrödinger expansion of the sector Hamiltonians and the two
//! error bounds that control `‖e^{−iH_± t} − e^{−iDt}‖`.

use serde::Serialize;

use super::{ladder_coupling, ContinuousModel, Sign};
use crate::error::{Error, Result};
use crate::matcore::{c64, norm, vandermonde_det, CMat, NormKind, C64};

/// Non-degenerate perturbation series truncated at a fixed order.
#[derive(Debug, Clone)]
pub struct RsSeries {
    /// Per-level corrections `E⁽⁰⁾ … E⁽ᵒʳᵈᵉʳ⁺¹⁾`; the last one is exact given
    /// the vector through `order`.
    pub energy_terms: Vec<Vec<f64>>,
    /// Normalized eigenvector estimates as columns.
    pub vectors: CMat,
}

impl RsSeries {
    pub fn energies(&self) -> Vec<f64> {
        self.energy_terms.iter().map(|t| t.iter().sum()).collect()
    }
}

/// Eigenvectors of `diag(levels) + v` to `order` in `v`, using the
/// intermediate-normalization recursion
/// `|n⁽ᵏ⁾⟩ = R_n (V|n⁽ᵏ⁻¹⁾⟩ − Σ_{j=1..k} E⁽ʲ⁾|n⁽ᵏ⁻ʲ⁾⟩)` with reduced resolvent
/// `R_n = Σ_{m≠n} |m⟩⟨m| / (E_n − E_m)`.
///
/// The unperturbed levels must be distinct.
pub fn rayleigh_schrodinger(levels: &[f64], v: &CMat, order: usize) -> Result<RsSeries> {
    let n = levels.len();
    if v.dim() != n {
        return Err(Error::DimMismatch(format!(
            "{n} levels, perturbation of dimension {}",
            v.dim()
        )));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (levels[i] - levels[j]).abs() < 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "degenerate levels {i} and {j}"
                )));
            }
        }
    }
    let mut energy_terms = Vec::with_capacity(n);
    let mut vectors = CMat::zeros(n);
    for level in 0..n {
        let mut terms: Vec<Vec<C64>> = Vec::with_capacity(order + 1);
        let mut unit = vec![c64(0.0, 0.0); n];
        unit[level] = c64(1.0, 0.0);
        terms.push(unit);
        let mut energies = vec![levels[level]];
        for k in 1..=order {
            let v_prev = v.mat_vec(&terms[k - 1]);
            energies.push(v_prev[level].re);
            let next: Vec<C64> = (0..n)
                .map(|m| {
                    if m == level {
                        return c64(0.0, 0.0);
                    }
                    let shift: C64 = (1..=k).map(|j| terms[k - j][m] * energies[j]).sum();
                    (v_prev[m] - shift) / (levels[level] - levels[m])
                })
                .collect();
            terms.push(next);
        }
        // E⁽ᵒʳᵈᵉʳ⁺¹⁾ only needs the vector through `order`
        energies.push(v.mat_vec(&terms[order])[level].re);
        let mut vec = vec![c64(0.0, 0.0); n];
        for t in &terms {
            for (acc, x) in vec.iter_mut().zip(t) {
                *acc += x;
            }
        }
        let norm = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for (m, x) in vec.iter().enumerate() {
            vectors[(m, level)] = x / norm;
        }
        energy_terms.push(energies);
    }
    Ok(RsSeries {
        energy_terms,
        vectors,
    })
}

/// Approximate eigensystem of one sector Hamiltonian.
#[derive(Debug, Clone)]
pub struct PerturbationData {
    pub sign: Sign,
    /// `(−ε², 1−ε², 2+2ε²)`.
    pub d: [f64; 3],
    /// Eigenvector matrix through third order (normalized columns).
    pub x: CMat,
    /// Vandermonde determinant of `d`.
    pub delta: f64,
}

impl PerturbationData {
    pub fn d_matrix(&self) -> CMat {
        CMat::from_real_diag(&self.d)
    }

    pub fn x_inverse(&self) -> Result<CMat> {
        self.x
            .try_inverse()
            .ok_or_else(|| Error::Consistency("approximate eigenvector matrix is singular".into()))
    }

    /// `X e^{−iDt} X⁻¹`.
    pub fn approx_propagator(&self, t: f64) -> Result<CMat> {
        let phases: Vec<C64> = self
            .d
            .iter()
            .map(|&l| C64::from_polar(1.0, -l * t))
            .collect();
        Ok(&(&self.x * &CMat::from_diag(&phases)) * &self.x_inverse()?)
    }
}

/// Norms entering both bounds, evaluated once.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundTerms {
    pub x_norm: f64,
    pub x_inv_norm: f64,
    pub residual_norm: f64,
    pub commutator_d: f64,
    pub commutator_d2: f64,
}

impl ContinuousModel {
    pub fn perturbative_eigensystem(&self, sign: Sign) -> Result<PerturbationData> {
        let v = ladder_coupling().scale_real(sign.factor() * self.epsilon());
        let series = rayleigh_schrodinger(&[0.0, 1.0, 2.0], &v, 3)?;
        let d = self.approx_eigenvalues();
        Ok(PerturbationData {
            sign,
            d,
            x: series.vectors,
            delta: vandermonde_det(&d),
        })
    }

    fn bound_terms(&self, data: &PerturbationData) -> Result<BoundTerms> {
        let h = self.sector_hamiltonian(data.sign);
        let dm = data.d_matrix();
        let d2 = &dm * &dm;
        let x = &data.x;
        let x_inv = data.x_inverse()?;
        let spectral = |m: &CMat| norm(m, NormKind::Spectral);
        Ok(BoundTerms {
            x_norm: spectral(x),
            x_inv_norm: spectral(&x_inv),
            residual_norm: spectral(&(&(&h * x) - &(x * &dm))),
            commutator_d: spectral(&(&(x * &dm) - &(&dm * x))),
            commutator_d2: spectral(&(&(x * &d2) - &(&d2 * x))),
        })
    }

    /// `𝒩₁ ≤ ‖X⁻¹‖² ‖X‖ ‖H_± X − X D‖ t`, spectral norms throughout.
    pub fn bound_n1(&self, t: f64, sign: Sign) -> Result<f64> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "time must be non-negative, got {t}"
            )));
        }
        let terms = self.bound_terms(&self.perturbative_eigensystem(sign)?)?;
        Ok(terms.x_inv_norm.powi(2) * terms.x_norm * terms.residual_norm * t)
    }

    /// `𝒩₂ ≤ ‖X⁻¹‖ (2/|Δ|) ((d₃²−d₁²)‖XD−DX‖ + (d₃−d₁)‖XD²−D²X‖)`.
    pub fn bound_n2(&self, sign: Sign) -> Result<f64> {
        let data = self.perturbative_eigensystem(sign)?;
        let terms = self.bound_terms(&data)?;
        let [d1, _, d3] = data.d;
        let poly = (d3 * d3 - d1 * d1) * terms.commutator_d + (d3 - d1) * terms.commutator_d2;
        Ok(terms.x_inv_norm * 2.0 / data.delta.abs() * poly)
    }

    /// Largest `𝒩₁(t) + 𝒩₂` over both signs: a bound on `‖U(t) − U_eff(t)‖`.
    pub fn perturbation_budget(&self, t: f64) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for sign in Sign::BOTH {
            worst = worst.max(self.bound_n1(t, sign)? + self.bound_n2(sign)?);
        }
        Ok(worst)
    }
}
