//! Completely positive maps in Kraus form.
//!
//! Channel equality is always decided through Choi matrices, since Kraus
//! families are only unique up to isometric remixing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{c64, kron, norm, CMat, NormKind, C64};
use crate::qstate::{
    embed_operator, negativity, random_separable_state, Bipartition, DensityMatrix,
};

/// Tolerance on `‖Σ K†K − 𝟙‖` for a map to count as trace preserving.
pub const TP_TOL: f64 = 1e-12;

/// Output negativity above which an audit sample is reported as a witness.
pub const WITNESS_TOL: f64 = 1e-8;

/// Largest separable input mixture drawn by [`audit_nonentangling`].
pub const MAX_AUDIT_TERMS: usize = 8;

/// Kraus family `{K_j}` acting as `ρ ↦ Σ_j K_j ρ K_j†`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausMap {
    kraus: Vec<CMat>,
    dims: Vec<usize>,
}

impl KrausMap {
    pub fn new(kraus: Vec<CMat>, dims: Vec<usize>) -> Result<Self> {
        let d: usize = dims.iter().product();
        if kraus.is_empty() {
            return Err(Error::InvalidArgument(
                "a Kraus map needs at least one operator".into(),
            ));
        }
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::BadDims {
                expected: vec![],
                got: dims,
            });
        }
        if let Some(k) = kraus.iter().find(|k| k.dim() != d) {
            return Err(Error::DimMismatch(format!(
                "Kraus operator of dimension {} for subsystems {dims:?}",
                k.dim()
            )));
        }
        Ok(KrausMap { kraus, dims })
    }

    /// Kraus operators given on `targets` and padded with identity elsewhere.
    pub fn local(kraus: &[CMat], targets: &[usize], dims: Vec<usize>) -> Result<Self> {
        let padded = kraus
            .iter()
            .map(|k| embed_operator(k, targets, &dims))
            .collect::<Result<Vec<_>>>()?;
        KrausMap::new(padded, dims)
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let d = dims.iter().product();
        KrausMap {
            kraus: vec![CMat::identity(d)],
            dims,
        }
    }

    /// `ρ ↦ Tr(ρ) 𝟙/d` via the `d²` operators `|i⟩⟨j|/√d`.
    pub fn completely_depolarizing(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        let s = 1.0 / (d as f64).sqrt();
        let kraus = (0..d)
            .flat_map(|i| (0..d).map(move |j| CMat::basis_op(d, i, j).scale_real(s)))
            .collect();
        KrausMap { kraus, dims }
    }

    /// Conjugates every Kraus operator: `K ↦ U K U†`.
    pub fn conjugated(&self, u: &CMat) -> Result<Self> {
        if u.dim() != self.dim() {
            return Err(Error::DimMismatch(format!(
                "unitary of dimension {} for map of dimension {}",
                u.dim(),
                self.dim()
            )));
        }
        Ok(KrausMap {
            kraus: self.kraus.iter().map(|k| u.conjugate(k)).collect(),
            dims: self.dims.clone(),
        })
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].dim()
    }

    /// `‖Σ K†K − 𝟙‖` in spectral norm.
    pub fn trace_preservation_defect(&self) -> f64 {
        let sum = self
            .kraus
            .iter()
            .fold(CMat::zeros(self.dim()), |acc, k| &acc + &(&k.adjoint() * k));
        norm(&(&sum - &CMat::identity(self.dim())), NormKind::Spectral)
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preservation_defect() <= TP_TOL
    }

    /// Unnormalized image `Σ K ρ K†` as a bare matrix.
    pub fn apply_mat(&self, rho: &CMat) -> Result<CMat> {
        if rho.dim() != self.dim() {
            return Err(Error::DimMismatch(format!(
                "input of dimension {} for map of dimension {}",
                rho.dim(),
                self.dim()
            )));
        }
        Ok(self
            .kraus
            .iter()
            .fold(CMat::zeros(self.dim()), |acc, k| &acc + &k.conjugate(rho)))
    }

    /// `Σ K ρ K†`. Trace is preserved only for trace-preserving maps; the
    /// result of a trace-decreasing map is returned unnormalized.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dims() != self.dims.as_slice() {
            return Err(Error::DimMismatch(format!(
                "state with dims {:?} for map with dims {:?}",
                rho.dims(),
                self.dims
            )));
        }
        Ok(DensityMatrix::from_parts_unchecked(
            self.apply_mat(rho.mat())?,
            self.dims.clone(),
        ))
    }

    /// Choi state `(ℰ ⊗ id)(|Ω⟩⟨Ω|)`, trace-normalized, with `|Ω⟩ = Σ_i |ii⟩`.
    /// The output copy comes first, so its dims are `dims ++ dims`.
    pub fn choi(&self) -> DensityMatrix {
        let d = self.dim();
        let mut mat = CMat::zeros(d * d);
        for i in 0..d {
            for j in 0..d {
                let block = self
                    .apply_mat(&CMat::basis_op(d, i, j))
                    .expect("dimension checked");
                mat = &mat + &kron(&block, &CMat::basis_op(d, i, j));
            }
        }
        let tr = mat.trace().re;
        let scale = if tr > 0.0 { 1.0 / tr } else { 1.0 };
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&self.dims);
        DensityMatrix::from_parts_unchecked(mat.scale_real(scale), dims)
    }
}

/// `second ∘ first`, with Kraus operators `second_j · first_i` ordered by `i`
/// then `j`.
pub fn compose(second: &KrausMap, first: &KrausMap) -> Result<KrausMap> {
    if second.dims != first.dims {
        return Err(Error::DimMismatch(format!(
            "cannot compose maps on {:?} and {:?}",
            second.dims, first.dims
        )));
    }
    let kraus = first
        .kraus
        .iter()
        .flat_map(|f| second.kraus.iter().map(move |s| s * f))
        .collect();
    KrausMap::new(kraus, first.dims.clone())
}

/// Largest entrywise difference between the Choi matrices of two maps.
pub fn choi_distance(x: &KrausMap, y: &KrausMap) -> Result<f64> {
    if x.dims != y.dims {
        return Err(Error::DimMismatch(format!(
            "maps on {:?} and {:?}",
            x.dims, y.dims
        )));
    }
    Ok(x.choi().mat().max_abs_diff(y.choi().mat()))
}

fn ket_bra3(ket: usize, bra: usize) -> CMat {
    CMat::basis_op(8, ket, bra)
}

const QUBITS3: [usize; 3] = [2, 2, 2];

/// `A₁ … A₇` on qubits `(a, b, c)`; basis labels are read as binary `abc`.
pub fn e1_kraus() -> Vec<CMat> {
    vec![
        &ket_bra3(0b000, 0b000) + &ket_bra3(0b111, 0b111),
        ket_bra3(0b001, 0b001),
        ket_bra3(0b010, 0b010),
        ket_bra3(0b101, 0b101),
        ket_bra3(0b110, 0b110),
        ket_bra3(0b000, 0b011),
        ket_bra3(0b111, 0b100),
    ]
}

/// The first map, which cannot entangle `b|(ac)` or `c|(ab)`.
pub fn e1() -> KrausMap {
    KrausMap::new(e1_kraus(), QUBITS3.to_vec()).expect("static Kraus family")
}

/// Permutation unitary exchanging qubits `a` and `b`.
pub fn swap_ab() -> CMat {
    let mut u = CMat::zeros(8);
    for x in 0..8usize {
        let (a, b, c) = (x >> 2 & 1, x >> 1 & 1, x & 1);
        u[((b << 2) | (a << 1) | c, x)] = c64(1.0, 0.0);
    }
    u
}

/// [`e1`] with the roles of `a` and `b` exchanged.
pub fn e2() -> KrausMap {
    e1().conjugated(&swap_ab()).expect("matching dimensions")
}

/// `C₁ … C₇` as published for the composition.
pub fn published_composition_kraus() -> Vec<CMat> {
    let a = e1_kraus();
    vec![
        a[0].clone(),
        a[1].clone(),
        ket_bra3(0b000, 0b010),
        a[5].clone(),
        a[6].clone(),
        ket_bra3(0b111, 0b101),
        a[4].clone(),
    ]
}

pub fn published_composition() -> KrausMap {
    KrausMap::new(published_composition_kraus(), QUBITS3.to_vec()).expect("static Kraus family")
}

/// `ℰ₂ ∘ ℰ₁` computed by multiplying Kraus operators.
pub fn composed() -> KrausMap {
    compose(&e2(), &e1()).expect("matching dimensions")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditVerdict {
    NoViolationFound,
    EntanglingWitnessFound,
}

impl AuditVerdict {
    pub fn label(self) -> &'static str {
        match self {
            AuditVerdict::NoViolationFound => "no-violation-found",
            AuditVerdict::EntanglingWitnessFound => "entangling-witness-found",
        }
    }
}

/// Outcome of a randomized search for a separable input that the map
/// entangles. A clean report is evidence, not proof.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub partition: Bipartition,
    pub samples: usize,
    pub seed: u64,
    pub max_output_negativity: f64,
    /// Sample index attaining the maximum.
    pub argmax_sample: usize,
    pub verdict: AuditVerdict,
    pub witness_state: Option<DensityMatrix>,
}

fn audit_sample(
    map: &KrausMap,
    part: &Bipartition,
    seed: u64,
    index: usize,
) -> Result<(f64, DensityMatrix)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let terms = rng.random_range(1..=MAX_AUDIT_TERMS);
    let input = random_separable_state(map.dims(), part, terms, &mut rng)?;
    let output = map.apply(&input)?;
    Ok((negativity(&output, part)?, input))
}

/// Applies `map` to `samples` random separable states across `part` and
/// records the largest output negativity. Sample `i` draws from stream `i` of
/// a generator seeded with `seed`, so reports do not depend on scheduling.
pub fn audit_nonentangling(
    map: &KrausMap,
    part: &Bipartition,
    samples: usize,
    seed: u64,
) -> Result<AuditReport> {
    if samples == 0 {
        return Err(Error::InvalidArgument(
            "an audit needs at least one sample".into(),
        ));
    }
    if part.n_subsystems() != map.dims().len() {
        return Err(Error::BadPartition(format!(
            "partition over {} subsystems for a map on {:?}",
            part.n_subsystems(),
            map.dims()
        )));
    }
    let negs: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| audit_sample(map, part, seed, i).map(|(n, _)| n))
        .collect::<Result<_>>()?;
    // first index wins ties, keeping the report independent of thread count
    let (argmax, max) = negs
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &n)| {
            if n > best.1 {
                (i, n)
            } else {
                best
            }
        });
    let (verdict, witness_state) = if max > WITNESS_TOL {
        (
            AuditVerdict::EntanglingWitnessFound,
            Some(audit_sample(map, part, seed, argmax)?.1),
        )
    } else {
        (AuditVerdict::NoViolationFound, None)
    };
    Ok(AuditReport {
        partition: part.clone(),
        samples,
        seed,
        max_output_negativity: max,
        argmax_sample: argmax,
        verdict,
        witness_state,
    })
}

/// One outcome of measuring `c` in the `|±⟩` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PlusMinusBranch {
    /// `+1` for `|+⟩`, `−1` for `|−⟩`.
    pub outcome: i8,
    pub probability: f64,
    pub rho_ab: DensityMatrix,
    pub negativity: f64,
}

/// Applies `ℰ₂ ∘ ℰ₁` to `|+++⟩`, measures `c` in the `|±⟩` basis and returns
/// the normalized `ab` state for each outcome, `|+⟩` first.
pub fn demo_entangle_plus() -> Result<[PlusMinusBranch; 2]> {
    demo_on(&composed())
}

pub(crate) fn demo_on(map: &KrausMap) -> Result<[PlusMinusBranch; 2]> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus3 = vec![c64(1.0 / 8f64.sqrt(), 0.0); 8];
    let out = map.apply(&DensityMatrix::from_pure(&plus3, QUBITS3.to_vec())?)?;
    let ab = Bipartition::split([0], 2)?;
    let branch = |outcome: i8| -> Result<PlusMinusBranch> {
        let ket: Vec<C64> = vec![c64(s, 0.0), c64(s * outcome as f64, 0.0)];
        // ⟨±|_c ρ |±⟩_c on the ab block
        let mut block = CMat::zeros(4);
        for i in 0..4 {
            for j in 0..4 {
                let mut z = c64(0.0, 0.0);
                for (k, ck) in ket.iter().enumerate() {
                    for (l, cl) in ket.iter().enumerate() {
                        z += ck.conj() * out.mat()[(2 * i + k, 2 * j + l)] * cl;
                    }
                }
                block[(i, j)] = z;
            }
        }
        let probability = block.trace().re;
        if probability <= 1e-15 {
            return Err(Error::Consistency(format!(
                "branch {outcome:+} has zero probability"
            )));
        }
        let rho_ab = DensityMatrix::new(block.scale_real(1.0 / probability), vec![2, 2])?;
        let negativity = negativity(&rho_ab, &ab)?;
        Ok(PlusMinusBranch {
            outcome,
            probability,
            rho_ab,
            negativity,
        })
    };
    Ok([branch(1)?, branch(-1)?])
}
