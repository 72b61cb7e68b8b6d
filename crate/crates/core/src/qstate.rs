//! Multipartite density matrices and the separability tooling built on them.
//!
//! Subsystems are ordered left to right with the first one most significant in
//! the computational-basis index. For the three-party systems in this crate the
//! order is always `(a, b, c)` with the ancilla `c` last.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{c64, hermitian_eigenvalues, CMat, C64};

/// Tolerance for unit trace, Hermiticity and positivity of a density matrix.
pub const STATE_TOL: f64 = 1e-10;

/// Eigenvalues in `(−NEG_EIG_CUTOFF, 0)` are treated as zero when computing
/// negativity.
pub const NEG_EIG_CUTOFF: f64 = 1e-10;

/// Negativity at or below which a state is reported PPT.
pub const PPT_TOL: f64 = 1e-10;

/// Density matrix with its tensor-factor dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: CMat,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validates trace, Hermiticity and positivity.
    pub fn new(mat: CMat, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, mat.dim())?;
        if !mat.is_finite() {
            return Err(Error::NonFinite);
        }
        let tr = mat.trace();
        if (tr - c64(1.0, 0.0)).norm() > STATE_TOL {
            return Err(Error::NotDensityMatrix(format!("trace is {tr}")));
        }
        let dev = mat.hermitian_deviation();
        if dev > STATE_TOL {
            return Err(Error::NotDensityMatrix(format!(
                "Hermitian deviation {dev:.3e}"
            )));
        }
        let min = hermitian_eigenvalues(&mat)[0];
        if min < -STATE_TOL {
            return Err(Error::NotDensityMatrix(format!(
                "smallest eigenvalue {min:.3e}"
            )));
        }
        Ok(DensityMatrix { mat, dims })
    }

    /// Skips validation; callers guarantee the invariants algebraically.
    pub(crate) fn from_parts_unchecked(mat: CMat, dims: Vec<usize>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), mat.dim());
        DensityMatrix { mat, dims }
    }

    /// `|psi⟩⟨psi|` after normalizing `psi`.
    pub fn from_pure(psi: &[C64], dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, psi.len())?;
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidArgument(
                "state vector has zero or non-finite norm".into(),
            ));
        }
        let unit: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Ok(DensityMatrix {
            mat: CMat::projector(&unit),
            dims,
        })
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        DensityMatrix {
            mat: CMat::identity(d).scale_real(1.0 / d as f64),
            dims,
        }
    }

    /// Tensor product `self ⊗ other` with concatenated dimension lists.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DensityMatrix {
            mat: crate::matcore::kron(&self.mat, &other.mat),
            dims,
        }
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn into_mat(self) -> CMat {
        self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn n_subsystems(&self) -> usize {
        self.dims.len()
    }

    /// Ascending spectrum.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.mat)
    }

    /// `U ρ U†`; `u` must be unitary.
    pub fn evolve_unitary(&self, u: &CMat) -> Result<DensityMatrix> {
        if u.dim() != self.dim() {
            return Err(Error::DimMismatch(format!(
                "unitary is {}x{}, state is {}x{}",
                u.dim(),
                u.dim(),
                self.dim(),
                self.dim()
            )));
        }
        Ok(DensityMatrix {
            mat: u.conjugate(&self.mat),
            dims: self.dims.clone(),
        })
    }

    /// Frobenius norm of ρ, i.e. the square root of the purity.
    pub fn frobenius_norm(&self) -> f64 {
        self.mat.inner().norm()
    }

    /// Projects with `proj` and renormalizes. Returns the branch probability
    /// and, when it is non-zero, the post-measurement state.
    pub fn project(&self, proj: &CMat) -> (f64, Option<DensityMatrix>) {
        let unnorm = proj.conjugate(&self.mat);
        let p = unnorm.trace().re;
        if p <= 1e-15 {
            return (p.max(0.0), None);
        }
        (
            p,
            Some(DensityMatrix {
                mat: unnorm.scale_real(1.0 / p),
                dims: self.dims.clone(),
            }),
        )
    }
}

fn check_dims(dims: &[usize], total: usize) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::BadDims {
            expected: vec![],
            got: dims.to_vec(),
        });
    }
    let product: usize = dims.iter().product();
    if product != total {
        return Err(Error::DimMismatch(format!(
            "subsystem dimensions {dims:?} multiply to {product}, matrix has dimension {total}"
        )));
    }
    Ok(())
}

/// Split of subsystem indices into two non-empty disjoint groups.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Bipartition {
    left: BTreeSet<usize>,
    right: BTreeSet<usize>,
}

impl Bipartition {
    pub fn new(
        left: impl IntoIterator<Item = usize>,
        right: impl IntoIterator<Item = usize>,
        n_subsystems: usize,
    ) -> Result<Self> {
        let left: BTreeSet<usize> = left.into_iter().collect();
        let right: BTreeSet<usize> = right.into_iter().collect();
        if left.is_empty() || right.is_empty() {
            return Err(Error::BadPartition("both groups must be non-empty".into()));
        }
        if !left.is_disjoint(&right) {
            return Err(Error::BadPartition("groups overlap".into()));
        }
        let all: BTreeSet<usize> = left.union(&right).copied().collect();
        if all != (0..n_subsystems).collect() {
            return Err(Error::BadPartition(format!(
                "groups {left:?} | {right:?} do not cover 0..{n_subsystems}"
            )));
        }
        Ok(Bipartition { left, right })
    }

    /// `left | complement`.
    pub fn split(left: impl IntoIterator<Item = usize>, n_subsystems: usize) -> Result<Self> {
        let left: BTreeSet<usize> = left.into_iter().collect();
        if let Some(&bad) = left.iter().find(|&&i| i >= n_subsystems) {
            return Err(Error::BadIndex {
                index: bad,
                n: n_subsystems,
            });
        }
        let right: Vec<usize> = (0..n_subsystems).filter(|i| !left.contains(i)).collect();
        Bipartition::new(left, right, n_subsystems)
    }

    pub fn left(&self) -> &BTreeSet<usize> {
        &self.left
    }

    pub fn right(&self) -> &BTreeSet<usize> {
        &self.right
    }

    pub fn n_subsystems(&self) -> usize {
        self.left.len() + self.right.len()
    }

    pub fn swapped(&self) -> Bipartition {
        Bipartition {
            left: self.right.clone(),
            right: self.left.clone(),
        }
    }

    /// Cut label such as `c|(ab)` using one name per subsystem.
    pub fn label(&self, names: &[&str]) -> String {
        let group = |s: &BTreeSet<usize>| {
            let joined: String = s
                .iter()
                .map(|&i| names.get(i).copied().unwrap_or("?"))
                .collect();
            if s.len() > 1 {
                format!("({joined})")
            } else {
                joined
            }
        };
        format!("{}|{}", group(&self.left), group(&self.right))
    }

    fn validate_for(&self, dims: &[usize]) -> Result<()> {
        if self.n_subsystems() != dims.len()
            || self
                .left
                .iter()
                .chain(&self.right)
                .any(|&i| i >= dims.len())
        {
            return Err(Error::BadPartition(format!(
                "partition over {} subsystems applied to state with dims {dims:?}",
                self.n_subsystems()
            )));
        }
        Ok(())
    }

    fn group_dims(&self, dims: &[usize]) -> (usize, usize) {
        (
            self.left.iter().map(|&i| dims[i]).product(),
            self.right.iter().map(|&i| dims[i]).product(),
        )
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}|{:?}", self.left, self.right)
    }
}

/// The three single-party cuts `a|(bc)`, `b|(ac)`, `c|(ab)` of a tripartite system.
pub fn tripartite_cuts() -> [Bipartition; 3] {
    [0, 1, 2].map(|i| Bipartition::split([i], 3).expect("valid tripartite cut"))
}

pub const ABC: [&str; 3] = ["a", "b", "c"];

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn digits(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
}

/// Embeds `op`, acting on `targets` (in the given order), into the full space
/// with identity on every other subsystem.
pub fn embed_operator(op: &CMat, targets: &[usize], dims: &[usize]) -> Result<CMat> {
    let n = dims.len();
    let mut seen = BTreeSet::new();
    for &t in targets {
        if t >= n {
            return Err(Error::BadIndex { index: t, n });
        }
        if !seen.insert(t) {
            return Err(Error::InvalidArgument(format!(
                "repeated target subsystem {t}"
            )));
        }
    }
    let target_dims: Vec<usize> = targets.iter().map(|&t| dims[t]).collect();
    let op_dim: usize = target_dims.iter().product();
    if op_dim != op.dim() {
        return Err(Error::DimMismatch(format!(
            "operator of dimension {} on subsystems with dimensions {target_dims:?}",
            op.dim()
        )));
    }
    let total: usize = dims.iter().product();
    let rest: Vec<usize> = (0..n).filter(|i| !seen.contains(i)).collect();
    let mut di = vec![0; n];
    let mut dj = vec![0; n];
    let mut out = CMat::zeros(total);
    for i in 0..total {
        digits(i, dims, &mut di);
        for j in 0..total {
            digits(j, dims, &mut dj);
            if rest.iter().any(|&k| di[k] != dj[k]) {
                continue;
            }
            let (mut ti, mut tj) = (0, 0);
            for &t in targets {
                ti = ti * dims[t] + di[t];
                tj = tj * dims[t] + dj[t];
            }
            out[(i, j)] = op[(ti, tj)];
        }
    }
    Ok(out)
}

/// Partial trace of a raw matrix keeping the subsystems in `keep`.
pub fn partial_trace_mat(mat: &CMat, dims: &[usize], keep: &[usize]) -> Result<(CMat, Vec<usize>)> {
    check_dims(dims, mat.dim())?;
    let n = dims.len();
    let keep: BTreeSet<usize> = keep.iter().copied().collect();
    if keep.is_empty() {
        return Err(Error::InvalidArgument(
            "must keep at least one subsystem".into(),
        ));
    }
    if let Some(&bad) = keep.iter().find(|&&k| k >= n) {
        return Err(Error::BadIndex { index: bad, n });
    }
    let kept: Vec<usize> = keep.iter().copied().collect();
    let traced: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
    let out_dims: Vec<usize> = kept.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = out_dims.iter().product();
    let total = mat.dim();
    let mut out = CMat::zeros(out_dim);
    let mut di = vec![0; n];
    let mut dj = vec![0; n];
    for i in 0..total {
        digits(i, dims, &mut di);
        for j in 0..total {
            digits(j, dims, &mut dj);
            if traced.iter().any(|&k| di[k] != dj[k]) {
                continue;
            }
            let (mut ri, mut rj) = (0, 0);
            for &k in &kept {
                ri = ri * dims[k] + di[k];
                rj = rj * dims[k] + dj[k];
            }
            out[(ri, rj)] += mat[(i, j)];
        }
    }
    Ok((out, out_dims))
}

/// Reduced state on the subsystems in `keep` (kept in ascending order).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let (mat, dims) = partial_trace_mat(&rho.mat, &rho.dims, keep)?;
    Ok(DensityMatrix::from_parts_unchecked(mat, dims))
}

/// Transposes the subsystems in `transposed` of a raw matrix.
pub fn partial_transpose_mat(mat: &CMat, dims: &[usize], transposed: &BTreeSet<usize>) -> CMat {
    let n = dims.len();
    let st = strides(dims);
    let total = mat.dim();
    let mut out = CMat::zeros(total);
    let mut di = vec![0; n];
    let mut dj = vec![0; n];
    for i in 0..total {
        digits(i, dims, &mut di);
        for j in 0..total {
            digits(j, dims, &mut dj);
            let (mut ni, mut nj) = (i, j);
            for &k in transposed {
                // swap digit k between row and column index
                ni = ni - di[k] * st[k] + dj[k] * st[k];
                nj = nj - dj[k] * st[k] + di[k] * st[k];
            }
            out[(ni, nj)] = mat[(i, j)];
        }
    }
    out
}

/// Partial transpose on the right-hand group of `part`.
pub fn partial_transpose(rho: &DensityMatrix, part: &Bipartition) -> Result<CMat> {
    part.validate_for(&rho.dims)?;
    Ok(partial_transpose_mat(&rho.mat, &rho.dims, &part.right))
}

/// Sum of the moduli of the negative eigenvalues, ignoring noise-floor values.
pub fn negativity_from_spectrum(eigenvalues: &[f64]) -> f64 {
    // folding from +0.0 keeps an empty sum from printing as -0
    eigenvalues
        .iter()
        .filter(|&&l| l <= -NEG_EIG_CUTOFF)
        .fold(0.0, |acc, l| acc - l)
}

/// Negativity across `part`.
pub fn negativity(rho: &DensityMatrix, part: &Bipartition) -> Result<f64> {
    let pt = partial_transpose(rho, part)?;
    Ok(negativity_from_spectrum(&hermitian_eigenvalues(&pt)))
}

/// Smallest eigenvalue of the partial transpose across `part`.
pub fn min_partial_transpose_eigenvalue(rho: &DensityMatrix, part: &Bipartition) -> Result<f64> {
    let pt = partial_transpose(rho, part)?;
    Ok(hermitian_eigenvalues(&pt)[0])
}

/// Radius of the largest Frobenius ball around `I/d` containing only
/// separable states.
pub fn separable_ball_radius(total_dim: usize) -> f64 {
    let d = total_dim as f64;
    1.0 / (d * (d - 1.0)).sqrt()
}

/// Sufficient separability test: `‖ρ − I/d‖_F ≤ 1/√(d(d−1))`.
///
/// The ball certifies full separability, so a `true` answer holds for every
/// cut including `part`; `false` is inconclusive.
pub fn ball_certified_separable(rho: &DensityMatrix, _part: &Bipartition) -> bool {
    let d = rho.dim();
    let centre = CMat::identity(d).scale_real(1.0 / d as f64);
    rho.mat.frobenius_distance(&centre) <= separable_ball_radius(d)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparabilityVerdict {
    pub negativity: f64,
    pub ppt: bool,
    pub ball_certified: bool,
    /// The cut is 2×2 or 2×3, where PPT implies separability.
    pub ppt_sufficient: bool,
}

impl SeparabilityVerdict {
    pub fn certified_separable(&self) -> bool {
        self.ball_certified || (self.ppt && self.ppt_sufficient)
    }

    pub fn label(&self) -> &'static str {
        if !self.ppt {
            "entangled (NPT)"
        } else if self.certified_separable() {
            "separable"
        } else {
            "PPT, not certified separable"
        }
    }
}

pub fn separability_verdict(
    rho: &DensityMatrix,
    part: &Bipartition,
) -> Result<SeparabilityVerdict> {
    let negativity = negativity(rho, part)?;
    let (dl, dr) = part.group_dims(&rho.dims);
    Ok(SeparabilityVerdict {
        negativity,
        ppt: negativity <= PPT_TOL,
        ball_certified: ball_certified_separable(rho, part),
        ppt_sufficient: dl * dr <= 6,
    })
}

/// Haar-random unit vector in dimension `dim`.
pub fn haar_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..dim)
            .map(|_| c64(StandardNormal.sample(rng), StandardNormal.sample(rng)))
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Convex mixture of `terms` Haar-random pure product states across `part`,
/// with flat-Dirichlet weights.
pub fn random_separable_state<R: Rng + ?Sized>(
    dims: &[usize],
    part: &Bipartition,
    terms: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    if terms == 0 {
        return Err(Error::InvalidArgument("need at least one term".into()));
    }
    check_dims(dims, dims.iter().product())?;
    part.validate_for(dims)?;
    let n = dims.len();
    let total: usize = dims.iter().product();
    let (dl, dr) = part.group_dims(dims);
    let left: Vec<usize> = part.left.iter().copied().collect();
    let right: Vec<usize> = part.right.iter().copied().collect();

    let weights: Vec<f64> = (0..terms).map(|_| Exp1.sample(rng)).collect();
    let weight_sum: f64 = weights.iter().sum();

    let mut mat = CMat::zeros(total);
    let mut di = vec![0; n];
    for &w in &weights {
        let phi_l = haar_pure_state(dl, rng);
        let phi_r = haar_pure_state(dr, rng);
        let psi: Vec<C64> = (0..total)
            .map(|i| {
                digits(i, dims, &mut di);
                let li = left.iter().fold(0, |acc, &k| acc * dims[k] + di[k]);
                let ri = right.iter().fold(0, |acc, &k| acc * dims[k] + di[k]);
                phi_l[li] * phi_r[ri]
            })
            .collect();
        mat = &mat + &CMat::projector(&psi).scale_real(w / weight_sum);
    }
    Ok(DensityMatrix::from_parts_unchecked(mat, dims.to_vec()))
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    let diff = &a.mat - &b.mat;
    0.5 * hermitian_eigenvalues(&diff)
        .iter()
        .map(|l| l.abs())
        .sum::<f64>()
}

/// `(|0…0⟩ + |1…1⟩)/√2` on `n` qubits.
pub fn ghz_vector(n: usize) -> Vec<C64> {
    let d = 1usize << n;
    let mut v = vec![c64(0.0, 0.0); d];
    v[0] = c64(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    v[d - 1] = c64(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    v
}

/// `|φ⁺⟩ = (|00⟩ + |11⟩)/√2`.
pub fn phi_plus_vector() -> Vec<C64> {
    ghz_vector(2)
}

pub fn phi_plus() -> DensityMatrix {
    DensityMatrix::from_parts_unchecked(CMat::projector(&phi_plus_vector()), vec![2, 2])
}
