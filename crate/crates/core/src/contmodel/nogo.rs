//! First-order argument that a pure product state cannot entangle `a` with
//! `b` while `c` stays in a product with them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{ladder_coupling, ladder_h0, validate_epsilon};
use crate::error::{Error, Result};
use crate::matcore::{c64, kron, kron_vec, sigma_x, CMat, C64};
use crate::qstate::{embed_operator, haar_pure_state};

fn normalized(v: &[C64]) -> Result<Vec<C64>> {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::InvalidArgument(
            "state vector has zero or non-finite norm".into(),
        ));
    }
    Ok(v.iter().map(|z| z / n).collect())
}

fn overlap(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(p, q)| p.conj() * q).sum()
}

/// Largest-modulus amplitude `⟨a⊥, b⊥, c′| (H_AC ⊗ 1_B + 1_A ⊗ H_BC) |a, b, c⟩`
/// over computational basis states `c′`.
///
/// `h_ac` acts on `a ⊗ c` and `h_bc` on `b ⊗ c`. The result vanishes for any
/// such Hamiltonians because each term leaves one of `a`, `b` untouched.
#[allow(clippy::too_many_arguments)]
pub fn pure_firstorder_amplitude(
    h_ac: &CMat,
    h_bc: &CMat,
    a: &[C64],
    b: &[C64],
    c: &[C64],
    a_perp: &[C64],
    b_perp: &[C64],
) -> Result<C64> {
    let (da, db, dc) = (a.len(), b.len(), c.len());
    if a_perp.len() != da || b_perp.len() != db {
        return Err(Error::DimMismatch(
            "orthogonal partners must match their states' dimensions".into(),
        ));
    }
    if h_ac.dim() != da * dc || h_bc.dim() != db * dc {
        return Err(Error::DimMismatch(format!(
            "H_ac is {}-dimensional and H_bc is {}-dimensional for dims ({da}, {db}, {dc})",
            h_ac.dim(),
            h_bc.dim()
        )));
    }
    let (a, b, c) = (normalized(a)?, normalized(b)?, normalized(c)?);
    let (a_perp, b_perp) = (normalized(a_perp)?, normalized(b_perp)?);
    for (x, y) in [(&a, &a_perp), (&b, &b_perp)] {
        let ov = overlap(x, y).norm();
        if ov > 1e-12 {
            return Err(Error::NotOrthogonal { overlap: ov });
        }
    }
    let dims = [da, db, dc];
    let h = &embed_operator(h_ac, &[0, 2], &dims)? + &embed_operator(h_bc, &[1, 2], &dims)?;
    let image = h.mat_vec(&kron_vec(&kron_vec(&a, &b), &c));
    let perp_ab = kron_vec(&a_perp, &b_perp);
    let mut best = c64(0.0, 0.0);
    for level in 0..dc {
        let mut c_prime = vec![c64(0.0, 0.0); dc];
        c_prime[level] = c64(1.0, 0.0);
        let amp = overlap(&kron_vec(&perp_ab, &c_prime), &image);
        if amp.norm() > best.norm() {
            best = amp;
        }
    }
    Ok(best)
}

/// The model Hamiltonian split into its `a–c` and `b–c` parts, each carrying
/// half the ladder energy: `H_xc = I₂ ⊗ H₀/2 + (ε/2) σ_x ⊗ (ĉ + ĉ†)`.
pub fn coupled_local_hamiltonians(epsilon: f64) -> Result<(CMat, CMat)> {
    validate_epsilon(epsilon)?;
    let local = &kron(&CMat::identity(2), &ladder_h0().scale_real(0.5))
        + &kron(&sigma_x(), &ladder_coupling()).scale_real(epsilon / 2.0);
    Ok((local.clone(), local))
}

fn gaussian_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let a = CMat::from_fn(n, |_, _| {
        c64(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    (&a + &a.adjoint()).scale_real(0.5)
}

fn orthogonal_partner(rng: &mut ChaCha8Rng, v: &[C64]) -> Vec<C64> {
    loop {
        let w = haar_pure_state(v.len(), rng);
        let ov = overlap(v, &w);
        let perp: Vec<C64> = w.iter().zip(v).map(|(x, y)| x - ov * y).collect();
        let n = perp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-6 {
            return perp.into_iter().map(|z| z / n).collect();
        }
    }
}

/// `|amplitude|` for `samples` random instances on subsystems of dimensions
/// `dims = (d_a, d_b, d_c)`: Gaussian Hermitian `H_ac`, `H_bc`, Haar-random
/// states and random orthogonal partners. Instance `i` draws from stream `i`
/// of a generator seeded with `seed`.
pub fn random_firstorder_amplitudes(
    dims: [usize; 3],
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let [da, db, dc] = dims;
    if da < 2 || db < 2 || dc < 1 {
        return Err(Error::BadDims {
            expected: vec![2, 2, 1],
            got: dims.to_vec(),
        });
    }
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let h_ac = gaussian_hermitian(&mut rng, da * dc);
            let h_bc = gaussian_hermitian(&mut rng, db * dc);
            let a = haar_pure_state(da, &mut rng);
            let b = haar_pure_state(db, &mut rng);
            let c = haar_pure_state(dc, &mut rng);
            let a_perp = orthogonal_partner(&mut rng, &a);
            let b_perp = orthogonal_partner(&mut rng, &b);
            Ok(pure_firstorder_amplitude(&h_ac, &h_bc, &a, &b, &c, &a_perp, &b_perp)?.norm())
        })
        .collect()
}
