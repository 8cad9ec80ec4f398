//! Complex Hermitian linear algebra: eigendecomposition, partial trace and
//! transpose, projectors and Haar-random subspaces.
//!
//! Every stochastic routine takes an explicit seed and draws from
//! [`ChaCha8Rng`](rand_chacha::ChaCha8Rng), so results are reproducible
//! across runs and platforms.

mod eigen;
mod hermitian;
mod matrix;

pub use eigen::{embed, hermitian_eigen, jacobi_symmetric, min_eigenvalue_symmetric, unembed};
pub use hermitian::{Eigen, Hermitian, Projector, HERMITIAN_TOL, PROJECTOR_TOL};
pub use matrix::{
    c, cholesky_solve, gram_schmidt, inner, norm, normalized, CMatrix, RMatrix, C64, I, ONE, ZERO,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// The seedable generator used throughout the toolkit.
pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Which tensor factor an operation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Side {
    A,
    B,
}

/// Validated eigendecomposition of a (possibly unvalidated) complex matrix.
pub fn eig_hermitian(m: &CMatrix) -> Result<Eigen> {
    Ok(Hermitian::new(m.clone())?.eig())
}

fn check_bipartite(m: &Hermitian, dims: (usize, usize)) -> Result<()> {
    let (da, db) = dims;
    if da == 0 || db == 0 || m.dim() != da * db {
        return Err(Error::DimensionMismatch {
            expected: da * db,
            found: m.dim(),
        });
    }
    Ok(())
}

/// Partial trace of an operator on `C^dA ⊗ C^dB` (basis index `i·dB + j`).
pub fn partial_trace(m: &Hermitian, dims: (usize, usize), traced: Side) -> Result<Hermitian> {
    check_bipartite(m, dims)?;
    let (da, db) = dims;
    let out = match traced {
        Side::A => CMatrix::from_fn(db, db, |j, l| {
            (0..da).map(|i| m[(i * db + j, i * db + l)]).sum()
        }),
        Side::B => CMatrix::from_fn(da, da, |i, k| {
            (0..db).map(|j| m[(i * db + j, k * db + j)]).sum()
        }),
    };
    Ok(Hermitian::symmetrized(out))
}

/// Partial transpose on one factor. A pure permutation of entries, so it is
/// an exact involution.
pub fn partial_transpose(m: &Hermitian, dims: (usize, usize), side: Side) -> Result<Hermitian> {
    check_bipartite(m, dims)?;
    let (_, db) = dims;
    let n = m.dim();
    let out = CMatrix::from_fn(n, n, |r, s| {
        let (i, j) = (r / db, r % db);
        let (k, l) = (s / db, s % db);
        match side {
            Side::A => m[(k * db + j, i * db + l)],
            Side::B => m[(i * db + l, k * db + j)],
        }
    });
    // Entry permutation of a Hermitian matrix stays Hermitian; no re-symmetrisation
    // so that applying the map twice reproduces the input bit for bit.
    Ok(Hermitian::new(out).expect("partial transpose preserves Hermiticity"))
}

/// Vector of i.i.d. standard complex Gaussians (`E|z|² = 1`).
pub fn complex_gaussian_vector(d: usize, rng: &mut Rng) -> Vec<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..d)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            c(s * re, s * im)
        })
        .collect()
}

/// First `n` columns of a Haar-random unitary: Gaussian vectors orthonormalised
/// by modified Gram-Schmidt.
pub fn haar_frame(d: usize, n: usize, rng: &mut Rng) -> Vec<Vec<C64>> {
    loop {
        let raw: Vec<Vec<C64>> = (0..n).map(|_| complex_gaussian_vector(d, rng)).collect();
        if let Some(onb) = gram_schmidt(&raw, 1e-8) {
            return onb;
        }
    }
}

/// Haar-random unitary as a matrix with the frame vectors as columns.
pub fn haar_unitary(d: usize, rng: &mut Rng) -> CMatrix {
    CMatrix::from_columns(&haar_frame(d, d, rng)).expect("square frame")
}

/// Projector onto a Haar-random `n`-dimensional subspace of `C^d`, drawn from a
/// generator seeded with `seed`.
pub fn haar_subspace(d: usize, n: usize, seed: u64) -> Result<Projector> {
    if n == 0 || n >= d {
        return Err(Error::validation(format!(
            "subspace dimension must satisfy 1 <= n < d (n = {n}, d = {d})"
        )));
    }
    let mut rng = rng_from_seed(seed);
    haar_subspace_with(d, n, &mut rng)
}

pub fn haar_subspace_with(d: usize, n: usize, rng: &mut Rng) -> Result<Projector> {
    Projector::from_orthonormal(haar_frame(d, n, rng))
}

/// Real symmetric embedding of a Hermitian matrix (dimension doubled).
pub fn real_embedding(m: &Hermitian) -> RMatrix {
    m.real_embedding()
}

/// Random Hermitian matrix with i.i.d. Gaussian entries (GUE-like scaling).
pub fn random_hermitian(d: usize, rng: &mut Rng) -> Hermitian {
    let g = CMatrix::from_fn(d, d, |_, _| {
        let v = complex_gaussian_vector(1, rng);
        v[0]
    });
    Hermitian::symmetrized(g)
}

/// Random positive semidefinite matrix `G G†` with `G` a `d x k` Gaussian matrix.
pub fn random_psd(d: usize, k: usize, rng: &mut Rng) -> Hermitian {
    let g = CMatrix::from_columns(
        &(0..k)
            .map(|_| complex_gaussian_vector(d, rng))
            .collect::<Vec<_>>(),
    )
    .expect("equal columns");
    Hermitian::symmetrized(g.matmul(&g.dagger()))
}

/// Random density matrix of rank `k`.
pub fn random_density(d: usize, k: usize, rng: &mut Rng) -> Hermitian {
    let p = random_psd(d, k, rng);
    let t = p.trace_re();
    p.scale(1.0 / t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi_plus() -> Hermitian {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = vec![c(s, 0.0), ZERO, ZERO, c(s, 0.0)];
        Hermitian::ket_bra(&v)
    }

    #[test]
    fn partial_transpose_of_phi_plus_has_negative_eigenvalue() {
        let pt = partial_transpose(&phi_plus(), (2, 2), Side::B).unwrap();
        let vals = pt.eig().values;
        // oracle: PT of |Φ+><Φ+| is SWAP/2, spectrum {1/2, 1/2, 1/2, -1/2}
        let expected = [0.5, 0.5, 0.5, -0.5];
        for (v, e) in vals.iter().zip(expected) {
            assert!((v - e).abs() < 1e-12, "{vals:?}");
        }
    }

    #[test]
    fn partial_trace_identity_3x2() {
        let id = Hermitian::identity(6);
        let r = partial_trace(&id, (3, 2), Side::B).unwrap();
        assert!(r.max_abs_diff(&Hermitian::identity(3).scale(2.0)) < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let id = Hermitian::identity(5);
        assert!(partial_trace(&id, (3, 2), Side::A).is_err());
        assert!(partial_transpose(&id, (2, 2), Side::A).is_err());
    }

    #[test]
    fn haar_subspace_rejects_full_dimension() {
        assert!(haar_subspace(3, 3, 1).is_err());
        assert!(haar_subspace(3, 0, 1).is_err());
    }

    #[test]
    fn haar_subspace_is_deterministic() {
        let a = haar_subspace(3, 2, 42).unwrap();
        let b = haar_subspace(3, 2, 42).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        let (idem, tr) = a.defect();
        assert!(idem < 1e-10 && tr < 1e-10);
    }
}
