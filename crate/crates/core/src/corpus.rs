//! Fixed example instances used by the analyses, the tests and the CLI
//! corpus: spin pairs, the qutrit coexistence pair, the Fourier and
//! fully compressible bases, and Alice's qutrit bases for the Peres state.

use crate::error::Result;
use crate::linalg::{c, normalized, Hermitian, Projector, C64, ONE, ZERO};
use crate::povm::{Assemblage, ParentPovm, Povm};

/// `exp(2πi/3)`.
pub fn omega() -> C64 {
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0)
}

pub fn computational_basis(d: usize) -> Vec<Vec<C64>> {
    (0..d)
        .map(|i| (0..d).map(|k| if k == i { ONE } else { ZERO }).collect())
        .collect()
}

/// `|ψ_j⟩ = d^{-1/2} Σ_k ω_d^{jk} |k⟩`.
pub fn fourier_vector(d: usize, j: usize) -> Vec<C64> {
    let s = 1.0 / (d as f64).sqrt();
    (0..d)
        .map(|k| {
            C64::from_polar(
                s,
                2.0 * std::f64::consts::PI * ((j * k) % d) as f64 / d as f64,
            )
        })
        .collect()
}

pub fn fourier_basis(d: usize) -> Vec<Vec<C64>> {
    (0..d).map(|j| fourier_vector(d, j)).collect()
}

/// Real qutrit basis whose overlaps with the computational basis satisfy the
/// fully compressible criterion.
pub fn fully_compressible_basis() -> Vec<Vec<C64>> {
    [[1.0, 2.0, 3.0], [-5.0, 1.0, 1.0], [1.0, 16.0, -11.0]]
        .iter()
        .map(|v| normalized(&v.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>()))
        .collect()
}

pub fn sharp_x() -> Povm {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Povm::from_basis(&[vec![c(s, 0.0), c(s, 0.0)], vec![c(s, 0.0), c(-s, 0.0)]])
        .expect("valid basis")
}

pub fn sharp_z() -> Povm {
    Povm::from_basis(&computational_basis(2)).expect("valid basis")
}

/// `{σ_x, σ_z}` projective measurements, outcome 0 is the `+1` eigenvalue.
pub fn sigma_xz() -> Assemblage {
    Assemblage::pair(sharp_x(), sharp_z()).expect("same dimension")
}

/// `M_{±|1} = (1 ± μ σ_x)/2`, `M_{±|2} = (1 ± μ σ_z)/2`.
pub fn noisy_xz(mu: f64) -> Result<Assemblage> {
    sigma_xz().depolarise(mu)
}

/// `G_{ij} = [1 + (i σ_x + j σ_z)/√2]/4`, indexed by `(i, j)` with outcome 0
/// meaning `+1`.
pub fn xz_parent() -> ParentPovm {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut elements = Vec::with_capacity(4);
    for i in [1.0, -1.0] {
        for j in [1.0, -1.0] {
            let h = Hermitian::from_real_rows(&[
                vec![0.25 * (1.0 + s * j), 0.25 * s * i],
                vec![0.25 * s * i, 0.25 * (1.0 - s * j)],
            ])
            .expect("symmetric");
            elements.push(h);
        }
    }
    ParentPovm::new(vec![2, 2], elements).expect("valid parent")
}

/// The qutrit pair `A_i = (1 - |i⟩⟨i|)/2` and `B_j = |j⟩⟨j|/2`,
/// `B_{j+3} = |ψ_j⟩⟨ψ_j|/2` with `ψ_j` the Fourier basis.
pub fn qutrit_pair() -> (Povm, Povm) {
    let id = Hermitian::identity(3);
    let comp = computational_basis(3);
    let a = comp
        .iter()
        .map(|v| id.sub(&Hermitian::ket_bra(v)).scale(0.5))
        .collect();
    let b = comp
        .iter()
        .chain(fourier_basis(3).iter())
        .map(|v| Hermitian::ket_bra(v).scale(0.5))
        .collect();
    (
        Povm::new(a).expect("valid POVM"),
        Povm::new(b).expect("valid POVM"),
    )
}

/// Projector onto `span{ψ_0, ψ_1}`, with basis `(ψ_0, ψ_1)`.
pub fn fourier_plane() -> Projector {
    Projector::from_orthonormal(vec![fourier_vector(3, 0), fourier_vector(3, 1)])
        .expect("orthonormal")
}

/// The qutrit pair truncated to `span{ψ_0, ψ_1}`, in the basis `(ψ_0, ψ_1)`.
pub fn qubit_counterexample_pair() -> (Povm, Povm) {
    let (a, b) = qutrit_pair();
    let p = fourier_plane();
    (
        a.truncate(&p).expect("same dimension"),
        b.truncate(&p).expect("same dimension"),
    )
}

/// Computational basis PVM paired with the [`fully_compressible_basis`] PVM.
pub fn fully_compressible_pair() -> Assemblage {
    Assemblage::pair(
        Povm::from_basis(&computational_basis(3)).expect("orthonormal"),
        Povm::from_basis(&fully_compressible_basis()).expect("orthonormal"),
    )
    .expect("same dimension")
}

/// Computational and Fourier basis PVMs on a qutrit.
pub fn qutrit_mub_pair() -> Assemblage {
    Assemblage::pair(
        Povm::from_basis(&computational_basis(3)).expect("orthonormal"),
        Povm::from_basis(&fourier_basis(3)).expect("orthonormal"),
    )
    .expect("same dimension")
}

/// Projector onto the span of the listed computational basis vectors.
pub fn coordinate_projector(d: usize, indices: &[usize]) -> Result<Projector> {
    let basis = computational_basis(d);
    Projector::from_orthonormal(indices.iter().map(|&i| basis[i].clone()).collect())
}

/// Alice's two qutrit bases for the Peres-state steering scenario.
pub fn peres_bases() -> [Vec<Vec<C64>>; 2] {
    let s3 = 1.0 / 3f64.sqrt();
    let s6 = 1.0 / 6f64.sqrt();
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let first = vec![
        vec![c(s3, 0.0), c(-s6, 0.0), c(s2, 0.0)],
        vec![c(s3, 0.0), c(-s6, 0.0), c(-s2, 0.0)],
        vec![c(s3, 0.0), c((2.0f64 / 3.0).sqrt(), 0.0), ZERO],
    ];
    let w = omega();
    let wb = w.conj();
    let i = c(0.0, 1.0);
    let second = vec![
        vec![ONE, ZERO, ZERO],
        vec![ZERO, w * s2, i * w * s2],
        vec![ZERO, wb * s2, -i * wb * s2],
    ];
    [first, second]
}

/// A point of the `(m1, m2)` grid with step 0.02 at which the Peres state,
/// measured with [`peres_measurements`], gives a steerable assemblage.
pub const PERES_POINT: (f64, f64) = (0.16, 0.38);

pub fn peres_measurements() -> Assemblage {
    let [b1, b2] = peres_bases();
    Assemblage::pair(
        Povm::from_basis(&b1).expect("orthonormal"),
        Povm::from_basis(&b2).expect("orthonormal"),
    )
    .expect("same dimension")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::inner;

    #[test]
    fn xz_parent_marginals() {
        let a = noisy_xz(std::f64::consts::FRAC_1_SQRT_2).unwrap();
        assert!(xz_parent().marginal_residual(&a) < 1e-15);
    }

    #[test]
    fn peres_bases_are_mutually_unbiased() {
        let [b1, b2] = peres_bases();
        for u in &b1 {
            for v in &b2 {
                assert!((inner(u, v).norm_sqr() - 1.0 / 3.0).abs() < 1e-14);
            }
        }
    }
}
