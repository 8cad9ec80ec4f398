//! Steering: state assemblages, the local-hidden-state SDP, pretty-good
//! measurements, the Choi channel of a state, and the bound entangled
//! two-qutrit family that is invariant under partial transposition.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus;
use crate::error::{Error, Result};
use crate::incompat::{depolarising_robustness, marginal_feasibility, Verdict};
use crate::linalg::{
    c, partial_trace, partial_transpose, CMatrix, Hermitian, Projector, Side, C64, ZERO,
};
use crate::povm::{outcome_tuples, Assemblage, Povm};
use crate::sdp::SdpOptions;

/// Eigenvalues of `ρ_B` below this are excluded from its support.
pub const PINV_CUTOFF: f64 = 1e-10;
pub const STATE_PSD_TOL: f64 = 1e-9;
pub const STATE_TRACE_TOL: f64 = 1e-10;
pub const NO_SIGNALLING_TOL: f64 = 1e-8;

/// Density matrix on `C^{dA} ⊗ C^{dB}`, basis index `i dB + j`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "StateRaw")]
pub struct BipartiteState {
    pub da: usize,
    pub db: usize,
    pub matrix: Hermitian,
}

#[derive(Deserialize)]
struct StateRaw {
    da: usize,
    db: usize,
    matrix: Hermitian,
}

impl TryFrom<StateRaw> for BipartiteState {
    type Error = Error;
    fn try_from(r: StateRaw) -> Result<Self> {
        BipartiteState::new(r.da, r.db, r.matrix)
    }
}

impl BipartiteState {
    pub fn new(da: usize, db: usize, matrix: Hermitian) -> Result<Self> {
        if da == 0 || db == 0 || matrix.dim() != da * db {
            return Err(Error::DimensionMismatch {
                expected: da * db,
                found: matrix.dim(),
            });
        }
        let tr = matrix.trace_re();
        if (tr - 1.0).abs() > STATE_TRACE_TOL {
            return Err(Error::validation(format!("state trace is {tr}, not 1")));
        }
        let l = matrix.min_eigenvalue();
        if l < -STATE_PSD_TOL {
            return Err(Error::validation(format!(
                "state has negative eigenvalue {l:.3e}"
            )));
        }
        Ok(BipartiteState { da, db, matrix })
    }

    pub fn product(rho_a: &Hermitian, rho_b: &Hermitian) -> Result<Self> {
        BipartiteState::new(rho_a.dim(), rho_b.dim(), rho_a.kron(rho_b))
    }

    /// `|Φ+⟩ = d^{-1/2} Σ_i |ii⟩`.
    pub fn maximally_entangled(d: usize) -> Self {
        let s = 1.0 / (d as f64).sqrt();
        let v: Vec<C64> = (0..d * d)
            .map(|k| if k / d == k % d { c(s, 0.0) } else { ZERO })
            .collect();
        BipartiteState::new(d, d, Hermitian::ket_bra(&v)).expect("pure state")
    }

    /// `p |Φ+⟩⟨Φ+| + (1 - p) 1/d²`.
    pub fn isotropic(d: usize, p: f64) -> Result<Self> {
        let phi = BipartiteState::maximally_entangled(d).matrix;
        let id = Hermitian::identity(d * d).scale((1.0 - p) / (d * d) as f64);
        BipartiteState::new(d, d, phi.scale(p).add(&id))
    }

    /// `(U ⊗ V) ρ (U ⊗ V)†`.
    pub fn local_unitary(&self, u: &CMatrix, v: &CMatrix) -> Result<Self> {
        let w = u.kron(v);
        BipartiteState::new(self.da, self.db, self.matrix.conjugate_by(&w))
    }

    pub fn reduced_b(&self) -> Hermitian {
        partial_trace(&self.matrix, (self.da, self.db), Side::A).expect("consistent dimensions")
    }

    /// `max |ρ^{T_A} - ρ|` and the smallest eigenvalue of `ρ^{T_A}`.
    pub fn partial_transpose_a(&self) -> (f64, f64) {
        let pt = partial_transpose(&self.matrix, (self.da, self.db), Side::A)
            .expect("consistent dimensions");
        (pt.max_abs_diff(&self.matrix), pt.min_eigenvalue())
    }
}

/// Conditional states `σ_{a|x}` of the steered party.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "StateAssemblageRaw")]
pub struct StateAssemblage {
    pub db: usize,
    pub sigmas: Vec<Vec<Hermitian>>,
    pub reduced: Hermitian,
}

#[derive(Deserialize)]
struct StateAssemblageRaw {
    sigmas: Vec<Vec<Hermitian>>,
}

impl TryFrom<StateAssemblageRaw> for StateAssemblage {
    type Error = Error;
    fn try_from(r: StateAssemblageRaw) -> Result<Self> {
        StateAssemblage::new(r.sigmas)
    }
}

impl StateAssemblage {
    /// Validates positivity and no-signalling; `ρ_B` is the sum over the
    /// first setting.
    pub fn new(sigmas: Vec<Vec<Hermitian>>) -> Result<Self> {
        let first = sigmas
            .first()
            .and_then(|s| s.first())
            .ok_or_else(|| Error::validation("empty state assemblage"))?;
        let db = first.dim();
        let sum = |set: &[Hermitian]| set.iter().fold(Hermitian::zeros(db), |acc, s| acc.add(s));
        let reduced = sum(&sigmas[0]);
        for (x, set) in sigmas.iter().enumerate() {
            for (a, s) in set.iter().enumerate() {
                if s.dim() != db {
                    return Err(Error::DimensionMismatch {
                        expected: db,
                        found: s.dim(),
                    });
                }
                let l = s.min_eigenvalue();
                if l < -STATE_PSD_TOL {
                    return Err(Error::validation(format!(
                        "sigma[{x}][{a}] has negative eigenvalue {l:.3e}"
                    )));
                }
            }
            let r = sum(set).max_abs_diff(&reduced);
            if r > NO_SIGNALLING_TOL {
                return Err(Error::validation(format!(
                    "setting {x} violates no-signalling (residual {r:.3e})"
                )));
            }
        }
        Ok(StateAssemblage {
            db,
            sigmas,
            reduced,
        })
    }

    pub fn outcome_counts(&self) -> Vec<usize> {
        self.sigmas.iter().map(|s| s.len()).collect()
    }
}

/// `σ_{a|x} = tr_A[(A_{a|x} ⊗ 1) ρ]`.
pub fn assemblage_from_state(rho: &BipartiteState, alice: &Assemblage) -> Result<StateAssemblage> {
    if alice.dim() != rho.da {
        return Err(Error::DimensionMismatch {
            expected: rho.da,
            found: alice.dim(),
        });
    }
    let (da, db) = (rho.da, rho.db);
    let conditional = |e: &Hermitian| {
        // σ_ij = Σ_kl E_lk ρ_{(k,i),(l,j)}
        let m = CMatrix::from_fn(db, db, |i, j| {
            let mut s = ZERO;
            for k in 0..da {
                for l in 0..da {
                    s += e[(l, k)] * rho.matrix[(k * db + i, l * db + j)];
                }
            }
            s
        });
        Hermitian::symmetrized(m)
    };
    let sigmas = alice
        .measurements()
        .iter()
        .map(|m| m.elements().iter().map(conditional).collect())
        .collect();
    let mut sa = StateAssemblage::new(sigmas)?;
    sa.reduced = rho.reduced_b();
    Ok(sa)
}

/// Local hidden states `σ_λ` indexed by outcome tuples.
#[derive(Clone, Debug, Serialize)]
pub struct LhsModel {
    pub outcome_counts: Vec<usize>,
    pub labels: Vec<Vec<usize>>,
    pub states: Vec<Hermitian>,
}

impl LhsModel {
    /// Largest entry of `Σ_{λ: λ_x = a} σ_λ - σ_{a|x}`.
    pub fn residual(&self, sa: &StateAssemblage) -> f64 {
        let mut r: f64 = 0.0;
        for (x, set) in sa.sigmas.iter().enumerate() {
            for (a, s) in set.iter().enumerate() {
                let m = self
                    .labels
                    .iter()
                    .zip(&self.states)
                    .filter(|(l, _)| l[x] == a)
                    .fold(Hermitian::zeros(sa.db), |acc, (_, g)| acc.add(g));
                r = r.max(m.max_abs_diff(s));
            }
        }
        r
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LhsResult {
    pub unsteerable: bool,
    /// Identity-shift margin of the feasibility SDP; negative values certify
    /// steerability.
    pub slack: f64,
    pub model: Option<LhsModel>,
}

/// Searches for a local-hidden-state model of `sa`.
pub fn lhs_feasible(sa: &StateAssemblage) -> Result<LhsResult> {
    lhs_feasible_with(sa, &SdpOptions::default())
}

pub fn lhs_feasible_with(sa: &StateAssemblage, opts: &SdpOptions) -> Result<LhsResult> {
    let sets: Vec<&[Hermitian]> = sa.sigmas.iter().map(|s| s.as_slice()).collect();
    let (unsteerable, slack, states) = marginal_feasibility(sa.db, &sets, opts)?;
    let model = states.map(|states| {
        let outcome_counts = sa.outcome_counts();
        LhsModel {
            labels: outcome_tuples(&outcome_counts),
            outcome_counts,
            states,
        }
    });
    Ok(LhsResult {
        unsteerable,
        slack,
        model,
    })
}

/// Orthonormal support basis of `ρ_B` (columns) and `ρ_B^{-1/2}` on it.
/// For full rank the computational basis is kept.
fn support(reduced: &Hermitian) -> (Hermitian, CMatrix, bool) {
    let (inv, basis) = reduced.pinv_sqrt(PINV_CUTOFF);
    let full = basis.cols() == reduced.dim();
    let basis = if full {
        CMatrix::identity(reduced.dim())
    } else {
        basis
    };
    (inv, basis, full)
}

fn to_povm(elements: Vec<Hermitian>) -> Result<Povm> {
    Povm::new(elements.clone()).or_else(|_| Povm::from_approximate(elements))
}

/// `ρ_B^{-1/2} σ_{a|x} ρ_B^{-1/2}` on the support of `ρ_B`. A full-rank
/// marginal keeps the original coordinates; otherwise the output is written
/// in the eigenbasis of the support.
pub fn pretty_good(sa: &StateAssemblage) -> Result<Assemblage> {
    let (inv, basis, _) = support(&sa.reduced);
    if basis.cols() == 0 {
        return Err(Error::validation("reduced state vanishes"));
    }
    let m = basis.dagger().matmul(inv.matrix());
    let povms = sa
        .sigmas
        .iter()
        .map(|set| to_povm(set.iter().map(|s| s.conjugate_by(&m)).collect()))
        .collect::<Result<Vec<_>>>()?;
    Assemblage::new(povms)
}

/// Choi channel of `ρ` applied to Alice's POVMs:
/// `Λ(A) = ρ_B^{-1/2} tr_A[(A ⊗ 1) ρ]^T ρ_B^{-1/2}`, the transpose taken in
/// the eigenbasis of `ρ_B`. For a full-rank marginal the output is mapped
/// back to the computational basis; otherwise it lives on the support in its
/// eigenbasis, where it is the transpose of [`pretty_good`].
pub fn choi_apply(rho: &BipartiteState, alice: &Assemblage) -> Result<Assemblage> {
    let sa = assemblage_from_state(rho, alice)?;
    let eig = sa.reduced.eig();
    let support: Vec<Vec<C64>> = eig
        .values
        .iter()
        .zip(&eig.vectors)
        .filter(|(l, _)| **l > PINV_CUTOFF)
        .map(|(_, v)| v.clone())
        .collect();
    if support.is_empty() {
        return Err(Error::validation("reduced state vanishes"));
    }
    let full = support.len() == rho.db;
    let v = CMatrix::from_columns(&support)?;
    let inv_sqrt: Vec<f64> = eig
        .values
        .iter()
        .filter(|l| **l > PINV_CUTOFF)
        .map(|l| 1.0 / l.sqrt())
        .collect();
    let apply = |s: &Hermitian| {
        let t = s.compress(&v).transpose();
        let scaled = CMatrix::from_fn(t.dim(), t.dim(), |i, j| {
            t[(i, j)] * inv_sqrt[i] * inv_sqrt[j]
        });
        let h = Hermitian::symmetrized(scaled);
        if full {
            h.conjugate_by(&v)
        } else {
            h
        }
    };
    let povms = sa
        .sigmas
        .iter()
        .map(|set| to_povm(set.iter().map(apply).collect()))
        .collect::<Result<Vec<_>>>()?;
    Assemblage::new(povms)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct PeresParameters {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

impl PeresParameters {
    /// `m3 = √((1 - m1² - m2²)/2)`, `λ3 = 1/n`, `λ1 = 1 - (2 + 3 m1 m2)/n`,
    /// `λ2 = 1 - λ1 - 2 λ3` with `n = 4 - 2 m1² + m1 m2 - 2 m2²`.
    pub fn new(m1: f64, m2: f64) -> Result<Self> {
        if !(m1.is_finite() && m2.is_finite()) || m1 < 0.0 || m2 < 0.0 {
            return Err(Error::Domain(format!(
                "m1 = {m1} and m2 = {m2} must be nonnegative"
            )));
        }
        let m3sq = (1.0 - m1 * m1 - m2 * m2) / 2.0;
        if m3sq < 0.0 {
            return Err(Error::Domain(format!("m3² = {m3sq:.3e} is negative")));
        }
        let den = 4.0 - 2.0 * m1 * m1 + m1 * m2 - 2.0 * m2 * m2;
        let lambda3 = 1.0 / den;
        let lambda1 = 1.0 - (2.0 + 3.0 * m1 * m2) / den;
        let lambda2 = 1.0 - lambda1 - 2.0 * lambda3;
        for (name, v) in [
            ("lambda1", lambda1),
            ("lambda2", lambda2),
            ("lambda3", lambda3),
        ] {
            if v < -1e-12 {
                return Err(Error::Domain(format!("{name} = {v:.6e} is negative")));
            }
        }
        Ok(PeresParameters {
            m1,
            m2,
            m3: m3sq.sqrt(),
            lambda1,
            lambda2,
            lambda3,
        })
    }

    /// Nonnegative `m1, m2` with `m1² + m1 m2 + m2² ≤ 1`.
    pub fn admissible(m1: f64, m2: f64) -> bool {
        m1 >= 0.0 && m2 >= 0.0 && m1 * m1 + m1 * m2 + m2 * m2 <= 1.0 + 1e-12
    }
}

/// The two-qutrit state
/// `λ1 |ψ1⟩⟨ψ1| + λ2 |ψ2⟩⟨ψ2| + λ3 (|ψ3⟩⟨ψ3| + |ψ̃3⟩⟨ψ̃3|)`, PPT with respect
/// to Alice's partial transpose.
pub fn peres_state(m1: f64, m2: f64) -> Result<(BipartiteState, PeresParameters)> {
    let p = PeresParameters::new(m1, m2)?;
    let ket = |terms: &[(usize, usize, f64)]| {
        let mut v = vec![ZERO; 9];
        for &(i, j, a) in terms {
            v[3 * i + j] += c(a, 0.0);
        }
        v
    };
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let s3 = 1.0 / 3f64.sqrt();
    let psi1 = ket(&[(1, 2, s2), (2, 1, s2)]);
    let psi2 = ket(&[(0, 0, s3), (1, 1, s3), (2, 2, -s3)]);
    let psi3 = ket(&[(0, 1, p.m1), (1, 0, p.m2), (1, 1, p.m3), (2, 2, p.m3)]);
    let psi3t = ket(&[(0, 2, p.m1), (2, 0, -p.m2), (2, 1, p.m3), (1, 2, -p.m3)]);
    let m = Hermitian::ket_bra(&psi1)
        .scale(p.lambda1)
        .add(&Hermitian::ket_bra(&psi2).scale(p.lambda2))
        .add(
            &Hermitian::ket_bra(&psi3)
                .add(&Hermitian::ket_bra(&psi3t))
                .scale(p.lambda3),
        );
    let l = m.min_eigenvalue();
    if l < -STATE_PSD_TOL {
        return Err(Error::Domain(format!(
            "state has negative eigenvalue {l:.3e}"
        )));
    }
    Ok((BipartiteState::new(3, 3, m)?, p))
}

/// `(1 ⊗ P ρ_B^{-1/2}) ρ (1 ⊗ ρ_B^{-1/2} P)` compressed to `range(P)` and
/// divided by its trace `rank(P)`.
pub fn filtered_truncation(rho: &BipartiteState, p: &Projector) -> Result<BipartiteState> {
    if p.dim() != rho.db {
        return Err(Error::DimensionMismatch {
            expected: rho.db,
            found: p.dim(),
        });
    }
    let (inv, _) = rho.reduced_b().pinv_sqrt(PINV_CUTOFF);
    let local = p.basis().dagger().matmul(inv.matrix());
    let w = CMatrix::identity(rho.da).kron(&local);
    let m = Hermitian::symmetrized(w.matmul(rho.matrix.matrix()).matmul(&w.dagger()));
    let t = m.trace_re();
    BipartiteState::new(rho.da, p.rank(), m.scale(1.0 / t))
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanPoint {
    pub m1: f64,
    pub m2: f64,
    pub pt_residual: f64,
    pub lhs_slack: f64,
    pub steerable: bool,
    /// Robustness of the pretty-good measurements, for steerable points.
    pub pgm_eta: Option<f64>,
    pub pgm_verdict: Option<Verdict>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PeresScan {
    pub step: f64,
    pub points: Vec<ScanPoint>,
    pub steerable_count: usize,
    pub max_pt_residual: f64,
    /// Steerable grid point with the least robust pretty-good measurements.
    pub best: Option<ScanPoint>,
    /// Local refinement of `best`.
    pub refined: Option<ScanPoint>,
}

/// Assemblage produced by the Peres state and Alice's two bases.
pub fn peres_assemblage(m1: f64, m2: f64) -> Result<(BipartiteState, StateAssemblage)> {
    let (rho, _) = peres_state(m1, m2)?;
    let sa = assemblage_from_state(&rho, &corpus::peres_measurements())?;
    Ok((rho, sa))
}

pub fn peres_point(m1: f64, m2: f64) -> ScanPoint {
    let mut pt = ScanPoint {
        m1,
        m2,
        pt_residual: f64::NAN,
        lhs_slack: f64::NAN,
        steerable: false,
        pgm_eta: None,
        pgm_verdict: None,
        error: None,
    };
    let run = |pt: &mut ScanPoint| -> Result<()> {
        let (rho, sa) = peres_assemblage(m1, m2)?;
        pt.pt_residual = rho.partial_transpose_a().0;
        let lhs = lhs_feasible(&sa)?;
        pt.lhs_slack = lhs.slack;
        pt.steerable = !lhs.unsteerable;
        if pt.steerable {
            let r = depolarising_robustness(&pretty_good(&sa)?)?;
            pt.pgm_eta = Some(r.eta);
            pt.pgm_verdict = Some(r.verdict);
        }
        Ok(())
    };
    if let Err(e) = run(&mut pt) {
        pt.error = Some(e.to_string());
    }
    pt
}

/// Scans the admissible `(m1, m2)` region on a grid of spacing `step`, then
/// refines the steerable point with the smallest pretty-good robustness by a
/// shrinking pattern search.
pub fn peres_scan(step: f64) -> Result<PeresScan> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::Domain(format!("grid step {step} outside (0, 1]")));
    }
    let n = (1.0 / step).floor() as usize;
    let mut grid = Vec::new();
    for i in 0..=n {
        for j in 0..=n {
            let (m1, m2) = (i as f64 * step, j as f64 * step);
            if PeresParameters::admissible(m1, m2) && PeresParameters::new(m1, m2).is_ok() {
                grid.push((m1, m2));
            }
        }
    }
    if grid.is_empty() {
        return Err(Error::Domain("no admissible grid point".into()));
    }
    let points: Vec<ScanPoint> = grid
        .par_iter()
        .map(|&(m1, m2)| peres_point(m1, m2))
        .collect();
    let steerable_count = points.iter().filter(|p| p.steerable).count();
    let max_pt_residual = points
        .iter()
        .map(|p| p.pt_residual)
        .filter(|r| r.is_finite())
        .fold(0.0, f64::max);
    let eta_of = |p: &ScanPoint| p.pgm_eta.unwrap_or(f64::INFINITY);
    let best = points
        .iter()
        .filter(|p| p.steerable && p.pgm_eta.is_some())
        .min_by(|a, b| eta_of(a).total_cmp(&eta_of(b)))
        .cloned();
    let refined = best.as_ref().map(|b| refine(b.clone(), step));
    Ok(PeresScan {
        step,
        points,
        steerable_count,
        max_pt_residual,
        best,
        refined,
    })
}

fn refine(mut best: ScanPoint, step: f64) -> ScanPoint {
    let eta_of = |p: &ScanPoint| {
        if p.steerable {
            p.pgm_eta.unwrap_or(f64::INFINITY)
        } else {
            f64::INFINITY
        }
    };
    let mut h = step / 2.0;
    while h >= step / 16.0 {
        let mut improved = false;
        for (dx, dy) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
            let (m1, m2) = (best.m1 + dx, best.m2 + dy);
            if !PeresParameters::admissible(m1, m2) {
                continue;
            }
            let cand = peres_point(m1, m2);
            if eta_of(&cand) < eta_of(&best) - 1e-9 {
                best = cand;
                improved = true;
            }
        }
        if !improved {
            h /= 2.0;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peres_family_is_pt_invariant() {
        for (m1, m2) in [(0.0, 0.0), (0.3, 0.4), (0.5, 0.5), (0.1, 0.9), (0.57, 0.57)] {
            let (rho, p) = peres_state(m1, m2).unwrap();
            assert!(rho.partial_transpose_a().0 < 1e-10, "({m1}, {m2})");
            assert!((p.lambda1 + p.lambda2 + 2.0 * p.lambda3 - 1.0).abs() < 1e-12);
        }
        assert!(peres_state(0.7, 0.7).is_err());
    }

    #[test]
    fn maximally_entangled_sigma_z() {
        let rho = BipartiteState::maximally_entangled(2);
        let z = Assemblage::new(vec![corpus::sharp_z()]).unwrap();
        let sa = assemblage_from_state(&rho, &z).unwrap();
        assert!(sa.sigmas[0][0].max_abs_diff(&Hermitian::diag(&[0.5, 0.0])) < 1e-15);
        assert!(sa.sigmas[0][1].max_abs_diff(&Hermitian::diag(&[0.0, 0.5])) < 1e-15);
    }

    #[test]
    fn qubit_mubs_steer_with_phi_plus() {
        let rho = BipartiteState::maximally_entangled(2);
        let sa = assemblage_from_state(&rho, &corpus::sigma_xz()).unwrap();
        let r = lhs_feasible(&sa).unwrap();
        assert!(!r.unsteerable && r.slack < -1e-3);
        let noisy = BipartiteState::isotropic(2, 0.6).unwrap();
        let sa = assemblage_from_state(&noisy, &corpus::sigma_xz()).unwrap();
        let r = lhs_feasible(&sa).unwrap();
        assert!(r.unsteerable);
        assert!(r.model.unwrap().residual(&sa) < 1e-7);
    }
}
