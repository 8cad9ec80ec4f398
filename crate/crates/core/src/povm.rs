//! POVMs, measurement assemblages and the classical operations on them:
//! truncation to a subspace, binarisation, coarse-graining, depolarising
//! noise and post-processing of a parent measurement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gram_schmidt, random_psd, Hermitian, Projector, Rng, C64};

/// Tolerance on element positivity and normalisation.
pub const POVM_TOL: f64 = 1e-9;
/// Elements with max-abs entry below this are treated as zero.
pub const ZERO_TOL: f64 = 1e-12;

/// A finite-outcome POVM on `C^dim`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "PovmRaw")]
pub struct Povm {
    #[serde(skip)]
    dim: usize,
    elements: Vec<Hermitian>,
}

#[derive(Deserialize)]
struct PovmRaw {
    elements: Vec<Hermitian>,
}

impl TryFrom<PovmRaw> for Povm {
    type Error = Error;
    fn try_from(raw: PovmRaw) -> Result<Self> {
        Povm::new(raw.elements)
    }
}

/// Per-measurement diagnostics produced by [`validate`].
#[derive(Clone, Debug, Serialize)]
pub struct PovmDiagnostics {
    pub min_eigenvalues: Vec<f64>,
    /// Largest entry of `Σ_a M_a - I`.
    pub normalisation_residual: f64,
    pub dim_ok: bool,
    pub valid: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub dim: usize,
    pub measurements: Vec<PovmDiagnostics>,
    pub valid: bool,
}

fn diagnose(dim: usize, elements: &[Hermitian]) -> PovmDiagnostics {
    let dim_ok = !elements.is_empty() && elements.iter().all(|e| e.dim() == dim);
    if !dim_ok {
        return PovmDiagnostics {
            min_eigenvalues: Vec::new(),
            normalisation_residual: f64::INFINITY,
            dim_ok,
            valid: false,
        };
    }
    let min_eigenvalues: Vec<f64> = elements.iter().map(|e| e.min_eigenvalue()).collect();
    let mut sum = Hermitian::zeros(dim);
    for e in elements {
        sum = sum.add(e);
    }
    let normalisation_residual = sum.max_abs_diff(&Hermitian::identity(dim));
    let valid =
        normalisation_residual <= POVM_TOL && min_eigenvalues.iter().all(|&l| l >= -POVM_TOL);
    PovmDiagnostics {
        min_eigenvalues,
        normalisation_residual,
        dim_ok,
        valid,
    }
}

impl Povm {
    /// Validated constructor: elements PSD and summing to the identity within [`POVM_TOL`].
    pub fn new(elements: Vec<Hermitian>) -> Result<Self> {
        let dim = elements
            .first()
            .ok_or_else(|| Error::validation("POVM with no outcomes"))?
            .dim();
        let diag = diagnose(dim, &elements);
        if !diag.dim_ok {
            return Err(Error::validation(
                "POVM elements have inconsistent dimensions",
            ));
        }
        if let Some((a, l)) = diag
            .min_eigenvalues
            .iter()
            .enumerate()
            .find(|(_, l)| **l < -POVM_TOL)
        {
            return Err(Error::validation(format!(
                "POVM element {a} is not positive semidefinite (min eigenvalue {l:.3e})"
            )));
        }
        if diag.normalisation_residual > POVM_TOL {
            return Err(Error::validation(format!(
                "POVM elements do not sum to the identity (residual {:.3e})",
                diag.normalisation_residual
            )));
        }
        Ok(Povm { dim, elements })
    }

    /// Nearest valid POVM to an approximate one: negative eigenvalues are
    /// clipped and the elements renormalised as `S^{-1/2} M_a S^{-1/2}`.
    pub fn from_approximate(elements: Vec<Hermitian>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::validation("POVM with no outcomes"));
        }
        let clipped: Vec<Hermitian> = elements
            .iter()
            .map(|e| e.eig().map(|l| l.max(0.0)))
            .collect();
        let d = clipped[0].dim();
        let mut s = Hermitian::zeros(d);
        for e in &clipped {
            s = s.add(e);
        }
        let (s_inv, support) = s.pinv_sqrt(1e-12);
        if support.cols() < d {
            return Err(Error::validation("approximate POVM has a singular sum"));
        }
        let out: Vec<Hermitian> = clipped
            .iter()
            .map(|e| Hermitian::symmetrized(s_inv.matmul(e).matmul(&s_inv)))
            .collect();
        Povm::new(out)
    }

    /// Rank-one PVM `{|v_k><v_k|}` from an orthonormal basis.
    pub fn from_basis(vectors: &[Vec<C64>]) -> Result<Self> {
        let d = vectors.len();
        if d == 0 || vectors.iter().any(|v| v.len() != d) {
            return Err(Error::validation(
                "basis must consist of d vectors of length d",
            ));
        }
        Projector::from_orthonormal(vectors.to_vec())?;
        Povm::new(vectors.iter().map(|v| Hermitian::ket_bra(v)).collect())
    }

    /// Random POVM `S^{-1/2} W_a S^{-1/2}` from Wishart matrices `W_a` of the given rank.
    pub fn random(dim: usize, outcomes: usize, rank: usize, rng: &mut Rng) -> Self {
        let w: Vec<Hermitian> = (0..outcomes).map(|_| random_psd(dim, rank, rng)).collect();
        Povm::from_approximate(w).expect("Wishart sum is full rank almost surely")
    }

    pub fn trivial(dim: usize) -> Self {
        Povm {
            dim,
            elements: vec![Hermitian::identity(dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Hermitian] {
        &self.elements
    }

    pub fn element(&self, a: usize) -> &Hermitian {
        &self.elements[a]
    }

    pub fn diagnostics(&self) -> PovmDiagnostics {
        diagnose(self.dim, &self.elements)
    }

    /// `P M P` re-expressed in the orthonormal basis of `range(P)`.
    pub fn truncate(&self, p: &Projector) -> Result<Povm> {
        if p.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: p.dim(),
            });
        }
        let v = p.basis();
        let elements = self.elements.iter().map(|e| e.compress(v)).collect();
        Povm::new(elements)
    }

    /// Elements summed over the cells of a partition of the outcomes.
    pub fn coarse_grain(&self, partition: &[Vec<usize>]) -> Result<Povm> {
        let mut seen = vec![false; self.outcomes()];
        for cell in partition {
            if cell.is_empty() {
                return Err(Error::validation("empty partition cell"));
            }
            for &a in cell {
                if a >= self.outcomes() {
                    return Err(Error::validation(format!("outcome {a} out of range")));
                }
                if seen[a] {
                    return Err(Error::validation(format!("outcome {a} appears twice")));
                }
                seen[a] = true;
            }
        }
        if let Some(a) = seen.iter().position(|s| !s) {
            return Err(Error::validation(format!(
                "outcome {a} missing from partition"
            )));
        }
        let elements = partition.iter().map(|cell| self.subset_sum(cell)).collect();
        Ok(Povm {
            dim: self.dim,
            elements,
        })
    }

    pub fn subset_sum(&self, subset: &[usize]) -> Hermitian {
        let mut s = Hermitian::zeros(self.dim);
        for &a in subset {
            s = s.add(&self.elements[a]);
        }
        s
    }

    /// All two-outcome coarse-grainings, one per complementary pair of
    /// nonempty proper subsets; the "yes" subset is the one containing
    /// outcome 0. Order follows the bit mask over outcomes `1..k`.
    pub fn binarisations(&self) -> Vec<Binarisation> {
        canonical_subsets(self.outcomes())
            .into_iter()
            .map(|subset| {
                let complement: Vec<usize> = (0..self.outcomes())
                    .filter(|a| !subset.contains(a))
                    .collect();
                let povm = Povm {
                    dim: self.dim,
                    elements: vec![self.subset_sum(&subset), self.subset_sum(&complement)],
                };
                Binarisation { subset, povm }
            })
            .collect()
    }

    pub fn depolarise(&self, eta: f64) -> Result<Povm> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::validation(format!(
                "noise parameter {eta} outside [0, 1]"
            )));
        }
        Ok(Povm {
            dim: self.dim,
            elements: self
                .elements
                .iter()
                .map(|e| depolarise_element(e, eta))
                .collect(),
        })
    }

    pub fn permute_outcomes(&self, perm: &[usize]) -> Result<Povm> {
        let mut sorted = perm.to_vec();
        sorted.sort_unstable();
        if sorted != (0..self.outcomes()).collect::<Vec<_>>() {
            return Err(Error::validation("not a permutation of the outcomes"));
        }
        Ok(Povm {
            dim: self.dim,
            elements: perm.iter().map(|&a| self.elements[a].clone()).collect(),
        })
    }

    /// Indices of the nonzero elements, and the POVM restricted to them.
    pub fn drop_zero_elements(&self) -> (Vec<usize>, Povm) {
        let keep: Vec<usize> = (0..self.outcomes())
            .filter(|&a| !self.elements[a].is_zero(ZERO_TOL))
            .collect();
        let elements = keep.iter().map(|&a| self.elements[a].clone()).collect();
        (
            keep,
            Povm {
                dim: self.dim,
                elements,
            },
        )
    }
}

/// `η A + (1 - η) tr(A) I / d`
pub fn depolarise_element(a: &Hermitian, eta: f64) -> Hermitian {
    let d = a.dim();
    a.scale(eta)
        .add(&Hermitian::identity(d).scale((1.0 - eta) * a.trace_re() / d as f64))
}

/// Canonical subsets of `0..k` containing 0, excluding the full set, ordered
/// by the bit mask over outcomes `1..k`.
pub fn canonical_subsets(k: usize) -> Vec<Vec<usize>> {
    if k < 2 {
        return Vec::new();
    }
    let count = (1usize << (k - 1)) - 1;
    (0..count)
        .map(|mask| {
            let mut s = vec![0];
            s.extend((1..k).filter(|i| mask >> (i - 1) & 1 == 1));
            s
        })
        .collect()
}

/// A two-outcome coarse-graining with the subset it answers "yes" to.
#[derive(Clone, Debug, Serialize)]
pub struct Binarisation {
    pub subset: Vec<usize>,
    pub povm: Povm,
}

/// An indexed family of POVMs on one Hilbert space.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "AssemblageRaw")]
pub struct Assemblage {
    dim: usize,
    measurements: Vec<Povm>,
}

#[derive(Deserialize)]
struct AssemblageRaw {
    dim: usize,
    measurements: Vec<Povm>,
}

impl TryFrom<AssemblageRaw> for Assemblage {
    type Error = Error;
    fn try_from(raw: AssemblageRaw) -> Result<Self> {
        let a = Assemblage::new(raw.measurements)?;
        if a.dim != raw.dim {
            return Err(Error::DimensionMismatch {
                expected: raw.dim,
                found: a.dim,
            });
        }
        Ok(a)
    }
}

impl Assemblage {
    pub fn new(measurements: Vec<Povm>) -> Result<Self> {
        let dim = measurements
            .first()
            .ok_or_else(|| Error::validation("assemblage with no measurements"))?
            .dim();
        if let Some(m) = measurements.iter().find(|m| m.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: m.dim(),
            });
        }
        Ok(Assemblage { dim, measurements })
    }

    pub fn pair(a: Povm, b: Povm) -> Result<Self> {
        Self::new(vec![a, b])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.measurements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measurements.is_empty()
    }

    pub fn measurements(&self) -> &[Povm] {
        &self.measurements
    }

    pub fn measurement(&self, x: usize) -> &Povm {
        &self.measurements[x]
    }

    pub fn outcome_counts(&self) -> Vec<usize> {
        self.measurements.iter().map(|m| m.outcomes()).collect()
    }

    pub fn push(&mut self, m: Povm) -> Result<()> {
        if m.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: m.dim(),
            });
        }
        self.measurements.push(m);
        Ok(())
    }

    pub fn truncate(&self, p: &Projector) -> Result<Assemblage> {
        if p.rank() == 0 {
            return Err(Error::validation("rank-0 projector"));
        }
        Assemblage::new(
            self.measurements
                .iter()
                .map(|m| m.truncate(p))
                .collect::<Result<_>>()?,
        )
    }

    pub fn depolarise(&self, eta: f64) -> Result<Assemblage> {
        Assemblage::new(
            self.measurements
                .iter()
                .map(|m| m.depolarise(eta))
                .collect::<Result<_>>()?,
        )
    }
}

/// Diagnostics for an assemblage; never fails.
pub fn validate(a: &Assemblage) -> ValidationReport {
    let measurements: Vec<PovmDiagnostics> = a
        .measurements
        .iter()
        .map(|m| diagnose(a.dim, &m.elements))
        .collect();
    let valid = measurements.iter().all(|m| m.valid);
    ValidationReport {
        dim: a.dim,
        measurements,
        valid,
    }
}

/// Diagnostics for raw element lists that may not form valid POVMs.
pub fn validate_raw(dim: usize, measurements: &[Vec<Hermitian>]) -> ValidationReport {
    let measurements: Vec<PovmDiagnostics> =
        measurements.iter().map(|m| diagnose(dim, m)).collect();
    let valid = measurements.iter().all(|m| m.valid);
    ValidationReport {
        dim,
        measurements,
        valid,
    }
}

/// `M_{a|x} = Σ_λ p(a|x,λ) G_λ`, with `kernels[x][λ][a] = p(a|x,λ)`.
pub fn post_process(parent: &Povm, kernels: &[Vec<Vec<f64>>]) -> Result<Assemblage> {
    let mut out = Vec::with_capacity(kernels.len());
    for (x, kx) in kernels.iter().enumerate() {
        if kx.len() != parent.outcomes() {
            return Err(Error::validation(format!(
                "kernel {x} has {} rows, parent has {} outcomes",
                kx.len(),
                parent.outcomes()
            )));
        }
        let na = kx.first().map_or(0, |r| r.len());
        if na == 0 {
            return Err(Error::validation(format!("kernel {x} has no outcomes")));
        }
        for (lam, row) in kx.iter().enumerate() {
            if row.len() != na {
                return Err(Error::validation(format!("kernel {x} is ragged")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-10 || row.iter().any(|&p| p < -1e-12) {
                return Err(Error::validation(format!(
                    "kernel {x} is not a probability distribution for parent outcome {lam}"
                )));
            }
        }
        let elements: Vec<Hermitian> = (0..na)
            .map(|a| {
                let mut m = Hermitian::zeros(parent.dim());
                for (lam, g) in parent.elements().iter().enumerate() {
                    if kx[lam][a] != 0.0 {
                        m = m.add(&g.scale(kx[lam][a]));
                    }
                }
                m
            })
            .collect();
        out.push(Povm::new(elements)?);
    }
    Assemblage::new(out)
}

/// Joint POVM with elements indexed by outcome tuples `(a_1, ..., a_k)`,
/// enumerated in lexicographic order with the last index fastest.
#[derive(Clone, Debug, Serialize)]
pub struct ParentPovm {
    pub dim: usize,
    pub outcome_counts: Vec<usize>,
    pub labels: Vec<Vec<usize>>,
    pub elements: Vec<Hermitian>,
}

/// Outcome tuples in lexicographic order, last index fastest.
pub fn outcome_tuples(counts: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = counts.iter().product();
    (0..total)
        .map(|mut idx| {
            let mut t = vec![0; counts.len()];
            for x in (0..counts.len()).rev() {
                t[x] = idx % counts[x];
                idx /= counts[x];
            }
            t
        })
        .collect()
}

impl ParentPovm {
    pub fn new(outcome_counts: Vec<usize>, elements: Vec<Hermitian>) -> Result<Self> {
        let labels = outcome_tuples(&outcome_counts);
        if labels.len() != elements.len() {
            return Err(Error::validation(format!(
                "{} parent elements for {} outcome tuples",
                elements.len(),
                labels.len()
            )));
        }
        let dim = elements
            .first()
            .ok_or_else(|| Error::validation("empty parent"))?
            .dim();
        Ok(ParentPovm {
            dim,
            outcome_counts,
            labels,
            elements,
        })
    }

    /// Marginal element `Σ_{a: a_x = a} G_a`, without validation.
    pub fn marginal_elements(&self, x: usize) -> Vec<Hermitian> {
        let mut out = vec![Hermitian::zeros(self.dim); self.outcome_counts[x]];
        for (lab, g) in self.labels.iter().zip(&self.elements) {
            out[lab[x]] = out[lab[x]].add(g);
        }
        out
    }

    pub fn marginal(&self, x: usize) -> Result<Povm> {
        Povm::new(self.marginal_elements(x))
    }

    /// Largest entry of `marginal(x) - a_x` over all settings and outcomes.
    pub fn marginal_residual(&self, a: &Assemblage) -> f64 {
        let mut r: f64 = 0.0;
        for x in 0..self.outcome_counts.len() {
            for (m, t) in self
                .marginal_elements(x)
                .iter()
                .zip(a.measurement(x).elements())
            {
                r = r.max(m.max_abs_diff(t));
            }
        }
        r
    }

    pub fn as_povm(&self) -> Result<Povm> {
        Povm::new(self.elements.clone())
    }

    /// Smallest eigenvalue over all parent elements.
    pub fn min_eigenvalue(&self) -> f64 {
        self.elements
            .iter()
            .map(|g| g.min_eigenvalue())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Orthonormal basis check helper shared by the criteria code.
pub(crate) fn check_orthonormal_basis(vectors: &[Vec<C64>]) -> Result<()> {
    let d = vectors.len();
    if d == 0 || vectors.iter().any(|v| v.len() != d) {
        return Err(Error::validation(
            "basis must consist of d vectors of length d",
        ));
    }
    Projector::from_orthonormal(vectors.to_vec()).map(|_| ())
}

/// Eigenvectors of a POVM element for its nondegenerate eigenvalues.
pub(crate) fn nondegenerate_eigenvectors(h: &Hermitian, gap: f64) -> Vec<Vec<C64>> {
    let e = h.eig();
    let n = e.values.len();
    (0..n)
        .filter(|&k| {
            let l = e.values[k];
            (k == 0 || (e.values[k - 1] - l).abs() > gap)
                && (k + 1 == n || (l - e.values[k + 1]).abs() > gap)
        })
        .map(|k| e.vectors[k].clone())
        .collect()
}

/// Projector onto the span of vectors, or `None` when they are dependent.
pub(crate) fn span_projector(vectors: &[Vec<C64>]) -> Option<Projector> {
    let onb = gram_schmidt(vectors, 1e-8)?;
    Projector::from_orthonormal(onb).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, haar_subspace, rng_from_seed};

    fn sigma_z() -> Povm {
        Povm::new(vec![
            Hermitian::diag(&[1.0, 0.0]),
            Hermitian::diag(&[0.0, 1.0]),
        ])
        .unwrap()
    }

    #[test]
    fn rejects_unnormalised() {
        let e = vec![
            Hermitian::diag(&[0.45, 0.45]),
            Hermitian::diag(&[0.45, 0.45]),
        ];
        assert!(Povm::new(e.clone()).is_err());
        let rep = validate_raw(2, &[e]);
        assert!(!rep.valid);
        assert!((rep.measurements[0].normalisation_residual - 0.1).abs() < 1e-12);
    }

    #[test]
    fn binarisation_counts() {
        let mut rng = rng_from_seed(3);
        for k in 1..6 {
            let p = Povm::random(2, k, 2, &mut rng);
            let b = p.binarisations();
            assert_eq!(b.len(), (1usize << (k - 1)) - 1);
            for bin in &b {
                assert!(bin.subset.contains(&0));
                assert!(bin.povm.diagnostics().valid);
            }
        }
        let z = sigma_z();
        let b = z.binarisations();
        assert_eq!(b[0].povm.element(0), z.element(0));
    }

    #[test]
    fn depolarise_semigroup() {
        let mut rng = rng_from_seed(5);
        let p = Povm::random(3, 4, 2, &mut rng);
        let a = p.depolarise(0.7).unwrap().depolarise(0.4).unwrap();
        let b = p.depolarise(0.28).unwrap();
        for (x, y) in a.elements().iter().zip(b.elements()) {
            assert!(x.max_abs_diff(y) < 1e-12);
        }
        assert!(p.depolarise(1.2).is_err());
    }

    #[test]
    fn truncation_normalises_in_subspace() {
        let mut rng = rng_from_seed(11);
        for s in 0..20 {
            let m = Povm::random(4, 3, 2, &mut rng);
            let p = haar_subspace(4, 2, s).unwrap();
            let t = m.truncate(&p).unwrap();
            assert_eq!(t.dim(), 2);
            assert!(t.diagnostics().normalisation_residual < 1e-9);
        }
    }

    #[test]
    fn coarse_grain_validates_partition() {
        let z = sigma_z();
        assert!(z.coarse_grain(&[vec![0], vec![0, 1]]).is_err());
        assert!(z.coarse_grain(&[vec![0]]).is_err());
        let full = z.coarse_grain(&[vec![0, 1]]).unwrap();
        assert!(full.element(0).max_abs_diff(&Hermitian::identity(2)) < 1e-15);
    }

    #[test]
    fn from_basis_rejects_non_orthonormal() {
        let v = vec![
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(1.0, 0.0), c(1.0, 0.0)],
        ];
        assert!(Povm::from_basis(&v).is_err());
    }

    #[test]
    fn post_process_relabelling() {
        let z = sigma_z();
        let swap = vec![vec![vec![0.0, 1.0], vec![1.0, 0.0]]];
        let a = post_process(&z, &swap).unwrap();
        assert_eq!(a.measurement(0).element(0), z.element(1));
        let bad = vec![vec![vec![0.5, 0.6], vec![1.0, 0.0]]];
        assert!(post_process(&z, &bad).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let a = Assemblage::pair(sigma_z(), sigma_z()).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        let b: Assemblage = serde_json::from_str(&s).unwrap();
        assert_eq!(b.len(), 2);
        let bad = r#"{"dim":2,"measurements":[{"elements":[[[[1,0],[0,0]],[[0,0],[0,0]]]]}]}"#;
        assert!(serde_json::from_str::<Assemblage>(bad).is_err());
    }
}
