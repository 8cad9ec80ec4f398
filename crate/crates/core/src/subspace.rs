//! Incompatibility under truncation to subspaces: sampled classification,
//! the analytic criterion for rank-one PVM pairs, the qutrit MUB example and
//! Monte Carlo checks of the Haar integrals behind the robustness bound.

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus;
use crate::error::{Error, Result};
use crate::incompat::{depolarising_robustness, Verdict};
use crate::linalg::{
    c, haar_frame, haar_subspace, inner, random_hermitian, rng_from_seed, CMatrix, Hermitian,
    Projector, C64,
};
use crate::povm::{
    check_orthonormal_basis, nondegenerate_eigenvectors, span_projector, Assemblage, Povm,
};

/// Tolerance for "nonzero" in the fully compressible criterion.
pub const CRITERION_TOL: f64 = 1e-10;
/// Upper bound on the number of deterministic probe subspaces.
pub const MAX_PROBES: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SubspaceVerdict {
    Incompressible,
    FullyCompressible,
    PartlyCompressible,
    CompatibleEverywhere,
    Indeterminate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    /// Coordinate plane or span of POVM eigenvectors.
    Probe,
    Haar,
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleRecord {
    pub index: usize,
    pub kind: SampleKind,
    /// Seed of the Haar draw; probes are reproducible from the assemblage.
    pub seed: Option<u64>,
    pub eta: Option<f64>,
    pub verdict: Verdict,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubspaceReport {
    pub dim: usize,
    pub n: usize,
    pub seed: u64,
    pub samples: usize,
    pub probes: usize,
    pub original_eta: f64,
    pub original_verdict: Verdict,
    pub records: Vec<SampleRecord>,
    pub compatible_count: usize,
    pub incompatible_count: usize,
    pub indeterminate_count: usize,
    pub verdict: SubspaceVerdict,
    /// True only when an analytic criterion backs the verdict.
    pub certified: bool,
    pub basis_of_verdict: String,
    pub compatible_witness: Option<Projector>,
    pub incompatible_witness: Option<Projector>,
}

/// Seed of the `i`-th Haar sample derived from the run seed (SplitMix64 step).
pub fn sample_seed(seed: u64, i: usize) -> u64 {
    let mut z = seed.wrapping_add((i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Lexicographic `k`-subsets of `0..n`, at most `limit` of them.
fn combinations(n: usize, k: usize, limit: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        if out.len() >= limit {
            return out;
        }
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Coordinate subspaces first, then spans of nondegenerate eigenvectors of
/// the POVM elements, duplicates removed.
pub fn probe_projectors(a: &Assemblage, n: usize) -> Vec<Projector> {
    let d = a.dim();
    let mut out: Vec<Projector> = Vec::new();
    let push = |p: Projector, out: &mut Vec<Projector>| {
        if out.len() < MAX_PROBES
            && !out
                .iter()
                .any(|q| q.matrix().max_abs_diff(p.matrix()) < 1e-8)
        {
            out.push(p);
        }
    };
    let comp = corpus::computational_basis(d);
    for idx in combinations(d, n, MAX_PROBES) {
        let vs: Vec<Vec<C64>> = idx.iter().map(|&i| comp[i].clone()).collect();
        if let Some(p) = span_projector(&vs) {
            push(p, &mut out);
        }
    }
    let mut pool: Vec<Vec<C64>> = Vec::new();
    for m in a.measurements() {
        for e in m.elements() {
            for v in nondegenerate_eigenvectors(e, 1e-8) {
                if !pool.iter().any(|u| inner(u, &v).norm() > 1.0 - 1e-9) {
                    pool.push(v);
                }
            }
        }
    }
    for idx in combinations(pool.len(), n, 64 * MAX_PROBES) {
        if out.len() >= MAX_PROBES {
            break;
        }
        let vs: Vec<Vec<C64>> = idx.iter().map(|&i| pool[i].clone()).collect();
        if let Some(p) = span_projector(&vs) {
            push(p, &mut out);
        }
    }
    out
}

fn evaluate(a: &Assemblage, p: &Projector) -> (Option<f64>, Verdict, Option<String>) {
    match a.truncate(p).and_then(|t| depolarising_robustness(&t)) {
        Ok(r) => (Some(r.eta), r.verdict, None),
        Err(e) => (None, Verdict::Indeterminate, Some(e.to_string())),
    }
}

/// Basis vectors of a rank-one PVM, if `m` is one.
fn pvm_basis(m: &Povm) -> Option<Vec<Vec<C64>>> {
    if m.outcomes() != m.dim() {
        return None;
    }
    let mut basis = Vec::with_capacity(m.dim());
    for e in m.elements() {
        let eig = e.eig();
        let top = eig.values[0];
        if (top - 1.0).abs() > 1e-9 || eig.values[1..].iter().any(|l| l.abs() > 1e-9) {
            return None;
        }
        basis.push(eig.vectors[0].clone());
    }
    Some(basis)
}

/// Classifies the incompatibility of `a` under truncation to `n`-dimensional
/// subspaces from deterministic probes plus `samples` Haar-random subspaces.
/// Samples are evaluated in parallel and merged by index.
pub fn classify(a: &Assemblage, n: usize, samples: usize, seed: u64) -> Result<SubspaceReport> {
    let d = a.dim();
    if n < 2 || n >= d {
        return Err(Error::validation(format!(
            "subspace dimension must satisfy 2 <= n < d (n = {n}, d = {d})"
        )));
    }
    let orig = depolarising_robustness(a)?;
    let mut report = SubspaceReport {
        dim: d,
        n,
        seed,
        samples,
        probes: 0,
        original_eta: orig.eta,
        original_verdict: orig.verdict,
        records: Vec::new(),
        compatible_count: 0,
        incompatible_count: 0,
        indeterminate_count: 0,
        verdict: SubspaceVerdict::CompatibleEverywhere,
        certified: true,
        basis_of_verdict: "the assemblage is compatible, and truncating a parent gives a parent"
            .into(),
        compatible_witness: None,
        incompatible_witness: None,
    };
    if orig.verdict == Verdict::Compatible {
        return Ok(report);
    }

    let probes = probe_projectors(a, n);
    report.probes = probes.len();
    let probe_records: Vec<(SampleRecord, Projector)> = probes
        .into_par_iter()
        .enumerate()
        .map(|(i, p)| {
            let (eta, verdict, error) = evaluate(a, &p);
            (
                SampleRecord {
                    index: i,
                    kind: SampleKind::Probe,
                    seed: None,
                    eta,
                    verdict,
                    error,
                },
                p,
            )
        })
        .collect();
    let offset = probe_records.len();
    let haar_records: Vec<(SampleRecord, Projector)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let s = sample_seed(seed, i);
            let p = haar_subspace(d, n, s).expect("valid subspace dimensions");
            let (eta, verdict, error) = evaluate(a, &p);
            (
                SampleRecord {
                    index: offset + i,
                    kind: SampleKind::Haar,
                    seed: Some(s),
                    eta,
                    verdict,
                    error,
                },
                p,
            )
        })
        .collect();

    for (rec, p) in probe_records.into_iter().chain(haar_records) {
        match rec.verdict {
            Verdict::Compatible => {
                report.compatible_count += 1;
                if report.compatible_witness.is_none() {
                    report.compatible_witness = Some(p);
                }
            }
            Verdict::Incompatible => {
                report.incompatible_count += 1;
                if report.incompatible_witness.is_none() {
                    report.incompatible_witness = Some(p);
                }
            }
            Verdict::Indeterminate => report.indeterminate_count += 1,
        }
        report.records.push(rec);
    }

    let total = report.records.len();
    report.certified = false;
    report.verdict = if orig.verdict == Verdict::Indeterminate {
        report.basis_of_verdict =
            "the robustness of the full assemblage is within the indeterminate band".into();
        SubspaceVerdict::Indeterminate
    } else if report.compatible_count > 0 && report.incompatible_count > 0 {
        report.certified = true;
        report.basis_of_verdict =
            "explicit compatible and incompatible subspaces were found".into();
        SubspaceVerdict::PartlyCompressible
    } else if total > 0 && report.compatible_count == total {
        report.basis_of_verdict =
            format!("sampling evidence: all {total} tested subspaces are compatible");
        SubspaceVerdict::Incompressible
    } else if total > 0 && report.incompatible_count == total {
        report.basis_of_verdict =
            format!("sampling evidence: all {total} tested subspaces are incompatible");
        if n + 1 == d && a.len() == 2 {
            if let (Some(ba), Some(bb)) = (pvm_basis(a.measurement(0)), pvm_basis(a.measurement(1)))
            {
                if fully_compressible_criterion(&ba, &bb)
                    .map(|r| r.holds)
                    .unwrap_or(false)
                {
                    report.certified = true;
                    report.basis_of_verdict =
                        "the overlap and triple-product conditions hold for this rank-one PVM pair"
                            .into();
                }
            }
        }
        SubspaceVerdict::FullyCompressible
    } else {
        report.basis_of_verdict = "mixed compatible and indeterminate samples".into();
        SubspaceVerdict::Indeterminate
    };
    if report.verdict != SubspaceVerdict::PartlyCompressible {
        // witnesses only accompany the two-sided verdict or a uniform one
        if report.verdict == SubspaceVerdict::Incompressible {
            report.incompatible_witness = None;
        }
        if report.verdict == SubspaceVerdict::FullyCompressible {
            report.compatible_witness = None;
        }
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum CriterionFailure {
    /// `⟨φ_a|ψ_α⟩ = 0`.
    ZeroOverlap { a: usize, alpha: usize },
    /// Equality in the triple-product condition.
    TripleProduct {
        a: usize,
        b: usize,
        c: usize,
        alpha: usize,
        beta: usize,
        gamma: usize,
    },
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CriterionResult {
    pub holds: bool,
    pub failure: Option<CriterionFailure>,
}

/// Sufficient condition for the pair of rank-one PVMs from `basis_a` and
/// `basis_b` to stay incompatible in every `(d-1)`-dimensional subspace: all
/// overlaps nonzero and
/// `⟨φ_a|ψ_β⟩⟨φ_b|ψ_α⟩⟨φ_c|ψ_γ⟩ ≠ ⟨φ_c|ψ_β⟩⟨φ_a|ψ_α⟩⟨φ_b|ψ_γ⟩`
/// for all pairwise distinct `a, b, c` and `α, β, γ`.
pub fn fully_compressible_criterion(
    basis_a: &[Vec<C64>],
    basis_b: &[Vec<C64>],
) -> Result<CriterionResult> {
    check_orthonormal_basis(basis_a)?;
    check_orthonormal_basis(basis_b)?;
    let d = basis_a.len();
    if basis_b.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: basis_b.len(),
        });
    }
    if d < 3 {
        return Err(Error::validation("the criterion needs d >= 3"));
    }
    let o: Vec<Vec<C64>> = basis_a
        .iter()
        .map(|u| basis_b.iter().map(|v| inner(u, v)).collect())
        .collect();
    for (a, row) in o.iter().enumerate() {
        for (alpha, z) in row.iter().enumerate() {
            if z.norm() <= CRITERION_TOL {
                return Ok(CriterionResult {
                    holds: false,
                    failure: Some(CriterionFailure::ZeroOverlap { a, alpha }),
                });
            }
        }
    }
    let distinct = |x: usize, y: usize, z: usize| x != y && y != z && x != z;
    for a in 0..d {
        for b in 0..d {
            for cc in 0..d {
                if !distinct(a, b, cc) {
                    continue;
                }
                for alpha in 0..d {
                    for beta in 0..d {
                        for gamma in 0..d {
                            if !distinct(alpha, beta, gamma) {
                                continue;
                            }
                            let lhs = o[a][beta] * o[b][alpha] * o[cc][gamma];
                            let rhs = o[cc][beta] * o[a][alpha] * o[b][gamma];
                            if (lhs - rhs).norm() <= CRITERION_TOL {
                                return Ok(CriterionResult {
                                    holds: false,
                                    failure: Some(CriterionFailure::TripleProduct {
                                        a,
                                        b,
                                        c: cc,
                                        alpha,
                                        beta,
                                        gamma,
                                    }),
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(CriterionResult {
        holds: true,
        failure: None,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MubReport {
    /// `max |R φ_n φ_n† R - R φ'_n φ'_n† R|` for `n = 1, 2, 3`.
    pub differences: Vec<f64>,
    pub max_difference: f64,
    pub truncated_eta: f64,
    pub truncated_verdict: Verdict,
    /// Same comparison with `ψ` rotated by 0.1 rad in the `(e_1, e_2)` plane.
    pub perturbed_differences: Vec<f64>,
    pub perturbed_max_difference: f64,
}

fn mub_differences(psi: &[C64]) -> Result<(Vec<f64>, Projector)> {
    let id = Hermitian::identity(3);
    let r = Projector::from_hermitian(id.sub(&Hermitian::ket_bra(psi)))?;
    let comp = corpus::computational_basis(3);
    let w = corpus::omega();
    let s = 1.0 / 3f64.sqrt();
    let mut diffs = Vec::with_capacity(3);
    for k in 1..=3usize {
        // φ'_k = 3^{-1/2} Σ_{n=1}^{3} ω^{nk} φ_n with φ_n = e_{n-1}
        let phi_p: Vec<C64> = (0..3).map(|j| w.powu(((j + 1) * k) as u32) * s).collect();
        let lhs = Hermitian::ket_bra(&comp[k - 1]).conjugate_by(r.matrix());
        let rhs = Hermitian::ket_bra(&phi_p).conjugate_by(r.matrix());
        diffs.push(lhs.max_abs_diff(&rhs));
    }
    Ok((diffs, r))
}

/// The computational basis and its Fourier partner, truncated to the
/// orthocomplement of `ψ = (1, 1, ω)/√3`, become the same POVM.
pub fn mub_same_povm_check() -> Result<MubReport> {
    let w = corpus::omega();
    let s = 1.0 / 3f64.sqrt();
    let psi = vec![c(s, 0.0), c(s, 0.0), w * s];
    let (differences, r) = mub_differences(&psi)?;
    let fourier: Vec<Vec<C64>> = (1..=3usize)
        .map(|k| (0..3).map(|j| w.powu(((j + 1) * k) as u32) * s).collect())
        .collect();
    let pair = Assemblage::pair(
        Povm::from_basis(&corpus::computational_basis(3))?,
        Povm::from_basis(&fourier)?,
    )?;
    let rob = depolarising_robustness(&pair.truncate(&r)?)?;
    let (ct, st) = (0.1f64.cos(), 0.1f64.sin());
    let rotated = vec![psi[0] * ct - psi[1] * st, psi[0] * st + psi[1] * ct, psi[2]];
    let (perturbed, _) = mub_differences(&rotated)?;
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    Ok(MubReport {
        max_difference: max(&differences),
        perturbed_max_difference: max(&perturbed),
        differences,
        perturbed_differences: perturbed,
        truncated_eta: rob.eta,
        truncated_verdict: rob.verdict,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub estimate: Hermitian,
    pub exact: Hermitian,
    /// `max_ij |estimate - exact| / max_ij |exact|`.
    pub max_relative_error: f64,
    /// Real and imaginary parts within three standard errors.
    pub entries_within_3se: usize,
    pub entries: usize,
    pub pass_3se: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LinearFit {
    /// Fitted `α, β` in `estimate ≈ α M + β tr(M) 1`.
    pub coefficient_m: f64,
    pub coefficient_trace: f64,
    pub expected_m: f64,
    pub expected_trace: f64,
    pub relative_error_m: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct IntegralReport {
    pub d: usize,
    pub n: usize,
    /// Haar unitaries drawn; each contributes all `C(d, n)` coordinate
    /// subspaces of its frame.
    pub samples: usize,
    pub seed: u64,
    pub m: Hermitian,
    pub checks: Vec<IdentityCheck>,
    pub fit: LinearFit,
    pub max_relative_error: f64,
}

/// Running mean and variance of the entries of a `d x d` complex matrix.
struct Moments {
    n: usize,
    sum: Vec<C64>,
    sq_re: Vec<f64>,
    sq_im: Vec<f64>,
}

impl Moments {
    fn new(d: usize) -> Self {
        Moments {
            n: 0,
            sum: vec![C64::new(0.0, 0.0); d * d],
            sq_re: vec![0.0; d * d],
            sq_im: vec![0.0; d * d],
        }
    }

    fn push(&mut self, m: &CMatrix) {
        self.n += 1;
        for (k, z) in m.data().iter().enumerate() {
            self.sum[k] += z;
            self.sq_re[k] += z.re * z.re;
            self.sq_im[k] += z.im * z.im;
        }
    }

    fn check(&self, name: &str, d: usize, exact: &Hermitian) -> IdentityCheck {
        let n = self.n as f64;
        let mean: Vec<C64> = self.sum.iter().map(|z| z / n).collect();
        let estimate =
            Hermitian::symmetrized(CMatrix::from_vec(d, d, mean.clone()).expect("square"));
        let scale = exact.max_abs().max(f64::MIN_POSITIVE);
        let mut within = 0;
        let mut max_err: f64 = 0.0;
        for k in 0..d * d {
            let e = exact.data()[k];
            let m = mean[k];
            max_err = max_err.max((m - e).norm() / scale);
            let se = |sq: f64, mu: f64| ((sq / n - mu * mu).max(0.0) / (n - 1.0)).sqrt();
            let ok_re = (m.re - e.re).abs() <= 3.0 * se(self.sq_re[k], m.re) + 1e-12;
            let ok_im = (m.im - e.im).abs() <= 3.0 * se(self.sq_im[k], m.im) + 1e-12;
            if ok_re && ok_im {
                within += 1;
            }
        }
        IdentityCheck {
            name: name.into(),
            estimate,
            exact: exact.clone(),
            max_relative_error: max_err,
            entries_within_3se: within,
            entries: d * d,
            pass_3se: within == d * d,
        }
    }
}

/// Monte Carlo check of the Haar averages over rank-`n` projectors with a
/// random Hermitian `M` drawn from `seed`.
pub fn integral_identities_check(
    d: usize,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<IntegralReport> {
    let mut rng = rng_from_seed(seed);
    let m = random_hermitian(d, &mut rng);
    integral_identities_check_with(d, n, samples, seed, &m)
}

/// As [`integral_identities_check`] with a caller-supplied `M`. For `n = 1`
/// the single-vector average `∫ |φ⟩⟨φ|M|φ⟩⟨φ| = (M + tr(M) 1)/(d(d+1))` is
/// checked as well.
pub fn integral_identities_check_with(
    d: usize,
    n: usize,
    samples: usize,
    seed: u64,
    m: &Hermitian,
) -> Result<IntegralReport> {
    if n == 0 || n >= d {
        return Err(Error::validation(format!(
            "need 1 <= n < d (n = {n}, d = {d})"
        )));
    }
    if samples < 1000 {
        return Err(Error::validation("at least 1000 samples are required"));
    }
    if m.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: m.dim(),
        });
    }
    let mut rng = rng_from_seed(seed ^ 0x5EED_1D3A_7151_0000);
    let subsets = combinations(d, n, usize::MAX);
    let per = subsets.len() as f64;
    let w = d as f64 / n as f64;
    let mut m1 = Moments::new(d);
    let mut m2 = Moments::new(d);
    let mut m3 = Moments::new(d);
    let mut m4 = Moments::new(d);
    for _ in 0..samples {
        let frame = haar_frame(d, d, &mut rng);
        let mut a1 = CMatrix::zeros(d, d);
        let mut a2 = CMatrix::zeros(d, d);
        let mut a3 = CMatrix::zeros(d, d);
        for idx in &subsets {
            let mut p = CMatrix::zeros(d, d);
            for &i in idx {
                p += &CMatrix::outer(&frame[i], &frame[i]);
            }
            let pmp = p.matmul(m.matrix()).matmul(&p);
            let t = pmp.trace().re;
            a1 += &p;
            a3 += &p.scale_real(t);
            a2 += &pmp;
        }
        m1.push(&a1.scale_real(w / per));
        m2.push(&a2.scale_real(w / per));
        m3.push(&a3.scale_real(w / per));
        if n == 1 {
            m4.push(&a2.scale_real(1.0 / per));
        }
    }
    let (df, nf) = (d as f64, n as f64);
    let tr = m.trace_re();
    let id = Hermitian::identity(d);
    let den = df * df - 1.0;
    let exact2 = m
        .scale((nf * df - 1.0) / den)
        .add(&id.scale((df - nf) * tr / den));
    let exact3 = m
        .scale((df - nf) / den)
        .add(&id.scale((nf * df - 1.0) * tr / den));
    let mut checks = vec![
        m1.check("(d/n) ∫ P dP = 1", d, &id),
        m2.check("(d/n) ∫ P M P dP", d, &exact2),
        m3.check("(d/n) ∫ tr(P M P) P dP", d, &exact3),
    ];
    if n == 1 {
        let exact4 = m.add(&id.scale(tr)).scale(1.0 / (df * (df + 1.0)));
        checks.push(m4.check("∫ |φ⟩⟨φ| M |φ⟩⟨φ| dφ", d, &exact4));
    }
    let fit = fit_linear(
        &checks[1].estimate,
        m,
        (nf * df - 1.0) / den,
        (df - nf) / den,
    );
    let max_relative_error = checks
        .iter()
        .map(|c| c.max_relative_error)
        .fold(0.0, f64::max);
    Ok(IntegralReport {
        d,
        n,
        samples,
        seed,
        m: m.clone(),
        checks,
        fit,
        max_relative_error,
    })
}

/// Least-squares `α, β` with `estimate ≈ α M + β tr(M) 1`.
fn fit_linear(
    estimate: &Hermitian,
    m: &Hermitian,
    expected_m: f64,
    expected_trace: f64,
) -> LinearFit {
    let d = m.dim();
    let t = m.trace_re();
    let id = Hermitian::identity(d);
    let (mm, mi, ii) = (m.inner(m), m.inner(&id) * t, d as f64 * t * t);
    let (em, ei) = (estimate.inner(m), estimate.inner(&id) * t);
    let det = mm * ii - mi * mi;
    let (alpha, beta) = if det.abs() > 1e-14 * mm.max(1.0) * ii.max(1.0) {
        ((em * ii - ei * mi) / det, (mm * ei - mi * em) / det)
    } else {
        (em / mm, 0.0)
    };
    LinearFit {
        coefficient_m: alpha,
        coefficient_trace: beta,
        expected_m,
        expected_trace,
        relative_error_m: (alpha - expected_m).abs() / expected_m.abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_enumerate_all() {
        assert_eq!(combinations(4, 2, usize::MAX).len(), 6);
        assert_eq!(combinations(3, 3, usize::MAX), vec![vec![0, 1, 2]]);
        assert_eq!(combinations(5, 1, 3).len(), 3);
        assert!(combinations(2, 3, 10).is_empty());
    }

    #[test]
    fn criterion_examples() {
        let comp = corpus::computational_basis(3);
        assert!(
            fully_compressible_criterion(&comp, &corpus::fully_compressible_basis())
                .unwrap()
                .holds
        );
        let f = fully_compressible_criterion(&comp, &corpus::fourier_basis(3)).unwrap();
        assert!(matches!(
            f.failure,
            Some(CriterionFailure::TripleProduct { .. })
        ));
        let same = fully_compressible_criterion(&comp, &comp).unwrap();
        assert!(matches!(
            same.failure,
            Some(CriterionFailure::ZeroOverlap { .. })
        ));
    }

    #[test]
    fn qutrit_pair_probes_contain_both_witness_planes() {
        let (a, b) = corpus::qutrit_pair();
        let probes = probe_projectors(&Assemblage::pair(a, b).unwrap(), 2);
        let plane = corpus::fourier_plane();
        let coord = corpus::coordinate_projector(3, &[0, 1]).unwrap();
        assert!(probes
            .iter()
            .any(|p| p.matrix().max_abs_diff(plane.matrix()) < 1e-9));
        assert!(probes
            .iter()
            .any(|p| p.matrix().max_abs_diff(coord.matrix()) < 1e-9));
    }
}
