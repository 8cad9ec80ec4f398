//! End-to-end acceptance suite. Runs without the libtest harness so that
//! every criterion prints its own pass/fail line even when it passes.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use incompat_core::coexist::{self, coexistent_parent, CoexistenceParent};
use incompat_core::corpus;
use incompat_core::incompat::{
    depolarising_robustness, jm_parent, witness, Verdict, COMPATIBLE_MARGIN, INCOMPATIBLE_MARGIN,
};
use incompat_core::linalg::{
    c, complex_gaussian_vector, haar_frame, haar_subspace, haar_subspace_with, haar_unitary,
    normalized, rng_from_seed, CMatrix, Hermitian, Rng, C64, ONE, ZERO,
};
use incompat_core::povm::{validate, Assemblage, Povm};
use incompat_core::steering::{self, BipartiteState};
use incompat_core::subspace::{self, SampleKind, SubspaceVerdict};
use rand::Rng as _;

const FEAS_TOL: f64 = 1e-7;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn core<T>(r: incompat_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn frac_1_sqrt_2() -> f64 {
    std::f64::consts::FRAC_1_SQRT_2
}

fn pauli_x() -> Hermitian {
    Hermitian::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
}

fn pauli_z() -> Hermitian {
    Hermitian::diag(&[1.0, -1.0])
}

/// Sum of the elements of a parent whose outcome tuple has `labels[x] == a`.
fn marginal(
    labels: &[Vec<usize>],
    elements: &[Hermitian],
    x: usize,
    a: usize,
    d: usize,
) -> Hermitian {
    labels
        .iter()
        .zip(elements)
        .filter(|(l, _)| l[x] == a)
        .fold(Hermitian::zeros(d), |acc, (_, g)| acc.add(g))
}

fn tuples(counts: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &k in counts {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..k).map(move |a| {
                    let mut t = t.clone();
                    t.push(a);
                    t
                })
            })
            .collect();
    }
    out
}

/// Independent check of a coexistence parent: PSD columns whose binarisation
/// marginals reproduce every canonical subset sum.
fn coexistence_parent_defect(p: &CoexistenceParent, povms: [&Povm; 2]) -> (f64, f64) {
    let d = povms[0].dim();
    let mut residual: f64 = 0.0;
    for x in 0..2 {
        for (s, subset) in p.subsets[x].iter().enumerate() {
            let target = subset
                .iter()
                .fold(Hermitian::zeros(d), |acc, &i| acc.add(povms[x].element(i)));
            let got = p
                .labelings
                .iter()
                .zip(&p.elements)
                .filter(|(l, _)| l.choices[x][s])
                .fold(Hermitian::zeros(d), |acc, (_, g)| acc.add(g));
            residual = residual.max(got.max_abs_diff(&target));
        }
    }
    let total = p
        .elements
        .iter()
        .fold(Hermitian::zeros(d), |acc, g| acc.add(g));
    residual = residual.max(total.max_abs_diff(&Hermitian::identity(d)));
    let min_eig = p
        .elements
        .iter()
        .map(|g| g.min_eigenvalue())
        .fold(f64::INFINITY, f64::min);
    (residual, min_eig)
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let r = core(depolarising_robustness(&corpus::sigma_xz()))?;
    let dt = t.elapsed().as_secs_f64();
    let err = (r.eta - frac_1_sqrt_2()).abs();
    ensure(err <= 1e-4, || {
        format!("eta = {:.8}, |eta - 1/sqrt2| = {err:.2e}", r.eta)
    })?;
    ensure(dt < 1.0, || format!("runtime {dt:.3} s"))?;
    Ok(format!("eta = {:.8} (|err| {err:.1e}), {:.3} s", r.eta, dt))
}

fn criterion_2() -> Outcome {
    let mu = frac_1_sqrt_2();
    let noisy = core(corpus::noisy_xz(mu))?;
    let id = Hermitian::identity(2);
    let (x, z) = (pauli_x(), pauli_z());
    let signs = [1.0, -1.0];
    let mut g = Vec::new();
    let mut labels = Vec::new();
    for (a, &i) in signs.iter().enumerate() {
        for (b, &j) in signs.iter().enumerate() {
            g.push(id.add(&x.scale(i * mu)).add(&z.scale(j * mu)).scale(0.25));
            labels.push(vec![a, b]);
        }
    }
    let mut oracle: f64 = 0.0;
    for (a, &s) in signs.iter().enumerate() {
        let ex = id.add(&x.scale(s * mu)).scale(0.5);
        let ez = id.add(&z.scale(s * mu)).scale(0.5);
        oracle = oracle.max(marginal(&labels, &g, 0, a, 2).max_abs_diff(&ex));
        oracle = oracle.max(marginal(&labels, &g, 1, a, 2).max_abs_diff(&ez));
        oracle = oracle.max(noisy.measurement(0).element(a).max_abs_diff(&ex));
        oracle = oracle.max(noisy.measurement(1).element(a).max_abs_diff(&ez));
    }
    let parent = corpus::xz_parent();
    let residual = parent.marginal_residual(&noisy);
    let min_eig = parent.min_eigenvalue();
    let jm = core(jm_parent(&noisy))?;
    ensure(oracle < 1e-12, || {
        format!("hand-built parent residual {oracle:.2e}")
    })?;
    ensure(residual < 1e-12, || {
        format!("marginal residual {residual:.2e}")
    })?;
    ensure(min_eig > -1e-12, || {
        format!("parent min eigenvalue {min_eig:.2e}")
    })?;
    ensure(jm.feasible, || {
        format!("jm infeasible, slack {:.2e}", jm.slack)
    })?;
    Ok(format!(
        "marginal residual {residual:.1e}, parent min eigenvalue {min_eig:.1e}, jm slack {:.1e}",
        jm.slack
    ))
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let r = core(coexist::qubit_counterexample())?;
    let dt = t.elapsed().as_secs_f64();
    let e = r.b_tilde.elements();
    let lindep = e[4].max_abs_diff(&e[0].add(&e[1]).add(&e[2]).sub(&e[3]));
    let parent = r
        .coexistence
        .parent
        .as_ref()
        .ok_or("no coexistence parent returned")?;
    let (defect, min_eig) = coexistence_parent_defect(parent, [&r.a_tilde, &r.b_tilde]);
    ensure(
        r.coexistence.feasible && r.coexistence.slack >= -FEAS_TOL,
        || format!("coexistence slack {:.2e}", r.coexistence.slack),
    )?;
    ensure(defect < 1e-7 && min_eig > -1e-7, || {
        format!("coexistence parent residual {defect:.2e}, min eigenvalue {min_eig:.2e}")
    })?;
    ensure(r.truncated_eta <= 1.0 - INCOMPATIBLE_MARGIN, || {
        format!("truncated eta {:.6} is not below 1 - 1e-3", r.truncated_eta)
    })?;
    ensure(!r.jm_feasible, || {
        "jm feasibility test accepted the pair".into()
    })?;
    ensure(lindep < 1e-10, || {
        format!("linear dependence residual {lindep:.2e}")
    })?;
    ensure((r.coarse_eta - 0.9830).abs() <= 1e-3, || {
        format!("coarse eta {:.6}", r.coarse_eta)
    })?;
    ensure(dt < 30.0, || format!("runtime {dt:.1} s"))?;
    Ok(format!(
        "coexistence slack {:.1e} (parent residual {defect:.1e}), eta {:.5}, lindep {lindep:.1e}, coarse eta {:.5}, {:.2} s",
        r.coexistence.slack, r.truncated_eta, r.coarse_eta, dt
    ))
}

fn criterion_4() -> Outcome {
    let (a, b) = corpus::qutrit_pair();
    let p = core(corpus::coordinate_projector(3, &[0, 1]))?;
    let pair = core(Assemblage::pair(a, b))?;
    let truncated = core(pair.truncate(&p))?;
    // The same truncation written out by hand: top-left 2x2 blocks.
    let block = |h: &Hermitian| {
        let m = h.matrix();
        Hermitian::new(CMatrix::from_fn(2, 2, |i, j| m[(i, j)])).unwrap()
    };
    let mut defect: f64 = 0.0;
    for x in 0..2 {
        for (k, e) in pair.measurement(x).elements().iter().enumerate() {
            defect = defect.max(block(e).max_abs_diff(truncated.measurement(x).element(k)));
        }
    }
    let r = core(depolarising_robustness(&truncated))?;
    ensure(defect < 1e-15, || {
        format!("truncation differs from the block form by {defect:.2e}")
    })?;
    ensure(r.eta >= 1.0 - COMPATIBLE_MARGIN, || {
        format!("eta = {:.9}", r.eta)
    })?;
    Ok(format!("eta = {:.9}", r.eta))
}

fn criterion_5() -> Outcome {
    let crit = core(subspace::fully_compressible_criterion(
        &corpus::computational_basis(3),
        &corpus::fully_compressible_basis(),
    ))?;
    ensure(crit.holds, || {
        format!("criterion fails: {:?}", crit.failure)
    })?;
    let a = corpus::fully_compressible_pair();
    let mut max_eta: f64 = 0.0;
    for i in 0..200 {
        let p = core(haar_subspace(3, 2, subspace::sample_seed(5, i)))?;
        let r = core(depolarising_robustness(&core(a.truncate(&p))?))?;
        ensure(r.eta <= 1.0 - INCOMPATIBLE_MARGIN, || {
            format!("sample {i}: eta = {:.6}", r.eta)
        })?;
        max_eta = max_eta.max(r.eta);
    }
    Ok(format!(
        "criterion holds; 200/200 truncations incompatible, max eta {max_eta:.5}"
    ))
}

fn criterion_6() -> Outcome {
    let w = corpus::omega();
    let s = 1.0 / 3f64.sqrt();
    let psi = [c(s, 0.0), c(s, 0.0), w * s];
    // Projector onto psi^⊥ and the projected rank-one elements, by hand.
    let r = CMatrix::from_fn(3, 3, |i, j| {
        let id = if i == j { ONE } else { ZERO };
        id - psi[i] * psi[j].conj()
    });
    let project = |v: &[C64]| {
        let u = r.mul_vec(v);
        CMatrix::outer(&u, &u)
    };
    let comp: Vec<CMatrix> = corpus::computational_basis(3)
        .iter()
        .map(|v| project(v))
        .collect();
    let four: Vec<CMatrix> = (0..3)
        .map(|k| {
            let v: Vec<C64> = (0..3).map(|j| w.powu((j * k) as u32) * s).collect();
            project(&v)
        })
        .collect();
    let mut worst: f64 = 0.0;
    for a in &comp {
        let best = four
            .iter()
            .map(|b| a.max_abs_diff(b))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(best);
    }
    let rep = core(subspace::mub_same_povm_check())?;
    ensure(worst <= 1e-12, || {
        format!("hand-built elements differ by {worst:.2e}")
    })?;
    ensure(rep.max_difference <= 1e-12, || {
        format!("max difference {:.2e}", rep.max_difference)
    })?;
    ensure(rep.truncated_eta >= 1.0 - COMPATIBLE_MARGIN, || {
        format!("truncated eta {:.9}", rep.truncated_eta)
    })?;
    Ok(format!(
        "elementwise difference {:.1e} (hand-built {worst:.1e}), truncated eta {:.9}",
        rep.max_difference, rep.truncated_eta
    ))
}

/// `max |ρ^{T_A} - ρ|` with the partial transpose written out on indices.
fn pt_invariance(rho: &BipartiteState) -> f64 {
    let (da, db) = (rho.da, rho.db);
    let m = rho.matrix.matrix();
    let mut r: f64 = 0.0;
    for i in 0..da {
        for j in 0..db {
            for k in 0..da {
                for l in 0..db {
                    let pt = m[(k * db + j, i * db + l)];
                    r = r.max((pt - m[(i * db + j, k * db + l)]).norm());
                }
            }
        }
    }
    r
}

fn criterion_7() -> Outcome {
    let t = Instant::now();
    let scan = core(steering::peres_scan(0.02))?;
    ensure(scan.max_pt_residual < 1e-10, || {
        format!("PT residual {:.2e} on the grid", scan.max_pt_residual)
    })?;
    let best =
        scan.best.as_ref().ok_or_else(|| {
            format!(
            "no steerable point among {} admissible grid points; largest LHS margin deficit {:.2e}",
            scan.points.len(),
            scan.points.iter().map(|p| p.lhs_slack).fold(f64::INFINITY, f64::min)
        )
        })?;
    let (rho, sa) = core(steering::peres_assemblage(best.m1, best.m2))?;
    let pt = pt_invariance(&rho);
    ensure(pt < 1e-10, || format!("hand-computed PT residual {pt:.2e}"))?;
    let lhs = core(steering::lhs_feasible(&sa))?;
    ensure(!lhs.unsteerable, || {
        format!("LHS slack {:.2e} at the best point", lhs.slack)
    })?;
    let pgm = core(steering::pretty_good(&sa))?;
    let rob = core(depolarising_robustness(&pgm))?;
    ensure(rob.verdict == Verdict::Incompatible, || {
        format!("pgm eta {:.6}", rob.eta)
    })?;
    let bound = (2.0 * 3.0 - 1.0) / (3.0 * 3.0 - 1.0);
    ensure(rob.eta >= bound - 1e-3, || {
        format!("pgm eta {:.6} below 5/8", rob.eta)
    })?;
    let cls = core(subspace::classify(&pgm, 2, 200, 11))?;
    let haar = cls
        .records
        .iter()
        .filter(|r| r.kind == SampleKind::Haar)
        .count();
    ensure(cls.verdict == SubspaceVerdict::Incompressible, || {
        format!(
            "verdict {:?} ({} compatible, {} incompatible, {} indeterminate)",
            cls.verdict, cls.compatible_count, cls.incompatible_count, cls.indeterminate_count
        )
    })?;
    ensure(haar == 200, || format!("{haar} Haar samples evaluated"))?;
    Ok(format!(
        "{} admissible, {} steerable, PT residual {:.1e}; at ({:.2}, {:.2}): LHS slack {:.2e}, pgm eta {:.5} >= 5/8, {:?} over {} truncations, {:.1} s",
        scan.points.len(),
        scan.steerable_count,
        scan.max_pt_residual,
        best.m1,
        best.m2,
        lhs.slack,
        rob.eta,
        cls.verdict,
        cls.records.len(),
        t.elapsed().as_secs_f64()
    ))
}

fn criterion_8() -> Outcome {
    let t = Instant::now();
    let d = 3usize;
    let df = d as f64;
    let mut worst: f64 = 0.0;
    for n in [1usize, 2] {
        let rep = core(subspace::integral_identities_check(d, n, 20_000, 8))?;
        let m = &rep.m;
        let tr = m.trace_re();
        let id = Hermitian::identity(d);
        let nf = n as f64;
        let den = df * df - 1.0;
        let exact = [
            id.clone(),
            m.scale((nf * df - 1.0) / den)
                .add(&id.scale((df - nf) * tr / den)),
            m.scale((df - nf) / den)
                .add(&id.scale((nf * df - 1.0) * tr / den)),
        ];
        for (k, ex) in exact.iter().enumerate() {
            let est = &rep.checks[k].estimate;
            let scale = ex.matrix().max_abs();
            let err = est.max_abs_diff(ex) / scale;
            ensure(err <= 0.02, || {
                format!("n = {n}, {}: relative error {err:.4}", rep.checks[k].name)
            })?;
            worst = worst.max(err);
        }
    }
    let dt = t.elapsed().as_secs_f64();
    ensure(dt < 60.0, || format!("runtime {dt:.1} s"))?;
    Ok(format!(
        "max relative error {worst:.4} over n = 1, 2 ({dt:.1} s)"
    ))
}

fn random_pvm(d: usize, rng: &mut Rng) -> Povm {
    Povm::from_basis(&haar_frame(d, d, rng)).unwrap()
}

fn random_state(i: usize, d: usize, rng: &mut Rng) -> BipartiteState {
    if i.is_multiple_of(2) {
        let p = rng.random_range(0.2..1.0);
        let iso = BipartiteState::isotropic(d, p).unwrap();
        iso.local_unitary(&haar_unitary(d, rng), &haar_unitary(d, rng))
            .unwrap()
    } else {
        let q = rng.random_range(0.2..0.95);
        let psi = normalized(&complex_gaussian_vector(d * d, rng));
        let m = Hermitian::ket_bra(&psi)
            .scale(q)
            .add(&Hermitian::identity(d * d).scale((1.0 - q) / (d * d) as f64));
        BipartiteState::new(d, d, m).unwrap()
    }
}

fn criterion_9() -> Outcome {
    let mut rng = rng_from_seed(9);
    let (mut steerable, mut disagreements) = (0, Vec::new());
    for i in 0..50 {
        let d = 2 + i % 2;
        let rho = random_state(i / 2, d, &mut rng);
        let alice = Assemblage::pair(random_pvm(d, &mut rng), random_pvm(d, &mut rng)).unwrap();
        let sa = core(steering::assemblage_from_state(&rho, &alice))?;
        let min_marginal = sa.reduced.min_eigenvalue();
        ensure(min_marginal > 1e-6, || {
            format!("instance {i}: marginal eigenvalue {min_marginal:.2e}")
        })?;
        let lhs = core(steering::lhs_feasible(&sa))?;
        let pgm = core(steering::pretty_good(&sa))?;
        let jm = core(jm_parent(&pgm))?;
        if !lhs.unsteerable {
            steerable += 1;
        }
        if lhs.unsteerable != jm.feasible {
            disagreements.push(format!("{i} (lhs {:.2e}, jm {:.2e})", lhs.slack, jm.slack));
        }
    }
    ensure(disagreements.is_empty(), || {
        format!("disagreements: {}", disagreements.join(", "))
    })?;
    Ok(format!(
        "50 instances ({steerable} steerable), 0 disagreements"
    ))
}

/// Marginals of a random parent POVM: compatible by construction.
fn random_compatible(d: usize, counts: &[usize], rng: &mut Rng) -> Assemblage {
    let labels = tuples(counts);
    let parent = Povm::random(d, labels.len(), d, rng);
    let ms = counts
        .iter()
        .enumerate()
        .map(|(x, &k)| {
            Povm::new(
                (0..k)
                    .map(|a| marginal(&labels, parent.elements(), x, a, d))
                    .collect(),
            )
            .unwrap()
        })
        .collect();
    Assemblage::new(ms).unwrap()
}

fn criterion_10() -> Outcome {
    let mut rng = rng_from_seed(10);
    let shapes = [(2, 2), (2, 3), (3, 3), (3, 4)];
    let mut violations = Vec::new();
    for i in 0..50 {
        let d = 2 + i % 2;
        let (ma, mb) = shapes[(i / 2) % shapes.len()];
        let a = random_compatible(d, &[ma, mb], &mut rng);
        let jm = core(jm_parent(&a))?;
        ensure(jm.feasible, || {
            format!("pair {i}: generated pair not jointly measurable")
        })?;
        let co = core(coexistent_parent(a.measurement(0), a.measurement(1)))?;
        if !co.feasible {
            violations.push(format!("pair {i}: coexistence slack {:.2e}", co.slack));
        }
    }
    ensure(violations.is_empty(), || violations.join("; "))?;
    let mut truncation_violations = Vec::new();
    for i in 0..20 {
        let d = 3 + i % 2;
        let counts: Vec<usize> = (0..2 + i % 2).map(|x| 2 + (i + x) % 2).collect();
        let a = random_compatible(d, &counts, &mut rng);
        let n = rng.random_range(2..d);
        let p = core(haar_subspace_with(d, n, &mut rng))?;
        let t = core(a.truncate(&p))?;
        let jm = core(jm_parent(&t))?;
        if !jm.feasible {
            truncation_violations.push(format!("assemblage {i}: slack {:.2e}", jm.slack));
        }
    }
    ensure(truncation_violations.is_empty(), || {
        truncation_violations.join("; ")
    })?;
    Ok("50/50 compatible pairs coexistent; 20/20 truncations compatible".into())
}

fn criterion_11() -> Outcome {
    let t = Instant::now();
    let rep = core(coexist::seesaw(3, 2, 3, 500, 200))?;
    let failed = rep.runs.iter().filter(|r| r.error.is_some()).count();
    ensure(!rep.found.is_empty(), || {
        format!("no coexistent incompatible pair in 500 seeds ({failed} runs failed)")
    })?;
    for e in &rep.found {
        for m in [&e.a, &e.b] {
            let v = validate(&Assemblage::new(vec![m.clone()]).unwrap());
            ensure(v.valid, || {
                format!("seed {}: returned POVM fails validation", e.seed)
            })?;
        }
        let co = core(coexistent_parent(&e.a, &e.b))?;
        ensure(co.feasible, || {
            format!("seed {}: not coexistent (slack {:.2e})", e.seed, co.slack)
        })?;
        if let Some(p) = &co.parent {
            let (defect, min_eig) = coexistence_parent_defect(p, [&e.a, &e.b]);
            ensure(defect < 1e-7 && min_eig > -1e-7, || {
                format!(
                    "seed {}: parent residual {defect:.2e}, min eigenvalue {min_eig:.2e}",
                    e.seed
                )
            })?;
        }
        let pair = Assemblage::pair(e.a.clone(), e.b.clone()).unwrap();
        let jm = core(jm_parent(&pair))?;
        ensure(!jm.feasible, || {
            format!("seed {}: jointly measurable", e.seed)
        })?;
        let w = core(witness(&e.a, &e.b))?;
        ensure(w.value > 1.0 + 1e-6, || {
            format!("seed {}: witness value {:.8}", e.seed, w.value)
        })?;
    }
    Ok(format!(
        "{} of 500 seeds gave coexistent incompatible pairs, all pass the post-check ({failed} runs failed, {:.1} s)",
        rep.found.len(),
        t.elapsed().as_secs_f64()
    ))
}

fn corpus_assemblages() -> Result<Vec<(&'static str, Assemblage)>, String> {
    let (qa, qb) = corpus::qutrit_pair();
    let (ca, cb) = corpus::qubit_counterexample_pair();
    let (m1, m2) = corpus::PERES_POINT;
    let (_, sa) = core(steering::peres_assemblage(m1, m2))?;
    Ok(vec![
        ("sigma-xz", corpus::sigma_xz()),
        ("noisy-xz", core(corpus::noisy_xz(frac_1_sqrt_2()))?),
        ("qutrit-pair", Assemblage::pair(qa, qb).unwrap()),
        ("qubit-counterexample", Assemblage::pair(ca, cb).unwrap()),
        ("fully-compressible", corpus::fully_compressible_pair()),
        ("qutrit-mub", corpus::qutrit_mub_pair()),
        ("peres-measurements", corpus::peres_measurements()),
        ("peres-pretty-good", core(steering::pretty_good(&sa))?),
    ])
}

fn criterion_12() -> Outcome {
    let mut worst_gap: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    for (name, a) in corpus_assemblages()? {
        let r = core(depolarising_robustness(&a))?;
        let gap = (r.primal_value - r.dual_value).abs() / (1.0 + r.primal_value.abs());
        ensure(gap <= 1e-8, || format!("{name}: gap {gap:.2e}"))?;
        ensure(r.primal_residual <= 1e-8 && r.dual_residual <= 1e-8, || {
            format!(
                "{name}: residuals {:.2e} / {:.2e}",
                r.primal_residual, r.dual_residual
            )
        })?;
        // Constraint residual recomputed from the returned parent.
        let parent = r
            .parent
            .as_ref()
            .ok_or_else(|| format!("{name}: no parent"))?;
        let noisy = core(a.depolarise(r.eta))?;
        let res = parent.marginal_residual(&noisy);
        ensure(res <= 1e-8, || {
            format!("{name}: parent marginal residual {res:.2e}")
        })?;
        worst_gap = worst_gap.max(gap);
        worst_res = worst_res
            .max(res)
            .max(r.primal_residual)
            .max(r.dual_residual);
        let again = core(depolarising_robustness(&a))?;
        let (s1, s2) = (
            serde_json::to_string(&r).unwrap(),
            serde_json::to_string(&again).unwrap(),
        );
        ensure(s1 == s2, || format!("{name}: rerun differs"))?;
    }
    let a = corpus::fully_compressible_pair();
    let c1 = serde_json::to_string(&core(subspace::classify(&a, 2, 30, 3))?).unwrap();
    let c2 = serde_json::to_string(&core(subspace::classify(&a, 2, 30, 3))?).unwrap();
    ensure(c1 == c2, || "classify rerun differs".into())?;
    let s1 = serde_json::to_string(&core(coexist::seesaw_from(3, 2, 3, 8, 200, 12))?).unwrap();
    let s2 = serde_json::to_string(&core(coexist::seesaw_from(3, 2, 3, 8, 200, 12))?).unwrap();
    ensure(s1 == s2, || "seesaw rerun differs".into())?;
    Ok(format!(
        "max gap {worst_gap:.1e}, max residual {worst_res:.1e} over the corpus; reruns bitwise identical"
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("robustness of sharp sigma_x, sigma_z", criterion_1),
        ("parent of the noisy spin pair", criterion_2),
        ("qubit coexistence counterexample", criterion_3),
        ("truncation of the qutrit pair to |0>,|1>", criterion_4),
        ("fully compressible instance", criterion_5),
        ("MUB truncation gives one POVM", criterion_6),
        ("Peres construction", criterion_7),
        ("Haar subspace integral identities", criterion_8),
        ("LHS model iff pretty-good joint measurability", criterion_9),
        (
            "jm implies coexistence; truncation keeps compatibility",
            criterion_10,
        ),
        ("seesaw search", criterion_11),
        ("solver accuracy and determinism", criterion_12),
    ];
    let mut failures = 0;
    for (i, (title, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {title}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {title}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
