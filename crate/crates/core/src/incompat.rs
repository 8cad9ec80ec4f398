//! Joint measurability, depolarising incompatibility robustness, the
//! generalised-robustness witness and the subspace lower bound.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Hermitian;
use crate::povm::{outcome_tuples, Assemblage, ParentPovm, Povm, ZERO_TOL};
use crate::sdp::{self, HVar, SdpBuilder, SdpOptions, Sense, Term};

/// Largest number of parent outcomes accepted by the parent-POVM SDPs.
pub const MAX_PARENT_OUTCOMES: usize = 4096;
/// Robustness at or above `1 - COMPATIBLE_MARGIN` counts as compatible.
pub const COMPATIBLE_MARGIN: f64 = 1e-6;
/// Robustness at or below `1 - INCOMPATIBLE_MARGIN` counts as incompatible.
pub const INCOMPATIBLE_MARGIN: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Compatible,
    Incompatible,
    Indeterminate,
}

impl Verdict {
    pub fn from_eta(eta: f64) -> Verdict {
        if eta >= 1.0 - COMPATIBLE_MARGIN {
            Verdict::Compatible
        } else if eta <= 1.0 - INCOMPATIBLE_MARGIN {
            Verdict::Incompatible
        } else {
            Verdict::Indeterminate
        }
    }
}

/// Outcome of the joint-measurability feasibility test.
#[derive(Clone, Debug, Serialize)]
pub struct JmResult {
    pub feasible: bool,
    /// Optimal identity shift of the feasibility SDP.
    pub slack: f64,
    pub parent: Option<ParentPovm>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RobustnessResult {
    pub eta: f64,
    pub verdict: Verdict,
    /// Parent of the depolarised assemblage at the optimal noise level.
    pub parent: Option<ParentPovm>,
    pub iterations: usize,
    /// Optimal `1 - η` from the primal and the dual side.
    pub primal_value: f64,
    pub dual_value: f64,
    pub relative_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

/// Nonzero outcomes of every setting; zero elements can only receive zero
/// parent weight and are removed from the SDP.
struct Reduced {
    kept: Vec<Vec<usize>>,
    labels: Vec<Vec<usize>>,
}

fn reduce(sets: &[&[Hermitian]]) -> Result<Reduced> {
    let kept: Vec<Vec<usize>> = sets
        .iter()
        .map(|m| (0..m.len()).filter(|&a| !m[a].is_zero(ZERO_TOL)).collect())
        .collect();
    let counts: Vec<usize> = kept.iter().map(|k| k.len()).collect();
    let total = counts
        .iter()
        .try_fold(1usize, |acc, &c| acc.checked_mul(c))
        .unwrap_or(usize::MAX);
    if total > MAX_PARENT_OUTCOMES {
        return Err(Error::SizeGuard {
            what: "number of parent outcomes",
            size: total as u128,
            limit: MAX_PARENT_OUTCOMES as u128,
        });
    }
    let labels = outcome_tuples(&counts);
    Ok(Reduced { kept, labels })
}

fn element_sets(a: &Assemblage) -> Vec<&[Hermitian]> {
    a.measurements().iter().map(|m| m.elements()).collect()
}

impl Reduced {
    /// Marginal constraints `Σ_{a: a_x = a} G_a (+ extra) = rhs(x, a)`, with the
    /// last outcome of every setting but the first left implicit.
    fn marginal_constraints(
        &self,
        b: &mut SdpBuilder,
        vars: &[HVar],
        mut extra: impl FnMut(usize, usize) -> Option<(usize, Hermitian)>,
        rhs: impl Fn(usize, usize) -> Hermitian,
    ) {
        for (x, kept) in self.kept.iter().enumerate() {
            let n = if x == 0 { kept.len() } else { kept.len() - 1 };
            for (ai, &a) in kept.iter().enumerate().take(n) {
                let mut terms: Vec<Term<'_>> = self
                    .labels
                    .iter()
                    .zip(vars)
                    .filter(|(lab, _)| lab[x] == ai)
                    .map(|(_, v)| Term::Var(*v, 1.0))
                    .collect();
                let ex = extra(x, a);
                if let Some((k, h)) = &ex {
                    terms.push(Term::NonNeg(*k, h));
                }
                b.hermitian_eq(&terms, &rhs(x, a));
            }
        }
    }

    /// Elements over the full outcome sets, zeros for removed outcomes.
    fn expand(&self, full_counts: &[usize], d: usize, elements: Vec<Hermitian>) -> Vec<Hermitian> {
        let full = outcome_tuples(full_counts);
        let mut out = vec![Hermitian::zeros(d); full.len()];
        let index_of = |t: &[usize]| {
            t.iter()
                .zip(full_counts)
                .fold(0, |acc, (&v, &c)| acc * c + v)
        };
        for (lab, g) in self.labels.iter().zip(elements) {
            let t: Vec<usize> = lab
                .iter()
                .enumerate()
                .map(|(x, &ai)| self.kept[x][ai])
                .collect();
            out[index_of(&t)] = g;
        }
        out
    }
}

/// Feasibility of PSD `G_a`, indexed by outcome tuples, whose marginals
/// reproduce every operator in `sets`. Returns the identity-shift margin and,
/// when feasible, the elements over all tuples of the full outcome counts.
pub(crate) fn marginal_feasibility(
    d: usize,
    sets: &[&[Hermitian]],
    opts: &SdpOptions,
) -> Result<(bool, f64, Option<Vec<Hermitian>>)> {
    let red = reduce(sets)?;
    let mut b = SdpBuilder::new(Sense::Maximize);
    let vars: Vec<HVar> = red.labels.iter().map(|_| b.hermitian(d)).collect();
    red.marginal_constraints(&mut b, &vars, |_, _| None, |x, k| sets[x][k].clone());
    let p = b.finish();
    let f = sdp::feasibility(&p, opts)?;
    let elements = if f.feasible {
        let counts: Vec<usize> = sets.iter().map(|s| s.len()).collect();
        let g = vars.iter().map(|v| v.value_in(&f.certificate)).collect();
        Some(red.expand(&counts, d, g))
    } else {
        None
    };
    Ok((f.feasible, f.margin, elements))
}

/// Searches for a parent POVM reproducing every measurement as a marginal.
pub fn jm_parent(a: &Assemblage) -> Result<JmResult> {
    jm_parent_with(a, &SdpOptions::default())
}

pub fn jm_parent_with(a: &Assemblage, opts: &SdpOptions) -> Result<JmResult> {
    let (feasible, slack, elements) = marginal_feasibility(a.dim(), &element_sets(a), opts)?;
    let parent = match elements {
        Some(g) => Some(ParentPovm::new(a.outcome_counts(), g)?),
        None => None,
    };
    Ok(JmResult {
        feasible,
        slack,
        parent,
    })
}

/// Largest `η ≤ 1` for which `η A + (1-η) tr(A) I/d` admits a parent, solved
/// directly as one SDP in `u = 1 - η ≥ 0`.
pub fn depolarising_robustness(a: &Assemblage) -> Result<RobustnessResult> {
    depolarising_robustness_with(a, &SdpOptions::default())
}

pub fn depolarising_robustness_with(a: &Assemblage, opts: &SdpOptions) -> Result<RobustnessResult> {
    let red = reduce(&element_sets(a))?;
    let d = a.dim();
    let mut b = SdpBuilder::new(Sense::Minimize);
    let vars: Vec<HVar> = red.labels.iter().map(|_| b.hermitian(d)).collect();
    let u = b.nonneg_scalar();
    b.objective_nonneg(u, 1.0);
    let id = Hermitian::identity(d);
    red.marginal_constraints(
        &mut b,
        &vars,
        |x, k| {
            let e = a.measurement(x).element(k);
            Some((u, e.sub(&id.scale(e.trace_re() / d as f64))))
        },
        |x, k| a.measurement(x).element(k).clone(),
    );
    let p = b.finish();
    let sol = sdp::solve(&p, opts)?.into_optimal()?;
    let eta = 1.0 - sol.primal_blocks[u][(0, 0)];
    let elements = vars.iter().map(|v| v.value(&sol)).collect();
    let parent = ParentPovm::new(
        a.outcome_counts(),
        red.expand(&a.outcome_counts(), d, elements),
    )?;
    Ok(RobustnessResult {
        eta,
        verdict: Verdict::from_eta(eta),
        parent: Some(parent),
        iterations: sol.iterations,
        primal_value: sol.primal_value,
        dual_value: sol.dual_value,
        relative_gap: sol.relative_gap,
        primal_residual: sol.primal_residual,
        dual_residual: sol.dual_residual,
    })
}

/// Optimal dual operators of the generalised incompatibility robustness.
/// `operators[x][a]` pairs with `M_{a|x}`; for two settings these are the
/// `X_i` and `Y_j` of the pair form.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub operators: Vec<Vec<Hermitian>>,
    pub n: Hermitian,
    pub value: f64,
}

impl Witness {
    pub fn x(&self) -> &[Hermitian] {
        &self.operators[0]
    }

    pub fn y(&self) -> &[Hermitian] {
        &self.operators[1]
    }

    /// `Σ_x Σ_a tr(X_{a|x} M_{a|x})` at another assemblage.
    pub fn evaluate(&self, a: &Assemblage) -> f64 {
        self.operators
            .iter()
            .zip(a.measurements())
            .map(|(ops, m)| {
                ops.iter()
                    .zip(m.elements())
                    .map(|(x, e)| x.inner(e))
                    .sum::<f64>()
            })
            .sum()
    }

    /// Largest violation of `X ⪰ 0`, `Σ_x X_{a_x|x} ⪯ N` and `tr N = 1`.
    pub fn constraint_violation(&self) -> f64 {
        let mut v: f64 = (self.n.trace_re() - 1.0).abs();
        for ops in &self.operators {
            for x in ops {
                v = v.max(-x.min_eigenvalue());
            }
        }
        let counts: Vec<usize> = self.operators.iter().map(|o| o.len()).collect();
        for t in outcome_tuples(&counts) {
            let mut s = self.n.clone();
            for (x, &a) in t.iter().enumerate() {
                s = s.sub(&self.operators[x][a]);
            }
            v = v.max(-s.min_eigenvalue());
        }
        v
    }
}

/// Witness SDP for a pair of POVMs.
pub fn witness(a1: &Povm, a2: &Povm) -> Result<Witness> {
    witness_assemblage(&Assemblage::pair(a1.clone(), a2.clone())?)
}

/// Maximises `Σ_x Σ_a tr(X_{a|x} M_{a|x})` over `X ⪰ 0` with
/// `Σ_x X_{a_x|x} ⪯ N` for every outcome tuple and `tr N = 1`. The optimum is
/// 1 exactly when the assemblage is jointly measurable. For more than two
/// settings one operator per outcome of each setting enters every tuple sum.
pub fn witness_assemblage(a: &Assemblage) -> Result<Witness> {
    witness_with(a, &SdpOptions::default())
}

pub fn witness_with(a: &Assemblage, opts: &SdpOptions) -> Result<Witness> {
    let counts = a.outcome_counts();
    let total: usize = counts.iter().product();
    if total > MAX_PARENT_OUTCOMES {
        return Err(Error::SizeGuard {
            what: "number of outcome tuples",
            size: total as u128,
            limit: MAX_PARENT_OUTCOMES as u128,
        });
    }
    let d = a.dim();
    let mut b = SdpBuilder::new(Sense::Maximize);
    let n = b.hermitian(d);
    let ops: Vec<Vec<HVar>> = counts
        .iter()
        .map(|&k| (0..k).map(|_| b.hermitian(d)).collect())
        .collect();
    let zero = Hermitian::zeros(d);
    for t in outcome_tuples(&counts) {
        let s = b.hermitian(d);
        let mut terms = vec![Term::Var(n, 1.0), Term::Var(s, -1.0)];
        for (x, &k) in t.iter().enumerate() {
            terms.push(Term::Var(ops[x][k], -1.0));
        }
        b.hermitian_eq(&terms, &zero);
    }
    let id = Hermitian::identity(d);
    b.trace_eq(&[(n, &id)], &[], &[], 1.0);
    for (x, m) in a.measurements().iter().enumerate() {
        for (k, e) in m.elements().iter().enumerate() {
            if !e.is_zero(ZERO_TOL) {
                b.objective_trace(ops[x][k], e);
            }
        }
    }
    let p = b.finish();
    let sol = sdp::solve(&p, opts)?.into_optimal()?;
    Ok(Witness {
        operators: ops
            .iter()
            .map(|row| row.iter().map(|v| v.value(&sol)).collect())
            .collect(),
        n: n.value(&sol),
        value: sol.primal_value,
    })
}

/// `(n d - 1)/(d² - 1)`: robustness guaranteed for an assemblage that is
/// compatible in every `n`-dimensional subspace.
pub fn incompressibility_bound(d: usize, n: usize) -> Result<f64> {
    if d < 2 || n == 0 || n > d {
        return Err(Error::validation(format!(
            "bound needs 1 <= n <= d and d >= 2 (d = {d}, n = {n})"
        )));
    }
    let (d, n) = (d as f64, n as f64);
    Ok((n * d - 1.0) / (d * d - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, rng_from_seed};
    use crate::povm::post_process;

    fn sharp_x() -> Povm {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Povm::from_basis(&[vec![c(s, 0.0), c(s, 0.0)], vec![c(s, 0.0), c(-s, 0.0)]]).unwrap()
    }

    fn sharp_z() -> Povm {
        Povm::from_basis(&[
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0)],
        ])
        .unwrap()
    }

    #[test]
    fn sigma_x_sigma_z_robustness() {
        let a = Assemblage::pair(sharp_x(), sharp_z()).unwrap();
        let r = depolarising_robustness(&a).unwrap();
        assert!(
            (r.eta - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6,
            "{}",
            r.eta
        );
        assert_eq!(r.verdict, Verdict::Incompatible);
        let noisy = a.depolarise(r.eta).unwrap();
        let parent = r.parent.unwrap();
        assert!(parent.marginal_residual(&noisy) < 1e-7);
    }

    #[test]
    fn jm_threshold() {
        let a = Assemblage::pair(sharp_x(), sharp_z()).unwrap();
        let at = a.depolarise(std::f64::consts::FRAC_1_SQRT_2).unwrap();
        let r = jm_parent(&at).unwrap();
        assert!(r.feasible, "slack {}", r.slack);
        let p = r.parent.unwrap();
        assert!(p.marginal_residual(&at) < 1e-7);
        let above = a.depolarise(0.75).unwrap();
        assert!(!jm_parent(&above).unwrap().feasible);
    }

    #[test]
    fn witness_values() {
        let w = witness(&sharp_x(), &sharp_z()).unwrap();
        assert!(w.value > 1.0 + 1e-3);
        assert!(w.constraint_violation() < 1e-7);
        let same = witness(&sharp_z(), &sharp_z()).unwrap();
        assert!((same.value - 1.0).abs() < 1e-6, "{}", same.value);
    }

    #[test]
    fn random_parent_is_compatible() {
        let mut rng = rng_from_seed(9);
        let parent = Povm::random(3, 4, 2, &mut rng);
        let k1 = vec![
            vec![1.0, 0.0],
            vec![0.3, 0.7],
            vec![0.0, 1.0],
            vec![0.5, 0.5],
        ];
        let k2 = vec![
            vec![0.2, 0.3, 0.5],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.1, 0.8, 0.1],
        ];
        let a = post_process(&parent, &[k1, k2]).unwrap();
        let r = depolarising_robustness(&a).unwrap();
        assert_eq!(r.verdict, Verdict::Compatible, "{}", r.eta);
        assert!(jm_parent(&a).unwrap().feasible);
    }

    #[test]
    fn bound_values() {
        assert!((incompressibility_bound(3, 2).unwrap() - 0.625).abs() < 1e-15);
        assert!((incompressibility_bound(4, 2).unwrap() - 7.0 / 15.0).abs() < 1e-15);
        assert_eq!(incompressibility_bound(5, 5).unwrap(), 1.0);
        assert!(incompressibility_bound(3, 4).is_err());
    }
}
