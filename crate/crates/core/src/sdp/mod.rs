//! Semidefinite programming: a block-diagonal real SDP with free variables,
//! an interior point solver, and a builder that states constraints on complex
//! Hermitian matrix variables through the real embedding.

mod builder;
mod problem;
mod solver;

pub use builder::{HVar, HermitianRows, SdpBuilder, Term};
pub use problem::{Constraint, SdpProblem, Sense, SparseSym};
pub use solver::{solve, SdpOptions, SdpSolution, Status};

use serde::Serialize;

use crate::error::Result;
use crate::linalg::RMatrix;

/// Outcome of a strict feasibility test.
#[derive(Clone, Debug, Serialize)]
pub struct Feasibility {
    pub feasible: bool,
    /// Largest `t` such that every block can be written as `W + t I` with
    /// `W ⪰ 0` while meeting the constraints (capped at 1).
    pub margin: f64,
    /// Blocks `W + t I` of the original problem (meaningful when feasible).
    pub certificate: Vec<RMatrix>,
    /// Free scalars of the original problem.
    pub scalars: Vec<f64>,
    pub solution: Option<SdpSolution>,
}

/// Decides whether the constraint set of `problem` admits PSD blocks, ignoring
/// its objective. The blocks are shifted by a free multiple of the identity
/// and the shift is maximised; the set is declared feasible when the optimal
/// shift is at least `-opts.feas_tol`.
pub fn feasibility(problem: &SdpProblem, opts: &SdpOptions) -> Result<Feasibility> {
    problem.validate()?;
    let mut p = SdpProblem::new(Sense::Maximize);
    p.block_dims = problem.block_dims.clone();
    p.n_scalars = problem.n_scalars;
    let t = p.add_scalar();
    let cap = p.add_block(1);
    for con in &problem.constraints {
        let shift: f64 = con.blocks.iter().map(|(_, s)| s.trace()).sum();
        let mut c = con.clone();
        if shift != 0.0 {
            c.scalars.push((t, shift));
        }
        p.constraints.push(c);
    }
    let mut cap_sym = SparseSym::new();
    cap_sym.push(0, 0, 1.0);
    p.constraints.push(Constraint {
        blocks: vec![(cap, cap_sym)],
        scalars: vec![(t, 1.0)],
        rhs: 1.0,
    });
    p.objective_scalars.push((t, 1.0));
    let sol = solve(&p, opts)?;
    match sol.status {
        Status::Optimal => {
            let margin = sol.scalars[t];
            let certificate = problem
                .block_dims
                .iter()
                .enumerate()
                .map(|(k, &n)| {
                    let mut x = sol.primal_blocks[k].clone();
                    x.axpy(margin, &RMatrix::identity(n));
                    x
                })
                .collect();
            let scalars = sol.scalars[..problem.n_scalars].to_vec();
            Ok(Feasibility {
                feasible: margin >= -opts.feas_tol,
                margin,
                certificate,
                scalars,
                solution: Some(sol),
            })
        }
        Status::PrimalInfeasible => Ok(Feasibility {
            feasible: false,
            margin: f64::NEG_INFINITY,
            certificate: Vec::new(),
            scalars: Vec::new(),
            solution: Some(sol),
        }),
        _ => sol.into_optimal().map(|_| unreachable!()),
    }
}

/// Pretty-printed JSON of a problem, for debugging and offline inspection.
pub fn dump_json(problem: &SdpProblem) -> String {
    serde_json::to_string_pretty(problem).expect("problem serialises")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Hermitian;

    fn one(v: f64) -> SparseSym {
        let mut s = SparseSym::new();
        s.push(0, 0, v);
        s
    }

    #[test]
    fn scalar_lp() {
        // max x s.t. x + s = 1, x, s >= 0
        let mut p = SdpProblem::new(Sense::Maximize);
        let x = p.add_block(1);
        let s = p.add_block(1);
        p.objective_blocks.push((x, one(1.0)));
        p.constraints.push(Constraint {
            blocks: vec![(x, one(1.0)), (s, one(1.0))],
            scalars: vec![],
            rhs: 1.0,
        });
        let sol = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert!((sol.primal_value - 1.0).abs() < 1e-7);
    }

    #[test]
    fn min_eigenvalue_as_sdp() {
        // max t s.t. A - t I ⪰ 0; optimum is λ_min(A)
        let a = RMatrix::from_vec(3, 3, vec![2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0]);
        let mut p = SdpProblem::new(Sense::Maximize);
        let w = p.add_block(3);
        let t = p.add_scalar();
        p.objective_scalars.push((t, 1.0));
        for r in 0..3 {
            for c in r..3 {
                let mut s = SparseSym::new();
                s.push(r, c, if r == c { 1.0 } else { 0.5 });
                p.constraints.push(Constraint {
                    blocks: vec![(w, s)],
                    scalars: if r == c { vec![(t, 1.0)] } else { vec![] },
                    rhs: a[(r, c)],
                });
            }
        }
        let sol = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        // oracle: characteristic polynomial root by bisection
        let det = |l: f64| {
            let m = |i: usize, j: usize| a[(i, j)] - if i == j { l } else { 0.0 };
            m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
                - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
        };
        let (mut lo, mut hi) = (0.0, 2.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if det(lo) * det(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!(
            (sol.primal_value - lo).abs() < 1e-7,
            "{} vs {}",
            sol.primal_value,
            lo
        );
    }

    #[test]
    fn inconsistent_equalities_are_infeasible() {
        let mut p = SdpProblem::new(Sense::Minimize);
        let x = p.add_block(1);
        for rhs in [1.0, 2.0] {
            p.constraints.push(Constraint {
                blocks: vec![(x, one(1.0))],
                scalars: vec![],
                rhs,
            });
        }
        let sol = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, Status::PrimalInfeasible);
    }

    #[test]
    fn negative_requirement_is_infeasible() {
        // x = -1 with x >= 0, plus a genuine constraint to avoid presolve shortcut
        let mut p = SdpProblem::new(Sense::Minimize);
        let x = p.add_block(2);
        let mut s = SparseSym::new();
        s.push(0, 0, 1.0);
        s.push(1, 1, 1.0);
        p.constraints.push(Constraint {
            blocks: vec![(x, s)],
            scalars: vec![],
            rhs: -1.0,
        });
        let sol = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, Status::PrimalInfeasible);
        let f = feasibility(&p, &SdpOptions::default()).unwrap();
        assert!(!f.feasible);
    }

    #[test]
    fn unbounded_is_dual_infeasible() {
        // min -x - y s.t. x - y = 0
        let mut p = SdpProblem::new(Sense::Minimize);
        let x = p.add_block(1);
        let y = p.add_block(1);
        p.objective_blocks.push((x, one(-1.0)));
        p.objective_blocks.push((y, one(-1.0)));
        p.constraints.push(Constraint {
            blocks: vec![(x, one(1.0)), (y, one(-1.0))],
            scalars: vec![],
            rhs: 0.0,
        });
        let sol = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, Status::DualInfeasible);
    }

    #[test]
    fn hermitian_builder_reproduces_min_eigenvalue() {
        // max t s.t. G + t I = H, G ⪰ 0 for a complex Hermitian H
        let h = Hermitian::new(
            crate::linalg::CMatrix::from_rows(&[
                vec![crate::linalg::c(1.0, 0.0), crate::linalg::c(0.3, -0.7)],
                vec![crate::linalg::c(0.3, 0.7), crate::linalg::c(-0.5, 0.0)],
            ])
            .unwrap(),
        )
        .unwrap();
        let mut b = SdpBuilder::new(Sense::Maximize);
        let g = b.hermitian(2);
        let t = b.free_scalar();
        let id = Hermitian::identity(2);
        b.hermitian_eq(&[Term::Var(g, 1.0), Term::Free(t, &id)], &h);
        b.objective_free(t, 1.0);
        let p = b.finish();
        let sol = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, Status::Optimal);
        assert!((sol.primal_value - h.min_eigenvalue()).abs() < 1e-7);
        let gm = g.value(&sol);
        assert!(gm.min_eigenvalue() > -1e-7);
        assert!(gm.add(&id.scale(sol.scalars[t])).max_abs_diff(&h) < 1e-7);
    }

    #[test]
    fn dump_round_trips() {
        let mut p = SdpProblem::new(Sense::Minimize);
        let x = p.add_block(1);
        p.constraints.push(Constraint {
            blocks: vec![(x, one(1.0))],
            scalars: vec![],
            rhs: 1.0,
        });
        let s = dump_json(&p);
        let q: SdpProblem = serde_json::from_str(&s).unwrap();
        assert_eq!(q.constraints.len(), 1);
    }
}
