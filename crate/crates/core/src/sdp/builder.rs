use super::problem::{Constraint, SdpProblem, Sense, SparseSym};
use super::solver::SdpSolution;
use crate::linalg::{unembed, CMatrix, Hermitian, RMatrix, C64};

/// A complex `d x d` Hermitian PSD variable, stored as a real `2d x 2d` block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HVar {
    pub block: usize,
    pub dim: usize,
}

impl HVar {
    /// Functional `X -> Re tr(C G(X))` on the embedded block.
    pub fn trace_functional(&self, c: &Hermitian) -> SparseSym {
        let d = self.dim;
        let mut s = SparseSym::new();
        for p in 0..d {
            for q in p..d {
                let z = c[(p, q)];
                let re = 0.5 * z.re;
                if re != 0.0 {
                    s.push(p, q, re);
                    s.push(p + d, q + d, re);
                }
                if p != q && z.im != 0.0 {
                    // Re tr(C G) picks up Im C_pq · Im G_pq with a factor 2.
                    s.push(p, q + d, -0.5 * z.im);
                    s.push(q, p + d, 0.5 * z.im);
                }
            }
        }
        s
    }

    /// The complex matrix encoded by the block of a solution.
    pub fn value(&self, sol: &SdpSolution) -> Hermitian {
        Hermitian::symmetrized(unembed(&sol.primal_blocks[self.block]))
    }

    /// The complex matrix encoded by block `self.block` of `blocks`.
    pub fn value_in(&self, blocks: &[RMatrix]) -> Hermitian {
        Hermitian::symmetrized(unembed(&blocks[self.block]))
    }

    /// The complex matrix encoded by the dual slack block.
    pub fn dual_value(&self, sol: &SdpSolution) -> Hermitian {
        Hermitian::symmetrized(unembed(&sol.dual_blocks[self.block]))
    }
}

#[derive(Clone, Copy, Debug)]
enum Part {
    Re(usize, usize),
    Im(usize, usize),
}

impl Part {
    fn of(&self, h: &Hermitian) -> f64 {
        match *self {
            Part::Re(p, q) => h[(p, q)].re,
            Part::Im(p, q) => h[(p, q)].im,
        }
    }

    /// Sparse functional reading this part off an embedded `d`-dimensional block.
    fn functional(&self, d: usize, a: f64) -> Vec<(usize, usize, f64)> {
        match *self {
            Part::Re(p, q) if p == q => vec![(p, p, 0.5 * a), (p + d, p + d, 0.5 * a)],
            Part::Re(p, q) => vec![(p, q, 0.25 * a), (p + d, q + d, 0.25 * a)],
            Part::Im(p, q) => vec![(p, q + d, -0.25 * a), (q, p + d, 0.25 * a)],
        }
    }
}

fn parts(d: usize) -> Vec<Part> {
    let mut out = Vec::with_capacity(d * d);
    for p in 0..d {
        for q in p..d {
            out.push(Part::Re(p, q));
            if p != q {
                out.push(Part::Im(p, q));
            }
        }
    }
    out
}

/// Constraint rows of one Hermitian equation, for reading back its dual.
#[derive(Clone, Debug)]
pub struct HermitianRows {
    dim: usize,
    rows: Vec<(Part, Option<usize>)>,
}

impl HermitianRows {
    /// The Hermitian `W` with `Σ_rows y_row · row(G) = Re tr(W G)`, where `y`
    /// are the dual multipliers of the solution.
    pub fn dual(&self, sol: &SdpSolution) -> Hermitian {
        let d = self.dim;
        let mut m = CMatrix::zeros(d, d);
        for &(part, row) in &self.rows {
            let y = row.map_or(0.0, |r| sol.dual_vars[r]);
            match part {
                Part::Re(p, q) if p == q => m[(p, p)] = C64::new(y, 0.0),
                Part::Re(p, q) => {
                    m[(p, q)].re = 0.5 * y;
                    m[(q, p)].re = 0.5 * y;
                }
                Part::Im(p, q) => {
                    m[(p, q)].im = 0.5 * y;
                    m[(q, p)].im = -0.5 * y;
                }
            }
        }
        Hermitian::symmetrized(m)
    }
}

/// One summand of a Hermitian matrix equation.
#[derive(Clone, Copy, Debug)]
pub enum Term<'a> {
    /// `a · G`
    Var(HVar, f64),
    /// `s · H` with `s` a free real scalar.
    Free(usize, &'a Hermitian),
    /// `u · H` with `u ≥ 0` stored as a `1 x 1` block.
    NonNeg(usize, &'a Hermitian),
}

/// Incremental construction of an [`SdpProblem`] over Hermitian variables.
#[derive(Clone, Debug)]
pub struct SdpBuilder {
    problem: SdpProblem,
}

impl SdpBuilder {
    pub fn new(sense: Sense) -> Self {
        SdpBuilder {
            problem: SdpProblem::new(sense),
        }
    }

    pub fn hermitian(&mut self, dim: usize) -> HVar {
        HVar {
            block: self.problem.add_block(2 * dim),
            dim,
        }
    }

    pub fn free_scalar(&mut self) -> usize {
        self.problem.add_scalar()
    }

    /// A nonnegative scalar; the returned index is its `1 x 1` block.
    pub fn nonneg_scalar(&mut self) -> usize {
        self.problem.add_block(1)
    }

    /// Adds the `d²` real equations of `Σ terms = rhs`.
    pub fn hermitian_eq(&mut self, terms: &[Term<'_>], rhs: &Hermitian) -> HermitianRows {
        let d = rhs.dim();
        let mut rows = Vec::with_capacity(d * d);
        for part in parts(d) {
            let mut con = Constraint {
                rhs: part.of(rhs),
                ..Default::default()
            };
            for t in terms {
                match *t {
                    Term::Var(v, a) => {
                        assert_eq!(v.dim, d, "variable dimension mismatch");
                        if a != 0.0 {
                            con.blocks.push((
                                v.block,
                                SparseSym {
                                    entries: part.functional(d, a),
                                },
                            ));
                        }
                    }
                    Term::Free(j, h) => {
                        let a = part.of(h);
                        if a != 0.0 {
                            con.scalars.push((j, a));
                        }
                    }
                    Term::NonNeg(k, h) => {
                        let a = part.of(h);
                        if a != 0.0 {
                            con.blocks.push((
                                k,
                                SparseSym {
                                    entries: vec![(0, 0, a)],
                                },
                            ));
                        }
                    }
                }
            }
            if con.blocks.is_empty() && con.scalars.is_empty() && con.rhs == 0.0 {
                rows.push((part, None));
                continue;
            }
            rows.push((part, Some(self.problem.constraints.len())));
            self.problem.constraints.push(con);
        }
        HermitianRows { dim: d, rows }
    }

    /// Adds `Σ Re tr(C_t G_t) + Σ a_j s_j + Σ b_k u_k = rhs`.
    pub fn trace_eq(
        &mut self,
        traces: &[(HVar, &Hermitian)],
        free: &[(usize, f64)],
        nonneg: &[(usize, f64)],
        rhs: f64,
    ) {
        let mut con = Constraint {
            rhs,
            ..Default::default()
        };
        for (v, c) in traces {
            con.blocks.push((v.block, v.trace_functional(c)));
        }
        con.scalars.extend_from_slice(free);
        for &(k, b) in nonneg {
            con.blocks.push((
                k,
                SparseSym {
                    entries: vec![(0, 0, b)],
                },
            ));
        }
        self.problem.constraints.push(con);
    }

    /// Adds `Re tr(C G)` to the objective.
    pub fn objective_trace(&mut self, v: HVar, c: &Hermitian) {
        self.problem
            .objective_blocks
            .push((v.block, v.trace_functional(c)));
    }

    pub fn objective_free(&mut self, j: usize, a: f64) {
        self.problem.objective_scalars.push((j, a));
    }

    pub fn objective_nonneg(&mut self, k: usize, a: f64) {
        self.problem.objective_blocks.push((
            k,
            SparseSym {
                entries: vec![(0, 0, a)],
            },
        ));
    }

    pub fn push_constraint(&mut self, c: Constraint) {
        self.problem.constraints.push(c);
    }

    pub fn problem(&self) -> &SdpProblem {
        &self.problem
    }

    pub fn finish(self) -> SdpProblem {
        self.problem
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, embed, CMatrix};

    #[test]
    fn trace_functional_matches_embedding() {
        let cm = Hermitian::new(
            CMatrix::from_rows(&[
                vec![c(0.7, 0.0), c(0.2, 0.9), c(-0.1, 0.3)],
                vec![c(0.2, -0.9), c(-1.0, 0.0), c(0.5, -0.4)],
                vec![c(-0.1, -0.3), c(0.5, 0.4), c(0.25, 0.0)],
            ])
            .unwrap(),
        )
        .unwrap();
        let g = Hermitian::new(
            CMatrix::from_rows(&[
                vec![c(1.0, 0.0), c(0.1, -0.2), c(0.3, 0.6)],
                vec![c(0.1, 0.2), c(2.0, 0.0), c(-0.7, 0.05)],
                vec![c(0.3, -0.6), c(-0.7, -0.05), c(0.5, 0.0)],
            ])
            .unwrap(),
        )
        .unwrap();
        let v = HVar { block: 0, dim: 3 };
        let f = v.trace_functional(&cm);
        let x = embed(g.matrix());
        assert!((f.dot(&x) - cm.inner(&g)).abs() < 1e-14);
        for part in parts(3) {
            let s = SparseSym {
                entries: part.functional(3, 1.0),
            };
            assert!((s.dot(&x) - part.of(&g)).abs() < 1e-14);
        }
    }
}
