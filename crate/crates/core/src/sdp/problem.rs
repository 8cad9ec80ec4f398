use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::RMatrix;

/// Symmetric matrix stored by its upper-triangle entries `(row, col, value)`
/// with `row <= col`; an off-diagonal entry stands for both `(r, c)` and `(c, r)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseSym {
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseSym {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `v` at `(r, c)` and its mirror image.
    pub fn push(&mut self, r: usize, c: usize, v: f64) {
        let (r, c) = if r <= c { (r, c) } else { (c, r) };
        self.entries.push((r, c, v));
    }

    pub fn from_dense(m: &RMatrix, tol: f64) -> Self {
        let mut s = Self::new();
        for r in 0..m.rows() {
            for c in r..m.cols() {
                let v = if r == c {
                    m[(r, c)]
                } else {
                    0.5 * (m[(r, c)] + m[(c, r)])
                };
                if v.abs() > tol {
                    s.entries.push((r, c, v));
                }
            }
        }
        s
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Frobenius inner product with a (not necessarily symmetric) dense matrix.
    #[inline]
    pub fn dot(&self, x: &RMatrix) -> f64 {
        let n = x.cols();
        let d = x.data();
        let mut acc = 0.0;
        for &(r, c, v) in &self.entries {
            if r == c {
                acc += v * d[r * n + r];
            } else {
                acc += v * (d[r * n + c] + d[c * n + r]);
            }
        }
        acc
    }

    /// `out += s * self` on a dense matrix.
    pub fn add_to(&self, s: f64, out: &mut RMatrix) {
        let n = out.cols();
        let d = out.data_mut();
        for &(r, c, v) in &self.entries {
            d[r * n + c] += s * v;
            if r != c {
                d[c * n + r] += s * v;
            }
        }
    }

    pub fn to_dense(&self, n: usize) -> RMatrix {
        let mut m = RMatrix::zeros(n, n);
        self.add_to(1.0, &mut m);
        m
    }

    pub fn trace(&self) -> f64 {
        self.entries
            .iter()
            .filter(|(r, c, _)| r == c)
            .map(|(_, _, v)| v)
            .sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(r, c, v)| if r == c { v * v } else { 2.0 * v * v })
            .sum()
    }
}

/// Whether the objective is maximised or minimised.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// One affine equality: `Σ_k <A_k, X_k> + Σ_j a_j s_j = rhs`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Constraint {
    pub blocks: Vec<(usize, SparseSym)>,
    pub scalars: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// Dense block-diagonal SDP over real symmetric PSD blocks plus free scalar
/// variables:
///
/// ```text
/// opt  Σ_k <C_k, X_k> + c·s
/// s.t. Σ_k <A_ik, X_k> + a_i·s = b_i,   X_k ⪰ 0,  s free.
/// ```
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SdpProblem {
    pub block_dims: Vec<usize>,
    pub n_scalars: usize,
    pub objective_blocks: Vec<(usize, SparseSym)>,
    pub objective_scalars: Vec<(usize, f64)>,
    pub constraints: Vec<Constraint>,
    pub sense: Sense,
}

impl SdpProblem {
    pub fn new(sense: Sense) -> Self {
        SdpProblem {
            block_dims: Vec::new(),
            n_scalars: 0,
            objective_blocks: Vec::new(),
            objective_scalars: Vec::new(),
            constraints: Vec::new(),
            sense,
        }
    }

    pub fn add_block(&mut self, dim: usize) -> usize {
        self.block_dims.push(dim);
        self.block_dims.len() - 1
    }

    pub fn add_scalar(&mut self) -> usize {
        self.n_scalars += 1;
        self.n_scalars - 1
    }

    /// Checks index ranges, triangle ordering and finiteness of all data.
    pub fn validate(&self) -> Result<()> {
        if self.block_dims.contains(&0) {
            return Err(Error::validation("SDP block of dimension zero"));
        }
        let check_sym = |k: usize, s: &SparseSym| -> Result<()> {
            let n = *self
                .block_dims
                .get(k)
                .ok_or_else(|| Error::validation(format!("block index {k} out of range")))?;
            for &(r, c, v) in &s.entries {
                if r > c || c >= n {
                    return Err(Error::validation(format!(
                        "entry ({r},{c}) invalid for block {k} of dimension {n}"
                    )));
                }
                if !v.is_finite() {
                    return Err(Error::validation("non-finite coefficient"));
                }
            }
            Ok(())
        };
        for (k, s) in &self.objective_blocks {
            check_sym(*k, s)?;
        }
        for &(j, v) in &self.objective_scalars {
            if j >= self.n_scalars || !v.is_finite() {
                return Err(Error::validation("invalid scalar objective term"));
            }
        }
        for (i, con) in self.constraints.iter().enumerate() {
            if !con.rhs.is_finite() {
                return Err(Error::validation(format!(
                    "constraint {i} has non-finite rhs"
                )));
            }
            for (k, s) in &con.blocks {
                check_sym(*k, s)?;
            }
            for &(j, v) in &con.scalars {
                if j >= self.n_scalars || !v.is_finite() {
                    return Err(Error::validation(format!(
                        "constraint {i} has an invalid scalar term"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Objective value at a point.
    pub fn objective_at(&self, blocks: &[RMatrix], scalars: &[f64]) -> f64 {
        let mut v: f64 = self
            .objective_blocks
            .iter()
            .map(|(k, s)| s.dot(&blocks[*k]))
            .sum();
        v += self
            .objective_scalars
            .iter()
            .map(|&(j, a)| a * scalars[j])
            .sum::<f64>();
        v
    }

    /// Largest absolute constraint violation at a point.
    pub fn residual_at(&self, blocks: &[RMatrix], scalars: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|con| {
                let lhs: f64 = con
                    .blocks
                    .iter()
                    .map(|(k, s)| s.dot(&blocks[*k]))
                    .sum::<f64>()
                    + con
                        .scalars
                        .iter()
                        .map(|&(j, a)| a * scalars[j])
                        .sum::<f64>();
                (lhs - con.rhs).abs()
            })
            .fold(0.0, f64::max)
    }
}
