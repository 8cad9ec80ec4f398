//! Infeasible-start primal-dual interior point method with the HKM search
//! direction and Mehrotra predictor-corrector steps.

use serde::{Deserialize, Serialize};

use super::problem::{SdpProblem, Sense, SparseSym};
use crate::error::Result;
use crate::linalg::{cholesky_solve, min_eigenvalue_symmetric, RMatrix};

/// Terminal state of a solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    /// `max_iters` reached before the tolerances were met.
    IterationLimit,
    NumericalFailure,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SdpOptions {
    /// Relative duality gap at which a point is accepted.
    pub gap_tol: f64,
    /// Relative primal and dual residual at which a point is accepted.
    pub residual_tol: f64,
    /// Tolerance used by callers for feasibility decisions.
    pub feas_tol: f64,
    pub max_iters: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions {
            gap_tol: 1e-8,
            residual_tol: 1e-8,
            feas_tol: 1e-7,
            max_iters: 200,
        }
    }
}

/// Solver output. Objective values are reported in the problem's own sense.
/// `dual_vars` are the multipliers of the minimisation form
/// (`Z_k = C_k - Σ_i y_i A_ik`, with `C` negated for maximisation problems);
/// constraints removed as linearly dependent get multiplier zero.
#[derive(Clone, Debug, Serialize)]
pub struct SdpSolution {
    pub status: Status,
    pub primal_value: f64,
    pub dual_value: f64,
    pub primal_blocks: Vec<RMatrix>,
    pub dual_blocks: Vec<RMatrix>,
    pub scalars: Vec<f64>,
    pub dual_vars: Vec<f64>,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub relative_gap: f64,
    pub iterations: usize,
    pub removed_constraints: usize,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    /// Converts a non-optimal outcome into [`crate::Error::Solver`].
    pub fn into_optimal(self) -> Result<SdpSolution> {
        if self.is_optimal() {
            Ok(self)
        } else {
            Err(crate::Error::Solver {
                status: self.status,
                iterations: self.iterations,
                detail: format!(
                    "primal residual {:.2e}, dual residual {:.2e}, gap {:.2e}",
                    self.primal_residual, self.dual_residual, self.relative_gap
                ),
            })
        }
    }
}

/// Problem in minimisation form after presolve.
struct Model {
    dims: Vec<usize>,
    c: Vec<RMatrix>,
    cf: Vec<f64>,
    by_block: Vec<Vec<(usize, SparseSym)>>,
    f_rows: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    original_row: Vec<usize>,
}

impl Model {
    fn m(&self) -> usize {
        self.b.len()
    }

    fn nf(&self) -> usize {
        self.cf.len()
    }

    fn a_op(&self, mats: &[RMatrix]) -> Vec<f64> {
        let mut out = vec![0.0; self.m()];
        for (k, rows) in self.by_block.iter().enumerate() {
            for (i, s) in rows {
                out[*i] += s.dot(&mats[k]);
            }
        }
        out
    }

    fn at_op(&self, y: &[f64]) -> Vec<RMatrix> {
        self.dims
            .iter()
            .zip(&self.by_block)
            .map(|(&n, rows)| {
                let mut m = RMatrix::zeros(n, n);
                for (i, s) in rows {
                    if y[*i] != 0.0 {
                        s.add_to(y[*i], &mut m);
                    }
                }
                m
            })
            .collect()
    }

    fn f_op(&self, xf: &[f64]) -> Vec<f64> {
        self.f_rows
            .iter()
            .map(|row| row.iter().map(|&(j, a)| a * xf[j]).sum())
            .collect()
    }

    fn ft_op(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.nf()];
        for (i, row) in self.f_rows.iter().enumerate() {
            for &(j, a) in row {
                out[j] += a * y[i];
            }
        }
        out
    }
}

enum Presolved {
    Model(Model),
    Inconsistent,
}

fn presolve(p: &SdpProblem) -> Presolved {
    let sign = match p.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let nb = p.block_dims.len();
    let mut c: Vec<RMatrix> = p.block_dims.iter().map(|&n| RMatrix::zeros(n, n)).collect();
    for (k, s) in &p.objective_blocks {
        s.add_to(sign, &mut c[*k]);
    }
    let mut cf = vec![0.0; p.n_scalars];
    for &(j, v) in &p.objective_scalars {
        cf[j] += sign * v;
    }

    let m0 = p.constraints.len();
    // Merge duplicate block references inside a constraint.
    let rows: Vec<Vec<(usize, SparseSym)>> = p
        .constraints
        .iter()
        .map(|con| {
            let mut merged: Vec<(usize, SparseSym)> = Vec::new();
            for (k, s) in &con.blocks {
                if let Some(e) = merged.iter_mut().find(|(kk, _)| kk == k) {
                    e.1.entries.extend_from_slice(&s.entries);
                } else {
                    merged.push((*k, s.clone()));
                }
            }
            merged
        })
        .collect();
    let frows: Vec<Vec<(usize, f64)>> = p.constraints.iter().map(|c| c.scalars.clone()).collect();

    // Gram matrix of the constraint functionals.
    let mut gram = vec![0.0; m0 * m0];
    let mut touching: Vec<Vec<(usize, &SparseSym)>> = vec![Vec::new(); nb];
    for (i, r) in rows.iter().enumerate() {
        for (k, s) in r {
            touching[*k].push((i, s));
        }
    }
    for (k, list) in touching.iter().enumerate() {
        let n = p.block_dims[k];
        for &(j, sj) in list {
            let dj = sj.to_dense(n);
            for &(i, si) in list {
                if i <= j {
                    gram[i * m0 + j] += si.dot(&dj);
                }
            }
        }
    }
    let mut fdense = vec![vec![0.0; p.n_scalars]; m0];
    for (i, r) in frows.iter().enumerate() {
        for &(j, a) in r {
            fdense[i][j] += a;
        }
    }
    for i in 0..m0 {
        for j in i..m0 {
            let s: f64 = fdense[i].iter().zip(&fdense[j]).map(|(a, b)| a * b).sum();
            gram[i * m0 + j] += s;
            gram[j * m0 + i] = gram[i * m0 + j];
        }
    }

    // Pivoted Cholesky selects a maximal well-conditioned independent subset.
    let max_diag = (0..m0).map(|i| gram[i * m0 + i]).fold(0.0, f64::max);
    let tol = 1e-12 * max_diag.max(1e-300);
    let mut resid: Vec<f64> = (0..m0).map(|i| gram[i * m0 + i]).collect();
    let mut chosen = vec![false; m0];
    let mut kept: Vec<usize> = Vec::new();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    loop {
        let mut best = None;
        let mut best_val = tol;
        for i in 0..m0 {
            if !chosen[i] && resid[i] > best_val {
                best_val = resid[i];
                best = Some(i);
            }
        }
        let Some(piv) = best else { break };
        let d = resid[piv].sqrt();
        let mut col = vec![0.0; m0];
        for i in 0..m0 {
            if chosen[i] || i == piv {
                continue;
            }
            let mut s = gram[piv * m0 + i];
            for l in &cols {
                s -= l[piv] * l[i];
            }
            col[i] = s / d;
            resid[i] -= col[i] * col[i];
        }
        col[piv] = d;
        chosen[piv] = true;
        kept.push(piv);
        cols.push(col);
    }
    // Dependent rows must be consistent with the kept ones.
    let r = kept.len();
    let mut z = vec![0.0; r];
    for q in 0..r {
        let mut s = p.constraints[kept[q]].rhs;
        for t in 0..q {
            s -= cols[t][kept[q]] * z[t];
        }
        z[q] = s / cols[q][kept[q]];
    }
    let bscale = p
        .constraints
        .iter()
        .map(|c| c.rhs.abs())
        .fold(1.0, f64::max);
    for i in 0..m0 {
        if chosen[i] {
            continue;
        }
        let pred: f64 = (0..r).map(|q| cols[q][i] * z[q]).sum();
        if (pred - p.constraints[i].rhs).abs() > 1e-7 * bscale {
            return Presolved::Inconsistent;
        }
    }
    kept.sort_unstable();

    let mut by_block: Vec<Vec<(usize, SparseSym)>> = vec![Vec::new(); nb];
    let mut f_rows = Vec::with_capacity(kept.len());
    let mut b = Vec::with_capacity(kept.len());
    for (new_i, &old_i) in kept.iter().enumerate() {
        for (k, s) in &rows[old_i] {
            by_block[*k].push((new_i, s.clone()));
        }
        f_rows.push(frows[old_i].clone());
        b.push(p.constraints[old_i].rhs);
    }
    Presolved::Model(Model {
        dims: p.block_dims.clone(),
        c,
        cf,
        by_block,
        f_rows,
        b,
        original_row: kept,
    })
}

struct Iterate {
    x: Vec<RMatrix>,
    z: Vec<RMatrix>,
    y: Vec<f64>,
    xf: Vec<f64>,
}

struct Direction {
    dx: Vec<RMatrix>,
    dz: Vec<RMatrix>,
    dy: Vec<f64>,
    dxf: Vec<f64>,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn mats_inf_norm(v: &[RMatrix]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.max_abs()))
}

/// `Σ v (e_r e_c^T + e_c e_r^T)` sandwiched as `zinv * A * x` into `w`.
fn sandwich(s: &SparseSym, zinv: &RMatrix, x: &RMatrix, w: &mut RMatrix) {
    let n = x.rows();
    let zd = zinv.data();
    let xd = x.data();
    let wd = w.data_mut();
    wd.iter_mut().for_each(|v| *v = 0.0);
    for &(r, c, v) in &s.entries {
        let pairs: &[(usize, usize)] = if r == c {
            &[(r, c)][..]
        } else {
            &[(r, c), (c, r)][..]
        };
        for &(p, q) in pairs {
            let xrow = &xd[q * n..(q + 1) * n];
            for a in 0..n {
                let za = zd[a * n + p] * v;
                if za == 0.0 {
                    continue;
                }
                let wrow = &mut wd[a * n..(a + 1) * n];
                for (wv, xv) in wrow.iter_mut().zip(xrow) {
                    *wv += za * xv;
                }
            }
        }
    }
}

/// Largest step `α` with `X + α dX ⪰ 0`, given `L^{-1}` for `X = L L^T`.
fn max_step(linv: &RMatrix, dx: &RMatrix) -> f64 {
    let n = dx.rows();
    if n == 1 {
        let l = linv[(0, 0)];
        let s = l * l * dx[(0, 0)];
        return if s >= 0.0 { f64::INFINITY } else { -1.0 / s };
    }
    let mut s = linv.matmul(dx).matmul(&linv.transpose());
    s.symmetrize();
    let lmin = min_eigenvalue_symmetric(&s);
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

/// Dense solve with partial pivoting; `None` on singular input.
fn lu_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-14 * scale.max(1e-300) {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for cc in col..n {
                    a[r][cc] -= f * a[col][cc];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|cc| a[r][cc] * x[cc]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

const REFINEMENT_STEPS: usize = 2;

struct Ipm<'a> {
    model: &'a Model,
}

struct Factors {
    zinv: Vec<RMatrix>,
    lx_inv: Vec<RMatrix>,
    lz_inv: Vec<RMatrix>,
    m_chol: RMatrix,
    /// `S = F^T M^{-1} F` and `M^{-1} F` when there are free variables.
    minv_f: Vec<Vec<f64>>,
    schur_f: Vec<Vec<f64>>,
}

impl<'a> Ipm<'a> {
    fn initial_point(&self) -> Iterate {
        let md = self.model;
        let mut x = Vec::new();
        let mut z = Vec::new();
        for (k, &n) in md.dims.iter().enumerate() {
            let nf = n as f64;
            let mut xi = 10.0_f64.max(nf.sqrt());
            let mut eta = 10.0_f64.max(nf.sqrt()).max(md.c[k].frobenius_norm());
            for (i, s) in &md.by_block[k] {
                let na = s.frobenius_sq().sqrt();
                xi = xi.max(nf * (1.0 + md.b[*i].abs()) / (1.0 + na));
                eta = eta.max(na);
            }
            x.push(RMatrix::scaled_identity(n, xi));
            z.push(RMatrix::scaled_identity(n, eta));
        }
        Iterate {
            x,
            z,
            y: vec![0.0; md.m()],
            xf: vec![0.0; md.nf()],
        }
    }

    fn factor(&self, it: &Iterate) -> Option<Factors> {
        let md = self.model;
        let m = md.m();
        let mut zinv = Vec::with_capacity(md.dims.len());
        let mut lx_inv = Vec::with_capacity(md.dims.len());
        let mut lz_inv = Vec::with_capacity(md.dims.len());
        let mut schur = RMatrix::zeros(m, m);
        for (k, &n) in md.dims.iter().enumerate() {
            let lx = it.x[k].cholesky()?.lower_inverse();
            let lz = it.z[k].cholesky()?.lower_inverse();
            let zi = lz.transpose().matmul(&lz);
            let mut w = RMatrix::zeros(n, n);
            let rows = &md.by_block[k];
            for (j, sj) in rows {
                sandwich(sj, &zi, &it.x[k], &mut w);
                for (i, si) in rows {
                    let v = si.dot(&w);
                    schur[(*i, *j)] += v;
                }
            }
            zinv.push(zi);
            lx_inv.push(lx);
            lz_inv.push(lz);
        }
        schur.symmetrize();
        let max_diag = (0..m).map(|i| schur[(i, i)]).fold(0.0, f64::max);
        let mut m_chol = schur.cholesky();
        let mut delta = 1e-14 * max_diag.max(1e-300);
        let mut tries = 0;
        while m_chol.is_none() && tries < 6 {
            let mut reg = schur.clone();
            for i in 0..m {
                reg[(i, i)] += delta;
            }
            m_chol = reg.cholesky();
            delta *= 100.0;
            tries += 1;
        }
        let m_chol = if m == 0 {
            RMatrix::zeros(0, 0)
        } else {
            m_chol?
        };
        let nf = md.nf();
        let mut minv_f = Vec::with_capacity(nf);
        for j in 0..nf {
            let col: Vec<f64> = md
                .f_rows
                .iter()
                .map(|r| r.iter().filter(|(jj, _)| *jj == j).map(|(_, a)| a).sum())
                .collect();
            minv_f.push(if m == 0 {
                col
            } else {
                cholesky_solve(&m_chol, &col)
            });
        }
        let mut schur_f = vec![vec![0.0; nf]; nf];
        for a in 0..nf {
            let fta = md.ft_op(&minv_f[a]);
            for b in 0..nf {
                schur_f[b][a] = fta[b];
            }
        }
        Some(Factors {
            zinv,
            lx_inv,
            lz_inv,
            m_chol,
            minv_f,
            schur_f,
        })
    }

    /// Solves `M dy + F dxf = h`, `F^T dy = rf` with the factored `M`.
    fn schur_solve(&self, fac: &Factors, h: &[f64], rf: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
        let md = self.model;
        let minv_h = if md.m() == 0 {
            h.to_vec()
        } else {
            cholesky_solve(&fac.m_chol, h)
        };
        let nf = md.nf();
        let dxf = if nf > 0 {
            let ft = md.ft_op(&minv_h);
            let rhs: Vec<f64> = ft.iter().zip(rf).map(|(a, b)| a - b).collect();
            lu_solve(fac.schur_f.clone(), rhs)?
        } else {
            Vec::new()
        };
        let mut dy = minv_h;
        for (j, col) in fac.minv_f.iter().enumerate() {
            for (d, cval) in dy.iter_mut().zip(col) {
                *d -= dxf[j] * cval;
            }
        }
        Some((dy, dxf))
    }

    /// `M v = A(Z^{-1} A^T(v) X)`.
    fn schur_apply(&self, it: &Iterate, fac: &Factors, v: &[f64]) -> Vec<f64> {
        let md = self.model;
        let atv = md.at_op(v);
        let w: Vec<RMatrix> = (0..md.dims.len())
            .map(|k| fac.zinv[k].matmul(&atv[k]).matmul(&it.x[k]))
            .collect();
        md.a_op(&w)
    }

    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        it: &Iterate,
        fac: &Factors,
        rp: &[f64],
        rd: &[RMatrix],
        rf: &[f64],
        sigma_mu: f64,
        corr: Option<&Direction>,
    ) -> Option<Direction> {
        let md = self.model;
        // R0 = σμ Z^{-1} - X - Z^{-1} Rd X - Z^{-1} dZa dXa
        let r0: Vec<RMatrix> = (0..md.dims.len())
            .map(|k| {
                let zi = &fac.zinv[k];
                let mut r = zi.scale(sigma_mu);
                r.axpy(-1.0, &it.x[k]);
                let t = zi.matmul(&rd[k]).matmul(&it.x[k]);
                r.axpy(-1.0, &t);
                if let Some(cd) = corr {
                    let t2 = zi.matmul(&cd.dz[k]).matmul(&cd.dx[k]);
                    r.axpy(-1.0, &t2);
                }
                r
            })
            .collect();
        let ar0 = md.a_op(&r0);
        let h: Vec<f64> = rp.iter().zip(&ar0).map(|(a, b)| a - b).collect();
        let (mut dy, mut dxf) = self.schur_solve(fac, &h, rf)?;
        // Iterative refinement against the unfactored operator.
        for _ in 0..REFINEMENT_STEPS {
            if md.m() == 0 {
                break;
            }
            let mdy = self.schur_apply(it, fac, &dy);
            let fdxf = md.f_op(&dxf);
            let e1: Vec<f64> = (0..md.m()).map(|i| h[i] - mdy[i] - fdxf[i]).collect();
            let ftdy = md.ft_op(&dy);
            let e2: Vec<f64> = rf.iter().zip(&ftdy).map(|(a, b)| a - b).collect();
            let (cy, cf) = self.schur_solve(fac, &e1, &e2)?;
            dy.iter_mut().zip(&cy).for_each(|(a, b)| *a += b);
            dxf.iter_mut().zip(&cf).for_each(|(a, b)| *a += b);
        }
        let aty = md.at_op(&dy);
        let mut dz = Vec::with_capacity(md.dims.len());
        let mut dx = Vec::with_capacity(md.dims.len());
        for k in 0..md.dims.len() {
            let mut dzk = rd[k].clone();
            dzk.axpy(-1.0, &aty[k]);
            dzk.symmetrize();
            let mut dxk = r0[k].clone();
            let t = fac.zinv[k].matmul(&aty[k]).matmul(&it.x[k]);
            dxk.axpy(1.0, &t);
            dxk.symmetrize();
            dz.push(dzk);
            dx.push(dxk);
        }
        if dy.iter().chain(&dxf).any(|v| !v.is_finite()) {
            return None;
        }
        Some(Direction { dx, dz, dy, dxf })
    }

    fn step_lengths(&self, fac: &Factors, d: &Direction) -> (f64, f64) {
        let mut ap = f64::INFINITY;
        let mut ad = f64::INFINITY;
        for k in 0..self.model.dims.len() {
            ap = ap.min(max_step(&fac.lx_inv[k], &d.dx[k]));
            ad = ad.min(max_step(&fac.lz_inv[k], &d.dz[k]));
        }
        (ap, ad)
    }
}

struct Measures {
    pobj: f64,
    dobj: f64,
    pinf: f64,
    dinf: f64,
    gap: f64,
    mu: f64,
}

/// Solves an SDP. Structural problems in the input are reported as errors;
/// every solver outcome, including infeasibility, is returned in the status.
pub fn solve(problem: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution> {
    problem.validate()?;
    let sign = match problem.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let m0 = problem.constraints.len();
    let model = match presolve(problem) {
        Presolved::Model(m) => m,
        Presolved::Inconsistent => {
            return Ok(SdpSolution {
                status: Status::PrimalInfeasible,
                primal_value: f64::NAN,
                dual_value: f64::NAN,
                primal_blocks: problem
                    .block_dims
                    .iter()
                    .map(|&n| RMatrix::zeros(n, n))
                    .collect(),
                dual_blocks: problem
                    .block_dims
                    .iter()
                    .map(|&n| RMatrix::zeros(n, n))
                    .collect(),
                scalars: vec![0.0; problem.n_scalars],
                dual_vars: vec![0.0; m0],
                primal_residual: f64::INFINITY,
                dual_residual: f64::NAN,
                relative_gap: f64::NAN,
                iterations: 0,
                removed_constraints: 0,
            })
        }
    };
    let ipm = Ipm { model: &model };
    let md = &model;
    let ntot: f64 = md.dims.iter().map(|&n| n as f64).sum();
    let bnorm = 1.0 + inf_norm(&md.b);
    let cnorm = 1.0 + mats_inf_norm(&md.c).max(inf_norm(&md.cf));

    let mut it = ipm.initial_point();
    let mut status = Status::NumericalFailure;
    let mut best: Option<(f64, Iterate, usize)> = None;
    let mut since_best = 0;
    let mut iters = 0;

    let measures = |it: &Iterate| -> (Measures, Vec<f64>, Vec<RMatrix>, Vec<f64>) {
        let ax = md.a_op(&it.x);
        let fx = md.f_op(&it.xf);
        let rp: Vec<f64> = (0..md.m()).map(|i| md.b[i] - ax[i] - fx[i]).collect();
        let aty = md.at_op(&it.y);
        let rd: Vec<RMatrix> = (0..md.dims.len())
            .map(|k| {
                let mut r = md.c[k].clone();
                r.axpy(-1.0, &aty[k]);
                r.axpy(-1.0, &it.z[k]);
                r
            })
            .collect();
        let fty = md.ft_op(&it.y);
        let rf: Vec<f64> = md.cf.iter().zip(&fty).map(|(a, b)| a - b).collect();
        let pobj: f64 = (0..md.dims.len())
            .map(|k| md.c[k].dot(&it.x[k]))
            .sum::<f64>()
            + md.cf.iter().zip(&it.xf).map(|(a, b)| a * b).sum::<f64>();
        let dobj: f64 = md.b.iter().zip(&it.y).map(|(a, b)| a * b).sum();
        let xz: f64 = (0..md.dims.len()).map(|k| it.x[k].dot(&it.z[k])).sum();
        let mu = xz / ntot.max(1.0);
        let gap = (pobj - dobj).abs().max(xz.abs()) / (1.0 + pobj.abs() + dobj.abs());
        let pinf = inf_norm(&rp) / bnorm;
        let dinf = mats_inf_norm(&rd).max(inf_norm(&rf)) / cnorm;
        (
            Measures {
                pobj,
                dobj,
                pinf,
                dinf,
                gap,
                mu,
            },
            rp,
            rd,
            rf,
        )
    };

    loop {
        let (ms, rp, rd, rf) = measures(&it);
        log::trace!(
            "iter {iters}: pobj {:.10e} dobj {:.10e} pinf {:.2e} dinf {:.2e} gap {:.2e}",
            ms.pobj,
            ms.dobj,
            ms.pinf,
            ms.dinf,
            ms.gap
        );
        if !(ms.pobj.is_finite() && ms.dobj.is_finite() && ms.mu.is_finite()) {
            break;
        }
        if ms.pinf <= opts.residual_tol && ms.dinf <= opts.residual_tol && ms.gap <= opts.gap_tol {
            status = Status::Optimal;
            break;
        }
        // Infeasibility certificates along a diverging trajectory.
        let c_minus_rd = {
            let mut v = 0.0_f64;
            for k in 0..md.dims.len() {
                let mut t = md.c[k].clone();
                t.axpy(-1.0, &rd[k]);
                v = v.max(t.max_abs());
            }
            let fr: Vec<f64> = md.cf.iter().zip(&rf).map(|(a, b)| a - b).collect();
            v.max(inf_norm(&fr))
        };
        if ms.dobj > 1e-8 && c_minus_rd / ms.dobj < 1e-8 {
            status = Status::PrimalInfeasible;
            break;
        }
        let b_minus_rp: Vec<f64> = md.b.iter().zip(&rp).map(|(a, b)| a - b).collect();
        if ms.pobj < -1e-8 && inf_norm(&b_minus_rp) / (-ms.pobj) < 1e-8 {
            status = Status::DualInfeasible;
            break;
        }
        let merit = ms.pinf.max(ms.dinf).max(ms.gap);
        if best.as_ref().is_none_or(|b| merit < 0.5 * b.0) {
            best = Some((
                merit,
                Iterate {
                    x: it.x.clone(),
                    z: it.z.clone(),
                    y: it.y.clone(),
                    xf: it.xf.clone(),
                },
                iters,
            ));
            since_best = 0;
        } else {
            since_best += 1;
        }
        if iters >= opts.max_iters {
            status = Status::IterationLimit;
            break;
        }
        if since_best > 30 {
            break;
        }
        iters += 1;

        let Some(fac) = ipm.factor(&it) else { break };
        // Predictor.
        let Some(pred) = ipm.direction(&it, &fac, &rp, &rd, &rf, 0.0, None) else {
            break;
        };
        let (ap, ad) = ipm.step_lengths(&fac, &pred);
        let ap_a = ap.min(1.0);
        let ad_a = ad.min(1.0);
        let mut xz_aff = 0.0;
        for k in 0..md.dims.len() {
            let mut xa = it.x[k].clone();
            xa.axpy(ap_a, &pred.dx[k]);
            let mut za = it.z[k].clone();
            za.axpy(ad_a, &pred.dz[k]);
            xz_aff += xa.dot(&za);
        }
        let mu_aff = xz_aff / ntot.max(1.0);
        let expon = if ms.mu > 1e-6 {
            (3.0 * ap_a.min(ad_a).powi(2)).max(1.0)
        } else {
            3.0
        };
        let sigma = (mu_aff / ms.mu).max(0.0).powf(expon).min(1.0);
        // Corrector.
        let Some(dir) = ipm.direction(&it, &fac, &rp, &rd, &rf, sigma * ms.mu, Some(&pred)) else {
            break;
        };
        let (ap, ad) = ipm.step_lengths(&fac, &dir);
        let gamma = 0.9 + 0.09 * ap_a.min(ad_a);
        let ap = (gamma * ap).min(1.0);
        let ad = (gamma * ad).min(1.0);
        if ap < 1e-12 && ad < 1e-12 {
            break;
        }
        for k in 0..md.dims.len() {
            it.x[k].axpy(ap, &dir.dx[k]);
            it.z[k].axpy(ad, &dir.dz[k]);
            it.x[k].symmetrize();
            it.z[k].symmetrize();
        }
        for (v, d) in it.y.iter_mut().zip(&dir.dy) {
            *v += ad * d;
        }
        for (v, d) in it.xf.iter_mut().zip(&dir.dxf) {
            *v += ap * d;
        }
    }

    if matches!(status, Status::NumericalFailure | Status::IterationLimit) {
        if let Some((_, b, _)) = best {
            it = b;
        }
    }
    let (ms, _, _, _) = measures(&it);
    let mut dual_vars = vec![0.0; m0];
    for (i, &orig) in md.original_row.iter().enumerate() {
        dual_vars[orig] = it.y[i];
    }
    let primal_residual = problem.residual_at(&it.x, &it.xf);
    Ok(SdpSolution {
        status,
        primal_value: sign * ms.pobj,
        dual_value: sign * ms.dobj,
        primal_blocks: it.x,
        dual_blocks: it.z,
        scalars: it.xf,
        dual_vars,
        primal_residual,
        dual_residual: ms.dinf * cnorm,
        relative_gap: ms.gap,
        iterations: iters,
        removed_constraints: m0 - md.m(),
    })
}
