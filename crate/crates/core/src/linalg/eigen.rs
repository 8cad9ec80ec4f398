//! Cyclic Jacobi eigensolver for real symmetric matrices, and the Hermitian
//! eigendecomposition built on top of it through the real embedding
//! `A + iB -> [[A, -B], [B, A]]`.

use super::matrix::{c, inner, CMatrix, RMatrix, C64};

const MAX_SWEEPS: usize = 100;

/// Eigenpairs of a real symmetric matrix, eigenvalues in descending order.
/// Eigenvectors are the columns of the returned matrix.
pub fn jacobi_symmetric(a: &RMatrix) -> (Vec<f64>, RMatrix) {
    let n = a.rows();
    assert_eq!(n, a.cols(), "jacobi needs a square matrix");
    let mut m = a.clone();
    m.symmetrize();
    let mut v = RMatrix::identity(n);
    if n == 1 {
        return (vec![m[(0, 0)]], v);
    }
    let scale = m.frobenius_norm();
    if scale == 0.0 {
        return (vec![0.0; n], v);
    }
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                // skip entries already negligible relative to both diagonal entries
                if apq.abs() < 1e-18 * (app.abs() + aqq.abs()) {
                    m[(p, q)] = 0.0;
                    m[(q, p)] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.is_infinite() {
                    0.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                let tau = sn / (1.0 + cs);
                let h = t * apq;
                m[(p, p)] = app - h;
                m[(q, q)] = aqq + h;
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let g = m[(r, p)];
                    let hh = m[(r, q)];
                    let new_rp = g - sn * (hh + g * tau);
                    let new_rq = hh + sn * (g - hh * tau);
                    m[(r, p)] = new_rp;
                    m[(p, r)] = new_rp;
                    m[(r, q)] = new_rq;
                    m[(q, r)] = new_rq;
                }
                for r in 0..n {
                    let g = v[(r, p)];
                    let hh = v[(r, q)];
                    v[(r, p)] = g - sn * (hh + g * tau);
                    v[(r, q)] = hh + sn * (g - hh * tau);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[(j, j)]
            .partial_cmp(&m[(i, i)])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = RMatrix::from_fn(n, n, |r, k| v[(r, order[k])]);
    (values, vectors)
}

/// Smallest eigenvalue of a real symmetric matrix.
pub fn min_eigenvalue_symmetric(a: &RMatrix) -> f64 {
    if a.rows() == 1 {
        return a[(0, 0)];
    }
    let (vals, _) = jacobi_symmetric(a);
    *vals.last().unwrap()
}

/// `[[Re H, -Im H], [Im H, Re H]]` for a square complex matrix.
pub fn embed(h: &CMatrix) -> RMatrix {
    let d = h.rows();
    RMatrix::from_fn(2 * d, 2 * d, |i, j| {
        let z = h[(i % d, j % d)];
        match (i < d, j < d) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Inverse of the embedding on structured input; for a general symmetric `X`
/// returns the compression `((X11 + X22) + i (X21 - X12)) / 2`, which maps
/// PSD matrices to PSD matrices.
pub fn unembed(x: &RMatrix) -> CMatrix {
    let d = x.rows() / 2;
    CMatrix::from_fn(d, d, |i, j| {
        c(
            0.5 * (x[(i, j)] + x[(i + d, j + d)]),
            0.5 * (x[(i + d, j)] - x[(i, j + d)]),
        )
    })
}

/// Eigenvalues (descending) and orthonormal eigenvectors of a Hermitian matrix.
///
/// Each eigenvalue of `H` appears twice in the embedding; the complex
/// eigenvectors are recovered from the real ones by pivoted Gram-Schmidt
/// inside each eigenvalue cluster.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, Vec<Vec<C64>>) {
    let d = h.rows();
    let (vals, vecs) = jacobi_symmetric(&embed(h));
    let scale = vals.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let cluster_tol = 1e-9 * scale;
    let candidates: Vec<Vec<C64>> = (0..2 * d)
        .map(|k| (0..d).map(|i| c(vecs[(i, k)], vecs[(i + d, k)])).collect())
        .collect();
    let mut used = vec![false; 2 * d];
    let mut out_vals = Vec::with_capacity(d);
    let mut out_vecs: Vec<Vec<C64>> = Vec::with_capacity(d);
    let mut next = 0;
    while out_vecs.len() < d {
        while next < 2 * d && used[next] {
            next += 1;
        }
        if next >= 2 * d {
            break;
        }
        let lead = vals[next];
        // Candidate pool: the unused members of the current cluster.
        let pool: Vec<usize> = (next..2 * d)
            .filter(|&k| !used[k] && (vals[k] - lead).abs() <= cluster_tol)
            .collect();
        let mut best: Option<(usize, Vec<C64>, f64)> = None;
        for &k in &pool {
            let mut w = candidates[k].clone();
            for q in &out_vecs {
                let p = inner(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= p * qi;
                }
            }
            let nrm = super::matrix::norm(&w);
            if best.as_ref().is_none_or(|b| nrm > b.2) {
                best = Some((k, w, nrm));
            }
        }
        let (k, w, nrm) = best.expect("non-empty cluster");
        used[k] = true;
        if nrm < 0.3 {
            // The whole remaining cluster is spanned already.
            for &k in &pool {
                used[k] = true;
            }
            continue;
        }
        let w: Vec<C64> = w.iter().map(|z| z / nrm).collect();
        let hw = h.mul_vec(&w);
        out_vals.push(inner(&w, &hw).re);
        out_vecs.push(w);
    }
    // Rayleigh quotients may perturb the ordering inside a cluster.
    let mut order: Vec<usize> = (0..out_vals.len()).collect();
    order.sort_by(|&i, &j| {
        out_vals[j]
            .partial_cmp(&out_vals[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    (
        order.iter().map(|&i| out_vals[i]).collect(),
        order.iter().map(|&i| out_vecs[i].clone()).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonal_input() {
        let a = RMatrix::from_vec(2, 2, vec![-1.0, 0.0, 0.0, 2.0]);
        let (vals, vecs) = jacobi_symmetric(&a);
        assert_eq!(vals, vec![2.0, -1.0]);
        assert_eq!(vecs[(1, 0)].abs(), 1.0);
    }

    #[test]
    fn jacobi_reconstructs() {
        let a = RMatrix::from_vec(3, 3, vec![2.0, -1.0, 0.3, -1.0, 2.0, -1.0, 0.3, -1.0, 2.0]);
        let (vals, v) = jacobi_symmetric(&a);
        for i in 0..3 {
            for j in 0..3 {
                let r: f64 = (0..3).map(|k| vals[k] * v[(i, k)] * v[(j, k)]).sum();
                assert!((r - a[(i, j)]).abs() < 1e-13);
            }
        }
        assert!(vals[0] >= vals[1] && vals[1] >= vals[2]);
    }

    #[test]
    fn unembed_inverts_embed() {
        let h = CMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(0.5, -0.25)],
            vec![c(0.5, 0.25), c(-2.0, 0.0)],
        ])
        .unwrap();
        assert!(unembed(&embed(&h)).max_abs_diff(&h) < 1e-15);
    }
}
