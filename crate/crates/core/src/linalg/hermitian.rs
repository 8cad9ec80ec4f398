use std::ops::Deref;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::eigen::{embed, hermitian_eigen};
use super::matrix::{c, gram_schmidt, CMatrix, RMatrix, C64};
use crate::error::{Error, Result};

/// Absolute per-entry tolerance for Hermitian symmetry.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Elementwise tolerance for projector idempotence and rank.
pub const PROJECTOR_TOL: f64 = 1e-10;

/// Square complex matrix equal to its conjugate transpose.
#[derive(Clone, PartialEq)]
pub struct Hermitian(CMatrix);

/// Result of [`Hermitian::eig`]: eigenvalues in descending order with
/// matching orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
}

impl Eigen {
    /// `Σ f(λ_k) |v_k><v_k|`
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Hermitian {
        let d = self.vectors.first().map_or(0, |v| v.len());
        let mut m = CMatrix::zeros(d, d);
        for (lam, v) in self.values.iter().zip(&self.vectors) {
            let w = f(*lam);
            if w == 0.0 {
                continue;
            }
            m += &CMatrix::outer(v, v).scale_real(w);
        }
        Hermitian::symmetrized(m)
    }
}

impl Hermitian {
    /// Validates squareness and Hermitian symmetry within [`HERMITIAN_TOL`].
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::validation(format!(
                "matrix is {}x{}, expected square",
                m.rows(),
                m.cols()
            )));
        }
        let defect = m.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::validation(format!(
                "matrix is not Hermitian (defect {defect:.3e})"
            )));
        }
        Ok(Self::symmetrized(m))
    }

    /// Takes the Hermitian part `(M + M†)/2` without validation.
    pub fn symmetrized(m: CMatrix) -> Self {
        assert!(m.is_square());
        let n = m.rows();
        let s = CMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()));
        Hermitian(s)
    }

    pub fn zeros(d: usize) -> Self {
        Hermitian(CMatrix::zeros(d, d))
    }

    pub fn identity(d: usize) -> Self {
        Hermitian(CMatrix::identity(d))
    }

    pub fn diag(values: &[f64]) -> Self {
        Hermitian(CMatrix::diag_real(values))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(CMatrix::from_real_rows(rows)?)
    }

    /// Rank-one `|v><v|`.
    pub fn ket_bra(v: &[C64]) -> Self {
        Self::symmetrized(CMatrix::outer(v, v))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace_re(&self) -> f64 {
        self.0.trace().re
    }

    pub fn add(&self, other: &Hermitian) -> Hermitian {
        Hermitian(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Hermitian) -> Hermitian {
        Hermitian(&self.0 - &other.0)
    }

    pub fn scale(&self, s: f64) -> Hermitian {
        Hermitian(self.0.scale_real(s))
    }

    /// `U H U†`
    pub fn conjugate_by(&self, u: &CMatrix) -> Hermitian {
        Hermitian::symmetrized(u.matmul(&self.0).matmul(&u.dagger()))
    }

    /// `V† H V` for a `dim x n` matrix `V` (compression onto the span of its columns).
    pub fn compress(&self, v: &CMatrix) -> Hermitian {
        Hermitian::symmetrized(v.dagger().matmul(&self.0).matmul(v))
    }

    pub fn transpose(&self) -> Hermitian {
        Hermitian(self.0.transpose())
    }

    pub fn kron(&self, other: &Hermitian) -> Hermitian {
        Hermitian(self.0.kron(&other.0))
    }

    /// `Re tr(self · other)`
    pub fn inner(&self, other: &Hermitian) -> f64 {
        self.0.real_inner(&other.0)
    }

    pub fn eig(&self) -> Eigen {
        let (values, vectors) = hermitian_eigen(&self.0);
        Eigen { values, vectors }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eig().values.last().expect("non-empty matrix")
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eig().values[0]
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// Real symmetric matrix of dimension `2·dim` with the same spectrum, each
    /// eigenvalue doubled.
    pub fn real_embedding(&self) -> RMatrix {
        embed(&self.0)
    }

    /// Moore-Penrose inverse square root: eigenvalues below `cutoff` are
    /// treated as zero. Also returns the orthonormal support basis (columns,
    /// eigenvalues descending).
    pub fn pinv_sqrt(&self, cutoff: f64) -> (Hermitian, CMatrix) {
        let e = self.eig();
        let support: Vec<Vec<C64>> = e
            .values
            .iter()
            .zip(&e.vectors)
            .filter(|(l, _)| **l > cutoff)
            .map(|(_, v)| v.clone())
            .collect();
        let m = e.map(|l| if l > cutoff { 1.0 / l.sqrt() } else { 0.0 });
        let basis = if support.is_empty() {
            CMatrix::zeros(self.dim(), 0)
        } else {
            CMatrix::from_columns(&support).expect("equal length eigenvectors")
        };
        (m, basis)
    }

    pub fn max_abs_diff(&self, other: &Hermitian) -> f64 {
        self.0.max_abs_diff(&other.0)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.0.max_abs() < tol
    }
}

impl Deref for Hermitian {
    type Target = CMatrix;
    fn deref(&self) -> &CMatrix {
        &self.0
    }
}

impl std::fmt::Debug for Hermitian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Hermitian({:?})", self.0)
    }
}

impl Serialize for Hermitian {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Hermitian {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = CMatrix::deserialize(d)?;
        Hermitian::new(m).map_err(serde::de::Error::custom)
    }
}

/// Orthogonal projector of rank `rank` on a `dim`-dimensional space, stored
/// together with an orthonormal basis of its range.
#[derive(Clone, Debug)]
pub struct Projector {
    matrix: Hermitian,
    basis: CMatrix,
}

impl Projector {
    /// Projector onto the span of linearly independent vectors.
    pub fn from_span(vectors: &[Vec<C64>]) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::validation("projector needs at least one vector"));
        }
        let onb = gram_schmidt(vectors, 1e-10)
            .ok_or_else(|| Error::validation("spanning vectors are linearly dependent"))?;
        Self::from_orthonormal(onb)
    }

    /// Projector from vectors that are already orthonormal within [`PROJECTOR_TOL`].
    pub fn from_orthonormal(onb: Vec<Vec<C64>>) -> Result<Self> {
        if onb.is_empty() {
            return Err(Error::validation("projector needs at least one vector"));
        }
        let d = onb[0].len();
        for (i, u) in onb.iter().enumerate() {
            if u.len() != d {
                return Err(Error::validation("basis vectors of unequal length"));
            }
            for (j, v) in onb.iter().enumerate().skip(i) {
                let g = super::matrix::inner(u, v);
                let target = if i == j { 1.0 } else { 0.0 };
                if (g - c(target, 0.0)).norm() > PROJECTOR_TOL {
                    return Err(Error::validation("projector basis is not orthonormal"));
                }
            }
        }
        if onb.len() > d {
            return Err(Error::validation("more basis vectors than the dimension"));
        }
        let mut m = CMatrix::zeros(d, d);
        for v in &onb {
            m += &CMatrix::outer(v, v);
        }
        let basis = CMatrix::from_columns(&onb)?;
        Ok(Projector {
            matrix: Hermitian::symmetrized(m),
            basis,
        })
    }

    /// Validates an arbitrary Hermitian matrix as a projector and extracts a
    /// basis of its range.
    pub fn from_hermitian(h: Hermitian) -> Result<Self> {
        let sq = Hermitian::symmetrized(h.matmul(&h));
        if sq.max_abs_diff(&h) > PROJECTOR_TOL {
            return Err(Error::validation("matrix is not idempotent"));
        }
        let e = h.eig();
        let range: Vec<Vec<C64>> = e
            .values
            .iter()
            .zip(&e.vectors)
            .filter(|(l, _)| **l > 0.5)
            .map(|(_, v)| v.clone())
            .collect();
        if range.is_empty() {
            return Err(Error::validation("rank-0 projector"));
        }
        let p = Self::from_orthonormal(range)?;
        if (p.matrix.trace_re() - h.trace_re()).abs() > PROJECTOR_TOL {
            return Err(Error::validation("projector trace is not an integer rank"));
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    pub fn matrix(&self) -> &Hermitian {
        &self.matrix
    }

    /// `dim x rank` matrix with orthonormal columns spanning the range.
    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// Largest entry of `P² - P` and `|tr P - rank|`.
    pub fn defect(&self) -> (f64, f64) {
        let sq = self.matrix.matmul(&self.matrix);
        (
            sq.max_abs_diff(&self.matrix),
            (self.matrix.trace_re() - self.rank() as f64).abs(),
        )
    }
}

impl Serialize for Projector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Projector", 3)?;
        st.serialize_field("dim", &self.dim())?;
        st.serialize_field("rank", &self.rank())?;
        st.serialize_field("matrix", &self.matrix)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0)],
        ])
        .unwrap();
        assert!(Hermitian::new(m).is_err());
        assert!(Hermitian::new(CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn eig_identity() {
        let e = Hermitian::identity(3).eig();
        assert_eq!(e.values.len(), 3);
        for v in e.values {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn eig_of_diagonal() {
        let e = Hermitian::diag(&[2.0, -1.0]).eig();
        assert!((e.values[0] - 2.0).abs() < 1e-15);
        assert!((e.values[1] + 1.0).abs() < 1e-15);
        assert!((e.vectors[0][0].norm() - 1.0).abs() < 1e-14);
        assert!((e.vectors[1][1].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pinv_sqrt_on_rank_deficient() {
        let h = Hermitian::diag(&[4.0, 0.0, 1.0]);
        let (m, basis) = h.pinv_sqrt(1e-10);
        assert_eq!(basis.cols(), 2);
        assert!(m.max_abs_diff(&Hermitian::diag(&[0.5, 0.0, 1.0])) < 1e-14);
    }

    #[test]
    fn projector_from_span() {
        let p = Projector::from_span(&[
            vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)],
        ])
        .unwrap();
        let (idem, tr) = p.defect();
        assert!(idem < 1e-14 && tr < 1e-14);
        assert_eq!(p.rank(), 2);
        assert!(Projector::from_hermitian(p.matrix().clone()).is_ok());
        assert!(Projector::from_hermitian(Hermitian::diag(&[0.5, 1.0])).is_err());
    }
}
