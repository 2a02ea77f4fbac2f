//! Dense complex linear algebra used throughout the crate.
//!
//! Every operator is a [`ComplexMatrix`] (a dense `nalgebra` matrix of
//! `Complex64`). Rank decisions go through singular values with the cutoff
//! `abs_tol + rel_tol * sigma_max` of a [`Tolerance`].
//!
//! SVDs and Hermitian eigendecompositions are computed by `faer`; the
//! complex SVD shipped with `nalgebra` returns wrong factors for some
//! rank-deficient inputs.

use faer::{MatRef, Side};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Shorthand for a complex scalar.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Absolute/relative tolerance pair.
///
/// A residual `r` measured against a reference operator of spectral norm
/// `n` passes iff `r <= abs_tol + rel_tol * n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
        }
    }
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Result<Self> {
        let ok = abs_tol.is_finite()
            && rel_tol.is_finite()
            && abs_tol >= 0.0
            && rel_tol >= 0.0
            && (abs_tol > 0.0 || rel_tol > 0.0);
        if !ok {
            return Err(Error::InvalidTolerance {
                abs: abs_tol,
                rel: rel_tol,
            });
        }
        Ok(Tolerance { abs_tol, rel_tol })
    }

    #[inline]
    pub fn threshold(&self, reference_norm: f64) -> f64 {
        self.abs_tol + self.rel_tol * reference_norm
    }

    #[inline]
    pub fn accepts(&self, residual: f64, reference_norm: f64) -> bool {
        residual <= self.threshold(reference_norm)
    }

    /// Same tolerance scaled by `factor` on both components.
    pub fn scaled(&self, factor: f64) -> Self {
        Tolerance {
            abs_tol: self.abs_tol * factor,
            rel_tol: self.rel_tol * factor,
        }
    }
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(rows, cols)
}

/// Kronecker product `a ⊗ b` (first factor is the most significant index).
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

fn to_faer(m: &ComplexMatrix) -> faer::Mat<Complex64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: MatRef<'_, Complex64>) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Thin SVD `m = U·diag(σ)·Vᴴ` with `σ` descending; `U` is `rows × r`, `V`
/// is `cols × r` with `r = min(rows, cols)`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    /// `U·Vᴴ`, the unitary polar factor when `m` is square and invertible.
    pub fn polar_unitary(&self) -> ComplexMatrix {
        &self.u * self.v.adjoint()
    }
}

pub fn svd(m: &ComplexMatrix) -> Result<Svd> {
    let (rows, cols) = m.shape();
    if m.is_empty() {
        return Ok(Svd {
            u: zeros(rows, 0),
            singular_values: Vec::new(),
            v: zeros(cols, 0),
        });
    }
    ensure_finite(m)?;
    let f = to_faer(m)
        .thin_svd()
        .map_err(|e| Error::Precondition(format!("SVD did not converge: {e:?}")))?;
    let sigma = f.S().column_vector();
    let r = sigma.nrows();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| sigma[b].re.total_cmp(&sigma[a].re));
    let (fu, fv) = (from_faer(f.U()), from_faer(f.V()));
    let mut u = zeros(rows, r);
    let mut v = zeros(cols, r);
    for (dst, &src) in order.iter().enumerate() {
        u.set_column(dst, &fu.column(src));
        v.set_column(dst, &fv.column(src));
    }
    Ok(Svd {
        u,
        singular_values: order.iter().map(|&i| sigma[i].re).collect(),
        v,
    })
}

/// Largest singular value; zero for empty matrices and NaN if the input is
/// not finite, so tolerance comparisons fail.
pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).first().cloned().unwrap_or(0.0)
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    if ensure_finite(m).is_err() {
        return vec![f64::NAN];
    }
    match to_faer(m).singular_values() {
        Ok(mut values) => {
            values.sort_by(|a, b| b.total_cmp(a));
            values
        }
        Err(_) => vec![f64::NAN],
    }
}

/// Integer power of a square matrix, `p >= 0`.
pub fn matrix_power(a: &ComplexMatrix, p: usize) -> ComplexMatrix {
    let mut acc = identity(a.nrows());
    for _ in 0..p {
        acc = &acc * a;
    }
    acc
}

pub fn ensure_finite(m: &ComplexMatrix) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

pub fn ensure_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: "square matrix".into(),
            found: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    Ok(m.nrows())
}

pub fn ensure_dim(m: &ComplexMatrix, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("{n}x{n}"),
            found: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    Ok(())
}

/// `max(‖P² − P‖₂, ‖P − Pᴴ‖₂)`.
pub fn projection_residual(p: &ComplexMatrix) -> f64 {
    let idem = spectral_norm(&(p * p - p));
    let herm = spectral_norm(&(p - p.adjoint()));
    idem.max(herm)
}

/// Validates that `p` is an orthogonal projection; `index` labels the error.
pub fn check_projection(p: &ComplexMatrix, index: usize, tol: &Tolerance) -> Result<()> {
    ensure_square(p)?;
    ensure_finite(p)?;
    let residual = projection_residual(p);
    if !tol.accepts(residual, 1.0) {
        return Err(Error::NotProjection { index, residual });
    }
    Ok(())
}

/// Rank of a projection, read off its trace.
pub fn projection_rank(p: &ComplexMatrix) -> usize {
    trace(p).re.round().max(0.0) as usize
}

/// `‖UᴴU − I‖₂`.
pub fn unitarity_residual(u: &ComplexMatrix) -> f64 {
    let n = u.ncols();
    spectral_norm(&(u.adjoint() * u - identity(n)))
}

pub fn check_unitary(u: &ComplexMatrix, tol: &Tolerance) -> Result<()> {
    ensure_square(u)?;
    ensure_finite(u)?;
    let residual = unitarity_residual(u);
    if !tol.accepts(residual, 1.0) {
        return Err(Error::NotUnitary { residual });
    }
    Ok(())
}

/// Eigen-decomposition of a Hermitian matrix (only the Hermitian part is
/// used). Eigenvalues ascending, eigenvectors as matching columns.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = m.nrows();
    let h = (m + m.adjoint()).scale(0.5);
    let eig = match to_faer(&h).self_adjoint_eigen(Side::Lower) {
        Ok(eig) => eig,
        Err(_) => return (vec![f64::NAN; n], zeros(n, n)),
    };
    let values = eig.S().column_vector();
    let vectors = from_faer(eig.U());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].re.total_cmp(&values[b].re));
    let mut sorted = zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted.set_column(dst, &vectors.column(src));
    }
    (order.iter().map(|&i| values[i].re).collect(), sorted)
}

/// Embeds a rectangular matrix in the top-left corner of a square zero matrix.
pub fn zero_pad_square(v: &ComplexMatrix) -> ComplexMatrix {
    let n = v.nrows().max(v.ncols());
    let mut out = zeros(n, n);
    out.view_mut((0, 0), (v.nrows(), v.ncols())).copy_from(v);
    out
}

/// A subspace held as a matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: ComplexMatrix,
}

impl Subspace {
    /// Wraps `basis` after checking `basisᴴ·basis = I`.
    pub fn from_orthonormal(basis: ComplexMatrix, tol: &Tolerance) -> Result<Self> {
        ensure_finite(&basis)?;
        let k = basis.ncols();
        if k == 0 || k > basis.nrows() {
            return Err(Error::DimensionMismatch {
                expected: "1 <= k <= ambient_dim".into(),
                found: format!("{}x{}", basis.nrows(), k),
            });
        }
        let residual = spectral_norm(&(basis.adjoint() * &basis - identity(k)));
        if !tol.accepts(residual, 1.0) {
            return Err(Error::Precondition(format!(
                "basis columns are not orthonormal (residual {residual:.3e})"
            )));
        }
        Ok(Subspace { basis })
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn into_basis(self) -> ComplexMatrix {
        self.basis
    }

    pub fn projection(&self) -> ComplexMatrix {
        projection_from_subspace(self)
    }
}

/// Orthonormal basis of the column space of `m`.
///
/// Columns are the left singular vectors whose singular values exceed
/// `abs_tol + rel_tol * sigma_max`, in descending singular-value order.
pub fn orthonormal_basis(m: &ComplexMatrix, tol: &Tolerance) -> Result<Subspace> {
    ensure_finite(m)?;
    if m.is_empty() {
        return Err(Error::ZeroMatrix);
    }
    let svd = svd(m)?;
    let u = svd.u;
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = tol.threshold(sigma_max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > cutoff)
        .collect();
    if keep.is_empty() {
        return Err(Error::ZeroMatrix);
    }
    let mut basis = zeros(m.nrows(), keep.len());
    for (dst, &src) in keep.iter().enumerate() {
        basis.set_column(dst, &u.column(src));
    }
    Ok(Subspace { basis })
}

/// `P = B·Bᴴ` for the basis `B` of `s`.
pub fn projection_from_subspace(s: &Subspace) -> ComplexMatrix {
    &s.basis * s.basis.adjoint()
}

/// Projection onto the column space of `m`; the zero matrix if `m`
/// vanishes within tolerance.
pub fn range_projection(m: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    match orthonormal_basis(m, tol) {
        Ok(s) => Ok(projection_from_subspace(&s)),
        Err(Error::ZeroMatrix) => Ok(zeros(m.nrows(), m.nrows())),
        Err(e) => Err(e),
    }
}

/// `A = V·|A|` with `V` truncated to the numerical rank of `A`.
#[derive(Debug, Clone)]
pub struct PolarFactors {
    pub isometry: ComplexMatrix,
    pub positive_part: ComplexMatrix,
    pub rank: usize,
}

pub fn polar_decompose(a: &ComplexMatrix, tol: &Tolerance) -> Result<PolarFactors> {
    ensure_finite(a)?;
    let (m, n) = a.shape();
    if a.is_empty() {
        return Ok(PolarFactors {
            isometry: zeros(m, n),
            positive_part: zeros(n, n),
            rank: 0,
        });
    }
    let svd = svd(a)?;
    let (u, v) = (&svd.u, &svd.v);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = tol.threshold(sigma_max);

    let mut isometry = zeros(m, n);
    let mut positive_part = zeros(n, n);
    let mut rank = 0;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff {
            continue;
        }
        rank += 1;
        let ui = u.column(i);
        let vi = v.column(i);
        isometry += ui * vi.adjoint();
        positive_part += (vi * vi.adjoint()).scale(s);
    }
    Ok(PolarFactors {
        isometry,
        positive_part,
        rank,
    })
}

#[derive(Debug, Clone)]
pub struct PartialIsometryCheck {
    pub verdict: bool,
    pub initial: ComplexMatrix,
    pub final_: ComplexMatrix,
    pub residual: f64,
}

/// Checks whether `vᴴv` is idempotent. `v` must be square; pad rectangular
/// inputs with [`zero_pad_square`] first.
pub fn is_partial_isometry(v: &ComplexMatrix, tol: &Tolerance) -> Result<PartialIsometryCheck> {
    ensure_square(v)?;
    ensure_finite(v)?;
    let initial = v.adjoint() * v;
    let final_ = v * v.adjoint();
    let residual = spectral_norm(&(&initial * &initial - &initial));
    let verdict = tol.accepts(residual, spectral_norm(&initial));
    Ok(PartialIsometryCheck {
        verdict,
        initial,
        final_,
        residual,
    })
}

/// Extends a partial isometry `b` living on `range(p_c)` to the unitary
/// `b + (I − p_c)`.
pub fn extend_to_unitary(
    b: &ComplexMatrix,
    p_c: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<ComplexMatrix> {
    let n = ensure_square(p_c)?;
    ensure_dim(b, n)?;
    let initial = spectral_norm(&(b.adjoint() * b - p_c));
    let final_ = spectral_norm(&(b * b.adjoint() - p_c));
    let residual = initial.max(final_);
    if !tol.accepts(residual, 1.0) {
        return Err(Error::NotCompatible { residual });
    }
    Ok(b + identity(n) - p_c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, eps: f64) -> bool {
        a.shape() == b.shape() && spectral_norm(&(a - b)) <= eps
    }

    fn real(rows: usize, cols: usize, data: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_row_iterator(rows, cols, data.iter().map(|&x| c64(x, 0.0)))
    }

    #[test]
    fn tolerance_rejects_degenerate() {
        assert!(Tolerance::new(0.0, 0.0).is_err());
        assert!(Tolerance::new(-1.0, 1e-3).is_err());
        assert!(Tolerance::new(0.0, 1e-3).is_ok());
        let t = Tolerance::new(1e-3, 1e-2).unwrap();
        assert!(t.accepts(0.021, 2.0));
        assert!(!t.accepts(0.022, 2.0));
    }

    #[test]
    fn basis_of_identity() {
        let s = orthonormal_basis(&identity(3), &tol()).unwrap();
        assert_eq!(s.dim(), 3);
        assert!(close(&projection_from_subspace(&s), &identity(3), 1e-14));
    }

    #[test]
    fn basis_of_unnormalized_vector() {
        let v = real(2, 1, &[1.0, 1.0]);
        let s = orthonormal_basis(&v, &tol()).unwrap();
        assert_eq!(s.dim(), 1);
        let b = s.basis();
        // the phase of the basis vector is free; compare the projector instead
        let expected = real(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        assert!(close(&(b * b.adjoint()), &expected, 1e-14));
        assert!((b[(0, 0)].norm() - FRAC_1_SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn basis_of_zero_is_error() {
        assert_eq!(
            orthonormal_basis(&zeros(3, 2), &tol()).unwrap_err(),
            Error::ZeroMatrix
        );
    }

    #[test]
    fn rank_cut_drops_tiny_directions() {
        let m = real(3, 2, &[1.0, 0.0, 0.0, 1e-13, 0.0, 0.0]);
        assert_eq!(orthonormal_basis(&m, &tol()).unwrap().dim(), 1);
    }

    #[test]
    fn projection_examples() {
        let e1 = real(2, 1, &[1.0, 0.0]);
        let s = Subspace::from_orthonormal(e1, &tol()).unwrap();
        assert_eq!(projection_from_subspace(&s), real(2, 2, &[1.0, 0.0, 0.0, 0.0]));

        let plus = real(2, 1, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        let s = Subspace::from_orthonormal(plus, &tol()).unwrap();
        assert!(close(
            &projection_from_subspace(&s),
            &real(2, 2, &[0.5, 0.5, 0.5, 0.5]),
            1e-15
        ));
    }

    #[test]
    fn non_orthonormal_basis_rejected() {
        let b = real(2, 1, &[1.0, 1.0]);
        assert!(Subspace::from_orthonormal(b, &tol()).is_err());
    }

    #[test]
    fn polar_of_rank_deficient_diagonal() {
        let a = real(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        let f = polar_decompose(&a, &tol()).unwrap();
        assert_eq!(f.rank, 1);
        assert!(close(&f.isometry, &real(2, 2, &[1.0, 0.0, 0.0, 0.0]), 1e-14));
        assert!(close(&f.positive_part, &a, 1e-14));
    }

    #[test]
    fn polar_of_unitary_is_itself() {
        let h = real(2, 2, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2]);
        let f = polar_decompose(&h, &tol()).unwrap();
        assert!(close(&f.isometry, &h, 1e-14));
        assert!(close(&f.positive_part, &identity(2), 1e-14));
    }

    #[test]
    fn polar_of_zero() {
        let f = polar_decompose(&zeros(3, 3), &tol()).unwrap();
        assert_eq!(f.rank, 0);
        assert_eq!(f.isometry, zeros(3, 3));
        assert_eq!(f.positive_part, zeros(3, 3));
    }

    #[test]
    fn polar_of_rectangular() {
        let a = ComplexMatrix::from_fn(4, 2, |i, j| c64(i as f64 + 1.0, j as f64 - 0.5));
        let f = polar_decompose(&a, &tol()).unwrap();
        assert_eq!(f.isometry.shape(), (4, 2));
        assert!(close(&(&f.isometry * &f.positive_part), &a, 1e-12));
    }

    #[test]
    fn partial_isometry_examples() {
        let v = real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let r = is_partial_isometry(&v, &tol()).unwrap();
        assert!(r.verdict);
        assert_eq!(r.initial, real(2, 2, &[0.0, 0.0, 0.0, 1.0]));
        assert_eq!(r.final_, real(2, 2, &[1.0, 0.0, 0.0, 0.0]));

        let half = identity(2).scale(0.5);
        assert!(!is_partial_isometry(&half, &tol()).unwrap().verdict);
        assert!(is_partial_isometry(&zeros(2, 3), &tol()).is_err());
    }

    #[test]
    fn zero_padding_makes_square() {
        let v = real(1, 2, &[1.0, 0.0]);
        let p = zero_pad_square(&v);
        assert_eq!(p.shape(), (2, 2));
        assert!(is_partial_isometry(&p, &tol()).unwrap().verdict);
    }

    #[test]
    fn extend_examples() {
        let p = real(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        let u = extend_to_unitary(&p, &p, &tol()).unwrap();
        assert!(close(&u, &identity(3), 1e-15));

        let u = extend_to_unitary(&(-&p), &p, &tol()).unwrap();
        assert!(close(&u, &(identity(3) - p.scale(2.0)), 1e-15));

        let bad = real(3, 3, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            extend_to_unitary(&bad, &p, &tol()),
            Err(Error::NotCompatible { .. })
        ));
    }

    #[test]
    fn hermitian_eigen_sorted() {
        let m = real(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let (vals, vecs) = hermitian_eigen(&m);
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        let recon = &vecs * ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            2,
            vals.iter().map(|&x| c64(x, 0.0)),
        )) * vecs.adjoint();
        assert!(close(&recon, &m, 1e-13));
    }

    #[test]
    fn non_finite_rejected() {
        let mut m = identity(2);
        m[(1, 0)] = c64(f64::NAN, 0.0);
        assert_eq!(ensure_finite(&m), Err(Error::NonFinite { row: 1, col: 0 }));
    }
}
