//! Knill–Laflamme conditions, classic and generalized.
//!
//! The classic conditions ask that every sandwich `P_C AᵢᴴAⱼ P_C` be a
//! scalar multiple of the code projection `P_C`. The generalized conditions
//! allow a unitary factor that commutes with `P_C`:
//!
//! ```text
//! P_C AᵢᴴAⱼ P_C = λᵢⱼ Uᵢⱼ P_C = λᵢⱼ P_C Uᵢⱼ
//! ```
//!
//! and hold exactly when the ranges of the `Aᵢ P_C` form an isoclinic
//! family (for operators that are scaled partial isometries on the code).
//!
//! Gauge: the factorization `λ·U` is not unique. Witnesses produced here
//! always carry a real non-negative `λᵢⱼ` with the phase folded into
//! `Uᵢⱼ`, `Uᵢᵢ = I`, and `Uᵢⱼ` equal to the identity on the orthogonal
//! complement of the code.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::{all_pairs, map_indices, upper_pairs, Execution};
use crate::isoclinic::{isoclinic_family_check, FamilyReport};
use crate::linalg::{
    c64, check_projection, extend_to_unitary, hermitian_eigen, identity, orthonormal_basis,
    polar_decompose, projection_rank, range_projection, spectral_norm, svd,
    trace, zeros, ComplexMatrix, Tolerance,
};

/// A validated code projection together with an orthonormal basis of its range.
#[derive(Debug, Clone)]
pub(crate) struct CodeSpace {
    pub projection: ComplexMatrix,
    pub basis: ComplexMatrix,
}

impl CodeSpace {
    pub fn new(p_c: &ComplexMatrix, tol: &Tolerance) -> Result<Self> {
        check_projection(p_c, 0, tol)?;
        let basis = orthonormal_basis(p_c, tol)
            .map_err(|_| Error::Precondition("code projection is zero".into()))?
            .into_basis();
        if basis.ncols() != projection_rank(p_c) {
            return Err(Error::Precondition(
                "code projection trace disagrees with its numerical rank".into(),
            ));
        }
        Ok(CodeSpace {
            projection: p_c.clone(),
            basis,
        })
    }

    pub fn dim(&self) -> usize {
        self.projection.nrows()
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    /// `Eᴴ M E` for the code basis `E`.
    pub fn restrict(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.basis.adjoint() * m * &self.basis
    }

    /// `E R Eᴴ`, the inverse of [`CodeSpace::restrict`] on code operators.
    pub fn embed(&self, r: &ComplexMatrix) -> ComplexMatrix {
        &self.basis * r * self.basis.adjoint()
    }

    fn check_ops(&self, ops: &[ComplexMatrix]) -> Result<()> {
        let n = self.dim();
        for (index, a) in ops.iter().enumerate() {
            if a.nrows() != n || a.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: format!("{n}x{n}"),
                    found: format!("{}x{} (operator {index})", a.nrows(), a.ncols()),
                });
            }
            crate::linalg::ensure_finite(a)?;
        }
        Ok(())
    }
}

/// Scalars, commuting unitaries and residuals certifying the generalized
/// conditions for a family of operators on a code.
#[derive(Debug, Clone)]
pub struct KlWitness {
    pub n: usize,
    pub lambdas: DMatrix<Complex64>,
    /// Row-major `n × n` table; use [`KlWitness::unitary`].
    pub unitaries: Vec<ComplexMatrix>,
    pub residuals: DMatrix<f64>,
    pub code_projection: ComplexMatrix,
}

impl KlWitness {
    pub fn unitary(&self, i: usize, j: usize) -> &ComplexMatrix {
        &self.unitaries[i * self.n + j]
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }

    /// Recomputes `‖P_C AᵢᴴAⱼ P_C − λᵢⱼ Uᵢⱼ P_C‖₂` from scratch.
    pub fn reverify(&self, ops: &[ComplexMatrix]) -> DMatrix<f64> {
        let p = &self.code_projection;
        DMatrix::from_fn(self.n, self.n, |i, j| {
            let m = p * ops[i].adjoint() * &ops[j] * p;
            let rhs = self.unitary(i, j) * p * self.lambdas[(i, j)];
            spectral_norm(&(m - rhs))
        })
    }

    /// `|γᵢⱼ|² = |λᵢⱼ|² / (λᵢᵢ λⱼⱼ)` (zero when a diagonal entry vanishes):
    /// the scalars in `PᵢPⱼPᵢ = |γᵢⱼ|² Pᵢ` for the range projections.
    pub fn predicted_overlaps(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| {
            let (lii, ljj) = (self.lambdas[(i, i)].re, self.lambdas[(j, j)].re);
            if lii == 0.0 || ljj == 0.0 {
                0.0
            } else {
                self.lambdas[(i, j)].norm_sqr() / (lii * ljj)
            }
        })
    }

    /// `min_c ‖(Uᵢⱼ − c·I)P_C‖` evaluated at the least-squares phase
    /// `c = tr(Uᵢⱼ P_C)/tr(P_C)`: how far `Uᵢⱼ` is from a scalar on the code.
    pub fn nontriviality(&self, i: usize, j: usize) -> f64 {
        let p = &self.code_projection;
        let up = self.unitary(i, j) * p;
        let c = trace(&up) / trace(p);
        spectral_norm(&(up - p * c))
    }
}

/// Outcome of the classic conditions.
#[derive(Debug, Clone)]
pub struct ClassicKl {
    pub lambdas: DMatrix<Complex64>,
    pub is_positive: bool,
    pub min_eigenvalue: f64,
    pub trace: Complex64,
    pub residual: f64,
}

fn code_images(ops: &[ComplexMatrix], code: &CodeSpace, exec: Execution) -> (Vec<ComplexMatrix>, Vec<f64>) {
    let images: Vec<ComplexMatrix> = map_indices(ops.len(), exec, |i| &ops[i] * &code.projection);
    let norms = map_indices(images.len(), exec, |i| spectral_norm(&images[i]));
    (images, norms)
}

/// Classic conditions `P_C EᵢᴴEⱼ P_C = λᵢⱼ P_C`.
///
/// Fails with [`Error::ConditionFailed`] naming the first pair (row-major)
/// whose sandwich is not a scalar multiple of `P_C`.
pub fn kl_classic_check(
    errors: &[ComplexMatrix],
    p_c: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<ClassicKl> {
    let code = CodeSpace::new(p_c, tol)?;
    code.check_ops(errors)?;
    let exec = Execution::default();
    let (images, norms) = code_images(errors, &code, exec);
    let n = errors.len();
    let pairs = all_pairs(n);
    let tr_p = trace(p_c);
    let results = map_indices(pairs.len(), exec, |idx| {
        let (i, j) = pairs[idx];
        let m = images[i].adjoint() * &images[j];
        let lambda = trace(&m) / tr_p;
        let residual = spectral_norm(&(m - p_c * lambda));
        (lambda, residual)
    });

    let mut lambdas = DMatrix::zeros(n, n);
    let mut worst: f64 = 0.0;
    for (&(i, j), &(lambda, residual)) in pairs.iter().zip(&results) {
        if !tol.accepts(residual, norms[i] * norms[j]) {
            return Err(Error::ConditionFailed { i, j, residual });
        }
        lambdas[(i, j)] = lambda;
        worst = worst.max(residual);
    }
    let (eigs, _) = hermitian_eigen(&lambdas);
    let min_eigenvalue = eigs.first().cloned().unwrap_or(0.0);
    Ok(ClassicKl {
        is_positive: min_eigenvalue >= -tol.abs_tol,
        min_eigenvalue,
        trace: trace(&lambdas),
        lambdas,
        residual: worst,
    })
}

struct PairWitness {
    lambda: f64,
    unitary: ComplexMatrix,
    residual: f64,
}

/// Decides whether `m = λ·U·P_C` with `U` unitary commuting with `P_C`.
///
/// The restriction of `m` to the code must have all singular values equal;
/// `λ` is their mean and `U` the polar unitary, extended by the identity.
/// On failure returns the offending spread or residual.
fn sandwich_witness(
    m: &ComplexMatrix,
    code: &CodeSpace,
    diagonal: bool,
    reference: f64,
    tol: &Tolerance,
) -> std::result::Result<PairWitness, f64> {
    let restricted = code.restrict(m);
    let svd = svd(&restricted).map_err(|_| f64::NAN)?;
    let sigma = &svd.singular_values;
    let (smax, smin) = (sigma[0], sigma[sigma.len() - 1]);
    let spread = smax - smin;
    let threshold = tol.threshold(reference);
    if spread > threshold {
        return Err(spread);
    }
    let lambda = sigma.iter().sum::<f64>() / sigma.len() as f64;
    let n = code.dim();
    let unitary = if lambda <= threshold || diagonal {
        identity(n)
    } else {
        let w = svd.polar_unitary();
        extend_to_unitary(&code.embed(&w), &code.projection, tol).map_err(|_| spread)?
    };
    let lambda = if lambda <= threshold { 0.0 } else { lambda };
    let residual = spectral_norm(&(m - &unitary * &code.projection * c64(lambda, 0.0)));
    if residual > threshold {
        return Err(residual);
    }
    Ok(PairWitness {
        lambda,
        unitary,
        residual,
    })
}

/// Generalized conditions `P_C AᵢᴴAⱼ P_C = λᵢⱼ Uᵢⱼ P_C`.
pub fn kl_general_check(
    ops: &[ComplexMatrix],
    p_c: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<KlWitness> {
    kl_general_check_with(ops, p_c, tol, Execution::default())
}

pub fn kl_general_check_with(
    ops: &[ComplexMatrix],
    p_c: &ComplexMatrix,
    tol: &Tolerance,
    exec: Execution,
) -> Result<KlWitness> {
    let code = CodeSpace::new(p_c, tol)?;
    code.check_ops(ops)?;
    let (images, norms) = code_images(ops, &code, exec);
    let n = ops.len();
    let pairs = all_pairs(n);
    let results = map_indices(pairs.len(), exec, |idx| {
        let (i, j) = pairs[idx];
        let m = images[i].adjoint() * &images[j];
        sandwich_witness(&m, &code, i == j, norms[i] * norms[j], tol)
    });

    let mut lambdas = DMatrix::zeros(n, n);
    let mut residuals = DMatrix::zeros(n, n);
    let mut unitaries = Vec::with_capacity(n * n);
    for (&(i, j), result) in pairs.iter().zip(results) {
        let w = result.map_err(|residual| Error::ConditionFailed { i, j, residual })?;
        lambdas[(i, j)] = c64(w.lambda, 0.0);
        residuals[(i, j)] = w.residual;
        unitaries.push(w.unitary);
    }
    // a vanishing diagonal scalar forces its whole row and column to vanish
    for i in 0..n {
        if lambdas[(i, i)].re == 0.0 {
            for j in 0..n {
                for (a, b) in [(i, j), (j, i)] {
                    if lambdas[(a, b)].norm() != 0.0 {
                        return Err(Error::ConditionFailed {
                            i: a,
                            j: b,
                            residual: lambdas[(a, b)].norm(),
                        });
                    }
                }
            }
        }
    }
    Ok(KlWitness {
        n,
        lambdas,
        unitaries,
        residuals,
        code_projection: p_c.clone(),
    })
}

/// Range projections of the operators `Aᵢ P_C`; the zero matrix for
/// operators that annihilate the code.
pub fn range_projections(
    ops: &[ComplexMatrix],
    p_c: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<Vec<ComplexMatrix>> {
    let code = CodeSpace::new(p_c, tol)?;
    code.check_ops(ops)?;
    ops.iter()
        .map(|a| range_projection(&(a * p_c), tol))
        .collect()
}

/// Partial isometries `Vᵢ` sharing the initial projection `P_C` (the anchor),
/// with final projections `Pᵢ`.
#[derive(Debug, Clone)]
pub struct AnchorFamily {
    pub anchor_index: usize,
    pub anchor_projection: ComplexMatrix,
    pub intertwiners: Vec<ComplexMatrix>,
    pub range_projections: Vec<ComplexMatrix>,
}

/// Builds intertwiners from the anchor `P_C = ps[anchor_index]` onto every `Pᵢ`.
///
/// `Vᵢ` is the polar isometry of `Pᵢ P_C` (for an isoclinic member this is
/// `Pᵢ P_C / √λ`). Whatever part of `range(P_C)` the polar isometry misses
/// (all of it for orthogonal members) is mapped onto the rest of
/// `range(Pᵢ)` through SVD bases.
pub fn intertwiners_from_family(
    ps: &[ComplexMatrix],
    anchor_index: usize,
    tol: &Tolerance,
) -> Result<AnchorFamily> {
    let anchor = ps.get(anchor_index).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "anchor index {anchor_index} out of range for {} projections",
            ps.len()
        ))
    })?;
    let n = anchor.nrows();
    let mut ranks = Vec::with_capacity(ps.len());
    for (index, p) in ps.iter().enumerate() {
        crate::linalg::ensure_dim(p, n)?;
        check_projection(p, index, tol)?;
        ranks.push(projection_rank(p));
    }
    let k = ranks[anchor_index];
    if let Some((index, &found)) = ranks.iter().enumerate().find(|(_, &r)| r != k) {
        return Err(Error::RankMismatch {
            index,
            expected: k,
            found,
        });
    }

    let mut intertwiners = Vec::with_capacity(ps.len());
    for (i, p) in ps.iter().enumerate() {
        if i == anchor_index {
            intertwiners.push(anchor.clone());
            continue;
        }
        let polar = polar_decompose(&(p * anchor), tol)?;
        let mut v = polar.isometry;
        if polar.rank < k {
            let missing_initial = anchor - v.adjoint() * &v;
            let missing_final = p - &v * v.adjoint();
            let e = projection_basis(&missing_initial, tol)?;
            let f = projection_basis(&missing_final, tol)?;
            if e.ncols() != f.ncols() {
                return Err(Error::Precondition(format!(
                    "cannot complete intertwiner {i}: complements have dimensions {} and {}",
                    e.ncols(),
                    f.ncols()
                )));
            }
            v += f * e.adjoint();
        }
        let residual = spectral_norm(&(v.adjoint() * &v - anchor))
            .max(spectral_norm(&(&v * v.adjoint() - p)));
        if !tol.scaled(10.0).accepts(residual, 1.0) {
            return Err(Error::Precondition(format!(
                "intertwiner {i} misses its initial/final projection (residual {residual:.3e})"
            )));
        }
        intertwiners.push(v);
    }
    Ok(AnchorFamily {
        anchor_index,
        anchor_projection: anchor.clone(),
        intertwiners,
        range_projections: ps.to_vec(),
    })
}

fn projection_basis(p: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    match orthonormal_basis(p, &tol.scaled(1e3)) {
        Ok(s) => Ok(s.into_basis()),
        Err(Error::ZeroMatrix) => Ok(zeros(p.nrows(), 0)),
        Err(e) => Err(e),
    }
}

/// Witness for an isoclinic family seen through its intertwiners:
/// `P_C VᵢᴴVⱼ P_C = γᵢⱼ Uᵢⱼ P_C` with `γᵢⱼ = √λᵢⱼ` and `λᵢⱼ` the scalar of
/// `PᵢPⱼPᵢ = λᵢⱼPᵢ`. Pairs with `γᵢⱼ = 0` get `Uᵢⱼ = I`.
pub fn witness_from_isoclinic(family: &AnchorFamily, tol: &Tolerance) -> Result<KlWitness> {
    let ps = &family.range_projections;
    let vs = &family.intertwiners;
    let p_c = &family.anchor_projection;
    let code = CodeSpace::new(p_c, tol)?;
    let n = ps.len();

    for (i, j) in upper_pairs(n) {
        let (pi, pj) = (&ps[i], &ps[j]);
        let lambda = trace(&(pi * pj)).re / trace(pi).re;
        let r1 = spectral_norm(&(pi * pj * pi - pi.scale(lambda)));
        let r2 = spectral_norm(&(pj * pi * pj - pj.scale(lambda)));
        let residual = r1.max(r2);
        if !tol.accepts(residual, 1.0) {
            return Err(Error::IsoclinicViolation { i, j, residual });
        }
    }

    let mut lambdas = DMatrix::zeros(n, n);
    let mut residuals = DMatrix::zeros(n, n);
    let mut unitaries = Vec::with_capacity(n * n);
    for (i, j) in all_pairs(n) {
        let overlap = trace(&(&ps[i] * &ps[j])).re / trace(&ps[i]).re;
        let gamma = overlap.max(0.0).sqrt();
        let sandwich = p_c * vs[i].adjoint() * &vs[j] * p_c;
        let unitary = if i == j || gamma <= tol.threshold(1.0) {
            identity(code.dim())
        } else {
            let b = &sandwich / c64(gamma, 0.0);
            extend_to_unitary(&b, p_c, &tol.scaled(1e3)).map_err(|e| match e {
                Error::NotCompatible { residual } => Error::IsoclinicViolation { i, j, residual },
                other => other,
            })?
        };
        let gamma = if gamma <= tol.threshold(1.0) { 0.0 } else { gamma };
        let residual = spectral_norm(&(&sandwich - &unitary * p_c * c64(gamma, 0.0)));
        lambdas[(i, j)] = c64(gamma, 0.0);
        residuals[(i, j)] = residual;
        unitaries.push(unitary);
    }
    Ok(KlWitness {
        n,
        lambdas,
        unitaries,
        residuals,
        code_projection: p_c.clone(),
    })
}

/// Both sides of the equivalence between the generalized conditions and
/// isoclinic ranges, evaluated on the same input.
#[derive(Debug, Clone)]
pub struct RoundTrip {
    pub kl_holds: bool,
    pub isoclinic_holds: bool,
    pub consistent: bool,
    pub witness: Option<KlWitness>,
    pub family: Option<FamilyReport>,
    /// Pair that broke the generalized conditions, when they fail.
    pub kl_failure: Option<(usize, usize, f64)>,
}

/// Runs [`kl_general_check`] and [`isoclinic_family_check`] on the range
/// projections of `Aᵢ P_C`.
///
/// Each `Aᵢ` must be a nonzero scalar multiple of a partial isometry whose
/// initial space contains the code, i.e. `AᵢᴴAᵢ` restricted to the code is
/// a positive scalar; otherwise [`Error::NotScaledIsometry`].
pub fn kl_isoclinic_roundtrip(
    ops: &[ComplexMatrix],
    p_c: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<RoundTrip> {
    let code = CodeSpace::new(p_c, tol)?;
    code.check_ops(ops)?;
    let k = code.rank() as f64;
    for (index, a) in ops.iter().enumerate() {
        let gram = code.restrict(&(a.adjoint() * a));
        let scale = trace(&gram).re / k;
        let reference = spectral_norm(&gram);
        let residual = spectral_norm(&(&gram - identity(gram.nrows()).scale(scale)));
        if !tol.accepts(residual, reference) || scale <= tol.threshold(reference) {
            return Err(Error::NotScaledIsometry { index, residual });
        }
    }

    let (kl_holds, witness, kl_failure) = match kl_general_check(ops, p_c, tol) {
        Ok(w) => (true, Some(w), None),
        Err(Error::ConditionFailed { i, j, residual }) => (false, None, Some((i, j, residual))),
        Err(e) => return Err(e),
    };

    let ranges = range_projections(ops, p_c, tol)?;
    let (isoclinic_holds, family) = if ranges.len() < 2 {
        (true, None)
    } else {
        let report = isoclinic_family_check(&ranges, tol)?;
        (report.verdict, Some(report))
    };
    Ok(RoundTrip {
        kl_holds,
        isoclinic_holds,
        consistent: kl_holds == isoclinic_holds,
        witness,
        family,
        kl_failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::projection_from_subspace;
    use crate::pauli::PauliOperator;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn pauli(s: &str) -> ComplexMatrix {
        PauliOperator::parse(s).unwrap().to_matrix().unwrap()
    }

    /// Projection onto the span of computational basis states.
    fn basis_projection(n: usize, states: &[usize]) -> ComplexMatrix {
        let mut p = zeros(n, n);
        for &s in states {
            p[(s, s)] = c64(1.0, 0.0);
        }
        p
    }

    /// span{|000>, |111>}
    fn repetition_code() -> ComplexMatrix {
        basis_projection(8, &[0, 7])
    }


    fn close(a: &ComplexMatrix, b: &ComplexMatrix, eps: f64) -> bool {
        spectral_norm(&(a - b)) <= eps
    }

    fn projection_of(basis: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
        Ok(projection_from_subspace(&orthonormal_basis(basis, tol)?))
    }

    #[test]
    fn classic_bit_flip_code_is_identity() {
        let errors: Vec<_> = ["III", "XII", "IXI", "IIX"].iter().map(|s| pauli(s)).collect();
        let r = kl_classic_check(&errors, &repetition_code(), &tol()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((r.lambdas[(i, j)] - c64(expected, 0.0)).norm() < 1e-12);
            }
        }
        assert!(r.is_positive);
        assert!((r.trace - c64(4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn classic_single_identity() {
        let r = kl_classic_check(&[identity(8)], &repetition_code(), &tol()).unwrap();
        assert!((r.lambdas[(0, 0)] - c64(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn classic_fails_on_phase_flip() {
        let errors = vec![pauli("III"), pauli("IIZ")];
        match kl_classic_check(&errors, &repetition_code(), &tol()) {
            Err(Error::ConditionFailed { i: 0, j: 1, residual }) => assert!(residual > 0.5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn general_logical_pair_has_nontrivial_unitary() {
        // code of <Z1, Z2> on three qubits: span{|000>, |001>}
        let p_c = basis_projection(8, &[0, 1]);
        let ops = vec![pauli("III"), pauli("IIX")];
        let w = kl_general_check(&ops, &p_c, &tol()).unwrap();
        assert!((w.lambdas[(0, 1)] - c64(1.0, 0.0)).norm() < 1e-12);
        let u = w.unitary(0, 1);
        assert!(close(&(u * &p_c), &(pauli("IIX") * &p_c), 1e-12));
        assert!(w.nontriviality(0, 1) > 0.5);
        assert!(w.max_residual() < 1e-12);
    }

    #[test]
    fn general_detectable_pair_has_zero_lambda() {
        let p_c = basis_projection(8, &[0, 1]);
        let ops = vec![pauli("III"), pauli("XII")];
        let w = kl_general_check(&ops, &p_c, &tol()).unwrap();
        assert_eq!(w.lambdas[(0, 1)], c64(0.0, 0.0));
        assert_eq!(w.unitary(0, 1), &identity(8));
    }

    #[test]
    fn general_all_identity() {
        let p_c = basis_projection(4, &[1, 2]);
        let ops = vec![identity(4); 3];
        let w = kl_general_check(&ops, &p_c, &tol()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((w.lambdas[(i, j)] - c64(1.0, 0.0)).norm() < 1e-13);
                assert!(close(w.unitary(i, j), &identity(4), 1e-12));
            }
        }
    }

    #[test]
    fn general_fails_with_spread() {
        let p_c = basis_projection(4, &[0, 1]);
        let mut a = identity(4);
        a[(1, 1)] = c64(2.0, 0.0);
        let ops = vec![identity(4), a];
        assert!(matches!(
            kl_general_check(&ops, &p_c, &tol()),
            Err(Error::ConditionFailed { i: 0, j: 1, .. })
        ));
    }

    #[test]
    fn witness_reverification_matches() {
        let p_c = repetition_code();
        let ops: Vec<_> = ["III", "XII", "IIZ", "IYI"].iter().map(|s| pauli(s)).collect();
        let w = kl_general_check(&ops, &p_c, &tol()).unwrap();
        let again = w.reverify(&ops);
        assert!((&again - &w.residuals).amax() < 1e-13);
    }

    #[test]
    fn range_projection_examples() {
        let p_c = repetition_code();
        let r = range_projections(&[identity(8), pauli("XII"), zeros(8, 8)], &p_c, &tol()).unwrap();
        assert!(close(&r[0], &p_c, 1e-12));
        assert!(close(&r[1], &basis_projection(8, &[3, 4]), 1e-12));
        assert_eq!(r[2], zeros(8, 8));
    }

    #[test]
    fn intertwiner_single_projection_is_itself() {
        let p = basis_projection(3, &[0]);
        let f = intertwiners_from_family(std::slice::from_ref(&p), 0, &tol()).unwrap();
        assert_eq!(f.intertwiners[0], p);
    }

    #[test]
    fn intertwiner_for_orthogonal_members() {
        let p0 = basis_projection(4, &[0, 1]);
        let p1 = basis_projection(4, &[2, 3]);
        let f = intertwiners_from_family(&[p0.clone(), p1.clone()], 0, &tol()).unwrap();
        let v = &f.intertwiners[1];
        assert!(close(&(v.adjoint() * v), &p0, 1e-12));
        assert!(close(&(v * v.adjoint()), &p1, 1e-12));
    }

    #[test]
    fn intertwiners_reject_rank_mismatch() {
        let p0 = basis_projection(4, &[0, 1]);
        let p1 = basis_projection(4, &[2]);
        assert!(matches!(
            intertwiners_from_family(&[p0, p1], 0, &tol()),
            Err(Error::RankMismatch { .. })
        ));
    }

    #[test]
    fn witness_for_lone_anchor() {
        let p = basis_projection(3, &[0, 2]);
        let f = intertwiners_from_family(&[p], 0, &tol()).unwrap();
        let w = witness_from_isoclinic(&f, &tol()).unwrap();
        assert!((w.lambdas[(0, 0)] - c64(1.0, 0.0)).norm() < 1e-14);
        assert_eq!(w.unitary(0, 0), &identity(3));
    }

    #[test]
    fn witness_for_orthogonal_family() {
        let ps = vec![
            basis_projection(6, &[0, 1]),
            basis_projection(6, &[2, 3]),
            basis_projection(6, &[4, 5]),
        ];
        let f = intertwiners_from_family(&ps, 0, &tol()).unwrap();
        let w = witness_from_isoclinic(&f, &tol()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(w.lambdas[(i, j)], c64(0.0, 0.0));
                    assert_eq!(w.unitary(i, j), &identity(6));
                }
            }
        }
    }

    #[test]
    fn witness_rejects_non_isoclinic() {
        let ps = vec![basis_projection(4, &[0, 1]), {
            let m = ComplexMatrix::from_fn(4, 2, |i, j| match (i, j) {
                (0, 0) | (2, 1) => c64(1.0, 0.0),
                _ => c64(0.0, 0.0),
            });
            projection_of(&m, &tol()).unwrap()
        }];
        let f = intertwiners_from_family(&ps, 0, &tol()).unwrap();
        assert!(matches!(
            witness_from_isoclinic(&f, &tol()),
            Err(Error::IsoclinicViolation { i: 0, j: 1, .. })
        ));
    }

    #[test]
    fn roundtrip_logical_set() {
        let p_c = basis_projection(8, &[0, 1]);
        let ops: Vec<_> = ["III", "IIX", "IIZ"].iter().map(|s| pauli(s)).collect();
        let mut ops = ops;
        ops.push(pauli("IIX") * pauli("IIZ"));
        let r = kl_isoclinic_roundtrip(&ops, &p_c, &tol()).unwrap();
        assert!(r.kl_holds && r.isoclinic_holds && r.consistent);
    }

    #[test]
    fn roundtrip_orthogonal_ranges() {
        let p_c = basis_projection(8, &[0, 1]);
        let ops = vec![pauli("III"), pauli("XII")];
        let r = kl_isoclinic_roundtrip(&ops, &p_c, &tol()).unwrap();
        assert!(r.kl_holds && r.isoclinic_holds && r.consistent);
    }

    #[test]
    fn roundtrip_rejects_unscaled_operator() {
        let p_c = basis_projection(8, &[0, 1]);
        let mut bumped = identity(8);
        bumped[(0, 0)] += c64(0.1, 0.0);
        assert!(matches!(
            kl_isoclinic_roundtrip(&[identity(8), bumped], &p_c, &tol()),
            Err(Error::NotScaledIsometry { index: 1, .. })
        ));
    }

    #[test]
    fn classic_success_implies_general_success() {
        let errors: Vec<_> = ["III", "XII", "IXI", "IIX"].iter().map(|s| pauli(s)).collect();
        let p_c = repetition_code();
        let classic = kl_classic_check(&errors, &p_c, &tol()).unwrap();
        let general = kl_general_check(&errors, &p_c, &tol()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let m = &p_c * errors[i].adjoint() * &errors[j] * &p_c;
                let r = spectral_norm(&(m - &p_c * classic.lambdas[(i, j)]));
                assert!(r <= 1e-10);
                assert!((general.lambdas[(i, j)].norm() - classic.lambdas[(i, j)].norm()).abs() < 1e-12);
            }
        }
    }
}
