//! Canonical angles between subspaces and isoclinic tests.
//!
//! Two rank-`k` projections `P`, `Q` are isoclinic when
//! `PQP = λP` and `QPQ = λQ` for one scalar `λ >= 0`. Here `λ` is the
//! squared cosine of the common canonical angle. Some statements of this
//! characterization write `λ = cos θ`; the squared form is the one the
//! projection identities force (a pair at angle π/4 gives `λ = 1/2`).

use std::f64::consts::FRAC_PI_4;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{map_indices, upper_pairs, Execution};
use crate::linalg::{
    check_projection, hermitian_eigen, projection_rank, singular_values, spectral_norm, trace,
    ComplexMatrix, Subspace, Tolerance,
};

/// Canonical angles in radians, nondecreasing, each in `[0, π/2]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleSpectrum {
    pub angles: Vec<f64>,
}

impl AngleSpectrum {
    fn from_unsorted(mut angles: Vec<f64>) -> Self {
        angles.sort_by(f64::total_cmp);
        AngleSpectrum { angles }
    }

    /// Largest gap between any two angles.
    pub fn spread(&self) -> f64 {
        match (self.angles.first(), self.angles.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsoclinicCertificate {
    pub lambda: f64,
    pub angle: f64,
    pub residual: f64,
}

#[inline]
fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Canonical angles from the singular values of `Vᴴ·W`.
///
/// Angles below π/4 are recomputed from the sines (singular values of
/// `(I − P_V)·W` with `W` the smaller subspace), which keeps small angles accurate
/// where `arccos` loses half the digits.
pub fn canonical_angles(v: &Subspace, w: &Subspace) -> Result<AngleSpectrum> {
    if v.ambient_dim() != w.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("ambient dimension {}", v.ambient_dim()),
            found: format!("ambient dimension {}", w.ambient_dim()),
        });
    }
    let (bv, bw) = (v.basis(), w.basis());
    let overlap = bv.adjoint() * bw;
    // descending cosines -> ascending angles
    let cosines = singular_values(&overlap);
    let mut angles: Vec<f64> = cosines.iter().map(|&c| clamp_unit(c).acos()).collect();

    // sines are the singular values of the smaller basis after projecting out
    // the larger subspace; there is one per angle
    let (big, small) = if v.dim() >= w.dim() { (bv, bw) } else { (bw, bv) };
    let residual = small - big * (big.adjoint() * small);
    let mut sines = singular_values(&residual);
    sines.sort_by(f64::total_cmp);
    for (angle, &s) in angles.iter_mut().zip(&sines) {
        if *angle < FRAC_PI_4 {
            *angle = clamp_unit(s).asin();
        }
    }
    Ok(AngleSpectrum::from_unsorted(angles))
}

fn validated_rank(p: &ComplexMatrix, index: usize, tol: &Tolerance) -> Result<usize> {
    check_projection(p, index, tol)?;
    Ok(projection_rank(p))
}

fn equal_ranks(pv: &ComplexMatrix, pw: &ComplexMatrix, tol: &Tolerance) -> Result<usize> {
    if pv.shape() != pw.shape() {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", pv.nrows(), pv.ncols()),
            found: format!("{}x{}", pw.nrows(), pw.ncols()),
        });
    }
    let kv = validated_rank(pv, 0, tol)?;
    let kw = validated_rank(pw, 1, tol)?;
    if kv != kw {
        return Err(Error::RankMismatch {
            index: 1,
            expected: kv,
            found: kw,
        });
    }
    if kv == 0 {
        return Err(Error::Precondition("projections have rank zero".into()));
    }
    Ok(kv)
}

/// Independent route to the canonical angles: `cos² θᵢ` are the eigenvalues
/// of `P_V P_W P_V` restricted to `range(P_V)`.
pub fn angles_via_eigen_oracle(
    pv: &ComplexMatrix,
    pw: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<AngleSpectrum> {
    let k = equal_ranks(pv, pw, tol)?;
    let (vals, vecs) = hermitian_eigen(pv);
    // eigenvalues of a projection are ~0 or ~1; the top k span its range
    let n = vals.len();
    let range = vecs.columns(n - k, k).into_owned();
    let restricted = range.adjoint() * pw * &range;
    let (mus, _) = hermitian_eigen(&restricted);
    let angles = mus.iter().map(|&mu| clamp_unit(mu).sqrt().acos()).collect();
    Ok(AngleSpectrum::from_unsorted(angles))
}

/// `(λ, max residual)` for a pair of equal-rank projections, no validation.
fn pair_lambda_residual(pv: &ComplexMatrix, pw: &ComplexMatrix) -> (f64, f64) {
    let vwv = pv * pw * pv;
    let wvw = pw * pv * pw;
    let lambda = trace(&vwv).re / trace(pv).re;
    let r1 = spectral_norm(&(&vwv - pv.scale(lambda)));
    let r2 = spectral_norm(&(&wvw - pw.scale(lambda)));
    (lambda, r1.max(r2))
}

fn certificate(lambda: f64, residual: f64) -> IsoclinicCertificate {
    let lambda = clamp_unit(lambda);
    IsoclinicCertificate {
        lambda,
        angle: lambda.sqrt().acos(),
        residual,
    }
}

/// Checks `P_V P_W P_V = λ P_V` and `P_W P_V P_W = λ P_W` with
/// `λ = tr(P_V P_W P_V)/tr(P_V)`. Returns `None` if either residual exceeds
/// the tolerance.
pub fn isoclinic_pair_check(
    pv: &ComplexMatrix,
    pw: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<Option<IsoclinicCertificate>> {
    equal_ranks(pv, pw, tol)?;
    let (lambda, residual) = pair_lambda_residual(pv, pw);
    if tol.accepts(residual, 1.0) {
        Ok(Some(certificate(lambda, residual)))
    } else {
        Ok(None)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairFailure {
    pub i: usize,
    pub j: usize,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct FamilyReport {
    pub verdict: bool,
    pub rank: usize,
    /// Symmetric, unit diagonal.
    pub lambda_matrix: DMatrix<f64>,
    pub residuals: DMatrix<f64>,
    pub worst_residual: f64,
    /// Every failing unordered pair, lexicographic.
    pub failing_pairs: Vec<PairFailure>,
}

pub fn isoclinic_family_check(ps: &[ComplexMatrix], tol: &Tolerance) -> Result<FamilyReport> {
    isoclinic_family_check_with(ps, tol, Execution::default())
}

pub fn isoclinic_family_check_with(
    ps: &[ComplexMatrix],
    tol: &Tolerance,
    exec: Execution,
) -> Result<FamilyReport> {
    if ps.len() < 2 {
        return Err(Error::InvalidArgument(
            "an isoclinic family check needs at least two projections".into(),
        ));
    }
    let n = ps[0].nrows();
    for (index, p) in ps.iter().enumerate() {
        if p.nrows() != n || p.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: format!("{n}x{n}"),
                found: format!("{}x{} (operator {index})", p.nrows(), p.ncols()),
            });
        }
    }
    let ranks = map_indices(ps.len(), exec, |i| validated_rank(&ps[i], i, tol));
    let ranks: Vec<usize> = ranks.into_iter().collect::<Result<_>>()?;
    let rank = ranks[0];
    if let Some((index, &found)) = ranks.iter().enumerate().find(|(_, &r)| r != rank) {
        return Err(Error::RankMismatch {
            index,
            expected: rank,
            found,
        });
    }
    if rank == 0 {
        return Err(Error::Precondition("projections have rank zero".into()));
    }

    let pairs = upper_pairs(ps.len());
    let results = map_indices(pairs.len(), exec, |idx| {
        let (i, j) = pairs[idx];
        pair_lambda_residual(&ps[i], &ps[j])
    });

    let m = ps.len();
    let mut lambda_matrix = DMatrix::<f64>::identity(m, m);
    let mut residuals = DMatrix::<f64>::zeros(m, m);
    let mut failing_pairs = Vec::new();
    let mut worst_residual: f64 = 0.0;
    for (&(i, j), &(lambda, residual)) in pairs.iter().zip(&results) {
        lambda_matrix[(i, j)] = lambda;
        lambda_matrix[(j, i)] = lambda;
        residuals[(i, j)] = residual;
        residuals[(j, i)] = residual;
        worst_residual = worst_residual.max(residual);
        if !tol.accepts(residual, 1.0) {
            failing_pairs.push(PairFailure { i, j, residual });
        }
    }
    Ok(FamilyReport {
        verdict: failing_pairs.is_empty(),
        rank,
        lambda_matrix,
        residuals,
        worst_residual,
        failing_pairs,
    })
}
