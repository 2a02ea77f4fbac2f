//! Mutually unbiased measurements.
//!
//! Two `d`-outcome projective measurements `{P_a}`, `{Q_b}` are mutually
//! unbiased when `P_a = d·P_a Q_b P_a` and `Q_b = d·Q_b P_a Q_b` for every
//! pair of outcomes. All effects then share a rank `k` with `k·d = dim`, and
//! the pooled effects of a MUM form an isoclinic family whose scalars are
//! `0` (same measurement) or `1/d` (different measurements).
//!
//! A two-element MUM has a canonical form: after a unitary change of basis
//! `P_a = I_k ⊗ |a⟩⟨a|` and `Q_b = (1/d) Σᵢⱼ V^b_ij ⊗ |i⟩⟨j|` where the `k × k`
//! blocks satisfy
//!
//! ```text
//! V^b_ii = I,   (V^b_ij)ᴴ = V^b_ji,   V^b_ik = V^b_ij V^b_jk,   Σ_b V^b_ij = δ_ij·d·I.
//! ```
//!
//! The change of basis is fixed by the anchor effect `P_anchor` of the first
//! measurement and the SVD basis `{eᵢ}` of its range. Effects of the same
//! measurement are orthogonal, so the intertwiners onto the other `P_a` pass
//! through the first effect of the second measurement:
//! `V_a = d·P_a Q_0 P_anchor`, a partial isometry from `P_anchor` onto `P_a`.
//! `U` sends `V_a eᵢ` to `eᵢ ⊗ |a⟩` (index `i·d + a`). In this gauge every
//! `V^0_ij` is the identity.

use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::construct::{omega_commuting_generators, omega_rotated_family};
use crate::error::{Error, Result};
use crate::exec::{map_indices, upper_pairs, Execution};
use crate::kl::CodeSpace;
use crate::linalg::{
    c64, ensure_dim, ensure_square, extend_to_unitary, identity, orthonormal_basis,
    projection_rank, projection_residual, spectral_norm, svd, zeros, ComplexMatrix, Tolerance,
};

/// First invariant a candidate measurement violates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum MeasurementDefect {
    NotProjection { index: usize, residual: f64 },
    NotOrthogonal { a: usize, b: usize, residual: f64 },
    Incomplete { residual: f64 },
}

impl fmt::Display for MeasurementDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasurementDefect::NotProjection { index, residual } => {
                write!(f, "effect {index} is not a projection (residual {residual:.3e})")
            }
            MeasurementDefect::NotOrthogonal { a, b, residual } => write!(
                f,
                "effects {a} and {b} do not have orthogonal ranges (residual {residual:.3e})"
            ),
            MeasurementDefect::Incomplete { residual } => {
                write!(f, "effects do not sum to the identity (residual {residual:.3e})")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Measurement {
    pub d: usize,
    pub dim: usize,
    pub effects: Vec<ComplexMatrix>,
}

pub fn measurement_check(effects: &[ComplexMatrix], tol: &Tolerance) -> Result<Measurement> {
    let first = effects
        .first()
        .ok_or_else(|| Error::InvalidArgument("a measurement needs at least one effect".into()))?;
    let dim = ensure_square(first)?;
    for e in effects {
        ensure_dim(e, dim)?;
        crate::linalg::ensure_finite(e)?;
    }
    let defect = |d| Err(Error::InvalidMeasurement(d));
    for (index, e) in effects.iter().enumerate() {
        let residual = projection_residual(e);
        if !tol.accepts(residual, 1.0) {
            return defect(MeasurementDefect::NotProjection { index, residual });
        }
    }
    for (a, b) in upper_pairs(effects.len()) {
        let residual = spectral_norm(&(&effects[a] * &effects[b]));
        if !tol.accepts(residual, 1.0) {
            return defect(MeasurementDefect::NotOrthogonal { a, b, residual });
        }
    }
    let sum = effects.iter().fold(zeros(dim, dim), |acc, e| acc + e);
    let residual = spectral_norm(&(sum - identity(dim)));
    if !tol.accepts(residual, 1.0) {
        return defect(MeasurementDefect::Incomplete { residual });
    }
    Ok(Measurement {
        d: effects.len(),
        dim,
        effects: effects.to_vec(),
    })
}

#[derive(Debug, Clone)]
pub struct MumFamily {
    pub measurements: Vec<Measurement>,
    pub d: usize,
    pub dim: usize,
    /// Common rank of every effect.
    pub k: usize,
    /// Worst `max(‖P − d·PQP‖, ‖Q − d·QPQ‖)` over cross pairs.
    pub max_residual: f64,
    /// Worst `max(‖PQP − P/d‖, ‖QPQ − Q/d‖)` over cross pairs.
    pub max_scalar_deviation: f64,
}

impl MumFamily {
    /// All effects, measurement by measurement.
    pub fn pooled_effects(&self) -> Vec<ComplexMatrix> {
        self.measurements
            .iter()
            .flat_map(|m| m.effects.iter().cloned())
            .collect()
    }
}

pub fn mum_check(ms: &[Measurement], tol: &Tolerance) -> Result<MumFamily> {
    mum_check_with(ms, tol, Execution::default())
}

pub fn mum_check_with(ms: &[Measurement], tol: &Tolerance, exec: Execution) -> Result<MumFamily> {
    if ms.len() < 2 {
        return Err(Error::InvalidArgument(
            "a MUM check needs at least two measurements".into(),
        ));
    }
    let (d, dim) = (ms[0].d, ms[0].dim);
    for (index, m) in ms.iter().enumerate() {
        if m.d != d || m.dim != dim {
            return Err(Error::DimensionMismatch {
                expected: format!("{d} outcomes on dimension {dim}"),
                found: format!("{} outcomes on dimension {} (measurement {index})", m.d, m.dim),
            });
        }
    }
    let k = dim / d;
    let mut flat = 0;
    for m in ms {
        for e in &m.effects {
            let found = projection_rank(e);
            if found != k || k * d != dim {
                return Err(Error::RankMismatch {
                    index: flat,
                    expected: k,
                    found,
                });
            }
            flat += 1;
        }
    }

    let mut cross = Vec::new();
    for (m1, m2) in upper_pairs(ms.len()) {
        for a in 0..d {
            for b in 0..d {
                cross.push((m1, m2, a, b));
            }
        }
    }
    let df = d as f64;
    let results = map_indices(cross.len(), exec, |idx| {
        let (m1, m2, a, b) = cross[idx];
        let p = &ms[m1].effects[a];
        let q = &ms[m2].effects[b];
        let pqp = p * q * p;
        let qpq = q * p * q;
        let residual = spectral_norm(&(p - pqp.scale(df))).max(spectral_norm(&(q - qpq.scale(df))));
        let deviation =
            spectral_norm(&(pqp - p.scale(1.0 / df))).max(spectral_norm(&(qpq - q.scale(1.0 / df))));
        (residual, deviation)
    });
    let mut max_residual: f64 = 0.0;
    let mut max_scalar_deviation: f64 = 0.0;
    for (&(m1, m2, a, b), &(residual, deviation)) in cross.iter().zip(&results) {
        if !tol.accepts(residual, 1.0) {
            return Err(Error::CrossPairFailed {
                m1,
                m2,
                a,
                b,
                residual,
            });
        }
        max_residual = max_residual.max(residual);
        max_scalar_deviation = max_scalar_deviation.max(deviation);
    }
    Ok(MumFamily {
        measurements: ms.to_vec(),
        d,
        dim,
        k,
        max_residual,
        max_scalar_deviation,
    })
}

/// Measurements `{graph projection of ω^r Aᵢ}_r`, one per generator of an
/// ω-commuting family. Effects have rank `d^{n−1}` on `C^{d^n}`.
pub fn mum_from_construction(d: usize, n: usize) -> Result<MumFamily> {
    let tol = Tolerance::default();
    let family = omega_commuting_generators(d, n)?;
    let measurements = family
        .members
        .iter()
        .map(|a| measurement_check(&omega_rotated_family(a, d, &tol)?, &tol))
        .collect::<Result<Vec<_>>>()?;
    mum_check(&measurements, &tol)
}

#[derive(Debug, Clone)]
pub struct MumKlReport {
    pub verdict: bool,
    /// `U_ab` at `a * d + b`.
    pub unitaries: Vec<ComplexMatrix>,
    pub residuals: DMatrix<f64>,
    /// Pairs `(a, b, residual)` that fail.
    pub failures: Vec<(usize, usize, f64)>,
}

impl MumKlReport {
    pub fn unitary(&self, a: usize, b: usize) -> &ComplexMatrix {
        &self.unitaries[a * self.residuals.ncols() + b]
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }
}

/// Checks `P_C V_aᴴ W_b P_C = (1/√d)·U_ab·P_C` with `U_ab` a unitary
/// commuting with `P_C`, which holds exactly when the final projections of
/// the `V_a` and of the `W_b` form a MUM.
pub fn mum_kl_check(
    vs: &[ComplexMatrix],
    ws: &[ComplexMatrix],
    p_c: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<MumKlReport> {
    let code = CodeSpace::new(p_c, tol)?;
    let d = vs.len();
    if ws.len() != d || d < 2 {
        return Err(Error::InvalidArgument(format!(
            "need two families of d >= 2 intertwiners, got {} and {}",
            vs.len(),
            ws.len()
        )));
    }
    for (name, family) in [("V", vs), ("W", ws)] {
        for (index, v) in family.iter().enumerate() {
            ensure_dim(v, code.dim())?;
            let residual = spectral_norm(&(v.adjoint() * v - p_c));
            if !tol.accepts(residual, 1.0) {
                return Err(Error::Precondition(format!(
                    "{name}_{index}: initial projection differs from the code projection (residual {residual:.3e})"
                )));
            }
        }
        let finals: Vec<ComplexMatrix> = family.iter().map(|v| v * v.adjoint()).collect();
        measurement_check(&finals, tol).map_err(|e| {
            Error::Precondition(format!("final projections of {name} do not form a measurement: {e}"))
        })?;
    }

    let scalar = 1.0 / (d as f64).sqrt();
    let threshold = tol.threshold(1.0);
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|a| (0..d).map(move |b| (a, b))).collect();
    let results = map_indices(pairs.len(), Execution::default(), |idx| {
        let (a, b) = pairs[idx];
        let m = p_c * vs[a].adjoint() * &ws[b] * p_c;
        let restricted = code.restrict(&m);
        let (deviation, polar) = match svd(&restricted) {
            Ok(f) => (
                f.singular_values
                    .iter()
                    .map(|s| (s - scalar).abs())
                    .fold(0.0, f64::max),
                f.polar_unitary(),
            ),
            Err(_) => (f64::NAN, identity(restricted.nrows())),
        };
        let unitary = extend_to_unitary(&code.embed(&polar), p_c, &tol.scaled(1e3))
            .unwrap_or_else(|_| identity(code.dim()));
        let residual = spectral_norm(&(&m - &unitary * p_c * c64(scalar, 0.0))).max(deviation);
        (unitary, residual)
    });
    let mut residuals = DMatrix::zeros(d, d);
    let mut unitaries = Vec::with_capacity(d * d);
    let mut failures = Vec::new();
    for (&(a, b), (u, r)) in pairs.iter().zip(results) {
        residuals[(a, b)] = r;
        if r > threshold {
            failures.push((a, b, r));
        }
        unitaries.push(u);
    }
    Ok(MumKlReport {
        verdict: failures.is_empty(),
        unitaries,
        residuals,
        failures,
    })
}

#[derive(Debug, Clone)]
pub struct CanonicalForm {
    pub k: usize,
    pub d: usize,
    /// Effect of the first measurement used as the anchor.
    pub anchor: usize,
    /// `blocks[b][i][j] = V^b_ij`.
    pub blocks: Vec<Vec<Vec<ComplexMatrix>>>,
    pub basis_change: ComplexMatrix,
}

fn outcome_projection(k: usize, d: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut e = zeros(d, d);
    e[(i, j)] = c64(1.0, 0.0);
    crate::linalg::kron(&identity(k), &e)
}

impl CanonicalForm {
    pub fn block(&self, b: usize, i: usize, j: usize) -> &ComplexMatrix {
        &self.blocks[b][i][j]
    }

    /// `Q_b` in canonical coordinates: `(1/d) Σᵢⱼ V^b_ij ⊗ |i⟩⟨j|`.
    pub fn canonical_q(&self, b: usize) -> ComplexMatrix {
        let n = self.k * self.d;
        let mut q = zeros(n, n);
        for i in 0..self.d {
            for j in 0..self.d {
                let block = self.block(b, i, j);
                for r in 0..self.k {
                    for c in 0..self.k {
                        q[(r * self.d + i, c * self.d + j)] = block[(r, c)] / self.d as f64;
                    }
                }
            }
        }
        q
    }

    /// Effects `(P_a, Q_b)` in the original coordinates.
    pub fn rebuild(&self) -> (Vec<ComplexMatrix>, Vec<ComplexMatrix>) {
        let u = &self.basis_change;
        let uh = u.adjoint();
        let ps = (0..self.d)
            .map(|a| &uh * outcome_projection(self.k, self.d, a, a) * u)
            .collect();
        let qs = (0..self.d).map(|b| &uh * self.canonical_q(b) * u).collect();
        (ps, qs)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RelationResidual {
    pub relation: &'static str,
    pub residual: f64,
    /// Indices attaining the residual, `[b, i, j]` or `[b, i, j, l]` or `[i, j]`.
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RelationsReport {
    pub verdict: bool,
    /// Diagonal, adjoint, chain and completeness relations, in that order.
    pub relations: Vec<RelationResidual>,
}

impl RelationsReport {
    pub fn max_residual(&self) -> f64 {
        self.relations.iter().map(|r| r.residual).fold(0.0, f64::max)
    }
}

fn track(slot: &mut RelationResidual, residual: f64, indices: &[usize]) {
    if residual > slot.residual || slot.indices.is_empty() {
        slot.residual = slot.residual.max(residual);
        slot.indices = indices.to_vec();
    }
}

pub fn canonical_relations_check(cf: &CanonicalForm, tol: &Tolerance) -> RelationsReport {
    let (k, d) = (cf.k, cf.d);
    let ik = identity(k);
    let slot = |relation| RelationResidual {
        relation,
        residual: 0.0,
        indices: Vec::new(),
    };
    let mut diagonal = slot("V^b_ii = I");
    let mut adjoint = slot("(V^b_ij)^H = V^b_ji");
    let mut chain = slot("V^b_il = V^b_ij V^b_jl");
    let mut completeness = slot("sum_b V^b_ij = delta_ij d I");
    for b in 0..d {
        for i in 0..d {
            track(&mut diagonal, spectral_norm(&(cf.block(b, i, i) - &ik)), &[b, i, i]);
            for j in 0..d {
                let r = spectral_norm(&(cf.block(b, i, j).adjoint() - cf.block(b, j, i)));
                track(&mut adjoint, r, &[b, i, j]);
                for l in 0..d {
                    let r = spectral_norm(
                        &(cf.block(b, i, l) - cf.block(b, i, j) * cf.block(b, j, l)),
                    );
                    track(&mut chain, r, &[b, i, j, l]);
                }
            }
        }
    }
    for i in 0..d {
        for j in 0..d {
            let sum = (0..d).fold(zeros(k, k), |acc, b| acc + cf.block(b, i, j));
            let target = if i == j { ik.scale(d as f64) } else { zeros(k, k) };
            track(&mut completeness, spectral_norm(&(sum - target)), &[i, j]);
        }
    }
    let relations = vec![diagonal, adjoint, chain, completeness];
    let verdict = relations.iter().all(|r| tol.accepts(r.residual, d as f64));
    RelationsReport { verdict, relations }
}

/// Canonical form of a two-element MUM, anchored at effect `anchor` of the
/// first measurement.
pub fn canonical_form_extract(
    family: &MumFamily,
    anchor: usize,
    tol: &Tolerance,
) -> Result<CanonicalForm> {
    if family.measurements.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "canonical form needs exactly two measurements, got {}",
            family.measurements.len()
        )));
    }
    let (k, d, dim) = (family.k, family.d, family.dim);
    if anchor >= d {
        return Err(Error::InvalidArgument(format!(
            "anchor {anchor} out of range for {d} outcomes"
        )));
    }
    let ps = &family.measurements[0].effects;
    let qs = &family.measurements[1].effects;
    let p_anchor = &ps[anchor];
    let sqrt_d = (d as f64).sqrt();

    let basis = orthonormal_basis(p_anchor, tol)?.into_basis();
    if basis.ncols() != k {
        return Err(Error::RankMismatch {
            index: anchor,
            expected: k,
            found: basis.ncols(),
        });
    }
    let mut u = zeros(dim, dim);
    let via = (&qs[0] * p_anchor).scale(d as f64);
    for (a, p) in ps.iter().enumerate() {
        let v = if a == anchor { p_anchor.clone() } else { p * &via };
        let images = v * &basis;
        for i in 0..k {
            u.set_row(i * d + a, &images.column(i).adjoint());
        }
    }
    let residual = spectral_norm(&(&u * u.adjoint() - identity(dim)));
    if !tol.scaled(1e2).accepts(residual, 1.0) {
        return Err(Error::RelationViolated {
            relation: "basis change is unitary".into(),
            indices: vec![],
            residual,
        });
    }
    for (a, p) in ps.iter().enumerate() {
        let residual = spectral_norm(&(&u * p * u.adjoint() - outcome_projection(k, d, a, a)));
        if !tol.scaled(1e2).accepts(residual, 1.0) {
            return Err(Error::RelationViolated {
                relation: "U P_a U^H = I (x) |a><a|".into(),
                indices: vec![a],
                residual,
            });
        }
    }

    let uh = u.adjoint();
    let mut blocks = Vec::with_capacity(d);
    for q in qs {
        let w = (q * p_anchor).scale(sqrt_d);
        let rotated = &u * w * &uh;
        let column: Vec<ComplexMatrix> = (0..d)
            .map(|j| {
                ComplexMatrix::from_fn(k, k, |r, c| rotated[(r * d + j, c * d + anchor)] * sqrt_d)
            })
            .collect();
        let table: Vec<Vec<ComplexMatrix>> = (0..d)
            .map(|i| (0..d).map(|j| &column[i] * column[j].adjoint()).collect())
            .collect();
        blocks.push(table);
    }
    let cf = CanonicalForm {
        k,
        d,
        anchor,
        blocks,
        basis_change: u,
    };
    let report = canonical_relations_check(&cf, &tol.scaled(1e2));
    if let Some(worst) = report
        .relations
        .iter()
        .find(|r| !tol.scaled(1e2).accepts(r.residual, d as f64))
    {
        return Err(Error::RelationViolated {
            relation: worst.relation.into(),
            indices: worst.indices.clone(),
            residual: worst.residual,
        });
    }
    Ok(cf)
}
