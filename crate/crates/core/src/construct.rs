//! Generators of isoclinic families.
//!
//! * anti-commuting Hermitian unitaries via the tensor recursion
//!   `{X⊗Bᵢ} ∪ {Y⊗I, Z⊗I}`, which yields `2q+1` members in dimension `2^q·p`;
//! * graph subspaces `{(x, Ax, …, A^{d−1}x)}` of order-`d` unitaries,
//!   together with the "vertical" subspace `{(0, …, 0, x)}`;
//! * ω-commuting unitary families built from clock and shift matrices;
//! * the crossing unitaries relating graph intertwiners of two ω-commuting
//!   unitaries.
//!
//! For an anti-commuting pair `A, B` the graph projections `P_A`, `P_B` and
//! `P_∞` are pairwise isoclinic with scalar `½`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    c64, check_unitary, ensure_square, identity, kron, matrix_power, spectral_norm, zeros,
    ComplexMatrix, Tolerance,
};

/// `e^{2πi/d}`.
pub fn omega(d: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI / d as f64)
}

/// `ω^k` computed from the reduced exponent so that `ω^d` is exactly one.
pub fn omega_pow(d: usize, k: i64) -> Complex64 {
    let r = k.rem_euclid(d as i64);
    match (r, d) {
        (0, _) => c64(1.0, 0.0),
        (1, 2) => c64(-1.0, 0.0),
        (1, 4) => c64(0.0, 1.0),
        (2, 4) => c64(-1.0, 0.0),
        (3, 4) => c64(0.0, -1.0),
        _ => Complex64::from_polar(1.0, 2.0 * PI * r as f64 / d as f64),
    }
}

pub fn pauli_x() -> ComplexMatrix {
    let (o, l) = (c64(0.0, 0.0), c64(1.0, 0.0));
    ComplexMatrix::from_row_slice(2, 2, &[o, l, l, o])
}

pub fn pauli_y() -> ComplexMatrix {
    let (o, i) = (c64(0.0, 0.0), c64(0.0, 1.0));
    ComplexMatrix::from_row_slice(2, 2, &[o, -i, i, o])
}

pub fn pauli_z() -> ComplexMatrix {
    let (o, l) = (c64(0.0, 0.0), c64(1.0, 0.0));
    ComplexMatrix::from_row_slice(2, 2, &[l, o, o, -l])
}

/// Cyclic shift `|j⟩ → |j+1 mod d⟩`.
pub fn shift_matrix(d: usize) -> ComplexMatrix {
    let mut m = zeros(d, d);
    for j in 0..d {
        m[((j + 1) % d, j)] = c64(1.0, 0.0);
    }
    m
}

/// `diag(1, ω, …, ω^{d−1})`.
pub fn clock_matrix(d: usize) -> ComplexMatrix {
    let mut m = zeros(d, d);
    for j in 0..d {
        m[(j, j)] = omega_pow(d, j as i64);
    }
    m
}

#[derive(Debug, Clone)]
pub struct AntiCommutingFamily {
    pub m: usize,
    pub members: Vec<ComplexMatrix>,
}

/// Largest `q` with `2^q | m`.
pub fn two_adic_valuation(m: usize) -> u32 {
    m.trailing_zeros()
}

/// `2q+1` pairwise anti-commuting Hermitian unitaries of size `m = 2^q·p`.
/// Entries are exact in `{0, ±1, ±i}`.
pub fn kestelman_family(m: usize) -> Result<AntiCommutingFamily> {
    if m == 0 || m % 2 == 1 {
        return Err(Error::OddDimension(m));
    }
    let q = two_adic_valuation(m);
    let p = m >> q;
    let ip = identity(p);
    let mut members = vec![kron(&pauli_x(), &ip), kron(&pauli_y(), &ip), kron(&pauli_z(), &ip)];
    let mut size = 2 * p;
    for _ in 1..q {
        let inner = identity(size);
        let mut next: Vec<ComplexMatrix> = members.iter().map(|b| kron(&pauli_x(), b)).collect();
        next.push(kron(&pauli_y(), &inner));
        next.push(kron(&pauli_z(), &inner));
        members = next;
        size *= 2;
    }
    Ok(AntiCommutingFamily { m, members })
}

fn check_order(a: &ComplexMatrix, d: usize, tol: &Tolerance) -> Result<()> {
    let residual = spectral_norm(&(matrix_power(a, d) - identity(a.nrows())));
    if !tol.accepts(residual, 1.0) {
        return Err(Error::OrderMismatch { d, residual });
    }
    Ok(())
}

fn check_graph_input(a: &ComplexMatrix, d: usize, tol: &Tolerance) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("order d must be at least 2, got {d}")));
    }
    check_unitary(a, tol)?;
    if d > 2 {
        check_order(a, d, tol)?;
    }
    Ok(())
}

/// `A^k` for any integer `k`, negative powers as powers of `Aᴴ`.
fn signed_power(a: &ComplexMatrix, k: i64) -> ComplexMatrix {
    if k >= 0 {
        matrix_power(a, k as usize)
    } else {
        matrix_power(&a.adjoint(), k.unsigned_abs() as usize)
    }
}

fn set_block(m: &mut ComplexMatrix, bi: usize, bj: usize, block: &ComplexMatrix) {
    let n = block.nrows();
    m.view_mut((bi * n, bj * n), (n, n)).copy_from(block);
}

/// Projection onto `{(x, Ax, …, A^{d−1}x)}`: block `(i, j)` is `A^{i−j}/d`.
pub fn graph_projection(a: &ComplexMatrix, d: usize, tol: &Tolerance) -> Result<ComplexMatrix> {
    check_graph_input(a, d, tol)?;
    let n = a.nrows();
    let mut p = zeros(d * n, d * n);
    let scale = c64(1.0 / d as f64, 0.0);
    for i in 0..d {
        for j in 0..d {
            set_block(&mut p, i, j, &(signed_power(a, i as i64 - j as i64) * scale));
        }
    }
    Ok(p)
}

/// `V_A` with last block column `A^j/√d`; initial projection `P_∞`, final
/// projection the graph projection of `A`.
pub fn graph_partial_isometry(
    a: &ComplexMatrix,
    d: usize,
    tol: &Tolerance,
) -> Result<ComplexMatrix> {
    check_graph_input(a, d, tol)?;
    let n = a.nrows();
    let mut v = zeros(d * n, d * n);
    let scale = c64(1.0 / (d as f64).sqrt(), 0.0);
    for j in 0..d {
        set_block(&mut v, j, d - 1, &(matrix_power(a, j) * scale));
    }
    Ok(v)
}

/// Projection onto `{(0, …, 0, x)}`: identity in the last diagonal block.
pub fn p_infinity(dim: usize, d: usize) -> ComplexMatrix {
    let mut p = zeros(d * dim, d * dim);
    set_block(&mut p, d - 1, d - 1, &identity(dim));
    p
}

/// The graph projections of `ω^r A` for `r = 0..d`; a complete measurement.
pub fn omega_rotated_family(
    a: &ComplexMatrix,
    d: usize,
    tol: &Tolerance,
) -> Result<Vec<ComplexMatrix>> {
    check_graph_input(a, d, tol)?;
    check_order(a, d, tol)?;
    (0..d)
        .map(|r| graph_projection(&(a * omega_pow(d, r as i64)), d, tol))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct OmegaFamily {
    pub d: usize,
    pub dim: usize,
    #[serde(skip)]
    pub members: Vec<ComplexMatrix>,
    pub omega: [f64; 2],
}

impl OmegaFamily {
    /// `max(‖Aᵢᵈ − I‖, ‖AᵢAⱼ − ω·AⱼAᵢ‖)` over members and ordered pairs `i < j`.
    pub fn residual(&self) -> f64 {
        let w = omega_pow(self.d, 1);
        let id = identity(self.dim);
        let mut worst: f64 = 0.0;
        for (i, a) in self.members.iter().enumerate() {
            worst = worst.max(spectral_norm(&(matrix_power(a, self.d) - &id)));
            for b in &self.members[i + 1..] {
                worst = worst.max(spectral_norm(&(a * b - b * a * w)));
            }
        }
        worst
    }
}

/// `n` unitaries of order `d` on `C^{d^{n−1}}` with `AᵢAⱼ = ω·AⱼAᵢ` for `i < j`.
///
/// Base pair `(X_d, Z_dᴴ)` (shift, adjoint clock); each step maps the family
/// to `{X_d⊗Aᵢ} ∪ {Z_dᴴ⊗I}`. For `d = 2` this is `{X, Z}`, then
/// `{X⊗X, X⊗Z, Z⊗I}`, and so on.
pub fn omega_commuting_generators(d: usize, n: usize) -> Result<OmegaFamily> {
    if d < 2 || n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need d >= 2 and n >= 2, got d = {d}, n = {n}"
        )));
    }
    let x = shift_matrix(d);
    let zh = clock_matrix(d).adjoint();
    let mut members = vec![x.clone(), zh.clone()];
    let mut dim = d;
    for _ in 2..n {
        let mut next: Vec<ComplexMatrix> = members.iter().map(|a| kron(&x, a)).collect();
        next.push(kron(&zh, &identity(dim)));
        members = next;
        dim *= d;
    }
    let w = omega(d);
    let family = OmegaFamily {
        d,
        dim,
        members,
        omega: [w.re, w.im],
    };
    let residual = family.residual();
    if !Tolerance::default().accepts(residual, 1.0) {
        return Err(Error::HypothesisViolation {
            premise: "constructed family is not ω-commuting".into(),
            residual,
        });
    }
    Ok(family)
}

/// `(1/√d) Σⱼ ω^{(s−r)j} (Aᴴ)ʲ Bʲ`, which satisfies
/// `P_∞ V_{ω^r A}ᴴ V_{ω^s B} P_∞ = (1/√d)·(U ⊕ last block)·P_∞`.
pub fn crossing_unitary(
    a: &ComplexMatrix,
    r: i64,
    b: &ComplexMatrix,
    s: i64,
    d: usize,
    tol: &Tolerance,
) -> Result<ComplexMatrix> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("order d must be at least 2, got {d}")));
    }
    let n = ensure_square(a)?;
    crate::linalg::ensure_dim(b, n)?;
    let id = identity(n);
    let premises = [
        ("A is unitary", spectral_norm(&(a.adjoint() * a - &id))),
        ("B is unitary", spectral_norm(&(b.adjoint() * b - &id))),
        ("A^d = I", spectral_norm(&(matrix_power(a, d) - &id))),
        ("B^d = I", spectral_norm(&(matrix_power(b, d) - &id))),
        ("AB = ωBA", spectral_norm(&(a * b - b * a * omega_pow(d, 1)))),
    ];
    for (premise, residual) in premises {
        if !tol.accepts(residual, 1.0) {
            return Err(Error::HypothesisViolation {
                premise: premise.into(),
                residual,
            });
        }
    }
    let ah = a.adjoint();
    let mut u = zeros(n, n);
    let mut ahj = identity(n);
    let mut bj = identity(n);
    for j in 0..d as i64 {
        u += &ahj * &bj * omega_pow(d, (s - r) * j);
        ahj = &ahj * &ah;
        bj = &bj * b;
    }
    Ok(u.scale(1.0 / (d as f64).sqrt()))
}

/// `U` placed in the last diagonal block of a `d × d` block matrix.
pub fn embed_last_block(u: &ComplexMatrix, d: usize) -> ComplexMatrix {
    let n = u.nrows();
    let mut m = zeros(d * n, d * n);
    set_block(&mut m, d - 1, d - 1, u);
    m
}
