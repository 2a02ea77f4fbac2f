//! n-qubit Pauli operators in the symplectic representation.
//!
//! A [`PauliOperator`] is `i^phase · ⊗_q X^{x_q} Z^{z_q}` with the phase
//! tracked mod 4. Under this convention `Y = i·X·Z`. Qubit 0 is the leftmost
//! tensor factor, i.e. the most significant bit of a computational basis
//! index.
//!
//! Bit-level arithmetic is exact and unbounded in `n`; dense realizations
//! are capped at [`DENSE_QUBIT_CAP`] qubits.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::isoclinic::{isoclinic_family_check, FamilyReport};
use crate::kl::{kl_general_check, range_projections, KlWitness};
use crate::linalg::{c64, identity, zeros, ComplexMatrix, Tolerance};

pub const DENSE_QUBIT_CAP: usize = 12;

const WORD: usize = 64;

fn words(n: usize) -> usize {
    n.div_ceil(WORD)
}

/// `i^k` for `k` mod 4.
pub fn i_pow(k: u8) -> Complex64 {
    match k % 4 {
        0 => c64(1.0, 0.0),
        1 => c64(0.0, 1.0),
        2 => c64(-1.0, 0.0),
        _ => c64(0.0, -1.0),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    phase: u8,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        PauliOperator {
            n,
            phase: 0,
            x: vec![0; words(n)],
            z: vec![0; words(n)],
        }
    }

    /// Builds an operator from per-qubit bits and an `i^phase` prefactor.
    pub fn from_bits(phase: u8, x_bits: &[bool], z_bits: &[bool]) -> Result<Self> {
        if x_bits.len() != z_bits.len() {
            return Err(Error::SizeMismatch {
                left: x_bits.len(),
                right: z_bits.len(),
            });
        }
        let mut p = Self::identity(x_bits.len());
        p.phase = phase % 4;
        for (q, (&xb, &zb)) in x_bits.iter().zip(z_bits).enumerate() {
            p.set_x(q, xb);
            p.set_z(q, zb);
        }
        Ok(p)
    }

    /// `X`, `Y` or `Z` on a single qubit of an `n`-qubit register.
    pub fn single(n: usize, qubit: usize, letter: char) -> Result<Self> {
        if qubit >= n {
            return Err(Error::InvalidArgument(format!(
                "qubit {qubit} out of range for {n} qubits"
            )));
        }
        let mut p = Self::identity(n);
        p.apply_letter(qubit, letter, 0)?;
        Ok(p)
    }

    /// Parses `[phase]body` with phase in `{+, -, +i, -i}` and body in
    /// `{I, X, Y, Z}+`, e.g. `"-iXYZ"`.
    pub fn parse(s: &str) -> Result<Self> {
        let (prefix, body_start) = if let Some(rest) = s.strip_prefix("+i") {
            (1u8, s.len() - rest.len())
        } else if let Some(rest) = s.strip_prefix("-i") {
            (3, s.len() - rest.len())
        } else if s.starts_with('+') {
            (0, 1)
        } else if s.starts_with('-') {
            (2, 1)
        } else {
            (0, 0)
        };
        let body = &s[body_start..];
        if body.is_empty() {
            return Err(Error::Parse {
                position: body_start,
                message: "expected at least one of I, X, Y, Z".into(),
            });
        }
        let n = body.chars().count();
        let mut p = Self::identity(n);
        p.phase = prefix;
        for (q, ch) in body.chars().enumerate() {
            p.apply_letter(q, ch, body_start + q)?;
        }
        Ok(p)
    }

    fn apply_letter(&mut self, q: usize, ch: char, position: usize) -> Result<()> {
        match ch {
            'I' => {}
            'X' => self.set_x(q, true),
            'Z' => self.set_z(q, true),
            'Y' => {
                self.set_x(q, true);
                self.set_z(q, true);
                self.phase = (self.phase + 1) % 4;
            }
            other => {
                return Err(Error::Parse {
                    position,
                    message: format!("unexpected character {other:?}"),
                })
            }
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Exponent of `i` in front of `⊗ X^x Z^z`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn x_bit(&self, q: usize) -> bool {
        (self.x[q / WORD] >> (q % WORD)) & 1 == 1
    }

    pub fn z_bit(&self, q: usize) -> bool {
        (self.z[q / WORD] >> (q % WORD)) & 1 == 1
    }

    fn set_x(&mut self, q: usize, v: bool) {
        let m = 1u64 << (q % WORD);
        if v {
            self.x[q / WORD] |= m;
        } else {
            self.x[q / WORD] &= !m;
        }
    }

    fn set_z(&mut self, q: usize, v: bool) {
        let m = 1u64 << (q % WORD);
        if v {
            self.z[q / WORD] |= m;
        } else {
            self.z[q / WORD] &= !m;
        }
    }

    pub fn x_bits(&self) -> Vec<bool> {
        (0..self.n).map(|q| self.x_bit(q)).collect()
    }

    pub fn z_bits(&self) -> Vec<bool> {
        (0..self.n).map(|q| self.z_bit(q)).collect()
    }

    /// True when all bits vanish (the operator is `i^phase · I`).
    pub fn is_scalar(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    fn y_count(&self) -> u32 {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub fn is_hermitian(&self) -> bool {
        (self.phase as u32 + self.y_count()).is_multiple_of(2)
    }

    fn check_size(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::SizeMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    /// Product `self · other`: bits XOR, phase picks up a sign for every
    /// qubit where a `Z` of `self` is moved past an `X` of `other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_size(other)?;
        let swaps: u32 = self
            .z
            .iter()
            .zip(&other.x)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        let phase = ((self.phase as u32 + other.phase as u32 + 2 * swaps) % 4) as u8;
        Ok(PauliOperator {
            n: self.n,
            phase,
            x: self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect(),
            z: self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect(),
        })
    }

    /// Symplectic form `Σ (xᵢz'ᵢ + zᵢx'ᵢ)` is even.
    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.check_size(other)?;
        let form: u32 = (0..self.x.len())
            .map(|w| ((self.x[w] & other.z[w]) ^ (self.z[w] & other.x[w])).count_ones())
            .sum();
        Ok(form.is_multiple_of(2))
    }

    /// Adjoint, which is also the group inverse.
    pub fn adjoint(&self) -> Self {
        // (i^a X^x Z^z)† = i^{-a} Z^z X^x = i^{-a} (-1)^{|x∧z|} X^x Z^z
        let phase = ((4 - self.phase as u32 % 4) + 2 * self.y_count()) % 4;
        PauliOperator {
            phase: phase as u8,
            ..self.clone()
        }
    }

    /// Multiplies by `i^k`.
    pub fn with_phase_shift(&self, k: u8) -> Self {
        PauliOperator {
            phase: (self.phase + k) % 4,
            ..self.clone()
        }
    }

    fn index_mask(bits: &[u64], n: usize) -> usize {
        (0..n).fold(0usize, |acc, q| {
            let b = (bits[q / WORD] >> (q % WORD)) & 1;
            acc | ((b as usize) << (n - 1 - q))
        })
    }

    /// Sparse action on computational basis states: column `b` has its only
    /// nonzero entry at row `b ^ flip`, equal to `i^phase · (-1)^{|sign & b|}`.
    fn monomial(&self) -> (usize, usize) {
        (
            Self::index_mask(&self.x, self.n),
            Self::index_mask(&self.z, self.n),
        )
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        self.to_matrix_capped(DENSE_QUBIT_CAP)
    }

    pub fn to_matrix_capped(&self, cap: usize) -> Result<ComplexMatrix> {
        if self.n > cap {
            return Err(Error::TooLarge { n: self.n, cap });
        }
        let dim = 1usize << self.n;
        let (flip, sign) = self.monomial();
        let base = i_pow(self.phase);
        let mut m = zeros(dim, dim);
        for b in 0..dim {
            let v = if (sign & b).count_ones() % 2 == 0 { base } else { -base };
            m[(b ^ flip, b)] = v;
        }
        Ok(m)
    }

    /// `m · self` for a dense `m`, using the monomial structure.
    fn right_multiply(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let (flip, sign) = self.monomial();
        let base = i_pow(self.phase);
        let mut out = zeros(m.nrows(), m.ncols());
        for b in 0..m.ncols() {
            let v = if (sign & b).count_ones() % 2 == 0 { base } else { -base };
            out.set_column(b, &(m.column(b ^ flip) * v));
        }
        out
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // each Y letter stands for i·XZ, so the printed prefix is i^{phase - #Y}
        let shown = (self.phase as i64 - self.y_count() as i64).rem_euclid(4);
        let prefix = ["+", "+i", "-", "-i"][shown as usize];
        f.write_str(prefix)?;
        for q in 0..self.n {
            let ch = match (self.x_bit(q), self.z_bit(q)) {
                (false, false) => 'I',
                (true, false) => 'X',
                (false, true) => 'Z',
                (true, true) => 'Y',
            };
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for PauliOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PauliOperator::parse(s)
    }
}

/// Parses a comma-separated list such as `"ZZI,IZZ"`.
pub fn parse_pauli_list(s: &str) -> Result<Vec<PauliOperator>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(PauliOperator::parse)
        .collect()
}

/// Why a generator set does not define a stabilizer group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum GroupDefect {
    SizeMismatch { index: usize, expected: usize, found: usize },
    NonCommuting { i: usize, j: usize },
    /// Generator `index` is a product of earlier generators.
    Dependent { index: usize },
    /// `-I` is generated; `index` is the generator that closes the product.
    ContainsMinusIdentity { index: usize },
}

impl fmt::Display for GroupDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupDefect::SizeMismatch { index, expected, found } => write!(
                f,
                "generator {index} acts on {found} qubits, expected {expected}"
            ),
            GroupDefect::NonCommuting { i, j } => {
                write!(f, "generators {i} and {j} anti-commute")
            }
            GroupDefect::Dependent { index } => {
                write!(f, "generator {index} is a product of earlier generators")
            }
            GroupDefect::ContainsMinusIdentity { index } => {
                write!(f, "-I is generated (detected at generator {index})")
            }
        }
    }
}

/// Abelian Pauli subgroup without `-I`, stored with independent generators.
#[derive(Debug, Clone)]
pub struct StabilizerGroup {
    n: usize,
    generators: Vec<PauliOperator>,
    // echelon rows (pivot bit, operator) over the 2n symplectic bits
    echelon: Vec<(usize, PauliOperator)>,
}

fn lowest_bit(p: &PauliOperator) -> Option<usize> {
    let wn = p.x.len();
    for (w, &word) in p.x.iter().chain(&p.z).enumerate() {
        if word != 0 {
            let bit = word.trailing_zeros() as usize;
            return Some(if w < wn {
                w * WORD + bit
            } else {
                p.n + (w - wn) * WORD + bit
            });
        }
    }
    None
}

fn has_bit(p: &PauliOperator, bit: usize) -> bool {
    if bit < p.n {
        p.x_bit(bit)
    } else {
        p.z_bit(bit - p.n)
    }
}

/// Reduces `p` by the echelon rows, returning the remainder `p · Π rows`.
fn reduce(p: &PauliOperator, echelon: &[(usize, PauliOperator)]) -> PauliOperator {
    let mut r = p.clone();
    for (pivot, row) in echelon {
        if has_bit(&r, *pivot) {
            r = r.mul(row).expect("sizes checked");
        }
    }
    r
}

impl StabilizerGroup {
    pub fn new(n: usize, generators: Vec<PauliOperator>) -> Result<Self> {
        for (index, g) in generators.iter().enumerate() {
            if g.num_qubits() != n {
                return Err(Error::InvalidGroup(GroupDefect::SizeMismatch {
                    index,
                    expected: n,
                    found: g.num_qubits(),
                }));
            }
            // a non-Hermitian Pauli squares to -I
            if !g.is_hermitian() {
                return Err(Error::InvalidGroup(GroupDefect::ContainsMinusIdentity { index }));
            }
        }
        for i in 0..generators.len() {
            for j in i + 1..generators.len() {
                if !generators[i].commutes(&generators[j])? {
                    return Err(Error::InvalidGroup(GroupDefect::NonCommuting { i, j }));
                }
            }
        }
        let mut echelon: Vec<(usize, PauliOperator)> = Vec::new();
        for (index, g) in generators.iter().enumerate() {
            let r = reduce(g, &echelon);
            match lowest_bit(&r) {
                Some(pivot) => echelon.push((pivot, r)),
                None if r.phase == 0 => {
                    return Err(Error::InvalidGroup(GroupDefect::Dependent { index }))
                }
                None => {
                    return Err(Error::InvalidGroup(GroupDefect::ContainsMinusIdentity { index }))
                }
            }
        }
        Ok(StabilizerGroup {
            n,
            generators,
            echelon,
        })
    }

    /// Parses a comma-separated generator list; `n` is taken from the first
    /// generator.
    pub fn parse(s: &str) -> Result<Self> {
        let gens = parse_pauli_list(s)?;
        let n = gens.first().map(|g| g.num_qubits()).ok_or_else(|| Error::Parse {
            position: 0,
            message: "empty generator list".into(),
        })?;
        Self::new(n, gens)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    /// Number of encoded qubits, `n - #generators`.
    pub fn logical_qubits(&self) -> usize {
        self.n - self.generators.len()
    }

    pub fn classify(&self, e: &PauliOperator) -> Result<Classification> {
        classify_error(self, e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ErrorClass {
    /// In `⟨S, iI⟩`: acts on the code as a phase.
    StabilizerCoset,
    /// In `N(S) \ ⟨S, iI⟩`: preserves the code, acts non-trivially on it.
    Logical,
    /// Outside `N(S)`: anti-commutes with some generator.
    Detectable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub class: ErrorClass,
    /// For [`ErrorClass::StabilizerCoset`]: `k` with `e = i^k · s`, `s ∈ S`.
    pub phase: Option<u8>,
}

pub fn classify_error(s: &StabilizerGroup, e: &PauliOperator) -> Result<Classification> {
    if e.num_qubits() != s.n {
        return Err(Error::SizeMismatch {
            left: s.n,
            right: e.num_qubits(),
        });
    }
    for g in &s.generators {
        if !g.commutes(e)? {
            return Ok(Classification {
                class: ErrorClass::Detectable,
                phase: None,
            });
        }
    }
    let r = reduce(e, &s.echelon);
    if r.is_scalar() {
        // e · s = i^k I with s ∈ S Hermitian, hence e = i^k s
        Ok(Classification {
            class: ErrorClass::StabilizerCoset,
            phase: Some(r.phase),
        })
    } else {
        Ok(Classification {
            class: ErrorClass::Logical,
            phase: None,
        })
    }
}

/// Code projection `Π_g ½(I + g)` over the generators.
pub fn stabilizer_projection(s: &StabilizerGroup) -> Result<ComplexMatrix> {
    if s.n > DENSE_QUBIT_CAP {
        return Err(Error::TooLarge {
            n: s.n,
            cap: DENSE_QUBIT_CAP,
        });
    }
    let dim = 1usize << s.n;
    let mut p = identity(dim);
    for g in &s.generators {
        p = (&p + g.right_multiply(&p)).scale(0.5);
    }
    Ok(p)
}

#[derive(Debug, Clone)]
pub struct StabilizerIsoclinicReport {
    pub isoclinic: bool,
    pub family: Option<FamilyReport>,
    /// Class of `EᵢᴴEⱼ`, row-major.
    pub pair_classes: DMatrix<ErrorClassCell>,
    /// Pairs whose witness unitary is not a scalar on the code.
    pub kl_nontrivial_pairs: Vec<(usize, usize)>,
    pub witness: KlWitness,
    pub consistent: bool,
    /// Pairs where the class and the witness disagree.
    pub inconsistent_pairs: Vec<(usize, usize)>,
}

/// `ErrorClass` wrapper usable as a `DMatrix` scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ErrorClassCell(pub ErrorClass);

/// Checks that the ranges of `Eᵢ P_C` are isoclinic and that the classes of
/// the products `EᵢᴴEⱼ` match the generalized witnesses: detectable products
/// have `λ = 0`, stabilizer products a scalar unitary, logical products a
/// non-scalar one.
pub fn verify_stabilizer_isoclinic(
    s: &StabilizerGroup,
    errors: &[PauliOperator],
    tol: &Tolerance,
) -> Result<StabilizerIsoclinicReport> {
    for e in errors {
        if e.num_qubits() != s.n {
            return Err(Error::SizeMismatch {
                left: s.n,
                right: e.num_qubits(),
            });
        }
    }
    if errors.is_empty() {
        return Err(Error::InvalidArgument("no error operators given".into()));
    }
    let p_c = stabilizer_projection(s)?;
    let dense: Vec<ComplexMatrix> = errors.iter().map(|e| e.to_matrix()).collect::<Result<_>>()?;

    let ranges = range_projections(&dense, &p_c, tol)?;
    let family = if ranges.len() >= 2 {
        Some(isoclinic_family_check(&ranges, tol)?)
    } else {
        None
    };
    let isoclinic = family.as_ref().is_none_or(|f| f.verdict);

    let witness = kl_general_check(&dense, &p_c, tol)?;
    let m = errors.len();
    let mut pair_classes = DMatrix::from_element(m, m, ErrorClassCell(ErrorClass::StabilizerCoset));
    let mut kl_nontrivial_pairs = Vec::new();
    let mut inconsistent_pairs = Vec::new();
    let threshold = tol.threshold(1.0);
    for i in 0..m {
        for j in 0..m {
            let product = errors[i].adjoint().mul(&errors[j])?;
            let class = classify_error(s, &product)?.class;
            pair_classes[(i, j)] = ErrorClassCell(class);
            let lambda_zero = witness.lambdas[(i, j)].norm() <= threshold;
            let nontrivial = witness.nontriviality(i, j) > threshold;
            if nontrivial && !lambda_zero {
                kl_nontrivial_pairs.push((i, j));
            }
            let agrees = match class {
                ErrorClass::Detectable => lambda_zero,
                ErrorClass::Logical => !lambda_zero && nontrivial,
                ErrorClass::StabilizerCoset => !lambda_zero && !nontrivial,
            };
            if !agrees {
                inconsistent_pairs.push((i, j));
            }
        }
    }
    Ok(StabilizerIsoclinicReport {
        isoclinic,
        family,
        pair_classes,
        kl_nontrivial_pairs,
        witness,
        consistent: inconsistent_pairs.is_empty(),
        inconsistent_pairs,
    })
}
