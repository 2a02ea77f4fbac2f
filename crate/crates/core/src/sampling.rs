//! Random test fixtures: Haar-distributed unitaries and random subspaces.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c64, ComplexMatrix, Subspace};

/// Matrix of i.i.d. standard complex Gaussians.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(re, im)
    })
}

/// Haar-random `n x n` unitary (QR of a Gaussian matrix with the phases of
/// `R`'s diagonal divided out).
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let qr = complex_gaussian(rng, n, n).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Uniformly random `k`-dimensional subspace of `C^n`.
pub fn random_subspace<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Subspace {
    let u = haar_unitary(rng, n);
    let basis = u.columns(0, k).into_owned();
    Subspace::from_orthonormal(basis, &Default::default()).expect("Haar columns are orthonormal")
}
