//! Seeded random states and observables for randomized checks.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::linalg::ComplexMatrix;
use crate::scalar::c;
use crate::DensityMatrix;

fn gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix<f64> {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        c(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        )
    })
}

/// `A A† / Tr` with `A` a `d × rank` complex Gaussian matrix.
pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> Result<DensityMatrix<f64>> {
    let a = gaussian(d, rank.clamp(1, d), rng);
    let p = &a * &a.adjoint();
    let tr = p.trace().re;
    DensityMatrix::new(p.scale(1.0 / tr))
}

/// A state of rank `rank` whose support lies inside the range of `basis` (`d × m`).
pub fn random_density_in<R: Rng + ?Sized>(
    basis: &ComplexMatrix<f64>,
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix<f64>> {
    let inner = random_density(basis.cols(), rank, rng)?;
    DensityMatrix::new(inner.matrix().conjugate_by(basis).hermitian_part())
}

/// Hermitian matrix with Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix<f64> {
    gaussian(d, d, rng).hermitian_part()
}
