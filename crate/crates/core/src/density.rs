use std::ops::Deref;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianEigen};
use crate::scalar::Real;

/// Trace tolerance accepted by [`DensityMatrix::new`].
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted by [`DensityMatrix::check_psd`].
pub const PSD_FLOOR: f64 = 1e-10;

/// Hermitian, unit-trace, positive semidefinite operator.
///
/// Construction checks Hermiticity and trace; positivity needs an
/// eigendecomposition and is checked on demand with [`Self::check_psd`] so
/// that large joint states can be built cheaply.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: Real = f64>(ComplexMatrix<T>);

impl<T: Real> DensityMatrix<T> {
    pub fn new(m: ComplexMatrix<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Shape("density matrix must be square".into()));
        }
        let scale = m.max_abs().max(T::one());
        if m.hermitian_defect() > T::tol(crate::linalg::HERMITIAN_TOL) * scale {
            return Err(Error::Domain("density matrix must be Hermitian".into()));
        }
        let tr = m.trace();
        if (tr.re - T::one()).abs() > T::tol(TRACE_TOL) || tr.im.abs() > T::tol(TRACE_TOL) {
            return Err(Error::Domain(format!("density matrix trace is {tr}, expected 1")));
        }
        Ok(Self(m.hermitian_part()))
    }

    /// Like [`Self::new`] but also verifies positivity.
    pub fn new_checked(m: ComplexMatrix<T>) -> Result<Self> {
        let d = Self::new(m)?;
        d.check_psd()?;
        Ok(d)
    }

    /// `|ψ><ψ|` for a normalized vector.
    pub fn pure(psi: &[Complex<T>]) -> Result<Self> {
        Self::new(ComplexMatrix::projector(psi))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim).scale(T::one() / T::from_count(dim)))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.0
    }

    pub fn eigen(&self) -> HermitianEigen<T> {
        HermitianEigen::new(&self.0).expect("density matrices are Hermitian")
    }

    pub fn check_psd(&self) -> Result<()> {
        let min = self.eigen().min_eigenvalue();
        if min < -T::tol(PSD_FLOOR) {
            return Err(Error::Domain(format!("density matrix has negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> T {
        self.0.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }
}

impl<T: Real> Deref for DensityMatrix<T> {
    type Target = ComplexMatrix<T>;

    fn deref(&self) -> &ComplexMatrix<T> {
        &self.0
    }
}

impl<T: Real> AsRef<ComplexMatrix<T>> for DensityMatrix<T> {
    fn as_ref(&self) -> &ComplexMatrix<T> {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cr;

    #[test]
    fn validates_trace_and_hermiticity() {
        assert!(DensityMatrix::new(ComplexMatrix::<f64>::identity(2)).is_err());
        let m = ComplexMatrix::from_vec(2, 2, vec![cr(0.5), cr(0.5), cr(0.0), cr(0.5)]).unwrap();
        assert!(DensityMatrix::new(m).is_err());
        let neg = ComplexMatrix::<f64>::from_diag(&[1.5, -0.5]);
        assert!(DensityMatrix::new(neg.clone()).is_ok());
        assert!(DensityMatrix::new_checked(neg).is_err());
    }

    #[test]
    fn purity_of_pure_and_mixed() {
        let s = 0.5f64.sqrt();
        let plus = DensityMatrix::pure(&[cr(s), cr(s)]).unwrap();
        assert!((plus.purity() - 1.0).abs() < 1e-15);
        assert!((DensityMatrix::<f64>::maximally_mixed(2).purity() - 0.5).abs() < 1e-15);
    }
}
