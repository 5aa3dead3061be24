//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.
//!
//! Jacobi is slower than tridiagonal QR for large matrices but delivers small
//! eigenvalues to high relative accuracy, which matters for the
//! pseudo-inverses and entropies built on top. Dense decompositions in this
//! crate stay small (fragment-range compressions, verification at small N).

use num_complex::Complex;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::{cr, Real};

/// Relative Hermiticity tolerance applied before decomposing.
pub const HERMITIAN_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order with the matching unitary of eigenvectors (as columns).
#[derive(Clone, Debug)]
pub struct HermitianEigen<T: Real = f64> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: ComplexMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    /// Decomposes `m` after checking it is Hermitian within
    /// [`HERMITIAN_TOL`] relative to its largest entry. The input is
    /// symmetrized first.
    pub fn new(m: &ComplexMatrix<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Shape(format!(
                "eigendecomposition needs a square matrix, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let scale = m.max_abs();
        let defect = m.hermitian_defect();
        if defect > T::tol(HERMITIAN_TOL) * scale.max(T::min_positive_value()) {
            return Err(Error::Domain(format!(
                "matrix is not Hermitian (defect {:e}, scale {:e})",
                defect, scale
            )));
        }
        Ok(jacobi(m.hermitian_part()))
    }

    /// Reassembles `V f(Λ) V†` for an arbitrary complex-valued spectral map.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> Complex<T>) -> ComplexMatrix<T> {
        let n = self.eigenvalues.len();
        let fv: Vec<Complex<T>> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex::new(T::zero(), T::zero());
                for k in 0..n {
                    if fv[k].re == T::zero() && fv[k].im == T::zero() {
                        continue;
                    }
                    acc = acc + v[(i, k)] * fv[k] * v[(j, k)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        self.reconstruct_with(cr)
    }

    pub fn max_abs_eigenvalue(&self) -> T {
        self.eigenvalues.iter().map(|l| l.abs()).fold(T::zero(), T::max)
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues.first().copied().unwrap_or(T::zero())
    }
}

fn off_diagonal_norm_sqr<T: Real>(a: &ComplexMatrix<T>) -> T {
    let n = a.rows();
    let mut s = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            s = s + a[(i, j)].norm_sqr();
        }
    }
    s + s
}

fn jacobi<T: Real>(mut a: ComplexMatrix<T>) -> HermitianEigen<T> {
    let n = a.rows();
    let mut v = ComplexMatrix::identity(n);
    for i in 0..n {
        a[(i, i)] = cr(a[(i, i)].re);
    }
    let total = a.frobenius_norm();
    let eps = T::epsilon();

    if total > T::zero() {
        for _ in 0..MAX_SWEEPS {
            let off = off_diagonal_norm_sqr(&a);
            if off.sqrt() <= eps * total {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    HermitianEigen {
        eigenvalues,
        eigenvectors,
    }
}

/// Annihilates `a[p][q]` with the unitary
/// `U = [[c, s], [-s e^{-iα}, c e^{-iα}]]` acting on columns `p, q`,
/// where `a[p][q] = |a[p][q]| e^{iα}`.
fn rotate<T: Real>(a: &mut ComplexMatrix<T>, v: &mut ComplexMatrix<T>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    if mag == T::zero() {
        return;
    }
    // negligible against both diagonal entries
    let g = mag * T::lit(100.0);
    if app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
        a[(p, q)] = Complex::new(T::zero(), T::zero());
        a[(q, p)] = Complex::new(T::zero(), T::zero());
        return;
    }
    let phase = apq / mag;
    let theta = (aqq - app) / (mag + mag);
    let t = {
        let denom = theta.abs() + (theta * theta + T::one()).sqrt();
        let t = T::one() / denom;
        if theta < T::zero() {
            -t
        } else {
            t
        }
    };
    let cth = T::one() / (t * t + T::one()).sqrt();
    let sth = t * cth;

    let e = phase.conj();
    let u_pp = cr(cth);
    let u_pq = cr(sth);
    let u_qp = e * (-sth);
    let u_qq = e * cth;

    let n = a.rows();
    // A <- A U (columns p, q)
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * u_pp + akq * u_qp;
        a[(k, q)] = akp * u_pq + akq * u_qq;
    }
    // A <- U† A (rows p, q)
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a[(p, q)] = Complex::new(T::zero(), T::zero());
    a[(q, p)] = Complex::new(T::zero(), T::zero());
    a[(p, p)] = cr(a[(p, p)].re);
    a[(q, q)] = cr(a[(q, q)].re);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * u_pp + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * u_qq;
    }
}
