use num_complex::Complex;

use super::eigen::HermitianEigen;
use super::matrix::{check_entries, ComplexMatrix};
use crate::error::{Error, Result};
use crate::scalar::{c, cr, Real};

/// Default relative cutoff below which eigenvalues are treated as zero by
/// inverse-type spectral functions (Moore–Penrose convention).
pub const PINV_TOL: f64 = 1e-10;

/// Kronecker product `a ⊗ b`.
pub fn kron<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let rows = a.rows().checked_mul(b.rows());
    let cols = a.cols().checked_mul(b.cols());
    let (rows, cols) = match (rows, cols) {
        (Some(r), Some(c)) => (r, c),
        _ => return Err(Error::Size("Kronecker product dimension overflow".into())),
    };
    check_entries(rows, cols)?;
    let (br, bc) = (b.rows(), b.cols());
    Ok(ComplexMatrix::from_fn(rows, cols, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    }))
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all<T: Real>(factors: &[ComplexMatrix<T>]) -> Result<ComplexMatrix<T>> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| Error::Shape("empty Kronecker product".into()))?;
    rest.iter().try_fold(first.clone(), |acc, f| kron(&acc, f))
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Offsets into the full index space of every multi-index over `factors`.
fn offsets(dims: &[usize], strides: &[usize], factors: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &f in factors {
        let mut next = Vec::with_capacity(out.len() * dims[f]);
        for &o in &out {
            for i in 0..dims[f] {
                next.push(o + i * strides[f]);
            }
        }
        out = next;
    }
    out
}

/// Traces out every factor not listed in `keep`. Kept factors retain their
/// order in `dims`; `keep` may be given in any order but must not repeat.
/// An empty `keep` yields the 1×1 matrix holding the full trace.
pub fn partial_trace<T: Real>(m: &ComplexMatrix<T>, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix<T>> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.rows() != total {
        return Err(Error::Shape(format!(
            "operator of size {}x{} does not act on a space of dimension {total}",
            m.rows(),
            m.cols()
        )));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() || kept.iter().any(|&k| k >= dims.len()) {
        return Err(Error::Shape(format!(
            "invalid kept factor set {keep:?} for {} factors",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !kept.contains(i)).collect();
    let st = strides(dims);
    let ko = offsets(dims, &st, &kept);
    let to = offsets(dims, &st, &traced);
    let n = ko.len();
    let mut out = ComplexMatrix::zeros(n, n);
    for (a, &oa) in ko.iter().enumerate() {
        for (b, &ob) in ko.iter().enumerate() {
            let mut acc = Complex::new(T::zero(), T::zero());
            for &t in &to {
                acc = acc + m[(oa + t, ob + t)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Applies a real spectral function to a Hermitian matrix.
///
/// With `pinv_tol = Some(tol)`, eigenvalues with `|λ| <= tol · max|λ|` are
/// mapped to zero instead of `f(λ)`; this is how inverse-type functions get
/// Moore–Penrose semantics.
pub fn herm_fn<T: Real>(m: &ComplexMatrix<T>, f: impl Fn(T) -> T, pinv_tol: Option<T>) -> Result<ComplexMatrix<T>> {
    let eig = HermitianEigen::new(m)?;
    Ok(spectral_apply(&eig, f, pinv_tol))
}

/// Like [`herm_fn`] but reuses an existing decomposition.
pub fn spectral_apply<T: Real>(eig: &HermitianEigen<T>, f: impl Fn(T) -> T, pinv_tol: Option<T>) -> ComplexMatrix<T> {
    let cut = pinv_tol.map(|tol| tol * eig.max_abs_eigenvalue());
    eig.reconstruct_with(|l| match cut {
        Some(cut) if l.abs() <= cut => cr(T::zero()),
        _ => cr(f(l)),
    })
}

/// Positive square root; tiny negative round-off eigenvalues map to zero.
pub fn sqrt_psd<T: Real>(m: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    herm_fn(m, |l| l.max(T::zero()).sqrt(), None)
}

/// Moore–Penrose inverse square root with the default cutoff.
pub fn inv_sqrt_psd<T: Real>(m: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    herm_fn(m, |l| T::one() / l.max(T::zero()).sqrt(), Some(T::tol(PINV_TOL)))
}

/// Projector onto the eigenvectors with `|λ| > tol · max|λ|`.
pub fn support_projector<T: Real>(m: &ComplexMatrix<T>, tol: T) -> Result<ComplexMatrix<T>> {
    herm_fn(m, |_| T::one(), Some(tol))
}

/// `exp(-i h t)` for Hermitian `h`.
pub fn unitary_exp<T: Real>(h: &ComplexMatrix<T>, t: T) -> Result<ComplexMatrix<T>> {
    let eig = HermitianEigen::new(h)?;
    Ok(eig.reconstruct_with(|l| {
        let phase = -l * t;
        c(phase.cos(), phase.sin())
    }))
}

/// Sum of singular values.
pub fn trace_norm<T: Real>(m: &ComplexMatrix<T>) -> Result<T> {
    if !m.is_square() {
        return Err(Error::Shape("trace norm needs a square matrix".into()));
    }
    // Hermitian input: |λ| summed directly, which is more accurate than
    // going through m†m.
    let scale = m.max_abs();
    if m.hermitian_defect() <= T::epsilon() * T::lit(16.0) * scale {
        let eig = HermitianEigen::new(&m.hermitian_part())?;
        return Ok(eig.eigenvalues.iter().map(|l| l.abs()).sum());
    }
    let gram = &m.adjoint() * m;
    let eig = HermitianEigen::new(&gram.hermitian_part())?;
    Ok(eig.eigenvalues.iter().map(|l| l.max(T::zero()).sqrt()).sum())
}
