//! Kraus-form channels and the fragment encoding channels `Λ_k`.
//!
//! `Λ_k` maps a system state to the state of the first `k` environment sites
//! after the premeasurement. With branch vectors `|v_r> = ⊗_{l≤k} |Ξ^r_l>` its
//! Kraus operators are `E^(r) = |v_r><r|`, so `Λ_k(x) = Σ_r γ_rr |v_r><v_r|`.
//!
//! Besides the dense Kraus form, a channel can be [compressed](Compressed)
//! onto the span of its Kraus ranges. Since every output of the channel lives
//! in that span, the Petz map and all relative entropies can be evaluated
//! there exactly, and the span is small (at most `dim_in · #Kraus`) even when
//! the output space is not. Compressed encoding channels are built from
//! branch overlaps alone and never touch `2^k`-dimensional vectors.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{check_entries, inv_sqrt_psd, kron, partial_trace, ComplexMatrix, HermitianEigen};
use crate::model::BranchRecord;
use crate::scalar::{c, cr, Real};

/// Completeness tolerance `‖Σ K†K − I‖_max`.
pub const TP_TOL: f64 = 1e-10;
/// Most negative Choi eigenvalue accepted as completely positive.
pub const CHOI_FLOOR: f64 = 1e-10;
/// Relative cutoff on the Kraus-range Gram spectrum.
pub const RANGE_TOL: f64 = 1e-13;

/// Linear map `ρ ↦ Σ_r K_r ρ K_r†`.
#[derive(Clone, Debug)]
pub struct QuantumChannel<T: Real = f64> {
    kraus: Vec<ComplexMatrix<T>>,
    dim_in: usize,
    dim_out: usize,
}

impl<T: Real> QuantumChannel<T> {
    /// Validates shapes and trace preservation.
    pub fn new(kraus: Vec<ComplexMatrix<T>>) -> Result<Self> {
        let ch = Self::from_kraus_unchecked(kraus)?;
        let defect = ch.completeness_defect();
        if defect > T::tol(TP_TOL) {
            return Err(Error::Domain(format!(
                "Kraus operators are not complete (defect {defect:e})"
            )));
        }
        Ok(ch)
    }

    /// Validates shapes only. Useful for exercising the failure paths of
    /// trace-preservation checks.
    pub fn from_kraus_unchecked(kraus: Vec<ComplexMatrix<T>>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::Shape("channel needs at least one Kraus operator".into()))?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        if kraus.iter().any(|k| k.rows() != dim_out || k.cols() != dim_in) {
            return Err(Error::Shape("Kraus operators differ in shape".into()));
        }
        Ok(Self { kraus, dim_in, dim_out })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            kraus: vec![ComplexMatrix::identity(dim)],
            dim_in: dim,
            dim_out: dim,
        }
    }

    pub fn kraus(&self) -> &[ComplexMatrix<T>] {
        &self.kraus
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    /// `max |Σ K†K − I|`.
    pub fn completeness_defect(&self) -> T {
        let sum = self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.dim_in, self.dim_in), |acc, k| {
                &acc + &(&k.adjoint() * k)
            });
        sum.max_abs_diff(&ComplexMatrix::identity(self.dim_in))
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.completeness_defect() <= T::tol(TP_TOL)
    }

    /// Applies the Kraus sum to an arbitrary operator.
    pub fn apply_operator(&self, m: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        if m.rows() != self.dim_in || m.cols() != self.dim_in {
            return Err(Error::Shape(format!(
                "channel input dimension is {}, got {}x{}",
                self.dim_in,
                m.rows(),
                m.cols()
            )));
        }
        check_entries(self.dim_out, self.dim_out)?;
        Ok(self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.dim_out, self.dim_out), |acc, k| {
                &acc + &m.conjugate_by(k)
            }))
    }

    pub fn apply(&self, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
        DensityMatrix::new(self.apply_operator(rho.matrix())?)
    }

    /// Heisenberg picture `X ↦ Σ_r K_r† X K_r`.
    pub fn apply_adjoint(&self, obs: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        if obs.rows() != self.dim_out || obs.cols() != self.dim_out {
            return Err(Error::Shape(format!(
                "channel output dimension is {}, got {}x{}",
                self.dim_out,
                obs.rows(),
                obs.cols()
            )));
        }
        Ok(self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.dim_in, self.dim_in), |acc, k| {
                &acc + &(&k.adjoint() * &(obs * k))
            }))
    }

    /// Choi matrix `J = Σ_ij |i><j| ⊗ Λ(|i><j|)` (input factor first), so that
    /// tracing out the output leaves `I_in` for a trace-preserving channel.
    pub fn choi(&self) -> Result<ComplexMatrix<T>> {
        let n = self.dim_in * self.dim_out;
        check_entries(n, n)?;
        let mut j = ComplexMatrix::zeros(n, n);
        for a in 0..self.dim_in {
            for b in 0..self.dim_in {
                let mut unit = ComplexMatrix::zeros(self.dim_in, self.dim_in);
                unit[(a, b)] = cr(T::one());
                let block = self.apply_operator(&unit)?;
                for p in 0..self.dim_out {
                    for q in 0..self.dim_out {
                        j[(a * self.dim_out + p, b * self.dim_out + q)] = block[(p, q)];
                    }
                }
            }
        }
        Ok(j)
    }

    pub fn choi_min_eigenvalue(&self) -> Result<T> {
        Ok(HermitianEigen::new(&self.choi()?)?.min_eigenvalue())
    }

    /// Complete positivity via the Choi spectrum.
    pub fn is_completely_positive(&self) -> Result<bool> {
        Ok(self.choi_min_eigenvalue()? >= -T::tol(CHOI_FLOOR))
    }

    /// Compression onto the span of the Kraus ranges, with a dense basis.
    pub fn compress(&self) -> Result<Compressed<T>> {
        let n = self.kraus.len();
        let cols: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..self.dim_in).map(move |i| (a, i))).collect();
        let vectors: Vec<Vec<Complex<T>>> = cols.iter().map(|&(a, i)| self.kraus[a].col(i)).collect();
        let gram = gram_of(&vectors);
        let mut out = Compressed::from_gram(&gram, &cols, n, self.dim_in)?;
        out.attach_basis(&vectors)?;
        Ok(out)
    }
}

fn gram_of<T: Real>(vectors: &[Vec<Complex<T>>]) -> ComplexMatrix<T> {
    let p = vectors.len();
    ComplexMatrix::from_fn(p, p, |a, b| crate::linalg::inner(&vectors[a], &vectors[b]))
}

/// A channel restricted to the span `W` of its Kraus ranges.
///
/// With `W` an isometry onto that span, `coords[r] = W† K_r`, so that
/// `Λ(ρ) = W Λ̂(ρ) W†` and `Λ†(Y) = Λ̂†(W† Y W)`.
#[derive(Clone, Debug)]
pub struct Compressed<T: Real = f64> {
    coords: Vec<ComplexMatrix<T>>,
    dim_in: usize,
    dim_out: usize,
    /// Generator weights: `W = C · mix`, with `C` the generator columns.
    mix: ComplexMatrix<T>,
    basis: Option<ComplexMatrix<T>>,
}

impl<T: Real> Compressed<T> {
    /// Builds the compression from the Gram matrix of generator columns.
    ///
    /// Generator `p` is column `cols[p].1` of Kraus operator `cols[p].0`;
    /// every Kraus column not listed must vanish.
    pub fn from_gram(gram: &ComplexMatrix<T>, cols: &[(usize, usize)], n_kraus: usize, dim_in: usize) -> Result<Self> {
        if gram.rows() != cols.len() || !gram.is_square() {
            return Err(Error::Shape("Gram matrix does not match the generator list".into()));
        }
        let eig = HermitianEigen::new(gram)?;
        let cut = T::tol(RANGE_TOL) * eig.max_abs_eigenvalue();
        let kept: Vec<usize> = (0..eig.eigenvalues.len())
            .filter(|&q| eig.eigenvalues[q] > cut)
            .collect();
        let m = kept.len().max(1);
        let p = cols.len();
        // mix[:, q] = u_q / sqrt(g_q)
        let mut mix = ComplexMatrix::zeros(p, m);
        for (qi, &q) in kept.iter().enumerate() {
            let inv = T::one() / eig.eigenvalues[q].sqrt();
            for a in 0..p {
                mix[(a, qi)] = eig.eigenvectors[(a, q)] * inv;
            }
        }
        // coords[b][q, j] = Σ_p conj(mix[p, q]) G[p, p'] with p' ↔ (b, j)
        let proj = &mix.adjoint() * gram;
        let mut coords = vec![ComplexMatrix::zeros(m, dim_in); n_kraus];
        for (pp, &(b, j)) in cols.iter().enumerate() {
            if b >= n_kraus || j >= dim_in {
                return Err(Error::Shape(format!("generator ({b}, {j}) outside the Kraus set")));
            }
            for q in 0..m {
                coords[b][(q, j)] = proj[(q, pp)];
            }
        }
        Ok(Self {
            coords,
            dim_in,
            dim_out: 0,
            mix,
            basis: None,
        })
    }

    /// Attaches the dense isometry `W` given the generator vectors.
    pub fn attach_basis(&mut self, vectors: &[Vec<Complex<T>>]) -> Result<()> {
        let dim_out = vectors.first().map(Vec::len).unwrap_or(0);
        if vectors.len() != self.mix.rows() || vectors.iter().any(|v| v.len() != dim_out) || dim_out == 0 {
            return Err(Error::Shape("generator vectors do not match the compression".into()));
        }
        check_entries(dim_out, self.mix.cols())?;
        let cmat = ComplexMatrix::from_fn(dim_out, vectors.len(), |i, p| vectors[p][i]);
        self.basis = Some(&cmat * &self.mix);
        self.dim_out = dim_out;
        Ok(())
    }

    /// Dimension of the compressed output space.
    pub fn dim(&self) -> usize {
        self.coords[0].rows()
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn coords(&self) -> &[ComplexMatrix<T>] {
        &self.coords
    }

    /// Dense isometry `W`, if attached.
    pub fn basis(&self) -> Option<&ComplexMatrix<T>> {
        self.basis.as_ref()
    }

    /// `Λ̂(ρ) = W† Λ(ρ) W`.
    pub fn apply(&self, rho: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        if rho.rows() != self.dim_in || rho.cols() != self.dim_in {
            return Err(Error::Shape("compressed channel input dimension mismatch".into()));
        }
        let m = self.dim();
        Ok(self
            .coords
            .iter()
            .fold(ComplexMatrix::zeros(m, m), |acc, k| &acc + &rho.conjugate_by(k)))
    }

    /// `Λ†(W Y W†) = Σ_r K̂_r† Y K̂_r`.
    pub fn apply_adjoint(&self, y: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        let m = self.dim();
        if y.rows() != m || y.cols() != m {
            return Err(Error::Shape("compressed channel output dimension mismatch".into()));
        }
        Ok(self
            .coords
            .iter()
            .fold(ComplexMatrix::zeros(self.dim_in, self.dim_in), |acc, k| {
                &acc + &(&k.adjoint() * &(y * k))
            }))
    }

    /// `W† Y W` and the part of `Tr Y` lying outside the span.
    pub fn project(&self, y: &ComplexMatrix<T>) -> Result<(ComplexMatrix<T>, T)> {
        let w = self
            .basis
            .as_ref()
            .ok_or_else(|| Error::Shape("compression has no dense basis attached".into()))?;
        if y.rows() != w.rows() || !y.is_square() {
            return Err(Error::Shape(format!(
                "operator of size {} does not act on the channel output ({})",
                y.rows(),
                w.rows()
            )));
        }
        let wd = w.adjoint();
        let inside = &(&wd * y) * w;
        let outside = y.trace().re - inside.trace().re;
        Ok((inside, outside))
    }

    /// `W Y W†`.
    pub fn embed(&self, y: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        let w = self
            .basis
            .as_ref()
            .ok_or_else(|| Error::Shape("compression has no dense basis attached".into()))?;
        check_entries(self.dim_out, self.dim_out)?;
        Ok(y.conjugate_by(w))
    }
}

fn check_fragment<T: Real>(rec: &BranchRecord<T>, k: usize) -> Result<()> {
    if k == 0 || k > rec.n_sites() {
        return Err(Error::Range(format!(
            "fragment size must lie in [1, {}], got {k}",
            rec.n_sites()
        )));
    }
    Ok(())
}

/// `Λ_k` with Kraus operators `E^(r) = ⊗_{l≤k}|Ξ^r_l><r|`.
pub fn encoding_channel<T: Real>(rec: &BranchRecord<T>, k: usize) -> Result<QuantumChannel<T>> {
    check_fragment(rec, k)?;
    let b = rec.n_branches();
    let kraus = (0..b)
        .map(|r| {
            let v = rec.fragment_vector(r, k)?;
            check_entries(v.len(), b)?;
            let mut e = ComplexMatrix::zeros(v.len(), b);
            for (i, z) in v.into_iter().enumerate() {
                e[(i, r)] = z;
            }
            Ok(e)
        })
        .collect::<Result<Vec<_>>>()?;
    QuantumChannel::new(kraus)
}

/// Compressed `Λ_k` built from the prefix overlap Gram matrix only. The
/// dense basis is attached when `with_basis` is set (needs `2^k` storage).
pub fn encoding_compressed<T: Real>(rec: &BranchRecord<T>, k: usize, with_basis: bool) -> Result<Compressed<T>> {
    check_fragment(rec, k)?;
    let b = rec.n_branches();
    let gram = rec.overlap_gram(1..=k);
    let cols: Vec<(usize, usize)> = (0..b).map(|r| (r, r)).collect();
    let mut out = Compressed::from_gram(&gram, &cols, b, b)?;
    if with_basis {
        let vectors = (0..b).map(|r| rec.fragment_vector(r, k)).collect::<Result<Vec<_>>>()?;
        out.attach_basis(&vectors)?;
    } else {
        out.dim_out = rec.env_dims()[..k].iter().product();
    }
    Ok(out)
}

/// Defects of the nesting identities between `Λ_k` and `Λ_{k+1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NestDefects<T: Real = f64> {
    /// `max ‖Λ_k(x) − Tr_{Ξ_{k+1}} Λ_{k+1}(x)‖₁` over matrix-unit inputs.
    pub channel: T,
    /// `max |Λ_k†(X) − Λ_{k+1}†(X ⊗ I)|` over probe observables.
    pub adjoint: T,
}

impl<T: Real> NestDefects<T> {
    pub fn max(&self) -> T {
        self.channel.max(self.adjoint)
    }
}

/// Checks `Λ_k = Tr_{Ξ_{k+1}} ∘ Λ_{k+1}` and its dual. The traced site is the
/// last factor of `F_{k+1}`, so observables on `F_k` are extended as `X ⊗ I`.
pub fn nest_check<T: Real>(rec: &BranchRecord<T>, k: usize) -> Result<NestDefects<T>> {
    if k == 0 || k >= rec.n_sites() {
        return Err(Error::Range(format!(
            "nesting needs 1 ≤ k < {}, got {k}",
            rec.n_sites()
        )));
    }
    let small = encoding_channel(rec, k)?;
    let big = encoding_channel(rec, k + 1)?;
    let dims = rec.env_dims()[..=k].to_vec();
    let keep: Vec<usize> = (0..k).collect();
    let d = small.dim_in();

    let mut channel = T::zero();
    for a in 0..d {
        for b in 0..d {
            let mut unit = ComplexMatrix::zeros(d, d);
            unit[(a, b)] = cr(T::one());
            let lhs = small.apply_operator(&unit)?;
            let rhs = partial_trace(&big.apply_operator(&unit)?, &dims, &keep)?;
            channel = channel.max(crate::linalg::trace_norm(&(&lhs - &rhs))?);
        }
    }

    let tail = ComplexMatrix::identity(dims[k]);
    let mut adjoint = T::zero();
    for probe in probe_observables(small.dim_out()) {
        let lhs = small.apply_adjoint(&probe)?;
        let rhs = big.apply_adjoint(&kron(&probe, &tail)?)?;
        adjoint = adjoint.max(lhs.max_abs_diff(&rhs));
    }
    Ok(NestDefects { channel, adjoint })
}

/// Deterministic Hermitian probes: identity, a diagonal ramp and a dense
/// pattern with complex off-diagonal entries.
pub(crate) fn probe_observables<T: Real>(dim: usize) -> Vec<ComplexMatrix<T>> {
    let ramp = ComplexMatrix::from_diag(
        &(0..dim)
            .map(|i| T::from_count(i + 1) / T::from_count(dim))
            .collect::<Vec<_>>(),
    );
    let dense = ComplexMatrix::from_fn(dim, dim, |i, j| {
        let (a, b) = (T::from_count(i), T::from_count(j));
        let phase = T::lit(0.7) * (a - b) + T::lit(0.3) * (a * b);
        let mag = T::one() / (T::one() + (a - b).abs());
        if i == j {
            cr(mag * (T::lit(0.5) + T::lit(0.1) * a))
        } else {
            c(mag * phase.cos(), mag * phase.sin() * (b - a).signum())
        }
    });
    vec![ComplexMatrix::identity(dim), ramp, dense.hermitian_part()]
}

/// Haar-like random channel: a Gaussian `(n·d_out) × d_in` matrix made into
/// an isometry and cut into `n` Kraus blocks.
pub fn random_channel<T: Real, R: Rng + ?Sized>(
    dim_in: usize,
    dim_out: usize,
    n_kraus: usize,
    rng: &mut R,
) -> Result<QuantumChannel<T>> {
    if dim_in == 0 || dim_out == 0 || n_kraus == 0 {
        return Err(Error::Range("random channel dimensions must be positive".into()));
    }
    let rows = dim_out * n_kraus;
    if rows < dim_in {
        return Err(Error::Range("too few Kraus operators for an isometry".into()));
    }
    let g = ComplexMatrix::from_fn(rows, dim_in, |_, _| {
        c(
            T::lit(rng.sample::<f64, _>(StandardNormal)),
            T::lit(rng.sample::<f64, _>(StandardNormal)),
        )
    });
    let v = &g * &inv_sqrt_psd(&(&g.adjoint() * &g))?;
    let kraus = (0..n_kraus)
        .map(|a| ComplexMatrix::from_fn(dim_out, dim_in, |i, j| v[(a * dim_out + i, j)]))
        .collect();
    QuantumChannel::new(kraus)
}
