//! One-to-all premeasurement dynamics.
//!
//! The system couples to every environment site through
//! `H = O_Γ ⊗ Σ_l g_l O_l`. Since `O_Γ = Σ_r ω_r |r><r|` the propagator is
//! block diagonal in the pointer basis, `U(t) = Σ_r |r><r| ⊗ U^r(t)`, and each
//! `U^r(t)` factorizes over sites as `⊗_l exp(-i ω_r g_l O_l t)`. The evolved
//! state is therefore fully described by one product state per pointer
//! branch, which is what [`BranchRecord`] stores.
//!
//! All system operators and states in this module are expressed in the
//! pointer basis of `O_Γ`. Free evolution of the subsystems is not modelled.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::hilbert::CompositeSpace;
use crate::linalg::{check_entries, inner, kron, kron_vec, unitary_exp, ComplexMatrix, HermitianEigen};
use crate::scalar::{c, cr, Real};

/// Normalization tolerance for ready states.
const NORM_TOL: f64 = 1e-10;
/// Minimal variance of `O_l` in the ready state.
const READY_VARIANCE_TOL: f64 = 1e-12;

/// The system half of the interaction, `O_Γ = Σ_r ω_r |r><r|`.
#[derive(Clone, Debug)]
pub struct SystemObservable<T: Real = f64> {
    eigenvalues: Vec<T>,
    pointer_basis: ComplexMatrix<T>,
}

impl<T: Real> SystemObservable<T> {
    /// `eigenvalues[r]` belongs to the `r`-th column of `pointer_basis`
    /// (given in the computational basis).
    pub fn new(eigenvalues: Vec<T>, pointer_basis: ComplexMatrix<T>) -> Result<Self> {
        let d = eigenvalues.len();
        if d < 2 || pointer_basis.rows() != d || pointer_basis.cols() != d {
            return Err(Error::Shape(
                "pointer basis must be a square matrix matching the eigenvalues".into(),
            ));
        }
        let gram = &pointer_basis.adjoint() * &pointer_basis;
        if gram.max_abs_diff(&ComplexMatrix::identity(d)) > T::tol(1e-10) {
            return Err(Error::Domain("pointer basis is not orthonormal".into()));
        }
        for i in 0..d {
            for j in (i + 1)..d {
                if (eigenvalues[i] - eigenvalues[j]).abs() <= T::tol(1e-12) {
                    return Err(Error::Domain("system observable must be non-degenerate".into()));
                }
            }
        }
        Ok(Self {
            eigenvalues,
            pointer_basis,
        })
    }

    /// Pauli Z: `ω_0 = 1` for `|0>`, `ω_1 = -1` for `|1>`.
    pub fn pauli_z() -> Self {
        Self {
            eigenvalues: vec![T::one(), -T::one()],
            pointer_basis: ComplexMatrix::identity(2),
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn pointer_basis(&self) -> &ComplexMatrix<T> {
        &self.pointer_basis
    }

    /// `O_Γ` in the computational basis.
    pub fn matrix(&self) -> ComplexMatrix<T> {
        ComplexMatrix::from_diag(&self.eigenvalues).conjugate_by(&self.pointer_basis)
    }
}

/// Couplings, site operators and ready states of the environment.
#[derive(Clone, Debug)]
pub struct EnvironmentSpec<T: Real = f64> {
    couplings: Vec<T>,
    site_ops: Vec<ComplexMatrix<T>>,
    ready_states: Vec<Vec<Complex<T>>>,
}

impl<T: Real> EnvironmentSpec<T> {
    pub fn new(couplings: Vec<T>, site_ops: Vec<ComplexMatrix<T>>, ready_states: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let n = couplings.len();
        if n == 0 {
            return Err(Error::Range("environment needs at least one site".into()));
        }
        if site_ops.len() != n || ready_states.len() != n {
            return Err(Error::Shape(format!(
                "{n} couplings but {} site operators and {} ready states",
                site_ops.len(),
                ready_states.len()
            )));
        }
        for (l, ((g, op), psi)) in couplings.iter().zip(&site_ops).zip(&ready_states).enumerate() {
            let site = l + 1;
            if !g.is_finite() {
                return Err(Error::Domain(format!("coupling of site {site} is not finite")));
            }
            if !op.is_square() || op.rows() < 2 || op.rows() != psi.len() {
                return Err(Error::Shape(format!(
                    "site {site}: operator and ready state dimensions differ"
                )));
            }
            if op.hermitian_defect() > T::tol(1e-10) * op.max_abs().max(T::one()) {
                return Err(Error::Domain(format!("site {site}: operator is not Hermitian")));
            }
            let norm = inner(psi, psi).re;
            if (norm - T::one()).abs() > T::tol(NORM_TOL) {
                return Err(Error::Domain(format!("site {site}: ready state is not normalized")));
            }
            // a ready-to-read state must not be an eigenstate of O_l
            let col = ComplexMatrix::column(psi);
            let o_psi = (op * &col).into_vec();
            let mean = inner(psi, &o_psi).re;
            let second = inner(&o_psi, &o_psi).re;
            if second - mean * mean <= T::tol(READY_VARIANCE_TOL) {
                return Err(Error::Domain(format!(
                    "site {site}: ready state is an eigenstate of its site operator"
                )));
            }
        }
        Ok(Self {
            couplings,
            site_ops: site_ops.into_iter().map(|m| m.hermitian_part()).collect(),
            ready_states,
        })
    }

    /// Identical Z–Z couplings with every site ready in `|+>`.
    pub fn zz(n: usize, g: T) -> Result<Self> {
        Self::zz_with_couplings(vec![g; n])
    }

    /// Z site operators with per-site couplings, every site ready in `|+>`.
    pub fn zz_with_couplings(couplings: Vec<T>) -> Result<Self> {
        let n = couplings.len();
        Self::new(
            couplings,
            vec![ComplexMatrix::from_diag(&[T::one(), -T::one()]); n],
            vec![plus_state(); n],
        )
    }

    /// Site operators drawn independently from GUE(2), every site ready in `|+>`.
    pub fn gue<R: Rng + ?Sized>(n: usize, g: T, rng: &mut R) -> Result<Self> {
        Self::gue_with_couplings(vec![g; n], rng)
    }

    pub fn gue_with_couplings<R: Rng + ?Sized>(couplings: Vec<T>, rng: &mut R) -> Result<Self> {
        let ops = (0..couplings.len()).map(|_| sample_gue2(rng)).collect();
        let n = couplings.len();
        Self::new(couplings, ops, vec![plus_state(); n])
    }

    pub fn n_sites(&self) -> usize {
        self.couplings.len()
    }

    pub fn couplings(&self) -> &[T] {
        &self.couplings
    }

    pub fn site_ops(&self) -> &[ComplexMatrix<T>] {
        &self.site_ops
    }

    pub fn ready_states(&self) -> &[Vec<Complex<T>>] {
        &self.ready_states
    }

    pub fn env_dims(&self) -> Vec<usize> {
        self.ready_states.iter().map(Vec::len).collect()
    }

    pub fn space(&self, system_dim: usize) -> Result<CompositeSpace> {
        CompositeSpace::new(system_dim, self.env_dims())
    }

    /// `|Ξ^R> = ⊗_l |Ξ^R>_l`.
    pub fn ready_vector(&self) -> Result<Vec<Complex<T>>> {
        let dim: usize = self.env_dims().iter().product();
        check_entries(dim, 1)?;
        Ok(self
            .ready_states
            .iter()
            .fold(vec![cr(T::one())], |acc, s| kron_vec(&acc, s)))
    }
}

/// `|+> = (|0> + |1>)/√2`.
pub fn plus_state<T: Real>() -> Vec<Complex<T>> {
    let s = T::FRAC_1_SQRT_2();
    vec![cr(s), cr(s)]
}

/// Qubit state `(I + r n̂·σ)/2` with `n̂ = (sinθ cosφ, sinθ sinφ, cosθ)` in the pointer basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochState<T: Real = f64> {
    pub r: T,
    pub theta: T,
    pub phi: T,
}

impl<T: Real> BlochState<T> {
    pub fn new(r: T, theta: T, phi: T) -> Result<Self> {
        if !(r >= T::zero() && r <= T::one()) || !theta.is_finite() || !phi.is_finite() {
            return Err(Error::Domain(format!(
                "invalid Bloch parameters r={r}, θ={theta}, φ={phi}"
            )));
        }
        Ok(Self { r, theta, phi })
    }

    /// Entries `γ_{rr'}`: `γ₀₀ = (1 + r cosθ)/2`, `γ₀₁ = r e^{-iφ} sinθ / 2`.
    pub fn gamma(&self) -> ComplexMatrix<T> {
        let half = T::lit(0.5);
        let z = self.r * self.theta.cos();
        let off = c(self.phi.cos(), -self.phi.sin()) * (self.r * self.theta.sin() * half);
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 0)] = cr((T::one() + z) * half);
        m[(1, 1)] = cr((T::one() - z) * half);
        m[(0, 1)] = off;
        m[(1, 0)] = off.conj();
        m
    }

    pub fn density(&self) -> DensityMatrix<T> {
        DensityMatrix::new(self.gamma()).expect("Bloch states are valid density matrices")
    }
}

/// Per-branch, per-site environment states at time `t`.
#[derive(Clone, Debug)]
pub struct BranchRecord<T: Real = f64> {
    t: T,
    /// `branch_states[r][l]` is `|Ξ^r(t)>_{l+1}`.
    branch_states: Vec<Vec<Vec<Complex<T>>>>,
}

impl<T: Real> BranchRecord<T> {
    pub fn new(t: T, branch_states: Vec<Vec<Vec<Complex<T>>>>) -> Result<Self> {
        let n = branch_states.first().map(Vec::len).unwrap_or(0);
        if branch_states.len() < 2 || n == 0 || branch_states.iter().any(|b| b.len() != n) {
            return Err(Error::Shape(
                "branch record needs ≥2 branches over the same sites".into(),
            ));
        }
        for l in 0..n {
            let d = branch_states[0][l].len();
            if branch_states.iter().any(|b| b[l].len() != d) {
                return Err(Error::Shape(format!("site {} has inconsistent dimensions", l + 1)));
            }
        }
        Ok(Self { t, branch_states })
    }

    pub fn time(&self) -> T {
        self.t
    }

    pub fn n_branches(&self) -> usize {
        self.branch_states.len()
    }

    pub fn n_sites(&self) -> usize {
        self.branch_states[0].len()
    }

    pub fn env_dims(&self) -> Vec<usize> {
        self.branch_states[0].iter().map(Vec::len).collect()
    }

    pub fn space(&self) -> Result<CompositeSpace> {
        CompositeSpace::new(self.n_branches(), self.env_dims())
    }

    /// `|Ξ^r(t)>_l` with `l` 1-based.
    pub fn site_state(&self, r: usize, l: usize) -> &[Complex<T>] {
        &self.branch_states[r][l - 1]
    }

    /// `<Ξ^r(t)|Ξ^{r'}(t)>_l` with `l` 1-based.
    pub fn site_overlap(&self, r: usize, rp: usize, l: usize) -> Complex<T> {
        inner(self.site_state(r, l), self.site_state(rp, l))
    }

    /// Gram matrix `G_{rr'} = Π_{l ∈ sites} <Ξ^r_l|Ξ^{r'}_l>` of branch states
    /// restricted to the given (1-based) sites. An empty site set gives all ones.
    pub fn overlap_gram(&self, sites: impl IntoIterator<Item = usize> + Clone) -> ComplexMatrix<T> {
        let b = self.n_branches();
        ComplexMatrix::from_fn(b, b, |r, rp| {
            sites
                .clone()
                .into_iter()
                .fold(cr(T::one()), |acc, l| acc * self.site_overlap(r, rp, l))
        })
    }

    /// `⊗_{l≤k} |Ξ^r(t)>_l` as a dense vector (length 1 for `k = 0`).
    pub fn fragment_vector(&self, r: usize, k: usize) -> Result<Vec<Complex<T>>> {
        let dim: usize = self.env_dims()[..k].iter().product();
        check_entries(dim, 1)?;
        Ok(self.branch_states[r][..k]
            .iter()
            .fold(vec![cr(T::one())], |acc, s| kron_vec(&acc, s)))
    }
}

/// Applies the per-site conditional unitaries `exp(-i ω_r g_l O_l t)` to the ready states.
pub fn evolve_branches<T: Real>(sys: &SystemObservable<T>, env: &EnvironmentSpec<T>, t: T) -> Result<BranchRecord<T>> {
    if !t.is_finite() || t < T::zero() {
        return Err(Error::Range(format!(
            "evolution time must be finite and non-negative, got {t}"
        )));
    }
    let site_eigs: Vec<HermitianEigen<T>> = env.site_ops.iter().map(HermitianEigen::new).collect::<Result<_>>()?;
    let branches = sys
        .eigenvalues
        .iter()
        .map(|&omega| {
            env.ready_states
                .iter()
                .zip(&site_eigs)
                .zip(&env.couplings)
                .map(|((psi, eig), &g)| {
                    if t == T::zero() {
                        return psi.clone();
                    }
                    let u = eig.reconstruct_with(|lambda| {
                        let phase = -omega * g * lambda * t;
                        c(phase.cos(), phase.sin())
                    });
                    (&u * &ComplexMatrix::column(psi)).into_vec()
                })
                .collect()
        })
        .collect();
    BranchRecord::new(t, branches)
}

fn check_system_state<T: Real>(x: &DensityMatrix<T>, rec: &BranchRecord<T>) -> Result<()> {
    if x.dim() != rec.n_branches() {
        return Err(Error::Shape(format!(
            "system state of dimension {} for {} pointer branches",
            x.dim(),
            rec.n_branches()
        )));
    }
    Ok(())
}

/// `ρ(t) = Σ_{rr'} γ_{rr'} |r><r'| ⊗ |Ξ^r(t)><Ξ^{r'}(t)|` on `Γ ∪ Ξ`.
pub fn joint_state<T: Real>(x: &DensityMatrix<T>, rec: &BranchRecord<T>) -> Result<DensityMatrix<T>> {
    check_system_state(x, rec)?;
    let b = rec.n_branches();
    let env_dim: usize = rec.env_dims().iter().product();
    let total = b
        .checked_mul(env_dim)
        .ok_or_else(|| Error::Size("joint dimension overflow".into()))?;
    check_entries(total, total)?;
    let vecs: Vec<Vec<Complex<T>>> = (0..b)
        .map(|r| rec.fragment_vector(r, rec.n_sites()))
        .collect::<Result<_>>()?;
    let mut m = ComplexMatrix::zeros(total, total);
    for r in 0..b {
        for rp in 0..b {
            let g = x[(r, rp)];
            if g.norm() == T::zero() {
                continue;
            }
            for i in 0..env_dim {
                let gi = g * vecs[r][i];
                for j in 0..env_dim {
                    m[(r * env_dim + i, rp * env_dim + j)] = gi * vecs[rp][j].conj();
                }
            }
        }
    }
    DensityMatrix::new(m)
}

/// `ρ_Γ(t)` with entries `γ_{rr'} Π_l <Ξ^{r'}_l|Ξ^r_l>`.
pub fn reduced_system_state<T: Real>(x: &DensityMatrix<T>, rec: &BranchRecord<T>) -> Result<DensityMatrix<T>> {
    check_system_state(x, rec)?;
    let gram = rec.overlap_gram(1..=rec.n_sites());
    let b = rec.n_branches();
    DensityMatrix::new(ComplexMatrix::from_fn(b, b, |r, rp| x[(r, rp)] * gram[(rp, r)]))
}

/// Dense `H = O_Γ ⊗ Σ_l g_l I ⊗ … ⊗ O_l ⊗ … ⊗ I`, with `O_Γ` diagonal in the pointer basis.
pub fn interaction_hamiltonian<T: Real>(
    sys: &SystemObservable<T>,
    env: &EnvironmentSpec<T>,
) -> Result<ComplexMatrix<T>> {
    let dims = env.env_dims();
    let env_dim: usize = dims.iter().product();
    check_entries(env_dim * sys.dim(), env_dim * sys.dim())?;
    let mut h_env = ComplexMatrix::zeros(env_dim, env_dim);
    for (l, (op, &g)) in env.site_ops.iter().zip(&env.couplings).enumerate() {
        let left: usize = dims[..l].iter().product();
        let right: usize = dims[l + 1..].iter().product();
        let term = kron(
            &kron(&ComplexMatrix::identity(left), op)?,
            &ComplexMatrix::identity(right),
        )?;
        h_env = &h_env + &term.scale(g);
    }
    kron(&ComplexMatrix::from_diag(&sys.eigenvalues), &h_env)
}

/// `U(t)(x ⊗ |Ξ^R><Ξ^R|)U(t)†` with `U(t) = exp(-iHt)` from a dense
/// eigendecomposition of `H`. Exponential in `N`; meant as an independent
/// check of the branch construction at small sizes.
pub fn dense_joint_state<T: Real>(
    sys: &SystemObservable<T>,
    env: &EnvironmentSpec<T>,
    x: &DensityMatrix<T>,
    t: T,
) -> Result<DensityMatrix<T>> {
    if x.dim() != sys.dim() {
        return Err(Error::Shape("system state does not match the observable".into()));
    }
    let h = interaction_hamiltonian(sys, env)?;
    let u = unitary_exp(&h, t)?;
    let ready = ComplexMatrix::projector(&env.ready_vector()?);
    let rho0 = kron(x.matrix(), &ready)?;
    DensityMatrix::new(rho0.conjugate_by(&u))
}

/// One draw from GUE(2): `H_ii ~ N(0,1)`, `H_01 = (x + iy)/√2` with `x, y ~ N(0,1)`.
pub fn sample_gue2<T: Real, R: Rng + ?Sized>(rng: &mut R) -> ComplexMatrix<T> {
    let mut normal = || T::lit(rng.sample::<f64, _>(StandardNormal));
    let h00 = normal();
    let h11 = normal();
    let x = normal();
    let y = normal();
    let off = c(x, y) * T::FRAC_1_SQRT_2();
    let mut h = ComplexMatrix::zeros(2, 2);
    h[(0, 0)] = cr(h00);
    h[(1, 1)] = cr(h11);
    h[(0, 1)] = off;
    h[(1, 0)] = off.conj();
    h
}

/// Periodic probability-reproducibility times `first + n · period`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrcSchedule<T: Real = f64> {
    pub first: T,
    pub period: T,
}

impl<T: Real> PrcSchedule<T> {
    pub fn time(&self, n: usize) -> T {
        self.first + self.period * T::from_count(n)
    }

    pub fn times(&self, count: usize) -> Vec<T> {
        (0..count).map(|n| self.time(n)).collect()
    }
}

/// Closed-form PRC times, available for homogeneous models: qubit system,
/// qubit sites with identical `g_l |λ₁ − λ₀|` and ready states of equal weight
/// on both eigenvectors of `O_l`. Each site overlap is then
/// `e^{iα} cos(Δω g Δλ t / 2)` and all vanish together at
/// `t = π(1+2n) / (|Δω| g Δλ)`; for Z–Z this is `π(1+2n)/(4g)`.
///
/// Returns `None` when no closed form applies; use [`prc_defect`] instead.
pub fn prc_times<T: Real>(sys: &SystemObservable<T>, env: &EnvironmentSpec<T>) -> Option<PrcSchedule<T>> {
    if sys.dim() != 2 {
        return None;
    }
    let d_omega = (sys.eigenvalues[0] - sys.eigenvalues[1]).abs();
    let tol = T::tol(1e-12);
    let mut rate: Option<T> = None;
    for ((op, psi), &g) in env.site_ops.iter().zip(&env.ready_states).zip(&env.couplings) {
        if op.rows() != 2 {
            return None;
        }
        let eig = HermitianEigen::new(op).ok()?;
        let weight0 = inner(&eig.eigenvectors.col(0), psi).norm_sqr();
        if (weight0 - T::lit(0.5)).abs() > tol {
            return None;
        }
        let site_rate = g.abs() * (eig.eigenvalues[1] - eig.eigenvalues[0]);
        match rate {
            None => rate = Some(site_rate),
            Some(r0) if (r0 - site_rate).abs() <= tol * r0.abs().max(T::one()) => {}
            Some(_) => return None,
        }
    }
    let rate = rate? * d_omega;
    if rate <= T::zero() {
        return None;
    }
    let first = T::PI() / rate;
    Some(PrcSchedule {
        first,
        period: first + first,
    })
}

/// `|Π_{l≤k} <Ξ⁰(t)|Ξ¹(t)>_l|`, maximized over branch pairs; zero exactly when
/// the branch states on `F_k` are orthogonal.
pub fn prc_defect<T: Real>(rec: &BranchRecord<T>, k: usize) -> Result<T> {
    if k == 0 || k > rec.n_sites() {
        return Err(Error::Range(format!(
            "prc_defect needs 1 ≤ k ≤ {}, got {k}",
            rec.n_sites()
        )));
    }
    let gram = rec.overlap_gram(1..=k);
    let b = rec.n_branches();
    let mut worst = T::zero();
    for r in 0..b {
        for rp in (r + 1)..b {
            worst = worst.max(gram[(r, rp)].norm());
        }
    }
    Ok(worst)
}
