//! Petz recovery of the encoding channels and the maps relating
//! recoveries from nested fragments.
//!
//! `P(y) = s^{1/2} Λ†[Λ(s)^{-1/2} y Λ(s)^{-1/2}] s^{1/2}` is evaluated on the
//! compressed channel (see [`crate::channels::Compressed`]): `Λ(s)` and every
//! input live in the span of the Kraus ranges, so the inverse square root is
//! taken there. Inverses follow the Moore–Penrose convention.

use crate::channels::{encoding_channel, encoding_compressed, Compressed, QuantumChannel};
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::infotheory::fidelity;
use crate::linalg::{
    inv_sqrt_psd, kron, partial_trace, sqrt_psd, support_projector, trace_norm, ComplexMatrix, HermitianEigen, PINV_TOL,
};
use crate::model::BranchRecord;
use crate::scalar::{cr, Real};

/// Smallest eigenvalue a reference state must exceed.
pub const REFERENCE_FLOOR: f64 = 1e-12;
/// Largest fraction of an input's trace allowed outside `Supp(Λ(s))`.
pub const SUPPORT_TOL: f64 = 1e-8;
/// Recovered eigenvalues below `−NEG_REJECT` are an error; negative ones
/// above it are clipped to zero.
pub const NEG_REJECT: f64 = 1e-9;

/// A recovered state and the total negative weight removed from it.
#[derive(Clone, Debug)]
pub struct Recovery<T: Real = f64> {
    pub state: DensityMatrix<T>,
    pub clip: T,
}

/// Petz map of a channel with respect to a full-rank reference state.
#[derive(Clone, Debug)]
pub struct PetzMap<T: Real = f64> {
    channel: Compressed<T>,
    reference: DensityMatrix<T>,
    s_sqrt: ComplexMatrix<T>,
    image: ComplexMatrix<T>,
    image_inv_sqrt: ComplexMatrix<T>,
    support: ComplexMatrix<T>,
}

/// Builds the Petz map of `ch` with reference `s`.
pub fn build_petz<T: Real>(ch: &QuantumChannel<T>, s: &DensityMatrix<T>) -> Result<PetzMap<T>> {
    PetzMap::new(ch, s)
}

impl<T: Real> PetzMap<T> {
    pub fn new(ch: &QuantumChannel<T>, s: &DensityMatrix<T>) -> Result<Self> {
        Self::from_compressed(ch.compress()?, s)
    }

    pub fn from_compressed(channel: Compressed<T>, s: &DensityMatrix<T>) -> Result<Self> {
        if s.dim() != channel.dim_in() {
            return Err(Error::Shape(format!(
                "reference of dimension {} for a channel on dimension {}",
                s.dim(),
                channel.dim_in()
            )));
        }
        let min = s.eigen().min_eigenvalue();
        if min <= T::lit(REFERENCE_FLOOR) {
            return Err(Error::Reference(format!(
                "reference state must be full rank, smallest eigenvalue is {min:e}"
            )));
        }
        let image = channel.apply(s.matrix())?.hermitian_part();
        let image_inv_sqrt = inv_sqrt_psd(&image)?;
        let support = support_projector(&image, T::tol(PINV_TOL))?;
        Ok(Self {
            s_sqrt: sqrt_psd(s.matrix())?,
            reference: s.clone(),
            channel,
            image,
            image_inv_sqrt,
            support,
        })
    }

    pub fn channel(&self) -> &Compressed<T> {
        &self.channel
    }

    pub fn reference(&self) -> &DensityMatrix<T> {
        &self.reference
    }

    /// `Λ(s)` in compressed coordinates.
    pub fn image_of_reference(&self) -> &ComplexMatrix<T> {
        &self.image
    }

    /// The linear map on a compressed operator, without any post-processing.
    pub fn apply_compressed(&self, y: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        let inner = &(&self.image_inv_sqrt * y) * &self.image_inv_sqrt;
        let pulled = self.channel.apply_adjoint(&inner)?;
        Ok(&(&self.s_sqrt * &pulled) * &self.s_sqrt)
    }

    /// The linear map on a dense operator on the channel output.
    pub fn apply(&self, y: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        let (inner, _) = self.channel.project(y)?;
        self.apply_compressed(&inner)
    }

    /// Recovers a dense output state, enforcing the support and positivity policy.
    pub fn recover(&self, y: &DensityMatrix<T>) -> Result<Recovery<T>> {
        let (inner, outside) = self.channel.project(y.matrix())?;
        self.check_support(&inner, outside, y.trace().re)?;
        finish(self.apply_compressed(&inner)?)
    }

    /// Like [`Self::recover`] for an operator already in compressed coordinates.
    pub fn recover_compressed(&self, y: &ComplexMatrix<T>) -> Result<Recovery<T>> {
        self.check_support(y, T::zero(), y.trace().re)?;
        finish(self.apply_compressed(y)?)
    }

    /// `P(Λ(x))`.
    pub fn round_trip(&self, x: &DensityMatrix<T>) -> Result<Recovery<T>> {
        self.recover_compressed(&self.channel.apply(x.matrix())?)
    }

    fn check_support(&self, y: &ComplexMatrix<T>, outside: T, total: T) -> Result<()> {
        let kept = (&self.support * y).trace().re;
        let leak = outside + (y.trace().re - kept);
        if leak.abs() > T::tol(SUPPORT_TOL) * total.abs().max(T::min_positive_value()) {
            return Err(Error::Support(format!(
                "input has weight {leak:e} outside the support of the reference image"
            )));
        }
        Ok(())
    }
}

/// Symmetrizes, rejects or clips negative eigenvalues, renormalizes.
fn finish<T: Real>(raw: ComplexMatrix<T>) -> Result<Recovery<T>> {
    let h = raw.hermitian_part();
    let eig = HermitianEigen::new(&h)?;
    let min = eig.min_eigenvalue();
    if min < -T::tol(NEG_REJECT) {
        return Err(Error::NotPositive(format!("recovered eigenvalue {min:e}")));
    }
    let clip: T = eig.eigenvalues.iter().filter(|&&l| l < T::zero()).map(|&l| -l).sum();
    let m = if clip > T::zero() {
        eig.reconstruct_with(|l| cr(l.max(T::zero())))
    } else {
        h
    };
    let tr = m.trace().re;
    if tr.is_nan() || tr <= T::zero() {
        return Err(Error::NotPositive("recovered operator has no positive weight".into()));
    }
    Ok(Recovery {
        state: DensityMatrix::new(m.scale(T::one() / tr))?,
        clip,
    })
}

/// Petz recovery of the fragment state `Λ_k(x)`.
pub fn fragment_recovery<T: Real>(
    x: &DensityMatrix<T>,
    rec: &BranchRecord<T>,
    k: usize,
    s: &DensityMatrix<T>,
) -> Result<Recovery<T>> {
    PetzMap::from_compressed(encoding_compressed(rec, k, false)?, s)?.round_trip(x)
}

/// `Q(k) = F(x, P_{Λ_k}(Λ_k(x)))`.
pub fn recovery_quality<T: Real>(
    x: &DensityMatrix<T>,
    rec: &BranchRecord<T>,
    k: usize,
    s: &DensityMatrix<T>,
) -> Result<T> {
    fidelity(x.matrix(), fragment_recovery(x, rec, k, s)?.state.matrix())
}

/// Fidelity between a qubit state and its pointer-diagonal part `diag(p₀, p₁)`:
/// `sqrt(1 − 2(p₀p₁ − sqrt(p₀p₁(p₀p₁ − |γ₀₁|²))))`.
pub fn prc_fidelity_closed_form<T: Real>(gamma: &ComplexMatrix<T>) -> Result<T> {
    if gamma.rows() != 2 || gamma.cols() != 2 {
        return Err(Error::Shape("closed-form fidelity needs a qubit state".into()));
    }
    let p = gamma[(0, 0)].re * gamma[(1, 1)].re;
    let c2 = gamma[(0, 1)].norm_sqr();
    let inner = (p * (p - c2)).max(T::zero()).sqrt();
    let two = T::lit(2.0);
    Ok((T::one() - two * (p - inner)).max(T::zero()).sqrt())
}

/// `M_k : D(F_{k+1}) → D(Γ)`,
/// `X ↦ s^{1/2} Λ_{k+1}†[(Λ_k(s)^{-1/2} Tr_{Ξ_{k+1}}[X] Λ_k(s)^{-1/2}) ⊗ I] s^{1/2}`.
///
/// Dense; meant for verification at small sizes.
#[derive(Clone, Debug)]
pub struct MMap<T: Real = f64> {
    small: QuantumChannel<T>,
    big: QuantumChannel<T>,
    s_sqrt: ComplexMatrix<T>,
    image_inv_sqrt: ComplexMatrix<T>,
    dims: Vec<usize>,
}

pub fn build_m_map<T: Real>(rec: &BranchRecord<T>, k: usize, s: &DensityMatrix<T>) -> Result<MMap<T>> {
    if k == 0 || k >= rec.n_sites() {
        return Err(Error::Range(format!("M_k needs 1 ≤ k < {}, got {k}", rec.n_sites())));
    }
    if s.eigen().min_eigenvalue() <= T::lit(REFERENCE_FLOOR) {
        return Err(Error::Reference("reference state must be full rank".into()));
    }
    let small = encoding_channel(rec, k)?;
    let big = encoding_channel(rec, k + 1)?;
    let image_inv_sqrt = inv_sqrt_psd(&small.apply_operator(s.matrix())?.hermitian_part())?;
    Ok(MMap {
        small,
        big,
        s_sqrt: sqrt_psd(s.matrix())?,
        image_inv_sqrt,
        dims: rec.env_dims()[..=k].to_vec(),
    })
}

impl<T: Real> MMap<T> {
    fn k(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn apply(&self, x: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        let keep: Vec<usize> = (0..self.k()).collect();
        let reduced = partial_trace(x, &self.dims, &keep)?;
        let inner = &(&self.image_inv_sqrt * &reduced) * &self.image_inv_sqrt;
        let lifted = kron(&inner, &ComplexMatrix::identity(self.dims[self.k()]))?;
        let pulled = self.big.apply_adjoint(&lifted)?;
        Ok(&(&self.s_sqrt * &pulled) * &self.s_sqrt)
    }

    /// `M_k†(x) = (Λ_k(s)^{-1/2} Λ_k(s^{1/2} x s^{1/2}) Λ_k(s)^{-1/2}) ⊗ I`.
    pub fn adjoint(&self, x: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        let pushed = self.small.apply_operator(&(&(&self.s_sqrt * x) * &self.s_sqrt))?;
        let inner = &(&self.image_inv_sqrt * &pushed) * &self.image_inv_sqrt;
        kron(&inner, &ComplexMatrix::identity(self.dims[self.k()]))
    }

    /// `Λ_{k+1}` as a dense channel.
    pub fn outer_channel(&self) -> &QuantumChannel<T> {
        &self.big
    }

    /// `Λ_k` as a dense channel.
    pub fn inner_channel(&self) -> &QuantumChannel<T> {
        &self.small
    }
}

/// `‖P_k(Λ_k x) − P_{k+1}(Λ_{k+1} x)‖₁`, the distance between the Petz
/// recoveries from `F_k` and `F_{k+1}`.
pub fn r_map_defect<T: Real>(x: &DensityMatrix<T>, rec: &BranchRecord<T>, k: usize, s: &DensityMatrix<T>) -> Result<T> {
    if k == 0 || k >= rec.n_sites() {
        return Err(Error::Range(format!("defect needs 1 ≤ k < {}, got {k}", rec.n_sites())));
    }
    let raw = |kk: usize| -> Result<ComplexMatrix<T>> {
        let p = PetzMap::from_compressed(encoding_compressed(rec, kk, false)?, s)?;
        p.apply_compressed(&p.channel().apply(x.matrix())?)
    };
    trace_norm(&(&raw(k)? - &raw(k + 1)?))
}

/// `R(X) = ρ_{F_{k+1}}^{1/2} (ρ_{F_k}^{-1/2} X ρ_{F_k}^{-1/2} ⊗ I) ρ_{F_{k+1}}^{1/2}`,
/// built from the marginals of a state on `Γ ∪ F_{k+1}`.
#[derive(Clone, Debug)]
pub struct MarkovRecovery<T: Real = f64> {
    dims: Vec<usize>,
    rho: ComplexMatrix<T>,
    small_inv_sqrt: ComplexMatrix<T>,
    big_sqrt: ComplexMatrix<T>,
}

/// `dims` lists `Γ` first and `Ξ_{k+1}` last.
pub fn markov_recovery<T: Real>(rho_joint: &DensityMatrix<T>, dims: &[usize]) -> Result<MarkovRecovery<T>> {
    if dims.len() < 2 {
        return Err(Error::Shape("need the system and at least one site".into()));
    }
    let n = dims.len();
    let small: Vec<usize> = (1..n - 1).collect();
    let big: Vec<usize> = (1..n).collect();
    let rho = rho_joint.matrix().clone();
    let small_inv_sqrt = if small.is_empty() {
        ComplexMatrix::identity(1)
    } else {
        inv_sqrt_psd(&partial_trace(&rho, dims, &small)?)?
    };
    let big_sqrt = sqrt_psd(&partial_trace(&rho, dims, &big)?)?;
    Ok(MarkovRecovery {
        dims: dims.to_vec(),
        rho,
        small_inv_sqrt,
        big_sqrt,
    })
}

impl<T: Real> MarkovRecovery<T> {
    fn last(&self) -> usize {
        self.dims[self.dims.len() - 1]
    }

    /// `R(X)` for an operator on `F_k`.
    pub fn apply(&self, x: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        let inner = &(&self.small_inv_sqrt * x) * &self.small_inv_sqrt;
        let lifted = kron(&inner, &ComplexMatrix::identity(self.last()))?;
        Ok(&(&self.big_sqrt * &lifted) * &self.big_sqrt)
    }

    /// `(id_Γ ⊗ R)(Y)` for an operator on `Γ ∪ F_k`.
    pub fn apply_with_system(&self, y: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        let sys = ComplexMatrix::identity(self.dims[0]);
        let a = kron(&sys, &self.small_inv_sqrt)?;
        let b = kron(&sys, &self.big_sqrt)?;
        let lifted = kron(&(&(&a * y) * &a), &ComplexMatrix::identity(self.last()))?;
        Ok(&(&b * &lifted) * &b)
    }

    /// `‖(id_Γ ⊗ R)(ρ_{ΓF_k}) − ρ_{ΓF_{k+1}}‖₁`.
    pub fn reconstruction_defect(&self) -> Result<T> {
        let keep: Vec<usize> = (0..self.dims.len() - 1).collect();
        let reduced = partial_trace(&self.rho, &self.dims, &keep)?;
        let rebuilt = self.apply_with_system(&reduced)?;
        trace_norm(&(&rebuilt - &self.rho))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infotheory::conditional_mutual_information;
    use crate::model::{evolve_branches, joint_state, BlochState, EnvironmentSpec, SystemObservable};
    use crate::scalar::c;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn half() -> DensityMatrix<f64> {
        DensityMatrix::maximally_mixed(2)
    }

    fn zz(n: usize, t: f64) -> BranchRecord<f64> {
        evolve_branches(&SystemObservable::pauli_z(), &EnvironmentSpec::zz(n, 1.0).unwrap(), t).unwrap()
    }

    fn gue(n: usize, t: f64, seed: u64) -> BranchRecord<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        evolve_branches(
            &SystemObservable::pauli_z(),
            &EnvironmentSpec::gue(n, 1.0, &mut rng).unwrap(),
            t,
        )
        .unwrap()
    }

    fn random_state(d: usize, rng: &mut ChaCha8Rng) -> DensityMatrix<f64> {
        let a = ComplexMatrix::from_fn(d, d, |_, _| {
            c(
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            )
        });
        let p = &a * &a.adjoint();
        let tr = p.trace().re;
        DensityMatrix::new(p.scale(1.0 / tr)).unwrap()
    }

    #[test]
    fn reference_is_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rec = gue(3, 0.7, 2);
        for k in 1..=3 {
            let ch = encoding_channel(&rec, k).unwrap();
            let s = random_state(2, &mut rng);
            let p = build_petz(&ch, &s).unwrap();
            let out = p.recover(&ch.apply(&s).unwrap()).unwrap();
            assert!(out.state.max_abs_diff(&s) < 1e-10);
        }
    }

    #[test]
    fn rank_deficient_reference_rejected() {
        let ch = encoding_channel(&zz(2, 0.3), 1).unwrap();
        let pure = BlochState::<f64>::new(1.0, 0.4, 0.0).unwrap().density();
        assert!(matches!(build_petz(&ch, &pure), Err(Error::Reference(_))));
    }

    #[test]
    fn prc_recovery_is_pointer_diagonal() {
        let rec = zz(4, FRAC_PI_4);
        let x = BlochState::<f64>::new(1.0, 1.1, 0.4).unwrap().density();
        for k in 1..=4 {
            let out = fragment_recovery(&x, &rec, k, &half()).unwrap();
            let expect = ComplexMatrix::from_diag(&[x[(0, 0)].re, x[(1, 1)].re]);
            assert!(out.state.max_abs_diff(&expect) < 1e-12);
        }
        let eq = BlochState::<f64>::new(1.0, FRAC_PI_2, 0.0).unwrap().density();
        let out = fragment_recovery(&eq, &rec, 2, &half()).unwrap();
        assert!(out.state.max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-12);
    }

    #[test]
    fn random_outputs_are_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rec = gue(3, 0.45, 9);
        for k in 1..=3 {
            let p = build_petz(&encoding_channel(&rec, k).unwrap(), &half()).unwrap();
            let x = random_state(2, &mut rng);
            let raw = p.apply_compressed(&p.channel().apply(x.matrix()).unwrap()).unwrap();
            assert!((raw.trace().re - 1.0).abs() < 1e-9);
            assert!(HermitianEigen::new(&raw.hermitian_part()).unwrap().min_eigenvalue() > -1e-9);
        }
    }

    #[test]
    fn dense_and_compressed_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rec = gue(3, 1.1, 5);
        let ch = encoding_channel(&rec, 3).unwrap();
        let s = random_state(2, &mut rng);
        let p = build_petz(&ch, &s).unwrap();
        let x = random_state(2, &mut rng);
        let y = ch.apply(&x).unwrap();
        // dense oracle formula with a Moore–Penrose inverse square root
        let a = inv_sqrt_psd(&ch.apply_operator(s.matrix()).unwrap()).unwrap();
        let ss = sqrt_psd(s.matrix()).unwrap();
        let oracle = &(&ss * &ch.apply_adjoint(&(&(&a * y.matrix()) * &a)).unwrap()) * &ss;
        assert!(p.apply(y.matrix()).unwrap().max_abs_diff(&oracle) < 1e-10);
    }

    #[test]
    fn support_violation_detected() {
        let rec = zz(3, FRAC_PI_4);
        let ch = encoding_channel(&rec, 2).unwrap();
        let p = build_petz(&ch, &half()).unwrap();
        // the antisymmetric two-site state is orthogonal to both branch vectors
        let h = 0.5f64.sqrt();
        let u = vec![cr(0.0), cr(h), cr(-h), cr(0.0)];
        for r in 0..2 {
            assert!(crate::linalg::inner(&rec.fragment_vector(r, 2).unwrap(), &u).norm() < 1e-15);
        }
        let bad = DensityMatrix::pure(&u).unwrap();
        assert!(matches!(p.recover(&bad), Err(Error::Support(_))));
    }

    #[test]
    fn quality_examples() {
        let rec = zz(5, FRAC_PI_4);
        for &theta in &[0.1, 0.7, FRAC_PI_4] {
            let x = BlochState::<f64>::new(1.0, theta, 0.0).unwrap().density();
            let expect = (1.0 - theta.sin().powi(2) / 2.0).sqrt();
            for k in 1..=5 {
                let q = recovery_quality(&x, &rec, k, &half()).unwrap();
                assert!((q - expect).abs() < 1e-12, "{q} {expect} {theta} {k}");
                assert!((prc_fidelity_closed_form(x.matrix()).unwrap() - expect).abs() < 1e-14);
            }
        }
        let mix = BlochState::<f64>::new(0.3, 0.0, 0.0).unwrap().density();
        for k in 1..=5 {
            assert!((recovery_quality(&mix, &rec, k, &half()).unwrap() - 1.0).abs() < 1e-12);
        }
        let q0 = recovery_quality(&half(), &zz(3, 0.0), 2, &half()).unwrap();
        assert!((q0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_examples() {
        let diag = ComplexMatrix::<f64>::from_diag(&[0.65, 0.35]);
        assert!((prc_fidelity_closed_form(&diag).unwrap() - 1.0).abs() < 1e-15);
        let plus = ComplexMatrix::<f64>::from_fn(2, 2, |_, _| cr(0.5));
        assert!((prc_fidelity_closed_form(&plus).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        let zero = ComplexMatrix::<f64>::from_diag(&[1.0, 0.0]);
        assert_eq!(prc_fidelity_closed_form(&zero).unwrap(), 1.0);
        // cross-check against simulated recovery
        let x = DensityMatrix::new(plus).unwrap();
        let q = recovery_quality(&x, &zz(3, FRAC_PI_4), 1, &half()).unwrap();
        assert!((q - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn m_map_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for rec in [zz(4, 0.3), gue(3, 0.8, 11)] {
            for k in 1..rec.n_sites() {
                let s = random_state(2, &mut rng);
                let m = build_m_map(&rec, k, &s).unwrap();
                let pk = build_petz(m.inner_channel(), &s).unwrap();
                let x = random_state(2, &mut rng);
                let lhs = m.apply(&m.outer_channel().apply_operator(x.matrix()).unwrap()).unwrap();
                let rhs = pk
                    .apply(&m.inner_channel().apply_operator(x.matrix()).unwrap())
                    .unwrap();
                assert!(trace_norm(&(&lhs - &rhs)).unwrap() < 1e-9);

                let big = random_state(1 << (k + 1), &mut rng);
                let out = m.apply(big.matrix()).unwrap();
                let small_trace = {
                    let keep: Vec<usize> = (0..k).collect();
                    let red = partial_trace(big.matrix(), &rec.env_dims()[..=k], &keep).unwrap();
                    let a = inv_sqrt_psd(&m.inner_channel().apply_operator(s.matrix()).unwrap()).unwrap();
                    let proj = &(&a * &m.inner_channel().apply_operator(s.matrix()).unwrap()) * &a;
                    (&proj * &red).trace().re
                };
                // trace preserved on the part of X the map can see
                assert!((out.trace().re - small_trace).abs() < 1e-10);

                let sys = random_state(2, &mut rng).into_matrix();
                let l = m.adjoint(&sys).unwrap().hs_inner(big.matrix());
                let r = sys.hs_inner(&out);
                assert!((l - r).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn r_map_defect_examples() {
        let x = BlochState::<f64>::new(1.0, 0.4, 0.2).unwrap().density();
        let prc = zz(5, FRAC_PI_4);
        let start = zz(5, 0.0);
        for k in 1..5 {
            assert!(r_map_defect(&x, &prc, k, &half()).unwrap() < 1e-12);
            assert!(r_map_defect(&x, &start, k, &half()).unwrap() < 1e-12);
        }
        let mid = gue(5, 0.5, 3);
        assert!(r_map_defect(&x, &mid, 1, &half()).unwrap() > 1e-6);
    }

    #[test]
    fn markov_product_state_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_state(2, &mut rng);
        let b = random_state(4, &mut rng);
        let cc = random_state(2, &mut rng);
        let rho = DensityMatrix::new(kron(&kron(a.matrix(), b.matrix()).unwrap(), cc.matrix()).unwrap()).unwrap();
        let r = markov_recovery(&rho, &[2, 2, 2, 2]).unwrap();
        assert!(r.reconstruction_defect().unwrap() < 1e-10);
    }

    #[test]
    fn markov_at_prc() {
        let rec = zz(4, FRAC_PI_4);
        let x = BlochState::<f64>::new(1.0, 0.6, 0.0).unwrap().density();
        let joint = joint_state(&x, &rec).unwrap();
        let dims = [2, 2, 2, 2, 2];
        // ρ on Γ ∪ F_3, then the k = 2 step
        let sub = DensityMatrix::new(partial_trace(&joint, &dims, &[0, 1, 2, 3]).unwrap()).unwrap();
        let cmi = conditional_mutual_information(sub.matrix(), &[2, 2, 2, 2], &[0], &[1, 2], &[3]).unwrap();
        let r = markov_recovery(&sub, &[2, 2, 2, 2]).unwrap();
        assert!(cmi.abs() < 1e-10);
        assert!(r.reconstruction_defect().unwrap() < 1e-8);

        let mid = zz(4, 0.3);
        let joint = joint_state(&x, &mid).unwrap();
        let sub = DensityMatrix::new(partial_trace(&joint, &dims, &[0, 1, 2, 3]).unwrap()).unwrap();
        let cmi = conditional_mutual_information(sub.matrix(), &[2, 2, 2, 2], &[0], &[1, 2], &[3]).unwrap();
        let defect = markov_recovery(&sub, &[2, 2, 2, 2])
            .unwrap()
            .reconstruction_defect()
            .unwrap();
        assert!(cmi > 1e-6 && defect > 1e-6);
    }
}
