//! Entropies, mutual information, relative entropy and fidelity.
//!
//! All quantities are computed in nats; [`LogBase`] converts for display.
//! The branch-based functions at the end evaluate `I(Γ:F_k)` for the
//! premeasurement state from overlap Gram matrices, which keeps them cheap
//! for any fragment size.

use serde::{Deserialize, Serialize};

use crate::channels::QuantumChannel;
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{partial_trace, ComplexMatrix, HermitianEigen};
use crate::model::BranchRecord;
use crate::petz::PetzMap;
use crate::scalar::Real;

/// Eigenvalues at or below this are dropped from `−Σ λ log λ` and count as
/// outside the support of a state.
pub const ENTROPY_FLOOR: f64 = 1e-14;
/// Weight of `ρ` outside `Supp(σ)` above which `S(ρ‖σ) = +∞`.
pub const SUPPORT_MASS_TOL: f64 = 1e-10;
/// Relative eigenvalue cutoff defining the supports used by [`fidelity`].
pub const FIDELITY_RANK_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LogBase {
    #[serde(rename = "e")]
    E,
    #[default]
    #[serde(rename = "2")]
    Two,
}

impl LogBase {
    pub fn from_nats<T: Real>(self, nats: T) -> T {
        match self {
            LogBase::E => nats,
            LogBase::Two => nats / T::LN_2(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            LogBase::E => "e",
            LogBase::Two => "2",
        }
    }
}

impl std::str::FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "e" | "E" => Ok(LogBase::E),
            "2" => Ok(LogBase::Two),
            other => Err(Error::Config(format!("log base must be 2 or e, got {other:?}"))),
        }
    }
}

/// An entropy together with the base it is expressed in.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyValue<T: Real = f64> {
    pub value: T,
    pub base: LogBase,
}

impl<T: Real> EntropyValue<T> {
    pub fn from_nats(nats: T, base: LogBase) -> Self {
        Self {
            value: base.from_nats(nats),
            base,
        }
    }
}

/// `−Σ λ ln λ` over eigenvalues above [`ENTROPY_FLOOR`].
pub fn entropy_of_spectrum<T: Real>(eigenvalues: &[T]) -> T {
    let floor = T::lit(ENTROPY_FLOOR);
    eigenvalues.iter().filter(|&&l| l > floor).map(|&l| -l * l.ln()).sum()
}

/// Von Neumann entropy in nats.
pub fn vn_entropy<T: Real>(rho: &ComplexMatrix<T>) -> Result<T> {
    Ok(entropy_of_spectrum(&HermitianEigen::new(rho)?.eigenvalues))
}

/// Von Neumann entropy in the requested base.
pub fn vn_entropy_in<T: Real>(rho: &ComplexMatrix<T>, base: LogBase) -> Result<EntropyValue<T>> {
    Ok(EntropyValue::from_nats(vn_entropy(rho)?, base))
}

fn disjoint(parts: &[&[usize]], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &i in parts.iter().flat_map(|p| p.iter()) {
        if i >= n || seen[i] {
            return Err(Error::Shape(format!(
                "factor sets {parts:?} overlap or exceed {n} factors"
            )));
        }
        seen[i] = true;
    }
    Ok(())
}

fn marginal_entropy<T: Real>(rho: &ComplexMatrix<T>, dims: &[usize], part: &[usize]) -> Result<T> {
    if part.is_empty() {
        return Ok(T::zero());
    }
    vn_entropy(&partial_trace(rho, dims, part)?)
}

/// `I(A:B) = S(A) + S(B) − S(AB)` in nats.
pub fn mutual_information<T: Real>(rho: &ComplexMatrix<T>, dims: &[usize], a: &[usize], b: &[usize]) -> Result<T> {
    disjoint(&[a, b], dims.len())?;
    let ab: Vec<usize> = a.iter().chain(b).copied().collect();
    Ok(marginal_entropy(rho, dims, a)? + marginal_entropy(rho, dims, b)? - marginal_entropy(rho, dims, &ab)?)
}

/// `I(A:B″|B′) = I(A:B′B″) − I(A:B′)` in nats.
pub fn conditional_mutual_information<T: Real>(
    rho: &ComplexMatrix<T>,
    dims: &[usize],
    a: &[usize],
    b_given: &[usize],
    b_new: &[usize],
) -> Result<T> {
    disjoint(&[a, b_given, b_new], dims.len())?;
    let joint: Vec<usize> = b_given.iter().chain(b_new).copied().collect();
    Ok(mutual_information(rho, dims, a, &joint)? - mutual_information(rho, dims, a, b_given)?)
}

/// `S(ρ‖σ)`, with `+∞` when `ρ` has weight outside the support of `σ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RelativeEntropy<T: Real = f64> {
    Finite(T),
    Infinite,
}

impl<T: Real> RelativeEntropy<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, RelativeEntropy::Finite(_))
    }

    /// The value, with `+∞` for the sentinel.
    pub fn value(&self) -> T {
        match *self {
            RelativeEntropy::Finite(v) => v,
            RelativeEntropy::Infinite => T::infinity(),
        }
    }
}

/// Weight of `ρ` on eigenvectors of `σ` whose eigenvalue is at most the floor.
pub fn support_leak<T: Real>(rho: &ComplexMatrix<T>, sigma_eig: &HermitianEigen<T>) -> T {
    let floor = T::lit(ENTROPY_FLOOR);
    let n = rho.rows();
    (0..n)
        .filter(|&j| sigma_eig.eigenvalues[j] <= floor)
        .map(|j| {
            let u = sigma_eig.eigenvectors.col(j);
            let ru = (rho * &ComplexMatrix::column(&u)).into_vec();
            crate::linalg::inner(&u, &ru).re
        })
        .sum()
}

fn check_pair<T: Real>(rho: &ComplexMatrix<T>, sigma: &ComplexMatrix<T>) -> Result<()> {
    if !rho.is_square() || rho.rows() != sigma.rows() || !sigma.is_square() {
        return Err(Error::Shape("states must share one square dimension".into()));
    }
    Ok(())
}

/// `Tr ρ ln ρ − Tr ρ ln σ` in nats.
pub fn relative_entropy<T: Real>(rho: &ComplexMatrix<T>, sigma: &ComplexMatrix<T>) -> Result<RelativeEntropy<T>> {
    check_pair(rho, sigma)?;
    let se = HermitianEigen::new(sigma)?;
    if support_leak(rho, &se) > T::lit(SUPPORT_MASS_TOL) {
        return Ok(RelativeEntropy::Infinite);
    }
    let floor = T::lit(ENTROPY_FLOOR);
    let cross: T = (0..rho.rows())
        .filter(|&j| se.eigenvalues[j] > floor)
        .map(|j| {
            let u = se.eigenvectors.col(j);
            let w = crate::linalg::inner(&u, &(rho * &ComplexMatrix::column(&u)).into_vec()).re;
            w * se.eigenvalues[j].ln()
        })
        .sum();
    Ok(RelativeEntropy::Finite(-vn_entropy(rho)? - cross))
}

/// Root fidelity `Tr sqrt(sqrt(ρ) σ sqrt(ρ))`.
///
/// Evaluated as the trace norm of `sqrt(ρ) sqrt(σ)` restricted to the two
/// supports, which keeps pure and low-rank states free of the `sqrt(ε)`
/// error that round-off eigenvalues would otherwise contribute.
pub fn fidelity<T: Real>(rho: &ComplexMatrix<T>, sigma: &ComplexMatrix<T>) -> Result<T> {
    check_pair(rho, sigma)?;
    let (a, b) = (support_factor(rho)?, support_factor(sigma)?);
    // B = D_ρ^{1/2} V_ρ† V_σ D_σ^{1/2}; F is the sum of its singular values.
    let m = &a.adjoint() * &b;
    let gram = if m.rows() <= m.cols() {
        &m * &m.adjoint()
    } else {
        &m.adjoint() * &m
    };
    Ok(HermitianEigen::new(&gram.hermitian_part())?
        .eigenvalues
        .iter()
        .map(|l| l.max(T::zero()).sqrt())
        .sum())
}

/// Columns `sqrt(p_i) |i>` over eigenvalues above a relative cutoff.
fn support_factor<T: Real>(rho: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let eig = HermitianEigen::new(rho)?;
    let cut = T::lit(FIDELITY_RANK_TOL) * eig.max_abs_eigenvalue();
    let kept: Vec<usize> = (0..rho.rows()).filter(|&i| eig.eigenvalues[i] > cut).collect();
    let n = rho.rows();
    if kept.is_empty() {
        return Ok(ComplexMatrix::zeros(n, 1));
    }
    Ok(ComplexMatrix::from_fn(n, kept.len(), |r, q| {
        eig.eigenvectors[(r, kept[q])] * eig.eigenvalues[kept[q]].sqrt()
    }))
}

/// Outcome of [`fawzi_renner_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FawziRenner<T: Real = f64> {
    /// `F(ρ, P∘Λ(ρ))`.
    pub fidelity: T,
    /// `e^{Δ/2}`, or 0 when `Δ` is not finite.
    pub bound: T,
    /// `fidelity − bound`.
    pub margin: T,
    /// `S(Λρ‖Λσ) − S(ρ‖σ)` in nats; `−∞` when `S(ρ‖σ) = +∞`.
    pub delta: T,
}

/// Compares the Petz round-trip fidelity with the relative-entropy drop.
/// The recovery uses reference `s`; the bound is a theorem when `s = σ`.
pub fn fawzi_renner_check<T: Real>(
    rho: &DensityMatrix<T>,
    sigma: &DensityMatrix<T>,
    ch: &QuantumChannel<T>,
    s: &DensityMatrix<T>,
) -> Result<FawziRenner<T>> {
    let cc = ch.compress()?;
    let petz = PetzMap::from_compressed(cc.clone(), s)?;
    let recovered = petz.recover_compressed(&cc.apply(rho)?)?;
    let f = fidelity(rho.matrix(), recovered.state.matrix())?;
    let before = relative_entropy(rho.matrix(), sigma.matrix())?;
    let after = relative_entropy(&cc.apply(rho)?, &cc.apply(sigma)?)?;
    let delta = match (after, before) {
        (_, RelativeEntropy::Infinite) => T::neg_infinity(),
        (RelativeEntropy::Finite(a), RelativeEntropy::Finite(b)) => a - b,
        // Cannot happen for a channel (data processing); treated as vacuous.
        (RelativeEntropy::Infinite, RelativeEntropy::Finite(_)) => T::infinity(),
    };
    let bound = if delta.is_finite() {
        (delta * T::lit(0.5)).exp()
    } else {
        T::zero()
    };
    Ok(FawziRenner {
        fidelity: f,
        bound,
        margin: f - bound,
        delta,
    })
}

/// Result of [`support_inclusion_check`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SupportInclusion {
    Holds,
    Violated,
    /// `Supp(ρ) ⊄ Supp(σ)` to begin with.
    Inapplicable,
}

/// Checks that `Supp(ρ) ⊆ Supp(σ)` implies `Supp(Λρ) ⊆ Supp(Λσ)`.
pub fn support_inclusion_check<T: Real>(
    rho: &ComplexMatrix<T>,
    sigma: &ComplexMatrix<T>,
    ch: &QuantumChannel<T>,
) -> Result<SupportInclusion> {
    check_pair(rho, sigma)?;
    let tol = T::lit(SUPPORT_MASS_TOL);
    if support_leak(rho, &HermitianEigen::new(sigma)?) > tol {
        return Ok(SupportInclusion::Inapplicable);
    }
    let cc = ch.compress()?;
    let out_sigma = HermitianEigen::new(&cc.apply(sigma)?)?;
    Ok(if support_leak(&cc.apply(rho)?, &out_sigma) > tol {
        SupportInclusion::Violated
    } else {
        SupportInclusion::Holds
    })
}

/// Entropies entering `I(Γ:F_k)` for the premeasurement state, in nats.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FragmentInformation<T: Real = f64> {
    /// `S(ρ_Γ(t))`.
    pub system: T,
    /// `S(ρ_{F_k})`.
    pub fragment: T,
    /// `S(ρ_{ΓF_k})`.
    pub joint: T,
}

impl<T: Real> FragmentInformation<T> {
    pub fn mutual(&self) -> T {
        self.system + self.fragment - self.joint
    }
}

fn hermitian_entropy<T: Real>(m: ComplexMatrix<T>) -> Result<T> {
    vn_entropy(&m.hermitian_part())
}

/// Entropies of `Γ`, `F_k` and `ΓF_k` from branch overlaps.
///
/// The vectors `|r>|v_r>` are orthonormal, so `ρ_{ΓF_k}` has the spectrum of
/// `γ_rr' <Ξ^{r'}_rest|Ξ^r_rest>`; `ρ_{F_k} = Σ_r γ_rr |v_r><v_r|` shares its
/// nonzero spectrum with `D^{1/2} G D^{1/2}` where `G` is the Gram matrix of
/// the `v_r` and `D = diag(γ_rr)`.
pub fn fragment_information<T: Real>(
    x: &DensityMatrix<T>,
    rec: &BranchRecord<T>,
    k: usize,
) -> Result<FragmentInformation<T>> {
    let n = rec.n_sites();
    if k > n {
        return Err(Error::Range(format!("fragment size {k} exceeds {n}")));
    }
    if x.dim() != rec.n_branches() {
        return Err(Error::Shape("system state does not match the branch count".into()));
    }
    let b = rec.n_branches();
    let full = rec.overlap_gram(1..=n);
    let prefix = rec.overlap_gram(1..=k);
    let rest = rec.overlap_gram(k + 1..=n);
    let system = hermitian_entropy(ComplexMatrix::from_fn(b, b, |r, rp| x[(r, rp)] * full[(rp, r)]))?;
    let joint = hermitian_entropy(ComplexMatrix::from_fn(b, b, |r, rp| x[(r, rp)] * rest[(rp, r)]))?;
    let d: Vec<T> = (0..b).map(|r| x[(r, r)].re.max(T::zero()).sqrt()).collect();
    let fragment = hermitian_entropy(ComplexMatrix::from_fn(b, b, |r, rp| prefix[(r, rp)] * (d[r] * d[rp])))?;
    Ok(FragmentInformation {
        system,
        fragment,
        joint,
    })
}

/// `R(k) = I(Γ:F_k)` for `k = 0..=N`, in nats (`R(0) = 0`).
pub fn redundancy_curve<T: Real>(x: &DensityMatrix<T>, rec: &BranchRecord<T>) -> Result<Vec<T>> {
    (0..=rec.n_sites())
        .map(|k| fragment_information(x, rec, k).map(|f| if k == 0 { T::zero() } else { f.mutual() }))
        .collect()
}
