//! Numerical checks of the channel, recovery and Markov-chain identities on
//! small environments.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{BlochSpec, BuiltModel, ExperimentConfig, ModelKind, ReferenceSpec, TimeGrid};
use super::random::{random_density, random_density_in, random_hermitian};
use crate::channels::{encoding_channel, nest_check, random_channel, QuantumChannel, TP_TOL};
use crate::error::{Error, Result};
use crate::infotheory::{
    conditional_mutual_information, fawzi_renner_check, support_inclusion_check, support_leak, LogBase,
    SupportInclusion,
};
use crate::linalg::{partial_trace, support_projector, trace_norm, ComplexMatrix, HermitianEigen, PINV_TOL};
use crate::model::{dense_joint_state, evolve_branches, joint_state, BranchRecord};
use crate::petz::{build_m_map, build_petz, markov_recovery, r_map_defect, REFERENCE_FLOOR};
use crate::DensityMatrix;

/// Tolerance for every identity defect.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Trace-norm tolerance between the Kraus form and the dense evolution.
pub const ORACLE_TOL: f64 = 1e-10;
/// Allowed shortfall of the recovery fidelity below `e^{Δ/2}`.
pub const FAWZI_RENNER_TOL: f64 = 1e-8;
/// Conditional mutual information below which a Markov chain is assumed.
pub const MARKOV_CMI: f64 = 1e-10;
/// Largest environment the suite accepts; the dense oracle is exponential in `n`.
pub const VERIFY_MAX_SITES: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Random inputs for the dense-evolution oracle.
    pub oracle_inputs: usize,
    /// Randomized support-inclusion trials.
    pub support_trials: usize,
    /// Randomized `(ρ, σ, Λ_k)` trials for the recovery bound.
    pub fawzi_renner_trials: usize,
    /// Replace `Λ_k` by a rescaled, non-trace-preserving Kraus set.
    pub inject_non_tp: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            oracle_inputs: 100,
            support_trials: 100,
            fawzi_renner_trials: 100,
            inject_non_tp: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub max_defect: f64,
    pub tolerance: f64,
    pub trials: usize,
    /// Set when the check could not be evaluated.
    pub error: Option<String>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        // NaN defects fail
        self.error.is_none() && self.max_defect <= self.tolerance
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Fixed-width defect table.
    pub fn table(&self) -> String {
        let mut out = format!(
            "{:<24} {:>7} {:>12} {:>10}  status\n",
            "check", "trials", "max defect", "tol"
        );
        for c in &self.checks {
            let status = match (&c.error, c.passed()) {
                (Some(e), _) => format!("FAIL ({e})"),
                (None, true) => "ok".into(),
                (None, false) => "FAIL".into(),
            };
            let _ = writeln!(
                out,
                "{:<24} {:>7} {:>12.3e} {:>10.1e}  {status}",
                c.name, c.trials, c.max_defect, c.tolerance
            );
        }
        out
    }
}

struct Ctx<'a> {
    model: &'a BuiltModel,
    times: Vec<f64>,
    recs: Vec<BranchRecord<f64>>,
    opts: VerifyOptions,
}

impl Ctx<'_> {
    fn n(&self) -> usize {
        self.recs[0].n_sites()
    }

    fn channel(&self, rec: &BranchRecord<f64>, k: usize) -> Result<QuantumChannel<f64>> {
        let ch = encoding_channel(rec, k)?;
        if !self.opts.inject_non_tp {
            return Ok(ch);
        }
        let mut kraus = ch.kraus().to_vec();
        kraus[0] = kraus[0].scale(1.1);
        QuantumChannel::from_kraus_unchecked(kraus)
    }

    /// Every `(record, k)` with `1 ≤ k < n`.
    fn nested(&self) -> impl Iterator<Item = (&BranchRecord<f64>, usize)> {
        let n = self.n();
        self.recs.iter().flat_map(move |r| (1..n).map(move |k| (r, k)))
    }

    fn all_k(&self) -> impl Iterator<Item = (&BranchRecord<f64>, usize)> {
        let n = self.n();
        self.recs.iter().flat_map(move |r| (1..=n).map(move |k| (r, k)))
    }
}

type Outcome = Result<(f64, usize)>;

fn run(name: &'static str, tolerance: f64, f: impl FnOnce() -> Outcome) -> CheckResult {
    match f() {
        Ok((max_defect, trials)) => CheckResult {
            name,
            max_defect,
            tolerance,
            trials,
            error: None,
        },
        Err(e) => CheckResult {
            name,
            max_defect: f64::NAN,
            tolerance,
            trials: 0,
            error: Some(e.to_string()),
        },
    }
}

fn reference_state(ctx: &Ctx) -> Outcome {
    let min = ctx.model.reference.eigen().min_eigenvalue();
    if min <= REFERENCE_FLOOR {
        return Err(Error::Reference(format!(
            "minimum eigenvalue {min:.3e} is not above {REFERENCE_FLOOR:e}"
        )));
    }
    Ok((0.0, 1))
}

fn trace_preservation(ctx: &Ctx) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut trials = 0;
    for (rec, k) in ctx.all_k() {
        worst = worst.max(ctx.channel(rec, k)?.completeness_defect());
        trials += 1;
    }
    Ok((worst, trials))
}

fn complete_positivity(ctx: &Ctx) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut trials = 0;
    for (rec, k) in ctx.all_k() {
        worst = worst.max(-ctx.channel(rec, k)?.choi_min_eigenvalue()?);
        trials += 1;
    }
    Ok((worst.max(0.0), trials))
}

fn oracle(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let n = ctx.n();
    let dims = [vec![2], ctx.model.environment.env_dims()].concat();
    let mut worst: f64 = 0.0;
    for i in 0..ctx.opts.oracle_inputs {
        let slot = i % ctx.times.len();
        let x = random_density(2, rng.random_range(1..=2), rng)?;
        let dense = dense_joint_state(&ctx.model.system, &ctx.model.environment, &x, ctx.times[slot])?;
        for k in 1..=n {
            let keep: Vec<usize> = (1..=k).collect();
            let oracle = partial_trace(dense.matrix(), &dims, &keep)?;
            let kraus = ctx.channel(&ctx.recs[slot], k)?.apply_operator(x.matrix())?;
            worst = worst.max(trace_norm(&(&kraus - &oracle))?);
        }
    }
    Ok((worst, ctx.opts.oracle_inputs))
}

fn nesting(ctx: &Ctx, adjoint: bool) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut trials = 0;
    for (rec, k) in ctx.nested() {
        let d = nest_check(rec, k)?;
        worst = worst.max(if adjoint { d.adjoint } else { d.channel });
        trials += 1;
    }
    Ok((worst, trials))
}

fn reference_fixed_point(ctx: &Ctx) -> Outcome {
    let s = &ctx.model.reference;
    let mut worst: f64 = 0.0;
    let mut trials = 0;
    for (rec, k) in ctx.all_k() {
        let ch = ctx.channel(rec, k)?;
        let petz = build_petz(&ch, s)?;
        let back = petz.apply(&ch.apply_operator(s.matrix())?)?;
        worst = worst.max(trace_norm(&(&back - s.matrix()))?);
        trials += 1;
    }
    Ok((worst, trials))
}

/// `M_k ∘ Λ_{k+1} = P_{Λ_k} ∘ Λ_k`, trace preservation of `M_k` on states of
/// `Supp Λ_{k+1}(s)`, and `<M_k†(x), X> = <x, M_k(X)>`.
struct MChecks {
    composition: f64,
    trace: f64,
    pairing: f64,
    r_map: f64,
    trials: usize,
}

fn m_checks(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<MChecks> {
    let s = &ctx.model.reference;
    let mut out = MChecks {
        composition: 0.0,
        trace: 0.0,
        pairing: 0.0,
        r_map: 0.0,
        trials: 0,
    };
    for (rec, k) in ctx.nested() {
        let m = build_m_map(rec, k, s)?;
        let small = ctx.channel(rec, k)?;
        let big = ctx.channel(rec, k + 1)?;
        let pk = build_petz(&small, s)?;
        let pk1 = build_petz(&big, s)?;
        let support = support_projector(&big.apply_operator(s.matrix())?, PINV_TOL)?;
        let support_eig = HermitianEigen::new(&support)?;
        let basis_cols: Vec<usize> = (0..support.rows())
            .filter(|&j| support_eig.eigenvalues[j] > 0.5)
            .collect();
        let basis = ComplexMatrix::from_fn(support.rows(), basis_cols.len(), |i, q| {
            support_eig.eigenvectors[(i, basis_cols[q])]
        });
        let inputs = [
            ctx.model.initial.clone(),
            random_density(2, 2, rng)?,
            random_density(2, 1, rng)?,
        ];
        for x in &inputs {
            let lifted = big.apply_operator(x.matrix())?;
            let via_m = m.apply(&lifted)?;
            let via_petz = pk.apply(&small.apply_operator(x.matrix())?)?;
            out.composition = out.composition.max(trace_norm(&(&via_m - &via_petz))?);

            // ‖R_k(x') − x'‖₁ with x' = P_{k+1}Λ_{k+1}(x) and R_k(x') = M_k(Λ_{k+1}x)
            let x_prime = pk1.apply(&lifted)?;
            let lhs = trace_norm(&(&via_m - &x_prime))?;
            out.r_map = out.r_map.max((lhs - r_map_defect(x, rec, k, s)?).abs());

            let big_state = random_density_in(&basis, basis.cols(), rng)?;
            out.trace = out.trace.max((m.apply(big_state.matrix())?.trace().re - 1.0).abs());

            let probe = random_hermitian(2, rng);
            let anywhere = random_density(big.dim_out(), 3, rng)?;
            let l = m.adjoint(&probe)?.hs_inner(anywhere.matrix());
            let r = probe.hs_inner(&m.apply(anywhere.matrix())?);
            out.pairing = out.pairing.max((l - r).norm());
            out.trials += 1;
        }
    }
    Ok(out)
}

fn markov(ctx: &Ctx) -> Outcome {
    let n = ctx.n();
    let dims = [vec![2], ctx.model.environment.env_dims()].concat();
    let mut worst: f64 = 0.0;
    let mut trials = 0;
    for rec in &ctx.recs {
        let joint = joint_state(&ctx.model.initial, rec)?;
        for k in 1..n {
            let keep: Vec<usize> = (0..=k + 1).collect();
            let sub = DensityMatrix::new(partial_trace(joint.matrix(), &dims, &keep)?.hermitian_part())?;
            let sub_dims = &dims[..=k + 1];
            let frag: Vec<usize> = (1..=k).collect();
            let cmi = conditional_mutual_information(sub.matrix(), sub_dims, &[0], &frag, &[k + 1])?;
            if cmi < MARKOV_CMI {
                worst = worst.max(markov_recovery(&sub, sub_dims)?.reconstruction_defect()?);
                trials += 1;
            }
        }
    }
    Ok((worst, trials))
}

fn support_inclusion(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst: f64 = 0.0;
    for trial in 0..ctx.opts.support_trials {
        let (ch, d) = if trial % 2 == 0 {
            let rec = &ctx.recs[rng.random_range(0..ctx.recs.len())];
            (ctx.channel(rec, rng.random_range(1..=ctx.n()))?, 2)
        } else {
            let d_in: usize = rng.random_range(2..=4);
            let d_out: usize = rng.random_range(2..=4);
            let n_kraus = rng.random_range(d_in.div_ceil(d_out).max(1)..=3);
            (random_channel(d_in, d_out, n_kraus, rng)?, d_in)
        };
        let sigma = random_density(d, rng.random_range(1..=d), rng)?;
        let eig = sigma.eigen();
        let cols: Vec<usize> = (0..d).filter(|&j| eig.eigenvalues[j] > 1e-12).collect();
        let basis = ComplexMatrix::from_fn(d, cols.len(), |i, q| eig.eigenvectors[(i, cols[q])]);
        let rho = random_density_in(&basis, rng.random_range(1..=cols.len()), rng)?;
        let leak = {
            let out_sigma = HermitianEigen::new(&ch.apply_operator(sigma.matrix())?.hermitian_part())?;
            support_leak(&ch.apply_operator(rho.matrix())?, &out_sigma)
        };
        worst = worst.max(leak);
        match support_inclusion_check(rho.matrix(), sigma.matrix(), &ch)? {
            SupportInclusion::Holds => {}
            other => {
                return Err(Error::Support(format!("trial {trial}: {other:?} (leak {leak:.3e})")));
            }
        }
    }
    Ok((worst, ctx.opts.support_trials))
}

/// Worst `e^{Δ/2} − F` and worst `Δ` over randomized trials with `s = σ`
/// and Hilbert–Schmidt random (full-rank) `ρ`, `σ`.
fn fawzi_renner(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<(f64, f64, usize)> {
    let mut shortfall = f64::NEG_INFINITY;
    let mut delta = f64::NEG_INFINITY;
    for _ in 0..ctx.opts.fawzi_renner_trials {
        let rec = &ctx.recs[rng.random_range(0..ctx.recs.len())];
        let ch = ctx.channel(rec, rng.random_range(1..=ctx.n()))?;
        let rho = random_density(2, 2, rng)?;
        let sigma = random_density(2, 2, rng)?;
        let fr = fawzi_renner_check(&rho, &sigma, &ch, &sigma)?;
        shortfall = shortfall.max(-fr.margin);
        delta = delta.max(fr.delta);
    }
    Ok((shortfall, delta, ctx.opts.fawzi_renner_trials))
}

/// Runs every identity check on the configured model at each grid time.
/// Check failures are reported, not returned as errors.
pub fn verify_suite(cfg: &ExperimentConfig, opts: VerifyOptions) -> Result<VerifyReport> {
    cfg.validate()?;
    if cfg.n > VERIFY_MAX_SITES {
        return Err(Error::Size(format!(
            "identity suite runs dense checks; n = {} exceeds {VERIFY_MAX_SITES}",
            cfg.n
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let model = cfg.build_with(&mut rng)?;
    let times = cfg.time_grid.times();
    let recs = times
        .iter()
        .map(|&t| evolve_branches(&model.system, &model.environment, t))
        .collect::<Result<Vec<_>>>()?;
    let ctx = Ctx {
        model: &model,
        times,
        recs,
        opts,
    };
    let nested_applicable = ctx.n() > 1;

    let mut checks = vec![
        run("reference_state", 0.0, || reference_state(&ctx)),
        run("trace_preservation", TP_TOL, || trace_preservation(&ctx)),
        run("complete_positivity", TP_TOL, || complete_positivity(&ctx)),
        run("dense_oracle", ORACLE_TOL, || oracle(&ctx, &mut rng)),
        run("reference_fixed_point", IDENTITY_TOL, || reference_fixed_point(&ctx)),
    ];
    if nested_applicable {
        checks.push(run("channel_nesting", IDENTITY_TOL, || nesting(&ctx, false)));
        checks.push(run("adjoint_nesting", IDENTITY_TOL, || nesting(&ctx, true)));
        let m = m_checks(&ctx, &mut rng);
        let pick = |f: fn(&MChecks) -> f64| match &m {
            Ok(v) => Ok((f(v), v.trials)),
            Err(e) => Err(Error::Domain(e.to_string())),
        };
        checks.push(run("m_composition", IDENTITY_TOL, || pick(|v| v.composition)));
        checks.push(run("m_trace_preservation", IDENTITY_TOL, || pick(|v| v.trace)));
        checks.push(run("m_adjoint_pairing", IDENTITY_TOL, || pick(|v| v.pairing)));
        checks.push(run("r_map_defect", IDENTITY_TOL, || pick(|v| v.r_map)));
        checks.push(run("markov_recovery", IDENTITY_TOL, || markov(&ctx)));
    }
    checks.push(run("support_inclusion", SUPPORT_LEAK_TOL, || {
        support_inclusion(&ctx, &mut rng)
    }));
    let fr = fawzi_renner(&ctx, &mut rng);
    let (fr_bound, fr_delta) = match fr {
        Ok((s, d, n)) => (Ok((s, n)), Ok((d, n))),
        Err(e) => (Err(e.to_string()), Err(e.to_string())),
    };
    checks.push(run("fawzi_renner_bound", FAWZI_RENNER_TOL, || {
        fr_bound.map_err(Error::Domain)
    }));
    checks.push(run("data_processing", IDENTITY_TOL, || fr_delta.map_err(Error::Domain)));
    Ok(VerifyReport { checks })
}

const SUPPORT_LEAK_TOL: f64 = IDENTITY_TOL;

#[derive(Serialize)]
struct NamedReport<'a> {
    suite: &'a str,
    passed: bool,
    checks: &'a [CheckResult],
}

/// JSON array of `{suite, passed, checks}`; unevaluated defects become `null`.
pub fn reports_json(reports: &[(String, VerifyReport)]) -> Result<String> {
    let named: Vec<NamedReport> = reports
        .iter()
        .map(|(suite, r)| NamedReport {
            suite,
            passed: r.passed(),
            checks: &r.checks,
        })
        .collect();
    Ok(serde_json::to_string_pretty(&named)?)
}

/// Bundled small-size suites: Z–Z with `n = 4` and GUE(2) with `n = 3`.
pub fn default_suites() -> Vec<(&'static str, ExperimentConfig)> {
    let base = |model, n, seed, t_end, reference| ExperimentConfig {
        model,
        n,
        g: 1.0,
        couplings: None,
        g_spread: 0.5,
        initial_state: BlochSpec {
            r: 1.0,
            theta: 0.6,
            phi: 0.3,
        },
        ready_state: Default::default(),
        time_grid: TimeGrid {
            t_start: 0.0,
            t_end,
            count: 5,
        },
        k_range: None,
        reference,
        seed,
        log_base: LogBase::Two,
    };
    vec![
        (
            "zz_n4",
            base(
                ModelKind::Zz,
                4,
                0,
                std::f64::consts::FRAC_PI_4,
                ReferenceSpec::MaximallyMixed,
            ),
        ),
        (
            "gue_n3",
            base(
                ModelKind::ZhGue,
                3,
                7,
                1.2,
                ReferenceSpec::Bloch(BlochSpec {
                    r: 0.5,
                    theta: 1.0,
                    phi: 0.4,
                }),
            ),
        ),
    ]
}
