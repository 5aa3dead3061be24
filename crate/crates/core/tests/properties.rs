use proptest::prelude::*;
use qdarwin::channels::{encoding_channel, encoding_compressed};
use qdarwin::experiments::output::{csv_string, parse_csv};
use qdarwin::experiments::random::random_density;
use qdarwin::experiments::{run_sweep, ExperimentConfig};
use qdarwin::infotheory::{fidelity, redundancy_curve, relative_entropy, vn_entropy};
use qdarwin::linalg::{herm_fn, kron, partial_trace, trace_norm};
use qdarwin::model::{
    evolve_branches, joint_state, prc_defect, prc_times, reduced_system_state, EnvironmentSpec, SystemObservable,
};
use qdarwin::petz::{build_petz, fragment_recovery, r_map_defect, recovery_quality};
use qdarwin::{BlochState, BranchRecord, ComplexMatrix64, CompositeSpace, DensityMatrix64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_4, PI};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn bloch() -> impl Strategy<Value = BlochState<f64>> {
    (0.0..=1.0f64, 0.0..PI, 0.0..2.0 * PI).prop_map(|(r, t, p)| BlochState::new(r, t, p).unwrap())
}

/// Z–Z or GUE(2) environment with `n` sites at time `t`.
fn record(gue: bool, n: usize, t: f64, seed: u64) -> BranchRecord<f64> {
    let env = if gue {
        EnvironmentSpec::gue(n, 1.0, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    } else {
        EnvironmentSpec::zz(n, 1.0).unwrap()
    };
    evolve_branches(&SystemObservable::pauli_z(), &env, t).unwrap()
}

fn any_record(max_n: usize) -> impl Strategy<Value = BranchRecord<f64>> {
    (any::<bool>(), 1..=max_n, 0.0..2.0f64, any::<u64>()).prop_map(|(g, n, t, s)| record(g, n, t, s))
}

fn state(d: usize, seed: u64) -> DensityMatrix64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_density(d, 1 + (seed as usize) % d, &mut rng).unwrap()
}

fn full_rank(d: usize, seed: u64) -> DensityMatrix64 {
    random_density(d, d, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn identity_function_reconstructs(seed in any::<u64>(), d in 1usize..6) {
        let m = &full_rank(d, seed).into_matrix().scale(3.0) - &ComplexMatrix64::identity(d);
        let back = herm_fn(&m, |x| x, None).unwrap();
        prop_assert!(back.max_abs_diff(&m) < 1e-12 * m.max_abs().max(1.0));
    }

    #[test]
    fn staged_partial_traces(seed in any::<u64>()) {
        let rho = state(8, seed);
        let dims = [2, 2, 2];
        let once = partial_trace(&rho, &dims, &[0]).unwrap();
        let twice = partial_trace(&partial_trace(&rho, &dims, &[0, 1]).unwrap(), &[2, 2], &[0]).unwrap();
        prop_assert!(once.max_abs_diff(&twice) < 1e-12);
        let scalar = partial_trace(&rho, &dims, &[]).unwrap();
        prop_assert!((scalar[(0, 0)] - rho.trace()).norm() < 1e-12);
    }

    #[test]
    fn kron_is_associative(
        a in proptest::collection::vec(-50i32..50, 4),
        b in proptest::collection::vec(-50i32..50, 6),
        c in proptest::collection::vec(-50i32..50, 2),
    ) {
        // integer entries make every product exact, so index placement is compared bit for bit
        let int = |v: &[i32], r: usize, c: usize| {
            ComplexMatrix64::from_fn(r, c, |i, j| qdarwin::Complex64::new(v[i * c + j] as f64, (v[i * c + j] % 7) as f64))
        };
        let (x, y, z) = (int(&a, 2, 2), int(&b, 3, 2), int(&c, 1, 2));
        let left = kron(&kron(&x, &y).unwrap(), &z).unwrap();
        let right = kron(&x, &kron(&y, &z).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn fragments_nest(n in 1usize..10) {
        let space = CompositeSpace::qubits(n).unwrap();
        for k in 0..n {
            let small = space.fragment(k).unwrap();
            let big = space.fragment(k + 1).unwrap();
            prop_assert!(big.contains(&small));
            prop_assert_eq!(big.size(), k + 1);
        }
    }

    #[test]
    fn joint_state_is_a_state(x in bloch(), rec in any_record(4)) {
        let joint = joint_state(&x.density(), &rec).unwrap();
        prop_assert!((joint.trace().re - 1.0).abs() < 1e-10);
        prop_assert!(joint.eigen().min_eigenvalue() > -1e-10);
        if x.r == 1.0 {
            prop_assert!((joint.purity() - 1.0).abs() < 1e-10);
        }
        let sys = reduced_system_state(&x.density(), &rec).unwrap();
        let gamma = x.gamma();
        prop_assert!((sys[(0, 0)] - gamma[(0, 0)]).norm() < 1e-14);
        prop_assert!((sys[(1, 1)] - gamma[(1, 1)]).norm() < 1e-14);
    }

    #[test]
    fn prc_times_are_orthogonal(n in 1usize..12, g in 0.05..3.0f64, m in 0usize..4) {
        let env = EnvironmentSpec::zz(n, g).unwrap();
        let t = prc_times(&SystemObservable::pauli_z(), &env).unwrap().time(m);
        let rec = evolve_branches(&SystemObservable::pauli_z(), &env, t).unwrap();
        for k in 1..=n {
            prop_assert!(prc_defect(&rec, k).unwrap() < 1e-12);
        }
    }

    #[test]
    fn encoding_channels_are_cptp(rec in any_record(4)) {
        for k in 1..=rec.n_sites() {
            let ch = encoding_channel(&rec, k).unwrap();
            prop_assert!(ch.completeness_defect() < 1e-10);
            prop_assert!(ch.choi_min_eigenvalue().unwrap() > -1e-10);
        }
    }

    #[test]
    fn encoding_ignores_coherences(r in 0.0..=1.0f64, theta in 0.0..PI, p1 in 0.0..6.0f64, p2 in 0.0..6.0f64, rec in any_record(4)) {
        let a = BlochState::new(r, theta, p1).unwrap().density();
        let b = BlochState::new(r, theta, p2).unwrap().density();
        for k in 1..=rec.n_sites() {
            let ch = encoding_channel(&rec, k).unwrap();
            let d = trace_norm(&(ch.apply(&a).unwrap().matrix() - ch.apply(&b).unwrap().matrix())).unwrap();
            prop_assert!(d < 1e-12);
        }
    }

    #[test]
    fn compression_matches_kraus_form(rec in any_record(4), seed in any::<u64>()) {
        let x = state(2, seed);
        for k in 1..=rec.n_sites() {
            let dense = encoding_channel(&rec, k).unwrap().apply_operator(x.matrix()).unwrap();
            let cc = encoding_compressed(&rec, k, true).unwrap();
            let embedded = cc.embed(&cc.apply(x.matrix()).unwrap()).unwrap();
            prop_assert!(trace_norm(&(&dense - &embedded)).unwrap() < 1e-10);
        }
    }

    #[test]
    fn petz_fixes_reference(rec in any_record(4), seed in any::<u64>()) {
        let s = full_rank(2, seed);
        for k in 1..=rec.n_sites() {
            let ch = encoding_channel(&rec, k).unwrap();
            let back = build_petz(&ch, &s).unwrap().apply(&ch.apply_operator(s.matrix()).unwrap()).unwrap();
            prop_assert!(trace_norm(&(&back - s.matrix())).unwrap() < 1e-10);
        }
    }

    #[test]
    fn recovered_states_are_valid(x in bloch(), rec in any_record(8), seed in any::<u64>()) {
        let s = full_rank(2, seed);
        for k in 1..=rec.n_sites() {
            let out = fragment_recovery(&x.density(), &rec, k, &s).unwrap();
            prop_assert!(out.clip < 1e-8);
            prop_assert!((out.state.trace().re - 1.0).abs() < 1e-12);
            prop_assert!(out.state.eigen().min_eigenvalue() >= -1e-12);
        }
    }

    #[test]
    fn recovery_fixed_point(x in bloch(), rec in any_record(6)) {
        let s = DensityMatrix64::maximally_mixed(2);
        let q: Vec<f64> = (1..=rec.n_sites()).map(|k| recovery_quality(&x.density(), &rec, k, &s).unwrap()).collect();
        for k in 1..rec.n_sites() {
            if r_map_defect(&x.density(), &rec, k, &s).unwrap() < 1e-12 {
                prop_assert!((q[k] - q[k - 1]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zz_prc_quality_independent_of_k(x in bloch(), n in 1usize..11, m in 0usize..3) {
        let env = EnvironmentSpec::zz(n, 1.0).unwrap();
        let t = prc_times(&SystemObservable::pauli_z(), &env).unwrap().time(m);
        let rec = evolve_branches(&SystemObservable::pauli_z(), &env, t).unwrap();
        let s = DensityMatrix64::maximally_mixed(2);
        let q1 = recovery_quality(&x.density(), &rec, 1, &s).unwrap();
        for k in 2..=n {
            prop_assert!((recovery_quality(&x.density(), &rec, k, &s).unwrap() - q1).abs() < 1e-9);
        }
    }

    #[test]
    fn redundancy_curve_bounds(x in bloch(), rec in any_record(10)) {
        let r = redundancy_curve(&x.density(), &rec).unwrap();
        let s = vn_entropy(reduced_system_state(&x.density(), &rec).unwrap().matrix()).unwrap();
        prop_assert_eq!(r[0], 0.0);
        for k in 1..r.len() {
            // each increment is a conditional mutual information
            prop_assert!(r[k] - r[k - 1] >= -1e-9);
        }
        prop_assert!(r[rec.n_sites()] <= 2.0 * s + 1e-9);
    }

    #[test]
    fn relative_entropy_contracts(rec in any_record(4), a in any::<u64>(), b in any::<u64>()) {
        let rho = state(2, a);
        let sigma = full_rank(2, b);
        let before = relative_entropy(rho.matrix(), sigma.matrix()).unwrap().value();
        for k in 1..=rec.n_sites() {
            let ch = encoding_channel(&rec, k).unwrap();
            let after = relative_entropy(
                &ch.apply_operator(rho.matrix()).unwrap(),
                &ch.apply_operator(sigma.matrix()).unwrap(),
            ).unwrap().value();
            prop_assert!(after <= before + 1e-9);
        }
    }

    #[test]
    fn fidelity_bounds(a in any::<u64>(), b in any::<u64>(), d in 1usize..5) {
        let (rho, sigma) = (state(d, a), state(d, b));
        let f = fidelity(rho.matrix(), sigma.matrix()).unwrap();
        prop_assert!((0.0..=1.0 + 1e-10).contains(&f));
        prop_assert!((f - fidelity(sigma.matrix(), rho.matrix()).unwrap()).abs() < 1e-10);
        prop_assert!((fidelity(rho.matrix(), rho.matrix()).unwrap() - 1.0).abs() < 1e-10);
        if (f - 1.0).abs() < 1e-12 {
            prop_assert!(trace_norm(&(rho.matrix() - sigma.matrix())).unwrap() < 1e-8);
        }
    }

    #[test]
    fn entropy_range(seed in any::<u64>(), d in 1usize..6) {
        let s = vn_entropy(state(d, seed).matrix()).unwrap();
        prop_assert!(s >= -1e-12 && s <= (d as f64).ln() + 1e-12);
    }

    #[test]
    fn single_precision_tracks_double(x in bloch(), t in 0.0..1.5f64) {
        let env64 = EnvironmentSpec::zz(3, 1.0).unwrap();
        let env32 = EnvironmentSpec::<f32>::zz(3, 1.0).unwrap();
        let r64 = evolve_branches(&SystemObservable::pauli_z(), &env64, t).unwrap();
        let r32 = evolve_branches(&SystemObservable::<f32>::pauli_z(), &env32, t as f32).unwrap();
        let x32 = BlochState::new(x.r as f32, x.theta as f32, x.phi as f32).unwrap();
        let c64 = redundancy_curve(&x.density(), &r64).unwrap();
        let c32 = redundancy_curve(&x32.density(), &r32).unwrap();
        for (a, b) in c64.iter().zip(&c32) {
            prop_assert!((a - *b as f64).abs() < 1e-3);
        }
    }
}

proptest! {
    #![proptest_config(config(8))]

    #[test]
    fn sweeps_are_reproducible(seed in any::<u64>(), n in 1usize..7, gue in any::<bool>(), theta in 0.0..PI) {
        let text = format!(
            r#"{{"model":"{}","n":{n},"g":1.0,"seed":{seed},
                "initial_state":{{"r":0.9,"theta":{theta}}},
                "time_grid":{{"t_start":0.0,"t_end":{FRAC_PI_4},"count":3}}}}"#,
            if gue { "zh_gue" } else { "zz" }
        );
        let cfg = ExperimentConfig::from_json(&text).unwrap();
        let a = csv_string(&run_sweep(&cfg).unwrap().rows);
        let b = csv_string(&run_sweep(&cfg).unwrap().rows);
        prop_assert_eq!(&a, &b);
        let parsed = parse_csv(&a).unwrap();
        prop_assert_eq!(csv_string(&parsed), a);
    }
}
