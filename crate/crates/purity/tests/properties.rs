//! Cross-module invariants on seeded random instances: substrate identities,
//! entropy monotonicities, optimizer contracts and protocol bookkeeping.

use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use purity::entropy;
use purity::inequalities;
use purity::povm_opt::{
    kappa_one_way_level, one_shot_deficit, OptimizerConfig, RankOnePovm,
};
use purity::qmat::{
    apply_povm, dephase, partial_trace, tensor, BipartiteState, Povm, Subsystem,
};
use purity::random;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn partial_trace_inverts_tensor(seed in 0u64..1u64 << 48, da in 2usize..4, db in 2usize..4) {
        let mut rng = random::rng(seed);
        let sigma = random::density(&mut rng, da);
        let tau = random::density(&mut rng, db);
        let joint = BipartiteState::new(da, db, tensor(&sigma, &tau)).unwrap();
        let back_a = partial_trace(&joint, Subsystem::A);
        let back_b = partial_trace(&joint, Subsystem::B);
        for i in 0..da {
            for j in 0..da {
                prop_assert!((back_a.matrix()[(i, j)] - sigma.matrix()[(i, j)]).norm() <= 1e-10);
            }
        }
        for i in 0..db {
            for j in 0..db {
                prop_assert!((back_b.matrix()[(i, j)] - tau.matrix()[(i, j)]).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn dephase_idempotent_and_trace_preserving(seed in 0u64..1u64 << 48, d in 2usize..5) {
        let mut rng = random::rng(seed);
        let rho = random::density(&mut rng, d);
        let basis = random::unitary(&mut rng, d);
        let once = dephase(&rho, &basis).unwrap();
        let twice = dephase(&once, &basis).unwrap();
        prop_assert!((once.matrix().trace().re - 1.0).abs() <= 1e-10);
        for i in 0..d {
            for j in 0..d {
                prop_assert!((once.matrix()[(i, j)] - twice.matrix()[(i, j)]).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn apply_povm_yields_valid_ensemble(seed in 0u64..1u64 << 48) {
        let mut rng = random::rng(seed);
        let s = random::bipartite(&mut rng, 2, 3);
        let m = random::rank_one_isometry(&mut rng, 4, 2);
        let povm = RankOnePovm::from_isometry(&m).unwrap().to_povm().unwrap();
        let cq = apply_povm(&povm, &s).unwrap();
        let total: f64 = cq.probs().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-10);
        for st in cq.states() {
            // re-validated from scratch
            prop_assert!(purity::qmat::DensityMatrix::new(st.matrix().clone()).is_ok());
        }
    }

    #[test]
    fn mutual_info_within_dimension_bounds(seed in 0u64..1u64 << 48, da in 2usize..4, db in 2usize..4) {
        let mut rng = random::rng(seed);
        let s = random::bipartite(&mut rng, da, db);
        let i = entropy::mutual_info(&s);
        let cap = 2.0 * (da.min(db) as f64).log2();
        prop_assert!(i >= -1e-9);
        prop_assert!(i <= cap + 1e-9);
    }

    #[test]
    fn strong_subadditivity_on_random_tripartite(seed in 0u64..1u64 << 48) {
        use purity::qmat::TripartiteState;
        let mut rng = random::rng(seed);
        let rho = random::density(&mut rng, 8);
        let t = TripartiteState::new([2, 2, 2], rho).unwrap();
        prop_assert!(entropy::conditional_mutual_info(&t) >= -1e-9);
    }

    #[test]
    fn cq_joint_entropy_identity(seed in 0u64..1u64 << 48) {
        let mut rng = random::rng(seed);
        let s = random::bipartite(&mut rng, 2, 2);
        let povm = Povm::computational(2);
        let cq = apply_povm(&povm, &s).unwrap();
        let lhs = entropy::von_neumann(cq.to_bipartite().state());
        let rhs = entropy::cq_joint_entropy(&cq);
        prop_assert!((lhs - rhs).abs() <= 1e-9);
    }
}

#[test]
fn distance_and_entropy_sweeps_hold() {
    for outcome in inequalities::run_suite(200, 42) {
        assert_eq!(outcome.violations, 0, "{} violated", outcome.family);
    }
    assert_eq!(inequalities::data_processing_sweep(150, 9).violations, 0);
    assert_eq!(inequalities::dephasing_entropy_sweep(150, 9).violations, 0);
}

#[test]
fn deficit_ceiling_and_candidate_floor() {
    // the optimizer stays within the data-processing ceiling and never
    // loses to any candidate it was given
    let mut rng = random::rng(77);
    for round in 0..4u64 {
        let s = random::bipartite(&mut rng, 2, 2);
        let m = random::rank_one_isometry(&mut rng, 3, 2);
        let candidate = RankOnePovm::from_isometry(&m).unwrap();
        let base = purity::povm_opt::objective(&candidate, &s).unwrap();
        let cfg = OptimizerConfig::seeded(round).with_restarts(4).with_max_iters(80);
        let r = purity::povm_opt::one_shot_deficit_with_candidates(&s, &cfg, &[candidate])
            .unwrap();
        assert!(r.value >= base - 1e-9);
        assert!(r.value >= -1e-9 && r.value <= r.ceiling + 1e-6);
    }
}

#[test]
fn purity_levels_monotone_up_to_noise() {
    // kappa levels at n = 2 stay above n = 1 up to optimizer noise, by
    // superadditivity of the maximum (tensored warm start)
    let cfg = OptimizerConfig::seeded(5).with_restarts(3).with_max_iters(80);
    for seed in [301u64, 302] {
        let mut rng = random::rng(seed);
        let s = random::cc_state(&mut rng, 2, 2);
        let l1 = kappa_one_way_level(&s, 1, &cfg).unwrap();
        let l2 = kappa_one_way_level(&s, 2, &cfg).unwrap();
        assert!(
            l2.kappa_one_way >= l1.kappa_one_way - 2e-3,
            "level dropped: {} -> {}",
            l1.kappa_one_way,
            l2.kappa_one_way
        );
    }
}

#[test]
fn pure_states_deficit_equals_entanglement_entropy() {
    let cfg = OptimizerConfig::seeded(11).with_restarts(6).with_max_iters(100);
    for seed in [41u64, 42] {
        let mut rng = random::rng(seed);
        let (s, _) = random::pure_bipartite(&mut rng, 2, 2);
        let h_a = entropy::von_neumann(&s.marginal(Subsystem::A));
        let r = one_shot_deficit(&s, &cfg).unwrap();
        assert_abs_diff_eq!(r.value, h_a, epsilon = 1e-3);
    }
}

#[test]
fn protocol_catalyst_contract_across_instances() {
    use purity::protocol::{converse_margin, run_distillation, DistillationParams};
    // every successful run returns at least as many pure qubits as borrowed
    // and stays under the converse bound
    for seed in 0..4u64 {
        let mut rng = random::rng(900 + seed);
        let s = random::cc_state(&mut rng, 2, 2);
        let lam = RankOnePovm::computational(2);
        let params = DistillationParams::new(6, 0.3, 0.4, seed);
        let (ledger, trace) = run_distillation(&s, &lam, &params).unwrap();
        assert!(ledger.catalyst_returned(), "catalyst lost at seed {seed}");
        assert!(
            converse_margin(&ledger, &s, &trace) >= -1e-9,
            "converse violated at seed {seed}"
        );
    }
}
