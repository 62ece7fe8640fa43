//! Acceptance gate: ten criteria covering the worked example, the purity
//! measures, the deficit optimizer against its grid oracle, additivity,
//! the inequality sweeps, typicality, covering, the end-to-end distillation
//! run, and byte-level determinism of every report involved.
//!
//! Run with `cargo test -p purity-cli --test acceptance -- --nocapture` to
//! see one PASS line per criterion.

use std::time::Instant;

use purity::entropy;
use purity::inequalities;
use purity::io::LoadedState;
use purity::povm_opt::{
    additivity_check, kappa_local, one_shot_deficit, oracle_grid_qubit, OptimizerConfig,
    RankOnePovm,
};
use purity::protocol::{converse_margin, run_distillation, run_example1, DistillationParams};
use purity::qmat::{BipartiteState, DensityMatrix, Subsystem};
use purity::random;
use purity::typicality::{build_concentration_code, converse_check, typical_projector};
use purity::covering::build_covering;
use purity_cli::report;

fn pass(criterion: usize, message: &str) {
    println!("ACCEPTANCE {criterion}: PASS - {message}");
}

/// Exact binomial-summation oracle for the typical mass of a binary
/// spectrum, independent of the type-class implementation.
fn binomial_typical_mass(p0: f64, n: usize, delta: f64) -> f64 {
    let h = -p0 * p0.log2() - (1.0 - p0) * (1.0 - p0).log2();
    let lo = -(n as f64) * (h + delta);
    let hi = -(n as f64) * (h - delta);
    let mut mass = 0.0;
    for k in 0..=n {
        let log2p = (n - k) as f64 * p0.log2() + k as f64 * (1.0 - p0).log2();
        if log2p < lo || log2p > hi {
            continue;
        }
        let mut binom = 1.0f64;
        for i in 1..=k {
            binom = binom * (n - k + i) as f64 / i as f64;
        }
        mass += binom * log2p.exp2();
    }
    mass
}

fn noisy_cc_state() -> BipartiteState {
    BipartiteState::from_joint_distribution(&[vec![0.45, 0.05], vec![0.05, 0.45]]).unwrap()
}

#[test]
fn acceptance_01_example1_end_to_end() {
    let start = Instant::now();
    let (ledger, trace) = run_example1();
    let elapsed = start.elapsed();
    assert_eq!(ledger.rate, 1.0, "rate must be exactly 1");
    assert_eq!(trace.final_distance, 0.0, "B must land exactly on |0><0|");
    assert!(trace.final_distance_exact);
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    pass(1, &format!("rate = 1 exactly, final distance = 0 exactly ({elapsed:?})"));
}

#[test]
fn acceptance_02_kappa_values() {
    let mixed = kappa_local(&DensityMatrix::maximally_mixed(2));
    assert_eq!(mixed, 0.0, "kappa(I/2)");
    let pure = kappa_local(&DensityMatrix::basis_state(2, 0));
    assert_eq!(pure, 1.0, "kappa(pure qubit)");
    // direct binary-entropy oracle
    let h2 = -(0.9f64 * 0.9f64.log2() + 0.1f64 * 0.1f64.log2());
    let biased = kappa_local(&DensityMatrix::from_diagonal(&[0.9, 0.1]).unwrap());
    assert!((biased - (1.0 - h2)).abs() <= 1e-6, "kappa(diag(.9,.1)) = {biased}");
    pass(2, &format!("kappa: 0, 1 exact; biased qubit {biased:.6} = 1 - h2(0.9) within 1e-6"));
}

#[test]
fn acceptance_03_deficit_optimizer() {
    let cfg = |seed: u64| OptimizerConfig::seeded(seed).with_restarts(32);

    let product = BipartiteState::product(
        &DensityMatrix::from_diagonal(&[0.3, 0.7]).unwrap(),
        &DensityMatrix::from_diagonal(&[0.9, 0.1]).unwrap(),
    );
    let start = Instant::now();
    let d_prod = one_shot_deficit(&product, &cfg(1)).unwrap().value;
    assert!(d_prod.abs() <= 1e-9, "product deficit {d_prod}");

    let d_cr = one_shot_deficit(&BipartiteState::common_randomness_bit(), &cfg(2)).unwrap();
    assert!((d_cr.value - 1.0).abs() <= 1e-4, "shared-bit deficit {}", d_cr.value);

    let d_bell = one_shot_deficit(&BipartiteState::bell_phi_plus(), &cfg(3)).unwrap();
    assert!((d_bell.value - 1.0).abs() <= 1e-4, "Bell deficit {}", d_bell.value);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() <= 90.0, "three optimizations took {elapsed:?}");

    // pure-state identity: deficit = H(A) on seeded pure two-qubit states
    let mut worst: f64 = 0.0;
    for seed in 0..5u64 {
        let mut rng = random::rng(500 + seed);
        let (s, _) = random::pure_bipartite(&mut rng, 2, 2);
        let h_a = entropy::von_neumann(&s.marginal(Subsystem::A));
        let r = one_shot_deficit(&s, &cfg(500 + seed)).unwrap();
        worst = worst.max((r.value - h_a).abs());
    }
    assert!(worst <= 1e-3, "pure-state identity worst error {worst}");
    pass(
        3,
        &format!(
            "product 0, shared bit {:.6}, Bell {:.6} (each within 1e-4, {elapsed:?} total), \
             pure-state identity worst error {worst:.2e}",
            d_cr.value, d_bell.value
        ),
    );
}

#[test]
fn acceptance_04_oracle_cross_validation() {
    let start = Instant::now();
    let mut worst_margin = f64::INFINITY;
    for i in 0..20u64 {
        let mut rng = random::rng(1000 + i);
        let s = random::separable(&mut rng, 2, 2, 4);
        let cfg = OptimizerConfig::seeded(1000 + i).with_restarts(32);
        let optimizer = one_shot_deficit(&s, &cfg).unwrap().value;
        let oracle = oracle_grid_qubit(&s, 64, 2000 + i).unwrap();
        worst_margin = worst_margin.min(optimizer - oracle);
    }
    let elapsed = start.elapsed();
    assert!(worst_margin >= -1e-3, "optimizer fell below the grid oracle by {worst_margin}");
    assert!(elapsed.as_secs_f64() <= 300.0, "cross-validation took {elapsed:?}");
    pass(
        4,
        &format!("20 separable states, worst optimizer-oracle margin {worst_margin:.2e} ({elapsed:?})"),
    );
}

#[test]
fn acceptance_05_additivity() {
    let cfg = |seed: u64| {
        OptimizerConfig::seeded(seed).with_restarts(8).with_max_iters(150)
    };
    let cr = additivity_check(&BipartiteState::common_randomness_bit(), &cfg(7)).unwrap();
    assert!((cr.lhs - cr.rhs).abs() <= 5e-3, "shared bit: {} vs {}", cr.lhs, cr.rhs);
    assert!(cr.sigma_alone <= 1e-6, "sigma deficit {}", cr.sigma_alone);

    let bell = additivity_check(&BipartiteState::bell_phi_plus(), &cfg(8)).unwrap();
    assert!((bell.lhs - bell.rhs).abs() <= 5e-3, "Bell: {} vs {}", bell.lhs, bell.rhs);
    assert!(bell.sigma_alone <= 1e-6);
    pass(
        5,
        &format!(
            "|D(rho x sigma) - D(rho)|: shared bit {:.2e}, Bell {:.2e}; D(sigma) <= 1e-6",
            (cr.lhs - cr.rhs).abs(),
            (bell.lhs - bell.rhs).abs()
        ),
    );
}

#[test]
fn acceptance_06_inequality_suite() {
    let start = Instant::now();
    let outcomes = inequalities::run_suite(1000, 0);
    let elapsed = start.elapsed();
    for o in &outcomes {
        assert_eq!(o.violations, 0, "family {} had {} violations", o.family, o.violations);
    }
    assert_eq!(outcomes.len(), 5);
    assert!(elapsed.as_secs_f64() <= 60.0, "suite took {elapsed:?}");
    pass(
        6,
        &format!("5 families x 1000 seeded instances, zero violations beyond 1e-9 ({elapsed:?})"),
    );
}

#[test]
fn acceptance_07_typicality() {
    let rho = DensityMatrix::from_diagonal(&[0.9, 0.1]).unwrap();
    let proj = typical_projector(&rho, 20, 0.1).unwrap();
    let oracle = binomial_typical_mass(0.9, 20, 0.1);
    assert!(
        (proj.mass() - oracle).abs() <= 1e-12,
        "mass {} vs binomial oracle {oracle}",
        proj.mass()
    );
    assert!(
        (proj.size() as f64).log2() <= proj.log2_size_bound(),
        "|T| = {} exceeds 2^(n(H+delta))",
        proj.size()
    );

    let code = build_concentration_code(&rho, 20, 0.1).unwrap();
    let h2 = -(0.9f64 * 0.9f64.log2() + 0.1f64 * 0.1f64.log2());
    let kappa = 1.0 - h2;
    assert!(
        code.rate >= kappa - 0.1 - 1.0 / 20.0,
        "rate {} below kappa - delta - 1/n",
        code.rate
    );
    let slack = converse_check(&code, &rho);
    assert!(slack >= 0.0, "converse slack {slack}");
    pass(
        7,
        &format!(
            "mass {:.12} matches binomial oracle to 1e-12, |T| = {} within bound, \
             rate {:.4} >= kappa - delta - 1/n, converse slack {slack:.4}",
            proj.mass(),
            proj.size(),
            code.rate
        ),
    );
}

#[test]
fn acceptance_08_covering() {
    use purity::qmat::ClassicalQuantumState;
    let cr = ClassicalQuantumState::new(
        vec![0.5, 0.5],
        vec![DensityMatrix::basis_state(2, 0), DensityMatrix::basis_state(2, 1)],
    )
    .unwrap();
    let code = build_covering(&cr, 4, 0.1, 0.25, 7).unwrap();
    assert_eq!(code.lambda, 1);
    assert_eq!(code.min_success, 1.0);

    let noisy = ClassicalQuantumState::new(
        vec![0.5, 0.5],
        vec![
            DensityMatrix::from_diagonal(&[0.9, 0.1]).unwrap(),
            DensityMatrix::from_diagonal(&[0.1, 0.9]).unwrap(),
        ],
    )
    .unwrap();
    let ncode = build_covering(&noisy, 8, 0.25, 0.45, 11).unwrap();
    assert!(
        ncode.min_success >= 1.0 - 0.25,
        "measurement success criterion failed: {}",
        ncode.min_success
    );
    pass(
        8,
        &format!(
            "shared bit n=4: lambda = 1, success = 1 exactly; noisy ensemble n=8: \
             min success {:.4} >= 0.75 (mu = {}, lambda = {})",
            ncode.min_success, ncode.mu, ncode.lambda
        ),
    );
}

#[test]
fn acceptance_09_distillation_run() {
    let start = Instant::now();
    let s = BipartiteState::common_randomness_bit();
    let lam = RankOnePovm::computational(2);
    let params = DistillationParams::new(8, 0.1, 0.25, 7);
    let (ledger, trace) = run_distillation(&s, &lam, &params).unwrap();
    let elapsed = start.elapsed();
    assert_eq!(ledger.rate, 1.0, "rate must be exactly 1");
    assert!(ledger.catalyst_returned(), "catalyst not fully returned");
    let margin = converse_margin(&ledger, &s, &trace);
    assert!(margin >= 0.0, "converse margin {margin}");
    assert_eq!(trace.final_distance, 0.0, "final distance must be exactly 0");
    assert!(elapsed.as_secs_f64() <= 10.0, "run took {elapsed:?}");
    pass(
        9,
        &format!(
            "shared bit n=8: rate = 1, catalyst returned, converse margin {margin:.4} >= 0, \
             final distance 0 ({elapsed:?})"
        ),
    );
}

/// Build the reports behind criteria 1-9 once, deterministically.
fn all_reports() -> Vec<String> {
    let cr_file = purity::io::bipartite_to_file(&BipartiteState::common_randomness_bit());
    let cr_json = serde_json::to_string(&cr_file).unwrap();
    let cr_state = purity::io::parse_state(&cr_json).unwrap();
    let cr_digest = report::digest_bytes(cr_json.as_bytes());

    let bell_file = purity::io::bipartite_to_file(&BipartiteState::bell_phi_plus());
    let bell_json = serde_json::to_string(&bell_file).unwrap();
    let bell_state = purity::io::parse_state(&bell_json).unwrap();
    let bell_digest = report::digest_bytes(bell_json.as_bytes());

    let biased_file =
        purity::io::density_to_file(&DensityMatrix::from_diagonal(&[0.9, 0.1]).unwrap());
    let biased_json = serde_json::to_string(&biased_file).unwrap();
    let biased_state = purity::io::parse_state(&biased_json).unwrap();
    let biased_digest = report::digest_bytes(biased_json.as_bytes());

    let noisy_file = purity::io::bipartite_to_file(&noisy_cc_state());
    let noisy_json = serde_json::to_string(&noisy_file).unwrap();
    let noisy_state = purity::io::parse_state(&noisy_json).unwrap();
    let noisy_digest = report::digest_bytes(noisy_json.as_bytes());

    let opt = |seed: u64, restarts: usize| {
        OptimizerConfig::seeded(seed).with_restarts(restarts).with_max_iters(150)
    };

    let bip = |s: &LoadedState| s.bipartite().unwrap().clone();

    vec![
        report::example1_report().to_json(),
        report::kappa_report(&biased_state, biased_digest.clone()).to_json(),
        report::deficit_report(&bip(&cr_state), cr_digest.clone(), &opt(2, 16))
            .unwrap()
            .0
            .to_json(),
        report::deficit_report(&bip(&bell_state), bell_digest.clone(), &opt(3, 16))
            .unwrap()
            .0
            .to_json(),
        report::additivity_report(&bip(&cr_state), cr_digest.clone(), &opt(7, 4)).unwrap().to_json(),
        report::ineq_suite_report(0, 200).to_json(),
        report::concentrate_report(&biased_state, biased_digest, 20, 0.1).unwrap().to_json(),
        report::cover_report(&bip(&noisy_state), noisy_digest.clone(), 8, 0.25, 0.45, 11)
            .unwrap()
            .to_json(),
        report::distill_report(
            &bip(&cr_state),
            cr_digest,
            &DistillationParams::new(8, 0.1, 0.25, 7),
            None,
        )
        .unwrap()
        .to_json(),
    ]
}

#[test]
fn acceptance_10_determinism() {
    let first = all_reports();
    let second = all_reports();
    assert_eq!(first.len(), second.len());
    for (i, (a, b)) in first.iter().zip(&second).enumerate() {
        assert_eq!(a, b, "report {i} differs between identical reruns");
    }
    pass(
        10,
        &format!("{} reports covering criteria 1-9 are byte-identical across reruns", first.len()),
    );
}
