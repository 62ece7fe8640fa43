//! Batch verification of the distance and entropy inequalities on seeded
//! random instances: triangle, pure-target fidelity bound, gentle operator,
//! Fannes, and subadditivity. Instances are generated per-index from the
//! seed, so the sweep parallelizes with deterministic output.

use num_complex::Complex64;
use serde::Serialize;

use crate::entropy;
use crate::exec;
use crate::qmat::{self, fidelity_pure_bound, gentle_operator, trace_norm, CMatrix};
use crate::random;
use crate::tol;

/// One family's sweep outcome. `worst_excess` is the largest lhs - rhs seen
/// (still a violation only above the inequality slack).
#[derive(Debug, Clone, Serialize)]
pub struct SuiteOutcome {
    pub family: String,
    pub instances: usize,
    pub violations: usize,
    pub worst_excess: f64,
}

fn sweep<F>(family: &str, instances: usize, seed: u64, f: F) -> SuiteOutcome
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> f64 + Sync + Send,
{
    let excesses = exec::map_indexed(instances, |i| {
        let mut rng = random::rng(seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        f(&mut rng)
    });
    let worst = excesses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    SuiteOutcome {
        family: family.to_string(),
        instances,
        violations: excesses.iter().filter(|&&e| e > tol::INEQUALITY_SLACK).count(),
        worst_excess: worst,
    }
}

fn random_dim(rng: &mut rand_chacha::ChaCha8Rng) -> usize {
    use rand::Rng;
    rng.gen_range(2..=4)
}

/// Triangle inequality: ||r - s||_1 <= ||r - w||_1 + ||w - s||_1.
pub fn triangle_sweep(instances: usize, seed: u64) -> SuiteOutcome {
    sweep("triangle", instances, seed.wrapping_add(1), |rng| {
        let d = random_dim(rng);
        let r = random::density(rng, d);
        let w = random::density(rng, d);
        let s = random::density(rng, d);
        let lhs = r.trace_distance(&s);
        let rhs = r.trace_distance(&w) + w.trace_distance(&s);
        lhs - rhs
    })
}

/// Pure-target fidelity bound: ||rho - |phi><phi| ||_1 <= 2 sqrt(1 - <phi|rho|phi>).
pub fn fidelity_bound_sweep(instances: usize, seed: u64) -> SuiteOutcome {
    sweep("fidelity_bound", instances, seed.wrapping_add(2), |rng| {
        let d = random_dim(rng);
        let rho = random::density(rng, d);
        let phi = random::pure_state(rng, d);
        let (dist, bound) = fidelity_pure_bound(&rho, &phi).expect("valid instance");
        dist - bound
    })
}

/// Gentle operator: ||rho - sqrt(L) rho sqrt(L)||_1 <= sqrt(8 (1 - Tr rho L)),
/// including subnormalized states.
pub fn gentle_operator_sweep(instances: usize, seed: u64) -> SuiteOutcome {
    sweep("gentle_operator", instances, seed.wrapping_add(3), |rng| {
        use rand::Rng;
        let d = random_dim(rng);
        let rho = random::density(rng, d);
        // subnormalize half the time
        let scale: f64 = if rng.gen_bool(0.5) { rng.gen_range(0.3..1.0) } else { 1.0 };
        let rho_mat = rho.matrix().scale(scale);
        // random operator with spectrum in [0, 1]
        let u = random::unitary(rng, d);
        let mut lam = CMatrix::zeros(d, d);
        for k in 0..d {
            let col = u.column(k);
            let ev: f64 = rng.gen_range(0.0..=1.0);
            lam += (col * col.adjoint()).scale(ev);
        }
        let (dist, bound) = gentle_operator(&rho_mat, &lam).expect("valid instance");
        dist - bound
    })
}

/// Fannes: |H(rho) - H(omega)| <= 1/e + log2(d) ||rho - omega||_1.
pub fn fannes_sweep(instances: usize, seed: u64) -> SuiteOutcome {
    sweep("fannes", instances, seed.wrapping_add(4), |rng| {
        let d = random_dim(rng);
        let rho = random::density(rng, d);
        let omega = random::density(rng, d);
        let (lhs, rhs) = entropy::fannes_check(&rho, &omega).expect("equal dims");
        lhs - rhs
    })
}

/// Subadditivity: H(A) + H(B) >= H(AB).
pub fn subadditivity_sweep(instances: usize, seed: u64) -> SuiteOutcome {
    sweep("subadditivity", instances, seed.wrapping_add(5), |rng| {
        use rand::Rng;
        let da = rng.gen_range(2..=3);
        let db = rng.gen_range(2..=3);
        let s = random::bipartite(rng, da, db);
        -entropy::subadditivity_check(&s)
    })
}

/// Run all five families.
pub fn run_suite(instances: usize, seed: u64) -> Vec<SuiteOutcome> {
    vec![
        triangle_sweep(instances, seed),
        fidelity_bound_sweep(instances, seed),
        gentle_operator_sweep(instances, seed),
        fannes_sweep(instances, seed),
        subadditivity_sweep(instances, seed),
    ]
}

/// Data-processing sweep (used by the property tests, not the acceptance
/// gate): measuring A cannot increase I(A;B).
pub fn data_processing_sweep(instances: usize, seed: u64) -> SuiteOutcome {
    sweep("data_processing", instances, seed.wrapping_add(6), |rng| {
        let s = random::bipartite(rng, 2, 2);
        let m = random::rank_one_isometry(rng, 4, 2);
        let povm = crate::povm_opt::RankOnePovm::from_isometry(&m)
            .expect("isometry")
            .to_povm()
            .expect("valid");
        let cq = qmat::apply_povm(&povm, &s).expect("valid");
        entropy::cq_mutual_info(&cq) - entropy::mutual_info(&s)
    })
}

/// Dephasing sweep: H(dephase(rho)) >= H(rho) in any orthonormal basis.
pub fn dephasing_entropy_sweep(instances: usize, seed: u64) -> SuiteOutcome {
    sweep("dephasing_entropy", instances, seed.wrapping_add(7), |rng| {
        let d = random_dim(rng);
        let rho = random::density(rng, d);
        let basis = random::unitary(rng, d);
        let dephased = qmat::dephase(&rho, &basis).expect("orthonormal");
        entropy::von_neumann(&rho) - entropy::von_neumann(&dephased)
    })
}

/// Exact commuting-case check used as a cross-route identity:
/// ||rho - P rho P||_1 = Tr((1-P) rho) for diagonal rho and a basis
/// projector P.
pub fn projector_defect_identity(rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    use rand::Rng;
    let d = rng.gen_range(2..=4);
    let p = random::probability_vector(rng, d);
    let rho = crate::qmat::DensityMatrix::from_diagonal(&p).expect("valid");
    let keep = rng.gen_range(1..d);
    let mut proj = CMatrix::zeros(d, d);
    for k in 0..keep {
        proj[(k, k)] = Complex64::new(1.0, 0.0);
    }
    let prp = &proj * rho.matrix() * &proj;
    let direct = trace_norm(&(rho.matrix() - prp));
    let defect: f64 = (keep..d).map(|k| p[k]).sum();
    (direct - defect).abs()
}
