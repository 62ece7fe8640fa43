//! Seeded random states, unitaries and POVMs. Everything runs on ChaCha8 so
//! identical seeds give identical instances on every platform.


use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::qmat::{BipartiteState, CMatrix, CVector, DensityMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Complex Ginibre matrix with iid standard Gaussian entries.
pub fn ginibre(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    // from_fn iterates column-major internally; fill row-major ourselves so
    // the draw order is part of the crate's determinism contract
    let mut m = CMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = gaussian(rng);
        }
    }
    m
}

/// Haar-like random pure state vector.
pub fn pure_state(rng: &mut ChaCha8Rng, dim: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    for i in 0..dim {
        v[i] = gaussian(rng);
    }
    let n = v.norm();
    v.scale(1.0 / n)
}

/// Full-rank random density matrix from the Hilbert-Schmidt ensemble.
pub fn density(rng: &mut ChaCha8Rng, dim: usize) -> DensityMatrix {
    density_rank(rng, dim, dim)
}

/// Random density matrix of bounded rank: G G^dag / Tr with G of shape
/// dim x rank.
pub fn density_rank(rng: &mut ChaCha8Rng, dim: usize, rank: usize) -> DensityMatrix {
    let g = ginibre(rng, dim, rank.max(1));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.scale(1.0 / tr)).expect("Wishart matrix is a valid state")
}

/// Haar-distributed random unitary (QR of a Ginibre matrix with the R-phase
/// fix).
pub fn unitary(rng: &mut ChaCha8Rng, dim: usize) -> CMatrix {
    let g = ginibre(rng, dim, dim);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// Random rank-1 POVM as an isometry: an `outcomes x dim` matrix M with
/// M^dag M = 1, obtained as the polar factor of a Ginibre matrix.
pub fn rank_one_isometry(rng: &mut ChaCha8Rng, outcomes: usize, dim: usize) -> CMatrix {
    let g = ginibre(rng, outcomes, dim);
    crate::qmat::polar_factor(&g)
}

/// Random probability vector (normalized exponentials, i.e. flat Dirichlet).
pub fn probability_vector(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..len).map(|_| -f64::ln(rng.gen_range(1e-12..1.0))).collect();
    let s: f64 = p.iter().sum();
    for v in &mut p {
        *v /= s;
    }
    p
}

/// Random full bipartite state.
pub fn bipartite(rng: &mut ChaCha8Rng, dim_a: usize, dim_b: usize) -> BipartiteState {
    BipartiteState::new(dim_a, dim_b, density(rng, dim_a * dim_b)).unwrap()
}

/// Random pure bipartite state, returned with its amplitude vector.
pub fn pure_bipartite(rng: &mut ChaCha8Rng, dim_a: usize, dim_b: usize) -> (BipartiteState, CVector) {
    let v = pure_state(rng, dim_a * dim_b);
    let s = BipartiteState::new(dim_a, dim_b, DensityMatrix::pure(&v).unwrap()).unwrap();
    (s, v)
}

/// Random separable state: a mixture of `terms` product states.
pub fn separable(rng: &mut ChaCha8Rng, dim_a: usize, dim_b: usize, terms: usize) -> BipartiteState {
    let weights = probability_vector(rng, terms);
    let d = dim_a * dim_b;
    let mut acc = CMatrix::zeros(d, d);
    for w in weights {
        let sa = density(rng, dim_a);
        let sb = density(rng, dim_b);
        acc += sa.matrix().kronecker(sb.matrix()).scale(w);
    }
    BipartiteState::from_matrix(dim_a, dim_b, acc).unwrap()
}

/// Random classical-classical state (diagonal joint distribution).
pub fn cc_state(rng: &mut ChaCha8Rng, dim_a: usize, dim_b: usize) -> BipartiteState {
    let p = probability_vector(rng, dim_a * dim_b);
    let joint: Vec<Vec<f64>> = (0..dim_a)
        .map(|a| (0..dim_b).map(|b| p[a * dim_b + b]).collect())
        .collect();
    BipartiteState::from_joint_distribution(&joint).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{deviation_from_identity, unitary_deviation};

    #[test]
    fn generators_are_deterministic() {
        let a = density(&mut rng(7), 4);
        let b = density(&mut rng(7), 4);
        assert_eq!(a.matrix(), b.matrix());
    }

    #[test]
    fn unitary_is_unitary() {
        let u = unitary(&mut rng(3), 5);
        assert!(unitary_deviation(&u) < 1e-12);
    }

    #[test]
    fn isometry_satisfies_completeness() {
        let m = rank_one_isometry(&mut rng(11), 9, 3);
        assert!(deviation_from_identity(&(m.adjoint() * &m)) < 1e-12);
    }

    #[test]
    fn separable_state_is_valid() {
        let s = separable(&mut rng(5), 2, 2, 4);
        assert_eq!(s.dim_a(), 2);
        let tr = s.matrix().trace();
        assert!((tr.re - 1.0).abs() < 1e-10);
    }
}
