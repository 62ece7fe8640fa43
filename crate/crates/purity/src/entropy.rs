//! Entropic functionals, all in bits.
//!
//! Conditional entropy follows the standard sign H(A|B) = H(AB) - H(B); the
//! Fannes check uses the plain 1/e-additive form rather than the sharper
//! Audenaert refinement.

use crate::qmat::{self, BipartiteState, ClassicalQuantumState, DensityMatrix, TripartiteState};
use crate::{Error, Result};

/// Shannon entropy of a probability vector, in bits; 0 log 0 := 0.
pub fn shannon(probs: &[f64]) -> f64 {
    let mut h = 0.0;
    for &p in probs {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}

/// Von Neumann entropy H(rho) = -Tr(rho log2 rho), clamped into [0, log2 d].
pub fn von_neumann(rho: &DensityMatrix) -> f64 {
    let h = shannon(&rho.eigenvalues());
    h.clamp(0.0, (rho.dim() as f64).log2())
}

/// The four standard entropies of a bipartite state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyReport {
    pub h_a: f64,
    pub h_b: f64,
    pub h_ab: f64,
    pub i_ab: f64,
}

pub fn report(s: &BipartiteState) -> EntropyReport {
    let h_a = von_neumann(&s.marginal(qmat::Subsystem::A));
    let h_b = von_neumann(&s.marginal(qmat::Subsystem::B));
    let h_ab = von_neumann(s.state());
    EntropyReport { h_a, h_b, h_ab, i_ab: h_a + h_b - h_ab }
}

/// I(A;B) = H(A) + H(B) - H(AB).
pub fn mutual_info(s: &BipartiteState) -> f64 {
    report(s).i_ab
}

/// H(A|B) = H(AB) - H(B).
pub fn conditional_entropy(s: &BipartiteState) -> f64 {
    let r = report(s);
    r.h_ab - r.h_b
}

/// I(A;B|X) = I(A;BX) - I(A;X) on a tripartite state with subsystem order
/// (A, B, X). Non-negative by strong subadditivity.
pub fn conditional_mutual_info(t: &TripartiteState) -> f64 {
    let h_ax = von_neumann(&t.reduced(&[0, 2]));
    let h_bx = von_neumann(&t.reduced(&[1, 2]));
    let h_abx = von_neumann(t.state());
    let h_x = von_neumann(&t.reduced(&[2]));
    h_ax + h_bx - h_abx - h_x
}

/// I(X;B) of an ensemble: H(avg) - sum_x p(x) H(rho_x).
pub fn cq_mutual_info(cq: &ClassicalQuantumState) -> f64 {
    let avg = von_neumann(&cq.average_state());
    let cond: f64 = cq
        .probs()
        .iter()
        .zip(cq.states())
        .map(|(p, s)| p * von_neumann(s))
        .sum();
    (avg - cond).max(0.0)
}

/// H(XB) of an ensemble: H(p) + sum_x p(x) H(rho_x).
pub fn cq_joint_entropy(cq: &ClassicalQuantumState) -> f64 {
    shannon(cq.probs())
        + cq
            .probs()
            .iter()
            .zip(cq.states())
            .map(|(p, s)| p * von_neumann(s))
            .sum::<f64>()
}

/// Fannes' inequality, exactly as printed: returns
/// (|H(rho) - H(omega)|, 1/e + log2(d) ||rho - omega||_1).
/// The left side never exceeds the right beyond inequality slack.
pub fn fannes_check(rho: &DensityMatrix, omega: &DensityMatrix) -> Result<(f64, f64)> {
    if rho.dim() != omega.dim() {
        return Err(Error::DimensionMismatch("Fannes requires equal dimensions".into()));
    }
    let lhs = (von_neumann(rho) - von_neumann(omega)).abs();
    let dist = rho.trace_distance(omega);
    let rhs = 1.0 / std::f64::consts::E + (rho.dim() as f64).log2() * dist;
    Ok((lhs, rhs))
}

/// Subadditivity margin H(A) + H(B) - H(AB), which is >= 0 up to slack.
pub fn subadditivity_check(s: &BipartiteState) -> f64 {
    report(s).i_ab
}
