//! Typical projectors, the relabeling unitary that compacts a projector's
//! range onto a register in |0>, and executable purity-concentration codes.
//!
//! n-copy objects are represented in the eigenbasis of rho as probability
//! vectors over sequences, never as dense 2^n x 2^n matrices; everything
//! needed here commutes, so the representation is exact. Sequence
//! probabilities depend only on the type (count vector), so mass and size
//! of a typical set are computed by enumerating type classes.

use crate::qmat::{self, hermitian_eig, CMatrix, DensityMatrix};
use crate::{Error, Result};

/// Hard cap on materialized index spaces (permutations, per-sequence scans).
pub const INDEX_GUARD: usize = 1 << 20;

// ---------------------------------------------------------------------------
// Type classes
// ---------------------------------------------------------------------------

/// All sequences sharing a count vector over the single-copy spectrum.
#[derive(Debug, Clone)]
pub struct TypeClass {
    pub counts: Vec<u32>,
    /// log2 probability of each sequence in the class.
    pub log2_seq_prob: f64,
    /// Number of sequences in the class (multinomial coefficient).
    pub multiplicity: f64,
}

fn compositions(n: u32, parts: usize) -> Vec<Vec<u32>> {
    fn rec(remaining: u32, idx: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if idx == current.len() - 1 {
            current[idx] = remaining;
            out.push(current.clone());
            return;
        }
        for k in 0..=remaining {
            current[idx] = k;
            rec(remaining - k, idx + 1, current, out);
        }
    }
    let mut out = Vec::new();
    let mut current = vec![0u32; parts];
    rec(n, 0, &mut current, &mut out);
    out
}

fn multinomial(n: u32, counts: &[u32]) -> f64 {
    let mut value = 1.0f64;
    let mut remaining = n;
    for &c in counts {
        // C(remaining, c): multiply before dividing so every intermediate
        // is an exact integer while it fits in the mantissa
        for i in 1..=c {
            value = value * (remaining - c + i) as f64 / i as f64;
        }
        remaining -= c;
    }
    value
}

/// Summary of a delta-typical set for a spectrum, computed without
/// materializing indices (no dimension guard).
#[derive(Debug, Clone)]
pub struct TypicalSummary {
    pub classes: Vec<TypeClass>,
    /// Total probability mass of the typical set.
    pub mass: f64,
    /// log2 of the number of typical sequences.
    pub log2_size: f64,
    /// Exact sequence count when it fits in u128.
    pub size: Option<u128>,
    /// Single-copy entropy of the spectrum, bits.
    pub entropy: f64,
}

/// Delta-typical classes of an n-fold product of `spectrum`: sequences with
/// 2^{-n(H+delta)} <= p(x^n) <= 2^{-n(H-delta)}, both ends inclusive.
pub fn typical_mass(spectrum: &[f64], n: usize, delta: f64) -> Result<TypicalSummary> {
    if spectrum.is_empty() || n == 0 || delta <= 0.0 {
        return Err(Error::InvalidState("need a spectrum, n >= 1 and delta > 0".into()));
    }
    let total: f64 = spectrum.iter().sum();
    if (total - 1.0).abs() > 1e-9 || spectrum.iter().any(|&p| p < 0.0) {
        return Err(Error::InvalidState("spectrum is not a probability vector".into()));
    }
    let h = crate::entropy::shannon(spectrum);
    let lo = -(n as f64) * (h + delta);
    let hi = -(n as f64) * (h - delta);

    let mut classes = Vec::new();
    let mut mass = 0.0;
    let mut size_f = 0.0f64;
    let mut size_exact: Option<u128> = Some(0);
    for counts in compositions(n as u32, spectrum.len()) {
        let mut log2p = 0.0;
        let mut possible = true;
        for (c, &p) in counts.iter().zip(spectrum) {
            if *c > 0 {
                if p <= 0.0 {
                    possible = false;
                    break;
                }
                log2p += *c as f64 * p.log2();
            }
        }
        if !possible || log2p < lo || log2p > hi {
            continue;
        }
        let m = multinomial(n as u32, &counts);
        mass += m * log2p.exp2();
        size_f += m;
        size_exact = size_exact.and_then(|acc| {
            if m < u128::MAX as f64 { acc.checked_add(m as u128) } else { None }
        });
        classes.push(TypeClass { counts, log2_seq_prob: log2p, multiplicity: m });
    }
    Ok(TypicalSummary { classes, mass: mass.min(1.0), log2_size: size_f.log2(), size: size_exact, entropy: h })
}

// ---------------------------------------------------------------------------
// TypicalProjector
// ---------------------------------------------------------------------------

/// Projector onto the delta-typical eigenvalue sequences of rho^(x n).
/// Diagonal in the n-fold eigenbasis of rho, so idempotence and commutation
/// with rho^(x n) hold structurally.
#[derive(Debug, Clone)]
pub struct TypicalProjector {
    pub n: usize,
    pub delta: f64,
    /// Single-copy spectrum, descending.
    pub spectrum: Vec<f64>,
    /// Single-copy eigenbasis (columns).
    pub eigenbasis: CMatrix,
    pub summary: TypicalSummary,
}

impl TypicalProjector {
    /// Tr Pi: the number of typical sequences.
    pub fn size(&self) -> u128 {
        self.summary.size.expect("exact within the index guard")
    }

    pub fn mass(&self) -> f64 {
        self.summary.mass
    }

    /// log2 of the size bound 2^{n(H+delta)}.
    pub fn log2_size_bound(&self) -> f64 {
        self.n as f64 * (self.summary.entropy + self.delta)
    }

    /// Membership test for a sequence of eigenvalue indices.
    pub fn contains(&self, seq: &[usize]) -> bool {
        debug_assert_eq!(seq.len(), self.n);
        let mut log2p = 0.0;
        for &i in seq {
            let p = self.spectrum[i];
            if p <= 0.0 {
                return false;
            }
            log2p += p.log2();
        }
        let h = self.summary.entropy;
        let lo = -(self.n as f64) * (h + self.delta);
        let hi = -(self.n as f64) * (h - self.delta);
        (lo..=hi).contains(&log2p)
    }

    /// Indices of typical sequences in the n-fold eigenbasis, ascending.
    pub fn member_indices(&self) -> Vec<usize> {
        let d = self.spectrum.len();
        let total = d.pow(self.n as u32);
        let mut out = Vec::new();
        let mut seq = vec![0usize; self.n];
        for idx in 0..total {
            let mut rem = idx;
            for k in (0..self.n).rev() {
                seq[k] = rem % d;
                rem /= d;
            }
            if self.contains(&seq) {
                out.push(idx);
            }
        }
        out
    }
}

/// Build the typical projector for rho^(x n). Guard: d^n within
/// [`INDEX_GUARD`] (the projector supports index materialization).
pub fn typical_projector(rho: &DensityMatrix, n: usize, delta: f64) -> Result<TypicalProjector> {
    let d = rho.dim();
    d.checked_pow(n as u32)
        .filter(|&t| t <= INDEX_GUARD)
        .ok_or_else(|| Error::GuardExceeded(format!("{d}^{n} exceeds the index guard")))?;
    let (spectrum, eigenbasis) = rho.eig();
    let summary = typical_mass(&spectrum, n, delta)?;
    Ok(TypicalProjector { n, delta, spectrum, eigenbasis, summary })
}

// ---------------------------------------------------------------------------
// Projector compaction
// ---------------------------------------------------------------------------

/// Relabel a commuting projector's range onto the head slots of a B (x) C
/// split with C in |0>, in the classical (shared eigenbasis) representation.
///
/// `members` lists the projector's basis indices (ascending, at most d1 of
/// them); `probs` is the state's spectrum over all d1*d2 indices. The k-th
/// member moves to new index k*d2 (register form (k, 0)); non-members fill
/// the remaining slots in ascending order.
///
/// Returns the permutation (old index -> new index) and the exact output
/// distance || U rho U^dag - (Pi rho Pi) (x) |0><0| ||_1 = Tr((1-Pi) rho).
pub fn compact_projector_range(
    members: &[usize],
    probs: &[f64],
    d1: usize,
    d2: usize,
) -> Result<(Vec<usize>, f64)> {
    let dim = probs.len();
    if d1 * d2 != dim {
        return Err(Error::DimensionMismatch(format!("{d1} x {d2} != {dim}")));
    }
    if members.len() > d1 {
        return Err(Error::DimensionMismatch(format!(
            "projector rank {} exceeds garbage register {d1}",
            members.len()
        )));
    }
    if members.windows(2).any(|w| w[0] >= w[1]) || members.iter().any(|&m| m >= dim) {
        return Err(Error::InvalidOperator(
            "member indices must be sorted, unique, in range".into(),
        ));
    }

    let mut perm = vec![usize::MAX; dim];
    let mut taken = vec![false; dim];
    for (k, &m) in members.iter().enumerate() {
        perm[m] = k * d2;
        taken[k * d2] = true;
    }
    let mut next_free = 0usize;
    for slot in perm.iter_mut() {
        if *slot != usize::MAX {
            continue;
        }
        while taken[next_free] {
            next_free += 1;
        }
        *slot = next_free;
        taken[next_free] = true;
    }

    let kept: f64 = members.iter().map(|&m| probs[m]).sum();
    Ok((perm, (1.0 - kept).max(0.0)))
}

/// Dense cross-check variant of [`compact_projector_range`] for small dimensions:
/// takes an explicit projector matrix, verifies it commutes with the state,
/// builds the relabeling unitary and measures the output distance with a
/// full trace norm.
pub fn compact_projector_range_dense(
    pi: &CMatrix,
    rho: &DensityMatrix,
    d1: usize,
    d2: usize,
) -> Result<(CMatrix, f64)> {
    let dim = rho.dim();
    if pi.nrows() != dim || pi.ncols() != dim || d1 * d2 != dim {
        return Err(Error::DimensionMismatch("projector/state/split sizes".into()));
    }
    if qmat::hermitian_deviation(pi) > 1e-10 {
        return Err(Error::InvalidOperator("projector is not Hermitian".into()));
    }
    let idem = pi * pi - pi;
    if idem.iter().map(|z| z.norm()).fold(0.0, f64::max) > 1e-8 {
        return Err(Error::InvalidOperator("not idempotent".into()));
    }
    let comm = pi * rho.matrix() - rho.matrix() * pi;
    if comm.iter().map(|z| z.norm()).fold(0.0, f64::max) > 1e-9 {
        return Err(Error::InvalidOperator("projector does not commute with the state".into()));
    }

    // joint eigenbasis: diagonalize the state inside the projector's range
    // and kernel separately
    let (pvals, pvecs) = hermitian_eig(pi);
    let rank = pvals.iter().filter(|&&v| v > 0.5).count();
    if rank > d1 {
        return Err(Error::DimensionMismatch(format!(
            "projector rank {rank} exceeds garbage register {d1}"
        )));
    }
    let mut basis = CMatrix::zeros(dim, dim);
    let mut col = 0;
    for (block_start, block_len) in [(0usize, rank), (rank, dim - rank)] {
        if block_len == 0 {
            continue;
        }
        let sub = pvecs.columns(block_start, block_len).into_owned();
        let block = sub.adjoint() * rho.matrix() * &sub;
        let (_, bvecs) = hermitian_eig(&block);
        let rotated = sub * bvecs;
        for j in 0..block_len {
            basis.set_column(col, &rotated.column(j));
            col += 1;
        }
    }

    let diag = basis.adjoint() * rho.matrix() * &basis;
    let probs: Vec<f64> = (0..dim).map(|i| diag[(i, i)].re).collect();
    let members: Vec<usize> = (0..rank).collect();
    let (perm, _) = compact_projector_range(&members, &probs, d1, d2)?;

    // U maps joint-basis column k to computational slot perm[k]
    let mut u = CMatrix::zeros(dim, dim);
    for k in 0..dim {
        let vec = basis.column(k);
        for r in 0..dim {
            u[(perm[k], r)] = vec[r].conj();
        }
    }

    let rotated = &u * rho.matrix() * u.adjoint();
    let mut target = CMatrix::zeros(dim, dim);
    for i in 0..rank {
        target[(i * d2, i * d2)] = diag[(i, i)];
    }
    let distance = qmat::trace_norm(&(rotated - target));
    Ok((u, distance))
}

// ---------------------------------------------------------------------------
// Concentration codes
// ---------------------------------------------------------------------------

/// An executable purity concentration code: a relabeling permutation in the
/// n-fold eigenbasis splitting d^n = d_garbage * d_pure with the pure
/// register targeted at |0>.
#[derive(Debug, Clone)]
pub struct ConcentrationCode {
    pub n: usize,
    pub delta: f64,
    /// Single-copy dimension.
    pub dim: usize,
    /// Garbage register dimension d1: the smallest divisor of d^n that holds
    /// the typical set. The divisor constraint costs at most log2(d)/n of
    /// rate (1/n for qubits).
    pub d_garbage: usize,
    /// Pure register dimension d2 = d^n / d1.
    pub d_pure: usize,
    /// (1/n) log2 d_pure.
    pub rate: f64,
    /// 1 - typical mass: the joint-state distance certificate of the
    /// compaction step.
    pub achieved_epsilon: f64,
    /// Probability mass relabeled into the garbage register (typical mass
    /// plus padding); the exact pure-register marginal distance from |0><0|
    /// is 2 (1 - member_mass).
    pub member_mass: f64,
    /// Relabeling (old index -> new index) in the n-fold eigenbasis of rho.
    pub permutation: Vec<u32>,
}

impl ConcentrationCode {
    /// Exact trace distance of the pure-register marginal from |0><0| in the
    /// classical representation: all garbage-register slots carry C = |0>,
    /// so the defect is twice the unrelabeled mass.
    pub fn pure_register_distance(&self) -> f64 {
        2.0 * (1.0 - self.member_mass)
    }
}

/// Smallest divisor of base^n that is >= floor.
fn divisor_at_least(base: usize, n: u32, floor: u128) -> usize {
    let mut factors: Vec<(u128, u32)> = Vec::new();
    let mut b = base as u128;
    let mut p = 2u128;
    while p * p <= b {
        if b % p == 0 {
            let mut e = 0;
            while b % p == 0 {
                b /= p;
                e += 1;
            }
            factors.push((p, e * n));
        }
        p += 1;
    }
    if b > 1 {
        factors.push((b, n));
    }
    fn rec(factors: &[(u128, u32)], idx: usize, acc: u128, floor: u128, best: &mut Option<u128>) {
        if let Some(b) = *best {
            if acc >= b {
                return;
            }
        }
        if acc >= floor {
            *best = Some(acc);
            return;
        }
        if idx == factors.len() {
            return;
        }
        let (p, e) = factors[idx];
        let mut cur = acc;
        for _ in 0..=e {
            rec(factors, idx + 1, cur, floor, best);
            match cur.checked_mul(p) {
                Some(nxt) => cur = nxt,
                None => break,
            }
        }
    }
    let mut best = None;
    rec(&factors, 0, 1, floor, &mut best);
    best.expect("base^n itself is always >= floor") as usize
}

/// Build a concentration code for rho^(x n): relabel the (padded) typical
/// set into the garbage register, leaving the pure register within
/// 1 - typical mass of |0>.
pub fn build_concentration_code(
    rho: &DensityMatrix,
    n: usize,
    delta: f64,
) -> Result<ConcentrationCode> {
    let d = rho.dim();
    let total = d
        .checked_pow(n as u32)
        .filter(|&t| t <= INDEX_GUARD)
        .ok_or_else(|| Error::GuardExceeded(format!("{d}^{n} exceeds the index guard")))?;
    let proj = typical_projector(rho, n, delta)?;
    let typical = proj.member_indices();

    let d1 = divisor_at_least(d, n as u32, typical.len().max(1) as u128);
    let d2 = total / d1;

    let seq_log2p: Vec<f64> = (0..total)
        .map(|idx| {
            let mut rem = idx;
            let mut acc = 0.0;
            for _ in 0..n {
                let p = proj.spectrum[rem % d];
                acc += if p > 0.0 { p.log2() } else { f64::NEG_INFINITY };
                rem /= d;
            }
            acc
        })
        .collect();

    // pad the member list to d1 with the most probable non-typical
    // sequences (ties to the lowest index)
    let mut members = typical;
    if members.len() < d1 {
        let mut is_member = vec![false; total];
        for &m in &members {
            is_member[m] = true;
        }
        let mut rest: Vec<usize> = (0..total).filter(|&i| !is_member[i]).collect();
        rest.sort_by(|&a, &b| seq_log2p[b].total_cmp(&seq_log2p[a]).then(a.cmp(&b)));
        let need = d1 - members.len();
        members.extend(rest.into_iter().take(need));
        members.sort_unstable();
    }

    let seq_probs: Vec<f64> = seq_log2p.iter().map(|l| l.exp2()).collect();
    let (perm, defect) = compact_projector_range(&members, &seq_probs, d1, d2)?;

    Ok(ConcentrationCode {
        n,
        delta,
        dim: d,
        d_garbage: d1,
        d_pure: d2,
        rate: (d2 as f64).log2() / n as f64,
        achieved_epsilon: 1.0 - proj.mass(),
        member_mass: 1.0 - defect,
        permutation: perm.into_iter().map(|p| p as u32).collect(),
    })
}

/// Slack of the converse bound R <= log2 d - H(rho) + delta' with
/// delta' = 1/(e n) + epsilon log2 d. Non-negative for every code this
/// module emits; negative for forged rates.
pub fn converse_check(code: &ConcentrationCode, rho: &DensityMatrix) -> f64 {
    let log_d = (code.dim as f64).log2();
    let delta_prime = 1.0 / (std::f64::consts::E * code.n as f64) + code.achieved_epsilon * log_d;
    log_d - crate::entropy::von_neumann(rho) + delta_prime - code.rate
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Independent oracle: exact binomial summation of the typical mass of a
    /// binary spectrum.
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

    #[test]
    fn pure_state_single_sequence() {
        let rho = DensityMatrix::basis_state(2, 0);
        let t = typical_projector(&rho, 12, 0.1).unwrap();
        assert_eq!(t.size(), 1);
        assert_abs_diff_eq!(t.mass(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn uniform_spectrum_everything_typical() {
        let rho = DensityMatrix::maximally_mixed(2);
        let t = typical_projector(&rho, 10, 0.05).unwrap();
        assert_eq!(t.size(), 1 << 10);
        assert_abs_diff_eq!(t.mass(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mass_matches_binomial_oracle() {
        let rho = DensityMatrix::from_diagonal(&[0.9, 0.1]).unwrap();
        let t = typical_projector(&rho, 20, 0.1).unwrap();
        let oracle = binomial_typical_mass(0.9, 20, 0.1);
        assert_abs_diff_eq!(t.mass(), oracle, epsilon = 1e-12);
        assert!((t.size() as f64).log2() <= t.log2_size_bound());
    }

    #[test]
    fn mass_grows_with_n() {
        // mass tends to 1 as n grows; each point is checked against the
        // exact binomial oracle (the step-by-step sequence is not monotone
        // because the typical window shifts across the count lattice, so
        // representative points are compared)
        let spectrum = [0.9, 0.1];
        let m20 = typical_mass(&spectrum, 20, 0.1).unwrap().mass;
        let m60 = typical_mass(&spectrum, 60, 0.1).unwrap().mass;
        let m120 = typical_mass(&spectrum, 120, 0.1).unwrap().mass;
        assert_abs_diff_eq!(m20, binomial_typical_mass(0.9, 20, 0.1), epsilon = 1e-12);
        assert_abs_diff_eq!(m60, binomial_typical_mass(0.9, 60, 0.1), epsilon = 1e-12);
        assert_abs_diff_eq!(m120, binomial_typical_mass(0.9, 120, 0.1), epsilon = 1e-12);
        assert!(m60 > m20, "{m60} <= {m20}");
        assert!(m120 > m60, "{m120} <= {m60}");
    }

    #[test]
    fn membership_consistent_with_enumeration() {
        let rho = DensityMatrix::from_diagonal(&[0.8, 0.2]).unwrap();
        let t = typical_projector(&rho, 6, 0.2).unwrap();
        let members = t.member_indices();
        assert_eq!(members.len() as u128, t.size());
        for &m in &members {
            let seq: Vec<usize> = (0..6).rev().map(|k| (m >> k) & 1).collect();
            assert!(t.contains(&seq));
        }
    }

    #[test]
    fn relabel_identity_projector() {
        let probs = [0.5, 0.3, 0.2, 0.0];
        let (perm, dist) = compact_projector_range(&[0, 1, 2, 3], &probs, 4, 1).unwrap();
        assert_eq!(perm, vec![0, 1, 2, 3]);
        assert_abs_diff_eq!(dist, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn relabel_qubit_example() {
        // d1 = 1, d2 = 2: keep the heavy eigenvalue, distance is the
        // discarded mass
        let (perm, dist) = compact_projector_range(&[0], &[0.95, 0.05], 1, 2).unwrap();
        assert_eq!(perm, vec![0, 1]);
        assert_abs_diff_eq!(dist, 0.05, epsilon = 1e-15);
    }

    #[test]
    fn relabel_typical_case_distance_is_defect() {
        let rho = DensityMatrix::from_diagonal(&[0.9, 0.1]).unwrap();
        let t = typical_projector(&rho, 10, 0.15).unwrap();
        let members = t.member_indices();
        let d1 = 16usize;
        assert!(members.len() <= d1);
        let seq_probs: Vec<f64> = (0..1usize << 10)
            .map(|idx| {
                (0..10).fold(1.0, |acc, k| acc * if (idx >> k) & 1 == 0 { 0.9 } else { 0.1 })
            })
            .collect();
        let (_, dist) = compact_projector_range(&members, &seq_probs, d1, 1 << 6).unwrap();
        assert_abs_diff_eq!(dist, 1.0 - t.mass(), epsilon = 1e-12);
    }

    #[test]
    fn relabel_rejects_bad_inputs() {
        assert!(compact_projector_range(&[0, 0], &[0.5, 0.5], 2, 1).is_err());
        assert!(compact_projector_range(&[0, 1, 2], &[0.5, 0.3, 0.2, 0.0], 2, 2).is_err());
        assert!(compact_projector_range(&[0], &[0.5, 0.5, 0.0], 1, 2).is_err());
    }

    #[test]
    fn relabel_dense_cross_check() {
        // dense route on diag(.95,.05) with Pi = |0><0| reproduces the
        // classical distance
        let rho = DensityMatrix::from_diagonal(&[0.95, 0.05]).unwrap();
        let pi = DensityMatrix::basis_state(2, 0);
        let (u, dist) = compact_projector_range_dense(pi.matrix(), &rho, 1, 2).unwrap();
        assert!(qmat::unitary_deviation(&u) < 1e-10);
        assert_abs_diff_eq!(dist, 0.05, epsilon = 1e-10);

        // non-commuting projector rejected
        let mut v = crate::qmat::CVector::zeros(2);
        v[0] = num_complex::Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        v[1] = num_complex::Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let plus = DensityMatrix::pure(&v).unwrap();
        assert!(compact_projector_range_dense(plus.matrix(), &rho, 1, 2).is_err());
    }

    #[test]
    fn concentration_code_pure_state() {
        let rho = DensityMatrix::basis_state(2, 0);
        let code = build_concentration_code(&rho, 8, 0.1).unwrap();
        assert_eq!(code.d_garbage, 1);
        assert_abs_diff_eq!(code.rate, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(code.achieved_epsilon, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn concentration_code_maximally_mixed() {
        let rho = DensityMatrix::maximally_mixed(2);
        let code = build_concentration_code(&rho, 8, 0.1).unwrap();
        assert_eq!(code.d_pure, 1);
        assert_abs_diff_eq!(code.rate, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn concentration_code_biased_qubit() {
        let rho = DensityMatrix::from_diagonal(&[0.9, 0.1]).unwrap();
        let code = build_concentration_code(&rho, 20, 0.1).unwrap();
        let h2 = -(0.9f64.log2() * 0.9 + 0.1f64.log2() * 0.1);
        let kappa = 1.0 - h2;
        assert!(
            code.rate >= kappa - 0.1 - 1.0 / 20.0,
            "rate {} below kappa - delta - 1/n",
            code.rate
        );
        assert_abs_diff_eq!(
            code.achieved_epsilon,
            1.0 - binomial_typical_mass(0.9, 20, 0.1),
            epsilon = 1e-12
        );
        // the permutation is a bijection
        let mut seen = vec![false; 1 << 20];
        for &p in &code.permutation {
            assert!(!seen[p as usize]);
            seen[p as usize] = true;
        }
    }

    #[test]
    fn rate_approaches_kappa() {
        let rho = DensityMatrix::from_diagonal(&[0.9, 0.1]).unwrap();
        let h2 = -(0.9f64.log2() * 0.9 + 0.1f64.log2() * 0.1);
        let kappa = 1.0 - h2;
        for n in [8usize, 12, 16, 20] {
            let code = build_concentration_code(&rho, n, 0.1).unwrap();
            assert!(code.rate >= kappa - 0.1 - 1.0 / n as f64);
        }
    }

    #[test]
    fn converse_accepts_real_codes_rejects_forged() {
        let rho = DensityMatrix::from_diagonal(&[0.9, 0.1]).unwrap();
        let code = build_concentration_code(&rho, 20, 0.1).unwrap();
        assert!(converse_check(&code, &rho) >= -1e-9);

        let pure = DensityMatrix::basis_state(2, 0);
        let pcode = build_concentration_code(&pure, 8, 0.1).unwrap();
        let slack = converse_check(&pcode, &pure);
        assert!(slack >= -1e-9);
        assert!(slack <= 1.0 / (std::f64::consts::E * 8.0) + 1e-12);

        // forged: claim rate log2 d with zero epsilon on a mixed state
        let forged = ConcentrationCode { rate: 1.0, achieved_epsilon: 0.0, ..code };
        assert!(converse_check(&forged, &rho) < 0.0);
    }

    #[test]
    fn concentration_code_qutrit_divisor_padding() {
        // 3^n has only powers of three as divisors: the garbage register
        // snaps up to one, costing at most log2(3)/n of rate
        let rho = DensityMatrix::from_diagonal(&[0.8, 0.15, 0.05]).unwrap();
        let code = build_concentration_code(&rho, 7, 0.2).unwrap();
        assert_eq!(code.d_garbage * code.d_pure, 3usize.pow(7));
        assert!(code.d_garbage.is_power_of_two() || code.d_garbage % 3 == 0 || code.d_garbage == 1);
        let kappa = 3f64.log2() - crate::entropy::von_neumann(&rho);
        assert!(code.rate >= kappa - 0.2 - 3f64.log2() / 7.0);
        assert!(converse_check(&code, &rho) >= -1e-9);
    }

    #[test]
    fn guard_rejects_oversized_instances() {
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(typical_projector(&rho, 21, 0.1).is_err());
        assert!(build_concentration_code(&rho, 21, 0.1).is_err());
    }
}
