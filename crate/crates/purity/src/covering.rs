//! Covering codes: bin the high-probability X-sequences of an ensemble into
//! lambda bins of mu sequences each, with a per-bin decoding POVM on B^n
//! that identifies the bin member reliably.
//!
//! The decoders are pretty-good measurements with uniform priors inside each
//! bin: exactly optimal when the B-states are orthogonal, and the standard
//! constructive surrogate otherwise. Binning is a seeded random permutation
//! sliced into contiguous bins, retried with doubled lambda until the
//! worst-case success criterion holds; lambda = |S| (single-member bins)
//! always succeeds. The asymptotic rate bounds are reported by the verifier,
//! never asserted at desk-scale n.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::entropy;
use crate::exec;
use crate::qmat::{self, CMatrix, ClassicalQuantumState, DensityMatrix, Povm};
use crate::tol;
use crate::{Error, Result};

/// Guard on the enumerated sequence space |X|^n.
pub const SEQUENCE_GUARD: usize = 1 << 16;
/// Guard on the B^n dimension d_B^n.
pub const B_DIM_GUARD: usize = 256;

// ---------------------------------------------------------------------------
// Sequence states
// ---------------------------------------------------------------------------

/// Tensor-product B-state of a sequence, kept diagonal when the ensemble is.
#[derive(Debug, Clone)]
pub enum SeqState {
    Diagonal(Vec<f64>),
    Dense(CMatrix),
}

impl SeqState {
    pub fn dim(&self) -> usize {
        match self {
            SeqState::Diagonal(v) => v.len(),
            SeqState::Dense(m) => m.nrows(),
        }
    }
}

/// Decode a flat sequence index into symbols, most significant first.
pub fn sequence_symbols(index: usize, n: usize, alphabet: usize) -> Vec<usize> {
    let mut out = vec![0usize; n];
    let mut rem = index;
    for k in (0..n).rev() {
        out[k] = rem % alphabet;
        rem /= alphabet;
    }
    out
}

/// rho_{x^n} = (x)_i rho_{x_i} for a flat sequence index.
pub fn sequence_state(cq: &ClassicalQuantumState, index: usize, n: usize) -> SeqState {
    let symbols = sequence_symbols(index, n, cq.len());
    let diagonal = cq.states().iter().all(|s| s.is_diagonal(1e-12));
    if diagonal {
        let mut v = vec![1.0f64];
        for &x in &symbols {
            let d = cq.states()[x].diagonal_probs();
            let mut next = Vec::with_capacity(v.len() * d.len());
            for &a in &v {
                for &b in &d {
                    next.push(a * b);
                }
            }
            v = next;
        }
        SeqState::Diagonal(v)
    } else {
        let mut m = CMatrix::identity(1, 1);
        for &x in &symbols {
            m = m.kronecker(cq.states()[x].matrix());
        }
        SeqState::Dense(m)
    }
}

// ---------------------------------------------------------------------------
// Pretty-good measurement
// ---------------------------------------------------------------------------

/// Pretty-good measurement for an ensemble: elements
/// S^{-1/2} p_m rho_m S^{-1/2} with S = sum p_m rho_m; if S is singular the
/// kernel projector is appended as a junk outcome.
pub fn pretty_good_measurement(states: &[DensityMatrix], priors: &[f64]) -> Result<Povm> {
    if states.is_empty() || states.len() != priors.len() {
        return Err(Error::DimensionMismatch("states and priors must align, non-empty".into()));
    }
    let psum: f64 = priors.iter().sum();
    if priors.iter().any(|&p| p < 0.0) || (psum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState("priors must be a probability vector".into()));
    }
    let d = states[0].dim();
    if states.iter().any(|s| s.dim() != d) {
        return Err(Error::DimensionMismatch("ensemble states differ in dimension".into()));
    }

    let mut sigma = CMatrix::zeros(d, d);
    for (p, s) in priors.iter().zip(states) {
        sigma += s.matrix().scale(*p);
    }
    let (vals, vecs) = qmat::hermitian_eig(&sigma);
    let cutoff = vals.first().copied().unwrap_or(0.0).max(1.0) * 1e-14;
    let mut inv_sqrt = CMatrix::zeros(d, d);
    let mut kernel = CMatrix::zeros(d, d);
    for (k, &v) in vals.iter().enumerate() {
        let col = vecs.column(k);
        if v > cutoff {
            inv_sqrt += (col * col.adjoint()).scale(1.0 / v.sqrt());
        } else {
            kernel += col * col.adjoint();
        }
    }

    let mut elements: Vec<CMatrix> = priors
        .iter()
        .zip(states)
        .map(|(p, s)| (&inv_sqrt * s.matrix() * &inv_sqrt).scale(*p))
        .collect();
    if kernel.trace().re > 0.5 {
        elements.push(kernel);
    }
    Povm::new(elements)
}

/// Per-element success probabilities Tr(rho_m Y_m) of a PGM.
pub fn pgm_success(povm: &Povm, states: &[DensityMatrix]) -> Vec<f64> {
    states
        .iter()
        .zip(povm.elements())
        .map(|(s, e)| (e * s.matrix()).trace().re)
        .collect()
}

/// PGM over diagonal states given as probability vectors: returns the
/// diagonal entries of each element (one per input state; completeness holds
/// entrywise, with zero-support entries assigned to the first element).
fn pgm_diagonal(states: &[&[f64]], priors: &[f64]) -> Vec<Vec<f64>> {
    let dim = states[0].len();
    let mut sigma = vec![0.0f64; dim];
    for (p, s) in priors.iter().zip(states) {
        for (acc, v) in sigma.iter_mut().zip(*s) {
            *acc += p * v;
        }
    }
    let mut elements: Vec<Vec<f64>> = priors
        .iter()
        .zip(states)
        .map(|(p, s)| {
            s.iter()
                .zip(&sigma)
                .map(|(&v, &sg)| if sg > 0.0 { p * v / sg } else { 0.0 })
                .collect()
        })
        .collect();
    // entries outside the support: route to the first element so the
    // completeness sum is exactly one everywhere
    for b in 0..dim {
        if sigma[b] <= 0.0 {
            elements[0][b] = 1.0;
        }
    }
    elements
}

/// A per-bin decoder: PGM elements in compact diagonal form when the
/// ensemble is diagonal, a dense POVM otherwise.
#[derive(Debug, Clone)]
pub enum BinDecoder {
    Diagonal { elements: Vec<Vec<f64>> },
    Dense(Povm),
}

impl BinDecoder {
    pub fn outcomes(&self) -> usize {
        match self {
            BinDecoder::Diagonal { elements } => elements.len(),
            BinDecoder::Dense(p) => p.len(),
        }
    }

    /// Tr(rho Y_m).
    pub fn success(&self, m: usize, state: &SeqState) -> f64 {
        match (self, state) {
            (BinDecoder::Diagonal { elements }, SeqState::Diagonal(q)) => {
                elements[m].iter().zip(q).map(|(e, p)| e * p).sum()
            }
            (BinDecoder::Dense(povm), SeqState::Dense(rho)) => {
                (&povm.elements()[m] * rho).trace().re
            }
            (BinDecoder::Diagonal { elements }, SeqState::Dense(rho)) => (0..elements[m].len())
                .map(|b| elements[m][b] * rho[(b, b)].re)
                .sum(),
            (BinDecoder::Dense(povm), SeqState::Diagonal(q)) => {
                let e = &povm.elements()[m];
                q.iter().enumerate().map(|(b, p)| e[(b, b)].re * p).sum()
            }
        }
    }

    /// Entrywise POVM validity: elements PSD, completeness to tolerance.
    pub fn is_valid_povm(&self) -> bool {
        match self {
            BinDecoder::Diagonal { elements } => {
                let dim = elements[0].len();
                for b in 0..dim {
                    let sum: f64 = elements.iter().map(|e| e[b]).sum();
                    if (sum - 1.0).abs() > tol::POVM_COMPLETE {
                        return false;
                    }
                    if elements.iter().any(|e| e[b] < -tol::NEGATIVE_EIG) {
                        return false;
                    }
                }
                true
            }
            BinDecoder::Dense(_) => true, // validated on construction
        }
    }
}

// ---------------------------------------------------------------------------
// CoveringCode
// ---------------------------------------------------------------------------

/// A constructed covering: the set S (as bins), the bijection
/// f(m, l) = bins[l][m], per-bin decoders, and the achieved statistics.
#[derive(Debug, Clone)]
pub struct CoveringCode {
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub alphabet: usize,
    pub mu: usize,
    pub lambda: usize,
    /// bins[l][m] = flat index of the sequence f(m, l).
    pub bins: Vec<Vec<usize>>,
    pub decoders: Vec<BinDecoder>,
    /// min over (m, l) of Tr(rho_{f(m,l)} Y^{(l)}_m).
    pub min_success: f64,
    /// Pr{X^n in S}.
    pub set_mass: f64,
    /// Times lambda was doubled before the success criterion held.
    pub retries: usize,
}

impl CoveringCode {
    pub fn f(&self, m: usize, l: usize) -> usize {
        self.bins[l][m]
    }

    pub fn set_size(&self) -> usize {
        self.mu * self.lambda
    }
}

/// Machine-readable serialization (bins, f-table as symbol sequences, and
/// achieved stats; decoders are reconstructible from the seed).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoveringCodeFile {
    pub n: usize,
    pub alphabet: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub mu: usize,
    pub lambda: usize,
    pub min_success: f64,
    pub set_mass: f64,
    pub retries: usize,
    /// f_table[l][m] = symbol sequence of f(m, l).
    pub f_table: Vec<Vec<Vec<usize>>>,
}

impl CoveringCode {
    pub fn to_file(&self) -> CoveringCodeFile {
        CoveringCodeFile {
            n: self.n,
            alphabet: self.alphabet,
            epsilon: self.epsilon,
            delta: self.delta,
            seed: self.seed,
            mu: self.mu,
            lambda: self.lambda,
            min_success: self.min_success,
            set_mass: self.set_mass,
            retries: self.retries,
            f_table: self
                .bins
                .iter()
                .map(|bin| {
                    bin.iter().map(|&i| sequence_symbols(i, self.n, self.alphabet)).collect()
                })
                .collect(),
        }
    }
}

fn seq_log2_prob(probs: &[f64], index: usize, n: usize) -> f64 {
    let alphabet = probs.len();
    let mut rem = index;
    let mut acc = 0.0;
    for _ in 0..n {
        let p = probs[rem % alphabet];
        acc += if p > 0.0 { p.log2() } else { f64::NEG_INFINITY };
        rem /= alphabet;
    }
    acc
}

/// The high-probability set S: delta-typical sequences, extended by the most
/// probable others until Pr{X^n in S} >= 1 - epsilon. Returns (members
/// ascending, mass, remaining candidates in fill order).
fn high_probability_set(
    probs: &[f64],
    n: usize,
    epsilon: f64,
    delta: f64,
) -> (Vec<usize>, f64, Vec<usize>) {
    let total = probs.len().pow(n as u32);
    let h = entropy::shannon(probs);
    let lo = -(n as f64) * (h + delta);
    let hi = -(n as f64) * (h - delta);

    let log2p: Vec<f64> = (0..total).map(|i| seq_log2_prob(probs, i, n)).collect();
    let mut members: Vec<usize> = (0..total)
        .filter(|&i| log2p[i] >= lo && log2p[i] <= hi)
        .collect();
    let mut mass: f64 = members.iter().map(|&i| log2p[i].exp2()).sum();

    let mut is_member = vec![false; total];
    for &m in &members {
        is_member[m] = true;
    }
    let mut rest: Vec<usize> = (0..total).filter(|&i| !is_member[i]).collect();
    rest.sort_by(|&a, &b| log2p[b].total_cmp(&log2p[a]).then(a.cmp(&b)));

    let mut fill = rest.into_iter();
    while mass < 1.0 - epsilon {
        match fill.next() {
            Some(i) => {
                mass += log2p[i].exp2();
                members.push(i);
            }
            None => break,
        }
    }
    members.sort_unstable();
    (members, mass.min(1.0), fill.collect())
}

/// Smallest divisor of `total` that is >= floor (total is a power of the
/// alphabet size here, so divisors are dense enough).
fn divisor_at_least(total: usize, floor: usize) -> usize {
    (floor..=total).find(|d| total % d == 0).unwrap_or(total)
}

pub(crate) struct Attempt {
    bins: Vec<Vec<usize>>,
    decoders: Vec<BinDecoder>,
    min_success: f64,
    mass: f64,
}

/// One binning attempt at a fixed lambda over a fixed base set; pub(crate)
/// so refinement behavior is directly testable.
pub(crate) fn attempt_with_lambda(
    cq: &ClassicalQuantumState,
    n: usize,
    base_members: &[usize],
    base_mass: f64,
    spare: &[usize],
    lambda: usize,
    seed: u64,
) -> Result<Attempt> {
    let total = cq.len().pow(n as u32);
    let lambda = lambda.min(base_members.len()).max(1);
    let mut mu = base_members.len().div_ceil(lambda);
    let mut members: Vec<usize> = base_members.to_vec();
    let mut mass = base_mass;

    if mu * lambda <= total {
        // pad S to exactly mu * lambda with the next most probable sequences
        let need = mu * lambda - members.len();
        for &i in spare.iter().take(need) {
            mass += seq_log2_prob(cq.probs(), i, n).exp2();
            members.push(i);
        }
        if members.len() < mu * lambda {
            // ran out of sequences; fall back to the full space
            members = (0..total).collect();
            mass = 1.0;
            let l = divisor_at_least(total, lambda);
            mu = total / l;
            return finish_attempt(cq, n, members, mass.min(1.0), mu, l, seed);
        }
    } else {
        // S would exceed the whole space: take everything and snap lambda to
        // a divisor
        members = (0..total).collect();
        mass = 1.0;
        let l = divisor_at_least(total, lambda);
        mu = total / l;
        return finish_attempt(cq, n, members, mass, mu, l, seed);
    }
    finish_attempt(cq, n, members, mass.min(1.0), mu, lambda, seed)
}

fn finish_attempt(
    cq: &ClassicalQuantumState,
    n: usize,
    mut members: Vec<usize>,
    mass: f64,
    mu: usize,
    lambda: usize,
    seed: u64,
) -> Result<Attempt> {
    members.sort_unstable();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    members.shuffle(&mut rng);

    let bins: Vec<Vec<usize>> = (0..lambda)
        .map(|l| members[l * mu..(l + 1) * mu].to_vec())
        .collect();

    let results: Vec<(BinDecoder, f64)> = exec::map_indexed(lambda, |l| {
        let bin = &bins[l];
        let states: Vec<SeqState> =
            bin.iter().map(|&i| sequence_state(cq, i, n)).collect();
        let priors = vec![1.0 / mu as f64; mu];
        let decoder = match &states[0] {
            SeqState::Diagonal(_) => {
                let vecs: Vec<&[f64]> = states
                    .iter()
                    .map(|s| match s {
                        SeqState::Diagonal(v) => v.as_slice(),
                        SeqState::Dense(_) => unreachable!(),
                    })
                    .collect();
                BinDecoder::Diagonal { elements: pgm_diagonal(&vecs, &priors) }
            }
            SeqState::Dense(_) => {
                let dms: Vec<DensityMatrix> = states
                    .iter()
                    .map(|s| match s {
                        SeqState::Dense(m) => DensityMatrix::new(m.clone())
                            .expect("tensor products of states are states"),
                        SeqState::Diagonal(_) => unreachable!(),
                    })
                    .collect();
                let pgm =
                    pretty_good_measurement(&dms, &priors).expect("bin PGM is well-formed");
                // fold a kernel (junk) outcome into element 0: bin states
                // live on the support, so successes are unchanged, and the
                // decoder keeps exactly mu outcomes for its coherent version
                let mut elements = pgm.elements().to_vec();
                if elements.len() == mu + 1 {
                    let junk = elements.pop().expect("non-empty");
                    elements[0] += junk;
                }
                BinDecoder::Dense(Povm::new(elements).expect("folded PGM stays a POVM"))
            }
        };
        let worst = states
            .iter()
            .enumerate()
            .map(|(m, s)| decoder.success(m, s))
            .fold(f64::INFINITY, f64::min);
        (decoder, worst)
    });

    let mut decoders = Vec::with_capacity(lambda);
    let mut min_success = f64::INFINITY;
    for (d, w) in results {
        min_success = min_success.min(w);
        decoders.push(d);
    }
    Ok(Attempt { bins, decoders, min_success, mass })
}

/// Build a covering code: take the high-probability set, bin it at the
/// target lambda ~ 2^{n(H(X) - I(X;B))}, and double lambda until the
/// worst-case decoding success reaches 1 - epsilon (guaranteed at
/// single-member bins).
pub fn build_covering(
    cq: &ClassicalQuantumState,
    n: usize,
    epsilon: f64,
    delta: f64,
    seed: u64,
) -> Result<CoveringCode> {
    if n == 0 || !(0.0..1.0).contains(&epsilon) || delta <= 0.0 {
        return Err(Error::InvalidState("need n >= 1, epsilon in [0,1), delta > 0".into()));
    }
    let alphabet = cq.len();
    let total = alphabet
        .checked_pow(n as u32)
        .filter(|&t| t <= SEQUENCE_GUARD)
        .ok_or_else(|| Error::GuardExceeded(format!("{alphabet}^{n} exceeds sequence guard")))?;
    let _ = total;
    let b_dim = cq
        .dim_b()
        .checked_pow(n as u32)
        .filter(|&t| t <= B_DIM_GUARD)
        .ok_or_else(|| {
            Error::GuardExceeded(format!("d_B^{n} exceeds the dense guard {B_DIM_GUARD}"))
        })?;
    let _ = b_dim;

    let (members, mass, spare) = high_probability_set(cq.probs(), n, epsilon, delta);
    let h = entropy::shannon(cq.probs());
    let mi = entropy::cq_mutual_info(cq);
    // the number of bins a decoder needs: lambda ~ 2^{n(H-I)}; the delta
    // slack lives in the verifier's bound, retries supply it constructively
    let lambda0 = (((n as f64) * (h - mi)).exp2().floor() as usize).max(1);

    let mut lambda = lambda0.min(members.len()).max(1);
    let mut retries = 0;
    loop {
        let attempt = attempt_with_lambda(cq, n, &members, mass, &spare, lambda, seed)?;
        let done = attempt.min_success >= 1.0 - epsilon || attempt.bins[0].len() == 1;
        if done {
            return Ok(CoveringCode {
                n,
                epsilon,
                delta,
                seed,
                alphabet,
                mu: attempt.bins[0].len(),
                lambda: attempt.bins.len(),
                bins: attempt.bins,
                decoders: attempt.decoders,
                min_success: attempt.min_success,
                set_mass: attempt.mass,
                retries,
            });
        }
        retries += 1;
        lambda = (lambda * 2).min(members.len());
    }
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

/// Structural and statistical re-checks of a covering code. Rate bounds are
/// asymptotic targets: they are flagged, not asserted, at desk-scale n.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoveringReport {
    pub set_mass: f64,
    pub mass_ok: bool,
    pub bijective: bool,
    pub mu_lambda: usize,
    pub lambda: usize,
    /// 2^{n(H(X) - I(X;B) + delta)}.
    pub lambda_bound: f64,
    pub lambda_within_bound: bool,
    /// 2^{n(H(X) + delta)}.
    pub mu_lambda_bound: f64,
    pub mu_lambda_within_bound: bool,
    pub min_success: f64,
    pub success_ok: bool,
    pub decoders_valid: bool,
}

pub fn verify_covering(code: &CoveringCode, cq: &ClassicalQuantumState) -> CoveringReport {
    let n = code.n;
    // recompute the set mass from scratch
    let mut seen = std::collections::BTreeSet::new();
    let mut mass = 0.0;
    let mut bijective = true;
    for bin in &code.bins {
        for &i in bin {
            if !seen.insert(i) {
                bijective = false;
            } else {
                mass += seq_log2_prob(cq.probs(), i, n).exp2();
            }
        }
    }
    if code.bins.iter().any(|b| b.len() != code.mu) || code.bins.len() != code.lambda {
        bijective = false;
    }

    // recompute the worst-case success from scratch
    let mut min_success = f64::INFINITY;
    for (l, bin) in code.bins.iter().enumerate() {
        for (m, &i) in bin.iter().enumerate() {
            let s = sequence_state(cq, i, n);
            min_success = min_success.min(code.decoders[l].success(m, &s));
        }
    }

    let h = entropy::shannon(cq.probs());
    let mi = entropy::cq_mutual_info(cq);
    let lambda_bound = ((n as f64) * (h - mi + code.delta)).exp2();
    let mu_lambda_bound = ((n as f64) * (h + code.delta)).exp2();

    CoveringReport {
        set_mass: mass,
        mass_ok: mass >= 1.0 - code.epsilon - 1e-12,
        bijective,
        mu_lambda: code.mu * code.lambda,
        lambda: code.lambda,
        lambda_bound,
        lambda_within_bound: (code.lambda as f64) <= lambda_bound,
        mu_lambda_bound,
        mu_lambda_within_bound: (code.mu * code.lambda) as f64 <= mu_lambda_bound,
        min_success,
        success_ok: min_success >= 1.0 - code.epsilon - 1e-12,
        decoders_valid: code.decoders.iter().all(|d| d.is_valid_povm()),
    }
}
