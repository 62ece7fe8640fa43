//! The one-way local purity distillation protocol, end to end: the shared
//! random bit example, coherent measurement with a borrowed catalyst,
//! covering-based compaction, Bob's coherent decoders, final concentration,
//! and the pbit ledger with its converse margin.
//!
//! Classical-classical inputs run entirely on probability vectors (exact,
//! scalable to n = 16); the dense coherent operations are exposed separately
//! and cross-checked against the classical path at tiny dimensions.

use num_complex::Complex64;
use serde::Serialize;

use crate::covering::{
    build_covering, sequence_state, sequence_symbols, BinDecoder, CoveringCode,
};
use crate::entropy;
use crate::povm_opt::{kappa_one_way_level, OptimizerConfig, RankOnePovm};
use crate::qmat::{
    self, controlled_unitary, dephase, BipartiteState, CMatrix, CVector, ClassicalQuantumState,
    DensityMatrix,
};
use crate::typicality::{build_concentration_code, ConcentrationCode};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Ledger
// ---------------------------------------------------------------------------

/// Pbit accounting for one protocol run. The rate identity
/// rate = (1/n)(log2(d_pure_a d_pure_b) - log2 d_catalyst) is exact integer
/// dimension bookkeeping.
#[derive(Debug, Clone, Serialize)]
pub struct Ledger {
    pub n: usize,
    /// Borrowed catalyst dimension d_C.
    pub d_catalyst: u128,
    /// Dimension of Alice's pure output registers.
    pub d_pure_a: u128,
    /// Dimension of Bob's pure output registers.
    pub d_pure_b: u128,
    /// (1/n)(log2 d_pure_a + log2 d_pure_b - log2 d_catalyst).
    pub rate: f64,
    /// (1/n) log2 d_catalyst.
    pub catalyst_rate: f64,
    /// (1/n) log2(mu lambda) for covering-based runs; the dephased register
    /// size per copy otherwise.
    pub classical_bits_sent: f64,
}

impl Ledger {
    fn new(n: usize, d_catalyst: u128, d_pure_a: u128, d_pure_b: u128, bits_sent: f64) -> Self {
        let log_out = (d_pure_a as f64).log2() + (d_pure_b as f64).log2();
        let log_cat = (d_catalyst as f64).log2();
        Ledger {
            n,
            d_catalyst,
            d_pure_a,
            d_pure_b,
            rate: (log_out - log_cat) / n as f64,
            catalyst_rate: log_cat / n as f64,
            classical_bits_sent: bits_sent,
        }
    }

    /// Catalytic contract: the pure output covers the borrowed catalyst.
    pub fn catalyst_returned(&self) -> bool {
        (self.d_pure_a as f64).log2() + (self.d_pure_b as f64).log2()
            >= (self.d_catalyst as f64).log2() - 1e-12
    }
}

// ---------------------------------------------------------------------------
// Trace
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    pub label: String,
    pub registers: String,
    /// Trace distance of the step output to its ideal target.
    pub distance_to_ideal: f64,
    /// Whether the distance is exact (classical representation) or a
    /// certified bound.
    pub exact: bool,
}

/// Covering-stage intermediates: the (M, L) rectangle, theta' distribution
/// p(m, l), the compacted X' register, and the decoder success statistics.
#[derive(Debug, Clone, Serialize)]
pub struct CoveringTraceInfo {
    pub mu: usize,
    pub lambda: usize,
    /// p(m, l) of theta', indexed [l][m].
    pub p_ml: Vec<Vec<f64>>,
    pub set_mass: f64,
    pub log2_d_x_prime: f64,
    /// sum_{m,l} p(m,l) <0| sigma^M_{ml} |0>.
    pub mean_m_success: f64,
    /// 2 sqrt(1 - mean success): the fidelity-bound distance of the average
    /// decoded M register from |0>.
    pub m_distance_bound: f64,
    /// True when every bin member decodes with probability exactly 1.
    pub m_distance_exact_zero: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProtocolTrace {
    pub steps: Vec<StepRecord>,
    pub covering: Option<CoveringTraceInfo>,
    /// Exact per-copy I(X; B^n)/n of the measured ensemble.
    pub mutual_info_per_copy: f64,
    /// Certified distance of the pure outputs from |0...0>: the sum of the
    /// per-register replacement costs.
    pub final_distance: f64,
    pub final_distance_exact: bool,
    /// The asymptotic closeness envelope 7 eps + (2 + sqrt 8) sqrt(eps) at
    /// the run's target epsilon.
    pub epsilon_envelope: f64,
}

fn envelope(eps: f64) -> f64 {
    7.0 * eps + (2.0 + 8.0_f64.sqrt()) * eps.sqrt()
}

// ---------------------------------------------------------------------------
// The shared-random-bit example
// ---------------------------------------------------------------------------

/// Distill one pbit from a shared uniformly random bit: Alice dephases her
/// half into the channel (it is a fixed point), Bob applies the controlled
/// flip |0><0| (x) 1 + |1><1| (x) V, and his B register lands exactly in
/// |0>. Rate 1, no catalyst.
pub fn run_example1() -> (Ledger, ProtocolTrace) {
    let state = BipartiteState::common_randomness_bit();
    let mut steps = Vec::new();

    // the dephasing channel leaves the diagonal state intact
    let dephased = dephase(state.state(), &qmat::identity(4)).expect("valid basis");
    let d0 = dephased.trace_distance(state.state());
    steps.push(StepRecord {
        label: "dephase A into the channel".into(),
        registers: "X (dim 2) with Bob's B (dim 2)".into(),
        distance_to_ideal: d0,
        exact: true,
    });

    // Bob's controlled flip
    let flip = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ],
    );
    let u = controlled_unitary(&[qmat::identity(2), flip]).expect("blocks are unitary");
    let out = qmat::conjugate(&dephased, &u).expect("controlled unitary");
    let out_b = BipartiteState::new(2, 2, out).expect("dims").marginal(qmat::Subsystem::B);
    let final_distance = out_b.trace_distance(&DensityMatrix::basis_state(2, 0));
    steps.push(StepRecord {
        label: "controlled flip on (X, B)".into(),
        registers: "B (dim 2) -> |0>".into(),
        distance_to_ideal: final_distance,
        exact: true,
    });

    let ledger = Ledger::new(1, 1, 1, 2, 1.0);
    let trace = ProtocolTrace {
        steps,
        covering: None,
        mutual_info_per_copy: entropy::mutual_info(&state),
        final_distance,
        final_distance_exact: true,
        epsilon_envelope: 0.0,
    };
    (ledger, trace)
}

// ---------------------------------------------------------------------------
// Coherent measurement
// ---------------------------------------------------------------------------

/// Output of a coherent rank-1 measurement with the controlled reset
/// already applied: the pure state sum_x sqrt(p(x)) |x>^X |0>^A |phi_x>^R.
#[derive(Debug, Clone)]
pub struct CoherentMeasurement {
    /// Amplitudes on X (x) A (x) R, X-major flat order.
    pub amplitudes: CVector,
    pub dim_x: usize,
    pub dim_a: usize,
    pub dim_r: usize,
}

impl CoherentMeasurement {
    /// Outcome distribution p(x) read from the X register.
    pub fn outcome_probs(&self) -> Vec<f64> {
        let block = self.dim_a * self.dim_r;
        (0..self.dim_x)
            .map(|x| {
                (0..block)
                    .map(|k| self.amplitudes[x * block + k].norm_sqr())
                    .sum()
            })
            .collect()
    }

    /// <0| rho^A |0> of the measured register; exactly 1 by construction.
    pub fn a_zero_overlap(&self) -> f64 {
        let block = self.dim_a * self.dim_r;
        (0..self.dim_x)
            .map(|x| {
                (0..self.dim_r)
                    .map(|r| self.amplitudes[x * block + r].norm_sqr())
                    .sum::<f64>()
            })
            .sum()
    }
}

/// Perform a rank-1 POVM coherently on the A side of a purified input
/// |psi> on A (x) R: borrow an X register in |0>, entangle, and apply the
/// controlled unitary that resets the post-measurement A states to |0>.
/// Rank-1-ness of every element is guaranteed by the measurement type.
pub fn coherent_measurement(
    lambda: &RankOnePovm,
    psi: &CVector,
    dim_a: usize,
    dim_r: usize,
) -> Result<CoherentMeasurement> {
    if psi.len() != dim_a * dim_r {
        return Err(Error::DimensionMismatch("purified input vs declared dims".into()));
    }
    if lambda.dim() != dim_a {
        return Err(Error::DimensionMismatch("measurement vs A dimension".into()));
    }
    if (psi.norm() - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidState("purified input must be normalized".into()));
    }
    let n_out = lambda.outcomes();
    let total = n_out * dim_a * dim_r;
    if total > 4096 {
        return Err(Error::GuardExceeded(format!(
            "coherent simulation dimension {total} exceeds 4096"
        )));
    }

    let mut amplitudes = CVector::zeros(total);
    for (x, m) in lambda.vectors().iter().enumerate() {
        // branch amplitude on R: (m_x^dag (x) 1) |psi>; the controlled
        // unitary V_x has already sent the post-measurement state to |0>
        for r in 0..dim_r {
            let mut chi = Complex64::new(0.0, 0.0);
            for a in 0..dim_a {
                chi += m[a].conj() * psi[a * dim_r + r];
            }
            amplitudes[x * (dim_a * dim_r) + r] = chi;
        }
    }
    Ok(CoherentMeasurement { amplitudes, dim_x: n_out, dim_a, dim_r })
}

// ---------------------------------------------------------------------------
// Bob's coherent decoder
// ---------------------------------------------------------------------------

/// The coherent version W_l of a bin's decoding POVM, in block form
/// sum_{m,m'} |m'><m|^M (x) Y_{m'm}^{B^n} with Y_{0m} = sqrt(Y^{(l)}_m);
/// measurement outcome m maps |m>^M to |0>^M. The remaining block rows are
/// completed deterministically (per-entry Householder columns for diagonal
/// decoders, Gram-Schmidt over the standard basis otherwise).
///
/// Dense materialization; guarded at mu * d_B^n <= 4096.
pub fn bob_decoder(code: &CoveringCode, cq: &ClassicalQuantumState, l: usize) -> Result<CMatrix> {
    if l >= code.lambda {
        return Err(Error::DimensionMismatch(format!("bin {l} out of range")));
    }
    let mu = code.mu;
    let db = cq.dim_b().pow(code.n as u32);
    let total = mu * db;
    if total > 4096 {
        return Err(Error::GuardExceeded(format!(
            "decoder dimension {total} exceeds 4096"
        )));
    }

    match &code.decoders[l] {
        BinDecoder::Diagonal { elements } => {
            // per B-basis entry b, complete the unit row (sqrt v_m(b))_m to a
            // mu x mu unitary; W is block diagonal over b
            let mut w = CMatrix::zeros(total, total);
            for b in 0..db {
                let row: Vec<f64> = (0..mu).map(|m| elements[m][b].max(0.0).sqrt()).collect();
                let block = complete_real_row_to_unitary(&row)?;
                for mp in 0..mu {
                    for m in 0..mu {
                        w[(mp * db + b, m * db + b)] = Complex64::new(block[(mp, m)], 0.0);
                    }
                }
            }
            Ok(w)
        }
        BinDecoder::Dense(povm) => {
            if povm.len() != mu {
                return Err(Error::CompletionFailure(format!(
                    "decoder has {} outcomes for a bin of {mu}",
                    povm.len()
                )));
            }
            let sqrts: Vec<CMatrix> =
                povm.elements().iter().map(qmat::sqrt_psd).collect::<Result<_>>()?;
            let mut rows: Vec<CVector> = Vec::with_capacity(total);
            for bp in 0..db {
                let mut row = CVector::zeros(total);
                for (m, sq) in sqrts.iter().enumerate() {
                    for b in 0..db {
                        row[m * db + b] = sq[(bp, b)];
                    }
                }
                rows.push(row);
            }
            complete_rows_to_unitary(&mut rows, total)?;
            let mut w = CMatrix::zeros(total, total);
            for (i, row) in rows.iter().enumerate() {
                for j in 0..total {
                    w[(i, j)] = row[j];
                }
            }
            Ok(w)
        }
    }
}

/// Complete a real unit row vector to a real orthogonal matrix with that
/// first row (Householder reflection mapping e_0 to the row).
fn complete_real_row_to_unitary(row: &[f64]) -> Result<nalgebra::DMatrix<f64>> {
    let n = row.len();
    let norm2: f64 = row.iter().map(|v| v * v).sum();
    if (norm2 - 1.0).abs() > 1e-8 {
        return Err(Error::CompletionFailure(format!(
            "decoder row norm^2 {norm2} differs from 1"
        )));
    }
    let mut h = nalgebra::DMatrix::<f64>::identity(n, n);
    // v = row - e0; H = I - 2 v v^T / |v|^2 swaps e0 and the row
    let mut v: Vec<f64> = row.to_vec();
    v[0] -= 1.0;
    let vnorm2: f64 = v.iter().map(|x| x * x).sum();
    if vnorm2 > 1e-24 {
        for i in 0..n {
            for j in 0..n {
                h[(i, j)] -= 2.0 * v[i] * v[j] / vnorm2;
            }
        }
    }
    Ok(h)
}

/// Deterministic completion of orthonormal rows to a unitary: the missing
/// rows are the descending-order eigenvectors of the complement projector
/// 1 - sum |row><row|, which stay orthonormal at machine precision even
/// when standard-basis candidates graze the existing span.
fn complete_rows_to_unitary(rows: &mut Vec<CVector>, total: usize) -> Result<()> {
    let have = rows.len();
    if have >= total {
        return Ok(());
    }
    let mut complement = qmat::identity(total);
    for row in rows.iter() {
        complement -= row * row.adjoint();
    }
    let (vals, vecs) = qmat::hermitian_eig(&complement);
    for k in 0..(total - have) {
        if vals[k] < 0.5 {
            return Err(Error::CompletionFailure(format!(
                "complement eigenvalue {:.3e}: rank defect beyond tolerance",
                vals[k]
            )));
        }
        rows.push(vecs.column(k).into_owned());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// The six-step run (classical path)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct DistillationParams {
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    /// Optional split dA = dA1 * dA2 (A-major); the measurement acts on A2
    /// and A1^n goes through local concentration. None = trivial A1.
    pub a1_dim: Option<usize>,
}

impl DistillationParams {
    pub fn new(n: usize, epsilon: f64, delta: f64, seed: u64) -> Self {
        Self { n, epsilon, delta, seed, a1_dim: None }
    }
}

/// Execute the six protocol steps on a classical-classical (diagonal)
/// bipartite state with a rank-1 measurement on (the A2 part of) A.
///
/// Everything runs on probability vectors: the coherent bookkeeping is
/// exact, per-step distances are exact where the representation allows and
/// certified bounds otherwise, and the ledger counts integer register
/// dimensions.
pub fn run_distillation(
    s: &BipartiteState,
    lambda: &RankOnePovm,
    params: &DistillationParams,
) -> Result<(Ledger, ProtocolTrace)> {
    let n = params.n;
    if n == 0 {
        return Err(Error::InvalidState("n >= 1 required".into()));
    }
    let joint = s.joint_distribution().ok_or_else(|| {
        Error::InvalidState(
            "distillation runs on classical-classical (diagonal) states; rotate locally first"
                .into(),
        )
    })?;
    let dim_a = s.dim_a();
    let dim_b = s.dim_b();
    let a1 = params.a1_dim.unwrap_or(1);
    if a1 == 0 || dim_a % a1 != 0 {
        return Err(Error::DimensionMismatch(format!("A1 dim {a1} does not divide {dim_a}")));
    }
    let a2 = dim_a / a1;
    if lambda.dim() != a2 {
        return Err(Error::DimensionMismatch(format!(
            "measurement dim {} vs A2 dim {a2}",
            lambda.dim()
        )));
    }

    let mut steps = Vec::new();

    // Step 1: concentration on A1^n (skipped when A1 is trivial)
    let mut code_a1: Option<ConcentrationCode> = None;
    if a1 > 1 {
        let p_a1: Vec<f64> = (0..a1)
            .map(|i| {
                let mut acc = 0.0;
                for a2i in 0..a2 {
                    for b in 0..dim_b {
                        acc += joint[i * a2 + a2i][b];
                    }
                }
                acc
            })
            .collect();
        let rho_a1 = DensityMatrix::from_diagonal(&renormalize(&p_a1))?;
        let code = build_concentration_code(&rho_a1, n, params.delta)?;
        steps.push(StepRecord {
            label: "concentrate A1^n".into(),
            registers: format!(
                "A1p (dim {}) |0>, A1g (dim {})",
                code.d_pure, code.d_garbage
            ),
            distance_to_ideal: code.pure_register_distance(),
            exact: true,
        });
        code_a1 = Some(code);
    }

    // Step 2: borrow the catalyst and measure coherently; A2^n lands in |0>
    let n_out = lambda.outcomes();
    let d_catalyst = (n_out as u128)
        .checked_pow(n as u32)
        .ok_or_else(|| Error::GuardExceeded("catalyst dimension overflows".into()))?;
    let weights: Vec<Vec<f64>> = lambda
        .vectors()
        .iter()
        .map(|m| (0..a2).map(|a| m[a].norm_sqr()).collect())
        .collect();
    // induced single-copy ensemble (p(x), rho_x^B)
    let mut q_xb = vec![vec![0.0f64; dim_b]; n_out];
    for (x, w) in weights.iter().enumerate() {
        for a1i in 0..a1 {
            for a2i in 0..a2 {
                for b in 0..dim_b {
                    q_xb[x][b] += joint[a1i * a2 + a2i][b] * w[a2i];
                }
            }
        }
    }
    let p_x: Vec<f64> = q_xb.iter().map(|row| row.iter().sum()).collect();
    // zero-probability outcomes never occur; drop them from the covering
    // alphabet (the physical X register keeps all n_out dims)
    let live: Vec<usize> = (0..n_out).filter(|&x| p_x[x] > crate::tol::OUTCOME_FLOOR).collect();
    let cq = ClassicalQuantumState::new(
        renormalize(&live.iter().map(|&x| p_x[x]).collect::<Vec<_>>()),
        live.iter()
            .map(|&x| DensityMatrix::from_diagonal(&renormalize(&q_xb[x])))
            .collect::<Result<Vec<_>>>()?,
    )?;
    steps.push(StepRecord {
        label: "coherent measurement with borrowed catalyst".into(),
        registers: format!("X^n (dim {d_catalyst}) carries outcomes, A2^n (dim {}) |0>", (a2 as u128).pow(n as u32)),
        distance_to_ideal: 0.0,
        exact: true,
    });

    // Step 3: covering code and compaction of X^n onto (X', M, L)
    let code = build_covering(&cq, n, params.epsilon, params.delta, params.seed)?;
    let mu_lambda = (code.mu * code.lambda) as u128;
    let d_ml = divisor_at_least_u128(d_catalyst, mu_lambda);
    let d_x_prime = d_catalyst / d_ml;
    let x_prime_distance = 2.0 * (1.0 - code.set_mass);
    steps.push(StepRecord {
        label: "compact X^n onto the covering set".into(),
        registers: format!(
            "X' (dim {d_x_prime}) |0>, M (dim {}), L (dim {})",
            code.mu, code.lambda
        ),
        distance_to_ideal: x_prime_distance,
        exact: true,
    });

    // theta' distribution p(m, l)
    let log2p = |idx: usize| -> f64 {
        sequence_symbols(idx, n, cq.len())
            .iter()
            .map(|&sym| cq.probs()[sym].log2())
            .sum()
    };
    let p_ml: Vec<Vec<f64>> = code
        .bins
        .iter()
        .map(|bin| bin.iter().map(|&i| log2p(i).exp2() / code.set_mass).collect())
        .collect();

    // Step 4: dephasing M, L through the channel: diagonal, exact fixed point
    steps.push(StepRecord {
        label: "dephase (M, L) through the channel".into(),
        registers: format!("M (dim {}), L (dim {})", code.mu, code.lambda),
        distance_to_ideal: 0.0,
        exact: true,
    });

    // Step 5: Bob decodes each bin coherently; M -> |0>
    let mut mean_success = 0.0;
    let mut all_exact = true;
    for (l, bin) in code.bins.iter().enumerate() {
        for (m, &i) in bin.iter().enumerate() {
            let state = sequence_state(&cq, i, n);
            let succ = code.decoders[l].success(m, &state);
            mean_success += p_ml[l][m] * code.set_mass * succ;
            if succ < 1.0 {
                all_exact = false;
            }
        }
    }
    mean_success /= code.set_mass;
    let m_distance = if all_exact { 0.0 } else { 2.0 * (1.0 - mean_success).max(0.0).sqrt() };
    steps.push(StepRecord {
        label: "coherent bin decoding".into(),
        registers: format!("M (dim {}) -> |0>; B^n marginal exactly preserved", code.mu),
        distance_to_ideal: m_distance,
        exact: all_exact,
    });

    // Step 6: concentration on B^n (its marginal is exactly iid here)
    let p_b: Vec<f64> = (0..dim_b)
        .map(|b| (0..dim_a).map(|a| joint[a][b]).sum())
        .collect();
    let rho_b = DensityMatrix::from_diagonal(&renormalize(&p_b))?;
    let code_b = build_concentration_code(&rho_b, n, params.delta)?;
    steps.push(StepRecord {
        label: "concentrate B^n".into(),
        registers: format!("Bp (dim {}) |0>, Bg (dim {})", code_b.d_pure, code_b.d_garbage),
        distance_to_ideal: code_b.pure_register_distance(),
        exact: true,
    });

    // Ledger: pure outputs are A2^n, X', A1p on Alice's side; M, Bp on Bob's
    let d_pure_a = (a2 as u128).pow(n as u32)
        * d_x_prime
        * code_a1.as_ref().map_or(1u128, |c| c.d_pure as u128);
    let d_pure_b = code.mu as u128 * code_b.d_pure as u128;
    let bits_sent = (mu_lambda as f64).log2() / n as f64;
    let ledger = Ledger::new(n, d_catalyst, d_pure_a, d_pure_b, bits_sent);

    let final_distance = code_a1.as_ref().map_or(0.0, |c| c.pure_register_distance())
        + x_prime_distance
        + m_distance
        + code_b.pure_register_distance();
    let final_exact = all_exact;

    let trace = ProtocolTrace {
        steps,
        covering: Some(CoveringTraceInfo {
            mu: code.mu,
            lambda: code.lambda,
            p_ml,
            set_mass: code.set_mass,
            log2_d_x_prime: (d_x_prime as f64).log2(),
            mean_m_success: mean_success,
            m_distance_bound: 2.0 * (1.0 - mean_success).max(0.0).sqrt(),
            m_distance_exact_zero: all_exact,
        }),
        mutual_info_per_copy: entropy::cq_mutual_info(&cq),
        final_distance,
        final_distance_exact: final_exact,
        epsilon_envelope: envelope(params.epsilon),
    };
    Ok((ledger, trace))
}

fn renormalize(p: &[f64]) -> Vec<f64> {
    let total: f64 = p.iter().sum();
    if total <= 0.0 {
        return p.to_vec();
    }
    p.iter().map(|v| (v / total).max(0.0)).collect()
}

fn divisor_at_least_u128(total: u128, floor: u128) -> u128 {
    let mut d = floor.max(1);
    while d <= total {
        if total % d == 0 {
            return d;
        }
        d += 1;
    }
    total
}

// ---------------------------------------------------------------------------
// Rate formula and converse
// ---------------------------------------------------------------------------

/// Single-letter level of the one-way purity:
/// log dA + log dB - H(A) - H(B) + D1(rho).
pub fn rate_formula(s: &BipartiteState, cfg: &OptimizerConfig) -> Result<f64> {
    Ok(kappa_one_way_level(s, 1, cfg)?.kappa_one_way)
}

/// Converse margin for a completed run: the upper bound
/// log dA + log dB - H(A) - H(B) + (1/n) I(X;B^n) + delta'
/// minus the achieved rate, with delta' = 1/(e n) + eps log2(dA dB) at the
/// run's achieved closeness. Non-negative for every emitted code; negative
/// for forged ledgers.
pub fn converse_margin(ledger: &Ledger, s: &BipartiteState, trace: &ProtocolTrace) -> f64 {
    let rep = entropy::report(s);
    let log_dims = (s.dim_a() as f64).log2() + (s.dim_b() as f64).log2();
    let delta_prime = 1.0 / (std::f64::consts::E * ledger.n as f64)
        + trace.final_distance * log_dims;
    let bound = log_dims - rep.h_a - rep.h_b + trace.mutual_info_per_copy + delta_prime;
    bound - ledger.rate
}

// ---------------------------------------------------------------------------
// Bootstrap
// ---------------------------------------------------------------------------

/// Catalyst amortization over sequential blocks: the same borrowed ancillas
/// serve every block (each run returns them), so the effective catalyst
/// rate falls as 1/blocks.
#[derive(Debug, Clone, Serialize)]
pub struct BootstrapLedger {
    pub blocks: usize,
    pub block: Ledger,
    /// Net pbits over all blocks, per copy.
    pub total_rate: f64,
    /// log2 d_C / (blocks * n): the amortized catalyst rate.
    pub catalyst_rate: f64,
}

pub fn run_bootstrap(
    s: &BipartiteState,
    lambda: &RankOnePovm,
    params: &DistillationParams,
    blocks: usize,
) -> Result<BootstrapLedger> {
    if blocks == 0 {
        return Err(Error::InvalidState("need at least one block".into()));
    }
    let (ledger, _) = run_distillation(s, lambda, params)?;
    if !ledger.catalyst_returned() {
        return Err(Error::InvalidState(
            "block run does not return its catalyst; bootstrap impossible".into(),
        ));
    }
    Ok(BootstrapLedger {
        blocks,
        catalyst_rate: ledger.catalyst_rate / blocks as f64,
        total_rate: ledger.rate,
        block: ledger,
    })
}
