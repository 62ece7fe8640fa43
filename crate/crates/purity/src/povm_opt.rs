//! Rank-1 POVM optimization: the one-shot deficit D1 (max over rank-1 POVMs
//! on A of I(X;B)), the local purity kappa, finite-copy one-way purity
//! levels, and the additivity check against a maximally mixed spectator.
//!
//! Parametrization: the N POVM vectors are the (conjugated) rows of an N x d
//! matrix M constrained to M^dag M = 1. That constraint is exactly POVM
//! completeness, and every element is rank 1 by construction. The ascent
//! works on an unconstrained ambient matrix retracted onto the isometry set
//! by its polar factor, with central-difference gradients and a backtracking
//! line search. Reported deficits are lower bounds on the true maximum; the
//! analytic ceiling min(H(A), H(B), I(A;B)) is reported alongside.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::entropy;
use crate::exec;
use crate::qmat::{
    self, contract_a, deviation_from_identity, polar_factor, BipartiteState, CMatrix, CVector,
    DensityMatrix, Povm,
};
use crate::tol;
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// RankOnePovm
// ---------------------------------------------------------------------------

/// A POVM whose elements are L_x = m_x m_x^dag for unnormalized vectors m_x
/// with sum_x m_x m_x^dag = 1.
#[derive(Debug, Clone)]
pub struct RankOnePovm {
    dim: usize,
    vectors: Vec<CVector>,
}

impl RankOnePovm {
    pub fn new(vectors: Vec<CVector>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::InvalidOperator("rank-1 POVM with no outcomes".into()));
        }
        let dim = vectors[0].len();
        if vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch("POVM vectors differ in dimension".into()));
        }
        if vectors.len() > dim * dim {
            return Err(Error::InvalidOperator(format!(
                "{} outcomes exceed the d^2 = {} extremal cap",
                vectors.len(),
                dim * dim
            )));
        }
        let mut sum = CMatrix::zeros(dim, dim);
        for v in &vectors {
            sum += v * v.adjoint();
        }
        let dev = deviation_from_identity(&sum);
        if dev > tol::POVM_COMPLETE {
            return Err(Error::InvalidOperator(format!(
                "rank-1 completeness deviation {dev:.3e}"
            )));
        }
        Ok(Self { dim, vectors })
    }

    /// Computational-basis measurement.
    pub fn computational(dim: usize) -> Self {
        let vectors = (0..dim).map(|k| qmat::basis_vector(dim, k)).collect();
        Self { dim, vectors }
    }

    /// Projective measurement onto the columns of a unitary.
    pub fn projective(basis: &CMatrix) -> Result<Self> {
        if qmat::unitary_deviation(basis) > tol::UNITARY {
            return Err(Error::InvalidOperator("projective basis is not unitary".into()));
        }
        let dim = basis.nrows();
        let vectors = (0..dim).map(|k| basis.column(k).into_owned()).collect();
        Ok(Self { dim, vectors })
    }

    /// Reconstruct from an isometry M (rows are the conjugated vectors).
    pub fn from_isometry(m: &CMatrix) -> Result<Self> {
        let dev = deviation_from_identity(&(m.adjoint() * m));
        if dev > tol::POVM_COMPLETE {
            return Err(Error::InvalidOperator(format!(
                "isometry deviation {dev:.3e}"
            )));
        }
        let dim = m.ncols();
        let vectors = (0..m.nrows())
            .map(|x| CVector::from_fn(dim, |j, _| m[(x, j)].conj()))
            .collect();
        Ok(Self { dim, vectors })
    }

    /// The isometry whose rows are the conjugated vectors.
    pub fn to_isometry(&self) -> CMatrix {
        CMatrix::from_fn(self.vectors.len(), self.dim, |x, j| self.vectors[x][j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    pub fn elements(&self) -> Vec<CMatrix> {
        self.vectors.iter().map(|v| v * v.adjoint()).collect()
    }

    pub fn to_povm(&self) -> Result<Povm> {
        Povm::new(self.elements())
    }

    /// Product measurement on a composite system (A-major outcome order).
    pub fn tensor_with(&self, other: &RankOnePovm) -> Self {
        let dim = self.dim * other.dim;
        let mut vectors = Vec::with_capacity(self.outcomes() * other.outcomes());
        for v in &self.vectors {
            for w in &other.vectors {
                vectors.push(CVector::from_fn(dim, |k, _| v[k / other.dim] * w[k % other.dim]));
            }
        }
        Self { dim, vectors }
    }

    pub fn tensor_power(&self, n: usize) -> Self {
        let mut out = self.clone();
        for _ in 1..n {
            out = out.tensor_with(self);
        }
        out
    }

    /// Drop outcomes whose weight Tr(L_x rho) falls below `floor`.
    pub fn pruned(&self, rho_a: &DensityMatrix, floor: f64) -> Self {
        let kept: Vec<CVector> = self
            .vectors
            .iter()
            .filter(|v| (v.adjoint() * rho_a.matrix() * *v)[(0, 0)].re >= floor)
            .cloned()
            .collect();
        if kept.is_empty() {
            return self.clone();
        }
        Self { dim: self.dim, vectors: kept }
    }
}

// ---------------------------------------------------------------------------
// Objective
// ---------------------------------------------------------------------------

/// I(X;B) of the ensemble obtained by measuring the A side. This is the
/// quantity the deficit optimizer climbs.
///
/// H(B) is taken from the state's own marginal (the average post-measurement
/// state equals it for any complete POVM) and per-outcome contributions are
/// summed in sorted order, so relabeling outcomes gives bit-identical values.
pub fn objective(p: &RankOnePovm, s: &BipartiteState) -> Result<f64> {
    if p.dim() != s.dim_a() {
        return Err(Error::DimensionMismatch(format!(
            "POVM dim {} vs A dim {}",
            p.dim(),
            s.dim_a()
        )));
    }
    Ok(ObjectiveCtx::new(s).eval(&p.to_isometry()))
}

/// Precomputed state context for the optimizer's inner loop.
struct ObjectiveCtx<'a> {
    rho: &'a CMatrix,
    dim_a: usize,
    dim_b: usize,
    h_b: f64,
}

impl<'a> ObjectiveCtx<'a> {
    fn new(s: &'a BipartiteState) -> Self {
        let h_b = entropy::von_neumann(&s.marginal(qmat::Subsystem::B));
        Self { rho: s.matrix(), dim_a: s.dim_a(), dim_b: s.dim_b(), h_b }
    }

    /// Objective on an isometry. Per-outcome contributions are summed in
    /// sorted order, making the value independent of outcome labeling.
    fn eval(&self, m: &CMatrix) -> f64 {
        let n = m.nrows();
        let d = self.dim_a;
        let db = self.dim_b;
        let mut contributions = Vec::with_capacity(n);
        let mut v = CVector::zeros(d);
        for x in 0..n {
            for j in 0..d {
                v[j] = m[(x, j)].conj();
            }
            let lam = &v * v.adjoint();
            let tau = contract_a(&lam, self.rho, d, db);
            let p = tau.trace().re;
            if p < 1e-15 {
                continue;
            }
            // p * H(tau/p) = -sum_i l_i log l_i + p log p over tau's spectrum
            let mut ent = p * p.log2();
            for l in eig_values(&tau) {
                if l > 0.0 {
                    ent -= l * l.log2();
                }
            }
            contributions.push(ent);
        }
        contributions.sort_unstable_by(f64::total_cmp);
        let conditional: f64 = contributions.iter().sum();
        self.h_b - conditional
    }
}

/// Eigenvalues of a small Hermitian matrix; 2x2 handled in closed form.
fn eig_values(m: &CMatrix) -> Vec<f64> {
    let d = m.nrows();
    if d == 1 {
        return vec![m[(0, 0)].re];
    }
    if d == 2 {
        let a = m[(0, 0)].re;
        let c = m[(1, 1)].re;
        let b2 = m[(0, 1)].norm_sqr();
        let half = 0.5 * (a + c);
        let disc = (0.25 * (a - c) * (a - c) + b2).sqrt();
        return vec![half + disc, half - disc];
    }
    let se = SymmetricEigen::new(m.clone());
    se.eigenvalues.iter().copied().collect()
}

// ---------------------------------------------------------------------------
// Multi-start ascent
// ---------------------------------------------------------------------------

/// Knobs for the deficit optimizer. Defaults: d^2 outcomes, 32 restarts,
/// 250 iterations, gradient tolerance 1e-6.
#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    /// Outcome count N (None = d^2, the extremal cap).
    pub outcomes: Option<usize>,
    pub restarts: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { outcomes: None, restarts: 32, max_iters: 250, grad_tol: 1e-6, seed: 0 }
    }
}

impl OptimizerConfig {
    pub fn seeded(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts.max(1);
        self
    }

    pub fn with_outcomes(mut self, outcomes: usize) -> Self {
        self.outcomes = Some(outcomes);
        self
    }

    pub fn with_max_iters(mut self, iters: usize) -> Self {
        self.max_iters = iters;
        self
    }
}

/// Outcome of a deficit optimization.
#[derive(Debug, Clone)]
pub struct DeficitResult {
    /// Best objective found: a lower bound on the true maximum.
    pub value: f64,
    /// The maximizing measurement (pruned of negligible outcomes).
    pub argmax: RankOnePovm,
    /// Analytic ceiling min(H(A), H(B), I(A;B)).
    pub ceiling: f64,
    /// Best value per restart, in restart order (warm starts first).
    pub restart_values: Vec<f64>,
    /// False when the winning restart stopped on the iteration cap while
    /// still improving ("maxIters"); the value is then best-so-far.
    pub converged: bool,
}

const FD_STEP: f64 = 1e-5;
const ARMIJO: f64 = 1e-4;

struct AscentOutcome {
    value: f64,
    isometry: CMatrix,
    converged: bool,
}

fn ascend(ctx: &ObjectiveCtx, z0: CMatrix, cfg: &OptimizerConfig) -> AscentOutcome {
    let n = z0.nrows();
    let d = z0.ncols();
    let mut z = polar_factor(&z0);
    let mut f = ctx.eval(&z);
    let mut step = 0.25;
    let mut converged = false;

    for _ in 0..cfg.max_iters {
        // central differences on the 2nd real coordinates of the ambient matrix
        let mut grad = CMatrix::zeros(n, d);
        let mut gnorm2 = 0.0;
        for i in 0..n {
            for j in 0..d {
                let base = z[(i, j)];
                let probe = |dz: Complex64| {
                    let mut zp = z.clone();
                    zp[(i, j)] = base + dz;
                    ctx.eval(&polar_factor(&zp))
                };
                let g_re = (probe(Complex64::new(FD_STEP, 0.0))
                    - probe(Complex64::new(-FD_STEP, 0.0)))
                    / (2.0 * FD_STEP);
                let g_im = (probe(Complex64::new(0.0, FD_STEP))
                    - probe(Complex64::new(0.0, -FD_STEP)))
                    / (2.0 * FD_STEP);
                grad[(i, j)] = Complex64::new(g_re, g_im);
                gnorm2 += g_re * g_re + g_im * g_im;
            }
        }
        if gnorm2.sqrt() < cfg.grad_tol {
            converged = true;
            break;
        }

        let mut t = step;
        let mut accepted = false;
        for _ in 0..40 {
            let z_try = polar_factor(&(&z + grad.scale(t)));
            let f_try = ctx.eval(&z_try);
            if f_try >= f + ARMIJO * t * gnorm2 {
                z = z_try;
                f = f_try;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // no ascent along the gradient at line-search resolution:
            // stationary to FD accuracy
            converged = true;
            break;
        }
        step = (2.0 * t).clamp(1e-3, 1.0);
    }

    AscentOutcome { value: f, isometry: z, converged }
}

/// Embed a warm-start measurement into an N-row ambient matrix
/// (zero-padding unused rows keeps the isometry property).
fn embed_start(povm: &RankOnePovm, n: usize) -> CMatrix {
    let m = povm.to_isometry();
    let rows = m.nrows().max(n);
    let mut z = CMatrix::zeros(rows, m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            z[(i, j)] = m[(i, j)];
        }
    }
    z
}

fn default_warm_starts(s: &BipartiteState) -> Vec<RankOnePovm> {
    let mut starts = vec![RankOnePovm::computational(s.dim_a())];
    // eigenbasis of the A marginal: optimal for pure joint states (Schmidt
    // basis) and a strong generic candidate
    let (_, vecs) = s.marginal(qmat::Subsystem::A).eig();
    if let Ok(p) = RankOnePovm::projective(&vecs) {
        starts.push(p);
    }
    starts
}

/// Maximize I(X;B) over rank-1 POVMs on A by multi-start retracted gradient
/// ascent. Deterministic for a fixed (input, config) pair; restarts run in
/// parallel under the `parallel` feature with an order-independent merge
/// (max value, ties to the lowest restart index).
pub fn one_shot_deficit(s: &BipartiteState, cfg: &OptimizerConfig) -> Result<DeficitResult> {
    one_shot_deficit_with_candidates(s, cfg, &[])
}

/// Same as [`one_shot_deficit`] with extra caller-supplied warm starts. The
/// result never falls below the objective of any supplied candidate.
pub fn one_shot_deficit_with_candidates(
    s: &BipartiteState,
    cfg: &OptimizerConfig,
    candidates: &[RankOnePovm],
) -> Result<DeficitResult> {
    let d = s.dim_a();
    let n_out = cfg.outcomes.unwrap_or(d * d).max(d);
    let mut warm = default_warm_starts(s);
    for c in candidates {
        if c.dim() != d {
            return Err(Error::DimensionMismatch("candidate POVM dimension".into()));
        }
        warm.push(c.clone());
    }

    let ctx = ObjectiveCtx::new(s);
    let total = warm.len() + cfg.restarts;
    let outcomes: Vec<AscentOutcome> = exec::map_indexed(total, |idx| {
        let z0 = if idx < warm.len() {
            embed_start(&warm[idx], n_out)
        } else {
            let salt = (idx - warm.len()) as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(
                cfg.seed.wrapping_add(salt.wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            );
            crate::random::ginibre(&mut rng, n_out, d)
        };
        ascend(&ctx, z0, cfg)
    });

    let restart_values: Vec<f64> = outcomes.iter().map(|o| o.value).collect();
    let mut best_idx = 0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.value > outcomes[best_idx].value {
            best_idx = i;
        }
    }
    let best = &outcomes[best_idx];
    let argmax =
        RankOnePovm::from_isometry(&best.isometry)?.pruned(&s.marginal(qmat::Subsystem::A), 1e-12);

    let rep = entropy::report(s);
    let ceiling = rep.h_a.min(rep.h_b).min(rep.i_ab);
    Ok(DeficitResult {
        value: best.value,
        argmax,
        ceiling,
        restart_values,
        converged: best.converged,
    })
}

// ---------------------------------------------------------------------------
// Qubit grid oracle
// ---------------------------------------------------------------------------

/// Lower-bound oracle for states with a qubit A side: best objective over a
/// (theta, phi) Bloch grid of projective measurements plus seeded random
/// 3- and 4-outcome rank-1 POVMs. Whether projective measurements suffice is
/// not guaranteed, hence the random admixture; the value is a lower bound
/// on the one-shot deficit.
pub fn oracle_grid_qubit(s: &BipartiteState, resolution: usize, seed: u64) -> Result<f64> {
    if s.dim_a() != 2 {
        return Err(Error::DimensionMismatch("grid oracle requires dim_a = 2".into()));
    }
    let ctx = ObjectiveCtx::new(s);
    let res = resolution.max(2);

    let grid_best = exec::map_indexed(res, |i| {
        // poles included: i = 0 is the computational basis itself
        let theta = std::f64::consts::PI * i as f64 / (res - 1) as f64;
        let mut local: f64 = 0.0;
        for j in 0..res {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / res as f64;
            let c = (theta / 2.0).cos();
            let sp = Complex64::from_polar((theta / 2.0).sin(), phi);
            // projective pair {v, v_perp}: the isometry rows are conjugated
            // vectors (cos, e^{i phi} sin) and (-e^{-i phi} sin, cos)
            let m = CMatrix::from_row_slice(
                2,
                2,
                &[Complex64::new(c, 0.0), sp.conj(), -sp, Complex64::new(c, 0.0)],
            );
            local = local.max(ctx.eval(&m));
        }
        local
    })
    .into_iter()
    .fold(0.0, f64::max);

    let mut best = grid_best;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for outcomes in [3usize, 4] {
        for _ in 0..64 {
            let m = crate::random::rank_one_isometry(&mut rng, outcomes, 2);
            best = best.max(ctx.eval(&m));
        }
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Purity measures
// ---------------------------------------------------------------------------

/// Local purity kappa(rho) = log2 d - H(rho): qubits concentrable by local
/// unitaries alone.
pub fn kappa_local(rho: &DensityMatrix) -> f64 {
    ((rho.dim() as f64).log2() - entropy::von_neumann(rho)).max(0.0)
}

/// A finite-copy purity level.
#[derive(Debug, Clone)]
pub struct LevelResult {
    pub n: usize,
    /// log dA + log dB - H(A) - H(B) + classical_deficit.
    pub kappa_one_way: f64,
    /// (1/n) D1(rho^(x n)): the classical deficit at this level. Equal to
    /// kappa_one_way - kappa(rho^A) - kappa(rho^B) by construction.
    pub classical_deficit: f64,
    /// The n-copy optimization behind the level.
    pub deficit: DeficitResult,
}

/// Finite-n level of the one-way local purity:
/// log dA + log dB - H(A) - H(B) + (1/n) D1(rho^(x n)).
///
/// Guard: (dA dB)^n <= 4096. For n > 1 the single-copy argmax is tensored
/// into the warm starts, which keeps the levels monotone in n up to
/// optimizer noise.
pub fn kappa_one_way_level(
    s: &BipartiteState,
    n: usize,
    cfg: &OptimizerConfig,
) -> Result<LevelResult> {
    if n == 0 {
        return Err(Error::InvalidState("level requires n >= 1".into()));
    }
    let mut candidates = Vec::new();
    if n > 1 {
        let base = one_shot_deficit(s, cfg)?;
        candidates.push(base.argmax.tensor_power(n));
    }
    let power = s.tensor_power(n)?;
    let deficit = one_shot_deficit_with_candidates(&power, cfg, &candidates)?;
    let per_copy = deficit.value / n as f64;

    let rep = entropy::report(s);
    let log_dims = (s.dim_a() as f64).log2() + (s.dim_b() as f64).log2();
    Ok(LevelResult {
        n,
        kappa_one_way: log_dims - rep.h_a - rep.h_b + per_copy,
        classical_deficit: per_copy,
        deficit,
    })
}

/// Classical deficit at level n: (1/n) D1(rho^(x n)). Shares the
/// computation with [`kappa_one_way_level`], so the identity
/// kappa_one_way - kappa(rho^A) - kappa(rho^B) = classical_deficit holds
/// exactly.
pub fn classical_deficit(
    s: &BipartiteState,
    n: usize,
    cfg: &OptimizerConfig,
) -> Result<LevelResult> {
    kappa_one_way_level(s, n, cfg)
}

/// Result of the additivity check against a maximally mixed spectator.
#[derive(Debug, Clone)]
pub struct AdditivityCheck {
    /// D1(rho (x) sigma).
    pub lhs: f64,
    /// D1(rho).
    pub rhs: f64,
    /// D1(sigma) on its own; vanishes.
    pub sigma_alone: f64,
}

/// Check D1(rho (x) sigma) = D1(rho) for the maximally mixed spectator
/// sigma = 1/(dA dB); agreement is up to optimizer noise.
pub fn additivity_check(s: &BipartiteState, cfg: &OptimizerConfig) -> Result<AdditivityCheck> {
    let sigma = BipartiteState::product(
        &DensityMatrix::maximally_mixed(s.dim_a()),
        &DensityMatrix::maximally_mixed(s.dim_b()),
    );
    let rhs_result = one_shot_deficit(s, cfg)?;
    let combined = s.tensor_with(&sigma)?;
    // warm start: optimal measurement on rho, computational on the spectator
    let candidate = rhs_result
        .argmax
        .tensor_with(&RankOnePovm::computational(sigma.dim_a()));
    let lhs_result = one_shot_deficit_with_candidates(&combined, cfg, &[candidate])?;
    let sigma_result = one_shot_deficit(&sigma, cfg)?;
    Ok(AdditivityCheck {
        lhs: lhs_result.value,
        rhs: rhs_result.value,
        sigma_alone: sigma_result.value,
    })
}
