//! Machine-readable run reports. A report is a fixed-order JSON object (or
//! CSV table) of named scalar results with optional bounds and tolerances,
//! plus a command-specific detail payload; reruns with identical inputs,
//! seeds and flags produce byte-identical output (timing excluded).

use serde::Serialize;
use sha2::{Digest, Sha256};

use purity::covering::{build_covering, verify_covering};
use purity::io::LoadedState;
use purity::povm_opt::{
    additivity_check, kappa_local, kappa_one_way_level, one_shot_deficit, OptimizerConfig,
    RankOnePovm,
};
use purity::protocol::{
    converse_margin, run_distillation, run_example1, DistillationParams,
};
use purity::qmat::{BipartiteState, ClassicalQuantumState, DensityMatrix, Subsystem};
use purity::typicality::{build_concentration_code, converse_check};
use purity::{entropy, inequalities, tol, Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl ResultRow {
    fn new(name: &str, value: f64) -> Self {
        Self { name: name.into(), value, bound: None, tolerance: None }
    }

    fn with_bound(mut self, bound: f64) -> Self {
        self.bound = Some(bound);
        self
    }

    fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = Some(tolerance);
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub input_digest: String,
    pub seed: u64,
    pub tolerance_policy: String,
    pub results: Vec<ResultRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u128>,
}

impl RunReport {
    fn new(command: &str, digest: String, seed: u64) -> Self {
        Self {
            command: command.into(),
            input_digest: digest,
            seed,
            tolerance_policy: tol::POLICY.into(),
            results: Vec::new(),
            detail: None,
            timing_ms: None,
        }
    }

    pub fn with_timing(mut self, ms: u128) -> Self {
        self.timing_ms = Some(ms);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# tolerances: {}\n", self.tolerance_policy);
        out.push_str("name,value,bound,tolerance\n");
        for row in &self.results {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.name,
                row.value,
                row.bound.map_or(String::new(), |b| b.to_string()),
                row.tolerance.map_or(String::new(), |t| t.to_string()),
            ));
        }
        out
    }
}

pub fn digest_bytes(data: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(data);
    format!("sha256:{:x}", hasher.finalize())
}

pub const NO_INPUT: &str = "none";

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

pub fn entropy_report(state: &LoadedState, digest: String) -> RunReport {
    let mut report = RunReport::new("entropy", digest, 0);
    match state {
        LoadedState::Mono(d) => {
            report.results.push(ResultRow::new("h", entropy::von_neumann(d)));
        }
        LoadedState::Bipartite(s) => {
            let r = entropy::report(s);
            report.results.push(ResultRow::new("hA", r.h_a));
            report.results.push(ResultRow::new("hB", r.h_b));
            report.results.push(ResultRow::new("hAB", r.h_ab));
            report.results.push(ResultRow::new("iAB", r.i_ab));
        }
    }
    report
}

pub fn kappa_report(state: &LoadedState, digest: String) -> RunReport {
    let mut report = RunReport::new("kappa", digest, 0);
    match state {
        LoadedState::Mono(d) => {
            report.results.push(ResultRow::new("kappa", kappa_local(d)));
        }
        LoadedState::Bipartite(s) => {
            report
                .results
                .push(ResultRow::new("kappaA", kappa_local(&s.marginal(Subsystem::A))));
            report
                .results
                .push(ResultRow::new("kappaB", kappa_local(&s.marginal(Subsystem::B))));
        }
    }
    report
}

/// Returns the report and whether the optimizer converged (exit code 4
/// signals non-convergence; the result is still emitted).
pub fn deficit_report(
    s: &BipartiteState,
    digest: String,
    cfg: &OptimizerConfig,
) -> Result<(RunReport, bool)> {
    let r = one_shot_deficit(s, cfg)?;
    let mut report = RunReport::new("deficit", digest, cfg.seed);
    report.results.push(
        ResultRow::new("value", r.value).with_bound(r.ceiling).with_tolerance(1e-4),
    );
    report.results.push(ResultRow::new("ceiling", r.ceiling));
    report.detail = Some(serde_json::json!({
        "restart_values": r.restart_values,
        "converged": r.converged,
        "outcomes": r.argmax.outcomes(),
    }));
    let converged = r.converged;
    Ok((report, converged))
}

pub fn kappa1way_report(
    s: &BipartiteState,
    digest: String,
    n: usize,
    cfg: &OptimizerConfig,
) -> Result<(RunReport, bool)> {
    let level = kappa_one_way_level(s, n, cfg)?;
    let mut report = RunReport::new("kappa1way", digest, cfg.seed);
    report
        .results
        .push(ResultRow::new("kappa1way", level.kappa_one_way).with_tolerance(1e-4));
    report.results.push(
        ResultRow::new("classicalDeficit", level.classical_deficit)
            .with_bound(level.deficit.ceiling / n as f64),
    );
    report
        .results
        .push(ResultRow::new("kappaA", kappa_local(&s.marginal(Subsystem::A))));
    report
        .results
        .push(ResultRow::new("kappaB", kappa_local(&s.marginal(Subsystem::B))));
    report.results.push(ResultRow::new("n", n as f64));
    let converged = level.deficit.converged;
    Ok((report, converged))
}

pub fn concentrate_report(
    state: &LoadedState,
    digest: String,
    n: usize,
    delta: f64,
) -> Result<RunReport> {
    let rho = state.density();
    let code = build_concentration_code(rho, n, delta)?;
    let slack = converse_check(&code, rho);
    let mut report = RunReport::new("concentrate", digest, 0);
    report
        .results
        .push(ResultRow::new("rate", code.rate).with_bound(kappa_local(rho)));
    report.results.push(ResultRow::new("epsilon", code.achieved_epsilon));
    report
        .results
        .push(ResultRow::new("pureRegisterDistance", code.pure_register_distance()));
    report.results.push(ResultRow::new("dPure", code.d_pure as f64));
    report.results.push(ResultRow::new("dGarbage", code.d_garbage as f64));
    report
        .results
        .push(ResultRow::new("converseSlack", slack).with_tolerance(tol::INEQUALITY_SLACK));
    report.detail = Some(serde_json::json!({
        "n": code.n,
        "delta": code.delta,
        "memberMass": code.member_mass,
    }));
    Ok(report)
}

/// Interpret a block-diagonal bipartite state as the ensemble it encodes.
pub fn ensemble_from_bipartite(s: &BipartiteState) -> Result<ClassicalQuantumState> {
    let (dx, db) = (s.dim_a(), s.dim_b());
    let m = s.matrix();
    // off-diagonal X blocks must vanish for a classical X register
    for x in 0..dx {
        for y in 0..dx {
            if x == y {
                continue;
            }
            for i in 0..db {
                for j in 0..db {
                    if m[(x * db + i, y * db + j)].norm() > 1e-10 {
                        return Err(Error::InvalidState(
                            "state is not classical on A (off-diagonal blocks)".into(),
                        ));
                    }
                }
            }
        }
    }
    let mut probs = Vec::new();
    let mut states = Vec::new();
    for x in 0..dx {
        let block = purity::qmat::CMatrix::from_fn(db, db, |i, j| m[(x * db + i, x * db + j)]);
        let p = block.trace().re;
        if p < tol::OUTCOME_FLOOR {
            continue;
        }
        probs.push(p);
        states.push(DensityMatrix::new(block.scale(1.0 / p))?);
    }
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    ClassicalQuantumState::new(probs, states)
}

pub fn cover_report(
    s: &BipartiteState,
    digest: String,
    n: usize,
    epsilon: f64,
    delta: f64,
    seed: u64,
) -> Result<RunReport> {
    let cq = ensemble_from_bipartite(s)?;
    let code = build_covering(&cq, n, epsilon, delta, seed)?;
    let verification = verify_covering(&code, &cq);
    let mut report = RunReport::new("cover", digest, seed);
    report.results.push(ResultRow::new("mu", code.mu as f64));
    report
        .results
        .push(ResultRow::new("lambda", code.lambda as f64).with_bound(verification.lambda_bound));
    report.results.push(
        ResultRow::new("minSuccess", code.min_success)
            .with_bound(1.0 - epsilon)
            .with_tolerance(1e-12),
    );
    report.results.push(
        ResultRow::new("setMass", code.set_mass).with_bound(1.0 - epsilon),
    );
    report.results.push(ResultRow::new("retries", code.retries as f64));
    report.detail = Some(serde_json::json!({
        "code": code.to_file(),
        "verification": verification,
    }));
    Ok(report)
}

pub fn distill_report(
    s: &BipartiteState,
    digest: String,
    params: &DistillationParams,
    povm: Option<RankOnePovm>,
) -> Result<RunReport> {
    let a2 = s.dim_a() / params.a1_dim.unwrap_or(1);
    let lambda = povm.unwrap_or_else(|| RankOnePovm::computational(a2));
    let (ledger, trace) = run_distillation(s, &lambda, params)?;
    let margin = converse_margin(&ledger, s, &trace);
    let mut report = RunReport::new("distill", digest, params.seed);
    report.results.push(ResultRow::new("rate", ledger.rate));
    report.results.push(ResultRow::new("catalystRate", ledger.catalyst_rate));
    report
        .results
        .push(ResultRow::new("classicalBitsSent", ledger.classical_bits_sent));
    report.results.push(ResultRow::new("finalDistance", trace.final_distance));
    report.results.push(
        ResultRow::new("converseMargin", margin).with_tolerance(tol::INEQUALITY_SLACK),
    );
    report.results.push(ResultRow::new(
        "catalystReturned",
        if ledger.catalyst_returned() { 1.0 } else { 0.0 },
    ));
    report.detail = Some(serde_json::json!({
        "ledger": ledger,
        "trace": trace,
    }));
    Ok(report)
}

pub fn example1_report() -> RunReport {
    let (ledger, trace) = run_example1();
    let mut report = RunReport::new("example1", NO_INPUT.into(), 0);
    report.results.push(ResultRow::new("rate", ledger.rate));
    report.results.push(ResultRow::new("finalDistance", trace.final_distance));
    report.results.push(ResultRow::new("classicalBitsSent", ledger.classical_bits_sent));
    report.detail = Some(serde_json::json!({
        "ledger": ledger,
        "trace": trace,
    }));
    report
}

pub fn additivity_report(
    s: &BipartiteState,
    digest: String,
    cfg: &OptimizerConfig,
) -> Result<RunReport> {
    let chk = additivity_check(s, cfg)?;
    let mut report = RunReport::new("additivity", digest, cfg.seed);
    report.results.push(ResultRow::new("lhs", chk.lhs).with_tolerance(5e-3));
    report.results.push(ResultRow::new("rhs", chk.rhs).with_tolerance(5e-3));
    report
        .results
        .push(ResultRow::new("difference", (chk.lhs - chk.rhs).abs()).with_tolerance(5e-3));
    report
        .results
        .push(ResultRow::new("sigmaAlone", chk.sigma_alone).with_tolerance(1e-6));
    Ok(report)
}

pub fn ineq_suite_report(seed: u64, instances: usize) -> RunReport {
    let outcomes = inequalities::run_suite(instances, seed);
    let mut report = RunReport::new("ineq-suite", NO_INPUT.into(), seed);
    for o in &outcomes {
        report.results.push(
            ResultRow::new(&format!("{}_violations", o.family), o.violations as f64)
                .with_tolerance(0.0),
        );
        report.results.push(
            ResultRow::new(&format!("{}_worst_excess", o.family), o.worst_excess)
                .with_bound(tol::INEQUALITY_SLACK),
        );
    }
    report.detail = Some(serde_json::json!({ "instances": instances }));
    report
}
