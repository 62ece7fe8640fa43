//! Central tolerance constants. Every validation threshold used by the crate
//! lives here so that reports can echo the policy they were produced under.

/// Hermiticity deviation allowed on *validated* objects.
pub const HERMITIAN: f64 = 1e-10;

/// Hermiticity deviation tolerated on *ingestion*: inputs within this bound
/// are symmetrized ((M + M^dag)/2), anything worse is rejected.
pub const INGEST_SYMMETRIZE: f64 = 1e-8;

/// Trace-one deviation allowed on density matrices.
pub const TRACE_ONE: f64 = 1e-10;

/// Most-negative eigenvalue tolerated on states and POVM elements.
/// Eigenvalues in [-NEGATIVE_EIG, 0) are clamped to 0 before logs and roots.
pub const NEGATIVE_EIG: f64 = 1e-10;

/// Entrywise deviation allowed on POVM completeness sums (sum = identity).
pub const POVM_COMPLETE: f64 = 1e-9;

/// Deviation allowed on unitarity checks (U^dag U = identity).
pub const UNITARY: f64 = 1e-10;

/// Outcomes with probability below this are dropped (and the remainder
/// renormalized) when a POVM is applied to a state.
pub const OUTCOME_FLOOR: f64 = 1e-14;

/// Slack granted to exact inequalities checked in floating point
/// (triangle, fidelity bound, gentle operator, Fannes, subadditivity).
pub const INEQUALITY_SLACK: f64 = 1e-9;

/// One-line summary of the policy, echoed into machine-readable reports.
pub const POLICY: &str = "hermitian 1e-10 (symmetrize below 1e-8), trace 1e-10, \
eig clamp 1e-10, povm sum 1e-9, unitary 1e-10, outcome floor 1e-14, \
inequality slack 1e-9";
