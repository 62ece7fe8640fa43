//! Dense complex-matrix substrate: states, subsystems, channels, POVMs and
//! trace-distance machinery.
//!
//! Index convention, fixed repo-wide: subsystem A is the slow (major) index,
//! so a bipartite basis state |a>|b> sits at flat index `a * dim_b + b`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::tol;
use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

// ---------------------------------------------------------------------------
// Low-level helpers
// ---------------------------------------------------------------------------

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Computational basis vector |k> on a `dim`-dimensional space.
pub fn basis_vector(dim: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[k] = Complex64::new(1.0, 0.0);
    v
}

/// Largest entrywise deviation from Hermiticity, max |M - M^dag|.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let diff = m - m.adjoint();
    diff.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// (M + M^dag) / 2.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Entrywise max |M - 1|.
pub fn deviation_from_identity(m: &CMatrix) -> f64 {
    let d = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let target = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            dev = dev.max((m[(i, j)] - target).norm());
        }
    }
    dev
}

pub fn unitary_deviation(m: &CMatrix) -> f64 {
    deviation_from_identity(&(m.adjoint() * m))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending and
/// eigenvector columns permuted to match.
pub fn hermitian_eig(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let se = nalgebra::SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| se.eigenvalues[j].partial_cmp(&se.eigenvalues[i]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let d = m.nrows();
    let vecs = CMatrix::from_fn(d, d, |r, c| se.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Eigenvalues of a Hermitian matrix, descending, with values in
/// [-NEGATIVE_EIG, 0) clamped to zero.
pub fn hermitian_eigenvalues_clamped(m: &CMatrix) -> Vec<f64> {
    let (vals, _) = hermitian_eig(m);
    vals.into_iter()
        .map(|v| if v < 0.0 && v >= -tol::NEGATIVE_EIG { 0.0 } else { v })
        .collect()
}

/// Square root of a PSD Hermitian matrix via eigendecomposition with a
/// clamped spectrum.
pub fn sqrt_psd(m: &CMatrix) -> Result<CMatrix> {
    if hermitian_deviation(m) > tol::INGEST_SYMMETRIZE {
        return Err(Error::InvalidOperator("sqrt of non-Hermitian matrix".into()));
    }
    let (vals, vecs) = hermitian_eig(&hermitian_part(m));
    let d = m.nrows();
    let mut out = CMatrix::zeros(d, d);
    for (k, &v) in vals.iter().enumerate() {
        if v < -tol::NEGATIVE_EIG {
            return Err(Error::InvalidOperator(format!(
                "sqrt of matrix with negative eigenvalue {v:.3e}"
            )));
        }
        let r = v.max(0.0).sqrt();
        if r > 0.0 {
            let col = vecs.column(k);
            out += (col * col.adjoint()).scale(r);
        }
    }
    Ok(out)
}

/// Polar factor U V^dag of a tall matrix: the closest isometry in Frobenius
/// norm, used as the retraction onto the isometry manifold.
pub fn polar_factor(m: &CMatrix) -> CMatrix {
    let svd = nalgebra::SVD::new(m.clone(), true, true);
    let u = svd.u.expect("svd with u");
    let v_t = svd.v_t.expect("svd with v_t");
    u * v_t
}

/// Trace norm ||M||_1: sum of |eigenvalues| on the Hermitian branch,
/// Tr sqrt(M^dag M) (sum of singular values) otherwise.
pub fn trace_norm(m: &CMatrix) -> f64 {
    if hermitian_deviation(m) <= tol::INGEST_SYMMETRIZE {
        let (vals, _) = hermitian_eig(&hermitian_part(m));
        vals.iter().map(|v| v.abs()).sum()
    } else {
        let svd = nalgebra::SVD::new(m.clone(), false, false);
        svd.singular_values.iter().sum()
    }
}

/// Tr_A[(op_a (x) 1_B) rho] for rho on A(x)B, A-major.
pub fn contract_a(op_a: &CMatrix, rho: &CMatrix, dim_a: usize, dim_b: usize) -> CMatrix {
    let mut tau = CMatrix::zeros(dim_b, dim_b);
    for b in 0..dim_b {
        for b2 in 0..dim_b {
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..dim_a {
                for a2 in 0..dim_a {
                    acc += op_a[(a, a2)] * rho[(a2 * dim_b + b, a * dim_b + b2)];
                }
            }
            tau[(b, b2)] = acc;
        }
    }
    tau
}

/// Partial trace over an arbitrary subset of subsystems.
///
/// `dims` lists all subsystem dimensions in index-major order; `keep` lists
/// the (ascending) positions to retain.
pub fn partial_trace_multi(m: &CMatrix, dims: &[usize], keep: &[usize]) -> CMatrix {
    let total: usize = dims.iter().product();
    assert_eq!(m.nrows(), total, "matrix does not match dims");
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let dk: usize = kept_dims.iter().product();
    let dt: usize = traced_dims.iter().product::<usize>().max(1);

    let unflatten = |mut idx: usize, ds: &[usize]| -> Vec<usize> {
        let mut out = vec![0; ds.len()];
        for i in (0..ds.len()).rev() {
            out[i] = idx % ds[i];
            idx /= ds[i];
        }
        out
    };
    let flatten = |kept: &[usize], tr: &[usize]| -> usize {
        let mut idx = 0;
        let mut ki = 0;
        let mut ti = 0;
        for (pos, &d) in dims.iter().enumerate() {
            let component = if keep.contains(&pos) {
                let c = kept[ki];
                ki += 1;
                c
            } else {
                let c = tr[ti];
                ti += 1;
                c
            };
            idx = idx * d + component;
        }
        idx
    };

    let mut out = CMatrix::zeros(dk, dk);
    for i in 0..dk {
        let mi = unflatten(i, &kept_dims);
        for j in 0..dk {
            let mj = unflatten(j, &kept_dims);
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..dt {
                let mt = unflatten(t, &traced_dims);
                acc += m[(flatten(&mi, &mt), flatten(&mj, &mt))];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// DensityMatrix
// ---------------------------------------------------------------------------

/// Positive unit-trace Hermitian matrix.
///
/// Construction symmetrizes inputs whose Hermiticity deviation is below
/// [`tol::INGEST_SYMMETRIZE`] (file-I/O noise) and rejects anything worse;
/// trace and positivity are then enforced at the tighter invariant
/// tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    mat: CMatrix,
}

impl DensityMatrix {
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(Error::InvalidState(format!(
                "state must be square and non-empty, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let dev = hermitian_deviation(&mat);
        if dev > tol::INGEST_SYMMETRIZE {
            return Err(Error::InvalidState(format!(
                "Hermiticity deviation {dev:.3e} exceeds {:.0e}",
                tol::INGEST_SYMMETRIZE
            )));
        }
        let mat = hermitian_part(&mat);
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > tol::TRACE_ONE || tr.im.abs() > tol::TRACE_ONE {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let (vals, _) = hermitian_eig(&mat);
        if let Some(min) = vals.last() {
            if *min < -tol::NEGATIVE_EIG {
                return Err(Error::InvalidState(format!(
                    "negative eigenvalue {min:.3e}"
                )));
            }
        }
        Ok(Self { dim: mat.nrows(), mat })
    }

    /// Skip validation. For matrices produced internally by operations that
    /// preserve the invariants exactly (up to symmetrization noise).
    pub(crate) fn new_unchecked(mat: CMatrix) -> Self {
        let mat = hermitian_part(&mat);
        Self { dim: mat.nrows(), mat }
    }

    pub fn from_diagonal(probs: &[f64]) -> Result<Self> {
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > tol::TRACE_ONE {
            return Err(Error::InvalidState(format!("diagonal sums to {sum}, not 1")));
        }
        if probs.iter().any(|&p| p < -tol::NEGATIVE_EIG) {
            return Err(Error::InvalidState("negative diagonal entry".into()));
        }
        let d = probs.len();
        let mat = CMatrix::from_fn(d, d, |i, j| {
            if i == j { Complex64::new(probs[i].max(0.0), 0.0) } else { Complex64::new(0.0, 0.0) }
        });
        Ok(Self { dim: d, mat })
    }

    /// |psi><psi| from an amplitude vector, which must be normalized to 1e-8.
    pub fn pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidState(format!("amplitude norm {norm} differs from 1")));
        }
        let v = psi.scale(1.0 / norm);
        Ok(Self { dim: v.len(), mat: &v * v.adjoint() })
    }

    pub fn basis_state(dim: usize, k: usize) -> Self {
        let v = basis_vector(dim, k);
        Self { dim, mat: &v * v.adjoint() }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { dim, mat: identity(dim).scale(1.0 / dim as f64) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    /// Eigenvalues, descending, clamped per the negative-eigenvalue policy.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues_clamped(&self.mat)
    }

    /// Eigendecomposition with clamped descending spectrum.
    pub fn eig(&self) -> (Vec<f64>, CMatrix) {
        let (vals, vecs) = hermitian_eig(&self.mat);
        let vals = vals
            .into_iter()
            .map(|v| if v < 0.0 && v >= -tol::NEGATIVE_EIG { 0.0 } else { v })
            .collect();
        (vals, vecs)
    }

    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        trace_norm(&(&self.mat - &other.mat))
    }

    /// Whether the matrix is diagonal in the computational basis.
    pub fn is_diagonal(&self, atol: f64) -> bool {
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j && self.mat[(i, j)].norm() > atol {
                    return false;
                }
            }
        }
        true
    }

    pub fn diagonal_probs(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.mat[(i, i)].re).collect()
    }
}

// ---------------------------------------------------------------------------
// BipartiteState
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Density matrix on A(x)B with declared subsystem dimensions, A-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    dim_a: usize,
    dim_b: usize,
    rho: DensityMatrix,
}

impl BipartiteState {
    pub fn new(dim_a: usize, dim_b: usize, rho: DensityMatrix) -> Result<Self> {
        if dim_a * dim_b != rho.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} != state dim {}",
                dim_a,
                dim_b,
                rho.dim()
            )));
        }
        Ok(Self { dim_a, dim_b, rho })
    }

    pub fn from_matrix(dim_a: usize, dim_b: usize, mat: CMatrix) -> Result<Self> {
        Self::new(dim_a, dim_b, DensityMatrix::new(mat)?)
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn matrix(&self) -> &CMatrix {
        self.rho.matrix()
    }

    pub fn marginal(&self, keep: Subsystem) -> DensityMatrix {
        partial_trace(self, keep)
    }

    /// sigma (x) tau as a bipartite state.
    pub fn product(a: &DensityMatrix, b: &DensityMatrix) -> Self {
        let rho = tensor(a, b);
        Self { dim_a: a.dim(), dim_b: b.dim(), rho }
    }

    /// Maximally entangled two-qubit state |Phi+><Phi+|.
    pub fn bell_phi_plus() -> Self {
        let mut v = CVector::zeros(4);
        v[0] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        v[3] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { dim_a: 2, dim_b: 2, rho: DensityMatrix::pure(&v).unwrap() }
    }

    /// One shared uniformly random bit: (|00><00| + |11><11|) / 2.
    pub fn common_randomness_bit() -> Self {
        let mut mat = CMatrix::zeros(4, 4);
        mat[(0, 0)] = Complex64::new(0.5, 0.0);
        mat[(3, 3)] = Complex64::new(0.5, 0.0);
        Self { dim_a: 2, dim_b: 2, rho: DensityMatrix::new_unchecked(mat) }
    }

    /// A classical-classical state diag(p(a,b)) from a joint distribution,
    /// `joint[a][b]`.
    pub fn from_joint_distribution(joint: &[Vec<f64>]) -> Result<Self> {
        let dim_a = joint.len();
        let dim_b = joint.first().map(|r| r.len()).unwrap_or(0);
        if dim_a == 0 || dim_b == 0 || joint.iter().any(|r| r.len() != dim_b) {
            return Err(Error::DimensionMismatch("ragged joint distribution".into()));
        }
        let mut diag = Vec::with_capacity(dim_a * dim_b);
        for row in joint {
            diag.extend_from_slice(row);
        }
        Self::new(dim_a, dim_b, DensityMatrix::from_diagonal(&diag)?)
    }

    /// n-fold tensor power regrouped as (A^n, B^n): all A factors become the
    /// new A subsystem (major), all B factors the new B subsystem.
    pub fn tensor_power(&self, n: usize) -> Result<BipartiteState> {
        let da = self.dim_a.checked_pow(n as u32).ok_or_else(|| {
            Error::GuardExceeded("tensor power overflows".into())
        })?;
        let db = self.dim_b.checked_pow(n as u32).ok_or_else(|| {
            Error::GuardExceeded("tensor power overflows".into())
        })?;
        let total = da.checked_mul(db).ok_or_else(|| {
            Error::GuardExceeded("tensor power overflows".into())
        })?;
        if total > 4096 {
            return Err(Error::GuardExceeded(format!(
                "tensor power dimension {total} exceeds 4096"
            )));
        }
        let rho = self.rho.matrix();
        let unflatten = |mut idx: usize, d: usize| -> Vec<usize> {
            let mut out = vec![0; n];
            for i in (0..n).rev() {
                out[i] = idx % d;
                idx /= d;
            }
            out
        };
        let mat = CMatrix::from_fn(total, total, |row, col| {
            let (ra, rb) = (row / db, row % db);
            let (ca, cb) = (col / db, col % db);
            let ras = unflatten(ra, self.dim_a);
            let rbs = unflatten(rb, self.dim_b);
            let cas = unflatten(ca, self.dim_a);
            let cbs = unflatten(cb, self.dim_b);
            let mut acc = Complex64::new(1.0, 0.0);
            for k in 0..n {
                acc *= rho[(
                    ras[k] * self.dim_b + rbs[k],
                    cas[k] * self.dim_b + cbs[k],
                )];
            }
            acc
        });
        Ok(BipartiteState {
            dim_a: da,
            dim_b: db,
            rho: DensityMatrix::new_unchecked(mat),
        })
    }

    /// Product with another bipartite state, regrouped as (A1 A2, B1 B2).
    pub fn tensor_with(&self, other: &BipartiteState) -> Result<BipartiteState> {
        let da = self.dim_a * other.dim_a;
        let db = self.dim_b * other.dim_b;
        if da * db > 4096 {
            return Err(Error::GuardExceeded(format!(
                "product dimension {} exceeds 4096",
                da * db
            )));
        }
        let (r1, r2) = (self.matrix(), other.matrix());
        let (da2, db1, db2) = (other.dim_a, self.dim_b, other.dim_b);
        let mat = CMatrix::from_fn(da * db, da * db, |row, col| {
            let (ra, rb) = (row / db, row % db);
            let (ca, cb) = (col / db, col % db);
            let (ra1, ra2) = (ra / da2, ra % da2);
            let (rb1, rb2) = (rb / db2, rb % db2);
            let (ca1, ca2) = (ca / da2, ca % da2);
            let (cb1, cb2) = (cb / db2, cb % db2);
            r1[(ra1 * db1 + rb1, ca1 * db1 + cb1)] * r2[(ra2 * db2 + rb2, ca2 * db2 + cb2)]
        });
        Ok(BipartiteState { dim_a: da, dim_b: db, rho: DensityMatrix::new_unchecked(mat) })
    }

    /// Whether the joint state is diagonal in the computational product basis
    /// (classical-classical).
    pub fn is_cc_diagonal(&self, atol: f64) -> bool {
        self.rho.is_diagonal(atol)
    }

    /// Joint distribution p(a,b) for a cc-diagonal state.
    pub fn joint_distribution(&self) -> Option<Vec<Vec<f64>>> {
        if !self.is_cc_diagonal(1e-12) {
            return None;
        }
        let diag = self.rho.diagonal_probs();
        Some(
            (0..self.dim_a)
                .map(|a| (0..self.dim_b).map(|b| diag[a * self.dim_b + b].max(0.0)).collect())
                .collect(),
        )
    }
}

/// Tripartite state on A(x)B(x)X with A-major flat indexing.
#[derive(Debug, Clone)]
pub struct TripartiteState {
    dims: [usize; 3],
    rho: DensityMatrix,
}

impl TripartiteState {
    pub fn new(dims: [usize; 3], rho: DensityMatrix) -> Result<Self> {
        if dims.iter().product::<usize>() != rho.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{:?} does not factor state dim {}",
                dims,
                rho.dim()
            )));
        }
        Ok(Self { dims, rho })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.rho
    }

    /// Reduced state on the listed subsystems (0=A, 1=B, 2=X), ascending.
    pub fn reduced(&self, keep: &[usize]) -> DensityMatrix {
        let m = partial_trace_multi(self.rho.matrix(), &self.dims, keep);
        DensityMatrix::new_unchecked(m)
    }
}

// ---------------------------------------------------------------------------
// ClassicalQuantumState
// ---------------------------------------------------------------------------

/// Ensemble (p(x), rho_x^B): the block-diagonal state sum_x p(x)|x><x| (x) rho_x.
#[derive(Debug, Clone)]
pub struct ClassicalQuantumState {
    probs: Vec<f64>,
    states: Vec<DensityMatrix>,
}

impl ClassicalQuantumState {
    pub fn new(probs: Vec<f64>, states: Vec<DensityMatrix>) -> Result<Self> {
        if probs.len() != states.len() || probs.is_empty() {
            return Err(Error::DimensionMismatch(
                "probability and state lists must align and be non-empty".into(),
            ));
        }
        if probs.iter().any(|&p| p < -tol::NEGATIVE_EIG) {
            return Err(Error::InvalidState("negative ensemble probability".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > tol::TRACE_ONE {
            return Err(Error::InvalidState(format!("ensemble probabilities sum to {sum}")));
        }
        let dim = states[0].dim();
        if states.iter().any(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch("ensemble states differ in dimension".into()));
        }
        Ok(Self { probs, states })
    }

    pub(crate) fn new_unchecked(probs: Vec<f64>, states: Vec<DensityMatrix>) -> Self {
        Self { probs, states }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn dim_b(&self) -> usize {
        self.states[0].dim()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    /// sum_x p(x) rho_x.
    pub fn average_state(&self) -> DensityMatrix {
        let d = self.dim_b();
        let mut acc = CMatrix::zeros(d, d);
        for (p, s) in self.probs.iter().zip(&self.states) {
            acc += s.matrix().scale(*p);
        }
        DensityMatrix::new_unchecked(acc)
    }

    /// Embed as the block-diagonal bipartite state on X(x)B.
    pub fn to_bipartite(&self) -> BipartiteState {
        let x = self.len();
        let d = self.dim_b();
        let mut mat = CMatrix::zeros(x * d, x * d);
        for (k, (p, s)) in self.probs.iter().zip(&self.states).enumerate() {
            for i in 0..d {
                for j in 0..d {
                    mat[(k * d + i, k * d + j)] = s.matrix()[(i, j)].scale(*p);
                }
            }
        }
        BipartiteState {
            dim_a: x,
            dim_b: d,
            rho: DensityMatrix::new_unchecked(mat),
        }
    }
}

// ---------------------------------------------------------------------------
// Povm
// ---------------------------------------------------------------------------

/// General POVM: PSD elements summing to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<CMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<CMatrix>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidOperator("empty POVM".into()));
        }
        let d = elements[0].nrows();
        let mut sum = CMatrix::zeros(d, d);
        let mut clean = Vec::with_capacity(elements.len());
        for el in &elements {
            if el.nrows() != d || el.ncols() != d {
                return Err(Error::DimensionMismatch("POVM elements differ in dimension".into()));
            }
            if hermitian_deviation(el) > tol::INGEST_SYMMETRIZE {
                return Err(Error::InvalidOperator("non-Hermitian POVM element".into()));
            }
            let h = hermitian_part(el);
            let (vals, _) = hermitian_eig(&h);
            if let Some(min) = vals.last() {
                if *min < -tol::NEGATIVE_EIG {
                    return Err(Error::InvalidOperator(format!(
                        "POVM element with negative eigenvalue {min:.3e}"
                    )));
                }
            }
            sum += &h;
            clean.push(h);
        }
        let dev = deviation_from_identity(&sum);
        if dev > tol::POVM_COMPLETE {
            return Err(Error::InvalidOperator(format!(
                "POVM completeness deviation {dev:.3e} exceeds {:.0e}",
                tol::POVM_COMPLETE
            )));
        }
        Ok(Self { elements: clean })
    }

    /// Measurement in the computational basis.
    pub fn computational(dim: usize) -> Self {
        let elements = (0..dim)
            .map(|k| {
                let v = basis_vector(dim, k);
                &v * v.adjoint()
            })
            .collect();
        Self { elements }
    }

    /// Projective measurement onto the columns of a unitary.
    pub fn projective(basis: &CMatrix) -> Result<Self> {
        if unitary_deviation(basis) > tol::UNITARY {
            return Err(Error::InvalidOperator("projective basis is not unitary".into()));
        }
        let d = basis.nrows();
        let elements = (0..d)
            .map(|k| {
                let col = basis.column(k);
                col * col.adjoint()
            })
            .collect();
        Ok(Self { elements })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn outcome_probs(&self, rho: &DensityMatrix) -> Vec<f64> {
        self.elements
            .iter()
            .map(|el| (el * rho.matrix()).trace().re)
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Kronecker product a (x) b, A-major.
pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::new_unchecked(a.matrix().kronecker(b.matrix()))
}

/// Reduced state on the kept subsystem.
pub fn partial_trace(s: &BipartiteState, keep: Subsystem) -> DensityMatrix {
    let (da, db) = (s.dim_a(), s.dim_b());
    let rho = s.matrix();
    let mat = match keep {
        Subsystem::A => CMatrix::from_fn(da, da, |a, a2| {
            (0..db).map(|b| rho[(a * db + b, a2 * db + b)]).sum()
        }),
        Subsystem::B => CMatrix::from_fn(db, db, |b, b2| {
            (0..da).map(|a| rho[(a * db + b, a * db + b2)]).sum()
        }),
    };
    DensityMatrix::new_unchecked(mat)
}

/// Measure the A side: p(x) = Tr(L_x rho^A), rho_x^B the conditional B state.
/// Outcomes with probability below [`tol::OUTCOME_FLOOR`] are dropped and the
/// remainder renormalized.
pub fn apply_povm(p: &Povm, s: &BipartiteState) -> Result<ClassicalQuantumState> {
    if p.dim() != s.dim_a() {
        return Err(Error::DimensionMismatch(format!(
            "POVM dim {} vs A-subsystem dim {}",
            p.dim(),
            s.dim_a()
        )));
    }
    let mut probs = Vec::new();
    let mut states = Vec::new();
    for el in p.elements() {
        let tau = contract_a(el, s.matrix(), s.dim_a(), s.dim_b());
        let px = tau.trace().re;
        if px < tol::OUTCOME_FLOOR {
            continue;
        }
        probs.push(px);
        states.push(DensityMatrix::new_unchecked(tau.scale(1.0 / px)));
    }
    if probs.is_empty() {
        return Err(Error::InvalidState("all POVM outcomes below probability floor".into()));
    }
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    Ok(ClassicalQuantumState::new_unchecked(probs, states))
}

/// Dephase in an orthonormal basis (columns of `basis`): off-diagonal entries
/// in that basis are zeroed. Trace-preserving, idempotent.
pub fn dephase(rho: &DensityMatrix, basis: &CMatrix) -> Result<DensityMatrix> {
    if basis.nrows() != rho.dim() || basis.ncols() != rho.dim() {
        return Err(Error::DimensionMismatch("basis does not span the state space".into()));
    }
    let dev = unitary_deviation(basis);
    if dev > tol::UNITARY {
        return Err(Error::InvalidOperator(format!(
            "basis orthonormality deviation {dev:.3e}"
        )));
    }
    let w = basis.adjoint() * rho.matrix() * basis;
    let d = rho.dim();
    let diag = CMatrix::from_fn(d, d, |i, j| {
        if i == j { Complex64::new(w[(i, i)].re, 0.0) } else { Complex64::new(0.0, 0.0) }
    });
    Ok(DensityMatrix::new_unchecked(basis * diag * basis.adjoint()))
}

/// Dephase in the computational basis.
pub fn dephase_computational(rho: &DensityMatrix) -> DensityMatrix {
    let d = rho.dim();
    let m = rho.matrix();
    let diag = CMatrix::from_fn(d, d, |i, j| {
        if i == j { Complex64::new(m[(i, i)].re, 0.0) } else { Complex64::new(0.0, 0.0) }
    });
    DensityMatrix::new_unchecked(diag)
}

/// Trace distance to a pure target against the fidelity bound:
/// returns (||rho - |phi><phi| ||_1, 2 sqrt(1 - <phi|rho|phi>)).
/// The first component never exceeds the second beyond inequality slack.
pub fn fidelity_pure_bound(rho: &DensityMatrix, phi: &CVector) -> Result<(f64, f64)> {
    if phi.len() != rho.dim() {
        return Err(Error::DimensionMismatch("target vector dimension".into()));
    }
    let norm = phi.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidState(format!("target norm {norm} differs from 1")));
    }
    let v = phi.scale(1.0 / norm);
    let proj = &v * v.adjoint();
    let distance = trace_norm(&(rho.matrix() - proj));
    let overlap = (v.adjoint() * rho.matrix() * &v)[(0, 0)].re.clamp(0.0, 1.0);
    let bound = 2.0 * (1.0 - overlap).sqrt();
    Ok((distance, bound))
}

/// Gentle-operator check for an operator 0 <= L <= 1 on a (possibly
/// subnormalized) state: returns (||rho - sqrt(L) rho sqrt(L)||_1, sqrt(8 l))
/// where l = 1 - Tr(rho L). The disturbance never exceeds the bound beyond
/// inequality slack.
pub fn gentle_operator(rho: &CMatrix, lam: &CMatrix) -> Result<(f64, f64)> {
    if lam.nrows() != rho.nrows() || lam.ncols() != rho.ncols() {
        return Err(Error::DimensionMismatch("operator vs state dimension".into()));
    }
    if hermitian_deviation(rho) > tol::INGEST_SYMMETRIZE {
        return Err(Error::InvalidState("state is not Hermitian".into()));
    }
    let tr = rho.trace().re;
    if tr > 1.0 + tol::TRACE_ONE || tr <= 0.0 {
        return Err(Error::InvalidState(format!(
            "state trace {tr} outside (0, 1]"
        )));
    }
    if hermitian_deviation(lam) > tol::INGEST_SYMMETRIZE {
        return Err(Error::InvalidOperator("operator is not Hermitian".into()));
    }
    let (vals, _) = hermitian_eig(&hermitian_part(lam));
    for &v in &vals {
        if !(-tol::NEGATIVE_EIG..=1.0 + tol::NEGATIVE_EIG).contains(&v) {
            return Err(Error::InvalidOperator(format!(
                "operator eigenvalue {v:.6} outside [0, 1]"
            )));
        }
    }
    let sqrt_lam = sqrt_psd(&hermitian_part(lam))?;
    let disturbed = &sqrt_lam * rho * &sqrt_lam;
    let disturbance = trace_norm(&(rho - disturbed));
    let missed = (1.0 - (lam * rho).trace().re).clamp(0.0, 1.0);
    Ok((disturbance, (8.0 * missed).sqrt()))
}

/// Block-diagonal controlled unitary sum_x |x><x| (x) U_x.
pub fn controlled_unitary(blocks: &[CMatrix]) -> Result<CMatrix> {
    if blocks.is_empty() {
        return Err(Error::InvalidOperator("no blocks".into()));
    }
    let d = blocks[0].nrows();
    for (x, u) in blocks.iter().enumerate() {
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::DimensionMismatch(format!("block {x} dimension")));
        }
        let dev = unitary_deviation(u);
        if dev > tol::UNITARY {
            return Err(Error::InvalidOperator(format!(
                "block {x} unitarity deviation {dev:.3e}"
            )));
        }
    }
    let n = blocks.len();
    let mut out = CMatrix::zeros(n * d, n * d);
    for (x, u) in blocks.iter().enumerate() {
        for i in 0..d {
            for j in 0..d {
                out[(x * d + i, x * d + j)] = u[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Conjugate a state by a unitary.
pub fn conjugate(rho: &DensityMatrix, u: &CMatrix) -> Result<DensityMatrix> {
    if u.nrows() != rho.dim() {
        return Err(Error::DimensionMismatch("unitary vs state".into()));
    }
    let dev = unitary_deviation(u);
    if dev > tol::UNITARY {
        return Err(Error::InvalidOperator(format!("unitarity deviation {dev:.3e}")));
    }
    Ok(DensityMatrix::new_unchecked(u * rho.matrix() * u.adjoint()))
}
