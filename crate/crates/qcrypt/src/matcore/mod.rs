//! Dense complex linear algebra and quantum-state primitives.

mod eigen;
mod matrix;
pub mod random;
mod real;

use std::ops::Deref;

pub use eigen::{fix_phase, jacobi_symmetric, Eigen};
pub(crate) use matrix::ZERO;
pub use matrix::{basis_vector, inner, kron_vec, norm, ComplexMatrix, MatrixJson, C64};
pub use real::RealMatrix;

use crate::error::{dim_err, invalid, Result};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;
pub const TRACE_TOL: f64 = 1e-9;
pub const NORM_TOL: f64 = 1e-10;
pub const POVM_TOL: f64 = 1e-8;

/// Square matrix equal to its adjoint within [`HERMITIAN_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return dim_err(format!("{}x{} matrix is not square", m.rows(), m.cols()));
        }
        let err = m.hermiticity_error();
        if err > HERMITIAN_TOL * m.max_abs().max(1.0) {
            return invalid(format!("matrix is not Hermitian (deviation {err:.3e})"));
        }
        Ok(Self(m.hermitian_part()))
    }

    /// Hermitian part of an arbitrary square matrix.
    pub fn from_any(m: &ComplexMatrix) -> Self {
        Self(m.hermitian_part())
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_rows(rows))
    }

    pub fn identity(n: usize) -> Self {
        Self(ComplexMatrix::identity(n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(ComplexMatrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn eig(&self) -> Eigen {
        eigen::jacobi_hermitian(&self.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig().values.first().copied().unwrap_or(0.0)
    }

    pub fn trace_norm(&self) -> f64 {
        self.eig().values.iter().map(|l| l.abs()).sum()
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// Projector onto the span of eigenvectors with eigenvalue > `threshold`.
    pub fn positive_projector(&self, threshold: f64) -> HermitianMatrix {
        Self(self.eig().apply(|l| if l > threshold { 1.0 } else { 0.0 }))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }

    /// Real part of Tr(A B).
    pub fn inner(&self, other: &Self) -> f64 {
        self.0.trace_product(&other.0).re
    }
}

impl Deref for HermitianMatrix {
    type Target = ComplexMatrix;

    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Positive semidefinite, unit-trace Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let h = HermitianMatrix::new(m)?;
        let tr = h.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return invalid(format!("trace {:.12} is not 1", tr.re));
        }
        let min = h.min_eigenvalue();
        if min < -PSD_TOL {
            return invalid(format!("negative eigenvalue {min:.3e}"));
        }
        Ok(Self(h.0))
    }

    /// Normalises a positive semidefinite matrix to unit trace.
    pub fn from_psd(m: &ComplexMatrix) -> Result<Self> {
        let tr = m.trace().re;
        if tr <= 0.0 {
            return invalid("matrix has non-positive trace");
        }
        Self::new(m.hermitian_part().scale(1.0 / tr))
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self(ComplexMatrix::outer(psi.amplitudes(), psi.amplitudes()))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self(ComplexMatrix::identity(d).scale(1.0 / d as f64))
    }

    /// Mixture Σ p_i ρ_i of states of equal dimension.
    pub fn mixture(weights: &[f64], states: &[DensityMatrix]) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return dim_err("weights and states must have equal nonzero length");
        }
        let d = states[0].dim();
        let mut acc = ComplexMatrix::zeros(d, d);
        for (w, s) in weights.iter().zip(states) {
            if s.dim() != d {
                return dim_err("mixture of states with different dimensions");
            }
            acc = &acc + &s.0.scale(*w);
        }
        Self::new(acc)
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn as_hermitian(&self) -> HermitianMatrix {
        HermitianMatrix(self.0.clone())
    }

    pub fn eig(&self) -> Eigen {
        eigen::jacobi_hermitian(&self.0)
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kron(&other.0))
    }

    /// U ρ U†
    pub fn evolve(&self, u: &ComplexMatrix) -> Self {
        Self(self.0.conjugate_by(u).hermitian_part())
    }

    /// Tr(ρ A) for Hermitian A.
    pub fn expectation(&self, a: &ComplexMatrix) -> f64 {
        self.0.trace_product(a).re
    }

    pub(crate) fn from_trusted(m: ComplexMatrix) -> Self {
        Self(m.hermitian_part())
    }
}

impl Deref for DensityMatrix {
    type Target = ComplexMatrix;

    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Unit vector of complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState(Vec<C64>);

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let n = norm(&amplitudes);
        if (n - 1.0).abs() > NORM_TOL {
            return invalid(format!("state norm {n:.12} is not 1"));
        }
        Ok(Self(amplitudes))
    }

    /// Normalises a nonzero vector.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let n = norm(&amplitudes);
        if n <= 1e-300 || !n.is_finite() {
            return invalid("cannot normalise the zero vector");
        }
        for a in &mut amplitudes {
            *a /= n;
        }
        Ok(Self(amplitudes))
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        Self(basis_vector(dim, k))
    }

    /// (|00⟩ + |11⟩ + …)/√d on C^d ⊗ C^d.
    pub fn maximally_entangled(d: usize) -> Self {
        let mut v = vec![ZERO; d * d];
        let a = 1.0 / (d as f64).sqrt();
        for k in 0..d {
            v[k * d + k] = C64::new(a, 0.0);
        }
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.0
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.0
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(kron_vec(&self.0, &other.0))
    }

    pub fn apply(&self, u: &ComplexMatrix) -> Self {
        Self(u.mul_vec(&self.0))
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    pub(crate) fn from_trusted(v: Vec<C64>) -> Self {
        Self(v)
    }
}

/// Positive operator-valued measure.
#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<HermitianMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<HermitianMatrix>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return invalid("a POVM needs at least one element");
        };
        let d = first.dim();
        let mut sum = ComplexMatrix::zeros(d, d);
        for e in &elements {
            if e.dim() != d {
                return dim_err("POVM elements of different dimensions");
            }
            let min = e.min_eigenvalue();
            if min < -PSD_TOL {
                return invalid(format!("POVM element has eigenvalue {min:.3e}"));
            }
            sum = &sum + e.matrix();
        }
        let dev = sum.max_abs_diff(&ComplexMatrix::identity(d));
        if dev > POVM_TOL {
            return invalid(format!("POVM elements sum to identity only within {dev:.3e}"));
        }
        Ok(Self { elements })
    }

    /// Projective measurement onto the columns of a unitary.
    pub fn from_basis(vectors: &[Vec<C64>]) -> Result<Self> {
        Self::new(vectors.iter().map(|v| HermitianMatrix::from_any(&ComplexMatrix::outer(v, v))).collect())
    }

    pub fn elements(&self) -> &[HermitianMatrix] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn probabilities(&self, rho: &DensityMatrix) -> Vec<f64> {
        self.elements.iter().map(|e| rho.expectation(e)).collect()
    }
}

/// Completely positive map in Kraus form.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    operators: Vec<ComplexMatrix>,
    unital: bool,
}

impl KrausChannel {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = operators.first() else {
            return invalid("a channel needs at least one Kraus operator");
        };
        let (dout, din) = (first.rows(), first.cols());
        let mut tp = ComplexMatrix::zeros(din, din);
        let mut un = ComplexMatrix::zeros(dout, dout);
        for k in &operators {
            if (k.rows(), k.cols()) != (dout, din) {
                return dim_err("Kraus operators of different shapes");
            }
            tp = &tp + &k.adjoint().matmul(k);
            un = &un + &k.matmul(&k.adjoint());
        }
        let dev = tp.max_abs_diff(&ComplexMatrix::identity(din));
        if dev > POVM_TOL {
            return invalid(format!("channel is not trace preserving (deviation {dev:.3e})"));
        }
        let unital = din == dout && un.max_abs_diff(&ComplexMatrix::identity(dout)) <= POVM_TOL;
        Ok(Self { operators, unital })
    }

    pub fn identity(d: usize) -> Self {
        Self { operators: vec![ComplexMatrix::identity(d)], unital: true }
    }

    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    /// N(ρ) = rρ + (1−r) I/2 on one qubit.
    pub fn depolarizing(r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return invalid(format!("depolarizing parameter {r} outside [0,1]"));
        }
        let a = ((1.0 + 3.0 * r) / 4.0).sqrt();
        let b = ((1.0 - r) / 4.0).sqrt();
        let [x, y, z] = gates::paulis();
        Self::new(vec![ComplexMatrix::identity(2).scale(a), x.scale(b), y.scale(b), z.scale(b)])
    }

    /// S ∘ T: apply `first`, then `self`.
    pub fn compose(&self, first: &KrausChannel) -> Result<Self> {
        let mut ops = Vec::with_capacity(self.operators.len() * first.operators.len());
        for a in &self.operators {
            for b in &first.operators {
                ops.push(a.matmul(b));
            }
        }
        Self::new(ops)
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn is_unital(&self) -> bool {
        self.unital
    }

    pub fn input_dim(&self) -> usize {
        self.operators[0].cols()
    }

    pub fn output_dim(&self) -> usize {
        self.operators[0].rows()
    }

    /// Σ V ρ V† on an arbitrary operator, without validation.
    pub fn apply_matrix(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let d = self.output_dim();
        let mut out = ComplexMatrix::zeros(d, d);
        for k in &self.operators {
            out = &out + &k.matmul(rho).matmul(&k.adjoint());
        }
        out
    }
}

/// Standard single-qubit gates.
pub mod gates {
    use super::{ComplexMatrix, C64};

    pub fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])
    }

    pub fn pauli_y() -> ComplexMatrix {
        let mut y = ComplexMatrix::zeros(2, 2);
        y[(0, 1)] = C64::new(0.0, -1.0);
        y[(1, 0)] = C64::new(0.0, 1.0);
        y
    }

    pub fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::diag(&[1.0, -1.0])
    }

    pub fn paulis() -> [ComplexMatrix; 3] {
        [pauli_x(), pauli_y(), pauli_z()]
    }

    pub fn hadamard() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]]).scale(std::f64::consts::FRAC_1_SQRT_2)
    }

    /// K = (I + iσ_x)/√2
    pub fn k_gate() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::from_fn(2, 2, |i, j| if i == j { C64::new(s, 0.0) } else { C64::new(0.0, s) })
    }

    pub fn tensor_power(u: &ComplexMatrix, n: usize) -> ComplexMatrix {
        ComplexMatrix::kron_all(&vec![u.clone(); n])
    }
}

/// Which factor of a bipartite system to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// ½‖a − b‖₁
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return dim_err(format!("trace distance of dims {} and {}", a.dim(), b.dim()));
    }
    Ok(0.5 * trace_norm(&(a.matrix() - b.matrix())))
}

/// Sum of absolute eigenvalues of the Hermitian part of `m`.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    eigen::jacobi_hermitian(m).values.iter().map(|l| l.abs()).sum()
}

/// Tr √(√a b √a)
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return dim_err(format!("fidelity of dims {} and {}", a.dim(), b.dim()));
    }
    let sa = a.eig().apply(|l| l.max(0.0).sqrt());
    let inner = sa.matmul(b.matrix()).matmul(&sa);
    let f: f64 = eigen::jacobi_hermitian(&inner).values.iter().map(|l| l.max(0.0).sqrt()).sum();
    Ok(f.min(1.0))
}

/// Reduced state on the kept factor of C^dA ⊗ C^dB.
pub fn partial_trace(m: &DensityMatrix, dims: (usize, usize), keep: Subsystem) -> Result<DensityMatrix> {
    let (da, db) = dims;
    if da * db != m.dim() {
        return dim_err(format!("dim {} does not factor as {da}x{db}", m.dim()));
    }
    let out = match keep {
        Subsystem::A => ComplexMatrix::from_fn(da, da, |i, j| (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()),
        Subsystem::B => ComplexMatrix::from_fn(db, db, |i, j| (0..da).map(|k| m[(k * db + i, k * db + j)]).sum()),
    };
    Ok(DensityMatrix::from_trusted(out))
}

/// (r_x, r_y, r_z) with ρ = (I + r·σ)/2.
pub fn bloch_vector(q: &DensityMatrix) -> Result<[f64; 3]> {
    if q.dim() != 2 {
        return dim_err(format!("Bloch vector needs a qubit, got dim {}", q.dim()));
    }
    let [x, y, z] = gates::paulis();
    Ok([q.expectation(&x), q.expectation(&y), q.expectation(&z)])
}

/// (I + r·σ)/2
pub fn from_bloch(r: [f64; 3]) -> ComplexMatrix {
    let [x, y, z] = gates::paulis();
    let m = &(&x.scale(r[0]) + &y.scale(r[1])) + &z.scale(r[2]);
    (&ComplexMatrix::identity(2) + &m).scale(0.5)
}

/// Σ_m V_m ρ V_m†
pub fn apply_channel(c: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if c.input_dim() != rho.dim() {
        return dim_err(format!("channel input dim {} vs state dim {}", c.input_dim(), rho.dim()));
    }
    DensityMatrix::new(c.apply_matrix(rho.matrix()))
}

/// Eigen-decomposition with ascending eigenvalues.
pub fn eig_hermitian(m: &HermitianMatrix) -> Eigen {
    m.eig()
}

#[cfg(test)]
mod tests {
    use super::matrix::ONE;
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn ket(v: &[f64]) -> PureState {
        PureState::normalized(v.iter().map(|&x| C64::new(x, 0.0)).collect()).unwrap()
    }

    #[test]
    fn trace_distance_examples() {
        let z0 = ket(&[1.0, 0.0]).density();
        let z1 = ket(&[0.0, 1.0]).density();
        assert!(trace_distance(&z0, &z0).unwrap().abs() < 1e-12);
        assert!((trace_distance(&z0, &z1).unwrap() - 1.0).abs() < 1e-12);
        let plus = ket(&[1.0, 1.0]).density();
        let minus = ket(&[1.0, -1.0]).density();
        let a = DensityMatrix::mixture(&[0.5, 0.5], &[z0.clone(), plus]).unwrap();
        let b = DensityMatrix::mixture(&[0.5, 0.5], &[z1, minus]).unwrap();
        assert!((trace_distance(&a, &b).unwrap() - FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let z0 = ket(&[1.0, 0.0]).density();
        let z1 = ket(&[0.0, 1.0]).density();
        assert!((fidelity(&z0, &z0).unwrap() - 1.0).abs() < 1e-9);
        assert!(fidelity(&z0, &z1).unwrap().abs() < 1e-9);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!((fidelity(&z0, &mixed).unwrap() - FRAC_1_SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn partial_trace_examples() {
        let phi = PureState::maximally_entangled(2).density();
        let red = partial_trace(&phi, (2, 2), Subsystem::A).unwrap();
        assert!(red.max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-12);
        let s01 = PureState::basis(4, 1).density();
        let b = partial_trace(&s01, (2, 2), Subsystem::B).unwrap();
        assert!(b.max_abs_diff(&ComplexMatrix::diag(&[0.0, 1.0])) < 1e-12);
        assert!(partial_trace(&s01, (3, 2), Subsystem::A).is_err());
    }

    #[test]
    fn bloch_examples() {
        assert_eq!(bloch_vector(&DensityMatrix::maximally_mixed(2)).unwrap(), [0.0, 0.0, 0.0]);
        let r = bloch_vector(&ket(&[1.0, 0.0]).density()).unwrap();
        assert!((r[2] - 1.0).abs() < 1e-12);
        let r = bloch_vector(&ket(&[1.0, 1.0]).density()).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-12 && r[1].abs() < 1e-12 && r[2].abs() < 1e-12);
        assert!(bloch_vector(&DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn channel_examples() {
        let rho = ket(&[0.6, 0.8]).density();
        let id = KrausChannel::identity(2);
        assert!(apply_channel(&id, &rho).unwrap().max_abs_diff(&rho) < 1e-12);
        let dep0 = KrausChannel::depolarizing(0.0).unwrap();
        assert!(dep0.is_unital());
        let out = apply_channel(&dep0, &rho).unwrap();
        assert!(out.max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-12);
        let half = KrausChannel::depolarizing(0.5).unwrap();
        let out = apply_channel(&half, &ket(&[1.0, 0.0]).density()).unwrap();
        assert!(out.max_abs_diff(&ComplexMatrix::diag(&[0.75, 0.25])) < 1e-12);
    }

    #[test]
    fn eig_examples() {
        let z = HermitianMatrix::new(gates::pauli_z()).unwrap();
        let e = eig_hermitian(&z);
        assert_eq!(e.values, vec![-1.0, 1.0]);
        assert!((e.vector(0)[1] - ONE).norm() < 1e-12);
        assert!((e.vector(1)[0] - ONE).norm() < 1e-12);
        let h = HermitianMatrix::new(gates::hadamard()).unwrap();
        let e = eig_hermitian(&h);
        assert!((e.values[0] + 1.0).abs() < 1e-12 && (e.values[1] - 1.0).abs() < 1e-12);
        let e = eig_hermitian(&HermitianMatrix::identity(4));
        assert!(e.values.iter().all(|&l| (l - 1.0).abs() < 1e-15));
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        assert!(HermitianMatrix::new(gates::k_gate()).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::diag(&[1.5, -0.5])).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::diag(&[0.5, 0.4])).is_err());
        assert!(PureState::new(vec![ONE, ONE]).is_err());
        let bad = HermitianMatrix::new(ComplexMatrix::diag(&[1.0, 0.5])).unwrap();
        assert!(Povm::new(vec![bad]).is_err());
        assert!(KrausChannel::new(vec![ComplexMatrix::identity(2).scale(0.9)]).is_err());
        assert!(trace_distance(&DensityMatrix::maximally_mixed(2), &DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn composed_channel_is_trace_preserving() {
        let dep = KrausChannel::depolarizing(0.3).unwrap();
        let h = KrausChannel::unitary(gates::hadamard()).unwrap();
        let c = dep.compose(&h).unwrap();
        assert_eq!(c.operators().len(), 4);
        assert!(c.is_unital());
    }
}
