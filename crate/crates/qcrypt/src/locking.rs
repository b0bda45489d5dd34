//! Locking of classical correlations and bit-string commitment bounds.
//!
//! Ensembles place the label (x, t) with probability p_t/d on U_t|x⟩. The
//! accessible information is sandwiched between log d minus a certified
//! entropic uncertainty bound and the mutual information of an explicit
//! measurement.

use serde_json::{json, Value};

use crate::entropy::{quantum_collision_cond, shannon_raw, CqState, ProbDist};
use crate::error::{invalid, Result};
use crate::matcore::{kron_vec, ComplexMatrix, C64};
use crate::mubclifford::{latin_square_mub_prime, pauli_mub, standard_bases, MubSet};
use crate::uncertainty::{full_mub_collision_bound, min_avg_shannon, DEFAULT_RESTARTS};

/// Gap below which the sandwich is declared tight.
pub const TIGHT_TOL: f64 = 1e-3;

/// Supported MUB families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LockingFamily {
    /// First `bases` of {I, H, K}^⊗n.
    Standard { n: usize, bases: usize },
    /// First `bases` of the generalized Pauli MUBs in prime dimension d.
    Pauli { d: usize, bases: usize },
    /// `bases` Latin-square MUBs in dimension s², from the multiplier squares.
    Latin { s: usize, bases: usize },
}

impl LockingFamily {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Standard { .. } => "standard",
            Self::Pauli { .. } => "pauli",
            Self::Latin { .. } => "latin",
        }
    }

    pub fn n_bases(&self) -> usize {
        match *self {
            Self::Standard { bases, .. } | Self::Pauli { bases, .. } | Self::Latin { bases, .. } => bases,
        }
    }

    pub fn mubs(&self) -> Result<MubSet> {
        let m = self.n_bases();
        if m == 0 {
            return invalid("need at least one basis");
        }
        let set = match *self {
            Self::Standard { n, .. } => standard_bases(n)?,
            Self::Pauli { d, .. } => pauli_mub(d)?,
            Self::Latin { s, .. } => latin_square_mub_prime(s)?,
        };
        if set.dim() > 16 {
            return invalid(format!("dimension {} above the cap of 16", set.dim()));
        }
        set.take(m)
    }
}

/// Accessible information sandwich.
#[derive(Debug, Clone)]
pub struct LockingResult {
    pub family: LockingFamily,
    pub dim: usize,
    pub upper: f64,
    pub lower: f64,
    /// Equal to `upper` when the gap is within [`TIGHT_TOL`].
    pub value: Option<f64>,
}

impl LockingResult {
    pub fn tight(&self) -> bool {
        self.value.is_some()
    }

    pub fn to_json_value(&self) -> Value {
        let (n, m) = match self.family {
            LockingFamily::Standard { n, bases } => (Some(n), bases),
            LockingFamily::Pauli { bases, .. } | LockingFamily::Latin { bases, .. } => (None, bases),
        };
        json!({
            "family": self.family.name(),
            "n": n,
            "d": self.dim,
            "m": m,
            "upper": self.upper,
            "lower": self.lower,
            "tight": self.tight(),
        })
    }
}

/// I((X,T);Y) for the MUB ensemble under basis prior `pb`, by enumeration of (x, t, outcome).
pub fn mutual_information(m: &MubSet, pb: &ProbDist, povm: &[ComplexMatrix]) -> Result<f64> {
    if pb.len() != m.len() {
        return invalid("basis prior length differs from the number of bases");
    }
    let d = m.dim();
    let mut py = vec![0.0; povm.len()];
    let mut h_cond = 0.0;
    for (t, basis) in m.bases().iter().enumerate() {
        for v in basis.vectors() {
            let a = v.amplitudes();
            let cond: Vec<f64> = povm.iter().map(|e| crate::matcore::inner(a, &e.mul_vec(a)).re.max(0.0)).collect();
            let w = pb.probs()[t] / d as f64;
            for (acc, c) in py.iter_mut().zip(&cond) {
                *acc += w * c;
            }
            h_cond += w * shannon_raw(&cond);
        }
    }
    Ok(shannon_raw(&py) - h_cond)
}

fn rank_one(vs: impl IntoIterator<Item = (f64, Vec<C64>)>) -> Vec<ComplexMatrix> {
    vs.into_iter().map(|(w, v)| ComplexMatrix::outer(&v, &v).scale(w)).collect()
}

/// Bell basis on each consecutive pair of qubits.
pub fn bell_pair_measurement(n: usize) -> Result<Vec<ComplexMatrix>> {
    if n == 0 || n % 2 == 1 {
        return invalid("pairwise Bell measurement needs an even number of qubits");
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let bell: [[f64; 4]; 4] = [[s, 0.0, 0.0, s], [s, 0.0, 0.0, -s], [0.0, s, s, 0.0], [0.0, s, -s, 0.0]];
    let mut out = vec![vec![C64::new(1.0, 0.0)]];
    for _ in 0..n / 2 {
        out = out
            .iter()
            .flat_map(|v| {
                bell.iter().map(move |b| kron_vec(v, &b.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>()))
            })
            .collect();
    }
    Ok(rank_one(out.into_iter().map(|v| (1.0, v))))
}

/// {(1/d) P_ab|ψ⟩⟨ψ|P_ab†} over the d² Weyl operators acting on each subsystem of dimension `local`.
pub fn covariant_measurement(psi: &[C64], local: usize, parts: usize) -> Vec<ComplexMatrix> {
    let x = crate::mubclifford::shift(local);
    let z = crate::mubclifford::clock(local);
    let mut singles = Vec::with_capacity(local * local);
    for a in 0..local {
        for b in 0..local {
            let mut p = ComplexMatrix::identity(local);
            for _ in 0..a {
                p = p.matmul(&x);
            }
            for _ in 0..b {
                p = p.matmul(&z);
            }
            singles.push(p);
        }
    }
    let mut ops = vec![ComplexMatrix::identity(1)];
    for _ in 0..parts {
        ops = ops.iter().flat_map(|o| singles.iter().map(move |s| o.kron(s))).collect();
    }
    let d = psi.len() as f64;
    rank_one(ops.iter().map(|p| (1.0 / d, p.mul_vec(psi))))
}

/// Upper bound log d − certified minimum average entropy, lower bound from an explicit measurement.
pub fn locking_accessible_info(family: LockingFamily, restarts: usize, seed: u64) -> Result<LockingResult> {
    let m = family.mubs()?;
    let d = m.dim();
    let log_d = (d as f64).log2();
    let certified = if m.len() == 1 { 0.0 } else { (log_d / 2.0).max(full_mub_collision_bound(&m)) };
    let upper = log_d - certified;
    let uniform = ProbDist::uniform(m.len());
    let povm = match family {
        LockingFamily::Standard { n, bases } if n % 2 == 0 && bases >= 2 => bell_pair_measurement(n)?,
        LockingFamily::Latin { .. } => rank_one((0..d).map(|k| (1.0, crate::matcore::basis_vector(d, k)))),
        LockingFamily::Standard { n, .. } => {
            let min = min_avg_shannon(&m, restarts, seed)?;
            covariant_measurement(min.minimizer.amplitudes(), 2, n)
        }
        LockingFamily::Pauli { d, .. } => {
            let min = min_avg_shannon(&m, restarts, seed)?;
            covariant_measurement(min.minimizer.amplitudes(), d, 1)
        }
    };
    let lower = mutual_information(&m, &uniform, &povm)?;
    let value = ((upper - lower).abs() <= TIGHT_TOL).then_some(upper);
    Ok(LockingResult { family, dim: d, upper, lower, value })
}

/// [`locking_accessible_info`] with the default restart count.
pub fn locking_accessible_info_default(family: LockingFamily) -> Result<LockingResult> {
    locking_accessible_info(family, DEFAULT_RESTARTS, 0)
}

/// Single-basis lower bound against the n/2 baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorGap {
    pub lower: f64,
    pub baseline: f64,
    pub strict: bool,
}

/// max_t p_t·n for three standard bases on an even number of qubits.
pub fn nonuniform_prior_gap(p_bases: &ProbDist, n: usize) -> Result<PriorGap> {
    if n == 0 || n % 2 == 1 {
        return invalid("prior gap is stated for even n");
    }
    if p_bases.len() != 3 {
        return invalid("prior over exactly three bases");
    }
    let pmax = p_bases.probs().iter().copied().fold(0.0, f64::max);
    let lower = pmax * n as f64;
    let baseline = n as f64 / 2.0;
    Ok(PriorGap { lower, baseline, strict: pmax > 0.5 + 1e-12 })
}

/// Mutual information of measuring basis t of the standard family under prior `pb`.
pub fn single_basis_information(n: usize, pb: &ProbDist, t: usize) -> Result<f64> {
    let m = standard_bases(n)?.take(pb.len())?;
    if t >= m.len() {
        return invalid(format!("basis index {t} out of range"));
    }
    let povm = rank_one(m.bases()[t].vectors().iter().map(|v| (1.0, v.amplitudes().to_vec())));
    mutual_information(&m, pb, &povm)
}

/// (a, b) = (log₂|U|, accessible information bound).
pub fn lockcom_params(n_unitaries: usize, iacc_bound: f64) -> Result<(f64, f64)> {
    if n_unitaries == 0 {
        return invalid("need at least one unitary");
    }
    Ok(((n_unitaries as f64).log2(), iacc_bound))
}

/// 5 log 5 − 4
pub fn qbsc_constant() -> f64 {
    5.0 * 5f64.log2() - 4.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct QbscVerdict {
    pub possible: bool,
    pub slack: f64,
}

/// Impossible iff a + b + c < n.
pub fn qbsc_impossibility(n: f64, a: f64, b: f64) -> Result<QbscVerdict> {
    if n < 0.0 || a < 0.0 || b < 0.0 || !(n + a + b).is_finite() {
        return invalid("parameters must be finite and nonnegative");
    }
    let slack = a + b + qbsc_constant() - n;
    Ok(QbscVerdict { possible: slack >= 0.0, slack })
}

/// ξ = n − H₂(X|Q).
pub fn qbsc_xi(e: &CqState, n: usize) -> Result<f64> {
    if n >= usize::BITS as usize || e.weights().len() > 1usize << n {
        return invalid(format!("{} labels do not fit in {n} bits", e.weights().len()));
    }
    if e.labels().iter().any(|&l| l >= 1 << n) {
        return invalid("label outside the n-bit range");
    }
    Ok(n as f64 - quantum_collision_cond(e)?)
}
