//! State discrimination with and without post-measurement basis information.

use rand::Rng;
use serde_json::Value;

use crate::entropy::{CqState, ProbDist};
use crate::error::{dim_err, invalid, Error, Result};
use crate::matcore::random::rng;
use crate::matcore::{
    gates, jacobi_symmetric, trace_norm, ComplexMatrix, DensityMatrix, Eigen, HermitianMatrix, Povm, RealMatrix, C64,
};
use crate::mubclifford::standard_bases;
use crate::sdpsolve::{solve, SdpProblem, SdpSolution};

const PROJ_TOL: f64 = 1e-8;

/// Optimal two-state discrimination.
#[derive(Debug, Clone)]
pub struct Helstrom {
    pub p_success: f64,
    pub povm: Povm,
}

/// p = ½[1 + ‖qρ₀ − (1−q)ρ₁‖₁] with M₀ the projector onto the positive part.
pub fn helstrom(rho0: &DensityMatrix, rho1: &DensityMatrix, q: f64) -> Result<Helstrom> {
    if rho0.dim() != rho1.dim() {
        return dim_err(format!("states of dims {} and {}", rho0.dim(), rho1.dim()));
    }
    if !(0.0..=1.0).contains(&q) {
        return invalid(format!("prior {q} outside [0,1]"));
    }
    let diff = HermitianMatrix::from_any(&(&rho0.scale(q) - &rho1.scale(1.0 - q)));
    let m0 = diff.positive_projector(0.0);
    let m1 = HermitianMatrix::identity(diff.dim()).sub(&m0);
    let p_success = 0.5 * (1.0 + diff.trace_norm());
    Ok(Helstrom { p_success, povm: Povm::new(vec![m0, m1])? })
}

/// Helstrom value ½[Tr a + Tr b + ‖a − b‖₁] for prior-weighted operators.
pub fn helstrom_weighted(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    0.5 * (a.trace().re + b.trace().re + trace_norm(&(a - b)))
}

/// 1/|B| + (1 − 1/|B|)/|Y|: guess the basis, then the value.
pub fn guess_basis_baseline(n_bases: usize, n_outcomes: usize) -> Result<f64> {
    if n_bases == 0 || n_outcomes == 0 {
        return invalid("counts must be positive");
    }
    let b = n_bases as f64;
    Ok(1.0 / b + (1.0 - 1.0 / b) / n_outcomes as f64)
}

/// ½ + 1/(2√|B|)
pub fn star_boolean_upper(n_bases: usize) -> Result<f64> {
    if n_bases == 0 {
        return invalid("need at least one basis");
    }
    Ok(0.5 + 0.5 / (n_bases as f64).sqrt())
}

/// Function table f: {0,1}ⁿ → {0, …, |Y|−1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionTable {
    n: usize,
    table: Vec<usize>,
    ny: usize,
}

impl FunctionTable {
    pub fn new(n: usize, table: Vec<usize>) -> Result<Self> {
        if n == 0 || n > 4 {
            return invalid(format!("input length {n} outside 1..=4"));
        }
        if table.len() != 1 << n {
            return dim_err(format!("table of length {} for n = {n}", table.len()));
        }
        let ny = table.iter().max().map_or(1, |m| m + 1);
        Ok(Self { n, table, ny })
    }

    pub fn and(n: usize) -> Result<Self> {
        Self::new(n, (0..1usize << n).map(|x| usize::from(x == (1 << n) - 1)).collect())
    }

    pub fn xor(n: usize) -> Result<Self> {
        Self::new(n, (0..1usize << n).map(|x| (x.count_ones() % 2) as usize).collect())
    }

    /// The i-th bit of x, counting from the most significant.
    pub fn bit(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return invalid(format!("bit {i} of an {n}-bit string"));
        }
        Self::new(n, (0..1usize << n).map(|x| (x >> (n - 1 - i)) & 1).collect())
    }

    /// `and`, `xor` or `bit:<i>` on n bits.
    pub fn builtin(name: &str, n: usize) -> Result<Self> {
        match name.split_once(':') {
            None if name == "and" => Self::and(n),
            None if name == "xor" => Self::xor(n),
            Some(("bit", i)) => {
                Self::bit(n, i.parse().map_err(|_| Error::Invalid(format!("bad bit index in {name:?}")))?)
            }
            _ => invalid(format!("unknown function {name:?}")),
        }
    }

    /// {"n": …, "table": [y₀, y₁, …]}
    pub fn from_json_value(v: &Value) -> Result<Self> {
        let n =
            v.get("n").and_then(Value::as_u64).ok_or_else(|| Error::Invalid("function JSON needs integer n".into()))?;
        let table: Vec<usize> = serde_json::from_value(
            v.get("table").cloned().ok_or_else(|| Error::Invalid("function JSON needs table".into()))?,
        )?;
        Self::new(n as usize, table)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn eval(&self, x: usize) -> usize {
        self.table[x]
    }

    pub fn preimage(&self, y: usize) -> Vec<usize> {
        (0..self.table.len()).filter(|&x| self.table[x] == y).collect()
    }
}

/// ρ_{yb} = Σ_{x∈f⁻¹(y)} P_X(x) U_b|x⟩⟨x|U_b† with basis prior P_B.
#[derive(Debug, Clone)]
pub struct HiddenFunctionEnsemble {
    f: FunctionTable,
    unitaries: Vec<ComplexMatrix>,
    px: ProbDist,
    pb: ProbDist,
}

impl HiddenFunctionEnsemble {
    pub fn new(f: FunctionTable, unitaries: Vec<ComplexMatrix>, px: ProbDist, pb: ProbDist) -> Result<Self> {
        let d = 1 << f.n;
        if unitaries.is_empty() || unitaries.iter().any(|u| u.rows() != d || u.cols() != d) {
            return dim_err(format!("need at least one {d} × {d} unitary"));
        }
        for u in &unitaries {
            if u.matmul(&u.adjoint()).max_abs_diff(&ComplexMatrix::identity(d)) > 1e-9 {
                return invalid("basis change is not unitary");
            }
        }
        if px.len() != d || pb.len() != unitaries.len() {
            return dim_err("prior lengths do not match");
        }
        Ok(Self { f, unitaries, px, pb })
    }

    pub fn uniform(f: FunctionTable, unitaries: Vec<ComplexMatrix>) -> Result<Self> {
        let d = 1 << f.n;
        let m = unitaries.len();
        Self::new(f, unitaries, ProbDist::uniform(d), ProbDist::uniform(m))
    }

    /// First `n_bases` of {I, H^⊗n, K^⊗n} with uniform priors.
    pub fn standard(f: FunctionTable, n_bases: usize) -> Result<Self> {
        if !(1..=3).contains(&n_bases) {
            return invalid("between one and three standard bases");
        }
        let m = standard_bases(f.n)?;
        let us = m.bases()[..n_bases].iter().map(|b| b.unitary()).collect();
        Self::uniform(f, us)
    }

    /// AND with P(1…1) = ½ and the rest uniform, computational and Hadamard bases.
    pub fn and_skewed(n: usize) -> Result<Self> {
        let d = 1usize << n;
        let f = FunctionTable::and(n)?;
        let rest = 0.5 / (d - 1) as f64;
        let px = ProbDist::new((0..d).map(|x| if x == d - 1 { 0.5 } else { rest }).collect())?;
        let m = standard_bases(n)?;
        let us = m.bases()[..2].iter().map(|b| b.unitary()).collect();
        Self::new(f, us, px, ProbDist::uniform(2))
    }

    pub fn function(&self) -> &FunctionTable {
        &self.f
    }

    pub fn dim(&self) -> usize {
        1 << self.f.n
    }

    pub fn n_bases(&self) -> usize {
        self.unitaries.len()
    }

    pub fn ny(&self) -> usize {
        self.f.ny
    }

    pub fn unitaries(&self) -> &[ComplexMatrix] {
        &self.unitaries
    }

    pub fn basis_prior(&self) -> &ProbDist {
        &self.pb
    }

    /// P(f(X) = y) equal for all y.
    pub fn is_balanced(&self) -> bool {
        let ny = self.ny() as f64;
        (0..self.ny()).all(|y| {
            let w: f64 = self.f.preimage(y).iter().map(|&x| self.px.probs()[x]).sum();
            (w - 1.0 / ny).abs() < 1e-9
        })
    }

    fn weighted_sum(&self, y: usize, b: usize, weight: impl Fn(usize) -> f64) -> ComplexMatrix {
        let d = self.dim();
        let mut acc = ComplexMatrix::zeros(d, d);
        let u = &self.unitaries[b];
        for x in self.f.preimage(y) {
            let col = u.column(x);
            acc = &acc + &ComplexMatrix::outer(&col, &col).scale(weight(x));
        }
        acc
    }

    /// P_{yb} = Σ_{x∈f⁻¹(y)} U_b|x⟩⟨x|U_b†
    pub fn projector(&self, y: usize, b: usize) -> ComplexMatrix {
        self.weighted_sum(y, b, |_| 1.0)
    }

    /// Projectors grouped by basis.
    pub fn projectors(&self) -> Vec<Vec<HermitianMatrix>> {
        (0..self.n_bases())
            .map(|b| (0..self.ny()).map(|y| HermitianMatrix::from_any(&self.projector(y, b))).collect())
            .collect()
    }

    /// ρ_{yb} carrying the weight P_X(f⁻¹(y)).
    pub fn rho(&self, y: usize, b: usize) -> ComplexMatrix {
        self.weighted_sum(y, b, |x| self.px.probs()[x])
    }

    /// Σ_b P_B(b) ρ_{yb} for every y.
    pub fn star_states(&self) -> Vec<ComplexMatrix> {
        let d = self.dim();
        (0..self.ny())
            .map(|y| {
                let mut acc = ComplexMatrix::zeros(d, d);
                for b in 0..self.n_bases() {
                    acc = &acc + &self.rho(y, b).scale(self.pb.probs()[b]);
                }
                acc
            })
            .collect()
    }

    pub fn n_outcomes(&self) -> usize {
        self.ny().pow(self.n_bases() as u32)
    }

    /// Guess o_b for basis b encoded in outcome index o.
    pub fn outcome_digits(&self, o: usize) -> Vec<usize> {
        let ny = self.ny();
        (0..self.n_bases()).map(|b| (o / ny.pow(b as u32)) % ny).collect()
    }

    /// σ_o = Σ_b P_B(b) ρ_{o_b b}
    pub fn pi_weights(&self) -> Vec<ComplexMatrix> {
        let d = self.dim();
        let rhos: Vec<Vec<ComplexMatrix>> = (0..self.n_bases())
            .map(|b| (0..self.ny()).map(|y| self.rho(y, b).scale(self.pb.probs()[b])).collect())
            .collect();
        (0..self.n_outcomes())
            .map(|o| {
                let mut acc = ComplexMatrix::zeros(d, d);
                for (b, &y) in self.outcome_digits(o).iter().enumerate() {
                    acc = &acc + &rhos[b][y];
                }
                acc
            })
            .collect()
    }

    /// Σ_o Tr(M_o σ_o) for a measurement with one element per outcome tuple.
    pub fn pi_success(&self, povm: &[ComplexMatrix]) -> Result<f64> {
        if povm.len() != self.n_outcomes() {
            return dim_err(format!("{} elements for {} outcome tuples", povm.len(), self.n_outcomes()));
        }
        Ok(self.pi_weights().iter().zip(povm).map(|(s, m)| m.trace_product(s).re).sum())
    }
}

/// Optimum of max Σ_o Tr(σ_o M_o) over POVMs with its maximizer.
#[derive(Debug, Clone)]
pub struct Discrimination {
    pub value: f64,
    pub povm: Vec<HermitianMatrix>,
    pub solution: SdpSolution,
}

/// POVM SDP: the elements sit on the diagonal blocks of one PSD matrix whose
/// blocks are constrained to sum to the identity entrywise.
pub fn discrimination_sdp(weighted: &[ComplexMatrix], tol: f64) -> Result<Discrimination> {
    let k = weighted.len();
    if k == 0 {
        return invalid("no states to discriminate");
    }
    let d = weighted[0].rows();
    if weighted.iter().any(|w| w.rows() != d || !w.is_square()) {
        return dim_err("states of different dimensions");
    }
    let c = ComplexMatrix::block_diag(&weighted.iter().map(|w| w.hermitian_part()).collect::<Vec<_>>());
    let complex = weighted.iter().any(|w| !w.is_real(1e-14));
    let mut constraints = Vec::new();
    for j in 0..d {
        for l in j..d {
            let mut parts = vec![(C64::new(0.5, 0.0), C64::new(0.5, 0.0), if j == l { 1.0 } else { 0.0 })];
            if complex && j != l {
                parts.push((C64::new(0.0, 0.5), C64::new(0.0, -0.5), 0.0));
            }
            for (a_jl, a_lj, b) in parts {
                let mut a = ComplexMatrix::zeros(k * d, k * d);
                for o in 0..k {
                    if j == l {
                        a[(o * d + j, o * d + j)] = C64::new(1.0, 0.0);
                    } else {
                        a[(o * d + j, o * d + l)] = a_jl;
                        a[(o * d + l, o * d + j)] = a_lj;
                    }
                }
                constraints.push((HermitianMatrix::from_any(&a), b));
            }
        }
    }
    let problem = SdpProblem::new(HermitianMatrix::from_any(&c), constraints)?;
    let solution = solve(&problem, tol)?;
    let povm = (0..k).map(|o| HermitianMatrix::from_any(&solution.primal.submatrix(o * d, o * d, d, d))).collect();
    Ok(Discrimination { value: solution.primal_value, povm, solution })
}

/// Optimal probability of guessing X from the cq-state.
pub fn optimal_guessing(cq: &CqState, tol: f64) -> Result<f64> {
    let weighted: Vec<ComplexMatrix> =
        cq.weights().probs().iter().zip(cq.conditionals()).map(|(p, r)| r.scale(*p)).collect();
    if weighted.len() == 2 {
        return Ok(helstrom_weighted(&weighted[0], &weighted[1]));
    }
    Ok(discrimination_sdp(&weighted, tol)?.value)
}

/// Success without basis information: discriminate Σ_b P_B(b) ρ_{yb}.
pub fn star_value(e: &HiddenFunctionEnsemble, tol: f64) -> Result<f64> {
    let states = e.star_states();
    if states.len() == 1 {
        return Ok(1.0);
    }
    if states.len() == 2 {
        return Ok(helstrom_weighted(&states[0], &states[1]));
    }
    Ok(discrimination_sdp(&states, tol)?.value)
}

/// Success when the basis is announced after an unrestricted measurement.
pub fn pistar_value(e: &HiddenFunctionEnsemble, tol: f64) -> Result<Discrimination> {
    discrimination_sdp(&e.pi_weights(), tol)
}

fn inv_sqrt_on_support(m: &ComplexMatrix) -> ComplexMatrix {
    HermitianMatrix::from_any(m).eig().apply(|l| if l > 1e-10 { 1.0 / l.sqrt() } else { 0.0 })
}

/// M_o = S^{−½}(Σ_b P_{o_b b})³S^{−½}.
pub fn srm_measurement(e: &HiddenFunctionEnsemble) -> Result<Vec<ComplexMatrix>> {
    if !e.is_balanced() {
        return invalid("square-root measurement needs a balanced function");
    }
    let projs: Vec<Vec<ComplexMatrix>> =
        (0..e.n_bases()).map(|b| (0..e.ny()).map(|y| e.projector(y, b)).collect()).collect();
    let d = e.dim();
    let cubes: Vec<ComplexMatrix> = (0..e.n_outcomes())
        .map(|o| {
            let mut s = ComplexMatrix::zeros(d, d);
            for (b, &y) in e.outcome_digits(o).iter().enumerate() {
                s = &s + &projs[b][y];
            }
            s.matmul(&s).matmul(&s)
        })
        .collect();
    let mut total = ComplexMatrix::zeros(d, d);
    for c in &cubes {
        total = &total + c;
    }
    let w = inv_sqrt_on_support(&total);
    Ok(cubes.iter().map(|c| w.matmul(c).matmul(&w)).collect())
}

/// Success probability of the square-root type measurement.
pub fn srm_success(e: &HiddenFunctionEnsemble) -> Result<f64> {
    e.pi_success(&srm_measurement(e)?)
}

/// [G(1) + (6 + 1/|Y|)G(2) + 6G(3) + G(4)] / (m[G(1) + 3G(2) + G(3)]), G(i) = m!/(m−i)!·|Y|^{m−i}.
pub fn srm_lower_bound(m: usize, ny: usize) -> Result<f64> {
    if m == 0 || ny == 0 {
        return invalid("counts must be positive");
    }
    if ny == 1 {
        return Ok(1.0);
    }
    let g = |i: usize| -> f64 {
        if i > m {
            return 0.0;
        }
        let falling: f64 = (0..i).map(|k| (m - k) as f64).product();
        falling * (ny as f64).powi((m - i) as i32)
    };
    let y = ny as f64;
    let num = g(1) + (6.0 + 1.0 / y) * g(2) + 6.0 * g(3) + g(4);
    let den = m as f64 * (g(1) + 3.0 * g(2) + g(3));
    Ok(num / den)
}

/// ½[2 + 1/(2ⁿ + 2^{n/2} − 2) − 1/(2ⁿ − 1)]
pub fn pistar_and_value(n: usize) -> Result<f64> {
    if n == 0 || n > 30 {
        return invalid(format!("n = {n} outside 1..=30"));
    }
    let p = 2f64.powi(n as i32);
    Ok(0.5 * (2.0 + 1.0 / (p + p.sqrt() - 2.0) - 1.0 / (p - 1.0)))
}

/// The 4-outcome POVM SDP for the skewed AND ensemble.
pub fn pistar_and_sdp(n: usize, tol: f64) -> Result<f64> {
    if n == 0 || n > 4 {
        return invalid(format!("SDP cross-check limited to n ≤ 4, got {n}"));
    }
    Ok(pistar_value(&HiddenFunctionEnsemble::and_skewed(n)?, tol)?.value)
}

/// Closed-form and recomputed XOR values.
#[derive(Debug, Clone)]
pub struct XorValues {
    pub n: usize,
    pub n_bases: usize,
    pub star: f64,
    pub pistar: f64,
    /// Trace-distance value on the constructed ensemble (n ≤ 3).
    pub star_numeric: Option<f64>,
    /// Bell-pair strategy on the constructed ensemble (even n ≤ 4).
    pub bell_numeric: Option<f64>,
}

/// STAR and PI-STAR values for XOR on n bits with 2 or 3 bases.
pub fn pistar_xor_value(n: usize, n_bases: usize) -> Result<XorValues> {
    if n == 0 {
        return invalid("n must be positive");
    }
    if !(2..=3).contains(&n_bases) {
        return invalid("XOR values are given for 2 or 3 bases");
    }
    let odd = 0.5 + 0.5 / (n_bases as f64).sqrt();
    let (star, pistar) = if n.is_multiple_of(2) { (0.75, 1.0) } else { (odd, odd) };
    let star_numeric = if n <= 3 {
        let e = HiddenFunctionEnsemble::standard(FunctionTable::xor(n)?, n_bases)?;
        Some(star_value(&e, 1e-10)?)
    } else {
        None
    };
    let bell_numeric = if n.is_multiple_of(2) && n <= 4 {
        let e = HiddenFunctionEnsemble::standard(FunctionTable::xor(n)?, n_bases)?;
        Some(e.pi_success(&bell_strategy(n, n_bases)?)?)
    } else {
        None
    };
    Ok(XorValues { n, n_bases, star, pistar, star_numeric, bell_numeric })
}

/// Pairwise Bell measurement; the parity in each basis is read off Z⊗Z, X⊗X, Y⊗Y.
pub fn bell_strategy(n: usize, n_bases: usize) -> Result<Vec<ComplexMatrix>> {
    if n == 0 || n % 2 == 1 || n > 8 {
        return invalid("Bell strategy needs an even n ≤ 8");
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let bell: [[f64; 4]; 4] = [[s, 0.0, 0.0, s], [s, 0.0, 0.0, -s], [0.0, s, s, 0.0], [0.0, s, -s, 0.0]];
    // (ZZ, XX, YY) parity bits of Φ+, Φ−, Ψ+, Ψ−
    let parity: [[usize; 3]; 4] = [[0, 0, 1], [0, 1, 0], [1, 0, 0], [1, 1, 1]];
    let pairs = n / 2;
    let d = 1 << n;
    let n_out = 2usize.pow(n_bases as u32);
    let mut povm = vec![ComplexMatrix::zeros(d, d); n_out];
    for code in 0..4usize.pow(pairs as u32) {
        let mut v = vec![C64::new(1.0, 0.0)];
        let mut bits = vec![0usize; n_bases];
        for p in 0..pairs {
            let k = (code >> (2 * (pairs - 1 - p))) & 3;
            let bv: Vec<C64> = bell[k].iter().map(|&x| C64::new(x, 0.0)).collect();
            v = crate::matcore::kron_vec(&v, &bv);
            for (b, bit) in bits.iter_mut().enumerate() {
                *bit ^= parity[k][b];
            }
        }
        let o: usize = bits.iter().enumerate().map(|(b, &y)| y << b).sum();
        povm[o] = &povm[o] + &ComplexMatrix::outer(&v, &v);
    }
    Ok(povm)
}

/// Orthogonal projectors Π_j with Σ Π_j = I.
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    blocks: Vec<HermitianMatrix>,
    dims: Vec<usize>,
}

impl BlockDecomposition {
    fn from_vectors(groups: Vec<Vec<Vec<C64>>>) -> Self {
        let dims = groups.iter().map(|g| g.len()).collect();
        let blocks = groups
            .iter()
            .map(|g| {
                let d = g[0].len();
                let mut p = ComplexMatrix::zeros(d, d);
                for v in g {
                    p = &p + &ComplexMatrix::outer(v, v);
                }
                HermitianMatrix::from_any(&p)
            })
            .collect();
        Self { blocks, dims }
    }

    pub fn blocks(&self) -> &[HermitianMatrix] {
        &self.blocks
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn max_dim(&self) -> usize {
        self.dims.iter().copied().max().unwrap_or(0)
    }

    /// max |Π_jΠ_k − δ_jkΠ_j| and |ΣΠ_j − I|.
    pub fn orthogonality_residual(&self) -> f64 {
        let d = self.blocks.first().map_or(0, |b| b.dim());
        let mut worst: f64 = 0.0;
        let mut sum = ComplexMatrix::zeros(d, d);
        for (j, a) in self.blocks.iter().enumerate() {
            sum = &sum + a.matrix();
            for (k, b) in self.blocks.iter().enumerate() {
                let prod = a.matmul(b);
                let want = if j == k { a.matrix().clone() } else { ComplexMatrix::zeros(d, d) };
                worst = worst.max(prod.max_abs_diff(&want));
            }
        }
        worst.max(sum.max_abs_diff(&ComplexMatrix::identity(d)))
    }

    /// max over inputs of |P − Σ_j Π_j P Π_j|.
    pub fn pinching_residual(&self, projectors: &[HermitianMatrix]) -> f64 {
        projectors
            .iter()
            .map(|p| {
                let d = p.dim();
                let mut acc = ComplexMatrix::zeros(d, d);
                for b in &self.blocks {
                    acc = &acc + &b.matmul(p).matmul(b);
                }
                acc.max_abs_diff(p)
            })
            .fold(0.0, f64::max)
    }

    /// max over inputs and blocks of |[Π_j, P]|.
    pub fn commutation_residual(&self, projectors: &[HermitianMatrix]) -> f64 {
        let mut worst: f64 = 0.0;
        for p in projectors {
            for b in &self.blocks {
                worst = worst.max(b.commutator(p).max_abs());
            }
        }
        worst
    }
}

fn check_projector(p: &HermitianMatrix) -> Result<()> {
    if p.matmul(p).max_abs_diff(p) > PROJ_TOL {
        return invalid("input is not a projector");
    }
    Ok(())
}

/// Minimal storage and the commutant block structure.
#[derive(Debug, Clone)]
pub struct StorageResult {
    pub q: usize,
    pub decomposition: BlockDecomposition,
    pub commutant_dim: usize,
    pub commutation_residual: f64,
}

fn hermitian_basis(d: usize) -> Vec<ComplexMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    for j in 0..d {
        let mut e = ComplexMatrix::zeros(d, d);
        e[(j, j)] = C64::new(1.0, 0.0);
        out.push(e);
    }
    for j in 0..d {
        for k in (j + 1)..d {
            let mut re = ComplexMatrix::zeros(d, d);
            re[(j, k)] = C64::new(s, 0.0);
            re[(k, j)] = C64::new(s, 0.0);
            out.push(re);
            let mut im = ComplexMatrix::zeros(d, d);
            im[(j, k)] = C64::new(0.0, -s);
            im[(k, j)] = C64::new(0.0, s);
            out.push(im);
        }
    }
    out
}

/// Hermitian basis of the commutant {X : [X, P] = 0 for all P}.
///
/// The commutant is the null space of X ↦ Σ_P [P,[P,X]], a positive
/// semidefinite map on Hermitian matrices.
pub fn commutant_basis(ops: &[HermitianMatrix]) -> Result<Vec<ComplexMatrix>> {
    let d = ops.first().map_or(0, |p| p.dim());
    if d == 0 || d > 16 {
        return invalid("commutant computation needs 1 ≤ dim ≤ 16");
    }
    if ops.iter().any(|p| p.dim() != d) {
        return dim_err("operators of different dimensions");
    }
    let basis = hermitian_basis(d);
    let images: Vec<ComplexMatrix> = basis
        .iter()
        .map(|x| {
            let mut acc = ComplexMatrix::zeros(d, d);
            for p in ops {
                let c = p.commutator(x);
                acc = &acc + &p.commutator(&c);
            }
            acc
        })
        .collect();
    let n = basis.len();
    let l = RealMatrix::from_fn(n, |a, b| basis[a].trace_product(&images[b]).re);
    let (vals, vecs) = jacobi_symmetric(&l);
    let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    Ok((0..n)
        .filter(|&k| vals[k] < 1e-9 * scale)
        .map(|k| {
            let mut x = ComplexMatrix::zeros(d, d);
            for (a, h) in basis.iter().enumerate() {
                x = &x + &h.scale(vecs.get(a, k));
            }
            x
        })
        .collect())
}

fn eigen_clusters(e: &Eigen, tol: f64) -> Vec<Vec<Vec<C64>>> {
    let mut groups: Vec<Vec<Vec<C64>>> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for (k, &l) in e.values.iter().enumerate() {
        if groups.is_empty() || l - last > tol {
            groups.push(Vec::new());
        }
        groups.last_mut().expect("nonempty").push(e.vector(k));
        last = l;
    }
    groups
}

/// Minimal qubits q with 2^q ≥ max_j dim J_j for the algebra generated by the projectors.
///
/// `projectors[b][y]` is P_{yb}; within each basis the projectors must be orthogonal.
pub fn min_storage(projectors: &[Vec<HermitianMatrix>], seed: u64) -> Result<StorageResult> {
    let all: Vec<HermitianMatrix> = projectors.iter().flatten().cloned().collect();
    if all.is_empty() {
        return invalid("no projectors given");
    }
    for group in projectors {
        for (i, p) in group.iter().enumerate() {
            check_projector(p)?;
            for q in &group[i + 1..] {
                if p.matmul(q).max_abs() > PROJ_TOL {
                    return invalid("projectors of one basis are not orthogonal");
                }
            }
        }
    }
    let d = all[0].dim();
    let comm = commutant_basis(&all)?;
    let mut r = rng(seed);
    let mut x = ComplexMatrix::zeros(d, d);
    for c in &comm {
        x = &x + &c.scale(r.random_range(-1.0..1.0));
    }
    let e = HermitianMatrix::from_any(&x).eig();
    let spread = e.values.last().copied().unwrap_or(0.0) - e.values.first().copied().unwrap_or(0.0);
    let mut groups = eigen_clusters(&e, 1e-7 * spread.max(1.0));
    // refine with a second random element restricted to each cluster
    let mut y = ComplexMatrix::zeros(d, d);
    for c in &comm {
        y = &y + &c.scale(r.random_range(-1.0..1.0));
    }
    let mut refined = Vec::new();
    for g in groups.drain(..) {
        let k = g.len();
        if k == 1 {
            refined.push(g);
            continue;
        }
        let v = ComplexMatrix::from_columns(&g);
        let sub = HermitianMatrix::from_any(&v.adjoint().matmul(&y).matmul(&v)).eig();
        let sub_spread = sub.values.last().copied().unwrap_or(0.0) - sub.values.first().copied().unwrap_or(0.0);
        for cluster in eigen_clusters(&sub, 1e-7 * sub_spread.max(1.0)) {
            refined.push(cluster.iter().map(|w| v.mul_vec(w)).collect());
        }
    }
    let decomposition = BlockDecomposition::from_vectors(refined);
    let max_dim = decomposition.max_dim();
    let q = (max_dim as f64).log2().ceil() as usize;
    let commutation_residual = decomposition.commutation_residual(&all);
    if commutation_residual > 1e-7 {
        return Err(Error::NotConverged(format!("block projectors fail to commute ({commutation_residual:.2e})")));
    }
    Ok(StorageResult { q, decomposition, commutant_dim: comm.len(), commutation_residual })
}

/// Blocks of rank ≤ 2 reducing both projectors, from the SVD of the off-diagonal block.
pub fn two_basis_decomposition(p00: &HermitianMatrix, p01: &HermitianMatrix) -> Result<BlockDecomposition> {
    check_projector(p00)?;
    check_projector(p01)?;
    if p00.dim() != p01.dim() {
        return dim_err("projectors of different dimensions");
    }
    let d = p00.dim();
    let e = p00.eig();
    let (mut v0, mut v1) = (Vec::new(), Vec::new());
    for k in 0..d {
        if e.values[k] > 0.5 {
            v0.push(e.vector(k))
        } else {
            v1.push(e.vector(k))
        }
    }
    let frame = |vs: &[Vec<C64>]| ComplexMatrix::from_columns(vs);
    let mut groups: Vec<Vec<Vec<C64>>> = Vec::new();
    let mut used_q: Vec<Vec<C64>> = Vec::new();
    if !v0.is_empty() {
        let f0 = frame(&v0);
        let a00 = f0.adjoint().matmul(p01).matmul(&f0);
        let (a01, f1) = if v1.is_empty() {
            (None, None)
        } else {
            let f1 = frame(&v1);
            (Some(f0.adjoint().matmul(p01).matmul(&f1)), Some(f1))
        };
        let left = match &a01 {
            Some(a) => HermitianMatrix::from_any(&a.matmul(&a.adjoint())).eig(),
            None => HermitianMatrix::zeros(v0.len()).eig(),
        };
        for cluster in eigen_clusters(&left, 1e-8) {
            let w = ComplexMatrix::from_columns(&cluster);
            let inner = HermitianMatrix::from_any(&w.adjoint().matmul(&a00).matmul(&w)).eig();
            for k in 0..cluster.len() {
                let wk = w.mul_vec(&inner.vector(k));
                let top = f0.mul_vec(&wk);
                let sigma2 = inner.values[k] - inner.values[k] * inner.values[k];
                match (&a01, &f1) {
                    (Some(a), Some(f1)) if sigma2 > 1e-12 => {
                        let sigma = sigma2.sqrt();
                        let qk: Vec<C64> = a.adjoint().mul_vec(&wk).iter().map(|z| z / sigma).collect();
                        used_q.push(qk.clone());
                        groups.push(vec![top, f1.mul_vec(&qk)]);
                    }
                    _ => groups.push(vec![top]),
                }
            }
        }
    }
    if !v1.is_empty() {
        let f1 = frame(&v1);
        let r = v1.len();
        // orthonormal complement of the used q_k inside the V1 frame
        let mut proj = ComplexMatrix::identity(r);
        for q in &used_q {
            proj = &proj - &ComplexMatrix::outer(q, q);
        }
        let pe = HermitianMatrix::from_any(&proj).eig();
        let comp: Vec<Vec<C64>> = (0..r).filter(|&k| pe.values[k] > 0.5).map(|k| pe.vector(k)).collect();
        if !comp.is_empty() {
            let c = ComplexMatrix::from_columns(&comp);
            let a11 = f1.adjoint().matmul(p01).matmul(&f1);
            let sub = HermitianMatrix::from_any(&c.adjoint().matmul(&a11).matmul(&c)).eig();
            for k in 0..comp.len() {
                groups.push(vec![f1.mul_vec(&c.mul_vec(&sub.vector(k)))]);
            }
        }
    }
    let dec = BlockDecomposition::from_vectors(groups);
    let resid = dec.pinching_residual(&[p00.clone(), p01.clone()]).max(dec.orthogonality_residual());
    if resid > 1e-7 {
        return Err(Error::NotConverged(format!("decomposition residual {resid:.2e}")));
    }
    Ok(dec)
}

/// Three bases on two qubits whose projectors generate the full matrix algebra.
///
/// With f the first bit, |x⟩ = |0⟩|x̂⟩, |s_x⟩ = |1⟩|x̂⟩, |u_x⟩ = |0⟩H|x̂⟩, |v_x⟩ = |1⟩H|x̂⟩,
/// U₁ rotates each pair (|x⟩, |s_x⟩) and U₂ each pair (|u_x⟩, |v_x⟩) by angles with cosines a_x.
pub fn three_basis_construction(a: [f64; 2]) -> Result<Vec<Vec<HermitianMatrix>>> {
    if a.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return invalid("rotation cosines must lie in [0,1]");
    }
    let h = gates::hadamard();
    let ket = |hi: usize, lo: Vec<C64>| {
        let mut e = vec![C64::new(0.0, 0.0); 2];
        e[hi] = C64::new(1.0, 0.0);
        crate::matcore::kron_vec(&e, &lo)
    };
    let comp = |k: usize| crate::matcore::basis_vector(2, k);
    let rotation = |pairs: &[(Vec<C64>, Vec<C64>)]| {
        let mut u = ComplexMatrix::zeros(4, 4);
        for ((p, q), &ax) in pairs.iter().zip(&a) {
            let sx = (1.0 - ax * ax).sqrt();
            u = &u + &(&ComplexMatrix::outer(p, p) + &ComplexMatrix::outer(q, q)).scale(ax);
            u = &u + &(&ComplexMatrix::outer(p, q) - &ComplexMatrix::outer(q, p)).scale(sx);
        }
        u
    };
    let u1 = rotation(&[(ket(0, comp(0)), ket(1, comp(0))), (ket(0, comp(1)), ket(1, comp(1)))]);
    let u2 = rotation(&[
        (ket(0, h.mul_vec(&comp(0))), ket(1, h.mul_vec(&comp(0)))),
        (ket(0, h.mul_vec(&comp(1))), ket(1, h.mul_vec(&comp(1)))),
    ]);
    let p00 = &ComplexMatrix::outer(&ket(0, comp(0)), &ket(0, comp(0)))
        + &ComplexMatrix::outer(&ket(0, comp(1)), &ket(0, comp(1)));
    let id = ComplexMatrix::identity(4);
    Ok([id.clone(), u1, u2]
        .iter()
        .map(|u| {
            let p0 = p00.conjugate_by(u);
            let p1 = &id - &p0;
            vec![HermitianMatrix::from_any(&p0), HermitianMatrix::from_any(&p1)]
        })
        .collect())
}
