//! Mutually unbiased bases and Jordan–Wigner Clifford generators.

use std::f64::consts::PI;

use serde_json::json;

use crate::error::{dim_err, invalid, Result};
use crate::matcore::{gates, inner, ComplexMatrix, DensityMatrix, HermitianMatrix, PureState, C64};

pub const UNBIASED_TOL: f64 = 1e-8;

/// Orthonormal basis {|b_k⟩} of C^d.
#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    vectors: Vec<PureState>,
}

impl OrthonormalBasis {
    pub fn new(vectors: Vec<PureState>) -> Result<Self> {
        let d = vectors.first().map(|v| v.dim()).unwrap_or(0);
        if d == 0 || vectors.len() != d {
            return dim_err(format!("{} vectors do not form a basis of dimension {d}", vectors.len()));
        }
        for (i, u) in vectors.iter().enumerate() {
            if u.dim() != d {
                return dim_err("basis vectors of different dimensions");
            }
            for v in &vectors[i + 1..] {
                let ip = inner(u.amplitudes(), v.amplitudes()).norm();
                if ip > 1e-9 {
                    return invalid(format!("basis vectors overlap by {ip:.3e}"));
                }
            }
        }
        Ok(Self { vectors })
    }

    pub fn computational(d: usize) -> Self {
        Self { vectors: (0..d).map(|k| PureState::basis(d, k)).collect() }
    }

    /// Basis formed by the columns of a unitary.
    pub fn from_unitary(u: &ComplexMatrix) -> Result<Self> {
        let cols: Result<Vec<PureState>> = (0..u.cols()).map(|j| PureState::new(u.column(j))).collect();
        Self::new(cols?)
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[PureState] {
        &self.vectors
    }

    /// Unitary with the basis vectors as columns.
    pub fn unitary(&self) -> ComplexMatrix {
        let cols: Vec<Vec<C64>> = self.vectors.iter().map(|v| v.amplitudes().to_vec()).collect();
        ComplexMatrix::from_columns(&cols)
    }

    /// |b_k⟩⟨b_k|
    pub fn projector(&self, k: usize) -> ComplexMatrix {
        let v = self.vectors[k].amplitudes();
        ComplexMatrix::outer(v, v)
    }

    /// |⟨b_k|ψ⟩|² for every k.
    pub fn overlaps(&self, psi: &[C64]) -> Vec<f64> {
        self.vectors.iter().map(|b| inner(b.amplitudes(), psi).norm_sqr()).collect()
    }

    /// ⟨b_k|ρ|b_k⟩ for every k.
    pub fn probabilities(&self, rho: &ComplexMatrix) -> Vec<f64> {
        self.vectors
            .iter()
            .map(|b| {
                let v = b.amplitudes();
                inner(v, &rho.mul_vec(v)).re
            })
            .collect()
    }

    /// Basis {u ⊗ v} in lexicographic order.
    pub fn kron(&self, other: &Self) -> Self {
        let mut vectors = Vec::with_capacity(self.dim() * other.dim());
        for u in &self.vectors {
            for v in &other.vectors {
                vectors.push(u.kron(v));
            }
        }
        Self { vectors }
    }

    pub fn conj(&self) -> Self {
        let vectors = self
            .vectors
            .iter()
            .map(|v| PureState::from_trusted(v.amplitudes().iter().map(|z| z.conj()).collect()))
            .collect();
        Self { vectors }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let vecs: Vec<_> = self
            .vectors
            .iter()
            .map(|v| {
                let re: Vec<f64> = v.amplitudes().iter().map(|z| z.re).collect();
                let im: Vec<f64> = v.amplitudes().iter().map(|z| z.im).collect();
                json!({ "re": re, "im": im })
            })
            .collect();
        serde_json::Value::Array(vecs)
    }
}

/// Worst deviation found by [`check_mutually_unbiased`].
#[derive(Debug, Clone, PartialEq)]
pub struct UnbiasedReport {
    pub unbiased: bool,
    pub worst_deviation: f64,
    pub worst_pair: Option<(usize, usize)>,
}

/// Checks |⟨b^t_k|b^{t'}_l⟩| = 1/√d for every pair of distinct bases.
pub fn check_mutually_unbiased(bases: &[OrthonormalBasis], tol: f64) -> UnbiasedReport {
    let mut worst = 0.0;
    let mut worst_pair = None;
    let d = bases.first().map(|b| b.dim()).unwrap_or(0);
    let target = 1.0 / (d as f64).sqrt();
    for (t, a) in bases.iter().enumerate() {
        for (u, b) in bases.iter().enumerate().skip(t + 1) {
            if a.dim() != d || b.dim() != d {
                return UnbiasedReport { unbiased: false, worst_deviation: f64::INFINITY, worst_pair: Some((t, u)) };
            }
            for x in a.vectors() {
                for y in b.vectors() {
                    let dev = (inner(x.amplitudes(), y.amplitudes()).norm() - target).abs();
                    if dev > worst {
                        worst = dev;
                        worst_pair = Some((t, u));
                    }
                }
            }
        }
    }
    UnbiasedReport { unbiased: worst <= tol, worst_deviation: worst, worst_pair }
}

/// Set of pairwise mutually unbiased bases.
#[derive(Debug, Clone)]
pub struct MubSet {
    bases: Vec<OrthonormalBasis>,
}

impl MubSet {
    pub fn new(bases: Vec<OrthonormalBasis>) -> Result<Self> {
        if bases.is_empty() {
            return invalid("empty basis set");
        }
        let d = bases[0].dim();
        if bases.iter().any(|b| b.dim() != d) {
            return dim_err("bases of different dimensions");
        }
        let report = check_mutually_unbiased(&bases, UNBIASED_TOL);
        if !report.unbiased {
            return invalid(format!(
                "bases {:?} are not mutually unbiased (deviation {:.3e})",
                report.worst_pair, report.worst_deviation
            ));
        }
        Ok(Self { bases })
    }

    pub fn bases(&self) -> &[OrthonormalBasis] {
        &self.bases
    }

    pub fn dim(&self) -> usize {
        self.bases[0].dim()
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    /// The bases at the given indices.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.iter().any(|&i| i >= self.bases.len()) {
            return invalid("basis index out of range");
        }
        Ok(Self { bases: indices.iter().map(|&i| self.bases[i].clone()).collect() })
    }

    /// First `m` bases.
    pub fn take(&self, m: usize) -> Result<Self> {
        self.subset(&(0..m).collect::<Vec<_>>())
    }

    /// {B_t ⊗ B_t*}: product bases in dimension d².
    pub fn conjugate_product(&self) -> Self {
        Self { bases: self.bases.iter().map(|b| b.kron(&b.conj())).collect() }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::Value::Array(self.bases.iter().map(|b| b.to_json_value()).collect())
    }
}

/// {computational, H^⊗n, K^⊗n} in dimension 2ⁿ.
pub fn standard_bases(n: usize) -> Result<MubSet> {
    if n == 0 || n > 8 {
        return invalid(format!("qubit count {n} outside 1..=8"));
    }
    let d = 1 << n;
    let h = gates::tensor_power(&gates::hadamard(), n);
    let k = gates::tensor_power(&gates::k_gate(), n);
    MubSet::new(vec![
        OrthonormalBasis::computational(d),
        OrthonormalBasis::from_unitary(&h)?,
        OrthonormalBasis::from_unitary(&k)?,
    ])
}

/// s × s grid over symbols 0..s whose symbol classes each hold s cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatinSquare {
    s: usize,
    cells: Vec<usize>,
}

impl LatinSquare {
    /// Rows and columns must each be permutations of 0..s.
    pub fn new(s: usize, cells: Vec<usize>) -> Result<Self> {
        let sq = Self::unchecked(s, cells)?;
        for i in 0..s {
            let mut row = vec![false; s];
            let mut col = vec![false; s];
            for j in 0..s {
                row[sq.get(i, j)] = true;
                col[sq.get(j, i)] = true;
            }
            if row.iter().chain(&col).any(|seen| !seen) {
                return invalid(format!("row or column {i} is not a permutation"));
            }
        }
        Ok(sq)
    }

    fn unchecked(s: usize, cells: Vec<usize>) -> Result<Self> {
        if s == 0 || cells.len() != s * s {
            return dim_err(format!("{} cells for side {s}", cells.len()));
        }
        if cells.iter().any(|&c| c >= s) {
            return invalid("symbol out of range");
        }
        Ok(Self { s, cells })
    }

    /// Whitespace-separated grid of integers 1..s, one row per line.
    pub fn parse(text: &str) -> Result<Self> {
        let rows: Vec<Vec<usize>> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split_whitespace()
                    .map(|t| t.parse::<usize>().map_err(|e| crate::Error::Invalid(format!("bad cell {t:?}: {e}"))))
                    .collect()
            })
            .collect::<Result<_>>()?;
        let s = rows.len();
        if rows.iter().any(|r| r.len() != s) {
            return dim_err("Latin square must be s × s");
        }
        if rows.iter().flatten().any(|&c| c == 0) {
            return invalid("symbols are numbered from 1");
        }
        Self::new(s, rows.into_iter().flatten().map(|c| c - 1).collect())
    }

    /// L_ij = (i + j) mod s
    pub fn cyclic(s: usize) -> Self {
        Self::multiplier(s, 1)
    }

    /// L_ij = (a·i + j) mod s; Latin when gcd(a, s) = 1.
    pub fn multiplier(s: usize, a: usize) -> Self {
        Self { s, cells: (0..s * s).map(|c| (a * (c / s) + c % s) % s).collect() }
    }

    /// L_ij = i
    pub fn rows_square(s: usize) -> Self {
        Self { s, cells: (0..s * s).map(|c| c / s).collect() }
    }

    /// L_ij = j
    pub fn columns_square(s: usize) -> Self {
        Self { s, cells: (0..s * s).map(|c| c % s).collect() }
    }

    pub fn side(&self) -> usize {
        self.s
    }

    pub fn get(&self, i: usize, j: usize) -> usize {
        self.cells[i * self.s + j]
    }

    /// Every ordered symbol pair occurs exactly once.
    pub fn is_orthogonal_to(&self, other: &Self) -> bool {
        if self.s != other.s {
            return false;
        }
        let s = self.s;
        let mut seen = vec![false; s * s];
        for (a, b) in self.cells.iter().zip(&other.cells) {
            let k = a * s + b;
            if seen[k] {
                return false;
            }
            seen[k] = true;
        }
        true
    }

    /// Cells carrying `symbol`, in row-major order.
    fn cells_of(&self, symbol: usize) -> Vec<usize> {
        (0..self.s * self.s).filter(|&c| self.cells[c] == symbol).collect()
    }
}

/// ω^k with ω = e^{2πi/d}, reduced per power.
fn root_of_unity(k: i64, d: usize) -> C64 {
    let r = k.rem_euclid(d as i64) as f64;
    C64::from_polar(1.0, 2.0 * PI * r / d as f64)
}

fn square_basis(sq: &LatinSquare) -> Result<OrthonormalBasis> {
    let s = sq.s;
    let norm = 1.0 / (s as f64).sqrt();
    let mut vectors = Vec::with_capacity(s * s);
    for symbol in 0..s {
        let cells = sq.cells_of(symbol);
        if cells.len() != s {
            return invalid(format!("symbol {symbol} occurs {} times", cells.len()));
        }
        for t in 0..s {
            let mut v = vec![C64::new(0.0, 0.0); s * s];
            for (k, &c) in cells.iter().enumerate() {
                v[c] = root_of_unity((t * k) as i64, s) * norm;
            }
            vectors.push(PureState::from_trusted(v));
        }
    }
    OrthonormalBasis::new(vectors)
}

/// MUBs in dimension s² from mutually orthogonal Latin squares.
///
/// Basis vector ℓ·s + t is s^{−½} Σ_k ω^{tk} |c_k⟩ over the cells c_k carrying symbol ℓ.
/// With `with_row_column` the row and column squares are prepended.
pub fn latin_square_mub(squares: &[LatinSquare], s: usize, with_row_column: bool) -> Result<MubSet> {
    let mut all = Vec::new();
    if with_row_column {
        all.push(LatinSquare::rows_square(s));
        all.push(LatinSquare::columns_square(s));
    }
    for sq in squares {
        if sq.side() != s {
            return dim_err(format!("square of side {} given for s = {s}", sq.side()));
        }
        all.push(LatinSquare::new(s, sq.cells.clone())?);
    }
    if all.is_empty() {
        return invalid("no squares given");
    }
    for (i, a) in all.iter().enumerate() {
        for b in &all[i + 1..] {
            if !a.is_orthogonal_to(b) {
                return invalid("squares are not mutually orthogonal");
            }
        }
    }
    MubSet::new(all.iter().map(square_basis).collect::<Result<_>>()?)
}

/// s + 1 MUBs in dimension s² for prime s, from the squares (a·i + j) mod s.
pub fn latin_square_mub_prime(s: usize) -> Result<MubSet> {
    if !is_prime(s) {
        return invalid(format!("{s} is not prime"));
    }
    let squares: Vec<LatinSquare> = (1..s).map(|a| LatinSquare::multiplier(s, a)).collect();
    latin_square_mub(&squares, s, true)
}

pub fn is_prime(d: usize) -> bool {
    d >= 2 && (2..).take_while(|k| k * k <= d).all(|k| !d.is_multiple_of(k))
}

/// Generalised Pauli X_d|k⟩ = |k+1⟩.
pub fn shift(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |i, j| if i == (j + 1) % d { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

/// Generalised Pauli Z_d|k⟩ = ω^k|k⟩.
pub fn clock(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |i, j| if i == j { root_of_unity(i as i64, d) } else { C64::new(0.0, 0.0) })
}

/// Eigenbasis of X_d Z_d^k, ordered by eigenphase.
fn shift_clock_basis(d: usize, k: usize) -> Result<OrthonormalBasis> {
    // a_m = exp(iπ N/d) with N = k m(m−1) − m k(d−1) − 2mj
    let norm = 1.0 / (d as f64).sqrt();
    let two_d = 2 * d as i64;
    let vectors = (0..d)
        .map(|j| {
            let v = (0..d)
                .map(|m| {
                    let (m, k, j, di) = (m as i64, k as i64, j as i64, d as i64);
                    let n = (k * m * (m - 1) - m * k * (di - 1) - 2 * m * j).rem_euclid(two_d);
                    C64::from_polar(norm, PI * n as f64 / d as f64)
                })
                .collect();
            PureState::from_trusted(v)
        })
        .collect();
    OrthonormalBasis::new(vectors)
}

/// d + 1 MUBs: eigenbases of Z_d, X_d, X_dZ_d, …, X_dZ_d^{d−1}.
pub fn pauli_mub(d: usize) -> Result<MubSet> {
    if !is_prime(d) || d > 31 {
        return invalid(format!("{d} is not a prime ≤ 31"));
    }
    let mut bases = vec![OrthonormalBasis::computational(d)];
    for k in 0..d {
        bases.push(shift_clock_basis(d, k)?);
    }
    MubSet::new(bases)
}

/// Γ₁…Γ_{2n} from the Jordan–Wigner construction, with Γ₀ = iⁿΓ₁⋯Γ_{2n}.
#[derive(Debug, Clone)]
pub struct CliffordGenerators {
    n: usize,
    gammas: Vec<HermitianMatrix>,
    gamma0: HermitianMatrix,
}

pub fn clifford_generators(n: usize) -> Result<CliffordGenerators> {
    if !(1..=5).contains(&n) {
        return invalid(format!("qubit count {n} outside 1..=5"));
    }
    let [x, y, z] = gates::paulis();
    let id = ComplexMatrix::identity(2);
    let string = |j: usize, mid: &ComplexMatrix| {
        let mut f = vec![y.clone(); j];
        f.push(mid.clone());
        f.extend(std::iter::repeat_n(id.clone(), n - j - 1));
        HermitianMatrix::from_any(&ComplexMatrix::kron_all(&f))
    };
    let mut gammas = Vec::with_capacity(2 * n);
    for j in 0..n {
        gammas.push(string(j, &x));
        gammas.push(string(j, &z));
    }
    let mut prod = ComplexMatrix::identity(1 << n);
    for g in &gammas {
        prod = prod.matmul(g);
    }
    let phase = C64::new(0.0, 1.0).powu(n as u32);
    let gamma0 = HermitianMatrix::new(prod.scale_c(phase))?;
    Ok(CliffordGenerators { n, gammas, gamma0 })
}

impl CliffordGenerators {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// Γ₁…Γ_{2n}.
    pub fn gammas(&self) -> &[HermitianMatrix] {
        &self.gammas
    }

    pub fn gamma0(&self) -> &HermitianMatrix {
        &self.gamma0
    }

    /// Γ_j for j ∈ 0..=2n.
    pub fn gamma(&self, j: usize) -> &HermitianMatrix {
        if j == 0 {
            &self.gamma0
        } else {
            &self.gammas[j - 1]
        }
    }

    /// Γ₁, …, Γ_K, with Γ₀ appended when K = 2n + 1.
    pub fn observables(&self, k: usize) -> Result<Vec<HermitianMatrix>> {
        if k == 0 || k > 2 * self.n + 1 {
            return invalid(format!("K = {k} outside 1..={}", 2 * self.n + 1));
        }
        let mut obs: Vec<HermitianMatrix> = self.gammas.iter().take(k).cloned().collect();
        if k == 2 * self.n + 1 {
            obs.push(self.gamma0.clone());
        }
        Ok(obs)
    }
}

fn check_dim(rho: &DensityMatrix, g: &CliffordGenerators) -> Result<()> {
    if rho.dim() != g.dim() {
        return dim_err(format!("state dim {} vs generators dim {}", rho.dim(), g.dim()));
    }
    Ok(())
}

/// (g₀, g₁, …, g_{2n}) with g_j = Tr(ρΓ_j).
pub fn vector_components(rho: &DensityMatrix, g: &CliffordGenerators) -> Result<Vec<f64>> {
    check_dim(rho, g)?;
    Ok((0..=2 * g.n).map(|j| rho.expectation(g.gamma(j))).collect())
}

/// (I + Σ_{j=0}^{2n} g_jΓ_j)/d
pub fn project_vector_part(rho: &DensityMatrix, g: &CliffordGenerators) -> Result<DensityMatrix> {
    let comps = vector_components(rho, g)?;
    let out = vector_state(&comps, g)?;
    DensityMatrix::new(out.into_matrix())
}

/// σ = (I + Σ g_jΓ_j)/d for a given component vector, without positivity checks.
pub fn vector_state(comps: &[f64], g: &CliffordGenerators) -> Result<HermitianMatrix> {
    if comps.len() != 2 * g.n + 1 {
        return dim_err(format!("{} components for {} generators", comps.len(), 2 * g.n + 1));
    }
    let d = g.dim();
    let mut m = ComplexMatrix::identity(d);
    for (j, &c) in comps.iter().enumerate() {
        m = &m + &g.gamma(j).scale(c);
    }
    Ok(HermitianMatrix::from_any(&m.scale(1.0 / d as f64)))
}

/// Observables X_s = Σ_j x_s^j Γ_j and Y_t = Σ_j y_t^j Γ_jᵀ with the maximally entangled state.
#[derive(Debug, Clone)]
pub struct VectorStrategy {
    pub alice: Vec<HermitianMatrix>,
    pub bob: Vec<HermitianMatrix>,
    pub state: PureState,
}

impl VectorStrategy {
    /// ⟨Ψ|X_s ⊗ Y_t|Ψ⟩
    pub fn correlation(&self, s: usize, t: usize) -> f64 {
        let op = self.alice[s].kron(&self.bob[t]);
        let psi = self.state.amplitudes();
        inner(psi, &op.mul_vec(psi)).re
    }
}

/// Builds observables reproducing x_s·y_t as quantum correlations.
pub fn observables_from_vectors(xs: &[Vec<f64>], ys: &[Vec<f64>]) -> Result<VectorStrategy> {
    let big_n = xs.iter().chain(ys).map(|v| v.len()).max().unwrap_or(0);
    if big_n == 0 || big_n > 10 {
        return invalid(format!("vector length {big_n} outside 1..=10"));
    }
    if xs.iter().chain(ys).any(|v| v.len() != big_n) {
        return dim_err("vectors of different lengths");
    }
    for v in xs.iter().chain(ys) {
        let nv: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (nv - 1.0).abs() > 1e-8 {
            return invalid(format!("vector of norm {nv} is not a unit vector"));
        }
    }
    let n = (big_n / 2).max(1);
    let gens = clifford_generators(n)?;
    let basis: Vec<&HermitianMatrix> = (1..=big_n).map(|j| gens.gamma(if j <= 2 * n { j } else { 0 })).collect();
    let d = gens.dim();
    let combine = |v: &Vec<f64>, transpose: bool| {
        let mut m = ComplexMatrix::zeros(d, d);
        for (c, g) in v.iter().zip(&basis) {
            let g = if transpose { g.transpose() } else { (*g).matrix().clone() };
            m = &m + &g.scale(*c);
        }
        HermitianMatrix::from_any(&m)
    };
    Ok(VectorStrategy {
        alice: xs.iter().map(|v| combine(v, false)).collect(),
        bob: ys.iter().map(|v| combine(v, true)).collect(),
        state: PureState::maximally_entangled(d),
    })
}
