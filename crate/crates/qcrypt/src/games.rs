//! Two-player XOR games: classical and quantum values, strategies, and
//! random-access-code dimension bounds.

use serde_json::{json, Value};

use crate::entropy::{binary_entropy, shannon, ProbDist};
use crate::error::{dim_err, invalid, Error, Result};
use crate::sdpsolve::{gram_factorize, gram_problem, solve, verify_certificate, CertificateReport, SdpSolution};

const MAX_CLASSICAL_QUESTIONS: usize = 16;
const MAX_QUANTUM_QUESTIONS: usize = 64;

/// Game G(V, π) whose predicate depends only on c = a ⊕ b.
#[derive(Debug, Clone, PartialEq)]
pub struct XorGame {
    pi: Vec<Vec<f64>>,
    /// v[c][s][t] = V(c|s,t)
    v: [Vec<Vec<bool>>; 2],
}

impl XorGame {
    pub fn new(pi: Vec<Vec<f64>>, v0: Vec<Vec<bool>>, v1: Vec<Vec<bool>>) -> Result<Self> {
        let ns = pi.len();
        let nt = pi.first().map_or(0, |r| r.len());
        if ns == 0 || nt == 0 {
            return dim_err("game needs at least one question per player");
        }
        let rect = |m: &[Vec<bool>]| m.len() == ns && m.iter().all(|r| r.len() == nt);
        if pi.iter().any(|r| r.len() != nt) || !rect(&v0) || !rect(&v1) {
            return dim_err("π and V must all be nS × nT");
        }
        if pi.iter().flatten().any(|p| !p.is_finite() || *p < 0.0) {
            return invalid("π must be nonnegative");
        }
        let total: f64 = pi.iter().flatten().sum();
        if (total - 1.0).abs() > 1e-9 {
            return invalid(format!("π sums to {total}"));
        }
        Ok(Self { pi, v: [v0, v1] })
    }

    /// Game with π ∝ |A| won on c = 0 where A > 0 and on c = 1 where A < 0.
    pub fn from_correlation(a: &[Vec<f64>]) -> Result<Self> {
        let total: f64 = a.iter().flatten().map(|x| x.abs()).sum();
        if total <= 0.0 || !total.is_finite() {
            return invalid("correlation matrix must have a nonzero finite entry");
        }
        let pi = a.iter().map(|r| r.iter().map(|x| x.abs() / total).collect()).collect();
        let v0 = a.iter().map(|r| r.iter().map(|&x| x >= 0.0).collect()).collect();
        let v1 = a.iter().map(|r| r.iter().map(|&x| x < 0.0).collect()).collect();
        Self::new(pi, v0, v1)
    }

    /// Uniform questions, win iff a ⊕ b = s·t.
    pub fn chsh() -> Self {
        let pi = vec![vec![0.25; 2]; 2];
        let v0 = vec![vec![true, true], vec![true, false]];
        let v1 = vec![vec![false, false], vec![false, true]];
        Self { pi, v: [v0, v1] }
    }

    pub fn chained(n: usize) -> Result<Self> {
        Self::from_correlation(&chained_matrix(n)?)
    }

    pub fn gisin(n: usize) -> Result<Self> {
        Self::from_correlation(&gisin_matrix(n)?)
    }

    /// Every answer pair wins.
    pub fn trivial(ns: usize, nt: usize) -> Result<Self> {
        let p = 1.0 / (ns * nt) as f64;
        Self::new(vec![vec![p; nt]; ns], vec![vec![true; nt]; ns], vec![vec![true; nt]; ns])
    }

    /// `chsh`, `chained:<n>` or `gisin:<n>`.
    pub fn builtin(name: &str) -> Result<Self> {
        let parse_n = |s: &str| s.parse::<usize>().map_err(|_| Error::Invalid(format!("bad size in {name:?}")));
        match name.split_once(':') {
            None if name == "chsh" => Ok(Self::chsh()),
            Some(("chained", n)) => Self::chained(parse_n(n)?),
            Some(("gisin", n)) => Self::gisin(parse_n(n)?),
            _ => invalid(format!("unknown game {name:?}")),
        }
    }

    pub fn ns(&self) -> usize {
        self.pi.len()
    }

    pub fn nt(&self) -> usize {
        self.pi[0].len()
    }

    pub fn pi(&self) -> &[Vec<f64>] {
        &self.pi
    }

    pub fn predicate(&self, c: usize, s: usize, t: usize) -> bool {
        self.v[c][s][t]
    }

    /// B_st = π(s,t)(V(0|s,t) − V(1|s,t))/2, so that win = constant + Σ B_st E_st.
    pub fn bias_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.ns())
            .map(|s| {
                (0..self.nt())
                    .map(|t| {
                        0.5 * self.pi[s][t]
                            * (f64::from(u8::from(self.v[0][s][t])) - f64::from(u8::from(self.v[1][s][t])))
                    })
                    .collect()
            })
            .collect()
    }

    /// Σ π(s,t)(V(0|s,t) + V(1|s,t))/2
    pub fn constant_term(&self) -> f64 {
        let mut acc = 0.0;
        for s in 0..self.ns() {
            for t in 0..self.nt() {
                acc +=
                    0.5 * self.pi[s][t] * (f64::from(u8::from(self.v[0][s][t])) + f64::from(u8::from(self.v[1][s][t])));
            }
        }
        acc
    }

    /// Winning probability of deterministic answers.
    pub fn deterministic_value(&self, fa: &[u8], fb: &[u8]) -> f64 {
        let mut acc = 0.0;
        for s in 0..self.ns() {
            for t in 0..self.nt() {
                if self.v[usize::from(fa[s] ^ fb[t])][s][t] {
                    acc += self.pi[s][t];
                }
            }
        }
        acc
    }

    /// Questions permuted: row s of the result is row `ps[s]` of `self`.
    pub fn relabel(&self, ps: &[usize], pt: &[usize]) -> Result<Self> {
        let ok = |p: &[usize], n: usize| {
            let mut q = p.to_vec();
            q.sort_unstable();
            q == (0..n).collect::<Vec<_>>()
        };
        if !ok(ps, self.ns()) || !ok(pt, self.nt()) {
            return invalid("relabelling must be a permutation");
        }
        let perm = |m: &Vec<Vec<bool>>| ps.iter().map(|&s| pt.iter().map(|&t| m[s][t]).collect()).collect();
        let pi = ps.iter().map(|&s| pt.iter().map(|&t| self.pi[s][t]).collect()).collect();
        Ok(Self { pi, v: [perm(&self.v[0]), perm(&self.v[1])] })
    }

    pub fn to_json_value(&self) -> Value {
        let bits = |m: &Vec<Vec<bool>>| -> Vec<Vec<u8>> {
            m.iter().map(|r| r.iter().map(|&b| u8::from(b)).collect()).collect()
        };
        json!({
            "nS": self.ns(),
            "nT": self.nt(),
            "pi": self.pi,
            "V": { "c0": bits(&self.v[0]), "c1": bits(&self.v[1]) },
        })
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let field = |k: &str| v.get(k).ok_or_else(|| Error::Invalid(format!("game JSON missing {k:?}")));
        let ns = field("nS")?.as_u64().ok_or_else(|| Error::Invalid("nS must be an integer".into()))? as usize;
        let nt = field("nT")?.as_u64().ok_or_else(|| Error::Invalid("nT must be an integer".into()))? as usize;
        let pi: Vec<Vec<f64>> = serde_json::from_value(field("pi")?.clone())?;
        let vv = field("V")?;
        let table = |k: &str| -> Result<Vec<Vec<bool>>> {
            let raw: Vec<Vec<u8>> =
                serde_json::from_value(vv.get(k).ok_or_else(|| Error::Invalid(format!("V missing {k:?}")))?.clone())?;
            if raw.iter().flatten().any(|&x| x > 1) {
                return invalid("predicate entries must be 0 or 1");
            }
            Ok(raw.into_iter().map(|r| r.into_iter().map(|x| x == 1).collect()).collect())
        };
        let g = Self::new(pi, table("c0")?, table("c1")?)?;
        if g.ns() != ns || g.nt() != nt {
            return dim_err("nS/nT disagree with the tables");
        }
        Ok(g)
    }
}

/// Chained Bell correlation matrix: A_ss = 1, A_{s+1,s} = 1, A_{0,n−1} = −1.
pub fn chained_matrix(n: usize) -> Result<Vec<Vec<f64>>> {
    if n < 2 {
        return invalid("chained game needs n ≥ 2");
    }
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        a[i][i] = 1.0;
        if i + 1 < n {
            a[i + 1][i] = 1.0;
        }
    }
    a[0][n - 1] = -1.0;
    Ok(a)
}

/// Analytic optimum of the chained correlation: vectors at angles π(2k−2)/2n and
/// π(2k−1)/2n, dual cos(π/2n)·1.
#[derive(Debug, Clone)]
pub struct ChainedCertificate {
    pub n: usize,
    pub closed_form: f64,
    pub report: CertificateReport,
}

/// Verify the analytic primal/dual pair for the chained matrix; the optimum is 2n·cos(π/2n).
pub fn chained_certificate(n: usize) -> Result<ChainedCertificate> {
    let a = chained_matrix(n)?;
    let nf = n as f64;
    let angle = |j: f64| {
        let t = std::f64::consts::PI * j / (2.0 * nf);
        vec![t.cos(), t.sin()]
    };
    let vecs: Vec<Vec<f64>> =
        (1..=n).map(|k| angle(2.0 * k as f64 - 2.0)).chain((1..=n).map(|k| angle(2.0 * k as f64 - 1.0))).collect();
    let c = (std::f64::consts::PI / (2.0 * nf)).cos();
    let report = verify_certificate(&gram_problem(&a)?, &crate::sdpsolve::gram_matrix(&vecs), &vec![c; 2 * n], 1e-9)?;
    Ok(ChainedCertificate { n, closed_form: 2.0 * nf * c, report })
}

/// A_st = +1 for s + t ≤ n − 1 (upper-left half, anti-diagonal included), −1 otherwise.
pub fn gisin_matrix(n: usize) -> Result<Vec<Vec<f64>>> {
    if n < 2 {
        return invalid("Gisin game needs n ≥ 2");
    }
    Ok((0..n).map(|s| (0..n).map(|t| if s + t < n { 1.0 } else { -1.0 }).collect()).collect())
}

/// Optimal deterministic answers f_A, f_B.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalStrategy {
    pub alice: Vec<u8>,
    pub bob: Vec<u8>,
}

/// Exact classical value; ties resolve to the lexicographically smallest (f_A, f_B).
pub fn classical_value(g: &XorGame) -> Result<(f64, ClassicalStrategy)> {
    let (ns, nt) = (g.ns(), g.nt());
    if ns > MAX_CLASSICAL_QUESTIONS || nt > MAX_CLASSICAL_QUESTIONS {
        return invalid(format!("classical brute force capped at {MAX_CLASSICAL_QUESTIONS} questions per player"));
    }
    let mut best = (f64::NEG_INFINITY, ClassicalStrategy { alice: vec![], bob: vec![] });
    for mask in 0u32..(1 << ns) {
        let fa: Vec<u8> = (0..ns).map(|s| ((mask >> (ns - 1 - s)) & 1) as u8).collect();
        let mut fb = vec![0u8; nt];
        let mut val = 0.0;
        for t in 0..nt {
            let score =
                |b: u8| -> f64 { (0..ns).filter(|&s| g.v[usize::from(fa[s] ^ b)][s][t]).map(|s| g.pi[s][t]).sum() };
            let (w0, w1) = (score(0), score(1));
            if w1 > w0 + 1e-15 {
                fb[t] = 1;
                val += w1;
            } else {
                val += w0;
            }
        }
        if val > best.0 + 1e-15 {
            best = (val, ClassicalStrategy { alice: fa, bob: fb });
        }
    }
    Ok(best)
}

/// max Σ A_st a_s b_t over signs a_s, b_t ∈ {±1}.
pub fn classical_correlation(a: &[Vec<f64>]) -> Result<f64> {
    let g = XorGame::from_correlation(a)?;
    let total: f64 = a.iter().flatten().map(|x| x.abs()).sum();
    let (v, _) = classical_value(&g)?;
    Ok((2.0 * v - 1.0) * total)
}

/// Maximum of Σ A_st x_s·y_t over unit vectors with its optimal vectors.
#[derive(Debug, Clone)]
pub struct CorrelationValue {
    pub value: f64,
    pub alice: Vec<Vec<f64>>,
    pub bob: Vec<Vec<f64>>,
    pub solution: SdpSolution,
}

/// Tsirelson bound of a correlation matrix via the Gram SDP.
pub fn correlation_bound(a: &[Vec<f64>], tol: f64) -> Result<CorrelationValue> {
    let ns = a.len();
    let nt = a.first().map_or(0, |r| r.len());
    if ns + nt > MAX_QUANTUM_QUESTIONS {
        return invalid(format!("Gram SDP capped at {MAX_QUANTUM_QUESTIONS} questions in total"));
    }
    let problem = gram_problem(a)?;
    let solution = solve(&problem, tol)?;
    let vecs = gram_factorize(&solution.primal, 1e-9)?;
    let dim = ns + nt;
    let unit: Vec<Vec<f64>> = vecs
        .into_iter()
        .map(|v| {
            let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let mut u: Vec<f64> = v.iter().map(|x| x / nv).collect();
            u.resize(dim, 0.0);
            u
        })
        .collect();
    let (alice, bob) = (unit[..ns].to_vec(), unit[ns..].to_vec());
    Ok(CorrelationValue { value: solution.primal_value, alice, bob, solution })
}

/// Classical and quantum values with their strategies.
#[derive(Debug, Clone)]
pub struct GameValue {
    pub classical: f64,
    pub quantum: f64,
    /// Optimum of Σ B_st x_s·y_t for the bias matrix B.
    pub correlation_bound: f64,
    pub classical_strategy: ClassicalStrategy,
    pub alice_vectors: Vec<Vec<f64>>,
    pub bob_vectors: Vec<Vec<f64>>,
}

/// Quantum value and optimal unit vectors of length nS + nT.
pub fn quantum_value(g: &XorGame, tol: f64) -> Result<(f64, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let cv = correlation_bound(&g.bias_matrix(), tol)?;
    Ok((g.constant_term() + cv.value, cv.alice, cv.bob))
}

pub fn game_value(g: &XorGame, tol: f64) -> Result<GameValue> {
    let (classical, classical_strategy) = classical_value(g)?;
    let cv = correlation_bound(&g.bias_matrix(), tol)?;
    Ok(GameValue {
        classical,
        quantum: g.constant_term() + cv.value,
        correlation_bound: cv.value,
        classical_strategy,
        alice_vectors: cv.alice,
        bob_vectors: cv.bob,
    })
}

/// ½ Σ π(s,t) Σ_c V(c|s,t)(1 + (−1)^c x_s·y_t)
pub fn simulate_single_prover(g: &XorGame, xs: &[Vec<f64>], ys: &[Vec<f64>]) -> Result<f64> {
    if xs.len() != g.ns() || ys.len() != g.nt() {
        return dim_err("one vector per question is required");
    }
    let dim = xs[0].len();
    if xs.iter().chain(ys).any(|v| v.len() != dim) {
        return dim_err("vectors of different lengths");
    }
    if xs.iter().chain(ys).any(|v| (v.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() > 1e-8) {
        return invalid("vectors must be unit length");
    }
    let mut acc = 0.0;
    for s in 0..g.ns() {
        for t in 0..g.nt() {
            let e: f64 = xs[s].iter().zip(&ys[t]).map(|(a, b)| a * b).sum();
            for (c, sign) in [(0, 1.0), (1, -1.0)] {
                if g.v[c][s][t] {
                    acc += 0.5 * g.pi[s][t] * (1.0 + sign * e);
                }
            }
        }
    }
    Ok(acc)
}

/// Value of the n-fold XOR composition of CHSH.
#[derive(Debug, Clone)]
pub struct CompositionValue {
    pub n: usize,
    pub value: f64,
    pub solved: Option<f64>,
    pub certificate: CertificateReport,
}

/// Correlation value of A^{⊗n}, A = [[1,1],[1,−1]], certified by G = I + W/√2ⁿ and λ = √2ⁿ/2.
pub fn xor_composition_value(n: usize) -> Result<CompositionValue> {
    if !(1..=6).contains(&n) {
        return invalid(format!("composition size {n} outside 1..=6"));
    }
    let mut a = vec![vec![1.0]];
    for _ in 0..n {
        let k = a.len();
        let mut next = vec![vec![0.0; 2 * k]; 2 * k];
        for i in 0..k {
            for j in 0..k {
                next[i][j] = a[i][j];
                next[i][j + k] = a[i][j];
                next[i + k][j] = a[i][j];
                next[i + k][j + k] = -a[i][j];
            }
        }
        a = next;
    }
    let problem = gram_problem(&a)?;
    let root = 2f64.powf(n as f64 / 2.0);
    let w = crate::sdpsolve::correlation_weights(&a);
    let d = w.rows();
    let g = crate::matcore::HermitianMatrix::from_any(
        &(&crate::matcore::ComplexMatrix::identity(d) + &w.scale(1.0 / root)),
    );
    let certificate = verify_certificate(&problem, &g, &vec![root / 2.0; d], 1e-8)?;
    let solved = if n <= 3 { Some(solve(&problem, 1e-10)?.primal_value) } else { None };
    Ok(CompositionValue { n, value: certificate.primal_value, solved, certificate })
}

fn fano_term(p: f64, alphabet: usize) -> Result<f64> {
    Ok(binary_entropy(p)? + (1.0 - p) * ((alphabet - 1) as f64).log2())
}

/// log₂ d ≥ (log|A| − h(p) − (1−p)log(|A|−1))·|S|, clamped at 0.
pub fn rac_dimension_bound(n_settings: usize, n_outcomes: usize, p: f64) -> Result<f64> {
    if n_outcomes < 2 {
        return invalid("at least two outcomes are needed");
    }
    let lo = 1.0 / n_outcomes as f64;
    if !(lo - 1e-12..=1.0).contains(&p) {
        return invalid(format!("success probability {p} outside [{lo}, 1]"));
    }
    let per = (n_outcomes as f64).log2() - fano_term(p.max(lo), n_outcomes)?;
    Ok((per * n_settings as f64).max(0.0))
}

/// m ≥ Σ_t H(X_t) − h(p_t) − (1−p_t)log(|Σ|−1), clamped at 0.
pub fn urac_bound(dists: &[ProbDist], ps: &[f64], alphabet: usize) -> Result<f64> {
    if dists.len() != ps.len() {
        return dim_err(format!("{} distributions for {} probabilities", dists.len(), ps.len()));
    }
    if alphabet < 2 {
        return invalid("alphabet needs at least two symbols");
    }
    let lo = 1.0 / alphabet as f64;
    let mut acc = 0.0;
    for (d, &p) in dists.iter().zip(ps) {
        if d.len() != alphabet {
            return dim_err("distribution length differs from alphabet size");
        }
        if !(lo - 1e-12..=1.0).contains(&p) {
            return invalid(format!("success probability {p} outside [{lo}, 1]"));
        }
        acc += shannon(d) - fano_term(p.max(lo), alphabet)?;
    }
    Ok(acc.max(0.0))
}
