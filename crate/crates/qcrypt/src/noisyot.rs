//! Randomized 1-2 oblivious transfer in the noisy-storage model.
//!
//! Security bounds, the depolarizing-storage optimization over symmetrized
//! attacks, privacy amplification with affine hashing, syndrome-based error
//! correction and a per-qubit Monte-Carlo simulation of both protocols.

use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use rand::Rng;
use serde_json::{json, Value};

use crate::entropy::binary_entropy;
use crate::error::{dim_err, invalid, Error, Result};
use crate::matcore::random::rng;
use crate::matcore::{gates, trace_norm, ComplexMatrix, KrausChannel, C64};
use crate::pistar::discrimination_sdp;

/// Encoding basis: + (computational) or × (Hadamard).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    Plus,
    Cross,
}

impl Basis {
    pub fn from_bit(b: u8) -> Self {
        if b == 0 {
            Self::Plus
        } else {
            Self::Cross
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Self::Plus => 0,
            Self::Cross => 1,
        }
    }
}

/// |x⟩ in basis b as an amplitude vector.
pub fn bb84_vector(x: u8, b: Basis) -> Vec<C64> {
    let s = FRAC_1_SQRT_2;
    let v = match (b, x) {
        (Basis::Plus, 0) => [1.0, 0.0],
        (Basis::Plus, _) => [0.0, 1.0],
        (Basis::Cross, 0) => [s, s],
        (Basis::Cross, _) => [s, -s],
    };
    v.iter().map(|&a| C64::new(a, 0.0)).collect()
}

/// σ_{x,b}
pub fn bb84_state(x: u8, b: Basis) -> ComplexMatrix {
    let v = bb84_vector(x, b);
    ComplexMatrix::outer(&v, &v)
}

/// ½[1 + ½‖S(σ_{0,b}) − S(σ_{1,b})‖₁]
pub fn bit_guessing(s: &KrausChannel, b: Basis) -> Result<f64> {
    if s.input_dim() != 2 {
        return dim_err(format!("single-qubit channel expected, input dimension {}", s.input_dim()));
    }
    let diff = &s.apply_matrix(&bb84_state(0, b)) - &s.apply_matrix(&bb84_state(1, b));
    Ok(0.5 * (1.0 + 0.5 * trace_norm(&diff)))
}

/// Δ(S) = √(P₊·P×).
pub fn channel_delta(s: &KrausChannel) -> Result<f64> {
    Ok((bit_guessing(s, Basis::Plus)? * bit_guessing(s, Basis::Cross)?).sqrt())
}

/// Π_i P_g(X_i | S_i(σ_{X_i,b})) for a product attack.
pub fn guessing_product(channels: &[KrausChannel], b: Basis) -> Result<f64> {
    channels.iter().map(|s| bit_guessing(s, b)).product()
}

/// Joint optimal guessing of X ∈ {0,1}ⁿ from ⊗_i S_i(σ_{x_i,b}) by the POVM SDP.
pub fn joint_guessing(channels: &[KrausChannel], b: Basis, tol: f64) -> Result<f64> {
    let n = channels.len();
    if n == 0 || n > 3 {
        return invalid("joint guessing oracle limited to 1..=3 qubits");
    }
    let outs: Vec<[ComplexMatrix; 2]> =
        channels.iter().map(|s| [s.apply_matrix(&bb84_state(0, b)), s.apply_matrix(&bb84_state(1, b))]).collect();
    let p = 1.0 / (1usize << n) as f64;
    let weighted: Vec<ComplexMatrix> = (0..1usize << n)
        .map(|x| {
            let mut acc = ComplexMatrix::identity(1);
            for (i, o) in outs.iter().enumerate() {
                acc = acc.kron(&o[(x >> (n - 1 - i)) & 1]);
            }
            acc.scale(p)
        })
        .collect();
    Ok(discrimination_sdp(&weighted, tol)?.value)
}

/// F = βI + (α−β)|φ⟩⟨φ| with β = √(½ − α²) and |φ⟩ = cos(θ/2)|0⟩ + sin(θ/2)|1⟩.
pub fn attack_operator(alpha: f64, theta: f64) -> Result<ComplexMatrix> {
    if !(0.0..=FRAC_1_SQRT_2 + 1e-12).contains(&alpha) {
        return invalid(format!("α = {alpha} outside [0, 1/√2]"));
    }
    let beta = (0.5 - alpha * alpha).max(0.0).sqrt();
    let phi = [C64::new((theta / 2.0).cos(), 0.0), C64::new((theta / 2.0).sin(), 0.0)];
    Ok(&ComplexMatrix::identity(2).scale(beta) + &ComplexMatrix::outer(&phi, &phi).scale(alpha - beta))
}

/// The four Kraus operators gFg† for g ∈ {I, X, Z, XZ}.
pub fn symmetrized_attack(alpha: f64, theta: f64) -> Result<Vec<ComplexMatrix>> {
    let f = attack_operator(alpha, theta)?;
    let x = gates::pauli_x();
    let z = gates::pauli_z();
    let xz = x.matmul(&z);
    Ok([ComplexMatrix::identity(2), x, z, xz].iter().map(|g| g.matmul(&f).matmul(&g.adjoint())).collect())
}

/// Instrument {F_k} followed by depolarizing storage, with a classical register for k.
pub fn instrument_channel(ops: &[ComplexMatrix], r: f64) -> Result<KrausChannel> {
    let noise = KrausChannel::depolarizing(r)?;
    let k = ops.len();
    let mut kraus = Vec::with_capacity(k * noise.operators().len());
    for (i, f) in ops.iter().enumerate() {
        let reg = ComplexMatrix::from_fn(k, 1, |row, _| if row == i { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        for nj in noise.operators() {
            kraus.push(reg.kron(&nj.matmul(f)));
        }
    }
    KrausChannel::new(kraus)
}

/// ‖N_r(A)‖₁ for a 2 × 2 Hermitian A: the trace survives, the Bloch part shrinks by r.
fn depolarized_trace_norm(a: &ComplexMatrix, r: f64) -> f64 {
    let t = (a[(0, 0)] + a[(1, 1)]).re;
    let z = 0.5 * (a[(0, 0)] - a[(1, 1)]).re;
    let off = a[(0, 1)].norm();
    let v = (z * z + off * off).sqrt();
    t.abs().max(2.0 * r * v)
}

/// Δ of the symmetrized attack (α, θ) under depolarizing storage r.
pub fn symmetrized_delta(alpha: f64, theta: f64, r: f64) -> Result<f64> {
    let ops = symmetrized_attack(alpha, theta)?;
    let mut p = [0.0; 2];
    for (slot, b) in [Basis::Plus, Basis::Cross].into_iter().enumerate() {
        let d = &bb84_state(0, b) - &bb84_state(1, b);
        let s: f64 = ops.iter().map(|f| depolarized_trace_norm(&f.matmul(&d).matmul(&f.adjoint()), r)).sum();
        p[slot] = 0.5 + 0.25 * s;
    }
    Ok((p[0] * p[1]).sqrt())
}

/// (1+r)/2 for r ≥ 1/√2, otherwise ½ + 1/(2√2).
pub fn depolarizing_delta_max(r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return invalid(format!("r = {r} outside [0,1]"));
    }
    Ok(if r >= FRAC_1_SQRT_2 { 0.5 * (1.0 + r) } else { 0.5 + 0.5 * FRAC_1_SQRT_2 })
}

/// Grid search over the symmetrized attack family.
#[derive(Debug, Clone)]
pub struct TheoremReport {
    pub r: f64,
    pub resolution: usize,
    pub max: f64,
    pub argmax_alpha: f64,
    pub argmax_theta: f64,
    pub closed_form: f64,
    /// Δ at α = 0, θ = π/4 (Breidbart measurement).
    pub at_measure: f64,
    /// Δ at α = ½ (store everything).
    pub at_store: f64,
}

impl TheoremReport {
    pub fn never_exceeds(&self, tol: f64) -> bool {
        self.max <= self.closed_form + tol
    }

    pub fn attains(&self, tol: f64) -> bool {
        (self.max - self.closed_form).abs() <= tol
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "r": self.r,
            "max": self.max,
            "argmax_alpha": self.argmax_alpha,
            "argmax_theta": self.argmax_theta,
            "closed_form": self.closed_form,
            "at_measure": self.at_measure,
            "at_store": self.at_store,
        })
    }
}

/// Maximize Δ over α ∈ [0, 1/√2] and Bloch angle θ ∈ [0, π/2] on a (res+1)² grid.
pub fn verify_depolarizing_theorem(r: f64, resolution: usize) -> Result<TheoremReport> {
    if resolution < 50 {
        return invalid(format!("grid resolution {resolution} below 50"));
    }
    let closed_form = depolarizing_delta_max(r)?;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..=resolution {
        let alpha = FRAC_1_SQRT_2 * i as f64 / resolution as f64;
        for j in 0..=resolution {
            let theta = FRAC_PI_2 * j as f64 / resolution as f64;
            let v = symmetrized_delta(alpha, theta, r)?;
            if v > best.0 {
                best = (v, alpha, theta);
            }
        }
    }
    Ok(TheoremReport {
        r,
        resolution,
        max: best.0,
        argmax_alpha: best.1,
        argmax_theta: best.2,
        closed_form,
        at_measure: symmetrized_delta(0.0, PI / 4.0, r)?,
        at_store: symmetrized_delta(0.5, 0.0, r)?,
    })
}

/// 2^{ℓ/2−1}·Δ^{log(4/3)·n/2}
pub fn security_bound_perfect(n: usize, ell: usize, delta_max: f64) -> Result<f64> {
    if !(delta_max > 0.0 && delta_max <= 1.0) {
        return invalid(format!("Δ = {delta_max} outside (0,1]"));
    }
    let e = (4.0f64 / 3.0).log2() * n as f64 / 2.0;
    Ok(2f64.powf(ell as f64 / 2.0 - 1.0) * delta_max.powf(e))
}

/// h(p)/4 + log Δ·log(4/3)/2; the practical bound decays in m iff this is negative.
pub fn practical_exponent(p_error: f64, delta_max: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&p_error) {
        return invalid(format!("p_error = {p_error} outside [0, ½)"));
    }
    if !(delta_max > 0.0 && delta_max <= 1.0) {
        return invalid(format!("Δ = {delta_max} outside (0,1]"));
    }
    Ok(binary_entropy(p_error)? / 4.0 + delta_max.log2() * (4.0f64 / 3.0).log2() / 2.0)
}

/// 2^{ℓ/2−1+h(p)m/4}·Δ^{log(4/3)·m/2}
pub fn security_bound_practical(m: usize, ell: usize, p_error: f64, delta_max: f64) -> Result<f64> {
    let e = practical_exponent(p_error, delta_max)?;
    Ok(2f64.powf(ell as f64 / 2.0 - 1.0 + e * m as f64))
}

/// Largest tolerable p_error: the root of h(p) = 2(−log Δ)·log(4/3) on (0, ½), by bisection.
pub fn practical_crossover(delta_max: f64) -> Result<f64> {
    if !(delta_max > 0.0 && delta_max < 1.0) {
        return invalid(format!("Δ = {delta_max} must lie in (0,1) for a crossover"));
    }
    let target = 2.0 * (-delta_max.log2()) * (4.0f64 / 3.0).log2();
    if target >= 1.0 {
        return Ok(0.5);
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// d(F(X)|F,E) ≤ 2^{(ℓ+k)/2−1}√P_g
pub fn pa_bound(ell: usize, k_leaked: usize, p_guess: f64) -> Result<f64> {
    if !(p_guess > 0.0 && p_guess <= 1.0) {
        return invalid(format!("P_g = {p_guess} outside (0,1]"));
    }
    Ok(2f64.powf((ell + k_leaked) as f64 / 2.0 - 1.0) * p_guess.sqrt())
}

/// All affine maps {0,1}ⁿ → {0,1}^ℓ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AffineHashFamily {
    pub n: usize,
    pub ell: usize,
}

/// f(x) = Ax ⊕ c over GF(2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineHash {
    a: Vec<Vec<u8>>,
    c: Vec<u8>,
}

impl AffineHash {
    pub fn new(a: Vec<Vec<u8>>, c: Vec<u8>) -> Result<Self> {
        let n = a.first().map_or(0, Vec::len);
        if a.len() != c.len() || a.iter().any(|r| r.len() != n) {
            return dim_err("affine hash shape mismatch");
        }
        if a.iter().flatten().chain(&c).any(|&b| b > 1) {
            return invalid("affine hash entries must be bits");
        }
        Ok(Self { a, c })
    }

    pub fn apply(&self, x: &[u8]) -> Vec<u8> {
        self.a.iter().zip(&self.c).map(|(row, &c)| row.iter().zip(x).fold(c, |acc, (r, b)| acc ^ (r & b))).collect()
    }

    pub fn output_len(&self) -> usize {
        self.c.len()
    }
}

impl AffineHashFamily {
    pub fn new(n: usize, ell: usize) -> Result<Self> {
        if ell == 0 {
            return invalid("output length must be positive");
        }
        Ok(Self { n, ell })
    }

    pub fn sample<R: Rng + ?Sized>(&self, r: &mut R) -> AffineHash {
        let a = (0..self.ell).map(|_| (0..self.n).map(|_| r.random_range(0..2u8)).collect()).collect();
        let c = (0..self.ell).map(|_| r.random_range(0..2u8)).collect();
        AffineHash { a, c }
    }

    /// Every member, for n·ℓ + ℓ ≤ 16.
    pub fn enumerate(&self) -> Result<Vec<AffineHash>> {
        let bits = self.n * self.ell + self.ell;
        if bits > 16 {
            return invalid(format!("{bits} free bits is too many to enumerate"));
        }
        Ok((0..1usize << bits)
            .map(|code| {
                let bit = |k: usize| ((code >> k) & 1) as u8;
                let a = (0..self.ell).map(|i| (0..self.n).map(|j| bit(i * self.n + j)).collect()).collect();
                let c = (0..self.ell).map(|i| bit(self.n * self.ell + i)).collect();
                AffineHash { a, c }
            })
            .collect())
    }

    /// max over x ≠ y of Pr_f[f(x) = f(y)], exact: rows of A are independent and c cancels.
    pub fn max_collision_probability(&self) -> Result<f64> {
        if self.n == 0 || self.n > 12 {
            return invalid("collision check supports 1 ≤ n ≤ 12");
        }
        let mut worst: f64 = 0.0;
        for z in 1..1u32 << self.n {
            let zero_rows = (0..1u32 << self.n).filter(|row| (row & z).count_ones() % 2 == 0).count();
            let p = (zero_rows as f64 / (1u64 << self.n) as f64).powi(self.ell as i32);
            worst = worst.max(p);
        }
        Ok(worst)
    }
}

/// Deterministic member of the family for a seed.
pub fn sample_hash(family: &AffineHashFamily, seed: u64) -> AffineHash {
    family.sample(&mut rng(seed))
}

/// Result of the exhaustive privacy-amplification check.
#[derive(Debug, Clone)]
pub struct PaCheck {
    pub average_distance: f64,
    pub worst_distance: f64,
    pub p_guess: f64,
    pub bound: f64,
}

impl PaCheck {
    pub fn holds(&self) -> bool {
        self.average_distance <= self.bound + 1e-12
    }
}

/// ρ^x = ⊗_i ½(σ_{x_i,+} + σ_{x_i,×}) for uniform x, all affine f: d(F(X)|F,ρ_E) against the bound.
pub fn pa_exhaustive_check(n: usize, ell: usize) -> Result<PaCheck> {
    if n == 0 || n > 4 {
        return invalid("exhaustive check limited to 1 ≤ n ≤ 4");
    }
    let single: Vec<ComplexMatrix> =
        (0..2u8).map(|x| (&bb84_state(x, Basis::Plus) + &bb84_state(x, Basis::Cross)).scale(0.5)).collect();
    let dim = 1usize << n;
    let px = 1.0 / dim as f64;
    let states: Vec<ComplexMatrix> = (0..dim)
        .map(|x| {
            let mut acc = ComplexMatrix::identity(1);
            for i in 0..n {
                acc = acc.kron(&single[(x >> (n - 1 - i)) & 1]);
            }
            acc
        })
        .collect();
    let mut rho_e = ComplexMatrix::zeros(dim, dim);
    for s in &states {
        rho_e = &rho_e + &s.scale(px);
    }
    let family = AffineHashFamily::new(n, ell)?;
    let funcs = family.enumerate()?;
    let bits = |x: usize| -> Vec<u8> { (0..n).map(|i| ((x >> (n - 1 - i)) & 1) as u8).collect() };
    let mut total = 0.0;
    let mut worst: f64 = 0.0;
    for f in &funcs {
        let mut blocks = vec![ComplexMatrix::zeros(dim, dim); 1 << ell];
        for (x, s) in states.iter().enumerate() {
            let y = f.apply(&bits(x)).iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
            blocks[y] = &blocks[y] + &s.scale(px);
        }
        let share = rho_e.scale(1.0 / (1usize << ell) as f64);
        let d: f64 = 0.5 * blocks.iter().map(|b| trace_norm(&(b - &share))).sum::<f64>();
        total += d;
        worst = worst.max(d);
    }
    let p_guess = (0.5 + 0.5 * FRAC_1_SQRT_2).powi(n as i32);
    Ok(PaCheck {
        average_distance: total / funcs.len() as f64,
        worst_distance: worst,
        p_guess,
        bound: pa_bound(ell, 0, p_guess)?,
    })
}

/// Binary linear code given by a full-rank parity-check matrix, with coset-leader decoding.
#[derive(Debug, Clone)]
pub struct LinearCode {
    name: String,
    h: Vec<Vec<u8>>,
    leaders: HashMap<u64, Vec<u8>>,
    info: Vec<usize>,
    radius: usize,
}

impl LinearCode {
    pub fn new(name: impl Into<String>, h: Vec<Vec<u8>>) -> Result<Self> {
        let m = h.first().map_or(0, Vec::len);
        if h.is_empty() || m == 0 || h.iter().any(|r| r.len() != m) {
            return dim_err("parity-check rows must share a positive length");
        }
        if m > 16 || h.len() > 63 {
            return invalid("lookup decoding supports blocklength ≤ 16");
        }
        if h.iter().flatten().any(|&b| b > 1) {
            return invalid("parity-check entries must be bits");
        }
        let pivots = gf2_pivots(&h);
        if pivots.len() != h.len() {
            return invalid("parity-check matrix is not full row rank");
        }
        let info: Vec<usize> = (0..m).filter(|c| !pivots.contains(c)).collect();
        let mut patterns: Vec<u32> = (0..1u32 << m).collect();
        patterns.sort_by_key(|p| (p.count_ones(), *p));
        let mut leaders = HashMap::new();
        let mut radius = m;
        let mut code = Self { name: name.into(), h, leaders: HashMap::new(), info, radius: 0 };
        let mut full_weight = usize::MAX;
        for p in patterns {
            let e: Vec<u8> = (0..m).map(|i| ((p >> i) & 1) as u8).collect();
            let w = p.count_ones() as usize;
            if let std::collections::hash_map::Entry::Vacant(v) = leaders.entry(code.syndrome(&e)) {
                v.insert(e);
            } else if w < full_weight {
                full_weight = w;
                radius = w - 1;
            }
        }
        code.leaders = leaders;
        code.radius = radius;
        Ok(code)
    }

    /// [7,4] Hamming code.
    pub fn hamming74() -> Self {
        let h = (0..3).map(|r| (1..=7u32).map(|c| ((c >> r) & 1) as u8).collect()).collect();
        Self::new("hamming74", h).expect("Hamming parity check is full rank")
    }

    /// [8,4] extended Hamming code.
    pub fn extended_hamming84() -> Self {
        let mut h: Vec<Vec<u8>> =
            (0..3).map(|r| (1..=7u32).map(|c| ((c >> r) & 1) as u8).chain([0]).collect()).collect();
        h.push(vec![1; 8]);
        Self::new("hamming84", h).expect("extended Hamming parity check is full rank")
    }

    /// Length-m repetition code.
    pub fn repetition(m: usize) -> Result<Self> {
        if m < 2 {
            return invalid("repetition code needs length ≥ 2");
        }
        let h = (0..m - 1).map(|i| (0..m).map(|j| u8::from(j == 0 || j == i + 1)).collect()).collect();
        Self::new(format!("repetition{m}"), h)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn blocklength(&self) -> usize {
        self.h[0].len()
    }

    pub fn syndrome_len(&self) -> usize {
        self.h.len()
    }

    pub fn dimension(&self) -> usize {
        self.info.len()
    }

    /// Information set: positions left free by the parity checks.
    pub fn info_positions(&self) -> &[usize] {
        &self.info
    }

    /// Largest t with every weight-≤t pattern its own coset leader.
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn syndrome(&self, x: &[u8]) -> u64 {
        self.h.iter().enumerate().fold(0u64, |acc, (i, row)| {
            let bit = row.iter().zip(x).fold(0u8, |a, (r, b)| a ^ (r & b));
            acc | (u64::from(bit) << i)
        })
    }

    /// x̂ = y ⊕ leader(syn(y) ⊕ syn(x)).
    pub fn decode(&self, y: &[u8], syndrome_x: u64) -> Result<Vec<u8>> {
        if y.len() != self.blocklength() {
            return dim_err(format!("word of length {} for blocklength {}", y.len(), self.blocklength()));
        }
        let s = self.syndrome(y) ^ syndrome_x;
        let e = self.leaders.get(&s).ok_or_else(|| Error::Invalid("syndrome outside the code's range".into()))?;
        Ok(y.iter().zip(e).map(|(a, b)| a ^ b).collect())
    }
}

fn gf2_pivots(h: &[Vec<u8>]) -> Vec<usize> {
    let mut rows: Vec<Vec<u8>> = h.to_vec();
    let cols = rows[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][c] == 1) else { continue };
        rows.swap(r, p);
        for i in 0..rows.len() {
            if i != r && rows[i][c] == 1 {
                let pivot_row = rows[r].clone();
                for (a, b) in rows[i].iter_mut().zip(pivot_row) {
                    *a ^= b;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    pivots
}

/// Decode y = x ⊕ e from syn(x); an error if the pattern is not corrected.
pub fn syndrome_roundtrip(code: &LinearCode, x: &[u8], e: &[u8]) -> Result<Vec<u8>> {
    if x.len() != code.blocklength() || e.len() != code.blocklength() {
        return dim_err("word length differs from the blocklength");
    }
    let y: Vec<u8> = x.iter().zip(e).map(|(a, b)| a ^ b).collect();
    let xh = code.decode(&y, code.syndrome(x))?;
    if xh != x {
        return invalid("uncorrectable error pattern");
    }
    Ok(xh)
}

fn embed(code: &LinearCode, chunk: &[u8]) -> Vec<u8> {
    let mut w = vec![0u8; code.blocklength()];
    for (&pos, &b) in code.info_positions().iter().zip(chunk) {
        w[pos] = b;
    }
    w
}

/// Syndromes of the data split into chunks of k bits placed on the information set.
pub fn block_syndromes(code: &LinearCode, data: &[u8]) -> Vec<u64> {
    data.chunks(code.dimension().max(1)).map(|c| code.syndrome(&embed(code, c))).collect()
}

/// Inverse of [`block_syndromes`] for a noisy copy.
pub fn block_decode(code: &LinearCode, noisy: &[u8], syndromes: &[u64]) -> Result<Vec<u8>> {
    let k = code.dimension().max(1);
    if noisy.chunks(k).count() != syndromes.len() {
        return dim_err("syndrome count does not match the data length");
    }
    let mut out = Vec::with_capacity(noisy.len());
    for (chunk, &s) in noisy.chunks(k).zip(syndromes) {
        let w = code.decode(&embed(code, chunk), s)?;
        out.extend(code.info_positions().iter().take(chunk.len()).map(|&p| w[p]));
    }
    Ok(out)
}

/// Protocol parameters; `wait` is a label for the storage time.
#[derive(Debug, Clone)]
pub struct RotParams {
    pub n: usize,
    pub ell: usize,
    pub wait: f64,
    pub seed: u64,
}

impl RotParams {
    pub fn new(n: usize, ell: usize, seed: u64) -> Result<Self> {
        if n == 0 || ell == 0 {
            return invalid("n and ℓ must be positive");
        }
        if n > 4096 || ell > 64 {
            return invalid("n ≤ 4096 and ℓ ≤ 64");
        }
        Ok(Self { n, ell, wait: 1.0, seed })
    }
}

/// Erasures, bit errors and the reconciliation code.
#[derive(Debug, Clone)]
pub struct PracticalParams {
    pub rot: RotParams,
    pub p_erase: f64,
    pub p_error: f64,
    pub code: LinearCode,
}

impl PracticalParams {
    pub fn new(rot: RotParams, p_erase: f64, p_error: f64, code: LinearCode) -> Result<Self> {
        if !(0.0..1.0).contains(&p_erase) {
            return invalid(format!("p_erase = {p_erase} outside [0,1)"));
        }
        if !(0.0..0.5).contains(&p_error) {
            return invalid(format!("p_error = {p_error} outside [0,½)"));
        }
        Ok(Self { rot, p_erase, p_error, code })
    }
}

#[derive(Debug, Clone)]
pub enum RotSetting {
    Perfect(RotParams),
    Practical(PracticalParams),
}

impl RotSetting {
    fn rot(&self) -> &RotParams {
        match self {
            Self::Perfect(p) => p,
            Self::Practical(p) => &p.rot,
        }
    }
}

/// Dishonest receiver strategies; `None` is the honest receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Attack {
    None,
    /// Measure every qubit in the Breidbart basis on arrival.
    Breidbart,
    /// Store every qubit under depolarizing noise r, measure after the bases are announced.
    Store {
        r: f64,
    },
}

impl Attack {
    /// Δ of the per-qubit attack.
    pub fn delta(&self) -> Result<f64> {
        match *self {
            Self::None => Ok(1.0),
            Self::Breidbart => Ok(0.5 + 0.5 * FRAC_1_SQRT_2),
            Self::Store { r } => {
                if !(0.0..=1.0).contains(&r) {
                    return invalid(format!("r = {r} outside [0,1]"));
                }
                Ok(0.5 * (1.0 + r))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RotStats {
    pub trials: usize,
    pub aborted: usize,
    pub correct: usize,
    pub decoding_failures: usize,
    pub correctness_rate: f64,
    pub abort_rate: f64,
    /// Rate at which a dishonest receiver guesses S₁.
    pub adversary_guess_rate: Option<f64>,
    /// 2^{−ℓ} + δ_sec + 3σ.
    pub envelope: Option<f64>,
}

impl RotStats {
    pub fn within_envelope(&self) -> bool {
        match (self.adversary_guess_rate, self.envelope) {
            (Some(g), Some(e)) => g <= e,
            _ => true,
        }
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "trials": self.trials,
            "aborted": self.aborted,
            "correct": self.correct,
            "decoding_failures": self.decoding_failures,
            "correctness_rate": self.correctness_rate,
            "abort_rate": self.abort_rate,
            "adversary_guess_rate": self.adversary_guess_rate,
            "envelope": self.envelope,
        })
    }
}

fn sample_outcome<R: Rng + ?Sized>(r: &mut R, rho: &ComplexMatrix, v0: &[C64]) -> u8 {
    let p0 = crate::matcore::inner(v0, &rho.mul_vec(v0)).re;
    u8::from(r.random::<f64>() >= p0)
}

/// Sender side: abort check, hashing and syndromes. The receiver's choice bit never enters.
struct Sender {
    s: [Vec<u8>; 2],
    f: [AffineHash; 2],
    index: [Vec<usize>; 2],
    syndromes: [Vec<u64>; 2],
}

fn abort_threshold(n: usize, p_erase: f64) -> f64 {
    (1.0 - p_erase) * n as f64 / 2.0 - 2.0 * (n as f64).sqrt()
}

fn sender_round<R: Rng + ?Sized>(
    r: &mut R,
    x: &[u8],
    theta: &[u8],
    erased: &[bool],
    ell: usize,
    practical: Option<&PracticalParams>,
) -> Option<Sender> {
    let index: [Vec<usize>; 2] =
        [0u8, 1].map(|b| (0..x.len()).filter(|&i| !erased[i] && theta[i] == b).collect::<Vec<_>>());
    if let Some(p) = practical {
        let t = abort_threshold(x.len(), p.p_erase);
        if index.iter().any(|ix| ix.len() as f64 <= t) {
            return None;
        }
    }
    let data: [Vec<u8>; 2] = [0, 1].map(|b| index[b].iter().map(|&i| x[i]).collect::<Vec<_>>());
    let f = [0, 1].map(|b| AffineHashFamily { n: data[b].len(), ell }.sample(r));
    let s = [0, 1].map(|b| f[b].apply(&data[b]));
    let syndromes = [0, 1].map(|b| practical.map_or_else(Vec::new, |p| block_syndromes(&p.code, &data[b])));
    Some(Sender { s, f, index, syndromes })
}

/// Monte-Carlo runs of the protocol against an honest or dishonest receiver.
pub fn simulate_rot(setting: &RotSetting, attack: Attack, trials: usize) -> Result<RotStats> {
    if trials == 0 {
        return invalid("need at least one trial");
    }
    let rot = setting.rot();
    let n = rot.n;
    if attack != Attack::None && n > 24 {
        return invalid("adversarial simulation limited to n ≤ 24");
    }
    let practical = match setting {
        RotSetting::Practical(p) => Some(p),
        RotSetting::Perfect(_) => None,
    };
    let (p_erase, p_error) = practical.map_or((0.0, 0.0), |p| (p.p_erase, p.p_error));
    let delta = attack.delta()?;
    let noise = match attack {
        Attack::Store { r } => Some(KrausChannel::depolarizing(r)?),
        _ => None,
    };
    let c8 = (PI / 8.0).cos();
    let s8 = (PI / 8.0).sin();
    let breidbart = [C64::new(c8, 0.0), C64::new(s8, 0.0)];
    let (mut aborted, mut correct, mut failures, mut guessed) = (0usize, 0usize, 0usize, 0usize);
    for t in 0..trials {
        let mut r = rng(rot.seed.wrapping_add((t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)));
        let x: Vec<u8> = (0..n).map(|_| r.random_range(0..2u8)).collect();
        let theta: Vec<u8> = (0..n).map(|_| r.random_range(0..2u8)).collect();
        let erased: Vec<bool> = (0..n).map(|_| r.random::<f64>() < p_erase).collect();
        let c = r.random_range(0..2u8);
        // receiver measurements before the wait
        let early: Vec<u8> = (0..n)
            .map(|i| {
                let rho = bb84_state(x[i], Basis::from_bit(theta[i]));
                match attack {
                    Attack::None => {
                        let y = sample_outcome(&mut r, &rho, &bb84_vector(0, Basis::from_bit(c)));
                        y ^ u8::from(r.random::<f64>() < p_error)
                    }
                    Attack::Breidbart => sample_outcome(&mut r, &rho, &breidbart),
                    Attack::Store { .. } => {
                        let stored = noise.as_ref().expect("store noise").apply_matrix(&rho);
                        sample_outcome(&mut r, &stored, &bb84_vector(0, Basis::from_bit(theta[i])))
                    }
                }
            })
            .collect();
        let Some(sender) = sender_round(&mut r, &x, &theta, &erased, rot.ell, practical) else {
            aborted += 1;
            continue;
        };
        match attack {
            Attack::None => {
                let b = c as usize;
                let mine: Vec<u8> = sender.index[b].iter().map(|&i| early[i]).collect();
                let truth: Vec<u8> = sender.index[b].iter().map(|&i| x[i]).collect();
                let decoded = match practical {
                    Some(p) => block_decode(&p.code, &mine, &sender.syndromes[b])?,
                    None => mine,
                };
                if decoded != truth {
                    failures += 1;
                }
                if sender.f[b].apply(&decoded) == sender.s[b] {
                    correct += 1;
                }
            }
            _ => {
                let guess: Vec<u8> = sender.index[1].iter().map(|&i| early[i]).collect();
                if sender.f[1].apply(&guess) == sender.s[1] {
                    guessed += 1;
                }
                correct += 1;
            }
        }
    }
    let done = trials - aborted;
    let rate = |k: usize| if done == 0 { 0.0 } else { k as f64 / done as f64 };
    let (adversary_guess_rate, envelope) = if attack == Attack::None {
        (None, None)
    } else {
        let base = 2f64.powi(-(rot.ell as i32));
        let sigma = (0.25 / done.max(1) as f64).sqrt();
        (Some(rate(guessed)), Some(base + security_bound_perfect(n, rot.ell, delta)? + 3.0 * sigma))
    };
    Ok(RotStats {
        trials,
        aborted,
        correct,
        decoding_failures: failures,
        correctness_rate: rate(correct),
        abort_rate: aborted as f64 / trials as f64,
        adversary_guess_rate,
        envelope,
    })
}
