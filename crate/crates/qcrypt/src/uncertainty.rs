//! Entropic uncertainty relations and a numerical minimizer over pure states.

use rand::Rng;
use serde_json::{json, Value};

use crate::entropy::shannon_raw;
use crate::error::{dim_err, invalid, Error, Result};
use crate::matcore::random::{random_pure, rng};
use crate::matcore::{inner, ComplexMatrix, DensityMatrix, PureState, C64};
use crate::mubclifford::{clifford_generators, vector_components, CliffordGenerators, MubSet, OrthonormalBasis};

pub const DEFAULT_RESTARTS: usize = 64;
const FD_STEP: f64 = 1e-5;
const GRAD_TOL: f64 = 1e-7;
const MAX_ITER: usize = 2000;
const ARMIJO: f64 = 1e-4;

/// Analytic bound next to the numerically achieved minimum.
#[derive(Debug, Clone)]
pub struct UncertaintyResult {
    pub relation: String,
    pub d: usize,
    pub m_or_k: usize,
    pub bound: f64,
    pub achieved: f64,
    pub minimizer: PureState,
}

impl UncertaintyResult {
    pub fn gap(&self) -> f64 {
        self.achieved - self.bound
    }

    pub fn to_json_value(&self) -> Value {
        let re: Vec<f64> = self.minimizer.amplitudes().iter().map(|z| z.re).collect();
        let im: Vec<f64> = self.minimizer.amplitudes().iter().map(|z| z.im).collect();
        json!({
            "relation": self.relation,
            "d": self.d,
            "m_or_K": self.m_or_k,
            "bound": self.bound,
            "achieved": self.achieved,
            "minimizer": { "re": re, "im": im },
        })
    }
}

/// Outcome of [`minimize_pure`].
#[derive(Debug, Clone)]
pub struct Minimum {
    pub value: f64,
    pub state: PureState,
    pub stationary_restarts: usize,
}

fn to_state(x: &[f64]) -> Vec<C64> {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.chunks(2).map(|c| C64::new(c[0] / n, c[1] / n)).collect()
}

fn normalize(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= n);
}

/// Projected gradient descent on the unit sphere of C^d, restarted from seeded random states.
///
/// Gradients are central finite differences; steps use Armijo backtracking.
pub fn minimize_pure(d: usize, f: impl Fn(&[C64]) -> f64, restarts: usize, seed: u64) -> Result<Minimum> {
    if d == 0 || restarts == 0 {
        return invalid("need a positive dimension and at least one restart");
    }
    let eval = |x: &[f64]| f(&to_state(x));
    let mut r = rng(seed);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut stationary = 0;
    for _ in 0..restarts {
        let start = random_pure(&mut r, d);
        let mut x: Vec<f64> = start.amplitudes().iter().flat_map(|z| [z.re, z.im]).collect();
        let mut fx = eval(&x);
        let mut step: f64 = 0.1;
        let mut converged = false;
        for _ in 0..MAX_ITER {
            let mut g = vec![0.0; 2 * d];
            for i in 0..2 * d {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += FD_STEP;
                xm[i] -= FD_STEP;
                g[i] = (eval(&xp) - eval(&xm)) / (2.0 * FD_STEP);
            }
            let radial: f64 = g.iter().zip(&x).map(|(a, b)| a * b).sum();
            g.iter_mut().zip(&x).for_each(|(gi, xi)| *gi -= radial * xi);
            let gn2: f64 = g.iter().map(|v| v * v).sum();
            if gn2.sqrt() < GRAD_TOL {
                converged = true;
                break;
            }
            step = (step * 2.0).min(1.0);
            let mut accepted = false;
            while step > 1e-14 {
                let mut y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - step * b).collect();
                normalize(&mut y);
                let fy = eval(&y);
                if fy <= fx - ARMIJO * step * gn2 {
                    x = y;
                    fx = fy;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                converged = true;
                break;
            }
        }
        if converged {
            stationary += 1;
        }
        if best.as_ref().is_none_or(|(b, _)| fx < *b) {
            best = Some((fx, x));
        }
    }
    if stationary == 0 {
        return Err(Error::NotConverged("no restart reached a stationary point".into()));
    }
    let (value, x) = best.expect("at least one restart");
    Ok(Minimum { value, state: PureState::from_trusted(to_state(&x)), stationary_restarts: stationary })
}

/// −log max_{k,l} |⟨b¹_k|b²_l⟩|
pub fn maassen_uffink_bound(b1: &OrthonormalBasis, b2: &OrthonormalBasis) -> Result<f64> {
    if b1.dim() != b2.dim() {
        return dim_err(format!("bases of dims {} and {}", b1.dim(), b2.dim()));
    }
    let mut c: f64 = 0.0;
    for u in b1.vectors() {
        for v in b2.vectors() {
            c = c.max(inner(u.amplitudes(), v.amplitudes()).norm());
        }
    }
    Ok(-c.min(1.0).log2())
}

fn adjoints(m: &MubSet) -> Vec<ComplexMatrix> {
    m.bases().iter().map(|b| b.unitary().adjoint()).collect()
}

fn outcome_probs(u_dag: &ComplexMatrix, psi: &[C64]) -> Vec<f64> {
    u_dag.mul_vec(psi).iter().map(|z| z.norm_sqr()).collect()
}

/// (1/m) Σ_t H(B_t|ψ)
pub fn average_shannon(m: &MubSet, psi: &[C64]) -> f64 {
    let us = adjoints(m);
    us.iter().map(|u| shannon_raw(&outcome_probs(u, psi))).sum::<f64>() / us.len() as f64
}

/// min over pure states of (1/m) Σ_t H(B_t|ψ), against the bound (log d)/2.
pub fn min_avg_shannon(m: &MubSet, restarts: usize, seed: u64) -> Result<UncertaintyResult> {
    let d = m.dim();
    if d > 16 {
        return invalid(format!("dimension {d} above the cap of 16"));
    }
    let us = adjoints(m);
    let k = us.len() as f64;
    let f = |psi: &[C64]| us.iter().map(|u| shannon_raw(&outcome_probs(u, psi))).sum::<f64>() / k;
    let min = minimize_pure(d, f, restarts, seed)?;
    let bound = if m.len() == 1 { 0.0 } else { (d as f64).log2() / 2.0 };
    Ok(UncertaintyResult {
        relation: "mub-shannon".into(),
        d,
        m_or_k: m.len(),
        bound,
        achieved: min.value,
        minimizer: min.state,
    })
}

/// −log Σ p²
pub fn collision_entropy(p: &[f64]) -> f64 {
    -p.iter().map(|x| x * x).sum::<f64>().log2()
}

/// −log((N + d − 1)/(dN)) for N mutually unbiased bases in dimension d.
pub fn full_mub_collision_bound(m: &MubSet) -> f64 {
    let (n, d) = (m.len() as f64, m.dim() as f64);
    -((n + d - 1.0) / (d * n)).log2()
}

/// (1/N) Σ_t H₂(B_t|ψ)
pub fn average_collision(m: &MubSet, psi: &[C64]) -> f64 {
    let us = adjoints(m);
    us.iter().map(|u| collision_entropy(&outcome_probs(u, psi))).sum::<f64>() / us.len() as f64
}

fn expectations(obs: &[ComplexMatrix], psi: &[C64]) -> Vec<f64> {
    obs.iter().map(|o| inner(psi, &o.mul_vec(psi)).re).collect()
}

fn clifford_setup(n: usize, k: usize) -> Result<(CliffordGenerators, Vec<ComplexMatrix>)> {
    let g = clifford_generators(n)?;
    let obs = g.observables(k)?.into_iter().map(|h| h.into_matrix()).collect();
    Ok((g, obs))
}

fn binary_h(g: f64) -> f64 {
    let p = ((1.0 + g) / 2.0).clamp(0.0, 1.0);
    shannon_raw(&[p, 1.0 - p])
}

/// min_ρ (1/K) Σ_j H(Γ_j|ρ) against 1 − 1/K.
pub fn clifford_shannon_relation(n: usize, k: usize, restarts: usize, seed: u64) -> Result<UncertaintyResult> {
    let (g, obs) = clifford_setup(n, k)?;
    let f = |psi: &[C64]| expectations(&obs, psi).iter().map(|&e| binary_h(e)).sum::<f64>() / k as f64;
    let min = minimize_pure(g.dim(), f, restarts, seed)?;
    Ok(UncertaintyResult {
        relation: "clifford-shannon".into(),
        d: g.dim(),
        m_or_k: k,
        bound: 1.0 - 1.0 / k as f64,
        achieved: min.value,
        minimizer: min.state,
    })
}

/// min_ρ (1/K) Σ_j H₂(Γ_j|ρ) against 1 − log(1 + 1/K).
pub fn clifford_collision_relation(n: usize, k: usize, restarts: usize, seed: u64) -> Result<UncertaintyResult> {
    let (g, obs) = clifford_setup(n, k)?;
    let f = |psi: &[C64]| expectations(&obs, psi).iter().map(|&e| 1.0 - (1.0 + e * e).log2()).sum::<f64>() / k as f64;
    let min = minimize_pure(g.dim(), f, restarts, seed)?;
    Ok(UncertaintyResult {
        relation: "clifford-collision".into(),
        d: g.dim(),
        m_or_k: k,
        bound: 1.0 - (1.0 + 1.0 / k as f64).log2(),
        achieved: min.value,
        minimizer: min.state,
    })
}

/// Tr(ρΓ_j) for the K observables of a Clifford relation.
pub fn clifford_expectations(n: usize, k: usize, psi: &PureState) -> Result<Vec<f64>> {
    let (g, obs) = clifford_setup(n, k)?;
    if psi.dim() != g.dim() {
        return dim_err("state dimension differs from 2ⁿ");
    }
    Ok(expectations(&obs, psi.amplitudes()))
}

/// Σ_{j=0}^{2n} Tr(ρΓ_j)²
pub fn meta_uncertainty_check(rho: &DensityMatrix, g: &CliffordGenerators) -> Result<f64> {
    Ok(vector_components(rho, g)?.iter().map(|c| c * c).sum())
}

/// Random component vector with Σ g_j² ≤ 1.
pub fn random_admissible_components<R: Rng + ?Sized>(r: &mut R, len: usize) -> Vec<f64> {
    let dir = crate::matcore::random::random_unit_real(r, len);
    let radius: f64 = r.random::<f64>().powf(1.0 / len as f64);
    dir.into_iter().map(|x| x * radius).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::gates;
    use crate::matcore::random::{random_density, random_pure};
    use crate::mubclifford::{latin_square_mub_prime, standard_bases, vector_state};

    #[test]
    fn maassen_uffink_examples() {
        let comp = OrthonormalBasis::computational(2);
        let had = OrthonormalBasis::from_unitary(&gates::hadamard()).unwrap();
        assert!(maassen_uffink_bound(&comp, &comp).unwrap().abs() < 1e-15);
        assert!((maassen_uffink_bound(&comp, &had).unwrap() - 0.5).abs() < 1e-12);
        let m = standard_bases(2).unwrap();
        assert!((maassen_uffink_bound(&m.bases()[0], &m.bases()[1]).unwrap() - 1.0).abs() < 1e-12);
        assert!(maassen_uffink_bound(&comp, &OrthonormalBasis::computational(3)).is_err());
    }

    #[test]
    fn single_basis_minimum_is_zero() {
        let m = standard_bases(1).unwrap().take(1).unwrap();
        let r = min_avg_shannon(&m, 8, 1).unwrap();
        assert!(r.achieved.abs() < 1e-3);
    }

    #[test]
    fn product_mubs_reach_half_log_d() {
        let m = standard_bases(1).unwrap().conjugate_product();
        let r = min_avg_shannon(&m, 16, 3).unwrap();
        assert!((r.achieved - 1.0).abs() < 1e-3, "{}", r.achieved);
        let phi = PureState::maximally_entangled(2);
        assert!((average_shannon(&m, phi.amplitudes()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn latin_square_basis_state_attains_bound() {
        let m = latin_square_mub_prime(3).unwrap();
        let v = PureState::basis(9, 0);
        for t in 2..=4 {
            let sub = m.take(t).unwrap();
            assert!((average_shannon(&sub, v.amplitudes()) - 3f64.log2()).abs() < 1e-12);
        }
    }

    #[test]
    fn collision_bound_examples() {
        let m = standard_bases(1).unwrap();
        assert!((full_mub_collision_bound(&m) - 1.5f64.log2()).abs() < 1e-12);
        assert!((full_mub_collision_bound(&m.take(2).unwrap()) + 0.75f64.log2()).abs() < 1e-12);
        let p5 = crate::mubclifford::latin_square_mub(&[], 2, true).unwrap();
        assert!((full_mub_collision_bound(&p5) + (5.0f64 / 8.0).log2()).abs() < 1e-12);
        let mut r = rng(8);
        for d in [2, 3, 5] {
            let m = crate::mubclifford::pauli_mub(d).unwrap();
            let b = full_mub_collision_bound(&m);
            assert!((b - ((d as f64 + 1.0) / 2.0).log2()).abs() < 1e-12);
            for _ in 0..100 {
                let psi = random_pure(&mut r, d);
                assert!(average_collision(&m, psi.amplitudes()) >= b - 1e-9);
            }
        }
    }

    #[test]
    fn clifford_relations_small() {
        let s = clifford_shannon_relation(1, 2, 16, 5).unwrap();
        assert!((s.bound - 0.5).abs() < 1e-15);
        assert!(s.gap().abs() < 1e-3, "{}", s.achieved);
        let s = clifford_shannon_relation(1, 3, 16, 5).unwrap();
        assert!(s.gap().abs() < 1e-3);
        let c = clifford_collision_relation(1, 3, 16, 5).unwrap();
        assert!((c.bound - (1.0 - (4.0f64 / 3.0).log2())).abs() < 1e-15);
        assert!(c.gap().abs() < 1e-3);
        let e = clifford_expectations(1, 3, &c.minimizer).unwrap();
        assert!(e.iter().all(|g| (g.abs() - 1.0 / 3f64.sqrt()).abs() < 1e-3), "{e:?}");
        let k1 = clifford_collision_relation(1, 1, 4, 5).unwrap();
        assert!(k1.achieved.abs() < 1e-3);
        assert!(clifford_shannon_relation(1, 4, 4, 5).is_err());
    }

    #[test]
    fn meta_uncertainty_examples() {
        let g = clifford_generators(1).unwrap();
        assert!(meta_uncertainty_check(&DensityMatrix::maximally_mixed(2), &g).unwrap().abs() < 1e-15);
        let mut r = rng(4);
        let psi = random_pure(&mut r, 2).density();
        assert!((meta_uncertainty_check(&psi, &g).unwrap() - 1.0).abs() < 1e-10);
        let g2 = clifford_generators(2).unwrap();
        let v = meta_uncertainty_check(&random_density(&mut r, 4), &g2).unwrap();
        assert!((0.0..=1.0).contains(&v));
        let comps = random_admissible_components(&mut r, 5);
        assert!(vector_state(&comps, &g2).unwrap().min_eigenvalue() >= -1e-9);
    }
}
