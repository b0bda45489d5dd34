//! Classical and measured entropies in bits.

use crate::error::{dim_err, invalid, Result};
use crate::matcore::{ComplexMatrix, DensityMatrix, PureState};
use crate::mubclifford::OrthonormalBasis;

/// Sentinel order for the min-entropy.
pub const MIN_ENTROPY: f64 = f64::INFINITY;

const SUPPORT_TOL: f64 = 1e-10;

/// Probability vector with nonnegative entries summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbDist {
    probs: Vec<f64>,
}

impl ProbDist {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return invalid("empty distribution");
        }
        if probs.iter().any(|p| !p.is_finite() || *p < -1e-12) {
            return invalid("probabilities must be finite and nonnegative");
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return invalid(format!("probabilities sum to {s:.12}"));
        }
        Ok(Self { probs: probs.into_iter().map(|p| p.max(0.0)).collect() })
    }

    /// Rescales nonnegative weights to a distribution.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let s: f64 = weights.iter().sum();
        if s <= 0.0 || !s.is_finite() {
            return invalid("weights must have positive finite sum");
        }
        Self::new(weights.into_iter().map(|w| w / s).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Self { probs: vec![1.0 / n as f64; n] }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

fn plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * p.log2()
    }
}

/// H(X) = −Σ p log p
pub fn shannon(p: &ProbDist) -> f64 {
    shannon_raw(p.probs())
}

pub(crate) fn shannon_raw(p: &[f64]) -> f64 {
    -p.iter().map(|&x| plogp(x)).sum::<f64>()
}

/// Rényi entropy of order α; pass [`MIN_ENTROPY`] for α = ∞.
pub fn renyi(p: &ProbDist, alpha: f64) -> Result<f64> {
    if alpha.is_nan() || alpha <= 0.0 {
        return invalid(format!("Rényi order {alpha} must be positive"));
    }
    if alpha == 1.0 {
        return invalid("Rényi order 1 is the Shannon entropy; call shannon");
    }
    if alpha.is_infinite() {
        let m = p.probs().iter().copied().fold(0.0, f64::max);
        return Ok(-m.log2());
    }
    let s: f64 = p.probs().iter().filter(|&&x| x > 0.0).map(|&x| x.powf(alpha)).sum();
    Ok(s.log2() / (1.0 - alpha))
}

/// h(p) = −p log p − (1−p) log(1−p)
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return invalid(format!("binary entropy argument {p} outside [0,1]"));
    }
    Ok(-plogp(p) - plogp(1.0 - p))
}

/// Outcome probabilities |⟨b_i|ψ⟩|².
pub fn outcome_distribution(basis: &OrthonormalBasis, psi: &PureState) -> Result<Vec<f64>> {
    if basis.dim() != psi.dim() {
        return dim_err(format!("basis dim {} vs state dim {}", basis.dim(), psi.dim()));
    }
    Ok(basis.overlaps(psi.amplitudes()))
}

/// H(B|ψ): Shannon entropy of measuring ψ in `basis`.
pub fn measurement_entropy(basis: &OrthonormalBasis, psi: &PureState) -> Result<f64> {
    Ok(shannon_raw(&outcome_distribution(basis, psi)?))
}

/// Classical-quantum state Σ p_x |x⟩⟨x| ⊗ ρ_x.
#[derive(Debug, Clone)]
pub struct CqState {
    labels: Vec<usize>,
    weights: ProbDist,
    conditionals: Vec<DensityMatrix>,
}

impl CqState {
    pub fn new(labels: Vec<usize>, weights: ProbDist, conditionals: Vec<DensityMatrix>) -> Result<Self> {
        if labels.len() != weights.len() || conditionals.len() != weights.len() {
            return dim_err("labels, weights and states must have equal length");
        }
        let d = conditionals[0].dim();
        if conditionals.iter().any(|c| c.dim() != d) {
            return dim_err("conditional states of different dimensions");
        }
        Ok(Self { labels, weights, conditionals })
    }

    /// Ensemble labelled 0..n.
    pub fn from_ensemble(weights: ProbDist, conditionals: Vec<DensityMatrix>) -> Result<Self> {
        Self::new((0..weights.len()).collect(), weights, conditionals)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn weights(&self) -> &ProbDist {
        &self.weights
    }

    pub fn conditionals(&self) -> &[DensityMatrix] {
        &self.conditionals
    }

    pub fn dim(&self) -> usize {
        self.conditionals[0].dim()
    }

    /// ρ = Σ p_x ρ_x
    pub fn average(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut acc = ComplexMatrix::zeros(d, d);
        for (p, r) in self.weights.probs().iter().zip(&self.conditionals) {
            acc = &acc + &r.scale(*p);
        }
        acc
    }

    /// ρ^{−½} on the support of ρ.
    fn average_inv_sqrt(&self) -> Result<ComplexMatrix> {
        let avg = self.average();
        if avg.trace().re <= SUPPORT_TOL {
            return invalid("degenerate ensemble");
        }
        let e = crate::matcore::HermitianMatrix::from_any(&avg).eig();
        Ok(e.apply(|l| if l > SUPPORT_TOL { 1.0 / l.sqrt() } else { 0.0 }))
    }

    /// Square-root measurement M_x = p_x ρ^{−½} ρ_x ρ^{−½}.
    pub fn square_root_measurement(&self) -> Result<Vec<ComplexMatrix>> {
        let s = self.average_inv_sqrt()?;
        Ok(self
            .weights
            .probs()
            .iter()
            .zip(&self.conditionals)
            .map(|(p, r)| s.matmul(r.matrix()).matmul(&s).scale(*p))
            .collect())
    }

    /// Success probability Σ p_x Tr(M_x ρ_x) of the square-root measurement.
    pub fn square_root_success(&self) -> Result<f64> {
        let ms = self.square_root_measurement()?;
        Ok(ms
            .iter()
            .zip(self.weights.probs())
            .zip(&self.conditionals)
            .map(|((m, p), r)| p * m.trace_product(r.matrix()).re)
            .sum())
    }
}

/// H₂(ρ_AB|ρ) = −log Tr([(I ⊗ ρ^{−½}) ρ_AB]²).
pub fn quantum_collision_cond(s: &CqState) -> Result<f64> {
    let inv = s.average_inv_sqrt()?;
    let mut total = 0.0;
    for (p, r) in s.weights.probs().iter().zip(&s.conditionals) {
        if *p == 0.0 {
            continue;
        }
        let a = inv.matmul(r.matrix());
        total += p * p * a.trace_product(&a).re;
    }
    if total <= 0.0 {
        return invalid("degenerate ensemble");
    }
    Ok(-total.log2())
}

/// S(ρ) = −Tr ρ log ρ
pub fn von_neumann(rho: &DensityMatrix) -> f64 {
    let ev: Vec<f64> = rho.eig().values.into_iter().map(|l| l.max(0.0)).collect();
    shannon_raw(&ev)
}

/// χ = S(Σ p_x ρ_x) − Σ p_x S(ρ_x).
pub fn holevo(s: &CqState) -> f64 {
    let avg = DensityMatrix::from_trusted(s.average());
    let cond: f64 = s.weights.probs().iter().zip(&s.conditionals).map(|(p, r)| p * von_neumann(r)).sum();
    von_neumann(&avg) - cond
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::random::{random_density, rng};
    use crate::matcore::{gates, C64};
    use crate::mubclifford::OrthonormalBasis;

    fn pd(v: &[f64]) -> ProbDist {
        ProbDist::new(v.to_vec()).unwrap()
    }

    #[test]
    fn shannon_examples() {
        assert_eq!(shannon(&pd(&[1.0, 0.0])), 0.0);
        assert!((shannon(&pd(&[0.5, 0.5])) - 1.0).abs() < 1e-15);
        // −¾ log ¾ − ¼ log ¼
        let want = -(0.75f64 * 0.75f64.log2() + 0.25 * 0.25f64.log2());
        assert!((shannon(&pd(&[0.75, 0.25])) - want).abs() < 1e-15);
        assert!((want - 0.811278).abs() < 1e-6);
    }

    #[test]
    fn renyi_examples() {
        assert!((renyi(&ProbDist::uniform(4), 2.0).unwrap() - 2.0).abs() < 1e-12);
        let n = 4;
        let tail = 2f64.powi(-(n + 1));
        let mut p = vec![0.5 + tail];
        p.extend(std::iter::repeat_n(tail, (1 << n) - 1));
        let p = ProbDist::new(p).unwrap();
        let hmin = renyi(&p, MIN_ENTROPY).unwrap();
        assert!((hmin - 0.91254).abs() < 1e-4, "{hmin}");
        assert!((renyi(&pd(&[0.75, 0.25]), 2.0).unwrap() - (16.0f64 / 10.0).log2()).abs() < 1e-12);
        assert!(renyi(&pd(&[0.5, 0.5]), 1.0).is_err());
        assert!(renyi(&pd(&[0.5, 0.5]), 0.0).is_err());
    }

    #[test]
    fn binary_entropy_examples() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert!((binary_entropy(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((binary_entropy(0.029).unwrap() - 0.1893518).abs() < 1e-6);
        assert!(binary_entropy(1.2).is_err());
    }

    #[test]
    fn measurement_entropy_examples() {
        let comp = OrthonormalBasis::computational(2);
        let had = OrthonormalBasis::from_unitary(&gates::hadamard()).unwrap();
        let zero = PureState::basis(2, 0);
        let plus = PureState::normalized(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        assert!(measurement_entropy(&comp, &zero).unwrap().abs() < 1e-15);
        assert!((measurement_entropy(&comp, &plus).unwrap() - 1.0).abs() < 1e-12);
        assert!((measurement_entropy(&had, &zero).unwrap() - 1.0).abs() < 1e-12);
        assert!(measurement_entropy(&comp, &PureState::basis(3, 0)).is_err());
    }

    #[test]
    fn collision_entropy_examples() {
        let states: Vec<DensityMatrix> = (0..4).map(|k| PureState::basis(4, k).density()).collect();
        let cq = CqState::from_ensemble(ProbDist::uniform(4), states).unwrap();
        assert!(quantum_collision_cond(&cq).unwrap().abs() < 1e-12);

        let single = CqState::from_ensemble(pd(&[1.0]), vec![PureState::basis(2, 0).density()]).unwrap();
        assert!(quantum_collision_cond(&single).unwrap().abs() < 1e-12);

        let sigma = random_density(&mut rng(3), 2);
        let same = CqState::from_ensemble(ProbDist::uniform(4), vec![sigma; 4]).unwrap();
        assert!((quantum_collision_cond(&same).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn holevo_of_orthogonal_ensemble() {
        let states: Vec<DensityMatrix> = (0..2).map(|k| PureState::basis(2, k).density()).collect();
        let cq = CqState::from_ensemble(ProbDist::uniform(2), states).unwrap();
        assert!((holevo(&cq) - 1.0).abs() < 1e-12);
    }
}
