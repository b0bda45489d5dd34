//! Seeded sampling of states and unitaries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{inner, norm, ComplexMatrix, DensityMatrix, PureState, C64};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian_c64(rng))
}

/// Normalised complex Gaussian vector.
pub fn random_pure<R: Rng + ?Sized>(rng: &mut R, d: usize) -> PureState {
    loop {
        let v: Vec<C64> = (0..d).map(|_| gaussian_c64(rng)).collect();
        if norm(&v) > 1e-8 {
            return PureState::normalized(v).expect("nonzero vector");
        }
    }
}

/// G G† / Tr(G G†) with G complex Gaussian.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DensityMatrix {
    random_density_rank(rng, d, d)
}

/// Same as [`random_density`] with G of shape d × k, giving rank ≤ k.
pub fn random_density_rank<R: Rng + ?Sized>(rng: &mut R, d: usize, k: usize) -> DensityMatrix {
    let g = gaussian_matrix(rng, d, k);
    let w = g.matmul(&g.adjoint());
    let tr = w.trace().re;
    DensityMatrix::from_trusted(w.scale(1.0 / tr))
}

/// Haar unitary: Gram–Schmidt QR of a Gaussian matrix, R with positive diagonal.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let g = gaussian_matrix(rng, d, d);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut v = g.column(j);
        for q in &cols {
            let c = inner(q, &v);
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= c * qi;
            }
        }
        let n = norm(&v);
        for vi in &mut v {
            *vi /= n;
        }
        cols.push(v);
    }
    ComplexMatrix::from_columns(&cols)
}

/// Uniform real unit vector in R^n.
pub fn random_unit_real<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv > 1e-8 {
            return v.into_iter().map(|x| x / nv).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_are_valid() {
        let mut r = rng(7);
        let rho = random_density(&mut r, 4);
        assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
        let u = random_unitary(&mut r, 5);
        assert!(u.matmul(&u.adjoint()).max_abs_diff(&ComplexMatrix::identity(5)) < 1e-12);
        let psi = random_pure(&mut r, 3);
        assert!((norm(psi.amplitudes()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn seeding_is_reproducible() {
        let a = random_density(&mut rng(11), 3);
        let b = random_density(&mut rng(11), 3);
        assert_eq!(a, b);
    }
}
