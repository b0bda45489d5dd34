use proptest::prelude::*;

use qcrypt::matcore::random::{random_density, random_pure, rng};
use qcrypt::matcore::ComplexMatrix;
use qcrypt::mubclifford::{
    check_mutually_unbiased, clifford_generators, latin_square_mub_prime, pauli_mub, standard_bases, vector_components,
    MubSet,
};
use qcrypt::uncertainty::{average_collision, average_shannon, full_mub_collision_bound, min_avg_shannon};

fn families() -> Vec<MubSet> {
    vec![
        standard_bases(1).unwrap(),
        standard_bases(2).unwrap(),
        standard_bases(3).unwrap(),
        pauli_mub(2).unwrap(),
        pauli_mub(3).unwrap(),
        pauli_mub(5).unwrap(),
        latin_square_mub_prime(3).unwrap(),
    ]
}

#[test]
fn constructions_are_unbiased() {
    for m in families() {
        let rep = check_mutually_unbiased(m.bases(), 1e-8);
        assert!(rep.unbiased, "d={} worst {}", m.dim(), rep.worst_deviation);
    }
}

#[test]
fn average_entropy_never_below_half_log_d() {
    let mut r = rng(11);
    for m in families() {
        let half = (m.dim() as f64).log2() / 2.0;
        let full = m.len() == m.dim() + 1;
        for _ in 0..500 {
            let psi = random_pure(&mut r, m.dim());
            assert!(average_shannon(&m, psi.amplitudes()) >= half - 1e-9);
            if full {
                assert!(average_collision(&m, psi.amplitudes()) >= full_mub_collision_bound(&m) - 1e-9);
            }
        }
    }
}

#[test]
fn minimizer_is_an_upper_bound_on_the_minimum() {
    let m = pauli_mub(3).unwrap();
    let res = min_avg_shannon(&m, 16, 3).unwrap();
    let mut r = rng(5);
    for _ in 0..200 {
        let psi = random_pure(&mut r, 3);
        assert!(average_shannon(&m, psi.amplitudes()) >= res.achieved - 1e-9);
    }
    assert!(res.achieved >= res.bound - 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn clifford_reflection_preserves_vector_norm(seed in any::<u64>(), n in 1usize..=2) {
        let mut r = rng(seed);
        let g = clifford_generators(n).unwrap();
        let rho = random_density(&mut r, 1 << n);
        let dir: Vec<f64> = (0..=2 * n).map(|_| rand::Rng::random_range(&mut r, -1.0..1.0)).collect();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let mut m = ComplexMatrix::zeros(1 << n, 1 << n);
        for (j, x) in dir.iter().enumerate() {
            m = &m + &g.gamma(j).scale(x / norm);
        }
        let refl = g.gamma(1).matmul(&m);
        let rotated = rho.evolve(&refl);
        let before: f64 = vector_components(&rho, &g).unwrap().iter().map(|x| x * x).sum();
        let after: f64 = vector_components(&rotated, &g).unwrap().iter().map(|x| x * x).sum();
        prop_assert!((before - after).abs() < 1e-8);
    }
}
