use proptest::prelude::*;

use qcrypt::entropy::{measurement_entropy, quantum_collision_cond, renyi, shannon, CqState, ProbDist, MIN_ENTROPY};
use qcrypt::matcore::random::{random_density, random_pure, random_unitary, rng};
use qcrypt::matcore::{
    apply_channel, bloch_vector, fidelity, from_bloch, trace_distance, DensityMatrix, KrausChannel, PureState, C64,
};
use qcrypt::mubclifford::{pauli_mub, OrthonormalBasis};
use qcrypt::pistar::optimal_guessing;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trace_distance_is_a_metric_and_brackets_fidelity(seed in any::<u64>(), d in 2usize..=4) {
        let mut r = rng(seed);
        let (a, b, c) = (random_density(&mut r, d), random_density(&mut r, d), random_density(&mut r, d));
        let ab = trace_distance(&a, &b).unwrap();
        let bc = trace_distance(&b, &c).unwrap();
        let ac = trace_distance(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-7);
        let f = fidelity(&a, &b).unwrap();
        prop_assert!(1.0 - f <= ab + 1e-7);
        prop_assert!(ab <= (1.0 - f * f).max(0.0).sqrt() + 1e-7);
    }

    #[test]
    fn trace_distance_is_unitarily_invariant(seed in any::<u64>(), d in 2usize..=4) {
        let mut r = rng(seed);
        let (a, b) = (random_density(&mut r, d), random_density(&mut r, d));
        let u = random_unitary(&mut r, d);
        let before = trace_distance(&a, &b).unwrap();
        let after = trace_distance(&a.evolve(&u), &b.evolve(&u)).unwrap();
        prop_assert!((before - after).abs() < 1e-8);
    }

    #[test]
    fn channels_preserve_states(seed in any::<u64>(), p in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let u = random_unitary(&mut r, 2);
        let c = KrausChannel::depolarizing(p).unwrap().compose(&KrausChannel::unitary(u).unwrap()).unwrap();
        let rho = random_density(&mut r, 2);
        let out = apply_channel(&c, &rho).unwrap();
        prop_assert!((out.matrix().trace().re - 1.0).abs() < 1e-9);
        prop_assert!(out.as_hermitian().min_eigenvalue() >= -1e-9);
    }

    #[test]
    fn bloch_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_density(&mut r, 2);
        let back = from_bloch(bloch_vector(&rho).unwrap());
        let err = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| (back[(i, j)] - rho.matrix()[(i, j)]).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-10);
    }

    #[test]
    fn entropy_chain(weights in prop::collection::vec(0.0f64..1.0, 1..12)) {
        prop_assume!(weights.iter().sum::<f64>() > 1e-6);
        let p = ProbDist::normalized(weights).unwrap();
        let h = shannon(&p);
        let h2 = renyi(&p, 2.0).unwrap();
        let hmin = renyi(&p, MIN_ENTROPY).unwrap();
        prop_assert!((p.len() as f64).log2() >= h - 1e-9);
        prop_assert!(h >= h2 - 1e-9);
        prop_assert!(h2 >= hmin - 1e-9);
    }

    #[test]
    fn measurement_entropy_symmetries(seed in any::<u64>(), phase in 0.0f64..6.3) {
        let mut r = rng(seed);
        let basis = &pauli_mub(3).unwrap().bases()[1].clone();
        let psi = random_pure(&mut r, 3);
        let h = measurement_entropy(basis, &psi).unwrap();
        let rotated = PureState::new(psi.amplitudes().iter().map(|a| a * C64::from_polar(1.0, phase)).collect()).unwrap();
        prop_assert!((measurement_entropy(basis, &rotated).unwrap() - h).abs() < 1e-12);
        let mut vs = basis.vectors().to_vec();
        vs.rotate_left(1);
        let permuted = OrthonormalBasis::new(vs).unwrap();
        prop_assert!((measurement_entropy(&permuted, &psi).unwrap() - h).abs() < 1e-12);
    }
}

#[test]
fn guessing_lemma_holds_on_random_ensembles() {
    let mut r = rng(7);
    for _ in 0..100 {
        let k = r.random_range(2..=4);
        let d = r.random_range(2..=3);
        let states: Vec<DensityMatrix> = (0..k).map(|_| random_density(&mut r, d)).collect();
        let w: Vec<f64> = (0..k).map(|_| r.random_range(0.05..1.0)).collect();
        let cq = CqState::from_ensemble(ProbDist::normalized(w).unwrap(), states).unwrap();
        let lemma = 2f64.powf(-quantum_collision_cond(&cq).unwrap());
        assert!(cq.square_root_success().unwrap() >= lemma - 1e-9);
        assert!(optimal_guessing(&cq, 1e-10).unwrap() >= lemma - 1e-7);
    }
}

#[test]
fn bb84_bit_ensemble_guessing() {
    let plus = PureState::normalized(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
    let minus = PureState::normalized(vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]).unwrap();
    let rho0 = DensityMatrix::mixture(&[0.5, 0.5], &[PureState::basis(2, 0).density(), plus.density()]).unwrap();
    let rho1 = DensityMatrix::mixture(&[0.5, 0.5], &[PureState::basis(2, 1).density(), minus.density()]).unwrap();
    let cq = CqState::from_ensemble(ProbDist::uniform(2), vec![rho0, rho1]).unwrap();
    let h2 = quantum_collision_cond(&cq).unwrap();
    let opt = optimal_guessing(&cq, 1e-10).unwrap();
    assert!((opt - (0.5 + 0.5 / 2f64.sqrt())).abs() < 1e-12);
    assert!(2f64.powf(-h2) <= opt + 1e-12);
}
