use proptest::prelude::*;

use qcrypt::matcore::random::{random_unitary, rng};
use qcrypt::matcore::KrausChannel;
use qcrypt::noisyot::{
    bit_guessing, channel_delta, depolarizing_delta_max, security_bound_practical, simulate_rot,
    verify_depolarizing_theorem, AffineHashFamily, Attack, Basis, RotParams, RotSetting,
};

#[test]
fn affine_hashing_is_two_universal() {
    for n in 1..=8 {
        for ell in 1..=4 {
            let f = AffineHashFamily::new(n, ell).unwrap();
            let p = f.max_collision_probability().unwrap();
            assert!(p <= 2f64.powi(-(ell as i32)) + 1e-15, "n={n} ℓ={ell}: {p}");
        }
    }
}

#[test]
fn affine_hashing_two_universal_by_enumeration() {
    for (n, ell) in [(3, 1), (4, 2), (5, 2), (3, 3)] {
        let f = AffineHashFamily::new(n, ell).unwrap();
        let members = f.enumerate().unwrap();
        let bits = |x: usize| (0..n).map(|i| ((x >> i) & 1) as u8).collect::<Vec<u8>>();
        for x in 0..1usize << n {
            for y in (x + 1)..1usize << n {
                let hits = members.iter().filter(|h| h.apply(&bits(x)) == h.apply(&bits(y))).count();
                let p = hits as f64 / members.len() as f64;
                assert!(p <= 2f64.powi(-(ell as i32)) + 1e-15, "n={n} ℓ={ell} x={x} y={y}: {p}");
            }
        }
    }
}

#[test]
fn theorem_never_exceeded_on_r_grid() {
    for k in 0..=20 {
        let r = k as f64 * 0.05;
        let rep = verify_depolarizing_theorem(r, 60).unwrap();
        assert!(rep.never_exceeds(1e-9), "r={r}: {} > {}", rep.max, rep.closed_form);
    }
}

#[test]
fn noiseless_protocol_is_always_correct() {
    for n in [16, 32, 64] {
        let setting = RotSetting::Perfect(RotParams::new(n, 1, 3).unwrap());
        let stats = simulate_rot(&setting, Attack::None, 200).unwrap();
        assert_eq!(stats.correct, stats.trials);
        assert_eq!(stats.aborted, 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn practical_bound_monotone(m in 1usize..2000, p in 0.0f64..0.45, dp in 0.0f64..0.04, delta in 0.5f64..0.99, dd in 0.0f64..0.01) {
        let base = security_bound_practical(m, 1, p, delta).unwrap();
        prop_assert!(security_bound_practical(m, 1, p + dp, delta).unwrap() >= base);
        prop_assert!(security_bound_practical(m, 1, p, delta + dd).unwrap() >= base);
    }

    #[test]
    fn channel_delta_at_most_one(seed in any::<u64>(), r in 0.0f64..=1.0) {
        let mut g = rng(seed);
        let u = random_unitary(&mut g, 2);
        let c = KrausChannel::depolarizing(r).unwrap().compose(&KrausChannel::unitary(u).unwrap()).unwrap();
        let d = channel_delta(&c).unwrap();
        prop_assert!(d <= 1.0 + 1e-9);
        if d >= 1.0 - 1e-9 {
            prop_assert!((bit_guessing(&c, Basis::Plus).unwrap() - 1.0).abs() < 1e-7);
            prop_assert!((bit_guessing(&c, Basis::Cross).unwrap() - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn delta_max_between_breidbart_and_one(r in 0.0f64..=1.0) {
        let d = depolarizing_delta_max(r).unwrap();
        prop_assert!(d >= 0.5 + 0.5 / 2f64.sqrt() - 1e-12);
        prop_assert!(d <= 1.0 + 1e-12);
    }
}
