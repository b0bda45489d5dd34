//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;

use qcrypt::entropy::{quantum_collision_cond, CqState, ProbDist};
use qcrypt::games::{
    chained_certificate, chained_matrix, classical_value, correlation_bound, game_value, simulate_single_prover,
    XorGame,
};
use qcrypt::locking::{locking_accessible_info, qbsc_constant, qbsc_impossibility, qbsc_xi, LockingFamily};
use qcrypt::matcore::random::{random_density, rng};
use qcrypt::matcore::{DensityMatrix, HermitianMatrix, PureState};
use qcrypt::mubclifford::{clifford_generators, latin_square_mub_prime, standard_bases, vector_state};
use qcrypt::noisyot::{
    depolarizing_delta_max, pa_exhaustive_check, practical_crossover, simulate_rot, verify_depolarizing_theorem,
    Attack, LinearCode, PracticalParams, RotParams, RotSetting,
};
use qcrypt::pistar::{
    helstrom, min_storage, optimal_guessing, pistar_and_sdp, pistar_and_value, pistar_xor_value,
    three_basis_construction, FunctionTable, HiddenFunctionEnsemble,
};
use qcrypt::sdpsolve::{gram_problem, solve, verify_certificate};
use qcrypt::uncertainty::{
    clifford_collision_relation, clifford_shannon_relation, meta_uncertainty_check, min_avg_shannon,
    random_admissible_components,
};

const SEED: u64 = 20_240_601;
const SDP_TOL: f64 = 1e-10;
const RESTARTS: usize = 48;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: qcrypt::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn within_time(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    check(t < limit, || format!("took {t:.2?}, limit {limit:?}"))
}

fn tsirelson() -> Outcome {
    let start = Instant::now();
    let target = 2.0 * 2f64.sqrt();
    let p = lib(gram_problem(&[vec![1.0, 1.0], vec![1.0, -1.0]]))?;
    let s = lib(solve(&p, SDP_TOL))?;
    let rep = lib(verify_certificate(&p, &s.primal, &s.dual, 1e-6))?;
    check((s.primal_value - target).abs() < 1e-6, || format!("primal {}", s.primal_value))?;
    check((rep.dual_value - target).abs() < 1e-6, || format!("certified dual {}", rep.dual_value))?;
    check(rep.optimal, || "certificate not optimal".into())?;
    within_time(start, Duration::from_secs(1))?;
    Ok(format!("value {:.9}, dual {:.9}", s.primal_value, rep.dual_value))
}

fn chained() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in 2..=8 {
        let exact = 2.0 * n as f64 * (PI / (2 * n) as f64).cos();
        let v = lib(correlation_bound(&lib(chained_matrix(n))?, SDP_TOL))?;
        check((v.value - exact).abs() < 1e-5, || format!("n={n}: solver {} vs {exact}", v.value))?;
        let cert = lib(chained_certificate(n))?;
        check(cert.report.optimal, || format!("n={n}: analytic certificate not optimal"))?;
        check((cert.closed_form - exact).abs() < 1e-12, || format!("n={n}: closed form {}", cert.closed_form))?;
        worst = worst.max((v.value - exact).abs());
    }
    within_time(start, Duration::from_secs(5))?;
    Ok(format!("n = 2..8, worst deviation {worst:.1e}"))
}

fn chsh_game() -> Outcome {
    let g = XorGame::chsh();
    let (classical, _) = lib(classical_value(&g))?;
    check(classical == 0.75, || format!("classical {classical}"))?;
    let v = lib(game_value(&g, SDP_TOL))?;
    let q = 0.5 + 1.0 / (2.0 * 2f64.sqrt());
    check((v.quantum - q).abs() < 1e-6, || format!("quantum {}", v.quantum))?;
    let sp = lib(simulate_single_prover(&g, &v.alice_vectors, &v.bob_vectors))?;
    check((sp - v.quantum).abs() < 1e-6, || format!("single prover {sp} vs {}", v.quantum))?;
    Ok(format!("classical {classical}, quantum {:.9}, single prover {sp:.9}", v.quantum))
}

fn helstrom_closed_forms() -> Outcome {
    let mut out = Vec::new();
    for (bases, exact) in [(2usize, 0.5 + 0.5 / 2f64.sqrt()), (3, 0.5 + 0.5 / 3f64.sqrt())] {
        let e = lib(HiddenFunctionEnsemble::standard(lib(FunctionTable::bit(1, 0))?, bases))?;
        let s = e.star_states();
        let rho0 = lib(DensityMatrix::new(s[0].scale(2.0)))?;
        let rho1 = lib(DensityMatrix::new(s[1].scale(2.0)))?;
        let p = lib(helstrom(&rho0, &rho1, 0.5))?.p_success;
        check((p - exact).abs() < 1e-9, || format!("{bases} bases: {p} vs {exact}"))?;
        out.push(format!("{bases} bases {p:.7}"));
    }
    Ok(out.join(", "))
}

fn pistar_and() -> Outcome {
    let mut out = Vec::new();
    for n in 1..=3 {
        let closed = lib(pistar_and_value(n))?;
        let sdp = lib(pistar_and_sdp(n, SDP_TOL))?;
        check((closed - sdp).abs() < 1e-5, || format!("n={n}: closed {closed} vs sdp {sdp}"))?;
        out.push(format!("n={n} {sdp:.6}"));
    }
    let n1 = lib(pistar_and_value(1))?;
    let n2 = lib(pistar_and_value(2))?;
    check((n1 - 0.853553).abs() < 1e-6, || format!("n=1: {n1}"))?;
    check((n2 - 0.958333).abs() < 1e-6, || format!("n=2: {n2}"))?;
    Ok(out.join(", "))
}

fn pistar_xor() -> Outcome {
    let odd = 0.5 + 0.5 / 2f64.sqrt();
    for (n, star) in [(1usize, odd), (2, 0.75), (3, odd)] {
        let v = lib(pistar_xor_value(n, 2))?;
        let numeric = v.star_numeric.ok_or("missing trace-distance value")?;
        check((v.star - star).abs() < 1e-12, || format!("n={n}: closed form {}", v.star))?;
        check((numeric - star).abs() < 1e-9, || format!("n={n}: trace distance {numeric} vs {star}"))?;
    }
    for n in [2usize, 4] {
        let v = lib(pistar_xor_value(n, 2))?;
        let bell = v.bell_numeric.ok_or("missing Bell strategy value")?;
        check((bell - 1.0).abs() < 1e-9, || format!("n={n}: Bell strategy {bell}"))?;
    }
    Ok("STAR 0.853553 / 0.75 / 0.853553 for n = 1, 2, 3; Bell strategy 1 for n = 2, 4".into())
}

fn table(index: usize) -> Vec<usize> {
    (0..4).map(|x| (index >> x) & 1).collect()
}

fn min_storage_check() -> Outcome {
    let start = Instant::now();
    let commuting = [0usize, 6, 9, 15];
    let mut candidates: Vec<usize> = (0..16).filter(|i| !commuting.contains(i)).collect();
    let mut r = rng(SEED);
    candidates.shuffle(&mut r);
    let mut worst: f64 = 0.0;
    for (k, &idx) in candidates.iter().take(10).enumerate() {
        let e = lib(HiddenFunctionEnsemble::standard(lib(FunctionTable::new(2, table(idx)))?, 2))?;
        let res = lib(min_storage(&e.projectors(), SEED + k as u64))?;
        check(res.q == 1, || format!("table {idx:04b}: q = {}", res.q))?;
        let all: Vec<HermitianMatrix> = e.projectors().into_iter().flatten().collect();
        let resid = res
            .commutation_residual
            .max(res.decomposition.pinching_residual(&all))
            .max(res.decomposition.orthogonality_residual());
        check(resid <= 1e-7, || format!("table {idx:04b}: residual {resid:.1e}"))?;
        worst = worst.max(resid);
    }
    for idx in 0..16 {
        let e = lib(HiddenFunctionEnsemble::standard(lib(FunctionTable::new(2, table(idx)))?, 2))?;
        let res = lib(min_storage(&e.projectors(), SEED))?;
        check(res.q <= 1, || format!("table {idx:04b}: q = {}", res.q))?;
    }
    let three = lib(three_basis_construction([0.3, 0.7]))?;
    let res = lib(min_storage(&three, SEED))?;
    check(res.q == 2, || format!("three-basis construction: q = {}", res.q))?;
    check(res.commutation_residual <= 1e-7, || format!("three-basis residual {:.1e}", res.commutation_residual))?;
    worst = worst.max(res.commutation_residual);
    within_time(start, Duration::from_secs(10))?;
    Ok(format!("q = 1 on 10 sampled functions, q = 2 = log d on three bases, worst residual {worst:.1e}"))
}

fn uncertainty_tightness() -> Outcome {
    let mut worst: f64 = 0.0;
    let product = lib(lib(standard_bases(2))?.take(3))?;
    let res = lib(min_avg_shannon(&product, RESTARTS, SEED))?;
    check((res.achieved - 1.0).abs() < 1e-3, || format!("product d=4 m=3: {}", res.achieved))?;
    worst = worst.max((res.achieved - 1.0).abs());
    let latin = lib(latin_square_mub_prime(3))?;
    let half_log9 = 9f64.log2() / 2.0;
    for m in 2..=4 {
        let res = lib(min_avg_shannon(&lib(latin.take(m))?, RESTARTS, SEED))?;
        check((res.achieved - half_log9).abs() < 1e-3, || format!("Latin d=9 m={m}: {}", res.achieved))?;
        worst = worst.max((res.achieved - half_log9).abs());
    }
    for n in 1..=2 {
        for k in 2..=(2 * n + 1).min(5) {
            let sh = lib(clifford_shannon_relation(n, k, RESTARTS, SEED))?;
            let target = 1.0 - 1.0 / k as f64;
            check((sh.bound - target).abs() < 1e-12 && sh.gap().abs() < 1e-3, || {
                format!("Shannon n={n} K={k}: {}", sh.achieved)
            })?;
            let co = lib(clifford_collision_relation(n, k, RESTARTS, SEED))?;
            let target = 1.0 - (1.0 + 1.0 / k as f64).log2();
            check((co.bound - target).abs() < 1e-12 && co.gap().abs() < 1e-3, || {
                format!("collision n={n} K={k}: {}", co.achieved)
            })?;
            worst = worst.max(sh.gap().abs()).max(co.gap().abs());
        }
    }
    Ok(format!("worst gap {worst:.1e}"))
}

fn meta_uncertainty() -> Outcome {
    let mut r = rng(SEED);
    let mut max_sum: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    for n in 1..=2 {
        let g = lib(clifford_generators(n))?;
        for _ in 0..1000 {
            let rho = random_density(&mut r, 1 << n);
            let s = lib(meta_uncertainty_check(&rho, &g))?;
            check(s <= 1.0 + 1e-9, || format!("n={n}: Σg² = {s}"))?;
            max_sum = max_sum.max(s);
        }
        for _ in 0..1000 {
            let comps = random_admissible_components(&mut r, 2 * n + 1);
            let l = lib(vector_state(&comps, &g))?.min_eigenvalue();
            check(l >= -1e-9, || format!("n={n}: admissible vector gives eigenvalue {l}"))?;
            min_eig = min_eig.min(l);
        }
    }
    Ok(format!("max Σg² {max_sum:.9}, min eigenvalue {min_eig:.2e}"))
}

fn locking() -> Outcome {
    let std3 = lib(locking_accessible_info(LockingFamily::Standard { n: 2, bases: 3 }, RESTARTS, SEED))?;
    check((std3.upper - 1.0).abs() < 1e-3 && (std3.lower - 1.0).abs() < 1e-3, || {
        format!("standard n=2: [{}, {}]", std3.lower, std3.upper)
    })?;
    let latin = lib(locking_accessible_info(LockingFamily::Latin { s: 3, bases: 4 }, RESTARTS, SEED))?;
    let log3 = 3f64.log2();
    check((latin.upper - log3).abs() < 1e-3 && (latin.lower - log3).abs() < 1e-3, || {
        format!("Latin d=9: [{}, {}]", latin.lower, latin.upper)
    })?;
    Ok(format!(
        "standard n=2 [{:.6}, {:.6}], Latin d=9 [{:.6}, {:.6}]",
        std3.lower, std3.upper, latin.lower, latin.upper
    ))
}

fn random_cq<R: Rng>(r: &mut R) -> Result<CqState, String> {
    let k = r.random_range(2..=4);
    let d = r.random_range(2..=3);
    let states: Vec<DensityMatrix> = (0..k).map(|_| random_density(r, d)).collect();
    let w: Vec<f64> = (0..k).map(|_| r.random_range(0.05..1.0)).collect();
    lib(CqState::from_ensemble(lib(ProbDist::normalized(w))?, states))
}

fn qbsc() -> Outcome {
    let c = qbsc_constant();
    check((c - 7.609640).abs() < 1e-6, || format!("c = {c}"))?;
    let verdict = lib(qbsc_impossibility(20.0, 5.0, 5.0))?;
    check(!verdict.possible, || format!("(20, 5, 5) reported possible, slack {}", verdict.slack))?;
    let states: Vec<DensityMatrix> = (0..4).map(|k| PureState::basis(4, k).density()).collect();
    let cq = lib(CqState::from_ensemble(ProbDist::uniform(4), states))?;
    let xi = lib(qbsc_xi(&cq, 2))?;
    check((xi - 2.0).abs() < 1e-12, || format!("ξ = {xi}"))?;
    let mut r = rng(SEED);
    let mut min_margin = f64::INFINITY;
    for _ in 0..100 {
        let cq = random_cq(&mut r)?;
        let lemma = 2f64.powf(-lib(quantum_collision_cond(&cq))?);
        let srm = lib(cq.square_root_success())?;
        let opt = lib(optimal_guessing(&cq, SDP_TOL))?;
        check(srm >= lemma - 1e-9, || format!("square-root measurement {srm} < {lemma}"))?;
        check(opt >= lemma - 1e-7, || format!("optimal guessing {opt} < {lemma}"))?;
        min_margin = min_margin.min(opt - lemma);
    }
    Ok(format!("c = {c:.6}, ξ = {xi}, guessing lemma margin ≥ {min_margin:.1e}"))
}

fn noisy_ot() -> Outcome {
    let start = Instant::now();
    let t = FRAC_1_SQRT_2;
    let below = lib(depolarizing_delta_max(t - 1e-12))?;
    let above = lib(depolarizing_delta_max(t + 1e-12))?;
    check((below - above).abs() < 1e-9, || format!("jump at 1/√2: {below} vs {above}"))?;

    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_attain: f64 = 0.0;
    for r in [0.0, 0.3, t, 0.9, 1.0] {
        let rep = lib(verify_depolarizing_theorem(r, 200))?;
        check(rep.never_exceeds(1e-4), || format!("r={r}: grid max {} above {}", rep.max, rep.closed_form))?;
        check(rep.attains(2e-3), || format!("r={r}: grid max {} misses {}", rep.max, rep.closed_form))?;
        worst_excess = worst_excess.max(rep.max - rep.closed_form);
        worst_attain = worst_attain.max((rep.max - rep.closed_form).abs());
    }

    let breidbart = 0.5 + 0.5 / 2f64.sqrt();
    let p = lib(practical_crossover(breidbart))?;
    check((p - 0.029).abs() <= 0.002, || format!("crossover {p}"))?;

    let perfect = RotSetting::Perfect(lib(RotParams::new(64, 1, SEED))?);
    let clean = lib(simulate_rot(&perfect, Attack::None, 1000))?;
    check(clean.correctness_rate == 1.0, || format!("noiseless correctness {}", clean.correctness_rate))?;

    let practical = RotSetting::Practical(lib(PracticalParams::new(
        lib(RotParams::new(64, 1, SEED))?,
        0.5,
        0.02,
        LinearCode::hamming74(),
    ))?);
    let noisy = lib(simulate_rot(&practical, Attack::None, 1000))?;
    check(noisy.correctness_rate >= 0.99, || format!("noisy correctness {}", noisy.correctness_rate))?;
    within_time(start, Duration::from_secs(120))?;
    Ok(format!(
        "grid excess {worst_excess:.1e}, attain gap {worst_attain:.1e}, crossover {p:.7}, correctness {} / {}",
        clean.correctness_rate, noisy.correctness_rate
    ))
}

fn privacy_amplification() -> Outcome {
    let c = lib(pa_exhaustive_check(3, 1))?;
    check(c.holds(), || format!("average {} above bound {}", c.average_distance, c.bound))?;
    check(c.worst_distance <= c.bound + 1e-12, || format!("worst {} above bound {}", c.worst_distance, c.bound))?;
    Ok(format!("average {:.6}, worst {:.6}, bound {:.6}", c.average_distance, c.worst_distance, c.bound))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        ("tsirelson", tsirelson),
        ("chained-chsh", chained),
        ("chsh-game", chsh_game),
        ("helstrom", helstrom_closed_forms),
        ("pistar-and", pistar_and),
        ("pistar-xor", pistar_xor),
        ("min-storage", min_storage_check),
        ("uncertainty-tightness", uncertainty_tightness),
        ("meta-uncertainty", meta_uncertainty),
        ("locking", locking),
        ("qbsc", qbsc),
        ("noisy-ot", noisy_ot),
        ("privacy-amplification", privacy_amplification),
    ];
    let total = Instant::now();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name:<22} {secs:>7.3}s  {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name:<22} {secs:>7.3}s  {why}", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed in {:.2}s", criteria.len() - failed, total.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
