//! Checks against independent references: dense matrices built from bit
//! manipulation, closed forms, brute-force enumeration, and hand-computed
//! instances.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qtoken_core::adversary::{
    all_correct_bound_exact, eval_all_correct_bound, eval_forgery_bound, eval_forgery_bound_claim,
    mint_loaded,
};
use qtoken_core::audit::{report_chain_cheat_probability, report_prime_cheat_probability};
use qtoken_core::harness::{pattern_chain_slack, projection_slacks, swap_chain_terms};
use qtoken_core::quantum::{Subspace, trace_distance_advantage, DensityMatrix};
use qtoken_core::scheme::{token_from_values, token_state, SchemeParams, SecretString, SeriesId};
use qtoken_core::{RegisterLayout, SparseState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Register values of basis index `x`, first register most significant.
fn digits(x: usize, widths: &[usize]) -> Vec<usize> {
    let mut out = vec![0; widths.len()];
    let mut rest = x;
    for (slot, w) in out.iter_mut().zip(widths).rev() {
        *slot = rest & ((1 << w) - 1);
        rest >>= w;
    }
    out
}

fn join(d: &[usize], widths: &[usize]) -> usize {
    d.iter().zip(widths).fold(0, |acc, (v, w)| (acc << w) | v)
}

fn dim(widths: &[usize]) -> usize {
    1 << widths.iter().sum::<usize>()
}

/// The permutation matrix exchanging registers `a` and `b`.
fn swap_matrix(widths: &[usize], a: usize, b: usize) -> DMatrix<Complex64> {
    let n = dim(widths);
    let mut p = DMatrix::zeros(n, n);
    for x in 0..n {
        let mut d = digits(x, widths);
        d.swap(a, b);
        p[(join(&d, widths), x)] = c(1.0);
    }
    p
}

fn dense(state: &SparseState) -> DVector<Complex64> {
    DVector::from_vec(state.to_dense(1 << 12).unwrap())
}

/// `Tr_{others} |v⟩⟨v|` with the kept registers in the order given.
fn partial_trace(v: &DVector<Complex64>, widths: &[usize], keep: &[usize]) -> DMatrix<Complex64> {
    let kept_widths: Vec<usize> = keep.iter().map(|&r| widths[r]).collect();
    let kd = dim(&kept_widths);
    let mut rho = DMatrix::zeros(kd, kd);
    for x in 0..v.len() {
        for y in 0..v.len() {
            let (dx, dy) = (digits(x, widths), digits(y, widths));
            let traced_equal = (0..widths.len()).filter(|r| !keep.contains(r)).all(|r| dx[r] == dy[r]);
            if !traced_equal {
                continue;
            }
            let kx: Vec<usize> = keep.iter().map(|&r| dx[r]).collect();
            let ky: Vec<usize> = keep.iter().map(|&r| dy[r]).collect();
            rho[(join(&kx, &kept_widths), join(&ky, &kept_widths))] += v[x] * v[y].conj();
        }
    }
    rho
}

fn random_three(rng: &mut ChaCha8Rng) -> (Vec<usize>, RegisterLayout, SparseState) {
    let widths: Vec<usize> = (0..3).map(|_| rng.random_range(1..=2)).collect();
    let layout =
        RegisterLayout::from_widths(&[("r0", widths[0]), ("r1", widths[1]), ("r2", widths[2])]).unwrap();
    let state = SparseState::random(widths.iter().sum(), rng).unwrap();
    (widths, layout, state)
}

const NAMES: [&str; 3] = ["r0", "r1", "r2"];

#[test]
fn swap_probability_matches_explicit_swap_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..40 {
        let (widths, layout, state) = random_three(&mut rng);
        let v = dense(&state);
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            if widths[a] != widths[b] {
                assert!(state.swap_probability(&layout, NAMES[a], NAMES[b]).is_err());
                continue;
            }
            let p = swap_matrix(&widths, a, b);
            let overlap = (v.adjoint() * &p * &v)[(0, 0)];
            let expected = (1.0 - overlap.re) / 2.0;
            let got = state.swap_probability(&layout, NAMES[a], NAMES[b]).unwrap();
            assert!((got - expected).abs() < TOL, "{got} vs {expected}");
        }
    }
}

#[test]
fn swap_projection_matches_dense_projector() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let layout = RegisterLayout::uniform(&NAMES, 1).unwrap();
    let widths = [1, 1, 1];
    let identity = DMatrix::<Complex64>::identity(8, 8);
    for _ in 0..40 {
        let state = SparseState::random(3, &mut rng).unwrap();
        let v = dense(&state);
        let p = swap_matrix(&widths, 0, 2);
        for (bit, sign) in [(0u8, 1.0), (1u8, -1.0)] {
            let projected = (&identity + &p * c(sign)) * &v * c(0.5);
            let prob = projected.norm_squared();
            let (got_prob, post) = state.swap_project(&layout, "r0", "r2", bit).unwrap().expect("nonzero branch");
            assert!((got_prob - prob).abs() < TOL);
            let expected = projected.unscale(prob.sqrt());
            assert!((dense(&post) - expected).norm() < 1e-9);
        }
    }
}

#[test]
fn reduced_density_matches_brute_force_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let (widths, layout, state) = random_three(&mut rng);
        let v = dense(&state);
        for keep in [vec![0], vec![1, 2], vec![2, 0], vec![2, 1, 0]] {
            let names: Vec<&str> = keep.iter().map(|&r| NAMES[r]).collect();
            let got = state.reduced_density(&layout, &names).unwrap();
            let expected = partial_trace(&v, &widths, &keep);
            assert!((got.entries() - &expected).norm() < 1e-10, "keep {keep:?}");
        }
    }
}

#[test]
fn plus_and_zero_pass_the_swap_test_three_quarters_of_the_time() {
    let plus = SparseState::from_dense(&[c(0.5f64.sqrt()), c(0.5f64.sqrt())]).unwrap();
    let zero = SparseState::basis(1, 0).unwrap();
    let layout = RegisterLayout::uniform(&["a", "b"], 1).unwrap();
    let p1 = plus.tensor(&zero).unwrap().swap_probability(&layout, "a", "b").unwrap();
    assert!((1.0 - p1 - 0.75).abs() < TOL);
}

#[test]
fn pure_state_distinguishing_matches_closed_form() {
    let zero = SparseState::basis(1, 0).unwrap();
    let plus = SparseState::from_dense(&[c(0.5f64.sqrt()), c(0.5f64.sqrt())]).unwrap();
    let a = DensityMatrix::from_pure(&zero).unwrap();
    let b = DensityMatrix::from_pure(&plus).unwrap();
    let adv = trace_distance_advantage(&a, &b).unwrap();
    assert!((adv - (0.5 + 2f64.sqrt() / 4.0)).abs() < TOL);

    // for pure states ‖ρ − σ‖₁ = 2√(1 − |⟨φ|ψ⟩|²)
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..30 {
        let phi = SparseState::random(2, &mut rng).unwrap();
        let psi = SparseState::random(2, &mut rng).unwrap();
        let f = phi.inner_product(&psi).unwrap().norm_sqr();
        let adv = trace_distance_advantage(
            &DensityMatrix::from_pure(&phi).unwrap(),
            &DensityMatrix::from_pure(&psi).unwrap(),
        )
        .unwrap();
        assert!((adv - (0.5 + (1.0 - f).sqrt() / 2.0)).abs() < 1e-9);
    }
}

fn secret(k: u32, seed: u64) -> SecretString {
    let params = SchemeParams::new(k).unwrap();
    SecretString::random(&params, SeriesId::new("oracle").unwrap(), &mut ChaCha8Rng::seed_from_u64(seed))
}

#[test]
fn token_amplitudes_are_uniform() {
    let s = secret(4, 5);
    let token = token_state(&s).unwrap();
    assert_eq!(token.nnz(), 16);
    for (i, a) in token.iter() {
        assert!((a - c(0.25)).norm() < TOL);
        // index register holds i, value register F_S(i)
        assert_eq!(i & 0xf, s.block(i >> 4));
    }
    let toy = token_from_values(2, |i| 3 - i).unwrap();
    let pair = toy.tensor(&toy).unwrap();
    assert_eq!(pair.nnz(), 16);
    assert!(pair.iter().all(|(_, a)| (a - c(0.25)).norm() < TOL));
}

#[test]
fn tokens_differing_in_one_block_overlap_by_all_but_one_term() {
    for k in [4u32, 8] {
        let s = secret(k, 6);
        let size = 1u64 << k;
        let changed = 3;
        let a = token_from_values(k, |i| s.block(i)).unwrap();
        let b = token_from_values(k, |i| if i == changed { s.block(i) ^ 1 } else { s.block(i) }).unwrap();
        let overlap = a.inner_product(&b).unwrap();
        assert!((overlap - c(1.0 - 1.0 / size as f64)).norm() < TOL);
    }
}

#[test]
fn loaded_token_fails_the_swap_test_with_the_traced_overlap() {
    let k = 4;
    let s = secret(k, 7);
    let (loaded, layout) = mint_loaded(&s).unwrap();
    // the token alone is the uniform mixture over |i, F_S(i)⟩
    let token_only = loaded.reduced_density(&layout, &["token"]).unwrap();
    let eig = token_only.eigenvalues();
    let support: Vec<f64> = eig.iter().copied().filter(|l| l.abs() > 1e-9).collect();
    assert_eq!(support.len(), 16);
    assert!(support.iter().all(|l| (l - 1.0 / 16.0).abs() < 1e-9));

    let pattern = token_state(&s).unwrap();
    let joint = pattern.tensor(&loaded).unwrap();
    let joint_layout = RegisterLayout::from_widths(&[("pattern", 8), ("bank", 4), ("token", 8)]).unwrap();
    let p = report_prime_cheat_probability(&joint, &joint_layout, "pattern", "token").unwrap();
    assert!((p - 15.0 / 32.0).abs() < TOL, "{p}");
}

#[test]
fn forgery_bound_reference_values() {
    assert_eq!(eval_forgery_bound(256, 1, 1 << 16), 0.0390625);
    assert_eq!(eval_forgery_bound(256, 2, 1 << 16), 5.0 * 256.0 * 3.0 / 65536.0);
    assert_eq!(eval_forgery_bound(256, 100, 1 << 16), 1.0);
    assert_eq!(eval_forgery_bound_claim(256, 15, 1 << 16), 0.375);
    assert_eq!(eval_forgery_bound_claim(256, 16, 1 << 16), 0.375 * 17.0 / 16.0);
    assert_eq!(eval_forgery_bound_claim(256, 42, 1 << 16), 1.0);
    assert_eq!(eval_forgery_bound_claim(16, 1, 1 << 16), 6.0 * 16.0 * 2.0 / 65536.0);
    assert!((SchemeParams::new(16).unwrap().eps_f - 0.375).abs() < TOL);
}

/// Number of tuples in `Y^r` with at most `q` positions differing from a
/// fixed target, out of `|Y|^r`.
fn at_most_q_wrong(q: u64, r: u32, y: u64) -> (u64, u64) {
    let total = y.pow(r);
    let mut hits = 0u64;
    for t in 0..total {
        let mut rest = t;
        let mut wrong = 0;
        for _ in 0..r {
            wrong += u64::from(rest % y != 0);
            rest /= y;
        }
        hits += u64::from(wrong <= q);
    }
    (hits, total)
}

#[test]
fn all_correct_bound_matches_enumeration() {
    assert_eq!(eval_all_correct_bound(1, 2, 4).unwrap(), 7.0 / 16.0);
    assert_eq!(eval_all_correct_bound(0, 1, 9).unwrap(), 1.0 / 9.0);
    assert!(eval_all_correct_bound(2, 2, 4).is_err());
    for y in 2..=5u64 {
        for r in 1..=5u32 {
            for q in 0..u64::from(r) {
                let (hits, total) = at_most_q_wrong(q, r, y);
                let exact = all_correct_bound_exact(q, u64::from(r), y).unwrap();
                assert_eq!(
                    exact,
                    num_rational::BigRational::new(hits.into(), total.into()),
                    "q={q} r={r} y={y}"
                );
            }
        }
    }
}

// The three instances below are hand-computed states on which chain
// inequalities of the kind checked by the inequality suite fail. Random
// instances almost never land on them for the swap and pattern chains.

#[test]
fn projection_chain_fails_for_tilted_subspaces() {
    // v = e1, S2 = span(e2), S1 = span(e1 + e2):
    // ‖(v|S1)|S2‖ = 1/2 while ‖v|S2‖ = 0
    let e1 = DVector::from_vec(vec![c(1.0), c(0.0)]);
    let e2 = DVector::from_vec(vec![c(0.0), c(1.0)]);
    let s1 = Subspace::span(2, &[&e1 + &e2]);
    let s2 = Subspace::span(2, &[e2]);
    let (chain, difference) = projection_slacks(&e1, &s1, &s2);
    assert!((chain - 0.5).abs() < TOL, "{chain}");
    // the squared-difference form survives: 0 − 1/4 − 2·(1/√2)·1 < 0
    assert!((difference - (-0.25 - 2f64.sqrt())).abs() < TOL, "{difference}");
}

fn three_qubit(amps: &[(u64, f64)]) -> SparseState {
    SparseState::from_amplitudes(3, amps.iter().map(|&(i, a)| (i, c(a)))).unwrap()
}

#[test]
fn swap_chain_fails_on_a_two_term_state() {
    // (|010⟩ − 2|100⟩)/√5 over registers r0 r1 r2:
    // Swap(r0,r1) = 9/10, Swap(r1,r2) = 1/10, and after Swap(r1,r2) answers 0
    // (probability 9/10) Swap(r0,r1) = 25/36
    let x = three_qubit(&[(0b010, 1.0), (0b100, -2.0)]);
    let layout = RegisterLayout::uniform(&NAMES, 1).unwrap();
    let t = swap_chain_terms(&x, &layout, "r0", "r1", "r2").unwrap();
    assert!((t.direct - 0.9).abs() < TOL);
    assert!((t.first - 0.1).abs() < TOL);
    assert!((t.first_pass - 0.9).abs() < TOL);
    assert!((t.second - 25.0 / 36.0).abs() < TOL);
    assert!((t.slack() - 19.0 / 180.0).abs() < TOL);
    // the weighted form, the actual rejection probability of the two tests in
    // sequence, is below the direct test too: 1/10 + 9/10 · 25/36 = 29/40
    let sequence = t.first + t.first_pass * t.second;
    assert!((sequence - 29.0 / 40.0).abs() < TOL);
    assert!(sequence < t.direct);
}

#[test]
fn chained_audit_can_reject_less_often_than_a_single_audit() {
    // (|100⟩ − 2|010⟩)/√5 over (p, t1, t2): a single audit of t1 rejects with
    // 9/10, the chain (t2 first, then t1) with 1/10 + 9/10 · 25/36 = 29/40
    let chi = three_qubit(&[(0b100, 1.0), (0b010, -2.0)]);
    let layout = RegisterLayout::uniform(&["p", "t1", "t2"], 1).unwrap();
    let prime = report_prime_cheat_probability(&chi, &layout, "p", "t1").unwrap();
    let chain = report_chain_cheat_probability(&chi, &layout, "p", &["t1", "t2"]).unwrap();
    assert!((prime - 0.9).abs() < TOL);
    assert!((chain - 29.0 / 40.0).abs() < TOL);
    let slack = pattern_chain_slack(&chi, &layout, "p", "t1", "t2").unwrap();
    assert!((slack - 7.0 / 40.0).abs() < TOL);
}
