use num_bigint::BigUint;
use otsdec_estimator::*;

fn binom(n: u64, k: u64) -> BigUint {
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn big_log2(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 52 {
        return (u64::try_from(x).unwrap() as f64).log2();
    }
    let shift = bits - 52;
    let top = u64::try_from(x >> shift).unwrap();
    (top as f64).log2() + shift as f64
}

#[test]
fn brute_force_counts() {
    assert_eq!(brute_force_bits(1 << 13, 23.0, 0), 0.0);

    // every weight-2 polynomial over Z_3 at d=8, enumerated
    let mut count = 0u32;
    for mask in 0u32..(1 << 8) {
        if mask.count_ones() == 2 {
            count += 2 * 2;
        }
    }
    assert_eq!(count, 112);
    let bits = brute_force_bits(8, 3f64.log2(), 2);
    assert!((bits - 112f64.log2()).abs() < 1e-9, "{bits}");
    assert!((bits - 6.807).abs() < 1e-3);
    assert!((mitm_bits(8, 3f64.log2(), 2) - bits / 2.0).abs() < 1e-12);

    // the ternary space 3^d is about 2^12984 at d=2^13 and never binds
    let ternary = 8192.0 * 3f64.log2();
    assert!((ternary - 12984.0).abs() < 1.0);
    for h in [12usize, 17, 39] {
        assert!(brute_force_bits(1 << 13, 23.0, h) < ternary);
    }
}

#[test]
fn composite_enumeration_against_exact_binomials() {
    let d = 1 << 13;
    let with_q2 = composite_enum_bits(d, 23.0, 6, 2, 3);
    let a = log2_binomial(d, 6) + 6.0 * ((1u64 << 23) as f64 - 1.0).log2();
    assert!((with_q2 - 0.5 * (a + log2_binomial(d, 3))).abs() < 1e-9);

    let exact = binom(16, 2) * 16u32 * 16u32 * binom(16, 2) * 16u32 * 16u32;
    let got = composite_enum_bits(16, 17f64.log2(), 2, 17, 2);
    assert!((got - big_log2(&exact) / 2.0).abs() < 1e-9);

    for (n, k) in [(8192u64, 6u64), (65536, 26), (16, 3), (100, 50)] {
        let exact = big_log2(&binom(n, k));
        assert!((log2_binomial(n as usize, k as usize) - exact).abs() < 1e-6 * exact.max(1.0));
    }
}

#[test]
fn expected_norms_and_ratio() {
    assert_eq!(format!("{:.2}", expected_secret_norm(32)), "4.62");
    assert_eq!(format!("{:.2}", expected_secret_norm(96)), "8.00");
    let c1 = target_ratio_c(1024, 30.0, 20.0, 1000.0);
    let c4 = target_ratio_c(1024, 30.0, 20.0, 4000.0);
    assert!((c4 / c1 - 2.0).abs() < 1e-12);
    assert!((alpha_balance(4.0, 8.0) - 0.5).abs() < 1e-15);
    assert!((expected_blind_norm(10.0, 12) - 1024.0).abs() < 1e-9);
}

#[test]
fn bkz_cost_model() {
    assert_eq!(format!("{:.2}", bkz_poly(20.0)), "29.77");
    assert!((bkz_log_ops(20.0, 1024) - (bkz_poly(20.0) + 10.0 + 7.0)).abs() < 1e-12);
    let mut prev = delta_from_beta(50.0);
    for beta in 51..=1000 {
        let d = delta_from_beta(beta as f64);
        assert!(d < prev, "beta {beta}");
        prev = d;
    }
}

#[test]
fn beta_inversion() {
    let b = beta_from_delta(delta_from_beta(300.0), 4000).unwrap();
    assert_eq!(b.beta, 300);
    assert!(!b.clamped);
    let easy = beta_from_delta(1.05, 100).unwrap();
    assert_eq!(
        easy,
        BetaChoice {
            beta: 50,
            clamped: true
        }
    );
    assert!(matches!(
        beta_from_delta(1.0001, 200),
        Err(EstimatorError::NoFeasibleBeta { .. })
    ));
}

#[test]
fn gaussian_heuristic_delta_regime() {
    // read as delta - 1 <= 0.0005 beyond d = 2^10
    for k in 12..=16 {
        assert!(gaussian_heuristic_delta(1 << k) - 1.0 <= 0.0005, "d=2^{k}");
    }
    let d10 = gaussian_heuristic_delta(1 << 10);
    assert!((d10 - 1.0 - 0.00117).abs() < 1e-5);
    for k in 10..=16 {
        let d = 1usize << k;
        assert!(
            beta_from_delta(gaussian_heuristic_delta(d), 2 * d).is_err(),
            "d=2^{k}"
        );
    }
}

fn subsets(n: usize, k: usize) -> Vec<u32> {
    (0u32..(1 << n))
        .filter(|m| m.count_ones() as usize == k)
        .collect()
}

#[test]
fn zf_probability_edges() {
    let (p0, p) = zf_success_prob(64, 5, 0);
    assert_eq!((p0, p), (1.0, 1.0));
    let (p0, _) = zf_success_prob(16, 3, 13);
    assert!((p0 - 1.0 / 560.0).abs() < 1e-15);
}

#[test]
fn zf_probability_by_enumeration() {
    let (d, h, r) = (16usize, 3usize, 4usize);
    let supports = subsets(d, h);
    let guesses = subsets(d, r);
    // single guess: fraction of supports that a fixed J misses
    let j = guesses[0];
    let miss = supports.iter().filter(|&&s| s & j == 0).count();
    let (p0, p) = zf_success_prob(d, h, r);
    assert_eq!(miss, 220);
    assert_eq!(supports.len(), 560);
    assert!((p0 - miss as f64 / supports.len() as f64).abs() < 1e-15);

    // d independent uniform guesses: average over supports of
    // 1 - (1 - P[J misses S])^d, with P enumerated over all J
    let lifted: f64 = supports
        .iter()
        .map(|&s| {
            let hit = guesses.iter().filter(|&&g| g & s == 0).count() as f64;
            1.0 - (1.0 - hit / guesses.len() as f64).powi(d as i32)
        })
        .sum::<f64>()
        / supports.len() as f64;
    assert!((p - lifted).abs() < 1e-12, "{p} vs {lifted}");

    // the cyclic-shift union for a fixed J bounds it from above here
    let rot = |m: u32, k: usize| ((m << k) | (m >> (d - k))) & 0xffff;
    let union = supports
        .iter()
        .filter(|&&s| (0..d).any(|k| rot(j, k) & s == 0))
        .count() as f64
        / supports.len() as f64;
    assert!(union >= p);
}

#[test]
fn zf_probability_monotone() {
    for d in [64usize, 256] {
        let mut prev = 1.0;
        for r in 0..=d - 5 {
            let (p0, p) = zf_success_prob(d, 5, r);
            assert!((0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&p0));
            assert!(p <= prev + 1e-15);
            prev = p;
        }
    }
    for r in [10usize, 40] {
        let mut prev = 0.0;
        for d in [64usize, 128, 256, 512] {
            let (p0, _) = zf_success_prob(d, 6, r);
            assert!(p0 > prev);
            prev = p0;
        }
    }
}

#[test]
fn zf_attack_anchors() {
    for d in [1usize << 13, 1 << 14] {
        let e = zf_attack_bits(d, 23.0, 5, GuessModel::Product);
        assert!((e.bits - 60.0).abs() <= 8.0, "d={d}: {}", e.bits);
        assert!(e.r.is_some() && e.beta.is_some());
    }
    let d = 1 << 13;
    let min_h = (2..).find(|&h| zf_attack_bits(d, 23.0, h, GuessModel::Product).bits >= 128.0);
    assert!(min_h.unwrap() >= 15);
}

#[test]
fn zf_attack_nondecreasing_in_h() {
    for model in [GuessModel::Product, GuessModel::Exact] {
        let mut prev = 0.0;
        for h in 2..=40 {
            let b = zf_attack_bits(1 << 13, 23.0, h, model).bits;
            assert!(b >= prev, "{model:?} h={h}: {b} < {prev}");
            prev = b;
        }
    }
}

#[test]
fn zf_cost_is_independent_of_q() {
    let a = zf_attack_bits(1 << 12, 20.0, 9, GuessModel::Product);
    let b = zf_attack_bits(1 << 12, 40.0, 9, GuessModel::Product);
    assert!((a.bits - b.bits).abs() < 1e-6);
}
