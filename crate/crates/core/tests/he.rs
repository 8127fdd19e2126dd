mod common;

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use otsdec_core::he::{
    self, decrypt, encrypt, encrypt_with, eval_add, keygen, keygen_with, EncryptRandomness,
    HeParams, KeygenRandomness, Plaintext,
};
use otsdec_core::ring::{sample, Domain, RingContext};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(d: usize, bits: u32, limbs: usize, p: u64) -> HeParams {
    HeParams::new(Arc::new(RingContext::generate(d, bits, limbs).unwrap()), p).unwrap()
}

#[test]
fn delta_brackets_q() {
    let hp = params(16, 50, 2, 65537);
    let q = hp.ring().q_big();
    assert!(hp.delta() * 65537u32 <= *q);
    assert!(*q < hp.delta() * 65538u32);
    let ring = Arc::new(RingContext::generate(16, 20, 1).unwrap());
    assert!(HeParams::new(ring.clone(), ring.modulus(0).value()).is_err());
    assert!(HeParams::new(ring, 1).is_err());
}

#[test]
fn zero_key_gives_zero_b() {
    let hp = params(16, 40, 1, 257);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = hp.ring().sample_uniform(&mut rng);
    let (pk, _) = keygen_with(
        &hp,
        KeygenRandomness {
            s: vec![0; 16],
            a,
            e: vec![0; 16],
        },
    )
    .unwrap();
    assert!(pk.b().is_zero());
}

#[test]
fn b_plus_as_recovers_e() {
    let hp = params(64, 40, 2, 257);
    let ring = hp.ring();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let s = sample::ternary_coeffs(64, &mut rng);
    let e = sample::error_coeffs(64, &mut rng);
    let a = ring.sample_uniform(&mut rng);
    let (pk, sk) = keygen_with(&hp, KeygenRandomness { s, a, e: e.clone() }).unwrap();
    let lhs = ring
        .add(pk.b(), &common::schoolbook_poly(ring, pk.a(), sk.poly()))
        .unwrap();
    assert_eq!(lhs, ring.from_signed(&e).unwrap());
}

#[test]
fn noiseless_encryptions() {
    let hp = params(16, 40, 2, 257);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (pk, _) = keygen(&hp, &mut rng);
    let zero = EncryptRandomness::zero(16);
    let ct = encrypt_with(&hp, &pk, &Plaintext::zero(&hp), &zero).unwrap();
    assert!(ct.is_zero());

    let mut one = vec![0; 16];
    one[0] = 1;
    let ct = encrypt_with(&hp, &pk, &Plaintext::new(one, 257).unwrap(), &zero).unwrap();
    assert!(ct.u.is_zero());
    let big = hp.ring().crt_reconstruct(&ct.v).unwrap();
    assert_eq!(&big.coeffs()[0], hp.delta());
    assert!(big.coeffs()[1..].iter().all(|c| *c == BigUint::from(0u32)));
}

#[test]
fn noiseless_ciphertext_decrypts() {
    let hp = params(32, 40, 2, 65537);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (_, sk) = keygen(&hp, &mut rng);
    let m = Plaintext::random(&hp, &mut rng);
    let ct = he::Ciphertext {
        u: hp.ring().zero(Domain::Coeff),
        v: hp.scale_plaintext(&m).unwrap(),
    };
    assert_eq!(decrypt(&hp, &sk, &ct).unwrap(), m);
}

#[test]
fn round_trip_100_keygens_d4096() {
    let hp = params(1 << 12, 45, 2, 65537);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let (pk, sk) = keygen(&hp, &mut rng);
        let m = Plaintext::random(&hp, &mut rng);
        let ct = encrypt(&hp, &pk, &m, &mut rng).unwrap();
        assert_eq!(decrypt(&hp, &sk, &ct).unwrap(), m);
    }
}

#[test]
fn noise_within_analytic_bound() {
    let hp = params(1 << 12, 45, 2, 65537);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let bound = hp.fresh_noise_bound();
    let mut worst = BigInt::from(0);
    for _ in 0..20 {
        let (pk, sk) = keygen(&hp, &mut rng);
        let m = Plaintext::random(&hp, &mut rng);
        let rnd = EncryptRandomness::sample(1 << 12, &mut rng);
        let ct = encrypt_with(&hp, &pk, &m, &rnd).unwrap();
        for n in he::noise(&hp, &sk, &ct, &m).unwrap() {
            let a = if n < BigInt::from(0) { -n } else { n };
            if a > worst {
                worst = a;
            }
        }
    }
    assert!(worst < BigInt::from(bound as i64), "{worst} vs {bound}");
}

#[test]
fn eval_add_matches_integer_oracle() {
    let hp = params(1 << 12, 45, 2, 65537);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (pk, sk) = keygen(&hp, &mut rng);
    for _ in 0..50 {
        let m1 = Plaintext::random(&hp, &mut rng);
        let m2 = Plaintext::random(&hp, &mut rng);
        let c = eval_add(
            &hp,
            &encrypt(&hp, &pk, &m1, &mut rng).unwrap(),
            &encrypt(&hp, &pk, &m2, &mut rng).unwrap(),
        )
        .unwrap();
        let expect: Vec<u64> = m1
            .coeffs()
            .iter()
            .zip(m2.coeffs())
            .map(|(a, b)| (a + b) % 65537)
            .collect();
        assert_eq!(decrypt(&hp, &sk, &c).unwrap().coeffs(), &expect[..]);
    }
    let m = Plaintext::random(&hp, &mut rng);
    let neg = Plaintext::new(
        m.coeffs().iter().map(|&c| (65537 - c) % 65537).collect(),
        65537,
    )
    .unwrap();
    let ct = encrypt(&hp, &pk, &m, &mut rng).unwrap();
    let sum = eval_add(&hp, &ct, &encrypt(&hp, &pk, &neg, &mut rng).unwrap()).unwrap();
    assert_eq!(decrypt(&hp, &sk, &sum).unwrap(), Plaintext::zero(&hp));
    let plus_zero = eval_add(
        &hp,
        &ct,
        &encrypt(&hp, &pk, &Plaintext::zero(&hp), &mut rng).unwrap(),
    )
    .unwrap();
    assert_eq!(decrypt(&hp, &sk, &plus_zero).unwrap(), m);
}

#[test]
fn safe_plain_modulus_for_small_q() {
    let ring = Arc::new(RingContext::generate(1 << 13, 23, 1).unwrap());
    let hp = HeParams::with_safe_plain_modulus(ring).unwrap();
    assert_eq!(hp.plain_modulus(), 257);
    let ring = Arc::new(RingContext::generate(1 << 12, 50, 2).unwrap());
    let hp = HeParams::with_safe_plain_modulus(ring).unwrap();
    assert_eq!(hp.plain_modulus(), 65537);
}

fn check_decode_against_oracle(hp: &HeParams, w: &[BigUint]) {
    let ring = hp.ring();
    let poly = ring
        .crt_decompose(&otsdec_core::ring::BigCoeffPoly::new(w.to_vec()))
        .unwrap();
    let got = hp.decode(&poly).unwrap();
    for (j, c) in w.iter().enumerate() {
        assert_eq!(
            got.coeffs()[j],
            common::bfv_round(c, hp.plain_modulus(), ring.q_big()),
            "w = {c}"
        );
    }
}

#[test]
fn decode_near_rounding_boundaries() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for (bits, limbs, p) in [
        (23u32, 1usize, 257u64),
        (50, 2, 65537),
        (61, 3, 65537),
        (30, 4, 3),
    ] {
        let hp = params(8, bits, limbs, p);
        let q = hp.ring().q_big().clone();
        let mut w = Vec::new();
        while w.len() < 8 {
            // values straddling (2k+1) q / (2p)
            let k: u64 = rng.gen_range(0..p);
            let centre: BigUint = (&q * (2 * k + 1)) / (2 * p);
            let off: i64 = rng.gen_range(-2..=2);
            let c = if off < 0 {
                &centre - BigUint::from((-off) as u64)
            } else {
                &centre + BigUint::from(off as u64)
            };
            if c < q {
                w.push(c);
            }
        }
        check_decode_against_oracle(&hp, &w);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn decode_matches_big_integer_rounding(seed in any::<u64>(), limbs in 1usize..=4, bits in 20u32..=61) {
        let hp = params(8, bits, limbs, 65537.min((1u64 << (bits - 1)) - 1));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let poly = hp.ring().sample_uniform(&mut rng);
        let w = hp.ring().crt_reconstruct(&poly).unwrap();
        check_decode_against_oracle(&hp, w.coeffs());
    }
}
