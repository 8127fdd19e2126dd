mod common;

use std::sync::Arc;

use otsdec_core::he::{self, Decryptor, HeParams, Plaintext};
use otsdec_core::protocol::{
    blind_decrypt, blind_secret_key, local_decrypt, skbd_keygen, skbd_keygen_composite,
    sparse_dense_mul_into, sparse_dense_mul_with_path, AccumPath, BlindingKeyPair, LocalDecryptor,
    SparsePoly,
};
use otsdec_core::ring::{Domain, RingContext, MAX_DEGREE};
use otsdec_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn degree_cap() {
    assert!(RingContext::generate(MAX_DEGREE, 40, 1).is_ok());
    assert!(RingContext::new(2 * MAX_DEGREE, &[(4 * MAX_DEGREE as u64) * 3 + 1]).is_err());
}

#[test]
fn in_place_helpers_agree_with_allocating_ones() {
    let ctx = RingContext::generate(256, 50, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let a = ctx.sample_uniform(&mut rng);
        let b = ctx.sample_uniform(&mut rng);

        let mut buf = ctx.sample_uniform(&mut rng);
        ctx.copy_into(&a, &mut buf).unwrap();
        assert_eq!(buf, a);
        ctx.add_assign(&mut buf, &b).unwrap();
        assert_eq!(buf, ctx.add(&a, &b).unwrap());
        ctx.clear(&mut buf, Domain::Ntt).unwrap();
        assert_eq!(buf, ctx.zero(Domain::Ntt));

        let (an, bn) = (ctx.ntt_forward(&a).unwrap(), ctx.ntt_forward(&b).unwrap());
        let companions = ctx.shoup_companions(&bn).unwrap();
        let mut x = an.clone();
        ctx.mul_pointwise_fixed(&mut x, &bn, &companions).unwrap();
        assert_eq!(x, ctx.mul_pointwise(&an, &bn).unwrap());

        let mut y = a.clone();
        ctx.ntt_forward_inplace(&mut y).unwrap();
        assert_eq!(y, an);
        ctx.ntt_inverse_inplace(&mut y).unwrap();
        assert_eq!(y, a);
    }
}

#[test]
fn in_place_helpers_check_their_inputs() {
    let ctx = RingContext::generate(64, 40, 2).unwrap();
    let other = RingContext::generate(64, 41, 2).unwrap();
    let a = ctx.zero(Domain::Coeff);
    let mut foreign = other.zero(Domain::Coeff);
    assert!(matches!(
        ctx.copy_into(&a, &mut foreign),
        Err(Error::RingMismatch)
    ));
    assert!(matches!(
        ctx.add_assign(&mut foreign, &a),
        Err(Error::RingMismatch)
    ));

    let mut coeff = ctx.zero(Domain::Coeff);
    let ntt = ctx.zero(Domain::Ntt);
    let comp = ctx.shoup_companions(&ntt).unwrap();
    assert!(matches!(
        ctx.mul_pointwise_fixed(&mut coeff, &ntt, &comp),
        Err(Error::DomainMismatch { .. })
    ));
    let mut x = ctx.zero(Domain::Ntt);
    assert!(ctx.mul_pointwise_fixed(&mut x, &ntt, &comp[1..]).is_err());
}

// Terms placed on both sides of every block edge of the lazy kernel, with
// unit and general values, against the schoolbook oracle.
#[test]
fn lazy_kernel_across_block_edges() {
    let d = 4096;
    let ctx = RingContext::generate(d, 50, 1).unwrap();
    let q = ctx.modulus(0).value();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let edges = [
        0u32, 1, 1023, 1024, 1025, 2047, 2048, 3071, 3072, 4094, 4095,
    ];
    for round in 0..6 {
        let values: Vec<u64> = edges
            .iter()
            .map(|_| {
                if round % 2 == 0 {
                    1
                } else {
                    rng.gen_range(1..q)
                }
            })
            .collect();
        let t = SparsePoly::new(&ctx, edges.to_vec(), values).unwrap();
        let u = ctx.sample_uniform(&mut rng);
        let expect = common::schoolbook_poly(&ctx, &t.to_dense(&ctx).unwrap(), &u);
        assert_eq!(
            sparse_dense_mul_with_path(&ctx, &t, &u, AccumPath::Lazy64).unwrap(),
            expect
        );
    }
}

#[test]
fn sparse_into_overwrites_dirty_buffers() {
    let ctx = RingContext::generate(1024, 40, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut out = ctx.sample_uniform(&mut rng);
    for _ in 0..10 {
        let (t, _) = skbd_keygen(&ctx, rng.gen_range(1..=20), &mut rng).unwrap();
        let u = ctx.sample_uniform(&mut rng);
        sparse_dense_mul_into(&ctx, &t, &u, &mut out).unwrap();
        assert_eq!(out, ctx.mul(&t.to_dense(&ctx).unwrap(), &u).unwrap());
    }
    let ntt = ctx.ntt_forward(&out).unwrap();
    let (t, _) = skbd_keygen(&ctx, 3, &mut rng).unwrap();
    assert!(sparse_dense_mul_into(&ctx, &t, &ntt, &mut out).is_err());
}

#[test]
fn reusable_decryptors_match_one_shot_calls() {
    let ring = Arc::new(RingContext::generate(2048, 50, 2).unwrap());
    let params = HeParams::new(ring.clone(), 65537).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (pk, sk) = he::keygen(&params, &mut rng);
    let pair = skbd_keygen_composite(&ring, 6, 3, 2, &mut rng).unwrap();
    let s_tilde = blind_secret_key(&ring, &sk, &pair).unwrap();
    let mut base = Decryptor::new(&params, &sk);
    let mut local = LocalDecryptor::new(&params, &pair);
    for _ in 0..8 {
        let m = Plaintext::random(&params, &mut rng);
        let ct = he::encrypt(&params, &pk, &m, &mut rng).unwrap();
        let bct = blind_decrypt(&ring, &s_tilde, &ct).unwrap();
        assert_eq!(base.decrypt(&ct).unwrap(), m);
        assert_eq!(local.decrypt(&bct).unwrap(), m);
        assert_eq!(local_decrypt(&params, &pair, &bct).unwrap(), m);
    }
}

#[test]
fn pair_from_blinding_key() {
    let ctx = RingContext::generate(128, 40, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pair = skbd_keygen_composite(&ctx, 3, 2, 2, &mut rng).unwrap();
    let coeff = ctx.ntt_inverse(pair.blinding_key()).unwrap();
    let rebuilt = BlindingKeyPair::with_blinding_key(&ctx, pair.factors().to_vec(), coeff).unwrap();
    assert_eq!(rebuilt.blinding_key(), pair.blinding_key());
    assert_eq!(rebuilt.factors(), pair.factors());

    assert!(
        BlindingKeyPair::with_blinding_key(&ctx, Vec::new(), pair.blinding_key().clone()).is_err()
    );
    let other = RingContext::generate(128, 41, 2).unwrap();
    let (t, _) = skbd_keygen(&other, 2, &mut rng).unwrap();
    assert!(
        BlindingKeyPair::with_blinding_key(&ctx, vec![t], pair.blinding_key().clone()).is_err()
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn lazy_kernel_matches_schoolbook(seed in any::<u64>(), log_d in 4u32..=12, h in 1usize..=40, unit in any::<bool>()) {
        let d = 1usize << log_d;
        let h = h.min(d);
        let ctx = RingContext::generate(d, 55, 1).unwrap();
        let q = ctx.modulus(0).value();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx: Vec<u32> = rand::seq::index::sample(&mut rng, d, h).into_iter().map(|i| i as u32).collect();
        idx.sort_unstable();
        let vals: Vec<u64> = (0..h).map(|_| if unit { 1 } else { rng.gen_range(1..q) }).collect();
        let t = SparsePoly::new(&ctx, idx, vals).unwrap();
        let u = ctx.sample_uniform(&mut rng);
        let expect = common::schoolbook_poly(&ctx, &t.to_dense(&ctx).unwrap(), &u);
        prop_assert_eq!(sparse_dense_mul_with_path(&ctx, &t, &u, AccumPath::Lazy64).unwrap(), expect);
    }
}
