use otsdec_core::he::{self, HeParams};
use otsdec_core::protocol::{skbd_keygen, skbd_keygen_composite, SparsePoly};
use otsdec_core::ring::{Domain, RingContext};
use otsdec_wire::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::sync::Arc;

fn ring(d: usize, limbs: usize) -> RingContext {
    RingContext::generate(d, 40, limbs).unwrap()
}

#[test]
fn zero_poly_is_header_plus_body() {
    let r = ring(8, 1);
    let bytes = encode_poly(&r, &r.zero(Domain::Coeff));
    assert_eq!(bytes.len(), header_len(1) + 64);
    assert_eq!(&bytes[..4], &8u32.to_le_bytes());
    assert_eq!(bytes[4], 1);
    assert_eq!(&bytes[5..13], &r.modulus(0).value().to_le_bytes());
    assert_eq!(bytes[13], 0);
    assert!(bytes[14..].iter().all(|&b| b == 0));
}

#[test]
fn weight_one_sparse_layout() {
    for limbs in [1, 2, 4] {
        let r = ring(16, limbs);
        let c: Vec<u64> = (0..limbs as u64).map(|i| i + 3).collect();
        let t = SparsePoly::monomial(&r, 5, &c).unwrap();
        let bytes = encode_sparse(&r, &t);
        let body = &bytes[header_len(limbs)..];
        assert_eq!(body.len(), 4 + (4 + 8 * limbs));
        assert_eq!(&body[..4], &1u32.to_le_bytes());
        assert_eq!(&body[4..8], &5u32.to_le_bytes());
        assert_eq!(decode_sparse(&r, &bytes).unwrap(), t);
    }
}

#[test]
fn random_round_trips() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let rings = [ring(16, 1), ring(32, 2), ring(64, 3)];
    for trial in 0..1000 {
        let r = &rings[trial % rings.len()];
        let mut p = r.sample_uniform(&mut rng);
        if rng.gen() {
            p = r.ntt_forward(&p).unwrap();
        }
        assert_eq!(decode_poly(r, &encode_poly(r, &p)).unwrap(), p);
        let h = rng.gen_range(1..=r.degree());
        let (t, _) = skbd_keygen(r, h, &mut rng).unwrap();
        assert_eq!(decode_sparse(r, &encode_sparse(r, &t)).unwrap(), t);
    }
}

#[test]
fn key_material_round_trips() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let r = Arc::new(ring(64, 2));
    let params = HeParams::new(r.clone(), 17).unwrap();
    let (pk, sk) = he::keygen(&params, &mut rng);
    let pair = skbd_keygen_composite(&r, 4, 3, 2, &mut rng).unwrap();
    let pk2 = decode_public_key(&r, &encode_public_key(&r, &pk)).unwrap();
    assert_eq!(pk2.a(), pk.a());
    assert_eq!(pk2.b(), pk.b());
    let sk2 = decode_secret_key(&r, &encode_secret_key(&r, &sk)).unwrap();
    assert_eq!(sk2.poly(), sk.poly());
    let pair2 = decode_pair(&r, &encode_pair(&r, &pair)).unwrap();
    assert_eq!(pair2.factors(), pair.factors());
    assert_eq!(pair2.blinding_key(), pair.blinding_key());
    let m = otsdec_core::he::Plaintext::random(&params, &mut rng);
    let ct = he::encrypt(&params, &pk, &m, &mut rng).unwrap();
    let ct2 = decode_ct(&r, &encode_ct(&r, &ct)).unwrap();
    assert_eq!(ct2, ct);
}

#[test]
fn rejects_out_of_range_residue() {
    let r = ring(8, 1);
    let mut bytes = encode_poly(&r, &r.zero(Domain::Coeff));
    let q = r.modulus(0).value();
    let off = header_len(1);
    bytes[off..off + 8].copy_from_slice(&q.to_le_bytes());
    assert!(matches!(
        decode_poly(&r, &bytes),
        Err(WireError::ResidueOutOfRange { value, modulus }) if value == q && modulus == q
    ));
}

#[test]
fn rejects_wrong_ring_and_trailing_bytes() {
    let a = ring(8, 1);
    let b = ring(16, 1);
    let bytes = encode_poly(&a, &a.zero(Domain::Coeff));
    assert!(matches!(
        decode_poly(&b, &bytes),
        Err(WireError::Malformed(_))
    ));
    let mut extra = bytes.clone();
    extra.push(0);
    assert!(matches!(
        decode_poly(&a, &extra),
        Err(WireError::Malformed(_))
    ));
    assert!(matches!(
        decode_poly(&a, &bytes[..bytes.len() - 1]),
        Err(WireError::Malformed(_))
    ));
}

#[test]
fn frame_round_trip_and_header_checks() {
    let f = Frame::new(MsgType::StoreCt, vec![1, 2, 3]);
    let bytes = f.encode();
    assert_eq!(bytes.len(), FRAME_HEADER_LEN + 3);
    assert_eq!(&bytes[..4], &MAGIC);
    assert_eq!(bytes[4], VERSION);
    assert_eq!(bytes[5], 0x02);
    assert_eq!(Frame::decode(&bytes).unwrap(), f);
    let mut bad = bytes.clone();
    bad[4] = 2;
    assert!(matches!(
        Frame::decode(&bad),
        Err(WireError::UnsupportedVersion(2))
    ));
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(matches!(Frame::decode(&bad), Err(WireError::Malformed(_))));
    let read = Frame::read_from(&mut &bytes[..]).unwrap().unwrap();
    assert_eq!(read, f);
    assert!(Frame::read_from(&mut &[][..]).unwrap().is_none());
}

proptest! {
    #[test]
    fn arbitrary_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..300)) {
        let r = ring(8, 2);
        let _ = decode_poly(&r, &bytes);
        let _ = decode_sparse(&r, &bytes);
        let _ = decode_ct(&r, &bytes);
        let _ = decode_pair(&r, &bytes);
        let _ = Frame::decode(&bytes);
    }
}
