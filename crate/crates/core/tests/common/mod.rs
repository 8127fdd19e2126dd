#![allow(dead_code)]

use num_bigint::BigUint;
use otsdec_core::ring::{Domain, RingContext, RnsPoly};
use rand::Rng;

/// O(d^2) negacyclic product in i128, independent of the library's
/// modular helpers.
pub fn schoolbook(q: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    let d = a.len();
    let q = q as i128;
    let mut out = vec![0i128; d];
    for i in 0..d {
        if a[i] == 0 {
            continue;
        }
        for j in 0..d {
            let prod = a[i] as i128 * b[j] as i128 % q;
            if i + j < d {
                out[i + j] += prod;
            } else {
                out[i + j - d] -= prod;
            }
        }
    }
    out.iter().map(|v| v.rem_euclid(q) as u64).collect()
}

pub fn schoolbook_poly(ctx: &RingContext, a: &RnsPoly, b: &RnsPoly) -> RnsPoly {
    let limbs = (0..ctx.num_limbs())
        .map(|i| schoolbook(ctx.modulus(i).value(), a.limb(i), b.limb(i)))
        .collect();
    ctx.from_limbs(limbs, Domain::Coeff).unwrap()
}

pub fn random_poly(ctx: &RingContext, rng: &mut impl Rng) -> RnsPoly {
    ctx.sample_uniform(rng)
}

/// `round(p * w / q) mod p` with ties up, in exact integers.
pub fn bfv_round(w: &BigUint, p: u64, q: &BigUint) -> u64 {
    let num = w * p * 2u32 + q;
    let r = num / (q * 2u32) % p;
    u64::try_from(r).unwrap()
}
