//! CRT basis for lifting residues to exact big-integer coefficients.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use super::{Domain, Modulus, RingContext, RnsPoly};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub(crate) struct CrtBasis {
    // Q / q_i
    pub(crate) q_hat: Vec<BigUint>,
    // (Q / q_i)^-1 mod q_i and its Shoup companion
    pub(crate) q_hat_inv: Vec<u64>,
    pub(crate) q_hat_inv_shoup: Vec<u64>,
}

impl CrtBasis {
    pub(crate) fn new(moduli: &[Modulus], q_big: &BigUint) -> Self {
        let q_hat: Vec<BigUint> = moduli.iter().map(|m| q_big / m.value()).collect();
        let q_hat_inv: Vec<u64> = moduli
            .iter()
            .zip(&q_hat)
            .map(|(m, qh)| {
                let r = (qh % m.value()).to_u64().expect("residue fits u64");
                m.inv(r).expect("moduli are pairwise coprime")
            })
            .collect();
        let q_hat_inv_shoup = moduli
            .iter()
            .zip(&q_hat_inv)
            .map(|(m, &w)| m.shoup(w))
            .collect();
        Self {
            q_hat,
            q_hat_inv,
            q_hat_inv_shoup,
        }
    }
}

/// Polynomial with exact coefficients in `[0, q)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigCoeffPoly {
    coeffs: Vec<BigUint>,
}

impl BigCoeffPoly {
    pub fn new(coeffs: Vec<BigUint>) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[BigUint] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigUint> {
        self.coeffs
    }
}

pub(crate) fn reconstruct(ctx: &RingContext, p: &RnsPoly) -> BigCoeffPoly {
    let basis = ctx.crt_basis();
    let q = ctx.q_big();
    let coeffs = (0..ctx.degree())
        .map(|j| {
            let mut acc = BigUint::zero();
            for (i, m) in ctx.moduli().iter().enumerate() {
                let y = m.mul(p.limb(i)[j], basis.q_hat_inv[i]);
                acc += &basis.q_hat[i] * y;
            }
            acc % q
        })
        .collect();
    BigCoeffPoly { coeffs }
}

pub(crate) fn decompose(ctx: &RingContext, p: &BigCoeffPoly) -> Result<RnsPoly> {
    if p.coeffs.len() != ctx.degree() {
        return Err(Error::InvalidParams(format!(
            "expected {} coefficients, got {}",
            ctx.degree(),
            p.coeffs.len()
        )));
    }
    let limbs = ctx
        .moduli()
        .iter()
        .map(|m| {
            p.coeffs
                .iter()
                .map(|c| (c % m.value()).to_u64().expect("residue fits u64"))
                .collect()
        })
        .collect();
    ctx.from_limbs(limbs, Domain::Coeff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_limb_is_identity_embedding() {
        let ctx = RingContext::new(8, &[97]).unwrap();
        let p = ctx
            .from_limbs(vec![(0..8).collect()], Domain::Coeff)
            .unwrap();
        let big = ctx.crt_reconstruct(&p).unwrap();
        let expect: Vec<BigUint> = (0..8u32).map(BigUint::from).collect();
        assert_eq!(big.coeffs(), &expect[..]);
    }

    #[test]
    fn all_ones_residues_give_one() {
        let ctx = RingContext::generate(8, 50, 3).unwrap();
        let p = ctx.from_flat(vec![1; 24], Domain::Coeff).unwrap();
        let big = ctx.crt_reconstruct(&p).unwrap();
        assert!(big.coeffs().iter().all(|c| *c == BigUint::from(1u32)));
    }

    #[test]
    fn round_trip_and_congruence() {
        let ctx = RingContext::generate(8, 60, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let limbs = ctx
                .moduli()
                .iter()
                .map(|m| (0..8).map(|_| rng.gen_range(0..m.value())).collect())
                .collect();
            let p = ctx.from_limbs(limbs, Domain::Coeff).unwrap();
            let big = ctx.crt_reconstruct(&p).unwrap();
            for (j, c) in big.coeffs().iter().enumerate() {
                assert!(c < ctx.q_big());
                for i in 0..3 {
                    assert_eq!((c % ctx.modulus(i).value()).to_u64().unwrap(), p.limb(i)[j]);
                }
            }
            assert_eq!(ctx.crt_decompose(&big).unwrap(), p);
        }
    }
}
