//! Samplers. Every sampler takes the RNG by reference so callers control
//! determinism.

use rand::Rng;

use super::{Domain, RingContext, RnsPoly};

/// Centered-binomial parameter: variance `k/2 = 10.5`, standard deviation
/// about 3.24.
pub const CBD_K: u32 = 21;

/// Variance of the error distribution.
pub const ERROR_VARIANCE: f64 = CBD_K as f64 / 2.0;

/// One centered-binomial draw in `[-k, k]`.
pub fn cbd<R: Rng + ?Sized>(rng: &mut R) -> i64 {
    let mask = (1u64 << CBD_K) - 1;
    let x = rng.next_u64();
    (x & mask).count_ones() as i64 - ((x >> 32) & mask).count_ones() as i64
}

pub fn ternary_coeffs<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<i64> {
    (0..d).map(|_| rng.gen_range(-1i64..=1)).collect()
}

pub fn error_coeffs<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<i64> {
    (0..d).map(|_| cbd(rng)).collect()
}

impl RingContext {
    /// Uniform element of `R_q`: independent uniform residues per limb,
    /// which the CRT maps to a uniform coefficient in `[0, q)`.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> RnsPoly {
        let mut p = self.zero(Domain::Coeff);
        for i in 0..self.num_limbs() {
            let q = self.modulus(i).value();
            for c in p.limb_mut(i) {
                *c = rng.gen_range(0..q);
            }
        }
        p
    }

    /// Coefficients uniform in `{-1, 0, 1}`.
    pub fn sample_ternary<R: Rng + ?Sized>(&self, rng: &mut R) -> RnsPoly {
        self.from_signed(&ternary_coeffs(self.degree(), rng))
            .expect("length matches degree")
    }

    /// Centered binomial error with `k = 21`.
    pub fn sample_error<R: Rng + ?Sized>(&self, rng: &mut R) -> RnsPoly {
        self.from_signed(&error_coeffs(self.degree(), rng))
            .expect("length matches degree")
    }
}
