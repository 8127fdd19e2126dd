//! Word-sized modular arithmetic for a single RNS limb.

use crate::error::{Error, Result};

/// Largest supported limb modulus (exclusive). Keeps a product of two
/// residues inside a 128-bit intermediate and lazy NTT values below `4q`.
pub const MAX_MODULUS: u64 = 1 << 62;

/// A limb modulus with precomputed reduction constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Modulus {
    q: u64,
    bits: u32,
    // floor(2^(2*bits) / q), below 2^(bits+1)
    barrett: u64,
    // floor(2^64 / q)
    ratio64: u64,
}

impl Modulus {
    pub fn new(q: u64) -> Result<Self> {
        if !(2..MAX_MODULUS).contains(&q) {
            return Err(Error::InvalidParams(format!(
                "modulus {q} outside [2, 2^62)"
            )));
        }
        let bits = 64 - q.leading_zeros();
        let barrett = ((1u128 << (2 * bits)) / q as u128) as u64;
        let ratio64 = (u128::from(u64::MAX) + 1).div_euclid(q as u128) as u64;
        Ok(Self {
            q,
            bits,
            barrett,
            ratio64,
        })
    }

    #[inline]
    pub fn value(&self) -> u64 {
        self.q
    }

    #[inline]
    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Reduces `x < q^2` (more precisely `x < 2^(2*bits)`).
    #[inline]
    pub fn reduce_product(&self, x: u128) -> u64 {
        debug_assert!(x < 1u128 << (2 * self.bits));
        let t = (x >> (self.bits - 1)) as u64;
        let qhat = ((t as u128 * self.barrett as u128) >> (self.bits + 1)) as u64;
        let r = (x as u64).wrapping_sub(qhat.wrapping_mul(self.q));
        let r = r.min(r.wrapping_sub(self.q));
        r.min(r.wrapping_sub(self.q))
    }

    /// Reduces an arbitrary 64-bit value.
    #[inline]
    pub fn reduce_u64(&self, x: u64) -> u64 {
        let qhat = ((x as u128 * self.ratio64 as u128) >> 64) as u64;
        let r = x.wrapping_sub(qhat.wrapping_mul(self.q));
        r.min(r.wrapping_sub(self.q))
    }

    /// Reduces an arbitrary 128-bit value.
    #[inline]
    pub fn reduce_u128(&self, x: u128) -> u64 {
        (x % self.q as u128) as u64
    }

    // Conditional subtractions below use `x.min(x - q)` with wrapping: when
    // `x < q` the difference wraps above `x`. Compiles to a cmov.

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        s.min(s.wrapping_sub(self.q))
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        let d = a.wrapping_sub(b);
        d.min(d.wrapping_add(self.q))
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.reduce_product(a as u128 * b as u128)
    }

    /// Maps a signed integer to its residue.
    #[inline]
    pub fn from_i64(&self, x: i64) -> u64 {
        let r = x.rem_euclid(self.q as i64);
        r as u64
    }

    /// Centered representative in `(-q/2, q/2]`.
    #[inline]
    pub fn center(&self, a: u64) -> i64 {
        if a > self.q / 2 {
            a as i64 - self.q as i64
        } else {
            a as i64
        }
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.q;
        base %= self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    pub fn inv(&self, a: u64) -> Option<u64> {
        let (mut r0, mut r1) = (self.q as i128, (a % self.q) as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let k = r0 / r1;
            (r0, r1) = (r1, r0 - k * r1);
            (t0, t1) = (t1, t0 - k * t1);
        }
        if r0 != 1 {
            return None;
        }
        Some(t0.rem_euclid(self.q as i128) as u64)
    }

    /// Shoup companion `floor(w * 2^64 / q)` for a fixed multiplicand `w < q`.
    #[inline]
    pub fn shoup(&self, w: u64) -> u64 {
        debug_assert!(w < self.q);
        (((w as u128) << 64) / self.q as u128) as u64
    }

    /// `x * w mod q` in `[0, 2q)` for any 64-bit `x`.
    #[inline]
    pub fn mul_shoup_lazy(&self, x: u64, w: u64, w_shoup: u64) -> u64 {
        let qhat = ((x as u128 * w_shoup as u128) >> 64) as u64;
        x.wrapping_mul(w).wrapping_sub(qhat.wrapping_mul(self.q))
    }

    #[inline]
    pub fn mul_shoup(&self, x: u64, w: u64, w_shoup: u64) -> u64 {
        let r = self.mul_shoup_lazy(x, w, w_shoup);
        r.min(r.wrapping_sub(self.q))
    }

    /// Batch inversion (Montgomery's trick). Returns the index of the first
    /// zero divisor when some element has no inverse.
    pub fn batch_inv(&self, values: &[u64]) -> std::result::Result<Vec<u64>, usize> {
        let mut prefix = Vec::with_capacity(values.len());
        let mut acc = 1 % self.q;
        for &v in values {
            prefix.push(acc);
            acc = self.mul(acc, v);
        }
        let mut inv_acc = match self.inv(acc) {
            Some(x) => x,
            None => {
                let idx = values
                    .iter()
                    .position(|&v| self.inv(v).is_none())
                    .unwrap_or(0);
                return Err(idx);
            }
        };
        let mut out = vec![0u64; values.len()];
        for i in (0..values.len()).rev() {
            out[i] = self.mul(inv_acc, prefix[i]);
            inv_acc = self.mul(inv_acc, values[i]);
        }
        Ok(out)
    }
}

fn mulmod_u64(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

fn powmod_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod_u64(acc, base, m);
        }
        base = mulmod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in SMALL {
        let mut x = powmod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The `count` largest primes below `2^bits` congruent to 1 mod `2d`,
/// in decreasing order.
pub fn ntt_primes(bits: u32, d: usize, count: usize) -> Result<Vec<u64>> {
    if !(2..=62).contains(&bits) {
        return Err(Error::InvalidParams(format!("prime size {bits} bits")));
    }
    let step = 2 * d as u64;
    let upper = 1u64 << bits;
    let mut k = (upper - 1) / step;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        if k == 0 {
            return Err(Error::InvalidParams(format!(
                "not enough {bits}-bit primes = 1 mod {step}"
            )));
        }
        let cand = k * step + 1;
        if cand < upper && is_prime(cand) {
            out.push(cand);
        }
        k -= 1;
    }
    Ok(out)
}

/// Element of exact order `2d` in `Z_q^*`, found by scanning bases 2, 3, …
pub(crate) fn primitive_2d_root(m: &Modulus, d: usize) -> Option<u64> {
    let q = m.value();
    let two_d = 2 * d as u64;
    if !(q - 1).is_multiple_of(two_d) {
        return None;
    }
    let e = (q - 1) / two_d;
    (2..q.min(1 << 20)).find_map(|g| {
        let psi = m.pow(g, e);
        // order divides 2d (a power of two); it is exactly 2d iff psi^d = -1
        (m.pow(psi, d as u64) == q - 1).then_some(psi)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn primes_are_ntt_friendly() {
        let ps = ntt_primes(30, 1 << 12, 3).unwrap();
        assert_eq!(ps.len(), 3);
        for p in ps {
            assert!(is_prime(p));
            assert_eq!(p % (1 << 13), 1);
            assert!(p < 1 << 30);
        }
    }

    #[test]
    fn miller_rabin_small_table() {
        let brute = |n: u64| {
            n >= 2
                && (2..n)
                    .take_while(|i| i * i <= n)
                    .all(|i| !n.is_multiple_of(i))
        };
        for n in 0..5000 {
            assert_eq!(is_prime(n), brute(n), "{n}");
        }
        assert!(is_prime((1 << 61) - 1));
    }

    #[test]
    fn root_has_exact_order() {
        let m = Modulus::new(97).unwrap();
        let psi = primitive_2d_root(&m, 8).unwrap();
        assert_eq!(m.pow(psi, 16), 1);
        assert_eq!(m.pow(psi, 8), 96);
        assert!(primitive_2d_root(&Modulus::new(17).unwrap(), 16).is_none());
    }

    #[test]
    fn rejects_out_of_range_modulus() {
        assert!(Modulus::new(1).is_err());
        assert!(Modulus::new(1 << 62).is_err());
    }

    #[test]
    fn batch_inverse_reports_zero_divisor() {
        let m = Modulus::new(17).unwrap();
        assert_eq!(m.batch_inv(&[3, 0, 5]), Err(1));
        let inv = m.batch_inv(&[3, 4, 5]).unwrap();
        assert_eq!(
            inv.iter()
                .zip([3, 4, 5])
                .map(|(a, b)| m.mul(*a, b))
                .collect::<Vec<_>>(),
            vec![1, 1, 1]
        );
    }

    proptest! {
        #[test]
        fn reductions_match_u128(q in 2u64..MAX_MODULUS, a in any::<u64>(), b in any::<u64>(), x in any::<u64>()) {
            let m = Modulus::new(q).unwrap();
            let (a, b) = (a % q, b % q);
            prop_assert_eq!(m.mul(a, b), (a as u128 * b as u128 % q as u128) as u64);
            prop_assert_eq!(m.reduce_u64(x), x % q);
            let w = b;
            prop_assert_eq!(m.mul_shoup(x, w, m.shoup(w)), (x as u128 * w as u128 % q as u128) as u64);
            prop_assert!(m.mul_shoup_lazy(x, w, m.shoup(w)) < 2 * q);
        }

        #[test]
        fn inverse_multiplies_back(a in 1u64..1_000_000_006) {
            let m = Modulus::new(1_000_000_007).unwrap();
            let inv = m.inv(a).unwrap();
            prop_assert_eq!(m.mul(a, inv), 1);
        }
    }
}
