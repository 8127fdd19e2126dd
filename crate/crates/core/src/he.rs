//! BFV-style public-key encryption over [`RingContext`].
//!
//! Keys follow the cancelling convention `b = -a*s + e`, so that
//! `u*s + v = delta*m + noise` for a ciphertext `(u, v)`.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::Rng;

use crate::error::{Error, Result};
use crate::opcount;
use crate::ring::sample::{error_coeffs, ternary_coeffs, ERROR_VARIANCE};
use crate::ring::{Domain, RingContext, RnsPoly};

/// Default plaintext modulus.
pub const DEFAULT_PLAIN_MODULUS: u64 = 65537;

/// Target decryption-failure probability exponent (`2^-40`).
pub const FAILURE_LOG2: f64 = 40.0;

#[derive(Clone, Debug)]
pub struct HeParams {
    ring: Arc<RingContext>,
    plain: u64,
    delta: BigUint,
    // delta mod q_i
    delta_limbs: Vec<u64>,
    // floor(p * 2^64 / q_i), for the decode quotient
    plain_shoup: Vec<u64>,
    inv_q: Vec<f64>,
    plain_mod: crate::ring::Modulus,
}

impl HeParams {
    pub fn new(ring: Arc<RingContext>, plain_modulus: u64) -> Result<Self> {
        if plain_modulus < 2 {
            return Err(Error::InvalidParams(
                "plaintext modulus must be >= 2".into(),
            ));
        }
        if ring.moduli().iter().any(|m| m.value() <= plain_modulus) {
            return Err(Error::InvalidParams(format!(
                "plaintext modulus {plain_modulus} not below every q_i"
            )));
        }
        let delta = ring.q_big() / plain_modulus;
        let delta_limbs = ring
            .moduli()
            .iter()
            .map(|m| (&delta % m.value()).to_u64().unwrap())
            .collect();
        let plain_shoup = ring
            .moduli()
            .iter()
            .map(|m| m.shoup(plain_modulus))
            .collect();
        let inv_q = ring
            .moduli()
            .iter()
            .map(|m| 1.0 / m.value() as f64)
            .collect();
        Ok(Self {
            ring,
            plain: plain_modulus,
            delta,
            delta_limbs,
            plain_shoup,
            inv_q,
            plain_mod: crate::ring::Modulus::new(plain_modulus)?,
        })
    }

    /// Parameters with the largest of `65537, 257, 17, 5, 3, 2` whose
    /// decryption failure probability stays below `2^-40`.
    pub fn with_safe_plain_modulus(ring: Arc<RingContext>) -> Result<Self> {
        let bound = max_plain_modulus(&ring);
        let p = [DEFAULT_PLAIN_MODULUS, 257, 17, 5, 3, 2]
            .into_iter()
            .find(|&p| p <= bound)
            .ok_or_else(|| {
                Error::InvalidParams(format!("ring {ring} too noisy for any plaintext modulus"))
            })?;
        Self::new(ring, p)
    }

    pub fn ring(&self) -> &RingContext {
        &self.ring
    }

    pub fn ring_arc(&self) -> &Arc<RingContext> {
        &self.ring
    }

    pub fn plain_modulus(&self) -> u64 {
        self.plain
    }

    /// `floor(q / p)`.
    pub fn delta(&self) -> &BigUint {
        &self.delta
    }

    /// BFV rounding `round(p * w / q) mod p` on every coefficient of `w`,
    /// with ties rounded up. Costs two word multiplications per residue.
    pub fn decode(&self, w: &RnsPoly) -> Result<Plaintext> {
        if w.domain() != Domain::Coeff {
            return Err(Error::DomainMismatch {
                expected: Domain::Coeff,
                found: w.domain(),
            });
        }
        if w.ring_tag() != self.ring.tag() {
            return Err(Error::RingMismatch);
        }
        let ctx = &*self.ring;
        let d = ctx.degree();
        let limbs = ctx.num_limbs();
        let p = self.plain;
        let basis = ctx.crt_basis();
        opcount::add((2 * d * limbs) as u64);

        if limbs == 1 {
            // w * p = a*q + b; result = a + [2b >= q]
            let m = ctx.modulus(0);
            let q = m.value();
            let ps = self.plain_shoup[0];
            let coeffs = w
                .limb(0)
                .iter()
                .map(|&x| {
                    let (a, b) = div_mul(x, p, ps, q);
                    // a < p, so one conditional subtraction suffices
                    let v = a + u64::from(2 * b >= q);
                    v.min(v.wrapping_sub(p))
                })
                .collect();
            return Ok(Plaintext { coeffs, modulus: p });
        }

        // w = sum_i y_i * (q/q_i) - k*q with y_i = w_i * (q/q_i)^-1 mod q_i, so
        // p*w/q = sum_i (a_i + b_i/q_i) - k*p where y_i * p = a_i*q_i + b_i.
        let mut coeffs = Vec::with_capacity(d);
        let mut b = vec![0u64; limbs];
        for j in 0..d {
            let mut whole = 0u64;
            let mut frac = 0f64;
            for i in 0..limbs {
                let m = ctx.modulus(i);
                let y = m.mul_shoup(w.limb(i)[j], basis.q_hat_inv[i], basis.q_hat_inv_shoup[i]);
                let (a, r) = div_mul(y, p, self.plain_shoup[i], m.value());
                whole += a;
                b[i] = r;
                // r < 2^62: the signed conversion is exact and a single instruction
                frac += r as i64 as f64 * self.inv_q[i];
            }
            // t >= 0, so truncation is floor (and avoids a libm call)
            let t = frac + 0.5;
            let floor = t as i64;
            let f = t - floor as f64;
            let floor = floor as u64;
            let carry = if !(1e-9..=1.0 - 1e-9).contains(&f) {
                self.exact_carry(&b)
            } else {
                floor
            };
            coeffs.push(self.plain_mod.reduce_u64(whole + carry));
        }
        Ok(Plaintext { coeffs, modulus: p })
    }

    // round(sum_i b_i / q_i), decided with big integers
    fn exact_carry(&self, b: &[u64]) -> u64 {
        let basis = self.ring.crt_basis();
        let q = self.ring.q_big();
        let num: BigUint = b
            .iter()
            .zip(&basis.q_hat)
            .map(|(&bi, qh)| qh * bi)
            .sum::<BigUint>()
            * 2u32
            + q;
        (num / (q * 2u32)).to_u64().unwrap()
    }

    /// `delta * m` as a ring element.
    pub fn scale_plaintext(&self, m: &Plaintext) -> Result<RnsPoly> {
        self.check_plaintext(m)?;
        let ctx = &*self.ring;
        let mut out = ctx.zero(Domain::Coeff);
        for i in 0..ctx.num_limbs() {
            let md = ctx.modulus(i);
            let dl = self.delta_limbs[i];
            for (dst, &c) in out.limb_mut(i).iter_mut().zip(&m.coeffs) {
                *dst = md.mul(dl, c);
            }
        }
        Ok(out)
    }

    fn check_plaintext(&self, m: &Plaintext) -> Result<()> {
        if m.modulus != self.plain || m.coeffs.len() != self.ring.degree() {
            return Err(Error::InvalidParams(
                "plaintext does not match parameters".into(),
            ));
        }
        Ok(())
    }

    /// High-probability bound on `|u*s + v - delta*m|_inf` for a fresh
    /// ciphertext: `z * sigma * sqrt(4d/3 + 1)` with `z` chosen so that a
    /// Gaussian tail union-bounded over `d` coefficients is below `2^-40`.
    pub fn fresh_noise_bound(&self) -> f64 {
        fresh_noise_bound(self.ring.degree())
    }
}

/// `(floor(x*p/q), x*p mod q)` for `x < q` using the precomputed
/// `ps = floor(p * 2^64 / q)`.
#[inline]
fn div_mul(x: u64, p: u64, ps: u64, q: u64) -> (u64, u64) {
    let a = ((x as u128 * ps as u128) >> 64) as u64;
    // the true remainder is below 2q, so 64-bit wrapping arithmetic is exact
    let r = x.wrapping_mul(p).wrapping_sub(a.wrapping_mul(q));
    let over = u64::from(r >= q);
    (a + over, r - over * q)
}

pub fn fresh_noise_bound(d: usize) -> f64 {
    let d = d as f64;
    let z = (2.0 * (2.0 * d).ln() + 2.0 * FAILURE_LOG2 * std::f64::consts::LN_2).sqrt();
    z * (ERROR_VARIANCE * (4.0 * d / 3.0 + 1.0)).sqrt()
}

/// Largest `p` with `q/(2p) - p > fresh_noise_bound(d)`, i.e. decryption
/// stays correct with failure probability below `2^-40`.
pub fn max_plain_modulus(ring: &RingContext) -> u64 {
    let bound = fresh_noise_bound(ring.degree());
    let q = ring.q_big().to_f64().unwrap_or(f64::MAX);
    let min_q = ring.moduli().iter().map(|m| m.value()).min().unwrap_or(0);
    // q/(2p) - p > B  <=>  2p^2 + 2Bp - q < 0
    let root = (-2.0 * bound + (4.0 * bound * bound + 8.0 * q).sqrt()) / 4.0;
    let p = root.floor().max(0.0) as u64;
    p.min(min_q.saturating_sub(1))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plaintext {
    coeffs: Vec<u64>,
    modulus: u64,
}

impl Plaintext {
    pub fn new(coeffs: Vec<u64>, modulus: u64) -> Result<Self> {
        if let Some(&bad) = coeffs.iter().find(|&&c| c >= modulus) {
            return Err(Error::ResidueOutOfRange {
                value: bad,
                modulus,
            });
        }
        Ok(Self { coeffs, modulus })
    }

    pub fn random<R: Rng + ?Sized>(params: &HeParams, rng: &mut R) -> Self {
        let p = params.plain_modulus();
        Self {
            coeffs: (0..params.ring().degree())
                .map(|_| rng.gen_range(0..p))
                .collect(),
            modulus: p,
        }
    }

    pub fn zero(params: &HeParams) -> Self {
        Self {
            coeffs: vec![0; params.ring().degree()],
            modulus: params.plain_modulus(),
        }
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

#[derive(Clone, Debug)]
pub struct SecretKey {
    s: RnsPoly,
    s_ntt: Option<RnsPoly>,
    s_ntt_shoup: Vec<u64>,
}

impl SecretKey {
    /// Wraps a coefficient-domain secret; caches its NTT form if possible.
    pub fn from_poly(ring: &RingContext, s: RnsPoly) -> Result<Self> {
        let s = ring.to_domain(&s, Domain::Coeff)?;
        let (s_ntt, s_ntt_shoup) = if ring.has_ntt() {
            let f = ring.ntt_forward(&s)?;
            let c = ring.shoup_companions(&f)?;
            (Some(f), c)
        } else {
            (None, Vec::new())
        };
        Ok(Self {
            s,
            s_ntt,
            s_ntt_shoup,
        })
    }

    /// Secret in the coefficient domain.
    pub fn poly(&self) -> &RnsPoly {
        &self.s
    }

    /// Cached evaluation form, when the ring has an NTT.
    pub fn ntt_form(&self) -> Option<&RnsPoly> {
        self.s_ntt.as_ref()
    }
}

#[derive(Clone, Debug)]
pub struct PublicKey {
    a: RnsPoly,
    b: RnsPoly,
    a_ntt: Option<RnsPoly>,
    b_ntt: Option<RnsPoly>,
}

impl PublicKey {
    pub fn from_polys(ring: &RingContext, a: RnsPoly, b: RnsPoly) -> Result<Self> {
        let a = ring.to_domain(&a, Domain::Coeff)?;
        let b = ring.to_domain(&b, Domain::Coeff)?;
        let (a_ntt, b_ntt) = if ring.has_ntt() {
            (Some(ring.ntt_forward(&a)?), Some(ring.ntt_forward(&b)?))
        } else {
            (None, None)
        };
        Ok(Self { a, b, a_ntt, b_ntt })
    }

    pub fn a(&self) -> &RnsPoly {
        &self.a
    }

    pub fn b(&self) -> &RnsPoly {
        &self.b
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ciphertext {
    pub u: RnsPoly,
    pub v: RnsPoly,
}

/// Explicit randomness for key generation (test hook and replay).
pub struct KeygenRandomness {
    pub s: Vec<i64>,
    pub a: RnsPoly,
    pub e: Vec<i64>,
}

/// Explicit randomness for encryption.
pub struct EncryptRandomness {
    pub r: Vec<i64>,
    pub e2: Vec<i64>,
    pub e3: Vec<i64>,
}

impl EncryptRandomness {
    pub fn sample<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        Self {
            r: ternary_coeffs(d, rng),
            e2: error_coeffs(d, rng),
            e3: error_coeffs(d, rng),
        }
    }

    pub fn zero(d: usize) -> Self {
        Self {
            r: vec![0; d],
            e2: vec![0; d],
            e3: vec![0; d],
        }
    }
}

pub fn keygen<R: Rng + ?Sized>(params: &HeParams, rng: &mut R) -> (PublicKey, SecretKey) {
    let ring = params.ring();
    let d = ring.degree();
    let s = ternary_coeffs(d, rng);
    let a = ring.sample_uniform(rng);
    let e = error_coeffs(d, rng);
    keygen_with(params, KeygenRandomness { s, a, e }).expect("sampled values match ring")
}

/// Deterministic key generation from supplied `s`, `a`, `e`.
pub fn keygen_with(params: &HeParams, rnd: KeygenRandomness) -> Result<(PublicKey, SecretKey)> {
    let ring = params.ring();
    let sk = SecretKey::from_poly(ring, ring.from_signed(&rnd.s)?)?;
    let a = ring.to_domain(&rnd.a, Domain::Coeff)?;
    let e = ring.from_signed(&rnd.e)?;
    let as_ = ring.mul(&a, sk.poly())?;
    let b = ring.sub(&e, &as_)?;
    Ok((PublicKey::from_polys(ring, a, b)?, sk))
}

pub fn encrypt<R: Rng + ?Sized>(
    params: &HeParams,
    pk: &PublicKey,
    m: &Plaintext,
    rng: &mut R,
) -> Result<Ciphertext> {
    let rnd = EncryptRandomness::sample(params.ring().degree(), rng);
    encrypt_with(params, pk, m, &rnd)
}

/// `u = a*r + e2`, `v = b*r + delta*m + e3` with the given randomness.
pub fn encrypt_with(
    params: &HeParams,
    pk: &PublicKey,
    m: &Plaintext,
    rnd: &EncryptRandomness,
) -> Result<Ciphertext> {
    let ring = params.ring();
    let r = ring.from_signed(&rnd.r)?;
    let (ar, br) = match (&pk.a_ntt, &pk.b_ntt) {
        (Some(a), Some(b)) => {
            let r_ntt = ring.ntt_forward(&r)?;
            (
                ring.ntt_inverse(&ring.mul_pointwise(a, &r_ntt)?)?,
                ring.ntt_inverse(&ring.mul_pointwise(b, &r_ntt)?)?,
            )
        }
        _ => (ring.mul(&pk.a, &r)?, ring.mul(&pk.b, &r)?),
    };
    let u = ring.add(&ar, &ring.from_signed(&rnd.e2)?)?;
    let v = ring.add(&br, &ring.from_signed(&rnd.e3)?)?;
    let v = ring.add(&v, &params.scale_plaintext(m)?)?;
    Ok(Ciphertext { u, v })
}

/// `u*s + v` in the coefficient domain (the pre-rounding value).
pub fn inner_product(params: &HeParams, sk: &SecretKey, ct: &Ciphertext) -> Result<RnsPoly> {
    let mut buf = params.ring().zero(Domain::Coeff);
    inner_product_into(params, sk, ct, &mut buf)?;
    Ok(buf)
}

fn inner_product_into(
    params: &HeParams,
    sk: &SecretKey,
    ct: &Ciphertext,
    buf: &mut RnsPoly,
) -> Result<()> {
    let ring = params.ring();
    match sk.ntt_form() {
        Some(s_ntt) => {
            ring.copy_into(&ct.u, buf)?;
            ring.ntt_forward_inplace(buf)?;
            ring.mul_pointwise_fixed(buf, s_ntt, &sk.s_ntt_shoup)?;
            ring.ntt_inverse_inplace(buf)?;
        }
        None => *buf = ring.mul(&ct.u, sk.poly())?,
    }
    ring.add_assign(buf, &ct.v)
}

/// Baseline decryption: `round(p/q * (u*s + v)) mod p`.
pub fn decrypt(params: &HeParams, sk: &SecretKey, ct: &Ciphertext) -> Result<Plaintext> {
    Decryptor::new(params, sk).decrypt(ct)
}

/// Baseline decryption with a reusable scratch polynomial.
pub struct Decryptor<'a> {
    params: &'a HeParams,
    sk: &'a SecretKey,
    buf: RnsPoly,
}

impl<'a> Decryptor<'a> {
    pub fn new(params: &'a HeParams, sk: &'a SecretKey) -> Self {
        Self {
            params,
            sk,
            buf: params.ring().zero(Domain::Coeff),
        }
    }

    pub fn decrypt(&mut self, ct: &Ciphertext) -> Result<Plaintext> {
        inner_product_into(self.params, self.sk, ct, &mut self.buf)?;
        self.params.decode(&self.buf)
    }
}

pub fn eval_add(params: &HeParams, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
    let ring = params.ring();
    Ok(Ciphertext {
        u: ring.add(&a.u, &b.u)?,
        v: ring.add(&a.v, &b.v)?,
    })
}

/// Centered noise `u*s + v - delta*m` per coefficient, via exact lifting.
pub fn noise(
    params: &HeParams,
    sk: &SecretKey,
    ct: &Ciphertext,
    m: &Plaintext,
) -> Result<Vec<num_bigint::BigInt>> {
    let ring = params.ring();
    let w = inner_product(params, sk, ct)?;
    let diff = ring.sub(&w, &params.scale_plaintext(m)?)?;
    let big = ring.crt_reconstruct(&diff)?;
    let q = num_bigint::BigInt::from(ring.q_big().clone());
    let half = ring.q_big() / 2u32;
    Ok(big
        .coeffs()
        .iter()
        .map(|c| {
            let c_int = num_bigint::BigInt::from(c.clone());
            if *c > half {
                c_int - &q
            } else {
                c_int
            }
        })
        .collect())
}

impl Ciphertext {
    /// True when both components are identically zero.
    pub fn is_zero(&self) -> bool {
        self.u.is_zero() && self.v.is_zero()
    }
}
