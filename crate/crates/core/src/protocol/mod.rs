//! The outsourced decryption routines.
//!
//! The client generates a sparse unblinding key `t` and sends the cloud
//! `s~ = s * t^-1`. The cloud answers each ciphertext `(u, v)` with
//! `(u * s~, v)`; the client multiplies `u * s~` by the sparse factors of
//! `t`, adds `v` and rounds.

mod keygen;
mod sparse;

use crate::error::{Error, Result};
use crate::he::{Ciphertext, HeParams, Plaintext, SecretKey};
use crate::ring::{Domain, RingContext, RnsPoly};

pub use keygen::{
    skbd_keygen, skbd_keygen_composite, skbd_keygen_pair, small_factor_keygen, BlindingKeyPair,
    SparsePoly, MAX_RESAMPLE,
};
pub use sparse::{
    select_path, sparse_dense_mul, sparse_dense_mul_into, sparse_dense_mul_with_path, AccumPath,
};

/// Default weight of the first composite factor.
pub const DEFAULT_H1: usize = 6;
/// Default bound on the second factor's values.
pub const DEFAULT_Q2: u64 = 2;

/// Lower bound on the dense weight of a product of sparse factors with
/// weights `h1` and `h2`.
pub fn composite_weight_bound(h1: usize, h2: usize) -> usize {
    (h1 * h2).saturating_sub(h1.min(h2))
}

/// Parameters chosen for one ring and security level.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolParams {
    pub degree: usize,
    pub log_q: f64,
    pub lambda: u32,
    /// Target dense weight of `t`.
    pub h: usize,
    pub h1: usize,
    pub h2: usize,
    pub q2: u64,
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<()> {
        if ![128, 192, 256].contains(&self.lambda) {
            return Err(Error::InvalidParams(format!(
                "lambda {} unsupported",
                self.lambda
            )));
        }
        if composite_weight_bound(self.h1, self.h2) < self.h {
            return Err(Error::InvalidParams(format!(
                "h1*h2 - min(h1,h2) = {} below h = {}",
                composite_weight_bound(self.h1, self.h2),
                self.h
            )));
        }
        Ok(())
    }
}

/// `s~ = s * t^-1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlindedSecretKey {
    s_tilde: RnsPoly,
}

impl BlindedSecretKey {
    /// Wraps a received blinded key (NTT domain when the ring has one).
    pub fn from_poly(ring: &RingContext, s_tilde: RnsPoly) -> Result<Self> {
        let target = if ring.has_ntt() {
            Domain::Ntt
        } else {
            Domain::Coeff
        };
        Ok(Self {
            s_tilde: ring.to_domain(&s_tilde, target)?,
        })
    }

    pub fn poly(&self) -> &RnsPoly {
        &self.s_tilde
    }
}

/// `(u * s~, v)`, both in the coefficient domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlindedCiphertext {
    pub u_tilde: RnsPoly,
    pub v: RnsPoly,
}

/// Secret-key blinding: one pointwise product in the evaluation domain.
pub fn blind_secret_key(
    ring: &RingContext,
    sk: &SecretKey,
    pair: &BlindingKeyPair,
) -> Result<BlindedSecretKey> {
    let s = match sk.ntt_form() {
        Some(s) => s.clone(),
        None => sk.poly().clone(),
    };
    let t_inv = ring.to_domain(pair.blinding_key(), s.domain())?;
    Ok(BlindedSecretKey {
        s_tilde: ring.mul(&s, &t_inv)?,
    })
}

/// Cloud-side blind decryption.
pub fn blind_decrypt(
    ring: &RingContext,
    s_tilde: &BlindedSecretKey,
    ct: &Ciphertext,
) -> Result<BlindedCiphertext> {
    let key = s_tilde.poly();
    let u_tilde = if key.domain() == Domain::Ntt {
        let mut u = ring.ntt_forward(&ct.u)?;
        u = ring.mul_pointwise(&u, key)?;
        ring.ntt_inverse_inplace(&mut u)?;
        u
    } else {
        ring.mul(&ct.u, key)?
    };
    ring.check_same(&ct.v)?;
    Ok(BlindedCiphertext {
        u_tilde,
        v: ct.v.clone(),
    })
}

/// `u~ * t + v`, applying the factors of `t` one after another.
pub fn local_inner_product(
    ring: &RingContext,
    pair: &BlindingKeyPair,
    bct: &BlindedCiphertext,
) -> Result<RnsPoly> {
    let mut bufs = [ring.zero(Domain::Coeff), ring.zero(Domain::Coeff)];
    let k = inner_product_into(ring, pair, bct, &mut bufs)?;
    let [a, b] = bufs;
    Ok(if k == 0 { a } else { b })
}

// Ping-pongs between the two buffers; returns the index holding the result.
fn inner_product_into(
    ring: &RingContext,
    pair: &BlindingKeyPair,
    bct: &BlindedCiphertext,
    bufs: &mut [RnsPoly; 2],
) -> Result<usize> {
    let (first, rest) = pair
        .factors()
        .split_first()
        .ok_or_else(|| Error::InvalidParams("pair without factors".into()))?;
    sparse_dense_mul_into(ring, first, &bct.u_tilde, &mut bufs[0])?;
    let mut cur = 0;
    for f in rest {
        let [a, b] = bufs;
        let (src, dst) = if cur == 0 { (&*a, b) } else { (&*b, a) };
        sparse_dense_mul_into(ring, f, src, dst)?;
        cur ^= 1;
    }
    ring.add_assign(&mut bufs[cur], &bct.v)?;
    Ok(cur)
}

/// Client-side local decryption.
pub fn local_decrypt(
    he: &HeParams,
    pair: &BlindingKeyPair,
    bct: &BlindedCiphertext,
) -> Result<Plaintext> {
    LocalDecryptor::new(he, pair).decrypt(bct)
}

/// Local decryption with reusable scratch space, for decrypting many
/// blinded results under one pair.
pub struct LocalDecryptor<'a> {
    he: &'a HeParams,
    pair: &'a BlindingKeyPair,
    bufs: [RnsPoly; 2],
}

impl<'a> LocalDecryptor<'a> {
    pub fn new(he: &'a HeParams, pair: &'a BlindingKeyPair) -> Self {
        let ring = he.ring();
        Self {
            he,
            pair,
            bufs: [ring.zero(Domain::Coeff), ring.zero(Domain::Coeff)],
        }
    }

    pub fn decrypt(&mut self, bct: &BlindedCiphertext) -> Result<Plaintext> {
        let k = inner_product_into(self.he.ring(), self.pair, bct, &mut self.bufs)?;
        self.he.decode(&self.bufs[k])
    }
}
