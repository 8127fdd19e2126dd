//! Serialized layouts.
//!
//! Polynomial header: `d: u32`, `L: u8`, `L x q_i: u64`, `domain: u8`.
//! Dense body: `L x d` residues as `u64`, limb-major. Sparse body:
//! `h: u32`, then per term `index: u32` and `L` residues as `u64`.

use otsdec_core::he::{Ciphertext, PublicKey, SecretKey};
use otsdec_core::protocol::{BlindedCiphertext, BlindingKeyPair, SparsePoly};
use otsdec_core::ring::{Domain, RingContext, RnsPoly};

use crate::{Result, WireError};

const DOMAIN_COEFF: u8 = 0;
const DOMAIN_NTT: u8 = 1;

/// Bytes of a polynomial header for `limbs` moduli.
pub fn header_len(limbs: usize) -> usize {
    4 + 1 + 8 * limbs + 1
}

/// Forward-only reader that reports truncation as `Malformed`.
pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(WireError::Malformed(format!(
                "truncated: need {n} bytes at offset {}, have {}",
                self.pos,
                self.buf.len() - self.pos
            )));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    /// Fails unless every byte was consumed.
    pub fn finish(&self) -> Result<()> {
        if self.remaining() != 0 {
            return Err(WireError::Malformed(format!(
                "{} trailing bytes",
                self.remaining()
            )));
        }
        Ok(())
    }

    pub fn string(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        let bytes = self.take(n)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| WireError::Malformed("invalid utf-8".into()))
    }
}

pub fn put_u32(out: &mut Vec<u8>, x: u32) {
    out.extend_from_slice(&x.to_le_bytes());
}

pub fn put_u64(out: &mut Vec<u8>, x: u64) {
    out.extend_from_slice(&x.to_le_bytes());
}

pub fn put_string(out: &mut Vec<u8>, s: &str) {
    put_u32(out, s.len() as u32);
    out.extend_from_slice(s.as_bytes());
}

fn put_header(out: &mut Vec<u8>, ring: &RingContext, domain: Domain) {
    put_u32(out, ring.degree() as u32);
    out.push(ring.num_limbs() as u8);
    for m in ring.moduli() {
        put_u64(out, m.value());
    }
    out.push(match domain {
        Domain::Coeff => DOMAIN_COEFF,
        Domain::Ntt => DOMAIN_NTT,
    });
}

fn read_header(r: &mut Reader<'_>, ring: &RingContext) -> Result<Domain> {
    let d = r.u32()? as usize;
    let limbs = r.u8()? as usize;
    if d != ring.degree() || limbs != ring.num_limbs() {
        return Err(WireError::Malformed(format!(
            "ring shape d={d}, L={limbs} does not match d={}, L={}",
            ring.degree(),
            ring.num_limbs()
        )));
    }
    for m in ring.moduli() {
        let q = r.u64()?;
        if q != m.value() {
            return Err(WireError::Malformed(format!(
                "modulus {q} != {}",
                m.value()
            )));
        }
    }
    match r.u8()? {
        DOMAIN_COEFF => Ok(Domain::Coeff),
        DOMAIN_NTT => Ok(Domain::Ntt),
        x => Err(WireError::Malformed(format!("domain flag {x}"))),
    }
}

fn map_core(e: otsdec_core::Error) -> WireError {
    match e {
        otsdec_core::Error::ResidueOutOfRange { value, modulus } => {
            WireError::ResidueOutOfRange { value, modulus }
        }
        other => WireError::Malformed(other.to_string()),
    }
}

pub fn write_poly(out: &mut Vec<u8>, ring: &RingContext, p: &RnsPoly) {
    put_header(out, ring, p.domain());
    out.reserve(8 * p.as_flat().len());
    for &c in p.as_flat() {
        put_u64(out, c);
    }
}

pub fn read_poly(r: &mut Reader<'_>, ring: &RingContext) -> Result<RnsPoly> {
    let domain = read_header(r, ring)?;
    let n = ring.degree() * ring.num_limbs();
    let body = r.take(8 * n)?;
    let coeffs = body
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    ring.from_flat(coeffs, domain).map_err(map_core)
}

pub fn encode_poly(ring: &RingContext, p: &RnsPoly) -> Vec<u8> {
    let mut out = Vec::with_capacity(header_len(ring.num_limbs()) + 8 * p.as_flat().len());
    write_poly(&mut out, ring, p);
    out
}

pub fn decode_poly(ring: &RingContext, bytes: &[u8]) -> Result<RnsPoly> {
    let mut r = Reader::new(bytes);
    let p = read_poly(&mut r, ring)?;
    r.finish()?;
    Ok(p)
}

pub fn write_sparse(out: &mut Vec<u8>, ring: &RingContext, t: &SparsePoly) {
    put_header(out, ring, Domain::Coeff);
    put_u32(out, t.weight() as u32);
    for (k, &idx) in t.indices().iter().enumerate() {
        put_u32(out, idx);
        for &v in t.term(k) {
            put_u64(out, v);
        }
    }
}

pub fn read_sparse(r: &mut Reader<'_>, ring: &RingContext) -> Result<SparsePoly> {
    if read_header(r, ring)? != Domain::Coeff {
        return Err(WireError::Malformed(
            "sparse polynomial must be in COEFF domain".into(),
        ));
    }
    let h = r.u32()? as usize;
    let limbs = ring.num_limbs();
    if h > ring.degree() || r.remaining() < h * (4 + 8 * limbs) {
        return Err(WireError::Malformed(format!(
            "sparse weight {h} inconsistent with body"
        )));
    }
    let mut indices = Vec::with_capacity(h);
    let mut values = Vec::with_capacity(h * limbs);
    for _ in 0..h {
        indices.push(r.u32()?);
        for _ in 0..limbs {
            values.push(r.u64()?);
        }
    }
    SparsePoly::new(ring, indices, values).map_err(map_core)
}

pub fn encode_sparse(ring: &RingContext, t: &SparsePoly) -> Vec<u8> {
    let mut out = Vec::new();
    write_sparse(&mut out, ring, t);
    out
}

pub fn decode_sparse(ring: &RingContext, bytes: &[u8]) -> Result<SparsePoly> {
    let mut r = Reader::new(bytes);
    let t = read_sparse(&mut r, ring)?;
    r.finish()?;
    Ok(t)
}

fn expect_coeff(p: &RnsPoly) -> Result<()> {
    if p.domain() != Domain::Coeff {
        return Err(WireError::Malformed(
            "ciphertext component not in COEFF domain".into(),
        ));
    }
    Ok(())
}

pub fn write_ct(out: &mut Vec<u8>, ring: &RingContext, ct: &Ciphertext) {
    write_poly(out, ring, &ct.u);
    write_poly(out, ring, &ct.v);
}

pub fn read_ct(r: &mut Reader<'_>, ring: &RingContext) -> Result<Ciphertext> {
    let u = read_poly(r, ring)?;
    let v = read_poly(r, ring)?;
    expect_coeff(&u)?;
    expect_coeff(&v)?;
    Ok(Ciphertext { u, v })
}

pub fn encode_ct(ring: &RingContext, ct: &Ciphertext) -> Vec<u8> {
    let mut out = Vec::new();
    write_ct(&mut out, ring, ct);
    out
}

pub fn decode_ct(ring: &RingContext, bytes: &[u8]) -> Result<Ciphertext> {
    let mut r = Reader::new(bytes);
    let ct = read_ct(&mut r, ring)?;
    r.finish()?;
    Ok(ct)
}

pub fn write_blinded(out: &mut Vec<u8>, ring: &RingContext, b: &BlindedCiphertext) {
    write_poly(out, ring, &b.u_tilde);
    write_poly(out, ring, &b.v);
}

pub fn read_blinded(r: &mut Reader<'_>, ring: &RingContext) -> Result<BlindedCiphertext> {
    let u_tilde = read_poly(r, ring)?;
    let v = read_poly(r, ring)?;
    expect_coeff(&u_tilde)?;
    expect_coeff(&v)?;
    Ok(BlindedCiphertext { u_tilde, v })
}

pub fn encode_blinded(ring: &RingContext, b: &BlindedCiphertext) -> Vec<u8> {
    let mut out = Vec::new();
    write_blinded(&mut out, ring, b);
    out
}

pub fn decode_blinded(ring: &RingContext, bytes: &[u8]) -> Result<BlindedCiphertext> {
    let mut r = Reader::new(bytes);
    let b = read_blinded(&mut r, ring)?;
    r.finish()?;
    Ok(b)
}

/// Factor count `u8`, the sparse factors, then the blinding key.
pub fn encode_pair(ring: &RingContext, pair: &BlindingKeyPair) -> Vec<u8> {
    let mut out = vec![pair.factors().len() as u8];
    for f in pair.factors() {
        write_sparse(&mut out, ring, f);
    }
    write_poly(&mut out, ring, pair.blinding_key());
    out
}

pub fn decode_pair(ring: &RingContext, bytes: &[u8]) -> Result<BlindingKeyPair> {
    let mut r = Reader::new(bytes);
    let n = r.u8()? as usize;
    if n == 0 {
        return Err(WireError::Malformed("pair without factors".into()));
    }
    let factors = (0..n)
        .map(|_| read_sparse(&mut r, ring))
        .collect::<Result<Vec<_>>>()?;
    let t_inv = read_poly(&mut r, ring)?;
    r.finish()?;
    BlindingKeyPair::with_blinding_key(ring, factors, t_inv).map_err(map_core)
}

pub fn encode_public_key(ring: &RingContext, pk: &PublicKey) -> Vec<u8> {
    let mut out = Vec::new();
    write_poly(&mut out, ring, pk.a());
    write_poly(&mut out, ring, pk.b());
    out
}

pub fn decode_public_key(ring: &RingContext, bytes: &[u8]) -> Result<PublicKey> {
    let mut r = Reader::new(bytes);
    let a = read_poly(&mut r, ring)?;
    let b = read_poly(&mut r, ring)?;
    r.finish()?;
    PublicKey::from_polys(ring, a, b).map_err(map_core)
}

/// Secret keys are only ever written to local files, never to the wire.
pub fn encode_secret_key(ring: &RingContext, sk: &SecretKey) -> Vec<u8> {
    encode_poly(ring, sk.poly())
}

pub fn decode_secret_key(ring: &RingContext, bytes: &[u8]) -> Result<SecretKey> {
    SecretKey::from_poly(ring, decode_poly(ring, bytes)?).map_err(map_core)
}
