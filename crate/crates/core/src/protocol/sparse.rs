//! Sparse-by-dense negacyclic multiplication with delayed reduction.

use crate::error::{Error, Result};
use crate::opcount;
use crate::ring::{Domain, Modulus, RingContext, RnsPoly};

use super::SparsePoly;

/// Accumulation strategy for one limb.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AccumPath {
    /// Products reduced lazily to `[0, 2q)` and summed in 64 bits; needs
    /// `h * 2q <= 2^64 - 1`.
    Lazy64,
    /// Raw products summed in 128 bits; needs `h * q^2 <= 2^128 - 1`.
    Wide128,
    /// Full reduction after every step; always fits.
    Eager,
}

impl AccumPath {
    pub fn fits(self, h: usize, q: u64) -> bool {
        let h = h as u128;
        let q = q as u128;
        match self {
            AccumPath::Lazy64 => h * 2 * q <= u64::MAX as u128,
            AccumPath::Wide128 => h.checked_mul(q * q).is_some(),
            AccumPath::Eager => true,
        }
    }
}

/// Cheapest path whose headroom bound holds for weight `h` and modulus `q`.
pub fn select_path(h: usize, q: u64) -> AccumPath {
    [AccumPath::Lazy64, AccumPath::Wide128]
        .into_iter()
        .find(|p| p.fits(h, q))
        .unwrap_or(AccumPath::Eager)
}

/// `t * u` for sparse `t` and coefficient-domain `u`, choosing the
/// accumulation path per limb.
pub fn sparse_dense_mul(ring: &RingContext, t: &SparsePoly, u: &RnsPoly) -> Result<RnsPoly> {
    let mut out = ring.zero(Domain::Coeff);
    mul_impl(ring, t, u, None, &mut out)?;
    Ok(out)
}

/// As [`sparse_dense_mul`], writing into an existing buffer of the ring.
pub fn sparse_dense_mul_into(
    ring: &RingContext,
    t: &SparsePoly,
    u: &RnsPoly,
    out: &mut RnsPoly,
) -> Result<()> {
    mul_impl(ring, t, u, None, out)
}

/// As [`sparse_dense_mul`] but with a forced path; fails with
/// `HeadroomExceeded` if the path's bound does not hold on some limb.
pub fn sparse_dense_mul_with_path(
    ring: &RingContext,
    t: &SparsePoly,
    u: &RnsPoly,
    path: AccumPath,
) -> Result<RnsPoly> {
    let mut out = ring.zero(Domain::Coeff);
    mul_impl(ring, t, u, Some(path), &mut out)?;
    Ok(out)
}

fn mul_impl(
    ring: &RingContext,
    t: &SparsePoly,
    u: &RnsPoly,
    forced: Option<AccumPath>,
    out: &mut RnsPoly,
) -> Result<()> {
    if t.ring_tag() != ring.tag() || u.ring_tag() != ring.tag() {
        return Err(Error::RingMismatch);
    }
    if u.domain() != Domain::Coeff {
        return Err(Error::DomainMismatch {
            expected: Domain::Coeff,
            found: u.domain(),
        });
    }
    let h = t.weight();
    ring.clear(out, Domain::Coeff)?;
    for i in 0..ring.num_limbs() {
        let m = ring.modulus(i);
        let path = match forced {
            Some(p) if !p.fits(h, m.value()) => {
                return Err(Error::HeadroomExceeded {
                    h,
                    log_q: (m.value() as f64).log2(),
                })
            }
            Some(p) => p,
            None => select_path(h, m.value()),
        };
        let terms = t
            .indices()
            .iter()
            .enumerate()
            .map(|(k, &idx)| (idx as usize, t.term(k)[i]));
        let src = u.limb(i);
        let dst = out.limb_mut(i);
        match path {
            AccumPath::Lazy64 => accumulate_lazy64(m, terms, src, dst),
            AccumPath::Wide128 => accumulate_wide128(m, terms, src, dst),
            AccumPath::Eager => accumulate_eager(m, terms, src, dst),
        }
        opcount::add((h * src.len()) as u64);
    }
    Ok(())
}

// Each pass adds c * X^k * u: coefficients j < d-k land at j+k, the rest
// wrap to j+k-d with a sign flip.

// Output block length for the lazy path; the block stays in L1 while
// every term is applied to it.
const BLOCK: usize = 1024;

fn accumulate_lazy64(
    m: &Modulus,
    terms: impl Iterator<Item = (usize, u64)>,
    src: &[u64],
    dst: &mut [u64],
) {
    let d = src.len();
    let two_q = 2 * m.value();
    let terms: Vec<(usize, u64, u64)> = terms.map(|(k, c)| (k, c, m.shoup(c))).collect();
    for j0 in (0..d).step_by(BLOCK) {
        let j1 = (j0 + BLOCK).min(d);
        let block = &mut dst[j0..j1];
        for &(k, c, cs) in &terms {
            // dst[j] takes src[j-k] for j >= k and -src[j-k+d] below k
            let wrap_end = k.clamp(j0, j1);
            let (neg, pos) = block.split_at_mut(wrap_end - j0);
            let neg_src = &src[(j0 + d - k).min(d)..][..neg.len()];
            let pos_src = &src[wrap_end.saturating_sub(k)..][..pos.len()];
            if c == 1 {
                // x < q already lies in the lazy range
                for (acc, &x) in pos.iter_mut().zip(pos_src) {
                    *acc += x;
                }
                for (acc, &x) in neg.iter_mut().zip(neg_src) {
                    *acc += two_q - x;
                }
            } else {
                for (acc, &x) in pos.iter_mut().zip(pos_src) {
                    *acc += m.mul_shoup_lazy(x, c, cs);
                }
                for (acc, &x) in neg.iter_mut().zip(neg_src) {
                    *acc += two_q - m.mul_shoup_lazy(x, c, cs);
                }
            }
        }
        for acc in block.iter_mut() {
            *acc = m.reduce_u64(*acc);
        }
    }
}

fn accumulate_wide128(
    m: &Modulus,
    terms: impl Iterator<Item = (usize, u64)>,
    src: &[u64],
    dst: &mut [u64],
) {
    let d = src.len();
    let q = m.value() as u128;
    let q_sq = q * q;
    let mut acc = vec![0u128; d];
    for (k, c) in terms {
        let c = c as u128;
        let split = d - k;
        let (head, tail) = src.split_at(split);
        for (a, &x) in acc[k..].iter_mut().zip(head) {
            *a += x as u128 * c;
        }
        for (a, &x) in acc[..k].iter_mut().zip(tail) {
            *a += q_sq - x as u128 * c;
        }
    }
    for (o, a) in dst.iter_mut().zip(acc) {
        *o = m.reduce_u128(a);
    }
}

fn accumulate_eager(
    m: &Modulus,
    terms: impl Iterator<Item = (usize, u64)>,
    src: &[u64],
    dst: &mut [u64],
) {
    let d = src.len();
    for (k, c) in terms {
        let cs = m.shoup(c);
        let split = d - k;
        let (head, tail) = src.split_at(split);
        for (acc, &x) in dst[k..].iter_mut().zip(head) {
            *acc = m.add(*acc, m.mul_shoup(x, c, cs));
        }
        for (acc, &x) in dst[..k].iter_mut().zip(tail) {
            *acc = m.sub(*acc, m.mul_shoup(x, c, cs));
        }
    }
}
