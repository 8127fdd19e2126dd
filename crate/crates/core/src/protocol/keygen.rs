//! Sparse unblinding factors and their dense inverses.

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::opcount;
use crate::ring::{Domain, RingContext, RnsPoly};

/// Bound on resampling attempts during key generation.
pub const MAX_RESAMPLE: usize = 1000;

/// Sparse ring element: `h` strictly increasing positions, each with one
/// residue per limb.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsePoly {
    degree: usize,
    limbs: usize,
    indices: Vec<u32>,
    // index-major: values[k * limbs + i] is the residue of term k mod q_i
    values: Vec<u64>,
    tag: u64,
}

impl SparsePoly {
    /// Validates and wraps the given terms.
    pub fn new(ring: &RingContext, indices: Vec<u32>, values: Vec<u64>) -> Result<Self> {
        let limbs = ring.num_limbs();
        if values.len() != indices.len() * limbs {
            return Err(Error::InvalidParams("sparse value count mismatch".into()));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams(
                "sparse indices not strictly increasing".into(),
            ));
        }
        if indices.last().is_some_and(|&k| k as usize >= ring.degree()) {
            return Err(Error::InvalidParams("sparse index out of range".into()));
        }
        for term in values.chunks(limbs) {
            if term.iter().all(|&v| v == 0) {
                return Err(Error::InvalidParams(
                    "sparse term is zero in every limb".into(),
                ));
            }
            for (i, &v) in term.iter().enumerate() {
                let q = ring.modulus(i).value();
                if v >= q {
                    return Err(Error::ResidueOutOfRange {
                        value: v,
                        modulus: q,
                    });
                }
            }
        }
        Ok(Self {
            degree: ring.degree(),
            limbs,
            indices,
            values,
            tag: ring.tag(),
        })
    }

    /// The constant `1`.
    pub fn one(ring: &RingContext) -> Self {
        Self::monomial(ring, 0, &vec![1; ring.num_limbs()]).expect("valid monomial")
    }

    /// `c * X^k` with per-limb coefficient residues `c`.
    pub fn monomial(ring: &RingContext, k: u32, c: &[u64]) -> Result<Self> {
        Self::new(ring, vec![k], c.to_vec())
    }

    pub fn weight(&self) -> usize {
        self.indices.len()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_limbs(&self) -> usize {
        self.limbs
    }

    pub fn ring_tag(&self) -> u64 {
        self.tag
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    /// Residues of term `k`, one per limb.
    pub fn term(&self, k: usize) -> &[u64] {
        &self.values[k * self.limbs..(k + 1) * self.limbs]
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn to_dense(&self, ring: &RingContext) -> Result<RnsPoly> {
        if self.tag != ring.tag() {
            return Err(Error::RingMismatch);
        }
        let mut p = ring.zero(Domain::Coeff);
        for (k, &idx) in self.indices.iter().enumerate() {
            for i in 0..self.limbs {
                p.limb_mut(i)[idx as usize] = self.term(k)[i];
            }
        }
        Ok(p)
    }
}

/// The client's key material: the unblinding key `t` kept as sparse
/// factors, and the blinding key `t^-1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlindingKeyPair {
    factors: Vec<SparsePoly>,
    // NTT domain when the ring has one, coefficient domain otherwise
    t_inv: RnsPoly,
}

impl BlindingKeyPair {
    /// Builds a pair from explicit factors, inverting their product.
    pub fn from_factors(ring: &RingContext, factors: Vec<SparsePoly>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidParams("need at least one factor".into()));
        }
        let mut t_inv = ring.one(inverse_domain(ring));
        for f in &factors {
            let inv = invert_sparse(ring, f)?;
            t_inv = ring.mul(&t_inv, &inv)?;
        }
        Ok(Self { factors, t_inv })
    }

    /// `t = 1`.
    pub fn identity(ring: &RingContext) -> Self {
        Self::from_factors(ring, vec![SparsePoly::one(ring)]).expect("1 is invertible")
    }

    /// Reassembles a stored pair. The blinding key is converted to the
    /// ring's preferred domain; the inverse relation is not re-checked.
    pub fn with_blinding_key(
        ring: &RingContext,
        factors: Vec<SparsePoly>,
        t_inv: RnsPoly,
    ) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidParams("need at least one factor".into()));
        }
        if factors.iter().any(|f| f.ring_tag() != ring.tag()) {
            return Err(Error::RingMismatch);
        }
        let t_inv = ring.to_domain(&t_inv, inverse_domain(ring))?;
        Ok(Self { factors, t_inv })
    }

    pub(crate) fn from_parts(factors: Vec<SparsePoly>, t_inv: RnsPoly) -> Self {
        Self { factors, t_inv }
    }

    pub fn factors(&self) -> &[SparsePoly] {
        &self.factors
    }

    pub fn blinding_key(&self) -> &RnsPoly {
        &self.t_inv
    }

    /// Total number of sparse terms across factors.
    pub fn total_weight(&self) -> usize {
        self.factors.iter().map(SparsePoly::weight).sum()
    }

    /// Dense unblinding key `t = prod factors` (tests and diagnostics only).
    pub fn dense_unblinding_key(&self, ring: &RingContext) -> Result<RnsPoly> {
        let mut t = ring.one(Domain::Coeff);
        for f in &self.factors {
            t = super::sparse::sparse_dense_mul(ring, f, &t)?;
        }
        Ok(t)
    }
}

fn inverse_domain(ring: &RingContext) -> Domain {
    if ring.has_ntt() {
        Domain::Ntt
    } else {
        Domain::Coeff
    }
}

fn invert_sparse(ring: &RingContext, f: &SparsePoly) -> Result<RnsPoly> {
    let dense = ring.to_domain(&f.to_dense(ring)?, inverse_domain(ring))?;
    ring.invert(&dense)
}

/// Draws `h` distinct positions uniformly, sorted.
fn sample_positions<R: Rng + ?Sized>(d: usize, h: usize, rng: &mut R) -> Vec<u32> {
    let mut idx: Vec<u32> = index::sample(rng, d, h)
        .into_iter()
        .map(|i| i as u32)
        .collect();
    idx.sort_unstable();
    idx
}

/// Writes the limb-`i` values of `indices` into a dense limb and returns its
/// inverse in `R_{q_i}` (in the ring's inverse domain), or `None`.
fn try_invert_limb(
    ring: &RingContext,
    indices: &[u32],
    vals: &[u64],
    limb: usize,
) -> Result<Option<Vec<u64>>> {
    let mut dense = ring.zero(Domain::Coeff);
    for (&k, &v) in indices.iter().zip(vals) {
        dense.limb_mut(limb)[k as usize] = v;
    }
    if ring.has_ntt() {
        let mut evals = dense.limb(limb).to_vec();
        ring.ntt_table(limb).expect("ntt ring").forward(&mut evals);
        let m = ring.modulus(limb);
        opcount::add(3 * evals.len() as u64);
        Ok(m.batch_inv(&evals).ok())
    } else {
        match ring.invert_in_limb(&dense, limb) {
            Ok(inv) => Ok(Some(inv)),
            Err(Error::NotInvertible { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

/// Sparse unblinding factor of weight `h` with values uniform in
/// `[1, q_i)` per limb, resampled limb by limb until invertible, together
/// with its inverse.
pub fn skbd_keygen<R: Rng + ?Sized>(
    ring: &RingContext,
    h: usize,
    rng: &mut R,
) -> Result<(SparsePoly, RnsPoly)> {
    let d = ring.degree();
    if h == 0 || h > d {
        return Err(Error::InvalidParams(format!("weight {h} outside [1, {d}]")));
    }
    let limbs = ring.num_limbs();
    let indices = sample_positions(d, h, rng);
    let mut values = vec![0u64; h * limbs];
    let mut t_inv = ring.zero(inverse_domain(ring));
    let mut attempts = 0;
    for i in 0..limbs {
        let q = ring.modulus(i).value();
        loop {
            attempts += 1;
            if attempts > MAX_RESAMPLE {
                return Err(Error::ResampleLimit {
                    attempts: MAX_RESAMPLE,
                });
            }
            let vals: Vec<u64> = (0..h).map(|_| rng.gen_range(1..q)).collect();
            if let Some(inv) = try_invert_limb(ring, &indices, &vals, i)? {
                for (k, v) in vals.into_iter().enumerate() {
                    values[k * limbs + i] = v;
                }
                t_inv.limb_mut(i).copy_from_slice(&inv);
                break;
            }
        }
    }
    let t = SparsePoly::new(ring, indices, values)?;
    Ok((t, t_inv))
}

/// Second factor of the composite key: `h2` positions and values uniform
/// in `[1, q2)` shared by every limb, both resampled until invertible.
pub fn small_factor_keygen<R: Rng + ?Sized>(
    ring: &RingContext,
    h2: usize,
    q2: u64,
    rng: &mut R,
) -> Result<(SparsePoly, RnsPoly)> {
    let d = ring.degree();
    if h2 == 0 || h2 > d {
        return Err(Error::InvalidParams(format!(
            "weight {h2} outside [1, {d}]"
        )));
    }
    let min_q = ring.moduli().iter().map(|m| m.value()).min().unwrap();
    if q2 < 2 || q2 >= min_q {
        return Err(Error::InvalidParams(format!(
            "q2={q2} must lie in [2, {min_q})"
        )));
    }
    let limbs = ring.num_limbs();
    'attempt: for _ in 0..MAX_RESAMPLE {
        let indices = sample_positions(d, h2, rng);
        let vals: Vec<u64> = (0..h2).map(|_| rng.gen_range(1..q2)).collect();
        let mut t_inv = ring.zero(inverse_domain(ring));
        for i in 0..limbs {
            match try_invert_limb(ring, &indices, &vals, i)? {
                Some(inv) => t_inv.limb_mut(i).copy_from_slice(&inv),
                None => continue 'attempt,
            }
        }
        let values = vals
            .iter()
            .flat_map(|&v| std::iter::repeat_n(v, limbs))
            .collect();
        return Ok((SparsePoly::new(ring, indices, values)?, t_inv));
    }
    Err(Error::ResampleLimit {
        attempts: MAX_RESAMPLE,
    })
}

/// Composite key `t = A * B` with `A = skbd_keygen(h1)` and `B` a weight-`h2`
/// factor with small values in `[1, q2)`.
pub fn skbd_keygen_composite<R: Rng + ?Sized>(
    ring: &RingContext,
    h1: usize,
    h2: usize,
    q2: u64,
    rng: &mut R,
) -> Result<BlindingKeyPair> {
    let (a, a_inv) = skbd_keygen(ring, h1, rng)?;
    let (b, b_inv) = small_factor_keygen(ring, h2, q2, rng)?;
    let t_inv = ring.mul(&a_inv, &b_inv)?;
    Ok(BlindingKeyPair::from_parts(vec![a, b], t_inv))
}

/// Single-factor pair from [`skbd_keygen`].
pub fn skbd_keygen_pair<R: Rng + ?Sized>(
    ring: &RingContext,
    h: usize,
    rng: &mut R,
) -> Result<BlindingKeyPair> {
    let (t, t_inv) = skbd_keygen(ring, h, rng)?;
    Ok(BlindingKeyPair::from_parts(vec![t], t_inv))
}
