//! Arithmetic in `R_q = Z_q[X]/(X^d+1)` with `q = q_0 * ... * q_{L-1}`.
//!
//! Elements are [`RnsPoly`] values: one residue array per limb, tagged with
//! the representation they are in. A [`RingContext`] owns the moduli and the
//! per-limb NTT tables and performs every operation; it is immutable once
//! built and can be shared freely across threads.

mod crt;
pub mod modulus;
mod ntt;
pub mod sample;

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use num_bigint::BigUint;

use crate::error::{Error, Result};
pub use crt::BigCoeffPoly;
pub use modulus::{ntt_primes, Modulus};
pub use ntt::NttTable;

/// Largest degree accepted for rings without an NTT.
pub const SCHOOLBOOK_MAX_DEGREE: usize = 1024;
/// Largest ring degree accepted by any constructor.
pub const MAX_DEGREE: usize = 1 << 17;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    /// Coefficient representation.
    Coeff,
    /// Negacyclic evaluation representation.
    Ntt,
}

#[derive(Clone, Debug)]
pub struct RingContext {
    degree: usize,
    moduli: Vec<Modulus>,
    ntt: Option<Vec<NttTable>>,
    q_big: BigUint,
    crt: crt::CrtBasis,
    tag: u64,
}

impl RingContext {
    /// Builds an NTT-enabled ring. Every modulus must be a prime below
    /// `2^62` with `q_i = 1 mod 2d`, and the moduli must be distinct.
    pub fn new(degree: usize, moduli: &[u64]) -> Result<Self> {
        let mut ctx = Self::build(degree, moduli)?;
        let tables = ctx
            .moduli
            .iter()
            .map(|m| {
                NttTable::new(m, degree).ok_or_else(|| {
                    Error::InvalidParams(format!(
                        "modulus {} is not 1 mod {}",
                        m.value(),
                        2 * degree
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        ctx.ntt = Some(tables);
        Ok(ctx)
    }

    /// Builds a small ring without NTT support; multiplication is
    /// schoolbook and invertibility is decided by Gaussian elimination.
    /// Intended for statistical experiments at tiny `(d, q)`.
    pub fn new_schoolbook(degree: usize, moduli: &[u64]) -> Result<Self> {
        if degree > SCHOOLBOOK_MAX_DEGREE {
            return Err(Error::InvalidParams(format!(
                "schoolbook ring limited to d <= {SCHOOLBOOK_MAX_DEGREE}"
            )));
        }
        Self::build(degree, moduli)
    }

    /// Ring with `count` generated primes of `bits` bits each.
    pub fn generate(degree: usize, bits: u32, count: usize) -> Result<Self> {
        if !degree.is_power_of_two() {
            return Err(Error::InvalidParams(format!(
                "d={degree} not a power of two"
            )));
        }
        Self::new(degree, &ntt_primes(bits, degree, count)?)
    }

    fn build(degree: usize, moduli: &[u64]) -> Result<Self> {
        if !(2..=MAX_DEGREE).contains(&degree) || !degree.is_power_of_two() {
            return Err(Error::InvalidParams(format!(
                "degree {degree} must be a power of two in [2, {MAX_DEGREE}]"
            )));
        }
        if moduli.is_empty() || moduli.len() > 255 {
            return Err(Error::InvalidParams("need between 1 and 255 moduli".into()));
        }
        for (i, &q) in moduli.iter().enumerate() {
            if !modulus::is_prime(q) {
                return Err(Error::InvalidParams(format!("modulus {q} is not prime")));
            }
            if moduli[..i].contains(&q) {
                return Err(Error::InvalidParams(format!("modulus {q} repeated")));
            }
        }
        let moduli = moduli
            .iter()
            .map(|&q| Modulus::new(q))
            .collect::<Result<Vec<_>>>()?;
        let q_big = moduli
            .iter()
            .fold(BigUint::from(1u32), |acc, m| acc * m.value());
        let crt = crt::CrtBasis::new(&moduli, &q_big);
        let mut h = DefaultHasher::new();
        degree.hash(&mut h);
        for m in &moduli {
            m.value().hash(&mut h);
        }
        Ok(Self {
            degree,
            moduli,
            ntt: None,
            q_big,
            crt,
            tag: h.finish(),
        })
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    pub fn num_limbs(&self) -> usize {
        self.moduli.len()
    }

    #[inline]
    pub fn modulus(&self, limb: usize) -> &Modulus {
        &self.moduli[limb]
    }

    pub fn moduli(&self) -> &[Modulus] {
        &self.moduli
    }

    pub fn moduli_values(&self) -> Vec<u64> {
        self.moduli.iter().map(Modulus::value).collect()
    }

    /// Exact product of all limb moduli.
    pub fn q_big(&self) -> &BigUint {
        &self.q_big
    }

    /// `log2(q)` of the full modulus.
    pub fn log_q(&self) -> f64 {
        self.moduli.iter().map(|m| (m.value() as f64).log2()).sum()
    }

    pub fn has_ntt(&self) -> bool {
        self.ntt.is_some()
    }

    pub fn ntt_table(&self, limb: usize) -> Option<&NttTable> {
        self.ntt.as_ref().map(|t| &t[limb])
    }

    /// Fingerprint of `(d, moduli)`; polynomials carry it to detect mixing.
    pub fn tag(&self) -> u64 {
        self.tag
    }

    /// Text descriptor `d=<d> moduli=<q0>,<q1>,...`.
    pub fn descriptor(&self) -> String {
        self.to_string()
    }

    pub(crate) fn crt_basis(&self) -> &crt::CrtBasis {
        &self.crt
    }

    /// Fails with `RingMismatch` unless `p` belongs to this ring.
    pub fn check_same(&self, p: &RnsPoly) -> Result<()> {
        self.check(p)
    }

    fn check(&self, p: &RnsPoly) -> Result<()> {
        if p.tag != self.tag {
            return Err(Error::RingMismatch);
        }
        Ok(())
    }

    fn check_domain(&self, p: &RnsPoly, domain: Domain) -> Result<()> {
        self.check(p)?;
        if p.domain != domain {
            return Err(Error::DomainMismatch {
                expected: domain,
                found: p.domain,
            });
        }
        Ok(())
    }

    pub fn zero(&self, domain: Domain) -> RnsPoly {
        RnsPoly {
            coeffs: vec![0; self.degree * self.num_limbs()],
            degree: self.degree,
            limbs: self.num_limbs(),
            domain,
            tag: self.tag,
        }
    }

    /// Overwrites `dst` with `src`, reusing its allocation.
    pub fn copy_into(&self, src: &RnsPoly, dst: &mut RnsPoly) -> Result<()> {
        self.check(src)?;
        self.check(dst)?;
        dst.coeffs.copy_from_slice(&src.coeffs);
        dst.domain = src.domain;
        Ok(())
    }

    /// Zeroes `p` in place and sets its domain.
    pub fn clear(&self, p: &mut RnsPoly, domain: Domain) -> Result<()> {
        self.check(p)?;
        p.coeffs.fill(0);
        p.domain = domain;
        Ok(())
    }

    /// The constant polynomial `1` in the requested domain.
    pub fn one(&self, domain: Domain) -> RnsPoly {
        let mut p = self.zero(Domain::Coeff);
        for i in 0..self.num_limbs() {
            p.limb_mut(i)[0] = 1;
        }
        match domain {
            Domain::Coeff => p,
            // the evaluation vector of a constant is constant
            Domain::Ntt => {
                p.coeffs.fill(1);
                p.domain = Domain::Ntt;
                p
            }
        }
    }

    /// Coefficient-domain polynomial from signed integer coefficients.
    pub fn from_signed(&self, coeffs: &[i64]) -> Result<RnsPoly> {
        if coeffs.len() != self.degree {
            return Err(Error::InvalidParams(format!(
                "expected {} coefficients, got {}",
                self.degree,
                coeffs.len()
            )));
        }
        let mut p = self.zero(Domain::Coeff);
        for (i, m) in self.moduli.iter().enumerate() {
            for (dst, &c) in p.limb_mut(i).iter_mut().zip(coeffs) {
                *dst = m.from_i64(c);
            }
        }
        Ok(p)
    }

    /// Wraps limb-major residues after validating them.
    pub fn from_limbs(&self, limbs: Vec<Vec<u64>>, domain: Domain) -> Result<RnsPoly> {
        if limbs.len() != self.num_limbs() || limbs.iter().any(|l| l.len() != self.degree) {
            return Err(Error::InvalidParams(
                "limb shape does not match ring".into(),
            ));
        }
        let mut coeffs = Vec::with_capacity(self.degree * self.num_limbs());
        for (limb, m) in limbs.iter().zip(&self.moduli) {
            if let Some(&bad) = limb.iter().find(|&&v| v >= m.value()) {
                return Err(Error::ResidueOutOfRange {
                    value: bad,
                    modulus: m.value(),
                });
            }
            coeffs.extend_from_slice(limb);
        }
        self.from_flat(coeffs, domain)
    }

    /// Wraps a flat limb-major residue vector after validating it.
    pub fn from_flat(&self, coeffs: Vec<u64>, domain: Domain) -> Result<RnsPoly> {
        if coeffs.len() != self.degree * self.num_limbs() {
            return Err(Error::InvalidParams(
                "residue count does not match ring".into(),
            ));
        }
        for (chunk, m) in coeffs.chunks(self.degree).zip(&self.moduli) {
            if let Some(&bad) = chunk.iter().find(|&&v| v >= m.value()) {
                return Err(Error::ResidueOutOfRange {
                    value: bad,
                    modulus: m.value(),
                });
            }
        }
        if domain == Domain::Ntt && !self.has_ntt() {
            return Err(Error::NttUnavailable);
        }
        Ok(RnsPoly {
            coeffs,
            degree: self.degree,
            limbs: self.num_limbs(),
            domain,
            tag: self.tag,
        })
    }

    pub fn ntt_forward(&self, p: &RnsPoly) -> Result<RnsPoly> {
        let mut out = p.clone();
        self.ntt_forward_inplace(&mut out)?;
        Ok(out)
    }

    pub fn ntt_inverse(&self, p: &RnsPoly) -> Result<RnsPoly> {
        let mut out = p.clone();
        self.ntt_inverse_inplace(&mut out)?;
        Ok(out)
    }

    pub fn ntt_forward_inplace(&self, p: &mut RnsPoly) -> Result<()> {
        self.check_domain(p, Domain::Coeff)?;
        let tables = self.ntt.as_ref().ok_or(Error::NttUnavailable)?;
        for (limb, table) in p.coeffs.chunks_mut(self.degree).zip(tables) {
            table.forward(limb);
        }
        p.domain = Domain::Ntt;
        Ok(())
    }

    pub fn ntt_inverse_inplace(&self, p: &mut RnsPoly) -> Result<()> {
        self.check_domain(p, Domain::Ntt)?;
        let tables = self.ntt.as_ref().ok_or(Error::NttUnavailable)?;
        for (limb, table) in p.coeffs.chunks_mut(self.degree).zip(tables) {
            table.inverse(limb);
        }
        p.domain = Domain::Coeff;
        Ok(())
    }

    /// Converts to the requested domain (no-op if already there).
    pub fn to_domain(&self, p: &RnsPoly, domain: Domain) -> Result<RnsPoly> {
        self.check(p)?;
        match (p.domain, domain) {
            (a, b) if a == b => Ok(p.clone()),
            (Domain::Coeff, Domain::Ntt) => self.ntt_forward(p),
            _ => self.ntt_inverse(p),
        }
    }

    fn zip_limbs(
        &self,
        a: &RnsPoly,
        b: &RnsPoly,
        f: impl Fn(&Modulus, u64, u64) -> u64,
    ) -> Result<RnsPoly> {
        self.check_domain(b, a.domain)?;
        self.check(a)?;
        let mut out = a.clone();
        for (i, m) in self.moduli.iter().enumerate() {
            let rhs = b.limb(i);
            for (x, &y) in out.limb_mut(i).iter_mut().zip(rhs) {
                *x = f(m, *x, y);
            }
        }
        Ok(out)
    }

    pub fn add(&self, a: &RnsPoly, b: &RnsPoly) -> Result<RnsPoly> {
        self.zip_limbs(a, b, |m, x, y| m.add(x, y))
    }

    /// `a += b` in place.
    pub fn add_assign(&self, a: &mut RnsPoly, b: &RnsPoly) -> Result<()> {
        self.check(a)?;
        self.check_domain(b, a.domain)?;
        for (i, m) in self.moduli.iter().enumerate() {
            for (x, &y) in a.limb_mut(i).iter_mut().zip(b.limb(i)) {
                *x = m.add(*x, y);
            }
        }
        Ok(())
    }

    pub fn sub(&self, a: &RnsPoly, b: &RnsPoly) -> Result<RnsPoly> {
        self.zip_limbs(a, b, |m, x, y| m.sub(x, y))
    }

    pub fn neg(&self, a: &RnsPoly) -> Result<RnsPoly> {
        self.check(a)?;
        let mut out = a.clone();
        for (i, m) in self.moduli.iter().enumerate() {
            for x in out.limb_mut(i) {
                *x = m.neg(*x);
            }
        }
        Ok(out)
    }

    /// Pointwise product of two NTT-domain polynomials.
    pub fn mul_pointwise(&self, a: &RnsPoly, b: &RnsPoly) -> Result<RnsPoly> {
        self.check_domain(a, Domain::Ntt)?;
        let out = self.zip_limbs(a, b, |m, x, y| m.mul(x, y))?;
        crate::opcount::add(a.coeffs.len() as u64);
        Ok(out)
    }

    /// Shoup companions of every residue of `b`, for repeated products by
    /// a fixed operand.
    pub fn shoup_companions(&self, b: &RnsPoly) -> Result<Vec<u64>> {
        self.check(b)?;
        let mut out = Vec::with_capacity(b.coeffs.len());
        for (i, m) in self.moduli.iter().enumerate() {
            out.extend(b.limb(i).iter().map(|&w| m.shoup(w)));
        }
        Ok(out)
    }

    /// In-place pointwise product by a fixed NTT-domain operand with
    /// precomputed companions from [`RingContext::shoup_companions`].
    pub fn mul_pointwise_fixed(&self, a: &mut RnsPoly, b: &RnsPoly, b_shoup: &[u64]) -> Result<()> {
        self.check_domain(a, Domain::Ntt)?;
        self.check_domain(b, Domain::Ntt)?;
        if b_shoup.len() != b.coeffs.len() {
            return Err(Error::InvalidParams("companion length mismatch".into()));
        }
        let d = self.degree;
        for (i, m) in self.moduli.iter().enumerate() {
            let (w, ws) = (b.limb(i), &b_shoup[i * d..(i + 1) * d]);
            for ((x, &w), &ws) in a.limb_mut(i).iter_mut().zip(w).zip(ws) {
                *x = m.mul_shoup(*x, w, ws);
            }
        }
        crate::opcount::add(a.coeffs.len() as u64);
        Ok(())
    }

    /// Ring product. Both operands must share a domain; the result is in
    /// that domain. Coefficient-domain operands go through the NTT when
    /// available and through schoolbook multiplication otherwise.
    pub fn mul(&self, a: &RnsPoly, b: &RnsPoly) -> Result<RnsPoly> {
        self.check(a)?;
        self.check_domain(b, a.domain)?;
        match a.domain {
            Domain::Ntt => self.mul_pointwise(a, b),
            Domain::Coeff if self.has_ntt() => {
                let fa = self.ntt_forward(a)?;
                let fb = self.ntt_forward(b)?;
                let mut prod = self.mul_pointwise(&fa, &fb)?;
                self.ntt_inverse_inplace(&mut prod)?;
                Ok(prod)
            }
            Domain::Coeff => Ok(self.mul_schoolbook(a, b)),
        }
    }

    fn mul_schoolbook(&self, a: &RnsPoly, b: &RnsPoly) -> RnsPoly {
        let d = self.degree;
        let mut out = self.zero(Domain::Coeff);
        for (i, m) in self.moduli.iter().enumerate() {
            let (x, y) = (a.limb(i), b.limb(i));
            let dst = out.limb_mut(i);
            for j in 0..d {
                for k in 0..d {
                    let p = m.mul(x[j], y[k]);
                    let idx = j + k;
                    if idx < d {
                        dst[idx] = m.add(dst[idx], p);
                    } else {
                        dst[idx - d] = m.sub(dst[idx - d], p);
                    }
                }
            }
        }
        out
    }

    /// Multiplies every limb by a per-limb scalar.
    pub fn mul_scalar(&self, a: &RnsPoly, scalars: &[u64]) -> Result<RnsPoly> {
        self.check(a)?;
        let mut out = a.clone();
        for (i, m) in self.moduli.iter().enumerate() {
            let w = scalars[i] % m.value();
            let ws = m.shoup(w);
            for x in out.limb_mut(i) {
                *x = m.mul_shoup(*x, w, ws);
            }
        }
        Ok(out)
    }

    /// Inverse of limb `limb` of `p` in `R_{q_i}`, in the same domain as
    /// `p`. With an NTT the limb is invertible iff none of its evaluations
    /// vanish (`X^d+1` splits completely mod `q_i`); otherwise the
    /// negacyclic multiplication matrix is inverted directly.
    pub fn invert_in_limb(&self, p: &RnsPoly, limb: usize) -> Result<Vec<u64>> {
        self.check(p)?;
        if limb >= self.num_limbs() {
            return Err(Error::InvalidParams(format!("limb {limb} out of range")));
        }
        let m = &self.moduli[limb];
        match (&self.ntt, p.domain) {
            (Some(tables), domain) => {
                let mut evals = p.limb(limb).to_vec();
                if domain == Domain::Coeff {
                    tables[limb].forward(&mut evals);
                }
                let mut inv = m
                    .batch_inv(&evals)
                    .map_err(|_| Error::NotInvertible { limb })?;
                crate::opcount::add(3 * evals.len() as u64);
                if domain == Domain::Coeff {
                    tables[limb].inverse(&mut inv);
                }
                Ok(inv)
            }
            (None, _) => {
                invert_negacyclic_gauss(m, p.limb(limb)).ok_or(Error::NotInvertible { limb })
            }
        }
    }

    /// Inverse in `R_q`, limb by limb.
    pub fn invert(&self, p: &RnsPoly) -> Result<RnsPoly> {
        let mut out = p.clone();
        for i in 0..self.num_limbs() {
            let inv = self.invert_in_limb(p, i)?;
            out.limb_mut(i).copy_from_slice(&inv);
        }
        Ok(out)
    }

    /// Exact CRT lift to big-integer coefficients in `[0, q)`.
    pub fn crt_reconstruct(&self, p: &RnsPoly) -> Result<BigCoeffPoly> {
        self.check_domain(p, Domain::Coeff)?;
        Ok(crt::reconstruct(self, p))
    }

    /// Reduces big-integer coefficients into residues.
    pub fn crt_decompose(&self, p: &BigCoeffPoly) -> Result<RnsPoly> {
        crt::decompose(self, p)
    }
}

/// Solves `p(X) * x(X) = 1` over `Z_q[X]/(X^d+1)` by Gauss-Jordan
/// elimination on the negacyclic multiplication matrix. `q` must be prime.
fn invert_negacyclic_gauss(m: &Modulus, p: &[u64]) -> Option<Vec<u64>> {
    let d = p.len();
    // column j of M holds the coefficients of p * X^j
    let mut a = vec![vec![0u64; d + 1]; d];
    for j in 0..d {
        for (k, &c) in p.iter().enumerate() {
            let idx = j + k;
            if idx < d {
                a[idx][j] = m.add(a[idx][j], c);
            } else {
                a[idx - d][j] = m.sub(a[idx - d][j], c);
            }
        }
    }
    a[0][d] = 1;
    for col in 0..d {
        let pivot = (col..d).find(|&r| a[r][col] != 0)?;
        a.swap(col, pivot);
        let inv = m.inv(a[col][col])?;
        for v in a[col].iter_mut() {
            *v = m.mul(*v, inv);
        }
        for r in 0..d {
            if r != col && a[r][col] != 0 {
                let f = a[r][col];
                for c in col..=d {
                    let t = m.mul(f, a[col][c]);
                    a[r][c] = m.sub(a[r][c], t);
                }
            }
        }
    }
    Some(a.iter().map(|row| row[d]).collect())
}

impl fmt::Display for RingContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d={} moduli=", self.degree)?;
        for (i, m) in self.moduli.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", m.value())?;
        }
        Ok(())
    }
}

impl FromStr for RingContext {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut degree = None;
        let mut moduli = None;
        for part in s.split_whitespace() {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Descriptor(format!("expected key=value, got {part:?}")))?;
            match key {
                "d" => {
                    degree = Some(
                        value
                            .parse::<usize>()
                            .map_err(|e| Error::Descriptor(format!("d: {e}")))?,
                    )
                }
                "moduli" => {
                    moduli = Some(
                        value
                            .split(',')
                            .map(|q| q.parse::<u64>())
                            .collect::<std::result::Result<Vec<_>, _>>()
                            .map_err(|e| Error::Descriptor(format!("moduli: {e}")))?,
                    )
                }
                other => return Err(Error::Descriptor(format!("unknown key {other:?}"))),
            }
        }
        let degree = degree.ok_or_else(|| Error::Descriptor("missing d".into()))?;
        let moduli = moduli.ok_or_else(|| Error::Descriptor("missing moduli".into()))?;
        RingContext::new(degree, &moduli)
    }
}

/// Ring element in residue-number-system form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RnsPoly {
    // limb-major: coeffs[i * degree + j] is coefficient j mod q_i
    coeffs: Vec<u64>,
    degree: usize,
    limbs: usize,
    domain: Domain,
    tag: u64,
}

impl RnsPoly {
    #[inline]
    pub fn domain(&self) -> Domain {
        self.domain
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    pub fn num_limbs(&self) -> usize {
        self.limbs
    }

    pub fn ring_tag(&self) -> u64 {
        self.tag
    }

    #[inline]
    pub fn limb(&self, i: usize) -> &[u64] {
        &self.coeffs[i * self.degree..(i + 1) * self.degree]
    }

    #[inline]
    pub fn limb_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.coeffs[i * self.degree..(i + 1) * self.degree]
    }

    /// All residues, limb-major.
    pub fn as_flat(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Number of coefficient positions nonzero in at least one limb.
    /// Only meaningful in the coefficient domain.
    pub fn hamming_weight(&self) -> usize {
        (0..self.degree)
            .filter(|&j| (0..self.limbs).any(|i| self.coeffs[i * self.degree + j] != 0))
            .count()
    }
}
