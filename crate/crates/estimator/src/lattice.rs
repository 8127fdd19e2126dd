//! Integer lattice bases for key recovery from a blinded key.

use otsdec_core::ring::{Domain, RingContext, RnsPoly};

use crate::{EstimatorError, Result};

/// Largest ring degree for which bases are built.
pub const MAX_BASIS_DEGREE: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BasisKind {
    Full,
    /// Zero-forced: rows and columns in `guessed` removed.
    ZeroForced {
        guessed: Vec<usize>,
    },
}

/// Row basis `((a I, b S), (0, b q I))` for rational `alpha = a / b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeBasis {
    pub rows: Vec<Vec<i128>>,
    pub alpha_num: i128,
    pub alpha_den: i128,
    pub modulus: u64,
    pub kind: BasisKind,
}

impl LatticeBasis {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// `x * B` for an integer row vector `x`.
    pub fn combine(&self, x: &[i128]) -> Vec<i128> {
        let n = self.dim();
        let mut out = vec![0i128; n];
        for (xi, row) in x.iter().zip(&self.rows) {
            if *xi != 0 {
                for (o, b) in out.iter_mut().zip(row) {
                    *o += xi * b;
                }
            }
        }
        out
    }

    /// Whether `v` is an integer combination of the rows. Uses the upper
    /// block-triangular shape: the first half fixes the coefficients of
    /// the top rows, the rest must be a multiple of `b q`.
    pub fn contains(&self, v: &[i128]) -> bool {
        let n = self.dim() / 2;
        if v.len() != 2 * n {
            return false;
        }
        let mut x = Vec::with_capacity(2 * n);
        for &vi in &v[..n] {
            if vi % self.alpha_num != 0 {
                return false;
            }
            x.push(vi / self.alpha_num);
        }
        x.extend(std::iter::repeat_n(0, n));
        let top = self.combine(&x);
        let step = self.alpha_den * self.modulus as i128;
        v[n..]
            .iter()
            .zip(&top[n..])
            .all(|(a, b)| (a - b).rem_euclid(step) == 0)
    }
}

// row i of the negacyclic matrix: coefficients of s * X^i
fn negacyclic_row(s: &[u64], q: u64, i: usize) -> Vec<u64> {
    let d = s.len();
    (0..d)
        .map(|j| {
            if j >= i {
                s[j - i]
            } else {
                let c = s[j + d - i];
                if c == 0 {
                    0
                } else {
                    q - c
                }
            }
        })
        .collect()
}

fn single_limb_coeffs(ring: &RingContext, s_tilde: &RnsPoly) -> Result<(Vec<u64>, u64)> {
    let d = ring.degree();
    if d > MAX_BASIS_DEGREE {
        return Err(EstimatorError::DimensionCap {
            d,
            max: MAX_BASIS_DEGREE,
        });
    }
    if ring.num_limbs() != 1 {
        return Err(EstimatorError::Invalid(
            "lattice bases need a single-limb ring".into(),
        ));
    }
    let s = ring.to_domain(s_tilde, Domain::Coeff)?;
    Ok((s.limb(0).to_vec(), ring.modulus(0).value()))
}

fn check_alpha(num: i128, den: i128) -> Result<()> {
    if num <= 0 || den <= 0 {
        return Err(EstimatorError::Invalid(
            "alpha must be a positive rational".into(),
        ));
    }
    Ok(())
}

fn assemble(
    s_rows: Vec<Vec<u64>>,
    q: u64,
    alpha_num: i128,
    alpha_den: i128,
    kind: BasisKind,
) -> LatticeBasis {
    let n = s_rows.len();
    let mut rows = Vec::with_capacity(2 * n);
    for (i, srow) in s_rows.into_iter().enumerate() {
        let mut row = vec![0i128; 2 * n];
        row[i] = alpha_num;
        for (dst, c) in row[n..].iter_mut().zip(srow) {
            *dst = alpha_den * c as i128;
        }
        rows.push(row);
    }
    for i in 0..n {
        let mut row = vec![0i128; 2 * n];
        row[n + i] = alpha_den * q as i128;
        rows.push(row);
    }
    LatticeBasis {
        rows,
        alpha_num,
        alpha_den,
        modulus: q,
        kind,
    }
}

/// `L(s~, alpha)` scaled by the denominator of `alpha` so it stays integral.
pub fn build_lattice_basis(
    ring: &RingContext,
    s_tilde: &RnsPoly,
    alpha_num: i128,
    alpha_den: i128,
) -> Result<LatticeBasis> {
    check_alpha(alpha_num, alpha_den)?;
    let (s, q) = single_limb_coeffs(ring, s_tilde)?;
    let rows = (0..s.len()).map(|i| negacyclic_row(&s, q, i)).collect();
    Ok(assemble(rows, q, alpha_num, alpha_den, BasisKind::Full))
}

/// Zero-forced basis of dimension `2(d - r)`: rows of the negacyclic
/// matrix for `i` not in `guessed`, restricted to columns not in `guessed`.
pub fn build_zf_basis(
    ring: &RingContext,
    s_tilde: &RnsPoly,
    alpha_num: i128,
    alpha_den: i128,
    guessed: &[usize],
) -> Result<LatticeBasis> {
    check_alpha(alpha_num, alpha_den)?;
    let (s, q) = single_limb_coeffs(ring, s_tilde)?;
    let d = s.len();
    let mut mask = vec![false; d];
    for &j in guessed {
        if j >= d || mask[j] {
            return Err(EstimatorError::Invalid(format!("bad guessed index {j}")));
        }
        mask[j] = true;
    }
    let rows = (0..d)
        .filter(|&i| !mask[i])
        .map(|i| {
            negacyclic_row(&s, q, i)
                .into_iter()
                .enumerate()
                .filter(|&(j, _)| !mask[j])
                .map(|(_, c)| c)
                .collect()
        })
        .collect();
    let mut guessed = guessed.to_vec();
    guessed.sort_unstable();
    Ok(assemble(
        rows,
        q,
        alpha_num,
        alpha_den,
        BasisKind::ZeroForced { guessed },
    ))
}

/// A published ratio `r = s * t^-1` together with the norm slack of its
/// witness, when known.
#[derive(Clone, Debug)]
pub struct NtruInstance {
    pub r: RnsPoly,
    pub gamma_s: f64,
    pub gamma_t: f64,
    pub log_q: f64,
}

impl NtruInstance {
    /// Records `gamma_x = sqrt(q) / ||x||` for a generating witness given as
    /// centered integer coefficients.
    pub fn from_witness(ring: &RingContext, r: RnsPoly, s: &[i64], t: &[i64]) -> Self {
        let norm = |x: &[i64]| {
            x.iter()
                .map(|&c| (c as f64) * (c as f64))
                .sum::<f64>()
                .sqrt()
        };
        let sqrt_q = (ring.log_q() / 2.0).exp2();
        Self {
            r,
            gamma_s: sqrt_q / norm(s),
            gamma_t: sqrt_q / norm(t),
            log_q: ring.log_q(),
        }
    }

    /// Both witness norms lie below `sqrt(q) / gamma`, i.e. `gamma >= 1`
    /// gives the classical regime; this protocol allows `gamma_t < 1`.
    pub fn is_classical(&self) -> bool {
        self.gamma_s >= 1.0 && self.gamma_t >= 1.0
    }
}
