//! Negacyclic NTT over one limb with Shoup-precomputed twiddles and lazy
//! reduction (values kept in `[0, 4q)` between butterflies).

use super::modulus::{primitive_2d_root, Modulus};

#[derive(Clone, Debug)]
pub struct NttTable {
    modulus: Modulus,
    n: usize,
    psi: u64,
    // psi^bitrev(k), k in [0, n)
    fwd: Vec<u64>,
    fwd_shoup: Vec<u64>,
    // psi^-bitrev(k)
    inv: Vec<u64>,
    inv_shoup: Vec<u64>,
    n_inv: u64,
    n_inv_shoup: u64,
}

fn bit_reverse(x: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        x.reverse_bits() >> (usize::BITS - bits)
    }
}

impl NttTable {
    /// Returns `None` when `q != 1 mod 2n`.
    pub fn new(modulus: &Modulus, n: usize) -> Option<Self> {
        debug_assert!(n.is_power_of_two());
        let psi = primitive_2d_root(modulus, n)?;
        let psi_inv = modulus.inv(psi)?;
        let log_n = n.trailing_zeros();
        let mut fwd = vec![0u64; n];
        let mut inv = vec![0u64; n];
        let (mut p, mut pi) = (1u64, 1u64);
        for k in 0..n {
            let r = bit_reverse(k, log_n);
            fwd[r] = p;
            inv[r] = pi;
            p = modulus.mul(p, psi);
            pi = modulus.mul(pi, psi_inv);
        }
        let fwd_shoup = fwd.iter().map(|&w| modulus.shoup(w)).collect();
        let inv_shoup = inv.iter().map(|&w| modulus.shoup(w)).collect();
        let n_inv = modulus.inv(n as u64 % modulus.value())?;
        Some(Self {
            modulus: modulus.clone(),
            n,
            psi,
            fwd,
            fwd_shoup,
            inv,
            inv_shoup,
            n_inv,
            n_inv_shoup: modulus.shoup(n_inv),
        })
    }

    /// The primitive `2n`-th root the tables were built from.
    pub fn psi(&self) -> u64 {
        self.psi
    }

    /// Inverse-transform twiddles, bit-reversed order.
    pub fn inverse_twiddles(&self) -> &[u64] {
        &self.inv
    }

    /// In-place forward transform; input and output residues in `[0, q)`.
    pub fn forward(&self, a: &mut [u64]) {
        debug_assert_eq!(a.len(), self.n);
        let q = self.modulus.value();
        let two_q = 2 * q;
        let mut t = self.n;
        let mut m = 1;
        while m < self.n {
            t >>= 1;
            for i in 0..m {
                let w = self.fwd[m + i];
                let ws = self.fwd_shoup[m + i];
                let j1 = 2 * i * t;
                let (lo, hi) = a[j1..j1 + 2 * t].split_at_mut(t);
                for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                    let u = (*x).min(x.wrapping_sub(two_q));
                    let v = self.modulus.mul_shoup_lazy(*y, w, ws);
                    *x = u + v;
                    *y = u + two_q - v;
                }
            }
            m <<= 1;
        }
        for x in a.iter_mut() {
            let v = (*x).min(x.wrapping_sub(two_q));
            *x = v.min(v.wrapping_sub(q));
        }
        crate::opcount::add((self.n / 2 * self.n.trailing_zeros() as usize) as u64);
    }

    /// In-place inverse transform including the `n^-1` scaling.
    pub fn inverse(&self, a: &mut [u64]) {
        debug_assert_eq!(a.len(), self.n);
        let q = self.modulus.value();
        let two_q = 2 * q;
        let mut t = 1;
        let mut m = self.n;
        while m > 1 {
            let h = m >> 1;
            let mut j1 = 0;
            for i in 0..h {
                let w = self.inv[h + i];
                let ws = self.inv_shoup[h + i];
                let (lo, hi) = a[j1..j1 + 2 * t].split_at_mut(t);
                for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                    let u = *x;
                    let v = *y;
                    let s = u + v;
                    *x = s.min(s.wrapping_sub(two_q));
                    *y = self.modulus.mul_shoup_lazy(u + two_q - v, w, ws);
                }
                j1 += 2 * t;
            }
            t <<= 1;
            m = h;
        }
        for x in a.iter_mut() {
            *x = self.modulus.mul_shoup(*x, self.n_inv, self.n_inv_shoup);
        }
        crate::opcount::add((self.n / 2 * self.n.trailing_zeros() as usize + self.n) as u64);
    }
}
