//! Client-side decryption material: baseline (`s^`, inverse NTT tables,
//! ciphertext) against the protocol (factored `t`, blinded ciphertext).

use otsdec_core::he::{self, Ciphertext};
use otsdec_core::protocol::{blind_decrypt, blind_secret_key, skbd_keygen_composite};
use otsdec_core::ring::Domain;
use otsdec_wire::codec::{encode_blinded, encode_ct, encode_poly, encode_sparse, header_len};
use rand::Rng;

use crate::{bench_ring, he_params, CliError, Result};

pub const SPACE_CSV_HEADER: &str = "d,ell,component,bits";

#[derive(Clone, Debug, PartialEq)]
pub struct SpaceItem {
    pub component: &'static str,
    pub measured_bits: u64,
    pub model_bits: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpaceReport {
    pub d: usize,
    pub limbs: usize,
    /// Stored bits per coefficient (64 per limb).
    pub ell: u64,
    pub h1: usize,
    pub h2: usize,
    pub baseline: Vec<SpaceItem>,
    pub ours: Vec<SpaceItem>,
}

impl SpaceReport {
    pub fn baseline_bits(&self) -> u64 {
        self.baseline.iter().map(|i| i.measured_bits).sum()
    }

    pub fn ours_bits(&self) -> u64 {
        self.ours.iter().map(|i| i.measured_bits).sum()
    }

    pub fn ratio(&self) -> f64 {
        self.ours_bits() as f64 / self.baseline_bits() as f64
    }

    pub fn model_ratio(&self) -> f64 {
        let sum = |v: &[SpaceItem]| v.iter().map(|i| i.model_bits).sum::<u64>() as f64;
        sum(&self.ours) / sum(&self.baseline)
    }

    pub fn csv_rows(&self) -> Vec<String> {
        let mut rows: Vec<String> = self
            .baseline
            .iter()
            .chain(&self.ours)
            .map(|i| {
                format!(
                    "{},{},{},{}",
                    self.d, self.ell, i.component, i.measured_bits
                )
            })
            .collect();
        rows.push(format!(
            "{},{},baseline_total,{}",
            self.d,
            self.ell,
            self.baseline_bits()
        ));
        rows.push(format!(
            "{},{},ours_total,{}",
            self.d,
            self.ell,
            self.ours_bits()
        ));
        rows
    }
}

/// Serializes real key material and ciphertexts at `(d, limbs)` and
/// itemizes the sizes next to the analytic model. Fails if any item
/// differs from its model by more than its serialization headers.
pub fn space_report<R: Rng + ?Sized>(
    d: usize,
    limb_bits: u32,
    limbs: usize,
    h1: usize,
    h2: usize,
    q2: u64,
    rng: &mut R,
) -> Result<SpaceReport> {
    let ring = bench_ring(d, limb_bits, limbs)?;
    let params = he_params(ring.clone())?;
    let (pk, sk) = he::keygen(&params, rng);
    let pair = skbd_keygen_composite(&ring, h1, h2, q2, rng)?;
    let ct: Ciphertext = he::encrypt(&params, &pk, &he::Plaintext::random(&params, rng), rng)?;
    let bct = blind_decrypt(&ring, &blind_secret_key(&ring, &sk, &pair)?, &ct)?;

    let ell = 64 * limbs as u64;
    let ld = ell * d as u64;
    let bits = |bytes: usize| 8 * bytes as u64;

    let s_hat = ring.ntt_forward(sk.poly())?;
    let twiddles: Vec<u64> = (0..limbs)
        .flat_map(|i| ring.ntt_table(i).unwrap().inverse_twiddles().to_vec())
        .collect();
    let tables = ring.from_flat(twiddles, Domain::Coeff)?;
    let factor_bytes: usize = pair
        .factors()
        .iter()
        .map(|f| encode_sparse(&ring, f).len())
        .sum();

    let report = SpaceReport {
        d,
        limbs,
        ell,
        h1,
        h2,
        baseline: vec![
            SpaceItem {
                component: "s_hat",
                measured_bits: bits(encode_poly(&ring, &s_hat).len()),
                model_bits: ld,
            },
            SpaceItem {
                component: "intt_tables",
                measured_bits: bits(encode_poly(&ring, &tables).len()),
                model_bits: ld,
            },
            SpaceItem {
                component: "ciphertext",
                measured_bits: bits(encode_ct(&ring, &ct).len()),
                model_bits: 2 * ld,
            },
        ],
        ours: vec![
            SpaceItem {
                component: "t_factors",
                measured_bits: bits(factor_bytes),
                model_bits: 2 * ell * (h1 + h2) as u64,
            },
            SpaceItem {
                component: "blinded_ciphertext",
                measured_bits: bits(encode_blinded(&ring, &bct).len()),
                model_bits: 2 * ld,
            },
        ],
    };

    // headers: one per polynomial plus the sparse weight fields
    let overhead = bits(2 * header_len(limbs) + 4 * pair.factors().len());
    for item in report.baseline.iter().chain(&report.ours) {
        let within = if item.component == "t_factors" {
            // indices take 32 bits, not ell, so only the upper side is tight
            item.measured_bits <= item.model_bits + overhead
        } else {
            item.measured_bits.abs_diff(item.model_bits) <= overhead
        };
        if !within {
            return Err(CliError::Contract(format!(
                "{}: measured {} bits vs model {}",
                item.component, item.measured_bits, item.model_bits
            )));
        }
    }
    Ok(report)
}
