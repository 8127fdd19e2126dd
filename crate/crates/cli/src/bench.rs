//! Local versus baseline decryption timing.

use std::hint::black_box;
use std::time::{Duration, Instant};

use otsdec_core::he::{self, Ciphertext, Decryptor, Plaintext};
use otsdec_core::opcount;
use otsdec_core::protocol::{
    blind_decrypt, blind_secret_key, local_decrypt, skbd_keygen_composite, BlindedCiphertext,
    LocalDecryptor,
};
use rand::Rng;

use crate::{bench_ring, he_params, CliError, Result};

pub const BENCH_CSV_HEADER: &str =
    "d,logq_total,L,h,h1,h2,lambda,iters,baseline_ms,local_ms,speedup,a_fit";

const WARMUP: usize = 10;

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub lambda: u32,
    pub d: usize,
    /// Bits per limb prime.
    pub limb_bits: u32,
    pub limbs: usize,
    pub h: usize,
    pub h1: usize,
    pub h2: usize,
    pub q2: u64,
    pub iters: usize,
    /// Distinct ciphertexts cycled through the timed loop. With 1 the
    /// operands stay cache-resident, as for a freshly received result.
    pub pool: usize,
    /// Ciphertexts checked on both paths before timing (at least `pool`).
    pub check: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub d: usize,
    pub logq_total: u32,
    pub limbs: usize,
    pub h: usize,
    pub h1: usize,
    pub h2: usize,
    pub lambda: u32,
    pub plain_modulus: u64,
    pub iters: usize,
    pub baseline_ms: f64,
    pub local_ms: f64,
    pub baseline_median_us: f64,
    pub local_median_us: f64,
    pub baseline_min_us: f64,
    pub local_min_us: f64,
    /// `1 - local/baseline` on cumulative time.
    pub speedup: f64,
    /// `1 - local/baseline` on the fastest lap of each path; the least
    /// sensitive to load from other processes.
    pub best_speedup: f64,
    /// `a` in the baseline cost model `a*d*log d + d`, solved from
    /// `local/baseline = (h1+h2) / (a*log d + 1)`.
    pub a_fit: f64,
    pub baseline_ops: u64,
    pub local_ops: u64,
}

impl BenchReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{:.3},{:.3},{:.4},{:.4}",
            self.d,
            self.logq_total,
            self.limbs,
            self.h,
            self.h1,
            self.h2,
            self.lambda,
            self.iters,
            self.baseline_ms,
            self.local_ms,
            self.speedup,
            self.a_fit
        )
    }
}

struct Laps {
    total: Duration,
    median: Duration,
    min: Duration,
}

impl Laps {
    fn new(mut v: Vec<Duration>) -> Self {
        v.sort_unstable();
        Self {
            total: v.iter().sum(),
            median: v[v.len() / 2],
            min: v[0],
        }
    }
}

/// Runs both paths back to back in every iteration, alternating which
/// goes first, so that machine drift hits them equally. Returns the
/// lap statistics of each.
fn time_pair<A, B>(
    iters: usize,
    pool: usize,
    mut baseline: impl FnMut(usize) -> A,
    mut local: impl FnMut(usize) -> B,
) -> [Laps; 2] {
    for i in 0..WARMUP {
        black_box(baseline(i % pool));
        black_box(local(i % pool));
    }
    let mut laps = [Vec::with_capacity(iters), Vec::with_capacity(iters)];
    for i in 0..iters {
        let k = i % pool;
        let mut timed = |which: usize| {
            let start = Instant::now();
            if which == 0 {
                black_box(baseline(k));
            } else {
                black_box(local(k));
            }
            laps[which].push(start.elapsed());
        };
        if i % 2 == 0 {
            timed(0);
            timed(1);
        } else {
            timed(1);
            timed(0);
        }
    }
    laps.map(Laps::new)
}

/// Times `iters` baseline decryptions (cached NTT secret) against `iters`
/// local decryptions of the matching blinded ciphertexts. Every checked
/// ciphertext, the timed ones included, must decrypt to its plaintext on
/// both paths before any timing is taken.
pub fn bench_decrypt<R: Rng + ?Sized>(cfg: &BenchConfig, rng: &mut R) -> Result<BenchReport> {
    if cfg.iters == 0 || cfg.pool == 0 {
        return Err(CliError::Contract("iters and pool must be positive".into()));
    }
    let ring = bench_ring(cfg.d, cfg.limb_bits, cfg.limbs)?;
    let params = he_params(ring.clone())?;
    let (pk, sk) = he::keygen(&params, rng);
    let pair = skbd_keygen_composite(&ring, cfg.h1, cfg.h2, cfg.q2, rng)?;
    let s_tilde = blind_secret_key(&ring, &sk, &pair)?;

    let msgs: Vec<Plaintext> = (0..cfg.check.max(cfg.pool))
        .map(|_| Plaintext::random(&params, rng))
        .collect();
    let cts: Vec<Ciphertext> = msgs
        .iter()
        .map(|m| he::encrypt(&params, &pk, m, rng))
        .collect::<std::result::Result<_, _>>()?;
    let bcts: Vec<BlindedCiphertext> = cts
        .iter()
        .map(|ct| blind_decrypt(&ring, &s_tilde, ct))
        .collect::<std::result::Result<_, _>>()?;

    for (index, ((m, ct), bct)) in msgs.iter().zip(&cts).zip(&bcts).enumerate() {
        let base = he::decrypt(&params, &sk, ct)?;
        let local = local_decrypt(&params, &pair, bct)?;
        if &base != m || &local != m {
            return Err(CliError::OutputMismatch { index });
        }
    }

    let (_, baseline_ops) = opcount::measure(|| he::decrypt(&params, &sk, &cts[0]));
    let (_, local_ops) = opcount::measure(|| local_decrypt(&params, &pair, &bcts[0]));

    let mut baseline = Decryptor::new(&params, &sk);
    let mut local = LocalDecryptor::new(&params, &pair);
    let [base, loc] = time_pair(
        cfg.iters,
        cfg.pool,
        |i| baseline.decrypt(&cts[i]),
        |i| local.decrypt(&bcts[i]),
    );

    let baseline_ms = base.total.as_secs_f64() * 1e3;
    let local_ms = loc.total.as_secs_f64() * 1e3;
    let ratio = local_ms / baseline_ms;
    let log_d = cfg.d.trailing_zeros() as f64;
    let weight = (cfg.h1 + cfg.h2) as f64;
    Ok(BenchReport {
        d: cfg.d,
        logq_total: ring.moduli().iter().map(|m| m.bits()).sum(),
        limbs: cfg.limbs,
        h: cfg.h,
        h1: cfg.h1,
        h2: cfg.h2,
        lambda: cfg.lambda,
        plain_modulus: params.plain_modulus(),
        iters: cfg.iters,
        baseline_ms,
        local_ms,
        baseline_median_us: base.median.as_secs_f64() * 1e6,
        local_median_us: loc.median.as_secs_f64() * 1e6,
        baseline_min_us: base.min.as_secs_f64() * 1e6,
        local_min_us: loc.min.as_secs_f64() * 1e6,
        speedup: 1.0 - ratio,
        best_speedup: 1.0 - loc.min.as_secs_f64() / base.min.as_secs_f64(),
        a_fit: (weight / ratio - 1.0) / log_d,
        baseline_ops,
        local_ops,
    })
}
