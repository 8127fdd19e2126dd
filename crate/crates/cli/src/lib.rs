//! Benchmark and space-accounting harness behind the `otsdec` binary.

pub mod bench;
pub mod space;

use std::sync::Arc;

use otsdec_core::he::HeParams;
use otsdec_core::ring::modulus::ntt_primes;
use otsdec_core::ring::RingContext;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub use bench::{bench_decrypt, BenchConfig, BenchReport, BENCH_CSV_HEADER};
pub use space::{space_report, SpaceItem, SpaceReport, SPACE_CSV_HEADER};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("local and baseline decryption disagree on ciphertext {index}")]
    OutputMismatch { index: usize },

    #[error("{0}")]
    Contract(String),

    #[error(transparent)]
    Core(#[from] otsdec_core::Error),

    #[error(transparent)]
    Estimator(#[from] otsdec_estimator::EstimatorError),

    #[error(transparent)]
    Wire(#[from] otsdec_wire::WireError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 3 for I/O failures, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::Wire(otsdec_wire::WireError::Io(_)) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// `log2 d` for small values, `d` itself otherwise.
pub fn parse_degree(v: &str) -> std::result::Result<usize, String> {
    let n: u64 = v.parse().map_err(|e| format!("{v}: {e}"))?;
    let d = if n < 64 {
        1u64.checked_shl(n as u32).unwrap_or(0)
    } else {
        n
    };
    if d < 2 || !d.is_power_of_two() {
        return Err(format!("{v} is neither log2 d nor a power of two"));
    }
    Ok(d as usize)
}

/// Ring with `limbs` NTT-friendly primes of `bits` bits each.
pub fn bench_ring(d: usize, bits: u32, limbs: usize) -> Result<Arc<RingContext>> {
    Ok(Arc::new(RingContext::new(d, &ntt_primes(bits, d, limbs)?)?))
}

/// Largest safe plaintext modulus for `ring`.
pub fn he_params(ring: Arc<RingContext>) -> Result<HeParams> {
    Ok(HeParams::with_safe_plain_modulus(ring)?)
}

pub fn seeded_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}
