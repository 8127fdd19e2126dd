use thiserror::Error;

use crate::ring::Domain;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain mismatch: expected {expected:?}, found {found:?}")]
    DomainMismatch { expected: Domain, found: Domain },

    #[error("operands belong to different rings")]
    RingMismatch,

    #[error("element is not invertible in limb {limb}")]
    NotInvertible { limb: usize },

    #[error("no NTT available for this ring (q_i != 1 mod 2d)")]
    NttUnavailable,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("resampling gave up after {attempts} attempts")]
    ResampleLimit { attempts: usize },

    #[error("accumulator headroom exceeded: h={h}, log2 q={log_q:.2}")]
    HeadroomExceeded { h: usize, log_q: f64 },

    #[error("residue {value} out of range for modulus {modulus}")]
    ResidueOutOfRange { value: u64, modulus: u64 },

    #[error("cannot parse ring descriptor: {0}")]
    Descriptor(String),
}

pub type Result<T> = std::result::Result<T, Error>;
