//! Core arithmetic and protocol routines for outsourced RLWE decryption.
//!
//! * [`ring`]: exact arithmetic in `Z_q[X]/(X^d+1)` under a residue number
//!   system, with negacyclic NTT acceleration and samplers.
//! * [`he`]: a minimal BFV-style public-key scheme (key generation,
//!   encryption, decryption, ciphertext addition).
//! * [`protocol`]: sparse blinding-key generation, secret-key blinding,
//!   blind decryption on the server and sparse local decryption on the
//!   client.

// Limb-major loops index several parallel residue arrays at once.
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod he;
pub mod opcount;
pub mod protocol;
pub mod ring;

pub use error::{Error, Result};
