//! Binary encoding of protocol objects and a framed request/response
//! service: the cloud holds the blinded key and stored ciphertexts, the
//! client uploads, asks for blind decryptions and finishes locally.
//!
//! All integers are little-endian and fixed width.

pub mod client;
pub mod codec;
pub mod frame;
pub mod server;

pub use client::{client_session, Client, SessionOutcome, SessionPlan};
pub use codec::*;
pub use frame::{ErrorCode, Frame, MsgType, FRAME_HEADER_LEN, MAGIC, MAX_PAYLOAD, VERSION};
pub use server::{serve, Server, Session};

/// Default TCP port of the service.
pub const DEFAULT_PORT: u16 = 7740;

/// Environment variable holding the seed for deterministic demo runs.
pub const SEED_ENV: &str = "OTSDEC_SEED";

#[derive(Debug, thiserror::Error)]
pub enum WireError {
    #[error("malformed data: {0}")]
    Malformed(String),

    #[error("residue {value} out of range for modulus {modulus}")]
    ResidueOutOfRange { value: u64, modulus: u64 },

    #[error("unsupported protocol version {0}")]
    UnsupportedVersion(u8),

    #[error("server error {code:?}: {text}")]
    Server { code: ErrorCode, text: String },

    #[error("unexpected reply type 0x{0:02x}")]
    UnexpectedReply(u8),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Core(#[from] otsdec_core::Error),
}

pub type Result<T> = std::result::Result<T, WireError>;
