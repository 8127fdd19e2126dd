//! Frame layout: `"OTSD"`, version `u8`, message type `u8`,
//! payload length `u32`, payload.

use std::io::{Read, Write};

use crate::{Result, WireError};

pub const MAGIC: [u8; 4] = *b"OTSD";
pub const VERSION: u8 = 0x01;
pub const FRAME_HEADER_LEN: usize = 10;
/// Largest accepted payload (256 MiB).
pub const MAX_PAYLOAD: u32 = 1 << 28;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum MsgType {
    Setup = 0x01,
    StoreCt = 0x02,
    EvalAdd = 0x03,
    BlindDec = 0x04,
    Ok = 0x05,
    Err = 0x06,
}

impl MsgType {
    pub fn from_byte(b: u8) -> Option<Self> {
        Some(match b {
            0x01 => MsgType::Setup,
            0x02 => MsgType::StoreCt,
            0x03 => MsgType::EvalAdd,
            0x04 => MsgType::BlindDec,
            0x05 => MsgType::Ok,
            0x06 => MsgType::Err,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum ErrorCode {
    /// Request not allowed in the current session state.
    OrderViolation = 0x10,
    UnknownId = 0x11,
    /// Undecodable frame; the server closes the connection.
    Malformed = 0x12,
}

impl ErrorCode {
    pub fn from_byte(b: u8) -> Option<Self> {
        Some(match b {
            0x10 => ErrorCode::OrderViolation,
            0x11 => ErrorCode::UnknownId,
            0x12 => ErrorCode::Malformed,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub msg_type: u8,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(msg_type: MsgType, payload: Vec<u8>) -> Self {
        Self {
            msg_type: msg_type as u8,
            payload,
        }
    }

    pub fn error(code: ErrorCode, text: &str) -> Self {
        let mut payload = vec![code as u8];
        crate::codec::put_string(&mut payload, text);
        Self::new(MsgType::Err, payload)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(FRAME_HEADER_LEN + self.payload.len());
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(self.msg_type);
        out.extend_from_slice(&(self.payload.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    /// Checks magic and version and returns `(msg_type, payload_len)`.
    pub fn parse_header(h: &[u8; FRAME_HEADER_LEN]) -> Result<(u8, u32)> {
        if h[..4] != MAGIC {
            return Err(WireError::Malformed("bad magic".into()));
        }
        if h[4] != VERSION {
            return Err(WireError::UnsupportedVersion(h[4]));
        }
        let len = u32::from_le_bytes(h[6..10].try_into().unwrap());
        if len > MAX_PAYLOAD {
            return Err(WireError::Malformed(format!(
                "payload length {len} above cap"
            )));
        }
        Ok((h[5], len))
    }

    /// Parses exactly one frame occupying all of `bytes`.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < FRAME_HEADER_LEN {
            return Err(WireError::Malformed("short frame header".into()));
        }
        let (msg_type, len) = Self::parse_header(bytes[..FRAME_HEADER_LEN].try_into().unwrap())?;
        let payload = &bytes[FRAME_HEADER_LEN..];
        if payload.len() != len as usize {
            return Err(WireError::Malformed(format!(
                "payload length {} != declared {len}",
                payload.len()
            )));
        }
        Ok(Self {
            msg_type,
            payload: payload.to_vec(),
        })
    }

    /// Reads one frame from a stream. `Ok(None)` on clean end of stream
    /// before any header byte.
    pub fn read_from(r: &mut impl Read) -> Result<Option<Self>> {
        let mut h = [0u8; FRAME_HEADER_LEN];
        let mut got = 0;
        while got < FRAME_HEADER_LEN {
            match r.read(&mut h[got..])? {
                0 if got == 0 => return Ok(None),
                0 => return Err(WireError::Malformed("truncated frame header".into())),
                n => got += n,
            }
        }
        let (msg_type, len) = Self::parse_header(&h)?;
        // grow with the data actually received, not the declared length
        let mut payload = Vec::with_capacity((len as usize).min(1 << 16));
        r.take(len as u64).read_to_end(&mut payload)?;
        if payload.len() != len as usize {
            return Err(WireError::Malformed("truncated payload".into()));
        }
        Ok(Some(Self { msg_type, payload }))
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(&self.encode())?;
        w.flush()?;
        Ok(())
    }
}
