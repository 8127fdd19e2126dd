//! Cloud role: per-connection sessions holding one blinded key.

use std::io::{BufReader, BufWriter};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::Arc;
use std::thread;

use otsdec_core::he::Ciphertext;
use otsdec_core::protocol::{blind_decrypt, BlindedSecretKey};
use otsdec_core::ring::RingContext;

use crate::codec::{put_u32, read_ct, read_poly, write_blinded, Reader};
use crate::frame::{ErrorCode, Frame, MsgType};
use crate::WireError;

enum State {
    AwaitSetup,
    Ready {
        ring: Arc<RingContext>,
        key: BlindedSecretKey,
        store: Vec<Ciphertext>,
    },
}

/// One client's state machine: `SETUP` first, then any of `STORE_CT`,
/// `EVAL_ADD` and `BLIND_DEC`.
pub struct Session {
    state: State,
    tamper: bool,
}

impl Default for Session {
    fn default() -> Self {
        Self::new()
    }
}

/// Server reply and whether the connection must be closed afterwards.
pub type Reply = (Frame, bool);

fn malformed(e: impl std::fmt::Display) -> Reply {
    (Frame::error(ErrorCode::Malformed, &e.to_string()), true)
}

impl Session {
    pub fn new() -> Self {
        Self {
            state: State::AwaitSetup,
            tamper: false,
        }
    }

    /// Test hook: corrupt every blinded result before sending it.
    pub fn tampering() -> Self {
        Self {
            state: State::AwaitSetup,
            tamper: true,
        }
    }

    pub fn is_ready(&self) -> bool {
        matches!(self.state, State::Ready { .. })
    }

    /// Handles raw bytes holding exactly one frame.
    pub fn handle_bytes(&mut self, bytes: &[u8]) -> Reply {
        match Frame::decode(bytes) {
            Ok(f) => self.handle_frame(&f),
            Err(e) => malformed(e),
        }
    }

    pub fn handle_frame(&mut self, frame: &Frame) -> Reply {
        let Some(kind) = MsgType::from_byte(frame.msg_type) else {
            return malformed(format!("unknown message type 0x{:02x}", frame.msg_type));
        };
        let mut r = Reader::new(&frame.payload);
        match kind {
            MsgType::Setup => self.setup(&mut r),
            MsgType::StoreCt | MsgType::EvalAdd | MsgType::BlindDec => {
                let tamper = self.tamper;
                let State::Ready { ring, key, store } = &mut self.state else {
                    return (
                        Frame::error(ErrorCode::OrderViolation, "SETUP required first"),
                        false,
                    );
                };
                let res = match kind {
                    MsgType::StoreCt => store_ct(ring, store, &mut r),
                    MsgType::EvalAdd => eval_add(ring, store, &mut r),
                    _ => blind_dec(ring, key, store, &mut r, tamper),
                };
                match res {
                    Ok(payload) => (Frame::new(MsgType::Ok, payload), false),
                    Err(Fail::UnknownId(id)) => (
                        Frame::error(ErrorCode::UnknownId, &format!("unknown id {id}")),
                        false,
                    ),
                    Err(Fail::Malformed(e)) => malformed(e),
                }
            }
            MsgType::Ok | MsgType::Err => malformed("reply type sent as request"),
        }
    }

    fn setup(&mut self, r: &mut Reader<'_>) -> Reply {
        if self.is_ready() {
            return (
                Frame::error(ErrorCode::OrderViolation, "session already set up"),
                false,
            );
        }
        let parsed = (|| -> crate::Result<_> {
            let desc = r.string()?;
            let ring: RingContext = desc
                .parse()
                .map_err(|e: otsdec_core::Error| WireError::Malformed(e.to_string()))?;
            let s_tilde = read_poly(r, &ring)?;
            r.finish()?;
            let key = BlindedSecretKey::from_poly(&ring, s_tilde)?;
            Ok((Arc::new(ring), key))
        })();
        match parsed {
            Ok((ring, key)) => {
                self.state = State::Ready {
                    ring,
                    key,
                    store: Vec::new(),
                };
                (Frame::new(MsgType::Ok, Vec::new()), false)
            }
            Err(e) => malformed(e),
        }
    }
}

enum Fail {
    UnknownId(u32),
    Malformed(WireError),
}

impl From<WireError> for Fail {
    fn from(e: WireError) -> Self {
        Fail::Malformed(e)
    }
}

impl From<otsdec_core::Error> for Fail {
    fn from(e: otsdec_core::Error) -> Self {
        Fail::Malformed(e.into())
    }
}

fn lookup(store: &[Ciphertext], id: u32) -> Result<&Ciphertext, Fail> {
    store.get(id as usize).ok_or(Fail::UnknownId(id))
}

fn push(store: &mut Vec<Ciphertext>, ct: Ciphertext) -> Vec<u8> {
    let id = store.len() as u32;
    store.push(ct);
    id.to_le_bytes().to_vec()
}

fn store_ct(
    ring: &RingContext,
    store: &mut Vec<Ciphertext>,
    r: &mut Reader<'_>,
) -> Result<Vec<u8>, Fail> {
    let ct = read_ct(r, ring)?;
    r.finish()?;
    Ok(push(store, ct))
}

fn eval_add(
    ring: &RingContext,
    store: &mut Vec<Ciphertext>,
    r: &mut Reader<'_>,
) -> Result<Vec<u8>, Fail> {
    let (a, b) = (r.u32()?, r.u32()?);
    r.finish()?;
    let (x, y) = (lookup(store, a)?, lookup(store, b)?);
    let sum = Ciphertext {
        u: ring.add(&x.u, &y.u)?,
        v: ring.add(&x.v, &y.v)?,
    };
    Ok(push(store, sum))
}

fn blind_dec(
    ring: &RingContext,
    key: &BlindedSecretKey,
    store: &[Ciphertext],
    r: &mut Reader<'_>,
    tamper: bool,
) -> Result<Vec<u8>, Fail> {
    let n = r.u32()? as usize;
    if r.remaining() != 4 * n {
        return Err(Fail::Malformed(WireError::Malformed(
            "id list length mismatch".into(),
        )));
    }
    let ids = (0..n).map(|_| r.u32()).collect::<crate::Result<Vec<_>>>()?;
    let cts = ids
        .iter()
        .map(|&id| lookup(store, id))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Vec::new();
    put_u32(&mut out, n as u32);
    for ct in cts {
        let mut b = blind_decrypt(ring, key, ct)?;
        if tamper {
            let m = ring.modulus(0);
            let limb = b.u_tilde.limb_mut(0);
            limb[0] = m.add(limb[0], 1 + m.value() / 3);
        }
        write_blinded(&mut out, ring, &b);
    }
    Ok(out)
}

/// Serves one connection until the peer closes or a malformed frame
/// arrives.
pub fn handle_connection(stream: TcpStream, mut session: Session) -> crate::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = BufWriter::new(stream);
    loop {
        let (reply, close) = match Frame::read_from(&mut reader) {
            Ok(None) => return Ok(()),
            Ok(Some(frame)) => session.handle_frame(&frame),
            Err(WireError::Io(e)) => return Err(WireError::Io(e)),
            Err(e) => malformed(e),
        };
        reply.write_to(&mut writer)?;
        if close {
            return Ok(());
        }
    }
}

/// A bound listener; each accepted connection gets its own thread and
/// session.
pub struct Server {
    listener: TcpListener,
    tamper: bool,
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs) -> crate::Result<Self> {
        Ok(Self {
            listener: TcpListener::bind(addr)?,
            tamper: false,
        })
    }

    /// Test hook: every session corrupts its blinded results.
    pub fn with_tampering(mut self) -> Self {
        self.tamper = true;
        self
    }

    pub fn local_addr(&self) -> crate::Result<SocketAddr> {
        Ok(self.listener.local_addr()?)
    }

    /// Accept loop; runs until the listener fails.
    pub fn run(self) -> crate::Result<()> {
        for stream in self.listener.incoming() {
            let stream = stream?;
            let session = if self.tamper {
                Session::tampering()
            } else {
                Session::new()
            };
            thread::spawn(move || {
                let _ = handle_connection(stream, session);
            });
        }
        Ok(())
    }

    /// Runs the accept loop on a background thread.
    pub fn spawn(self) -> crate::Result<SocketAddr> {
        let addr = self.local_addr()?;
        thread::spawn(move || self.run());
        Ok(addr)
    }
}

/// Binds `addr` and serves forever.
pub fn serve(addr: impl ToSocketAddrs) -> crate::Result<()> {
    Server::bind(addr)?.run()
}
