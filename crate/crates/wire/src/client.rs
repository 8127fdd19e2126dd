//! Client role: owns `s` and the blinding factors, sends only `s~`,
//! ciphertexts and ids.

use std::io::{Read, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::thread;
use std::time::Duration;

use otsdec_core::he::{Ciphertext, HeParams, Plaintext, SecretKey};
use otsdec_core::protocol::{blind_secret_key, local_decrypt, BlindedCiphertext, BlindingKeyPair};
use otsdec_core::ring::RingContext;

use crate::codec::{put_string, put_u32, read_blinded, write_ct, write_poly, Reader};
use crate::frame::{ErrorCode, Frame, MsgType};
use crate::{Result, WireError};

pub struct Client<S> {
    stream: S,
}

impl Client<TcpStream> {
    /// Connects, retrying once after a short pause.
    pub fn connect(addr: impl ToSocketAddrs + Clone) -> Result<Self> {
        let stream = match TcpStream::connect(addr.clone()) {
            Ok(s) => s,
            Err(_) => {
                thread::sleep(Duration::from_millis(200));
                TcpStream::connect(addr)?
            }
        };
        stream.set_nodelay(true)?;
        Ok(Self { stream })
    }
}

impl<S: Read + Write> Client<S> {
    pub fn new(stream: S) -> Self {
        Self { stream }
    }

    pub fn into_inner(self) -> S {
        self.stream
    }

    /// Sends one request frame and returns the `OK` payload.
    pub fn request(&mut self, msg_type: MsgType, payload: Vec<u8>) -> Result<Vec<u8>> {
        Frame::new(msg_type, payload).write_to(&mut self.stream)?;
        let reply = Frame::read_from(&mut self.stream)?
            .ok_or_else(|| WireError::Malformed("connection closed before reply".into()))?;
        match MsgType::from_byte(reply.msg_type) {
            Some(MsgType::Ok) => Ok(reply.payload),
            Some(MsgType::Err) => {
                let mut r = Reader::new(&reply.payload);
                let code = ErrorCode::from_byte(r.u8()?)
                    .ok_or_else(|| WireError::Malformed("unknown error code".into()))?;
                let text = r.string().unwrap_or_default();
                Err(WireError::Server { code, text })
            }
            _ => Err(WireError::UnexpectedReply(reply.msg_type)),
        }
    }

    /// Uploads the blinded key `s~ = s * t^-1`.
    pub fn setup(
        &mut self,
        ring: &RingContext,
        sk: &SecretKey,
        pair: &BlindingKeyPair,
    ) -> Result<()> {
        let s_tilde = blind_secret_key(ring, sk, pair)?;
        let mut payload = Vec::new();
        put_string(&mut payload, &ring.descriptor());
        write_poly(&mut payload, ring, s_tilde.poly());
        let reply = self.request(MsgType::Setup, payload)?;
        Reader::new(&reply).finish()
    }

    pub fn store_ct(&mut self, ring: &RingContext, ct: &Ciphertext) -> Result<u32> {
        let mut payload = Vec::new();
        write_ct(&mut payload, ring, ct);
        self.read_id(MsgType::StoreCt, payload)
    }

    /// Homomorphic addition on the server; returns the id of the sum.
    pub fn eval_add(&mut self, a: u32, b: u32) -> Result<u32> {
        let mut payload = Vec::new();
        put_u32(&mut payload, a);
        put_u32(&mut payload, b);
        self.read_id(MsgType::EvalAdd, payload)
    }

    pub fn blind_dec(&mut self, ring: &RingContext, ids: &[u32]) -> Result<Vec<BlindedCiphertext>> {
        let mut payload = Vec::new();
        put_u32(&mut payload, ids.len() as u32);
        for &id in ids {
            put_u32(&mut payload, id);
        }
        let reply = self.request(MsgType::BlindDec, payload)?;
        let mut r = Reader::new(&reply);
        let n = r.u32()? as usize;
        if n != ids.len() {
            return Err(WireError::Malformed(format!(
                "{n} results for {} ids",
                ids.len()
            )));
        }
        let out = (0..n)
            .map(|_| read_blinded(&mut r, ring))
            .collect::<Result<Vec<_>>>()?;
        r.finish()?;
        Ok(out)
    }

    fn read_id(&mut self, msg_type: MsgType, payload: Vec<u8>) -> Result<u32> {
        let reply = self.request(msg_type, payload)?;
        let mut r = Reader::new(&reply);
        let id = r.u32()?;
        r.finish()?;
        Ok(id)
    }
}

/// Work for one session: ciphertexts to store, then additions over ids
/// (stored ciphertexts get ids `0..n`, sums continue from there).
#[derive(Clone, Debug, Default)]
pub struct SessionPlan {
    pub ciphertexts: Vec<Ciphertext>,
    pub additions: Vec<(u32, u32)>,
}

#[derive(Clone, Debug)]
pub struct SessionOutcome {
    /// Ids in the order stored or created.
    pub ids: Vec<u32>,
    /// Local decryption of every id.
    pub plaintexts: Vec<Plaintext>,
}

/// Runs SETUP, stores and adds per the plan, blind-decrypts every id and
/// finishes decryption locally.
pub fn client_session<S: Read + Write>(
    client: &mut Client<S>,
    params: &HeParams,
    sk: &SecretKey,
    pair: &BlindingKeyPair,
    plan: &SessionPlan,
) -> Result<SessionOutcome> {
    let ring = params.ring();
    client.setup(ring, sk, pair)?;
    let mut ids = Vec::with_capacity(plan.ciphertexts.len() + plan.additions.len());
    for ct in &plan.ciphertexts {
        ids.push(client.store_ct(ring, ct)?);
    }
    for &(a, b) in &plan.additions {
        ids.push(client.eval_add(a, b)?);
    }
    let blinded = client.blind_dec(ring, &ids)?;
    let plaintexts = blinded
        .iter()
        .map(|b| local_decrypt(params, pair, b))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(SessionOutcome { ids, plaintexts })
}
