//! Framed sender/receiver protocol for key transport and ciphertext delivery.
//!
//! Frame layout (frozen, version 1):
//!
//! ```text
//! "BDEA" | 0x01 | type (1 byte) | payload length (u32 BE) | payload
//! ```
//!
//! A session is exactly `ClientHello → ServerHello → WrappedKeyBundle →
//! Ciphertext → Ack`. Any failure on the receiver side is answered with an
//! `Error` frame carrying a one-byte reason, and no plaintext is returned.
//!
//! Concurrency is thread-per-session (see [`serve`]); sessions share no
//! mutable state.

use std::fmt;
use std::io::{self, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::Arc;
use std::thread;

use thiserror::Error;

use crate::frame_split::crc32;
use crate::keyex::{dh_shared, unwrap_bundle, wrap_bundle, DhParams, KeyexError};
use crate::pipeline::{decrypt, encrypt, CipherContainer, KeyMaterial, Mode, PipelineError};

pub const FRAME_MAGIC: &[u8; 4] = b"BDEA";
pub const FRAME_VERSION: u8 = 0x01;
pub const FRAME_HEADER_LEN: usize = 10;
pub const MAX_PAYLOAD: u32 = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum FrameType {
    ClientHello = 1,
    ServerHello = 2,
    WrappedKeyBundle = 3,
    Ciphertext = 4,
    Ack = 5,
    Error = 6,
}

impl TryFrom<u8> for FrameType {
    type Error = NetError;

    fn try_from(v: u8) -> Result<Self, NetError> {
        Ok(match v {
            1 => FrameType::ClientHello,
            2 => FrameType::ServerHello,
            3 => FrameType::WrappedKeyBundle,
            4 => FrameType::Ciphertext,
            5 => FrameType::Ack,
            6 => FrameType::Error,
            other => return Err(NetError::UnknownFrameType(other)),
        })
    }
}

/// Reason byte carried by an `Error` frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorReason {
    Pollution,
    Crc,
    Malformed,
    Other(u8),
}

impl ErrorReason {
    pub fn code(self) -> u8 {
        match self {
            ErrorReason::Pollution => 1,
            ErrorReason::Crc => 2,
            ErrorReason::Malformed => 3,
            ErrorReason::Other(c) => c,
        }
    }

    pub fn from_code(c: u8) -> Self {
        match c {
            1 => ErrorReason::Pollution,
            2 => ErrorReason::Crc,
            3 => ErrorReason::Malformed,
            other => ErrorReason::Other(other),
        }
    }
}

impl fmt::Display for ErrorReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorReason::Pollution => f.write_str("biological pollution (wrong primers)"),
            ErrorReason::Crc => f.write_str("integrity check failed (wrong key)"),
            ErrorReason::Malformed => f.write_str("malformed message"),
            ErrorReason::Other(c) => write!(f, "unknown reason {c}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum NetError {
    #[error("transport closed")]
    TransportClosed,
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("bad frame magic")]
    BadMagic,
    #[error("unsupported frame version {0:#04x}")]
    BadVersion(u8),
    #[error("unknown frame type {0}")]
    UnknownFrameType(u8),
    #[error("frame payload of {0} bytes exceeds the {MAX_PAYLOAD}-byte cap")]
    FrameTooLarge(u64),
    #[error("expected {expected:?} frame, got {got:?}")]
    UnexpectedFrameType { expected: FrameType, got: FrameType },
    #[error("malformed {0:?} payload")]
    BadPayload(FrameType),
    #[error("peer reported error: {0}")]
    RemoteError(ErrorReason),
    #[error("ack CRC {got:#010x} does not match plaintext CRC {expected:#010x}")]
    AckMismatch { expected: u32, got: u32 },
    #[error(transparent)]
    Keyex(#[from] KeyexError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("paper-mode containers carry no integrity check and are not accepted")]
    UnsupportedMode,
}

impl NetError {
    /// Reason code the receiver reports for this local failure.
    pub fn reason(&self) -> ErrorReason {
        match self {
            NetError::Pipeline(e) if e.is_pollution() => ErrorReason::Pollution,
            NetError::Pipeline(e) if e.is_integrity() => ErrorReason::Crc,
            _ => ErrorReason::Malformed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub ftype: FrameType,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(ftype: FrameType, payload: Vec<u8>) -> Self {
        Self { ftype, payload }
    }

    pub fn encode(&self) -> Result<Vec<u8>, NetError> {
        if self.payload.len() as u64 > MAX_PAYLOAD as u64 {
            return Err(NetError::FrameTooLarge(self.payload.len() as u64));
        }
        let mut out = Vec::with_capacity(FRAME_HEADER_LEN + self.payload.len());
        out.extend_from_slice(FRAME_MAGIC);
        out.push(FRAME_VERSION);
        out.push(self.ftype as u8);
        out.extend_from_slice(&(self.payload.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.payload);
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, NetError> {
        let mut cursor = bytes;
        let frame = read_frame(&mut cursor)?;
        if !cursor.is_empty() {
            return Err(NetError::BadPayload(frame.ftype));
        }
        Ok(frame)
    }
}

fn map_eof(e: io::Error) -> NetError {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        NetError::TransportClosed
    } else {
        NetError::Io(e)
    }
}

pub fn write_frame<W: Write + ?Sized>(w: &mut W, frame: &Frame) -> Result<(), NetError> {
    let bytes = frame.encode()?;
    w.write_all(&bytes).map_err(map_eof)?;
    w.flush().map_err(map_eof)?;
    Ok(())
}

pub fn read_frame<R: Read + ?Sized>(r: &mut R) -> Result<Frame, NetError> {
    let mut header = [0u8; FRAME_HEADER_LEN];
    r.read_exact(&mut header).map_err(map_eof)?;
    if &header[..4] != FRAME_MAGIC {
        return Err(NetError::BadMagic);
    }
    if header[4] != FRAME_VERSION {
        return Err(NetError::BadVersion(header[4]));
    }
    let ftype = FrameType::try_from(header[5])?;
    let len = u32::from_be_bytes(header[6..10].try_into().unwrap());
    if len > MAX_PAYLOAD {
        return Err(NetError::FrameTooLarge(len as u64));
    }
    let mut payload = vec![0u8; len as usize];
    r.read_exact(&mut payload).map_err(map_eof)?;
    Ok(Frame { ftype, payload })
}

fn expect_frame<R: Read + ?Sized>(r: &mut R, expected: FrameType) -> Result<Vec<u8>, NetError> {
    let frame = read_frame(r)?;
    match frame.ftype {
        t if t == expected => Ok(frame.payload),
        FrameType::Error if frame.payload.len() == 1 => {
            Err(NetError::RemoteError(ErrorReason::from_code(frame.payload[0])))
        }
        FrameType::Error => Err(NetError::BadPayload(FrameType::Error)),
        got => Err(NetError::UnexpectedFrameType { expected, got }),
    }
}

fn u64_at(payload: &[u8], index: usize) -> u64 {
    u64::from_be_bytes(payload[8 * index..8 * index + 8].try_into().unwrap())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClientHello {
    pub p: u64,
    pub g: u64,
    pub public: u64,
}

impl ClientHello {
    pub fn to_payload(&self) -> Vec<u8> {
        [self.p, self.g, self.public]
            .iter()
            .flat_map(|v| v.to_be_bytes())
            .collect()
    }

    pub fn from_payload(payload: &[u8]) -> Result<Self, NetError> {
        if payload.len() != 24 {
            return Err(NetError::BadPayload(FrameType::ClientHello));
        }
        Ok(Self {
            p: u64_at(payload, 0),
            g: u64_at(payload, 1),
            public: u64_at(payload, 2),
        })
    }
}

/// Result of a completed sending session.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionOutcome {
    pub crc: u32,
}

/// Runs the sending side of one session over `transport`.
pub fn send_session<T: Read + Write>(
    transport: &mut T,
    plaintext: &[u8],
    km: &KeyMaterial,
    dh: &DhParams,
    seed: u64,
) -> Result<SessionOutcome, NetError> {
    let (container, bundle) = encrypt(plaintext, km)?;
    let ciphertext = Frame::new(FrameType::Ciphertext, container.to_bytes());
    if ciphertext.payload.len() as u64 > MAX_PAYLOAD as u64 {
        return Err(NetError::FrameTooLarge(ciphertext.payload.len() as u64));
    }

    let keys = dh.keypair_from_seed(seed);
    let hello = ClientHello {
        p: dh.p(),
        g: dh.g(),
        public: keys.public,
    };
    write_frame(transport, &Frame::new(FrameType::ClientHello, hello.to_payload()))?;

    let reply = expect_frame(transport, FrameType::ServerHello)?;
    if reply.len() != 8 {
        return abort(transport, NetError::BadPayload(FrameType::ServerHello));
    }
    let secret = match dh_shared(dh, keys.private, u64_at(&reply, 0)) {
        Ok(s) => s,
        Err(e) => return abort(transport, e.into()),
    };

    write_frame(
        transport,
        &Frame::new(FrameType::WrappedKeyBundle, wrap_bundle(&bundle, secret)),
    )?;
    write_frame(transport, &ciphertext)?;

    let ack = expect_frame(transport, FrameType::Ack)?;
    let expected = crc32(plaintext);
    if ack.len() != 4 {
        return Err(NetError::BadPayload(FrameType::Ack));
    }
    let got = u32::from_be_bytes(ack[..].try_into().unwrap());
    if got != expected {
        return Err(NetError::AckMismatch { expected, got });
    }
    Ok(SessionOutcome { crc: got })
}

/// Best-effort `Error` frame, then returns `err`.
fn abort<T: Write, V>(transport: &mut T, err: NetError) -> Result<V, NetError> {
    if !matches!(err, NetError::TransportClosed | NetError::Io(_)) {
        let frame = Frame::new(FrameType::Error, vec![err.reason().code()]);
        if let Err(e) = write_frame(transport, &frame) {
            log::debug!("could not deliver error frame: {e}");
        }
    }
    Err(err)
}

/// Runs the receiving side of one session and returns the recovered plaintext.
pub fn recv_session<T: Read + Write>(transport: &mut T, dh_seed: u64) -> Result<Vec<u8>, NetError> {
    let hello = match expect_frame(transport, FrameType::ClientHello).and_then(|p| ClientHello::from_payload(&p)) {
        Ok(h) => h,
        Err(e) => return abort(transport, e),
    };
    let params = match DhParams::new(hello.p, hello.g) {
        Ok(p) => p,
        Err(e) => return abort(transport, e.into()),
    };
    let keys = params.keypair_from_seed(dh_seed);
    let secret = match dh_shared(&params, keys.private, hello.public) {
        Ok(s) => s,
        Err(e) => return abort(transport, e.into()),
    };
    write_frame(
        transport,
        &Frame::new(FrameType::ServerHello, keys.public.to_be_bytes().to_vec()),
    )?;

    // Both frames are read before anything is validated, so the sender is never
    // left blocked mid-write when the receiver rejects the session.
    let frames = expect_frame(transport, FrameType::WrappedKeyBundle)
        .and_then(|bundle| Ok((bundle, expect_frame(transport, FrameType::Ciphertext)?)));
    let (wrapped, ciphertext) = match frames {
        Ok(f) => f,
        Err(e) => return abort(transport, e),
    };

    let opened = unwrap_bundle(&wrapped, secret)
        .map_err(NetError::from)
        .and_then(|bundle| {
            let container = CipherContainer::from_bytes(&ciphertext)?;
            if container.mode != Mode::Standard {
                return Err(NetError::UnsupportedMode);
            }
            Ok(decrypt(&container, &bundle)?)
        });
    let plaintext = match opened {
        Ok(p) => p,
        Err(e) => return abort(transport, e),
    };

    write_frame(
        transport,
        &Frame::new(FrameType::Ack, crc32(&plaintext).to_be_bytes().to_vec()),
    )?;
    Ok(plaintext)
}

/// Accepts connections and runs each session on its own thread.
///
/// `seed` fixes the receiver's DH exponent per session (`seed + session id`);
/// `None` draws fresh OS randomness. With `limit`, returns after that many
/// sessions have been accepted and finished.
pub fn serve<F>(listener: TcpListener, seed: Option<u64>, limit: Option<usize>, on_session: F) -> io::Result<()>
where
    F: Fn(u64, Result<Vec<u8>, NetError>) + Send + Sync + 'static,
{
    let on_session = Arc::new(on_session);
    let mut handles = Vec::new();
    for (id, stream) in listener.incoming().enumerate() {
        let mut stream: TcpStream = stream?;
        stream.set_nodelay(true)?;
        let id = id as u64;
        let session_seed = seed.map_or_else(rand::random, |s| s.wrapping_add(id));
        let on_session = Arc::clone(&on_session);
        handles.push(thread::spawn(move || {
            let result = recv_session(&mut stream, session_seed);
            on_session(id, result);
        }));
        if limit.is_some_and(|n| handles.len() >= n) {
            break;
        }
    }
    for h in handles {
        if h.join().is_err() {
            log::error!("session thread panicked");
        }
    }
    Ok(())
}
