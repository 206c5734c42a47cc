//! Frame-level man-in-the-middle relay for session tests.

use std::net::{Shutdown, TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;

use bdea_core::netproto::{read_frame, write_frame, Frame, FrameType, NetError, SessionOutcome};
use bdea_core::{recv_session, send_session, DhParams, KeyMaterial};

/// XOR `mask` into byte `index` of the first frame of type `ftype`.
#[derive(Debug, Clone, Copy)]
pub struct Tamper {
    pub ftype: FrameType,
    pub index: usize,
    pub mask: u8,
}

pub struct SessionRun {
    pub sent: Result<SessionOutcome, NetError>,
    pub received: Result<Vec<u8>, NetError>,
    /// Every frame as it left the relay, in arrival order per direction.
    pub frames: Vec<Frame>,
}

impl SessionRun {
    pub fn saw_error_frame(&self) -> bool {
        self.frames.iter().any(|f| f.ftype == FrameType::Error)
    }

    pub fn frame(&self, ftype: FrameType) -> Option<&Frame> {
        self.frames.iter().find(|f| f.ftype == ftype)
    }
}

fn forward(
    mut from: TcpStream,
    mut to: TcpStream,
    tamper: Option<Tamper>,
    log: Arc<Mutex<Vec<Frame>>>,
) {
    let mut pending = tamper;
    while let Ok(mut frame) = read_frame(&mut from) {
        if let Some(t) = pending {
            if t.ftype == frame.ftype && t.index < frame.payload.len() {
                frame.payload[t.index] ^= t.mask;
                pending = None;
            }
        }
        log.lock().unwrap().push(frame.clone());
        if write_frame(&mut to, &frame).is_err() {
            break;
        }
    }
    let _ = to.shutdown(Shutdown::Write);
    let _ = from.shutdown(Shutdown::Read);
}

/// Runs one sender/receiver session over local TCP with a relay in between.
pub fn run_session(
    plain: &[u8],
    km: &KeyMaterial,
    dh: &DhParams,
    sender_seed: u64,
    receiver_seed: u64,
    tamper: Option<Tamper>,
) -> SessionRun {
    let receiver_listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let receiver_addr = receiver_listener.local_addr().unwrap();
    let receiver = thread::spawn(move || {
        let (mut stream, _) = receiver_listener.accept().unwrap();
        stream.set_nodelay(true).unwrap();
        recv_session(&mut stream, receiver_seed)
    });

    let relay_listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let relay_addr = relay_listener.local_addr().unwrap();
    let log = Arc::new(Mutex::new(Vec::new()));
    let relay_log = Arc::clone(&log);
    let relay = thread::spawn(move || {
        let (client, _) = relay_listener.accept().unwrap();
        let server = TcpStream::connect(receiver_addr).unwrap();
        client.set_nodelay(true).unwrap();
        server.set_nodelay(true).unwrap();
        let up = {
            let (c, s, l) = (client.try_clone().unwrap(), server.try_clone().unwrap(), Arc::clone(&relay_log));
            thread::spawn(move || forward(c, s, tamper, l))
        };
        forward(server, client, tamper, relay_log);
        up.join().unwrap();
    });

    let mut stream = TcpStream::connect(relay_addr).unwrap();
    stream.set_nodelay(true).unwrap();
    let sent = send_session(&mut stream, plain, km, dh, sender_seed);
    drop(stream);
    let received = receiver.join().unwrap();
    relay.join().unwrap();
    let frames = Arc::try_unwrap(log).unwrap().into_inner().unwrap();
    SessionRun { sent, received, frames }
}
