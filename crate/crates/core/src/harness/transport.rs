//! Transports. All of them carry the same typed [`Message`]s: the direct
//! link calls the handler in place, the channel link hands each message to
//! its own thread, and the TCP link frames JSON with a 4-byte big-endian
//! length prefix, one request per connection.

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use serde::Serialize;

use super::message::Message;
use super::server::Handler;
use crate::error::{KaseError, Result};
use crate::format;

pub trait Link: Send + Sync {
    fn call(&self, msg: Message) -> Result<Message>;
}

/// Calls the handler on the caller's thread.
pub struct DirectLink(pub Arc<dyn Handler>);

impl Link for DirectLink {
    fn call(&self, msg: Message) -> Result<Message> {
        Ok(self.0.handle(msg))
    }
}

type Job = (Message, mpsc::Sender<Message>);

/// In-process channel to a dispatcher thread that runs each request on a
/// fresh thread, so a blocked request does not hold up the next one.
#[derive(Clone)]
pub struct ChannelLink {
    tx: mpsc::Sender<Job>,
}

impl ChannelLink {
    pub fn spawn(handler: Arc<dyn Handler>) -> Self {
        let (tx, rx) = mpsc::channel::<Job>();
        std::thread::spawn(move || {
            for (msg, reply) in rx {
                let h = Arc::clone(&handler);
                std::thread::spawn(move || {
                    let _ = reply.send(h.handle(msg));
                });
            }
        });
        ChannelLink { tx }
    }
}

impl Link for ChannelLink {
    fn call(&self, msg: Message) -> Result<Message> {
        let (rtx, rrx) = mpsc::channel();
        self.tx
            .send((msg, rtx))
            .map_err(|_| KaseError::protocol("channel server has stopped"))?;
        rrx.recv()
            .map_err(|_| KaseError::protocol("channel server dropped the request"))
    }
}

/// Largest accepted frame body.
pub const MAX_FRAME: usize = 1 << 28;

pub fn write_frame<W: Write, T: Serialize>(w: &mut W, msg: &T) -> Result<()> {
    let body = serde_json::to_vec(msg)?;
    if body.len() > MAX_FRAME {
        return Err(KaseError::protocol(format!("frame of {} bytes exceeds the limit", body.len())));
    }
    w.write_all(&(body.len() as u32).to_be_bytes())?;
    w.write_all(&body)?;
    w.flush()?;
    Ok(())
}

pub fn read_frame<R: Read>(r: &mut R) -> Result<Message> {
    let mut len = [0u8; 4];
    r.read_exact(&mut len)?;
    let len = u32::from_be_bytes(len) as usize;
    if len > MAX_FRAME {
        return Err(KaseError::protocol(format!("frame of {len} bytes exceeds the limit")));
    }
    let mut body = vec![0u8; len];
    r.read_exact(&mut body)?;
    let text = std::str::from_utf8(&body).map_err(|e| KaseError::format("<frame>", e.to_string()))?;
    format::from_str_with_path(text)
}

pub struct TcpLink {
    addr: SocketAddr,
    timeout: Duration,
}

impl TcpLink {
    pub fn new(addr: SocketAddr, timeout: Duration) -> Self {
        TcpLink { addr, timeout }
    }
}

impl Link for TcpLink {
    fn call(&self, msg: Message) -> Result<Message> {
        let mut s = TcpStream::connect_timeout(&self.addr, self.timeout)?;
        s.set_read_timeout(Some(self.timeout))?;
        s.set_nodelay(true)?;
        write_frame(&mut s, &msg)?;
        read_frame(&mut s).map_err(|e| match e {
            KaseError::Io(io) if matches!(io.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) => {
                KaseError::Timeout(format!("reply from {}", self.addr))
            }
            other => other,
        })
    }
}

/// A listening server; stops accepting when dropped.
pub struct TcpServer {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    accept: Option<JoinHandle<()>>,
}

impl TcpServer {
    pub fn bind(addr: &str, handler: Arc<dyn Handler>) -> Result<Self> {
        Self::serve(TcpListener::bind(addr)?, handler)
    }

    pub fn serve(listener: TcpListener, handler: Arc<dyn Handler>) -> Result<Self> {
        let addr = listener.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let flag = Arc::clone(&stop);
        let accept = std::thread::spawn(move || {
            for conn in listener.incoming() {
                if flag.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(mut conn) = conn else { continue };
                let h = Arc::clone(&handler);
                std::thread::spawn(move || {
                    let reply = match read_frame(&mut conn) {
                        Ok(msg) => h.handle(msg),
                        Err(e) => Message::error(None, &e),
                    };
                    let _ = write_frame(&mut conn, &reply);
                });
            }
        });
        Ok(TcpServer {
            addr,
            stop,
            accept: Some(accept),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Blocks for the lifetime of the server.
    pub fn wait(mut self) {
        if let Some(h) = self.accept.take() {
            let _ = h.join();
        }
    }

    pub fn shutdown(&mut self) {
        if let Some(h) = self.accept.take() {
            self.stop.store(true, Ordering::SeqCst);
            let _ = TcpStream::connect(self.addr);
            let _ = h.join();
        }
    }
}

impl Drop for TcpServer {
    fn drop(&mut self) {
        self.shutdown();
    }
}

/// Append-only log of every message crossing a recorded link.
#[derive(Clone, Default)]
pub struct Transcript(Arc<Mutex<Vec<TranscriptEntry>>>);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    User,
    Main,
    Aid,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TranscriptEntry {
    pub seq: u64,
    pub from: Role,
    pub to: Role,
    pub message: Message,
}

impl Transcript {
    pub fn record(&self, from: Role, to: Role, message: Message) {
        let mut log = self.0.lock().expect("transcript lock");
        let seq = log.len() as u64;
        log.push(TranscriptEntry { seq, from, to, message });
    }

    pub fn entries(&self) -> Vec<TranscriptEntry> {
        self.0.lock().expect("transcript lock").clone()
    }

    pub fn clear(&self) {
        self.0.lock().expect("transcript lock").clear();
    }
}

/// Records requests and replies passing through `inner`.
pub struct Recorded<L> {
    inner: L,
    transcript: Transcript,
    from: Role,
    to: Role,
}

impl<L: Link> Recorded<L> {
    pub fn new(inner: L, transcript: Transcript, from: Role, to: Role) -> Self {
        Recorded {
            inner,
            transcript,
            from,
            to,
        }
    }
}

impl<L: Link> Link for Recorded<L> {
    fn call(&self, msg: Message) -> Result<Message> {
        self.transcript.record(self.from, self.to, msg.clone());
        let reply = self.inner.call(msg)?;
        self.transcript.record(self.to, self.from, reply.clone());
        Ok(reply)
    }
}

impl Link for Arc<dyn Link> {
    fn call(&self, msg: Message) -> Result<Message> {
        (**self).call(msg)
    }
}
