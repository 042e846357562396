use std::collections::VecDeque;
use std::io::ErrorKind;
use std::net::{SocketAddr, UdpSocket};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc::{self, RecvTimeoutError};
use std::sync::{Arc, Condvar, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use socket2::{Domain, Protocol, Socket, Type};

use super::{deinterleave, CaptureError, CapturePacket, DropReport, Reassembler, Segment};
use crate::config::ValidatedConfig;
use crate::cube::DataCube;

#[derive(Debug, Clone)]
pub struct ListenOptions {
    /// Reassembly window (max tolerated out-of-order displacement).
    pub window: usize,
    /// Completed frames held for the consumer; the oldest is dropped when full.
    pub queue_capacity: usize,
    /// Silence after which a session ends and a partial frame is zero-filled.
    pub idle_flush: Duration,
    /// Requested SO_RCVBUF; the kernel may clamp it.
    pub recv_buffer_bytes: usize,
}

impl Default for ListenOptions {
    fn default() -> Self {
        Self {
            window: 64,
            queue_capacity: 16,
            idle_flush: Duration::from_millis(500),
            recv_buffer_bytes: 8 << 20,
        }
    }
}

/// A completed frame and the loss accounting of the bytes it covers.
#[derive(Debug, Clone)]
pub struct ListenedFrame {
    pub cube: DataCube,
    pub drops: DropReport,
}

#[derive(Debug, Default)]
struct Stats {
    finished: DropReport,
    current: DropReport,
    malformed: u64,
    errors: Vec<String>,
}

struct FrameQueue {
    items: Mutex<VecDeque<ListenedFrame>>,
    ready: Condvar,
    capacity: usize,
    overflows: AtomicU64,
}

impl FrameQueue {
    fn push(&self, frame: ListenedFrame) {
        let mut items = self.items.lock().unwrap();
        if items.len() >= self.capacity {
            items.pop_front();
            self.overflows.fetch_add(1, Ordering::Relaxed);
        }
        items.push_back(frame);
        self.ready.notify_one();
    }

    fn pop_timeout(&self, timeout: Duration) -> Option<ListenedFrame> {
        let items = self.items.lock().unwrap();
        let (mut items, _) = self
            .ready
            .wait_timeout_while(items, timeout, |q| q.is_empty())
            .unwrap();
        items.pop_front()
    }
}

/// Frame assembly for one stream that starts at seq 0, byte offset 0.
struct Session {
    cfg: ValidatedConfig,
    reassembler: Reassembler,
    buf: Vec<u8>,
    report: DropReport,
    trailing: DropReport,
    started: bool,
}

impl Session {
    fn new(cfg: ValidatedConfig, window: usize) -> Self {
        Self {
            cfg,
            reassembler: Reassembler::new(window),
            buf: Vec::with_capacity(cfg.frame_bytes()),
            report: DropReport::default(),
            trailing: DropReport::default(),
            started: false,
        }
    }

    fn total(&self) -> DropReport {
        let mut total = self.reassembler.report();
        total.merge(&self.trailing);
        total
    }

    fn push(
        &mut self,
        packet: CapturePacket,
        next_index: &mut u64,
        emit: &mut dyn FnMut(ListenedFrame),
    ) -> Result<(), CaptureError> {
        self.started = true;
        let segments = self.reassembler.push(packet)?;
        self.absorb(segments, next_index, emit)
    }

    /// Flushes held packets and zero-fills the rest of a partial frame.
    fn finish(
        &mut self,
        next_index: &mut u64,
        emit: &mut dyn FnMut(ListenedFrame),
    ) -> Result<(), CaptureError> {
        let segments = self.reassembler.flush()?;
        self.absorb(segments, next_index, emit)?;
        if !self.buf.is_empty() {
            let missing = (self.cfg.frame_bytes() - self.buf.len()) as u64;
            let nominal = self.reassembler.nominal_payload().max(1) as u64;
            let count = missing.div_ceil(nominal);
            self.trailing.packets_dropped += count;
            self.trailing.bytes_zero_filled += missing;
            let base = self.reassembler.next_seq();
            let segments = (0..count)
                .map(|i| Segment::Lost {
                    seq: base + i,
                    len: ((i + 1) * missing / count - i * missing / count) as usize,
                })
                .collect();
            self.absorb(segments, next_index, emit)?;
        }
        Ok(())
    }

    fn absorb(
        &mut self,
        segments: Vec<Segment>,
        next_index: &mut u64,
        emit: &mut dyn FnMut(ListenedFrame),
    ) -> Result<(), CaptureError> {
        let frame_bytes = self.cfg.frame_bytes();
        for segment in segments {
            let (mut remaining, lost, reordered) = match &segment {
                Segment::Data { payload, reordered, .. } => (payload.len(), false, *reordered),
                Segment::Lost { len, .. } => (*len, true, false),
            };
            let mut consumed = 0;
            // Every frame a packet touches counts it.
            let count = |report: &mut DropReport, n: usize| {
                if lost {
                    report.packets_dropped += 1;
                    report.bytes_zero_filled += n as u64;
                } else {
                    report.packets_received += 1;
                    report.reordered_count += reordered as u64;
                }
            };
            if remaining == 0 {
                count(&mut self.report, 0);
            }
            while remaining > 0 {
                let n = remaining.min(frame_bytes - self.buf.len());
                match &segment {
                    Segment::Data { payload, .. } => {
                        self.buf.extend_from_slice(&payload[consumed..consumed + n])
                    }
                    Segment::Lost { .. } => self.buf.resize(self.buf.len() + n, 0),
                }
                count(&mut self.report, n);
                consumed += n;
                remaining -= n;
                if self.buf.len() == frame_bytes {
                    let cube = deinterleave(&self.buf, &self.cfg, *next_index)?;
                    *next_index += 1;
                    emit(ListenedFrame {
                        cube,
                        drops: std::mem::take(&mut self.report),
                    });
                    self.buf.clear();
                }
            }
        }
        Ok(())
    }
}

/// Live UDP capture: datagrams are reassembled into frames on a background
/// thread and delivered through a bounded drop-oldest queue.
pub struct Listener {
    local_addr: SocketAddr,
    queue: Arc<FrameQueue>,
    stats: Arc<Mutex<Stats>>,
    stop: Arc<AtomicBool>,
    threads: Vec<JoinHandle<()>>,
}

pub fn listen(
    addr: SocketAddr,
    cfg: ValidatedConfig,
    opts: ListenOptions,
) -> Result<Listener, CaptureError> {
    assert!(opts.window >= 1 && opts.queue_capacity >= 1);
    let bind_err = |source| CaptureError::Bind {
        addr: addr.to_string(),
        source,
    };
    let socket = Socket::new(Domain::for_address(addr), Type::DGRAM, Some(Protocol::UDP))
        .map_err(bind_err)?;
    // Best effort; the kernel clamps to its own maximum.
    let _ = socket.set_recv_buffer_size(opts.recv_buffer_bytes);
    socket.bind(&addr.into()).map_err(bind_err)?;
    let socket: UdpSocket = socket.into();
    socket.set_read_timeout(Some(Duration::from_millis(20)))?;
    let local_addr = socket.local_addr()?;

    let queue = Arc::new(FrameQueue {
        items: Mutex::new(VecDeque::new()),
        ready: Condvar::new(),
        capacity: opts.queue_capacity,
        overflows: AtomicU64::new(0),
    });
    let stats = Arc::new(Mutex::new(Stats::default()));
    let stop = Arc::new(AtomicBool::new(false));
    let (tx, rx) = mpsc::channel::<CapturePacket>();

    let receiver = {
        let stop = Arc::clone(&stop);
        let stats = Arc::clone(&stats);
        thread::Builder::new()
            .name("udp-recv".into())
            .spawn(move || {
                let mut buf = vec![0u8; 65536];
                while !stop.load(Ordering::Relaxed) {
                    match socket.recv_from(&mut buf) {
                        Ok((n, _)) => match CapturePacket::decode(&buf[..n]) {
                            Ok(packet) => {
                                if tx.send(packet).is_err() {
                                    break;
                                }
                            }
                            Err(_) => stats.lock().unwrap().malformed += 1,
                        },
                        Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {}
                        Err(e) if e.kind() == ErrorKind::Interrupted => {}
                        Err(e) => {
                            stats.lock().unwrap().errors.push(e.to_string());
                            thread::sleep(Duration::from_millis(5));
                        }
                    }
                }
            })?
    };

    let assembler = {
        let queue = Arc::clone(&queue);
        let stats = Arc::clone(&stats);
        thread::Builder::new()
            .name("frame-assemble".into())
            .spawn(move || {
                let mut next_index = 0u64;
                let mut session = Session::new(cfg, opts.window);
                let mut emit = |frame: ListenedFrame| queue.push(frame);
                let end_session = |session: &mut Session, next_index: &mut u64, emit: &mut dyn FnMut(ListenedFrame)| {
                    let result = session.finish(next_index, emit);
                    let mut s = stats.lock().unwrap();
                    if let Err(e) = result {
                        s.errors.push(e.to_string());
                    }
                    let total = session.total();
                    s.finished.merge(&total);
                    s.current = DropReport::default();
                    drop(s);
                    *session = Session::new(cfg, opts.window);
                };
                loop {
                    match rx.recv_timeout(opts.idle_flush) {
                        Ok(packet) => {
                            let result = session.push(packet, &mut next_index, &mut emit);
                            match result {
                                Ok(()) => stats.lock().unwrap().current = session.total(),
                                Err(e) => {
                                    stats.lock().unwrap().errors.push(e.to_string());
                                    end_session(&mut session, &mut next_index, &mut emit);
                                }
                            }
                        }
                        Err(RecvTimeoutError::Timeout) => {
                            if session.started {
                                end_session(&mut session, &mut next_index, &mut emit);
                            }
                        }
                        Err(RecvTimeoutError::Disconnected) => {
                            if session.started {
                                end_session(&mut session, &mut next_index, &mut emit);
                            }
                            break;
                        }
                    }
                }
            })?
    };

    Ok(Listener {
        local_addr,
        queue,
        stats,
        stop,
        threads: vec![receiver, assembler],
    })
}

impl Listener {
    pub fn local_addr(&self) -> SocketAddr {
        self.local_addr
    }

    /// Next completed frame, in stream order.
    pub fn recv_timeout(&self, timeout: Duration) -> Option<ListenedFrame> {
        self.queue.pop_timeout(timeout)
    }

    /// Frames discarded because the consumer fell behind.
    pub fn queue_overflows(&self) -> u64 {
        self.queue.overflows.load(Ordering::Relaxed)
    }

    /// Stream-level accounting over all sessions so far.
    pub fn totals(&self) -> DropReport {
        let s = self.stats.lock().unwrap();
        let mut total = s.finished;
        total.merge(&s.current);
        total
    }

    pub fn malformed_datagrams(&self) -> u64 {
        self.stats.lock().unwrap().malformed
    }

    pub fn errors(&self) -> Vec<String> {
        self.stats.lock().unwrap().errors.clone()
    }

    /// Stops both threads; any partial frame is flushed first.
    pub fn shutdown(mut self) {
        self.stop_threads();
    }

    fn stop_threads(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        for handle in self.threads.drain(..) {
            let _ = handle.join();
        }
    }
}

impl Drop for Listener {
    fn drop(&mut self) {
        self.stop_threads();
    }
}
