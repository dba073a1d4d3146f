//! Drives the daemon loop in-process over channels.

use std::io::{self, BufReader, Read, Write};
use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use psv::session::{daemon::serve, Options};
use serde_json::Value;

struct ChanReader {
    rx: Receiver<String>,
    buf: Vec<u8>,
    pos: usize,
}

impl Read for ChanReader {
    fn read(&mut self, out: &mut [u8]) -> io::Result<usize> {
        if self.pos == self.buf.len() {
            match self.rx.recv() {
                Ok(line) => {
                    self.buf = line.into_bytes();
                    self.buf.push(b'\n');
                    self.pos = 0;
                }
                Err(_) => return Ok(0),
            }
        }
        let n = out.len().min(self.buf.len() - self.pos);
        out[..n].copy_from_slice(&self.buf[self.pos..self.pos + n]);
        self.pos += n;
        Ok(n)
    }
}

#[derive(Clone, Default)]
struct SharedOut(Arc<Mutex<Vec<u8>>>);

impl Write for SharedOut {
    fn write(&mut self, b: &[u8]) -> io::Result<usize> {
        self.0.lock().unwrap().extend_from_slice(b);
        Ok(b.len())
    }
    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

pub struct Daemon {
    tx: Option<Sender<String>>,
    out: SharedOut,
    handle: Option<JoinHandle<()>>,
}

impl Daemon {
    pub fn start(options: Options) -> Daemon {
        let (tx, rx) = channel();
        let out = SharedOut::default();
        let o = out.clone();
        let handle = std::thread::Builder::new()
            .stack_size(psv::session::STACK_SIZE)
            .spawn(move || {
                serve(BufReader::new(ChanReader { rx, buf: Vec::new(), pos: 0 }), o, options);
            })
            .unwrap();
        Daemon {
            tx: Some(tx),
            out,
            handle: Some(handle),
        }
    }

    pub fn send_raw(&self, line: &str) {
        self.tx.as_ref().unwrap().send(line.to_string()).unwrap();
    }

    pub fn send(&self, v: &Value) {
        self.send_raw(&v.to_string());
    }

    /// Responses received so far, in arrival order.
    pub fn responses(&self) -> Vec<Value> {
        let bytes = self.out.0.lock().unwrap().clone();
        String::from_utf8(bytes)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap_or_else(|e| panic!("bad response line {l}: {e}")))
            .collect()
    }

    pub fn wait_for(&self, id: u64, timeout: Duration) -> Value {
        let start = Instant::now();
        loop {
            if let Some(r) = self.responses().into_iter().find(|r| r["id"] == id) {
                return r;
            }
            assert!(start.elapsed() < timeout, "no response for {id}");
            std::thread::sleep(Duration::from_millis(2));
        }
    }

    /// Closes the input and waits for the loop to finish.
    pub fn finish(mut self) -> Vec<Value> {
        self.tx.take();
        self.handle.take().unwrap().join().unwrap();
        self.responses()
    }
}
