//! In-process mock scoring server for tests and local smoke runs.
//!
//! Speaks just enough HTTP/1.1 for the client: reads one POST with a
//! Content-Length body, answers with a canned behavior, closes.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

/// How the mock answers one request.
#[derive(Debug, Clone)]
pub enum MockBehavior {
    /// 200 with a well-formed body.
    Ok { mos: f64, model_id: String },
    /// 200 with unparseable JSON.
    MalformedJson,
    /// 200 with a JSON object missing required fields.
    MissingFields,
    /// The given HTTP status with an empty JSON object.
    Status(u16),
    /// Sleep before answering; long enough sleeps trip client timeouts.
    DelayMs(u64, f64),
}

/// Mock server that cycles through its behaviors, one per request.
pub struct MockMosServer {
    address: String,
    served: Arc<AtomicUsize>,
    shutdown: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl MockMosServer {
    /// Binds 127.0.0.1 on an ephemeral port and serves in a background
    /// thread. `behaviors[i % len]` answers the i-th request.
    pub fn start(behaviors: Vec<MockBehavior>) -> std::io::Result<Self> {
        assert!(!behaviors.is_empty(), "need at least one behavior");
        let listener = TcpListener::bind("127.0.0.1:0")?;
        listener.set_nonblocking(true)?;
        let address = format!("http://{}", listener.local_addr()?);
        let served = Arc::new(AtomicUsize::new(0));
        let shutdown = Arc::new(AtomicBool::new(false));

        let thread_served = served.clone();
        let thread_shutdown = shutdown.clone();
        let handle = std::thread::spawn(move || {
            while !thread_shutdown.load(Ordering::SeqCst) {
                match listener.accept() {
                    Ok((stream, _)) => {
                        let n = thread_served.fetch_add(1, Ordering::SeqCst);
                        let behavior = behaviors[n % behaviors.len()].clone();
                        // serve concurrently so delayed responses do not
                        // block the accept loop
                        std::thread::spawn(move || serve_one(stream, behavior));
                    }
                    Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                        std::thread::sleep(Duration::from_millis(2));
                    }
                    Err(_) => break,
                }
            }
        });

        Ok(MockMosServer {
            address,
            served,
            shutdown,
            handle: Some(handle),
        })
    }

    /// Base endpoint URL (no trailing slash).
    pub fn endpoint(&self) -> &str {
        &self.address
    }

    pub fn requests_served(&self) -> usize {
        self.served.load(Ordering::SeqCst)
    }
}

impl Drop for MockMosServer {
    fn drop(&mut self) {
        self.shutdown.store(true, Ordering::SeqCst);
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

fn serve_one(stream: TcpStream, behavior: MockBehavior) {
    let _ = stream.set_nodelay(true);
    let mut reader = BufReader::new(stream);

    // request line + headers
    let mut line = String::new();
    if reader.read_line(&mut line).is_err() {
        return;
    }
    let mut content_length = 0usize;
    loop {
        let mut header = String::new();
        match reader.read_line(&mut header) {
            Ok(0) => return,
            Ok(_) => {
                let header = header.trim();
                if header.is_empty() {
                    break;
                }
                if let Some(v) = header
                    .to_ascii_lowercase()
                    .strip_prefix("content-length:")
                    .map(str::trim)
                {
                    content_length = v.parse().unwrap_or(0);
                }
            }
            Err(_) => return,
        }
    }
    let mut body = vec![0u8; content_length];
    if reader.read_exact(&mut body).is_err() {
        return;
    }

    let (status, payload) = match behavior {
        MockBehavior::Ok { mos, model_id } => (
            200,
            format!("{{\"mos\": {mos}, \"model_id\": \"{model_id}\"}}"),
        ),
        MockBehavior::MalformedJson => (200, "{not json at all".to_string()),
        MockBehavior::MissingFields => (200, "{\"score\": 3.0}".to_string()),
        MockBehavior::Status(code) => (code, "{}".to_string()),
        MockBehavior::DelayMs(ms, mos) => {
            std::thread::sleep(Duration::from_millis(ms));
            (200, format!("{{\"mos\": {mos}, \"model_id\": \"slow\"}}"))
        }
    };

    let reason = if status == 200 { "OK" } else { "Error" };
    let response = format!(
        "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
        payload.len()
    );
    let mut stream = reader.into_inner();
    let _ = stream.write_all(response.as_bytes());
    let _ = stream.flush();
}
