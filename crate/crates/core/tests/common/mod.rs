#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

pub struct Reply {
    pub status: u16,
    pub body: String,
    pub delay: Duration,
}

impl Reply {
    pub fn ok(body: &str) -> Self {
        Reply { status: 200, body: body.to_string(), delay: Duration::ZERO }
    }

    pub fn status(status: u16) -> Self {
        Reply { status, body: String::new(), delay: Duration::ZERO }
    }

    pub fn slow(body: &str, delay: Duration) -> Self {
        Reply { status: 200, body: body.to_string(), delay }
    }
}

#[derive(Debug, Clone)]
pub struct SeenRequest {
    pub head: String,
    pub body: String,
}

/// Minimal HTTP/1.1 server answering successive connections with the given
/// replies, repeating the last one once the list runs out.
pub struct StubServer {
    pub url: String,
    pub seen: Arc<Mutex<Vec<SeenRequest>>>,
}

impl StubServer {
    pub fn start(replies: Vec<Reply>) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1/complete", listener.local_addr().unwrap());
        let seen = Arc::new(Mutex::new(Vec::new()));
        let log = Arc::clone(&seen);
        thread::spawn(move || {
            let mut replies = replies.into_iter().peekable();
            let mut last: Option<Reply> = None;
            for stream in listener.incoming() {
                let Ok(stream) = stream else { continue };
                let reply = match replies.next() {
                    Some(r) => r,
                    None => match &last {
                        Some(r) => Reply { status: r.status, body: r.body.clone(), delay: r.delay },
                        None => break,
                    },
                };
                if replies.peek().is_none() {
                    last = Some(Reply { status: reply.status, body: reply.body.clone(), delay: reply.delay });
                }
                let log = Arc::clone(&log);
                thread::spawn(move || serve(stream, reply, log));
            }
        });
        StubServer { url, seen }
    }

    pub fn requests(&self) -> Vec<SeenRequest> {
        self.seen.lock().unwrap().clone()
    }
}

fn serve(stream: TcpStream, reply: Reply, log: Arc<Mutex<Vec<SeenRequest>>>) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut head = String::new();
    let mut content_length = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
            break;
        }
        if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
            content_length = v.trim().parse().unwrap_or(0);
        }
        head.push_str(&line);
    }
    let mut body = vec![0u8; content_length];
    let _ = reader.read_exact(&mut body);
    log.lock().unwrap().push(SeenRequest { head, body: String::from_utf8_lossy(&body).into_owned() });
    thread::sleep(reply.delay);
    let mut stream = stream;
    let response = format!(
        "HTTP/1.1 {} Stub\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
        reply.status,
        reply.body.len(),
        reply.body
    );
    let _ = stream.write_all(response.as_bytes());
}

/// A local address with nothing listening on it.
pub fn dead_url() -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    format!("http://{addr}/")
}
