//! In-process chat-completions stub for tests.

#![allow(dead_code)]

pub mod oracle;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use serde_json::{json, Value};

/// Decides the reply for a request: (status, body).
pub type Responder = dyn Fn(&Value) -> (u16, String) + Send + Sync;

#[derive(Debug, Clone)]
pub struct Captured {
    pub payload: Value,
    pub authorization: Option<String>,
}

#[derive(Default)]
struct Stats {
    requests: AtomicUsize,
    in_flight: AtomicUsize,
    max_in_flight: AtomicUsize,
    captured: Mutex<Vec<Captured>>,
}

pub struct StubServer {
    pub url: String,
    server: Arc<tiny_http::Server>,
    stats: Arc<Stats>,
    workers: usize,
}

pub fn chat_body(text: &str) -> String {
    json!({
        "id": "stub",
        "object": "chat.completion",
        "choices": [{ "index": 0, "message": { "role": "assistant", "content": text }, "finish_reason": "stop" }]
    })
    .to_string()
}

/// Always answers with `text`.
pub fn canned(text: &'static str) -> Box<Responder> {
    Box::new(move |_| (200, chat_body(text)))
}

impl StubServer {
    /// Starts a server that handles up to `workers` requests at a time, each
    /// held for `delay` so overlap is observable.
    pub fn start(responder: Box<Responder>, workers: usize, delay: Duration) -> StubServer {
        let server = Arc::new(tiny_http::Server::http("127.0.0.1:0").expect("bind stub"));
        let port = server.server_addr().to_ip().expect("ip listener").port();
        let stats = Arc::new(Stats::default());
        let responder: Arc<Responder> = Arc::from(responder);
        for _ in 0..workers {
            let server = Arc::clone(&server);
            let stats = Arc::clone(&stats);
            let responder = Arc::clone(&responder);
            thread::spawn(move || {
                while let Ok(mut req) = server.recv() {
                    let now = stats.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
                    stats.max_in_flight.fetch_max(now, Ordering::SeqCst);
                    stats.requests.fetch_add(1, Ordering::SeqCst);

                    let mut body = String::new();
                    let _ = req.as_reader().read_to_string(&mut body);
                    let payload: Value = serde_json::from_str(&body).unwrap_or(Value::Null);
                    let authorization = req
                        .headers()
                        .iter()
                        .find(|h| h.field.equiv("Authorization"))
                        .map(|h| h.value.as_str().to_string());
                    stats.captured.lock().unwrap().push(Captured {
                        payload: payload.clone(),
                        authorization,
                    });

                    thread::sleep(delay);
                    let (status, reply) = responder(&payload);
                    stats.in_flight.fetch_sub(1, Ordering::SeqCst);
                    let header =
                        tiny_http::Header::from_bytes("Content-Type", "application/json").unwrap();
                    let response = tiny_http::Response::from_string(reply)
                        .with_status_code(status)
                        .with_header(header);
                    let _ = req.respond(response);
                }
            });
        }
        StubServer {
            url: format!("http://127.0.0.1:{port}/v1"),
            server,
            stats,
            workers,
        }
    }

    pub fn simple(responder: Box<Responder>) -> StubServer {
        StubServer::start(responder, 8, Duration::ZERO)
    }

    pub fn requests(&self) -> usize {
        self.stats.requests.load(Ordering::SeqCst)
    }

    pub fn max_in_flight(&self) -> usize {
        self.stats.max_in_flight.load(Ordering::SeqCst)
    }

    pub fn captured(&self) -> Vec<Captured> {
        self.stats.captured.lock().unwrap().clone()
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        // each call releases one worker blocked in recv()
        for _ in 0..self.workers {
            self.server.unblock();
        }
    }
}

/// A URL on which nothing is listening.
pub fn dead_url() -> String {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = listener.local_addr().unwrap().port();
    drop(listener);
    format!("http://127.0.0.1:{port}/v1")
}

/// The user segment of a captured payload.
pub fn user_text(payload: &Value) -> &str {
    payload["messages"][1]["content"]
        .as_str()
        .unwrap_or_default()
}

pub fn system_text(payload: &Value) -> &str {
    payload["messages"][0]["content"]
        .as_str()
        .unwrap_or_default()
}
