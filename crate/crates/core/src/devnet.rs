//! Computing devices: builtins, HTTP endpoints and a stub device server.
//!
//! Wire protocol: a device is called with `POST` and a JSON body
//! `{"args": [{"type": .., "value": .., "label": ..}, ...]}`. A successful
//! response is a single typed value with status 200; failures use a 4xx/5xx
//! status and `{"error": "..."}`.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::OnceLock;
use std::thread::JoinHandle;
use std::time::Duration;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value as Json};
use thiserror::Error;
use url::Url;

use crate::computon::DeviceId;
use crate::value::Value;

/// Environment variable holding the HTTP device timeout in milliseconds.
pub const TIMEOUT_ENV: &str = "COMPUTON_DEVICE_TIMEOUT_MS";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(5);
pub const BUILTINS: [&str; 6] = ["epsilon", "mul", "add", "succ", "pred", "fact"];

/// A device argument: the value of one argument port and its label.
#[derive(Debug, Clone, PartialEq)]
pub struct Arg {
    pub label: String,
    pub value: Value,
}

impl Arg {
    pub fn new(label: impl Into<String>, value: Value) -> Self {
        Arg {
            label: label.into(),
            value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeviceError {
    #[error("unknown device `{0}`")]
    Unknown(String),
    #[error("device `{device}` rejected its arguments: {message}")]
    BadArguments { device: String, message: String },
    #[error("device at {url} timed out")]
    Timeout { url: String },
    #[error("cannot reach device at {url}: {message}")]
    Network { url: String, message: String },
    #[error("device at {url} answered {status}: {message}")]
    Status {
        url: String,
        status: u16,
        message: String,
    },
    #[error("malformed response from {url}: {message}")]
    MalformedResponse { url: String, message: String },
}

/// Anything that can evaluate devices.
pub trait Devices: Sync {
    fn invoke(&self, id: &DeviceId, args: &[Arg]) -> Result<Value, DeviceError>;

    /// Whether calls to `id` leave the process.
    fn is_remote(&self, id: &DeviceId) -> bool {
        id.is_remote()
    }
}

fn bad(device: &str, message: impl Into<String>) -> DeviceError {
    DeviceError::BadArguments {
        device: device.to_owned(),
        message: message.into(),
    }
}

fn one_integer<'a>(name: &str, args: &'a [Arg]) -> Result<&'a BigInt, DeviceError> {
    match args {
        [Arg {
            value: Value::Integer(n),
            ..
        }] => Ok(n),
        _ => Err(bad(
            name,
            format!("expected one integer, got {}", show(args)),
        )),
    }
}

fn show(args: &[Arg]) -> String {
    let parts: Vec<String> = args.iter().map(|a| a.value.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Integer(n) => n.to_f64(),
        Value::Float(x) => Some(*x),
        _ => None,
    }
}

/// Evaluates a builtin device by name.
pub fn builtin(name: &str, args: &[Arg]) -> Result<Value, DeviceError> {
    match name {
        "epsilon" => {
            if !args.is_empty() && args.iter().all(|a| a.value == Value::Control) {
                Ok(Value::Control)
            } else {
                Err(bad(
                    name,
                    format!("expected control signals, got {}", show(args)),
                ))
            }
        }
        "mul" | "add" => {
            let [a, b] = args else {
                return Err(bad(
                    name,
                    format!("expected two numbers, got {}", show(args)),
                ));
            };
            match (&a.value, &b.value) {
                (Value::Integer(x), Value::Integer(y)) => {
                    Ok(Value::Integer(if name == "mul" { x * y } else { x + y }))
                }
                (x, y) => match (as_f64(x), as_f64(y)) {
                    (Some(x), Some(y)) => {
                        Ok(Value::Float(if name == "mul" { x * y } else { x + y }))
                    }
                    _ => Err(bad(
                        name,
                        format!("expected two numbers, got {}", show(args)),
                    )),
                },
            }
        }
        "succ" => Ok(Value::Integer(one_integer(name, args)? + 1)),
        "pred" => {
            let n = one_integer(name, args)?;
            Ok(Value::Integer(if n.is_positive() {
                n - 1
            } else {
                BigInt::zero()
            }))
        }
        "fact" => {
            let n = one_integer(name, args)?;
            let k = n
                .to_u32()
                .filter(|&k| k <= 20)
                .ok_or_else(|| bad(name, format!("defined for 0 <= n <= 20, got {n}")))?;
            let mut acc = BigInt::one();
            for i in 2..=k {
                acc *= i;
            }
            Ok(Value::Integer(acc))
        }
        _ => Err(DeviceError::Unknown(format!("builtin:{name}"))),
    }
}

/// Resolves device ids to builtins or HTTP endpoints.
#[derive(Debug)]
pub struct DeviceRegistry {
    endpoints: HashMap<DeviceId, Url>,
    timeout: Duration,
    retries: u32,
    client: OnceLock<Result<reqwest::blocking::Client, String>>,
}

impl Default for DeviceRegistry {
    fn default() -> Self {
        DeviceRegistry::new()
    }
}

impl DeviceRegistry {
    /// Builtins only; the HTTP timeout comes from the environment when set.
    pub fn new() -> Self {
        let timeout = std::env::var(TIMEOUT_ENV)
            .ok()
            .and_then(|s| s.parse::<u64>().ok())
            .map(Duration::from_millis)
            .unwrap_or(DEFAULT_TIMEOUT);
        DeviceRegistry {
            endpoints: HashMap::new(),
            timeout,
            retries: 1,
            client: OnceLock::new(),
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn with_retries(mut self, retries: u32) -> Self {
        self.retries = retries;
        self
    }

    /// Sends calls to `id` to `url` instead.
    pub fn with_endpoint(mut self, id: DeviceId, url: Url) -> Self {
        self.endpoints.insert(id, url);
        self
    }

    /// Routes every builtin to `<base>/devices/<name>`.
    pub fn with_remote_builtins(mut self, base: &Url) -> Result<Self, url::ParseError> {
        for name in BUILTINS {
            let url = base.join(&format!("devices/{name}"))?;
            self.endpoints.insert(DeviceId::builtin(name), url);
        }
        Ok(self)
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    fn client(&self) -> Result<&reqwest::blocking::Client, DeviceError> {
        self.client
            .get_or_init(|| {
                reqwest::blocking::Client::builder()
                    .timeout(self.timeout)
                    .build()
                    .map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(|e| DeviceError::Network {
                url: String::new(),
                message: e.clone(),
            })
    }

    fn call_http(&self, url: &Url, args: &[Arg]) -> Result<Value, DeviceError> {
        let body = encode_args(args).map_err(|message| DeviceError::BadArguments {
            device: url.to_string(),
            message,
        })?;
        let mut attempt = 0;
        loop {
            match self.post_once(url, &body) {
                Err(DeviceError::Timeout { .. } | DeviceError::Network { .. })
                    if attempt < self.retries =>
                {
                    attempt += 1;
                    log::warn!("retrying device call to {url} (attempt {})", attempt + 1);
                }
                other => return other,
            }
        }
    }

    fn post_once(&self, url: &Url, body: &Json) -> Result<Value, DeviceError> {
        let u = url.to_string();
        let resp = self
            .client()?
            .post(url.clone())
            .json(body)
            .send()
            .map_err(|e| {
                if e.is_timeout() {
                    DeviceError::Timeout { url: u.clone() }
                } else {
                    DeviceError::Network {
                        url: u.clone(),
                        message: e.to_string(),
                    }
                }
            })?;
        let status = resp.status();
        let text = resp.text().map_err(|e| {
            if e.is_timeout() {
                DeviceError::Timeout { url: u.clone() }
            } else {
                DeviceError::Network {
                    url: u.clone(),
                    message: e.to_string(),
                }
            }
        })?;
        let parsed: Result<Json, _> = serde_json::from_str(&text);
        if !status.is_success() {
            let message = parsed
                .ok()
                .and_then(|j| j.get("error").and_then(Json::as_str).map(str::to_owned))
                .unwrap_or(text);
            return Err(DeviceError::Status {
                url: u,
                status: status.as_u16(),
                message,
            });
        }
        let json = parsed.map_err(|e| DeviceError::MalformedResponse {
            url: u.clone(),
            message: e.to_string(),
        })?;
        Value::from_typed_json(&json).map_err(|e| DeviceError::MalformedResponse {
            url: u,
            message: e.to_string(),
        })
    }
}

impl Devices for DeviceRegistry {
    fn is_remote(&self, id: &DeviceId) -> bool {
        id.is_remote() || self.endpoints.contains_key(id)
    }

    fn invoke(&self, id: &DeviceId, args: &[Arg]) -> Result<Value, DeviceError> {
        if let Some(url) = self.endpoints.get(id) {
            return self.call_http(url, args);
        }
        match id.builtin_name() {
            Some(name) => builtin(name, args),
            None => {
                let url =
                    Url::parse(id.as_str()).map_err(|_| DeviceError::Unknown(id.to_string()))?;
                self.call_http(&url, args)
            }
        }
    }
}

/// Request body for a device call.
pub fn encode_args(args: &[Arg]) -> Result<Json, String> {
    let list = args
        .iter()
        .map(|a| a.value.to_typed_json(Some(&a.label)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    Ok(json!({ "args": list }))
}

/// Arguments of a request body.
pub fn decode_args(body: &Json) -> Result<Vec<Arg>, String> {
    let list = body
        .get("args")
        .and_then(Json::as_array)
        .ok_or("request body must be an object with an `args` array")?;
    list.iter()
        .map(|j| {
            let value = if j.get("type").is_some() {
                Value::from_typed_json(j).map_err(|e| e.to_string())?
            } else if j.get("control") == Some(&Json::Bool(true)) {
                Value::Control
            } else {
                return Err(format!("untyped argument {j}"));
            };
            let label = j.get("label").and_then(Json::as_str).unwrap_or_default();
            Ok(Arg::new(label, value))
        })
        .collect()
}

/// A running HTTP server exposing the builtins at `/devices/<name>`.
pub struct StubServer {
    addr: SocketAddr,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl StubServer {
    /// Binds `127.0.0.1:<port>`; port 0 picks a free port.
    pub fn start(port: u16) -> std::io::Result<StubServer> {
        StubServer::start_on(SocketAddr::from(([127, 0, 0, 1], port)))
    }

    pub fn start_on(addr: SocketAddr) -> std::io::Result<StubServer> {
        let listener = std::net::TcpListener::bind(addr)?;
        listener.set_nonblocking(true)?;
        let addr = listener.local_addr()?;
        let runtime = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()?;
        let (tx, rx) = tokio::sync::oneshot::channel::<()>();
        let (ready_tx, ready_rx) = std::sync::mpsc::channel();
        let thread = std::thread::spawn(move || {
            runtime.block_on(async move {
                let listener = match tokio::net::TcpListener::from_std(listener) {
                    Ok(l) => {
                        let _ = ready_tx.send(Ok(()));
                        l
                    }
                    Err(e) => {
                        let _ = ready_tx.send(Err(e));
                        return;
                    }
                };
                let app = stub_router();
                let served = axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = rx.await;
                    })
                    .await;
                if let Err(e) = served {
                    log::error!("stub device server failed: {e}");
                }
            });
        });
        ready_rx
            .recv()
            .map_err(|e| std::io::Error::other(e.to_string()))??;
        Ok(StubServer {
            addr,
            shutdown: Some(tx),
            thread: Some(thread),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// `http://127.0.0.1:<port>/`
    pub fn base_url(&self) -> Url {
        Url::parse(&format!("http://{}/", self.addr)).expect("socket address forms a URL")
    }

    pub fn device_url(&self, name: &str) -> Url {
        self.base_url()
            .join(&format!("devices/{name}"))
            .expect("device path forms a URL")
    }

    /// Stops accepting connections and waits for the server thread.
    pub fn shutdown(mut self) {
        self.stop();
    }

    /// Blocks until the server stops.
    pub fn wait(mut self) {
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }

    fn stop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        self.stop();
    }
}

fn stub_router() -> axum::Router {
    use axum::extract::Path;
    use axum::http::StatusCode;
    use axum::routing::post;
    use axum::Json as AxJson;

    async fn handle(
        Path(name): Path<String>,
        body: axum::body::Bytes,
    ) -> (StatusCode, AxJson<Json>) {
        let err =
            |status: StatusCode, message: String| (status, AxJson(json!({ "error": message })));
        if !BUILTINS.contains(&name.as_str()) {
            return err(StatusCode::NOT_FOUND, format!("no device named `{name}`"));
        }
        let body: Json = match serde_json::from_slice(&body) {
            Ok(b) => b,
            Err(e) => return err(StatusCode::BAD_REQUEST, format!("invalid JSON: {e}")),
        };
        let args = match decode_args(&body) {
            Ok(a) => a,
            Err(e) => return err(StatusCode::BAD_REQUEST, e),
        };
        match builtin(&name, &args) {
            Ok(v) => match v.to_typed_json(None) {
                Ok(j) => (StatusCode::OK, AxJson(j)),
                Err(e) => err(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
            },
            Err(e) => err(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()),
        }
    }

    async fn not_found() -> (StatusCode, AxJson<Json>) {
        (
            StatusCode::NOT_FOUND,
            AxJson(json!({ "error": "no such endpoint" })),
        )
    }

    axum::Router::new()
        .route("/devices/{name}", post(handle))
        .fallback(not_found)
}
