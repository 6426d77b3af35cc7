use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, Weak};
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Query, State};
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use dronepaint_core::gesture::GestureModel;
use futures_util::{SinkExt, StreamExt};
use serde_json::Value;
use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::{broadcast, mpsc};
use tokio::task::JoinHandle;
use tokio::time::MissedTickBehavior;

use crate::protocol::{ClientMessage, ServerMessage};
use crate::session::{Session, SessionConfig};

pub const SIM_HZ: f64 = 100.0;
pub const BROADCAST_HZ: f64 = 30.0;

#[derive(Clone)]
pub struct HubConfig {
    pub defaults: SessionConfig,
    pub model: Option<Arc<GestureModel>>,
    pub sim_hz: f64,
    pub broadcast_hz: f64,
}

impl Default for HubConfig {
    fn default() -> Self {
        Self {
            defaults: SessionConfig::default(),
            model: None,
            sim_hz: SIM_HZ,
            broadcast_hz: BROADCAST_HZ,
        }
    }
}

pub struct SessionHandle {
    pub session: tokio::sync::Mutex<Session>,
    states: broadcast::Sender<Arc<str>>,
}

impl SessionHandle {
    pub fn subscribe(&self) -> broadcast::Receiver<Arc<str>> {
        self.states.subscribe()
    }
}

/// Registry of live sessions; each runs its own sim/broadcast loop.
pub struct Hub {
    config: HubConfig,
    sessions: Mutex<HashMap<String, Arc<SessionHandle>>>,
    next_id: AtomicU64,
}

impl Hub {
    pub fn new(config: HubConfig) -> Arc<Self> {
        Arc::new(Self {
            config,
            sessions: Mutex::new(HashMap::new()),
            next_id: AtomicU64::new(1),
        })
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().expect("hub lock").len()
    }

    /// Resumes `id` if it exists, otherwise opens a fresh session (under `id`
    /// when given).
    pub fn attach(self: &Arc<Self>, id: Option<&str>, overrides: Option<&Value>) -> Result<Arc<SessionHandle>, String> {
        let mut sessions = self.sessions.lock().expect("hub lock");
        if let Some(h) = id.and_then(|id| sessions.get(id)) {
            return Ok(h.clone());
        }
        let id = match id {
            Some(id) => id.to_string(),
            None => loop {
                let candidate = format!("s{}", self.next_id.fetch_add(1, Ordering::Relaxed));
                if !sessions.contains_key(&candidate) {
                    break candidate;
                }
            },
        };
        let session = Session::open(id.clone(), &self.config.defaults, overrides, self.config.model.clone())?;
        let (states, _) = broadcast::channel(16);
        let handle = Arc::new(SessionHandle {
            session: tokio::sync::Mutex::new(session),
            states,
        });
        sessions.insert(id, handle.clone());
        tokio::spawn(session_loop(
            Arc::downgrade(&handle),
            self.config.sim_hz,
            self.config.broadcast_hz,
        ));
        Ok(handle)
    }
}

async fn session_loop(handle: Weak<SessionHandle>, sim_hz: f64, broadcast_hz: f64) {
    let mut sim = tokio::time::interval(Duration::from_secs_f64(1.0 / sim_hz));
    let mut bcast = tokio::time::interval(Duration::from_secs_f64(1.0 / broadcast_hz));
    sim.set_missed_tick_behavior(MissedTickBehavior::Delay);
    bcast.set_missed_tick_behavior(MissedTickBehavior::Skip);
    loop {
        tokio::select! {
            _ = sim.tick() => {
                let Some(h) = handle.upgrade() else { return };
                h.session.lock().await.tick();
            }
            _ = bcast.tick() => {
                let Some(h) = handle.upgrade() else { return };
                let line: Arc<str> = h.session.lock().await.snapshot().to_line().into();
                let _ = h.states.send(line);
            }
        }
    }
}

/// One client connection: forwards broadcasts of the attached session and
/// answers each incoming line in order.
struct Connection {
    hub: Arc<Hub>,
    out: mpsc::UnboundedSender<String>,
    handle: Option<Arc<SessionHandle>>,
    forwarder: Option<JoinHandle<()>>,
}

impl Connection {
    fn new(hub: Arc<Hub>, out: mpsc::UnboundedSender<String>) -> Self {
        Self {
            hub,
            out,
            handle: None,
            forwarder: None,
        }
    }

    fn send(&self, msg: &ServerMessage) {
        let _ = self.out.send(msg.to_line());
    }

    async fn attach(&mut self, id: Option<&str>, overrides: Option<&Value>) -> bool {
        match self.hub.attach(id, overrides) {
            Ok(handle) => {
                if let Some(f) = self.forwarder.take() {
                    f.abort();
                }
                let mut rx = handle.subscribe();
                let out = self.out.clone();
                self.forwarder = Some(tokio::spawn(async move {
                    loop {
                        match rx.recv().await {
                            Ok(line) => {
                                if out.send(line.to_string()).is_err() {
                                    return;
                                }
                            }
                            Err(broadcast::error::RecvError::Lagged(_)) => continue,
                            Err(broadcast::error::RecvError::Closed) => return,
                        }
                    }
                }));
                let id = handle.session.lock().await.id().to_string();
                self.send(&ServerMessage::Session { id });
                self.handle = Some(handle);
                true
            }
            Err(reason) => {
                self.send(&ServerMessage::error(reason));
                false
            }
        }
    }

    async fn line(&mut self, text: &str) {
        let text = text.trim();
        if text.is_empty() {
            return;
        }
        let msg = match ClientMessage::parse(text) {
            Ok(m) => m,
            Err(reason) => return self.send(&ServerMessage::error(reason)),
        };
        if let ClientMessage::Session { id } = &msg {
            self.attach(id.as_deref(), None).await;
            return;
        }
        if self.handle.is_none() {
            // the first config message doubles as the session's open overrides
            if let ClientMessage::Config(patch) = &msg {
                self.attach(None, Some(patch)).await;
                return;
            }
            if !self.attach(None, None).await {
                return;
            }
        }
        let handle = self.handle.clone().expect("attached");
        let replies = handle.session.lock().await.handle(msg);
        for r in &replies {
            self.send(r);
        }
    }
}

impl Drop for Connection {
    fn drop(&mut self) {
        if let Some(f) = self.forwarder.take() {
            f.abort();
        }
    }
}

async fn ws_session(socket: WebSocket, hub: Arc<Hub>, id: Option<String>) {
    let (mut sink, mut stream) = socket.split();
    let (tx, mut rx) = mpsc::unbounded_channel::<String>();
    let writer = tokio::spawn(async move {
        while let Some(line) = rx.recv().await {
            if sink.send(Message::Text(line)).await.is_err() {
                return;
            }
        }
    });
    let mut conn = Connection::new(hub, tx);
    conn.attach(id.as_deref(), None).await;
    while let Some(Ok(msg)) = stream.next().await {
        match msg {
            Message::Text(text) => {
                for line in text.lines() {
                    conn.line(line).await;
                }
            }
            Message::Close(_) => break,
            _ => {}
        }
    }
    drop(conn);
    writer.abort();
}

async fn ws_handler(
    ws: WebSocketUpgrade,
    Query(q): Query<HashMap<String, String>>,
    State(hub): State<Arc<Hub>>,
) -> impl IntoResponse {
    let id = q.get("id").cloned();
    ws.on_upgrade(move |socket| ws_session(socket, hub, id))
}

pub fn router(hub: Arc<Hub>) -> Router {
    Router::new()
        .route("/session", get(ws_handler))
        .route("/health", get(|| async { "ok" }))
        .with_state(hub)
}

pub async fn serve_ws(listener: TcpListener, hub: Arc<Hub>) -> std::io::Result<()> {
    axum::serve(listener, router(hub)).await
}

/// Newline-delimited JSON over plain TCP. A connection starts detached; its
/// first message opens (or, via `{"type":"session","id":..}`, resumes) a session.
pub async fn serve_tcp(listener: TcpListener, hub: Arc<Hub>) -> std::io::Result<()> {
    loop {
        let (stream, peer) = listener.accept().await?;
        tracing::debug!(%peer, "ndjson client connected");
        tokio::spawn(tcp_session(stream, hub.clone()));
    }
}

async fn tcp_session(stream: TcpStream, hub: Arc<Hub>) {
    let (read, mut write) = stream.into_split();
    let (tx, mut rx) = mpsc::unbounded_channel::<String>();
    let writer = tokio::spawn(async move {
        while let Some(mut line) = rx.recv().await {
            line.push('\n');
            if write.write_all(line.as_bytes()).await.is_err() {
                return;
            }
        }
    });
    let mut conn = Connection::new(hub, tx);
    let mut lines = BufReader::new(read).lines();
    while let Ok(Some(line)) = lines.next_line().await {
        conn.line(&line).await;
    }
    drop(conn);
    let _ = writer.await;
}

pub struct ServerConfig {
    pub ws_bind: Option<SocketAddr>,
    pub tcp_bind: Option<SocketAddr>,
    pub hub: HubConfig,
}

/// Binds the configured listeners and serves until one of them fails.
pub async fn run(cfg: ServerConfig) -> std::io::Result<()> {
    let hub = Hub::new(cfg.hub);
    let mut tasks = Vec::new();
    if let Some(addr) = cfg.ws_bind {
        let l = TcpListener::bind(addr).await?;
        tracing::info!(addr = %l.local_addr()?, "websocket endpoint /session");
        tasks.push(tokio::spawn(serve_ws(l, hub.clone())));
    }
    if let Some(addr) = cfg.tcp_bind {
        let l = TcpListener::bind(addr).await?;
        tracing::info!(addr = %l.local_addr()?, "ndjson endpoint");
        tasks.push(tokio::spawn(serve_tcp(l, hub.clone())));
    }
    if tasks.is_empty() {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            "no listener configured",
        ));
    }
    let (res, _, _) = futures_util::future::select_all(tasks).await;
    res.map_err(std::io::Error::other)?
}
