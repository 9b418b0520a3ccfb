//! Websocket session server.
//!
//! Agent mode gives every connection its own env and answers each action with
//! exactly one frame. Human mode runs one world in real time; the human
//! client steers it with latest-wins input and every client, spectators
//! included, receives the same snapshot stream.

use std::fs::File;
use std::io::{BufWriter, ErrorKind};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{mpsc, Arc, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use agarcl_core::observation::encode_symbolic;
use agarcl_core::{make_named, ActionCommand, Discrete, Env, EnvOptions, Observation, Vec2};
use tungstenite::{Bytes, Message as WsMessage, WebSocket};

use crate::error::{HarnessError, Result};
use crate::protocol::{
    ErrorCode, FrameMsg, Hello, Message, ObsPayload, ProtocolError, Role, ServeMode, ServerConfig, StatsMsg,
    PROTOCOL_VERSION,
};
use crate::trajectory::Recorder;

pub const DEFAULT_PORT: u16 = 7070;
pub const DEFAULT_TICK_RATE: f64 = 60.0;
pub const DEFAULT_SNAPSHOT_EVERY: u64 = 2;
const HELLO_TIMEOUT: Duration = Duration::from_secs(10);
const POLL: Duration = Duration::from_millis(5);

#[derive(Clone, Debug)]
pub struct ServeConfig {
    pub bind: String,
    /// 0 picks a free port.
    pub port: u16,
    pub scenario: String,
    pub seed: u64,
    pub mode: ServeMode,
    pub options: EnvOptions,
    pub snapshot_every: u64,
    pub tick_rate: f64,
    /// Agent sessions are aborted after this long without a message.
    pub agent_timeout: Duration,
    /// Directory for session trajectories.
    pub out: Option<PathBuf>,
    pub hash_every: u64,
}

impl Default for ServeConfig {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1".into(),
            port: DEFAULT_PORT,
            scenario: "full".into(),
            seed: 0,
            mode: ServeMode::Agent,
            options: EnvOptions::default(),
            snapshot_every: DEFAULT_SNAPSHOT_EVERY,
            tick_rate: DEFAULT_TICK_RATE,
            agent_timeout: Duration::from_secs(60),
            out: None,
            hash_every: crate::commands::DEFAULT_HASH_EVERY,
        }
    }
}

pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    acceptor: Option<JoinHandle<()>>,
    game: Option<JoinHandle<Result<()>>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("ws://{}/", self.addr)
    }

    /// Blocks until the server stops on its own (it normally never does).
    pub fn wait(mut self) -> Result<()> {
        if let Some(a) = self.acceptor.take() {
            let _ = a.join();
        }
        self.join_game()
    }

    /// Stops accepting, closes every session and flushes trajectories.
    pub fn shutdown(mut self) -> Result<()> {
        self.stop.store(true, Ordering::SeqCst);
        if let Some(a) = self.acceptor.take() {
            let _ = a.join();
        }
        self.join_game()
    }

    fn join_game(&mut self) -> Result<()> {
        match self.game.take() {
            Some(g) => g
                .join()
                .unwrap_or_else(|_| Err(HarnessError::Session("game thread panicked".into()))),
            None => Ok(()),
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
    }
}

type Socket = WebSocket<TcpStream>;

enum Recv {
    Msg(Message),
    Timeout,
    Closed,
    Bad(ProtocolError),
    Failed(String),
}

fn recv(ws: &mut Socket) -> Recv {
    loop {
        match ws.read() {
            Ok(WsMessage::Binary(b)) => {
                return match Message::decode(&b) {
                    Ok(m) => Recv::Msg(m),
                    Err(e) => Recv::Bad(e),
                }
            }
            Ok(WsMessage::Text(_)) => return Recv::Bad(ProtocolError::Payload("text frames are not part of the protocol".into())),
            Ok(WsMessage::Close(_)) => return Recv::Closed,
            Ok(_) => continue,
            Err(tungstenite::Error::Io(e)) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {
                return Recv::Timeout
            }
            Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => return Recv::Closed,
            Err(e) => return Recv::Failed(e.to_string()),
        }
    }
}

fn send(ws: &mut Socket, m: &Message) -> Result<()> {
    ws.send(WsMessage::Binary(m.encode().into()))
        .map_err(|e| HarnessError::Session(e.to_string()))
}

/// Sends an error, closes, and drains briefly so the peer sees both.
fn refuse(ws: &mut Socket, code: ErrorCode, text: impl Into<String>) -> HarnessError {
    let text = text.into();
    let _ = send(ws, &Message::error(code, text.clone()));
    let _ = ws.close(None);
    let _ = ws.get_mut().set_read_timeout(Some(Duration::from_millis(50)));
    let deadline = Instant::now() + Duration::from_millis(500);
    while Instant::now() < deadline {
        match ws.read() {
            Ok(_) => continue,
            Err(_) => break,
        }
    }
    HarnessError::Session(text)
}

fn handshake(stream: TcpStream, timeout: Duration) -> Result<(Socket, Hello)> {
    stream.set_nonblocking(false)?;
    stream.set_nodelay(true)?;
    stream.set_read_timeout(Some(timeout))?;
    let mut ws = tungstenite::accept(stream).map_err(|e| HarnessError::Session(format!("handshake: {e}")))?;
    let (code, text) = match recv(&mut ws) {
        Recv::Msg(Message::Hello(h)) => return Ok((ws, h)),
        Recv::Msg(other) => (ErrorCode::Unexpected, format!("expected hello, got tag {}", other.tag())),
        Recv::Bad(e) => (e.code(), e.to_string()),
        Recv::Timeout => (ErrorCode::Timeout, "no hello received".to_string()),
        Recv::Closed => return Err(HarnessError::Session("closed before hello".into())),
        Recv::Failed(e) => return Err(HarnessError::Session(e)),
    };
    Err(refuse(&mut ws, code, text))
}

fn server_config(cfg: &ServeConfig, env: &Env, role: Role) -> Message {
    Message::ServerConfig(Box::new(ServerConfig {
        protocol_version: PROTOCOL_VERSION,
        mode: cfg.mode,
        role,
        tick_rate: cfg.tick_rate,
        frame_skip: env.options().frame_skip,
        obs_mode: env.options().obs_mode,
        resolution: env.world().config.obs_resolution,
        seed: env.seed(),
        snapshot_every: cfg.snapshot_every,
        spec: env.spec().clone(),
    }))
}

pub fn obs_payload(obs: &Observation) -> ObsPayload {
    match obs {
        Observation::Pixel(p) => ObsPayload::Pixel(p.to_le_bytes()),
        Observation::Symbolic(s) => ObsPayload::Symbolic(s.to_json()),
    }
}

fn trajectory_sink(cfg: &ServeConfig, name: String) -> Result<Option<BufWriter<File>>> {
    let Some(dir) = &cfg.out else { return Ok(None) };
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let path = dir.join(name);
    let f = File::create(&path).map_err(|e| HarnessError::io(&path, e))?;
    Ok(Some(BufWriter::new(f)))
}

fn sanitize(x: f32) -> f64 {
    if x.is_finite() {
        f64::from(x).clamp(-1.0, 1.0)
    } else {
        0.0
    }
}

/// Binds and starts serving in background threads.
pub fn start(cfg: ServeConfig) -> Result<ServerHandle> {
    if cfg.tick_rate <= 0.0 || cfg.snapshot_every == 0 {
        return Err(HarnessError::Invalid("tick rate and snapshot cadence must be positive".into()));
    }
    make_named(&cfg.scenario, cfg.seed, cfg.options.clone())?;
    let listener = TcpListener::bind((cfg.bind.as_str(), cfg.port))?;
    listener.set_nonblocking(true)?;
    let addr = listener.local_addr()?;
    let stop = Arc::new(AtomicBool::new(false));

    let (game, hub) = match cfg.mode {
        ServeMode::Agent => (None, None),
        ServeMode::Human => {
            let hub = Arc::new(Hub::default());
            let mut options = cfg.options.clone();
            options.frame_skip = 1;
            let env = make_named(&cfg.scenario, cfg.seed, options)?;
            let sink = trajectory_sink(&cfg, format!("human-{}-{}.agtr", cfg.scenario, cfg.seed))?;
            let rec = Recorder::new(env, cfg.hash_every, "human session", sink, false)?;
            *hub.config.lock().unwrap() = Some(server_config(&cfg, rec.env(), Role::Human));
            let (h, c, s) = (hub.clone(), cfg.clone(), stop.clone());
            (Some(std::thread::spawn(move || game_loop(&h, rec, &c, &s))), Some(hub))
        }
    };

    let acceptor = {
        let stop = stop.clone();
        std::thread::spawn(move || accept_loop(listener, cfg, hub, stop))
    };
    Ok(ServerHandle {
        addr,
        stop,
        acceptor: Some(acceptor),
        game,
    })
}

fn accept_loop(listener: TcpListener, cfg: ServeConfig, hub: Option<Arc<Hub>>, stop: Arc<AtomicBool>) {
    let sessions = AtomicU64::new(0);
    let mut workers = Vec::new();
    while !stop.load(Ordering::SeqCst) {
        match listener.accept() {
            Ok((stream, _)) => {
                let id = sessions.fetch_add(1, Ordering::SeqCst);
                let (cfg, stop, hub) = (cfg.clone(), stop.clone(), hub.clone());
                workers.push(std::thread::spawn(move || {
                    let _ = match hub {
                        Some(hub) => human_connection(stream, &hub, &stop),
                        None => agent_session(stream, &cfg, id, &stop),
                    };
                }));
                workers.retain(|w| !w.is_finished());
            }
            Err(e) if e.kind() == ErrorKind::WouldBlock => std::thread::sleep(POLL),
            Err(_) => std::thread::sleep(POLL),
        }
    }
    for w in workers {
        let _ = w.join();
    }
}

fn agent_session(stream: TcpStream, cfg: &ServeConfig, id: u64, stop: &AtomicBool) -> Result<()> {
    let (mut ws, hello) = handshake(stream, HELLO_TIMEOUT)?;
    if hello.role != Role::Agent {
        return Err(refuse(&mut ws, ErrorCode::Unexpected, "this server runs lock-step agent sessions"));
    }
    let scenario = hello.scenario.unwrap_or_else(|| cfg.scenario.clone());
    let seed = hello.seed.unwrap_or(cfg.seed);
    let env = match make_named(&scenario, seed, cfg.options.clone()) {
        Ok(env) => env,
        Err(e) => return Err(refuse(&mut ws, ErrorCode::UnknownScenario, e.to_string())),
    };
    let sink = trajectory_sink(cfg, format!("agent-{scenario}-{seed}-{id}.agtr"))?;
    let mut rec = Recorder::new(env, cfg.hash_every, "agent session", sink, false)?;
    ws.get_mut().set_read_timeout(Some(cfg.agent_timeout.min(POLL * 20)))?;

    send(&mut ws, &server_config(cfg, rec.env(), Role::Agent))?;
    let frame = |env: &Env, reward, terminated, truncated| {
        Message::Frame(FrameMsg {
            tick: env.world().tick,
            step: env.steps(),
            reward,
            mass: env.agent_mass(),
            terminated,
            truncated,
            obs: obs_payload(&env.observe()),
        })
    };
    send(&mut ws, &frame(rec.env(), 0.0, false, false))?;

    let mut idle_since = Instant::now();
    let outcome = loop {
        if stop.load(Ordering::SeqCst) {
            let _ = ws.close(None);
            let _ = ws.flush();
            break Ok(());
        }
        match recv(&mut ws) {
            Recv::Msg(Message::Action { x, y, discrete }) => {
                idle_since = Instant::now();
                let action = ActionCommand::new(f64::from(x), f64::from(y), discrete);
                let reply = match rec.step(action) {
                    Ok(t) => frame(rec.env(), t.reward, t.terminated, t.truncated),
                    Err(HarnessError::Env(e)) => Message::error(ErrorCode::Env, e.to_string()),
                    Err(e) => break Err(e),
                };
                send(&mut ws, &reply)?;
            }
            Recv::Msg(Message::Reset) => {
                idle_since = Instant::now();
                let reply = match rec.reset() {
                    Ok(_) => frame(rec.env(), 0.0, false, false),
                    Err(HarnessError::Env(e)) => Message::error(ErrorCode::Env, e.to_string()),
                    Err(e) => break Err(e),
                };
                send(&mut ws, &reply)?;
            }
            Recv::Msg(other) => {
                break Err(refuse(&mut ws, ErrorCode::Unexpected, format!("unexpected message tag {}", other.tag())))
            }
            Recv::Timeout => {
                if idle_since.elapsed() >= cfg.agent_timeout {
                    break Err(refuse(&mut ws, ErrorCode::Timeout, "no action before the session timeout"));
                }
            }
            Recv::Bad(e) => break Err(refuse(&mut ws, e.code(), e.to_string())),
            Recv::Closed => break Ok(()),
            Recv::Failed(e) => break Err(HarnessError::Session(e)),
        }
    };
    rec.finish()?;
    outcome
}

#[derive(Default)]
struct Input {
    cursor: Vec2,
    pending: Option<Discrete>,
}

#[derive(Default)]
struct Hub {
    input: Mutex<Input>,
    subscribers: Mutex<Vec<mpsc::Sender<Bytes>>>,
    human: AtomicBool,
    config: Mutex<Option<Message>>,
}

impl Hub {
    fn broadcast(&self, m: &Message) {
        let bytes: Bytes = m.encode().into();
        self.subscribers
            .lock()
            .unwrap()
            .retain(|tx| tx.send(bytes.clone()).is_ok());
    }
}

fn game_loop(hub: &Hub, mut rec: Recorder<BufWriter<File>>, cfg: &ServeConfig, stop: &AtomicBool) -> Result<()> {
    let period = Duration::from_secs_f64(1.0 / cfg.tick_rate);
    let stats_every = (cfg.tick_rate.round() as u64).max(1);
    let mut next = Instant::now();
    let mut window = (Instant::now(), rec.env().world().tick);
    while !stop.load(Ordering::SeqCst) {
        if rec.env().is_done() {
            rec.reset()?;
            hub.broadcast(&Message::Reset);
        }
        let action = {
            let mut input = hub.input.lock().unwrap();
            ActionCommand {
                cursor: input.cursor,
                discrete: input.pending.take().unwrap_or_default(),
            }
        };
        let t = rec.step(action)?;
        let env = rec.env();
        let tick = t.info.tick;
        if tick % cfg.snapshot_every == 0 {
            hub.broadcast(&Message::Snapshot(encode_symbolic(env.world(), env.agent()).to_json()));
        }
        if tick % stats_every == 0 {
            let secs = window.0.elapsed().as_secs_f64();
            let fps = if secs > 0.0 { (tick - window.1) as f64 / secs } else { 0.0 };
            window = (Instant::now(), tick);
            hub.broadcast(&Message::Stats(StatsMsg {
                tick,
                fps,
                mass: env.agent_mass(),
                deaths: env.world().players[env.agent()].lifetime_deaths,
            }));
        }
        next += period;
        let now = Instant::now();
        if next > now {
            std::thread::sleep(next - now);
        } else if now - next > Duration::from_secs(1) {
            next = now;
        }
    }
    rec.finish()?;
    Ok(())
}

fn human_connection(stream: TcpStream, hub: &Hub, stop: &AtomicBool) -> Result<()> {
    let (mut ws, hello) = handshake(stream, HELLO_TIMEOUT)?;
    let is_human = match hello.role {
        Role::Human if hub.human.swap(true, Ordering::SeqCst) => {
            return Err(refuse(&mut ws, ErrorCode::Busy, "another human is already playing"));
        }
        Role::Human => true,
        Role::Spectator => false,
        Role::Agent => {
            return Err(refuse(&mut ws, ErrorCode::Unexpected, "this server runs a real-time human session"));
        }
    };
    let result = human_loop(&mut ws, hub, stop, is_human, hello.role);
    if is_human {
        hub.human.store(false, Ordering::SeqCst);
    }
    result
}

fn human_loop(ws: &mut Socket, hub: &Hub, stop: &AtomicBool, is_human: bool, role: Role) -> Result<()> {
    let config = match hub.config.lock().unwrap().clone() {
        Some(Message::ServerConfig(mut c)) => {
            c.role = role;
            Message::ServerConfig(c)
        }
        _ => return Err(HarnessError::Session("server config missing".into())),
    };
    send(ws, &config)?;
    let (tx, rx) = mpsc::channel();
    hub.subscribers.lock().unwrap().push(tx);
    ws.get_mut().set_read_timeout(Some(POLL))?;

    loop {
        if stop.load(Ordering::SeqCst) {
            let _ = ws.close(None);
            let _ = ws.flush();
            return Ok(());
        }
        match recv(ws) {
            Recv::Msg(Message::Action { x, y, discrete }) if is_human => {
                let mut input = hub.input.lock().unwrap();
                input.cursor = Vec2::new(sanitize(x), sanitize(y));
                if discrete != Discrete::None {
                    input.pending = Some(discrete);
                }
            }
            Recv::Msg(other) => {
                let text = format!("message tag {} not accepted from a {role:?} client", other.tag());
                send(ws, &Message::error(ErrorCode::Unexpected, text))?;
            }
            Recv::Timeout => {}
            Recv::Bad(e) => return Err(refuse(ws, e.code(), e.to_string())),
            Recv::Closed => return Ok(()),
            Recv::Failed(e) => return Err(HarnessError::Session(e)),
        }
        let mut wrote = false;
        while let Ok(bytes) = rx.try_recv() {
            ws.write(WsMessage::Binary(bytes))
                .map_err(|e| HarnessError::Session(e.to_string()))?;
            wrote = true;
        }
        if wrote {
            ws.flush().map_err(|e| HarnessError::Session(e.to_string()))?;
        }
    }
}
