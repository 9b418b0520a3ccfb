//! Session messages. Every message travels as one binary websocket message:
//!
//! ```text
//! [version:u8][tag:u8][len:u32 LE][payload: len bytes]
//! ```
//!
//! Actions, frames and stats are packed little-endian; hello, server config
//! and snapshots carry JSON. See `docs/protocol.md` for the byte tables.

use agarcl_core::{Discrete, ObsMode, ScenarioSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const PROTOCOL_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 6;
/// Anything larger is rejected before allocation.
pub const MAX_PAYLOAD: usize = 64 << 20;

pub mod tag {
    pub const HELLO: u8 = 1;
    pub const SERVER_CONFIG: u8 = 2;
    pub const ACTION: u8 = 3;
    pub const FRAME: u8 = 4;
    pub const SNAPSHOT: u8 = 5;
    pub const STATS: u8 = 6;
    pub const RESET: u8 = 7;
    pub const ERROR: u8 = 8;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Agent,
    Human,
    Spectator,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServeMode {
    /// Lock-step: one frame per action.
    Agent,
    /// Real time at the tick rate with latest-wins input.
    Human,
}

impl std::str::FromStr for ServeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "agent" => Ok(ServeMode::Agent),
            "human" => Ok(ServeMode::Human),
            other => Err(format!("unknown mode `{other}` (expected agent or human)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hello {
    pub role: Role,
    /// Agent sessions may pick their own scenario and seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ServerConfig {
    pub protocol_version: u8,
    pub mode: ServeMode,
    pub role: Role,
    /// Simulation ticks per wall-clock second in human mode.
    pub tick_rate: f64,
    pub frame_skip: u32,
    pub obs_mode: ObsMode,
    pub resolution: usize,
    pub seed: u64,
    pub snapshot_every: u64,
    pub spec: ScenarioSpec,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ObsPayload {
    None,
    /// Little-endian f32, plane-major `[channel][row][col]`.
    Pixel(Vec<u8>),
    /// Symbolic observation JSON.
    Symbolic(String),
}

impl ObsPayload {
    fn kind(&self) -> u8 {
        match self {
            ObsPayload::None => 0,
            ObsPayload::Pixel(_) => 1,
            ObsPayload::Symbolic(_) => 2,
        }
    }

    fn bytes(&self) -> &[u8] {
        match self {
            ObsPayload::None => &[],
            ObsPayload::Pixel(b) => b,
            ObsPayload::Symbolic(s) => s.as_bytes(),
        }
    }
}

pub const FLAG_TERMINATED: u8 = 1;
pub const FLAG_TRUNCATED: u8 = 2;
const FRAME_FIXED: usize = 34;

#[derive(Clone, Debug, PartialEq)]
pub struct FrameMsg {
    pub tick: u64,
    /// Steps taken in the current episode.
    pub step: u64,
    pub reward: f64,
    pub mass: f64,
    pub terminated: bool,
    pub truncated: bool,
    pub obs: ObsPayload,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StatsMsg {
    pub tick: u64,
    /// Measured simulation ticks per second.
    pub fps: f64,
    pub mass: f64,
    pub deaths: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u16)]
pub enum ErrorCode {
    Malformed = 1,
    Version = 2,
    Unexpected = 3,
    Env = 4,
    Timeout = 5,
    UnknownScenario = 6,
    Busy = 7,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Message {
    Hello(Hello),
    ServerConfig(Box<ServerConfig>),
    Action { x: f32, y: f32, discrete: Discrete },
    Frame(FrameMsg),
    /// Symbolic observation JSON of the played agent, for client rendering.
    Snapshot(String),
    Stats(StatsMsg),
    Reset,
    Error { code: u16, text: String },
}

#[derive(Debug, Error, PartialEq)]
pub enum ProtocolError {
    #[error("message shorter than its header")]
    Short,
    #[error("protocol version {0} not supported (server speaks {PROTOCOL_VERSION})")]
    Version(u8),
    #[error("unknown message tag {0}")]
    UnknownTag(u8),
    #[error("declared payload of {declared} bytes but {actual} present")]
    Length { declared: usize, actual: usize },
    #[error("bad payload: {0}")]
    Payload(String),
}

impl ProtocolError {
    pub fn code(&self) -> ErrorCode {
        match self {
            ProtocolError::Version(_) => ErrorCode::Version,
            _ => ErrorCode::Malformed,
        }
    }
}

impl Message {
    pub fn error(code: ErrorCode, text: impl Into<String>) -> Self {
        Message::Error {
            code: code as u16,
            text: text.into(),
        }
    }

    pub fn tag(&self) -> u8 {
        match self {
            Message::Hello(_) => tag::HELLO,
            Message::ServerConfig(_) => tag::SERVER_CONFIG,
            Message::Action { .. } => tag::ACTION,
            Message::Frame(_) => tag::FRAME,
            Message::Snapshot(_) => tag::SNAPSHOT,
            Message::Stats(_) => tag::STATS,
            Message::Reset => tag::RESET,
            Message::Error { .. } => tag::ERROR,
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut p = Vec::new();
        match self {
            Message::Hello(h) => p = serde_json::to_vec(h).expect("hello serializes"),
            Message::ServerConfig(c) => p = serde_json::to_vec(c).expect("server config serializes"),
            Message::Action { x, y, discrete } => {
                p.extend_from_slice(&x.to_le_bytes());
                p.extend_from_slice(&y.to_le_bytes());
                p.push(discrete.index());
            }
            Message::Frame(f) => {
                p.reserve(FRAME_FIXED + f.obs.bytes().len());
                p.extend_from_slice(&f.tick.to_le_bytes());
                p.extend_from_slice(&f.step.to_le_bytes());
                p.extend_from_slice(&f.reward.to_le_bytes());
                p.extend_from_slice(&f.mass.to_le_bytes());
                let mut flags = 0;
                if f.terminated {
                    flags |= FLAG_TERMINATED;
                }
                if f.truncated {
                    flags |= FLAG_TRUNCATED;
                }
                p.push(flags);
                p.push(f.obs.kind());
                p.extend_from_slice(f.obs.bytes());
            }
            Message::Snapshot(json) => p.extend_from_slice(json.as_bytes()),
            Message::Stats(s) => {
                p.extend_from_slice(&s.tick.to_le_bytes());
                p.extend_from_slice(&s.fps.to_le_bytes());
                p.extend_from_slice(&s.mass.to_le_bytes());
                p.extend_from_slice(&s.deaths.to_le_bytes());
            }
            Message::Reset => {}
            Message::Error { code, text } => {
                p.extend_from_slice(&code.to_le_bytes());
                p.extend_from_slice(text.as_bytes());
            }
        }
        let mut out = Vec::with_capacity(HEADER_LEN + p.len());
        out.push(PROTOCOL_VERSION);
        out.push(self.tag());
        out.extend_from_slice(&(p.len() as u32).to_le_bytes());
        out.extend_from_slice(&p);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ProtocolError> {
        if bytes.len() < HEADER_LEN {
            return Err(ProtocolError::Short);
        }
        if bytes[0] != PROTOCOL_VERSION {
            return Err(ProtocolError::Version(bytes[0]));
        }
        let t = bytes[1];
        let declared = u32::from_le_bytes(bytes[2..6].try_into().unwrap()) as usize;
        let p = &bytes[HEADER_LEN..];
        if declared != p.len() || declared > MAX_PAYLOAD {
            return Err(ProtocolError::Length {
                declared,
                actual: p.len(),
            });
        }
        let exact = |n: usize| {
            if p.len() == n {
                Ok(())
            } else {
                Err(ProtocolError::Payload(format!("tag {t} expects {n} bytes, got {}", p.len())))
            }
        };
        let json_err = |e: serde_json::Error| ProtocolError::Payload(e.to_string());
        let text = |b: &[u8]| {
            std::str::from_utf8(b)
                .map(str::to_owned)
                .map_err(|e| ProtocolError::Payload(e.to_string()))
        };
        let u64_at = |o: usize| u64::from_le_bytes(p[o..o + 8].try_into().unwrap());
        Ok(match t {
            tag::HELLO => Message::Hello(serde_json::from_slice(p).map_err(json_err)?),
            tag::SERVER_CONFIG => Message::ServerConfig(Box::new(serde_json::from_slice(p).map_err(json_err)?)),
            tag::ACTION => {
                exact(9)?;
                let x = f32::from_le_bytes(p[0..4].try_into().unwrap());
                let y = f32::from_le_bytes(p[4..8].try_into().unwrap());
                let discrete = Discrete::from_index(p[8])
                    .ok_or_else(|| ProtocolError::Payload(format!("discrete action {} out of range", p[8])))?;
                Message::Action { x, y, discrete }
            }
            tag::FRAME => {
                if p.len() < FRAME_FIXED {
                    return Err(ProtocolError::Payload("frame shorter than its fixed part".into()));
                }
                let flags = p[32];
                let rest = &p[FRAME_FIXED..];
                let obs = match p[33] {
                    0 if rest.is_empty() => ObsPayload::None,
                    1 if rest.len().is_multiple_of(16) => ObsPayload::Pixel(rest.to_vec()),
                    2 => ObsPayload::Symbolic(text(rest)?),
                    k => return Err(ProtocolError::Payload(format!("bad observation kind {k} for {} bytes", rest.len()))),
                };
                Message::Frame(FrameMsg {
                    tick: u64_at(0),
                    step: u64_at(8),
                    reward: f64::from_bits(u64_at(16)),
                    mass: f64::from_bits(u64_at(24)),
                    terminated: flags & FLAG_TERMINATED != 0,
                    truncated: flags & FLAG_TRUNCATED != 0,
                    obs,
                })
            }
            tag::SNAPSHOT => Message::Snapshot(text(p)?),
            tag::STATS => {
                exact(32)?;
                Message::Stats(StatsMsg {
                    tick: u64_at(0),
                    fps: f64::from_bits(u64_at(8)),
                    mass: f64::from_bits(u64_at(16)),
                    deaths: u64_at(24),
                })
            }
            tag::RESET => {
                exact(0)?;
                Message::Reset
            }
            tag::ERROR => {
                if p.len() < 2 {
                    return Err(ProtocolError::Payload("error message without code".into()));
                }
                Message::Error {
                    code: u16::from_le_bytes([p[0], p[1]]),
                    text: text(&p[2..])?,
                }
            }
            other => return Err(ProtocolError::UnknownTag(other)),
        })
    }
}
