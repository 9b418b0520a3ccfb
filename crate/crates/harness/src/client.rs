//! Blocking websocket client for scripted agents and tests.

use std::net::TcpStream;
use std::time::Duration;

use agarcl_core::{ActionCommand, Discrete};
use tungstenite::stream::MaybeTlsStream;
use tungstenite::{Message as WsMessage, WebSocket};

use crate::error::{HarnessError, Result};
use crate::protocol::{FrameMsg, Hello, Message, Role, ServerConfig};

pub struct Client {
    ws: WebSocket<MaybeTlsStream<TcpStream>>,
}

fn session_err(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Session(e.to_string())
}

impl Client {
    /// Connects, says hello and waits for the server config.
    pub fn connect(url: &str, hello: Hello) -> Result<(Self, ServerConfig)> {
        let (ws, _) = tungstenite::connect(url).map_err(session_err)?;
        if let MaybeTlsStream::Plain(s) = ws.get_ref() {
            s.set_nodelay(true)?;
            s.set_read_timeout(Some(Duration::from_secs(30)))?;
        }
        let mut c = Self { ws };
        c.send(&Message::Hello(hello))?;
        match c.recv()? {
            Message::ServerConfig(cfg) => Ok((c, *cfg)),
            Message::Error { code, text } => Err(HarnessError::Session(format!("refused ({code}): {text}"))),
            other => Err(HarnessError::Session(format!("expected server config, got tag {}", other.tag()))),
        }
    }

    pub fn agent(url: &str, scenario: Option<&str>, seed: Option<u64>) -> Result<(Self, ServerConfig)> {
        Self::connect(
            url,
            Hello {
                role: Role::Agent,
                scenario: scenario.map(str::to_owned),
                seed,
            },
        )
    }

    pub fn send(&mut self, m: &Message) -> Result<()> {
        self.ws.send(WsMessage::Binary(m.encode().into())).map_err(session_err)
    }

    /// Sends raw bytes as one binary message, bypassing encoding.
    pub fn send_raw(&mut self, bytes: Vec<u8>) -> Result<()> {
        self.ws.send(WsMessage::Binary(bytes.into())).map_err(session_err)
    }

    /// Next protocol message; control frames are skipped.
    pub fn recv(&mut self) -> Result<Message> {
        loop {
            match self.ws.read().map_err(session_err)? {
                WsMessage::Binary(b) => return Message::decode(&b).map_err(session_err),
                WsMessage::Close(_) => return Err(HarnessError::Session("closed by server".into())),
                _ => continue,
            }
        }
    }

    /// Sends one action and waits for its frame.
    pub fn act(&mut self, action: ActionCommand) -> Result<FrameMsg> {
        self.send(&Message::Action {
            x: action.cursor.x as f32,
            y: action.cursor.y as f32,
            discrete: action.discrete,
        })?;
        self.expect_frame()
    }

    pub fn reset(&mut self) -> Result<FrameMsg> {
        self.send(&Message::Reset)?;
        self.expect_frame()
    }

    pub fn expect_frame(&mut self) -> Result<FrameMsg> {
        match self.recv()? {
            Message::Frame(f) => Ok(f),
            Message::Error { code, text } => Err(HarnessError::Session(format!("error {code}: {text}"))),
            other => Err(HarnessError::Session(format!("expected frame, got tag {}", other.tag()))),
        }
    }

    pub fn steer(&mut self, x: f32, y: f32, discrete: Discrete) -> Result<()> {
        self.send(&Message::Action { x, y, discrete })
    }

    pub fn close(mut self) {
        let _ = self.ws.close(None);
        while self.ws.read().is_ok() {}
    }
}
