//! Trajectory files: one JSON header line, fixed-size binary records, and an
//! optional trailing hash index.
//!
//! ```text
//! header  := json-line '\n'
//! record  := 'S' step:u64 tick:u64 x:f64 y:f64 discrete:u8 reward:f64 mass:f64 has_hash:u8 hash:u64
//!          | 'R' episode:u64 hash:u64
//! trailer := 'I' count:u64 (step:u64 hash:u64)* offset:u64 "AGTRIDX1"
//! ```
//!
//! All integers and floats are little-endian. A file cut short (no trailer, or
//! a partial last record) still reads; the damaged tail is dropped.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use agarcl_core::env::{RespawnReward, Transition};
use agarcl_core::observation::Observation;
use agarcl_core::world::config_digest;
use agarcl_core::{make_env, ActionCommand, Discrete, Env, EnvOptions, ObsMode, ScenarioSpec, Vec2};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const TRAJECTORY_FORMAT: &str = "agarcl-trajectory";
pub const TRAJECTORY_VERSION: u32 = 1;
pub const INDEX_MAGIC: &[u8; 8] = b"AGTRIDX1";

const STEP_TAG: u8 = b'S';
const RESET_TAG: u8 = b'R';
const INDEX_TAG: u8 = b'I';
const STEP_LEN: usize = 58;
const RESET_LEN: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryHeader {
    pub format: String,
    pub version: u32,
    pub scenario: ScenarioSpec,
    /// Digest of the first episode's world configuration.
    pub config_digest: u64,
    pub seed: u64,
    pub frame_skip: u32,
    pub obs_mode: ObsMode,
    pub noise_std: f64,
    pub respawn_reward: RespawnReward,
    /// A step record carries a state hash when its step number is a multiple
    /// of this, and always on the last step of an episode.
    pub hash_every: u64,
    pub initial_hash: u64,
    /// Free text, e.g. the policy that produced the file.
    #[serde(default)]
    pub note: String,
}

impl TrajectoryHeader {
    pub fn for_env(env: &Env, hash_every: u64, note: impl Into<String>) -> Self {
        let options = env.options();
        Self {
            format: TRAJECTORY_FORMAT.to_string(),
            version: TRAJECTORY_VERSION,
            scenario: env.spec().clone(),
            config_digest: config_digest(&env.world().config),
            seed: env.seed(),
            frame_skip: options.frame_skip,
            obs_mode: options.obs_mode,
            noise_std: env.noise_std(),
            respawn_reward: options.respawn_reward,
            hash_every: hash_every.max(1),
            initial_hash: env.world().state_hash(),
            note: note.into(),
        }
    }

    pub fn env_options(&self) -> EnvOptions {
        EnvOptions {
            frame_skip: self.frame_skip,
            obs_mode: self.obs_mode,
            noise_std: Some(self.noise_std),
            respawn_reward: self.respawn_reward,
        }
    }

    /// A fresh env matching this header, as it was before the first step.
    pub fn build_env(&self) -> Result<Env> {
        Ok(make_env(self.scenario.clone(), self.seed, self.env_options())?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based, counted across episodes.
    pub step: u64,
    pub tick: u64,
    pub action: ActionCommand,
    pub reward: f64,
    pub mass: f64,
    pub hash: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Record {
    Step(StepRecord),
    /// The env was reset; `hash` is the new episode's initial state.
    Reset { episode: u64, hash: u64 },
}

impl Record {
    fn encode(&self, out: &mut Vec<u8>) {
        match self {
            Record::Step(s) => {
                out.push(STEP_TAG);
                out.extend_from_slice(&s.step.to_le_bytes());
                out.extend_from_slice(&s.tick.to_le_bytes());
                out.extend_from_slice(&s.action.cursor.x.to_le_bytes());
                out.extend_from_slice(&s.action.cursor.y.to_le_bytes());
                out.push(s.action.discrete.index());
                out.extend_from_slice(&s.reward.to_le_bytes());
                out.extend_from_slice(&s.mass.to_le_bytes());
                out.push(s.hash.is_some() as u8);
                out.extend_from_slice(&s.hash.unwrap_or(0).to_le_bytes());
            }
            Record::Reset { episode, hash } => {
                out.push(RESET_TAG);
                out.extend_from_slice(&episode.to_le_bytes());
                out.extend_from_slice(&hash.to_le_bytes());
            }
        }
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn u8(&mut self) -> u8 {
        self.pos += 1;
        self.bytes[self.pos - 1]
    }

    fn u64(&mut self) -> u64 {
        let v = u64::from_le_bytes(self.bytes[self.pos..self.pos + 8].try_into().unwrap());
        self.pos += 8;
        v
    }

    fn f64(&mut self) -> f64 {
        f64::from_bits(self.u64())
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

pub struct TrajectoryWriter<W: Write> {
    out: W,
    offset: u64,
    index: Vec<(u64, u64)>,
    buf: Vec<u8>,
}

impl TrajectoryWriter<BufWriter<File>> {
    pub fn create(path: &Path, header: &TrajectoryHeader) -> Result<Self> {
        let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
        Self::new(BufWriter::new(file), header).map_err(|e| match e {
            HarnessError::Stream(source) => HarnessError::io(path, source),
            other => other,
        })
    }
}

impl<W: Write> TrajectoryWriter<W> {
    pub fn new(mut out: W, header: &TrajectoryHeader) -> Result<Self> {
        let mut line = serde_json::to_vec(header)?;
        line.push(b'\n');
        out.write_all(&line)?;
        Ok(Self {
            out,
            offset: line.len() as u64,
            index: Vec::new(),
            buf: Vec::with_capacity(64),
        })
    }

    pub fn push(&mut self, record: &Record) -> Result<()> {
        if let Record::Step(StepRecord {
            step, hash: Some(h), ..
        }) = record
        {
            self.index.push((*step, *h));
        }
        self.buf.clear();
        record.encode(&mut self.buf);
        self.out.write_all(&self.buf)?;
        self.offset += self.buf.len() as u64;
        Ok(())
    }

    /// Writes the hash index and flushes. Dropping the writer instead leaves
    /// a valid file without a trailer.
    pub fn finish(mut self) -> Result<W> {
        let start = self.offset;
        let mut t = Vec::with_capacity(25 + 16 * self.index.len());
        t.push(INDEX_TAG);
        t.extend_from_slice(&(self.index.len() as u64).to_le_bytes());
        for (step, hash) in &self.index {
            t.extend_from_slice(&step.to_le_bytes());
            t.extend_from_slice(&hash.to_le_bytes());
        }
        t.extend_from_slice(&start.to_le_bytes());
        t.extend_from_slice(INDEX_MAGIC);
        self.out.write_all(&t)?;
        self.out.flush()?;
        Ok(self.out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub header: TrajectoryHeader,
    pub records: Vec<Record>,
    /// `(step, hash)` pairs from the trailer, when one was written.
    pub index: Option<Vec<(u64, u64)>>,
    /// A partial record at the end was discarded.
    pub truncated: bool,
}

impl Trajectory {
    pub fn read_path(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| HarnessError::Format(m.to_string());
        let nl = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| bad("missing header line"))?;
        let header: TrajectoryHeader =
            serde_json::from_slice(&bytes[..nl]).map_err(|e| HarnessError::Format(format!("header: {e}")))?;
        if header.format != TRAJECTORY_FORMAT {
            return Err(HarnessError::Format(format!("unknown format `{}`", header.format)));
        }
        if header.version != TRAJECTORY_VERSION {
            return Err(HarnessError::Format(format!(
                "version {} not supported (expected {TRAJECTORY_VERSION})",
                header.version
            )));
        }

        let mut c = Cursor {
            bytes,
            pos: nl + 1,
        };
        let mut records = Vec::new();
        let mut index = None;
        let mut truncated = false;
        while c.remaining() > 0 {
            let record_start = c.pos;
            let tag = c.u8();
            match tag {
                STEP_TAG if c.remaining() >= STEP_LEN => {
                    let step = c.u64();
                    let tick = c.u64();
                    let x = c.f64();
                    let y = c.f64();
                    let d = c.u8();
                    let discrete = Discrete::from_index(d).ok_or_else(|| bad("discrete action out of range"))?;
                    let reward = c.f64();
                    let mass = c.f64();
                    let has_hash = c.u8();
                    let hash = c.u64();
                    records.push(Record::Step(StepRecord {
                        step,
                        tick,
                        action: ActionCommand {
                            cursor: Vec2::new(x, y),
                            discrete,
                        },
                        reward,
                        mass,
                        hash: (has_hash != 0).then_some(hash),
                    }));
                }
                RESET_TAG if c.remaining() >= RESET_LEN => {
                    let episode = c.u64();
                    let hash = c.u64();
                    records.push(Record::Reset { episode, hash });
                }
                STEP_TAG | RESET_TAG => {
                    truncated = true;
                    break;
                }
                INDEX_TAG => {
                    if c.remaining() < 8 {
                        truncated = true;
                        break;
                    }
                    let count = c.u64() as usize;
                    if c.remaining() != count.saturating_mul(16).saturating_add(16) {
                        truncated = true;
                        break;
                    }
                    let entries: Vec<(u64, u64)> = (0..count).map(|_| (c.u64(), c.u64())).collect();
                    let offset = c.u64();
                    if offset != record_start as u64 || &bytes[c.pos..] != INDEX_MAGIC {
                        return Err(bad("trailer does not match its offset or magic"));
                    }
                    let hashed: Vec<(u64, u64)> = records
                        .iter()
                        .filter_map(|r| match r {
                            Record::Step(s) => s.hash.map(|h| (s.step, h)),
                            Record::Reset { .. } => None,
                        })
                        .collect();
                    if hashed != entries {
                        return Err(bad("hash index disagrees with the step records"));
                    }
                    index = Some(entries);
                    break;
                }
                other => return Err(HarnessError::Format(format!("unknown record tag {other:#04x}"))),
            }
        }
        Ok(Self {
            header,
            records,
            index,
            truncated,
        })
    }

    pub fn steps(&self) -> impl Iterator<Item = &StepRecord> {
        self.records.iter().filter_map(|r| match r {
            Record::Step(s) => Some(s),
            Record::Reset { .. } => None,
        })
    }

    pub fn total_reward(&self) -> f64 {
        self.steps().map(|s| s.reward).sum()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = TrajectoryWriter::new(Vec::new(), &self.header)?;
        for r in &self.records {
            w.push(r)?;
        }
        w.finish()
    }
}

/// Drives an [`Env`] and logs every decision.
pub struct Recorder<W: Write> {
    env: Env,
    header: TrajectoryHeader,
    writer: Option<TrajectoryWriter<W>>,
    records: Option<Vec<Record>>,
    step: u64,
}

impl<W: Write> Recorder<W> {
    /// Starts recording from the env's current state. `keep` additionally
    /// keeps the records in memory.
    pub fn new(env: Env, hash_every: u64, note: &str, sink: Option<W>, keep: bool) -> Result<Self> {
        let header = TrajectoryHeader::for_env(&env, hash_every, note);
        let writer = sink.map(|w| TrajectoryWriter::new(w, &header)).transpose()?;
        Ok(Self {
            env,
            header,
            writer,
            records: keep.then(Vec::new),
            step: 0,
        })
    }

    pub fn header(&self) -> &TrajectoryHeader {
        &self.header
    }

    pub fn env(&self) -> &Env {
        &self.env
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    fn log(&mut self, record: Record) -> Result<()> {
        if let Some(w) = &mut self.writer {
            w.push(&record)?;
        }
        if let Some(r) = &mut self.records {
            r.push(record);
        }
        Ok(())
    }

    pub fn step(&mut self, action: ActionCommand) -> Result<Transition> {
        let t = self.env.advance(action)?;
        self.step += 1;
        let ended = t.terminated || t.truncated;
        let hash = (ended || self.step.is_multiple_of(self.header.hash_every)).then(|| self.env.world().state_hash());
        self.log(Record::Step(StepRecord {
            step: self.step,
            tick: t.info.tick,
            action,
            reward: t.reward,
            mass: t.info.mass,
            hash,
        }))?;
        Ok(t)
    }

    pub fn reset(&mut self) -> Result<Observation> {
        let obs = self.env.reset()?;
        let hash = self.env.world().state_hash();
        self.log(Record::Reset {
            episode: self.env.episode(),
            hash,
        })?;
        Ok(obs)
    }

    /// Finishes the file (if any) and returns the in-memory trajectory (if
    /// kept) along with the sink.
    pub fn finish(self) -> Result<(Option<Trajectory>, Option<W>)> {
        let sink = self.writer.map(|w| w.finish()).transpose()?;
        let traj = self.records.map(|records| {
            let index = records
                .iter()
                .filter_map(|r| match r {
                    Record::Step(s) => s.hash.map(|h| (s.step, h)),
                    Record::Reset { .. } => None,
                })
                .collect();
            Trajectory {
                header: self.header,
                records,
                index: Some(index),
                truncated: false,
            }
        });
        Ok((traj, sink))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Divergence {
    /// Step at which the mismatch was seen; 0 for the initial state.
    pub step: u64,
    pub tick: u64,
    pub field: &'static str,
    pub expected: String,
    pub actual: String,
}

impl std::fmt::Display for Divergence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "diverged at step {} (tick {}): {} expected {} got {}",
            self.step, self.tick, self.field, self.expected, self.actual
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplayReport {
    pub steps: u64,
    pub resets: u64,
    pub hashes_checked: u64,
    pub indexed: bool,
    pub truncated: bool,
    pub divergence: Option<Divergence>,
}

impl ReplayReport {
    pub fn ok(&self) -> bool {
        self.divergence.is_none()
    }
}

fn hex(v: u64) -> String {
    format!("{v:#018x}")
}

/// Rebuilds the env from the header and re-applies every recorded action,
/// stopping at the first mismatch.
pub fn replay(traj: &Trajectory) -> Result<ReplayReport> {
    let h = &traj.header;
    let mut report = ReplayReport {
        steps: 0,
        resets: 0,
        hashes_checked: 0,
        indexed: traj.index.is_some(),
        truncated: traj.truncated,
        divergence: None,
    };
    let mut env = h.build_env()?;
    let mismatch = |step, tick, field, expected: String, actual: String| {
        Some(Divergence {
            step,
            tick,
            field,
            expected,
            actual,
        })
    };

    let digest = config_digest(&env.world().config);
    if digest != h.config_digest {
        report.divergence = mismatch(0, 0, "config_digest", hex(h.config_digest), hex(digest));
        return Ok(report);
    }
    let initial = env.world().state_hash();
    report.hashes_checked += 1;
    if initial != h.initial_hash {
        report.divergence = mismatch(0, 0, "state_hash", hex(h.initial_hash), hex(initial));
        return Ok(report);
    }

    for record in &traj.records {
        let tick = env.world().tick;
        match record {
            Record::Reset { hash, .. } => {
                if let Err(e) = env.reset() {
                    report.divergence = mismatch(env.steps(), tick, "reset", "ok".into(), e.to_string());
                    break;
                }
                report.resets += 1;
                report.hashes_checked += 1;
                let actual = env.world().state_hash();
                if actual != *hash {
                    report.divergence = mismatch(env.steps(), tick, "state_hash", hex(*hash), hex(actual));
                    break;
                }
            }
            Record::Step(s) => {
                let t = match env.advance(s.action) {
                    Ok(t) => t,
                    Err(e) => {
                        report.divergence = mismatch(s.step, tick, "step", "ok".into(), e.to_string());
                        break;
                    }
                };
                report.steps += 1;
                let tick = t.info.tick;
                let checks = [
                    ("tick", s.tick == tick, s.tick.to_string(), tick.to_string()),
                    (
                        "reward",
                        s.reward.to_bits() == t.reward.to_bits(),
                        s.reward.to_string(),
                        t.reward.to_string(),
                    ),
                    (
                        "mass",
                        s.mass.to_bits() == t.info.mass.to_bits(),
                        s.mass.to_string(),
                        t.info.mass.to_string(),
                    ),
                ];
                if let Some((field, _, e, a)) = checks.into_iter().find(|c| !c.1) {
                    report.divergence = mismatch(s.step, tick, field, e, a);
                    break;
                }
                if let Some(expected) = s.hash {
                    report.hashes_checked += 1;
                    let actual = env.world().state_hash();
                    if actual != expected {
                        report.divergence = mismatch(s.step, tick, "state_hash", hex(expected), hex(actual));
                        break;
                    }
                }
            }
        }
    }
    Ok(report)
}
