use std::hint::black_box;
use std::path::{Path, PathBuf};
use std::time::Instant;

use agarcl_core::policy::{Policy, PolicyKind};
use agarcl_core::{make_named, EnvOptions, ObsMode};
use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::golden::{verify_fixture, GoldenFixture};
use crate::trajectory::{replay, Recorder, ReplayReport, Trajectory};

pub const DEFAULT_HASH_EVERY: u64 = 100;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub scenario: String,
    pub seed: u64,
    pub steps: u64,
    pub policy: PolicyKind,
    pub options: EnvOptions,
    pub out: Option<PathBuf>,
    pub hash_every: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub policy: String,
    pub seed: u64,
    pub steps: u64,
    pub ticks: u64,
    pub total_reward: f64,
    pub deaths: u64,
    /// Returns of the episodes that finished during the run.
    pub episode_returns: Vec<f64>,
    /// Return of the episode still in progress when the run stopped.
    pub open_return: f64,
    pub final_mass: f64,
    pub elapsed_secs: f64,
    pub steps_per_sec: f64,
    pub out: Option<PathBuf>,
}

impl RunSummary {
    pub fn mean_episode_return(&self) -> Option<f64> {
        (!self.episode_returns.is_empty())
            .then(|| self.episode_returns.iter().sum::<f64>() / self.episode_returns.len() as f64)
    }
}

/// Plays `steps` decisions with a fixed policy, resetting episodic scenarios
/// whenever an episode ends, and records the trajectory.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunSummary> {
    let env = make_named(&cfg.scenario, cfg.seed, cfg.options.clone())?;
    let sink = match &cfg.out {
        Some(path) => Some(
            std::fs::File::create(path)
                .map(std::io::BufWriter::new)
                .map_err(|e| HarnessError::io(path, e))?,
        ),
        None => None,
    };
    let mut rec = Recorder::new(env, cfg.hash_every, &cfg.policy.to_string(), sink, false)?;
    let with_path = |e: HarnessError| match (&cfg.out, e) {
        (Some(p), HarnessError::Stream(source)) => HarnessError::io(p, source),
        (_, e) => e,
    };
    let mut pi = Policy::new(cfg.policy, cfg.seed);
    let mut ticks = 0;
    let mut total = 0.0;
    let mut deaths = 0u64;
    let mut returns = Vec::new();
    let mut open = 0.0;

    let started = Instant::now();
    for _ in 0..cfg.steps {
        if rec.env().is_done() {
            returns.push(open);
            open = 0.0;
            rec.reset().map_err(with_path)?;
        }
        let action = pi.act(rec.env());
        let t = rec.step(action).map_err(with_path)?;
        total += t.reward;
        open += t.reward;
        deaths += u64::from(t.info.deaths);
        ticks += u64::from(t.info.ticks_run);
    }
    let elapsed = started.elapsed().as_secs_f64();
    if rec.env().is_done() {
        returns.push(open);
        open = 0.0;
    }
    let final_mass = rec.env().agent_mass();
    rec.finish().map_err(with_path)?;

    Ok(RunSummary {
        scenario: cfg.scenario.clone(),
        policy: cfg.policy.to_string(),
        seed: cfg.seed,
        steps: cfg.steps,
        ticks,
        total_reward: total,
        deaths,
        episode_returns: returns,
        open_return: open,
        final_mass,
        elapsed_secs: elapsed,
        steps_per_sec: if elapsed > 0.0 { cfg.steps as f64 / elapsed } else { 0.0 },
        out: cfg.out.clone(),
    })
}

/// Interquartile mean: drop `floor(n / 4)` values from each end of the sorted
/// sample and average the rest.
pub fn iqm(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "iqm of an empty sample");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 4;
    let mid = &v[k..v.len() - k];
    mid.iter().sum::<f64>() / mid.len() as f64
}

#[derive(Clone, Debug)]
pub struct BenchmarkConfig {
    pub scenario: String,
    pub seed: u64,
    pub seconds: f64,
    pub trials: usize,
    pub obs_mode: ObsMode,
    pub frame_skips: Vec<u32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Trial {
    pub steps: u64,
    pub ticks: u64,
    pub secs: f64,
    pub steps_per_sec: f64,
    pub frames_per_sec: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchmarkRow {
    pub frame_skip: u32,
    pub trials: Vec<Trial>,
    pub iqm_steps_per_sec: f64,
    pub iqm_frames_per_sec: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchmarkReport {
    pub scenario: String,
    pub obs_mode: ObsMode,
    pub rows: Vec<BenchmarkRow>,
}

fn trial(cfg: &BenchmarkConfig, frame_skip: u32, index: usize) -> Result<Trial> {
    let options = EnvOptions {
        frame_skip,
        obs_mode: cfg.obs_mode,
        ..EnvOptions::default()
    };
    let seed = cfg.seed.wrapping_add(index as u64);
    let mut env = make_named(&cfg.scenario, seed, options)?;
    let mut pi = Policy::new(PolicyKind::Random, seed);
    let mut steps = 0u64;
    let mut ticks = 0u64;
    let started = Instant::now();
    loop {
        if env.is_done() {
            env.reset()?;
        }
        let r = env.step(pi.act(&env))?;
        black_box(&r.observation);
        steps += 1;
        ticks += u64::from(r.info.ticks_run);
        if steps.is_multiple_of(16) && started.elapsed().as_secs_f64() >= cfg.seconds {
            break;
        }
    }
    let secs = started.elapsed().as_secs_f64();
    Ok(Trial {
        steps,
        ticks,
        secs,
        steps_per_sec: steps as f64 / secs,
        frames_per_sec: ticks as f64 / secs,
    })
}

/// Random-agent throughput with observations rendered every decision.
pub fn cmd_benchmark(cfg: &BenchmarkConfig) -> Result<BenchmarkReport> {
    if cfg.trials == 0 {
        return Err(HarnessError::Invalid("benchmark needs at least one trial".into()));
    }
    let mut rows = Vec::new();
    for &fs in &cfg.frame_skips {
        let trials = (0..cfg.trials).map(|i| trial(cfg, fs, i)).collect::<Result<Vec<_>>>()?;
        let sps: Vec<f64> = trials.iter().map(|t| t.steps_per_sec).collect();
        let fps: Vec<f64> = trials.iter().map(|t| t.frames_per_sec).collect();
        rows.push(BenchmarkRow {
            frame_skip: fs,
            iqm_steps_per_sec: iqm(&sps),
            iqm_frames_per_sec: iqm(&fps),
            trials,
        });
    }
    Ok(BenchmarkReport {
        scenario: cfg.scenario.clone(),
        obs_mode: cfg.obs_mode,
        rows,
    })
}

/// Verifies a trajectory file, or a golden fixture when the path ends in
/// `.json`.
pub fn cmd_replay(path: &Path) -> Result<ReplayReport> {
    if path.extension().is_some_and(|e| e == "json") {
        let fx = GoldenFixture::read(path)?;
        return verify_fixture(&fx);
    }
    replay(&Trajectory::read_path(path)?)
}
