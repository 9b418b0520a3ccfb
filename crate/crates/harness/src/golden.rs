//! Golden fixtures: short scripted runs whose hash and reward sequences are
//! frozen in `fixtures/golden`. Regenerate only with `agarcl golden --out`.

use std::path::{Path, PathBuf};

use agarcl_core::policy::{Policy, PolicyKind};
use agarcl_core::{make_named, ActionCommand, Discrete, EnvOptions, ObsMode};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::trajectory::{Divergence, ReplayReport};

pub const GOLDEN_FORMAT: &str = "agarcl-golden";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldenFixture {
    pub format: String,
    pub name: String,
    pub scenario: String,
    pub seed: u64,
    pub frame_skip: u32,
    pub noise_std: Option<f64>,
    pub policy: String,
    /// `(x, y, discrete)` per decision.
    pub actions: Vec<(f64, f64, u8)>,
    /// Initial state hash, then the hash after every decision.
    pub hashes: Vec<u64>,
    /// Running reward total after every decision.
    pub reward_sums: Vec<f64>,
}

pub struct GoldenSpec {
    pub name: &'static str,
    pub scenario: &'static str,
    pub seed: u64,
    pub steps: usize,
    pub policy: &'static str,
    pub frame_skip: u32,
    pub noise_std: Option<f64>,
}

pub const GOLDEN_SET: &[GoldenSpec] = &[
    GoldenSpec {
        name: "full-random",
        scenario: "full",
        seed: 1234,
        steps: 300,
        policy: "random",
        frame_skip: 4,
        noise_std: None,
    },
    GoldenSpec {
        name: "full-easy-random-fs1",
        scenario: "full-easy",
        seed: 5,
        steps: 600,
        policy: "random",
        frame_skip: 1,
        noise_std: None,
    },
    GoldenSpec {
        name: "full-128-aggressive",
        scenario: "full-128",
        seed: 7,
        steps: 250,
        policy: "bot:aggressive",
        frame_skip: 4,
        noise_std: Some(0.3),
    },
    GoldenSpec {
        name: "mini-3-stationary",
        scenario: "mini-3",
        seed: 3,
        steps: 400,
        policy: "stationary",
        frame_skip: 4,
        noise_std: None,
    },
    GoldenSpec {
        name: "mini-4c-random",
        scenario: "mini-4c",
        seed: 11,
        steps: 400,
        policy: "random",
        frame_skip: 4,
        noise_std: None,
    },
    GoldenSpec {
        name: "mini-7-large-dense-hungry",
        scenario: "mini-7-large-dense",
        seed: 21,
        steps: 400,
        policy: "bot:hungry",
        frame_skip: 4,
        noise_std: Some(0.0),
    },
    GoldenSpec {
        name: "mini-9-random",
        scenario: "mini-9",
        seed: 77,
        steps: 300,
        policy: "random",
        frame_skip: 4,
        noise_std: None,
    },
];

fn options(frame_skip: u32, noise_std: Option<f64>) -> EnvOptions {
    EnvOptions {
        frame_skip,
        obs_mode: ObsMode::Symbolic,
        noise_std,
        ..EnvOptions::default()
    }
}

/// Plays the fixture's policy until `steps` decisions or the end of the episode.
pub fn generate(spec: &GoldenSpec) -> Result<GoldenFixture> {
    let kind: PolicyKind = spec.policy.parse().map_err(HarnessError::Invalid)?;
    let mut env = make_named(spec.scenario, spec.seed, options(spec.frame_skip, spec.noise_std))?;
    let mut pi = Policy::new(kind, spec.seed);
    let mut fx = GoldenFixture {
        format: GOLDEN_FORMAT.into(),
        name: spec.name.into(),
        scenario: spec.scenario.into(),
        seed: spec.seed,
        frame_skip: spec.frame_skip,
        noise_std: spec.noise_std,
        policy: spec.policy.into(),
        actions: Vec::new(),
        hashes: vec![env.world().state_hash()],
        reward_sums: Vec::new(),
    };
    let mut sum = 0.0;
    while fx.actions.len() < spec.steps && !env.is_done() {
        let a = pi.act(&env);
        sum += env.advance(a)?.reward;
        fx.actions.push((a.cursor.x, a.cursor.y, a.discrete.index()));
        fx.hashes.push(env.world().state_hash());
        fx.reward_sums.push(sum);
    }
    Ok(fx)
}

impl GoldenFixture {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let fx: Self = serde_json::from_str(&text)?;
        if fx.format != GOLDEN_FORMAT {
            return Err(HarnessError::Format(format!("{}: not a golden fixture", path.display())));
        }
        if fx.hashes.len() != fx.actions.len() + 1 || fx.reward_sums.len() != fx.actions.len() {
            return Err(HarnessError::Format(format!("{}: sequence lengths disagree", path.display())));
        }
        Ok(fx)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| HarnessError::io(path, e))
    }
}

pub fn verify_fixture(fx: &GoldenFixture) -> Result<ReplayReport> {
    let mut env = make_named(&fx.scenario, fx.seed, options(fx.frame_skip, fx.noise_std))?;
    let mut report = ReplayReport {
        steps: 0,
        resets: 0,
        hashes_checked: 0,
        indexed: true,
        truncated: false,
        divergence: None,
    };
    let diverge = |step: u64, tick: u64, field: &'static str, e: String, a: String| {
        Some(Divergence {
            step,
            tick,
            field,
            expected: e,
            actual: a,
        })
    };

    let h0 = env.world().state_hash();
    report.hashes_checked += 1;
    if fx.hashes.first() != Some(&h0) {
        report.divergence = diverge(0, 0, "state_hash", format!("{:?}", fx.hashes.first()), h0.to_string());
        return Ok(report);
    }
    let mut sum = 0.0;
    for (i, &(x, y, d)) in fx.actions.iter().enumerate() {
        let step = i as u64 + 1;
        let discrete = Discrete::from_index(d).ok_or_else(|| HarnessError::Format(format!("discrete {d}")))?;
        let tick = env.world().tick;
        let t = match env.advance(ActionCommand::new(x, y, discrete)) {
            Ok(t) => t,
            Err(e) => {
                report.divergence = diverge(step, tick, "step", "ok".into(), e.to_string());
                return Ok(report);
            }
        };
        report.steps += 1;
        sum += t.reward;
        let h = env.world().state_hash();
        report.hashes_checked += 1;
        if h != fx.hashes[i + 1] {
            report.divergence = diverge(step, t.info.tick, "state_hash", fx.hashes[i + 1].to_string(), h.to_string());
            return Ok(report);
        }
        if sum.to_bits() != fx.reward_sums[i].to_bits() {
            report.divergence = diverge(step, t.info.tick, "reward_sum", fx.reward_sums[i].to_string(), sum.to_string());
            return Ok(report);
        }
    }
    Ok(report)
}

pub fn default_fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join("golden")
}

pub fn fixture_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| HarnessError::io(dir, e))? {
        let path = entry.map_err(|e| HarnessError::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "json") {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// Regenerates the whole set into `dir`.
pub fn write_golden_set(dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    GOLDEN_SET
        .iter()
        .map(|spec| {
            let path = dir.join(format!("{}.json", spec.name));
            generate(spec)?.write(&path)?;
            Ok(path)
        })
        .collect()
}
