//! The reinforcement-learning interface: noisy cursor decoding, frame skip,
//! mass-difference reward and episode bookkeeping.

use serde::{Deserialize, Serialize};
use xxhash_rust::xxh3::Xxh3;

use crate::bots::decide_all;
use crate::dynamics::{step_tick, ControlInput, Discrete, TickEvents};
use crate::error::EnvError;
use crate::geometry::Vec2;
use crate::observation::{compute_viewport, ObsMode, Observation};
use crate::rng::{WorldRng, EPISODE_STREAM};
use crate::scenario::{EpisodeMode, ScenarioSpec, Termination};
use crate::world::{create_world, WorldState};

pub const DEFAULT_FRAME_SKIP: u32 = 4;

/// One agent decision.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ActionCommand {
    /// Pointer position in `[-1, 1]^2` relative to the current viewport.
    pub cursor: Vec2,
    pub discrete: Discrete,
}

impl ActionCommand {
    pub fn new(x: f64, y: f64, discrete: Discrete) -> Self {
        Self {
            cursor: Vec2::new(x, y),
            discrete,
        }
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        let ok = |v: f64| v.is_finite() && (-1.0..=1.0).contains(&v);
        if ok(self.cursor.x) && ok(self.cursor.y) {
            Ok(())
        } else {
            Err(EnvError::InvalidAction(format!(
                "cursor ({}, {}) outside [-1, 1]^2",
                self.cursor.x, self.cursor.y
            )))
        }
    }
}

/// How an agent death inside a block is rewarded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RespawnReward {
    /// Plain mass difference: a death costs `death_mass - initial_mass`.
    #[default]
    MassDifference,
    /// A death is credited `death_mass - initial_mass` instead.
    DeathMassLessInitial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvOptions {
    pub frame_skip: u32,
    pub obs_mode: ObsMode,
    /// Overrides the scenario's actuation noise.
    pub noise_std: Option<f64>,
    pub respawn_reward: RespawnReward,
}

impl Default for EnvOptions {
    fn default() -> Self {
        Self {
            frame_skip: DEFAULT_FRAME_SKIP,
            obs_mode: ObsMode::Pixel,
            noise_std: None,
            respawn_reward: RespawnReward::MassDifference,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    /// Agent total mass after the block.
    pub mass: f64,
    pub deaths: u32,
    pub tick: u64,
    pub step: u64,
    /// Digest of every tick's events inside the block.
    pub events_digest: u64,
    /// Sum of the agent's event-ledger mass deltas over the block.
    pub ledger_delta: f64,
    pub ticks_run: u32,
}

/// Outcome of a block without the observation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
    pub info: StepInfo,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
    pub info: StepInfo,
}

pub struct Env {
    spec: ScenarioSpec,
    options: EnvOptions,
    seed: u64,
    episode_seeds: WorldRng,
    world: WorldState,
    agent: usize,
    steps: u64,
    episode: u64,
    done: bool,
}

/// Builds an environment for a preset. Everything downstream is a pure
/// function of `(spec, seed, options)` and the actions.
pub fn make_env(spec: ScenarioSpec, seed: u64, options: EnvOptions) -> Result<Env, EnvError> {
    if options.frame_skip == 0 {
        return Err(EnvError::InvalidAction("frame_skip must be at least 1".into()));
    }
    if let Some(n) = options.noise_std {
        if !(n >= 0.0 && n.is_finite()) {
            return Err(EnvError::InvalidAction(format!("noise_std must be non-negative, got {n}")));
        }
    }
    let mut episode_seeds = WorldRng::new(seed, EPISODE_STREAM);
    let world = build_world(&spec, &options, episode_seeds.next_u64())?;
    let agent = world
        .agent_index()
        .ok_or_else(|| EnvError::Scenario(crate::error::ScenarioError::Invalid {
            name: spec.name.clone(),
            reason: "scenario has no learning agent".into(),
        }))?;
    Ok(Env {
        spec,
        options,
        seed,
        episode_seeds,
        world,
        agent,
        steps: 0,
        episode: 0,
        done: false,
    })
}

/// Looks a preset up by name and builds it.
pub fn make_named(name: &str, seed: u64, options: EnvOptions) -> Result<Env, EnvError> {
    make_env(crate::scenario::scenario(name)?, seed, options)
}

fn build_world(spec: &ScenarioSpec, options: &EnvOptions, world_seed: u64) -> Result<WorldState, EnvError> {
    let mut cfg = spec.world_config(world_seed);
    if let Some(n) = options.noise_std {
        cfg.noise_std = n;
    }
    Ok(create_world(cfg)?)
}

impl Env {
    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    pub fn options(&self) -> &EnvOptions {
        &self.options
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn agent(&self) -> usize {
        self.agent
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn episode(&self) -> u64 {
        self.episode
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn agent_mass(&self) -> f64 {
        self.world.players[self.agent].total_mass()
    }

    pub fn noise_std(&self) -> f64 {
        self.world.config.noise_std
    }

    pub fn observe(&self) -> Observation {
        Observation::render(&self.world, self.agent, self.options.obs_mode)
    }

    /// Starts the next episode with the next seed from the env's stream.
    pub fn reset(&mut self) -> Result<Observation, EnvError> {
        if !self.spec.mode.is_episodic() {
            return Err(EnvError::Protocol("continual scenarios cannot be reset"));
        }
        self.world = build_world(&self.spec, &self.options, self.episode_seeds.next_u64())?;
        self.steps = 0;
        self.episode += 1;
        self.done = false;
        Ok(self.observe())
    }

    /// World point the agent's cells will steer toward for this action,
    /// drawing actuation noise from the world generator.
    fn decode_cursor(&mut self, cursor: Vec2) -> Vec2 {
        let std = self.world.config.noise_std;
        let mut c = cursor;
        if std > 0.0 {
            c.x += std * self.world.rng.standard_normal();
            c.y += std * self.world.rng.standard_normal();
        }
        let c = Vec2::new(c.x.clamp(-1.0, 1.0), c.y.clamp(-1.0, 1.0));
        compute_viewport(&self.world, self.agent).cursor_to_world(c)
    }

    /// Runs one decision block without rendering.
    pub fn advance(&mut self, action: ActionCommand) -> Result<Transition, EnvError> {
        self.advance_with(action, |_| {})
    }

    /// Like [`Env::advance`], handing every tick's events to `on_tick`.
    pub fn advance_with(
        &mut self,
        action: ActionCommand,
        mut on_tick: impl FnMut(&TickEvents),
    ) -> Result<Transition, EnvError> {
        if self.done {
            return Err(EnvError::Protocol("episode is over; reset before stepping"));
        }
        action.validate()?;
        let target = self.decode_cursor(action.cursor);
        let before = self.agent_mass();
        let initial = self.world.config.initial_mass;
        let termination = match self.spec.mode {
            EpisodeMode::Episodic { terminate_on, .. } => terminate_on,
            EpisodeMode::Continual { .. } => Termination::Never,
        };

        let mut digest = Xxh3::new();
        let mut deaths = 0u32;
        let mut death_bonus = 0.0;
        let mut ledger = 0.0;
        let mut terminated = false;
        let mut ticks_run = 0;
        for k in 0..self.options.frame_skip {
            let discrete = if k == 0 { action.discrete } else { Discrete::None };
            let mut controls = decide_all(&self.world);
            controls.push(ControlInput::new(self.agent, target, discrete));
            let events = step_tick(&mut self.world, &controls)?;
            ticks_run += 1;
            events.digest_into(&mut digest);
            ledger += events.mass_delta(self.agent);
            for d in events.deaths.iter().filter(|d| d.player == self.agent) {
                deaths += 1;
                death_bonus += 2.0 * (d.death_mass - initial);
            }
            on_tick(&events);
            terminated = match termination {
                Termination::Never => false,
                Termination::AgentEaten => events.deaths_of(self.agent) > 0,
                Termination::AnyEaten => !events.deaths.is_empty(),
            };
            if terminated {
                break;
            }
        }
        self.steps += 1;

        let after = self.agent_mass();
        let mut reward = after - before;
        if self.options.respawn_reward == RespawnReward::DeathMassLessInitial {
            reward += death_bonus;
        }
        let truncated = !terminated
            && match self.spec.mode {
                EpisodeMode::Episodic { max_steps, .. } => self.steps >= max_steps,
                EpisodeMode::Continual { truncate_at_mass } => truncate_at_mass.is_some_and(|m| after >= m),
            };
        self.done = terminated || truncated;
        Ok(Transition {
            reward,
            terminated,
            truncated,
            info: StepInfo {
                mass: after,
                deaths,
                tick: self.world.tick,
                step: self.steps,
                events_digest: digest.digest(),
                ledger_delta: ledger,
                ticks_run,
            },
        })
    }

    /// One decision: advance the block, then render the post-block world.
    pub fn step(&mut self, action: ActionCommand) -> Result<StepResult, EnvError> {
        let t = self.advance(action)?;
        Ok(StepResult {
            observation: self.observe(),
            reward: t.reward,
            terminated: t.terminated,
            truncated: t.truncated,
            info: t.info,
        })
    }
}
