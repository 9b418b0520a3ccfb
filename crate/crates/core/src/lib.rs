//! Deterministic agar-style continual-learning environment: world model,
//! tick pipeline, observations, heuristic bots, scenario presets and a
//! batched runner.

pub mod batch;
pub mod bots;
pub mod config;
pub mod dynamics;
pub mod entity;
pub mod env;
pub mod error;
pub mod geometry;
pub mod observation;
pub mod policy;
pub mod rng;
pub mod scenario;
pub mod spatial;
pub mod world;

pub use config::WorldConfig;
pub use dynamics::{step_tick, ControlInput, Discrete, TickEvents};
pub use env::{make_env, make_named, ActionCommand, Env, EnvOptions, StepResult};
pub use error::{EnvError, ScenarioError, StepError, WorldError};
pub use geometry::{radius_of, speed_of, Vec2};
pub use observation::{ObsMode, Observation};
pub use scenario::{scenario, scenario_library, ScenarioSpec};
pub use world::{create_world, WorldState};
