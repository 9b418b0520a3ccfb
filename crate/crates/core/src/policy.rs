//! Simple fixed policies for driving an [`Env`](crate::env::Env) from tools
//! and tests.

use serde::{Deserialize, Serialize};

use crate::bots::heuristic_target;
use crate::dynamics::Discrete;
use crate::entity::{BotBrain, BotKind};
use crate::env::{ActionCommand, Env};
use crate::geometry::Vec2;
use crate::observation::compute_viewport;
use crate::rng::{WorldRng, POLICY_STREAM};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    /// Uniform cursor rounded to f32, and uniform choice among none, split
    /// and eject.
    Random,
    /// Cursor on the viewport centre, never acts.
    Stationary,
    /// Plays the agent with a heuristic bot's rule.
    Bot(BotKind),
}

impl std::str::FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(PolicyKind::Random),
            "stationary" => Ok(PolicyKind::Stationary),
            other => match other.strip_prefix("bot:") {
                Some(kind) => Ok(PolicyKind::Bot(kind.parse()?)),
                None => Err(format!("unknown policy `{other}` (expected random, stationary or bot:<kind>)")),
            },
        }
    }
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PolicyKind::Random => f.write_str("random"),
            PolicyKind::Stationary => f.write_str("stationary"),
            PolicyKind::Bot(k) => write!(f, "bot:{}", k.name()),
        }
    }
}

pub struct Policy {
    kind: PolicyKind,
    rng: WorldRng,
}

impl Policy {
    /// The random policy draws from its own stream so it never perturbs the
    /// world generator.
    pub fn new(kind: PolicyKind, seed: u64) -> Self {
        Self {
            kind,
            rng: WorldRng::new(seed, POLICY_STREAM),
        }
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn act(&mut self, env: &Env) -> ActionCommand {
        match self.kind {
            PolicyKind::Random => {
                let x = self.rng.uniform(-1.0, 1.0) as f32 as f64;
                let y = self.rng.uniform(-1.0, 1.0) as f32 as f64;
                let d = Discrete::from_index(self.rng.below(3) as u8).expect("index below 3");
                ActionCommand::new(x, y, d)
            }
            PolicyKind::Stationary => ActionCommand::default(),
            PolicyKind::Bot(kind) => {
                let world = env.world();
                let me = env.agent();
                let BotBrain::Heuristic {
                    hunt_radius,
                    shy_radius,
                    ..
                } = BotBrain::heuristic(kind)
                else {
                    unreachable!("heuristic constructor")
                };
                let target = heuristic_target(world, me, kind, hunt_radius, shy_radius);
                let c = compute_viewport(world, me).world_to_cursor(target);
                let m = c.x.abs().max(c.y.abs());
                let c = if m > 1.0 { c * (1.0 / m) } else { c };
                ActionCommand {
                    cursor: Vec2::new(c.x.clamp(-1.0, 1.0), c.y.clamp(-1.0, 1.0)),
                    discrete: Discrete::None,
                }
            }
        }
    }
}
