//! World configuration and the tunable rule constants.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::{Deserialize, Serialize};

use crate::entity::{BotBrain, CELL_CAP};
use crate::error::WorldError;
use crate::geometry::Vec2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PelletPlacement {
    Uniform,
    /// Pellets confined to a square ring centred in the arena.
    SquarePath { half_side: f64, band_width: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VirusLayout {
    Uniform,
    /// `count` viruses evenly spaced on the segment from `start` to `end`.
    Line { start: Vec2, end: Vec2, count: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlayerSpec {
    pub initial_mass: f64,
    /// Fixed spawn point; `None` samples one like a respawn.
    #[serde(default)]
    pub start: Option<Vec2>,
    #[serde(default)]
    pub learning: bool,
    #[serde(default)]
    pub bot: Option<BotBrain>,
}

impl PlayerSpec {
    pub fn agent(initial_mass: f64) -> Self {
        Self {
            initial_mass,
            start: None,
            learning: true,
            bot: None,
        }
    }

    pub fn bot(initial_mass: f64, brain: BotBrain) -> Self {
        Self {
            initial_mass,
            start: None,
            learning: false,
            bot: Some(brain),
        }
    }

    pub fn at(mut self, start: Vec2) -> Self {
        self.start = Some(start);
        self
    }
}

/// Constants the game rules leave open. Defaults are the values every shipped
/// scenario uses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Rules {
    /// A cell may eat another only when its mass is at least this multiple.
    pub eat_ratio: f64,
    /// Split boost speed as a multiple of the child's own speed.
    pub split_boost_factor: f64,
    /// Half-life of split impulses and blob/virus velocities, seconds.
    pub impulse_half_life: f64,
    pub merge_base_ticks: u64,
    pub merge_ticks_per_mass: f64,
    pub eject_cost: f64,
    pub blob_mass: f64,
    /// Blob launch speed as a multiple of `speed_of(initial_mass)`.
    pub eject_boost_factor: f64,
    /// Propelled-virus launch speed as a multiple of `speed_of(initial_mass)`.
    pub virus_boost_factor: f64,
    /// Ticks without a virus meal after which the eat streak resets.
    pub virus_streak_reset_ticks: u64,
    /// Number of consecutive virus meals before the decay penalty starts.
    pub virus_penalty_free_streak: u32,
    pub virus_penalty_step: f64,
}

impl Default for Rules {
    fn default() -> Self {
        Self {
            eat_ratio: 1.25,
            split_boost_factor: 2.5,
            impulse_half_life: 0.25,
            merge_base_ticks: 1800,
            merge_ticks_per_mass: 1.2,
            eject_cost: 18.0,
            blob_mass: 14.0,
            eject_boost_factor: 3.0,
            virus_boost_factor: 5.0,
            virus_streak_reset_ticks: 1800,
            virus_penalty_free_streak: 2,
            virus_penalty_step: 0.5,
        }
    }
}

impl Rules {
    pub fn merge_cooldown(&self, mass: f64) -> u64 {
        self.merge_base_ticks + (self.merge_ticks_per_mass * mass).round() as u64
    }

    pub fn decay_multiplier(&self, streak: u32) -> f64 {
        1.0 + self.virus_penalty_step * streak.saturating_sub(self.virus_penalty_free_streak) as f64
    }

    /// Per-tick multiplicative friction on impulses and free-flying velocities.
    pub fn friction(&self) -> f64 {
        0.5f64.powf(1.0 / (self.impulse_half_life * crate::geometry::TICK_RATE))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ViewConfig {
    /// Minimum viewport side, world-units.
    pub base_view: f64,
    pub fov_margin: f64,
    pub grid_pitch: f64,
    pub grid_intensity: f32,
    /// Render the whole arena regardless of the player's size.
    pub fully_observable: bool,
}

impl Default for ViewConfig {
    fn default() -> Self {
        Self {
            base_view: 60.0,
            fov_margin: 1.5,
            grid_pitch: 10.0,
            grid_intensity: 0.2,
            fully_observable: false,
        }
    }
}

/// Every field defaults to the full-game value, so config files only need
/// to list what differs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldConfig {
    pub arena_width: f64,
    pub arena_height: f64,
    pub max_pellets: usize,
    pub pellet_regen_interval: u64,
    pub min_viruses: usize,
    /// Fraction of mass lost per second.
    pub decay_rate: f64,
    pub decay_interval: u64,
    /// Mass of a freshly respawned cell.
    pub initial_mass: f64,
    pub mass_floor: f64,
    pub cell_cap: usize,
    pub virus_split_feeds: u32,
    pub pellet_placement: PelletPlacement,
    pub virus_layout: VirusLayout,
    pub mass_decay_enabled: bool,
    pub virus_regen_enabled: bool,
    pub noise_std: f64,
    pub obs_resolution: usize,
    pub seed: u64,
    #[serde(default)]
    pub players: Vec<PlayerSpec>,
    #[serde(default)]
    pub rules: Rules,
    #[serde(default)]
    pub view: ViewConfig,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            arena_width: 350.0,
            arena_height: 350.0,
            max_pellets: 500,
            pellet_regen_interval: 600,
            min_viruses: 10,
            decay_rate: 0.002,
            decay_interval: 60,
            initial_mass: 25.0,
            mass_floor: 25.0,
            cell_cap: CELL_CAP,
            virus_split_feeds: 7,
            pellet_placement: PelletPlacement::Uniform,
            virus_layout: VirusLayout::Uniform,
            mass_decay_enabled: true,
            virus_regen_enabled: true,
            noise_std: 1.0,
            obs_resolution: 128,
            seed: 0,
            players: vec![PlayerSpec::agent(25.0)],
            rules: Rules::default(),
            view: ViewConfig::default(),
        }
    }
}

impl WorldConfig {
    /// Fraction removed from each cell at every decay application.
    pub fn decay_per_application(&self) -> f64 {
        self.decay_rate * self.decay_interval as f64 / crate::geometry::TICK_RATE
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        let bad = |msg: String| Err(WorldError::InvalidConfig(msg));
        if !(self.arena_width > 0.0 && self.arena_width.is_finite())
            || !(self.arena_height > 0.0 && self.arena_height.is_finite())
        {
            return bad(format!(
                "arena must be positive, got {}x{}",
                self.arena_width, self.arena_height
            ));
        }
        if self.decay_interval == 0 || self.pellet_regen_interval == 0 {
            return bad("decay and pellet regeneration intervals must be positive".into());
        }
        if !self.pellet_regen_interval.is_multiple_of(self.decay_interval) {
            return bad(format!(
                "decay_interval {} must divide pellet_regen_interval {}",
                self.decay_interval, self.pellet_regen_interval
            ));
        }
        if !(0.0..1.0).contains(&self.decay_per_application()) {
            return bad(format!("decay_rate {} out of range", self.decay_rate));
        }
        if self.obs_resolution < 16 {
            return bad(format!(
                "obs_resolution must be at least 16, got {}",
                self.obs_resolution
            ));
        }
        if !(self.mass_floor > 0.0) || self.initial_mass < self.mass_floor {
            return bad(format!(
                "initial_mass {} must be at least mass_floor {} > 0",
                self.initial_mass, self.mass_floor
            ));
        }
        if self.cell_cap == 0 || self.cell_cap > CELL_CAP {
            return bad(format!(
                "cell_cap must be in 1..={CELL_CAP}, got {}",
                self.cell_cap
            ));
        }
        if self.virus_split_feeds == 0 {
            return bad("virus_split_feeds must be at least 1".into());
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return bad(format!("noise_std must be non-negative, got {}", self.noise_std));
        }
        let r = &self.rules;
        if !(r.eat_ratio >= 1.0) || !(r.impulse_half_life > 0.0) || !(r.blob_mass > 0.0) {
            return bad("rule constants out of range".into());
        }
        if r.blob_mass > r.eject_cost {
            return bad("blob_mass must not exceed eject_cost".into());
        }
        if !(self.view.base_view > 0.0) || !(self.view.fov_margin > 1.0) || !(self.view.grid_pitch > 0.0) {
            return bad("view constants out of range".into());
        }
        if let PelletPlacement::SquarePath {
            half_side,
            band_width,
        } = self.pellet_placement
        {
            let limit = self.arena_width.min(self.arena_height) / 2.0;
            if !(half_side > 0.0 && band_width > 0.0 && half_side + band_width / 2.0 <= limit) {
                return bad("square path does not fit the arena".into());
            }
        }
        if self.players.iter().filter(|p| p.learning).count() > 1 {
            return bad("at most one learning agent is supported".into());
        }
        for (i, p) in self.players.iter().enumerate() {
            if p.initial_mass < self.mass_floor || !p.initial_mass.is_finite() {
                return bad(format!("player {i} initial mass {} below floor", p.initial_mass));
            }
            if let Some(s) = p.start {
                if !(0.0..=self.arena_width).contains(&s.x) || !(0.0..=self.arena_height).contains(&s.y)
                {
                    return bad(format!("player {i} start outside the arena"));
                }
            }
            if p.learning == p.bot.is_some() {
                return bad(format!("player {i} must be either the agent or a bot"));
            }
        }
        Ok(())
    }
}
