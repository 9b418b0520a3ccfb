use serde::{Deserialize, Serialize};

use crate::geometry::{radius, Vec2};

/// Mass of a pellet.
pub const PELLET_MASS: f64 = 1.0;
/// Mass of a virus.
pub const VIRUS_MASS: f64 = 100.0;
/// Maximum number of cells a player may control.
pub const CELL_CAP: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Cell,
    Pellet,
    Virus,
    Blob,
}

impl EntityKind {
    pub(crate) fn tag(self) -> u8 {
        match self {
            EntityKind::Cell => 0,
            EntityKind::Pellet => 1,
            EntityKind::Virus => 2,
            EntityKind::Blob => 3,
        }
    }
}

/// Identity of an entity. Serials come from one world-wide counter and are
/// never reused, so ordering by serial is ordering by creation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EntityId {
    pub kind: EntityKind,
    pub serial: u64,
}

impl PartialOrd for EntityId {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EntityId {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.serial
            .cmp(&other.serial)
            .then(self.kind.cmp(&other.kind))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub id: EntityId,
    pub owner: usize,
    pub mass: f64,
    pub position: Vec2,
    /// Displacement applied during the last movement step, world-units/tick.
    pub velocity: Vec2,
    /// Residual boost from a split or virus pop, world-units/tick.
    pub split_impulse: Vec2,
    pub merge_ready_tick: u64,
    pub created_tick: u64,
}

impl Cell {
    pub fn radius(&self) -> f64 {
        radius(self.mass)
    }

    /// Whether `point` lies strictly inside this cell's circle.
    pub fn contains(&self, point: Vec2) -> bool {
        let r = self.radius();
        self.position.distance_squared(point) < r * r
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pellet {
    pub id: EntityId,
    pub position: Vec2,
}

impl Pellet {
    pub fn radius(&self) -> f64 {
        radius(PELLET_MASS)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Virus {
    pub id: EntityId,
    pub position: Vec2,
    pub velocity: Vec2,
    pub feed_count: u32,
    /// Direction of the most recent feeding blob.
    pub last_feed_dir: Vec2,
}

impl Virus {
    pub fn radius(&self) -> f64 {
        radius(VIRUS_MASS)
    }

    pub fn contains(&self, point: Vec2) -> bool {
        let r = self.radius();
        self.position.distance_squared(point) < r * r
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EjectedBlob {
    pub id: EntityId,
    pub position: Vec2,
    pub velocity: Vec2,
    pub mass: f64,
    pub source_owner: usize,
}

impl EjectedBlob {
    pub fn radius(&self) -> f64 {
        radius(self.mass)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BotKind {
    Hungry,
    HungryShy,
    Aggressive,
    AggressiveShy,
}

impl BotKind {
    pub const ALL: [BotKind; 4] = [
        BotKind::Hungry,
        BotKind::HungryShy,
        BotKind::Aggressive,
        BotKind::AggressiveShy,
    ];

    pub fn is_shy(self) -> bool {
        matches!(self, BotKind::HungryShy | BotKind::AggressiveShy)
    }

    pub fn is_aggressive(self) -> bool {
        matches!(self, BotKind::Aggressive | BotKind::AggressiveShy)
    }

    pub fn name(self) -> &'static str {
        match self {
            BotKind::Hungry => "hungry",
            BotKind::HungryShy => "hungry_shy",
            BotKind::Aggressive => "aggressive",
            BotKind::AggressiveShy => "aggressive_shy",
        }
    }
}

impl std::str::FromStr for BotKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").to_ascii_lowercase().as_str() {
            "hungry" => Ok(BotKind::Hungry),
            "hungry_shy" => Ok(BotKind::HungryShy),
            "aggressive" => Ok(BotKind::Aggressive),
            "aggressive_shy" => Ok(BotKind::AggressiveShy),
            other => Err(format!("unknown bot kind `{other}`")),
        }
    }
}

fn default_hunt_radius() -> f64 {
    BotBrain::DEFAULT_HUNT_RADIUS
}

fn default_shy_radius() -> f64 {
    BotBrain::DEFAULT_SHY_RADIUS
}

/// How a non-learning player chooses its cursor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum BotBrain {
    Heuristic {
        kind: BotKind,
        #[serde(default = "default_hunt_radius")]
        hunt_radius: f64,
        #[serde(default = "default_shy_radius")]
        shy_radius: f64,
    },
    /// Holds the cursor on its own centroid.
    Stationary,
}

impl BotBrain {
    pub const DEFAULT_HUNT_RADIUS: f64 = 100.0;
    pub const DEFAULT_SHY_RADIUS: f64 = 80.0;

    pub fn heuristic(kind: BotKind) -> Self {
        BotBrain::Heuristic {
            kind,
            hunt_radius: Self::DEFAULT_HUNT_RADIUS,
            shy_radius: Self::DEFAULT_SHY_RADIUS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlayerState {
    pub index: usize,
    pub cells: Vec<Cell>,
    pub virus_eat_streak: u32,
    pub last_virus_eat_tick: Option<u64>,
    pub decay_multiplier: f64,
    pub lifetime_deaths: u64,
    pub is_learning_agent: bool,
    pub bot: Option<BotBrain>,
}

impl PlayerState {
    pub fn total_mass(&self) -> f64 {
        self.cells.iter().map(|c| c.mass).sum()
    }

    pub fn is_alive(&self) -> bool {
        !self.cells.is_empty()
    }

    /// Mass-weighted centroid of the player's cells.
    pub fn centroid(&self) -> Option<Vec2> {
        let total = self.total_mass();
        if self.cells.is_empty() || total <= 0.0 {
            return None;
        }
        let mut acc = Vec2::ZERO;
        for c in &self.cells {
            acc += c.position * c.mass;
        }
        Some(acc * (1.0 / total))
    }

    pub fn largest_mass(&self) -> f64 {
        self.cells.iter().map(|c| c.mass).fold(0.0, f64::max)
    }
}
