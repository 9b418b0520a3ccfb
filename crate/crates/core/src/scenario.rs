//! Named environment presets and the catalog they are loaded from.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::config::{PelletPlacement, PlayerSpec, WorldConfig};
use crate::entity::{BotBrain, CELL_CAP};
use crate::error::ScenarioError;
use crate::geometry::Vec2;

pub const SCHEMA_VERSION: u32 = 1;

const CATALOG_TOML: &str = include_str!("../scenarios/catalog.toml");

/// Which deaths end an episode.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    #[default]
    Never,
    AgentEaten,
    /// Any player (agent or bot) being eaten.
    AnyEaten,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EpisodeMode {
    Episodic {
        max_steps: u64,
        #[serde(default)]
        terminate_on: Termination,
    },
    Continual {
        /// Runs may stop once the agent's total mass reaches this.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        truncate_at_mass: Option<f64>,
    },
}

impl EpisodeMode {
    pub fn is_episodic(&self) -> bool {
        matches!(self, EpisodeMode::Episodic { .. })
    }

    pub fn max_steps(&self) -> Option<u64> {
        match self {
            EpisodeMode::Episodic { max_steps, .. } => Some(*max_steps),
            EpisodeMode::Continual { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentSetup {
    pub initial_mass: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec2>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BotGroup {
    pub brain: BotBrain,
    pub count: usize,
    pub initial_mass: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec2>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub mode: EpisodeMode,
    pub agent: AgentSetup,
    #[serde(default)]
    pub bots: Vec<BotGroup>,
    /// World parameters; its `players` list is ignored in favour of
    /// `agent` and `bots`.
    #[serde(default)]
    pub world: WorldConfig,
}

#[derive(Serialize, Deserialize)]
struct CatalogFile {
    schema_version: u32,
    #[serde(default)]
    scenario: Vec<ScenarioSpec>,
}

impl ScenarioSpec {
    /// Full world configuration for one seed: the agent is player 0 and bots
    /// follow in catalog order.
    pub fn world_config(&self, seed: u64) -> WorldConfig {
        let mut cfg = self.world.clone();
        cfg.seed = seed;
        let mut agent = PlayerSpec::agent(self.agent.initial_mass);
        agent.start = self.agent.start;
        cfg.players = vec![agent];
        for g in &self.bots {
            for _ in 0..g.count {
                let mut bot = PlayerSpec::bot(g.initial_mass, g.brain);
                bot.start = g.start;
                cfg.players.push(bot);
            }
        }
        cfg
    }

    pub fn bot_count(&self) -> usize {
        self.bots.iter().map(|g| g.count).sum()
    }

    /// Serializes as a standalone scenario file.
    pub fn to_toml(&self) -> String {
        let file = CatalogFile {
            schema_version: SCHEMA_VERSION,
            scenario: vec![self.clone()],
        };
        toml::to_string(&file).expect("scenario is always representable")
    }

    /// Parses a file holding exactly one scenario.
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let mut all = parse_catalog(text)?;
        if all.len() != 1 {
            return Err(ScenarioError::Parse(format!(
                "expected one scenario, found {}",
                all.len()
            )));
        }
        Ok(all.remove(0))
    }
}

/// Parses a catalog file and checks each preset builds a valid world.
pub fn parse_catalog(text: &str) -> Result<Vec<ScenarioSpec>, ScenarioError> {
    #[derive(Deserialize)]
    struct Version {
        schema_version: u32,
    }
    let v: Version = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    if v.schema_version != SCHEMA_VERSION {
        return Err(ScenarioError::SchemaVersion {
            found: v.schema_version,
            expected: SCHEMA_VERSION,
        });
    }
    let file: CatalogFile = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    Ok(file.scenario)
}

/// Every shipped preset.
pub fn scenario_library() -> &'static [ScenarioSpec] {
    static LIBRARY: OnceLock<Vec<ScenarioSpec>> = OnceLock::new();
    LIBRARY.get_or_init(|| parse_catalog(CATALOG_TOML).expect("embedded catalog parses"))
}

pub fn scenario_names() -> Vec<&'static str> {
    scenario_library().iter().map(|s| s.name.as_str()).collect()
}

/// Looks up a preset by name.
pub fn scenario(name: &str) -> Result<ScenarioSpec, ScenarioError> {
    scenario_library()
        .iter()
        .find(|s| s.name == name)
        .cloned()
        .ok_or_else(|| ScenarioError::Unknown(name.to_string()))
}

/// Reference values each preset must carry.
#[derive(Clone, Copy, Debug)]
pub struct ExpectedPreset {
    pub name: &'static str,
    pub max_steps: Option<u64>,
    pub max_pellets: usize,
    pub arena: f64,
    pub agent_mass: f64,
    pub decay: bool,
    pub square_path: bool,
    pub min_viruses: usize,
    pub bots: usize,
    pub stationary_bot_mass: Option<f64>,
    pub pellet_regen_interval: u64,
}

const fn preset(
    name: &'static str,
    max_steps: Option<u64>,
    max_pellets: usize,
    arena: f64,
    agent_mass: f64,
    decay: bool,
    square_path: bool,
) -> ExpectedPreset {
    ExpectedPreset {
        name,
        max_steps,
        max_pellets,
        arena,
        agent_mass,
        decay,
        square_path,
        min_viruses: 0,
        bots: 0,
        stationary_bot_mass: None,
        pellet_regen_interval: 600,
    }
}

const fn with_bots(p: ExpectedPreset, bots: usize, viruses: usize) -> ExpectedPreset {
    ExpectedPreset {
        bots,
        min_viruses: viruses,
        ..p
    }
}

pub const EXPECTED_PRESETS: &[ExpectedPreset] = &[
    preset("mini-1", Some(500), 500, 200.0, 25.0, false, true),
    preset("mini-2", Some(500), 500, 200.0, 25.0, true, true),
    preset("mini-3", Some(500), 500, 200.0, 1000.0, true, true),
    preset("mini-4", Some(3000), 500, 200.0, 25.0, false, false),
    preset("mini-5", Some(3000), 500, 200.0, 25.0, true, false),
    preset("mini-6", Some(3000), 500, 200.0, 1000.0, true, false),
    preset("mini-1c", None, 500, 200.0, 25.0, false, true),
    preset("mini-2c", None, 500, 200.0, 25.0, true, true),
    preset("mini-3c", None, 500, 200.0, 1000.0, true, true),
    preset("mini-4c", None, 500, 200.0, 25.0, false, false),
    preset("mini-5c", None, 500, 200.0, 25.0, true, false),
    preset("mini-6c", None, 500, 200.0, 1000.0, true, false),
    with_bots(preset("mini-7-large-dense", Some(10000), 500, 350.0, 25.0, true, false), 1, 0),
    with_bots(preset("mini-7-small-sparse", Some(10000), 250, 200.0, 25.0, true, false), 1, 0),
    with_bots(preset("mini-7-small-sparse-200", Some(10000), 200, 200.0, 25.0, true, false), 1, 0),
    with_bots(preset("mini-8-large-dense", Some(10000), 500, 350.0, 25.0, true, false), 1, 0),
    with_bots(preset("mini-8-small-sparse", Some(10000), 250, 200.0, 25.0, true, false), 1, 0),
    with_bots(preset("mini-8-small-sparse-200", Some(10000), 200, 200.0, 25.0, true, false), 1, 0),
    ExpectedPreset {
        stationary_bot_mass: Some(5000.0),
        ..with_bots(preset("mini-9", Some(1000), 0, 350.0, 3000.0, false, false), 1, 11)
    },
    with_bots(preset("full", None, 500, 350.0, 25.0, true, false), 8, 10),
    with_bots(preset("full-128", None, 500, 128.0, 25.0, true, false), 8, 10),
    ExpectedPreset {
        pellet_regen_interval: 120,
        ..with_bots(preset("full-easy", None, 1024, 350.0, 25.0, true, false), 8, 10)
    },
];

/// One mismatch found by [`validate_catalog`].
#[derive(Clone, Debug, PartialEq)]
pub struct CatalogIssue {
    pub scenario: String,
    pub field: &'static str,
    pub detail: String,
}

impl std::fmt::Display for CatalogIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}: {}", self.scenario, self.field, self.detail)
    }
}

/// Checks presets against world invariants and the reference table.
/// An empty result means the catalog is consistent.
pub fn validate_catalog(specs: &[ScenarioSpec]) -> Vec<CatalogIssue> {
    let mut issues = Vec::new();
    let mut push = |s: &str, field: &'static str, detail: String| {
        issues.push(CatalogIssue {
            scenario: s.to_string(),
            field,
            detail,
        })
    };
    for exp in EXPECTED_PRESETS {
        if !specs.iter().any(|s| s.name == exp.name) {
            push(exp.name, "name", "preset missing from catalog".into());
        }
    }
    for (i, s) in specs.iter().enumerate() {
        if specs[..i].iter().any(|o| o.name == s.name) {
            push(&s.name, "name", "duplicate preset name".into());
        }
        let cfg = s.world_config(0);
        if let Err(e) = cfg.validate() {
            push(&s.name, "world", e.to_string());
        }
        if cfg.cell_cap != CELL_CAP {
            push(&s.name, "cell_cap", format!("expected {CELL_CAP}, found {}", cfg.cell_cap));
        }
        if s.mode.max_steps() == Some(0) {
            push(&s.name, "mode.max_steps", "episodic presets need max_steps > 0".into());
        }
        let Some(exp) = EXPECTED_PRESETS.iter().find(|e| e.name == s.name) else {
            continue;
        };
        let mut check = |field: &'static str, ok: bool, detail: String| {
            if !ok {
                push(&s.name, field, detail);
            }
        };
        check(
            "mode.max_steps",
            s.mode.max_steps() == exp.max_steps,
            format!("expected {:?}, found {:?}", exp.max_steps, s.mode.max_steps()),
        );
        check(
            "world.max_pellets",
            cfg.max_pellets == exp.max_pellets,
            format!("expected {}, found {}", exp.max_pellets, cfg.max_pellets),
        );
        check(
            "world.arena",
            cfg.arena_width == exp.arena && cfg.arena_height == exp.arena,
            format!("expected {0}x{0}, found {1}x{2}", exp.arena, cfg.arena_width, cfg.arena_height),
        );
        check(
            "agent.initial_mass",
            s.agent.initial_mass == exp.agent_mass,
            format!("expected {}, found {}", exp.agent_mass, s.agent.initial_mass),
        );
        check(
            "world.initial_mass",
            cfg.initial_mass == 25.0 && cfg.mass_floor == 25.0,
            format!("respawn mass {} and floor {} must both be 25", cfg.initial_mass, cfg.mass_floor),
        );
        check(
            "world.mass_decay_enabled",
            cfg.mass_decay_enabled == exp.decay,
            format!("expected {}", exp.decay),
        );
        check(
            "world.pellet_placement",
            matches!(cfg.pellet_placement, PelletPlacement::SquarePath { .. }) == exp.square_path,
            format!("square path expected: {}", exp.square_path),
        );
        check(
            "world.min_viruses",
            cfg.min_viruses == exp.min_viruses,
            format!("expected {}, found {}", exp.min_viruses, cfg.min_viruses),
        );
        check(
            "world.pellet_regen_interval",
            cfg.pellet_regen_interval == exp.pellet_regen_interval,
            format!("expected {}, found {}", exp.pellet_regen_interval, cfg.pellet_regen_interval),
        );
        check(
            "bots",
            s.bot_count() == exp.bots,
            format!("expected {} bots, found {}", exp.bots, s.bot_count()),
        );
        let stationary = s
            .bots
            .iter()
            .find(|g| g.brain == BotBrain::Stationary)
            .map(|g| g.initial_mass);
        check(
            "bots.stationary",
            stationary == exp.stationary_bot_mass,
            format!("expected stationary bot mass {:?}, found {:?}", exp.stationary_bot_mass, stationary),
        );
    }
    issues
}
