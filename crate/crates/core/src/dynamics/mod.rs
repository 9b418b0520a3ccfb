//! The per-tick update pipeline.
//!
//! Stages run in a fixed order: discrete actions, movement, virus feeding,
//! consumption, virus collisions, merging, decay, regeneration and finally
//! death/respawn. The order is pinned by a golden-hash test.

mod actions;
mod consumption;
mod decay;
mod events;
mod feeding;
mod merge;
mod movement;
mod regen;
mod respawn;
mod viruses;

use serde::{Deserialize, Serialize};

pub use actions::{do_eject, do_split};
pub use consumption::resolve_consumption;
pub use decay::apply_decay;
pub use events::*;
pub use feeding::feed_virus;
pub use merge::merge_pass;
pub use movement::apply_movement;
pub use regen::regeneration_pass;
pub use respawn::death_respawn_pass;
pub use viruses::virus_interaction;

use crate::error::StepError;
use crate::geometry::Vec2;
use crate::world::WorldState;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Discrete {
    #[default]
    None,
    Split,
    Eject,
}

impl Discrete {
    pub fn index(self) -> u8 {
        match self {
            Discrete::None => 0,
            Discrete::Split => 1,
            Discrete::Eject => 2,
        }
    }

    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            0 => Some(Discrete::None),
            1 => Some(Discrete::Split),
            2 => Some(Discrete::Eject),
            _ => None,
        }
    }
}

/// One player's input for one tick, with the cursor already in world space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlInput {
    pub player: usize,
    pub cursor_world: Vec2,
    pub discrete: Discrete,
}

impl ControlInput {
    pub fn new(player: usize, cursor_world: Vec2, discrete: Discrete) -> Self {
        Self {
            player,
            cursor_world,
            discrete,
        }
    }
}

fn validate_controls(world: &WorldState, controls: &[ControlInput]) -> Result<Vec<Vec2>, StepError> {
    let mut cursors: Vec<Option<Vec2>> = vec![None; world.players.len()];
    for c in controls {
        let slot = cursors
            .get_mut(c.player)
            .ok_or(StepError::UnknownPlayer(c.player))?;
        if slot.is_some() {
            return Err(StepError::DuplicateControl(c.player));
        }
        if !world.players[c.player].is_alive() {
            return Err(StepError::DeadPlayer(c.player));
        }
        if !c.cursor_world.is_finite() {
            return Err(StepError::NonFiniteCursor(c.player));
        }
        *slot = Some(c.cursor_world);
    }
    cursors
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.ok_or(StepError::MissingControl(i)))
        .collect()
}

/// Advances the world by one tick. Inputs are validated before anything is
/// mutated; the result depends only on the world (including its generator)
/// and the controls.
pub fn step_tick(world: &mut WorldState, controls: &[ControlInput]) -> Result<TickEvents, StepError> {
    let cursors = validate_controls(world, controls)?;
    world.tick += 1;
    let mut events = TickEvents {
        tick: world.tick,
        ..TickEvents::default()
    };

    let mut ordered: Vec<&ControlInput> = controls.iter().collect();
    ordered.sort_by_key(|c| c.player);
    for c in ordered {
        match c.discrete {
            Discrete::None => {}
            Discrete::Split => do_split(world, c.player, c.cursor_world, &mut events),
            Discrete::Eject => do_eject(world, c.player, c.cursor_world, &mut events),
        }
    }
    apply_movement(world, &cursors);
    feed_virus(world, &mut events);
    resolve_consumption(world, &mut events);
    virus_interaction(world, &mut events);
    merge_pass(world, &mut events);
    apply_decay(world, &mut events);
    regeneration_pass(world, &mut events);
    death_respawn_pass(world, &mut events);
    Ok(events)
}

#[cfg(test)]
pub(crate) mod test_support {
    use crate::config::{PlayerSpec, WorldConfig};
    use crate::entity::{Cell, EntityKind};
    use crate::geometry::Vec2;
    use crate::world::{create_world, WorldState};

    /// An empty 200x200 arena with the given player masses at fixed spots.
    pub fn bare_world(players: &[(f64, Vec2)]) -> WorldState {
        let cfg = WorldConfig {
            arena_width: 200.0,
            arena_height: 200.0,
            max_pellets: 0,
            min_viruses: 0,
            mass_decay_enabled: false,
            virus_regen_enabled: false,
            players: players
                .iter()
                .enumerate()
                .map(|(i, &(m, p))| {
                    let spec = if i == 0 {
                        PlayerSpec::agent(m.max(25.0))
                    } else {
                        PlayerSpec::bot(m.max(25.0), crate::entity::BotBrain::Stationary)
                    };
                    spec.at(p)
                })
                .collect(),
            ..WorldConfig::default()
        };
        let mut w = create_world(cfg).unwrap();
        for (p, &(m, _)) in w.players.iter_mut().zip(players) {
            p.cells[0].mass = m;
        }
        w
    }

    pub fn add_cell(w: &mut WorldState, player: usize, mass: f64, pos: Vec2) {
        let id = w.alloc_id(EntityKind::Cell);
        w.players[player].cells.push(Cell {
            id,
            owner: player,
            mass,
            position: pos,
            velocity: Vec2::ZERO,
            split_impulse: Vec2::ZERO,
            merge_ready_tick: 0,
            created_tick: w.tick,
        });
    }

    pub fn add_pellet(w: &mut WorldState, pos: Vec2) {
        let id = w.alloc_id(EntityKind::Pellet);
        w.pellets.insert(crate::entity::Pellet { id, position: pos });
    }

    pub fn add_virus(w: &mut WorldState, pos: Vec2) {
        w.spawn_virus(pos);
    }

    /// Controls that hold every player still on its centroid.
    pub fn hold(w: &WorldState) -> Vec<super::ControlInput> {
        w.players
            .iter()
            .map(|p| super::ControlInput::new(p.index, p.centroid().unwrap(), super::Discrete::None))
            .collect()
    }
}
