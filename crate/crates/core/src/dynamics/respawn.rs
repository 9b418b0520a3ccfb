use crate::entity::{Cell, EntityKind};
use crate::geometry::Vec2;
use crate::world::WorldState;

use super::{DeathEvent, RespawnEvent, TickEvents};

/// Players left without cells died this tick: log the mass they lost to
/// eaters and bring them straight back as one fresh cell. Nothing else in
/// the world is touched.
pub fn death_respawn_pass(world: &mut WorldState, events: &mut TickEvents) {
    let tick = world.tick;
    for index in 0..world.players.len() {
        if world.players[index].is_alive() {
            continue;
        }
        let death_mass: f64 = events
            .eats
            .iter()
            .filter(|e| e.eaten_owner == Some(index))
            .map(|e| e.mass)
            .sum();
        events.deaths.push(DeathEvent {
            player: index,
            death_mass,
            tick,
        });
        let position = world.respawn_position();
        let mass = world.config.initial_mass;
        let id = world.alloc_id(EntityKind::Cell);
        let player = &mut world.players[index];
        player.lifetime_deaths += 1;
        player.cells.push(Cell {
            id,
            owner: index,
            mass,
            position,
            velocity: Vec2::ZERO,
            split_impulse: Vec2::ZERO,
            merge_ready_tick: tick,
            created_tick: tick,
        });
        events.respawns.push(RespawnEvent {
            player: index,
            cell: id,
            mass,
            tick,
        });
    }
}
