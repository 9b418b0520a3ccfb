use crate::entity::VIRUS_MASS;
use crate::geometry::{radius, Vec2};
use crate::world::{WorldState, PLACEMENT_RETRIES};

use super::viruses::clear_pellets_under_viruses;
use super::TickEvents;

/// Tops viruses back up to the minimum every tick (when enabled), then on
/// pellet-regeneration ticks refills pellets to exactly the maximum.
pub fn regeneration_pass(world: &mut WorldState, events: &mut TickEvents) {
    if world.config.virus_regen_enabled && world.viruses.len() < world.config.min_viruses {
        while world.viruses.len() < world.config.min_viruses {
            let p = virus_spot(world);
            world.spawn_virus(p);
        }
        clear_pellets_under_viruses(world, events);
    }
    if world.tick.is_multiple_of(world.config.pellet_regen_interval) {
        while world.pellets.len() < world.config.max_pellets {
            if !world.spawn_pellet() {
                break;
            }
        }
    }
}

/// Uniform spot whose virus circle touches no cell; falls back to the
/// sampled candidate with the most room.
fn virus_spot(world: &mut WorldState) -> Vec2 {
    let r = radius(VIRUS_MASS);
    let (w, h) = (world.width(), world.height());
    let mut best: Option<(Vec2, f64)> = None;
    for _ in 0..PLACEMENT_RETRIES {
        let p = Vec2::new(
            world.rng.uniform(r.min(w / 2.0), (w - r).max(w / 2.0)),
            world.rng.uniform(r.min(h / 2.0), (h - r).max(h / 2.0)),
        );
        let room = world
            .cells()
            .map(|c| c.position.distance(p) - c.radius() - r)
            .fold(f64::INFINITY, f64::min);
        if room >= 0.0 {
            return p;
        }
        if best.is_none_or(|(_, b)| room > b) {
            best = Some((p, room));
        }
    }
    best.expect("at least one candidate").0
}
