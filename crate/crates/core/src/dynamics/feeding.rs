use crate::geometry::{speed, Vec2, TICK_RATE};
use crate::world::WorldState;

use super::{TickEvents, VirusSpawnEvent};

/// Viruses swallow blobs whose centre enters them. On the configured feeding
/// count the virus buds a new virus in place and is launched along the last
/// feeding direction.
pub fn feed_virus(world: &mut WorldState, events: &mut TickEvents) {
    if world.blobs.is_empty() || world.viruses.is_empty() {
        return;
    }
    let launch = world.config.rules.virus_boost_factor * speed(world.config.initial_mass) / TICK_RATE;
    let feeds_to_split = world.config.virus_split_feeds;
    let tick = world.tick;
    let mut i = 0;
    while i < world.blobs.len() {
        let blob_pos = world.blobs[i].position;
        let Some(vi) = world.viruses.iter().position(|v| v.contains(blob_pos)) else {
            i += 1;
            continue;
        };
        let blob = world.blobs.remove(i);
        events.blobs_fed += 1;
        let virus = &mut world.viruses[vi];
        virus.feed_count += 1;
        virus.last_feed_dir = blob
            .velocity
            .normalized()
            .or_else(|| (virus.position - blob.position).normalized())
            .unwrap_or(Vec2::new(1.0, 0.0));
        if virus.feed_count >= feeds_to_split {
            virus.feed_count = 0;
            virus.velocity = virus.last_feed_dir * launch;
            let (parent, at) = (virus.id, virus.position);
            let child = world.spawn_virus(at);
            events.virus_spawns.push(VirusSpawnEvent { parent, child, tick });
        }
    }
}
