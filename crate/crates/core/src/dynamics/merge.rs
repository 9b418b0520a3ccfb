use crate::geometry::Vec2;
use crate::world::WorldState;

use super::{MergeEvent, TickEvents};

/// Fuses same-owner cells whose cooldowns have elapsed once a centre falls
/// within the larger radius, repeating to a fixpoint. Pairs still cooling
/// down are pushed apart instead.
pub fn merge_pass(world: &mut WorldState, events: &mut TickEvents) {
    let tick = world.tick;
    let (w, h) = (world.width(), world.height());
    for player in &mut world.players {
        if player.cells.len() < 2 {
            continue;
        }
        let index = player.index;
        'fixpoint: loop {
            let cells = &player.cells;
            for i in 0..cells.len() {
                for j in i + 1..cells.len() {
                    let (a, b) = (&cells[i], &cells[j]);
                    if tick < a.merge_ready_tick || tick < b.merge_ready_tick {
                        continue;
                    }
                    let reach = a.radius().max(b.radius());
                    if a.position.distance_squared(b.position) >= reach * reach {
                        continue;
                    }
                    let keep_a = a.mass > b.mass || (a.mass == b.mass && a.id.serial < b.id.serial);
                    let (keep, gone) = if keep_a { (i, j) } else { (j, i) };
                    let total = a.mass + b.mass;
                    let centroid = (a.position * a.mass + b.position * b.mass) * (1.0 / total);
                    let absorbed = player.cells[gone].id;
                    let kept = player.cells[keep].id;
                    player.cells[keep].mass = total;
                    player.cells[keep].position = centroid;
                    player.cells.remove(gone);
                    events.merges.push(MergeEvent {
                        player: index,
                        kept,
                        absorbed,
                        tick,
                    });
                    continue 'fixpoint;
                }
            }
            break;
        }

        let n = player.cells.len();
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (&player.cells[i], &player.cells[j]);
                if tick >= a.merge_ready_tick && tick >= b.merge_ready_tick {
                    continue;
                }
                let touch = a.radius() + b.radius();
                let gap = b.position - a.position;
                let dist = gap.length();
                if dist >= touch {
                    continue;
                }
                let dir = gap.normalized().unwrap_or(Vec2::new(1.0, 0.0));
                let overlap = touch - dist;
                let total = a.mass + b.mass;
                let (wa, wb) = (b.mass / total, a.mass / total);
                let pa = (a.position - dir * (overlap * wa)).clamp_to(w, h);
                let pb = (b.position + dir * (overlap * wb)).clamp_to(w, h);
                player.cells[i].position = pa;
                player.cells[j].position = pb;
            }
        }
    }
}
