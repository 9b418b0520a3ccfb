use std::cmp::Ordering;

use crate::entity::PELLET_MASS;
use crate::geometry::radius;
use crate::world::WorldState;

use super::{EatEvent, TickEvents};

/// Resolves every eat for this tick. Eaters act in descending mass order
/// (ties by serial) and each prey is eaten at most once. A pellet, blob or
/// cell is eaten when its centre lies strictly inside the eater; cells also
/// need the eater to outweigh them by the eat ratio.
#[allow(clippy::needless_range_loop)]
pub fn resolve_consumption(world: &mut WorldState, events: &mut TickEvents) {
    let ratio = world.config.rules.eat_ratio;

    // Flattened (player, cell index) handles.
    let mut handles: Vec<(usize, usize)> = world
        .players
        .iter()
        .flat_map(|p| (0..p.cells.len()).map(move |i| (p.index, i)))
        .collect();
    let cell = |w: &WorldState, (p, i): (usize, usize)| -> (f64, u64) {
        let c = &w.players[p].cells[i];
        (c.mass, c.id.serial)
    };
    handles.sort_by(|&a, &b| {
        let (ma, sa) = cell(world, a);
        let (mb, sb) = cell(world, b);
        mb.partial_cmp(&ma).unwrap_or(Ordering::Equal).then(sa.cmp(&sb))
    });

    let mut eaten = vec![false; handles.len()];
    let mut blob_eaten = vec![false; world.blobs.len()];

    for ei in 0..handles.len() {
        if eaten[ei] {
            continue;
        }
        let (ep, ec) = handles[ei];

        for pi in 0..handles.len() {
            if pi == ei || eaten[pi] {
                continue;
            }
            let (pp, pc) = handles[pi];
            if pp == ep {
                continue;
            }
            let eater = &world.players[ep].cells[ec];
            let prey = &world.players[pp].cells[pc];
            if eater.mass >= ratio * prey.mass && eater.contains(prey.position) {
                let gained = prey.mass;
                let prey_id = prey.id;
                let eater_id = eater.id;
                world.players[ep].cells[ec].mass += gained;
                eaten[pi] = true;
                events.eats.push(EatEvent {
                    eater: eater_id,
                    eater_owner: ep,
                    eaten: prey_id,
                    eaten_owner: Some(pp),
                    mass: gained,
                });
            }
        }

        for bi in 0..world.blobs.len() {
            if blob_eaten[bi] {
                continue;
            }
            let eater = &world.players[ep].cells[ec];
            let blob = &world.blobs[bi];
            if eater.mass >= ratio * blob.mass && eater.contains(blob.position) {
                let (gained, blob_id, eater_id) = (blob.mass, blob.id, eater.id);
                world.players[ep].cells[ec].mass += gained;
                blob_eaten[bi] = true;
                events.eats.push(EatEvent {
                    eater: eater_id,
                    eater_owner: ep,
                    eaten: blob_id,
                    eaten_owner: None,
                    mass: gained,
                });
            }
        }

        let eater = &world.players[ep].cells[ec];
        let (center, r, eater_id) = (eater.position, radius(eater.mass), eater.id);
        let meals = world
            .pellets
            .remove_near(center, r, |p| p.position.distance_squared(center) < r * r);
        if !meals.is_empty() {
            let mut meals = meals;
            meals.sort_by_key(|p| p.id.serial);
            for p in meals {
                world.players[ep].cells[ec].mass += PELLET_MASS;
                events.eats.push(EatEvent {
                    eater: eater_id,
                    eater_owner: ep,
                    eaten: p.id,
                    eaten_owner: None,
                    mass: PELLET_MASS,
                });
            }
        }
    }

    if eaten.iter().any(|&e| e) {
        let mut doomed: Vec<Vec<bool>> = world
            .players
            .iter()
            .map(|p| vec![false; p.cells.len()])
            .collect();
        for (k, &(p, i)) in handles.iter().enumerate() {
            if eaten[k] {
                doomed[p][i] = true;
            }
        }
        for (player, marks) in world.players.iter_mut().zip(doomed) {
            let mut it = marks.into_iter();
            player.cells.retain(|_| !it.next().unwrap());
        }
    }
    if blob_eaten.iter().any(|&e| e) {
        let mut it = blob_eaten.into_iter();
        world.blobs.retain(|_| !it.next().unwrap());
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;
    use crate::entity::{EjectedBlob, EntityKind};
    use crate::geometry::Vec2;

    #[test]
    fn bigger_cell_absorbs_smaller_whole() {
        let at = Vec2::new(100.0, 100.0);
        let mut w = bare_world(&[(100.0, at), (50.0, at)]);
        let mut ev = TickEvents::default();
        resolve_consumption(&mut w, &mut ev);
        assert_eq!(w.players[0].cells.len(), 1);
        assert_eq!(w.players[0].cells[0].mass, 150.0);
        assert!(w.players[1].cells.is_empty());
        assert_eq!(ev.eats.len(), 1);
        assert_eq!(ev.eats[0].mass, 50.0);
    }

    #[test]
    fn eat_ratio_blocks_near_equals() {
        let at = Vec2::new(100.0, 100.0);
        let mut w = bare_world(&[(100.0, at), (90.0, at)]);
        let mut ev = TickEvents::default();
        resolve_consumption(&mut w, &mut ev);
        assert!(ev.eats.is_empty());
        assert_eq!(w.players[1].cells.len(), 1);
    }

    #[test]
    fn smaller_cell_never_eats_larger() {
        let mut w = bare_world(&[(30.0, Vec2::new(100.0, 100.0)), (300.0, Vec2::new(103.0, 100.0))]);
        let mut ev = TickEvents::default();
        resolve_consumption(&mut w, &mut ev);
        assert_eq!(ev.eats.len(), 1);
        assert_eq!(ev.eats[0].eater_owner, 1);
    }

    #[test]
    fn pellets_inside_circle_by_brute_force() {
        let center = Vec2::new(100.0, 100.0);
        let mut w = bare_world(&[(25.0, center)]);
        let spots = [
            Vec2::new(101.0, 100.0),
            Vec2::new(96.5, 102.0),
            Vec2::new(100.0, 95.1),
            Vec2::new(105.0, 100.0), // on the rim: not strictly inside
            Vec2::new(110.0, 110.0),
        ];
        for s in spots {
            add_pellet(&mut w, s);
        }
        // Oracle: strict containment, d^2 < r^2.
        let expected = spots.iter().filter(|s| s.distance_squared(center) < 25.0).count();
        assert_eq!(expected, 3);
        let mut ev = TickEvents::default();
        resolve_consumption(&mut w, &mut ev);
        assert_eq!(ev.eats.len(), expected);
        assert_eq!(w.players[0].cells[0].mass, 25.0 + expected as f64);
        assert_eq!(w.pellets.len(), spots.len() - expected);
    }

    #[test]
    fn prey_eaten_once_and_absorption_is_exact() {
        let at = Vec2::new(100.0, 100.0);
        let mut w = bare_world(&[(400.1, at), (250.3, at), (33.7, at)]);
        let mut ev = TickEvents::default();
        resolve_consumption(&mut w, &mut ev);
        // Largest eats both; the middle one never gets to eat the small one.
        assert_eq!(ev.eats.len(), 2);
        assert_eq!(w.players[0].cells[0].mass, 400.1 + 250.3 + 33.7);
        let mut expect = 400.1;
        for e in &ev.eats {
            expect += e.mass;
        }
        assert_eq!(w.players[0].cells[0].mass.to_bits(), expect.to_bits());
    }

    #[test]
    fn same_owner_cells_do_not_eat_each_other() {
        let at = Vec2::new(100.0, 100.0);
        let mut w = bare_world(&[(200.0, at)]);
        add_cell(&mut w, 0, 30.0, at);
        let mut ev = TickEvents::default();
        resolve_consumption(&mut w, &mut ev);
        assert!(ev.eats.is_empty());
        assert_eq!(w.players[0].cells.len(), 2);
    }

    #[test]
    fn any_cell_eats_blobs() {
        let mut w = bare_world(&[(25.0, Vec2::new(100.0, 100.0))]);
        let id = w.alloc_id(EntityKind::Blob);
        w.blobs.push(EjectedBlob {
            id,
            position: Vec2::new(102.0, 100.0),
            velocity: Vec2::ZERO,
            mass: 14.0,
            source_owner: 1,
        });
        let mut ev = TickEvents::default();
        resolve_consumption(&mut w, &mut ev);
        assert!(w.blobs.is_empty());
        assert_eq!(w.players[0].cells[0].mass, 39.0);
    }
}
