use std::cmp::Ordering;
use std::f64::consts::TAU;

use crate::entity::{Cell, EntityKind, PELLET_MASS, VIRUS_MASS};
use crate::geometry::{radius, speed, Vec2, TICK_RATE};
use crate::world::WorldState;

use super::{EatEvent, TickEvents, VirusPopEvent};

/// Cells heavy enough to eat a virus absorb it and burst into equal
/// fragments flung radially; lighter cells pass over viruses untouched.
/// Viruses also destroy any pellet they cover.
pub fn virus_interaction(world: &mut WorldState, events: &mut TickEvents) {
    if !world.viruses.is_empty() {
        pop_cells(world, events);
    }
    clear_pellets_under_viruses(world, events);
}

fn pop_cells(world: &mut WorldState, events: &mut TickEvents) {
    let rules = world.config.rules.clone();
    let threshold = rules.eat_ratio * VIRUS_MASS;
    let cap = world.config.cell_cap;
    let frag_unit = 2.0 * world.config.mass_floor;
    let tick = world.tick;

    let mut handles: Vec<(usize, usize, f64, u64)> = world
        .players
        .iter()
        .flat_map(|p| {
            p.cells
                .iter()
                .enumerate()
                .map(move |(i, c)| (p.index, i, c.mass, c.id.serial))
        })
        .filter(|h| h.2 >= threshold)
        .collect();
    if handles.is_empty() {
        return;
    }
    handles.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap_or(Ordering::Equal).then(a.3.cmp(&b.3)));

    let mut consumed = vec![false; world.viruses.len()];
    for (p, i, _, _) in handles {
        let cell = &world.players[p].cells[i];
        let Some(vi) = world
            .viruses
            .iter()
            .enumerate()
            .position(|(k, v)| !consumed[k] && cell.contains(v.position))
        else {
            continue;
        };
        consumed[vi] = true;
        let virus_id = world.viruses[vi].id;
        let cell_id = cell.id;
        let position = cell.position;

        let player = &mut world.players[p];
        player.cells[i].mass += VIRUS_MASS;
        player.virus_eat_streak += 1;
        player.last_virus_eat_tick = Some(tick);
        player.decay_multiplier = rules.decay_multiplier(player.virus_eat_streak);
        events.eats.push(EatEvent {
            eater: cell_id,
            eater_owner: p,
            eaten: virus_id,
            eaten_owner: None,
            mass: VIRUS_MASS,
        });

        let mass = player.cells[i].mass;
        let others = player.cells.len() - 1;
        let by_mass = ((mass / frag_unit).floor() as usize).max(2);
        let pieces = cap.saturating_sub(others).min(by_mass);
        if pieces < 2 {
            continue;
        }
        let piece = mass / pieces as f64;
        let kick = rules.split_boost_factor * speed(piece) / TICK_RATE;
        let ready = tick + rules.merge_cooldown(piece);
        let velocity = player.cells[i].velocity;
        {
            let c = &mut player.cells[i];
            c.mass = piece;
            c.split_impulse = Vec2::new(kick, 0.0);
            c.merge_ready_tick = ready;
        }
        for k in 1..pieces {
            let angle = TAU * k as f64 / pieces as f64;
            let id = world.alloc_id(EntityKind::Cell);
            world.players[p].cells.push(Cell {
                id,
                owner: p,
                mass: piece,
                position,
                velocity,
                split_impulse: Vec2::new(angle.cos(), angle.sin()) * kick,
                merge_ready_tick: ready,
                created_tick: tick,
            });
        }
        events.virus_pops.push(VirusPopEvent {
            player: p,
            cell: cell_id,
            virus: virus_id,
            fragments: pieces,
            tick,
        });
    }
    if consumed.iter().any(|&c| c) {
        let mut it = consumed.into_iter();
        world.viruses.retain(|_| !it.next().unwrap());
    }
}

pub(crate) fn clear_pellets_under_viruses(world: &mut WorldState, events: &mut TickEvents) {
    let reach = radius(VIRUS_MASS) + radius(PELLET_MASS);
    for v in &world.viruses {
        let center = v.position;
        let gone = world
            .pellets
            .remove_near(center, reach, |p| p.position.distance_squared(center) < reach * reach);
        events.pellets_destroyed += gone.len();
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;

    #[test]
    fn big_cell_pops_into_fragments_conserving_mass() {
        let at = Vec2::new(100.0, 100.0);
        let mut w = bare_world(&[(3000.0, at)]);
        add_virus(&mut w, Vec2::new(110.0, 100.0));
        let mut ev = TickEvents::default();
        virus_interaction(&mut w, &mut ev);
        let cells = &w.players[0].cells;
        assert_eq!(cells.len(), 14);
        let total: f64 = cells.iter().map(|c| c.mass).sum();
        assert!((total - 3100.0).abs() < 1e-9);
        assert!(cells.iter().all(|c| c.mass == 3100.0 / 14.0));
        assert!(w.viruses.is_empty());
        assert_eq!(w.players[0].virus_eat_streak, 1);
        assert_eq!(ev.virus_pops[0].fragments, 14);
    }

    #[test]
    fn fragment_count_follows_mass() {
        let at = Vec2::new(100.0, 100.0);
        // 200 + 100 = 300 -> floor(300 / 50) = 6 pieces of 50.
        let mut w = bare_world(&[(200.0, at)]);
        add_virus(&mut w, at);
        let mut ev = TickEvents::default();
        virus_interaction(&mut w, &mut ev);
        assert_eq!(w.players[0].cells.len(), 6);
        assert!(w.players[0].cells.iter().all(|c| c.mass == 50.0));
    }

    #[test]
    fn small_cell_passes_over_virus() {
        let at = Vec2::new(100.0, 100.0);
        let mut w = bare_world(&[(50.0, at)]);
        add_virus(&mut w, at);
        let before = w.state_hash();
        let mut ev = TickEvents::default();
        virus_interaction(&mut w, &mut ev);
        assert_eq!(w.state_hash(), before);
        assert_eq!(w.viruses.len(), 1);
    }

    #[test]
    fn capped_player_absorbs_without_fragmenting() {
        let at = Vec2::new(100.0, 100.0);
        let mut w = bare_world(&[(1000.0, at)]);
        for _ in 0..13 {
            add_cell(&mut w, 0, 30.0, Vec2::new(20.0, 20.0));
        }
        add_virus(&mut w, at);
        let mut ev = TickEvents::default();
        virus_interaction(&mut w, &mut ev);
        assert_eq!(w.players[0].cells.len(), 14);
        assert_eq!(w.players[0].cells[0].mass, 1100.0);
        assert!(ev.virus_pops.is_empty());
    }

    #[test]
    fn virus_penalty_grows_with_streak() {
        let at = Vec2::new(100.0, 100.0);
        let mut w = bare_world(&[(1000.0, at)]);
        w.players[0].virus_eat_streak = 2;
        add_virus(&mut w, at);
        let mut ev = TickEvents::default();
        virus_interaction(&mut w, &mut ev);
        assert_eq!(w.players[0].virus_eat_streak, 3);
        assert_eq!(w.players[0].decay_multiplier, 1.5);
    }

    #[test]
    fn viruses_destroy_covered_pellets() {
        let mut w = bare_world(&[(25.0, Vec2::new(20.0, 20.0))]);
        add_virus(&mut w, Vec2::new(100.0, 100.0));
        add_pellet(&mut w, Vec2::new(105.0, 100.0));
        add_pellet(&mut w, Vec2::new(130.0, 100.0));
        let mut ev = TickEvents::default();
        virus_interaction(&mut w, &mut ev);
        assert_eq!(ev.pellets_destroyed, 1);
        assert_eq!(w.pellets.len(), 1);
    }
}
