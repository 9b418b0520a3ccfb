use crate::entity::{Cell, EjectedBlob, EntityKind};
use crate::geometry::{radius, speed, Vec2};
use crate::world::WorldState;

use super::{EjectEvent, SplitEvent, TickEvents};

pub(crate) fn aim(from: Vec2, to: Vec2) -> Vec2 {
    (to - from).normalized().unwrap_or(Vec2::new(1.0, 0.0))
}

/// Splits every cell heavy enough to yield two halves at or above the mass
/// floor, in one pass and never beyond the cell cap. The new half is boosted
/// toward the cursor.
pub fn do_split(world: &mut WorldState, player: usize, cursor_world: Vec2, events: &mut TickEvents) {
    let tick = world.tick;
    let cap = world.config.cell_cap;
    let min_mass = 2.0 * world.config.mass_floor;
    let rules = world.config.rules.clone();
    let existing = world.players[player].cells.len();
    for i in 0..existing {
        if world.players[player].cells.len() >= cap {
            break;
        }
        let cell = &world.players[player].cells[i];
        if cell.mass < min_mass {
            continue;
        }
        let half = cell.mass / 2.0;
        let dir = aim(cell.position, cursor_world);
        let cooldown = tick + rules.merge_cooldown(half);
        let child_template = Cell {
            id: cell.id,
            owner: player,
            mass: half,
            position: cell.position,
            velocity: cell.velocity,
            split_impulse: dir * (rules.split_boost_factor * speed(half) / crate::geometry::TICK_RATE),
            merge_ready_tick: cooldown,
            created_tick: tick,
        };
        let child_id = world.alloc_id(EntityKind::Cell);
        let cells = &mut world.players[player].cells;
        let parent_id = cells[i].id;
        cells[i].mass = half;
        cells[i].merge_ready_tick = cooldown;
        cells.push(Cell {
            id: child_id,
            ..child_template
        });
        events.splits.push(SplitEvent {
            player,
            parent: parent_id,
            child: child_id,
            tick,
        });
    }
}

/// Each cell that can afford it sheds `eject_cost` and launches a blob of
/// `blob_mass` from its rim toward the cursor.
pub fn do_eject(world: &mut WorldState, player: usize, cursor_world: Vec2, events: &mut TickEvents) {
    let rules = world.config.rules.clone();
    let threshold = world.config.mass_floor + rules.eject_cost;
    let launch = rules.eject_boost_factor * speed(world.config.initial_mass) / crate::geometry::TICK_RATE;
    let blob_r = radius(rules.blob_mass);
    let (w, h) = (world.width(), world.height());
    for i in 0..world.players[player].cells.len() {
        let cell = &world.players[player].cells[i];
        if cell.mass < threshold {
            continue;
        }
        let dir = aim(cell.position, cursor_world);
        let new_mass = cell.mass - rules.eject_cost;
        let spawn = (cell.position + dir * (radius(new_mass) + blob_r)).clamp_to(w, h);
        let cell_id = cell.id;
        let blob_id = world.alloc_id(EntityKind::Blob);
        world.players[player].cells[i].mass = new_mass;
        world.blobs.push(EjectedBlob {
            id: blob_id,
            position: spawn,
            velocity: dir * launch,
            mass: rules.blob_mass,
            source_owner: player,
        });
        events.ejects.push(EjectEvent {
            player,
            cell: cell_id,
            blob: blob_id,
            cost: rules.eject_cost,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::super::{step_tick, ControlInput, Discrete};
    use super::*;

    #[test]
    fn split_of_100_gives_two_50s() {
        let mut w = bare_world(&[(100.0, Vec2::new(100.0, 100.0))]);
        let mut ev = TickEvents::default();
        do_split(&mut w, 0, Vec2::new(150.0, 100.0), &mut ev);
        let cells = &w.players[0].cells;
        assert_eq!(cells.len(), 2);
        assert_eq!(cells[0].mass, 50.0);
        assert_eq!(cells[1].mass, 50.0);
        assert_eq!(cells[0].split_impulse, Vec2::ZERO);
        assert!(cells[1].split_impulse.x > 0.0 && cells[1].split_impulse.y == 0.0);
        assert_eq!(ev.splits.len(), 1);
    }

    #[test]
    fn split_below_threshold_is_noop() {
        let mut w = bare_world(&[(49.0, Vec2::new(100.0, 100.0))]);
        let before = w.state_hash();
        let mut ev = TickEvents::default();
        do_split(&mut w, 0, Vec2::new(150.0, 100.0), &mut ev);
        assert_eq!(w.players[0].cells.len(), 1);
        assert_eq!(w.state_hash(), before);
    }

    #[test]
    fn split_respects_cell_cap() {
        let mut w = bare_world(&[(100.0, Vec2::new(100.0, 100.0))]);
        for _ in 0..13 {
            add_cell(&mut w, 0, 100.0, Vec2::new(100.0, 100.0));
        }
        let mut ev = TickEvents::default();
        do_split(&mut w, 0, Vec2::new(150.0, 100.0), &mut ev);
        assert_eq!(w.players[0].cells.len(), 14);
        assert!(w.players[0].cells.iter().all(|c| c.mass == 100.0));

        // Partially full: only as many splits as there are free slots.
        let mut w = bare_world(&[(100.0, Vec2::new(100.0, 100.0))]);
        for _ in 0..11 {
            add_cell(&mut w, 0, 100.0, Vec2::new(100.0, 100.0));
        }
        do_split(&mut w, 0, Vec2::new(150.0, 100.0), &mut ev);
        assert_eq!(w.players[0].cells.len(), 14);
    }

    #[test]
    fn split_conserves_mass_exactly() {
        let mut w = bare_world(&[(137.3, Vec2::new(100.0, 100.0))]);
        add_cell(&mut w, 0, 77.7, Vec2::new(60.0, 60.0));
        add_cell(&mut w, 0, 30.0, Vec2::new(60.0, 60.0));
        let before: Vec<f64> = w.players[0].cells.iter().map(|c| c.mass).collect();
        let mut ev = TickEvents::default();
        do_split(&mut w, 0, Vec2::new(0.0, 0.0), &mut ev);
        let cells = &w.players[0].cells;
        assert_eq!(cells.len(), 5);
        // Each parent's two halves add back to it bit-exactly.
        assert_eq!(cells[0].mass + cells[3].mass, before[0]);
        assert_eq!(cells[1].mass + cells[4].mass, before[1]);
        assert_eq!(cells[2].mass, before[2]);
    }

    #[test]
    fn eject_from_100() {
        let mut w = bare_world(&[(100.0, Vec2::new(100.0, 100.0))]);
        let mut ev = TickEvents::default();
        do_eject(&mut w, 0, Vec2::new(100.0, 20.0), &mut ev);
        assert_eq!(w.players[0].cells[0].mass, 82.0);
        assert_eq!(w.blobs.len(), 1);
        assert_eq!(w.blobs[0].mass, 14.0);
        assert!(w.blobs[0].velocity.y < 0.0);
        // Blob starts just outside the rim.
        let d = w.blobs[0].position.distance(w.players[0].cells[0].position);
        assert!(d > w.players[0].cells[0].radius());
    }

    #[test]
    fn eject_below_threshold_is_noop() {
        let mut w = bare_world(&[(30.0, Vec2::new(100.0, 100.0))]);
        let mut ev = TickEvents::default();
        do_eject(&mut w, 0, Vec2::new(150.0, 100.0), &mut ev);
        assert_eq!(w.players[0].cells[0].mass, 30.0);
        assert!(w.blobs.is_empty());
    }

    #[test]
    fn eject_is_per_cell() {
        let mut w = bare_world(&[(100.0, Vec2::new(100.0, 100.0))]);
        add_cell(&mut w, 0, 60.0, Vec2::new(40.0, 40.0));
        let mut ev = TickEvents::default();
        do_eject(&mut w, 0, Vec2::new(150.0, 150.0), &mut ev);
        assert_eq!(w.blobs.len(), 2);
        assert_eq!(ev.ejects.len(), 2);
    }

    #[test]
    fn eject_never_increases_total_mass() {
        let mut w = bare_world(&[(300.0, Vec2::new(100.0, 100.0))]);
        let mut before = w.total_cell_mass();
        for _ in 0..40 {
            let ctl = [ControlInput::new(0, Vec2::new(180.0, 100.0), Discrete::Eject)];
            step_tick(&mut w, &ctl).unwrap();
            let blobs: f64 = w.blobs.iter().map(|b| b.mass).sum();
            let now = w.total_cell_mass() + blobs;
            assert!(now <= before + 1e-9);
            before = now;
        }
    }
}
