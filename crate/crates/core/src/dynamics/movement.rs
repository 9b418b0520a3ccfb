use crate::geometry::{speed, Vec2, TICK_RATE};
use crate::world::WorldState;

/// Below this distance a cell is considered to be on its cursor.
const ARRIVAL_EPS: f64 = 1e-9;
/// Impulses and velocities smaller than this snap to zero.
const REST_EPS: f64 = 1e-6;

/// Moves every cell toward its owner's cursor at its mass-dependent speed,
/// adds residual split impulses, advances blobs and viruses, and clamps
/// everything to the arena.
pub fn apply_movement(world: &mut WorldState, cursors: &[Vec2]) {
    let friction = world.config.rules.friction();
    let (w, h) = (world.width(), world.height());
    for (player, &target) in world.players.iter_mut().zip(cursors) {
        for cell in &mut player.cells {
            let to = target - cell.position;
            let dist = to.length();
            let step = speed(cell.mass) / TICK_RATE;
            let walk = if dist > ARRIVAL_EPS {
                to * (step.min(dist) / dist)
            } else {
                Vec2::ZERO
            };
            let before = cell.position;
            let mut next = before + walk + cell.split_impulse;
            let clamped = next.clamp_to(w, h);
            if clamped.x != next.x {
                cell.split_impulse.x = 0.0;
            }
            if clamped.y != next.y {
                cell.split_impulse.y = 0.0;
            }
            next = clamped;
            cell.position = next;
            cell.velocity = next - before;
            cell.split_impulse = cell.split_impulse * friction;
            if cell.split_impulse.length_squared() < REST_EPS * REST_EPS {
                cell.split_impulse = Vec2::ZERO;
            }
        }
    }
    for blob in &mut world.blobs {
        drift(&mut blob.position, &mut blob.velocity, friction, w, h);
    }
    for virus in &mut world.viruses {
        drift(&mut virus.position, &mut virus.velocity, friction, w, h);
    }
}

fn drift(position: &mut Vec2, velocity: &mut Vec2, friction: f64, w: f64, h: f64) {
    if *velocity == Vec2::ZERO {
        return;
    }
    let next = *position + *velocity;
    let clamped = next.clamp_to(w, h);
    if clamped.x != next.x {
        velocity.x = 0.0;
    }
    if clamped.y != next.y {
        velocity.y = 0.0;
    }
    *position = clamped;
    *velocity = *velocity * friction;
    if velocity.length_squared() < REST_EPS * REST_EPS {
        *velocity = Vec2::ZERO;
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;
    use crate::geometry::speed_of;

    #[test]
    fn cursor_on_center_means_no_motion() {
        let mut w = bare_world(&[(25.0, Vec2::new(80.0, 90.0))]);
        apply_movement(&mut w, &[Vec2::new(80.0, 90.0)]);
        assert_eq!(w.players[0].cells[0].position, Vec2::new(80.0, 90.0));
        assert_eq!(w.players[0].cells[0].velocity, Vec2::ZERO);
    }

    #[test]
    fn small_cells_outrun_large_cells() {
        let mut w = bare_world(&[(1000.0, Vec2::new(50.0, 50.0)), (25.0, Vec2::new(50.0, 150.0))]);
        apply_movement(&mut w, &[Vec2::new(150.0, 50.0), Vec2::new(150.0, 150.0)]);
        let big = w.players[0].cells[0].position.x - 50.0;
        let small = w.players[1].cells[0].position.x - 50.0;
        assert!((big - speed_of(1000.0).unwrap() / 60.0).abs() < 1e-12);
        assert!((small - speed_of(25.0).unwrap() / 60.0).abs() < 1e-12);
        assert!(small > big);
    }

    #[test]
    fn wall_clamps_exactly() {
        let mut w = bare_world(&[(25.0, Vec2::new(199.9, 100.0))]);
        apply_movement(&mut w, &[Vec2::new(500.0, 100.0)]);
        assert_eq!(w.players[0].cells[0].position.x, 200.0);
        apply_movement(&mut w, &[Vec2::new(500.0, 100.0)]);
        assert_eq!(w.players[0].cells[0].position.x, 200.0);
    }

    #[test]
    fn does_not_overshoot_cursor() {
        let mut w = bare_world(&[(25.0, Vec2::new(100.0, 100.0))]);
        apply_movement(&mut w, &[Vec2::new(100.1, 100.0)]);
        assert_eq!(w.players[0].cells[0].position.x, 100.1);
    }

    #[test]
    fn impulse_decays_and_velocity_is_bounded() {
        let mut w = bare_world(&[(50.0, Vec2::new(100.0, 100.0))]);
        w.players[0].cells[0].split_impulse = Vec2::new(0.0, 1.0);
        let friction = w.config.rules.friction();
        let mut prev = 1.0;
        for _ in 0..30 {
            let imp = w.players[0].cells[0].split_impulse.length();
            apply_movement(&mut w, &[Vec2::new(150.0, 100.0)]);
            let c = &w.players[0].cells[0];
            assert!(c.velocity.length() <= speed_of(c.mass).unwrap() / 60.0 + imp + 1e-12);
            let now = c.split_impulse.length();
            assert!(now < prev || now == 0.0);
            assert!((now - imp * friction).abs() < 1e-12 || now == 0.0);
            prev = now.max(1e-300);
        }
    }

    #[test]
    fn propelled_virus_stops_at_wall() {
        let mut w = bare_world(&[(25.0, Vec2::new(20.0, 20.0))]);
        add_virus(&mut w, Vec2::new(195.0, 100.0));
        w.viruses[0].velocity = Vec2::new(8.0, 0.0);
        apply_movement(&mut w, &[Vec2::new(20.0, 20.0)]);
        assert_eq!(w.viruses[0].position.x, 200.0);
        assert_eq!(w.viruses[0].velocity.x, 0.0);
    }
}
