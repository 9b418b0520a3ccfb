use crate::world::WorldState;

use super::{DecayEvent, TickEvents};

/// Expires stale virus-eating streaks, then on decay ticks shrinks every cell
/// proportionally (scaled by its owner's penalty multiplier) down to the
/// mass floor.
pub fn apply_decay(world: &mut WorldState, events: &mut TickEvents) {
    let tick = world.tick;
    let reset_after = world.config.rules.virus_streak_reset_ticks;
    for p in &mut world.players {
        if let Some(t) = p.last_virus_eat_tick {
            if tick.saturating_sub(t) >= reset_after {
                p.virus_eat_streak = 0;
                p.last_virus_eat_tick = None;
                p.decay_multiplier = 1.0;
            }
        }
    }

    if !world.config.mass_decay_enabled || !tick.is_multiple_of(world.config.decay_interval) {
        return;
    }
    let rate = world.config.decay_per_application();
    let floor = world.config.mass_floor;
    for p in &mut world.players {
        let keep = (1.0 - rate * p.decay_multiplier).max(0.0);
        let mut lost = 0.0;
        for c in &mut p.cells {
            let next = (c.mass * keep).max(floor);
            if next < c.mass {
                lost += c.mass - next;
                c.mass = next;
            }
        }
        if lost > 0.0 {
            events.decay.push(DecayEvent {
                player: p.index,
                lost,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;
    use crate::geometry::Vec2;

    fn decaying(mass: f64) -> WorldState {
        let mut w = bare_world(&[(mass, Vec2::new(100.0, 100.0))]);
        w.config.mass_decay_enabled = true;
        w
    }

    #[test]
    fn thousand_loses_two_per_second() {
        let mut w = decaying(1000.0);
        w.tick = 60;
        let mut ev = TickEvents::default();
        apply_decay(&mut w, &mut ev);
        assert!((w.players[0].cells[0].mass - 998.0).abs() < 1e-12);
        assert!((ev.decay[0].lost - 2.0).abs() < 1e-12);
    }

    #[test]
    fn floor_holds() {
        let mut w = decaying(25.0);
        w.tick = 60;
        let mut ev = TickEvents::default();
        apply_decay(&mut w, &mut ev);
        assert_eq!(w.players[0].cells[0].mass, 25.0);
        assert!(ev.decay.is_empty());
    }

    #[test]
    fn off_interval_and_disabled_do_nothing() {
        let mut w = decaying(1000.0);
        w.tick = 61;
        let mut ev = TickEvents::default();
        apply_decay(&mut w, &mut ev);
        assert_eq!(w.players[0].cells[0].mass, 1000.0);
        w.config.mass_decay_enabled = false;
        w.tick = 120;
        apply_decay(&mut w, &mut ev);
        assert_eq!(w.players[0].cells[0].mass, 1000.0);
    }

    #[test]
    fn penalty_multiplies_rate_and_expires() {
        let mut w = decaying(1000.0);
        w.players[0].decay_multiplier = 2.0;
        w.players[0].virus_eat_streak = 4;
        w.players[0].last_virus_eat_tick = Some(50);
        w.tick = 60;
        let mut ev = TickEvents::default();
        apply_decay(&mut w, &mut ev);
        assert!((w.players[0].cells[0].mass - 996.0).abs() < 1e-9);
        w.tick = 50 + 1800;
        apply_decay(&mut w, &mut ev);
        assert_eq!(w.players[0].virus_eat_streak, 0);
        assert_eq!(w.players[0].decay_multiplier, 1.0);
    }
}
