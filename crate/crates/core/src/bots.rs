//! Fixed heuristic opponents.

use crate::dynamics::{ControlInput, Discrete};
use crate::entity::{BotBrain, BotKind, Cell};
use crate::geometry::Vec2;
use crate::world::WorldState;

/// Closest opposing cell satisfying `pred` within `reach` of `from`; ties go
/// to the lowest serial.
fn nearest_opponent(
    world: &WorldState,
    me: usize,
    from: Vec2,
    reach: f64,
    pred: impl Fn(&Cell) -> bool,
) -> Option<&Cell> {
    let mut best: Option<(f64, &Cell)> = None;
    for p in world.players.iter().filter(|p| p.index != me) {
        for c in p.cells.iter().filter(|c| pred(c)) {
            let d = c.position.distance(from);
            if d > reach {
                continue;
            }
            let better = match best {
                None => true,
                Some((bd, bc)) => d < bd || (d == bd && c.id.serial < bc.id.serial),
            };
            if better {
                best = Some((d, c));
            }
        }
    }
    best.map(|(_, c)| c)
}

/// World-space cursor target chosen by `kind` for player `me`.
///
/// # Panics
/// If the player has no cells.
pub fn heuristic_target(world: &WorldState, me: usize, kind: BotKind, hunt_radius: f64, shy_radius: f64) -> Vec2 {
    let player = &world.players[me];
    let centroid = player.centroid().expect("bot must be alive");
    let largest = player.largest_mass();
    let ratio = world.config.rules.eat_ratio;

    if kind.is_shy() {
        if let Some(threat) = nearest_opponent(world, me, centroid, shy_radius, |c| c.mass >= ratio * largest) {
            let away = (centroid - threat.position).normalized().unwrap_or(Vec2::new(1.0, 0.0));
            return centroid + away * shy_radius;
        }
    }
    if kind.is_aggressive() {
        if let Some(prey) = nearest_opponent(world, me, centroid, hunt_radius, |c| largest >= ratio * c.mass) {
            return prey.position;
        }
    }
    world.pellets.nearest(centroid).map_or(centroid, |p| p.position)
}

/// World-space target for any bot brain.
pub fn brain_target(world: &WorldState, me: usize, brain: &BotBrain) -> Vec2 {
    match *brain {
        BotBrain::Heuristic {
            kind,
            hunt_radius,
            shy_radius,
        } => heuristic_target(world, me, kind, hunt_radius, shy_radius),
        BotBrain::Stationary => world.players[me].centroid().expect("bot must be alive"),
    }
}

/// One tick's control for a bot. Bots never split or eject.
///
/// # Panics
/// If `me` is not a bot or has no cells.
pub fn bot_decide(world: &WorldState, me: usize) -> ControlInput {
    let brain = world.players[me].bot.as_ref().expect("player is not a bot");
    ControlInput::new(me, brain_target(world, me, brain), Discrete::None)
}

/// Controls for every bot in player order.
pub fn decide_all(world: &WorldState) -> Vec<ControlInput> {
    world
        .players
        .iter()
        .filter(|p| p.bot.is_some())
        .map(|p| bot_decide(world, p.index))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::test_support::*;

    fn with_brain(w: &mut WorldState, player: usize, kind: BotKind) {
        w.players[player].bot = Some(BotBrain::heuristic(kind));
    }

    #[test]
    fn hungry_goes_for_closest_pellet() {
        let mut w = bare_world(&[(25.0, Vec2::new(20.0, 20.0)), (25.0, Vec2::new(100.0, 100.0))]);
        with_brain(&mut w, 1, BotKind::Hungry);
        add_pellet(&mut w, Vec2::new(109.0, 100.0));
        add_pellet(&mut w, Vec2::new(100.0, 95.0));
        let c = bot_decide(&w, 1);
        assert_eq!(c.cursor_world, Vec2::new(100.0, 95.0));
        assert_eq!(c.discrete, Discrete::None);
    }

    #[test]
    fn pellet_ties_break_on_serial() {
        let mut w = bare_world(&[(25.0, Vec2::new(20.0, 20.0)), (25.0, Vec2::new(100.0, 100.0))]);
        with_brain(&mut w, 1, BotKind::Hungry);
        add_pellet(&mut w, Vec2::new(107.0, 100.0));
        add_pellet(&mut w, Vec2::new(93.0, 100.0));
        assert_eq!(bot_decide(&w, 1).cursor_world, Vec2::new(107.0, 100.0));
    }

    #[test]
    fn shy_flees_directly_away() {
        let mut w = bare_world(&[(500.0, Vec2::new(60.0, 70.0)), (25.0, Vec2::new(100.0, 100.0))]);
        with_brain(&mut w, 1, BotKind::AggressiveShy);
        add_pellet(&mut w, Vec2::new(90.0, 90.0));
        let c = bot_decide(&w, 1).cursor_world;
        let dir = (c - Vec2::new(100.0, 100.0)).normalized().unwrap();
        let threat_dir = (Vec2::new(60.0, 70.0) - Vec2::new(100.0, 100.0)).normalized().unwrap();
        assert!((dir.dot(threat_dir) + 1.0).abs() < 1e-12);
        assert!(((c - Vec2::new(100.0, 100.0)).length() - 80.0).abs() < 1e-9);
    }

    #[test]
    fn aggressive_prefers_prey_over_nearer_pellets() {
        let mut w = bare_world(&[(40.0, Vec2::new(150.0, 100.0)), (100.0, Vec2::new(100.0, 100.0))]);
        with_brain(&mut w, 1, BotKind::Aggressive);
        add_pellet(&mut w, Vec2::new(103.0, 100.0));
        assert_eq!(bot_decide(&w, 1).cursor_world, Vec2::new(150.0, 100.0));
        with_brain(&mut w, 1, BotKind::Hungry);
        assert_eq!(bot_decide(&w, 1).cursor_world, Vec2::new(103.0, 100.0));
    }

    #[test]
    fn non_shy_ignores_threats_and_uneatable_prey_is_skipped() {
        let mut w = bare_world(&[(90.0, Vec2::new(130.0, 100.0)), (100.0, Vec2::new(100.0, 100.0))]);
        with_brain(&mut w, 1, BotKind::Aggressive);
        assert_eq!(bot_decide(&w, 1).cursor_world, Vec2::new(100.0, 100.0));
    }

    #[test]
    fn empty_arena_means_stay_put() {
        let mut w = bare_world(&[(25.0, Vec2::new(20.0, 20.0)), (25.0, Vec2::new(100.0, 100.0))]);
        w.players[0].cells.clear();
        with_brain(&mut w, 1, BotKind::Hungry);
        assert_eq!(bot_decide(&w, 1).cursor_world, Vec2::new(100.0, 100.0));
    }

    #[test]
    fn stationary_holds_centroid() {
        let mut w = bare_world(&[(25.0, Vec2::new(20.0, 20.0)), (25.0, Vec2::new(100.0, 100.0))]);
        add_pellet(&mut w, Vec2::new(101.0, 100.0));
        assert_eq!(bot_decide(&w, 1).cursor_world, Vec2::new(100.0, 100.0));
        assert_eq!(decide_all(&w).len(), 1);
    }
}
