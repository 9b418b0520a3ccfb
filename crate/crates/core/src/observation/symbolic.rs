use serde::{Deserialize, Serialize};

use crate::entity::{EntityKind, PELLET_MASS, VIRUS_MASS};
use crate::geometry::{radius, Vec2};
use crate::world::WorldState;

use super::viewport::{compute_viewport, Viewport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalInfo {
    pub arena: [f64; 2],
    pub tick: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntityRecord {
    pub kind: EntityKind,
    pub serial: u64,
    pub position: [f64; 2],
    pub radius: f64,
    pub mass: f64,
    pub velocity: [f64; 2],
    /// Owning player for cells and the ejecting player for blobs.
    pub owner: Option<usize>,
    pub own: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlayerInfo {
    /// `[left, top, right, bottom]` in world units.
    pub view: [f64; 4],
    pub score: f64,
    pub can_split: bool,
    pub can_eject: bool,
    pub cell_count: usize,
    pub overlap: Vec<EntityRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolicObservation {
    pub global: GlobalInfo,
    pub player: PlayerInfo,
}

impl SymbolicObservation {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("symbolic observation is always serializable")
    }
}

fn xy(v: Vec2) -> [f64; 2] {
    [v.x, v.y]
}

/// Entities intersecting the viewport, ordered by serial.
pub(crate) fn visible_entities(world: &WorldState, player: usize, view: &Viewport) -> Vec<EntityRecord> {
    let mut out = Vec::new();
    let rp = radius(PELLET_MASS);
    let lo = Vec2::new(view.left() - rp, view.top() - rp);
    let hi = Vec2::new(view.right() + rp, view.bottom() + rp);
    world.pellets.for_each_in_rect(lo, hi, |p| {
        if view.intersects_circle(p.position, rp) {
            out.push(EntityRecord {
                kind: EntityKind::Pellet,
                serial: p.id.serial,
                position: xy(p.position),
                radius: rp,
                mass: PELLET_MASS,
                velocity: [0.0, 0.0],
                owner: None,
                own: false,
            });
        }
    });
    let rv = radius(VIRUS_MASS);
    for v in &world.viruses {
        if view.intersects_circle(v.position, rv) {
            out.push(EntityRecord {
                kind: EntityKind::Virus,
                serial: v.id.serial,
                position: xy(v.position),
                radius: rv,
                mass: VIRUS_MASS,
                velocity: xy(v.velocity),
                owner: None,
                own: false,
            });
        }
    }
    for b in &world.blobs {
        if view.intersects_circle(b.position, b.radius()) {
            out.push(EntityRecord {
                kind: EntityKind::Blob,
                serial: b.id.serial,
                position: xy(b.position),
                radius: b.radius(),
                mass: b.mass,
                velocity: xy(b.velocity),
                owner: Some(b.source_owner),
                own: false,
            });
        }
    }
    for p in &world.players {
        for c in &p.cells {
            if view.intersects_circle(c.position, c.radius()) {
                out.push(EntityRecord {
                    kind: EntityKind::Cell,
                    serial: c.id.serial,
                    position: xy(c.position),
                    radius: c.radius(),
                    mass: c.mass,
                    velocity: xy(c.velocity),
                    owner: Some(p.index),
                    own: p.index == player,
                });
            }
        }
    }
    out.sort_by_key(|r| r.serial);
    out
}

/// Structured view of the same window the pixel observation shows.
///
/// # Panics
/// If the player has no cells.
pub fn encode_symbolic(world: &WorldState, player: usize) -> SymbolicObservation {
    let view = compute_viewport(world, player);
    let p = &world.players[player];
    let cfg = &world.config;
    let under_cap = p.cells.len() < cfg.cell_cap;
    SymbolicObservation {
        global: GlobalInfo {
            arena: [world.width(), world.height()],
            tick: world.tick,
        },
        player: PlayerInfo {
            view: [view.left(), view.top(), view.right(), view.bottom()],
            score: p.total_mass(),
            can_split: under_cap && p.cells.iter().any(|c| c.mass >= 2.0 * cfg.mass_floor),
            can_eject: p.cells.iter().any(|c| c.mass >= cfg.mass_floor + cfg.rules.eject_cost),
            cell_count: p.cells.len(),
            overlap: visible_entities(world, player, &view),
        },
    }
}
