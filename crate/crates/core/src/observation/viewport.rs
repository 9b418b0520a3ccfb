use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::world::WorldState;

/// Square window onto the world.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Viewport {
    pub center: Vec2,
    pub side: f64,
}

impl Viewport {
    pub fn left(&self) -> f64 {
        self.center.x - self.side / 2.0
    }

    pub fn top(&self) -> f64 {
        self.center.y - self.side / 2.0
    }

    pub fn right(&self) -> f64 {
        self.center.x + self.side / 2.0
    }

    pub fn bottom(&self) -> f64 {
        self.center.y + self.side / 2.0
    }

    /// True when the circle intersects the viewport square.
    pub fn intersects_circle(&self, center: Vec2, r: f64) -> bool {
        let dx = (center.x - self.center.x).abs() - self.side / 2.0;
        let dy = (center.y - self.center.y).abs() - self.side / 2.0;
        let (dx, dy) = (dx.max(0.0), dy.max(0.0));
        dx * dx + dy * dy < r * r || (dx == 0.0 && dy == 0.0)
    }

    /// True when the circle lies strictly inside the viewport square.
    pub fn contains_circle(&self, center: Vec2, r: f64) -> bool {
        (center.x - self.center.x).abs() + r < self.side / 2.0
            && (center.y - self.center.y).abs() + r < self.side / 2.0
    }

    /// Maps a cursor in [-1, 1]^2 to the world point it designates.
    pub fn cursor_to_world(&self, cursor: Vec2) -> Vec2 {
        self.center + cursor * (self.side / 2.0)
    }

    /// Inverse of `cursor_to_world`, without clamping.
    pub fn world_to_cursor(&self, p: Vec2) -> Vec2 {
        (p - self.center) * (2.0 / self.side)
    }
}

/// Viewport of a living player: centred on its mass-weighted centroid and
/// wide enough to hold every cell with a margin. Fully observable worlds
/// frame the whole arena instead.
///
/// # Panics
/// If the player has no cells.
pub fn compute_viewport(world: &WorldState, player: usize) -> Viewport {
    let p = &world.players[player];
    let view = &world.config.view;
    if view.fully_observable {
        let center = Vec2::new(world.width() / 2.0, world.height() / 2.0);
        let reach = p
            .cells
            .iter()
            .map(|c| {
                let d = c.position - center;
                d.x.abs().max(d.y.abs()) + c.radius()
            })
            .fold(0.0, f64::max);
        let mut side = world.width().max(world.height());
        if 2.0 * reach >= side {
            side = view.fov_margin * 2.0 * reach;
        }
        return Viewport { center, side };
    }
    let center = p.centroid().expect("viewport of a dead player");
    let extent = p
        .cells
        .iter()
        .map(|c| c.position.distance(center) + c.radius())
        .fold(0.0, f64::max);
    let side = view.base_view.max(view.fov_margin * 2.0 * extent);
    Viewport { center, side }
}
