use serde::Serialize;

use crate::entity::{Pellet, VIRUS_MASS};
use crate::geometry::{radius, Vec2};
use crate::world::WorldState;

use super::viewport::{compute_viewport, Viewport};

pub const CHANNELS: usize = 4;
pub const PELLET_CHANNEL: usize = 0;
pub const VIRUS_CHANNEL: usize = 1;
pub const ENEMY_CHANNEL: usize = 2;
pub const SELF_CHANNEL: usize = 3;

/// Four binary planes (pellets, viruses, enemy cells and blobs, own cells
/// plus gridlines), stored channel-major then row-major. Row index grows
/// with world y.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PixelObservation {
    pub resolution: usize,
    pub tick: u64,
    pub viewport: Viewport,
    #[serde(skip)]
    pub data: Vec<f32>,
}

impl PixelObservation {
    pub fn blank(resolution: usize, tick: u64, viewport: Viewport) -> Self {
        Self {
            resolution,
            tick,
            viewport,
            data: vec![0.0; CHANNELS * resolution * resolution],
        }
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.resolution, self.resolution, CHANNELS]
    }

    pub fn plane(&self, channel: usize) -> &[f32] {
        let n2 = self.resolution * self.resolution;
        &self.data[channel * n2..(channel + 1) * n2]
    }

    pub fn get(&self, channel: usize, row: usize, col: usize) -> f32 {
        let n = self.resolution;
        self.data[channel * n * n + row * n + col]
    }

    /// Raw little-endian f32 buffer, plane-major (channel, row, column).
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.data.len() * 4);
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Decodes a plane-major buffer of `4 * n * n` little-endian floats.
    pub fn planes_from_le_bytes(bytes: &[u8], resolution: usize) -> Option<Vec<f32>> {
        if bytes.len() != CHANNELS * resolution * resolution * 4 {
            return None;
        }
        Some(
            bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect(),
        )
    }
}

/// Pixel-space circle: centre and squared radius in pixel units.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PixelDisc {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

impl PixelDisc {
    pub(crate) fn project(view: &Viewport, n: usize, center: Vec2, r: f64) -> Self {
        let scale = n as f64 / view.side;
        Self {
            cx: (center.x - view.left()) * scale,
            cy: (center.y - view.top()) * scale,
            r: r * scale,
        }
    }

    /// Coverage test shared by the rasterizer and any brute-force check:
    /// the pixel centre lies strictly inside the disc.
    pub(crate) fn covers(&self, row: usize, col: usize) -> bool {
        let dx = col as f64 + 0.5 - self.cx;
        let dy = row as f64 + 0.5 - self.cy;
        dx * dx + dy * dy < self.r * self.r
    }
}

fn span(center: f64, r: f64, n: usize) -> Option<(usize, usize)> {
    let lo = (center - r - 0.5).floor();
    let hi = (center + r - 0.5).ceil();
    if hi < 0.0 || lo >= n as f64 || !lo.is_finite() || !hi.is_finite() {
        return None;
    }
    Some((lo.max(0.0) as usize, (hi as usize).min(n - 1)))
}

#[allow(clippy::needless_range_loop)]
fn fill(plane: &mut [f32], n: usize, disc: PixelDisc, value: f32) {
    let (Some((c0, c1)), Some((r0, r1))) = (span(disc.cx, disc.r, n), span(disc.cy, disc.r, n)) else {
        return;
    };
    for row in r0..=r1 {
        let line = &mut plane[row * n..(row + 1) * n];
        for col in c0..=c1 {
            if disc.covers(row, col) {
                line[col] = value;
            }
        }
    }
}

fn draw_grid(plane: &mut [f32], n: usize, view: &Viewport, world: &WorldState) {
    let pitch = world.config.view.grid_pitch;
    let intensity = world.config.view.grid_intensity;
    let scale = n as f64 / view.side;
    let (w, h) = (world.width(), world.height());
    let inside = |world_coord: f64, limit: f64| (0.0..=limit).contains(&world_coord);
    let col_world = |col: usize| view.left() + (col as f64 + 0.5) / scale;
    let row_world = |row: usize| view.top() + (row as f64 + 0.5) / scale;

    let line_pixels = |origin: f64, limit: f64| {
        let mut out = Vec::new();
        let first = (origin / pitch).ceil().max(0.0) as u64;
        let mut k = first;
        loop {
            let x = k as f64 * pitch;
            if x > limit || x > origin + view.side {
                break;
            }
            let p = ((x - origin) * scale).floor();
            if p >= 0.0 && p < n as f64 {
                out.push(p as usize);
            }
            k += 1;
        }
        out
    };
    for col in line_pixels(view.left(), w) {
        for row in 0..n {
            if inside(row_world(row), h) {
                plane[row * n + col] = intensity;
            }
        }
    }
    for row in line_pixels(view.top(), h) {
        for col in 0..n {
            if inside(col_world(col), w) {
                plane[row * n + col] = intensity;
            }
        }
    }
}

/// Rasterizes the player's view into an `n x n x 4` binary tensor.
///
/// # Panics
/// If the player has no cells.
pub fn render_pixel_obs(world: &WorldState, player: usize, n: usize) -> PixelObservation {
    let view = compute_viewport(world, player);
    render_with_viewport(world, player, n, view)
}

pub(crate) fn render_with_viewport(world: &WorldState, player: usize, n: usize, view: Viewport) -> PixelObservation {
    let mut obs = PixelObservation::blank(n, world.tick, view);
    let n2 = n * n;
    let (pellets, rest) = obs.data.split_at_mut(n2);
    let (viruses, rest) = rest.split_at_mut(n2);
    let (enemies, own) = rest.split_at_mut(n2);

    let rp = radius(1.0);
    let margin = Vec2::new(rp, rp);
    let lo = Vec2::new(view.left(), view.top()) - margin;
    let hi = Vec2::new(view.right(), view.bottom()) + margin;
    world.pellets.for_each_in_rect(lo, hi, |p: &Pellet| {
        fill(pellets, n, PixelDisc::project(&view, n, p.position, rp), 1.0);
    });

    let rv = radius(VIRUS_MASS);
    for v in &world.viruses {
        if view.intersects_circle(v.position, rv) {
            fill(viruses, n, PixelDisc::project(&view, n, v.position, rv), 1.0);
        }
    }
    for b in &world.blobs {
        let r = b.radius();
        if view.intersects_circle(b.position, r) {
            fill(enemies, n, PixelDisc::project(&view, n, b.position, r), 1.0);
        }
    }

    draw_grid(own, n, &view, world);
    for p in &world.players {
        let plane: &mut [f32] = if p.index == player { own } else { enemies };
        for c in &p.cells {
            let r = c.radius();
            if view.intersects_circle(c.position, r) {
                fill(plane, n, PixelDisc::project(&view, n, c.position, r), 1.0);
            }
        }
    }
    obs
}
