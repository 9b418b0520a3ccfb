#![allow(dead_code)]

use agarcl_core::config::{PlayerSpec, WorldConfig};
use agarcl_core::entity::{BotBrain, BotKind};
use agarcl_core::observation::Viewport;
use agarcl_core::rng::WorldRng;
use agarcl_core::{ControlInput, Discrete, Vec2, WorldState};

/// Random but valid world configuration drawn from `seed`.
pub fn random_config(seed: u64) -> WorldConfig {
    let mut r = WorldRng::new(seed, 7);
    let side = r.uniform(120.0, 320.0);
    let players = 1 + r.below(5) as usize;
    let mut specs = vec![PlayerSpec::agent(r.uniform(25.0, 1500.0))];
    for _ in 1..players {
        let brain = match r.below(5) {
            4 => BotBrain::Stationary,
            k => BotBrain::heuristic(BotKind::ALL[k as usize]),
        };
        specs.push(PlayerSpec::bot(r.uniform(25.0, 600.0), brain));
    }
    WorldConfig {
        arena_width: side,
        arena_height: side * r.uniform(0.8, 1.2),
        max_pellets: r.below(300) as usize,
        min_viruses: r.below(7) as usize,
        decay_interval: 60,
        pellet_regen_interval: 120 * (1 + r.below(5) as u64),
        mass_decay_enabled: r.below(2) == 0,
        virus_regen_enabled: r.below(4) != 0,
        obs_resolution: 32,
        seed,
        players: specs,
        ..WorldConfig::default()
    }
}

/// Random control for every player, split/eject included.
pub fn random_controls(world: &WorldState, r: &mut WorldRng) -> Vec<ControlInput> {
    world
        .players
        .iter()
        .map(|p| {
            let c = p.centroid().unwrap();
            let target = c + Vec2::new(r.uniform(-80.0, 80.0), r.uniform(-80.0, 80.0));
            let d = match r.below(12) {
                0 => Discrete::Split,
                1 => Discrete::Eject,
                _ => Discrete::None,
            };
            ControlInput::new(p.index, target, d)
        })
        .collect()
}

/// Whole-frame rasterization oracle: every pixel against every entity,
/// using the documented pixel-centre rule.
pub fn brute_force_planes(world: &WorldState, player: usize, view: &Viewport, n: usize) -> Vec<f32> {
    let mut out = vec![0.0f32; 4 * n * n];
    let scale = n as f64 / view.side;
    let mut paint = |ch: usize, center: Vec2, r: f64| {
        let cx = (center.x - view.left()) * scale;
        let cy = (center.y - view.top()) * scale;
        let rr = r * scale;
        for row in 0..n {
            for col in 0..n {
                let dx = col as f64 + 0.5 - cx;
                let dy = row as f64 + 0.5 - cy;
                if dx * dx + dy * dy < rr * rr {
                    out[ch * n * n + row * n + col] = 1.0;
                }
            }
        }
    };
    for p in world.pellets.iter() {
        paint(0, p.position, 1.0);
    }
    for v in &world.viruses {
        paint(1, v.position, 10.0);
    }
    for b in &world.blobs {
        paint(2, b.position, b.mass.sqrt());
    }
    for p in &world.players {
        for c in &p.cells {
            paint(if p.index == player { 3 } else { 2 }, c.position, c.mass.sqrt());
        }
    }
    out
}
