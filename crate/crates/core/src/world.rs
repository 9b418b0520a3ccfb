//! Authoritative world state, construction and digests.

use xxhash_rust::xxh3::Xxh3;

use crate::config::{PelletPlacement, VirusLayout, WorldConfig};
use crate::entity::{
    Cell, EjectedBlob, EntityId, EntityKind, Pellet, PlayerState, Virus, VIRUS_MASS,
};
use crate::error::WorldError;
use crate::geometry::{radius, Vec2};
use crate::rng::WorldRng;
use crate::spatial::PelletStore;

/// Random attempts before a placement falls back to the best candidate.
pub const PLACEMENT_RETRIES: usize = 64;
const FALLBACK_GRID: usize = 32;

#[derive(Clone, Debug)]
pub struct WorldState {
    pub config: WorldConfig,
    pub tick: u64,
    pub players: Vec<PlayerState>,
    pub pellets: PelletStore,
    pub viruses: Vec<Virus>,
    pub blobs: Vec<EjectedBlob>,
    pub rng: WorldRng,
    pub(crate) next_serial: u64,
}

/// Builds the world at tick 0. Placement draws happen in a fixed order:
/// viruses, players, pellets.
pub fn create_world(config: WorldConfig) -> Result<WorldState, WorldError> {
    config.validate()?;
    let mut world = WorldState {
        pellets: PelletStore::new(config.arena_width, config.arena_height),
        rng: WorldRng::for_world(config.seed),
        config,
        tick: 0,
        players: Vec::new(),
        viruses: Vec::new(),
        blobs: Vec::new(),
        next_serial: 0,
    };
    world.place_initial_viruses()?;
    world.place_initial_players()?;
    world.place_initial_pellets()?;
    Ok(world)
}

impl WorldState {
    pub(crate) fn alloc_id(&mut self, kind: EntityKind) -> EntityId {
        let serial = self.next_serial;
        self.next_serial += 1;
        EntityId { kind, serial }
    }

    pub fn width(&self) -> f64 {
        self.config.arena_width
    }

    pub fn height(&self) -> f64 {
        self.config.arena_height
    }

    pub fn agent_index(&self) -> Option<usize> {
        self.players.iter().position(|p| p.is_learning_agent)
    }

    pub fn cells(&self) -> impl Iterator<Item = &Cell> {
        self.players.iter().flat_map(|p| p.cells.iter())
    }

    pub fn cell_count(&self) -> usize {
        self.players.iter().map(|p| p.cells.len()).sum()
    }

    pub fn total_cell_mass(&self) -> f64 {
        self.cells().map(|c| c.mass).sum()
    }

    fn place_initial_viruses(&mut self) -> Result<(), WorldError> {
        let r = radius(VIRUS_MASS);
        match self.config.virus_layout.clone() {
            VirusLayout::Uniform => {
                for _ in 0..self.config.min_viruses {
                    let mut spot = None;
                    for _ in 0..PLACEMENT_RETRIES {
                        let p = self.sample_inside(r);
                        if self
                            .viruses
                            .iter()
                            .all(|v| v.position.distance(p) >= 2.0 * r)
                        {
                            spot = Some(p);
                            break;
                        }
                    }
                    let p = spot.ok_or(WorldError::ArenaTooSmall {
                        width: self.width(),
                        height: self.height(),
                        what: "viruses",
                    })?;
                    self.spawn_virus(p);
                }
            }
            VirusLayout::Line { start, end, count } => {
                for i in 0..count {
                    let t = if count > 1 {
                        i as f64 / (count - 1) as f64
                    } else {
                        0.0
                    };
                    let p = (start + (end - start) * t).clamp_to(self.width(), self.height());
                    self.spawn_virus(p);
                }
            }
        }
        Ok(())
    }

    fn place_initial_players(&mut self) -> Result<(), WorldError> {
        let specs = self.config.players.clone();
        for (index, spec) in specs.iter().enumerate() {
            let position = match spec.start {
                Some(p) => p,
                None => {
                    let (p, clearance) = self.find_free_spot(spec.initial_mass);
                    if clearance < 0.0 {
                        return Err(WorldError::ArenaTooSmall {
                            width: self.width(),
                            height: self.height(),
                            what: "players",
                        });
                    }
                    p
                }
            };
            let id = self.alloc_id(EntityKind::Cell);
            self.players.push(PlayerState {
                index,
                cells: vec![Cell {
                    id,
                    owner: index,
                    mass: spec.initial_mass,
                    position,
                    velocity: Vec2::ZERO,
                    split_impulse: Vec2::ZERO,
                    merge_ready_tick: 0,
                    created_tick: 0,
                }],
                virus_eat_streak: 0,
                last_virus_eat_tick: None,
                decay_multiplier: 1.0,
                lifetime_deaths: 0,
                is_learning_agent: spec.learning,
                bot: spec.bot,
            });
        }
        Ok(())
    }

    fn place_initial_pellets(&mut self) -> Result<(), WorldError> {
        for _ in 0..self.config.max_pellets {
            if !self.spawn_pellet() {
                return Err(WorldError::ArenaTooSmall {
                    width: self.width(),
                    height: self.height(),
                    what: "pellets",
                });
            }
        }
        Ok(())
    }

    pub(crate) fn spawn_virus(&mut self, position: Vec2) -> EntityId {
        let id = self.alloc_id(EntityKind::Virus);
        self.viruses.push(Virus {
            id,
            position,
            velocity: Vec2::ZERO,
            feed_count: 0,
            last_feed_dir: Vec2::new(1.0, 0.0),
        });
        id
    }

    /// Samples a pellet position per the placement rule, avoiding viruses.
    /// Returns false if every attempt landed on a virus.
    pub(crate) fn spawn_pellet(&mut self) -> bool {
        for _ in 0..PLACEMENT_RETRIES {
            let p = self.sample_pellet_position();
            if !self.overlaps_virus(p, radius(1.0)) {
                let id = self.alloc_id(EntityKind::Pellet);
                self.pellets.insert(Pellet { id, position: p });
                return true;
            }
        }
        false
    }

    fn overlaps_virus(&self, p: Vec2, r: f64) -> bool {
        let reach = radius(VIRUS_MASS) + r;
        self.viruses
            .iter()
            .any(|v| v.position.distance_squared(p) < reach * reach)
    }

    fn sample_pellet_position(&mut self) -> Vec2 {
        match self.config.pellet_placement {
            PelletPlacement::Uniform => Vec2::new(
                self.rng.uniform(0.0, self.width()),
                self.rng.uniform(0.0, self.height()),
            ),
            PelletPlacement::SquarePath {
                half_side,
                band_width,
            } => {
                let center = Vec2::new(self.width() / 2.0, self.height() / 2.0);
                // Arc-length position along the square outline, then a lateral offset.
                let perimeter = 8.0 * half_side;
                let s = self.rng.uniform(0.0, perimeter);
                let off = self.rng.uniform(-band_width / 2.0, band_width / 2.0);
                let side = (s / (2.0 * half_side)).floor().min(3.0);
                let t = s - side * 2.0 * half_side - half_side;
                let (x, y) = match side as u8 {
                    0 => (t, -half_side + off),
                    1 => (half_side + off, t),
                    2 => (-t, half_side + off),
                    _ => (-half_side + off, -t),
                };
                center + Vec2::new(x, y)
            }
        }
    }

    /// Uniform point at least `margin` away from every wall (arena centre
    /// when the arena is narrower than `2 * margin`).
    fn sample_inside(&mut self, margin: f64) -> Vec2 {
        let (w, h) = (self.width(), self.height());
        let x = if w > 2.0 * margin {
            self.rng.uniform(margin, w - margin)
        } else {
            w / 2.0
        };
        let y = if h > 2.0 * margin {
            self.rng.uniform(margin, h - margin)
        } else {
            h / 2.0
        };
        Vec2::new(x, y)
    }

    /// Signed gap between a circle of `mass` at `p` and the nearest virus or
    /// cell heavier than `mass`. Negative means overlap.
    pub fn clearance(&self, p: Vec2, mass: f64) -> f64 {
        let r = radius(mass);
        let mut best = f64::INFINITY;
        for c in self.cells().filter(|c| c.mass > mass) {
            best = best.min(c.position.distance(p) - c.radius() - r);
        }
        let rv = radius(VIRUS_MASS);
        for v in &self.viruses {
            best = best.min(v.position.distance(p) - rv - r);
        }
        best
    }

    /// Rejection-samples a spot for a circle of `mass`; after the retry budget
    /// the random candidates plus a fixed grid are ranked by clearance.
    pub(crate) fn find_free_spot(&mut self, mass: f64) -> (Vec2, f64) {
        let r = radius(mass);
        let mut candidates = Vec::with_capacity(PLACEMENT_RETRIES);
        for _ in 0..PLACEMENT_RETRIES {
            let p = self.sample_inside(r);
            let c = self.clearance(p, mass);
            if c >= 0.0 {
                return (p, c);
            }
            candidates.push((p, c));
        }
        let (w, h) = (self.width(), self.height());
        let span = |len: f64, i: usize| {
            if len > 2.0 * r {
                r + (len - 2.0 * r) * (i as f64 + 0.5) / FALLBACK_GRID as f64
            } else {
                len / 2.0
            }
        };
        for gy in 0..FALLBACK_GRID {
            for gx in 0..FALLBACK_GRID {
                let p = Vec2::new(span(w, gx), span(h, gy));
                candidates.push((p, self.clearance(p, mass)));
            }
        }
        candidates
            .into_iter()
            .fold(None::<(Vec2, f64)>, |best, cand| match best {
                Some(b) if b.1 >= cand.1 => Some(b),
                _ => Some(cand),
            })
            .expect("candidate list is never empty")
    }

    /// Spawn point for a respawning player of the configured initial mass.
    pub fn respawn_position(&mut self) -> Vec2 {
        self.find_free_spot(self.config.initial_mass).0
    }

    /// Digest over a canonical serialization: config, tick, generator state,
    /// players, then every entity in serial order with exact float bits.
    pub fn state_hash(&self) -> u64 {
        let mut h = Xxh3::new();
        h.update(&config_bytes(&self.config));
        h.update(&self.tick.to_le_bytes());
        h.update(&self.rng.seed_bytes());
        h.update(&self.rng.stream().to_le_bytes());
        h.update(&self.rng.word_pos().to_le_bytes());
        h.update(&self.next_serial.to_le_bytes());
        for p in &self.players {
            h.update(&(p.index as u64).to_le_bytes());
            h.update(&p.virus_eat_streak.to_le_bytes());
            h.update(&p.last_virus_eat_tick.map_or(u64::MAX, |t| t).to_le_bytes());
            h.update(&p.decay_multiplier.to_bits().to_le_bytes());
            h.update(&p.lifetime_deaths.to_le_bytes());
        }

        enum Ref<'a> {
            Cell(&'a Cell),
            Pellet(Pellet),
            Virus(&'a Virus),
            Blob(&'a EjectedBlob),
        }
        let mut all: Vec<(u64, Ref)> = Vec::with_capacity(self.pellets.len() + 64);
        all.extend(self.cells().map(|c| (c.id.serial, Ref::Cell(c))));
        all.extend(self.pellets.iter().map(|p| (p.id.serial, Ref::Pellet(*p))));
        all.extend(self.viruses.iter().map(|v| (v.id.serial, Ref::Virus(v))));
        all.extend(self.blobs.iter().map(|b| (b.id.serial, Ref::Blob(b))));
        all.sort_unstable_by_key(|(s, _)| *s);

        let f = |h: &mut Xxh3, v: f64| h.update(&v.to_bits().to_le_bytes());
        let v2 = |h: &mut Xxh3, v: Vec2| {
            h.update(&v.x.to_bits().to_le_bytes());
            h.update(&v.y.to_bits().to_le_bytes());
        };
        for (serial, e) in &all {
            h.update(&serial.to_le_bytes());
            match e {
                Ref::Cell(c) => {
                    h.update(&[EntityKind::Cell.tag()]);
                    h.update(&(c.owner as u64).to_le_bytes());
                    f(&mut h, c.mass);
                    v2(&mut h, c.position);
                    v2(&mut h, c.velocity);
                    v2(&mut h, c.split_impulse);
                    h.update(&c.merge_ready_tick.to_le_bytes());
                    h.update(&c.created_tick.to_le_bytes());
                }
                Ref::Pellet(p) => {
                    h.update(&[EntityKind::Pellet.tag()]);
                    v2(&mut h, p.position);
                }
                Ref::Virus(v) => {
                    h.update(&[EntityKind::Virus.tag()]);
                    v2(&mut h, v.position);
                    v2(&mut h, v.velocity);
                    h.update(&v.feed_count.to_le_bytes());
                    v2(&mut h, v.last_feed_dir);
                }
                Ref::Blob(b) => {
                    h.update(&[EntityKind::Blob.tag()]);
                    v2(&mut h, b.position);
                    v2(&mut h, b.velocity);
                    f(&mut h, b.mass);
                    h.update(&(b.source_owner as u64).to_le_bytes());
                }
            }
        }
        h.digest()
    }
}

fn config_bytes(config: &WorldConfig) -> Vec<u8> {
    serde_json::to_vec(config).expect("world config always serializes")
}

/// Digest of a configuration alone.
pub fn config_digest(config: &WorldConfig) -> u64 {
    xxhash_rust::xxh3::xxh3_64(&config_bytes(config))
}
