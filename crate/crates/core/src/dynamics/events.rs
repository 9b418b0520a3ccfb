use serde::{Deserialize, Serialize};
use xxhash_rust::xxh3::Xxh3;

use crate::entity::EntityId;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EatEvent {
    pub eater: EntityId,
    pub eater_owner: usize,
    pub eaten: EntityId,
    /// Owner of the eaten entity when it was a cell.
    pub eaten_owner: Option<usize>,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeathEvent {
    pub player: usize,
    pub death_mass: f64,
    pub tick: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RespawnEvent {
    pub player: usize,
    pub cell: EntityId,
    pub mass: f64,
    pub tick: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitEvent {
    pub player: usize,
    pub parent: EntityId,
    pub child: EntityId,
    pub tick: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EjectEvent {
    pub player: usize,
    pub cell: EntityId,
    pub blob: EntityId,
    /// Mass removed from the cell.
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeEvent {
    pub player: usize,
    pub kept: EntityId,
    pub absorbed: EntityId,
    pub tick: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VirusPopEvent {
    pub player: usize,
    pub cell: EntityId,
    pub virus: EntityId,
    pub fragments: usize,
    pub tick: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VirusSpawnEvent {
    pub parent: EntityId,
    pub child: EntityId,
    pub tick: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayEvent {
    pub player: usize,
    pub lost: f64,
}

/// Everything that happened during one tick.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TickEvents {
    pub tick: u64,
    pub eats: Vec<EatEvent>,
    pub deaths: Vec<DeathEvent>,
    pub respawns: Vec<RespawnEvent>,
    pub splits: Vec<SplitEvent>,
    pub ejects: Vec<EjectEvent>,
    pub merges: Vec<MergeEvent>,
    pub virus_pops: Vec<VirusPopEvent>,
    pub virus_spawns: Vec<VirusSpawnEvent>,
    pub decay: Vec<DecayEvent>,
    /// Blobs consumed by viruses.
    pub blobs_fed: usize,
    /// Pellets removed because a virus covered them.
    pub pellets_destroyed: usize,
}

impl TickEvents {
    /// Change in `player`'s total mass implied by the events alone.
    pub fn mass_delta(&self, player: usize) -> f64 {
        let mut delta = 0.0;
        for e in &self.eats {
            if e.eater_owner == player {
                delta += e.mass;
            }
            if e.eaten_owner == Some(player) {
                delta -= e.mass;
            }
        }
        for d in self.decay.iter().filter(|d| d.player == player) {
            delta -= d.lost;
        }
        for e in self.ejects.iter().filter(|e| e.player == player) {
            delta -= e.cost;
        }
        for r in self.respawns.iter().filter(|r| r.player == player) {
            delta += r.mass;
        }
        delta
    }

    pub fn deaths_of(&self, player: usize) -> usize {
        self.deaths.iter().filter(|d| d.player == player).count()
    }

    pub fn digest_into(&self, h: &mut Xxh3) {
        h.update(&self.tick.to_le_bytes());
        for e in &self.eats {
            h.update(&e.eater.serial.to_le_bytes());
            h.update(&e.eaten.serial.to_le_bytes());
            h.update(&e.mass.to_bits().to_le_bytes());
        }
        for d in &self.deaths {
            h.update(&(d.player as u64).to_le_bytes());
            h.update(&d.death_mass.to_bits().to_le_bytes());
        }
        for r in &self.respawns {
            h.update(&r.cell.serial.to_le_bytes());
        }
        for s in &self.splits {
            h.update(&s.child.serial.to_le_bytes());
        }
        for e in &self.ejects {
            h.update(&e.blob.serial.to_le_bytes());
        }
        for m in &self.merges {
            h.update(&m.absorbed.serial.to_le_bytes());
        }
        for v in &self.virus_pops {
            h.update(&v.virus.serial.to_le_bytes());
            h.update(&(v.fragments as u64).to_le_bytes());
        }
        for v in &self.virus_spawns {
            h.update(&v.child.serial.to_le_bytes());
        }
        h.update(&(self.blobs_fed as u64).to_le_bytes());
        h.update(&(self.pellets_destroyed as u64).to_le_bytes());
    }
}
