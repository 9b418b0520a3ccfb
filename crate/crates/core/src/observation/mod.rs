//! Pixel and symbolic observations of the world from one player's viewpoint.

mod pixel;
mod symbolic;
mod viewport;

pub use pixel::{
    render_pixel_obs, PixelObservation, CHANNELS, ENEMY_CHANNEL, PELLET_CHANNEL, SELF_CHANNEL, VIRUS_CHANNEL,
};
pub use symbolic::{encode_symbolic, EntityRecord, GlobalInfo, PlayerInfo, SymbolicObservation};
pub use viewport::{compute_viewport, Viewport};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObsMode {
    #[default]
    Pixel,
    Symbolic,
}

impl std::str::FromStr for ObsMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pixel" => Ok(ObsMode::Pixel),
            "symbolic" => Ok(ObsMode::Symbolic),
            other => Err(format!("unknown observation mode `{other}` (expected pixel or symbolic)")),
        }
    }
}

impl ObsMode {
    pub fn name(self) -> &'static str {
        match self {
            ObsMode::Pixel => "pixel",
            ObsMode::Symbolic => "symbolic",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Observation {
    Pixel(PixelObservation),
    Symbolic(SymbolicObservation),
}

impl Observation {
    pub fn render(world: &crate::world::WorldState, player: usize, mode: ObsMode) -> Self {
        match mode {
            ObsMode::Pixel => Observation::Pixel(render_pixel_obs(world, player, world.config.obs_resolution)),
            ObsMode::Symbolic => Observation::Symbolic(encode_symbolic(world, player)),
        }
    }

    /// Wire encoding: raw little-endian f32 planes or compact JSON.
    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            Observation::Pixel(p) => p.to_le_bytes(),
            Observation::Symbolic(s) => s.to_json().into_bytes(),
        }
    }

    pub fn as_pixel(&self) -> Option<&PixelObservation> {
        match self {
            Observation::Pixel(p) => Some(p),
            Observation::Symbolic(_) => None,
        }
    }

    pub fn as_symbolic(&self) -> Option<&SymbolicObservation> {
        match self {
            Observation::Symbolic(s) => Some(s),
            Observation::Pixel(_) => None,
        }
    }
}
