//! Planar vectors and the mass laws shared by every subsystem.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::DomainError;

/// Simulation ticks per second of game time.
pub const TICK_RATE: f64 = 60.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn length_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn length(self) -> f64 {
        self.length_squared().sqrt()
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).length()
    }

    pub fn distance_squared(self, other: Vec2) -> f64 {
        (self - other).length_squared()
    }

    /// Unit vector in the same direction, or `None` for (near) zero vectors.
    pub fn normalized(self) -> Option<Vec2> {
        let len = self.length();
        if len > 1e-12 && len.is_finite() {
            Some(self * (1.0 / len))
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn clamp_to(self, width: f64, height: f64) -> Vec2 {
        Vec2::new(self.x.clamp(0.0, width), self.y.clamp(0.0, height))
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, rhs: Vec2) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Circle radius for a body of the given mass. Area is proportional to mass.
pub fn radius_of(mass: f64) -> Result<f64, DomainError> {
    if mass > 0.0 && mass.is_finite() {
        Ok(mass.sqrt())
    } else {
        Err(DomainError::NonPositiveMass(mass))
    }
}

/// Movement speed in world-units per second: `100 / mass^0.439`.
pub fn speed_of(mass: f64) -> Result<f64, DomainError> {
    if mass > 0.0 && mass.is_finite() {
        Ok(100.0 / mass.powf(0.439))
    } else {
        Err(DomainError::NonPositiveMass(mass))
    }
}

// Infallible forms for the hot path, where masses are positive by invariant.
#[inline]
pub(crate) fn radius(mass: f64) -> f64 {
    debug_assert!(mass > 0.0);
    mass.sqrt()
}

#[inline]
pub(crate) fn speed(mass: f64) -> f64 {
    debug_assert!(mass > 0.0);
    100.0 / mass.powf(0.439)
}
