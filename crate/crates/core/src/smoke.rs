//! Dynamic smoke model: particle emission around fire sources, wind drift,
//! aging, and rasterization to smoke hazard cells.
//!
//! Smoke is transient, unlike fire: the overlay is rebuilt from the live
//! particle set every tick, so cells clear as soon as their particles drift
//! away or expire.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::fire::{FireSource, Weather};
use crate::map::{Cell, GridMap, Hazard};

/// Gray range assigned to emitted particles.
pub const PARTICLE_GRAY_MIN: u8 = 80;
pub const PARTICLE_GRAY_MAX: u8 = 200;

/// A drifting gray-valued point with a finite lifetime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmokeParticle {
    /// Continuous (x, y) position in cell units.
    pub position: (f64, f64),
    /// Render gray, in [PARTICLE_GRAY_MIN, PARTICLE_GRAY_MAX].
    pub gray: u8,
    /// Age in ticks; the particle is removed once age exceeds the lifetime.
    pub age: u32,
}

/// Tunable constants of the smoke model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmokeParams {
    /// Particles emitted per unit of fire intensity per tick.
    pub emission_rate: f64,
    /// Width of the emission annulus outside the fire disc, in cell units.
    pub band: f64,
    /// Half-width in degrees of the emission cone around the downwind
    /// direction; the full circle is used when the wind is calm.
    pub angular_spread: f64,
    /// Coupling between wind speed and particle drift.
    pub drift_gain: f64,
    /// Particle lifetime in ticks.
    pub lifetime: u32,
}

impl Default for SmokeParams {
    fn default() -> Self {
        SmokeParams {
            emission_rate: 10.0,
            band: 3.0,
            angular_spread: 60.0,
            drift_gain: 1.0,
            lifetime: 25,
        }
    }
}

/// Emit `ceil(emission_rate * intensity)` fresh particles around a source.
///
/// Each particle is placed at `center + rho * (cos psi, sin psi)` with `rho`
/// uniform in `[radius, radius + band]` and `psi` uniform within
/// `angular_spread` degrees of the wind direction (uniform over the full
/// circle when the wind is calm). Grays are uniform in the particle band.
pub fn emit_smoke<R: Rng>(
    f: &FireSource,
    p: &SmokeParams,
    w: &Weather,
    rng: &mut R,
) -> Vec<SmokeParticle> {
    let count = (p.emission_rate * f.intensity).ceil().max(0.0) as usize;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let rho = rng.random_range(f.radius..=f.radius + p.band);
        let psi_deg = if w.wind_speed > 0.0 {
            w.wind_direction + rng.random_range(-p.angular_spread..=p.angular_spread)
        } else {
            rng.random_range(0.0..360.0)
        };
        let psi = psi_deg.to_radians();
        let gray = rng.random_range(PARTICLE_GRAY_MIN..=PARTICLE_GRAY_MAX);
        out.push(SmokeParticle {
            position: (f.center.0 + rho * psi.cos(), f.center.1 + rho * psi.sin()),
            gray,
            age: 0,
        });
    }
    out
}

/// Drift particles downwind, age them, and drop the expired ones.
pub fn advect_smoke(particles: &mut Vec<SmokeParticle>, w: &Weather, p: &SmokeParams, dt: u32) {
    let (ux, uy) = w.direction_vector();
    let step = p.drift_gain * w.wind_speed * dt as f64;
    for particle in particles.iter_mut() {
        particle.position.0 += step * ux;
        particle.position.1 += step * uy;
        particle.age += dt;
    }
    particles.retain(|particle| particle.age <= p.lifetime);
}

/// Rebuild the smoke overlay from the live particle set.
///
/// A cell is smoke when it contains at least one particle (by floor of the
/// continuous position) and is not on fire; the stored gray is the maximum
/// over its particles. Smoke cells without particles this tick are cleared.
/// Fire cells are never touched.
pub fn rasterize_smoke(particles: &[SmokeParticle], map: &mut GridMap) {
    for y in 0..map.height() {
        for x in 0..map.width() {
            let c = Cell::new(x, y);
            if map.hazard(c).is_smoke() {
                map.set_hazard(c, Hazard::None);
            }
        }
    }
    for particle in particles {
        let (px, py) = (particle.position.0.floor(), particle.position.1.floor());
        if px < 0.0 || py < 0.0 || px >= map.width() as f64 || py >= map.height() as f64 {
            continue;
        }
        let cell = Cell::new(px as u32, py as u32);
        match map.hazard(cell) {
            Hazard::Fire => {}
            Hazard::Smoke(g) => map.set_hazard(cell, Hazard::Smoke(g.max(particle.gray))),
            Hazard::None => map.set_hazard(cell, Hazard::Smoke(particle.gray)),
        }
    }
}
