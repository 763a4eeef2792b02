//! Dynamic fire model: wind-driven source advection, radius growth,
//! probabilistic annulus spread, source merging, and rasterization onto the
//! hazard overlay.
//!
//! A fire source is a disc with a continuous center in cell units. Per tick
//! the simulation advects it downwind, grows its radius linearly, ignites
//! road cells in the annulus just outside the disc, merges overlapping
//! sources, and repaints the disc as fire hazard. Fire hazard is permanent:
//! nothing in this module ever clears a fire cell.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::map::{Cell, CellClass, GridMap, Hazard};

/// A burning disc: continuous center, radius and intensity in cell units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FireSource {
    /// Continuous (x, y) position in cell units.
    pub center: (f64, f64),
    /// Disc radius, strictly positive and non-decreasing over ticks.
    pub radius: f64,
    /// Dimensionless burn intensity, drives spread probability and smoke
    /// emission volume.
    pub intensity: f64,
}

impl FireSource {
    pub fn new(cx: f64, cy: f64, radius: f64, intensity: f64) -> Self {
        FireSource {
            center: (cx, cy),
            radius,
            intensity,
        }
    }

    /// Euclidean distance from this source's center to a cell coordinate.
    pub fn distance_to(&self, c: Cell) -> f64 {
        let dx = c.x as f64 - self.center.0;
        let dy = c.y as f64 - self.center.1;
        (dx * dx + dy * dy).sqrt()
    }
}

/// Wind state. Direction is in degrees with 0 = +x (east), measured clockwise
/// in image coordinates, so 90 points along +y (down the screen). Speed is in
/// cell units per tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weather {
    pub wind_direction: f64,
    pub wind_speed: f64,
}

impl Weather {
    pub fn new(wind_direction: f64, wind_speed: f64) -> Self {
        Weather {
            wind_direction: wind_direction.rem_euclid(360.0),
            wind_speed,
        }
    }

    pub fn calm() -> Self {
        Weather::new(0.0, 0.0)
    }

    /// Unit vector of the wind direction in image coordinates.
    pub fn direction_vector(&self) -> (f64, f64) {
        let theta = self.wind_direction.to_radians();
        (theta.cos(), theta.sin())
    }

    /// Wind vector scaled by speed.
    pub fn wind_vector(&self) -> (f64, f64) {
        let (ux, uy) = self.direction_vector();
        (ux * self.wind_speed, uy * self.wind_speed)
    }
}

/// Tunable constants of the fire model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FireParams {
    /// Radius growth in cell units per tick.
    pub growth_rate: f64,
    /// Coupling between wind speed and center displacement.
    pub advect_gain: f64,
    /// Base ignition probability per annulus cell per tick.
    pub p_base: f64,
    /// Downwind boost applied to the ignition probability, in [0, 1].
    pub wind_bias: f64,
}

impl Default for FireParams {
    fn default() -> Self {
        FireParams {
            growth_rate: 1.0,
            advect_gain: 0.5,
            p_base: 0.15,
            wind_bias: 0.5,
        }
    }
}

/// Width of the ignition annulus outside the fire disc, in cell units.
pub const SPREAD_BAND: f64 = 1.5;

/// Spread probability saturates at intensity 2.
pub const INTENSITY_CAP: f64 = 2.0;

/// Move a fire source downwind: `center += advect_gain * speed * dt * dir`.
/// Radius and intensity are unchanged.
pub fn advect_fire(f: &FireSource, w: &Weather, p: &FireParams, dt: f64) -> FireSource {
    debug_assert!(dt >= 0.0);
    let (ux, uy) = w.direction_vector();
    let step = p.advect_gain * w.wind_speed * dt;
    FireSource {
        center: (f.center.0 + step * ux, f.center.1 + step * uy),
        ..*f
    }
}

/// Grow a fire source's radius linearly: `radius += growth_rate * dt`.
pub fn grow_fire(f: &FireSource, p: &FireParams, dt: f64) -> FireSource {
    debug_assert!(dt >= 0.0);
    FireSource {
        radius: f.radius + p.growth_rate * dt,
        ..*f
    }
}

/// Probabilistic ignition mask for one source.
///
/// Candidates are road-class cells (good or bad base) in the annulus
/// `radius < dist <= radius + SPREAD_BAND` around the source center (clamped
/// into the map). Each candidate is included independently with probability
/// `min(1, p_base * min(intensity, 2) * (1 + wind_bias * cos(phi)))` where
/// `phi` is the angle between the wind vector and the center-to-cell offset;
/// the wind term is dropped when the wind is calm. Candidates are visited in
/// row-major order so a seeded generator reproduces the mask exactly.
pub fn spread_mask<R: Rng>(
    f: &FireSource,
    map: &GridMap,
    w: &Weather,
    p: &FireParams,
    rng: &mut R,
) -> Vec<Cell> {
    let cx = f.center.0.clamp(0.0, (map.width() - 1) as f64);
    let cy = f.center.1.clamp(0.0, (map.height() - 1) as f64);
    let outer = f.radius + SPREAD_BAND;
    let x_min = ((cx - outer).floor().max(0.0)) as u32;
    let y_min = ((cy - outer).floor().max(0.0)) as u32;
    let x_max = ((cx + outer).ceil() as i64).min(map.width() as i64 - 1) as u32;
    let y_max = ((cy + outer).ceil() as i64).min(map.height() as i64 - 1) as u32;

    let (wx, wy) = w.direction_vector();
    let windy = w.wind_speed > 0.0;
    let intensity_factor = f.intensity.min(INTENSITY_CAP);

    let mut mask = Vec::new();
    for y in y_min..=y_max {
        for x in x_min..=x_max {
            let cell = Cell::new(x, y);
            if !matches!(map.base(cell), CellClass::GoodRoad | CellClass::BadRoad) {
                continue;
            }
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            let dist = (dx * dx + dy * dy).sqrt();
            if dist <= f.radius || dist > outer {
                continue;
            }
            let cos_phi = if windy && dist > 0.0 {
                (dx * wx + dy * wy) / dist
            } else {
                0.0
            };
            let prob =
                (p.p_base * intensity_factor * (1.0 + p.wind_bias * cos_phi)).clamp(0.0, 1.0);
            // One draw per candidate, in visit order, keeps the stream stable.
            if rng.random::<f64>() < prob {
                mask.push(cell);
            }
        }
    }
    mask
}

/// Merge overlapping fire sources to a fixpoint.
///
/// While any pair of discs touches (`dist <= r1 + r2`), the pair is replaced
/// by the smallest disc enclosing both: the larger disc when one contains the
/// other, otherwise a disc of radius `(dist + r1 + r2) / 2` centered on the
/// segment between the two centers. Intensities add. The result is sorted by
/// center (x, then y).
pub fn merge_fires(sources: &[FireSource]) -> Vec<FireSource> {
    let mut out: Vec<FireSource> = sources.to_vec();
    sort_by_center(&mut out);
    loop {
        let Some((i, j)) = first_touching_pair(&out) else {
            return out;
        };
        let b = out.remove(j);
        let a = out.remove(i);
        out.push(enclosing_disc(&a, &b));
        sort_by_center(&mut out);
    }
}

fn sort_by_center(sources: &mut [FireSource]) {
    sources.sort_by(|a, b| {
        a.center
            .0
            .total_cmp(&b.center.0)
            .then(a.center.1.total_cmp(&b.center.1))
    });
}

fn first_touching_pair(sources: &[FireSource]) -> Option<(usize, usize)> {
    for i in 0..sources.len() {
        for j in (i + 1)..sources.len() {
            if center_distance(&sources[i], &sources[j]) <= sources[i].radius + sources[j].radius {
                return Some((i, j));
            }
        }
    }
    None
}

fn center_distance(a: &FireSource, b: &FireSource) -> f64 {
    let dx = b.center.0 - a.center.0;
    let dy = b.center.1 - a.center.1;
    (dx * dx + dy * dy).sqrt()
}

fn enclosing_disc(a: &FireSource, b: &FireSource) -> FireSource {
    let intensity = a.intensity + b.intensity;
    let dist = center_distance(a, b);
    let (small, large) = if a.radius <= b.radius { (a, b) } else { (b, a) };
    if dist + small.radius <= large.radius {
        // One disc already contains the other.
        return FireSource {
            intensity,
            ..*large
        };
    }
    let radius = (dist + a.radius + b.radius) / 2.0;
    // Center sits on the segment from a to b, radius - a.radius along it.
    let t = (radius - a.radius) / dist;
    FireSource {
        center: (
            a.center.0 + (b.center.0 - a.center.0) * t,
            a.center.1 + (b.center.1 - a.center.1) * t,
        ),
        radius,
        intensity,
    }
}

/// Paint every cell within `radius` of a source center as fire hazard.
/// Fire overwrites smoke and is never cleared here.
pub fn rasterize_fire(sources: &[FireSource], map: &mut GridMap) {
    for f in sources {
        let x_min = ((f.center.0 - f.radius).floor().max(0.0)) as i64;
        let y_min = ((f.center.1 - f.radius).floor().max(0.0)) as i64;
        let x_max = ((f.center.0 + f.radius).ceil() as i64).min(map.width() as i64 - 1);
        let y_max = ((f.center.1 + f.radius).ceil() as i64).min(map.height() as i64 - 1);
        if x_min > x_max || y_min > y_max {
            continue;
        }
        for y in y_min..=y_max {
            for x in x_min..=x_max {
                let cell = Cell::new(x as u32, y as u32);
                if f.distance_to(cell) <= f.radius {
                    map.set_hazard(cell, Hazard::Fire);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn approx(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn advect_zero_wind_keeps_center() {
        let f = FireSource::new(10.0, 10.0, 3.0, 1.0);
        let p = FireParams::default();
        let moved = advect_fire(&f, &Weather::new(45.0, 0.0), &p, 1.0);
        assert_eq!(moved.center, f.center);
    }

    #[test]
    fn advect_follows_wind_axis() {
        let f = FireSource::new(10.0, 10.0, 3.0, 1.0);
        let p = FireParams {
            advect_gain: 0.5,
            ..FireParams::default()
        };
        let east = advect_fire(&f, &Weather::new(0.0, 2.0), &p, 1.0);
        assert!(approx(east.center.0, 11.0) && approx(east.center.1, 10.0));
        let south = advect_fire(&f, &Weather::new(90.0, 2.0), &p, 1.0);
        assert!(approx(south.center.0, 10.0) && approx(south.center.1, 11.0));
        assert_eq!(east.radius, f.radius);
        assert_eq!(east.intensity, f.intensity);
    }

    #[test]
    fn grow_is_linear_in_dt() {
        let f = FireSource::new(0.0, 0.0, 5.0, 1.0);
        let p = FireParams {
            growth_rate: 1.0,
            ..FireParams::default()
        };
        assert!(approx(grow_fire(&f, &p, 1.0).radius, 6.0));
        assert!(approx(grow_fire(&f, &p, 0.0).radius, 5.0));
        let slow = FireParams {
            growth_rate: 0.25,
            ..FireParams::default()
        };
        assert!(approx(grow_fire(&f, &slow, 4.0).radius, 6.0));
    }

    #[test]
    fn spread_mask_zero_probability_is_empty() {
        let map = GridMap::filled(21, 21, CellClass::GoodRoad);
        let f = FireSource::new(10.0, 10.0, 3.0, 1.0);
        let p = FireParams {
            p_base: 0.0,
            ..FireParams::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(spread_mask(&f, &map, &Weather::calm(), &p, &mut rng).is_empty());
    }

    #[test]
    fn spread_mask_probability_one_takes_whole_annulus() {
        let map = GridMap::filled(21, 21, CellClass::GoodRoad);
        let f = FireSource::new(10.0, 10.0, 3.0, 1.0);
        let p = FireParams {
            p_base: 1.0,
            wind_bias: 0.0,
            ..FireParams::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mask = spread_mask(&f, &map, &Weather::calm(), &p, &mut rng);
        // Annulus (3, 4.5] around an interior center covers exactly 40 cells.
        assert_eq!(mask.len(), 40);
        for c in &mask {
            let d = f.distance_to(*c);
            assert!(d > f.radius && d <= f.radius + SPREAD_BAND);
        }
    }

    #[test]
    fn spread_mask_skips_background_cells() {
        let mut base = vec![CellClass::Background; 21 * 21];
        // A single road cell inside the annulus.
        base[(10 * 21 + 14) as usize] = CellClass::GoodRoad;
        let map = GridMap::new(21, 21, base).unwrap();
        let f = FireSource::new(10.0, 10.0, 3.0, 1.0);
        let p = FireParams {
            p_base: 1.0,
            wind_bias: 0.0,
            ..FireParams::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mask = spread_mask(&f, &map, &Weather::calm(), &p, &mut rng);
        assert_eq!(mask, vec![Cell::new(14, 10)]);
    }

    #[test]
    fn spread_mask_is_deterministic_under_seed() {
        let map = GridMap::filled(31, 31, CellClass::GoodRoad);
        let f = FireSource::new(15.0, 15.0, 4.0, 1.5);
        let p = FireParams::default();
        let w = Weather::new(30.0, 2.0);
        let a = spread_mask(&f, &map, &w, &p, &mut ChaCha8Rng::seed_from_u64(9));
        let b = spread_mask(&f, &map, &w, &p, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn merge_keeps_disjoint_discs() {
        let sources = vec![
            FireSource::new(0.0, 0.0, 3.0, 1.0),
            FireSource::new(10.0, 0.0, 3.0, 1.0),
        ];
        let merged = merge_fires(&sources);
        assert_eq!(merged.len(), 2);
    }

    #[test]
    fn merge_produces_enclosing_disc() {
        let sources = vec![
            FireSource::new(0.0, 0.0, 4.0, 1.0),
            FireSource::new(6.0, 0.0, 4.0, 2.0),
        ];
        let merged = merge_fires(&sources);
        assert_eq!(merged.len(), 1);
        let m = merged[0];
        assert!(approx(m.center.0, 3.0) && approx(m.center.1, 0.0));
        assert!(approx(m.radius, 7.0));
        assert!(approx(m.intensity, 3.0));
    }

    #[test]
    fn merge_containment_keeps_larger_disc() {
        let sources = vec![
            FireSource::new(0.0, 0.0, 10.0, 1.0),
            FireSource::new(2.0, 0.0, 1.0, 0.5),
        ];
        let merged = merge_fires(&sources);
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].center, (0.0, 0.0));
        assert!(approx(merged[0].radius, 10.0));
        assert!(approx(merged[0].intensity, 1.5));
    }

    #[test]
    fn merge_chain_reaches_fixpoint() {
        // Three discs in a row where merging the first two reaches the third.
        let sources = vec![
            FireSource::new(0.0, 0.0, 3.0, 1.0),
            FireSource::new(5.0, 0.0, 3.0, 1.0),
            FireSource::new(9.0, 0.0, 2.0, 1.0),
        ];
        let merged = merge_fires(&sources);
        assert_eq!(merged.len(), 1);
        for i in 0..merged.len() {
            for j in (i + 1)..merged.len() {
                assert!(
                    center_distance(&merged[i], &merged[j]) > merged[i].radius + merged[j].radius
                );
            }
        }
    }

    #[test]
    fn rasterize_subcell_radius_marks_single_cell() {
        let mut map = GridMap::filled(11, 11, CellClass::GoodRoad);
        rasterize_fire(&[FireSource::new(5.0, 5.0, 0.6, 1.0)], &mut map);
        let fire: Vec<Cell> = map.cells().filter(|c| map.hazard(*c).is_fire()).collect();
        assert_eq!(fire, vec![Cell::new(5, 5)]);
    }

    #[test]
    fn rasterize_matches_brute_force_disc() {
        let mut map = GridMap::filled(11, 11, CellClass::GoodRoad);
        let f = FireSource::new(5.0, 5.0, 2.0, 1.0);
        rasterize_fire(&[f], &mut map);
        let mut expected = 0;
        for c in map.cells() {
            let inside = f.distance_to(c) <= f.radius;
            assert_eq!(map.hazard(c).is_fire(), inside, "cell {c}");
            expected += inside as usize;
        }
        assert_eq!(expected, 13);
    }

    #[test]
    fn rasterize_union_and_smoke_overwrite() {
        let mut map = GridMap::filled(20, 20, CellClass::GoodRoad);
        map.set_hazard(Cell::new(5, 5), Hazard::Smoke(100));
        let a = FireSource::new(5.0, 5.0, 2.0, 1.0);
        let b = FireSource::new(8.0, 5.0, 2.0, 1.0);
        rasterize_fire(&[a, b], &mut map);
        for c in map.cells() {
            let in_union = a.distance_to(c) <= a.radius || b.distance_to(c) <= b.radius;
            assert_eq!(map.hazard(c).is_fire(), in_union);
        }
    }
}
