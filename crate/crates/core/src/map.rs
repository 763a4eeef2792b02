//! Raster road-network map: base cell classes, hazard overlay, legend I/O and rendering.
//!
//! Coordinates are `(x, y)` = (column, row) with the origin at the top-left,
//! matching image coordinates. The base layer (background / good road / bad
//! road) is fixed at load time; the hazard overlay (fire / smoke) is
//! re-rasterized by the simulation each tick.

use std::path::Path;

use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Per-channel tolerance when matching a pixel against the legend.
pub const LEGEND_TOLERANCE: u8 = 30;

/// Gray band (r = g = b) recognized as smoke on map input.
pub const SMOKE_GRAY_MIN: u8 = 50;
/// Upper end of the smoke gray band.
pub const SMOKE_GRAY_MAX: u8 = 220;

pub const COLOR_BACKGROUND: [u8; 3] = [0, 0, 0];
pub const COLOR_GOOD_ROAD: [u8; 3] = [0, 255, 0];
pub const COLOR_BAD_ROAD: [u8; 3] = [255, 255, 255];
pub const COLOR_FIRE: [u8; 3] = [255, 0, 0];
/// Route pixels are a darker red than fire so a rendered route can never be
/// mistaken for a fire cell when the image is read back.
pub const COLOR_ROUTE: [u8; 3] = [200, 0, 0];
pub const COLOR_START: [u8; 3] = [0, 0, 255];
pub const COLOR_GOAL: [u8; 3] = [255, 255, 0];

/// Base class of a map cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellClass {
    Background,
    GoodRoad,
    BadRoad,
}

/// Hazard overlay value of a cell. Smoke carries the gray level used when the
/// cell is rendered; it has no effect on traversability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hazard {
    None,
    Fire,
    Smoke(u8),
}

impl Hazard {
    pub fn is_fire(self) -> bool {
        matches!(self, Hazard::Fire)
    }

    pub fn is_smoke(self) -> bool {
        matches!(self, Hazard::Smoke(_))
    }
}

/// What the planner sees for a cell after compositing base class and hazard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraversalClass {
    GoodRoad,
    BadRoad,
    Forbidden,
}

/// A cell coordinate: `x` is the column, `y` the row, both 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub x: u32,
    pub y: u32,
}

impl Cell {
    pub fn new(x: u32, y: u32) -> Self {
        Cell { x, y }
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Whether a step between 8-connected cells is axis-aligned or diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveKind {
    Cardinal,
    Diagonal,
}

/// Result of classifying a single pixel against the legend.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PixelClass {
    Background,
    GoodRoad,
    BadRoad,
    Fire,
    Smoke(u8),
}

#[derive(Debug, Error)]
pub enum MapError {
    #[error("cannot read map: {0}")]
    Io(#[from] std::io::Error),
    #[error("image error: {0}")]
    Image(#[from] image::ImageError),
    #[error("pixel ({x},{y}) has color ({},{},{}) farther than {LEGEND_TOLERANCE} from every legend color", .color[0], .color[1], .color[2])]
    UnclassifiablePixel { x: u32, y: u32, color: [u8; 3] },
    #[error("map must be at least 1x1, got {width}x{height}")]
    EmptyMap { width: u32, height: u32 },
    #[error("route cell {0} is out of bounds")]
    RouteOutOfBounds(Cell),
}

/// Chebyshev (per-channel max) distance between two colors.
fn chebyshev(a: [u8; 3], b: [u8; 3]) -> u8 {
    let d = |x: u8, y: u8| x.abs_diff(y);
    d(a[0], b[0]).max(d(a[1], b[1])).max(d(a[2], b[2]))
}

/// Distance from a color to the nearest gray (v,v,v) with v in the smoke band,
/// together with that gray value.
fn smoke_band_distance(c: [u8; 3]) -> (u8, u8) {
    let lo = c[0].min(c[1]).min(c[2]);
    let hi = c[0].max(c[1]).max(c[2]);
    // Chebyshev distance to (v,v,v) is max(hi - v, v - lo); minimized at the
    // midpoint of [lo, hi], then clamped into the smoke band.
    let mid = ((lo as u16 + hi as u16) / 2) as u8;
    let v = mid.clamp(SMOKE_GRAY_MIN, SMOKE_GRAY_MAX);
    let dist = (hi.saturating_sub(v)).max(v.saturating_sub(lo));
    (dist, v)
}

/// Classify one RGB pixel against the map legend.
///
/// The nearest legend entry in per-channel max distance wins, provided it is
/// within [`LEGEND_TOLERANCE`]; ties resolve in legend order (background,
/// good road, bad road, fire, smoke). `None` means no legend color is within
/// tolerance.
pub fn classify_pixel(color: [u8; 3]) -> Option<PixelClass> {
    let (smoke_dist, smoke_gray) = smoke_band_distance(color);
    let candidates = [
        (chebyshev(color, COLOR_BACKGROUND), PixelClass::Background),
        (chebyshev(color, COLOR_GOOD_ROAD), PixelClass::GoodRoad),
        (chebyshev(color, COLOR_BAD_ROAD), PixelClass::BadRoad),
        (chebyshev(color, COLOR_FIRE), PixelClass::Fire),
        (smoke_dist, PixelClass::Smoke(smoke_gray)),
    ];
    let (best_dist, best) = candidates
        .iter()
        .copied()
        .min_by_key(|(d, _)| *d)
        .expect("legend is non-empty");
    (best_dist <= LEGEND_TOLERANCE).then_some(best)
}

/// The planner's world: an immutable base raster plus a mutable hazard overlay.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    width: u32,
    height: u32,
    base: Vec<CellClass>,
    hazard: Vec<Hazard>,
}

impl GridMap {
    /// Build a map with the given base layer and a clear hazard overlay.
    pub fn new(width: u32, height: u32, base: Vec<CellClass>) -> Result<Self, MapError> {
        if width == 0 || height == 0 {
            return Err(MapError::EmptyMap { width, height });
        }
        assert_eq!(
            base.len(),
            (width * height) as usize,
            "base layer must hold exactly width*height entries"
        );
        let hazard = vec![Hazard::None; base.len()];
        Ok(GridMap {
            width,
            height,
            base,
            hazard,
        })
    }

    /// Build an all-one-class map, mostly useful in tests.
    pub fn filled(width: u32, height: u32, class: CellClass) -> Self {
        GridMap::new(width, height, vec![class; (width * height) as usize])
            .expect("dimensions are positive")
    }

    /// Classify every pixel of an RGB image into base and hazard layers.
    pub fn from_image(img: &RgbImage) -> Result<Self, MapError> {
        let (width, height) = img.dimensions();
        if width == 0 || height == 0 {
            return Err(MapError::EmptyMap { width, height });
        }
        let mut base = Vec::with_capacity((width * height) as usize);
        let mut hazard = Vec::with_capacity((width * height) as usize);
        for y in 0..height {
            for x in 0..width {
                let Rgb(color) = *img.get_pixel(x, y);
                let class =
                    classify_pixel(color).ok_or(MapError::UnclassifiablePixel { x, y, color })?;
                let (b, h) = match class {
                    PixelClass::Background => (CellClass::Background, Hazard::None),
                    PixelClass::GoodRoad => (CellClass::GoodRoad, Hazard::None),
                    PixelClass::BadRoad => (CellClass::BadRoad, Hazard::None),
                    // A hazard pixel hides whatever was underneath; the base
                    // layer falls back to background.
                    PixelClass::Fire => (CellClass::Background, Hazard::Fire),
                    PixelClass::Smoke(g) => (CellClass::Background, Hazard::Smoke(g)),
                };
                base.push(b);
                hazard.push(h);
            }
        }
        Ok(GridMap {
            width,
            height,
            base,
            hazard,
        })
    }

    /// Load a map from a PNG file (8-bit RGB; alpha is ignored on read).
    pub fn load_png<P: AsRef<Path>>(path: P) -> Result<Self, MapError> {
        let img = image::ImageReader::open(path)?.decode()?.to_rgb8();
        GridMap::from_image(&img)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x < self.width && c.y < self.height
    }

    /// Row-major index of a cell; the planner's tie-break order.
    pub fn index(&self, c: Cell) -> usize {
        debug_assert!(self.in_bounds(c));
        (c.y * self.width + c.x) as usize
    }

    pub fn base(&self, c: Cell) -> CellClass {
        self.base[self.index(c)]
    }

    pub fn hazard(&self, c: Cell) -> Hazard {
        self.hazard[self.index(c)]
    }

    pub fn set_hazard(&mut self, c: Cell, h: Hazard) {
        let i = self.index(c);
        self.hazard[i] = h;
    }

    /// Number of cells whose hazard satisfies the predicate.
    pub fn count_hazard(&self, pred: impl Fn(Hazard) -> bool) -> usize {
        self.hazard.iter().filter(|h| pred(**h)).count()
    }

    /// Iterate all cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        let w = self.width;
        (0..self.height).flat_map(move |y| (0..w).map(move |x| Cell::new(x, y)))
    }

    /// Traversal class after compositing: any hazard or background base is
    /// forbidden, otherwise the base road class.
    pub fn effective_class(&self, c: Cell) -> TraversalClass {
        match (self.base(c), self.hazard(c)) {
            (_, Hazard::Fire) | (_, Hazard::Smoke(_)) => TraversalClass::Forbidden,
            (CellClass::Background, _) => TraversalClass::Forbidden,
            (CellClass::GoodRoad, Hazard::None) => TraversalClass::GoodRoad,
            (CellClass::BadRoad, Hazard::None) => TraversalClass::BadRoad,
        }
    }

    /// In-bounds 8-connected neighbors of `c`, tagged cardinal or diagonal,
    /// in row-major (dy, dx) order.
    pub fn neighbors8(&self, c: Cell) -> impl Iterator<Item = (Cell, MoveKind)> + '_ {
        debug_assert!(self.in_bounds(c));
        let (cx, cy) = (c.x as i64, c.y as i64);
        let (w, h) = (self.width as i64, self.height as i64);
        [
            (-1i64, -1i64),
            (-1, 0),
            (-1, 1),
            (0, -1),
            (0, 1),
            (1, -1),
            (1, 0),
            (1, 1),
        ]
        .into_iter()
        .filter_map(move |(dy, dx)| {
            let (nx, ny) = (cx + dx, cy + dy);
            if nx < 0 || ny < 0 || nx >= w || ny >= h {
                return None;
            }
            let kind = if dx != 0 && dy != 0 {
                MoveKind::Diagonal
            } else {
                MoveKind::Cardinal
            };
            Some((Cell::new(nx as u32, ny as u32), kind))
        })
    }

    /// Render the map (base + hazard overlay) with an optional route and
    /// optional start/goal markers, using the legend colors.
    pub fn render(
        &self,
        route: Option<&[Cell]>,
        markers: Option<(Cell, Cell)>,
    ) -> Result<RgbImage, MapError> {
        let mut img = RgbImage::new(self.width, self.height);
        for c in self.cells() {
            let color = match self.hazard(c) {
                Hazard::Fire => COLOR_FIRE,
                Hazard::Smoke(g) => [g, g, g],
                Hazard::None => match self.base(c) {
                    CellClass::Background => COLOR_BACKGROUND,
                    CellClass::GoodRoad => COLOR_GOOD_ROAD,
                    CellClass::BadRoad => COLOR_BAD_ROAD,
                },
            };
            img.put_pixel(c.x, c.y, Rgb(color));
        }
        if let Some(route) = route {
            for &c in route {
                if !self.in_bounds(c) {
                    return Err(MapError::RouteOutOfBounds(c));
                }
                img.put_pixel(c.x, c.y, Rgb(COLOR_ROUTE));
            }
        }
        if let Some((start, goal)) = markers {
            self.stamp_disc(&mut img, start, COLOR_START);
            self.stamp_disc(&mut img, goal, COLOR_GOAL);
        }
        Ok(img)
    }

    /// Paint a radius-2 disc clipped to bounds (the start/goal markers).
    fn stamp_disc(&self, img: &mut RgbImage, center: Cell, color: [u8; 3]) {
        let (cx, cy) = (center.x as i64, center.y as i64);
        for dy in -2i64..=2 {
            for dx in -2i64..=2 {
                if dx * dx + dy * dy > 4 {
                    continue;
                }
                let (x, y) = (cx + dx, cy + dy);
                if x >= 0 && y >= 0 && (x as u32) < self.width && (y as u32) < self.height {
                    img.put_pixel(x as u32, y as u32, Rgb(color));
                }
            }
        }
    }

    /// Render and write a PNG in one step.
    pub fn save_png<P: AsRef<Path>>(
        &self,
        path: P,
        route: Option<&[Cell]>,
        markers: Option<(Cell, Cell)>,
    ) -> Result<(), MapError> {
        let img = self.render(route, markers)?;
        img.save(path).map_err(MapError::from)
    }
}
