//! Synthetic demo maps used by the bundled scenarios and benchmarks.

use crate::map::{Cell, CellClass, GridMap};

/// Start cell of the two-corridor demo map (on the good corridor).
pub const TWO_CORRIDOR_START: Cell = Cell { x: 8, y: 128 };
/// Goal cell of the two-corridor demo map.
pub const TWO_CORRIDOR_GOAL: Cell = Cell { x: 247, y: 128 };

/// A 256x256 map with two parallel east-west corridors: a good road at
/// y = 127..=129 carrying the start and goal, and a bad road detour at
/// y = 39..=41, joined by bad-road connectors at both ends. Blocking the good
/// corridor forces routes onto the roughly 100x more expensive detour.
pub fn two_corridor_map() -> GridMap {
    let (width, height) = (256u32, 256u32);
    let mut base = vec![CellClass::Background; (width * height) as usize];
    let mut paint = |x: u32, y: u32, class: CellClass| {
        base[(y * width + x) as usize] = class;
    };
    for x in 7..=248 {
        for y in 127..=129 {
            paint(x, y, CellClass::GoodRoad);
        }
        for y in 39..=41 {
            paint(x, y, CellClass::BadRoad);
        }
    }
    for y in 42..=126 {
        for x in 7..=9 {
            paint(x, y, CellClass::BadRoad);
        }
        for x in 246..=248 {
            paint(x, y, CellClass::BadRoad);
        }
    }
    GridMap::new(width, height, base).expect("dimensions are positive")
}
