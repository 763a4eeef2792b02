//! Class-weighted best-first route search on the hazard-composited grid.
//!
//! Each traversal class carries its own (cardinal, diagonal) weight pair.
//! Step costs are keyed on the destination cell's class; the heuristic is the
//! diagonal distance `d1 * max(dx, dy) + (d2 - d1) * min(dx, dy)` evaluated
//! with the weight pair of the node being estimated. With the default weights
//! the heuristic is exact octile distance on all-good-road maps; on mixed
//! maps the bad-road pair overestimates, so the search is a weighted A* that
//! may return suboptimal routes while strongly preferring good roads.
//! Hazarded cells are never entered.

use serde::{Deserialize, Serialize};
use std::collections::BinaryHeap;
use thiserror::Error;

use crate::map::{Cell, GridMap, MoveKind, TraversalClass};

/// Cardinal/diagonal step weights for one traversal class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub cardinal: f64,
    pub diagonal: f64,
}

impl ClassWeights {
    pub fn new(cardinal: f64, diagonal: f64) -> Self {
        ClassWeights { cardinal, diagonal }
    }

    fn pick(&self, kind: MoveKind) -> f64 {
        match kind {
            MoveKind::Cardinal => self.cardinal,
            MoveKind::Diagonal => self.diagonal,
        }
    }
}

/// Class-indexed step and heuristic weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostParams {
    pub good: ClassWeights,
    pub bad: ClassWeights,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            good: ClassWeights::new(1.0, 1.4),
            bad: ClassWeights::new(100.0, 140.0),
        }
    }
}

impl CostParams {
    /// Check the octile-shape condition `0 < d1 <= d2 <= 2*d1` for both pairs.
    /// NaN weights fail it.
    pub fn validate(&self) -> Result<(), String> {
        for (name, w) in [("good", self.good), ("bad", self.bad)] {
            let positive = w.cardinal > 0.0;
            if !positive {
                return Err(format!("cost_params.{name}.cardinal must be > 0"));
            }
            let octile_shape = w.cardinal <= w.diagonal && w.diagonal <= 2.0 * w.cardinal;
            if !octile_shape {
                return Err(format!(
                    "cost_params.{name}: need cardinal <= diagonal <= 2*cardinal"
                ));
            }
        }
        Ok(())
    }

    fn for_class(&self, class: TraversalClass) -> ClassWeights {
        match class {
            TraversalClass::GoodRoad => self.good,
            TraversalClass::BadRoad => self.bad,
            // Forbidden nodes are rejected before the heuristic is consulted;
            // fall back to the good pair for degenerate queries.
            TraversalClass::Forbidden => self.good,
        }
    }
}

/// Which endpoint of a query an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Start,
    Goal,
}

impl std::fmt::Display for Endpoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Endpoint::Start => write!(f, "start"),
            Endpoint::Goal => write!(f, "goal"),
        }
    }
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("{endpoint} inside hazard")]
    HazardAtEndpoint { endpoint: Endpoint },
    #[error("no route found ({expanded} nodes expanded)")]
    NoRouteFound { expanded: u64 },
    #[error("{endpoint} {cell} outside map bounds")]
    EndpointOutOfBounds { endpoint: Endpoint, cell: Cell },
}

/// A finished route with its accumulated cost and search effort.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanResult {
    /// Cells from start to goal inclusive; consecutive cells are 8-neighbors.
    pub path: Vec<Cell>,
    /// Sum of step costs along the path. The heuristic is zero at the goal,
    /// so this is also the route's final f-value.
    pub total_cost: f64,
    /// Nodes settled from the frontier.
    pub expanded: u64,
}

/// Cost of entering `to` with the given move kind, keyed on the destination
/// cell's effective class. `None` means the cell is forbidden.
pub fn step_cost(map: &GridMap, params: &CostParams, to: Cell, kind: MoveKind) -> Option<f64> {
    match map.effective_class(to) {
        TraversalClass::Forbidden => None,
        class => Some(params.for_class(class).pick(kind)),
    }
}

/// Weighted diagonal-distance estimate from `n` to `goal`, using the weight
/// pair of `n`'s effective class.
pub fn heuristic(n: Cell, goal: Cell, map: &GridMap, params: &CostParams) -> f64 {
    let w = params.for_class(map.effective_class(n));
    let dx = (n.x as i64 - goal.x as i64).unsigned_abs() as f64;
    let dy = (n.y as i64 - goal.y as i64).unsigned_abs() as f64;
    w.cardinal * dx.max(dy) + (w.diagonal - w.cardinal) * dx.min(dy)
}

/// Canonical cost of a path: steps are tallied per (class, move kind) and the
/// four buckets are combined in a fixed order, so equal step multisets always
/// produce bit-identical totals regardless of step order.
pub fn path_cost(map: &GridMap, params: &CostParams, path: &[Cell]) -> f64 {
    let mut counts = [0u64; 4]; // good-cardinal, good-diagonal, bad-cardinal, bad-diagonal
    for pair in path.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let dx = (a.x as i64 - b.x as i64).abs();
        let dy = (a.y as i64 - b.y as i64).abs();
        debug_assert!(
            dx <= 1 && dy <= 1 && (dx | dy) == 1,
            "not an 8-neighbor step"
        );
        let diagonal = dx == 1 && dy == 1;
        let slot = match map.effective_class(b) {
            TraversalClass::GoodRoad => diagonal as usize,
            TraversalClass::BadRoad => 2 + diagonal as usize,
            TraversalClass::Forbidden => {
                debug_assert!(false, "path enters forbidden cell {b}");
                diagonal as usize
            }
        };
        counts[slot] += 1;
    }
    let weights = [
        params.good.cardinal,
        params.good.diagonal,
        params.bad.cardinal,
        params.bad.diagonal,
    ];
    counts.iter().zip(weights).map(|(&n, w)| n as f64 * w).sum()
}

/// Frontier entry ordered ascending by (f, h, row-major index) through a
/// max-heap, which makes tie-breaking fully deterministic.
struct OpenEntry {
    f: f64,
    h: f64,
    idx: usize,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}

impl Eq for OpenEntry {}

impl Ord for OpenEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.h.total_cmp(&self.h))
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

pub(crate) fn check_endpoint(
    map: &GridMap,
    cell: Cell,
    endpoint: Endpoint,
) -> Result<(), PlanError> {
    if !map.in_bounds(cell) {
        return Err(PlanError::EndpointOutOfBounds { endpoint, cell });
    }
    if map.effective_class(cell) == TraversalClass::Forbidden {
        return Err(PlanError::HazardAtEndpoint { endpoint });
    }
    Ok(())
}

/// Best-first search from `start` to `goal` over 8-connected cells.
///
/// The frontier is ordered by f = g + h, ties broken by smaller h and then by
/// row-major cell order. Nodes are settled once; the first settled path to
/// the goal is returned with its canonical cost and the expansion count.
pub fn plan(
    map: &GridMap,
    params: &CostParams,
    start: Cell,
    goal: Cell,
) -> Result<PlanResult, PlanError> {
    check_endpoint(map, start, Endpoint::Start)?;
    check_endpoint(map, goal, Endpoint::Goal)?;
    if start == goal {
        return Ok(PlanResult {
            path: vec![start],
            total_cost: 0.0,
            expanded: 0,
        });
    }

    let n = (map.width() * map.height()) as usize;
    let goal_idx = map.index(goal);
    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    let mut expanded: u64 = 0;

    let start_idx = map.index(start);
    g[start_idx] = 0.0;
    let h0 = heuristic(start, goal, map, params);
    open.push(OpenEntry {
        f: h0,
        h: h0,
        idx: start_idx,
    });

    while let Some(entry) = open.pop() {
        if closed[entry.idx] {
            continue; // stale duplicate
        }
        closed[entry.idx] = true;
        expanded += 1;
        if entry.idx == goal_idx {
            let path = reconstruct(map, &parent, start_idx, goal_idx);
            let total_cost = path_cost(map, params, &path);
            return Ok(PlanResult {
                path,
                total_cost,
                expanded,
            });
        }
        let cell = cell_at(map, entry.idx);
        let g_here = g[entry.idx];
        for (nb, kind) in map.neighbors8(cell) {
            let nb_idx = map.index(nb);
            if closed[nb_idx] {
                continue;
            }
            let Some(cost) = step_cost(map, params, nb, kind) else {
                continue;
            };
            let ng = g_here + cost;
            if ng < g[nb_idx] {
                g[nb_idx] = ng;
                parent[nb_idx] = entry.idx;
                let h = heuristic(nb, goal, map, params);
                open.push(OpenEntry {
                    f: ng + h,
                    h,
                    idx: nb_idx,
                });
            }
        }
    }
    Err(PlanError::NoRouteFound { expanded })
}

pub(crate) fn cell_at(map: &GridMap, idx: usize) -> Cell {
    Cell::new((idx as u32) % map.width(), (idx as u32) / map.width())
}

pub(crate) fn reconstruct(
    map: &GridMap,
    parent: &[usize],
    start_idx: usize,
    goal_idx: usize,
) -> Vec<Cell> {
    let mut path = Vec::new();
    let mut idx = goal_idx;
    loop {
        path.push(cell_at(map, idx));
        if idx == start_idx {
            break;
        }
        idx = parent[idx];
        debug_assert!(idx != usize::MAX, "broken parent chain");
    }
    path.reverse();
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{CellClass, Hazard};

    fn map_with_rows(rows: &[&str]) -> GridMap {
        // '.' good road, 'B' bad road, '#' background, 'F' fire, 'S' smoke
        let height = rows.len() as u32;
        let width = rows[0].len() as u32;
        let mut base = Vec::new();
        let mut hazards = Vec::new();
        for (y, row) in rows.iter().enumerate() {
            assert_eq!(row.len() as u32, width);
            for (x, ch) in row.chars().enumerate() {
                let (b, h) = match ch {
                    '.' => (CellClass::GoodRoad, Hazard::None),
                    'B' => (CellClass::BadRoad, Hazard::None),
                    '#' => (CellClass::Background, Hazard::None),
                    'F' => (CellClass::GoodRoad, Hazard::Fire),
                    'S' => (CellClass::GoodRoad, Hazard::Smoke(128)),
                    _ => panic!("unknown cell char {ch}"),
                };
                base.push(b);
                hazards.push((Cell::new(x as u32, y as u32), h));
            }
        }
        let mut map = GridMap::new(width, height, base).unwrap();
        for (c, h) in hazards {
            if h != Hazard::None {
                map.set_hazard(c, h);
            }
        }
        map
    }

    #[test]
    fn step_cost_by_destination_class() {
        let map = map_with_rows(&[".B", "F#"]);
        let p = CostParams::default();
        assert_eq!(
            step_cost(&map, &p, Cell::new(0, 0), MoveKind::Diagonal),
            Some(1.4)
        );
        assert_eq!(
            step_cost(&map, &p, Cell::new(1, 0), MoveKind::Cardinal),
            Some(100.0)
        );
        assert_eq!(
            step_cost(&map, &p, Cell::new(0, 1), MoveKind::Cardinal),
            None
        );
        assert_eq!(
            step_cost(&map, &p, Cell::new(1, 1), MoveKind::Diagonal),
            None
        );
    }

    #[test]
    fn heuristic_matches_weighted_diagonal_distance() {
        let good = GridMap::filled(10, 10, CellClass::GoodRoad);
        let bad = GridMap::filled(10, 10, CellClass::BadRoad);
        let p = CostParams::default();
        let n = Cell::new(2, 3);
        let goal = Cell::new(7, 6);
        assert!((heuristic(n, goal, &good, &p) - 6.2).abs() < 1e-9);
        assert!((heuristic(n, goal, &bad, &p) - 620.0).abs() < 1e-9);
        assert_eq!(heuristic(goal, goal, &good, &p), 0.0);
    }

    #[test]
    fn plan_diagonal_on_open_map() {
        let map = GridMap::filled(3, 3, CellClass::GoodRoad);
        let p = CostParams::default();
        let r = plan(&map, &p, Cell::new(0, 0), Cell::new(2, 2)).unwrap();
        assert_eq!(r.path.len(), 3);
        assert!((r.total_cost - 2.8).abs() < 1e-12);
    }

    #[test]
    fn plan_start_equals_goal() {
        let map = GridMap::filled(3, 3, CellClass::GoodRoad);
        let p = CostParams::default();
        let r = plan(&map, &p, Cell::new(1, 1), Cell::new(1, 1)).unwrap();
        assert_eq!(r.path, vec![Cell::new(1, 1)]);
        assert_eq!(r.total_cost, 0.0);
    }

    #[test]
    fn plan_fails_on_bisected_map() {
        let map = map_with_rows(&["..F..", "..F..", "..F..", "..F..", "..F.."]);
        let p = CostParams::default();
        match plan(&map, &p, Cell::new(0, 0), Cell::new(4, 0)) {
            Err(PlanError::NoRouteFound { expanded }) => assert!(expanded > 0),
            other => panic!("expected NoRouteFound, got {other:?}"),
        }
    }

    #[test]
    fn plan_rejects_hazard_endpoints() {
        let map = map_with_rows(&["F.S"]);
        let p = CostParams::default();
        match plan(&map, &p, Cell::new(0, 0), Cell::new(1, 0)) {
            Err(PlanError::HazardAtEndpoint { endpoint }) => {
                assert_eq!(endpoint, Endpoint::Start)
            }
            other => panic!("expected start hazard, got {other:?}"),
        }
        match plan(&map, &p, Cell::new(1, 0), Cell::new(2, 0)) {
            Err(e @ PlanError::HazardAtEndpoint { endpoint }) => {
                assert_eq!(endpoint, Endpoint::Goal);
                assert_eq!(e.to_string(), "goal inside hazard");
            }
            other => panic!("expected goal hazard, got {other:?}"),
        }
    }

    #[test]
    fn plan_rejects_out_of_bounds_endpoints() {
        let map = GridMap::filled(3, 3, CellClass::GoodRoad);
        let p = CostParams::default();
        assert!(matches!(
            plan(&map, &p, Cell::new(9, 0), Cell::new(1, 1)),
            Err(PlanError::EndpointOutOfBounds {
                endpoint: Endpoint::Start,
                ..
            })
        ));
    }

    #[test]
    fn diagonal_between_hazards_is_legal() {
        // No corner-cutting rule: the diagonal step is allowed even when
        // both adjacent cardinal cells are forbidden.
        let map = map_with_rows(&[".F", "S."]);
        let p = CostParams::default();
        let r = plan(&map, &p, Cell::new(0, 0), Cell::new(1, 1)).unwrap();
        assert_eq!(r.path, vec![Cell::new(0, 0), Cell::new(1, 1)]);
        assert!((r.total_cost - 1.4).abs() < 1e-12);
    }

    #[test]
    fn plan_avoids_bad_row_when_detour_exists() {
        // Bad road row in the middle; a good-road route around it is cheaper.
        let map = map_with_rows(&["...", "BBB", "..."]);
        let p = CostParams::default();
        let r = plan(&map, &p, Cell::new(0, 0), Cell::new(0, 2)).unwrap();
        // Crossing the bad row once (cost 100 or 140) is unavoidable here,
        // so the route is 2 steps: into the bad row, out of it.
        assert_eq!(r.path.len(), 3);
        assert!((r.total_cost - 101.0).abs() < 1e-12);
    }

    #[test]
    fn plan_prefers_good_detour_over_bad_shortcut() {
        let map = map_with_rows(&["....", ".BB.", ".BB.", "...."]);
        let p = CostParams::default();
        let r = plan(&map, &p, Cell::new(0, 0), Cell::new(3, 3)).unwrap();
        // Entering any bad cell costs >= 100; the all-good way around is
        // far cheaper even though it is longer.
        assert!(r.total_cost < 10.0, "cost {}", r.total_cost);
        for c in &r.path {
            assert_ne!(map.effective_class(*c), TraversalClass::Forbidden);
        }
    }

    #[test]
    fn path_cost_is_order_independent() {
        let map = map_with_rows(&["....", "....", "...."]);
        let p = CostParams::default();
        // Two routes with the same step multiset in different orders.
        let a = vec![
            Cell::new(0, 0),
            Cell::new(1, 1),
            Cell::new(2, 1),
            Cell::new(3, 2),
        ];
        let b = vec![
            Cell::new(0, 0),
            Cell::new(1, 0),
            Cell::new(2, 1),
            Cell::new(3, 2),
        ];
        assert_eq!(
            path_cost(&map, &p, &a).to_bits(),
            path_cost(&map, &p, &b).to_bits()
        );
    }

    #[test]
    fn cost_params_validation() {
        assert!(CostParams::default().validate().is_ok());
        let bad = CostParams {
            good: ClassWeights::new(1.0, 2.5),
            bad: ClassWeights::new(100.0, 140.0),
        };
        assert!(bad.validate().is_err());
        let zero = CostParams {
            good: ClassWeights::new(0.0, 0.0),
            bad: ClassWeights::new(100.0, 140.0),
        };
        assert!(zero.validate().is_err());
    }
}
