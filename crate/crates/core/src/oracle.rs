//! Independent reference search used as ground truth in tests.
//!
//! This is a plain uniform-cost (Dijkstra) search over the exact same step
//! costs as the planner, with no heuristic. It is deliberately written as its
//! own frontier loop instead of sharing the planner's, so the two cannot
//! inherit each other's bugs. Optimality over the float-valued step costs is
//! what the planner is checked against; speed is a non-goal.

use std::collections::BinaryHeap;

use crate::map::{Cell, GridMap};
use crate::planner::{
    cell_at, check_endpoint, path_cost, reconstruct, step_cost, CostParams, Endpoint, PlanError,
    PlanResult,
};

/// Frontier entry ordered ascending by (g, row-major index).
struct QueueEntry {
    g: f64,
    idx: usize,
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .g
            .total_cmp(&self.g)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Exhaustive uniform-cost search; the returned `total_cost` is provably
/// optimal for the shared step-cost function. Tie-breaking (cost, then
/// row-major order) and the error contract match the planner.
pub fn dijkstra_reference(
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
    let start_idx = map.index(start);
    let goal_idx = map.index(goal);
    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut settled = vec![false; n];
    let mut queue = BinaryHeap::new();
    let mut expanded: u64 = 0;

    g[start_idx] = 0.0;
    queue.push(QueueEntry {
        g: 0.0,
        idx: start_idx,
    });

    while let Some(entry) = queue.pop() {
        if settled[entry.idx] {
            continue;
        }
        settled[entry.idx] = true;
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
            if settled[nb_idx] {
                continue;
            }
            let Some(cost) = step_cost(map, params, nb, kind) else {
                continue;
            };
            let ng = g_here + cost;
            if ng < g[nb_idx] {
                g[nb_idx] = ng;
                parent[nb_idx] = entry.idx;
                queue.push(QueueEntry { g: ng, idx: nb_idx });
            }
        }
    }
    Err(PlanError::NoRouteFound { expanded })
}
