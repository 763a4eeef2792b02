//! Deterministic wildfire escape-route planning on raster road maps.
//!
//! The crate simulates dynamic fire and smoke hazards over a
//! condition-weighted road raster and plans evacuation routes with a
//! class-weighted best-first search:
//!
//! - [`map`] owns the raster world: pixel-legend I/O, the base road classes,
//!   the hazard overlay, and rendering.
//! - [`fire`] and [`smoke`] advance the hazards: wind-driven growing fire
//!   discs with probabilistic annulus spread and merging, and drifting smoke
//!   particles with finite lifetimes.
//! - [`planner`] searches the composited grid with per-class
//!   cardinal/diagonal weights; [`oracle`] is the independent uniform-cost
//!   reference it is tested against.
//! - [`sim`] drives the whole loop tick by tick, moving an evacuee along the
//!   current route and replanning whenever hazards invalidate it.
//!
//! Everything is deterministic under a fixed scenario seed.

pub mod fire;
pub mod map;
pub mod oracle;
pub mod planner;
pub mod sim;
pub mod smoke;
pub mod synth;

pub use fire::{FireParams, FireSource, Weather};
pub use map::{Cell, CellClass, GridMap, Hazard, MapError, MoveKind, TraversalClass};
pub use oracle::dijkstra_reference;
pub use planner::{
    heuristic, path_cost, plan, step_cost, ClassWeights, CostParams, Endpoint, PlanError,
    PlanResult,
};
pub use sim::{
    run, run_with, Outcome, Scenario, ScenarioError, SimReport, SimState, TickRecord, WeatherPhase,
};
pub use smoke::{SmokeParams, SmokeParticle};
