//! Scenario-driven simulation loop: per-tick weather lookup, fire and smoke
//! advance, hazard rasterization, evacuee motion, route invalidation checks
//! and replanning.
//!
//! A run is a pure function of the scenario (including its seed): identical
//! inputs produce byte-identical reports and frames.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::fire::{
    advect_fire, grow_fire, merge_fires, rasterize_fire, spread_mask, FireParams, FireSource,
    Weather,
};
use crate::map::{Cell, GridMap, Hazard, TraversalClass};
use crate::planner::{plan, CostParams, PlanError};
use crate::smoke::{advect_smoke, emit_smoke, rasterize_smoke, SmokeParams, SmokeParticle};

/// One step of the piecewise-constant weather schedule: `weather` applies
/// from `from_tick` until the next entry takes over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeatherPhase {
    pub from_tick: u64,
    pub weather: Weather,
}

fn default_evacuee_speed() -> u32 {
    1
}

/// A complete simulation input: map reference, initial fires, weather
/// schedule, endpoints, model parameters, run length and seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Map PNG; relative paths resolve against the scenario file's directory.
    pub map: PathBuf,
    pub initial_fires: Vec<FireSource>,
    pub weather_schedule: Vec<WeatherPhase>,
    pub start: Cell,
    pub goal: Cell,
    #[serde(default)]
    pub fire_params: FireParams,
    #[serde(default)]
    pub smoke_params: SmokeParams,
    #[serde(default)]
    pub cost_params: CostParams,
    /// Total simulation length in ticks.
    pub ticks: u64,
    /// Cells the evacuee may advance per tick.
    #[serde(default = "default_evacuee_speed")]
    pub evacuee_speed: u32,
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

impl Scenario {
    /// Parse a scenario from raw JSON bytes.
    pub fn from_slice(bytes: &[u8]) -> Result<Self, ScenarioError> {
        let mut deserializer = serde_json::Deserializer::from_slice(bytes);
        let mut scenario: Scenario = serde_path_to_error::deserialize(&mut deserializer)
            .map_err(|e| ScenarioError::Parse(format!("{}: {}", e.path(), e.inner())))?;
        for phase in &mut scenario.weather_schedule {
            phase.weather = Weather::new(phase.weather.wind_direction, phase.weather.wind_speed);
        }
        Ok(scenario)
    }

    /// Read, parse and validate a scenario file. Also returns the SHA-256 of
    /// the file bytes, which the report records for provenance.
    pub fn load<P: AsRef<Path>>(path: P) -> Result<(Self, String), ScenarioError> {
        let bytes = std::fs::read(path)?;
        let hash = sha256_hex(&bytes);
        let scenario = Scenario::from_slice(&bytes)?;
        if let Some(problem) = scenario.validate().into_iter().next() {
            return Err(ScenarioError::Invalid(problem));
        }
        Ok((scenario, hash))
    }

    /// Resolve the map reference against the directory the scenario file
    /// lives in (absolute paths pass through).
    pub fn resolve_map_path(&self, scenario_path: &Path) -> PathBuf {
        if self.map.is_absolute() {
            self.map.clone()
        } else {
            scenario_path
                .parent()
                .unwrap_or_else(|| Path::new("."))
                .join(&self.map)
        }
    }

    /// Check every scenario invariant and return one message per violation,
    /// each prefixed with the offending field path.
    pub fn validate(&self) -> Vec<String> {
        // NaN fails both predicates on purpose.
        let non_negative = |v: f64| v >= 0.0;
        let positive = |v: f64| v > 0.0;

        let mut problems = Vec::new();
        if self.ticks < 1 {
            problems.push("ticks: must be >= 1".to_string());
        }
        if self.evacuee_speed < 1 {
            problems.push("evacuee_speed: must be >= 1".to_string());
        }
        if self.weather_schedule.is_empty() {
            problems.push("weather_schedule: must have at least one entry".to_string());
        } else {
            if self.weather_schedule[0].from_tick != 0 {
                problems.push("weather_schedule[0].from_tick: must be 0".to_string());
            }
            for (i, pair) in self.weather_schedule.windows(2).enumerate() {
                if pair[1].from_tick <= pair[0].from_tick {
                    problems.push(format!(
                        "weather_schedule[{}].from_tick: must increase over previous entry",
                        i + 1
                    ));
                }
            }
        }
        for (i, phase) in self.weather_schedule.iter().enumerate() {
            if !non_negative(phase.weather.wind_speed) {
                problems.push(format!(
                    "weather_schedule[{i}].weather.wind_speed: must be >= 0"
                ));
            }
        }
        for (i, f) in self.initial_fires.iter().enumerate() {
            if !positive(f.radius) {
                problems.push(format!("initial_fires[{i}].radius: must be > 0"));
            }
            if !non_negative(f.intensity) {
                problems.push(format!("initial_fires[{i}].intensity: must be >= 0"));
            }
        }
        let fp = &self.fire_params;
        if !non_negative(fp.growth_rate) {
            problems.push("fire_params.growth_rate: must be >= 0".to_string());
        }
        if !non_negative(fp.advect_gain) {
            problems.push("fire_params.advect_gain: must be >= 0".to_string());
        }
        if !(0.0..=1.0).contains(&fp.p_base) {
            problems.push("fire_params.p_base: must be in [0, 1]".to_string());
        }
        if !(0.0..=1.0).contains(&fp.wind_bias) {
            problems.push("fire_params.wind_bias: must be in [0, 1]".to_string());
        }
        let sp = &self.smoke_params;
        if !non_negative(sp.emission_rate) {
            problems.push("smoke_params.emission_rate: must be >= 0".to_string());
        }
        if !non_negative(sp.band) {
            problems.push("smoke_params.band: must be >= 0".to_string());
        }
        if !non_negative(sp.angular_spread) {
            problems.push("smoke_params.angular_spread: must be >= 0".to_string());
        }
        if !non_negative(sp.drift_gain) {
            problems.push("smoke_params.drift_gain: must be >= 0".to_string());
        }
        if sp.lifetime < 1 {
            problems.push("smoke_params.lifetime: must be >= 1".to_string());
        }
        if let Err(msg) = self.cost_params.validate() {
            problems.push(msg);
        }
        problems
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    /// The evacuee reached the goal.
    Escaped { tick: u64 },
    /// No hazard-free route to the goal remained.
    Trapped { tick: u64 },
    /// A hazard reached the evacuee's cell.
    Overrun { tick: u64 },
    /// The tick budget ran out first.
    TimedOut,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Outcome::Escaped { .. } => write!(f, "Escaped"),
            Outcome::Trapped { .. } => write!(f, "Trapped"),
            Outcome::Overrun { .. } => write!(f, "Overrun"),
            Outcome::TimedOut => write!(f, "TimedOut"),
        }
    }
}

/// Per-tick observables, also the rows of the CSV report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: u64,
    pub fire_cells: usize,
    pub smoke_cells: usize,
    pub replanned: bool,
    /// Total cost of the route currently in effect (none once trapped).
    pub route_cost: Option<f64>,
}

/// Full run output: provenance, outcome and the per-tick trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub scenario_hash: String,
    pub seed: u64,
    pub outcome: Outcome,
    /// Cost of the route in effect when the run ended.
    pub final_cost: Option<f64>,
    pub ticks: Vec<TickRecord>,
}

impl SimReport {
    pub fn to_json_vec(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("report serializes");
        out.push(b'\n');
        out
    }

    /// Render the per-tick trace as `tick,fire_cells,smoke_cells,replanned,route_cost`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("tick,fire_cells,smoke_cells,replanned,route_cost\n");
        for r in &self.ticks {
            let cost = r.route_cost.map(|c| c.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.tick, r.fire_cells, r.smoke_cells, r.replanned, cost
            ));
        }
        out
    }
}

/// Live simulation state, advanced one tick at a time.
pub struct SimState {
    scenario: Scenario,
    map: GridMap,
    fires: Vec<FireSource>,
    particles: Vec<SmokeParticle>,
    evacuee: Cell,
    route: Vec<Cell>,
    route_pos: usize,
    route_cost: Option<f64>,
    tick: u64,
    outcome: Option<Outcome>,
    replanned_last_tick: bool,
    rng: ChaCha8Rng,
}

impl SimState {
    /// Set up tick 0: rasterize the initial fires, seed the generator, and
    /// plan the initial route. Out-of-bounds endpoints are a configuration
    /// error; endpoints already lost to hazards become immediate outcomes.
    pub fn new(scenario: &Scenario, mut map: GridMap) -> Result<Self, ScenarioError> {
        if let Some(problem) = scenario.validate().into_iter().next() {
            return Err(ScenarioError::Invalid(problem));
        }
        for (endpoint, cell) in [("start", scenario.start), ("goal", scenario.goal)] {
            if !map.in_bounds(cell) {
                return Err(ScenarioError::Invalid(format!(
                    "{endpoint}: {cell} outside {}x{} map",
                    map.width(),
                    map.height()
                )));
            }
        }

        rasterize_fire(&scenario.initial_fires, &mut map);

        let mut state = SimState {
            scenario: scenario.clone(),
            map,
            fires: scenario.initial_fires.clone(),
            particles: Vec::new(),
            evacuee: scenario.start,
            route: vec![scenario.start],
            route_pos: 0,
            route_cost: None,
            tick: 0,
            outcome: None,
            replanned_last_tick: false,
            rng: ChaCha8Rng::seed_from_u64(scenario.seed),
        };

        match plan(
            &state.map,
            &state.scenario.cost_params,
            state.evacuee,
            state.scenario.goal,
        ) {
            Ok(r) => {
                state.route = r.path;
                state.route_cost = Some(r.total_cost);
                if state.evacuee == state.scenario.goal {
                    state.outcome = Some(Outcome::Escaped { tick: 0 });
                }
            }
            Err(PlanError::HazardAtEndpoint {
                endpoint: crate::planner::Endpoint::Start,
            }) => {
                state.outcome = Some(Outcome::Overrun { tick: 0 });
            }
            Err(PlanError::HazardAtEndpoint { .. }) | Err(PlanError::NoRouteFound { .. }) => {
                state.outcome = Some(Outcome::Trapped { tick: 0 });
            }
            Err(e @ PlanError::EndpointOutOfBounds { .. }) => {
                return Err(ScenarioError::Invalid(e.to_string()));
            }
        }
        Ok(state)
    }

    fn weather_at(&self, tick: u64) -> Weather {
        self.scenario
            .weather_schedule
            .iter()
            .take_while(|phase| phase.from_tick <= tick)
            .last()
            .map(|phase| phase.weather)
            .unwrap_or_else(Weather::calm)
    }

    /// Advance one tick. Fixed order: weather, fire advect+grow, merge,
    /// spread ignition, fire rasterize, smoke advect+emit+rasterize, evacuee
    /// motion, route validity check with replanning, outcome transitions.
    /// No-op once the run has reached a terminal outcome.
    pub fn step(&mut self) {
        if self.outcome.is_some() {
            return;
        }
        self.tick += 1;
        self.replanned_last_tick = false;
        let weather = self.weather_at(self.tick);
        let fire_params = self.scenario.fire_params;
        let smoke_params = self.scenario.smoke_params;
        let goal = self.scenario.goal;

        // Hazards move before the evacuee does.
        let advanced: Vec<FireSource> = self
            .fires
            .iter()
            .map(|f| {
                let moved = advect_fire(f, &weather, &fire_params, 1.0);
                grow_fire(&moved, &fire_params, 1.0)
            })
            .collect();
        self.fires = merge_fires(&advanced);
        for f in &self.fires {
            for cell in spread_mask(f, &self.map, &weather, &fire_params, &mut self.rng) {
                self.map.set_hazard(cell, Hazard::Fire);
            }
        }
        rasterize_fire(&self.fires, &mut self.map);

        advect_smoke(&mut self.particles, &weather, &smoke_params, 1);
        for f in &self.fires {
            let emitted = emit_smoke(f, &smoke_params, &weather, &mut self.rng);
            self.particles.extend(emitted);
        }
        rasterize_smoke(&self.particles, &mut self.map);

        // Evacuee advances along the current route, never onto a forbidden
        // cell.
        for _ in 0..self.scenario.evacuee_speed {
            if self.evacuee == goal || self.route_pos + 1 >= self.route.len() {
                break;
            }
            let next = self.route[self.route_pos + 1];
            if self.map.effective_class(next) == TraversalClass::Forbidden {
                break;
            }
            self.route_pos += 1;
            self.evacuee = next;
        }

        let evacuee_forbidden = self.map.effective_class(self.evacuee) == TraversalClass::Forbidden;
        let mut trapped = false;
        if !evacuee_forbidden && self.evacuee != goal {
            let invalidated = self.route[self.route_pos..]
                .iter()
                .any(|c| self.map.effective_class(*c) == TraversalClass::Forbidden);
            if invalidated {
                self.replanned_last_tick = true;
                match plan(&self.map, &self.scenario.cost_params, self.evacuee, goal) {
                    Ok(r) => {
                        self.route = r.path;
                        self.route_pos = 0;
                        self.route_cost = Some(r.total_cost);
                    }
                    Err(PlanError::NoRouteFound { .. })
                    | Err(PlanError::HazardAtEndpoint { .. }) => {
                        trapped = true;
                        self.route_cost = None;
                    }
                    Err(PlanError::EndpointOutOfBounds { .. }) => {
                        unreachable!("evacuee and goal stay in bounds")
                    }
                }
            }
        }

        self.outcome = if self.evacuee == goal {
            Some(Outcome::Escaped { tick: self.tick })
        } else if evacuee_forbidden {
            Some(Outcome::Overrun { tick: self.tick })
        } else if trapped {
            Some(Outcome::Trapped { tick: self.tick })
        } else {
            None
        };
    }

    /// Snapshot the current tick's observables.
    pub fn record(&self) -> TickRecord {
        TickRecord {
            tick: self.tick,
            fire_cells: self.map.count_hazard(Hazard::is_fire),
            smoke_cells: self.map.count_hazard(Hazard::is_smoke),
            replanned: self.replanned_last_tick,
            route_cost: self.route_cost,
        }
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn fires(&self) -> &[FireSource] {
        &self.fires
    }

    pub fn particles(&self) -> &[SmokeParticle] {
        &self.particles
    }

    pub fn evacuee(&self) -> Cell {
        self.evacuee
    }

    /// The not-yet-traversed part of the current route, evacuee cell first.
    pub fn route_remaining(&self) -> &[Cell] {
        &self.route[self.route_pos..]
    }

    pub fn route_cost(&self) -> Option<f64> {
        self.route_cost
    }

    pub fn goal(&self) -> Cell {
        self.scenario.goal
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.outcome
    }

    pub fn replanned_last_tick(&self) -> bool {
        self.replanned_last_tick
    }
}

/// Run a scenario to a terminal outcome (or tick exhaustion), invoking
/// `observer` after setup and after every tick; frame writers hook in there.
pub fn run_with<F>(
    scenario: &Scenario,
    map: GridMap,
    scenario_hash: &str,
    mut observer: F,
) -> Result<SimReport, ScenarioError>
where
    F: FnMut(&SimState),
{
    let mut state = SimState::new(scenario, map)?;
    let mut records = vec![state.record()];
    observer(&state);
    while state.outcome().is_none() && state.tick() < scenario.ticks {
        state.step();
        records.push(state.record());
        observer(&state);
    }
    Ok(SimReport {
        scenario_hash: scenario_hash.to_string(),
        seed: scenario.seed,
        outcome: state.outcome().unwrap_or(Outcome::TimedOut),
        final_cost: state.route_cost(),
        ticks: records,
    })
}

/// [`run_with`] without an observer.
pub fn run(
    scenario: &Scenario,
    map: GridMap,
    scenario_hash: &str,
) -> Result<SimReport, ScenarioError> {
    run_with(scenario, map, scenario_hash, |_| {})
}
