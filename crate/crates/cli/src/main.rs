//! Command-line front end for the escape-route planner and simulator.
//!
//! Exit codes are a stable contract: 0 success, 2 usage/argument errors,
//! 3 planning failure (no route, endpoint in hazard), 4 map or file I/O
//! errors, 5 validation findings.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fireroute_core::map::{Cell, GridMap, MapError, PixelClass};
use fireroute_core::planner::{CostParams, PlanError, PlanResult};
use fireroute_core::sim::{run_with, Scenario, ScenarioError, SimState};
use fireroute_core::smoke::{emit_smoke, rasterize_smoke, SmokeParams};
use fireroute_core::{dijkstra_reference, fire, plan, FireSource, Weather};

const EXIT_USAGE: u8 = 2;
const EXIT_PLANNING: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_VALIDATION: u8 = 5;

#[derive(Parser)]
#[command(
    name = "fireroute",
    version,
    about = "Escape-route planning over dynamic fire and smoke hazards",
    long_about = "Escape-route planning over dynamic fire and smoke hazards.\n\n\
        Maps are 8-bit RGB PNGs using the legend black=background, \
        green=good road, white=bad road, red=fire, mid-gray=smoke. \
        Cell coordinates are x=column, y=row with the origin at the \
        top-left pixel. Paths given on the command line resolve against \
        the working directory."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a single route on a map, optionally stamping fires and smoke
    Plan(PlanArgs),
    /// Run a scenario simulation to its outcome
    Simulate(SimulateArgs),
    /// Check a map's pixel legend or a scenario file's invariants
    Validate(ValidateArgs),
    /// Plan with the uniform-cost reference search (test/bench aid)
    Oracle(PlanArgs),
}

#[derive(Args)]
struct PlanArgs {
    /// Map PNG to plan on
    #[arg(long)]
    map: PathBuf,
    /// Start cell as X,Y (x=column, y=row, top-left origin)
    #[arg(long, value_parser = parse_cell)]
    start: Cell,
    /// Goal cell as X,Y
    #[arg(long, value_parser = parse_cell)]
    goal: Cell,
    /// Stamp a fire disc before planning: CX,CY,RADIUS,INTENSITY (repeatable)
    #[arg(long = "fires", value_parser = parse_fire)]
    fires: Vec<FireSource>,
    /// Wind as DEG,SPEED (degrees clockwise from east, cells per tick)
    #[arg(long, value_parser = parse_wind)]
    wind: Option<Weather>,
    /// Write the route overlay PNG here
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a JSON report {total_cost, path_length, expanded, path} here
    #[arg(long)]
    report: Option<PathBuf>,
    /// Seed for the smoke emission burst around stamped fires
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario JSON file; its map reference resolves against the
    /// scenario file's directory
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for report.json and ticks.csv
    #[arg(long)]
    out: PathBuf,
    /// Also write one frame_%05d.png per tick into the output directory
    #[arg(long)]
    frames: bool,
    /// Override the scenario's seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ValidateTarget {
    /// Map PNG to classify pixel by pixel
    #[arg(long)]
    map: Option<PathBuf>,
    /// Scenario JSON to check against the scenario invariants
    #[arg(long)]
    scenario: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    target: ValidateTarget,
}

/// A failure with its contractual exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<MapError> for Failure {
    fn from(e: MapError) -> Self {
        Failure::new(EXIT_IO, format!("map error: {e}"))
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Io(_) => Failure::new(EXIT_IO, e.to_string()),
            ScenarioError::Parse(_) | ScenarioError::Invalid(_) => {
                Failure::new(EXIT_USAGE, e.to_string())
            }
        }
    }
}

impl From<PlanError> for Failure {
    fn from(e: PlanError) -> Self {
        match e {
            PlanError::HazardAtEndpoint { .. } | PlanError::NoRouteFound { .. } => {
                Failure::new(EXIT_PLANNING, e.to_string())
            }
            PlanError::EndpointOutOfBounds { .. } => Failure::new(EXIT_USAGE, e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(EXIT_IO, format!("i/o error: {e}"))
    }
}

fn parse_cell(s: &str) -> Result<Cell, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected X,Y but got `{s}`"));
    }
    let x = parts[0].trim().parse::<u32>().map_err(|e| e.to_string())?;
    let y = parts[1].trim().parse::<u32>().map_err(|e| e.to_string())?;
    Ok(Cell::new(x, y))
}

fn parse_fire(s: &str) -> Result<FireSource, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(format!("expected CX,CY,RADIUS,INTENSITY but got `{s}`"));
    }
    let nums: Result<Vec<f64>, _> = parts.iter().map(|p| p.trim().parse::<f64>()).collect();
    let nums = nums.map_err(|e| e.to_string())?;
    let radius_ok = nums[2] > 0.0; // NaN fails
    if !radius_ok {
        return Err("fire radius must be > 0".into());
    }
    let intensity_ok = nums[3] >= 0.0;
    if !intensity_ok {
        return Err("fire intensity must be >= 0".into());
    }
    Ok(FireSource::new(nums[0], nums[1], nums[2], nums[3]))
}

fn parse_wind(s: &str) -> Result<Weather, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected DEG,SPEED but got `{s}`"));
    }
    let dir = parts[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let speed = parts[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let speed_ok = speed >= 0.0; // NaN fails
    if !speed_ok {
        return Err("wind speed must be >= 0".into());
    }
    Ok(Weather::new(dir, speed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Plan(args) => cmd_plan(args, false),
        Command::Oracle(args) => cmd_plan(args, true),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Validate(args) => cmd_validate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("fireroute: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

/// Stamp the requested fires plus one seeded burst of smoke around each, the
/// single-frame equivalent of a simulation tick's hazard pass.
fn stamp_hazards(map: &mut GridMap, fires: &[FireSource], wind: Weather, seed: u64) {
    if fires.is_empty() {
        return;
    }
    fire::rasterize_fire(fires, map);
    let smoke_params = SmokeParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut particles = Vec::new();
    for f in fires {
        particles.extend(emit_smoke(f, &smoke_params, &wind, &mut rng));
    }
    rasterize_smoke(&particles, map);
}

fn cmd_plan(args: PlanArgs, use_oracle: bool) -> Result<(), Failure> {
    let mut map = GridMap::load_png(&args.map)?;
    let wind = args.wind.unwrap_or_else(Weather::calm);
    stamp_hazards(&mut map, &args.fires, wind, args.seed);

    let params = CostParams::default();
    let result: PlanResult = if use_oracle {
        dijkstra_reference(&map, &params, args.start, args.goal)?
    } else {
        plan(&map, &params, args.start, args.goal)?
    };

    if let Some(out) = &args.out {
        map.save_png(out, Some(&result.path), Some((args.start, args.goal)))?;
    }
    if let Some(report_path) = &args.report {
        let report = serde_json::json!({
            "total_cost": result.total_cost,
            "path_length": result.path.len(),
            "expanded": result.expanded,
            "path": result.path,
        });
        let mut bytes = serde_json::to_vec_pretty(&report).expect("report serializes");
        bytes.push(b'\n');
        std::fs::write(report_path, bytes)?;
    }
    println!("{}", result.total_cost);
    Ok(())
}

fn write_frame(state: &SimState, dir: &std::path::Path) -> Result<(), Failure> {
    let path = dir.join(format!("frame_{:05}.png", state.tick()));
    state
        .map()
        .save_png(
            &path,
            Some(state.route_remaining()),
            Some((state.evacuee(), state.goal())),
        )
        .map_err(Failure::from)
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let (mut scenario, scenario_hash) = Scenario::load(&args.scenario)?;
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    let map_path = scenario.resolve_map_path(&args.scenario);
    let map = GridMap::load_png(&map_path)?;

    std::fs::create_dir_all(&args.out)?;
    let mut frame_error: Option<Failure> = None;
    let report = run_with(&scenario, map, &scenario_hash, |state| {
        if args.frames && frame_error.is_none() {
            if let Err(e) = write_frame(state, &args.out) {
                frame_error = Some(e);
            }
        }
    })?;
    if let Some(e) = frame_error {
        return Err(e);
    }

    std::fs::write(args.out.join("report.json"), report.to_json_vec())?;
    std::fs::write(args.out.join("ticks.csv"), report.to_csv_string())?;

    let final_cost = report
        .final_cost
        .map(|c| c.to_string())
        .unwrap_or_else(|| "none".into());
    println!("outcome={} final_cost={}", report.outcome, final_cost);
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<(), Failure> {
    match (args.target.map, args.target.scenario) {
        (Some(map), None) => validate_map(&map),
        (None, Some(scenario)) => validate_scenario(&scenario),
        _ => unreachable!("clap enforces exactly one target"),
    }
}

fn validate_map(path: &std::path::Path) -> Result<(), Failure> {
    let img = image::ImageReader::open(path)
        .map_err(|e| Failure::new(EXIT_IO, format!("map error: {e}")))?
        .decode()
        .map_err(|e| Failure::new(EXIT_IO, format!("map error: {e}")))?
        .to_rgb8();

    let mut counts = [0usize; 5]; // background, good, bad, fire, smoke
    let mut offenders = Vec::new();
    for (x, y, pixel) in img.enumerate_pixels() {
        match fireroute_core::map::classify_pixel(pixel.0) {
            Some(PixelClass::Background) => counts[0] += 1,
            Some(PixelClass::GoodRoad) => counts[1] += 1,
            Some(PixelClass::BadRoad) => counts[2] += 1,
            Some(PixelClass::Fire) => counts[3] += 1,
            Some(PixelClass::Smoke(_)) => counts[4] += 1,
            None => {
                if offenders.len() < 10 {
                    offenders.push(format!(
                        "pixel ({x},{y}) color ({},{},{}) matches no legend color",
                        pixel.0[0], pixel.0[1], pixel.0[2]
                    ));
                }
            }
        }
    }
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "background: {}", counts[0]);
    let _ = writeln!(out, "good_road: {}", counts[1]);
    let _ = writeln!(out, "bad_road: {}", counts[2]);
    let _ = writeln!(out, "fire: {}", counts[3]);
    let _ = writeln!(out, "smoke: {}", counts[4]);
    if offenders.is_empty() {
        Ok(())
    } else {
        Err(Failure::new(EXIT_VALIDATION, offenders.join("\n")))
    }
}

fn validate_scenario(path: &std::path::Path) -> Result<(), Failure> {
    let bytes =
        std::fs::read(path).map_err(|e| Failure::new(EXIT_IO, format!("cannot read: {e}")))?;
    let scenario = match Scenario::from_slice(&bytes) {
        Ok(s) => s,
        Err(e) => return Err(Failure::new(EXIT_VALIDATION, e.to_string())),
    };
    let mut problems = scenario.validate();

    // The referenced map must load, and the endpoints must fit on it.
    match GridMap::load_png(scenario.resolve_map_path(path)) {
        Ok(map) => {
            for (field, cell) in [("start", scenario.start), ("goal", scenario.goal)] {
                if !map.in_bounds(cell) {
                    problems.push(format!(
                        "{field}: {cell} outside {}x{} map",
                        map.width(),
                        map.height()
                    ));
                }
            }
            if problems.is_empty() {
                println!(
                    "scenario ok: map={}x{} fires={} ticks={} seed={}",
                    map.width(),
                    map.height(),
                    scenario.initial_fires.len(),
                    scenario.ticks,
                    scenario.seed
                );
            }
        }
        Err(e) => problems.push(format!("map: {e}")),
    }

    if problems.is_empty() {
        Ok(())
    } else {
        problems.truncate(10);
        Err(Failure::new(EXIT_VALIDATION, problems.join("\n")))
    }
}
