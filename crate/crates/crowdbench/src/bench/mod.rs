//! Episode runner, metrics, and benchmark aggregation.

pub mod suite;
pub mod trace;
pub mod validate;

use crate::geom::Vec2;
use crate::policy::RobotPolicy;
use crate::sim::{
    generate_scenario, observe, step_world, EpisodeOutcome, OutcomeKind, ScenarioConfig, SimError,
    WorldState,
};
use crate::taga::TagaMode;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("trace has no steps")]
    EmptyTrace,
    #[error("no episode reports to aggregate")]
    EmptyReportList,
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("unknown benchmark cell '{0}' (expected orca, orca+taga, sf, or sf+taga)")]
    UnknownCell(String),
    #[error("malformed trace: {0}")]
    Trace(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Per-human entry of a step record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HumanRecord {
    pub id: usize,
    pub pos: Vec2,
    pub vel: Vec2,
}

/// Per-group entry of a step record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupRecord {
    pub group_id: usize,
    pub centroid: Vec2,
    pub radius: f64,
}

/// One line of an episode trace. Record `t = 0` is the initial state; every
/// later record is the world right after that step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub robot_pos: Vec2,
    pub robot_vel: Vec2,
    pub taga_mode: TagaMode,
    pub inside_group: bool,
    pub humans: Vec<HumanRecord>,
    pub groups: Vec<GroupRecord>,
}

/// Terminal classification plus the scalar metrics of one episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeReport {
    pub seed: u64,
    pub outcome: EpisodeOutcome,
    /// Seconds until termination.
    pub nav_time: f64,
    /// Meters traveled by the robot.
    pub path_length: f64,
    /// Fraction of steps spent inside any group disk.
    pub gcr_fraction: f64,
}

/// Aggregate over a set of episodes. The four outcome rates partition the
/// episodes, so they always sum to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSummary {
    pub sr: f64,
    pub cr: f64,
    pub gcr: f64,
    pub tr: f64,
    /// Mean navigation time over successful episodes, absent without any.
    pub mean_nt: Option<f64>,
    /// Mean path length over successful episodes, absent without any.
    pub mean_pl: Option<f64>,
    /// Mean time-fraction spent inside group disks, over all episodes.
    pub mean_gcr_time: f64,
    pub n_episodes: usize,
}

fn snapshot(world: &WorldState, taga_mode: TagaMode) -> StepRecord {
    let inside_group = world
        .groups
        .iter()
        .any(|g| world.robot.position.dist(g.centroid) < g.radius);
    StepRecord {
        t: world.time_step,
        robot_pos: world.robot.position,
        robot_vel: world.robot.velocity,
        taga_mode,
        inside_group,
        humans: world
            .humans
            .iter()
            .map(|h| HumanRecord {
                id: h.id,
                pos: h.position,
                vel: h.velocity,
            })
            .collect(),
        groups: world
            .groups
            .iter()
            .map(|g| GroupRecord {
                group_id: g.group_id,
                centroid: g.centroid,
                radius: g.radius,
            })
            .collect(),
    }
}

/// Runs one full episode: generate the scenario from the seed, then loop
/// observe -> act -> step until termination. Returns the report and the
/// step-by-step trace (with the initial state as record 0).
pub fn run_episode(
    config: &ScenarioConfig,
    policy: &mut dyn RobotPolicy,
    seed: u64,
) -> Result<(EpisodeReport, Vec<StepRecord>), BenchError> {
    let mut world = generate_scenario(config, seed)?;
    let mut records = vec![snapshot(&world, policy.taga_mode())];
    let mut path_length = 0.0;

    let outcome: EpisodeOutcome = loop {
        let obs = observe(&world, config);
        let action = policy.act(&obs);
        let before = world.robot.position;
        let outcome = step_world(&mut world, action, config);
        path_length += world.robot.position.dist(before);
        records.push(snapshot(&world, policy.taga_mode()));
        if let Some(out) = outcome {
            break out;
        }
    };

    let report = EpisodeReport {
        seed,
        outcome,
        nav_time: outcome.terminal_step as f64 * config.dt,
        path_length,
        gcr_fraction: gcr_fraction(&records[1..])?,
    };
    Ok((report, records))
}

/// Fraction of recorded steps with the robot inside a group disk.
pub fn gcr_fraction(steps: &[StepRecord]) -> Result<f64, BenchError> {
    if steps.is_empty() {
        return Err(BenchError::EmptyTrace);
    }
    let inside = steps.iter().filter(|s| s.inside_group).count();
    Ok(inside as f64 / steps.len() as f64)
}

/// Outcome rates plus success-only means of navigation time and path length.
pub fn aggregate(reports: &[EpisodeReport]) -> Result<BenchmarkSummary, BenchError> {
    if reports.is_empty() {
        return Err(BenchError::EmptyReportList);
    }
    let n = reports.len() as f64;
    let count = |kind: OutcomeKind| reports.iter().filter(|r| r.outcome.kind == kind).count();
    let successes: Vec<&EpisodeReport> = reports
        .iter()
        .filter(|r| r.outcome.kind == OutcomeKind::Success)
        .collect();
    let (mean_nt, mean_pl) = if successes.is_empty() {
        (None, None)
    } else {
        let k = successes.len() as f64;
        (
            Some(successes.iter().map(|r| r.nav_time).sum::<f64>() / k),
            Some(successes.iter().map(|r| r.path_length).sum::<f64>() / k),
        )
    };
    Ok(BenchmarkSummary {
        sr: count(OutcomeKind::Success) as f64 / n,
        cr: count(OutcomeKind::Collision) as f64 / n,
        gcr: count(OutcomeKind::GroupCollision) as f64 / n,
        tr: count(OutcomeKind::Timeout) as f64 / n,
        mean_nt,
        mean_pl,
        mean_gcr_time: reports.iter().map(|r| r.gcr_fraction).sum::<f64>() / n,
        n_episodes: reports.len(),
    })
}
