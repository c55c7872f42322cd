//! World state, human/group dynamics, sensing and episode termination.
//!
//! Humans are driven either by reciprocal collision avoidance (individuals
//! and group leaders), by the leader-following cohesion rule (group
//! followers), or not at all (static group members). Humans never react to
//! the robot.

mod scenario;

pub use scenario::{generate_scenario, SimError};

use crate::geom::Vec2;
use crate::policy::orca::{orca_velocity, OrcaAgent};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Time horizon used for all human-human avoidance constraints, in seconds.
pub const HUMAN_ORCA_TAU: f64 = 2.0;
/// Humans only react to neighbors within this distance, in meters.
pub const HUMAN_NEIGHBOR_CUTOFF: f64 = 5.0;
/// Extra body-to-body clearance enforced between leaders of different
/// dynamic groups, so whole groups keep enough separation to stay
/// distinguishable as they travel.
pub const LEADER_GROUP_CLEARANCE: f64 = 1.7;
/// Clearance between a passing leader and a static formation's boundary,
/// applied through a virtual stationary obstacle at the formation centroid.
pub const LEADER_STATIC_CLEARANCE: f64 = 2.4;
/// Extra clearance individuals keep from group leaders, so solo pedestrians
/// skirt walking groups instead of sliding along inside them.
pub const INDIVIDUAL_LEADER_CLEARANCE: f64 = 2.4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Individual,
    GroupLeader,
    GroupFollower,
    StaticGroupMember,
    Robot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupKind {
    Static,
    Dynamic,
}

/// One human or robot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: usize,
    pub position: Vec2,
    pub velocity: Vec2,
    pub radius: f64,
    pub goal: Vec2,
    pub pref_speed: f64,
    pub role: Role,
}

/// A cohesive human group: centroid and radius are recomputed from member
/// positions after every step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupState {
    pub group_id: usize,
    pub centroid: Vec2,
    pub radius: f64,
    pub member_count: usize,
    pub member_ids: Vec<usize>,
    pub kind: GroupKind,
    pub leader_id: Option<usize>,
}

/// Full simulation state. Owned by exactly one episode execution.
#[derive(Clone, Debug, PartialEq)]
pub struct WorldState {
    pub time_step: usize,
    pub robot: AgentState,
    pub humans: Vec<AgentState>,
    pub groups: Vec<GroupState>,
    pub rng: ChaCha8Rng,
}

/// The robot's sensor-limited view: only humans within sensor range, with
/// their kinematic state. Group structure and human intents are not exposed;
/// the robot has to infer groups itself.
#[derive(Clone, Debug, PartialEq)]
pub struct WorldObservation {
    pub robot: AgentState,
    pub visible_humans: Vec<AgentState>,
    pub goal: Vec2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutcomeKind {
    Success,
    Collision,
    GroupCollision,
    Timeout,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub kind: OutcomeKind,
    pub terminal_step: usize,
}

/// Scenario parameters. All lengths in meters, times in seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub arena_half_extent: f64,
    pub n_individuals: usize,
    pub n_groups: usize,
    pub group_size_min: usize,
    pub group_size_max: usize,
    pub static_group_fraction: f64,
    pub dt: f64,
    pub max_steps: usize,
    pub sensor_range: f64,
    pub human_radius: f64,
    pub robot_radius: f64,
    pub pref_speed: f64,
    pub cohesion_k: f64,
    pub d_safe: f64,
    pub goal_radius: f64,
    pub terminate_on_group_intrusion: bool,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            arena_half_extent: 6.0,
            n_individuals: 9,
            n_groups: 3,
            group_size_min: 3,
            group_size_max: 4,
            static_group_fraction: 0.5,
            dt: 0.25,
            max_steps: 197,
            sensor_range: 5.0,
            human_radius: 0.3,
            robot_radius: 0.3,
            pref_speed: 1.0,
            cohesion_k: 0.25,
            d_safe: 0.65,
            goal_radius: 0.3,
            terminate_on_group_intrusion: true,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("arena_half_extent", self.arena_half_extent),
            ("dt", self.dt),
            ("sensor_range", self.sensor_range),
            ("human_radius", self.human_radius),
            ("robot_radius", self.robot_radius),
            ("pref_speed", self.pref_speed),
            ("goal_radius", self.goal_radius),
        ];
        for (name, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(format!("{name} must be strictly positive, got {v}"));
            }
        }
        if self.arena_half_extent < 1.0 {
            return Err(format!(
                "arena_half_extent must be at least 1.0 m, got {}",
                self.arena_half_extent
            ));
        }
        if self.n_groups > 0 && self.arena_half_extent < 3.0 {
            return Err(format!(
                "arena_half_extent must be at least 3.0 m to place groups, got {}",
                self.arena_half_extent
            ));
        }
        if self.cohesion_k < 0.0 || !self.cohesion_k.is_finite() {
            return Err(format!("cohesion_k must be >= 0, got {}", self.cohesion_k));
        }
        if self.d_safe < 0.0 || !self.d_safe.is_finite() {
            return Err(format!("d_safe must be >= 0, got {}", self.d_safe));
        }
        if self.n_groups > 0 && self.group_size_min < 2 {
            return Err(format!(
                "group_size_min must be >= 2, got {}",
                self.group_size_min
            ));
        }
        if self.group_size_max < self.group_size_min {
            return Err(format!(
                "group_size_max ({}) < group_size_min ({})",
                self.group_size_max, self.group_size_min
            ));
        }
        if !(0.0..=1.0).contains(&self.static_group_fraction) {
            return Err(format!(
                "static_group_fraction must be in [0, 1], got {}",
                self.static_group_fraction
            ));
        }
        if self.max_steps == 0 {
            return Err("max_steps must be >= 1".into());
        }
        Ok(())
    }

    pub fn robot_start(&self) -> Vec2 {
        Vec2::new(0.0, -0.75 * self.arena_half_extent)
    }

    pub fn robot_goal(&self) -> Vec2 {
        Vec2::new(0.0, 0.75 * self.arena_half_extent)
    }
}

/// Mean member position and max member distance from it.
pub fn group_centroid_radius(member_positions: &[Vec2]) -> Result<(Vec2, f64), SimError> {
    if member_positions.is_empty() {
        return Err(SimError::EmptyGroup);
    }
    let mut sum = Vec2::ZERO;
    for p in member_positions {
        sum += *p;
    }
    let centroid = sum / member_positions.len() as f64;
    let radius = member_positions
        .iter()
        .map(|p| p.dist(centroid))
        .fold(0.0, f64::max);
    Ok((centroid, radius))
}

/// Cohesion rule for group followers: the leader's velocity plus a spring
/// pull toward the group centroid. The caller clamps the result to the
/// follower's preferred speed.
pub fn follower_velocity(v_leader: Vec2, centroid: Vec2, p_i: Vec2, k: f64) -> Vec2 {
    debug_assert!(k >= 0.0);
    v_leader + (centroid - p_i) * k
}

/// Sensor model: humans within `sensor_range` of the robot, ascending id.
/// Roles and goals are scrubbed so only kinematic state is visible.
pub fn observe(world: &WorldState, config: &ScenarioConfig) -> WorldObservation {
    let visible_humans = world
        .humans
        .iter()
        .filter(|h| h.position.dist(world.robot.position) <= config.sensor_range)
        .map(|h| AgentState {
            role: Role::Individual,
            goal: h.position,
            ..h.clone()
        })
        .collect();
    WorldObservation {
        robot: world.robot.clone(),
        visible_humans,
        goal: world.robot.goal,
    }
}

/// Preferred velocity toward a goal: full preferred speed, capped so the
/// agent does not overshoot within one step.
pub fn pref_velocity_toward(position: Vec2, goal: Vec2, pref_speed: f64, dt: f64) -> Vec2 {
    let to_goal = goal - position;
    let dist = to_goal.norm();
    if dist < 1e-12 {
        return Vec2::ZERO;
    }
    to_goal * (pref_speed.min(dist / dt) / dist)
}

fn group_of(world: &WorldState, agent_id: usize) -> Option<&GroupState> {
    world
        .groups
        .iter()
        .find(|g| g.member_ids.binary_search(&agent_id).is_ok())
}

/// Advances the world by one step and reports the terminal outcome, if any.
///
/// Individuals and dynamic-group leaders pick reciprocal-avoidance
/// velocities against the other individuals and leaders (group followers and
/// static members are transparent to them, and nobody reacts to the robot).
/// Followers apply the cohesion rule on the leader's fresh velocity; static
/// members stay put. All positions integrate with explicit Euler, humans
/// that reach their goal draw a fresh one, and group centroids/radii are
/// recomputed before termination is checked.
pub fn step_world(
    world: &mut WorldState,
    robot_action: Vec2,
    config: &ScenarioConfig,
) -> Option<EpisodeOutcome> {
    debug_assert!(robot_action.is_finite());
    let snapshot = world.humans.clone();

    // Pass 1: avoidance velocities for individuals and leaders, from the
    // pre-step snapshot, in ascending id order.
    let mut new_velocities: Vec<Vec2> = snapshot.iter().map(|h| h.velocity).collect();
    for (i, human) in snapshot.iter().enumerate() {
        match human.role {
            Role::Individual => {
                let neighbors = orca_neighbors_for(world, &snapshot, i, None);
                let v_pref =
                    pref_velocity_toward(human.position, human.goal, human.pref_speed, config.dt);
                new_velocities[i] = orca_velocity(
                    &OrcaAgent::from(human),
                    &neighbors,
                    v_pref,
                    HUMAN_ORCA_TAU,
                    config.dt,
                    human.pref_speed,
                );
            }
            Role::GroupLeader => {
                let own_radius = group_of(world, human.id).map(|g| g.radius).unwrap_or(0.0);
                let mut neighbors = orca_neighbors_for(world, &snapshot, i, Some(own_radius));
                // Walking groups steer around static formations rather than
                // through them.
                for g in &world.groups {
                    if g.kind == GroupKind::Static
                        && g.centroid.dist(human.position) <= HUMAN_NEIGHBOR_CUTOFF
                    {
                        neighbors.push(OrcaAgent {
                            position: g.centroid,
                            velocity: Vec2::ZERO,
                            radius: g.radius + LEADER_STATIC_CLEARANCE,
                        });
                    }
                }
                let v_pref =
                    pref_velocity_toward(human.position, human.goal, human.pref_speed, config.dt);
                new_velocities[i] = orca_velocity(
                    &OrcaAgent::from(human),
                    &neighbors,
                    v_pref,
                    HUMAN_ORCA_TAU,
                    config.dt,
                    human.pref_speed,
                );
            }
            _ => {}
        }
    }

    // Pass 2: followers track their leader's fresh velocity; static members
    // stay stationary.
    for (i, human) in snapshot.iter().enumerate() {
        match human.role {
            Role::GroupFollower => {
                let group = group_of(world, human.id).expect("follower without a group");
                let leader_id = group.leader_id.expect("dynamic group without leader");
                let leader_idx = snapshot
                    .iter()
                    .position(|h| h.id == leader_id)
                    .expect("leader not found");
                let v = follower_velocity(
                    new_velocities[leader_idx],
                    group.centroid,
                    human.position,
                    config.cohesion_k,
                );
                new_velocities[i] = v.clamp_norm(human.pref_speed);
            }
            Role::StaticGroupMember => {
                new_velocities[i] = Vec2::ZERO;
            }
            _ => {}
        }
    }

    // Pass 3: members of the same group keep body separation. The cohesion
    // pull alone would stack followers onto the leader; a follower in
    // contact range of another member drops the closing component of its
    // velocity instead of pushing in.
    for (i, human) in snapshot.iter().enumerate() {
        if human.role != Role::GroupFollower {
            continue;
        }
        let group = group_of(world, human.id).expect("follower without a group");
        let contact = 2.0 * human.radius + 0.05;
        for other_id in &group.member_ids {
            if *other_id == human.id {
                continue;
            }
            let j = snapshot
                .iter()
                .position(|h| h.id == *other_id)
                .expect("member not found");
            let offset = snapshot[j].position - human.position;
            let dist = offset.norm();
            if dist >= contact || dist < 1e-12 {
                continue;
            }
            let dir = offset / dist;
            let closing = (new_velocities[i] - new_velocities[j]).dot(dir);
            if closing > 0.0 {
                new_velocities[i] =
                    (new_velocities[i] - dir * closing).clamp_norm(human.pref_speed);
            }
        }
    }

    // Integrate.
    for (human, v) in world.humans.iter_mut().zip(new_velocities.iter()) {
        human.velocity = *v;
        human.position += *v * config.dt;
    }
    let robot_velocity = robot_action.clamp_norm(world.robot.pref_speed);
    world.robot.velocity = robot_velocity;
    world.robot.position += robot_velocity * config.dt;

    // Fresh goals keep the crowd flowing for the whole episode.
    resample_reached_goals(world, config);

    // Group geometry follows the members.
    for gi in 0..world.groups.len() {
        let positions: Vec<Vec2> = world.groups[gi]
            .member_ids
            .iter()
            .map(|id| {
                world
                    .humans
                    .iter()
                    .find(|h| h.id == *id)
                    .expect("group member missing")
                    .position
            })
            .collect();
        let (centroid, radius) =
            group_centroid_radius(&positions).expect("group invariants require >= 2 members");
        world.groups[gi].centroid = centroid;
        world.groups[gi].radius = radius;
    }

    world.time_step += 1;

    // Termination priority: collision, group intrusion, success, timeout.
    let robot = &world.robot;
    let collided = world
        .humans
        .iter()
        .any(|h| h.position.dist(robot.position) < robot.radius + h.radius);
    if collided {
        return Some(EpisodeOutcome {
            kind: OutcomeKind::Collision,
            terminal_step: world.time_step,
        });
    }
    if config.terminate_on_group_intrusion {
        let intruding = world
            .groups
            .iter()
            .any(|g| robot.position.dist(g.centroid) < g.radius);
        if intruding {
            return Some(EpisodeOutcome {
                kind: OutcomeKind::GroupCollision,
                terminal_step: world.time_step,
            });
        }
    }
    if robot.position.dist(robot.goal) < config.goal_radius {
        return Some(EpisodeOutcome {
            kind: OutcomeKind::Success,
            terminal_step: world.time_step,
        });
    }
    if world.time_step >= config.max_steps {
        return Some(EpisodeOutcome {
            kind: OutcomeKind::Timeout,
            terminal_step: world.time_step,
        });
    }
    None
}

/// Neighbor views for avoidance: individuals and leaders see each other and
/// nothing else. Leader-leader pairs get inflated radii so whole groups keep
/// clear of each other; `own_group_radius` is `Some` for leaders.
fn orca_neighbors_for(
    world: &WorldState,
    snapshot: &[AgentState],
    self_idx: usize,
    own_group_radius: Option<f64>,
) -> Vec<OrcaAgent> {
    let me = &snapshot[self_idx];
    let mut neighbors = Vec::new();
    for (j, other) in snapshot.iter().enumerate() {
        if j == self_idx {
            continue;
        }
        let relevant = matches!(other.role, Role::Individual | Role::GroupLeader);
        if !relevant {
            continue;
        }
        if other.position.dist(me.position) > HUMAN_NEIGHBOR_CUTOFF {
            continue;
        }
        let radius = match (own_group_radius, other.role) {
            (Some(own_rg), Role::GroupLeader) => {
                let other_rg = group_of(world, other.id).map(|g| g.radius).unwrap_or(0.0);
                // Members trail up to about twice the group radius behind a
                // leader, so both tails enter the clearance budget.
                2.0 * (own_rg + other_rg) + LEADER_GROUP_CLEARANCE + other.radius
            }
            (None, Role::GroupLeader) => other.radius + INDIVIDUAL_LEADER_CLEARANCE,
            _ => other.radius,
        };
        neighbors.push(OrcaAgent {
            position: other.position,
            velocity: other.velocity,
            radius,
        });
    }
    neighbors
}

fn resample_reached_goals(world: &mut WorldState, config: &ScenarioConfig) {
    let groups = world.groups.clone();
    for i in 0..world.humans.len() {
        let (role, position, goal) = {
            let h = &world.humans[i];
            (h.role, h.position, h.goal)
        };
        match role {
            Role::Individual if position.dist(goal) < config.goal_radius => {
                let fresh = sample_clear_point(&mut world.rng, config, &groups);
                world.humans[i].goal = fresh;
            }
            Role::GroupLeader if position.dist(goal) < config.goal_radius => {
                let fresh = sample_clear_point(&mut world.rng, config, &groups);
                let member_ids = group_of(world, world.humans[i].id)
                    .map(|g| g.member_ids.clone())
                    .unwrap_or_default();
                for h in world.humans.iter_mut() {
                    if member_ids.binary_search(&h.id).is_ok() {
                        h.goal = fresh;
                    }
                }
            }
            _ => {}
        }
    }
}

/// Clearance between any sampled goal and a group boundary. Keeps agents
/// from idling at near-zero speed right next to somebody else's group.
pub(crate) const GOAL_GROUP_CLEARANCE: f64 = 2.0;

/// Samples a point in the arena that keeps clear of every group disk.
/// Falls back to the best candidate seen if the arena is too crowded.
pub(crate) fn sample_clear_point(
    rng: &mut ChaCha8Rng,
    config: &ScenarioConfig,
    groups: &[GroupState],
) -> Vec2 {
    let extent = config.arena_half_extent - 0.3;
    let mut best = Vec2::ZERO;
    let mut best_clearance = f64::NEG_INFINITY;
    for _ in 0..10_000 {
        let p = Vec2::new(
            rng.gen_range(-extent..=extent),
            rng.gen_range(-extent..=extent),
        );
        let clearance = groups
            .iter()
            .map(|g| p.dist(g.centroid) - g.radius - GOAL_GROUP_CLEARANCE)
            .fold(f64::INFINITY, f64::min);
        if clearance >= 0.0 {
            return p;
        }
        if clearance > best_clearance {
            best_clearance = clearance;
            best = p;
        }
    }
    best
}
