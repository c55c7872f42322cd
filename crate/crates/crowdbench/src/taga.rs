//! Tangent-action group avoidance: detects cohesive human groups from raw
//! observations, and when a group blocks the straight path to the goal,
//! steers the robot toward a tangent point on the group's inflated boundary
//! disk. Control falls through to the wrapped base policy whenever no group
//! is in the way, so the wrapper is a no-op in group-free scenes.

use crate::geom::{segment_disk_intersects, select_tangent, Disk, GeomError, Vec2, EPS_GEOM};
use crate::policy::RobotPolicy;
use crate::sim::{AgentState, WorldObservation};
use serde::{Deserialize, Serialize};

/// A group inferred from the observation by spatial-and-velocity clustering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectedGroup {
    pub centroid: Vec2,
    pub radius: f64,
    pub member_ids: Vec<usize>,
    pub mean_velocity: Vec2,
}

impl DetectedGroup {
    pub fn disk(&self) -> Disk {
        Disk::new(self.centroid, self.radius)
    }
}

/// Detection and avoidance parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TagaConfig {
    /// Safety margin added to the group radius, meters. The switching
    /// distance of a group is its radius plus this margin.
    pub d_safe: f64,
    /// Width of the band beyond the switching distance in which the tangent
    /// behavior takes over, meters. Until the robot gets that close, the
    /// base policy keeps control.
    pub activation_band: f64,
    /// Two humans closer than this can belong to the same group, meters.
    pub cluster_eps: f64,
    /// Velocity coherence required between linked humans, m/s.
    pub velocity_tol: f64,
    /// Clusters below this size are treated as individuals.
    pub min_group_size: usize,
    /// Groups farther than this from the robot are ignored, meters.
    pub detection_range: f64,
}

impl Default for TagaConfig {
    fn default() -> Self {
        TagaConfig {
            d_safe: 0.65,
            activation_band: 0.5,
            cluster_eps: 1.3,
            velocity_tol: 0.5,
            min_group_size: 3,
            detection_range: 5.0,
        }
    }
}

impl TagaConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("d_safe", self.d_safe),
            ("activation_band", self.activation_band),
            ("cluster_eps", self.cluster_eps),
            ("velocity_tol", self.velocity_tol),
            ("detection_range", self.detection_range),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(format!("taga.{name} must be strictly positive, got {v}"));
            }
        }
        if self.min_group_size < 2 {
            return Err(format!(
                "taga.min_group_size must be >= 2, got {}",
                self.min_group_size
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum TagaMode {
    #[default]
    Inactive,
    Avoiding,
}

/// Wrapper state, observable in traces: `Avoiding` iff a group is currently
/// being rounded.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TagaState {
    pub active_group: Option<DetectedGroup>,
    pub mode: TagaMode,
}

/// Single-linkage clustering of the visible humans: two humans are linked
/// when they are within `cluster_eps` of each other and their velocities
/// differ by at most `velocity_tol`. Connected components of at least
/// `min_group_size` become groups, sorted by centroid distance from the
/// robot (ties by smallest member id).
pub fn detect_groups(obs: &WorldObservation, cfg: &TagaConfig) -> Vec<DetectedGroup> {
    let humans = &obs.visible_humans;
    let n = humans.len();
    let mut parent: Vec<usize> = (0..n).collect();

    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut root = i;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = i;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }

    for i in 0..n {
        for j in (i + 1)..n {
            let close = humans[i].position.dist(humans[j].position) <= cfg.cluster_eps;
            let coherent = humans[i].velocity.dist(humans[j].velocity) <= cfg.velocity_tol;
            if close && coherent {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }

    let mut components: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let root = find(&mut parent, i);
        components[root].push(i);
    }

    let mut groups: Vec<DetectedGroup> = Vec::new();
    for members in components
        .into_iter()
        .filter(|m| m.len() >= cfg.min_group_size)
    {
        let count = members.len() as f64;
        let mut centroid = Vec2::ZERO;
        let mut mean_velocity = Vec2::ZERO;
        for &m in &members {
            centroid += humans[m].position;
            mean_velocity += humans[m].velocity;
        }
        centroid = centroid / count;
        mean_velocity = mean_velocity / count;
        let radius = members
            .iter()
            .map(|&m| humans[m].position.dist(centroid))
            .fold(0.0, f64::max);
        let mut member_ids: Vec<usize> = members.iter().map(|&m| humans[m].id).collect();
        member_ids.sort_unstable();
        groups.push(DetectedGroup {
            centroid,
            radius,
            member_ids,
            mean_velocity,
        });
    }

    groups.sort_by(|a, b| {
        let da = a.centroid.dist(obs.robot.position);
        let db = b.centroid.dist(obs.robot.position);
        da.partial_cmp(&db)
            .unwrap()
            .then_with(|| a.member_ids[0].cmp(&b.member_ids[0]))
    });
    groups
}

/// Lookahead horizon, in seconds, for the collision-course test against a
/// group disk.
const COURSE_LOOKAHEAD: f64 = 2.0;

/// The nearest detected group the robot must round right now: the robot has
/// come within the activation band of the group's switching distance
/// (radius + `d_safe`), it is still outside the inflated disk, and the disk
/// is in the way — either blocking the straight segment to the goal or
/// lying on the robot's current course. Farther groups stay the base
/// policy's problem until the robot reaches them.
pub fn taga_active<'a>(
    robot: &AgentState,
    goal: Vec2,
    groups: &'a [DetectedGroup],
    cfg: &TagaConfig,
) -> Option<&'a DetectedGroup> {
    groups.iter().find(|g| {
        let dist = robot.position.dist(g.centroid);
        let inflated = Disk::new(g.centroid, g.radius + cfg.d_safe);
        if dist > cfg.detection_range
            || dist > inflated.radius + cfg.activation_band
            || dist <= inflated.radius + EPS_GEOM
        {
            return false;
        }
        let blocks_goal = segment_disk_intersects(robot.position, goal, &inflated);
        let on_course = segment_disk_intersects(
            robot.position,
            robot.position + robot.velocity * COURSE_LOOKAHEAD,
            &inflated,
        );
        blocks_goal || on_course
    })
}

/// Full-speed pursuit of the tangent point on the group's inflated boundary
/// that best lines up with the goal.
pub fn taga_action(
    robot: &AgentState,
    group: &DetectedGroup,
    goal: Vec2,
    cfg: &TagaConfig,
    v_max: f64,
) -> Result<Vec2, GeomError> {
    let subgoal = select_tangent(robot.position, &group.disk(), cfg.d_safe, goal)?;
    let dir = (subgoal - robot.position)
        .normalized()
        .ok_or(GeomError::DegenerateTangent {
            dist: 0.0,
            radius: group.radius + cfg.d_safe,
        })?;
    Ok(dir * v_max)
}

/// A base policy composed with the group-avoidance switch: tangent action
/// when a detected group blocks the path, the base policy otherwise.
pub struct TagaPolicy {
    base: Box<dyn RobotPolicy>,
    pub cfg: TagaConfig,
    pub state: TagaState,
}

/// Wraps `base` with the group-avoidance switching rule.
pub fn wrap_policy(base: Box<dyn RobotPolicy>, cfg: TagaConfig) -> TagaPolicy {
    TagaPolicy {
        base,
        cfg,
        state: TagaState::default(),
    }
}

impl RobotPolicy for TagaPolicy {
    fn act(&mut self, obs: &WorldObservation) -> Vec2 {
        let groups = detect_groups(obs, &self.cfg);
        if let Some(group) = taga_active(&obs.robot, obs.goal, &groups, &self.cfg) {
            match taga_action(&obs.robot, group, obs.goal, &self.cfg, obs.robot.pref_speed) {
                Ok(v) => {
                    self.state = TagaState {
                        active_group: Some(group.clone()),
                        mode: TagaMode::Avoiding,
                    };
                    return v;
                }
                Err(GeomError::DegenerateTangent { .. }) => {}
            }
        }
        // A group disk can run over the robot (or the robot can clip the
        // switching band while rounding). The tangent is undefined in
        // there and the base policy cannot see disks, so back straight out
        // until the tangent geometry is valid again.
        if let Some((group, away)) = self.inside_switching_band(obs, &groups) {
            self.state = TagaState {
                active_group: Some(group.clone()),
                mode: TagaMode::Avoiding,
            };
            return away * obs.robot.pref_speed;
        }
        self.state = TagaState::default();
        self.base.act(obs)
    }

    fn taga_mode(&self) -> TagaMode {
        self.state.mode
    }
}

impl TagaPolicy {
    /// The nearest detected group whose inflated disk contains the robot,
    /// with the outward escape direction.
    fn inside_switching_band<'a>(
        &self,
        obs: &WorldObservation,
        groups: &'a [DetectedGroup],
    ) -> Option<(&'a DetectedGroup, Vec2)> {
        groups.iter().find_map(|g| {
            let dist = obs.robot.position.dist(g.centroid);
            if dist > self.cfg.detection_range || dist > g.radius + self.cfg.d_safe {
                return None;
            }
            (obs.robot.position - g.centroid)
                .normalized()
                .map(|away| (g, away))
        })
    }
}
