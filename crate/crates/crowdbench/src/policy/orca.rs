//! Optimal reciprocal collision avoidance: per-neighbor half-plane
//! constraints in velocity space and a sequential 2D linear program that
//! picks the feasible velocity closest to the preferred one. When the 2D
//! program is infeasible the solver falls back to minimizing the largest
//! constraint violation.

use crate::geom::Vec2;
use serde::{Deserialize, Serialize};

const RVO_EPSILON: f64 = 1e-10;

/// Kinematic state that matters for avoidance. Neighbors may carry an
/// inflated radius when the caller wants extra clearance for a pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrcaAgent {
    pub position: Vec2,
    pub velocity: Vec2,
    pub radius: f64,
}

impl From<&crate::sim::AgentState> for OrcaAgent {
    fn from(a: &crate::sim::AgentState) -> Self {
        OrcaAgent {
            position: a.position,
            velocity: a.velocity,
            radius: a.radius,
        }
    }
}

/// Half-plane of permitted velocities: `v` is feasible iff
/// `(v - point) . normal >= 0`. The normal is unit length and points into
/// the feasible side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane {
    pub point: Vec2,
    pub normal: Vec2,
}

impl HalfPlane {
    pub fn permits(&self, v: Vec2, tol: f64) -> bool {
        (v - self.point).dot(self.normal) >= -tol
    }
}

/// Directed-line form used by the solver; the feasible side is to the
/// right of `direction` (i.e. `direction.det(point - v) <= 0`).
#[derive(Clone, Copy, Debug)]
struct Line {
    point: Vec2,
    direction: Vec2,
}

impl Line {
    fn violated_by(&self, v: Vec2) -> bool {
        self.direction.det(self.point - v) > 0.0
    }
}

/// Solver parameters for the avoidance policy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrcaParams {
    /// Collision horizon in seconds.
    pub tau: f64,
    /// Share of the correction this agent takes on itself. Mutually
    /// avoiding agents split the correction (0.5); the robot takes the full
    /// correction (1.0) because the crowd never reacts to it.
    pub responsibility: f64,
    /// Extra clearance, in meters, added to every neighbor radius in the
    /// robot's constraints. Buys reaction distance against neighbors that
    /// can turn within a single step.
    pub safety_margin: f64,
}

impl Default for OrcaParams {
    fn default() -> Self {
        OrcaParams {
            tau: 1.0,
            responsibility: 1.0,
            safety_margin: 0.0,
        }
    }
}

/// The half-plane of velocities for `agent` that keeps it clear of `other`
/// for `tau` seconds, assuming `other` applies the mirrored constraint.
/// Already-overlapping pairs get a constraint that resolves the overlap
/// within one `dt`.
pub fn orca_halfplane(agent: &OrcaAgent, other: &OrcaAgent, tau: f64, dt: f64) -> HalfPlane {
    orca_halfplane_resp(agent, other, tau, dt, 0.5)
}

/// Like [`orca_halfplane`] with an explicit responsibility share: 0.5 for
/// mutually avoiding agents, 1.0 against a neighbor that will not yield.
pub fn orca_halfplane_resp(
    agent: &OrcaAgent,
    other: &OrcaAgent,
    tau: f64,
    dt: f64,
    responsibility: f64,
) -> HalfPlane {
    let line = orca_line(agent, other, tau, dt, responsibility);
    HalfPlane {
        point: line.point,
        normal: line.direction.perp(),
    }
}

fn orca_line(agent: &OrcaAgent, other: &OrcaAgent, tau: f64, dt: f64, responsibility: f64) -> Line {
    debug_assert!(tau > 0.0 && dt > 0.0);
    let relative_position = other.position - agent.position;
    let relative_velocity = agent.velocity - other.velocity;
    let dist_sq = relative_position.norm_sq();
    let combined_radius = agent.radius + other.radius;
    let combined_radius_sq = combined_radius * combined_radius;

    let direction;
    let u;

    if dist_sq > combined_radius_sq {
        // No overlap. The velocity obstacle is a cone truncated by the disk
        // of radius R/tau centered at relative_position/tau; w is the vector
        // from the disk center to the relative velocity.
        let w = relative_velocity - relative_position / tau;
        let w_len_sq = w.norm_sq();
        let dot1 = w.dot(relative_position);
        if dot1 < 0.0 && dot1 * dot1 > combined_radius_sq * w_len_sq {
            // Closest exit is through the cut-off disk.
            let w_len = w_len_sq.sqrt();
            let unit_w = w / w_len;
            direction = Vec2::new(unit_w.y, -unit_w.x);
            u = unit_w * (combined_radius / tau - w_len);
        } else {
            // Closest exit is through one of the cone legs.
            let leg = (dist_sq - combined_radius_sq).sqrt();
            if relative_position.det(w) > 0.0 {
                direction = Vec2::new(
                    relative_position.x * leg - relative_position.y * combined_radius,
                    relative_position.x * combined_radius + relative_position.y * leg,
                ) / dist_sq;
            } else {
                direction = -(Vec2::new(
                    relative_position.x * leg + relative_position.y * combined_radius,
                    -relative_position.x * combined_radius + relative_position.y * leg,
                )) / dist_sq;
            }
            let dot2 = relative_velocity.dot(direction);
            u = direction * dot2 - relative_velocity;
        }
    } else {
        // Already colliding: push apart within one time step.
        let inv_dt = 1.0 / dt;
        let w = relative_velocity - relative_position * inv_dt;
        let w_len = w.norm();
        let unit_w = if w_len > 1e-12 {
            w / w_len
        } else if let Some(away) = (-relative_position).normalized() {
            away
        } else {
            Vec2::new(1.0, 0.0)
        };
        direction = Vec2::new(unit_w.y, -unit_w.x);
        u = unit_w * (combined_radius * inv_dt - w_len);
    }

    // This agent's share of the correction; a mutually avoiding neighbor
    // is expected to take the rest.
    Line {
        point: agent.velocity + u * responsibility,
        direction,
    }
}

/// Velocity closest to `v_pref` subject to every neighbor's half-plane and
/// the speed cap `v_max`, with mutual (0.5) responsibility. Constraints are
/// processed in the order neighbors are given; callers should order
/// neighbors deterministically.
pub fn orca_velocity(
    agent: &OrcaAgent,
    neighbors: &[OrcaAgent],
    v_pref: Vec2,
    tau: f64,
    dt: f64,
    v_max: f64,
) -> Vec2 {
    orca_velocity_resp(agent, neighbors, v_pref, tau, dt, v_max, 0.5)
}

/// Like [`orca_velocity`] with an explicit responsibility share.
#[allow(clippy::too_many_arguments)]
pub fn orca_velocity_resp(
    agent: &OrcaAgent,
    neighbors: &[OrcaAgent],
    v_pref: Vec2,
    tau: f64,
    dt: f64,
    v_max: f64,
    responsibility: f64,
) -> Vec2 {
    let lines: Vec<Line> = neighbors
        .iter()
        .map(|n| orca_line(agent, n, tau, dt, responsibility))
        .collect();
    let mut result = Vec2::ZERO;
    let failed_at = linear_program_2(&lines, v_max, v_pref, false, &mut result);
    if failed_at < lines.len() {
        linear_program_3(&lines, failed_at, v_max, &mut result);
    }
    result
}

/// All half-planes `agent` is subject to, in neighbor order, with mutual
/// (0.5) responsibility.
pub fn orca_halfplanes(
    agent: &OrcaAgent,
    neighbors: &[OrcaAgent],
    tau: f64,
    dt: f64,
) -> Vec<HalfPlane> {
    neighbors
        .iter()
        .map(|n| orca_halfplane(agent, n, tau, dt))
        .collect()
}

/// Optimizes along constraint line `line_no` subject to the earlier lines
/// and the speed circle. Returns `None` when that feasible interval is
/// empty.
fn linear_program_1(
    lines: &[Line],
    line_no: usize,
    radius: f64,
    opt_velocity: Vec2,
    direction_opt: bool,
) -> Option<Vec2> {
    let line = lines[line_no];
    let dot = line.point.dot(line.direction);
    let discriminant = dot * dot + radius * radius - line.point.norm_sq();
    if discriminant < 0.0 {
        return None;
    }
    let sqrt_disc = discriminant.sqrt();
    let mut t_left = -dot - sqrt_disc;
    let mut t_right = -dot + sqrt_disc;

    for prev in lines.iter().take(line_no) {
        let denominator = line.direction.det(prev.direction);
        let numerator = prev.direction.det(line.point - prev.point);
        if denominator.abs() <= RVO_EPSILON {
            // Parallel lines: fail only when this one is on the wrong side.
            if numerator < 0.0 {
                return None;
            }
            continue;
        }
        let t = numerator / denominator;
        if denominator >= 0.0 {
            t_right = t_right.min(t);
        } else {
            t_left = t_left.max(t);
        }
        if t_left > t_right {
            return None;
        }
    }

    let t = if direction_opt {
        if opt_velocity.dot(line.direction) > 0.0 {
            t_right
        } else {
            t_left
        }
    } else {
        line.direction
            .dot(opt_velocity - line.point)
            .clamp(t_left, t_right)
    };
    Some(line.point + line.direction * t)
}

/// Sequentially enforces each line; returns `lines.len()` on success or the
/// index of the first line whose feasible set is empty.
fn linear_program_2(
    lines: &[Line],
    radius: f64,
    opt_velocity: Vec2,
    direction_opt: bool,
    result: &mut Vec2,
) -> usize {
    *result = if direction_opt {
        // opt_velocity is a unit direction here.
        opt_velocity * radius
    } else if opt_velocity.norm_sq() > radius * radius {
        opt_velocity
            .normalized()
            .map(|u| u * radius)
            .unwrap_or(Vec2::ZERO)
    } else {
        opt_velocity
    };
    for (i, line) in lines.iter().enumerate() {
        if line.violated_by(*result) {
            match linear_program_1(lines, i, radius, opt_velocity, direction_opt) {
                Some(v) => *result = v,
                None => return i,
            }
        }
    }
    lines.len()
}

/// Infeasible fallback: starting from the line that failed, minimize the
/// largest violation by pushing the result in the direction that backs all
/// violated constraints off equally.
fn linear_program_3(lines: &[Line], begin_line: usize, radius: f64, result: &mut Vec2) {
    let mut distance = 0.0;
    for i in begin_line..lines.len() {
        if lines[i].direction.det(lines[i].point - *result) > distance {
            let mut proj_lines: Vec<Line> = Vec::new();
            for j in 0..i {
                let determinant = lines[i].direction.det(lines[j].direction);
                let point = if determinant.abs() <= RVO_EPSILON {
                    if lines[i].direction.dot(lines[j].direction) > 0.0 {
                        continue;
                    }
                    (lines[i].point + lines[j].point) * 0.5
                } else {
                    lines[i].point
                        + lines[i].direction
                            * (lines[j].direction.det(lines[i].point - lines[j].point)
                                / determinant)
                };
                let direction = match (lines[j].direction - lines[i].direction).normalized() {
                    Some(d) => d,
                    None => continue,
                };
                proj_lines.push(Line { point, direction });
            }
            let temp = *result;
            if linear_program_2(
                &proj_lines,
                radius,
                Vec2::new(-lines[i].direction.y, lines[i].direction.x),
                true,
                result,
            ) < proj_lines.len()
            {
                *result = temp;
            }
            distance = lines[i].direction.det(lines[i].point - *result);
        }
    }
}
