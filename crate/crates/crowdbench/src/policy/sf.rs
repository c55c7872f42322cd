//! Social-force navigation: a goal-driving force plus exponential pairwise
//! repulsion from pedestrians, integrated to a velocity command under unit
//! mass.

use crate::geom::Vec2;
use crate::sim::AgentState;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Social-force parameters (unit mass, so forces are accelerations).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SfParams {
    /// Relaxation time of the driving term, seconds.
    pub relax_time: f64,
    /// Repulsion amplitude, m/s^2.
    pub a: f64,
    /// Repulsion range, meters.
    pub b: f64,
    /// Magnitude cap on the total force, m/s^2.
    pub max_force: f64,
}

impl Default for SfParams {
    fn default() -> Self {
        SfParams {
            relax_time: 0.5,
            a: 2.0,
            b: 0.3,
            max_force: 10.0,
        }
    }
}

impl SfParams {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("relax_time", self.relax_time),
            ("a", self.a),
            ("b", self.b),
            ("max_force", self.max_force),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(format!("sf.{name} must be strictly positive, got {v}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SfError {
    /// Two agents share a position, so the repulsion direction is undefined.
    #[error("coincident agents at distance {dist}")]
    CoincidentAgents { dist: f64 },
}

/// Total force on `agent`: driving term `(v0 * e - v) / relax_time` plus
/// `sum a * exp((r_ij - d_ij) / b) * n_ij` over neighbors, clamped to
/// `max_force`. `n_ij` points from the neighbor to the agent.
pub fn sf_force(
    agent: &AgentState,
    neighbors: &[AgentState],
    goal: Vec2,
    params: &SfParams,
) -> Result<Vec2, SfError> {
    let to_goal = (goal - agent.position).normalized().unwrap_or(Vec2::ZERO);
    let mut force = (to_goal * agent.pref_speed - agent.velocity) / params.relax_time;
    for other in neighbors {
        let offset = agent.position - other.position;
        let dist = offset.norm();
        if dist < 1e-9 {
            return Err(SfError::CoincidentAgents { dist });
        }
        let sum_radii = agent.radius + other.radius;
        let magnitude = params.a * ((sum_radii - dist) / params.b).exp();
        force += (offset / dist) * magnitude;
    }
    Ok(force.clamp_norm(params.max_force))
}

/// One Euler step of the force model: `clamp(v + F * dt, v_max)`.
pub fn sf_velocity(
    agent: &AgentState,
    neighbors: &[AgentState],
    goal: Vec2,
    params: &SfParams,
    dt: f64,
    v_max: f64,
) -> Result<Vec2, SfError> {
    debug_assert!(dt > 0.0);
    let force = sf_force(agent, neighbors, goal, params)?;
    Ok((agent.velocity + force * dt).clamp_norm(v_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Role;
    use proptest::prelude::*;

    fn agent_at(position: Vec2, velocity: Vec2) -> AgentState {
        AgentState {
            id: 0,
            position,
            velocity,
            radius: 0.3,
            goal: position,
            pref_speed: 1.0,
            role: Role::Robot,
        }
    }

    #[test]
    fn driving_force_from_rest() {
        let a = agent_at(Vec2::ZERO, Vec2::ZERO);
        let params = SfParams::default();
        let f = sf_force(&a, &[], Vec2::new(5.0, 0.0), &params).unwrap();
        assert!(f.dist(Vec2::new(2.0, 0.0)) < 1e-12);
    }

    #[test]
    fn no_force_at_desired_velocity() {
        let a = agent_at(Vec2::ZERO, Vec2::new(1.0, 0.0));
        let f = sf_force(&a, &[], Vec2::new(5.0, 0.0), &SfParams::default()).unwrap();
        assert!(f.norm() < 1e-12);
    }

    #[test]
    fn repulsion_magnitude_matches_hand_value() {
        // Neighbor 1 m away, radii 0.3 + 0.3, a = 2, b = 0.3:
        // 2 * exp((0.6 - 1.0) / 0.3) = 0.526854...
        let goal = Vec2::ZERO;
        let a = agent_at(Vec2::ZERO, Vec2::ZERO);
        let neighbor = agent_at(Vec2::new(1.0, 0.0), Vec2::ZERO);
        let f = sf_force(&a, &[neighbor], goal, &SfParams::default()).unwrap();
        let expected = 2.0 * (-0.4f64 / 0.3).exp();
        assert!((f.norm() - expected).abs() < 1e-9);
        assert!(f.x < 0.0 && f.y.abs() < 1e-12, "repulsion points away");
        assert!((expected - 0.527194).abs() < 1e-6);
    }

    #[test]
    fn coincident_agents_error() {
        let a = agent_at(Vec2::ZERO, Vec2::ZERO);
        let b = agent_at(Vec2::ZERO, Vec2::ZERO);
        let err = sf_force(&a, &[b], Vec2::new(1.0, 0.0), &SfParams::default());
        assert!(matches!(err, Err(SfError::CoincidentAgents { .. })));
    }

    #[test]
    fn zero_force_keeps_velocity() {
        let a = agent_at(Vec2::ZERO, Vec2::new(1.0, 0.0));
        let v = sf_velocity(
            &a,
            &[],
            Vec2::new(9.0, 0.0),
            &SfParams::default(),
            0.25,
            1.0,
        )
        .unwrap();
        assert!(v.dist(Vec2::new(1.0, 0.0)) < 1e-12);
    }

    #[test]
    fn euler_step_from_rest() {
        // Force (2, 0) integrated over dt = 0.25 gives (0.5, 0).
        let a = agent_at(Vec2::ZERO, Vec2::ZERO);
        let v = sf_velocity(
            &a,
            &[],
            Vec2::new(5.0, 0.0),
            &SfParams::default(),
            0.25,
            1.0,
        )
        .unwrap();
        assert!(v.dist(Vec2::new(0.5, 0.0)) < 1e-12);
    }

    #[test]
    fn euler_step_clamps_to_v_max() {
        // Force 8 m/s^2 over 0.25 s from 0.9 m/s would exceed 1 m/s.
        let params = SfParams {
            relax_time: 0.0125, // (1 - 0.9) / 0.0125 = 8
            ..Default::default()
        };
        let a = agent_at(Vec2::ZERO, Vec2::new(0.9, 0.0));
        let v = sf_velocity(&a, &[], Vec2::new(50.0, 0.0), &params, 0.25, 1.0).unwrap();
        assert!(v.dist(Vec2::new(1.0, 0.0)) < 1e-12);
    }

    #[test]
    fn agent_converges_to_desired_speed() {
        let params = SfParams::default();
        let goal = Vec2::new(100.0, 0.0);
        let mut a = agent_at(Vec2::ZERO, Vec2::ZERO);
        let dt = 0.05;
        let steps = (5.0 * params.relax_time / dt).ceil() as usize;
        for _ in 0..steps {
            let v = sf_velocity(&a, &[], goal, &params, dt, 1.0).unwrap();
            a.velocity = v;
            a.position += v * dt;
        }
        assert!((a.velocity.norm() - 1.0).abs() < 0.05);
        assert!(a.velocity.x > 0.95);
    }

    proptest! {
        #[test]
        fn repulsion_decreases_with_distance(
            d1 in 0.7..5.0f64,
            delta in 0.01..3.0f64,
        ) {
            let goal = Vec2::ZERO;
            let params = SfParams::default();
            let a = agent_at(Vec2::ZERO, Vec2::ZERO);
            let near = agent_at(Vec2::new(d1, 0.0), Vec2::ZERO);
            let far = agent_at(Vec2::new(d1 + delta, 0.0), Vec2::ZERO);
            let f_near = sf_force(&a, &[near], goal, &params).unwrap().norm();
            let f_far = sf_force(&a, &[far], goal, &params).unwrap().norm();
            prop_assert!(f_far < f_near);
        }

        #[test]
        fn force_is_rotation_equivariant(
            theta in 0.0..std::f64::consts::TAU,
            gx in -5.0..5.0f64, gy in -5.0..5.0f64,
            nx in 0.7..4.0f64,
            vx in -1.0..1.0f64, vy in -1.0..1.0f64,
        ) {
            let params = SfParams::default();
            let rot = |v: Vec2| Vec2::new(
                theta.cos() * v.x - theta.sin() * v.y,
                theta.sin() * v.x + theta.cos() * v.y,
            );
            let a = agent_at(Vec2::ZERO, Vec2::new(vx, vy));
            let n = agent_at(Vec2::new(nx, 0.4), Vec2::ZERO);
            let goal = Vec2::new(gx, gy);
            let f = sf_force(&a, std::slice::from_ref(&n), goal, &params).unwrap();

            let a_r = agent_at(Vec2::ZERO, rot(Vec2::new(vx, vy)));
            let n_r = agent_at(rot(n.position), Vec2::ZERO);
            let f_r = sf_force(&a_r, &[n_r], rot(goal), &params).unwrap();
            prop_assert!(f_r.dist(rot(f)) < 1e-9);
        }
    }
}
