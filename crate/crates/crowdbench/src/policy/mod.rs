//! Robot navigation policies over sensor observations.

pub mod orca;
pub mod sf;

use crate::geom::Vec2;
use crate::sim::{pref_velocity_toward, WorldObservation};
use crate::taga::TagaMode;
use orca::{orca_velocity_resp, OrcaAgent, OrcaParams};
use sf::{sf_velocity, SfParams};

/// A navigation policy: maps the robot's observation to a velocity command.
pub trait RobotPolicy {
    fn act(&mut self, obs: &WorldObservation) -> Vec2;

    /// Group-avoidance mode after the latest `act` call. Plain policies are
    /// always inactive.
    fn taga_mode(&self) -> TagaMode {
        TagaMode::Inactive
    }
}

/// Reciprocal collision avoidance against every visible human.
#[derive(Clone, Debug)]
pub struct OrcaPolicy {
    pub params: OrcaParams,
    pub dt: f64,
}

impl OrcaPolicy {
    pub fn new(params: OrcaParams, dt: f64) -> Self {
        OrcaPolicy { params, dt }
    }
}

impl RobotPolicy for OrcaPolicy {
    fn act(&mut self, obs: &WorldObservation) -> Vec2 {
        let me = OrcaAgent::from(&obs.robot);
        let neighbors: Vec<OrcaAgent> = obs
            .visible_humans
            .iter()
            .map(|h| OrcaAgent {
                position: h.position,
                velocity: h.velocity,
                radius: h.radius + self.params.safety_margin,
            })
            .collect();
        let v_pref =
            pref_velocity_toward(obs.robot.position, obs.goal, obs.robot.pref_speed, self.dt);
        orca_velocity_resp(
            &me,
            &neighbors,
            v_pref,
            self.params.tau,
            self.dt,
            obs.robot.pref_speed,
            self.params.responsibility,
        )
    }
}

/// Social-force navigation against every visible human.
#[derive(Clone, Debug)]
pub struct SfPolicy {
    pub params: SfParams,
    pub dt: f64,
}

impl SfPolicy {
    pub fn new(params: SfParams, dt: f64) -> Self {
        SfPolicy { params, dt }
    }
}

impl RobotPolicy for SfPolicy {
    fn act(&mut self, obs: &WorldObservation) -> Vec2 {
        sf_velocity(
            &obs.robot,
            &obs.visible_humans,
            obs.goal,
            &self.params,
            self.dt,
            obs.robot.pref_speed,
        )
        // The simulator ends an episode at body contact, long before two
        // agents can coincide.
        .expect("coincident agents in observation")
    }
}
