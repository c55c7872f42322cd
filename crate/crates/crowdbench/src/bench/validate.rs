//! Independent re-checking of trace invariants: group geometry, the
//! inside-group indicator, path length, the group-time fraction, and the
//! terminal classification.

use super::trace::TraceHeader;
use super::StepRecord;
use crate::geom::Vec2;
use crate::sim::OutcomeKind;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ValidationError {
    #[error("trace has no step records")]
    Empty,
    #[error("step indices are not contiguous at record {record}")]
    NonContiguous { record: usize },
    #[error("step {t}: group {group_id} centroid off by {error}")]
    Centroid {
        t: usize,
        group_id: usize,
        error: f64,
    },
    #[error("step {t}: group {group_id} radius off by {error}")]
    Radius {
        t: usize,
        group_id: usize,
        error: f64,
    },
    #[error("step {t}: group {group_id} member {member} missing from record")]
    MissingMember {
        t: usize,
        group_id: usize,
        member: usize,
    },
    #[error("step {t}: inside_group flag is {recorded} but geometry says {recomputed}")]
    InsideFlag {
        t: usize,
        recorded: bool,
        recomputed: bool,
    },
    #[error("step {t}: agent {id} speed {speed} exceeds preferred speed {limit}")]
    Speeding {
        t: usize,
        id: usize,
        speed: f64,
        limit: f64,
    },
    #[error("path length mismatch: header {header}, recomputed {recomputed}")]
    PathLength { header: f64, recomputed: f64 },
    #[error("group-time fraction mismatch: header {header}, recomputed {recomputed}")]
    GcrFraction { header: f64, recomputed: f64 },
    #[error("terminal step {terminal} does not match trace length {last}")]
    TerminalStep { terminal: usize, last: usize },
    #[error("outcome {kind:?} inconsistent with final state: {detail}")]
    Outcome { kind: OutcomeKind, detail: String },
}

/// What a successful validation covered.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub steps: usize,
    pub group_checks: usize,
}

const GEOM_TOL: f64 = 1e-9;

/// Recomputes every trace invariant from raw positions and fails on the
/// first mismatch.
pub fn validate_trace(
    header: &TraceHeader,
    steps: &[StepRecord],
) -> Result<ValidationReport, ValidationError> {
    if steps.is_empty() {
        return Err(ValidationError::Empty);
    }
    let mut group_checks = 0usize;

    for (i, step) in steps.iter().enumerate() {
        if step.t != i {
            return Err(ValidationError::NonContiguous { record: i });
        }

        let human_pos =
            |id: usize| -> Option<Vec2> { step.humans.iter().find(|h| h.id == id).map(|h| h.pos) };

        // Group geometry must follow the members exactly.
        for rec in &step.groups {
            let meta = header
                .groups
                .iter()
                .find(|g| g.group_id == rec.group_id)
                .ok_or(ValidationError::MissingMember {
                    t: step.t,
                    group_id: rec.group_id,
                    member: usize::MAX,
                })?;
            let mut sum = Vec2::ZERO;
            for id in &meta.member_ids {
                let p = human_pos(*id).ok_or(ValidationError::MissingMember {
                    t: step.t,
                    group_id: rec.group_id,
                    member: *id,
                })?;
                sum += p;
            }
            let centroid = sum / meta.member_ids.len() as f64;
            let centroid_err = centroid.dist(rec.centroid);
            if centroid_err > GEOM_TOL {
                return Err(ValidationError::Centroid {
                    t: step.t,
                    group_id: rec.group_id,
                    error: centroid_err,
                });
            }
            let radius = meta
                .member_ids
                .iter()
                .filter_map(|id| human_pos(*id))
                .map(|p| p.dist(centroid))
                .fold(0.0, f64::max);
            let radius_err = (radius - rec.radius).abs();
            if radius_err > GEOM_TOL {
                return Err(ValidationError::Radius {
                    t: step.t,
                    group_id: rec.group_id,
                    error: radius_err,
                });
            }
            group_checks += 1;
        }

        // The indicator is a pure function of the recorded geometry.
        let inside = step
            .groups
            .iter()
            .any(|g| step.robot_pos.dist(g.centroid) < g.radius);
        if inside != step.inside_group {
            return Err(ValidationError::InsideFlag {
                t: step.t,
                recorded: step.inside_group,
                recomputed: inside,
            });
        }

        // Nobody exceeds the preferred speed.
        let limit = header.scenario.pref_speed + 1e-9;
        if step.robot_vel.norm() > limit {
            return Err(ValidationError::Speeding {
                t: step.t,
                id: 0,
                speed: step.robot_vel.norm(),
                limit,
            });
        }
        for h in &step.humans {
            if h.vel.norm() > limit {
                return Err(ValidationError::Speeding {
                    t: step.t,
                    id: h.id,
                    speed: h.vel.norm(),
                    limit,
                });
            }
        }
    }

    // Path length from per-step displacements.
    let mut path = 0.0;
    for pair in steps.windows(2) {
        path += pair[1].robot_pos.dist(pair[0].robot_pos);
    }
    if (path - header.path_length).abs() > GEOM_TOL {
        return Err(ValidationError::PathLength {
            header: header.path_length,
            recomputed: path,
        });
    }

    // Group-time fraction over the post-initial records, exact match.
    let inside_count = steps[1..].iter().filter(|s| s.inside_group).count();
    let gcr = inside_count as f64 / (steps.len() - 1) as f64;
    if gcr != header.gcr_fraction {
        return Err(ValidationError::GcrFraction {
            header: header.gcr_fraction,
            recomputed: gcr,
        });
    }

    // Terminal bookkeeping.
    let last = steps.last().expect("non-empty");
    if header.outcome.terminal_step != last.t {
        return Err(ValidationError::TerminalStep {
            terminal: header.outcome.terminal_step,
            last: last.t,
        });
    }
    if header.outcome.terminal_step > header.scenario.max_steps {
        return Err(ValidationError::Outcome {
            kind: header.outcome.kind,
            detail: format!(
                "terminal step {} beyond the limit {}",
                header.outcome.terminal_step, header.scenario.max_steps
            ),
        });
    }
    let scenario = &header.scenario;
    match header.outcome.kind {
        OutcomeKind::Timeout => {
            if header.outcome.terminal_step != scenario.max_steps {
                return Err(ValidationError::Outcome {
                    kind: OutcomeKind::Timeout,
                    detail: "timeout before the step limit".into(),
                });
            }
        }
        OutcomeKind::Success => {
            let d = last.robot_pos.dist(scenario.robot_goal());
            if d >= scenario.goal_radius {
                return Err(ValidationError::Outcome {
                    kind: OutcomeKind::Success,
                    detail: format!("final goal distance {d}"),
                });
            }
        }
        OutcomeKind::Collision => {
            let hit = last.humans.iter().any(|h| {
                h.pos.dist(last.robot_pos) < scenario.robot_radius + scenario.human_radius
            });
            if !hit {
                return Err(ValidationError::Outcome {
                    kind: OutcomeKind::Collision,
                    detail: "no human within collision distance at the final step".into(),
                });
            }
        }
        OutcomeKind::GroupCollision => {
            if !scenario.terminate_on_group_intrusion {
                return Err(ValidationError::Outcome {
                    kind: OutcomeKind::GroupCollision,
                    detail: "group termination was disabled".into(),
                });
            }
            if !last.inside_group {
                return Err(ValidationError::Outcome {
                    kind: OutcomeKind::GroupCollision,
                    detail: "robot not inside a group disk at the final step".into(),
                });
            }
        }
    }

    Ok(ValidationReport {
        steps: steps.len(),
        group_checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::run_episode;
    use crate::bench::trace::TraceHeader;
    use crate::policy::orca::OrcaParams;
    use crate::policy::sf::SfParams;
    use crate::policy::OrcaPolicy;
    use crate::sim::{generate_scenario, ScenarioConfig};

    fn run_and_header(seed: u64) -> (TraceHeader, Vec<StepRecord>) {
        let config = ScenarioConfig::default();
        let mut policy = OrcaPolicy::new(OrcaParams::default(), config.dt);
        let (report, steps) = run_episode(&config, &mut policy, seed).unwrap();
        let world0 = generate_scenario(&config, seed).unwrap();
        let header = TraceHeader::new(
            "orca".into(),
            config,
            None,
            OrcaParams::default(),
            SfParams::default(),
            &world0,
            &report,
        );
        (header, steps)
    }

    #[test]
    fn clean_episode_validates() {
        for seed in [1, 2, 3] {
            let (header, steps) = run_and_header(seed);
            let report = validate_trace(&header, &steps).unwrap();
            assert_eq!(report.steps, steps.len());
        }
    }

    #[test]
    fn tampered_path_length_is_caught() {
        let (mut header, steps) = run_and_header(4);
        header.path_length += 0.5;
        assert!(matches!(
            validate_trace(&header, &steps),
            Err(ValidationError::PathLength { .. })
        ));
    }

    #[test]
    fn tampered_group_radius_is_caught() {
        let (header, mut steps) = run_and_header(4);
        let target = steps
            .iter_mut()
            .find(|s| !s.groups.is_empty())
            .expect("default config has groups");
        target.groups[0].radius += 0.01;
        assert!(matches!(
            validate_trace(&header, &steps),
            Err(ValidationError::Radius { .. })
        ));
    }

    #[test]
    fn tampered_inside_flag_is_caught() {
        let (header, mut steps) = run_and_header(4);
        let flag = steps[0].inside_group;
        steps[0].inside_group = !flag;
        assert!(matches!(
            validate_trace(&header, &steps),
            Err(ValidationError::InsideFlag { .. })
        ));
    }
}
