//! Seeded scenario generation: robot, individuals, and cohesive human
//! groups placed by rejection sampling.

use super::{
    group_centroid_radius, sample_clear_point, AgentState, GroupKind, GroupState, Role,
    ScenarioConfig, WorldState,
};
use crate::geom::Vec2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Radius of the disk around a sampled group center that members are
/// placed in. Realized boundary disks come out at roughly 0.9-1.5 m.
pub const GROUP_SPAWN_RADIUS: f64 = 1.4;
/// Center-to-center slack added on top of summed body radii when placing.
pub const PLACEMENT_MARGIN: f64 = 0.1;
/// Each group member after the first is placed within this distance of an
/// already-placed member, so formations are spatially coherent blobs.
pub const MEMBER_CHAIN_DIST: f64 = 1.15;
/// Minimum separation between sampled group centers.
pub const GROUP_CENTER_MIN_SEP: f64 = 4.6;
/// Minimum distance between a group center and the robot start or goal.
pub const GROUP_ENDPOINT_CLEARANCE: f64 = 2.8;
/// Individuals spawn at least this far outside a group radius.
pub const INDIVIDUAL_GROUP_CLEARANCE: f64 = 1.4;

const MAX_ATTEMPTS: usize = 10_000;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("placement failed after {attempts} attempts while placing {what} (seed {seed})")]
    PlacementFailure {
        what: String,
        attempts: usize,
        seed: u64,
    },
    #[error("group has no members")]
    EmptyGroup,
    #[error("invalid scenario config: {0}")]
    InvalidConfig(String),
}

struct Placer<'a> {
    rng: &'a mut ChaCha8Rng,
    seed: u64,
}

impl<'a> Placer<'a> {
    fn sample<F>(&mut self, what: &str, mut candidate: F) -> Result<Vec2, SimError>
    where
        F: FnMut(&mut ChaCha8Rng) -> Option<Vec2>,
    {
        for _ in 0..MAX_ATTEMPTS {
            if let Some(p) = candidate(self.rng) {
                return Ok(p);
            }
        }
        Err(SimError::PlacementFailure {
            what: what.to_string(),
            attempts: MAX_ATTEMPTS,
            seed: self.seed,
        })
    }
}

fn uniform_in(rng: &mut ChaCha8Rng, half_extent: f64) -> Vec2 {
    Vec2::new(
        rng.gen_range(-half_extent..=half_extent),
        rng.gen_range(-half_extent..=half_extent),
    )
}

fn uniform_in_disk(rng: &mut ChaCha8Rng, center: Vec2, radius: f64) -> Vec2 {
    loop {
        let p = Vec2::new(
            rng.gen_range(-radius..=radius),
            rng.gen_range(-radius..=radius),
        );
        if p.norm_sq() <= radius * radius {
            return center + p;
        }
    }
}

fn clear_of_agents(p: Vec2, radius: f64, placed: &[(Vec2, f64)]) -> bool {
    placed
        .iter()
        .all(|(q, r)| p.dist(*q) >= radius + r + PLACEMENT_MARGIN)
}

/// Lays out one group: a center clear of other groups and of the robot's
/// start and goal, plus a chain of members inside the spawn disk. Members
/// land in an annulus around an already-placed member, so formations come
/// out as arcs and snakes while every member stays within linking distance
/// of the chain. Retries the whole layout with a fresh center when the
/// chain gets stuck.
fn place_group(
    rng: &mut ChaCha8Rng,
    config: &ScenarioConfig,
    group_id: usize,
    size: usize,
    group_centers: &[Vec2],
    placed: &[(Vec2, f64)],
    seed: u64,
) -> Result<(Vec2, Vec<Vec2>), SimError> {
    let center_extent = config.arena_half_extent - 1.5;
    let start = config.robot_start();
    let goal = config.robot_goal();
    let radius = config.human_radius;
    let min_step = 2.0 * radius + PLACEMENT_MARGIN;

    'layout: for _ in 0..40 {
        let center = {
            let mut placer = Placer { rng, seed };
            placer.sample(&format!("group {group_id} center"), |rng| {
                let c = uniform_in(rng, center_extent);
                let sep_ok = group_centers
                    .iter()
                    .all(|g| c.dist(*g) >= GROUP_CENTER_MIN_SEP);
                let endpoints_ok = c.dist(start) >= GROUP_ENDPOINT_CLEARANCE
                    && c.dist(goal) >= GROUP_ENDPOINT_CLEARANCE;
                (sep_ok && endpoints_ok).then_some(c)
            })?
        };

        let mut members: Vec<Vec2> = Vec::with_capacity(size);
        let mut heading = rng.gen_range(0.0..std::f64::consts::TAU);
        for k in 0..size {
            let mut found = None;
            for attempt in 0..2_000 {
                let (p, step_heading) = if members.is_empty() {
                    (uniform_in_disk(rng, center, GROUP_SPAWN_RADIUS), heading)
                } else if attempt < 1_000 {
                    // Extend the chain with limited turning, so formations
                    // come out as lines and arcs.
                    let turn = rng.gen_range(-1.0..1.0);
                    let dir = heading + turn;
                    let r = rng.gen_range(min_step + 0.1..=MEMBER_CHAIN_DIST);
                    let anchor = members[members.len() - 1];
                    (anchor + Vec2::new(dir.cos(), dir.sin()) * r, dir)
                } else {
                    // Wider fallback: anywhere in the disk that still links.
                    (uniform_in_disk(rng, center, GROUP_SPAWN_RADIUS), heading)
                };
                if p.dist(center) > GROUP_SPAWN_RADIUS {
                    continue;
                }
                if !members.is_empty() && !members.iter().any(|q| p.dist(*q) <= MEMBER_CHAIN_DIST) {
                    continue;
                }
                if clear_of_agents(p, radius, placed)
                    && members
                        .iter()
                        .all(|q| p.dist(*q) >= 2.0 * radius + 2.0 * PLACEMENT_MARGIN)
                {
                    found = Some((p, step_heading));
                    break;
                }
            }
            match found {
                Some((p, dir)) => {
                    members.push(p);
                    if k == 0 {
                        heading = rng.gen_range(0.0..std::f64::consts::TAU);
                    } else {
                        heading = dir;
                    }
                }
                None => continue 'layout,
            }
        }
        return Ok((center, members));
    }
    Err(SimError::PlacementFailure {
        what: format!("group {group_id} layout"),
        attempts: MAX_ATTEMPTS,
        seed,
    })
}

/// Builds a full world from the config and seed. Identical inputs always
/// yield an identical world.
pub fn generate_scenario(config: &ScenarioConfig, seed: u64) -> Result<WorldState, SimError> {
    config.validate().map_err(SimError::InvalidConfig)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let robot = AgentState {
        id: 0,
        position: config.robot_start(),
        velocity: Vec2::ZERO,
        radius: config.robot_radius,
        goal: config.robot_goal(),
        pref_speed: config.pref_speed,
        role: Role::Robot,
    };

    let mut placed: Vec<(Vec2, f64)> = vec![(robot.position, robot.radius)];
    let mut humans: Vec<AgentState> = Vec::new();
    let mut groups: Vec<GroupState> = Vec::new();
    let mut next_id = 1usize;

    // Phase 1: group formations.
    let mut group_centers: Vec<Vec2> = Vec::new();
    for group_id in 0..config.n_groups {
        let kind = if rng.gen_bool(config.static_group_fraction) {
            GroupKind::Static
        } else {
            GroupKind::Dynamic
        };
        let size = rng.gen_range(config.group_size_min..=config.group_size_max);

        let (center, member_positions) = place_group(
            &mut rng,
            config,
            group_id,
            size,
            &group_centers,
            &placed,
            seed,
        )?;
        group_centers.push(center);
        for pos in &member_positions {
            placed.push((*pos, config.human_radius));
        }

        let leader_slot = match kind {
            GroupKind::Dynamic => Some(rng.gen_range(0..size)),
            GroupKind::Static => None,
        };

        let mut member_ids = Vec::with_capacity(size);
        let mut leader_id = None;
        for (m, pos) in member_positions.iter().enumerate() {
            let id = next_id;
            next_id += 1;
            member_ids.push(id);
            let role = match (kind, leader_slot) {
                (GroupKind::Static, _) => Role::StaticGroupMember,
                (GroupKind::Dynamic, Some(slot)) if slot == m => {
                    leader_id = Some(id);
                    Role::GroupLeader
                }
                (GroupKind::Dynamic, _) => Role::GroupFollower,
            };
            humans.push(AgentState {
                id,
                position: *pos,
                velocity: Vec2::ZERO,
                radius: config.human_radius,
                goal: *pos, // shared goal assigned in phase 2
                pref_speed: config.pref_speed,
                role,
            });
        }

        let (centroid, radius) = group_centroid_radius(&member_positions)?;
        groups.push(GroupState {
            group_id,
            centroid,
            radius,
            member_count: size,
            member_ids,
            kind,
            leader_id,
        });
    }

    // Phase 2: shared goals for dynamic groups, sampled clear of every
    // group disk now that all formations exist.
    for gi in 0..groups.len() {
        if groups[gi].kind != GroupKind::Dynamic {
            continue;
        }
        let goal = sample_clear_point(&mut rng, config, &groups);
        let member_ids = groups[gi].member_ids.clone();
        for h in humans.iter_mut() {
            if member_ids.binary_search(&h.id).is_ok() {
                h.goal = goal;
            }
        }
    }

    // Phase 3: individuals.
    let spawn_extent = config.arena_half_extent - config.human_radius;
    for i in 0..config.n_individuals {
        let pos = {
            let mut placer = Placer {
                rng: &mut rng,
                seed,
            };
            let placed_snapshot = placed.clone();
            let group_disks: Vec<(Vec2, f64)> =
                groups.iter().map(|g| (g.centroid, g.radius)).collect();
            let radius = config.human_radius;
            placer.sample(&format!("individual {i}"), |rng| {
                let p = uniform_in(rng, spawn_extent);
                if !clear_of_agents(p, radius, &placed_snapshot) {
                    return None;
                }
                let group_clear = group_disks
                    .iter()
                    .all(|(c, r)| p.dist(*c) >= r + INDIVIDUAL_GROUP_CLEARANCE);
                group_clear.then_some(p)
            })?
        };
        placed.push((pos, config.human_radius));
        let goal = sample_clear_point(&mut rng, config, &groups);
        humans.push(AgentState {
            id: next_id,
            position: pos,
            velocity: Vec2::ZERO,
            radius: config.human_radius,
            goal,
            pref_speed: config.pref_speed,
            role: Role::Individual,
        });
        next_id += 1;
    }

    Ok(WorldState {
        time_step: 0,
        robot,
        humans,
        groups,
        rng,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_crowd_has_only_robot() {
        let config = ScenarioConfig {
            n_individuals: 0,
            n_groups: 0,
            ..Default::default()
        };
        let world = generate_scenario(&config, 1).unwrap();
        assert!(world.humans.is_empty());
        assert!(world.groups.is_empty());
        assert_eq!(world.robot.position, Vec2::new(0.0, -4.5));
        assert_eq!(world.robot.goal, Vec2::new(0.0, 4.5));
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let config = ScenarioConfig::default();
        let a = generate_scenario(&config, 42).unwrap();
        let b = generate_scenario(&config, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_differ() {
        let config = ScenarioConfig::default();
        let a = generate_scenario(&config, 1).unwrap();
        let b = generate_scenario(&config, 2).unwrap();
        assert_ne!(a.humans, b.humans);
    }

    #[test]
    fn groups_satisfy_centroid_radius_invariants() {
        let config = ScenarioConfig {
            n_groups: 2,
            group_size_min: 3,
            group_size_max: 3,
            ..Default::default()
        };
        let world = generate_scenario(&config, 5).unwrap();
        assert_eq!(world.groups.len(), 2);
        for g in &world.groups {
            assert_eq!(g.member_count, 3);
            assert_eq!(g.member_ids.len(), 3);
            let positions: Vec<Vec2> = g
                .member_ids
                .iter()
                .map(|id| world.humans.iter().find(|h| h.id == *id).unwrap().position)
                .collect();
            let (centroid, radius) = group_centroid_radius(&positions).unwrap();
            assert!(g.centroid.dist(centroid) < 1e-9);
            assert!((g.radius - radius).abs() < 1e-9);
            if g.kind == GroupKind::Dynamic {
                let leader = g.leader_id.expect("dynamic group needs a leader");
                assert!(g.member_ids.contains(&leader));
            } else {
                assert!(g.leader_id.is_none());
            }
        }
    }

    #[test]
    fn no_initial_overlaps_or_intrusions() {
        let config = ScenarioConfig::default();
        for seed in 0..20 {
            let world = generate_scenario(&config, seed).unwrap();
            let mut all: Vec<(Vec2, f64, usize)> =
                vec![(world.robot.position, world.robot.radius, world.robot.id)];
            for h in &world.humans {
                all.push((h.position, h.radius, h.id));
            }
            for i in 0..all.len() {
                for j in (i + 1)..all.len() {
                    let d = all[i].0.dist(all[j].0);
                    assert!(
                        d >= all[i].1 + all[j].1 + PLACEMENT_MARGIN - 1e-9,
                        "agents {} and {} overlap at seed {seed}",
                        all[i].2,
                        all[j].2
                    );
                }
            }
            for g in &world.groups {
                for h in &world.humans {
                    if g.member_ids.binary_search(&h.id).is_err() {
                        assert!(
                            h.position.dist(g.centroid) >= g.radius,
                            "agent {} starts inside foreign group {} at seed {seed}",
                            h.id,
                            g.group_id
                        );
                    }
                }
                assert!(world.robot.position.dist(g.centroid) >= g.radius);
            }
        }
    }

    #[test]
    fn group_members_form_connected_chain() {
        let config = ScenarioConfig::default();
        for seed in 0..20 {
            let world = generate_scenario(&config, seed).unwrap();
            for g in &world.groups {
                let positions: Vec<Vec2> = g
                    .member_ids
                    .iter()
                    .map(|id| world.humans.iter().find(|h| h.id == *id).unwrap().position)
                    .collect();
                // Connected components under the chain distance.
                let n = positions.len();
                let mut reached = vec![false; n];
                let mut stack = vec![0usize];
                reached[0] = true;
                while let Some(i) = stack.pop() {
                    for j in 0..n {
                        if !reached[j] && positions[i].dist(positions[j]) <= MEMBER_CHAIN_DIST {
                            reached[j] = true;
                            stack.push(j);
                        }
                    }
                }
                assert!(
                    reached.iter().all(|r| *r),
                    "group {} not chain-connected at seed {seed}",
                    g.group_id
                );
            }
        }
    }

    #[test]
    fn crowded_arena_reports_placement_failure() {
        let config = ScenarioConfig {
            arena_half_extent: 1.2,
            n_individuals: 60,
            n_groups: 0,
            ..Default::default()
        };
        let err = generate_scenario(&config, 3).unwrap_err();
        assert!(matches!(err, SimError::PlacementFailure { .. }));

        let tiny = ScenarioConfig {
            arena_half_extent: 2.0,
            ..Default::default()
        };
        assert!(matches!(
            generate_scenario(&tiny, 3),
            Err(SimError::InvalidConfig(_))
        ));
    }
}
