//! Interactive-perception stage: score contact points and push directions by
//! one-step simulated rollouts against the hidden ground-truth scene (the
//! same signal an affordance network is trained on), rank them, filter by
//! robot executability, and emit the single push to perform.
//!
//! Information-flow contract: this module may query the ground-truth scene;
//! everything downstream of the push (twin construction, planning) receives
//! only point clouds and the executed plan.

pub mod ik;

use nalgebra::{Point3, Unit, UnitVector3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Scene;
use crate::percept::PointCloud;
use crate::seeds;
use crate::sim::{self, Action, ContactFlag, SimState, ACTION_BOUND};

#[derive(Debug, Error)]
pub enum AffordanceError {
    #[error("observed cloud is empty")]
    EmptyCloud,
    #[error("no executable action among the ranked proposals")]
    NoExecutableAction,
    #[error(transparent)]
    Percept(#[from] crate::percept::PerceptError),
}

/// Push primitive vocabulary: frontal pushes for drawers and laptops,
/// leftward horizontal pushes for faucets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Primitive {
    Push,
    PushLeft,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AffordanceConfig {
    /// Scored points, farthest-point sampled from the observed cloud.
    pub point_budget: usize,
    /// Push directions sampled per point.
    pub n_dirs: usize,
    /// Candidate points tried by executability filtering.
    pub n_p: usize,
    /// Proposals kept per point.
    pub n_a: usize,
    /// Stroke used by scoring rollouts (one action bound).
    pub scoring_stroke: f64,
    /// Stroke of the executed interaction push.
    pub push_stroke: f64,
    /// Fingertip standoff of the pre-contact waypoint.
    pub standoff: f64,
}

impl Default for AffordanceConfig {
    fn default() -> Self {
        Self {
            point_budget: 256,
            n_dirs: 8,
            n_p: 10,
            n_a: 10,
            scoring_stroke: ACTION_BOUND,
            push_stroke: 0.06,
            standoff: 0.03,
        }
    }
}

/// Contact point with its actionability score (the best one-step |Δs|
/// reachable from it).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScoredPoint {
    pub point: [f64; 3],
    pub actionability: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ActionProposal {
    pub point: [f64; 3],
    /// Direction the fingertip approaches along (the inward surface normal).
    pub approach: [f64; 3],
    /// Push direction.
    pub push: [f64; 3],
    pub actionability: f64,
    /// One-step rollout |Δs|; zero when the rollout collides.
    pub success: f64,
}

/// The chosen interaction: fingertip waypoints and their IK solutions.
#[derive(Debug, Clone)]
pub struct PushPlan {
    pub proposal: ActionProposal,
    /// Pre-contact, contact, and post-push fingertip centers.
    pub fingertip_waypoints: [Point3<f64>; 3],
    pub joint_waypoints: [Vec<f64>; 3],
}

/// Scores candidate interactions by rolling them out in the hidden
/// ground-truth scene.
pub struct AffordanceOracle<'a> {
    pub scene: &'a Scene,
    pub cfg: AffordanceConfig,
    pub seed: u64,
}

impl<'a> AffordanceOracle<'a> {
    pub fn new(scene: &'a Scene, cfg: AffordanceConfig, seed: u64) -> Self {
        Self { scene, cfg, seed }
    }

    /// Push-direction fan for a primitive. One shared fan per seed: scores
    /// stay invariant under scene translation and grow monotonically with
    /// `n_dirs` (prefix-nested sequential sampling).
    fn direction_fan(&self, primitive: Primitive, n_dirs: usize) -> Vec<UnitVector3<f64>> {
        let mut rng = seeds::rng(self.seed, &[0xd1f5, primitive as u64]);
        let mut dirs = Vec::with_capacity(n_dirs);
        while dirs.len() < n_dirs {
            match primitive {
                Primitive::Push => {
                    // Uniform on the sphere.
                    let z: f64 = rng.gen_range(-1.0..1.0);
                    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                    let r = (1.0 - z * z).sqrt();
                    dirs.push(Unit::new_normalize(Vector3::new(
                        r * phi.cos(),
                        r * phi.sin(),
                        z,
                    )));
                }
                Primitive::PushLeft => {
                    // Horizontal directions with a leftward (-y) component.
                    let phi: f64 = rng.gen_range(std::f64::consts::PI..std::f64::consts::TAU);
                    dirs.push(Unit::new_normalize(Vector3::new(phi.cos(), phi.sin(), 0.0)));
                }
            }
        }
        dirs
    }

    /// Outward surface normal of the scene geometry nearest to `p`.
    fn surface_normal(&self, p: &Point3<f64>) -> UnitVector3<f64> {
        let s = self.scene.object.joint.state;
        let base = self
            .scene
            .object
            .base
            .surface_query(&self.scene.object.base_parent_world(), p);
        let movable = self
            .scene
            .object
            .movable
            .surface_query(&self.scene.object.movable_parent_world(s), p);
        let hit = if base.dist.abs() <= movable.dist.abs() {
            base
        } else {
            movable
        };
        Unit::new_normalize(hit.normal)
    }

    /// One-step rollout of a push at `p` along `dir`: |Δs|, or 0 on an
    /// unreachable approach or a collision during the stroke.
    fn rollout(&self, p: &Point3<f64>, dir: &UnitVector3<f64>, stroke: f64) -> f64 {
        let r = self.scene.robot.fingertip.radius;
        let normal = self.surface_normal(p);
        let c0 = p + normal.into_inner() * r;
        let s0 = self.scene.object.joint.state;
        if sim::sphere_hits_obstacles(self.scene, &c0, r)
            || sim::sphere_hits_movable(self.scene, s0, &c0, r)
        {
            return 0.0;
        }
        let c1 = c0 + dir.into_inner() * stroke;
        let out = sim::push_sphere(self.scene, s0, c0, c1, r);
        if out.aborted {
            return 0.0;
        }
        (out.s - s0).abs()
    }

    /// Actionability over the observed cloud: for each of (at most)
    /// `point_budget` farthest-point-sampled points, the best rollout |Δs|
    /// over the direction fan. Order follows the sampling order.
    pub fn score_points(
        &self,
        observed: &PointCloud,
        primitive: Primitive,
    ) -> Result<Vec<ScoredPoint>, AffordanceError> {
        if observed.is_empty() {
            return Err(AffordanceError::EmptyCloud);
        }
        let budget = self.cfg.point_budget.min(observed.len());
        let idx = crate::percept::downsample_indices(
            observed,
            budget,
            seeds::derive(self.seed, &[0xaff0]),
        )?;
        let dirs = self.direction_fan(primitive, self.cfg.n_dirs);
        let scored = idx
            .iter()
            .map(|&i| {
                let p = observed.points[i];
                let a = dirs
                    .iter()
                    .map(|d| self.rollout(&p, d, self.cfg.scoring_stroke))
                    .fold(0.0f64, f64::max);
                ScoredPoint {
                    point: [p.x, p.y, p.z],
                    actionability: a,
                }
            })
            .collect();
        Ok(scored)
    }

    /// Ranks (approach, push) pairs at one point by their rollout |Δs|,
    /// highest first; collisions score zero. The candidates are exactly the
    /// scoring fan, so the top proposal's success equals the point's
    /// actionability.
    pub fn propose_actions(
        &self,
        point: &Point3<f64>,
        primitive: Primitive,
        n_a: usize,
    ) -> Vec<ActionProposal> {
        let dirs = self.direction_fan(primitive, self.cfg.n_dirs);
        let normal = self.surface_normal(point);
        let approach = -normal.into_inner();
        let mut proposals: Vec<ActionProposal> = dirs
            .iter()
            .map(|d| ActionProposal {
                point: [point.x, point.y, point.z],
                approach: [approach.x, approach.y, approach.z],
                push: [d.x, d.y, d.z],
                actionability: 0.0,
                success: self.rollout(point, d, self.cfg.scoring_stroke),
            })
            .collect();
        proposals.sort_by(|a, b| b.success.partial_cmp(&a.success).unwrap());
        proposals.truncate(n_a);
        let best = proposals.first().map(|p| p.success).unwrap_or(0.0);
        for p in proposals.iter_mut() {
            p.actionability = best;
        }
        proposals
    }

    /// Walks points by descending actionability and proposals by descending
    /// success until one passes the executability check: IK solutions for all
    /// three waypoints and a collision-free pre-contact approach.
    pub fn select_executable(
        &self,
        scored: &[ScoredPoint],
        primitive: Primitive,
    ) -> Result<PushPlan, AffordanceError> {
        let mut order: Vec<usize> = (0..scored.len()).collect();
        order.sort_by(|&a, &b| {
            scored[b]
                .actionability
                .partial_cmp(&scored[a].actionability)
                .unwrap()
                .then(a.cmp(&b))
        });
        let r = self.scene.robot.fingertip.radius;
        for &pi in order.iter().take(self.cfg.n_p) {
            let sp = &scored[pi];
            if sp.actionability <= 0.0 {
                continue;
            }
            let point = Point3::new(sp.point[0], sp.point[1], sp.point[2]);
            let normal = self.surface_normal(&point);
            for proposal in self.propose_actions(&point, primitive, self.cfg.n_a) {
                if proposal.success <= 0.0 {
                    continue;
                }
                let push = Vector3::new(proposal.push[0], proposal.push[1], proposal.push[2]);
                let contact = point + normal.into_inner() * r;
                let pre = point + normal.into_inner() * (r + self.cfg.standoff);
                let post = contact + push * self.cfg.push_stroke;
                if let Some(plan) = self.try_plan(proposal, pre, contact, post) {
                    return Ok(plan);
                }
            }
        }
        Err(AffordanceError::NoExecutableAction)
    }

    fn try_plan(
        &self,
        proposal: ActionProposal,
        pre: Point3<f64>,
        contact: Point3<f64>,
        post: Point3<f64>,
    ) -> Option<PushPlan> {
        let chain = &self.scene.robot;
        let base = &self.scene.robot_base;
        let q_pre = ik::solve_position_ik(chain, base, &pre, &self.scene.home_q, 200, 1e-3)?;
        let q_contact = ik::solve_position_ik(chain, base, &contact, &q_pre, 200, 1e-3)?;
        let q_post = ik::solve_position_ik(chain, base, &post, &q_contact, 200, 1e-3)?;

        // Pre-contact approach must be collision-free (obstacles and movable).
        let r = chain.fingertip.radius;
        let s0 = self.scene.object.joint.state;
        let seg = contact - pre;
        let n_samples = ((seg.norm() / 0.005).ceil() as usize).max(1);
        for k in 0..=n_samples {
            let c = pre + seg * (k as f64 / n_samples as f64);
            if sim::sphere_hits_obstacles(self.scene, &c, r)
                || sim::sphere_hits_movable(self.scene, s0, &c, r)
            {
                return None;
            }
        }
        Some(PushPlan {
            proposal,
            fingertip_waypoints: [pre, contact, post],
            joint_waypoints: [q_pre, q_contact, q_post],
        })
    }
}

/// Outcome of executing a push plan on the ground-truth world.
#[derive(Debug, Clone)]
pub struct PushOutcome {
    pub state: SimState,
    /// Joint displacement `s₁ − s₀` the interaction produced.
    pub delta_s: f64,
    /// Execution stopped early on an unexpected collision.
    pub aborted: bool,
}

/// Steps the simulator along the plan's joint-space waypoints in
/// action-bound-sized increments. An unexpected collision aborts with the
/// partial state; the episode may still continue to reconstruction.
pub fn execute_push(scene: &Scene, state: &SimState, plan: &PushPlan) -> PushOutcome {
    let mut current = state.clone();
    let s0 = state.s;
    for waypoint in &plan.joint_waypoints {
        loop {
            let delta: Vec<f64> = waypoint
                .iter()
                .zip(&current.q)
                .map(|(w, q)| w - q)
                .collect();
            let max_step = delta.iter().map(|d| d.abs()).fold(0.0f64, f64::max);
            if max_step < 1e-9 {
                break;
            }
            let scale = (ACTION_BOUND / max_step).min(1.0);
            let action = Action::clamped(delta.iter().map(|d| d * scale).collect());
            current = sim::step(scene, &current, &action);
            if current.contact == ContactFlag::UnexpectedCollision {
                return PushOutcome {
                    delta_s: current.s - s0,
                    state: current,
                    aborted: true,
                };
            }
            if scale >= 1.0 - 1e-12 {
                break;
            }
        }
    }
    PushOutcome {
        delta_s: current.s - s0,
        state: current,
        aborted: false,
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::geom::Pose;
    use crate::model::{
        ArticulatedObject, CameraRanges, JointKind, JointSpec, RigidGeometry, Scene, SensorNoise,
    };
    use crate::percept::Frame;

    /// Faucet: octagonal-prism base hull, handle bar on top, vertical axis.
    pub(crate) fn faucet_scene() -> Scene {
        let mut base_pts = Vec::new();
        for i in 0..8 {
            let a = i as f64 / 8.0 * std::f64::consts::TAU;
            base_pts.push(Point3::new(0.04 * a.cos(), 0.04 * a.sin(), 0.0));
            base_pts.push(Point3::new(0.04 * a.cos(), 0.04 * a.sin(), 0.12));
        }
        let object = ArticulatedObject {
            base: RigidGeometry::hull_of(&base_pts).unwrap(),
            movable: RigidGeometry::boxed(
                Point3::new(0.09, 0.0, 0.14),
                Vector3::new(0.07, 0.012, 0.012),
                Pose::identity(),
            ),
            joint: JointSpec::new(
                JointKind::Revolute,
                Vector3::z(),
                Point3::origin(),
                [-2.5, 2.5],
                0.0,
            )
            .unwrap(),
            pose: Pose::translation(0.45, 0.0, 0.0),
        };
        Scene {
            name: "faucet-test".into(),
            object,
            robot: crate::sim::tests::gantry(),
            robot_base: Pose::identity(),
            home_q: vec![0.0, 0.0, 0.4, 0.0],
            table_height: 0.0,
            camera: CameraRanges {
                look_at: [0.45, 0.0, 0.1],
                ..CameraRanges::default()
            },
            noise: SensorNoise::default(),
        }
    }

    fn oracle_scene_cloud(scene: &Scene) -> PointCloud {
        let cam = crate::percept::sample_camera_from_ranges(&scene.camera, 11).unwrap();
        let noise = crate::percept::NoiseConfig::none(1);
        let s = scene.object.joint.state;
        let cloud = crate::percept::render_point_cloud(scene, s, &cam, &noise).unwrap();
        let base = scene.object.base.aabb(&scene.object.base_parent_world());
        let mov = scene
            .object
            .movable
            .aabb(&scene.object.movable_parent_world(s));
        let bounds = crate::geom::Aabb::new(
            Point3::new(
                base.min.x.min(mov.min.x) - 0.05,
                base.min.y.min(mov.min.y) - 0.05,
                scene.table_height + 0.001,
            ),
            Point3::new(
                base.max.x.max(mov.max.x) + 0.05,
                base.max.y.max(mov.max.y) + 0.05,
                base.max.z.max(mov.max.z) + 0.05,
            ),
        );
        let cropped = crate::percept::crop_bbox(&cloud, &bounds).unwrap();
        crate::percept::downsample(&cropped, 2000.min(cropped.len()), 5).unwrap()
    }

    #[test]
    fn base_points_score_zero() {
        let scene = faucet_scene();
        let oracle = AffordanceOracle::new(&scene, AffordanceConfig::default(), 3);
        // A point on the immobile base hull, mid-height on the +x side.
        let p = Point3::new(0.45 + 0.04, 0.0, 0.06);
        let dirs = oracle.direction_fan(Primitive::PushLeft, 8);
        let best = dirs
            .iter()
            .map(|d| oracle.rollout(&p, d, 0.05))
            .fold(0.0f64, f64::max);
        assert_eq!(best, 0.0);
    }

    #[test]
    fn drawer_front_face_is_actionable_when_open() {
        let scene = crate::sim::tests::drawer_scene();
        let oracle = AffordanceOracle::new(&scene, AffordanceConfig::default(), 3);
        // Point on the tray front face (s = 0.1 > lo).
        let p = Point3::new(0.5 - 0.04 + 0.1 + 0.02, 0.0, 0.10);
        let dirs = oracle.direction_fan(Primitive::Push, 8);
        let best = dirs
            .iter()
            .map(|d| oracle.rollout(&p, d, 0.05))
            .fold(0.0f64, f64::max);
        assert!(best > 0.0, "open drawer front must be actionable");
    }

    #[test]
    fn downward_face_next_to_table_is_unreachable() {
        let scene = crate::sim::tests::drawer_scene();
        let oracle = AffordanceOracle::new(&scene, AffordanceConfig::default(), 3);
        // Bottom face of the tray: the approach sphere lands in the table.
        let p = Point3::new(0.5 - 0.04 + 0.1, 0.0, 0.02);
        let proposals = oracle.propose_actions(&p, Primitive::Push, 10);
        assert!(proposals.iter().all(|pr| pr.success == 0.0));
    }

    #[test]
    fn propose_is_consistent_with_score_and_sorted() {
        let scene = crate::sim::tests::drawer_scene();
        let oracle = AffordanceOracle::new(&scene, AffordanceConfig::default(), 7);
        let cloud = oracle_scene_cloud(&scene);
        let scored = oracle.score_points(&cloud, Primitive::Push).unwrap();
        let best = scored
            .iter()
            .max_by(|a, b| a.actionability.partial_cmp(&b.actionability).unwrap())
            .unwrap();
        assert!(best.actionability > 0.0);
        let p = Point3::new(best.point[0], best.point[1], best.point[2]);
        let proposals = oracle.propose_actions(&p, Primitive::Push, 1);
        assert_eq!(proposals.len(), 1);
        assert_eq!(proposals[0].success, best.actionability);

        let ten = oracle.propose_actions(&p, Primitive::Push, 10);
        for w in ten.windows(2) {
            assert!(w[0].success >= w[1].success, "proposals must sort descending");
        }
    }

    #[test]
    fn actionability_larger_with_more_directions() {
        let scene = crate::sim::tests::drawer_scene();
        let oracle = AffordanceOracle::new(&scene, AffordanceConfig::default(), 5);
        let p = Point3::new(0.5 - 0.04 + 0.1 + 0.02, 0.02, 0.12);
        let a_small: f64 = oracle
            .direction_fan(Primitive::Push, 4)
            .iter()
            .map(|d| oracle.rollout(&p, d, 0.05))
            .fold(0.0, f64::max);
        let a_large: f64 = oracle
            .direction_fan(Primitive::Push, 16)
            .iter()
            .map(|d| oracle.rollout(&p, d, 0.05))
            .fold(0.0, f64::max);
        assert!(a_large >= a_small, "a_p must be monotone in n_dirs");
    }

    #[test]
    fn scores_invariant_under_scene_translation() {
        let scene = faucet_scene();
        let oracle = AffordanceOracle::new(&scene, AffordanceConfig::default(), 9);
        let cloud = oracle_scene_cloud(&scene);
        let scored = oracle.score_points(&cloud, Primitive::PushLeft).unwrap();

        // Shift everything horizontally by the same offset.
        let offset = Vector3::new(0.3, -0.2, 0.0);
        let shift = Pose::translation(offset.x, offset.y, offset.z);
        let mut shifted_scene = scene.clone();
        shifted_scene.object.pose = shift * shifted_scene.object.pose;
        shifted_scene.robot_base = shift * shifted_scene.robot_base;
        let shifted_cloud = PointCloud::new(
            cloud.points.iter().map(|p| p + offset).collect(),
            Frame::World,
        );
        let oracle2 = AffordanceOracle::new(&shifted_scene, AffordanceConfig::default(), 9);
        let scored2 = oracle2
            .score_points(&shifted_cloud, Primitive::PushLeft)
            .unwrap();
        assert_eq!(scored.len(), scored2.len());
        for (a, b) in scored.iter().zip(&scored2) {
            // The algorithm has no absolute-position dependence, but the
            // contact resolution only converges into a tolerance band; for
            // near-axis revolute contacts that band is amplified by the
            // inverse lever arm, so compare with a relative tolerance.
            assert!(
                (a.actionability - b.actionability).abs()
                    < 2e-5 + 0.01 * a.actionability.abs(),
                "{} vs {}",
                a.actionability,
                b.actionability
            );
        }
    }

    #[test]
    fn push_plan_executes_and_moves_drawer() {
        let scene = crate::sim::tests::drawer_scene();
        let oracle = AffordanceOracle::new(&scene, AffordanceConfig::default(), 13);
        let cloud = oracle_scene_cloud(&scene);
        let scored = oracle.score_points(&cloud, Primitive::Push).unwrap();
        let plan = oracle.select_executable(&scored, Primitive::Push).unwrap();
        for wp in &plan.joint_waypoints {
            assert!(scene.robot.within_limits(wp));
        }
        let state = SimState::initial(&scene);
        let out = execute_push(&scene, &state, &plan);
        assert!(out.delta_s.abs() > 0.0, "the push must move the joint");
    }

    #[test]
    fn zero_length_push_changes_nothing() {
        let scene = crate::sim::tests::drawer_scene();
        let cfg = AffordanceConfig {
            push_stroke: 0.0,
            ..AffordanceConfig::default()
        };
        let oracle = AffordanceOracle::new(&scene, cfg, 13);
        let cloud = oracle_scene_cloud(&scene);
        let scored = oracle.score_points(&cloud, Primitive::Push).unwrap();
        let plan = oracle.select_executable(&scored, Primitive::Push).unwrap();
        // Execute only the final (contact -> post) leg of the plan: with a
        // zero-length stroke the two coincide, so nothing moves.
        let state = SimState {
            q: plan.joint_waypoints[1].clone(),
            s: scene.object.joint.state,
            contact: ContactFlag::None,
            t: 0,
            last_vel: vec![0.0; 4],
        };
        let leg = PushPlan {
            proposal: plan.proposal,
            fingertip_waypoints: plan.fingertip_waypoints,
            joint_waypoints: [
                plan.joint_waypoints[1].clone(),
                plan.joint_waypoints[1].clone(),
                plan.joint_waypoints[2].clone(),
            ],
        };
        let out = execute_push(&scene, &state, &leg);
        assert!(
            out.delta_s.abs() < 1e-9,
            "zero-length stroke moved the joint by {}",
            out.delta_s
        );
    }

    #[test]
    fn unreachable_object_yields_no_executable_action() {
        let mut scene = crate::sim::tests::drawer_scene();
        scene.object.pose = Pose::translation(10.0, 0.0, 0.0);
        let oracle = AffordanceOracle::new(&scene, AffordanceConfig::default(), 3);
        let scored = vec![ScoredPoint {
            point: [10.46, 0.0, 0.1],
            actionability: 0.05,
        }];
        assert!(matches!(
            oracle.select_executable(&scored, Primitive::Push),
            Err(AffordanceError::NoExecutableAction)
        ));
    }
}
