//! Quasi-static contact simulation: the robot chain moves by incremental
//! joint actions; fingertip (and tool) spheres that press into the movable
//! link drive its joint by penetration resolution. No inertia, no friction —
//! the object moves exactly as far as contact geometry forces it.

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ArticulatedObject, ChainFk, KinematicChain, Scene};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("joint position {value} of joint {index} outside limits [{lo}, {hi}]")]
    JointOutOfLimits {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("action has {got} components, robot has {expected} joints")]
    DofMismatch { got: usize, expected: usize },
    #[error("action component {index} = {value} exceeds the bound {bound}")]
    ActionOutOfBounds {
        index: usize,
        value: f64,
        bound: f64,
    },
}

/// Per-step bound on each joint increment (radians or meters).
pub const ACTION_BOUND: f64 = 0.05;
/// Residual fingertip-movable penetration allowed after resolution.
pub const CONTACT_TOL: f64 = 1e-4;
const RESOLUTION_ITERS: usize = 32;
const RESOLUTION_DS_TOL: f64 = 1e-5;
/// Effector travel per contact substep; keeps thin panels from being tunneled
/// through in a single increment.
const SUBSTEP_TRAVEL: f64 = 0.01;
const MAX_SUBSTEPS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactFlag {
    None,
    FingertipOnMovable,
    UnexpectedCollision,
}

/// Dynamic state: robot joint positions, object joint state, the contact flag
/// of the last step, the step counter, and the realized per-step joint
/// velocity (finite difference with Δt = 1) used by the regularization reward.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub q: Vec<f64>,
    pub s: f64,
    pub contact: ContactFlag,
    pub t: u64,
    pub last_vel: Vec<f64>,
}

impl SimState {
    /// State at the scene's home configuration and stored joint state.
    pub fn initial(scene: &Scene) -> Self {
        Self {
            q: scene.home_q.clone(),
            s: scene.object.joint.state,
            contact: ContactFlag::None,
            t: 0,
            last_vel: vec![0.0; scene.robot.dof()],
        }
    }
}

/// Incremental joint-position command, each component within ±0.05.
#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    pub delta: Vec<f64>,
}

impl Action {
    pub fn new(delta: Vec<f64>) -> Result<Self, SimError> {
        for (i, &v) in delta.iter().enumerate() {
            if v.abs() > ACTION_BOUND + 1e-12 {
                return Err(SimError::ActionOutOfBounds {
                    index: i,
                    value: v,
                    bound: ACTION_BOUND,
                });
            }
        }
        Ok(Self { delta })
    }

    /// Clamps every component into the bound instead of failing.
    pub fn clamped(delta: Vec<f64>) -> Self {
        Self {
            delta: delta
                .into_iter()
                .map(|v| v.clamp(-ACTION_BOUND, ACTION_BOUND))
                .collect(),
        }
    }

    pub fn zero(dof: usize) -> Self {
        Self {
            delta: vec![0.0; dof],
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ContactReport {
    pub flag: ContactFlag,
    pub witness: Point3<f64>,
    pub penetration: f64,
}

/// Serial-chain forward kinematics with joint-limit checking.
pub fn forward_kinematics(
    chain: &KinematicChain,
    base: &crate::geom::Pose,
    q: &[f64],
) -> Result<ChainFk, SimError> {
    if q.len() != chain.joints.len() {
        return Err(SimError::DofMismatch {
            got: q.len(),
            expected: chain.joints.len(),
        });
    }
    for (i, (j, &v)) in chain.joints.iter().zip(q).enumerate() {
        if v < j.limits[0] - 1e-12 || v > j.limits[1] + 1e-12 {
            return Err(SimError::JointOutOfLimits {
                index: i,
                value: v,
                lo: j.limits[0],
                hi: j.limits[1],
            });
        }
    }
    Ok(chain.fk(base, q))
}

/// Deepest gap (signed clearance minus radius) of the effector spheres
/// against the movable link at state `s`, with witness point and outward
/// normal at the deepest sphere.
fn movable_gap(
    object: &ArticulatedObject,
    s: f64,
    spheres: &[(Point3<f64>, f64)],
) -> (f64, Point3<f64>, Vector3<f64>) {
    let parent = object.movable_parent_world(s);
    let mut gap = f64::INFINITY;
    let mut witness = Point3::origin();
    let mut normal = Vector3::z();
    for (c, r) in spheres {
        let hit = object.movable.surface_query(&parent, c);
        let g = hit.dist - r;
        if g < gap {
            gap = g;
            witness = hit.point;
            normal = hit.normal;
        }
    }
    (gap, witness, normal)
}

/// Deepest gap of the effector spheres against the base link and table.
fn obstacle_gap(scene: &Scene, spheres: &[(Point3<f64>, f64)]) -> (f64, Point3<f64>) {
    let base_parent = scene.object.base_parent_world();
    let mut gap = f64::INFINITY;
    let mut witness = Point3::origin();
    for (c, r) in spheres {
        let hit = scene.object.base.surface_query(&base_parent, c);
        let g = hit.dist - r;
        if g < gap {
            gap = g;
            witness = hit.point;
        }
        let table = (c.z - scene.table_height) - r;
        if table < gap {
            gap = table;
            witness = Point3::new(c.x, c.y, scene.table_height);
        }
    }
    (gap, witness)
}

/// Classifies the contact of the effector at a fixed configuration.
/// An unexpected collision (base or table) takes precedence over legitimate
/// fingertip-movable contact.
pub fn detect_contact(scene: &Scene, state: &SimState) -> ContactReport {
    let fk = scene.robot.fk(&scene.robot_base, &state.q);
    let spheres = scene.robot.effector_spheres(&fk);
    contact_of_spheres(scene, state.s, &spheres)
}

fn contact_of_spheres(
    scene: &Scene,
    s: f64,
    spheres: &[(Point3<f64>, f64)],
) -> ContactReport {
    let (obs_gap, obs_witness) = obstacle_gap(scene, spheres);
    let (mov_gap, mov_witness, _) = movable_gap(&scene.object, s, spheres);
    if obs_gap < -CONTACT_TOL {
        ContactReport {
            flag: ContactFlag::UnexpectedCollision,
            witness: obs_witness,
            penetration: -obs_gap,
        }
    } else if mov_gap <= CONTACT_TOL {
        ContactReport {
            flag: ContactFlag::FingertipOnMovable,
            witness: mov_witness,
            penetration: (-mov_gap).max(0.0),
        }
    } else {
        ContactReport {
            flag: ContactFlag::None,
            witness: mov_witness,
            penetration: 0.0,
        }
    }
}

/// Result of sweeping the effector along a path with quasi-static contact.
#[derive(Debug, Clone, Copy)]
pub struct SweepResult {
    /// Object state after resolution.
    pub s: f64,
    /// Fraction of the commanded path actually reached (1.0 unless blocked).
    pub alpha: f64,
    /// Motion truncated because contact could not be resolved by joint motion.
    pub blocked: bool,
    /// Abort callback fired (obstacle contact during the sweep).
    pub aborted: bool,
}

/// Sweeps the effector spheres along `spheres_at(α)`, α ∈ [0, 1], resolving
/// penetration into the movable link at each substep by advancing the object
/// joint. Fixed-point resolution on the scalar state, robot motion truncated
/// when the push cannot be resolved (opposing direction or joint limit).
pub(crate) fn sweep_effector(
    object: &ArticulatedObject,
    s0: f64,
    travel: f64,
    spheres_at: &dyn Fn(f64) -> Vec<(Point3<f64>, f64)>,
    abort_if: Option<&dyn Fn(&[(Point3<f64>, f64)]) -> bool>,
) -> SweepResult {
    let n_sub = ((travel / SUBSTEP_TRAVEL).ceil() as usize).clamp(1, MAX_SUBSTEPS);
    let mut s = s0;
    let mut alpha_reached = 0.0;
    for k in 1..=n_sub {
        let alpha = k as f64 / n_sub as f64;
        let spheres = spheres_at(alpha);
        let (s_new, resolved) = resolve_joint(object, s, &spheres);
        s = s_new;
        if !resolved {
            // Truncate this substep: largest feasible fraction at the resolved s.
            let a0 = alpha_reached;
            let mut lo = 0.0;
            let mut hi = 1.0;
            for _ in 0..48 {
                let mid = 0.5 * (lo + hi);
                let a = a0 + (alpha - a0) * mid;
                let (gap, _, _) = movable_gap(object, s, &spheres_at(a));
                if gap >= -CONTACT_TOL {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            alpha_reached = a0 + (alpha - a0) * lo;
            return SweepResult {
                s,
                alpha: alpha_reached,
                blocked: true,
                aborted: false,
            };
        }
        alpha_reached = alpha;
        if let Some(check) = abort_if {
            if check(&spheres) {
                return SweepResult {
                    s,
                    alpha: alpha_reached,
                    blocked: false,
                    aborted: true,
                };
            }
        }
    }
    SweepResult {
        s,
        alpha: 1.0,
        blocked: false,
        aborted: false,
    }
}

/// Advances the object joint until the effector's penetration is within
/// tolerance. Returns the new state and whether resolution succeeded.
fn resolve_joint(
    object: &ArticulatedObject,
    s0: f64,
    spheres: &[(Point3<f64>, f64)],
) -> (f64, bool) {
    let (gap, _, _) = movable_gap(object, s0, spheres);
    if gap >= -CONTACT_TOL {
        return (s0, true);
    }
    let mut s = s0;
    for _ in 0..RESOLUTION_ITERS {
        let (gap, witness, normal) = movable_gap(object, s, spheres);
        if gap >= -CONTACT_TOL {
            return (s, true);
        }
        let v = object.surface_velocity(&witness);
        let vn = v.dot(&normal);
        if vn.abs() < 1e-7 {
            return (s, false);
        }
        // Newton step toward gap = -tol/2; gap(s+ds) ≈ gap - ds·(v·n).
        // Guarded: on curved geometry a large step can jump far past the
        // contact; halve until the landing point is not in free space
        // beyond the tolerance band, so the object moves only as far as
        // the push forces it.
        let mut ds = ((gap + CONTACT_TOL / 2.0) / vn).clamp(-0.5, 0.5);
        let mut s_next = object.joint.clamp(s + ds);
        for _ in 0..12 {
            let (gap_try, _, _) = movable_gap(object, s_next, spheres);
            if gap_try <= CONTACT_TOL {
                break;
            }
            ds *= 0.5;
            s_next = object.joint.clamp(s + ds);
        }
        if (s_next - s).abs() < RESOLUTION_DS_TOL {
            s = s_next;
            let (gap, _, _) = movable_gap(object, s, spheres);
            return (s, gap >= -CONTACT_TOL);
        }
        s = s_next;
    }
    let (gap, _, _) = movable_gap(object, s, spheres);
    (s, gap >= -CONTACT_TOL)
}

fn lerp_q(a: &[f64], b: &[f64], alpha: f64) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x + (y - x) * alpha)
        .collect()
}

/// One quasi-static step: clamp the action, move the chain toward the target
/// configuration, resolve any push into the movable link, flag contacts.
/// Total and deterministic; limit violations clamp instead of failing.
pub fn step(scene: &Scene, state: &SimState, action: &Action) -> SimState {
    let chain = &scene.robot;
    let delta: Vec<f64> = action
        .delta
        .iter()
        .map(|v| v.clamp(-ACTION_BOUND, ACTION_BOUND))
        .collect();
    assert_eq!(delta.len(), chain.dof(), "action dof mismatch");

    let q0 = state.q.clone();
    let mut q_target: Vec<f64> = q0.iter().zip(&delta).map(|(q, d)| q + d).collect();
    chain.clamp_q(&mut q_target);

    let fk0 = chain.fk(&scene.robot_base, &q0);
    let fk1 = chain.fk(&scene.robot_base, &q_target);
    let s0_spheres = chain.effector_spheres(&fk0);
    let s1_spheres = chain.effector_spheres(&fk1);
    let travel = s0_spheres
        .iter()
        .zip(&s1_spheres)
        .map(|((a, _), (b, _))| (a - b).norm())
        .fold(0.0f64, f64::max);

    let spheres_at = |alpha: f64| {
        let q = lerp_q(&q0, &q_target, alpha);
        let fk = chain.fk(&scene.robot_base, &q);
        chain.effector_spheres(&fk)
    };
    let sweep = sweep_effector(&scene.object, state.s, travel, &spheres_at, None);
    let q_final = lerp_q(&q0, &q_target, sweep.alpha);

    let fk_final = chain.fk(&scene.robot_base, &q_final);
    let spheres_final = chain.effector_spheres(&fk_final);
    let report = contact_of_spheres(scene, sweep.s, &spheres_final);

    let last_vel: Vec<f64> = q_final.iter().zip(&q0).map(|(a, b)| a - b).collect();
    SimState {
        q: q_final,
        s: sweep.s,
        contact: report.flag,
        t: state.t + 1,
        last_vel,
    }
}

/// Sweeps a single flying sphere from `c_from` to `c_to` against the scene:
/// the affordance oracle's one-step rollout primitive. Obstacle contact
/// aborts the sweep.
pub fn push_sphere(
    scene: &Scene,
    s0: f64,
    c_from: Point3<f64>,
    c_to: Point3<f64>,
    radius: f64,
) -> SweepResult {
    let travel = (c_to - c_from).norm();
    let spheres_at = |alpha: f64| vec![(c_from + (c_to - c_from) * alpha, radius)];
    let abort = |spheres: &[(Point3<f64>, f64)]| {
        let (gap, _) = obstacle_gap(scene, spheres);
        gap < -CONTACT_TOL
    };
    sweep_effector(&scene.object, s0, travel, &spheres_at, Some(&abort))
}

/// Whether a flying sphere at `c` penetrates the base link or table.
pub fn sphere_hits_obstacles(scene: &Scene, c: &Point3<f64>, radius: f64) -> bool {
    let (gap, _) = obstacle_gap(scene, &[(*c, radius)]);
    gap < -CONTACT_TOL
}

/// Whether a flying sphere at `c` penetrates the movable link deeper than the
/// contact tolerance.
pub fn sphere_hits_movable(scene: &Scene, s: f64, c: &Point3<f64>, radius: f64) -> bool {
    let (gap, _, _) = movable_gap(&scene.object, s, &[(*c, radius)]);
    gap < -CONTACT_TOL
}
