//! Explicit model construction from two single-view point clouds: segment the
//! points that moved, register the moved segment, decompose the relative
//! motion into a screw, classify the joint, and assemble a simulatable twin.

pub mod kdtree;

use nalgebra::{Matrix3, Point3, Translation3, Unit, UnitQuaternion, UnitVector3, Vector3};
use thiserror::Error;

use crate::geom::{ConvexHull, Pose};
use crate::model::{
    ArticulatedObject, GeometryShape, JointKind, JointSpec, ModelError, RigidGeometry,
};
use crate::percept::PointCloud;
use kdtree::KdTree;

/// Default revolute/prismatic decision threshold (≈ 3°).
pub const DEFAULT_THETA_MIN: f64 = 3.0 * std::f64::consts::PI / 180.0;
/// Rotation angle below which a transform is treated as a pure translation
/// inside the screw decomposition (well below any classifiable rotation).
const THETA_EPS: f64 = 1e-8;
/// Twin joint limits: true limits are unobservable from two frames, so the
/// twin gets a wide symmetric range and relies on contact to stop.
pub const TWIN_PRISMATIC_LIMIT: f64 = 0.5;
pub const TWIN_REVOLUTE_LIMIT: f64 = std::f64::consts::PI;

const MIN_MOVED_POINTS: usize = 20;
const ICP_MAX_ITERS: usize = 100;
const ICP_CONVERGENCE: f64 = 1e-6;
const ICP_TRIM_FRACTION: f64 = 0.8;

#[derive(Debug, Error)]
pub enum TwinError {
    #[error("cloud too small: {got} points, need at least {need}")]
    CloudTooSmall { got: usize, need: usize },
    #[error("insufficient motion: only {moved0} / {moved1} moved points (need {need})")]
    InsufficientMotion {
        moved0: usize,
        moved1: usize,
        need: usize,
    },
    #[error("registration did not converge after {iters} iterations (residual {residual})")]
    RegistrationDiverged { iters: usize, residual: f64 },
    #[error("transform carries no detectable motion")]
    DegenerateMotion,
    #[error("segment has too few points to build geometry")]
    DegenerateGeometry,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Canonical screw form of a rigid transform: rotation by `angle ≥ 0` about
/// the line (axis_point, direction) plus `translation` along it.
#[derive(Debug, Clone, Copy)]
pub struct ScrewMotion {
    pub direction: UnitVector3<f64>,
    /// Point on the axis closest to the origin.
    pub axis_point: Point3<f64>,
    pub angle: f64,
    pub translation: f64,
}

impl ScrewMotion {
    /// Recomposes the rigid transform this screw represents.
    pub fn recompose(&self) -> Pose {
        let d = self.direction.into_inner();
        if self.angle < THETA_EPS {
            return Pose::from_parts(
                Translation3::from(d * self.translation),
                UnitQuaternion::identity(),
            );
        }
        let rot = UnitQuaternion::from_axis_angle(&self.direction, self.angle);
        let p = self.axis_point.coords;
        let trans = p - rot * p + d * self.translation;
        Pose::from_parts(Translation3::from(trans), rot)
    }
}

/// Per-cloud moved/static labels.
#[derive(Debug, Clone)]
pub struct SegmentationMask {
    pub moved0: Vec<bool>,
    pub moved1: Vec<bool>,
}

impl SegmentationMask {
    pub fn moved_count(&self) -> (usize, usize) {
        (
            self.moved0.iter().filter(|&&m| m).count(),
            self.moved1.iter().filter(|&&m| m).count(),
        )
    }
}

/// Labels a point "moved" when its nearest neighbor in the other cloud is
/// farther than `tau` (symmetric rule, exact nearest-neighbor queries).
pub fn segment_moving(
    cloud0: &PointCloud,
    cloud1: &PointCloud,
    tau: f64,
) -> Result<SegmentationMask, TwinError> {
    for c in [cloud0, cloud1] {
        if c.len() < 100 {
            return Err(TwinError::CloudTooSmall {
                got: c.len(),
                need: 100,
            });
        }
    }
    let tree0 = KdTree::build(&cloud0.points);
    let tree1 = KdTree::build(&cloud1.points);
    let moved0: Vec<bool> = cloud0
        .points
        .iter()
        .map(|p| tree1.nearest(p).1 > tau)
        .collect();
    let moved1: Vec<bool> = cloud1
        .points
        .iter()
        .map(|p| tree0.nearest(p).1 > tau)
        .collect();
    let mask = SegmentationMask { moved0, moved1 };
    let (n0, n1) = mask.moved_count();
    if n0 < MIN_MOVED_POINTS || n1 < MIN_MOVED_POINTS {
        return Err(TwinError::InsufficientMotion {
            moved0: n0,
            moved1: n1,
            need: MIN_MOVED_POINTS,
        });
    }
    Ok(mask)
}

/// Segmentation threshold rule: at least 5 mm, and at least twice the depth
/// noise so noise alone cannot mark points as moved.
pub fn default_tau(depth_sigma: f64) -> f64 {
    (2.0 * depth_sigma).max(0.005)
}

fn select_points(cloud: &PointCloud, mask: &[bool]) -> Vec<Point3<f64>> {
    cloud
        .points
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(p, _)| *p)
        .collect()
}

/// Kabsch/Umeyama: least-squares rigid transform mapping `src` onto `dst`.
fn fit_rigid(src: &[Point3<f64>], dst: &[Point3<f64>]) -> Pose {
    debug_assert_eq!(src.len(), dst.len());
    let n = src.len() as f64;
    let mut c_src = Vector3::zeros();
    let mut c_dst = Vector3::zeros();
    for (a, b) in src.iter().zip(dst) {
        c_src += a.coords;
        c_dst += b.coords;
    }
    c_src /= n;
    c_dst /= n;
    let mut h = Matrix3::zeros();
    for (a, b) in src.iter().zip(dst) {
        h += (a.coords - c_src) * (b.coords - c_dst).transpose();
    }
    let svd = h.svd(true, true);
    let u = svd.u.unwrap();
    let v_t = svd.v_t.unwrap();
    let mut r = v_t.transpose() * u.transpose();
    if r.determinant() < 0.0 {
        let mut flip = Matrix3::identity();
        flip[(2, 2)] = -1.0;
        r = v_t.transpose() * flip * u.transpose();
    }
    let rot = UnitQuaternion::from_matrix(&r);
    let t = c_dst - rot * c_src;
    Pose::from_parts(Translation3::from(t), rot)
}

/// Trimmed point-to-point ICP from identity: returns the transform mapping
/// `moved0` into `moved1`. Converges when the mean trimmed correspondence
/// distance improves by less than 1e-6 m.
pub fn register_segments(
    moved0: &[Point3<f64>],
    moved1: &[Point3<f64>],
) -> Result<Pose, TwinError> {
    if moved0.len() < MIN_MOVED_POINTS || moved1.len() < MIN_MOVED_POINTS {
        return Err(TwinError::InsufficientMotion {
            moved0: moved0.len(),
            moved1: moved1.len(),
            need: MIN_MOVED_POINTS,
        });
    }
    let tree = KdTree::build(moved1);
    let keep = ((moved0.len() as f64 * ICP_TRIM_FRACTION).ceil() as usize).max(3);
    let mut transform = Pose::identity();
    let mut prev_mean = f64::INFINITY;
    for _ in 0..ICP_MAX_ITERS {
        let current: Vec<Point3<f64>> = moved0
            .iter()
            .map(|p| transform.transform_point(p))
            .collect();
        // Correspondences, trimmed to the best fraction by distance.
        let mut pairs: Vec<(usize, usize, f64)> = current
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let (j, d) = tree.nearest(p);
                (i, j, d)
            })
            .collect();
        pairs.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap().then(a.0.cmp(&b.0)));
        pairs.truncate(keep);
        let mean: f64 = pairs.iter().map(|(_, _, d)| d).sum::<f64>() / keep as f64;
        if prev_mean - mean < ICP_CONVERGENCE {
            return Ok(transform);
        }
        prev_mean = mean;
        let src: Vec<Point3<f64>> = pairs.iter().map(|&(i, _, _)| current[i]).collect();
        let dst: Vec<Point3<f64>> = pairs.iter().map(|&(_, j, _)| moved1[j]).collect();
        let delta = fit_rigid(&src, &dst);
        transform = delta * transform;
    }
    Err(TwinError::RegistrationDiverged {
        iters: ICP_MAX_ITERS,
        residual: prev_mean,
    })
}

/// Decomposes a rigid transform into its canonical screw. Pure translations
/// take the translation direction as the axis; a transform with neither
/// rotation nor translation is a degenerate-motion error.
pub fn screw_decompose(t: &Pose) -> Result<ScrewMotion, TwinError> {
    let angle = t.rotation.angle();
    let trans = t.translation.vector;
    if angle < THETA_EPS {
        let len = trans.norm();
        if len < 1e-9 {
            return Err(TwinError::DegenerateMotion);
        }
        return Ok(ScrewMotion {
            direction: Unit::new_normalize(trans),
            axis_point: Point3::origin(),
            angle: 0.0,
            translation: len,
        });
    }
    // axis_angle canonicalizes the angle to [0, π] for us.
    let direction = t.rotation.axis().expect("angle > 0 has an axis");
    let d = direction.into_inner();
    let lambda = trans.dot(&d);
    let t_perp = trans - d * lambda;
    // Solve (I − R)p = t_perp with p ⊥ d:
    // p = ½·t_perp + ½·cot(θ/2)·(d × t_perp).
    let cot_half = (angle / 2.0).cos() / (angle / 2.0).sin();
    let axis_point = Point3::from(0.5 * t_perp + 0.5 * cot_half * d.cross(&t_perp));
    Ok(ScrewMotion {
        direction,
        axis_point,
        angle,
        translation: lambda,
    })
}

/// Joint parameters recovered from a screw by thresholding the rotation angle.
#[derive(Debug, Clone)]
pub struct JointClass {
    pub kind: JointKind,
    pub axis: UnitVector3<f64>,
    pub pivot: Point3<f64>,
    /// Displacement observed during the interaction, measured along the
    /// classified joint (radians or meters, non-negative by construction).
    pub observed_displacement: f64,
    /// Set when the screw sits near the classification threshold.
    pub low_confidence: bool,
}

/// `angle < theta_min` → prismatic along the full translation of the
/// recomposed transform; `angle ≥ theta_min` → revolute about the screw axis
/// (the axial translation of household joints is discarded).
pub fn classify_joint(screw: &ScrewMotion, theta_min: f64) -> JointClass {
    if screw.angle < theta_min {
        let full = screw.recompose().translation.vector;
        let len = full.norm();
        let axis = if len > 1e-12 {
            Unit::new_normalize(full)
        } else {
            screw.direction
        };
        JointClass {
            kind: JointKind::Prismatic,
            axis,
            pivot: screw.axis_point,
            observed_displacement: len,
            low_confidence: screw.angle > 0.5 * theta_min,
        }
    } else {
        JointClass {
            kind: JointKind::Revolute,
            axis: screw.direction,
            pivot: screw.axis_point,
            observed_displacement: screw.angle,
            low_confidence: screw.angle < 2.0 * theta_min,
        }
    }
}

/// Reconstructed articulated object anchored at the post-interaction state.
#[derive(Debug, Clone)]
pub struct TwinModel {
    pub object: ArticulatedObject,
    /// Joint displacement the interaction produced, in the twin's convention
    /// (positive s continues the observed push).
    pub observed_displacement: f64,
    pub low_confidence: bool,
}

/// Builds the twin from the post-interaction cloud: static points become the
/// base hull, moved points the movable hull, the joint comes from the
/// classification with its zero anchored at the captured state. Coplanar
/// segments are inflated into 1 mm slabs; fewer than 4 points is an error.
pub fn build_twin(
    _cloud0: &PointCloud,
    cloud1: &PointCloud,
    mask: &SegmentationMask,
    joint: &JointClass,
) -> Result<TwinModel, TwinError> {
    let moved: Vec<Point3<f64>> = select_points(cloud1, &mask.moved1);
    let static_pts: Vec<Point3<f64>> = cloud1
        .points
        .iter()
        .zip(&mask.moved1)
        .filter(|(_, &m)| !m)
        .map(|(p, _)| *p)
        .collect();
    if moved.len() < 4 || static_pts.len() < 4 {
        return Err(TwinError::DegenerateGeometry);
    }
    let movable_hull =
        ConvexHull::from_points_inflated(&moved, 5e-4).map_err(|_| TwinError::DegenerateGeometry)?;
    let base_hull = ConvexHull::from_points_inflated(&static_pts, 5e-4)
        .map_err(|_| TwinError::DegenerateGeometry)?;

    let limit = match joint.kind {
        JointKind::Prismatic => TWIN_PRISMATIC_LIMIT,
        JointKind::Revolute => TWIN_REVOLUTE_LIMIT,
    };
    let spec = JointSpec {
        kind: joint.kind,
        axis: joint.axis,
        pivot: joint.pivot,
        limits: [-limit, limit],
        state: 0.0,
    };
    let object = ArticulatedObject {
        base: RigidGeometry {
            shape: GeometryShape::ConvexHull(base_hull),
            pose: Pose::identity(),
        },
        movable: RigidGeometry {
            shape: GeometryShape::ConvexHull(movable_hull),
            pose: Pose::identity(),
        },
        joint: spec,
        pose: Pose::identity(),
    };
    object.validate("twin")?;
    Ok(TwinModel {
        object,
        observed_displacement: joint.observed_displacement,
        low_confidence: joint.low_confidence,
    })
}

/// Fallback when segmentation finds no motion (e.g. duplicate-cloud input):
/// a single-frame guess with the axis along the cloud's dominant direction.
/// Mirrors how a motion-blind reconstruction degrades instead of refusing.
pub fn degenerate_twin(cloud1: &PointCloud) -> Result<TwinModel, TwinError> {
    if cloud1.len() < 4 {
        return Err(TwinError::DegenerateGeometry);
    }
    let centroid = cloud1.centroid();
    let mut cov = Matrix3::zeros();
    for p in &cloud1.points {
        let d = p - centroid;
        cov += d * d.transpose();
    }
    let eig = nalgebra::SymmetricEigen::new(cov);
    let mut max_i = 0;
    for i in 1..3 {
        if eig.eigenvalues[i] > eig.eigenvalues[max_i] {
            max_i = i;
        }
    }
    let axis = Unit::new_normalize(eig.eigenvectors.column(max_i).into_owned());
    let hull = ConvexHull::from_points_inflated(&cloud1.points, 5e-4)
        .map_err(|_| TwinError::DegenerateGeometry)?;
    let object = ArticulatedObject {
        base: RigidGeometry {
            shape: GeometryShape::ConvexHull(hull.clone()),
            pose: Pose::identity(),
        },
        movable: RigidGeometry {
            shape: GeometryShape::ConvexHull(hull),
            pose: Pose::identity(),
        },
        joint: JointSpec {
            kind: JointKind::Revolute,
            axis,
            pivot: centroid,
            limits: [-TWIN_REVOLUTE_LIMIT, TWIN_REVOLUTE_LIMIT],
            state: 0.0,
        },
        pose: Pose::identity(),
    };
    Ok(TwinModel {
        object,
        observed_displacement: 0.0,
        low_confidence: true,
    })
}

/// Angle between two joint axes treated as lines (sign-insensitive), radians.
pub fn axis_angle_error(estimated: &UnitVector3<f64>, truth: &UnitVector3<f64>) -> f64 {
    estimated.dot(truth).abs().clamp(0.0, 1.0).acos()
}

/// Distance from the true pivot to the estimated axis line (pivot positions
/// along the axis are equivalent).
pub fn pivot_error(
    est_axis: &UnitVector3<f64>,
    est_point: &Point3<f64>,
    true_pivot: &Point3<f64>,
) -> f64 {
    let d = true_pivot - est_point;
    (d - est_axis.into_inner() * d.dot(est_axis)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::percept::{Frame, PointCloud};
    use approx::assert_relative_eq;
    use rand::Rng;

    fn random_pose(rng: &mut impl Rng, min_angle: f64, max_angle: f64) -> Pose {
        let axis = Unit::new_normalize(Vector3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ));
        let angle = rng.gen_range(min_angle..max_angle);
        let trans = Vector3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        Pose::from_parts(
            Translation3::from(trans),
            UnitQuaternion::from_axis_angle(&axis, angle),
        )
    }

    #[test]
    fn screw_pure_translation() {
        let t = Pose::translation(0.0, 0.0, 0.1);
        let s = screw_decompose(&t).unwrap();
        assert_eq!(s.angle, 0.0);
        assert_relative_eq!(s.translation, 0.1, epsilon = 1e-12);
        assert_relative_eq!(s.direction.z, 1.0, epsilon = 1e-12);
        assert_relative_eq!((s.recompose().inverse() * t).translation.vector.norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn screw_pure_rotation_about_z() {
        let angle = 30f64.to_radians();
        let t = Pose::from_parts(
            Translation3::identity(),
            UnitQuaternion::from_axis_angle(&Vector3::z_axis(), angle),
        );
        let s = screw_decompose(&t).unwrap();
        assert_relative_eq!(s.angle, angle, epsilon = 1e-12);
        assert_relative_eq!(s.direction.z, 1.0, epsilon = 1e-12);
        assert_relative_eq!(s.translation, 0.0, epsilon = 1e-12);
        // Axis passes through the origin.
        assert!(s.axis_point.coords.norm() < 1e-12);
    }

    #[test]
    fn screw_recovers_offset_axis() {
        // 20° about a z-axis through (0.3, 0, 0): compose numerically, then
        // the decomposition must invert it exactly.
        let axis = Vector3::z_axis();
        let pivot = Point3::new(0.3, 0.0, 0.0);
        let angle = 20f64.to_radians();
        let rot = UnitQuaternion::from_axis_angle(&axis, angle);
        let t = Pose::from_parts(
            Translation3::from(pivot.coords - rot * pivot.coords),
            rot,
        );
        let s = screw_decompose(&t).unwrap();
        assert_relative_eq!(s.angle, angle, epsilon = 1e-12);
        // The returned axis point is the point on the line closest to the
        // origin; for this axis that is (0.3, 0, 0) itself.
        assert_relative_eq!((s.axis_point - pivot).norm(), 0.0, epsilon = 1e-9);
        assert_relative_eq!(s.translation, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn screw_round_trip_random() {
        let mut rng = crate::seeds::rng(23, &[]);
        for _ in 0..300 {
            let t = random_pose(&mut rng, 1f64.to_radians(), 179f64.to_radians());
            let s = screw_decompose(&t).unwrap();
            assert!(s.angle >= 0.0 && s.angle <= std::f64::consts::PI + 1e-12);
            let back = s.recompose();
            let rot_err = (back.rotation.inverse() * t.rotation).angle();
            let trans_err = (back.translation.vector - t.translation.vector).norm();
            assert!(rot_err < 1e-9, "rotation error {rot_err}");
            assert!(trans_err < 1e-9, "translation error {trans_err}");
        }
    }

    #[test]
    fn degenerate_motion_is_error() {
        assert!(matches!(
            screw_decompose(&Pose::identity()),
            Err(TwinError::DegenerateMotion)
        ));
    }

    #[test]
    fn classify_threshold_rule() {
        let drawer = ScrewMotion {
            direction: Vector3::x_axis(),
            axis_point: Point3::origin(),
            angle: 0.0,
            translation: 0.05,
        };
        let c = classify_joint(&drawer, DEFAULT_THETA_MIN);
        assert_eq!(c.kind, JointKind::Prismatic);
        assert_relative_eq!(c.observed_displacement, 0.05, epsilon = 1e-12);

        let faucet = ScrewMotion {
            direction: Vector3::z_axis(),
            axis_point: Point3::new(0.1, 0.0, 0.0),
            angle: 25f64.to_radians(),
            translation: 0.0,
        };
        let c = classify_joint(&faucet, DEFAULT_THETA_MIN);
        assert_eq!(c.kind, JointKind::Revolute);

        // Exactly at the threshold → revolute (≥ rule).
        let borderline = ScrewMotion {
            angle: DEFAULT_THETA_MIN,
            ..faucet
        };
        assert_eq!(
            classify_joint(&borderline, DEFAULT_THETA_MIN).kind,
            JointKind::Revolute
        );
    }

    #[test]
    fn icp_identity_on_identical_segments() {
        let mut rng = crate::seeds::rng(31, &[]);
        let pts: Vec<Point3<f64>> = (0..200)
            .map(|_| {
                Point3::new(
                    rng.gen_range(-0.1..0.1),
                    rng.gen_range(-0.1..0.1),
                    rng.gen_range(-0.1..0.1),
                )
            })
            .collect();
        let t = register_segments(&pts, &pts).unwrap();
        assert!(t.translation.vector.norm() < 1e-9);
        assert!(t.rotation.angle() < 1e-9);
    }

    #[test]
    fn icp_recovers_pure_translation() {
        // Identical point set translated with full overlap: with the shift
        // below half the inter-point spacing, nearest neighbors at identity
        // are already the true pairing and one centroid alignment is exact.
        let mut pts = Vec::new();
        for i in 0..7 {
            for j in 0..7 {
                for k in 0..6 {
                    pts.push(Point3::new(
                        i as f64 * 0.15,
                        j as f64 * 0.15,
                        k as f64 * 0.15,
                    ));
                }
            }
        }
        let shifted: Vec<Point3<f64>> =
            pts.iter().map(|p| p + Vector3::new(0.05, 0.0, 0.0)).collect();
        let t = register_segments(&pts, &shifted).unwrap();
        assert!((t.translation.vector - Vector3::new(0.05, 0.0, 0.0)).norm() < 1e-6);
        assert!(t.rotation.angle() < 1e-6);
    }

    #[test]
    fn segmentation_identical_clouds_is_insufficient_motion() {
        let mut rng = crate::seeds::rng(41, &[]);
        let pts: Vec<Point3<f64>> = (0..200)
            .map(|_| {
                Point3::new(
                    rng.gen_range(-0.2..0.2),
                    rng.gen_range(-0.2..0.2),
                    rng.gen_range(0.0..0.2),
                )
            })
            .collect();
        let cloud = PointCloud::new(pts, Frame::World);
        assert!(matches!(
            segment_moving(&cloud, &cloud, 0.005),
            Err(TwinError::InsufficientMotion { .. })
        ));
    }

    #[test]
    fn zero_tau_marks_almost_everything_moved_on_noisy_clouds() {
        // Threshold degeneracy: with tau = 0 any noise separates the clouds.
        let mut rng = crate::seeds::rng(43, &[]);
        let pts: Vec<Point3<f64>> = (0..300)
            .map(|_| {
                Point3::new(
                    rng.gen_range(-0.2..0.2),
                    rng.gen_range(-0.2..0.2),
                    rng.gen_range(0.0..0.2),
                )
            })
            .collect();
        let jittered: Vec<Point3<f64>> = pts
            .iter()
            .map(|p| p + Vector3::new(rng.gen_range(-1e-4..1e-4), 0.0, 0.0))
            .collect();
        let c0 = PointCloud::new(pts, Frame::World);
        let c1 = PointCloud::new(jittered, Frame::World);
        let mask = segment_moving(&c0, &c1, 0.0).unwrap();
        let (n0, n1) = mask.moved_count();
        assert!(n0 > 250 && n1 > 250);
    }

    #[test]
    fn equivariance_under_rigid_motion() {
        // Rotating/translating both clouds transforms the recovered axis.
        let mut rng = crate::seeds::rng(47, &[]);
        let seg0: Vec<Point3<f64>> = (0..200)
            .map(|_| {
                Point3::new(
                    rng.gen_range(-0.1..0.1),
                    rng.gen_range(-0.06..0.06),
                    rng.gen_range(-0.01..0.01),
                )
            })
            .collect();
        let motion = Pose::from_parts(
            Translation3::new(0.0, 0.0, 0.0),
            UnitQuaternion::from_axis_angle(&Vector3::z_axis(), 0.3),
        );
        let seg1: Vec<Point3<f64>> = seg0.iter().map(|p| motion.transform_point(p)).collect();
        let t = register_segments(&seg0, &seg1).unwrap();
        let s = screw_decompose(&t).unwrap();

        let g = random_pose(&mut rng, 0.3, 1.0);
        let seg0g: Vec<Point3<f64>> = seg0.iter().map(|p| g.transform_point(p)).collect();
        let seg1g: Vec<Point3<f64>> = seg1.iter().map(|p| g.transform_point(p)).collect();
        let tg = register_segments(&seg0g, &seg1g).unwrap();
        let sg = screw_decompose(&tg).unwrap();

        let expected_dir = g.transform_vector(s.direction.as_ref());
        let angle = sg.direction.into_inner().dot(&expected_dir).abs().acos();
        assert!(angle < 2e-3, "axis equivariance violated: {angle}");
        assert_relative_eq!(sg.angle, s.angle, epsilon = 1e-4);
    }
}
