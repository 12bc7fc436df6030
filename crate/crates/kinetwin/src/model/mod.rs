//! Domain types for articulated objects, robot chains, and scenes, plus the
//! JSON scene schema and URDF export.

pub mod schema;
pub mod urdf;

use std::path::PathBuf;

use nalgebra::{Point3, Translation3, Unit, UnitQuaternion, UnitVector3, Vector3};
use thiserror::Error;

use crate::geom::{self, hull::HullError, ConvexHull, Pose, Ray, SurfaceHit};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invariant violation at {path}: {message}")]
    Invariant { path: String, message: String },
    #[error("unsupported schema version {0} (expected 1)")]
    SchemaVersion(u32),
    #[error("joint state {state} outside limits [{lo}, {hi}]")]
    OutOfLimits { state: f64, lo: f64, hi: f64 },
    #[error(transparent)]
    Hull(#[from] HullError),
}

fn invariant(path: &str, message: impl Into<String>) -> ModelError {
    ModelError::Invariant {
        path: path.to_string(),
        message: message.into(),
    }
}

/// Joint articulation type shared by objects and robot chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointKind {
    Revolute,
    Prismatic,
}

/// One-DOF joint: unit axis, pivot (revolute only), closed limit interval,
/// and the current state `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSpec {
    pub kind: JointKind,
    pub axis: UnitVector3<f64>,
    pub pivot: Point3<f64>,
    pub limits: [f64; 2],
    pub state: f64,
}

impl JointSpec {
    pub fn new(
        kind: JointKind,
        axis: Vector3<f64>,
        pivot: Point3<f64>,
        limits: [f64; 2],
        state: f64,
    ) -> Result<Self, ModelError> {
        let spec = Self {
            kind,
            axis: Unit::new_normalize(axis),
            pivot,
            limits,
            state,
        };
        spec.validate("joint").map(|_| spec)
    }

    pub fn validate(&self, path: &str) -> Result<(), ModelError> {
        let norm = self.axis.as_ref().norm();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
            return Err(invariant(&format!("{path}.axis"), "axis must be unit length"));
        }
        if !(self.limits[0] < self.limits[1]) {
            return Err(invariant(
                &format!("{path}.limits"),
                format!("lower limit {} must be < upper {}", self.limits[0], self.limits[1]),
            ));
        }
        if self.state < self.limits[0] - 1e-12 || self.state > self.limits[1] + 1e-12 {
            return Err(invariant(
                &format!("{path}.state"),
                format!("state {} outside [{}, {}]", self.state, self.limits[0], self.limits[1]),
            ));
        }
        Ok(())
    }

    pub fn clamp(&self, s: f64) -> f64 {
        s.clamp(self.limits[0], self.limits[1])
    }

    pub fn contains(&self, s: f64) -> bool {
        s >= self.limits[0] - 1e-12 && s <= self.limits[1] + 1e-12
    }

    /// Rigid motion produced by driving the joint to state `s`:
    /// rotation by `s` about (axis, pivot) or translation `s·axis`.
    pub fn motion(&self, s: f64) -> Pose {
        match self.kind {
            JointKind::Revolute => {
                let rot = UnitQuaternion::from_axis_angle(&self.axis, s);
                let trans = self.pivot.coords - rot * self.pivot.coords;
                Pose::from_parts(Translation3::from(trans), rot)
            }
            JointKind::Prismatic => Pose::translation(
                self.axis.x * s,
                self.axis.y * s,
                self.axis.z * s,
            ),
        }
    }
}

/// Shape carried by a rigid body, in the geometry's own frame.
#[derive(Debug, Clone)]
pub enum GeometryShape {
    Box {
        center: Point3<f64>,
        half_extents: Vector3<f64>,
    },
    Sphere {
        center: Point3<f64>,
        radius: f64,
    },
    ConvexHull(ConvexHull),
    Mesh {
        vertices: Vec<Point3<f64>>,
        faces: Vec<[u32; 3]>,
    },
}

/// Shape plus its pose relative to the parent frame.
#[derive(Debug, Clone)]
pub struct RigidGeometry {
    pub shape: GeometryShape,
    pub pose: Pose,
}

impl RigidGeometry {
    pub fn boxed(center: Point3<f64>, half_extents: Vector3<f64>, pose: Pose) -> Self {
        Self {
            shape: GeometryShape::Box {
                center,
                half_extents,
            },
            pose,
        }
    }

    pub fn sphere(center: Point3<f64>, radius: f64, pose: Pose) -> Self {
        Self {
            shape: GeometryShape::Sphere { center, radius },
            pose,
        }
    }

    pub fn hull_of(points: &[Point3<f64>]) -> Result<Self, HullError> {
        Ok(Self {
            shape: GeometryShape::ConvexHull(ConvexHull::from_points(points)?),
            pose: Pose::identity(),
        })
    }

    pub fn mesh(vertices: Vec<Point3<f64>>, faces: Vec<[u32; 3]>, pose: Pose) -> Self {
        Self {
            shape: GeometryShape::Mesh { vertices, faces },
            pose,
        }
    }

    pub fn validate(&self, path: &str) -> Result<(), ModelError> {
        match &self.shape {
            GeometryShape::Box { half_extents, .. } => {
                if half_extents.iter().any(|h| *h <= 0.0 || !h.is_finite()) {
                    return Err(invariant(
                        &format!("{path}.half_extents"),
                        "half extents must be positive",
                    ));
                }
            }
            GeometryShape::Sphere { radius, .. } => {
                if *radius <= 0.0 || !radius.is_finite() {
                    return Err(invariant(&format!("{path}.radius"), "radius must be positive"));
                }
            }
            GeometryShape::ConvexHull(h) => {
                if h.vertices.len() < 4 {
                    return Err(invariant(
                        &format!("{path}.points"),
                        "convex hull needs at least 4 non-coplanar vertices",
                    ));
                }
            }
            GeometryShape::Mesh { vertices, faces } => {
                if faces.is_empty() {
                    return Err(invariant(&format!("{path}.faces"), "mesh has no faces"));
                }
                for (fi, f) in faces.iter().enumerate() {
                    if f.iter().any(|&i| i as usize >= vertices.len()) {
                        return Err(invariant(
                            &format!("{path}.faces[{fi}]"),
                            "face indexes a missing vertex",
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// Signed distance from a world-space point; `parent` is the pose of the
    /// frame this geometry hangs from. Result is in world space.
    pub fn surface_query(&self, parent: &Pose, p_world: &Point3<f64>) -> SurfaceHit {
        let full = parent * self.pose;
        let p = full.inverse_transform_point(p_world);
        let hit = match &self.shape {
            GeometryShape::Box {
                center,
                half_extents,
            } => {
                let local = Point3::from(p - center);
                let mut h = geom::query::point_to_box(&local, half_extents);
                h.point += center.coords;
                h
            }
            GeometryShape::Sphere { center, radius } => {
                geom::query::point_to_sphere(&p, center, *radius)
            }
            GeometryShape::ConvexHull(hull) => geom::query::point_to_hull(&p, hull),
            GeometryShape::Mesh { vertices, faces } => {
                geom::query::point_to_mesh(&p, vertices, faces)
            }
        };
        SurfaceHit {
            dist: hit.dist,
            point: full.transform_point(&hit.point),
            normal: full.transform_vector(&hit.normal),
        }
    }

    /// Nearest positive ray-hit parameter, ray given in world space.
    pub fn raycast(&self, parent: &Pose, ray_world: &Ray) -> Option<f64> {
        let full = parent * self.pose;
        let ray = ray_world.transformed(&full.inverse());
        match &self.shape {
            GeometryShape::Box {
                center,
                half_extents,
            } => {
                let shifted = Ray {
                    origin: Point3::from(ray.origin - center),
                    dir: ray.dir,
                };
                geom::ray::ray_box(&shifted, half_extents)
            }
            GeometryShape::Sphere { center, radius } => {
                geom::ray::ray_sphere(&ray, center, *radius)
            }
            GeometryShape::ConvexHull(hull) => geom::ray::ray_hull(&ray, hull),
            GeometryShape::Mesh { vertices, faces } => {
                geom::ray::ray_mesh(&ray, vertices, faces)
            }
        }
    }

    /// Geometry center in world space.
    pub fn centroid(&self, parent: &Pose) -> Point3<f64> {
        let full = parent * self.pose;
        let local = match &self.shape {
            GeometryShape::Box { center, .. } => *center,
            GeometryShape::Sphere { center, .. } => *center,
            GeometryShape::ConvexHull(h) => h.centroid(),
            GeometryShape::Mesh { vertices, .. } => {
                let mut m = Vector3::zeros();
                for v in vertices {
                    m += v.coords;
                }
                Point3::from(m / vertices.len().max(1) as f64)
            }
        };
        full.transform_point(&local)
    }

    /// World-space axis-aligned bounds.
    pub fn aabb(&self, parent: &Pose) -> geom::Aabb {
        let full = parent * self.pose;
        let pts: Vec<Point3<f64>> = match &self.shape {
            GeometryShape::Box {
                center,
                half_extents,
            } => {
                let mut v = Vec::with_capacity(8);
                for &sx in &[-1.0, 1.0] {
                    for &sy in &[-1.0, 1.0] {
                        for &sz in &[-1.0, 1.0] {
                            v.push(Point3::new(
                                center.x + sx * half_extents.x,
                                center.y + sy * half_extents.y,
                                center.z + sz * half_extents.z,
                            ));
                        }
                    }
                }
                v
            }
            GeometryShape::Sphere { center, radius } => {
                return geom::Aabb::new(
                    full.transform_point(center) - Vector3::repeat(*radius),
                    full.transform_point(center) + Vector3::repeat(*radius),
                );
            }
            GeometryShape::ConvexHull(h) => h.vertices.clone(),
            GeometryShape::Mesh { vertices, .. } => vertices.clone(),
        };
        let world: Vec<Point3<f64>> = pts.iter().map(|p| full.transform_point(p)).collect();
        geom::Aabb::from_points(&world)
    }
}

/// A base link fixed to the world and a movable link driven by one joint.
#[derive(Debug, Clone)]
pub struct ArticulatedObject {
    pub base: RigidGeometry,
    pub movable: RigidGeometry,
    pub joint: JointSpec,
    /// Object frame in the world.
    pub pose: Pose,
}

impl ArticulatedObject {
    pub fn validate(&self, path: &str) -> Result<(), ModelError> {
        self.base.validate(&format!("{path}.base"))?;
        self.movable.validate(&format!("{path}.movable"))?;
        self.joint.validate(&format!("{path}.joint"))
    }

    /// Pose of the movable link in the object frame at joint state `s`
    /// (joint motion composed with the rest pose).
    pub fn movable_pose(&self, s: f64) -> Result<Pose, ModelError> {
        if !self.joint.contains(s) {
            return Err(ModelError::OutOfLimits {
                state: s,
                lo: self.joint.limits[0],
                hi: self.joint.limits[1],
            });
        }
        Ok(self.joint.motion(s) * self.movable.pose)
    }

    /// World pose of the movable link's parent frame at joint state `s`
    /// (compose with `movable.pose` happens inside geometry queries).
    pub fn movable_parent_world(&self, s: f64) -> Pose {
        self.pose * self.joint.motion(s)
    }

    pub fn base_parent_world(&self) -> Pose {
        self.pose
    }

    /// World-space joint axis.
    pub fn axis_world(&self) -> UnitVector3<f64> {
        Unit::new_normalize(self.pose.transform_vector(self.joint.axis.as_ref()))
    }

    /// World-space pivot point.
    pub fn pivot_world(&self) -> Point3<f64> {
        self.pose.transform_point(&self.joint.pivot)
    }

    /// Geometry center of the movable link in world space at joint state `s`.
    pub fn movable_centroid_world(&self, s: f64) -> Point3<f64> {
        self.movable.centroid(&self.movable_parent_world(s))
    }

    /// Velocity of a world-space surface point `w` per unit increase of `s`.
    pub fn surface_velocity(&self, w: &Point3<f64>) -> Vector3<f64> {
        let axis = self.axis_world();
        match self.joint.kind {
            JointKind::Prismatic => axis.into_inner(),
            JointKind::Revolute => axis.cross(&(w - self.pivot_world())),
        }
    }
}

/// One joint of a robot chain: a constant origin offset followed by the
/// joint's own motion about/along `axis`.
#[derive(Debug, Clone)]
pub struct ChainJoint {
    pub kind: JointKind,
    pub axis: UnitVector3<f64>,
    pub origin: Pose,
    pub limits: [f64; 2],
}

impl ChainJoint {
    pub fn motion(&self, q: f64) -> Pose {
        match self.kind {
            JointKind::Revolute => Pose::from_parts(
                Translation3::identity(),
                UnitQuaternion::from_axis_angle(&self.axis, q),
            ),
            JointKind::Prismatic => {
                Pose::translation(self.axis.x * q, self.axis.y * q, self.axis.z * q)
            }
        }
    }
}

/// Fingertip sphere attached to the last chain link; its center defines the
/// tool mount frame.
#[derive(Debug, Clone)]
pub struct Fingertip {
    pub offset: Vector3<f64>,
    pub radius: f64,
}

/// Contact sphere of a tool, in the tool frame.
#[derive(Debug, Clone, Copy)]
pub struct ToolSphere {
    pub center: Point3<f64>,
    pub radius: f64,
}

/// Rigid tool mounted at the fingertip. Contact is carried by a sphere-swept
/// approximation so non-convex tools (hooks, rings) behave correctly; the
/// optional geometry is descriptive only.
#[derive(Debug, Clone)]
pub struct Tool {
    pub name: String,
    pub mount: Pose,
    pub contact_spheres: Vec<ToolSphere>,
    /// Working-tip point in the tool frame; replaces the fingertip center as
    /// the grasp reference while the tool is attached.
    pub tip: Point3<f64>,
    pub geometry: Option<RigidGeometry>,
}

impl Tool {
    /// A tool with no extent: attaching it is equivalent to the bare fingertip.
    pub fn empty() -> Self {
        Self {
            name: "empty".to_string(),
            mount: Pose::identity(),
            contact_spheres: Vec::new(),
            tip: Point3::origin(),
            geometry: None,
        }
    }
}

/// Serial kinematic chain with a fingertip sphere and an optional tool.
#[derive(Debug, Clone)]
pub struct KinematicChain {
    pub joints: Vec<ChainJoint>,
    pub fingertip: Fingertip,
    pub tool: Option<Tool>,
}

/// Forward-kinematics result: one world frame per joint plus the tool mount.
#[derive(Debug, Clone)]
pub struct ChainFk {
    pub joint_frames: Vec<Pose>,
    /// Tool mount frame; its origin is the fingertip center.
    pub mount: Pose,
}

impl KinematicChain {
    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn within_limits(&self, q: &[f64]) -> bool {
        q.len() == self.joints.len()
            && self
                .joints
                .iter()
                .zip(q)
                .all(|(j, &v)| v >= j.limits[0] - 1e-12 && v <= j.limits[1] + 1e-12)
    }

    pub fn clamp_q(&self, q: &mut [f64]) {
        for (j, v) in self.joints.iter().zip(q.iter_mut()) {
            *v = v.clamp(j.limits[0], j.limits[1]);
        }
    }

    /// Serial composition of joint transforms from `base`.
    pub fn fk(&self, base: &Pose, q: &[f64]) -> ChainFk {
        assert_eq!(q.len(), self.joints.len(), "q dimension mismatch");
        let mut frame = *base;
        let mut joint_frames = Vec::with_capacity(self.joints.len());
        for (joint, &qi) in self.joints.iter().zip(q) {
            frame = frame * joint.origin * joint.motion(qi);
            joint_frames.push(frame);
        }
        let mount = frame * Pose::translation(
            self.fingertip.offset.x,
            self.fingertip.offset.y,
            self.fingertip.offset.z,
        );
        ChainFk {
            joint_frames,
            mount,
        }
    }

    /// Contact spheres of the end effector (fingertip plus tool) in world space.
    pub fn effector_spheres(&self, fk: &ChainFk) -> Vec<(Point3<f64>, f64)> {
        let mut spheres = vec![(
            Point3::from(fk.mount.translation.vector),
            self.fingertip.radius,
        )];
        if let Some(tool) = &self.tool {
            let tool_frame = fk.mount * tool.mount;
            for s in &tool.contact_spheres {
                spheres.push((tool_frame.transform_point(&s.center), s.radius));
            }
        }
        spheres
    }

    /// Grasp reference point: the tool tip when a tool is attached, otherwise
    /// the fingertip center.
    pub fn grasp_point(&self, fk: &ChainFk) -> Point3<f64> {
        match &self.tool {
            Some(tool) => (fk.mount * tool.mount).transform_point(&tool.tip),
            None => Point3::from(fk.mount.translation.vector),
        }
    }
}

/// Camera pose sampling ranges stored with ground-truth scenes.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CameraRanges {
    pub azimuth_deg: [f64; 2],
    pub altitude_deg: [f64; 2],
    pub radius: f64,
    pub look_at: [f64; 3],
    #[serde(default = "default_width")]
    pub width: u32,
    #[serde(default = "default_height")]
    pub height: u32,
    #[serde(default = "default_vfov")]
    pub vfov_deg: f64,
}

fn default_width() -> u32 {
    160
}
fn default_height() -> u32 {
    120
}
fn default_vfov() -> f64 {
    45.0
}

impl Default for CameraRanges {
    fn default() -> Self {
        Self {
            azimuth_deg: [-60.0, 60.0],
            altitude_deg: [15.0, 45.0],
            radius: 1.2,
            look_at: [0.0, 0.0, 0.0],
            width: default_width(),
            height: default_height(),
            vfov_deg: default_vfov(),
        }
    }
}

/// Depth-sensor noise parameters stored with ground-truth scenes.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct SensorNoise {
    pub depth_sigma: f64,
    pub dropout: f64,
}

impl Default for SensorNoise {
    fn default() -> Self {
        Self {
            depth_sigma: 0.002,
            dropout: 0.02,
        }
    }
}

/// Full scene: object, robot, table, plus perception defaults.
#[derive(Debug, Clone)]
pub struct Scene {
    pub name: String,
    pub object: ArticulatedObject,
    pub robot: KinematicChain,
    pub robot_base: Pose,
    pub home_q: Vec<f64>,
    pub table_height: f64,
    pub camera: CameraRanges,
    pub noise: SensorNoise,
}

impl Scene {
    /// Validates every structural invariant, including that the robot at its
    /// home configuration does not interpenetrate the object or table.
    pub fn validate(&self) -> Result<(), ModelError> {
        self.object.validate("object")?;
        if self.robot.joints.is_empty() {
            return Err(invariant("robot.joints", "chain needs at least one joint"));
        }
        for (i, j) in self.robot.joints.iter().enumerate() {
            if !(j.limits[0] < j.limits[1]) {
                return Err(invariant(
                    &format!("robot.joints[{i}].limits"),
                    "lower limit must be below upper",
                ));
            }
            let norm = j.axis.as_ref().norm();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(invariant(
                    &format!("robot.joints[{i}].axis"),
                    "axis must be unit length",
                ));
            }
        }
        if self.robot.fingertip.radius <= 0.0 {
            return Err(invariant("robot.fingertip.radius", "radius must be positive"));
        }
        if self.home_q.len() != self.robot.joints.len() {
            return Err(invariant(
                "robot.home",
                format!(
                    "home has {} values for {} joints",
                    self.home_q.len(),
                    self.robot.joints.len()
                ),
            ));
        }
        if !self.robot.within_limits(&self.home_q) {
            return Err(invariant("robot.home", "home configuration violates joint limits"));
        }

        // No robot/object interpenetration at the initial configuration.
        let fk = self.robot.fk(&self.robot_base, &self.home_q);
        let s0 = self.object.joint.state;
        for (c, r) in self.robot.effector_spheres(&fk) {
            let base_hit = self.object.base.surface_query(&self.object.base_parent_world(), &c);
            let mov_hit = self
                .object
                .movable
                .surface_query(&self.object.movable_parent_world(s0), &c);
            let table_gap = c.z - self.table_height - r;
            if base_hit.dist - r < 0.0 || mov_hit.dist - r < 0.0 || table_gap < 0.0 {
                return Err(invariant(
                    "robot.home",
                    "robot interpenetrates the scene at the initial configuration",
                ));
            }
        }
        Ok(())
    }

    /// Same robot and table, different object (used to plan on a twin).
    pub fn with_object(&self, object: ArticulatedObject) -> Scene {
        Scene {
            name: format!("{}-twin", self.name),
            object,
            robot: self.robot.clone(),
            robot_base: self.robot_base,
            home_q: self.home_q.clone(),
            table_height: self.table_height,
            camera: self.camera.clone(),
            noise: self.noise,
        }
    }
}

/// Spec-level free function: pose of the movable link at joint state `s`.
pub fn movable_pose(obj: &ArticulatedObject, s: f64) -> Result<Pose, ModelError> {
    obj.movable_pose(s)
}

/// Loads and validates a scene file.
pub fn load_scene(path: impl AsRef<std::path::Path>) -> Result<Scene, ModelError> {
    schema::load_scene(path.as_ref())
}

/// Writes a scene back to the JSON schema.
pub fn save_scene(scene: &Scene, path: impl AsRef<std::path::Path>) -> Result<(), ModelError> {
    schema::save_scene(scene, path.as_ref())
}
