//! Versioned JSON scene schema (`"schema_version": 1`). Ground-truth scenes
//! carry perception parameters (camera ranges, sensor noise) that URDF cannot
//! express, so this is the primary input format; URDF is the export format.

use std::path::Path;

use nalgebra::{Point3, Translation3, Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::{
    ArticulatedObject, CameraRanges, ChainJoint, Fingertip, GeometryShape, JointKind, JointSpec,
    KinematicChain, ModelError, RigidGeometry, Scene, SensorNoise, Tool, ToolSphere,
};
use crate::geom::{ConvexHull, Pose};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneFile {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    pub table_height: f64,
    pub object: ObjectFile,
    pub robot: RobotFile,
    #[serde(default)]
    pub camera: Option<CameraRanges>,
    #[serde(default)]
    pub noise: Option<SensorNoise>,
}

/// Object description shared by scene files and twin exports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectFile {
    #[serde(default)]
    pub pose: PoseFile,
    pub base: GeomFile,
    pub movable: GeomFile,
    pub joint: JointFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointFile {
    pub kind: JointKind,
    pub axis: [f64; 3],
    #[serde(default)]
    pub pivot: [f64; 3],
    pub limits: [f64; 2],
    #[serde(default)]
    pub state: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GeomFile {
    Box {
        #[serde(default)]
        center: [f64; 3],
        half_extents: [f64; 3],
        #[serde(default)]
        pose: PoseFile,
    },
    Sphere {
        #[serde(default)]
        center: [f64; 3],
        radius: f64,
        #[serde(default)]
        pose: PoseFile,
    },
    ConvexHull {
        points: Vec<[f64; 3]>,
        #[serde(default)]
        pose: PoseFile,
    },
    Mesh {
        vertices: Vec<[f64; 3]>,
        faces: Vec<[u32; 3]>,
        #[serde(default)]
        pose: PoseFile,
    },
}

/// Translation plus roll/pitch/yaw in radians.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PoseFile {
    #[serde(default)]
    pub xyz: [f64; 3],
    #[serde(default)]
    pub rpy: [f64; 3],
}

impl Default for PoseFile {
    fn default() -> Self {
        Self {
            xyz: [0.0; 3],
            rpy: [0.0; 3],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobotFile {
    #[serde(default)]
    pub base_pose: PoseFile,
    pub joints: Vec<ChainJointFile>,
    pub fingertip: FingertipFile,
    pub home: Vec<f64>,
    #[serde(default)]
    pub tool: Option<ToolFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainJointFile {
    pub kind: JointKind,
    pub axis: [f64; 3],
    #[serde(default)]
    pub origin: PoseFile,
    pub limits: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FingertipFile {
    pub offset: [f64; 3],
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToolFile {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub mount: PoseFile,
    pub spheres: Vec<ToolSphereFile>,
    pub tip: [f64; 3],
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ToolSphereFile {
    pub center: [f64; 3],
    pub radius: f64,
}

impl PoseFile {
    pub fn to_pose(&self) -> Pose {
        Pose::from_parts(
            Translation3::new(self.xyz[0], self.xyz[1], self.xyz[2]),
            UnitQuaternion::from_euler_angles(self.rpy[0], self.rpy[1], self.rpy[2]),
        )
    }

    pub fn from_pose(p: &Pose) -> Self {
        let (r, pi, y) = p.rotation.euler_angles();
        Self {
            xyz: [p.translation.x, p.translation.y, p.translation.z],
            rpy: [r, pi, y],
        }
    }
}

fn vec3(a: [f64; 3]) -> Vector3<f64> {
    Vector3::new(a[0], a[1], a[2])
}

fn point3(a: [f64; 3]) -> Point3<f64> {
    Point3::new(a[0], a[1], a[2])
}

fn arr3v(v: &Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn arr3p(p: &Point3<f64>) -> [f64; 3] {
    [p.x, p.y, p.z]
}

impl GeomFile {
    pub fn to_geometry(&self, path: &str) -> Result<RigidGeometry, ModelError> {
        let geom = match self {
            GeomFile::Box {
                center,
                half_extents,
                pose,
            } => RigidGeometry::boxed(point3(*center), vec3(*half_extents), pose.to_pose()),
            GeomFile::Sphere {
                center,
                radius,
                pose,
            } => RigidGeometry::sphere(point3(*center), *radius, pose.to_pose()),
            GeomFile::ConvexHull { points, pose } => {
                let pts: Vec<Point3<f64>> = points.iter().map(|p| point3(*p)).collect();
                let hull = ConvexHull::from_points(&pts).map_err(|e| ModelError::Invariant {
                    path: format!("{path}.points"),
                    message: e.to_string(),
                })?;
                RigidGeometry {
                    shape: GeometryShape::ConvexHull(hull),
                    pose: pose.to_pose(),
                }
            }
            GeomFile::Mesh {
                vertices,
                faces,
                pose,
            } => RigidGeometry::mesh(
                vertices.iter().map(|p| point3(*p)).collect(),
                faces.clone(),
                pose.to_pose(),
            ),
        };
        geom.validate(path)?;
        Ok(geom)
    }

    pub fn from_geometry(g: &RigidGeometry) -> Self {
        let pose = PoseFile::from_pose(&g.pose);
        match &g.shape {
            GeometryShape::Box {
                center,
                half_extents,
            } => GeomFile::Box {
                center: arr3p(center),
                half_extents: arr3v(half_extents),
                pose,
            },
            GeometryShape::Sphere { center, radius } => GeomFile::Sphere {
                center: arr3p(center),
                radius: *radius,
                pose,
            },
            GeometryShape::ConvexHull(h) => GeomFile::ConvexHull {
                points: h.vertices.iter().map(arr3p).collect(),
                pose,
            },
            GeometryShape::Mesh { vertices, faces } => GeomFile::Mesh {
                vertices: vertices.iter().map(arr3p).collect(),
                faces: faces.clone(),
                pose,
            },
        }
    }
}

impl ObjectFile {
    pub fn to_object(&self, root: &str) -> Result<ArticulatedObject, ModelError> {
        let axis = vec3(self.joint.axis);
        if axis.norm() < 1e-9 {
            return Err(ModelError::Invariant {
                path: format!("{root}.joint.axis"),
                message: "axis must be a non-zero vector".to_string(),
            });
        }
        let joint = JointSpec {
            kind: self.joint.kind,
            axis: Unit::new_normalize(axis),
            pivot: point3(self.joint.pivot),
            limits: self.joint.limits,
            state: self.joint.state,
        };
        joint.validate(&format!("{root}.joint"))?;
        Ok(ArticulatedObject {
            base: self.base.to_geometry(&format!("{root}.base"))?,
            movable: self.movable.to_geometry(&format!("{root}.movable"))?,
            joint,
            pose: self.pose.to_pose(),
        })
    }

    pub fn from_object(obj: &ArticulatedObject) -> Self {
        Self {
            pose: PoseFile::from_pose(&obj.pose),
            base: GeomFile::from_geometry(&obj.base),
            movable: GeomFile::from_geometry(&obj.movable),
            joint: JointFile {
                kind: obj.joint.kind,
                axis: arr3v(obj.joint.axis.as_ref()),
                pivot: arr3p(&obj.joint.pivot),
                limits: obj.joint.limits,
                state: obj.joint.state,
            },
        }
    }
}

impl ToolFile {
    pub fn to_tool(&self) -> Tool {
        Tool {
            name: self.name.clone(),
            mount: self.mount.to_pose(),
            contact_spheres: self
                .spheres
                .iter()
                .map(|s| ToolSphere {
                    center: point3(s.center),
                    radius: s.radius,
                })
                .collect(),
            tip: point3(self.tip),
            geometry: None,
        }
    }

    pub fn from_tool(t: &Tool) -> Self {
        Self {
            name: t.name.clone(),
            mount: PoseFile::from_pose(&t.mount),
            spheres: t
                .contact_spheres
                .iter()
                .map(|s| ToolSphereFile {
                    center: arr3p(&s.center),
                    radius: s.radius,
                })
                .collect(),
            tip: arr3p(&t.tip),
        }
    }
}

impl SceneFile {
    pub fn to_scene(&self) -> Result<Scene, ModelError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ModelError::SchemaVersion(self.schema_version));
        }
        let object = self.object.to_object("object")?;
        let joints = self
            .robot
            .joints
            .iter()
            .enumerate()
            .map(|(i, j)| {
                let axis = vec3(j.axis);
                if axis.norm() < 1e-9 {
                    return Err(ModelError::Invariant {
                        path: format!("robot.joints[{i}].axis"),
                        message: "axis must be a non-zero vector".to_string(),
                    });
                }
                Ok(ChainJoint {
                    kind: j.kind,
                    axis: Unit::new_normalize(axis),
                    origin: j.origin.to_pose(),
                    limits: j.limits,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let robot = KinematicChain {
            joints,
            fingertip: Fingertip {
                offset: vec3(self.robot.fingertip.offset),
                radius: self.robot.fingertip.radius,
            },
            tool: self.robot.tool.as_ref().map(|t| t.to_tool()),
        };
        let scene = Scene {
            name: self.name.clone(),
            object,
            robot,
            robot_base: self.robot.base_pose.to_pose(),
            home_q: self.robot.home.clone(),
            table_height: self.table_height,
            camera: self.camera.clone().unwrap_or_default(),
            noise: self.noise.unwrap_or_default(),
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn from_scene(scene: &Scene) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            name: scene.name.clone(),
            table_height: scene.table_height,
            object: ObjectFile::from_object(&scene.object),
            robot: RobotFile {
                base_pose: PoseFile::from_pose(&scene.robot_base),
                joints: scene
                    .robot
                    .joints
                    .iter()
                    .map(|j| ChainJointFile {
                        kind: j.kind,
                        axis: arr3v(j.axis.as_ref()),
                        origin: PoseFile::from_pose(&j.origin),
                        limits: j.limits,
                    })
                    .collect(),
                fingertip: FingertipFile {
                    offset: arr3v(&scene.robot.fingertip.offset),
                    radius: scene.robot.fingertip.radius,
                },
                home: scene.home_q.clone(),
                tool: scene.robot.tool.as_ref().map(ToolFile::from_tool),
            },
            camera: Some(scene.camera.clone()),
            noise: Some(scene.noise),
        }
    }
}

pub fn load_scene(path: &Path) -> Result<Scene, ModelError> {
    let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file: SceneFile = serde_json::from_str(&text).map_err(|e| ModelError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    file.to_scene()
}

pub fn save_scene(scene: &Scene, path: &Path) -> Result<(), ModelError> {
    let file = SceneFile::from_scene(scene);
    let text = serde_json::to_string_pretty(&file).expect("scene serialization cannot fail");
    std::fs::write(path, text).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Twin export: the object schema plus reconstruction metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwinFile {
    pub schema_version: u32,
    pub object: ObjectFile,
    pub observed_displacement: f64,
    pub low_confidence: bool,
}

pub fn load_twin(path: &Path) -> Result<(ArticulatedObject, f64, bool), ModelError> {
    let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file: TwinFile = serde_json::from_str(&text).map_err(|e| ModelError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(ModelError::SchemaVersion(file.schema_version));
    }
    let obj = file.object.to_object("object")?;
    obj.validate("object")?;
    Ok((obj, file.observed_displacement, file.low_confidence))
}

pub fn save_twin(
    object: &ArticulatedObject,
    observed_displacement: f64,
    low_confidence: bool,
    path: &Path,
) -> Result<(), ModelError> {
    let file = TwinFile {
        schema_version: SCHEMA_VERSION,
        object: ObjectFile::from_object(object),
        observed_displacement,
        low_confidence,
    };
    let text = serde_json::to_string_pretty(&file).expect("twin serialization cannot fail");
    std::fs::write(path, text).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })
}
