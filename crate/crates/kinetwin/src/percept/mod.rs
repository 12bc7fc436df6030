//! Synthetic single-view depth sensing: camera pose sampling, per-pixel ray
//! casting with Gaussian depth noise and pixel dropout, cropping, farthest
//! point sampling, and PLY persistence.

pub mod ply;

use nalgebra::{Point3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Aabb, Ray};
use crate::model::{CameraRanges, Scene, SensorNoise};
use crate::seeds;

#[derive(Debug, Error)]
pub enum PerceptError {
    #[error("empty sampling range [{0}, {1})")]
    EmptyRange(f64, f64),
    #[error("invalid camera parameter: {0}")]
    InvalidCamera(String),
    #[error("invalid noise parameter: {0}")]
    InvalidNoise(String),
    #[error("camera origin lies inside scene geometry")]
    CameraInsideGeometry,
    #[error("operation produced an empty point cloud")]
    EmptyResult,
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("requested sample count must be positive")]
    ZeroCount,
    #[error("joint state {0} outside object limits")]
    StateOutOfLimits(f64),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("PLY parse error: {0}")]
    PlyParse(String),
}

/// Pinhole camera on a sphere around a look-at point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct CameraPose {
    pub azimuth_deg: f64,
    pub altitude_deg: f64,
    pub radius: f64,
    pub look_at: [f64; 3],
    pub width: u32,
    pub height: u32,
    pub vfov_deg: f64,
}

impl CameraPose {
    pub fn validate(&self) -> Result<(), PerceptError> {
        if !(self.altitude_deg > 0.0 && self.altitude_deg < 90.0) {
            return Err(PerceptError::InvalidCamera(format!(
                "altitude {} must be in (0, 90) degrees",
                self.altitude_deg
            )));
        }
        if self.radius <= 0.0 {
            return Err(PerceptError::InvalidCamera("radius must be positive".into()));
        }
        if self.width == 0 || self.height == 0 || self.vfov_deg <= 0.0 {
            return Err(PerceptError::InvalidCamera("degenerate intrinsics".into()));
        }
        Ok(())
    }

    pub fn eye(&self) -> Point3<f64> {
        let az = self.azimuth_deg.to_radians();
        let alt = self.altitude_deg.to_radians();
        let look = Point3::new(self.look_at[0], self.look_at[1], self.look_at[2]);
        look + Vector3::new(
            self.radius * alt.cos() * az.cos(),
            self.radius * alt.cos() * az.sin(),
            self.radius * alt.sin(),
        )
    }

    /// Camera basis (right, up, forward), world `+z` as the up reference.
    pub fn basis(&self) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
        let look = Point3::new(self.look_at[0], self.look_at[1], self.look_at[2]);
        let forward = (look - self.eye()).normalize();
        let right = forward.cross(&Vector3::z()).normalize();
        let up = right.cross(&forward);
        (right, up, forward)
    }

    /// World-space ray through pixel (col, row), pixel centers.
    pub fn pixel_ray(&self, col: u32, row: u32) -> Ray {
        let (right, up, forward) = self.basis();
        let tan_half = (self.vfov_deg.to_radians() / 2.0).tan();
        let aspect = self.width as f64 / self.height as f64;
        let sx = (2.0 * (col as f64 + 0.5) / self.width as f64 - 1.0) * tan_half * aspect;
        let sy = (1.0 - 2.0 * (row as f64 + 0.5) / self.height as f64) * tan_half;
        Ray::new(self.eye(), right * sx + up * sy + forward)
    }
}

/// Depth-noise model: Gaussian sigma along the ray plus per-pixel dropout.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct NoiseConfig {
    pub depth_sigma: f64,
    pub dropout: f64,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn none(seed: u64) -> Self {
        Self {
            depth_sigma: 0.0,
            dropout: 0.0,
            seed,
        }
    }

    pub fn from_sensor(n: &SensorNoise, seed: u64) -> Self {
        Self {
            depth_sigma: n.depth_sigma,
            dropout: n.dropout,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), PerceptError> {
        if self.depth_sigma < 0.0 {
            return Err(PerceptError::InvalidNoise("sigma must be >= 0".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(PerceptError::InvalidNoise("dropout must be in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct Provenance {
    pub camera: Option<CameraPose>,
    pub noise: Option<NoiseConfig>,
    pub scene_id: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    World,
    Camera,
}

/// Ordered 3-D samples with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point3<f64>>,
    pub frame: Frame,
    pub provenance: Provenance,
}

impl PointCloud {
    pub fn new(points: Vec<Point3<f64>>, frame: Frame) -> Self {
        Self {
            points,
            frame,
            provenance: Provenance::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> Point3<f64> {
        let mut m = Vector3::zeros();
        for p in &self.points {
            m += p.coords;
        }
        Point3::from(m / self.points.len().max(1) as f64)
    }

    pub fn aabb(&self) -> Aabb {
        Aabb::from_points(&self.points)
    }
}

/// Which scene entity a pixel ray hit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HitId {
    Base,
    Movable,
    Table,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PixelHit {
    pub id: HitId,
    pub t: f64,
}

/// Per-pixel hit record (row-major), usable as a segmentation oracle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RenderMap {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<Option<PixelHit>>,
}

impl RenderMap {
    pub fn hit(&self, col: u32, row: u32) -> Option<PixelHit> {
        self.pixels[(row * self.width + col) as usize]
    }
}

/// Uniformly samples a camera pose from half-open azimuth/altitude ranges.
/// A degenerate range `[a, a]` yields exactly `a`.
pub fn sample_camera(
    azimuth_deg: [f64; 2],
    altitude_deg: [f64; 2],
    radius: f64,
    look_at: Point3<f64>,
    seed: u64,
) -> Result<CameraPose, PerceptError> {
    let mut rng = seeds::rng(seed, &[0x6361_6d65_7261]);
    let mut draw = |range: [f64; 2]| -> Result<f64, PerceptError> {
        if range[0] > range[1] {
            Err(PerceptError::EmptyRange(range[0], range[1]))
        } else if range[0] == range[1] {
            Ok(range[0])
        } else {
            Ok(rng.gen_range(range[0]..range[1]))
        }
    };
    let cam = CameraPose {
        azimuth_deg: draw(azimuth_deg)?,
        altitude_deg: draw(altitude_deg)?,
        radius,
        look_at: [look_at.x, look_at.y, look_at.z],
        width: 160,
        height: 120,
        vfov_deg: 45.0,
    };
    cam.validate()?;
    Ok(cam)
}

/// Samples a camera from the ranges stored in a scene file.
pub fn sample_camera_from_ranges(
    ranges: &CameraRanges,
    seed: u64,
) -> Result<CameraPose, PerceptError> {
    let mut cam = sample_camera(
        ranges.azimuth_deg,
        ranges.altitude_deg,
        ranges.radius,
        Point3::new(ranges.look_at[0], ranges.look_at[1], ranges.look_at[2]),
        seed,
    )?;
    cam.width = ranges.width;
    cam.height = ranges.height;
    cam.vfov_deg = ranges.vfov_deg;
    cam.validate()?;
    Ok(cam)
}

/// Noise-free per-pixel render of the scene at object state `s`.
pub fn render_map(scene: &Scene, s: f64, cam: &CameraPose) -> Result<RenderMap, PerceptError> {
    cam.validate()?;
    if !scene.object.joint.contains(s) {
        return Err(PerceptError::StateOutOfLimits(s));
    }
    let eye = cam.eye();
    let base_parent = scene.object.base_parent_world();
    let movable_parent = scene.object.movable_parent_world(s);
    if scene.object.base.surface_query(&base_parent, &eye).dist < 0.0
        || scene.object.movable.surface_query(&movable_parent, &eye).dist < 0.0
    {
        return Err(PerceptError::CameraInsideGeometry);
    }

    let mut pixels = Vec::with_capacity((cam.width * cam.height) as usize);
    for row in 0..cam.height {
        for col in 0..cam.width {
            let ray = cam.pixel_ray(col, row);
            let mut best: Option<PixelHit> = None;
            let mut consider = |id: HitId, t: Option<f64>| {
                if let Some(t) = t {
                    if best.map_or(true, |b| t < b.t) {
                        best = Some(PixelHit { id, t });
                    }
                }
            };
            consider(HitId::Base, scene.object.base.raycast(&base_parent, &ray));
            consider(
                HitId::Movable,
                scene.object.movable.raycast(&movable_parent, &ray),
            );
            consider(
                HitId::Table,
                crate::geom::ray::ray_plane_z(&ray, scene.table_height),
            );
            pixels.push(best);
        }
    }
    Ok(RenderMap {
        width: cam.width,
        height: cam.height,
        pixels,
    })
}

/// Renders a world-frame point cloud and reports which pixel produced each
/// point, along with the noise-free hit map.
pub fn render_point_cloud_traced(
    scene: &Scene,
    s: f64,
    cam: &CameraPose,
    noise: &NoiseConfig,
) -> Result<(PointCloud, Vec<u32>, RenderMap), PerceptError> {
    noise.validate()?;
    let map = render_map(scene, s, cam)?;
    let mut rng = seeds::rng(noise.seed, &[0x7265_6e64_6572]);
    let mut points = Vec::new();
    let mut pixel_of_point = Vec::new();
    for (idx, px) in map.pixels.iter().enumerate() {
        let Some(hit) = px else { continue };
        // Draw per hit pixel in row-major order (deterministic).
        let z: f64 = sample_standard_normal(&mut rng);
        let u: f64 = rng.gen::<f64>();
        if u < noise.dropout {
            continue;
        }
        let row = idx as u32 / map.width;
        let col = idx as u32 % map.width;
        let ray = cam.pixel_ray(col, row);
        let t = hit.t + noise.depth_sigma * z;
        points.push(ray.at(t));
        pixel_of_point.push(idx as u32);
    }
    if points.is_empty() {
        return Err(PerceptError::EmptyResult);
    }
    let cloud = PointCloud {
        points,
        frame: Frame::World,
        provenance: Provenance {
            camera: Some(*cam),
            noise: Some(*noise),
            scene_id: Some(scene.name.clone()),
        },
    };
    Ok((cloud, pixel_of_point, map))
}

/// Renders a world-frame point cloud: one ray per pixel, nearest hit, depth
/// perturbed along the ray, pixels dropped independently.
pub fn render_point_cloud(
    scene: &Scene,
    s: f64,
    cam: &CameraPose,
    noise: &NoiseConfig,
) -> Result<PointCloud, PerceptError> {
    render_point_cloud_traced(scene, s, cam, noise).map(|(c, _, _)| c)
}

fn sample_standard_normal(rng: &mut impl Rng) -> f64 {
    // Box-Muller; two uniforms per draw keeps the stream layout fixed.
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Subset of points strictly inside `bounds`, order preserved.
pub fn crop_bbox(cloud: &PointCloud, bounds: &Aabb) -> Result<PointCloud, PerceptError> {
    if cloud.is_empty() {
        return Err(PerceptError::EmptyCloud);
    }
    let points: Vec<Point3<f64>> = cloud
        .points
        .iter()
        .filter(|p| bounds.contains(p))
        .copied()
        .collect();
    if points.is_empty() {
        return Err(PerceptError::EmptyResult);
    }
    Ok(PointCloud {
        points,
        frame: cloud.frame,
        provenance: cloud.provenance.clone(),
    })
}

/// Crop that also reports the retained indices (for test oracles).
pub fn crop_bbox_indices(cloud: &PointCloud, bounds: &Aabb) -> Vec<usize> {
    cloud
        .points
        .iter()
        .enumerate()
        .filter(|(_, p)| bounds.contains(p))
        .map(|(i, _)| i)
        .collect()
}

/// Moves the centroid to the origin; returns the subtracted offset.
pub fn normalize_center(cloud: &PointCloud) -> Result<(PointCloud, Vector3<f64>), PerceptError> {
    if cloud.is_empty() {
        return Err(PerceptError::EmptyCloud);
    }
    let offset = cloud.centroid().coords;
    let points = cloud.points.iter().map(|p| p - offset).map(Point3::from).collect();
    Ok((
        PointCloud {
            points,
            frame: cloud.frame,
            provenance: cloud.provenance.clone(),
        },
        offset,
    ))
}

/// Indices chosen by seeded farthest-point sampling (input larger than `n`),
/// or the whole input plus random repeats (input at most `n`).
pub fn downsample_indices(cloud: &PointCloud, n: usize, seed: u64) -> Result<Vec<usize>, PerceptError> {
    if n == 0 {
        return Err(PerceptError::ZeroCount);
    }
    if cloud.is_empty() {
        return Err(PerceptError::EmptyCloud);
    }
    let len = cloud.len();
    let mut rng = seeds::rng(seed, &[0x6670_73]);
    if len <= n {
        let mut idx: Vec<usize> = (0..len).collect();
        while idx.len() < n {
            idx.push(rng.gen_range(0..len));
        }
        return Ok(idx);
    }
    let pts = &cloud.points;
    let mut selected = Vec::with_capacity(n);
    let first = rng.gen_range(0..len);
    selected.push(first);
    let mut best = vec![f64::INFINITY; len];
    let mut last = first;
    while selected.len() < n {
        let lp = pts[last];
        let mut far_i = 0;
        let mut far_d = f64::NEG_INFINITY;
        for (i, p) in pts.iter().enumerate() {
            let d = (p - lp).norm_squared();
            if d < best[i] {
                best[i] = d;
            }
            if best[i] > far_d {
                far_d = best[i];
                far_i = i;
            }
        }
        selected.push(far_i);
        last = far_i;
    }
    Ok(selected)
}

/// Downsamples to exactly `n` points (farthest-point sampling when shrinking,
/// resampling with replacement when growing).
pub fn downsample(cloud: &PointCloud, n: usize, seed: u64) -> Result<PointCloud, PerceptError> {
    let idx = downsample_indices(cloud, n, seed)?;
    Ok(PointCloud {
        points: idx.iter().map(|&i| cloud.points[i]).collect(),
        frame: cloud.frame,
        provenance: cloud.provenance.clone(),
    })
}

pub use ply::{read_ply, write_ply};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        ArticulatedObject, JointKind, JointSpec, RigidGeometry, SensorNoise,
    };
    use crate::geom::Pose;
    use approx::assert_relative_eq;

    pub(crate) fn unit_box_scene() -> Scene {
        let object = ArticulatedObject {
            base: RigidGeometry::boxed(
                Point3::new(0.0, 0.0, 0.5),
                Vector3::new(0.5, 0.5, 0.5),
                Pose::identity(),
            ),
            movable: RigidGeometry::boxed(
                Point3::new(0.0, 0.0, 1.25),
                Vector3::new(0.2, 0.2, 0.2),
                Pose::identity(),
            ),
            joint: JointSpec::new(
                JointKind::Prismatic,
                Vector3::x(),
                Point3::origin(),
                [-0.5, 0.5],
                0.0,
            )
            .unwrap(),
            pose: Pose::identity(),
        };
        let robot = crate::model::KinematicChain {
            joints: vec![crate::model::ChainJoint {
                kind: JointKind::Prismatic,
                axis: Vector3::x_axis(),
                origin: Pose::identity(),
                limits: [-3.0, 3.0],
            }],
            fingertip: crate::model::Fingertip {
                offset: Vector3::new(0.0, 0.0, 0.0),
                radius: 0.01,
            },
            tool: None,
        };
        Scene {
            name: "unit-box".to_string(),
            object,
            robot,
            robot_base: Pose::translation(-3.0, 0.0, 1.0),
            home_q: vec![0.0],
            table_height: 0.0,
            camera: CameraRanges::default(),
            noise: SensorNoise::default(),
        }
    }

    #[test]
    fn degenerate_range_returns_endpoint() {
        let cam = sample_camera([30.0, 30.0], [20.0, 20.0], 1.0, Point3::origin(), 5).unwrap();
        assert_eq!(cam.azimuth_deg, 30.0);
        assert_eq!(cam.altitude_deg, 20.0);
    }

    #[test]
    fn sampled_pose_within_ranges_and_deterministic() {
        let a = sample_camera([-60.0, 60.0], [15.0, 45.0], 1.2, Point3::origin(), 7).unwrap();
        let b = sample_camera([-60.0, 60.0], [15.0, 45.0], 1.2, Point3::origin(), 7).unwrap();
        assert_eq!(a, b);
        assert!((-60.0..60.0).contains(&a.azimuth_deg));
        assert!((15.0..45.0).contains(&a.altitude_deg));
    }

    #[test]
    fn empty_range_is_error() {
        assert!(matches!(
            sample_camera([10.0, -10.0], [15.0, 45.0], 1.0, Point3::origin(), 0),
            Err(PerceptError::EmptyRange(_, _))
        ));
    }

    #[test]
    fn zero_noise_points_lie_on_surfaces() {
        let scene = unit_box_scene();
        let cam = CameraPose {
            azimuth_deg: 20.0,
            altitude_deg: 30.0,
            radius: 3.0,
            look_at: [0.0, 0.0, 0.8],
            width: 64,
            height: 48,
            vfov_deg: 45.0,
        };
        let cloud =
            render_point_cloud(&scene, 0.0, &cam, &NoiseConfig::none(1)).unwrap();
        assert!(!cloud.is_empty());
        let base_parent = scene.object.base_parent_world();
        let mov_parent = scene.object.movable_parent_world(0.0);
        for p in &cloud.points {
            let d_base = scene.object.base.surface_query(&base_parent, p).dist.abs();
            let d_mov = scene.object.movable.surface_query(&mov_parent, p).dist.abs();
            let d_table = (p.z - scene.table_height).abs();
            let d = d_base.min(d_mov).min(d_table);
            assert!(d <= 1e-6, "point {p} off-surface by {d}");
        }
    }

    #[test]
    fn render_is_deterministic_per_seed() {
        let scene = unit_box_scene();
        let cam = sample_camera_from_ranges(&scene.camera, 3).unwrap();
        let noise = NoiseConfig {
            depth_sigma: 0.002,
            dropout: 0.02,
            seed: 9,
        };
        let a = render_point_cloud(&scene, 0.0, &cam, &noise).unwrap();
        let b = render_point_cloud(&scene, 0.0, &cam, &noise).unwrap();
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn clouds_differ_only_at_movable_pixels() {
        let scene = unit_box_scene();
        let cam = sample_camera_from_ranges(&scene.camera, 4).unwrap();
        let noise = NoiseConfig::none(2);
        let (c0, px0, m0) = render_point_cloud_traced(&scene, 0.0, &cam, &noise).unwrap();
        let (c1, px1, m1) = render_point_cloud_traced(&scene, 0.3, &cam, &noise).unwrap();
        let movable_pixel = |map: &RenderMap, idx: u32| {
            matches!(
                map.pixels[idx as usize],
                Some(PixelHit {
                    id: HitId::Movable,
                    ..
                })
            )
        };
        // Build per-pixel lookup for both clouds.
        let mut by_pixel0 = std::collections::BTreeMap::new();
        for (i, &px) in px0.iter().enumerate() {
            by_pixel0.insert(px, c0.points[i]);
        }
        for (i, &px) in px1.iter().enumerate() {
            let involved = movable_pixel(&m0, px) || movable_pixel(&m1, px);
            if let Some(p0) = by_pixel0.get(&px) {
                let same = (p0 - c1.points[i]).norm() < 1e-12;
                assert!(
                    same || involved,
                    "pixel {px} changed without movable involvement"
                );
            }
        }
    }

    #[test]
    fn crop_superset_box_is_identity() {
        let scene = unit_box_scene();
        let cam = sample_camera_from_ranges(&scene.camera, 5).unwrap();
        let cloud = render_point_cloud(&scene, 0.0, &cam, &NoiseConfig::none(3)).unwrap();
        let big = Aabb::new(Point3::new(-100.0, -100.0, -100.0), Point3::new(100.0, 100.0, 100.0));
        let cropped = crop_bbox(&cloud, &big).unwrap();
        assert_eq!(cropped.points, cloud.points);
    }

    #[test]
    fn crop_empty_result_is_error() {
        let cloud = PointCloud::new(vec![Point3::new(0.0, 0.0, 1.0)], Frame::World);
        let below = Aabb::new(Point3::new(-1.0, -1.0, -3.0), Point3::new(1.0, 1.0, -2.0));
        assert!(matches!(
            crop_bbox(&cloud, &below),
            Err(PerceptError::EmptyResult)
        ));
    }

    #[test]
    fn crop_excludes_table_hits() {
        let scene = unit_box_scene();
        let cam = sample_camera_from_ranges(&scene.camera, 6).unwrap();
        let (cloud, px, map) =
            render_point_cloud_traced(&scene, 0.0, &cam, &NoiseConfig::none(4)).unwrap();
        let object_box = Aabb::new(Point3::new(-0.8, -0.8, 0.001), Point3::new(0.8, 0.8, 2.0));
        let kept = crop_bbox_indices(&cloud, &object_box);
        for &i in &kept {
            let hit = map.pixels[px[i] as usize].unwrap();
            assert_ne!(hit.id, HitId::Table, "table point survived the crop");
        }
        // All object hits above the floor margin should survive.
        let n_object_points = px
            .iter()
            .enumerate()
            .filter(|(i, &p)| {
                map.pixels[p as usize].unwrap().id != HitId::Table
                    && cloud.points[*i].z > 0.001
                    && object_box.contains(&cloud.points[*i])
            })
            .count();
        assert_eq!(kept.len(), n_object_points);
    }

    #[test]
    fn normalize_center_properties() {
        let cloud = PointCloud::new(
            vec![
                Point3::new(1.0, 2.0, 3.0),
                Point3::new(2.0, 3.0, 4.0),
                Point3::new(3.0, 4.0, 5.0),
            ],
            Frame::World,
        );
        let (centered, offset) = normalize_center(&cloud).unwrap();
        assert_relative_eq!(offset.x, 2.0, epsilon = 1e-12);
        assert!(centered.centroid().coords.norm() < 1e-9);
        // De-normalizing reproduces the input exactly.
        for (a, b) in cloud.points.iter().zip(&centered.points) {
            assert_eq!(*a, Point3::from(b.coords + offset));
        }
        // Already-centered cloud gives a zero offset.
        let (_, offset2) = normalize_center(&centered).unwrap();
        assert!(offset2.norm() < 1e-9);
    }

    #[test]
    fn fps_shrinks_to_exact_subset() {
        let mut rng = seeds::rng(42, &[]);
        let pts: Vec<Point3<f64>> = (0..10_000)
            .map(|_| {
                Point3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                )
            })
            .collect();
        let cloud = PointCloud::new(pts, Frame::World);
        let down = downsample(&cloud, 2000, 7).unwrap();
        assert_eq!(down.len(), 2000);
        let set: std::collections::BTreeSet<_> = cloud
            .points
            .iter()
            .map(|p| format!("{:?}", p))
            .collect();
        for p in &down.points {
            assert!(set.contains(&format!("{:?}", p)));
        }
        // Determinism.
        let again = downsample(&cloud, 2000, 7).unwrap();
        assert_eq!(down.points, again.points);
    }

    #[test]
    fn downsample_identity_and_growth() {
        let cloud = PointCloud::new(
            (0..5).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect(),
            Frame::World,
        );
        let same = downsample(&cloud, 5, 1).unwrap();
        assert_eq!(same.points, cloud.points);
        let grown = downsample(&cloud, 9, 1).unwrap();
        assert_eq!(grown.len(), 9);
        assert_eq!(&grown.points[..5], &cloud.points[..]);
        assert!(matches!(downsample(&cloud, 0, 1), Err(PerceptError::ZeroCount)));
    }
}
