//! Exact 3-D convex hulls (quickhull) with face planes and a volume centroid.

use nalgebra::{Point3, Vector3};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HullError {
    #[error("convex hull needs at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("input points are degenerate (collinear or coplanar)")]
    Degenerate,
}

/// A closed convex polytope: vertices, outward-oriented triangle faces, and
/// the face planes `n·x = d` (inside means `n·x − d ≤ 0` for every face).
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexHull {
    pub vertices: Vec<Point3<f64>>,
    pub faces: Vec<[u32; 3]>,
    planes: Vec<(Vector3<f64>, f64)>,
    centroid: Point3<f64>,
    volume: f64,
}

struct Face {
    verts: [u32; 3],
    normal: Vector3<f64>,
    offset: f64,
    conflicts: Vec<u32>,
    alive: bool,
}

impl Face {
    fn new(points: &[Point3<f64>], verts: [u32; 3]) -> Self {
        let a = points[verts[0] as usize];
        let b = points[verts[1] as usize];
        let c = points[verts[2] as usize];
        let mut normal = (b - a).cross(&(c - a));
        let len = normal.norm();
        if len > 0.0 {
            normal /= len;
        }
        let offset = normal.dot(&a.coords);
        Face {
            verts,
            normal,
            offset,
            conflicts: Vec::new(),
            alive: true,
        }
    }

    fn dist(&self, p: &Point3<f64>) -> f64 {
        self.normal.dot(&p.coords) - self.offset
    }
}

impl ConvexHull {
    /// Quickhull over `input`. Fails on < 4 points or (near-)degenerate sets.
    pub fn from_points(input: &[Point3<f64>]) -> Result<Self, HullError> {
        if input.len() < 4 {
            return Err(HullError::TooFewPoints(input.len()));
        }
        let pts: Vec<Point3<f64>> = input.to_vec();
        let bbox_diag = {
            let aabb = super::Aabb::from_points(&pts);
            aabb.diagonal()
        };
        if bbox_diag <= 0.0 {
            return Err(HullError::Degenerate);
        }
        let eps = 1e-9 * bbox_diag.max(1e-6);

        let (i0, i1) = farthest_pair(&pts);
        if (pts[i1] - pts[i0]).norm() < eps {
            return Err(HullError::Degenerate);
        }
        let i2 = farthest_from_line(&pts, i0, i1);
        let line_dist = dist_to_line(&pts[i2], &pts[i0], &pts[i1]);
        if line_dist < eps {
            return Err(HullError::Degenerate);
        }
        let n0 = (pts[i1] - pts[i0]).cross(&(pts[i2] - pts[i0]));
        let i3 = farthest_from_plane(&pts, &pts[i0], &n0);
        let plane_dist = n0.normalize().dot(&(pts[i3] - pts[i0])).abs();
        if plane_dist < eps {
            return Err(HullError::Degenerate);
        }

        // Orient the initial tetrahedron so every face points outward.
        let (a, b, c, d) = if n0.dot(&(pts[i3] - pts[i0])) < 0.0 {
            (i0, i1, i2, i3)
        } else {
            (i0, i2, i1, i3)
        };
        let mut faces: Vec<Face> = vec![
            Face::new(&pts, [a as u32, b as u32, c as u32]),
            Face::new(&pts, [a as u32, d as u32, b as u32]),
            Face::new(&pts, [b as u32, d as u32, c as u32]),
            Face::new(&pts, [c as u32, d as u32, a as u32]),
        ];

        // Conflict lists: every point strictly outside some face.
        for (i, p) in pts.iter().enumerate() {
            if i == a || i == b || i == c || i == d {
                continue;
            }
            for f in faces.iter_mut() {
                if f.dist(p) > eps {
                    f.conflicts.push(i as u32);
                    break;
                }
            }
        }

        loop {
            // Face with the farthest conflict point.
            let mut best: Option<(usize, u32, f64)> = None;
            for (fi, f) in faces.iter().enumerate() {
                if !f.alive || f.conflicts.is_empty() {
                    continue;
                }
                for &pi in &f.conflicts {
                    let dd = f.dist(&pts[pi as usize]);
                    if best.map_or(true, |(_, _, bd)| dd > bd) {
                        best = Some((fi, pi, dd));
                    }
                }
            }
            let Some((_, apex, _)) = best else { break };
            let apex_pt = pts[apex as usize];

            // All faces visible from the apex.
            let visible: Vec<usize> = faces
                .iter()
                .enumerate()
                .filter(|(_, f)| f.alive && f.dist(&apex_pt) > eps)
                .map(|(i, _)| i)
                .collect();

            // Horizon = directed edges of visible faces whose reverse edge is
            // not owned by another visible face.
            let mut edges: Vec<(u32, u32)> = Vec::new();
            for &fi in &visible {
                let v = faces[fi].verts;
                for k in 0..3 {
                    edges.push((v[k], v[(k + 1) % 3]));
                }
            }
            let horizon: Vec<(u32, u32)> = edges
                .iter()
                .copied()
                .filter(|(x, y)| !edges.contains(&(*y, *x)))
                .collect();

            let mut orphans: Vec<u32> = Vec::new();
            for &fi in &visible {
                faces[fi].alive = false;
                orphans.append(&mut faces[fi].conflicts);
            }

            let mut new_faces: Vec<usize> = Vec::new();
            for (x, y) in horizon {
                let f = Face::new(&pts, [x, y, apex]);
                new_faces.push(faces.len());
                faces.push(f);
            }

            for pi in orphans {
                if pi == apex {
                    continue;
                }
                let p = pts[pi as usize];
                for &fi in &new_faces {
                    if faces[fi].dist(&p) > eps {
                        faces[fi].conflicts.push(pi);
                        break;
                    }
                }
            }
        }

        // Reindex to the vertices actually on the hull.
        let mut remap: Vec<i64> = vec![-1; pts.len()];
        let mut vertices: Vec<Point3<f64>> = Vec::new();
        let mut out_faces: Vec<[u32; 3]> = Vec::new();
        let mut planes: Vec<(Vector3<f64>, f64)> = Vec::new();
        for f in faces.iter().filter(|f| f.alive) {
            let mut tri = [0u32; 3];
            for (k, &vi) in f.verts.iter().enumerate() {
                if remap[vi as usize] < 0 {
                    remap[vi as usize] = vertices.len() as i64;
                    vertices.push(pts[vi as usize]);
                }
                tri[k] = remap[vi as usize] as u32;
            }
            out_faces.push(tri);
            planes.push((f.normal, f.offset));
        }
        if vertices.len() < 4 {
            return Err(HullError::Degenerate);
        }

        let (volume, centroid) = volume_centroid(&vertices, &out_faces);
        Ok(ConvexHull {
            vertices,
            faces: out_faces,
            planes,
            centroid,
            volume,
        })
    }

    /// Hull of a possibly flat point set: coplanar inputs are inflated into a
    /// thin slab of the given half-thickness before hulling.
    pub fn from_points_inflated(
        input: &[Point3<f64>],
        half_thickness: f64,
    ) -> Result<Self, HullError> {
        match Self::from_points(input) {
            Ok(h) => Ok(h),
            Err(HullError::Degenerate) => {
                let n = plane_normal_estimate(input).ok_or(HullError::Degenerate)?;
                let mut fat: Vec<Point3<f64>> = Vec::with_capacity(input.len() * 2);
                for p in input {
                    fat.push(p + n * half_thickness);
                    fat.push(p - n * half_thickness);
                }
                Self::from_points(&fat)
            }
            Err(e) => Err(e),
        }
    }

    pub fn planes(&self) -> &[(Vector3<f64>, f64)] {
        &self.planes
    }

    pub fn centroid(&self) -> Point3<f64> {
        self.centroid
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Vertex maximizing `dir·x`.
    pub fn support(&self, dir: &Vector3<f64>) -> Point3<f64> {
        let mut best = self.vertices[0];
        let mut best_d = dir.dot(&best.coords);
        for v in &self.vertices[1..] {
            let d = dir.dot(&v.coords);
            if d > best_d {
                best_d = d;
                best = *v;
            }
        }
        best
    }

    /// `true` when `p` satisfies every face constraint within `tol`.
    pub fn contains(&self, p: &Point3<f64>, tol: f64) -> bool {
        self.planes
            .iter()
            .all(|(n, d)| n.dot(&p.coords) - d <= tol)
    }
}

fn farthest_pair(pts: &[Point3<f64>]) -> (usize, usize) {
    // Extreme points along each axis, then the farthest pair among them.
    let mut extremes = [0usize; 6];
    for (i, p) in pts.iter().enumerate() {
        for ax in 0..3 {
            if p[ax] < pts[extremes[ax]][ax] {
                extremes[ax] = i;
            }
            if p[ax] > pts[extremes[3 + ax]][ax] {
                extremes[3 + ax] = i;
            }
        }
    }
    let mut best = (extremes[0], extremes[3]);
    let mut best_d = -1.0;
    for &i in &extremes {
        for &j in &extremes {
            let d = (pts[j] - pts[i]).norm_squared();
            if d > best_d {
                best_d = d;
                best = (i, j);
            }
        }
    }
    best
}

fn dist_to_line(p: &Point3<f64>, a: &Point3<f64>, b: &Point3<f64>) -> f64 {
    let ab = b - a;
    let len = ab.norm();
    if len == 0.0 {
        return (p - a).norm();
    }
    (p - a).cross(&ab).norm() / len
}

fn farthest_from_line(pts: &[Point3<f64>], i0: usize, i1: usize) -> usize {
    let mut best = 0;
    let mut best_d = -1.0;
    for (i, p) in pts.iter().enumerate() {
        let d = dist_to_line(p, &pts[i0], &pts[i1]);
        if d > best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

fn farthest_from_plane(pts: &[Point3<f64>], origin: &Point3<f64>, n: &Vector3<f64>) -> usize {
    let mut best = 0;
    let mut best_d = -1.0;
    for (i, p) in pts.iter().enumerate() {
        let d = n.dot(&(p - origin)).abs();
        if d > best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

fn plane_normal_estimate(pts: &[Point3<f64>]) -> Option<Vector3<f64>> {
    if pts.len() < 3 {
        return None;
    }
    let mut centroid = Vector3::zeros();
    for p in pts {
        centroid += p.coords;
    }
    centroid /= pts.len() as f64;
    let mut cov = nalgebra::Matrix3::<f64>::zeros();
    for p in pts {
        let d = p.coords - centroid;
        cov += d * d.transpose();
    }
    let eig = nalgebra::SymmetricEigen::new(cov);
    let mut min_i = 0;
    for i in 1..3 {
        if eig.eigenvalues[i] < eig.eigenvalues[min_i] {
            min_i = i;
        }
    }
    let n = eig.eigenvectors.column(min_i).into_owned();
    let len = n.norm();
    if len == 0.0 {
        None
    } else {
        Some(n / len)
    }
}

/// Signed volume and volume centroid via tetrahedra against the origin.
fn volume_centroid(verts: &[Point3<f64>], faces: &[[u32; 3]]) -> (f64, Point3<f64>) {
    let mut vol = 0.0;
    let mut c = Vector3::zeros();
    for f in faces {
        let a = verts[f[0] as usize].coords;
        let b = verts[f[1] as usize].coords;
        let d = verts[f[2] as usize].coords;
        let v = a.dot(&b.cross(&d)) / 6.0;
        vol += v;
        c += (a + b + d) / 4.0 * v;
    }
    if vol.abs() < 1e-18 {
        // Practically flat: fall back to the vertex mean.
        let mut m = Vector3::zeros();
        for v in verts {
            m += v.coords;
        }
        (vol, Point3::from(m / verts.len() as f64))
    } else {
        (vol, Point3::from(c / vol))
    }
}
