//! Ray casting against the toolkit's primitives (all in the primitive's own
//! frame; callers transform rays between frames).

use nalgebra::{Point3, Vector3};

use super::hull::ConvexHull;

const T_MIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct Ray {
    pub origin: Point3<f64>,
    pub dir: Vector3<f64>,
}

impl Ray {
    pub fn new(origin: Point3<f64>, dir: Vector3<f64>) -> Self {
        Self {
            origin,
            dir: dir.normalize(),
        }
    }

    pub fn at(&self, t: f64) -> Point3<f64> {
        self.origin + self.dir * t
    }

    pub fn transformed(&self, iso: &super::Pose) -> Ray {
        Ray {
            origin: iso.transform_point(&self.origin),
            dir: iso.transform_vector(&self.dir),
        }
    }
}

/// Nearest positive hit parameter against a centered axis-aligned box.
pub fn ray_box(ray: &Ray, half_extents: &Vector3<f64>) -> Option<f64> {
    let mut t_near = f64::NEG_INFINITY;
    let mut t_far = f64::INFINITY;
    for i in 0..3 {
        if ray.dir[i].abs() < 1e-15 {
            if ray.origin[i].abs() > half_extents[i] {
                return None;
            }
        } else {
            let inv = 1.0 / ray.dir[i];
            let mut t0 = (-half_extents[i] - ray.origin[i]) * inv;
            let mut t1 = (half_extents[i] - ray.origin[i]) * inv;
            if t0 > t1 {
                std::mem::swap(&mut t0, &mut t1);
            }
            t_near = t_near.max(t0);
            t_far = t_far.min(t1);
            if t_near > t_far {
                return None;
            }
        }
    }
    if t_near > T_MIN {
        Some(t_near)
    } else if t_far > T_MIN {
        Some(t_far)
    } else {
        None
    }
}

/// Nearest positive hit parameter against a sphere at `center`.
pub fn ray_sphere(ray: &Ray, center: &Point3<f64>, radius: f64) -> Option<f64> {
    let oc = ray.origin - center;
    let b = oc.dot(&ray.dir);
    let c = oc.norm_squared() - radius * radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let t0 = -b - sq;
    let t1 = -b + sq;
    if t0 > T_MIN {
        Some(t0)
    } else if t1 > T_MIN {
        Some(t1)
    } else {
        None
    }
}

/// Nearest positive hit parameter against a convex hull, by clipping the ray
/// against every face plane.
pub fn ray_hull(ray: &Ray, hull: &ConvexHull) -> Option<f64> {
    let mut t_near = f64::NEG_INFINITY;
    let mut t_far = f64::INFINITY;
    for (n, d) in hull.planes() {
        let denom = n.dot(&ray.dir);
        let value = n.dot(&ray.origin.coords) - d;
        if denom.abs() < 1e-15 {
            if value > 0.0 {
                return None;
            }
        } else {
            let t = -value / denom;
            if denom < 0.0 {
                t_near = t_near.max(t);
            } else {
                t_far = t_far.min(t);
            }
            if t_near > t_far {
                return None;
            }
        }
    }
    if t_near > T_MIN {
        Some(t_near)
    } else if t_far > T_MIN && t_near <= t_far {
        Some(t_far)
    } else {
        None
    }
}

/// Möller–Trumbore ray/triangle intersection.
pub fn ray_triangle(
    ray: &Ray,
    a: &Point3<f64>,
    b: &Point3<f64>,
    c: &Point3<f64>,
) -> Option<f64> {
    let e1 = b - a;
    let e2 = c - a;
    let pvec = ray.dir.cross(&e2);
    let det = e1.dot(&pvec);
    if det.abs() < 1e-15 {
        return None;
    }
    let inv_det = 1.0 / det;
    let tvec = ray.origin - a;
    let u = tvec.dot(&pvec) * inv_det;
    if !(-1e-12..=1.0 + 1e-12).contains(&u) {
        return None;
    }
    let qvec = tvec.cross(&e1);
    let v = ray.dir.dot(&qvec) * inv_det;
    if v < -1e-12 || u + v > 1.0 + 1e-12 {
        return None;
    }
    let t = e2.dot(&qvec) * inv_det;
    if t > T_MIN {
        Some(t)
    } else {
        None
    }
}

/// Nearest positive hit over a triangle soup.
pub fn ray_mesh(ray: &Ray, vertices: &[Point3<f64>], faces: &[[u32; 3]]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for f in faces {
        if let Some(t) = ray_triangle(
            ray,
            &vertices[f[0] as usize],
            &vertices[f[1] as usize],
            &vertices[f[2] as usize],
        ) {
            if best.map_or(true, |b| t < b) {
                best = Some(t);
            }
        }
    }
    best
}

/// Hit parameter against the horizontal plane `z = height`.
pub fn ray_plane_z(ray: &Ray, height: f64) -> Option<f64> {
    if ray.dir.z.abs() < 1e-15 {
        return None;
    }
    let t = (height - ray.origin.z) / ray.dir.z;
    if t > T_MIN {
        Some(t)
    } else {
        None
    }
}
