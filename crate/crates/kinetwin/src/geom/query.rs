//! Proximity queries: signed distance from a point to each primitive, with a
//! witness point and outward normal. Boxes, spheres, and hulls report true
//! signed distance (negative inside); triangle meshes report unsigned
//! distance, which is all the shallow-contact regime needs.

use nalgebra::{Point3, Vector3};

use super::hull::ConvexHull;

/// Result of a point proximity query, in the same frame as the query point.
#[derive(Debug, Clone, Copy)]
pub struct SurfaceHit {
    /// Distance from the query point to the surface; negative inside.
    pub dist: f64,
    /// Closest point on the surface.
    pub point: Point3<f64>,
    /// Outward surface normal at the witness point.
    pub normal: Vector3<f64>,
}

/// Sphere centered at `c` with radius `r`.
pub fn point_to_sphere(p: &Point3<f64>, c: &Point3<f64>, r: f64) -> SurfaceHit {
    let d = p - c;
    let len = d.norm();
    let normal = if len > 1e-12 {
        d / len
    } else {
        Vector3::z()
    };
    SurfaceHit {
        dist: len - r,
        point: c + normal * r,
        normal,
    }
}

/// Axis-aligned box centered at the origin with half extents `h` (local frame).
pub fn point_to_box(p: &Point3<f64>, h: &Vector3<f64>) -> SurfaceHit {
    let inside = (0..3).all(|i| p[i].abs() <= h[i]);
    if !inside {
        let mut w = *p;
        for i in 0..3 {
            w[i] = w[i].clamp(-h[i], h[i]);
        }
        let d = p - w;
        let len = d.norm();
        if len > 1e-12 {
            return SurfaceHit {
                dist: len,
                point: w,
                normal: d / len,
            };
        }
        // Numerically on the surface: fall through to the face-normal path.
    }
    // Closest face plane.
    let mut best_axis = 0;
    let mut best_gap = f64::INFINITY;
    for i in 0..3 {
        let gap = h[i] - p[i].abs();
        if gap < best_gap {
            best_gap = gap;
            best_axis = i;
        }
    }
    let sign = if p[best_axis] >= 0.0 { 1.0 } else { -1.0 };
    let mut normal = Vector3::zeros();
    normal[best_axis] = sign;
    let mut w = *p;
    w[best_axis] = sign * h[best_axis];
    SurfaceHit {
        dist: -best_gap,
        point: w,
        normal,
    }
}

/// Convex hull in its own frame. Interior distance is exact via face planes;
/// exterior via the closest hull triangle.
pub fn point_to_hull(p: &Point3<f64>, hull: &ConvexHull) -> SurfaceHit {
    let mut max_plane = f64::NEG_INFINITY;
    let mut max_idx = 0;
    for (i, (n, d)) in hull.planes().iter().enumerate() {
        let v = n.dot(&p.coords) - d;
        if v > max_plane {
            max_plane = v;
            max_idx = i;
        }
    }
    if max_plane <= 0.0 {
        let (n, _) = hull.planes()[max_idx];
        SurfaceHit {
            dist: max_plane,
            point: p - n * max_plane,
            normal: n,
        }
    } else {
        let (w, fi) = closest_on_tri_set(p, &hull.vertices, &hull.faces);
        let d = p - w;
        let len = d.norm();
        let normal = if len > 1e-9 {
            d / len
        } else {
            hull.planes()[fi].0
        };
        SurfaceHit {
            dist: len,
            point: w,
            normal,
        }
    }
}

/// Triangle soup in its own frame; `dist` is unsigned.
pub fn point_to_mesh(p: &Point3<f64>, vertices: &[Point3<f64>], faces: &[[u32; 3]]) -> SurfaceHit {
    let (w, fi) = closest_on_tri_set(p, vertices, faces);
    let d = p - w;
    let len = d.norm();
    let normal = if len > 1e-9 {
        d / len
    } else {
        triangle_normal(vertices, &faces[fi])
    };
    SurfaceHit {
        dist: len,
        point: w,
        normal,
    }
}

fn triangle_normal(vertices: &[Point3<f64>], f: &[u32; 3]) -> Vector3<f64> {
    let a = vertices[f[0] as usize];
    let b = vertices[f[1] as usize];
    let c = vertices[f[2] as usize];
    let n = (b - a).cross(&(c - a));
    let len = n.norm();
    if len > 1e-15 {
        n / len
    } else {
        Vector3::z()
    }
}

fn closest_on_tri_set(
    p: &Point3<f64>,
    vertices: &[Point3<f64>],
    faces: &[[u32; 3]],
) -> (Point3<f64>, usize) {
    debug_assert!(!faces.is_empty());
    let mut best = vertices[faces[0][0] as usize];
    let mut best_d = f64::INFINITY;
    let mut best_f = 0;
    for (fi, f) in faces.iter().enumerate() {
        let q = super::closest_point_on_triangle(
            p,
            &vertices[f[0] as usize],
            &vertices[f[1] as usize],
            &vertices[f[2] as usize],
        );
        let d = (p - q).norm_squared();
        if d < best_d {
            best_d = d;
            best = q;
            best_f = fi;
        }
    }
    (best, best_f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_query_outside_and_inside() {
        let h = Vector3::new(1.0, 2.0, 3.0);
        let hit = point_to_box(&Point3::new(3.0, 0.0, 0.0), &h);
        assert!((hit.dist - 2.0).abs() < 1e-12);
        assert!((hit.normal - Vector3::x()).norm() < 1e-12);
        assert!((hit.point - Point3::new(1.0, 0.0, 0.0)).norm() < 1e-12);

        let hit = point_to_box(&Point3::new(0.5, 0.0, 0.0), &h);
        assert!((hit.dist + 0.5).abs() < 1e-12);
        assert!((hit.normal - Vector3::x()).norm() < 1e-12);

        // corner region
        let hit = point_to_box(&Point3::new(2.0, 3.0, 4.0), &h);
        assert!((hit.dist - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn hull_query_matches_box_closed_form() {
        let mut pts = Vec::new();
        for &x in &[-1.0, 1.0] {
            for &y in &[-2.0, 2.0] {
                for &z in &[-3.0, 3.0] {
                    pts.push(Point3::new(x, y, z));
                }
            }
        }
        let hull = ConvexHull::from_points(&pts).unwrap();
        let h = Vector3::new(1.0, 2.0, 3.0);
        let probes = [
            Point3::new(2.5, 0.1, -0.3),
            Point3::new(0.2, -0.4, 0.9),
            Point3::new(-3.0, 4.0, 5.0),
            Point3::new(0.9, 1.9, 2.9),
        ];
        for p in &probes {
            let a = point_to_box(p, &h);
            let b = point_to_hull(p, &hull);
            assert!(
                (a.dist - b.dist).abs() < 1e-9,
                "dist mismatch at {p}: {} vs {}",
                a.dist,
                b.dist
            );
        }
    }

    #[test]
    fn sphere_query() {
        let hit = point_to_sphere(&Point3::new(0.0, 5.0, 0.0), &Point3::origin(), 2.0);
        assert!((hit.dist - 3.0).abs() < 1e-12);
        assert!((hit.point - Point3::new(0.0, 2.0, 0.0)).norm() < 1e-12);
    }
}
