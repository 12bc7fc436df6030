//! ASCII PLY persistence for point clouds. The frame tag and provenance ride
//! along as `comment` lines and round-trip verbatim.

use std::path::Path;

use nalgebra::Point3;

use super::{Frame, PerceptError, PointCloud, Provenance};

fn io_err(path: &Path, source: std::io::Error) -> PerceptError {
    PerceptError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_ply(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<(), PerceptError> {
    let path = path.as_ref();
    let mut s = String::new();
    s.push_str("ply\n");
    s.push_str("format ascii 1.0\n");
    let frame = match cloud.frame {
        Frame::World => "world",
        Frame::Camera => "camera",
    };
    s.push_str(&format!("comment kinetwin frame {frame}\n"));
    let prov = serde_json::to_string(&cloud.provenance).expect("provenance serializes");
    s.push_str(&format!("comment kinetwin provenance {prov}\n"));
    s.push_str(&format!("element vertex {}\n", cloud.points.len()));
    s.push_str("property float x\nproperty float y\nproperty float z\n");
    s.push_str("end_header\n");
    for p in &cloud.points {
        s.push_str(&format!("{} {} {}\n", p.x, p.y, p.z));
    }
    std::fs::write(path, s).map_err(|e| io_err(path, e))
}

pub fn read_ply(path: impl AsRef<Path>) -> Result<PointCloud, PerceptError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut lines = text.lines();

    if lines.next().map(str::trim) != Some("ply") {
        return Err(PerceptError::PlyParse("missing 'ply' magic".into()));
    }
    match lines.next().map(str::trim) {
        Some("format ascii 1.0") => {}
        other => {
            return Err(PerceptError::PlyParse(format!(
                "unsupported format line {other:?}"
            )))
        }
    }

    let mut vertex_count: Option<usize> = None;
    let mut frame = Frame::World;
    let mut provenance = Provenance::default();
    let mut properties: Vec<(String, String)> = Vec::new();
    let mut saw_end = false;
    for line in lines.by_ref() {
        let line = line.trim();
        if line == "end_header" {
            saw_end = true;
            break;
        }
        let mut it = line.split_whitespace();
        match it.next() {
            Some("comment") => {
                let rest: Vec<&str> = it.collect();
                if rest.first() == Some(&"kinetwin") {
                    match rest.get(1) {
                        Some(&"frame") => {
                            frame = match rest.get(2) {
                                Some(&"camera") => Frame::Camera,
                                _ => Frame::World,
                            };
                        }
                        Some(&"provenance") => {
                            let json = rest[2..].join(" ");
                            provenance = serde_json::from_str(&json).map_err(|e| {
                                PerceptError::PlyParse(format!("bad provenance comment: {e}"))
                            })?;
                        }
                        _ => {}
                    }
                }
            }
            Some("element") => {
                if it.next() == Some("vertex") {
                    vertex_count = it.next().and_then(|t| t.parse().ok());
                    if vertex_count.is_none() {
                        return Err(PerceptError::PlyParse("bad vertex count".into()));
                    }
                } else {
                    return Err(PerceptError::PlyParse("unsupported element".into()));
                }
            }
            Some("property") => {
                let ty = it.next().unwrap_or("").to_string();
                let name = it.next().unwrap_or("").to_string();
                properties.push((ty, name));
            }
            Some(_) | None => {}
        }
    }
    if !saw_end {
        return Err(PerceptError::PlyParse("missing end_header".into()));
    }
    let vertex_count =
        vertex_count.ok_or_else(|| PerceptError::PlyParse("missing vertex element".into()))?;

    // x, y, z must be float-typed properties.
    for coord in ["x", "y", "z"] {
        match properties.iter().find(|(_, n)| n == coord) {
            Some((ty, _)) if ty == "float" || ty == "double" || ty == "float32" || ty == "float64" => {}
            Some((ty, _)) => {
                return Err(PerceptError::PlyParse(format!(
                    "property {coord} has non-float type {ty}"
                )))
            }
            None => {
                return Err(PerceptError::PlyParse(format!("missing property {coord}")))
            }
        }
    }

    let mut points = Vec::with_capacity(vertex_count);
    for _ in 0..vertex_count {
        let line = lines
            .next()
            .ok_or_else(|| PerceptError::PlyParse("truncated vertex data".into()))?;
        let mut it = line.split_whitespace();
        let mut coords = [0.0f64; 3];
        for c in coords.iter_mut() {
            *c = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| PerceptError::PlyParse(format!("bad vertex line '{line}'")))?;
        }
        points.push(Point3::new(coords[0], coords[1], coords[2]));
    }
    if points.is_empty() {
        return Err(PerceptError::EmptyResult);
    }
    Ok(PointCloud {
        points,
        frame,
        provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::percept::{CameraPose, NoiseConfig};
    use rand::Rng;

    #[test]
    fn round_trip_preserves_points_exactly() {
        let mut rng = crate::seeds::rng(5, &[]);
        let points: Vec<Point3<f64>> = (0..200)
            .map(|_| {
                Point3::new(
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                )
            })
            .collect();
        let cloud = PointCloud::new(points, Frame::Camera);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.ply");
        write_ply(&cloud, &path).unwrap();
        let back = read_ply(&path).unwrap();
        assert_eq!(back.frame, Frame::Camera);
        assert_eq!(back.points.len(), cloud.points.len());
        for (a, b) in cloud.points.iter().zip(&back.points) {
            assert!((a - b).norm() <= 1e-6);
        }
    }

    #[test]
    fn provenance_comment_round_trips_verbatim() {
        let mut cloud = PointCloud::new(vec![Point3::new(1.0, 2.0, 3.0)], Frame::World);
        cloud.provenance = Provenance {
            camera: Some(CameraPose {
                azimuth_deg: 12.5,
                altitude_deg: 30.0,
                radius: 1.2,
                look_at: [0.4, 0.0, 0.1],
                width: 160,
                height: 120,
                vfov_deg: 45.0,
            }),
            noise: Some(NoiseConfig {
                depth_sigma: 0.002,
                dropout: 0.02,
                seed: 17,
            }),
            scene_id: Some("drawer-3".to_string()),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.ply");
        write_ply(&cloud, &path).unwrap();
        let back = read_ply(&path).unwrap();
        assert_eq!(back.provenance, cloud.provenance);
    }

    #[test]
    fn missing_end_header_is_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ply");
        std::fs::write(
            &path,
            "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\n0 0 0\n",
        )
        .unwrap();
        match read_ply(&path) {
            Err(PerceptError::PlyParse(msg)) => assert!(msg.contains("end_header")),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn non_float_property_is_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("int.ply");
        std::fs::write(
            &path,
            "ply\nformat ascii 1.0\nelement vertex 1\nproperty int x\nproperty float y\nproperty float z\nend_header\n0 0 0\n",
        )
        .unwrap();
        assert!(matches!(read_ply(&path), Err(PerceptError::PlyParse(_))));
    }
}
