//! URDF 1.0 export of an articulated object (two links, one joint) with
//! meshes written as ASCII OBJ next to the URDF, plus an importer for the
//! same subset so round-trips can be verified.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::{Point3, Translation3, Unit, UnitQuaternion, Vector3};

use super::{ArticulatedObject, GeometryShape, JointKind, JointSpec, ModelError, RigidGeometry};
use crate::geom::Pose;

fn io_err(path: &Path, source: std::io::Error) -> ModelError {
    ModelError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, message: impl Into<String>) -> ModelError {
    ModelError::Parse {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn fmt_vec(v: &Vector3<f64>) -> String {
    format!("{} {} {}", v.x, v.y, v.z)
}

fn fmt_pose(p: &Pose) -> String {
    let (r, pi, y) = p.rotation.euler_angles();
    format!(
        "xyz=\"{} {} {}\" rpy=\"{} {} {}\"",
        p.translation.x, p.translation.y, p.translation.z, r, pi, y
    )
}

/// Geometry origin for URDF: box/sphere centers are folded into the origin so
/// the URDF primitive is centered.
fn geometry_xml(
    geom: &RigidGeometry,
    link_rel: &Pose,
    mesh_file: &str,
) -> (String, Option<(Vec<Point3<f64>>, Vec<[u32; 3]>)>) {
    match &geom.shape {
        GeometryShape::Box {
            center,
            half_extents,
        } => {
            let origin = link_rel * geom.pose * Pose::translation(center.x, center.y, center.z);
            let size = half_extents * 2.0;
            (
                format!(
                    "      <origin {}/>\n      <geometry><box size=\"{}\"/></geometry>\n",
                    fmt_pose(&origin),
                    fmt_vec(&size)
                ),
                None,
            )
        }
        GeometryShape::Sphere { center, radius } => {
            let origin = link_rel * geom.pose * Pose::translation(center.x, center.y, center.z);
            (
                format!(
                    "      <origin {}/>\n      <geometry><sphere radius=\"{}\"/></geometry>\n",
                    fmt_pose(&origin),
                    radius
                ),
                None,
            )
        }
        GeometryShape::ConvexHull(h) => {
            let origin = link_rel * geom.pose;
            (
                format!(
                    "      <origin {}/>\n      <geometry><mesh filename=\"{}\"/></geometry>\n",
                    fmt_pose(&origin),
                    mesh_file
                ),
                Some((h.vertices.clone(), h.faces.clone())),
            )
        }
        GeometryShape::Mesh { vertices, faces } => {
            let origin = link_rel * geom.pose;
            (
                format!(
                    "      <origin {}/>\n      <geometry><mesh filename=\"{}\"/></geometry>\n",
                    fmt_pose(&origin),
                    mesh_file
                ),
                Some((vertices.clone(), faces.clone())),
            )
        }
    }
}

fn link_xml(
    name: &str,
    geom: &RigidGeometry,
    link_rel: &Pose,
    mesh_file: &str,
) -> (String, Option<(Vec<Point3<f64>>, Vec<[u32; 3]>)>) {
    let (body, mesh) = geometry_xml(geom, link_rel, mesh_file);
    let mut s = String::new();
    writeln!(s, "  <link name=\"{name}\">").unwrap();
    writeln!(s, "    <visual>\n{body}    </visual>").unwrap();
    writeln!(s, "    <collision>\n{body}    </collision>").unwrap();
    writeln!(s, "  </link>").unwrap();
    (s, mesh)
}

/// Writes `obj` as a two-link URDF at `path`; hull/mesh geometry goes to
/// `<stem>_base.obj` / `<stem>_movable.obj` alongside.
pub fn export_urdf(obj: &ArticulatedObject, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let path = path.as_ref();
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "object".to_string());
    let dir = path.parent().map(PathBuf::from).unwrap_or_default();

    // Child (movable) frame sits at the joint origin; express the movable
    // geometry relative to it.
    let joint_origin = Pose::translation(obj.joint.pivot.x, obj.joint.pivot.y, obj.joint.pivot.z);
    let movable_rel = joint_origin.inverse();

    let base_mesh_name = format!("{stem}_base.obj");
    let movable_mesh_name = format!("{stem}_movable.obj");

    let (base_xml, base_mesh) = link_xml("base_link", &obj.base, &Pose::identity(), &base_mesh_name);
    let (movable_xml, movable_mesh) =
        link_xml("movable_link", &obj.movable, &movable_rel, &movable_mesh_name);

    let joint_type = match obj.joint.kind {
        JointKind::Revolute => "revolute",
        JointKind::Prismatic => "prismatic",
    };
    let mut xml = String::new();
    writeln!(xml, "<?xml version=\"1.0\"?>").unwrap();
    writeln!(xml, "<robot name=\"{stem}\">").unwrap();
    xml.push_str(&base_xml);
    xml.push_str(&movable_xml);
    writeln!(xml, "  <joint name=\"{stem}_joint\" type=\"{joint_type}\">").unwrap();
    writeln!(xml, "    <origin {}/>", fmt_pose(&joint_origin)).unwrap();
    writeln!(xml, "    <parent link=\"base_link\"/>").unwrap();
    writeln!(xml, "    <child link=\"movable_link\"/>").unwrap();
    writeln!(xml, "    <axis xyz=\"{}\"/>", fmt_vec(obj.joint.axis.as_ref())).unwrap();
    writeln!(
        xml,
        "    <limit lower=\"{}\" upper=\"{}\" effort=\"100\" velocity=\"1\"/>",
        obj.joint.limits[0], obj.joint.limits[1]
    )
    .unwrap();
    writeln!(xml, "  </joint>").unwrap();
    writeln!(xml, "</robot>").unwrap();

    std::fs::write(path, xml).map_err(|e| io_err(path, e))?;
    if let Some((verts, faces)) = base_mesh {
        write_obj(&dir.join(&base_mesh_name), &verts, &faces)?;
    }
    if let Some((verts, faces)) = movable_mesh {
        write_obj(&dir.join(&movable_mesh_name), &verts, &faces)?;
    }
    Ok(())
}

/// ASCII OBJ writer (`v` and `f` records only).
pub fn write_obj(
    path: &Path,
    vertices: &[Point3<f64>],
    faces: &[[u32; 3]],
) -> Result<(), ModelError> {
    let mut s = String::new();
    for v in vertices {
        writeln!(s, "v {} {} {}", v.x, v.y, v.z).unwrap();
    }
    for f in faces {
        writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1).unwrap();
    }
    std::fs::write(path, s).map_err(|e| io_err(path, e))
}

pub fn read_obj(path: &Path) -> Result<(Vec<Point3<f64>>, Vec<[u32; 3]>), ModelError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let mut coords = [0.0; 3];
                for c in coords.iter_mut() {
                    *c = it
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| parse_err(path, format!("bad vertex on line {}", ln + 1)))?;
                }
                vertices.push(Point3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let mut idx = [0u32; 3];
                for i in idx.iter_mut() {
                    let tok = it
                        .next()
                        .ok_or_else(|| parse_err(path, format!("bad face on line {}", ln + 1)))?;
                    // OBJ faces may carry v/vt/vn triples; use the vertex index.
                    let v: i64 = tok
                        .split('/')
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| parse_err(path, format!("bad face on line {}", ln + 1)))?;
                    *i = (v - 1) as u32;
                }
                faces.push(idx);
            }
            _ => {}
        }
    }
    Ok((vertices, faces))
}

// ---------------------------------------------------------------------------
// Minimal XML reader for the exact URDF subset written above.

#[derive(Debug)]
struct Elem {
    name: String,
    attrs: Vec<(String, String)>,
    children: Vec<Elem>,
}

impl Elem {
    fn attr(&self, key: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn child(&self, name: &str) -> Option<&Elem> {
        self.children.iter().find(|c| c.name == name)
    }

    fn children_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Elem> {
        self.children.iter().filter(move |c| c.name == name)
    }
}

struct XmlParser<'a> {
    text: &'a [u8],
    pos: usize,
}

impl<'a> XmlParser<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            text: text.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws_and_misc(&mut self) {
        loop {
            while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.rest().starts_with("<?") {
                if let Some(end) = self.find("?>") {
                    self.pos = end + 2;
                    continue;
                }
            }
            if self.rest().starts_with("<!--") {
                if let Some(end) = self.find("-->") {
                    self.pos = end + 3;
                    continue;
                }
            }
            break;
        }
    }

    fn rest(&self) -> &str {
        std::str::from_utf8(&self.text[self.pos..]).unwrap_or("")
    }

    fn find(&self, pat: &str) -> Option<usize> {
        self.rest().find(pat).map(|i| self.pos + i)
    }

    fn parse_element(&mut self) -> Result<Elem, String> {
        self.skip_ws_and_misc();
        if self.pos >= self.text.len() || self.text[self.pos] != b'<' {
            return Err(format!("expected '<' at byte {}", self.pos));
        }
        self.pos += 1;
        let name = self.parse_name()?;
        let mut attrs = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'/') => {
                    self.pos += 1;
                    self.expect(b'>')?;
                    return Ok(Elem {
                        name,
                        attrs,
                        children: Vec::new(),
                    });
                }
                Some(b'>') => {
                    self.pos += 1;
                    break;
                }
                Some(_) => {
                    let key = self.parse_name()?;
                    self.skip_ws();
                    self.expect(b'=')?;
                    self.skip_ws();
                    self.expect(b'"')?;
                    let start = self.pos;
                    while self.peek() != Some(b'"') {
                        if self.pos >= self.text.len() {
                            return Err("unterminated attribute".to_string());
                        }
                        self.pos += 1;
                    }
                    let value =
                        std::str::from_utf8(&self.text[start..self.pos]).unwrap().to_string();
                    self.pos += 1;
                    attrs.push((key, value));
                }
                None => return Err("unexpected end of input in tag".to_string()),
            }
        }
        let mut children = Vec::new();
        loop {
            self.skip_ws_and_misc();
            if self.rest().starts_with("</") {
                self.pos += 2;
                let close = self.parse_name()?;
                if close != name {
                    return Err(format!("mismatched close tag {close} for {name}"));
                }
                self.skip_ws();
                self.expect(b'>')?;
                return Ok(Elem {
                    name,
                    attrs,
                    children,
                });
            }
            if self.peek() == Some(b'<') {
                children.push(self.parse_element()?);
            } else if self.pos >= self.text.len() {
                return Err(format!("unterminated element {name}"));
            } else {
                // text content: skip until next tag
                while self.pos < self.text.len() && self.text[self.pos] != b'<' {
                    self.pos += 1;
                }
            }
        }
    }

    fn parse_name(&mut self) -> Result<String, String> {
        let start = self.pos;
        while self.pos < self.text.len()
            && (self.text[self.pos].is_ascii_alphanumeric()
                || matches!(self.text[self.pos], b'_' | b'-' | b':'))
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(format!("expected name at byte {}", self.pos));
        }
        Ok(std::str::from_utf8(&self.text[start..self.pos])
            .unwrap()
            .to_string())
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), String> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(format!("expected '{}' at byte {}", c as char, self.pos))
        }
    }
}

fn parse_floats(path: &Path, s: &str, n: usize) -> Result<Vec<f64>, ModelError> {
    let vals: Vec<f64> = s
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| parse_err(path, format!("bad float list '{s}': {e}")))?;
    if vals.len() != n {
        return Err(parse_err(path, format!("expected {n} floats in '{s}'")));
    }
    Ok(vals)
}

fn parse_origin(path: &Path, e: Option<&Elem>) -> Result<Pose, ModelError> {
    let Some(e) = e else {
        return Ok(Pose::identity());
    };
    let xyz = match e.attr("xyz") {
        Some(s) => parse_floats(path, s, 3)?,
        None => vec![0.0; 3],
    };
    let rpy = match e.attr("rpy") {
        Some(s) => parse_floats(path, s, 3)?,
        None => vec![0.0; 3],
    };
    Ok(Pose::from_parts(
        Translation3::new(xyz[0], xyz[1], xyz[2]),
        UnitQuaternion::from_euler_angles(rpy[0], rpy[1], rpy[2]),
    ))
}

fn parse_link_geometry(path: &Path, link: &Elem) -> Result<(Pose, GeometryShape), ModelError> {
    let visual = link
        .child("visual")
        .ok_or_else(|| parse_err(path, format!("link {:?} has no visual", link.attr("name"))))?;
    let origin = parse_origin(path, visual.child("origin"))?;
    let geometry = visual
        .child("geometry")
        .ok_or_else(|| parse_err(path, "visual has no geometry"))?;
    let shape = if let Some(b) = geometry.child("box") {
        let size = parse_floats(path, b.attr("size").unwrap_or(""), 3)?;
        GeometryShape::Box {
            center: Point3::origin(),
            half_extents: Vector3::new(size[0] / 2.0, size[1] / 2.0, size[2] / 2.0),
        }
    } else if let Some(s) = geometry.child("sphere") {
        let r: f64 = s
            .attr("radius")
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(path, "sphere without radius"))?;
        GeometryShape::Sphere {
            center: Point3::origin(),
            radius: r,
        }
    } else if let Some(m) = geometry.child("mesh") {
        let file = m
            .attr("filename")
            .ok_or_else(|| parse_err(path, "mesh without filename"))?;
        let mesh_path = path.parent().unwrap_or(Path::new(".")).join(file);
        let (vertices, faces) = read_obj(&mesh_path)?;
        GeometryShape::Mesh { vertices, faces }
    } else {
        return Err(parse_err(path, "unsupported geometry element"));
    };
    Ok((origin, shape))
}

/// Reads back a URDF written by [`export_urdf`] (two links, one joint).
pub fn import_urdf(path: impl AsRef<Path>) -> Result<ArticulatedObject, ModelError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let root = XmlParser::new(&text)
        .parse_element()
        .map_err(|e| parse_err(path, e))?;
    if root.name != "robot" {
        return Err(parse_err(path, format!("expected <robot>, got <{}>", root.name)));
    }

    let joint = root
        .children_named("joint")
        .next()
        .ok_or_else(|| parse_err(path, "no joint element"))?;
    let parent_name = joint
        .child("parent")
        .and_then(|e| e.attr("link"))
        .ok_or_else(|| parse_err(path, "joint without parent"))?;
    let child_name = joint
        .child("child")
        .and_then(|e| e.attr("link"))
        .ok_or_else(|| parse_err(path, "joint without child"))?;
    let find_link = |name: &str| {
        root.children_named("link")
            .find(|l| l.attr("name") == Some(name))
            .ok_or_else(|| parse_err(path, format!("missing link {name}")))
    };
    let base_link = find_link(parent_name)?;
    let movable_link = find_link(child_name)?;

    let kind = match joint.attr("type") {
        Some("revolute") | Some("continuous") => JointKind::Revolute,
        Some("prismatic") => JointKind::Prismatic,
        other => return Err(parse_err(path, format!("unsupported joint type {other:?}"))),
    };
    let joint_origin = parse_origin(path, joint.child("origin"))?;
    let axis_local = match joint.child("axis").and_then(|e| e.attr("xyz")) {
        Some(s) => {
            let v = parse_floats(path, s, 3)?;
            Vector3::new(v[0], v[1], v[2])
        }
        None => Vector3::x(),
    };
    let limit = joint
        .child("limit")
        .ok_or_else(|| parse_err(path, "joint without limit"))?;
    let lower: f64 = limit
        .attr("lower")
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| parse_err(path, "limit without lower"))?;
    let upper: f64 = limit
        .attr("upper")
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| parse_err(path, "limit without upper"))?;

    let (base_origin, base_shape) = parse_link_geometry(path, base_link)?;
    let (movable_origin, movable_shape) = parse_link_geometry(path, movable_link)?;

    // Joint axis/pivot in the object frame; movable rest pose composes the
    // child frame with the geometry origin.
    let axis_obj = joint_origin.rotation * axis_local;
    let pivot_obj = Point3::from(joint_origin.translation.vector);

    let obj = ArticulatedObject {
        base: RigidGeometry {
            shape: base_shape,
            pose: base_origin,
        },
        movable: RigidGeometry {
            shape: movable_shape,
            pose: joint_origin * movable_origin,
        },
        joint: JointSpec {
            kind,
            axis: Unit::new_normalize(axis_obj),
            pivot: pivot_obj,
            limits: [lower, upper],
            state: 0.0f64.clamp(lower, upper),
        },
        pose: Pose::identity(),
    };
    obj.validate("object")?;
    Ok(obj)
}
