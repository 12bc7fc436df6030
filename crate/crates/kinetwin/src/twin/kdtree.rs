//! Exact nearest-neighbor queries over 3-D points (median-split kd-tree).

use nalgebra::Point3;

struct Node {
    point: u32,
    axis: u8,
    left: i32,
    right: i32,
}

pub struct KdTree {
    points: Vec<Point3<f64>>,
    nodes: Vec<Node>,
    root: i32,
}

impl KdTree {
    pub fn build(points: &[Point3<f64>]) -> Self {
        let mut tree = KdTree {
            points: points.to_vec(),
            nodes: Vec::with_capacity(points.len()),
            root: -1,
        };
        let mut idx: Vec<u32> = (0..points.len() as u32).collect();
        tree.root = tree.build_rec(&mut idx, 0);
        tree
    }

    fn build_rec(&mut self, idx: &mut [u32], depth: usize) -> i32 {
        if idx.is_empty() {
            return -1;
        }
        let axis = (depth % 3) as u8;
        let mid = idx.len() / 2;
        idx.select_nth_unstable_by(mid, |&a, &b| {
            let va = self.points[a as usize][axis as usize];
            let vb = self.points[b as usize][axis as usize];
            va.partial_cmp(&vb).unwrap().then(a.cmp(&b))
        });
        let point = idx[mid];
        let node_id = self.nodes.len() as i32;
        self.nodes.push(Node {
            point,
            axis,
            left: -1,
            right: -1,
        });
        let (lo, hi) = idx.split_at_mut(mid);
        let left = self.build_rec(lo, depth + 1);
        let right = self.build_rec(&mut hi[1..], depth + 1);
        self.nodes[node_id as usize].left = left;
        self.nodes[node_id as usize].right = right;
        node_id
    }

    /// Exact nearest neighbor: (index, distance).
    pub fn nearest(&self, q: &Point3<f64>) -> (usize, f64) {
        debug_assert!(!self.points.is_empty());
        let mut best = (0usize, f64::INFINITY);
        self.search(self.root, q, &mut best);
        (best.0, best.1.sqrt())
    }

    fn search(&self, node_id: i32, q: &Point3<f64>, best: &mut (usize, f64)) {
        if node_id < 0 {
            return;
        }
        let node = &self.nodes[node_id as usize];
        let p = self.points[node.point as usize];
        let d2 = (q - p).norm_squared();
        if d2 < best.1 {
            *best = (node.point as usize, d2);
        }
        let ax = node.axis as usize;
        let delta = q[ax] - p[ax];
        let (near, far) = if delta < 0.0 {
            (node.left, node.right)
        } else {
            (node.right, node.left)
        };
        self.search(near, q, best);
        if delta * delta < best.1 {
            self.search(far, q, best);
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn matches_brute_force() {
        let mut rng = crate::seeds::rng(17, &[]);
        let pts: Vec<Point3<f64>> = (0..2000)
            .map(|_| {
                Point3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                )
            })
            .collect();
        let tree = KdTree::build(&pts);
        for _ in 0..200 {
            let q = Point3::new(
                rng.gen_range(-1.2..1.2),
                rng.gen_range(-1.2..1.2),
                rng.gen_range(-1.2..1.2),
            );
            let (_, d_tree) = tree.nearest(&q);
            let d_brute = pts
                .iter()
                .map(|p| (q - p).norm())
                .fold(f64::INFINITY, f64::min);
            assert!((d_tree - d_brute).abs() < 1e-12);
        }
    }
}
