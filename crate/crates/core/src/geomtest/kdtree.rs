//! Exact nearest-neighbor search over 3D points.
//!
//! A median-split kd-tree. Queries return exact nearest squared distances:
//! the far subtree is pruned only when the splitting plane is provably
//! farther than the incumbent, so acceleration never changes the result.

use crate::geom::Vec3;

const LEAF_SIZE: usize = 12;

enum Node {
    Leaf {
        start: usize,
        len: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

pub struct KdTree {
    points: Vec<Vec3>,
    nodes: Vec<Node>,
    root: usize,
}

impl KdTree {
    /// Builds a tree over a copy of `points`. Panics on an empty slice;
    /// callers guarantee non-empty clouds.
    pub fn build(points: &[Vec3]) -> KdTree {
        assert!(!points.is_empty(), "kd-tree requires at least one point");
        let mut tree = KdTree {
            points: points.to_vec(),
            nodes: Vec::new(),
            root: 0,
        };
        let n = tree.points.len();
        tree.root = tree.build_node(0, n);
        tree
    }

    fn build_node(&mut self, start: usize, len: usize) -> usize {
        if len <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, len });
            return self.nodes.len() - 1;
        }
        let slice = &mut self.points[start..start + len];
        // Split the axis with the widest spread; ties break toward x.
        let mut lo = slice[0];
        let mut hi = slice[0];
        for p in slice.iter() {
            lo = Vec3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
            hi = Vec3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
        }
        let spread = hi - lo;
        let axis = if spread.x >= spread.y && spread.x >= spread.z {
            0
        } else if spread.y >= spread.z {
            1
        } else {
            2
        };
        let mid = len / 2;
        slice.select_nth_unstable_by(mid, |a, b| a.component(axis).total_cmp(&b.component(axis)));
        let value = slice[mid].component(axis);

        let node_index = self.nodes.len();
        self.nodes.push(Node::Leaf { start: 0, len: 0 }); // placeholder
        let left = self.build_node(start, mid);
        let right = self.build_node(start + mid, len - mid);
        self.nodes[node_index] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        node_index
    }

    /// Exact squared distance from `query` to its nearest point.
    pub fn nearest_squared(&self, query: Vec3) -> f64 {
        let mut best = f64::INFINITY;
        self.search(self.root, query, &mut best);
        best
    }

    fn search(&self, node: usize, query: Vec3, best: &mut f64) {
        match &self.nodes[node] {
            Node::Leaf { start, len } => {
                for p in &self.points[*start..*start + *len] {
                    let d = query.distance_squared(*p);
                    if d < *best {
                        *best = d;
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = query.component(*axis) - value;
                let (near, far) = if diff < 0.0 {
                    (*left, *right)
                } else {
                    (*right, *left)
                };
                self.search(near, query, best);
                if diff * diff < *best {
                    self.search(far, query, best);
                }
            }
        }
    }
}
