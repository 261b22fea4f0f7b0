//! Optional quarter-turn rotations for data augmentation.

use crate::error::Result;
use crate::geometry::Point3;

use super::graph::BRepGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuarterTurn {
    /// 0, 1 or 2 for x, y, z.
    pub axis: usize,
    /// Counter-clockwise quarter turns, taken mod 4.
    pub turns: u8,
}

impl QuarterTurn {
    /// Exact rotation: coordinates are only permuted and negated.
    pub fn apply(&self, p: Point3) -> Point3 {
        let (a, b) = ((self.axis + 1) % 3, (self.axis + 2) % 3);
        let mut q = p;
        for _ in 0..self.turns % 4 {
            let (x, y) = (q[a], q[b]);
            q[a] = -y;
            q[b] = x;
        }
        q
    }
}

pub fn rotate_graph(g: &BRepGraph, r: QuarterTurn) -> Result<BRepGraph> {
    g.map_points(|p| r.apply(p))
}
