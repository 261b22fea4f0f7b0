//! Face adjacency graph, breadth-first levels and reference windows.

pub mod augment;
pub mod graph;
pub mod traversal;
pub mod window;

pub use augment::{rotate_graph, QuarterTurn};
pub use graph::{BRepGraph, Edge, Face, FaceRef};
pub use traversal::{
    bft_levels, pick_start_face, traversal_plan, EdgeEntry, FaceEntry, RefTag, TraversalPlan,
};
pub use window::{assign_window_tags, resolve_tags, ResolvedEdge, WindowStride, WindowTracker};
