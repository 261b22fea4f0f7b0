//! Local reference windows: edge tokens name faces by their position among
//! the faces of the most recent BFT levels.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::graph::FaceRef;
use super::traversal::{RefTag, TraversalPlan};

/// Most faces a window may hold; matches the number of reference tags.
pub const WINDOW_CAPACITY: usize = 200;

/// How far the window moves when the traversal enters a new level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum WindowStride {
    /// Window covers levels `l-1` and `l`; tags reset at every level.
    #[default]
    One,
    /// Tags reset every second level; the window starts at the even level
    /// at or before `l-1`, so it spans two or three levels.
    Two,
}

impl WindowStride {
    /// First level in the window active while level `l` is processed.
    pub fn window_base(self, l: usize) -> usize {
        if l == 0 {
            return 0;
        }
        match self {
            WindowStride::One => l - 1,
            WindowStride::Two => 2 * ((l - 1) / 2),
        }
    }
}

impl FromStr for WindowStride {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(WindowStride::One),
            "2" => Ok(WindowStride::Two),
            _ => Err(Error::Contract(format!("window stride must be 1 or 2, got {s}"))),
        }
    }
}

impl fmt::Display for WindowStride {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WindowStride::One => "1",
            WindowStride::Two => "2",
        })
    }
}

/// Fills in every edge entry's reference tag.
pub fn assign_window_tags(plan: &TraversalPlan, stride: WindowStride) -> Result<TraversalPlan> {
    let mut out = plan.clone();
    for l in 0..out.levels.len() {
        let base = stride.window_base(l);
        let window: Vec<usize> = out.levels[base..=l]
            .iter()
            .flatten()
            .map(|e| e.face)
            .collect();
        if window.len() > WINDOW_CAPACITY {
            return Err(Error::WindowCapacity {
                level: l,
                population: window.len(),
                limit: WINDOW_CAPACITY,
            });
        }
        let tag_of: HashMap<usize, usize> =
            window.iter().enumerate().map(|(t, &f)| (f, t)).collect();
        let before: usize = out.levels[base..l].iter().map(Vec::len).sum();
        for (k, entry) in out.levels[l].iter_mut().enumerate() {
            let visible = before + k + 1;
            for e in &mut entry.edges {
                e.tag = Some(match e.other {
                    FaceRef::Unassigned => RefTag::Unassigned,
                    FaceRef::Face(f) => match tag_of.get(&f) {
                        Some(&t) if t < visible => RefTag::Window(t as u16),
                        _ => {
                            return Err(Error::Contract(format!(
                                "edge {} references face {f} outside the window of level {l}",
                                e.edge
                            )))
                        }
                    },
                });
            }
        }
    }
    Ok(out)
}

/// Incremental window state for a decoder reading faces in stream order.
#[derive(Debug, Clone)]
pub struct WindowTracker {
    stride: WindowStride,
    levels: Vec<Vec<usize>>,
}

impl WindowTracker {
    pub fn new(stride: WindowStride) -> Self {
        Self {
            stride,
            levels: Vec::new(),
        }
    }

    pub fn begin_level(&mut self) {
        self.levels.push(Vec::new());
    }

    /// Records the next face of the current level.
    pub fn push_face(&mut self, face: usize) {
        if self.levels.is_empty() {
            self.begin_level();
        }
        self.levels.last_mut().expect("level exists").push(face);
    }

    pub fn level(&self) -> usize {
        self.levels.len().saturating_sub(1)
    }

    fn visible_iter(&self) -> impl Iterator<Item = &usize> {
        let base = self.stride.window_base(self.level());
        self.levels.get(base..).into_iter().flatten().flatten()
    }

    /// Faces a tag may currently name.
    pub fn visible(&self) -> usize {
        self.visible_iter().count()
    }

    pub fn lookup(&self, tag: usize) -> Option<usize> {
        self.visible_iter().nth(tag).copied()
    }
}

/// One resolved edge entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResolvedEdge {
    pub edge: usize,
    pub owner: usize,
    pub other: FaceRef,
}

/// Recovers the endpoints of every edge entry from its tag.
///
/// Errors report the ordinal of the edge entry in plan order.
pub fn resolve_tags(
    plan: &TraversalPlan,
    stride: WindowStride,
    allow_unassigned: bool,
) -> Result<Vec<ResolvedEdge>> {
    let mut tracker = WindowTracker::new(stride);
    let mut out = Vec::with_capacity(plan.edge_count());
    for level in &plan.levels {
        tracker.begin_level();
        for entry in level {
            tracker.push_face(entry.face);
            for e in &entry.edges {
                let position = out.len();
                let other = match e.tag {
                    Some(RefTag::Window(t)) => match tracker.lookup(t as usize) {
                        Some(f) => FaceRef::Face(f),
                        None => {
                            return Err(Error::DanglingReference {
                                position,
                                tag: t as usize,
                                visible: tracker.visible(),
                            })
                        }
                    },
                    Some(RefTag::Unassigned) if allow_unassigned => FaceRef::Unassigned,
                    Some(RefTag::Unassigned) => {
                        return Err(Error::UnassignedReference { position })
                    }
                    None => return Err(Error::Contract("edge entry has no tag".into())),
                };
                out.push(ResolvedEdge {
                    edge: e.edge,
                    owner: entry.face,
                    other,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::traversal::{EdgeEntry, FaceEntry};

    fn entry(face: usize, edges: &[(usize, FaceRef)]) -> FaceEntry {
        FaceEntry {
            face,
            edges: edges
                .iter()
                .map(|&(edge, other)| EdgeEntry {
                    edge,
                    other,
                    tag: None,
                })
                .collect(),
        }
    }

    use FaceRef::Face;

    /// Traversal of the split cylinder: disc, two halves, disc.
    fn cylinder_plan() -> TraversalPlan {
        TraversalPlan {
            levels: vec![
                vec![entry(0, &[])],
                vec![
                    entry(1, &[(0, Face(0))]),
                    entry(2, &[(1, Face(0)), (2, Face(1)), (3, Face(1))]),
                ],
                vec![entry(3, &[(4, Face(1)), (5, Face(2))])],
            ],
        }
    }

    fn tags(p: &TraversalPlan) -> Vec<RefTag> {
        p.levels
            .iter()
            .flatten()
            .flat_map(|f| f.edges.iter().map(|e| e.tag.unwrap()))
            .collect()
    }

    #[test]
    fn cylinder_tags_shift_with_the_window() {
        let p = assign_window_tags(&cylinder_plan(), WindowStride::One).unwrap();
        use RefTag::Window as W;
        // E1,0 -> T0; E2,0 -> T0; E2,1 and E*2,1 -> T1; E3,1 -> T0; E3,2 -> T1
        assert_eq!(tags(&p), vec![W(0), W(0), W(1), W(1), W(0), W(1)]);
    }

    #[test]
    fn two_face_graph() {
        let plan = TraversalPlan {
            levels: vec![vec![entry(0, &[])], vec![entry(1, &[(0, Face(0))])]],
        };
        let p = assign_window_tags(&plan, WindowStride::One).unwrap();
        assert_eq!(tags(&p), vec![RefTag::Window(0)]);
    }

    #[test]
    fn stride_two_keeps_older_levels() {
        let p = assign_window_tags(&cylinder_plan(), WindowStride::Two).unwrap();
        use RefTag::Window as W;
        // level 2 still sees level 0, so F1 is T1 and F2 is T2
        assert_eq!(tags(&p), vec![W(0), W(0), W(1), W(1), W(1), W(2)]);
        assert_eq!(WindowStride::Two.window_base(3), 2);
        assert_eq!(WindowStride::Two.window_base(4), 2);
        assert_eq!(WindowStride::One.window_base(4), 3);
    }

    #[test]
    fn resolve_round_trip() {
        for stride in [WindowStride::One, WindowStride::Two] {
            let p = assign_window_tags(&cylinder_plan(), stride).unwrap();
            let r = resolve_tags(&p, stride, false).unwrap();
            let pairs: Vec<(usize, usize, FaceRef)> =
                r.iter().map(|x| (x.edge, x.owner, x.other)).collect();
            assert_eq!(
                pairs,
                vec![
                    (0, 1, Face(0)),
                    (1, 2, Face(0)),
                    (2, 2, Face(1)),
                    (3, 2, Face(1)),
                    (4, 3, Face(1)),
                    (5, 3, Face(2)),
                ]
            );
        }
    }

    #[test]
    fn out_of_window_tag_is_dangling() {
        let mut p = assign_window_tags(&cylinder_plan(), WindowStride::One).unwrap();
        p.levels[1][1].edges[0].tag = Some(RefTag::Window(5));
        match resolve_tags(&p, WindowStride::One, false) {
            Err(Error::DanglingReference { tag: 5, visible: 3, position: 1 }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unassigned_needs_autocomplete() {
        let plan = TraversalPlan {
            levels: vec![vec![entry(0, &[(0, FaceRef::Unassigned)])]],
        };
        let p = assign_window_tags(&plan, WindowStride::One).unwrap();
        assert!(matches!(
            resolve_tags(&p, WindowStride::One, false),
            Err(Error::UnassignedReference { position: 0 })
        ));
        assert_eq!(
            resolve_tags(&p, WindowStride::One, true).unwrap()[0].other,
            FaceRef::Unassigned
        );
    }

    #[test]
    fn capacity_limit() {
        let big: Vec<FaceEntry> = (1..=201).map(|f| entry(f, &[(f, Face(0))])).collect();
        let plan = TraversalPlan {
            levels: vec![vec![entry(0, &[])], big],
        };
        assert!(matches!(
            assign_window_tags(&plan, WindowStride::One),
            Err(Error::WindowCapacity { population: 202, .. })
        ));
    }
}
