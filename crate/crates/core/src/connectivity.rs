//! Strong/weak coupling lists derived level by level from the θ-criterion.
//!
//! At level `l` every box `b` inspects the children of the boxes strongly
//! coupled to its parent. Children satisfying the criterion become weakly
//! coupled (multipole-to-local), the rest stay strongly coupled. A box is
//! strongly coupled to itself, which seeds the recursion at the root.
//!
//! All lists are directed and incoming: `weak[l][b]` holds the source boxes
//! whose expansions shift into `b`. Lists are sorted by source box index.

use std::fmt;
use std::io::{self, Write};

use crate::exec::map_tasks;
use crate::geometry::{well_separated, well_separated_swapped, ThetaConfig};
use crate::tree::FmmTree;

pub type BoxLists = Vec<Vec<usize>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InteractionKind {
    Weak,
    P2p,
    P2l,
    M2p,
}

impl fmt::Display for InteractionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InteractionKind::Weak => "weak",
            InteractionKind::P2p => "p2p",
            InteractionKind::P2l => "p2l",
            InteractionKind::M2p => "m2p",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionLists {
    /// `weak[l][b]`: M2L sources of box `b` at level `l`; `weak[0]` is empty.
    pub weak: Vec<BoxLists>,
    /// Finest level: direct near-field sources, including the box itself.
    pub p2p: BoxLists,
    /// Finest level: boxes whose particles go straight into `b`'s local expansion.
    pub p2l: BoxLists,
    /// Finest level: boxes whose multipole expansion is evaluated at `b`'s points.
    pub m2p: BoxLists,
}

impl InteractionLists {
    pub fn n_levels(&self) -> usize {
        self.weak.len() - 1
    }

    /// Every (level, target, kind, source) entry in a fixed order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, InteractionKind, usize)> + '_ {
        let finest = self.n_levels();
        let weak = self.weak.iter().enumerate().flat_map(|(l, lists)| {
            lists.iter().enumerate().flat_map(move |(b, list)| {
                list.iter().map(move |&s| (l, b, InteractionKind::Weak, s))
            })
        });
        let near = [
            (InteractionKind::P2p, &self.p2p),
            (InteractionKind::P2l, &self.p2l),
            (InteractionKind::M2p, &self.m2p),
        ]
        .into_iter()
        .flat_map(move |(kind, lists)| {
            lists.iter().enumerate().flat_map(move |(b, list)| {
                list.iter().map(move |&s| (finest, b, kind, s))
            })
        });
        weak.chain(near)
    }

    /// CSV `level,target_box,kind,source_box`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "level,target_box,kind,source_box")?;
        for (l, b, kind, s) in self.entries() {
            writeln!(w, "{l},{b},{kind},{s}")?;
        }
        Ok(())
    }

    /// Histogram of list lengths: `hist[len]` = number of boxes with that length.
    pub fn length_histogram(lists: &[Vec<usize>]) -> Vec<usize> {
        let max = lists.iter().map(Vec::len).max().unwrap_or(0);
        let mut hist = vec![0; max + 1];
        for list in lists {
            hist[list.len()] += 1;
        }
        hist
    }
}

/// Split the children of the parents' strong partners into (strong, weak) for one level.
pub fn classify_level(
    tree: &FmmTree,
    level: usize,
    parent_strong: &[Vec<usize>],
    theta: ThetaConfig,
    parallel: bool,
) -> (BoxLists, BoxLists) {
    assert!(level >= 1 && level <= tree.n_levels());
    let boxes = tree.level(level);
    let tasks: Vec<usize> = (0..boxes.len()).collect();
    map_tasks(parallel, tasks, |_, b| {
        let target = &boxes[b].geometry;
        let mut strong = Vec::new();
        let mut weak = Vec::new();
        for &s in &parent_strong[FmmTree::parent(b)] {
            for c in FmmTree::children(s) {
                if c != b && well_separated(target, &boxes[c].geometry, theta) {
                    weak.push(c);
                } else {
                    strong.push(c);
                }
            }
        }
        (strong, weak)
    })
    .into_iter()
    .unzip()
}

/// Apply the swapped-roles criterion to the finest strong lists.
///
/// For a strong pair (source `a` → target `b`, `a != b`) passing the swapped
/// criterion: a larger source moves to `b`'s P2L list, a smaller one to `b`'s
/// M2P list. Equal radii and self pairs stay in P2P.
pub fn reclassify_finest(
    tree: &FmmTree,
    strong: &[Vec<usize>],
    theta: ThetaConfig,
    parallel: bool,
) -> (BoxLists, BoxLists, BoxLists) {
    let boxes = tree.finest();
    let tasks: Vec<usize> = (0..boxes.len()).collect();
    let lists = map_tasks(parallel, tasks, |_, b| {
        let target = &boxes[b].geometry;
        let (mut p2p, mut p2l, mut m2p) = (Vec::new(), Vec::new(), Vec::new());
        for &a in &strong[b] {
            let source = &boxes[a].geometry;
            let (ra, rb) = (source.radius(), target.radius());
            if a == b || ra == rb || !well_separated_swapped(source, target, theta) {
                p2p.push(a);
            } else if ra > rb {
                p2l.push(a);
            } else {
                m2p.push(a);
            }
        }
        (p2p, p2l, m2p)
    });
    let mut out = (Vec::new(), Vec::new(), Vec::new());
    for (p2p, p2l, m2p) in lists {
        out.0.push(p2p);
        out.1.push(p2l);
        out.2.push(m2p);
    }
    out
}

pub fn build_connectivity(tree: &FmmTree, theta: ThetaConfig) -> InteractionLists {
    build_connectivity_with(tree, theta, false)
}

pub fn build_connectivity_with(tree: &FmmTree, theta: ThetaConfig, parallel: bool) -> InteractionLists {
    let mut strong: BoxLists = vec![vec![0]];
    let mut weak = vec![vec![Vec::new()]];
    for level in 1..=tree.n_levels() {
        let (s, w) = classify_level(tree, level, &strong, theta, parallel);
        strong = s;
        weak.push(w);
    }
    let (p2p, p2l, m2p) = reclassify_finest(tree, &strong, theta, parallel);
    InteractionLists { weak, p2p, p2l, m2p }
}
