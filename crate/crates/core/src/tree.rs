//! Balanced pyramid tree built from successive median splits.
//!
//! Level `l` holds exactly `4^l` boxes. Box `k` at level `l` has children
//! `4k..4k+4` at level `l + 1`; no child links are stored. Every box owns a
//! contiguous range of the permuted source array and of the permuted
//! evaluation-point array, and the children ranges partition the parent's.

use std::ops::Range;

use num_complex::Complex64;

use crate::error::{FmmError, Result};
use crate::exec::{map_tasks, split_ranges_mut};
use crate::geometry::{BoxGeometry, ThetaConfig};
use crate::partition::partition_median;

/// Sources with real strengths, plus evaluation points.
///
/// When no separate evaluation points are given they alias the sources.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    positions: Vec<Complex64>,
    strengths: Vec<f64>,
    eval_positions: Option<Vec<Complex64>>,
}

fn check_finite(points: &[Complex64], what: &'static str) -> Result<()> {
    match points
        .iter()
        .position(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        Some(index) => Err(FmmError::NonFinite { what, index }),
        None => Ok(()),
    }
}

impl ParticleSet {
    pub fn new(positions: Vec<Complex64>, strengths: Vec<f64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(FmmError::EmptyInput);
        }
        if strengths.len() != positions.len() {
            return Err(FmmError::LengthMismatch {
                what: "strengths",
                expected: positions.len(),
                found: strengths.len(),
            });
        }
        check_finite(&positions, "source position")?;
        if let Some(index) = strengths.iter().position(|g| !g.is_finite()) {
            return Err(FmmError::NonFinite {
                what: "strength",
                index,
            });
        }
        Ok(Self {
            positions,
            strengths,
            eval_positions: None,
        })
    }

    /// Evaluate at separate points instead of at the sources.
    pub fn with_eval_points(mut self, eval: Vec<Complex64>) -> Result<Self> {
        if eval.is_empty() {
            return Err(FmmError::EmptyInput);
        }
        check_finite(&eval, "evaluation point")?;
        self.eval_positions = Some(eval);
        Ok(self)
    }

    pub fn positions(&self) -> &[Complex64] {
        &self.positions
    }

    pub fn strengths(&self) -> &[f64] {
        &self.strengths
    }

    pub fn eval_positions(&self) -> &[Complex64] {
        self.eval_positions.as_deref().unwrap_or(&self.positions)
    }

    pub fn eval_aliases_sources(&self) -> bool {
        self.eval_positions.is_none()
    }

    pub fn n_sources(&self) -> usize {
        self.positions.len()
    }

    pub fn n_eval(&self) -> usize {
        self.eval_positions().len()
    }

    /// Same points with every strength multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            strengths: self.strengths.iter().map(|g| g * factor).collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeConfig {
    /// Target number of sources per finest-level box (N_d).
    pub n_desired_per_box: usize,
    pub theta: ThetaConfig,
    /// Number of expansion terms p.
    pub p_terms: usize,
    /// Run the level-synchronous tasks on the rayon pool.
    pub parallel: bool,
    /// Pairwise-symmetric near field when evaluation points alias sources.
    /// Only honored in sequential mode.
    pub symmetric_p2p: bool,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            n_desired_per_box: 35,
            theta: ThetaConfig::default(),
            p_terms: 17,
            parallel: false,
            symmetric_p2p: false,
        }
    }
}

impl TreeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_desired_per_box == 0 {
            return Err(FmmError::InvalidConfig("n_desired_per_box must be >= 1".into()));
        }
        if self.p_terms == 0 {
            return Err(FmmError::InvalidConfig("p_terms must be >= 1".into()));
        }
        Ok(())
    }
}

/// Number of tree levels, `max(0, ceil(0.5 log2(5N / (8 N_d))))`.
///
/// Evaluated in exact integer arithmetic: the smallest `l >= 0` with
/// `8 N_d 4^l >= 5 N`.
pub fn num_levels(n_sources: usize, n_desired: usize) -> usize {
    assert!(n_sources >= 1 && n_desired >= 1);
    let target = 5u128 * n_sources as u128;
    let mut cap = 8u128 * n_desired as u128;
    let mut l = 0;
    while cap < target {
        cap *= 4;
        l += 1;
    }
    l
}

/// Largest `l` with `4^l <= n`.
fn max_levels_for(n: usize) -> usize {
    let mut l = 0;
    let mut boxes = 1usize;
    while boxes.saturating_mul(4) <= n {
        boxes *= 4;
        l += 1;
    }
    l
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxNode {
    pub geometry: BoxGeometry,
    pub src_begin: usize,
    pub src_end: usize,
    pub eval_begin: usize,
    pub eval_end: usize,
}

impl BoxNode {
    pub fn src_range(&self) -> Range<usize> {
        self.src_begin..self.src_end
    }

    pub fn eval_range(&self) -> Range<usize> {
        self.eval_begin..self.eval_end
    }

    pub fn n_sources(&self) -> usize {
        self.src_end - self.src_begin
    }

    pub fn n_eval(&self) -> usize {
        self.eval_end - self.eval_begin
    }
}

#[derive(Debug, Clone)]
pub struct FmmTree {
    levels: Vec<Vec<BoxNode>>,
    src_perm: Vec<usize>,
    eval_perm: Vec<usize>,
    sources: Vec<Complex64>,
    strengths: Vec<f64>,
    eval_points: Vec<Complex64>,
    eval_aliases_sources: bool,
}

impl FmmTree {
    /// Number of refinement levels N_l; the finest level index.
    pub fn n_levels(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, l: usize) -> &[BoxNode] {
        &self.levels[l]
    }

    pub fn finest(&self) -> &[BoxNode] {
        self.levels.last().expect("tree has a root level")
    }

    pub fn children(k: usize) -> Range<usize> {
        4 * k..4 * k + 4
    }

    pub fn parent(k: usize) -> usize {
        k / 4
    }

    /// Permuted position -> original source index.
    pub fn src_perm(&self) -> &[usize] {
        &self.src_perm
    }

    /// Permuted position -> original evaluation index.
    pub fn eval_perm(&self) -> &[usize] {
        &self.eval_perm
    }

    /// Source positions in tree order.
    pub fn sources(&self) -> &[Complex64] {
        &self.sources
    }

    /// Strengths in tree order.
    pub fn strengths(&self) -> &[f64] {
        &self.strengths
    }

    /// Evaluation points in tree order.
    pub fn eval_points(&self) -> &[Complex64] {
        &self.eval_points
    }

    pub fn eval_aliases_sources(&self) -> bool {
        self.eval_aliases_sources
    }
}

struct Half {
    geometry: BoxGeometry,
    src: Range<usize>,
    eval: Range<usize>,
}

/// Median split of one (sub)rectangle. `src` and `eval` are the box-local
/// slices of the permutation arrays; `origin` is the global (src, eval)
/// offset of those slices. Without `eval` the evaluation points alias the
/// sources and share their ranges. On a degenerate box returns the number of
/// coincident sources.
fn split_once(
    geometry: BoxGeometry,
    src: &mut [usize],
    eval: Option<&mut [usize]>,
    origin: (usize, usize),
    positions: &[Complex64],
    eval_positions: &[Complex64],
) -> std::result::Result<(Half, Half), usize> {
    let axis = geometry.split_direction();
    let n = src.len();
    if n >= 2 {
        let first = positions[src[0]];
        if src.iter().all(|&i| positions[i] == first) {
            return Err(n);
        }
    }

    let mut coords: Vec<f64> = src.iter().map(|&i| axis.coord(positions[i])).collect();
    let split = partition_median(&mut coords, src);
    let cut = if split > 0 {
        let left = coords[..split].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if split < n && n % 2 == 0 {
            let right = coords[split..].iter().copied().fold(f64::INFINITY, f64::min);
            0.5 * (left + right)
        } else {
            left
        }
    } else {
        axis.coord(geometry.center())
    };

    let (eval_split, m) = match eval {
        None => (split, n),
        Some(eval) => {
            let m = eval.len();
            (stable_partition(eval, |&i| axis.coord(eval_positions[i]) <= cut), m)
        }
    };

    let (src0, eval0) = origin;
    let (lo, hi) = geometry.split_at(axis, cut);
    Ok((
        Half {
            geometry: lo,
            src: src0..src0 + split,
            eval: eval0..eval0 + eval_split,
        },
        Half {
            geometry: hi,
            src: src0 + split..src0 + n,
            eval: eval0 + eval_split..eval0 + m,
        },
    ))
}

fn stable_partition(v: &mut [usize], pred: impl Fn(&usize) -> bool) -> usize {
    let (left, right): (Vec<usize>, Vec<usize>) = v.iter().partition(|i| pred(i));
    let split = left.len();
    v[..split].copy_from_slice(&left);
    v[split..].copy_from_slice(&right);
    split
}

fn split_box(
    node: &BoxNode,
    src: &mut [usize],
    mut eval: Option<&mut [usize]>,
    positions: &[Complex64],
    eval_positions: &[Complex64],
) -> std::result::Result<[BoxNode; 4], usize> {
    let origin = (node.src_begin, node.eval_begin);
    let (a, b) = split_once(
        node.geometry,
        src,
        eval.as_deref_mut(),
        origin,
        positions,
        eval_positions,
    )?;

    let mut children = Vec::with_capacity(4);
    for half in [a, b] {
        let s = half.src.start - origin.0..half.src.end - origin.0;
        let e = half.eval.start - origin.1..half.eval.end - origin.1;
        let (c0, c1) = split_once(
            half.geometry,
            &mut src[s],
            eval.as_deref_mut().map(|ev| &mut ev[e]),
            (half.src.start, half.eval.start),
            positions,
            eval_positions,
        )?;
        for c in [c0, c1] {
            children.push(BoxNode {
                geometry: c.geometry,
                src_begin: c.src.start,
                src_end: c.src.end,
                eval_begin: c.eval.start,
                eval_end: c.eval.end,
            });
        }
    }
    Ok(children.try_into().expect("four children"))
}

/// Build the pyramid tree.
///
/// The root is the tight bounding rectangle of all sources and evaluation
/// points. Each box is split twice in succession, each time across the
/// longer side of the current rectangle at the source median.
pub fn build_tree(points: &ParticleSet, cfg: &TreeConfig) -> Result<FmmTree> {
    cfg.validate()?;
    let positions = points.positions();
    let eval_positions = points.eval_positions();
    let alias = points.eval_aliases_sources();
    let n = positions.len();
    let m = eval_positions.len();

    let n_levels = num_levels(n, cfg.n_desired_per_box).min(max_levels_for(n));

    let root_geometry = if alias {
        BoxGeometry::bounding(positions)
    } else {
        BoxGeometry::bounding(positions.iter().chain(eval_positions))
    }
    .ok_or(FmmError::EmptyInput)?;

    let mut src_perm: Vec<usize> = (0..n).collect();
    let mut eval_perm: Vec<usize> = (0..m).collect();
    let mut levels = vec![vec![BoxNode {
        geometry: root_geometry,
        src_begin: 0,
        src_end: n,
        eval_begin: 0,
        eval_end: m,
    }]];

    for l in 0..n_levels {
        let parents = &levels[l];
        let src_chunks = split_ranges_mut(&mut src_perm, parents.iter().map(BoxNode::src_range));
        let eval_chunks: Vec<Option<&mut [usize]>> = if alias {
            parents.iter().map(|_| None).collect()
        } else {
            split_ranges_mut(&mut eval_perm, parents.iter().map(BoxNode::eval_range))
                .into_iter()
                .map(Some)
                .collect()
        };
        let tasks: Vec<_> = parents.iter().zip(src_chunks).zip(eval_chunks).collect();
        let results = map_tasks(cfg.parallel, tasks, |_, ((node, src), eval)| {
            split_box(node, src, eval, positions, eval_positions)
        });

        let mut next = Vec::with_capacity(4 * parents.len());
        for (k, r) in results.into_iter().enumerate() {
            match r {
                Ok(children) => next.extend(children),
                Err(count) => {
                    return Err(FmmError::DegenerateInput {
                        level: l,
                        box_index: k,
                        count,
                    })
                }
            }
        }
        levels.push(next);
    }

    if alias {
        eval_perm.clone_from(&src_perm);
    }
    let sources = src_perm.iter().map(|&i| positions[i]).collect();
    let strengths = src_perm.iter().map(|&i| points.strengths()[i]).collect();
    let eval_points = eval_perm.iter().map(|&i| eval_positions[i]).collect();

    Ok(FmmTree {
        levels,
        src_perm,
        eval_perm,
        sources,
        strengths,
        eval_points,
        eval_aliases_sources: alias,
    })
}
