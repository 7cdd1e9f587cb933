//! Full evaluation pipeline, the direct-summation oracle and the error metric.
//!
//! Phases run one after another with a barrier in between. Inside a phase
//! there is one task per target box, and each task writes only to its own
//! box's expansion or to its own evaluation points, so the sequential and
//! parallel modes perform identical arithmetic.

use std::fmt;
use std::time::Instant;

use num_complex::Complex64;

use crate::connectivity::{build_connectivity_with, InteractionLists};
use crate::error::{FmmError, Result};
use crate::exec::{map_tasks, split_ranges_mut};
use crate::operators::{
    l2l_accumulate, l2p, m2l_accumulate, m2m_accumulate, m2p_at, p2l_accumulate, p2m_accumulate,
    p2p_accumulate, p2p_symmetric_pair, p2p_symmetric_self, AliasOffsets, ShiftVariant,
};
use crate::tree::{build_tree, BoxNode, FmmTree, ParticleSet, TreeConfig};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Potential per evaluation point, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    pub values: Vec<Complex64>,
}

impl PotentialField {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Sort,
    Connect,
    P2m,
    M2m,
    M2l,
    L2l,
    L2p,
    P2p,
    Other,
}

impl Phase {
    pub const ALL: [Phase; 9] = [
        Phase::Sort,
        Phase::Connect,
        Phase::P2m,
        Phase::M2m,
        Phase::M2l,
        Phase::L2l,
        Phase::L2p,
        Phase::P2p,
        Phase::Other,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Phase::Sort => "sort",
            Phase::Connect => "connect",
            Phase::P2m => "p2m",
            Phase::M2m => "m2m",
            Phase::M2l => "m2l",
            Phase::L2l => "l2l",
            Phase::L2p => "l2p",
            Phase::P2p => "p2p",
            Phase::Other => "other",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TreeStats {
    pub levels: usize,
    pub boxes: usize,
    pub min_per_box: usize,
    pub max_per_box: usize,
    pub mean_per_box: f64,
    /// `hist[k]` = number of boxes whose list has length `k`.
    pub weak_hist: Vec<usize>,
    pub p2p_hist: Vec<usize>,
    pub p2l_hist: Vec<usize>,
    pub m2p_hist: Vec<usize>,
}

impl TreeStats {
    fn collect(tree: &FmmTree, lists: &InteractionLists) -> Self {
        let finest = tree.finest();
        let counts = finest.iter().map(BoxNode::n_sources);
        let all_weak: Vec<Vec<usize>> = lists.weak.iter().flatten().cloned().collect();
        Self {
            levels: tree.n_levels(),
            boxes: (0..=tree.n_levels()).map(|l| tree.level(l).len()).sum(),
            min_per_box: counts.clone().min().unwrap_or(0),
            max_per_box: counts.clone().max().unwrap_or(0),
            mean_per_box: tree.sources().len() as f64 / finest.len() as f64,
            weak_hist: InteractionLists::length_histogram(&all_weak),
            p2p_hist: InteractionLists::length_histogram(&lists.p2p),
            p2l_hist: InteractionLists::length_histogram(&lists.p2l),
            m2p_hist: InteractionLists::length_histogram(&lists.m2p),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EngineReport {
    /// Wall time per phase in seconds, indexed like [`Phase::ALL`].
    pub phase_seconds: [f64; 9],
    pub stats: TreeStats,
    /// Coincident source/evaluation pairs skipped in the near field
    /// (excluding a point paired with itself).
    pub coincident_pairs: usize,
}

impl EngineReport {
    pub fn seconds(&self, phase: Phase) -> f64 {
        self.phase_seconds[phase as usize]
    }

    pub fn total_seconds(&self) -> f64 {
        self.phase_seconds.iter().sum()
    }
}

struct PhaseClock {
    last: Instant,
}

impl PhaseClock {
    fn start() -> Self {
        Self { last: Instant::now() }
    }

    fn lap(&mut self, report: &mut EngineReport, phase: Phase) {
        let now = Instant::now();
        report.phase_seconds[phase as usize] += (now - self.last).as_secs_f64();
        self.last = now;
    }
}

fn first_error(results: Vec<Result<()>>) -> Result<()> {
    results.into_iter().collect()
}

/// Evaluate the potential at every evaluation point with the fast multipole method.
pub fn fmm_evaluate(points: &ParticleSet, cfg: &TreeConfig) -> Result<(PotentialField, EngineReport)> {
    cfg.validate()?;
    let mut report = EngineReport::default();
    let mut clock = PhaseClock::start();
    let parallel = cfg.parallel;

    let tree = build_tree(points, cfg)?;
    clock.lap(&mut report, Phase::Sort);

    let lists = build_connectivity_with(&tree, cfg.theta, parallel);
    clock.lap(&mut report, Phase::Connect);

    let p = cfg.p_terms;
    let stride = p + 1;
    let n_levels = tree.n_levels();
    let sources = tree.sources();
    let strengths = tree.strengths();
    let finest = tree.finest();

    let mut multipoles: Vec<Vec<Complex64>> = (0..=n_levels)
        .map(|l| vec![ZERO; tree.level(l).len() * stride])
        .collect();
    let mut locals = multipoles.clone();

    // Only needed when some expansion is read by another box.
    let far_field = n_levels > 0;

    if far_field {
        let tasks: Vec<_> = multipoles[n_levels].chunks_mut(stride).zip(locals[n_levels].chunks_mut(stride)).collect();
        let results = map_tasks(parallel, tasks, |b, (mult, local)| {
            let node = &finest[b];
            let r = node.src_range();
            p2m_accumulate(&sources[r.clone()], &strengths[r], node.geometry.center(), mult);
            for &a in &lists.p2l[b] {
                let ra = finest[a].src_range();
                p2l_accumulate(&sources[ra.clone()], &strengths[ra], node.geometry.center(), local)?;
            }
            Ok(())
        });
        first_error(results)?;
    }
    clock.lap(&mut report, Phase::P2m);

    for l in (1..=n_levels).rev() {
        let (upper, lower) = multipoles.split_at_mut(l);
        let children = &lower[0];
        let child_nodes = tree.level(l);
        let parent_nodes = tree.level(l - 1);
        let tasks: Vec<_> = upper[l - 1].chunks_mut(stride).collect();
        crate::exec::for_each_task(parallel, tasks, |k, out| {
            let mut scratch = Vec::with_capacity(stride);
            for c in FmmTree::children(k) {
                let r = child_nodes[c].geometry.center() - parent_nodes[k].geometry.center();
                m2m_accumulate(&children[c * stride..(c + 1) * stride], r, out, ShiftVariant::Scaled, &mut scratch);
            }
        });
    }
    clock.lap(&mut report, Phase::M2m);

    for l in 1..=n_levels {
        let nodes = tree.level(l);
        let mult = &multipoles[l];
        let tasks: Vec<_> = locals[l].chunks_mut(stride).collect();
        let results = map_tasks(parallel, tasks, |b, out| {
            let mut scratch = Vec::with_capacity(stride);
            for &s in &lists.weak[l][b] {
                let r = nodes[b].geometry.center() - nodes[s].geometry.center();
                m2l_accumulate(&mult[s * stride..(s + 1) * stride], r, out, &mut scratch)?;
            }
            Ok(())
        });
        first_error(results)?;
    }
    clock.lap(&mut report, Phase::M2l);

    for l in 1..=n_levels {
        let (upper, lower) = locals.split_at_mut(l);
        let parents = &upper[l - 1];
        let nodes = tree.level(l);
        let parent_nodes = tree.level(l - 1);
        let tasks: Vec<_> = lower[0].chunks_mut(stride).collect();
        crate::exec::for_each_task(parallel, tasks, |c, out| {
            let k = FmmTree::parent(c);
            let r = parent_nodes[k].geometry.center() - nodes[c].geometry.center();
            let mut scratch = Vec::with_capacity(stride);
            l2l_accumulate(&parents[k * stride..(k + 1) * stride], r, out, &mut scratch);
        });
    }
    clock.lap(&mut report, Phase::L2l);

    let eval_points = tree.eval_points();
    let mut phi = vec![ZERO; eval_points.len()];
    if far_field {
        let local = &locals[n_levels];
        let mult = &multipoles[n_levels];
        let tasks = split_ranges_mut(&mut phi, finest.iter().map(BoxNode::eval_range));
        let results = map_tasks(parallel, tasks, |b, out| {
            let node = &finest[b];
            let coeffs = &local[b * stride..(b + 1) * stride];
            for (y, v) in eval_points[node.eval_range()].iter().zip(out.iter_mut()) {
                *v += l2p(coeffs, node.geometry.center(), *y);
            }
            for &a in &lists.m2p[b] {
                let center = finest[a].geometry.center();
                let coeffs = &mult[a * stride..(a + 1) * stride];
                for (y, v) in eval_points[node.eval_range()].iter().zip(out.iter_mut()) {
                    let w = y - center;
                    if w == ZERO {
                        return Err(FmmError::Singular("multipole evaluation"));
                    }
                    *v += m2p_at(coeffs, w);
                }
            }
            Ok(())
        });
        first_error(results)?;
    }
    clock.lap(&mut report, Phase::L2p);

    let alias = tree.eval_aliases_sources();
    report.coincident_pairs = if cfg.symmetric_p2p && alias && !parallel {
        near_field_symmetric(&tree, &lists, &mut phi)
    } else {
        let tasks = split_ranges_mut(&mut phi, finest.iter().map(BoxNode::eval_range));
        map_tasks(parallel, tasks, |b, out| {
            let node = &finest[b];
            let targets = &eval_points[node.eval_range()];
            lists.p2p[b]
                .iter()
                .map(|&a| {
                    let r = finest[a].src_range();
                    let offsets = alias.then_some(AliasOffsets {
                        target_begin: node.eval_begin,
                        source_begin: r.start,
                    });
                    p2p_accumulate(targets, &sources[r.clone()], &strengths[r], out, offsets)
                })
                .sum::<usize>()
        })
        .into_iter()
        .sum()
    };
    clock.lap(&mut report, Phase::P2p);

    let mut values = vec![ZERO; phi.len()];
    for (&orig, v) in tree.eval_perm().iter().zip(phi) {
        values[orig] = v;
    }
    report.stats = TreeStats::collect(&tree, &lists);
    clock.lap(&mut report, Phase::Other);

    Ok((PotentialField { values }, report))
}

/// Near field using each unordered box pair once. Targets alias sources.
fn near_field_symmetric(tree: &FmmTree, lists: &InteractionLists, phi: &mut [Complex64]) -> usize {
    let finest = tree.finest();
    let z = tree.sources();
    let g = tree.strengths();
    let mut coincident = 0;
    for (b, list) in lists.p2p.iter().enumerate() {
        let rb = finest[b].src_range();
        for &a in list.iter().filter(|&&a| a >= b) {
            if a == b {
                coincident += p2p_symmetric_self(&z[rb.clone()], &g[rb.clone()], &mut phi[rb.clone()]);
                continue;
            }
            let ra = finest[a].src_range();
            let (lo, hi) = phi.split_at_mut(ra.start);
            coincident += p2p_symmetric_pair(
                (&z[rb.clone()], &g[rb.clone()], &mut lo[rb.clone()]),
                (&z[ra.clone()], &g[ra.clone()], &mut hi[..ra.len()]),
            );
        }
    }
    coincident
}

/// Direct summation `Φ(y_i) = Σ_{z_j ≠ y_i} Γ_j / (z_j − y_i)`.
///
/// The symmetric mode visits each pair once and only applies when the
/// evaluation points are the sources; otherwise the plain loop is used.
pub fn direct_evaluate(points: &ParticleSet, symmetric: bool) -> PotentialField {
    direct_evaluate_with(points, symmetric, false)
}

pub fn direct_evaluate_with(points: &ParticleSet, symmetric: bool, parallel: bool) -> PotentialField {
    let z = points.positions();
    let g = points.strengths();
    let y = points.eval_positions();
    let alias = points.eval_aliases_sources();
    let mut values = vec![ZERO; y.len()];

    if symmetric && alias {
        p2p_symmetric_self(z, g, &mut values);
        return PotentialField { values };
    }

    const CHUNK: usize = 256;
    let tasks: Vec<_> = values.chunks_mut(CHUNK).collect();
    crate::exec::for_each_task(parallel, tasks, |k, out| {
        let begin = k * CHUNK;
        let offsets = alias.then_some(AliasOffsets {
            target_begin: begin,
            source_begin: 0,
        });
        p2p_accumulate(&y[begin..begin + out.len()], z, g, out, offsets);
    });
    PotentialField { values }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSummary {
    /// `max_i |approx_i − exact_i| / |exact_i|`
    pub max: f64,
    /// Entries skipped because the exact value is zero.
    pub skipped: usize,
}

/// Infinity-norm relative error over entries with a nonzero exact value.
pub fn max_rel_error(approx: &PotentialField, exact: &PotentialField) -> Result<ErrorSummary> {
    if approx.len() != exact.len() {
        return Err(FmmError::LengthMismatch {
            what: "potential field",
            expected: exact.len(),
            found: approx.len(),
        });
    }
    let mut max = 0.0f64;
    let mut skipped = 0;
    for (a, e) in approx.values.iter().zip(&exact.values) {
        let scale = e.norm();
        if scale == 0.0 {
            skipped += 1;
            continue;
        }
        max = max.max((a - e).norm() / scale);
    }
    if skipped == exact.len() {
        return Err(FmmError::UndefinedMetric);
    }
    Ok(ErrorSummary { max, skipped })
}
