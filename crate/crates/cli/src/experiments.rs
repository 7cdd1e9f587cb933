//! Experiment runners. Each returns benchmark rows plus whatever summary the
//! experiment exists to produce.
//!
//! Timings discard one warm-up run and average the remaining repetitions.
//! The `total` row of an FMM run is the sum of its phase rows.

use std::time::Instant;

use fmm2d_core::{
    direct_evaluate_with, fmm_evaluate, max_rel_error, num_levels, ParticleSet, Phase, PotentialField, TreeConfig,
};

use crate::args::{AdaptivityArgs, BreakevenArgs, CalibrateArgs, CommonArgs, Mode};
use crate::dist::{sample_points, DistKind};
use crate::error::{CliError, Result};
use crate::io::{read_points, BenchmarkRow};

pub struct FmmTiming {
    pub field: PotentialField,
    /// Mean seconds per phase, indexed like [`Phase::ALL`].
    pub phases: [f64; 9],
    pub levels: usize,
}

impl FmmTiming {
    pub fn total(&self) -> f64 {
        self.phases.iter().sum()
    }
}

fn check_reps(reps: usize) -> Result<()> {
    if reps == 0 {
        return Err(CliError::BadArgs("--reps must be at least 1".into()));
    }
    Ok(())
}

pub fn time_fmm(points: &ParticleSet, cfg: &TreeConfig, reps: usize) -> Result<FmmTiming> {
    check_reps(reps)?;
    let (field, report) = fmm_evaluate(points, cfg)?;
    let mut phases = [0.0; 9];
    for _ in 0..reps {
        let (_, r) = fmm_evaluate(points, cfg)?;
        for (acc, s) in phases.iter_mut().zip(r.phase_seconds) {
            *acc += s;
        }
    }
    phases.iter_mut().for_each(|s| *s /= reps as f64);
    Ok(FmmTiming {
        field,
        phases,
        levels: report.stats.levels,
    })
}

/// Plain pairwise summation; returns the field and the mean wall time.
pub fn time_direct(points: &ParticleSet, parallel: bool, reps: usize) -> Result<(PotentialField, f64)> {
    check_reps(reps)?;
    let field = direct_evaluate_with(points, false, parallel);
    let start = Instant::now();
    for _ in 0..reps {
        std::hint::black_box(direct_evaluate_with(points, false, parallel));
    }
    Ok((field, start.elapsed().as_secs_f64() / reps as f64))
}

/// Sources from `--in` if given, otherwise sampled from `kind`.
pub fn load_points(common: &CommonArgs, kind: DistKind, n: usize) -> Result<ParticleSet> {
    match &common.input {
        Some(path) => read_points(path),
        None => {
            if n == 0 {
                return Err(CliError::BadArgs("--n must be at least 1".into()));
            }
            sample_points(&common.distribution(kind)?, n, common.m)
        }
    }
}

fn row(experiment: &str, points: &ParticleSet, cfg: &TreeConfig, phase: &str, seconds: f64) -> BenchmarkRow {
    BenchmarkRow {
        experiment: experiment.into(),
        n: points.n_sources(),
        m: points.n_eval(),
        p: cfg.p_terms,
        nd: cfg.n_desired_per_box,
        theta: cfg.theta.theta(),
        levels: num_levels(points.n_sources(), cfg.n_desired_per_box),
        phase: phase.into(),
        seconds,
        tol: None,
    }
}

fn fmm_rows(experiment: &str, points: &ParticleSet, cfg: &TreeConfig, t: &FmmTiming) -> Vec<BenchmarkRow> {
    let mut rows: Vec<_> = Phase::ALL
        .iter()
        .map(|&ph| row(experiment, points, cfg, ph.name(), t.phases[ph as usize]))
        .collect();
    rows.push(row(experiment, points, cfg, "total", t.total()));
    rows
}

pub fn run_accuracy(common: &CommonArgs) -> Result<Vec<BenchmarkRow>> {
    let cfg = common.tree_config()?;
    let points = load_points(common, common.dist, common.n)?;
    let mut rows = Vec::new();
    let fmm = match common.mode {
        Mode::Direct => None,
        _ => Some(time_fmm(&points, &cfg, common.reps)?),
    };
    let direct = match common.mode {
        Mode::Fmm => None,
        _ => Some(time_direct(&points, common.parallel, common.reps)?),
    };
    if let Some(t) = &fmm {
        rows.extend(fmm_rows("accuracy", &points, &cfg, t));
        if let Some((exact, _)) = &direct {
            rows.last_mut().expect("total row").tol = Some(max_rel_error(&t.field, exact)?.max);
        }
    }
    if let Some((_, secs)) = direct {
        rows.push(row("accuracy", &points, &cfg, "direct", secs));
    }
    Ok(rows)
}

pub struct Calibration {
    pub rows: Vec<BenchmarkRow>,
    /// `(p, best nd)` per swept order.
    pub optimum: Vec<(usize, usize)>,
}

pub fn run_calibration(args: &CalibrateArgs) -> Result<Calibration> {
    let common = &args.common;
    if args.nd_list.is_empty() {
        return Err(CliError::BadArgs("--nd-list is empty".into()));
    }
    let points = load_points(common, common.dist, common.n)?;
    let p_list = if args.p_list.is_empty() { vec![common.p] } else { args.p_list.clone() };
    let mut rows = Vec::new();
    let mut optimum = Vec::new();
    for &p in &p_list {
        let mut totals = Vec::with_capacity(args.nd_list.len());
        for &nd in &args.nd_list {
            let cfg = common.tree_config_with(p, nd)?;
            let t = time_fmm(&points, &cfg, common.reps)?;
            totals.push((cfg, t.total()));
        }
        let (best_cfg, best) = totals
            .iter()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .copied()
            .expect("non-empty sweep");
        for (cfg, secs) in &totals {
            rows.push(row("calibrate", &points, cfg, "total", *secs));
            rows.push(row("calibrate", &points, cfg, "normalized", secs / best));
        }
        rows.push(row("calibrate", &points, &best_cfg, "optimum", best));
        optimum.push((p, best_cfg.n_desired_per_box));
    }
    Ok(Calibration { rows, optimum })
}

pub struct Breakeven {
    pub rows: Vec<BenchmarkRow>,
    /// `(n, fmm seconds, direct seconds)` in sweep order.
    pub timings: Vec<(usize, f64, f64)>,
    /// Smallest swept `n` from which the FMM is faster at every larger `n`.
    pub crossover: Option<usize>,
}

impl Breakeven {
    /// `direct(n_k) / direct(n_{k−1})` for the two largest swept sizes.
    pub fn direct_growth(&self) -> Option<f64> {
        match self.timings.as_slice() {
            [.., a, b] => Some(b.2 / a.2),
            _ => None,
        }
    }
}

pub fn run_breakeven(args: &BreakevenArgs) -> Result<Breakeven> {
    let common = &args.common;
    if common.input.is_some() {
        return Err(CliError::BadArgs("breakeven generates its own points; drop --in".into()));
    }
    let cfg = common.tree_config()?;
    let mut n_list = args.n_list.clone();
    n_list.sort_unstable();
    n_list.dedup();
    let mut rows = Vec::new();
    let mut timings = Vec::new();
    for &n in &n_list {
        let points = load_points(common, common.dist, n)?;
        let fmm = time_fmm(&points, &cfg, common.reps)?.total();
        let (_, direct) = time_direct(&points, common.parallel, common.reps)?;
        rows.push(row("breakeven", &points, &cfg, "fmm", fmm));
        rows.push(row("breakeven", &points, &cfg, "direct", direct));
        timings.push((n, fmm, direct));
    }
    // first size after the last one where direct summation was not slower
    let first = timings.iter().rposition(|&(_, f, d)| f >= d).map_or(0, |i| i + 1);
    let crossover = timings.get(first).map(|t| t.0);
    if crossover.is_some() {
        let mut marker = rows[2 * first].clone();
        marker.phase = "crossover".into();
        rows.push(marker);
    }
    Ok(Breakeven { rows, timings, crossover })
}

pub struct Adaptivity {
    pub rows: Vec<BenchmarkRow>,
    /// `(dist, n, seconds, seconds / uniform seconds, tol)`.
    pub results: Vec<(DistKind, usize, f64, f64, Option<f64>)>,
}

pub fn run_adaptivity(args: &AdaptivityArgs) -> Result<Adaptivity> {
    let common = &args.common;
    if common.input.is_some() {
        return Err(CliError::BadArgs("adaptivity generates its own points; drop --in".into()));
    }
    let cfg = common.tree_config()?;
    let n_list = if args.n_list.is_empty() { vec![common.n] } else { args.n_list.clone() };
    let mut dists = vec![DistKind::Uniform];
    dists.extend(args.dists.iter().filter(|&&d| d != DistKind::Uniform));
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for &n in &n_list {
        let mut baseline = None;
        for &kind in &dists {
            let points = load_points(common, kind, n)?;
            let t = time_fmm(&points, &cfg, common.reps)?;
            let tol = match common.mode {
                Mode::Fmm => None,
                _ => {
                    let exact = direct_evaluate_with(&points, true, common.parallel);
                    Some(max_rel_error(&t.field, &exact)?.max)
                }
            };
            let base = *baseline.get_or_insert(t.total());
            let name = format!("adaptivity-{}", kind.name());
            let mut total = row(&name, &points, &cfg, "total", t.total());
            total.tol = tol;
            rows.push(total);
            rows.push(row(&name, &points, &cfg, "normalized", t.total() / base));
            results.push((kind, n, t.total(), t.total() / base, tol));
        }
    }
    Ok(Adaptivity { rows, results })
}
