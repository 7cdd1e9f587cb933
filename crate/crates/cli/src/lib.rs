//! Command-line harness around `fmm2d-core`: seeded point sets, the file
//! formats and the timing experiments behind the `fmm2d` binary.

pub mod args;
pub mod dist;
pub mod error;
pub mod experiments;
pub mod io;

use std::fs;

use fmm2d_core::{build_connectivity, build_tree, direct_evaluate_with, fmm_evaluate, max_rel_error};

pub use args::{Cli, Command, Mode};
pub use dist::{sample_points, DistKind, DistributionSpec};
pub use error::{CliError, Result};
pub use io::BenchmarkRow;

use crate::args::{CommonArgs, EvaluateArgs};
use crate::experiments::load_points;
use crate::io::{with_output, write_boxes, write_potentials, write_rows};

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Accuracy(common) => {
            let rows = experiments::run_accuracy(common)?;
            if let Some(tol) = rows.iter().find_map(|r| r.tol) {
                eprintln!("tol = {tol:e}");
            }
            emit(common, &rows)
        }
        Command::Calibrate(args) => {
            let cal = experiments::run_calibration(args)?;
            for (p, nd) in &cal.optimum {
                eprintln!("p = {p}: optimal nd = {nd}");
            }
            emit(&args.common, &cal.rows)
        }
        Command::Breakeven(args) => {
            let be = experiments::run_breakeven(args)?;
            match be.crossover {
                Some(n) => eprintln!("crossover at n = {n}"),
                None => eprintln!("no crossover in the swept range"),
            }
            emit(&args.common, &be.rows)
        }
        Command::Adaptivity(args) => {
            let ad = experiments::run_adaptivity(args)?;
            emit(&args.common, &ad.rows)
        }
        Command::Evaluate(args) => evaluate(args),
    }
}

fn emit(common: &CommonArgs, rows: &[BenchmarkRow]) -> Result<()> {
    with_output(common.out.as_deref(), |w| write_rows(w, rows))
}

fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let common = &args.common;
    let cfg = common.tree_config()?;
    let points = load_points(common, common.dist, common.n)?;
    let field = match common.mode {
        Mode::Direct => direct_evaluate_with(&points, false, common.parallel),
        Mode::Fmm => fmm_evaluate(&points, &cfg)?.0,
        Mode::Both => {
            let (field, _) = fmm_evaluate(&points, &cfg)?;
            let exact = direct_evaluate_with(&points, false, common.parallel);
            eprintln!("tol = {:e}", max_rel_error(&field, &exact)?.max);
            field
        }
    };
    with_output(common.out.as_deref(), |w| {
        write_potentials(w, &field).map_err(|e| CliError::io("<output>".as_ref(), e))
    })?;

    if let Some(dir) = &args.mesh {
        let tree = build_tree(&points, &cfg)?;
        let lists = build_connectivity(&tree, cfg.theta);
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let boxes = dir.join("boxes.csv");
        with_output(Some(&boxes), |w| write_boxes(w, &tree).map_err(|e| CliError::io(&boxes, e)))?;
        let conn = dir.join("connectivity.csv");
        with_output(Some(&conn), |w| lists.write_csv(w).map_err(|e| CliError::io(&conn, e)))?;
    }
    Ok(())
}
