//! Scaling benchmark: run the pipeline across refinements of a canonical
//! shape, report median stage timings, and fit the runtime exponent against
//! the tetrahedron count.

use std::path::PathBuf;
use std::sync::Arc;

use clap::Args;
use serde::Serialize;

use dsforge_core::ds::{run_ds, RunOptions};
use dsforge_core::mesh::generate::{generate_canonical, CanonicalShape};
use dsforge_core::mesh::split_regions;
use dsforge_core::report::write_bytes;

use crate::commands::CmdResult;
use crate::EXIT_VERIFICATION_FAILURE;

#[derive(Args)]
pub struct BenchArgs {
    /// canonical shape to refine
    #[arg(long, value_parser = crate::commands::parse_shape)]
    pub shape: CanonicalShape,
    #[arg(long = "refine-min", default_value_t = 1)]
    pub refine_min: u32,
    #[arg(long = "refine-max", default_value_t = 3)]
    pub refine_max: u32,
    /// repetitions per refinement; the median is reported
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    /// fail (exit 2) when the fitted exponent exceeds the linearity bound
    #[arg(long)]
    pub ci: bool,
    /// report output path (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// worker threads for component-level parallelism
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Linearity bound on the fitted runtime exponent.
pub const EXPONENT_BOUND: f64 = 1.3;

#[derive(Debug, Serialize)]
pub struct BenchPoint {
    pub extend_ms: f64,
    pub extract_ms: f64,
    pub fallback_edges: usize,
    pub lanes: usize,
    pub median_ms: f64,
    pub refinement: u32,
    pub surface_ms: f64,
    pub tets: usize,
    pub thin_ms: f64,
}

#[derive(Debug, Serialize)]
pub struct BenchReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    pub exponent_bound: f64,
    pub points: Vec<BenchPoint>,
    pub reps: usize,
    pub shape: String,
}

pub fn run_bench(
    shape: CanonicalShape,
    refine_min: u32,
    refine_max: u32,
    reps: usize,
) -> Result<BenchReport, dsforge_core::error::Error> {
    assert!(refine_min >= 1 && refine_min <= refine_max && reps >= 1);
    let mut points = Vec::new();
    for refinement in refine_min..=refine_max {
        let mesh = generate_canonical(shape, refinement);
        let tets = mesh.tets.len();
        let complex = Arc::new(mesh.build_complex()?);
        let split = split_regions(complex.clone(), &shape.conductor_tags(), true)?;
        let options = RunOptions::default();
        let mut totals = Vec::with_capacity(reps);
        let mut last = None;
        for _ in 0..reps {
            let out = run_ds(&split, &options)?;
            totals.push(out.timings.total_ms);
            last = Some(out);
        }
        let out = last.expect("at least one rep");
        points.push(BenchPoint {
            extend_ms: out.timings.extend_ms,
            extract_ms: out.timings.extract_ms,
            fallback_edges: out.fallback_edges,
            lanes: out.lazy.count(),
            median_ms: median(&mut totals),
            refinement,
            surface_ms: out.timings.surface_ms,
            tets,
            thin_ms: out.timings.thin_ms,
        });
    }
    let exponent = fit_exponent(&points);
    Ok(BenchReport {
        exponent,
        exponent_bound: EXPONENT_BOUND,
        points,
        reps,
        shape: shape.name().to_string(),
    })
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Least-squares slope of log(time) against log(tets); omitted for a single
/// refinement.
pub fn fit_exponent(points: &[BenchPoint]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.tets as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.median_ms.max(1e-3).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Some(num / den)
}

pub fn cmd_bench(args: &BenchArgs) -> CmdResult {
    if args.refine_min == 0 || args.refine_min > args.refine_max {
        return Err("invalid refinement range".into());
    }
    let threads = if let Ok(env) = std::env::var("DSFORGE_THREADS") {
        env.parse::<usize>().ok()
    } else {
        args.threads
    };
    let report = match threads {
        None => run_bench(args.shape, args.refine_min, args.refine_max, args.reps)?,
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(|| run_bench(args.shape, args.refine_min, args.refine_max, args.reps))?,
    };

    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    match &args.out {
        Some(path) => write_bytes(path, text.as_bytes())?,
        None => print!("{text}"),
    }

    if args.ci {
        if let Some(e) = report.exponent {
            if e > EXPONENT_BOUND {
                eprintln!("scaling exponent {e:.3} exceeds bound {EXPONENT_BOUND}");
                return Ok(EXIT_VERIFICATION_FAILURE);
            }
        }
    }
    Ok(0)
}
