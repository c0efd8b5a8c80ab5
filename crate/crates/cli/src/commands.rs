use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use sparselr::io::{self, DataKind, MetricReport};
use sparselr::metrics::{psnr, ssim, sparsity_level, truncate_reconstruct, SsimMode, SsimParams};
use sparselr::solver::{self, StopReason};
use sparselr::{DenseTensor, Error, Problem, SamplingMask, SolverConfig};

use crate::{
    CompleteArgs, Failure, MaskArgs, MetricsArgs, SparsityArgs, SsimModeArg, SweepArgs, EXIT_NOT_CONVERGED,
};

type CmdResult = Result<u8, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn load_config(path: Option<&Path>) -> Result<SolverConfig, Failure> {
    match path {
        None => Ok(SolverConfig::wnn()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            SolverConfig::from_json(&text).map_err(|e| usage(format!("{}: {e}", p.display())))
        }
    }
}

/// Videos get uniform mode weights unless the config sets them.
fn config_for(mut cfg: SolverConfig, kind: DataKind, order: usize) -> SolverConfig {
    if kind == DataKind::Video && cfg.alpha.is_empty() {
        cfg.alpha = vec![1.0 / order as f64; order];
    }
    cfg
}

/// `1` for data in `[0, 1]` (every image import), `255` otherwise.
fn infer_range(t: &DenseTensor) -> f64 {
    if t.max() <= 1.0 {
        1.0
    } else {
        255.0
    }
}

fn check_shapes(a: &DenseTensor, b: &DenseTensor) -> Result<(), Failure> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            left: a.shape().to_vec(),
            right: b.shape().to_vec(),
        }
        .into());
    }
    Ok(())
}

/// SSIM where the data is large enough for the window, otherwise `None`.
fn try_ssim(x: &DenseTensor, truth: &DenseTensor, params: &SsimParams) -> Option<f64> {
    ssim(x, truth, params).ok()
}

fn fmt_psnr(v: f64) -> String {
    if v.is_infinite() && v > 0.0 {
        "inf".into()
    } else {
        v.to_string()
    }
}

pub fn mask(a: &MaskArgs) -> CmdResult {
    let shape = match (&a.shape, &a.like) {
        (Some(s), _) => Some(s.clone()),
        (None, Some(p)) => Some(io::load_any(p)?.1.shape().to_vec()),
        (None, None) => None,
    };
    let mask = match (&a.from_image, a.sr) {
        (Some(img), _) => {
            let shape = match shape {
                Some(s) => s,
                None => {
                    let im = io::read_image8(img)?;
                    vec![im.height, im.width]
                }
            };
            io::mask_from_image(img, &shape)?
        }
        (None, Some(sr)) => {
            let shape = shape.ok_or_else(|| usage("--sr needs --shape or --like"))?;
            SamplingMask::random(&shape, sr, a.seed.unwrap_or(0))?
        }
        (None, None) => return Err(usage("one of --sr or --from-image is required")),
    };
    io::save_mask(&mask, &a.out)?;
    println!(
        "observed {} of {} entries (sr {:.6}), shape {:?}",
        mask.count(),
        mask.len(),
        mask.sampling_rate(),
        mask.shape()
    );
    Ok(0)
}

pub fn complete(a: &CompleteArgs) -> CmdResult {
    let (kind, input) = io::load_any(&a.input)?;
    let mask = io::load_mask_for(&a.mask, input.shape())?;
    let cfg = config_for(load_config(a.config.as_deref())?, kind, input.order());
    let truth = match &a.truth {
        Some(p) => {
            let t = io::load_any(p)?.1;
            check_shapes(&t, &input)?;
            Some(t)
        }
        None => None,
    };
    let mut problem = Problem::new(&input, &mask);
    if let Some(t) = &truth {
        problem = problem.with_truth(t);
    }

    let started = Instant::now();
    let sol = sparselr::solve(&problem, &cfg)?;
    let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
    io::save_any(&sol.x, &a.out)?;

    let range = a.range.unwrap_or_else(|| infer_range(truth.as_ref().unwrap_or(&input)));
    let report = MetricReport {
        psnr_db: truth.as_ref().map(|t| psnr(&sol.x, t)).transpose()?,
        ssim: truth.as_ref().and_then(|t| try_ssim(&sol.x, t, &SsimParams::new(range))),
        elapsed_ms,
        iterations: sol.iterations(),
        sr: mask.sampling_rate(),
        stop: Some(sol.stop),
        relative_error: truth.as_ref().map(|t| sol.x.distance(t).map(|d| d / t.frob_norm())).transpose()?,
        residuals: Some(solver::kkt_residuals_masked(&sol.state, &mask)?),
    };
    if let Some(p) = &a.report {
        report.save(p)?;
    }
    if let Some(p) = &a.history {
        io::save_history_csv(&sol.history, p)?;
    }
    println!("{:?} after {} iterations in {:.0} ms", sol.stop, sol.iterations(), elapsed_ms);
    Ok(if sol.converged() { 0 } else { EXIT_NOT_CONVERGED })
}

#[derive(Serialize)]
struct PairMetrics {
    #[serde(with = "sparselr::io::report::psnr_value")]
    psnr_db: Option<f64>,
    ssim: Option<f64>,
    range: f64,
}

pub fn metrics(a: &MetricsArgs) -> CmdResult {
    let x = io::load_any(&a.a)?.1;
    let truth = io::load_any(&a.b)?.1;
    check_shapes(&x, &truth)?;
    let range = a.range.unwrap_or_else(|| infer_range(&truth));
    let mut params = SsimParams::new(range);
    if let SsimModeArg::Global = a.ssim_mode {
        params.mode = SsimMode::Global;
    }
    let out = PairMetrics {
        psnr_db: Some(psnr(&x, &truth)?),
        ssim: try_ssim(&x, &truth, &params),
        range,
    };
    println!("{}", serde_json::to_string_pretty(&out).expect("metrics serialize"));
    Ok(0)
}

fn write_csv(out: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| usage(e.to_string());
    w.write_record(header).map_err(io_err)?;
    for r in rows {
        w.write_record(r).map_err(io_err)?;
    }
    let bytes = w.into_inner().map_err(|e| usage(e.to_string()))?;
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{}", String::from_utf8_lossy(&bytes));
            Ok(())
        }
    }
}

pub fn sparsity(a: &SparsityArgs) -> CmdResult {
    let t = io::load_any(&a.input)?.1;
    let rows = a
        .tn
        .iter()
        .map(|&tn| -> Result<Vec<String>, Failure> {
            let level = sparsity_level(&t, tn)?;
            let rec = psnr(&truncate_reconstruct(&t, tn)?, &t)?;
            Ok(vec![tn.to_string(), level.to_string(), fmt_psnr(rec)])
        })
        .collect::<Result<Vec<_>, _>>()?;
    write_csv(a.out.as_deref(), &["tn", "sparsity_level", "reconstruction_psnr"], &rows)?;
    Ok(0)
}

struct SweepRow {
    sr: f64,
    seed: u64,
    outcome: Result<(f64, Option<f64>, usize, StopReason), Error>,
    seconds: f64,
}

fn sweep_run(input: &DenseTensor, truth: &DenseTensor, cfg: &SolverConfig, range: f64, sr: f64, seed: u64) -> SweepRow {
    let started = Instant::now();
    let outcome = (|| {
        let mask = SamplingMask::random(input.shape(), sr, seed)?;
        let observed = mask.project(input)?;
        let mut cfg = cfg.clone();
        cfg.seed = seed;
        let sol = sparselr::solve(&Problem::new(&observed, &mask).with_truth(truth), &cfg)?;
        let p = psnr(&sol.x, truth)?;
        Ok((p, try_ssim(&sol.x, truth, &SsimParams::new(range)), sol.iterations(), sol.stop))
    })();
    SweepRow {
        sr,
        seed,
        outcome,
        seconds: started.elapsed().as_secs_f64(),
    }
}

pub fn sweep(a: &SweepArgs) -> CmdResult {
    let (kind, input) = io::load_any(&a.input)?;
    let truth = match &a.truth {
        Some(p) => io::load_any(p)?.1,
        None => input.clone(),
    };
    check_shapes(&input, &truth)?;
    let cfg = config_for(load_config(a.config.as_deref())?, kind, input.order());
    cfg.validate()?;
    let range = a.range.unwrap_or_else(|| infer_range(&truth));

    let mut grid: Vec<(f64, u64)> = a.sr.iter().flat_map(|&sr| a.seeds.iter().map(move |&s| (sr, s))).collect();
    grid.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    grid.dedup();

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = a.jobs {
        if j == 0 {
            return Err(usage("--jobs must be >= 1"));
        }
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| usage(e.to_string()))?;
    let results: Vec<SweepRow> = pool.install(|| {
        grid.par_iter()
            .map(|&(sr, seed)| sweep_run(&input, &truth, &cfg, range, sr, seed))
            .collect()
    });

    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            let mut row = vec![r.sr.to_string(), r.seed.to_string()];
            match &r.outcome {
                Ok((p, s, iters, stop)) => {
                    let status = match stop {
                        StopReason::Converged => "converged",
                        StopReason::MaxIter => "max_iter",
                        StopReason::PenaltyLimit => "penalty_limit",
                    };
                    row.extend([
                        fmt_psnr(*p),
                        s.map_or(String::new(), |v| v.to_string()),
                        iters.to_string(),
                        format!("{:.3}", r.seconds),
                        status.to_string(),
                    ]);
                }
                Err(e) => row.extend([
                    String::new(),
                    String::new(),
                    String::new(),
                    format!("{:.3}", r.seconds),
                    format!("error: {e}"),
                ]),
            }
            row
        })
        .collect();
    write_csv(
        Some(&a.out),
        &["sr", "seed", "psnr", "ssim", "iters", "seconds", "status"],
        &rows,
    )?;
    let failed = results.iter().filter(|r| r.outcome.is_err()).count();
    println!("{} runs, {failed} failed", results.len());
    Ok(0)
}
