//! Drives a run: floorplan, per-epoch training and cost estimation, reports.

use std::path::PathBuf;

use rayon::prelude::*;

use crate::archsim::{area_rollup, epoch_rollup, ArchContext};
use crate::config::RunConfig;
use crate::error::Result;
use crate::mapping::build_floorplan;
use crate::net::Network;
use crate::report::{emit_reports, EpochReport};
use crate::seed;

/// Receives one human-readable line per completed epoch.
pub type Progress<'a> = &'a (dyn Fn(&str) + Sync);

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub output_dir: PathBuf,
    pub reports: Vec<EpochReport>,
    pub files: Vec<PathBuf>,
}

/// Runs one configuration end to end. Nothing is written unless the config
/// validates.
pub fn run_benchmark(cfg: &RunConfig, progress: Progress) -> Result<RunOutcome> {
    cfg.validate()?;
    let device = cfg.device_spec()?;
    let net = cfg.network()?;
    let costs = cfg.cost_table()?;
    let (train, test) = cfg.datasets(&net)?;
    let floorplan = build_floorplan(&net, &cfg.hierarchy, device.cells_per_weight())?;
    let ctx = ArchContext::new(&net, &floorplan, &device, &costs, cfg.buffer_overhead_constraint)?;
    let area = area_rollup(&ctx);
    let mut network = Network::new(&net, &device, cfg.engine_options())?;

    let epochs = cfg.schedule.epochs;
    let mut reports = Vec::with_capacity(epochs);
    for epoch in 1..=epochs {
        network.set_lr(cfg.lr_at(epoch));
        let mut trace = network.train_epoch(&train, cfg.schedule.batch_size, epoch)?;
        trace.accuracy = network.evaluate(&test)?;
        let cost = epoch_rollup(&trace, &ctx)?;
        let report = EpochReport::new(&trace, &cost, area, &floorplan);
        progress(&format!(
            "epoch {epoch}/{epochs}  accuracy {:.4}  loss {:.4}  latency {:.4e} s  energy {:.4e} J",
            report.accuracy, report.train_loss, report.metrics.latency, report.metrics.energy
        ));
        reports.push(report);
    }
    let files = emit_reports(&reports, &cfg.output_dir)?;
    Ok(RunOutcome {
        output_dir: cfg.output_dir.clone(),
        reports,
        files,
    })
}

/// The configs of a sweep over `param`: one per value, each writing to
/// `<output_dir>/<param>=<value>` with its own derived seed.
pub fn sweep_points(cfg: &RunConfig, param: &str, values: &[String]) -> Result<Vec<(String, RunConfig)>> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut c = cfg.clone();
            c.set_param(param, v)?;
            if param != "seed" {
                c.seed = seed::derive(cfg.seed, &[i as u64]);
            }
            let label = format!("{param}={v}");
            c.output_dir = cfg.output_dir.join(&label);
            c.validate()?;
            Ok((label, c))
        })
        .collect()
}

/// Runs every sweep point, concurrently. All points are validated before
/// any runs.
pub fn run_sweep(cfg: &RunConfig, param: &str, values: &[String], progress: Progress) -> Result<Vec<(String, RunOutcome)>> {
    let points = sweep_points(cfg, param, values)?;
    points
        .into_par_iter()
        .map(|(label, c)| {
            let tagged = |line: &str| progress(&format!("[{label}] {line}"));
            run_benchmark(&c, &tagged).map(|o| (label, o))
        })
        .collect()
}
