use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::archsim::{peak_metrics, Breakdown, EpochCost, PeakMetrics, Step, StepCost};
use crate::error::{Error, Result};
use crate::mapping::Floorplan;

use super::stats::{distribution_summary, input_activity, DistributionSummary};
use super::trace::EpochTrace;

pub const EPOCH_DIR: &str = "NeuroSim_Results_Each_Epoch";
pub const SUMMARY_FILES: [&str; 5] = [
    "NeuroSim_Output.csv",
    "PythonWrapper_Output.csv",
    "Weight_dist.csv",
    "Delta_dist.csv",
    "Input_activity.csv",
];

pub fn breakdown_file_name(epoch: usize) -> String {
    format!("Breakdown_Epoch_{epoch}.csv")
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerActivity {
    pub layer: usize,
    /// Batch-averaged ones-fraction of binarized activations.
    pub activation: f64,
    /// Batch-averaged ones-fraction of binarized errors.
    pub error: f64,
    /// Ones-fraction of the last sample's quantized layer input.
    pub input: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloorplanRow {
    pub layer: usize,
    pub arrays: usize,
    pub duplication: usize,
    pub utilization: f64,
}

/// Everything written for one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochReport {
    pub epoch: usize,
    pub accuracy: f64,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub area: Breakdown,
    /// Each step's contribution to the epoch, in `Step::ALL` order.
    pub by_step: [StepCost; 4],
    /// Sum of `by_step`.
    pub total: StepCost,
    pub metrics: PeakMetrics,
    pub memory_utilization: f64,
    pub floorplan: Vec<FloorplanRow>,
    pub distribution: DistributionSummary,
    pub activity: Vec<LayerActivity>,
}

impl EpochReport {
    pub fn new(trace: &EpochTrace, cost: &EpochCost, area: Breakdown, floorplan: &Floorplan) -> Self {
        let by_step = cost.epoch_by_step();
        let total = by_step.iter().fold(StepCost::default(), |a, s| a + *s);
        EpochReport {
            epoch: trace.epoch,
            accuracy: trace.accuracy,
            train_loss: trace.train_loss,
            train_accuracy: trace.train_accuracy,
            area,
            by_step,
            total,
            metrics: peak_metrics(&total),
            memory_utilization: floorplan.memory_utilization,
            floorplan: floorplan
                .layers
                .iter()
                .map(|p| FloorplanRow {
                    layer: p.layer,
                    arrays: p.arrays,
                    duplication: p.duplication,
                    utilization: p.utilization(),
                })
                .collect(),
            distribution: distribution_summary(trace),
            activity: trace
                .layers
                .iter()
                .map(|l| LayerActivity {
                    layer: l.layer,
                    activation: l.act_ones_fraction,
                    error: l.err_ones_fraction,
                    input: input_activity(&l.activations),
                })
                .collect(),
        }
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn row(out: &mut String, metric: &str, group: &str, key: &str, value: f64) {
    writeln!(out, "{metric},{group},{key},{}", num(value)).unwrap();
}

fn components(out: &mut String, metric: &str, group: &str, b: &Breakdown) {
    for (k, v) in b.entries() {
        row(out, metric, group, k, v);
    }
}

/// Long-format breakdown of one epoch: `metric,breakdown,key,value`.
pub fn breakdown_csv(r: &EpochReport) -> String {
    let mut o = String::from("metric,breakdown,key,value\n");
    components(&mut o, "area", "component", &r.area);
    row(&mut o, "area", "total", "total", r.area.total());

    let t = &r.total;
    components(&mut o, "latency", "component", &t.latency);
    row(&mut o, "latency", "total", "total", r.metrics.latency);
    components(&mut o, "dynamic_energy", "component", &t.dynamic_energy);
    row(&mut o, "dynamic_energy", "total", "total", r.metrics.dynamic_energy);
    row(&mut o, "leakage_energy", "total", "total", r.metrics.leakage_energy);
    row(&mut o, "energy", "total", "total", r.metrics.energy);

    for (s, c) in Step::ALL.iter().zip(&r.by_step) {
        row(&mut o, "latency", "operation", s.name(), c.total_latency());
    }
    for (s, c) in Step::ALL.iter().zip(&r.by_step) {
        row(&mut o, "energy", "operation", s.name(), c.total_energy());
    }
    for (s, c) in Step::ALL.iter().zip(&r.by_step) {
        components(&mut o, "latency", s.name(), &c.latency);
        components(&mut o, "dynamic_energy", s.name(), &c.dynamic_energy);
        row(&mut o, "leakage_energy", s.name(), "total", c.leakage_energy);
        row(&mut o, "ops", s.name(), "total", c.ops);
    }

    let peak_lat = t.latency.peak_part();
    let peak_en = t.dynamic_energy.peak_part();
    for (k, v) in peak_lat.entries() {
        if Breakdown::PEAK_COMPONENTS.contains(&k) {
            row(&mut o, "peak_latency", "component", k, v);
        }
    }
    row(&mut o, "peak_latency", "total", "total", r.metrics.peak_latency);
    for (k, v) in peak_en.entries() {
        if Breakdown::PEAK_COMPONENTS.contains(&k) {
            row(&mut o, "peak_energy", "component", k, v);
        }
    }
    row(&mut o, "peak_energy", "total", "total", r.metrics.peak_energy);

    let m = &r.metrics;
    row(&mut o, "ops", "total", "total", t.ops);
    row(&mut o, "tops", "total", "total", m.tops);
    row(&mut o, "tops_per_w", "total", "total", m.tops_per_w);
    row(&mut o, "peak_tops", "total", "total", m.peak_tops);
    row(&mut o, "peak_tops_per_w", "total", "total", m.peak_tops_per_w);
    row(&mut o, "accuracy", "total", "total", r.accuracy);

    for f in &r.floorplan {
        let g = format!("layer_{}", f.layer);
        row(&mut o, "floorplan", &g, "arrays", f.arrays as f64);
        row(&mut o, "floorplan", &g, "duplication", f.duplication as f64);
        row(&mut o, "floorplan", &g, "utilization", f.utilization);
    }
    row(&mut o, "floorplan", "total", "memory_utilization", r.memory_utilization);
    o
}

fn summary_csv(reports: &[EpochReport]) -> String {
    let mut o = String::from(
        "epoch,accuracy,area_mm2,latency_s,dynamic_energy_j,leakage_energy_j,energy_j,\
         peak_latency_s,peak_energy_j,tops,tops_per_w,peak_tops,peak_tops_per_w,memory_utilization\n",
    );
    for r in reports {
        let m = &r.metrics;
        let vals = [
            r.accuracy,
            r.area.total(),
            m.latency,
            m.dynamic_energy,
            m.leakage_energy,
            m.energy,
            m.peak_latency,
            m.peak_energy,
            m.tops,
            m.tops_per_w,
            m.peak_tops,
            m.peak_tops_per_w,
            r.memory_utilization,
        ];
        let cells: Vec<String> = vals.iter().map(|v| num(*v)).collect();
        writeln!(o, "{},{}", r.epoch, cells.join(",")).unwrap();
    }
    o
}

fn wrapper_csv(reports: &[EpochReport]) -> String {
    let mut o = String::from("epoch,accuracy,train_loss,train_accuracy\n");
    for r in reports {
        writeln!(o, "{},{},{},{}", r.epoch, num(r.accuracy), num(r.train_loss), num(r.train_accuracy)).unwrap();
    }
    o
}

fn dist_csv(reports: &[EpochReport], delta: bool) -> String {
    let mut o = String::from("epoch,layer,mean,std,normalized_mean\n");
    for r in reports {
        for l in &r.distribution.layers {
            let (m, s) = if delta { (l.delta_mean, l.delta_std) } else { (l.weight_mean, l.weight_std) };
            writeln!(o, "{},{},{},{},{}", r.epoch, l.layer, num(m), num(s), num(m * l.scale())).unwrap();
        }
    }
    o
}

fn activity_csv(reports: &[EpochReport]) -> String {
    let mut o = String::from("epoch,layer,activation_ones_fraction,error_ones_fraction,input_activity\n");
    for r in reports {
        for a in &r.activity {
            writeln!(o, "{},{},{},{},{}", r.epoch, a.layer, num(a.activation), num(a.error), num(a.input)).unwrap();
        }
    }
    o
}

fn write(path: PathBuf, text: &str) -> Result<PathBuf> {
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes the per-epoch breakdowns and the five summary files under `dir`.
/// Returns the written paths.
pub fn emit_reports(reports: &[EpochReport], dir: &Path) -> Result<Vec<PathBuf>> {
    if reports.is_empty() {
        return Err(Error::State("no epoch reports to emit".into()));
    }
    let epoch_dir = dir.join(EPOCH_DIR);
    std::fs::create_dir_all(&epoch_dir).map_err(|e| Error::io(&epoch_dir, e))?;
    let mut written = Vec::new();
    for r in reports {
        written.push(write(epoch_dir.join(breakdown_file_name(r.epoch)), &breakdown_csv(r))?);
    }
    let texts = [
        summary_csv(reports),
        wrapper_csv(reports),
        dist_csv(reports, false),
        dist_csv(reports, true),
        activity_csv(reports),
    ];
    for (name, text) in SUMMARY_FILES.iter().zip(&texts) {
        written.push(write(dir.join(name), text)?);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::archsim::{area_rollup, epoch_rollup, ArchContext, CostTable};
    use crate::device::DeviceSpec;
    use crate::mapping::{build_floorplan, HierarchyParams};
    use crate::net::{BitWidths, EngineOptions, LayerSpec, Network, NetworkTopology, SyntheticTask};

    fn reports(epochs: usize) -> Vec<EpochReport> {
        let net = NetworkTopology {
            name: "tiny".into(),
            input: (1, 4, 4),
            classes: 2,
            layers: vec![
                LayerSpec::Conv { kernel: 3, in_channels: 1, out_channels: 2, stride: 1, padding: 1 },
                LayerSpec::Relu,
                LayerSpec::MaxPool { size: 2 },
                LayerSpec::Fc { inputs: 8, outputs: 2 },
            ],
            bits: BitWidths::default(),
        };
        let dev = DeviceSpec::ideal(256);
        let data = SyntheticTask::new(4, 2, 0.2, 1).generate(16, 2);
        let costs = CostTable::default();
        let fp = build_floorplan(&net, &HierarchyParams::default(), 1).unwrap();
        let ctx = ArchContext::new(&net, &fp, &dev, &costs, 1.0).unwrap();
        let mut n = Network::new(&net, &dev, EngineOptions::default()).unwrap();
        (1..=epochs)
            .map(|e| {
                let mut t = n.train_epoch(&data, 4, e).unwrap();
                t.accuracy = n.evaluate(&data).unwrap();
                let c = epoch_rollup(&t, &ctx).unwrap();
                EpochReport::new(&t, &c, area_rollup(&ctx), &fp)
            })
            .collect()
    }

    #[test]
    fn file_set_and_row_counts() {
        let dir = tempfile::tempdir().unwrap();
        let files = emit_reports(&reports(3), dir.path()).unwrap();
        assert_eq!(files.len(), 8);
        for e in 1..=3 {
            assert!(dir.path().join(EPOCH_DIR).join(breakdown_file_name(e)).is_file());
        }
        let summary = std::fs::read_to_string(dir.path().join("NeuroSim_Output.csv")).unwrap();
        assert_eq!(summary.lines().count(), 1 + 3);
    }

    #[test]
    fn unwritable_directory_names_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        match emit_reports(&reports(1), &blocker) {
            Err(Error::Io { path, .. }) => assert!(path.starts_with(&blocker)),
            other => panic!("{other:?}"),
        }
        assert!(emit_reports(&[], dir.path()).is_err());
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 6.02e23, 1e-300, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }
}
