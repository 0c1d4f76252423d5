//! Run configuration: one TOML file, every field but `device` optional.
//!
//! ```toml
//! device = "FeFET"          # catalog name, or an inline [device] table
//! topology = "default"      # preset name, or an inline [topology] table
//! seed = 7
//!
//! [schedule]
//! batch_size = 20
//! epochs = 15
//!
//! [training]
//! beta = 0.9
//! adc_bits = 6
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::archsim::CostTable;
use crate::device::{default_catalog, C2cMode, DeviceSpec, ReadoutMode};
use crate::error::{Error, Result};
use crate::mapping::HierarchyParams;
use crate::net::{BitWidths, ComputePath, Dataset, EngineOptions, NetworkTopology, Numerics, SyntheticTask};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeviceRef {
    Name(String),
    Inline(Box<DeviceSpec>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TopologyRef {
    Preset(String),
    Inline(NetworkTopology),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Schedule {
    pub batch_size: usize,
    pub epochs: usize,
    /// Caps the batches per epoch; by default every full batch of the
    /// training set is used and a partial last batch is dropped.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batches_per_epoch: Option<usize>,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            batch_size: 20,
            epochs: 15,
            batches_per_epoch: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Training {
    pub beta: f64,
    pub lr: f64,
    /// Learning rate is multiplied by this from `lr_step_epoch` on.
    pub lr_decay: f64,
    /// Defaults to `2 * epochs / 3 + 1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr_step_epoch: Option<usize>,
    pub numerics: Numerics,
    pub path: ComputePath,
    /// ADC resolution on the mapped path; 0 reads partial sums exactly.
    pub adc_bits: u32,
    pub init_range: f64,
    pub c2c_mode: C2cMode,
}

impl Default for Training {
    fn default() -> Self {
        Training {
            beta: 0.9,
            lr: 0.5,
            lr_decay: 0.1,
            lr_step_epoch: None,
            numerics: Numerics::Quantized,
            path: ComputePath::Cim,
            adc_bits: 6,
            init_range: 0.5,
            c2c_mode: C2cMode::Aggregated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    /// CIMDSET files; when absent a synthetic task sized to the topology
    /// input is generated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train_path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_path: Option<PathBuf>,
    pub train_samples: usize,
    pub test_samples: usize,
    pub noise: f64,
    pub task_seed: u64,
    pub train_seed: u64,
    pub test_seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            train_path: None,
            test_path: None,
            train_samples: 1000,
            test_samples: 500,
            noise: 0.25,
            task_seed: 42,
            train_seed: 1,
            test_seed: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostsConfig {
    /// Full cost table replacing the shipped default and device overlay.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Individual fields applied on top.
    #[serde(skip_serializing_if = "toml::Table::is_empty")]
    pub overrides: toml::Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub device: DeviceRef,
    /// Extra devices, looked up by name before the shipped catalog.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub catalog: Vec<DeviceSpec>,
    #[serde(default = "default_topology")]
    pub topology: TopologyRef,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_ratio")]
    pub buffer_overhead_constraint: f64,
    /// Replaces the topology's bit widths.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bits: Option<BitWidths>,
    /// Replaces the device's read-out mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout: Option<ReadoutMode>,
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default)]
    pub training: Training,
    #[serde(default)]
    pub hierarchy: HierarchyParams,
    #[serde(default)]
    pub costs: CostsConfig,
    #[serde(default)]
    pub dataset: DatasetConfig,
}

fn default_topology() -> TopologyRef {
    TopologyRef::Preset("default".into())
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

fn default_ratio() -> f64 {
    1.0
}

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = RunConfig::parse(&text)?;
    cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    /// A config with every default and the given device.
    pub fn for_device(device: &str) -> Self {
        RunConfig::parse(&format!("device = {device:?}")).expect("minimal config parses")
    }

    /// Parses without validating.
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string() + &span_hint(&e)))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Makes relative file references relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.costs.path.as_mut() {
            fix(p);
        }
        if let Some(p) = self.dataset.train_path.as_mut() {
            fix(p);
        }
        if let Some(p) = self.dataset.test_path.as_mut() {
            fix(p);
        }
    }

    pub fn device_spec(&self) -> Result<DeviceSpec> {
        let mut d = match &self.device {
            DeviceRef::Inline(d) => (**d).clone(),
            DeviceRef::Name(n) => self
                .catalog
                .iter()
                .find(|d| &d.name == n)
                .cloned()
                .or_else(|| default_catalog().get(n).cloned())
                .ok_or_else(|| Error::validation("device", format!("unknown device `{n}`")))?,
        };
        if let Some(r) = self.readout {
            d.readout = r;
        }
        d.validate()?;
        Ok(d)
    }

    pub fn network(&self) -> Result<NetworkTopology> {
        let mut net = match &self.topology {
            TopologyRef::Inline(t) => t.clone(),
            TopologyRef::Preset(n) => NetworkTopology::preset(n)
                .ok_or_else(|| Error::validation("topology", format!("unknown preset `{n}`")))?,
        };
        if let Some(b) = self.bits {
            net.bits = b;
        }
        net.resolve()?;
        Ok(net)
    }

    pub fn cost_table(&self) -> Result<CostTable> {
        let base = match &self.costs.path {
            Some(p) => CostTable::load(p)?,
            None => {
                let name = match &self.device {
                    DeviceRef::Name(n) => n.clone(),
                    DeviceRef::Inline(d) => d.name.clone(),
                };
                CostTable::for_device(&name)?
            }
        };
        base.with_overrides(&self.costs.overrides)
    }

    pub fn engine_options(&self) -> EngineOptions {
        let t = &self.training;
        EngineOptions {
            numerics: t.numerics,
            path: t.path,
            adc_bits: (t.adc_bits > 0).then_some(t.adc_bits),
            array_rows: self.hierarchy.array_rows,
            array_cols: self.hierarchy.array_cols,
            beta: t.beta,
            lr: t.lr,
            init_range: t.init_range,
            c2c_mode: t.c2c_mode,
            seed: self.seed,
        }
    }

    /// Learning rate in effect during `epoch` (1-based).
    pub fn lr_at(&self, epoch: usize) -> f64 {
        let t = &self.training;
        let step = t.lr_step_epoch.unwrap_or(2 * self.schedule.epochs / 3 + 1);
        if step > 1 && epoch >= step {
            t.lr * t.lr_decay
        } else {
            t.lr
        }
    }

    /// Training and test sets.
    pub fn datasets(&self, net: &NetworkTopology) -> Result<(Dataset, Dataset)> {
        let d = &self.dataset;
        let (train, test) = match (&d.train_path, &d.test_path) {
            (Some(a), Some(b)) => (Dataset::load(a)?, Dataset::load(b)?),
            (None, None) => {
                let (c, h, w) = net.input;
                if c != 1 || h != w {
                    return Err(Error::validation(
                        "dataset",
                        "the synthetic task needs a 1xNxN input; give train_path and test_path",
                    ));
                }
                let task = SyntheticTask::new(h, net.classes, d.noise, d.task_seed);
                (task.generate(d.train_samples, d.train_seed), task.generate(d.test_samples, d.test_seed))
            }
            _ => return Err(Error::validation("dataset", "train_path and test_path go together")),
        };
        for (name, ds) in [("dataset.train_path", &train), ("dataset.test_path", &test)] {
            if ds.shape != net.input || ds.classes != net.classes {
                return Err(Error::validation(name, "shape or class count does not match the topology"));
            }
        }
        let train = match self.schedule.batches_per_epoch {
            Some(n) => train.take((n * self.schedule.batch_size).min(train.len())),
            None => train,
        };
        if train.len() < self.schedule.batch_size {
            return Err(Error::validation("schedule.batch_size", "larger than the training set"));
        }
        Ok((train, test))
    }

    /// Checks every field and every referenced file.
    pub fn validate(&self) -> Result<()> {
        let r = self.buffer_overhead_constraint;
        if !(r >= 1.0 && r.is_finite()) {
            return Err(Error::validation("buffer_overhead_constraint", "must be a finite number >= 1"));
        }
        if self.schedule.batch_size == 0 {
            return Err(Error::validation("schedule.batch_size", "must be positive"));
        }
        if self.schedule.epochs == 0 {
            return Err(Error::validation("schedule.epochs", "must be positive"));
        }
        if self.schedule.batches_per_epoch == Some(0) {
            return Err(Error::validation("schedule.batches_per_epoch", "must be positive"));
        }
        let t = &self.training;
        if !(0.0..1.0).contains(&t.beta) {
            return Err(Error::validation("training.beta", "must be in [0, 1)"));
        }
        if !(t.lr > 0.0 && t.lr.is_finite()) {
            return Err(Error::validation("training.lr", "must be positive"));
        }
        if !(t.lr_decay > 0.0 && t.lr_decay.is_finite()) {
            return Err(Error::validation("training.lr_decay", "must be positive"));
        }
        if t.adc_bits > 16 {
            return Err(Error::validation("training.adc_bits", "at most 16"));
        }
        if !(t.init_range > 0.0 && t.init_range <= 1.0) {
            return Err(Error::validation("training.init_range", "must be in (0, 1]"));
        }
        if let Some(b) = self.bits {
            for (f, v) in [("weight", b.weight), ("activation", b.activation), ("error", b.error), ("gradient", b.gradient)] {
                if !(1..=16).contains(&v) {
                    return Err(Error::validation(format!("bits.{f}"), "must be in 1..=16"));
                }
            }
        }
        let d = &self.dataset;
        if !(d.noise >= 0.0) {
            return Err(Error::validation("dataset.noise", "must be >= 0"));
        }
        for (f, p) in [("dataset.train_path", &d.train_path), ("dataset.test_path", &d.test_path), ("costs.path", &self.costs.path)] {
            if let Some(p) = p {
                if !p.is_file() {
                    return Err(Error::validation(f, format!("{} does not exist", p.display())));
                }
            }
        }
        self.hierarchy.validate()?;
        self.device_spec()?;
        let net = self.network()?;
        self.cost_table()?;
        if d.train_path.is_none() {
            self.datasets(&net)?;
        }
        Ok(())
    }

    /// Sets one sweepable parameter from its text form.
    pub fn set_param(&mut self, name: &str, value: &str) -> Result<()> {
        let num = || {
            value
                .parse::<f64>()
                .map_err(|_| Error::validation(name, format!("`{value}` is not a number")))
        };
        let int = || {
            value
                .parse::<usize>()
                .map_err(|_| Error::validation(name, format!("`{value}` is not a count")))
        };
        match name {
            "c2c_sigma" | "d2d_sigma" | "nl" | "nl_ltp" | "nl_ltd" | "num_states" => {
                let mut d = self.device_spec()?;
                match name {
                    "c2c_sigma" => d.c2c_sigma = num()?,
                    "d2d_sigma" => d.d2d_sigma = num()?,
                    "nl" => {
                        d.nl_ltp = num()?;
                        d.nl_ltd = num()?;
                    }
                    "nl_ltp" => d.nl_ltp = num()?,
                    "nl_ltd" => d.nl_ltd = num()?,
                    _ => d.num_states = int()? as u32,
                }
                self.device = DeviceRef::Inline(Box::new(d));
            }
            "beta" => self.training.beta = num()?,
            "lr" => self.training.lr = num()?,
            "adc_bits" => self.training.adc_bits = int()? as u32,
            "batch_size" => self.schedule.batch_size = int()?,
            "epochs" => self.schedule.epochs = int()?,
            "buffer_overhead_constraint" => self.buffer_overhead_constraint = num()?,
            "seed" => self.seed = value.parse().map_err(|_| Error::validation(name, "not a seed"))?,
            _ => return Err(Error::validation("sweep", format!("`{name}` cannot be swept"))),
        }
        Ok(())
    }
}

fn span_hint(e: &toml::de::Error) -> String {
    match e.span() {
        Some(s) => format!(" (at byte {})", s.start),
        None => String::new(),
    }
}

/// Parses `param=v1,v2,...`.
pub fn parse_sweep(spec: &str) -> Result<(String, Vec<String>)> {
    let (k, v) = spec
        .split_once('=')
        .ok_or_else(|| Error::validation("sweep", "expected param=v1,v2,..."))?;
    let values: Vec<String> = v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    if k.trim().is_empty() || values.is_empty() {
        return Err(Error::validation("sweep", "expected param=v1,v2,..."));
    }
    Ok((k.trim().to_string(), values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::parse("device = \"FeFET\"\ntopology = \"default\"").unwrap();
        c.validate().unwrap();
        assert_eq!(c.training.beta, 0.9);
        assert_eq!(c.training.adc_bits, 6);
        assert_eq!((c.hierarchy.array_rows, c.hierarchy.array_cols), (128, 128));
        assert_eq!(c.buffer_overhead_constraint, 1.0);
        assert_eq!(c.engine_options().adc_bits, Some(6));
    }

    #[test]
    fn zero_ratio_is_rejected() {
        let c = RunConfig::parse("device = \"FeFET\"\nbuffer_overhead_constraint = 0.0").unwrap();
        match c.validate() {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "buffer_overhead_constraint"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_fields_and_devices_are_errors() {
        assert!(RunConfig::parse("device = \"FeFET\"\nbogus = 1").is_err());
        let c = RunConfig::parse("device = \"Unobtainium\"").unwrap();
        assert!(c.validate().unwrap_err().is_config_error());
        assert!(RunConfig::parse("device = \"FeFET\"\n[schedule]\nbatch = 3").is_err());
    }

    #[test]
    fn round_trip() {
        let text = r#"
            device = "EpiRAM"
            seed = 9
            buffer_overhead_constraint = 2.5
            readout = "sequential"
            [schedule]
            batch_size = 10
            epochs = 3
            batches_per_epoch = 4
            [training]
            path = "direct"
            lr_step_epoch = 2
            [costs.overrides]
            adc_energy = 1e-12
            [bits]
            weight = 6
            activation = 8
            error = 8
            gradient = 8
        "#;
        let a = RunConfig::parse(text).unwrap();
        let b = RunConfig::parse(&a.to_toml()).unwrap();
        assert_eq!(a, b);
        let mut c = a.clone();
        c.set_param("c2c_sigma", "0.03").unwrap();
        assert_eq!(RunConfig::parse(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn inline_device_and_topology() {
        let text = r#"
            [device]
            name = "mine"
            kind = "analog_envm"
            r_on = 1e5
            on_off_ratio = 50.0
            num_states = 64
            nl_ltp = 2.0
            nl_ltd = 2.0
            [topology]
            input = [1, 4, 4]
            classes = 2
            layers = [{ kind = "fc", inputs = 16, outputs = 2 }]
        "#;
        let c = RunConfig::parse(text).unwrap();
        c.validate().unwrap();
        assert_eq!(c.device_spec().unwrap().num_states, 64);
        assert_eq!(c.network().unwrap().classes, 2);
    }

    #[test]
    fn sweep_parameters() {
        let mut c = RunConfig::for_device("FeFET");
        c.set_param("nl", "3").unwrap();
        let d = c.device_spec().unwrap();
        assert_eq!((d.nl_ltp, d.nl_ltd), (3.0, 3.0));
        assert!(c.set_param("colour", "1").is_err());
        assert!(c.set_param("beta", "high").is_err());
        let (k, v) = parse_sweep("c2c_sigma=0,0.01,0.03,0.05").unwrap();
        assert_eq!((k.as_str(), v.len()), ("c2c_sigma", 4));
        assert!(parse_sweep("c2c_sigma").is_err());
    }

    #[test]
    fn lr_steps_once() {
        let c = RunConfig::for_device("FeFET");
        assert_eq!(c.lr_at(10), 0.5);
        assert!((c.lr_at(11) - 0.05).abs() < 1e-15);
        let mut one = c.clone();
        one.schedule.epochs = 1;
        assert_eq!(one.lr_at(1), 0.5);
    }

    #[test]
    fn missing_file_is_config_error() {
        assert!(matches!(load_config(Path::new("/nonexistent/x.toml")), Err(Error::Config(_))));
        let c = RunConfig::parse("device = \"FeFET\"\n[costs]\npath = \"/nonexistent/c.toml\"").unwrap();
        assert!(c.validate().is_err());
    }
}
