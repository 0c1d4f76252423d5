use std::ops::{Add, AddAssign, Mul};

/// Latency, energy or area split by hardware component.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Breakdown {
    pub adc: f64,
    pub accumulation: f64,
    pub buffer: f64,
    pub interconnect: f64,
    pub dram: f64,
    pub array: f64,
    pub other: f64,
}

impl Breakdown {
    pub const COMPONENTS: [&'static str; 7] = [
        "adc",
        "accumulation",
        "buffer",
        "interconnect",
        "dram",
        "array",
        "other",
    ];

    /// Components counted by the peak metrics.
    pub const PEAK_COMPONENTS: [&'static str; 4] = ["adc", "accumulation", "array", "other"];

    pub fn entries(&self) -> [(&'static str, f64); 7] {
        [
            ("adc", self.adc),
            ("accumulation", self.accumulation),
            ("buffer", self.buffer),
            ("interconnect", self.interconnect),
            ("dram", self.dram),
            ("array", self.array),
            ("other", self.other),
        ]
    }

    pub fn from_entries(values: [f64; 7]) -> Self {
        let [adc, accumulation, buffer, interconnect, dram, array, other] = values;
        Breakdown {
            adc,
            accumulation,
            buffer,
            interconnect,
            dram,
            array,
            other,
        }
    }

    pub fn total(&self) -> f64 {
        self.entries().iter().map(|e| e.1).sum()
    }

    /// In-array computation only: buffers, interconnect and DRAM excluded.
    pub fn peak(&self) -> f64 {
        self.adc + self.accumulation + self.array + self.other
    }

    pub fn peak_part(&self) -> Breakdown {
        Breakdown {
            buffer: 0.0,
            interconnect: 0.0,
            dram: 0.0,
            ..*self
        }
    }
}

impl Add for Breakdown {
    type Output = Breakdown;
    fn add(self, o: Breakdown) -> Breakdown {
        Breakdown {
            adc: self.adc + o.adc,
            accumulation: self.accumulation + o.accumulation,
            buffer: self.buffer + o.buffer,
            interconnect: self.interconnect + o.interconnect,
            dram: self.dram + o.dram,
            array: self.array + o.array,
            other: self.other + o.other,
        }
    }
}

impl AddAssign for Breakdown {
    fn add_assign(&mut self, o: Breakdown) {
        *self = *self + o;
    }
}

impl Mul<f64> for Breakdown {
    type Output = Breakdown;
    fn mul(self, k: f64) -> Breakdown {
        Breakdown {
            adc: self.adc * k,
            accumulation: self.accumulation * k,
            buffer: self.buffer * k,
            interconnect: self.interconnect * k,
            dram: self.dram * k,
            array: self.array * k,
            other: self.other * k,
        }
    }
}

/// The four training steps, in schedule order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    FeedForward,
    Error,
    WeightGradient,
    WeightUpdate,
}

impl Step {
    pub const ALL: [Step; 4] = [
        Step::FeedForward,
        Step::Error,
        Step::WeightGradient,
        Step::WeightUpdate,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Step::FeedForward => "feed_forward",
            Step::Error => "error",
            Step::WeightGradient => "weight_gradient",
            Step::WeightUpdate => "weight_update",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepCost {
    pub latency: Breakdown,
    pub dynamic_energy: Breakdown,
    pub leakage_energy: f64,
    /// Operations (2 per multiply-accumulate).
    pub ops: f64,
}

impl StepCost {
    pub fn total_latency(&self) -> f64 {
        self.latency.total()
    }

    pub fn total_energy(&self) -> f64 {
        self.dynamic_energy.total() + self.leakage_energy
    }
}

impl Add for StepCost {
    type Output = StepCost;
    fn add(self, o: StepCost) -> StepCost {
        StepCost {
            latency: self.latency + o.latency,
            dynamic_energy: self.dynamic_energy + o.dynamic_energy,
            leakage_energy: self.leakage_energy + o.leakage_energy,
            ops: self.ops + o.ops,
        }
    }
}

impl AddAssign for StepCost {
    fn add_assign(&mut self, o: StepCost) {
        *self = *self + o;
    }
}

impl Mul<f64> for StepCost {
    type Output = StepCost;
    fn mul(self, k: f64) -> StepCost {
        StepCost {
            latency: self.latency * k,
            dynamic_energy: self.dynamic_energy * k,
            leakage_energy: self.leakage_energy * k,
            ops: self.ops * k,
        }
    }
}
