//! Column ADC model with nonlinear (quantile-placed) levels.

/// An ADC that snaps each partial sum to the nearest of at most `2^bits`
/// levels. Levels are placed at quantiles of partial sums profiled on a
/// calibration batch, so dense regions of the distribution get fine steps.
#[derive(Debug, Clone, PartialEq)]
pub struct AdcModel {
    pub bits: u32,
    levels: Vec<f64>,
}

impl AdcModel {
    /// Builds levels from calibration samples. When the samples take at most
    /// `2^bits` distinct values the levels are exactly those values and the
    /// conversion is lossless on that alphabet.
    pub fn calibrate(bits: u32, samples: &[f64]) -> Self {
        let n_levels = 1usize << bits.clamp(1, 20);
        let mut sorted: Vec<f64> = samples.iter().copied().filter(|v| v.is_finite()).collect();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let mut distinct = sorted.clone();
        distinct.dedup();
        let levels = if distinct.is_empty() {
            vec![0.0]
        } else if distinct.len() <= n_levels {
            distinct
        } else {
            // Midpoint quantiles of each of the n_levels equal-mass bins.
            let m = sorted.len();
            let mut lv: Vec<f64> = (0..n_levels)
                .map(|i| {
                    let q = (i as f64 + 0.5) / n_levels as f64;
                    sorted[((q * m as f64) as usize).min(m - 1)]
                })
                .collect();
            // Keep the extremes reachable.
            lv[0] = sorted[0];
            lv[n_levels - 1] = sorted[m - 1];
            lv.dedup();
            lv
        };
        AdcModel { bits, levels }
    }

    /// Uniform levels over `[lo, hi]`.
    pub fn uniform(bits: u32, lo: f64, hi: f64) -> Self {
        let n = 1usize << bits.clamp(1, 20);
        let levels = (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect();
        AdcModel { bits, levels }
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    #[inline]
    pub fn convert(&self, x: f64) -> f64 {
        let lv = &self.levels;
        match lv.binary_search_by(|l| l.total_cmp(&x)) {
            Ok(i) => lv[i],
            Err(0) => lv[0],
            Err(i) if i == lv.len() => lv[i - 1],
            Err(i) => {
                if x - lv[i - 1] <= lv[i] - x {
                    lv[i - 1]
                } else {
                    lv[i]
                }
            }
        }
    }
}

/// Collects partial sums for calibration, keeping at most `cap` samples.
#[derive(Debug, Clone)]
pub struct PsumProbe {
    pub samples: Vec<f64>,
    cap: usize,
    seen: u64,
}

impl PsumProbe {
    pub fn new(cap: usize) -> Self {
        PsumProbe {
            samples: Vec::new(),
            cap,
            seen: 0,
        }
    }

    #[inline]
    pub fn push(&mut self, v: f64) {
        self.seen += 1;
        if self.samples.len() < self.cap {
            self.samples.push(v);
        } else {
            // Deterministic thinning: overwrite a slot chosen by a hash of
            // the running count so late samples still get represented.
            let h = self.seen.wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 11;
            if h % self.seen < self.cap as u64 {
                let slot = (h % self.cap as u64) as usize;
                self.samples[slot] = v;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_alphabet_is_lossless() {
        let samples: Vec<f64> = (0..1000).map(|i| ((i * 7) % 64) as f64 - 20.0).collect();
        let adc = AdcModel::calibrate(6, &samples);
        assert_eq!(adc.levels().len(), 64);
        for s in &samples {
            assert_eq!(adc.convert(*s), *s);
        }
    }

    #[test]
    fn large_alphabet_is_bounded() {
        let samples: Vec<f64> = (0..10_000)
            .map(|i| (i as f64 * 0.37).sin() * 50.0)
            .collect();
        let adc = AdcModel::calibrate(4, &samples);
        assert!(adc.levels().len() <= 16);
        assert_eq!(adc.convert(1e9), adc.levels()[adc.levels().len() - 1]);
        assert_eq!(adc.convert(-1e9), adc.levels()[0]);
    }

    #[test]
    fn uniform_rounds_to_nearest() {
        let adc = AdcModel::uniform(2, 0.0, 3.0);
        assert_eq!(adc.convert(1.4), 1.0);
        assert_eq!(adc.convert(1.6), 2.0);
    }

    #[test]
    fn probe_caps_samples() {
        let mut p = PsumProbe::new(10);
        for i in 0..1000 {
            p.push(i as f64);
        }
        assert_eq!(p.samples.len(), 10);
    }
}
