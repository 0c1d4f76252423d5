//! Labeled image sets: a procedural generator and a small binary container.
//!
//! Container layout, all integers little-endian:
//!
//! ```text
//! magic    8 bytes  "CIMDSET1"
//! n        u32      sample count
//! c, h, w  u32 x3   sample shape
//! classes  u32
//! frac     u32      fractional bits of the pixel encoding
//! labels   u16 x n
//! pixels   i16 x n*c*h*w, value = raw / 2^frac
//! ```

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"CIMDSET1";

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub shape: (usize, usize, usize),
    pub classes: usize,
    /// Row-major `n x c x h x w`.
    pub pixels: Vec<f64>,
    pub labels: Vec<usize>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sample_len(&self) -> usize {
        self.shape.0 * self.shape.1 * self.shape.2
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        let n = self.sample_len();
        &self.pixels[i * n..(i + 1) * n]
    }

    /// First `n` samples.
    pub fn take(&self, n: usize) -> Dataset {
        let n = n.min(self.len());
        Dataset {
            shape: self.shape,
            classes: self.classes,
            pixels: self.pixels[..n * self.sample_len()].to_vec(),
            labels: self.labels[..n].to_vec(),
        }
    }

    pub fn write_to(&self, mut out: impl Write, frac_bits: u32) -> std::io::Result<()> {
        out.write_all(MAGIC)?;
        let (c, h, w) = self.shape;
        for v in [self.len(), c, h, w, self.classes, frac_bits as usize] {
            out.write_all(&(v as u32).to_le_bytes())?;
        }
        for &l in &self.labels {
            out.write_all(&(l as u16).to_le_bytes())?;
        }
        let scale = (1u32 << frac_bits) as f64;
        for &p in &self.pixels {
            let raw = (p * scale).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16;
            out.write_all(&raw.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(mut input: impl Read) -> Result<Dataset> {
        let bad = |m: &str| Error::Dataset(m.to_string());
        let mut magic = [0u8; 8];
        input
            .read_exact(&mut magic)
            .map_err(|_| bad("truncated header"))?;
        if &magic != MAGIC {
            return Err(bad("bad magic, not a CIMDSET1 container"));
        }
        let mut header = [0u32; 6];
        for h in header.iter_mut() {
            let mut b = [0u8; 4];
            input
                .read_exact(&mut b)
                .map_err(|_| bad("truncated header"))?;
            *h = u32::from_le_bytes(b);
        }
        let [n, c, h, w, classes, frac] = header.map(|v| v as usize);
        if c == 0 || h == 0 || w == 0 || classes == 0 {
            return Err(bad("shape and class count must be positive"));
        }
        if frac > 15 {
            return Err(bad("fractional bits must be <= 15"));
        }
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let mut b = [0u8; 2];
            input
                .read_exact(&mut b)
                .map_err(|_| bad("truncated labels"))?;
            let l = u16::from_le_bytes(b) as usize;
            if l >= classes {
                return Err(Error::Dataset(format!(
                    "label {l} >= class count {classes}"
                )));
            }
            labels.push(l);
        }
        let count = n * c * h * w;
        let mut raw = vec![0u8; count * 2];
        input
            .read_exact(&mut raw)
            .map_err(|_| bad("truncated pixel payload"))?;
        let scale = (1u32 << frac) as f64;
        let pixels = raw
            .chunks_exact(2)
            .map(|b| i16::from_le_bytes([b[0], b[1]]) as f64 / scale)
            .collect();
        Ok(Dataset {
            shape: (c, h, w),
            classes,
            pixels,
            labels,
        })
    }

    pub fn load(path: &Path) -> Result<Dataset> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(std::io::BufReader::new(f))
    }

    pub fn save(&self, path: &Path, frac_bits: u32) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(f);
        self.write_to(&mut w, frac_bits)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }
}

/// Procedural single-channel image task: each class is a fixed pattern of
/// Gaussian blobs; samples jitter its position and contrast and add pixel
/// noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTask {
    pub size: usize,
    pub classes: usize,
    pub noise: f64,
    prototypes: Vec<Vec<f64>>,
}

impl SyntheticTask {
    pub fn new(size: usize, classes: usize, noise: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_7A5C);
        let prototypes = (0..classes)
            .map(|_| {
                let blobs: Vec<(f64, f64, f64, f64)> = (0..3)
                    .map(|_| {
                        (
                            rng.random_range(0.0..size as f64),
                            rng.random_range(0.0..size as f64),
                            rng.random_range(0.8..2.0),
                            if rng.random_bool(0.25) { -0.6 } else { 1.0 },
                        )
                    })
                    .collect();
                let mut img: Vec<f64> = (0..size * size)
                    .map(|i| {
                        let (y, x) = ((i / size) as f64, (i % size) as f64);
                        blobs
                            .iter()
                            .map(|&(cy, cx, s, a)| {
                                a * (-((y - cy).powi(2) + (x - cx).powi(2)) / (2.0 * s * s)).exp()
                            })
                            .sum::<f64>()
                            .max(0.0)
                    })
                    .collect();
                let m = img.iter().cloned().fold(1e-9, f64::max);
                img.iter_mut().for_each(|v| *v /= m);
                img
            })
            .collect();
        SyntheticTask {
            size,
            classes,
            noise,
            prototypes,
        }
    }

    /// `n` samples with balanced, shuffled labels.
    pub fn generate(&self, n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = self.size;
        let mut labels: Vec<usize> = (0..n).map(|i| i % self.classes).collect();
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            labels.swap(i, j);
        }
        let mut pixels = Vec::with_capacity(n * s * s);
        for &l in &labels {
            let proto = &self.prototypes[l];
            let dy = rng.random_range(-1i64..=1);
            let dx = rng.random_range(-1i64..=1);
            let contrast = rng.random_range(0.7..1.3);
            for y in 0..s as i64 {
                for x in 0..s as i64 {
                    let (sy, sx) = (y - dy, x - dx);
                    let base = if sy < 0 || sx < 0 || sy >= s as i64 || sx >= s as i64 {
                        0.0
                    } else {
                        proto[(sy * s as i64 + sx) as usize]
                    };
                    let z: f64 = StandardNormal.sample(&mut rng);
                    pixels.push((contrast * base + self.noise * z).clamp(0.0, 1.0));
                }
            }
        }
        Dataset {
            shape: (1, s, s),
            classes: self.classes,
            pixels,
            labels,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn container_round_trip() {
        let task = SyntheticTask::new(6, 4, 0.1, 3);
        let d = task.generate(20, 9);
        let mut buf = Vec::new();
        d.write_to(&mut buf, 12).unwrap();
        assert_eq!(buf.len(), 8 + 24 + 40 + 20 * 36 * 2);
        let back = Dataset::read_from(buf.as_slice()).unwrap();
        assert_eq!(back.labels, d.labels);
        for (a, b) in back.pixels.iter().zip(&d.pixels) {
            assert!((a - b).abs() <= 0.5 / 4096.0);
        }
    }

    #[test]
    fn rejects_corrupt_container() {
        assert!(Dataset::read_from(&b"NOTMAGIC"[..]).is_err());
        let d = SyntheticTask::new(4, 2, 0.0, 1).generate(3, 1);
        let mut buf = Vec::new();
        d.write_to(&mut buf, 8).unwrap();
        buf.truncate(buf.len() - 1);
        assert!(Dataset::read_from(buf.as_slice()).is_err());
    }

    #[test]
    fn labels_balanced_and_deterministic() {
        let task = SyntheticTask::new(8, 10, 0.2, 5);
        let a = task.generate(100, 1);
        assert_eq!(a, task.generate(100, 1));
        for c in 0..10 {
            assert_eq!(a.labels.iter().filter(|&&l| l == c).count(), 10);
        }
        assert!(a.pixels.iter().all(|p| (0.0..=1.0).contains(p)));
    }
}
