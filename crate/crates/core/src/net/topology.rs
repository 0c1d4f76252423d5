use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LayerSpec {
    Conv {
        kernel: usize,
        in_channels: usize,
        out_channels: usize,
        #[serde(default = "one")]
        stride: usize,
        #[serde(default)]
        padding: usize,
    },
    Fc {
        inputs: usize,
        outputs: usize,
    },
    MaxPool {
        size: usize,
    },
    Relu,
}

fn one() -> usize {
    1
}

impl LayerSpec {
    pub fn is_weighted(&self) -> bool {
        matches!(self, LayerSpec::Conv { .. } | LayerSpec::Fc { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BitWidths {
    pub weight: u32,
    pub activation: u32,
    pub error: u32,
    pub gradient: u32,
}

impl Default for BitWidths {
    fn default() -> Self {
        BitWidths {
            weight: 8,
            activation: 8,
            error: 8,
            gradient: 8,
        }
    }
}

/// Shape of a weighted layer, with fully-connected layers expressed as a
/// 1x1 convolution over a `(inputs, 1, 1)` tensor.
///
/// The weights form an unrolled matrix of `kernel^2 * in_channels` rows by
/// `out_channels` columns; row `(kh * kernel + kw) * in_channels + d` holds
/// kernel position `(kh, kw)` of input channel `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvGeometry {
    pub kernel: usize,
    pub in_channels: usize,
    pub out_channels: usize,
    pub in_h: usize,
    pub in_w: usize,
    pub out_h: usize,
    pub out_w: usize,
    pub stride: usize,
    pub padding: usize,
}

impl ConvGeometry {
    pub fn conv(
        kernel: usize,
        in_channels: usize,
        out_channels: usize,
        in_h: usize,
        in_w: usize,
        stride: usize,
        padding: usize,
    ) -> Result<Self> {
        if kernel == 0 || in_channels == 0 || out_channels == 0 || stride == 0 {
            return Err(Error::Topology(
                "kernel, channels and stride must be positive".into(),
            ));
        }
        if in_h + 2 * padding < kernel || in_w + 2 * padding < kernel {
            return Err(Error::Topology(format!(
                "kernel {kernel} larger than padded input {in_h}x{in_w} (padding {padding})"
            )));
        }
        Ok(ConvGeometry {
            kernel,
            in_channels,
            out_channels,
            in_h,
            in_w,
            out_h: (in_h + 2 * padding - kernel) / stride + 1,
            out_w: (in_w + 2 * padding - kernel) / stride + 1,
            stride,
            padding,
        })
    }

    pub fn fc(inputs: usize, outputs: usize) -> Result<Self> {
        Self::conv(1, inputs, outputs, 1, 1, 1, 0)
    }

    pub fn rows(&self) -> usize {
        self.kernel * self.kernel * self.in_channels
    }

    pub fn cols(&self) -> usize {
        self.out_channels
    }

    pub fn weight_count(&self) -> usize {
        self.rows() * self.cols()
    }

    pub fn in_len(&self) -> usize {
        self.in_channels * self.in_h * self.in_w
    }

    pub fn out_positions(&self) -> usize {
        self.out_h * self.out_w
    }

    pub fn out_len(&self) -> usize {
        self.out_channels * self.out_positions()
    }

    pub fn row_index(&self, kh: usize, kw: usize, d: usize) -> usize {
        (kh * self.kernel + kw) * self.in_channels + d
    }

    /// Input coordinate feeding output `(oh, ow)` at kernel offset `(kh, kw)`,
    /// or `None` when it falls in the padding.
    #[inline]
    pub fn input_coord(
        &self,
        oh: usize,
        ow: usize,
        kh: usize,
        kw: usize,
    ) -> Option<(usize, usize)> {
        let y = (oh * self.stride + kh) as isize - self.padding as isize;
        let x = (ow * self.stride + kw) as isize - self.padding as isize;
        if y < 0 || x < 0 || y >= self.in_h as isize || x >= self.in_w as isize {
            None
        } else {
            Some((y as usize, x as usize))
        }
    }

    /// Multiply-accumulates for one forward pass of one sample.
    pub fn macs(&self) -> u64 {
        (self.out_positions() * self.weight_count()) as u64
    }
}

/// Resolved per-layer shapes of a topology.
#[derive(Debug, Clone, PartialEq)]
pub enum ResolvedLayer {
    Weighted {
        index: usize,
        geometry: ConvGeometry,
        is_fc: bool,
    },
    MaxPool {
        size: usize,
        in_shape: (usize, usize, usize),
        out_shape: (usize, usize, usize),
    },
    Relu {
        len: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkTopology {
    #[serde(default)]
    pub name: String,
    /// `(channels, height, width)` of one input sample.
    pub input: (usize, usize, usize),
    pub classes: usize,
    pub layers: Vec<LayerSpec>,
    #[serde(default)]
    pub bits: BitWidths,
}

impl NetworkTopology {
    /// Checks shape compatibility and returns per-layer shapes.
    pub fn resolve(&self) -> Result<Vec<ResolvedLayer>> {
        for (name, b) in [
            ("weight", self.bits.weight),
            ("activation", self.bits.activation),
            ("error", self.bits.error),
            ("gradient", self.bits.gradient),
        ] {
            if !(1..=24).contains(&b) {
                return Err(Error::Topology(format!(
                    "{name} bit width {b} outside 1..=24"
                )));
            }
        }
        let (mut c, mut h, mut w) = self.input;
        if c == 0 || h == 0 || w == 0 {
            return Err(Error::Topology("input shape must be positive".into()));
        }
        let mut out = Vec::with_capacity(self.layers.len());
        let mut weighted = 0;
        for (i, layer) in self.layers.iter().enumerate() {
            match *layer {
                LayerSpec::Conv {
                    kernel,
                    in_channels,
                    out_channels,
                    stride,
                    padding,
                } => {
                    if in_channels != c {
                        return Err(Error::Topology(format!(
                            "layer {i}: conv expects {in_channels} input channels, got {c}"
                        )));
                    }
                    let g = ConvGeometry::conv(
                        kernel,
                        in_channels,
                        out_channels,
                        h,
                        w,
                        stride,
                        padding,
                    )
                    .map_err(|e| Error::Topology(format!("layer {i}: {e}")))?;
                    (c, h, w) = (g.out_channels, g.out_h, g.out_w);
                    out.push(ResolvedLayer::Weighted {
                        index: weighted,
                        geometry: g,
                        is_fc: false,
                    });
                    weighted += 1;
                }
                LayerSpec::Fc { inputs, outputs } => {
                    if inputs != c * h * w {
                        return Err(Error::Topology(format!(
                            "layer {i}: fc expects {inputs} inputs, got {c}x{h}x{w}"
                        )));
                    }
                    let g = ConvGeometry::fc(inputs, outputs)?;
                    (c, h, w) = (outputs, 1, 1);
                    out.push(ResolvedLayer::Weighted {
                        index: weighted,
                        geometry: g,
                        is_fc: true,
                    });
                    weighted += 1;
                }
                LayerSpec::MaxPool { size } => {
                    if size == 0 || size > h || size > w {
                        return Err(Error::Topology(format!(
                            "layer {i}: pool size {size} invalid for {h}x{w}"
                        )));
                    }
                    let out_shape = (c, h / size, w / size);
                    out.push(ResolvedLayer::MaxPool {
                        size,
                        in_shape: (c, h, w),
                        out_shape,
                    });
                    (h, w) = (h / size, w / size);
                }
                LayerSpec::Relu => out.push(ResolvedLayer::Relu { len: c * h * w }),
            }
        }
        if weighted == 0 {
            return Err(Error::Topology("network has no weighted layers".into()));
        }
        if c * h * w != self.classes {
            return Err(Error::Topology(format!(
                "final layer produces {} values for {} classes",
                c * h * w,
                self.classes
            )));
        }
        Ok(out)
    }

    pub fn weighted_geometries(&self) -> Result<Vec<ConvGeometry>> {
        Ok(self
            .resolve()?
            .into_iter()
            .filter_map(|l| match l {
                ResolvedLayer::Weighted { geometry, .. } => Some(geometry),
                _ => None,
            })
            .collect())
    }

    pub fn input_len(&self) -> usize {
        self.input.0 * self.input.1 * self.input.2
    }

    /// Desk-scale default: four 3x3 convolutions and two fully-connected
    /// layers on 1x8x8 inputs with 10 classes.
    pub fn desk_scale() -> Self {
        use LayerSpec::*;
        let conv = |i, o| Conv {
            kernel: 3,
            in_channels: i,
            out_channels: o,
            stride: 1,
            padding: 1,
        };
        NetworkTopology {
            name: "default".into(),
            input: (1, 8, 8),
            classes: 10,
            layers: vec![
                conv(1, 8),
                Relu,
                conv(8, 8),
                Relu,
                MaxPool { size: 2 },
                conv(8, 16),
                Relu,
                conv(16, 16),
                Relu,
                MaxPool { size: 2 },
                Fc {
                    inputs: 64,
                    outputs: 32,
                },
                Relu,
                Fc {
                    inputs: 32,
                    outputs: 10,
                },
            ],
            bits: BitWidths::default(),
        }
    }

    /// VGG-8 for 3x32x32 inputs: six 3x3 convolutions, two fully-connected.
    pub fn vgg8() -> Self {
        use LayerSpec::*;
        let conv = |i, o| Conv {
            kernel: 3,
            in_channels: i,
            out_channels: o,
            stride: 1,
            padding: 1,
        };
        NetworkTopology {
            name: "vgg8".into(),
            input: (3, 32, 32),
            classes: 10,
            layers: vec![
                conv(3, 128),
                Relu,
                conv(128, 128),
                Relu,
                MaxPool { size: 2 },
                conv(128, 256),
                Relu,
                conv(256, 256),
                Relu,
                MaxPool { size: 2 },
                conv(256, 512),
                Relu,
                conv(512, 512),
                Relu,
                MaxPool { size: 2 },
                Fc {
                    inputs: 8192,
                    outputs: 1024,
                },
                Relu,
                Fc {
                    inputs: 1024,
                    outputs: 10,
                },
            ],
            bits: BitWidths::default(),
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "default" | "desk" => Some(Self::desk_scale()),
            "vgg8" | "vgg-8" => Some(Self::vgg8()),
            _ => None,
        }
    }
}
