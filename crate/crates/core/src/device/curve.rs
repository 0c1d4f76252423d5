//! Conductance-versus-pulse curves for analog synaptic devices.
//!
//! Potentiation follows `G = B (1 - exp(-p / A)) + g_min`. Depression uses
//! `G = g_max - B_d (1 - exp((p - p_max) / A_d))`; both are strictly
//! increasing in the pulse index `p` and pass through `(0, g_min)` and
//! `(p_max, g_max)`. A depression pulse moves the state one index *down* its
//! curve. `A = +inf` is the linear limit.

use crate::error::{Error, Result};

/// Nonlinearity labels are mapped to `10 x` the maximum chord deviation of the
/// normalized curve, so a label of 3 bends the curve 30% of the range away
/// from a straight line.
pub const NL_LABEL_SCALE: f64 = 10.0;

/// Largest label the calibration accepts.
pub const NL_LABEL_MAX: f64 = 9.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateCurve {
    pub a_ltp: f64,
    pub a_ltd: f64,
    pub g_min: f64,
    pub g_max: f64,
    pub p_max: u32,
}

/// `1 - exp(-x)` computed without cancellation.
#[inline]
fn one_minus_exp_neg(x: f64) -> f64 {
    -(-x).exp_m1()
}

impl UpdateCurve {
    pub fn new(a_ltp: f64, a_ltd: f64, g_min: f64, g_max: f64, p_max: u32) -> Result<Self> {
        if !(g_min > 0.0 && g_max > g_min) {
            return Err(Error::Device(format!(
                "conductance bounds must satisfy g_max > g_min > 0, got [{g_min}, {g_max}]"
            )));
        }
        if p_max == 0 {
            return Err(Error::Device("p_max must be at least 1".into()));
        }
        if !(a_ltp > 0.0 && a_ltd > 0.0) {
            return Err(Error::Device(format!(
                "curve shape parameters must be positive, got A_ltp={a_ltp}, A_ltd={a_ltd}"
            )));
        }
        Ok(Self {
            a_ltp,
            a_ltd,
            g_min,
            g_max,
            p_max,
        })
    }

    pub fn linear(g_min: f64, g_max: f64, p_max: u32) -> Result<Self> {
        Self::new(f64::INFINITY, f64::INFINITY, g_min, g_max, p_max)
    }

    /// Same bounds, different shape; used for per-cell (D2D) curves.
    pub fn with_shape(&self, a_ltp: f64, a_ltd: f64) -> Self {
        Self {
            a_ltp,
            a_ltd,
            ..*self
        }
    }

    pub fn range(&self) -> f64 {
        self.g_max - self.g_min
    }

    fn p_max_f(&self) -> f64 {
        self.p_max as f64
    }

    /// Fraction of the range reached after `p` pulses along a curve of shape `a`.
    fn normalized(&self, p: f64, a: f64) -> f64 {
        if a.is_infinite() {
            p / self.p_max_f()
        } else {
            one_minus_exp_neg(p / a) / one_minus_exp_neg(self.p_max_f() / a)
        }
    }

    /// Scale factor `B = (g_max - g_min) / (1 - exp(-p_max / A))`.
    pub fn b(&self, a: f64) -> f64 {
        if a.is_infinite() {
            f64::INFINITY
        } else {
            self.range() / one_minus_exp_neg(self.p_max_f() / a)
        }
    }

    fn check_index(&self, p: f64) -> Result<()> {
        if p.is_nan() || p < 0.0 || p > self.p_max_f() {
            return Err(Error::Domain {
                what: "pulse index",
                value: p,
                lo: 0.0,
                hi: self.p_max_f(),
            });
        }
        Ok(())
    }

    pub fn ltp_conductance(&self, p: f64) -> Result<f64> {
        self.check_index(p)?;
        Ok(self.ltp_at(p))
    }

    pub fn ltd_conductance(&self, p: f64) -> Result<f64> {
        self.check_index(p)?;
        Ok(self.ltd_at(p))
    }

    pub(crate) fn ltp_at(&self, p: f64) -> f64 {
        if p >= self.p_max_f() {
            return self.g_max;
        }
        (self.g_min + self.range() * self.normalized(p, self.a_ltp)).min(self.g_max)
    }

    pub(crate) fn ltd_at(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return self.g_min;
        }
        // Mirror of the potentiation form about the curve midpoint.
        let down = self.p_max_f() - p;
        (self.g_max - self.range() * self.normalized(down, self.a_ltd)).max(self.g_min)
    }

    /// Effective pulse index on the potentiation curve for conductance `g`.
    pub fn ltp_index(&self, g: f64) -> f64 {
        let frac = ((g - self.g_min) / self.range()).clamp(0.0, 1.0);
        self.invert_normalized(frac, self.a_ltp)
    }

    /// Effective pulse index on the depression curve for conductance `g`.
    pub fn ltd_index(&self, g: f64) -> f64 {
        let frac = ((self.g_max - g) / self.range()).clamp(0.0, 1.0);
        self.p_max_f() - self.invert_normalized(frac, self.a_ltd)
    }

    fn invert_normalized(&self, frac: f64, a: f64) -> f64 {
        let p_max = self.p_max_f();
        if a.is_infinite() {
            return frac * p_max;
        }
        // frac = (1 - e^{-p/a}) / (1 - e^{-pmax/a})
        let x = frac * one_minus_exp_neg(p_max / a);
        (-a * (-x).ln_1p()).clamp(0.0, p_max)
    }
}

/// Maximum deviation of the normalized potentiation curve from its chord,
/// as a fraction of the range, for normalized shape `a = A / p_max`.
pub fn chord_deviation(a_norm: f64) -> f64 {
    if a_norm.is_infinite() {
        return 0.0;
    }
    let denom = one_minus_exp_neg(1.0 / a_norm);
    // f'(x) = e^{-x/a} / (a * denom) = 1 at the point of maximum deviation.
    let x_star = (-a_norm * (a_norm * denom).ln()).clamp(0.0, 1.0);
    let f = one_minus_exp_neg(x_star / a_norm) / denom;
    (f - x_star).max(0.0)
}

/// Converts a nonlinearity label into the curve shape parameter `A`
/// (in pulse units). The sign of the label is ignored.
pub fn nl_label_to_a(nl_label: f64, p_max: u32) -> Result<f64> {
    let label = nl_label.abs();
    if !(label > 0.0 && label <= NL_LABEL_MAX) {
        return Err(Error::NonlinearityRange {
            value: nl_label,
            max: NL_LABEL_MAX,
        });
    }
    if p_max == 0 {
        return Err(Error::Device("p_max must be at least 1".into()));
    }
    let target = label / NL_LABEL_SCALE;
    // chord_deviation is strictly decreasing in a; for large a it behaves
    // like 1 / (8a), which bounds the bracket.
    let mut lo = 1e-3_f64.ln();
    let mut hi = (1.0 / (8.0 * target)).max(10.0).ln() + 2.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chord_deviation(mid.exp()) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp() * p_max as f64)
}

/// Inverse of [`nl_label_to_a`].
pub fn a_to_nl_label(a: f64, p_max: u32) -> f64 {
    NL_LABEL_SCALE * chord_deviation(a / p_max as f64)
}

/// Shape parameter for a label, treating non-positive labels as a linear
/// device and saturating labels above the calibrated maximum.
pub(crate) fn shape_for_label(label: f64, p_max: u32) -> f64 {
    if label <= 0.0 {
        return f64::INFINITY;
    }
    nl_label_to_a(label.min(NL_LABEL_MAX), p_max).unwrap_or(f64::INFINITY)
}
