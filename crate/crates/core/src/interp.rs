//! Piecewise cubic Hermite interpolation.

use crate::error::{Error, Result};

/// Value and first derivative of the cubic Hermite interpolant on [t0, t1].
#[inline]
pub fn hermite(t0: f64, t1: f64, y0: f64, y1: f64, d0: f64, d1: f64, t: f64) -> (f64, f64) {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let value = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
    let dh00 = (6.0 * s2 - 6.0 * s) / h;
    let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
    let dh01 = (-6.0 * s2 + 6.0 * s) / h;
    let dh11 = 3.0 * s2 - 2.0 * s;
    let deriv = dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1;
    (value, deriv)
}

/// Value of the quintic Hermite interpolant on [t0, t1] matching values,
/// first derivatives `d` and second derivatives `s` at both ends.
#[allow(clippy::too_many_arguments)]
#[inline]
pub fn hermite5(t0: f64, t1: f64, y0: f64, y1: f64, d0: f64, d1: f64, s0: f64, s1: f64, t: f64) -> f64 {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;
    let h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
    let h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
    let h2 = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5);
    let h3 = 0.5 * (s3 - 2.0 * s4 + s5);
    let h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
    let h5 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
    h0 * y0 + h * (h1 * d0 + h4 * d1) + h * h * (h2 * s0 + h3 * s1) + h5 * y1
}

/// Index `k` with `xs[k] <= x <= xs[k + 1]`, clamped to the end intervals.
pub(crate) fn bracket(xs: &[f64], x: f64) -> usize {
    debug_assert!(xs.len() >= 2);
    let k = xs.partition_point(|&v| v <= x);
    k.saturating_sub(1).min(xs.len() - 2)
}

/// Shape-preserving (Fritsch–Carlson, PCHIP) interpolant through monotone or
/// non-monotone data; it never overshoots the data between nodes.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::invalid("interpolation needs at least two (x, y) pairs"));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("interpolation abscissae must be strictly increasing"));
        }
        let n = xs.len();
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (ys[k + 1] - ys[k]) / h[k]).collect();
        let mut ds = vec![0.0; n];
        if n == 2 {
            ds[0] = delta[0];
            ds[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                let (d0, d1) = (delta[k - 1], delta[k]);
                if d0 * d1 > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    ds[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
                }
            }
            ds[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            ds[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Self { xs, ys, ds })
    }

    /// Hermite interpolant with given node slopes, limited where needed so
    /// that monotone data stay monotone.
    pub fn with_slopes(xs: Vec<f64>, ys: Vec<f64>, mut ds: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() != ds.len() || xs.len() < 2 {
            return Err(Error::invalid("interpolation needs matching x, y, slope arrays of length >= 2"));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("interpolation abscissae must be strictly increasing"));
        }
        for k in 0..xs.len() - 1 {
            let delta = (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]);
            if delta == 0.0 {
                ds[k] = 0.0;
                ds[k + 1] = 0.0;
                continue;
            }
            if ds[k] * delta < 0.0 {
                ds[k] = 0.0;
            }
            if ds[k + 1] * delta < 0.0 {
                ds[k + 1] = 0.0;
            }
            let (alpha, beta) = (ds[k] / delta, ds[k + 1] / delta);
            let r2 = alpha * alpha + beta * beta;
            if r2 > 9.0 {
                let tau = 3.0 / r2.sqrt();
                ds[k] = tau * alpha * delta;
                ds[k + 1] = tau * beta * delta;
            }
        }
        Ok(Self { xs, ys, ds })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with_slope(x).0
    }

    /// Value and derivative.
    pub fn eval_with_slope(&self, x: f64) -> (f64, f64) {
        let k = bracket(&self.xs, x);
        hermite(
            self.xs[k],
            self.xs[k + 1],
            self.ys[k],
            self.ys[k + 1],
            self.ds[k],
            self.ds[k + 1],
            x,
        )
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}
