//! Catalog of initial densities u^in on the half-line.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{gauss_legendre_64, GaussLegendre};

/// Initial data. Serialized as `{"variant": "...", "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IcRepr", into = "IcRepr")]
pub enum InitialCondition {
    /// `height` on the closed interval [a, b], zero elsewhere.
    Indicator { a: f64, b: f64, height: f64 },
    /// `(M/2)·sin x` on [0, π], zero beyond; total mass M.
    ScaledSine { mass: f64 },
    /// `x·(1+x)^(-δ-1)`: linear at the origin, tail `O(x^-δ)`, infinite
    /// first moment for 1 < δ < 2.
    PowerTail { delta: f64 },
    /// The attractor profile at a = 1: `M₁·x·e^{-x²/4}/(2√π)`.
    SelfSimilarSeed { m1: f64 },
    /// Piecewise-linear through `(x, u)` samples, zero outside [x₀, x_last].
    Tabulated { x: Vec<f64>, u: Vec<f64> },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "variant", content = "params", rename_all = "snake_case")]
enum IcRepr {
    Indicator {
        a: f64,
        b: f64,
        #[serde(default = "unit")]
        height: f64,
    },
    ScaledSine {
        mass: f64,
    },
    PowerTail {
        delta: f64,
    },
    SelfSimilarSeed {
        m1: f64,
    },
    Tabulated {
        x: Vec<f64>,
        u: Vec<f64>,
    },
}

fn unit() -> f64 {
    1.0
}

impl TryFrom<IcRepr> for InitialCondition {
    type Error = Error;
    fn try_from(r: IcRepr) -> Result<Self> {
        let ic = match r {
            IcRepr::Indicator { a, b, height } => InitialCondition::Indicator { a, b, height },
            IcRepr::ScaledSine { mass } => InitialCondition::ScaledSine { mass },
            IcRepr::PowerTail { delta } => InitialCondition::PowerTail { delta },
            IcRepr::SelfSimilarSeed { m1 } => InitialCondition::SelfSimilarSeed { m1 },
            IcRepr::Tabulated { x, u } => InitialCondition::Tabulated { x, u },
        };
        ic.validate()?;
        Ok(ic)
    }
}

impl From<InitialCondition> for IcRepr {
    fn from(ic: InitialCondition) -> Self {
        match ic {
            InitialCondition::Indicator { a, b, height } => IcRepr::Indicator { a, b, height },
            InitialCondition::ScaledSine { mass } => IcRepr::ScaledSine { mass },
            InitialCondition::PowerTail { delta } => IcRepr::PowerTail { delta },
            InitialCondition::SelfSimilarSeed { m1 } => IcRepr::SelfSimilarSeed { m1 },
            InitialCondition::Tabulated { x, u } => IcRepr::Tabulated { x, u },
        }
    }
}

/// A moment that may diverge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Moment {
    Finite(f64),
    Unbounded,
}

impl Moment {
    pub fn finite(self) -> Option<f64> {
        match self {
            Moment::Finite(v) => Some(v),
            Moment::Unbounded => None,
        }
    }
}

/// Closed-form moments of a built-in initial condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticMoments {
    pub mass: f64,
    pub first: Moment,
    pub second: Moment,
    pub sup_norm: f64,
}

impl InitialCondition {
    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        let ic = InitialCondition::Indicator { a, b, height: 1.0 };
        ic.validate()?;
        Ok(ic)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64, name: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be finite")))
            }
        };
        match self {
            InitialCondition::Indicator { a, b, height } => {
                finite(*a, "indicator a")?;
                finite(*b, "indicator b")?;
                finite(*height, "indicator height")?;
                if !(0.0 <= *a && a < b) {
                    return Err(Error::invalid(format!("indicator needs 0 <= a < b, got [{a}, {b}]")));
                }
                if *height < 0.0 {
                    return Err(Error::invalid("indicator height must be nonnegative"));
                }
            }
            InitialCondition::ScaledSine { mass } => {
                finite(*mass, "sine mass")?;
                if *mass < 0.0 {
                    return Err(Error::invalid("sine mass must be nonnegative"));
                }
            }
            InitialCondition::PowerTail { delta } => {
                if !(*delta > 1.0 && *delta < 2.0) {
                    return Err(Error::invalid(format!("power tail needs 1 < delta < 2, got {delta}")));
                }
            }
            InitialCondition::SelfSimilarSeed { m1 } => {
                finite(*m1, "seed first moment")?;
                if *m1 < 0.0 {
                    return Err(Error::invalid("seed first moment must be nonnegative"));
                }
            }
            InitialCondition::Tabulated { x, u } => {
                if x.len() != u.len() || x.len() < 2 {
                    return Err(Error::invalid(
                        "tabulated data needs matching x and u arrays with at least two samples",
                    ));
                }
                if x.iter().chain(u).any(|v| !v.is_finite()) {
                    return Err(Error::invalid("tabulated data must be finite"));
                }
                if x[0] < 0.0 || x.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::invalid(
                        "tabulated abscissae must be nonnegative and strictly increasing",
                    ));
                }
                if let Some(v) = u.iter().find(|v| **v < 0.0) {
                    return Err(Error::invalid(format!("tabulated values must be nonnegative, found {v}")));
                }
            }
        }
        Ok(())
    }

    /// Pointwise value u^in(x).
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            InitialCondition::Indicator { a, b, height } => {
                if *a <= x && x <= *b {
                    *height
                } else {
                    0.0
                }
            }
            InitialCondition::ScaledSine { mass } => {
                if (0.0..=PI).contains(&x) {
                    0.5 * mass * x.sin()
                } else {
                    0.0
                }
            }
            InitialCondition::PowerTail { delta } => {
                if x < 0.0 {
                    0.0
                } else {
                    x * (1.0 + x).powf(-delta - 1.0)
                }
            }
            InitialCondition::SelfSimilarSeed { m1 } => {
                if x < 0.0 {
                    0.0
                } else {
                    m1 * x * (-0.25 * x * x).exp() / (2.0 * PI.sqrt())
                }
            }
            InitialCondition::Tabulated { x: xs, u } => {
                let n = xs.len();
                if x < xs[0] || x > xs[n - 1] {
                    return 0.0;
                }
                let k = crate::interp::bracket(xs, x);
                let s = (x - xs[k]) / (xs[k + 1] - xs[k]);
                u[k] + s * (u[k + 1] - u[k])
            }
        }
    }

    /// Closed interval outside which u^in vanishes (`hi` may be infinite).
    pub fn support(&self) -> (f64, f64) {
        match self {
            InitialCondition::Indicator { a, b, .. } => (*a, *b),
            InitialCondition::ScaledSine { .. } => (0.0, PI),
            InitialCondition::PowerTail { .. } | InitialCondition::SelfSimilarSeed { .. } => {
                (0.0, f64::INFINITY)
            }
            InitialCondition::Tabulated { x, .. } => (x[0], x[x.len() - 1]),
        }
    }

    /// Points inside the support where u^in or its derivatives jump; panel
    /// quadratures split there.
    pub(crate) fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut pts = match self {
            InitialCondition::Tabulated { x, .. } => x.clone(),
            InitialCondition::PowerTail { .. } => {
                // geometric panels resolve the algebraic tail
                let mut v = vec![0.0];
                let mut p = 0.125;
                while p < hi {
                    v.push(p);
                    p *= 2.0;
                }
                v
            }
            // panels no wider than the data's own length scale
            InitialCondition::SelfSimilarSeed { .. } => (0..=40).map(|k| 0.5 * k as f64).collect(),
            InitialCondition::ScaledSine { .. } => vec![0.5 * PI],
            InitialCondition::Indicator { .. } => Vec::new(),
        };
        pts.retain(|p| *p > lo && *p < hi);
        pts
    }

    /// ∫ weight(y)·u^in(y) dy over [lo, hi] ∩ supp(u^in), with 64-node
    /// Gauss–Legendre panels no longer than `max_panel`.
    pub fn integrate_against<W: Fn(f64) -> f64>(&self, lo: f64, hi: f64, max_panel: f64, weight: W) -> f64 {
        self.integrate_against_rule(gauss_legendre_64(), lo, hi, max_panel, weight)
    }

    /// As [`InitialCondition::integrate_against`] with a caller-supplied rule.
    pub fn integrate_against_rule<W: Fn(f64) -> f64>(
        &self,
        rule: &GaussLegendre,
        lo: f64,
        hi: f64,
        max_panel: f64,
        weight: W,
    ) -> f64 {
        let (s_lo, s_hi) = self.support();
        let lo = lo.max(s_lo).max(0.0);
        let hi = hi.min(s_hi);
        if !(hi > lo) {
            return 0.0;
        }
        assert!(hi.is_finite(), "integration window must be bounded");
        let mut edges = vec![lo];
        edges.extend(self.breakpoints(lo, hi));
        edges.push(hi);
        edges
            .windows(2)
            .map(|w| {
                let panels = ((w[1] - w[0]) / max_panel).ceil().max(1.0) as usize;
                rule.integrate_panels(|y| weight(y) * self.eval(y), w[0], w[1], panels)
            })
            .sum()
    }

    pub fn analytic_moments(&self) -> Option<AnalyticMoments> {
        match self {
            InitialCondition::Indicator { a, b, height } => Some(AnalyticMoments {
                mass: height * (b - a),
                first: Moment::Finite(height * (b * b - a * a) / 2.0),
                second: Moment::Finite(height * (b * b * b - a * a * a) / 3.0),
                sup_norm: *height,
            }),
            InitialCondition::ScaledSine { mass } => Some(AnalyticMoments {
                mass: *mass,
                first: Moment::Finite(0.5 * mass * PI),
                second: Moment::Finite(0.5 * mass * (PI * PI - 4.0)),
                sup_norm: 0.5 * mass,
            }),
            InitialCondition::PowerTail { delta } => {
                let x_peak = 1.0 / delta;
                Some(AnalyticMoments {
                    mass: 1.0 / (delta * (delta - 1.0)),
                    first: Moment::Unbounded,
                    second: Moment::Unbounded,
                    sup_norm: x_peak * (1.0 + x_peak).powf(-delta - 1.0),
                })
            }
            InitialCondition::SelfSimilarSeed { m1 } => Some(AnalyticMoments {
                mass: m1 / PI.sqrt(),
                first: Moment::Finite(*m1),
                second: Moment::Finite(4.0 * m1 / PI.sqrt()),
                sup_norm: m1 * 2f64.sqrt() * (-0.5f64).exp() / (2.0 * PI.sqrt()),
            }),
            InitialCondition::Tabulated { .. } => None,
        }
    }

    /// Total mass M(0), exact for every variant (the tabulated interpolant
    /// integrates exactly by the trapezoid rule).
    pub fn mass(&self) -> f64 {
        match self {
            InitialCondition::Tabulated { x, u } => x
                .windows(2)
                .zip(u.windows(2))
                .map(|(xw, uw)| 0.5 * (xw[1] - xw[0]) * (uw[0] + uw[1]))
                .sum(),
            _ => self.analytic_moments().expect("closed form").mass,
        }
    }

    /// First moment M₁(0); `Unbounded` for heavy tails.
    pub fn first_moment(&self) -> Moment {
        match self {
            InitialCondition::Tabulated { x, u } => {
                // exact for the piecewise-linear interpolant
                let m1 = x
                    .windows(2)
                    .zip(u.windows(2))
                    .map(|(xw, uw)| {
                        let h = xw[1] - xw[0];
                        h * (uw[0] * (2.0 * xw[0] + xw[1]) + uw[1] * (xw[0] + 2.0 * xw[1])) / 6.0
                    })
                    .sum();
                Moment::Finite(m1)
            }
            _ => self.analytic_moments().expect("closed form").first,
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            InitialCondition::Tabulated { u, .. } => u.iter().cloned().fold(0.0, f64::max),
            _ => self.analytic_moments().expect("closed form").sup_norm,
        }
    }
}
