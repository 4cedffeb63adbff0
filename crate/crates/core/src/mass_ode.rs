//! The time rescaling `a(t) = ∫₀ᵗ M(s) ds`.
//!
//! Solving the heat equation in the variable `a` gives
//! `M = M(0) - F(a)` with
//!
//! ```text
//! F(a) = ∫₀^∞ erfc(s / (2√a)) u^in(s) ds,     F'(a) = G(a)
//! G(a) = a^{-3/2}/(2√π) · ∫₀^∞ s·e^{-s²/(4a)} u^in(s) ds
//! ```
//!
//! so `a` solves the autonomous ODE `a' = M(0) - F(a)`, `a(0) = 0`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{log_times, loglog_slope, SlopeFit};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ic::{InitialCondition, Moment};
use crate::interp::{bracket, hermite, hermite5, MonotoneCubic};
use crate::ode::{integrate, OdeControls};
use crate::quad::{adaptive, AdaptiveTolerance};
use crate::special::{erf, erfc};

/// Gaussian windows are cut where `e^{-s²/(4a)}` drops below ~1e-18.
const WINDOW: f64 = 6.5;

const TABLE_LOG10_MIN: f64 = -6.0;
const TABLE_LOG10_MAX: f64 = 8.0;
const TABLE_PER_DECADE: usize = 100;

fn check_a(a: f64) -> Result<()> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::invalid(format!("rescaled time must be positive, got {a}")));
    }
    Ok(())
}

/// `s·erf(s/c)` integrated from 0, minus its value `c/√π` at 0, divided by c.
/// With `x = s/c`: `γ(x) = x·erf(x) + (e^{-x²} - 1)/√π`.
fn erf_primitive(x: f64) -> f64 {
    if x < 0.5 {
        // Σ (-1)^n x^{2n+2} / (n! (2n+1)(2n+2)), times 2/√π
        let x2 = x * x;
        let mut term = x2;
        let mut sum = 0.0;
        for n in 0..30 {
            let nf = n as f64;
            let add = term / ((2.0 * nf + 1.0) * (2.0 * nf + 2.0));
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
            term *= -x2 / (nf + 1.0);
        }
        2.0 / PI.sqrt() * sum
    } else {
        x * erf(x) + ((-x * x).exp() - 1.0) / PI.sqrt()
    }
}

fn g_quadrature(ic: &InitialCondition, a: f64) -> f64 {
    let c = 2.0 * a.sqrt();
    let integral = ic.integrate_against(0.0, WINDOW * c, 0.25 * c, |s| s * (-(s / c) * (s / c)).exp());
    integral / (2.0 * PI.sqrt() * a * a.sqrt())
}

fn f_quadrature(ic: &InitialCondition, a: f64) -> f64 {
    let c = 2.0 * a.sqrt();
    ic.integrate_against(0.0, WINDOW * c, 0.25 * c, |s| erfc(s / c))
}

/// G(a) for a > 0. Closed forms for indicators and the similarity seed,
/// Gauss–Legendre panels over the Gaussian window otherwise.
pub fn g_of_a(ic: &InitialCondition, a: f64) -> Result<f64> {
    check_a(a)?;
    ic.validate()?;
    Ok(match ic {
        InitialCondition::Indicator { a: l, b: r, height } => {
            let q = 4.0 * a;
            height * ((-l * l / q).exp() - (-r * r / q).exp()) / (PI * a).sqrt()
        }
        InitialCondition::SelfSimilarSeed { m1 } => m1 / (2.0 * PI.sqrt() * (1.0 + a).powf(1.5)),
        _ => g_quadrature(ic, a),
    })
}

/// F(a) = ∫₀^a G for a >= 0.
pub fn f_of_a(ic: &InitialCondition, a: f64) -> Result<f64> {
    if a == 0.0 {
        return Ok(0.0);
    }
    check_a(a)?;
    ic.validate()?;
    Ok(match ic {
        InitialCondition::Indicator { a: l, b: r, height } => {
            let c = 2.0 * a.sqrt();
            // the Gaussian parts of the two primitives nearly cancel for large a
            let (xl, xr) = (l / c, r / c);
            let gauss = (-xl * xl).exp() * -(-(xr * xr - xl * xl)).exp_m1();
            height * (r * erfc(xr) - l * erfc(xl) + c / PI.sqrt() * gauss)
        }
        InitialCondition::SelfSimilarSeed { m1 } => m1 / PI.sqrt() * -(-0.5 * a.ln_1p()).exp_m1(),
        _ => f_quadrature(ic, a),
    })
}

/// F(a) by adaptive quadrature of G itself, `∫₀^{√a} 2σ·G(σ²) dσ`. The
/// substitution tames the `a^{-1/2}` growth of G for data that do not
/// vanish at the origin. Slow; an independent check on [`f_of_a`].
pub fn f_of_a_via_g(ic: &InitialCondition, a: f64) -> Result<f64> {
    if a == 0.0 {
        return Ok(0.0);
    }
    check_a(a)?;
    let tol = AdaptiveTolerance {
        abs: 1e-15,
        rel: 1e-11,
        max_intervals: 20_000,
    };
    adaptive(
        |sigma| {
            if sigma == 0.0 {
                0.0
            } else {
                2.0 * sigma * g_of_a(ic, sigma * sigma).unwrap_or(f64::NAN)
            }
        },
        0.0,
        a.sqrt(),
        tol,
    )
}

/// `a ↦ M(a) = M(0) - F(a)` together with G, prepared for repeated
/// evaluation inside the ODE right-hand side.
#[derive(Debug, Clone)]
pub struct MassLaw {
    m0: f64,
    kind: LawKind,
}

#[derive(Debug, Clone)]
enum LawKind {
    Zero,
    Indicator { l: f64, r: f64, h: f64 },
    Seed { m1: f64 },
    /// `log M` against `log a`, Hermite with exact slopes `-a·G/M`.
    Table { ic: InitialCondition, table: MonotoneCubic },
}

impl MassLaw {
    pub fn new(ic: &InitialCondition) -> Result<Self> {
        ic.validate()?;
        let m0 = ic.mass();
        if m0 == 0.0 {
            return Ok(Self { m0, kind: LawKind::Zero });
        }
        let kind = match ic {
            InitialCondition::Indicator { a, b, height } => LawKind::Indicator { l: *a, r: *b, h: *height },
            InitialCondition::SelfSimilarSeed { m1 } => LawKind::Seed { m1: *m1 },
            _ => Self::tabulate(ic, m0)?,
        };
        Ok(Self { m0, kind })
    }

    fn tabulate(ic: &InitialCondition, m0: f64) -> Result<LawKind> {
        let n = ((TABLE_LOG10_MAX - TABLE_LOG10_MIN) as usize) * TABLE_PER_DECADE + 1;
        let step = (TABLE_LOG10_MAX - TABLE_LOG10_MIN) * std::f64::consts::LN_10 / (n - 1) as f64;
        let log_a0 = TABLE_LOG10_MIN * std::f64::consts::LN_10;
        let xs: Vec<f64> = (0..n).map(|k| log_a0 + k as f64 * step).collect();
        let mass = Execution::default().map(n, |k| m0 - f_quadrature(ic, xs[k].exp()));
        let g = Execution::default().map(n, |k| g_quadrature(ic, xs[k].exp()));
        if let Some(k) = mass.iter().position(|m| !(*m > 0.0)) {
            return Err(Error::accuracy(format!(
                "mass law lost positivity at a = {:e}; quadrature too coarse",
                xs[k].exp()
            )));
        }
        let ys = mass.iter().map(|m| m.ln()).collect();
        let ds = (0..n).map(|k| -xs[k].exp() * g[k] / mass[k]).collect();
        Ok(LawKind::Table {
            ic: ic.clone(),
            table: MonotoneCubic::with_slopes(xs, ys, ds)?,
        })
    }

    pub fn initial_mass(&self) -> f64 {
        self.m0
    }

    /// M as a function of the rescaled time; `M(0)` for `a <= 0`.
    pub fn mass(&self, a: f64) -> f64 {
        if !(a > 0.0) {
            return self.m0;
        }
        match &self.kind {
            LawKind::Zero => 0.0,
            LawKind::Indicator { l, r, h } => {
                let c = 2.0 * a.sqrt();
                h * c * (erf_primitive(r / c) - erf_primitive(l / c))
            }
            LawKind::Seed { m1 } => m1 / (PI * (1.0 + a)).sqrt(),
            LawKind::Table { ic, table } => {
                let (lo, hi) = table.domain();
                let la = a.ln();
                if la < lo || la > hi {
                    self.m0 - f_quadrature(ic, a)
                } else {
                    table.eval(la).exp()
                }
            }
        }
    }

    /// G(a) for a > 0.
    pub fn g(&self, a: f64) -> f64 {
        match &self.kind {
            LawKind::Zero => 0.0,
            LawKind::Indicator { l, r, h } => {
                let q = 4.0 * a;
                h * ((-l * l / q).exp() - (-r * r / q).exp()) / (PI * a).sqrt()
            }
            LawKind::Seed { m1 } => m1 / (2.0 * PI.sqrt() * (1.0 + a).powf(1.5)),
            LawKind::Table { ic, table } => {
                let (lo, hi) = table.domain();
                let la = a.ln();
                if la < lo || la > hi {
                    g_quadrature(ic, a)
                } else {
                    let (log_m, slope) = table.eval_with_slope(la);
                    -slope * log_m.exp() / a
                }
            }
        }
    }
}

/// Which problem a rescaling belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RescalingDomain {
    HalfLine,
    Bounded,
}

/// Sampled trajectory of `a(t)` and `M(t) = a'(t)`, with `M' = a''` stored
/// alongside. Dense output is quintic Hermite for `a` and cubic Hermite for
/// `M`, so both are continuously differentiable in t.
#[derive(Debug, Clone)]
pub struct TimeRescaling {
    domain: RescalingDomain,
    initial_mass: f64,
    degenerate: bool,
    t: Vec<f64>,
    a: Vec<f64>,
    m: Vec<f64>,
    dm: Vec<f64>,
}

/// One row of a rescaling table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescalingSample {
    pub t: f64,
    pub a: f64,
    pub mass: f64,
}

impl TimeRescaling {
    pub(crate) fn from_parts(
        domain: RescalingDomain,
        initial_mass: f64,
        t: Vec<f64>,
        a: Vec<f64>,
        m: Vec<f64>,
        mut dm: Vec<f64>,
    ) -> Result<Self> {
        let n = t.len();
        if n < 2 || a.len() != n || m.len() != n || dm.len() != n {
            return Err(Error::invalid("rescaling needs at least two samples of t, a, M, M'"));
        }
        if t[0] != 0.0 || a[0] != 0.0 {
            return Err(Error::invalid("rescaling must start at t = 0 with a = 0"));
        }
        // M' may be unbounded at t = 0; fall back to the secant there
        for k in 0..n {
            if !dm[k].is_finite() {
                let j = if k + 1 < n { k + 1 } else { k - 1 };
                dm[k] = (m[j] - m[k]) / (t[j] - t[k]);
            }
        }
        let degenerate = initial_mass == 0.0;
        if !degenerate && a.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::accuracy("rescaled time failed to increase strictly"));
        }
        Ok(Self {
            domain,
            initial_mass,
            degenerate,
            t,
            a,
            m,
            dm,
        })
    }

    /// Rebuilds a rescaling from a stored `(t, a, M)` table, with `M'` taken
    /// from centered differences of M.
    pub fn from_samples(domain: RescalingDomain, t: Vec<f64>, a: Vec<f64>, m: Vec<f64>) -> Result<Self> {
        let n = t.len();
        if n < 2 || a.len() != n || m.len() != n {
            return Err(Error::invalid("rescaling table needs at least two rows of t, a, M"));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("rescaling table times must increase strictly"));
        }
        let dm = (0..n)
            .map(|k| {
                let (i, j) = (k.saturating_sub(1), (k + 1).min(n - 1));
                (m[j] - m[i]) / (t[j] - t[i])
            })
            .collect();
        let m0 = m[0];
        Self::from_parts(domain, m0, t, a, m, dm)
    }

    pub fn domain(&self) -> RescalingDomain {
        self.domain
    }

    pub fn initial_mass(&self) -> f64 {
        self.initial_mass
    }

    /// True for zero-mass data, where `a ≡ 0`.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.a
    }

    pub fn masses(&self) -> &[f64] {
        &self.m
    }

    pub fn t_end(&self) -> f64 {
        self.t[self.t.len() - 1]
    }

    fn locate(&self, t: f64) -> Result<usize> {
        let end = self.t_end();
        if !(t >= 0.0 && t <= end) {
            return Err(Error::domain(format!("t = {t} outside the rescaling range [0, {end}]")));
        }
        Ok(bracket(&self.t, t))
    }

    pub fn a_at(&self, t: f64) -> Result<f64> {
        let k = self.locate(t)?;
        Ok(hermite5(
            self.t[k],
            self.t[k + 1],
            self.a[k],
            self.a[k + 1],
            self.m[k],
            self.m[k + 1],
            self.dm[k],
            self.dm[k + 1],
            t,
        ))
    }

    pub fn mass_at(&self, t: f64) -> Result<f64> {
        let k = self.locate(t)?;
        Ok(hermite(self.t[k], self.t[k + 1], self.m[k], self.m[k + 1], self.dm[k], self.dm[k + 1], t).0)
    }

    /// `M'(t)` from the dense output.
    pub fn mass_rate_at(&self, t: f64) -> Result<f64> {
        let k = self.locate(t)?;
        Ok(hermite(self.t[k], self.t[k + 1], self.m[k], self.m[k + 1], self.dm[k], self.dm[k + 1], t).1)
    }

    pub fn sample(&self, times: &[f64]) -> Result<Vec<RescalingSample>> {
        times
            .iter()
            .map(|&t| {
                Ok(RescalingSample {
                    t,
                    a: self.a_at(t)?,
                    mass: self.mass_at(t)?,
                })
            })
            .collect()
    }
}

/// Integrates `a' = M(0) - F(a)` from `a(0) = 0` to `t_end`.
pub fn solve_a(ic: &InitialCondition, t_end: f64, controls: &OdeControls) -> Result<TimeRescaling> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::invalid(format!("t_end must be positive, got {t_end}")));
    }
    let law = MassLaw::new(ic)?;
    solve_with_law(&law, t_end, controls)
}

pub fn solve_with_law(law: &MassLaw, t_end: f64, controls: &OdeControls) -> Result<TimeRescaling> {
    let m0 = law.initial_mass();
    if m0 == 0.0 {
        return TimeRescaling::from_parts(
            RescalingDomain::HalfLine,
            0.0,
            vec![0.0, t_end],
            vec![0.0; 2],
            vec![0.0; 2],
            vec![0.0; 2],
        );
    }
    let sol = integrate(|_, a| law.mass(a), 0.0, 0.0, t_end, &[], controls)?;
    let dm: Vec<f64> = sol
        .y
        .iter()
        .zip(&sol.dy)
        .map(|(&a, &m)| if a > 0.0 { -law.g(a) * m } else { f64::NAN })
        .collect();
    TimeRescaling::from_parts(RescalingDomain::HalfLine, m0, sol.t, sol.y, sol.dy, dm)
}

/// Large-time law `a ≈ c·t^{2/3}`, `M ≈ (2/3)·c·t^{-1/3}` with
/// `c = (3M₁/(2√π))^{2/3}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticConstants {
    pub m1: f64,
    pub c: f64,
}

impl AsymptoticConstants {
    pub fn new(m1: f64) -> Result<Self> {
        if !(m1 > 0.0 && m1.is_finite()) {
            return Err(Error::invalid(format!("first moment must be positive, got {m1}")));
        }
        Ok(Self {
            m1,
            c: (3.0 * m1 / (2.0 * PI.sqrt())).powf(2.0 / 3.0),
        })
    }

    pub fn from_ic(ic: &InitialCondition) -> Result<Self> {
        match ic.first_moment() {
            Moment::Finite(m1) => Self::new(m1),
            Moment::Unbounded => Err(Error::domain("first moment is unbounded; no t^(2/3) law")),
        }
    }

    pub fn predicted_a(&self, t: f64) -> f64 {
        self.c * t.powf(2.0 / 3.0)
    }

    pub fn predicted_mass(&self, t: f64) -> f64 {
        2.0 / 3.0 * self.c * t.powf(-1.0 / 3.0)
    }
}

/// Log-log slope of `a(t)` over `window`, from 64 log-spaced samples of the
/// dense output.
pub fn tail_exponent_of_a(resc: &TimeRescaling, window: (f64, f64)) -> Result<SlopeFit> {
    if resc.domain() != RescalingDomain::HalfLine {
        return Err(Error::domain("tail exponent is defined for half-line rescalings only"));
    }
    if resc.is_degenerate() {
        return Err(Error::domain("zero-mass rescaling has no growth exponent"));
    }
    let (t_lo, t_hi) = window;
    if !(t_lo > 0.0 && t_hi <= resc.t_end()) {
        return Err(Error::domain(format!(
            "window [{t_lo}, {t_hi}] outside the sampled range (0, {}]",
            resc.t_end()
        )));
    }
    if t_hi < 10.0 * t_lo * (1.0 - 1e-12) {
        return Err(Error::domain(format!("window [{t_lo}, {t_hi}] spans less than a decade")));
    }
    let series = resc
        .sample(&log_times(t_lo, t_hi, 64))?
        .into_iter()
        .map(|s| (s.t, s.a))
        .collect::<Vec<_>>();
    loglog_slope(&series, window)
}

/// Log-log slope of `M(t)` over `window`, sampled like [`tail_exponent_of_a`].
pub fn mass_decay_exponent(resc: &TimeRescaling, window: (f64, f64)) -> Result<SlopeFit> {
    let (t_lo, t_hi) = window;
    if !(t_lo > 0.0 && t_hi <= resc.t_end() && t_hi > t_lo) {
        return Err(Error::domain(format!("window [{t_lo}, {t_hi}] outside the sampled range")));
    }
    let series = resc
        .sample(&log_times(t_lo, t_hi, 64))?
        .into_iter()
        .map(|s| (s.t, s.mass))
        .collect::<Vec<_>>();
    loglog_slope(&series, window)
}
