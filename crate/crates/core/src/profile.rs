//! Self-similar profiles f_μ and the confluent hypergeometric function ₁F₁.
//!
//! The profile family solves `f'' = (μ-1)·f - μ·ξ·f'` with `f(0) = 0`,
//! normalized by `f'(0) = 1`:
//!
//! ```text
//! f_μ(ξ) = ξ · ₁F₁(1/(2μ); 3/2; -μξ²/2)        (μ > 0)
//! f_0(ξ) = sin ξ
//! ```
//!
//! For μ = 1/3 this collapses to `ξ·e^{-ξ²/6}`; for 1/3 < μ < 1 the tail is
//! algebraic, `O(ξ^{1-1/μ})`, and for μ < 1/3 the profile changes sign.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::quad::{adaptive, AdaptiveTolerance};
use crate::special::{gamma, recip_gamma};

/// Evaluation controls for [`kummer_1f1`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KummerControls {
    /// Series stop: |term| < tol·|partial sum|.
    pub tol: f64,
    /// Arguments below `-transform_below` go through Kummer's transformation.
    pub transform_below: f64,
    /// Transformed arguments above this use the large-argument expansion.
    pub z_switch: f64,
    pub max_terms: usize,
}

impl Default for KummerControls {
    fn default() -> Self {
        Self {
            tol: 1e-16,
            transform_below: 2.0,
            z_switch: 30.0,
            max_terms: 20_000,
        }
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Kummer's confluent hypergeometric function ₁F₁(α; β; z) for real arguments.
///
/// Power series for `z >= -transform_below`. Below that, Kummer's
/// transformation `₁F₁(α;β;z) = e^z·₁F₁(β-α;β;-z)` turns the alternating
/// series into a positive one; once `-z > z_switch` the transformed function
/// is replaced by its large-argument expansion (DLMF 13.7.2, dominant part).
pub fn kummer_1f1(alpha: f64, beta: f64, z: f64, ctl: &KummerControls) -> Result<f64> {
    if is_nonpositive_integer(beta) {
        return Err(Error::domain(format!("1F1 undefined for beta = {beta}")));
    }
    if !(alpha.is_finite() && beta.is_finite() && z.is_finite()) {
        return Err(Error::invalid("1F1 arguments must be finite"));
    }
    if z >= -ctl.transform_below {
        return series_1f1(alpha, beta, z, ctl);
    }
    let x = -z;
    let a_t = beta - alpha;
    if x <= ctl.z_switch || is_nonpositive_integer(a_t) {
        return Ok(z.exp() * series_1f1(a_t, beta, x, ctl)?);
    }
    Ok(scaled_asymptotic(a_t, beta, x, ctl))
}

fn series_1f1(alpha: f64, beta: f64, z: f64, ctl: &KummerControls) -> Result<f64> {
    let mut sum = 1.0;
    let mut term = 1.0;
    for k in 0..ctl.max_terms {
        let kf = k as f64;
        if alpha + kf == 0.0 {
            return Ok(sum);
        }
        term *= (alpha + kf) / ((beta + kf) * (kf + 1.0)) * z;
        sum += term;
        if term.abs() < ctl.tol * sum.abs() || term == 0.0 {
            return Ok(sum);
        }
    }
    Err(Error::accuracy(format!(
        "1F1({alpha}; {beta}; {z}) series did not converge in {} terms",
        ctl.max_terms
    )))
}

/// `e^{-x}·₁F₁(a; b; x)` for large positive x, keeping the algebraic part
/// `Γ(b)/Γ(a)·x^{a-b}·Σ (b-a)_k (1-a)_k / k! · x^{-k}`, truncated at its
/// smallest term. The neglected remainder is `O(e^{-x})` relative.
fn scaled_asymptotic(a: f64, b: f64, x: f64, ctl: &KummerControls) -> f64 {
    let mut sum = 1.0;
    let mut term: f64 = 1.0;
    for k in 0..ctl.max_terms {
        let kf = k as f64;
        let next = term * (b - a + kf) * (1.0 - a + kf) / ((kf + 1.0) * x);
        if next.abs() >= term.abs() || next == 0.0 {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < ctl.tol * sum.abs() {
            break;
        }
    }
    gamma(b) * recip_gamma(a) * x.powf(a - b) * sum
}

/// Similarity exponent μ ∈ [0, 1) plus evaluation controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub mu: f64,
    pub series_tol: f64,
    pub z_switch: f64,
}

impl ProfileSpec {
    pub fn new(mu: f64) -> Result<Self> {
        let spec = Self {
            mu,
            series_tol: 1e-16,
            z_switch: 30.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.mu) {
            return Err(Error::invalid(format!("similarity exponent must lie in [0, 1), got {}", self.mu)));
        }
        if !(self.series_tol > 0.0 && self.z_switch > 0.0) {
            return Err(Error::invalid("series tolerance and z_switch must be positive"));
        }
        Ok(())
    }

    fn kummer_controls(&self) -> KummerControls {
        KummerControls {
            tol: self.series_tol,
            z_switch: self.z_switch,
            ..KummerControls::default()
        }
    }
}

/// f_μ(ξ) for ξ >= 0.
pub fn f_mu(spec: &ProfileSpec, xi: f64) -> Result<f64> {
    spec.validate()?;
    if !(xi >= 0.0) {
        return Err(Error::domain(format!("profile argument must be >= 0, got {xi}")));
    }
    if spec.mu == 0.0 {
        return Ok(xi.sin());
    }
    if xi == 0.0 {
        return Ok(0.0);
    }
    let mu = spec.mu;
    Ok(xi * kummer_1f1(0.5 / mu, 1.5, -0.5 * mu * xi * xi, &spec.kummer_controls())?)
}

/// f_μ over a ξ-grid.
pub fn f_mu_grid(spec: &ProfileSpec, xis: &[f64], exec: Execution) -> Result<Vec<f64>> {
    spec.validate()?;
    if let Some(x) = xis.iter().find(|x| !(**x >= 0.0)) {
        return Err(Error::domain(format!("profile argument must be >= 0, got {x}")));
    }
    let values = exec.map(xis.len(), |i| f_mu(spec, xis[i]).unwrap_or(f64::NAN));
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::accuracy("profile evaluation failed on the grid"));
    }
    Ok(values)
}

/// Least-squares slope of log f_μ against log ξ over `[xi_lo, xi_hi]`.
pub fn f_mu_tail_exponent(spec: &ProfileSpec, xi_lo: f64, xi_hi: f64) -> Result<f64> {
    if !(xi_lo > 0.0 && xi_hi > xi_lo) {
        return Err(Error::domain(format!("bad tail window [{xi_lo}, {xi_hi}]")));
    }
    const SAMPLES: usize = 64;
    let ratio = xi_hi / xi_lo;
    let xis: Vec<f64> = (0..SAMPLES)
        .map(|k| xi_lo * ratio.powf(k as f64 / (SAMPLES - 1) as f64))
        .collect();
    let values = f_mu_grid(spec, &xis, Execution::Sequential)?;
    if let Some(i) = values.iter().position(|v| *v <= 0.0) {
        return Err(Error::domain(format!(
            "f_mu is nonpositive at xi = {} (mu = {})",
            xis[i], spec.mu
        )));
    }
    let lx: Vec<f64> = xis.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = values.iter().map(|y| y.ln()).collect();
    Ok(crate::diagnostics::least_squares(&lx, &ly).0)
}

/// ₁F₁(α; β; z) from its Euler integral
/// `Γ(β)/(Γ(β-α)Γ(α)) ∫₀¹ e^{zt} t^{α-1} (1-t)^{β-α-1} dt`, valid for 0 < α < β.
///
/// Both endpoint singularities are removed by substitution (`u = t^α` on the
/// left half, `v = (1-t)^{β-α}` on the right), then adaptive Gauss–Kronrod.
pub fn euler_integral_oracle(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    if !(alpha > 0.0 && beta > alpha && z.is_finite()) {
        return Err(Error::invalid(format!(
            "Euler integral needs 0 < alpha < beta, got alpha = {alpha}, beta = {beta}"
        )));
    }
    let gam = beta - alpha;
    let split: f64 = 0.5;
    let tol = AdaptiveTolerance {
        abs: 0.0,
        rel: 1e-14,
        max_intervals: 20_000,
    };
    let left = adaptive(
        |u| {
            let t = u.powf(1.0 / alpha);
            (z * t).exp() * (1.0 - t).powf(gam - 1.0)
        },
        0.0,
        split.powf(alpha),
        tol,
    )?;
    let right = adaptive(
        |v| {
            let s = v.powf(1.0 / gam);
            (z * (1.0 - s)).exp() * (1.0 - s).powf(alpha - 1.0)
        },
        0.0,
        (1.0 - split).powf(gam),
        tol,
    )?;
    // left carries 1/α and right 1/γ from the substitutions
    let pre = gamma(beta) * recip_gamma(alpha + 1.0);
    Ok(pre * (left * recip_gamma(gam) + right * recip_gamma(gam + 1.0) * alpha))
}

/// Parameters of the large-time attractor profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttractorParams {
    pub m1: f64,
    pub a: f64,
}

impl AttractorParams {
    pub fn new(m1: f64, a: f64) -> Result<Self> {
        if !(m1 > 0.0 && a > 0.0 && m1.is_finite() && a.is_finite()) {
            return Err(Error::invalid(format!("attractor needs M1 > 0 and a > 0, got {m1}, {a}")));
        }
        Ok(Self { m1, a })
    }

    /// Location and height of the maximum: `x = √(2a)`, `M₁/(√(2eπ)·a)`.
    pub fn peak(&self) -> (f64, f64) {
        ((2.0 * self.a).sqrt(), self.m1 / ((2.0 * std::f64::consts::E * PI).sqrt() * self.a))
    }
}

/// `M₁·x/(2√π·a^{3/2})·e^{-x²/(4a)}`.
pub fn attractor(params: &AttractorParams, x: f64) -> f64 {
    let a = params.a;
    params.m1 * x / (2.0 * PI.sqrt() * a * a.sqrt()) * (-x * x / (4.0 * a)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gauss_legendre_64;
    use proptest::prelude::*;

    fn k(alpha: f64, beta: f64, z: f64) -> f64 {
        kummer_1f1(alpha, beta, z, &KummerControls::default()).unwrap()
    }

    #[test]
    fn kummer_at_zero_is_one() {
        assert_eq!(k(0.7, 1.3, 0.0), 1.0);
        assert_eq!(k(-2.5, 4.0, 0.0), 1.0);
    }

    #[test]
    fn kummer_with_equal_parameters_is_exp() {
        for z in [-1.0, 0.0, 2.0, -7.5, -40.0, 12.0] {
            let want: f64 = f64::exp(z);
            assert!(((k(1.5, 1.5, z) - want) / want).abs() < 1e-13, "z = {z}");
        }
    }

    #[test]
    fn kummer_rejects_poles() {
        let ctl = KummerControls::default();
        assert!(matches!(kummer_1f1(1.0, -2.0, 0.5, &ctl), Err(Error::Domain(_))));
        assert!(matches!(kummer_1f1(1.0, 0.0, 0.5, &ctl), Err(Error::Domain(_))));
    }

    #[test]
    fn kummer_nonconvergence_reported() {
        let ctl = KummerControls { max_terms: 5, ..Default::default() };
        assert!(matches!(kummer_1f1(0.5, 1.5, 1.5, &ctl), Err(Error::Accuracy(_))));
    }

    #[test]
    fn kummer_closed_form_at_one_third() {
        // 1F1(3/2; 3/2; -ξ²/6) at ξ = 1
        let v = k(1.5, 1.5, -1.0 / 6.0);
        assert!((v - 0.846_481_724_890_614).abs() < 1e-12);
    }

    /// ₁F₁(1; 3/2; -x) = √π·e^{-x}·erfi(√x)/(2√x) = D(√x)/√x, with D the
    /// Dawson function. Checked against the Dawson integral computed by
    /// quadrature of its defining integral.
    #[test]
    fn kummer_matches_dawson_function() {
        let rule = gauss_legendre_64();
        for x in [0.5f64, 3.0, 9.0, 25.0, 31.0, 60.0, 400.0] {
            let r = x.sqrt();
            // D(r) = ∫₀^r e^{s² - r²} ds
            let dawson = rule.integrate_panels(|s| (s * s - r * r).exp(), 0.0, r, 40);
            let want = dawson / r;
            let got = k(1.0, 1.5, -x);
            assert!(((got - want) / want).abs() < 1e-11, "x = {x}: {got} vs {want}");
        }
    }

    #[test]
    fn profile_basic_values() {
        let third = ProfileSpec::new(1.0 / 3.0).unwrap();
        assert!((f_mu(&third, 1.0).unwrap() - (-1.0f64 / 6.0).exp()).abs() < 1e-12);
        let zero = ProfileSpec::new(0.0).unwrap();
        assert!(f_mu(&zero, PI).unwrap().abs() < 1e-15);
        for mu in [0.0, 0.2, 1.0 / 3.0, 0.5, 0.9] {
            assert_eq!(f_mu(&ProfileSpec::new(mu).unwrap(), 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn profile_rejects_bad_arguments() {
        assert!(ProfileSpec::new(1.0).is_err());
        assert!(ProfileSpec::new(-0.1).is_err());
        let spec = ProfileSpec::new(0.5).unwrap();
        assert!(matches!(f_mu(&spec, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn one_third_matches_gaussian_closed_form() {
        let spec = ProfileSpec::new(1.0 / 3.0).unwrap();
        for j in 0..=600 {
            let xi = j as f64 * 0.01;
            let want = xi * (-xi * xi / 6.0).exp();
            assert!((f_mu(&spec, xi).unwrap() - want).abs() < 1e-12, "xi = {xi}");
        }
    }

    #[test]
    fn tail_slopes() {
        let half = f_mu_tail_exponent(&ProfileSpec::new(0.5).unwrap(), 50.0, 200.0).unwrap();
        assert!((half + 1.0).abs() < 0.05, "{half}");
        let two_thirds = f_mu_tail_exponent(&ProfileSpec::new(2.0 / 3.0).unwrap(), 50.0, 200.0).unwrap();
        assert!((two_thirds + 0.5).abs() < 0.05, "{two_thirds}");
        let third = f_mu_tail_exponent(&ProfileSpec::new(1.0 / 3.0).unwrap(), 5.0, 8.0).unwrap();
        assert!(third < -3.0, "{third}");
    }

    #[test]
    fn tail_fit_rejects_sign_changes() {
        let spec = ProfileSpec::new(0.2).unwrap();
        assert!(matches!(f_mu_tail_exponent(&spec, 2.0, 20.0), Err(Error::Domain(_))));
    }

    #[test]
    fn euler_oracle_examples() {
        assert!((euler_integral_oracle(1.0, 2.0, 0.0).unwrap() - 1.0).abs() < 1e-12);
        let e = euler_integral_oracle(1.5, 1.5 + 1e-9, 1.0).unwrap();
        assert!((e - std::f64::consts::E).abs() < 1e-6, "{e}");
        let (mu, xi) = (0.5, 2.0);
        let oracle = euler_integral_oracle(0.5 / mu, 1.5, -mu * xi * xi / 2.0).unwrap();
        assert!((oracle - k(0.5 / mu, 1.5, -mu * xi * xi / 2.0)).abs() < 1e-8);
        assert!(euler_integral_oracle(1.5, 1.5, 1.0).is_err());
        assert!(euler_integral_oracle(0.0, 1.5, 1.0).is_err());
    }

    #[test]
    fn attractor_values() {
        let p = AttractorParams::new(1.5, 1.0).unwrap();
        assert_eq!(attractor(&p, 0.0), 0.0);
        let (x_peak, peak) = p.peak();
        assert!((attractor(&p, x_peak) - peak).abs() < 1e-15);
        for dx in [-1e-3, 1e-3] {
            assert!(attractor(&p, x_peak + dx) < peak);
        }
        // ∫₀^∞ x·profile = M₁ and ∫₀^∞ profile = M₁/√(πa)
        let rule = gauss_legendre_64();
        let m1 = rule.integrate_panels(|x| x * attractor(&p, x), 0.0, 40.0, 8);
        let m0 = rule.integrate_panels(|x| attractor(&p, x), 0.0, 40.0, 8);
        assert!((m1 - 1.5).abs() < 1e-8);
        assert!((m0 - 1.5 / PI.sqrt()).abs() < 1e-8);
        assert!(AttractorParams::new(1.0, 0.0).is_err());
    }

    #[test]
    fn positivity_for_admissible_exponents() {
        for mu in [1.0 / 3.0, 0.34, 0.4, 0.5, 0.6, 2.0 / 3.0, 0.8, 0.9, 0.99] {
            let spec = ProfileSpec::new(mu).unwrap();
            for j in 1..=500 {
                let xi = j as f64 * 0.1;
                assert!(f_mu(&spec, xi).unwrap() > 0.0, "mu = {mu}, xi = {xi}");
            }
        }
    }

    /// First sign change of f_μ, by scanning then bisecting.
    fn first_root(mu: f64) -> f64 {
        let spec = ProfileSpec::new(mu).unwrap();
        let f = |x: f64| f_mu(&spec, x).unwrap();
        let mut lo = 0.5;
        while f(lo + 0.05) > 0.0 {
            lo += 0.05;
            assert!(lo < 100.0, "no root for mu = {mu}");
        }
        let mut hi = lo + 0.05;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn roots_below_one_third_approach_pi() {
        let roots: Vec<f64> = [0.3, 0.2, 0.1, 0.05, 0.02, 0.005].iter().map(|&m| first_root(m)).collect();
        assert!(roots.iter().all(|r| *r > PI));
        assert!(roots.windows(2).all(|w| w[1] < w[0]), "{roots:?}");
        assert!((roots[roots.len() - 1] - PI).abs() < 0.05, "{roots:?}");
        // μ = 1/5 terminates: f = ξ e^{-ξ²/10}(1 - ξ²/15)
        assert!((roots[1] - 15f64.sqrt()).abs() < 1e-9);
    }

    /// Independent route: the power series f = Σ b_k ξ^k with b_0 = 0,
    /// b_1 = 1 and b_{k+2} = (μ-1-μk)·b_k / ((k+1)(k+2)).
    fn recurrence_series(mu: f64, xi: f64) -> f64 {
        let mut b = 1.0;
        let mut power = xi;
        let mut sum = 0.0;
        let mut k = 1.0;
        loop {
            let term = b * power;
            sum += term;
            if k > 10.0 && term.abs() < 1e-18 * sum.abs().max(1e-300) {
                return sum;
            }
            b *= (mu - 1.0 - mu * k) / ((k + 1.0) * (k + 2.0));
            power *= xi * xi;
            k += 2.0;
        }
    }

    #[test]
    fn recurrence_cross_check() {
        for mu in [0.05, 0.2, 1.0 / 3.0, 0.45, 0.5, 0.75, 0.95] {
            let spec = ProfileSpec::new(mu).unwrap();
            for j in 0..=30 {
                let xi = j as f64 * 0.1;
                let got = f_mu(&spec, xi).unwrap();
                assert!((got - recurrence_series(mu, xi)).abs() < 1e-10, "mu = {mu}, xi = {xi}");
            }
        }
    }

    #[test]
    fn ode_residual() {
        for mu in [1.0 / 3.0, 0.5, 2.0 / 3.0] {
            let spec = ProfileSpec::new(mu).unwrap();
            let f = |x: f64| f_mu(&spec, x).unwrap();
            for j in 0..=49 {
                let xi = 0.1 + j as f64 * 0.1;
                let h = 1e-4 * xi.max(1.0);
                let (fm, f0, fp) = (f(xi - h), f(xi), f(xi + h));
                let d1 = (fp - fm) / (2.0 * h);
                let d2 = (fp - 2.0 * f0 + fm) / (h * h);
                let residual = d2 - (mu - 1.0) * f0 + mu * xi * d1;
                assert!(residual.abs() < 1e-6, "mu = {mu}, xi = {xi}: {residual}");
            }
        }
    }

    #[test]
    fn grid_evaluation_matches_pointwise() {
        let spec = ProfileSpec::new(0.6).unwrap();
        let xis: Vec<f64> = (0..100).map(|j| j as f64 * 0.3).collect();
        let seq = f_mu_grid(&spec, &xis, Execution::Sequential).unwrap();
        let par = f_mu_grid(&spec, &xis, Execution::Parallel).unwrap();
        assert_eq!(seq, par);
        assert!(f_mu_grid(&spec, &[-1.0], Execution::Sequential).is_err());
    }

    proptest! {
        #[test]
        fn kummer_transformation_identity(mu in (1.0f64 / 3.0)..0.9, xi in 0.0f64..10.0) {
            let x = 0.5 * mu * xi * xi;
            let direct = xi * k(0.5 / mu, 1.5, -x);
            let transformed = xi * (-x).exp() * k(1.5 - 0.5 / mu, 1.5, x);
            prop_assert!((direct - transformed).abs() < 1e-10 * (1.0 + direct.abs()));
        }

        #[test]
        fn euler_oracle_agrees_with_series(mu in 0.34f64..0.95, xi in 0.0f64..12.0) {
            let alpha = 0.5 / mu;
            let z = -0.5 * mu * xi * xi;
            let oracle = euler_integral_oracle(alpha, 1.5, z).unwrap();
            let series = k(alpha, 1.5, z);
            prop_assert!((oracle - series).abs() < 1e-8, "oracle {} series {}", oracle, series);
        }
    }
}
