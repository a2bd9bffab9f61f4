//! Closed-form and quadrature evaluation of mode probabilities, coverage
//! probabilities, and ergodic rates for the three delivery modes.
//!
//! Rates are in nats/s/Hz. The D2D and nearest-F-AP rate expressions carry
//! the high-SIR approximation ln(1+γ) ≈ ln γ; they are kept exactly in that
//! form, and the Monte Carlo engine computes the unapproximated quantity, so
//! comparisons between the two carry a modeling gap that shrinks as the
//! threshold grows.

use crate::params::{Mode, NetworkParams, ParamError};
use crate::quad::{integrate, integrate_semi_infinite, QuadError, QuadratureSettings};
use crate::specfun::{
    exp_integral_e1, interference_constant, rho, rho_closed_alpha4, SpecFunError,
};
use std::cell::Cell;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalyticError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// Analytic summary of one delivery mode. Coverage is absent for the
/// coordination mode, which has no SIR threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeMetrics {
    pub mode_probability: f64,
    pub coverage: Option<f64>,
    pub rate: f64,
}

/// Probability that the desired user is served in D2D mode:
/// p·(1 − exp(−π·λ_du·p_c^D·L_d²)), i.e. D2D-capable and at least one
/// content-holding device inside the discovery range.
pub fn d2d_mode_probability(params: &NetworkParams) -> Result<f64, AnalyticError> {
    params.validate()?;
    let nu = PI
        * params.d2d_user_density()
        * params.d2d_hit_probability()
        * params.d2d_range_m
        * params.d2d_range_m;
    Ok(params.d2d_support * (-(-nu).exp_m1()))
}

/// Exponent scale of the D2D coverage law: coverage(T) = exp(−x·T^{2/α_f})
/// with x = π·‖X_d‖^{2α_d/α_f}·(λ_du + (P_f/P_d)^{2/α_f}·λ_f)·C(α_f).
/// The mixed exponent couples the two path-loss regimes; it is kept exactly
/// as the closed form states it (at α_d = α_f the distinction disappears).
fn d2d_coverage_scale(params: &NetworkParams) -> Result<f64, AnalyticError> {
    let alpha_f = params.fap_pathloss;
    let beta =
        params.d2d_user_density() + params.power_ratio().powf(2.0 / alpha_f) * params.fap_density;
    let distance_term = params
        .d2d_link_distance_m
        .powf(2.0 * params.d2d_pathloss / alpha_f);
    Ok(PI * distance_term * beta * interference_constant(alpha_f)?)
}

fn d2d_coverage_at(params: &NetworkParams, t_d: f64) -> Result<f64, AnalyticError> {
    let x = d2d_coverage_scale(params)?;
    Ok((-x * t_d.powf(2.0 / params.fap_pathloss)).exp())
}

/// Probability that the fixed-distance D2D link clears the SIR threshold
/// under Rayleigh fading, with both device and F-AP tiers interfering.
pub fn d2d_coverage(params: &NetworkParams) -> Result<f64, AnalyticError> {
    params.validate()?;
    d2d_coverage_at(params, params.d2d_sir_threshold)
}

/// Ergodic D2D rate under the mode's conditions:
/// p_D·[ln(T_d)·P_D + (α_f/2)·E1(x·T_d^{2/α_f})] with x the coverage scale.
///
/// Carries the high-SIR approximation; thresholds below 1 (0 dB) are
/// outside the regime the approximation was derived for, and the quantity
/// increasingly overstates the exact ergodic rate there.
pub fn d2d_rate(params: &NetworkParams) -> Result<f64, AnalyticError> {
    params.validate()?;
    let p_d = d2d_mode_probability(params)?;
    let t_d = params.d2d_sir_threshold;
    let alpha_f = params.fap_pathloss;
    let x = d2d_coverage_scale(params)?;
    let arg = x * t_d.powf(2.0 / alpha_f);
    let coverage = (-arg).exp();
    let tail = alpha_f / 2.0 * exp_integral_e1(arg)?;
    Ok(p_d * (t_d.ln() * coverage + tail))
}

/// Probability of falling through to infrastructure: 1 − p_D·P_D.
pub fn fap_mode_probability(params: &NetworkParams) -> Result<f64, AnalyticError> {
    params.validate()?;
    Ok(1.0 - d2d_mode_probability(params)? * d2d_coverage(params)?)
}

/// Density of the distance from the origin to the nearest content-holding
/// F-AP: 2π·λ_f·p_c^F·r·exp(−π·λ_f·p_c^F·r²).
pub fn nearest_fap_distance_pdf(r: f64, params: &NetworkParams) -> Result<f64, AnalyticError> {
    params.validate()?;
    if !(r >= 0.0) {
        return Err(AnalyticError::Param(ParamError(format!(
            "distance must be nonnegative, got {r}"
        ))));
    }
    let lam = params.fap_density * params.fap_hit_probability();
    Ok(2.0 * PI * lam * r * (-PI * lam * r * r).exp())
}

/// ρ(T, α) via the closed form when α = 4, quadrature otherwise. Both
/// paths evaluate the same integral; the closed form is exact where it
/// applies and orders of magnitude cheaper under the rate integrands.
fn rho_auto(t: f64, alpha: f64, q: &QuadratureSettings) -> Result<f64, SpecFunError> {
    if (alpha - 4.0).abs() < 1e-12 {
        rho_closed_alpha4(t)
    } else {
        rho(t, alpha, q)
    }
}

fn fap_coverage_at(
    params: &NetworkParams,
    t_f: f64,
    q: &QuadratureSettings,
) -> Result<f64, AnalyticError> {
    let alpha_f = params.fap_pathloss;
    let cached_density = params.fap_hit_probability() * params.fap_density;
    let device_term = params.d2d_user_density() / cached_density
        * interference_constant(alpha_f)?
        * (params.d2d_power_mw * t_f / params.fap_power_mw).powf(2.0 / alpha_f);
    Ok(1.0 / (1.0 + rho_auto(t_f, alpha_f, q)? + device_term))
}

/// Coverage probability of the nearest content-holding F-AP link, with the
/// remaining cached F-APs and all D2D transmitters interfering.
pub fn fap_coverage(params: &NetworkParams) -> Result<f64, AnalyticError> {
    params.validate()?;
    fap_coverage_at(
        params,
        params.fap_sir_threshold,
        &QuadratureSettings::default(),
    )
}

/// Ergodic rate of nearest-F-AP delivery:
/// p_F·[ln(T_f)·P_F(T_f) + ∫_{ln T_f}^∞ P_F(e^θ) dθ].
pub fn fap_rate(params: &NetworkParams, q: &QuadratureSettings) -> Result<f64, AnalyticError> {
    params.validate()?;
    let p_f = fap_mode_probability(params)?;
    let captured: Cell<Option<AnalyticError>> = Cell::new(None);
    let coverage = |t: f64| match fap_coverage_at(params, t, q) {
        Ok(v) => v,
        Err(e) => {
            captured.set(Some(e));
            f64::NAN
        }
    };
    let restricted_mean = conditional_rate_from_coverage(coverage, params.fap_sir_threshold, q);
    if let Some(e) = captured.take() {
        return Err(e);
    }
    Ok(p_f * restricted_mean?)
}

/// Closed form of the nearest-F-AP rate for α_f = 4 and T_f > 1:
/// 2·p_F·(2 + ln T_f) / (π·√T_f·(1 + (λ_du/(p_c^F·λ_f))·√(P_d/P_f))).
/// Carries an arctan(A) ≈ A approximation on top of the rate integral.
pub fn fap_rate_closed(params: &NetworkParams) -> Result<f64, AnalyticError> {
    params.validate()?;
    if (params.fap_pathloss - 4.0).abs() > 1e-9 {
        return Err(AnalyticError::Param(ParamError(format!(
            "closed-form F-AP rate requires path-loss exponent 4, got {}",
            params.fap_pathloss
        ))));
    }
    let t_f = params.fap_sir_threshold;
    if !(t_f > 1.0) {
        return Err(AnalyticError::Param(ParamError(format!(
            "closed-form F-AP rate requires a threshold above 1 (0 dB), got {t_f}"
        ))));
    }
    let p_f = fap_mode_probability(params)?;
    let device_ratio = params.d2d_user_density()
        / (params.fap_hit_probability() * params.fap_density)
        * (params.d2d_power_mw / params.fap_power_mw).sqrt();
    Ok(2.0 * p_f * (2.0 + t_f.ln()) / (PI * t_f.sqrt() * (1.0 + device_ratio)))
}

/// Probability of coordinated delivery: p_F·(1 − P_F).
pub fn coord_mode_probability(params: &NetworkParams) -> Result<f64, AnalyticError> {
    params.validate()?;
    Ok(fap_mode_probability(params)? * (1.0 - fap_coverage(params)?))
}

/// Ergodic rate of coordinated delivery from all content-holding F-APs
/// within the cluster radius, with cached F-APs beyond the cluster and all
/// D2D transmitters interfering.
///
/// The outer integral is evaluated after the substitution s = w^{α_f/2},
/// which removes the endpoint singularity, and the difference of Laplace
/// transforms is computed as e^{-B}·expm1(B−A). B−A reduces to the
/// in-cluster exponent 2π·p_c^F·λ_f·∫_0^{L_c} sP_f v/(v^{α_f}+sP_f) dv,
/// a finite integral, so no large-argument cancellation ever occurs.
/// Rescaling that integral by v = (sP_f)^{1/α_f}·z gives the fixed shape
/// z/(1+z^{α_f}), whose sharp feature near the origin a quadrature on the
/// raw [0, L_c] axis would miss at small s; at α_f = 4 the rescaled form
/// has the exact antiderivative atan(z²)/2 and no inner quadrature runs.
pub fn coord_rate(params: &NetworkParams, q: &QuadratureSettings) -> Result<f64, AnalyticError> {
    params.validate()?;
    let p_c = coord_mode_probability(params)?;
    let alpha = params.fap_pathloss;
    let half_alpha = alpha / 2.0;
    let c_alpha = interference_constant(alpha)?;
    let cached_density = params.fap_hit_probability() * params.fap_density;
    let p_f_tx = params.fap_power_mw;
    // Decay rates of the two Laplace exponents in the substituted variable.
    let device_scale =
        PI * params.d2d_user_density() * c_alpha * params.d2d_power_mw.powf(2.0 / alpha);
    let fap_scale = PI * cached_density * c_alpha * p_f_tx.powf(2.0 / alpha);
    let l_c = params.cluster_radius_m;
    let alpha_is_4 = (alpha - 4.0).abs() < 1e-12;
    let tiny_w = 1e-12 / fap_scale;

    let captured: Cell<Option<QuadError>> = Cell::new(None);
    // ∫_0^Z z/(1+z^α) dz; full-line value is C(α)/2, reached as Z → ∞.
    let shape_integral = |z_max: f64| -> Result<f64, QuadError> {
        if alpha_is_4 {
            return Ok(0.5 * (z_max * z_max).atan());
        }
        if z_max <= 10.0 {
            Ok(integrate(|z| z / (1.0 + z.powf(alpha)), 0.0, z_max, q)?.value)
        } else {
            let tail = integrate_semi_infinite(|z| z / (1.0 + z.powf(alpha)), z_max, q)?;
            Ok(c_alpha / 2.0 - tail.value)
        }
    };
    let integrand = |w: f64| -> f64 {
        if w <= tiny_w {
            // Limit value: the bracket behaves like B(w) = fap_scale·w.
            return half_alpha * fap_scale;
        }
        // (sP_f)^{1/α} = P_f^{1/α}·√w under the substitution s = w^{α/2}.
        let z_max = l_c / (p_f_tx.powf(1.0 / alpha) * w.sqrt());
        let shape = match shape_integral(z_max) {
            Ok(v) => v,
            Err(e) => {
                captured.set(Some(e));
                return f64::NAN;
            }
        };
        let bracket_exponent = 2.0 * PI * cached_density * p_f_tx.powf(2.0 / alpha) * w * shape;
        half_alpha / w * (-(device_scale + fap_scale) * w).exp() * bracket_exponent.exp_m1()
    };
    let outer = integrate_semi_infinite(integrand, 0.0, q);
    if let Some(e) = captured.take() {
        return Err(e.into());
    }
    Ok(p_c * outer?.value)
}

/// Restricted-mean rate scaffold: given a coverage law t ↦ Pr(SIR ≥ t) and
/// a threshold T, returns ln(T)·coverage(T) + ∫_{ln T}^∞ coverage(e^θ) dθ,
/// the expectation of ln(SIR) over the event SIR ≥ T (unnormalized).
pub fn conditional_rate_from_coverage(
    coverage: impl Fn(f64) -> f64,
    t: f64,
    q: &QuadratureSettings,
) -> Result<f64, AnalyticError> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(AnalyticError::Param(ParamError(format!(
            "threshold must be positive and finite, got {t}"
        ))));
    }
    let ln_t = t.ln();
    let tail = integrate_semi_infinite(|theta| coverage(theta.exp()), ln_t, q)?;
    Ok(ln_t * coverage(t) + tail.value)
}

/// Analytic metrics of one mode at the given operating point.
pub fn mode_metrics(
    mode: Mode,
    params: &NetworkParams,
    q: &QuadratureSettings,
) -> Result<ModeMetrics, AnalyticError> {
    Ok(match mode {
        Mode::D2d => ModeMetrics {
            mode_probability: d2d_mode_probability(params)?,
            coverage: Some(d2d_coverage(params)?),
            rate: d2d_rate(params)?,
        },
        Mode::NearestFap => ModeMetrics {
            mode_probability: fap_mode_probability(params)?,
            coverage: Some(fap_coverage(params)?),
            rate: fap_rate(params, q)?,
        },
        Mode::Coordination => ModeMetrics {
            mode_probability: coord_mode_probability(params)?,
            coverage: None,
            rate: coord_rate(params, q)?,
        },
    })
}
