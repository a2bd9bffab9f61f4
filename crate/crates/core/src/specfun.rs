//! Special functions used by the closed-form rate and coverage expressions:
//! the exponential integral on the negative axis, the interference constant
//! C(α) = (2π/α)·csc(2π/α), and the SIR-threshold integral ρ(T, α).

use crate::quad::{integrate_semi_infinite, QuadError, QuadratureSettings};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpecFunError {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Argument magnitude where the power series hands over to the continued
/// fraction. The series loses accuracy to cancellation beyond this, while
/// the continued fraction converges slowly below it.
const SERIES_CUTOFF: f64 = 5.0;

/// Exponential integral Ei(x) for strictly negative arguments.
///
/// Ei(x) = -∫_{-x}^∞ e^{-t}/t dt. Power series for |x| <= 5, continued
/// fraction beyond. Nonnegative or non-finite arguments are rejected; the
/// closed-form rate expressions only ever need the negative axis.
pub fn exp_integral_ei(x: f64) -> Result<f64, SpecFunError> {
    if !(x < 0.0) || !x.is_finite() {
        return Err(SpecFunError::Domain {
            func: "exp_integral_ei",
            detail: format!("argument must be finite and negative, got {x}"),
        });
    }
    if -x <= SERIES_CUTOFF {
        Ok(ei_series(x))
    } else {
        Ok(-e1_continued_fraction(-x))
    }
}

/// Exponential integral E1(x) = -Ei(-x) for strictly positive arguments.
pub fn exp_integral_e1(x: f64) -> Result<f64, SpecFunError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(SpecFunError::Domain {
            func: "exp_integral_e1",
            detail: format!("argument must be finite and positive, got {x}"),
        });
    }
    exp_integral_ei(-x).map(|v| -v)
}

/// Ei(x) = γ + ln|x| + Σ_{k>=1} x^k / (k·k!), convergent everywhere but
/// only cancellation-safe for moderate |x|.
fn ei_series(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..=200u32 {
        term *= x / f64::from(k);
        let contribution = term / f64::from(k);
        sum += contribution;
        if contribution.abs() < f64::EPSILON * sum.abs().max(1e-300) {
            break;
        }
    }
    EULER_GAMMA + x.abs().ln() + sum
}

/// E1(z) for z > 0 via the Stieltjes continued fraction
/// E1(z) = e^{-z} / (z + 1 - 1²/(z + 3 - 2²/(z + 5 - ...))),
/// evaluated with the modified Lentz scheme.
fn e1_continued_fraction(z: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = z + 1.0;
    if f == 0.0 {
        f = TINY;
    }
    let mut c = f;
    let mut d = 0.0;
    for n in 1..=500u32 {
        let nn = f64::from(n);
        let a = -(nn * nn);
        let b = z + 2.0 * nn + 1.0;
        d = b + a * d;
        if d == 0.0 {
            d = TINY;
        }
        c = b + a / c;
        if c == 0.0 {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-z).exp() / f
}

/// Interference constant C(α) = (2π/α)·csc(2π/α) for path-loss exponents
/// α > 2. Diverges as α → 2⁺, where the aggregate interference has no mean.
pub fn interference_constant(alpha: f64) -> Result<f64, SpecFunError> {
    if !(alpha > 2.0) || !alpha.is_finite() {
        return Err(SpecFunError::Domain {
            func: "interference_constant",
            detail: format!("path-loss exponent must be finite and exceed 2, got {alpha}"),
        });
    }
    let x = 2.0 * std::f64::consts::PI / alpha;
    Ok(x / x.sin())
}

/// Threshold integral ρ(T, α) = ∫_{T^{-2/α}}^∞ T^{2/α} / (1 + v^{α/2}) dv
/// for T > 0, α > 2.
pub fn rho(t: f64, alpha: f64, settings: &QuadratureSettings) -> Result<f64, SpecFunError> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(SpecFunError::Domain {
            func: "rho",
            detail: format!("threshold must be finite and positive, got {t}"),
        });
    }
    if !(alpha > 2.0) || !alpha.is_finite() {
        return Err(SpecFunError::Domain {
            func: "rho",
            detail: format!("path-loss exponent must be finite and exceed 2, got {alpha}"),
        });
    }
    let scale = t.powf(2.0 / alpha);
    let lower = 1.0 / scale;
    let half_alpha = alpha / 2.0;
    let result = integrate_semi_infinite(|v| scale / (1.0 + v.powf(half_alpha)), lower, settings)?;
    Ok(result.value)
}

/// Closed form of ρ(T, 4): √T·arctan(√T), equivalently
/// √T·(π/2 − arctan(1/√T)). The arctan(√T) form stays cancellation-free
/// as T → 0.
pub fn rho_closed_alpha4(t: f64) -> Result<f64, SpecFunError> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(SpecFunError::Domain {
            func: "rho_closed_alpha4",
            detail: format!("threshold must be finite and positive, got {t}"),
        });
    }
    let s = t.sqrt();
    Ok(s * s.atan())
}
