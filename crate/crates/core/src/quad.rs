//! Adaptive Simpson quadrature over finite and semi-infinite intervals.
//!
//! Semi-infinite integrals are summed over geometrically growing panels
//! [a, 2a+1], [2a+1, 4a+3], ... so the scheme needs no change of variable
//! and inherits the finite-interval error control panel by panel. The loop
//! stops once two consecutive panels each contribute less than
//! `tail_threshold` of the running total.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSettings {
    /// Absolute tolerance per integration call.
    pub abs_tol: f64,
    /// Relative tolerance against the first whole-interval estimate.
    pub rel_tol: f64,
    /// Total interval-split budget before giving up.
    pub max_subdivisions: u32,
    /// Tail cutoff for semi-infinite panels, relative to the accumulated value.
    pub tail_threshold: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 1e-7,
            max_subdivisions: 10_000,
            tail_threshold: 1e-10,
        }
    }
}

impl QuadratureSettings {
    fn validate(&self) -> Result<(), QuadError> {
        if !(self.abs_tol > 0.0) || !self.abs_tol.is_finite() {
            return Err(QuadError::BadSettings(
                "abs_tol must be positive and finite",
            ));
        }
        if !(self.rel_tol > 0.0) || !self.rel_tol.is_finite() {
            return Err(QuadError::BadSettings(
                "rel_tol must be positive and finite",
            ));
        }
        if self.max_subdivisions == 0 {
            return Err(QuadError::BadSettings(
                "max_subdivisions must be at least 1",
            ));
        }
        if !(self.tail_threshold > 0.0) || !self.tail_threshold.is_finite() {
            return Err(QuadError::BadSettings(
                "tail_threshold must be positive and finite",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    /// Sum of per-segment Richardson error bounds; an estimate, not a guarantee.
    pub error_estimate: f64,
}

#[derive(Debug, Error)]
pub enum QuadError {
    #[error(
        "quadrature did not converge within {subdivisions} subdivisions; \
         partial estimate {partial:.9e} (error estimate {error_estimate:.3e})"
    )]
    NonConvergent {
        partial: f64,
        error_estimate: f64,
        subdivisions: u32,
    },
    #[error("integrand returned a non-finite value at t = {at:.9e}")]
    NonFiniteIntegrand { at: f64 },
    #[error("invalid integration bounds [{a:.9e}, {b:.9e}]")]
    BadBounds { a: f64, b: f64 },
    #[error("invalid quadrature settings: {0}")]
    BadSettings(&'static str),
}

struct Segment {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn eval<F: Fn(f64) -> f64>(f: &F, t: f64) -> Result<f64, QuadError> {
    let v = f(t);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(QuadError::NonFiniteIntegrand { at: t })
    }
}

/// Integrates `f` over the finite interval [a, b].
///
/// Orientation is respected: reversed bounds negate the result. The error
/// estimate accumulates each accepted segment's Richardson bound.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    settings: &QuadratureSettings,
) -> Result<QuadratureResult, QuadError> {
    settings.validate()?;
    if !a.is_finite() || !b.is_finite() {
        return Err(QuadError::BadBounds { a, b });
    }
    if a == b {
        return Ok(QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
        });
    }
    if a > b {
        let flipped = integrate(f, b, a, settings)?;
        return Ok(QuadratureResult {
            value: -flipped.value,
            error_estimate: flipped.error_estimate,
        });
    }

    let m = 0.5 * (a + b);
    let fa = eval(&f, a)?;
    let fm = eval(&f, m)?;
    let fb = eval(&f, b)?;
    let whole = simpson(a, b, fa, fm, fb);
    let tol = settings.abs_tol.max(settings.rel_tol * whole.abs());

    let mut stack = vec![Segment {
        a,
        b,
        fa,
        fm,
        fb,
        whole,
        tol,
    }];
    let mut value = 0.0;
    let mut error = 0.0;
    let mut splits: u32 = 0;

    while let Some(seg) = stack.pop() {
        let m = 0.5 * (seg.a + seg.b);
        let lm = 0.5 * (seg.a + m);
        let rm = 0.5 * (m + seg.b);
        let flm = eval(&f, lm)?;
        let frm = eval(&f, rm)?;
        let left = simpson(seg.a, m, seg.fa, flm, seg.fm);
        let right = simpson(m, seg.b, seg.fm, frm, seg.fb);
        let refined = left + right;
        let diff = refined - seg.whole;
        // Width floor: below f64 resolution further splitting cannot help.
        let width_exhausted = (seg.b - seg.a) <= f64::EPSILON * (seg.a.abs() + seg.b.abs() + 1.0);
        if diff.abs() <= 15.0 * seg.tol || width_exhausted {
            value += refined + diff / 15.0;
            error += diff.abs() / 15.0;
            continue;
        }
        splits += 1;
        if splits > settings.max_subdivisions {
            let outstanding: f64 = stack.iter().map(|s| s.whole).sum();
            return Err(QuadError::NonConvergent {
                partial: value + refined + outstanding,
                error_estimate: error + diff.abs(),
                subdivisions: settings.max_subdivisions,
            });
        }
        let half_tol = 0.5 * seg.tol;
        stack.push(Segment {
            a: seg.a,
            b: m,
            fa: seg.fa,
            fm: flm,
            fb: seg.fm,
            whole: left,
            tol: half_tol,
        });
        stack.push(Segment {
            a: m,
            b: seg.b,
            fa: seg.fm,
            fm: frm,
            fb: seg.fb,
            whole: right,
            tol: half_tol,
        });
    }

    Ok(QuadratureResult {
        value,
        error_estimate: error,
    })
}

const MAX_PANELS: u32 = 256;

/// Integrates `f` over [a, ∞).
///
/// Panels follow the doubling scheme [a, 2a+1], [2a+1, 4a+3], ... for a >= 0;
/// a negative origin contributes a finite leg [a, 0] first so panel widths
/// stay positive. Returns a non-convergence error carrying the partial sum
/// when the tail has not settled within the panel budget.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    settings: &QuadratureSettings,
) -> Result<QuadratureResult, QuadError> {
    settings.validate()?;
    if !a.is_finite() {
        return Err(QuadError::BadBounds {
            a,
            b: f64::INFINITY,
        });
    }

    let mut value = 0.0;
    let mut error = 0.0;
    let mut lo = a;
    if a < 0.0 {
        let head = integrate(&f, a, 0.0, settings)?;
        value += head.value;
        error += head.error_estimate;
        lo = 0.0;
    }

    let mut hi = 2.0 * lo + 1.0;
    let mut quiet_panels = 0u32;
    for _ in 0..MAX_PANELS {
        let panel = integrate(&f, lo, hi, settings)?;
        value += panel.value;
        error += panel.error_estimate;
        let floor = settings.tail_threshold * value.abs().max(f64::MIN_POSITIVE);
        if panel.value.abs() <= floor {
            quiet_panels += 1;
            if quiet_panels >= 2 {
                return Ok(QuadratureResult {
                    value,
                    error_estimate: error,
                });
            }
        } else {
            quiet_panels = 0;
        }
        lo = hi;
        hi = 2.0 * hi + 1.0;
    }

    Err(QuadError::NonConvergent {
        partial: value,
        error_estimate: error,
        subdivisions: MAX_PANELS,
    })
}
