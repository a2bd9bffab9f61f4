//! Network parameter set shared by the analytic and Monte Carlo engines.
//!
//! Densities are per square meter, powers linear milliwatts, SIR thresholds
//! linear, distances meters. Derived quantities (tier densities after
//! D2D-support thinning, cache hit probabilities) are computed on demand and
//! never stored, so they cannot drift out of sync with their inputs.

use crate::cache::ContentCatalog;
use thiserror::Error;

#[derive(Debug, Error)]
#[error("invalid network parameters: {0}")]
pub struct ParamError(pub String);

/// Delivery mode of the desired user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Served by a nearby device holding the content.
    D2d,
    /// Served by the nearest content-holding F-AP.
    NearestFap,
    /// Served by all content-holding F-APs inside the cluster radius.
    Coordination,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::D2d, Mode::NearestFap, Mode::Coordination];

    /// Stable lowercase label used in CSV output and config files.
    pub fn label(self) -> &'static str {
        match self {
            Mode::D2d => "d2d",
            Mode::NearestFap => "fap",
            Mode::Coordination => "coord",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    /// F-AP deployment density λ_f.
    pub fap_density: f64,
    /// Overall user density λ_u, before D2D-support thinning.
    pub user_density: f64,
    /// Probability p that a user is D2D-capable.
    pub d2d_support: f64,
    /// D2D transmit power P_d, linear mW.
    pub d2d_power_mw: f64,
    /// F-AP transmit power P_f, linear mW.
    pub fap_power_mw: f64,
    /// Path-loss exponent α_d on D2D links.
    pub d2d_pathloss: f64,
    /// Path-loss exponent α_f on F-AP links.
    pub fap_pathloss: f64,
    /// SIR threshold T_d for D2D delivery, linear.
    pub d2d_sir_threshold: f64,
    /// SIR threshold T_f for F-AP delivery, linear.
    pub fap_sir_threshold: f64,
    /// D2D discovery range L_d.
    pub d2d_range_m: f64,
    /// Coordination cluster radius L_c.
    pub cluster_radius_m: f64,
    /// Fixed D2D link distance ‖X_d‖ to the serving device.
    pub d2d_link_distance_m: f64,
    pub catalog: ContentCatalog,
}

impl Default for NetworkParams {
    /// Reference operating point: 3 dBm devices, 23 dBm F-APs, both tiers
    /// at path loss 4, unit thresholds, 16 m discovery range, 50 m cluster,
    /// 10 m D2D link, and the 1000-item catalog with 50/400 cache split.
    fn default() -> Self {
        Self {
            fap_density: 2e-4,
            user_density: 2e-3,
            d2d_support: 0.5,
            d2d_power_mw: 10f64.powf(0.3),
            fap_power_mw: 10f64.powf(2.3),
            d2d_pathloss: 4.0,
            fap_pathloss: 4.0,
            d2d_sir_threshold: 1.0,
            fap_sir_threshold: 1.0,
            d2d_range_m: 16.0,
            cluster_radius_m: 50.0,
            d2d_link_distance_m: 10.0,
            catalog: ContentCatalog::new(1000, 0.8, 1.0, 50, 400)
                .expect("reference catalog is valid"),
        }
    }
}

impl NetworkParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        let positive = [
            (self.fap_density, "F-AP density"),
            (self.user_density, "user density"),
            (self.d2d_power_mw, "D2D power"),
            (self.fap_power_mw, "F-AP power"),
            (self.d2d_sir_threshold, "D2D SIR threshold"),
            (self.fap_sir_threshold, "F-AP SIR threshold"),
            (self.d2d_range_m, "D2D range"),
            (self.cluster_radius_m, "cluster radius"),
            (self.d2d_link_distance_m, "D2D link distance"),
        ];
        for (v, name) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ParamError(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !(self.d2d_support > 0.0 && self.d2d_support <= 1.0) {
            return Err(ParamError(format!(
                "D2D support probability must lie in (0, 1], got {}",
                self.d2d_support
            )));
        }
        for (v, name) in [
            (self.d2d_pathloss, "D2D path-loss exponent"),
            (self.fap_pathloss, "F-AP path-loss exponent"),
        ] {
            if !(v > 2.0) || !v.is_finite() {
                return Err(ParamError(format!(
                    "{name} must be finite and exceed 2, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Density λ_du = p·λ_u of D2D-capable users.
    pub fn d2d_user_density(&self) -> f64 {
        self.d2d_support * self.user_density
    }

    /// Density λ_fu = (1-p)·λ_u of users served only by infrastructure.
    pub fn common_user_density(&self) -> f64 {
        (1.0 - self.d2d_support) * self.user_density
    }

    /// Probability p_c^D that a D2D cache holds the requested item.
    pub fn d2d_hit_probability(&self) -> f64 {
        self.catalog.d2d_hit_probability()
    }

    /// Probability p_c^F that an F-AP cache holds the requested item.
    pub fn fap_hit_probability(&self) -> f64 {
        self.catalog.fap_hit_probability()
    }

    /// Transmit-power ratio P_f/P_d.
    pub fn power_ratio(&self) -> f64 {
        self.fap_power_mw / self.d2d_power_mw
    }
}
