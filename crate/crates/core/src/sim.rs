//! Event-level Monte Carlo: network realizations, per-realization SIRs for
//! the three delivery modes, the access-mode selection cascade, and
//! estimators for coverage, rate, and mode shares that serve as independent
//! oracles for the closed forms.
//!
//! Two evaluation paths share one sampling law. `realize_network` and the
//! `sir_*` operations materialize Cartesian point sets and are the faithful,
//! inspectable implementation of the model. The `estimate_*` family runs a
//! streaming kernel that samples only what the mode SIRs depend on (radii,
//! fading, cache marks), because on this model every SIR is a function of
//! node distances alone; a consistency test holds the two paths together.
//!
//! Estimator semantics mirror the analytic factorization: the D2D mode
//! probability factor is the empirical frequency of (support AND a cached
//! device in range), the coverage factor is the empirical frequency of the
//! fixed-link SIR gate, and composite quantities multiply those sample
//! means rather than counting joint per-trial events. The analytic
//! expressions multiply the corresponding probabilities as independent
//! factors, so the oracle must factor the same way; a nearby cached device
//! is also an interferer, which makes the joint event measurably rarer than
//! the product (about 0.57x at reference densities).

use crate::cache::{CacheError, ZipfCdf};
use crate::geometry::{sample_ppp_disc, thin_field, PointField};
use crate::params::{Mode, NetworkParams, ParamError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, Poisson};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;
use thiserror::Error;

/// Default simulation window radius in meters. Large enough that doubling
/// it moves coverage estimates by less than a confidence half-width at the
/// reference densities.
pub const DEFAULT_WINDOW_RADIUS_M: f64 = 2000.0;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error("degenerate geometry: an interferer sits at exactly zero distance")]
    DegenerateGeometry,
    #[error("node index {index} out of range for the {field} field")]
    UnknownNode { field: &'static str, index: usize },
    #[error("coverage is undefined for {mode}: the mode has no SIR threshold")]
    CoverageUndefined { mode: Mode },
    #[error(
        "no threshold-passing samples among {trials} trials for {mode}; \
         the rate estimate is undefined at this operating point"
    )]
    NoPassingSamples { mode: Mode, trials: u64 },
    #[error("estimators need at least 100 trials, got {0}")]
    TooFewTrials(u64),
    #[error("window radius must be positive and finite, got {0}")]
    BadWindow(f64),
}

/// How content placement is realized across nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// Independent per-node caching: each node holds the requested content
    /// with its tier's hit probability, thinning the field.
    Thinning,
    /// Every node of a tier caches the same most-popular items; the request
    /// either hits at all of them or at none.
    Identical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub window_radius_m: f64,
    pub placement: Placement,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            window_radius_m: DEFAULT_WINDOW_RADIUS_M,
            placement: Placement::Thinning,
        }
    }
}

impl SimOptions {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.window_radius_m > 0.0) || !self.window_radius_m.is_finite() {
            return Err(SimError::BadWindow(self.window_radius_m));
        }
        Ok(())
    }
}

/// Node tier, for tier-dependent content popularity lookups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tier {
    Device,
    Fap,
}

/// Identifier of a transmitter-to-user channel within one realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkId {
    /// The dedicated D2D transmitter at the fixed link distance.
    DesiredD2d,
    Fap(usize),
    D2dUser(usize),
}

const SALT_SUPPORT: u64 = 0x5EED_0001;
const SALT_RANK: u64 = 0x5EED_0002;
const SALT_FADE_DESIRED: u64 = 0x5EED_0003;
const SALT_FADE_FAP: u64 = 0x5EED_0004;
const SALT_FADE_DU: u64 = 0x5EED_0005;
const SALT_CACHE_FAP: u64 = 0x5EED_0006;
const SALT_CACHE_DU: u64 = 0x5EED_0007;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Avalanche hash of (seed, salt, index); the basis of the lazily evaluated
/// i.i.d. mark map, so that marks never need storing.
fn mark_bits(seed: u64, salt: u64, index: u64) -> u64 {
    let mut state = seed ^ salt.wrapping_mul(0xD1B5_4A32_D192_ED03);
    let _ = splitmix64(&mut state);
    state = state.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    splitmix64(&mut state)
}

fn unit_uniform(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn exp_mark(bits: u64) -> f64 {
    -(1.0 - unit_uniform(bits)).ln()
}

/// Independent stream seed for one trial of one master seed.
fn trial_seed(master: u64, index: u64) -> u64 {
    let mut state = master.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    splitmix64(&mut state)
}

/// Independent sub-stream seed for one sampling block within a trial.
fn block_seed(trial: u64, salt: u64) -> u64 {
    let mut state = trial ^ salt.wrapping_mul(0xD1B5_4A32_D192_ED03);
    splitmix64(&mut state)
}

const BLOCK_SCALARS: u64 = 1;
const BLOCK_FAP_INNER: u64 = 2;
const BLOCK_FAP_OUTER: u64 = 3;
const BLOCK_DEV_INNER: u64 = 4;
const BLOCK_DEV_OUTER: u64 = 5;

/// Windows wider than this sample their nodes in two independent annular
/// blocks split here, each on its own sub-stream. By superposition the law
/// is unchanged, and a run at a wider window replays a narrower run's
/// inner-disc draws bit-exactly under the same master seed, so
/// window-extension studies measure pure truncation bias with the
/// statistical noise common to both runs cancelled.
const STRATIFY_BOUNDARY_M: f64 = DEFAULT_WINDOW_RADIUS_M;

/// Path gain at squared distance `dist_sq` under exponent `alpha`, with the
/// exponent-4 case kept free of `powf`.
fn path_gain(dist_sq: f64, alpha: f64) -> f64 {
    if alpha == 4.0 {
        1.0 / (dist_sq * dist_sq)
    } else {
        dist_sq.powf(-0.5 * alpha)
    }
}

fn dist_sq(point: [f64; 2]) -> f64 {
    point[0] * point[0] + point[1] * point[1]
}

/// One sampled network state: the three point fields plus everything the
/// SIR operations consume. Fading and cache marks are a pure function of
/// (seed, link), which is what makes every SIR evaluation reproducible from
/// the seed alone without storing a mark per node.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    fap_field: PointField,
    d2d_user_field: PointField,
    common_user_field: PointField,
    placement: Placement,
    seed: u64,
    supports_d2d: bool,
    d2d_rank: usize,
    fap_rank: usize,
    d2d_hit: f64,
    fap_hit: f64,
    d2d_cache_size: usize,
    fap_cache_size: usize,
}

impl Realization {
    /// Assembles a realization from explicit point fields; the route for
    /// crafted scenarios in tests. `realize_network` is the sampled route.
    pub fn from_parts(
        fap_field: PointField,
        d2d_user_field: PointField,
        common_user_field: PointField,
        placement: Placement,
        params: &NetworkParams,
        seed: u64,
    ) -> Result<Self, SimError> {
        params.validate()?;
        let rank_uniform = unit_uniform(mark_bits(seed, SALT_RANK, 0));
        let d2d_rank = params.catalog.d2d_cdf()?.rank_for(rank_uniform);
        let fap_rank = params.catalog.fap_cdf()?.rank_for(rank_uniform);
        Ok(Self {
            fap_field,
            d2d_user_field,
            common_user_field,
            placement,
            seed,
            supports_d2d: unit_uniform(mark_bits(seed, SALT_SUPPORT, 0)) < params.d2d_support,
            d2d_rank,
            fap_rank,
            d2d_hit: params.d2d_hit_probability(),
            fap_hit: params.fap_hit_probability(),
            d2d_cache_size: params.catalog.d2d_cache_size(),
            fap_cache_size: params.catalog.fap_cache_size(),
        })
    }

    pub fn fap_field(&self) -> &PointField {
        &self.fap_field
    }

    pub fn d2d_user_field(&self) -> &PointField {
        &self.d2d_user_field
    }

    pub fn common_user_field(&self) -> &PointField {
        &self.common_user_field
    }

    pub fn placement(&self) -> Placement {
        self.placement
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Whether the desired user at the origin is D2D-capable this trial.
    pub fn supports_d2d(&self) -> bool {
        self.supports_d2d
    }

    /// Rank of the requested content under the named tier's popularity law.
    /// Both tiers share one underlying popularity draw, mapped through each
    /// tier's distribution, so the request is consistent across tiers.
    pub fn requested_rank(&self, tier: Tier) -> usize {
        match tier {
            Tier::Device => self.d2d_rank,
            Tier::Fap => self.fap_rank,
        }
    }

    /// Unit-mean exponential fading mark of the link from `link` to the
    /// desired user; lazily derived, identical on every call.
    pub fn fading_mark(&self, link: LinkId) -> f64 {
        match link {
            LinkId::DesiredD2d => exp_mark(mark_bits(self.seed, SALT_FADE_DESIRED, 0)),
            LinkId::Fap(i) => exp_mark(mark_bits(self.seed, SALT_FADE_FAP, i as u64)),
            LinkId::D2dUser(i) => exp_mark(mark_bits(self.seed, SALT_FADE_DU, i as u64)),
        }
    }

    pub fn is_fap_cached(&self, index: usize) -> bool {
        match self.placement {
            Placement::Thinning => {
                unit_uniform(mark_bits(self.seed, SALT_CACHE_FAP, index as u64)) < self.fap_hit
            }
            Placement::Identical => self.fap_rank <= self.fap_cache_size,
        }
    }

    pub fn is_d2d_user_cached(&self, index: usize) -> bool {
        match self.placement {
            Placement::Thinning => {
                unit_uniform(mark_bits(self.seed, SALT_CACHE_DU, index as u64)) < self.d2d_hit
            }
            Placement::Identical => self.d2d_rank <= self.d2d_cache_size,
        }
    }

    /// Index of the nearest content-holding F-AP, if any; ties break to the
    /// lowest index like the geometry queries.
    pub fn nearest_cached_fap(&self) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        for (i, &pt) in self.fap_field.points().iter().enumerate() {
            if !self.is_fap_cached(i) {
                continue;
            }
            let d2 = dist_sq(pt);
            if best.is_none_or(|(b, _)| d2 < b) {
                best = Some((d2, i));
            }
        }
        best.map(|(_, i)| i)
    }

    /// Indices of content-holding F-APs within the cluster radius,
    /// ascending by index.
    pub fn cluster_members(&self, cluster_radius_m: f64) -> Vec<usize> {
        let r2 = cluster_radius_m * cluster_radius_m;
        self.fap_field
            .points()
            .iter()
            .enumerate()
            .filter(|(i, &pt)| self.is_fap_cached(*i) && dist_sq(pt) <= r2)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Samples one network state: F-APs at λ_f, users at λ_u thinned into D2D
/// and common tiers with probability p, all on the disc of the options'
/// window radius. Identical seeds produce bit-identical realizations.
pub fn realize_network(
    params: &NetworkParams,
    opts: &SimOptions,
    seed: u64,
) -> Result<Realization, SimError> {
    params.validate()?;
    opts.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fap_field = sample_ppp_disc(params.fap_density, opts.window_radius_m, &mut rng);
    let users = sample_ppp_disc(params.user_density, opts.window_radius_m, &mut rng);
    let (d2d_user_field, common_user_field) = thin_field(&users, params.d2d_support, &mut rng);
    Realization::from_parts(
        fap_field,
        d2d_user_field,
        common_user_field,
        opts.placement,
        params,
        seed,
    )
}

/// Serving side of a D2D link: the analytic model's transmitter at a fixed,
/// known distance, or an actual node of the D2D field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum D2dServing {
    FixedDistance(f64),
    Node(usize),
}

/// Sums interference onto the origin user: D2D users at their tier's
/// exponent (unit P_d) and F-APs at theirs (unit P_f), with optional
/// identifier-based exclusions. `fap_cached_only` selects whether the F-AP
/// sum runs over content-holding nodes only (infrastructure modes) or the
/// whole tier (D2D mode).
struct InterferenceSums {
    device: f64,
    fap: f64,
}

fn interference(
    real: &Realization,
    params: &NetworkParams,
    excluded_device: Option<usize>,
    excluded_faps: &[usize],
    fap_cached_only: bool,
) -> Result<InterferenceSums, SimError> {
    let mut device = 0.0;
    for (i, &pt) in real.d2d_user_field.points().iter().enumerate() {
        if excluded_device == Some(i) {
            continue;
        }
        let d2 = dist_sq(pt);
        if d2 == 0.0 {
            return Err(SimError::DegenerateGeometry);
        }
        device += real.fading_mark(LinkId::D2dUser(i)) * path_gain(d2, params.d2d_pathloss);
    }
    let mut fap = 0.0;
    for (j, &pt) in real.fap_field.points().iter().enumerate() {
        if excluded_faps.contains(&j) {
            continue;
        }
        if fap_cached_only && !real.is_fap_cached(j) {
            continue;
        }
        let d2 = dist_sq(pt);
        if d2 == 0.0 {
            return Err(SimError::DegenerateGeometry);
        }
        fap += real.fading_mark(LinkId::Fap(j)) * path_gain(d2, params.fap_pathloss);
    }
    Ok(InterferenceSums { device, fap })
}

/// SIR of a D2D link, with every other D2D user and the entire F-AP tier
/// interfering. Powers enter only through the ratio P_f/P_d, so the value
/// is invariant under common power scaling by construction. An empty
/// interference field yields the infinite-SIR sentinel, which coverage
/// logic treats as covered.
pub fn sir_d2d(
    real: &Realization,
    serving: D2dServing,
    params: &NetworkParams,
) -> Result<f64, SimError> {
    params.validate()?;
    let (serve_d2, serve_fade, excluded) = match serving {
        D2dServing::FixedDistance(d) => {
            if !(d > 0.0) || !d.is_finite() {
                return Err(SimError::Param(ParamError(format!(
                    "fixed serving distance must be positive and finite, got {d}"
                ))));
            }
            (d * d, real.fading_mark(LinkId::DesiredD2d), None)
        }
        D2dServing::Node(i) => {
            let pt = *real
                .d2d_user_field
                .points()
                .get(i)
                .ok_or(SimError::UnknownNode {
                    field: "d2d-user",
                    index: i,
                })?;
            (dist_sq(pt), real.fading_mark(LinkId::D2dUser(i)), Some(i))
        }
    };
    let sums = interference(real, params, excluded, &[], false)?;
    let denom = sums.device + params.power_ratio() * sums.fap;
    let signal = serve_fade * path_gain(serve_d2, params.d2d_pathloss);
    Ok(if denom == 0.0 {
        f64::INFINITY
    } else {
        signal / denom
    })
}

/// SIR of the link from one serving F-AP, with the other content-holding
/// F-APs and all D2D users interfering.
pub fn sir_fap(
    real: &Realization,
    serving_fap: usize,
    params: &NetworkParams,
) -> Result<f64, SimError> {
    params.validate()?;
    let pt = *real
        .fap_field
        .points()
        .get(serving_fap)
        .ok_or(SimError::UnknownNode {
            field: "fap",
            index: serving_fap,
        })?;
    let sums = interference(real, params, None, &[serving_fap], true)?;
    let denom = sums.fap + sums.device / params.power_ratio();
    let signal =
        real.fading_mark(LinkId::Fap(serving_fap)) * path_gain(dist_sq(pt), params.fap_pathloss);
    Ok(if denom == 0.0 {
        f64::INFINITY
    } else {
        signal / denom
    })
}

/// SIR of coordinated delivery from the given cluster members, with the
/// content-holding F-APs outside the cluster and all D2D users interfering.
/// An empty cluster returns None: no service, not an error.
pub fn sir_cluster(
    real: &Realization,
    members: &[usize],
    params: &NetworkParams,
) -> Result<Option<f64>, SimError> {
    params.validate()?;
    if members.is_empty() {
        return Ok(None);
    }
    let mut signal = 0.0;
    for &m in members {
        let pt = *real
            .fap_field
            .points()
            .get(m)
            .ok_or(SimError::UnknownNode {
                field: "fap",
                index: m,
            })?;
        signal += real.fading_mark(LinkId::Fap(m)) * path_gain(dist_sq(pt), params.fap_pathloss);
    }
    let sums = interference(real, params, None, members, true)?;
    let denom = sums.fap + sums.device / params.power_ratio();
    Ok(Some(if denom == 0.0 {
        f64::INFINITY
    } else {
        signal / denom
    }))
}

/// Outcome of the access-mode selection cascade for one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeDecision {
    pub mode: Mode,
    pub serving_nodes: Vec<usize>,
    /// Absent only for a coordination decision with an empty cluster,
    /// recorded as an outage sample.
    pub achieved_sir: Option<f64>,
}

/// The three-step access cascade: the nearest content-holding D2D user
/// within the discovery range that clears the D2D threshold; otherwise the
/// nearest content-holding F-AP if it clears its threshold; otherwise
/// coordination by every content-holding F-AP in the cluster,
/// unconditionally (an empty cluster is an outage, not an error).
pub fn select_mode(real: &Realization, params: &NetworkParams) -> Result<ModeDecision, SimError> {
    params.validate()?;
    if real.supports_d2d {
        let range_sq = params.d2d_range_m * params.d2d_range_m;
        let mut candidates: Vec<(f64, usize)> = real
            .d2d_user_field
            .points()
            .iter()
            .enumerate()
            .filter(|(i, &pt)| real.is_d2d_user_cached(*i) && dist_sq(pt) <= range_sq)
            .map(|(i, &pt)| (dist_sq(pt), i))
            .collect();
        candidates.sort_by(|a, b| a.partial_cmp(b).expect("distances are finite"));
        for (_, i) in candidates {
            let gamma = sir_d2d(real, D2dServing::Node(i), params)?;
            if gamma >= params.d2d_sir_threshold {
                return Ok(ModeDecision {
                    mode: Mode::D2d,
                    serving_nodes: vec![i],
                    achieved_sir: Some(gamma),
                });
            }
        }
    }
    if let Some(nearest) = real.nearest_cached_fap() {
        let gamma = sir_fap(real, nearest, params)?;
        if gamma >= params.fap_sir_threshold {
            return Ok(ModeDecision {
                mode: Mode::NearestFap,
                serving_nodes: vec![nearest],
                achieved_sir: Some(gamma),
            });
        }
    }
    let members = real.cluster_members(params.cluster_radius_m);
    let achieved_sir = sir_cluster(real, &members, params)?;
    Ok(ModeDecision {
        mode: Mode::Coordination,
        serving_nodes: members,
        achieved_sir,
    })
}

/// A Monte Carlo point estimate with its 95% confidence half-width,
/// 1.96·std/√trials. For composite estimators built from products of
/// sample means, std is the delta-method standard deviation of the
/// composite, which reduces to the ordinary sample deviation for plain
/// means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricEstimate {
    pub mean: f64,
    pub trials: u64,
    pub half_width_95: f64,
}

/// Everything one trial contributes to the estimators. Interference sums
/// are power-normalized per tier (devices in units of P_d, F-APs in units
/// of P_f); the cross-tier power ratio re-enters at SIR assembly.
#[derive(Debug, Clone, Copy, Default)]
struct TrialRecord {
    support: bool,
    avail: bool,
    /// Serving fade of the fixed-distance D2D link.
    h_d: f64,
    /// Device interference plus (P_f/P_d)-weighted full-tier F-AP
    /// interference: the D2D SIR denominator for any link distance.
    d2d_denom: f64,
    has_fap: bool,
    /// Serving term g·l^{−α_f} of the nearest content-holding F-AP.
    fap_num: f64,
    /// Remaining cached-tier interference plus (P_d/P_f)-weighted devices.
    fap_denom: f64,
    /// Summed in-cluster serving terms.
    cluster_num: f64,
    cluster_denom: f64,
}

impl TrialRecord {
    fn gamma_d2d(&self, link_gain: f64) -> f64 {
        let signal = self.h_d * link_gain;
        if self.d2d_denom == 0.0 {
            f64::INFINITY
        } else {
            signal / self.d2d_denom
        }
    }

    fn gamma_fap(&self) -> f64 {
        if !self.has_fap {
            return 0.0;
        }
        if self.fap_denom == 0.0 {
            f64::INFINITY
        } else {
            self.fap_num / self.fap_denom
        }
    }

    fn gamma_cluster(&self) -> f64 {
        if self.cluster_num == 0.0 {
            0.0
        } else if self.cluster_denom == 0.0 {
            f64::INFINITY
        } else {
            self.cluster_num / self.cluster_denom
        }
    }
}

/// One annular sampling block: node count law and squared-radius bounds.
#[derive(Clone, Copy)]
struct RadialBlock {
    count: Poisson<f64>,
    r2_lo: f64,
    r2_hi: f64,
}

impl RadialBlock {
    fn new(density: f64, r2_lo: f64, r2_hi: f64) -> Self {
        Self {
            count: Poisson::new(density * PI * (r2_hi - r2_lo)).expect("positive finite mean"),
            r2_lo,
            r2_hi,
        }
    }
}

/// Running F-AP aggregates across sampling blocks.
#[derive(Default)]
struct FapAccum {
    all: f64,
    cached: f64,
    serve_r2: f64,
    serve_term: f64,
    cluster_num: f64,
}

struct KernelCtx<'a> {
    params: &'a NetworkParams,
    placement: Placement,
    fap_inner: RadialBlock,
    fap_outer: Option<RadialBlock>,
    dev_inner: RadialBlock,
    dev_outer: Option<RadialBlock>,
    /// P_f/P_d and its reciprocal; the only way powers enter any SIR.
    rf: f64,
    rdp: f64,
    ld2: f64,
    lc2: f64,
    d2d_cdf: Option<Arc<ZipfCdf>>,
    fap_cdf: Option<Arc<ZipfCdf>>,
}

impl<'a> KernelCtx<'a> {
    fn new(params: &'a NetworkParams, opts: &SimOptions) -> Result<Self, SimError> {
        params.validate()?;
        opts.validate()?;
        let r2_max = opts.window_radius_m * opts.window_radius_m;
        let inner_r2 = r2_max.min(STRATIFY_BOUNDARY_M * STRATIFY_BOUNDARY_M);
        let outer = (r2_max > inner_r2).then_some((inner_r2, r2_max));
        let (d2d_cdf, fap_cdf) = match opts.placement {
            Placement::Thinning => (None, None),
            Placement::Identical => (
                Some(params.catalog.d2d_cdf()?),
                Some(params.catalog.fap_cdf()?),
            ),
        };
        Ok(Self {
            params,
            placement: opts.placement,
            fap_inner: RadialBlock::new(params.fap_density, 0.0, inner_r2),
            fap_outer: outer.map(|(lo, hi)| RadialBlock::new(params.fap_density, lo, hi)),
            dev_inner: RadialBlock::new(params.d2d_user_density(), 0.0, inner_r2),
            dev_outer: outer.map(|(lo, hi)| RadialBlock::new(params.d2d_user_density(), lo, hi)),
            rf: params.power_ratio(),
            rdp: 1.0 / params.power_ratio(),
            ld2: params.d2d_range_m * params.d2d_range_m,
            lc2: params.cluster_radius_m * params.cluster_radius_m,
            d2d_cdf,
            fap_cdf,
        })
    }

    /// Per-block F-AP draws: radius, fade, cache mark per node.
    fn fap_block(&self, block: &RadialBlock, seed: u64, tier_hit: bool, acc: &mut FapAccum) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alpha_f = self.params.fap_pathloss;
        let n = rng.sample(block.count) as usize;
        for _ in 0..n {
            let r2 = (block.r2_lo + rng.random::<f64>() * (block.r2_hi - block.r2_lo))
                .max(f64::MIN_POSITIVE);
            let g: f64 = rng.sample(Exp1);
            let cached = match self.placement {
                Placement::Thinning => rng.random::<f64>() < self.params.fap_hit_probability(),
                Placement::Identical => tier_hit,
            };
            let term = g * path_gain(r2, alpha_f);
            acc.all += term;
            if cached {
                acc.cached += term;
                if r2 < acc.serve_r2 {
                    acc.serve_r2 = r2;
                    acc.serve_term = term;
                }
                if r2 <= self.lc2 {
                    acc.cluster_num += term;
                }
            }
        }
    }

    /// Per-block device draws; returns (interference sum, cache hit within
    /// the discovery range).
    fn dev_block(&self, block: &RadialBlock, seed: u64, tier_hit: bool) -> (f64, bool) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alpha_d = self.params.d2d_pathloss;
        let n = rng.sample(block.count) as usize;
        let mut sum = 0.0;
        let mut avail = false;
        for _ in 0..n {
            let r2 = (block.r2_lo + rng.random::<f64>() * (block.r2_hi - block.r2_lo))
                .max(f64::MIN_POSITIVE);
            let g: f64 = rng.sample(Exp1);
            sum += g * path_gain(r2, alpha_d);
            if r2 <= self.ld2 {
                let cached = match self.placement {
                    Placement::Thinning => rng.random::<f64>() < self.params.d2d_hit_probability(),
                    Placement::Identical => tier_hit,
                };
                avail |= cached;
            }
        }
        (sum, avail)
    }

    /// One trial. Squared radii are sampled directly (r² is uniform on
    /// [0, R²] for a PPP disc point) and angles never drawn, since every
    /// SIR depends on distances alone. Each sampling block runs on its own
    /// sub-stream with a fixed draw order: scalars (support, rank under
    /// identical placement, serving fade), then per node radius, fade,
    /// cache mark. A zero squared radius is clamped to the smallest
    /// positive double rather than raising the materialized path's
    /// degenerate-geometry error; the event has probability 2⁻⁵³ per node
    /// and the clamp keeps the kernel total.
    fn run_trial(&self, seed: u64) -> TrialRecord {
        let p = self.params;
        let mut scalars = ChaCha8Rng::seed_from_u64(block_seed(seed, BLOCK_SCALARS));
        let support = scalars.random::<f64>() < p.d2d_support;
        let (dev_tier_hit, fap_tier_hit) = match self.placement {
            Placement::Thinning => (false, false),
            Placement::Identical => {
                let u = scalars.random::<f64>();
                let d2d_cdf = self
                    .d2d_cdf
                    .as_ref()
                    .expect("built for identical placement");
                let fap_cdf = self
                    .fap_cdf
                    .as_ref()
                    .expect("built for identical placement");
                (
                    d2d_cdf.rank_for(u) <= p.catalog.d2d_cache_size(),
                    fap_cdf.rank_for(u) <= p.catalog.fap_cache_size(),
                )
            }
        };
        let h_d: f64 = scalars.sample(Exp1);

        let mut fap = FapAccum {
            serve_r2: f64::INFINITY,
            ..FapAccum::default()
        };
        self.fap_block(
            &self.fap_inner,
            block_seed(seed, BLOCK_FAP_INNER),
            fap_tier_hit,
            &mut fap,
        );
        if let Some(outer) = &self.fap_outer {
            self.fap_block(
                outer,
                block_seed(seed, BLOCK_FAP_OUTER),
                fap_tier_hit,
                &mut fap,
            );
        }

        let (mut dev_sum, mut avail) = self.dev_block(
            &self.dev_inner,
            block_seed(seed, BLOCK_DEV_INNER),
            dev_tier_hit,
        );
        if let Some(outer) = &self.dev_outer {
            let (sum, hit) = self.dev_block(outer, block_seed(seed, BLOCK_DEV_OUTER), dev_tier_hit);
            dev_sum += sum;
            avail |= hit;
        }

        let has_fap = fap.serve_r2.is_finite();
        TrialRecord {
            support,
            avail,
            h_d,
            d2d_denom: dev_sum + self.rf * fap.all,
            has_fap,
            fap_num: fap.serve_term,
            fap_denom: (fap.cached - fap.serve_term).max(0.0) + self.rdp * dev_sum,
            cluster_num: fap.cluster_num,
            cluster_denom: (fap.cached - fap.cluster_num).max(0.0) + self.rdp * dev_sum,
        }
    }
}

/// Runs the kernel over independent per-trial streams. Each trial's seed is
/// a pure function of (master seed, trial index) and results land in
/// index-order slots, so the output is bit-identical under any parallel
/// schedule.
fn run_trials(
    params: &NetworkParams,
    opts: &SimOptions,
    trials: u64,
    master_seed: u64,
) -> Result<Vec<TrialRecord>, SimError> {
    if trials < 100 {
        return Err(SimError::TooFewTrials(trials));
    }
    let ctx = KernelCtx::new(params, opts)?;
    Ok((0..trials)
        .into_par_iter()
        .map(|i| ctx.run_trial(trial_seed(master_seed, i)))
        .collect())
}

/// Sample mean vector and covariance matrix of K per-trial components.
fn mean_and_cov<const K: usize>(
    records: &[TrialRecord],
    extract: impl Fn(&TrialRecord) -> [f64; K],
) -> ([f64; K], [[f64; K]; K]) {
    let n = records.len() as f64;
    let mut mean = [0.0; K];
    for r in records {
        let x = extract(r);
        for k in 0..K {
            mean[k] += x[k];
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut cov = [[0.0; K]; K];
    for r in records {
        let x = extract(r);
        for i in 0..K {
            for j in i..K {
                cov[i][j] += (x[i] - mean[i]) * (x[j] - mean[j]);
            }
        }
    }
    for i in 0..K {
        for j in i..K {
            cov[i][j] /= n - 1.0;
            cov[j][i] = cov[i][j];
        }
    }
    (mean, cov)
}

/// Delta-method estimate of a smooth function of sample means: the value at
/// the means, with variance grad·Σ·gradᵀ/n.
fn delta_estimate<const K: usize>(
    trials: u64,
    value: f64,
    grad: [f64; K],
    cov: [[f64; K]; K],
) -> MetricEstimate {
    let mut var = 0.0;
    for i in 0..K {
        for j in 0..K {
            var += grad[i] * cov[i][j] * grad[j];
        }
    }
    MetricEstimate {
        mean: value,
        trials,
        half_width_95: 1.96 * (var.max(0.0) / trials as f64).sqrt(),
    }
}

fn bool_f(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Coverage and rate at one sweep point. The rate is absent when no sample
/// passed the SIR gate, leaving the restricted mean undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEstimate {
    pub coverage: MetricEstimate,
    pub rate: Option<MetricEstimate>,
}

/// Empirical mode shares; the coordination share is the exact complement of
/// the other two, so the partition carries no leakage by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeShares {
    pub d2d: MetricEstimate,
    pub nearest_fap: MetricEstimate,
    pub coordination: MetricEstimate,
}

impl ModeShares {
    pub fn for_mode(&self, mode: Mode) -> &MetricEstimate {
        match mode {
            Mode::D2d => &self.d2d,
            Mode::NearestFap => &self.nearest_fap,
            Mode::Coordination => &self.coordination,
        }
    }
}

fn d2d_point(
    records: &[TrialRecord],
    params: &NetworkParams,
    d_xd: f64,
    t_d: f64,
) -> PointEstimate {
    let n = records.len() as u64;
    let link_gain = path_gain(d_xd * d_xd, params.d2d_pathloss);
    let (mean, cov) = mean_and_cov(records, |r| {
        let gamma = r.gamma_d2d(link_gain);
        let gate = gamma >= t_d;
        [
            bool_f(gate),
            bool_f(r.support && r.avail),
            if gate { (1.0 + gamma).ln() } else { 0.0 },
        ]
    });
    let coverage = delta_estimate(n, mean[0], [1.0, 0.0, 0.0], cov);
    let passing = records
        .iter()
        .filter(|r| r.gamma_d2d(link_gain) >= t_d)
        .count();
    let rate =
        (passing > 0).then(|| delta_estimate(n, mean[1] * mean[2], [0.0, mean[2], mean[1]], cov));
    PointEstimate { coverage, rate }
}

/// D2D coverage and rate at each (link distance, threshold) pair, all pairs
/// sharing one set of realizations. Coverage is the unconditional frequency
/// of the fixed-link SIR gate; the rate multiplies the empirical mode
/// probability by the mean of ln(1+γ) over gate-passing samples (exact
/// logarithm, no high-SIR approximation).
pub fn estimate_d2d_grid(
    params: &NetworkParams,
    opts: &SimOptions,
    links: &[(f64, f64)],
    trials: u64,
    seed: u64,
) -> Result<Vec<PointEstimate>, SimError> {
    for &(d, t) in links {
        if !(d > 0.0 && d.is_finite() && t > 0.0 && t.is_finite()) {
            return Err(SimError::Param(ParamError(format!(
                "link distance and threshold must be positive and finite, got ({d}, {t})"
            ))));
        }
    }
    let records = run_trials(params, opts, trials, seed)?;
    Ok(links
        .iter()
        .map(|&(d, t)| d2d_point(&records, params, d, t))
        .collect())
}

fn fap_point(records: &[TrialRecord], params: &NetworkParams, t_f: f64) -> PointEstimate {
    let n = records.len() as u64;
    let link_gain = path_gain(
        params.d2d_link_distance_m * params.d2d_link_distance_m,
        params.d2d_pathloss,
    );
    let t_d = params.d2d_sir_threshold;
    let (mean, cov) = mean_and_cov(records, |r| {
        let gamma = r.gamma_fap();
        let gate = r.has_fap && gamma >= t_f;
        [
            bool_f(gate),
            bool_f(r.support && r.avail),
            bool_f(r.gamma_d2d(link_gain) >= t_d),
            if gate { (1.0 + gamma).ln() } else { 0.0 },
        ]
    });
    let coverage = delta_estimate(n, mean[0], [1.0, 0.0, 0.0, 0.0], cov);
    let p_f = 1.0 - mean[1] * mean[2];
    let passing = records
        .iter()
        .filter(|r| r.has_fap && r.gamma_fap() >= t_f)
        .count();
    let rate = (passing > 0).then(|| {
        delta_estimate(
            n,
            p_f * mean[3],
            [0.0, -mean[2] * mean[3], -mean[1] * mean[3], p_f],
            cov,
        )
    });
    PointEstimate { coverage, rate }
}

/// Nearest-F-AP coverage and rate at each threshold, sharing realizations.
/// The mode probability factor is one minus the empirical D2D share, per
/// the model's mode partition.
pub fn estimate_fap_grid(
    params: &NetworkParams,
    opts: &SimOptions,
    thresholds: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<PointEstimate>, SimError> {
    for &t in thresholds {
        if !(t > 0.0) || !t.is_finite() {
            return Err(SimError::Param(ParamError(format!(
                "threshold must be positive and finite, got {t}"
            ))));
        }
    }
    let records = run_trials(params, opts, trials, seed)?;
    Ok(thresholds
        .iter()
        .map(|&t| fap_point(&records, params, t))
        .collect())
}

/// Coordination-mode rate: the empirical coordination share times the mean
/// of ln(1+γ_c) over all trials, an empty cluster contributing a zero-rate
/// outage sample. No SIR gate exists for this mode.
pub fn estimate_coord_rate(
    params: &NetworkParams,
    opts: &SimOptions,
    trials: u64,
    seed: u64,
) -> Result<MetricEstimate, SimError> {
    let records = run_trials(params, opts, trials, seed)?;
    let n = records.len() as u64;
    let link_gain = path_gain(
        params.d2d_link_distance_m * params.d2d_link_distance_m,
        params.d2d_pathloss,
    );
    let (mean, cov) = mean_and_cov(&records, |r| {
        [
            bool_f(r.support && r.avail),
            bool_f(r.gamma_d2d(link_gain) >= params.d2d_sir_threshold),
            bool_f(r.has_fap && r.gamma_fap() >= params.fap_sir_threshold),
            (1.0 + r.gamma_cluster()).ln(),
        ]
    });
    let p_f = 1.0 - mean[0] * mean[1];
    let not_covered = 1.0 - mean[2];
    Ok(delta_estimate(
        n,
        p_f * not_covered * mean[3],
        [
            -mean[1] * not_covered * mean[3],
            -mean[0] * not_covered * mean[3],
            -p_f * mean[3],
            p_f * not_covered,
        ],
        cov,
    ))
}

/// Empirical mode shares in the analytic factorization: share_D is the
/// product of the eligibility and gate frequencies, share_F gates the
/// complement, and share_C closes the partition exactly.
pub fn estimate_mode_shares(
    params: &NetworkParams,
    opts: &SimOptions,
    trials: u64,
    seed: u64,
) -> Result<ModeShares, SimError> {
    let records = run_trials(params, opts, trials, seed)?;
    let n = records.len() as u64;
    let link_gain = path_gain(
        params.d2d_link_distance_m * params.d2d_link_distance_m,
        params.d2d_pathloss,
    );
    let (mean, cov) = mean_and_cov(&records, |r| {
        [
            bool_f(r.support && r.avail),
            bool_f(r.gamma_d2d(link_gain) >= params.d2d_sir_threshold),
            bool_f(r.has_fap && r.gamma_fap() >= params.fap_sir_threshold),
        ]
    });
    let share_d = mean[0] * mean[1];
    let p_f = 1.0 - share_d;
    let share_f = p_f * mean[2];
    let d2d = delta_estimate(n, share_d, [mean[1], mean[0], 0.0], cov);
    let nearest_fap = delta_estimate(
        n,
        share_f,
        [-mean[1] * mean[2], -mean[0] * mean[2], p_f],
        cov,
    );
    let coordination = delta_estimate(
        n,
        p_f - share_f,
        [-mean[1] * (1.0 - mean[2]), -mean[0] * (1.0 - mean[2]), -p_f],
        cov,
    );
    Ok(ModeShares {
        d2d,
        nearest_fap,
        coordination,
    })
}

/// Coverage probability of one mode at the params' own operating point.
/// Coordination has no SIR threshold and therefore no coverage.
pub fn estimate_coverage(
    mode: Mode,
    params: &NetworkParams,
    opts: &SimOptions,
    trials: u64,
    seed: u64,
) -> Result<MetricEstimate, SimError> {
    match mode {
        Mode::D2d => {
            let pts = estimate_d2d_grid(
                params,
                opts,
                &[(params.d2d_link_distance_m, params.d2d_sir_threshold)],
                trials,
                seed,
            )?;
            Ok(pts[0].coverage)
        }
        Mode::NearestFap => {
            let pts = estimate_fap_grid(params, opts, &[params.fap_sir_threshold], trials, seed)?;
            Ok(pts[0].coverage)
        }
        Mode::Coordination => Err(SimError::CoverageUndefined { mode }),
    }
}

/// Ergodic rate of one mode at the params' own operating point.
pub fn estimate_rate(
    mode: Mode,
    params: &NetworkParams,
    opts: &SimOptions,
    trials: u64,
    seed: u64,
) -> Result<MetricEstimate, SimError> {
    match mode {
        Mode::D2d => {
            let pts = estimate_d2d_grid(
                params,
                opts,
                &[(params.d2d_link_distance_m, params.d2d_sir_threshold)],
                trials,
                seed,
            )?;
            pts[0]
                .rate
                .ok_or(SimError::NoPassingSamples { mode, trials })
        }
        Mode::NearestFap => {
            let pts = estimate_fap_grid(params, opts, &[params.fap_sir_threshold], trials, seed)?;
            pts[0]
                .rate
                .ok_or(SimError::NoPassingSamples { mode, trials })
        }
        Mode::Coordination => estimate_coord_rate(params, opts, trials, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cache::ContentCatalog;

    fn small_opts() -> SimOptions {
        SimOptions {
            window_radius_m: 300.0,
            placement: Placement::Thinning,
        }
    }

    fn field(points: &[[f64; 2]], radius: f64) -> PointField {
        PointField::from_points(points.to_vec(), radius, 1e-6)
    }

    fn empty(radius: f64) -> PointField {
        field(&[], radius)
    }

    #[test]
    fn same_seed_reproduces_the_realization() {
        let p = NetworkParams::default();
        let opts = small_opts();
        let a = realize_network(&p, &opts, 7).unwrap();
        let b = realize_network(&p, &opts, 7).unwrap();
        assert_eq!(a, b);
        let c = realize_network(&p, &opts, 8).unwrap();
        assert_ne!(a.fap_field().points(), c.fap_field().points());
    }

    #[test]
    fn fading_marks_are_stable_and_unit_mean() {
        let p = NetworkParams::default();
        let real = realize_network(&p, &small_opts(), 3).unwrap();
        let a = real.fading_mark(LinkId::Fap(5));
        assert_eq!(a, real.fading_mark(LinkId::Fap(5)));
        // Unit mean over many links, 3 sigma.
        let n = 100_000;
        let sum: f64 = (0..n).map(|i| real.fading_mark(LinkId::D2dUser(i))).sum();
        let mean = sum / n as f64;
        assert!((mean - 1.0).abs() < 3.0 / (n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn fap_counts_match_the_poisson_mean() {
        let p = NetworkParams::default();
        let opts = small_opts();
        let seeds = 10_000u64;
        let total: usize = (0..seeds)
            .map(|s| realize_network(&p, &opts, s).unwrap().fap_field().len())
            .sum();
        let mean_per_seed = p.fap_density * PI * opts.window_radius_m * opts.window_radius_m;
        let expected = mean_per_seed * seeds as f64;
        let sigma = expected.sqrt();
        assert!(
            (total as f64 - expected).abs() < 3.0 * sigma,
            "total {total}, expected {expected:.1}"
        );
    }

    #[test]
    fn thinning_split_matches_the_support_probability() {
        let p = NetworkParams::default();
        let opts = small_opts();
        let mut d2d = 0usize;
        let mut all = 0usize;
        for s in 0..2_000u64 {
            let real = realize_network(&p, &opts, s).unwrap();
            d2d += real.d2d_user_field().len();
            all += real.d2d_user_field().len() + real.common_user_field().len();
        }
        let frac = d2d as f64 / all as f64;
        let sigma = (p.d2d_support * (1.0 - p.d2d_support) / all as f64).sqrt();
        assert!((frac - p.d2d_support).abs() < 3.0 * sigma, "frac {frac}");
    }

    #[test]
    fn requested_ranks_come_from_one_draw() {
        let mut p = NetworkParams::default();
        p.catalog = ContentCatalog::new(100, 1.0, 1.0, 10, 20).unwrap();
        let real = realize_network(&p, &small_opts(), 11).unwrap();
        // Equal exponents mean equal distributions, so one underlying draw
        // must give the same rank through both tiers.
        assert_eq!(
            real.requested_rank(Tier::Device),
            real.requested_rank(Tier::Fap)
        );
    }

    #[test]
    fn empty_interference_yields_the_infinite_sentinel() {
        let p = NetworkParams::default();
        let real = Realization::from_parts(
            empty(100.0),
            empty(100.0),
            empty(100.0),
            Placement::Thinning,
            &p,
            1,
        )
        .unwrap();
        let gamma = sir_d2d(&real, D2dServing::FixedDistance(10.0), &p).unwrap();
        assert!(gamma.is_infinite() && gamma > 0.0);
        assert!(gamma >= p.d2d_sir_threshold);
    }

    #[test]
    fn zero_distance_interferer_is_a_degenerate_geometry_error() {
        let p = NetworkParams::default();
        let real = Realization::from_parts(
            empty(100.0),
            field(&[[0.0, 0.0]], 100.0),
            empty(100.0),
            Placement::Thinning,
            &p,
            1,
        )
        .unwrap();
        assert!(matches!(
            sir_d2d(&real, D2dServing::FixedDistance(10.0), &p),
            Err(SimError::DegenerateGeometry)
        ));
    }

    #[test]
    fn equal_distance_equal_power_duel_is_a_fair_coin() {
        // Serving link and a single interfering device at the same distance
        // and power: the SIR is a ratio of two i.i.d. unit exponentials, so
        // Pr(SIR >= 1) = 1/2.
        let p = NetworkParams::default();
        let d = 10.0;
        let trials = 100_000u64;
        let mut wins = 0u64;
        for seed in 0..trials {
            let real = Realization::from_parts(
                empty(100.0),
                field(&[[d, 0.0]], 100.0),
                empty(100.0),
                Placement::Thinning,
                &p,
                seed,
            )
            .unwrap();
            if sir_d2d(&real, D2dServing::FixedDistance(d), &p).unwrap() >= 1.0 {
                wins += 1;
            }
        }
        let frac = wins as f64 / trials as f64;
        let sigma = 0.5 / (trials as f64).sqrt();
        assert!((frac - 0.5).abs() < 3.0 * sigma, "frac {frac}");
    }

    #[test]
    fn sir_values_are_invariant_under_binary_power_scaling() {
        let mut p = NetworkParams::default();
        let opts = small_opts();
        let real = realize_network(&p, &opts, 42).unwrap();
        let d2d = sir_d2d(&real, D2dServing::FixedDistance(10.0), &p).unwrap();
        let fap = real
            .nearest_cached_fap()
            .map(|i| sir_fap(&real, i, &p).unwrap());
        p.d2d_power_mw *= 8.0;
        p.fap_power_mw *= 8.0;
        // The realization's cache marks depend only on hit probabilities,
        // which powers never touch, so the same realization applies.
        assert_eq!(
            d2d,
            sir_d2d(&real, D2dServing::FixedDistance(10.0), &p).unwrap()
        );
        assert_eq!(
            fap,
            real.nearest_cached_fap()
                .map(|i| sir_fap(&real, i, &p).unwrap())
        );
    }

    #[test]
    fn sir_values_move_at_most_an_ulp_under_decimal_power_scaling() {
        // A decimal factor rounds the stored powers themselves, so bit
        // identity is only guaranteed for binary factors; the power ratio
        // still moves by at most one rounding step.
        let mut p = NetworkParams::default();
        let real = realize_network(&p, &small_opts(), 42).unwrap();
        let before = sir_d2d(&real, D2dServing::FixedDistance(10.0), &p).unwrap();
        p.d2d_power_mw *= 10.0;
        p.fap_power_mw *= 10.0;
        let after = sir_d2d(&real, D2dServing::FixedDistance(10.0), &p).unwrap();
        assert!(
            (after - before).abs() <= 4.0 * f64::EPSILON * before.abs(),
            "before {before}, after {after}"
        );
    }

    #[test]
    fn single_member_cluster_reduces_to_the_fap_link() {
        let p = NetworkParams::default();
        let real = Realization::from_parts(
            field(&[[30.0, 0.0]], 100.0),
            field(&[[50.0, 20.0], [-10.0, 5.0]], 100.0),
            empty(100.0),
            Placement::Thinning,
            &p,
            9,
        )
        .unwrap();
        let single = sir_cluster(&real, &[0], &p).unwrap().unwrap();
        let fap = sir_fap(&real, 0, &p).unwrap();
        assert_eq!(single, fap);
    }

    #[test]
    fn moving_an_interferer_into_the_cluster_raises_the_sir() {
        let p = NetworkParams::default();
        let real = Realization::from_parts(
            field(&[[30.0, 0.0], [60.0, 10.0]], 200.0),
            empty(200.0),
            empty(200.0),
            Placement::Thinning,
            &p,
            5,
        )
        .unwrap();
        let narrow = sir_cluster(&real, &[0], &p).unwrap().unwrap();
        let wide = sir_cluster(&real, &[0, 1], &p).unwrap().unwrap();
        // Node 1 is either cached (interferer turned server) or not
        // (interference unchanged, signal grows); both raise the SIR when
        // it contributes at all, and the widened cluster never loses.
        assert!(wide >= narrow, "narrow {narrow}, wide {wide}");
        if real.is_fap_cached(1) {
            assert!(wide > narrow);
        }
    }

    #[test]
    fn empty_cluster_is_an_outage_not_an_error() {
        let p = NetworkParams::default();
        let real = Realization::from_parts(
            empty(100.0),
            empty(100.0),
            empty(100.0),
            Placement::Thinning,
            &p,
            2,
        )
        .unwrap();
        assert_eq!(sir_cluster(&real, &[], &p).unwrap(), None);
    }

    #[test]
    fn bare_network_falls_through_to_coordination_outage() {
        let p = NetworkParams::default();
        let real = Realization::from_parts(
            empty(100.0),
            empty(100.0),
            empty(100.0),
            Placement::Thinning,
            &p,
            3,
        )
        .unwrap();
        let decision = select_mode(&real, &p).unwrap();
        assert_eq!(decision.mode, Mode::Coordination);
        assert!(decision.serving_nodes.is_empty());
        assert_eq!(decision.achieved_sir, None);
    }

    #[test]
    fn lone_cached_device_serves_with_infinite_sir() {
        let p = NetworkParams::default();
        // Deterministically find a seed whose realization marks device 0
        // cached and the user D2D-capable; the marks are pure functions of
        // the seed.
        let real = (0..64u64)
            .map(|s| {
                Realization::from_parts(
                    empty(100.0),
                    field(&[[1.0, 0.0]], 100.0),
                    empty(100.0),
                    Placement::Thinning,
                    &p,
                    s,
                )
                .unwrap()
            })
            .find(|r| r.supports_d2d() && r.is_d2d_user_cached(0))
            .expect("a qualifying seed exists in the probe range");
        let decision = select_mode(&real, &p).unwrap();
        assert_eq!(decision.mode, Mode::D2d);
        assert_eq!(decision.serving_nodes, vec![0]);
        assert!(decision.achieved_sir.unwrap().is_infinite());
    }

    #[test]
    fn cascade_prefers_the_nearest_qualifying_candidate() {
        let p = NetworkParams::default();
        let real = (0..256u64)
            .map(|s| {
                Realization::from_parts(
                    empty(400.0),
                    field(&[[4.0, 0.0], [2.0, 0.0], [300.0, 0.0]], 400.0),
                    empty(400.0),
                    Placement::Thinning,
                    &p,
                    s,
                )
                .unwrap()
            })
            .find(|r| {
                r.supports_d2d()
                    && r.is_d2d_user_cached(0)
                    && r.is_d2d_user_cached(1)
                    && sir_d2d(r, D2dServing::Node(1), &p).unwrap() >= p.d2d_sir_threshold
            })
            .expect("a qualifying seed exists in the probe range");
        let decision = select_mode(&real, &p).unwrap();
        assert_eq!(decision.mode, Mode::D2d);
        assert_eq!(decision.serving_nodes, vec![1], "node 1 is nearer");
    }

    #[test]
    fn widening_the_window_replays_the_inner_disc_draws() {
        // The stratified sampler makes a wide-window trial reuse the
        // narrow-window trial's draws for the shared inner disc, so the two
        // records differ only by annulus interference: same scalars, same
        // availability, denominators larger by the annulus contribution.
        let p = NetworkParams::default();
        let narrow = KernelCtx::new(
            &p,
            &SimOptions {
                window_radius_m: 2000.0,
                placement: Placement::Thinning,
            },
        )
        .unwrap();
        let wide = KernelCtx::new(
            &p,
            &SimOptions {
                window_radius_m: 4000.0,
                placement: Placement::Thinning,
            },
        )
        .unwrap();
        for i in 0..50 {
            let s = trial_seed(99, i);
            let a = narrow.run_trial(s);
            let b = wide.run_trial(s);
            assert_eq!(a.support, b.support);
            assert_eq!(a.h_d, b.h_d);
            assert_eq!(
                a.avail, b.avail,
                "the annulus cannot reach the discovery range"
            );
            assert_eq!(
                a.fap_num, b.fap_num,
                "the nearest server sits in the shared disc"
            );
            assert_eq!(a.cluster_num, b.cluster_num);
            let extra = b.d2d_denom - a.d2d_denom;
            assert!(extra >= 0.0, "annulus interference only adds");
            assert!(
                extra < 1e-5,
                "annulus contribution stays far-field, got {extra}"
            );
        }
    }

    #[test]
    fn estimators_reject_thin_trial_budgets() {
        let p = NetworkParams::default();
        assert!(matches!(
            estimate_mode_shares(&p, &small_opts(), 99, 1),
            Err(SimError::TooFewTrials(99))
        ));
    }

    #[test]
    fn coordination_coverage_is_undefined() {
        let p = NetworkParams::default();
        assert!(matches!(
            estimate_coverage(Mode::Coordination, &p, &small_opts(), 200, 1),
            Err(SimError::CoverageUndefined { .. })
        ));
    }

    #[test]
    fn vanishing_threshold_gives_full_coverage() {
        let mut p = NetworkParams::default();
        p.d2d_sir_threshold = 1e-300;
        let est = estimate_coverage(Mode::D2d, &p, &small_opts(), 500, 1).unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.half_width_95, 0.0);
    }

    #[test]
    fn vanishing_support_gives_zero_rate() {
        let mut p = NetworkParams::default();
        p.d2d_support = 1e-300;
        let est = estimate_rate(Mode::D2d, &p, &small_opts(), 500, 1).unwrap();
        assert_eq!(est.mean, 0.0);
    }

    #[test]
    fn unreachable_gate_is_an_absent_estimate_with_diagnostic() {
        let mut p = NetworkParams::default();
        p.d2d_sir_threshold = 1e280;
        let err = estimate_rate(Mode::D2d, &p, &small_opts(), 200, 1).unwrap_err();
        assert!(matches!(
            err,
            SimError::NoPassingSamples {
                mode: Mode::D2d,
                trials: 200
            }
        ));
    }

    #[test]
    fn estimates_are_identical_across_seeding_of_the_grid_and_single_apis() {
        let p = NetworkParams::default();
        let opts = small_opts();
        let grid = estimate_d2d_grid(
            &p,
            &opts,
            &[(p.d2d_link_distance_m, p.d2d_sir_threshold)],
            300,
            17,
        )
        .unwrap();
        let single = estimate_coverage(Mode::D2d, &p, &opts, 300, 17).unwrap();
        assert_eq!(grid[0].coverage, single);
    }

    #[test]
    fn estimates_are_bit_identical_under_binary_power_scaling() {
        let mut p = NetworkParams::default();
        let opts = small_opts();
        let before = estimate_mode_shares(&p, &opts, 400, 23).unwrap();
        p.d2d_power_mw *= 8.0;
        p.fap_power_mw *= 8.0;
        let after = estimate_mode_shares(&p, &opts, 400, 23).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn mode_shares_partition_to_machine_epsilon() {
        let p = NetworkParams::default();
        let shares = estimate_mode_shares(&p, &small_opts(), 2_000, 5).unwrap();
        let total = shares.d2d.mean + shares.nearest_fap.mean + shares.coordination.mean;
        assert!((total - 1.0).abs() <= 4.0 * f64::EPSILON, "total {total}");
    }

    #[test]
    fn delta_method_reduces_to_the_binomial_half_width() {
        let p = NetworkParams::default();
        let est = estimate_coverage(Mode::D2d, &p, &small_opts(), 2_000, 9).unwrap();
        let n = est.trials as f64;
        let expected = 1.96 * (est.mean * (1.0 - est.mean) * n / (n - 1.0) / n).sqrt();
        assert!(
            (est.half_width_95 - expected).abs() < 1e-12,
            "hw {} vs binomial {expected}",
            est.half_width_95
        );
    }

    #[test]
    fn identical_placement_is_all_or_nothing_per_tier() {
        let mut p = NetworkParams::default();
        p.catalog = ContentCatalog::new(100, 1.0, 1.0, 10, 20).unwrap();
        let opts = SimOptions {
            window_radius_m: 300.0,
            placement: Placement::Identical,
        };
        for seed in 0..50 {
            let real = realize_network(&p, &opts, seed).unwrap();
            let flags: Vec<bool> = (0..real.fap_field().len())
                .map(|i| real.is_fap_cached(i))
                .collect();
            assert!(
                flags
                    .iter()
                    .all(|&f| f == flags.first().copied().unwrap_or(true)),
                "mixed cache flags under identical placement"
            );
        }
    }
}
