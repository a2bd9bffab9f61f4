//! Zipf content popularity and cache-hit probabilities for D2D users and
//! fog access points.
//!
//! Popularity of rank i out of n is (1/i^σ) normalized by the generalized
//! harmonic number. A cache holding the top C ranks serves a request with
//! probability equal to the popularity mass of ranks 1..C.

use rand::Rng;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("content rank {rank} outside catalog of {n} items")]
    RankOutOfRange { rank: usize, n: usize },
    #[error("cache size {cache_size} outside catalog of {n} items")]
    CacheSizeOutOfRange { cache_size: usize, n: usize },
    #[error("invalid catalog: {0}")]
    InvalidCatalog(String),
}

fn validate_shape(sigma: f64, n: usize) -> Result<(), CacheError> {
    if n == 0 {
        return Err(CacheError::InvalidCatalog(
            "catalog must hold at least one item".into(),
        ));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(CacheError::InvalidCatalog(format!(
            "Zipf exponent must be finite and positive, got {sigma}"
        )));
    }
    Ok(())
}

/// Compensated ascending-rank sum of k^{-σ} for k in [1, upto].
fn partial_weight_sum(sigma: f64, upto: usize) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for k in 1..=upto {
        let w = (k as f64).powf(-sigma);
        let y = w - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Normalization constants are memoized per (σ, n): the sum is cheap but
/// sits under hot Monte Carlo paths.
fn normalization(sigma: f64, n: usize) -> f64 {
    static MEMO: OnceLock<Mutex<HashMap<(u64, usize), f64>>> = OnceLock::new();
    let memo = MEMO.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (sigma.to_bits(), n);
    if let Some(&v) = memo.lock().unwrap().get(&key) {
        return v;
    }
    let v = partial_weight_sum(sigma, n);
    memo.lock().unwrap().insert(key, v);
    v
}

/// Popularity of content rank `i` under a Zipf law with exponent `sigma`
/// over a catalog of `n` items.
pub fn zipf_pmf(i: usize, sigma: f64, n: usize) -> Result<f64, CacheError> {
    validate_shape(sigma, n)?;
    if i == 0 || i > n {
        return Err(CacheError::RankOutOfRange { rank: i, n });
    }
    Ok((i as f64).powf(-sigma) / normalization(sigma, n))
}

/// Probability that a request lands in a cache holding the `cache_size`
/// most popular items.
pub fn cache_hit_probability(cache_size: usize, sigma: f64, n: usize) -> Result<f64, CacheError> {
    validate_shape(sigma, n)?;
    if cache_size == 0 || cache_size > n {
        return Err(CacheError::CacheSizeOutOfRange { cache_size, n });
    }
    Ok(partial_weight_sum(sigma, cache_size) / normalization(sigma, n))
}

/// Precomputed cumulative popularity, for inverse-CDF rank draws.
#[derive(Debug, Clone)]
pub struct ZipfCdf {
    cumulative: Vec<f64>,
}

impl ZipfCdf {
    pub fn new(sigma: f64, n: usize) -> Result<Self, CacheError> {
        validate_shape(sigma, n)?;
        let norm = normalization(sigma, n);
        let mut cumulative = Vec::with_capacity(n);
        let mut sum = 0.0;
        let mut comp = 0.0;
        for k in 1..=n {
            let w = (k as f64).powf(-sigma) / norm;
            let y = w - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            cumulative.push(sum);
        }
        // Rounding can leave the last entry a few ulp shy of 1; pin it so
        // every u in [0, 1) maps to a valid rank.
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        Ok(Self { cumulative })
    }

    pub fn catalog_size(&self) -> usize {
        self.cumulative.len()
    }

    /// Rank whose CDF bracket contains `u`; `u` must lie in [0, 1).
    pub fn rank_for(&self, u: f64) -> usize {
        let idx = self.cumulative.partition_point(|&c| c <= u);
        idx.min(self.cumulative.len() - 1) + 1
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.rank_for(rng.random::<f64>())
    }
}

fn memoized_cdf(sigma: f64, n: usize) -> Result<Arc<ZipfCdf>, CacheError> {
    static MEMO: OnceLock<Mutex<HashMap<(u64, usize), Arc<ZipfCdf>>>> = OnceLock::new();
    let memo = MEMO.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (sigma.to_bits(), n);
    if let Some(cdf) = memo.lock().unwrap().get(&key) {
        return Ok(Arc::clone(cdf));
    }
    let cdf = Arc::new(ZipfCdf::new(sigma, n)?);
    memo.lock().unwrap().insert(key, Arc::clone(&cdf));
    Ok(cdf)
}

/// Draws a content rank in [1, n] distributed per the Zipf law, via
/// inverse-CDF lookup on a memoized cumulative sum.
pub fn sample_content_rank<R: Rng + ?Sized>(
    rng: &mut R,
    sigma: f64,
    n: usize,
) -> Result<usize, CacheError> {
    Ok(memoized_cdf(sigma, n)?.sample(rng))
}

/// Content catalog shared by the whole network: one library of `n` items,
/// separate Zipf exponents and cache sizes for the D2D and F-AP tiers.
#[derive(Debug, Clone, PartialEq)]
pub struct ContentCatalog {
    content_count: usize,
    d2d_exponent: f64,
    fap_exponent: f64,
    d2d_cache_size: usize,
    fap_cache_size: usize,
    d2d_hit: f64,
    fap_hit: f64,
}

impl ContentCatalog {
    pub fn new(
        content_count: usize,
        d2d_exponent: f64,
        fap_exponent: f64,
        d2d_cache_size: usize,
        fap_cache_size: usize,
    ) -> Result<Self, CacheError> {
        validate_shape(d2d_exponent, content_count)?;
        validate_shape(fap_exponent, content_count)?;
        if !(d2d_cache_size > 0
            && d2d_cache_size < fap_cache_size
            && fap_cache_size < content_count)
        {
            return Err(CacheError::InvalidCatalog(format!(
                "cache sizes must satisfy 0 < C_d < C_f < N, \
                 got C_d = {d2d_cache_size}, C_f = {fap_cache_size}, N = {content_count}"
            )));
        }
        let d2d_hit = cache_hit_probability(d2d_cache_size, d2d_exponent, content_count)?;
        let fap_hit = cache_hit_probability(fap_cache_size, fap_exponent, content_count)?;
        Ok(Self {
            content_count,
            d2d_exponent,
            fap_exponent,
            d2d_cache_size,
            fap_cache_size,
            d2d_hit,
            fap_hit,
        })
    }

    pub fn content_count(&self) -> usize {
        self.content_count
    }

    pub fn d2d_exponent(&self) -> f64 {
        self.d2d_exponent
    }

    pub fn fap_exponent(&self) -> f64 {
        self.fap_exponent
    }

    pub fn d2d_cache_size(&self) -> usize {
        self.d2d_cache_size
    }

    pub fn fap_cache_size(&self) -> usize {
        self.fap_cache_size
    }

    /// Probability a requested item sits in a D2D cache.
    pub fn d2d_hit_probability(&self) -> f64 {
        self.d2d_hit
    }

    /// Probability a requested item sits in an F-AP cache.
    pub fn fap_hit_probability(&self) -> f64 {
        self.fap_hit
    }

    pub fn d2d_cdf(&self) -> Result<Arc<ZipfCdf>, CacheError> {
        memoized_cdf(self.d2d_exponent, self.content_count)
    }

    pub fn fap_cdf(&self) -> Result<Arc<ZipfCdf>, CacheError> {
        memoized_cdf(self.fap_exponent, self.content_count)
    }
}
