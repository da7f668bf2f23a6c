//! Region latency estimation behind a memoizing Compute API.
//!
//! Estimators implement [`ComputeEstimator`]. [`ComputeApi`] caches results
//! under (hardware, toolchain, estimator, region key) so structurally
//! identical regions are estimated once.

mod flops;
mod hardware;
mod roofline;
mod table;

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::RwLock;

use rayon::prelude::*;
use thiserror::Error;

use crate::slicer::{ComputeRegion, RegionKey};

pub use flops::op_flops;
pub use hardware::{HardwareConfig, HARDWARE_PRESETS};
pub use roofline::{boundary_bytes, region_flops, roofline, roofline_estimate, RooflineEstimator};
pub use table::{table_lookup_estimate, LatencyTable, TableEstimator};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EstimateError {
    #[error("no FLOP rule for {0}")]
    UnknownOp(String),
    #[error("{op}: missing or invalid dimension numbers ({what})")]
    MissingDimensionNumbers { op: String, what: String },
    #[error("FLOP count overflow in {0}")]
    FlopOverflow(String),
    #[error("byte count overflow in {0}")]
    ByteOverflow(String),
    #[error("no measured latency for region {region} (key {key})")]
    MissingLatency { region: usize, key: String },
    #[error("unknown hardware preset `{0}`")]
    UnknownHardware(String),
    #[error("invalid hardware config: {0}")]
    InvalidHardware(String),
    #[error("invalid latency table: {0}")]
    InvalidTable(String),
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bound {
    ComputeBound,
    MemoryBound,
}

/// Which path produced a latency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Roofline,
    Table,
    /// Table miss answered by the roofline.
    Fallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorResult {
    /// Seconds.
    pub latency: f64,
    pub flops: u64,
    pub bytes_moved: u64,
    pub bound: Bound,
    pub provenance: Provenance,
}

pub trait ComputeEstimator: Send + Sync {
    fn name(&self) -> &str;

    /// Distinguishes estimator configurations in the cache key.
    fn identity(&self) -> String {
        self.name().to_string()
    }

    fn estimate(&self, region: &ComputeRegion, hw: &HardwareConfig) -> Result<EstimatorResult, EstimateError>;

    fn compile_args(&self) -> Vec<(String, String)>;

    fn default_runs(&self) -> u32 {
        1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub hardware: String,
    pub toolchain: String,
    pub estimator: String,
    pub region: RegionKey,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    pub unique_keys: u64,
}

impl CacheStats {
    pub fn hit_ratio(&self) -> f64 {
        let total = self.hits + self.misses;
        if total == 0 {
            0.0
        } else {
            self.hits as f64 / total as f64
        }
    }
}

/// Output of [`ComputeApi::estimate_all`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BatchEstimate {
    pub results: Vec<EstimatorResult>,
    pub hits: u64,
    pub misses: u64,
}

#[derive(Debug)]
pub struct ComputeApi {
    cache: RwLock<HashMap<CacheKey, EstimatorResult>>,
    caching: bool,
    runs_override: Option<u32>,
    hits: AtomicU64,
    misses: AtomicU64,
    invocations: AtomicU64,
}

impl Default for ComputeApi {
    fn default() -> Self {
        Self::new()
    }
}

impl ComputeApi {
    pub fn new() -> Self {
        Self {
            cache: RwLock::new(HashMap::new()),
            caching: true,
            runs_override: None,
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
            invocations: AtomicU64::new(0),
        }
    }

    /// Every request invokes the estimator.
    pub fn uncached() -> Self {
        Self {
            caching: false,
            ..Self::new()
        }
    }

    pub fn with_runs(mut self, runs: Option<u32>) -> Self {
        self.runs_override = runs;
        self
    }

    pub fn get_run_time_estimate(
        &self,
        region: &ComputeRegion,
        hw: &HardwareConfig,
        est: &dyn ComputeEstimator,
    ) -> Result<EstimatorResult, EstimateError> {
        self.lookup(region, hw, est).map(|(r, _)| r)
    }

    /// Result plus whether it came from the cache.
    fn lookup(
        &self,
        region: &ComputeRegion,
        hw: &HardwareConfig,
        est: &dyn ComputeEstimator,
    ) -> Result<(EstimatorResult, bool), EstimateError> {
        let key = CacheKey {
            hardware: hw.name.clone(),
            toolchain: hw.toolchain_tag.clone(),
            estimator: est.identity(),
            region: region.canonical_key.clone(),
        };
        if self.caching {
            if let Some(r) = self.cache.read().expect("cache lock").get(&key) {
                self.hits.fetch_add(1, Ordering::Relaxed);
                return Ok((r.clone(), true));
            }
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        self.invocations.fetch_add(1, Ordering::Relaxed);
        let result = est.estimate(region, hw)?;
        if self.caching {
            self.cache
                .write()
                .expect("cache lock")
                .entry(key)
                .or_insert_with(|| result.clone());
        }
        Ok((result, false))
    }

    /// Estimate every region, computing each distinct key once and in
    /// parallel. Results come back in region order; the first failing region
    /// (in that order) determines the error. The returned stats count only
    /// this batch.
    pub fn estimate_all(
        &self,
        regions: &[ComputeRegion],
        hw: &HardwareConfig,
        est: &dyn ComputeEstimator,
    ) -> Result<BatchEstimate, EstimateError> {
        let mut first: HashMap<&RegionKey, usize> = HashMap::new();
        let leaders: Vec<usize> = regions
            .iter()
            .enumerate()
            .filter(|(i, r)| *first.entry(&r.canonical_key).or_insert(*i) == *i)
            .map(|(i, _)| i)
            .collect();
        let computed: Vec<_> = leaders
            .par_iter()
            .map(|&i| self.lookup(&regions[i], hw, est))
            .collect();
        let mut by_leader: HashMap<usize, (EstimatorResult, bool)> = HashMap::new();
        for (&i, r) in leaders.iter().zip(computed) {
            by_leader.insert(i, r?);
        }
        let mut batch = BatchEstimate::default();
        for (i, r) in regions.iter().enumerate() {
            let (res, hit) = match by_leader.remove(&i) {
                Some(x) => x,
                None => self.lookup(r, hw, est)?,
            };
            if hit {
                batch.hits += 1;
            } else {
                batch.misses += 1;
            }
            batch.results.push(res);
        }
        Ok(batch)
    }

    pub fn get_compile_args(&self, est: &dyn ComputeEstimator) -> BTreeMap<String, String> {
        est.compile_args().into_iter().collect()
    }

    pub fn get_exec_args(&self, est: &dyn ComputeEstimator) -> BTreeMap<String, String> {
        let runs = self.runs_override.unwrap_or_else(|| est.default_runs());
        BTreeMap::from([("runs".to_string(), runs.to_string())])
    }

    pub fn cache_stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            unique_keys: self.cache.read().expect("cache lock").len() as u64,
        }
    }

    /// Number of times an estimator actually ran.
    pub fn estimator_invocations(&self) -> u64 {
        self.invocations.load(Ordering::Relaxed)
    }
}
