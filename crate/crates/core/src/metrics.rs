//! Observables: queue length and flow for both models.
//!
//! Fuzzy queue length follows the rule "vehicles `0..x` are in queue and
//! vehicles `x..m` are not, then Q is x" with vehicle 0 the rearmost, `min`
//! as conjunction and `1 - g` as negation. A vehicle is in queue to the
//! degree that it stands in its initial cell with zero velocity.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::fcm::{FcmState, FcmVehicle};
use crate::fuzzy::{FuzzyInt, FuzzySet};
use crate::nasch::{monte_carlo, Ensemble, NaschState};
use crate::road::Road;
use crate::sim_io::scenario::{even_cells, FlowEstimator, ModelKind, Scenario};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("series of {len} states does not extend past a warmup of {warmup} steps")]
    InsufficientSteps { len: usize, warmup: usize },
    #[error("density {0} is outside (0, 1]")]
    BadDensity(f64),
    #[error("scenario defines no vehicle class for the sweep")]
    NoClass,
    #[error(transparent)]
    Model(#[from] crate::fcm::ModelError),
    #[error(transparent)]
    Nasch(#[from] crate::nasch::NaschError),
}

/// `min(mu_P(slot), mu_V(0))`.
pub fn in_queue_degree(vehicle: &FcmVehicle, slot: i64) -> f64 {
    vehicle.position.grade(slot).min(vehicle.velocity.grade(0))
}

/// Fuzzy queue length over `0..=m`; may be subnormal.
pub fn queue_length(state: &FcmState) -> FuzzySet {
    let degrees: Vec<f64> = state
        .vehicles()
        .iter()
        .map(|v| in_queue_degree(v, v.slot))
        .collect();
    queue_from_degrees(&degrees)
}

/// `mu(x) = min(min_{n<x} d_n, min_{n>=x} (1 - d_n))`, empty minima being 1.
pub fn queue_from_degrees(degrees: &[f64]) -> FuzzySet {
    let m = degrees.len();
    // suffix[x] = min over n >= x of (1 - d_n)
    let mut suffix = vec![1.0f64; m + 1];
    for n in (0..m).rev() {
        suffix[n] = suffix[n + 1].min(1.0 - degrees[n]);
    }
    let mut prefix = 1.0f64;
    let mut pairs = Vec::new();
    for x in 0..=m {
        if x > 0 {
            prefix = prefix.min(degrees[x - 1]);
        }
        let g = prefix.min(suffix[x]);
        if g > 0.0 {
            pairs.push((x as i64, g));
        }
    }
    FuzzySet::new(pairs).expect("grades are in (0, 1] and values distinct")
}

/// Empirical distribution of an integer observable.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Histogram {
    counts: BTreeMap<i64, usize>,
    total: usize,
}

impl Histogram {
    pub fn from_samples(samples: impl IntoIterator<Item = i64>) -> Self {
        let mut h = Self::default();
        for s in samples {
            *h.counts.entry(s).or_insert(0) += 1;
            h.total += 1;
        }
        h
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// `(value, probability)` in increasing value order.
    pub fn probabilities(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.counts
            .iter()
            .map(move |(&v, &c)| (v, c as f64 / self.total as f64))
    }

    pub fn probability(&self, value: i64) -> f64 {
        self.counts
            .get(&value)
            .map_or(0.0, |&c| c as f64 / self.total as f64)
    }

    /// Most frequent value, smallest among ties.
    pub fn mode(&self) -> Option<i64> {
        let mut best: Option<(i64, usize)> = None;
        for (&v, &c) in &self.counts {
            if best.is_none_or(|(_, bc)| c > bc) {
                best = Some((v, c));
            }
        }
        best.map(|(v, _)| v)
    }

    pub fn mean(&self) -> f64 {
        let sum: f64 = self.counts.iter().map(|(&v, &c)| v as f64 * c as f64).sum();
        sum / self.total as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QueueSeries {
    Fuzzy(Vec<FuzzySet>),
    Empirical(Vec<Histogram>),
}

impl QueueSeries {
    pub fn len(&self) -> usize {
        match self {
            QueueSeries::Fuzzy(s) => s.len(),
            QueueSeries::Empirical(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Per-step histogram of crisp queue lengths across the runs of an ensemble.
pub fn empirical_queue_distribution(ensemble: &Ensemble) -> Vec<Histogram> {
    (0..=ensemble.steps)
        .map(|t| Histogram::from_samples(ensemble.runs.iter().map(|r| r.queue_lengths[t] as i64)))
        .collect()
}

/// Fuzzy sum of all vehicle velocities; `{1/0}` on an empty road.
pub fn velocity_total(state: &FcmState) -> FuzzyInt {
    state
        .vehicles()
        .iter()
        .fold(FuzzyInt::crisp(0), |acc, v| &acc + &v.velocity)
}

/// Time-averaged fuzzy flow in vehicles per step per cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowEstimate {
    pub argmax: f64,
    pub cut_low: f64,
    pub cut_high: f64,
}

/// Streaming average of the per-step fuzzy flow `sum(V) / C` over the states
/// with index at least `warmup`.
#[derive(Debug, Clone)]
pub struct FlowAccumulator {
    warmup: usize,
    theta: f64,
    seen: usize,
    used: usize,
    sums: [f64; 3],
}

impl FlowAccumulator {
    pub fn new(warmup: usize, theta: f64) -> Self {
        Self {
            warmup,
            theta,
            seen: 0,
            used: 0,
            sums: [0.0; 3],
        }
    }

    pub fn push(&mut self, state: &FcmState) {
        if self.seen >= self.warmup {
            let total = velocity_total(state);
            let c = state.road().length as f64;
            let (lo, hi) = total.alpha_cut(self.theta);
            self.sums[0] += total.argmax() as f64 / c;
            self.sums[1] += lo as f64 / c;
            self.sums[2] += hi as f64 / c;
            self.used += 1;
        }
        self.seen += 1;
    }

    pub fn finish(&self) -> Result<FlowEstimate, MetricsError> {
        if self.used == 0 {
            return Err(MetricsError::InsufficientSteps {
                len: self.seen,
                warmup: self.warmup,
            });
        }
        let n = self.used as f64;
        Ok(FlowEstimate {
            argmax: self.sums[0] / n,
            cut_low: self.sums[1] / n,
            cut_high: self.sums[2] / n,
        })
    }
}

/// Averaged fuzzy flow over `states[warmup..]` at the 0.99 cut.
pub fn fuzzy_flow(states: &[FcmState], warmup: usize) -> Result<FlowEstimate, MetricsError> {
    let mut acc = FlowAccumulator::new(warmup, 0.99);
    states.iter().for_each(|s| acc.push(s));
    acc.finish()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyFdPoint {
    pub density: f64,
    pub vehicles: usize,
    pub flow: FlowEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaschFdPoint {
    pub density: f64,
    pub vehicles: usize,
    /// `(flow, empirical probability)` over all runs and window steps.
    pub states: Vec<(f64, f64)>,
    pub mean_flow: f64,
    pub threshold: f64,
}

impl NaschFdPoint {
    /// States reaching the probability threshold.
    pub fn dots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.states
            .iter()
            .copied()
            .filter(|&(_, p)| p >= self.threshold)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FundamentalDiagram {
    Fuzzy(Vec<FuzzyFdPoint>),
    Nasch(Vec<NaschFdPoint>),
}

pub fn vehicles_for_density(road_length: i64, density: f64) -> usize {
    (density * road_length as f64).round() as usize
}

/// Runs `model` on a ring of the scenario's road length at every density.
pub fn sweep_fundamental_diagram(
    scenario: &Scenario,
    model: ModelKind,
    densities: &[f64],
) -> Result<FundamentalDiagram, MetricsError> {
    if let Some(&d) = densities.iter().find(|d| !(**d > 0.0 && **d <= 1.0)) {
        return Err(MetricsError::BadDensity(d));
    }
    Ok(match model {
        ModelKind::Fcm => FundamentalDiagram::Fuzzy(
            densities
                .par_iter()
                .map(|&d| fuzzy_fd_point(scenario, d))
                .collect::<Result<_, _>>()?,
        ),
        ModelKind::Nasch => FundamentalDiagram::Nasch(
            densities
                .par_iter()
                .map(|&d| nasch_fd_point(scenario, d))
                .collect::<Result<_, _>>()?,
        ),
    })
}

pub fn fuzzy_fd_point(scenario: &Scenario, density: f64) -> Result<FuzzyFdPoint, MetricsError> {
    let fd = scenario.fundamental();
    let road = Road::ring(scenario.config.road_length);
    let class = scenario.sweep_class().ok_or(MetricsError::NoClass)?;
    let n = vehicles_for_density(road.length, density);
    let fleet = even_cells(road.length, n)
        .into_iter()
        .map(|x| (class.clone(), FuzzyInt::crisp(x), FuzzyInt::crisp(0)))
        .collect();
    let mut state = FcmState::new(road, scenario.fcm_params(), fleet)?;
    let mut acc = FlowAccumulator::new(fd.warmup, fd.cut_threshold);
    for _ in 0..fd.warmup + fd.window {
        acc.push(&state);
        state = state.step();
    }
    Ok(FuzzyFdPoint {
        density,
        vehicles: n,
        flow: acc.finish()?,
    })
}

pub fn nasch_fd_point(scenario: &Scenario, density: f64) -> Result<NaschFdPoint, MetricsError> {
    let fd = scenario.fundamental();
    let road = Road::ring(scenario.config.road_length);
    let params = scenario.nasch_params();
    let n = vehicles_for_density(road.length, density);
    let cars: Vec<(i64, i64)> = even_cells(road.length, n)
        .into_iter()
        .map(|x| (x, 0))
        .collect();
    NaschState::new(road, params, &cars, 0)?;
    let nasch = &scenario.config.nasch;
    let ensemble = monte_carlo(
        |seed| NaschState::new(road, params, &cars, seed).expect("validated above"),
        fd.warmup + fd.window - 1,
        nasch.runs,
        nasch.base_seed,
        0,
    );
    let samples = ensemble.runs.iter().flat_map(|r| {
        let window = fd.warmup..fd.warmup + fd.window;
        match fd.estimator {
            FlowEstimator::VelocitySum => r.velocity_sums[window].to_vec(),
            FlowEstimator::SiteCount => r.site_counts[window].iter().map(|&c| c as i64).collect(),
        }
    });
    let hist = Histogram::from_samples(samples);
    let scale = match fd.estimator {
        FlowEstimator::VelocitySum => road.length as f64,
        FlowEstimator::SiteCount => 1.0,
    };
    Ok(NaschFdPoint {
        density,
        vehicles: n,
        states: hist
            .probabilities()
            .map(|(k, p)| (k as f64 / scale, p))
            .collect(),
        mean_flow: hist.mean() / scale,
        threshold: fd.probability_threshold,
    })
}
