//! Nagel-Schreckenberg cellular automaton.
//!
//! Each step applies, in parallel for every vehicle: accelerate by one up to
//! `v_max`, brake to the number of free cells ahead, slow down by one with
//! probability `p`, move. Randomness comes from a `ChaCha8Rng` seeded with
//! `seed_from_u64`; each step draws exactly one uniform `f64` per vehicle in
//! index order, so a seed fixes the whole trajectory on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::road::{Boundary, Road};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NaschError {
    #[error("invalid automaton: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaschParams {
    pub v_max: i64,
    /// Probability of the random slowdown.
    pub p: f64,
}

impl NaschParams {
    pub fn validate(&self) -> Result<(), NaschError> {
        if self.v_max < 1 {
            return Err(NaschError::Invalid(format!(
                "v_max {} must be at least 1",
                self.v_max
            )));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(NaschError::Invalid(format!(
                "p {} is outside [0, 1]",
                self.p
            )));
        }
        Ok(())
    }
}

pub fn rng_for_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone)]
pub struct NaschState {
    road: Road,
    params: NaschParams,
    positions: Vec<i64>,
    velocities: Vec<i64>,
    slots: Vec<i64>,
    rng: ChaCha8Rng,
    seed: u64,
    step: u64,
}

impl NaschState {
    /// Vehicles are given upstream first as `(cell, velocity)`.
    pub fn new(
        road: Road,
        params: NaschParams,
        vehicles: &[(i64, i64)],
        seed: u64,
    ) -> Result<Self, NaschError> {
        if road.length <= 0 {
            return Err(NaschError::Invalid("road length must be positive".into()));
        }
        params.validate()?;
        for (i, &(x, v)) in vehicles.iter().enumerate() {
            if !(0..=params.v_max).contains(&v) {
                return Err(NaschError::Invalid(format!(
                    "vehicle {i} velocity {v} is outside [0, {}]",
                    params.v_max
                )));
            }
            if road.boundary == Boundary::Ring && !(0..road.length).contains(&x) {
                return Err(NaschError::Invalid(format!(
                    "vehicle {i} at cell {x} is off the ring"
                )));
            }
            if i > 0 && x <= vehicles[i - 1].0 {
                return Err(NaschError::Invalid(format!(
                    "vehicle {i} at cell {x} is not downstream of vehicle {}",
                    i - 1
                )));
            }
        }
        let positions: Vec<i64> = vehicles.iter().map(|&(x, _)| x).collect();
        Ok(Self {
            road,
            params,
            slots: positions.clone(),
            positions,
            velocities: vehicles.iter().map(|&(_, v)| v).collect(),
            rng: rng_for_seed(seed),
            seed,
            step: 0,
        })
    }

    pub fn road(&self) -> Road {
        self.road
    }

    pub fn params(&self) -> NaschParams {
        self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Cell of each vehicle; unbounded on an open road.
    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    pub fn velocities(&self) -> &[i64] {
        &self.velocities
    }

    /// Initial cells.
    pub fn slots(&self) -> &[i64] {
        &self.slots
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Occupancy by vehicle index; vehicles past the end of an open road are not shown.
    pub fn cells(&self) -> Vec<Option<usize>> {
        let mut cells = vec![None; self.road.length as usize];
        for (id, &x) in self.positions.iter().enumerate() {
            if let Some(c) = self.road.cell_of(x) {
                cells[c] = Some(id);
            }
        }
        cells
    }

    /// Free cells in front of vehicle `n`; `None` for the open-road leader.
    pub fn gap(&self, n: usize) -> Option<i64> {
        let count = self.positions.len();
        match self.road.boundary {
            Boundary::Open => {
                (n + 1 < count).then(|| self.positions[n + 1] - self.positions[n] - 1)
            }
            Boundary::Ring => {
                let m = (n + 1) % count;
                Some((self.positions[m] - self.positions[n] - 1).rem_euclid(self.road.length))
            }
        }
    }

    pub fn step(&mut self) {
        let count = self.positions.len();
        let mut next = Vec::with_capacity(count);
        for n in 0..count {
            let mut v = (self.velocities[n] + 1).min(self.params.v_max);
            if let Some(gap) = self.gap(n) {
                v = v.min(gap);
            }
            let draw: f64 = self.rng.random();
            if draw < self.params.p {
                v = (v - 1).max(0);
            }
            next.push(v);
        }
        for (x, &v) in self.positions.iter_mut().zip(&next) {
            *x += v;
            if self.road.boundary == Boundary::Ring {
                *x %= self.road.length;
            }
        }
        self.velocities = next;
        self.step += 1;
    }

    /// Vehicles `0..x` all standing in their initial cells; the largest such `x`.
    pub fn queue_length(&self) -> usize {
        (0..self.positions.len())
            .take_while(|&n| self.positions[n] == self.slots[n] && self.velocities[n] == 0)
            .count()
    }

    pub fn velocity_sum(&self) -> i64 {
        self.velocities.iter().sum()
    }
}

/// Observables of one run, indexed by step (entry 0 is the initial state).
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub queue_lengths: Vec<usize>,
    /// Sum of velocities, i.e. vehicles x cells moved during the step.
    pub velocity_sums: Vec<i64>,
    /// Vehicles crossing the boundary in front of the reference cell during the step.
    pub site_counts: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub road: Road,
    pub vehicles: usize,
    pub steps: usize,
    pub runs: Vec<RunRecord>,
}

/// Runs one simulation for `steps` steps, recording observables.
pub fn record_run(mut state: NaschState, steps: usize, site: i64) -> RunRecord {
    let mut rec = RunRecord {
        seed: state.seed,
        queue_lengths: vec![state.queue_length()],
        velocity_sums: vec![state.velocity_sum()],
        site_counts: vec![0],
    };
    for _ in 0..steps {
        let before = state.positions.clone();
        state.step();
        let crossed = before
            .iter()
            .zip(&state.velocities)
            .filter(|&(&x, &v)| crosses(x, v, site, state.road))
            .count();
        rec.queue_lengths.push(state.queue_length());
        rec.velocity_sums.push(state.velocity_sum());
        rec.site_counts.push(crossed as u32);
    }
    rec
}

fn crosses(from: i64, v: i64, site: i64, road: Road) -> bool {
    if v == 0 {
        return false;
    }
    match road.boundary {
        Boundary::Open => from <= site && site < from + v,
        Boundary::Ring => (site - from).rem_euclid(road.length) < v,
    }
}

/// `runs` independent simulations seeded `base_seed + i`, run concurrently.
/// `init` builds the initial state for a given seed.
pub fn monte_carlo<F>(init: F, steps: usize, runs: usize, base_seed: u64, site: i64) -> Ensemble
where
    F: Fn(u64) -> NaschState + Sync,
{
    assert!(runs >= 1, "an ensemble needs at least one run");
    let first = init(base_seed);
    let (road, vehicles) = (first.road, first.positions.len());
    let records = (0..runs as u64)
        .into_par_iter()
        .map(|i| {
            let seed = base_seed.wrapping_add(i);
            let state = if i == 0 { first.clone() } else { init(seed) };
            record_run(state, steps, site)
        })
        .collect();
    Ensemble {
        road,
        vehicles,
        steps,
        runs: records,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(v_max: i64, p: f64) -> NaschParams {
        NaschParams { v_max, p }
    }

    #[test]
    fn rule_examples() {
        // v=3, gap=5, no slowdown
        let mut s = NaschState::new(Road::open(50), params(3, 0.0), &[(0, 3), (6, 3)], 1).unwrap();
        s.step();
        assert_eq!(s.velocities()[0], 3);
        assert_eq!(s.positions()[0], 3);
        // leader adjacent: braking dominates
        let mut s = NaschState::new(Road::open(50), params(3, 0.0), &[(0, 0), (1, 0)], 1).unwrap();
        let mut t = NaschState::new(Road::open(50), params(3, 1.0), &[(0, 0), (1, 0)], 1).unwrap();
        s.step();
        t.step();
        assert_eq!(s.velocities()[0], 0);
        assert_eq!(t.velocities()[0], 0);
        // v=2, gap=4, forced slowdown: 3 after acceleration, minus 1
        let mut s = NaschState::new(Road::open(50), params(3, 1.0), &[(0, 2), (5, 3)], 1).unwrap();
        s.step();
        assert_eq!(s.velocities()[0], 2);
    }

    #[test]
    fn rejects_bad_states() {
        assert!(NaschState::new(Road::open(10), params(3, 0.2), &[(2, 0), (2, 0)], 0).is_err());
        assert!(NaschState::new(Road::open(10), params(3, 0.2), &[(2, 5)], 0).is_err());
        assert!(NaschState::new(Road::ring(10), params(3, 0.2), &[(10, 0)], 0).is_err());
        assert!(NaschState::new(Road::open(10), params(0, 0.2), &[], 0).is_err());
        assert!(NaschState::new(Road::open(10), params(3, 1.5), &[], 0).is_err());
    }

    #[test]
    fn ring_gap_wraps() {
        let s = NaschState::new(Road::ring(10), params(3, 0.0), &[(1, 0), (8, 0)], 0).unwrap();
        assert_eq!(s.gap(0), Some(6));
        assert_eq!(s.gap(1), Some(2));
        let solo = NaschState::new(Road::ring(10), params(3, 0.0), &[(4, 0)], 0).unwrap();
        assert_eq!(solo.gap(0), Some(9));
    }

    #[test]
    fn cells_show_occupancy() {
        let s = NaschState::new(Road::ring(5), params(3, 0.0), &[(1, 0), (3, 0)], 0).unwrap();
        assert_eq!(s.cells(), vec![None, Some(0), None, Some(1), None]);
    }

    #[test]
    fn rng_golden_sequence() {
        let mut rng = rng_for_seed(42);
        let draws: Vec<u64> = (0..4).map(|_| rng.random()).collect();
        let mut again = rng_for_seed(42);
        let repeat: Vec<u64> = (0..4).map(|_| again.random()).collect();
        assert_eq!(draws, repeat);
        assert_eq!(draws, GOLDEN_SEED_42);
    }

    const GOLDEN_SEED_42: [u64; 4] = [
        12578764544318200737,
        17529487244874322312,
        7886285670807131020,
        11572758976476374866,
    ];

    #[test]
    fn queue_discharges_deterministically() {
        let cars: Vec<(i64, i64)> = (0..10).map(|i| (i, 0)).collect();
        let s = NaschState::new(Road::open(200), params(3, 0.0), &cars, 0).unwrap();
        let rec = record_run(s, 30, 100);
        assert_eq!(rec.queue_lengths[0], 10);
        assert!(rec.queue_lengths.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(*rec.queue_lengths.last().unwrap(), 0);
        // front vehicle leaves at step 1, then one per step
        assert_eq!(&rec.queue_lengths[..4], &[10, 9, 8, 7]);
    }

    #[test]
    fn deterministic_runs_ignore_seed() {
        let init = |seed| {
            let cars: Vec<(i64, i64)> = (0..8).map(|i| (i * 3, 0)).collect();
            NaschState::new(Road::ring(40), params(3, 0.0), &cars, seed).unwrap()
        };
        let e = monte_carlo(init, 50, 4, 7, 0);
        assert!(e
            .runs
            .windows(2)
            .all(|w| w[0].velocity_sums == w[1].velocity_sums));
        assert_eq!(e.runs[3].seed, 10);
    }

    #[test]
    fn site_counts_on_ring() {
        assert!(crosses(9, 2, 0, Road::ring(10)));
        assert!(crosses(0, 2, 0, Road::ring(10)));
        assert!(!crosses(1, 3, 0, Road::ring(10)));
        assert!(crosses(0, 1, 0, Road::open(10)));
        assert!(!crosses(1, 3, 0, Road::open(10)));
    }
}
