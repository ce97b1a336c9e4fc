//! Fuzzy cellular model: per-vehicle fuzzy positions and velocities on a
//! single-lane cellular road.
//!
//! One step computes, for every vehicle from the same time-`t` snapshot:
//!
//! 1. the gap `G = P_leader - L_leader - P` over support pairs with the
//!    leader strictly ahead, clamped at zero;
//! 2. the velocity `V' = min(V + A, G, V_max)`;
//! 3. the dilation exponent `e = alpha + (1 - alpha) * v / v_max` from the
//!    defuzzified new velocity and maximal velocity;
//! 4. the position `P' = truncate(dil(P + V', e), epsilon)`.
//!
//! Positions are stored unwrapped (monotone in time) on ring roads and are
//! reduced modulo the road length only when viewed as cells.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fuzzy::{ext_min, FuzzyError, FuzzyInt};
use crate::road::{Boundary, Road};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("vehicle class `{0}` has a defuzzified maximal velocity of 0")]
    DegenerateClass(String),
    #[error("vehicle class `{class}`: {reason}")]
    InvalidClass { class: String, reason: String },
    #[error("invalid model state: {0}")]
    InvalidState(String),
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
}

/// Fuzzy parameters shared by all vehicles of one class.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleClass {
    pub name: String,
    /// Cells occupied behind the front, as used by the gap rule.
    pub length: FuzzyInt,
    pub v_max: FuzzyInt,
    pub accel: FuzzyInt,
}

impl VehicleClass {
    pub fn new(
        name: impl Into<String>,
        length: FuzzyInt,
        v_max: FuzzyInt,
        accel: FuzzyInt,
    ) -> Result<Self, ModelError> {
        let name = name.into();
        for (what, x) in [("length", &length), ("v_max", &v_max), ("accel", &accel)] {
            if x.min_value() < 0 {
                return Err(ModelError::InvalidClass {
                    class: name,
                    reason: format!("{what} {x} has negative support values"),
                });
            }
        }
        if v_max.argmax() <= 0 {
            return Err(ModelError::DegenerateClass(name));
        }
        Ok(Self {
            name,
            length,
            v_max,
            accel,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GapMode {
    /// Only the next vehicle downstream constrains the gap.
    #[default]
    Successor,
    /// Fuzzy minimum over every downstream vehicle.
    AllAhead,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FcmParams {
    /// Dilation exponent at standstill, in [0, 1].
    pub alpha: f64,
    /// Grades below this are dropped after each position update.
    pub epsilon: f64,
    pub gap_mode: GapMode,
}

impl Default for FcmParams {
    fn default() -> Self {
        Self {
            alpha: 0.9,
            epsilon: 0.01,
            gap_mode: GapMode::Successor,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FcmVehicle {
    pub id: usize,
    pub class: Arc<VehicleClass>,
    pub position: FuzzyInt,
    pub velocity: FuzzyInt,
    /// Defuzzified initial position; the vehicle's place in a standing queue.
    pub slot: i64,
}

/// Immutable road snapshot at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct FcmState {
    vehicles: Vec<FcmVehicle>,
    road: Road,
    params: FcmParams,
    step: u64,
}

impl FcmState {
    /// Builds the initial state. Vehicles are given upstream first and must
    /// have strictly increasing defuzzified positions.
    pub fn new(
        road: Road,
        params: FcmParams,
        fleet: Vec<(Arc<VehicleClass>, FuzzyInt, FuzzyInt)>,
    ) -> Result<Self, ModelError> {
        if road.length <= 0 {
            return Err(ModelError::InvalidState(format!(
                "road length must be positive, got {}",
                road.length
            )));
        }
        if !(0.0..=1.0).contains(&params.alpha) {
            return Err(ModelError::InvalidState(format!(
                "alpha {} is outside [0, 1]",
                params.alpha
            )));
        }
        if !(0.0..1.0).contains(&params.epsilon) {
            return Err(ModelError::InvalidState(format!(
                "epsilon {} is outside [0, 1)",
                params.epsilon
            )));
        }
        let mut vehicles = Vec::with_capacity(fleet.len());
        for (id, (class, position, velocity)) in fleet.into_iter().enumerate() {
            if velocity.min_value() < 0 {
                return Err(ModelError::InvalidState(format!(
                    "vehicle {id} has negative velocity values {velocity}"
                )));
            }
            let slot = position.argmax();
            if road.boundary == Boundary::Ring && !(0..road.length).contains(&slot) {
                return Err(ModelError::InvalidState(format!(
                    "vehicle {id} at cell {slot} is off the ring of {} cells",
                    road.length
                )));
            }
            if let Some(prev) = vehicles.last().map(|v: &FcmVehicle| v.slot) {
                if slot <= prev {
                    return Err(ModelError::InvalidState(format!(
                        "vehicle {id} at cell {slot} is not downstream of vehicle {} at cell {prev}",
                        id - 1
                    )));
                }
            }
            vehicles.push(FcmVehicle {
                id,
                class,
                position,
                velocity,
                slot,
            });
        }
        Ok(Self {
            vehicles,
            road,
            params,
            step: 0,
        })
    }

    pub fn vehicles(&self) -> &[FcmVehicle] {
        &self.vehicles
    }

    pub fn road(&self) -> Road {
        self.road
    }

    pub fn params(&self) -> FcmParams {
        self.params
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Downstream neighbours of vehicle `n` with the shift that places them
    /// ahead in unwrapped coordinates.
    fn leaders(&self, n: usize) -> Vec<(usize, i64)> {
        let count = self.vehicles.len();
        match (self.road.boundary, self.params.gap_mode) {
            (Boundary::Open, GapMode::Successor) => {
                (n + 1 < count).then_some((n + 1, 0)).into_iter().collect()
            }
            (Boundary::Open, GapMode::AllAhead) => (n + 1..count).map(|m| (m, 0)).collect(),
            (Boundary::Ring, GapMode::Successor) => {
                let m = (n + 1) % count;
                vec![(m, if m <= n { self.road.length } else { 0 })]
            }
            (Boundary::Ring, GapMode::AllAhead) => {
                if count == 1 {
                    return vec![(n, self.road.length)];
                }
                (1..count)
                    .map(|k| {
                        let m = (n + k) % count;
                        (m, if m < n { self.road.length } else { 0 })
                    })
                    .collect()
            }
        }
    }

    /// Free cells in front of vehicle `n`; the maximal velocity when no
    /// vehicle is ahead.
    pub fn gap(&self, n: usize) -> FuzzyInt {
        let me = &self.vehicles[n];
        let terms: Vec<FuzzyInt> = self
            .leaders(n)
            .into_iter()
            .map(|(m, shift)| {
                let leader = &self.vehicles[m];
                gap_to(
                    &leader.position.shift(shift),
                    &leader.class.length,
                    &me.position,
                )
            })
            .collect();
        let refs: Vec<&FuzzyInt> = terms.iter().collect();
        ext_min(&refs).unwrap_or_else(|| me.class.v_max.clone())
    }

    pub fn update_velocity(&self, n: usize) -> FuzzyInt {
        let me = &self.vehicles[n];
        velocity_rule(&me.velocity, &me.class.accel, &self.gap(n), &me.class.v_max)
    }

    /// New `(velocity, position)` of vehicle `n`, computed from this snapshot only.
    pub fn vehicle_update(&self, n: usize) -> (FuzzyInt, FuzzyInt) {
        let me = &self.vehicles[n];
        let velocity = self.update_velocity(n);
        let e = dilation_exponent(&velocity, &me.class.v_max, self.params.alpha)
            .expect("vehicle classes are validated non-degenerate");
        let position = advance_position(&me.position, &velocity, e, self.params.epsilon)
            .expect("exponent lies in (0, 1]");
        (velocity, position)
    }

    /// Parallel update of every vehicle.
    pub fn step(&self) -> FcmState {
        let updates: Vec<_> = (0..self.vehicles.len())
            .map(|n| self.vehicle_update(n))
            .collect();
        self.with_updates(updates)
    }

    /// Assembles the next state from per-vehicle `(velocity, position)` results.
    pub fn with_updates(&self, updates: Vec<(FuzzyInt, FuzzyInt)>) -> FcmState {
        assert_eq!(updates.len(), self.vehicles.len());
        let vehicles = self
            .vehicles
            .iter()
            .zip(updates)
            .map(|(v, (velocity, position))| FcmVehicle {
                velocity,
                position,
                ..v.clone()
            })
            .collect();
        FcmState {
            vehicles,
            road: self.road,
            params: self.params,
            step: self.step + 1,
        }
    }

    /// Fuzzy set of vehicles occupying cell `c`, as `(vehicle id, grade)`.
    pub fn cell_occupancy(&self, c: usize) -> Vec<(usize, f64)> {
        self.vehicles
            .iter()
            .filter_map(|v| {
                let g = self.position_grade_at_cell(&v.position, c);
                (g > 0.0).then_some((v.id, g))
            })
            .collect()
    }

    /// Per cell, the largest membership of any vehicle position.
    pub fn cell_grades(&self) -> Vec<f64> {
        let mut cells = vec![0.0; self.road.length as usize];
        for v in &self.vehicles {
            for (x, g) in v.position.entries() {
                if let Some(c) = self.road.cell_of(x) {
                    cells[c] = f64::max(cells[c], g);
                }
            }
        }
        cells
    }

    fn position_grade_at_cell(&self, position: &FuzzyInt, c: usize) -> f64 {
        match self.road.boundary {
            Boundary::Open => position.grade(c as i64),
            Boundary::Ring => position
                .entries()
                .filter(|&(x, _)| x.rem_euclid(self.road.length) == c as i64)
                .map(|(_, g)| g)
                .fold(0.0, f64::max),
        }
    }
}

/// Gap term for one leader, over support pairs with the leader strictly ahead.
///
/// Pairs not ahead are excluded. If no pair is ahead the gap is `{1/0}`; if
/// the remaining pairs reach no full membership, the excluded pairs count as
/// zero free cells so that the result stays normal.
pub fn gap_to(leader: &FuzzyInt, leader_length: &FuzzyInt, follower: &FuzzyInt) -> FuzzyInt {
    let diff = leader.as_set().ext_sub(follower.as_set());
    let ahead = diff.restrict_from(1);
    if ahead.is_empty() {
        return FuzzyInt::crisp(0);
    }
    let mut gap = ahead.ext_sub(leader_length.as_set()).clamp_below(0);
    if gap.height() < 1.0 {
        gap.raise_grade(0, diff.height_upto(0));
    }
    FuzzyInt::try_from(gap).expect("the difference peak is either ahead or not ahead")
}

/// `min(V + A, G, V_max)` with negative values merged into 0.
pub fn velocity_rule(
    velocity: &FuzzyInt,
    accel: &FuzzyInt,
    gap: &FuzzyInt,
    v_max: &FuzzyInt,
) -> FuzzyInt {
    let accelerated = velocity + accel;
    ext_min(&[&accelerated, gap, v_max])
        .expect("three operands")
        .clamp_below(0)
}

/// `e = alpha + (1 - alpha) * argmax(V) / argmax(V_max)`, kept in (0, 1].
pub fn dilation_exponent(
    velocity: &FuzzyInt,
    v_max: &FuzzyInt,
    alpha: f64,
) -> Result<f64, ModelError> {
    let top = v_max.argmax();
    if top == 0 {
        return Err(ModelError::DegenerateClass(v_max.to_string()));
    }
    if velocity.argmax() >= top {
        return Ok(1.0);
    }
    let e = alpha + (1.0 - alpha) / top as f64 * velocity.argmax() as f64;
    Ok(e.clamp(f64::EPSILON, 1.0))
}

/// `truncate(dil(P + V, e), epsilon)`.
pub fn advance_position(
    position: &FuzzyInt,
    velocity: &FuzzyInt,
    e: f64,
    epsilon: f64,
) -> Result<FuzzyInt, FuzzyError> {
    Ok((position + velocity).dilate(e)?.truncate(epsilon))
}
