//! Scenario-level runs shared by the command line and the tests.

use crate::fcm::{FcmState, ModelError};
use crate::metrics::{empirical_queue_distribution, queue_length, QueueSeries};
use crate::nasch::{monte_carlo, Ensemble, NaschError};
use crate::sim_io::output::SpacetimeImage;
use crate::sim_io::scenario::Scenario;

/// States `0..=steps` of one fuzzy run.
#[derive(Debug, Clone)]
pub struct FcmRun {
    pub states: Vec<FcmState>,
}

impl FcmRun {
    pub fn queue_series(&self) -> QueueSeries {
        QueueSeries::Fuzzy(self.states.iter().map(queue_length).collect())
    }

    pub fn spacetime(&self) -> SpacetimeImage {
        SpacetimeImage::from_fcm(&self.states)
    }
}

pub fn run_fcm(scenario: &Scenario) -> Result<FcmRun, ModelError> {
    let mut state = scenario.fcm_state()?;
    let mut states = Vec::with_capacity(scenario.config.steps + 1);
    for _ in 0..scenario.config.steps {
        let next = state.step();
        states.push(state);
        state = next;
    }
    states.push(state);
    Ok(FcmRun { states })
}

/// Space-time image of the single NaSch run seeded with the base seed.
pub fn nasch_spacetime(scenario: &Scenario) -> Result<SpacetimeImage, NaschError> {
    let mut state = scenario.nasch_state(scenario.config.nasch.base_seed)?;
    let mut img = SpacetimeImage::new(scenario.config.road_length as usize);
    img.push_nasch(&state);
    for _ in 0..scenario.config.steps {
        state.step();
        img.push_nasch(&state);
    }
    Ok(img)
}

/// The configured NaSch ensemble; flow is counted at the boundary after cell 0.
pub fn nasch_ensemble(scenario: &Scenario) -> Result<Ensemble, NaschError> {
    let first = scenario.nasch_state(scenario.config.nasch.base_seed)?;
    let n = &scenario.config.nasch;
    Ok(monte_carlo(
        |seed| {
            if seed == n.base_seed {
                first.clone()
            } else {
                scenario
                    .nasch_state(seed)
                    .expect("same fleet as the validated first run")
            }
        },
        scenario.config.steps,
        n.runs,
        n.base_seed,
        0,
    ))
}

pub fn nasch_queue_series(ensemble: &Ensemble) -> QueueSeries {
    QueueSeries::Empirical(empirical_queue_distribution(ensemble))
}
