use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Vehicles leave through the downstream end; the lead vehicle sees no obstacle.
    #[default]
    Open,
    /// Closed loop of `length` cells.
    Ring,
}

/// A single lane of `length` cells, numbered from 0 in the driving direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Road {
    pub length: i64,
    pub boundary: Boundary,
}

impl Road {
    pub fn open(length: i64) -> Self {
        Self {
            length,
            boundary: Boundary::Open,
        }
    }

    pub fn ring(length: i64) -> Self {
        Self {
            length,
            boundary: Boundary::Ring,
        }
    }

    /// Cell index shown for an unbounded position, if it lies on the road.
    pub fn cell_of(&self, position: i64) -> Option<usize> {
        match self.boundary {
            Boundary::Ring => Some(position.rem_euclid(self.length) as usize),
            Boundary::Open => (0..self.length)
                .contains(&position)
                .then_some(position as usize),
        }
    }
}
