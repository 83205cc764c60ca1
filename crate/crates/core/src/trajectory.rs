use serde::{Deserialize, Serialize};

use crate::objective::Point;

/// One logged iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub k: usize,
    pub x: Vec<f64>,
    pub f: f64,
    pub grad_norm: f64,
    /// Theoretical bound on the run's measured quantity at this k, when known.
    pub envelope: Option<f64>,
    pub wall_nanos: u64,
}

/// Iterates of one optimizer run, in order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub records: Vec<Record>,
}

impl Trajectory {
    pub fn push(&mut self, x: &Point, f: f64, grad: &Point, envelope: Option<f64>, wall_nanos: u64) {
        let k = self.records.len();
        self.records.push(Record {
            k,
            x: x.iter().copied().collect(),
            f,
            grad_norm: grad.norm(),
            envelope,
            wall_nanos,
        });
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&Record> {
        self.records.last()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.f)
    }

    /// Zero out the wall-clock column so output is reproducible byte for byte.
    pub fn strip_timing(&mut self) {
        for r in &mut self.records {
            r.wall_nanos = 0;
        }
    }
}

/// Monotone clock used for the `wall_nanos` column.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Stopwatch(std::time::Instant);

impl Stopwatch {
    pub fn start() -> Self {
        Self(std::time::Instant::now())
    }

    pub fn nanos(&self) -> u64 {
        self.0.elapsed().as_nanos() as u64
    }
}
