//! Per-iteration operation counts and latency.

use crate::error::{Error, Result};
use crate::tanner::TannerGraph;

/// Operations and sequential time steps for one decoding iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCount {
    pub additions: u64,
    pub multiplications: u64,
    pub comparisons: u64,
    pub latency_steps: u64,
}

impl OpCount {
    pub fn total(&self) -> u64 {
        self.additions + self.multiplications + self.comparisons
    }
}

impl std::ops::Add for OpCount {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            additions: self.additions + o.additions,
            multiplications: self.multiplications + o.multiplications,
            comparisons: self.comparisons + o.comparisons,
            latency_steps: self.latency_steps.max(o.latency_steps),
        }
    }
}

/// How check-node sign multiplications are counted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MultiplicationCount {
    /// Two per check node.
    #[default]
    PerCheck,
    /// One per outgoing edge.
    PerEdge,
}

/// Min-sum flooding on a sparse graph: `2 d_c` comparisons and two
/// multiplications per check, `d_v` additions per variable, two steps.
pub fn count_snnd(graph: &TannerGraph) -> OpCount {
    count_snnd_with(graph, MultiplicationCount::PerCheck)
}

pub fn count_snnd_with(graph: &TannerGraph, mults: MultiplicationCount) -> OpCount {
    let edges = graph.num_edges() as u64;
    let checks = graph.num_checks() as u64;
    OpCount {
        additions: (0..graph.num_variables()).map(|v| graph.var_degree(v) as u64).sum(),
        multiplications: match mults {
            MultiplicationCount::PerCheck => 2 * checks,
            MultiplicationCount::PerEdge => edges,
        },
        comparisons: (0..graph.num_checks()).map(|c| 2 * graph.check_degree(c) as u64).sum(),
        latency_steps: if checks == 0 { 0 } else { 2 },
    }
}

/// Stage-based polar BP: `2 log2 N` stage updates of `N` operations of each
/// kind, one stage per time step.
pub fn count_conventional_bp(length: usize) -> Result<OpCount> {
    if length < 2 || !length.is_power_of_two() {
        return Err(Error::InvalidParameter(format!("code length {length} is not a power of two")));
    }
    let stages = 2 * u64::from(length.trailing_zeros());
    let per = stages * length as u64;
    Ok(OpCount {
        additions: per,
        multiplications: per,
        comparisons: per,
        latency_steps: stages,
    })
}

/// Savings of one decoder relative to a baseline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reduction {
    /// `100 · (1 - total / baseline_total)`.
    pub operations_pct: f64,
    /// `latency / baseline_latency`.
    pub latency_ratio: f64,
}

pub fn reduction_report(ours: &OpCount, baseline: &OpCount) -> Result<Reduction> {
    if baseline.total() == 0 || baseline.latency_steps == 0 {
        return Err(Error::InvalidParameter("empty baseline".into()));
    }
    Ok(Reduction {
        operations_pct: 100.0 * (1.0 - ours.total() as f64 / baseline.total() as f64),
        latency_ratio: ours.latency_steps as f64 / baseline.latency_steps as f64,
    })
}
