//! Monte Carlo sweep of the error bound over placements, element counts and
//! trials.

use std::time::Instant;

use rayon::prelude::*;
use wgms_core::designer::{design, random_strength_peb, DesignContext, SdpStatus};
use wgms_core::Error as CoreError;

use crate::config::{Config, PlacementKind};
use crate::placement::generate_placement;
use crate::seeds::{Purpose, TrialSeeds};
use crate::HarnessError;

/// One error-bound entry of a row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measure {
    Value(f64),
    /// The Fisher information is singular for this configuration.
    Unobservable,
    /// Not computed: baseline disabled or an earlier stage failed.
    Missing,
}

impl Measure {
    pub fn value(self) -> Option<f64> {
        match self {
            Measure::Value(v) => Some(v),
            _ => None,
        }
    }

    fn from_result(r: &Result<f64, CoreError>) -> Self {
        match r {
            Ok(v) => Measure::Value(*v),
            Err(CoreError::Unobservable { .. }) => Measure::Unobservable,
            Err(_) => Measure::Missing,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub placement: PlacementKind,
    pub elements: usize,
    pub trial: usize,
    /// Root seed of the trial; every random draw derives from it.
    pub seed: u64,
    pub bound: Measure,
    pub achieved: Measure,
    pub fully_digital: Measure,
    pub random_strength: Measure,
    pub status: String,
    /// Seconds, when timing is recorded.
    pub wall_time: Option<f64>,
}

/// Cell key: the placement index and the element count, so adding trials
/// or reordering the element list keeps existing trials unchanged.
pub fn cell_id(placement_index: usize, elements: usize) -> u64 {
    ((placement_index as u64) << 32) | elements as u64
}

fn error_status(e: &CoreError) -> &'static str {
    match e {
        CoreError::Unobservable { .. } => "unobservable",
        CoreError::IllConditioned { .. } | CoreError::SingularMatrix(_) => "ill-conditioned",
        CoreError::Solver(_) => "solver-failed",
        _ => "error",
    }
}

/// Runs one trial; failures end up in the row.
pub fn run_trial(config: &Config, placement_index: usize, elements: usize, trial: usize) -> SweepRow {
    let start = Instant::now();
    let kind = config.sweep.placements[placement_index];
    let seeds = TrialSeeds::new(config.seed, cell_id(placement_index, elements), trial as u64);
    let mut row = SweepRow {
        placement: kind,
        elements,
        trial,
        seed: seeds.trial,
        bound: Measure::Missing,
        achieved: Measure::Missing,
        fully_digital: Measure::Missing,
        random_strength: Measure::Missing,
        status: String::new(),
        wall_time: None,
    };
    row.status = fill_row(config, kind, elements, &seeds, &mut row);
    if config.sweep.record_wall_time {
        row.wall_time = Some(start.elapsed().as_secs_f64());
    }
    row
}

fn fill_row(config: &Config, kind: PlacementKind, elements: usize, seeds: &TrialSeeds, row: &mut SweepRow) -> String {
    let spec = config.placement_spec(kind, elements, seeds.get(Purpose::Placement));
    let panel = match generate_placement(&spec) {
        Ok(p) => p,
        Err(_) => return "placement-failed".into(),
    };
    let scenario = match config.scenario(panel, seeds) {
        Ok(s) => s,
        Err(HarnessError::Core(e)) => return error_status(&e).into(),
        Err(_) => return "error".into(),
    };
    let ctx = match DesignContext::new(&scenario) {
        Ok(c) => c,
        Err(e) => return error_status(&e).into(),
    };
    if config.sweep.baselines.random_strength {
        let r = random_strength_peb(&scenario, &ctx, seeds.get(Purpose::RandomStrengths)).map(|p| p.peb);
        row.random_strength = Measure::from_result(&r);
    }
    match design(&scenario, &ctx, &config.design_options(seeds.get(Purpose::Extraction))) {
        Ok(d) => {
            row.bound = Measure::Value(d.bound);
            row.achieved = Measure::Value(d.achieved.peb);
            if config.sweep.baselines.fully_digital {
                row.fully_digital = Measure::Value(d.fully_digital.peb);
            }
            if !d.passive {
                "not-passive".into()
            } else if d.relaxation.status == SdpStatus::MaxIterations {
                "sdp-max-iterations".into()
            } else {
                "ok".into()
            }
        }
        Err(e) => {
            if matches!(e, CoreError::Unobservable { .. }) {
                row.bound = Measure::Unobservable;
                row.achieved = Measure::Unobservable;
                if config.sweep.baselines.fully_digital {
                    row.fully_digital = Measure::Unobservable;
                }
            }
            error_status(&e).into()
        }
    }
}

/// Every `(placement, N, trial)` of the configuration, in canonical order.
/// Trials run in parallel on the current rayon pool; the result does not
/// depend on its size.
pub fn run_sweep(config: &Config) -> Vec<SweepRow> {
    run_sweep_with_progress(config, |_| {})
}

pub fn run_sweep_with_progress(config: &Config, progress: impl Fn(&SweepRow) + Sync) -> Vec<SweepRow> {
    let sw = &config.sweep;
    let jobs: Vec<(usize, usize, usize)> = (0..sw.placements.len())
        .flat_map(|p| sw.elements.iter().flat_map(move |&n| (0..sw.trials).map(move |t| (p, n, t))))
        .collect();
    // largest panels first for better load balance
    let mut order: Vec<usize> = (0..jobs.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(jobs[i].1));
    let mut rows: Vec<(usize, SweepRow)> = order
        .into_par_iter()
        .map(|i| {
            let (p, n, t) = jobs[i];
            let row = run_trial(config, p, n, t);
            progress(&row);
            (i, row)
        })
        .collect();
    rows.sort_by_key(|(i, _)| *i);
    rows.into_iter().map(|(_, r)| r).collect()
}
