use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::lattice::PermConfig;
use crate::rng;
use crate::spin::action::action;
use crate::spin::metropolis::{run_chain, MetropolisOptions};
use crate::spin::params::{ActionParams, Variant};

/// Exhaustive search is used up to this many configurations (`2^20`).
pub const EXHAUSTIVE_LIMIT: u128 = 1 << 20;
/// Relative tolerance under which two actions count as tied.
const TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GroundMethod {
    Exhaustive,
    Annealing {
        restarts: u32,
        sweeps: u32,
        seed: u64,
    },
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub config: PermConfig,
    pub action: f64,
    /// False for annealing results, which are heuristic.
    pub exact: bool,
    pub method: GroundMethod,
}

impl GroundState {
    pub fn label(&self) -> &'static str {
        if self.exact {
            "exact"
        } else {
            "heuristic"
        }
    }
}

fn better(a: f64, b: f64) -> bool {
    a < b - TIE * b.abs().max(1.0)
}

/// Exhaustive when the configuration count allows it, annealing otherwise.
pub fn ground_state(params: &ActionParams, variant: Variant) -> Result<GroundState> {
    let method = if params.config_count() <= EXHAUSTIVE_LIMIT {
        GroundMethod::Exhaustive
    } else {
        log::warn!(
            "{} configurations exceed the exhaustive limit; ground state is heuristic",
            params.config_count()
        );
        GroundMethod::Annealing {
            restarts: 8,
            sweeps: 2000,
            seed: 0,
        }
    };
    ground_state_with(params, variant, method)
}

pub fn ground_state_with(
    params: &ActionParams,
    variant: Variant,
    method: GroundMethod,
) -> Result<GroundState> {
    match method {
        GroundMethod::Exhaustive => exhaustive(params, variant),
        GroundMethod::Annealing {
            restarts,
            sweeps,
            seed,
        } => anneal(params, variant, restarts, sweeps, seed),
    }
}

/// Minimum over all configurations; ties go to the lowest index (index 0 is
/// the all-identity configuration).
fn exhaustive(params: &ActionParams, variant: Variant) -> Result<GroundState> {
    let total = crate::spin::partition::check_enumeration(params, EXHAUSTIVE_LIMIT)?;
    let sites = params.num_sites();
    const CHUNK: u64 = 1 << 12;
    let bests = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut best: Option<(u64, f64)> = None;
            for i in c * CHUNK..((c + 1) * CHUNK).min(total) {
                let a = action(
                    &PermConfig::from_index(params.replicas(), sites, i),
                    params,
                    variant,
                )?;
                if best.is_none_or(|(_, b)| better(a, b)) {
                    best = Some((i, a));
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    let (index, value) = bests
        .into_iter()
        .flatten()
        .reduce(|acc, cand| if better(cand.1, acc.1) { cand } else { acc })
        .expect("at least one configuration");
    Ok(GroundState {
        config: PermConfig::from_index(params.replicas(), sites, index),
        action: value,
        exact: true,
        method: GroundMethod::Exhaustive,
    })
}

/// Simulated annealing with a geometric temperature schedule; keeps the best
/// configuration visited over all restarts.
fn anneal(
    params: &ActionParams,
    variant: Variant,
    restarts: u32,
    sweeps: u32,
    seed: u64,
) -> Result<GroundState> {
    let sites = params.num_sites() as u64;
    let stages = 40u32;
    let (t_hi, t_lo): (f64, f64) = (5.0, 0.01);
    let mut best: Option<(PermConfig, f64)> = None;
    for r in 0..restarts {
        let mut config = PermConfig::identity(params.replicas(), params.num_sites());
        for s in 0..stages {
            let tau = t_hi * (t_lo / t_hi).powf(s as f64 / (stages - 1) as f64);
            let opts = MetropolisOptions {
                steps: (sweeps as u64 * sites / stages as u64).max(sites),
                burn_in: 0,
                tau,
                seed: rng::derive_seed(seed, (r as u64) << 32 | s as u64),
                batches: 2,
            };
            let (end, _, _, low, low_a) = run_chain(params, variant, &opts, config, |_, _| {})?;
            config = end;
            if best.as_ref().is_none_or(|(_, b)| better(low_a, *b)) {
                best = Some((low, low_a));
            }
        }
    }
    let (config, value) = best.expect("at least one restart");
    Ok(GroundState {
        config,
        action: value,
        exact: false,
        method: GroundMethod::Annealing {
            restarts,
            sweeps,
            seed,
        },
    })
}
