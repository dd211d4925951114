//! Single-site Metropolis sampling of the replica spin model. Every proposal
//! recomputes the full action, so the non-local wall term is always exact.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{wall_decomposition, PermConfig};
use crate::rng;
use crate::spin::action::action;
use crate::spin::params::{ActionParams, Variant};
use crate::stats::{batch_means, MeanError};

#[derive(Debug, Clone, Copy)]
pub struct MetropolisOptions {
    pub steps: u64,
    pub burn_in: u64,
    /// Temperature scale `τ`; the weight is `e^{−A/τ}`.
    pub tau: f64,
    pub seed: u64,
    pub batches: usize,
}

impl MetropolisOptions {
    pub fn new(steps: u64, seed: u64) -> Self {
        MetropolisOptions {
            steps,
            burn_in: steps / 10,
            tau: 1.0,
            seed,
            batches: 50,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MetropolisResult {
    pub mean_action: MeanError,
    /// Fraction of sites carrying the identity.
    pub magnetization: MeanError,
    pub wall_histogram: BTreeMap<usize, u64>,
    pub acceptance: f64,
    #[serde(skip)]
    pub final_config: PermConfig,
    #[serde(skip)]
    pub min_config: PermConfig,
    pub min_action: f64,
}

/// Runs a chain from `start` and calls `observe(config, action)` after each
/// post-burn-in step.
pub fn run_chain<F>(
    params: &ActionParams,
    variant: Variant,
    opts: &MetropolisOptions,
    start: PermConfig,
    mut observe: F,
) -> Result<(PermConfig, f64, u64, PermConfig, f64)>
where
    F: FnMut(&PermConfig, f64),
{
    if !opts.tau.is_finite() || opts.tau <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "temperature scale must be positive, got {}",
            opts.tau
        )));
    }
    let sites = params.num_sites();
    let q = params.replicas().order();
    let mut rng = rng::stream(opts.seed, 0);
    let mut config = start;
    let mut current = action(&config, params, variant)?;
    let mut best = (config.clone(), current);
    let mut accepted = 0u64;
    for step in 0..opts.burn_in + opts.steps {
        let x = rng.random_range(0..sites);
        let old = config.get(x);
        // Uniform over the other q − 1 labels: a symmetric proposal.
        let mut new = rng.random_range(0..q - 1);
        if new >= old {
            new += 1;
        }
        config.set(x, new);
        let proposed = action(&config, params, variant)?;
        let delta = (proposed - current) / opts.tau;
        let u: f64 = rng.random();
        if delta <= 0.0 || u < (-delta).exp() {
            current = proposed;
            accepted += 1;
            if current < best.1 {
                best = (config.clone(), current);
            }
        } else {
            config.set(x, old);
        }
        if step >= opts.burn_in {
            observe(&config, current);
        }
    }
    Ok((config, current, accepted, best.0, best.1))
}

/// Samples the model and reports `⟨A⟩`, the identity fraction and the wall-count histogram.
pub fn metropolis(
    params: &ActionParams,
    variant: Variant,
    opts: &MetropolisOptions,
) -> Result<MetropolisResult> {
    if params.replicas().order() < 2 {
        return Err(Error::InvalidArgument("need at least two labels".into()));
    }
    let mut actions = Vec::with_capacity(opts.steps as usize);
    let mut mags = Vec::with_capacity(opts.steps as usize);
    let mut hist = BTreeMap::new();
    let identity = params.replicas().identity();
    let start = PermConfig::identity(params.replicas(), params.num_sites());
    let lattice = params.lattice();
    let (final_config, _, accepted, min_config, min_action) =
        run_chain(params, variant, opts, start, |c, a| {
            actions.push(a);
            let up = c.values().iter().filter(|&&v| v == identity).count();
            mags.push(up as f64 / c.len() as f64);
            *hist
                .entry(wall_decomposition(c, lattice).eta())
                .or_insert(0u64) += 1;
        })?;
    Ok(MetropolisResult {
        mean_action: batch_means(&actions, opts.batches),
        magnetization: batch_means(&mags, opts.batches),
        wall_histogram: hist,
        acceptance: accepted as f64 / (opts.burn_in + opts.steps).max(1) as f64,
        final_config,
        min_config,
        min_action,
    })
}

/// `Z1/Z0 = ⟨e^{−(A1 − A0)}⟩` over the `Z0` chain at `τ = 1`, with batch-means errors.
pub fn z_ratio(params: &ActionParams, opts: &MetropolisOptions) -> Result<MeanError> {
    if opts.tau != 1.0 {
        return Err(Error::InvalidArgument(
            "the ratio estimator needs tau = 1".into(),
        ));
    }
    let mut xs = Vec::with_capacity(opts.steps as usize);
    let mut err = None;
    let start = PermConfig::identity(params.replicas(), params.num_sites());
    run_chain(params, Variant::Z0, opts, start, |c, a0| {
        match action(c, params, Variant::Z1) {
            Ok(a1) => xs.push((a0 - a1).exp()),
            Err(e) => err = Some(e),
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(batch_means(&xs, opts.batches))
}
