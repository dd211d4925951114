use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::PermConfig;
use crate::spin::action::action;
use crate::spin::params::{ActionParams, Variant, WeightMode};
use crate::stats::pairwise_sum;

/// Default enumeration limit `6^8`: admits N ≤ 20 for `n = 2` and N ≤ 8 for `n = 3`.
pub const DEFAULT_ENUMERATION_LIMIT: u128 = 1_679_616;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartitionResult {
    pub variant: Variant,
    pub mode: WeightMode,
    pub configs: u64,
    pub log_z: f64,
    /// `F = −log Z`.
    pub free_energy: f64,
    /// Boltzmann average of the action.
    pub mean_action: f64,
    /// Boltzmann variance of the action.
    pub var_action: f64,
}

impl PartitionResult {
    pub fn z(&self) -> f64 {
        self.log_z.exp()
    }
}

pub(crate) fn check_enumeration(params: &ActionParams, limit: u128) -> Result<u64> {
    let total = params.config_count();
    if total > limit {
        return Err(Error::budget(
            "configurations to enumerate",
            total,
            limit,
            "use a smaller lattice, n = 2, or Monte Carlo",
        ));
    }
    Ok(total as u64)
}

/// Actions of every configuration, in index order.
pub fn all_actions(params: &ActionParams, variant: Variant, limit: u128) -> Result<Vec<f64>> {
    let total = check_enumeration(params, limit)?;
    let n_sites = params.num_sites();
    (0..total)
        .into_par_iter()
        .map(|i| {
            action(
                &PermConfig::from_index(params.replicas(), n_sites, i),
                params,
                variant,
            )
        })
        .collect()
}

/// Exact `Z = Σ_configs e^{−A}` by enumeration, in the log domain.
pub fn exact_partition(params: &ActionParams, variant: Variant) -> Result<PartitionResult> {
    exact_partition_with(params, variant, DEFAULT_ENUMERATION_LIMIT)
}

pub fn exact_partition_with(
    params: &ActionParams,
    variant: Variant,
    limit: u128,
) -> Result<PartitionResult> {
    let actions = all_actions(params, variant, limit)?;
    let amin = actions.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = actions.iter().map(|a| (amin - a).exp()).collect();
    let wsum = pairwise_sum(&w);
    let wa: Vec<f64> = w.iter().zip(&actions).map(|(w, a)| w * a).collect();
    let mean = pairwise_sum(&wa) / wsum;
    let wa2: Vec<f64> = w
        .iter()
        .zip(&actions)
        .map(|(w, a)| w * (a - mean) * (a - mean))
        .collect();
    let log_z = -amin + wsum.ln();
    Ok(PartitionResult {
        variant,
        mode: params.weight_mode(),
        configs: actions.len() as u64,
        log_z,
        free_energy: -log_z,
        mean_action: mean,
        var_action: pairwise_sum(&wa2) / wsum,
    })
}
