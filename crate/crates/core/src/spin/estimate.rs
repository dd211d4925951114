use serde::Serialize;

use crate::error::{Error, Result};
use crate::spin::ground::ground_state;
use crate::spin::metropolis::{z_ratio, MetropolisOptions};
use crate::spin::params::{ActionParams, Variant};
use crate::spin::partition::exact_partition;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum EntropyMethod {
    ExactEnumeration,
    GroundState,
    MonteCarlo { steps: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyEstimate {
    pub value: f64,
    /// `None` for exact or heuristic values.
    pub stderr: Option<f64>,
    /// "exact", "heuristic" or "statistical".
    pub label: &'static str,
    pub method: EntropyMethod,
}

/// `S_n = log(Z̄_1 / Z̄_0) / (1 − n)` by the chosen method.
pub fn entropy_estimate(params: &ActionParams, method: EntropyMethod) -> Result<EntropyEstimate> {
    let k = params.n() as f64 - 1.0;
    match method {
        EntropyMethod::ExactEnumeration => {
            let z1 = exact_partition(params, Variant::Z1)?;
            let z0 = exact_partition(params, Variant::Z0)?;
            Ok(EntropyEstimate {
                value: -(z1.log_z - z0.log_z) / k,
                stderr: None,
                label: "exact",
                method,
            })
        }
        EntropyMethod::GroundState => {
            let g1 = ground_state(params, Variant::Z1)?;
            let g0 = ground_state(params, Variant::Z0)?;
            Ok(EntropyEstimate {
                value: (g1.action - g0.action) / k,
                stderr: None,
                label: if g1.exact && g0.exact {
                    "exact"
                } else {
                    "heuristic"
                },
                method,
            })
        }
        EntropyMethod::MonteCarlo { steps, seed } => {
            let ratio = z_ratio(params, &MetropolisOptions::new(steps, seed))?;
            if ratio.mean.is_nan() || ratio.mean <= 0.0 {
                return Err(Error::InvalidArgument(
                    "Monte Carlo ratio is not positive; run longer".into(),
                ));
            }
            Ok(EntropyEstimate {
                value: -ratio.mean.ln() / k,
                stderr: Some(ratio.stderr / (ratio.mean * k)),
                label: "statistical",
                method,
            })
        }
    }
}
