//! Classical actions. Every action is in natural-log units and keeps all
//! constants, so `Σ_configs e^{−A}` is the literal Haar average.

use crate::error::{Error, Result};
use crate::lattice::{wall_decomposition, PermConfig, SpinConfig};
use crate::spin::oracle::{solution_count_oracle, OracleLimits, OracleMethod};
use crate::spin::params::{ActionParams, Variant, WeightMode};

fn check_spin(config: &SpinConfig, params: &ActionParams) -> Result<()> {
    if config.len() != params.num_sites() {
        return Err(Error::ShapeMismatch(format!(
            "configuration has {} sites, lattice has {}",
            config.len(),
            params.num_sites()
        )));
    }
    if params.n() != 2 {
        return Err(Error::InvalidArgument(format!(
            "Ising spins describe two replicas, params have n = {}",
            params.n()
        )));
    }
    Ok(())
}

fn check_perm(config: &PermConfig, params: &ActionParams) -> Result<()> {
    if config.len() != params.num_sites() || config.n() != params.n() {
        return Err(Error::ShapeMismatch(format!(
            "configuration (N = {}, n = {}) does not match params (N = {}, n = {})",
            config.len(),
            config.n(),
            params.num_sites(),
            params.n()
        )));
    }
    Ok(())
}

fn symmetric_group_order(params: &ActionParams) -> Result<f64> {
    match params.group() {
        Some(g) => Ok(g.order() as f64),
        None => Err(Error::MissingSymmetry),
    }
}

/// `A = −Σ_x ½ log d_x (3+s_x h_x) − Σ_{x∼y} ½ log D_xy (3+s_x s_y) + Σ_x log(D_x² + D_x)`.
pub fn ising_action(config: &SpinConfig, params: &ActionParams, variant: Variant) -> Result<f64> {
    if params.group().is_some() {
        return Err(Error::SymmetryNotAllowed(
            "use modified_action with a symmetry group".into(),
        ));
    }
    check_spin(config, params)?;
    Ok(ising_terms(config, params, variant))
}

fn ising_terms(config: &SpinConfig, params: &ActionParams, variant: Variant) -> f64 {
    let mut a = 0.0;
    for x in 0..params.num_sites() {
        let sh = (config.get(x) * params.field_spin(x, variant)) as f64;
        a -= 0.5 * (params.phys_dims()[x] as f64).ln() * (3.0 + sh);
        let dx = params.log_site_dim(x).exp();
        a += (dx * dx + dx).ln();
    }
    for (e, &(x, y)) in params.lattice().edges().iter().enumerate() {
        let ss = (config.get(x) * config.get(y)) as f64;
        a -= 0.5 * (params.bond_dims()[e] as f64).ln() * (3.0 + ss);
    }
    a
}

/// Ising action plus the wall term: `− (2 + η − 2N) log|G|`.
pub fn modified_action(
    config: &SpinConfig,
    params: &ActionParams,
    variant: Variant,
) -> Result<f64> {
    let g = symmetric_group_order(params)?;
    check_spin(config, params)?;
    let eta = wall_decomposition(config, params.lattice()).eta() as f64;
    let n_sites = params.num_sites() as f64;
    Ok(ising_terms(config, params, variant) - (2.0 + eta - 2.0 * n_sites) * g.ln())
}

/// Site and edge terms shared by every `Sym_n` action:
/// `−Σ_x log d_x χ(Γ_x⁻¹h_x) − Σ_{x∼y} log D_xy χ(Γ_x⁻¹Γ_y) + Σ_x log C_{n,x}`.
fn replica_terms(config: &PermConfig, params: &ActionParams, variant: Variant) -> f64 {
    let r = params.replicas();
    let mut a = 0.0;
    for x in 0..params.num_sites() {
        let chi = r.relative_cycles(config.get(x), params.field_perm(x, variant)) as f64;
        a -= (params.phys_dims()[x] as f64).ln() * chi;
        a += params.log_c(x);
    }
    for (e, &(x, y)) in params.lattice().edges().iter().enumerate() {
        let chi = r.relative_cycles(config.get(x), config.get(y)) as f64;
        a -= (params.bond_dims()[e] as f64).ln() * chi;
    }
    a
}

/// `Sym_n` action with the wall formula:
/// `A = −Σ_x log d_x χ(Γ_x⁻¹h_x) − Σ log D_xy χ(Γ_x⁻¹Γ_y) + Σ_x log C_{n,x}
///      + (nN − n + Σ_walls (χ_wall − n)) log|G|`.
///
/// The edge term is written with `χ` rather than `χ − n`; the two differ by the
/// constant `n Σ log D_xy`, kept here so that `n = 2` matches `modified_action`.
/// Without a symmetry group the `|G|` terms vanish.
pub fn symn_action(config: &PermConfig, params: &ActionParams, variant: Variant) -> Result<f64> {
    check_perm(config, params)?;
    let mut a = replica_terms(config, params, variant);
    if let Some(g) = params.group() {
        let n = params.n() as f64;
        let walls = wall_decomposition(config, params.lattice());
        let wall_sum: f64 = walls
            .walls
            .iter()
            .map(|w| walls.wall_cycle_count(w, config, params.replicas()) as f64 - n)
            .sum();
        a += (n * params.num_sites() as f64 - n + wall_sum) * (g.order() as f64).ln();
    }
    Ok(a)
}

/// `Sym_n` action with the exact solution count in place of the wall formula:
/// `A = (replica terms) + nN log|G| − log(count)`.
pub fn oracle_action(
    config: &PermConfig,
    params: &ActionParams,
    variant: Variant,
    limits: &OracleLimits,
) -> Result<f64> {
    check_perm(config, params)?;
    let group = params.group().ok_or(Error::MissingSymmetry)?;
    let count = solution_count_oracle(
        config,
        group,
        params.lattice(),
        params.replicas(),
        OracleMethod::Clusters,
        limits,
    )?;
    let n = params.n() as f64;
    let q = (group.order() as f64).ln();
    Ok(
        replica_terms(config, params, variant) + n * params.num_sites() as f64 * q
            - (count as f64).ln(),
    )
}

/// The action the model actually samples: the `|G|` part follows the weight mode.
pub fn action(config: &PermConfig, params: &ActionParams, variant: Variant) -> Result<f64> {
    match (params.group(), params.weight_mode()) {
        (Some(_), WeightMode::Oracle) => {
            oracle_action(config, params, variant, &OracleLimits::default())
        }
        _ => symn_action(config, params, variant),
    }
}
