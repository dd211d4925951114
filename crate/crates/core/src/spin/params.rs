use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, ReplicaGroup};
use crate::lattice::{RegionSpec, SquareLattice};

/// Which boundary field: `Z0` has the identity everywhere, `Z1` pins the
/// cyclic permutation inside the region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Z0,
    Z1,
}

/// How the `|G|`-dependent weight is evaluated in symmetric mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// Closed form in the wall count.
    #[default]
    Formula,
    /// Exact count of constraint solutions.
    Oracle,
}

#[derive(Debug, Clone)]
pub struct ActionParams {
    lattice: SquareLattice,
    phys_dims: Vec<usize>,
    bond_dims: Vec<usize>,
    group: Option<FiniteGroup>,
    replicas: ReplicaGroup,
    region: RegionSpec,
    weight_mode: WeightMode,
    log_c: Vec<f64>,
}

impl ActionParams {
    pub fn new(
        lattice: SquareLattice,
        phys_dims: Vec<usize>,
        bond_dims: Vec<usize>,
        group: Option<FiniteGroup>,
        n: usize,
        region: RegionSpec,
    ) -> Result<Self> {
        let sites = lattice.num_sites();
        if phys_dims.len() != sites || bond_dims.len() != lattice.num_edges() {
            return Err(Error::ShapeMismatch(format!(
                "need {sites} physical and {} bond dimensions, got {} and {}",
                lattice.num_edges(),
                phys_dims.len(),
                bond_dims.len()
            )));
        }
        if phys_dims.contains(&0) || bond_dims.contains(&0) {
            return Err(Error::InvalidArgument("dimensions must be positive".into()));
        }
        if region.mask().len() != sites {
            return Err(Error::ShapeMismatch(format!(
                "region covers {} sites, lattice has {sites}",
                region.mask().len()
            )));
        }
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "replica count must be at least 2, got {n}"
            )));
        }
        // The trivial group imposes nothing, so any bond dimension is allowed.
        if let Some(g) = group.as_ref().filter(|g| !g.is_trivial()) {
            if let Some(&bad) = bond_dims.iter().find(|&&d| d != g.order()) {
                return Err(Error::BondDimensionMismatch {
                    group_order: g.order(),
                    found: bad,
                });
            }
        }
        let replicas = ReplicaGroup::new(n)?;
        let log_c = (0..sites)
            .map(|x| {
                let dx = phys_dims[x] as f64
                    * lattice
                        .incident_edges(x)
                        .iter()
                        .map(|&e| bond_dims[e] as f64)
                        .product::<f64>();
                (0..n).map(|k| (dx + k as f64).ln()).sum()
            })
            .collect();
        Ok(ActionParams {
            lattice,
            phys_dims,
            bond_dims,
            group,
            replicas,
            region,
            weight_mode: WeightMode::Formula,
            log_c,
        })
    }

    pub fn uniform(
        lattice: SquareLattice,
        d: usize,
        bond: usize,
        group: Option<FiniteGroup>,
        n: usize,
        region: RegionSpec,
    ) -> Result<Self> {
        let phys = vec![d; lattice.num_sites()];
        let bonds = vec![bond; lattice.num_edges()];
        Self::new(lattice, phys, bonds, group, n, region)
    }

    pub fn with_weight_mode(mut self, mode: WeightMode) -> Self {
        self.weight_mode = mode;
        self
    }

    pub fn with_region(mut self, region: RegionSpec) -> Result<Self> {
        if region.mask().len() != self.lattice.num_sites() {
            return Err(Error::ShapeMismatch(
                "region does not match the lattice".into(),
            ));
        }
        self.region = region;
        Ok(self)
    }

    pub fn lattice(&self) -> &SquareLattice {
        &self.lattice
    }

    pub fn num_sites(&self) -> usize {
        self.lattice.num_sites()
    }

    pub fn phys_dims(&self) -> &[usize] {
        &self.phys_dims
    }

    pub fn bond_dims(&self) -> &[usize] {
        &self.bond_dims
    }

    pub fn group(&self) -> Option<&FiniteGroup> {
        self.group.as_ref()
    }

    /// `|G|`, or 1 without a symmetry.
    pub fn group_order(&self) -> usize {
        self.group.as_ref().map_or(1, FiniteGroup::order)
    }

    pub fn replicas(&self) -> &ReplicaGroup {
        &self.replicas
    }

    pub fn n(&self) -> usize {
        self.replicas.n()
    }

    pub fn region(&self) -> &RegionSpec {
        &self.region
    }

    pub fn weight_mode(&self) -> WeightMode {
        self.weight_mode
    }

    /// `log D_x` with `D_x = d_x · Π_{incident edges} D_xy`.
    pub fn log_site_dim(&self, x: usize) -> f64 {
        (self.phys_dims[x] as f64).ln()
            + self
                .lattice
                .incident_edges(x)
                .iter()
                .map(|&e| (self.bond_dims[e] as f64).ln())
                .sum::<f64>()
    }

    /// `log C_{n,x} = log[D_x (D_x+1) ⋯ (D_x+n−1)]`.
    pub fn log_c(&self, x: usize) -> f64 {
        self.log_c[x]
    }

    /// Ising field `h_x`.
    pub fn field_spin(&self, x: usize, variant: Variant) -> i8 {
        match variant {
            Variant::Z1 if self.region.contains(x) => -1,
            _ => 1,
        }
    }

    /// Replica-group index of the boundary permutation at `x`.
    pub fn field_perm(&self, x: usize, variant: Variant) -> usize {
        match variant {
            Variant::Z1 if self.region.contains(x) => self.replicas.cyclic(),
            _ => self.replicas.identity(),
        }
    }

    /// Number of configurations `(n!)^N`, saturating.
    pub fn config_count(&self) -> u128 {
        (self.replicas.order() as u128)
            .checked_pow(self.num_sites() as u32)
            .unwrap_or(u128::MAX)
    }
}
