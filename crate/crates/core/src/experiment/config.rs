use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::lattice::{build_lattice, Boundary, RegionDescriptor, RegionSpec, SquareLattice};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Exactness,
    Oracle,
    Arealaw,
    Fluctuation,
    Renyi,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Exactness => "exactness",
            ExperimentKind::Oracle => "oracle",
            ExperimentKind::Arealaw => "arealaw",
            ExperimentKind::Fluctuation => "fluctuation",
            ExperimentKind::Renyi => "renyi",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub width: usize,
    pub height: usize,
    #[serde(default = "default_boundary")]
    pub boundary: Boundary,
}

fn default_boundary() -> Boundary {
    Boundary::Open
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Budgets {
    /// Largest physical Hilbert-space dimension contracted exactly.
    pub max_state_dim: u64,
    /// Largest number of spin configurations enumerated.
    pub max_configs: u64,
    /// Largest brute-force assignment count for oracle cross-checks.
    pub max_brute: u64,
    pub max_samples: u64,
    pub max_steps: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            max_state_dim: 1 << 16,
            max_configs: 1_679_616,
            max_brute: 1 << 26,
            max_samples: 1_000_000,
            max_steps: 100_000_000,
        }
    }
}

impl Budgets {
    fn exceeds_default(&self) -> Option<&'static str> {
        let d = Budgets::default();
        if self.max_state_dim > d.max_state_dim {
            Some("max_state_dim")
        } else if self.max_configs > d.max_configs {
            Some("max_configs")
        } else if self.max_brute > d.max_brute {
            Some("max_brute")
        } else if self.max_samples > d.max_samples {
            Some("max_samples")
        } else if self.max_steps > d.max_steps {
            Some("max_steps")
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub kind: ExperimentKind,
    pub lattice: LatticeConfig,
    /// `"Z<k>"` or `"S<k>"`; absent means no symmetry.
    #[serde(default)]
    pub group: Option<String>,
    #[serde(default = "two")]
    pub d: usize,
    #[serde(default = "two")]
    pub bond_dim: usize,
    /// Bond dimensions scanned by the fluctuation experiment (with `d = D`).
    #[serde(default)]
    pub bond_dims: Vec<usize>,
    #[serde(default)]
    pub regions: Vec<RegionDescriptor>,
    #[serde(default = "two")]
    pub n: usize,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default)]
    pub steps: u64,
    #[serde(default)]
    pub seed: u64,
    /// Also write one CSV row per Haar sample.
    #[serde(default)]
    pub write_samples: bool,
    #[serde(default)]
    pub budgets: Budgets,
}

fn two() -> usize {
    2
}

fn default_samples() -> u64 {
    10_000
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn build_lattice(&self) -> Result<SquareLattice> {
        build_lattice(
            self.lattice.width,
            self.lattice.height,
            self.lattice.boundary,
        )
        .map_err(|e| Error::Config(format!("lattice: {e}")))
    }

    pub fn build_group(&self) -> Result<Option<FiniteGroup>> {
        self.group
            .as_deref()
            .map(|name| {
                FiniteGroup::by_name(name).map_err(|e| Error::Config(format!("group: {e}")))
            })
            .transpose()
    }

    pub fn build_regions(&self, lattice: &SquareLattice) -> Result<Vec<RegionSpec>> {
        self.regions
            .iter()
            .map(|r| {
                r.resolve(lattice)
                    .map_err(|e| Error::Config(format!("region: {e}")))
            })
            .collect()
    }

    /// Short hex digest of the canonical JSON form.
    pub fn params_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Checks the config and its budgets before any computation.
    pub fn validate(&self, budget_override: bool) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if let Some(key) = self.budgets.exceeds_default() {
            if !budget_override {
                return Err(Error::Config(format!(
                    "budgets.{key} is above its default; pass --budget-override to allow it"
                )));
            }
        }
        let lattice = self.build_lattice()?;
        let group = self.build_group()?;
        let regions = self.build_regions(&lattice)?;
        let sites = lattice.num_sites() as u32;
        if self.d == 0 || self.bond_dim == 0 {
            return Err(Error::Config("d and bond_dim must be positive".into()));
        }
        if !(2..=5).contains(&self.n) {
            return Err(Error::Config(format!(
                "n must be between 2 and 5, got {}",
                self.n
            )));
        }
        if let Some(g) = group.as_ref().filter(|g| !g.is_trivial()) {
            let dims: Vec<usize> = if self.kind == ExperimentKind::Fluctuation {
                self.bond_dims.clone()
            } else {
                vec![self.bond_dim]
            };
            if dims.iter().any(|&b| b != g.order()) {
                return Err(Error::Config(format!(
                    "symmetric mode needs bond_dim = |G| = {}, got {dims:?}",
                    g.order()
                )));
            }
        }
        let needs_regions = !matches!(self.kind, ExperimentKind::Oracle);
        if needs_regions && regions.is_empty() {
            return Err(Error::Config("at least one region is required".into()));
        }
        let b = &self.budgets;
        let q = (1..=self.n as u128).product::<u128>();
        let configs = q.checked_pow(sites).unwrap_or(u128::MAX);
        let state_dim = |d: usize| (d as u128).checked_pow(sites).unwrap_or(u128::MAX);
        let over = |what: &str, needed: u128, limit: u64| {
            Err(Error::budget(
                what,
                needed,
                limit as u128,
                "reduce the lattice or dimensions, or raise the budget with --budget-override",
            ))
        };
        match self.kind {
            ExperimentKind::Exactness | ExperimentKind::Renyi => {
                if self.samples < 2 {
                    return Err(Error::Config("samples must be at least 2".into()));
                }
                if self.samples > b.max_samples {
                    return over("samples", self.samples as u128, b.max_samples);
                }
                if state_dim(self.d) > b.max_state_dim as u128 {
                    return over(
                        "physical state dimension",
                        state_dim(self.d),
                        b.max_state_dim,
                    );
                }
                if configs > b.max_configs as u128 {
                    return over("configurations", configs, b.max_configs);
                }
            }
            ExperimentKind::Oracle => {
                if group.is_none() {
                    return Err(Error::Config("the oracle experiment needs a group".into()));
                }
                if configs > b.max_configs as u128 {
                    return over("configurations", configs, b.max_configs);
                }
            }
            ExperimentKind::Arealaw => {
                if configs > b.max_configs as u128 && self.steps == 0 {
                    return over("configurations", configs, b.max_configs);
                }
            }
            ExperimentKind::Fluctuation => {
                if self.bond_dims.is_empty() {
                    return Err(Error::Config(
                        "bond_dims must list at least one value".into(),
                    ));
                }
                if self.samples < 2 {
                    return Err(Error::Config("samples must be at least 2".into()));
                }
                if self.samples > b.max_samples {
                    return over("samples", self.samples as u128, b.max_samples);
                }
                let biggest = *self.bond_dims.iter().max().expect("nonempty");
                if state_dim(biggest) > b.max_state_dim as u128 {
                    return over(
                        "physical state dimension",
                        state_dim(biggest),
                        b.max_state_dim,
                    );
                }
                let spins = 2u128.checked_pow(sites).unwrap_or(u128::MAX);
                if spins > b.max_configs as u128 {
                    return over("configurations", spins, b.max_configs);
                }
            }
        }
        if self.steps > b.max_steps {
            return over("Monte Carlo steps", self.steps as u128, b.max_steps);
        }
        Ok(())
    }
}
