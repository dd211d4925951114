//! Random (optionally G-symmetric) PEPS on small lattices, exact contraction
//! to a physical state, reduced-density-matrix spectra and Haar averages.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::lattice::{RegionSpec, SquareLattice};
use crate::rng;
use crate::stats::{mean_error, MeanError};
use crate::tensor::{contract, haar_random_state, DenseTensor, C64};

/// Default cap on the physical Hilbert-space dimension `Π d_x`.
pub const DEFAULT_MAX_STATE_DIM: usize = 1 << 16;
/// Default cap on the element count of any contraction intermediate.
pub const DEFAULT_MAX_INTERMEDIATE: usize = 1 << 24;
/// Relative threshold below which a reduced eigenvalue does not count toward the rank.
pub const RANK_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct PepsSpec {
    lattice: SquareLattice,
    phys_dims: Vec<usize>,
    bond_dims: Vec<usize>,
    symmetry: Option<FiniteGroup>,
}

impl PepsSpec {
    pub fn new(
        lattice: SquareLattice,
        phys_dims: Vec<usize>,
        bond_dims: Vec<usize>,
        symmetry: Option<FiniteGroup>,
    ) -> Result<Self> {
        if phys_dims.len() != lattice.num_sites() {
            return Err(Error::ShapeMismatch(format!(
                "{} physical dimensions for {} sites",
                phys_dims.len(),
                lattice.num_sites()
            )));
        }
        if bond_dims.len() != lattice.num_edges() {
            return Err(Error::ShapeMismatch(format!(
                "{} bond dimensions for {} edges",
                bond_dims.len(),
                lattice.num_edges()
            )));
        }
        if phys_dims.contains(&0) || bond_dims.contains(&0) {
            return Err(Error::InvalidArgument("dimensions must be positive".into()));
        }
        if let Some(g) = &symmetry {
            if let Some(&bad) = bond_dims.iter().find(|&&d| d != g.order()) {
                return Err(Error::BondDimensionMismatch {
                    group_order: g.order(),
                    found: bad,
                });
            }
        }
        Ok(PepsSpec {
            lattice,
            phys_dims,
            bond_dims,
            symmetry,
        })
    }

    pub fn uniform(
        lattice: SquareLattice,
        d: usize,
        bond: usize,
        symmetry: Option<FiniteGroup>,
    ) -> Result<Self> {
        let phys = vec![d; lattice.num_sites()];
        let bonds = vec![bond; lattice.num_edges()];
        Self::new(lattice, phys, bonds, symmetry)
    }

    pub fn lattice(&self) -> &SquareLattice {
        &self.lattice
    }

    pub fn phys_dims(&self) -> &[usize] {
        &self.phys_dims
    }

    pub fn bond_dims(&self) -> &[usize] {
        &self.bond_dims
    }

    pub fn symmetry(&self) -> Option<&FiniteGroup> {
        self.symmetry.as_ref()
    }

    /// Shape of a site tensor: one leg per incident edge (ascending edge id), physical leg last.
    pub fn site_shape(&self, site: usize) -> Vec<usize> {
        let mut shape: Vec<usize> = self
            .lattice
            .incident_edges(site)
            .iter()
            .map(|&e| self.bond_dims[e])
            .collect();
        shape.push(self.phys_dims[site]);
        shape
    }

    /// `D_x = d_x · Π_{legs} D_xy`.
    pub fn site_dim(&self, site: usize) -> usize {
        self.site_shape(site).iter().product()
    }

    /// `Π_x d_x`, saturating.
    pub fn state_dim(&self) -> u128 {
        self.phys_dims
            .iter()
            .fold(1u128, |acc, &d| acc.saturating_mul(d as u128))
    }
}

#[derive(Debug, Clone)]
pub struct PepsState {
    spec: PepsSpec,
    site_tensors: Vec<DenseTensor>,
    seed: Option<u64>,
    symmetrized: bool,
}

impl PepsState {
    /// Wraps explicit site tensors, checking their shapes against the spec.
    pub fn from_tensors(spec: PepsSpec, site_tensors: Vec<DenseTensor>) -> Result<Self> {
        if site_tensors.len() != spec.lattice.num_sites() {
            return Err(Error::ShapeMismatch(format!(
                "{} site tensors for {} sites",
                site_tensors.len(),
                spec.lattice.num_sites()
            )));
        }
        for (x, t) in site_tensors.iter().enumerate() {
            let want = spec.site_shape(x);
            if t.shape() != want.as_slice() {
                return Err(Error::ShapeMismatch(format!(
                    "site {x}: tensor shape {:?}, expected {want:?}",
                    t.shape()
                )));
            }
        }
        Ok(PepsState {
            spec,
            site_tensors,
            seed: None,
            symmetrized: false,
        })
    }

    pub fn spec(&self) -> &PepsSpec {
        &self.spec
    }

    pub fn site_tensor(&self, site: usize) -> &DenseTensor {
        &self.site_tensors[site]
    }

    pub fn site_tensors(&self) -> &[DenseTensor] {
        &self.site_tensors
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn is_symmetrized(&self) -> bool {
        self.symmetrized
    }
}

/// Draws every site tensor independently from the Haar measure on `C^{D_x}`.
/// Site `x` uses RNG stream `x` of `seed`.
pub fn sample_peps(spec: &PepsSpec, seed: u64) -> Result<PepsState> {
    let site_tensors = (0..spec.lattice.num_sites())
        .map(|x| {
            let mut r = rng::stream(seed, x as u64);
            haar_random_state(spec.site_dim(x), &mut r)?.reshape(spec.site_shape(x))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PepsState {
        spec: spec.clone(),
        site_tensors,
        seed: Some(seed),
        symmetrized: false,
    })
}

/// `(1/|G|) Σ_g (U(g)^{⊗legs} ⊗ I) T` with the left-regular representation
/// `U(g)|h⟩ = |g·h⟩`, applied once to each site tensor and not renormalized.
pub fn project_symmetric(tensor: &DenseTensor, group: &FiniteGroup) -> Result<DenseTensor> {
    let shape = tensor.shape();
    let legs = shape.len().saturating_sub(1);
    let order = group.order();
    if shape[..legs].iter().any(|&d| d != order) {
        return Err(Error::BondDimensionMismatch {
            group_order: order,
            found: shape[..legs]
                .iter()
                .copied()
                .find(|&d| d != order)
                .unwrap_or(0),
        });
    }
    let phys = shape[legs];
    let virt = tensor.len() / phys;
    let src = tensor.data();
    let mut out = vec![C64::new(0.0, 0.0); tensor.len()];
    let mut digits = vec![0usize; legs];
    for g in 0..order {
        let ginv = group.inv(g);
        // (U(g) T)[i_1..i_k, p] = T[g⁻¹ i_1, .., g⁻¹ i_k, p]
        digits.iter_mut().for_each(|d| *d = 0);
        for v in 0..virt {
            let mut from = 0usize;
            for &i in &digits {
                from = from * order + group.mul(ginv, i);
            }
            for p in 0..phys {
                out[v * phys + p] += src[from * phys + p];
            }
            for k in (0..legs).rev() {
                digits[k] += 1;
                if digits[k] < order {
                    break;
                }
                digits[k] = 0;
            }
        }
    }
    let scale = 1.0 / order as f64;
    for z in &mut out {
        *z *= scale;
    }
    DenseTensor::new(shape.to_vec(), out)
}

pub fn symmetrize(state: &PepsState) -> Result<PepsState> {
    let group = state.spec.symmetry.as_ref().ok_or(Error::MissingSymmetry)?;
    let site_tensors = state
        .site_tensors
        .iter()
        .map(|t| project_symmetric(t, group))
        .collect::<Result<Vec<_>>>()?;
    Ok(PepsState {
        spec: state.spec.clone(),
        site_tensors,
        seed: state.seed,
        symmetrized: true,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct ContractionLimits {
    pub max_state_dim: usize,
    pub max_intermediate: usize,
}

impl Default for ContractionLimits {
    fn default() -> Self {
        ContractionLimits {
            max_state_dim: DEFAULT_MAX_STATE_DIM,
            max_intermediate: DEFAULT_MAX_INTERMEDIATE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    Phys(usize),
    Bond(usize),
}

/// Contracts the sites of `block` in ascending order, summing every bond with both
/// ends inside the block. Returns the tensor and its axis labels.
fn contract_block(
    state: &PepsState,
    block: &[usize],
    limits: &ContractionLimits,
) -> Result<(DenseTensor, Vec<Axis>)> {
    let lattice = &state.spec.lattice;
    let mut acc = DenseTensor::scalar(C64::new(1.0, 0.0));
    let mut axes: Vec<Axis> = Vec::new();
    for &x in block {
        let t = &state.site_tensors[x];
        let legs = lattice.incident_edges(x);
        let mut t_axes: Vec<Axis> = legs.iter().map(|&e| Axis::Bond(e)).collect();
        t_axes.push(Axis::Phys(x));
        let mut pairs = Vec::new();
        for (j, ax) in t_axes.iter().enumerate() {
            if let Some(i) = axes.iter().position(|a| a == ax) {
                pairs.push((i, j));
            }
        }
        let free_acc = axes.len() - pairs.len();
        let free_t = t_axes.len() - pairs.len();
        let mut size: u128 = 1;
        for (i, d) in acc.shape().iter().enumerate() {
            if !pairs.iter().any(|p| p.0 == i) {
                size = size.saturating_mul(*d as u128);
            }
        }
        for (j, d) in t.shape().iter().enumerate() {
            if !pairs.iter().any(|p| p.1 == j) {
                size = size.saturating_mul(*d as u128);
            }
        }
        if size > limits.max_intermediate as u128 {
            return Err(Error::budget(
                "contraction intermediate elements",
                size,
                limits.max_intermediate as u128,
                "use a smaller lattice or smaller bond/physical dimensions",
            ));
        }
        let next = contract(&acc, t, &pairs)?;
        let mut next_axes = Vec::with_capacity(free_acc + free_t);
        next_axes.extend(
            (0..axes.len())
                .filter(|i| !pairs.iter().any(|p| p.0 == *i))
                .map(|i| axes[i]),
        );
        next_axes.extend(
            (0..t_axes.len())
                .filter(|j| !pairs.iter().any(|p| p.1 == *j))
                .map(|j| t_axes[j]),
        );
        acc = next;
        axes = next_axes;
    }
    Ok((acc, axes))
}

/// Exact physical state `(⊗⟨xy|)(⊗|V_x⟩)` with unnormalized bonds `Σ_i |ii⟩`.
///
/// The result has one axis per site (dimension `d_x`), in site order.
pub fn dense_state(state: &PepsState) -> Result<DenseTensor> {
    dense_state_with(state, &ContractionLimits::default())
}

pub fn dense_state_with(state: &PepsState, limits: &ContractionLimits) -> Result<DenseTensor> {
    let dim = state.spec.state_dim();
    if dim > limits.max_state_dim as u128 {
        return Err(Error::budget(
            "physical state dimension",
            dim,
            limits.max_state_dim as u128,
            "use a smaller lattice or physical dimension",
        ));
    }
    let sites: Vec<usize> = (0..state.spec.lattice.num_sites()).collect();
    let (t, axes) = contract_block(state, &sites, limits)?;
    let order: Vec<usize> = sites
        .iter()
        .map(|&x| {
            axes.iter()
                .position(|a| *a == Axis::Phys(x))
                .expect("physical axis")
        })
        .collect();
    t.permute_axes(&order)
}

/// Rows indexed by the sites of `region`, columns by the complement.
fn bipartition_matrix(psi: &DenseTensor, region: &RegionSpec) -> Result<DMatrix<C64>> {
    let mask = region.mask();
    if psi.rank() != mask.len() {
        return Err(Error::ShapeMismatch(format!(
            "state has {} sites, region mask has {}",
            psi.rank(),
            mask.len()
        )));
    }
    let inside: Vec<usize> = (0..mask.len()).filter(|&x| mask[x]).collect();
    let outside: Vec<usize> = (0..mask.len()).filter(|&x| !mask[x]).collect();
    let da: usize = inside.iter().map(|&x| psi.shape()[x]).product();
    let db: usize = outside.iter().map(|&x| psi.shape()[x]).product();
    let order: Vec<usize> = inside.iter().chain(&outside).copied().collect();
    let p = psi.permute_axes(&order)?;
    Ok(DMatrix::from_row_slice(da, db, p.data()))
}

/// Eigenvalues of the unnormalized `ρ_A = Tr_Ā |ψ⟩⟨ψ|`, sorted descending,
/// with round-off negatives clamped to zero. Only the nonzero part of the
/// spectrum is guaranteed (the smaller Gram matrix is diagonalized).
pub fn reduced_spectrum(psi: &DenseTensor, region: &RegionSpec) -> Result<Vec<f64>> {
    let m = bipartition_matrix(psi, region)?;
    let gram = if m.nrows() <= m.ncols() {
        &m * m.adjoint()
    } else {
        m.adjoint() * &m
    };
    let eig = SymmetricEigen::new(gram);
    let mut vals: Vec<f64> = eig.eigenvalues.iter().map(|&v| v.max(0.0)).collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    Ok(vals)
}

/// `(Tr ρ_A^n, Tr ρ)` for the unnormalized state.
pub fn renyi_trace(psi: &DenseTensor, region: &RegionSpec, n: u32) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "replica count must be at least 1".into(),
        ));
    }
    let spec = reduced_spectrum(psi, region)?;
    let moment: f64 = spec.iter().map(|l| l.powi(n as i32)).sum();
    Ok((moment, psi.norm_sqr()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Entropies {
    pub s2: f64,
    pub svn: f64,
    pub schmidt_rank: usize,
}

pub fn entropies_from_spectrum(spectrum: &[f64]) -> Result<Entropies> {
    let total: f64 = spectrum.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::ZeroNormState { seed: None });
    }
    let max = spectrum.iter().copied().fold(0.0, f64::max);
    let mut purity = 0.0;
    let mut svn = 0.0;
    let mut rank = 0;
    for &l in spectrum {
        let p = l / total;
        purity += p * p;
        if p > 0.0 {
            svn -= p * p.ln();
        }
        if l > RANK_THRESHOLD * max {
            rank += 1;
        }
    }
    Ok(Entropies {
        s2: (-purity.ln()).max(0.0),
        svn: svn.max(0.0),
        schmidt_rank: rank,
    })
}

pub fn entropies(psi: &DenseTensor, region: &RegionSpec) -> Result<Entropies> {
    entropies_from_spectrum(&reduced_spectrum(psi, region)?)
}

/// Rank of the region block read as a map from its boundary bonds to its
/// physical legs, compared with the orbit count `|G|^{|∂A|-1}` of the boundary
/// configurations; the two agree when the block is G-injective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InjectivityDiagnostic {
    pub boundary_legs: usize,
    pub block_rank: usize,
    pub invariant_dim: usize,
    pub injective: bool,
}

pub fn injectivity_diagnostic(
    state: &PepsState,
    region: &RegionSpec,
) -> Result<InjectivityDiagnostic> {
    let group = state.spec.symmetry.as_ref().ok_or(Error::MissingSymmetry)?;
    let sites = region.sites();
    let limits = ContractionLimits::default();
    let (t, axes) = contract_block(state, &sites, &limits)?;
    let phys: Vec<usize> = (0..axes.len())
        .filter(|&i| matches!(axes[i], Axis::Phys(_)))
        .collect();
    let bonds: Vec<usize> = (0..axes.len())
        .filter(|&i| matches!(axes[i], Axis::Bond(_)))
        .collect();
    let rows: usize = phys.iter().map(|&i| t.shape()[i]).product();
    let cols: usize = bonds.iter().map(|&i| t.shape()[i]).product();
    let order: Vec<usize> = phys.iter().chain(&bonds).copied().collect();
    let p = t.permute_axes(&order)?;
    let m = DMatrix::from_row_slice(rows, cols, p.data());
    let gram = if rows <= cols {
        &m * m.adjoint()
    } else {
        m.adjoint() * &m
    };
    let eig = SymmetricEigen::new(gram);
    let max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let block_rank = eig
        .eigenvalues
        .iter()
        .filter(|&&v| v > RANK_THRESHOLD * max)
        .count();
    let k = bonds.len() as u32;
    let invariant_dim = if k == 0 { 1 } else { group.order().pow(k - 1) };
    let bound = invariant_dim.min(rows);
    Ok(InjectivityDiagnostic {
        boundary_legs: bonds.len(),
        block_rank,
        invariant_dim,
        injective: block_rank == bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleRecord {
    pub index: u64,
    pub seed: u64,
    pub z1: f64,
    pub z0: f64,
    pub s2: f64,
    pub svn: f64,
    pub rank: usize,
}

#[derive(Debug, Clone)]
pub struct HaarAverage {
    pub n: u32,
    pub z1: MeanError,
    pub z0: MeanError,
    pub records: Vec<SampleRecord>,
}

/// One sample: draw, symmetrize when the spec carries a group, contract.
pub fn sample_record(
    spec: &PepsSpec,
    region: &RegionSpec,
    n: u32,
    index: u64,
    base_seed: u64,
) -> Result<SampleRecord> {
    let seed = rng::derive_seed(base_seed, index);
    let mut state = sample_peps(spec, seed)?;
    if spec.symmetry.is_some() {
        state = symmetrize(&state)?;
    }
    let psi = dense_state(&state)?;
    let spectrum = reduced_spectrum(&psi, region)?;
    let norm = psi.norm_sqr();
    if norm.is_nan() || norm <= 0.0 {
        return Err(Error::ZeroNormState { seed: Some(seed) });
    }
    let ent = entropies_from_spectrum(&spectrum)
        .map_err(|_| Error::ZeroNormState { seed: Some(seed) })?;
    Ok(SampleRecord {
        index,
        seed,
        z1: spectrum.iter().map(|l| l.powi(n as i32)).sum(),
        z0: norm.powi(n as i32),
        s2: ent.s2,
        svn: ent.svn,
        rank: ent.schmidt_rank,
    })
}

/// Sample means of `Tr ρ_A^n` and `(Tr ρ)^n` over independent PEPS draws.
///
/// Sample `i` uses seed `derive_seed(seed, i)`, so results do not depend on the
/// thread count.
pub fn haar_average(
    spec: &PepsSpec,
    region: &RegionSpec,
    n: u32,
    samples: u64,
    seed: u64,
) -> Result<HaarAverage> {
    if samples < 2 {
        return Err(Error::InvalidArgument(
            "haar_average needs at least 2 samples".into(),
        ));
    }
    if n == 0 {
        return Err(Error::InvalidArgument(
            "replica count must be at least 1".into(),
        ));
    }
    if region.mask().len() != spec.lattice.num_sites() {
        return Err(Error::ShapeMismatch(
            "region does not match the lattice".into(),
        ));
    }
    let records = (0..samples)
        .into_par_iter()
        .map(|i| sample_record(spec, region, n, i, seed))
        .collect::<Result<Vec<_>>>()?;
    let z1: Vec<f64> = records.iter().map(|r| r.z1).collect();
    let z0: Vec<f64> = records.iter().map(|r| r.z0).collect();
    Ok(HaarAverage {
        n,
        z1: mean_error(&z1),
        z0: mean_error(&z0),
        records,
    })
}
