//! Square-lattice geometry, regions, classical configurations and their
//! cluster / domain-wall decomposition.

use std::collections::{BTreeSet, HashMap};

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Permutation, ReplicaGroup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

/// An elementary plaquette of the lattice, i.e. an interior vertex of the dual graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Plaquette {
    /// Sites in the order top-left, top-right, bottom-right, bottom-left.
    pub corners: [usize; 4],
    /// Edges in the order top, right, bottom, left.
    pub edges: [usize; 4],
}

/// A `width × height` square lattice. Site `(row, col)` has index `row * width + col`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquareLattice {
    width: usize,
    height: usize,
    boundary: Boundary,
    edges: Vec<(usize, usize)>,
    edge_index: HashMap<(usize, usize), usize>,
    plaquettes: Vec<Plaquette>,
    edge_faces: Vec<[usize; 2]>,
    incident: Vec<Vec<usize>>,
}

impl SquareLattice {
    pub fn new(width: usize, height: usize, boundary: Boundary) -> Result<Self> {
        build_lattice(width, height, boundary)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn num_sites(&self) -> usize {
        self.width * self.height
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(a, b)` with `a < b`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn plaquettes(&self) -> &[Plaquette] {
        &self.plaquettes
    }

    /// Number of dual vertices: plaquettes plus the outer face for open boundaries.
    pub fn num_faces(&self) -> usize {
        self.plaquettes.len() + usize::from(self.boundary == Boundary::Open)
    }

    /// Index of the outer face, present only for open boundaries.
    pub fn outer_face(&self) -> Option<usize> {
        (self.boundary == Boundary::Open).then_some(self.plaquettes.len())
    }

    /// The two faces bordering edge `e`.
    pub fn edge_faces(&self, e: usize) -> [usize; 2] {
        self.edge_faces[e]
    }

    /// Edge indices incident on `site`, ascending. These are the virtual legs of a PEPS tensor.
    pub fn incident_edges(&self, site: usize) -> &[usize] {
        &self.incident[site]
    }

    pub fn degree(&self, site: usize) -> usize {
        self.incident[site].len()
    }

    pub fn neighbors(&self, site: usize) -> impl Iterator<Item = usize> + '_ {
        self.incident[site].iter().map(move |&e| {
            let (a, b) = self.edges[e];
            if a == site {
                b
            } else {
                a
            }
        })
    }

    pub fn site(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    pub fn coords(&self, site: usize) -> (usize, usize) {
        (site / self.width, site % self.width)
    }
}

/// Builds the site/edge/face incidence structure of a square lattice.
pub fn build_lattice(width: usize, height: usize, boundary: Boundary) -> Result<SquareLattice> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidArgument(
            "lattice dimensions must be positive".into(),
        ));
    }
    if boundary == Boundary::Periodic && (width < 3 || height < 3) {
        return Err(Error::InvalidArgument(format!(
            "periodic lattice needs width and height >= 3 to avoid duplicate edges, got {width}x{height}"
        )));
    }
    let site = |r: usize, c: usize| r * width + c;
    let periodic = boundary == Boundary::Periodic;

    let mut edges = Vec::new();
    let mut edge_index = HashMap::new();
    let mut push_edge = |a: usize, b: usize| {
        let key = (a.min(b), a.max(b));
        let e = edges.len();
        edges.push(key);
        edge_index.insert(key, e);
    };
    for r in 0..height {
        for c in 0..width {
            if c + 1 < width || periodic {
                push_edge(site(r, c), site(r, (c + 1) % width));
            }
            if r + 1 < height || periodic {
                push_edge(site(r, c), site((r + 1) % height, c));
            }
        }
    }

    let (prow, pcol) = if periodic {
        (height, width)
    } else {
        (height - 1, width - 1)
    };
    let mut plaquettes = Vec::with_capacity(prow * pcol);
    for r in 0..prow {
        for c in 0..pcol {
            let tl = site(r, c);
            let tr = site(r, (c + 1) % width);
            let br = site((r + 1) % height, (c + 1) % width);
            let bl = site((r + 1) % height, c);
            let e = |a: usize, b: usize| edge_index[&(a.min(b), a.max(b))];
            plaquettes.push(Plaquette {
                corners: [tl, tr, br, bl],
                edges: [e(tl, tr), e(tr, br), e(bl, br), e(tl, bl)],
            });
        }
    }

    let outer = plaquettes.len();
    let mut slots: Vec<Vec<usize>> = vec![Vec::with_capacity(2); edges.len()];
    for (f, p) in plaquettes.iter().enumerate() {
        for &e in &p.edges {
            slots[e].push(f);
        }
    }
    let edge_faces = slots
        .into_iter()
        .map(|mut s| {
            while s.len() < 2 {
                s.push(outer);
            }
            [s[0], s[1]]
        })
        .collect();

    let mut incident = vec![Vec::new(); width * height];
    for (e, &(a, b)) in edges.iter().enumerate() {
        incident[a].push(e);
        incident[b].push(e);
    }

    Ok(SquareLattice {
        width,
        height,
        boundary,
        edges,
        edge_index,
        plaquettes,
        edge_faces,
        incident,
    })
}

/// Region `A` of the lattice, with its boundary size and component count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionSpec {
    mask: Vec<bool>,
    boundary_edges: usize,
    components: usize,
}

impl RegionSpec {
    pub fn new(lattice: &SquareLattice, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != lattice.num_sites() {
            return Err(Error::ShapeMismatch(format!(
                "region mask has {} entries, lattice has {} sites",
                mask.len(),
                lattice.num_sites()
            )));
        }
        let boundary_edges = lattice
            .edges()
            .iter()
            .filter(|&&(a, b)| mask[a] != mask[b])
            .count();
        let mut uf = UnionFind::new(mask.len());
        for &(a, b) in lattice.edges() {
            if mask[a] && mask[b] {
                uf.union(a, b);
            }
        }
        let components = (0..mask.len())
            .filter(|&s| mask[s])
            .map(|s| uf.find(s))
            .collect::<BTreeSet<_>>()
            .len();
        Ok(RegionSpec {
            mask,
            boundary_edges,
            components,
        })
    }

    pub fn empty(lattice: &SquareLattice) -> Self {
        RegionSpec {
            mask: vec![false; lattice.num_sites()],
            boundary_edges: 0,
            components: 0,
        }
    }

    pub fn from_sites(lattice: &SquareLattice, sites: &[usize]) -> Result<Self> {
        let mut mask = vec![false; lattice.num_sites()];
        for &s in sites {
            if s >= mask.len() {
                return Err(Error::InvalidArgument(format!(
                    "region site {s} outside lattice"
                )));
            }
            mask[s] = true;
        }
        Self::new(lattice, mask)
    }

    /// Union of axis-aligned blocks given as `(row, col, height, width)`; blocks wrap on periodic lattices.
    pub fn from_blocks(
        lattice: &SquareLattice,
        blocks: &[(usize, usize, usize, usize)],
    ) -> Result<Self> {
        let mut mask = vec![false; lattice.num_sites()];
        for &(row, col, h, w) in blocks {
            let fits = row + h <= lattice.height() && col + w <= lattice.width();
            if !fits && lattice.boundary() == Boundary::Open {
                return Err(Error::InvalidArgument(format!(
                    "block at ({row},{col}) of size {h}x{w} leaves the open lattice"
                )));
            }
            for r in row..row + h {
                for c in col..col + w {
                    mask[lattice.site(r % lattice.height(), c % lattice.width())] = true;
                }
            }
        }
        Self::new(lattice, mask)
    }

    /// Parses a row-major run-length string of `#` (in region) and `.` (outside),
    /// each optionally prefixed by a repeat count, e.g. `5.2#2.2#5.`.
    pub fn from_rle(lattice: &SquareLattice, rle: &str) -> Result<Self> {
        let mut mask = Vec::with_capacity(lattice.num_sites());
        let mut count = String::new();
        for ch in rle.chars().filter(|c| !c.is_whitespace()) {
            match ch {
                '0'..='9' => count.push(ch),
                '#' | '.' => {
                    let k = if count.is_empty() {
                        1
                    } else {
                        count.parse::<usize>().map_err(|_| {
                            Error::InvalidArgument(format!("bad run length '{count}'"))
                        })?
                    };
                    mask.extend(std::iter::repeat_n(ch == '#', k));
                    count.clear();
                }
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unexpected character '{other}' in region string (use digits, '#', '.')"
                    )))
                }
            }
        }
        if !count.is_empty() {
            return Err(Error::InvalidArgument(
                "region string ends with a dangling count".into(),
            ));
        }
        Self::new(lattice, mask)
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains(&self, site: usize) -> bool {
        self.mask[site]
    }

    pub fn sites(&self) -> Vec<usize> {
        (0..self.mask.len()).filter(|&s| self.mask[s]).collect()
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `|∂A|`: edges with exactly one endpoint in the region.
    pub fn boundary_edge_count(&self) -> usize {
        self.boundary_edges
    }

    /// `m`: connected components of the region.
    pub fn component_count(&self) -> usize {
        self.components
    }

    /// Ising pinning field: −1 inside the region, +1 outside.
    pub fn ising_field(&self, site: usize) -> i8 {
        if self.mask[site] {
            -1
        } else {
            1
        }
    }
}

/// `(|∂A|, m)` for a region.
pub fn region_boundary_stats(region: &RegionSpec) -> (usize, usize) {
    (region.boundary_edge_count(), region.component_count())
}

/// Region descriptor used in experiment configs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum RegionDescriptor {
    /// Explicit site indices.
    Sites(Vec<usize>),
    /// Row-major run-length string, see [`RegionSpec::from_rle`].
    Rle(String),
    /// Blocks as `[row, col, height, width]`.
    Blocks(Vec<[usize; 4]>),
}

impl RegionDescriptor {
    pub fn resolve(&self, lattice: &SquareLattice) -> Result<RegionSpec> {
        match self {
            RegionDescriptor::Sites(s) => RegionSpec::from_sites(lattice, s),
            RegionDescriptor::Rle(s) => RegionSpec::from_rle(lattice, s),
            RegionDescriptor::Blocks(b) => {
                let blocks: Vec<_> = b.iter().map(|&[r, c, h, w]| (r, c, h, w)).collect();
                RegionSpec::from_blocks(lattice, &blocks)
            }
        }
    }
}

/// Ising configuration `{s_x}`, entries ±1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfig {
    values: Vec<i8>,
}

impl SpinConfig {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if let Some(v) = values.iter().find(|&&v| v != 1 && v != -1) {
            return Err(Error::InvalidArgument(format!("spin value {v} is not ±1")));
        }
        Ok(SpinConfig { values })
    }

    pub fn all_up(n: usize) -> Self {
        SpinConfig { values: vec![1; n] }
    }

    /// Bit `i` of `index` set means `s_i = −1`; index 0 is all `+1`.
    pub fn from_index(n: usize, index: u64) -> Self {
        SpinConfig {
            values: (0..n)
                .map(|i| if index >> i & 1 == 1 { -1 } else { 1 })
                .collect(),
        }
    }

    /// `s = −1` exactly on the region.
    pub fn from_region(region: &RegionSpec) -> Self {
        SpinConfig {
            values: region
                .mask()
                .iter()
                .map(|&m| if m { -1 } else { 1 })
                .collect(),
        }
    }

    pub fn index(&self) -> u64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v < 0)
            .fold(0u64, |acc, (i, _)| acc | 1 << i)
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, site: usize) -> i8 {
        self.values[site]
    }

    pub fn flip(&mut self, site: usize) {
        self.values[site] = -self.values[site];
    }

    pub fn flipped_all(&self) -> Self {
        SpinConfig {
            values: self.values.iter().map(|v| -v).collect(),
        }
    }

    /// The equivalent `Sym_2` configuration.
    pub fn to_perm_config(&self, replicas: &ReplicaGroup) -> PermConfig {
        PermConfig {
            n: replicas.n(),
            values: self.values.iter().map(|&s| replicas.from_spin(s)).collect(),
        }
    }
}

/// `Sym_n` configuration `{Γ_x}` as element indices of a [`ReplicaGroup`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PermConfig {
    n: usize,
    values: Vec<usize>,
}

impl PermConfig {
    pub fn new(replicas: &ReplicaGroup, values: Vec<usize>) -> Result<Self> {
        if let Some(v) = values.iter().find(|&&v| v >= replicas.order()) {
            return Err(Error::InvalidArgument(format!(
                "replica element {v} out of range for Sym_{}",
                replicas.n()
            )));
        }
        Ok(PermConfig {
            n: replicas.n(),
            values,
        })
    }

    pub fn from_permutations(replicas: &ReplicaGroup, perms: &[Permutation]) -> Result<Self> {
        let values = perms
            .iter()
            .map(|p| {
                replicas.index_of(p).ok_or(Error::PermutationMismatch {
                    left: p.n(),
                    right: replicas.n(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(PermConfig {
            n: replicas.n(),
            values,
        })
    }

    pub fn identity(replicas: &ReplicaGroup, sites: usize) -> Self {
        PermConfig {
            n: replicas.n(),
            values: vec![replicas.identity(); sites],
        }
    }

    /// Mixed-radix index with site 0 least significant; index 0 is all identity.
    pub fn from_index(replicas: &ReplicaGroup, sites: usize, mut index: u64) -> Self {
        let k = replicas.order() as u64;
        let values = (0..sites)
            .map(|_| {
                let v = (index % k) as usize;
                index /= k;
                v
            })
            .collect();
        PermConfig {
            n: replicas.n(),
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, site: usize) -> usize {
        self.values[site]
    }

    pub fn set(&mut self, site: usize, value: usize) {
        self.values[site] = value;
    }

    pub fn permutation<'a>(&self, replicas: &'a ReplicaGroup, site: usize) -> &'a Permutation {
        replicas.element(self.values[site])
    }
}

/// Anything that assigns a comparable label to every site.
pub trait SiteLabels {
    type Label: Copy + Eq + std::hash::Hash + Ord;
    fn labels(&self) -> &[Self::Label];
}

impl SiteLabels for SpinConfig {
    type Label = i8;
    fn labels(&self) -> &[i8] {
        &self.values
    }
}

impl SiteLabels for PermConfig {
    type Label = usize;
    fn labels(&self) -> &[usize] {
        &self.values
    }
}

/// Maximal connected components of equal-label sites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clusters {
    /// Per site, the minimum site index of its cluster.
    pub labels: Vec<usize>,
    /// Cluster representatives (minimum site indices), ascending.
    pub roots: Vec<usize>,
}

impl Clusters {
    pub fn count(&self) -> usize {
        self.roots.len()
    }

    /// Dense cluster id in `0..count`, ordered by representative.
    pub fn id_of(&self, site: usize) -> usize {
        self.roots
            .binary_search(&self.labels[site])
            .expect("label is a root")
    }

    /// Unordered adjacent cluster pairs (by dense id), ascending.
    pub fn adjacency(&self, lattice: &SquareLattice) -> BTreeSet<(usize, usize)> {
        lattice
            .edges()
            .iter()
            .filter(|&&(a, b)| self.labels[a] != self.labels[b])
            .map(|&(a, b)| {
                let (i, j) = (self.id_of(a), self.id_of(b));
                (i.min(j), i.max(j))
            })
            .collect()
    }

    /// Whether the cluster adjacency graph is a tree. Square lattices are connected,
    /// so this reduces to counting adjacent pairs.
    pub fn adjacency_is_tree(&self, lattice: &SquareLattice) -> bool {
        self.adjacency(lattice).len() + 1 == self.count()
    }
}

fn cluster_labels<L: Eq>(lattice: &SquareLattice, labels: &[L]) -> Clusters {
    let n = lattice.num_sites();
    assert_eq!(labels.len(), n, "configuration does not match lattice");
    let mut uf = UnionFind::new(n);
    for &(a, b) in lattice.edges() {
        if labels[a] == labels[b] {
            uf.union(a, b);
        }
    }
    let mut min_site = vec![usize::MAX; n];
    for s in 0..n {
        let r = uf.find(s);
        min_site[r] = min_site[r].min(s);
    }
    let site_labels: Vec<usize> = (0..n).map(|s| min_site[uf.find(s)]).collect();
    let roots = (0..n).filter(|&s| site_labels[s] == s).collect();
    Clusters {
        labels: site_labels,
        roots,
    }
}

/// Cluster decomposition of a configuration.
pub fn clusters<C: SiteLabels>(config: &C, lattice: &SquareLattice) -> Clusters {
    cluster_labels(lattice, config.labels())
}

/// One domain wall.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wall {
    /// Cut edges of this wall, ascending.
    pub edges: Vec<usize>,
    /// Dense cluster ids on either side of the wall's lowest edge, ordered as
    /// (cluster of the edge's lower site, cluster of its higher site).
    pub clusters: (usize, usize),
    /// True when the wall passes through a plaquette where four distinct
    /// clusters meet; such a wall separates more than one cluster pair.
    pub junction: bool,
}

/// Cut edges grouped into domain walls.
///
/// Two cut edges belong to the same wall when they border a common plaquette
/// and separate the same pair of clusters. At a plaquette where four distinct
/// clusters meet, all four cut edges join one wall. The outer face of an open
/// lattice never connects edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WallDecomposition {
    pub clusters: Clusters,
    pub cut_edges: Vec<usize>,
    pub walls: Vec<Wall>,
}

impl WallDecomposition {
    /// Number of walls `η`.
    pub fn eta(&self) -> usize {
        self.walls.len()
    }

    /// Cycle count `χ` of the relative permutation `Γ_a⁻¹·Γ_b` across a wall.
    pub fn wall_cycle_count(
        &self,
        wall: &Wall,
        config: &PermConfig,
        replicas: &ReplicaGroup,
    ) -> usize {
        let (a, b) = wall.clusters;
        let ga = config.get(self.clusters.roots[a]);
        let gb = config.get(self.clusters.roots[b]);
        replicas.relative_cycles(ga, gb)
    }

    /// Relative permutation `Γ_a⁻¹·Γ_b` across a wall (defined up to conjugation).
    pub fn wall_permutation(
        &self,
        wall: &Wall,
        config: &PermConfig,
        replicas: &ReplicaGroup,
    ) -> Permutation {
        let (a, b) = wall.clusters;
        let ga = config.permutation(replicas, self.clusters.roots[a]);
        let gb = config.permutation(replicas, self.clusters.roots[b]);
        ga.invert().compose(gb).expect("same replica count")
    }
}

fn walls_from_labels<L: Eq>(lattice: &SquareLattice, labels: &[L]) -> WallDecomposition {
    let clusters = cluster_labels(lattice, labels);
    let cut: Vec<bool> = lattice
        .edges()
        .iter()
        .map(|&(a, b)| clusters.labels[a] != clusters.labels[b])
        .collect();
    let cut_edges: Vec<usize> = (0..cut.len()).filter(|&e| cut[e]).collect();

    let pair = |e: usize| {
        let (a, b) = lattice.edge(e);
        let (x, y) = (clusters.labels[a], clusters.labels[b]);
        (x.min(y), x.max(y))
    };

    let mut uf = UnionFind::new(lattice.num_edges());
    let mut junction_edges = vec![false; lattice.num_edges()];
    for p in lattice.plaquettes() {
        let cuts: Vec<usize> = p.edges.iter().copied().filter(|&e| cut[e]).collect();
        if cuts.len() < 2 {
            continue;
        }
        let distinct = p
            .corners
            .iter()
            .map(|&s| clusters.labels[s])
            .collect::<BTreeSet<_>>()
            .len();
        if cuts.len() == 4 && distinct == 4 {
            for &e in &cuts {
                uf.union(cuts[0], e);
                junction_edges[e] = true;
            }
            continue;
        }
        for (i, &e) in cuts.iter().enumerate() {
            for &f in &cuts[i + 1..] {
                if pair(e) == pair(f) {
                    uf.union(e, f);
                }
            }
        }
    }

    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for &e in &cut_edges {
        let r = uf.find(e);
        let i = *slot.entry(r).or_insert_with(|| {
            groups.push((r, Vec::new()));
            groups.len() - 1
        });
        groups[i].1.push(e);
    }
    let walls = groups
        .into_iter()
        .map(|(_, edges)| {
            let (a, b) = lattice.edge(edges[0]);
            Wall {
                clusters: (clusters.id_of(a), clusters.id_of(b)),
                junction: edges.iter().any(|&e| junction_edges[e]),
                edges,
            }
        })
        .collect();

    WallDecomposition {
        clusters,
        cut_edges,
        walls,
    }
}

/// Domain-wall decomposition of a configuration.
pub fn wall_decomposition<C: SiteLabels>(config: &C, lattice: &SquareLattice) -> WallDecomposition {
    walls_from_labels(lattice, config.labels())
}
