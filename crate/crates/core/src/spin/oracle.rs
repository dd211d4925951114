//! Exact counting of group-element assignments that survive the bond traces.
//!
//! After expanding each symmetric projector, site `x` carries one group
//! element `g_{x,i}` per replica `i`. On an edge `x < y` write
//! `k_i = g_{x,i}⁻¹·g_{y,i}` for the edge group element of replica `i`. The bond
//! trace is nonzero exactly when, for every cycle of the relative permutation,
//! the ordered product of the `k_i` along that cycle is the identity; it then
//! equals `|G|^{χ}`. Constant edges reduce to `g_{x,i} = g_{y,i}` for all `i`.

use std::collections::{BTreeMap, VecDeque};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, ReplicaGroup};
use crate::lattice::{clusters, Clusters, PermConfig, SpinConfig, SquareLattice};

/// Default limit on brute-force assignments `|G|^{nN}`.
pub const DEFAULT_BRUTE_LIMIT: u128 = 1 << 26;
/// Default limit on gauge-fixed search nodes for cyclic cluster adjacency.
pub const DEFAULT_SEARCH_LIMIT: u128 = 1 << 34;

/// Constraints contributed by a single edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeConstraint {
    pub edge: usize,
    pub x: usize,
    pub y: usize,
    /// One entry per cycle: replica indices whose edge elements multiply,
    /// left to right, to the identity.
    pub cycles: Vec<Vec<usize>>,
}

impl EdgeConstraint {
    /// Constraints for an edge whose endpoints carry `Γ_x = gamma_x`, `Γ_y = gamma_y`.
    pub fn new(
        replicas: &ReplicaGroup,
        edge: usize,
        x: usize,
        y: usize,
        gamma_x: usize,
        gamma_y: usize,
    ) -> Self {
        let gx = replicas.element(gamma_x);
        let gy = replicas.element(gamma_y);
        let tau = gy.invert();
        let pi = gx.compose(&tau).expect("same replica count");
        let cycles = pi
            .cycles()
            .into_iter()
            .map(|cycle| cycle.iter().rev().map(|&j| tau.apply(j)).collect())
            .collect();
        EdgeConstraint { edge, x, y, cycles }
    }

    /// Exponent of `|G|` in the bond trace when the constraints hold.
    pub fn multiplicity(&self) -> usize {
        self.cycles.len()
    }

    /// Checks the constraints given the edge elements `k_i`.
    pub fn satisfied_by(&self, group: &FiniteGroup, k: &[usize]) -> bool {
        self.cycles.iter().all(|c| {
            c.iter()
                .fold(group.identity(), |acc, &i| group.mul(acc, k[i]))
                == group.identity()
        })
    }

    /// Checks the constraints given the per-replica elements at both endpoints.
    pub fn satisfied(&self, group: &FiniteGroup, gx: &[usize], gy: &[usize]) -> bool {
        let k: Vec<usize> = gx
            .iter()
            .zip(gy)
            .map(|(&a, &b)| group.mul(group.inv(a), b))
            .collect();
        self.satisfied_by(group, &k)
    }
}

/// All edge constraints of a configuration.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    pub n: usize,
    pub sites: usize,
    pub edges: Vec<EdgeConstraint>,
}

impl ConstraintSystem {
    pub fn new(
        config: &PermConfig,
        lattice: &SquareLattice,
        replicas: &ReplicaGroup,
    ) -> Result<Self> {
        if config.len() != lattice.num_sites() || config.n() != replicas.n() {
            return Err(Error::ShapeMismatch(
                "configuration does not match lattice or replica count".into(),
            ));
        }
        let edges = lattice
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &(x, y))| {
                EdgeConstraint::new(replicas, e, x, y, config.get(x), config.get(y))
            })
            .collect();
        Ok(ConstraintSystem {
            n: replicas.n(),
            sites: lattice.num_sites(),
            edges,
        })
    }

    /// Whether the assignment `g[x * n + i] = g_{x,i}` satisfies every constraint.
    pub fn satisfied(&self, group: &FiniteGroup, g: &[usize]) -> bool {
        let n = self.n;
        self.edges.iter().all(|c| {
            c.satisfied(
                group,
                &g[c.x * n..(c.x + 1) * n],
                &g[c.y * n..(c.y + 1) * n],
            )
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum OracleMethod {
    /// Enumerate every assignment of `n` elements per site.
    Brute,
    /// One `n`-tuple per cluster, relations per adjacent cluster pair.
    #[default]
    Clusters,
}

#[derive(Debug, Clone, Copy)]
pub struct OracleLimits {
    pub brute: u128,
    pub search: u128,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            brute: DEFAULT_BRUTE_LIMIT,
            search: DEFAULT_SEARCH_LIMIT,
        }
    }
}

/// Number of assignments of `n` group elements per site satisfying every constraint.
pub fn solution_count_oracle(
    config: &PermConfig,
    group: &FiniteGroup,
    lattice: &SquareLattice,
    replicas: &ReplicaGroup,
    method: OracleMethod,
    limits: &OracleLimits,
) -> Result<u128> {
    let system = ConstraintSystem::new(config, lattice, replicas)?;
    match method {
        OracleMethod::Brute => count_brute(&system, group, limits.brute),
        OracleMethod::Clusters => {
            let cl = clusters(config, lattice);
            count_clusters(&system, &cl, group, limits.search)
        }
    }
}

/// Spin-configuration convenience wrapper (`n = 2`).
pub fn solution_count_spin(
    config: &SpinConfig,
    group: &FiniteGroup,
    lattice: &SquareLattice,
    method: OracleMethod,
    limits: &OracleLimits,
) -> Result<u128> {
    let replicas = ReplicaGroup::new(2)?;
    solution_count_oracle(
        &config.to_perm_config(&replicas),
        group,
        lattice,
        &replicas,
        method,
        limits,
    )
}

fn count_brute(system: &ConstraintSystem, group: &FiniteGroup, limit: u128) -> Result<u128> {
    let q = group.order() as u128;
    let vars = system.sites * system.n;
    let total = q.checked_pow(vars as u32).unwrap_or(u128::MAX);
    if total > limit {
        return Err(Error::budget(
            "brute-force assignments",
            total,
            limit,
            "use the cluster-reduced oracle or a smaller lattice",
        ));
    }
    let total = total as u64;
    const CHUNK: u64 = 1 << 14;
    let chunks = total.div_ceil(CHUNK);
    let count: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(total);
            let mut g = vec![0usize; vars];
            let mut rest = start;
            for v in g.iter_mut() {
                *v = (rest % q as u64) as usize;
                rest /= q as u64;
            }
            let mut hits = 0u64;
            for _ in start..end {
                if system.satisfied(group, &g) {
                    hits += 1;
                }
                for v in g.iter_mut() {
                    *v += 1;
                    if *v < group.order() {
                        break;
                    }
                    *v = 0;
                }
            }
            hits
        })
        .sum();
    Ok(count as u128)
}

/// Allowed `k`-tuples (`t_a⁻¹·t_b` per replica) for each adjacent cluster pair `a < b`.
fn pair_relations(
    system: &ConstraintSystem,
    cl: &Clusters,
    group: &FiniteGroup,
) -> BTreeMap<(usize, usize), Vec<Vec<usize>>> {
    let q = group.order();
    let n = system.n;
    let tuples: Vec<Vec<usize>> = (0..q.pow(n as u32))
        .map(|mut idx| {
            (0..n)
                .map(|_| {
                    let v = idx % q;
                    idx /= q;
                    v
                })
                .collect()
        })
        .collect();
    let mut by_pair: BTreeMap<(usize, usize), Vec<&EdgeConstraint>> = BTreeMap::new();
    for c in &system.edges {
        let (a, b) = (cl.id_of(c.x), cl.id_of(c.y));
        if a != b {
            by_pair.entry((a.min(b), a.max(b))).or_default().push(c);
        }
    }
    by_pair
        .into_iter()
        .map(|((a, b), cons)| {
            let allowed = tuples
                .iter()
                .filter(|k| {
                    let kinv: Vec<usize> = k.iter().map(|&v| group.inv(v)).collect();
                    cons.iter().all(|c| {
                        // k is t_a⁻¹ t_b; the edge's own element is t_x⁻¹ t_y.
                        if cl.id_of(c.x) == a {
                            c.satisfied_by(group, k)
                        } else {
                            c.satisfied_by(group, &kinv)
                        }
                    })
                })
                .cloned()
                .collect();
            ((a, b), allowed)
        })
        .collect()
}

fn count_clusters(
    system: &ConstraintSystem,
    cl: &Clusters,
    group: &FiniteGroup,
    limit: u128,
) -> Result<u128> {
    let n = system.n;
    // Inside a cluster every edge forces g_{x,i} = g_{y,i}; check the constant
    // edges really are of that form before collapsing.
    for c in &system.edges {
        if cl.labels[c.x] == cl.labels[c.y] && c.cycles.iter().any(|cy| cy.len() != 1) {
            return Err(Error::InvalidArgument(
                "constant edge with a nontrivial relative permutation".into(),
            ));
        }
    }
    let gauge = (group.order() as u128).pow(n as u32);
    let relations = pair_relations(system, cl, group);
    let count = cl.count();
    if relations.len() + 1 == count {
        // Tree: each pair element can be chosen independently.
        let product = relations
            .values()
            .try_fold(gauge, |acc, s| acc.checked_mul(s.len() as u128))
            .ok_or_else(|| {
                Error::budget(
                    "solution count",
                    u128::MAX,
                    u128::MAX,
                    "count overflows u128",
                )
            })?;
        return Ok(product);
    }

    // Cyclic adjacency: fix the root tuple (gauge), grow a BFS spanning tree and
    // check the remaining relations as soon as both ends are assigned.
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); count];
    for &(a, b) in relations.keys() {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut order = vec![0usize];
    let mut parent = vec![usize::MAX; count];
    let mut seen = vec![false; count];
    seen[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(a) = queue.pop_front() {
        for &b in &adj[a] {
            if !seen[b] {
                seen[b] = true;
                parent[b] = a;
                order.push(b);
                queue.push_back(b);
            }
        }
    }
    let bound = order[1..].iter().fold(1u128, |acc, &c| {
        let (a, b) = (parent[c].min(c), parent[c].max(c));
        acc.saturating_mul(relations[&(a, b)].len().max(1) as u128)
    });
    if bound > limit {
        return Err(Error::budget(
            "cluster search nodes",
            bound,
            limit,
            "the cluster adjacency has too many cycles for exact search",
        ));
    }
    let q = group.order();
    let encode = |t: &[usize]| t.iter().rev().fold(0usize, |acc, &v| acc * q + v);
    let allowed: BTreeMap<(usize, usize), Vec<bool>> = relations
        .iter()
        .map(|(&key, tuples)| {
            let mut mask = vec![false; q.pow(n as u32)];
            for t in tuples {
                mask[encode(t)] = true;
            }
            (key, mask)
        })
        .collect();
    let pos: Vec<usize> = {
        let mut p = vec![0; count];
        for (i, &c) in order.iter().enumerate() {
            p[c] = i;
        }
        p
    };
    // Relations to check when cluster `c` is assigned: neighbors placed earlier.
    let checks: Vec<Vec<usize>> = (0..count)
        .map(|c| {
            adj[c]
                .iter()
                .copied()
                .filter(|&b| pos[b] < pos[c] && b != parent[c])
                .collect()
        })
        .collect();

    let mut tuples: Vec<Vec<usize>> = vec![vec![group.identity(); n]; count];
    let relation = |a: usize, b: usize, ta: &[usize], tb: &[usize]| {
        let (lo, hi, tl, th) = if a < b {
            (a, b, ta, tb)
        } else {
            (b, a, tb, ta)
        };
        let k: Vec<usize> = tl
            .iter()
            .zip(th)
            .map(|(&u, &v)| group.mul(group.inv(u), v))
            .collect();
        allowed[&(lo, hi)][encode(&k)]
    };

    #[allow(clippy::too_many_arguments, clippy::type_complexity)]
    fn search(
        depth: usize,
        order: &[usize],
        parent: &[usize],
        checks: &[Vec<usize>],
        relations: &BTreeMap<(usize, usize), Vec<Vec<usize>>>,
        tuples: &mut Vec<Vec<usize>>,
        group: &FiniteGroup,
        relation: &dyn Fn(usize, usize, &[usize], &[usize]) -> bool,
    ) -> u128 {
        if depth == order.len() {
            return 1;
        }
        let c = order[depth];
        let p = parent[c];
        let (a, b) = (p.min(c), p.max(c));
        let mut total = 0u128;
        for k in &relations[&(a, b)] {
            // t_c from t_p and the pair element (oriented a → b).
            let tc: Vec<usize> = if p == a {
                tuples[p]
                    .iter()
                    .zip(k)
                    .map(|(&u, &v)| group.mul(u, v))
                    .collect()
            } else {
                tuples[p]
                    .iter()
                    .zip(k)
                    .map(|(&u, &v)| group.mul(u, group.inv(v)))
                    .collect()
            };
            if checks[c]
                .iter()
                .all(|&b2| relation(b2, c, &tuples[b2], &tc))
            {
                tuples[c] = tc;
                total += search(
                    depth + 1,
                    order,
                    parent,
                    checks,
                    relations,
                    tuples,
                    group,
                    relation,
                );
            }
        }
        total
    }

    let solutions = search(
        1,
        &order,
        &parent,
        &checks,
        &relations,
        &mut tuples,
        group,
        &relation,
    );
    Ok(gauge * solutions)
}
