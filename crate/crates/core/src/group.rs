//! Finite groups given by multiplication tables, their regular representations,
//! and the replica permutation groups `Sym_n`.
//!
//! Elements are dense indices with the identity at index 0. The symmetry group
//! `G` acting on virtual bonds and the replica group acting on copies share the
//! [`FiniteGroup`] machinery but are kept in distinct types ([`FiniteGroup`] vs
//! [`ReplicaGroup`]) so no signature mixes the two.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A finite group stored as a dense multiplication table.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    name: String,
    order: usize,
    /// Row-major: `table[a * order + b]` is the index of `a·b`.
    table: Vec<usize>,
    inverse: Vec<usize>,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteGroup")
            .field("name", &self.name)
            .field("order", &self.order)
            .finish()
    }
}

impl FiniteGroup {
    /// Builds a group from a square multiplication table, validating all group axioms.
    ///
    /// The identity must sit at index 0.
    pub fn from_table(name: impl Into<String>, rows: Vec<Vec<usize>>) -> Result<Self> {
        let order = rows.len();
        if order == 0 {
            return Err(Error::InvalidGroup("empty table".into()));
        }
        let mut table = Vec::with_capacity(order * order);
        for (a, row) in rows.iter().enumerate() {
            if row.len() != order {
                return Err(Error::InvalidGroup(format!(
                    "row {a} has length {}",
                    row.len()
                )));
            }
            for &v in row {
                if v >= order {
                    return Err(Error::InvalidGroup(format!(
                        "entry {v} in row {a} is not an element"
                    )));
                }
            }
            table.extend_from_slice(row);
        }
        let mut inverse = vec![usize::MAX; order];
        for a in 0..order {
            if table[a] != a || table[a * order] != a {
                return Err(Error::InvalidGroup(
                    "index 0 is not a two-sided identity".into(),
                ));
            }
            for b in 0..order {
                if table[a * order + b] == 0 {
                    if table[b * order + a] != 0 {
                        return Err(Error::InvalidGroup(format!(
                            "{b} is a right but not left inverse of {a}"
                        )));
                    }
                    inverse[a] = b;
                }
            }
            if inverse[a] == usize::MAX {
                return Err(Error::InvalidGroup(format!("element {a} has no inverse")));
            }
        }
        let group = FiniteGroup {
            name: name.into(),
            order,
            table,
            inverse,
        };
        for a in 0..order {
            for b in 0..order {
                for c in 0..order {
                    if group.mul(group.mul(a, b), c) != group.mul(a, group.mul(b, c)) {
                        return Err(Error::InvalidGroup(format!(
                            "associativity fails at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        Ok(group)
    }

    /// Looks up a group by registry name: `Z<n>` (cyclic) or `S<k>` (symmetric, k ≤ 5).
    pub fn by_name(name: &str) -> Result<Self> {
        let bad = || {
            Error::InvalidArgument(format!(
                "unknown group '{name}' (expected Z<n> or S<k>, e.g. Z2, Z3, S3)"
            ))
        };
        let (kind, digits) =
            name.split_at(name.find(|c: char| c.is_ascii_digit()).ok_or_else(bad)?);
        let k: usize = digits.parse().map_err(|_| bad())?;
        match kind {
            "Z" => make_cyclic_group(k),
            "S" => make_symmetric_group(k),
            _ => Err(bad()),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        0
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn check_element(&self, g: usize) -> Result<()> {
        if g < self.order {
            Ok(())
        } else {
            Err(Error::ElementOutOfRange {
                index: g,
                order: self.order,
            })
        }
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..self.order).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Multiplication table as nested rows.
    pub fn table(&self) -> Vec<Vec<usize>> {
        self.table
            .chunks(self.order)
            .map(<[usize]>::to_vec)
            .collect()
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }
}

/// The cyclic group `Z_n`, element `k` standing for `k mod n`.
pub fn make_cyclic_group(n: usize) -> Result<FiniteGroup> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "cyclic group order must be at least 1".into(),
        ));
    }
    let rows = (0..n)
        .map(|a| (0..n).map(|b| (a + b) % n).collect())
        .collect();
    FiniteGroup::from_table(format!("Z{n}"), rows)
}

/// The symmetric group on `k` letters, elements in lexicographic order of their image arrays.
pub fn make_symmetric_group(k: usize) -> Result<FiniteGroup> {
    if !(1..=5).contains(&k) {
        return Err(Error::InvalidArgument(format!(
            "symmetric group degree must be in 1..=5, got {k}"
        )));
    }
    let elements = Permutation::all(k);
    let rows = compose_table(&elements);
    FiniteGroup::from_table(format!("S{k}"), rows)
}

fn compose_table(elements: &[Permutation]) -> Vec<Vec<usize>> {
    let index_of = |p: &Permutation| elements.binary_search(p).expect("closed under composition");
    elements
        .iter()
        .map(|p| {
            elements
                .iter()
                .map(|q| index_of(&p.compose(q).expect("same degree")))
                .collect()
        })
        .collect()
}

/// The regular representation `U(g)|h⟩ = |g·h⟩` of a finite group.
#[derive(Debug, Clone)]
pub struct RegularRep<'a> {
    group: &'a FiniteGroup,
}

impl<'a> RegularRep<'a> {
    pub fn new(group: &'a FiniteGroup) -> Self {
        RegularRep { group }
    }

    pub fn dimension(&self) -> usize {
        self.group.order()
    }

    /// Basis index that `U(g)` sends basis vector `h` to.
    #[inline]
    pub fn act(&self, g: usize, h: usize) -> usize {
        self.group.mul(g, h)
    }

    /// The 0/1 permutation matrix of left multiplication by `g`.
    pub fn matrix(&self, g: usize) -> Result<DMatrix<f64>> {
        self.group.check_element(g)?;
        let n = self.dimension();
        let mut m = DMatrix::zeros(n, n);
        for h in 0..n {
            m[(self.act(g, h), h)] = 1.0;
        }
        Ok(m)
    }
}

/// Convenience wrapper for [`RegularRep::matrix`].
pub fn regular_representation(group: &FiniteGroup, g: usize) -> Result<DMatrix<f64>> {
    RegularRep::new(group).matrix(g)
}

/// A permutation of `{0..n-1}`; `images[i]` is where `i` is sent.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Permutation {
    /// Cycle notation with 1-based letters, fixed points included: `(1 2)(3)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for cycle in self.cycles() {
            write!(f, "(")?;
            for (k, i) in cycle.iter().enumerate() {
                if k > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", i + 1)?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        if n == 0 {
            return Err(Error::InvalidArgument(
                "permutation must act on at least one letter".into(),
            ));
        }
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::InvalidArgument(format!(
                    "{images:?} is not a bijection"
                )));
            }
            seen[i] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    /// Sends copy `i` to copy `i + 1 mod n`.
    pub fn cyclic_shift(n: usize) -> Self {
        Permutation {
            images: (0..n).map(|i| (i + 1) % n).collect(),
        }
    }

    /// Transposition of letters `a` and `b`.
    pub fn transposition(n: usize, a: usize, b: usize) -> Result<Self> {
        if a >= n || b >= n {
            return Err(Error::InvalidArgument(format!(
                "transposition ({a} {b}) outside {n} letters"
            )));
        }
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(a, b);
        Ok(Permutation { images })
    }

    /// All permutations of `n` letters in lexicographic order (identity first).
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut current: Vec<usize> = (0..n).collect();
        let mut out = vec![Permutation {
            images: current.clone(),
        }];
        // Standard next-permutation walk.
        while let Some(i) = (0..n.saturating_sub(1))
            .rev()
            .find(|&i| current[i] < current[i + 1])
        {
            let j = (i + 1..n)
                .rev()
                .find(|&j| current[j] > current[i])
                .expect("pivot exists");
            current.swap(i, j);
            current[i + 1..].reverse();
            out.push(Permutation {
                images: current.clone(),
            });
        }
        out
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.n() != other.n() {
            return Err(Error::PermutationMismatch {
                left: self.n(),
                right: other.n(),
            });
        }
        Ok(Permutation {
            images: other.images.iter().map(|&i| self.images[i]).collect(),
        })
    }

    pub fn invert(&self) -> Permutation {
        let mut images = vec![0; self.n()];
        for (i, &j) in self.images.iter().enumerate() {
            images[j] = i;
        }
        Permutation { images }
    }

    /// Cycles including fixed points, each starting from its smallest letter.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n()];
        let mut cycles = Vec::new();
        for start in 0..self.n() {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(i);
                i = self.images[i];
            }
            cycles.push(cycle);
        }
        cycles
    }

    pub fn cycle_count(&self) -> usize {
        self.cycles().len()
    }

    /// Cycle lengths in non-increasing order; the conjugacy class label.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut lens: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        lens.sort_unstable_by(|a, b| b.cmp(a));
        lens
    }
}

/// Free-function form of [`Permutation::cycle_count`].
pub fn cycle_count(p: &Permutation) -> usize {
    p.cycle_count()
}

/// The replica group `Sym_n` with precomputed composition, inverses and cycle counts.
///
/// Configuration values in the `Sym_n` spin model are element indices into
/// this group; index 0 is the identity.
#[derive(Debug, Clone)]
pub struct ReplicaGroup {
    group: FiniteGroup,
    elements: Vec<Permutation>,
    cycles: Vec<usize>,
    cyclic: usize,
}

impl ReplicaGroup {
    pub fn new(n: usize) -> Result<Self> {
        let group = make_symmetric_group(n)?;
        let elements = Permutation::all(n);
        let cycles = elements.iter().map(Permutation::cycle_count).collect();
        let cyclic = elements
            .binary_search(&Permutation::cyclic_shift(n))
            .expect("cyclic shift is an element");
        Ok(ReplicaGroup {
            group,
            elements,
            cycles,
            cyclic,
        })
    }

    pub fn n(&self) -> usize {
        self.elements[0].n()
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn element(&self, idx: usize) -> &Permutation {
        &self.elements[idx]
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn index_of(&self, p: &Permutation) -> Option<usize> {
        self.elements.binary_search(p).ok()
    }

    pub fn identity(&self) -> usize {
        0
    }

    /// Index of the cyclic shift `C^{(n)}` used as the pinning field inside the region.
    pub fn cyclic(&self) -> usize {
        self.cyclic
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.group.mul(a, b)
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.group.inv(a)
    }

    #[inline]
    pub fn cycle_count(&self, a: usize) -> usize {
        self.cycles[a]
    }

    /// Cycle count of `a⁻¹·b`.
    #[inline]
    pub fn relative_cycles(&self, a: usize, b: usize) -> usize {
        self.cycles[self.mul(self.inv(a), b)]
    }

    /// Maps the `n = 2` Ising variable to a replica index: `+1 ↔ identity`, `−1 ↔ swap`.
    pub fn from_spin(&self, s: i8) -> usize {
        if s > 0 {
            0
        } else {
            self.cyclic
        }
    }
}
