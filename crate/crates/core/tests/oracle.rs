use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symrtn::group::{make_cyclic_group, make_symmetric_group, FiniteGroup, ReplicaGroup};
use symrtn::lattice::{
    build_lattice, wall_decomposition, Boundary, PermConfig, SpinConfig, SquareLattice,
};
use symrtn::spin::{
    solution_count_oracle, solution_count_spin, EdgeConstraint, OracleLimits, OracleMethod,
};

fn tuples(q: usize, n: usize) -> Vec<Vec<usize>> {
    (0..q.pow(n as u32))
        .map(|mut i| {
            (0..n)
                .map(|_| {
                    let v = i % q;
                    i /= q;
                    v
                })
                .collect()
        })
        .collect()
}

/// ⟨Φ^{⊗n}| A_x ⊗ A_y |Φ^{⊗n}⟩ for A = (⊗_c U(g_c)) P(σ) on one bond leg,
/// `U(g)|h⟩ = |g·h⟩`, `P(σ)|w⟩ = |w_{σ⁻¹(1)} … w_{σ⁻¹(n)}⟩`, `Φ = Σ_i |ii⟩`.
/// Both operators are permutation matrices, so the trace counts the basis
/// vectors they send to the same image.
fn edge_trace(
    group: &FiniteGroup,
    sx: &[usize],
    gx: &[usize],
    sy: &[usize],
    gy: &[usize],
) -> usize {
    let n = sx.len();
    let q = group.order();
    let image = |s: &[usize], g: &[usize], w: &[usize]| -> Vec<usize> {
        // s is σ⁻¹ as an image list.
        (0..n).map(|c| group.mul(g[c], w[s[c]])).collect()
    };
    tuples(q, n)
        .iter()
        .filter(|w| image(sx, gx, w) == image(sy, gy, w))
        .count()
}

fn check_edge_traces(group: &FiniteGroup, n: usize, all_gx: bool) {
    let r = ReplicaGroup::new(n).unwrap();
    let q = group.order();
    let ts = tuples(q, n);
    let id = vec![group.identity(); n];
    let mut checked = 0;
    for a in 0..r.order() {
        for b in 0..r.order() {
            let c = EdgeConstraint::new(&r, 0, 0, 1, a, b);
            // Labels Γ are inverse to the operator permutations σ; σ⁻¹ = Γ.
            let sx = r.element(a).images().to_vec();
            let sy = r.element(b).images().to_vec();
            let gxs: Vec<&Vec<usize>> = if all_gx {
                ts.iter().collect()
            } else {
                vec![&id]
            };
            for gx in &gxs {
                for gy in &ts {
                    let t = edge_trace(group, &sx, gx, &sy, gy);
                    let want = if c.satisfied(group, gx, gy) {
                        q.pow(c.multiplicity() as u32)
                    } else {
                        0
                    };
                    assert_eq!(t, want, "Γx={a} Γy={b} gx={gx:?} gy={gy:?}");
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 0);
}

#[test]
fn edge_trace_matches_constraints_abelian() {
    check_edge_traces(&make_cyclic_group(2).unwrap(), 2, true);
    check_edge_traces(&make_cyclic_group(3).unwrap(), 3, true);
}

#[test]
fn edge_trace_matches_constraints_non_abelian() {
    let s3 = make_symmetric_group(3).unwrap();
    check_edge_traces(&s3, 2, true);
    check_edge_traces(&s3, 3, false);
}

fn open(w: usize, h: usize) -> SquareLattice {
    build_lattice(w, h, Boundary::Open).unwrap()
}

fn count(config: &SpinConfig, g: &FiniteGroup, lat: &SquareLattice, m: OracleMethod) -> u128 {
    solution_count_spin(config, g, lat, m, &OracleLimits::default()).unwrap()
}

#[test]
fn brute_and_cluster_counts_agree_n2() {
    let z2 = make_cyclic_group(2).unwrap();
    let z3 = make_cyclic_group(3).unwrap();
    let s3 = make_symmetric_group(3).unwrap();
    for (lat, g) in [
        (open(2, 2), &z2),
        (open(2, 2), &z3),
        (open(2, 2), &s3),
        (open(3, 2), &z2),
        (open(3, 2), &z3),
    ] {
        for i in 0..1u64 << lat.num_sites() {
            let c = SpinConfig::from_index(lat.num_sites(), i);
            assert_eq!(
                count(&c, g, &lat, OracleMethod::Brute),
                count(&c, g, &lat, OracleMethod::Clusters),
                "config {i}"
            );
        }
    }
}

#[test]
fn brute_and_cluster_counts_agree_n3() {
    let z2 = make_cyclic_group(2).unwrap();
    let s3 = make_symmetric_group(3).unwrap();
    let r = ReplicaGroup::new(3).unwrap();
    let lat = open(2, 2);
    for i in 0..6u64.pow(4) {
        let c = PermConfig::from_index(&r, 4, i);
        let lim = OracleLimits::default();
        let b = solution_count_oracle(&c, &z2, &lat, &r, OracleMethod::Brute, &lim).unwrap();
        let k = solution_count_oracle(&c, &z2, &lat, &r, OracleMethod::Clusters, &lim).unwrap();
        assert_eq!(b, k, "config {i}");
    }
    // Non-abelian, n = 3, on a two-site chain (6^6 assignments).
    let chain = open(2, 1);
    for i in 0..6u64.pow(2) {
        let c = PermConfig::from_index(&r, 2, i);
        let lim = OracleLimits::default();
        let b = solution_count_oracle(&c, &s3, &chain, &r, OracleMethod::Brute, &lim).unwrap();
        let k = solution_count_oracle(&c, &s3, &chain, &r, OracleMethod::Clusters, &lim).unwrap();
        assert_eq!(b, k, "config {i}");
    }
}

#[test]
fn cyclic_adjacency_counts_agree_on_periodic_lattice() {
    let z2 = make_cyclic_group(2).unwrap();
    let lat = build_lattice(3, 3, Boundary::Periodic).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..6 {
        let c = SpinConfig::from_index(9, rng.random_range(0..512));
        assert_eq!(
            count(&c, &z2, &lat, OracleMethod::Brute),
            count(&c, &z2, &lat, OracleMethod::Clusters)
        );
    }
}

#[test]
fn documented_counts() {
    let z2 = make_cyclic_group(2).unwrap();
    let lat = open(3, 3);
    let mut c = SpinConfig::all_up(9);
    c.flip(4);
    assert_eq!(count(&c, &z2, &lat, OracleMethod::Brute), 8);
    assert_eq!(count(&c, &z2, &lat, OracleMethod::Clusters), 8);
    assert_eq!(
        count(&SpinConfig::all_up(9), &z2, &lat, OracleMethod::Clusters),
        4
    );

    let sq = open(2, 2);
    let diag = SpinConfig::new(vec![1, -1, -1, 1]).unwrap();
    assert_eq!(count(&diag, &z2, &sq, OracleMethod::Brute), 32);
    assert_eq!(wall_decomposition(&diag, &sq).eta(), 1);
}

/// `|G|^{n + Σ_walls (n − χ_wall)}`.
fn wall_law(config: &PermConfig, lat: &SquareLattice, r: &ReplicaGroup, q: usize) -> u128 {
    let w = wall_decomposition(config, lat);
    let n = r.n();
    let exp = n + w
        .walls
        .iter()
        .map(|wall| n - w.wall_cycle_count(wall, config, r))
        .sum::<usize>();
    (q as u128).pow(exp as u32)
}

#[test]
fn n3_wall_law_on_2x3_sample() {
    let z2 = make_cyclic_group(2).unwrap();
    let r = ReplicaGroup::new(3).unwrap();
    let lat = open(3, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut trees = 0;
    while trees < 12 {
        // Few distinct labels make tree adjacency likely.
        let labels: Vec<usize> = (0..rng.random_range(2..4))
            .map(|_| rng.random_range(0..6))
            .collect();
        let values = (0..6)
            .map(|_| labels[rng.random_range(0..labels.len())])
            .collect();
        let c = PermConfig::new(&r, values).unwrap();
        let cl = symrtn::lattice::clusters(&c, &lat);
        if !cl.adjacency_is_tree(&lat) {
            continue;
        }
        trees += 1;
        let b = solution_count_oracle(
            &c,
            &z2,
            &lat,
            &r,
            OracleMethod::Brute,
            &OracleLimits::default(),
        )
        .unwrap();
        assert_eq!(b, wall_law(&c, &lat, &r, 2));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tree_configs_follow_wall_formula(index in 0u64..512, which in 0usize..3) {
        let groups = [make_cyclic_group(2).unwrap(), make_cyclic_group(3).unwrap(), make_symmetric_group(3).unwrap()];
        let g = &groups[which];
        let lat = open(3, 3);
        let c = SpinConfig::from_index(9, index);
        let cl = symrtn::lattice::clusters(&c, &lat);
        let got = count(&c, g, &lat, OracleMethod::Clusters);
        if cl.adjacency_is_tree(&lat) {
            let eta = wall_decomposition(&c, &lat).eta() as u32;
            prop_assert_eq!(got, (g.order() as u128).pow(2 + eta));
        }
    }

    #[test]
    fn counts_invariant_under_global_flip(index in 0u64..64) {
        let z3 = make_cyclic_group(3).unwrap();
        let lat = open(3, 2);
        let c = SpinConfig::from_index(6, index);
        prop_assert_eq!(count(&c, &z3, &lat, OracleMethod::Clusters), count(&c.flipped_all(), &z3, &lat, OracleMethod::Clusters));
    }
}
