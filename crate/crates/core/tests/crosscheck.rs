//! Haar averages of replica traces against exact partition functions.
//! Statistical checks use fixed seeds and a 4σ band.

use symrtn::group::{make_cyclic_group, make_symmetric_group, FiniteGroup};
use symrtn::lattice::{build_lattice, Boundary, RegionSpec};
use symrtn::peps::{haar_average, PepsSpec};
use symrtn::spin::{exact_partition, ActionParams, Variant, WeightMode};

#[allow(clippy::too_many_arguments)]
fn check(
    w: usize,
    h: usize,
    d: usize,
    bond: usize,
    group: Option<FiniteGroup>,
    n: usize,
    sites: &[usize],
    samples: u64,
) {
    let lat = build_lattice(w, h, Boundary::Open).unwrap();
    let region = RegionSpec::from_sites(&lat, sites).unwrap();
    let spec = PepsSpec::uniform(lat.clone(), d, bond, group.clone()).unwrap();
    let avg = haar_average(&spec, &region, n as u32, samples, 2024).unwrap();
    let params = ActionParams::uniform(lat, d, bond, group, n, region)
        .unwrap()
        .with_weight_mode(WeightMode::Oracle);
    let z1 = exact_partition(&params, Variant::Z1).unwrap().z();
    let z0 = exact_partition(&params, Variant::Z0).unwrap().z();
    let (s1, s0) = (avg.z1.z_score(z1), avg.z0.z_score(z0));
    println!("{w}x{h} d={d} D={bond} n={n}: Z1 {:.6e} vs {z1:.6e} (z={s1:.2}), Z0 {:.6e} vs {z0:.6e} (z={s0:.2})", avg.z1.mean, avg.z0.mean);
    assert!(s1.abs() < 4.0 && s0.abs() < 4.0);
}

#[test]
fn non_abelian_chain_two_copies() {
    check(
        2,
        1,
        2,
        6,
        Some(make_symmetric_group(3).unwrap()),
        2,
        &[0],
        20_000,
    );
}

#[test]
fn non_abelian_chain_three_copies() {
    check(
        2,
        1,
        2,
        6,
        Some(make_symmetric_group(3).unwrap()),
        3,
        &[0],
        20_000,
    );
}

#[test]
fn non_abelian_plaquette_two_copies() {
    check(
        2,
        2,
        2,
        6,
        Some(make_symmetric_group(3).unwrap()),
        2,
        &[0],
        20_000,
    );
}

#[test]
fn z3_plaquette_two_copies() {
    check(
        2,
        2,
        2,
        3,
        Some(make_cyclic_group(3).unwrap()),
        2,
        &[0, 3],
        20_000,
    );
}

#[test]
fn z2_chain_three_copies() {
    check(
        3,
        1,
        2,
        2,
        Some(make_cyclic_group(2).unwrap()),
        3,
        &[1],
        20_000,
    );
}

#[test]
fn unsymmetric_three_copies() {
    check(2, 1, 3, 2, None, 3, &[0], 20_000);
}

#[test]
fn single_site_is_exact() {
    let lat = build_lattice(1, 1, Boundary::Open).unwrap();
    let region = RegionSpec::from_sites(&lat, &[0]).unwrap();
    let spec = PepsSpec::uniform(lat.clone(), 2, 1, None).unwrap();
    let avg = haar_average(&spec, &region, 2, 100, 1).unwrap();
    assert!((avg.z0.mean - 1.0).abs() < 1e-12 && avg.z0.stderr < 1e-12);
    let params = ActionParams::uniform(lat, 2, 1, None, 2, region).unwrap();
    assert!((exact_partition(&params, Variant::Z0).unwrap().z() - 1.0).abs() < 1e-14);
}

#[test]
fn non_abelian_plaquette_three_copies() {
    check(
        2,
        2,
        2,
        6,
        Some(make_symmetric_group(3).unwrap()),
        3,
        &[0, 1],
        10_000,
    );
}
