mod common;

use landau_core::reference;
use landau_core::scattering::{picard_solve, PicardOptions};
use landau_core::uq::{check_corollary, check_theorem_bounds, gpc_coefficients, run_collocation, CollocationNodes};
use landau_core::{NodeFamily, ProfileSpec};

#[test]
fn z_independent_profile_gives_identical_nodes() {
    let g = common::small_grids();
    let p = reference::params();
    let spec = reference::z_independent_profile();
    let nodes = CollocationNodes::new(NodeFamily::GaussLegendre, 5).unwrap();
    let ens = run_collocation(&spec, &p, &nodes, &g, &PicardOptions::default()).unwrap();
    let first = &ens.members()[0].field;
    assert!(ens.members().iter().all(|m| &m.field == first));
    let gpc = gpc_coefficients(&ens).unwrap();
    assert!(gpc.norms[1..].iter().all(|&c| c <= 1e-12 * gpc.norms[0]));
    let th = check_theorem_bounds(&ens, 2, p.a1).unwrap();
    assert!(th.orders.iter().all(|o| o.spectral <= 1e-12 * th.field_bound.value));
    let co = check_corollary(&ens, &spec).unwrap();
    assert!(co.pass);
    assert!(co.orders[1..].iter().all(|o| o.norm <= 1e-12 * co.orders[0].norm));
}

#[test]
fn single_node_is_a_deterministic_solve() {
    let g = common::small_grids();
    let p = reference::params();
    let spec = reference::profile();
    let nodes = CollocationNodes::new(NodeFamily::GaussLegendre, 1).unwrap();
    let ens = run_collocation(&spec, &p, &nodes, &g, &PicardOptions::default()).unwrap();
    let direct = picard_solve(&spec, &p, 0.0, &g, &PicardOptions::default()).unwrap();
    assert_eq!(ens.members()[0].field, direct.field);
    assert!(check_theorem_bounds(&ens, 2, p.a1).unwrap().orders.is_empty());
}

#[test]
fn zero_amplitude_profile_has_no_residual() {
    let g = common::small_grids();
    let p = reference::params();
    let spec = reference::profile();
    let zero = ProfileSpec::new(spec.modes().to_vec(), spec.shape(), 0.0).unwrap();
    let nodes = CollocationNodes::new(NodeFamily::Chebyshev, 4).unwrap();
    let ens = run_collocation(&zero, &p, &nodes, &g, &PicardOptions::default()).unwrap();
    let co = check_corollary(&ens, &zero).unwrap();
    assert!(co.orders.iter().all(|o| o.norm == 0.0));
}

#[test]
fn failing_node_is_reported_by_index() {
    let g = common::small_grids();
    let p = reference::params();
    // c1(z) = 1.5e-4 (1 + 40 z) breaks the decay gate for z near 1 only
    let spec = reference::profile();
    let mut modes = spec.modes().to_vec();
    modes[1].coefficient = landau_core::ZDependence::Polynomial {
        coeffs: vec![
            num_complex::Complex64::new(1.5e-4, 0.0),
            num_complex::Complex64::new(6e-3, 0.0),
        ],
    };
    let steep = ProfileSpec::new(modes, spec.shape(), 1.0).unwrap();
    let nodes = CollocationNodes::new(NodeFamily::GaussLegendre, 3).unwrap();
    let err = run_collocation(&steep, &p, &nodes, &g, &PicardOptions::default()).unwrap_err();
    match err {
        landau_core::Error::NodeFailed { index, .. } => assert_ne!(index, 1),
        e => panic!("{e}"),
    }
}
