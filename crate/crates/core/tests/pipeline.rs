//! End-to-end pipeline checks on the canonical meshes: lazy generators
//! verified against the homology oracle, and the linking-number change of
//! basis validated for every shape.

mod common;

use common::{fixture, gauss_linking_numeric};
use dsforge_core::basis::{
    build_linking_matrix, change_of_basis, dual_cycles_for_lane, linking_number,
    order_thinned_cells, CycleSource,
};
use dsforge_core::complex::{pairing, Chain};
use dsforge_core::ds::{run_ds, RunOptions};
use dsforge_core::dual::DualComplex;
use dsforge_core::error::BasisError;
use dsforge_core::mesh::generate::CanonicalShape;
use dsforge_core::oracle::{homology, pairing_matrix, surface_homology, verify_span, CellSelection};
use dsforge_core::snf::determinant;
use dsforge_core::surface::{build_tree_cotree, extract_components};
use num_bigint::BigInt;
use num_traits::{One, Signed};

fn validate_options() -> RunOptions {
    RunOptions {
        validate: true,
        ..Default::default()
    }
}

#[test]
fn surface_beta_matches_tree_cotree_leftover() {
    for shape in CanonicalShape::ALL {
        let fx = fixture(shape, 1);
        let comps = extract_components(&fx.split).unwrap();
        let genera: Vec<usize> = comps.iter().map(|c| c.genus).collect();
        assert_eq!(genera, shape.expected_genera(), "{shape:?}");
        for comp in &comps {
            let tc = build_tree_cotree(comp).unwrap();
            let h1 = surface_homology(comp, 1);
            assert_eq!(h1.betti, tc.leftover_edges.len(), "{shape:?}");
            assert_eq!(h1.betti, 2 * comp.genus);
            assert!(h1.torsion.is_empty());
        }
    }
}

#[test]
fn surface_generators_pair_unimodularly_with_surface_homology() {
    for shape in [CanonicalShape::SolidTorusInBox, CanonicalShape::Genus2HandlebodyInBox] {
        let fx = fixture(shape, 1);
        let out = run_ds(&fx.split, &validate_options()).unwrap();
        let comps = extract_components(&fx.split).unwrap();
        for (comp, set) in comps.iter().zip(&out.surface_sets) {
            if set.lanes() == 0 {
                continue;
            }
            let h1 = surface_homology(comp, 1);
            let lanes: Vec<_> = (0..set.lanes()).map(|l| set.cocycles.lane(l)).collect();
            let p = pairing_matrix(&lanes, &h1);
            let det = determinant(&p);
            assert_eq!(det.clone().abs(), BigInt::one(), "{shape:?}: det {det}");
        }
    }
}

#[test]
fn lazy_generators_span_insulator_cohomology() {
    for shape in CanonicalShape::ALL {
        let fx = fixture(shape, 1);
        let out = run_ds(&fx.split, &validate_options()).unwrap();
        let expected_beta = fx.shape.expected_beta1();
        assert_eq!(out.lazy.count(), 2 * expected_beta, "{shape:?} lazy count");

        let sel = CellSelection::from_subcomplex(&fx.split.k_a);
        let h1 = homology(&fx.complex, &sel, 1);
        assert_eq!(h1.betti, expected_beta, "{shape:?} beta1");
        assert!(h1.torsion.is_empty());

        let report = verify_span(&out.lazy.lane_cochains(), &h1);
        assert!(report.pass, "{shape:?}: {report:?}");
    }
}

#[test]
fn torus_lane_distinguishes_hole_loop_from_contractible_loop() {
    let fx = fixture(CanonicalShape::SolidTorusInBox, 1);
    let out = run_ds(&fx.split, &validate_options()).unwrap();
    let sel = CellSelection::from_subcomplex(&fx.split.k_a);
    let h1 = homology(&fx.complex, &sel, 1);
    let hole_loop = &h1.cycles[0];

    let lanes = out.lazy.lane_cochains();
    let pairings: Vec<i64> = lanes
        .iter()
        .map(|lane| pairing(lane, hole_loop).unwrap()[0])
        .collect();
    // exactly one of the two lanes detects the through-hole loop
    assert_eq!(pairings.iter().filter(|p| p.abs() == 1).count(), 1, "{pairings:?}");
    assert_eq!(pairings.iter().filter(|p| **p == 0).count(), 1, "{pairings:?}");

    // a contractible loop: boundary of any insulator face pairs to zero
    let face = fx.split.k_a.cells(2).next().unwrap();
    let contractible = fx
        .complex
        .boundary(&Chain::singleton(2, face, 1))
        .unwrap();
    for lane in &lanes {
        assert_eq!(pairing(lane, &contractible).unwrap()[0], 0);
    }
}

#[test]
fn torus_submerged_cycle_is_a_single_closed_ring() {
    let fx = fixture(CanonicalShape::SolidTorusInBox, 1);
    let out = run_ds(&fx.split, &validate_options()).unwrap();
    let dual = DualComplex::build(fx.complex.clone()).unwrap();
    let t = &out.thinned[0];
    let mut nonempty = 0;
    for lane in 0..t.currents.lanes {
        match order_thinned_cells(t, lane, &dual, &fx.split.k_c) {
            Ok(cycle) => {
                nonempty += 1;
                assert!(cycle.polyline.len() >= 7);
                assert_eq!(cycle.polyline.first(), cycle.polyline.last());
            }
            Err(BasisError::EmptySupport { .. }) => {}
            Err(e) => panic!("unexpected error {e:?}"),
        }
    }
    assert!(nonempty >= 1);
}

#[test]
fn zero_lane_reports_empty_support() {
    let fx = fixture(CanonicalShape::SolidTorusInBox, 1);
    let dual = DualComplex::build(fx.complex.clone()).unwrap();
    let empty = dsforge_core::ds::ThinnedCurrentSet {
        component: 0,
        currents: dsforge_core::complex::Cochain::new(2, 1),
    };
    let err = order_thinned_cells(&empty, 0, &dual, &fx.split.k_c).unwrap_err();
    assert_eq!(err, BasisError::EmptySupport { lane: 0 });
}

#[test]
fn change_of_basis_on_all_canonical_shapes() {
    for shape in CanonicalShape::ALL {
        let fx = fixture(shape, 1);
        let out = run_ds(&fx.split, &validate_options()).unwrap();
        let dual = DualComplex::build(fx.complex.clone()).unwrap();
        let link = build_linking_matrix(&dual, &fx.split, &out.surface_sets, &out.thinned).unwrap();
        assert_eq!(link.size(), out.lazy.count(), "{shape:?}");

        let selection = change_of_basis(&out.lazy, &link).unwrap();
        let beta = fx.shape.expected_beta1();
        assert_eq!(selection.rank, beta, "{shape:?}: {:?}", link.entries);

        // combined generators must be cocycles on the insulator and pair
        // unimodularly with the oracle homology basis
        let sel = CellSelection::from_subcomplex(&fx.split.k_a);
        let h1 = homology(&fx.complex, &sel, 1);
        let gens = selection.combined_generators(&out.lazy);
        assert_eq!(gens.len(), beta);
        for g in &gens {
            let dg = fx.complex.coboundary(g).unwrap();
            for (&f, vals) in &dg.values {
                if fx.split.k_a.contains(2, f) {
                    assert!(vals.iter().all(|v| *v == 0), "{shape:?}: face {f}");
                }
            }
            // cohomologically nontrivial: pairs nonzero with some cycle
            let nontrivial = h1
                .cycles
                .iter()
                .any(|c| pairing(g, c).unwrap()[0] != 0);
            assert!(nontrivial, "{shape:?}: trivial combined generator");
        }
        let p = pairing_matrix(&gens, &h1);
        let det = determinant(&p);
        assert_eq!(det.clone().abs(), BigInt::one(), "{shape:?}: det {det}");
    }
}

#[test]
fn trefoil_framing_distinguishes_it_from_the_unknotted_torus() {
    // the push-off framing of the tube core shows up as the self entry of
    // the linking matrix: zero for the flat ring, three crossings' worth of
    // writhe for the braided tube
    let mut magnitudes = std::collections::BTreeMap::new();
    for shape in [CanonicalShape::SolidTorusInBox, CanonicalShape::TrefoilTubeInBox] {
        let fx = fixture(shape, 1);
        let out = run_ds(&fx.split, &validate_options()).unwrap();
        let dual = DualComplex::build(fx.complex.clone()).unwrap();
        let link = build_linking_matrix(&dual, &fx.split, &out.surface_sets, &out.thinned).unwrap();
        let mut abs: Vec<i64> = link.entries.iter().flatten().map(|v| v.abs()).collect();
        abs.sort_unstable();
        magnitudes.insert(shape.name(), abs);
    }
    assert_eq!(magnitudes["solid-torus-in-box"], vec![0, 0, 0, 1]);
    assert_eq!(magnitudes["trefoil-tube-in-box"], vec![0, 0, 1, 3]);
}

#[test]
fn hopf_linking_matrix_contains_a_unit_entry() {
    let fx = fixture(CanonicalShape::HopfLinkInBox, 1);
    let out = run_ds(&fx.split, &validate_options()).unwrap();
    let dual = DualComplex::build(fx.complex.clone()).unwrap();
    let link = build_linking_matrix(&dual, &fx.split, &out.surface_sets, &out.thinned).unwrap();
    let has_unit = link
        .entries
        .iter()
        .flatten()
        .any(|v| v.abs() == 1);
    assert!(has_unit, "{:?}", link.entries);
}

#[test]
fn linking_sign_convention_is_pinned() {
    use dsforge_core::geometry::point_i64;
    // counterclockwise square in the xy-plane, seen from +z
    let a = dsforge_core::basis::DualCycle {
        polyline: vec![
            point_i64(2, 2, 0),
            point_i64(-2, 2, 0),
            point_i64(-2, -2, 0),
            point_i64(2, -2, 0),
            point_i64(2, 2, 0),
        ],
        source: CycleSource::ThinnedCurrent { component: 0, lane: 0 },
    };
    // threads the square downward through its center
    let b = dsforge_core::basis::DualCycle {
        polyline: vec![
            point_i64(4, 0, 2),
            point_i64(0, 0, 2),
            point_i64(0, 0, -2),
            point_i64(4, 0, -2),
            point_i64(4, 0, 2),
        ],
        source: CycleSource::SurfaceGenerator { component: 0, lane: 0 },
    };
    let exact = linking_number(&a, &b).unwrap();
    assert_eq!(exact, -1);
    let numeric = gauss_linking_numeric(&a, &b);
    assert!((numeric - exact as f64).abs() < 0.1, "numeric {numeric}");
    // reversing one cycle negates the number
    let mut b_rev = b.clone();
    b_rev.polyline.reverse();
    assert_eq!(linking_number(&a, &b_rev).unwrap(), 1);
}

#[test]
fn exact_linking_agrees_with_gauss_quadrature() {
    let mut checked = 0usize;
    for shape in CanonicalShape::ALL {
        let fx = fixture(shape, 1);
        let out = run_ds(&fx.split, &validate_options()).unwrap();
        let dual = DualComplex::build(fx.complex.clone()).unwrap();

        let mut submerged = Vec::new();
        for t in &out.thinned {
            for lane in 0..t.currents.lanes {
                let cycles = dual_cycles_for_lane(
                    t,
                    lane,
                    &dual,
                    &fx.split.k_c,
                    CycleSource::ThinnedCurrent { component: t.component, lane },
                )
                .unwrap();
                submerged.extend(cycles);
            }
        }
        let mut shifted = Vec::new();
        for set in &out.surface_sets {
            let ta = dsforge_core::ds::thin_currents(set, &fx.split.k_a);
            for lane in 0..set.lanes() {
                let cycles = dual_cycles_for_lane(
                    &ta,
                    lane,
                    &dual,
                    &fx.split.k_a,
                    CycleSource::SurfaceGenerator { component: set.component, lane },
                )
                .unwrap();
                shifted.extend(cycles);
            }
        }
        for a in &submerged {
            for b in &shifted {
                let exact = linking_number(a, b).unwrap();
                assert_eq!(linking_number(b, a).unwrap(), exact, "{shape:?}: asymmetric");
                let numeric = gauss_linking_numeric(a, b);
                assert!(
                    (numeric - exact as f64).abs() < 0.1,
                    "{shape:?}: exact {exact} vs numeric {numeric}"
                );
                checked += 1;
            }
        }
    }
    assert!(checked >= 20, "only {checked} cycle pairs checked");
}
