//! Surface extraction edge cases that need whole-mesh fixtures, plus the
//! canonical-cycle pairing of the flat-torus generators.

mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use dsforge_core::basis::{build_linking_matrix, change_of_basis};
use dsforge_core::complex::{pairing, Chain};
use dsforge_core::ds::{run_ds, RunOptions};
use dsforge_core::dual::DualComplex;
use dsforge_core::error::SurfaceError;
use dsforge_core::mesh::generate::VoxelGrid;
use dsforge_core::mesh::split_regions;
use dsforge_core::surface::{
    build_tree_cotree, close_generators, components_from_triangles, extract_components,
};

#[test]
fn rp2_is_rejected_as_non_orientable() {
    let tris: Vec<[u32; 3]> = vec![
        [0, 1, 4],
        [0, 1, 5],
        [0, 2, 3],
        [0, 2, 5],
        [0, 3, 4],
        [1, 2, 3],
        [1, 2, 4],
        [1, 3, 5],
        [2, 4, 5],
        [3, 4, 5],
    ];
    let err = components_from_triangles(&tris).unwrap_err();
    assert!(matches!(err, SurfaceError::NonOrientable { .. }), "{err:?}");
}

#[test]
fn conductor_touching_outer_boundary_is_not_closed() {
    // conductor voxel in the box corner: its outer faces get excluded from
    // the conductor boundary, leaving an open surface
    let mut g = VoxelGrid::filled([3, 3, 3], 2);
    g.set(0, 0, 0, 1);
    let complex = Arc::new(g.to_mesh().build_complex().unwrap());
    let split = split_regions(complex, &BTreeSet::from([1]), true).unwrap();
    let err = extract_components(&split).unwrap_err();
    assert!(matches!(err, SurfaceError::NotClosedSurface { .. }), "{err:?}");
}

#[test]
fn conductor_touching_outer_boundary_closes_without_exclusion() {
    let mut g = VoxelGrid::filled([3, 3, 3], 2);
    g.set(0, 0, 0, 1);
    let complex = Arc::new(g.to_mesh().build_complex().unwrap());
    let split = split_regions(complex, &BTreeSet::from([1]), false).unwrap();
    let comps = extract_components(&split).unwrap();
    assert_eq!(comps.len(), 1);
    assert_eq!(comps[0].genus, 0);
}

#[test]
fn flat_torus_generators_pair_with_canonical_cycles() {
    // 3x3 grid torus with sides identified; vertex (i, j) has id 3i + j
    let v = |i: u32, j: u32| (i % 3) * 3 + (j % 3);
    let mut tris = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            tris.push([v(i, j), v(i + 1, j), v(i + 1, j + 1)]);
            tris.push([v(i, j), v(i + 1, j + 1), v(i, j + 1)]);
        }
    }
    let comps = components_from_triangles(&tris).unwrap();
    let comp = &comps[0];
    let tc = build_tree_cotree(comp).unwrap();
    let gens = close_generators(comp, &tc, 0);
    assert_eq!(gens.lanes(), 2);

    // canonical homology cycles: one loop in each grid direction
    let edge_id = |a: u32, b: u32| -> u32 {
        let key = [a.min(b), a.max(b)];
        let local = comp
            .edges
            .iter()
            .position(|&e| {
                let ev = comp.edge_vertex_pair(
                    comp.edges.binary_search(&e).unwrap() as u32
                );
                let mut pair = [comp.verts[ev[0] as usize], comp.verts[ev[1] as usize]];
                pair.sort_unstable();
                pair == key
            })
            .unwrap_or_else(|| panic!("edge {key:?} missing"));
        comp.edges[local]
    };
    let loop_chain = |verts: [u32; 3]| -> Chain {
        let mut c = Chain::new(1);
        for (k, &a) in verts.iter().enumerate() {
            let b = verts[(k + 1) % 3];
            let e = edge_id(a, b);
            // orient each step from a to b against the stored edge order
            let sign = if a < b { 1 } else { -1 };
            c.add(e, sign);
        }
        c
    };
    let meridian = loop_chain([v(0, 0), v(1, 0), v(2, 0)]);
    let longitude = loop_chain([v(0, 0), v(0, 1), v(0, 2)]);

    let mut matrix = [[0i64; 2]; 2];
    for (lane, _) in gens.closing_edges.iter().enumerate() {
        let cochain = gens.cocycles.lane(lane);
        matrix[0][lane] = pairing(&cochain, &meridian).unwrap()[0];
        matrix[1][lane] = pairing(&cochain, &longitude).unwrap()[0];
    }
    // unimodular pairing against the canonical basis: the generators span
    // the dual lattice of the two canonical cycles
    let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
    assert_eq!(det.abs(), 1, "{matrix:?}");
    // every generator and every canonical cycle participates
    for lane in 0..2 {
        assert!(matrix[0][lane] != 0 || matrix[1][lane] != 0, "{matrix:?}");
        assert!(matrix[lane][0] != 0 || matrix[lane][1] != 0, "{matrix:?}");
    }
}

#[test]
fn sphere_conductor_gives_empty_linking_matrix_and_basis() {
    let mut g = VoxelGrid::filled([3, 3, 3], 2);
    g.set(1, 1, 1, 1);
    let complex = Arc::new(g.to_mesh().build_complex().unwrap());
    let split = split_regions(complex.clone(), &BTreeSet::from([1]), true).unwrap();
    let out = run_ds(&split, &RunOptions::default()).unwrap();
    assert_eq!(out.lazy.count(), 0);
    let dual = DualComplex::build(complex).unwrap();
    let link = build_linking_matrix(&dual, &split, &out.surface_sets, &out.thinned).unwrap();
    assert_eq!(link.size(), 0);
    let selection = change_of_basis(&out.lazy, &link).unwrap();
    assert_eq!(selection.rank, 0);
    assert!(selection.combination.is_empty());
    assert!(selection.combined_generators(&out.lazy).is_empty());
    selection.require_rank(0).unwrap();
    assert!(selection.require_rank(1).is_err());
}
