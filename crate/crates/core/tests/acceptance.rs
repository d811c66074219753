//! Acceptance suite: one test per criterion, each printing a PASS line once
//! its assertions hold. A process-wide lock keeps the timing-sensitive
//! criteria from interleaving.

mod common;

use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::Instant;

use common::{fixture, gauss_linking_numeric};
use dsforge_core::basis::{build_linking_matrix, change_of_basis, dual_cycles_for_lane, CycleSource};
use dsforge_core::ds::{run_ds, thin_currents, RunOptions};
use dsforge_core::dual::DualComplex;
use dsforge_core::mesh::generate::CanonicalShape;
use dsforge_core::oracle::{homology, pairing_matrix, surface_homology, verify_span, CellSelection};
use dsforge_core::report::GeneratorFile;
use dsforge_core::snf::determinant;
use dsforge_core::surface::{build_tree_cotree, components_from_triangles, extract_components};
use num_traits::{One, Signed};

fn exclusive() -> MutexGuard<'static, ()> {
    static LOCK: OnceLock<Mutex<()>> = OnceLock::new();
    LOCK.get_or_init(|| Mutex::new(()))
        .lock()
        .unwrap_or_else(|e| e.into_inner())
}

fn pass(name: &str) {
    println!("ACCEPTANCE {name}: PASS");
}

const REFINEMENTS: [u32; 3] = [1, 2, 3];

#[test]
fn acceptance_structural_invariants() {
    let _guard = exclusive();
    let started = Instant::now();
    for shape in CanonicalShape::ALL {
        for refinement in REFINEMENTS {
            let fx = fixture(shape, refinement);
            assert!(
                fx.complex.check_boundary_squared(),
                "{shape:?} r{refinement}: boundary of boundary"
            );
            assert!(
                fx.complex.check_coboundary_squared(),
                "{shape:?} r{refinement}: coboundary of coboundary"
            );
            assert_eq!(
                fx.complex.check_massey(),
                Ok(()),
                "{shape:?} r{refinement}: two-coface identity"
            );
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "invariant suite took {elapsed:.1} s");
    pass(&format!("structural-invariants ({elapsed:.1} s)"));
}

#[test]
fn acceptance_surface_algorithm() {
    let _guard = exclusive();
    for shape in CanonicalShape::ALL {
        let fx = fixture(shape, 1);
        let comps = extract_components(&fx.split).unwrap();
        for comp in &comps {
            let tc = build_tree_cotree(comp).unwrap();
            let expected = 2 - comp.euler_characteristic;
            assert_eq!(tc.leftover_edges.len() as i64, expected, "{shape:?}");
            assert_eq!(tc.leftover_edges.len(), 2 * comp.genus, "{shape:?}");
            let h1 = surface_homology(comp, 1);
            assert_eq!(h1.betti, tc.leftover_edges.len(), "{shape:?} vs oracle");
        }
    }
    // the flat torus with identified sides closes with exactly two edges
    let comps = components_from_triangles(&flat_torus(3)).unwrap();
    let tc = build_tree_cotree(&comps[0]).unwrap();
    assert_eq!(tc.leftover_edges.len(), 2);
    pass("surface-algorithm");
}

fn flat_torus(n: u32) -> Vec<[u32; 3]> {
    let v = |i: u32, j: u32| (i % n) * n + (j % n);
    let mut tris = Vec::new();
    for i in 0..n {
        for j in 0..n {
            tris.push([v(i, j), v(i + 1, j), v(i + 1, j + 1)]);
            tris.push([v(i, j), v(i + 1, j + 1), v(i, j + 1)]);
        }
    }
    tris
}

#[test]
fn acceptance_thinned_current_cocycle() {
    let _guard = exclusive();
    let mut violations = 0usize;
    for shape in CanonicalShape::ALL {
        for refinement in REFINEMENTS {
            let fx = fixture(shape, refinement);
            let out = run_ds(&fx.split, &RunOptions::default()).unwrap();
            for t in &out.thinned {
                if dsforge_core::ds::cocycle_defect(t, &fx.split.k_c).is_some() {
                    violations += 1;
                }
            }
        }
    }
    assert_eq!(violations, 0, "thinned-current cocycle violations");
    pass("thinned-current-cocycle");
}

#[test]
fn acceptance_extension_correctness() {
    let _guard = exclusive();
    let mut checked = Vec::new();
    for (shape, refinement) in [
        (CanonicalShape::SolidTorusInBox, 1),
        (CanonicalShape::SolidTorusInBox, 2),
        (CanonicalShape::HopfLinkInBox, 1),
        (CanonicalShape::TrefoilTubeInBox, 1),
        (CanonicalShape::Genus2HandlebodyInBox, 1),
    ] {
        let fx = fixture(shape, refinement);
        let options = RunOptions {
            keep_full: true,
            validate: true,
            ..Default::default()
        };
        let out = run_ds(&fx.split, &options).unwrap();
        for (full, t) in out.full_cocycles.iter().zip(&out.thinned) {
            let full = full.as_ref().expect("kept");
            // dh = t on every 2-cell before restriction, exactly
            let dh = fx.complex.coboundary(full).unwrap();
            assert_eq!(&dh, &t.currents, "{shape:?} r{refinement}: dh != t");
        }
        for restricted in &out.lazy.per_component {
            // dh = 0 on every insulator 2-cell after restriction, exactly
            let dh = fx.complex.coboundary(restricted).unwrap();
            for (&f, vals) in &dh.values {
                if fx.split.k_a.contains(2, f) {
                    assert!(
                        vals.iter().all(|v| *v == 0),
                        "{shape:?} r{refinement}: face {f} breaks restriction"
                    );
                }
            }
        }
        checked.push((shape, refinement));
    }
    assert_eq!(checked.len(), 5);
    pass("extension-correctness");
}

#[test]
fn acceptance_betti_reproduction() {
    let _guard = exclusive();
    for (shape, beta) in [
        (CanonicalShape::SolidTorusInBox, 1usize),
        (CanonicalShape::TrefoilTubeInBox, 1),
        (CanonicalShape::HopfLinkInBox, 2),
        (CanonicalShape::Genus2HandlebodyInBox, 2),
    ] {
        let fx = fixture(shape, 1);
        let sel = CellSelection::from_subcomplex(&fx.split.k_a);
        let h1 = homology(&fx.complex, &sel, 1);
        assert_eq!(h1.betti, beta, "{shape:?} beta1");
        assert!(h1.torsion.is_empty(), "{shape:?} torsion-free");
        let out = run_ds(&fx.split, &RunOptions::default()).unwrap();
        assert_eq!(out.lazy.count(), 2 * beta, "{shape:?} lazy lane count");
    }
    pass("betti-reproduction");
}

#[test]
fn acceptance_span_verification() {
    let _guard = exclusive();
    let mut verified = 0usize;
    for shape in CanonicalShape::ALL {
        for refinement in REFINEMENTS {
            let fx = fixture(shape, refinement);
            if fx.complex.total_cells() > 50_000 {
                continue;
            }
            let out = run_ds(&fx.split, &RunOptions::default()).unwrap();
            let sel = CellSelection::from_subcomplex(&fx.split.k_a);
            let h1 = homology(&fx.complex, &sel, 1);
            let report = verify_span(&out.lazy.lane_cochains(), &h1);
            assert_eq!(report.rank, h1.betti, "{shape:?} r{refinement}: {report:?}");
            assert!(
                report.factors.iter().all(|f| f.is_one()),
                "{shape:?} r{refinement}: factors {report:?}"
            );
            assert!(report.pass);
            verified += 1;
        }
    }
    // every shape qualifies at refinement one
    assert!(verified >= CanonicalShape::ALL.len(), "{verified} meshes verified");
    pass(&format!("span-verification ({verified} meshes)"));
}

#[test]
fn acceptance_true_basis() {
    let _guard = exclusive();
    for shape in CanonicalShape::ALL {
        let fx = fixture(shape, 1);
        let out = run_ds(&fx.split, &RunOptions::default()).unwrap();
        let dual = DualComplex::build(fx.complex.clone()).unwrap();
        let link = build_linking_matrix(&dual, &fx.split, &out.surface_sets, &out.thinned).unwrap();
        if shape == CanonicalShape::HopfLinkInBox {
            assert!(
                link.entries.iter().flatten().any(|v| v.abs() == 1),
                "hopf linking matrix lacks a unit entry: {:?}",
                link.entries
            );
        }
        let selection = change_of_basis(&out.lazy, &link).unwrap();
        let sel = CellSelection::from_subcomplex(&fx.split.k_a);
        let h1 = homology(&fx.complex, &sel, 1);
        assert_eq!(selection.rank, h1.betti, "{shape:?} basis rank");
        let gens = selection.combined_generators(&out.lazy);
        assert_eq!(gens.len(), h1.betti);
        let p = pairing_matrix(&gens, &h1);
        let det = determinant(&p);
        assert_eq!(det.abs(), 1.into(), "{shape:?}: pairing determinant");
    }
    pass("true-basis");
}

#[test]
fn acceptance_linking_number_oracle_agreement() {
    let _guard = exclusive();
    let mut checked = 0usize;
    for shape in CanonicalShape::ALL {
        let fx = fixture(shape, 1);
        let out = run_ds(&fx.split, &RunOptions::default()).unwrap();
        let dual = DualComplex::build(fx.complex.clone()).unwrap();
        let mut submerged = Vec::new();
        for t in &out.thinned {
            for lane in 0..t.currents.lanes {
                submerged.extend(
                    dual_cycles_for_lane(
                        t,
                        lane,
                        &dual,
                        &fx.split.k_c,
                        CycleSource::ThinnedCurrent { component: t.component, lane },
                    )
                    .unwrap(),
                );
            }
        }
        let mut shifted = Vec::new();
        for set in &out.surface_sets {
            let ta = thin_currents(set, &fx.split.k_a);
            for lane in 0..set.lanes() {
                shifted.extend(
                    dual_cycles_for_lane(
                        &ta,
                        lane,
                        &dual,
                        &fx.split.k_a,
                        CycleSource::SurfaceGenerator { component: set.component, lane },
                    )
                    .unwrap(),
                );
            }
        }
        for a in &submerged {
            for b in &shifted {
                let exact = dsforge_core::basis::linking_number(a, b).unwrap();
                let numeric = gauss_linking_numeric(a, b);
                let residual = (numeric - numeric.round()).abs();
                assert!(
                    residual < 0.1,
                    "{shape:?}: numeric {numeric} too far from an integer"
                );
                assert_eq!(
                    numeric.round() as i64,
                    exact,
                    "{shape:?}: exact {exact} vs numeric {numeric}"
                );
                checked += 1;
            }
        }
    }
    assert!(checked >= 20, "only {checked} cycle pairs compared");
    pass(&format!("linking-number-oracle-agreement ({checked} pairs)"));
}

#[test]
fn acceptance_scaling() {
    let _guard = exclusive();
    // median of five runs per refinement of the solid torus, refinements
    // one through four; fitted exponent within the linearity bound and an
    // absolute wall-clock sanity bound at roughly 1.6M tetrahedra
    let mut points: Vec<(usize, f64)> = Vec::new();
    let mut biggest_ms = 0.0f64;
    let mut biggest_tets = 0usize;
    for refinement in 1..=4u32 {
        let fx = fixture(CanonicalShape::SolidTorusInBox, refinement);
        let mut samples = Vec::new();
        for _ in 0..5 {
            let out = run_ds(&fx.split, &RunOptions::default()).unwrap();
            samples.push(out.timings.total_ms);
        }
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = samples[2];
        let tets = fx.complex.tet_count();
        if tets > biggest_tets {
            biggest_tets = tets;
            biggest_ms = median;
        }
        points.push((tets, median));
    }
    let xs: Vec<f64> = points.iter().map(|(t, _)| (*t as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, ms)| ms.max(1e-3).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let exponent = num / den;
    assert!(
        exponent <= 1.3,
        "fitted exponent {exponent:.3} exceeds 1.3: {points:?}"
    );
    assert!(
        biggest_tets > 1_000_000,
        "largest refinement only reached {biggest_tets} tetrahedra"
    );
    assert!(
        biggest_ms <= 10_000.0,
        "{biggest_tets} tetrahedra took {biggest_ms:.0} ms"
    );
    pass(&format!(
        "scaling (exponent {exponent:.3}, {biggest_tets} tets in {biggest_ms:.0} ms)"
    ));
}

#[test]
fn acceptance_determinism() {
    let _guard = exclusive();
    let fx = fixture(CanonicalShape::HopfLinkInBox, 1);
    let mut renders: Vec<(String, Vec<u8>)> = Vec::new();
    for threads in [1usize, 1, 4] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let out = pool.install(|| run_ds(&fx.split, &RunOptions::default()).unwrap());
        let file = GeneratorFile::from_lazy(&out.lazy, None);
        renders.push((file.to_json(), file.to_binary()));
    }
    assert_eq!(renders[0], renders[1], "repeated runs differ");
    assert_eq!(renders[0], renders[2], "thread count changed the bytes");
    pass("determinism");
}
