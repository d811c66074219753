//! Independent exact homology oracle.
//!
//! Betti numbers, torsion and explicit generator cycles are read off Smith
//! normal forms of the boundary matrices. This is deliberately the slow,
//! ground-truth path: it shares no code with the tree-cotree or thinning
//! stages it verifies, and it is meant for desk-scale complexes only.

use num_bigint::BigInt;
use num_traits::One;

use crate::complex::{CellComplex, Chain, Cochain, Subcomplex, pairing};
use crate::snf::{snf, snf_rank, SnfDecomposition, SparseIntMat};
use crate::surface::SurfaceComponent;

/// Sorted global cell ids per dimension: the cells a homology computation
/// runs over.
#[derive(Clone, Debug)]
pub struct CellSelection {
    pub cells: [Vec<u32>; 4],
}

impl CellSelection {
    pub fn whole(complex: &CellComplex) -> CellSelection {
        CellSelection {
            cells: [
                (0..complex.vertex_count() as u32).collect(),
                (0..complex.edge_count() as u32).collect(),
                (0..complex.face_count() as u32).collect(),
                (0..complex.tet_count() as u32).collect(),
            ],
        }
    }

    pub fn from_subcomplex(sub: &Subcomplex) -> CellSelection {
        CellSelection {
            cells: [
                sub.cells(0).collect(),
                sub.cells(1).collect(),
                sub.cells(2).collect(),
                sub.cells(3).collect(),
            ],
        }
    }

    pub fn count(&self, dim: u8) -> usize {
        self.cells[dim as usize].len()
    }

    pub fn total(&self) -> usize {
        self.cells.iter().map(|c| c.len()).sum()
    }

    fn local(&self, dim: u8, global: u32) -> Option<usize> {
        self.cells[dim as usize].binary_search(&global).ok()
    }

    /// Boundary matrix of dimension `k` over the selection: rows are local
    /// (k-1)-cells, columns local k-cells. Dimension 0 yields a 0 x n matrix
    /// and dimension 4 a 0-column matrix.
    pub fn boundary_matrix(&self, complex: &CellComplex, k: u8) -> SparseIntMat {
        if k == 0 {
            return SparseIntMat::zero(0, self.count(0));
        }
        if k > 3 {
            return SparseIntMat::zero(self.count(3), 0);
        }
        let nrows = self.count(k - 1);
        let ncols = self.count(k);
        let mut m = SparseIntMat::zero(nrows, ncols);
        for (col, &cell) in self.cells[k as usize].iter().enumerate() {
            match k {
                1 => {
                    let [a, b] = complex.edge_vertices(cell);
                    let ra = self.local(0, a).expect("closed selection");
                    let rb = self.local(0, b).expect("closed selection");
                    m.set(ra, col, BigInt::from(-1));
                    m.set(rb, col, BigInt::from(1));
                }
                2 => {
                    for es in complex.face_edges(cell) {
                        let r = self.local(1, es.id()).expect("closed selection");
                        m.set(r, col, BigInt::from(es.sign()));
                    }
                }
                _ => {
                    for fs in complex.tet_faces(cell) {
                        let r = self.local(2, fs.id()).expect("closed selection");
                        m.set(r, col, BigInt::from(fs.sign()));
                    }
                }
            }
        }
        m
    }
}

/// A homology group: rank, torsion, and explicit generator cycles.
#[derive(Clone, Debug)]
pub struct HomologyBasis {
    pub dim: u8,
    pub betti: usize,
    pub torsion: Vec<BigInt>,
    /// free generator cycles over global cell ids
    pub cycles: Vec<Chain>,
}

/// sparse coefficient vector over local cell indices
type LocalCycle = Vec<(usize, BigInt)>;

/// Core computation: homology of the pair of boundary maps (A = boundary of
/// k-cells, B = boundary of (k+1)-cells). Returns Betti, torsion, and the
/// free generators as local coefficient vectors.
fn homology_from_matrices(a: &SparseIntMat, b: &SparseIntMat) -> (usize, Vec<BigInt>, Vec<LocalCycle>) {
    let n_k = a.ncols();
    debug_assert_eq!(b.nrows(), n_k);

    // kernel of A from the column transform of its SNF
    let snf_a = snf(a, [false, false, true, true]);
    let rank_a = snf_a.rank();
    let z = n_k - rank_a;
    let v = snf_a.v.as_ref().unwrap();
    let v_inv = snf_a.v_inv.as_ref().unwrap();
    let kernel = v.column_block(rank_a, n_k); // n_k x z

    // boundaries of (k+1)-cells in kernel coordinates; since the boundary
    // of a boundary vanishes, the leading (non-kernel) coordinates are zero
    let coords = v_inv.mul(b); // n_k x n_{k+1}
    let n_matrix = coords.row_block(rank_a, n_k); // z x n_{k+1}
    debug_assert_eq!(coords.row_block(0, rank_a).nnz(), 0);

    let snf_n = snf(&n_matrix, [false, true, false, false]);
    let rank_n = snf_n.rank();
    let betti = z - rank_n;
    let torsion: Vec<BigInt> = snf_n
        .factors
        .iter()
        .filter(|f| !f.is_one())
        .cloned()
        .collect();

    // free generators: kernel combinations given by the trailing columns of
    // the inverse row transform
    let u_inv = snf_n.u_inv.as_ref().unwrap(); // z x z
    let mut cycles = Vec::with_capacity(betti);
    for j in rank_n..z {
        let mut acc: std::collections::BTreeMap<usize, BigInt> = std::collections::BTreeMap::new();
        let coeff_rows: Vec<u32> = u_inv.col_rows(j).iter().copied().collect();
        for r in coeff_rows {
            let coeff = u_inv.get(r as usize, j);
            // cycle += coeff * kernel[:, r]
            for &cell in kernel.col_rows(r as usize) {
                let v = kernel.get(cell as usize, r as usize);
                let slot = acc
                    .entry(cell as usize)
                    .or_insert_with(num_traits::Zero::zero);
                *slot += &coeff * v;
            }
        }
        let entries: LocalCycle = acc
            .into_iter()
            .filter(|(_, v)| !num_traits::Zero::is_zero(v))
            .collect();
        cycles.push(entries);
    }
    (betti, torsion, cycles)
}

/// Homology of a cell selection inside a complex.
pub fn homology(complex: &CellComplex, selection: &CellSelection, k: u8) -> HomologyBasis {
    assert!(k <= 2, "homology implemented for dimensions 0..=2");
    let a = selection.boundary_matrix(complex, k);
    let b = selection.boundary_matrix(complex, k + 1);
    let (betti, torsion, raw) = homology_from_matrices(&a, &b);
    let cycles = raw
        .into_iter()
        .map(|entries| {
            Chain::from_entries(
                k,
                entries.into_iter().map(|(local, v)| {
                    let global = selection.cells[k as usize][local];
                    (global, bigint_to_i64(&v))
                }),
            )
        })
        .collect();
    HomologyBasis {
        dim: k,
        betti,
        torsion,
        cycles,
    }
}

/// Homology of a closed surface component (2-complex), dimensions 0..=2.
pub fn surface_homology(comp: &SurfaceComponent, k: u8) -> HomologyBasis {
    assert!(k <= 2);
    let matrix = |kk: u8| -> SparseIntMat {
        match kk {
            0 => SparseIntMat::zero(0, comp.vertex_count()),
            1 | 2 => {
                let (r, c, trips) = comp.boundary_triplets(kk);
                SparseIntMat::from_triplets(r, c, &trips)
            }
            _ => SparseIntMat::zero(comp.face_count(), 0),
        }
    };
    let a = matrix(k);
    let b = matrix(k + 1);
    let (betti, torsion, raw) = homology_from_matrices(&a, &b);
    let globals: &[u32] = match k {
        0 => &comp.verts,
        1 => &comp.edges,
        _ => &comp.faces,
    };
    let cycles = raw
        .into_iter()
        .map(|entries| {
            Chain::from_entries(
                k,
                entries
                    .into_iter()
                    .map(|(local, v)| (globals[local], bigint_to_i64(&v))),
            )
        })
        .collect();
    HomologyBasis {
        dim: k,
        betti,
        torsion,
        cycles,
    }
}

/// Betti numbers beta_0..beta_2 by ranks only (no generators).
pub fn betti_numbers(complex: &CellComplex, selection: &CellSelection) -> [usize; 3] {
    let ranks: Vec<usize> = (0..=3u8)
        .map(|k| {
            let m = selection.boundary_matrix(complex, k);
            if m.nrows() == 0 || m.ncols() == 0 {
                0
            } else {
                snf_rank(&m)
            }
        })
        .collect();
    [
        selection.count(0) - ranks[1],
        selection.count(1) - ranks[1] - ranks[2],
        selection.count(2) - ranks[2] - ranks[3],
    ]
}

/// Result of pairing candidate cocycle lanes against a homology basis.
#[derive(Clone, Debug)]
pub struct SpanReport {
    pub beta: usize,
    pub lanes: usize,
    pub rank: usize,
    /// invariant factors of the pairing matrix
    pub factors: Vec<BigInt>,
    pub pass: bool,
}

/// Build the pairing matrix P[i][j] = <lane_j, cycle_i> and check that the
/// lanes span the dual lattice: full rank with all invariant factors one.
pub fn verify_span(lanes: &[Cochain], basis: &HomologyBasis) -> SpanReport {
    let beta = basis.betti;
    let p = pairing_matrix(lanes, basis);
    let d: SnfDecomposition = snf(&p, [false; 4]);
    let rank = d.rank();
    let factors = d.factors;
    let pass = rank == beta && factors.iter().all(|f| f.is_one());
    SpanReport {
        beta,
        lanes: lanes.len(),
        rank,
        factors,
        pass,
    }
}

/// Pairing matrix with rows indexed by basis cycles, columns by lanes.
pub fn pairing_matrix(lanes: &[Cochain], basis: &HomologyBasis) -> SparseIntMat {
    let mut p = SparseIntMat::zero(basis.betti, lanes.len());
    for (i, cycle) in basis.cycles.iter().enumerate() {
        for (j, lane) in lanes.iter().enumerate() {
            let v = pairing(lane, cycle).expect("dimensions agree")[0];
            p.set(i, j, BigInt::from(v));
        }
    }
    p
}

fn bigint_to_i64(v: &BigInt) -> i64 {
    use num_traits::ToPrimitive;
    v.to_i64().expect("homology coefficients fit in i64")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point_i64;
    use crate::mesh::generate::{generate_canonical, CanonicalShape};
    use crate::mesh::split_regions;
    use std::sync::Arc;

    #[test]
    fn single_tetrahedron_is_a_ball() {
        let k = CellComplex::build(
            vec![
                point_i64(0, 0, 0),
                point_i64(1, 0, 0),
                point_i64(0, 1, 0),
                point_i64(0, 0, 1),
            ],
            &[([0, 1, 2, 3], 1)],
        )
        .unwrap();
        let sel = CellSelection::whole(&k);
        assert_eq!(betti_numbers(&k, &sel), [1, 0, 0]);
        let h0 = homology(&k, &sel, 0);
        assert_eq!(h0.betti, 1);
        let h1 = homology(&k, &sel, 1);
        assert_eq!(h1.betti, 0);
        assert!(h1.torsion.is_empty());
    }

    #[test]
    fn euler_poincare_on_generated_mesh() {
        let mesh = generate_canonical(CanonicalShape::Genus2HandlebodyInBox, 1);
        let complex = mesh.build_complex().unwrap();
        let sel = CellSelection::whole(&complex);
        let b = betti_numbers(&complex, &sel);
        let euler_cells = sel.count(0) as i64 - sel.count(1) as i64 + sel.count(2) as i64
            - sel.count(3) as i64;
        let euler_betti = b[0] as i64 - b[1] as i64 + b[2] as i64;
        assert_eq!(euler_cells, euler_betti);
        // the full box is a ball
        assert_eq!(b, [1, 0, 0]);
    }

    #[test]
    fn insulator_of_solid_torus_has_beta1_one() {
        let mesh = generate_canonical(CanonicalShape::SolidTorusInBox, 1);
        let complex = Arc::new(mesh.build_complex().unwrap());
        let split = split_regions(complex.clone(), &CanonicalShape::SolidTorusInBox.conductor_tags(), true).unwrap();
        let sel = CellSelection::from_subcomplex(&split.k_a);
        let h1 = homology(&complex, &sel, 1);
        assert_eq!(h1.betti, 1);
        assert!(h1.torsion.is_empty());
        // generator cycles really are cycles
        for c in &h1.cycles {
            assert!(complex.boundary(c).unwrap().is_zero());
        }
    }

    #[test]
    fn six_loop_synthetic_complex() {
        use crate::mesh::generate::VoxelGrid;
        // six separate square rings in one box
        let mut g = VoxelGrid::filled([13, 9, 5], 2);
        for (x0, y0) in [(1, 1), (5, 1), (9, 1), (1, 5), (5, 5), (9, 5)] {
            for dy in 0..3 {
                for dx in 0..3 {
                    if dx == 1 && dy == 1 {
                        continue;
                    }
                    g.set(x0 + dx, y0 + dy, 2, 1);
                }
            }
        }
        let complex = Arc::new(g.to_mesh().build_complex().unwrap());
        let split = split_regions(complex.clone(), &std::collections::BTreeSet::from([1]), true).unwrap();
        let sel = CellSelection::from_subcomplex(&split.k_a);
        let h1 = homology(&complex, &sel, 1);
        assert_eq!(h1.betti, 6);
        assert!(h1.torsion.is_empty());
    }

    #[test]
    fn span_check_passes_trivially_when_beta_is_zero() {
        let basis = HomologyBasis {
            dim: 1,
            betti: 0,
            torsion: vec![],
            cycles: vec![],
        };
        let report = verify_span(&[], &basis);
        assert!(report.pass);
    }
}
