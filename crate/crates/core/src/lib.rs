//! Lazy first-cohomology generators for insulating regions of labeled
//! tetrahedral meshes.
//!
//! The pipeline: split the mesh into conductor and insulator subcomplexes,
//! extract the conductor boundary surfaces, compute their cohomology
//! generators by a tree-cotree decomposition, push them to thinned currents,
//! extend those to global 1-cocycles by spanning-tree back-substitution, and
//! restrict to the insulator. A Smith-normal-form homology oracle verifies
//! Betti numbers and the span of the output, and a linking-number change of
//! basis extracts a true cohomology basis from the lazy one.

pub mod basis;
pub mod complex;
pub mod ds;
pub mod dual;
pub mod error;
pub mod geometry;
pub mod mesh;
pub mod oracle;
pub mod report;
pub mod snf;
pub mod surface;

pub use basis::{build_linking_matrix, change_of_basis, linking_number, BasisSelection, DualCycle, LinkingMatrix};
pub use complex::{pairing, CellComplex, Chain, Cochain, SignedId, Subcomplex};
pub use ds::{extend_to_cocycle, run_ds, thin_currents, DsOutput, LazyGeneratorSet, RunOptions, ThinnedCurrentSet};
pub use dual::DualComplex;
pub use error::{BasisError, ComplexError, DsError, Error, MeshError, SurfaceError};
pub use mesh::generate::{generate_canonical, CanonicalShape};
pub use mesh::{parse_mesh, split_regions, write_mesh, MeshFile, MeshFormat, RegionSplit};
pub use oracle::{homology, verify_span, CellSelection, HomologyBasis, SpanReport};
pub use snf::{snf, SnfDecomposition, SparseIntMat};
pub use surface::{
    build_tree_cotree, close_generators, extract_components, SurfaceComponent,
    SurfaceGeneratorSet, TreeCotree,
};
