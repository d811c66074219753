//! Error types for every stage of the pipeline.

use thiserror::Error;

/// Errors raised while building or operating on a cell complex.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ComplexError {
    /// A 2-cell has more than two 3-cell cofaces, so the mesh is not conforming.
    #[error("non-conforming mesh: face {face:?} is shared by {count} tetrahedra")]
    NonConformingMesh { face: [u32; 3], count: usize },

    /// A tetrahedron lists the same vertex twice.
    #[error("degenerate cell: tetrahedron {tet} has a repeated vertex")]
    DegenerateCell { tet: usize },

    /// A vertex id is outside the declared vertex range.
    #[error("vertex id {vertex} out of range (have {count} vertices)")]
    VertexOutOfRange { vertex: u64, count: usize },

    /// Chain/cochain dimension does not match the operation.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: u8, got: u8 },
}

/// Errors raised by mesh parsing, writing and region splitting.
#[derive(Debug, Error)]
pub enum MeshError {
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },

    #[error("unsupported format version {found:?} (expected {expected})")]
    UnsupportedFormatVersion { found: String, expected: String },

    #[error("unknown region tag {tag}")]
    UnknownRegionTag { tag: i32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// Errors raised by boundary-surface extraction and tree-cotree construction.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SurfaceError {
    /// An edge of the boundary surface is incident to a number of surface
    /// faces other than two, or a vertex link is not a single cycle.
    #[error("boundary surface is not a 2-manifold near {what} {id}")]
    NotAManifold { what: &'static str, id: u32 },

    /// Coherent orientation propagation failed.
    #[error("boundary component containing face {face} is not orientable")]
    NonOrientable { face: u32 },

    /// The surface has boundary edges (a conductor touches the mesh boundary
    /// while outer-boundary exclusion is on).
    #[error("boundary component is not a closed surface (edge {edge} has a single surface face)")]
    NotClosedSurface { edge: u32 },

    /// An internal consistency check failed; indicates a bug, not bad input.
    #[error("internal error: {0}")]
    Internal(String),
}

/// Errors raised by the cocycle-extension stage.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum DsError {
    /// The extension system is inconsistent: the input was not a cocycle on
    /// the conductor 3-cells, or the complex is not homologically trivial.
    #[error("cocycle extension failed: {0}")]
    ExtensionFailed(String),
}

/// Errors raised by linking-number computation and basis extraction.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum BasisError {
    /// A lane with empty thinned-current support has no dual cycle.
    #[error("thinned-current lane {lane} has empty support")]
    EmptySupport { lane: usize },

    /// The support does not chain into a single closed walk.
    #[error("thinned-current support does not form a single ring (lane {lane})")]
    NotARing { lane: usize },

    /// A closed walk visits fewer than three distinct dual vertices.
    #[error("degenerate dual cycle: closed walk of length {len}")]
    DegenerateRing { len: usize },

    /// A support 2-cell does not have two cofaces inside the subcomplex.
    #[error("support face {face} is not interior to the subcomplex")]
    SupportNotInterior { face: u32 },

    /// No admissible projection direction was found.
    #[error("no admissible projection after {retries} retries")]
    DegenerateProjection { retries: u32 },

    /// The two polylines share a point, so their linking number is undefined.
    #[error("cycles intersect; linking number undefined")]
    CyclesIntersect,

    /// Basis extraction selected a rank different from the oracle Betti number.
    #[error("basis rank {got} does not match oracle beta_1 = {expected}")]
    RankMismatch { got: usize, expected: usize },
}

/// Any error the pipeline can produce.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Ds(#[from] DsError),
    #[error(transparent)]
    Basis(#[from] BasisError),
}
