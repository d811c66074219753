//! Deterministic generation of canonical labeled test meshes.
//!
//! Shapes are defined on a coarse voxel grid and refined by voxel
//! subdivision, which preserves the conductor topology exactly while the
//! tetrahedron count grows 8x per refinement step. Every voxel is split into
//! six tetrahedra along the same axis-permutation rule, so the mesh is
//! conforming at every refinement.

use std::collections::BTreeSet;

use crate::geometry::point_i64;
use crate::mesh::MeshFile;

/// An axis-aligned grid of unit voxels, each carrying a region tag.
#[derive(Clone, Debug)]
pub struct VoxelGrid {
    pub dims: [u32; 3],
    tags: Vec<i32>,
}

impl VoxelGrid {
    pub fn filled(dims: [u32; 3], tag: i32) -> VoxelGrid {
        VoxelGrid {
            dims,
            tags: vec![tag; (dims[0] * dims[1] * dims[2]) as usize],
        }
    }

    fn index(&self, x: u32, y: u32, z: u32) -> usize {
        debug_assert!(x < self.dims[0] && y < self.dims[1] && z < self.dims[2]);
        (x + self.dims[0] * (y + self.dims[1] * z)) as usize
    }

    pub fn set(&mut self, x: u32, y: u32, z: u32, tag: i32) {
        let i = self.index(x, y, z);
        self.tags[i] = tag;
    }

    pub fn tag(&self, x: u32, y: u32, z: u32) -> i32 {
        self.tags[self.index(x, y, z)]
    }

    /// Subdivide every voxel into `factor^3` voxels with the same tag.
    pub fn refine(&self, factor: u32) -> VoxelGrid {
        let dims = [
            self.dims[0] * factor,
            self.dims[1] * factor,
            self.dims[2] * factor,
        ];
        let mut out = VoxelGrid::filled(dims, 0);
        for z in 0..dims[2] {
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    let t = self.tag(x / factor, y / factor, z / factor);
                    out.set(x, y, z, t);
                }
            }
        }
        out
    }

    /// Split every voxel into six tetrahedra along monotone lattice paths
    /// from its minimum to its maximum corner. The rule is translation
    /// invariant, so shared cube faces receive the same diagonal on both
    /// sides and the mesh is conforming.
    pub fn to_mesh(&self) -> MeshFile {
        let [nx, ny, nz] = self.dims;
        let vid = |x: u32, y: u32, z: u32| -> u32 { x + (nx + 1) * (y + (ny + 1) * z) };
        let vcount = ((nx + 1) * (ny + 1) * (nz + 1)) as usize;
        let mut vertices = Vec::with_capacity(vcount);
        for z in 0..=nz {
            for y in 0..=ny {
                for x in 0..=nx {
                    vertices.push(point_i64(x as i64, y as i64, z as i64));
                }
            }
        }

        const PERMS: [[usize; 3]; 6] = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let mut tets = Vec::with_capacity(self.tags.len() * 6);
        for z in 0..nz {
            for y in 0..ny {
                for x in 0..nx {
                    let tag = self.tag(x, y, z);
                    for perm in PERMS {
                        let mut corner = [x, y, z];
                        let mut quad = [vid(corner[0], corner[1], corner[2]); 4];
                        for (k, &axis) in perm.iter().enumerate() {
                            corner[axis] += 1;
                            quad[k + 1] = vid(corner[0], corner[1], corner[2]);
                        }
                        tets.push((quad, tag));
                    }
                }
            }
        }
        MeshFile { vertices, tets }
    }
}

/// The canonical conductor shapes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CanonicalShape {
    SolidTorusInBox,
    HopfLinkInBox,
    TrefoilTubeInBox,
    Genus2HandlebodyInBox,
}

impl CanonicalShape {
    pub const ALL: [CanonicalShape; 4] = [
        CanonicalShape::SolidTorusInBox,
        CanonicalShape::HopfLinkInBox,
        CanonicalShape::TrefoilTubeInBox,
        CanonicalShape::Genus2HandlebodyInBox,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CanonicalShape::SolidTorusInBox => "solid-torus-in-box",
            CanonicalShape::HopfLinkInBox => "hopf-link-in-box",
            CanonicalShape::TrefoilTubeInBox => "trefoil-tube-in-box",
            CanonicalShape::Genus2HandlebodyInBox => "genus2-handlebody-in-box",
        }
    }

    pub fn from_name(name: &str) -> Option<CanonicalShape> {
        CanonicalShape::ALL.iter().copied().find(|s| s.name() == name)
    }

    /// Region tags of the conductor parts of the generated mesh.
    pub fn conductor_tags(&self) -> BTreeSet<i32> {
        match self {
            CanonicalShape::HopfLinkInBox => BTreeSet::from([1, 2]),
            _ => BTreeSet::from([1]),
        }
    }

    /// First Betti number of the insulating region of the generated mesh.
    pub fn expected_beta1(&self) -> usize {
        match self {
            CanonicalShape::SolidTorusInBox => 1,
            CanonicalShape::HopfLinkInBox => 2,
            CanonicalShape::TrefoilTubeInBox => 1,
            CanonicalShape::Genus2HandlebodyInBox => 2,
        }
    }

    /// Genus of each conductor boundary component.
    pub fn expected_genera(&self) -> &'static [usize] {
        match self {
            CanonicalShape::SolidTorusInBox => &[1],
            CanonicalShape::HopfLinkInBox => &[1, 1],
            CanonicalShape::TrefoilTubeInBox => &[1],
            CanonicalShape::Genus2HandlebodyInBox => &[2],
        }
    }
}

/// Base voxel pattern of a canonical shape, before refinement.
pub fn canonical_voxels(shape: CanonicalShape) -> VoxelGrid {
    match shape {
        CanonicalShape::SolidTorusInBox => {
            // square annulus, two voxels thick, centered in an 8^3 box
            let mut g = VoxelGrid::filled([8, 8, 8], 2);
            for z in 3..5 {
                for y in 2..6 {
                    for x in 2..6 {
                        let hole = (3..5).contains(&x) && (3..5).contains(&y);
                        if !hole {
                            g.set(x, y, z, 1);
                        }
                    }
                }
            }
            g
        }
        CanonicalShape::Genus2HandlebodyInBox => {
            // flat 5x3 block with two holes: a one-voxel-thick figure eight
            let mut g = VoxelGrid::filled([7, 5, 3], 2);
            for y in 1..4 {
                for x in 1..6 {
                    let hole = y == 2 && (x == 2 || x == 4);
                    if !hole {
                        g.set(x, y, 1, 1);
                    }
                }
            }
            g
        }
        CanonicalShape::HopfLinkInBox => {
            // ring A (tag 1) in the xy-plane, ring B (tag 2) in the xz-plane
            // threading A's hole; a one-voxel gap separates them everywhere
            let mut g = VoxelGrid::filled([9, 7, 7], 3);
            for y in 1..6 {
                for x in 1..6 {
                    let hole = (2..5).contains(&x) && (2..5).contains(&y);
                    if !hole {
                        g.set(x, y, 3, 1);
                    }
                }
            }
            for z in 1..6 {
                for x in 3..8 {
                    let hole = (4..7).contains(&x) && (2..5).contains(&z);
                    if !hole {
                        g.set(x, 3, z, 2);
                    }
                }
            }
            g
        }
        CanonicalShape::TrefoilTubeInBox => {
            let path = trefoil_tube_path();
            let mut g = VoxelGrid::filled([11, 19, 5], 2);
            for &[x, y, z] in &path {
                g.set((x + 1) as u32, (y + 1) as u32, (z + 1) as u32, 1);
            }
            g
        }
    }
}

/// The closed voxel path of the trefoil tube: two strands braided with three
/// positive crossings (the left strand passes over at each one) and then
/// closed around the sides, which is the standard closed-braid form of the
/// trefoil knot. Strand columns sit at x=2 and x=6, crossings happen at
/// y = 4, 8, 12 with the over-strand lifted to z=2, and the closure arcs run
/// at x=0 and x=8.
pub fn trefoil_tube_path() -> Vec<[i64; 3]> {
    // append all voxels of the axis-aligned run ending at `to`
    fn run(path: &mut Vec<[i64; 3]>, to: [i64; 3]) {
        let from = *path.last().expect("seeded");
        let d = [to[0] - from[0], to[1] - from[1], to[2] - from[2]];
        let axis = (0..3).find(|&k| d[k] != 0).expect("distinct");
        debug_assert!((0..3).filter(|&k| d[k] != 0).count() == 1, "axis runs only");
        let step = d[axis].signum();
        let mut cur = from;
        while cur != to {
            cur[axis] += step;
            path.push(cur);
        }
    }
    // crossing at level a, over role: rise on the left column, traverse at
    // z=2, descend on the right column
    fn over(path: &mut Vec<[i64; 3]>, a: i64) {
        for to in [
            [2, a - 2, 0],
            [2, a - 2, 2],
            [2, a, 2],
            [6, a, 2],
            [6, a + 2, 2],
            [6, a + 2, 0],
        ] {
            run(path, to);
        }
    }
    // under role: cross beneath at z=0
    fn under(path: &mut Vec<[i64; 3]>, a: i64) {
        run(path, [6, a, 0]);
        run(path, [2, a, 0]);
    }

    // the walk covers the three crossings twice, once per strand role, and
    // closes around each side
    let mut p = vec![[2, 0, 0]];
    over(&mut p, 4);
    under(&mut p, 8);
    over(&mut p, 12);
    // right-side closure back to the bottom
    for to in [[6, 16, 0], [8, 16, 0], [8, 0, 0], [6, 0, 0]] {
        run(&mut p, to);
    }
    under(&mut p, 4);
    over(&mut p, 8);
    under(&mut p, 12);
    // left-side closure
    for to in [[2, 16, 0], [0, 16, 0], [0, 0, 0], [2, 0, 0]] {
        run(&mut p, to);
    }
    p.pop(); // the seed point closes the walk implicitly
    p
}

/// Check that a closed voxel path is a clean embedded necklace: unit steps,
/// all voxels distinct, and any two voxels at cyclic path distance three or
/// more are farther than one apart in the maximum norm.
pub fn validate_tube_path(path: &[[i64; 3]]) -> Result<(), String> {
    let n = path.len();
    if n < 8 {
        return Err("path too short".into());
    }
    for i in 0..n {
        let a = path[i];
        let b = path[(i + 1) % n];
        let d: i64 = (0..3).map(|k| (a[k] - b[k]).abs()).sum();
        if d != 1 {
            return Err(format!("non-unit step between {a:?} and {b:?}"));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let pd = (j - i).min(n - (j - i));
            if pd == 0 {
                continue;
            }
            let linf = (0..3)
                .map(|k| (path[i][k] - path[j][k]).abs())
                .max()
                .unwrap();
            if linf == 0 {
                return Err(format!("repeated voxel {:?}", path[i]));
            }
            if pd >= 3 && linf < 2 {
                return Err(format!(
                    "tube touches itself: {:?} and {:?} at path distance {pd}",
                    path[i], path[j]
                ));
            }
        }
    }
    Ok(())
}

/// Generate a canonical shape at the given refinement level (>= 1). The
/// conductor is tagged 1 (rings 1 and 2 for the Hopf link) and the box
/// insulator carries the next tag.
pub fn generate_canonical(shape: CanonicalShape, refinement: u32) -> MeshFile {
    assert!(refinement >= 1, "refinement must be at least 1");
    let base = canonical_voxels(shape);
    let factor = 1u32 << (refinement - 1);
    let grid = if factor == 1 { base } else { base.refine(factor) };
    grid.to_mesh()
}
