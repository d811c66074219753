//! Conductor-boundary surfaces and their first-cohomology generators.
//!
//! Each connected component of the conductor boundary is verified to be a
//! closed orientable combinatorial 2-manifold. Its 2g cohomology generators
//! are computed by the tree-cotree method: fix a spanning tree T of the
//! primal skeleton, a spanning tree T' of the dual skeleton avoiding edges
//! of T, and close one cocycle through T' for every leftover edge.

use std::collections::{BTreeMap, VecDeque};

use crate::complex::{Cochain, SignedId};
use crate::error::SurfaceError;
use crate::mesh::RegionSplit;

/// A closed orientable boundary component with local cell indexing.
///
/// `verts`, `edges` and `faces` hold the global ids of the parent complex in
/// ascending order; positions in those arrays are the local indices used by
/// the skeleton graphs. For synthetic surfaces the global ids are the input
/// ids themselves.
#[derive(Clone, Debug)]
pub struct SurfaceComponent {
    pub verts: Vec<u32>,
    pub edges: Vec<u32>,
    pub faces: Vec<u32>,
    /// per local face: local edge ids with incidence signs
    face_edges: Vec<[SignedId; 3]>,
    /// per local edge: the two local faces incident to it
    edge_faces: Vec<[u32; 2]>,
    /// per local edge: local endpoint vertices, ascending
    edge_verts: Vec<[u32; 2]>,
    /// coherent face orientation, +1 on the lowest face
    orientation: Vec<i8>,
    pub euler_characteristic: i64,
    pub genus: usize,
}

impl SurfaceComponent {
    pub fn vertex_count(&self) -> usize {
        self.verts.len()
    }
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Incidence sign kappa(face, edge) in local indices.
    pub fn face_edge_signs(&self, local_face: u32) -> &[SignedId; 3] {
        &self.face_edges[local_face as usize]
    }

    pub fn edge_face_pair(&self, local_edge: u32) -> [u32; 2] {
        self.edge_faces[local_edge as usize]
    }

    pub fn edge_vertex_pair(&self, local_edge: u32) -> [u32; 2] {
        self.edge_verts[local_edge as usize]
    }

    pub fn face_orientation(&self, local_face: u32) -> i64 {
        self.orientation[local_face as usize] as i64
    }

    /// Check that a global-id 1-cochain has vanishing coboundary on every
    /// face of this surface.
    pub fn is_surface_cocycle(&self, c: &Cochain) -> bool {
        for fe in &self.face_edges {
            for lane in 0..c.lanes {
                let mut sum = 0i64;
                for es in fe {
                    let global = self.edges[es.id() as usize];
                    sum += es.sign() * c.lane_coeff(global, lane);
                }
                if sum != 0 {
                    return false;
                }
            }
        }
        true
    }

    /// Boundary matrix of the surface as column triplets; `k` is 1 or 2.
    /// Rows are local (k-1)-cells, columns local k-cells.
    pub fn boundary_triplets(&self, k: u8) -> (usize, usize, Vec<(usize, usize, i64)>) {
        match k {
            1 => {
                let mut t = Vec::with_capacity(self.edges.len() * 2);
                for (e, vs) in self.edge_verts.iter().enumerate() {
                    t.push((vs[0] as usize, e, -1));
                    t.push((vs[1] as usize, e, 1));
                }
                (self.verts.len(), self.edges.len(), t)
            }
            2 => {
                let mut t = Vec::with_capacity(self.faces.len() * 3);
                for (f, fe) in self.face_edges.iter().enumerate() {
                    for es in fe {
                        t.push((es.id() as usize, f, es.sign()));
                    }
                }
                (self.edges.len(), self.faces.len(), t)
            }
            _ => panic!("surface boundary matrix only defined for k in {{1, 2}}"),
        }
    }
}

/// Raw surface data before component splitting: faces with global ids and
/// signed global edge ids, plus edge endpoints.
struct SurfaceData {
    faces: Vec<u32>,
    face_edges: Vec<[(u32, i8); 3]>,
    edge_verts: BTreeMap<u32, [u32; 2]>,
}

/// Extract the connected components of the conductor boundary and verify
/// each one is a closed orientable 2-manifold.
pub fn extract_components(split: &RegionSplit) -> Result<Vec<SurfaceComponent>, SurfaceError> {
    let complex = split.complex();
    let mut data = SurfaceData {
        faces: split.boundary_faces.clone(),
        face_edges: Vec::with_capacity(split.boundary_faces.len()),
        edge_verts: BTreeMap::new(),
    };
    for &f in &split.boundary_faces {
        let mut fe = [(0u32, 0i8); 3];
        for (k, es) in complex.face_edges(f).iter().enumerate() {
            fe[k] = (es.id(), es.sign() as i8);
            data.edge_verts
                .entry(es.id())
                .or_insert_with(|| complex.edge_vertices(es.id()));
        }
        data.face_edges.push(fe);
    }
    split_into_components(data)
}

/// Build components from a raw triangle list (synthetic surfaces). Vertex
/// ids are arbitrary; edges receive synthetic ids by sorted endpoint order.
pub fn components_from_triangles(tris: &[[u32; 3]]) -> Result<Vec<SurfaceComponent>, SurfaceError> {
    let mut edge_ids: BTreeMap<[u32; 2], u32> = BTreeMap::new();
    for t in tris {
        for pair in [[t[0], t[1]], [t[0], t[2]], [t[1], t[2]]] {
            let mut p = pair;
            p.sort_unstable();
            let next = edge_ids.len() as u32;
            edge_ids.entry(p).or_insert(next);
        }
    }
    // renumber edges in sorted key order for determinism
    let mut sorted: Vec<[u32; 2]> = edge_ids.keys().copied().collect();
    sorted.sort_unstable();
    let edge_ids: BTreeMap<[u32; 2], u32> = sorted
        .iter()
        .enumerate()
        .map(|(i, &k)| (k, i as u32))
        .collect();

    let mut data = SurfaceData {
        faces: (0..tris.len() as u32).collect(),
        face_edges: Vec::with_capacity(tris.len()),
        edge_verts: BTreeMap::new(),
    };
    for t in tris {
        let mut s = *t;
        s.sort_unstable();
        if s[0] == s[1] || s[1] == s[2] {
            return Err(SurfaceError::Internal(format!("degenerate triangle {t:?}")));
        }
        // boundary of [a,b,c] is [b,c] - [a,c] + [a,b]
        let e0 = edge_ids[&[s[1], s[2]]];
        let e1 = edge_ids[&[s[0], s[2]]];
        let e2 = edge_ids[&[s[0], s[1]]];
        data.face_edges.push([(e0, 1), (e1, -1), (e2, 1)]);
        data.edge_verts.insert(e0, [s[1], s[2]]);
        data.edge_verts.insert(e1, [s[0], s[2]]);
        data.edge_verts.insert(e2, [s[0], s[1]]);
    }
    split_into_components(data)
}

fn split_into_components(data: SurfaceData) -> Result<Vec<SurfaceComponent>, SurfaceError> {
    let nf = data.faces.len();
    // global edge id -> the (at most two) data-local faces
    let mut edge_members: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for (fi, fe) in data.face_edges.iter().enumerate() {
        for (e, _) in fe {
            edge_members.entry(*e).or_default().push(fi as u32);
        }
    }
    for (&e, members) in &edge_members {
        if members.len() == 1 {
            return Err(SurfaceError::NotClosedSurface { edge: e });
        }
        if members.len() > 2 {
            return Err(SurfaceError::NotAManifold { what: "edge", id: e });
        }
    }

    // vertex links over the whole surface: the edges at each vertex must
    // form a single cycle, otherwise the surface pinches there
    let mut vert_edges: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for (&e, vs) in &data.edge_verts {
        if edge_members.contains_key(&e) {
            vert_edges.entry(vs[0]).or_default().push(e);
            vert_edges.entry(vs[1]).or_default().push(e);
        }
    }
    for (&v, at_v) in &vert_edges {
        let position: BTreeMap<u32, usize> = at_v.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let mut faces_at_v: Vec<u32> = at_v
            .iter()
            .flat_map(|e| edge_members[e].iter().copied())
            .collect();
        faces_at_v.sort_unstable();
        faces_at_v.dedup();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); at_v.len()];
        for &f in &faces_at_v {
            let ends: Vec<usize> = data.face_edges[f as usize]
                .iter()
                .filter_map(|(e, _)| position.get(e).copied())
                .collect();
            if ends.len() != 2 {
                return Err(SurfaceError::NotAManifold { what: "vertex", id: v });
            }
            adj[ends[0]].push(ends[1]);
            adj[ends[1]].push(ends[0]);
        }
        let mut seen = vec![false; at_v.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    reached += 1;
                    queue.push_back(j);
                }
            }
        }
        if reached != at_v.len() {
            return Err(SurfaceError::NotAManifold { what: "vertex", id: v });
        }
    }

    // union-find over data-local faces
    let mut parent: Vec<u32> = (0..nf as u32).collect();
    fn find(parent: &mut [u32], mut i: u32) -> u32 {
        while parent[i as usize] != i {
            parent[i as usize] = parent[parent[i as usize] as usize];
            i = parent[i as usize];
        }
        i
    }
    for members in edge_members.values() {
        let a = find(&mut parent, members[0]);
        let b = find(&mut parent, members[1]);
        if a != b {
            parent[a.max(b) as usize] = a.min(b);
        }
    }

    let mut by_root: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for fi in 0..nf as u32 {
        let r = find(&mut parent, fi);
        by_root.entry(r).or_default().push(fi);
    }

    let mut components = Vec::new();
    for (_, face_list) in by_root {
        components.push(build_component(&data, &face_list)?);
    }
    Ok(components)
}

fn build_component(data: &SurfaceData, face_list: &[u32]) -> Result<SurfaceComponent, SurfaceError> {
    // gather sorted global ids
    let mut faces: Vec<u32> = face_list.iter().map(|&fi| data.faces[fi as usize]).collect();
    let order: Vec<usize> = {
        let mut idx: Vec<usize> = (0..face_list.len()).collect();
        idx.sort_by_key(|&i| faces[i]);
        idx
    };
    faces.sort_unstable();

    let mut edges: Vec<u32> = Vec::new();
    for &fi in face_list {
        for (e, _) in &data.face_edges[fi as usize] {
            edges.push(*e);
        }
    }
    edges.sort_unstable();
    edges.dedup();

    let mut verts: Vec<u32> = edges
        .iter()
        .flat_map(|e| data.edge_verts[e])
        .collect();
    verts.sort_unstable();
    verts.dedup();

    let edge_local: BTreeMap<u32, u32> = edges.iter().enumerate().map(|(i, &e)| (e, i as u32)).collect();
    let vert_local: BTreeMap<u32, u32> = verts.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();

    let mut face_edges = vec![[SignedId::default(); 3]; faces.len()];
    for (local_f, &oi) in order.iter().enumerate() {
        let fi = face_list[oi];
        for (k, (e, sign)) in data.face_edges[fi as usize].iter().enumerate() {
            face_edges[local_f][k] = SignedId::new(edge_local[e], *sign);
        }
    }

    let mut edge_faces = vec![[u32::MAX; 2]; edges.len()];
    for (local_f, fe) in face_edges.iter().enumerate() {
        for es in fe {
            let slot = &mut edge_faces[es.id() as usize];
            if slot[0] == u32::MAX {
                slot[0] = local_f as u32;
            } else {
                debug_assert_eq!(slot[1], u32::MAX);
                slot[1] = local_f as u32;
            }
        }
    }

    let edge_verts: Vec<[u32; 2]> = edges
        .iter()
        .map(|e| {
            let [a, b] = data.edge_verts[e];
            [vert_local[&a], vert_local[&b]]
        })
        .collect();

    // coherent orientation by flood fill; conflict means non-orientable
    let mut orientation = vec![0i8; faces.len()];
    orientation[0] = 1;
    let mut queue = VecDeque::from([0u32]);
    while let Some(f) = queue.pop_front() {
        for es in &face_edges[f as usize] {
            let pair = edge_faces[es.id() as usize];
            let other = if pair[0] == f { pair[1] } else { pair[0] };
            let sign_other = face_edges[other as usize]
                .iter()
                .find(|s| s.id() == es.id())
                .map(|s| s.sign())
                .expect("shared edge");
            let want = (-(orientation[f as usize] as i64) * es.sign() * sign_other) as i8;
            let cur = orientation[other as usize];
            if cur == 0 {
                orientation[other as usize] = want;
                queue.push_back(other);
            } else if cur != want {
                return Err(SurfaceError::NonOrientable { face: faces[other as usize] });
            }
        }
    }

    let euler_characteristic = verts.len() as i64 - edges.len() as i64 + faces.len() as i64;
    let handle2 = 2 - euler_characteristic;
    if handle2 < 0 || handle2 % 2 != 0 {
        return Err(SurfaceError::Internal(format!(
            "orientable closed component with Euler characteristic {euler_characteristic}"
        )));
    }
    Ok(SurfaceComponent {
        verts,
        edges,
        faces,
        face_edges,
        edge_faces,
        edge_verts,
        orientation,
        euler_characteristic,
        genus: (handle2 / 2) as usize,
    })
}

/// Spanning trees of the primal and dual skeletons plus the leftover edges.
#[derive(Clone, Debug)]
pub struct TreeCotree {
    /// global edge ids of the primal spanning tree
    pub tree_edges: Vec<u32>,
    /// global edge ids of the dual spanning tree
    pub cotree_edges: Vec<u32>,
    /// global edge ids in neither tree, ascending; one cocycle per entry
    pub leftover_edges: Vec<u32>,
    /// per local face: (parent face, crossing local edge) in the dual tree
    face_parent: Vec<Option<(u32, u32)>>,
    /// local leftover edges in the same order as `leftover_edges`
    leftover_local: Vec<u32>,
}

/// Grow the primal tree first (breadth-first from the lowest vertex), then
/// the dual tree over the remaining edges (breadth-first from the lowest
/// face). The leftover count must equal 2 - chi.
pub fn build_tree_cotree(comp: &SurfaceComponent) -> Result<TreeCotree, SurfaceError> {
    let ne = comp.edge_count();
    let nv = comp.vertex_count();
    let nf = comp.face_count();

    let mut vert_adj: Vec<Vec<(u32, u32)>> = vec![Vec::new(); nv];
    for e in 0..ne as u32 {
        let [a, b] = comp.edge_vertex_pair(e);
        vert_adj[a as usize].push((e, b));
        vert_adj[b as usize].push((e, a));
    }
    for adj in &mut vert_adj {
        adj.sort_unstable();
    }

    let mut in_tree = vec![false; ne];
    let mut seen_v = vec![false; nv];
    let mut queue = VecDeque::from([0u32]);
    seen_v[0] = true;
    let mut reached_v = 1;
    while let Some(v) = queue.pop_front() {
        for &(e, w) in &vert_adj[v as usize] {
            if !seen_v[w as usize] {
                seen_v[w as usize] = true;
                reached_v += 1;
                in_tree[e as usize] = true;
                queue.push_back(w);
            }
        }
    }
    if reached_v != nv {
        return Err(SurfaceError::Internal("primal skeleton is disconnected".into()));
    }

    let mut in_cotree = vec![false; ne];
    let mut face_parent: Vec<Option<(u32, u32)>> = vec![None; nf];
    let mut seen_f = vec![false; nf];
    let mut fqueue = VecDeque::from([0u32]);
    seen_f[0] = true;
    let mut reached_f = 1;
    while let Some(f) = fqueue.pop_front() {
        for es in comp.face_edge_signs(f) {
            let e = es.id();
            if in_tree[e as usize] {
                continue;
            }
            let pair = comp.edge_face_pair(e);
            let other = if pair[0] == f { pair[1] } else { pair[0] };
            if !seen_f[other as usize] {
                seen_f[other as usize] = true;
                reached_f += 1;
                in_cotree[e as usize] = true;
                face_parent[other as usize] = Some((f, e));
                fqueue.push_back(other);
            }
        }
    }
    if reached_f != nf {
        return Err(SurfaceError::Internal(
            "dual skeleton is disconnected after removing tree edges".into(),
        ));
    }

    let mut tree_edges = Vec::new();
    let mut cotree_edges = Vec::new();
    let mut leftover_edges = Vec::new();
    let mut leftover_local = Vec::new();
    for e in 0..ne as u32 {
        if in_tree[e as usize] {
            tree_edges.push(comp.edges[e as usize]);
        } else if in_cotree[e as usize] {
            cotree_edges.push(comp.edges[e as usize]);
        } else {
            leftover_edges.push(comp.edges[e as usize]);
            leftover_local.push(e);
        }
    }

    let expected = 2 - comp.euler_characteristic;
    if leftover_edges.len() as i64 != expected {
        return Err(SurfaceError::Internal(format!(
            "leftover edge count {} does not match 2 - chi = {expected}",
            leftover_edges.len()
        )));
    }

    Ok(TreeCotree {
        tree_edges,
        cotree_edges,
        leftover_edges,
        face_parent,
        leftover_local,
    })
}

/// The 2g surface cocycles of one component, one lane per leftover edge.
#[derive(Clone, Debug)]
pub struct SurfaceGeneratorSet {
    /// index of the component within the extraction order
    pub component: usize,
    /// multi-lane 1-cochain over global edge ids; coefficients are +-1
    pub cocycles: Cochain,
    /// the leftover edge that closed each lane
    pub closing_edges: Vec<u32>,
}

impl SurfaceGeneratorSet {
    pub fn lanes(&self) -> usize {
        self.closing_edges.len()
    }
}

/// Close one cocycle per leftover edge through the dual tree. Crossing a
/// surface edge `e` into face `g` contributes `orientation(g) * kappa(g, e)`,
/// which makes every closed lane a surface cocycle with coefficients +-1.
pub fn close_generators(
    comp: &SurfaceComponent,
    tc: &TreeCotree,
    component_index: usize,
) -> SurfaceGeneratorSet {
    let lanes = tc.leftover_local.len();
    let mut cocycles = Cochain::new(1, lanes);
    if lanes == 0 {
        return SurfaceGeneratorSet {
            component: component_index,
            cocycles,
            closing_edges: Vec::new(),
        };
    }

    // path from each face up to the dual root, as (face, crossing edge)
    let path_to_root = |mut f: u32| -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        while let Some((parent, via)) = tc.face_parent[f as usize] {
            out.push((f, via));
            f = parent;
        }
        out
    };

    for (lane, &e_local) in tc.leftover_local.iter().enumerate() {
        let [f1, f2] = comp.edge_face_pair(e_local);
        // cross the leftover edge from f1 into f2
        let mut add = |edge_local: u32, into_face: u32| {
            let sign = comp
                .face_edge_signs(into_face)
                .iter()
                .find(|s| s.id() == edge_local)
                .map(|s| s.sign())
                .expect("edge on face");
            let coeff = comp.face_orientation(into_face) * sign;
            cocycles.add_lane(comp.edges[edge_local as usize], lane, coeff);
        };
        add(e_local, f2);

        // dual-tree path from f2 back to f1 via their lowest common ancestor
        let up2 = path_to_root(f2);
        let up1 = path_to_root(f1);
        let mut i = up2.len();
        let mut j = up1.len();
        while i > 0 && j > 0 && up2[i - 1] == up1[j - 1] {
            i -= 1;
            j -= 1;
        }
        // walk down from f2: each step crosses from child into parent
        for &(child, via) in &up2[..i] {
            let parent = tc.face_parent[child as usize].unwrap().0;
            add(via, parent);
        }
        // then up toward f1: each step crosses from parent into child
        for &(child, via) in up1[..j].iter().rev() {
            add(via, child);
        }
    }
    cocycles.prune();

    SurfaceGeneratorSet {
        component: component_index,
        cocycles,
        closing_edges: tc.leftover_edges.clone(),
    }
}
