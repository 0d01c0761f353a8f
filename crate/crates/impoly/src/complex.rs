//! Finite abstract simplicial complexes.
//!
//! Vertices are dense indices `0..n`. A [`Simplex`] is a sorted set of
//! vertices; the complex stores the full downward-closed family including
//! every singleton, so the vertex list is exactly the 0-skeleton. Star and
//! shell combinatorics follow the usual definitions: the closed star of `v`
//! collects every simplex containing `v` together with all faces, iterated
//! stars grow one star layer at a time, and the k-th shell is the set
//! difference of consecutive iterated stars.
//!
//! Edge subdivision produces a child complex plus a [`CarrierMap`] that
//! records, for every child vertex, the parent simplex and barycentric
//! position it sits on. Carrier maps compose, so repeated subdivision keeps
//! provenance against the original complex. Subdivision preserves parent
//! vertex ids; new vertices are appended after them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Vertex index into a complex.
pub type VertexId = usize;

/// Canonical edge key: vertex pair with `u < w`.
pub type EdgeKey = (VertexId, VertexId);

/// Normalizes an unordered vertex pair into an [`EdgeKey`].
pub fn edge_key(a: VertexId, b: VertexId) -> EdgeKey {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ComplexError {
    #[error("duplicate vertex id {0}")]
    DuplicateVertex(VertexId),
    #[error("simplex {0} references unknown vertex {1}")]
    UnknownVertex(String, usize),
    #[error("simplex {0} repeats vertex {1}")]
    RepeatedVertex(String, usize),
    #[error("empty simplex list")]
    EmptySimplexList,
    #[error("empty simplex")]
    EmptySimplex,
    #[error("unknown vertex id {0}")]
    NoSuchVertex(VertexId),
    #[error("edge ({0}, {1}) is not in the complex")]
    NoSuchEdge(VertexId, VertexId),
    #[error("edge ({0}, {1}) has a coface of dimension >= 2 and cannot be subdivided")]
    EdgeHasCoface(VertexId, VertexId),
    #[error("segment count for edge ({0}, {1}) must be >= 1")]
    BadSegmentCount(VertexId, VertexId),
    #[error("break fractions for edge ({0}, {1}) must be strictly increasing inside (0, 1)")]
    BadBreaks(VertexId, VertexId),
}

/// A simplex: a nonempty sorted set of vertex ids.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Simplex(Vec<VertexId>);

impl Simplex {
    /// Builds a simplex from vertex ids; sorts and rejects repeats.
    pub fn new(mut vertices: Vec<VertexId>) -> Result<Self, ComplexError> {
        if vertices.is_empty() {
            return Err(ComplexError::EmptySimplex);
        }
        vertices.sort_unstable();
        for pair in vertices.windows(2) {
            if pair[0] == pair[1] {
                return Err(ComplexError::RepeatedVertex(
                    format!("{:?}", vertices),
                    pair[0],
                ));
            }
        }
        Ok(Simplex(vertices))
    }

    pub fn vertex(v: VertexId) -> Self {
        Simplex(vec![v])
    }

    pub fn edge(a: VertexId, b: VertexId) -> Self {
        let (u, w) = edge_key(a, b);
        Simplex(vec![u, w])
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    /// Dimension: vertex count minus one.
    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// Every nonempty subset of the vertex set, including the simplex itself.
    pub fn closure(&self) -> Vec<Simplex> {
        let n = self.0.len();
        let mut out = Vec::with_capacity((1usize << n) - 1);
        for mask in 1u32..(1u32 << n) {
            let sub: Vec<VertexId> = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| self.0[i])
                .collect();
            out.push(Simplex(sub));
        }
        out
    }

    /// The (u, w) key when this is an edge.
    pub fn as_edge(&self) -> Option<EdgeKey> {
        if self.0.len() == 2 {
            Some((self.0[0], self.0[1]))
        } else {
            None
        }
    }
}

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ">")
    }
}

/// A finite abstract simplicial complex over dense vertex ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialComplex {
    vertex_count: usize,
    simplices: BTreeSet<Simplex>,
}

/// Builds a complex from a vertex list and a simplex list.
///
/// Vertex ids may be arbitrary distinct integers; they are renumbered to
/// `0..n` by sorted order. The downward closure is completed automatically
/// and every listed vertex becomes a singleton simplex.
pub fn build_complex(
    vertices: &[usize],
    simplices: &[Vec<usize>],
) -> Result<SimplicialComplex, ComplexError> {
    if simplices.is_empty() {
        return Err(ComplexError::EmptySimplexList);
    }
    let id_map = normalize_ids(vertices)?;
    let mut set: BTreeSet<Simplex> = BTreeSet::new();
    for v in id_map.values() {
        set.insert(Simplex::vertex(*v));
    }
    for raw in simplices {
        let mapped: Vec<VertexId> = raw
            .iter()
            .map(|v| {
                id_map
                    .get(v)
                    .copied()
                    .ok_or_else(|| ComplexError::UnknownVertex(format!("{:?}", raw), *v))
            })
            .collect::<Result<_, _>>()?;
        let s = Simplex::new(mapped)?;
        for face in s.closure() {
            set.insert(face);
        }
    }
    Ok(SimplicialComplex {
        vertex_count: id_map.len(),
        simplices: set,
    })
}

/// The dense renumbering used by [`build_complex`]: original id -> `0..n`
/// assigned in sorted order. Errors on duplicates.
pub fn normalize_ids(vertices: &[usize]) -> Result<BTreeMap<usize, VertexId>, ComplexError> {
    let mut sorted: Vec<usize> = vertices.to_vec();
    sorted.sort_unstable();
    for pair in sorted.windows(2) {
        if pair[0] == pair[1] {
            return Err(ComplexError::DuplicateVertex(pair[0]));
        }
    }
    Ok(sorted.into_iter().enumerate().map(|(i, v)| (v, i)).collect())
}

impl SimplicialComplex {
    /// Internal constructor from an already closed simplex set.
    fn from_closed(vertex_count: usize, simplices: BTreeSet<Simplex>) -> Self {
        SimplicialComplex {
            vertex_count,
            simplices,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        v < self.vertex_count && self.simplices.contains(&Simplex::vertex(v))
    }

    pub fn simplices(&self) -> impl Iterator<Item = &Simplex> {
        self.simplices.iter()
    }

    pub fn simplex_set(&self) -> &BTreeSet<Simplex> {
        &self.simplices
    }

    pub fn has_simplex(&self, s: &Simplex) -> bool {
        self.simplices.contains(s)
    }

    /// Max simplex cardinality minus one.
    pub fn dimension(&self) -> usize {
        self.simplices.iter().map(|s| s.dim()).max().unwrap_or(0)
    }

    /// All edges in sorted order.
    pub fn edges(&self) -> Vec<EdgeKey> {
        self.simplices.iter().filter_map(|s| s.as_edge()).collect()
    }

    pub fn has_edge(&self, u: VertexId, w: VertexId) -> bool {
        self.simplices.contains(&Simplex::edge(u, w))
    }

    /// Edges incident to `v`, sorted.
    pub fn incident_edges(&self, v: VertexId) -> Vec<EdgeKey> {
        self.edges().into_iter().filter(|&(u, w)| u == v || w == v).collect()
    }

    /// Whether an edge has a coface of dimension two or more.
    pub fn edge_has_higher_coface(&self, u: VertexId, w: VertexId) -> bool {
        self.simplices
            .iter()
            .any(|s| s.dim() >= 2 && s.contains(u) && s.contains(w))
    }

    /// Downward closure check; always true for complexes built through this
    /// module, exposed for document validation.
    pub fn is_downward_closed(&self) -> bool {
        self.simplices
            .iter()
            .all(|s| s.closure().iter().all(|f| self.simplices.contains(f)))
    }

    /// The closed star of `v`: every simplex containing `v` plus all faces,
    /// as a subcomplex sharing this complex's vertex ids.
    pub fn closed_star(&self, v: VertexId) -> Result<SimplicialComplex, ComplexError> {
        if !self.contains_vertex(v) {
            return Err(ComplexError::NoSuchVertex(v));
        }
        let mut set = BTreeSet::new();
        for s in &self.simplices {
            if s.contains(v) {
                for face in s.closure() {
                    set.insert(face);
                }
            }
        }
        Ok(SimplicialComplex::from_closed(self.vertex_count, set))
    }

    /// Shell decomposition about `v`.
    ///
    /// `Sh^1 = St(v)` and `Sh^k = St^k(v) \ St^{k-1}(v)` where the iterated
    /// star joins the closed stars of all vertices reached so far. The list
    /// stops as soon as the iterated star stabilizes; for a complex
    /// connected through `v` the shells partition the whole complex.
    pub fn shell_decomposition(&self, v: VertexId) -> Result<ShellDecomposition, ComplexError> {
        if !self.contains_vertex(v) {
            return Err(ComplexError::NoSuchVertex(v));
        }
        // star adjacency: vertex -> simplices containing it, built once
        let mut star: Vec<Vec<&Simplex>> = vec![Vec::new(); self.vertex_count];
        for s in &self.simplices {
            for &u in s.vertices() {
                star[u].push(s);
            }
        }
        // each vertex's star is expanded exactly once: expanding it again in
        // a later round cannot add anything new
        let mut shells: Vec<BTreeSet<Simplex>> = Vec::new();
        let mut covered: BTreeSet<Simplex> = BTreeSet::new();
        let mut seen_vertex = vec![false; self.vertex_count];
        let mut frontier: Vec<VertexId> = vec![v];
        seen_vertex[v] = true;
        while !frontier.is_empty() {
            let mut shell: BTreeSet<Simplex> = BTreeSet::new();
            for &u in &frontier {
                for s in &star[u] {
                    for face in s.closure() {
                        if !covered.contains(&face) {
                            shell.insert(face);
                        }
                    }
                }
            }
            if shell.is_empty() {
                break;
            }
            let mut next = Vec::new();
            for s in &shell {
                if s.dim() == 0 {
                    let u = s.vertices()[0];
                    if !seen_vertex[u] {
                        seen_vertex[u] = true;
                        next.push(u);
                    }
                }
            }
            covered.extend(shell.iter().cloned());
            shells.push(shell);
            frontier = next;
        }
        Ok(ShellDecomposition { base: v, shells })
    }

    /// Splits each listed edge into `m` equal parts.
    pub fn subdivide_edges(
        &self,
        plan: &BTreeMap<EdgeKey, usize>,
    ) -> Result<(SimplicialComplex, CarrierMap), ComplexError> {
        let mut breaks: BTreeMap<EdgeKey, Vec<f64>> = BTreeMap::new();
        for (&(u, w), &m) in plan {
            if m == 0 {
                return Err(ComplexError::BadSegmentCount(u, w));
            }
            let fr: Vec<f64> = (1..m).map(|i| i as f64 / m as f64).collect();
            breaks.insert((u, w), fr);
        }
        self.subdivide_edges_at(&breaks)
    }

    /// Splits edges at explicit interior fractions measured from the lower
    /// vertex of each edge key. Edges with higher-dimensional cofaces are
    /// rejected when actually split.
    pub fn subdivide_edges_at(
        &self,
        breaks: &BTreeMap<EdgeKey, Vec<f64>>,
    ) -> Result<(SimplicialComplex, CarrierMap), ComplexError> {
        for (&(u, w), fr) in breaks {
            if !self.has_edge(u, w) {
                return Err(ComplexError::NoSuchEdge(u, w));
            }
            if fr.is_empty() {
                continue;
            }
            if self.edge_has_higher_coface(u, w) {
                return Err(ComplexError::EdgeHasCoface(u, w));
            }
            let increasing = fr.windows(2).all(|p| p[0] < p[1]);
            if !increasing || fr[0] <= 0.0 || *fr.last().unwrap() >= 1.0 {
                return Err(ComplexError::BadBreaks(u, w));
            }
        }

        let mut carriers: Vec<Carrier> = (0..self.vertex_count)
            .map(|v| Carrier {
                simplex: Simplex::vertex(v),
                coords: vec![1.0],
            })
            .collect();
        let mut set: BTreeSet<Simplex> = BTreeSet::new();
        for s in &self.simplices {
            match s.as_edge() {
                Some(e) if breaks.get(&e).map_or(false, |fr| !fr.is_empty()) => {}
                _ => {
                    set.insert(s.clone());
                }
            }
        }
        let mut next_id = self.vertex_count;
        for (&(u, w), fr) in breaks {
            if fr.is_empty() {
                continue;
            }
            let mut prev = u;
            for &t in fr {
                let nv = next_id;
                next_id += 1;
                carriers.push(Carrier {
                    simplex: Simplex::edge(u, w),
                    coords: vec![1.0 - t, t],
                });
                set.insert(Simplex::vertex(nv));
                set.insert(Simplex::edge(prev, nv));
                prev = nv;
            }
            set.insert(Simplex::edge(prev, w));
        }
        let child = SimplicialComplex::from_closed(next_id, set);
        Ok((child, CarrierMap { carriers }))
    }
}

/// Shells about a base vertex, in order of increasing star depth.
#[derive(Clone, Debug)]
pub struct ShellDecomposition {
    base: VertexId,
    shells: Vec<BTreeSet<Simplex>>,
}

impl ShellDecomposition {
    pub fn base_vertex(&self) -> VertexId {
        self.base
    }

    pub fn len(&self) -> usize {
        self.shells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shells.is_empty()
    }

    pub fn shells(&self) -> &[BTreeSet<Simplex>] {
        &self.shells
    }

    /// Zero-based shell index of a simplex.
    pub fn shell_of(&self, s: &Simplex) -> Option<usize> {
        self.shells.iter().position(|sh| sh.contains(s))
    }

    pub fn shell_of_edge(&self, u: VertexId, w: VertexId) -> Option<usize> {
        self.shell_of(&Simplex::edge(u, w))
    }

    /// Whether the shells cover every simplex of `x`.
    pub fn is_exhaustive(&self, x: &SimplicialComplex) -> bool {
        let covered: usize = self.shells.iter().map(|s| s.len()).sum();
        covered == x.simplex_set().len()
    }
}

/// Barycentric position of one child vertex on a parent simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct Carrier {
    /// Parent simplex carrying the child vertex.
    pub simplex: Simplex,
    /// Barycentric coordinates aligned with the simplex's sorted vertices;
    /// nonnegative, summing to one.
    pub coords: Vec<f64>,
}

impl Carrier {
    /// Position along a parent edge `(u, w)` measured from `u`, when this
    /// carrier sits on that edge or one of its endpoints.
    pub fn position_on_edge(&self, u: VertexId, w: VertexId) -> Option<f64> {
        match self.simplex.vertices() {
            [a] if *a == u => Some(0.0),
            [a] if *a == w => Some(1.0),
            [a, b] if (*a, *b) == edge_key(u, w) => {
                if u < w {
                    Some(self.coords[1])
                } else {
                    Some(self.coords[0])
                }
            }
            _ => None,
        }
    }
}

/// Child-vertex carriers over a parent complex.
#[derive(Clone, Debug, PartialEq)]
pub struct CarrierMap {
    carriers: Vec<Carrier>,
}

impl CarrierMap {
    /// Identity carrier for a complex mapped onto itself.
    pub fn identity(x: &SimplicialComplex) -> Self {
        CarrierMap {
            carriers: (0..x.vertex_count())
                .map(|v| Carrier {
                    simplex: Simplex::vertex(v),
                    coords: vec![1.0],
                })
                .collect(),
        }
    }

    pub fn from_carriers(carriers: Vec<Carrier>) -> Self {
        CarrierMap { carriers }
    }

    pub fn len(&self) -> usize {
        self.carriers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.carriers.is_empty()
    }

    pub fn carrier(&self, child_vertex: VertexId) -> &Carrier {
        &self.carriers[child_vertex]
    }

    pub fn carriers(&self) -> &[Carrier] {
        &self.carriers
    }

    /// Composes `fine` (a subdivision of this map's child) with `self`,
    /// yielding carriers of the fine complex over this map's parent.
    ///
    /// Only edge subdivisions are supported, matching what this module
    /// produces: every fine vertex sits on a child vertex or child edge.
    pub fn compose(&self, fine: &CarrierMap) -> CarrierMap {
        let carriers = fine
            .carriers
            .iter()
            .map(|c| match c.simplex.vertices() {
                [m] => self.carriers[*m].clone(),
                [a, b] => {
                    let ca = &self.carriers[*a];
                    let cb = &self.carriers[*b];
                    let parent_edge = ca
                        .simplex
                        .as_edge()
                        .or_else(|| cb.simplex.as_edge())
                        .unwrap_or_else(|| {
                            edge_key(ca.simplex.vertices()[0], cb.simplex.vertices()[0])
                        });
                    let (u, w) = parent_edge;
                    let ta = ca
                        .position_on_edge(u, w)
                        .expect("child edge endpoints share a parent edge");
                    let tb = cb
                        .position_on_edge(u, w)
                        .expect("child edge endpoints share a parent edge");
                    let t = c.coords[0] * ta + c.coords[1] * tb;
                    Carrier {
                        simplex: Simplex::edge(u, w),
                        coords: vec![1.0 - t, t],
                    }
                }
                other => panic!("carrier over a {}-simplex is unsupported", other.len() - 1),
            })
            .collect();
        CarrierMap { carriers }
    }

    /// Ordered chain of child vertices along the parent edge `(u, w)`,
    /// including the endpoints, as `(child vertex, position from u)`.
    ///
    /// Relies on parent vertex ids being preserved in the child complex,
    /// which holds for all subdivisions produced by this module.
    pub fn edge_chain(&self, u: VertexId, w: VertexId) -> Vec<(VertexId, f64)> {
        let mut chain: Vec<(VertexId, f64)> = Vec::new();
        for (cv, c) in self.carriers.iter().enumerate() {
            match c.simplex.vertices() {
                [a] if *a == u => chain.push((cv, 0.0)),
                [a] if *a == w => chain.push((cv, 1.0)),
                [a, b] if (*a, *b) == edge_key(u, w) => {
                    let t = c.position_on_edge(u, w).unwrap();
                    chain.push((cv, t));
                }
                _ => {}
            }
        }
        chain.sort_by(|x, y| x.1.partial_cmp(&y.1).unwrap().then(x.0.cmp(&y.0)));
        chain
    }
}
