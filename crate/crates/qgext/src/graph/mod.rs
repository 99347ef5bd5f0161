//! Sphere-stratified metric graphs.
//!
//! Every graph in this crate is rooted and generated sphere by sphere: the
//! n-th combinatorial sphere `S_n` is the set of vertices at combinatorial
//! distance n from the root, edges run either between consecutive spheres
//! (forward edges) or inside a sphere (horizontal edges), and all edge
//! lengths are strictly positive. A [`SphereGraph`] materializes the prefix
//! of such a graph up to a chosen horizon; deficiency and summability tests
//! only ever consume prefixes.

mod family;
mod scheme;

pub use family::{
    build_antitree, build_antitree_infinite, build_radial_tree, build_rope_ladder,
    build_two_ray_tree, FamilyConfig, IntegerRule, SchemeConfig, SphereRule,
};
pub use scheme::LengthScheme;

use std::fmt;

use crate::error::GraphError;

/// Vertex address: `(sphere, index within sphere)`, both 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub sphere: usize,
    pub index: usize,
}

impl Vertex {
    pub fn new(sphere: usize, index: usize) -> Self {
        Vertex { sphere, index }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v_{}^{}", self.index + 1, self.sphere)
    }
}

/// An edge between spheres `n` and `n+1`: `(index in S_n, index in S_{n+1}, length)`.
pub type ForwardEdge = (usize, usize, f64);
/// An edge inside a sphere: `(i, j, length)` with `i < j`.
pub type HorizontalEdge = (usize, usize, f64);

/// Family metadata carried for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyInfo {
    pub name: String,
    pub detail: String,
    /// One canonical ray per structural branch: entry `k` of a ray is the
    /// vertex index inside sphere `k+1` (every ray starts at the root).
    pub canonical_rays: Vec<Vec<usize>>,
    /// Notes surfaced verbatim in reports (e.g. ignored scheme values).
    pub notes: Vec<String>,
}

/// A rooted, locally finite metric graph generated up to a horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGraph {
    sizes: Vec<usize>,
    forward: Vec<Vec<ForwardEdge>>,
    horizontal: Vec<Vec<HorizontalEdge>>,
    family: FamilyInfo,
}

impl SphereGraph {
    /// Validates and assembles a generated prefix.
    ///
    /// `sizes` covers spheres `0..=horizon`, `forward[n]` holds the edges
    /// between `S_n` and `S_{n+1}`, `horizontal[n]` the edges inside `S_n`.
    pub fn from_parts(
        sizes: Vec<usize>,
        forward: Vec<Vec<ForwardEdge>>,
        horizontal: Vec<Vec<HorizontalEdge>>,
        family: FamilyInfo,
    ) -> Result<Self, GraphError> {
        if sizes.is_empty() || sizes[0] != 1 {
            return Err(GraphError::Config("sphere 0 must contain exactly the root".into()));
        }
        for (n, &s) in sizes.iter().enumerate() {
            if s == 0 {
                return Err(GraphError::NonpositiveSphere { sphere: n, size: s });
            }
        }
        if forward.len() + 1 != sizes.len() || horizontal.len() != sizes.len() {
            return Err(GraphError::Config(
                "edge lists inconsistent with sphere count".into(),
            ));
        }
        for (n, edges) in forward.iter().enumerate() {
            let mut seen = std::collections::HashSet::new();
            let mut covered = vec![false; sizes[n + 1]];
            for &(i, j, len) in edges {
                if i >= sizes[n] || j >= sizes[n + 1] {
                    return Err(GraphError::Config(format!(
                        "forward edge ({i},{j}) out of range at sphere {n}"
                    )));
                }
                if !len.is_finite() || len <= 0.0 {
                    return Err(GraphError::NonpositiveLength {
                        value: len,
                        context: format!("forward edge ({i},{j}) at sphere {n}"),
                    });
                }
                if !seen.insert((i, j)) {
                    return Err(GraphError::DuplicateEdge { sphere: n, i, j });
                }
                covered[j] = true;
            }
            if let Some(index) = covered.iter().position(|c| !c) {
                return Err(GraphError::DisconnectedSphere {
                    sphere: n + 1,
                    index,
                });
            }
        }
        for (n, edges) in horizontal.iter().enumerate() {
            let mut seen = std::collections::HashSet::new();
            for &(i, j, len) in edges {
                if i >= j || j >= sizes[n] {
                    return Err(GraphError::Config(format!(
                        "horizontal edge ({i},{j}) invalid at sphere {n}"
                    )));
                }
                if !len.is_finite() || len <= 0.0 {
                    return Err(GraphError::NonpositiveLength {
                        value: len,
                        context: format!("horizontal edge ({i},{j}) at sphere {n}"),
                    });
                }
                if !seen.insert((i, j)) {
                    return Err(GraphError::DuplicateEdge { sphere: n, i, j });
                }
            }
        }
        Ok(SphereGraph {
            sizes,
            forward,
            horizontal,
            family,
        })
    }

    /// Largest generated sphere index.
    pub fn horizon(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn family(&self) -> &FamilyInfo {
        &self.family
    }

    pub fn sphere_size(&self, n: usize) -> Result<usize, GraphError> {
        self.sizes.get(n).copied().ok_or(GraphError::HorizonExceeded {
            requested: n,
            available: self.horizon(),
        })
    }

    /// Edges between `S_n` and `S_{n+1}`.
    pub fn forward_edges(&self, n: usize) -> Result<&[ForwardEdge], GraphError> {
        self.forward
            .get(n)
            .map(|v| v.as_slice())
            .ok_or(GraphError::HorizonExceeded {
                requested: n + 1,
                available: self.horizon(),
            })
    }

    /// Edges inside `S_n`.
    pub fn horizontal_edges(&self, n: usize) -> Result<&[HorizontalEdge], GraphError> {
        self.horizontal
            .get(n)
            .map(|v| v.as_slice())
            .ok_or(GraphError::HorizonExceeded {
                requested: n,
                available: self.horizon(),
            })
    }

    pub fn has_horizontal_edges(&self) -> bool {
        self.horizontal.iter().any(|edges| !edges.is_empty())
    }

    /// True when every non-root vertex has exactly one backward edge and
    /// there are no horizontal edges.
    pub fn is_tree(&self) -> bool {
        if self.has_horizontal_edges() {
            return false;
        }
        for (n, edges) in self.forward.iter().enumerate() {
            let mut backward_count = vec![0usize; self.sizes[n + 1]];
            for &(_, j, _) in edges {
                backward_count[j] += 1;
            }
            if backward_count.iter().any(|&c| c != 1) {
                return false;
            }
        }
        true
    }

    fn check_vertex(&self, v: Vertex) -> Result<(), GraphError> {
        if v.sphere > self.horizon() || v.index >= self.sizes[v.sphere] {
            return Err(GraphError::UnknownVertex(v));
        }
        Ok(())
    }

    /// All neighbors of `v` within the generated horizon, with edge lengths.
    /// Order: backward, forward, horizontal.
    pub fn neighbors(&self, v: Vertex) -> Result<Vec<(Vertex, f64)>, GraphError> {
        self.check_vertex(v)?;
        let mut out = Vec::new();
        if v.sphere > 0 {
            for &(i, j, len) in &self.forward[v.sphere - 1] {
                if j == v.index {
                    out.push((Vertex::new(v.sphere - 1, i), len));
                }
            }
        }
        if v.sphere < self.horizon() {
            for &(i, j, len) in &self.forward[v.sphere] {
                if i == v.index {
                    out.push((Vertex::new(v.sphere + 1, j), len));
                }
            }
        }
        for &(i, j, len) in &self.horizontal[v.sphere] {
            if i == v.index {
                out.push((Vertex::new(v.sphere, j), len));
            } else if j == v.index {
                out.push((Vertex::new(v.sphere, i), len));
            }
        }
        Ok(out)
    }

    /// Star weight `m(v)`: total length of the edges incident to `v`.
    ///
    /// Requires `v.sphere < horizon` so that the forward star is fully
    /// generated.
    pub fn star_weight(&self, v: Vertex) -> Result<f64, GraphError> {
        self.check_vertex(v)?;
        if v.sphere >= self.horizon() {
            return Err(GraphError::HorizonExceeded {
                requested: v.sphere + 1,
                available: self.horizon(),
            });
        }
        Ok(self
            .neighbors(v)?
            .iter()
            .map(|&(_, len)| len)
            .sum())
    }

    /// Volume of the layer added when sphere `k` joins the truncation:
    /// forward edges from `S_{k-1}` plus horizontal edges inside `S_k`.
    pub fn layer_volume(&self, k: usize) -> Result<f64, GraphError> {
        if k == 0 {
            return Ok(0.0);
        }
        let mut vol = 0.0;
        for &(_, _, len) in self.forward_edges(k - 1)? {
            vol += len;
        }
        for &(_, _, len) in self.horizontal_edges(k)? {
            vol += len;
        }
        Ok(vol)
    }

    /// Compact exhaustion member: spheres `0..=n` with all edges among them.
    pub fn truncate(&self, n: usize) -> Result<FiniteTruncation, GraphError> {
        if n > self.horizon() {
            return Err(GraphError::HorizonExceeded {
                requested: n,
                available: self.horizon(),
            });
        }
        let mut offsets = Vec::with_capacity(n + 2);
        let mut total = 0usize;
        for k in 0..=n {
            offsets.push(total);
            total += self.sizes[k];
        }
        offsets.push(total);
        let mut vertices = Vec::with_capacity(total);
        for k in 0..=n {
            for i in 0..self.sizes[k] {
                vertices.push(Vertex::new(k, i));
            }
        }
        let mut edges = Vec::new();
        let mut volume = 0.0;
        for k in 1..=n {
            for &(i, j, len) in &self.forward[k - 1] {
                edges.push(TruncEdge {
                    a: offsets[k - 1] + i,
                    b: offsets[k] + j,
                    length: len,
                });
                volume += len;
            }
            for &(i, j, len) in &self.horizontal[k] {
                edges.push(TruncEdge {
                    a: offsets[k] + i,
                    b: offsets[k] + j,
                    length: len,
                });
                volume += len;
            }
        }
        let boundary = (offsets[n]..offsets[n + 1]).collect();
        Ok(FiniteTruncation {
            vertices,
            edges,
            boundary,
            volume,
            sphere_offsets: offsets,
            outer_sphere: n,
        })
    }

    /// Canonical rays as explicit vertex sequences `root, v(1), ..., v(horizon)`.
    pub fn canonical_ray_vertices(&self) -> Result<Vec<Vec<Vertex>>, GraphError> {
        if self.family.canonical_rays.is_empty() {
            return Err(GraphError::EmptyRaySet);
        }
        let mut out = Vec::new();
        for ray in &self.family.canonical_rays {
            let mut path = vec![Vertex::new(0, 0)];
            for (k, &index) in ray.iter().enumerate().take(self.horizon()) {
                path.push(Vertex::new(k + 1, index));
            }
            out.push(path);
        }
        Ok(out)
    }
}

/// An edge of a truncation, endpoints as dense vertex ids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncEdge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
}

/// A compact exhaustion member: spheres `0..=n`, boundary `∂ = S_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteTruncation {
    vertices: Vec<Vertex>,
    edges: Vec<TruncEdge>,
    boundary: Vec<usize>,
    volume: f64,
    sphere_offsets: Vec<usize>,
    outer_sphere: usize,
}

impl FiniteTruncation {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[TruncEdge] {
        &self.edges
    }

    /// Dense ids of the boundary vertices (the outermost sphere).
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn is_boundary(&self, id: usize) -> bool {
        id >= self.sphere_offsets[self.outer_sphere]
    }

    /// Total length of the included edges.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn outer_sphere(&self) -> usize {
        self.outer_sphere
    }

    pub fn vertex_id(&self, v: Vertex) -> Result<usize, GraphError> {
        if v.sphere > self.outer_sphere {
            return Err(GraphError::UnknownVertex(v));
        }
        let id = self.sphere_offsets[v.sphere] + v.index;
        if id >= self.sphere_offsets[v.sphere + 1] {
            return Err(GraphError::UnknownVertex(v));
        }
        Ok(id)
    }

    pub fn vertex(&self, id: usize) -> Vertex {
        self.vertices[id]
    }

    /// Adjacency lists `(neighbor id, edge length)` in edge order.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for e in &self.edges {
            adj[e.a].push((e.b, e.length));
            adj[e.b].push((e.a, e.length));
        }
        adj
    }
}
