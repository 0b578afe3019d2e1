//! Graph representation, named-family generators, and BFS distances.
//!
//! Vertices are dense integers `0..n`. Canonical numbering per family:
//! hypercube vertices are bitmasks, torus vertices are mixed-radix words
//! (coordinate 0 least significant), trees are numbered in BFS order from
//! the root, and a product vertex `(a, b)` is `a * |V(H)| + b`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};

/// Immutable simple undirected connected graph with degree metadata and a
/// cache of single-source BFS distance fields.
pub struct Graph {
    n: usize,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    degree: Vec<u32>,
    max_degree: u32,
    regular_degree: Option<u32>,
    bipartition: Option<Vec<u8>>,
    family: Option<FamilySpec>,
    dist_cache: RwLock<HashMap<u32, Arc<Vec<u32>>>>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &(self.neighbors.len() / 2))
            .field("family", &self.family.as_ref().map(|s| s.to_string()))
            .finish()
    }
}

impl Clone for Graph {
    fn clone(&self) -> Self {
        Graph {
            n: self.n,
            offsets: self.offsets.clone(),
            neighbors: self.neighbors.clone(),
            degree: self.degree.clone(),
            max_degree: self.max_degree,
            regular_degree: self.regular_degree,
            bipartition: self.bipartition.clone(),
            family: self.family.clone(),
            dist_cache: RwLock::new(self.dist_cache.read().unwrap().clone()),
        }
    }
}

/// Exact graph metric from a source set.
#[derive(Debug, Clone)]
pub struct DistanceField {
    pub source: Vec<u32>,
    pub dist: Vec<u32>,
}

impl Graph {
    /// Build from an explicit edge list over vertices `0..n`.
    ///
    /// Rejects self-loops, duplicate edges, out-of-range endpoints, the
    /// empty graph, and disconnected input. Connectivity is enforced here
    /// once, not per operation.
    pub fn build(n: usize, edges: &[(u32, u32)]) -> Result<Graph> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut seen = BTreeSet::new();
        for &(u, v) in edges {
            if u as usize >= n {
                return Err(Error::VertexOutOfRange(u, n));
            }
            if v as usize >= n {
                return Err(Error::VertexOutOfRange(v, n));
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(Error::DuplicateEdge(key.0, key.1));
            }
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for row in &mut adj {
            row.sort_unstable();
        }
        Self::from_sorted_adjacency(adj, None)
    }

    fn from_sorted_adjacency(adj: Vec<Vec<u32>>, family: Option<FamilySpec>) -> Result<Graph> {
        let n = adj.len();
        let degree: Vec<u32> = adj.iter().map(|a| a.len() as u32).collect();
        let max_degree = degree.iter().copied().max().unwrap_or(0);
        let regular_degree = if degree.iter().all(|&d| d == max_degree) {
            Some(max_degree)
        } else {
            None
        };
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::new();
        offsets.push(0);
        for row in &adj {
            neighbors.extend_from_slice(row);
            offsets.push(neighbors.len());
        }
        let g = Graph {
            n,
            offsets,
            neighbors,
            degree,
            max_degree,
            regular_degree,
            bipartition: None,
            family,
            dist_cache: RwLock::new(HashMap::new()),
        };
        // Connectivity and two-coloring in one sweep.
        let mut color = vec![u8::MAX; n];
        let mut bipartite = true;
        let mut queue = std::collections::VecDeque::new();
        color[0] = 0;
        queue.push_back(0u32);
        let mut visited = 1usize;
        while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v) {
                if color[w as usize] == u8::MAX {
                    color[w as usize] = 1 - color[v as usize];
                    visited += 1;
                    queue.push_back(w);
                } else if color[w as usize] == color[v as usize] {
                    bipartite = false;
                }
            }
        }
        if visited < n {
            let missing = color.iter().position(|&c| c == u8::MAX).unwrap() as u32;
            return Err(Error::Disconnected(missing));
        }
        Ok(Graph {
            bipartition: bipartite.then_some(color),
            ..g
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.neighbors[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    pub fn degree(&self, v: u32) -> u32 {
        self.degree[v as usize]
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    /// Common degree when the graph is regular.
    pub fn regular_degree(&self) -> Option<u32> {
        self.regular_degree
    }

    pub fn is_regular(&self) -> bool {
        self.regular_degree.is_some()
    }

    pub fn is_bipartite(&self) -> bool {
        self.bipartition.is_some()
    }

    /// Proper two-coloring when bipartite.
    pub fn bipartition(&self) -> Option<&[u8]> {
        self.bipartition.as_deref()
    }

    pub fn family(&self) -> Option<&FamilySpec> {
        self.family.as_ref()
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Edges as ordered pairs `u < v`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.n as u32)
            .flat_map(move |u| self.neighbors(u).iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    /// BFS distance field from a non-empty source set.
    pub fn bfs_distances(&self, source: &[u32]) -> Result<DistanceField> {
        if source.is_empty() {
            return Err(Error::EmptySource);
        }
        let mut dist = vec![u32::MAX; self.n];
        let mut queue = std::collections::VecDeque::new();
        for &s in source {
            if s as usize >= self.n {
                return Err(Error::VertexOutOfRange(s, self.n));
            }
            if dist[s as usize] == u32::MAX {
                dist[s as usize] = 0;
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &w in self.neighbors(v) {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dist[v as usize] + 1;
                    queue.push_back(w);
                }
            }
        }
        let mut src: Vec<u32> = source.to_vec();
        src.sort_unstable();
        src.dedup();
        Ok(DistanceField { source: src, dist })
    }

    /// Cached single-source distances.
    pub fn distances_from(&self, v: u32) -> Arc<Vec<u32>> {
        if let Some(d) = self.dist_cache.read().unwrap().get(&v) {
            return Arc::clone(d);
        }
        let field = self.bfs_distances(&[v]).expect("single vertex source");
        let arc = Arc::new(field.dist);
        self.dist_cache
            .write()
            .unwrap()
            .entry(v)
            .or_insert_with(|| Arc::clone(&arc));
        arc
    }

    pub fn dist(&self, u: u32, v: u32) -> u32 {
        self.distances_from(u)[v as usize]
    }

    /// Vertices of degree one. Truncated trees use this to flag
    /// boundary-contaminated curvature queries.
    pub fn leaves(&self) -> Vec<u32> {
        (0..self.n as u32).filter(|&v| self.degree(v) == 1).collect()
    }
}

/// Named-family generator spec.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilySpec {
    Cycle(usize),
    Hypercube(u32),
    Torus { n: usize, d: u32 },
    Tree { p: u32, depth: u32 },
    Complete(usize),
    Product(Box<FamilySpec>, Box<FamilySpec>),
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Cycle(n) => write!(f, "cycle:{n}"),
            FamilySpec::Hypercube(d) => write!(f, "hypercube:{d}"),
            FamilySpec::Torus { n, d } => write!(f, "torus:{n},{d}"),
            FamilySpec::Tree { p, depth } => write!(f, "tree:{p},{depth}"),
            FamilySpec::Complete(n) => write!(f, "complete:{n}"),
            FamilySpec::Product(a, b) => write!(f, "product:{a},{b}"),
        }
    }
}

impl FamilySpec {
    /// Parse specs like `cycle:6`, `tree:3,5`, `product:cycle:3,cycle:3`.
    pub fn parse(s: &str) -> Result<FamilySpec> {
        let tokens: Vec<&str> = s.split([':', ',']).map(str::trim).collect();
        let mut pos = 0usize;
        let spec = Self::parse_tokens(&tokens, &mut pos, s)?;
        if pos != tokens.len() {
            return Err(Error::BadFamilySpec(s.to_string()));
        }
        Ok(spec)
    }

    fn parse_tokens(tokens: &[&str], pos: &mut usize, orig: &str) -> Result<FamilySpec> {
        let bad = || Error::BadFamilySpec(orig.to_string());
        let name = *tokens.get(*pos).ok_or_else(bad)?;
        *pos += 1;
        let int = |pos: &mut usize| -> Result<usize> {
            let t = *tokens.get(*pos).ok_or_else(bad)?;
            *pos += 1;
            t.parse().map_err(|_| bad())
        };
        match name {
            "cycle" => Ok(FamilySpec::Cycle(int(pos)?)),
            "hypercube" => Ok(FamilySpec::Hypercube(int(pos)? as u32)),
            "torus" => {
                let n = int(pos)?;
                let d = int(pos)? as u32;
                Ok(FamilySpec::Torus { n, d })
            }
            "tree" => {
                let p = int(pos)? as u32;
                let depth = int(pos)? as u32;
                Ok(FamilySpec::Tree { p, depth })
            }
            "complete" => Ok(FamilySpec::Complete(int(pos)?)),
            "product" => {
                let a = Self::parse_tokens(tokens, pos, orig)?;
                let b = Self::parse_tokens(tokens, pos, orig)?;
                Ok(FamilySpec::Product(Box::new(a), Box::new(b)))
            }
            _ => Err(bad()),
        }
    }

    pub fn vertex_count(&self) -> usize {
        match self {
            FamilySpec::Cycle(n) | FamilySpec::Complete(n) => *n,
            FamilySpec::Hypercube(d) => 1usize << d,
            FamilySpec::Torus { n, d } => n.pow(*d),
            FamilySpec::Tree { p, depth } => {
                let (p, depth) = (*p as usize, *depth);
                let mut total = 1usize;
                let mut level = p;
                for _ in 0..depth {
                    total += level;
                    level *= p - 1;
                }
                total
            }
            FamilySpec::Product(a, b) => a.vertex_count() * b.vertex_count(),
        }
    }
}

/// Generate a named family with its canonical vertex numbering.
pub fn generate(spec: &FamilySpec) -> Result<Graph> {
    let graph = match spec {
        FamilySpec::Cycle(n) => {
            if *n < 3 {
                return Err(Error::ParameterOutOfRange(spec.to_string()));
            }
            let adj = (0..*n)
                .map(|v| {
                    let mut row = vec![((v + 1) % n) as u32, ((v + n - 1) % n) as u32];
                    row.sort_unstable();
                    row.dedup();
                    row
                })
                .collect();
            Graph::from_sorted_adjacency(adj, Some(spec.clone()))?
        }
        FamilySpec::Hypercube(d) => {
            if *d < 1 || *d > 24 {
                return Err(Error::ParameterOutOfRange(spec.to_string()));
            }
            let n = 1usize << d;
            let adj = (0..n)
                .map(|v| (0..*d).map(|b| (v ^ (1 << b)) as u32).collect::<Vec<_>>())
                .map(|mut row| {
                    row.sort_unstable();
                    row
                })
                .collect();
            Graph::from_sorted_adjacency(adj, Some(spec.clone()))?
        }
        FamilySpec::Torus { n, d } => {
            if *n < 3 || *d < 1 {
                return Err(Error::ParameterOutOfRange(spec.to_string()));
            }
            let total = n
                .checked_pow(*d)
                .filter(|&t| t <= 1 << 24)
                .ok_or_else(|| Error::ParameterOutOfRange(spec.to_string()))?;
            let mut adj = vec![Vec::new(); total];
            for (v, row) in adj.iter_mut().enumerate() {
                let mut stride = 1usize;
                for _ in 0..*d {
                    let coord = (v / stride) % n;
                    let up = v - coord * stride + ((coord + 1) % n) * stride;
                    let down = v - coord * stride + ((coord + n - 1) % n) * stride;
                    row.push(up as u32);
                    if down != up {
                        row.push(down as u32);
                    }
                    stride *= n;
                }
                row.sort_unstable();
            }
            Graph::from_sorted_adjacency(adj, Some(spec.clone()))?
        }
        FamilySpec::Tree { p, depth } => {
            if *p < 2 || *depth < 1 {
                return Err(Error::ParameterOutOfRange(spec.to_string()));
            }
            // Root has p children, every internal vertex p-1 children,
            // leaves at the given depth, BFS numbering.
            let mut adj: Vec<Vec<u32>> = vec![Vec::new()];
            let mut frontier = vec![0u32];
            for level in 0..*depth {
                let mut next = Vec::new();
                for &v in &frontier {
                    let kids = if level == 0 { *p } else { *p - 1 };
                    for _ in 0..kids {
                        let w = adj.len() as u32;
                        adj.push(Vec::new());
                        adj[v as usize].push(w);
                        adj[w as usize].push(v);
                        next.push(w);
                    }
                }
                frontier = next;
            }
            for row in &mut adj {
                row.sort_unstable();
            }
            Graph::from_sorted_adjacency(adj, Some(spec.clone()))?
        }
        FamilySpec::Complete(n) => {
            if *n < 2 {
                return Err(Error::ParameterOutOfRange(spec.to_string()));
            }
            let adj = (0..*n)
                .map(|v| (0..*n).filter(|&w| w != v).map(|w| w as u32).collect())
                .collect();
            Graph::from_sorted_adjacency(adj, Some(spec.clone()))?
        }
        FamilySpec::Product(a, b) => {
            let ga = generate(a)?;
            let gb = generate(b)?;
            cartesian_product(&ga, &gb)?
        }
    };
    if graph.vertex_count() < 2 {
        return Err(Error::ParameterOutOfRange(spec.to_string()));
    }
    Ok(graph)
}

/// Cartesian product; vertex `(a, b)` is numbered `a * |V(H)| + b`.
pub fn cartesian_product(g: &Graph, h: &Graph) -> Result<Graph> {
    let (na, nb) = (g.vertex_count(), h.vertex_count());
    let total = na
        .checked_mul(nb)
        .filter(|&t| t <= 1 << 24)
        .ok_or_else(|| Error::TooLarge(format!("product of {na} x {nb} vertices")))?;
    let mut adj = vec![Vec::new(); total];
    for a in 0..na as u32 {
        for b in 0..nb as u32 {
            let v = (a as usize * nb + b as usize) as u32;
            let row = &mut adj[v as usize];
            for &a2 in g.neighbors(a) {
                row.push(a2 * nb as u32 + b);
            }
            for &b2 in h.neighbors(b) {
                row.push(a * nb as u32 + b2);
            }
            row.sort_unstable();
        }
    }
    let family = match (g.family(), h.family()) {
        (Some(fa), Some(fb)) => Some(FamilySpec::Product(
            Box::new(fa.clone()),
            Box::new(fb.clone()),
        )),
        _ => None,
    };
    Graph::from_sorted_adjacency(adj, family)
}

/// Cartesian power `G^r` with a vertex-count guard.
pub fn cartesian_power(g: &Graph, r: u32, max_vertices: usize) -> Result<Graph> {
    if r == 0 {
        return Err(Error::ParameterOutOfRange("power 0".into()));
    }
    let n = g.vertex_count();
    let mut total = 1usize;
    for _ in 0..r {
        total = total
            .checked_mul(n)
            .filter(|&t| t <= max_vertices)
            .ok_or(Error::PowerTooLarge(n, r))?;
    }
    let mut acc = g.clone();
    for _ in 1..r {
        acc = cartesian_product(&acc, g)?;
    }
    Ok(acc)
}

/// Parse the text graph format: first line `p <n>`, then one `u v` pair per
/// line, whitespace-separated, each undirected edge listed once.
pub fn parse_graph_text(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::BadGraphFile("empty file".into()))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("p") {
        return Err(Error::BadGraphFile(format!(
            "expected header `p <n>`, got `{header}`"
        )));
    }
    let n: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::BadGraphFile(format!("bad vertex count in `{header}`")))?;
    let mut edges = Vec::new();
    for line in lines {
        let mut it = line.split_whitespace();
        let u: u32 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::BadGraphFile(format!("bad edge line `{line}`")))?;
        let v: u32 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::BadGraphFile(format!("bad edge line `{line}`")))?;
        edges.push((u, v));
    }
    Graph::build(n, &edges)
}

/// Emit the text graph format.
pub fn graph_to_text(g: &Graph) -> String {
    let mut out = format!("p {}\n", g.vertex_count());
    for (u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

/// Load a graph from a `gen:<family>` spec or a file path.
pub fn load_graph(source: &str) -> Result<Graph> {
    if let Some(spec) = source.strip_prefix("gen:") {
        generate(&FamilySpec::parse(spec)?)
    } else {
        parse_graph_text(&std::fs::read_to_string(source)?)
    }
}
