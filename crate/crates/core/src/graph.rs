//! Immutable unit-length graphs, vertex functions, and the graph document format.
//!
//! Vertices are dense integers `0..n`. Structural annotations produced by the
//! array builders travel out of band in [`Labels`]; spectral code only ever
//! sees the edge list and degrees.

use std::collections::{BTreeMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{GraphError, ParseError};

/// Version tag written into every graph document.
pub const GRAPH_DOC_VERSION: u32 = 1;

/// Finite, connected, simple graph with unit-length edges.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    labels: Option<Labels>,
}

/// Whether a structural record is a genuine circle or a vertex arc of a blow-up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    Circle,
    Arc,
}

/// One circle (or vertex arc) of an array, in the order the builder created it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircleLabel {
    pub kind: RecordKind,
    /// Nesting depth; the base circle has depth 1. Arcs carry the depth of
    /// the circle they were blown up in.
    pub depth: u32,
    /// Record this one hangs off, `None` for the base circle.
    pub parent: Option<usize>,
    /// Attachment vertex shared with the parent (circles only).
    pub anchor: Option<usize>,
    /// Vertices in cyclic order (circles) or from one endpoint to the other (arcs).
    /// For circles, `vertices[0]` is the anchor when one exists.
    pub vertices: Vec<usize>,
    /// Blow-up this arc belongs to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blowup: Option<usize>,
    /// Depth budget `m_i` carried by an arc.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<u32>,
}

/// A blown-up vertex: `arcs` share the two endpoints and have disjoint interiors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlowupLabel {
    /// Record (circle) whose vertex was blown up.
    pub circle: usize,
    pub endpoints: [usize; 2],
    /// Depth budget of the circle at the time of the blow-up.
    pub budget: u32,
    /// Indices into [`Labels::circles`] of the arc records.
    pub arcs: Vec<usize>,
}

/// Per-vertex annotation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexLabel {
    /// Record that introduced this vertex.
    pub circle: usize,
    pub depth: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blowup: Option<usize>,
}

/// Structural description of an array of circles, as realized on vertex ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labels {
    pub vertices: Vec<VertexLabel>,
    pub circles: Vec<CircleLabel>,
    #[serde(default)]
    pub blowups: Vec<BlowupLabel>,
    /// Depth budget of the whole description.
    pub depth: u32,
}

impl Labels {
    /// Records whose parent is `record`.
    pub fn children_of(&self, record: usize) -> impl Iterator<Item = usize> + '_ {
        self.circles
            .iter()
            .enumerate()
            .filter(move |(_, c)| c.parent == Some(record))
            .map(|(i, _)| i)
    }

    /// Record indices of the subtree rooted at `record`, including itself.
    pub fn subtree(&self, record: usize) -> Vec<usize> {
        let mut kids: Vec<Vec<usize>> = vec![Vec::new(); self.circles.len()];
        for (i, c) in self.circles.iter().enumerate() {
            if let Some(p) = c.parent {
                kids[p].push(i);
            }
        }
        let mut out = vec![record];
        let mut i = 0;
        while i < out.len() {
            out.extend_from_slice(&kids[out[i]]);
            i += 1;
        }
        out
    }

    /// Edge count contributed by a record: a circle of length L has L edges,
    /// an arc with `vertices.len() = L + 1` has L edges.
    pub fn record_edges(&self, record: usize) -> usize {
        let c = &self.circles[record];
        match c.kind {
            RecordKind::Circle => c.vertices.len(),
            RecordKind::Arc => c.vertices.len() - 1,
        }
    }

    pub fn subtree_volume(&self, record: usize) -> usize {
        self.subtree(record).into_iter().map(|r| self.record_edges(r)).sum()
    }

    /// Vertices introduced by the records of the subtree rooted at `record`.
    pub fn subtree_vertices(&self, record: usize) -> Vec<usize> {
        let members: HashSet<usize> = self.subtree(record).into_iter().collect();
        self.vertices
            .iter()
            .enumerate()
            .filter(|(_, l)| members.contains(&l.circle))
            .map(|(v, _)| v)
            .collect()
    }
}

impl Graph {
    /// Validates and builds a graph. Edges are stored normalized `(min, max)`
    /// and sorted lexicographically.
    pub fn new(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if vertex_count == 0 {
            return Err(GraphError::Empty);
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut normalized = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= vertex_count || v >= vertex_count {
                return Err(GraphError::InvalidEdge {
                    u,
                    v,
                    reason: "endpoint out of range",
                });
            }
            if u == v {
                return Err(GraphError::InvalidEdge {
                    u,
                    v,
                    reason: "self-loop",
                });
            }
            let e = (u.min(v), u.max(v));
            if !seen.insert(e) {
                return Err(GraphError::InvalidEdge {
                    u,
                    v,
                    reason: "duplicate edge",
                });
            }
            normalized.push(e);
        }
        normalized.sort_unstable();
        let mut adjacency = vec![Vec::new(); vertex_count];
        for &(u, v) in &normalized {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let reached = reachable_count(&adjacency);
        if reached != vertex_count {
            return Err(GraphError::Disconnected {
                reached,
                vertex_count,
            });
        }
        Ok(Self {
            vertex_count,
            edges: normalized,
            adjacency,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Labels) -> Result<Self, GraphError> {
        if labels.vertices.len() != self.vertex_count {
            return Err(GraphError::BadLabels(format!(
                "{} vertex labels for {} vertices",
                labels.vertices.len(),
                self.vertex_count
            )));
        }
        let records = labels.circles.len();
        for c in &labels.circles {
            if c.parent.is_some_and(|p| p >= records)
                || c.vertices.iter().any(|&v| v >= self.vertex_count)
                || c.anchor.is_some_and(|a| a >= self.vertex_count)
                || c.blowup.is_some_and(|b| b >= labels.blowups.len())
            {
                return Err(GraphError::BadLabels("record index out of range".into()));
            }
        }
        if labels.vertices.iter().any(|l| l.circle >= records) {
            return Err(GraphError::BadLabels("vertex owner out of range".into()));
        }
        for b in &labels.blowups {
            if b.circle >= records
                || b.arcs.iter().any(|&a| a >= records)
                || b.endpoints.iter().any(|&v| v >= self.vertex_count)
            {
                return Err(GraphError::BadLabels("blow-up index out of range".into()));
            }
        }
        // Parent links must form a forest; anything cyclic would hang subtree walks.
        for start in 0..records {
            let mut cur = labels.circles[start].parent;
            let mut steps = 0;
            while let Some(p) = cur {
                steps += 1;
                if steps > records {
                    return Err(GraphError::BadLabels("cyclic parent links".into()));
                }
                cur = labels.circles[p].parent;
            }
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Sorted, normalized edge list.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    /// Volume of the graph: its number of edges.
    pub fn volume(&self) -> usize {
        self.edges.len()
    }

    pub fn labels(&self) -> Option<&Labels> {
        self.labels.as_ref()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency
            .get(u)
            .is_some_and(|n| n.binary_search(&v).is_ok())
    }

    /// Serializes to the canonical graph document (pretty JSON, sorted keys).
    pub fn to_document(&self) -> String {
        let doc = GraphDocument {
            version: GRAPH_DOC_VERSION,
            vertex_count: self.vertex_count,
            edges: self.edges.iter().map(|&(u, v)| [u, v]).collect(),
            labels: self.labels.clone(),
        };
        crate::report::to_sorted_json(&doc)
    }

    /// Parses a graph document, re-validating everything.
    pub fn from_document(text: &str) -> Result<Self, ParseError> {
        let doc: GraphDocument = serde_json::from_str(text).map_err(ParseError::from_json)?;
        if doc.version != GRAPH_DOC_VERSION {
            return Err(ParseError::field(
                "version",
                format!("unsupported version {}", doc.version),
            ));
        }
        let edges: Vec<(usize, usize)> = doc.edges.iter().map(|e| (e[0], e[1])).collect();
        let g = Graph::new(doc.vertex_count, &edges)
            .map_err(|e| ParseError::field("edges", e.to_string()))?;
        match doc.labels {
            Some(l) => g
                .with_labels(l)
                .map_err(|e| ParseError::field("labels", e.to_string())),
            None => Ok(g),
        }
    }

    /// Hex SHA-256 of the unlabeled canonical document; identifies the graph
    /// structure in result documents.
    pub fn hash(&self) -> String {
        let doc = GraphDocument {
            version: GRAPH_DOC_VERSION,
            vertex_count: self.vertex_count,
            edges: self.edges.iter().map(|&(u, v)| [u, v]).collect(),
            labels: None,
        };
        let bytes = serde_json::to_vec(&doc).expect("graph document serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

fn reachable_count(adjacency: &[Vec<usize>]) -> usize {
    let mut seen = vec![false; adjacency.len()];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &w in &adjacency[u] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                queue.push_back(w);
            }
        }
    }
    count
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDocument {
    version: u32,
    vertex_count: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default)]
    labels: Option<Labels>,
}

/// Real-valued function on the vertices of a graph.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexFunction {
    values: Vec<f64>,
}

impl VertexFunction {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
        }
    }

    /// Checks the function lives on `g`.
    pub fn on(values: Vec<f64>, g: &Graph) -> Result<Self, GraphError> {
        if values.len() != g.vertex_count() {
            return Err(GraphError::LengthMismatch {
                expected: g.vertex_count(),
                got: values.len(),
            });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        crate::numeric::sum(&self.values)
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.values.len() as f64
    }

    pub fn norm_sq(&self) -> f64 {
        crate::numeric::dot(&self.values, &self.values)
    }

    /// Membership in the zero-mean subspace, with tolerance `tol * n`.
    pub fn is_zero_mean(&self, tol: f64) -> bool {
        self.sum().abs() <= tol * self.values.len().max(1) as f64
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&x| x == 0.0)
    }

    /// Vertices where the function is nonzero.
    pub fn support(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Edges on which the function is not constant.
    pub fn derivative_support(&self, g: &Graph) -> Vec<(usize, usize)> {
        g.edges()
            .iter()
            .copied()
            .filter(|&(u, v)| self.values[u] != self.values[v])
            .collect()
    }

    /// Subtracts the mean in place.
    pub fn center(&mut self) {
        let m = self.mean();
        for x in &mut self.values {
            *x -= m;
        }
    }
}

/// Degree histogram, handy for reports.
pub fn degree_histogram(g: &Graph) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for d in g.degrees() {
        *h.entry(d).or_insert(0) += 1;
    }
    h
}

/// The circle `C_k` on vertices `0..k`.
pub fn circle(k: usize) -> Result<Graph, GraphError> {
    let edges: Vec<_> = (0..k).map(|i| (i, (i + 1) % k)).collect();
    Graph::new(k, &edges)
}
