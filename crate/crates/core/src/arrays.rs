//! Builders for arrays of circles, generalized arrays with blown-up vertices,
//! and step-homogeneous (optimal) arrays.
//!
//! Builders allocate vertex ids depth-first: the base circle first, then each
//! attachment in ascending vertex order, recursively. An attached array shares
//! exactly one vertex with its parent: its own base vertex 0.

use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DescError, ParseError};
use crate::graph::{BlowupLabel, CircleLabel, Graph, Labels, RecordKind, VertexLabel};

/// Default cap on the edge count of any graph built from a description.
pub const DEFAULT_SIZE_CAP: u128 = 1_000_000;

/// Smallest admissible circle length (simple graphs only).
pub const MIN_CIRCLE_LENGTH: usize = 3;

/// Recursive description of an array of circles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayDesc {
    pub base_length: usize,
    /// Base-circle vertex index -> array attached there.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub children: BTreeMap<usize, ArrayDesc>,
}

impl ArrayDesc {
    pub fn circle(length: usize) -> Self {
        Self {
            base_length: length,
            children: BTreeMap::new(),
        }
    }

    /// Circle of `length` with `child` attached at every vertex.
    pub fn uniform(length: usize, child: &ArrayDesc) -> Self {
        Self {
            base_length: length,
            children: (0..length).map(|i| (i, child.clone())).collect(),
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.children.values().map(ArrayDesc::depth).max().unwrap_or(0)
    }

    /// Sum of all circle lengths, i.e. the edge count of the realized graph.
    pub fn volume(&self) -> u128 {
        self.base_length as u128 + self.children.values().map(ArrayDesc::volume).sum::<u128>()
    }

    pub fn validate(&self) -> Result<(), DescError> {
        if self.base_length < MIN_CIRCLE_LENGTH {
            return Err(DescError::InvalidDesc(format!(
                "circle length {} below {MIN_CIRCLE_LENGTH}",
                self.base_length
            )));
        }
        if let Some((&i, _)) = self.children.range(self.base_length..).next() {
            return Err(DescError::InvalidDesc(format!(
                "child index {i} outside circle of length {}",
                self.base_length
            )));
        }
        self.children.values().try_for_each(ArrayDesc::validate)
    }

    /// Every circle length, depth-first.
    pub fn circle_lengths(&self) -> Vec<usize> {
        let mut out = vec![self.base_length];
        for c in self.children.values() {
            out.extend(c.circle_lengths());
        }
        out
    }
}

/// Depth-per-level lengths of a step-homogeneous array in which every vertex
/// of a depth-`j` circle carries one depth-`j+1` circle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepHomogeneousDesc {
    pub lengths: Vec<usize>,
}

impl StepHomogeneousDesc {
    /// Lengths `k^(2^(j-1))` for `j = 1..=h`. Fails if a length overflows.
    pub fn optimal(k: usize, h: usize) -> Result<Self, DescError> {
        if k < MIN_CIRCLE_LENGTH || h == 0 {
            return Err(DescError::InvalidDesc(format!(
                "optimal array needs k >= 3 and h >= 1, got k={k}, h={h}"
            )));
        }
        let mut lengths = Vec::with_capacity(h);
        let mut len = k as u128;
        for j in 0..h {
            if j > 0 {
                len = len.checked_mul(len).ok_or(DescError::SizeCap {
                    volume: u128::MAX,
                    cap: DEFAULT_SIZE_CAP,
                })?;
            }
            let l = usize::try_from(len).map_err(|_| DescError::SizeCap {
                volume: len,
                cap: DEFAULT_SIZE_CAP,
            })?;
            lengths.push(l);
        }
        Ok(Self { lengths })
    }

    pub fn depth(&self) -> usize {
        self.lengths.len()
    }

    /// True iff the lengths are `k^(2^(j-1))` for some `k >= 3`.
    pub fn is_optimal(&self) -> bool {
        let Some(&k) = self.lengths.first() else {
            return false;
        };
        k >= MIN_CIRCLE_LENGTH
            && StepHomogeneousDesc::optimal(k, self.depth()).is_ok_and(|o| o == *self)
    }

    /// Number of circles at each depth.
    pub fn circle_counts(&self) -> Option<Vec<u128>> {
        let mut counts = Vec::with_capacity(self.lengths.len());
        let mut n: u128 = 1;
        for j in 0..self.lengths.len() {
            if j > 0 {
                n = n.checked_mul(self.lengths[j - 1] as u128)?;
            }
            counts.push(n);
        }
        Some(counts)
    }

    /// Edge count, `None` on overflow.
    pub fn volume(&self) -> Option<u128> {
        let counts = self.circle_counts()?;
        counts
            .iter()
            .zip(&self.lengths)
            .try_fold(0u128, |acc, (&c, &l)| acc.checked_add(c.checked_mul(l as u128)?))
    }

    pub fn validate(&self) -> Result<(), DescError> {
        if self.lengths.is_empty() {
            return Err(DescError::InvalidDesc("empty length list".into()));
        }
        if let Some(&l) = self.lengths.iter().find(|&&l| l < MIN_CIRCLE_LENGTH) {
            return Err(DescError::InvalidDesc(format!("circle length {l} below 3")));
        }
        Ok(())
    }

    pub fn to_array_desc(&self) -> ArrayDesc {
        let mut desc = ArrayDesc::circle(*self.lengths.last().expect("nonempty"));
        for &l in self.lengths.iter().rev().skip(1) {
            desc = ArrayDesc::uniform(l, &desc);
        }
        desc
    }
}

/// Recursive description of a generalized array of circles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenArrayDesc {
    /// Depth budget `h`: the array has depth at most `h`.
    pub depth: u32,
    pub base_length: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub actions: BTreeMap<usize, VertexAction>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexAction {
    Attach(GenArrayDesc),
    BlowUp(Vec<VertexArc>),
}

/// One vertex arc of a blow-up.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexArc {
    /// Edge count of the arc between the two shared endpoints.
    pub length: usize,
    /// Depth budget `m_i`.
    pub weight: u32,
    /// Interior vertex index (`1..length`) -> array of depth at most `weight - 1`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub children: BTreeMap<usize, GenArrayDesc>,
}

impl GenArrayDesc {
    pub fn circle(length: usize) -> Self {
        Self {
            depth: 1,
            base_length: length,
            actions: BTreeMap::new(),
        }
    }

    /// Plain arrays are generalized arrays with no blow-ups.
    pub fn from_array(desc: &ArrayDesc) -> Self {
        Self {
            depth: desc.depth() as u32,
            base_length: desc.base_length,
            actions: desc
                .children
                .iter()
                .map(|(&i, c)| (i, VertexAction::Attach(GenArrayDesc::from_array(c))))
                .collect(),
        }
    }

    /// Smallest `h` for which this description is of depth at most `h`.
    pub fn structural_depth(&self) -> u32 {
        let mut d = 1;
        for action in self.actions.values() {
            match action {
                VertexAction::Attach(c) => d = d.max(1 + c.structural_depth()),
                VertexAction::BlowUp(arcs) => {
                    let need: u32 = arcs
                        .iter()
                        .map(|a| {
                            1 + a
                                .children
                                .values()
                                .map(GenArrayDesc::structural_depth)
                                .max()
                                .unwrap_or(0)
                        })
                        .sum();
                    d = d.max(need);
                }
            }
        }
        d
    }

    pub fn volume(&self) -> u128 {
        let mut v = self.base_length as u128;
        for action in self.actions.values() {
            match action {
                VertexAction::Attach(c) => v += c.volume(),
                VertexAction::BlowUp(arcs) => {
                    for a in arcs {
                        v += a.length as u128;
                        v += a.children.values().map(GenArrayDesc::volume).sum::<u128>();
                    }
                }
            }
        }
        v
    }

    pub fn has_blowups(&self) -> bool {
        self.actions.values().any(|a| match a {
            VertexAction::Attach(c) => c.has_blowups(),
            VertexAction::BlowUp(_) => true,
        })
    }

    /// Checks lengths and every depth-budget constraint; `anchored` forbids
    /// blowing up vertex 0, which is shared with the parent.
    fn validate_inner(&self, anchored: bool) -> Result<(), DescError> {
        let bad = |m: String| Err(DescError::InvalidDesc(m));
        if self.depth == 0 {
            return bad("depth budget must be at least 1".into());
        }
        if self.base_length < MIN_CIRCLE_LENGTH {
            return bad(format!("circle length {} below 3", self.base_length));
        }
        for (&i, action) in &self.actions {
            if i >= self.base_length {
                return bad(format!("vertex index {i} outside circle of length {}", self.base_length));
            }
            match action {
                VertexAction::Attach(c) => {
                    if c.depth + 1 > self.depth {
                        return bad(format!(
                            "attached array of depth {} under budget {}",
                            c.depth, self.depth
                        ));
                    }
                    c.validate_inner(true)?;
                }
                VertexAction::BlowUp(arcs) => {
                    if anchored && i == 0 {
                        return bad("cannot blow up the attaching vertex".into());
                    }
                    let s = arcs.len() as u32;
                    if s < 2 || s > self.depth {
                        return bad(format!(
                            "blow-up with {s} arcs violates 2 <= s <= h = {}",
                            self.depth
                        ));
                    }
                    let total: u32 = arcs.iter().map(|a| a.weight).sum();
                    if total > self.depth {
                        return bad(format!(
                            "arc weights sum to {total} > h = {}",
                            self.depth
                        ));
                    }
                    if arcs.iter().filter(|a| a.length == 1).count() > 1 {
                        return bad("two arcs of length 1 would be parallel edges".into());
                    }
                    for a in arcs {
                        if a.length == 0 || a.weight == 0 {
                            return bad("arc length and weight must be at least 1".into());
                        }
                        for (&j, c) in &a.children {
                            if j == 0 || j >= a.length {
                                return bad(format!(
                                    "arc child index {j} is not interior to an arc of length {}",
                                    a.length
                                ));
                            }
                            if c.depth + 1 > a.weight {
                                return bad(format!(
                                    "arc child of depth {} under arc weight {}",
                                    c.depth, a.weight
                                ));
                            }
                            c.validate_inner(true)?;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), DescError> {
        self.validate_inner(false)
    }
}

/// Accumulates vertices, edges and structural records.
#[derive(Default)]
struct Builder {
    n: usize,
    edges: Vec<(usize, usize)>,
    vertices: Vec<VertexLabel>,
    circles: Vec<CircleLabel>,
    blowups: Vec<BlowupLabel>,
}

impl Builder {
    fn new_vertex(&mut self, owner: usize, depth: u32) -> usize {
        let v = self.n;
        self.n += 1;
        self.vertices.push(VertexLabel {
            circle: owner,
            depth,
            blowup: None,
        });
        v
    }

    fn push_record(&mut self, kind: RecordKind, depth: u32, parent: Option<usize>, anchor: Option<usize>) -> usize {
        self.circles.push(CircleLabel {
            kind,
            depth,
            parent,
            anchor,
            vertices: Vec::new(),
            blowup: None,
            weight: None,
        });
        self.circles.len() - 1
    }

    fn add_array(&mut self, desc: &ArrayDesc, anchor: Option<usize>, parent: Option<usize>, depth: u32) {
        let rec = self.push_record(RecordKind::Circle, depth, parent, anchor);
        let mut verts = Vec::with_capacity(desc.base_length);
        for i in 0..desc.base_length {
            match (i, anchor) {
                (0, Some(a)) => verts.push(a),
                _ => verts.push(self.new_vertex(rec, depth)),
            }
        }
        for i in 0..verts.len() {
            self.edges.push((verts[i], verts[(i + 1) % verts.len()]));
        }
        self.circles[rec].vertices = verts.clone();
        for (&i, child) in &desc.children {
            self.add_array(child, Some(verts[i]), Some(rec), depth + 1);
        }
    }

    fn add_generalized(&mut self, desc: &GenArrayDesc, anchor: Option<usize>, parent: Option<usize>, depth: u32) {
        let rec = self.push_record(RecordKind::Circle, depth, parent, anchor);
        // (entry, exit) per base position; they differ only at blown-up vertices.
        let mut ports = Vec::with_capacity(desc.base_length);
        let mut cyclic = Vec::with_capacity(desc.base_length + desc.actions.len());
        for i in 0..desc.base_length {
            let blown = matches!(desc.actions.get(&i), Some(VertexAction::BlowUp(_)));
            if blown {
                let v1 = self.new_vertex(rec, depth);
                let v2 = self.new_vertex(rec, depth);
                ports.push((v1, v2));
                cyclic.extend([v1, v2]);
            } else {
                let v = match (i, anchor) {
                    (0, Some(a)) => a,
                    _ => self.new_vertex(rec, depth),
                };
                ports.push((v, v));
                cyclic.push(v);
            }
        }
        for i in 0..ports.len() {
            self.edges.push((ports[i].1, ports[(i + 1) % ports.len()].0));
        }
        self.circles[rec].vertices = cyclic;
        for (&i, action) in &desc.actions {
            match action {
                VertexAction::Attach(child) => {
                    self.add_generalized(child, Some(ports[i].0), Some(rec), depth + 1);
                }
                VertexAction::BlowUp(arcs) => {
                    let (v1, v2) = ports[i];
                    let id = self.blowups.len();
                    self.vertices[v1].blowup = Some(id);
                    self.vertices[v2].blowup = Some(id);
                    self.blowups.push(BlowupLabel {
                        circle: rec,
                        endpoints: [v1, v2],
                        budget: desc.depth,
                        arcs: Vec::with_capacity(arcs.len()),
                    });
                    for arc in arcs {
                        let arc_rec = self.push_record(RecordKind::Arc, depth, Some(rec), None);
                        self.circles[arc_rec].blowup = Some(id);
                        self.circles[arc_rec].weight = Some(arc.weight);
                        self.blowups[id].arcs.push(arc_rec);
                        let mut path = Vec::with_capacity(arc.length + 1);
                        path.push(v1);
                        for _ in 1..arc.length {
                            path.push(self.new_vertex(arc_rec, depth));
                        }
                        path.push(v2);
                        for w in path.windows(2) {
                            self.edges.push((w[0], w[1]));
                        }
                        self.circles[arc_rec].vertices = path.clone();
                        for (&j, child) in &arc.children {
                            self.add_generalized(child, Some(path[j]), Some(arc_rec), depth + 1);
                        }
                    }
                }
            }
        }
    }

    fn finish(self, depth: u32) -> Result<Graph, DescError> {
        let labels = Labels {
            vertices: self.vertices,
            circles: self.circles,
            blowups: self.blowups,
            depth,
        };
        Ok(Graph::new(self.n, &self.edges)?.with_labels(labels)?)
    }
}

fn check_cap(volume: u128, cap: u128) -> Result<(), DescError> {
    if volume > cap {
        Err(DescError::SizeCap { volume, cap })
    } else {
        Ok(())
    }
}

/// Realizes an array of circles, labeled with its circle structure.
pub fn build_array(desc: &ArrayDesc) -> Result<Graph, DescError> {
    build_array_capped(desc, DEFAULT_SIZE_CAP)
}

pub fn build_array_capped(desc: &ArrayDesc, cap: u128) -> Result<Graph, DescError> {
    desc.validate()?;
    check_cap(desc.volume(), cap)?;
    let mut b = Builder::default();
    b.add_array(desc, None, None, 1);
    b.finish(desc.depth() as u32)
}

/// Optimal step-homogeneous array: depth-`j` circles have length `k^(2^(j-1))`.
pub fn build_optimal(k: usize, h: usize) -> Result<Graph, DescError> {
    build_optimal_capped(k, h, DEFAULT_SIZE_CAP)
}

pub fn build_optimal_capped(k: usize, h: usize, cap: u128) -> Result<Graph, DescError> {
    build_step_homogeneous(&StepHomogeneousDesc::optimal(k, h)?, cap)
}

pub fn build_step_homogeneous(desc: &StepHomogeneousDesc, cap: u128) -> Result<Graph, DescError> {
    desc.validate()?;
    let volume = desc.volume().unwrap_or(u128::MAX);
    check_cap(volume, cap)?;
    build_array_capped(&desc.to_array_desc(), cap)
}

/// Realizes a generalized array. At a blown-up vertex the previous base
/// neighbor joins the lower-numbered endpoint and the next one the higher.
pub fn build_generalized(desc: &GenArrayDesc) -> Result<Graph, DescError> {
    build_generalized_capped(desc, DEFAULT_SIZE_CAP)
}

pub fn build_generalized_capped(desc: &GenArrayDesc, cap: u128) -> Result<Graph, DescError> {
    desc.validate()?;
    check_cap(desc.volume(), cap)?;
    let mut b = Builder::default();
    b.add_generalized(desc, None, None, 1);
    b.finish(desc.depth)
}

/// Structural depth recorded on a labeled graph: the deepest circle record.
pub fn graph_depth(g: &Graph) -> Result<u32, DescError> {
    let labels = g.labels().ok_or(DescError::UnlabeledGraph)?;
    Ok(labels.circles.iter().map(|c| c.depth).max().unwrap_or(1))
}

/// Volume of the sub-array attached at `v` to the circle that owns `v`
/// (0 if nothing is attached there).
pub fn descendant_volume(g: &Graph, v: usize) -> Result<usize, DescError> {
    let labels = g.labels().ok_or(DescError::UnlabeledGraph)?;
    let owner = labels
        .vertices
        .get(v)
        .ok_or_else(|| DescError::InvalidDesc(format!("vertex {v} out of range")))?
        .circle;
    Ok(labels
        .children_of(owner)
        .filter(|&r| labels.circles[r].anchor == Some(v))
        .map(|r| labels.subtree_volume(r))
        .sum())
}

/// Vertex set of the component of `G - {v1, v2}` containing the interior of
/// the arc record `arc`. Empty for an arc of length one.
pub fn arc_component(g: &Graph, arc: usize) -> Result<Vec<usize>, DescError> {
    let labels = g.labels().ok_or(DescError::UnlabeledGraph)?;
    let rec = labels
        .circles
        .get(arc)
        .filter(|c| c.kind == RecordKind::Arc)
        .ok_or_else(|| DescError::InvalidDesc(format!("record {arc} is not an arc")))?;
    let (v1, v2) = (rec.vertices[0], *rec.vertices.last().expect("arc has endpoints"));
    let interior = &rec.vertices[1..rec.vertices.len() - 1];
    let Some(&start) = interior.first() else {
        return Ok(Vec::new());
    };
    let mut seen = vec![false; g.vertex_count()];
    seen[v1] = true;
    seen[v2] = true;
    seen[start] = true;
    let mut out = vec![start];
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbors(u) {
            if !seen[w] {
                seen[w] = true;
                out.push(w);
                queue.push_back(w);
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Mass of a vertex arc: edges of its component in `G - {v1, v2}` together
/// with the edges joining that component to the endpoints.
pub fn arc_mass(g: &Graph, arc: usize) -> Result<usize, DescError> {
    let comp = arc_component(g, arc)?;
    if comp.is_empty() {
        return Ok(1);
    }
    let mut inside = vec![false; g.vertex_count()];
    for &v in &comp {
        inside[v] = true;
    }
    Ok(g
        .edges()
        .iter()
        .filter(|&&(u, w)| inside[u] || inside[w])
        .count())
}

/// Seeded random array description: geometric decay of attachment
/// probability with depth, uniform circle lengths, volume within budget.
pub fn random_array_desc(seed: u64, max_depth: usize, max_length: usize, volume_budget: usize) -> ArrayDesc {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_length = max_length.max(MIN_CIRCLE_LENGTH);
    let mut remaining = volume_budget.max(MIN_CIRCLE_LENGTH);
    random_array_level(&mut rng, max_depth.max(1), 1, max_length, &mut remaining)
}

const ATTACH_PROBABILITY: f64 = 0.6;
const ATTACH_DECAY: f64 = 0.7;

fn random_array_level(
    rng: &mut ChaCha8Rng,
    depth_left: usize,
    level: i32,
    max_length: usize,
    remaining: &mut usize,
) -> ArrayDesc {
    let hi = max_length.min(*remaining).max(MIN_CIRCLE_LENGTH);
    let len = rng.random_range(MIN_CIRCLE_LENGTH..=hi);
    *remaining = remaining.saturating_sub(len);
    let mut desc = ArrayDesc::circle(len);
    if depth_left > 1 {
        let p = ATTACH_PROBABILITY * ATTACH_DECAY.powi(level - 1);
        for i in 0..len {
            if *remaining >= MIN_CIRCLE_LENGTH && rng.random_bool(p) {
                let child = random_array_level(rng, depth_left - 1, level + 1, max_length, remaining);
                desc.children.insert(i, child);
            }
        }
    }
    desc
}

/// Seeded random generalized array with depth budget in `[2, max_depth]`
/// (or 1 when `max_depth == 1`). Arcs have length at least 3 so the collapse
/// map always produces simple circles.
pub fn random_gen_desc(seed: u64, max_depth: u32, max_length: usize, volume_budget: usize) -> GenArrayDesc {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_depth = max_depth.max(1);
    let budget = if max_depth == 1 {
        1
    } else {
        rng.random_range(2..=max_depth)
    };
    let max_length = max_length.max(MIN_CIRCLE_LENGTH);
    let mut remaining = volume_budget.max(MIN_CIRCLE_LENGTH);
    random_gen_level(&mut rng, budget, false, max_length, &mut remaining)
}

const BLOWUP_PROBABILITY: f64 = 0.3;

fn random_gen_level(
    rng: &mut ChaCha8Rng,
    budget: u32,
    anchored: bool,
    max_length: usize,
    remaining: &mut usize,
) -> GenArrayDesc {
    let hi = max_length.min(*remaining).max(MIN_CIRCLE_LENGTH);
    let len = rng.random_range(MIN_CIRCLE_LENGTH..=hi);
    *remaining = remaining.saturating_sub(len);
    let mut desc = GenArrayDesc {
        depth: budget,
        base_length: len,
        actions: BTreeMap::new(),
    };
    if budget < 2 {
        return desc;
    }
    for i in 0..len {
        let can_blow = !(anchored && i == 0) && *remaining >= 2 * MIN_CIRCLE_LENGTH;
        if can_blow && rng.random_bool(BLOWUP_PROBABILITY) {
            let s = rng.random_range(2..=budget).min((*remaining / MIN_CIRCLE_LENGTH) as u32);
            let mut weights = vec![1u32; s as usize];
            for _ in 0..rng.random_range(0..=budget - s) {
                let k = rng.random_range(0..weights.len());
                weights[k] += 1;
            }
            let mut arcs = Vec::with_capacity(weights.len());
            for (idx, &m) in weights.iter().enumerate() {
                // Reserve room for the arcs still to come.
                let reserve = (weights.len() - idx - 1) * MIN_CIRCLE_LENGTH;
                let room = remaining.saturating_sub(reserve).max(MIN_CIRCLE_LENGTH);
                let length = rng.random_range(MIN_CIRCLE_LENGTH..=max_length.min(room).max(MIN_CIRCLE_LENGTH));
                *remaining = remaining.saturating_sub(length);
                arcs.push(VertexArc {
                    length,
                    weight: m,
                    children: BTreeMap::new(),
                });
            }
            for arc in arcs.iter_mut().filter(|a| a.weight >= 2) {
                for j in 1..arc.length {
                    if *remaining >= MIN_CIRCLE_LENGTH && rng.random_bool(0.3) {
                        let child = random_gen_level(rng, arc.weight - 1, true, max_length, remaining);
                        arc.children.insert(j, child);
                    }
                }
            }
            desc.actions.insert(i, VertexAction::BlowUp(arcs));
        } else if *remaining >= MIN_CIRCLE_LENGTH && rng.random_bool(0.35) {
            let child = random_gen_level(rng, budget - 1, true, max_length, remaining);
            desc.actions.insert(i, VertexAction::Attach(child));
        }
    }
    desc
}

/// On-disk description document, tagged by `desc_kind`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "desc_kind", content = "desc", rename_all = "snake_case")]
pub enum DescDocument {
    Array(ArrayDesc),
    Generalized(GenArrayDesc),
    Optimal { k: usize, h: usize },
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum DescKind {
    Array,
    Generalized,
    Optimal,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDesc {
    version: u32,
    desc_kind: DescKind,
    desc: serde_json::Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OptimalParams {
    k: usize,
    h: usize,
}

impl DescDocument {
    pub fn to_document(&self) -> String {
        let mut v = serde_json::to_value(self).expect("description serializes");
        v["version"] = crate::graph::GRAPH_DOC_VERSION.into();
        crate::report::to_sorted_json(&v)
    }

    pub fn from_document(text: &str) -> Result<Self, ParseError> {
        let raw: RawDesc = serde_json::from_str(text).map_err(ParseError::from_json)?;
        if raw.version != crate::graph::GRAPH_DOC_VERSION {
            return Err(ParseError::field("version", format!("unsupported version {}", raw.version)));
        }
        let bad = |e: serde_json::Error| ParseError::field("desc", e.to_string());
        Ok(match raw.desc_kind {
            DescKind::Array => DescDocument::Array(serde_json::from_value(raw.desc).map_err(bad)?),
            DescKind::Generalized => {
                DescDocument::Generalized(serde_json::from_value(raw.desc).map_err(bad)?)
            }
            DescKind::Optimal => {
                let p: OptimalParams = serde_json::from_value(raw.desc).map_err(bad)?;
                DescDocument::Optimal { k: p.k, h: p.h }
            }
        })
    }

    pub fn build(&self, cap: u128) -> Result<Graph, DescError> {
        match self {
            DescDocument::Array(d) => build_array_capped(d, cap),
            DescDocument::Generalized(d) => build_generalized_capped(d, cap),
            DescDocument::Optimal { k, h } => build_optimal_capped(*k, *h, cap),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle_with_triangles() -> ArrayDesc {
        ArrayDesc::uniform(3, &ArrayDesc::circle(3))
    }

    #[test]
    fn circle_desc_is_depth_one_circle() {
        let g = build_array(&ArrayDesc::circle(5)).unwrap();
        assert_eq!(g.volume(), 5);
        assert!(g.degrees().iter().all(|&d| d == 2));
        assert_eq!(graph_depth(&g).unwrap(), 1);
    }

    #[test]
    fn triangle_with_three_triangles() {
        let g = build_array(&triangle_with_triangles()).unwrap();
        assert_eq!(g.volume(), 12);
        let fours = g.degrees().iter().filter(|&&d| d == 4).count();
        assert_eq!(fours, 3);
        assert_eq!(g.vertex_count(), 9);
    }

    #[test]
    fn rejects_short_circles() {
        assert!(matches!(
            build_array(&ArrayDesc::circle(2)),
            Err(DescError::InvalidDesc(_))
        ));
    }

    #[test]
    fn optimal_volumes() {
        assert_eq!(build_optimal(3, 1).unwrap().volume(), 3);
        assert_eq!(build_optimal(3, 2).unwrap().volume(), 30);
        assert_eq!(build_optimal(3, 3).unwrap().volume(), 2217);
        assert_eq!(build_optimal(4, 3).unwrap().volume(), 16452);
        assert_eq!(StepHomogeneousDesc::optimal(4, 3).unwrap().volume(), Some(16452));
    }

    #[test]
    fn optimal_size_cap() {
        assert!(matches!(
            build_optimal_capped(4, 3, 10_000),
            Err(DescError::SizeCap { volume: 16452, .. })
        ));
    }

    #[test]
    fn optimal_depth_one_equals_circle() {
        assert_eq!(build_optimal(7, 1).unwrap(), build_array(&ArrayDesc::circle(7)).unwrap());
    }

    #[test]
    fn optimality_predicate() {
        assert!(StepHomogeneousDesc { lengths: vec![3, 9, 81] }.is_optimal());
        assert!(!StepHomogeneousDesc { lengths: vec![3, 10] }.is_optimal());
        assert!(!StepHomogeneousDesc { lengths: vec![] }.is_optimal());
    }

    #[test]
    fn descendant_volume_on_optimal() {
        let g = build_optimal(3, 2).unwrap();
        for v in 0..3 {
            assert_eq!(descendant_volume(&g, v).unwrap(), 9);
        }
        // A vertex on a leaf circle carries nothing.
        assert_eq!(descendant_volume(&g, 4).unwrap(), 0);
        let plain = crate::graph::circle(5).unwrap();
        assert_eq!(descendant_volume(&plain, 0), Err(DescError::UnlabeledGraph));
    }

    fn blown_square() -> GenArrayDesc {
        let arcs = vec![
            VertexArc { length: 2, weight: 1, children: BTreeMap::new() },
            VertexArc { length: 5, weight: 1, children: BTreeMap::new() },
        ];
        GenArrayDesc {
            depth: 2,
            base_length: 4,
            actions: BTreeMap::from([(1, VertexAction::BlowUp(arcs))]),
        }
    }

    #[test]
    fn blown_up_square_edges() {
        let g = build_generalized(&blown_square()).unwrap();
        // Enumerated by hand: base positions 0, (1,2), 3, 4 with v1 = 1, v2 = 2;
        // arc of length 2 through 5, arc of length 5 through 6..=9.
        let expected = vec![
            (0, 1), (0, 4), (1, 5), (1, 6), (2, 3), (2, 5), (2, 9), (3, 4),
            (6, 7), (7, 8), (8, 9),
        ];
        assert_eq!(g.edges(), expected.as_slice());
        assert_eq!(g.volume(), 11);
        assert_eq!(blown_square().volume(), 11);
        let labels = g.labels().unwrap();
        let arcs = &labels.blowups[0].arcs;
        assert_eq!(arc_mass(&g, arcs[0]).unwrap(), 2);
        assert_eq!(arc_mass(&g, arcs[1]).unwrap(), 5);
    }

    #[test]
    fn blowup_budget_violations() {
        let arc = |len| VertexArc { length: len, weight: 1, children: BTreeMap::new() };
        let three = GenArrayDesc {
            depth: 2,
            base_length: 3,
            actions: BTreeMap::from([(0, VertexAction::BlowUp(vec![arc(3), arc(4), arc(5)]))]),
        };
        assert!(matches!(build_generalized(&three), Err(DescError::InvalidDesc(_))));
        let heavy = GenArrayDesc {
            depth: 2,
            base_length: 3,
            actions: BTreeMap::from([(
                0,
                VertexAction::BlowUp(vec![
                    VertexArc { length: 3, weight: 2, children: BTreeMap::new() },
                    arc(4),
                ]),
            )]),
        };
        assert!(matches!(build_generalized(&heavy), Err(DescError::InvalidDesc(_))));
        let parallel = GenArrayDesc {
            depth: 2,
            base_length: 3,
            actions: BTreeMap::from([(0, VertexAction::BlowUp(vec![arc(1), arc(1)]))]),
        };
        assert!(matches!(build_generalized(&parallel), Err(DescError::InvalidDesc(_))));
    }

    #[test]
    fn generalized_without_blowups_is_array() {
        let d = GenArrayDesc::circle(3);
        assert_eq!(build_generalized(&d).unwrap(), build_array(&ArrayDesc::circle(3)).unwrap());
        let a = triangle_with_triangles();
        let g = GenArrayDesc::from_array(&a);
        assert_eq!(build_generalized(&g).unwrap(), build_array(&a).unwrap());
    }

    #[test]
    fn random_desc_examples() {
        let d = random_array_desc(1, 1, 10, 100);
        assert!(d.children.is_empty());
        assert!((3..=10).contains(&d.base_length));
        let d = random_array_desc(7, 3, 9, 500);
        assert!(d.depth() <= 3 && d.volume() <= 500);
        build_array(&d).unwrap();
        assert_eq!(random_array_desc(7, 3, 9, 500), d);
    }

    #[test]
    fn desc_document_round_trip() {
        for doc in [
            DescDocument::Array(triangle_with_triangles()),
            DescDocument::Generalized(blown_square()),
            DescDocument::Optimal { k: 3, h: 2 },
        ] {
            let text = doc.to_document();
            assert_eq!(DescDocument::from_document(&text).unwrap(), doc);
        }
        assert!(DescDocument::from_document(r#"{"version":1,"desc_kind":"tree","desc":{}}"#).is_err());
    }
}
