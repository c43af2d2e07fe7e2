//! Collapse of a generalized array onto an array of circles.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::arrays::{arc_component, arc_mass};
use crate::error::BoundsError;
use crate::graph::{CircleLabel, Graph, Labels, RecordKind, VertexFunction, VertexLabel};
use crate::numeric::{dot, sum};
use crate::spectral::QuadraticForm;

/// Energy contraction factor of the pullback.
pub const ENERGY_FACTOR: f64 = 4.0 / 3.0;

#[derive(Clone, Debug, PartialEq)]
pub struct CollapseResult {
    /// The collapsed array of circles.
    pub h: Graph,
    /// Vertex map `G -> H`.
    pub psi: Vec<usize>,
    pub volume_ratio: f64,
    /// Depth budget of the source array.
    pub budget: u32,
    /// Arc record kept at each surviving blow-up.
    pub kept_arcs: Vec<usize>,
    /// Blow-ups swallowed by a collapsed component.
    pub erased_blowups: Vec<usize>,
}

impl CollapseResult {
    /// `h^(1-h)`, the guaranteed floor of the volume ratio.
    pub fn volume_floor(&self) -> f64 {
        let h = self.budget.max(1) as f64;
        h.powf(1.0 - h)
    }

    pub fn volume_ok(&self) -> bool {
        self.volume_ratio >= self.volume_floor()
    }

    /// `f o psi`.
    pub fn pull_back(&self, f: &VertexFunction) -> VertexFunction {
        VertexFunction::new(self.psi.iter().map(|&w| f.values()[w]).collect())
    }
}

/// Keeps the heaviest arc of every blow-up (lowest index on ties) and
/// collapses the component of every other arc, together with the second
/// endpoint, onto the first endpoint. Blow-ups are handled from the base
/// outward; those inside a collapsed component disappear with it.
pub fn collapse(g: &Graph) -> Result<CollapseResult, BoundsError> {
    let labels = g.labels().ok_or(BoundsError::NotGeneralized)?;
    let n = g.vertex_count();
    let mut rep: Vec<usize> = (0..n).collect();
    let mut dead_record = vec![false; labels.circles.len()];

    let mut order: Vec<usize> = (0..labels.blowups.len()).collect();
    order.sort_by_key(|&b| (labels.circles[labels.blowups[b].circle].depth, b));
    let mut kept_arcs = Vec::new();
    let mut erased_blowups = Vec::new();
    for b in order {
        let blowup = &labels.blowups[b];
        let [v1, v2] = blowup.endpoints;
        if rep[v1] != v1 || dead_record[blowup.circle] {
            erased_blowups.push(b);
            continue;
        }
        let mut best: Option<(usize, usize)> = None;
        for &arc in &blowup.arcs {
            let m = arc_mass(g, arc)?;
            if best.is_none_or(|(_, bm)| m > bm) {
                best = Some((arc, m));
            }
        }
        let (keep, _) = best.ok_or(BoundsError::NotGeneralized)?;
        let keep_len = labels.circles[keep].vertices.len() - 1;
        if keep_len < 3 {
            return Err(BoundsError::DegenerateCircle(keep_len));
        }
        kept_arcs.push(keep);
        rep[v2] = v1;
        for &arc in &blowup.arcs {
            if arc == keep {
                continue;
            }
            for v in arc_component(g, arc)? {
                rep[v] = v1;
            }
            for r in labels.subtree(arc) {
                dead_record[r] = true;
            }
        }
    }
    let root = |mut v: usize| {
        while rep[v] != v {
            v = rep[v];
        }
        v
    };
    let mut new_id = vec![usize::MAX; n];
    let mut m = 0;
    for v in 0..n {
        if rep[v] == v {
            new_id[v] = m;
            m += 1;
        }
    }
    let psi: Vec<usize> = (0..n).map(|v| new_id[root(v)]).collect();

    let mut edges = BTreeSet::new();
    for &(u, v) in g.edges() {
        let (a, b) = (psi[u], psi[v]);
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let edges: Vec<_> = edges.into_iter().collect();
    let h_labels = collapsed_labels(labels, &psi, &new_id, &dead_record, &kept_arcs);
    let h = Graph::new(m, &edges)?.with_labels(h_labels)?;
    Ok(CollapseResult {
        volume_ratio: h.volume() as f64 / g.volume() as f64,
        h,
        psi,
        budget: labels.depth,
        kept_arcs,
        erased_blowups,
    })
}

fn collapsed_labels(
    labels: &Labels,
    psi: &[usize],
    new_id: &[usize],
    dead: &[bool],
    kept_arcs: &[usize],
) -> Labels {
    let mut record_id = vec![usize::MAX; labels.circles.len()];
    let mut circles: Vec<CircleLabel> = Vec::new();
    for (i, c) in labels.circles.iter().enumerate() {
        if dead[i] || (c.kind == RecordKind::Arc && !kept_arcs.contains(&i)) {
            continue;
        }
        record_id[i] = circles.len();
        let (vertices, anchor) = match c.kind {
            RecordKind::Circle => {
                let mut vs: Vec<usize> = Vec::with_capacity(c.vertices.len());
                for &v in &c.vertices {
                    let w = psi[v];
                    if vs.last() != Some(&w) {
                        vs.push(w);
                    }
                }
                if vs.len() > 1 && vs.first() == vs.last() {
                    vs.pop();
                }
                (vs, c.anchor.map(|a| psi[a]))
            }
            RecordKind::Arc => {
                let vs: Vec<usize> = c.vertices[..c.vertices.len() - 1].iter().map(|&v| psi[v]).collect();
                let anchor = vs[0];
                (vs, Some(anchor))
            }
        };
        circles.push(CircleLabel {
            kind: RecordKind::Circle,
            depth: 0,
            parent: c.parent.map(|p| record_id[p]),
            anchor,
            vertices,
            blowup: None,
            weight: None,
        });
    }
    // Parents precede children, so one forward pass fixes the depths.
    for i in 0..circles.len() {
        circles[i].depth = match circles[i].parent {
            Some(p) => circles[p].depth + 1,
            None => 1,
        };
    }
    let mut vertices = vec![
        VertexLabel {
            circle: 0,
            depth: 0,
            blowup: None,
        };
        psi.iter().copied().max().map_or(0, |x| x + 1)
    ];
    for (v, l) in labels.vertices.iter().enumerate() {
        if new_id[v] != usize::MAX {
            let owner = record_id[l.circle];
            vertices[new_id[v]] = VertexLabel {
                circle: owner,
                depth: circles[owner].depth,
                blowup: None,
            };
        }
    }
    let depth = circles.iter().map(|c| c.depth).max().unwrap_or(1);
    Labels {
        vertices,
        circles,
        blowups: Vec::new(),
        depth,
    }
}

/// Outcome of comparing energies and norms of a function on `H` and its
/// pullback to `G`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PullbackCheck {
    /// `Q_G(f o psi)`.
    pub lhs: f64,
    /// `(4/3) Q_H(f)`.
    pub rhs: f64,
    pub energy_ok: bool,
    /// `sum_G (f o psi - mean)^2 >= sum_H f^2`.
    pub recentered_norm_ok: bool,
}

impl PullbackCheck {
    pub fn ok(&self) -> bool {
        self.energy_ok && self.recentered_norm_ok
    }
}

/// Checks the pullback inequalities for a zero-mean `f` on `H`.
pub fn pullback_energy_check(
    g: &Graph,
    result: &CollapseResult,
    f: &VertexFunction,
) -> Result<PullbackCheck, BoundsError> {
    let qg = QuadraticForm::new(g);
    let qh = QuadraticForm::new(&result.h);
    pullback_energy_check_with(&qg, &qh, result, f)
}

pub(crate) fn pullback_energy_check_with(
    qg: &QuadraticForm,
    qh: &QuadraticForm,
    result: &CollapseResult,
    f: &VertexFunction,
) -> Result<PullbackCheck, BoundsError> {
    if f.len() != result.h.vertex_count() {
        return Err(crate::GraphError::LengthMismatch {
            expected: result.h.vertex_count(),
            got: f.len(),
        }
        .into());
    }
    if f.is_zero() {
        return Err(BoundsError::ZeroFunction);
    }
    let norm_h = dot(f.values(), f.values());
    let s = f.sum();
    if s.abs() > 1e-9 * norm_h.sqrt() * (f.len() as f64).sqrt() {
        return Err(BoundsError::NotZeroMean(s));
    }
    let mut pulled = result.pull_back(f).into_values();
    let lhs = qg.energy(&pulled);
    let rhs = ENERGY_FACTOR * qh.energy(f.values());
    let mean = sum(&pulled) / pulled.len() as f64;
    pulled.iter_mut().for_each(|x| *x -= mean);
    let norm_g = dot(&pulled, &pulled);
    Ok(PullbackCheck {
        lhs,
        rhs,
        energy_ok: lhs <= rhs + 1e-12 * rhs.max(1.0),
        recentered_norm_ok: norm_g >= norm_h - 1e-12 * norm_h,
    })
}
