//! Recursive test-function construction for arrays of circles.

use std::f64::consts::PI;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::{supports_adjacent, upper_bound_array};
use crate::error::BoundsError;
use crate::graph::{Graph, Labels, RecordKind, VertexFunction};
use crate::spectral::{rayleigh_with, QuadraticForm};

/// Tolerance of the sampling-point bisection.
const SAMPLE_TOL: f64 = 1e-12;
/// Grid used to bracket the sampling point inside a bin.
const SAMPLE_GRID: usize = 256;

/// Test functions certifying an upper bound on `lambda_1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// One zero-mean function.
    Single { f: Vec<f64> },
    /// Two nontrivial functions whose supports are disjoint and not joined
    /// by any edge.
    Pair { f0: Vec<f64>, f1: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub witness: Witness,
    /// `64 pi^2 / vol^(2^h / (2^h - 1))` for the whole graph.
    pub quoted_bound: f64,
    /// Rayleigh quotient of the single function, or the larger of the pair's.
    pub achieved: f64,
    pub depth: u32,
    pub volume: usize,
    /// Number of times the construction descended into a sub-array.
    pub descents: usize,
}

impl Certificate {
    pub fn holds(&self) -> bool {
        self.achieved <= self.quoted_bound
    }
}

struct Tree<'a> {
    labels: &'a Labels,
    n: usize,
    kids: Vec<Vec<usize>>,
    volume: Vec<usize>,
    height: Vec<u32>,
    owned: Vec<Vec<usize>>,
}

impl<'a> Tree<'a> {
    fn new(labels: &'a Labels, n: usize) -> Self {
        let r = labels.circles.len();
        let mut kids = vec![Vec::new(); r];
        for (i, c) in labels.circles.iter().enumerate() {
            if let Some(p) = c.parent {
                kids[p].push(i);
            }
        }
        let mut owned = vec![Vec::new(); r];
        for (v, l) in labels.vertices.iter().enumerate() {
            owned[l.circle].push(v);
        }
        let mut volume = vec![0; r];
        let mut height = vec![1; r];
        // Children are created after their parents.
        for i in (0..r).rev() {
            volume[i] += labels.record_edges(i);
            if let Some(p) = labels.circles[i].parent {
                volume[p] += volume[i];
                height[p] = height[p].max(height[i] + 1);
            }
        }
        Self {
            labels,
            n,
            kids,
            volume,
            height,
            owned,
        }
    }

    /// Child records hanging off vertex `v` of record `r`.
    fn children_at(&self, r: usize, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.kids[r]
            .iter()
            .copied()
            .filter(move |&c| self.labels.circles[c].anchor == Some(v))
    }

    fn descendant_volume(&self, r: usize, v: usize) -> usize {
        self.children_at(r, v).map(|c| self.volume[c]).sum()
    }

    fn set_subtree(&self, record: usize, value: f64, out: &mut [f64]) {
        let mut stack = vec![record];
        while let Some(r) = stack.pop() {
            for &v in &self.owned[r] {
                out[v] = value;
            }
            stack.extend_from_slice(&self.kids[r]);
        }
    }

    /// Sets `v` and everything hanging off it in record `r`.
    fn set_vertex(&self, r: usize, v: usize, value: f64, out: &mut [f64]) {
        out[v] = value;
        for c in self.children_at(r, v) {
            self.set_subtree(c, value, out);
        }
    }
}

/// `d^(2^h - 1) >= vol^(2^h - 2)`, decided exactly.
fn reaches_threshold(d: usize, vol: usize, h: u32) -> bool {
    if d == 0 {
        return false;
    }
    if h <= 16 {
        let p = 1u32 << h;
        BigUint::from(d).pow(p - 1) >= BigUint::from(vol).pow(p - 2)
    } else {
        let p = 2f64.powi(h as i32);
        (p - 1.0) * (d as f64).ln() >= (p - 2.0) * (vol as f64).ln()
    }
}

/// The circle parametrized by `t in [0, len]`, vertex `k` at `t = k`, with
/// density `eta = 1 + descendant volume` on the bin around each vertex.
struct Parametrization {
    len: usize,
    /// `eta` on bin `k`; bin 0 wraps around `t = 0`.
    eta: Vec<f64>,
    /// `int_0^t eta` at `t = 0, 1/2, 3/2, ..., len - 1/2, len`.
    knots: Vec<f64>,
    total: f64,
    split: f64,
}

impl Parametrization {
    fn new(eta: Vec<f64>) -> Self {
        let len = eta.len();
        let mut knots = Vec::with_capacity(len + 2);
        knots.push(0.0);
        knots.push(0.5 * eta[0]);
        for e in &eta[1..] {
            let last = *knots.last().expect("nonempty");
            knots.push(last + e);
        }
        let last = *knots.last().expect("nonempty");
        knots.push(last + 0.5 * eta[0]);
        let total = *knots.last().expect("nonempty");
        let mut p = Self {
            len,
            eta,
            knots,
            total,
            split: 0.0,
        };
        p.split = p.inverse(0.5 * total);
        p
    }

    /// Start, cumulative value at the start, and density of the piece holding `t`.
    fn piece(&self, t: f64) -> (f64, f64, f64) {
        if t < 0.5 {
            return (0.0, self.knots[0], self.eta[0]);
        }
        let k = ((t - 0.5).floor() as usize + 1).min(self.len);
        let start = k as f64 - 0.5;
        let eta = if k == self.len { self.eta[0] } else { self.eta[k] };
        (start, self.knots[k], eta)
    }

    fn cumulative(&self, t: f64) -> f64 {
        let (start, base, eta) = self.piece(t);
        base + eta * (t - start)
    }

    fn inverse(&self, y: f64) -> f64 {
        let k = self.knots.partition_point(|&x| x <= y).clamp(1, self.knots.len() - 1) - 1;
        let start = if k == 0 { 0.0 } else { k as f64 - 0.5 };
        let eta = if k == 0 || k == self.len { self.eta[0] } else { self.eta[k] };
        (start + (y - self.knots[k]) / eta).min(self.len as f64)
    }

    fn phase(&self, t: f64) -> f64 {
        4.0 * PI * self.cumulative(t) / self.total
    }

    /// `f_i(t)`: the sinusoid restricted to the first (`i = 0`) or second half.
    fn half(&self, i: usize, t: f64) -> f64 {
        let inside = if i == 0 { t <= self.split } else { t >= self.split };
        if inside {
            self.phase(t).sin()
        } else {
            0.0
        }
    }

    /// `int sin^2(phase)` over `[a, b]`, inside a single piece.
    fn sin2_integral(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let (_, _, eta) = self.piece(0.5 * (a + b));
        let slope = 4.0 * PI * eta / self.total;
        let (pa, pb) = (self.phase(a), self.phase(b));
        0.5 * (b - a) - ((2.0 * pb).sin() - (2.0 * pa).sin()) / (4.0 * slope)
    }

    /// Mean of `f_i^2` over bin `k` (`1 <= k < len`), which has unit length.
    fn bin_mean(&self, i: usize, k: usize) -> f64 {
        let (lo, hi) = (k as f64 - 0.5, k as f64 + 0.5);
        let (a, b) = if i == 0 {
            (lo, hi.min(self.split))
        } else {
            (lo.max(self.split), hi)
        };
        self.sin2_integral(a, b)
    }

    /// A point of bin `k` where `f_i^2` equals its bin mean, and `f_i` there.
    fn sample(&self, i: usize, k: usize) -> f64 {
        let target = self.bin_mean(i, k);
        if target <= 0.0 {
            return 0.0;
        }
        let lo = k as f64 - 0.5;
        let g = |t: f64| {
            let f = self.half(i, t);
            f * f - target
        };
        let grid: Vec<(f64, f64)> = (0..=SAMPLE_GRID)
            .map(|s| {
                let t = lo + s as f64 / SAMPLE_GRID as f64;
                (t, g(t))
            })
            .collect();
        let below = grid.iter().min_by(|a, b| a.1.total_cmp(&b.1)).expect("grid");
        let above = grid.iter().max_by(|a, b| a.1.total_cmp(&b.1)).expect("grid");
        let (mut a, mut b) = (below.0, above.0);
        if below.1 >= 0.0 || above.1 <= 0.0 {
            // f^2 is numerically flat on the bin.
            return self.half(i, if below.1.abs() < above.1.abs() { a } else { b });
        }
        while (b - a).abs() > SAMPLE_TOL {
            let mid = 0.5 * (a + b);
            if g(mid) <= 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        self.half(i, 0.5 * (a + b))
    }
}

enum Local {
    Single(Vec<f64>),
    Pair(Vec<f64>, Vec<f64>),
}

struct Builder<'a> {
    tree: Tree<'a>,
    q: QuadraticForm,
    g: &'a Graph,
    descents: usize,
}

impl Builder<'_> {
    fn build(&mut self, r: usize) -> Result<Local, BoundsError> {
        let h = self.tree.height[r];
        let vol = self.tree.volume[r];
        let circle = &self.tree.labels.circles[r].vertices;
        // Case A: descend into the heaviest sub-array reaching the threshold.
        let heavy = circle
            .iter()
            .map(|&v| (v, self.tree.descendant_volume(r, v)))
            .filter(|&(_, d)| reaches_threshold(d, vol, h))
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)));
        if let Some((v, _)) = heavy {
            let child = self
                .tree
                .children_at(r, v)
                .max_by(|&a, &b| self.tree.volume[a].cmp(&self.tree.volume[b]).then(b.cmp(&a)))
                .expect("positive descendant volume");
            self.descents += 1;
            return self.build(child);
        }
        self.sinusoid(r, upper_bound_array(vol as u128, h))
    }

    /// Case B: sampled sinusoids along the circle of record `r`.
    fn sinusoid(&self, r: usize, local_bound: f64) -> Result<Local, BoundsError> {
        let rec = &self.tree.labels.circles[r];
        let len = rec.vertices.len();
        let d: Vec<usize> = rec
            .vertices
            .iter()
            .map(|&v| self.tree.descendant_volume(r, v))
            .collect();
        // Position 0 is forced to zero: the anchor if there is one, else the
        // lightest vertex.
        let rot = if rec.anchor.is_some() {
            0
        } else {
            (0..len).min_by_key(|&i| (d[i], i)).expect("nonempty circle")
        };
        let order: Vec<usize> = (0..len).map(|k| rec.vertices[(k + rot) % len]).collect();
        let eta: Vec<f64> = (0..len).map(|k| 1.0 + d[(k + rot) % len] as f64).collect();
        let p = Parametrization::new(eta);

        let n = self.tree.n;
        let mut f = [vec![0.0; n], vec![0.0; n]];
        for (i, fi) in f.iter_mut().enumerate() {
            for (k, &v) in order.iter().enumerate().skip(1) {
                let value = p.sample(i, k);
                self.tree.set_vertex(r, v, value, fi);
            }
        }
        let [f0, f1] = f;

        let single = self.zero_mean_combination(&f0, &f1)?;
        if let Some((r_single, values)) = &single {
            if *r_single <= local_bound {
                return Ok(Local::Single(values.clone()));
            }
        }

        // Separate the halves by also clearing the vertex whose bin holds the split.
        let j = (p.split + 0.5).floor() as usize % len;
        let (mut g0, mut g1) = (f0, f1);
        if j != 0 {
            self.tree.set_vertex(r, order[j], 0.0, &mut g0);
            self.tree.set_vertex(r, order[j], 0.0, &mut g1);
        }
        let a = VertexFunction::new(g0);
        let b = VertexFunction::new(g1);
        if !a.is_zero() && !b.is_zero() && !supports_adjacent(self.g, &a, &b) {
            return Ok(Local::Pair(a.into_values(), b.into_values()));
        }
        match single {
            Some((_, values)) => Ok(Local::Single(values)),
            None => Err(BoundsError::ZeroFunction),
        }
    }

    /// `c0 f0 + c1 f1` with zero mean, or the better of the two when both
    /// already have zero mean.
    fn zero_mean_combination(&self, f0: &[f64], f1: &[f64]) -> Result<Option<(f64, Vec<f64>)>, BoundsError> {
        let s0 = crate::numeric::sum(f0);
        let s1 = crate::numeric::sum(f1);
        let scale = crate::numeric::norm(f0).max(crate::numeric::norm(f1));
        if scale == 0.0 {
            return Ok(None);
        }
        let tiny = 1e-12 * scale * (self.tree.n as f64).sqrt();
        let candidates: Vec<Vec<f64>> = if s0.abs() <= tiny && s1.abs() <= tiny {
            vec![f0.to_vec(), f1.to_vec()]
        } else {
            vec![f0.iter().zip(f1).map(|(&a, &b)| s1 * a - s0 * b).collect()]
        };
        let mut best: Option<(f64, Vec<f64>)> = None;
        for mut c in candidates {
            if c.iter().all(|&x| x == 0.0) {
                continue;
            }
            let nrm = crate::numeric::norm(&c);
            crate::numeric::scale(1.0 / nrm, &mut c);
            let r = rayleigh_with(&self.q, &c)?;
            if best.as_ref().is_none_or(|b| r < b.0) {
                best = Some((r, c));
            }
        }
        Ok(best)
    }
}

/// Builds test functions for a labeled array of circles following the
/// descendant-volume case split: descend into a heavy sub-array when one
/// reaches `vol^((2^h - 2)/(2^h - 1))`, otherwise sample reparametrized
/// sinusoids along the base circle.
pub fn witness_certificate(g: &Graph) -> Result<Certificate, BoundsError> {
    let labels = g.labels().ok_or(BoundsError::NotAnArray)?;
    if !labels.blowups.is_empty() || labels.circles.iter().any(|c| c.kind != RecordKind::Circle) {
        return Err(BoundsError::NotAnArray);
    }
    let roots: Vec<usize> = labels
        .circles
        .iter()
        .enumerate()
        .filter(|(_, c)| c.parent.is_none())
        .map(|(i, _)| i)
        .collect();
    if roots.len() != 1 || labels.circles.iter().any(|c| c.vertices.len() < 3) {
        return Err(BoundsError::NotAnArray);
    }
    let tree = Tree::new(labels, g.vertex_count());
    let (depth, volume) = (tree.height[roots[0]], g.volume());
    if tree.volume[roots[0]] != volume {
        return Err(BoundsError::NotAnArray);
    }
    let mut b = Builder {
        tree,
        q: QuadraticForm::new(g),
        g,
        descents: 0,
    };
    let local = b.build(roots[0])?;
    let (witness, achieved) = match local {
        Local::Single(f) => {
            let r = rayleigh_with(&b.q, &f)?;
            (Witness::Single { f }, r)
        }
        Local::Pair(f0, f1) => {
            let r = rayleigh_with(&b.q, &f0)?.max(rayleigh_with(&b.q, &f1)?);
            (Witness::Pair { f0, f1 }, r)
        }
    };
    Ok(Certificate {
        witness,
        quoted_bound: upper_bound_array(volume as u128, depth),
        achieved,
        depth,
        volume,
        descents: b.descents,
    })
}
