use rayon::prelude::*;

use crate::graph::{Graph, VertexFunction};

/// Rows above this size are applied in parallel; each row is still reduced
/// in a fixed order, so results do not depend on the thread count.
const PARALLEL_ROWS: usize = 1 << 14;

/// The quadratic form `Q(f) = sum over edges {v,w} of (1/p(v) + 1/p(w)) (f(v) - f(w))^2`,
/// stored as a symmetric sparse matrix (CSR rows of off-diagonal entries plus diagonal).
#[derive(Clone, Debug)]
pub struct QuadraticForm {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    /// Off-diagonal entries, `-(1/p(v) + 1/p(w))`.
    vals: Vec<f64>,
    diag: Vec<f64>,
    inv_degree: Vec<f64>,
}

impl QuadraticForm {
    pub fn new(g: &Graph) -> Self {
        let n = g.vertex_count();
        let inv_degree: Vec<f64> = (0..n).map(|v| 1.0 / g.degree(v) as f64).collect();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(2 * g.volume());
        let mut vals = Vec::with_capacity(2 * g.volume());
        let mut diag = vec![0.0; n];
        row_ptr.push(0);
        for v in 0..n {
            for &w in g.neighbors(v) {
                let c = inv_degree[v] + inv_degree[w];
                cols.push(w);
                vals.push(-c);
                diag[v] += c;
            }
            row_ptr.push(cols.len());
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
            diag,
            inv_degree,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// Off-diagonal entries of row `v` as `(column, value)`.
    pub fn row(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[v]..self.row_ptr[v + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    fn row_dot(&self, v: usize, x: &[f64]) -> f64 {
        let mut acc = self.diag[v] * x[v];
        for (w, a) in self.row(v) {
            acc += a * x[w];
        }
        acc
    }

    /// `y = Q x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        if self.n >= PARALLEL_ROWS {
            y.par_iter_mut()
                .enumerate()
                .for_each(|(v, yv)| *yv = self.row_dot(v, x));
        } else {
            for (v, yv) in y.iter_mut().enumerate() {
                *yv = self.row_dot(v, x);
            }
        }
    }

    pub fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.apply(x, &mut y);
        y
    }

    /// `Q(f)` via the per-edge weights.
    pub fn energy(&self, f: &[f64]) -> f64 {
        let mut terms = Vec::with_capacity(self.cols.len() / 2);
        for v in 0..self.n {
            for (w, a) in self.row(v) {
                if w > v {
                    let d = f[v] - f[w];
                    terms.push(-a * d * d);
                }
            }
        }
        crate::numeric::sum(&terms)
    }

    /// `Q(f)` written as the per-vertex double sum `sum_v (1/p(v)) sum_{w~v} (f(w) - f(v))^2`.
    pub fn energy_vertex_sum(&self, f: &[f64]) -> f64 {
        let terms: Vec<f64> = (0..self.n)
            .map(|v| {
                let mut s = 0.0;
                for (w, _) in self.row(v) {
                    let d = f[w] - f[v];
                    s += d * d;
                }
                s * self.inv_degree[v]
            })
            .collect();
        crate::numeric::sum(&terms)
    }

    /// Bilinear form `Q(f, h)`.
    pub fn bilinear(&self, f: &[f64], h: &[f64]) -> f64 {
        crate::numeric::dot(f, &self.apply_vec(h))
    }

    /// Residual norm `|Qx - lambda x| / |x|`.
    pub fn residual(&self, x: &[f64], lambda: f64) -> f64 {
        let mut y = self.apply_vec(x);
        crate::numeric::axpy(-lambda, x, &mut y);
        crate::numeric::norm(&y) / crate::numeric::norm(x)
    }
}

/// Rayleigh quotient `Q(f) / sum f^2`; no zero-mean requirement.
pub fn rayleigh(g: &Graph, f: &VertexFunction) -> Result<f64, crate::SpectralError> {
    if f.len() != g.vertex_count() {
        return Err(crate::GraphError::LengthMismatch {
            expected: g.vertex_count(),
            got: f.len(),
        }
        .into());
    }
    rayleigh_with(&QuadraticForm::new(g), f.values())
}

pub fn rayleigh_with(q: &QuadraticForm, f: &[f64]) -> Result<f64, crate::SpectralError> {
    let den = crate::numeric::dot(f, f);
    if den == 0.0 {
        return Err(crate::SpectralError::ZeroFunction);
    }
    Ok(q.energy(f) / den)
}
