//! Sparse LDL^T factorization with a greedy minimum-degree ordering.
//!
//! Arrays of circles have treewidth two, so minimum degree keeps the fill
//! linear in the vertex count. The numeric kernel is the classic up-looking
//! elimination-tree algorithm.

use crate::error::SpectralError;

/// Symmetric matrix in compressed-column form holding both triangles.
pub struct SymCsc {
    pub n: usize,
    pub col_ptr: Vec<usize>,
    pub rows: Vec<usize>,
    pub vals: Vec<f64>,
}

pub struct Ldl {
    n: usize,
    perm: Vec<usize>,
    l_ptr: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    d: Vec<f64>,
}

/// Greedy minimum-degree elimination order of the pattern of `a`.
pub fn minimum_degree_order(a: &SymCsc) -> Vec<usize> {
    let n = a.n;
    let mut adj: Vec<Vec<usize>> = (0..n)
        .map(|j| {
            let mut v: Vec<usize> = a.rows[a.col_ptr[j]..a.col_ptr[j + 1]]
                .iter()
                .copied()
                .filter(|&i| i != j)
                .collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    let mut queue: std::collections::BTreeSet<(usize, usize)> =
        (0..n).map(|v| (adj[v].len(), v)).collect();
    let mut order = Vec::with_capacity(n);
    while let Some((_, v)) = queue.pop_first() {
        order.push(v);
        let nbrs = std::mem::take(&mut adj[v]);
        for &u in &nbrs {
            queue.remove(&(adj[u].len(), u));
            if let Ok(pos) = adj[u].binary_search(&v) {
                adj[u].remove(pos);
            }
        }
        for (i, &u) in nbrs.iter().enumerate() {
            for &w in &nbrs[i + 1..] {
                if let Err(pos) = adj[u].binary_search(&w) {
                    adj[u].insert(pos, w);
                }
                if let Err(pos) = adj[w].binary_search(&u) {
                    adj[w].insert(pos, u);
                }
            }
        }
        for &u in &nbrs {
            queue.insert((adj[u].len(), u));
        }
    }
    order
}

impl Ldl {
    pub fn factor(a: &SymCsc) -> Result<Self, SpectralError> {
        let n = a.n;
        let perm = minimum_degree_order(a);
        let mut pinv = vec![0usize; n];
        for (k, &p) in perm.iter().enumerate() {
            pinv[p] = k;
        }

        // Symbolic: elimination tree and column counts.
        let none = usize::MAX;
        let mut parent = vec![none; n];
        let mut flag = vec![none; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            let kk = perm[k];
            for p in a.col_ptr[kk]..a.col_ptr[kk + 1] {
                let mut i = pinv[a.rows[p]];
                if i < k {
                    while flag[i] != k {
                        if parent[i] == none {
                            parent[i] = k;
                        }
                        lnz[i] += 1;
                        flag[i] = k;
                        i = parent[i];
                    }
                }
            }
        }
        let mut l_ptr = vec![0usize; n + 1];
        for k in 0..n {
            l_ptr[k + 1] = l_ptr[k] + lnz[k];
        }
        let nnz = l_ptr[n];
        let mut l_idx = vec![0usize; nnz];
        let mut l_val = vec![0.0f64; nnz];
        let mut d = vec![0.0f64; n];

        // Numeric.
        let mut y = vec![0.0f64; n];
        let mut pattern = vec![0usize; n];
        let mut filled = vec![0usize; n];
        flag.iter_mut().for_each(|f| *f = none);
        for k in 0..n {
            y[k] = 0.0;
            let mut top = n;
            flag[k] = k;
            filled[k] = 0;
            let kk = perm[k];
            for p in a.col_ptr[kk]..a.col_ptr[kk + 1] {
                let mut i = pinv[a.rows[p]];
                if i <= k {
                    y[i] += a.vals[p];
                    let mut len = 0;
                    while flag[i] != k {
                        pattern[len] = i;
                        len += 1;
                        flag[i] = k;
                        i = parent[i];
                    }
                    while len > 0 {
                        top -= 1;
                        len -= 1;
                        pattern[top] = pattern[len];
                    }
                }
            }
            d[k] = y[k];
            y[k] = 0.0;
            while top < n {
                let i = pattern[top];
                top += 1;
                let yi = y[i];
                y[i] = 0.0;
                let end = l_ptr[i] + filled[i];
                for p in l_ptr[i]..end {
                    y[l_idx[p]] -= l_val[p] * yi;
                }
                let lki = yi / d[i];
                d[k] -= lki * yi;
                l_idx[end] = k;
                l_val[end] = lki;
                filled[i] += 1;
            }
            if !(d[k] > 0.0) {
                return Err(SpectralError::Factorization(format!(
                    "nonpositive pivot {:e} at step {k}",
                    d[k]
                )));
            }
        }
        Ok(Self {
            n,
            perm,
            l_ptr,
            l_idx,
            l_val,
            d,
        })
    }

    pub fn nnz(&self) -> usize {
        self.l_idx.len()
    }

    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for j in 0..n {
            let xj = x[j];
            for p in self.l_ptr[j]..self.l_ptr[j + 1] {
                x[self.l_idx[p]] -= self.l_val[p] * xj;
            }
        }
        for j in 0..n {
            x[j] /= self.d[j];
        }
        for j in (0..n).rev() {
            let mut xj = x[j];
            for p in self.l_ptr[j]..self.l_ptr[j + 1] {
                xj -= self.l_val[p] * x[self.l_idx[p]];
            }
            x[j] = xj;
        }
        for (k, &p) in self.perm.iter().enumerate() {
            b[p] = x[k];
        }
    }
}
