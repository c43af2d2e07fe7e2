//! The first positive eigenvalue of the degree-normalized quadratic form.
//!
//! `lambda_1(G)` is the infimum of `Q(f) / sum f^2` over nonzero zero-mean
//! functions, i.e. the second-smallest eigenvalue of `Q` in the plain l2 inner
//! product. Two independent routes compute it: a dense symmetric eigensolver
//! (the oracle for small graphs) and shift-invert Lanczos on the grounded
//! sparse factorization.

mod form;
pub mod ldl;

use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use form::{rayleigh, rayleigh_with, QuadraticForm};

use crate::error::SpectralError;
use crate::graph::{Graph, VertexFunction};
use crate::numeric::{axpy, deflate_constants, dot, norm, scale};

/// Largest vertex count handled by [`lambda1_dense`].
pub const DENSE_LIMIT: usize = 2000;
/// Largest vertex count [`lambda1`] sends to the dense solver; shift-invert
/// Lanczos is faster beyond it.
pub const AUTO_DENSE_MAX: usize = 400;
/// Default residual tolerance of the iterative solver.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default seed of the iterative start vector.
pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Dense,
    Iterative,
}

/// Result of a first-eigenvalue computation.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralReport {
    pub lambda1: f64,
    /// Zero-mean, unit-norm eigenvector.
    pub eigvec: VertexFunction,
    /// `|Q x - lambda x| / |x|`.
    pub residual: f64,
    pub solver: Solver,
    pub iterations: usize,
}

/// Serialized form of a [`SpectralReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralDocument {
    pub lambda1: f64,
    pub residual: f64,
    pub solver: Solver,
    pub iterations: usize,
    pub graph_hash: String,
}

impl SpectralReport {
    pub fn document(&self, g: &Graph) -> SpectralDocument {
        SpectralDocument {
            lambda1: self.lambda1,
            residual: self.residual,
            solver: self.solver,
            iterations: self.iterations,
            graph_hash: g.hash(),
        }
    }
}

fn finish_vector(mut x: Vec<f64>) -> Vec<f64> {
    deflate_constants(&mut x);
    let nx = norm(&x);
    scale(1.0 / nx, &mut x);
    x
}

/// Dense oracle: full symmetric eigendecomposition of `Q`.
pub fn lambda1_dense(g: &Graph) -> Result<SpectralReport, SpectralError> {
    let n = g.vertex_count();
    if n > DENSE_LIMIT {
        return Err(SpectralError::SizeCap {
            n,
            limit: DENSE_LIMIT,
        });
    }
    if n < 2 {
        return Err(SpectralError::TooSmall);
    }
    let q = QuadraticForm::new(g);
    let mut m = Mat::<f64>::zeros(n, n);
    for v in 0..n {
        m[(v, v)] = q.diag()[v];
        for (w, a) in q.row(v) {
            m[(v, w)] = a;
        }
    }
    let (_, vectors) = sym_eigen(&m)?;
    let x = finish_vector(vectors[1].clone());
    let lambda = rayleigh_with(&q, &x)?;
    let residual = q.residual(&x, lambda);
    Ok(SpectralReport {
        lambda1: lambda,
        eigvec: VertexFunction::new(x),
        residual,
        solver: Solver::Dense,
        iterations: 0,
    })
}

/// Knobs of the iterative solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterativeOptions {
    /// Residual target `|Q x - lambda x|` for unit `x`.
    pub tol: f64,
    pub seed: u64,
    /// Krylov basis size before an explicit restart from the best Ritz vector.
    pub max_basis: usize,
    /// Hard cap on operator applications; `None` means `5 n`.
    pub max_matvecs: Option<usize>,
}

impl Default for IterativeOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            seed: DEFAULT_SEED,
            max_basis: 160,
            max_matvecs: None,
        }
    }
}

/// Inverse of `Q` on the zero-mean subspace, via the factorization of `Q`
/// with vertex 0 grounded.
struct GroundedInverse {
    ldl: ldl::Ldl,
    n: usize,
}

impl GroundedInverse {
    fn new(q: &QuadraticForm) -> Result<Self, SpectralError> {
        let n = q.dim();
        let mut col_ptr = Vec::with_capacity(n);
        let mut rows = Vec::new();
        let mut vals = Vec::new();
        col_ptr.push(0);
        for v in 1..n {
            for (w, a) in q.row(v) {
                if w != 0 {
                    rows.push(w - 1);
                    vals.push(a);
                }
            }
            rows.push(v - 1);
            vals.push(q.diag()[v]);
            col_ptr.push(rows.len());
        }
        let a = ldl::SymCsc {
            n: n - 1,
            col_ptr,
            rows,
            vals,
        };
        Ok(Self {
            ldl: ldl::Ldl::factor(&a)?,
            n,
        })
    }

    /// `y = Q^+ x` for zero-mean `x`.
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        y[1..].copy_from_slice(&x[1..]);
        self.ldl.solve(&mut y[1..]);
        y[0] = 0.0;
        deflate_constants(&mut y);
        y
    }
}

/// Largest eigenpair of a symmetric tridiagonal matrix.
fn tridiagonal_top(alphas: &[f64], betas: &[f64]) -> Result<(f64, Vec<f64>), SpectralError> {
    let k = alphas.len();
    let mut t = Mat::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let (mut values, mut vectors) = sym_eigen(&t)?;
    Ok((values.pop().expect("nonempty"), vectors.pop().expect("nonempty")))
}

/// Eigenvalues in ascending order with their unit eigenvectors.
fn sym_eigen(m: &Mat<f64>) -> Result<(Vec<f64>, Vec<Vec<f64>>), SpectralError> {
    let eig = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| SpectralError::Factorization(format!("{e:?}")))?;
    let (s, u) = (eig.S(), eig.U());
    let n = m.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
    let values = idx.iter().map(|&i| s[i]).collect();
    let vectors = idx.iter().map(|&i| (0..n).map(|r| u[(r, i)]).collect()).collect();
    Ok((values, vectors))
}

fn sym_eigenvalues(m: &Mat<f64>) -> Result<Vec<f64>, SpectralError> {
    let mut values = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| SpectralError::Factorization(format!("{e:?}")))?;
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Shift-invert Lanczos with full reorthogonalization and explicit deflation
/// of the constants.
pub fn lambda1_iterative(g: &Graph, tol: f64) -> Result<SpectralReport, SpectralError> {
    lambda1_iterative_with(
        g,
        IterativeOptions {
            tol,
            ..IterativeOptions::default()
        },
    )
}

pub fn lambda1_iterative_with(g: &Graph, opts: IterativeOptions) -> Result<SpectralReport, SpectralError> {
    let n = g.vertex_count();
    if n < 2 {
        return Err(SpectralError::TooSmall);
    }
    if !(opts.tol > 0.0) {
        return Err(SpectralError::DegenerateBasis("tolerance must be positive".into()));
    }
    let q = QuadraticForm::new(g);
    let inv = GroundedInverse::new(&q)?;
    let max_matvecs = opts.max_matvecs.unwrap_or(5 * n).max(1);
    let krylov_dim = (n - 1).min(opts.max_basis.max(2));
    const CHECK_EVERY: usize = 8;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    deflate_constants(&mut start);
    if norm(&start) == 0.0 {
        start[0] = 1.0;
        deflate_constants(&mut start);
    }
    let mut start = finish_vector(start);

    let mut matvecs = 0usize;
    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    loop {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alphas = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut ritz: Option<Vec<f64>> = None;
        loop {
            let j = basis.len() - 1;
            let mut w = inv.apply(&basis[j]);
            matvecs += 1;
            let alpha = dot(&w, &basis[j]);
            axpy(-alpha, &basis[j], &mut w);
            if j > 0 {
                axpy(-betas[j - 1], &basis[j - 1], &mut w);
            }
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(&w, v);
                    axpy(-c, v, &mut w);
                }
                deflate_constants(&mut w);
            }
            alphas.push(alpha);
            let beta = norm(&w);
            let (theta, s) = tridiagonal_top(&alphas, &betas)?;
            let exhausted = beta <= 1e-13 * theta.abs().max(1e-300) || basis.len() >= krylov_dim;
            let out_of_budget = matvecs >= max_matvecs;
            if basis.len().is_multiple_of(CHECK_EVERY) || exhausted || out_of_budget {
                let mut y = vec![0.0; n];
                for (si, v) in s.iter().zip(&basis) {
                    axpy(*si, v, &mut y);
                }
                let y = finish_vector(y);
                let lambda = rayleigh_with(&q, &y)?;
                let residual = q.residual(&y, lambda);
                if best.as_ref().is_none_or(|b| residual < b.1) {
                    best = Some((lambda, residual, y.clone()));
                }
                if residual <= opts.tol {
                    return Ok(SpectralReport {
                        lambda1: lambda,
                        eigvec: VertexFunction::new(y),
                        residual,
                        solver: Solver::Iterative,
                        iterations: matvecs,
                    });
                }
                ritz = Some(y);
            }
            if out_of_budget {
                let (_, best_residual, _) = best.expect("checked at least once");
                return Err(SpectralError::NoConvergence {
                    iterations: matvecs,
                    best_residual,
                });
            }
            if exhausted {
                break;
            }
            scale(1.0 / beta, &mut w);
            basis.push(w);
            betas.push(beta);
        }
        start = ritz.expect("restart vector computed at exhaustion");
    }
}

/// Dispatches to the dense oracle up to [`AUTO_DENSE_MAX`] vertices.
pub fn lambda1(g: &Graph) -> Result<SpectralReport, SpectralError> {
    if g.vertex_count() <= AUTO_DENSE_MAX {
        lambda1_dense(g)
    } else {
        lambda1_iterative(g, DEFAULT_TOL)
    }
}

/// Infimum of the Rayleigh quotient over the span of `basis`, a set of
/// linearly independent zero-mean functions: the smallest generalized
/// eigenvalue of `(B^T Q B, B^T B)`.
pub fn lambda1_subspace(g: &Graph, basis: &[VertexFunction]) -> Result<f64, SpectralError> {
    let q = QuadraticForm::new(g);
    lambda1_subspace_with(&q, basis)
}

pub fn lambda1_subspace_with(q: &QuadraticForm, basis: &[VertexFunction]) -> Result<f64, SpectralError> {
    let m = basis.len();
    if m == 0 {
        return Err(SpectralError::DegenerateBasis("empty basis".into()));
    }
    let n = q.dim();
    for (i, b) in basis.iter().enumerate() {
        if b.len() != n {
            return Err(SpectralError::DegenerateBasis(format!("basis vector {i} has wrong length")));
        }
        let scale = norm(b.values()).max(1e-300);
        if b.sum().abs() > 1e-9 * scale * (n as f64).sqrt() {
            return Err(SpectralError::DegenerateBasis(format!("basis vector {i} is not zero-mean")));
        }
    }
    let qb: Vec<Vec<f64>> = basis.iter().map(|b| q.apply_vec(b.values())).collect();
    let mut gram = Mat::<f64>::zeros(m, m);
    let mut energy = Mat::<f64>::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let gij = dot(basis[i].values(), basis[j].values());
            let eij = 0.5 * (dot(basis[i].values(), &qb[j]) + dot(basis[j].values(), &qb[i]));
            gram[(i, j)] = gij;
            gram[(j, i)] = gij;
            energy[(i, j)] = eij;
            energy[(j, i)] = eij;
        }
    }
    // Whiten with the Gram eigendecomposition: W = V diag(mu)^(-1/2).
    let (mu, v) = sym_eigen(&gram)?;
    let (lo, hi) = (mu[0], mu[m - 1]);
    if !(lo > 1e-12 * hi) {
        return Err(SpectralError::DegenerateBasis(format!(
            "basis is numerically dependent (Gram eigenvalues {lo:e} .. {hi:e})"
        )));
    }
    let w = Mat::<f64>::from_fn(m, m, |r, c| v[c][r] / mu[c].sqrt());
    let c = w.transpose() * &energy * &w;
    let c = Mat::<f64>::from_fn(m, m, |r, k| 0.5 * (c[(r, k)] + c[(k, r)]));
    Ok(sym_eigenvalues(&c)?[0])
}

/// Exact first eigenvalue of the circle of length `k`: `4 sin^2(pi / k)`.
pub fn cycle_lambda1_exact(k: usize) -> f64 {
    assert!(k >= 3, "circle length must be at least 3");
    let s = (std::f64::consts::PI / k as f64).sin();
    4.0 * s * s
}

/// Second-smallest eigenvalue of the symmetric normalized Laplacian
/// `I - D^{-1/2} A D^{-1/2}`. Diagnostic only; not the quantity above.
pub fn normalized_laplacian_lambda1(g: &Graph) -> Result<f64, SpectralError> {
    let n = g.vertex_count();
    if n > DENSE_LIMIT {
        return Err(SpectralError::SizeCap {
            n,
            limit: DENSE_LIMIT,
        });
    }
    if n < 2 {
        return Err(SpectralError::TooSmall);
    }
    let mut m = Mat::<f64>::identity(n, n);
    for &(u, v) in g.edges() {
        let w = -1.0 / ((g.degree(u) * g.degree(v)) as f64).sqrt();
        m[(u, v)] = w;
        m[(v, u)] = w;
    }
    Ok(sym_eigenvalues(&m)?[1])
}
