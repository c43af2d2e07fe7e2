//! Splitting the zero-mean functions into two subspaces and comparing first
//! eigenvalues.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::BoundsError;
use crate::graph::{Graph, VertexFunction};
use crate::numeric::{dot, norm};
use crate::spectral::{lambda1_dense, lambda1_subspace_with, QuadraticForm};
use crate::SpectralError;

/// Absolute slack of the eigenvalue comparisons.
pub const VERDICT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparateVerdict {
    pub lam_a: f64,
    pub lam_b: f64,
    pub lam_g: f64,
    /// Every basis vector of `A` is l2-orthogonal to every one of `B`.
    pub orthogonal: bool,
    /// No edge carries a nonzero derivative of members of both subspaces.
    pub disjoint_derivative_supports: bool,
    /// `lam_g >= min(lam_a, lam_b) / 2`; present when the derivative supports are disjoint.
    pub relaxed_ok: Option<bool>,
    /// `lam_g == min(lam_a, lam_b)`; present when the subspaces are orthogonal.
    pub exact_ok: Option<bool>,
}

fn derivative_edges(g: &Graph, basis: &[VertexFunction]) -> HashSet<(usize, usize)> {
    basis.iter().flat_map(|f| f.derivative_support(g)).collect()
}

/// Compares `lambda_1(G)` with the first eigenvalues of the subspaces spanned
/// by `basis_a` and `basis_b`, which must together form a basis of the
/// zero-mean functions.
pub fn separate_verdict(
    g: &Graph,
    basis_a: &[VertexFunction],
    basis_b: &[VertexFunction],
) -> Result<SeparateVerdict, BoundsError> {
    let n = g.vertex_count();
    if basis_a.is_empty() || basis_b.is_empty() {
        return Err(BoundsError::NotADecomposition("both subspaces must be nonzero".into()));
    }
    if basis_a.len() + basis_b.len() != n - 1 {
        return Err(BoundsError::NotADecomposition(format!(
            "dimensions {} + {} do not add up to {}",
            basis_a.len(),
            basis_b.len(),
            n - 1
        )));
    }
    let q = QuadraticForm::new(g);
    let sub = |basis: &[VertexFunction]| {
        lambda1_subspace_with(&q, basis).map_err(|e| match e {
            SpectralError::DegenerateBasis(msg) => BoundsError::NotADecomposition(msg),
            other => other.into(),
        })
    };
    let all: Vec<VertexFunction> = basis_a.iter().chain(basis_b).cloned().collect();
    // Independence of the union; the eigenvalue itself is lambda_1(G).
    sub(&all)?;
    let lam_a = sub(basis_a)?;
    let lam_b = sub(basis_b)?;
    let lam_g = lambda1_dense(g)?.lambda1;

    let orthogonal = basis_a.iter().all(|a| {
        basis_b.iter().all(|b| {
            let scale = norm(a.values()) * norm(b.values());
            dot(a.values(), b.values()).abs() <= 1e-12 * scale
        })
    });
    let da = derivative_edges(g, basis_a);
    let disjoint_derivative_supports = derivative_edges(g, basis_b).is_disjoint(&da);
    let m = lam_a.min(lam_b);
    Ok(SeparateVerdict {
        lam_a,
        lam_b,
        lam_g,
        orthogonal,
        disjoint_derivative_supports,
        relaxed_ok: disjoint_derivative_supports.then_some(lam_g >= 0.5 * m - VERDICT_TOL),
        exact_ok: orthogonal.then_some((lam_g - m).abs() <= VERDICT_TOL),
    })
}

/// Decomposition at a cut vertex `c` whose removal separates `side` from the
/// rest: `A` varies off `side` and is constant on `side + c`, `B` varies on
/// `side` and is constant on the rest. Their derivatives live on different
/// edges.
pub fn cut_decomposition(
    g: &Graph,
    c: usize,
    side: &[usize],
) -> Result<(Vec<VertexFunction>, Vec<VertexFunction>), BoundsError> {
    let n = g.vertex_count();
    let mut in_side = vec![false; n];
    for &v in side {
        if v >= n || v == c {
            return Err(BoundsError::InvalidParameter(format!("bad side vertex {v}")));
        }
        in_side[v] = true;
    }
    if side.is_empty() || side.len() + 1 >= n {
        return Err(BoundsError::InvalidParameter("both sides of the cut must be nonempty".into()));
    }
    for &(u, v) in g.edges() {
        if u != c && v != c && in_side[u] != in_side[v] {
            return Err(BoundsError::InvalidParameter(format!(
                "vertex {c} does not separate the side (edge {u}-{v})"
            )));
        }
    }
    // A: delta_x minus the uniform mass on side + c, for x off the side.
    let far_len = (side.len() + 1) as f64;
    let a = (0..n)
        .filter(|&x| !in_side[x] && x != c)
        .map(|x| {
            let mut f = vec![0.0; n];
            for v in 0..n {
                if in_side[v] || v == c {
                    f[v] = -1.0 / far_len;
                }
            }
            f[x] = 1.0;
            VertexFunction::new(f)
        })
        .collect();
    // B: delta_y minus the uniform mass on the rest (including c).
    let rest_len = (n - side.len()) as f64;
    let b = side
        .iter()
        .map(|&y| {
            let mut f = vec![0.0; n];
            for v in 0..n {
                if !in_side[v] {
                    f[v] = -1.0 / rest_len;
                }
            }
            f[y] = 1.0;
            VertexFunction::new(f)
        })
        .collect();
    Ok((a, b))
}

/// [`cut_decomposition`] at the anchor of a non-base circle record: the side
/// is everything that record's subtree introduces.
pub fn subtree_decomposition(
    g: &Graph,
    record: usize,
) -> Result<(Vec<VertexFunction>, Vec<VertexFunction>), BoundsError> {
    let labels = g.labels().ok_or(BoundsError::NotAnArray)?;
    let rec = labels
        .circles
        .get(record)
        .ok_or_else(|| BoundsError::InvalidParameter(format!("no record {record}")))?;
    let anchor = rec
        .anchor
        .ok_or_else(|| BoundsError::InvalidParameter(format!("record {record} has no anchor")))?;
    let side = labels.subtree_vertices(record);
    cut_decomposition(g, anchor, &side)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrays::{build_array, build_optimal, ArrayDesc};

    fn two_hexagons() -> Graph {
        let mut d = ArrayDesc::circle(6);
        d.children.insert(0, ArrayDesc::circle(6));
        build_array(&d).unwrap()
    }

    #[test]
    fn hexagons_sharing_a_vertex() {
        let g = two_hexagons();
        let (a, b) = subtree_decomposition(&g, 1).unwrap();
        assert_eq!((a.len(), b.len()), (5, 5));
        let v = separate_verdict(&g, &a, &b).unwrap();
        assert!(v.disjoint_derivative_supports);
        assert_eq!(v.relaxed_ok, Some(true));
        assert!(!v.orthogonal);
        assert_eq!(v.exact_ok, None);
    }

    #[test]
    fn eigvec_and_complement() {
        let g = build_optimal(3, 2).unwrap();
        let r = lambda1_dense(&g).unwrap();
        let n = g.vertex_count();
        let e = r.eigvec.values().to_vec();
        // Orthonormal complement of {1, e} via Gram-Schmidt on the deltas.
        let mut basis: Vec<Vec<f64>> = vec![vec![1.0 / (n as f64).sqrt(); n], e.clone()];
        let mut comp = Vec::new();
        for i in 0..n {
            let mut f = vec![0.0; n];
            f[i] = 1.0;
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(&f, b);
                    crate::numeric::axpy(-c, b, &mut f);
                }
            }
            let nf = norm(&f);
            if nf > 1e-8 {
                f.iter_mut().for_each(|x| *x /= nf);
                basis.push(f.clone());
                comp.push(VertexFunction::new(f));
            }
            if comp.len() == n - 2 {
                break;
            }
        }
        let v = separate_verdict(&g, &[VertexFunction::new(e)], &comp).unwrap();
        assert!(v.orthogonal);
        assert_eq!(v.exact_ok, Some(true));
        assert!((v.lam_a - r.lambda1).abs() < 1e-9);
    }

    #[test]
    fn wrong_dimensions() {
        let g = two_hexagons();
        let (a, b) = subtree_decomposition(&g, 1).unwrap();
        assert!(matches!(
            separate_verdict(&g, &a[1..], &b),
            Err(BoundsError::NotADecomposition(_))
        ));
        let mut dup = a.clone();
        dup[1] = dup[0].clone();
        assert!(matches!(
            separate_verdict(&g, &dup, &b),
            Err(BoundsError::NotADecomposition(_))
        ));
    }

    #[test]
    fn non_separating_vertex_is_rejected() {
        let g = crate::graph::circle(6).unwrap();
        assert!(cut_decomposition(&g, 0, &[2, 3]).is_err());
    }
}
