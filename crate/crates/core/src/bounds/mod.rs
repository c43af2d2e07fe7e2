//! Upper bounds on `lambda_1` for arrays of circles and their constructive
//! witnesses, the collapse map for generalized arrays, and decomposition
//! verdicts.

mod collapse;
mod separate;
mod witness;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use collapse::{collapse, pullback_energy_check, ENERGY_FACTOR, CollapseResult, PullbackCheck};
pub use separate::{cut_decomposition, separate_verdict, subtree_decomposition, SeparateVerdict, VERDICT_TOL};
pub use witness::{witness_certificate, Certificate, Witness};

use crate::arrays::{StepHomogeneousDesc, DEFAULT_SIZE_CAP};
use crate::error::BoundsError;
use crate::graph::{Graph, VertexFunction};
use crate::spectral::{self, QuadraticForm};

/// Graph-level constant of the array bound.
pub const ARRAY_CONSTANT: f64 = 64.0 * PI * PI;

/// `2^h / (2^h - 1)`.
pub fn exponent(h: u32) -> f64 {
    assert!(h >= 1, "depth must be at least 1");
    let p = 2f64.powi(h as i32);
    p / (p - 1.0)
}

/// `64 pi^2 / vol^(2^h / (2^h - 1))`.
///
/// # Panics
/// If `vol < 3` or `h < 1`.
pub fn upper_bound_array(vol: u128, h: u32) -> f64 {
    assert!(vol >= 3, "volume must be at least 3");
    ARRAY_CONSTANT / (vol as f64).powf(exponent(h))
}

/// `(256 pi^2 h^(h-1) / 3) / vol^(2^h / (2^h - 1))`.
///
/// # Panics
/// If `vol < 3` or `h < 1`.
pub fn upper_bound_generalized(vol: u128, h: u32) -> f64 {
    assert!(vol >= 3, "volume must be at least 3");
    let c = 256.0 * PI * PI * (h as f64).powi(h as i32 - 1) / 3.0;
    c / (vol as f64).powf(exponent(h))
}

fn check_length(g: &Graph, f: &VertexFunction) -> Result<(), BoundsError> {
    if f.len() != g.vertex_count() {
        return Err(crate::GraphError::LengthMismatch {
            expected: g.vertex_count(),
            got: f.len(),
        }
        .into());
    }
    Ok(())
}

/// True if some edge joins the support of `a` to the support of `b`.
pub fn supports_adjacent(g: &Graph, a: &VertexFunction, b: &VertexFunction) -> bool {
    g.edges().iter().any(|&(u, v)| {
        let (au, av) = (a.values()[u] != 0.0, a.values()[v] != 0.0);
        let (bu, bv) = (b.values()[u] != 0.0, b.values()[v] != 0.0);
        (au && bv) || (av && bu)
    })
}

/// Minmax bound from two nontrivial functions with disjoint supports:
/// `max(R(rho0), R(rho1))`.
///
/// When the supports touch along an edge the cross energy no longer vanishes
/// and that maximum can undercut `lambda_1`; the zero-mean combination of the
/// two functions is then folded into the maximum, which keeps the value an
/// upper bound. For separated supports the combination never exceeds the
/// maximum, so the value is unchanged.
pub fn minmax_bound(g: &Graph, rho0: &VertexFunction, rho1: &VertexFunction) -> Result<f64, BoundsError> {
    check_length(g, rho0)?;
    check_length(g, rho1)?;
    if rho0.is_zero() || rho1.is_zero() {
        return Err(BoundsError::ZeroFunction);
    }
    if rho0
        .values()
        .iter()
        .zip(rho1.values())
        .any(|(&a, &b)| a != 0.0 && b != 0.0)
    {
        return Err(BoundsError::OverlappingSupports);
    }
    let q = QuadraticForm::new(g);
    let r0 = spectral::rayleigh_with(&q, rho0.values())?;
    let r1 = spectral::rayleigh_with(&q, rho1.values())?;
    let mut best = r0.max(r1);
    if supports_adjacent(g, rho0, rho1) {
        let (s0, s1) = (rho0.sum(), rho1.sum());
        let combo: Vec<f64> = rho0
            .values()
            .iter()
            .zip(rho1.values())
            .map(|(&a, &b)| s1 * a - s0 * b)
            .collect();
        if combo.iter().any(|&x| x != 0.0) {
            best = best.max(spectral::rayleigh_with(&q, &combo)?);
        }
    }
    Ok(best)
}

/// Star of circles: a center joined by `n` pendant edges, each tip lying on
/// its own circle of length `circle_len`. Vertex 0 is the center.
pub fn star_of_circles(n: usize, circle_len: usize) -> Result<Graph, BoundsError> {
    if n == 0 || circle_len < 3 {
        return Err(BoundsError::InvalidParameter(format!(
            "star of circles needs n >= 1 and circle length >= 3, got ({n}, {circle_len})"
        )));
    }
    let mut edges = Vec::with_capacity(n * (circle_len + 1));
    for i in 0..n {
        let base = 1 + i * circle_len;
        edges.push((0, base));
        for j in 0..circle_len {
            edges.push((base + j, base + (j + 1) % circle_len));
        }
    }
    Ok(Graph::new(1 + n * circle_len, &edges)?)
}

/// User-supplied constants of the mapping-torus pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusConstants {
    pub c3: f64,
    pub d: f64,
    pub vol_thin: f64,
}

impl TorusConstants {
    /// Illustrative defaults: `c3` is the graph-level constant and `d = 1`.
    /// Neither is a value for actual manifolds.
    pub fn illustrative() -> Self {
        Self {
            c3: ARRAY_CONSTANT,
            d: 1.0,
            vol_thin: std::f64::consts::E,
        }
    }

    fn validate(&self) -> Result<(), BoundsError> {
        for (name, x) in [("c3", self.c3), ("d", self.d), ("vol_thin", self.vol_thin)] {
            if !(x.is_finite() && x > 0.0) {
                return Err(BoundsError::InvalidParameter(format!("{name} must be positive, got {x}")));
            }
        }
        Ok(())
    }
}

/// Bound pipeline for a mapping torus modeled by the optimal array of depth
/// `2g - 2` with base circle of length `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusReport {
    pub genus: u32,
    pub k: usize,
    pub depth: u32,
    /// Model graph volume in decimal, or `exp(ln V)` when it overflows `u128`.
    pub volume: String,
    pub exponent: f64,
    pub constants: TorusConstants,
    pub constants_note: String,
    /// `c3 / V^exponent`, the thick-part upper bound.
    pub upper_thick: f64,
    /// `[upper_thick / 48, d log(vol_thin) upper_thick]`.
    pub interval: [f64; 2],
    pub interval_ordered: bool,
    /// First eigenvalue of the model graph, when it was built.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1_graph: Option<f64>,
}

/// Evaluates the bound pipeline. With `build_graph` the model graph is
/// realized (subject to `cap`) and its first eigenvalue reported.
pub fn torus_report(
    genus: u32,
    k: usize,
    constants: TorusConstants,
    build_graph: bool,
    cap: Option<u128>,
) -> Result<TorusReport, BoundsError> {
    if genus < 2 || k < 3 {
        return Err(BoundsError::InvalidParameter(format!(
            "need genus >= 2 and k >= 3, got ({genus}, {k})"
        )));
    }
    constants.validate()?;
    let depth = 2 * genus - 2;
    let desc = StepHomogeneousDesc::optimal(k, depth as usize);
    let volume_exact = desc.as_ref().ok().and_then(|d| d.volume());
    let log_volume = match volume_exact {
        Some(v) => (v as f64).ln(),
        None => log_optimal_volume(k, depth),
    };
    let e = exponent(depth);
    let upper_thick = constants.c3 * (-e * log_volume).exp();
    let interval = [upper_thick / 48.0, constants.d * constants.vol_thin.ln() * upper_thick];
    let lambda1_graph = if build_graph {
        let g = crate::arrays::build_step_homogeneous(&desc?, cap.unwrap_or(DEFAULT_SIZE_CAP))?;
        Some(spectral::lambda1(&g)?.lambda1)
    } else {
        None
    };
    Ok(TorusReport {
        genus,
        k,
        depth,
        volume: match volume_exact {
            Some(v) => v.to_string(),
            None => format!("exp({log_volume})"),
        },
        exponent: e,
        constants,
        constants_note: if constants == TorusConstants::illustrative() {
            "illustrative constants (c3 = 64 pi^2, d = 1); not manifold values".into()
        } else {
            "user-supplied constants".into()
        },
        upper_thick,
        interval,
        interval_ordered: interval[0] <= interval[1],
        lambda1_graph,
    })
}

/// `ln vol` of the optimal array, without overflow: the depth-`j` circles
/// number `prod_{i<j} l_i` and have length `l_j = k^(2^(j-1))`.
fn log_optimal_volume(k: usize, depth: u32) -> f64 {
    let lk = (k as f64).ln();
    let mut log_count = 0.0f64;
    let mut terms = Vec::with_capacity(depth as usize);
    for j in 0..depth {
        let ll = 2f64.powi(j as i32) * lk;
        terms.push(log_count + ll);
        log_count += ll;
    }
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrays::build_optimal;
    use crate::graph::circle;

    #[test]
    fn array_bound_values() {
        assert!((upper_bound_array(30, 2) - 64.0 * PI * PI / 30f64.powf(4.0 / 3.0)).abs() < 1e-12);
        assert!((upper_bound_array(30, 2) - 6.78).abs() < 0.01);
        assert!((upper_bound_array(10, 1) - 64.0 * PI * PI / 100.0).abs() < 1e-12);
        let g = build_optimal(3, 2).unwrap();
        assert!(spectral::lambda1(&g).unwrap().lambda1 <= upper_bound_array(30, 2));
    }

    #[test]
    fn generalized_bound_values() {
        assert!((upper_bound_generalized(10, 1) - 256.0 * PI * PI / 3.0 / 100.0).abs() < 1e-12);
        let want = 256.0 * PI * PI * 2.0 / 3.0 / 30f64.powf(4.0 / 3.0);
        assert!((upper_bound_generalized(30, 2) - want).abs() < 1e-12);
        for vol in [3u128, 10, 1000] {
            assert!(upper_bound_generalized(vol, 1) > upper_bound_array(vol, 1));
        }
    }

    #[test]
    fn minmax_on_circle_8() {
        let g = circle(8).unwrap();
        let a = VertexFunction::new(vec![0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let b = VertexFunction::new(vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0]);
        let m = minmax_bound(&g, &a, &b).unwrap();
        assert!(m >= spectral::cycle_lambda1_exact(8));
        assert_eq!(minmax_bound(&g, &a, &a), Err(BoundsError::OverlappingSupports));
        let z = VertexFunction::zeros(8);
        assert_eq!(minmax_bound(&g, &a, &z), Err(BoundsError::ZeroFunction));
    }

    #[test]
    fn minmax_adjacent_deltas_on_complete_graph() {
        let n = 6;
        let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let g = Graph::new(n, &edges).unwrap();
        let lam = spectral::lambda1_dense(&g).unwrap().lambda1;
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        a[0] = 1.0;
        b[1] = 1.0;
        let (a, b) = (VertexFunction::new(a), VertexFunction::new(b));
        // Each delta alone has quotient 2, below lambda_1 = 2n/(n-1).
        assert!((spectral::rayleigh(&g, &a).unwrap() - 2.0).abs() < 1e-12);
        assert!(minmax_bound(&g, &a, &b).unwrap() >= lam - 1e-12);
    }

    #[test]
    fn minmax_eigvec_parts() {
        let g = build_optimal(3, 2).unwrap();
        let r = spectral::lambda1_dense(&g).unwrap();
        let pos: Vec<f64> = r.eigvec.values().iter().map(|&x| x.max(0.0)).collect();
        let neg: Vec<f64> = r.eigvec.values().iter().map(|&x| x.min(0.0)).collect();
        let m = minmax_bound(&g, &VertexFunction::new(pos), &VertexFunction::new(neg)).unwrap();
        assert!(m.is_finite() && m >= r.lambda1 - 1e-9);
    }

    #[test]
    fn star_volumes() {
        let g = star_of_circles(1, 3).unwrap();
        assert_eq!((g.vertex_count(), g.volume()), (4, 4));
        assert_eq!(star_of_circles(3, 9).unwrap().volume(), 30);
        assert!(star_of_circles(0, 3).is_err());
    }

    #[test]
    fn torus_examples() {
        let c = TorusConstants::illustrative();
        let r = torus_report(2, 3, c, false, None).unwrap();
        assert_eq!((r.depth, r.volume.as_str()), (2, "30"));
        assert!((r.exponent - 4.0 / 3.0).abs() < 1e-15);
        assert!((r.upper_thick - 6.78).abs() < 0.01);
        assert!(r.interval_ordered);
        let r = torus_report(3, 3, c, false, None).unwrap();
        assert!((r.exponent - 16.0 / 15.0).abs() < 1e-15);
        assert!(r.upper_thick > 0.0);
        let exact = (StepHomogeneousDesc::optimal(4, 3).unwrap().volume().unwrap() as f64).ln();
        assert!((log_optimal_volume(4, 3) - exact).abs() < 1e-12);
        let big = torus_report(5, 3, c, false, None).unwrap();
        assert!(big.volume.starts_with("exp(") && big.upper_thick >= 0.0);
        let built = torus_report(2, 3, c, true, None).unwrap();
        assert!(built.lambda1_graph.unwrap() <= built.upper_thick);
        assert!(matches!(
            torus_report(3, 5, c, true, Some(1000)),
            Err(BoundsError::Desc(crate::DescError::SizeCap { .. }))
        ));
    }
}
