//! Orthonormal Hermite polynomials and Gauss-Hermite quadrature.
//!
//! Everything here is normalized against the standard Gaussian measure
//! `dμ = (2π)^{-1/2} e^{-ξ²/2} dξ`: the polynomials `H_n` produced by
//! [`eval`] satisfy `∫ H_n H_m dμ = δ_{nm}`, and the weights of every
//! [`GaussHermiteRule`] sum to one. Degree-`n` runs through the recurrence
//!
//! ```text
//! H_0 = 1 ,   H_1 = ξ ,   H_{n+1} = (ξ H_n - √n H_{n-1}) / √(n+1) .
//! ```
//!
//! An `n`-point rule integrates polynomials of degree `≤ 2n - 1` exactly.
//! Rules are constructed once per point count and shared process-wide
//! through [`rule`].

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::DMatrix;

use crate::error::Error;
use crate::Result;

/// Evaluates the orthonormal Hermite polynomial of the given degree.
pub fn eval(degree: usize, xi: f64) -> f64 {
    let mut below = 1.0;
    if degree == 0 {
        return below;
    }
    let mut value = xi;
    for n in 1..degree {
        let next = (xi * value - (n as f64).sqrt() * below) / ((n + 1) as f64).sqrt();
        below = value;
        value = next;
    }
    value
}

/// Evaluates all orthonormal Hermite polynomials of degree `0..=max_degree`
/// at `xi`.
pub fn eval_all(max_degree: usize, xi: f64) -> Vec<f64> {
    let mut values = Vec::with_capacity(max_degree + 1);
    values.push(1.0);
    if max_degree == 0 {
        return values;
    }
    values.push(xi);
    for n in 1..max_degree {
        let next = (xi * values[n] - (n as f64).sqrt() * values[n - 1]) / ((n + 1) as f64).sqrt();
        values.push(next);
    }
    values
}

/// A Gauss-Hermite rule for the standard Gaussian measure.
///
/// Nodes are sorted increasingly and symmetric about zero; for an odd point
/// count the middle node is exactly `0.0`. Weights are positive and sum to
/// one. The rule also carries the barycentric weights of its nodes, so it
/// doubles as the interpolation stencil of the operator `U_{n-1}`.
#[derive(Debug, Clone)]
pub struct GaussHermiteRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    barycentric: Vec<f64>,
}

impl GaussHermiteRule {
    /// Builds the `n`-point rule by the Golub-Welsch approach: the nodes are
    /// the eigenvalues of the symmetric tridiagonal Jacobi matrix with
    /// off-diagonal entries `√k`, polished by two Newton steps on `H_n`, and
    /// the weights come from the Christoffel function
    /// `w_k = 1 / Σ_{j<n} H_j(ξ_k)²`.
    fn build(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyRule);
        }
        if n == 1 {
            return Ok(GaussHermiteRule {
                nodes: vec![0.0],
                weights: vec![1.0],
                barycentric: vec![1.0],
            });
        }

        let jacobi = DMatrix::<f64>::from_fn(n, n, |r, c| {
            if r + 1 == c {
                (c as f64).sqrt()
            } else if c + 1 == r {
                (r as f64).sqrt()
            } else {
                0.0
            }
        });
        let eigen = jacobi
            .try_symmetric_eigen(f64::EPSILON, 50 * n * n)
            .ok_or(Error::EigenConvergence { points: n })?;
        let mut nodes: Vec<f64> = eigen.eigenvalues.iter().copied().collect();
        nodes.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));

        for x in nodes.iter_mut() {
            *x = polish_root(n, *x);
        }

        // Enforce exact symmetry; the eigensolve only delivers it to
        // rounding. The middle node of an odd rule is pinned to 0 so that
        // rules of different sizes share it bit-for-bit.
        for k in 0..n / 2 {
            let s = 0.5 * (nodes[n - 1 - k] - nodes[k]);
            nodes[n - 1 - k] = s;
            nodes[k] = -s;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }

        let mut weights: Vec<f64> = nodes
            .iter()
            .map(|&x| {
                let h = eval_all(n - 1, x);
                1.0 / h.iter().map(|v| v * v).sum::<f64>()
            })
            .collect();
        for k in 0..n / 2 {
            let mean = 0.5 * (weights[k] + weights[n - 1 - k]);
            weights[k] = mean;
            weights[n - 1 - k] = mean;
        }
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= total;
        }
        // Push the remaining rounding residual into the central pair so the
        // sum is one to the last ulp.
        let residual = 1.0 - weights.iter().sum::<f64>();
        if n % 2 == 1 {
            weights[n / 2] += residual;
        } else {
            weights[n / 2 - 1] += residual / 2.0;
            weights[n / 2] += residual / 2.0;
        }

        let barycentric = barycentric_weights(&nodes);
        Ok(GaussHermiteRule {
            nodes,
            weights,
            barycentric,
        })
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// True for the (unused) empty rule; present for clippy's sake.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes in increasing order.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Quadrature weights, matching [`Self::nodes`] by position.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Applies the rule to integrate `f` against the standard Gaussian.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Values of the Lagrange cardinal polynomials of this rule's nodes at
    /// `x`, via the barycentric formula. The values sum to one; if `x` hits
    /// a node exactly the result is the corresponding unit vector.
    pub fn cardinal_values(&self, x: f64) -> Vec<f64> {
        let n = self.nodes.len();
        let mut values = vec![0.0; n];
        for (j, &node) in self.nodes.iter().enumerate() {
            if x == node {
                values[j] = 1.0;
                return values;
            }
        }
        let mut total = 0.0;
        for ((value, &weight), &node) in values.iter_mut().zip(&self.barycentric).zip(&self.nodes) {
            let t = weight / (x - node);
            *value = t;
            total += t;
        }
        for v in values.iter_mut() {
            *v /= total;
        }
        values
    }
}

/// Returns the shared `n`-point Gauss-Hermite rule, building it on first
/// use. Construction happens at most once per point count even under
/// concurrent callers.
pub fn rule(n: usize) -> Result<Arc<GaussHermiteRule>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<GaussHermiteRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(found) = cache.read().expect("rule cache poisoned").get(&n) {
        return Ok(Arc::clone(found));
    }
    let mut map = cache.write().expect("rule cache poisoned");
    if let Some(found) = map.get(&n) {
        return Ok(Arc::clone(found));
    }
    let built = Arc::new(GaussHermiteRule::build(n)?);
    map.insert(n, Arc::clone(&built));
    Ok(built)
}

/// Interpolates the univariate operator `U_level`: given the values of a
/// function at the nodes of the `level+1`-point rule, evaluates the
/// interpolating polynomial at `xi`.
pub fn interpolate(level: usize, values: &[f64], xi: f64) -> Result<f64> {
    let r = rule(level + 1)?;
    if values.len() != r.len() {
        return Err(Error::LengthMismatch {
            expected: r.len(),
            got: values.len(),
        });
    }
    let cardinal = r.cardinal_values(xi);
    Ok(cardinal.iter().zip(values).map(|(c, v)| c * v).sum())
}

/// `L²` norm of `U_level H_degree`, the interpolant of a Hermite polynomial.
///
/// By Gauss-weight orthogonality of the cardinal polynomials this equals
/// `(Σ_k H_degree(ξ_k)² w_k)^{1/2}` over the `level+1`-point rule. It is `1`
/// for `level ≥ degree` (the interpolation is exact) and `0` for
/// `level = degree - 1` (the nodes are the zeros of `H_degree`).
pub fn interpolant_norm(level: usize, degree: usize) -> Result<f64> {
    let r = rule(level + 1)?;
    let sum: f64 = r
        .nodes()
        .iter()
        .zip(r.weights())
        .map(|(&x, &w)| {
            let h = eval(degree, x);
            w * h * h
        })
        .sum();
    Ok(sum.sqrt())
}

/// Coefficients of `Δ_level H_degree = (U_level - U_{level-1}) H_degree` in
/// the orthonormal Hermite basis, indexed by degree `0..=degree`.
///
/// `Δ_level H_degree` vanishes identically for `level > degree` and equals
/// `H_degree` for `level = degree` (interpolation at the zeros of
/// `H_degree` annihilates it). Below the diagonal the coefficients are
/// computed by quadrature projection on a `degree+2`-point rule, which is
/// exact because every integrand is a polynomial of degree at most
/// `2·degree + 1`.
pub fn detail_hermite_coeffs(level: usize, degree: usize) -> Result<Vec<f64>> {
    let mut coeffs = vec![0.0; degree + 1];
    if level > degree {
        return Ok(coeffs);
    }
    if level == degree {
        coeffs[degree] = 1.0;
        return Ok(coeffs);
    }

    let fine = rule(level.max(degree) + 2)?;
    let upper = rule(level + 1)?;
    let upper_values: Vec<f64> = upper.nodes().iter().map(|&x| eval(degree, x)).collect();
    let lower = if level > 0 { Some(rule(level)?) } else { None };
    let lower_values: Option<Vec<f64>> = lower
        .as_ref()
        .map(|r| r.nodes().iter().map(|&x| eval(degree, x)).collect());

    for (&t, &w) in fine.nodes().iter().zip(fine.weights()) {
        let mut d: f64 = upper
            .cardinal_values(t)
            .iter()
            .zip(&upper_values)
            .map(|(c, v)| c * v)
            .sum();
        if let (Some(r), Some(vals)) = (&lower, &lower_values) {
            let low: f64 = r
                .cardinal_values(t)
                .iter()
                .zip(vals)
                .map(|(c, v)| c * v)
                .sum();
            d -= low;
        }
        let basis = eval_all(level, t);
        for (j, b) in basis.iter().enumerate() {
            coeffs[j] += w * d * b;
        }
    }
    Ok(coeffs)
}

/// `L²` norm of the detail `Δ_level H_degree`, by Parseval from
/// [`detail_hermite_coeffs`].
pub fn detail_norm(level: usize, degree: usize) -> Result<f64> {
    let coeffs = detail_hermite_coeffs(level, degree)?;
    Ok(coeffs.iter().map(|c| c * c).sum::<f64>().sqrt())
}

/// Two guarded Newton steps on `H_n`, using `H_n' = √n H_{n-1}`. Keeps the
/// eigenvalue estimate when a step fails to reduce the residual.
fn polish_root(n: usize, x0: f64) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    let mut x = x0;
    let h = eval_all(n, x);
    let mut residual = h[n].abs();
    for _ in 0..2 {
        let h = eval_all(n, x);
        let derivative = sqrt_n * h[n - 1];
        if derivative == 0.0 {
            break;
        }
        let candidate = x - h[n] / derivative;
        let r = eval(n, candidate).abs();
        if r < residual {
            x = candidate;
            residual = r;
        } else {
            break;
        }
    }
    x
}

/// Barycentric weights `1 / Π_{l≠j} (ξ_j - ξ_l)`, normalized to unit
/// maximum magnitude (the barycentric formula is scale invariant).
fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut weights = vec![1.0; n];
    for j in 0..n {
        for l in 0..n {
            if l != j {
                weights[j] *= nodes[j] - nodes[l];
            }
        }
        weights[j] = 1.0 / weights[j];
    }
    let scale = weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    for w in weights.iter_mut() {
        *w /= scale;
    }
    weights
}
