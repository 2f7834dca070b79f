//! A 1D lognormal diffusion problem used as the test model.
//!
//! The boundary value problem is `−(a u')' = f` on `[0, 1]` with
//! `u(0) = u(1) = 0` and the random diffusion coefficient
//!
//! ```text
//! log a(x, ξ) = σ Σ_{m=1}^{M} √2 (πm)^{−q} sin(mπx) ξ_m.
//! ```
//!
//! In one dimension the solution has the exact representation
//! `u(x) = ∫₀ˣ (K − F(y)) / a(y) dy` with `F(y) = ∫₀^y f` and the constant
//! `K = (∫₀¹ F/a) / (∫₀¹ 1/a)` chosen so that `u(1) = 0`. All integrals are
//! composite trapezoidal sums on one uniform grid; with matching rules the
//! discrete `u(1)` telescopes to zero, so the boundary condition holds in
//! the discrete system, not just in the limit.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::Error;
use crate::vector::NormedVector;
use crate::Result;

/// The default forcing term, `f(x) = 0.03 sin(2πx)`.
pub fn default_forcing(x: f64) -> f64 {
    0.03 * (2.0 * std::f64::consts::PI * x).sin()
}

/// Parameters of the log-diffusion expansion and of the spatial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldConfig {
    q: f64,
    sigma: f64,
    dims: u32,
    nx: usize,
}

impl FieldConfig {
    /// Validates and stores the parameters: decay exponent `q ≥ 1`,
    /// amplitude `sigma > 0`, truncation dimension `dims ≥ 1`, and a
    /// power-of-two interval count `nx ≥ 16`.
    pub fn new(q: f64, sigma: f64, dims: u32, nx: usize) -> Result<Self> {
        if !q.is_finite() || q < 1.0 {
            return Err(Error::InvalidParameter {
                what: "decay exponent q",
                value: q,
            });
        }
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::InvalidParameter {
                what: "amplitude sigma",
                value: sigma,
            });
        }
        if dims < 1 {
            return Err(Error::InvalidParameter {
                what: "truncation dimension",
                value: dims as f64,
            });
        }
        if nx < 16 || !nx.is_power_of_two() {
            return Err(Error::InvalidParameter {
                what: "spatial intervals nx",
                value: nx as f64,
            });
        }
        Ok(FieldConfig { q, sigma, dims, nx })
    }

    /// The decay exponent of the expansion.
    pub fn q(&self) -> f64 {
        self.q
    }

    /// The field amplitude.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Number of random variables the field keeps.
    pub fn dims(&self) -> u32 {
        self.dims
    }

    /// Number of spatial intervals; the grid has `nx + 1` nodes.
    pub fn nx(&self) -> usize {
        self.nx
    }
}

/// A function sampled on the uniform spatial grid `x_j = j Δx`,
/// `j = 0..=nx`, `Δx = 1/nx`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialFunction {
    values: Vec<f64>,
}

impl SpatialFunction {
    /// Wraps nodal values; the length fixes the grid.
    pub fn from_values(values: Vec<f64>) -> Self {
        assert!(values.len() >= 2, "a spatial grid needs at least two nodes");
        SpatialFunction { values }
    }

    /// Samples a function of `x` on a grid of `nx` intervals.
    pub fn sample(nx: usize, f: impl Fn(f64) -> f64) -> Self {
        let dx = 1.0 / nx as f64;
        SpatialFunction {
            values: (0..=nx).map(|j| f(j as f64 * dx)).collect(),
        }
    }

    /// The nodal values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The grid spacing.
    pub fn dx(&self) -> f64 {
        1.0 / (self.values.len() - 1) as f64
    }

    /// Largest absolute nodal value.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// The `H¹₀` seminorm by forward differences:
    /// `√(Σ_j ((v_{j+1} − v_j)/Δx)² Δx)`.
    pub fn h10_norm(&self) -> f64 {
        let dx = self.dx();
        let sum: f64 = self
            .values
            .windows(2)
            .map(|w| {
                let d = w[1] - w[0];
                d * d
            })
            .sum();
        (sum / dx).sqrt()
    }
}

impl NormedVector for SpatialFunction {
    fn zero_like(&self) -> Self {
        SpatialFunction {
            values: vec![0.0; self.values.len()],
        }
    }

    fn scale(&mut self, a: f64) {
        for v in &mut self.values {
            *v *= a;
        }
    }

    fn axpy(&mut self, a: f64, x: &Self) {
        debug_assert_eq!(self.values.len(), x.values.len());
        for (s, &v) in self.values.iter_mut().zip(&x.values) {
            *s += a * v;
        }
    }

    fn norm(&self) -> f64 {
        self.h10_norm()
    }
}

/// The diffusion model: precomputed expansion modes, the antiderivative of
/// the forcing, and a counter of ignored trailing coordinates.
#[derive(Debug)]
pub struct LognormalModel {
    config: FieldConfig,
    /// `modes[m-1][j] = σ √2 (πm)^{−q} sin(mπ x_j)`.
    modes: Vec<Vec<f64>>,
    /// `F_j = ∫₀^{x_j} f`, by the trapezoidal rule.
    forcing_primitive: Vec<f64>,
    truncations: AtomicUsize,
}

impl LognormalModel {
    /// A model with the default forcing.
    pub fn new(config: FieldConfig) -> Self {
        Self::with_forcing(config, default_forcing)
    }

    /// A model with a custom forcing term.
    pub fn with_forcing(config: FieldConfig, f: impl Fn(f64) -> f64) -> Self {
        let nx = config.nx;
        let dx = 1.0 / nx as f64;
        let pi = std::f64::consts::PI;
        let modes = (1..=config.dims)
            .map(|m| {
                let amplitude = config.sigma * 2f64.sqrt() * (pi * m as f64).powf(-config.q);
                (0..=nx)
                    .map(|j| amplitude * (m as f64 * pi * j as f64 * dx).sin())
                    .collect()
            })
            .collect();
        let samples: Vec<f64> = (0..=nx).map(|j| f(j as f64 * dx)).collect();
        let forcing_primitive = cumulative_trapezoid(&samples, dx);
        LognormalModel {
            config,
            modes,
            forcing_primitive,
            truncations: AtomicUsize::new(0),
        }
    }

    /// The configuration in use.
    pub fn config(&self) -> &FieldConfig {
        &self.config
    }

    /// How many evaluations carried nonzero coordinates beyond the
    /// truncation dimension; those coordinates are ignored.
    pub fn truncation_events(&self) -> usize {
        self.truncations.load(Ordering::Relaxed)
    }

    /// The log-diffusion field at a parameter point. Coordinates beyond
    /// the truncation dimension are ignored and counted; missing trailing
    /// coordinates count as zero.
    pub fn log_diffusion(&self, xi: &[f64]) -> SpatialFunction {
        let dims = self.config.dims as usize;
        if xi.len() > dims && xi[dims..].iter().any(|&c| c != 0.0) {
            self.truncations.fetch_add(1, Ordering::Relaxed);
        }
        let mut values = vec![0.0; self.config.nx + 1];
        for (mode, &coord) in self.modes.iter().zip(xi) {
            if coord == 0.0 {
                continue;
            }
            for (v, &phi) in values.iter_mut().zip(mode) {
                *v += coord * phi;
            }
        }
        SpatialFunction { values }
    }

    /// Solves the boundary value problem at a parameter point through the
    /// exact representation. Fails if `exp` of the log field overflows.
    pub fn solve(&self, xi: &[f64]) -> Result<SpatialFunction> {
        let log_a = self.log_diffusion(xi);
        let mut field = log_a.values;
        for v in &mut field {
            *v = v.exp();
            if !v.is_finite() {
                let xi_norm = xi.iter().map(|c| c * c).sum::<f64>().sqrt();
                return Err(Error::NonFiniteField { xi_norm });
            }
        }
        Ok(self.solve_in_field(&field))
    }

    /// Solves with an explicitly given positive diffusion field on the
    /// model grid.
    pub fn solve_with_field(&self, field: &[f64]) -> Result<SpatialFunction> {
        if field.len() != self.config.nx + 1 {
            return Err(Error::LengthMismatch {
                expected: self.config.nx + 1,
                got: field.len(),
            });
        }
        if let Some(&bad) = field.iter().find(|v| !v.is_finite() || **v <= 0.0) {
            return Err(Error::InvalidParameter {
                what: "diffusion field value",
                value: bad,
            });
        }
        Ok(self.solve_in_field(field))
    }

    fn solve_in_field(&self, field: &[f64]) -> SpatialFunction {
        let dx = 1.0 / self.config.nx as f64;
        // K = T[F/a] / T[1/a] with the same trapezoidal rule throughout,
        // so the cumulative integral of (K − F)/a returns to zero at x = 1.
        let mut f_over_a = 0.0;
        let mut one_over_a = 0.0;
        for j in 0..self.config.nx {
            let left = 1.0 / field[j];
            let right = 1.0 / field[j + 1];
            f_over_a += 0.5
                * dx
                * (self.forcing_primitive[j] * left + self.forcing_primitive[j + 1] * right);
            one_over_a += 0.5 * dx * (left + right);
        }
        let k = f_over_a / one_over_a;
        let integrand: Vec<f64> = self
            .forcing_primitive
            .iter()
            .zip(field)
            .map(|(&f, &a)| (k - f) / a)
            .collect();
        SpatialFunction {
            values: cumulative_trapezoid(&integrand, dx),
        }
    }

    /// The solution as a closure suitable for collocation drivers.
    pub fn solution_map(&self) -> impl Fn(&[f64]) -> Result<SpatialFunction> + Sync + '_ {
        move |xi: &[f64]| self.solve(xi)
    }
}

/// `out[j] = Σ_{i<j} ½ Δx (v_i + v_{i+1})`, the running trapezoidal
/// integral with `out[0] = 0`.
fn cumulative_trapezoid(values: &[f64], dx: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * dx * (w[0] + w[1]);
        out.push(acc);
    }
    out
}
