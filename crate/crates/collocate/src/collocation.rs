//! The sparse collocation operator and its Hermite expansion.
//!
//! Given a monotone set `Λ` and a model `u`, the operator
//! `U_Λ u = Σ_{i∈Λ} Δ_i u` is assembled in combination-technique form
//! `Σ_k c_k ⊗_m U_{k_m}` over a cache of model values on the sparse grid
//! `Ξ_Λ`. Values are keyed symbolically, so the model runs exactly once per
//! distinct point even as `Λ` grows. Outputs are any [`NormedVector`]; the
//! interpolant only forms linear combinations of them.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;

use crate::error::Error;
use crate::hermite;
use crate::multi_index::{
    tensor_grid, CombinationCoefficients, GridPoint, MonotoneSet, MultiIndex,
};
use crate::vector::NormedVector;
use crate::Result;

/// A cache of model evaluations on sparse-grid points.
///
/// Missing points are evaluated in parallel and inserted in canonical point
/// order, so the final content and the evaluation count are deterministic.
#[derive(Debug, Clone)]
pub struct ValueStore<V> {
    map: HashMap<GridPoint, V>,
    evaluations: usize,
}

impl<V> Default for ValueStore<V> {
    fn default() -> Self {
        ValueStore {
            map: HashMap::new(),
            evaluations: 0,
        }
    }
}

impl<V: NormedVector> ValueStore<V> {
    /// An empty store.
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of stored points.
    pub fn len(&self) -> usize {
        self.map.len()
    }

    /// True when nothing is stored.
    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Total model evaluations this store has performed.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// True when the point already has a value.
    pub fn contains(&self, point: &GridPoint) -> bool {
        self.map.contains_key(point)
    }

    /// The stored value at a point.
    pub fn get(&self, point: &GridPoint) -> Option<&V> {
        self.map.get(point)
    }

    /// Evaluates the model at every listed point that is not yet stored.
    /// Returns the number of new evaluations. The model receives
    /// coordinates up to the point's highest active dimension; trailing
    /// zeros are implied.
    pub fn ensure_points<F>(
        &mut self,
        points: impl IntoIterator<Item = GridPoint>,
        model: &F,
    ) -> Result<usize>
    where
        F: Fn(&[f64]) -> Result<V> + Sync,
    {
        let missing: BTreeSet<GridPoint> = points
            .into_iter()
            .filter(|p| !self.map.contains_key(p))
            .collect();
        let evaluated: Vec<(GridPoint, V)> = missing
            .into_par_iter()
            .map(|point| {
                let coords = point.coordinates(0)?;
                match model(&coords) {
                    Ok(value) => Ok((point, value)),
                    Err(source) => Err(Error::Model {
                        point: coords,
                        detail: source.to_string(),
                    }),
                }
            })
            .collect::<Result<_>>()?;
        let count = evaluated.len();
        for (point, value) in evaluated {
            self.map.insert(point, value);
        }
        self.evaluations += count;
        Ok(count)
    }
}

/// Evaluates the full tensor interpolant `⊗_m U_{k_m}` of stored values at
/// `xi`. Coordinates beyond the length of `xi` count as zero.
fn tensor_eval<V: NormedVector>(k: &MultiIndex, store: &ValueStore<V>, xi: &[f64]) -> V {
    let cardinals: Vec<(u32, u32, Vec<f64>)> = k
        .entries()
        .iter()
        .map(|&(dim, level)| {
            let size = level + 1;
            let rule = hermite::rule(size as usize).expect("Gauss-Hermite rule construction");
            let x = xi.get(dim as usize - 1).copied().unwrap_or(0.0);
            (dim, size, rule.cardinal_values(x))
        })
        .collect();

    let mut node = vec![0u32; cardinals.len()];
    let mut acc: Option<V> = None;
    loop {
        let mut weight = 1.0;
        for (pos, (_, _, card)) in cardinals.iter().enumerate() {
            weight *= card[node[pos] as usize];
        }
        if weight != 0.0 {
            let point = GridPoint::from_raw(
                cardinals
                    .iter()
                    .zip(&node)
                    .map(|(&(dim, size, _), &index)| (dim, size, index)),
            );
            let value = store.get(&point).expect("sparse grid value present");
            match acc.as_mut() {
                None => {
                    let mut v = value.clone();
                    v.scale(weight);
                    acc = Some(v);
                }
                Some(a) => a.axpy(weight, value),
            }
        }
        let mut pos = 0;
        while pos < node.len() {
            node[pos] += 1;
            if node[pos] < cardinals[pos].1 {
                break;
            }
            node[pos] = 0;
            pos += 1;
        }
        if pos == node.len() {
            break;
        }
    }
    acc.expect("cardinal weights cannot all vanish")
}

/// Evaluates the detail `Δ_ν u = Σ_{z ∈ {0,1}^supp(ν)} (−1)^{|z|} U_{ν−z} u`
/// from stored values.
fn detail_eval<V: NormedVector>(nu: &MultiIndex, store: &ValueStore<V>, xi: &[f64]) -> V {
    let support: Vec<u32> = nu.support().collect();
    let mut acc: Option<V> = None;
    for mask in 0u32..(1 << support.len()) {
        let mut k = nu.clone();
        let mut sign = 1.0;
        for (bit, &dim) in support.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                k = k.decremented(dim).expect("support dimensions are positive");
                sign = -sign;
            }
        }
        let term = tensor_eval(&k, store, xi);
        match acc.as_mut() {
            None => {
                let mut v = term;
                v.scale(sign);
                acc = Some(v);
            }
            Some(a) => a.axpy(sign, &term),
        }
    }
    acc.expect("the window of a detail operator is nonempty")
}

/// The sparse collocation operator `U_Λ` over stored model values.
#[derive(Debug, Clone)]
pub struct SparseCollocation<V> {
    lambda: MonotoneSet,
    coeffs: CombinationCoefficients,
    values: ValueStore<V>,
    dims_active: u32,
}

impl<V: NormedVector> SparseCollocation<V> {
    /// Evaluates the model on the sparse grid of `lambda` and assembles the
    /// operator. The model runs exactly once per distinct grid point.
    pub fn build<F>(lambda: MonotoneSet, model: &F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Result<V> + Sync,
    {
        let mut values = ValueStore::new();
        values.ensure_points(lambda.sparse_grid_points(), model)?;
        Ok(Self::assemble(lambda, values))
    }

    /// Assembles the operator over an existing store, copying the values of
    /// the sparse grid of `lambda`. Fails if any needed point is missing.
    pub fn from_store(lambda: MonotoneSet, source: &ValueStore<V>) -> Result<Self> {
        let mut values = ValueStore::new();
        for point in lambda.sparse_grid_points() {
            let value = source.get(&point).ok_or_else(|| Error::MissingValue {
                point: format!("{:?}", point.entries()),
            })?;
            values.map.insert(point, value.clone());
        }
        Ok(Self::assemble(lambda, values))
    }

    fn assemble(lambda: MonotoneSet, values: ValueStore<V>) -> Self {
        let coeffs = lambda.combination_coefficients();
        let dims_active = lambda.max_support_dim();
        SparseCollocation {
            lambda,
            coeffs,
            values,
            dims_active,
        }
    }

    /// The index set.
    pub fn lambda(&self) -> &MonotoneSet {
        &self.lambda
    }

    /// The combination coefficients in use.
    pub fn coefficients(&self) -> &CombinationCoefficients {
        &self.coeffs
    }

    /// The value cache.
    pub fn values(&self) -> &ValueStore<V> {
        &self.values
    }

    /// The largest dimension the operator interpolates in.
    pub fn dims_active(&self) -> u32 {
        self.dims_active
    }

    /// Evaluates `U_Λ u` at a parameter point. Coordinates beyond the
    /// length of `xi` count as zero.
    pub fn evaluate(&self, xi: &[f64]) -> V {
        let mut acc: Option<V> = None;
        for (k, c) in self.coeffs.pairs() {
            let term = tensor_eval(k, &self.values, xi);
            let c = *c as f64;
            match acc.as_mut() {
                None => {
                    let mut v = term;
                    v.scale(c);
                    acc = Some(v);
                }
                Some(a) => a.axpy(c, &term),
            }
        }
        acc.expect("combination coefficients of a nonempty set are nonempty")
    }

    /// Converts the operator into its Hermite expansion: each tensor term
    /// is projected onto `{H_j : j ≤ k}` with its own quadrature rule
    /// (exact at that degree), weighted by the combination coefficients.
    pub fn to_hermite(&self) -> HermiteExpansion<V> {
        let mut terms: std::collections::BTreeMap<MultiIndex, V> =
            std::collections::BTreeMap::new();
        for (k, c) in self.coeffs.pairs() {
            let c = *c as f64;
            // Per active dimension: projection matrix H_j(x_t) w_t.
            let dims: Vec<(u32, u32, Vec<Vec<f64>>)> = k
                .entries()
                .iter()
                .map(|&(dim, level)| {
                    let size = (level + 1) as usize;
                    let rule = hermite::rule(size).expect("Gauss-Hermite rule construction");
                    let mut matrix = vec![vec![0.0; size]; size];
                    for (t, (&x, &w)) in rule.nodes().iter().zip(rule.weights()).enumerate() {
                        let basis = hermite::eval_all(level as usize, x);
                        for (j, row) in matrix.iter_mut().enumerate() {
                            row[t] = basis[j] * w;
                        }
                    }
                    (dim, level + 1, matrix)
                })
                .collect();

            let rank = dims.len();
            let mut degree = vec![0u32; rank];
            loop {
                let index = MultiIndex::from_pairs(
                    dims.iter().zip(&degree).map(|(&(dim, _, _), &j)| (dim, j)),
                );
                {
                    let entry = terms.entry(index).or_insert_with(|| {
                        let any = self
                            .values
                            .map
                            .values()
                            .next()
                            .expect("store of a built operator is nonempty");
                        any.zero_like()
                    });
                    let mut node = vec![0u32; rank];
                    loop {
                        let mut weight = c;
                        for (pos, (_, _, matrix)) in dims.iter().enumerate() {
                            weight *= matrix[degree[pos] as usize][node[pos] as usize];
                        }
                        if weight != 0.0 {
                            let point = GridPoint::from_raw(
                                dims.iter()
                                    .zip(&node)
                                    .map(|(&(dim, size, _), &t)| (dim, size, t)),
                            );
                            let value = self.values.get(&point).expect("sparse grid value present");
                            entry.axpy(weight, value);
                        }
                        let mut pos = 0;
                        while pos < rank {
                            node[pos] += 1;
                            if node[pos] < dims[pos].1 {
                                break;
                            }
                            node[pos] = 0;
                            pos += 1;
                        }
                        if pos == rank {
                            break;
                        }
                    }
                }
                let mut pos = 0;
                while pos < rank {
                    degree[pos] += 1;
                    if degree[pos] <= k.entries()[pos].1 {
                        break;
                    }
                    degree[pos] = 0;
                    pos += 1;
                }
                if pos == rank {
                    break;
                }
            }
        }
        HermiteExpansion { terms }
    }
}

/// The detail (surplus) operator `Δ_ν` applied to a model, evaluable
/// anywhere.
///
/// Holds its own value cache over the window grids `Ξ^{(k)}`,
/// `ν − 1 ≤ k ≤ ν`.
#[derive(Debug, Clone)]
pub struct DetailOperator<V> {
    nu: MultiIndex,
    values: ValueStore<V>,
}

impl<V: NormedVector> DetailOperator<V> {
    /// Evaluates the model on the window grids of `ν` and returns the
    /// evaluable detail.
    pub fn new<F>(nu: MultiIndex, model: &F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Result<V> + Sync,
    {
        let mut values = ValueStore::new();
        let support: Vec<u32> = nu.support().collect();
        let mut window_points = Vec::new();
        for mask in 0u32..(1 << support.len()) {
            let mut k = nu.clone();
            for (bit, &dim) in support.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    k = k.decremented(dim).expect("support dimensions are positive");
                }
            }
            window_points.extend(tensor_grid(&k));
        }
        values.ensure_points(window_points, model)?;
        Ok(DetailOperator { nu, values })
    }

    /// The index of this detail.
    pub fn index(&self) -> &MultiIndex {
        &self.nu
    }

    /// Evaluates `Δ_ν u` at a parameter point.
    pub fn evaluate(&self, xi: &[f64]) -> V {
        detail_eval(&self.nu, &self.values, xi)
    }
}

/// Evaluates `Δ_ν u` reading an external store that already covers the
/// window grids of `ν`.
pub fn detail_from_store<V: NormedVector>(nu: &MultiIndex, store: &ValueStore<V>, xi: &[f64]) -> V {
    detail_eval(nu, store, xi)
}

/// A Hermite (polynomial chaos) expansion `Σ_ν f_ν H_ν`.
#[derive(Debug, Clone)]
pub struct HermiteExpansion<V> {
    terms: std::collections::BTreeMap<MultiIndex, V>,
}

impl<V: NormedVector> HermiteExpansion<V> {
    /// The coefficients, keyed by multi-index in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &V)> {
        self.terms.iter()
    }

    /// Number of terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// True when no term is present.
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The coefficient of one index.
    pub fn coefficient(&self, nu: &MultiIndex) -> Option<&V> {
        self.terms.get(nu)
    }

    /// Evaluates the expansion at a parameter point. Coordinates beyond the
    /// length of `xi` count as zero.
    pub fn evaluate(&self, xi: &[f64]) -> V {
        let max_dim = self
            .terms
            .keys()
            .map(|nu| nu.max_support_dim())
            .max()
            .unwrap_or(0) as usize;
        let max_degree = self
            .terms
            .keys()
            .flat_map(|nu| nu.entries().iter().map(|&(_, l)| l))
            .max()
            .unwrap_or(0) as usize;
        let basis: Vec<Vec<f64>> = (0..max_dim)
            .map(|d| hermite::eval_all(max_degree, xi.get(d).copied().unwrap_or(0.0)))
            .collect();
        let mut acc: Option<V> = None;
        for (nu, coeff) in &self.terms {
            let mut weight = 1.0;
            for &(dim, level) in nu.entries() {
                weight *= basis[dim as usize - 1][level as usize];
            }
            match acc.as_mut() {
                None => {
                    let mut v = coeff.clone();
                    v.scale(weight);
                    acc = Some(v);
                }
                Some(a) => a.axpy(weight, coeff),
            }
        }
        acc.expect("expansion is nonempty")
    }

    /// Terms sorted by decreasing coefficient norm, ties by canonical index
    /// order.
    pub fn sorted_terms(&self) -> Vec<(&MultiIndex, &V, f64)> {
        let mut sorted: Vec<(&MultiIndex, &V, f64)> =
            self.terms.iter().map(|(nu, v)| (nu, v, v.norm())).collect();
        sorted.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap().then_with(|| a.0.cmp(b.0)));
        sorted
    }

    /// The best-N-term curve: terms are sorted by decreasing coefficient
    /// norm and the metric is called once per prefix, in growing order, so
    /// a stateful metric can update incrementally. Returns `(N, error)`
    /// pairs for `N = 1..=len`.
    pub fn best_n_term_curve<F>(&self, mut error_metric: F) -> Vec<(usize, f64)>
    where
        F: FnMut(&[(MultiIndex, V)]) -> f64,
    {
        let sorted = self.sorted_terms();
        let mut prefix: Vec<(MultiIndex, V)> = Vec::with_capacity(sorted.len());
        let mut curve = Vec::with_capacity(sorted.len());
        for (n, (nu, coeff, _)) in sorted.into_iter().enumerate() {
            prefix.push(((*nu).clone(), (*coeff).clone()));
            curve.push((n + 1, error_metric(&prefix)));
        }
        curve
    }
}

/// Brute-force worst-case interpolation error of a Hermite polynomial:
/// the maximum of `‖Σ_{i∈S} Δ_i H_ν‖_{L²}` over all subsets `S ⊆ R_ν`
/// (equivalently over complements of arbitrary `Λ ⊆ R_ν`). Norms are exact
/// by Parseval in the tensor Hermite basis.
pub fn worst_case_error(nu: &MultiIndex) -> Result<f64> {
    const CAP: u128 = 12;
    let size = nu.envelope_len();
    if size > CAP {
        return Err(Error::EnvelopeTooLarge { size, cap: CAP });
    }

    let members: Vec<MultiIndex> = nu.envelope().iter().cloned().collect();
    let support: Vec<(u32, u32)> = nu.entries().to_vec();

    // Univariate detail coefficients per support dimension: delta[m][i][j]
    // is the H_j coefficient of Δ_i H_{ν_m}.
    let mut delta: Vec<Vec<Vec<f64>>> = Vec::with_capacity(support.len());
    for &(_, level) in &support {
        let mut per_level = Vec::with_capacity(level as usize + 1);
        for i in 0..=level {
            per_level.push(hermite::detail_hermite_coeffs(i as usize, level as usize)?);
        }
        delta.push(per_level);
    }

    // Coefficient tensor of Δ_i H_ν for each member of the envelope, laid
    // out in mixed radix over the support.
    let tensor_len = size as usize;
    let tensors: Vec<Vec<f64>> = members
        .iter()
        .map(|i| {
            let mut tensor = vec![0.0; tensor_len];
            let mut degree = vec![0u32; support.len()];
            for slot in tensor.iter_mut() {
                let mut value = 1.0;
                for (pos, &(dim, _)) in support.iter().enumerate() {
                    value *= delta[pos][i.level(dim) as usize][degree[pos] as usize];
                }
                *slot = value;
                for (pos, &(_, level)) in support.iter().enumerate() {
                    degree[pos] += 1;
                    if degree[pos] <= level {
                        break;
                    }
                    degree[pos] = 0;
                }
            }
            tensor
        })
        .collect();

    let mut worst = 0.0f64;
    let mut sum = vec![0.0; tensor_len];
    for mask in 0u32..(1u32 << members.len()) {
        sum.iter_mut().for_each(|s| *s = 0.0);
        for (bit, tensor) in tensors.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                for (s, t) in sum.iter_mut().zip(tensor) {
                    *s += t;
                }
            }
        }
        let norm = sum.iter().map(|s| s * s).sum::<f64>().sqrt();
        worst = worst.max(norm);
    }
    Ok(worst)
}
