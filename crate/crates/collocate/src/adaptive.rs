//! Greedy index-set selection.
//!
//! Both algorithms grow a monotone set one index per step, starting from
//! `Λ̃₁ = {0}` and choosing among the admissible neighbors. The a-priori
//! variant ranks neighbors by the closed-form weight `ĉ_ν` and never
//! touches the model; the a-posteriori variant probes each neighbor's
//! detail on its own tensor grid and ranks by profit, the estimated
//! surplus norm per new point. Ties go to the canonically smallest index,
//! so runs are reproducible.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::collocation::{detail_from_store, ValueStore};
use crate::error::Error;
use crate::multi_index::{tensor_grid, MonotoneSet, MultiIndex};
use crate::vector::NormedVector;
use crate::Result;

/// Parameters of the a-priori selection weight
/// `ĉ_ν = ∏_{m ∈ supp ν} ν_m^{2θ+2−r} τ_m^{−2}` with `τ_m = m^{q−1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct APrioriWeights {
    q: f64,
    theta: f64,
    r: f64,
}

impl APrioriWeights {
    /// Validates `q > 1` (so the dimension weights `τ_m` increase) and
    /// `r > 2(θ+1)` (so higher levels cost more).
    pub fn new(q: f64, theta: f64, r: f64) -> Result<Self> {
        if !q.is_finite() || q <= 1.0 {
            return Err(Error::InvalidParameter {
                what: "smoothness exponent q",
                value: q,
            });
        }
        if !theta.is_finite() || !r.is_finite() || r <= 2.0 * (theta + 1.0) {
            return Err(Error::InvalidParameter {
                what: "differentiability order r",
                value: r,
            });
        }
        Ok(APrioriWeights { q, theta, r })
    }

    /// The Gauss-Hermite defaults: `θ = 1` and `r = 10 + 4(q−1)`.
    pub fn gauss_hermite(q: f64) -> Result<Self> {
        Self::new(q, 1.0, 10.0 + 4.0 * (q - 1.0))
    }

    /// The smoothness exponent.
    pub fn q(&self) -> f64 {
        self.q
    }

    /// The node-growth exponent.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// The differentiability order.
    pub fn r(&self) -> f64 {
        self.r
    }

    /// The dimension weight `τ_m = m^{q−1}`.
    pub fn tau(&self, dim: u32) -> f64 {
        (dim as f64).powf(self.q - 1.0)
    }

    /// The selection weight `ĉ_ν`. Dimensions at level zero contribute a
    /// factor of one, so `ĉ₀ = 1`.
    pub fn c_hat(&self, nu: &MultiIndex) -> f64 {
        let exponent = 2.0 * self.theta + 2.0 - self.r;
        nu.entries()
            .iter()
            .map(|&(dim, level)| (level as f64).powf(exponent) * self.tau(dim).powi(-2))
            .product()
    }
}

/// The summability weight `b_ν = ∏_m Σ_{l=0}^{min(r,ν_m)} C(ν_m,l) τ_m^{2l}`.
pub fn smoothness_weight(nu: &MultiIndex, tau: impl Fn(u32) -> f64, r: u32) -> f64 {
    nu.entries()
        .iter()
        .map(|&(dim, level)| {
            let t2 = tau(dim).powi(2);
            let mut binomial = 1.0;
            let mut power = 1.0;
            let mut sum = 1.0;
            for l in 0..level.min(r) {
                binomial *= (level - l) as f64 / (l + 1) as f64;
                power *= t2;
                sum += binomial * power;
            }
            sum
        })
        .product()
}

/// One accepted step of a selection run.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// The step number `N`, counting the seed set as 1.
    pub step: usize,
    /// The index added at this step.
    pub chosen: MultiIndex,
    /// The selection criterion of the chosen index (`ĉ_ν` or profit).
    pub criterion: f64,
    /// `|Ξ_{Λ̃_N}|` after the insertion.
    pub grid_points: usize,
    /// Size of the extended grid `Ξ_{Λ̃_N} ∪ Ξ_{N(Λ̃_{N−1})}`; for the
    /// a-priori algorithm this equals `grid_points`.
    pub extended_points: usize,
    /// Number of activated dimensions after the insertion.
    pub active_dims: usize,
}

/// The result of a selection run: the final set and one record per added
/// index.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveState {
    lambda: MonotoneSet,
    history: Vec<StepRecord>,
    model_evaluations: usize,
}

impl AdaptiveState {
    /// The selected monotone set.
    pub fn lambda(&self) -> &MonotoneSet {
        &self.lambda
    }

    /// Per-step records; the seed step has none, so the length is
    /// `|Λ| − 1`.
    pub fn history(&self) -> &[StepRecord] {
        &self.history
    }

    /// Model evaluations consumed by the run.
    pub fn model_evaluations(&self) -> usize {
        self.model_evaluations
    }
}

/// An a-posteriori run: the state, the value cache over the extended grid,
/// and the extended set itself (final `Λ` plus every probed neighbor).
#[derive(Debug)]
pub struct APosterioriRun<V> {
    pub state: AdaptiveState,
    pub values: ValueStore<V>,
    pub extended: MonotoneSet,
}

/// Grows the set to `n_max` indices by the a-priori criterion. Consumes no
/// model evaluations.
pub fn run_apriori(weights: &APrioriWeights, m_buffer: u32, n_max: usize) -> AdaptiveState {
    assert!(n_max >= 1, "a selection run needs at least the seed step");
    assert!(m_buffer >= 1, "a zero buffer admits no neighbors");
    let mut lambda = MonotoneSet::singleton_zero();
    let mut history = Vec::with_capacity(n_max - 1);
    for step in 2..=n_max {
        let neighbors = lambda.admissible_neighbors(m_buffer);
        let (chosen, criterion) =
            argmax_in_order(neighbors.iter().map(|nu| (nu.clone(), weights.c_hat(nu))))
                .expect("a monotone set always has admissible neighbors");
        lambda
            .insert(chosen.clone())
            .expect("neighbors are admissible by construction");
        let grid_points = lambda.point_count().exact;
        history.push(StepRecord {
            step,
            chosen,
            criterion,
            grid_points,
            extended_points: grid_points,
            active_dims: lambda.active_dims(),
        });
    }
    AdaptiveState {
        lambda,
        history,
        model_evaluations: 0,
    }
}

/// Grows the set to `n_max` indices by estimated profit
/// `max_{t ∈ Ξ^{(ν)}} ρ(t) ‖(Δ_ν u)(t)‖ / ∏_m (1 + ν_m)` with the Gaussian
/// density weight `ρ(ξ) = exp(−½ Σ ξ_m²)`.
///
/// A neighbor's profit does not depend on the set it borders, so profits
/// are computed once and cached; each step only probes neighbors created
/// by the last insertion. All probe values stay in the shared store, which
/// therefore covers exactly the extended grid.
pub fn run_aposteriori<V, F, G>(
    model: &F,
    m_buffer: u32,
    n_max: usize,
    error_norm: G,
) -> Result<APosterioriRun<V>>
where
    V: NormedVector,
    F: Fn(&[f64]) -> Result<V> + Sync,
    G: Fn(&V) -> f64 + Sync,
{
    assert!(n_max >= 1, "a selection run needs at least the seed step");
    assert!(m_buffer >= 1, "a zero buffer admits no neighbors");
    let mut lambda = MonotoneSet::singleton_zero();
    let mut store: ValueStore<V> = ValueStore::new();
    store.ensure_points(lambda.sparse_grid_points(), model)?;
    let mut profits: BTreeMap<MultiIndex, f64> = BTreeMap::new();
    let mut history = Vec::with_capacity(n_max - 1);

    for step in 2..=n_max {
        let neighbors = lambda.admissible_neighbors(m_buffer);
        let fresh: Vec<MultiIndex> = neighbors
            .iter()
            .filter(|nu| !profits.contains_key(*nu))
            .cloned()
            .collect();
        store.ensure_points(fresh.iter().flat_map(tensor_grid), model)?;
        let probed: Vec<(MultiIndex, f64)> = fresh
            .into_par_iter()
            .map(|nu| {
                let p = profit(&nu, &store, &error_norm)?;
                Ok((nu, p))
            })
            .collect::<Result<_>>()?;
        profits.extend(probed);

        let (chosen, criterion) =
            argmax_in_order(neighbors.iter().map(|nu| (nu.clone(), profits[nu])))
                .expect("a monotone set always has admissible neighbors");
        lambda
            .insert(chosen.clone())
            .expect("neighbors are admissible by construction");
        history.push(StepRecord {
            step,
            chosen,
            criterion,
            grid_points: lambda.point_count().exact,
            extended_points: store.len(),
            active_dims: lambda.active_dims(),
        });
    }

    let mut extended = lambda.clone();
    for nu in profits.keys() {
        if !extended.contains(nu) {
            extended.insert(nu.clone())?;
        }
    }
    let model_evaluations = store.evaluations();
    Ok(APosterioriRun {
        state: AdaptiveState {
            lambda,
            history,
            model_evaluations,
        },
        values: store,
        extended,
    })
}

/// The profit of one neighbor from values already in the store.
fn profit<V, G>(nu: &MultiIndex, store: &ValueStore<V>, error_norm: &G) -> Result<f64>
where
    V: NormedVector,
    G: Fn(&V) -> f64 + Sync,
{
    let mut best = 0.0f64;
    for point in tensor_grid(nu) {
        let coords = point.coordinates(0)?;
        let density = (-0.5 * coords.iter().map(|c| c * c).sum::<f64>()).exp();
        let delta = detail_from_store(nu, store, &coords);
        best = best.max(density * error_norm(&delta));
    }
    Ok(best / nu.envelope_len() as f64)
}

/// First strict maximum of an ordered candidate sequence, so ties resolve
/// to the earliest (canonically smallest) candidate.
fn argmax_in_order(
    candidates: impl Iterator<Item = (MultiIndex, f64)>,
) -> Option<(MultiIndex, f64)> {
    let mut best: Option<(MultiIndex, f64)> = None;
    for (nu, value) in candidates {
        match &best {
            Some((_, incumbent)) if value <= *incumbent => {}
            _ => best = Some((nu, value)),
        }
    }
    best
}
