//! Convergence experiments: adaptive selection runs with Monte Carlo error
//! estimation against a high-dimensional reference solution.

use collocate::collocation::detail_from_store;
use collocate::hermite;
use collocate::lognormal::{FieldConfig, LognormalModel, SpatialFunction};
use collocate::multi_index::tensor_grid;
use collocate::{
    run_aposteriori, run_apriori, APrioriWeights, MonotoneSet, MultiIndex, NormedVector,
    SparseCollocation, StepRecord, ValueStore,
};
use rayon::prelude::*;

use crate::config::{Algo, CliError, Settings};
use crate::sampling::GaussianSampler;

/// A fully specified convergence run.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub q: f64,
    pub sigma: f64,
    /// Parameter dimensions retained by the collocated model.
    pub model_dims: u32,
    /// Parameter dimensions of the Monte Carlo reference solution.
    pub reference_dims: u32,
    pub n_mc: usize,
    pub seed: u64,
    pub n_max: usize,
    pub m_buffer: u32,
    pub algo: Algo,
    pub nx: usize,
}

impl ExperimentConfig {
    /// Builds the run configuration for `cmd_converge`. The model keeps all
    /// reference dimensions unless `M` narrows it explicitly.
    pub fn from_settings(settings: &Settings) -> Result<Self, CliError> {
        let model_dims = match &settings.model_dims {
            None => settings.reference_dims,
            Some(dims) if dims.len() == 1 => dims[0],
            Some(_) => {
                return Err(CliError::Config(
                    "converge takes a single M; use dimsweep for a list".into(),
                ))
            }
        };
        Ok(ExperimentConfig {
            q: settings.q,
            sigma: settings.sigma,
            model_dims,
            reference_dims: settings.reference_dims,
            n_mc: settings.n_mc,
            seed: settings.require_seed()?,
            n_max: settings.n_max,
            m_buffer: settings.m_buffer,
            algo: settings.algo,
            nx: settings.nx,
        })
    }

    /// The dimsweep variant: the reference uses the same truncation as the
    /// model, so each curve isolates the collocation error at that `M`.
    pub fn for_dimension(settings: &Settings, dims: u32) -> Result<Self, CliError> {
        let mut cfg = ExperimentConfig::from_settings(&Settings {
            model_dims: None,
            ..settings.clone()
        })?;
        cfg.model_dims = dims;
        cfg.reference_dims = dims;
        Ok(cfg)
    }

    fn field_config(&self, dims: u32) -> Result<FieldConfig, CliError> {
        FieldConfig::new(self.q, self.sigma, dims, self.nx)
            .map_err(|err| CliError::Config(err.to_string()))
    }
}

/// One step of a convergence run, ready for the CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub step: usize,
    pub lambda_size: usize,
    pub grid_points: usize,
    pub extended_points: usize,
    pub mc_error: f64,
    pub active_dims: usize,
}

/// An ordinary least-squares rate fit on (log size, log error) with the
/// inclusive step window it was computed over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub rate: f64,
    pub window: (usize, usize),
}

/// Everything a convergence run produces.
#[derive(Debug)]
pub struct ConvergenceOutcome {
    pub config: ExperimentConfig,
    pub records: Vec<ConvergenceRecord>,
    pub rate_vs_lambda: RateFit,
    pub rate_vs_grid: RateFit,
    pub rate_vs_extended: RateFit,
    /// `(N, error)` pairs of the best-N-term Hermite approximation built
    /// from the extended grid; a-posteriori runs only.
    pub best_n_term: Option<Vec<(usize, f64)>>,
}

/// Runs the selected algorithm to `n_max` and measures the Monte Carlo
/// error after every step.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceOutcome, CliError> {
    let model = LognormalModel::new(cfg.field_config(cfg.model_dims)?);
    let reference = LognormalModel::new(cfg.field_config(cfg.reference_dims)?);

    let sampler = GaussianSampler::new(cfg.seed);
    let samples: Vec<Vec<f64>> = (0..cfg.n_mc)
        .map(|k| sampler.sample(k as u64, cfg.reference_dims as usize))
        .collect();
    let reference_solutions: Vec<SpatialFunction> = samples
        .par_iter()
        .map(|xi| reference.solve(xi))
        .collect::<collocate::Result<_>>()?;

    let solve = model.solution_map();
    let (history, mut store, extended) = match cfg.algo {
        Algo::APosteriori => {
            let run = run_aposteriori(&solve, cfg.m_buffer, cfg.n_max, SpatialFunction::h10_norm)?;
            (run.state.history().to_vec(), run.values, Some(run.extended))
        }
        Algo::APriori => {
            let weights = APrioriWeights::gauss_hermite(cfg.q)
                .map_err(|err| CliError::Config(err.to_string()))?;
            let state = run_apriori(&weights, cfg.m_buffer, cfg.n_max);
            (state.history().to_vec(), ValueStore::new(), None)
        }
    };

    let records = replay_with_errors(
        &history,
        &mut store,
        &solve,
        &samples,
        &reference_solutions,
        cfg.algo == Algo::APriori,
    )?;

    let rate_vs_lambda = fit_rate(&records, |r| r.lambda_size as f64);
    let rate_vs_grid = fit_rate(&records, |r| r.grid_points as f64);
    let rate_vs_extended = fit_rate(&records, |r| r.extended_points as f64);

    let best_n_term = match extended {
        Some(extended_set) => Some(best_n_term_errors(
            extended_set,
            &store,
            &samples,
            &reference_solutions,
        )?),
        None => None,
    };

    Ok(ConvergenceOutcome {
        config: cfg.clone(),
        records,
        rate_vs_lambda,
        rate_vs_grid,
        rate_vs_extended,
        best_n_term,
    })
}

/// Replays the recorded selection order, accumulating `U_{Λ_N} u(ξ_k)` one
/// detail operator at a time and averaging the `H¹₀` distance to the
/// reference after each step.
fn replay_with_errors<F>(
    history: &[StepRecord],
    store: &mut ValueStore<SpatialFunction>,
    solve: &F,
    samples: &[Vec<f64>],
    reference_solutions: &[SpatialFunction],
    evaluate_lazily: bool,
) -> Result<Vec<ConvergenceRecord>, CliError>
where
    F: Fn(&[f64]) -> collocate::Result<SpatialFunction> + Sync,
{
    if evaluate_lazily {
        store.ensure_points(MonotoneSet::singleton_zero().sparse_grid_points(), solve)?;
    }
    let origin = MultiIndex::zero();
    let mut approximations: Vec<SpatialFunction> = samples
        .par_iter()
        .map(|xi| detail_from_store(&origin, store, xi))
        .collect();

    let mut records = Vec::with_capacity(history.len() + 1);
    records.push(ConvergenceRecord {
        step: 1,
        lambda_size: 1,
        grid_points: 1,
        extended_points: 1,
        mc_error: mean_h10_error(&approximations, reference_solutions),
        active_dims: 0,
    });

    for record in history {
        if evaluate_lazily {
            store.ensure_points(tensor_grid(&record.chosen), solve)?;
        }
        approximations
            .par_iter_mut()
            .zip(samples.par_iter())
            .for_each(|(approx, xi)| {
                let detail = detail_from_store(&record.chosen, store, xi);
                approx.axpy(1.0, &detail);
            });
        records.push(ConvergenceRecord {
            step: record.step,
            lambda_size: record.step,
            grid_points: record.grid_points,
            extended_points: record.extended_points,
            mc_error: mean_h10_error(&approximations, reference_solutions),
            active_dims: record.active_dims,
        });
    }
    Ok(records)
}

/// Mean `H¹₀` distance between approximations and references, sample by
/// sample. Norms are computed in parallel but summed in sample order, so
/// the result is deterministic.
fn mean_h10_error(approximations: &[SpatialFunction], references: &[SpatialFunction]) -> f64 {
    let norms: Vec<f64> = approximations
        .par_iter()
        .zip(references.par_iter())
        .map(|(approx, reference)| approx.distance(reference))
        .collect();
    norms.iter().sum::<f64>() / norms.len() as f64
}

/// Converts the extended-grid interpolant to its Hermite expansion and
/// walks the best-N-term curve, re-using the Monte Carlo samples for the
/// error metric.
fn best_n_term_errors(
    extended: MonotoneSet,
    store: &ValueStore<SpatialFunction>,
    samples: &[Vec<f64>],
    reference_solutions: &[SpatialFunction],
) -> Result<Vec<(usize, f64)>, CliError> {
    let interpolant = SparseCollocation::from_store(extended, store)?;
    let expansion = interpolant.to_hermite();

    let max_level = expansion
        .terms()
        .flat_map(|(nu, _)| nu.entries().iter().map(|&(_, level)| level))
        .max()
        .unwrap_or(0) as usize;
    let max_dim = expansion
        .terms()
        .map(|(nu, _)| nu.max_support_dim())
        .max()
        .unwrap_or(0) as usize;

    // basis[k][d][l] = H_l(ξ_k[d]) for the dimensions the expansion uses.
    // Probed neighbors can reach past the sampled dimensions; there the
    // truncated model is constant and the sample coordinate is zero.
    let basis: Vec<Vec<Vec<f64>>> = samples
        .par_iter()
        .map(|xi| {
            (0..max_dim)
                .map(|d| hermite::eval_all(max_level, xi.get(d).copied().unwrap_or(0.0)))
                .collect()
        })
        .collect();
    let term_value = |k: usize, nu: &MultiIndex| -> f64 {
        nu.entries()
            .iter()
            .map(|&(dim, level)| basis[k][(dim - 1) as usize][level as usize])
            .product()
    };

    let zero = reference_solutions[0].zero_like();
    let mut partial_sums: Vec<SpatialFunction> = vec![zero; samples.len()];
    let curve = expansion.best_n_term_curve(|prefix| {
        let (nu, coeff) = prefix.last().expect("prefix is never empty");
        partial_sums
            .par_iter_mut()
            .enumerate()
            .for_each(|(k, partial)| partial.axpy(term_value(k, nu), coeff));
        mean_h10_error(&partial_sums, reference_solutions)
    });
    Ok(curve)
}

/// Least-squares slope of log error against the log of a size column, over
/// the second half of the recorded steps. Returns the decay rate (the
/// negated slope) and the step window it was fitted on.
fn fit_rate(records: &[ConvergenceRecord], size: impl Fn(&ConvergenceRecord) -> f64) -> RateFit {
    let start = records.len() / 2;
    let tail = &records[start..];
    let window = (tail[0].step, tail[tail.len() - 1].step);
    let points: Vec<(f64, f64)> = tail
        .iter()
        .filter(|r| r.mc_error > 0.0)
        .map(|r| (size(r).ln(), r.mc_error.ln()))
        .collect();
    RateFit {
        rate: -ols_slope(&points),
        window,
    }
}

fn ols_slope(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 {
        return f64::NAN;
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let covariance: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let variance: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    covariance / variance
}

/// Human-readable summary of a convergence run, including the fit windows.
pub fn summary_lines(outcome: &ConvergenceOutcome) -> Vec<String> {
    let cfg = &outcome.config;
    let last = outcome
        .records
        .last()
        .expect("a run records at least the seed step");
    let mut lines = vec![
        format!(
            "converge algo={} q={} M={} Mref={} nmc={} seed={} nmax={}",
            cfg.algo, cfg.q, cfg.model_dims, cfg.reference_dims, cfg.n_mc, cfg.seed, cfg.n_max
        ),
        format!(
            "  final error {:.3e} at N={} (grid {}, extended {}, active dims {})",
            last.mc_error, last.step, last.grid_points, last.extended_points, last.active_dims
        ),
        rate_line("|Lambda_N|", outcome.rate_vs_lambda),
        rate_line("grid points", outcome.rate_vs_grid),
        rate_line("extended points", outcome.rate_vs_extended),
    ];
    if let Some(curve) = &outcome.best_n_term {
        if let Some((n, err)) = curve.last() {
            lines.push(format!(
                "  best-N-term curve: {n} terms, final error {err:.3e}"
            ));
        }
    }
    lines
}

fn rate_line(label: &str, fit: RateFit) -> String {
    format!(
        "  rate vs {label}: {:.2} (least squares on steps {}..={})",
        fit.rate, fit.window.0, fit.window.1
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desk_config(algo: Algo, n_max: usize) -> ExperimentConfig {
        ExperimentConfig {
            q: 2.0,
            sigma: 0.1,
            model_dims: 16,
            reference_dims: 16,
            n_mc: 40,
            seed: 1234,
            n_max,
            m_buffer: 2,
            algo,
            nx: 256,
        }
    }

    #[test]
    fn record_sizes_and_dimensions_are_nondecreasing() {
        let outcome = run_convergence(&desk_config(Algo::APosteriori, 8)).unwrap();
        assert_eq!(outcome.records.len(), 8);
        for pair in outcome.records.windows(2) {
            assert!(pair[1].lambda_size == pair[0].lambda_size + 1);
            assert!(pair[1].grid_points >= pair[0].grid_points);
            assert!(pair[1].extended_points >= pair[0].extended_points);
            assert!(pair[1].active_dims >= pair[0].active_dims);
        }
    }

    #[test]
    fn first_record_is_the_single_point_collocation_error() {
        let cfg = desk_config(Algo::APosteriori, 3);
        let outcome = run_convergence(&cfg).unwrap();

        let model = LognormalModel::new(
            FieldConfig::new(cfg.q, cfg.sigma, cfg.model_dims, cfg.nx).unwrap(),
        );
        let reference = LognormalModel::new(
            FieldConfig::new(cfg.q, cfg.sigma, cfg.reference_dims, cfg.nx).unwrap(),
        );
        let at_origin = model.solve(&[]).unwrap();
        let sampler = GaussianSampler::new(cfg.seed);
        let expected = (0..cfg.n_mc)
            .map(|k| {
                let xi = sampler.sample(k as u64, cfg.reference_dims as usize);
                reference.solve(&xi).unwrap().distance(&at_origin)
            })
            .sum::<f64>()
            / cfg.n_mc as f64;

        let first = &outcome.records[0];
        assert_eq!(first.step, 1);
        assert_eq!(first.grid_points, 1);
        assert!((first.mc_error - expected).abs() <= 1e-15 * expected);
    }

    #[test]
    fn both_algorithms_reduce_the_error() {
        for algo in [Algo::APriori, Algo::APosteriori] {
            let outcome = run_convergence(&desk_config(algo, 12)).unwrap();
            let first = outcome.records[0].mc_error;
            let last = outcome.records.last().unwrap().mc_error;
            assert!(
                last < first / 3.0,
                "{algo}: error went from {first} to {last}"
            );
        }
    }

    #[test]
    fn identical_configs_reproduce_identical_outcomes() {
        let cfg = desk_config(Algo::APosteriori, 6);
        let a = run_convergence(&cfg).unwrap();
        let b = run_convergence(&cfg).unwrap();
        assert_eq!(a.records, b.records);
        let curve_a = a.best_n_term.unwrap();
        let curve_b = b.best_n_term.unwrap();
        assert_eq!(curve_a.len(), curve_b.len());
        for (x, y) in curve_a.iter().zip(&curve_b) {
            assert_eq!(x.0, y.0);
            assert_eq!(x.1.to_bits(), y.1.to_bits());
        }
    }

    #[test]
    fn best_n_term_curve_ends_near_the_interpolant_error() {
        // With every Hermite term kept, the best-N-term reconstruction is
        // exactly the extended-grid interpolant, whose error should not
        // exceed the a-posteriori grid's own final error.
        let outcome = run_convergence(&desk_config(Algo::APosteriori, 10)).unwrap();
        let curve = outcome.best_n_term.as_ref().unwrap();
        let full = curve.last().unwrap().1;
        let final_grid_error = outcome.records.last().unwrap().mc_error;
        assert!(
            full <= final_grid_error * 1.5,
            "full expansion error {full} vs grid error {final_grid_error}"
        );
    }

    #[test]
    fn apriori_records_match_a_direct_interpolant() {
        let cfg = desk_config(Algo::APriori, 5);
        let outcome = run_convergence(&cfg).unwrap();

        let weights = APrioriWeights::gauss_hermite(cfg.q).unwrap();
        let state = run_apriori(&weights, cfg.m_buffer, cfg.n_max);
        let model = LognormalModel::new(
            FieldConfig::new(cfg.q, cfg.sigma, cfg.model_dims, cfg.nx).unwrap(),
        );
        let reference = LognormalModel::new(
            FieldConfig::new(cfg.q, cfg.sigma, cfg.reference_dims, cfg.nx).unwrap(),
        );
        let interpolant =
            SparseCollocation::build(state.lambda().clone(), &model.solution_map()).unwrap();

        let sampler = GaussianSampler::new(cfg.seed);
        let expected = (0..cfg.n_mc)
            .map(|k| {
                let xi = sampler.sample(k as u64, cfg.reference_dims as usize);
                reference
                    .solve(&xi)
                    .unwrap()
                    .distance(&interpolant.evaluate(&xi))
            })
            .sum::<f64>()
            / cfg.n_mc as f64;
        let last = outcome.records.last().unwrap().mc_error;
        assert!(
            (last - expected).abs() <= 1e-12 * expected.max(1e-30),
            "replayed error {last} vs direct {expected}"
        );
    }

    #[test]
    fn rate_fit_recovers_a_known_slope() {
        let records: Vec<ConvergenceRecord> = (1..=16)
            .map(|n| ConvergenceRecord {
                step: n,
                lambda_size: n,
                grid_points: n * n,
                extended_points: n * n,
                mc_error: 3.0 * (n as f64).powi(-2),
                active_dims: 1,
            })
            .collect();
        let fit = fit_rate(&records, |r| r.lambda_size as f64);
        assert!((fit.rate - 2.0).abs() < 1e-12);
        assert_eq!(fit.window, (9, 16));
        let grid_fit = fit_rate(&records, |r| r.grid_points as f64);
        assert!((grid_fit.rate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_sweep_configs_tie_reference_to_model() {
        let settings = Settings {
            seed: Some(3),
            ..Settings::default()
        };
        let cfg = ExperimentConfig::for_dimension(&settings, 12).unwrap();
        assert_eq!(cfg.model_dims, 12);
        assert_eq!(cfg.reference_dims, 12);
    }
}
