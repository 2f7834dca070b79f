//! Static tables: univariate operator norms and sparse-grid point counts.

use collocate::hermite;
use collocate::multi_index::MonotoneSet;

use crate::config::{CliError, Family};

/// One row of the norm table: `‖U_i H_ν‖` and `‖Δ_i H_ν‖` in `L²` of the
/// standard Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct NormRow {
    pub level: usize,
    pub degree: usize,
    pub norm_interpolant: f64,
    pub norm_detail: f64,
}

/// Computes the norm table over `0 ≤ i ≤ i_max`, `0 ≤ ν ≤ nu_max`.
pub fn norms_table(i_max: usize, nu_max: usize) -> Result<Vec<NormRow>, CliError> {
    const MAX: usize = 64;
    if i_max > MAX || nu_max > MAX {
        return Err(CliError::Config(format!(
            "norm table bounds must be at most {MAX}, got i_max={i_max}, nu_max={nu_max}"
        )));
    }
    let mut rows = Vec::with_capacity((i_max + 1) * (nu_max + 1));
    for level in 0..=i_max {
        for degree in 0..=nu_max {
            rows.push(NormRow {
                level,
                degree,
                norm_interpolant: hermite::interpolant_norm(level, degree)?,
                norm_detail: hermite::detail_norm(level, degree)?,
            });
        }
    }
    Ok(rows)
}

/// One row of the point-count table for a fixed multi-index family.
#[derive(Debug, Clone, PartialEq)]
pub struct CountRow {
    pub w: u64,
    pub lambda_size: usize,
    pub grid_points: usize,
    pub bound: u64,
}

/// Computes sparse-grid sizes and the pairing bound `|Λ|(|Λ|+1)/2` for one
/// family of sets, `dims` dimensions, and all admissible `w ≤ w_max`.
/// Total-degree sets start at `w = 0`, hyperbolic-cross sets at `w = 1`.
pub fn counts_table(family: Family, dims: u32, w_max: u64) -> Result<Vec<CountRow>, CliError> {
    if dims == 0 {
        return Err(CliError::Config(
            "counts need at least one dimension".into(),
        ));
    }
    let w_start = match family {
        Family::TotalDegree => 0,
        Family::HyperbolicCross => 1,
    };
    let mut rows = Vec::new();
    for w in w_start..=w_max {
        guard_set_size(family, dims, w)?;
        let lambda = match family {
            Family::TotalDegree => MonotoneSet::total_degree(w as u32, dims),
            Family::HyperbolicCross => MonotoneSet::hyperbolic_cross(w, dims),
        }
        .map_err(|err| CliError::Config(err.to_string()))?;
        let count = lambda.point_count();
        rows.push(CountRow {
            w,
            lambda_size: lambda.len(),
            grid_points: count.exact,
            bound: count.bound,
        });
    }
    Ok(rows)
}

/// Rejects count requests whose index sets would not fit in memory. The
/// total-degree set has binomial(w + dims, dims) members; hyperbolic-cross
/// sets grow only polylogarithmically with dimension, so a cap on `w`
/// suffices there.
fn guard_set_size(family: Family, dims: u32, w: u64) -> Result<(), CliError> {
    const LIMIT: f64 = 4e6;
    let estimate = match family {
        Family::TotalDegree => {
            let k = (w as f64).min(dims as f64);
            let big = (w as f64).max(dims as f64);
            let mut size = 1.0f64;
            let mut j = 1.0;
            while j <= k && size <= LIMIT {
                size *= (big + j) / j;
                j += 1.0;
            }
            size
        }
        Family::HyperbolicCross => w as f64,
    };
    if estimate > LIMIT {
        return Err(CliError::Config(format!(
            "counts for {family} with M={dims}, w={w} would enumerate about {estimate:.1e} indices"
        )));
    }
    Ok(())
}
