//! Subcommand implementations: compute, write CSVs, report summaries.

use std::path::Path;

use crate::config::{CliError, Family, Settings};
use crate::experiment::{self, ConvergenceOutcome, ExperimentConfig};
use crate::report::{fmt_float, write_csv, write_plot_script, PlotSeries, PlotSpec};
use crate::tables;

/// Writes the univariate norm table to `norms.csv`.
pub fn cmd_norms(
    i_max: usize,
    nu_max: usize,
    out: &Path,
    emit_plots: bool,
) -> Result<Vec<String>, CliError> {
    let rows = tables::norms_table(i_max, nu_max)?;
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|row| {
            vec![
                row.level.to_string(),
                row.degree.to_string(),
                fmt_float(row.norm_interpolant),
                fmt_float(row.norm_detail),
            ]
        })
        .collect();
    let path = out.join("norms.csv");
    write_csv(&path, &["i", "nu", "norm_U", "norm_Delta"], &csv_rows)?;
    let mut lines = vec![format!(
        "wrote {} ({} rows)",
        path.display(),
        csv_rows.len()
    )];
    if emit_plots {
        let spec = PlotSpec {
            csv_name: "norms.csv".into(),
            title: "Interpolant and detail norms on Hermite polynomials".into(),
            x_label: "polynomial degree nu".into(),
            y_label: "L2 norm".into(),
            log_x: false,
            log_y: false,
            series: vec![
                PlotSeries {
                    x_column: 2,
                    y_column: 3,
                    title: "norm of U_i H_nu".into(),
                },
                PlotSeries {
                    x_column: 2,
                    y_column: 4,
                    title: "norm of Delta_i H_nu".into(),
                },
            ],
        };
        let script = write_plot_script(out, "norms", &spec)?;
        lines.push(format!("wrote {}", script.display()));
    }
    Ok(lines)
}

/// Writes the sparse-grid point counts to `counts.csv`.
pub fn cmd_counts(
    family: Family,
    dims: u32,
    w_max: u64,
    out: &Path,
    emit_plots: bool,
) -> Result<Vec<String>, CliError> {
    let rows = tables::counts_table(family, dims, w_max)?;
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|row| {
            vec![
                family.label().to_string(),
                dims.to_string(),
                row.w.to_string(),
                row.lambda_size.to_string(),
                row.grid_points.to_string(),
                row.bound.to_string(),
            ]
        })
        .collect();
    let path = out.join("counts.csv");
    write_csv(
        &path,
        &["family", "M", "w", "lambda_size", "grid_points", "bound"],
        &csv_rows,
    )?;
    let mut lines = vec![format!(
        "wrote {} ({} rows)",
        path.display(),
        csv_rows.len()
    )];
    if emit_plots {
        let spec = PlotSpec {
            csv_name: "counts.csv".into(),
            title: format!("Grid sizes for {family} sets, M = {dims}"),
            x_label: "index set size".into(),
            y_label: "points".into(),
            log_x: true,
            log_y: true,
            series: vec![
                PlotSeries {
                    x_column: 4,
                    y_column: 5,
                    title: "grid points".into(),
                },
                PlotSeries {
                    x_column: 4,
                    y_column: 6,
                    title: "pairing bound".into(),
                },
            ],
        };
        let script = write_plot_script(out, "counts", &spec)?;
        lines.push(format!("wrote {}", script.display()));
    }
    Ok(lines)
}

/// Runs one convergence experiment and writes its CSVs.
pub fn cmd_converge(settings: &Settings, emit_plots: bool) -> Result<Vec<String>, CliError> {
    let cfg = ExperimentConfig::from_settings(settings)?;
    let outcome = experiment::run_convergence(&cfg)?;
    let stem = format!("converge_{}_q{}", cfg.algo.label(), q_label(cfg.q));
    let mut lines = experiment::summary_lines(&outcome);
    lines.extend(write_convergence_outputs(
        &outcome,
        &settings.out,
        &stem,
        true,
        emit_plots,
    )?);
    Ok(lines)
}

/// Runs one convergence experiment per requested dimension, each against a
/// reference truncated to the same dimension.
pub fn cmd_dimsweep(settings: &Settings, emit_plots: bool) -> Result<Vec<String>, CliError> {
    let dims_list = settings.model_dims.clone().ok_or_else(|| {
        CliError::Config("dimsweep requires --M with the dimension counts to sweep".into())
    })?;
    let mut lines = Vec::new();
    for dims in dims_list {
        let cfg = ExperimentConfig::for_dimension(settings, dims)?;
        let outcome = experiment::run_convergence(&cfg)?;
        lines.extend(experiment::summary_lines(&outcome));
        lines.extend(write_convergence_outputs(
            &outcome,
            &settings.out,
            &format!("dimsweep_M{dims}"),
            false,
            emit_plots,
        )?);
    }
    Ok(lines)
}

/// Writes the record CSV for one run, plus the best-N-term curve when the
/// run produced one, plus optional plot scripts.
fn write_convergence_outputs(
    outcome: &ConvergenceOutcome,
    out: &Path,
    stem: &str,
    with_best_n_term: bool,
    emit_plots: bool,
) -> Result<Vec<String>, CliError> {
    let csv_rows: Vec<Vec<String>> = outcome
        .records
        .iter()
        .map(|r| {
            vec![
                r.step.to_string(),
                r.lambda_size.to_string(),
                r.grid_points.to_string(),
                r.extended_points.to_string(),
                fmt_float(r.mc_error),
                r.active_dims.to_string(),
            ]
        })
        .collect();
    let path = out.join(format!("{stem}.csv"));
    write_csv(
        &path,
        &[
            "step",
            "lambda_size",
            "grid_points",
            "extended_points",
            "mc_error",
            "active_dims",
        ],
        &csv_rows,
    )?;
    let mut lines = vec![format!(
        "wrote {} ({} rows)",
        path.display(),
        csv_rows.len()
    )];

    if with_best_n_term {
        if let Some(curve) = &outcome.best_n_term {
            let rows: Vec<Vec<String>> = curve
                .iter()
                .map(|(n, err)| vec![n.to_string(), fmt_float(*err)])
                .collect();
            let best_path = out.join("bestnterm.csv");
            write_csv(&best_path, &["n_terms", "mc_error"], &rows)?;
            lines.push(format!(
                "wrote {} ({} rows)",
                best_path.display(),
                rows.len()
            ));
            if emit_plots {
                let spec = PlotSpec {
                    csv_name: "bestnterm.csv".into(),
                    title: "Best-N-term Hermite truncation error".into(),
                    x_label: "retained terms".into(),
                    y_label: "mean H10 error".into(),
                    log_x: true,
                    log_y: true,
                    series: vec![PlotSeries {
                        x_column: 1,
                        y_column: 2,
                        title: "best N terms".into(),
                    }],
                };
                let script = write_plot_script(out, "bestnterm", &spec)?;
                lines.push(format!("wrote {}", script.display()));
            }
        }
    }

    if emit_plots {
        let spec = PlotSpec {
            csv_name: format!("{stem}.csv"),
            title: format!(
                "Convergence, {} selection, q = {}",
                outcome.config.algo, outcome.config.q
            ),
            x_label: "size".into(),
            y_label: "mean H10 error".into(),
            log_x: true,
            log_y: true,
            series: vec![
                PlotSeries {
                    x_column: 2,
                    y_column: 5,
                    title: "vs index set size".into(),
                },
                PlotSeries {
                    x_column: 3,
                    y_column: 5,
                    title: "vs grid points".into(),
                },
                PlotSeries {
                    x_column: 4,
                    y_column: 5,
                    title: "vs extended grid points".into(),
                },
            ],
        };
        let script = write_plot_script(out, stem, &spec)?;
        lines.push(format!("wrote {}", script.display()));
    }
    Ok(lines)
}

/// Formats `q` for file names: integers lose the trailing `.0`.
fn q_label(q: f64) -> String {
    format!("{q}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn temp_dir(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("collocate-cmd-{name}"));
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn q_labels_drop_integer_fractions() {
        assert_eq!(q_label(2.0), "2");
        assert_eq!(q_label(1.5), "1.5");
    }

    #[test]
    fn norms_command_writes_the_table() {
        let dir = temp_dir("norms");
        let lines = cmd_norms(4, 4, &dir, true).unwrap();
        assert!(lines.iter().any(|l| l.contains("norms.csv")));
        let text = fs::read_to_string(dir.join("norms.csv")).unwrap();
        assert!(text.starts_with("i,nu,norm_U,norm_Delta\n"));
        assert_eq!(text.lines().count(), 26);
        assert!(dir.join("norms.gp").exists());
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn counts_command_writes_the_table() {
        let dir = temp_dir("counts");
        cmd_counts(Family::HyperbolicCross, 3, 4, &dir, false).unwrap();
        let text = fs::read_to_string(dir.join("counts.csv")).unwrap();
        assert!(text.starts_with("family,M,w,lambda_size,grid_points,bound\n"));
        assert!(text.contains("hc,3,1,1,1,1"));
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn converge_command_writes_records_and_curve() {
        let dir = temp_dir("converge");
        let settings = Settings {
            seed: Some(5),
            n_max: 4,
            n_mc: 10,
            reference_dims: 8,
            nx: 64,
            out: dir.clone(),
            ..Settings::default()
        };
        let lines = cmd_converge(&settings, false).unwrap();
        assert!(lines.iter().any(|l| l.contains("rate vs |Lambda_N|")));
        let text = fs::read_to_string(dir.join("converge_aposteriori_q2.csv")).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(dir.join("bestnterm.csv").exists());
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn dimsweep_requires_dimensions() {
        let settings = Settings {
            seed: Some(5),
            ..Settings::default()
        };
        let err = cmd_dimsweep(&settings, false).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn dimsweep_writes_one_file_per_dimension() {
        let dir = temp_dir("dimsweep");
        let settings = Settings {
            seed: Some(5),
            n_max: 3,
            n_mc: 8,
            nx: 64,
            model_dims: Some(vec![2, 4]),
            out: dir.clone(),
            ..Settings::default()
        };
        cmd_dimsweep(&settings, false).unwrap();
        assert!(dir.join("dimsweep_M2.csv").exists());
        assert!(dir.join("dimsweep_M4.csv").exists());
        assert!(!dir.join("bestnterm.csv").exists());
        fs::remove_dir_all(&dir).ok();
    }
}
