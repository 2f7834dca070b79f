//! CSV and gnuplot output.
//!
//! All floating-point columns are written with 17 significant digits so the
//! files round-trip to the exact binary values and identical runs produce
//! byte-identical output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::CliError;

/// Formats a float with 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a CSV file with a header row. Fails if any row width differs
/// from the header width.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    for row in rows {
        assert_eq!(
            row.len(),
            header.len(),
            "row width {} does not match header width {}",
            row.len(),
            header.len()
        );
    }
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut text = String::new();
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

/// One curve in a gnuplot script: x column, y column, legend title.
pub struct PlotSeries {
    pub x_column: usize,
    pub y_column: usize,
    pub title: String,
}

/// Describes a gnuplot script plotting columns of one CSV file.
pub struct PlotSpec {
    pub csv_name: String,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<PlotSeries>,
}

/// Writes a gnuplot script next to the CSV it plots and returns its path.
pub fn write_plot_script(dir: &Path, stem: &str, spec: &PlotSpec) -> Result<PathBuf, CliError> {
    let path = dir.join(format!("{stem}.gp"));
    let mut text = String::new();
    text.push_str("set datafile separator ','\n");
    text.push_str("set key top right\n");
    text.push_str(&format!("set title '{}'\n", spec.title));
    text.push_str(&format!("set xlabel '{}'\n", spec.x_label));
    text.push_str(&format!("set ylabel '{}'\n", spec.y_label));
    match (spec.log_x, spec.log_y) {
        (true, true) => text.push_str("set logscale xy\n"),
        (true, false) => text.push_str("set logscale x\n"),
        (false, true) => text.push_str("set logscale y\n"),
        (false, false) => {}
    }
    text.push_str(&format!("set output '{stem}.png'\n"));
    text.push_str("set terminal pngcairo size 900,600\n");
    let mut clauses = Vec::new();
    for series in &spec.series {
        clauses.push(format!(
            "'{}' skip 1 using {}:{} with linespoints title '{}'",
            spec.csv_name, series.x_column, series.y_column, series.title
        ));
    }
    text.push_str(&format!("plot {}\n", clauses.join(", \\\n     ")));
    let mut file = fs::File::create(&path)?;
    file.write_all(text.as_bytes())?;
    Ok(path)
}
