//! Emits a matplotlib script that redraws a run from its CSV files.

use std::path::{Path, PathBuf};

use crate::error::CliError;
use crate::output::Provenance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    /// Monte-Carlo estimate: points with error bars.
    Numeric,
    /// Closed-form solution: a continuous line.
    Analytic,
    /// Tr ρ with error bars.
    Trace,
}

impl SeriesKind {
    fn required_columns(self) -> &'static [&'static str] {
        match self {
            SeriesKind::Numeric => &["t", "re_rho22", "se_re_rho22"],
            SeriesKind::Analytic => &["t", "re_rho22"],
            SeriesKind::Trace => &["t", "trace", "se_trace"],
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlotInput {
    pub kind: SeriesKind,
    pub path: PathBuf,
}

/// Reads the column header (first non-comment line) and counts data rows.
fn inspect_csv(path: &Path) -> Result<(Vec<String>, usize), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("plot input {}: {e}", path.display())))?;
    let mut lines = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| CliError::Runtime(format!("plot input {} has no header", path.display())))?;
    Ok((
        header.split(',').map(str::to_string).collect(),
        lines.count(),
    ))
}

fn file_name(path: &Path) -> String {
    path.file_name().map_or_else(
        || path.display().to_string(),
        |n| n.to_string_lossy().into_owned(),
    )
}

/// Checks every input for its columns and at least one row, then renders
/// the script. Paths inside the script are relative to its own directory.
pub fn emit_plot_script(inputs: &[PlotInput], provenance: &Provenance) -> Result<String, CliError> {
    if inputs.is_empty() {
        return Err(CliError::Runtime("nothing to plot".into()));
    }
    for input in inputs {
        let (columns, rows) = inspect_csv(&input.path)?;
        for need in input.kind.required_columns() {
            if !columns.iter().any(|c| c == need) {
                return Err(CliError::Runtime(format!(
                    "{} is missing column `{need}`",
                    input.path.display()
                )));
            }
        }
        if rows == 0 {
            return Err(CliError::Runtime(format!(
                "{} has an empty series",
                input.path.display()
            )));
        }
    }
    let find = |kind| {
        inputs
            .iter()
            .find(|i| i.kind == kind)
            .map(|i| file_name(&i.path))
    };
    let py_opt = |v: Option<String>| v.map_or_else(|| "None".to_string(), |s| format!("{s:?}"));

    let mut s = provenance.comment_block();
    s.push_str(&format!(
        r##""""Redraws the run from its CSV files. Needs numpy and matplotlib."""
import os
import sys

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
NUMERIC = {numeric}
ANALYTIC = {analytic}
TRACE = {trace}


def load(name, columns):
    path = os.path.join(HERE, name)
    skip = 0
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            skip += 1
    data = np.genfromtxt(path, delimiter=",", names=True, skip_header=skip)
    data = np.atleast_1d(data)
    for c in columns:
        if c not in data.dtype.names:
            sys.exit(f"{{name}}: missing column {{c}}")
    if data.size == 0:
        sys.exit(f"{{name}}: empty series")
    return data


panels = [p for p in (TRACE, NUMERIC or ANALYTIC) if p]
fig, axes = plt.subplots(len(panels), 1, figsize=(7, 3.2 * len(panels)), squeeze=False)
axes = axes[:, 0]
row = 0
if TRACE:
    tr = load(TRACE, ["t", "trace", "se_trace"])
    axes[row].errorbar(tr["t"], tr["trace"], yerr=tr["se_trace"], fmt=".", ms=3, capsize=2)
    axes[row].axhline(1.0, color="k", lw=0.8)
    axes[row].set_ylabel(r"Tr $\rho_S$")
    row += 1
if NUMERIC or ANALYTIC:
    ax = axes[row]
    if ANALYTIC:
        an = load(ANALYTIC, ["t", "re_rho22"])
        ax.plot(an["t"], an["re_rho22"], "-", lw=1.2, label="analytic")
    if NUMERIC:
        nu = load(NUMERIC, ["t", "re_rho22", "se_re_rho22"])
        ax.errorbar(nu["t"], nu["re_rho22"], yerr=nu["se_re_rho22"], fmt="o", ms=2.5, capsize=1.5, label="numeric")
    ax.set_ylabel(r"$\rho_{{22}}$")
    ax.legend()
axes[-1].set_xlabel("t")
fig.tight_layout()
out = os.path.join(HERE, "plot.png")
fig.savefig(out, dpi=150)
print(out)
"##,
        numeric = py_opt(find(SeriesKind::Numeric)),
        analytic = py_opt(find(SeriesKind::Analytic)),
        trace = py_opt(find(SeriesKind::Trace)),
    ));
    Ok(s)
}
