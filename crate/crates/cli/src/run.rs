//! Run modes: compute, write every output, and remove them all again on failure.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use spinbath_core::estimator::ReducedDensitySeries;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::experiments::{self, AnalyticSeries, OracleReport, SamplerReport};
use crate::output::{density_columns, density_rows, OutputSet, Provenance};
use crate::plot::{emit_plot_script, PlotInput, SeriesKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Simulate,
    Analytic,
    Compare,
    SamplerCheck,
    OracleCheck,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Analytic => "analytic",
            Mode::Compare => "compare",
            Mode::SamplerCheck => "sampler-check",
            Mode::OracleCheck => "oracle-check",
        }
    }
}

/// Random states used by oracle-check.
pub const ORACLE_STATES: usize = 100;

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    /// Human-readable result lines.
    pub lines: Vec<String>,
}

fn write_numeric(
    out: &mut OutputSet,
    prov: &Provenance,
    s: &ReducedDensitySeries,
) -> Result<Vec<PlotInput>, CliError> {
    let numeric = out.write_csv(
        "numeric.csv",
        prov,
        &density_columns(s.dim()),
        density_rows(&s.times, &s.rho, Some((&s.stderr_re, &s.stderr_im))),
    )?;
    let rows = s
        .times
        .iter()
        .zip(s.trace_mean.iter().zip(&s.trace_stderr))
        .map(|(&t, (&tr, &se))| vec![t, tr, se]);
    let trace = out.write_csv(
        "trace.csv",
        prov,
        &["t".into(), "trace".into(), "se_trace".into()],
        rows,
    )?;
    Ok(vec![
        PlotInput {
            kind: SeriesKind::Trace,
            path: trace,
        },
        PlotInput {
            kind: SeriesKind::Numeric,
            path: numeric,
        },
    ])
}

fn write_analytic(
    out: &mut OutputSet,
    prov: &Provenance,
    a: &AnalyticSeries,
) -> Result<PlotInput, CliError> {
    let path = out.write_csv(
        "analytic.csv",
        prov,
        &density_columns(4),
        density_rows(&a.times, &a.rho, None),
    )?;
    Ok(PlotInput {
        kind: SeriesKind::Analytic,
        path,
    })
}

fn write_plot(
    out: &mut OutputSet,
    prov: &Provenance,
    inputs: &[PlotInput],
) -> Result<(), CliError> {
    let script = emit_plot_script(inputs, prov)?;
    out.write_text("plot.py", &script)?;
    Ok(())
}

fn numeric_lines(s: &ReducedDensitySeries) -> Vec<String> {
    let trace = experiments::TraceStats::of(s);
    vec![
        format!("samples: {} used, {} excluded", s.n_samples, s.n_excluded),
        format!(
            "trace: max |Tr ρ − 1| = {:.3e}, per-sample max = {:.3e}, within bounds: {}",
            trace.max_abs_deviation, trace.max_sample_deviation, trace.within_bounds
        ),
    ]
}

fn sampler_lines(r: &SamplerReport) -> Vec<String> {
    let mut lines = vec![format!("samples: {}", r.n_samples)];
    for d in &r.decades {
        lines.push(format!(
            "bath {} ω ∈ [{:.0e}, {:.0e}) ({} modes): max rel err Var(R) {:.2}%, Var(P) {:.2}%, max |z| equipartition {:.2}",
            d.bath + 1,
            d.omega_from,
            d.omega_to,
            d.n_modes,
            100.0 * d.max_rel_err_var_r,
            100.0 * d.max_rel_err_var_p,
            d.max_abs_equipartition_z
        ));
    }
    lines
}

fn oracle_lines(r: &OracleReport) -> Vec<String> {
    let mut lines = vec![
        format!("states: {} at t ∈ {:?}", r.n_states, r.times),
        format!("max |closed form − exp(𝓛t)| = {:.3e}", r.max_abs_difference),
        format!(
            "max |Tr − 1| = {:.3e}, min eigenvalue = {:.3e}, f11/f22 drift = {:.3e}",
            r.max_trace_deviation, r.min_eigenvalue, r.max_frozen_population_drift
        ),
    ];
    if let (Some(a), Some(b)) = (r.steady_state_ratio, r.expected_steady_state_ratio) {
        lines.push(format!(
            "steady state f33/f44 = {a:.10e} (Ω₊/Ω₋ = {b:.10e})"
        ));
    }
    lines
}

/// Runs `mode` and writes its outputs into `out_dir`.
pub fn execute(mode: Mode, config: &RunConfig, out_dir: &Path) -> Result<RunSummary, CliError> {
    config.validate()?;
    let prov = Provenance::new(mode.name(), config);
    let mut out = OutputSet::create(out_dir)?;
    let mut lines = Vec::new();
    match mode {
        Mode::Simulate => {
            let series = experiments::simulate(config)?;
            let inputs = write_numeric(&mut out, &prov, &series)?;
            write_plot(&mut out, &prov, &inputs)?;
            lines.extend(numeric_lines(&series));
        }
        Mode::Analytic => {
            let series = experiments::analytic(config)?;
            let input = write_analytic(&mut out, &prov, &series)?;
            write_plot(&mut out, &prov, &[input])?;
            let r = &series.rates;
            lines.push(format!(
                "Ω = {:.6e} (Ω₊ = {:.6e}, Ω₋ = {:.6e}), g_c = {:.6e}, ω = {}",
                r.omega, r.omega_plus, r.omega_minus, r.g_c, series.eigensystem.omega
            ));
        }
        Mode::Compare => {
            let analytic = experiments::analytic(config)?;
            let numeric = experiments::simulate(config)?;
            let report = experiments::compare_series(&numeric, &analytic);
            let mut inputs = write_numeric(&mut out, &prov, &numeric)?;
            inputs.push(write_analytic(&mut out, &prov, &analytic)?);
            out.write_json("report.json", &prov, &report)?;
            write_plot(&mut out, &prov, &inputs)?;
            lines.extend(numeric_lines(&numeric));
            lines.push(format!(
                "ρ22: max |Δ| = {:.4}, RMS = {:.4}",
                report.max_abs_delta_rho22, report.rms_delta_rho22
            ));
            for (label, fit) in [
                ("numeric", &report.fit_numeric),
                ("analytic", &report.fit_analytic),
            ] {
                lines.push(match (&fit.fit, &fit.error) {
                    (Some(f), _) => format!(
                        "{label} fit: Γ = {:.4e}, ν = {:.4}",
                        f.decay_rate, f.frequency
                    ),
                    (None, e) => {
                        format!("{label} fit failed: {}", e.as_deref().unwrap_or("unknown"))
                    }
                });
            }
            lines.push(format!("formula Ω = {:.4e}", report.omega_formula));
            if report.frequency_shift.flagged {
                lines.push(match report.frequency_shift.relative {
                    Some(r) => {
                        format!("FLAG: oscillation frequencies differ by {:+.2}%", 100.0 * r)
                    }
                    None => "FLAG: frequency comparison unavailable".to_string(),
                });
            }
        }
        Mode::SamplerCheck => {
            let report = experiments::sampler_check(config)?;
            let rows = report.rows.iter().map(|r| {
                vec![
                    r.bath as f64 + 1.0,
                    r.mode as f64 + 1.0,
                    r.omega,
                    r.var_r,
                    r.var_r_expected,
                    r.var_p,
                    r.var_p_expected,
                    r.equipartition_ratio,
                    r.equipartition_z,
                ]
            });
            let columns = [
                "bath",
                "mode",
                "omega",
                "var_r",
                "var_r_expected",
                "var_p",
                "var_p_expected",
                "equipartition_ratio",
                "equipartition_z",
            ];
            out.write_csv("sampler.csv", &prov, &columns.map(String::from), rows)?;
            out.write_json("sampler.json", &prov, &report)?;
            lines.extend(sampler_lines(&report));
        }
        Mode::OracleCheck => {
            let report = experiments::oracle_check(config, ORACLE_STATES)?;
            let rows = report.rows.iter().map(|r| {
                vec![
                    r.state as f64,
                    r.t,
                    r.max_abs_difference,
                    r.trace_deviation,
                    r.min_eigenvalue,
                ]
            });
            let columns = [
                "state",
                "t",
                "max_abs_difference",
                "trace_deviation",
                "min_eigenvalue",
            ];
            out.write_csv("oracle.csv", &prov, &columns.map(String::from), rows)?;
            out.write_json("oracle.json", &prov, &report)?;
            lines.extend(oracle_lines(&report));
        }
    }
    Ok(RunSummary {
        files: out.commit(),
        lines,
    })
}
