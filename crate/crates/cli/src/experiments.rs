//! The computations behind each run mode, without any file output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use spinbath_core::analytic::{
    evolve_closed_form, liouvillian_oracle, Dephasing, RateSet, XxzEigensystem,
};
use spinbath_core::bath::{thermal_variance_p, thermal_variance_r};
use spinbath_core::estimator::{
    estimate_reduced_density, fit_damped_cosine, DampedCosineFit, EstimatorConfig,
    ReducedDensitySeries, RunningMoments,
};
use spinbath_core::{
    BathModes, Complex, DMatrix, OpenChain, SpinChain, SpinChainParams, ThermalBaths,
};

use crate::config::RunConfig;
use crate::error::CliError;

type C64 = Complex<f64>;

/// Relative frequency difference above which the comparison report raises a flag.
pub const FREQUENCY_SHIFT_FLAG: f64 = 0.01;

/// Index of ρ22 = ⟨1,0|ρ|1,0⟩ in the natural basis.
const RHO22: (usize, usize) = (1, 1);

pub fn build_system(config: &RunConfig) -> Result<(OpenChain, ThermalBaths), CliError> {
    let params = SpinChainParams::new(config.n_spins, config.j_x, config.j_y, config.j_z)?;
    let chain = SpinChain::new(params)?;
    let modes = BathModes::discretize_with(
        config.n_modes,
        config.xi,
        config.omega_max,
        config.coupling_form.into(),
    )?;
    let baths = ThermalBaths::new(modes.clone(), config.beta.clone())?;
    Ok((OpenChain::new(chain, modes), baths))
}

pub fn estimator_config(config: &RunConfig) -> Result<EstimatorConfig, CliError> {
    let mut est = EstimatorConfig::new(config.n_samples, config.seed, config.grid()?);
    est.tracking = config.frame_tracking.into();
    est.block_size = config.block_size;
    Ok(est)
}

pub fn simulate(config: &RunConfig) -> Result<ReducedDensitySeries, CliError> {
    let (system, baths) = build_system(config)?;
    let rho0 = config.initial_density()?;
    Ok(estimate_reduced_density(
        &system,
        &baths,
        &rho0,
        &estimator_config(config)?,
    )?)
}

/// Eigensystem and rates of the two-spin XXZ master equation for this config.
pub fn analytic_rates(config: &RunConfig) -> Result<(XxzEigensystem, RateSet), CliError> {
    if config.n_spins != 2 || config.j_x != config.j_y {
        return Err(CliError::Validation(
            "the analytic solution needs n_spins = 2 and j_x = j_y".into(),
        ));
    }
    if config.j_x < 0.0 {
        return Err(CliError::Validation(
            "the analytic solution needs j_x = j_y ≥ 0".into(),
        ));
    }
    let eig = XxzEigensystem::new(config.j_x, config.j_z)?;
    let modes = BathModes::discretize(config.n_modes, config.xi, config.omega_max)?;
    let dephasing = match config.g_c {
        Some(g) => Dephasing::Fixed(g),
        None => Dephasing::LowestMode(modes.omega()[0]),
    };
    let beta = [config.beta[0], config.beta[1]];
    let mut rates = RateSet::markov(
        config.coupling_form.into(),
        config.xi,
        beta,
        eig.omega,
        dephasing,
    )?;
    if let Some(omega) = config.omega_relax {
        rates = rates.with_relaxation(omega)?;
    }
    Ok((eig, rates))
}

#[derive(Debug, Clone)]
pub struct AnalyticSeries {
    pub times: Vec<f64>,
    pub rho: Vec<DMatrix<C64>>,
    pub eigensystem: XxzEigensystem,
    pub rates: RateSet,
}

pub fn analytic(config: &RunConfig) -> Result<AnalyticSeries, CliError> {
    let (eig, rates) = analytic_rates(config)?;
    let rho0 = config.initial_density()?;
    let times = config.grid()?.times();
    let rho = times
        .iter()
        .map(|&t| evolve_closed_form(&rho0, t, &eig, &rates))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AnalyticSeries {
        times,
        rho,
        eigensystem: eig,
        rates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitSummary {
    pub offset: f64,
    pub amplitude: f64,
    pub decay_rate: f64,
    pub frequency: f64,
    pub residual_norm: f64,
}

impl From<DampedCosineFit> for FitSummary {
    fn from(f: DampedCosineFit) -> Self {
        Self {
            offset: f.offset,
            amplitude: f.amplitude,
            decay_rate: f.decay_rate,
            frequency: f.frequency,
            residual_norm: f.residual_norm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitOutcome {
    pub fit: Option<FitSummary>,
    pub error: Option<String>,
}

impl FitOutcome {
    fn of(times: &[f64], values: &[f64]) -> Self {
        match fit_damped_cosine(times, values) {
            Ok(f) => Self {
                fit: Some(f.into()),
                error: None,
            },
            Err(e) => Self {
                fit: None,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStats {
    pub max_abs_deviation: f64,
    /// Largest |Tr ρ − 1| / stderr over times with a non-zero stderr.
    pub max_deviation_in_stderr: Option<f64>,
    /// Largest |Tr ρ − 1| of a single sample.
    pub max_sample_deviation: f64,
    /// |Tr ρ − 1| ≤ max(3·stderr, 1e-12) at every time.
    pub within_bounds: bool,
}

impl TraceStats {
    pub fn of(series: &ReducedDensitySeries) -> Self {
        let mut max_abs: f64 = 0.0;
        let mut max_rel: Option<f64> = None;
        let mut ok = true;
        for (tr, se) in series.trace_mean.iter().zip(&series.trace_stderr) {
            let dev = (tr - 1.0).abs();
            max_abs = max_abs.max(dev);
            if *se > 0.0 {
                max_rel = Some(max_rel.unwrap_or(0.0).max(dev / se));
            }
            ok &= dev <= (3.0 * se).max(1e-12);
        }
        Self {
            max_abs_deviation: max_abs,
            max_deviation_in_stderr: max_rel,
            max_sample_deviation: series.max_sample_trace_deviation,
            within_bounds: ok,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyShift {
    /// (ν_numeric − ν_analytic) / ν_analytic
    pub relative: Option<f64>,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub n_samples: usize,
    pub n_excluded: usize,
    pub max_abs_delta_rho22: f64,
    pub rms_delta_rho22: f64,
    pub fit_numeric: FitOutcome,
    pub fit_analytic: FitOutcome,
    pub omega_formula: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub g_c: f64,
    pub frequency_shift: FrequencyShift,
    pub trace: TraceStats,
    pub max_sample_hermiticity_deviation: f64,
}

pub fn compare_series(numeric: &ReducedDensitySeries, analytic: &AnalyticSeries) -> CompareReport {
    let num: Vec<f64> = numeric.rho.iter().map(|m| m[RHO22].re).collect();
    let ana: Vec<f64> = analytic.rho.iter().map(|m| m[RHO22].re).collect();
    let diffs: Vec<f64> = num.iter().zip(&ana).map(|(a, b)| a - b).collect();
    let max_abs = diffs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let rms = (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64).sqrt();
    let fit_numeric = FitOutcome::of(&numeric.times, &num);
    let fit_analytic = FitOutcome::of(&analytic.times, &ana);
    let relative = match (&fit_numeric.fit, &fit_analytic.fit) {
        (Some(n), Some(a)) if a.frequency > 0.0 => Some((n.frequency - a.frequency) / a.frequency),
        _ => None,
    };
    let flagged = relative.is_none_or(|r| r.abs() > FREQUENCY_SHIFT_FLAG);
    CompareReport {
        n_samples: numeric.n_samples,
        n_excluded: numeric.n_excluded,
        max_abs_delta_rho22: max_abs,
        rms_delta_rho22: rms,
        fit_numeric,
        fit_analytic,
        omega_formula: analytic.rates.omega,
        omega_plus: analytic.rates.omega_plus,
        omega_minus: analytic.rates.omega_minus,
        g_c: analytic.rates.g_c,
        frequency_shift: FrequencyShift { relative, flagged },
        trace: TraceStats::of(numeric),
        max_sample_hermiticity_deviation: numeric.max_sample_hermiticity_deviation,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplerRow {
    pub bath: usize,
    pub mode: usize,
    pub omega: f64,
    pub var_r: f64,
    pub var_r_expected: f64,
    pub var_p: f64,
    pub var_p_expected: f64,
    /// Var(P) / (ω² Var(R)), one in expectation.
    pub equipartition_ratio: f64,
    /// (ratio − 1) in units of its standard error √(4/(M − 1)).
    pub equipartition_z: f64,
}

impl SamplerRow {
    pub fn rel_err_r(&self) -> f64 {
        self.var_r / self.var_r_expected - 1.0
    }

    pub fn rel_err_p(&self) -> f64 {
        self.var_p / self.var_p_expected - 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecadeSummary {
    pub bath: usize,
    pub omega_from: f64,
    pub omega_to: f64,
    pub n_modes: usize,
    pub max_rel_err_var_r: f64,
    pub max_rel_err_var_p: f64,
    pub max_abs_equipartition_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplerReport {
    pub n_samples: usize,
    pub decades: Vec<DecadeSummary>,
    #[serde(skip)]
    pub rows: Vec<SamplerRow>,
}

/// Empirical phase-space moments over the same draws the estimator uses.
pub fn sampler_check(config: &RunConfig) -> Result<SamplerReport, CliError> {
    let (_, baths) = build_system(config)?;
    let modes = baths.modes();
    let n = modes.len();
    let nb = baths.n_baths();
    let mut moments = RunningMoments::new(2 * n * nb);
    let mut buf = vec![0.0; 2 * n * nb];
    for i in 0..config.n_samples {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(i as u64);
        let x = baths.sample(&mut rng);
        buf[..n * nb].copy_from_slice(&x.r);
        buf[n * nb..].copy_from_slice(&x.p);
        moments.push(&buf);
    }
    let m = config.n_samples as f64;
    let ratio_se = (4.0 / (m - 1.0).max(1.0)).sqrt();
    let mut rows = Vec::with_capacity(n * nb);
    for (ks, &beta) in baths.beta().iter().enumerate() {
        for (i, &w) in modes.omega().iter().enumerate() {
            let k = ks * n + i;
            let var_r = moments.variance(k);
            let var_p = moments.variance(n * nb + k);
            let ratio = var_p / (w * w * var_r);
            rows.push(SamplerRow {
                bath: ks,
                mode: i,
                omega: w,
                var_r,
                var_r_expected: thermal_variance_r(beta, w),
                var_p,
                var_p_expected: thermal_variance_p(beta, w),
                equipartition_ratio: ratio,
                equipartition_z: (ratio - 1.0) / ratio_se,
            });
        }
    }
    let mut decades = Vec::new();
    for ks in 0..nb {
        let bath_rows: Vec<&SamplerRow> = rows.iter().filter(|r| r.bath == ks).collect();
        let lo = bath_rows
            .iter()
            .map(|r| r.omega.log10().floor() as i32)
            .min()
            .unwrap_or(0);
        let hi = bath_rows
            .iter()
            .map(|r| r.omega.log10().floor() as i32)
            .max()
            .unwrap_or(0);
        for d in lo..=hi {
            let sel: Vec<&&SamplerRow> = bath_rows
                .iter()
                .filter(|r| r.omega.log10().floor() as i32 == d)
                .collect();
            if sel.is_empty() {
                continue;
            }
            decades.push(DecadeSummary {
                bath: ks,
                omega_from: 10f64.powi(d),
                omega_to: 10f64.powi(d + 1),
                n_modes: sel.len(),
                max_rel_err_var_r: sel.iter().map(|r| r.rel_err_r().abs()).fold(0.0, f64::max),
                max_rel_err_var_p: sel.iter().map(|r| r.rel_err_p().abs()).fold(0.0, f64::max),
                max_abs_equipartition_z: sel
                    .iter()
                    .map(|r| r.equipartition_z.abs())
                    .fold(0.0, f64::max),
            });
        }
    }
    Ok(SamplerReport {
        n_samples: config.n_samples,
        decades,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub state: usize,
    pub t: f64,
    pub max_abs_difference: f64,
    pub trace_deviation: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub n_states: usize,
    pub times: Vec<f64>,
    pub max_abs_difference: f64,
    pub max_trace_deviation: f64,
    pub min_eigenvalue: f64,
    /// f33/f44 of the closed form long after relaxation, and Ω₊/Ω₋.
    pub steady_state_ratio: Option<f64>,
    pub expected_steady_state_ratio: Option<f64>,
    /// Largest change of f11 or f22 over the checked times.
    pub max_frozen_population_drift: f64,
    #[serde(skip)]
    pub rows: Vec<OracleRow>,
}

pub const ORACLE_TIMES: [f64; 4] = [0.5, 1.0, 5.0, 20.0];

/// ρ = G G† / Tr(G G†) with complex Gaussian G.
pub fn random_density_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DMatrix<C64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        C64::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        )
    });
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

/// Closed form against exp(𝓛t) on `n_states` random states at [`ORACLE_TIMES`].
pub fn oracle_check(config: &RunConfig, n_states: usize) -> Result<OracleReport, CliError> {
    let (eig, rates) = analytic_rates(config)?;
    let (system, _) = build_system(config)?;
    let h_s = system.chain().hamiltonian().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rows = Vec::with_capacity(n_states * ORACLE_TIMES.len());
    let mut drift: f64 = 0.0;
    for state in 0..n_states {
        let rho0 = random_density_matrix(&mut rng, 4);
        let f0 = eig.to_eigenbasis(&rho0);
        for &t in &ORACLE_TIMES {
            let closed = evolve_closed_form(&rho0, t, &eig, &rates)?;
            let exact = liouvillian_oracle(&rho0, t, &h_s, &eig, &rates)?;
            let diff = (&closed - &exact)
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            let herm = (&closed + closed.adjoint()) * C64::new(0.5, 0.0);
            let f = eig.to_eigenbasis(&closed);
            drift = drift
                .max((f[(0, 0)] - f0[(0, 0)]).norm())
                .max((f[(1, 1)] - f0[(1, 1)]).norm());
            rows.push(OracleRow {
                state,
                t,
                max_abs_difference: diff,
                trace_deviation: (closed.trace() - C64::new(1.0, 0.0)).norm(),
                min_eigenvalue: herm.symmetric_eigenvalues().min(),
            });
        }
    }
    let (steady, expected) = if rates.omega > 0.0 && rates.omega_minus > 0.0 {
        let mut f0 = DMatrix::zeros(4, 4);
        f0[(3, 3)] = C64::new(1.0, 0.0);
        let f = spinbath_core::analytic::evolve_eigenbasis(&f0, 50.0 / rates.omega, &eig, &rates)?;
        (
            Some(f[(2, 2)].re / f[(3, 3)].re),
            Some(rates.omega_plus / rates.omega_minus),
        )
    } else {
        (None, None)
    };
    Ok(OracleReport {
        n_states,
        times: ORACLE_TIMES.to_vec(),
        max_abs_difference: rows
            .iter()
            .map(|r| r.max_abs_difference)
            .fold(0.0, f64::max),
        max_trace_deviation: rows.iter().map(|r| r.trace_deviation).fold(0.0, f64::max),
        min_eigenvalue: rows
            .iter()
            .map(|r| r.min_eigenvalue)
            .fold(f64::INFINITY, f64::min),
        steady_state_ratio: steady,
        expected_steady_state_ratio: expected,
        max_frozen_population_drift: drift,
        rows,
    })
}
