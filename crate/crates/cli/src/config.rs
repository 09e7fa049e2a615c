//! Run configuration: a flat JSON object, every key optional.

use std::path::Path;

use serde::{Deserialize, Serialize};
use spinbath_core::estimator::validate_density_matrix;
use spinbath_core::model::MAX_SPINS;
use spinbath_core::{Complex, CouplingForm, DMatrix, FrameTracking, TimeGrid};

use crate::error::CliError;

type C64 = Complex<f64>;

/// Shipped presets, selectable by name in place of a path.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig1", include_str!("../presets/fig1.json")),
    ("fig2", include_str!("../presets/fig2.json")),
    ("fig3", include_str!("../presets/fig3.json")),
    ("unitary", include_str!("../presets/unitary.json")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingFormName {
    /// c_I = √(ξ ω₀ ω_I)
    #[default]
    AsPrinted,
    /// c_I = ω_I √(ξ ω₀)
    FrequencyWeighted,
}

impl From<CouplingFormName> for CouplingForm {
    fn from(f: CouplingFormName) -> Self {
        match f {
            CouplingFormName::AsPrinted => CouplingForm::AsPrinted,
            CouplingFormName::FrequencyWeighted => CouplingForm::FrequencyWeighted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrackingName {
    #[default]
    Continuous,
    Cartesian,
}

impl From<TrackingName> for FrameTracking {
    fn from(t: TrackingName) -> Self {
        match t {
            TrackingName::Continuous => FrameTracking::Continuous,
            TrackingName::Cartesian => FrameTracking::Cartesian,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedState {
    /// |1,1⟩
    UpUp,
    /// |1,0⟩
    UpDown,
    /// (|1,1⟩ − |1,0⟩)/√2
    PsiMinus,
}

/// Row-major real and imaginary parts; `im` defaults to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixState {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Named(NamedState),
    Matrix(MatrixState),
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Named(NamedState::UpDown)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n_spins: usize,
    pub j_x: f64,
    pub j_y: f64,
    pub j_z: f64,
    /// Oscillators per bath.
    pub n_modes: usize,
    pub xi: f64,
    pub omega_max: f64,
    /// One inverse temperature per spin.
    pub beta: Vec<f64>,
    pub coupling_form: CouplingFormName,
    pub dt: f64,
    pub t_max: f64,
    /// Number of output intervals; the grid holds this many points plus t = 0.
    pub output_points: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub block_size: usize,
    pub frame_tracking: TrackingName,
    pub initial_state: InitialState,
    /// Overrides the dephasing constant of the analytic solution.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_c: Option<f64>,
    /// Overrides the relaxation constant Ω of the analytic solution.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_relax: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_spins: 2,
            j_x: 1.0,
            j_y: 1.0,
            j_z: 0.5,
            n_modes: 200,
            xi: 0.007,
            omega_max: 3.0,
            beta: vec![1.0, 1.0],
            coupling_form: CouplingFormName::default(),
            dt: 0.01,
            t_max: 20.0,
            output_points: 200,
            n_samples: 5000,
            seed: 1,
            block_size: 64,
            frame_tracking: TrackingName::default(),
            initial_state: InitialState::default(),
            g_c: None,
            omega_relax: None,
        }
    }
}

fn invalid(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("`{field}`: {reason}"))
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(
            field,
            format!("must be finite and positive, got {v}"),
        ))
    }
}

fn non_negative(field: &str, v: f64) -> Result<(), CliError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(
            field,
            format!("must be finite and non-negative, got {v}"),
        ))
    }
}

impl RunConfig {
    pub fn from_json(text: &str, origin: &str) -> Result<Self, CliError> {
        let config: RunConfig = serde_json::from_str(text)
            .map_err(|e| CliError::Validation(format!("{origin}: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn preset(name: &str) -> Option<Self> {
        PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(n, text)| Self::from_json(text, n).expect("shipped presets are valid"))
    }

    /// Reads `path`, or the shipped preset of that name when no such file exists.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        match std::fs::read_to_string(path) {
            Ok(text) => Self::from_json(&text, &path.display().to_string()),
            Err(e) => {
                let name = path.to_string_lossy();
                Self::preset(&name).ok_or_else(|| {
                    CliError::Validation(format!(
                        "cannot read config {}: {e} (presets: {})",
                        path.display(),
                        PRESETS
                            .iter()
                            .map(|(n, _)| *n)
                            .collect::<Vec<_>>()
                            .join(", ")
                    ))
                })
            }
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn dim(&self) -> usize {
        1 << self.n_spins
    }

    pub fn grid(&self) -> Result<TimeGrid, CliError> {
        TimeGrid::new(self.dt, self.t_max, self.output_points).map_err(CliError::from)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.n_spins < 2 || self.n_spins > MAX_SPINS {
            return Err(invalid("n_spins", format!("must lie in 2..={MAX_SPINS}")));
        }
        for (name, v) in [("j_x", self.j_x), ("j_y", self.j_y), ("j_z", self.j_z)] {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        if self.n_modes == 0 {
            return Err(invalid("n_modes", "must be at least 1"));
        }
        non_negative("xi", self.xi)?;
        positive("omega_max", self.omega_max)?;
        if self.beta.len() != self.n_spins {
            return Err(invalid(
                "beta",
                format!(
                    "need one value per spin ({}), got {}",
                    self.n_spins,
                    self.beta.len()
                ),
            ));
        }
        for &b in &self.beta {
            positive("beta", b)?;
        }
        positive("dt", self.dt)?;
        positive("t_max", self.t_max)?;
        if self.output_points == 0 {
            return Err(invalid("output_points", "must be at least 1"));
        }
        self.grid()?;
        if self.n_samples == 0 {
            return Err(invalid("n_samples", "must be at least 1"));
        }
        if self.block_size == 0 {
            return Err(invalid("block_size", "must be at least 1"));
        }
        if let Some(g) = self.g_c {
            non_negative("g_c", g)?;
        }
        if let Some(o) = self.omega_relax {
            non_negative("omega_relax", o)?;
        }
        self.initial_density()?;
        Ok(())
    }

    /// The initial reduced density matrix, checked for Hermiticity, unit trace and positivity.
    pub fn initial_density(&self) -> Result<DMatrix<C64>, CliError> {
        let dim = self.dim();
        let rho = match &self.initial_state {
            InitialState::Named(name) => {
                if self.n_spins != 2 {
                    return Err(invalid(
                        "initial_state",
                        "named states are defined for two spins",
                    ));
                }
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let psi: [f64; 4] = match name {
                    NamedState::UpUp => [1.0, 0.0, 0.0, 0.0],
                    NamedState::UpDown => [0.0, 1.0, 0.0, 0.0],
                    NamedState::PsiMinus => [s, -s, 0.0, 0.0],
                };
                DMatrix::from_fn(4, 4, |i, j| C64::new(psi[i] * psi[j], 0.0))
            }
            InitialState::Matrix(m) => {
                let shape_ok =
                    |rows: &Vec<Vec<f64>>| rows.len() == dim && rows.iter().all(|r| r.len() == dim);
                if !shape_ok(&m.re) || m.im.as_ref().is_some_and(|im| !shape_ok(im)) {
                    return Err(invalid(
                        "initial_state",
                        format!("matrix must be {dim}×{dim}"),
                    ));
                }
                DMatrix::from_fn(dim, dim, |i, j| {
                    C64::new(m.re[i][j], m.im.as_ref().map_or(0.0, |im| im[i][j]))
                })
            }
        };
        validate_density_matrix(&rho, dim).map_err(|e| invalid("initial_state", e))?;
        Ok(rho)
    }
}
