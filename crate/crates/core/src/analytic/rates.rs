//! Markovian rates of the discretized baths.

use crate::bath::{BathModes, CouplingForm};
use crate::error::{Error, Result};

/// Bose occupation 1/(e^{βω} − 1); zero at β = ∞.
pub fn bose_occupation(beta: f64, omega: f64) -> f64 {
    1.0 / (beta * omega).exp_m1()
}

/// γ(ω) of the continuum bath: S(ω)(n + 1) for ω > 0, S(|ω|) n(|ω|) for ω < 0,
/// where S(ω) = π ξ e^{−ω} for the printed coupling form.
pub fn markov_rate(xi: f64, beta: f64, omega: f64) -> Result<f64> {
    markov_rate_with(CouplingForm::AsPrinted, xi, beta, omega)
}

pub fn markov_rate_with(form: CouplingForm, xi: f64, beta: f64, omega: f64) -> Result<f64> {
    if !(xi >= 0.0 && xi.is_finite()) {
        return Err(Error::param("xi", "must be finite and non-negative"));
    }
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::param("beta", "must be positive"));
    }
    if omega == 0.0 || !omega.is_finite() {
        return Err(Error::param(
            "omega",
            "must be finite and non-zero; zero-frequency rates go through the dephasing convention",
        ));
    }
    let w = omega.abs();
    let n = bose_occupation(beta, w);
    let s = form.spectral_density(xi, w);
    Ok(if omega > 0.0 { s * (n + 1.0) } else { s * n })
}

/// A rate estimated directly from the discrete modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteRate {
    pub rate: f64,
    /// False when |ω| lies beyond ω_max + 3η, where the discrete bath has no support.
    pub supported: bool,
}

/// 2π Σ_I g_I² [(n_I + 1) δ_η(ω − ω_I) + n_I δ_η(ω + ω_I)] with a unit-area
/// Gaussian δ_η of standard deviation η and g_I = c_I/√(2ω_I).
pub fn discrete_bath_rate(
    modes: &BathModes,
    beta: f64,
    omega: f64,
    eta: f64,
) -> Result<DiscreteRate> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::param(
            "eta",
            "broadening must be finite and positive",
        ));
    }
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::param("beta", "must be positive"));
    }
    let norm = 1.0 / (eta * (2.0 * std::f64::consts::PI).sqrt());
    let kernel = |x: f64| norm * (-0.5 * (x / eta).powi(2)).exp();
    let rate = 2.0
        * std::f64::consts::PI
        * (0..modes.len())
            .map(|i| {
                let w = modes.omega()[i];
                let g2 = modes.boson_coupling(i).powi(2);
                let n = bose_occupation(beta, w);
                g2 * ((n + 1.0) * kernel(omega - w) + n * kernel(omega + w))
            })
            .sum::<f64>();
    Ok(DiscreteRate {
        rate,
        supported: omega.abs() <= modes.omega_max() + 3.0 * eta,
    })
}

/// Ω± = ½ Σ_i γ^(i)(±ω), Ω = Ω₊ + Ω₋, g_c = ½ Σ_i (γ^(i)(0₊) + γ^(i)(0₋)).
pub fn omega_constants(
    gamma_plus: &[f64],
    gamma_minus: &[f64],
    gamma0: &[f64],
) -> (f64, f64, f64, f64) {
    let omega_plus = 0.5 * gamma_plus.iter().sum::<f64>();
    let omega_minus = 0.5 * gamma_minus.iter().sum::<f64>();
    let g_c = 0.5 * gamma0.iter().sum::<f64>();
    (omega_plus, omega_minus, omega_plus + omega_minus, g_c)
}

/// How γ(0₊) + γ(0₋) is assigned, since it diverges for these baths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dephasing {
    /// Evaluate γ(ω₁) + γ(−ω₁) at the lowest discretized frequency.
    LowestMode(f64),
    /// Use this g_c directly.
    Fixed(f64),
}

/// Per-bath rates and the constants derived from them, for two baths.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSet {
    pub gamma_plus: Vec<f64>,
    pub gamma_minus: Vec<f64>,
    /// γ^(i)(0₊) + γ^(i)(0₋)
    pub gamma0: Vec<f64>,
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub omega: f64,
    pub g_c: f64,
}

impl RateSet {
    pub fn from_parts(
        gamma_plus: Vec<f64>,
        gamma_minus: Vec<f64>,
        gamma0: Vec<f64>,
    ) -> Result<Self> {
        if gamma_plus.len() != 2 || gamma_minus.len() != 2 || gamma0.len() != 2 {
            return Err(Error::param(
                "rates",
                "the closed form needs exactly two baths",
            ));
        }
        if gamma_plus
            .iter()
            .chain(&gamma_minus)
            .chain(&gamma0)
            .any(|g| !(*g >= 0.0 && g.is_finite()))
        {
            return Err(Error::param("rates", "must be finite and non-negative"));
        }
        let (omega_plus, omega_minus, omega, g_c) =
            omega_constants(&gamma_plus, &gamma_minus, &gamma0);
        Ok(Self {
            gamma_plus,
            gamma_minus,
            gamma0,
            omega_plus,
            omega_minus,
            omega,
            g_c,
        })
    }

    /// Rates of two continuum baths at inverse temperatures `beta` and transition frequency ω.
    pub fn markov(
        form: CouplingForm,
        xi: f64,
        beta: [f64; 2],
        omega: f64,
        dephasing: Dephasing,
    ) -> Result<Self> {
        let mut plus = Vec::with_capacity(2);
        let mut minus = Vec::with_capacity(2);
        let mut zero = Vec::with_capacity(2);
        for &b in &beta {
            if omega == 0.0 {
                plus.push(0.0);
                minus.push(0.0);
            } else {
                plus.push(markov_rate_with(form, xi, b, omega)?);
                minus.push(markov_rate_with(form, xi, b, -omega)?);
            }
            zero.push(match dephasing {
                Dephasing::LowestMode(w1) => {
                    markov_rate_with(form, xi, b, w1)? + markov_rate_with(form, xi, b, -w1)?
                }
                Dephasing::Fixed(g_c) => g_c,
            });
        }
        Self::from_parts(plus, minus, zero)
    }

    /// Replaces g_c, spreading it evenly over the baths.
    pub fn with_g_c(self, g_c: f64) -> Result<Self> {
        Self::from_parts(self.gamma_plus, self.gamma_minus, vec![g_c; 2])
    }

    /// Rescales the per-bath transition rates so that Ω takes the given value,
    /// keeping Ω₊/Ω₋. With no transition rates at all, Ω is split evenly.
    pub fn with_relaxation(self, omega: f64) -> Result<Self> {
        if !(omega >= 0.0 && omega.is_finite()) {
            return Err(Error::param(
                "omega_relax",
                "must be finite and non-negative",
            ));
        }
        let (plus, minus) = if self.omega > 0.0 {
            let scale = omega / self.omega;
            (
                self.gamma_plus.iter().map(|g| g * scale).collect(),
                self.gamma_minus.iter().map(|g| g * scale).collect(),
            )
        } else {
            (vec![omega / 2.0; 2], vec![omega / 2.0; 2])
        };
        Self::from_parts(plus, minus, self.gamma0)
    }
}
