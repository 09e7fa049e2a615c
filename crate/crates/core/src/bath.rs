//! Discretized harmonic baths and thermal Wigner sampling.
//!
//! Mode frequencies follow ω_I = −ln(1 − I ω₀) with ω₀ = (1 − e^{−ω_max})/N,
//! so ω_N = ω_max. Couplings default to c_I = (ξ ω₀ ω_I)^{1/2}; the
//! frequency-weighted variant c_I = ω_I (ξ ω₀)^{1/2} is available through
//! [`CouplingForm`].

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// How the coupling constants depend on the mode frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CouplingForm {
    /// c_I = (ξ ω₀ ω_I)^{1/2}
    #[default]
    AsPrinted,
    /// c_I = ω_I (ξ ω₀)^{1/2}, the strictly Ohmic variant.
    FrequencyWeighted,
}

impl CouplingForm {
    /// Continuum limit of 2π Σ_I g_I² δ(ω − ω_I) with g_I = c_I/√(2ω_I).
    pub fn spectral_density(self, xi: f64, omega: f64) -> f64 {
        let base = std::f64::consts::PI * xi * (-omega).exp();
        match self {
            CouplingForm::AsPrinted => base,
            CouplingForm::FrequencyWeighted => base * omega,
        }
    }
}

/// Frequencies and couplings shared by every bath of the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct BathModes {
    omega: Vec<f64>,
    omega_sq: Vec<f64>,
    coupling: Vec<f64>,
    xi: f64,
    omega_max: f64,
    omega0: f64,
    form: CouplingForm,
}

impl BathModes {
    pub fn discretize(n: usize, xi: f64, omega_max: f64) -> Result<Self> {
        Self::discretize_with(n, xi, omega_max, CouplingForm::AsPrinted)
    }

    pub fn discretize_with(n: usize, xi: f64, omega_max: f64, form: CouplingForm) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n_modes", "need at least one mode"));
        }
        if !(xi >= 0.0 && xi.is_finite()) {
            return Err(Error::param("xi", "must be finite and non-negative"));
        }
        if !(omega_max > 0.0 && omega_max.is_finite()) {
            return Err(Error::param("omega_max", "must be finite and positive"));
        }
        let omega0 = -(-omega_max).exp_m1() / n as f64;
        let omega: Vec<f64> = (1..=n)
            .map(|i| {
                if i == n {
                    omega_max
                } else {
                    -(-(i as f64) * omega0).ln_1p()
                }
            })
            .collect();
        let coupling = omega
            .iter()
            .map(|&w| match form {
                CouplingForm::AsPrinted => (xi * omega0 * w).sqrt(),
                CouplingForm::FrequencyWeighted => w * (xi * omega0).sqrt(),
            })
            .collect();
        let omega_sq = omega.iter().map(|w| w * w).collect();
        Ok(Self {
            omega,
            omega_sq,
            coupling,
            xi,
            omega_max,
            omega0,
            form,
        })
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn omega_sq(&self) -> &[f64] {
        &self.omega_sq
    }

    pub fn coupling(&self) -> &[f64] {
        &self.coupling
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    /// The discretization step ω₀.
    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn form(&self) -> CouplingForm {
        self.form
    }

    /// Second-quantized coupling g_I = c_I/√(2ω_I) of −σz Σ g_I (b_I + b_I†).
    pub fn boson_coupling(&self, mode: usize) -> f64 {
        self.coupling[mode] / (2.0 * self.omega[mode]).sqrt()
    }
}

/// Var(R) of the thermal Wigner Gaussian: coth(βω/2)/(2ω).
pub fn thermal_variance_r(beta: f64, omega: f64) -> f64 {
    1.0 / ((beta * omega / 2.0).tanh() * 2.0 * omega)
}

/// Var(P) of the thermal Wigner Gaussian: (ω/2) coth(βω/2).
pub fn thermal_variance_p(beta: f64, omega: f64) -> f64 {
    omega / (2.0 * (beta * omega / 2.0).tanh())
}

/// Bath coordinates for all modes of all baths, stored bath-major:
/// index `ks * n_modes + I`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    n_modes: usize,
    pub r: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhasePoint {
    pub fn zeros(n_modes: usize, n_baths: usize) -> Self {
        Self {
            n_modes,
            r: vec![0.0; n_modes * n_baths],
            p: vec![0.0; n_modes * n_baths],
        }
    }

    pub fn from_parts(n_modes: usize, r: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if n_modes == 0 || r.len() != p.len() || r.len() % n_modes != 0 {
            return Err(Error::DimensionMismatch {
                expected: r.len(),
                found: p.len(),
            });
        }
        Ok(Self { n_modes, r, p })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_baths(&self) -> usize {
        self.r.len() / self.n_modes
    }

    pub fn bath_r(&self, ks: usize) -> &[f64] {
        &self.r[ks * self.n_modes..(ks + 1) * self.n_modes]
    }

    pub fn bath_p(&self, ks: usize) -> &[f64] {
        &self.p[ks * self.n_modes..(ks + 1) * self.n_modes]
    }

    pub fn r_norm(&self) -> f64 {
        self.r.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.r.iter().chain(&self.p).all(|x| x.is_finite())
    }

    /// b_ks = Σ_I c_I R_{I,ks} for every bath.
    pub fn coupling_sums(&self, coupling: &[f64]) -> Vec<f64> {
        (0..self.n_baths())
            .map(|ks| dot(coupling, self.bath_r(ks)))
            .collect()
    }

    /// H_B = Σ (P²/2 + ω²R²/2).
    pub fn bath_energy(&self, modes: &BathModes) -> f64 {
        (0..self.n_baths())
            .map(|ks| {
                self.bath_r(ks)
                    .iter()
                    .zip(self.bath_p(ks))
                    .zip(modes.omega_sq())
                    .map(|((r, p), w2)| 0.5 * (p * p + w2 * r * r))
                    .sum::<f64>()
            })
            .sum()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One inverse temperature per bath over shared modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalBaths {
    modes: BathModes,
    beta: Vec<f64>,
    sd_r: Vec<Vec<f64>>,
    sd_p: Vec<Vec<f64>>,
}

impl ThermalBaths {
    /// `beta` may contain `f64::INFINITY` for a zero-temperature bath.
    pub fn new(modes: BathModes, beta: Vec<f64>) -> Result<Self> {
        if beta.is_empty() {
            return Err(Error::param(
                "beta",
                "need one inverse temperature per bath",
            ));
        }
        if let Some(b) = beta.iter().find(|b| b.is_nan() || **b <= 0.0) {
            return Err(Error::param("beta", format!("must be positive, got {b}")));
        }
        let sd_r = beta
            .iter()
            .map(|&b| {
                modes
                    .omega()
                    .iter()
                    .map(|&w| thermal_variance_r(b, w).sqrt())
                    .collect()
            })
            .collect();
        let sd_p = beta
            .iter()
            .map(|&b| {
                modes
                    .omega()
                    .iter()
                    .map(|&w| thermal_variance_p(b, w).sqrt())
                    .collect()
            })
            .collect();
        Ok(Self {
            modes,
            beta,
            sd_r,
            sd_p,
        })
    }

    pub fn modes(&self) -> &BathModes {
        &self.modes
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn n_baths(&self) -> usize {
        self.beta.len()
    }

    /// Draws (R_I, P_I) for bath `ks` from its normalized thermal Wigner density.
    pub fn sample_bath<R: Rng + ?Sized>(
        &self,
        ks: usize,
        rng: &mut R,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let (sd_r, sd_p) = self.bath_widths(ks)?;
        let mut r = Vec::with_capacity(sd_r.len());
        let mut p = Vec::with_capacity(sd_p.len());
        for (sr, sp) in sd_r.iter().zip(sd_p) {
            r.push(sr * rng.sample::<f64, _>(StandardNormal));
            p.push(sp * rng.sample::<f64, _>(StandardNormal));
        }
        Ok((r, p))
    }

    /// Draws a full phase point, bath after bath.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PhasePoint {
        let n = self.modes.len();
        let mut x = PhasePoint::zeros(n, self.n_baths());
        for ks in 0..self.n_baths() {
            let range = ks * n..(ks + 1) * n;
            for ((r, p), (sr, sp)) in x.r[range.clone()]
                .iter_mut()
                .zip(&mut x.p[range])
                .zip(self.sd_r[ks].iter().zip(&self.sd_p[ks]))
            {
                *r = sr * rng.sample::<f64, _>(StandardNormal);
                *p = sp * rng.sample::<f64, _>(StandardNormal);
            }
        }
        x
    }

    fn bath_widths(&self, ks: usize) -> Result<(&[f64], &[f64])> {
        if ks >= self.n_baths() {
            return Err(Error::SpinIndexOutOfRange {
                index: ks,
                n_spins: self.n_baths(),
            });
        }
        Ok((&self.sd_r[ks], &self.sd_p[ks]))
    }

    /// ln of Π_I tanh(βω_I/2)/π · exp[−2 tanh(βω_I/2)/ω_I (P_I²/2 + ω_I²R_I²/2)].
    pub fn wigner_log_density(&self, ks: usize, r: &[f64], p: &[f64]) -> Result<f64> {
        self.bath_widths(ks)?;
        let n = self.modes.len();
        if r.len() != n || p.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: r.len().min(p.len()),
            });
        }
        let beta = self.beta[ks];
        Ok(self
            .modes
            .omega()
            .iter()
            .zip(r.iter().zip(p))
            .map(|(&w, (&ri, &pi))| {
                let t = (beta * w / 2.0).tanh();
                let energy = 0.5 * (pi * pi + w * w * ri * ri);
                (t / std::f64::consts::PI).ln() - 2.0 * t / w * energy
            })
            .sum())
    }

    pub fn wigner_density(&self, ks: usize, r: &[f64], p: &[f64]) -> Result<f64> {
        Ok(self.wigner_log_density(ks, r, p)?.exp())
    }
}
