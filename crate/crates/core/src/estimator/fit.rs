//! Least-squares fit of a + b·e^{−Γt}·cos(νt).

use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::storage::Owned;
use nalgebra::{DMatrix, DVector, Dyn, Vector4, U4};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampedCosineFit {
    pub offset: f64,
    pub amplitude: f64,
    pub decay_rate: f64,
    pub frequency: f64,
    /// Euclidean norm of the residual vector.
    pub residual_norm: f64,
}

impl DampedCosineFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.offset + self.amplitude * (-self.decay_rate * t).exp() * (self.frequency * t).cos()
    }
}

struct Problem<'a> {
    t: &'a [f64],
    y: &'a [f64],
    // (a, b, Γ, ν)
    p: Vector4<f64>,
}

impl LeastSquaresProblem<f64, Dyn, U4> for Problem<'_> {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, U4>;
    type ParameterStorage = Owned<f64, U4>;

    fn set_params(&mut self, p: &Vector4<f64>) {
        self.p.copy_from(p);
    }

    fn params(&self) -> Vector4<f64> {
        self.p
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        let [a, b, g, nu] = [self.p[0], self.p[1], self.p[2], self.p[3]];
        Some(DVector::from_iterator(
            self.t.len(),
            self.t
                .iter()
                .zip(self.y)
                .map(|(&t, &y)| a + b * (-g * t).exp() * (nu * t).cos() - y),
        ))
    }

    fn jacobian(&self) -> Option<nalgebra::OMatrix<f64, Dyn, U4>> {
        let [_, b, g, nu] = [self.p[0], self.p[1], self.p[2], self.p[3]];
        let mut j = nalgebra::OMatrix::<f64, Dyn, U4>::zeros(self.t.len());
        for (row, &t) in self.t.iter().enumerate() {
            let e = (-g * t).exp();
            let (s, c) = (nu * t).sin_cos();
            j[(row, 0)] = 1.0;
            j[(row, 1)] = e * c;
            j[(row, 2)] = -t * b * e * c;
            j[(row, 3)] = -t * b * e * s;
        }
        Some(j)
    }
}

/// Frequency of the largest periodogram peak of the mean-subtracted series.
fn dominant_frequency(t: &[f64], y: &[f64], mean: f64) -> f64 {
    let span = t[t.len() - 1] - t[0];
    let dt = span / (t.len() - 1) as f64;
    let nyquist = std::f64::consts::PI / dt;
    let lowest = std::f64::consts::PI / span;
    let n_grid = 20 * t.len();
    let mut best = (lowest, f64::NEG_INFINITY);
    for k in 0..=n_grid {
        let nu = lowest + (nyquist - lowest) * k as f64 / n_grid as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (&ti, &yi) in t.iter().zip(y) {
            let (s, c) = (nu * ti).sin_cos();
            re += (yi - mean) * c;
            im += (yi - mean) * s;
        }
        let power = re * re + im * im;
        if power > best.1 {
            best = (nu, power);
        }
    }
    best.0
}

/// Fits a + b·e^{−Γt}·cos(νt) to a real time series spanning a few periods.
///
/// The starting frequency comes from a periodogram; several starting decay
/// rates are tried and the lowest residual wins.
pub fn fit_damped_cosine(t: &[f64], y: &[f64]) -> Result<DampedCosineFit> {
    if t.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: t.len(),
            found: y.len(),
        });
    }
    if t.len() < 8 {
        return Err(Error::param("series", "need at least 8 points"));
    }
    if t.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::param("series", "contains non-finite values"));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let nu0 = dominant_frequency(t, y, mean);
    let span = t[t.len() - 1] - t[0];

    let solver = LevenbergMarquardt::new().with_patience(200);
    let mut best: Option<(DampedCosineFit, bool)> = None;
    for g0 in [0.0, 0.3 / span, 3.0 / span] {
        // linear least squares for (a, b) at fixed (Γ, ν)
        let basis = DMatrix::from_fn(t.len(), 2, |i, k| {
            if k == 0 {
                1.0
            } else {
                (-g0 * t[i]).exp() * (nu0 * t[i]).cos()
            }
        });
        let ab = basis
            .clone()
            .svd(true, true)
            .solve(&DVector::from_column_slice(y), 1e-12)
            .map(|v| (v[0], v[1]))
            .unwrap_or((mean, y[0] - mean));
        let problem = Problem {
            t,
            y,
            p: Vector4::new(ab.0, ab.1, g0, nu0),
        };
        let (solved, report) = solver.minimize(problem);
        let residual_norm = solved.residuals().map_or(f64::INFINITY, |r| r.norm());
        let p = solved.params();
        let fit = DampedCosineFit {
            offset: p[0],
            amplitude: p[1],
            decay_rate: p[2],
            frequency: p[3],
            residual_norm,
        };
        let ok = report.termination.was_successful() && residual_norm.is_finite();
        let better = match &best {
            None => true,
            Some((b, b_ok)) => (ok && !b_ok) || (ok == *b_ok && residual_norm < b.residual_norm),
        };
        if better {
            best = Some((fit, ok));
        }
    }
    match best {
        Some((mut fit, true)) => {
            // cos is even in ν
            if fit.frequency < 0.0 {
                fit.frequency = -fit.frequency;
            }
            Ok(fit)
        }
        Some((fit, false)) => Err(Error::FitFailed {
            residual: fit.residual_norm,
        }),
        None => unreachable!("at least one start is always tried"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn grid() -> Vec<f64> {
        (0..=200).map(|k| k as f64 * 0.1).collect()
    }

    #[test]
    fn recovers_damped_series() {
        let t = grid();
        let y: Vec<f64> = t
            .iter()
            .map(|t| 0.25 * (1.0 + (-0.1 * t).exp() * (4.0 * t).cos()))
            .collect();
        let f = fit_damped_cosine(&t, &y).unwrap();
        assert!((f.offset - 0.25).abs() < 1e-6, "{f:?}");
        assert!((f.amplitude - 0.25).abs() < 1e-6, "{f:?}");
        assert!((f.decay_rate - 0.1).abs() < 1e-6, "{f:?}");
        assert!((f.frequency - 4.0).abs() < 1e-6, "{f:?}");
    }

    #[test]
    fn undamped_series_has_zero_decay() {
        let t = grid();
        let y: Vec<f64> = t.iter().map(|t| 0.5 * (1.0 + (4.0 * t).cos())).collect();
        let f = fit_damped_cosine(&t, &y).unwrap();
        assert!(f.decay_rate.abs() < 1e-6, "{f:?}");
        assert!((f.frequency - 4.0).abs() < 1e-6, "{f:?}");
        assert!(f.residual_norm < 1e-8);
    }

    #[test]
    fn noisy_series_frequency_within_one_percent() {
        let t = grid();
        let noise = Normal::new(0.0, 0.01).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let y: Vec<f64> = t
            .iter()
            .map(|t| 0.25 * (1.0 + (-0.1 * t).exp() * (4.0 * t).cos()) + noise.sample(&mut rng))
            .collect();
        let f = fit_damped_cosine(&t, &y).unwrap();
        assert!((f.frequency - 4.0).abs() < 0.04, "{f:?}");
        assert!(f.decay_rate > 0.0);
    }

    #[test]
    fn other_frequencies() {
        let t = grid();
        for nu in [1.3, 2.7, 6.0] {
            let y: Vec<f64> = t
                .iter()
                .map(|t| 0.1 - 0.3 * (-0.05 * t).exp() * (nu * t).cos())
                .collect();
            let f = fit_damped_cosine(&t, &y).unwrap();
            assert!((f.frequency - nu).abs() < 1e-6, "{nu}: {f:?}");
            assert!((f.eval(3.3) - y[33]).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let t = grid();
        assert!(fit_damped_cosine(&t, &t[..10]).is_err());
        assert!(fit_damped_cosine(&t[..4], &t[..4]).is_err());
        let mut y = vec![0.0; t.len()];
        y[3] = f64::NAN;
        assert!(fit_damped_cosine(&t, &y).is_err());
    }
}
