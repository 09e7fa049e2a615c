//! Monte-Carlo estimate of the reduced density matrix in the natural basis.

mod fit;
mod stats;

pub use fit::{fit_damped_cosine, DampedCosineFit};
pub use stats::{tree_reduce, RunningMoments};

use nalgebra::{Complex, DMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::adiabatic::{propagate_pair, AdiabaticFrame, FrameTracking, OpenChain, TimeGrid};
use crate::bath::ThermalBaths;
use crate::error::{Error, Result};

type C64 = Complex<f64>;

/// Pairs with |w| at or below this are not propagated.
pub const WEIGHT_CUTOFF: f64 = 1e-14;

/// Allowed fraction of aborted samples.
pub const MAX_EXCLUDED_FRACTION: f64 = 1e-3;

const STATE_TOLERANCE: f64 = 1e-10;

/// Checks that `rho` is a d×d density matrix: Hermitian, unit trace and
/// positive semidefinite, each to 1e-10.
pub fn validate_density_matrix(rho: &DMatrix<C64>, dim: usize) -> Result<()> {
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rho.nrows().max(rho.ncols()),
        });
    }
    if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidState("non-finite entries".into()));
    }
    let asym = (rho - rho.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if asym > STATE_TOLERANCE {
        return Err(Error::InvalidState(format!(
            "not Hermitian (max |ρ − ρ†| = {asym:e})"
        )));
    }
    let trace = rho.trace();
    if (trace - C64::new(1.0, 0.0)).norm() > STATE_TOLERANCE {
        return Err(Error::InvalidState(format!("trace is {trace}, expected 1")));
    }
    let hermitian = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let lowest = hermitian.symmetric_eigenvalues().min();
    if lowest < -STATE_TOLERANCE {
        return Err(Error::InvalidState(format!(
            "not positive semidefinite (eigenvalue {lowest:e})"
        )));
    }
    Ok(())
}

/// w = U₀ᵀ ρ U₀ with U₀ the eigenvector columns of `frame0`.
pub fn initial_adiabatic_weights(
    rho0: &DMatrix<C64>,
    frame0: &AdiabaticFrame,
) -> Result<DMatrix<C64>> {
    let dim = frame0.dim();
    if rho0.nrows() != dim || rho0.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rho0.nrows(),
        });
    }
    let trace = rho0.trace();
    if (trace - C64::new(1.0, 0.0)).norm() > STATE_TOLERANCE {
        return Err(Error::InvalidState(format!("trace is {trace}, expected 1")));
    }
    let u = frame0.vectors.map(|x| C64::new(x, 0.0));
    Ok(u.transpose() * rho0 * u)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub grid: TimeGrid,
    pub tracking: FrameTracking,
    /// Samples per reduction block. The result depends on it, but not on the
    /// number of worker threads.
    pub block_size: usize,
}

impl EstimatorConfig {
    pub fn new(n_samples: usize, seed: u64, grid: TimeGrid) -> Self {
        Self {
            n_samples,
            seed,
            grid,
            tracking: FrameTracking::default(),
            block_size: 64,
        }
    }
}

/// Sample mean of ρ(t) with per-element standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensitySeries {
    pub times: Vec<f64>,
    pub rho: Vec<DMatrix<C64>>,
    pub stderr_re: Vec<DMatrix<f64>>,
    pub stderr_im: Vec<DMatrix<f64>>,
    /// Mean of Re Tr ρ over samples, and its standard error.
    pub trace_mean: Vec<f64>,
    pub trace_stderr: Vec<f64>,
    /// Samples that entered the averages.
    pub n_samples: usize,
    pub n_excluded: usize,
    pub seed: u64,
    /// Largest |Tr ρ − 1| of any single sample at any time.
    pub max_sample_trace_deviation: f64,
    /// Largest |ρ − ρ†| element of any single sample at any time.
    pub max_sample_hermiticity_deviation: f64,
}

impl ReducedDensitySeries {
    pub fn dim(&self) -> usize {
        self.rho.first().map_or(0, |m| m.nrows())
    }

    /// Re ρ_{μν}(t) over the grid, 0-based indices.
    pub fn element_re(&self, mu: usize, nu: usize) -> Vec<f64> {
        self.rho.iter().map(|m| m[(mu, nu)].re).collect()
    }
}

/// Sample stream layout for one output time: Re ρ row-major, Im ρ row-major, Re Tr ρ.
fn slot_len(dim: usize) -> usize {
    2 * dim * dim + 1
}

struct SampleWork {
    values: Vec<f64>,
    trace_deviation: f64,
    hermiticity_deviation: f64,
}

/// Accumulates one sample's ρ(t) into `values`.
fn run_sample(
    system: &OpenChain,
    baths: &ThermalBaths,
    rho0: &DMatrix<C64>,
    index: u64,
    config: &EstimatorConfig,
    work: &mut SampleWork,
) -> Result<()> {
    let dim = system.dim();
    let d2 = dim * dim;
    let slot = slot_len(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index);
    let x0 = baths.sample(&mut rng);
    let frame0 = system.frame_at_point(&x0)?;
    let w = initial_adiabatic_weights(rho0, &frame0)?;
    let w = (&w + w.adjoint()) * C64::new(0.5, 0.0);

    work.values.iter_mut().for_each(|v| *v = 0.0);
    for alpha in 0..dim {
        for alpha_prime in alpha..dim {
            let weight = w[(alpha, alpha_prime)];
            if weight.norm() <= WEIGHT_CUTOFF {
                continue;
            }
            let values = &mut work.values;
            propagate_pair(
                system,
                &x0,
                alpha,
                alpha_prime,
                &config.grid,
                config.tracking,
                |snap| {
                    let out = &mut values[snap.output * slot..(snap.output + 1) * slot];
                    let a = snap.frame.vectors.column(alpha);
                    if alpha == alpha_prime {
                        for mu in 0..dim {
                            for nu in 0..dim {
                                out[mu * dim + nu] += weight.re * a[mu] * a[nu];
                            }
                        }
                    } else {
                        // T + T† with T = c |α⟩⟨α'|
                        let b = snap.frame.vectors.column(alpha_prime);
                        let c = weight * C64::from_polar(1.0, -snap.phase);
                        for mu in 0..dim {
                            for nu in 0..dim {
                                let ab = a[mu] * b[nu];
                                let ba = b[mu] * a[nu];
                                out[mu * dim + nu] += c.re * (ab + ba);
                                out[d2 + mu * dim + nu] += c.im * (ab - ba);
                            }
                        }
                    }
                },
            )?;
        }
    }

    for out in work.values.chunks_exact_mut(slot) {
        let trace: f64 = (0..dim).map(|i| out[i * dim + i]).sum();
        let trace_im: f64 = (0..dim).map(|i| out[d2 + i * dim + i]).sum();
        out[2 * d2] = trace;
        work.trace_deviation = work
            .trace_deviation
            .max((trace - 1.0).abs().max(trace_im.abs()));
        for mu in 0..dim {
            for nu in mu..dim {
                let re = (out[mu * dim + nu] - out[nu * dim + mu]).abs();
                let im = (out[d2 + mu * dim + nu] + out[d2 + nu * dim + mu]).abs();
                work.hermiticity_deviation = work.hermiticity_deviation.max(re.max(im));
            }
        }
    }
    Ok(())
}

struct Block {
    moments: RunningMoments,
    excluded: usize,
    trace_deviation: f64,
    hermiticity_deviation: f64,
}

impl Block {
    fn merge(&mut self, other: &Block) {
        self.moments.merge(&other.moments);
        self.excluded += other.excluded;
        self.trace_deviation = self.trace_deviation.max(other.trace_deviation);
        self.hermiticity_deviation = self.hermiticity_deviation.max(other.hermiticity_deviation);
    }
}

fn is_trajectory_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::NonFiniteTrajectory { .. } | Error::Eigensolver { .. }
    )
}

/// Averages ρ(t) = Σ_{αα'} U_t[:,α] w_{αα'} e^{−iφ_{αα'}(t)} U_t[:,α']ᵀ over
/// `config.n_samples` thermal initial conditions.
///
/// Sample `i` draws its bath from ChaCha8 seeded with `config.seed` on
/// stream `i`, so any sample can be reproduced on its own. Samples whose
/// trajectory turns non-finite are dropped and counted.
pub fn estimate_reduced_density(
    system: &OpenChain,
    baths: &ThermalBaths,
    rho0: &DMatrix<C64>,
    config: &EstimatorConfig,
) -> Result<ReducedDensitySeries> {
    let dim = system.dim();
    validate_density_matrix(rho0, dim)?;
    if config.n_samples == 0 {
        return Err(Error::param("n_samples", "must be at least 1"));
    }
    if config.block_size == 0 {
        return Err(Error::param("block_size", "must be at least 1"));
    }
    if baths.n_baths() != system.n_baths() || baths.modes().len() != system.modes().len() {
        return Err(Error::DimensionMismatch {
            expected: system.n_baths(),
            found: baths.n_baths(),
        });
    }
    let n_out = config.grid.n_outputs();
    let slot = slot_len(dim);
    let n_blocks = config.n_samples.div_ceil(config.block_size);

    let blocks: Vec<Result<Block>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * config.block_size;
            let end = (start + config.block_size).min(config.n_samples);
            let mut block = Block {
                moments: RunningMoments::new(n_out * slot),
                excluded: 0,
                trace_deviation: 0.0,
                hermiticity_deviation: 0.0,
            };
            let mut work = SampleWork {
                values: vec![0.0; n_out * slot],
                trace_deviation: 0.0,
                hermiticity_deviation: 0.0,
            };
            for index in start..end {
                match run_sample(system, baths, rho0, index as u64, config, &mut work) {
                    Ok(()) => block.moments.push(&work.values),
                    Err(e) if is_trajectory_failure(&e) => block.excluded += 1,
                    Err(e) => return Err(e),
                }
            }
            block.trace_deviation = work.trace_deviation;
            block.hermiticity_deviation = work.hermiticity_deviation;
            Ok(block)
        })
        .collect();
    let blocks = blocks.into_iter().collect::<Result<Vec<_>>>()?;
    let total = tree_reduce(blocks, Block::merge).expect("at least one block");

    if total.excluded as f64 > MAX_EXCLUDED_FRACTION * config.n_samples as f64 {
        return Err(Error::TooManyExclusions {
            excluded: total.excluded,
            total: config.n_samples,
        });
    }

    let d2 = dim * dim;
    let m = &total.moments;
    let mean = m.mean();
    let mut rho = Vec::with_capacity(n_out);
    let mut stderr_re = Vec::with_capacity(n_out);
    let mut stderr_im = Vec::with_capacity(n_out);
    let mut trace_mean = Vec::with_capacity(n_out);
    let mut trace_stderr = Vec::with_capacity(n_out);
    for k in 0..n_out {
        let base = k * slot;
        rho.push(DMatrix::from_fn(dim, dim, |mu, nu| {
            C64::new(mean[base + mu * dim + nu], mean[base + d2 + mu * dim + nu])
        }));
        stderr_re.push(DMatrix::from_fn(dim, dim, |mu, nu| {
            m.stderr(base + mu * dim + nu)
        }));
        stderr_im.push(DMatrix::from_fn(dim, dim, |mu, nu| {
            m.stderr(base + d2 + mu * dim + nu)
        }));
        trace_mean.push(mean[base + 2 * d2]);
        trace_stderr.push(m.stderr(base + 2 * d2));
    }
    Ok(ReducedDensitySeries {
        times: config.grid.times(),
        rho,
        stderr_re,
        stderr_im,
        trace_mean,
        trace_stderr,
        n_samples: m.count() as usize,
        n_excluded: total.excluded,
        seed: config.seed,
        max_sample_trace_deviation: total.trace_deviation,
        max_sample_hermiticity_deviation: total.hermiticity_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::BathModes;
    use crate::model::{SpinChain, SpinChainParams};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn basis_state(i: usize) -> DMatrix<C64> {
        let mut rho = DMatrix::zeros(4, 4);
        rho[(i, i)] = C64::new(1.0, 0.0);
        rho
    }

    fn setup(n_modes: usize, xi: f64, beta: f64) -> (OpenChain, ThermalBaths) {
        let chain = SpinChain::new(SpinChainParams::two_spin_xxz(1.0, 0.5).unwrap()).unwrap();
        let modes = BathModes::discretize(n_modes, xi, 3.0).unwrap();
        let baths = ThermalBaths::new(modes.clone(), vec![beta, beta]).unwrap();
        (OpenChain::new(chain, modes), baths)
    }

    #[test]
    fn weights_of_up_up_are_r_independent() {
        let (system, baths) = setup(20, 0.007, 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let frame = system.frame_at_point(&baths.sample(&mut rng)).unwrap();
            let w = initial_adiabatic_weights(&basis_state(0), &frame).unwrap();
            let mut expected = DMatrix::zeros(4, 4);
            expected[(0, 0)] = C64::new(1.0, 0.0);
            assert!((w - expected).iter().all(|z| z.norm() < 1e-14));
        }
    }

    #[test]
    fn weights_at_equal_bias() {
        let (system, _) = setup(20, 0.007, 0.3);
        let frame = system.frame_at(&[0.4, 0.4], None).unwrap();
        let w = initial_adiabatic_weights(&basis_state(1), &frame).unwrap();
        for (a, b) in [(1, 1), (2, 2)] {
            assert!((w[(a, b)].re - 0.5).abs() < 1e-14);
        }
        assert!((w[(1, 2)].norm() - 0.5).abs() < 1e-14);
        assert!((w[(1, 2)] - w[(2, 1)]).norm() < 1e-15);
        assert!((w.trace().re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn weights_reject_bad_trace() {
        let (system, _) = setup(20, 0.007, 0.3);
        let frame = system.frame_at(&[0.0, 0.0], None).unwrap();
        let rho = basis_state(1) * C64::new(1.1, 0.0);
        assert!(matches!(
            initial_adiabatic_weights(&rho, &frame),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn validation_catches_each_defect() {
        assert!(validate_density_matrix(&basis_state(2), 4).is_ok());
        let mut not_herm = basis_state(1);
        not_herm[(0, 1)] = C64::new(0.1, 0.0);
        assert!(validate_density_matrix(&not_herm, 4).is_err());
        let mut negative = DMatrix::zeros(4, 4);
        negative[(0, 0)] = C64::new(1.5, 0.0);
        negative[(1, 1)] = C64::new(-0.5, 0.0);
        assert!(validate_density_matrix(&negative, 4).is_err());
        assert!(validate_density_matrix(&basis_state(1), 2).is_err());
    }

    #[test]
    fn uncoupled_rabi_oscillation() {
        let (system, baths) = setup(20, 0.0, 0.3);
        let grid = TimeGrid::new(0.01, 5.0, 50).unwrap();
        let series = estimate_reduced_density(
            &system,
            &baths,
            &basis_state(1),
            &EstimatorConfig::new(8, 1, grid),
        )
        .unwrap();
        for (t, rho) in series.times.iter().zip(&series.rho) {
            assert!(
                (rho[(1, 1)].re - 0.5 * (1.0 + (4.0 * t).cos())).abs() < 1e-4,
                "t = {t}"
            );
        }
        assert!(series.stderr_re.iter().all(|s| s.max() < 1e-12));
    }

    #[test]
    fn up_up_is_invariant_and_exact_per_sample() {
        let (system, baths) = setup(30, 0.007, 0.3);
        let grid = TimeGrid::new(0.01, 2.0, 20).unwrap();
        let series = estimate_reduced_density(
            &system,
            &baths,
            &basis_state(0),
            &EstimatorConfig::new(40, 9, grid),
        )
        .unwrap();
        for rho in &series.rho {
            assert!((rho - basis_state(0)).iter().all(|z| z.norm() < 1e-12));
        }
        assert!(series.max_sample_trace_deviation < 1e-12);
        assert_eq!(series.max_sample_hermiticity_deviation, 0.0);
    }

    #[test]
    fn trace_and_hermiticity_per_sample() {
        let (system, baths) = setup(30, 0.007, 0.005);
        let s = FRAC_1_SQRT_2;
        let psi = nalgebra::DVector::from_vec(vec![
            C64::new(s, 0.0),
            C64::new(0.0, -s),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        ]);
        let rho0 = &psi * psi.adjoint();
        let grid = TimeGrid::new(0.01, 3.0, 30).unwrap();
        let series =
            estimate_reduced_density(&system, &baths, &rho0, &EstimatorConfig::new(30, 4, grid))
                .unwrap();
        assert!(series.max_sample_trace_deviation < 1e-12);
        assert!(series.max_sample_hermiticity_deviation < 1e-12);
        for (tr, se) in series.trace_mean.iter().zip(&series.trace_stderr) {
            assert!((tr - 1.0).abs() < 1e-12 && *se < 1e-12);
        }
    }

    #[test]
    fn seed_determinism_and_block_independence_of_samples() {
        let (system, baths) = setup(20, 0.007, 0.005);
        let grid = TimeGrid::new(0.02, 2.0, 10).unwrap();
        let mut config = EstimatorConfig::new(20, 77, grid);
        let a = estimate_reduced_density(&system, &baths, &basis_state(1), &config).unwrap();
        let b = estimate_reduced_density(&system, &baths, &basis_state(1), &config).unwrap();
        assert_eq!(a, b);
        config.block_size = 3;
        let c = estimate_reduced_density(&system, &baths, &basis_state(1), &config).unwrap();
        for (x, y) in a.rho.iter().zip(&c.rho) {
            assert!((x - y).iter().all(|z| z.norm() < 1e-13));
        }
        config.seed = 78;
        let d = estimate_reduced_density(&system, &baths, &basis_state(1), &config).unwrap();
        assert_ne!(a.rho, d.rho);
    }

    #[test]
    fn stderr_falls_as_inverse_sqrt_m() {
        let (system, baths) = setup(20, 0.05, 0.005);
        let grid = TimeGrid::new(0.02, 2.0, 4).unwrap();
        let err = |m: usize| {
            let s = estimate_reduced_density(
                &system,
                &baths,
                &basis_state(1),
                &EstimatorConfig::new(m, 5, grid),
            )
            .unwrap();
            s.stderr_re[4][(1, 1)]
        };
        let ratio = err(100) / err(1600);
        assert!((ratio - 4.0).abs() < 0.8, "ratio {ratio}");
    }

    #[test]
    fn rejects_invalid_inputs() {
        let (system, baths) = setup(20, 0.007, 0.3);
        let grid = TimeGrid::new(0.01, 1.0, 10).unwrap();
        let config = EstimatorConfig::new(0, 1, grid);
        assert!(estimate_reduced_density(&system, &baths, &basis_state(1), &config).is_err());
        let config = EstimatorConfig::new(4, 1, grid);
        let bad = basis_state(1) * C64::new(2.0, 0.0);
        assert!(matches!(
            estimate_reduced_density(&system, &baths, &bad, &config),
            Err(Error::InvalidState(_))
        ));
    }
}
