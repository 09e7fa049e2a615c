//! Adiabatic frames, Hellmann-Feynman forces and pair trajectories.

mod frame;
mod propagate;

pub use frame::{
    dense_eigensystem, diagonalize_frame, order_eigenvectors, two_spin_eigensystem, AdiabaticFrame,
};
pub use propagate::{propagate_pair, trace_pair, PairSnapshot, PairTrajectory, TimeGrid};

use nalgebra::DMatrix;

use crate::bath::{BathModes, PhasePoint};
use crate::error::{Error, Result};
use crate::model::SpinChain;

/// Which reference the eigenvector-ordering metric compares against after t = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrameTracking {
    /// Every frame is ordered against the Cartesian basis.
    Cartesian,
    /// The initial frame is ordered against the Cartesian basis, every later
    /// frame against the frame of the previous step.
    #[default]
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Solver {
    TwoSpinBlocks,
    Dense,
}

/// A spin chain with one bath of shared modes per spin.
#[derive(Debug, Clone)]
pub struct OpenChain {
    chain: SpinChain,
    modes: BathModes,
    solver: Solver,
}

impl OpenChain {
    pub fn new(chain: SpinChain, modes: BathModes) -> Self {
        let solver = if chain.n_spins() == 2 {
            Solver::TwoSpinBlocks
        } else {
            Solver::Dense
        };
        Self {
            chain,
            modes,
            solver,
        }
    }

    /// Forces the dense eigensolver even where the closed form applies.
    pub fn with_dense_solver(mut self) -> Self {
        self.solver = Solver::Dense;
        self
    }

    pub fn chain(&self) -> &SpinChain {
        &self.chain
    }

    pub fn modes(&self) -> &BathModes {
        &self.modes
    }

    pub fn n_baths(&self) -> usize {
        self.chain.n_spins()
    }

    pub fn dim(&self) -> usize {
        self.chain.dim()
    }

    pub fn coupling_sums(&self, x: &PhasePoint) -> Result<Vec<f64>> {
        self.check_point(x)?;
        Ok(x.coupling_sums(self.modes.coupling()))
    }

    fn check_point(&self, x: &PhasePoint) -> Result<()> {
        if x.n_modes() != self.modes.len() || x.n_baths() != self.n_baths() {
            return Err(Error::DimensionMismatch {
                expected: self.modes.len() * self.n_baths(),
                found: x.r.len(),
            });
        }
        Ok(())
    }

    /// The ordered frame of H(R) at coupling sums `b`.
    pub fn frame_at(
        &self,
        coupling_sums: &[f64],
        reference: Option<&DMatrix<f64>>,
    ) -> Result<AdiabaticFrame> {
        let h = self.chain.adiabatic_hamiltonian(coupling_sums)?;
        let (energies, vectors) = match self.solver {
            Solver::TwoSpinBlocks => two_spin_eigensystem(&h),
            Solver::Dense => dense_eigensystem(&h).map_err(|_| Error::Eigensolver {
                coupling_sums: coupling_sums.to_vec(),
            })?,
        };
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::Eigensolver {
                coupling_sums: coupling_sums.to_vec(),
            });
        }
        Ok(order_eigenvectors(&vectors, &energies, reference))
    }

    /// Frame at a phase point, ordered against the Cartesian basis.
    pub fn frame_at_point(&self, x: &PhasePoint) -> Result<AdiabaticFrame> {
        self.frame_at(&self.coupling_sums(x)?, None)
    }

    /// ⟨α|σz^(ks)|α⟩ for every bath.
    pub fn spin_z_expectations(&self, frame: &AdiabaticFrame, alpha: usize) -> Vec<f64> {
        self.chain
            .sigma_z()
            .iter()
            .map(|sz| frame.diagonal_expectation(alpha, sz))
            .collect()
    }

    /// F_{I,ks} = −ω_I² R_{I,ks} + c_I ⟨α|σz^(ks)|α⟩, laid out like the phase point.
    pub fn hellmann_feynman_force(
        &self,
        frame: &AdiabaticFrame,
        alpha: usize,
        x: &PhasePoint,
    ) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let s = self.spin_z_expectations(frame, alpha);
        Ok(self.force_with(&s, x))
    }

    pub(crate) fn force_with(&self, spin_z: &[f64], x: &PhasePoint) -> Vec<f64> {
        let n = self.modes.len();
        let mut force = Vec::with_capacity(x.r.len());
        for (ks, &s) in spin_z.iter().enumerate() {
            force.extend(
                x.r[ks * n..(ks + 1) * n]
                    .iter()
                    .zip(self.modes.omega_sq())
                    .zip(self.modes.coupling())
                    .map(|((r, w2), c)| -w2 * r + c * s),
            );
        }
        force
    }

    /// H_B(X) + (E_α + E_α')/2, conserved by the mean-force dynamics.
    pub fn pair_energy(
        &self,
        x: &PhasePoint,
        frame: &AdiabaticFrame,
        alpha: usize,
        alpha_prime: usize,
    ) -> f64 {
        x.bath_energy(&self.modes) + 0.5 * (frame.energies[alpha] + frame.energies[alpha_prime])
    }
}
