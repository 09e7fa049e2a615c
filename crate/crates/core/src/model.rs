//! Spin-chain subsystem operators.
//!
//! Basis convention: each spin has |1⟩ (up, σz = +1) first and |0⟩ second,
//! so for two spins the natural basis is |1,1⟩, |1,0⟩, |0,1⟩, |0,0⟩. Every
//! operator built here is real symmetric; σy⊗σy is real and is assembled
//! as −(iσy)⊗(iσy).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest chain the dense representation is allowed to build (dimension 64).
pub const MAX_SPINS: usize = 6;

/// Uniform open nearest-neighbour XYZ chain, ħ = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinChainParams {
    pub n_spins: usize,
    pub j_x: f64,
    pub j_y: f64,
    pub j_z: f64,
}

impl SpinChainParams {
    pub fn new(n_spins: usize, j_x: f64, j_y: f64, j_z: f64) -> Result<Self> {
        let params = Self {
            n_spins,
            j_x,
            j_y,
            j_z,
        };
        params.validate()?;
        Ok(params)
    }

    /// The XXZ two-spin chain with j_x = j_y = j.
    pub fn two_spin_xxz(j: f64, j_z: f64) -> Result<Self> {
        Self::new(2, j, j, j_z)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_spins < 2 {
            return Err(Error::param("n_spins", "a chain needs at least two spins"));
        }
        if self.n_spins > MAX_SPINS {
            return Err(Error::TooManySpins {
                n_spins: self.n_spins,
                max: MAX_SPINS,
            });
        }
        for (name, v) in [("j_x", self.j_x), ("j_y", self.j_y), ("j_z", self.j_z)] {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        1 << self.n_spins
    }

    pub fn is_xxz(&self) -> bool {
        self.j_x == self.j_y
    }
}

fn identity(dim: usize) -> DMatrix<f64> {
    DMatrix::identity(dim, dim)
}

fn pauli_x() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

/// iσy, which is real.
fn pauli_iy() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])
}

fn pauli_z() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

/// Embeds `a ⊗ b` acting on sites (site, site + 1) of an `n_spins` chain.
fn embed_bond(a: &DMatrix<f64>, b: &DMatrix<f64>, site: usize, n_spins: usize) -> DMatrix<f64> {
    let left = identity(1 << site);
    let right = identity(1 << (n_spins - site - 2));
    left.kronecker(&a.kronecker(b)).kronecker(&right)
}

/// H_S = −Σ_bonds (j_x σxσx + j_y σyσy + j_z σzσz).
pub fn spin_hamiltonian(params: &SpinChainParams) -> Result<DMatrix<f64>> {
    params.validate()?;
    let n = params.n_spins;
    let dim = params.dim();
    let (sx, sy, sz) = (pauli_x(), pauli_iy(), pauli_z());
    let mut h = DMatrix::zeros(dim, dim);
    for site in 0..n - 1 {
        h -= embed_bond(&sx, &sx, site, n) * params.j_x;
        // σy⊗σy = −(iσy)⊗(iσy)
        h += embed_bond(&sy, &sy, site, n) * params.j_y;
        h -= embed_bond(&sz, &sz, site, n) * params.j_z;
    }
    Ok(h)
}

/// Diagonal of σz acting on spin `spin` (0-based) of an `n_spins` chain.
pub fn spin_z_diagonal(spin: usize, n_spins: usize) -> Result<DVector<f64>> {
    if spin >= n_spins {
        return Err(Error::SpinIndexOutOfRange {
            index: spin,
            n_spins,
        });
    }
    if n_spins > MAX_SPINS {
        return Err(Error::TooManySpins {
            n_spins,
            max: MAX_SPINS,
        });
    }
    let dim = 1usize << n_spins;
    let shift = n_spins - 1 - spin;
    Ok(DVector::from_fn(dim, |mu, _| {
        // bit 0 of the site means |1⟩ (up)
        if (mu >> shift) & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }))
}

/// σz of spin `spin` (0-based) as a full matrix.
pub fn spin_z(spin: usize, n_spins: usize) -> Result<DMatrix<f64>> {
    Ok(DMatrix::from_diagonal(&spin_z_diagonal(spin, n_spins)?))
}

/// H(R) = H_S − Σ_ks b_ks σz^(ks), with b_ks = Σ_I c_I R_{I,ks} supplied by the caller.
pub fn adiabatic_hamiltonian(
    h_s: &DMatrix<f64>,
    sigma_z: &[DVector<f64>],
    coupling_sums: &[f64],
) -> Result<DMatrix<f64>> {
    if coupling_sums.len() != sigma_z.len() {
        return Err(Error::DimensionMismatch {
            expected: sigma_z.len(),
            found: coupling_sums.len(),
        });
    }
    let mut h = h_s.clone();
    for (sz, &b) in sigma_z.iter().zip(coupling_sums) {
        if sz.len() != h.nrows() {
            return Err(Error::DimensionMismatch {
                expected: h.nrows(),
                found: sz.len(),
            });
        }
        if b != 0.0 {
            for mu in 0..h.nrows() {
                h[(mu, mu)] -= b * sz[mu];
            }
        }
    }
    Ok(h)
}

/// A validated chain with its Hamiltonian and σz diagonals precomputed.
#[derive(Debug, Clone)]
pub struct SpinChain {
    params: SpinChainParams,
    h_s: DMatrix<f64>,
    sigma_z: Vec<DVector<f64>>,
}

impl SpinChain {
    pub fn new(params: SpinChainParams) -> Result<Self> {
        let h_s = spin_hamiltonian(&params)?;
        let sigma_z = (0..params.n_spins)
            .map(|k| spin_z_diagonal(k, params.n_spins))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params,
            h_s,
            sigma_z,
        })
    }

    pub fn params(&self) -> &SpinChainParams {
        &self.params
    }

    pub fn n_spins(&self) -> usize {
        self.params.n_spins
    }

    pub fn dim(&self) -> usize {
        self.params.dim()
    }

    pub fn hamiltonian(&self) -> &DMatrix<f64> {
        &self.h_s
    }

    pub fn sigma_z(&self) -> &[DVector<f64>] {
        &self.sigma_z
    }

    pub fn adiabatic_hamiltonian(&self, coupling_sums: &[f64]) -> Result<DMatrix<f64>> {
        adiabatic_hamiltonian(&self.h_s, &self.sigma_z, coupling_sums)
    }
}
