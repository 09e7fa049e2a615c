use nalgebra::{Complex, DMatrix};
use std::f64::consts::FRAC_1_SQRT_2;

use super::RateSet;
use crate::error::{Error, Result};

type C64 = Complex<f64>;

/// Eigenpairs of H_S for j_x = j_y = j, in the natural basis.
#[derive(Debug, Clone, PartialEq)]
pub struct XxzEigensystem {
    pub lambda: [f64; 4],
    /// Column i is |λ_{i+1}⟩.
    pub vectors: DMatrix<f64>,
    /// λ₄ − λ₃
    pub omega: f64,
}

impl XxzEigensystem {
    pub fn new(j: f64, j_z: f64) -> Result<Self> {
        if !(j >= 0.0 && j.is_finite()) || !j_z.is_finite() {
            return Err(Error::param("j", "need finite j ≥ 0 and finite j_z"));
        }
        let lambda = [-j_z, -j_z, -2.0 * j + j_z, 2.0 * j + j_z];
        let s = FRAC_1_SQRT_2;
        #[rustfmt::skip]
        let vectors = DMatrix::from_row_slice(4, 4, &[
            1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, s,   -s,
            0.0, 0.0, s,   s,
            0.0, 1.0, 0.0, 0.0,
        ]);
        Ok(Self {
            lambda,
            vectors,
            omega: lambda[3] - lambda[2],
        })
    }

    /// f = Vᵀ ρ V
    pub fn to_eigenbasis(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let v = self.vectors.map(|x| C64::new(x, 0.0));
        v.transpose() * rho * v
    }

    /// ρ = V f Vᵀ
    pub fn to_natural(&self, f: &DMatrix<C64>) -> DMatrix<C64> {
        let v = self.vectors.map(|x| C64::new(x, 0.0));
        &v * f * v.transpose()
    }
}

/// Closed-form f_ij(t) given f_ij(0), both in the |λ_i⟩ basis.
pub fn evolve_eigenbasis(
    f0: &DMatrix<C64>,
    t: f64,
    eig: &XxzEigensystem,
    rates: &RateSet,
) -> Result<DMatrix<C64>> {
    if f0.nrows() != 4 || f0.ncols() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: f0.nrows(),
        });
    }
    let RateSet {
        omega_plus: down,
        omega_minus: up,
        omega,
        g_c,
        ..
    } = *rates;
    let mut f = f0.clone();

    // populations of the λ₃/λ₄ pair relax at 2Ω towards Ω₊ : Ω₋
    if omega > 0.0 {
        let e = (-2.0 * omega * t).exp();
        let (f33, f44) = (f0[(2, 2)], f0[(3, 3)]);
        f[(2, 2)] = (f33 * (down + up * e) + f44 * (down * (1.0 - e))) / omega;
        f[(3, 3)] = (f33 * (up * (1.0 - e)) + f44 * (up + down * e)) / omega;
    }

    // decay rate of each coherence f_ij, i < j (0-based)
    let coherence_rates = [
        ((0, 1), 4.0 * g_c),
        ((0, 2), g_c + up),
        ((0, 3), g_c + down),
        ((1, 2), g_c + up),
        ((1, 3), g_c + down),
        ((2, 3), omega),
    ];
    for ((i, k), rate) in coherence_rates {
        let phase = t * (eig.lambda[k] - eig.lambda[i]);
        let factor = C64::from_polar((-rate * t).exp(), phase);
        f[(i, k)] = f0[(i, k)] * factor;
        f[(k, i)] = f0[(k, i)] * factor.conj();
    }
    Ok(f)
}

/// ρ(t) in the natural basis from ρ(0) in the natural basis.
pub fn evolve_closed_form(
    rho0: &DMatrix<C64>,
    t: f64,
    eig: &XxzEigensystem,
    rates: &RateSet,
) -> Result<DMatrix<C64>> {
    let f0 = eig.to_eigenbasis(rho0);
    Ok(eig.to_natural(&evolve_eigenbasis(&f0, t, eig, rates)?))
}
