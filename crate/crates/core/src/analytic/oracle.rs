//! Brute-force route: the 16×16 Liouvillian and its matrix exponential.

use nalgebra::{Complex, DMatrix, DVector};

use super::{RateSet, XxzEigensystem};
use crate::error::{Error, Result};

type C64 = Complex<f64>;

fn dissipator(l: &DMatrix<C64>, rho: &DMatrix<C64>) -> DMatrix<C64> {
    let l_dag = l.adjoint();
    let l_dag_l = &l_dag * l;
    l * rho * &l_dag - (&l_dag_l * rho + rho * &l_dag_l) * C64::new(0.5, 0.0)
}

fn outer(a: &DVector<f64>, b: &DVector<f64>) -> DMatrix<C64> {
    (a * b.transpose()).map(|x| C64::new(x, 0.0))
}

/// Column-stacked superoperator of
/// dρ/dt = −i[H_S, ρ] + Σ_i (γ^(i)(+ω) D[V_(i)] + γ^(i)(−ω) D[V_(i)†] + κ_i D[V₀]),
/// with V_(1) = −|λ₃⟩⟨λ₄|, V_(2) = |λ₃⟩⟨λ₄| and κ_i = γ^(i)(0₊) + γ^(i)(0₋).
pub fn liouvillian(
    h_s: &DMatrix<f64>,
    eig: &XxzEigensystem,
    rates: &RateSet,
) -> Result<DMatrix<C64>> {
    if h_s.nrows() != 4 || h_s.ncols() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: h_s.nrows(),
        });
    }
    let ket = |i: usize| eig.vectors.column(i).into_owned();
    let h = h_s.map(|x| C64::new(x, 0.0));
    let lowering = outer(&ket(2), &ket(3));
    let v0 = outer(&ket(0), &ket(0)) - outer(&ket(1), &ket(1));
    let jumps: Vec<DMatrix<C64>> = [-1.0, 1.0]
        .iter()
        .map(|&s| &lowering * C64::new(s, 0.0))
        .collect();

    let generator = |rho: &DMatrix<C64>| -> DMatrix<C64> {
        let mut out = (&h * rho - rho * &h) * C64::new(0.0, -1.0);
        for (i, v) in jumps.iter().enumerate() {
            out += dissipator(v, rho) * C64::new(rates.gamma_plus[i], 0.0);
            out += dissipator(&v.adjoint(), rho) * C64::new(rates.gamma_minus[i], 0.0);
            out += dissipator(&v0, rho) * C64::new(rates.gamma0[i], 0.0);
        }
        out
    };

    let mut super_op = DMatrix::zeros(16, 16);
    for col in 0..4 {
        for row in 0..4 {
            let mut basis = DMatrix::zeros(4, 4);
            basis[(row, col)] = C64::new(1.0, 0.0);
            let image = generator(&basis);
            super_op.set_column(row + 4 * col, &DVector::from_column_slice(image.as_slice()));
        }
    }
    Ok(super_op)
}

/// ρ(t) = unvec(exp(𝓛 t) vec ρ₀).
pub fn liouvillian_oracle(
    rho0: &DMatrix<C64>,
    t: f64,
    h_s: &DMatrix<f64>,
    eig: &XxzEigensystem,
    rates: &RateSet,
) -> Result<DMatrix<C64>> {
    let l = liouvillian(h_s, eig, rates)?;
    let propagator = (l * C64::new(t, 0.0)).exp();
    let evolved = propagator * DVector::from_column_slice(rho0.as_slice());
    Ok(DMatrix::from_column_slice(4, 4, evolved.as_slice()))
}
