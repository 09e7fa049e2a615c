//! Adiabatic frames: ordered, sign-fixed eigenbases of H(R).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Overlap magnitudes closer than this are treated as ties.
const TIE_TOLERANCE: f64 = 1e-12;

/// Eigenvalues E_α(R) and the rotation U whose column α is u^α.
#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticFrame {
    pub energies: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl AdiabaticFrame {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// ω_{αα'} = E_α − E_α'.
    pub fn gap(&self, alpha: usize, alpha_prime: usize) -> f64 {
        self.energies[alpha] - self.energies[alpha_prime]
    }

    /// ⟨α|D|α⟩ for a diagonal operator D given by its diagonal.
    pub fn diagonal_expectation(&self, alpha: usize, diagonal: &DVector<f64>) -> f64 {
        self.vectors
            .column(alpha)
            .iter()
            .zip(diagonal.iter())
            .map(|(u, d)| u * u * d)
            .sum()
    }

    /// max |(UᵀHU)_{αβ}| over α ≠ β.
    pub fn off_diagonal_residual(&self, h: &DMatrix<f64>) -> f64 {
        let d = self.vectors.transpose() * h * &self.vectors;
        let mut worst = 0.0f64;
        for a in 0..d.nrows() {
            for b in 0..d.ncols() {
                if a != b {
                    worst = worst.max(d[(a, b)].abs());
                }
            }
        }
        worst
    }

    /// max |UᵀU − 1|.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.dim();
        (self.vectors.transpose() * &self.vectors - DMatrix::identity(n, n)).amax()
    }
}

/// Assigns raw eigenvectors to columns by the metric g^{α,j} = |u^α − r^j|².
///
/// `reference` supplies the target columns r^j; `None` means the Cartesian
/// basis e^j. For each raw vector the sign is chosen to minimize g (so
/// u^α · r^j ≥ 0 after ordering). Columns are filled greedily by the globally
/// smallest remaining g, ties going to the lowest (α, j).
pub fn order_eigenvectors(
    raw_vectors: &DMatrix<f64>,
    raw_energies: &DVector<f64>,
    reference: Option<&DMatrix<f64>>,
) -> AdiabaticFrame {
    let n = raw_vectors.ncols();
    // overlap[(α, j)] = u^α · r^j
    let overlap = match reference {
        None => raw_vectors.transpose(),
        Some(r) => raw_vectors.transpose() * r,
    };
    let mut vector_used = vec![false; n];
    let mut column_used = vec![false; n];
    let mut vectors = DMatrix::zeros(raw_vectors.nrows(), n);
    let mut energies = DVector::zeros(n);
    for _ in 0..n {
        let mut best: Option<(usize, usize, f64)> = None;
        for alpha in (0..n).filter(|&a| !vector_used[a]) {
            for j in (0..n).filter(|&j| !column_used[j]) {
                // minimizing g over the sign of u^α is maximizing |u^α · r^j|
                let score = overlap[(alpha, j)].abs();
                if best.is_none_or(|(_, _, s)| score > s + TIE_TOLERANCE) {
                    best = Some((alpha, j, score));
                }
            }
        }
        let (alpha, j, _) = best.expect("an unassigned pair remains");
        vector_used[alpha] = true;
        column_used[j] = true;
        let sign = if overlap[(alpha, j)] < 0.0 { -1.0 } else { 1.0 };
        vectors.set_column(j, &(raw_vectors.column(alpha) * sign));
        energies[j] = raw_energies[alpha];
    }
    AdiabaticFrame { energies, vectors }
}

/// Dense symmetric eigendecomposition with raw output in ascending-eigenvalue order.
pub fn dense_eigensystem(h: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = h.nrows();
    let eig = h
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or(Error::Eigensolver {
            coupling_sums: Vec::new(),
        })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    if energies.iter().any(|e| !e.is_finite()) {
        return Err(Error::Eigensolver {
            coupling_sums: Vec::new(),
        });
    }
    Ok((energies, vectors))
}

/// Diagonalizes a real symmetric H and orders the frame against the Cartesian basis.
pub fn diagonalize_frame(h: &DMatrix<f64>) -> Result<AdiabaticFrame> {
    let (energies, vectors) = dense_eigensystem(h)?;
    Ok(order_eigenvectors(&vectors, &energies, None))
}

/// Closed-form eigensystem of the two-spin H(R).
///
/// For two spins H(R) splits into the {|1,1⟩, |0,0⟩} and {|1,0⟩, |0,1⟩}
/// blocks; each is a 2×2 rotation. Output is in ascending-eigenvalue order,
/// matching [`dense_eigensystem`].
pub fn two_spin_eigensystem(h: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    debug_assert_eq!(h.nrows(), 4);
    let mut pairs: [(f64, [f64; 4]); 4] = [(0.0, [0.0; 4]); 4];
    for (slot, (i, k)) in [(0usize, 3usize), (1, 2)].into_iter().enumerate() {
        let (a, b, d) = (h[(i, i)], h[(i, k)], h[(k, k)]);
        let (lo, hi, (c, s)) = symmetric_2x2(a, b, d);
        let mut upper = [0.0; 4];
        upper[i] = c;
        upper[k] = s;
        let mut lower = [0.0; 4];
        lower[i] = -s;
        lower[k] = c;
        pairs[2 * slot] = (hi, upper);
        pairs[2 * slot + 1] = (lo, lower);
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let energies = DVector::from_iterator(4, pairs.iter().map(|p| p.0));
    let vectors = DMatrix::from_fn(4, 4, |mu, col| pairs[col].1[mu]);
    (energies, vectors)
}

/// Eigenvalues (low, high) of [[a, b], [b, d]] and (cos θ, sin θ), the
/// eigenvector of the high eigenvalue; (−sin θ, cos θ) belongs to the low one.
fn symmetric_2x2(a: f64, b: f64, d: f64) -> (f64, f64, (f64, f64)) {
    let mean = 0.5 * (a + d);
    let half_diff = 0.5 * (a - d);
    let radius = half_diff.hypot(b);
    if b == 0.0 {
        // exact unit vectors, so decoupled blocks stay exactly decoupled
        let high = if a >= d { (1.0, 0.0) } else { (0.0, 1.0) };
        return (mean - radius, mean + radius, high);
    }
    let theta = 0.5 * (2.0 * b).atan2(a - d);
    (mean - radius, mean + radius, (theta.cos(), theta.sin()))
}
