//! Cyclic Jacobi eigensolver for dense complex Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a[p][q]` with a
//! diagonal unitary and then applies a real Givens rotation, so the update is
//! a single unitary `J` acting on columns/rows `p` and `q`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Off-diagonal Frobenius mass is driven below this fraction of the full
/// Frobenius norm.
pub const JACOBI_TOLERANCE: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order, eigenvectors as the matching columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl HermitianEigen {
    /// Rebuilds `Σ f(λ_i) v_i v_i*`.
    pub fn reconstruct_with(&self, mut f: impl FnMut(f64) -> f64) -> DMatrix<Complex64> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let s = f(lambda);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    /// Sum of `v_i v_i*` over eigenvalues selected by `keep`.
    pub fn projector(&self, mut keep: impl FnMut(f64) -> bool) -> (DMatrix<Complex64>, usize) {
        let n = self.values.len();
        let cols: Vec<usize> = (0..n).filter(|&j| keep(self.values[j])).collect();
        let mut v = DMatrix::<Complex64>::zeros(n, cols.len());
        for (c, &j) in cols.iter().enumerate() {
            v.set_column(c, &self.vectors.column(j));
        }
        (&v * v.adjoint(), cols.len())
    }
}

fn off_diagonal_sq(a: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s
}

/// Diagonalizes a Hermitian matrix. Only the Hermitian part of `input` is
/// used; callers are expected to have validated self-adjointness.
pub fn hermitian_eigen(input: &DMatrix<Complex64>) -> Result<HermitianEigen> {
    let n = input.nrows();
    if input.ncols() != n {
        return Err(Error::Numerical(format!(
            "eigensolver needs a square matrix, got {}x{}",
            n,
            input.ncols()
        )));
    }
    let mut a = (input + input.adjoint()) * Complex64::new(0.5, 0.0);
    let mut v = DMatrix::<Complex64>::identity(n, n);

    let total = a.norm_squared();
    if !total.is_finite() {
        return Err(Error::Numerical("non-finite matrix entries".into()));
    }
    let target = JACOBI_TOLERANCE * JACOBI_TOLERANCE * total;

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_sq(&a);
        if off <= target || total == 0.0 {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::EigenNoConvergence {
                sweeps,
                ratio: (off / total).sqrt(),
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    for (c, &j) in order.iter().enumerate() {
        vectors.set_column(c, &v.column(j));
    }
    Ok(HermitianEigen { values, vectors })
}

fn rotate(a: &mut DMatrix<Complex64>, v: &mut DMatrix<Complex64>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let g = apq.norm();
    if g == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Negligible pivot relative to both diagonals: the rotation would be a no-op.
    if g <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = Complex64::new(0.0, 0.0);
        a[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    let phase = apq / g;
    let theta = (aqq - app) / (2.0 * g);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // J = diag(1, conj(phase)) * [[c, s], [-s, c]]
    let jpp = Complex64::new(c, 0.0);
    let jpq = Complex64::new(s, 0.0);
    let jqp = phase.conj() * (-s);
    let jqq = phase.conj() * c;

    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}
