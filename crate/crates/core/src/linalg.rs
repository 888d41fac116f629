//! Hermitian eigendecomposition helpers and the PSD-cone projection used by
//! the solver.  A real-symmetric fast path is taken when all imaginary parts
//! vanish; the complex path is always available.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::tensor::{C64, CMatrix};

fn is_real(m: &CMatrix) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

fn to_real(m: &CMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re)
}

/// Eigenvalues of a Hermitian matrix, ascending.  The input is symmetrized
/// first so eigensolve noise cannot amplify a sub-tolerance defect.
pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = if is_real(&h) {
        SymmetricEigen::new(to_real(&h)).eigenvalues.iter().copied().collect()
    } else {
        SymmetricEigen::new(h).eigenvalues.iter().copied().collect()
    };
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Projects a Hermitian matrix onto the PSD cone by clipping negative
/// eigenvalues to zero.
pub fn project_psd(m: &CMatrix, force_complex: bool) -> CMatrix {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    if !force_complex && is_real(&h) {
        let eig = SymmetricEigen::new(to_real(&h));
        let n = h.nrows();
        let mut out = DMatrix::<f64>::zeros(n, n);
        for (k, &lam) in eig.eigenvalues.iter().enumerate() {
            if lam > 0.0 {
                let v = eig.eigenvectors.column(k);
                out.ger(lam, &v, &v, 1.0);
            }
        }
        DMatrix::from_fn(n, n, |i, j| C64::new(out[(i, j)], 0.0))
    } else {
        let eig = SymmetricEigen::new(h.clone());
        let n = h.nrows();
        let mut out = CMatrix::zeros(n, n);
        for (k, &lam) in eig.eigenvalues.iter().enumerate() {
            if lam > 0.0 {
                let v = eig.eigenvectors.column(k);
                out += (&v * v.adjoint()) * C64::new(lam, 0.0);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn projection_clips_negative_part() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = C64::new(1.0, 0.0);
        m[(1, 1)] = C64::new(-2.0, 0.0);
        let p = project_psd(&m, false);
        assert_abs_diff_eq!(p[(0, 0)].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p[(1, 1)].re, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn complex_and_real_paths_agree_after_rotation() {
        // conjugate a real diagonal by a complex unitary, project, rotate back
        let phase = C64::new(0.0, 1.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(s, 0.0),
                C64::new(s, 0.0) * phase,
                C64::new(s, 0.0),
                C64::new(-s, 0.0) * phase,
            ],
        );
        let mut d = CMatrix::zeros(2, 2);
        d[(0, 0)] = C64::new(3.0, 0.0);
        d[(1, 1)] = C64::new(-1.0, 0.0);
        let m = &u * &d * u.adjoint();
        let p = project_psd(&m, true);
        let back = u.adjoint() * p * &u;
        assert_abs_diff_eq!(back[(0, 0)].re, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(back[(1, 1)].re, 0.0, epsilon = 1e-12);
        assert!(eigvalsh(&project_psd(&m, true))[0] >= -1e-12);
    }
}
