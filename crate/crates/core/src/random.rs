//! Seeded random matrices for property sweeps.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::herm::{CMatrix, HermitianOperator};

fn ginibre<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianOperator {
    HermitianOperator::symmetrized(ginibre(d, rng))
}

/// `W W†` for a Ginibre matrix `W`.
pub fn random_psd<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianOperator {
    let w = ginibre(d, rng);
    HermitianOperator::symmetrized(&w * w.adjoint())
}

/// A full-rank density matrix `W W† / Tr{W W†}`.
pub fn random_density_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianOperator {
    let p = random_psd(d, rng);
    let t = p.trace();
    p.scale(1.0 / t)
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(d, rng).qr();
    let (mut q, r) = qr.unpack();
    for c in 0..d {
        let diag = r[(c, c)];
        let phase = if diag.norm() > 0.0 {
            diag / diag.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for row in 0..d {
            q[(row, c)] *= phase;
        }
    }
    q
}

/// Haar-random real orthogonal `n × n` matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let a = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let (mut q, r) = a.qr().unpack();
    for c in 0..n {
        if r[(c, c)] < 0.0 {
            q.column_mut(c).neg_mut();
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn orthogonal_and_unitary_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let o = random_orthogonal(9, &mut rng);
        assert!((o.transpose() * &o - DMatrix::<f64>::identity(9, 9)).norm() < 1e-12);
        let u = random_unitary(5, &mut rng);
        assert!((u.adjoint() * &u - CMatrix::identity(5, 5)).norm() < 1e-12);
    }

    #[test]
    fn density_matrix_has_unit_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_density_matrix(4, &mut rng);
        assert!((rho.trace() - 1.0).abs() < 1e-14);
        assert!(crate::herm::is_psd(&rho, 1e-12).psd);
    }
}
