//! Dense complex matrices and Hermitian spectral calculus for small Hilbert spaces.
//!
//! Everything here targets dimensions of a few dozen at most. The eigensolver is
//! nalgebra's Hermitian tridiagonal QR; this module adds the tolerance policy,
//! ascending ordering and the functional calculus on top of it.

use std::ops::{Add, Mul, Sub};

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;

use crate::error::{QngError, Result};

pub use nalgebra::Complex;

/// Double precision complex scalar.
pub type C64 = Complex<f64>;

/// Sweep budget handed to the eigensolver.
const EIG_MAX_ITERS: usize = 10_000;

/// Relative Hermiticity tolerance, anchored to `max(1, ‖M‖_F)`.
pub const HERMITIAN_TOL: f64 = 1e-10;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Builds a matrix from row slices. Panics if the rows are ragged or not square.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "rows must form a square matrix");
        Self(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "rows must form a square matrix");
        Self(DMatrix::from_fn(n, n, |i, j| c64(rows[i][j], 0.0)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                c64(diag[i], 0.0)
            } else {
                C64::default()
            }
        }))
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(n, n, f))
    }

    pub fn from_inner(m: DMatrix<C64>) -> Self {
        assert!(m.is_square());
        Self(m)
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `‖M − M†‖_F`.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.0 - self.0.adjoint())
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= HERMITIAN_TOL * self.frobenius_norm().max(1.0)
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * c64(0.5, 0.0))
    }

    /// `V† M V`: expresses `self` in the basis given by the columns of `v`.
    pub fn conjugate_by(&self, v: &ComplexMatrix) -> Self {
        Self(v.0.adjoint() * &self.0 * &v.0)
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(QngError::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(())
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        vec![c64(0.0, 0.0), c64(0.0, -1.0)],
        vec![c64(0.0, 1.0), c64(0.0, 0.0)],
    ])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]])
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Eigenvectors are the columns of a unitary. Within a degenerate eigenspace the
/// basis is arbitrary.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// `V† A V`.
    pub fn to_eigenbasis(&self, a: &ComplexMatrix) -> ComplexMatrix {
        a.conjugate_by(&self.eigenvectors)
    }

    /// `V B V†`.
    pub fn from_eigenbasis(&self, b: &ComplexMatrix) -> ComplexMatrix {
        b.conjugate_by(&self.eigenvectors.adjoint())
    }

    /// `Σ_i φ(p_i) |ψ_i⟩⟨ψ_i|`. Fails with `DomainError` when φ is not finite at
    /// some eigenvalue.
    pub fn apply(&self, phi: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
        let mut mapped = Vec::with_capacity(self.dim());
        for &p in &self.eigenvalues {
            let v = phi(p);
            if !v.is_finite() {
                return Err(QngError::DomainError(p));
            }
            mapped.push(v);
        }
        Ok(self.from_eigenbasis(&ComplexMatrix::from_real_diagonal(&mapped)))
    }

    /// `Σ_i p_i |ψ_i⟩⟨ψ_i|`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.from_eigenbasis(&ComplexMatrix::from_real_diagonal(&self.eigenvalues))
    }
}

/// Hermitian eigen-decomposition with eigenvalues sorted ascending.
///
/// The input is symmetrized as `(M + M†)/2` before decomposition; inputs whose
/// anti-Hermitian part exceeds `1e-10 · max(1, ‖M‖_F)` are rejected.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<SpectralDecomposition> {
    let defect = m.hermiticity_defect();
    if !(defect <= HERMITIAN_TOL * m.frobenius_norm().max(1.0)) {
        return Err(QngError::NotHermitian(defect));
    }
    let h = m.hermitian_part();
    let eig = SymmetricEigen::try_new(h.0, f64::EPSILON, EIG_MAX_ITERS)
        .ok_or(QngError::ConvergenceFailure)?;

    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    if eigenvalues.iter().any(|p| !p.is_finite()) {
        return Err(QngError::ConvergenceFailure);
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors: ComplexMatrix(eigenvectors),
    })
}

/// `φ(M)` through the spectrum of a Hermitian `M`.
pub fn spectral_apply(m: &ComplexMatrix, phi: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    hermitian_eig(m)?.apply(phi)
}

/// `Tr[A† B]`.
pub fn frobenius_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    a.check_dims(b)?;
    Ok(a.0.iter().zip(b.0.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// `Tr[A B]` without forming the product.
pub fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let n = a.dim();
    let mut acc = C64::default();
    for i in 0..n {
        for k in 0..n {
            acc += a.get(i, k) * b.get(k, i);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = crate::rng::Sampler::new(seed);
        let a = ComplexMatrix::from_fn(n, |_, _| c64(rng.symmetric(), rng.symmetric()));
        a.hermitian_part()
    }

    #[test]
    fn pauli_x_spectrum() {
        let d = hermitian_eig(&pauli_x()).unwrap();
        assert!(close(d.eigenvalues()[0], -1.0, 1e-14));
        assert!(close(d.eigenvalues()[1], 1.0, 1e-14));
    }

    #[test]
    fn identity_spectrum() {
        let d = hermitian_eig(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(d.eigenvalues().len(), 2);
        assert!(d.eigenvalues().iter().all(|&p| close(p, 1.0, 1e-15)));
        let v = d.eigenvectors();
        let gram = &v.adjoint() * v;
        assert!((&gram - &ComplexMatrix::identity(2)).frobenius_norm() < 1e-12);
    }

    #[test]
    fn diagonal_spectrum_keeps_standard_basis() {
        let d = hermitian_eig(&ComplexMatrix::from_real_diagonal(&[0.25, 0.75])).unwrap();
        assert!(close(d.eigenvalues()[0], 0.25, 1e-15));
        assert!(close(d.eigenvalues()[1], 0.75, 1e-15));
        let v = d.eigenvectors();
        assert!(close(v.get(0, 0).norm(), 1.0, 1e-14));
        assert!(close(v.get(1, 1).norm(), 1.0, 1e-14));
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert!(matches!(hermitian_eig(&m), Err(QngError::NotHermitian(_))));
    }

    #[test]
    fn spectral_apply_examples() {
        let r = spectral_apply(&ComplexMatrix::from_real_diagonal(&[4.0, 9.0]), f64::sqrt).unwrap();
        assert!((&r - &ComplexMatrix::from_real_diagonal(&[2.0, 3.0])).frobenius_norm() < 1e-14);

        let half = ComplexMatrix::identity(2).scale(0.5);
        for s in [-2.5, -1.0, 0.3, 1.0, 4.5] {
            let r = spectral_apply(&half, |t| t.powf(s)).unwrap();
            let expect = ComplexMatrix::identity(2).scale(2f64.powf(-s));
            assert!((&r - &expect).frobenius_norm() < 1e-13);
        }

        let r = spectral_apply(&half, f64::ln).unwrap();
        let expect = ComplexMatrix::identity(2).scale(0.5f64.ln());
        assert!((&r - &expect).frobenius_norm() < 1e-14);
    }

    #[test]
    fn spectral_apply_domain_error() {
        let m = ComplexMatrix::from_real_diagonal(&[-0.5, 1.0]);
        assert!(matches!(
            spectral_apply(&m, |t| t.powf(0.5)),
            Err(QngError::DomainError(_))
        ));
    }

    #[test]
    fn frobenius_inner_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert!(close(frobenius_inner(&i2, &i2).unwrap().re, 2.0, 1e-15));
        assert!(frobenius_inner(&pauli_x(), &pauli_z()).unwrap().norm() < 1e-15);
        assert!(close(frobenius_inner(&pauli_x(), &pauli_x()).unwrap().re, 2.0, 1e-15));
        assert!(matches!(
            frobenius_inner(&i2, &ComplexMatrix::identity(3)),
            Err(QngError::DimensionMismatch(2, 3))
        ));
    }

    #[test]
    fn decomposition_invariants_on_random_hermitian() {
        for (n, seed) in [(2, 1), (3, 2), (5, 3), (8, 4), (16, 5)] {
            let m = random_hermitian(n, seed);
            let d = hermitian_eig(&m).unwrap();
            let norm = m.frobenius_norm();
            assert!((&d.reconstruct() - &m).frobenius_norm() <= 1e-10 * norm);
            let v = d.eigenvectors();
            assert!((&(&v.adjoint() * v) - &ComplexMatrix::identity(n)).frobenius_norm() <= 1e-10);
            assert!(d.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
            let sum: f64 = d.eigenvalues().iter().sum();
            assert!(close(sum, m.trace().re, 1e-10 * norm.max(1.0)));
            let id = spectral_apply(&m, |t| t).unwrap();
            assert!((&id - &m).frobenius_norm() <= 1e-10 * norm.max(1.0));
        }
    }

    #[test]
    fn power_composition_on_psd() {
        for (n, seed) in [(2, 11), (3, 12), (4, 13)] {
            let a = random_hermitian(n, seed);
            let psd = &(&a * &a) + &ComplexMatrix::identity(n).scale(0.1);
            let (pa, pb) = (0.37, -1.2);
            let left = spectral_apply(&psd, |t| t.powf(pa)).unwrap();
            let composed = &left * &spectral_apply(&psd, |t| t.powf(pb)).unwrap();
            let direct = spectral_apply(&psd, |t| t.powf(pa + pb)).unwrap();
            assert!((&composed - &direct).frobenius_norm() <= 1e-9);
        }
    }
}
