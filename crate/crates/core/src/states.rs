//! Parameterized density operators, identity mixing and the Frobenius cost.

use crate::error::{QngError, Result};
use crate::linalg::{c64, hermitian_eig, pauli_x, pauli_y, pauli_z, trace_of_product, ComplexMatrix, SpectralDecomposition};
use crate::metrics::TangentMRep;

const STATE_TOL: f64 = 1e-10;

/// Hermitian, positive semidefinite, unit-trace matrix with its spectrum cached.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    spectral: SpectralDecomposition,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let spectral = hermitian_eig(&matrix)?;
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(QngError::InvalidParameter(format!(
                "density operator must have unit trace, got {tr}"
            )));
        }
        if spectral.min_eigenvalue() < -STATE_TOL {
            return Err(QngError::InvalidParameter(format!(
                "density operator has negative eigenvalue {:e}",
                spectral.min_eigenvalue()
            )));
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
            spectral,
        })
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self::new(ComplexMatrix::identity(n).scale(1.0 / n as f64)).expect("I/N is a state")
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        &self.spectral
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.spectral.eigenvalues()
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// `(1 − δ) ρ + δ I/N`.
pub fn mix_with_identity(rho: &DensityOperator, delta: f64) -> Result<DensityOperator> {
    check_delta(delta)?;
    if delta == 0.0 {
        return Ok(rho.clone());
    }
    DensityOperator::new(mix_matrix(rho.matrix(), delta))
}

fn mix_matrix(m: &ComplexMatrix, delta: f64) -> ComplexMatrix {
    let n = m.dim();
    &m.scale(1.0 - delta) + &ComplexMatrix::identity(n).scale(delta / n as f64)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(0.0..1.0).contains(&delta) {
        return Err(QngError::InvalidParameter(format!(
            "delta must lie in [0, 1), got {delta}"
        )));
    }
    Ok(())
}

/// A smooth map `θ ↦ ρ_θ` with analytic partial derivatives.
pub trait StateFamily: Send + Sync {
    fn n_params(&self) -> usize;

    /// Hilbert-space dimension.
    fn dim(&self) -> usize;

    fn value(&self, theta: &[f64]) -> Result<DensityOperator>;

    /// `[∂_1 ρ_θ, …, ∂_n ρ_θ]`.
    fn partials(&self, theta: &[f64]) -> Result<TangentMRep>;

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params() {
            return Err(QngError::DimensionMismatch(self.n_params(), theta.len()));
        }
        if theta.iter().any(|x| !x.is_finite()) {
            return Err(QngError::InvalidParameter("non-finite parameter".into()));
        }
        Ok(())
    }
}

/// The single-qubit family `U(θ) ρ_ini U(θ)†` with `U = R_z(θ₃) R_y(θ₂) R_z(θ₁)` and
/// `ρ_ini = (I + x σ_x + y σ_y + z σ_z)/2`.
#[derive(Clone, Debug)]
pub struct RotationFamily {
    bloch: [f64; 3],
    rho_ini: ComplexMatrix,
}

impl RotationFamily {
    pub fn new(bloch: [f64; 3]) -> Result<Self> {
        let [x, y, z] = bloch;
        let r2 = x * x + y * y + z * z;
        if !(r2 < 1.0) || bloch.iter().any(|c| !c.is_finite()) {
            return Err(QngError::InvalidBlochVector(x, y, z));
        }
        let rho_ini = &(&(&ComplexMatrix::identity(2) + &pauli_x().scale(x)) + &pauli_y().scale(y))
            + &pauli_z().scale(z);
        Ok(Self {
            bloch,
            rho_ini: rho_ini.scale(0.5),
        })
    }

    pub fn bloch(&self) -> [f64; 3] {
        self.bloch
    }

    pub fn unitary(theta: &[f64]) -> ComplexMatrix {
        &(&rz(theta[2]) * &ry(theta[1])) * &rz(theta[0])
    }

    fn value_matrix(&self, theta: &[f64]) -> ComplexMatrix {
        let u = Self::unitary(theta);
        &(&u * &self.rho_ini) * &u.adjoint()
    }
}

fn rz(phi: f64) -> ComplexMatrix {
    let (s, c) = (0.5 * phi).sin_cos();
    ComplexMatrix::from_rows(&[vec![c64(c, -s), c64(0.0, 0.0)], vec![c64(0.0, 0.0), c64(c, s)]])
}

fn ry(phi: f64) -> ComplexMatrix {
    let (s, c) = (0.5 * phi).sin_cos();
    ComplexMatrix::from_real_rows(&[vec![c, -s], vec![s, c]])
}

/// `−(i/2) σ`.
fn generator(sigma: &ComplexMatrix) -> ComplexMatrix {
    sigma.scale_complex(c64(0.0, -0.5))
}

impl StateFamily for RotationFamily {
    fn n_params(&self) -> usize {
        3
    }

    fn dim(&self) -> usize {
        2
    }

    fn value(&self, theta: &[f64]) -> Result<DensityOperator> {
        self.check_theta(theta)?;
        DensityOperator::new(self.value_matrix(theta))
    }

    fn partials(&self, theta: &[f64]) -> Result<TangentMRep> {
        self.check_theta(theta)?;
        let (r1, r2, r3) = (rz(theta[0]), ry(theta[1]), rz(theta[2]));
        let gz = generator(&pauli_z());
        let gy = generator(&pauli_y());
        let u = &(&r3 * &r2) * &r1;
        let du = [
            &(&(&r3 * &r2) * &gz) * &r1,
            &(&(&r3 * &gy) * &r2) * &r1,
            &(&gz * &r3) * &(&r2 * &r1),
        ];
        let u_dag = u.adjoint();
        let partials = du
            .iter()
            .map(|d| {
                let half = &(d * &self.rho_ini) * &u_dag;
                &half + &half.adjoint()
            })
            .collect();
        TangentMRep::new(partials)
    }
}

/// `U(θ) ρ_ini U(θ)†` for the rotation family.
pub fn rotation_family_value(bloch: [f64; 3], theta: &[f64]) -> Result<DensityOperator> {
    RotationFamily::new(bloch)?.value(theta)
}

/// Analytic `∂_k ρ_θ` for the rotation family.
pub fn rotation_family_partials(bloch: [f64; 3], theta: &[f64]) -> Result<TangentMRep> {
    RotationFamily::new(bloch)?.partials(theta)
}

/// Applies identity mixing with weight `δ` to every state of the wrapped family;
/// partial derivatives scale by `1 − δ`.
#[derive(Clone, Debug)]
pub struct Mixed<F> {
    inner: F,
    delta: f64,
}

impl<F: StateFamily> Mixed<F> {
    pub fn new(inner: F, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        Ok(Self { inner, delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn inner(&self) -> &F {
        &self.inner
    }
}

impl<F: StateFamily> StateFamily for Mixed<F> {
    fn n_params(&self) -> usize {
        self.inner.n_params()
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, theta: &[f64]) -> Result<DensityOperator> {
        mix_with_identity(&self.inner.value(theta)?, self.delta)
    }

    fn partials(&self, theta: &[f64]) -> Result<TangentMRep> {
        Ok(self.inner.partials(theta)?.scale(1.0 - self.delta))
    }
}

impl<F: StateFamily + ?Sized> StateFamily for &F {
    fn n_params(&self) -> usize {
        (**self).n_params()
    }

    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn value(&self, theta: &[f64]) -> Result<DensityOperator> {
        (**self).value(theta)
    }

    fn partials(&self, theta: &[f64]) -> Result<TangentMRep> {
        (**self).partials(theta)
    }
}

impl<F: StateFamily + ?Sized> StateFamily for Box<F> {
    fn n_params(&self) -> usize {
        (**self).n_params()
    }

    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn value(&self, theta: &[f64]) -> Result<DensityOperator> {
        (**self).value(theta)
    }

    fn partials(&self, theta: &[f64]) -> Result<TangentMRep> {
        (**self).partials(theta)
    }
}

/// `L(θ) = Tr[(ρ_θ − ρ_*)†(ρ_θ − ρ_*)]`.
#[derive(Clone, Debug)]
pub struct FrobeniusCost {
    target: DensityOperator,
}

impl FrobeniusCost {
    pub fn new(target: DensityOperator) -> Self {
        Self { target }
    }

    pub fn target(&self) -> &DensityOperator {
        &self.target
    }

    pub fn value_at(&self, rho: &DensityOperator) -> Result<f64> {
        if rho.dim() != self.target.dim() {
            return Err(QngError::DimensionMismatch(self.target.dim(), rho.dim()));
        }
        let d = rho.matrix() - self.target.matrix();
        Ok(d.frobenius_norm().powi(2))
    }

    /// `∇_k L = 2 Re Tr[∂_k ρ (ρ − ρ_*)]`.
    pub fn gradient_at(&self, rho: &DensityOperator, partials: &TangentMRep) -> Result<Vec<f64>> {
        if rho.dim() != self.target.dim() {
            return Err(QngError::DimensionMismatch(self.target.dim(), rho.dim()));
        }
        let d = rho.matrix() - self.target.matrix();
        Ok(partials
            .as_slice()
            .iter()
            .map(|p| 2.0 * trace_of_product(p, &d).re)
            .collect())
    }

    pub fn value<F: StateFamily + ?Sized>(&self, family: &F, theta: &[f64]) -> Result<f64> {
        self.value_at(&family.value(theta)?)
    }

    pub fn gradient<F: StateFamily + ?Sized>(&self, family: &F, theta: &[f64]) -> Result<Vec<f64>> {
        self.gradient_at(&family.value(theta)?, &family.partials(theta)?)
    }
}

/// Cost of `family` at `θ` against `target`.
pub fn cost_value<F: StateFamily + ?Sized>(family: &F, target: &DensityOperator, theta: &[f64]) -> Result<f64> {
    FrobeniusCost::new(target.clone()).value(family, theta)
}

/// Gradient of [`cost_value`] in `θ`.
pub fn cost_gradient<F: StateFamily + ?Sized>(
    family: &F,
    target: &DensityOperator,
    theta: &[f64],
) -> Result<Vec<f64>> {
    FrobeniusCost::new(target.clone()).gradient(family, theta)
}
