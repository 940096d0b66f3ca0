//! Fisher metrics in parameter coordinates.
//!
//! The quantum metric induced by a Petz function `f` pairs the m-representation
//! `∂_i ρ` with the e-representation `f⁻¹(Δ_ρ)(∂_j ρ · ρ⁻¹)`. In the eigenbasis of
//! `ρ = Σ p_k |ψ_k⟩⟨ψ_k|` this is the double sum
//!
//! ```text
//! G_ij = Re Σ_{k,l} conj(A_i)_{kl} (A_j)_{kl} / (p_l f(p_k/p_l)),   A = V† ∂ρ V
//! ```
//!
//! Both routes are implemented ([`quantum_fisher_metric`] through the trace form,
//! [`quantum_fisher_metric_eigensum`] through the double sum) so each can check
//! the other.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{QngError, Result};
use crate::linalg::{trace_of_product, ComplexMatrix, SpectralDecomposition, C64};
use crate::optimizer::solve_spd;
use crate::petz::PetzFunction;

/// Smallest eigenvalue a state may have when it enters metric construction.
pub const EIGENVALUE_FLOOR: f64 = 1e-14;

const SYMMETRY_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-9;
const LOEWNER_TOL: f64 = 1e-9;

/// Real symmetric positive semidefinite `n × n` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricMatrix(DMatrix<f64>);

impl MetricMatrix {
    /// Validates symmetry and positive semidefiniteness, then stores `(G + Gᵀ)/2`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(QngError::DimensionMismatch(m.nrows(), m.ncols()));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(QngError::InvalidParameter("metric has non-finite entries".into()));
        }
        let scale = m.amax().max(1.0);
        let asym = (&m - m.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(QngError::InvalidParameter(format!(
                "metric is not symmetric (defect {asym:e})"
            )));
        }
        let g = Self((&m + m.transpose()) * 0.5);
        let min = g.min_eigenvalue();
        if min < -PSD_TOL * g.spectral_norm().max(1.0) {
            return Err(QngError::InvalidParameter(format!(
                "metric is not positive semidefinite (min eigenvalue {min:e})"
            )));
        }
        Ok(g)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(QngError::DimensionMismatch(n, bad.len()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn inner(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.0.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `‖G − Gᵀ‖_max`.
    pub fn asymmetry(&self) -> f64 {
        (&self.0 - self.0.transpose()).amax()
    }

    /// `xᵀ G x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let v = nalgebra::DVector::from_column_slice(x);
        v.dot(&(&self.0 * &v))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let v = nalgebra::DVector::from_column_slice(x);
        (&self.0 * v).iter().copied().collect()
    }

    /// `G⁻¹`, assembled column by column from Cholesky solves.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.dim();
        let mut inv = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let col = solve_spd(self, &e)?;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Self::new((&inv + inv.transpose()) * 0.5)
    }
}

/// Tangent vectors in the m-representation: `[∂_1 ρ, …, ∂_n ρ]`.
#[derive(Clone, Debug)]
pub struct TangentMRep(Vec<ComplexMatrix>);

impl TangentMRep {
    /// Checks that each entry is Hermitian and traceless within `1e-10`.
    pub fn new(partials: Vec<ComplexMatrix>) -> Result<Self> {
        if let Some(first) = partials.first() {
            let n = first.dim();
            for p in &partials {
                if p.dim() != n {
                    return Err(QngError::DimensionMismatch(n, p.dim()));
                }
                let scale = p.frobenius_norm().max(1.0);
                let defect = p.hermiticity_defect();
                if defect > SYMMETRY_TOL * scale {
                    return Err(QngError::NotHermitian(defect));
                }
                let tr = p.trace().norm();
                if tr > SYMMETRY_TOL * scale {
                    return Err(QngError::InvalidParameter(format!(
                        "tangent has nonzero trace {tr:e}"
                    )));
                }
            }
        }
        Ok(Self(partials))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[ComplexMatrix] {
        &self.0
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.iter().map(|m| m.scale(s)).collect())
    }
}

fn check_full_rank(rho: &SpectralDecomposition) -> Result<()> {
    let p = rho.min_eigenvalue();
    if !(p >= EIGENVALUE_FLOOR) {
        return Err(QngError::SingularState(p));
    }
    Ok(())
}

/// `f⁻¹(Δ_ρ)(X^m ρ⁻¹)`: the e-representation of a tangent given in m-representation.
pub fn e_representation(
    rho: &SpectralDecomposition,
    xm: &ComplexMatrix,
    f: &PetzFunction,
) -> Result<ComplexMatrix> {
    check_full_rank(rho)?;
    if xm.dim() != rho.dim() {
        return Err(QngError::DimensionMismatch(rho.dim(), xm.dim()));
    }
    if !xm.is_hermitian() {
        return Err(QngError::NotHermitian(xm.hermiticity_defect()));
    }
    let p = rho.eigenvalues();
    let b = rho.to_eigenbasis(xm);
    let n = p.len();
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            // ⟨ψ_i| X ρ⁻¹ |ψ_j⟩ = B_ij / p_j
            entries.push(b.get(i, j) / p[j] / f.eval(p[i] / p[j])?);
        }
    }
    let e = ComplexMatrix::from_fn(n, |i, j| entries[i * n + j]);
    Ok(rho.from_eigenbasis(&e))
}

/// `G_ij = Re Tr[∂_i ρ · e_representation(∂_j ρ)]`, symmetrized.
pub fn quantum_fisher_metric(
    rho: &SpectralDecomposition,
    partials: &TangentMRep,
    f: &PetzFunction,
) -> Result<MetricMatrix> {
    check_full_rank(rho)?;
    let eps: Vec<ComplexMatrix> = partials
        .as_slice()
        .iter()
        .map(|x| e_representation(rho, x, f))
        .collect::<Result<_>>()?;
    let n = partials.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let tr: C64 = trace_of_product(&partials.as_slice()[i], &eps[j]);
            debug_assert!(
                tr.im.abs() <= 1e-8 * tr.norm().max(1.0),
                "imaginary residue {:e}",
                tr.im
            );
            g[(i, j)] = tr.re;
        }
    }
    MetricMatrix::new((&g + g.transpose()) * 0.5)
}

/// The same metric assembled from the eigenbasis double sum.
pub fn quantum_fisher_metric_eigensum(
    rho: &SpectralDecomposition,
    partials: &TangentMRep,
    f: &PetzFunction,
) -> Result<MetricMatrix> {
    check_full_rank(rho)?;
    let p = rho.eigenvalues();
    let dim = p.len();
    let mut coef = vec![0.0; dim * dim];
    for k in 0..dim {
        for l in 0..dim {
            coef[k * dim + l] = 1.0 / (p[l] * f.eval(p[k] / p[l])?);
        }
    }
    let a: Vec<ComplexMatrix> = partials.as_slice().iter().map(|x| rho.to_eigenbasis(x)).collect();
    let n = a.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for k in 0..dim {
                for l in 0..dim {
                    acc += coef[k * dim + l] * (a[i].get(k, l).conj() * a[j].get(k, l)).re;
                }
            }
            g[(i, j)] = acc;
            g[(j, i)] = acc;
        }
    }
    MetricMatrix::new(g)
}

/// Keeps the diagonal, zeroes everything else.
pub fn diagonal_metric(g: &MetricMatrix) -> MetricMatrix {
    let n = g.dim();
    MetricMatrix(DMatrix::from_fn(n, n, |i, j| if i == j { g.0[(i, i)] } else { 0.0 }))
}

/// `(1 − ξ) G + ξ I` for `ξ ∈ [0, 1)`.
pub fn regularize_metric(g: &MetricMatrix, xi: f64) -> Result<MetricMatrix> {
    if !(0.0..1.0).contains(&xi) {
        return Err(QngError::InvalidParameter(format!("xi must lie in [0, 1), got {xi}")));
    }
    let n = g.dim();
    Ok(MetricMatrix(&g.0 * (1.0 - xi) + DMatrix::<f64>::identity(n, n) * xi))
}

/// Classical Fisher metric `G_ij = Σ_x ∂_i p(x) ∂_j p(x) / p(x)`.
pub fn classical_fisher_metric(p: &[f64], partials: &[Vec<f64>]) -> Result<MetricMatrix> {
    check_distribution(p)?;
    for d in partials {
        if d.len() != p.len() {
            return Err(QngError::DimensionMismatch(p.len(), d.len()));
        }
        let s: f64 = d.iter().sum();
        if s.abs() > 1e-10 {
            return Err(QngError::InvalidDistribution(format!(
                "tangent components sum to {s:e}, expected 0"
            )));
        }
    }
    let n = partials.len();
    let g = DMatrix::from_fn(n, n, |i, j| {
        p.iter()
            .enumerate()
            .map(|(x, &px)| partials[i][x] * partials[j][x] / px)
            .sum()
    });
    MetricMatrix::new(g)
}

pub(crate) fn check_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(QngError::InvalidDistribution("empty distribution".into()));
    }
    if let Some(bad) = p.iter().find(|&&x| !(x > 0.0) || !x.is_finite()) {
        return Err(QngError::InvalidDistribution(format!(
            "entries must be strictly positive, found {bad}"
        )));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-10 {
        return Err(QngError::InvalidDistribution(format!("sums to {s}, expected 1")));
    }
    Ok(())
}

/// `min eig(A − B) / max(1, ‖A‖, ‖B‖)`: nonnegative (up to tolerance) iff `A ⪰ B`.
pub fn loewner_margin(a: &MetricMatrix, b: &MetricMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(QngError::DimensionMismatch(a.dim(), b.dim()));
    }
    let diff = MetricMatrix(&a.0 - &b.0);
    let scale = a.spectral_norm().max(b.spectral_norm()).max(1.0);
    Ok(diff.min_eigenvalue() / scale)
}

/// `A ⪰ B` in Loewner order, tolerance `1e-9` relative to the larger operand.
pub fn loewner_geq(a: &MetricMatrix, b: &MetricMatrix) -> Result<bool> {
    Ok(loewner_margin(a, b)? >= -LOEWNER_TOL)
}
