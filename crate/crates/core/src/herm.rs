//! Dense hermitian operators, Hilbert-Schmidt geometry and spectral tests.
//!
//! Every operator in the crate (POVM elements, basis elements, extracted
//! isospectral operators) is carried as a [`HermitianOperator`]. Hermiticity is
//! checked entrywise on construction and then enforced exactly by replacing the
//! matrix with `(a + a†)/2`, so the eigensolver always sees an exactly hermitian
//! input.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{PovmError, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Entrywise tolerance for accepting a matrix as hermitian.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Default PSD tolerance, relative to `max(1, ‖a‖_HS)`.
pub const DEFAULT_PSD_TOL: f64 = 1e-10;
/// Default tolerance for grouping eigenvalues into multiplicities.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;
/// Relative reconstruction residual accepted from the eigensolver.
pub const EIG_RESIDUAL_TOL: f64 = 1e-10;

const EIG_MAX_ITER: usize = 10_000;

/// A dense complex `d × d` hermitian matrix with `d ≥ 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    m: CMatrix,
}

impl HermitianOperator {
    /// Checks hermiticity entrywise at [`HERMITICITY_TOL`] and symmetrizes.
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(PovmError::Structure(format!(
                "operator must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let d = m.nrows();
        if d < 2 {
            return Err(PovmError::Domain(format!(
                "operator dimension must be >= 2, got {d}"
            )));
        }
        for r in 0..d {
            for c in r..d {
                let deviation = (m[(r, c)] - m[(c, r)].conj()).norm();
                if deviation.is_nan() || deviation > HERMITICITY_TOL {
                    return Err(PovmError::NotHermitian {
                        row: r,
                        col: c,
                        deviation,
                    });
                }
            }
        }
        Ok(Self::symmetrized(m))
    }

    /// Wraps the result of an operation that is hermitian by construction.
    pub(crate) fn symmetrized(m: CMatrix) -> Self {
        let adj = m.adjoint();
        Self {
            m: (m + adj) * Complex64::new(0.5, 0.0),
        }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(PovmError::Structure(
                "matrix rows must all have length d".into(),
            ));
        }
        Self::new(CMatrix::from_fn(d, d, |r, c| rows[r][c]))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let d = diag.len();
        Self::new(CMatrix::from_fn(d, d, |r, c| {
            if r == c {
                Complex64::new(diag[r], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn zeros(d: usize) -> Result<Self> {
        Self::new(CMatrix::zeros(d, d))
    }

    pub fn identity(d: usize) -> Result<Self> {
        Self::scaled_identity(d, 1.0)
    }

    pub fn scaled_identity(d: usize, s: f64) -> Result<Self> {
        Self::new(CMatrix::identity(d, d) * Complex64::new(s, 0.0))
    }

    /// The rank-1 projector `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩`.
    pub fn projector(psi: &DVector<Complex64>) -> Result<Self> {
        let norm_sq = psi.norm_squared();
        if norm_sq.is_nan() || norm_sq <= 0.0 {
            return Err(PovmError::Domain(
                "cannot project onto the zero vector".into(),
            ));
        }
        let m = psi * psi.adjoint() / Complex64::new(norm_sq, 0.0);
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.diagonal().iter().map(|z| z.re).sum()
    }

    /// `‖a‖_HS = sqrt(Tr{a²})`.
    pub fn hs_norm(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            m: &self.m * Complex64::new(s, 0.0),
        }
    }

    /// `a²`, hermitian whenever `a` is.
    pub fn square(&self) -> Self {
        Self::symmetrized(&self.m * &self.m)
    }

    /// `U a U†` for a square matrix `U` of matching dimension.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(PovmError::Dimension {
                expected: self.dim(),
                found: u.nrows(),
            });
        }
        Ok(Self::symmetrized(u * &self.m * u.adjoint()))
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `Σ_k c_k · ops_k`, all operators sharing one dimension.
    pub fn linear_combination<'a, I>(d: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, &'a HermitianOperator)>,
    {
        let mut acc = CMatrix::zeros(d, d);
        for (c, op) in terms {
            if op.dim() != d {
                return Err(PovmError::Dimension {
                    expected: d,
                    found: op.dim(),
                });
            }
            acc += &op.m * Complex64::new(c, 0.0);
        }
        Self::new(acc)
    }
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: &HermitianOperator) -> HermitianOperator {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        HermitianOperator {
            m: &self.m + &rhs.m,
        }
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: &HermitianOperator) -> HermitianOperator {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        HermitianOperator {
            m: &self.m - &rhs.m,
        }
    }
}

impl Neg for &HermitianOperator {
    type Output = HermitianOperator;
    fn neg(self) -> HermitianOperator {
        HermitianOperator { m: -&self.m }
    }
}

impl Mul<f64> for &HermitianOperator {
    type Output = HermitianOperator;
    fn mul(self, s: f64) -> HermitianOperator {
        self.scale(s)
    }
}

/// Hilbert-Schmidt inner product `Tr{a·b}`.
pub fn hs_inner(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(PovmError::Dimension {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(hs_inner_unchecked(a.matrix(), b.matrix()))
}

/// `Re Σ conj(a_jk) b_jk`, which equals `Tr{a·b}` for hermitian `a`.
pub(crate) fn hs_inner_unchecked(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum()
}

/// Eigenvalues sorted descending with the matching eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigh {
    /// Number of eigenvalues above `threshold`.
    pub fn rank(&self, threshold: f64) -> usize {
        self.values.iter().filter(|&&v| v > threshold).count()
    }
}

/// Full hermitian eigendecomposition with a reconstruction residual check.
pub fn eigh(a: &HermitianOperator) -> Result<Eigh> {
    let d = a.dim();
    let eig = SymmetricEigen::try_new(a.matrix().clone(), f64::EPSILON, EIG_MAX_ITER).ok_or(
        PovmError::Numeric {
            residual: f64::INFINITY,
        },
    )?;

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);

    let lambda = CMatrix::from_diagonal(&DVector::from_iterator(
        d,
        values.iter().map(|&v| Complex64::new(v, 0.0)),
    ));
    let rebuilt = &vectors * lambda * vectors.adjoint();
    let residual = (a.matrix() - rebuilt).norm();
    if residual.is_nan() || residual > EIG_RESIDUAL_TOL * a.hs_norm() {
        return Err(PovmError::Numeric { residual });
    }
    Ok(Eigh { values, vectors })
}

/// Eigenvalues only, sorted descending.
pub fn eigenvalues(a: &HermitianOperator) -> Vec<f64> {
    let mut v: Vec<f64> = a.matrix().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|x, y| y.total_cmp(x));
    v
}

pub fn min_eigenvalue(a: &HermitianOperator) -> f64 {
    a.matrix()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Distinct eigenvalues (descending) with multiplicities.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub multiplicities: Vec<usize>,
}

impl Spectrum {
    /// Groups values whose consecutive gaps (after sorting) are below
    /// `cluster_tol`; each group is represented by its mean.
    pub fn from_values(values: &[f64], cluster_tol: f64) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(|x, y| y.total_cmp(x));
        let mut eigenvalues = Vec::new();
        let mut multiplicities = Vec::new();
        let mut group: Vec<f64> = Vec::new();
        for v in sorted {
            if let Some(&last) = group.last() {
                if last - v >= cluster_tol {
                    eigenvalues.push(group.iter().sum::<f64>() / group.len() as f64);
                    multiplicities.push(group.len());
                    group.clear();
                }
            }
            group.push(v);
        }
        if !group.is_empty() {
            eigenvalues.push(group.iter().sum::<f64>() / group.len() as f64);
            multiplicities.push(group.len());
        }
        Self {
            eigenvalues,
            multiplicities,
        }
    }

    /// Builds a spectrum from explicit groups, dropping empty ones.
    pub fn from_groups(groups: &[(f64, usize)]) -> Self {
        let mut g: Vec<(f64, usize)> = groups.iter().copied().filter(|&(_, m)| m > 0).collect();
        g.sort_by(|a, b| b.0.total_cmp(&a.0));
        Self {
            eigenvalues: g.iter().map(|p| p.0).collect(),
            multiplicities: g.iter().map(|p| p.1).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    /// Every eigenvalue repeated by its multiplicity, descending.
    pub fn expanded(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .zip(&self.multiplicities)
            .flat_map(|(&v, &m)| std::iter::repeat_n(v, m))
            .collect()
    }

    pub fn trace(&self) -> f64 {
        self.expanded().iter().sum()
    }

    /// Largest eigenvalue deviation when both spectra have the same group
    /// structure; `None` if the multiplicities differ.
    pub fn deviation(&self, other: &Spectrum) -> Option<f64> {
        if self.multiplicities != other.multiplicities {
            return None;
        }
        Some(
            self.eigenvalues
                .iter()
                .zip(&other.eigenvalues)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }
}

/// Spectrum of `a` grouped at `cluster_tol`.
pub fn eig_spectrum(a: &HermitianOperator, cluster_tol: f64) -> Result<Spectrum> {
    let e = eigh(a)?;
    Ok(Spectrum::from_values(&e.values, cluster_tol))
}

/// Outcome of a positive-semidefiniteness test.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct PsdCheck {
    pub psd: bool,
    pub min_eigenvalue: f64,
    /// The offending eigenvalue when the test fails.
    pub witness: Option<f64>,
}

/// PSD iff the smallest eigenvalue is `≥ −tol · max(1, ‖a‖_HS)`.
pub fn is_psd(a: &HermitianOperator, tol: f64) -> PsdCheck {
    let min = min_eigenvalue(a);
    let psd = min >= -tol * a.hs_norm().max(1.0);
    PsdCheck {
        psd,
        min_eigenvalue: min,
        witness: (!psd).then_some(min),
    }
}
