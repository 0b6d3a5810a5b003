//! The (N,M)-POVM data model.
//!
//! An `(N,M)`-POVM on a `d`-dimensional system is a family of `N` POVMs with
//! `M` outcomes each. Elements are stored flat in the order
//! `i(α,a) = (α−1)·M + a` (both indices 1-based) and obey
//!
//! ```text
//! Tr{Π_i}            = d/M
//! Tr{Π_i Π_i'}       = x δ_{aa'} + (1−δ_{aa'}) (d−Mx)/(M(M−1))   (same α)
//! Tr{Π_i Π_j}        = d/M²                                       (α ≠ β)
//! d/M² < x ≤ min(d²/M², d/M)
//! ```

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{PovmError, Result};
use crate::herm::{hs_inner_unchecked, is_psd, HermitianOperator, DEFAULT_PSD_TOL};

/// Distance from the upper endpoint of the `x` range within which a POVM is
/// flagged optimal.
pub const OPTIMALITY_TOL: f64 = 1e-12;
/// Default validation tolerance.
pub const DEFAULT_VALIDATION_TOL: f64 = 1e-10;
/// Default relative singular-value threshold for the completeness rank test.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PovmParams {
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub x: f64,
    /// Non-degenerate eigenvalue `dN/M` of the structural map.
    pub lambda1: f64,
    /// `(d²−1)`-fold eigenvalue `(xM²−d)/(M(M−1))`.
    pub gamma: f64,
    pub optimal: bool,
    /// `x_max − x`.
    pub optimal_gap: f64,
}

/// Lower (exclusive) endpoint `d/M²` of the `x` range.
pub fn x_lower(d: usize, m: usize) -> f64 {
    d as f64 / (m * m) as f64
}

/// Upper endpoint `min(d²/M², d/M)`, the optimal value of `x`.
pub fn x_optimal(d: usize, m: usize) -> f64 {
    let (d, m) = (d as f64, m as f64);
    (d * d / (m * m)).min(d / m)
}

/// `Γ = (xM²−d)/(M(M−1))`.
pub fn gamma(d: usize, m: usize, x: f64) -> f64 {
    let (d, m) = (d as f64, m as f64);
    (x * m * m - d) / (m * (m - 1.0))
}

pub fn povm_params(d: usize, n: usize, m: usize, x: f64) -> Result<PovmParams> {
    if d < 2 {
        return Err(PovmError::Parameter(format!("d must be >= 2, got {d}")));
    }
    if n < 1 {
        return Err(PovmError::Parameter(format!("N must be >= 1, got {n}")));
    }
    if m < 2 {
        return Err(PovmError::Parameter(format!("M must be >= 2, got {m}")));
    }
    if !x.is_finite() {
        return Err(PovmError::Parameter(format!("x must be finite, got {x}")));
    }
    let lower = x_lower(d, m);
    let upper = x_optimal(d, m);
    if x <= lower {
        return Err(PovmError::Parameter(format!(
            "lower bound violated: x = {x} must be strictly greater than d/M^2 = {lower}"
        )));
    }
    if x > upper + OPTIMALITY_TOL {
        return Err(PovmError::Parameter(format!(
            "upper bound violated: x = {x} exceeds min(d^2/M^2, d/M) = {upper}"
        )));
    }
    let optimal_gap = upper - x;
    Ok(PovmParams {
        d,
        n,
        m,
        x,
        lambda1: (d * n) as f64 / m as f64,
        gamma: gamma(d, m, x),
        optimal: optimal_gap.abs() <= OPTIMALITY_TOL,
        optimal_gap,
    })
}

/// Parameters plus `N·M` elements in `i(α,a)` order.
///
/// Construction checks only the element count and dimensions; the defining
/// relations are checked by [`validate_povm`].
#[derive(Clone, Debug)]
pub struct NmPovm {
    params: PovmParams,
    elements: Vec<HermitianOperator>,
}

impl NmPovm {
    pub fn new(params: PovmParams, elements: Vec<HermitianOperator>) -> Result<Self> {
        let expected = params.n * params.m;
        if elements.len() != expected {
            return Err(PovmError::Structure(format!(
                "(N,M) = ({},{}) needs {expected} elements, got {}",
                params.n,
                params.m,
                elements.len()
            )));
        }
        if let Some(bad) = elements.iter().find(|e| e.dim() != params.d) {
            return Err(PovmError::Dimension {
                expected: params.d,
                found: bad.dim(),
            });
        }
        Ok(Self { params, elements })
    }

    pub fn params(&self) -> &PovmParams {
        &self.params
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<HermitianOperator> {
        self.elements
    }

    /// 0-based flat index of the 1-based pair `(α, a)`.
    pub fn index(&self, alpha: usize, a: usize) -> usize {
        assert!((1..=self.params.n).contains(&alpha) && (1..=self.params.m).contains(&a));
        (alpha - 1) * self.params.m + (a - 1)
    }

    pub fn element(&self, alpha: usize, a: usize) -> &HermitianOperator {
        &self.elements[self.index(alpha, a)]
    }

    /// The `M` elements of POVM `α` (1-based).
    pub fn block(&self, alpha: usize) -> &[HermitianOperator] {
        let m = self.params.m;
        &self.elements[(alpha - 1) * m..alpha * m]
    }

    #[cfg(test)]
    pub(crate) fn replace_element(&mut self, flat: usize, op: HermitianOperator) {
        self.elements[flat] = op;
    }
}

/// Real HS Gram matrix `Tr{Π_i Π_j}` of a list of operators.
pub fn gram_matrix(ops: &[HermitianOperator]) -> DMatrix<f64> {
    let n = ops.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| hs_inner_unchecked(ops[i].matrix(), ops[j].matrix()))
                .collect()
        })
        .collect();
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsdWitness {
    /// 1-based flat index `i(α,a)`.
    pub index: usize,
    pub min_eigenvalue: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PovmReport {
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub x: f64,
    pub gamma: f64,
    pub optimal: bool,
    pub optimal_gap: f64,
    /// `max |Tr{Π_i} − d/M|`.
    pub trace_residual: f64,
    /// `max |Tr{Π_i²} − x|`, the stored-versus-measured `x` cross-check.
    pub gram_diagonal_residual: f64,
    /// `max |Tr{Π_iΠ_i'} − (d−Mx)/(M(M−1))|` within one POVM.
    pub gram_intra_residual: f64,
    /// `max |Tr{Π_iΠ_j} − d/M²|` across POVMs.
    pub gram_inter_residual: f64,
    /// `max_α max_entry |Σ_a Π_{i(α,a)} − I_d|`.
    pub completeness_residual: f64,
    /// `max_i max(0, −λ_min(Π_i)/max(1, ‖Π_i‖))`.
    pub psd_residual: f64,
    pub min_eigenvalue: f64,
    pub measured_x_min: f64,
    pub measured_x_max: f64,
    pub non_psd: Vec<PsdWitness>,
    pub tol: f64,
    pub passed: bool,
}

impl PovmReport {
    /// Largest residual among the defining relations (excluding PSD).
    pub fn max_relation_residual(&self) -> f64 {
        [
            self.trace_residual,
            self.gram_diagonal_residual,
            self.gram_intra_residual,
            self.gram_inter_residual,
            self.completeness_residual,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn validate_povm(p: &NmPovm, tol: f64) -> Result<PovmReport> {
    let PovmParams { d, n, m, x, .. } = *p.params();
    let el = p.elements();
    if el.len() != n * m || el.iter().any(|e| e.dim() != d) {
        return Err(PovmError::Structure(
            "element list does not match (d, N, M)".into(),
        ));
    }
    let (df, mf) = (d as f64, m as f64);
    let tr_target = df / mf;
    let intra_target = (df - mf * x) / (mf * (mf - 1.0));
    let inter_target = df / (mf * mf);

    let trace_residual = el
        .iter()
        .map(|e| (e.trace() - tr_target).abs())
        .fold(0.0, f64::max);

    let gram = gram_matrix(el);
    let mut gram_diagonal_residual: f64 = 0.0;
    let mut gram_intra_residual: f64 = 0.0;
    let mut gram_inter_residual: f64 = 0.0;
    let mut measured_x_min = f64::INFINITY;
    let mut measured_x_max = f64::NEG_INFINITY;
    for i in 0..el.len() {
        for j in i..el.len() {
            let g = gram[(i, j)];
            if i == j {
                measured_x_min = measured_x_min.min(g);
                measured_x_max = measured_x_max.max(g);
                gram_diagonal_residual = gram_diagonal_residual.max((g - x).abs());
            } else if i / m == j / m {
                gram_intra_residual = gram_intra_residual.max((g - intra_target).abs());
            } else {
                gram_inter_residual = gram_inter_residual.max((g - inter_target).abs());
            }
        }
    }

    let mut completeness_residual: f64 = 0.0;
    for alpha in 1..=n {
        let sum = p
            .block(alpha)
            .iter()
            .fold(nalgebra::DMatrix::zeros(d, d), |acc, e| acc + e.matrix());
        let dev = (sum - crate::herm::CMatrix::identity(d, d))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        completeness_residual = completeness_residual.max(dev);
    }

    let checks: Vec<(f64, f64)> = el
        .par_iter()
        .map(|e| (is_psd(e, tol).min_eigenvalue, e.hs_norm().max(1.0)))
        .collect();
    let mut non_psd = Vec::new();
    let mut psd_residual: f64 = 0.0;
    let mut min_eigenvalue = f64::INFINITY;
    for (i, &(lambda, scale)) in checks.iter().enumerate() {
        min_eigenvalue = min_eigenvalue.min(lambda);
        let r = (-lambda / scale).max(0.0);
        psd_residual = psd_residual.max(r);
        if r > tol {
            non_psd.push(PsdWitness {
                index: i + 1,
                min_eigenvalue: lambda,
            });
        }
    }

    let params = p.params();
    let mut report = PovmReport {
        d,
        n,
        m,
        x,
        gamma: params.gamma,
        optimal: params.optimal,
        optimal_gap: params.optimal_gap,
        trace_residual,
        gram_diagonal_residual,
        gram_intra_residual,
        gram_inter_residual,
        completeness_residual,
        psd_residual,
        min_eigenvalue,
        measured_x_min,
        measured_x_max,
        non_psd,
        tol,
        passed: false,
    };
    report.passed = report.max_relation_residual() <= tol && psd_residual <= tol;
    Ok(report)
}

/// Born-rule probabilities `Tr{ρ Π_i}` in `i(α,a)` order.
pub fn born_probabilities(p: &NmPovm, rho: &HermitianOperator) -> Result<Vec<f64>> {
    let d = p.params().d;
    if rho.dim() != d {
        return Err(PovmError::Dimension {
            expected: d,
            found: rho.dim(),
        });
    }
    let tr = rho.trace();
    if (tr - 1.0).abs() > 1e-10 {
        return Err(PovmError::State(format!("trace is {tr}, expected 1")));
    }
    let chk = is_psd(rho, DEFAULT_PSD_TOL);
    if !chk.psd {
        return Err(PovmError::State(format!(
            "negative eigenvalue {:e}",
            chk.min_eigenvalue
        )));
    }
    Ok(p.elements()
        .iter()
        .map(|e| hs_inner_unchecked(rho.matrix(), e.matrix()))
        .collect())
}

/// Numerical rank of the HS Gram matrix: singular values above
/// `tol · σ_max` count.
pub fn operator_span_rank(ops: &[HermitianOperator], tol: f64) -> usize {
    let gram = gram_matrix(ops);
    let sv = gram.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * max).count()
}

/// `(M−1)N + 1 = d²` and the elements span all `d²` real dimensions.
pub fn is_informationally_complete(p: &NmPovm, tol: f64) -> bool {
    let PovmParams { d, n, m, .. } = *p.params();
    (m - 1) * n + 1 == d * d && operator_span_rank(p.elements(), tol) == d * d
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn params_examples() {
        let p = povm_params(3, 4, 3, 5.0 / 9.0).unwrap();
        // (5/9 · 9 − 3)/6
        assert_abs_diff_eq!(p.gamma, 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.lambda1, 4.0, epsilon = 0.0);
        assert!(!p.optimal);

        for (d, m) in [(2, 2), (3, 3), (4, 2), (8, 4)] {
            let err = povm_params(d, 1, m, x_lower(d, m)).unwrap_err();
            assert!(err.to_string().contains("lower bound"), "{err}");
        }

        let p = povm_params(2, 3, 2, 1.0).unwrap();
        assert!(p.optimal);
        assert_abs_diff_eq!(p.gamma, 1.0, epsilon = 1e-15);

        let err = povm_params(3, 4, 3, 1.01).unwrap_err();
        assert!(err.to_string().contains("upper bound"));
        assert!(povm_params(1, 1, 2, 0.5).is_err());
        assert!(povm_params(2, 0, 2, 0.8).is_err());
        assert!(povm_params(2, 1, 1, 0.8).is_err());
    }

    #[test]
    fn gamma_vanishes_at_lower_endpoint() {
        for d in 2..10 {
            for m in 2..10 {
                assert_abs_diff_eq!(gamma(d, m, x_lower(d, m)), 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn structure_errors() {
        let params = povm_params(2, 1, 2, 1.0).unwrap();
        let e = HermitianOperator::scaled_identity(2, 0.5).unwrap();
        assert!(matches!(
            NmPovm::new(params, vec![e.clone()]),
            Err(PovmError::Structure(_))
        ));
        let e3 = HermitianOperator::scaled_identity(3, 0.5).unwrap();
        assert!(matches!(
            NmPovm::new(params, vec![e, e3]),
            Err(PovmError::Dimension { .. })
        ));
    }

    #[test]
    fn born_rejects_non_states() {
        let p = crate::construct::fixture_povm(crate::construct::Fixture::SicQubit);
        let bad = HermitianOperator::from_real_diagonal(&[1.5, -0.5]).unwrap();
        assert!(matches!(
            born_probabilities(&p, &bad),
            Err(PovmError::State(_))
        ));
        let bad = HermitianOperator::from_real_diagonal(&[0.5, 0.4]).unwrap();
        assert!(matches!(
            born_probabilities(&p, &bad),
            Err(PovmError::State(_))
        ));
        let rho = HermitianOperator::scaled_identity(3, 1.0 / 3.0).unwrap();
        assert!(matches!(
            born_probabilities(&p, &rho),
            Err(PovmError::Dimension { .. })
        ));
    }
}
