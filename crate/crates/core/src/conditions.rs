//! Existence conditions for (N,M)-POVMs.
//!
//! * Sufficient: every expansion with `x − d/M² ≤ r_in² = d/(M²(d−1))` is PSD,
//!   whatever the traceless basis.
//! * Necessary, optimal `M ≥ d`: elements are rank-1 with eigenvalue `d/M`, and
//!   the operators built from each POVM's elements against its last element
//!   are traceless, orthonormal and isospectral with a fixed spectrum.
//! * Necessary, optimal `M < d`: elements are projectors of rank `d/M ∈ ℕ`.
//! * Necessary and sufficient, optimal `M = 2`: `d` even and the normalized
//!   traceless parts `K = (Π − I/2)/√(d/4)` are orthonormal with spectrum
//!   `±1/√d`, each with multiplicity `d/2`.
//!
//! All checks return reports rather than booleans; a verdict fails iff one of
//! its [`CheckItem`]s exceeds its tolerance.

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{PovmError, Result};
use crate::herm::{
    eigh, hs_inner_unchecked, CMatrix, HermitianOperator, Spectrum, DEFAULT_CLUSTER_TOL,
};
use crate::model::{gamma, x_lower, x_optimal, NmPovm, PovmParams};

/// Tolerance for rank, eigenvalue, overlap and spectrum checks.
pub const NECESSARY_TOL: f64 = 1e-9;
/// Tolerance for the HS orthogonality and antisymmetry checks of `K` operators.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadiiReport {
    pub d: usize,
    pub m: usize,
    /// `d/(M²(d−1))`.
    pub r_in_sq: f64,
    /// `min(d(M−1)/M², d(d−1)/M²)`.
    pub r_out_sq: f64,
    /// `r_in²/r_out²`.
    pub ratio: f64,
    pub sufficient_x_max: f64,
}

/// Exact rational radii.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactRadii {
    pub r_in_sq: Ratio<u64>,
    pub r_out_sq: Ratio<u64>,
    pub ratio: Ratio<u64>,
}

/// The two-branch closed form of `r_in²/r_out²`.
pub fn ratio_closed_form(d: usize, m: usize) -> Ratio<u64> {
    let (d, m) = (d as u64, m as u64);
    if m >= d {
        Ratio::new(1, (d - 1) * (d - 1))
    } else {
        Ratio::new(1, (m - 1) * (d - 1))
    }
}

pub fn radii_exact(d: usize, m: usize) -> Result<ExactRadii> {
    if d < 2 || m < 2 {
        return Err(PovmError::Domain(format!(
            "radii need d >= 2 and M >= 2, got d={d}, M={m}"
        )));
    }
    let (d64, m64) = (d as u64, m as u64);
    let r_in_sq = Ratio::new(d64, m64 * m64 * (d64 - 1));
    let r_out_sq =
        Ratio::new(d64 * (m64 - 1), m64 * m64).min(Ratio::new(d64 * (d64 - 1), m64 * m64));
    let ratio = r_in_sq / r_out_sq;
    if ratio != ratio_closed_form(d, m) {
        return Err(PovmError::Internal(format!(
            "radius ratio mismatch at d={d}, M={m}"
        )));
    }
    Ok(ExactRadii {
        r_in_sq,
        r_out_sq,
        ratio,
    })
}

fn to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn radii(d: usize, m: usize) -> Result<RadiiReport> {
    let exact = radii_exact(d, m)?;
    let r_in_sq = to_f64(exact.r_in_sq);
    Ok(RadiiReport {
        d,
        m,
        r_in_sq,
        r_out_sq: to_f64(exact.r_out_sq),
        ratio: to_f64(exact.ratio),
        sufficient_x_max: x_lower(d, m) + r_in_sq,
    })
}

/// `x ≤ d/M² + d/(M²(d−1))` within `1e-12`.
pub fn check_sufficient(params: &PovmParams) -> bool {
    params.x <= crate::construct::sufficient_x_max(params.d, params.m) + 1e-12
}

/// Which necessary condition applies to an optimal `(N,M)`-POVM.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    #[serde(rename = "M_ge_d")]
    MGeD,
    #[serde(rename = "M_between")]
    MBetween,
    #[serde(rename = "M_eq_2")]
    MEq2,
}

impl Regime {
    /// `M = 2` takes precedence over `M ≥ d` (relevant only at `d = 2`).
    pub fn of(d: usize, m: usize) -> Self {
        if m == 2 {
            Regime::MEq2
        } else if m >= d {
            Regime::MGeD
        } else {
            Regime::MBetween
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub residual: f64,
    pub tol: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckItem {
    fn new(name: &str, residual: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            residual,
            tol,
            passed: residual <= tol,
            detail: None,
        }
    }

    fn failed(name: &str, detail: String) -> Self {
        Self {
            name: name.into(),
            residual: f64::INFINITY,
            tol: 0.0,
            passed: false,
            detail: Some(detail),
        }
    }

    fn with_detail(mut self, detail: String) -> Self {
        self.detail = Some(detail);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ElementDiagnostic {
    /// 1-based flat index `i(α,a)`.
    pub index: usize,
    pub rank: usize,
    pub eigenvalues: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NecessaryReport {
    pub regime: Regime,
    pub passed: bool,
    pub checks: Vec<CheckItem>,
    pub elements: Vec<ElementDiagnostic>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_spectrum: Option<Spectrum>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extracted_operators: Option<Vec<HermitianOperator>>,
}

impl NecessaryReport {
    fn new(regime: Regime, checks: Vec<CheckItem>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self {
            regime,
            passed,
            checks,
            elements: vec![],
            predicted_spectrum: None,
            extracted_operators: None,
        }
    }

    pub fn check(&self, name: &str) -> Option<&CheckItem> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Normalization of the isospectral operators built from an optimal `M ≥ d`
/// POVM: `√(M−1)/((√M+1)√(d²−d))`.
fn iso_prefactor(d: f64, m: f64) -> f64 {
    (m - 1.0).sqrt() / ((m.sqrt() + 1.0) * (d * d - d).sqrt())
}

/// Common spectrum of the isospectral operators for optimal `M ≥ d`:
/// `c(1+Λ₊)`, `c(1+Λ₋)` once each and `c` with multiplicity `d−2`, where
/// `Λ± = (−d ± √(d² + 4(d²−d)/(√M−1)))/2`.
pub fn predicted_iso_spectrum(d: usize, m: usize) -> Result<Spectrum> {
    if d < 2 || m < d {
        return Err(PovmError::Regime(format!(
            "isospectral prediction needs M >= d >= 2, got d={d}, M={m}"
        )));
    }
    let (df, mf) = (d as f64, m as f64);
    let c = iso_prefactor(df, mf);
    let disc = (df * df + 4.0 * (df * df - df) / (mf.sqrt() - 1.0)).sqrt();
    let lp = 0.5 * (-df + disc);
    let lm = 0.5 * (-df - disc);
    Ok(Spectrum::from_groups(&[
        (c * (1.0 + lp), 1),
        (c * (1.0 + lm), 1),
        (c, d - 2),
    ]))
}

fn require_optimal(params: &PovmParams) -> Result<()> {
    if !params.optimal {
        return Err(PovmError::Regime(format!(
            "POVM is not optimal: x = {} but x_opt = {} (gap {:e})",
            params.x,
            x_optimal(params.d, params.m),
            params.optimal_gap
        )));
    }
    Ok(())
}

fn spectrum_residual(values: &[f64], target: &Spectrum) -> f64 {
    let measured = Spectrum::from_values(values, DEFAULT_CLUSTER_TOL);
    measured.deviation(target).unwrap_or(f64::INFINITY)
}

pub fn check_optimal_m_ge_d(p: &NmPovm) -> Result<NecessaryReport> {
    let params = *p.params();
    let PovmParams { d, n, m, .. } = params;
    if m < d {
        return Err(PovmError::Regime(format!(
            "M = {m} < d = {d}; the M >= d condition does not apply"
        )));
    }
    require_optimal(&params)?;
    let (df, mf) = (d as f64, m as f64);
    let lambda = df / mf;

    let decomps = p.elements().iter().map(eigh).collect::<Result<Vec<_>>>()?;
    let mut elements = Vec::with_capacity(decomps.len());
    let mut eig_res: f64 = 0.0;
    let mut bad_rank = Vec::new();
    for (i, e) in decomps.iter().enumerate() {
        let rank = e.rank(NECESSARY_TOL * lambda);
        eig_res = eig_res.max((e.values[0] - lambda).abs());
        for v in &e.values[1..] {
            eig_res = eig_res.max(v.abs());
        }
        if rank != 1 {
            bad_rank.push(i + 1);
        }
        elements.push(ElementDiagnostic {
            index: i + 1,
            rank,
            eigenvalues: e.values.clone(),
        });
    }
    let mut checks = vec![
        if bad_rank.is_empty() {
            CheckItem::new("rank_one", 0.0, 0.0)
        } else {
            CheckItem::failed("rank_one", format!("elements {bad_rank:?} are not rank 1"))
        },
        CheckItem::new("eigenvalue_d_over_m", eig_res, NECESSARY_TOL),
    ];

    // Overlaps of the leading eigenvectors.
    let intra = ((mf / df - 1.0) / (mf - 1.0)).sqrt();
    let inter = (1.0 / df).sqrt();
    let kets: Vec<_> = decomps
        .iter()
        .map(|e| e.vectors.column(0).into_owned())
        .collect();
    let mut intra_res: f64 = 0.0;
    let mut inter_res: f64 = 0.0;
    for i in 0..kets.len() {
        for j in i + 1..kets.len() {
            let ov = kets[i].dotc(&kets[j]).norm();
            if i / m == j / m {
                intra_res = intra_res.max((ov - intra).abs());
            } else {
                inter_res = inter_res.max((ov - inter).abs());
            }
        }
    }
    checks.push(CheckItem::new("overlap_intra", intra_res, NECESSARY_TOL));
    checks.push(CheckItem::new("overlap_inter", inter_res, NECESSARY_TOL));

    // G_{i(α,a)} = c (I + √M Π_{i(α,M)} − √M(√M+1) Π_{i(α,a)}), a < M.
    let c = iso_prefactor(df, mf);
    let sm = mf.sqrt();
    let id = CMatrix::identity(d, d);
    let mut extracted = Vec::with_capacity(n * (m - 1));
    for alpha in 1..=n {
        let anchor = p.element(alpha, m).matrix();
        for a in 1..m {
            let pa = p.element(alpha, a).matrix();
            let g = (&id + anchor * num_complex::Complex64::new(sm, 0.0)
                - pa * num_complex::Complex64::new(sm * (sm + 1.0), 0.0))
                * num_complex::Complex64::new(c, 0.0);
            extracted.push(HermitianOperator::symmetrized(g));
        }
    }
    let trace_res = extracted
        .iter()
        .map(|g| g.trace().abs())
        .fold(0.0, f64::max);
    let mut gram_res: f64 = 0.0;
    for i in 0..extracted.len() {
        for j in i..extracted.len() {
            let g = hs_inner_unchecked(extracted[i].matrix(), extracted[j].matrix());
            gram_res = gram_res.max((g - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    let predicted = predicted_iso_spectrum(d, m)?;
    let mut spec_res: f64 = 0.0;
    for g in &extracted {
        spec_res = spec_res.max(spectrum_residual(&eigh(g)?.values, &predicted));
    }
    checks.push(CheckItem::new(
        "extracted_traceless",
        trace_res,
        NECESSARY_TOL,
    ));
    checks.push(CheckItem::new(
        "extracted_orthonormal",
        gram_res,
        NECESSARY_TOL,
    ));
    checks.push(CheckItem::new(
        "extracted_isospectral",
        spec_res,
        NECESSARY_TOL,
    ));

    let mut report = NecessaryReport::new(Regime::MGeD, checks);
    report.elements = elements;
    report.predicted_spectrum = Some(predicted);
    report.extracted_operators = Some(extracted);
    Ok(report)
}

pub fn check_optimal_m_between(p: &NmPovm) -> Result<NecessaryReport> {
    let params = *p.params();
    let PovmParams { d, m, .. } = params;
    if m < 2 || m >= d {
        return Err(PovmError::Regime(format!(
            "need 2 <= M < d, got d={d}, M={m}"
        )));
    }
    require_optimal(&params)?;
    if d % m != 0 {
        let item = CheckItem::failed(
            "rank_integral",
            format!("d/M = {d}/{m} is not a natural number"),
        );
        return Ok(NecessaryReport::new(Regime::MBetween, vec![item]));
    }
    let rank = d / m;
    let mut elements = Vec::new();
    let mut spectrum_res: f64 = 0.0;
    let mut idem_res: f64 = 0.0;
    let mut bad_rank = Vec::new();
    for (i, e) in p.elements().iter().enumerate() {
        let dec = eigh(e)?;
        let r = dec.rank(NECESSARY_TOL * d as f64 / m as f64);
        for v in &dec.values {
            spectrum_res = spectrum_res.max(v.abs().min((v - 1.0).abs()));
        }
        if r != rank {
            bad_rank.push(i + 1);
        }
        idem_res = idem_res.max((e.square().matrix() - e.matrix()).norm());
        elements.push(ElementDiagnostic {
            index: i + 1,
            rank: r,
            eigenvalues: dec.values,
        });
    }
    let checks = vec![
        CheckItem::new("rank_integral", 0.0, 0.0).with_detail(format!("d/M = {rank}")),
        CheckItem::new("eigenvalues_zero_one", spectrum_res, NECESSARY_TOL),
        if bad_rank.is_empty() {
            CheckItem::new("rank_d_over_m", 0.0, 0.0)
        } else {
            CheckItem::failed(
                "rank_d_over_m",
                format!("elements {bad_rank:?} do not have rank {rank}"),
            )
        },
        CheckItem::new("idempotent", idem_res, NECESSARY_TOL),
    ];
    let mut report = NecessaryReport::new(Regime::MBetween, checks);
    report.elements = elements;
    Ok(report)
}

/// `K = (Π − I/2)/√(d/4)`.
pub fn k_operator(pi: &HermitianOperator) -> HermitianOperator {
    let d = pi.dim();
    let shifted = pi.matrix() - CMatrix::identity(d, d) * num_complex::Complex64::new(0.5, 0.0);
    HermitianOperator::symmetrized(
        shifted * num_complex::Complex64::new(1.0 / (d as f64 / 4.0).sqrt(), 0.0),
    )
}

pub fn check_optimal_m2(p: &NmPovm) -> Result<NecessaryReport> {
    let params = *p.params();
    let PovmParams { d, n, m, .. } = params;
    if m != 2 {
        return Err(PovmError::Regime(format!(
            "M = {m}; the M = 2 criterion does not apply"
        )));
    }
    if n > d * d - 1 {
        return Err(PovmError::Regime(format!(
            "N = {n} exceeds d^2-1 = {}",
            d * d - 1
        )));
    }
    require_optimal(&params)?;
    if d % 2 != 0 {
        let item = CheckItem::failed("even_dimension", format!("d = {d} is odd"));
        return Ok(NecessaryReport::new(Regime::MEq2, vec![item]));
    }
    let target_value = 1.0 / (d as f64).sqrt();
    let target = Spectrum::from_groups(&[(target_value, d / 2), (-target_value, d / 2)]);
    let ks: Vec<HermitianOperator> = p.elements().iter().map(k_operator).collect();

    let mut spec_res: f64 = 0.0;
    let mut elements = Vec::new();
    for (i, k) in ks.iter().enumerate() {
        let dec = eigh(k)?;
        spec_res = spec_res.max(spectrum_residual(&dec.values, &target));
        let r = eigh(&p.elements()[i])?.rank(NECESSARY_TOL);
        elements.push(ElementDiagnostic {
            index: i + 1,
            rank: r,
            eigenvalues: dec.values,
        });
    }
    let firsts: Vec<&HermitianOperator> = ks.iter().step_by(2).collect();
    let mut orth_res: f64 = 0.0;
    for i in 0..firsts.len() {
        for j in i..firsts.len() {
            let g = hs_inner_unchecked(firsts[i].matrix(), firsts[j].matrix());
            orth_res = orth_res.max((g - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    let anti_res = ks
        .chunks(2)
        .map(|pair| {
            (pair[1].matrix() + pair[0].matrix())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    let trace_res = ks.iter().map(|k| k.trace().abs()).fold(0.0, f64::max);

    let checks = vec![
        CheckItem::new("even_dimension", 0.0, 0.0),
        CheckItem::new("k_traceless", trace_res, ORTHOGONALITY_TOL),
        CheckItem::new("k_spectrum", spec_res, NECESSARY_TOL),
        CheckItem::new("k_orthonormal", orth_res, ORTHOGONALITY_TOL),
        CheckItem::new("k_antisymmetric", anti_res, ORTHOGONALITY_TOL),
    ];
    let mut report = NecessaryReport::new(Regime::MEq2, checks);
    report.elements = elements;
    report.predicted_spectrum = Some(target);
    report.extracted_operators = Some(firsts.into_iter().cloned().collect());
    Ok(report)
}

/// Dispatches to the necessary condition for the POVM's regime.
pub fn check_necessary(p: &NmPovm) -> Result<NecessaryReport> {
    match Regime::of(p.params().d, p.params().m) {
        Regime::MEq2 => check_optimal_m2(p),
        Regime::MGeD => check_optimal_m_ge_d(p),
        Regime::MBetween => check_optimal_m_between(p),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScreenReport {
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub regime: Regime,
    /// Optimal `x = min(d²/M², d/M)`.
    pub x: f64,
    pub gamma: f64,
    /// `(M−1)N + 1 = d²`.
    pub informationally_complete: bool,
    /// Required projector rank `d/M` when `M < d` and it is integral.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    pub checks: Vec<CheckItem>,
    pub excluded: bool,
    /// `"excluded"` or `"not excluded"`; never an existence claim.
    pub verdict: String,
    pub reasons: Vec<String>,
}

/// Parameter-only screening of an optimal `(N,M)`-POVM in dimension `d`.
pub fn feasibility_screen(d: usize, n: usize, m: usize) -> Result<ScreenReport> {
    if d < 2 || n < 1 || m < 2 {
        return Err(PovmError::Parameter(format!(
            "need d >= 2, N >= 1, M >= 2; got ({d},{n},{m})"
        )));
    }
    let regime = Regime::of(d, m);
    let x = x_optimal(d, m);
    let mut checks = Vec::new();
    let mut reasons = Vec::new();

    let used = n * (m - 1);
    let count = CheckItem::new("dimension_count", 0.0, 0.0)
        .with_detail(format!("N(M-1) = {used}, d^2-1 = {}", d * d - 1));
    if used > d * d - 1 {
        reasons.push(format!("N(M-1) = {used} exceeds d^2-1 = {}", d * d - 1));
        checks.push(CheckItem {
            passed: false,
            residual: f64::INFINITY,
            ..count
        });
    } else {
        checks.push(count);
    }

    let mut rank = None;
    if m == 2 {
        if d.is_multiple_of(2) {
            rank = Some(d / 2);
            checks.push(CheckItem::new("even_dimension", 0.0, 0.0));
        } else {
            reasons.push("d odd".into());
            checks.push(CheckItem::failed(
                "even_dimension",
                format!("d = {d} is odd"),
            ));
        }
    } else if m < d {
        if d.is_multiple_of(m) {
            rank = Some(d / m);
            checks.push(
                CheckItem::new("rank_integral", 0.0, 0.0).with_detail(format!("d/M = {}", d / m)),
            );
        } else {
            reasons.push(format!("d/M = {d}/{m} is not a natural number"));
            checks.push(CheckItem::failed(
                "rank_integral",
                format!("d/M = {d}/{m} is not a natural number"),
            ));
        }
    }
    let excluded = checks.iter().any(|c| !c.passed);
    Ok(ScreenReport {
        d,
        n,
        m,
        regime,
        x,
        gamma: gamma(d, m, x),
        informationally_complete: (m - 1) * n + 1 == d * d,
        rank,
        checks,
        excluded,
        verdict: if excluded { "excluded" } else { "not excluded" }.into(),
        reasons,
    })
}
