//! Constructions of (N,M)-POVMs.
//!
//! The generic route expands every element in an orthonormal hermitian basis,
//!
//! ```text
//! Π_i = I_d/M + √Γ Σ_{μ≥2} X_{i,μ} G_μ,
//! ```
//!
//! with a real `NM × d²` coefficient matrix `X`. [`simplex_x_matrix`] fills `X`
//! block by block: the `M` rows of POVM `α` are the vertices of a regular
//! `(M−1)`-simplex placed on the basis positions of partition block `α`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bases::{gell_mann_basis, pauli_indices, pauli_product, OperatorBasis, Partition};
use crate::error::{PovmError, Result};
use crate::herm::{min_eigenvalue, CMatrix, HermitianOperator, DEFAULT_PSD_TOL};
use crate::model::{
    povm_params, validate_povm, NmPovm, PovmParams, PovmReport, DEFAULT_VALIDATION_TOL,
};

/// Real `NM × d²` expansion coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct XMatrix {
    n: usize,
    m: usize,
    data: DMatrix<f64>,
    /// 1-based basis positions per block.
    blocks: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct XMatrixReport {
    /// `max |Σ_i X_{iμ}X_{iν} − δ_{μν}|` over column 1 and the partition columns.
    pub column_orthonormality: f64,
    /// `max |X_{i,1} − 1/√(NM)|`.
    pub first_column: f64,
    /// `max_{α,μ≥2} |Σ_a X_{i(α,a),μ}|`.
    pub block_row_sums: f64,
    /// `max_i |Σ_{μ≥2} X_{iμ}² − (M−1)/M|`.
    pub row_norms: f64,
}

impl XMatrixReport {
    pub fn max_residual(&self) -> f64 {
        self.column_orthonormality
            .max(self.first_column)
            .max(self.block_row_sums)
            .max(self.row_norms)
    }
}

impl XMatrix {
    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Rotates the coordinates of block `alpha` (1-based) by an orthogonal
    /// `(M−1)×(M−1)` matrix: each row restricted to the block becomes `O·w`.
    pub fn rotate_block(&mut self, alpha: usize, o: &DMatrix<f64>) -> Result<()> {
        let k = self.m - 1;
        if o.nrows() != k || o.ncols() != k {
            return Err(PovmError::Dimension {
                expected: k,
                found: o.nrows(),
            });
        }
        if alpha == 0 || alpha > self.n {
            return Err(PovmError::Index {
                index: alpha,
                max: self.n,
            });
        }
        let cols: Vec<usize> = self.blocks[alpha - 1].iter().map(|p| p - 1).collect();
        for a in 0..self.m {
            let row = (alpha - 1) * self.m + a;
            let w = DVector::from_iterator(k, cols.iter().map(|&c| self.data[(row, c)]));
            let rotated = o * w;
            for (j, &c) in cols.iter().enumerate() {
                self.data[(row, c)] = rotated[j];
            }
        }
        Ok(())
    }

    pub fn check(&self) -> XMatrixReport {
        let (n, m) = (self.n, self.m);
        let rows = n * m;
        let mut cols = vec![0usize];
        cols.extend(self.blocks.iter().flatten().map(|p| p - 1));
        let mut column_orthonormality: f64 = 0.0;
        for (ci, &c1) in cols.iter().enumerate() {
            for &c2 in &cols[ci..] {
                let dot = self.data.column(c1).dot(&self.data.column(c2));
                let target = if c1 == c2 { 1.0 } else { 0.0 };
                column_orthonormality = column_orthonormality.max((dot - target).abs());
            }
        }
        let first = 1.0 / (rows as f64).sqrt();
        let first_column = (0..rows)
            .map(|i| (self.data[(i, 0)] - first).abs())
            .fold(0.0, f64::max);
        let mut block_row_sums: f64 = 0.0;
        for alpha in 0..n {
            for c in 1..self.data.ncols() {
                let s: f64 = (0..m).map(|a| self.data[(alpha * m + a, c)]).sum();
                block_row_sums = block_row_sums.max(s.abs());
            }
        }
        let target = (m as f64 - 1.0) / m as f64;
        let row_norms = (0..rows)
            .map(|i| {
                let s: f64 = (1..self.data.ncols())
                    .map(|c| self.data[(i, c)].powi(2))
                    .sum();
                (s - target).abs()
            })
            .fold(0.0, f64::max);
        XMatrixReport {
            column_orthonormality,
            first_column,
            block_row_sums,
            row_norms,
        }
    }
}

/// Vertices of a regular `(M−1)`-simplex centred at the origin, one per row,
/// with `v_a·v_b = δ_{ab} − 1/M` (the Helmert construction).
pub fn regular_simplex(m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, m - 1, |row, col| {
        let k = col + 1;
        let norm = ((k * (k + 1)) as f64).sqrt();
        if row < k {
            1.0 / norm
        } else if row == k {
            -(k as f64) / norm
        } else {
            0.0
        }
    })
}

pub fn simplex_x_matrix(d: usize, n: usize, m: usize, partition: &Partition) -> Result<XMatrix> {
    if partition.dim() != d || partition.n() != n || partition.m() != m {
        return Err(PovmError::Partition(format!(
            "partition has (d,N,M) = ({},{},{}), expected ({d},{n},{m})",
            partition.dim(),
            partition.n(),
            partition.m()
        )));
    }
    let rows = n * m;
    let mut data = DMatrix::<f64>::zeros(rows, d * d);
    let first = 1.0 / (rows as f64).sqrt();
    data.column_mut(0).fill(first);
    let simplex = regular_simplex(m);
    for (alpha, block) in partition.blocks().iter().enumerate() {
        for a in 0..m {
            for (j, &pos) in block.iter().enumerate() {
                data[(alpha * m + a, pos - 1)] = simplex[(a, j)];
            }
        }
    }
    Ok(XMatrix {
        n,
        m,
        data,
        blocks: partition.blocks().to_vec(),
    })
}

/// Result of a basis expansion together with its validation report.
#[derive(Clone, Debug)]
pub struct Expansion {
    pub povm: NmPovm,
    pub report: PovmReport,
}

pub fn from_expansion(
    basis: &OperatorBasis,
    xmat: &XMatrix,
    params: &PovmParams,
    require_psd: bool,
) -> Result<Expansion> {
    let d = params.d;
    if basis.dim() != d {
        return Err(PovmError::Dimension {
            expected: d,
            found: basis.dim(),
        });
    }
    let rows = params.n * params.m;
    if xmat.n != params.n
        || xmat.m != params.m
        || xmat.data.nrows() != rows
        || xmat.data.ncols() != d * d
    {
        return Err(PovmError::Structure(format!(
            "X is {}x{} for (N,M) = ({},{}), expected {rows}x{}",
            xmat.data.nrows(),
            xmat.data.ncols(),
            xmat.n,
            xmat.m,
            d * d
        )));
    }
    let scale = params.gamma.max(0.0).sqrt();
    let center = CMatrix::identity(d, d) * Complex64::new(1.0 / params.m as f64, 0.0);
    let traceless = &basis.elements()[1..];
    let elements: Vec<HermitianOperator> = (0..rows)
        .map(|i| {
            let mut acc = center.clone();
            for (mu, g) in traceless.iter().enumerate() {
                let c = xmat.data[(i, mu + 1)];
                if c != 0.0 {
                    acc += g.matrix() * Complex64::new(scale * c, 0.0);
                }
            }
            HermitianOperator::symmetrized(acc)
        })
        .collect();
    let povm = NmPovm::new(*params, elements)?;
    let report = validate_povm(&povm, DEFAULT_VALIDATION_TOL)?;
    if require_psd {
        if let Some(worst) = report
            .non_psd
            .iter()
            .min_by(|a, b| a.min_eigenvalue.total_cmp(&b.min_eigenvalue))
        {
            return Err(PovmError::NotPsd {
                index: worst.index,
                min_eigenvalue: worst.min_eigenvalue,
            });
        }
    }
    Ok(Expansion { povm, report })
}

/// Upper end `d/M² + d/(M²(d−1))` of the range where every expansion is PSD.
pub fn sufficient_x_max(d: usize, m: usize) -> f64 {
    let (d, m) = (d as f64, m as f64);
    d / (m * m) + d / (m * m * (d - 1.0))
}

/// Simplex expansion in `basis` with the consecutive default partition.
pub fn sufficient_construct(
    d: usize,
    n: usize,
    m: usize,
    x: f64,
    basis: &OperatorBasis,
) -> Result<NmPovm> {
    let partition = crate::bases::make_partition(d, n, m, None)?;
    sufficient_construct_with(x, basis, &partition)
}

pub fn sufficient_construct_with(
    x: f64,
    basis: &OperatorBasis,
    partition: &Partition,
) -> Result<NmPovm> {
    let (d, n, m) = (partition.dim(), partition.n(), partition.m());
    let bound = sufficient_x_max(d, m);
    if x > bound * (1.0 + 1e-12) {
        return Err(PovmError::Parameter(format!(
            "x = {x} exceeds the sufficient bound d/M^2 + d/(M^2(d-1)) = {bound}"
        )));
    }
    let params = povm_params(d, n, m, x)?;
    let xmat = simplex_x_matrix(d, n, m, partition)?;
    Ok(from_expansion(basis, &xmat, &params, true)?.povm)
}

/// Optimal `(N,2)`-POVM in `d = 2^k` with elements `(I ± P_α)/2`, `P_α` the
/// `α`-th non-identity Pauli string in lexicographic order.
pub fn optimal_n2_pauli(k: usize, n: usize) -> Result<NmPovm> {
    if !(1..=6).contains(&k) {
        return Err(PovmError::Parameter(format!("k must be in 1..=6, got {k}")));
    }
    let d = 1usize << k;
    if n < 1 || n > d * d - 1 {
        return Err(PovmError::Parameter(format!(
            "N must be in 1..={}, got {n}",
            d * d - 1
        )));
    }
    let params = povm_params(d, n, 2, d as f64 / 2.0)?;
    let half = Complex64::new(0.5, 0.0);
    let id = CMatrix::identity(d, d);
    let mut elements = Vec::with_capacity(2 * n);
    for alpha in 1..=n {
        let p = pauli_product(&pauli_indices(k, alpha));
        elements.push(HermitianOperator::new((&id + &p) * half)?);
        elements.push(HermitianOperator::new((&id - &p) * half)?);
    }
    NmPovm::new(params, elements)
}

/// Named reference POVMs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Fixture {
    /// Tetrahedral (1,4)-POVM in `d = 2`, `x = 1/4`.
    SicQubit,
    /// The three Pauli eigenbases as a (3,2)-POVM in `d = 2`, `x = 1`.
    MubD2,
    /// Four mutually unbiased bases in `d = 3` as a (4,3)-POVM, `x = 1`.
    MubD3,
}

impl Fixture {
    pub const ALL: [Fixture; 3] = [Fixture::SicQubit, Fixture::MubD2, Fixture::MubD3];

    pub fn name(self) -> &'static str {
        match self {
            Fixture::SicQubit => "sic_qubit",
            Fixture::MubD2 => "mub_d2",
            Fixture::MubD3 => "mub_d3",
        }
    }
}

pub fn fixture_povm(which: Fixture) -> NmPovm {
    match which {
        Fixture::SicQubit => sic_qubit(),
        Fixture::MubD2 => optimal_n2_pauli(1, 3).expect("fixed parameters"),
        Fixture::MubD3 => mub_d3(),
    }
}

fn sic_qubit() -> NmPovm {
    let s = 1.0 / 3f64.sqrt();
    let dirs = [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]];
    let quarter = Complex64::new(0.25, 0.0);
    let elements = dirs
        .iter()
        .map(|n| {
            let mut m = crate::bases::pauli(0);
            for (axis, &c) in n.iter().enumerate() {
                m += crate::bases::pauli(axis as u8 + 1) * Complex64::new(c, 0.0);
            }
            HermitianOperator::new(m * quarter).expect("hermitian by construction")
        })
        .collect();
    NmPovm::new(povm_params(2, 1, 4, 0.25).expect("valid"), elements).expect("4 elements")
}

fn mub_d3() -> NmPovm {
    let d = 3usize;
    let omega = |e: usize| Complex64::from_polar(1.0, 2.0 * PI * (e % d) as f64 / d as f64);
    let mut elements = Vec::with_capacity(12);
    for j in 0..d {
        let mut v = DVector::<Complex64>::zeros(d);
        v[j] = Complex64::new(1.0, 0.0);
        elements.push(HermitianOperator::projector(&v).expect("unit vector"));
    }
    for b in 0..d {
        for j in 0..d {
            let v = DVector::from_fn(d, |k, _| omega(b * k * k + j * k) / (d as f64).sqrt());
            elements.push(HermitianOperator::projector(&v).expect("unit vector"));
        }
    }
    NmPovm::new(povm_params(3, 4, 3, 1.0).expect("valid"), elements).expect("12 elements")
}

/// Shape of the set of feasible rotation angles for one block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FeasibleSet {
    /// Every angle keeps all three elements PSD.
    AllAngles,
    /// The feasible set has interior: one or more arcs.
    Interval,
    /// The feasible set has empty interior: isolated angles.
    Isolated,
}

/// Result of scanning one block's rotation angle.
#[derive(Clone, Debug, Serialize)]
pub struct BlockScan {
    pub feasible_set: FeasibleSet,
    /// Selected rotation angle (the smallest feasible one in `[0, 2π/3)`).
    pub angle: f64,
    /// Largest min-eigenvalue over all angles.
    pub max_min_eigenvalue: f64,
    /// Fraction of the scan grid that is feasible.
    pub feasible_fraction: f64,
    /// Feasible arcs `(start, end)` for [`FeasibleSet::Interval`].
    pub intervals: Vec<(f64, f64)>,
    /// Feasible angles for [`FeasibleSet::Isolated`].
    pub points: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockRotation {
    /// 1-based block index `α`.
    pub block: usize,
    /// Basis positions spanning the block's plane.
    pub basis_positions: Vec<usize>,
    #[serde(flatten)]
    pub scan: BlockScan,
}

#[derive(Clone, Debug, Serialize)]
pub struct Mum3Report {
    pub x: f64,
    pub gamma: f64,
    pub scan_step: f64,
    pub blocks: Vec<BlockRotation>,
    pub validation: PovmReport,
}

/// Angle resolution of the rotation scan.
pub const MUM3_SCAN_STEP: f64 = 1e-4;
/// Min-eigenvalue above which a block's feasible set is treated as having interior.
pub const MUM3_INTERIOR_TOL: f64 = 1e-8;
const MUM3_COARSE_SAMPLES: usize = 720;
const ROTATION_PERIOD: f64 = 2.0 * PI / 3.0;

/// Evaluates `min_a λ_min(I/3 + √Γ (R(θ)v_a)·(G_μ, G_ν))` for one `d = 3`,
/// `M = 3` block spanned by two basis elements.
#[derive(Clone, Debug)]
pub struct TriangleBlock {
    g: [CMatrix; 2],
    simplex: DMatrix<f64>,
}

impl TriangleBlock {
    pub fn new(basis: &OperatorBasis, positions: &[usize]) -> Result<Self> {
        if basis.dim() != 3 || positions.len() != 2 {
            return Err(PovmError::Structure(
                "triangle blocks need d = 3 and two basis positions".into(),
            ));
        }
        Ok(Self {
            g: [
                basis.element(positions[0])?.matrix().clone(),
                basis.element(positions[1])?.matrix().clone(),
            ],
            simplex: regular_simplex(3),
        })
    }

    pub fn vertex(&self, a: usize, theta: f64) -> (f64, f64) {
        let (s, c) = theta.sin_cos();
        let (u, v) = (self.simplex[(a, 0)], self.simplex[(a, 1)]);
        (c * u - s * v, s * u + c * v)
    }

    pub fn element(&self, gamma: f64, a: usize, theta: f64) -> HermitianOperator {
        let (u, v) = self.vertex(a, theta);
        let r = gamma.max(0.0).sqrt();
        let m = CMatrix::identity(3, 3) * Complex64::new(1.0 / 3.0, 0.0)
            + &self.g[0] * Complex64::new(r * u, 0.0)
            + &self.g[1] * Complex64::new(r * v, 0.0);
        HermitianOperator::symmetrized(m)
    }

    pub fn min_eigenvalue(&self, gamma: f64, theta: f64) -> f64 {
        (0..3)
            .map(|a| min_eigenvalue(&self.element(gamma, a, theta)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Golden-section maximisation of the min-eigenvalue on `[lo, hi]`.
    fn maximise(&self, gamma: f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let mut f1 = self.min_eigenvalue(gamma, x1);
        let mut f2 = self.min_eigenvalue(gamma, x2);
        while hi - lo > 1e-12 {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = self.min_eigenvalue(gamma, x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = self.min_eigenvalue(gamma, x1);
            }
        }
        let t = 0.5 * (lo + hi);
        (t, self.min_eigenvalue(gamma, t))
    }

    /// Largest min-eigenvalue over all rotation angles.
    pub fn best_angle(&self, gamma: f64) -> (f64, f64) {
        let h = ROTATION_PERIOD / MUM3_COARSE_SAMPLES as f64;
        let samples: Vec<f64> = (0..MUM3_COARSE_SAMPLES)
            .map(|j| self.min_eigenvalue(gamma, j as f64 * h))
            .collect();
        let mut order: Vec<usize> = (0..samples.len()).collect();
        order.sort_by(|&a, &b| samples[b].total_cmp(&samples[a]));
        order
            .iter()
            .take(3)
            .map(|&j| self.maximise(gamma, (j as f64 - 1.0) * h, (j as f64 + 1.0) * h))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty")
    }

    /// Bisects between an infeasible and a feasible angle, returning the
    /// feasible end.
    fn boundary(&self, gamma: f64, mut infeasible: f64, mut feasible: f64) -> f64 {
        while (feasible - infeasible).abs() > 1e-12 {
            let mid = 0.5 * (feasible + infeasible);
            if self.min_eigenvalue(gamma, mid) >= -DEFAULT_PSD_TOL {
                feasible = mid;
            } else {
                infeasible = mid;
            }
        }
        feasible
    }

    /// Scans `[0, 2π/3)` at `step` and classifies the feasible angle set.
    pub fn classify(&self, gamma: f64, step: f64) -> Result<BlockScan> {
        let count = (ROTATION_PERIOD / step).ceil() as usize;
        let f: Vec<f64> = (0..count)
            .into_par_iter()
            .map(|j| self.min_eigenvalue(gamma, j as f64 * step))
            .collect();
        let feasible: Vec<bool> = f.iter().map(|&v| v >= -DEFAULT_PSD_TOL).collect();
        let fraction = feasible.iter().filter(|&&b| b).count() as f64 / count as f64;
        let (best_t, best_f) = {
            let (j, _) = f
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .expect("non-empty scan");
            self.maximise(gamma, (j as f64 - 1.0) * step, (j as f64 + 1.0) * step)
        };

        if feasible.iter().all(|&b| b) {
            return Ok(BlockScan {
                feasible_set: FeasibleSet::AllAngles,
                angle: 0.0,
                max_min_eigenvalue: best_f,
                feasible_fraction: fraction,
                intervals: vec![(0.0, ROTATION_PERIOD)],
                points: vec![],
            });
        }

        if best_f > MUM3_INTERIOR_TOL {
            let mut intervals = Vec::new();
            let mut j = 0;
            while j < count {
                if !feasible[j] {
                    j += 1;
                    continue;
                }
                let start = j;
                while j < count && feasible[j] {
                    j += 1;
                }
                let end = j - 1;
                let lo = if start == 0 {
                    0.0
                } else {
                    self.boundary(gamma, (start - 1) as f64 * step, start as f64 * step)
                };
                let hi = if end == count - 1 {
                    ROTATION_PERIOD
                } else {
                    self.boundary(gamma, (end + 1) as f64 * step, end as f64 * step)
                };
                intervals.push((lo, hi));
            }
            return Ok(BlockScan {
                feasible_set: FeasibleSet::Interval,
                angle: intervals[0].0,
                max_min_eigenvalue: best_f,
                feasible_fraction: fraction,
                intervals,
                points: vec![],
            });
        }

        // Empty interior: candidate points are local maxima of the scan.
        let mut points: Vec<f64> = Vec::new();
        for j in 0..count {
            let prev = f[(j + count - 1) % count];
            let next = f[(j + 1) % count];
            if f[j] >= prev && f[j] >= next && f[j] >= best_f - 1e-6 {
                let (t, v) = self.maximise(gamma, (j as f64 - 1.0) * step, (j as f64 + 1.0) * step);
                if v >= -DEFAULT_PSD_TOL {
                    let t = t.rem_euclid(ROTATION_PERIOD);
                    if !points.iter().any(|&p: &f64| (p - t).abs() < 1e-6) {
                        points.push(t);
                    }
                }
            }
        }
        if points.is_empty() && best_f >= -DEFAULT_PSD_TOL {
            points.push(best_t.rem_euclid(ROTATION_PERIOD));
        }
        if points.is_empty() {
            return Err(PovmError::Internal(format!(
                "no feasible rotation angle (best min eigenvalue {best_f:e})"
            )));
        }
        points.sort_by(f64::total_cmp);
        Ok(BlockScan {
            feasible_set: FeasibleSet::Isolated,
            angle: points[0],
            max_min_eigenvalue: best_f,
            feasible_fraction: fraction,
            intervals: vec![],
            points,
        })
    }
}

/// Largest `x` for which every block of `partition` admits a feasible
/// rotation, found by bisection on `x ∈ (d/M², x_opt]`.
pub fn mum3_max_x(basis: &OperatorBasis, partition: &Partition) -> Result<f64> {
    let blocks = partition
        .blocks()
        .iter()
        .map(|b| TriangleBlock::new(basis, b))
        .collect::<Result<Vec<_>>>()?;
    let feasible = |x: f64| {
        let g = crate::model::gamma(3, 3, x);
        blocks
            .par_iter()
            .all(|b| b.best_angle(g).1 >= -DEFAULT_PSD_TOL)
    };
    let (mut lo, mut hi) = (crate::model::x_lower(3, 3), crate::model::x_optimal(3, 3));
    if feasible(hi) {
        return Ok(hi);
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// The maximal `(4,3)`-POVM in `d = 3` for the Gell-Mann basis and the
/// [`Partition::mum3`] partition: `x` is maximised by bisection, then each
/// block's rotation angle is chosen by a scan of `[0, 2π/3)`.
pub fn mum3_optimal_partition() -> Result<(NmPovm, Mum3Report)> {
    let basis = gell_mann_basis(3)?;
    let partition = Partition::mum3();
    let x = mum3_max_x(&basis, &partition)?;
    let params = povm_params(3, 4, 3, x)?;
    let mut xmat = simplex_x_matrix(3, 4, 3, &partition)?;
    let mut blocks = Vec::new();
    for (alpha, positions) in partition.blocks().iter().enumerate() {
        let tri = TriangleBlock::new(&basis, positions)?;
        let scan = tri.classify(params.gamma, MUM3_SCAN_STEP)?;
        let (s, c) = scan.angle.sin_cos();
        xmat.rotate_block(alpha + 1, &DMatrix::from_row_slice(2, 2, &[c, -s, s, c]))?;
        blocks.push(BlockRotation {
            block: alpha + 1,
            basis_positions: positions.clone(),
            scan,
        });
    }
    let expansion = from_expansion(&basis, &xmat, &params, true)?;
    let report = Mum3Report {
        x,
        gamma: params.gamma,
        scan_step: MUM3_SCAN_STEP,
        blocks,
        validation: expansion.report,
    };
    Ok((expansion.povm, report))
}
