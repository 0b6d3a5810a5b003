//! Orthonormal hermitian operator bases and their partitions.
//!
//! A basis holds `d²` operators indexed `1..=d²` (1-based, matching the file
//! formats). Element 1 is `I_d/√d`; elements `2..=d²` are traceless.
//!
//! Generalized Gell-Mann order: after the identity come the symmetric
//! off-diagonal operators for row pairs `(j,k)`, `j<k`, in lexicographic order,
//! then the antisymmetric ones in the same order, then the `d−1` diagonal
//! operators. For `d = 3` the traceless elements at positions `2..=9` are the
//! matrices `g1, g4, g6, g2, g5, g7, g3, g8` of the standard Gell-Mann set (see
//! [`gell_mann_label_position`]).
//!
//! Pauli tensor order: lexicographic in `(i₁,…,i_k)` with `i₁` most
//! significant, so position `p` holds `σ_{i₁}⊗…⊗σ_{i_k}/√(2^k)` where
//! `p − 1 = Σ_j i_j 4^{k−j}`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{PovmError, Result};
use crate::herm::{hs_inner_unchecked, CMatrix, HermitianOperator};

#[derive(Clone, Debug)]
pub struct OperatorBasis {
    dim: usize,
    elements: Vec<HermitianOperator>,
}

impl OperatorBasis {
    /// Structural check only (element count and dimensions); use
    /// [`verify_basis`] for orthonormality.
    pub fn new(elements: Vec<HermitianOperator>) -> Result<Self> {
        let dim = elements
            .first()
            .map(HermitianOperator::dim)
            .ok_or_else(|| PovmError::Structure("empty basis".into()))?;
        if elements.len() != dim * dim {
            return Err(PovmError::Structure(format!(
                "basis for d={dim} needs {} elements, got {}",
                dim * dim,
                elements.len()
            )));
        }
        if let Some(bad) = elements.iter().find(|e| e.dim() != dim) {
            return Err(PovmError::Dimension {
                expected: dim,
                found: bad.dim(),
            });
        }
        Ok(Self { dim, elements })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    /// 1-based access.
    pub fn element(&self, index: usize) -> Result<&HermitianOperator> {
        if index == 0 || index > self.elements.len() {
            return Err(PovmError::Index {
                index,
                max: self.elements.len(),
            });
        }
        Ok(&self.elements[index - 1])
    }

    /// Applies a real orthogonal `(d²−1)×(d²−1)` matrix to the traceless part:
    /// `G'_μ = Σ_ν O_{μν} G_ν` for `μ,ν ≥ 2`.
    pub fn rotated(&self, o: &DMatrix<f64>) -> Result<Self> {
        let n = self.elements.len() - 1;
        if o.nrows() != n || o.ncols() != n {
            return Err(PovmError::Dimension {
                expected: n,
                found: o.nrows(),
            });
        }
        let traceless = &self.elements[1..];
        let mut elements = Vec::with_capacity(n + 1);
        elements.push(self.elements[0].clone());
        for row in 0..n {
            let mut acc = CMatrix::zeros(self.dim, self.dim);
            for (col, g) in traceless.iter().enumerate() {
                let c = o[(row, col)];
                if c != 0.0 {
                    acc += g.matrix() * Complex64::new(c, 0.0);
                }
            }
            elements.push(HermitianOperator::symmetrized(acc));
        }
        Ok(Self {
            dim: self.dim,
            elements,
        })
    }
}

fn unit(d: usize, r: usize, c: usize, z: Complex64) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(r, c)] = z;
    m
}

/// One traceless generalized Gell-Mann operator; row labels are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GellMann {
    Symmetric(usize, usize),
    Antisymmetric(usize, usize),
    Diagonal(usize),
}

fn gell_mann_order(d: usize) -> Vec<GellMann> {
    let pairs: Vec<(usize, usize)> = (1..=d)
        .flat_map(|j| (j + 1..=d).map(move |k| (j, k)))
        .collect();
    let mut out: Vec<GellMann> = pairs
        .iter()
        .map(|&(j, k)| GellMann::Symmetric(j, k))
        .collect();
    out.extend(pairs.iter().map(|&(j, k)| GellMann::Antisymmetric(j, k)));
    out.extend((1..d).map(GellMann::Diagonal));
    out
}

/// 1-based basis position of a Gell-Mann operator in [`gell_mann_basis`].
pub fn gell_mann_position(d: usize, which: GellMann) -> Option<usize> {
    gell_mann_order(d)
        .iter()
        .position(|&g| g == which)
        .map(|p| p + 2)
}

/// Position in `gell_mann_basis(3)` of the standard `d = 3` matrix `g_label`
/// (`label` in `1..=8`).
pub fn gell_mann_label_position(label: usize) -> Option<usize> {
    use GellMann::*;
    let which = match label {
        1 => Symmetric(1, 2),
        2 => Antisymmetric(1, 2),
        3 => Diagonal(1),
        4 => Symmetric(1, 3),
        5 => Antisymmetric(1, 3),
        6 => Symmetric(2, 3),
        7 => Antisymmetric(2, 3),
        8 => Diagonal(2),
        _ => return None,
    };
    gell_mann_position(3, which)
}

fn gell_mann_matrix(d: usize, which: GellMann) -> CMatrix {
    let s = 1.0 / 2f64.sqrt();
    match which {
        GellMann::Symmetric(j, k) => {
            unit(d, j - 1, k - 1, Complex64::new(s, 0.0))
                + unit(d, k - 1, j - 1, Complex64::new(s, 0.0))
        }
        GellMann::Antisymmetric(j, k) => {
            unit(d, j - 1, k - 1, Complex64::new(0.0, -s))
                + unit(d, k - 1, j - 1, Complex64::new(0.0, s))
        }
        GellMann::Diagonal(l) => {
            let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
            let mut m = CMatrix::zeros(d, d);
            for r in 0..l {
                m[(r, r)] = Complex64::new(norm, 0.0);
            }
            m[(l, l)] = Complex64::new(-(l as f64) * norm, 0.0);
            m
        }
    }
}

/// `I_d/√d` followed by the `d²−1` HS-normalized generalized Gell-Mann matrices.
pub fn gell_mann_basis(d: usize) -> Result<OperatorBasis> {
    if d < 2 {
        return Err(PovmError::Domain(format!(
            "Gell-Mann basis needs d >= 2, got {d}"
        )));
    }
    let mut elements = vec![HermitianOperator::scaled_identity(
        d,
        1.0 / (d as f64).sqrt(),
    )?];
    for which in gell_mann_order(d) {
        elements.push(HermitianOperator::new(gell_mann_matrix(d, which))?);
    }
    OperatorBasis::new(elements)
}

/// The single-qubit Pauli matrix `σ_i`, `i ∈ 0..4`.
pub fn pauli(i: u8) -> CMatrix {
    let o = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let im = Complex64::new(0.0, 1.0);
    match i {
        0 => CMatrix::from_row_slice(2, 2, &[one, o, o, one]),
        1 => CMatrix::from_row_slice(2, 2, &[o, one, one, o]),
        2 => CMatrix::from_row_slice(2, 2, &[o, -im, im, o]),
        3 => CMatrix::from_row_slice(2, 2, &[one, o, o, -one]),
        _ => panic!("Pauli index must be 0..=3, got {i}"),
    }
}

/// `σ_{i₁}⊗…⊗σ_{i_k}` (unnormalized).
pub fn pauli_product(indices: &[u8]) -> CMatrix {
    indices
        .iter()
        .fold(CMatrix::identity(1, 1), |acc, &i| acc.kronecker(&pauli(i)))
}

/// Index tuple `(i₁,…,i_k)` of the 0-based lexicographic position `p`.
pub fn pauli_indices(k: usize, p: usize) -> Vec<u8> {
    (0..k)
        .map(|j| ((p >> (2 * (k - 1 - j))) & 3) as u8)
        .collect()
}

/// The `4^k` operators `σ_{i₁}⊗…⊗σ_{i_k}/√(2^k)` in lexicographic order.
pub fn pauli_tensor_basis(k: usize) -> Result<OperatorBasis> {
    if k < 1 {
        return Err(PovmError::Domain("Pauli tensor basis needs k >= 1".into()));
    }
    if k > 6 {
        return Err(PovmError::Domain(format!(
            "k = {k} exceeds the dense limit d <= 64"
        )));
    }
    let d = 1usize << k;
    let norm = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    let elements = (0..d * d)
        .map(|p| HermitianOperator::new(pauli_product(&pauli_indices(k, p)) * norm))
        .collect::<Result<Vec<_>>>()?;
    OperatorBasis::new(elements)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasisReport {
    pub dim: usize,
    /// `max |⟨G_μ|G_ν⟩ − δ_{μν}|` over all pairs.
    pub orthonormality_residual: f64,
    /// `max |Tr{G_μ}|` for `μ ≥ 2`.
    pub trace_residual: f64,
    /// Largest entrywise deviation of element 1 from `I_d/√d`.
    pub identity_residual: f64,
    pub tol: f64,
    pub passed: bool,
}

pub fn verify_basis(b: &OperatorBasis, tol: f64) -> Result<BasisReport> {
    let d = b.dim();
    if b.len() != d * d {
        return Err(PovmError::Structure(format!(
            "expected {} elements, got {}",
            d * d,
            b.len()
        )));
    }
    let el = b.elements();
    let mut orthonormality_residual: f64 = 0.0;
    for mu in 0..el.len() {
        for nu in mu..el.len() {
            let g = hs_inner_unchecked(el[mu].matrix(), el[nu].matrix());
            let target = if mu == nu { 1.0 } else { 0.0 };
            orthonormality_residual = orthonormality_residual.max((g - target).abs());
        }
    }
    let trace_residual = el[1..].iter().map(|g| g.trace().abs()).fold(0.0, f64::max);
    let ident = HermitianOperator::scaled_identity(d, 1.0 / (d as f64).sqrt())?;
    let identity_residual = el[0].max_abs_diff(&ident);
    let passed =
        orthonormality_residual <= tol && trace_residual <= tol && identity_residual <= tol;
    Ok(BasisReport {
        dim: d,
        orthonormality_residual,
        trace_residual,
        identity_residual,
        tol,
        passed,
    })
}

/// `N` disjoint blocks of `M−1` traceless basis positions (1-based, `2..=d²`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    dim: usize,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Number of blocks `N`.
    pub fn n(&self) -> usize {
        self.blocks.len()
    }

    /// Outcomes per block, `M = block size + 1`.
    pub fn m(&self) -> usize {
        self.blocks.first().map_or(1, Vec::len) + 1
    }

    /// The `d = 3`, `(4,3)` partition `{g1,g8},{g3,g4},{g2,g5},{g6,g7}` expressed
    /// in `gell_mann_basis(3)` positions.
    pub fn mum3() -> Self {
        let pos = |l| gell_mann_label_position(l).expect("label in 1..=8");
        Self {
            dim: 3,
            blocks: vec![
                vec![pos(1), pos(8)],
                vec![pos(3), pos(4)],
                vec![pos(2), pos(5)],
                vec![pos(6), pos(7)],
            ],
        }
    }
}

/// Validates an explicit assignment, or packs consecutive positions
/// `2, 3, …` into blocks of size `M−1` when `assignment` is `None`.
pub fn make_partition(
    d: usize,
    n: usize,
    m: usize,
    assignment: Option<Vec<Vec<usize>>>,
) -> Result<Partition> {
    if d < 2 || n < 1 || m < 2 {
        return Err(PovmError::Partition(format!(
            "need d >= 2, N >= 1, M >= 2; got d={d}, N={n}, M={m}"
        )));
    }
    let used = n * (m - 1);
    if used > d * d - 1 {
        return Err(PovmError::Partition(format!(
            "N(M-1) = {used} exceeds d^2-1 = {}",
            d * d - 1
        )));
    }
    let blocks = match assignment {
        None => (0..n)
            .map(|a| (0..m - 1).map(|j| 2 + a * (m - 1) + j).collect())
            .collect(),
        Some(blocks) => {
            if blocks.len() != n {
                return Err(PovmError::Partition(format!(
                    "expected {n} blocks, got {}",
                    blocks.len()
                )));
            }
            let mut seen = vec![false; d * d + 1];
            for (a, block) in blocks.iter().enumerate() {
                if block.len() != m - 1 {
                    return Err(PovmError::Partition(format!(
                        "block {} has {} entries, expected M-1 = {}",
                        a + 1,
                        block.len(),
                        m - 1
                    )));
                }
                for &idx in block {
                    if !(2..=d * d).contains(&idx) {
                        return Err(PovmError::Partition(format!(
                            "index {idx} in block {} is outside 2..={}",
                            a + 1,
                            d * d
                        )));
                    }
                    if std::mem::replace(&mut seen[idx], true) {
                        return Err(PovmError::Partition(format!("index {idx} appears twice")));
                    }
                }
            }
            blocks
        }
    };
    Ok(Partition { dim: d, blocks })
}
