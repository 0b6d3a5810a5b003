//! PSD regions in two-dimensional basis planes, simplex radii and the
//! dimension dependence of the radius ratio.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bases::OperatorBasis;
use crate::conditions::radii;
use crate::error::{PovmError, Result};
use crate::herm::{min_eigenvalue, CMatrix, HermitianOperator, DEFAULT_PSD_TOL};

pub const DEFAULT_GRID: usize = 512;
/// Default scan half-width as a multiple of `r_out`.
pub const DEFAULT_MARGIN: f64 = 1.1;
/// Stopping width of boundary bisection.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct Overlays {
    pub r_in: f64,
    pub r_out: f64,
    /// Polygons in `(u, v)` coordinates, e.g. simplex vertex sets.
    pub polygons: Vec<Vec<[f64; 2]>>,
}

/// Min-eigenvalue map of `I/M + u G_μ + v G_ν` on an `n × n` grid over
/// `[−r, r]²`. Cell `(i, j)` has `u = axis[i]`, `v = axis[j]` and is stored at
/// `i·n + j`.
#[derive(Clone, Debug, Serialize)]
pub struct RegionScan {
    pub plane: (usize, usize),
    pub d: usize,
    pub m: usize,
    pub n: usize,
    pub r: f64,
    pub tol: f64,
    pub axis: Vec<f64>,
    pub min_eig: Vec<f64>,
    pub psd_mask: Vec<bool>,
    pub overlays: Overlays,
}

/// The operator pencil `I/M + u G_μ + v G_ν`.
#[derive(Clone, Debug)]
pub struct Plane {
    center: CMatrix,
    g: [CMatrix; 2],
}

impl Plane {
    pub fn new(basis: &OperatorBasis, mu: usize, nu: usize, m: usize) -> Result<Self> {
        let max = basis.len();
        for idx in [mu, nu] {
            if idx < 2 || idx > max {
                return Err(PovmError::Index { index: idx, max });
            }
        }
        if mu == nu {
            return Err(PovmError::Domain(format!(
                "plane needs two distinct indices, got mu = nu = {mu}"
            )));
        }
        if m < 2 {
            return Err(PovmError::Parameter(format!(
                "M must be at least 2, got {m}"
            )));
        }
        let d = basis.dim();
        Ok(Self {
            center: CMatrix::identity(d, d) * Complex64::new(1.0 / m as f64, 0.0),
            g: [
                basis.element(mu)?.matrix().clone(),
                basis.element(nu)?.matrix().clone(),
            ],
        })
    }

    pub fn operator(&self, u: f64, v: f64) -> HermitianOperator {
        let m = &self.center
            + &self.g[0] * Complex64::new(u, 0.0)
            + &self.g[1] * Complex64::new(v, 0.0);
        HermitianOperator::symmetrized(m)
    }

    pub fn min_eigenvalue(&self, u: f64, v: f64) -> f64 {
        min_eigenvalue(&self.operator(u, v))
    }

    /// Distance from the origin to the PSD boundary along `(cos φ, sin φ)`.
    pub fn boundary_radius(&self, phi: f64) -> f64 {
        let (s, c) = phi.sin_cos();
        let f = |t: f64| self.min_eigenvalue(t * c, t * s);
        let mut hi = 1.0;
        while f(hi) >= 0.0 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        while hi - lo > BOUNDARY_TOL {
            let mid = 0.5 * (lo + hi);
            if f(mid) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

fn plane_radii(d: usize, m: usize) -> Result<(f64, f64)> {
    let r = radii(d, m)?;
    Ok((r.r_in_sq.sqrt(), r.r_out_sq.sqrt()))
}

/// Default half-width `1.1·r_out`.
pub fn default_half_width(d: usize, m: usize) -> Result<f64> {
    Ok(DEFAULT_MARGIN * plane_radii(d, m)?.1)
}

pub fn region_scan(
    basis: &OperatorBasis,
    mu: usize,
    nu: usize,
    m: usize,
    n: usize,
    r: f64,
) -> Result<RegionScan> {
    region_scan_with_tol(basis, mu, nu, m, n, r, DEFAULT_PSD_TOL)
}

pub fn region_scan_with_tol(
    basis: &OperatorBasis,
    mu: usize,
    nu: usize,
    m: usize,
    n: usize,
    r: f64,
    tol: f64,
) -> Result<RegionScan> {
    let plane = Plane::new(basis, mu, nu, m)?;
    if n < 16 {
        return Err(PovmError::Parameter(format!(
            "grid resolution must be at least 16, got {n}"
        )));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(PovmError::Parameter(format!(
            "scan half-width must be positive, got {r}"
        )));
    }
    let axis: Vec<f64> = (0..n)
        .map(|p| -r + 2.0 * r * p as f64 / (n - 1) as f64)
        .collect();
    let min_eig: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let plane = &plane;
            let axis = &axis;
            (0..n).map(move |j| plane.min_eigenvalue(axis[i], axis[j]))
        })
        .collect();
    let psd_mask = min_eig.iter().map(|&e| e >= -tol).collect();
    let (r_in, r_out) = plane_radii(basis.dim(), m)?;
    Ok(RegionScan {
        plane: (mu, nu),
        d: basis.dim(),
        m,
        n,
        r,
        tol,
        axis,
        min_eig,
        psd_mask,
        overlays: Overlays {
            r_in,
            r_out,
            polygons: vec![],
        },
    })
}

impl RegionScan {
    pub fn point(&self, p: usize) -> (f64, f64) {
        (self.axis[p / self.n], self.axis[p % self.n])
    }

    pub fn psd_fraction(&self) -> f64 {
        self.psd_mask.iter().filter(|&&b| b).count() as f64 / self.psd_mask.len() as f64
    }

    /// Grid points within `radius` of the origin that are not PSD.
    pub fn disk_violations(&self, radius: f64) -> usize {
        (0..self.min_eig.len())
            .filter(|&p| {
                let (u, v) = self.point(p);
                u * u + v * v <= radius * radius && !self.psd_mask[p]
            })
            .count()
    }

    /// PSD points `(u, v)` for which `(u/2, v/2)`, itself a grid point when
    /// `n` is odd and both indices are even offsets from the centre, is not
    /// PSD. Always zero for a convex region containing the origin.
    pub fn star_violations(&self) -> usize {
        if self.n.is_multiple_of(2) {
            return 0;
        }
        let c = self.n / 2;
        let mut count = 0;
        for i in 0..self.n {
            for j in 0..self.n {
                let (di, dj) = (i as isize - c as isize, j as isize - c as isize);
                if di % 2 != 0 || dj % 2 != 0 || !self.psd_mask[i * self.n + j] {
                    continue;
                }
                let (hi, hj) = (
                    (c as isize + di / 2) as usize,
                    (c as isize + dj / 2) as usize,
                );
                if !self.psd_mask[hi * self.n + hj] {
                    count += 1;
                }
            }
        }
        count
    }

    pub fn attach_polygon(&mut self, vertices: Vec<[f64; 2]>) {
        self.overlays.polygons.push(vertices);
    }

    /// Header `u,v,min_eig,psd`, one row per grid point in storage order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "u,v,min_eig,psd")?;
        for p in 0..self.min_eig.len() {
            let (u, v) = self.point(p);
            writeln!(
                w,
                "{u},{v},{},{}",
                self.min_eig[p],
                u8::from(self.psd_mask[p])
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SimplexRadii {
    pub d: usize,
    pub m: usize,
    /// Trace `p = d/M` of each element.
    pub p: f64,
    /// Each eigenvalue coordinate of the centroid, `p/d = 1/M`.
    pub centroid_coordinate: f64,
    /// Centroid-to-facet-centroid distance squared, computed coordinate-wise.
    pub r_in_sq_explicit: f64,
    /// `d/(M²(d−1))`.
    pub r_in_sq_closed: f64,
    pub agreement: f64,
    /// `max |C − I/M|` for the centroid operator `C`.
    pub centroid_residual: f64,
}

/// Radii of the eigenvalue simplex of trace-`d/M` operators: vertices
/// `p e_k`, centroid `(p/d)(1,…,1)`, facet centroids with `p/(d−1)` on
/// `d − 1` coordinates.
pub fn simplex_radii(d: usize, m: usize) -> Result<SimplexRadii> {
    if d < 2 || m < 2 {
        return Err(PovmError::Domain(format!(
            "simplex radii need d >= 2 and M >= 2, got d={d}, M={m}"
        )));
    }
    let (df, mf) = (d as f64, m as f64);
    let p = df / mf;
    let centroid = vec![p / df; d];
    let facet: Vec<f64> = (0..d)
        .map(|k| if k + 1 < d { p / (df - 1.0) } else { 0.0 })
        .collect();
    let explicit: f64 = centroid
        .iter()
        .zip(&facet)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let closed = df / (mf * mf * (df - 1.0));
    let c_op = HermitianOperator::from_real_diagonal(&centroid)?;
    let target = HermitianOperator::scaled_identity(d, 1.0 / mf)?;
    Ok(SimplexRadii {
        d,
        m,
        p,
        centroid_coordinate: p / df,
        r_in_sq_explicit: explicit,
        r_in_sq_closed: closed,
        agreement: (explicit - closed).abs(),
        centroid_residual: c_op.max_abs_diff(&target),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
pub enum MRule {
    /// `M = d`, representing every `M ≥ d`.
    #[serde(rename = "M_ge_d")]
    #[value(name = "m-ge-d")]
    MGeD,
    #[serde(rename = "M_eq_2")]
    #[value(name = "m-eq-2")]
    MEq2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub d: usize,
    #[serde(rename = "R")]
    pub r: f64,
}

/// `R(d) = r_in²/r_out²` for `2 ≤ d ≤ d_max`.
pub fn ratio_curve(d_max: usize, rule: MRule) -> Result<Vec<CurvePoint>> {
    if d_max < 2 {
        return Err(PovmError::Domain(format!(
            "d_max must be at least 2, got {d_max}"
        )));
    }
    (2..=d_max)
        .map(|d| {
            let m = match rule {
                MRule::MGeD => d,
                MRule::MEq2 => 2,
            };
            Ok(CurvePoint {
                d,
                r: radii(d, m)?.ratio,
            })
        })
        .collect()
}

/// Header `d,R`.
pub fn write_curve_csv<W: Write>(curve: &[CurvePoint], mut w: W) -> Result<()> {
    writeln!(w, "d,R")?;
    for p in curve {
        writeln!(w, "{},{}", p.d, p.r)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{gell_mann_basis, gell_mann_label_position, pauli_tensor_basis};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn g(label: usize) -> usize {
        gell_mann_label_position(label).unwrap()
    }

    #[test]
    fn g1_g8_boundary_radii() {
        let b = gell_mann_basis(3).unwrap();
        let plane = Plane::new(&b, g(1), g(8), 3).unwrap();
        let minus = plane.boundary_radius(-std::f64::consts::FRAC_PI_2);
        let plus = plane.boundary_radius(std::f64::consts::FRAC_PI_2);
        // I/3 + v g8 has eigenvalues 1/3 + v/√6 (twice) and 1/3 − 2v/√6.
        let oracle_minus = (1.0 / 3.0) * 6f64.sqrt();
        let oracle_plus = (1.0 / 3.0) * 6f64.sqrt() / 2.0;
        assert_abs_diff_eq!(minus, oracle_minus, epsilon = 1e-10);
        assert_abs_diff_eq!(plus, oracle_plus, epsilon = 1e-10);
        assert_abs_diff_eq!(minus, (2.0f64 / 3.0).sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(plus, 1.0 / 6f64.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn scan_errors() {
        let b = gell_mann_basis(3).unwrap();
        assert!(matches!(
            region_scan(&b, 1, 3, 3, 32, 1.0),
            Err(PovmError::Index { index: 1, .. })
        ));
        assert!(matches!(
            region_scan(&b, 2, 10, 3, 32, 1.0),
            Err(PovmError::Index { index: 10, .. })
        ));
        assert!(region_scan(&b, 2, 2, 3, 32, 1.0).is_err());
        assert!(region_scan(&b, 2, 3, 3, 15, 1.0).is_err());
    }

    #[test]
    fn scan_origin_disk_and_star_shape() {
        let b = gell_mann_basis(3).unwrap();
        let r = default_half_width(3, 3).unwrap();
        for (mu, nu) in [(g(1), g(8)), (g(3), g(4)), (g(2), g(5)), (g(6), g(7))] {
            let s = region_scan(&b, mu, nu, 3, 65, r).unwrap();
            assert!(s.psd_mask[32 * 65 + 32]);
            assert_eq!(s.point(32 * 65 + 32), (0.0, 0.0));
            assert_eq!(s.disk_violations(s.overlays.r_in), 0);
            assert_eq!(s.star_violations(), 0);
            assert!(s.psd_fraction() > 0.0 && s.psd_fraction() < 1.0);
        }
    }

    #[test]
    fn csv_layout() {
        let b = gell_mann_basis(2).unwrap();
        let s = region_scan(&b, 2, 3, 2, 16, 1.0).unwrap();
        let mut out = Vec::new();
        s.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "u,v,min_eig,psd");
        assert_eq!(lines.len(), 1 + 256);
        assert!(lines[1].starts_with("-1,-1,"));
    }

    #[test]
    fn simplex_radii_examples() {
        let s = simplex_radii(3, 3).unwrap();
        assert_abs_diff_eq!(s.r_in_sq_explicit, 1.0 / 6.0, epsilon = 1e-15);
        let s = simplex_radii(2, 4).unwrap();
        assert_abs_diff_eq!(s.r_in_sq_explicit, 1.0 / 8.0, epsilon = 1e-15);
        for d in 2..=40 {
            for m in 2..=45 {
                let s = simplex_radii(d, m).unwrap();
                assert!(s.agreement < 1e-14, "d={d} m={m}: {}", s.agreement);
                assert!(s.centroid_residual < 1e-15);
            }
        }
    }

    #[test]
    fn ratio_curve_examples() {
        for rule in [MRule::MGeD, MRule::MEq2] {
            let c = ratio_curve(32, rule).unwrap();
            assert_eq!(c[0], CurvePoint { d: 2, r: 1.0 });
            assert!(c.windows(2).all(|w| w[1].r < w[0].r));
        }
        assert_abs_diff_eq!(
            ratio_curve(4, MRule::MGeD).unwrap()[2].r,
            1.0 / 9.0,
            epsilon = 1e-16
        );
        assert_abs_diff_eq!(
            ratio_curve(4, MRule::MEq2).unwrap()[2].r,
            1.0 / 3.0,
            epsilon = 1e-16
        );
        let mut out = Vec::new();
        write_curve_csv(&ratio_curve(3, MRule::MEq2).unwrap(), &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "d,R\n2,1\n3,0.5\n");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ray_from_origin_stays_psd_up_to_boundary(mu in 2usize..=16, dnu in 1usize..15, phi in 0.0..std::f64::consts::TAU, t in 0.0f64..1.0, m in 2usize..6) {
            let b = pauli_tensor_basis(2).unwrap();
            let nu = 2 + (mu - 2 + dnu) % 15;
            let plane = Plane::new(&b, mu, nu, m).unwrap();
            let rb = plane.boundary_radius(phi);
            let (s, c) = phi.sin_cos();
            prop_assert!(plane.min_eigenvalue(t * rb * c, t * rb * s) >= -1e-12);
        }

        #[test]
        fn in_disk_is_psd(phi in 0.0..std::f64::consts::TAU, t in 0.0f64..=1.0, m in 2usize..8, d in 2usize..6, pair in 0usize..1000) {
            let b = gell_mann_basis(d).unwrap();
            let k = d * d - 1;
            let mu = 2 + pair % k;
            let nu = 2 + (pair / k + 1 + pair % k) % k;
            prop_assume!(mu != nu);
            let plane = Plane::new(&b, mu, nu, m).unwrap();
            let r_in = radii(d, m).unwrap().r_in_sq.sqrt();
            let (s, c) = phi.sin_cos();
            prop_assert!(plane.min_eigenvalue(t * r_in * c, t * r_in * s) >= -1e-12);
        }
    }
}
