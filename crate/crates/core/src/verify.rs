//! Independent checks on a candidate interpolant: residue evaluations by
//! contour quadrature, interpolation residuals, contractivity sampling and
//! sampled kernels.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::datasets::{BtoaData, LeftNode, RightNode, SimpleData};
use crate::error::{Error, Result};
use crate::numkit::{self, c, identity, CMatrix, Inertia};
use crate::pick;
use crate::realization::{MatrixFunction, ThetaRealization};

/// Eigenvalues closer than this (relative) are put on one circle.
pub const CLUSTER_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct ContourConfig {
    pub nodes_per_circle: usize,
    /// Radius overrides keyed by circle centre.
    pub explicit_radii: Vec<(Complex64, f64)>,
}

impl Default for ContourConfig {
    fn default() -> Self {
        ContourConfig {
            nodes_per_circle: 256,
            explicit_radii: Vec::new(),
        }
    }
}

impl ContourConfig {
    pub fn with_nodes(n: usize) -> Self {
        ContourConfig {
            nodes_per_circle: n,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Complex64,
    pub radius: f64,
}

/// Group nearly equal eigenvalues; each group is represented by its mean.
pub fn cluster_centers(eigs: &[Complex64]) -> Vec<Complex64> {
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    for &e in eigs {
        match groups
            .iter_mut()
            .find(|g| g.iter().any(|x| (x - e).norm() <= CLUSTER_TOL * (1.0 + e.norm())))
        {
            Some(g) => g.push(e),
            None => groups.push(vec![e]),
        }
    }
    groups
        .iter()
        .map(|g| g.iter().sum::<Complex64>() / g.len() as f64)
        .collect()
}

/// One circle per cluster of `eigs`, sized so that the other clusters and
/// the poles of the integrand stay at least two radii away.
pub fn circles(eigs: &[Complex64], poles: &[Complex64], cfg: &ContourConfig) -> Result<Vec<Circle>> {
    let centers = cluster_centers(eigs);
    let mut out = Vec::with_capacity(centers.len());
    for (k, &center) in centers.iter().enumerate() {
        if !(center.re > 0.0) {
            return Err(Error::Contour(format!("eigenvalue {center} is not in the right half plane")));
        }
        let gap_nodes = centers
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, o)| (o - center).norm())
            .fold(f64::INFINITY, f64::min);
        let gap_poles = poles.iter().map(|p| (p - center).norm()).fold(f64::INFINITY, f64::min);
        if gap_poles <= 1e-10 * (1.0 + center.norm()) {
            return Err(Error::Contour(format!("the function has a pole at the node {center}")));
        }
        let gap = gap_nodes.min(gap_poles);
        let radius = match cfg
            .explicit_radii
            .iter()
            .find(|(c0, _)| (c0 - center).norm() <= CLUSTER_TOL * (1.0 + center.norm()))
        {
            Some(&(_, r)) => {
                if !(r > 0.0) || r >= center.re || 2.0 * r > gap {
                    return Err(Error::Contour(format!(
                        "radius {r} around {center} leaves the half plane or comes within two radii of a singularity"
                    )));
                }
                r
            }
            None => (0.5 * gap).min(0.25 * center.re),
        };
        out.push(Circle { center, radius });
    }
    Ok(out)
}

/// `(1/2πi)∮ f(λ) dλ` summed over the circles by the trapezoid rule.
fn contour_sum<F>(circles: &[Circle], n: usize, rows: usize, cols: usize, mut f: F) -> Result<CMatrix>
where
    F: FnMut(Complex64) -> Result<CMatrix>,
{
    if n == 0 {
        return Err(Error::Contour("nodes_per_circle must be positive".into()));
    }
    let mut acc = CMatrix::zeros(rows, cols);
    for circle in circles {
        for k in 0..n {
            let e = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
            acc += f(circle.center + e * circle.radius)? * (e * (circle.radius / n as f64));
        }
    }
    Ok(acc)
}

/// `(XS)^L(Z)`, an n_Z × m matrix.
pub fn ltoa_eval<S: MatrixFunction>(s: &S, z: &CMatrix, x: &CMatrix, cfg: &ContourConfig) -> Result<CMatrix> {
    let nz = numkit::ensure_square(z)?;
    let m = s.shape().1;
    if nz == 0 {
        return Ok(CMatrix::zeros(0, m));
    }
    let circ = circles(&numkit::spectrum(z)?, &s.poles(), cfg)?;
    contour_sum(&circ, cfg.nodes_per_circle, nz, m, |lam| {
        numkit::solve(&(identity(nz) * lam - z), &(x * s.eval(lam)?))
    })
}

/// `(SU)^R(W)`, a p × n_W matrix.
pub fn rtoa_eval<S: MatrixFunction>(s: &S, u: &CMatrix, w: &CMatrix, cfg: &ContourConfig) -> Result<CMatrix> {
    let nw = numkit::ensure_square(w)?;
    let p = s.shape().0;
    if nw == 0 {
        return Ok(CMatrix::zeros(p, 0));
    }
    let circ = circles(&numkit::spectrum(w)?, &s.poles(), cfg)?;
    contour_sum(&circ, cfg.nodes_per_circle, p, nw, |lam| {
        numkit::solve_right(&(s.eval(lam)? * u), &(identity(nw) * lam - w))
    })
}

/// `(XSU)^{L,R}(Z, W)`, an n_Z × n_W matrix; a point shared by σ(Z) and
/// σ(W) gets a single circle.
pub fn btoa_eval<S: MatrixFunction>(
    s: &S,
    z: &CMatrix,
    x: &CMatrix,
    u: &CMatrix,
    w: &CMatrix,
    cfg: &ContourConfig,
) -> Result<CMatrix> {
    let nz = numkit::ensure_square(z)?;
    let nw = numkit::ensure_square(w)?;
    if nz == 0 || nw == 0 {
        return Ok(CMatrix::zeros(nz, nw));
    }
    let mut eigs = numkit::spectrum(z)?;
    eigs.extend(numkit::spectrum(w)?);
    let circ = circles(&eigs, &s.poles(), cfg)?;
    contour_sum(&circ, cfg.nodes_per_circle, nz, nw, |lam| {
        let left = numkit::solve(&(identity(nz) * lam - z), &(x * s.eval(lam)? * u))?;
        numkit::solve_right(&left, &(identity(nw) * lam - w))
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub r_left: f64,
    pub r_right: f64,
    pub r_bi: f64,
    /// Largest sampled `σ_max(S(iy))` on the imaginary axis.
    pub contractivity_max: f64,
    /// Largest sampled `σ_max(S(λ))` at interior points; infinite when a
    /// sample point is at a pole.
    pub contractivity_interior: f64,
    pub samples_used: usize,
}

pub const AXIS_SAMPLES: usize = 100;
pub const INTERIOR_SAMPLES: usize = 100;

/// Deterministic axis grid `y = tan θ` over `θ ∈ (−π/2, π/2)`.
pub fn axis_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| (PI * ((k as f64 + 0.5) / n as f64 - 0.5)).tan())
        .collect()
}

/// Deterministic interior grid spread over moduli `10⁻¹..10²` and angles
/// inside `(−π/2, π/2)`.
pub fn interior_grid(n: usize) -> Vec<Complex64> {
    let golden = 0.618_033_988_749_895_f64;
    (0..n)
        .map(|k| {
            let t = if n > 1 { k as f64 / (n - 1) as f64 } else { 0.5 };
            let modulus = 10f64.powf(-1.0 + 3.0 * t);
            let angle = 0.95 * PI * ((k as f64 * golden).fract() - 0.5);
            Complex64::from_polar(modulus, angle)
        })
        .collect()
}

pub fn check_interpolation<S: MatrixFunction>(s: &S, d: &BtoaData, cfg: &ContourConfig) -> Result<ResidualReport> {
    d.check_dimensions()?;
    let (nz, nw) = (d.n_z(), d.n_w());
    let left = ltoa_eval(s, &d.z, &d.x, cfg)?;
    let right = rtoa_eval(s, &d.u, &d.w, cfg)?;
    let bi = btoa_eval(s, &d.z, &d.x, &d.u, &d.w, cfg)?;
    let mut z_clusters = cluster_centers(&numkit::spectrum(&d.z)?).len();
    let w_clusters = cluster_centers(&numkit::spectrum(&d.w)?).len();
    let mut union = numkit::spectrum(&d.z)?;
    union.extend(numkit::spectrum(&d.w)?);
    let bi_clusters = if nz > 0 && nw > 0 { cluster_centers(&union).len() } else { 0 };
    z_clusters += w_clusters + bi_clusters;

    let mut axis = 0.0f64;
    for y in axis_grid(AXIS_SAMPLES) {
        axis = axis.max(numkit::spectral_norm(&s.eval(c(0.0, y))?));
    }
    let mut interior = 0.0f64;
    for lam in interior_grid(INTERIOR_SAMPLES) {
        match s.eval(lam) {
            Ok(v) => interior = interior.max(numkit::spectral_norm(&v)),
            Err(Error::PoleProximity { .. } | Error::SingularDenominator { .. }) => interior = f64::INFINITY,
            Err(e) => return Err(e),
        }
    }
    Ok(ResidualReport {
        r_left: (left - &d.y).norm(),
        r_right: (right - &d.v).norm(),
        r_bi: (bi - &d.gamma).norm(),
        contractivity_max: axis,
        contractivity_interior: interior,
        samples_used: z_clusters * cfg.nodes_per_circle + AXIS_SAMPLES + INTERIOR_SAMPLES,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSampleReport {
    pub grid: Vec<Complex64>,
    pub gram: CMatrix,
    pub inertia: Inertia,
}

fn near(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-9 * (1.0 + a.norm())
}

/// Gram matrix of the de Branges-Rovnyak kernel of `S` on `points`; with
/// `block` set, of the 2×2 block kernel that also involves `S(z̄)`.
pub fn dbr_kernel_inertia<S: MatrixFunction>(s: &S, points: &[Complex64], block: bool) -> Result<KernelSampleReport> {
    let (p, m) = s.shape();
    let n = points.len();
    for (i, &a) in points.iter().enumerate() {
        for &b in &points[i..] {
            if (a + b.conj()).norm() <= 1e-12 {
                return Err(Error::InvalidData(format!("points {a} and {b} have z + conj(zeta) = 0")));
            }
        }
    }
    let vals: Vec<CMatrix> = points.iter().map(|&z| s.eval(z)).collect::<Result<_>>()?;
    let gram = if !block {
        let mut g = CMatrix::zeros(n * p, n * p);
        for i in 0..n {
            for j in 0..n {
                let k = (identity(p) - &vals[i] * vals[j].adjoint()) / (points[i] + points[j].conj());
                g.view_mut((i * p, j * p), (p, p)).copy_from(&k);
            }
        }
        g
    } else {
        let refl: Vec<CMatrix> = points.iter().map(|&z| s.eval(z.conj())).collect::<Result<_>>()?;
        let q = p + m;
        let mut g = CMatrix::zeros(n * q, n * q);
        for i in 0..n {
            for j in 0..n {
                let (z, zeta) = (points[i], points[j]);
                let sum = z + zeta.conj();
                let k11 = (identity(p) - &vals[i] * vals[j].adjoint()) / sum;
                let k22 = (identity(m) - refl[i].adjoint() * &refl[j]) / sum;
                let (k12, k21) = if near(z, zeta.conj()) {
                    let dz = s.derivative(z)?;
                    let dzbar = s.derivative(z.conj())?;
                    (dz, dzbar.adjoint())
                } else {
                    let diff = z - zeta.conj();
                    ((&vals[i] - &refl[j]) / diff, (refl[i].adjoint() - vals[j].adjoint()) / diff)
                };
                let (r0, c0) = (i * q, j * q);
                g.view_mut((r0, c0), (p, p)).copy_from(&k11);
                g.view_mut((r0, c0 + p), (p, m)).copy_from(&k12);
                g.view_mut((r0 + p, c0), (m, p)).copy_from(&k21);
                g.view_mut((r0 + p, c0 + p), (m, m)).copy_from(&k22);
            }
        }
        g
    };
    let asym = (&gram - gram.adjoint()).norm();
    if asym > 1e-10 * (1.0 + gram.norm()) {
        return Err(Error::Numerical(format!("sampled kernel is not Hermitian: asymmetry {asym:e}")));
    }
    let gram = numkit::hermitian_part(&gram);
    let inertia = numkit::hermitian_inertia_default(&gram)?;
    Ok(KernelSampleReport {
        grid: points.to_vec(),
        gram,
        inertia,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FmiReport {
    /// `[[Γ_D, row(ζ)*], [row(z), K_S(z, ζ)]]`.
    pub matrix: CMatrix,
    /// `K_S(z, ζ) − row(z)Γ_D⁻¹row(ζ)*`.
    pub schur_complement_value: CMatrix,
    /// `max(0, −λ_min)` of the Schur complement at `z = ζ = z`.
    pub psd_defect: f64,
}

fn fmi_row<S: MatrixFunction>(theta: &ThetaRealization, s: &S, z: Complex64) -> Result<(CMatrix, CMatrix)> {
    let p = theta.p();
    let sz = s.eval(z)?;
    let mut left = CMatrix::zeros(p, p + theta.m());
    left.view_mut((0, 0), (p, p)).copy_from(&identity(p));
    left.view_mut((0, p), (p, theta.m())).copy_from(&(-&sz));
    let n = theta.bold_a.nrows();
    let res = theta.base.resolvent_apply(z, &identity(n))?;
    Ok((-(left * &theta.bold_c * res), sz))
}

pub fn fmi_kernel<S: MatrixFunction>(theta: &ThetaRealization, s: &S, z: Complex64, zeta: Complex64) -> Result<FmiReport> {
    let p = theta.p();
    let n = theta.gamma_d.nrows();
    let (row_z, sz) = fmi_row(theta, s, z)?;
    let (row_zeta, szeta) = fmi_row(theta, s, zeta)?;
    let sum = z + zeta.conj();
    if sum.norm() <= 1e-12 {
        return Err(Error::InvalidData("z + conj(zeta) vanishes".into()));
    }
    let kernel = |a: &CMatrix, b: &CMatrix, sum: Complex64| (identity(p) - a * b.adjoint()) / sum;
    let k = kernel(&sz, &szeta, sum);
    let mut matrix = CMatrix::zeros(n + p, n + p);
    matrix.view_mut((0, 0), (n, n)).copy_from(&theta.gamma_d);
    matrix.view_mut((0, n), (n, p)).copy_from(&row_zeta.adjoint());
    matrix.view_mut((n, 0), (p, n)).copy_from(&row_z);
    matrix.view_mut((n, n), (p, p)).copy_from(&k);
    let schur = &k - &row_z * numkit::solve(&theta.gamma_d, &row_zeta.adjoint())?;
    let diag = kernel(&sz, &sz, z + z.conj()) - &row_z * numkit::solve(&theta.gamma_d, &row_z.adjoint())?;
    let lowest = numkit::hermitian_eigenvalues(&numkit::hermitian_part(&diag))?
        .first()
        .copied()
        .unwrap_or(0.0);
    Ok(FmiReport {
        matrix,
        schur_complement_value: schur,
        psd_defect: (-lowest).max(0.0),
    })
}

/// Value at `λ`, or the mean over a small circle when `λ` is a removable
/// singularity of the realization.
pub fn limit_value<S: MatrixFunction>(s: &S, lambda: Complex64) -> Result<CMatrix> {
    match s.eval(lambda) {
        Err(Error::PoleProximity { .. }) => {
            let r = 1e-3 * (1.0 + lambda.norm());
            let n = 8;
            let (rows, cols) = s.shape();
            let mut acc = CMatrix::zeros(rows, cols);
            for k in 0..n {
                acc += s.eval(lambda + Complex64::from_polar(r, 2.0 * PI * k as f64 / n as f64))?;
            }
            Ok(acc / c(n as f64, 0.0))
        }
        other => other,
    }
}

/// The node-data Pick matrix with `y_i`, `v_j` and `ρ_ij` read off `S`
/// itself; PSD whenever `S` is a Schur-class solution.
pub fn sampled_simple_pick<S: MatrixFunction>(s: &S, d: &SimpleData) -> Result<CMatrix> {
    let left = d
        .left
        .iter()
        .map(|l| {
            Ok(LeftNode {
                z: l.z,
                x: l.x.clone(),
                y: &l.x * limit_value(s, l.z)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let right = d
        .right
        .iter()
        .map(|r| {
            Ok(RightNode {
                w: r.w,
                u: r.u.clone(),
                v: limit_value(s, r.w)? * &r.u,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rho = BTreeMap::new();
    for &(i, j) in d.rho.keys() {
        let value = (&d.left[i].x * s.derivative(d.left[i].z)? * &d.right[j].u)[(0, 0)];
        rho.insert((i, j), value);
    }
    let sampled = SimpleData {
        p: d.p,
        m: d.m,
        left,
        right,
        rho,
    };
    pick::simple_pick_matrix(&sampled)
}
