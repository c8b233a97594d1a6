//! Pick matrices, J-gramians and inertia bookkeeping.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::datasets::{BtoaData, SimpleData};
use crate::error::{Error, Result};
use crate::numkit::{self, hermitian_part, CMatrix, Inertia};

/// Solution of `Γ_L Z* + Z Γ_L = XX* − YY*`.
pub fn gamma_left(z: &CMatrix, x: &CMatrix, y: &CMatrix) -> Result<CMatrix> {
    let q = x * x.adjoint() - y * y.adjoint();
    Ok(hermitian_part(&numkit::solve_sylvester(z, &z.adjoint(), &q)?))
}

/// Solution of `Γ_R W + W*Γ_R = U*U − V*V`.
pub fn gamma_right(w: &CMatrix, u: &CMatrix, v: &CMatrix) -> Result<CMatrix> {
    let q = u.adjoint() * u - v.adjoint() * v;
    Ok(hermitian_part(&numkit::solve_sylvester(&w.adjoint(), w, &q)?))
}

/// `[[Γ_L, Γ], [Γ*, Γ_R]]`.
pub fn assemble(gamma_l: &CMatrix, gamma: &CMatrix, gamma_r: &CMatrix) -> CMatrix {
    let (nz, nw) = (gamma_l.nrows(), gamma_r.nrows());
    let mut g = CMatrix::zeros(nz + nw, nz + nw);
    g.view_mut((0, 0), (nz, nz)).copy_from(gamma_l);
    g.view_mut((0, nz), (nz, nw)).copy_from(gamma);
    g.view_mut((nz, 0), (nw, nz)).copy_from(&gamma.adjoint());
    g.view_mut((nz, nz), (nw, nw)).copy_from(gamma_r);
    g
}

#[derive(Debug, Clone, PartialEq)]
pub struct PickReport {
    pub gamma_l: CMatrix,
    pub gamma_r: CMatrix,
    pub gamma_d: CMatrix,
    pub inertia: Inertia,
    /// `ν₋ = 0`; see `degenerate` for the singular boundary case.
    pub solvable_schur: bool,
    /// `ν₀ > 0`.
    pub degenerate: bool,
    /// `ν₋`, defined only when `Γ_D` is invertible.
    pub kappa: Option<usize>,
}

/// Assemble `Γ_D` and classify it. `tol` overrides the inertia threshold.
pub fn pick_matrix(d: &BtoaData, tol: Option<f64>) -> Result<PickReport> {
    d.check_dimensions()?;
    let gamma_l = gamma_left(&d.z, &d.x, &d.y)?;
    let gamma_r = gamma_right(&d.w, &d.u, &d.v)?;
    let gamma_d = assemble(&gamma_l, &d.gamma, &gamma_r);
    let tol = tol.unwrap_or_else(|| Inertia::default_tolerance(&gamma_d));
    let inertia = numkit::hermitian_inertia(&gamma_d, tol)?;
    let degenerate = inertia.n_zero > 0;
    Ok(PickReport {
        solvable_schur: inertia.n_minus == 0,
        degenerate,
        kappa: (!degenerate).then_some(inertia.n_minus),
        gamma_l,
        gamma_r,
        gamma_d,
        inertia,
    })
}

/// Pick matrix of node data from the closed-form entries.
pub fn simple_pick_matrix(d: &SimpleData) -> Result<CMatrix> {
    d.validate()?;
    let (nl, nr) = (d.left.len(), d.right.len());
    let mut p11 = CMatrix::zeros(nl, nl);
    for (i, a) in d.left.iter().enumerate() {
        for (j, b) in d.left.iter().enumerate() {
            let num = (&a.x * b.x.adjoint())[(0, 0)] - (&a.y * b.y.adjoint())[(0, 0)];
            p11[(i, j)] = num / (a.z + b.z.conj());
        }
    }
    let mut p12 = CMatrix::zeros(nl, nr);
    for (i, a) in d.left.iter().enumerate() {
        for (j, b) in d.right.iter().enumerate() {
            p12[(i, j)] = if SimpleData::coincide(a.z, b.w) {
                d.rho[&(i, j)]
            } else {
                ((&a.x * &b.v)[(0, 0)] - (&a.y * &b.u)[(0, 0)]) / (b.w - a.z)
            };
        }
    }
    let mut p22 = CMatrix::zeros(nr, nr);
    for (i, a) in d.right.iter().enumerate() {
        for (j, b) in d.right.iter().enumerate() {
            let num = (a.u.adjoint() * &b.u)[(0, 0)] - (a.v.adjoint() * &b.v)[(0, 0)];
            p22[(i, j)] = num / (a.w.conj() + b.w);
        }
    }
    Ok(assemble(&p11, &p12, &p22))
}

#[derive(Debug, Clone, PartialEq)]
pub struct JGramians {
    pub g_zx: CMatrix,
    pub g_zy: CMatrix,
    pub g_uw: CMatrix,
    pub g_vw: CMatrix,
    /// `‖(G_ZX − G_ZY) − Γ_L‖_F`.
    pub residual_l: f64,
    /// `‖(G_VW − G_UW) + Γ_R‖_F`.
    pub residual_r: f64,
}

pub fn j_gramians(d: &BtoaData) -> Result<JGramians> {
    d.check_dimensions()?;
    let z_star = d.z.adjoint();
    let w_star = d.w.adjoint();
    let lyap_left = |x: &CMatrix| -> Result<CMatrix> {
        Ok(hermitian_part(&numkit::solve_sylvester(&d.z, &z_star, &(x * x.adjoint()))?))
    };
    let lyap_right = |u: &CMatrix| -> Result<CMatrix> {
        Ok(hermitian_part(&numkit::solve_sylvester(&w_star, &d.w, &(u.adjoint() * u))?))
    };
    let g_zx = lyap_left(&d.x)?;
    let g_zy = lyap_left(&d.y)?;
    let g_uw = lyap_right(&d.u)?;
    let g_vw = lyap_right(&d.v)?;
    let gamma_l = gamma_left(&d.z, &d.x, &d.y)?;
    let gamma_r = gamma_right(&d.w, &d.u, &d.v)?;
    Ok(JGramians {
        residual_l: (&g_zx - &g_zy - gamma_l).norm(),
        residual_r: (&g_vw - &g_uw + gamma_r).norm(),
        g_zx,
        g_zy,
        g_uw,
        g_vw,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingFactorization {
    /// `−Γ_L⁻¹Γ`, n_Z × n_W.
    pub t_tilde: CMatrix,
    /// Block-diagonal middle factor `diag(Γ_L, Γ_R − T̃*Γ_L T̃)`.
    pub middle: CMatrix,
    pub reconstruction_residual: f64,
}

/// Factor `Γ_D = L* M L` with `L = [[I, −T̃], [0, I]]`, where both diagonal
/// blocks of `M` are rebuilt from the J-gramians rather than taken from
/// `Γ_D` itself.
pub fn coupling_factorization(d: &BtoaData) -> Result<CouplingFactorization> {
    let g = j_gramians(d)?;
    let (nz, nw) = (d.n_z(), d.n_w());
    let gamma_l = &g.g_zx - &g.g_zy;
    let gamma_r = &g.g_uw - &g.g_vw;
    if nz > 0 {
        let inertia = numkit::hermitian_inertia_default(&gamma_l)?;
        if inertia.n_zero > 0 {
            return Err(Error::Singular("Gamma_L is not invertible".into()));
        }
    }
    let t_tilde = -numkit::solve(&gamma_l, &d.gamma)?;
    let complement = &gamma_r - t_tilde.adjoint() * &gamma_l * &t_tilde;
    let middle = assemble(&gamma_l, &CMatrix::zeros(nz, nw), &complement);
    let mut l = numkit::identity(nz + nw);
    l.view_mut((0, nz), (nz, nw)).copy_from(&(-&t_tilde));
    let rebuilt = l.adjoint() * &middle * &l;
    let assembled = pick_matrix(d, None)?.gamma_d;
    Ok(CouplingFactorization {
        reconstruction_residual: (rebuilt - assembled).norm(),
        t_tilde,
        middle,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchurInertia {
    pub whole: Inertia,
    pub block: Inertia,
    pub complement: Inertia,
    /// `whole = block + complement` componentwise.
    pub additive: bool,
}

/// Inertia of `H`, of its leading `k×k` block and of the Schur complement of
/// that block.
pub fn schur_complement_inertia(h: &CMatrix, k: usize, tol: f64) -> Result<SchurInertia> {
    let n = numkit::ensure_square(h)?;
    if k > n {
        return Err(Error::mismatch("schur_complement_inertia", format!("k <= {n}"), k.to_string()));
    }
    let whole = numkit::hermitian_inertia(h, tol)?;
    let h11 = h.view((0, 0), (k, k)).into_owned();
    let h12 = h.view((0, k), (k, n - k)).into_owned();
    let h21 = h.view((k, 0), (n - k, k)).into_owned();
    let h22 = h.view((k, k), (n - k, n - k)).into_owned();
    let block = numkit::hermitian_inertia(&h11, tol)?;
    if block.n_zero > 0 {
        return Err(Error::Singular("leading block is not invertible".into()));
    }
    let complement_matrix = hermitian_part(&(h22 - h21 * numkit::solve(&h11, &h12)?));
    let complement = numkit::hermitian_inertia(&complement_matrix, tol)?;
    let (bp, bz, bm) = block.counts();
    let (cp, cz, cm) = complement.counts();
    let additive = whole.counts() == (bp + cp, bz + cz, bm + cm);
    Ok(SchurInertia {
        whole,
        block,
        complement,
        additive,
    })
}

/// As [`schur_complement_inertia`], with the trailing `k×k` block pivoted
/// out instead of the leading one.
pub fn schur_complement_inertia_trailing(h: &CMatrix, k: usize, tol: f64) -> Result<SchurInertia> {
    let n = numkit::ensure_square(h)?;
    if k > n {
        return Err(Error::mismatch("schur_complement_inertia_trailing", format!("k <= {n}"), k.to_string()));
    }
    let order: Vec<usize> = (n - k..n).chain(0..n - k).collect();
    let permuted = DMatrix::<Complex64>::from_fn(n, n, |i, j| h[(order[i], order[j])]);
    schur_complement_inertia(&permuted, k, tol)
}
