//! State-space realizations `D + C(λI − A)⁻¹B` and the coefficient
//! functions `Θ`, `ψ` and Blaschke-Potapov factors built from them.

use std::ops::Range;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::datasets::BtoaData;
use crate::error::{Error, Result};
use crate::json;
use crate::numkit::{self, c, identity, CMatrix};
use crate::pick;

/// Relative distance to a pole below which evaluation is refused.
pub const POLE_GUARD: f64 = 1e-8;

/// A matrix-valued function of one complex variable.
pub trait MatrixFunction {
    fn shape(&self) -> (usize, usize);

    fn eval(&self, lambda: Complex64) -> Result<CMatrix>;

    /// Limit as `λ → ∞` when it is known to exist.
    fn value_at_infinity(&self) -> Option<CMatrix> {
        None
    }

    /// Candidate poles. May be a superset of the true poles.
    fn poles(&self) -> Vec<Complex64> {
        Vec::new()
    }

    /// Derivative by a small Cauchy integral around `λ`.
    fn derivative(&self, lambda: Complex64) -> Result<CMatrix> {
        let mut r = 1e-3 * (1.0 + lambda.norm());
        if let Some(d) = self.poles().iter().map(|p| (p - lambda).norm()).reduce(f64::min) {
            r = r.min(0.25 * d);
        }
        let n = 32;
        let (rows, cols) = self.shape();
        let mut acc = CMatrix::zeros(rows, cols);
        for k in 0..n {
            let e = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64);
            acc += self.eval(lambda + e * r)? * (e.conj() / (r * n as f64));
        }
        Ok(acc)
    }
}

impl<T: MatrixFunction + ?Sized> MatrixFunction for &T {
    fn shape(&self) -> (usize, usize) {
        (**self).shape()
    }
    fn eval(&self, lambda: Complex64) -> Result<CMatrix> {
        (**self).eval(lambda)
    }
    fn value_at_infinity(&self) -> Option<CMatrix> {
        (**self).value_at_infinity()
    }
    fn poles(&self) -> Vec<Complex64> {
        (**self).poles()
    }
    fn derivative(&self, lambda: Complex64) -> Result<CMatrix> {
        (**self).derivative(lambda)
    }
}

/// A function given by a closure, for closed-form test functions.
pub struct ClosureFunction<F> {
    rows: usize,
    cols: usize,
    f: F,
    at_infinity: Option<CMatrix>,
    poles: Vec<Complex64>,
}

impl<F: Fn(Complex64) -> CMatrix> ClosureFunction<F> {
    pub fn new(rows: usize, cols: usize, f: F) -> Self {
        ClosureFunction {
            rows,
            cols,
            f,
            at_infinity: None,
            poles: Vec::new(),
        }
    }

    pub fn with_infinity(mut self, value: CMatrix) -> Self {
        self.at_infinity = Some(value);
        self
    }

    pub fn with_poles(mut self, poles: Vec<Complex64>) -> Self {
        self.poles = poles;
        self
    }
}

impl<F: Fn(Complex64) -> CMatrix> MatrixFunction for ClosureFunction<F> {
    fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
    fn eval(&self, lambda: Complex64) -> Result<CMatrix> {
        if let Some(&p) = self.poles.iter().find(|p| (*p - lambda).norm() <= POLE_GUARD * (1.0 + lambda.norm())) {
            return Err(Error::PoleProximity {
                point: lambda,
                distance: (p - lambda).norm(),
            });
        }
        Ok((self.f)(lambda))
    }
    fn value_at_infinity(&self) -> Option<CMatrix> {
        self.at_infinity.clone()
    }
    fn poles(&self) -> Vec<Complex64> {
        self.poles.clone()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    a: CMatrix,
    b: CMatrix,
    c: CMatrix,
    d: CMatrix,
    poles: Vec<Complex64>,
}

impl Realization {
    pub fn new(a: CMatrix, b: CMatrix, c: CMatrix, d: CMatrix) -> Result<Self> {
        let n = numkit::ensure_square(&a)?;
        if b.nrows() != n {
            return Err(Error::mismatch("realization B rows", n.to_string(), b.nrows().to_string()));
        }
        if c.ncols() != n {
            return Err(Error::mismatch("realization C columns", n.to_string(), c.ncols().to_string()));
        }
        if d.shape() != (c.nrows(), b.ncols()) {
            return Err(Error::mismatch(
                "realization D",
                format!("{}x{}", c.nrows(), b.ncols()),
                format!("{}x{}", d.nrows(), d.ncols()),
            ));
        }
        for (name, m) in [("A", &a), ("B", &b), ("C", &c), ("D", &d)] {
            numkit::ensure_finite(m, name)?;
        }
        let poles = numkit::spectrum(&a)?;
        Ok(Realization { a, b, c, d, poles })
    }

    /// Constant function `D` with an empty state.
    pub fn constant(d: CMatrix) -> Self {
        let (r, q) = d.shape();
        Realization {
            a: CMatrix::zeros(0, 0),
            b: CMatrix::zeros(0, q),
            c: CMatrix::zeros(r, 0),
            d,
            poles: Vec::new(),
        }
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }
    pub fn b(&self) -> &CMatrix {
        &self.b
    }
    pub fn c(&self) -> &CMatrix {
        &self.c
    }
    pub fn d(&self) -> &CMatrix {
        &self.d
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    fn check_pole_distance(&self, lambda: Complex64) -> Result<()> {
        let bound = POLE_GUARD * (1.0 + lambda.norm());
        if let Some(dist) = self.poles.iter().map(|p| (p - lambda).norm()).reduce(f64::min) {
            if dist <= bound {
                return Err(Error::PoleProximity {
                    point: lambda,
                    distance: dist,
                });
            }
        }
        Ok(())
    }

    /// `(λI − A)⁻¹M` by a linear solve.
    pub fn resolvent_apply(&self, lambda: Complex64, m: &CMatrix) -> Result<CMatrix> {
        self.check_pole_distance(lambda)?;
        let n = self.state_dim();
        let shifted = identity(n) * lambda - &self.a;
        numkit::solve(&shifted, m)
    }

    /// Realization of the rows `rows` and columns `cols` of the function.
    pub fn sub_block(&self, rows: Range<usize>, cols: Range<usize>) -> Realization {
        let n = self.state_dim();
        let (nr, nc) = (rows.len(), cols.len());
        Realization {
            a: self.a.clone(),
            b: self.b.view((0, cols.start), (n, nc)).into_owned(),
            c: self.c.view((rows.start, 0), (nr, n)).into_owned(),
            d: self.d.view((rows.start, cols.start), (nr, nc)).into_owned(),
            poles: self.poles.clone(),
        }
    }

    /// Realization of the product `self(λ)·other(λ)`.
    pub fn series(&self, other: &Realization) -> Result<Realization> {
        if self.d.ncols() != other.d.nrows() {
            return Err(Error::mismatch(
                "series product",
                self.d.ncols().to_string(),
                other.d.nrows().to_string(),
            ));
        }
        let (n1, n2) = (self.state_dim(), other.state_dim());
        let mut a = CMatrix::zeros(n1 + n2, n1 + n2);
        a.view_mut((0, 0), (n1, n1)).copy_from(&self.a);
        a.view_mut((0, n1), (n1, n2)).copy_from(&(&self.b * &other.c));
        a.view_mut((n1, n1), (n2, n2)).copy_from(&other.a);
        let mut b = CMatrix::zeros(n1 + n2, other.b.ncols());
        b.view_mut((0, 0), (n1, other.b.ncols())).copy_from(&(&self.b * &other.d));
        b.view_mut((n1, 0), (n2, other.b.ncols())).copy_from(&other.b);
        let mut c = CMatrix::zeros(self.c.nrows(), n1 + n2);
        c.view_mut((0, 0), (self.c.nrows(), n1)).copy_from(&self.c);
        c.view_mut((0, n1), (self.c.nrows(), n2)).copy_from(&(&self.d * &other.c));
        let mut poles = self.poles.clone();
        poles.extend_from_slice(&other.poles);
        Ok(Realization {
            a,
            b,
            c,
            d: &self.d * &other.d,
            poles,
        })
    }

    /// Eigenvalues of `A − BD⁻¹C`: the zeros of `det` of the function when
    /// `D` is invertible, counted with the realization's redundant modes.
    pub fn zeros(&self) -> Result<Vec<Complex64>> {
        let dc = numkit::solve(&self.d, &self.c)?;
        numkit::spectrum(&(&self.a - &self.b * dc))
    }

    pub fn to_value(&self) -> Value {
        json!({
            "A": json::matrix_to_value(&self.a),
            "B": json::matrix_to_value(&self.b),
            "C": json::matrix_to_value(&self.c),
            "D": json::matrix_to_value(&self.d),
        })
    }

    /// Decode `{A, B, C, D}`; state and port sizes come from the nonempty
    /// entries.
    pub fn from_value(v: &Value, path: &str) -> Result<Realization> {
        let get = |key: &str| -> Result<Option<CMatrix>> {
            json::matrix_from_value(json::field(v, key, path)?, &json::join(path, key))
        };
        let d = get("D")?.ok_or_else(|| Error::parse(json::join(path, "D"), "D must be nonempty"))?;
        let a = get("A")?.unwrap_or_else(|| CMatrix::zeros(0, 0));
        let n = a.nrows();
        let b = get("B")?.unwrap_or_else(|| CMatrix::zeros(n, d.ncols()));
        let c = get("C")?.unwrap_or_else(|| CMatrix::zeros(d.nrows(), n));
        Realization::new(a, b, c, d).map_err(|e| Error::parse(path, e.to_string()))
    }
}

impl MatrixFunction for Realization {
    fn shape(&self) -> (usize, usize) {
        self.d.shape()
    }

    fn eval(&self, lambda: Complex64) -> Result<CMatrix> {
        if self.state_dim() == 0 {
            return Ok(self.d.clone());
        }
        Ok(&self.d + &self.c * self.resolvent_apply(lambda, &self.b)?)
    }

    fn value_at_infinity(&self) -> Option<CMatrix> {
        Some(self.d.clone())
    }

    fn poles(&self) -> Vec<Complex64> {
        self.poles.clone()
    }

    fn derivative(&self, lambda: Complex64) -> Result<CMatrix> {
        if self.state_dim() == 0 {
            return Ok(CMatrix::zeros(self.d.nrows(), self.d.ncols()));
        }
        let once = self.resolvent_apply(lambda, &self.b)?;
        Ok(-(&self.c * self.resolvent_apply(lambda, &once)?))
    }
}

/// `J = diag(I_p, −I_m)`.
pub fn signature(p: usize, m: usize) -> CMatrix {
    let mut j = identity(p + m);
    for k in p..p + m {
        j[(k, k)] = -j[(k, k)];
    }
    j
}

/// `Θ(λ) = I − 𝐂(λI − 𝐀)⁻¹Γ_D⁻¹𝐂*J`, normalized by `Θ(∞) = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaRealization {
    pub base: Realization,
    pub j: CMatrix,
    /// `(n_Z, n_W, p, m)`.
    pub dims: (usize, usize, usize, usize),
    /// `diag(−Z*, W)`.
    pub bold_a: CMatrix,
    /// `[[−X*, V], [−Y*, U]]`.
    pub bold_c: CMatrix,
    pub gamma_d: CMatrix,
    /// `‖Γ_D𝐀 + 𝐀*Γ_D + 𝐂*J𝐂‖_F` at construction.
    pub lyapunov_residual: f64,
}

impl ThetaRealization {
    pub fn p(&self) -> usize {
        self.dims.2
    }

    pub fn m(&self) -> usize {
        self.dims.3
    }

    /// Realization of block `(i, j)`, with `i, j ∈ {1, 2}`.
    pub fn block(&self, i: usize, j: usize) -> Realization {
        let (p, m) = (self.p(), self.m());
        let range = |k: usize| if k == 1 { 0..p } else { p..p + m };
        self.base.sub_block(range(i), range(j))
    }

    /// The four blocks `[[Θ₁₁, Θ₁₂], [Θ₂₁, Θ₂₂]]` evaluated at `λ`.
    pub fn blocks(&self, lambda: Complex64) -> Result<[[CMatrix; 2]; 2]> {
        Ok(self.split(&self.base.eval(lambda)?))
    }

    /// Cut a value of `Θ` into its four blocks.
    pub fn split(&self, t: &CMatrix) -> [[CMatrix; 2]; 2] {
        let (p, m) = (self.p(), self.m());
        let cut = |r0: usize, nr: usize, c0: usize, nc: usize| t.view((r0, c0), (nr, nc)).into_owned();
        [[cut(0, p, 0, p), cut(0, p, p, m)], [cut(p, m, 0, p), cut(p, m, p, m)]]
    }
}

impl MatrixFunction for ThetaRealization {
    fn shape(&self) -> (usize, usize) {
        self.base.shape()
    }
    fn eval(&self, lambda: Complex64) -> Result<CMatrix> {
        self.base.eval(lambda)
    }
    fn value_at_infinity(&self) -> Option<CMatrix> {
        self.base.value_at_infinity()
    }
    fn poles(&self) -> Vec<Complex64> {
        self.base.poles()
    }
    fn derivative(&self, lambda: Complex64) -> Result<CMatrix> {
        self.base.derivative(lambda)
    }
}

pub fn build_theta(d: &BtoaData) -> Result<ThetaRealization> {
    let report = pick::pick_matrix(d, None)?;
    if report.degenerate {
        return Err(Error::Singular("Gamma_D is not invertible".into()));
    }
    let (nz, nw, p, m) = (d.n_z(), d.n_w(), d.p, d.m);
    let n = nz + nw;
    let mut bold_a = CMatrix::zeros(n, n);
    bold_a.view_mut((0, 0), (nz, nz)).copy_from(&(-d.z.adjoint()));
    bold_a.view_mut((nz, nz), (nw, nw)).copy_from(&d.w);
    let mut bold_c = CMatrix::zeros(p + m, n);
    bold_c.view_mut((0, 0), (p, nz)).copy_from(&(-d.x.adjoint()));
    bold_c.view_mut((0, nz), (p, nw)).copy_from(&d.v);
    bold_c.view_mut((p, 0), (m, nz)).copy_from(&(-d.y.adjoint()));
    bold_c.view_mut((p, nz), (m, nw)).copy_from(&d.u);
    let j = signature(p, m);
    let gamma_d = report.gamma_d;

    let lyap = &gamma_d * &bold_a + bold_a.adjoint() * &gamma_d + bold_c.adjoint() * &j * &bold_c;
    let scale = 1.0 + 2.0 * gamma_d.norm() * bold_a.norm() + bold_c.norm().powi(2);
    let lyapunov_residual = lyap.norm();
    if lyapunov_residual > 1e-9 * scale {
        return Err(Error::InvalidData(format!(
            "Lyapunov identity for Gamma_D fails: residual {lyapunov_residual:e}; is the Sylvester condition on Gamma met?"
        )));
    }

    let b = numkit::solve(&gamma_d, &(bold_c.adjoint() * &j))?;
    let base = Realization::new(bold_a.clone(), b, -&bold_c, identity(p + m))?;
    Ok(ThetaRealization {
        base,
        j,
        dims: (nz, nw, p, m),
        bold_a,
        bold_c,
        gamma_d,
        lyapunov_residual,
    })
}

/// `ψ`, its inverse and the Lyapunov solution `P` behind both.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiRealization {
    pub base: Realization,
    pub inverse: Realization,
    pub p: CMatrix,
}

impl MatrixFunction for PsiRealization {
    fn shape(&self) -> (usize, usize) {
        self.base.shape()
    }
    fn eval(&self, lambda: Complex64) -> Result<CMatrix> {
        self.base.eval(lambda)
    }
    fn value_at_infinity(&self) -> Option<CMatrix> {
        self.base.value_at_infinity()
    }
    fn poles(&self) -> Vec<Complex64> {
        self.base.poles()
    }
    fn derivative(&self, lambda: Complex64) -> Result<CMatrix> {
        self.base.derivative(lambda)
    }
}

/// `ψ(z) = I − UP⁻¹(zI + W*)⁻¹U*` with `PW + W*P = U*U`.
pub fn build_psi(u: &CMatrix, w: &CMatrix) -> Result<PsiRealization> {
    let nw = numkit::ensure_square(w)?;
    if u.ncols() != nw {
        return Err(Error::mismatch("U columns", nw.to_string(), u.ncols().to_string()));
    }
    let m = u.nrows();
    if nw == 0 {
        return Ok(PsiRealization {
            base: Realization::constant(identity(m)),
            inverse: Realization::constant(identity(m)),
            p: CMatrix::zeros(0, 0),
        });
    }
    if numkit::spectrum(w)?.iter().any(|s| s.re <= 0.0) {
        return Err(Error::InvalidData("spectrum of W must lie in the open right half plane".into()));
    }
    let u_star = u.adjoint();
    let p = numkit::hermitian_part(&numkit::solve_sylvester(&w.adjoint(), w, &(&u_star * u))?);
    let inertia = numkit::hermitian_inertia_default(&p)?;
    if inertia.n_plus != nw {
        return Err(Error::Singular("(U, W) is not observable: P is not positive definite".into()));
    }
    let p_inv_u_star = numkit::solve(&p, &u_star)?;
    let c_psi = -numkit::solve_right(u, &p)?;
    let base = Realization::new(-w.adjoint(), u_star, c_psi, identity(m))?;
    let inverse = Realization::new(w.clone(), p_inv_u_star, u.clone(), identity(m))?;
    Ok(PsiRealization { base, inverse, p })
}

/// `I − P + ((λ − α)/(λ + ᾱ))P` for an orthogonal projection `P`.
pub fn blaschke_factor(alpha: Complex64, projection: &CMatrix) -> Result<Realization> {
    if !(alpha.re > 0.0) {
        return Err(Error::InvalidData(format!("Blaschke zero {alpha} is not in the right half plane")));
    }
    let n = numkit::ensure_square(projection)?;
    numkit::ensure_finite(projection, "projection")?;
    let idem = (projection * projection - projection).norm();
    let herm = (projection - projection.adjoint()).norm();
    if idem > 1e-10 || herm > 1e-10 {
        return Err(Error::InvalidProjection(format!(
            "|P^2 - P| = {idem:e}, |P - P*| = {herm:e}"
        )));
    }
    if n == 0 {
        return Ok(Realization::constant(CMatrix::zeros(0, 0)));
    }
    let eig = numkit::hermitian_part(projection).symmetric_eigen();
    let range: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] > 0.5).collect();
    let r = range.len();
    if r == 0 {
        return Ok(Realization::constant(identity(n)));
    }
    let mut q = CMatrix::zeros(n, r);
    for (col, &k) in range.iter().enumerate() {
        q.column_mut(col).copy_from(&eig.eigenvectors.column(k));
    }
    Realization::new(
        identity(r) * (-alpha.conj()),
        q.adjoint(),
        q * c(-2.0 * alpha.re, 0.0),
        identity(n),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelIdentity {
    /// `(J − Θ(z)JΘ(ζ)*)/(z + ζ̄)`.
    pub lhs: CMatrix,
    /// `𝐂(zI − 𝐀)⁻¹Γ_D⁻¹(ζ̄I − 𝐀*)⁻¹𝐂*`.
    pub rhs: CMatrix,
    pub defect: f64,
}

pub fn theta_kernel(theta: &ThetaRealization, z: Complex64, zeta: Complex64) -> Result<KernelIdentity> {
    let denom = z + zeta.conj();
    if denom.norm() <= 1e-12 * (1.0 + z.norm()) {
        return Err(Error::InvalidData(format!("z + conj(zeta) vanishes at z = {z}, zeta = {zeta}")));
    }
    let tz = theta.eval(z)?;
    let tzeta = theta.eval(zeta)?;
    let lhs = (&theta.j - &tz * &theta.j * tzeta.adjoint()) / denom;

    let n = theta.bold_a.nrows();
    let left = theta.base.resolvent_apply(z, &identity(n))?;
    let right = theta.base.resolvent_apply(zeta, &identity(n))?.adjoint();
    let middle = numkit::solve(&theta.gamma_d, &(right * theta.bold_c.adjoint()))?;
    let rhs = &theta.bold_c * left * middle;
    let defect = (&lhs - &rhs).norm();
    Ok(KernelIdentity { lhs, rhs, defect })
}

/// `max(‖J − Θ(iy)*JΘ(iy)‖, ‖J − Θ(iy)JΘ(iy)*‖)`.
pub fn j_unitarity_defect(theta: &ThetaRealization, y: f64) -> Result<f64> {
    let t = theta.eval(c(0.0, y))?;
    let j = &theta.j;
    let a = numkit::spectral_norm(&(j - t.adjoint() * j * &t));
    let b = numkit::spectral_norm(&(j - &t * j * t.adjoint()));
    Ok(a.max(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::numkit::{re, real_matrix};

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        a.shape() == b.shape() && (a - b).norm() <= tol
    }

    fn diag2(a: Complex64, b: Complex64) -> CMatrix {
        numkit::diag(&[a, b])
    }

    #[test]
    fn eval_examples() {
        let theta = build_theta(&fixtures::d1()).unwrap();
        assert!(close(&theta.eval(re(3.0)).unwrap(), &diag2(re(0.5), re(1.0)), 1e-15));
        assert_eq!(theta.value_at_infinity().unwrap(), identity(2));
        let psi = build_psi(&fixtures::d2().u, &fixtures::d2().w).unwrap();
        assert!(psi.eval(re(1.0)).unwrap().norm() < 1e-15);
    }

    #[test]
    fn eval_refuses_poles() {
        let r = Realization::new(real_matrix(1, 1, &[2.0]), real_matrix(1, 1, &[1.0]), real_matrix(1, 1, &[1.0]), real_matrix(1, 1, &[0.0])).unwrap();
        assert!(matches!(r.eval(re(2.0)), Err(Error::PoleProximity { .. })));
        assert!(matches!(r.eval(re(2.0 + 1e-9)), Err(Error::PoleProximity { .. })));
        assert!(r.eval(re(2.0 + 1e-6)).is_ok());
    }

    #[test]
    fn realization_rejects_bad_shapes() {
        let one = real_matrix(1, 1, &[1.0]);
        assert!(Realization::new(one.clone(), CMatrix::zeros(2, 1), one.clone(), one.clone()).is_err());
        assert!(Realization::new(one.clone(), one.clone(), one.clone(), CMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn derivative_matches_closed_form() {
        let r = Realization::new(real_matrix(1, 1, &[-1.0]), real_matrix(1, 1, &[1.0]), real_matrix(1, 1, &[1.0]), real_matrix(1, 1, &[0.0])).unwrap();
        let lam = c(0.5, 0.3);
        let exact = -(lam + 1.0).powi(-2);
        assert!((r.derivative(lam).unwrap()[(0, 0)] - exact).norm() < 1e-14);
        let f = ClosureFunction::new(1, 1, |l: Complex64| CMatrix::from_element(1, 1, 1.0 / (l + 1.0)));
        assert!((f.derivative(lam).unwrap()[(0, 0)] - exact).norm() < 1e-9);
    }

    #[test]
    fn theta_closed_forms() {
        let lam = c(0.7, -1.3);
        let t1 = build_theta(&fixtures::d1()).unwrap();
        assert!(close(&t1.eval(lam).unwrap(), &diag2((lam - 1.0) / (lam + 1.0), re(1.0)), 1e-14));
        let t2 = build_theta(&fixtures::d2()).unwrap();
        assert!(close(&t2.eval(lam).unwrap(), &diag2(re(1.0), (lam + 1.0) / (lam - 1.0)), 1e-14));
        let t3 = build_theta(&fixtures::d3()).unwrap();
        let [[_, t12], [_, t22]] = t3.blocks(lam).unwrap();
        assert!((t22[(0, 0)] - (3.0 * lam - 5.0) / (3.0 * lam + 3.0)).norm() < 1e-14);
        assert!((t12[(0, 0)] + 4.0 / (3.0 * (lam + 1.0))).norm() < 1e-14);
        assert!(close(&t3.block(2, 2).eval(lam).unwrap(), &t22, 1e-15));
    }

    #[test]
    fn theta_rejects_singular_gamma() {
        assert!(matches!(build_theta(&fixtures::d4(re(0.375))), Err(Error::Singular(_))));
    }

    #[test]
    fn psi_examples() {
        let psi = build_psi(&real_matrix(1, 1, &[1.0]), &real_matrix(1, 1, &[1.0])).unwrap();
        assert!(close(&psi.p, &real_matrix(1, 1, &[0.5]), 1e-15));
        let z = c(2.0, 0.5);
        assert!((psi.eval(z).unwrap()[(0, 0)] - (z - 1.0) / (z + 1.0)).norm() < 1e-15);
        assert!((psi.eval(c(0.0, 1.0)).unwrap()[(0, 0)].norm() - 1.0).abs() < 1e-15);
        let empty = build_psi(&CMatrix::zeros(2, 0), &CMatrix::zeros(0, 0)).unwrap();
        assert_eq!(empty.eval(z).unwrap(), identity(2));
        assert_eq!(empty.inverse.eval(z).unwrap(), identity(2));
    }

    #[test]
    fn psi_requires_observability() {
        let w = real_matrix(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let u = real_matrix(1, 2, &[1.0, 0.0]);
        assert!(matches!(build_psi(&u, &w), Err(Error::Singular(_))));
    }

    #[test]
    fn blaschke_examples() {
        let lam = c(0.4, 2.0);
        let b = blaschke_factor(re(1.0), &identity(1)).unwrap();
        assert!((b.eval(lam).unwrap()[(0, 0)] - (lam - 1.0) / (lam + 1.0)).norm() < 1e-15);
        let b = blaschke_factor(re(1.0), &CMatrix::zeros(2, 2)).unwrap();
        assert_eq!(b.state_dim(), 0);
        assert_eq!(b.eval(lam).unwrap(), identity(2));
        let b = blaschke_factor(re(1.0), &diag2(re(1.0), re(0.0))).unwrap();
        assert!(close(&b.eval(lam).unwrap(), &diag2((lam - 1.0) / (lam + 1.0), re(1.0)), 1e-15));
    }

    #[test]
    fn blaschke_value_at_zero_is_complementary_projection() {
        let v = numkit::CMatrix::from_column_slice(2, 1, &[c(0.6, 0.0), c(0.0, 0.8)]);
        let p = &v * v.adjoint();
        let alpha = c(0.5, -1.0);
        let b = blaschke_factor(alpha, &p).unwrap();
        assert!(close(&b.eval(alpha).unwrap(), &(identity(2) - &p), 1e-14));
    }

    #[test]
    fn blaschke_rejects_non_projection() {
        assert!(matches!(
            blaschke_factor(re(1.0), &real_matrix(1, 1, &[0.5])),
            Err(Error::InvalidProjection(_))
        ));
        assert!(matches!(
            blaschke_factor(re(1.0), &real_matrix(2, 2, &[1.0, 1.0, 0.0, 0.0])),
            Err(Error::InvalidProjection(_))
        ));
        assert!(blaschke_factor(re(-1.0), &identity(1)).is_err());
    }

    #[test]
    fn kernel_examples() {
        let t1 = build_theta(&fixtures::d1()).unwrap();
        let k = theta_kernel(&t1, re(1.0), re(1.0)).unwrap();
        assert!(close(&k.lhs, &diag2(re(0.5), re(0.0)), 1e-15));
        assert!(close(&k.rhs, &diag2(re(0.5), re(0.0)), 1e-15));
        assert!(k.defect < 1e-15);

        let t3 = build_theta(&fixtures::d3()).unwrap();
        let k = theta_kernel(&t3, re(2.0), re(2.0)).unwrap();
        assert!(k.defect < 1e-14);
        let eig = numkit::hermitian_eigenvalues(&k.rhs).unwrap();
        assert!(eig[0] < -1e-3);

        assert!(theta_kernel(&t1, c(0.0, 1.0), c(0.0, 1.0)).is_err());
    }

    #[test]
    fn j_unitarity_examples() {
        assert!(j_unitarity_defect(&build_theta(&fixtures::d1()).unwrap(), 0.7).unwrap() <= 1e-12);
        assert!(j_unitarity_defect(&build_theta(&fixtures::d3()).unwrap(), 2.0).unwrap() <= 1e-12);
        assert!(j_unitarity_defect(&build_theta(&fixtures::d2()).unwrap(), 1e6).unwrap() <= 1e-9);
    }

    #[test]
    fn series_and_zeros() {
        let f = blaschke_factor(re(1.0), &identity(1)).unwrap();
        let g = blaschke_factor(re(2.0), &identity(1)).unwrap();
        let fg = f.series(&g).unwrap();
        let lam = c(0.3, 0.8);
        let expect = f.eval(lam).unwrap() * g.eval(lam).unwrap();
        assert!(close(&fg.eval(lam).unwrap(), &expect, 1e-15));
        let mut zeros: Vec<f64> = fg.zeros().unwrap().iter().map(|z| z.re).collect();
        zeros.sort_by(f64::total_cmp);
        assert!((zeros[0] - 1.0).abs() < 1e-12 && (zeros[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn realization_json_roundtrip() {
        let theta = build_theta(&fixtures::d3()).unwrap();
        let v = theta.base.to_value();
        let back = Realization::from_value(&v, "theta").unwrap();
        assert_eq!(back, theta.base);
        let constant = Realization::constant(real_matrix(1, 1, &[0.5]));
        assert_eq!(Realization::from_value(&constant.to_value(), "g").unwrap(), constant);
    }
}
