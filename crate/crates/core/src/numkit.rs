//! Dense complex matrix primitives.
//!
//! Everything here works on [`CMatrix`], a dynamically sized complex matrix.
//! Problem sizes are small (state dimensions of a dozen or so), so the
//! routines favour directness over asymptotic efficiency: the Sylvester
//! solver vectorizes the equation with Kronecker products and hands it to a
//! dense LU factorization.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Relative singular-value cutoff used for Krylov rank tests.
pub const RANK_TOL: f64 = 1e-8;

/// Shorthand for building a complex scalar.
#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Build a matrix from row-major real entries.
pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(rows, cols, entries.iter().map(|&x| re(x)))
}

pub fn diag(values: &[Complex64]) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_row_slice(values))
}

pub fn ensure_square(a: &CMatrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NonSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(a.nrows())
}

pub fn ensure_finite(a: &CMatrix, name: &str) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(name.to_string()))
    }
}

/// Largest singular value; zero for empty matrices.
pub fn spectral_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0_f64, |acc, &s| acc.max(s))
}

/// Singular values in decreasing order.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn numerical_rank(a: &CMatrix, rel_tol: f64) -> usize {
    let s = singular_values(a);
    match s.first() {
        Some(&smax) if smax > 0.0 => s.iter().filter(|&&x| x > rel_tol * smax).count(),
        _ => 0,
    }
}

/// Solve `A X = B` by LU with partial pivoting.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let n = ensure_square(a)?;
    if b.nrows() != n {
        return Err(Error::mismatch(
            "linear solve",
            format!("{n} right-hand-side rows"),
            b.nrows().to_string(),
        ));
    }
    if n == 0 {
        return Ok(CMatrix::zeros(0, b.ncols()));
    }
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Singular("LU factorization hit a zero pivot".into()))
}

/// Solve `X A = B`.
pub fn solve_right(b: &CMatrix, a: &CMatrix) -> Result<CMatrix> {
    Ok(solve(&a.transpose(), &b.transpose())?.transpose())
}

pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    let n = ensure_square(a)?;
    solve(a, &identity(n))
}

pub fn determinant(a: &CMatrix) -> Result<Complex64> {
    let n = ensure_square(a)?;
    if n == 0 {
        return Ok(re(1.0));
    }
    Ok(a.clone().lu().determinant())
}

/// `(H + H*) / 2`.
pub fn hermitian_part(h: &CMatrix) -> CMatrix {
    (h + h.adjoint()) * re(0.5)
}

/// Eigenvalues of a square matrix, with multiplicity, from a complex Schur form.
pub fn spectrum(a: &CMatrix) -> Result<Vec<Complex64>> {
    let n = ensure_square(a)?;
    ensure_finite(a, "spectrum input")?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let schur = a
        .clone()
        .try_schur(f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// Eigenvalues of a Hermitian matrix in increasing order. The input is
/// symmetrized before decomposition.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Result<Vec<f64>> {
    let n = ensure_square(h)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut ev: Vec<f64> = hermitian_part(h)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Solve `M X + X N = Q` by Kronecker vectorization
/// `(I ⊗ M + Nᵀ ⊗ I) vec(X) = vec(Q)`.
///
/// The equation has a unique solution iff no eigenvalue of `M` is the
/// negative of an eigenvalue of `N`. Separation below
/// `1e-9 · max(1, ‖M‖_F + ‖N‖_F)` is reported as [`Error::SpectralOverlap`].
pub fn solve_sylvester(m: &CMatrix, n: &CMatrix, q: &CMatrix) -> Result<CMatrix> {
    let rows = ensure_square(m)?;
    let cols = ensure_square(n)?;
    if q.shape() != (rows, cols) {
        return Err(Error::mismatch(
            "Sylvester right-hand side",
            format!("{rows}x{cols}"),
            format!("{}x{}", q.nrows(), q.ncols()),
        ));
    }
    if rows == 0 || cols == 0 {
        return Ok(CMatrix::zeros(rows, cols));
    }

    let mu = spectrum(m)?;
    let nu = spectrum(n)?;
    let separation = mu
        .iter()
        .flat_map(|a| nu.iter().map(move |b| (a + b).norm()))
        .fold(f64::INFINITY, f64::min);
    let tolerance = 1e-9 * (m.norm() + n.norm()).max(1.0);
    if separation < tolerance {
        return Err(Error::SpectralOverlap {
            separation,
            tolerance,
        });
    }

    let size = rows * cols;
    let mut k = CMatrix::zeros(size, size);
    // Column-major vec: entry (i, j) of X lives at j * rows + i.
    for j in 0..cols {
        for i in 0..rows {
            let row = j * rows + i;
            for l in 0..rows {
                k[(row, j * rows + l)] += m[(i, l)];
            }
            for l in 0..cols {
                k[(row, l * rows + i)] += n[(l, j)];
            }
        }
    }
    let rhs = CMatrix::from_iterator(size, 1, q.iter().copied());
    let x = solve(&k, &rhs)?;
    Ok(CMatrix::from_iterator(rows, cols, x.iter().copied()))
}

/// Signature of a Hermitian matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inertia {
    pub n_plus: usize,
    pub n_zero: usize,
    pub n_minus: usize,
    pub tolerance: f64,
}

impl Inertia {
    pub fn dim(&self) -> usize {
        self.n_plus + self.n_zero + self.n_minus
    }

    /// Compare counts only, ignoring the tolerance that produced them.
    pub fn same_counts(&self, other: &Inertia) -> bool {
        (self.n_plus, self.n_zero, self.n_minus) == (other.n_plus, other.n_zero, other.n_minus)
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        (self.n_plus, self.n_zero, self.n_minus)
    }

    /// Default zero threshold `1e-8 · max(1, ‖H‖_F)`.
    pub fn default_tolerance(h: &CMatrix) -> f64 {
        1e-8 * h.norm().max(1.0)
    }
}

/// Count positive, zero and negative eigenvalues of `h`, classifying
/// `|λ| ≤ tol` as zero.
pub fn hermitian_inertia(h: &CMatrix, tol: f64) -> Result<Inertia> {
    ensure_square(h)?;
    ensure_finite(h, "inertia input")?;
    let asymmetry = (h - h.adjoint()).norm();
    let threshold = 1e-12 * h.norm();
    if asymmetry > threshold {
        return Err(Error::NotHermitian {
            asymmetry,
            threshold,
        });
    }
    let ev = hermitian_eigenvalues(h)?;
    let mut inertia = Inertia {
        n_plus: 0,
        n_zero: 0,
        n_minus: 0,
        tolerance: tol,
    };
    for lam in ev {
        if lam > tol {
            inertia.n_plus += 1;
        } else if lam < -tol {
            inertia.n_minus += 1;
        } else {
            inertia.n_zero += 1;
        }
    }
    Ok(inertia)
}

pub fn hermitian_inertia_default(h: &CMatrix) -> Result<Inertia> {
    hermitian_inertia(h, Inertia::default_tolerance(h))
}

/// `[X, ZX, …, Zⁿ⁻¹X]`.
fn krylov_columns(z: &CMatrix, x: &CMatrix) -> CMatrix {
    let n = z.nrows();
    let q = x.ncols();
    let mut k = CMatrix::zeros(n, n * q);
    let mut block = x.clone();
    for step in 0..n {
        k.view_mut((0, step * q), (n, q)).copy_from(&block);
        block = z * &block;
    }
    k
}

/// Whether `(Z, X)` is controllable: `rank [X, ZX, …, Zⁿ⁻¹X] = n` with
/// singular values cut off at `tol · σ_max`.
pub fn pair_controllable(z: &CMatrix, x: &CMatrix, tol: f64) -> Result<bool> {
    let n = ensure_square(z)?;
    if x.nrows() != n {
        return Err(Error::mismatch(
            "controllability pair",
            format!("{n} rows in input matrix"),
            x.nrows().to_string(),
        ));
    }
    if n == 0 {
        return Ok(true);
    }
    Ok(numerical_rank(&krylov_columns(z, x), tol) == n)
}

/// Whether `(U, W)` is observable, by duality with [`pair_controllable`].
pub fn pair_observable(u: &CMatrix, w: &CMatrix, tol: f64) -> Result<bool> {
    let n = ensure_square(w)?;
    if u.ncols() != n {
        return Err(Error::mismatch(
            "observability pair",
            format!("{n} columns in output matrix"),
            u.ncols().to_string(),
        ));
    }
    if n == 0 {
        return Ok(true);
    }
    Ok(numerical_rank(&krylov_columns(&w.adjoint(), &u.adjoint()), tol) == n)
}
