//! Interpolants `S = (Θ₁₁G + Θ₁₂)(Θ₂₁G + Θ₂₂)⁻¹` from free parameters.

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::datasets::BtoaData;
use crate::error::{Error, Result};
use crate::json;
use crate::numkit::{self, c, identity, CMatrix};
use crate::realization::{build_psi, build_theta, MatrixFunction, PsiRealization, Realization, ThetaRealization};

/// Condition number above which the LFT denominator counts as singular.
pub const DENOMINATOR_COND: f64 = 1e12;
/// Radius of the circles used to take limits at the nodes.
pub const SIDE_RADIUS: f64 = 1e-4;
/// Axis samples used to certify a realization-type parameter.
pub const CONTRACTIVITY_SAMPLES: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub enum FreeParameter {
    Constant(CMatrix),
    Realization(Realization),
}

impl FreeParameter {
    /// A constant contraction.
    pub fn constant(g: CMatrix) -> Result<Self> {
        numkit::ensure_finite(&g, "G")?;
        let norm = numkit::spectral_norm(&g);
        if norm > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!("constant G has norm {norm} > 1")));
        }
        Ok(FreeParameter::Constant(g))
    }

    pub fn zero(p: usize, m: usize) -> Self {
        FreeParameter::Constant(CMatrix::zeros(p, m))
    }

    /// A stable realization, checked for contractivity on a grid of the
    /// imaginary axis.
    pub fn realization(r: Realization) -> Result<Self> {
        if let Some(pole) = r.poles().into_iter().find(|p| p.re >= 0.0) {
            return Err(Error::InvalidParameter(format!("G has a pole at {pole} outside the open left half plane")));
        }
        let mut worst = numkit::spectral_norm(r.d());
        for k in 0..CONTRACTIVITY_SAMPLES {
            let theta = std::f64::consts::PI * ((k as f64 + 0.5) / CONTRACTIVITY_SAMPLES as f64 - 0.5);
            worst = worst.max(numkit::spectral_norm(&r.eval(c(0.0, theta.tan()))?));
        }
        if worst > 1.0 + 1e-10 {
            return Err(Error::InvalidParameter(format!("G has sampled axis norm {worst} > 1")));
        }
        Ok(FreeParameter::Realization(r))
    }

    pub fn as_realization(&self) -> Realization {
        match self {
            FreeParameter::Constant(g) => Realization::constant(g.clone()),
            FreeParameter::Realization(r) => r.clone(),
        }
    }

    pub fn to_value(&self) -> Value {
        match self {
            FreeParameter::Constant(g) => json!({"kind": "constant", "value": json::matrix_to_value(g)}),
            FreeParameter::Realization(r) => {
                let mut v = r.to_value();
                v["kind"] = json!("realization");
                v
            }
        }
    }

    /// Decode a parameter file; `(p, m)` fixes the shape of an empty value.
    pub fn from_value(v: &Value, p: usize, m: usize) -> Result<Self> {
        let kind = json::field(v, "kind", "")?
            .as_str()
            .ok_or_else(|| Error::parse("kind", "expected a string"))?;
        let g = match kind {
            "constant" => FreeParameter::constant(json::matrix_with_shape(json::field(v, "value", "")?, "value", p, m)?)?,
            "realization" => FreeParameter::realization(Realization::from_value(v, "")?)?,
            other => return Err(Error::parse("kind", format!("unknown parameter kind {other:?}"))),
        };
        if g.shape() != (p, m) {
            return Err(Error::mismatch("G", format!("{p}x{m}"), format!("{}x{}", g.shape().0, g.shape().1)));
        }
        Ok(g)
    }
}

impl MatrixFunction for FreeParameter {
    fn shape(&self) -> (usize, usize) {
        match self {
            FreeParameter::Constant(g) => g.shape(),
            FreeParameter::Realization(r) => r.shape(),
        }
    }
    fn eval(&self, lambda: Complex64) -> Result<CMatrix> {
        match self {
            FreeParameter::Constant(g) => Ok(g.clone()),
            FreeParameter::Realization(r) => r.eval(lambda),
        }
    }
    fn value_at_infinity(&self) -> Option<CMatrix> {
        match self {
            FreeParameter::Constant(g) => Some(g.clone()),
            FreeParameter::Realization(r) => r.value_at_infinity(),
        }
    }
    fn poles(&self) -> Vec<Complex64> {
        match self {
            FreeParameter::Constant(_) => Vec::new(),
            FreeParameter::Realization(r) => r.poles(),
        }
    }
}

/// `S(λ)` for the parameter `G`.
pub fn lft_apply(theta: &ThetaRealization, g: &FreeParameter, lambda: Complex64) -> Result<CMatrix> {
    let full = theta.eval(lambda)?;
    let [[t11, t12], [t21, t22]] = theta.split(&full);
    let gv = g.eval(lambda)?;
    let scale = numkit::spectral_norm(&full) * numkit::spectral_norm(&gv).max(1.0);
    let num = t11 * &gv + t12;
    let den = t21 * &gv + t22;
    let sv = numkit::singular_values(&den);
    let (smax, smin) = (sv.first().copied().unwrap_or(0.0), sv.last().copied().unwrap_or(0.0));
    if !(smin > 0.0) || smax.max(scale) / smin > DENOMINATOR_COND {
        return Err(Error::SingularDenominator {
            point: lambda,
            sigma_min: smin,
        });
    }
    numkit::solve_right(&num, &den)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SideCondition {
    /// Eigenvalues of `Z` followed by those of `W`.
    pub nodes: Vec<Complex64>,
    /// `det(ψ(Θ₂₁G + Θ₂₂))` at each node, as a small-circle limit.
    pub values: Vec<Complex64>,
    /// Infinite when there are no nodes.
    pub min_abs: f64,
    pub ok: bool,
}

/// Realization of `ψ(Θ₂₁G + Θ₂₂)`.
pub fn denominator(theta: &ThetaRealization, psi: &PsiRealization, g: &FreeParameter) -> Result<Realization> {
    let m = theta.m();
    let g = g.as_realization();
    let n = g.state_dim();
    let mut c_stack = CMatrix::zeros(g.d().nrows() + m, n);
    c_stack.view_mut((0, 0), (g.d().nrows(), n)).copy_from(g.c());
    let mut d_stack = CMatrix::zeros(g.d().nrows() + m, m);
    d_stack.view_mut((0, 0), g.d().shape()).copy_from(g.d());
    d_stack.view_mut((g.d().nrows(), 0), (m, m)).copy_from(&identity(m));
    let g_over_i = Realization::new(g.a().clone(), g.b().clone(), c_stack, d_stack)?;
    let bottom = theta.base.sub_block(theta.p()..theta.p() + m, 0..theta.p() + m);
    psi.base.series(&bottom.series(&g_over_i)?)
}

pub fn side_condition(
    d: &BtoaData,
    theta: &ThetaRealization,
    psi: &PsiRealization,
    g: &FreeParameter,
) -> Result<SideCondition> {
    let den = denominator(theta, psi, g)?;
    let (mut nodes, ws) = d.nodes()?;
    nodes.extend(ws);
    let mut values = Vec::with_capacity(nodes.len());
    for &node in &nodes {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..4 {
            let point = node + Complex64::from_polar(SIDE_RADIUS, std::f64::consts::FRAC_PI_2 * k as f64);
            acc += numkit::determinant(&den.eval(point)?)?;
        }
        values.push(acc / 4.0);
    }
    let min_abs = values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    Ok(SideCondition {
        ok: min_abs > 1e-8,
        nodes,
        values,
        min_abs,
    })
}

/// An interpolant bundled with the data used to build it.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpolant {
    pub theta: ThetaRealization,
    pub psi: PsiRealization,
    pub g: FreeParameter,
    /// `ν₋(Γ_D)`.
    pub kappa_expected: usize,
    pub side_condition: SideCondition,
    /// `ψ(Θ₂₁G + Θ₂₂)`, whose zeros in the right half plane are the poles of `S`.
    pub denominator: Realization,
    pole_candidates: Vec<Complex64>,
}

impl Interpolant {
    pub fn side_condition_ok(&self) -> bool {
        self.side_condition.ok
    }
}

pub fn make_interpolant(d: &BtoaData, g: FreeParameter) -> Result<Interpolant> {
    let theta = build_theta(d)?;
    if g.shape() != (d.p, d.m) {
        return Err(Error::mismatch(
            "G",
            format!("{}x{}", d.p, d.m),
            format!("{}x{}", g.shape().0, g.shape().1),
        ));
    }
    let psi = build_psi(&d.u, &d.w)?;
    let kappa_expected = numkit::hermitian_inertia_default(&theta.gamma_d)?.n_minus;
    let side = side_condition(d, &theta, &psi, &g)?;
    let den = denominator(&theta, &psi, &g)?;
    // Zeros of the denominator that sit on a node cancel against poles of Θ.
    let nodes = &side.nodes;
    let pole_candidates = den
        .zeros()?
        .into_iter()
        .filter(|z| nodes.iter().all(|n| (z - n).norm() > 1e-5 * (1.0 + n.norm())))
        .collect();
    Ok(Interpolant {
        theta,
        psi,
        g,
        kappa_expected,
        side_condition: side,
        denominator: den,
        pole_candidates,
    })
}

impl MatrixFunction for Interpolant {
    fn shape(&self) -> (usize, usize) {
        (self.theta.p(), self.theta.m())
    }
    fn eval(&self, lambda: Complex64) -> Result<CMatrix> {
        lft_apply(&self.theta, &self.g, lambda)
    }
    fn value_at_infinity(&self) -> Option<CMatrix> {
        self.g.value_at_infinity()
    }
    fn poles(&self) -> Vec<Complex64> {
        self.pole_candidates.clone()
    }
}
