//! Winding numbers of determinants along the imaginary axis, traversed from
//! `+i∞` to `−i∞` so that the count is zeros minus poles in the right half
//! plane.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::datasets::BtoaData;
use crate::error::{Error, Result};
use crate::lft::{make_interpolant, FreeParameter, Interpolant};
use crate::numkit::{self, c};
use crate::realization::MatrixFunction;

#[derive(Debug, Clone, PartialEq)]
pub struct WindingConfig {
    pub y_max: f64,
    pub initial_samples: usize,
    /// Total sample budget including refinements.
    pub refinement_limit: usize,
}

impl Default for WindingConfig {
    fn default() -> Self {
        WindingConfig {
            y_max: 1e4,
            initial_samples: 4096,
            refinement_limit: 1 << 20,
        }
    }
}

const MAX_STEP: f64 = PI / 2.0;
const MIN_DET: f64 = 1e-10;

fn det_at<F: MatrixFunction>(f: &F, y: f64) -> Result<Complex64> {
    let v = f.eval(c(0.0, y)).map_err(|e| Error::Winding(format!("evaluation at {y}i failed: {e}")))?;
    let d = numkit::determinant(&v)?;
    if !(d.norm() > MIN_DET) {
        return Err(Error::Winding(format!("determinant vanishes on the axis near {y}i: |det| = {:e}", d.norm())));
    }
    Ok(d)
}

/// Winding number of `det f(iy)`, closed through `det f(∞)`.
pub fn winding_det<F: MatrixFunction>(f: &F, cfg: &WindingConfig) -> Result<i64> {
    let at_inf = f
        .value_at_infinity()
        .ok_or_else(|| Error::Winding("no value at infinity".into()))?;
    let d_inf = numkit::determinant(&at_inf)?;
    if !(d_inf.norm() > MIN_DET) {
        return Err(Error::Winding("determinant vanishes at infinity".into()));
    }
    if cfg.initial_samples < 2 {
        return Err(Error::Winding("initial_samples must be at least 2".into()));
    }
    let theta_max = cfg.y_max.atan();
    let n = cfg.initial_samples;
    let thetas: Vec<f64> = (0..n)
        .map(|k| theta_max - 2.0 * theta_max * k as f64 / (n - 1) as f64)
        .collect();
    let mut samples = Vec::with_capacity(n);
    for &t in &thetas {
        samples.push((t, det_at(f, t.tan())?));
    }
    let mut used = n;
    let mut total = 0.0;
    for pair in samples.windows(2) {
        // Depth-first bisection of the interval until every step is small.
        let mut stack = vec![(pair[0], pair[1])];
        while let Some(((t0, d0), (t1, d1))) = stack.pop() {
            let step = (d1 / d0).arg();
            if step.abs() <= MAX_STEP {
                total += step;
                continue;
            }
            if used >= cfg.refinement_limit {
                return Err(Error::Winding(format!(
                    "argument unwrapping did not converge within {} samples",
                    cfg.refinement_limit
                )));
            }
            let tm = 0.5 * (t0 + t1);
            let dm = det_at(f, tm.tan())?;
            used += 1;
            stack.push(((tm, dm), (t1, d1)));
            stack.push(((t0, d0), (tm, dm)));
        }
    }
    let (first, last) = (samples[0].1, samples[n - 1].1);
    let close_out = (d_inf / last).arg();
    let close_in = (first / d_inf).arg();
    if close_out.abs() > MAX_STEP || close_in.abs() > MAX_STEP {
        return Err(Error::Winding(format!(
            "determinant at y = ±{} is not close to its value at infinity; increase y_max",
            cfg.y_max
        )));
    }
    total += close_out + close_in;
    let turns = total / (2.0 * PI);
    let rounded = turns.round();
    if (turns - rounded).abs() >= 0.1 {
        return Err(Error::Winding(format!("winding {turns} is not near an integer")));
    }
    Ok(rounded as i64)
}

/// Total pole multiplicity of the interpolant in the right half plane.
pub fn pole_count(s: &Interpolant, cfg: &WindingConfig) -> Result<usize> {
    let w = winding_det(&s.denominator, cfg)?;
    usize::try_from(w).map_err(|_| Error::Winding(format!("negative zero count {w} for the denominator")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KappaCertificate {
    pub kappa_pick: usize,
    pub wno_theta22: i64,
    pub wno_psi: i64,
    pub wno_psi_inv: i64,
    /// `wno det Θ₂₂ + wno det ψ = κ`.
    pub wno_identity_ok: bool,
    pub pole_count_s: usize,
    pub side_condition_ok: bool,
    pub certified: bool,
}

pub fn certify(s: &Interpolant, cfg: &WindingConfig) -> Result<KappaCertificate> {
    let kappa_pick = s.kappa_expected;
    let wno_theta22 = winding_det(&s.theta.block(2, 2), cfg)?;
    let wno_psi = winding_det(&s.psi.base, cfg)?;
    let wno_psi_inv = winding_det(&s.psi.inverse, cfg)?;
    let wno_identity_ok = wno_theta22 + wno_psi == kappa_pick as i64;
    let pole_count_s = pole_count(s, cfg)?;
    let side_condition_ok = s.side_condition_ok();
    Ok(KappaCertificate {
        kappa_pick,
        wno_theta22,
        wno_psi,
        wno_psi_inv,
        wno_identity_ok,
        pole_count_s,
        side_condition_ok,
        certified: side_condition_ok && wno_identity_ok && pole_count_s == kappa_pick,
    })
}

pub fn kappa_certificate(d: &BtoaData, g: FreeParameter, cfg: &WindingConfig) -> Result<KappaCertificate> {
    certify(&make_interpolant(d, g)?, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::numkit::{identity, re, CMatrix};
    use crate::realization::{blaschke_factor, ClosureFunction, Realization};

    fn cfg() -> WindingConfig {
        WindingConfig::default()
    }

    #[test]
    fn winding_examples() {
        assert_eq!(winding_det(&Realization::constant(identity(2)), &cfg()).unwrap(), 0);
        let b = blaschke_factor(re(1.0), &identity(1)).unwrap();
        assert_eq!(winding_det(&b, &cfg()).unwrap(), 1);
        assert_eq!(winding_det(&b.series(&b).unwrap(), &cfg()).unwrap(), 2);
    }

    #[test]
    fn winding_counts_poles_negatively() {
        let f = ClosureFunction::new(1, 1, |l: Complex64| CMatrix::from_element(1, 1, (l + 1.0) / (l - 1.0)))
            .with_infinity(identity(1));
        assert_eq!(winding_det(&f, &cfg()).unwrap(), -1);
    }

    #[test]
    fn winding_rejects_axis_zero() {
        let f = ClosureFunction::new(1, 1, |l: Complex64| CMatrix::from_element(1, 1, (l - c(0.0, 0.0)) / (l + 1.0)))
            .with_infinity(identity(1));
        // the zero sits exactly on a sample point of the symmetric grid
        let cfg = WindingConfig {
            initial_samples: 4097,
            ..cfg()
        };
        assert!(matches!(winding_det(&f, &cfg), Err(Error::Winding(_))));
        let no_inf = ClosureFunction::new(1, 1, |_| identity(1));
        assert!(winding_det(&no_inf, &WindingConfig::default()).is_err());
    }

    #[test]
    fn refinement_handles_fast_rotation() {
        // Zeros packed near the axis make the argument turn quickly.
        let mut f = blaschke_factor(c(0.08, 5.0), &identity(1)).unwrap();
        for k in 1..4 {
            f = f.series(&blaschke_factor(c(0.08, 5.0 + 1e-3 * k as f64), &identity(1)).unwrap()).unwrap();
        }
        assert_eq!(winding_det(&f, &cfg()).unwrap(), 4);
        let tight = WindingConfig {
            refinement_limit: 4096,
            ..cfg()
        };
        assert!(matches!(winding_det(&f, &tight), Err(Error::Winding(_))));
    }

    #[test]
    fn pole_count_examples() {
        let i3 = make_interpolant(&fixtures::d3(), FreeParameter::zero(1, 1)).unwrap();
        assert_eq!(pole_count(&i3, &cfg()).unwrap(), 1);
        let g = FreeParameter::constant(CMatrix::from_element(1, 1, re(0.5))).unwrap();
        let i1 = make_interpolant(&fixtures::d1(), g).unwrap();
        assert_eq!(pole_count(&i1, &cfg()).unwrap(), 0);
    }

    #[test]
    fn certificate_examples() {
        let k = kappa_certificate(&fixtures::d1(), FreeParameter::zero(1, 1), &cfg()).unwrap();
        assert_eq!((k.kappa_pick, k.wno_theta22, k.wno_psi, k.pole_count_s), (0, 0, 0, 0));
        assert!(k.certified);
        let k = kappa_certificate(&fixtures::d2(), FreeParameter::zero(1, 1), &cfg()).unwrap();
        assert_eq!((k.kappa_pick, k.wno_theta22, k.wno_psi, k.wno_psi_inv), (0, -1, 1, -1));
        assert!(k.certified);
        let k = kappa_certificate(&fixtures::d3(), FreeParameter::zero(1, 1), &cfg()).unwrap();
        assert_eq!((k.kappa_pick, k.wno_theta22, k.wno_psi, k.pole_count_s), (1, 1, 0, 1));
        assert!(k.certified);
    }

    #[test]
    fn side_condition_failure_blocks_certificate() {
        let g = FreeParameter::constant(CMatrix::from_element(1, 1, re(0.5))).unwrap();
        let k = kappa_certificate(&fixtures::d3(), g, &cfg()).unwrap();
        assert!(!k.side_condition_ok);
        assert!(!k.certified);
    }
}
