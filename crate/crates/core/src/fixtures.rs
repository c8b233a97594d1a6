//! Small hand-checkable data sets and seeded random generators.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::datasets::{aggregate_from_simple, validate_admissible_default, BtoaData, Dataset, LeftNode, RightNode, SimpleData};
use crate::numkit::{self, real_matrix, CMatrix};
use crate::pick;

fn scalar(x: f64) -> CMatrix {
    real_matrix(1, 1, &[x])
}

fn empty(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

/// One left node `z = 1` with `x = 1`, `y = 0`.
pub fn d1_simple() -> SimpleData {
    SimpleData {
        p: 1,
        m: 1,
        left: vec![LeftNode {
            z: Complex64::new(1.0, 0.0),
            x: scalar(1.0),
            y: scalar(0.0),
        }],
        right: vec![],
        rho: BTreeMap::new(),
    }
}

pub fn d1() -> BtoaData {
    BtoaData {
        z: scalar(1.0),
        x: scalar(1.0),
        y: scalar(0.0),
        w: empty(0, 0),
        u: empty(1, 0),
        v: empty(1, 0),
        gamma: empty(1, 0),
        p: 1,
        m: 1,
    }
}

/// One right node `w = 1` with `u = 1`, `v = 0`.
pub fn d2() -> BtoaData {
    BtoaData {
        z: empty(0, 0),
        x: empty(0, 1),
        y: empty(0, 1),
        w: scalar(1.0),
        u: scalar(1.0),
        v: scalar(0.0),
        gamma: empty(0, 1),
        p: 1,
        m: 1,
    }
}

/// One left node `z = 1` with `x = 1`, `y = 2`: not Schur solvable.
pub fn d3() -> BtoaData {
    BtoaData {
        y: scalar(2.0),
        ..d1()
    }
}

/// Left and right node both at `1`, `x = u = 1`, `y = v = 1/2`, coupling `rho`.
pub fn d4_simple(rho: Complex64) -> SimpleData {
    SimpleData {
        p: 1,
        m: 1,
        left: vec![LeftNode {
            z: Complex64::new(1.0, 0.0),
            x: scalar(1.0),
            y: scalar(0.5),
        }],
        right: vec![RightNode {
            w: Complex64::new(1.0, 0.0),
            u: scalar(1.0),
            v: scalar(0.5),
        }],
        rho: BTreeMap::from([((0, 0), rho)]),
    }
}

pub fn d4(rho: Complex64) -> BtoaData {
    aggregate_from_simple(&d4_simple(rho)).expect("fixture is valid")
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform in the box `[re.0, re.1] × [im.0, im.1]i`.
pub fn random_complex<R: Rng>(rng: &mut R, re: (f64, f64), im: (f64, f64)) -> Complex64 {
    Complex64::new(rng.gen_range(re.0..=re.1), rng.gen_range(im.0..=im.1))
}

/// Entries uniform in the unit box.
pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| random_complex(rng, (-1.0, 1.0), (-1.0, 1.0)))
}

/// Node in `[0.2, 3] × [−2, 2]i`.
pub fn random_node<R: Rng>(rng: &mut R) -> Complex64 {
    random_complex(rng, (0.2, 3.0), (-2.0, 2.0))
}

/// A strict contraction with norm uniform in `[0, 1)`.
pub fn random_contraction<R: Rng>(rng: &mut R, p: usize, m: usize) -> CMatrix {
    let g = random_matrix(rng, p, m);
    let norm = numkit::spectral_norm(&g);
    if norm == 0.0 {
        return g;
    }
    let target: f64 = rng.gen_range(0.0..1.0);
    g * Complex64::new(target / norm, 0.0)
}

/// Node data with up to four nodes per side and `p, m ≤ 3`. Target values
/// are scaled by `scale`. With `coincide`, some right nodes are moved onto
/// left nodes and the right values adjusted for compatibility.
pub fn random_simple<R: Rng>(rng: &mut R, scale: f64, coincide: bool) -> SimpleData {
    loop {
        let p = rng.gen_range(1..=3);
        let m = rng.gen_range(1..=3);
        let nl = rng.gen_range(0..=4);
        let nr = rng.gen_range(0..=4);
        if nl + nr == 0 {
            continue;
        }
        let left: Vec<LeftNode> = (0..nl)
            .map(|_| LeftNode {
                z: random_node(rng),
                x: random_matrix(rng, 1, p),
                y: random_matrix(rng, 1, m) * Complex64::new(scale, 0.0),
            })
            .collect();
        let mut right: Vec<RightNode> = (0..nr)
            .map(|_| RightNode {
                w: random_node(rng),
                u: random_matrix(rng, m, 1),
                v: random_matrix(rng, p, 1) * Complex64::new(scale, 0.0),
            })
            .collect();
        let mut rho = BTreeMap::new();
        if coincide && nl > 0 {
            let mut taken = Vec::new();
            for (j, r) in right.iter_mut().enumerate() {
                if !rng.gen_bool(0.5) {
                    continue;
                }
                let i = rng.gen_range(0..nl);
                if taken.contains(&i) {
                    continue;
                }
                taken.push(i);
                let l = &left[i];
                r.w = l.z;
                // Project v so that x v = y u.
                let gap = (&l.y * &r.u)[(0, 0)] - (&l.x * &r.v)[(0, 0)];
                let xx = (&l.x * l.x.adjoint())[(0, 0)];
                r.v += l.x.adjoint() * (gap / xx);
                rho.insert((i, j), random_complex(rng, (-1.0, 1.0), (-1.0, 1.0)) * scale);
            }
        }
        let d = SimpleData { p, m, left, right, rho };
        let separated = d.left.iter().enumerate().all(|(i, a)| {
            d.left[..i].iter().all(|b| (a.z - b.z).norm() > 0.05)
        }) && d.right.iter().enumerate().all(|(j, a)| {
            d.right[..j].iter().all(|b| (a.w - b.w).norm() > 0.05)
        }) && d.left.iter().all(|a| {
            d.right.iter().all(|b| SimpleData::coincide(a.z, b.w) || (a.z - b.w).norm() > 0.05)
        });
        if separated && d.validate().is_ok() {
            return d;
        }
    }
}

/// General septet with non-normal `Z`, `W` and `Γ` solved from the
/// Sylvester equation.
pub fn random_btoa<R: Rng>(rng: &mut R, scale: f64) -> BtoaData {
    loop {
        let p = rng.gen_range(1..=3);
        let m = rng.gen_range(1..=3);
        let nz = rng.gen_range(0..=3);
        let nw = rng.gen_range(0..=3);
        if nz + nw == 0 {
            continue;
        }
        let non_normal = |rng: &mut R, n: usize| -> Option<CMatrix> {
            let eigs: Vec<Complex64> = (0..n).map(|_| random_node(rng)).collect();
            let t = numkit::identity(n) + random_matrix(rng, n, n) * Complex64::new(0.3, 0.0);
            numkit::solve_right(&(&t * numkit::diag(&eigs)), &t).ok()
        };
        let (Some(z), Some(w)) = (non_normal(rng, nz), non_normal(rng, nw)) else {
            continue;
        };
        let s = Complex64::new(scale, 0.0);
        let x = random_matrix(rng, nz, p);
        let y = random_matrix(rng, nz, m) * s;
        let u = random_matrix(rng, m, nw);
        let v = random_matrix(rng, p, nw) * s;
        let Ok(gamma) = numkit::solve_sylvester(&(-&z), &w, &(&x * &v - &y * &u)) else {
            continue;
        };
        let Ok(d) = BtoaData::new(z, x, y, w, u, v, gamma, p, m) else {
            continue;
        };
        match validate_admissible_default(&d) {
            Ok(r) if r.verdict => return d,
            _ => continue,
        }
    }
}

/// `|λ|_min / |λ|_max` of the Pick matrix, or `None` when it cannot be formed.
fn pick_spread(d: &BtoaData) -> Option<(usize, f64)> {
    let report = pick::pick_matrix(d, None).ok()?;
    let eig = numkit::hermitian_eigenvalues(&report.gamma_d).ok()?;
    let max = eig.iter().fold(0.0f64, |a, e| a.max(e.abs()));
    let min = eig.iter().fold(f64::INFINITY, |a, e| a.min(e.abs()));
    Some((report.inertia.n_minus, min / max))
}

/// Rejection-sample an admissible data set whose Pick matrix has exactly
/// `kappa` negative eigenvalues, with `|λ|_min ≥ 10⁻⁴·|λ|_max`. Simple data
/// when `simple` is set, general septets otherwise.
pub fn random_with_kappa<R: Rng>(rng: &mut R, kappa: usize, simple: bool) -> Dataset {
    for _ in 0..100_000 {
        let scale = if kappa == 0 {
            rng.gen_range(0.0..0.9)
        } else {
            rng.gen_range(0.8..3.0)
        };
        let ds = if simple {
            Dataset::Simple(random_simple(rng, scale, false))
        } else {
            Dataset::Btoa(random_btoa(rng, scale))
        };
        let Ok(d) = ds.to_btoa() else { continue };
        if !validate_admissible_default(&d).map(|r| r.verdict).unwrap_or(false) {
            continue;
        }
        match pick_spread(&d) {
            Some((neg, spread)) if neg == kappa && spread >= 1e-4 => return ds,
            _ => continue,
        }
    }
    panic!("no data set with kappa = {kappa} found");
}
