//! Problem instances: node-by-node simple data, the aggregate septet form,
//! admissibility checks and the JSON file format.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::json::{self, field, join};
use crate::numkit::{self, ensure_finite, CMatrix, RANK_TOL};

/// Nodes closer than this are treated as coinciding.
pub const COINCIDENCE_TOL: f64 = 1e-12;

/// Left condition `x S(z) = y`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeftNode {
    pub z: Complex64,
    /// 1×p row.
    pub x: CMatrix,
    /// 1×m row.
    pub y: CMatrix,
}

/// Right condition `S(w) u = v`.
#[derive(Debug, Clone, PartialEq)]
pub struct RightNode {
    pub w: Complex64,
    /// m×1 column.
    pub u: CMatrix,
    /// p×1 column.
    pub v: CMatrix,
}

/// Interpolation data given node by node, with derivative values `rho`
/// at pairs where a left and a right node coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleData {
    pub p: usize,
    pub m: usize,
    pub left: Vec<LeftNode>,
    pub right: Vec<RightNode>,
    pub rho: BTreeMap<(usize, usize), Complex64>,
}

impl SimpleData {
    pub fn coincide(z: Complex64, w: Complex64) -> bool {
        (z - w).norm() <= COINCIDENCE_TOL
    }

    /// Index pairs `(i, j)` with `z_i = w_j`.
    pub fn coinciding_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for (i, l) in self.left.iter().enumerate() {
            for (j, r) in self.right.iter().enumerate() {
                if Self::coincide(l.z, r.w) {
                    pairs.push((i, j));
                }
            }
        }
        pairs
    }

    /// Check every structural invariant: shapes, nodes in the right half
    /// plane, distinct nodes per side, nonzero directions, `rho` given
    /// exactly on coinciding pairs and compatibility `x_i v_j = y_i u_j`
    /// there.
    pub fn validate(&self) -> Result<()> {
        let (p, m) = (self.p, self.m);
        for (i, l) in self.left.iter().enumerate() {
            let path = format!("left[{i}]");
            if l.x.shape() != (1, p) || l.y.shape() != (1, m) {
                return Err(Error::mismatch(&path, format!("x 1x{p}, y 1x{m}"), format!(
                    "x {}x{}, y {}x{}",
                    l.x.nrows(),
                    l.x.ncols(),
                    l.y.nrows(),
                    l.y.ncols()
                )));
            }
            ensure_finite(&l.x, &path)?;
            ensure_finite(&l.y, &path)?;
            if !(l.z.re > 0.0) || !l.z.im.is_finite() {
                return Err(Error::InvalidData(format!("{path}: node {} is not in the right half plane", l.z)));
            }
            if l.x.iter().all(|c| c.norm() == 0.0) {
                return Err(Error::InvalidData(format!("{path}: direction x is zero")));
            }
            if self.left[..i].iter().any(|o| Self::coincide(o.z, l.z)) {
                return Err(Error::InvalidData(format!("{path}: repeated left node {}", l.z)));
            }
        }
        for (j, r) in self.right.iter().enumerate() {
            let path = format!("right[{j}]");
            if r.u.shape() != (m, 1) || r.v.shape() != (p, 1) {
                return Err(Error::mismatch(&path, format!("u {m}x1, v {p}x1"), format!(
                    "u {}x{}, v {}x{}",
                    r.u.nrows(),
                    r.u.ncols(),
                    r.v.nrows(),
                    r.v.ncols()
                )));
            }
            ensure_finite(&r.u, &path)?;
            ensure_finite(&r.v, &path)?;
            if !(r.w.re > 0.0) || !r.w.im.is_finite() {
                return Err(Error::InvalidData(format!("{path}: node {} is not in the right half plane", r.w)));
            }
            if r.u.iter().all(|c| c.norm() == 0.0) {
                return Err(Error::InvalidData(format!("{path}: direction u is zero")));
            }
            if self.right[..j].iter().any(|o| Self::coincide(o.w, r.w)) {
                return Err(Error::InvalidData(format!("{path}: repeated right node {}", r.w)));
            }
        }
        let pairs = self.coinciding_pairs();
        for &(i, j) in &pairs {
            let rho = self
                .rho
                .get(&(i, j))
                .ok_or_else(|| Error::InvalidData(format!("rho missing for coinciding pair ({i}, {j})")))?;
            if !(rho.re.is_finite() && rho.im.is_finite()) {
                return Err(Error::NonFinite(format!("rho ({i}, {j})")));
            }
            let (l, r) = (&self.left[i], &self.right[j]);
            let xv = (&l.x * &r.v)[(0, 0)];
            let yu = (&l.y * &r.u)[(0, 0)];
            let bound = 1e-10 * (1.0 + l.x.norm() * r.v.norm());
            if (xv - yu).norm() > bound {
                return Err(Error::InvalidData(format!(
                    "compatibility x_{i} v_{j} = y_{i} u_{j} violated at coinciding node {}: |difference| = {:e}",
                    l.z,
                    (xv - yu).norm()
                )));
            }
        }
        if let Some(&(i, j)) = self.rho.keys().find(|k| !pairs.contains(k)) {
            return Err(Error::InvalidData(format!("rho given for non-coinciding pair ({i}, {j})")));
        }
        Ok(())
    }
}

/// The aggregate septet `(Z, X, Y; U, V, W; Γ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BtoaData {
    /// n_Z × n_Z.
    pub z: CMatrix,
    /// n_Z × p.
    pub x: CMatrix,
    /// n_Z × m.
    pub y: CMatrix,
    /// n_W × n_W.
    pub w: CMatrix,
    /// m × n_W.
    pub u: CMatrix,
    /// p × n_W.
    pub v: CMatrix,
    /// n_Z × n_W.
    pub gamma: CMatrix,
    pub p: usize,
    pub m: usize,
}

impl BtoaData {
    /// Build with dimension checks only; admissibility is a separate
    /// question answered by [`validate_admissible`].
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        z: CMatrix,
        x: CMatrix,
        y: CMatrix,
        w: CMatrix,
        u: CMatrix,
        v: CMatrix,
        gamma: CMatrix,
        p: usize,
        m: usize,
    ) -> Result<Self> {
        let d = BtoaData { z, x, y, w, u, v, gamma, p, m };
        d.check_dimensions()?;
        Ok(d)
    }

    pub fn n_z(&self) -> usize {
        self.z.nrows()
    }

    pub fn n_w(&self) -> usize {
        self.w.nrows()
    }

    pub fn check_dimensions(&self) -> Result<()> {
        let nz = numkit::ensure_square(&self.z)?;
        let nw = numkit::ensure_square(&self.w)?;
        let (p, m) = (self.p, self.m);
        let expect = [
            ("X", &self.x, (nz, p)),
            ("Y", &self.y, (nz, m)),
            ("U", &self.u, (m, nw)),
            ("V", &self.v, (p, nw)),
            ("Gamma", &self.gamma, (nz, nw)),
        ];
        for (name, mat, shape) in expect {
            if mat.shape() != shape {
                return Err(Error::mismatch(
                    name,
                    format!("{}x{}", shape.0, shape.1),
                    format!("{}x{}", mat.nrows(), mat.ncols()),
                ));
            }
        }
        for (name, mat) in [
            ("Z", &self.z),
            ("X", &self.x),
            ("Y", &self.y),
            ("W", &self.w),
            ("U", &self.u),
            ("V", &self.v),
            ("Gamma", &self.gamma),
        ] {
            ensure_finite(mat, name)?;
        }
        Ok(())
    }

    /// `ΓW − ZΓ − (XV − YU)`.
    pub fn sylvester_defect(&self) -> CMatrix {
        &self.gamma * &self.w - &self.z * &self.gamma - (&self.x * &self.v - &self.y * &self.u)
    }

    /// Eigenvalues of Z followed by eigenvalues of W.
    pub fn nodes(&self) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        Ok((numkit::spectrum(&self.z)?, numkit::spectrum(&self.w)?))
    }
}

/// Form `(Z, X, Y, W, U, V, Γ)` from node data: diagonal `Z`, `W`, stacked
/// directions and `γ_ij = (x_i v_j − y_i u_j)/(w_j − z_i)`, or `ρ_ij` where
/// the nodes coincide.
pub fn aggregate_from_simple(d: &SimpleData) -> Result<BtoaData> {
    d.validate()?;
    let (p, m) = (d.p, d.m);
    let nz = d.left.len();
    let nw = d.right.len();
    let z = numkit::diag(&d.left.iter().map(|l| l.z).collect::<Vec<_>>());
    let w = numkit::diag(&d.right.iter().map(|r| r.w).collect::<Vec<_>>());
    let mut x = CMatrix::zeros(nz, p);
    let mut y = CMatrix::zeros(nz, m);
    for (i, l) in d.left.iter().enumerate() {
        x.row_mut(i).copy_from(&l.x);
        y.row_mut(i).copy_from(&l.y);
    }
    let mut u = CMatrix::zeros(m, nw);
    let mut v = CMatrix::zeros(p, nw);
    for (j, r) in d.right.iter().enumerate() {
        u.column_mut(j).copy_from(&r.u);
        v.column_mut(j).copy_from(&r.v);
    }
    let mut gamma = CMatrix::zeros(nz, nw);
    for (i, l) in d.left.iter().enumerate() {
        for (j, r) in d.right.iter().enumerate() {
            gamma[(i, j)] = if SimpleData::coincide(l.z, r.w) {
                d.rho[&(i, j)]
            } else {
                ((&l.x * &r.v)[(0, 0)] - (&l.y * &r.u)[(0, 0)]) / (r.w - l.z)
            };
        }
    }
    BtoaData::new(z, x, y, w, u, v, gamma, p, m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub spectra_ok: bool,
    pub controllable: bool,
    pub observable: bool,
    /// `‖ΓW − ZΓ − XV + YU‖_F`.
    pub sylvester_residual: f64,
    /// Per-entry Sylvester compatibility, row-major over Γ.
    pub compatible: Vec<bool>,
    pub verdict: bool,
}

/// Check the three admissibility conditions. `tol` is both the relative
/// singular-value cutoff for the rank tests and the relative threshold for
/// Sylvester compatibility.
pub fn validate_admissible(d: &BtoaData, tol: f64) -> Result<AdmissibilityReport> {
    d.check_dimensions()?;
    let (zs, ws) = d.nodes()?;
    let spectra_ok = zs.iter().chain(ws.iter()).all(|s| s.re > 0.0);
    let controllable = numkit::pair_controllable(&d.z, &d.x, tol)?;
    let observable = numkit::pair_observable(&d.u, &d.w, tol)?;
    let defect = d.sylvester_defect();
    let scale = 1.0
        + (&d.x * &d.v).norm()
        + (&d.y * &d.u).norm()
        + d.gamma.norm() * (d.w.norm() + d.z.norm());
    let compatible: Vec<bool> = defect
        .row_iter()
        .flat_map(|row| row.iter().map(|e| e.norm() <= tol * scale).collect::<Vec<_>>())
        .collect();
    let verdict = spectra_ok && controllable && observable && compatible.iter().all(|&ok| ok);
    Ok(AdmissibilityReport {
        spectra_ok,
        controllable,
        observable,
        sylvester_residual: defect.norm(),
        compatible,
        verdict,
    })
}

pub fn validate_admissible_default(d: &BtoaData) -> Result<AdmissibilityReport> {
    validate_admissible(d, RANK_TOL)
}

/// Either kind of input file.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Simple(SimpleData),
    Btoa(BtoaData),
}

impl Dataset {
    /// The aggregate form, converting simple data if needed.
    pub fn to_btoa(&self) -> Result<BtoaData> {
        match self {
            Dataset::Simple(s) => aggregate_from_simple(s),
            Dataset::Btoa(b) => Ok(b.clone()),
        }
    }
}

fn count(obj: &Value, key: &str) -> Result<Option<usize>> {
    match obj.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_u64()
            .map(|n| Some(n as usize))
            .ok_or_else(|| Error::parse(key, "expected a nonnegative integer")),
    }
}

fn parse_simple(root: &Value) -> Result<SimpleData> {
    let p = count(root, "p")?.ok_or_else(|| Error::parse("p", "missing field"))?;
    let m = count(root, "m")?.ok_or_else(|| Error::parse("m", "missing field"))?;
    let mut left = Vec::new();
    let left_items = field(root, "left", "")?
        .as_array()
        .ok_or_else(|| Error::parse("left", "expected an array"))?;
    for (i, item) in left_items.iter().enumerate() {
        let path = format!("left[{i}]");
        left.push(LeftNode {
            z: json::complex_from_value(field(item, "z", &path)?, &join(&path, "z"))?,
            x: json::matrix_with_shape(field(item, "x", &path)?, &join(&path, "x"), 1, p)?,
            y: json::matrix_with_shape(field(item, "y", &path)?, &join(&path, "y"), 1, m)?,
        });
    }
    let mut right = Vec::new();
    let right_items = field(root, "right", "")?
        .as_array()
        .ok_or_else(|| Error::parse("right", "expected an array"))?;
    for (j, item) in right_items.iter().enumerate() {
        let path = format!("right[{j}]");
        right.push(RightNode {
            w: json::complex_from_value(field(item, "w", &path)?, &join(&path, "w"))?,
            u: json::matrix_with_shape(field(item, "u", &path)?, &join(&path, "u"), m, 1)?,
            v: json::matrix_with_shape(field(item, "v", &path)?, &join(&path, "v"), p, 1)?,
        });
    }
    let mut rho = BTreeMap::new();
    if let Some(entries) = root.get("rho") {
        let entries = entries
            .as_array()
            .ok_or_else(|| Error::parse("rho", "expected an array"))?;
        for (k, e) in entries.iter().enumerate() {
            let path = format!("rho[{k}]");
            let idx = |key: &str| -> Result<usize> {
                field(e, key, &path)?
                    .as_u64()
                    .map(|n| n as usize)
                    .ok_or_else(|| Error::parse(join(&path, key), "expected a nonnegative integer"))
            };
            let (i, j) = (idx("i")?, idx("j")?);
            let value = json::complex_from_value(field(e, "value", &path)?, &join(&path, "value"))?;
            if rho.insert((i, j), value).is_some() {
                return Err(Error::parse(path, format!("duplicate rho entry ({i}, {j})")));
            }
        }
    }
    let data = SimpleData { p, m, left, right, rho };
    data.validate()?;
    Ok(data)
}

fn parse_btoa(root: &Value) -> Result<BtoaData> {
    let raw = |key: &str| -> Result<Option<CMatrix>> { json::matrix_from_value(field(root, key, "")?, key) };
    let z = raw("Z")?;
    let w = raw("W")?;
    let nz = match &z {
        Some(z) => numkit::ensure_square(z).map_err(|_| Error::parse("Z", "matrix must be square"))?,
        None => 0,
    };
    let nw = match &w {
        Some(w) => numkit::ensure_square(w).map_err(|_| Error::parse("W", "matrix must be square"))?,
        None => 0,
    };
    // p and m come from the nonempty side unless given explicitly.
    let x = raw("X")?;
    let y = raw("Y")?;
    let u = raw("U")?;
    let v = raw("V")?;
    let p = count(root, "p")?
        .or_else(|| x.as_ref().map(|x| x.ncols()))
        .or_else(|| v.as_ref().map(|v| v.nrows()))
        .ok_or_else(|| Error::parse("X", "cannot infer p: give \"p\" or a nonempty X or V"))?;
    let m = count(root, "m")?
        .or_else(|| y.as_ref().map(|y| y.ncols()))
        .or_else(|| u.as_ref().map(|u| u.nrows()))
        .ok_or_else(|| Error::parse("Y", "cannot infer m: give \"m\" or a nonempty Y or U"))?;
    let shaped = |key: &str, rows: usize, cols: usize| -> Result<CMatrix> {
        json::matrix_with_shape(field(root, key, "")?, key, rows, cols)
    };
    let data = BtoaData {
        z: z.unwrap_or_else(|| CMatrix::zeros(0, 0)),
        x: shaped("X", nz, p)?,
        y: shaped("Y", nz, m)?,
        w: w.unwrap_or_else(|| CMatrix::zeros(0, 0)),
        u: shaped("U", m, nw)?,
        v: shaped("V", p, nw)?,
        gamma: shaped("Gamma", nz, nw)?,
        p,
        m,
    };
    data.check_dimensions()?;
    Ok(data)
}

/// Parse a JSON dataset of either kind.
pub fn parse_dataset(text: &[u8]) -> Result<Dataset> {
    let root: Value = serde_json::from_slice(text).map_err(|e| Error::parse("$", e.to_string()))?;
    if !root.is_object() {
        return Err(Error::parse("$", "expected a JSON object"));
    }
    let kind = field(&root, "kind", "")?
        .as_str()
        .ok_or_else(|| Error::parse("kind", "expected a string"))?;
    match kind {
        "simple" => parse_simple(&root).map(Dataset::Simple),
        "btoa" => parse_btoa(&root).map(Dataset::Btoa),
        other => Err(Error::parse("kind", format!("unknown kind {other:?}"))),
    }
}

pub fn dataset_to_value(d: &Dataset) -> Value {
    match d {
        Dataset::Simple(s) => {
            let left: Vec<Value> = s
                .left
                .iter()
                .map(|l| {
                    json!({
                        "z": json::complex_to_value(l.z),
                        "x": json::matrix_to_value(&l.x),
                        "y": json::matrix_to_value(&l.y),
                    })
                })
                .collect();
            let right: Vec<Value> = s
                .right
                .iter()
                .map(|r| {
                    json!({
                        "w": json::complex_to_value(r.w),
                        "u": json::matrix_to_value(&r.u),
                        "v": json::matrix_to_value(&r.v),
                    })
                })
                .collect();
            let rho: Vec<Value> = s
                .rho
                .iter()
                .map(|(&(i, j), &value)| json!({"i": i, "j": j, "value": json::complex_to_value(value)}))
                .collect();
            json!({
                "kind": "simple",
                "p": s.p,
                "m": s.m,
                "left": left,
                "right": right,
                "rho": rho,
            })
        }
        Dataset::Btoa(b) => {
            let mut obj = Map::new();
            obj.insert("kind".into(), json!("btoa"));
            obj.insert("p".into(), json!(b.p));
            obj.insert("m".into(), json!(b.m));
            for (key, mat) in [
                ("Z", &b.z),
                ("X", &b.x),
                ("Y", &b.y),
                ("W", &b.w),
                ("U", &b.u),
                ("V", &b.v),
                ("Gamma", &b.gamma),
            ] {
                obj.insert(key.into(), json::matrix_to_value(mat));
            }
            Value::Object(obj)
        }
    }
}

pub fn serialize_dataset(d: &Dataset) -> String {
    json::to_string(&dataset_to_value(d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::numkit::{c, re, real_matrix};

    fn scalar_left(z: f64, x: f64, y: f64) -> LeftNode {
        LeftNode {
            z: re(z),
            x: real_matrix(1, 1, &[x]),
            y: real_matrix(1, 1, &[y]),
        }
    }

    fn scalar_right(w: f64, u: f64, v: f64) -> RightNode {
        RightNode {
            w: re(w),
            u: real_matrix(1, 1, &[u]),
            v: real_matrix(1, 1, &[v]),
        }
    }

    #[test]
    fn aggregate_distinct_nodes() {
        let s = SimpleData {
            p: 1,
            m: 1,
            left: vec![scalar_left(1.0, 1.0, 0.0)],
            right: vec![scalar_right(2.0, 1.0, 1.0)],
            rho: BTreeMap::new(),
        };
        let d = aggregate_from_simple(&s).unwrap();
        assert!((d.gamma[(0, 0)] - re(1.0)).norm() < 1e-15);
    }

    #[test]
    fn aggregate_passes_rho_through_at_coinciding_node() {
        let d = aggregate_from_simple(&fixtures::d4_simple(re(0.0))).unwrap();
        assert_eq!(d.gamma, real_matrix(1, 1, &[0.0]));
        assert_eq!(d.z, real_matrix(1, 1, &[1.0]));
        assert_eq!(d.w, real_matrix(1, 1, &[1.0]));
    }

    #[test]
    fn aggregate_one_sided() {
        let d = aggregate_from_simple(&fixtures::d1_simple()).unwrap();
        assert_eq!(d.n_w(), 0);
        assert_eq!(d.gamma.shape(), (1, 0));
    }

    #[test]
    fn aggregate_rejects_incompatible_coinciding_pair() {
        let s = SimpleData {
            p: 1,
            m: 1,
            left: vec![scalar_left(1.0, 1.0, 0.5)],
            right: vec![scalar_right(1.0, 1.0, 0.3)],
            rho: BTreeMap::from([((0, 0), re(0.0))]),
        };
        assert!(matches!(aggregate_from_simple(&s), Err(Error::InvalidData(msg)) if msg.contains("compatibility")));
    }

    #[test]
    fn aggregate_rejects_zero_direction() {
        let s = SimpleData {
            p: 1,
            m: 1,
            left: vec![scalar_left(1.0, 0.0, 0.0)],
            right: vec![],
            rho: BTreeMap::new(),
        };
        assert!(matches!(aggregate_from_simple(&s), Err(Error::InvalidData(msg)) if msg.contains("zero")));
    }

    #[test]
    fn rho_must_match_coinciding_pairs() {
        let mut s = fixtures::d4_simple(re(0.0));
        s.rho.clear();
        assert!(s.validate().is_err());
        let mut s = fixtures::d1_simple();
        s.rho.insert((0, 0), re(1.0));
        assert!(s.validate().is_err());
    }

    #[test]
    fn admissibility_d1() {
        let r = validate_admissible_default(&fixtures::d1()).unwrap();
        assert!(r.verdict);
        assert_eq!(r.sylvester_residual, 0.0);
    }

    #[test]
    fn admissibility_flags_left_half_plane() {
        let mut d = fixtures::d1();
        d.z = real_matrix(1, 1, &[-1.0]);
        let r = validate_admissible_default(&d).unwrap();
        assert!(!r.spectra_ok);
        assert!(!r.verdict);
    }

    #[test]
    fn coinciding_node_coupling_is_not_determined_by_sylvester() {
        // With z = w the scalar Sylvester equation reads 0 = 0 for any Γ.
        let mut d = fixtures::d4(re(0.0));
        d.gamma = real_matrix(1, 1, &[1.0]);
        let r = validate_admissible_default(&d).unwrap();
        assert_eq!(r.sylvester_residual, 0.0);
        assert!(r.verdict);
    }

    #[test]
    fn admissibility_detects_bad_coupling() {
        let mut d = aggregate_from_simple(&SimpleData {
            p: 1,
            m: 1,
            left: vec![scalar_left(1.0, 1.0, 0.0)],
            right: vec![scalar_right(2.0, 1.0, 1.0)],
            rho: BTreeMap::new(),
        })
        .unwrap();
        d.gamma[(0, 0)] = re(3.0);
        let r = validate_admissible_default(&d).unwrap();
        assert_eq!(r.compatible, vec![false]);
        assert!(!r.verdict);
    }

    #[test]
    fn admissibility_rejects_bad_dimensions() {
        let mut d = fixtures::d1();
        d.x = CMatrix::zeros(2, 1);
        assert!(matches!(validate_admissible_default(&d), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn parse_btoa_d1() {
        let text = br#"{"kind":"btoa","Z":[[[1,0]]],"X":[[[1,0]]],"Y":[[[0,0]]],"W":[],"U":[],"V":[],"Gamma":[]}"#;
        let Dataset::Btoa(d) = parse_dataset(text).unwrap() else {
            panic!("expected btoa kind")
        };
        assert_eq!(d, fixtures::d1());
    }

    #[test]
    fn parse_simple_d1() {
        let text = br#"{"kind":"simple","p":1,"m":1,"left":[{"z":[1,0],"x":[[[1,0]]],"y":[[[0,0]]]}],"right":[]}"#;
        assert_eq!(parse_dataset(text).unwrap(), Dataset::Simple(fixtures::d1_simple()));
    }

    #[test]
    fn parse_reports_schema_path() {
        let text = br#"{"kind":"btoa","Z":[[1]],"X":[[[1,0]]],"Y":[[[0,0]]],"W":[],"U":[],"V":[],"Gamma":[]}"#;
        match parse_dataset(text) {
            Err(Error::Parse { path, .. }) => assert_eq!(path, "Z[0][0]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_syntax_errors_and_unknown_kinds() {
        assert!(matches!(parse_dataset(b"{not json"), Err(Error::Parse { .. })));
        assert!(matches!(parse_dataset(br#"{"kind":"other"}"#), Err(Error::Parse { path, .. }) if path == "kind"));
    }

    #[test]
    fn parse_reports_invariant_violations() {
        let text = br#"{"kind":"simple","p":1,"m":1,"left":[{"z":[-1,0],"x":[[[1,0]]],"y":[[[0,0]]]}],"right":[]}"#;
        assert!(matches!(parse_dataset(text), Err(Error::InvalidData(_))));
        let text = br#"{"kind":"btoa","Z":[[[1,0]]],"X":[[[1,0],[2,0]]],"Y":[[[0,0]]],"W":[],"U":[],"V":[[[1,0]]],"Gamma":[]}"#;
        assert!(parse_dataset(text).is_err());
    }

    #[test]
    fn serialize_roundtrip_examples() {
        let mut s = fixtures::d4_simple(c(0.1, -0.2));
        s.left[0].x = CMatrix::from_row_slice(1, 1, &[c(1.0 / 3.0, 1e-17)]);
        s.right[0].v[(0, 0)] = re(1.0 / 6.0);
        s.left[0].y = CMatrix::from_row_slice(1, 1, &[re(1.0 / 6.0 * 3.0)]);
        let ds = Dataset::Simple(s);
        // compatibility may fail after the edit; round-trip the raw value instead
        let value = dataset_to_value(&ds);
        let text = json::to_string(&value);
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back, value);

        for d in [Dataset::Btoa(fixtures::d2()), Dataset::Btoa(fixtures::d3()), Dataset::Simple(fixtures::d4_simple(c(0.125, 0.0)))] {
            assert_eq!(parse_dataset(serialize_dataset(&d).as_bytes()).unwrap(), d);
        }
    }
}
