//! Decimation models: polynomial plus offsets with multiplicity generating
//! functions, JSON ingestion and sampled validation.

use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use super::gf::RationalGF;
use super::DecimationPolynomial;
use crate::error::{Error, Result};
use crate::precision::Precision;

/// Number of generating-function terms checked during validation.
const GF_CHECK_TERMS: usize = 50;
/// Grid size for the sampled Julia-set check.
const JULIA_GRID: usize = 1000;

/// Boundary condition of a gasket family model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Dirichlet,
    Neumann,
}

/// Optional link between a model and the discrete K-gasket graphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GasketFamily {
    #[serde(rename = "K")]
    pub k: u32,
    pub boundary: Boundary,
}

/// A number in a model file: JSON number or decimal string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Num {
    fn to_float(&self, prec: Precision) -> Result<Float> {
        match self {
            Num::Int(v) => Ok(prec.real(*v)),
            Num::Float(v) => Ok(prec.real(*v)),
            Num::Text(s) => {
                prec.parse(s).ok_or_else(|| Error::InvalidModel(format!("cannot parse number {s:?}")))
            }
        }
    }
}

impl From<i64> for Num {
    fn from(v: i64) -> Self {
        Num::Int(v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffsetFile {
    pub w: Num,
    #[serde(rename = "P")]
    pub p: Vec<i64>,
    #[serde(rename = "Q")]
    pub q: Vec<i64>,
    pub m_min: u32,
}

/// On-disk model description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub name: String,
    pub poly: Vec<Num>,
    pub offsets: Vec<OffsetFile>,
    #[serde(default)]
    pub julia_negative: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gasket: Option<GasketFamily>,
}

#[derive(Clone, Debug)]
pub struct OffsetSpec {
    pub w: Float,
    pub mult_gf: RationalGF,
    pub m_min: u32,
}

impl OffsetSpec {
    /// β_m(w).
    pub fn beta(&self, m: usize) -> Result<i128> {
        self.mult_gf.coefficient(m)
    }

    pub fn w_f64(&self) -> f64 {
        self.w.to_f64()
    }
}

#[derive(Clone, Debug)]
pub struct DecimationModel {
    pub name: String,
    pub poly: DecimationPolynomial,
    pub offsets: Vec<OffsetSpec>,
    pub julia_negative: bool,
    pub gasket: Option<GasketFamily>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    /// Validates and constructs the model; fails with the first failed check.
    pub fn build(&self, prec: Precision) -> Result<DecimationModel> {
        let report = validate_model(self, prec);
        if let Some(bad) = report.failures().first() {
            return Err(Error::InvalidModel(format!("{}: {}", bad.name, bad.detail)));
        }
        self.construct(prec)
    }

    fn construct(&self, prec: Precision) -> Result<DecimationModel> {
        let coeffs = self.poly.iter().map(|c| c.to_float(prec)).collect::<Result<Vec<_>>>()?;
        let poly = DecimationPolynomial::new(coeffs, prec)?;
        let mut offsets = Vec::with_capacity(self.offsets.len());
        for o in &self.offsets {
            let w = o.w.to_float(prec)?;
            if w > 0 {
                return Err(Error::InvalidModel(format!(
                    "offset must be negative (got w = {})",
                    w.to_f64()
                )));
            }
            offsets.push(OffsetSpec {
                w,
                mult_gf: RationalGF::new(o.p.clone(), o.q.clone())?,
                m_min: o.m_min,
            });
        }
        if offsets.is_empty() {
            return Err(Error::InvalidModel("model needs at least one offset".into()));
        }
        Ok(DecimationModel {
            name: self.name.clone(),
            poly,
            offsets,
            julia_negative: self.julia_negative,
            gasket: self.gasket,
        })
    }
}

impl DecimationModel {
    pub fn from_json(text: &str, prec: Precision) -> Result<Self> {
        ModelFile::from_json(text)?.build(prec)
    }

    pub fn precision(&self) -> Precision {
        self.poly.precision()
    }

    /// Index of the offset equal to w.
    pub fn offset_index(&self, w: f64) -> Option<usize> {
        self.offsets.iter().position(|o| (o.w_f64() - w).abs() < 1e-12)
    }
}

/// Runs every check on a model file; never aborts.
pub fn validate_model(file: &ModelFile, prec: Precision) -> ValidationReport {
    let mut report = ValidationReport::default();
    let coeffs: Result<Vec<Float>> = file.poly.iter().map(|c| c.to_float(prec)).collect();
    let poly = match coeffs.and_then(|c| DecimationPolynomial::new(c, prec)) {
        Ok(p) => {
            report.push(
                "polynomial",
                true,
                format!(
                    "d = {}, lambda = {}, rho = {:.12}",
                    p.degree(),
                    p.lambda().to_f64(),
                    p.rho().to_f64()
                ),
            );
            Some(p)
        }
        Err(e) => {
            report.push("polynomial", false, e.to_string());
            None
        }
    };
    if file.offsets.is_empty() {
        report.push("offsets", false, "model needs at least one offset");
    }
    for o in &file.offsets {
        let label = match &o.w {
            Num::Int(v) => v.to_string(),
            Num::Float(v) => v.to_string(),
            Num::Text(s) => s.clone(),
        };
        match o.w.to_float(prec) {
            Ok(w) if w > 0 => report.push(format!("offset {label}"), false, "offset must be negative"),
            Ok(_) => report.push(format!("offset {label}"), true, "w <= 0"),
            Err(e) => report.push(format!("offset {label}"), false, e.to_string()),
        }
        check_gf(&mut report, &label, o);
    }
    if let Some(p) = &poly {
        check_julia(&mut report, p, file.julia_negative);
    }
    report
}

fn check_gf(report: &mut ValidationReport, label: &str, o: &OffsetFile) {
    let name = format!("multiplicities {label}");
    let gf = match RationalGF::new(o.p.clone(), o.q.clone()) {
        Ok(g) => g,
        Err(e) => return report.push(name, false, e.to_string()),
    };
    let beta = match gf.coefficients(GF_CHECK_TERMS) {
        Ok(b) => b,
        Err(e) => return report.push(name, false, e.to_string()),
    };
    let division = gf.long_division(GF_CHECK_TERMS);
    if beta.iter().zip(&division).any(|(b, l)| Rational::from(*b) != *l) {
        return report.push(name, false, "recurrence disagrees with long division");
    }
    if let Some(m) = beta.iter().position(|&b| b < 0) {
        return report.push(name, false, format!("beta_{m} is negative"));
    }
    let m_min = o.m_min as usize;
    if m_min >= GF_CHECK_TERMS {
        return report.push(name, false, format!("m_min = {m_min} beyond checked range"));
    }
    if let Some(m) = beta[..m_min].iter().position(|&b| b != 0) {
        return report.push(name, false, format!("beta_{m} nonzero below m_min = {m_min}"));
    }
    if beta[m_min] == 0 {
        return report.push(name, false, format!("beta_{m_min} is zero at m_min"));
    }
    report.push(name, true, format!("first {GF_CHECK_TERMS} terms integral, nonnegative"));
}

/// Sampled check that both real inverse branches map [x_-, 0] into itself.
fn check_julia(report: &mut ValidationReport, p: &DecimationPolynomial, forced: bool) {
    let prec = p.precision();
    let bits = prec.bits();
    let name = "julia set on negative axis";
    let x_minus = match p.leftmost_real_root() {
        Ok(x) if x.is_sign_negative() => x,
        _ => {
            return report.push(
                name,
                forced,
                if forced { "no negative real root; forced by model" } else { "p has no negative real root" },
            )
        }
    };
    let slack = Float::with_val(bits, x_minus.abs_ref()) * prec.tol(10).max(1e-20);
    let lo = Float::with_val(bits, &x_minus - &slack);
    let mut bad = None;
    for i in 0..=JULIA_GRID {
        let y = Float::with_val(bits, &x_minus * (i as f64 / JULIA_GRID as f64));
        match p.real_preimages(&y) {
            Ok(r) if r.len() == p.degree() && r.iter().all(|q| *q >= lo && *q <= slack) => {}
            Ok(r) => {
                bad = Some(format!("y = {:.6}: {} real preimages in range", y.to_f64(), r.len()));
                break;
            }
            Err(e) => {
                bad = Some(e.to_string());
                break;
            }
        }
    }
    match bad {
        None => report.push(
            name,
            true,
            format!("branch images of [{}, 0] stay inside ({} samples)", x_minus.to_f64(), JULIA_GRID + 1),
        ),
        Some(detail) if forced => report.push(name, true, format!("{detail}; forced by model")),
        Some(detail) => report.push(name, false, detail),
    }
}

/// Names accepted by [`builtin_model`].
pub const BUILTIN_MODELS: &[&str] = &["sg2-neumann", "sg2-dirichlet", "sg3-dirichlet", "sinh"];

fn offset(w: i64, p: Vec<i64>, q: Vec<i64>, m_min: u32) -> OffsetFile {
    OffsetFile { w: Num::Int(w), p, q, m_min }
}

/// Dirichlet K-gasket: p = x(K+3+x), offsets −2, −(K+1), −(K+3).
pub fn dirichlet_gasket(k: u32) -> ModelFile {
    let kk = k as i64;
    let lam = kk + 3;
    ModelFile {
        name: format!("sg{k}-dirichlet"),
        poly: vec![Num::Int(lam), Num::Int(1)],
        offsets: vec![
            offset(-2, vec![0, 1], vec![1], 1),
            offset(
                -(kk + 1),
                vec![0, 0, (kk + 1) * (kk - 2) / 2, kk + 1],
                vec![1, -(kk + 2), kk + 1],
                if k == 2 { 3 } else { 2 },
            ),
            offset(-(kk + 3), vec![0, kk, -kk * (kk + 3) / 2], vec![1, -(kk + 2), kk + 1], 1),
        ],
        julia_negative: true,
        gasket: Some(GasketFamily { k, boundary: Boundary::Dirichlet }),
    }
}

/// Neumann 2-gasket: p = x(5+x), offsets −3, −5.
pub fn neumann_gasket() -> ModelFile {
    ModelFile {
        name: "sg2-neumann".into(),
        poly: vec![Num::Int(5), Num::Int(1)],
        offsets: vec![
            offset(-3, vec![0, 2, -5], vec![1, -4, 3], 1),
            offset(-5, vec![0, 0, 1], vec![1, -4, 3], 2),
        ],
        julia_negative: true,
        gasket: Some(GasketFamily { k: 2, boundary: Boundary::Neumann }),
    }
}

/// p = x(4+x), Φ(z) = 4 sinh²(½√z), single offset w = 0.
pub fn sinh_model() -> ModelFile {
    ModelFile {
        name: "sinh".into(),
        poly: vec![Num::Int(4), Num::Int(1)],
        offsets: vec![offset(0, vec![1], vec![1], 0)],
        julia_negative: true,
        gasket: None,
    }
}

pub fn builtin_model(name: &str) -> Option<ModelFile> {
    match name {
        "sg2-neumann" => Some(neumann_gasket()),
        "sg2-dirichlet" => Some(dirichlet_gasket(2)),
        "sg3-dirichlet" => Some(dirichlet_gasket(3)),
        "sinh" => Some(sinh_model()),
        _ => name
            .strip_prefix("sg")
            .and_then(|r| r.strip_suffix("-dirichlet"))
            .and_then(|k| k.parse::<u32>().ok())
            .filter(|&k| k >= 2)
            .map(dirichlet_gasket),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_validate() {
        let prec = Precision::new(30);
        for name in BUILTIN_MODELS {
            let f = builtin_model(name).unwrap();
            let r = validate_model(&f, prec);
            assert!(r.passed(), "{name}: {:?}", r.failures());
        }
    }

    #[test]
    fn positive_offset_rejected() {
        let mut f = neumann_gasket();
        f.offsets[0].w = Num::Int(1);
        let r = validate_model(&f, Precision::new(30));
        assert!(!r.passed());
        assert!(r.failures()[0].detail.contains("offset must be negative"));
        assert!(f.build(Precision::new(30)).is_err());
    }

    #[test]
    fn small_multiplier_rejected() {
        let mut f = neumann_gasket();
        f.poly = vec![Num::Float(0.5), Num::Int(1)];
        assert!(!validate_model(&f, Precision::new(30)).passed());
    }

    #[test]
    fn wrong_m_min_rejected() {
        let mut f = neumann_gasket();
        f.offsets[1].m_min = 1;
        assert!(!validate_model(&f, Precision::new(30)).passed());
    }

    #[test]
    fn dirichlet_multiplicities_match_closed_forms() {
        for k in [2u32, 3, 4] {
            let f = dirichlet_gasket(k);
            let m = f.build(Precision::new(30)).unwrap();
            let kk = k as i128;
            for mm in 1..10u32 {
                let p = (kk + 1).pow(mm - 1);
                assert_eq!(m.offsets[2].beta(mm as usize).unwrap(), ((kk - 1) * p + kk + 1) / 2);
                if mm >= 2 {
                    assert_eq!(m.offsets[1].beta(mm as usize).unwrap(), ((kk - 1) * p - kk - 1) / 2);
                }
            }
        }
    }

    #[test]
    fn json_roundtrip() {
        let f = neumann_gasket();
        let g = ModelFile::from_json(&f.to_json()).unwrap();
        assert_eq!(f, g);
        let text = r#"{"name":"x","poly":["5","1"],"offsets":[{"w":-3,"P":[0,2,-5],"Q":[1,-4,3],"m_min":1}],"julia_negative":true}"#;
        let m = DecimationModel::from_json(text, Precision::new(30)).unwrap();
        assert_eq!(m.poly.lambda().to_f64(), 5.0);
    }
}
