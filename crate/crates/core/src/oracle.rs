//! Ground truth: the closed-form model Φ(z) = 4 sinh²(½√z) and discrete
//! Laplacians on gasket graphs.

use std::collections::{BTreeSet, HashMap};

use rug::float::Constant;
use rug::{Complex, Float, Rational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poincare::build_series;
use crate::poly::{Boundary, DecimationModel};
use crate::precision::{cabs, Precision};
use crate::spectrum::eigenvalues;
use crate::zeta::{Method, SpectralValue};

pub const MAX_LEVEL: u32 = 6;
pub const MAX_DIM: usize = 400;
pub const MAX_DECIMATION_LEVEL: u32 = 4;
const JACOBI_SWEEPS: usize = 100;
const CLOSURE_TOL: f64 = 1e-8;

/// 4 sinh²(½√z); even in √z, so the branch is irrelevant.
pub fn sinh_phi(z: &Complex) -> Complex {
    let bits = z.prec().0;
    let half = Complex::with_val(bits, z.sqrt_ref()) / 2u32;
    Complex::with_val(bits, half.sinh().square()) * 4u32
}

/// Bernoulli numbers B_0..B_n from Σ_{k<m+1} C(m+1, k) B_k = 0.
pub fn bernoulli(n: usize) -> Vec<Rational> {
    let mut b = vec![Rational::from(1)];
    for m in 1..=n {
        let mut acc = Rational::new();
        let mut binom = Rational::from(1);
        for (k, bk) in b.iter().enumerate() {
            acc += Rational::from(&binom * bk);
            binom *= Rational::from((m + 1 - k) as u64);
            binom /= Rational::from((k + 1) as u64);
        }
        b.push(-acc / Rational::from((m + 1) as u64));
    }
    b
}

/// Riemann ζ(s) by Euler–Maclaurin summation, s ≠ 1.
pub fn riemann_zeta(s: &Complex, prec: Precision) -> Result<Complex> {
    let bits = prec.raised(10).bits();
    let one = Complex::with_val(bits, (1, 0));
    if cabs(&Complex::with_val(bits, s - &one)).to_f64() < 1e-30 {
        return Err(Error::NearPole { s: "1".into(), pole: "1".into(), distance: 0.0 });
    }
    let d = prec.digits() as usize;
    let n = (d + 10).max(20) + 2 * cabs(s).to_f64().ceil() as usize;
    let terms = d + 10;
    let s = Complex::with_val(bits, s);
    let mut acc = Complex::new(bits);
    for k in 1..n {
        let lk = Float::with_val(bits, k as u32).ln();
        acc += (-Complex::with_val(bits, &s * &lk)).exp();
    }
    let nn = Float::with_val(bits, n as u32);
    let ln_n = Float::with_val(bits, nn.ln_ref());
    let n_pow = (-Complex::with_val(bits, &s * &ln_n)).exp();
    acc += Complex::with_val(bits, &n_pow * &nn) / Complex::with_val(bits, &s - 1u32);
    acc += Complex::with_val(bits, &n_pow / 2u32);
    let bern = bernoulli(2 * terms);
    // rising factor s(s+1)…(s+2k−2) N^{−s−2k+1} / (2k)!
    let mut factor = Complex::with_val(bits, &n_pow / &nn) * &s;
    let mut fact = Float::with_val(bits, 2);
    for k in 1..=terms {
        let b = Float::with_val(bits, &bern[2 * k]);
        acc += Complex::with_val(bits, &factor * b) / &fact;
        let a = Complex::with_val(bits, &s + (2 * k - 1) as u32);
        let c = Complex::with_val(bits, &s + (2 * k) as u32);
        factor *= a;
        factor *= c;
        factor /= Float::with_val(bits, &nn * &nn);
        fact *= Float::with_val(bits, ((2 * k + 1) * (2 * k + 2)) as u32);
    }
    Ok(Complex::with_val(prec.bits(), acc))
}

/// ζ_{Φ,w}(s) for the sinh model: w = 0 gives 2(4π²)^{−s}ζ(2s), w = −4
/// gives 2π^{−2s}(1 − 2^{−2s})ζ(2s).
pub fn sinh_zeta(w: f64, s: &Complex, prec: Precision) -> Result<SpectralValue> {
    let bits = prec.bits();
    let two_s = Complex::with_val(bits, s * 2u32);
    let z = riemann_zeta(&two_s, prec)?;
    let pi = Float::with_val(bits, Constant::Pi);
    let value = if w == 0.0 {
        let l = Float::with_val(bits, pi.square_ref()) * 4u32;
        let lf = Float::with_val(bits, l.ln_ref());
        (-Complex::with_val(bits, s * &lf)).exp() * z * 2u32
    } else if w == -4.0 {
        let lpi = Float::with_val(bits, pi.ln_ref());
        let l2 = Float::with_val(bits, 2).ln();
        let a = (-Complex::with_val(bits, &two_s * &lpi)).exp();
        let b = 1u32 - (-Complex::with_val(bits, &two_s * &l2)).exp();
        a * b * z * 2u32
    } else {
        return Err(Error::Unsupported(format!("no closed form for w = {w}")));
    };
    let err = prec.tol(5) * cabs(&value).to_f64().max(1.0);
    Ok(SpectralValue { s: s.clone(), value, est_error: err, method: Method::ClosedForm })
}

/// Level-n K-gasket graph in barycentric integer coordinates scaled by 2^n.
#[derive(Clone, Debug, Serialize)]
pub struct GasketGraph {
    pub level: u32,
    pub k: u32,
    pub vertices: Vec<Vec<u32>>,
    pub edges: Vec<(usize, usize)>,
    pub boundary: Vec<usize>,
}

pub fn build_gasket(level: u32, k: u32) -> Result<GasketGraph> {
    if level > MAX_LEVEL {
        return Err(Error::LevelTooLarge { level, max: MAX_LEVEL });
    }
    if k < 1 {
        return Err(Error::InvalidArgument("gasket dimension must be at least 1".into()));
    }
    let n = 1u32 << level;
    let dim = k as usize + 1;
    let corners: Vec<Vec<u32>> =
        (0..dim).map(|j| (0..dim).map(|i| if i == j { n } else { 0 }).collect()).collect();
    let mut simplices = vec![corners.clone()];
    for _ in 0..level {
        let mut next = Vec::with_capacity(simplices.len() * dim);
        for s in &simplices {
            for a in s {
                next.push(s.iter().map(|b| a.iter().zip(b).map(|(x, y)| (x + y) / 2).collect()).collect());
            }
        }
        simplices = next;
    }
    let mut index: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut vertices: Vec<Vec<u32>> = Vec::new();
    let mut id = |v: &Vec<u32>, vertices: &mut Vec<Vec<u32>>| -> usize {
        *index.entry(v.clone()).or_insert_with(|| {
            vertices.push(v.clone());
            vertices.len() - 1
        })
    };
    let mut edges = BTreeSet::new();
    for s in &simplices {
        let ids: Vec<usize> = s.iter().map(|v| id(v, &mut vertices)).collect();
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                edges.insert((ids[i].min(ids[j]), ids[i].max(ids[j])));
            }
        }
    }
    let boundary = corners.iter().map(|c| id(c, &mut vertices)).collect();
    Ok(GasketGraph { level, k, vertices, edges: edges.into_iter().collect(), boundary })
}

impl GasketGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertices.len()];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    /// D − A; Neumann uses the measure-weighted form M^{−1/2}(D − A)M^{−1/2}
    /// with m_x = deg(x)/(2K); Dirichlet drops the corners.
    pub fn laplacian(&self, bc: Boundary) -> SymMatrix {
        let deg = self.degrees();
        let n = self.vertices.len();
        let keep: Vec<usize> = match bc {
            Boundary::Neumann => (0..n).collect(),
            Boundary::Dirichlet => (0..n).filter(|i| !self.boundary.contains(i)).collect(),
        };
        let mut pos = vec![usize::MAX; n];
        for (i, &v) in keep.iter().enumerate() {
            pos[v] = i;
        }
        let m = keep.len();
        let mut a = vec![0.0; m * m];
        let scale: Vec<f64> = match bc {
            Boundary::Neumann => deg.iter().map(|&d| (d as f64 / (2.0 * self.k as f64)).sqrt()).collect(),
            Boundary::Dirichlet => vec![1.0; n],
        };
        for &v in &keep {
            a[pos[v] * m + pos[v]] = deg[v] as f64 / (scale[v] * scale[v]);
        }
        for &(x, y) in &self.edges {
            if pos[x] != usize::MAX && pos[y] != usize::MAX {
                let val = -1.0 / (scale[x] * scale[y]);
                a[pos[x] * m + pos[y]] = val;
                a[pos[y] * m + pos[x]] = val;
            }
        }
        SymMatrix { n: m, a }
    }
}

/// Dense symmetric matrix, row-major.
#[derive(Clone, Debug)]
pub struct SymMatrix {
    pub n: usize,
    pub a: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SymSpectrum {
    pub eigenvalues: Vec<f64>,
    pub matrix_dim: usize,
    /// max |Lv − μv| over the computed pairs.
    pub residual: f64,
    /// ‖QΛQᵀ − L‖_max / ‖L‖_max.
    pub reconstruction: f64,
}

/// Cyclic Jacobi rotations.
pub fn jacobi_eigen(m: &SymMatrix) -> Result<SymSpectrum> {
    let n = m.n;
    if n > MAX_DIM {
        return Err(Error::MatrixTooLarge { dim: n, max: MAX_DIM });
    }
    let mut a = m.a.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    while off(&a) > 1e-15 * norm {
        if sweeps >= JACOBI_SWEEPS {
            return Err(Error::JacobiNoConvergence { sweeps, off: off(&a) });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
    }
    let vals: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    let mut residual: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let mut lv = 0.0;
            for k in 0..n {
                lv += m.a[i * n + k] * v[k * n + j];
            }
            residual = residual.max((lv - vals[j] * v[i * n + j]).abs());
        }
    }
    let max_a = m.a.iter().fold(0.0f64, |x, y| x.max(y.abs())).max(f64::MIN_POSITIVE);
    let mut recon: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let r: f64 = (0..n).map(|k| v[i * n + k] * vals[k] * v[j * n + k]).sum();
            recon = recon.max((r - m.a[i * n + j]).abs());
        }
    }
    let mut eigenvalues = vals;
    eigenvalues.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(SymSpectrum { eigenvalues, matrix_dim: n, residual, reconstruction: recon / max_a })
}

pub fn laplacian_spectrum(g: &GasketGraph, bc: Boundary) -> Result<SymSpectrum> {
    jacobi_eigen(&g.laplacian(bc))
}

/// Distinct values with multiplicities, clustered at relative tolerance.
pub fn cluster(values: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    for &v in values {
        match out.last_mut() {
            Some((c, k)) if (v - *c).abs() <= tol * (1.0 + c.abs()) => *k += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelSpectrum {
    pub level: u32,
    pub spectrum: SymSpectrum,
}

#[derive(Clone, Debug, Serialize)]
pub struct Closure {
    pub from_level: u32,
    pub to_level: u32,
    pub mapped: usize,
    pub non_exceptional: usize,
    pub rate: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Tally {
    pub level: u32,
    pub w: f64,
    pub expected: i128,
    pub found: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Mismatch {
    pub level: u32,
    pub eigenvalue: f64,
    pub expected: Option<i128>,
    pub found: usize,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecimationReport {
    pub k: u32,
    pub boundary: Boundary,
    pub exceptional: Vec<f64>,
    pub levels: Vec<LevelSpectrum>,
    pub closure: Vec<Closure>,
    pub tallies: Vec<Tally>,
    pub mismatches: Vec<Mismatch>,
    /// λ^n z_n for the smallest positive level-n eigenvalue.
    pub renormalized: Vec<f64>,
    pub cauchy_ratios: Vec<f64>,
    /// Smallest continuum eigenvalue from the branch-word enumeration.
    pub continuum_reference: f64,
    /// Fitted ratio (extrapolated λ^n z_n)/continuum_reference.
    pub normalization: f64,
    pub passed: bool,
}

/// Spectral decimation on gasket graphs against the model's p, offsets and β_m.
pub fn verify_decimation(model: &DecimationModel, levels: u32) -> Result<DecimationReport> {
    let fam = model
        .gasket
        .ok_or_else(|| Error::Unsupported(format!("model {} carries no gasket family", model.name)))?;
    if levels > MAX_DECIMATION_LEVEL {
        return Err(Error::LevelTooLarge { level: levels, max: MAX_DECIMATION_LEVEL });
    }
    if levels < 2 {
        return Err(Error::InvalidArgument("decimation needs at least levels 1 and 2".into()));
    }
    let coeffs: Vec<f64> = model.poly.coeffs().iter().map(|c| c.to_f64()).collect();
    // p̃(x) = −p(−x)
    let pt = |x: f64| -> f64 {
        let mut acc = 0.0;
        for c in coeffs.iter().rev() {
            acc = (acc + c) * (-x);
        }
        -acc
    };
    let mut exceptional: Vec<f64> = Vec::new();
    for off in &model.offsets {
        let mw = -off.w_f64();
        exceptional.push(mw);
        let img = pt(mw);
        if img > 0.0 {
            exceptional.push(img);
        }
    }
    exceptional.sort_by(|a, b| a.partial_cmp(b).unwrap());
    exceptional.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let is_exc = |z: f64| exceptional.iter().any(|e| (z - e).abs() <= CLOSURE_TOL * (1.0 + e));

    let mut lv = Vec::new();
    for n in 1..=levels {
        let g = build_gasket(n, fam.k)?;
        lv.push(LevelSpectrum { level: n, spectrum: laplacian_spectrum(&g, fam.boundary)? });
    }
    let mut mismatches = Vec::new();
    let mut closure = Vec::new();
    for pair in lv.windows(2) {
        let (lo, hi) = (&pair[0], &pair[1]);
        let mut mapped = 0;
        let mut total = 0;
        for &z in &hi.spectrum.eigenvalues {
            if is_exc(z) {
                continue;
            }
            total += 1;
            let y = pt(z);
            if lo.spectrum.eigenvalues.iter().any(|e| (y - e).abs() <= CLOSURE_TOL * (1.0 + e.abs())) {
                mapped += 1;
            } else {
                mismatches.push(Mismatch {
                    level: hi.level,
                    eigenvalue: z,
                    expected: None,
                    found: 0,
                    detail: format!("p~(z) = {y} is not a level-{} eigenvalue", lo.level),
                });
            }
        }
        let rate = if total == 0 { 1.0 } else { mapped as f64 / total as f64 };
        closure.push(Closure { from_level: lo.level, to_level: hi.level, mapped, non_exceptional: total, rate });
    }
    let mut tallies = Vec::new();
    for l in &lv {
        let clusters = cluster(&l.spectrum.eigenvalues, CLOSURE_TOL);
        for off in &model.offsets {
            let mw = -off.w_f64();
            if mw <= 0.0 {
                continue;
            }
            let found = clusters
                .iter()
                .find(|(v, _)| (v - mw).abs() <= CLOSURE_TOL * (1.0 + mw))
                .map_or(0, |c| c.1);
            let expected = off.beta(l.level as usize)?;
            if expected != found as i128 {
                mismatches.push(Mismatch {
                    level: l.level,
                    eigenvalue: mw,
                    expected: Some(expected),
                    found,
                    detail: format!("multiplicity of {mw} vs beta_{}({})", l.level, off.w_f64()),
                });
            }
            tallies.push(Tally { level: l.level, w: off.w_f64(), expected, found });
        }
    }
    let lambda = model.poly.lambda().to_f64();
    let renormalized: Vec<f64> = lv
        .iter()
        .map(|l| {
            let z = l.spectrum.eigenvalues.iter().copied().find(|&z| z > 1e-9).unwrap_or(f64::NAN);
            lambda.powi(l.level as i32) * z
        })
        .collect();
    let diffs: Vec<f64> = renormalized.windows(2).map(|w| w[1] - w[0]).collect();
    let cauchy_ratios: Vec<f64> = diffs.windows(2).map(|d| d[1] / d[0]).collect();
    let last = *renormalized.last().unwrap();
    let limit = match (diffs.last(), cauchy_ratios.last()) {
        (Some(&d), Some(&r)) if r.abs() < 1.0 => last + d * r / (1.0 - r),
        _ => last,
    };
    let series = build_series(&model.poly, 80)?;
    let spec = eigenvalues(model, &series, last * 2.0)?;
    let continuum_reference = spec
        .records
        .iter()
        .map(|r| r.eigenvalue.to_f64())
        .filter(|&e| e > 0.0)
        .fold(f64::INFINITY, f64::min);
    let normalization = limit / continuum_reference;
    let passed = mismatches.is_empty() && closure.iter().all(|c| c.rate == 1.0);
    Ok(DecimationReport {
        k: fam.k,
        boundary: fam.boundary,
        exceptional,
        levels: lv,
        closure,
        tallies,
        mismatches,
        renormalized,
        cauchy_ratios,
        continuum_reference,
        normalization,
        passed,
    })
}
