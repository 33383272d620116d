//! Spectral zeta functions ζ_{Φ,w}(s) and ζ_Δ(s) = Σ_w R_w(s) ζ_{Φ,w}(s),
//! with R_w(s) = P_w(λ^{−s})/Q_w(λ^{−s}).

pub mod direct;
pub mod mellin;

use std::sync::OnceLock;

use rug::float::Constant;
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use direct::{wynn, DirectSum};
pub use mellin::{sinc_pi, MellinSplit};

use crate::error::{Error, Result};
use crate::poincare::{build_log_phi_series, build_periodic_f, build_series, PeriodicAmplitude, PoincareSeries};
use crate::poly::{Boundary, DecimationModel};
use crate::precision::{cabs, fmt_float, Precision};
use crate::spectrum::pruning_scale;

/// How a value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    DirectSum,
    Mellin,
    ClosedForm,
    Assembly,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::DirectSum => "direct-sum",
            Method::Mellin => "mellin",
            Method::ClosedForm => "closed-form",
            Method::Assembly => "assembly",
        }
    }
}

/// Route selection for ζ_{Φ,w}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Auto,
    Direct,
    Mellin,
}

#[derive(Clone, Debug)]
pub struct SpectralValue {
    pub s: Complex,
    pub value: Complex,
    pub est_error: f64,
    pub method: Method,
}

/// Number formatting for JSON: strings when more than 17 digits are kept.
pub fn json_number(x: &Float, digits: usize) -> Value {
    if digits > 17 {
        Value::String(fmt_float(x, digits))
    } else {
        json!(x.to_f64())
    }
}

pub fn json_complex(z: &Complex, digits: usize) -> Value {
    json!([json_number(z.real(), digits), json_number(z.imag(), digits)])
}

impl SpectralValue {
    pub fn to_json(&self, digits: usize) -> Value {
        json!({
            "s": json_complex(&self.s, digits),
            "value": json_complex(&self.value, digits),
            "err": self.est_error,
            "method": self.method.tag(),
        })
    }

    pub fn re(&self) -> f64 {
        self.value.real().to_f64()
    }
}

/// Which orientation is used for the Laurent data at s = 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignConvention {
    /// Fixed by the closed-form oracle and direct sums.
    Oracle,
    /// The orientation behind the published gasket decimals.
    Published,
}

#[derive(Clone, Debug)]
pub struct ZetaOptions {
    pub series_order: usize,
    pub grid_size: usize,
    pub fourier_modes: usize,
    /// Shells for the direct sums; None selects ⌊14 log 2/log d⌋.
    pub direct_shells: Option<usize>,
    /// Largest |Im s| at which quadrature convergence is tested.
    pub max_imag: f64,
}

impl Default for ZetaOptions {
    fn default() -> Self {
        ZetaOptions { series_order: 80, grid_size: 128, fourier_modes: 8, direct_shells: None, max_imag: 30.0 }
    }
}

type Lazy<T> = OnceLock<std::result::Result<T, String>>;

struct Family {
    w: Float,
    split: Lazy<MellinSplit>,
    direct: Lazy<DirectSum>,
}

impl Family {
    fn new(w: Float) -> Self {
        Family { w, split: OnceLock::new(), direct: OnceLock::new() }
    }
}

/// Shared state for all zeta evaluations of one model.
pub struct ZetaEngine {
    model: DecimationModel,
    series: PoincareSeries,
    amplitude: PeriodicAmplitude,
    families: Vec<Family>,
    zero: Family,
    tau: Float,
    options: ZetaOptions,
    shells: usize,
}

fn lazy<T: Clone>(cell: &Lazy<T>, f: impl FnOnce() -> Result<T>) -> Result<&T> {
    cell.get_or_init(|| f().map_err(|e| e.to_string())).as_ref().map_err(|e| Error::Numerical(e.clone()))
}

impl ZetaEngine {
    pub fn new(model: DecimationModel, options: ZetaOptions) -> Result<Self> {
        let prec = model.precision();
        let mut series = build_series(&model.poly, options.series_order.max(8))?;
        let mut ws: Vec<Float> = model.offsets.iter().map(|o| o.w.clone()).collect();
        ws.push(prec.zero());
        let mut needed = 0usize;
        for w in &ws {
            let r = build_log_phi_series(&series, w, 2)?.radius_lower_bound.to_f64();
            if r <= 1.5 {
                return Err(Error::Unsupported(format!(
                    "log-series radius {r:.4} for w = {} is too small for a split at x = 1",
                    w.to_f64()
                )));
            }
            let n = ((prec.digits() as f64 + 10.0) * std::f64::consts::LN_10 / r.ln()).ceil() as usize + 3;
            needed = needed.max(n);
        }
        if needed + 2 > series.order() {
            series = build_series(&model.poly, needed + 2)?;
        }
        let amplitude =
            build_periodic_f(&series, options.grid_size, 4)?.with_fourier(2 * options.fourier_modes)?;
        let tau = pruning_scale(&series)?;
        let d = model.poly.degree() as f64;
        let shells = options
            .direct_shells
            .unwrap_or_else(|| (14.0 * std::f64::consts::LN_2 / d.ln()).floor().max(4.0) as usize);
        let families = model.offsets.iter().map(|o| Family::new(o.w.clone())).collect();
        let zero = Family::new(prec.zero());
        Ok(ZetaEngine { model, series, amplitude, families, zero, tau, options, shells })
    }

    pub fn model(&self) -> &DecimationModel {
        &self.model
    }

    pub fn series(&self) -> &PoincareSeries {
        &self.series
    }

    pub fn amplitude(&self) -> &PeriodicAmplitude {
        &self.amplitude
    }

    pub fn precision(&self) -> Precision {
        self.model.precision()
    }

    fn bits(&self) -> u32 {
        self.precision().bits()
    }

    pub fn shells(&self) -> usize {
        self.shells
    }

    fn family(&self, w: f64) -> Result<&Family> {
        if let Some(i) = self.model.offset_index(w) {
            return Ok(&self.families[i]);
        }
        if w == 0.0 {
            return Ok(&self.zero);
        }
        Err(Error::InvalidArgument(format!("w = {w} is not an offset of model {}", self.model.name)))
    }

    pub fn split(&self, w: f64) -> Result<&MellinSplit> {
        let fam = self.family(w)?;
        lazy(&fam.split, || {
            MellinSplit::new(&self.series, &self.amplitude, &fam.w, self.options.fourier_modes, self.options.max_imag)
        })
    }

    pub fn direct(&self, w: f64) -> Result<&DirectSum> {
        let fam = self.family(w)?;
        lazy(&fam.direct, || DirectSum::new(&self.series, &fam.w, &self.tau, self.shells))
    }

    /// M_w(z) through the split.
    pub fn mellin_m(&self, w: f64, z: &Complex) -> Result<SpectralValue> {
        self.split(w)?.mellin(z)
    }

    /// ζ_{Φ,w}(s); Auto uses direct sums for Re s > ρ + 0.2.
    pub fn zeta_phi(&self, w: f64, s: &Complex, route: Route) -> Result<SpectralValue> {
        let threshold = self.model.poly.rho().to_f64() + 0.2;
        let use_direct = match route {
            Route::Direct => true,
            Route::Mellin => false,
            Route::Auto => s.real().to_f64() > threshold,
        };
        if use_direct {
            if s.real().to_f64() <= threshold {
                return Err(Error::InvalidArgument(format!(
                    "direct sums need Re s > rho + 0.2 = {threshold:.4}"
                )));
            }
            self.direct(w)?.zeta(s)
        } else {
            self.split(w)?.zeta(s)
        }
    }

    /// R_w(s) for offset index i.
    pub fn rational_factor(&self, i: usize, s: &Complex) -> Complex {
        let x = self.lambda_pow_neg(s);
        self.model.offsets[i].mult_gf.eval(&x)
    }

    fn lambda_pow_neg(&self, s: &Complex) -> Complex {
        let bits = self.bits();
        (-Complex::with_val(bits, s * self.model.poly.ln_lambda())).exp()
    }

    fn assemble(&self, s: &Complex, route: Route) -> Result<SpectralValue> {
        let bits = self.bits();
        let mut value = Complex::new(bits);
        let mut err = 0.0;
        for (i, off) in self.model.offsets.iter().enumerate() {
            let r = self.rational_factor(i, s);
            let z = self.zeta_phi(off.w_f64(), s, route)?;
            err += cabs(&r).to_f64() * z.est_error;
            value += Complex::with_val(bits, &r * &z.value);
        }
        Ok(SpectralValue { s: s.clone(), value, est_error: err, method: Method::Assembly })
    }

    /// ζ_Δ(s); near cancelled poles the value is a circle average.
    pub fn zeta_delta(&self, s: &Complex, route: Route) -> Result<SpectralValue> {
        let bits = self.bits();
        for cand in self.pole_candidates_near(s, NEAR_RADIUS)? {
            let dist = cabs(&Complex::with_val(bits, s - &cand)).to_f64();
            let report = self.pole_at(&cand)?;
            if report.cancelled {
                return self.circle_average(s, route);
            }
            if dist < POLE_GUARD {
                return Err(Error::NearPole {
                    s: format!("{:?}", crate::precision::to_c64(s)),
                    pole: format!("{:?}", crate::precision::to_c64(&cand)),
                    distance: dist,
                });
            }
        }
        self.assemble(s, route)
    }

    fn circle_average(&self, s: &Complex, route: Route) -> Result<SpectralValue> {
        let bits = self.bits();
        let two_pi = Float::with_val(bits, Constant::Pi) * 2u32;
        let mut acc = Complex::new(bits);
        let mut err: f64 = 0.0;
        for j in 0..CIRCLE_POINTS {
            let ang = Float::with_val(bits, &two_pi * j as u32) / CIRCLE_POINTS as u32;
            let e = Complex::with_val(bits, (ang.clone().cos(), ang.sin())) * CIRCLE_RADIUS;
            let v = self.assemble(&Complex::with_val(bits, s + e), route)?;
            err = err.max(v.est_error);
            acc += v.value;
        }
        acc /= CIRCLE_POINTS as u32;
        Ok(SpectralValue { s: s.clone(), value: acc, est_error: err, method: Method::Assembly })
    }

    /// Locations of rational-factor poles and ζ_{Φ,w} grid poles within `radius` of s.
    fn pole_candidates_near(&self, s: &Complex, radius: f64) -> Result<Vec<Complex>> {
        let bits = self.bits();
        let l = self.model.poly.ln_lambda().to_f64();
        let two_pi = 2.0 * std::f64::consts::PI;
        let mut out = Vec::new();
        let im = s.imag().to_f64();
        for (x, _) in self.rational_roots()? {
            let lx = Complex::with_val(bits, x.ln_ref());
            let base_im = -lx.imag().to_f64() / l;
            let k = ((im - base_im) * l / two_pi).round();
            let loc = Complex::with_val(bits, -lx / l) + Complex::with_val(bits, (0, k * two_pi / l));
            if cabs(&Complex::with_val(bits, s - &loc)).to_f64() < radius {
                out.push(loc);
            }
        }
        let sigma_step = two_pi / l;
        let m = (im / sigma_step).round();
        let loc = Complex::with_val(bits, (self.model.poly.rho(), Float::with_val(bits, m * sigma_step)));
        if cabs(&Complex::with_val(bits, s - &loc)).to_f64() < radius {
            out.push(loc);
        }
        Ok(out)
    }

    /// Distinct simple roots x of the reduced Q_w over all offsets, with the offsets they belong to.
    fn rational_roots(&self) -> Result<Vec<(Complex, Vec<usize>)>> {
        let bits = self.bits();
        let mut out: Vec<(Complex, Vec<usize>)> = Vec::new();
        for (i, off) in self.model.offsets.iter().enumerate() {
            for pole in off.mult_gf.poles(bits)? {
                if let Some(entry) = out
                    .iter_mut()
                    .find(|(x, _)| cabs(&Complex::with_val(bits, x - &pole.x)).to_f64() < ROOT_MERGE)
                {
                    entry.1.push(i);
                } else {
                    out.push((pole.x, vec![i]));
                }
            }
        }
        Ok(out)
    }

    /// Assembled residue of ζ_Δ at a candidate location.
    pub fn pole_at(&self, loc: &Complex) -> Result<PoleReport> {
        let bits = self.bits();
        let prec = self.precision();
        let l = Float::with_val(bits, self.model.poly.ln_lambda());
        let x = self.lambda_pow_neg(loc);
        let mut residue = Complex::new(bits);
        let mut err = 0.0;
        let mut scale = 0.0;
        let mut sources = Vec::new();
        let mut kind = PoleKind::RationalFactor;
        // ζ_{Φ,w} grid: Res = f_m ρ_m sin(πρ_m)/π, same for every w
        let rho = self.model.poly.rho();
        let sigma_step = Float::with_val(bits, Constant::Pi) * 2u32 * self.model.poly.sigma();
        let m_real = Float::with_val(53, loc.imag() / &sigma_step).to_f64().round();
        let grid = Complex::with_val(bits, (rho, Float::with_val(bits, &sigma_step * m_real)));
        let on_grid = cabs(&Complex::with_val(bits, loc - &grid)).to_f64() < 1e-20;
        let mut double = false;
        for off in &self.model.offsets {
            let (p, q, dq) = off.mult_gf.eval_parts(&x);
            let q_small = cabs(&q).to_f64() < 1e-20 * (1.0 + cabs(&p).to_f64());
            if q_small && on_grid {
                double = true;
                sources.push(format!("Q root coincides with the zeta grid (w = {})", off.w_f64()));
                continue;
            }
            if q_small {
                // Res_s P(λ^{−s})/Q(λ^{−s}) = P(x)/(−L x Q'(x))
                let den = -Complex::with_val(bits, &x * &dq) * &l;
                let res_r = Complex::with_val(bits, &p / &den);
                let z = self.zeta_phi(off.w_f64(), loc, Route::Auto)?;
                let contrib = Complex::with_val(bits, &res_r * &z.value);
                err += cabs(&res_r).to_f64() * z.est_error;
                scale += cabs(&contrib).to_f64();
                residue += contrib;
                sources.push(format!("rational factor pole (w = {})", off.w_f64()));
            } else if on_grid {
                kind = PoleKind::ZetaGrid;
                let m = m_real as i64;
                let f = self.amplitude.f(m);
                let pi = Float::with_val(bits, Constant::Pi);
                let g = Complex::with_val(bits, &grid * Complex::with_val(bits, &grid * &pi).sin()) / &pi;
                let res_z = Complex::with_val(bits, &f * &g);
                let r = Complex::with_val(bits, &p / &q);
                let contrib = Complex::with_val(bits, &r * &res_z);
                let gabs = cabs(&g).to_f64() * cabs(&r).to_f64();
                err += gabs * (self.amplitude.est_error + if m.unsigned_abs() as usize > self.amplitude.m_max() { 1.0 } else { 0.0 });
                scale += cabs(&contrib).to_f64();
                residue += contrib;
                sources.push(format!("zeta pole m = {m} (w = {})", off.w_f64()));
            }
        }
        if sources.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "s = {:?} is not a pole candidate",
                crate::precision::to_c64(loc)
            )));
        }
        let tolerance = (prec.tol(6) * scale).max(10.0 * err);
        let cancelled = !double && cabs(&residue).to_f64() <= tolerance;
        Ok(PoleReport { location: loc.clone(), residue, est_error: err, tolerance, sources, cancelled, kind })
    }

    /// Candidate poles: roots of Q_w(λ^{−s}) for |k| ≤ m_max and the grid ρ + 2πimσ, |m| ≤ m_max.
    pub fn poles(&self, m_max: usize) -> Result<Vec<PoleReport>> {
        if m_max < 1 {
            return Err(Error::InvalidArgument("m_max must be at least 1".into()));
        }
        let bits = self.bits();
        let l = self.model.poly.ln_lambda().clone();
        let two_pi = Float::with_val(bits, Constant::Pi) * 2u32;
        let mut locs: Vec<Complex> = Vec::new();
        for (x, _) in self.rational_roots()? {
            let lx = Complex::with_val(bits, x.ln_ref());
            for k in -(m_max as i64)..=(m_max as i64) {
                let shift = Complex::with_val(bits, (0, Float::with_val(bits, &two_pi * k)));
                locs.push(Complex::with_val(bits, (-lx.clone() + shift) / &l));
            }
        }
        let rho = self.model.poly.rho().clone();
        for m in -(m_max as i64)..=(m_max as i64) {
            let im = Float::with_val(bits, &two_pi * m) / &l;
            let loc = Complex::with_val(bits, (&rho, im));
            if !locs.iter().any(|c| cabs(&Complex::with_val(bits, c - &loc)).to_f64() < 1e-20) {
                locs.push(loc);
            }
        }
        let mut out = Vec::with_capacity(locs.len());
        for loc in locs {
            out.push(self.pole_at(&loc)?);
        }
        out.sort_by(|a, b| {
            let ka = (a.location.real().to_f64(), a.location.imag().to_f64());
            let kb = (b.location.real().to_f64(), b.location.imag().to_f64());
            kb.0.partial_cmp(&ka.0).unwrap().then(ka.1.partial_cmp(&kb.1).unwrap())
        });
        Ok(out)
    }

    /// H values for an offset w < 0 by the boundary integral and by the split.
    pub fn h_values(&self, w: f64) -> Result<HValue> {
        let bits = self.bits();
        if w >= 0.0 {
            return Err(Error::InvalidArgument("H values need w < 0".into()));
        }
        let split = self.split(w)?;
        let d = self.model.poly.degree() as u32;
        let ln_l = self.model.poly.ln_lambda();
        let (rhs, rhs_err) = split.boundary_integral()?;
        let dk = Float::with_val(bits, &split.kappa * ln_l) * d;
        let h_true = -Float::with_val(bits, &dk + &rhs) / (d - 1);
        let h_published = Float::with_val(bits, &dk - &rhs) / (d - 1);
        let (h_mellin, h_mellin_err) = split.regular_at_zero();
        let e = rhs_err / f64::from(d - 1);
        Ok(HValue { w, h_true, h_published, h_mellin, err: e, mellin_err: h_mellin_err, rhs })
    }

    /// Taylor germ (ζ(0), ζ′(0), ζ″(0)) of ζ_{Φ,w} at 0.
    pub fn germ_at_zero(&self, w: f64, convention: SignConvention) -> Result<Germ> {
        let bits = self.bits();
        let split = self.split(w)?;
        let pi2_6 = Float::with_val(bits, Constant::Pi).square() / 6u32;
        if w == 0.0 {
            let (h0, e) = split.regular_at_zero();
            return Ok(match convention {
                SignConvention::Oracle => Germ {
                    value: Float::with_val(bits, -1),
                    first: -split.kappa.clone(),
                    second: Some(Float::with_val(bits, h0 + &pi2_6) * 2u32),
                    err: 2.0 * e,
                },
                SignConvention::Published => Germ {
                    value: Float::with_val(bits, 1),
                    first: split.kappa.clone(),
                    second: None,
                    err: 0.0,
                },
            });
        }
        let h = self.h_values(w)?;
        Ok(match convention {
            SignConvention::Oracle => Germ {
                value: Float::new(bits),
                first: -split.kappa.clone(),
                second: Some(h.h_true * 2u32),
                err: 2.0 * h.err,
            },
            SignConvention::Published => Germ {
                value: Float::new(bits),
                first: split.kappa.clone(),
                second: Some(h.h_published * 2u32),
                err: 2.0 * h.err,
            },
        })
    }

    /// Laurent data of ζ_Δ at s = 0: coefficients of s^{−1}, s^0, s^1.
    pub fn laurent_at_zero(&self, convention: SignConvention) -> Result<LaurentZero> {
        let bits = self.bits();
        let l = self.model.poly.ln_lambda();
        let mut pole = Float::new(bits);
        let mut value = Float::new(bits);
        let mut derivative: Option<Float> = Some(Float::new(bits));
        let mut err = 0.0;
        for off in &self.model.offsets {
            let r = rational_laurent(off.mult_gf.p(), off.mult_gf.q(), l)?;
            let g = self.germ_at_zero(off.w_f64(), convention)?;
            let t0 = &g.value;
            let t1 = &g.first;
            let coef = |k: i32| -> Float { r.coeff(k) };
            pole += Float::with_val(bits, coef(-1) * t0);
            value += Float::with_val(bits, coef(-1) * t1) + Float::with_val(bits, coef(0) * t0);
            let d_part = match &g.second {
                Some(t2) => Some(
                    Float::with_val(bits, coef(-1) * t2) / 2u32
                        + Float::with_val(bits, coef(0) * t1)
                        + Float::with_val(bits, coef(1) * t0),
                ),
                None if coef(-1).is_zero() => {
                    Some(Float::with_val(bits, coef(0) * t1) + Float::with_val(bits, coef(1) * t0))
                }
                None => None,
            };
            derivative = match (derivative, d_part) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            };
            err += coef(-1).to_f64().abs() * g.err / 2.0;
        }
        Ok(LaurentZero { convention, pole, value, derivative, err })
    }

    /// Special values with closed-form comparisons for the gasket families.
    pub fn special_values(&self) -> Result<SpecialValues> {
        let bits = self.bits();
        let one = Complex::with_val(bits, (1, 0));
        let two = Complex::with_val(bits, (2, 0));
        let at_one = (self.zeta_delta(&one, Route::Direct)?, self.zeta_delta(&one, Route::Mellin)?);
        let at_two = (self.zeta_delta(&two, Route::Direct)?, self.zeta_delta(&two, Route::Mellin)?);
        let oracle = self.laurent_at_zero(SignConvention::Oracle)?;
        let published = self.laurent_at_zero(SignConvention::Published)?;
        let mut h = Vec::new();
        for off in &self.model.offsets {
            if off.w_f64() < 0.0 {
                h.push(self.h_values(off.w_f64())?);
            }
        }
        let mut comparisons = Vec::new();
        if let Some(g) = &self.model.gasket {
            let k = g.k as f64;
            match g.boundary {
                Boundary::Neumann if g.k == 2 => {
                    comparisons.push(Comparison::new("zeta_delta(1)", at_one.0.re(), 7.0 / 30.0));
                    comparisons.push(Comparison::new("zeta_delta(2)", at_two.0.re(), 1.0 / 150.0));
                    comparisons.push(Comparison::new(
                        "zeta_delta(0) [published]",
                        published.value.to_f64(),
                        1.5 * 3f64.ln() / 5f64.ln() - 0.5,
                    ));
                    if let Some(dv) = &published.derivative {
                        comparisons.push(Comparison::new(
                            "zeta_delta'(0) [published]",
                            dv.to_f64(),
                            0.968_522_149_9,
                        ));
                    }
                    for hv in &h {
                        let target = if hv.w == -3.0 {
                            Some(5.239_955_150_0)
                        } else if hv.w == -5.0 {
                            Some(9.066_016_378_9)
                        } else {
                            None
                        };
                        if let Some(t) = target {
                            comparisons.push(Comparison::new(
                                &format!("H_{}(0) [published]", hv.w),
                                hv.h_published.to_f64(),
                                t,
                            ));
                        }
                    }
                }
                Boundary::Dirichlet => {
                    comparisons.push(Comparison::new(
                        "zeta_delta(1)",
                        at_one.0.re(),
                        (k * k + 3.0 * k - 1.0) / (2.0 * (k + 2.0) * (k + 3.0)),
                    ));
                    comparisons.push(Comparison::new(
                        "zeta_delta(0) [published]",
                        published.value.to_f64(),
                        (k + 1.0) / 2.0 * (1.0 - 2.0 * (k + 1.0).ln() / (k + 3.0).ln()),
                    ));
                }
                _ => {}
            }
        }
        Ok(SpecialValues { at_one, at_two, oracle, published, h, comparisons })
    }

    /// Max relative discrepancy between the two routes over s_grid and all offsets.
    pub fn zeta_consistency(&self, s_grid: &[Complex]) -> Result<ConsistencyReport> {
        let bits = self.bits();
        let rho = self.model.poly.rho().to_f64();
        let mut rows = Vec::new();
        for s in s_grid {
            let re = s.real().to_f64();
            if re <= rho + 0.2 || re > 3.0 + 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "consistency grid needs Re s in (rho + 0.2, 3], got {re}"
                )));
            }
            for off in &self.model.offsets {
                let w = off.w_f64();
                let d = self.zeta_phi(w, s, Route::Direct)?;
                let m = self.zeta_phi(w, s, Route::Mellin)?;
                let diff = cabs(&Complex::with_val(bits, &d.value - &m.value)).to_f64();
                let rel = diff / cabs(&d.value).to_f64().max(1e-300);
                rows.push(ConsistencyRow { w, s: s.clone(), direct: d, mellin: m, relative: rel });
            }
        }
        let max_relative = rows.iter().map(|r| r.relative).fold(0.0, f64::max);
        Ok(ConsistencyReport { rows, max_relative })
    }

    /// log of x^{log_λ(−w)} Φ(x)^{−1} Π_{n=1}^{N} (1 − Φ(x/λ^n)/w) at x = λ^u.
    pub fn boundary_product(&self, w: f64, us: &[f64], n_terms: usize) -> Result<Vec<(f64, f64)>> {
        if w >= 0.0 {
            return Err(Error::InvalidArgument("boundary product needs w < 0".into()));
        }
        let bits = self.bits();
        let prec = self.precision();
        let l = self.model.poly.ln_lambda();
        let lambda = self.model.poly.lambda();
        let wf = prec.real(w);
        let ln_mw = Float::with_val(bits, -&wf).ln();
        let mut out = Vec::with_capacity(us.len());
        for &u in us {
            let x = Float::with_val(bits, prec.real(u) * l).exp();
            let mut acc = Float::with_val(bits, &ln_mw * prec.real(u)) - self.series.eval_log_phi(&x)?;
            let mut y = x.clone();
            for _ in 0..n_terms {
                y /= lambda;
                let phi = self.series.eval_phi_real(&y)?;
                acc += Float::with_val(bits, -(phi / &wf)).ln_1p();
            }
            out.push((u, acc.to_f64()));
        }
        Ok(out)
    }
}

const NEAR_RADIUS: f64 = 1e-3;
const POLE_GUARD: f64 = 1e-6;
const CIRCLE_RADIUS: f64 = 1e-2;
const CIRCLE_POINTS: usize = 32;
const ROOT_MERGE: f64 = 1e-20;

/// Laurent coefficients of P(e^{−Ls})/Q(e^{−Ls}) at s = 0.
pub struct RationalLaurent {
    /// Exponent of the first stored coefficient.
    pub start: i32,
    pub coeffs: Vec<Float>,
}

impl RationalLaurent {
    pub fn coeff(&self, k: i32) -> Float {
        let bits = self.coeffs[0].prec();
        let idx = k - self.start;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            Float::new(bits)
        } else {
            self.coeffs[idx as usize].clone()
        }
    }
}

/// Series of P(e^{−Ls}) has s^k coefficient (−L)^k/k! Σ_j j^k P_j; the
/// valuation is read from the exact integer moments.
pub fn rational_laurent(p: &[i64], q: &[i64], l: &Float) -> Result<RationalLaurent> {
    const TERMS: usize = 6;
    let bits = l.prec();
    let moment = |c: &[i64], k: u32| -> i128 { c.iter().enumerate().map(|(j, &v)| (j as i128).pow(k) * v as i128).sum() };
    let series = |c: &[i64]| -> (usize, Vec<Float>) {
        let mut val = None;
        let mut out = Vec::new();
        let mut fac = Float::with_val(bits, 1);
        for k in 0..(TERMS + 4) as u32 {
            if k > 0 {
                fac *= Float::with_val(bits, -l) / k;
            }
            let m = moment(c, k);
            if val.is_none() && m != 0 {
                val = Some(k as usize);
            }
            out.push(Float::with_val(bits, &fac * Float::with_val(bits, m as f64)));
        }
        (val.unwrap_or(TERMS + 4), out)
    };
    let (vp, sp) = series(p);
    let (vq, sq) = series(q);
    if vq > 2 {
        return Err(Error::Unsupported("rational factor pole of order > 2 at s = 0".into()));
    }
    let num: Vec<Float> = sp[vp.min(sp.len() - 1)..].to_vec();
    let den: Vec<Float> = sq[vq..].to_vec();
    let n = TERMS.min(den.len()).min(num.len().max(1));
    let mut quo = vec![Float::new(bits); n];
    for k in 0..n {
        let mut acc = num.get(k).cloned().unwrap_or_else(|| Float::new(bits));
        for j in 1..=k {
            acc -= Float::with_val(bits, &den[j] * &quo[k - j]);
        }
        quo[k] = acc / &den[0];
    }
    Ok(RationalLaurent { start: vp as i32 - vq as i32, coeffs: quo })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoleKind {
    RationalFactor,
    ZetaGrid,
}

#[derive(Clone, Debug)]
pub struct PoleReport {
    pub location: Complex,
    pub residue: Complex,
    pub est_error: f64,
    pub tolerance: f64,
    pub sources: Vec<String>,
    pub cancelled: bool,
    pub kind: PoleKind,
}

impl PoleReport {
    pub fn to_json(&self, digits: usize) -> Value {
        json!({
            "loc": json_complex(&self.location, digits),
            "residue": json_complex(&self.residue, digits),
            "err": self.est_error,
            "tolerance": self.tolerance,
            "cancelled": self.cancelled,
            "kind": self.kind,
            "sources": self.sources,
        })
    }
}

#[derive(Clone, Debug)]
pub struct HValue {
    pub w: f64,
    /// Regular part of M_w at 0 from the boundary integral (ζ″_{Φ,w}(0) = 2 h_true).
    pub h_true: Float,
    /// Same data in the published orientation.
    pub h_published: Float,
    /// Regular part of M_w at 0 from the split.
    pub h_mellin: Float,
    pub err: f64,
    pub mellin_err: f64,
    pub rhs: Float,
}

#[derive(Clone, Debug)]
pub struct Germ {
    pub value: Float,
    pub first: Float,
    pub second: Option<Float>,
    pub err: f64,
}

#[derive(Clone, Debug)]
pub struct LaurentZero {
    pub convention: SignConvention,
    /// Coefficient of 1/s (zero when the rational poles cancel).
    pub pole: Float,
    pub value: Float,
    pub derivative: Option<Float>,
    pub err: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    pub name: String,
    pub computed: f64,
    pub expected: f64,
    pub difference: f64,
}

impl Comparison {
    fn new(name: &str, computed: f64, expected: f64) -> Self {
        Comparison { name: name.into(), computed, expected, difference: computed - expected }
    }
}

#[derive(Clone, Debug)]
pub struct SpecialValues {
    /// ζ_Δ(1) by (direct, Mellin).
    pub at_one: (SpectralValue, SpectralValue),
    pub at_two: (SpectralValue, SpectralValue),
    pub oracle: LaurentZero,
    pub published: LaurentZero,
    pub h: Vec<HValue>,
    pub comparisons: Vec<Comparison>,
}

impl SpecialValues {
    pub fn to_json(&self, digits: usize) -> Value {
        let lz = |z: &LaurentZero| {
            json!({
                "convention": z.convention,
                "pole_coefficient": json_number(&z.pole, digits),
                "zeta_delta_0": json_number(&z.value, digits),
                "zeta_delta_prime_0": z.derivative.as_ref().map(|d| json_number(d, digits)),
                "err": z.err,
            })
        };
        json!({
            "zeta_delta_1": [self.at_one.0.to_json(digits), self.at_one.1.to_json(digits)],
            "zeta_delta_2": [self.at_two.0.to_json(digits), self.at_two.1.to_json(digits)],
            "at_zero": [lz(&self.oracle), lz(&self.published)],
            "h": self.h.iter().map(|h| json!({
                "w": h.w,
                "h_published": json_number(&h.h_published, digits),
                "h_oracle": json_number(&h.h_true, digits),
                "h_oracle_mellin": json_number(&h.h_mellin, digits),
                "err": h.err,
                "mellin_err": h.mellin_err,
            })).collect::<Vec<_>>(),
            "comparisons": self.comparisons,
            "note": "at_zero is reported in two orientations: 'oracle' agrees with the closed-form model and direct sums, 'published' reproduces the published gasket decimals",
        })
    }
}

#[derive(Clone, Debug)]
pub struct ConsistencyRow {
    pub w: f64,
    pub s: Complex,
    pub direct: SpectralValue,
    pub mellin: SpectralValue,
    pub relative: f64,
}

#[derive(Clone, Debug)]
pub struct ConsistencyReport {
    pub rows: Vec<ConsistencyRow>,
    pub max_relative: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::builtin_model;

    fn engine(name: &str, digits: u32) -> ZetaEngine {
        let prec = Precision::new(digits);
        let model = builtin_model(name).unwrap().build(prec).unwrap();
        ZetaEngine::new(model, ZetaOptions::default()).unwrap()
    }

    fn c(bits: u32, re: f64, im: f64) -> Complex {
        Complex::with_val(bits, (re, im))
    }

    #[test]
    fn sinh_normalization_both_routes() {
        let e = engine("sinh", 30);
        let bits = e.precision().bits();
        for route in [Route::Direct, Route::Mellin] {
            let v = e.zeta_phi(0.0, &c(bits, 1.0, 0.0), route).unwrap();
            assert!((v.re() - 1.0 / 12.0).abs() < 1e-15, "{route:?}: {}", v.re());
            let v = e.zeta_phi(0.0, &c(bits, 2.0, 0.0), route).unwrap();
            assert!((v.re() - 1.0 / 720.0).abs() < 1e-15, "{route:?}: {}", v.re());
        }
        let b2 = e.split(0.0).unwrap().log_series.b(2).to_f64();
        assert!((-2.0 * b2 - 1.0 / 720.0).abs() < 1e-18);
    }

    #[test]
    fn sinh_mellin_matches_riemann_zeta() {
        let e = engine("sinh", 30);
        let bits = e.precision().bits();
        let s = Float::with_val(bits, 0.75);
        let z2s = Float::with_val(bits, 1.5).zeta();
        let four_pi2 = Float::with_val(bits, Constant::Pi).square() * 4u32;
        let zeta = Float::with_val(bits, four_pi2.pow_ref_f(&s)).recip() * z2s * 2u32;
        let pi = Float::with_val(bits, Constant::Pi);
        let expect = Float::with_val(bits, &zeta * &pi)
            / (Float::with_val(bits, -&s) * Float::with_val(bits, -(Float::with_val(bits, &s * &pi))).sin());
        let m = e.mellin_m(0.0, &c(bits, -0.75, 0.0)).unwrap();
        assert!((m.re() - expect.to_f64()).abs() < 1e-20, "{} vs {}", m.re(), expect.to_f64());
    }

    trait PowF {
        fn pow_ref_f(&self, e: &Float) -> Float;
    }
    impl PowF for Float {
        fn pow_ref_f(&self, e: &Float) -> Float {
            (Float::with_val(self.prec(), self.ln_ref()) * e).exp()
        }
    }

    #[test]
    fn first_part_pole_residue() {
        let e = engine("sg2-neumann", 30);
        let bits = e.precision().bits();
        let split = e.split(-3.0).unwrap();
        for l in [1usize, 2, 3] {
            let eps = 1e-12;
            let s = Complex::with_val(bits, (Float::with_val(bits, eps) - l as u32, 0));
            let m = split.mellin(&s).unwrap();
            let res = m.re() * eps;
            let b = split.log_series.b(l).to_f64();
            assert!((res - b).abs() < 1e-10 * b.abs().max(1e-3), "l = {l}: {res} vs {b}");
        }
    }

    #[test]
    fn first_offset_value_at_one() {
        let e = engine("sg2-neumann", 30);
        let bits = e.precision().bits();
        for w in [-3.0, -5.0] {
            let v = e.zeta_phi(w, &c(bits, 1.0, 0.0), Route::Auto).unwrap();
            assert!((v.re() + 1.0 / w).abs() < 1e-20);
        }
    }

    #[test]
    fn trivial_zero_at_minus_one() {
        let e = engine("sg2-neumann", 30);
        let bits = e.precision().bits();
        let v = e.zeta_phi(-3.0, &c(bits, -1.0, 0.0), Route::Auto).unwrap();
        assert!(cabs(&v.value).to_f64() < 1e-20);
    }

    #[test]
    fn near_pole_is_rejected() {
        let e = engine("sg2-neumann", 30);
        let bits = e.precision().bits();
        let rho = e.model().poly.rho().to_f64();
        let err = e.zeta_phi(-3.0, &c(bits, rho + 1e-8, 0.0), Route::Mellin).unwrap_err();
        assert!(matches!(err, Error::NearPole { .. }));
    }

    #[test]
    fn sinh_pole_structure() {
        let prec = Precision::new(30);
        let model = builtin_model("sinh").unwrap().build(prec).unwrap();
        let e = ZetaEngine::new(model, ZetaOptions::default()).unwrap();
        let poles = e.poles(3).unwrap();
        let live: Vec<&PoleReport> = poles.iter().filter(|p| !p.cancelled).collect();
        assert_eq!(live.len(), 1);
        let p = live[0];
        assert!((p.location.real().to_f64() - 0.5).abs() < 1e-20);
        assert!(p.location.imag().to_f64().abs() < 1e-20);
        let expect = 1.0 / (2.0 * std::f64::consts::PI);
        assert!((p.residue.real().to_f64() - expect).abs() < 1e-20);
    }

    #[test]
    fn rational_laurent_of_simple_zero() {
        let l = Float::with_val(128, 5).ln();
        // (2x − 5x²)/((1 − x)(1 − 3x)) at x = e^{−Ls}: Q has a simple zero at s = 0
        let r = rational_laurent(&[0, 2, -5], &[1, -4, 3], &l).unwrap();
        assert_eq!(r.start, -1);
        // Q(e^{−Ls}) ≈ −2·(−L s)(…) → leading coefficient P(1)/(−L·Q′(1)) = −3/(−L·2)
        let lead = r.coeff(-1).to_f64();
        assert!((lead - 3.0 / (2.0 * l.to_f64())).abs() < 1e-14);
    }

    #[test]
    fn sinc_is_one_at_zero() {
        let z = Complex::with_val(128, (0, 0));
        assert_eq!(sinc_pi(&z).real().to_f64(), 1.0);
        let h = Complex::with_val(128, (0.5, 0));
        assert!((sinc_pi(&h).real().to_f64() - 2.0 / std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn spectral_value_json_uses_strings_at_high_precision() {
        let v = SpectralValue {
            s: Complex::with_val(128, (1, 0)),
            value: Complex::with_val(128, (0.25, 0)),
            est_error: 1e-30,
            method: Method::Mellin,
        };
        let j = v.to_json(30);
        assert!(j["value"][0].is_string());
        assert_eq!(j["method"], "mellin");
        assert!(v.to_json(15)["value"][0].is_number());
    }
}
