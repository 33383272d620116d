//! Split Mellin transform of log Φ_w: Taylor part on [0, 1], tanh–sinh
//! quadrature of the Fourier-subtracted remainder on [1, T], closed-form
//! compensating terms.

use rug::float::Constant;
use rug::{Complex, Float};

use super::{Method, SpectralValue};
use crate::error::{Error, Result};
use crate::poincare::{build_log_phi_series, LogPhiSeries, PeriodicAmplitude, PoincareSeries};
use crate::precision::{cabs, Precision};
use crate::quad::NodeSet;

const START_LEVEL: u32 = 5;
const LEVEL_CAP: u32 = 10;
const CERT_MARGIN: f64 = 0.98;
const CERT_SAMPLES: usize = 64;
const CERT_SEARCH: u32 = 16;
/// Largest Re s at which M_w is evaluated through the split (s′ = −1).
const MAX_RE_S: f64 = 6.0;
const POLE_GUARD: f64 = 1e-6;

/// Data for M_w(s) = Σ b_ℓ/(s+ℓ) + I(s) − Σ f_m/(s+ρ_m) + κ/s [− 1/s² if w = 0].
#[derive(Clone, Debug)]
pub struct MellinSplit {
    pub w: Float,
    /// κ_0 + log(−w), or κ_0 for w = 0.
    pub kappa: Float,
    pub log_series: LogPhiSeries,
    /// (f_m, ρ_m) for |m| ≤ M.
    pub fourier: Vec<(Complex, Complex)>,
    pub fourier_modes: usize,
    /// Σ_{M<|m|≤2M} |f_m|, used as the truncation bound of the subtraction.
    pub fourier_tail: f64,
    pub amplitude_error: f64,
    pub t: Float,
    pub x0: Float,
    pub tail_c: Float,
    pub level: u32,
    panels: usize,
    nodes: NodeSet,
    /// Ψ at node i of panel k−1 (k = 0 is [−log λ, 0]).
    psi: Vec<Vec<Float>>,
    /// Fourier-subtracted integrand on panels 0..panels.
    g: Vec<Vec<Float>>,
    g_noise: f64,
    kappa0: Float,
    ln_lambda: Float,
    rho: Float,
    degree: usize,
    ln_lead: Float,
    prec: Precision,
}

impl MellinSplit {
    pub fn new(
        s: &PoincareSeries,
        amplitude: &PeriodicAmplitude,
        w: &Float,
        fourier_modes: usize,
        max_imag: f64,
    ) -> Result<Self> {
        let p = s.poly();
        let prec = s.precision();
        let bits = prec.bits();
        if *w > 0 {
            return Err(Error::InvalidArgument("offset must satisfy w <= 0".into()));
        }
        if amplitude.m_max() < 2 * fourier_modes {
            return Err(Error::InvalidArgument(format!(
                "amplitude carries {} modes, split needs {}",
                amplitude.m_max(),
                2 * fourier_modes
            )));
        }
        let kappa0 = s.kappa0().clone();
        let kappa = if w.is_zero() {
            kappa0.clone()
        } else {
            Float::with_val(bits, Float::with_val(bits, -w).ln() + &kappa0)
        };
        let log_series = build_log_phi_series(s, w, s.order())?;
        let rho = p.rho().clone();
        let two_pi_sigma = Float::with_val(bits, Constant::Pi) * 2u32 * p.sigma();
        let fourier: Vec<(Complex, Complex)> = (-(fourier_modes as i64)..=fourier_modes as i64)
            .map(|m| {
                let rm = Complex::with_val(bits, (&rho, Float::with_val(bits, &two_pi_sigma * m)));
                (amplitude.f(m), rm)
            })
            .collect();
        let fourier_tail: f64 = (fourier_modes + 1..=2 * fourier_modes)
            .map(|m| 2.0 * cabs(&amplitude.f(m as i64)).to_f64())
            .sum();
        let (x0, tail_c, t) = certify_tail(s, w, &kappa0)?;
        let ln_lambda = p.ln_lambda().clone();
        let panels = (Float::with_val(53, t.ln_ref()) / &ln_lambda).to_f64().ceil().max(1.0) as usize;
        let t_panel = Float::with_val(bits, &ln_lambda * panels as u32).exp();
        let mut split = MellinSplit {
            w: w.clone(),
            kappa,
            log_series,
            fourier,
            fourier_modes,
            fourier_tail,
            amplitude_error: amplitude.est_error,
            t: t_panel,
            x0,
            tail_c,
            level: START_LEVEL,
            panels,
            nodes: NodeSet::new(&prec.zero(), &ln_lambda, START_LEVEL, prec),
            psi: Vec::new(),
            g: Vec::new(),
            g_noise: 0.0,
            kappa0,
            ln_lambda,
            rho,
            degree: p.degree(),
            ln_lead: Float::with_val(bits, p.leading().ln_ref()),
            prec,
        };
        split.fill(s)?;
        let tests = [
            prec.czero(),
            Complex::with_val(bits, (1, 0)),
            Complex::with_val(bits, (-split.rho.to_f64() - 0.5, max_imag)),
            Complex::with_val(bits, (-3, max_imag / 2.0)),
        ];
        loop {
            let worst = tests
                .iter()
                .map(|z| split.quadrature(z).1)
                .fold(0.0, f64::max);
            if worst <= split.quad_threshold() {
                break;
            }
            if split.level >= LEVEL_CAP {
                return Err(Error::Quadrature(format!(
                    "tanh-sinh levels disagree by {worst:e} at level {LEVEL_CAP}"
                )));
            }
            split.level += 1;
            split.nodes = NodeSet::new(&prec.zero(), &split.ln_lambda, split.level, prec);
            split.fill(s)?;
        }
        Ok(split)
    }

    fn quad_threshold(&self) -> f64 {
        self.prec.tol(10) + 10.0 * self.g_noise
    }

    fn fill(&mut self, s: &PoincareSeries) -> Result<()> {
        let bits = self.prec.bits();
        let base: Vec<Float> =
            self.nodes.points.iter().map(|v| Float::with_val(bits, v.exp_ref())).collect();
        let lambda = s.poly().lambda();
        let mut psi = Vec::with_capacity(self.panels + 2);
        let mut scale = Float::with_val(bits, 1 / lambda);
        for _ in 0..self.panels + 2 {
            let row = base
                .iter()
                .map(|b| s.eval_log_phi(&Float::with_val(bits, b * &scale)))
                .collect::<Result<Vec<_>>>()?;
            psi.push(row);
            scale *= lambda;
        }
        let mut g = Vec::with_capacity(self.panels);
        let mut noise: f64 = 0.0;
        for k in 0..self.panels {
            let mut row = Vec::with_capacity(base.len());
            for (i, v) in self.nodes.points.iter().enumerate() {
                let vk = Float::with_val(bits, &self.ln_lambda * k as u32) + v;
                let (sub, xr) = self.fourier_sum(&vk);
                let ps = &psi[k + 1][i];
                let mut val = Float::with_val(bits, ps + &self.kappa0) - sub;
                if !self.w.is_zero() {
                    let e = Float::with_val(bits, -ps).exp() * Float::with_val(bits, -&self.w);
                    val += e.ln_1p();
                }
                noise = noise.max(xr * (self.amplitude_error + self.fourier_tail));
                row.push(val);
            }
            g.push(row);
        }
        self.psi = psi;
        self.g = g;
        self.g_noise = noise;
        Ok(())
    }

    /// x^ρ Σ_m f_m e^{2πimσ v} at x = e^v, and x^ρ as f64.
    fn fourier_sum(&self, v: &Float) -> (Float, f64) {
        let bits = self.prec.bits();
        let x_rho = Float::with_val(bits, v * &self.rho).exp();
        let mut acc = Complex::new(bits);
        for (f, rm) in &self.fourier {
            let e = Complex::with_val(bits, (Float::new(bits), Float::with_val(bits, rm.imag() * v))).exp();
            acc += Complex::with_val(bits, f * e);
        }
        let out = Float::with_val(bits, acc.real() * &x_rho);
        (out, x_rho.to_f64())
    }

    /// I(z) = ∫_0^{log T} g(e^v) e^{zv} dv at the current level, with the
    /// difference to the previous level.
    fn quadrature(&self, z: &Complex) -> (Complex, f64) {
        let bits = self.prec.bits();
        let ez: Vec<Complex> = self
            .nodes
            .points
            .iter()
            .zip(&self.nodes.weights)
            .map(|(v, wt)| Complex::with_val(bits, z * v).exp() * wt)
            .collect();
        let step = Complex::with_val(bits, z * &self.ln_lambda).exp();
        let mut fine = Complex::new(bits);
        let mut coarse = Complex::new(bits);
        let mut factor = Complex::with_val(bits, (1, 0));
        for row in &self.g {
            let mut pf = Complex::new(bits);
            let mut pc = Complex::new(bits);
            for (i, gi) in row.iter().enumerate() {
                let t = Complex::with_val(bits, &ez[i] * gi);
                if self.nodes.level[i] < self.level {
                    pc += &t;
                }
                pf += t;
            }
            fine += Complex::with_val(bits, &pf * &factor);
            coarse += Complex::with_val(bits, &pc * &factor);
            factor *= &step;
        }
        let h = Float::with_val(bits, Float::i_exp(1, -(self.level as i32)));
        fine *= &h;
        coarse *= h * 2u32;
        let diff = cabs(&Complex::with_val(bits, &fine - &coarse)).to_f64();
        (fine, diff)
    }

    /// Bound on ∫_1^T |x^{ρ+s−1}| dx times the subtraction error.
    fn subtraction_error(&self, z: &Complex) -> f64 {
        let e = self.rho.to_f64() + z.real().to_f64();
        let lt = self.t.to_f64().ln();
        let integral = if e.abs() < 1e-12 { lt } else { ((e * lt).exp() - 1.0) / e };
        (self.amplitude_error + self.fourier_tail) * integral.abs().max(1.0)
    }

    fn check_pole(&self, z: &Complex) -> Result<()> {
        let bits = self.prec.bits();
        for (_, rm) in &self.fourier {
            let d = cabs(&Complex::with_val(bits, z + rm)).to_f64();
            if d < POLE_GUARD {
                return Err(Error::NearPole {
                    s: format!("{:?}", crate::precision::to_c64(z)),
                    pole: format!("{:?}", crate::precision::to_c64(&Complex::with_val(bits, -rm))),
                    distance: d,
                });
            }
        }
        if z.real().to_f64() > MAX_RE_S {
            return Err(Error::InvalidArgument(format!(
                "split evaluation supports Re s <= {MAX_RE_S}"
            )));
        }
        Ok(())
    }

    /// Σ_{ℓ≠skip} b_ℓ/(z+ℓ) with a tail estimate.
    fn series_part(&self, z: &Complex, skip: Option<usize>) -> (Complex, f64) {
        let bits = self.prec.bits();
        let mut acc = Complex::new(bits);
        let n = self.log_series.order();
        for l in 1..=n {
            if Some(l) == skip {
                continue;
            }
            let den = Complex::with_val(bits, z + l as u32);
            acc += Complex::with_val(bits, self.log_series.b(l) / den);
        }
        let r = self.log_series.radius_lower_bound.to_f64();
        let last = self.log_series.b(n).to_f64().abs();
        let tail = last / (1.0 - 1.0 / r).max(1e-3) / ((n as f64) - z.real().to_f64().abs()).max(1.0);
        (acc, tail)
    }

    fn fourier_part(&self, z: &Complex) -> Complex {
        let bits = self.prec.bits();
        let mut acc = Complex::new(bits);
        for (f, rm) in &self.fourier {
            acc += Complex::with_val(bits, f / Complex::with_val(bits, z + rm));
        }
        acc
    }

    /// Continued M_w(z).
    pub fn mellin(&self, z: &Complex) -> Result<SpectralValue> {
        self.check_pole(z)?;
        let bits = self.prec.bits();
        if z.real().is_zero() && z.imag().is_zero() {
            return Err(Error::NearPole { s: "(0, 0)".into(), pole: "(0, 0)".into(), distance: 0.0 });
        }
        let (series, tail) = self.series_part(z, None);
        let (integral, qerr) = self.quadrature(z);
        let mut value = series + integral - self.fourier_part(z);
        value += Complex::with_val(bits, &self.kappa / z);
        if self.w.is_zero() {
            value -= Complex::with_val(bits, z.square_ref()).recip();
        }
        let err = tail + qerr + self.subtraction_error(z) + self.prec.tol(5) * cabs(&value).to_f64();
        Ok(SpectralValue { s: z.clone(), value, est_error: err, method: Method::Mellin })
    }

    /// ζ_{Φ,w}(s) = s sin(πs)/π · M_w(−s), with removable singularities at
    /// integers handled through sinc.
    pub fn zeta(&self, s: &Complex) -> Result<SpectralValue> {
        let bits = self.prec.bits();
        let z = Complex::with_val(bits, -s);
        self.check_pole(&z)?;
        let pi = Float::with_val(bits, Constant::Pi);
        let re = s.real().to_f64();
        let near = re.round();
        let skip = (near >= 1.0
            && cabs(&Complex::with_val(bits, s - near as u32)).to_f64() < 0.5)
            .then_some(near as usize);
        let (series, tail) = self.series_part(&z, skip);
        let (integral, qerr) = self.quadrature(&z);
        let regular = series + integral - self.fourier_part(&z);
        let sin_pi = Complex::with_val(bits, s * &pi).sin();
        let gfac = Complex::with_val(bits, s * &sin_pi) / &pi;
        let mut value = Complex::with_val(bits, &regular * &gfac);
        value -= Complex::with_val(bits, &sin_pi * &self.kappa) / &pi;
        if let Some(l) = skip {
            let eps = Complex::with_val(bits, s - l as u32);
            let term = Complex::with_val(bits, s * sinc_pi(&eps)) * self.log_series.b(l);
            if l % 2 == 0 {
                value -= term;
            } else {
                value += term;
            }
        }
        if self.w.is_zero() {
            value -= sinc_pi(s);
        }
        let g_abs = cabs(&gfac).to_f64();
        let err = g_abs * (tail + qerr + self.subtraction_error(&z))
            + self.prec.tol(5) * cabs(&value).to_f64().max(1.0);
        Ok(SpectralValue { s: s.clone(), value, est_error: err, method: Method::Mellin })
    }

    /// Regular part of M_w at 0: Σ b_ℓ/ℓ + I(0) − Σ f_m/ρ_m.
    pub fn regular_at_zero(&self) -> (Float, f64) {
        let bits = self.prec.bits();
        let z = self.prec.czero();
        let (series, tail) = self.series_part(&z, None);
        let (integral, qerr) = self.quadrature(&z);
        let v = series + integral - self.fourier_part(&z);
        let err = tail + qerr + self.subtraction_error(&z);
        (Float::with_val(bits, v.real()), err)
    }

    /// RHS(0) = Σ b_n/n (1 − dλ^{−n}) + ∫_1^∞ [log Φ_w(x) − d log Φ_w(x/λ) − c_∞] dx/x.
    pub fn boundary_integral(&self) -> Result<(Float, f64)> {
        if self.w.is_zero() {
            return Err(Error::Unsupported("boundary integral needs w < 0".into()));
        }
        let bits = self.prec.bits();
        let d = self.degree as u32;
        let ln_mw = Float::with_val(bits, Float::with_val(bits, -&self.w).ln_ref());
        let c_inf = Float::with_val(bits, &ln_mw * (d - 1)) + &self.ln_lead;
        let log_phi_w = |ps: &Float| -> Float {
            let e = Float::with_val(bits, -ps).exp() * Float::with_val(bits, -&self.w);
            Float::with_val(bits, ps - &ln_mw) + e.ln_1p()
        };
        let mut fine = Float::new(bits);
        let mut coarse = Float::new(bits);
        for k in 1..self.psi.len() {
            for i in 0..self.nodes.points.len() {
                let val = log_phi_w(&self.psi[k][i])
                    - Float::with_val(bits, log_phi_w(&self.psi[k - 1][i]) * d)
                    - &c_inf;
                let t = Float::with_val(bits, &val * &self.nodes.weights[i]);
                if self.nodes.level[i] < self.level {
                    coarse += &t;
                }
                fine += t;
            }
        }
        let h = Float::with_val(bits, Float::i_exp(1, -(self.level as i32)));
        fine *= &h;
        coarse *= h * 2u32;
        let qerr = Float::with_val(53, &fine - &coarse).to_f64().abs();
        let lambda = Float::with_val(bits, self.ln_lambda.exp_ref());
        let mut series = Float::new(bits);
        let mut lam_n = Float::with_val(bits, 1);
        for n in 1..=self.log_series.order() {
            lam_n *= &lambda;
            let f = 1 - Float::with_val(bits, d / Float::with_val(bits, &lam_n));
            series += Float::with_val(bits, self.log_series.b(n) / n as u32) * f;
        }
        // tail beyond the last panel: |integrand| ≤ C e^{−c (x/λ)^ρ}
        let top = Float::with_val(53, &self.t * &lambda);
        let arg = self.tail_c.to_f64() * (top.to_f64() / lambda.to_f64()).powf(self.rho.to_f64());
        let c = (1.0 + d as f64) * (self.w.to_f64().abs() + 2.0) * self.kappa0.to_f64().exp();
        let tail = c * (-arg).exp() / (self.rho.to_f64() * arg);
        let (_, stail) = self.series_part(&self.prec.czero(), None);
        Ok((series + fine, qerr + tail + stail))
    }

    pub fn quadrature_level(&self) -> u32 {
        self.level
    }

    pub fn panel_count(&self) -> usize {
        self.panels
    }

    /// I(z) for diagnostics.
    pub fn integral_part(&self, z: &Complex) -> (Complex, f64) {
        self.quadrature(z)
    }
}

/// sin(πε)/(πε), 1 at ε = 0.
pub fn sinc_pi(eps: &Complex) -> Complex {
    let bits = eps.prec().0;
    let pi = Float::with_val(bits, Constant::Pi);
    let x = Complex::with_val(bits, eps * &pi);
    let small = Float::with_val(bits, Float::i_exp(1, -(bits as i32) / 4));
    if cabs(&x) < small {
        let x2 = Complex::with_val(bits, x.square_ref());
        return Complex::with_val(bits, (1, 0)) - x2 / 6u32;
    }
    Complex::with_val(bits, x.sin_ref()) / x
}

/// Pick x_0 = λ^j with certified c = min_{[x_0, λx_0]} (Ψ + κ_0)/x^ρ and the
/// smallest T with c T^ρ ≥ (D + 5) log 10 + log C + (1 + Re s_max) log T.
fn certify_tail(s: &PoincareSeries, w: &Float, kappa0: &Float) -> Result<(Float, Float, Float)> {
    let p = s.poly();
    if !p.nonnegative() {
        return Err(Error::TailCertificate(
            "monotone tail propagation needs nonnegative coefficients; supply a larger x0".into(),
        ));
    }
    let prec = s.precision();
    let bits = prec.bits();
    let rho = p.rho().to_f64();
    let lead = p.leading().to_f64();
    let ratio_sum: f64 = (1..p.degree()).map(|j| (p.coeff(j).to_f64() / lead).abs()).sum();
    let big_c = (ratio_sum + w.to_f64().abs() + 1.0) * kappa0.to_f64().exp() * (p.degree() as f64 + 1.0);
    let target = (prec.digits() as f64 + 5.0) * std::f64::consts::LN_10 + big_c.ln().max(0.0);
    let mut best: Option<(Float, Float, Float)> = None;
    let mut x0 = Float::with_val(bits, 1);
    for _ in 0..CERT_SEARCH {
        let mut c = f64::INFINITY;
        for j in 0..=CERT_SAMPLES {
            let frac = j as f64 / CERT_SAMPLES as f64;
            let x = Float::with_val(bits, p.ln_lambda() * Float::with_val(bits, frac)).exp() * &x0;
            let num = Float::with_val(bits, s.eval_log_phi(&x)? + kappa0);
            let den = (Float::with_val(bits, x.ln_ref()) * p.rho()).exp();
            c = c.min((num / den).to_f64());
        }
        let c = c * CERT_MARGIN;
        if c > 0.0 {
            let mut lt = x0.to_f64().ln().max(0.0);
            for _ in 0..50 {
                let need = ((target + (1.0 + MAX_RE_S) * lt) / c).ln() / rho;
                if (need - lt).abs() < 1e-9 {
                    break;
                }
                lt = need.max(x0.to_f64().ln());
            }
            let t = Float::with_val(bits, lt).exp();
            if best.as_ref().is_none_or(|b| t < b.2) {
                best = Some((x0.clone(), Float::with_val(bits, c), t));
            }
        }
        x0 *= p.lambda();
    }
    best.ok_or_else(|| Error::TailCertificate("no positive tail constant found; supply a larger x0".into()))
}
