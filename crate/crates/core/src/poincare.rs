//! The Poincaré function Φ(λz) = p(Φ(z)), Φ(0) = 0, Φ'(0) = 1: Taylor data,
//! evaluation by argument reduction and lifting, log-domain evaluation,
//! log-series b_ℓ(w) and the periodic amplitude F with its Fourier data.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::poly::DecimationPolynomial;
use crate::precision::{cabs, Precision};

pub const DEFAULT_ORDER: usize = 80;
pub const DEFAULT_REDUCE_RADIUS: f64 = 0.25;
const TAIL_SAFETY: f64 = 100.0;
/// Switch to the log-domain recursion once Φ exceeds 2^this.
const LOG_SWITCH_BITS: i32 = 256;
const NEWTON_CAP: usize = 200;
pub const LIFT_CAP: u32 = 200;

/// Truncated Taylor series of Φ at 0.
#[derive(Clone, Debug)]
pub struct PoincareSeries {
    poly: DecimationPolynomial,
    coeffs: Vec<Float>,
    used: usize,
    reduce_radius: Float,
    tail_bound: Float,
    kappa0: Float,
}

/// Φ(z) with an absolute error estimate and the number of lifts applied.
#[derive(Clone, Debug)]
pub struct PhiValue {
    pub value: Complex,
    pub err: Float,
    pub lifts: u32,
}

/// φ_n = [z^n] Σ_{j≥2} a_j Φ_{<n}^j / (λ^n − λ), with stored powers of Φ.
pub fn build_series(p: &DecimationPolynomial, order: usize) -> Result<PoincareSeries> {
    build_series_with_radius(p, order, DEFAULT_REDUCE_RADIUS)
}

pub fn build_series_with_radius(
    p: &DecimationPolynomial,
    order: usize,
    reduce_radius: f64,
) -> Result<PoincareSeries> {
    if order < 2 {
        return Err(Error::InvalidArgument("series order must be at least 2".into()));
    }
    if !(reduce_radius > 0.0 && reduce_radius < 1.0) {
        return Err(Error::InvalidArgument("reduction radius must lie in (0, 1)".into()));
    }
    let prec = p.precision();
    let bits = prec.bits();
    let d = p.degree();
    // pow[j][m] = [z^m] Φ^j, j = 1..d
    let mut pow = vec![vec![Float::new(bits); order + 1]; d + 1];
    pow[1][1] = Float::with_val(bits, 1);
    for j in 2..=d {
        if j <= order {
            pow[j][j] = Float::with_val(bits, 1);
        }
    }
    let lambda = p.lambda();
    let mut lam_n = Float::with_val(bits, lambda);
    for n in 2..=order {
        lam_n *= lambda;
        let mut num = Float::new(bits);
        for j in 2..=d {
            if j < n {
                let mut acc = Float::new(bits);
                for k in 1..n {
                    if n - k >= j - 1 {
                        acc += Float::with_val(bits, &pow[1][k] * &pow[j - 1][n - k]);
                    }
                }
                pow[j][n] = acc;
            }
            num += Float::with_val(bits, p.coeff(j) * &pow[j][n]);
        }
        let den = Float::with_val(bits, &lam_n - lambda);
        pow[1][n] = num / den;
    }
    let coeffs = pow.swap_remove(1);
    let r0 = prec.real(reduce_radius);
    let bits_eps = Float::with_val(bits, Float::i_exp(1, -(bits as i32) - 8));
    let mut used = order;
    let mut rn = Float::with_val(bits, 1);
    for (n, c) in coeffs.iter().enumerate().skip(1) {
        rn *= &r0;
        if n > 2 && Float::with_val(bits, c.abs_ref()) * &rn < bits_eps {
            used = n;
            break;
        }
    }
    let last = Float::with_val(bits, coeffs[used].abs_ref());
    let tail_bound = Float::with_val(53, &last * Float::with_val(bits, (&r0).pow(used as u32 + 1)))
        * TAIL_SAFETY;
    let kappa0 = Float::with_val(bits, p.leading().ln_ref()) / (d as u32 - 1);
    Ok(PoincareSeries { poly: p.clone(), coeffs, used, reduce_radius: r0, tail_bound, kappa0 })
}

impl PoincareSeries {
    pub fn poly(&self) -> &DecimationPolynomial {
        &self.poly
    }

    pub fn precision(&self) -> Precision {
        self.poly.precision()
    }

    fn bits(&self) -> u32 {
        self.poly.bits()
    }

    /// φ_n; φ_0 = 0.
    pub fn coeff(&self, n: usize) -> &Float {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[Float] {
        &self.coeffs
    }

    /// Truncation order N.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn reduce_radius(&self) -> &Float {
        &self.reduce_radius
    }

    pub fn tail_bound(&self) -> &Float {
        &self.tail_bound
    }

    /// κ_0 = log a_d/(d − 1).
    pub fn kappa0(&self) -> &Float {
        &self.kappa0
    }

    /// max_n |λ^n φ_n − [z^n] p(Φ_{≤n})| / |λ^n φ_n|.
    pub fn recursion_residual(&self) -> f64 {
        let bits = self.bits();
        let n_max = self.order();
        // [z^n] p(Φ) via repeated multiplication of truncated series.
        let mut power = self.coeffs.clone();
        let mut total: Vec<Float> =
            self.coeffs.iter().map(|c| Float::with_val(bits, c * self.poly.coeff(1))).collect();
        for j in 2..=self.poly.degree() {
            let mut next = vec![Float::new(bits); n_max + 1];
            for a in 1..=n_max {
                if power[a].is_zero() {
                    continue;
                }
                for b in 1..=(n_max - a) {
                    next[a + b] += Float::with_val(bits, &power[a] * &self.coeffs[b]);
                }
            }
            power = next;
            for n in 0..=n_max {
                total[n] += Float::with_val(bits, &power[n] * self.poly.coeff(j));
            }
        }
        let mut worst: f64 = 0.0;
        let mut lam_n = Float::with_val(bits, 1);
        for n in 1..=n_max {
            lam_n *= self.poly.lambda();
            let lhs = Float::with_val(bits, &lam_n * &self.coeffs[n]);
            if lhs.is_zero() {
                continue;
            }
            let r = Float::with_val(bits, &lhs - &total[n]) / &lhs;
            worst = worst.max(r.to_f64().abs());
        }
        worst
    }

    /// Truncated series Σ φ_n z^n.
    pub fn eval_series(&self, z: &Complex) -> Complex {
        let mut acc = Complex::new(self.bits());
        for c in self.coeffs[1..=self.used].iter().rev() {
            acc += c;
            acc *= z;
        }
        acc
    }

    pub fn eval_series_real(&self, x: &Float) -> Float {
        let mut acc = Float::new(self.bits());
        for c in self.coeffs[1..=self.used].iter().rev() {
            acc += c;
            acc *= x;
        }
        acc
    }

    fn eval_series_derivative_real(&self, x: &Float) -> Float {
        let mut acc = Float::new(self.bits());
        for (n, c) in self.coeffs[1..=self.used].iter().enumerate().rev() {
            acc *= x;
            acc += Float::with_val(self.bits(), c * (n as u32 + 1));
        }
        acc
    }

    fn eval_series_derivative(&self, z: &Complex) -> Complex {
        let mut acc = Complex::new(self.bits());
        for (n, c) in self.coeffs[1..=self.used].iter().enumerate().rev() {
            acc *= z;
            acc += Float::with_val(self.bits(), c * (n as u32 + 1));
        }
        acc
    }

    /// Smallest n with |z|/λ^n ≤ r₀, and λ^n.
    fn reduction(&self, modulus: &Float) -> (u32, Float) {
        let bits = self.bits();
        let mut n = 0u32;
        let mut scale = Float::with_val(bits, 1);
        let mut m = modulus.clone();
        while m > self.reduce_radius {
            m /= self.poly.lambda();
            scale *= self.poly.lambda();
            n += 1;
        }
        (n, scale)
    }

    /// Φ(z) by reduction to |z| ≤ r₀ and n lifts through p.
    pub fn eval_phi(&self, z: &Complex) -> Result<PhiValue> {
        let bits = self.bits();
        let (n, scale) = self.reduction(&cabs(z));
        let u = Complex::with_val(bits, z / &scale);
        let mut v = self.eval_series(&u);
        let unit = Float::with_val(53, Float::i_exp(1, 4 - bits as i32));
        let mut err = Float::with_val(53, &self.tail_bound) + Float::with_val(53, &unit * cabs(&v));
        for step in 0..n {
            let dp = cabs(&self.poly.derivative(&v));
            v = self.poly.eval(&v);
            if !v.real().is_finite() || !v.imag().is_finite() {
                return Err(Error::Overflow { step: step as usize + 1 });
            }
            err = err * Float::with_val(53, &dp) + Float::with_val(53, &unit * cabs(&v));
        }
        Ok(PhiValue { value: v, err, lifts: n })
    }

    /// Φ(x) on the real axis.
    pub fn eval_phi_real(&self, x: &Float) -> Result<Float> {
        let bits = self.bits();
        let (n, scale) = self.reduction(&Float::with_val(bits, x.abs_ref()));
        let mut v = self.eval_series_real(&Float::with_val(bits, x / &scale));
        for step in 0..n {
            v = self.poly.eval_real(&v);
            if !v.is_finite() {
                return Err(Error::Overflow { step: step as usize + 1 });
            }
        }
        Ok(v)
    }

    /// Ψ(x) = log Φ(x) for x > 0 via Ψ(λx) = dΨ(x) + log a_d + log(1 + Σ_{j<d} (a_j/a_d) e^{−(d−j)Ψ}).
    pub fn eval_log_phi(&self, x: &Float) -> Result<Float> {
        if !x.is_finite() || *x <= 0 {
            return Err(Error::InvalidArgument("log Φ needs x > 0".into()));
        }
        let bits = self.bits();
        let (n, scale) = self.reduction(x);
        let mut v = self.eval_series_real(&Float::with_val(bits, x / &scale));
        let mut lifts = 0;
        let threshold = Float::with_val(bits, Float::i_exp(1, LOG_SWITCH_BITS));
        while lifts < n && v < threshold {
            v = self.poly.eval_real(&v);
            lifts += 1;
        }
        if v <= 0 {
            return Err(Error::Numerical("Φ is not positive on the reduction path".into()));
        }
        let mut psi = v.ln();
        if lifts == n {
            return Ok(psi);
        }
        let d = self.poly.degree();
        let lead = self.poly.leading();
        let ln_lead = Float::with_val(bits, lead.ln_ref());
        let ratios: Vec<Float> =
            (1..d).map(|j| Float::with_val(bits, self.poly.coeff(j) / lead)).collect();
        while lifts < n {
            let e = Float::with_val(bits, -&psi).exp();
            let corr = self.log_correction(&ratios, &e);
            psi *= d as u32;
            psi += &ln_lead;
            psi += corr.ln_1p();
            lifts += 1;
        }
        Ok(psi)
    }

    fn log_correction(&self, ratios: &[Float], e: &Float) -> Float {
        let bits = self.bits();
        let d = ratios.len() + 1;
        let mut s = Float::new(bits);
        for (i, r) in ratios.iter().enumerate() {
            let j = i + 1;
            s += Float::with_val(bits, r * Float::with_val(bits, e.pow((d - j) as u32)));
        }
        s
    }

    /// Solves Φ(z) = y near 0 by Newton on the series; |y| must be small.
    pub fn inverse_local_real(&self, y: &Float) -> Result<Float> {
        let bits = self.bits();
        let mut z = y.clone();
        let tol = Float::with_val(bits, Float::i_exp(1, 6 - bits as i32));
        for _ in 0..NEWTON_CAP {
            let f = self.eval_series_real(&z) - y;
            let step = f / self.eval_series_derivative_real(&z);
            z -= &step;
            if Float::with_val(bits, step.abs_ref()) <= Float::with_val(bits, z.abs_ref()) * &tol {
                return Ok(z);
            }
        }
        Err(Error::RootSolver { iterations: NEWTON_CAP, residual: f64::NAN })
    }

    pub fn inverse_local(&self, y: &Complex) -> Result<Complex> {
        let bits = self.bits();
        let mut z = y.clone();
        let tol = Float::with_val(bits, Float::i_exp(1, 6 - bits as i32));
        for _ in 0..NEWTON_CAP {
            let f = self.eval_series(&z) - y;
            let step = f / self.eval_series_derivative(&z);
            z -= &step;
            if cabs(&step) <= cabs(&z) * &tol {
                return Ok(z);
            }
        }
        Err(Error::RootSolver { iterations: NEWTON_CAP, residual: f64::NAN })
    }

    /// t(y) = −lim_n λ^n q_1^{(n)}(y) for real y in the principal basin:
    /// apply q_1 until |y| is small, invert the series, rescale.
    pub fn principal_limit(&self, y: &Float) -> Result<Float> {
        let bits = self.bits();
        let small = Float::with_val(bits, &self.reduce_radius / 4u32);
        let mut v = y.clone();
        let mut scale = Float::with_val(bits, 1);
        let mut guard = 0;
        while Float::with_val(bits, v.abs_ref()) > small {
            v = self.poly.q1_real(&v);
            scale *= self.poly.lambda();
            guard += 1;
            if guard > 10_000 {
                return Err(Error::Numerical("principal branch iteration did not contract".into()));
            }
        }
        let z = self.inverse_local_real(&v)?;
        Ok(-(z * scale))
    }
}

/// Coefficients b_ℓ(w) of log(1 − Φ(z)/w) (w < 0) or log(Φ(z)/z) (w = 0).
#[derive(Clone, Debug)]
pub struct LogPhiSeries {
    pub w: Float,
    b: Vec<Float>,
    pub radius_lower_bound: Float,
}

pub fn build_log_phi_series(s: &PoincareSeries, w: &Float, order: usize) -> Result<LogPhiSeries> {
    if *w > 0 {
        return Err(Error::InvalidArgument("log series needs w <= 0".into()));
    }
    let bits = s.bits();
    let n_max = order.min(s.order() - 1).max(1);
    let mut a = vec![Float::new(bits); n_max + 1];
    a[0] = Float::with_val(bits, 1);
    for k in 1..=n_max {
        a[k] = if w.is_zero() {
            s.coeff(k + 1).clone()
        } else {
            -Float::with_val(bits, s.coeff(k) / w)
        };
    }
    // n b_n = n a_n − Σ_{k<n} k b_k a_{n−k}
    let mut b = vec![Float::new(bits); n_max + 1];
    for n in 1..=n_max {
        let mut acc = Float::with_val(bits, &a[n] * n as u32);
        for k in 1..n {
            acc -= Float::with_val(bits, &b[k] * &a[n - k]) * k as u32;
        }
        b[n] = acc / n as u32;
    }
    let radius_lower_bound = smallest_zero(s, w)?;
    Ok(LogPhiSeries { w: w.clone(), b, radius_lower_bound })
}

/// Smallest μ > 0 with Φ(−μ) = w along real-Julia branch structure.
fn smallest_zero(s: &PoincareSeries, w: &Float) -> Result<Float> {
    if !w.is_zero() {
        return s.principal_limit(w);
    }
    let p = s.poly();
    let pre = p.real_preimages(w)?;
    let mut best: Option<Float> = None;
    for y in pre.iter().skip(1) {
        let t = Float::with_val(s.bits(), s.principal_limit(y)? * p.lambda());
        if best.as_ref().is_none_or(|b| t < *b) {
            best = Some(t);
        }
    }
    best.ok_or_else(|| Error::Numerical("no nonprincipal zero branch".into()))
}

impl LogPhiSeries {
    /// b_ℓ for 1 ≤ ℓ ≤ N; zero beyond.
    pub fn b(&self, l: usize) -> Float {
        self.b.get(l).cloned().unwrap_or_else(|| Float::new(self.w.prec()))
    }

    pub fn order(&self) -> usize {
        self.b.len() - 1
    }

    pub fn coeffs(&self) -> &[Float] {
        &self.b
    }

    /// Σ_{ℓ≤N} b_ℓ z^ℓ.
    pub fn eval(&self, z: &Complex) -> Complex {
        let mut acc = Complex::new(z.prec());
        for c in self.b[1..].iter().rev() {
            acc += c;
            acc *= z;
        }
        acc
    }
}

/// Samples of the period-1 amplitude F and its Fourier coefficients.
#[derive(Clone, Debug)]
pub struct PeriodicAmplitude {
    pub samples: Vec<(Float, Float)>,
    fourier: Vec<Complex>,
    m_max: usize,
    pub est_error: f64,
    pub n_lift: u32,
    pub decay_rate: Option<f64>,
}

/// F(u_j) = lim (Ψ(λ^{n+u_j}) + κ_0)/d^{n+u_j}, lifting n until samples settle.
pub fn build_periodic_f(s: &PoincareSeries, grid_size: usize, n_lift: u32) -> Result<PeriodicAmplitude> {
    if grid_size < 8 || !grid_size.is_power_of_two() {
        return Err(Error::InvalidArgument("grid size must be a power of two >= 8".into()));
    }
    let prec = s.precision();
    let threshold = prec.tol(8);
    let mut n = n_lift.max(1);
    let mut prev = sample_f(s, grid_size, n)?;
    loop {
        let next = sample_f(s, grid_size, n + 1)?;
        let mut change: f64 = 0.0;
        for ((_, a), (_, b)) in prev.iter().zip(&next) {
            change = change.max(Float::with_val(53, a - b).to_f64().abs());
        }
        n += 1;
        if change < threshold {
            let est_error = change.max(prec.tol(1));
            return Ok(PeriodicAmplitude {
                samples: next,
                fourier: Vec::new(),
                m_max: 0,
                est_error,
                n_lift: n,
                decay_rate: None,
            });
        }
        if n >= LIFT_CAP {
            return Err(Error::LiftNonConvergence { cap: LIFT_CAP, change });
        }
        prev = next;
    }
}

fn sample_f(s: &PoincareSeries, grid: usize, n: u32) -> Result<Vec<(Float, Float)>> {
    let bits = s.bits();
    let p = s.poly();
    let ln_lambda = p.ln_lambda();
    let ln_d = Float::with_val(bits, p.degree() as u32).ln();
    let mut out = Vec::with_capacity(grid);
    for j in 0..grid {
        let u = Float::with_val(bits, j as u32) / grid as u32;
        let e = Float::with_val(bits, &u + n);
        let z = Float::with_val(bits, &e * ln_lambda).exp();
        let psi = s.eval_log_phi(&z)?;
        let zr = Float::with_val(bits, &e * &ln_d).exp();
        out.push((u, (psi + s.kappa0()) / zr));
    }
    Ok(out)
}

impl PeriodicAmplitude {
    /// f_m for |m| ≤ M by the discrete Fourier sum; requires grid ≥ 8M.
    pub fn with_fourier(mut self, m_max: usize) -> Result<Self> {
        let g = self.samples.len();
        if g < 8 * m_max {
            return Err(Error::InvalidArgument(format!("grid {g} too small for M = {m_max}")));
        }
        let bits = self.samples[0].1.prec();
        let two_pi = Float::with_val(bits, Constant::Pi) * 2u32;
        let roots: Vec<Complex> = (0..g)
            .map(|j| {
                let ang = Float::with_val(bits, &two_pi * j as u32) / g as u32;
                Complex::with_val(bits, (ang.clone().cos(), -ang.sin()))
            })
            .collect();
        let mut fourier = Vec::with_capacity(2 * m_max + 1);
        for m in -(m_max as i64)..=(m_max as i64) {
            let mut acc = Complex::new(bits);
            for (j, (_, f)) in self.samples.iter().enumerate() {
                let idx = ((m.rem_euclid(g as i64) as usize) * j) % g;
                acc += Complex::with_val(bits, &roots[idx] * f);
            }
            fourier.push(acc / g as u32);
        }
        self.fourier = fourier;
        self.m_max = m_max;
        self.decay_rate = self.fit_decay();
        Ok(self)
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    /// f_m (zero beyond M).
    pub fn f(&self, m: i64) -> Complex {
        if m.unsigned_abs() as usize > self.m_max || self.fourier.is_empty() {
            let bits = self.samples[0].1.prec();
            return Complex::new(bits);
        }
        self.fourier[(m + self.m_max as i64) as usize].clone()
    }

    /// max_{m≠0} |f_m|.
    pub fn max_nonzero_mode(&self) -> f64 {
        (1..=self.m_max as i64).map(|m| cabs(&self.f(m)).to_f64()).fold(0.0, f64::max)
    }

    /// Slope of log|f_m| against m over coefficients above 10× the noise.
    fn fit_decay(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = (1..=self.m_max as i64)
            .filter_map(|m| {
                let a = cabs(&self.f(m)).to_f64();
                (a > 10.0 * self.est_error).then(|| (m as f64, a.ln()))
            })
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(sxy / sxx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(c: &[f64], digits: u32) -> PoincareSeries {
        let p = DecimationPolynomial::from_f64(c, Precision::new(digits)).unwrap();
        build_series(&p, DEFAULT_ORDER).unwrap()
    }

    fn close(a: &Float, b: f64, tol: f64) -> bool {
        (a.to_f64() - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn gasket_coefficients() {
        let s = series(&[5.0, 1.0], 40);
        assert_eq!(s.coeff(1).to_f64(), 1.0);
        assert!(close(s.coeff(2), 1.0 / 20.0, 1e-30));
        assert!(close(s.coeff(3), 1.0 / 1200.0, 1e-30));
        assert!(s.recursion_residual() < 1e-35);
    }

    #[test]
    fn sinh_coefficients() {
        let s = series(&[4.0, 1.0], 40);
        assert!(close(s.coeff(2), 1.0 / 12.0, 1e-30));
        assert!(close(s.coeff(3), 1.0 / 360.0, 1e-30));
    }

    #[test]
    fn cubic_series_residual() {
        let s = series(&[9.0, 6.0, 1.0], 40);
        assert!(s.recursion_residual() < 1e-35);
        assert!(s.tail_bound().to_f64() < 1e-40);
    }

    #[test]
    fn sinh_values() {
        let s = series(&[4.0, 1.0], 40);
        let prec = s.precision();
        let v = s.eval_phi(&prec.complex(1)).unwrap();
        let exact = 4.0 * 0.5f64.sinh().powi(2);
        assert!((v.value.real().to_f64() - exact).abs() < 1e-15);
        let four_pi2 = Float::with_val(prec.bits(), prec.pi().square_ref()) * 4u32;
        let z = prec.complex(-four_pi2);
        let v = s.eval_phi(&z).unwrap();
        assert!(cabs(&v.value) < 1e-30);
    }

    #[test]
    fn log_phi_sinh() {
        let s = series(&[4.0, 1.0], 40);
        let prec = s.precision();
        let psi = s.eval_log_phi(&prec.real(100)).unwrap();
        let exact = 2.0 * (2.0 * 5f64.sinh()).ln();
        assert!((psi.to_f64() - exact).abs() < 1e-13);
        assert!(s.eval_log_phi(&prec.real(0)).is_err());
        // far beyond the f64 range of Φ
        let big = prec.real(1e12);
        let psi = s.eval_log_phi(&big).unwrap();
        assert!((psi.to_f64() - 1e6).abs() < 1e-6);
    }

    #[test]
    fn log_phi_small_argument() {
        let s = series(&[5.0, 1.0], 40);
        let prec = s.precision();
        let x = prec.real(1e-6);
        let psi = s.eval_log_phi(&x).unwrap();
        let approx = 1e-6f64.ln() + 1e-6 / 20.0;
        assert!((psi.to_f64() - approx).abs() < 1e-12);
    }

    #[test]
    fn principal_limit_gasket() {
        let s = series(&[5.0, 1.0], 40);
        let prec = s.precision();
        let t = s.principal_limit(&prec.real(-2)).unwrap();
        assert!((t.to_f64() - 2.2421331852).abs() < 1e-9);
        let back = s.eval_phi_real(&Float::with_val(prec.bits(), -&t)).unwrap();
        assert!((back.to_f64() + 2.0).abs() < 1e-30);
    }

    #[test]
    fn log_series_examples() {
        let s = series(&[4.0, 1.0], 40);
        let prec = s.precision();
        let l = build_log_phi_series(&s, &prec.real(-4), 40).unwrap();
        assert!(close(&l.b(1), 0.25, 1e-30));
        assert!(close(&l.b(2), -1.0 / 96.0, 1e-30));
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((l.radius_lower_bound.to_f64() - pi2).abs() < 1e-12);
        let l0 = build_log_phi_series(&s, &prec.zero(), 40).unwrap();
        assert!(close(&l0.b(1), 1.0 / 12.0, 1e-30));
        assert!(close(&l0.b(2), -1.0 / 1440.0, 1e-30));
        assert!((l0.radius_lower_bound.to_f64() - 4.0 * pi2).abs() < 1e-12);
    }

    #[test]
    fn sinh_amplitude_constant() {
        let s = series(&[4.0, 1.0], 30);
        let a = build_periodic_f(&s, 32, 4).unwrap().with_fourier(4).unwrap();
        assert!((a.f(0).real().to_f64() - 1.0).abs() < 1e-25);
        assert!(a.max_nonzero_mode() <= a.est_error);
    }

    #[test]
    fn gasket_amplitude_oscillates() {
        let s = series(&[5.0, 1.0], 30);
        let a = build_periodic_f(&s, 64, 4).unwrap().with_fourier(6).unwrap();
        assert!((cabs(&a.f(0)).to_f64() - 1.0783621).abs() < 1e-6);
        assert!(a.max_nonzero_mode() > 10.0 * a.est_error);
        let c = Complex::with_val(100, a.f(1).conj_ref());
        assert!(cabs(&Complex::with_val(100, &c - &a.f(-1))) < 1e-35);
        assert!(a.decay_rate.unwrap() < -5.0);
        assert!(a.samples.iter().all(|(_, f)| *f > 0));
    }
}
