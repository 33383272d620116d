//! Spectral-decimation polynomials: evaluation, iteration, inverse branches,
//! multiplicity generating functions and model validation.

mod gf;
mod model;
pub mod roots;

pub use gf::{GfPole, RationalGF};
pub use model::{
    builtin_model, validate_model, Boundary, Check, DecimationModel, GasketFamily, ModelFile,
    OffsetFile, OffsetSpec, ValidationReport, BUILTIN_MODELS,
};

use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::precision::{cabs, Precision};

/// p(x) = a_1 x + … + a_d x^d with p(0) = 0 and λ = a_1 > 1.
#[derive(Clone, Debug)]
pub struct DecimationPolynomial {
    coeffs: Vec<Float>,
    prec: Precision,
    ln_lambda: Float,
    rho: Float,
    sigma: Float,
    k: u32,
}

/// Result of forward iteration; `overflow_step` is set when the orbit left
/// the representable range.
#[derive(Clone, Debug)]
pub struct Iterated {
    pub value: Complex,
    pub overflow_step: Option<usize>,
}

impl DecimationPolynomial {
    /// Builds p from a_1..a_d.
    pub fn new(coeffs: Vec<Float>, prec: Precision) -> Result<Self> {
        let bits = prec.bits();
        let coeffs: Vec<Float> = coeffs.into_iter().map(|c| Float::with_val(bits, c)).collect();
        let d = coeffs.len();
        if d < 2 {
            return Err(Error::InvalidModel(format!("degree must be at least 2, got {d}")));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidModel("coefficients must be finite".into()));
        }
        if coeffs[d - 1].is_zero() {
            return Err(Error::InvalidModel("leading coefficient a_d must be nonzero".into()));
        }
        if coeffs[0] <= 1 {
            return Err(Error::InvalidModel(format!(
                "multiplier lambda = p'(0) must exceed 1, got {}",
                coeffs[0].to_f64()
            )));
        }
        let ln_lambda = Float::with_val(bits, coeffs[0].ln_ref());
        let ln_d = Float::with_val(bits, d as u32).ln();
        let rho = Float::with_val(bits, &ln_d / &ln_lambda);
        let sigma = Float::with_val(bits, 1u32) / &ln_lambda;
        let k = rho.to_f64().floor() as u32;
        Ok(DecimationPolynomial { coeffs, prec, ln_lambda, rho, sigma, k })
    }

    pub fn from_f64(coeffs: &[f64], prec: Precision) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| prec.real(c)).collect(), prec)
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn bits(&self) -> u32 {
        self.prec.bits()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// a_1..a_d.
    pub fn coeffs(&self) -> &[Float] {
        &self.coeffs
    }

    /// a_j for 1 ≤ j ≤ d.
    pub fn coeff(&self, j: usize) -> &Float {
        &self.coeffs[j - 1]
    }

    pub fn leading(&self) -> &Float {
        &self.coeffs[self.coeffs.len() - 1]
    }

    pub fn lambda(&self) -> &Float {
        &self.coeffs[0]
    }

    pub fn ln_lambda(&self) -> &Float {
        &self.ln_lambda
    }

    pub fn rho(&self) -> &Float {
        &self.rho
    }

    pub fn sigma(&self) -> &Float {
        &self.sigma
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// True when every coefficient is nonnegative (Φ > 0 on the positive axis).
    pub fn nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_sign_negative() || c.is_zero())
    }

    pub fn eval(&self, z: &Complex) -> Complex {
        let mut acc = Complex::new(z.prec());
        for c in self.coeffs.iter().rev() {
            acc += c;
            acc *= z;
        }
        acc
    }

    pub fn eval_real(&self, x: &Float) -> Float {
        let mut acc = Float::new(x.prec());
        for c in self.coeffs.iter().rev() {
            acc += c;
            acc *= x;
        }
        acc
    }

    pub fn derivative(&self, z: &Complex) -> Complex {
        let mut acc = Complex::new(z.prec());
        for (j, c) in self.coeffs.iter().enumerate().rev() {
            acc *= z;
            acc += Float::with_val(c.prec(), c * (j as u32 + 1));
        }
        acc
    }

    pub fn derivative_real(&self, x: &Float) -> Float {
        let mut acc = Float::new(x.prec());
        for (j, c) in self.coeffs.iter().enumerate().rev() {
            acc *= x;
            acc += Float::with_val(c.prec(), c * (j as u32 + 1));
        }
        acc
    }

    /// p^{(n)}(z).
    pub fn iterate(&self, n: usize, z: &Complex) -> Iterated {
        let mut v = z.clone();
        for step in 0..n {
            v = self.eval(&v);
            if !v.real().is_finite() || !v.imag().is_finite() {
                return Iterated { value: v, overflow_step: Some(step + 1) };
            }
        }
        Iterated { value: v, overflow_step: None }
    }

    /// p̃(x) = −p(−x) in machine precision (positive-spectrum conjugate).
    pub fn conjugate_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (j, c) in self.coeffs.iter().enumerate().rev() {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc = (acc + sign * c.to_f64()) * x;
        }
        acc
    }

    /// Ascending coefficients of p(x) − y.
    fn shifted_coeffs(&self, y: &Complex) -> Vec<Complex> {
        let bits = self.bits();
        let mut c = Vec::with_capacity(self.degree() + 1);
        c.push(Complex::with_val(bits, -y));
        for a in &self.coeffs {
            c.push(Complex::with_val(bits, a));
        }
        c
    }

    /// The d roots of p(x) = y. Index 0 is the principal branch q_1 (root
    /// closest to 0); the rest follow by descending real part, then imaginary part.
    pub fn preimages(&self, y: &Complex) -> Result<Vec<Complex>> {
        let bits = self.bits();
        let y = Complex::with_val(bits, y);
        let mut roots = if self.degree() == 2 {
            self.quadratic_preimages(&y)
        } else {
            let mut r = roots::durand_kerner(&self.shifted_coeffs(&y), bits)?;
            for z in r.iter_mut() {
                self.newton_polish(z, &y);
            }
            r
        };
        let principal = (0..roots.len())
            .min_by(|&i, &j| cabs(&roots[i]).partial_cmp(&cabs(&roots[j])).unwrap())
            .unwrap_or(0);
        roots.swap(0, principal);
        roots[1..].sort_by(|a, b| {
            b.real()
                .partial_cmp(a.real())
                .unwrap()
                .then(b.imag().partial_cmp(a.imag()).unwrap())
        });
        Ok(roots)
    }

    /// Preimages ordered by continuity with a previous branch tuple.
    pub fn preimages_tracked(&self, y: &Complex, previous: &[Complex]) -> Result<Vec<Complex>> {
        let mut pool = self.preimages(y)?;
        if previous.len() != pool.len() {
            return Ok(pool);
        }
        let mut out = Vec::with_capacity(pool.len());
        for prev in previous {
            let idx = (0..pool.len())
                .min_by(|&i, &j| {
                    let di = cabs(&Complex::with_val(self.bits(), &pool[i] - prev));
                    let dj = cabs(&Complex::with_val(self.bits(), &pool[j] - prev));
                    di.partial_cmp(&dj).unwrap()
                })
                .unwrap();
            out.push(pool.swap_remove(idx));
        }
        Ok(out)
    }

    /// q_1 = 2y/(a_1 + s), q_2 = −(a_1 + s)/(2a_2) with s = √(a_1² + 4a_2 y)
    /// oriented along a_1; cancellation-free near y = 0.
    fn quadratic_preimages(&self, y: &Complex) -> Vec<Complex> {
        let bits = self.bits();
        let a1 = &self.coeffs[0];
        let a2 = &self.coeffs[1];
        let mut disc = Complex::with_val(bits, y * Float::with_val(bits, a2 * 4u32));
        disc += Float::with_val(bits, a1.square_ref());
        let mut s = disc.sqrt();
        if s.real().is_sign_negative() && !s.real().is_zero() {
            s = -s;
        }
        let sum = Complex::with_val(bits, &s + a1);
        let q1 = Complex::with_val(bits, y * 2u32) / &sum;
        let q2 = -(sum / Float::with_val(bits, a2 * 2u32));
        vec![q1, q2]
    }

    fn newton_polish(&self, z: &mut Complex, y: &Complex) {
        for _ in 0..3 {
            let f = Complex::with_val(self.bits(), self.eval(z) - y);
            let df = self.derivative(z);
            if cabs(&df).is_zero() {
                return;
            }
            *z -= f / df;
        }
    }

    /// Real roots of p(x) = y in descending order, for real y.
    /// A slightly negative discriminant at a critical value is clamped to a double root.
    pub fn real_preimages(&self, y: &Float) -> Result<Vec<Float>> {
        let bits = self.bits();
        if self.degree() == 2 {
            let a1 = &self.coeffs[0];
            let a2 = &self.coeffs[1];
            let mut disc = Float::with_val(bits, a1.square_ref());
            disc += Float::with_val(bits, y * Float::with_val(bits, a2 * 4u32));
            let scale = Float::with_val(bits, a1.square_ref());
            let clamp = Float::with_val(bits, &scale * self.prec.tol(8));
            if disc.is_sign_negative() {
                if Float::with_val(bits, -&disc) > clamp {
                    return Ok(Vec::new());
                }
                disc = Float::new(bits);
            }
            let s = disc.sqrt();
            let sum = Float::with_val(bits, &s + a1);
            let q1 = Float::with_val(bits, y * 2u32) / &sum;
            let q2 = -(sum / Float::with_val(bits, a2 * 2u32));
            let mut r = vec![q1, q2];
            r.sort_by(|a, b| b.partial_cmp(a).unwrap());
            return Ok(r);
        }
        let yc = Complex::with_val(bits, y);
        let roots = self.preimages(&yc)?;
        let mut out: Vec<Float> = roots
            .into_iter()
            .filter(|z| {
                let im = Float::with_val(bits, z.imag().abs_ref());
                let re = Float::with_val(bits, z.real().abs_ref()) + 1u32;
                im <= re * self.prec.tol(6).sqrt()
            })
            .map(|z| z.real().clone())
            .collect();
        out.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(out)
    }

    /// Principal inverse branch q_1 on the real axis.
    pub fn q1_real(&self, y: &Float) -> Float {
        let bits = self.bits();
        if self.degree() == 2 {
            let a1 = &self.coeffs[0];
            let mut disc = Float::with_val(bits, a1.square_ref());
            disc += Float::with_val(bits, y * Float::with_val(bits, &self.coeffs[1] * 4u32));
            if disc.is_sign_negative() {
                disc = Float::new(bits);
            }
            let sum = disc.sqrt() + a1;
            return Float::with_val(bits, y * 2u32) / sum;
        }
        // Newton from the linearization; adequate for |y| small relative to the critical values.
        let mut x = Float::with_val(bits, y / self.lambda());
        for _ in 0..200 {
            let f = Float::with_val(bits, self.eval_real(&x) - y);
            let df = self.derivative_real(&x);
            let step = f / df;
            x -= &step;
            if step.is_zero() || Float::with_val(bits, step.abs_ref()) <= Float::with_val(bits, x.abs_ref()) * self.prec.tol(-4) {
                break;
            }
        }
        x
    }

    /// Leftmost real root of p.
    pub fn leftmost_real_root(&self) -> Result<Float> {
        let r = self.real_preimages(&self.prec.zero())?;
        r.into_iter()
            .min_by(|a, b| a.partial_cmp(b).unwrap())
            .ok_or_else(|| Error::InvalidModel("p has no real roots besides 0".into()))
    }
}
