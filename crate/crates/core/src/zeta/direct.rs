//! ζ_{Φ,w}(s) = Σ μ^{−s} over the zero set, summed by geometric shells with
//! a ratio tail and Wynn ε acceleration.

use rug::ops::Pow;
use rug::{Complex, Float};

use super::{Method, SpectralValue};
use crate::error::{Error, Result};
use crate::poincare::PoincareSeries;
use crate::precision::cabs;
use crate::spectrum::{mu_solutions_with_scale, MuSolution};

/// Cached zero set of Φ + |w| up to τλ^{shells}.
#[derive(Clone, Debug)]
pub struct DirectSum {
    pub w: Float,
    roots: Vec<MuSolution>,
    log_mu: Vec<Float>,
    shell_of: Vec<usize>,
    pub shells: usize,
    tau: Float,
    lambda: Float,
    rho: Float,
    bits: u32,
    rounding: f64,
}

impl DirectSum {
    pub fn new(s: &PoincareSeries, w: &Float, tau: &Float, shells: usize) -> Result<Self> {
        let p = s.poly();
        let bits = p.bits();
        let prec = s.precision();
        let bound = Float::with_val(bits, p.lambda().pow(shells as u32)) * tau;
        let roots = mu_solutions_with_scale(s, w, &bound, prec.tol(10), tau)?;
        if let Some(bad) = roots.iter().find(|r| !r.verified) {
            return Err(Error::Numerical(format!(
                "zero at mu = {} failed verification (residual {:e})",
                bad.mu.to_f64(),
                bad.residual
            )));
        }
        let mut shell_of = Vec::with_capacity(roots.len());
        let mut edge = tau.clone();
        let mut shell = 0usize;
        for r in &roots {
            while r.mu > edge {
                edge *= p.lambda();
                shell += 1;
            }
            shell_of.push(shell.min(shells));
        }
        let log_mu = roots.iter().map(|r| Float::with_val(bits, r.mu.ln_ref())).collect();
        Ok(DirectSum {
            w: w.clone(),
            roots,
            log_mu,
            shell_of,
            shells,
            tau: tau.clone(),
            lambda: p.lambda().clone(),
            rho: p.rho().clone(),
            bits,
            rounding: prec.tol(3),
        })
    }

    pub fn roots(&self) -> &[MuSolution] {
        &self.roots
    }

    pub fn bound(&self) -> Float {
        Float::with_val(self.bits, (&self.lambda).pow(self.shells as u32)) * &self.tau
    }

    /// Direct sum for ℜs > ρ.
    pub fn zeta(&self, s: &Complex) -> Result<SpectralValue> {
        let bits = self.bits;
        if *s.real() <= self.rho {
            return Err(Error::InvalidArgument(format!(
                "direct sum diverges for Re s = {} <= rho",
                s.real().to_f64()
            )));
        }
        let mut shell_sums = vec![Complex::new(bits); self.shells + 1];
        for ((r, lm), &sh) in self.roots.iter().zip(&self.log_mu).zip(&self.shell_of) {
            let term = (-Complex::with_val(bits, s * lm)).exp() * r.multiplicity;
            shell_sums[sh] += term;
        }
        // r = λ^{ρ−s}
        let ln_lambda = Float::with_val(bits, self.lambda.ln_ref());
        let ratio = Complex::with_val(bits, (Complex::with_val(bits, -s) + &self.rho) * &ln_lambda).exp();
        let tail_factor = Complex::with_val(bits, &ratio / Complex::with_val(bits, 1 - &ratio));
        let mut partial = Complex::new(bits);
        let mut seq = Vec::with_capacity(self.shells);
        for (n, sh) in shell_sums.iter().enumerate() {
            partial += sh;
            if n >= 1 {
                seq.push(Complex::with_val(bits, &partial + Complex::with_val(bits, sh * &tail_factor)));
            }
        }
        let (value, err) = wynn(&seq);
        let scale = cabs(&value).to_f64().max(1e-300);
        Ok(SpectralValue {
            s: s.clone(),
            value,
            est_error: err.max(self.rounding * scale),
            method: Method::DirectSum,
        })
    }
}

/// Wynn ε acceleration; returns the even-column estimate with the smallest
/// successive difference and that difference as the error.
pub fn wynn(seq: &[Complex]) -> (Complex, f64) {
    let n = seq.len();
    assert!(n > 0, "empty sequence");
    let bits = seq[0].prec().0;
    let diff = |a: &Complex, b: &Complex| cabs(&Complex::with_val(bits, a - b)).to_f64();
    let mut best = seq[n - 1].clone();
    let mut best_err = if n >= 2 { diff(&seq[n - 1], &seq[n - 2]) } else { f64::INFINITY };
    if n < 3 {
        return (best, best_err);
    }
    let mut prev: Vec<Complex> = vec![Complex::new(bits); n + 1];
    let mut cur: Vec<Complex> = seq.to_vec();
    for k in 1..n {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for j in 0..cur.len() - 1 {
            let d = Complex::with_val(bits, &cur[j + 1] - &cur[j]);
            if d.real().is_zero() && d.imag().is_zero() {
                return (best, best_err);
            }
            next.push(Complex::with_val(bits, &prev[j + 1] + d.recip()));
        }
        if k % 2 == 0 && next.len() >= 2 {
            let e = diff(&next[next.len() - 1], &next[next.len() - 2]);
            if e < best_err {
                best_err = e;
                best = next[next.len() - 1].clone();
            }
        }
        prev = cur;
        cur = next;
        if cur.len() < 2 {
            break;
        }
    }
    (best, best_err)
}
