//! Durand–Kerner simultaneous root iteration at working precision.

use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::precision::cabs;

const MAX_ITER: usize = 2000;

/// Evaluates Σ c_j z^j (ascending coefficients) by Horner's rule.
pub fn horner(coeffs: &[Complex], z: &Complex) -> Complex {
    let prec = z.prec().0;
    let mut acc = Complex::new(prec);
    for c in coeffs.iter().rev() {
        acc *= z;
        acc += c;
    }
    acc
}

/// All roots of the polynomial with ascending coefficients `coeffs`
/// (leading coefficient nonzero). Multiple roots appear repeatedly.
pub fn durand_kerner(coeffs: &[Complex], bits: u32) -> Result<Vec<Complex>> {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[deg].clone();
    let monic: Vec<Complex> = coeffs.iter().map(|c| Complex::with_val(bits, c / &lead)).collect();
    if deg == 1 {
        return Ok(vec![Complex::with_val(bits, -&monic[0])]);
    }
    let mut radius = Float::with_val(bits, 1);
    for c in &monic[..deg] {
        let a = cabs(c);
        if a > radius {
            radius = a;
        }
    }
    radius += 1;
    let seed = Complex::with_val(bits, (0.4, 0.9));
    let mut z: Vec<Complex> = Vec::with_capacity(deg);
    let mut pw = Complex::with_val(bits, &seed * &radius);
    for _ in 0..deg {
        z.push(pw.clone());
        pw *= &seed;
    }
    let eps = Float::with_val(bits, Float::i_exp(1, -(bits as i32) + 12));
    let mut last_residual = f64::INFINITY;
    for iter in 0..MAX_ITER {
        let mut max_rel = Float::new(bits);
        for i in 0..deg {
            let num = horner(&monic, &z[i]);
            let mut den = Complex::with_val(bits, (1, 0));
            for j in 0..deg {
                if j != i {
                    den *= Complex::with_val(bits, &z[i] - &z[j]);
                }
            }
            if den.real().is_zero() && den.imag().is_zero() {
                den = Complex::with_val(bits, (Float::with_val(bits, &eps), 0));
            }
            let step = Complex::with_val(bits, &num / &den);
            let rel = cabs(&step) / (cabs(&z[i]) + 1u32);
            if rel > max_rel {
                max_rel = rel;
            }
            z[i] -= &step;
        }
        if max_rel < eps {
            return Ok(z);
        }
        if iter > 200 && iter % 50 == 0 {
            // Multiple roots converge linearly; accept once residuals are at rounding level.
            let res = max_residual(&monic, &z);
            last_residual = res.0;
            if res.0 <= res.1 {
                return Ok(z);
            }
        }
    }
    let res = max_residual(&monic, &z);
    if res.0 <= res.1 {
        return Ok(z);
    }
    Err(Error::RootSolver {
        iterations: MAX_ITER,
        residual: last_residual.min(res.0),
    })
}

/// (max |f(z)|, tolerance) for the root set, with tolerance scaled by the
/// magnitude of the evaluated terms.
fn max_residual(monic: &[Complex], z: &[Complex]) -> (f64, f64) {
    let bits = z[0].prec().0;
    let mut worst: f64 = 0.0;
    let mut worst_tol: f64 = 0.0;
    for zi in z {
        let r = cabs(&horner(monic, zi)).to_f64();
        let az = cabs(zi);
        let mut scale = Float::with_val(bits, 0);
        let mut p = Float::with_val(bits, 1);
        for c in monic {
            scale += Float::with_val(bits, &p * &cabs(c));
            p *= &az;
        }
        let tol = scale.to_f64() * 2f64.powi(-(bits as i32) / 2 + 8);
        if r > worst {
            worst = r;
            worst_tol = tol;
        } else if worst == 0.0 {
            worst_tol = tol;
        }
    }
    (worst, worst_tol.max(f64::MIN_POSITIVE))
}
