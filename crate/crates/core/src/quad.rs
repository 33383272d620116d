//! Tanh–sinh quadrature with nested node levels.

use rug::float::Constant;
use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::precision::Precision;

pub const MAX_LEVEL: u32 = 12;

/// Nodes of a tanh–sinh rule on [a, b] down to step 2^{−max_level}.
/// `weights` exclude the step factor h; `level[i]` is the coarsest level
/// containing node i.
#[derive(Clone, Debug)]
pub struct NodeSet {
    pub points: Vec<Float>,
    pub weights: Vec<Float>,
    pub level: Vec<u32>,
    pub max_level: u32,
}

/// Half-width of the t-range: endpoint distance e^{−π sinh t} below 10^{−2D}
/// so integrable endpoint singularities are resolved.
fn t_max(prec: Precision) -> f64 {
    ((2.0 * prec.digits() as f64 * std::f64::consts::LN_10 + 20.0) / std::f64::consts::PI).asinh()
}

fn level_of(j: i64, max_level: u32) -> u32 {
    if j == 0 {
        return 0;
    }
    let tz = j.unsigned_abs().trailing_zeros().min(max_level);
    max_level - tz
}

impl NodeSet {
    pub fn new(a: &Float, b: &Float, max_level: u32, prec: Precision) -> Self {
        let bits = prec.bits();
        let half_pi = Float::with_val(bits, Constant::Pi) / 2u32;
        let mid = Float::with_val(bits, a + b) / 2u32;
        let half = Float::with_val(bits, b - a) / 2u32;
        let h = Float::with_val(bits, Float::i_exp(1, -(max_level as i32)));
        let jmax = (t_max(prec) * f64::from(1u32 << max_level)).ceil() as i64;
        let mut points = Vec::with_capacity(2 * jmax as usize + 1);
        let mut weights = Vec::with_capacity(points.capacity());
        let mut level = Vec::with_capacity(points.capacity());
        for j in -jmax..=jmax {
            let t = Float::with_val(bits, &h * j);
            let u = Float::with_val(bits, t.sinh_ref()) * &half_pi;
            let au = Float::with_val(bits, u.abs_ref());
            // 1 − |tanh u| = 2/(1 + e^{2|u|})
            let comp = Float::with_val(bits, 2u32) / (Float::with_val(bits, &au * 2u32).exp() + 1u32);
            let x = if u.is_sign_negative() {
                Float::with_val(bits, a + Float::with_val(bits, &half * &comp))
            } else if u.is_zero() {
                mid.clone()
            } else {
                Float::with_val(bits, b - Float::with_val(bits, &half * &comp))
            };
            let ch = Float::with_val(bits, au.cosh_ref());
            let w = Float::with_val(bits, t.cosh_ref()) * &half_pi * &half / ch.square();
            if x <= *a || x >= *b {
                continue;
            }
            points.push(x);
            weights.push(w);
            level.push(level_of(j, max_level));
        }
        NodeSet { points, weights, level, max_level }
    }

    /// Rule estimate at `level` from values at every node.
    pub fn estimate(&self, level: u32, values: &[Complex]) -> Complex {
        let bits = values.first().map_or(64, |v| v.prec().0);
        let mut acc = Complex::new(bits);
        for i in 0..self.points.len() {
            if self.level[i] <= level {
                acc += Complex::with_val(bits, &values[i] * &self.weights[i]);
            }
        }
        acc * Float::with_val(bits, Float::i_exp(1, -(level as i32)))
    }

    pub fn estimate_real(&self, level: u32, values: &[Float]) -> Float {
        let bits = values.first().map_or(64, |v| v.prec());
        let mut acc = Float::new(bits);
        for i in 0..self.points.len() {
            if self.level[i] <= level {
                acc += Float::with_val(bits, &values[i] * &self.weights[i]);
            }
        }
        acc * Float::with_val(bits, Float::i_exp(1, -(level as i32)))
    }
}

/// ∫_a^b f by tanh–sinh with level doubling until two levels agree to `tol`
/// (absolute, plus relative to the value). Returns (value, error estimate).
pub fn integrate<F>(f: F, a: &Float, b: &Float, prec: Precision, tol: f64) -> Result<(Float, f64)>
where
    F: Fn(&Float) -> Result<Float>,
{
    let mut level = 4;
    loop {
        let nodes = NodeSet::new(a, b, level, prec);
        let values = nodes.points.iter().map(&f).collect::<Result<Vec<_>>>()?;
        let fine = nodes.estimate_real(level, &values);
        let coarse = nodes.estimate_real(level - 1, &values);
        let err = Float::with_val(53, &fine - &coarse).to_f64().abs();
        let scale = fine.to_f64().abs().max(1.0);
        if err <= tol * scale {
            return Ok((fine, err));
        }
        if level >= MAX_LEVEL {
            return Err(Error::Quadrature(format!("tanh-sinh level cap reached, difference {err:e}")));
        }
        level += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_endpoint_singularity() {
        let prec = Precision::new(40);
        let a = prec.real(0);
        let b = prec.real(1);
        let (v, _) = integrate(|x| Ok(Float::with_val(prec.bits(), x.square_ref())), &a, &b, prec, 1e-35).unwrap();
        assert!((v.to_f64() - 1.0 / 3.0).abs() < 1e-16);
        // ∫_0^1 x^{-1/2} = 2
        let (v, _) = integrate(|x| Ok(Float::with_val(prec.bits(), x.sqrt_ref()).recip()), &a, &b, prec, 1e-30).unwrap();
        let err = Float::with_val(prec.bits(), &v - 2u32).abs();
        assert!(err < 1e-30);
    }

    #[test]
    fn exponential_high_precision() {
        let prec = Precision::new(60);
        let a = prec.real(-1);
        let b = prec.real(2);
        let (v, _) = integrate(|x| Ok(Float::with_val(prec.bits(), x.exp_ref())), &a, &b, prec, 1e-55).unwrap();
        let exact = Float::with_val(prec.bits(), prec.real(2).exp() - prec.real(-1).exp());
        assert!(Float::with_val(prec.bits(), &v - &exact).abs() < 1e-55);
    }
}
