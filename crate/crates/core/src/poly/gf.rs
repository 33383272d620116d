//! Rational generating functions B(x) = P(x)/Q(x) with integer coefficients.

use rug::{Complex, Float, Rational};
use serde::{Deserialize, Serialize};

use super::roots::durand_kerner;
use crate::error::{Error, Result};

type RPoly = Vec<Rational>;

/// B(x) = Σ β_m x^m = P(x)/Q(x), coefficients in ascending powers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalGF {
    p: Vec<i64>,
    q: Vec<i64>,
}

/// A pole of B at x with its order and leading Laurent coefficient
/// c = lim (1 − x/r)^order B(x).
#[derive(Clone, Debug)]
pub struct GfPole {
    pub x: Complex,
    pub order: u32,
    pub leading: Complex,
}

fn trim_i64(mut v: Vec<i64>) -> Vec<i64> {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
    v
}

fn trim(mut v: RPoly) -> RPoly {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
    v
}

fn is_zero(v: &RPoly) -> bool {
    v.iter().all(|c| *c == 0)
}

fn divrem(a: &RPoly, b: &RPoly) -> (RPoly, RPoly) {
    let b = trim(b.clone());
    let mut r = trim(a.clone());
    let db = b.len() - 1;
    if r.len() < b.len() {
        return (vec![Rational::new()], r);
    }
    let mut q = vec![Rational::new(); r.len() - db];
    let lead = b[db].clone();
    while r.len() >= b.len() && !is_zero(&r) {
        let shift = r.len() - b.len();
        let t = Rational::from(r.last().unwrap() / &lead);
        for (j, bj) in b.iter().enumerate() {
            r[shift + j] -= Rational::from(&t * bj);
        }
        q[shift] = t;
        r.pop();
        r = trim(r);
        if r.len() < b.len() {
            break;
        }
    }
    (trim(q), r)
}

fn monic(v: RPoly) -> RPoly {
    let lead = v.last().unwrap().clone();
    v.into_iter().map(|c| c / &lead).collect()
}

fn gcd(a: &RPoly, b: &RPoly) -> RPoly {
    let mut x = trim(a.clone());
    let mut y = trim(b.clone());
    while !is_zero(&y) {
        let (_, r) = divrem(&x, &y);
        x = y;
        y = r;
    }
    monic(x)
}

fn derivative(a: &RPoly) -> RPoly {
    if a.len() <= 1 {
        return vec![Rational::new()];
    }
    trim(a.iter().enumerate().skip(1).map(|(j, c)| Rational::from(c * j as u32)).collect())
}

fn sub(a: &RPoly, b: &RPoly) -> RPoly {
    let n = a.len().max(b.len());
    let mut out = vec![Rational::new(); n];
    for (j, c) in a.iter().enumerate() {
        out[j] += c;
    }
    for (j, c) in b.iter().enumerate() {
        out[j] -= c;
    }
    trim(out)
}

/// Square-free factors f = Π a_i^i (Yun); returns (a_i, i) for nonconstant a_i.
fn squarefree(f: &RPoly) -> Vec<(RPoly, u32)> {
    let f = monic(trim(f.clone()));
    if f.len() <= 1 {
        return Vec::new();
    }
    let fp = derivative(&f);
    let a0 = gcd(&f, &fp);
    let mut b = divrem(&f, &a0).0;
    let c = divrem(&fp, &a0).0;
    let mut d = sub(&c, &derivative(&b));
    let mut out = Vec::new();
    let mut i = 1;
    while b.len() > 1 {
        let a = gcd(&b, &d);
        let nb = divrem(&b, &a).0;
        let nc = divrem(&d, &a).0;
        if a.len() > 1 {
            out.push((a, i));
        }
        d = sub(&nc, &derivative(&nb));
        b = nb;
        i += 1;
    }
    out
}

fn eval_rpoly(a: &RPoly, x: &Complex) -> Complex {
    let bits = x.prec().0;
    let mut acc = Complex::new(bits);
    for c in a.iter().rev() {
        acc *= x;
        acc += Float::with_val(bits, c);
    }
    acc
}

fn to_rpoly(v: &[i64]) -> RPoly {
    v.iter().map(|&c| Rational::from(c)).collect()
}

impl RationalGF {
    pub fn new(p: Vec<i64>, q: Vec<i64>) -> Result<Self> {
        let p = trim_i64(if p.is_empty() { vec![0] } else { p });
        let q = trim_i64(q);
        if q.is_empty() || q[0] == 0 {
            return Err(Error::InvalidModel("generating function needs Q(0) != 0".into()));
        }
        Ok(RationalGF { p, q })
    }

    pub fn p(&self) -> &[i64] {
        &self.p
    }

    pub fn q(&self) -> &[i64] {
        &self.q
    }

    /// β_0..β_{n-1} from the recurrence q_0 β_m = p_m − Σ_{j≥1} q_j β_{m−j}.
    pub fn coefficients(&self, n: usize) -> Result<Vec<i128>> {
        let mut beta: Vec<i128> = Vec::with_capacity(n);
        let q0 = self.q[0] as i128;
        for m in 0..n {
            let mut acc: i128 = self.p.get(m).copied().unwrap_or(0) as i128;
            for (j, &qj) in self.q.iter().enumerate().skip(1) {
                if j > m {
                    break;
                }
                let t = (qj as i128)
                    .checked_mul(beta[m - j])
                    .ok_or_else(|| Error::Numerical(format!("multiplicity overflow at m = {m}")))?;
                acc = acc
                    .checked_sub(t)
                    .ok_or_else(|| Error::Numerical(format!("multiplicity overflow at m = {m}")))?;
            }
            if acc % q0 != 0 {
                return Err(Error::InvalidModel(format!(
                    "P/Q has a non-integer coefficient at m = {m}"
                )));
            }
            beta.push(acc / q0);
        }
        Ok(beta)
    }

    pub fn coefficient(&self, m: usize) -> Result<i128> {
        Ok(*self.coefficients(m + 1)?.last().unwrap())
    }

    /// First n series coefficients of P/Q by exact polynomial long division.
    pub fn long_division(&self, n: usize) -> Vec<Rational> {
        let q = to_rpoly(&self.q);
        let mut rem = to_rpoly(&self.p);
        rem.resize(rem.len().max(n + q.len()), Rational::new());
        let mut out = Vec::with_capacity(n);
        for m in 0..n {
            let t = Rational::from(&rem[m] / &q[0]);
            for (j, qj) in q.iter().enumerate() {
                rem[m + j] -= Rational::from(&t * qj);
            }
            out.push(t);
        }
        out
    }

    /// P/Q with common factors removed.
    fn reduced(&self) -> (RPoly, RPoly) {
        let p = to_rpoly(&self.p);
        let q = to_rpoly(&self.q);
        if is_zero(&p) {
            return (vec![Rational::new()], vec![Rational::from(1)]);
        }
        let g = gcd(&p, &q);
        (divrem(&p, &g).0, divrem(&q, &g).0)
    }

    /// True when B is a polynomial (no poles after cancellation).
    pub fn is_polynomial(&self) -> bool {
        self.reduced().1.len() <= 1
    }

    pub fn eval(&self, x: &Complex) -> Complex {
        let (p, q) = self.reduced();
        eval_rpoly(&p, x) / eval_rpoly(&q, x)
    }

    /// Numerator, denominator and denominator derivative of the reduced form at x.
    pub fn eval_parts(&self, x: &Complex) -> (Complex, Complex, Complex) {
        let (p, q) = self.reduced();
        (eval_rpoly(&p, x), eval_rpoly(&q, x), eval_rpoly(&derivative(&q), x))
    }

    /// Poles of the reduced B with their orders.
    pub fn poles(&self, bits: u32) -> Result<Vec<GfPole>> {
        let (p, q) = self.reduced();
        let mut out = Vec::new();
        for (factor, order) in squarefree(&q) {
            let coeffs: Vec<Complex> =
                factor.iter().map(|c| Complex::with_val(bits, Float::with_val(bits, c))).collect();
            for x in durand_kerner(&coeffs, bits)? {
                // h(r) = Q^{(k)}(r)/k!
                let mut dq = q.clone();
                let mut fact = Float::with_val(bits, 1);
                for i in 1..=order {
                    dq = derivative(&dq);
                    fact *= i;
                }
                let h = eval_rpoly(&dq, &x) / &fact;
                let mut scale = Complex::with_val(bits, (1, 0));
                let minv = Complex::with_val(bits, -Complex::with_val(bits, (1, 0)) / &x);
                for _ in 0..order {
                    scale *= &minv;
                }
                let leading = scale * eval_rpoly(&p, &x) / h;
                out.push(GfPole { x, order, leading });
            }
        }
        Ok(out)
    }
}
