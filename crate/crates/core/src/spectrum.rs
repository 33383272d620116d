//! Eigenvalue enumeration through inverse-branch words, counting functions,
//! heat trace and log-periodic oscillation diagnostics.

use rug::{Complex, Float};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poincare::PoincareSeries;
use crate::poly::{DecimationModel, DecimationPolynomial};
use crate::precision::{cabs, Precision};

/// Safety factor applied to the pruning bound.
const PRUNE_MARGIN: f64 = 0.9;
/// Merge tolerance as a multiple of the verification tolerance.
const MERGE_FACTOR: f64 = 1e3;

/// A solution μ > 0 of Φ(−μ) = w with its minimal branch word.
#[derive(Clone, Debug)]
pub struct MuSolution {
    pub mu: Float,
    /// Branch letters 1..d; implicit all-1 tail.
    pub word: Vec<u8>,
    /// Number of coinciding words (root multiplicity of Φ + w at −μ).
    pub multiplicity: u32,
    pub residual: f64,
    pub verified: bool,
}

/// Lower bound τ on t(y) over nonprincipal branch images of [x_−, 0]:
/// every root reached through a word of length n ≥ 1 exceeds λ^n τ.
pub fn pruning_scale(s: &PoincareSeries) -> Result<Float> {
    let p = s.poly();
    let x_minus = p.leftmost_real_root()?;
    let mut y_star: Option<Float> = None;
    for end in [s.precision().zero(), x_minus] {
        for y in p.real_preimages(&end)?.into_iter().skip(1) {
            if y_star.as_ref().is_none_or(|b| y > *b) {
                y_star = Some(y);
            }
        }
    }
    let y = y_star.ok_or_else(|| Error::Numerical("no nonprincipal real branch".into()))?;
    s.principal_limit(&y)
}

/// All μ ≤ X with Φ(−μ) = w, via the word tree with pruning; duplicates merged.
pub fn mu_solutions(s: &PoincareSeries, w: &Float, x_bound: &Float, tol: f64) -> Result<Vec<MuSolution>> {
    let tau = pruning_scale(s)?;
    mu_solutions_with_scale(s, w, x_bound, tol, &tau)
}

pub fn mu_solutions_with_scale(
    s: &PoincareSeries,
    w: &Float,
    x_bound: &Float,
    tol: f64,
    tau: &Float,
) -> Result<Vec<MuSolution>> {
    let p = s.poly();
    let bits = p.bits();
    let mut raw: Vec<(Float, Vec<u8>)> = Vec::new();
    if *x_bound <= 0 {
        return Ok(Vec::new());
    }
    // (y, λ^n, word)
    let mut stack = vec![(w.clone(), Float::with_val(bits, 1), Vec::<u8>::new())];
    while let Some((y, scale, word)) = stack.pop() {
        let emits = match word.last() {
            None => !w.is_zero(),
            Some(&l) => l != 1,
        };
        if emits {
            let mu = Float::with_val(bits, s.principal_limit(&y)? * &scale);
            if mu <= *x_bound {
                raw.push((mu, word.clone()));
            }
        }
        let child_scale = Float::with_val(bits, &scale * p.lambda());
        let lower = Float::with_val(bits, &child_scale * tau) * PRUNE_MARGIN;
        if lower > *x_bound {
            continue;
        }
        for (i, c) in p.real_preimages(&y)?.into_iter().enumerate() {
            let mut wd = word.clone();
            wd.push(i as u8 + 1);
            stack.push((c, child_scale.clone(), wd));
        }
    }
    raw.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.len().cmp(&b.1.len())));
    let merge = tol * MERGE_FACTOR;
    let mut out: Vec<MuSolution> = Vec::new();
    for (mu, word) in raw {
        if let Some(last) = out.last_mut() {
            let gap = Float::with_val(bits, &mu - &last.mu).to_f64().abs();
            if gap <= merge * (1.0 + mu.to_f64()) {
                last.multiplicity += 1;
                continue;
            }
        }
        out.push(MuSolution { mu, word, multiplicity: 1, residual: 0.0, verified: false });
    }
    let wf = w.to_f64();
    for sol in out.iter_mut() {
        let v = s.eval_phi_real(&Float::with_val(bits, -&sol.mu))?;
        sol.residual = Float::with_val(bits, &v - w).to_f64().abs();
        sol.verified = sol.residual <= tol * (1.0 + wf.abs());
    }
    Ok(out)
}

/// lim λ^n q_1^{(n)}(y) by Richardson extrapolation with ratio 1/λ.
pub fn richardson_principal_limit(p: &DecimationPolynomial, y: &Float, tol: f64) -> Result<Float> {
    let bits = p.bits();
    let lambda = p.lambda();
    let mut v = y.clone();
    let mut scale = Float::with_val(bits, 1);
    let mut rows: Vec<Vec<Float>> = Vec::new();
    let mut prev_best: Option<Float> = None;
    for n in 0..400 {
        let a = Float::with_val(bits, &v * &scale);
        let mut row = vec![a];
        if let Some(last) = rows.last() {
            let mut factor = Float::with_val(bits, lambda);
            for k in 0..last.len().min(12) {
                // R_{n,k+1} = (λ^{k+1} R_{n,k} − R_{n−1,k})/(λ^{k+1} − 1)
                let num = Float::with_val(bits, &factor * &row[k]) - &last[k];
                let den = Float::with_val(bits, &factor - 1u32);
                row.push(num / den);
                factor *= lambda;
            }
        }
        let best = row.last().unwrap().clone();
        if let Some(pb) = &prev_best {
            let diff = Float::with_val(bits, &best - pb).to_f64().abs();
            if n > 4 && diff <= tol * (1.0 + best.to_f64().abs()) {
                return Ok(best);
            }
        }
        prev_best = Some(best);
        rows.push(row);
        v = p.q1_real(&v);
        scale *= lambda;
    }
    Err(Error::Numerical("Richardson extrapolation did not settle".into()))
}

/// β_m(w) for offset index `w_index`.
pub fn beta(model: &DecimationModel, w_index: usize, m: usize) -> Result<i128> {
    model.offsets[w_index].beta(m)
}

/// One eigenvalue λ^m μ of −Δ.
#[derive(Clone, Debug)]
pub struct EigenvalueRecord {
    pub offset_index: usize,
    pub w: f64,
    pub m: u32,
    pub word: Vec<u8>,
    pub mu: Float,
    pub eigenvalue: Float,
    /// β_m(w).
    pub multiplicity: u64,
    /// Multiplicity of −μ as a root of Φ + w (2 at critical collisions).
    pub root_multiplicity: u32,
}

impl EigenvalueRecord {
    pub fn total_multiplicity(&self) -> u64 {
        self.multiplicity * self.root_multiplicity as u64
    }

    pub fn word_string(&self) -> String {
        self.word.iter().map(|l| l.to_string()).collect::<Vec<_>>().join("")
    }
}

/// Enumerated eigenvalues below `bound`, sorted.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub records: Vec<EigenvalueRecord>,
    pub bound: f64,
    pub ds_half: f64,
}

pub fn eigenvalues(model: &DecimationModel, s: &PoincareSeries, x_bound: f64) -> Result<Spectrum> {
    let prec = model.precision();
    let bits = prec.bits();
    let lambda = model.poly.lambda().to_f64();
    let tau = pruning_scale(s)?;
    let tol = prec.tol(10);
    let ds_half = spectral_dimension(model)?.ds_half;
    let mut records = Vec::new();
    if x_bound > 0.0 {
        for (idx, off) in model.offsets.iter().enumerate() {
            let top = x_bound / lambda.powi(off.m_min as i32);
            let roots = mu_solutions_with_scale(s, &off.w, &prec.real(top), tol, &tau)?;
            let Some(first) = roots.first() else { continue };
            let mu_min = first.mu.to_f64();
            let mut m = off.m_min;
            let mut lam_m = lambda.powi(m as i32);
            while lam_m * mu_min <= x_bound {
                let b = off.beta(m as usize)?;
                if b > 0 {
                    let scale = prec.real(lam_m);
                    for r in roots.iter() {
                        let ev = Float::with_val(bits, &r.mu * &scale);
                        if ev.to_f64() > x_bound {
                            break;
                        }
                        records.push(EigenvalueRecord {
                            offset_index: idx,
                            w: off.w_f64(),
                            m,
                            word: r.word.clone(),
                            mu: r.mu.clone(),
                            eigenvalue: ev,
                            multiplicity: b as u64,
                            root_multiplicity: r.multiplicity,
                        });
                    }
                }
                m += 1;
                lam_m *= lambda;
            }
        }
    }
    records.sort_by(|a, b| {
        a.eigenvalue
            .partial_cmp(&b.eigenvalue)
            .unwrap()
            .then(a.offset_index.cmp(&b.offset_index))
            .then(a.m.cmp(&b.m))
    });
    Ok(Spectrum { records, bound: x_bound, ds_half })
}

#[derive(Clone, Debug, Serialize)]
pub struct CountingSample {
    pub x: f64,
    /// L(x): eigenvalues < x with multiplicity.
    pub count: u64,
    /// L(x)·x^{−dS/2}.
    pub ratio: f64,
    /// Σ_{μ<x}(1 − μ/x)^k for k = 1, 2, 3.
    pub smoothed: [f64; 3],
}

pub fn counting(spectrum: &Spectrum, x_grid: &[f64]) -> Result<Vec<CountingSample>> {
    let evs: Vec<(f64, f64)> = spectrum
        .records
        .iter()
        .map(|r| (r.eigenvalue.to_f64(), r.total_multiplicity() as f64))
        .collect();
    let mut out = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        if x > spectrum.bound {
            return Err(Error::BeyondEnumeration { x, bound: spectrum.bound });
        }
        let mut count = 0u64;
        let mut sm = [0.0f64; 3];
        for &(mu, mult) in &evs {
            if mu >= x {
                break;
            }
            count += mult as u64;
            let f = 1.0 - mu / x;
            sm[0] += mult * f;
            sm[1] += mult * f * f;
            sm[2] += mult * f * f * f;
        }
        out.push(CountingSample { x, count, ratio: count as f64 * x.powf(-spectrum.ds_half), smoothed: sm });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct HeatTraceSample {
    pub t: f64,
    pub value: f64,
    pub truncation_error: f64,
    /// Set when truncation_error/value exceeds 1e−6.
    pub warning: bool,
}

/// sup L(x)/x^{dS/2} over the enumerated range, doubled.
pub fn band_constant(spectrum: &Spectrum) -> f64 {
    let mut count = 0u64;
    let mut best: f64 = 0.0;
    for r in &spectrum.records {
        count += r.total_multiplicity();
        best = best.max(count as f64 / r.eigenvalue.to_f64().powf(spectrum.ds_half));
    }
    2.0 * best
}

/// P(t) = Σ e^{−μt} over the enumerated spectrum with a tail bound
/// C X^α e^{−Xt}·Xt/(Xt − α) from the counting band L(x) ≤ C x^α.
pub fn heat_trace(spectrum: &Spectrum, t_grid: &[f64]) -> Result<Vec<HeatTraceSample>> {
    let c = band_constant(spectrum);
    let alpha = spectrum.ds_half;
    let x = spectrum.bound;
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if !(t > 0.0) {
            return Err(Error::InvalidArgument("heat trace needs t > 0".into()));
        }
        let value: f64 =
            spectrum.records.iter().map(|r| r.total_multiplicity() as f64 * (-r.eigenvalue.to_f64() * t).exp()).sum();
        let xt = x * t;
        let truncation_error =
            if xt > alpha { c * x.powf(alpha) * (-xt).exp() * xt / (xt - alpha) } else { f64::INFINITY };
        let warning = !(truncation_error <= 1e-6 * value);
        out.push(HeatTraceSample { t, value, truncation_error, warning });
    }
    Ok(out)
}

/// Fourier analysis of samples uniform in u over whole periods.
#[derive(Clone, Debug, Serialize)]
pub struct OscillationSpectrum {
    pub periods: usize,
    /// Complex coefficients c_j, j = 0..J, of e^{2πiju}.
    pub coefficients: Vec<(f64, f64)>,
    /// Real amplitudes: |c_0| and 2|c_j| for j ≥ 1.
    pub amplitudes: Vec<f64>,
    /// On the amplitude scale.
    pub noise_floor: f64,
}

pub fn oscillation_spectrum(values: &[f64], samples_per_period: usize) -> Result<OscillationSpectrum> {
    let n = values.len();
    if samples_per_period == 0 || !n.is_multiple_of(samples_per_period) {
        return Err(Error::InvalidArgument("samples must cover whole periods".into()));
    }
    let periods = n / samples_per_period;
    if periods < 4 {
        return Err(Error::TooFewPeriods(n as f64 / samples_per_period as f64));
    }
    let dft = |k: usize| -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for (i, &v) in values.iter().enumerate() {
            let ang = -2.0 * std::f64::consts::PI * ((k * i) % n) as f64 / n as f64;
            re += v * ang.cos();
            im += v * ang.sin();
        }
        (re / n as f64, im / n as f64)
    };
    let j_max = samples_per_period / 4;
    let coefficients: Vec<(f64, f64)> = (0..=j_max).map(|j| dft(j * periods)).collect();
    let amplitudes: Vec<f64> = coefficients
        .iter()
        .enumerate()
        .map(|(j, c)| if j == 0 { c.0.hypot(c.1) } else { 2.0 * c.0.hypot(c.1) })
        .collect();
    let mut high: f64 = 0.0;
    for k in n / 4..n / 2 {
        if k % periods != 0 {
            let c = dft(k);
            high = high.max(c.0.hypot(c.1));
        }
    }
    let vmax = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let rounding = 8.0 * (n as f64).sqrt() * f64::EPSILON * vmax;
    Ok(OscillationSpectrum { periods, coefficients, amplitudes, noise_floor: (2.0 * high).max(rounding) })
}

/// Samples of x^{−dS/2}·Σ(1 − μ/x)^k at x = λ^u, u = u0 + i/spp.
pub fn smoothed_weyl_samples(
    spectrum: &Spectrum,
    lambda: f64,
    u0: f64,
    periods: usize,
    samples_per_period: usize,
    k: usize,
) -> Result<Vec<f64>> {
    if !(1..=3).contains(&k) {
        return Err(Error::InvalidArgument("smoothing order must be 1, 2 or 3".into()));
    }
    let xs: Vec<f64> = (0..periods * samples_per_period)
        .map(|i| lambda.powf(u0 + i as f64 / samples_per_period as f64))
        .collect();
    let samples = counting(spectrum, &xs)?;
    Ok(samples.iter().map(|c| c.smoothed[k - 1] * c.x.powf(-spectrum.ds_half)).collect())
}

/// Samples of t^{dS/2} P(t) at t = λ^{−u}.
pub fn heat_weyl_samples(
    spectrum: &Spectrum,
    lambda: f64,
    u0: f64,
    periods: usize,
    samples_per_period: usize,
) -> Result<Vec<f64>> {
    let ts: Vec<f64> = (0..periods * samples_per_period)
        .map(|i| lambda.powf(-(u0 + i as f64 / samples_per_period as f64)))
        .collect();
    let heat = heat_trace(spectrum, &ts)?;
    Ok(heat.iter().map(|h| h.value * h.t.powf(spectrum.ds_half)).collect())
}

/// Pole data of one multiplicity generating function.
#[derive(Clone, Debug, Serialize)]
pub struct OffsetPoleInfo {
    pub w: f64,
    /// Smallest pole modulus r_w (None for polynomial B_w).
    pub r_w: Option<f64>,
    pub order: Option<u32>,
    pub leading: Option<(f64, f64)>,
    /// −log r_w / log λ.
    pub exponent: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralDimension {
    pub ds_half: f64,
    pub offsets: Vec<OffsetPoleInfo>,
    /// Offsets whose pole attains dS/2.
    pub dominant: Vec<usize>,
    pub rho: f64,
}

/// dS/2 = max(ρ, max_w −log r_w/log λ); dominant poles must be simple.
pub fn spectral_dimension(model: &DecimationModel) -> Result<SpectralDimension> {
    let bits = model.precision().bits();
    let ln_lambda = model.poly.ln_lambda().to_f64();
    let rho = model.poly.rho().to_f64();
    let mut offsets = Vec::new();
    for off in &model.offsets {
        let poles = off.mult_gf.poles(bits)?;
        let smallest = poles.iter().min_by(|a, b| cabs(&a.x).partial_cmp(&cabs(&b.x)).unwrap());
        offsets.push(match smallest {
            None => OffsetPoleInfo { w: off.w_f64(), r_w: None, order: None, leading: None, exponent: None },
            Some(pole) => {
                let r = cabs(&pole.x).to_f64();
                OffsetPoleInfo {
                    w: off.w_f64(),
                    r_w: Some(r),
                    order: Some(pole.order),
                    leading: Some((pole.leading.real().to_f64(), pole.leading.imag().to_f64())),
                    exponent: Some(-r.ln() / ln_lambda),
                }
            }
        });
    }
    let pole_max = offsets.iter().filter_map(|o| o.exponent).fold(f64::NEG_INFINITY, f64::max);
    let ds_half = pole_max.max(rho);
    let mut dominant = Vec::new();
    if pole_max >= rho {
        for (i, o) in offsets.iter().enumerate() {
            if let Some(e) = o.exponent {
                if (e - ds_half).abs() < 1e-12 {
                    if o.order != Some(1) {
                        return Err(Error::InvalidModel(format!(
                            "dominant pole of B_w for w = {} is not simple",
                            o.w
                        )));
                    }
                    dominant.push(i);
                }
            }
        }
    }
    Ok(SpectralDimension { ds_half, offsets, dominant, rho })
}

/// Complex helper for callers that need f64 pairs.
pub fn c64(z: &Complex) -> (f64, f64) {
    (z.real().to_f64(), z.imag().to_f64())
}

/// Default verification tolerance for root checks.
pub fn default_tol(prec: Precision) -> f64 {
    prec.tol(10)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poincare::build_series;
    use crate::poly::builtin_model;

    fn setup(name: &str, digits: u32) -> (DecimationModel, PoincareSeries) {
        let m = builtin_model(name).unwrap().build(Precision::new(digits)).unwrap();
        let s = build_series(&m.poly, 80).unwrap();
        (m, s)
    }

    #[test]
    fn sinh_zero_set_complete() {
        let (_, s) = setup("sinh", 30);
        let prec = s.precision();
        let roots = mu_solutions(&s, &prec.zero(), &prec.real(1000), prec.tol(10)).unwrap();
        let expected = (1000f64.sqrt() / (2.0 * std::f64::consts::PI)).floor() as usize;
        assert_eq!(roots.len(), expected);
        for (k, r) in roots.iter().enumerate() {
            let exact = 4.0 * std::f64::consts::PI.powi(2) * ((k + 1) as f64).powi(2);
            assert!((r.mu.to_f64() - exact).abs() < 1e-9 * exact);
            assert_eq!(r.multiplicity, 2);
            assert!(r.verified);
        }
    }

    #[test]
    fn gasket_smallest_root_and_richardson() {
        let (m, s) = setup("sg2-dirichlet", 40);
        let prec = s.precision();
        let roots = mu_solutions(&s, &prec.real(-2), &prec.real(100), prec.tol(10)).unwrap();
        assert!((roots[0].mu.to_f64() - 2.2421331852).abs() < 1e-9);
        assert!(roots[0].word.is_empty());
        let r = richardson_principal_limit(&m.poly, &prec.real(-2), prec.tol(12)).unwrap();
        let diff = Float::with_val(prec.bits(), &r + &roots[0].mu).to_f64().abs();
        assert!(diff < 1e-25, "{diff}");
        assert!(roots.iter().all(|r| r.verified && r.multiplicity == 1));
    }

    #[test]
    fn neumann_lowest_eigenvalues() {
        let (m, s) = setup("sg2-neumann", 30);
        let prec = s.precision();
        let mu0 = mu_solutions(&s, &prec.real(-3), &prec.real(10), prec.tol(10)).unwrap()[0].mu.to_f64();
        let spec = eigenvalues(&m, &s, 5.0 * mu0 * 1.001).unwrap();
        assert_eq!(spec.records.len(), 1);
        assert_eq!(spec.records[0].multiplicity, 2);
        assert!(eigenvalues(&m, &s, 5.0 * mu0 * 0.999).unwrap().records.is_empty());
    }

    #[test]
    fn dirichlet_m1_family_multiplicity() {
        let (m, s) = setup("sg2-dirichlet", 30);
        let spec = eigenvalues(&m, &s, 200.0).unwrap();
        let r = spec.records.iter().find(|r| r.w == -5.0 && r.m == 1).unwrap();
        assert_eq!(r.multiplicity, 2);
    }

    #[test]
    fn counting_steps() {
        let (m, s) = setup("sg2-neumann", 30);
        let spec = eigenvalues(&m, &s, 1000.0).unwrap();
        let first = spec.records[0].eigenvalue.to_f64();
        let c = counting(&spec, &[first * 0.99, first * 1.0001]).unwrap();
        assert_eq!(c[0].count, 0);
        assert_eq!(c[1].count, 2);
        assert!(counting(&spec, &[2000.0]).is_err());
    }

    #[test]
    fn sinh_heat_trace() {
        let (m, s) = setup("sinh", 30);
        let spec = eigenvalues(&m, &s, 4000.0).unwrap();
        let t = 1.0 / (4.0 * std::f64::consts::PI);
        let h = heat_trace(&spec, &[t, 2.0 * t]).unwrap();
        let theta: f64 = (1..20).map(|k| (-std::f64::consts::PI * (k * k) as f64).exp()).sum();
        assert!((h[0].value - 2.0 * theta).abs() < 1e-14);
        assert!(h[0].value > h[1].value);
        assert!(!h[0].warning);
    }

    #[test]
    fn dft_sanity() {
        let spp = 32;
        let vals: Vec<f64> =
            (0..4 * spp).map(|i| (2.0 * std::f64::consts::PI * i as f64 / spp as f64).sin()).collect();
        let o = oscillation_spectrum(&vals, spp).unwrap();
        assert!((o.amplitudes[1] - 1.0).abs() < 1e-12);
        assert!(o.amplitudes.iter().enumerate().all(|(j, a)| j == 1 || *a < 1e-10));
        let flat = vec![0.7; 4 * spp];
        let o = oscillation_spectrum(&flat, spp).unwrap();
        assert!(o.amplitudes[1..].iter().all(|a| *a <= o.noise_floor));
        assert!(oscillation_spectrum(&vals[..3 * spp], spp).is_err());
    }

    #[test]
    fn dimensions() {
        let (m, _) = setup("sg2-neumann", 30);
        let d = spectral_dimension(&m).unwrap();
        assert!((d.ds_half - 3f64.ln() / 5f64.ln()).abs() < 1e-12);
        assert!((d.offsets[0].r_w.unwrap() - 1.0 / 3.0).abs() < 1e-12);
        let (m, _) = setup("sg3-dirichlet", 30);
        let d = spectral_dimension(&m).unwrap();
        assert!((d.ds_half - 4f64.ln() / 6f64.ln()).abs() < 1e-12);
        assert!(d.offsets[0].r_w.is_none());
        assert!(!d.dominant.contains(&0));
    }
}
