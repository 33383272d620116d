use anyhow::Result;
use fractal_zeta::oracle::{sinh_phi, sinh_zeta, verify_decimation};
use fractal_zeta::poincare::{build_periodic_f, build_series};
use fractal_zeta::poly::{builtin_model, validate_model, DecimationModel, ModelFile};
use fractal_zeta::precision::{cabs_f64, fmt_float, to_c64};
use fractal_zeta::spectrum::{
    counting, eigenvalues, heat_trace, oscillation_spectrum, smoothed_weyl_samples, spectral_dimension,
};
use fractal_zeta::zeta::{json_complex, json_number, Route, ZetaEngine, ZetaOptions};
use fractal_zeta::{Error, Precision};
use rug::{Complex, Float};
use serde_json::{json, Value};

use crate::args::{Cli, PhiArgs, SpectrumArgs, VerifyArgs, ZetaArgs};
use crate::io::{emit, fmt_f64, load_model, model_file, parse_complex, parse_grid, parse_list, Csv};
use crate::VerificationFailed;

const DEFAULT_ORDER: usize = 80;

fn precision(cli: &Cli) -> Result<Precision> {
    if !(10..=2000).contains(&cli.precision) {
        return Err(Error::InvalidArgument(format!("precision {} outside 10..=2000", cli.precision)).into());
    }
    Ok(Precision::new(cli.precision))
}

fn model(cli: &Cli) -> Result<(Precision, DecimationModel)> {
    let prec = precision(cli)?;
    let m = load_model(&cli.model, prec)?;
    Ok((prec, m))
}

fn write(cli: &Cli, text: &str) -> Result<()> {
    emit(cli.output.as_deref(), text)
}

fn write_json(cli: &Cli, v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    write(cli, &text)
}

fn digits(prec: Precision) -> usize {
    prec.digits() as usize
}

fn ffmt(x: &Float, prec: Precision) -> String {
    fmt_float(x, digits(prec))
}

pub fn phi(cli: &Cli, a: &PhiArgs) -> Result<()> {
    let (prec, model) = model(cli)?;
    let order = a.coeffs.map_or(DEFAULT_ORDER, |n| n.max(DEFAULT_ORDER));
    let series = build_series(&model.poly, order)?;
    let residual = series.recursion_residual();
    let mut out = String::new();
    if let Some(n) = a.coeffs {
        let mut csv = Csv::new(&["n", "phi", "err"]);
        for k in 0..=n {
            let c = series.coeff(k);
            let err = residual * c.to_f64().abs().max(prec.tol(0));
            csv.row([k.to_string(), ffmt(c, prec), fmt_f64(err)]);
        }
        out.push_str(&csv.finish());
    }
    if let Some(x) = &a.eval {
        let z = parse_complex(x, prec.bits())?;
        let v = series.eval_phi(&z)?;
        let d = digits(prec);
        let v = json!({
            "z": json_complex(&z, d),
            "value": json_complex(&v.value, d),
            "err": json_number(&v.err, d.min(6)),
            "lifts": v.lifts,
        });
        out.push_str(&serde_json::to_string_pretty(&v)?);
        out.push('\n');
    }
    if let Some(g) = &a.grid {
        let xs = parse_grid(g)?;
        let mut csv = Csv::new(&["x", "re", "im", "err"]);
        for x in xs {
            let z = prec.complex(x);
            let v = series.eval_phi(&z)?;
            let (re, im) = to_c64(&v.value);
            let err = v.err.to_f64() + f64::EPSILON * cabs_f64(&v.value);
            csv.row([fmt_f64(x), fmt_f64(re), fmt_f64(im), fmt_f64(err)]);
        }
        out.push_str(&csv.finish());
    }
    if let Some(m) = a.fourier {
        let grid = (8 * m).max(64).next_power_of_two();
        let amp = build_periodic_f(&series, grid, 4)?.with_fourier(m)?;
        let mut csv = Csv::new(&["m", "re", "im", "err"]);
        for k in -(m as i64)..=(m as i64) {
            let f = amp.f(k);
            csv.row([k.to_string(), ffmt(f.real(), prec), ffmt(f.imag(), prec), fmt_f64(amp.est_error)]);
        }
        out.push_str(&csv.finish());
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument("phi needs one of --coeffs, --eval, --grid, --fourier".into()).into());
    }
    write(cli, &out)
}

pub fn spectrum(cli: &Cli, a: &SpectrumArgs) -> Result<()> {
    let (prec, model) = model(cli)?;
    let mut out = String::new();
    let needs_records = a.count_grid.is_none() && a.heat_grid.is_none() && a.oscillation.is_none() && !a.dimension;
    if a.dimension {
        let dim = spectral_dimension(&model)?;
        let v = json!({
            "ds_half": dim.ds_half,
            "rho": dim.rho,
            "err": prec.tol(10).max(f64::EPSILON * dim.ds_half),
            "dominant": dim.dominant,
            "offsets": dim.offsets,
        });
        out.push_str(&serde_json::to_string_pretty(&v)?);
        out.push('\n');
    }
    let needs_spectrum = needs_records || a.count_grid.is_some() || a.heat_grid.is_some() || a.oscillation.is_some();
    if !needs_spectrum {
        return write(cli, &out);
    }
    let series = build_series(&model.poly, DEFAULT_ORDER)?;
    let lambda = model.poly.lambda().to_f64();
    let mut bound = a.x_bound;
    if let Some(g) = &a.count_grid {
        bound = bound.max(parse_grid(g)?.into_iter().fold(0.0, f64::max));
    }
    if let Some(p) = a.oscillation {
        bound = bound.max(lambda.powf(6.0 + p as f64));
    }
    let spec = eigenvalues(&model, &series, bound)?;
    let err = prec.tol(10);
    if needs_records {
        let mut csv = Csv::new(&["eigenvalue", "err", "w", "m", "word", "mu", "multiplicity", "root_multiplicity"]);
        for r in &spec.records {
            csv.row([
                ffmt(&r.eigenvalue, prec),
                fmt_f64(err * r.eigenvalue.to_f64().abs()),
                r.w.to_string(),
                r.m.to_string(),
                r.word_string(),
                ffmt(&r.mu, prec),
                r.multiplicity.to_string(),
                r.root_multiplicity.to_string(),
            ]);
        }
        out.push_str(&csv.finish());
    }
    if let Some(g) = &a.count_grid {
        let xs = parse_grid(g)?;
        let mut csv = Csv::new(&["x", "count", "ratio", "smoothed1", "smoothed2", "smoothed3", "err"]);
        for c in counting(&spec, &xs)? {
            csv.row([
                fmt_f64(c.x),
                c.count.to_string(),
                fmt_f64(c.ratio),
                fmt_f64(c.smoothed[0]),
                fmt_f64(c.smoothed[1]),
                fmt_f64(c.smoothed[2]),
                fmt_f64(f64::EPSILON * c.count as f64),
            ]);
        }
        out.push_str(&csv.finish());
    }
    if let Some(g) = &a.heat_grid {
        let ts = parse_grid(g)?;
        let mut csv = Csv::new(&["t", "value", "err", "warning"]);
        for h in heat_trace(&spec, &ts)? {
            csv.row([fmt_f64(h.t), fmt_f64(h.value), fmt_f64(h.truncation_error), h.warning.to_string()]);
        }
        out.push_str(&csv.finish());
    }
    if let Some(p) = a.oscillation {
        let spp = a.samples_per_period;
        let vals = smoothed_weyl_samples(&spec, lambda, 6.0, p, spp, a.smoothing)?;
        let osc = oscillation_spectrum(&vals, spp)?;
        let mut csv = Csv::new(&["m", "re", "im", "amplitude", "err"]);
        for (m, ((re, im), amp)) in osc.coefficients.iter().zip(&osc.amplitudes).enumerate() {
            csv.row([m.to_string(), fmt_f64(*re), fmt_f64(*im), fmt_f64(*amp), fmt_f64(osc.noise_floor)]);
        }
        out.push_str(&csv.finish());
    }
    write(cli, &out)
}

fn engine(cli: &Cli, a: &ZetaArgs) -> Result<ZetaEngine> {
    let (_, model) = model(cli)?;
    let options = ZetaOptions { direct_shells: a.shells, ..ZetaOptions::default() };
    Ok(ZetaEngine::new(model, options)?)
}

pub fn zeta(cli: &Cli, a: &ZetaArgs) -> Result<()> {
    let eng = engine(cli, a)?;
    let prec = eng.precision();
    let bits = prec.bits();
    let d = digits(prec);
    let mut report = serde_json::Map::new();
    if let Some(text) = &a.s {
        let mut rows = Vec::new();
        for s in parse_list(text, bits)? {
            let row = match a.w {
                Some(w) => {
                    let mut routes = Vec::new();
                    let rho = eng.model().poly.rho().to_f64();
                    if s.real().to_f64() > rho {
                        routes.push(eng.zeta_phi(w, &s, Route::Direct)?.to_json(d));
                    }
                    routes.push(eng.zeta_phi(w, &s, Route::Mellin)?.to_json(d));
                    json!({ "w": w, "s": json_complex(&s, d), "routes": routes })
                }
                None => {
                    let mut routes = Vec::new();
                    let rho = eng.model().poly.rho().to_f64();
                    if s.real().to_f64() > rho {
                        routes.push(eng.zeta_delta(&s, Route::Direct)?.to_json(d));
                    }
                    routes.push(eng.zeta_delta(&s, Route::Mellin)?.to_json(d));
                    json!({ "s": json_complex(&s, d), "routes": routes })
                }
            };
            rows.push(row);
        }
        report.insert("values".into(), Value::Array(rows));
    }
    if a.special {
        report.insert("special".into(), eng.special_values()?.to_json(d));
    }
    if a.poles {
        let poles: Vec<Value> = eng.poles(a.mmax)?.iter().map(|p| p.to_json(d)).collect();
        report.insert("poles".into(), Value::Array(poles));
    }
    if let Some(text) = &a.consistency {
        let grid = parse_list(text, bits)?;
        let c = eng.zeta_consistency(&grid)?;
        let rows: Vec<Value> = c
            .rows
            .iter()
            .map(|r| {
                json!({
                    "w": r.w,
                    "s": json_complex(&r.s, d),
                    "direct": r.direct.to_json(d),
                    "mellin": r.mellin.to_json(d),
                    "relative": r.relative,
                })
            })
            .collect();
        report.insert("consistency".into(), json!({ "rows": rows, "max_relative": c.max_relative }));
    }
    if let Some(g) = &a.boundary_product {
        let w = a.w.ok_or_else(|| Error::InvalidArgument("--boundary-product needs --w".into()))?;
        let us = parse_grid(g)?;
        let samples = eng.boundary_product(w, &us, a.product_terms)?;
        let mut csv = Csv::new(&["u", "log_product", "err"]);
        for (u, v) in samples {
            csv.row([fmt_f64(u), fmt_f64(v), fmt_f64(f64::EPSILON * v.abs().max(1.0) * a.product_terms as f64)]);
        }
        if report.is_empty() {
            return write(cli, &csv.finish());
        }
        report.insert("boundary_product_csv".into(), Value::String(csv.finish()));
    }
    if report.is_empty() {
        return Err(Error::InvalidArgument(
            "zeta needs one of --s, --special, --poles, --consistency, --boundary-product".into(),
        )
        .into());
    }
    write_json(cli, &Value::Object(report))
}

struct CheckLine {
    name: String,
    passed: bool,
    detail: String,
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> CheckLine {
    CheckLine { name: name.into(), passed, detail: detail.into() }
}

fn sinh_checks(prec: Precision) -> Result<Vec<CheckLine>> {
    let mut file: Value = serde_json::from_str(&builtin_model("sinh").expect("builtin").to_json())?;
    let extra = json!({ "w": -4, "P": [1], "Q": [1], "m_min": 0 });
    file["offsets"].as_array_mut().expect("offsets").push(extra);
    let model = ModelFile::from_json(&file.to_string())?.build(prec)?;
    let bits = prec.bits();
    let tol = prec.tol(15);
    let mut out = Vec::new();
    let series = build_series(&model.poly, DEFAULT_ORDER)?;
    for x in ["1.0", "0.25", "3.5", "-2.0", "1+1i"] {
        let z = parse_complex(x, bits)?;
        let got = series.eval_phi(&z)?.value;
        let want = sinh_phi(&z);
        let diff = cabs_f64(&Complex::with_val(bits, &got - &want)) / cabs_f64(&want).max(1.0);
        out.push(check(format!("phi({x})"), diff <= tol, format!("relative difference {diff:.3e}")));
    }
    let eng = ZetaEngine::new(model, ZetaOptions::default())?;
    for w in [0.0, -4.0] {
        for s in ["1.0", "1.5", "2.0+0.5i", "0.25", "-0.75", "0.3+2i"] {
            let z = parse_complex(s, bits)?;
            let want = sinh_zeta(w, &z, prec)?.value;
            let rho = eng.model().poly.rho().to_f64();
            let mut routes = vec![Route::Mellin];
            if z.real().to_f64() > rho + 0.2 {
                routes.push(Route::Direct);
            }
            for r in routes {
                let got = eng.zeta_phi(w, &z, r)?;
                let diff = cabs_f64(&Complex::with_val(bits, &got.value - &want)) / cabs_f64(&want).max(1e-30);
                let bound = tol.max(10.0 * got.est_error / cabs_f64(&want).max(1e-30));
                out.push(check(
                    format!("zeta_phi(w={w}, s={s}, {})", got.method.tag()),
                    diff <= bound,
                    format!("relative difference {diff:.3e}"),
                ));
            }
        }
    }
    Ok(out)
}

fn render_checks(lines: &[CheckLine]) -> String {
    let mut s = String::new();
    for l in lines {
        s.push_str(&format!("{} {}: {}\n", if l.passed { "PASS" } else { "FAIL" }, l.name, l.detail));
    }
    s
}

pub fn verify(cli: &Cli, a: &VerifyArgs) -> Result<()> {
    let prec = precision(cli)?;
    let mut lines = Vec::new();
    let mut out = String::new();
    if let Some(name) = &a.oracle {
        match name.as_str() {
            "sinh" => lines.extend(sinh_checks(prec)?),
            other => return Err(Error::InvalidArgument(format!("unknown oracle {other}")).into()),
        }
    }
    if a.decimation {
        let model = load_model(&cli.model, prec)?;
        let r = verify_decimation(&model, a.levels)?;
        for c in &r.closure {
            lines.push(check(
                format!("closure {}->{}", c.from_level, c.to_level),
                c.rate >= 1.0 - 1e-12,
                format!("{} of {} non-exceptional eigenvalues mapped", c.mapped, c.non_exceptional),
            ));
        }
        for t in &r.tallies {
            lines.push(check(
                format!("multiplicity level {} w={}", t.level, t.w),
                t.expected == t.found as i128,
                format!("expected {} found {}", t.expected, t.found),
            ));
        }
        for m in &r.mismatches {
            lines.push(check(format!("mismatch level {} eigenvalue {:.12}", m.level, m.eigenvalue), false, m.detail.clone()));
        }
        if !r.passed && lines.iter().all(|l| l.passed) {
            lines.push(check("decimation", false, "report flagged failure"));
        }
        out.push_str(&serde_json::to_string_pretty(&r)?);
        out.push('\n');
    }
    if a.model_check || (a.oracle.is_none() && !a.decimation) {
        let file = model_file(&cli.model)?;
        let report = validate_model(&file, prec);
        for c in &report.checks {
            lines.push(check(c.name.clone(), c.passed, c.detail.clone()));
        }
    }
    let text = format!("{}{}", render_checks(&lines), out);
    write(cli, &text)?;
    let failed: Vec<&str> = lines.iter().filter(|l| !l.passed).map(|l| l.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(VerificationFailed(failed.join("; ")).into())
    }
}
