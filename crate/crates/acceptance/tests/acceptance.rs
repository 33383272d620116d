//! Acceptance criteria at D = 40. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use fractal_zeta::oracle::{build_gasket, laplacian_spectrum, verify_decimation};
use fractal_zeta::poincare::{build_log_phi_series, build_series};
use fractal_zeta::poly::{builtin_model, Boundary, DecimationModel, ModelFile};
use fractal_zeta::precision::cabs_f64;
use fractal_zeta::spectrum::{eigenvalues, oscillation_spectrum, smoothed_weyl_samples};
use fractal_zeta::zeta::{PoleKind, Route, ZetaEngine, ZetaOptions};
use fractal_zeta::Precision;
use rug::float::Constant;
use rug::{Complex, Float};

const DIGITS: u32 = 40;

type Outcome = Result<(bool, Vec<String>), String>;

fn prec() -> Precision {
    Precision::new(DIGITS)
}

fn model(name: &str) -> DecimationModel {
    builtin_model(name).unwrap().build(prec()).unwrap()
}

fn engine(name: &str) -> ZetaEngine {
    ZetaEngine::new(model(name), ZetaOptions::default()).unwrap()
}

fn c(re: f64, im: f64) -> Complex {
    Complex::with_val(prec().bits(), (re, im))
}

fn line(ok: bool, text: String) -> String {
    format!("    [{}] {text}", if ok { "ok" } else { "x" })
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let eng = engine("sg2-neumann");
    let sv = eng.special_values().map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut notes = Vec::new();
    for (w, want) in [(-3.0, 5.2399551500), (-5.0, 9.0660163789)] {
        let h = sv.h.iter().find(|h| h.w == w).ok_or("missing H value")?;
        let got = h.h_published.to_f64();
        let pass = (got - want).abs() <= 1e-8;
        ok &= pass;
        notes.push(line(pass, format!("H_{w}(0) = {got:.12} (target {want}, err {:.1e})", h.err)));
    }
    let d = sv.published.derivative.as_ref().ok_or("no derivative")?.to_f64();
    let pass = (d - 0.9685221499).abs() <= 1e-7;
    ok &= pass;
    notes.push(line(pass, format!("zeta_delta'(0) = {d:.12} (target 0.9685221499)")));
    let secs = t.elapsed().as_secs_f64();
    let pass = secs < 120.0;
    ok &= pass;
    notes.push(line(pass, format!("runtime {secs:.1} s")));
    Ok((ok, notes))
}

fn criterion_2() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let eng = engine("sg2-neumann");
    for (s, want) in [(1.0, 7.0 / 30.0), (2.0, 1.0 / 150.0)] {
        for route in [Route::Direct, Route::Mellin] {
            let v = eng.zeta_delta(&c(s, 0.0), route).map_err(|e| e.to_string())?;
            let pass = (v.re() - want).abs() <= 1e-10;
            ok &= pass;
            notes.push(line(pass, format!("Neumann zeta_delta({s}) {route:?} = {:.14} (target {want:.14})", v.re())));
        }
    }
    let z0 = eng.laurent_at_zero(fractal_zeta::zeta::SignConvention::Published).map_err(|e| e.to_string())?;
    let want = 1.5 * 3f64.ln() / 5f64.ln() - 0.5;
    let got = z0.value.to_f64();
    let pass = (got - want).abs() <= 1e-10;
    ok &= pass;
    notes.push(line(pass, format!("Neumann zeta_delta(0) = {got:.14} (target {want:.14})")));
    for k in [2u32, 3] {
        let kf = k as f64;
        let eng = engine(&format!("sg{k}-dirichlet"));
        let want = (kf * kf + 3.0 * kf - 1.0) / (2.0 * (kf + 2.0) * (kf + 3.0));
        for route in [Route::Direct, Route::Mellin] {
            let v = eng.zeta_delta(&c(1.0, 0.0), route).map_err(|e| e.to_string())?;
            let pass = (v.re() - want).abs() <= 1e-10;
            ok &= pass;
            notes.push(line(
                pass,
                format!(
                    "Dirichlet K={k} zeta_delta(1) {route:?} = {:.14} (formula {want:.14}; K/(2(K+2)) = {:.14})",
                    v.re(),
                    kf / (2.0 * (kf + 2.0))
                ),
            ));
        }
    }
    Ok((ok, notes))
}

/// 4 sinh²(½√z) evaluated directly in MPC.
fn sinh_closed(z: &Complex) -> Complex {
    let r = Complex::with_val(z.prec().0, z.sqrt_ref()) / 2u32;
    r.sinh().square() * 4u32
}

fn sinh_with_offset() -> DecimationModel {
    let mut v: serde_json::Value = serde_json::from_str(&builtin_model("sinh").unwrap().to_json()).unwrap();
    v["offsets"].as_array_mut().unwrap().push(serde_json::json!({ "w": -4, "P": [1], "Q": [1], "m_min": 0 }));
    ModelFile::from_json(&v.to_string()).unwrap().build(prec()).unwrap()
}

fn criterion_3() -> Outcome {
    let p = prec();
    let bits = p.bits();
    let mut ok = true;
    let mut notes = Vec::new();
    let m = sinh_with_offset();
    let series = build_series(&m.poly, 80).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    // Deterministic low-discrepancy points in the disc |z| ≤ 100.
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    for i in 0..1000 {
        let r = 100.0 * ((i as f64 + 0.5) / 1000.0).sqrt();
        let th = 2.0 * PI * ((i as f64 * golden) % 1.0);
        let z = c(r * th.cos(), r * th.sin());
        let got = series.eval_phi(&z).map_err(|e| e.to_string())?.value;
        let want = sinh_closed(&z);
        let rel = cabs_f64(&Complex::with_val(bits, &got - &want)) / cabs_f64(&want).max(1e-300);
        worst = worst.max(rel);
    }
    let pass = worst <= 1e-30;
    ok &= pass;
    notes.push(line(pass, format!("eval_phi vs 4 sinh^2(sqrt(z)/2) on 1000 points: max rel {worst:.2e}")));

    let eng = ZetaEngine::new(m, ZetaOptions::default()).map_err(|e| e.to_string())?;
    let pi = Float::with_val(bits, Constant::Pi);
    let four_pi2 = Float::with_val(bits, pi.square_ref()) * 4u32;
    for s in [0.75, 1.0, 1.5, 2.0, 3.0] {
        let sf = Float::with_val(bits, s);
        let zeta2s = Float::with_val(bits, Float::with_val(bits, &sf * 2u32).zeta_ref());
        let want = Float::with_val(bits, -Float::with_val(bits, &sf * four_pi2.clone().ln())).exp() * zeta2s * 2u32;
        for route in [Route::Direct, Route::Mellin] {
            let v = eng.zeta_phi(0.0, &c(s, 0.0), route).map_err(|e| e.to_string())?;
            let rel = cabs_f64(&Complex::with_val(bits, &v.value - &want)) / want.to_f64().abs();
            let pass = rel <= 1e-10;
            ok &= pass;
            notes.push(line(pass, format!("zeta_phi,0({s}) {}: rel {rel:.2e}", v.method.tag())));
        }
    }
    for route in [Route::Direct, Route::Mellin] {
        let v = eng.zeta_phi(-4.0, &c(2.0, 0.0), route).map_err(|e| e.to_string())?;
        let diff = cabs_f64(&Complex::with_val(bits, &v.value - Float::with_val(bits, 1) / 48u32));
        let pass = diff <= 1e-12;
        ok &= pass;
        notes.push(line(pass, format!("zeta_phi,-4(2) {} - 1/48 = {diff:.2e}", v.method.tag())));
    }
    Ok((ok, notes))
}

const GASKETS: [&str; 3] = ["sg2-neumann", "sg2-dirichlet", "sg3-dirichlet"];

fn criterion_4() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for name in GASKETS {
        let eng = engine(name);
        let mut worst: f64 = 0.0;
        let mut worst_zero: f64 = 0.0;
        for off in &eng.model().offsets {
            let w = off.w_f64();
            let logs = build_log_phi_series(eng.series(), &off.w, 8).map_err(|e| e.to_string())?;
            for m in 1..=5usize {
                let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
                let want = sign * m as f64 * logs.b(m).to_f64();
                let v = eng.zeta_phi(w, &c(m as f64, 0.0), Route::Direct).map_err(|e| e.to_string())?;
                worst = worst.max((v.re() - want).abs() / want.abs());
            }
            let z = eng.zeta_phi(w, &c(-1.0, 0.0), Route::Mellin).map_err(|e| e.to_string())?;
            worst_zero = worst_zero.max(cabs_f64(&z.value));
        }
        let pass = worst <= 1e-8 && worst_zero <= 1e-8;
        ok &= pass;
        notes.push(line(pass, format!("{name}: ladder m=1..5 max rel {worst:.2e}; |zeta_phi,w(-1)| max {worst_zero:.2e}")));
    }
    Ok((ok, notes))
}

fn criterion_5() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let grid: Vec<Complex> = [1.0, 1.5, 2.0, 2.5, 3.0].iter().map(|&s| c(s, 0.0)).collect();
    for name in GASKETS {
        let eng = engine(name);
        let r = eng.zeta_consistency(&grid).map_err(|e| e.to_string())?;
        let pass = r.max_relative <= 1e-8;
        ok &= pass;
        notes.push(line(pass, format!("{name}: {} rows, max relative {:.2e}", r.rows.len(), r.max_relative)));
    }
    Ok((ok, notes))
}

fn criterion_6() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let g = build_gasket(1, 2).map_err(|e| e.to_string())?;
    let spec = laplacian_spectrum(&g, Boundary::Dirichlet).map_err(|e| e.to_string())?;
    let mut ev = spec.eigenvalues.clone();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let want = [2.0, 5.0, 5.0];
    let pass = ev.len() == 3 && ev.iter().zip(want).all(|(a, b)| (a - b).abs() <= 1e-12);
    ok &= pass;
    notes.push(line(pass, format!("level-1 Dirichlet spectrum {ev:?}")));
    for name in ["sg2-dirichlet", "sg2-neumann"] {
        let r = verify_decimation(&model(name), 3).map_err(|e| e.to_string())?;
        let closure = r.closure.iter().all(|c| c.rate >= 1.0);
        let tallies = r.tallies.iter().all(|t| t.expected == t.found as i128);
        let pass = closure && tallies && r.mismatches.is_empty() && r.passed;
        ok &= pass;
        let rates: Vec<String> = r.closure.iter().map(|c| format!("{}->{} {}/{}", c.from_level, c.to_level, c.mapped, c.non_exceptional)).collect();
        notes.push(line(pass, format!("{name}: closure [{}], {} tallies exact: {tallies}", rates.join(", "), r.tallies.len())));
    }
    Ok((ok, notes))
}

fn criterion_7() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let eng = engine("sg2-dirichlet");
    let target = 3f64.ln() / 5f64.ln();
    let step = 2.0 * PI / 5f64.ln();
    let poles = eng.poles(2).map_err(|e| e.to_string())?;
    let near = |re: f64, im: f64| {
        poles.iter().find(|p| (p.location.real().to_f64() - re).abs() < 1e-9 && (p.location.imag().to_f64() - im).abs() < 1e-9)
    };
    let real = near(target, 0.0).ok_or("no pole at log3/log5")?;
    let (rr, ri) = (real.residue.real().to_f64(), real.residue.imag().to_f64());
    let pass = !real.cancelled && rr > 0.0 && ri.abs() <= 10.0 * real.est_error.max(1e-30) && rr > 10.0 * real.est_error;
    ok &= pass;
    notes.push(line(pass, format!("pole at {target:.10}: residue {rr:.10e} (err {:.1e})", real.est_error)));
    let mut count = 0;
    for im in [step, -step] {
        if let Some(p) = near(target, im) {
            let a = cabs_f64(&p.residue);
            let live = !p.cancelled && a > 10.0 * p.est_error;
            count += live as usize;
            notes.push(line(live, format!("pole at {target:.6}{im:+.6}i: |residue| {a:.6e} (err {:.1e})", p.est_error)));
        }
    }
    let pass = count >= 2;
    ok &= pass;
    notes.push(line(pass, format!("{count} non-real candidates with |residue| > 10x noise")));
    let grid: Vec<_> = poles.iter().filter(|p| p.kind == PoleKind::ZetaGrid).collect();
    let worst = grid.iter().map(|p| cabs_f64(&p.residue)).fold(0.0, f64::max);
    let pass = !grid.is_empty() && grid.iter().all(|p| p.cancelled) && worst <= 1e-10;
    ok &= pass;
    notes.push(line(pass, format!("{} grid poles lambda^s = 2 cancelled, max |residue| {worst:.2e}", grid.len())));
    Ok((ok, notes))
}

fn criterion_8() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let eng = engine("sg2-dirichlet");
    let lambda = 5.0f64;
    let (u0, periods, spp) = (6.0, 6usize, 64usize);
    let spec = eigenvalues(eng.model(), eng.series(), lambda.powf(u0 + periods as f64)).map_err(|e| e.to_string())?;
    let vals = smoothed_weyl_samples(&spec, lambda, u0, periods, spp, 2).map_err(|e| e.to_string())?;
    let osc = oscillation_spectrum(&vals, spp).map_err(|e| e.to_string())?;
    let (re, im) = osc.coefficients[1];
    let c1 = re.hypot(im);
    let pass = osc.amplitudes[1] > 10.0 * osc.noise_floor;
    ok &= pass;
    notes.push(line(pass, format!("j=1 amplitude {:.4e} vs noise floor {:.2e}", osc.amplitudes[1], osc.noise_floor)));

    let (target, step) = (3f64.ln() / 5f64.ln(), 2.0 * PI / 5f64.ln());
    let bits = prec().bits();
    let res = eng
        .poles(1)
        .map_err(|e| e.to_string())?
        .into_iter()
        .find(|p| (p.location.real().to_f64() - target).abs() < 1e-9 && (p.location.imag().to_f64() - step).abs() < 1e-9)
        .ok_or("no pole at log3/log5 + 2 pi i sigma")?;
    let s = res.location.clone();
    let poly = Complex::with_val(bits, &s * Complex::with_val(bits, &s + 1u32)) * Complex::with_val(bits, &s + 2u32);
    let literal = cabs_f64(&res.residue) / cabs_f64(&poly);
    let predicted = 2.0 * literal;
    let ratio = c1 / predicted;
    let pass = (1.0 / 1.5..=1.5).contains(&ratio);
    ok &= pass;
    notes.push(line(
        pass,
        format!("|c_1| = {c1:.6e}, 2|Res|/|s(s+1)(s+2)| = {predicted:.6e}, ratio {ratio:.4} (without k!: {:.4})", c1 / literal),
    ));
    Ok((ok, notes))
}

fn criterion_9() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for name in ["sg2-neumann", "sg2-dirichlet"] {
        let eng = engine(name);
        let rho = eng.model().poly.rho().to_f64();
        let a = eng.amplitude();
        let stat = a.max_nonzero_mode();
        let pass = rho < 0.5 && stat > 10.0 * a.est_error;
        ok &= pass;
        notes.push(line(pass, format!("{name} (rho {rho:.4}): max |f_m| {stat:.4e}, noise {:.2e}", a.est_error)));
    }
    let eng = engine("sinh");
    let a = eng.amplitude();
    let stat = a.max_nonzero_mode();
    let pass = stat <= a.est_error;
    ok &= pass;
    notes.push(line(pass, format!("sinh: max |f_m| {stat:.2e}, noise {:.2e}", a.est_error)));
    Ok((ok, notes))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("gasket H values and zeta_delta'(0)", criterion_1),
        ("rational special values", criterion_2),
        ("closed-form oracle equivalence", criterion_3),
        ("integer ladders and trivial zeros", criterion_4),
        ("route consistency", criterion_5),
        ("discrete decimation oracle", criterion_6),
        ("pole structure", criterion_7),
        ("oscillation diagnostics", criterion_8),
        ("non-constancy of F", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (pass, notes) = match f() {
            Ok(r) => r,
            Err(e) => (false, vec![format!("    error: {e}")]),
        };
        failed += !pass as usize;
        println!("criterion {}: {} {name} ({:.1} s)", i + 1, if pass { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
        for n in notes {
            println!("{n}");
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
