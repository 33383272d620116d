use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use fractal_zeta::poly::{builtin_model, validate_model, DecimationModel, ModelFile};
use fractal_zeta::{Error, Precision};
use rug::Complex;

/// Model file from a path or a builtin name; "name.json" falls back to the builtin "name".
pub fn model_file(spec: &str) -> Result<ModelFile> {
    let path = Path::new(spec);
    if path.exists() {
        let text = fs::read_to_string(path).with_context(|| format!("reading model file {spec}"))?;
        return ModelFile::from_json(&text).with_context(|| format!("parsing model file {spec}"));
    }
    let bare = path.parent().is_none_or(|p| p.as_os_str().is_empty());
    bare.then(|| builtin_model(spec.strip_suffix(".json").unwrap_or(spec)))
        .flatten()
        .ok_or_else(|| Error::InvalidModel(format!("model file not found: {spec}")).into())
}

/// Loads a model from a file or a builtin name and validates it first.
pub fn load_model(spec: &str, prec: Precision) -> Result<DecimationModel> {
    let file = model_file(spec)?;
    let report = validate_model(&file, prec);
    if !report.passed() {
        let lines: Vec<String> =
            report.failures().iter().map(|c| format!("  {}: {}", c.name, c.detail)).collect();
        return Err(Error::InvalidModel(format!("model {} failed validation:\n{}", file.name, lines.join("\n"))).into());
    }
    Ok(file.build(prec)?)
}

/// Grid spec "lin:a:b:n" or "log:a:b:n".
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 4 {
        return Err(Error::InvalidArgument(format!("grid must be kind:a:b:n, got {spec}")).into());
    }
    let a: f64 = parts[1].parse().map_err(|_| anyhow!(Error::InvalidArgument(format!("bad grid start {}", parts[1]))))?;
    let b: f64 = parts[2].parse().map_err(|_| anyhow!(Error::InvalidArgument(format!("bad grid end {}", parts[2]))))?;
    let n: usize = parts[3].parse().map_err(|_| anyhow!(Error::InvalidArgument(format!("bad grid size {}", parts[3]))))?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let t = |i: usize| if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
    match parts[0] {
        "lin" => Ok((0..n).map(|i| if i + 1 == n && n > 1 { b } else { a + (b - a) * t(i) }).collect()),
        "log" => {
            if a <= 0.0 || b <= 0.0 {
                bail!(Error::InvalidArgument("log grid needs positive ends".into()));
            }
            Ok((0..n)
                .map(|i| if i + 1 == n && n > 1 { b } else { (a.ln() + (b.ln() - a.ln()) * t(i)).exp() })
                .collect())
        }
        k => Err(Error::InvalidArgument(format!("unknown grid kind {k}")).into()),
    }
}

/// Complex literal: "a", "a+bi", "a-bi", "bi".
pub fn parse_complex(text: &str, bits: u32) -> Result<Complex> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || anyhow!(Error::InvalidArgument(format!("cannot parse complex number {text}")));
    if let Some(body) = t.strip_suffix('i') {
        let split = body
            .char_indices()
            .skip(1)
            .filter(|&(i, c)| (c == '+' || c == '-') && !matches!(body.as_bytes()[i - 1], b'e' | b'E'))
            .map(|(i, _)| i)
            .last();
        let (re, im) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let im = match im {
            "+" | "" => "1",
            "-" => "-1",
            x => x,
        };
        let re = rug::Float::parse(re).map_err(|_| bad())?;
        let im = rug::Float::parse(im.trim_start_matches('+')).map_err(|_| bad())?;
        Ok(Complex::with_val(bits, (re, im)))
    } else {
        let re = rug::Float::parse(&t).map_err(|_| bad())?;
        Ok(Complex::with_val(bits, (re, 0)))
    }
}

pub fn parse_list(text: &str, bits: u32) -> Result<Vec<Complex>> {
    text.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_complex(s, bits)).collect()
}

/// Writes to the output file or stdout.
pub fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// CSV with a header row.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv { buf: format!("{}\n", header.join(",")) }
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) {
        let v: Vec<String> = fields.into_iter().collect();
        self.buf.push_str(&v.join(","));
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(s: &str) -> (f64, f64) {
        let z = parse_complex(s, 64).unwrap();
        (z.real().to_f64(), z.imag().to_f64())
    }

    #[test]
    fn complex_literals() {
        assert_eq!(c("2"), (2.0, 0.0));
        assert_eq!(c("2+0i"), (2.0, 0.0));
        assert_eq!(c("-1.5-2i"), (-1.5, -2.0));
        assert_eq!(c("3i"), (0.0, 3.0));
        assert_eq!(c("1e-3+2e+1i"), (1e-3, 20.0));
        assert_eq!(c("0.5 - i"), (0.5, -1.0));
        assert!(parse_complex("abc", 64).is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("lin:0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        let g = parse_grid("log:1:1e6:7").unwrap();
        assert_eq!(g[6], 1e6);
        assert!((g[3] - 1e3).abs() < 1e-9);
        assert!(parse_grid("log:0:1:3").is_err());
        assert!(parse_grid("lin:0:1").is_err());
        assert!(parse_grid("cubic:0:1:3").is_err());
    }
}
