use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "fractal-zeta", version, about = "Spectral zeta functions of fractal Laplacians")]
pub struct Cli {
    /// Model JSON file or builtin name (sg2-neumann, sg2-dirichlet, sg3-dirichlet, sgK-dirichlet, sinh).
    #[arg(long, global = true, default_value = "sg2-neumann")]
    pub model: String,
    /// Working precision in decimal digits.
    #[arg(long, global = true, env = "FRACTAL_ZETA_PRECISION", default_value_t = 60)]
    pub precision: u32,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Taylor coefficients, samples and Fourier data of Φ.
    Phi(PhiArgs),
    /// Eigenvalues, counting function and heat trace.
    Spectrum(SpectrumArgs),
    /// ζ_{Φ,w}, ζ_Δ, special values and poles.
    Zeta(ZetaArgs),
    /// Oracle and decimation checks.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct PhiArgs {
    /// Emit φ_0..φ_N.
    #[arg(long)]
    pub coeffs: Option<usize>,
    /// Evaluate Φ at one point (a, a+bi, a-bi).
    #[arg(long, allow_hyphen_values = true)]
    pub eval: Option<String>,
    /// Sample Φ on a grid, e.g. lin:0:10:11 or log:1:1e3:16.
    #[arg(long)]
    pub grid: Option<String>,
    /// Emit the Fourier coefficients f_m of the periodic amplitude for |m| ≤ M.
    #[arg(long)]
    pub fourier: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    /// Enumeration bound.
    #[arg(long = "X", alias = "x-bound", default_value_t = 1e4)]
    pub x_bound: f64,
    /// Counting-function grid, e.g. log:1:1e6:512.
    #[arg(long)]
    pub count_grid: Option<String>,
    /// Heat-trace grid in t.
    #[arg(long)]
    pub heat_grid: Option<String>,
    /// Spectral dimension report.
    #[arg(long)]
    pub dimension: bool,
    /// Fourier amplitudes of the k-smoothed counting function: periods.
    #[arg(long)]
    pub oscillation: Option<usize>,
    /// Smoothing order for --oscillation.
    #[arg(long, default_value_t = 2)]
    pub smoothing: usize,
    /// Samples per period for --oscillation.
    #[arg(long, default_value_t = 64)]
    pub samples_per_period: usize,
}

#[derive(Args, Debug)]
pub struct ZetaArgs {
    /// Evaluation point(s), comma separated (e.g. 2+0i,1.5).
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<String>,
    /// Offset w for ζ_{Φ,w}; ζ_Δ when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub w: Option<f64>,
    /// Special values report.
    #[arg(long)]
    pub special: bool,
    /// Pole and residue report.
    #[arg(long)]
    pub poles: bool,
    #[arg(long, default_value_t = 3)]
    pub mmax: usize,
    /// Route consistency over the listed real s values.
    #[arg(long)]
    pub consistency: Option<String>,
    /// Log samples of the boundary product for --w over a u-grid.
    #[arg(long)]
    pub boundary_product: Option<String>,
    /// Terms of the boundary product.
    #[arg(long, default_value_t = 60)]
    pub product_terms: usize,
    /// Direct-sum shells (default from the degree).
    #[arg(long)]
    pub shells: Option<usize>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Closed-form oracle checks (sinh).
    #[arg(long)]
    pub oracle: Option<String>,
    /// Spectral decimation on gasket graphs.
    #[arg(long)]
    pub decimation: bool,
    #[arg(long, default_value_t = 3)]
    pub levels: u32,
    /// Model validation report only.
    #[arg(long)]
    pub model_check: bool,
}
