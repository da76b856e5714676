//! Library side of the `billiard` command: argument model, dispatch and
//! report rendering. `main.rs` only parses arguments and maps exit codes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use billiard_core::billiard::{iterate, lazutkin_coordinates};
use billiard_core::caustic::{geometric_lazutkin_q, lazutkin_integral_at};
use billiard_core::geometry::DEFAULT_RESOLUTION;
use billiard_core::invariants::{
    alpha_coefficients, alpha_series_eval, beta_coefficients, beta_series_derivative,
    beta_series_eval, compute_invariants, lazutkin_of_rotation,
};
use billiard_core::report::{
    fmt_f64, residual_sparkline, Check, InvariantReport, SpectrumReport, VerifyReport,
    SCHEMA_VERSION,
};
use billiard_core::spectrum::{check_rotation, compare_spectrum_vs_series, SpectrumOptions};
use billiard_core::verify::{verify_circle, verify_ellipse};
use billiard_core::{build_domain, CausticProbe, Domain, DomainSpec, PhasePoint};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub const QUAD_N_ENV: &str = "BILLIARD_QUAD_N";

/// |ω| above which the truncated β series is flagged as unreliable.
pub const OMEGA_WARN: f64 = 0.2;

#[derive(Debug, Parser)]
#[command(name = "billiard", version, about = "Convex billiards: invariants, spectra, caustics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Quadrature / boundary resolution (overrides BILLIARD_QUAD_N).
    #[arg(long, global = true)]
    pub quad_n: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Seed for optimizer restarts.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Debug, Args)]
pub struct DomainArg {
    /// JSON domain file.
    #[arg(long)]
    pub domain: PathBuf,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Parse and build a domain, reporting its perimeter.
    Validate(DomainArg),
    /// Integral invariants with the derived β and α coefficients.
    Invariants(DomainArg),
    /// Evaluate the β series at a rotation number.
    Beta {
        #[command(flatten)]
        domain: DomainArg,
        #[arg(long, allow_hyphen_values = true)]
        omega: f64,
    },
    /// Evaluate the α series at `c` (defined for c ≥ -ℓ₀).
    Alpha {
        #[command(flatten)]
        domain: DomainArg,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
    },
    /// Marked length spectrum against the β series.
    Spectrum {
        #[command(flatten)]
        domain: DomainArg,
        /// Comma-separated list such as `1/2,1/3,2/7`.
        #[arg(long, value_parser = parse_rationals)]
        rationals: Rationals,
    },
    /// Iterate the billiard map and print the orbit.
    Orbit {
        #[command(flatten)]
        domain: DomainArg,
        #[arg(long, default_value_t = 0.0)]
        s: f64,
        #[arg(long)]
        phi: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Lazutkin quantity of a caustic probe.
    Caustic {
        #[command(flatten)]
        domain: DomainArg,
        /// `confocal:mu=<μ>`, `confocal:frac=<μ/μ₀>` or `circle:r=<ρ₀>`.
        #[arg(long)]
        probe: String,
        /// Comma-separated subset of `Q,L`.
        #[arg(long, default_value = "Q,L", value_delimiter = ',')]
        check: Vec<String>,
        #[arg(long, default_value_t = 16)]
        points: usize,
    },
    /// Closed-form verification suites.
    #[command(subcommand)]
    Verify(Suite),
    /// SVG sparkline of spectrum residuals.
    Report {
        #[command(flatten)]
        domain: DomainArg,
        #[arg(long, value_parser = parse_rationals)]
        rationals: Rationals,
    },
}

#[derive(Clone, Debug, Subcommand)]
pub enum Suite {
    Circle {
        #[arg(long = "R", default_value_t = 1.0)]
        radius: f64,
    },
    Ellipse {
        #[arg(long, default_value_t = 0.5)]
        h: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rationals(pub Vec<(u32, u32)>);

pub fn parse_rationals(text: &str) -> Result<Rationals, String> {
    text.split(',')
        .map(|item| {
            let (p, q) = item.trim().split_once('/').ok_or_else(|| format!("'{item}' is not p/q"))?;
            let p: u32 = p.trim().parse().map_err(|_| format!("bad numerator in '{item}'"))?;
            let q: u32 = q.trim().parse().map_err(|_| format!("bad denominator in '{item}'"))?;
            check_rotation(p, q).map_err(|e| e.to_string())?;
            Ok((p, q))
        })
        .collect::<Result<_, _>>()
        .map(Rationals)
}

/// Everything needed to run one command.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub quadrature_n: usize,
    pub format: OutputFormat,
    pub seed: u64,
}

impl RunConfig {
    /// Resolve the quadrature size: flag, then `BILLIARD_QUAD_N`, then the default.
    pub fn from_cli(cli: Cli, env_quad_n: Option<&str>) -> Result<Self, Failure> {
        let quadrature_n = match (cli.quad_n, env_quad_n) {
            (Some(n), _) => n,
            (None, Some(v)) => v
                .trim()
                .parse()
                .map_err(|_| Failure::Input(format!("{QUAD_N_ENV}='{v}' is not an integer")))?,
            (None, None) => DEFAULT_RESOLUTION,
        };
        Ok(Self { command: cli.command, quadrature_n, format: cli.format, seed: cli.seed })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Compute(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(_) => 2,
            Failure::Compute(_) => 1,
        }
    }
}

impl From<billiard_core::Error> for Failure {
    fn from(e: billiard_core::Error) -> Self {
        use billiard_core::Error::*;
        match e {
            InvalidSpec(_) | NonConvex { .. } | OutOfRange { .. } | InvalidRotation { .. }
            | DomainError { .. } => Failure::Input(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

/// Rendered report plus the verdict of any checks it carries.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub body: String,
    pub passed: bool,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Self { body, passed: true, warnings: Vec::new() }
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

pub fn load_domain(path: &Path, resolution: usize) -> Result<Domain, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    let spec = DomainSpec::from_json(&text)?;
    Ok(build_domain(&spec, resolution)?)
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct ValidateReport<'a> {
    schema: u32,
    domain: &'a DomainSpec,
    resolution: usize,
    perimeter: f64,
    min_radius_of_curvature: f64,
}

#[derive(Serialize)]
struct ScalarReport<'a> {
    schema: u32,
    domain: &'a DomainSpec,
    quadrature_n: usize,
    argument: f64,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    derivative: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lazutkin: Option<f64>,
}

#[derive(Serialize)]
struct OrbitRow {
    step: usize,
    s: f64,
    phi: f64,
    x_lazutkin: f64,
    y_lazutkin: f64,
}

#[derive(Serialize)]
struct CausticSample {
    theta: f64,
    #[serde(rename = "Q", skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    l: Option<f64>,
}

#[derive(Serialize)]
struct CausticReport<'a> {
    schema: u32,
    domain: &'a DomainSpec,
    probe: CausticProbe,
    samples: Vec<CausticSample>,
    checks: Vec<Check>,
    passed: bool,
}

fn spread(values: &[f64]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    hi - lo
}

fn check(name: &str, value: f64, tolerance: f64, detail: String) -> Check {
    Check { name: name.into(), passed: value.is_finite() && value <= tolerance, value, tolerance, detail }
}

fn verify_body(report: &VerifyReport, format: OutputFormat) -> Result<String, Failure> {
    match format {
        OutputFormat::Json => Ok(json(report)),
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for c in &report.checks {
                w.serialize(c).map_err(|e| Failure::Compute(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| Failure::Compute(e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("csv is utf-8"))
        }
    }
}

fn spectrum_report(domain: &Domain, rationals: &Rationals, seed: u64) -> Result<SpectrumReport, Failure> {
    let opts = SpectrumOptions { seed, ..SpectrumOptions::default() };
    let comparison = compare_spectrum_vs_series(domain, &rationals.0, &opts)?;
    Ok(SpectrumReport { schema: SCHEMA_VERSION, domain: domain.spec().clone(), seed, comparison })
}

/// Run one command. Output depends only on the config.
pub fn run(config: &RunConfig) -> Result<Outcome, Failure> {
    let n = config.quadrature_n;
    match &config.command {
        Command::Validate(DomainArg { domain }) => {
            let d = load_domain(domain, n)?;
            let min_rho = (0..4 * n)
                .map(|j| d.rho(std::f64::consts::TAU * j as f64 / (4 * n) as f64))
                .fold(f64::INFINITY, f64::min);
            Ok(Outcome::ok(json(&ValidateReport {
                schema: SCHEMA_VERSION,
                domain: d.spec(),
                resolution: d.resolution(),
                perimeter: d.total_length(),
                min_radius_of_curvature: min_rho,
            })))
        }
        Command::Invariants(DomainArg { domain }) => {
            let d = load_domain(domain, n)?;
            let report = InvariantReport::new(d.spec(), &compute_invariants(&d, n)?);
            Ok(Outcome::ok(match config.format {
                OutputFormat::Json => json(&report),
                OutputFormat::Csv => format!("{}\n{}\n", InvariantReport::CSV_HEADER, report.csv_row()),
            }))
        }
        Command::Beta { domain, omega } => {
            let d = load_domain(&domain.domain, n)?;
            let inv = compute_invariants(&d, n)?;
            let b = beta_coefficients(&inv);
            let mut out = Outcome::ok(json(&ScalarReport {
                schema: SCHEMA_VERSION,
                domain: d.spec(),
                quadrature_n: inv.quadrature_n,
                argument: *omega,
                value: beta_series_eval(&b, *omega),
                derivative: Some(beta_series_derivative(&b, *omega)),
                lazutkin: Some(lazutkin_of_rotation(&inv, *omega)),
            }));
            if omega.abs() > OMEGA_WARN {
                out.warnings.push(format!(
                    "|omega| = {omega} exceeds {OMEGA_WARN}; the truncated series is unreliable there"
                ));
            }
            Ok(out)
        }
        Command::Alpha { domain, c } => {
            let d = load_domain(&domain.domain, n)?;
            let inv = compute_invariants(&d, n)?;
            let a = alpha_coefficients(&inv);
            let value = alpha_series_eval(&a, *c);
            if value.is_nan() {
                return Err(Failure::Input(format!("c = {c} is below -l0 = {}", -a.ell0)));
            }
            Ok(Outcome::ok(json(&ScalarReport {
                schema: SCHEMA_VERSION,
                domain: d.spec(),
                quadrature_n: inv.quadrature_n,
                argument: *c,
                value,
                derivative: None,
                lazutkin: None,
            })))
        }
        Command::Spectrum { domain, rationals } => {
            let d = load_domain(&domain.domain, n)?;
            let report = spectrum_report(&d, rationals, config.seed)?;
            Ok(Outcome::ok(match config.format {
                OutputFormat::Json => json(&report),
                OutputFormat::Csv => report.csv(),
            }))
        }
        Command::Orbit { domain, s, phi, steps } => {
            let d = load_domain(&domain.domain, n)?;
            let traj = iterate(&d, PhasePoint::new(*s, *phi), *steps)?;
            let rows: Vec<OrbitRow> = traj
                .points
                .iter()
                .enumerate()
                .map(|(step, p)| {
                    let (x, y) = lazutkin_coordinates(&d, *p);
                    OrbitRow { step, s: p.s, phi: p.phi, x_lazutkin: x, y_lazutkin: y }
                })
                .collect();
            Ok(Outcome::ok(match config.format {
                OutputFormat::Json => json(&rows),
                OutputFormat::Csv => {
                    let mut body = String::from("step,s,phi,x_lazutkin,y_lazutkin\n");
                    for r in &rows {
                        let _ = writeln!(
                            body,
                            "{},{},{},{},{}",
                            r.step,
                            fmt_f64(r.s),
                            fmt_f64(r.phi),
                            fmt_f64(r.x_lazutkin),
                            fmt_f64(r.y_lazutkin)
                        );
                    }
                    body
                }
            }))
        }
        Command::Caustic { domain, probe, check: wanted, points } => {
            let d = load_domain(&domain.domain, n)?;
            let probe = CausticProbe::parse(probe, d.spec())?;
            let mut want_q = false;
            let mut want_l = false;
            for w in wanted {
                match w.trim() {
                    "Q" => want_q = true,
                    "L" => want_l = true,
                    other => return Err(Failure::Input(format!("unknown check '{other}'; use Q or L"))),
                }
            }
            if *points == 0 {
                return Err(Failure::Input("--points must be positive".into()));
            }
            let mut samples = Vec::with_capacity(*points);
            for j in 0..*points {
                let theta = std::f64::consts::TAU * j as f64 / *points as f64;
                let q = want_q.then(|| geometric_lazutkin_q(&d, &probe, theta)).transpose()?;
                let l = want_l.then(|| lazutkin_integral_at(&d, &probe, theta)).transpose()?;
                samples.push(CausticSample { theta, q, l });
            }
            let qs: Vec<f64> = samples.iter().filter_map(|s| s.q).collect();
            let ls: Vec<f64> = samples.iter().filter_map(|s| s.l).collect();
            let mut checks = Vec::new();
            if want_q {
                checks.push(check("Q constant along the boundary", spread(&qs), 1e-7, format!("Q={}", qs[0])));
            }
            if want_l {
                checks.push(check("L constant along the boundary", spread(&ls), 1e-7, format!("L={}", ls[0])));
            }
            if want_q && want_l {
                let gap = qs.iter().zip(&ls).map(|(q, l)| (q - l).abs()).fold(0.0, f64::max);
                checks.push(check("L agrees with Q", gap, 1e-9, String::new()));
            }
            let passed = checks.iter().all(|c| c.passed);
            let report = CausticReport {
                schema: SCHEMA_VERSION,
                domain: d.spec(),
                probe,
                samples,
                checks,
                passed,
            };
            Ok(Outcome { body: json(&report), passed, warnings: Vec::new() })
        }
        Command::Verify(suite) => {
            let report = match suite {
                Suite::Circle { radius } => verify_circle(*radius, n)?,
                Suite::Ellipse { h } => verify_ellipse(*h, n)?,
            };
            let warnings = report.failures().map(|c| format!("check failed: {}", c.name)).collect();
            Ok(Outcome { body: verify_body(&report, config.format)?, passed: report.passed, warnings })
        }
        Command::Report { domain, rationals } => {
            let d = load_domain(&domain.domain, n)?;
            let report = spectrum_report(&d, rationals, config.seed)?;
            let residuals: Vec<f64> = report.comparison.rows.iter().map(|r| r.residual).collect();
            Ok(Outcome::ok(residual_sparkline(&residuals, 320, 80)))
        }
    }
}
