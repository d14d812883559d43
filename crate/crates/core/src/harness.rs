//! Command-line front end: argument types, run configuration and the
//! `sweep`, `verify`, `cp1`, `moments` and `gram` commands.
//!
//! Exit status is 0 when every check passes, 1 when a check fails and 2 on
//! invalid input or a numerical error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cutoff::CutoffProfile;
use crate::density::{cp1_density, sweep_reports, DEFAULT_V_DEGREES};
use crate::error::{Error, Result};
use crate::geometry::{ModelGeometry, PointDisk};
use crate::gram::{
    assemble_truncated_gram, inverse00_oracle, orthonormalize_i00, schur_i00, BorderedGram,
    ErrorBudget,
};
use crate::moments::{
    lambda0_closed_form, lambda_inv_sq, peak_norm_bound_check, truncation_radius,
};
use crate::quadrature::QuadratureConfig;
use crate::report::{write_sweep, OutputFormat, SweepOutput};
use crate::verify::{self, sample_disk, VerifyConfig, CP1_TOL, ROUTE_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    CheckFailed = 1,
    Error = 2,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    fn from_pass(pass: bool) -> Self {
        if pass {
            Self::Pass
        } else {
            Self::CheckFailed
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EtaArg {
    C1,
    Smooth,
}

impl From<EtaArg> for CutoffProfile {
    fn from(e: EtaArg) -> Self {
        match e {
            EtaArg::C1 => CutoffProfile::C1,
            EtaArg::Smooth => CutoffProfile::Smooth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "bergman-density",
    version,
    about = "Bergman density expansion lab for constant-curvature model surfaces"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Scalar curvature of the model metric
    #[arg(long, global = true, default_value_t = -2.0, allow_negative_numbers = true)]
    pub rho: f64,
    /// Powers: `a..b` (log-spaced, see --points), a comma list, or one value
    #[arg(long, global = true, default_value = "100..10000")]
    pub m_range: String,
    /// Number of log-spaced powers in an `a..b` range
    #[arg(long, global = true, default_value_t = 5)]
    pub points: usize,
    #[arg(long, global = true, default_value_t = 1e-12, allow_negative_numbers = true)]
    pub rel_tol: f64,
    #[arg(long, global = true, default_value_t = 60)]
    pub max_subdivisions: usize,
    /// Constant C of the Gram budget C exp(-(log m)^2 / 8)
    #[arg(long, global = true, default_value_t = 1.0, allow_negative_numbers = true)]
    pub budget_c: f64,
    #[arg(long, global = true, value_enum, default_value_t = EtaArg::C1)]
    pub eta: EtaArg,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Write the report here instead of standard output
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Density against m + rho/2 over the powers in --m-range
    Sweep,
    /// Run every property suite
    Verify,
    /// Sphere-model density at seeded sample points
    Cp1 {
        #[arg(long, default_value_t = 3)]
        m: u64,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Radial moments lambda_p^-2 and peak-norm ratios
    Moments {
        #[arg(long, default_value_t = 3)]
        p_max: u32,
    },
    /// Truncated Gram matrix and the three I_00 routes
    Gram {
        #[arg(long, default_value_t = 1000)]
        m: u64,
        /// Read a Gram file instead of assembling one
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

/// Validated settings shared by all commands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub rho: f64,
    pub m_list: Vec<u64>,
    pub quadrature: QuadratureConfig,
    pub budget: ErrorBudget,
    pub profile: CutoffProfile,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl RunConfig {
    pub fn from_args(a: &CommonArgs) -> Result<Self> {
        if !a.rho.is_finite() {
            return Err(Error::InvalidInput(format!(
                "rho must be finite, got {}",
                a.rho
            )));
        }
        Ok(Self {
            rho: a.rho,
            m_list: parse_m_range(&a.m_range, a.points)?,
            quadrature: QuadratureConfig::new(a.rel_tol, a.max_subdivisions)?,
            budget: ErrorBudget::new(a.budget_c)?,
            profile: a.eta.into(),
            format: a.format.into(),
            out: a.out.clone(),
            seed: a.seed,
        })
    }

    pub fn geometry(&self) -> Result<ModelGeometry> {
        ModelGeometry::new(self.rho)
    }

    fn verify_config(&self) -> VerifyConfig {
        VerifyConfig {
            rho: self.rho,
            m_list: self.m_list.clone(),
            quadrature: self.quadrature,
            profile: self.profile,
            seed: self.seed,
        }
    }
}

/// Powers from `a..b` (log-spaced, rounded, deduplicated), `m1,m2,...` or `m`.
/// The result is sorted ascending and nonempty.
pub fn parse_m_range(text: &str, points: usize) -> Result<Vec<u64>> {
    let text = text.trim();
    let parse = |s: &str| -> Result<u64> {
        s.trim()
            .parse::<u64>()
            .map_err(|_| Error::InvalidInput(format!("bad power {s:?} in --m-range")))
    };
    let mut list = if text.is_empty() {
        Vec::new()
    } else if let Some((a, b)) = text.split_once("..") {
        let (a, b) = (parse(a)?, parse(b)?);
        if a == 0 {
            return Err(Error::InvalidInput("powers must be positive".into()));
        }
        log_spaced(a, b, points)
    } else {
        text.split(',').map(parse).collect::<Result<Vec<_>>>()?
    };
    list.sort_unstable();
    list.dedup();
    if list.is_empty() {
        return Err(Error::InvalidInput("empty sweep".into()));
    }
    Ok(list)
}

fn log_spaced(a: u64, b: u64, points: usize) -> Vec<u64> {
    if b < a || points == 0 {
        return Vec::new();
    }
    if points == 1 || a == b {
        return vec![a];
    }
    let (la, lb) = ((a as f64).ln(), (b as f64).ln());
    (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            ((la + t * (lb - la)).exp().round() as u64).clamp(a, b)
        })
        .collect()
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            Error::InvalidInput(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn io_err(e: io::Error) -> Error {
    Error::InvalidInput(format!("write failed: {e}"))
}

/// Summary lines go to standard output when the report has its own file,
/// and to standard error when the report itself is on standard output.
fn summary_sink(cfg: &RunConfig) -> Box<dyn Write> {
    if cfg.out.is_some() {
        Box::new(io::stdout())
    } else {
        Box::new(io::stderr())
    }
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<ExitStatus> {
    let geom = cfg.geometry()?;
    let results = sweep_reports(
        &geom,
        &cfg.m_list,
        cfg.budget,
        &DEFAULT_V_DEGREES,
        &cfg.quadrature,
    );
    let output = SweepOutput::from_results(cfg.rho, &cfg.m_list, results);
    let mut out = open_output(cfg.out.as_deref())?;
    write_sweep(&mut out, &output, cfg.format)?;
    out.flush().map_err(io_err)?;
    drop(out);

    if let Some(f) = &output.failure {
        eprintln!("error: sweep stopped at m = {}: {}", f.m, f.message);
        return Ok(ExitStatus::Error);
    }
    let r = &output.result;
    let mut sink = summary_sink(cfg);
    writeln!(
        sink,
        "fitted_C = {:.6e}; envelope exp(-(log m)^2/8): {}",
        r.fitted_c,
        if r.within_envelope { "PASS" } else { "FAIL" }
    )
    .map_err(io_err)?;
    Ok(ExitStatus::from_pass(r.within_envelope))
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<ExitStatus> {
    let outcomes = verify::run_all(&cfg.verify_config());
    let mut out = open_output(cfg.out.as_deref())?;
    match cfg.format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, &outcomes)
                .map_err(|e| Error::InvalidInput(e.to_string()))?;
            writeln!(out).map_err(io_err)?;
        }
        OutputFormat::Csv => {
            for s in &outcomes {
                let status = match (s.passed, s.flagged) {
                    (true, false) => "PASS",
                    (true, true) => "PASS (flagged)",
                    (false, _) => "FAIL",
                };
                writeln!(out, "{status} {}: {}", s.name, s.detail).map_err(io_err)?;
            }
        }
    }
    let failing: Vec<_> = outcomes
        .iter()
        .filter(|s| !s.passed)
        .map(|s| s.name)
        .collect();
    if !failing.is_empty() {
        writeln!(out, "failing suites: {}", failing.join(", ")).map_err(io_err)?;
    }
    out.flush().map_err(io_err)?;
    Ok(ExitStatus::from_pass(failing.is_empty()))
}

#[derive(Debug, Serialize)]
struct Cp1Row {
    re: f64,
    im: f64,
    density: f64,
    deviation: f64,
}

/// Sample points for `cp1`: the origin, then seeded points with `|z| <= 3`.
fn cp1_points(samples: usize, seed: u64) -> Vec<PointDisk> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = vec![PointDisk::new(0.0, 0.0)];
    pts.extend(sample_disk(&mut rng, samples.saturating_sub(1), 3.0));
    pts.truncate(samples);
    pts
}

pub fn cmd_cp1(cfg: &RunConfig, m: u64, samples: usize) -> Result<ExitStatus> {
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be at least 1".into()));
    }
    let rows = cp1_points(samples, cfg.seed)
        .into_iter()
        .map(|z| {
            let d = cp1_density(m, z)?;
            Ok(Cp1Row {
                re: z.re(),
                im: z.im(),
                density: d.summed,
                deviation: (d.summed - d.analytic) / d.analytic,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_dev = rows.iter().map(|r| r.deviation.abs()).fold(0.0, f64::max);

    let mut out = open_output(cfg.out.as_deref())?;
    match cfg.format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, &rows)
                .map_err(|e| Error::InvalidInput(e.to_string()))?;
            writeln!(out).map_err(io_err)?;
        }
        OutputFormat::Csv => {
            writeln!(out, "re,im,density,deviation").map_err(io_err)?;
            for r in &rows {
                writeln!(
                    out,
                    "{:e},{:e},{:e},{:e}",
                    r.re, r.im, r.density, r.deviation
                )
                .map_err(io_err)?;
            }
        }
    }
    out.flush().map_err(io_err)?;
    drop(out);
    let pass = max_dev <= CP1_TOL;
    writeln!(
        summary_sink(cfg),
        "m = {m}: max relative deviation from m + 1 = {max_dev:.3e}"
    )
    .map_err(io_err)?;
    Ok(ExitStatus::from_pass(pass))
}

#[derive(Debug, Serialize)]
struct MomentRow {
    m: u64,
    p: u32,
    value: f64,
    abs_err: f64,
    closed_form: Option<f64>,
    /// `lambda_p^2 / m^(1+p)`
    ratio: f64,
}

pub fn cmd_moments(cfg: &RunConfig, p_max: u32) -> Result<ExitStatus> {
    if p_max > 3 {
        return Err(Error::InvalidInput(format!(
            "--p-max must be at most 3, got {p_max}"
        )));
    }
    let geom = cfg.geometry()?;
    let mut rows = Vec::new();
    let mut pass = true;
    for &m in &cfg.m_list {
        for p in 0..=p_max {
            let q = lambda_inv_sq(&geom, m, p, truncation_radius(m), &cfg.quadrature)?;
            let closed_form = if p == 0 {
                let c = lambda0_closed_form(&geom, m)?;
                pass &= ((q.value - c) / c).abs() <= 10.0 * cfg.quadrature.rel_tol;
                Some(c)
            } else {
                None
            };
            let ratio = (-(q.value.ln() + (1.0 + p as f64) * (m as f64).ln())).exp();
            rows.push(MomentRow {
                m,
                p,
                value: q.value,
                abs_err: q.abs_err,
                closed_form,
                ratio,
            });
        }
    }

    let mut out = open_output(cfg.out.as_deref())?;
    match cfg.format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, &rows)
                .map_err(|e| Error::InvalidInput(e.to_string()))?;
            writeln!(out).map_err(io_err)?;
        }
        OutputFormat::Csv => {
            writeln!(out, "m,p,value,abs_err,closed_form,ratio").map_err(io_err)?;
            for r in &rows {
                let closed = r.closed_form.map(|c| format!("{c:e}")).unwrap_or_default();
                writeln!(
                    out,
                    "{},{},{:e},{:e},{closed},{:e}",
                    r.m, r.p, r.value, r.abs_err, r.ratio
                )
                .map_err(io_err)?;
            }
        }
    }
    out.flush().map_err(io_err)?;
    drop(out);

    let mut sink = summary_sink(cfg);
    for p in 0..=p_max {
        let check = peak_norm_bound_check(&geom, &cfg.m_list, p, &cfg.quadrature)?;
        writeln!(
            sink,
            "p = {p}: C = {:.6e}, top-decade spread {:.3e}: {}",
            check.max_ratio,
            check.top_decade_spread,
            if check.pass { "PASS" } else { "FAIL" }
        )
        .map_err(io_err)?;
        pass &= check.pass;
    }
    Ok(ExitStatus::from_pass(pass))
}

pub fn cmd_gram(cfg: &RunConfig, m: u64, input: Option<&Path>) -> Result<ExitStatus> {
    let gram = match input {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
            BorderedGram::from_json(&text)?
        }
        None => assemble_truncated_gram(
            &cfg.geometry()?,
            m,
            &DEFAULT_V_DEGREES,
            cfg.budget,
            &cfg.quadrature,
        )?,
    };
    if let Some(path) = &cfg.out {
        std::fs::write(path, gram.to_json()? + "\n")
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?;
    }
    let schur = schur_i00(&gram)?;
    let oracle = inverse00_oracle(&gram)?;
    let ortho = orthonormalize_i00(&gram)?;
    let gap = verify::route_disagreement(&gram)?;
    let mut sink = io::stdout().lock();
    writeln!(sink, "dim = {}", gram.dim()).map_err(io_err)?;
    writeln!(
        sink,
        "schur I00 = {:.17e} (interval [{:.17e}, {:.17e}])",
        schur.value, schur.interval.0, schur.interval.1
    )
    .map_err(io_err)?;
    writeln!(sink, "oracle I00 = {oracle:.17e}").map_err(io_err)?;
    writeln!(sink, "orthonormalize I00 = {ortho:.17e}").map_err(io_err)?;
    writeln!(sink, "max relative gap = {gap:.3e}").map_err(io_err)?;
    Ok(ExitStatus::from_pass(gap <= ROUTE_TOL))
}

/// Run a parsed command line. Errors are reported on standard error.
pub fn run(cli: Cli) -> ExitStatus {
    let result = RunConfig::from_args(&cli.common).and_then(|cfg| match cli.command {
        Command::Sweep => cmd_sweep(&cfg),
        Command::Verify => cmd_verify(&cfg),
        Command::Cp1 { m, samples } => cmd_cp1(&cfg, m, samples),
        Command::Moments { p_max } => cmd_moments(&cfg, p_max),
        Command::Gram { m, input } => cmd_gram(&cfg, m, input.as_deref()),
    });
    match result {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e}");
            ExitStatus::Error
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_spaced_range() {
        assert_eq!(
            parse_m_range("100..10000", 5).unwrap(),
            vec![100, 316, 1000, 3162, 10000]
        );
        assert_eq!(parse_m_range("10..10", 4).unwrap(), vec![10]);
        // rounding collisions collapse
        assert_eq!(parse_m_range("1..3", 10).unwrap(), vec![1, 2, 3]);
    }

    #[test]
    fn explicit_lists_are_sorted() {
        assert_eq!(parse_m_range("500, 100,500", 0).unwrap(), vec![100, 500]);
        assert_eq!(parse_m_range("42", 0).unwrap(), vec![42]);
    }

    #[test]
    fn empty_sweeps() {
        for (text, points) in [("", 5), ("  ", 5), ("100..10", 5), ("100..1000", 0)] {
            let err = parse_m_range(text, points).unwrap_err();
            assert!(err.to_string().contains("empty sweep"), "{text:?}: {err}");
        }
        assert!(parse_m_range("a..b", 5).is_err());
        assert!(parse_m_range("0..10", 5).is_err());
    }

    #[test]
    fn config_validation() {
        let cli = Cli::try_parse_from(["bergman-density", "sweep", "--rel-tol", "1e-3"]).unwrap();
        assert!(RunConfig::from_args(&cli.common).is_err());
        let cli = Cli::try_parse_from([
            "bergman-density",
            "--rho",
            "-1",
            "sweep",
            "--budget-c",
            "-1",
        ])
        .unwrap();
        assert!(RunConfig::from_args(&cli.common).is_err());
        let cli =
            Cli::try_parse_from(["bergman-density", "sweep", "--rho", "-1", "--eta", "smooth"])
                .unwrap();
        let cfg = RunConfig::from_args(&cli.common).unwrap();
        assert_eq!(cfg.rho, -1.0);
        assert_eq!(cfg.profile, CutoffProfile::Smooth);
        assert!(Cli::try_parse_from(["bergman-density", "sweep", "--eta", "c2"]).is_err());
    }

    #[test]
    fn cp1_points_start_at_origin() {
        let pts = cp1_points(20, 3);
        assert_eq!(pts.len(), 20);
        assert_eq!(pts[0], PointDisk::new(0.0, 0.0));
        assert_eq!(pts, cp1_points(20, 3));
        assert_eq!(cp1_points(1, 3).len(), 1);
    }
}
