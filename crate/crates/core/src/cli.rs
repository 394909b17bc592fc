//! Command-line front end: configuration parsing, the built-in example
//! problem, and table/CSV emission.  Every command is a thin wrapper around
//! library calls; no numerical logic lives here.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::analysis::{convergence_study, frozen_problem, StudyConfig, StudyKind};
use crate::error::{Error, Result};
use crate::fespace::build_fespace;
use crate::mesh::{MeshConfig, MeshFamily};
use crate::stationary::{coercivity_margin, solve_stationary};
use crate::timedg::{dg_solve, ProblemSpec, TimeMesh};
use crate::weights::{make_weight, validate_weight, WeightKind};

/// All scalar/enum parameters a run can take, each optional so that the
/// resolution order "built-in default < config file < command-line flag" is
/// uniform across commands.
#[derive(Debug, Default, Clone)]
struct Settings {
    family: Option<String>,
    n: Option<usize>,
    epsilon: Option<f64>,
    sigma: Option<f64>,
    alpha: Option<f64>,
    h_grading: Option<f64>,
    k: Option<usize>,
    q: Option<usize>,
    weight: Option<String>,
    phi: Option<String>,
    t_final: Option<f64>,
    slabs: Option<usize>,
    slab_divisor: Option<usize>,
    n_values: Option<Vec<usize>>,
    study: Option<String>,
    table: Option<u8>,
    samples_per_cell: Option<usize>,
    time_samples: Option<usize>,
    n_samples: Option<usize>,
    output: Option<PathBuf>,
}

impl Settings {
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value.trim().parse().map_err(|_| {
                Error::InvalidConfig(format!("cannot parse value {value:?} for key {key:?}"))
            })
        }
        match key {
            "family" => self.family = Some(value.trim().to_string()),
            "n" | "N" => self.n = Some(num(key, value)?),
            "epsilon" => self.epsilon = Some(num(key, value)?),
            "sigma" => self.sigma = Some(num(key, value)?),
            "alpha" => self.alpha = Some(num(key, value)?),
            "h_grading" => self.h_grading = Some(num(key, value)?),
            "k" => self.k = Some(num(key, value)?),
            "q" => self.q = Some(num(key, value)?),
            "weight" => self.weight = Some(value.trim().to_string()),
            "phi" => self.phi = Some(value.trim().to_string()),
            "t_final" => self.t_final = Some(num(key, value)?),
            "slabs" => self.slabs = Some(num(key, value)?),
            "slab_divisor" => self.slab_divisor = Some(num(key, value)?),
            "n_values" => {
                let vals: Result<Vec<usize>> =
                    value.split(',').map(|v| num("n_values", v)).collect();
                self.n_values = Some(vals?);
            }
            "study" => self.study = Some(value.trim().to_string()),
            "table" => self.table = Some(num(key, value)?),
            "samples_per_cell" => self.samples_per_cell = Some(num(key, value)?),
            "time_samples" => self.time_samples = Some(num(key, value)?),
            "n_samples" => self.n_samples = Some(num(key, value)?),
            "output" => self.output = Some(PathBuf::from(value.trim())),
            other => {
                return Err(Error::InvalidConfig(format!("unknown configuration key {other:?}")))
            }
        }
        Ok(())
    }

    /// Parse a flat `key = value` file; `#`-prefixed lines and blank lines
    /// are ignored, unknown keys are rejected.
    fn load(path: &Path) -> Result<Settings> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidConfig(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut s = Settings::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "line {} of {} is not `key = value`: {line:?}",
                    lineno + 1,
                    path.display()
                ))
            })?;
            s.set(key.trim(), value)?;
        }
        Ok(s)
    }

    fn merge_overrides(&mut self, ov: &Overrides) {
        macro_rules! take {
            ($($f:ident),*) => { $( if ov.$f.is_some() { self.$f = ov.$f.clone(); } )* };
        }
        take!(
            family, n, epsilon, sigma, alpha, h_grading, k, q, weight, phi, t_final, slabs,
            slab_divisor, n_values, study, table, samples_per_cell, time_samples, n_samples,
            output
        );
    }

    // ----- resolved values with the documented defaults -----

    fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(1e-4)
    }

    fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(2f64.sqrt())
    }

    /// k defaults to q + 1 when only q is given, else 1.
    fn degree(&self) -> usize {
        self.k.or_else(|| self.q.map(|q| q + 1)).unwrap_or(1)
    }

    /// q defaults to k − 1.
    fn q(&self) -> usize {
        self.q.unwrap_or_else(|| self.degree().saturating_sub(1))
    }

    fn sigma(&self) -> f64 {
        self.sigma.unwrap_or((self.degree() + 1) as f64)
    }

    fn t_final(&self) -> f64 {
        self.t_final.unwrap_or(1.0)
    }

    fn family(&self) -> Result<MeshFamily> {
        match self.family.as_deref().unwrap_or("shishkin") {
            "shishkin" => Ok(MeshFamily::Shishkin),
            "bakhvalov-s" | "bakhvalov_s" | "bakhvalovs" => Ok(MeshFamily::BakhvalovS),
            "duran" => Ok(MeshFamily::Duran),
            other => Err(Error::InvalidConfig(format!(
                "unknown mesh family {other:?} (expected shishkin, bakhvalov-s or duran)"
            ))),
        }
    }

    fn weight(&self) -> Result<WeightKind> {
        match self.weight.as_deref().unwrap_or("energy") {
            "energy" | "e" => Ok(WeightKind::Energy),
            "balanced" | "b" => Ok(WeightKind::Balanced),
            other => Err(Error::InvalidConfig(format!(
                "unknown weight {other:?} (expected energy or balanced)"
            ))),
        }
    }

    /// History data φ on [−1, 0]: `zero` or the quadratic profile `3x^2`.
    fn history(&self) -> Result<Arc<dyn Fn(f64) -> f64 + Send + Sync>> {
        match self.phi.as_deref().unwrap_or("zero") {
            "zero" | "0" => Ok(Arc::new(|_| 0.0)),
            "quadratic" | "3x^2" | "3x2" => Ok(Arc::new(|s: f64| 3.0 * s * s)),
            other => Err(Error::InvalidConfig(format!(
                "unknown history profile {other:?} (expected zero or quadratic)"
            ))),
        }
    }

    fn problem(&self) -> Result<ProblemSpec> {
        let hist = self.history()?;
        let mut p = ProblemSpec::reference_example(self.epsilon(), move |s| hist(s));
        p.t_final = self.t_final();
        Ok(p)
    }

    fn mesh_config(&self) -> Result<MeshConfig> {
        if matches!(self.family()?, MeshFamily::Duran) {
            let h = self.h_grading.ok_or_else(|| {
                Error::InvalidConfig("graded family requires h_grading".into())
            })?;
            Ok(MeshConfig::duran(h, self.epsilon()))
        } else {
            let n = self
                .n
                .ok_or_else(|| Error::InvalidConfig("transition-point family requires N".into()))?;
            Ok(MeshConfig::stype(self.family()?, n, self.sigma(), self.alpha(), self.epsilon()))
        }
    }

    fn emit(&self, content: &str) -> Result<()> {
        match &self.output {
            Some(path) => std::fs::write(path, content).map_err(|e| {
                Error::InvalidConfig(format!("cannot write {}: {e}", path.display()))
            }),
            None => {
                print!("{content}");
                Ok(())
            }
        }
    }
}

/// Command-line overrides; each flag shadows the same config-file key.
#[derive(Debug, Args, Clone)]
struct Overrides {
    /// Mesh family: shishkin, bakhvalov-s or duran
    #[arg(long)]
    family: Option<String>,
    /// Cell count N (transition-point families)
    #[arg(long = "N", visible_alias = "n")]
    n: Option<usize>,
    /// Perturbation parameter ε
    #[arg(long)]
    epsilon: Option<f64>,
    /// Layer-width multiplier σ (default k + 1)
    #[arg(long)]
    sigma: Option<f64>,
    /// Layer decay constant α
    #[arg(long)]
    alpha: Option<f64>,
    /// Grading parameter H (graded family)
    #[arg(long = "h-grading")]
    h_grading: Option<f64>,
    /// Spatial polynomial degree k
    #[arg(long)]
    k: Option<usize>,
    /// Temporal polynomial degree q (default k − 1)
    #[arg(long)]
    q: Option<usize>,
    /// Weight: energy or balanced
    #[arg(long)]
    weight: Option<String>,
    /// History profile on [−1, 0]: zero or quadratic
    #[arg(long)]
    phi: Option<String>,
    /// Final time T
    #[arg(long = "t-final")]
    t_final: Option<f64>,
    /// Number of time slabs (default N / slab-divisor)
    #[arg(long)]
    slabs: Option<usize>,
    /// Slab divisor for studies (default 4)
    #[arg(long = "slab-divisor")]
    slab_divisor: Option<usize>,
    /// Comma-separated cell counts for studies
    #[arg(long = "n-values", value_delimiter = ',')]
    n_values: Option<Vec<usize>>,
    /// Study kind: interpolation, stationary or parabolic
    #[arg(long)]
    study: Option<String>,
    /// Preset reproducing one of the published benchmark tables (1, 2 or 3)
    #[arg(long)]
    table: Option<u8>,
    /// Extra uniform sample points per cell in field dumps
    #[arg(long = "samples-per-cell")]
    samples_per_cell: Option<usize>,
    /// Number of uniform output times in (0, T]
    #[arg(long = "time-samples")]
    time_samples: Option<usize>,
    /// Sample count for weight validation
    #[arg(long = "n-samples")]
    n_samples: Option<usize>,
    /// Output file (default stdout)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(
    name = "shiftfem",
    about = "Weighted FEM / dG(q) solver for reaction-diffusion problems with a unit shift",
    version
)]
struct Cli {
    /// Flat `key = value` configuration file; flags override its entries
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit the node coordinates of a layer-adapted mesh as CSV (i,x_i)
    Mesh(Overrides),
    /// Check the weight conditions (lower bound, derivative bound, integral)
    ValidateWeight(Overrides),
    /// Solve the stationary problem; field CSV to output, diagnostics to stderr
    SolveStationary(Overrides),
    /// Run the dG(q) scheme; solution CSV (t,x,u) to output
    Solve(Overrides),
    /// Run a convergence study; table to stdout, CSV to --output if given
    Study(Overrides),
    /// Solve the built-in example and emit a (t,x,u) CSV for plotting
    Example(Overrides),
}

/// Entry point; returns the process exit code (0 success, 1 configuration
/// error, 2 numerical failure).
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };

    let overrides = match &cli.command {
        Command::Mesh(o)
        | Command::ValidateWeight(o)
        | Command::SolveStationary(o)
        | Command::Solve(o)
        | Command::Study(o)
        | Command::Example(o) => o.clone(),
    };

    let settings = match resolve_settings(cli.config.as_deref(), &overrides) {
        Ok(s) => s,
        Err(e) => return report(e),
    };

    let result = match &cli.command {
        Command::Mesh(_) => cmd_mesh(&settings),
        Command::ValidateWeight(_) => cmd_validate_weight(&settings),
        Command::SolveStationary(_) => cmd_solve_stationary(&settings),
        Command::Solve(_) => cmd_solve(&settings),
        Command::Study(_) => cmd_study(&settings),
        Command::Example(_) => cmd_example(&settings),
    };
    match result {
        Ok(()) => 0,
        Err(e) => report(e),
    }
}

fn report(e: Error) -> i32 {
    eprintln!("error: {e}");
    match e {
        Error::InvalidConfig(_) => 1,
        _ => 2,
    }
}

fn resolve_settings(config: Option<&Path>, overrides: &Overrides) -> Result<Settings> {
    let mut s = match config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    s.merge_overrides(overrides);
    Ok(s)
}

fn cmd_mesh(s: &Settings) -> Result<()> {
    let mesh = s.mesh_config()?.build()?;
    s.emit(&mesh.to_csv())
}

fn cmd_validate_weight(s: &Settings) -> Result<()> {
    let w = make_weight(s.weight()?, s.epsilon(), s.alpha());
    let report = validate_weight(&w, s.n_samples.unwrap_or(1000));
    let text = format!(
        "min_beta = {:.6e}\nmax_derivative_ratio = {:.6e}\nintegral = {:.6e}\npass = {}\n",
        report.min_value, report.max_derivative_ratio, report.integral, report.pass
    );
    s.emit(&text)
}

fn cmd_solve_stationary(s: &Settings) -> Result<()> {
    let problem = s.problem()?;
    let space = build_fespace(s.mesh_config()?.build()?, s.degree())?;
    let weight = make_weight(s.weight()?, s.epsilon(), s.alpha());
    let coeffs = frozen_problem(&problem, 0.0);
    let sol = solve_stationary(&space, &coeffs, &weight)?;
    let margin = coercivity_margin(&space, &coeffs, &weight)?;
    eprintln!("# coercivity_margin = {margin:.6e}");
    eprintln!("# relative_residual = {:.6e}", sol.relative_residual);
    for w in &sol.warnings {
        eprintln!("# warning: {w}");
    }
    s.emit(&sol.field.to_csv(s.samples_per_cell.unwrap_or(2)))
}

fn solution_csv(s: &Settings, problem: &ProblemSpec) -> Result<String> {
    let space = build_fespace(s.mesh_config()?.build()?, s.degree())?;
    let weight = make_weight(s.weight()?, s.epsilon(), s.alpha());
    let n_slabs = match s.slabs {
        Some(m) => m,
        None => (space.mesh.n_cells() / s.slab_divisor.unwrap_or(4)).max(1),
    };
    let tmesh = TimeMesh::uniform(problem.t_final, n_slabs)?;
    let sol = dg_solve(problem, &space, &weight, &tmesh, s.q())?;

    // output times: uniform when requested, slab endpoints otherwise
    let times: Vec<f64> = match s.time_samples {
        Some(ts) => (0..=ts.max(1))
            .map(|j| problem.t_final * j as f64 / ts.max(1) as f64)
            .collect(),
        None => {
            let mut v = vec![0.0];
            v.extend((0..n_slabs).map(|m| tmesh.slab(m).1));
            v
        }
    };

    let extra = s.samples_per_cell.unwrap_or(2);
    let mut out = String::from("t,x,u\n");
    for &t in &times {
        let field = sol.sample_at_time(t)?;
        let mesh = &field.space.mesh;
        for c in 0..mesh.n_cells() {
            let (xl, xr) = mesh.cell(c);
            let samples = field.space.degree + extra;
            for i in 0..samples {
                let x = xl + (xr - xl) * i as f64 / samples as f64;
                out.push_str(&format!("{t:.10e},{x:.10e},{:.10e}\n", field.value(x)));
            }
        }
        out.push_str(&format!("{t:.10e},{:.10e},{:.10e}\n", 2.0, field.value(2.0)));
    }
    Ok(out)
}

fn cmd_solve(s: &Settings) -> Result<()> {
    let problem = s.problem()?;
    let csv = solution_csv(s, &problem)?;
    s.emit(&csv)
}

/// The built-in example with plotting-friendly defaults; only explicitly set
/// keys are overridden.
fn cmd_example(s: &Settings) -> Result<()> {
    let mut s = s.clone();
    s.family.get_or_insert_with(|| "shishkin".into());
    s.n.get_or_insert(128);
    s.k.get_or_insert(2);
    s.epsilon.get_or_insert(0.04);
    s.slabs.get_or_insert(32);
    s.time_samples.get_or_insert(16);
    let problem = s.problem()?;
    let csv = solution_csv(&s, &problem)?;
    s.emit(&csv)
}

fn cmd_study(s: &Settings) -> Result<()> {
    let mut s = s.clone();
    // Published-table presets: Table 2 uses the quadratic history, Table 3
    // the small-ε robustness sweep at N = 256.
    match s.table {
        None => {}
        Some(1) => {
            s.phi.get_or_insert_with(|| "zero".into());
        }
        Some(2) => {
            s.phi.get_or_insert_with(|| "quadratic".into());
        }
        Some(3) => {
            s.phi.get_or_insert_with(|| "zero".into());
            s.n_values.get_or_insert_with(|| vec![256]);
            s.k.get_or_insert(2);
        }
        Some(other) => {
            return Err(Error::InvalidConfig(format!("unknown table preset {other}")));
        }
    }
    let kind = match s.study.as_deref().unwrap_or("parabolic") {
        "interpolation" => StudyKind::Interpolation,
        "stationary" => StudyKind::Stationary,
        "parabolic" => StudyKind::Parabolic,
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown study kind {other:?} (expected interpolation, stationary or parabolic)"
            )))
        }
    };
    let problem = s.problem()?;
    let mut cfg = StudyConfig::new(
        kind,
        s.family()?,
        s.n_values.clone().unwrap_or_else(|| vec![64, 128, 256, 512, 1024]),
        s.degree(),
    );
    cfg.q = s.q();
    cfg.sigma = s.sigma();
    cfg.weight = s.weight()?;
    cfg.slab_divisor = s.slab_divisor.unwrap_or(4);
    let report = convergence_study(&problem, &cfg)?;
    print!("{}", report.to_table());
    if s.output.is_some() {
        s.emit(&report.to_csv())?;
    }
    Ok(())
}
