//! `torsionlab`: runs one experiment, writes `<experiment>_<hash>.json` and
//! `.csv` into the output directory and exits with 0 when every claim holds,
//! 2 when some claim fails and 1 on usage or runtime errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use torsionlab::config::RunConfig;
use torsionlab::exact::Family;
use torsionlab::experiments::{
    annulus_experiment, endpoint_exclusion_check, fail_point_experiment, narrow_side_comparison, narrow_sweep,
    random_triangle_suite, solve_experiment, triangle_family, validate_oracles, w2_bound_experiment, write_report,
    NarrowResolution, Report, WrittenReport,
};
use torsionlab::{DomainSpec, Point};

type AnyResult<T> = std::result::Result<T, Box<dyn std::error::Error>>;

#[derive(Parser, Debug)]
#[command(name = "torsionlab", version, about = "Fail points of the torsion problem -Δu = 1, u = 0 on the boundary")]
struct Cli {
    /// Worker threads for parallel solves (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Print each claim to stderr; repeat for the report JSON as well.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// JSON run configuration; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Target mesh size.
    #[arg(long)]
    h: Option<f64>,
    /// Relative residual for conjugate gradients.
    #[arg(long)]
    rel_tol: Option<f64>,
}

#[derive(Args, Debug)]
struct Narrow {
    /// JSON file with a narrow domain spec.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Fibres across the widest section per unit of `eps`.
    #[arg(long)]
    h_div: Option<f64>,
    /// Mesh columns per unit length.
    #[arg(long)]
    nx_per_unit: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve on one domain and write the solution and boundary profile.
    Solve {
        /// JSON file with a domain spec.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Fail point, per-side maxima and nodal paths of one domain.
    Failpoint {
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Unit direction of the traced derivative, as `x,y`.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        direction: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
    /// Thin-domain expansion and fail-point convergence over several eps.
    NarrowSweep {
        #[command(flatten)]
        narrow: Narrow,
        /// Thickness parameters, comma separated and decreasing (at least three).
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
    /// Which side of a thin domain carries the larger gradient.
    NarrowCompare {
        #[command(flatten)]
        narrow: Narrow,
        /// Thickness parameter.
        #[arg(long)]
        eps: Option<f64>,
        /// Swap and negate the two boundary graphs.
        #[arg(long)]
        mirror: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Ellipse endpoint gradient against the flat-side gradient.
    Endpoints {
        /// Minor semi-axes, comma separated and decreasing (at least three).
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
    /// Stretched or tilted equilateral triangles.
    TriangleFamily {
        #[arg(long)]
        family: Option<Family>,
        #[arg(long = "t", value_delimiter = ',')]
        t_list: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
    /// Mixed derivative of w2 at the origin and the polynomial barrier.
    W2Bound {
        #[arg(long, value_delimiter = ',')]
        r_fit: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
    /// Eccentric annulus with a concentric control.
    Annulus {
        #[arg(long)]
        rho1: Option<f64>,
        #[arg(long)]
        rho2: Option<f64>,
        #[arg(long)]
        offset: Option<f64>,
        #[arg(long)]
        n_angles: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Seeded random triangles plus an equilateral and an isosceles one.
    Suite {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Self-consistency of the closed forms; no finite elements.
    Validate {
        #[command(flatten)]
        common: Common,
    },
}

fn read_spec(path: &Option<PathBuf>) -> AnyResult<Option<DomainSpec>> {
    match path {
        None => Ok(None),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?;
            let spec: DomainSpec =
                serde_json::from_str(&text).map_err(|e| format!("malformed domain spec {}: {e}", p.display()))?;
            Ok(Some(spec))
        }
    }
}

fn narrow_resolution(n: &Narrow, base: Option<NarrowResolution>) -> Option<NarrowResolution> {
    if n.h_div.is_none() && n.nx_per_unit.is_none() {
        return base;
    }
    let mut r = base.unwrap_or_default();
    if let Some(v) = n.h_div {
        r.h_div = v;
    }
    if let Some(v) = n.nx_per_unit {
        r.nx_per_unit = v;
    }
    Some(r)
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Solve { .. } => "solve",
            Self::Failpoint { .. } => "failpoint",
            Self::NarrowSweep { .. } => "narrow-sweep",
            Self::NarrowCompare { .. } => "narrow-compare",
            Self::Endpoints { .. } => "endpoints",
            Self::TriangleFamily { .. } => "triangle-family",
            Self::W2Bound { .. } => "w2-bound",
            Self::Annulus { .. } => "annulus",
            Self::Suite { .. } => "suite",
            Self::Validate { .. } => "validate",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Self::Solve { common, .. }
            | Self::Failpoint { common, .. }
            | Self::NarrowSweep { common, .. }
            | Self::NarrowCompare { common, .. }
            | Self::Endpoints { common, .. }
            | Self::TriangleFamily { common, .. }
            | Self::W2Bound { common, .. }
            | Self::Annulus { common, .. }
            | Self::Suite { common, .. }
            | Self::Validate { common } => common,
        }
    }

    /// The configuration file, if any, overridden by the flags.
    fn run_config(&self) -> AnyResult<RunConfig> {
        let common = self.common();
        let mut cfg = match &common.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?;
                RunConfig::from_json(&text).map_err(|e| format!("malformed config {}: {e}", p.display()))?
            }
            None => RunConfig::new(self.name()),
        };
        if !cfg.experiment.is_empty() && cfg.experiment != self.name() {
            return Err(format!("config is for '{}', not '{}'", cfg.experiment, self.name()).into());
        }
        let mut flags = RunConfig::new(self.name());
        flags.h = common.h;
        flags.rel_tol = common.rel_tol;
        flags.output_dir = common.output.clone();
        match self {
            Self::Solve { spec, .. } => flags.domain = read_spec(spec)?,
            Self::Failpoint { spec, direction, .. } => {
                flags.domain = read_spec(spec)?;
                flags.direction = direction.as_ref().map(|d| Point::new(d[0], d[1]));
            }
            Self::NarrowSweep { narrow, eps, .. } => {
                flags.domain = read_spec(&narrow.spec)?;
                flags.eps_list = eps.clone();
                flags.resolution = narrow_resolution(narrow, cfg.resolution.clone());
            }
            Self::NarrowCompare { narrow, eps, .. } => {
                flags.domain = read_spec(&narrow.spec)?;
                flags.eps = *eps;
                flags.resolution = narrow_resolution(narrow, cfg.resolution.clone());
            }
            Self::Endpoints { eps, .. } => flags.eps_list = eps.clone(),
            Self::TriangleFamily { family, t_list, .. } => {
                flags.family = *family;
                flags.t_list = t_list.clone();
            }
            Self::W2Bound { r_fit, .. } => flags.r_fits = r_fit.clone(),
            Self::Annulus { rho1, rho2, offset, n_angles, .. } => {
                flags.rho1 = *rho1;
                flags.rho2 = *rho2;
                flags.offset = *offset;
                flags.n_angles = *n_angles;
            }
            Self::Suite { n, seed, .. } => {
                flags.n = *n;
                flags.seed = *seed;
            }
            Self::Validate { .. } => {}
        }
        cfg = cfg.merged(&flags);
        Ok(cfg)
    }
}

struct Outcome {
    written: WrittenReport,
    claims: Vec<(String, bool)>,
    json: String,
}

impl Outcome {
    fn failed(&self) -> Vec<&str> {
        self.claims.iter().filter(|(_, ok)| !ok).map(|(k, _)| k.as_str()).collect()
    }
}

fn emit<C: Serialize, R: Report>(dir: &Path, config: &C, report: &R, extra: &[(&str, String)]) -> AnyResult<Outcome> {
    let written = write_report(dir, config, report, extra)
        .map_err(|e| format!("cannot write report into {}: {e}", dir.display()))?;
    let claims = report.claims().iter().map(|(k, ok)| (k.clone(), *ok)).collect();
    let json = serde_json::to_string_pretty(report)?;
    Ok(Outcome { written, claims, json })
}

fn execute(command: &Command) -> AnyResult<(Outcome, RunConfig)> {
    let cfg = command.run_config()?;
    let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    let outcome = match command {
        Command::Solve { .. } => {
            let c = cfg.solve_config()?;
            let r = solve_experiment(&c)?;
            emit(&dir, &c, &r, &[("solution", r.solution_csv().to_string())])?
        }
        Command::Failpoint { .. } => {
            let c = cfg.fail_point_config()?;
            let r = fail_point_experiment(&c)?;
            emit(&dir, &c, &r, &[("profile", r.profile_csv().to_string()), ("paths", r.paths_csv().to_string())])?
        }
        Command::NarrowSweep { .. } => {
            let c = cfg.narrow_sweep_config()?;
            emit(&dir, &c, &narrow_sweep(&c)?, &[])?
        }
        Command::NarrowCompare { mirror, .. } => {
            let mut c = cfg.narrow_compare_config()?;
            if *mirror {
                c.spec = c.spec.mirrored();
            }
            emit(&dir, &c, &narrow_side_comparison(&c)?, &[])?
        }
        Command::Endpoints { .. } => {
            let c = cfg.endpoint_config()?;
            emit(&dir, &c, &endpoint_exclusion_check(&c)?, &[])?
        }
        Command::TriangleFamily { .. } => {
            let c = cfg.family_config()?;
            emit(&dir, &c, &triangle_family(&c)?, &[])?
        }
        Command::W2Bound { .. } => {
            let c = cfg.w2_config()?;
            emit(&dir, &c, &w2_bound_experiment(&c)?, &[])?
        }
        Command::Annulus { .. } => {
            let c = cfg.annulus_config()?;
            emit(&dir, &c, &annulus_experiment(&c)?, &[])?
        }
        Command::Suite { .. } => {
            let c = cfg.suite_config()?;
            emit(&dir, &c, &random_triangle_suite(&c)?, &[])?
        }
        Command::Validate { .. } => {
            let r = validate_oracles();
            // The report carries a wall-clock time, so only the (empty)
            // configuration is hashed.
            emit(&dir, &serde_json::json!({}), &r, &[])?
        }
    };
    Ok((outcome, cfg))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: cannot set up {jobs} worker threads: {e}");
            return ExitCode::from(1);
        }
    }
    match execute(&cli.command) {
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Ok((outcome, cfg)) => {
            let verbosity = cli.verbose.max(cfg.verbosity.unwrap_or(0));
            println!("{}", outcome.written.json.display());
            println!("{}", outcome.written.csv.display());
            for p in &outcome.written.extra {
                println!("{}", p.display());
            }
            if verbosity >= 1 {
                for (name, ok) in &outcome.claims {
                    eprintln!("{} {name}", if *ok { "PASS" } else { "FAIL" });
                }
            }
            if verbosity >= 2 {
                eprintln!("{}", outcome.json);
            }
            let failed = outcome.failed();
            if failed.is_empty() {
                ExitCode::SUCCESS
            } else {
                eprintln!("failed claims: {}", failed.join(", "));
                ExitCode::from(2)
            }
        }
    }
}
