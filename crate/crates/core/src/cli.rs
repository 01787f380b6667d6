//! Command-line dispatch for the verification pipelines.
//!
//! | flag | default |
//! |---|---|
//! | `--tol-quad` | 1e-12 |
//! | `--tol-root` | 1e-12 |
//! | `--tol-rank` | 1e-8 |
//! | `--period-tol` | 1e-8 |
//! | `--cluster-floor` | 5e-3 |
//! | `--h` | 0.02 |
//! | `--k` | 8 |
//! | `--samples` | 20 |
//! | `--eigen-points` | 10 |
//! | `--seed` | 1 |
//! | `--stencil-h` | 1e-3 |
//! | `--from` / `--to` / `--steps` | 0.3 / 0.9 / 40 |
//! | `--sectors` | v1,v2 |

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::forms::{hat_residue_table, RESIDUE_EPS};
use crate::immersion::verify_omega;
use crate::integrals::integral_quartet;
use crate::periods::{period_table, relation_periods};
use crate::report::{emit, to_json, Cell, Check, CsvTable, ReportEnvelope};
use crate::spectra::{
    index_table, sector_table, spectrum, sweep, Discretization, SectorSpec, SpectrumOptions,
    CLUSTER_TOL_FLOOR, DEFAULT_H, DEFAULT_K, MONOTONE_SLACK,
};
use crate::system::{
    appendix_reduce, assemble_system, expected_reduced, kernel_equivalence, lemma_alpha,
    max_rel_deviation, nullspace, omega_pair_at, solve_critical_thetas, DEFAULT_RANK_TOL,
    DEFAULT_ROOT_TOL,
};
use crate::theta::ThetaParam;

pub const DEFAULT_QUAD_TOL: f64 = 1e-12;
pub const DEFAULT_PERIOD_TOL: f64 = 1e-8;
pub const DEFAULT_SAMPLES: usize = 20;
pub const DEFAULT_EIGEN_POINTS: usize = 10;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_STENCIL_H: f64 = 1e-3;
pub const DEFAULT_SWEEP_FROM: f64 = 0.3;
pub const DEFAULT_SWEEP_TO: f64 = 0.9;
pub const DEFAULT_SWEEP_STEPS: usize = 40;

/// Exit status when every invoked check passes.
pub const EXIT_OK: i32 = 0;
/// Exit status on a failed check or a computational error.
pub const EXIT_FAIL: i32 = 1;
/// Exit status on malformed command lines.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "genus2", version, about = "Numerical checks for the genus-two extremal eigenvalue family")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
struct Common {
    /// Absolute tolerance for the half-line integrals.
    #[arg(long, default_value_t = DEFAULT_QUAD_TOL)]
    tol_quad: f64,
    /// Root tolerance in theta.
    #[arg(long, default_value_t = DEFAULT_ROOT_TOL)]
    tol_root: f64,
    /// Relative singular-value threshold for the rank decision.
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    tol_rank: f64,
    /// Absolute tolerance for period comparisons.
    #[arg(long, default_value_t = DEFAULT_PERIOD_TOL)]
    period_tol: f64,
    /// Floor of the cluster tolerance around eigenvalue 2.
    #[arg(long, default_value_t = CLUSTER_TOL_FLOOR)]
    cluster_floor: f64,
    /// Boundary edge target length of the coarse mesh.
    #[arg(long = "h", default_value_t = DEFAULT_H)]
    h: f64,
    /// Eigenvalues per sector.
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    /// Extrapolate eigenvalues from meshes h and h/2.
    #[arg(long)]
    richardson: bool,
    /// Sample points for the symmetry report.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    /// Sample points for the eigen-equation residual.
    #[arg(long, default_value_t = DEFAULT_EIGEN_POINTS)]
    eigen_points: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Finite-difference step of the five-point stencil.
    #[arg(long, default_value_t = DEFAULT_STENCIL_H)]
    stencil_h: f64,
    /// Output format (each subcommand has its own default).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Record the wall-clock time in the envelope (breaks byte-identical reruns).
    #[arg(long)]
    timestamp: bool,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// The four half-line integrals at one theta.
    Integrals {
        #[arg(long)]
        theta: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Critical angles where the period system degenerates.
    FindTheta {
        #[command(flatten)]
        common: Common,
    },
    /// Singular values, null space and scripted reduction of the period system.
    Nullspace {
        /// Defaults to the first critical angle.
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        expect_nullity: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Cycle periods against closed forms and exact-form relations.
    Periods {
        #[arg(long)]
        theta: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Symmetry and eigen-equation checks for the support functions.
    VerifyOmega {
        /// Use the first critical angle (default).
        #[arg(long, conflicts_with = "theta2")]
        theta1: bool,
        /// Use the second critical angle.
        #[arg(long)]
        theta2: bool,
        /// Also write (Re z, Im z, sheet, u1, u2) to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Eight-sector Laplace spectrum at one theta.
    Spectrum {
        #[arg(long)]
        theta: f64,
        /// Sector of an eigenfunction to export (`+-+`, `v1`, `NDND`, ...).
        #[arg(long)]
        export_sector: Option<String>,
        #[arg(long, default_value_t = 0)]
        export_index: usize,
        /// CSV file for the exported eigenfunction (x, y, value).
        #[arg(long, requires = "export_sector")]
        export_path: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Eigenvalue branches over a theta grid.
    Sweep {
        #[arg(long, default_value_t = DEFAULT_SWEEP_FROM)]
        from: f64,
        #[arg(long, default_value_t = DEFAULT_SWEEP_TO)]
        to: f64,
        #[arg(long, default_value_t = DEFAULT_SWEEP_STEPS)]
        steps: usize,
        /// Comma-separated sectors, or `all`.
        #[arg(long, default_value = "v1,v2")]
        sectors: String,
        /// JSON envelope (crossings, monotonicity, checks) when the payload is CSV.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Index and nullity at a list of theta values.
    IndexTable {
        #[arg(long, value_delimiter = ',', required = true)]
        thetas: Vec<f64>,
        /// Expected index per theta.
        #[arg(long, value_delimiter = ',')]
        expect_ind: Option<Vec<usize>>,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Integrals { .. } => "integrals",
            Command::FindTheta { .. } => "find-theta",
            Command::Nullspace { .. } => "nullspace",
            Command::Periods { .. } => "periods",
            Command::VerifyOmega { .. } => "verify-omega",
            Command::Spectrum { .. } => "spectrum",
            Command::Sweep { .. } => "sweep",
            Command::IndexTable { .. } => "index-table",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Integrals { common, .. }
            | Command::FindTheta { common }
            | Command::Nullspace { common, .. }
            | Command::Periods { common, .. }
            | Command::VerifyOmega { common, .. }
            | Command::Spectrum { common, .. }
            | Command::Sweep { common, .. }
            | Command::IndexTable { common, .. } => common,
        }
    }

    fn default_format(&self) -> Format {
        match self {
            Command::Sweep { .. } | Command::IndexTable { .. } => Format::Csv,
            _ => Format::Json,
        }
    }

    fn thetas(&self) -> Vec<f64> {
        match self {
            Command::Integrals { theta, .. } | Command::Periods { theta, .. } | Command::Spectrum { theta, .. } => {
                vec![*theta]
            }
            Command::Nullspace { theta, .. } => theta.iter().copied().collect(),
            Command::Sweep { from, to, .. } => vec![*from, *to],
            Command::IndexTable { thetas, .. } => thetas.clone(),
            _ => Vec::new(),
        }
    }
}

/// Echo of the resolved configuration.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub thetas: Vec<f64>,
    pub format: Format,
    pub output: Option<String>,
    #[serde(flatten)]
    options: Value,
}

impl RunConfig {
    fn from_command(cmd: &Command) -> Result<Self> {
        let c = cmd.common();
        for (name, v) in [
            ("tol-quad", c.tol_quad),
            ("tol-root", c.tol_root),
            ("tol-rank", c.tol_rank),
            ("period-tol", c.period_tol),
            ("cluster-floor", c.cluster_floor),
            ("h", c.h),
            ("stencil-h", c.stencil_h),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("--{name} must be positive, got {v}")));
            }
        }
        let thetas = cmd.thetas();
        for &t in &thetas {
            ThetaParam::new(t)?;
        }
        let mut options = serde_json::to_value(cmd).map_err(|e| Error::Io(e.to_string()))?;
        // Unwrap the enum tag and flatten the shared options.
        if let Value::Object(mut outer) = options {
            let (_, inner) = outer.iter_mut().next().ok_or_else(|| Error::Io("empty config".into()))?;
            let mut inner = inner.take();
            if let Some(Value::Object(common)) = inner.as_object_mut().and_then(|o| o.remove("common")) {
                let o = inner.as_object_mut().expect("object");
                o.extend(common);
                o.remove("format");
                o.remove("output");
                o.remove("timestamp");
            }
            options = inner;
        }
        Ok(RunConfig {
            subcommand: cmd.name().to_string(),
            thetas,
            format: c.format.unwrap_or(cmd.default_format()),
            output: c.output.as_ref().map(|p| p.display().to_string()),
            options,
        })
    }
}

struct Outcome {
    json: Value,
    csv: Option<CsvTable>,
    checks: Vec<Check>,
}

/// Runs one command line and returns the process exit status.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return if code == 0 { EXIT_OK } else { EXIT_USAGE };
        }
    };
    match run(&cli.command) {
        Ok(passed) => {
            if passed {
                EXIT_OK
            } else {
                EXIT_FAIL
            }
        }
        Err(e @ (Error::InvalidArgument(_) | Error::ThetaDomain(_))) => {
            eprintln!("usage error: {e}");
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAIL
        }
    }
}

fn run(cmd: &Command) -> Result<bool> {
    let config = RunConfig::from_command(cmd)?;
    let common = cmd.common();
    let outcome = compute(cmd)?;
    let timestamp = common.timestamp.then(|| {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        format!("{secs}")
    });
    let passed = outcome.checks.iter().all(|c| c.passed);
    let output = common.output.as_deref();
    match config.format {
        Format::Json => {
            let env = ReportEnvelope::new(&config, &outcome.json, outcome.checks.clone(), timestamp);
            emit(&to_json(&env)?, output)?;
        }
        Format::Csv => {
            let table = outcome
                .csv
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument(format!("{} has no CSV form", config.subcommand)))?;
            emit(&table.render(), output)?;
            let summary = ReportEnvelope::new(&config, summary_of(&outcome.json), outcome.checks.clone(), timestamp);
            let report_path = match cmd {
                Command::Sweep { report, .. } => report.clone(),
                _ => None,
            };
            match report_path {
                Some(p) => emit(&to_json(&summary)?, Some(&p))?,
                None => {
                    for c in &outcome.checks {
                        eprintln!("{}", c.line());
                    }
                }
            }
        }
    }
    Ok(passed)
}

/// The JSON payload minus bulky row arrays, for the side report of CSV runs.
fn summary_of(v: &Value) -> Value {
    match v {
        Value::Object(o) => {
            let mut o = o.clone();
            o.remove("rows");
            Value::Object(o)
        }
        other => other.clone(),
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Io(e.to_string()))
}

fn compute(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Integrals { theta, common } => {
            let q = integral_quartet(&ThetaParam::new(*theta)?, common.tol_quad)?;
            let mut csv = CsvTable::new(&["theta", "A", "B", "C", "D", "err_A", "err_B", "err_C", "err_D"]);
            let mut row = vec![Cell::Float(*theta)];
            row.extend(q.values().iter().chain(&q.err).map(|v| Cell::Float(*v)));
            csv.push(row);
            let mut checks = vec![Check::new(
                "max_error",
                q.max_err(),
                crate::report::Comparison::Within { lower: 0.0 },
                common.tol_quad,
            )];
            // At the Bolza angle the curve has the extra symmetry z -> 1/z.
            if (theta - std::f64::consts::FRAC_PI_4).abs() < 1e-12 {
                checks.push(Check::below("abs_a_minus_b", (q.a - q.b).abs(), 1e-10));
                checks.push(Check::below("abs_c_minus_d", (q.c - q.d).abs(), 1e-10));
            }
            Ok(Outcome {
                json: json!({"theta": theta, "A": q.a, "B": q.b, "C": q.c, "D": q.d, "err": q.err}),
                csv: Some(csv),
                checks,
            })
        }
        Command::FindTheta { common } => {
            let ca = solve_critical_thetas(common.tol_root)?;
            let mut csv = CsvTable::new(&["theta1", "theta2", "f1_residual", "f2_residual", "sign_changes_f1"]);
            csv.push(vec![
                Cell::Float(ca.theta1),
                Cell::Float(ca.theta2),
                Cell::Float(ca.f1_residual),
                Cell::Float(ca.f2_residual),
                Cell::Int(ca.scan_sign_changes_f1 as i64),
            ]);
            Ok(Outcome {
                json: to_value(&ca)?,
                csv: Some(csv),
                checks: vec![
                    Check::within("theta1", ca.theta1, 0.64, 0.66),
                    Check::within("theta2", ca.theta2, 0.90, 0.92),
                    Check::below("abs_f1_at_theta1", ca.f1_residual.abs(), 1e-10),
                    Check::equal("sign_changes_f1", ca.scan_sign_changes_f1, 1),
                ],
            })
        }
        Command::Nullspace { theta, expect_nullity, common } => {
            let th = match theta {
                Some(t) => *t,
                None => solve_critical_thetas(common.tol_root)?.theta1,
            };
            let tp = ThetaParam::new(th)?;
            let sys = assemble_system(&tp, common.tol_quad)?;
            let ns = nullspace(&sys, common.tol_rank)?;
            let red = appendix_reduce(&sys)?;
            let dev = max_rel_deviation(&red.matrix, &expected_reduced(&sys.quartet));
            let keq = kernel_equivalence(&sys, &red)?;
            let min_scale = red.scalings.iter().cloned().fold(f64::INFINITY, f64::min);
            let mut checks = vec![
                Check::below("reduction_max_rel_deviation", dev, 1e-9),
                Check::new("min_self_scaling", min_scale, crate::report::Comparison::Above, 0.0),
                Check::below("kernel_equivalence_defect", keq.relative_defect, 1e-9),
            ];
            let mut parallel = None;
            if ns.nullity == 1 {
                let lemma = crate::system::alpha_to_system(lemma_alpha(&sys.quartet));
                let s = crate::system::sin_angle(&ns.basis[0], &lemma);
                parallel = Some(s);
            }
            if let Some(n) = expect_nullity {
                checks.push(Check::equal("nullity", ns.nullity, *n));
            }
            let mut csv = CsvTable::new(&["theta", "index", "singular_value"]);
            for (i, s) in ns.singular_values.iter().enumerate() {
                csv.push(vec![Cell::Float(th), Cell::Int(i as i64), Cell::Float(*s)]);
            }
            Ok(Outcome {
                json: json!({
                    "theta": th,
                    "nullspace": to_value(&ns)?,
                    "sin_angle_to_closed_form": parallel,
                    "reduction": {
                        "matrix": to_value(&red.matrix)?,
                        "scalings": red.scalings,
                        "max_rel_deviation": dev,
                        "kernel_equivalence": to_value(&keq)?,
                    },
                }),
                csv: Some(csv),
                checks,
            })
        }
        Command::Periods { theta, common } => {
            let tp = ThetaParam::new(*theta)?;
            let q = integral_quartet(&tp, common.tol_quad)?;
            let table = period_table(&q)?;
            let rel = relation_periods(&tp)?;
            let rel_max = rel.iter().map(|r| r.max_abs).fold(0.0, f64::max);
            let mut csv = CsvTable::new(&["form", "cycle", "re", "im", "closed_re", "closed_im", "abs_err"]);
            for e in &table.entries {
                csv.push(vec![
                    Cell::Text(e.form.clone()),
                    Cell::Text(e.cycle.clone()),
                    Cell::Float(e.value.re),
                    Cell::Float(e.value.im),
                    Cell::Float(e.closed_form.re),
                    Cell::Float(e.closed_form.im),
                    Cell::Float(e.abs_err),
                ]);
            }
            Ok(Outcome {
                json: json!({"table": to_value(&table)?, "relations": to_value(&rel)?}),
                csv: Some(csv),
                checks: vec![
                    Check::below("max_period_error", table.max_abs_err(), common.period_tol),
                    Check::below("max_relation_period", rel_max, common.period_tol),
                ],
            })
        }
        Command::VerifyOmega { theta2, csv, common, .. } => {
            let ca = solve_critical_thetas(common.tol_root)?;
            let th = if *theta2 { ca.theta2 } else { ca.theta1 };
            let pair = omega_pair_at(&ThetaParam::new(th)?, common.tol_rank)?;
            let v = verify_omega(&[pair.omega1, pair.omega2], common.samples, common.eigen_points, common.seed, common.stencil_h)?;
            let mut table = CsvTable::new(&["re_z", "im_z", "sheet", "u1", "u2", "residual_h", "residual_half_h"]);
            for r in &v.eigen {
                table.push(vec![
                    Cell::Float(r.z[0]),
                    Cell::Float(r.z[1]),
                    Cell::Int(r.sheet as i64),
                    Cell::Float(r.u1),
                    Cell::Float(r.u2),
                    Cell::Float(r.residual_h),
                    Cell::Float(r.residual_half_h),
                ]);
            }
            if let Some(p) = csv {
                let mut points = CsvTable::new(&["re_z", "im_z", "sheet", "u1", "u2"]);
                for r in &v.eigen {
                    points.push(vec![
                        Cell::Float(r.z[0]),
                        Cell::Float(r.z[1]),
                        Cell::Int(r.sheet as i64),
                        Cell::Float(r.u1),
                        Cell::Float(r.u2),
                    ]);
                }
                emit(&points.render(), Some(p))?;
            }
            let tp = ThetaParam::new(th)?;
            let residues = hat_residue_table(tp, RESIDUE_EPS)?;
            let relations = relation_periods(&tp)?;
            let max_res = residues.iter().map(|r| r.residue.value.norm()).fold(0.0, f64::max);
            let max_halving = residues.iter().map(|r| r.residue.halving_change).fold(0.0, f64::max);
            let max_rel = relations.iter().map(|r| r.max_abs).fold(0.0, f64::max);
            let mut checks = vec![
                Check::below("max_residue", max_res, common.period_tol),
                Check::below("residue_halving_change", max_halving, common.period_tol),
                Check::below("max_relation_period", max_rel, common.period_tol),
            ];
            if !*theta2 {
                let s = &v.symmetry;
                checks.push(Check::below("symmetry_max_residual", s.max_residual(), 1e-6));
                checks.push(Check::below("psi_omega1_density", s.psi_omega1, 1e-10));
                checks.push(Check::below("psi_omega2_density", s.psi_omega2, 1e-10));
            }
            checks.push(Check::below("eigen_residual_max", v.max_eigen_residual(), 1e-3));
            checks.push(Check::equal("second_order_trend", v.second_order_trend() as usize, 1));
            checks.push(Check::below("pullback_harmonic_residual", v.max_harmonic_residual(), 1e-10));
            checks.push(Check::new(
                "extra_relative_residual",
                v.extra.relative_residual,
                crate::report::Comparison::Above,
                0.1,
            ));
            let mut json = to_value(&v)?;
            json["residues"] = to_value(&residues)?;
            json["relations"] = to_value(&relations)?;
            Ok(Outcome { json, csv: Some(table), checks })
        }
        Command::Spectrum { theta, export_sector, export_index, export_path, common } => {
            let tp = ThetaParam::new(*theta)?;
            let opts = options(common);
            let res = spectrum(&tp, &opts)?;
            if let Some(sec) = export_sector {
                let spec = SectorSpec::parse(sec)?;
                let fine_h = if opts.richardson { 0.5 * opts.h } else { opts.h };
                let d = Discretization::new(&tp, fine_h)?;
                let sol = d.solve(&spec, export_index + 1, true)?;
                let vecs = sol.vectors.expect("requested");
                let v = vecs
                    .get(*export_index)
                    .ok_or_else(|| Error::InvalidArgument(format!("eigenfunction {export_index} not available")))?;
                let mut t = CsvTable::new(&["x", "y", "value"]);
                for (p, val) in d.mesh.vertices.iter().zip(v) {
                    t.push(vec![Cell::Float(p[0]), Cell::Float(p[1]), Cell::Float(*val)]);
                }
                emit(&t.render(), export_path.as_deref())?;
            }
            let mut csv = CsvTable::new(&["sector", "conditions", "index", "eigenvalue", "extrapolation_err"]);
            for s in &res.sectors {
                for (i, (v, e)) in s.values.iter().zip(&s.extrapolation_err).enumerate() {
                    csv.push(vec![
                        Cell::Text(s.sector.clone()),
                        Cell::Text(s.conditions.clone()),
                        Cell::Int(i as i64),
                        Cell::Float(*v),
                        Cell::Float(*e),
                    ]);
                }
            }
            let fine_h = if opts.richardson { 0.5 * opts.h } else { opts.h };
            let area_err = (8.0 * res.weighted_area - 8.0 * std::f64::consts::PI).abs();
            let lowest = res.merged.first().map(|e| e.value.abs()).unwrap_or(f64::INFINITY);
            Ok(Outcome {
                json: to_value(&res)?,
                csv: Some(csv),
                checks: vec![
                    Check::below("constant_mode", lowest, 1e-8),
                    Check::at_least("nullity_lower_bound", res.nul, 3),
                    Check::below("total_area_error", area_err, 8.0 * fine_h * fine_h),
                ],
            })
        }
        Command::Sweep { from, to, steps, sectors, common, .. } => {
            let secs = parse_sectors(sectors)?;
            let opts = options(common);
            let res = sweep(*from, *to, *steps, &secs, &opts)?;
            let mut csv = CsvTable::new(&["theta", "sector", "branch_index", "eigenvalue"]);
            for r in &res.rows {
                csv.push(vec![
                    Cell::Float(r.theta),
                    Cell::Text(r.sector.clone()),
                    Cell::Int(r.branch_index as i64),
                    Cell::Float(r.eigenvalue),
                ]);
            }
            let mut checks = Vec::new();
            for m in &res.monotonicity {
                checks.push(Check::below(format!("max_drop_{}", m.sector), m.max_drop, MONOTONE_SLACK));
            }
            let all = secs.len() == 8;
            if all {
                let min_nul = res.counts.iter().map(|c| c.1).min().unwrap_or(0);
                checks.push(Check::at_least("min_nullity", min_nul, 3));
            }
            let tracks = secs.contains(&SectorSpec::V1) || secs.contains(&SectorSpec::V2);
            let mut theta1 = None;
            if tracks || all {
                let t1 = solve_critical_thetas(common.tol_root)?.theta1;
                if *from < t1 && t1 < *to {
                    theta1 = Some(t1);
                    for tracked in [SectorSpec::V1, SectorSpec::V2] {
                        if secs.contains(&tracked) {
                            let miss = res
                                .crossings
                                .iter()
                                .filter(|c| c.sector == tracked.label() && c.branch_index == 0 && c.upward)
                                .map(|c| (c.theta - t1).abs())
                                .fold(f64::INFINITY, f64::min);
                            checks.push(Check::below(format!("crossing_offset_{}", tracked.label()), miss, 0.02));
                        }
                    }
                    if all {
                        let nearest = res
                            .thetas
                            .iter()
                            .enumerate()
                            .min_by(|a, b| (a.1 - t1).abs().total_cmp(&(b.1 - t1).abs()))
                            .map(|(i, _)| i)
                            .expect("non-empty grid");
                        checks.push(Check::equal("nullity_near_theta1", res.counts[nearest].1, 5));
                    }
                }
            }
            let mut json = to_value(&res)?;
            json["theta1"] = json!(theta1);
            Ok(Outcome { json, csv: Some(csv), checks })
        }
        Command::IndexTable { thetas, expect_ind, common } => {
            let opts = options(common);
            let rows = index_table(thetas, &opts)?;
            let mut csv = CsvTable::new(&["theta", "ind", "nul", "tol_cluster"]);
            let mut checks = Vec::new();
            for r in &rows {
                csv.push(vec![
                    Cell::Float(r.theta),
                    Cell::Int(r.ind as i64),
                    Cell::Int(r.nul as i64),
                    Cell::Float(r.tol_cluster),
                ]);
                checks.push(Check::at_least(format!("nul_at_{}", r.theta), r.nul, 3));
            }
            if let Some(exp) = expect_ind {
                if exp.len() != rows.len() {
                    return Err(Error::InvalidArgument(format!(
                        "--expect-ind has {} entries for {} thetas",
                        exp.len(),
                        rows.len()
                    )));
                }
                for (r, e) in rows.iter().zip(exp) {
                    checks.push(Check::equal(format!("ind_at_{}", r.theta), r.ind, *e));
                }
            }
            Ok(Outcome { json: json!({"rows": to_value(&rows)?}), csv: Some(csv), checks })
        }
    }
}

fn options(c: &Common) -> SpectrumOptions {
    SpectrumOptions { k: c.k, h: c.h, richardson: c.richardson, cluster_floor: c.cluster_floor }
}

fn parse_sectors(s: &str) -> Result<Vec<SectorSpec>> {
    if s.trim() == "all" {
        return Ok(sector_table());
    }
    let mut out = Vec::new();
    for part in s.split(',') {
        let spec = SectorSpec::parse(part)?;
        if !out.contains(&spec) {
            out.push(spec);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_subcommand_is_usage_error() {
        assert_eq!(dispatch(["genus2", "frobnicate"]), EXIT_USAGE);
        assert_eq!(dispatch(["genus2", "integrals", "--bogus"]), EXIT_USAGE);
    }

    #[test]
    fn theta_outside_domain_is_usage_error() {
        assert_eq!(dispatch(["genus2", "integrals", "--theta", "2.0", "--output", "/dev/null"]), EXIT_USAGE);
    }

    #[test]
    fn sector_lists() {
        assert_eq!(parse_sectors("all").unwrap().len(), 8);
        assert_eq!(parse_sectors("v1,v2,v1").unwrap(), vec![SectorSpec::V1, SectorSpec::V2]);
        assert!(parse_sectors("v3").is_err());
    }

    #[test]
    fn config_echo_flattens_options() {
        let cli = Cli::try_parse_from(["genus2", "spectrum", "--theta", "0.5", "--k", "4"]).unwrap();
        let cfg = RunConfig::from_command(&cli.command).unwrap();
        let v = serde_json::to_value(&cfg).unwrap();
        assert_eq!(v["subcommand"], "spectrum");
        assert_eq!(v["k"], 4);
        assert_eq!(v["theta"], 0.5);
        assert!(v.get("common").is_none());
    }
}
