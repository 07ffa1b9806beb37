//! Convergence-study configuration, the per-grid-point pipeline, CSV output
//! and the closed-form geometry checks.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{error_norms, AnalyticProblem, ProblemKind};
use crate::fem::{assemble_laplace, assemble_stokes_lps, interpolate, solve_laplace, solve_stokes, FeSpace};
use crate::geometry::{
    disk_sample_points, ellipse_map_diagnostics, hausdorff_distance, shifted_disk_errors, PerturbedDomain,
};
use crate::meshgen::{build_mesh, write_vtk, VtkField};

/// The perturbation amplitudes of the reference study.
pub const DEFAULT_UPSILONS: [f64; 5] = [0.0, 0.0125, 0.025, 0.05, 0.1];
pub const DEFAULT_TRUNCATION_RADIUS: f64 = 0.88;
pub const DEFAULT_LPS_ALPHA: f64 = 0.1;

pub const CSV_HEADER: &str = "problem,dim,degree,upsilon,hausdorff_estimate,level,h_max,ndofs,l2_error,h1_error,\
h1_semi_error,solver_iterations,wall_time_s,error";

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub problem: ProblemKind,
    pub degrees: Vec<usize>,
    pub upsilons: Vec<f64>,
    /// Refinement levels; empty selects the default range for the problem.
    pub levels: Vec<usize>,
    pub truncation_radius: f64,
    pub lps_alpha: f64,
    /// Error-norm quadrature order; `2r + 3` when absent.
    pub quad_order: Option<usize>,
    pub output: Option<PathBuf>,
    /// Worker threads; 0 uses all cores.
    pub parallel_jobs: usize,
    /// Boundary samples per angular direction for the Hausdorff estimate;
    /// 0 picks 4096 in 2D and 128 in 3D.
    pub hausdorff_samples: usize,
    /// Directory for VTK dumps of every solved grid point.
    pub dump_fields: Option<PathBuf>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            problem: ProblemKind::Laplace2d,
            degrees: vec![1, 2],
            upsilons: DEFAULT_UPSILONS.to_vec(),
            levels: Vec::new(),
            truncation_radius: DEFAULT_TRUNCATION_RADIUS,
            lps_alpha: DEFAULT_LPS_ALPHA,
            quad_order: None,
            output: None,
            parallel_jobs: 0,
            hausdorff_samples: 0,
            dump_fields: None,
        }
    }
}

/// Default level range: `2..=6` in 2D and `1..=4` in 3D.
pub fn default_levels(problem: ProblemKind) -> Vec<usize> {
    if problem.dim() == 3 {
        (1..=4).collect()
    } else {
        (2..=6).collect()
    }
}

impl StudyConfig {
    pub fn for_problem(problem: ProblemKind) -> Self {
        let mut c = Self { problem, ..Self::default() };
        if problem.is_stokes() {
            c.degrees = vec![1];
        }
        c
    }

    pub fn from_json(text: &str) -> Result<Self, StudyError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self, StudyError> {
        let mut s = String::new();
        File::open(path)?.read_to_string(&mut s)?;
        Self::from_json(&s)
    }

    pub fn effective_levels(&self) -> Vec<usize> {
        if self.levels.is_empty() {
            default_levels(self.problem)
        } else {
            self.levels.clone()
        }
    }

    pub fn hausdorff_samples_per_direction(&self) -> usize {
        match (self.hausdorff_samples, self.problem.dim()) {
            (0, 3) => 128,
            (0, _) => 4096,
            (n, _) => n,
        }
    }

    pub fn validate(&self) -> Result<(), StudyError> {
        let bad = |m: String| Err(StudyError::Config(m));
        if self.degrees.is_empty() || self.degrees.iter().any(|d| !(1..=2).contains(d)) {
            return bad(format!("degrees must be a nonempty subset of {{1, 2}}, got {:?}", self.degrees));
        }
        if self.upsilons.is_empty() {
            return bad("no upsilon values".into());
        }
        if let Some(u) = self.upsilons.iter().find(|u| !(**u >= 0.0 && **u < 5.0 / 6.0)) {
            return bad(format!("upsilon {u} outside [0, 5/6)"));
        }
        if self.levels.windows(2).any(|w| w[1] <= w[0]) {
            return bad(format!("levels must be strictly increasing, got {:?}", self.levels));
        }
        if !(self.truncation_radius > 0.0 && self.truncation_radius <= 1.0) {
            return bad(format!("truncation radius {} outside (0, 1]", self.truncation_radius));
        }
        if !(self.lps_alpha > 0.0 && self.lps_alpha.is_finite()) {
            return bad(format!("lps_alpha must be positive, got {}", self.lps_alpha));
        }
        if let Some(q) = self.quad_order {
            let need = 2 * self.degrees.iter().max().unwrap() + 1;
            if q < need {
                return bad(format!("quadrature order {q} below {need}"));
            }
        }
        Ok(())
    }

    /// Grid points `(degree, upsilon, level)` in output order.
    pub fn grid(&self) -> Vec<(usize, f64, usize)> {
        let mut degrees = self.degrees.clone();
        degrees.sort_unstable();
        degrees.dedup();
        let mut ups = self.upsilons.clone();
        ups.sort_by(f64::total_cmp);
        ups.dedup();
        let levels = self.effective_levels();
        let mut out = Vec::new();
        for &d in &degrees {
            for &u in &ups {
                for &l in &levels {
                    out.push((d, u, l));
                }
            }
        }
        out
    }
}

/// One line of the study CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRecord {
    pub problem: ProblemKind,
    pub dim: usize,
    pub degree: usize,
    pub upsilon: f64,
    pub hausdorff_estimate: f64,
    pub level: usize,
    pub h_max: f64,
    pub ndofs: usize,
    pub l2_error: f64,
    pub h1_error: f64,
    pub h1_semi_error: f64,
    pub solver_iterations: usize,
    pub wall_time_s: f64,
    /// Empty on success.
    pub error: String,
}

impl StudyRecord {
    pub fn is_ok(&self) -> bool {
        self.error.is_empty()
    }
}

fn domain_for(dim: usize, upsilon: f64) -> Result<PerturbedDomain, String> {
    let d = if upsilon == 0.0 { PerturbedDomain::unit_ball(dim) } else { PerturbedDomain::radial(dim, upsilon) };
    d.map_err(|e| e.to_string())
}

struct PointResult {
    h_max: f64,
    ndofs: usize,
    l2: f64,
    h1: f64,
    semi: f64,
    iterations: usize,
}

fn solve_point(config: &StudyConfig, degree: usize, upsilon: f64, level: usize) -> Result<PointResult, String> {
    let problem = AnalyticProblem::new(config.problem);
    let domain = domain_for(problem.dim(), upsilon)?;
    let mesh = build_mesh(&domain, level, degree).map_err(|e| e.to_string())?;
    let space = FeSpace::new(&mesh, config.problem.field()).map_err(|e| e.to_string())?;
    let assembly_order = 2 * degree + 1;
    let norm_order = config.quad_order.unwrap_or(2 * degree + 3);
    let (coeffs, iterations) = if config.problem.is_stokes() {
        let sys = assemble_stokes_lps(&space, |x| problem.vector_rhs(x), config.lps_alpha, assembly_order)
            .map_err(|e| e.to_string())?;
        (solve_stokes(&space, &sys).map_err(|e| e.to_string())?.coeffs, 0)
    } else {
        let sys = assemble_laplace(&space, |x| problem.scalar_rhs(x), assembly_order).map_err(|e| e.to_string())?;
        let out = solve_laplace(&sys).map_err(|e| e.to_string())?;
        (out.x, out.iterations)
    };
    let rep = error_norms(&space, &coeffs, &problem, config.truncation_radius, norm_order).map_err(|e| e.to_string())?;
    if let Some(dir) = &config.dump_fields {
        dump_point(dir, config, &space, &coeffs, &problem, degree, upsilon, level).map_err(|e| e.to_string())?;
    }
    Ok(PointResult {
        h_max: rep.h_max,
        ndofs: rep.ndofs,
        l2: rep.l2_error,
        h1: rep.h1_error,
        semi: rep.h1_semi_error,
        iterations,
    })
}

#[allow(clippy::too_many_arguments)]
fn dump_point(
    dir: &Path,
    config: &StudyConfig,
    space: &FeSpace<'_>,
    coeffs: &[f64],
    problem: &AnalyticProblem,
    degree: usize,
    upsilon: f64,
    level: usize,
) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let name = format!("{}_q{}_u{}_l{}.vtk", config.problem, degree, upsilon, level);
    let exact = interpolate(space, |x, c| problem.component(x, c));
    let nc = space.n_components();
    let mut fields = Vec::new();
    let solution: Vec<f64>;
    let reference: Vec<f64>;
    let pressure: Vec<f64>;
    if nc == 1 {
        solution = coeffs.to_vec();
        reference = exact;
        fields.push(VtkField { name: "u_h", values: &solution, components: 1 });
        fields.push(VtkField { name: "u_exact", values: &reference, components: 1 });
    } else {
        solution = coeffs.chunks(nc).flat_map(|c| [c[0], c[1], 0.0]).collect();
        pressure = coeffs.chunks(nc).map(|c| c[2]).collect();
        reference = exact.chunks(nc).flat_map(|c| [c[0], c[1], 0.0]).collect();
        fields.push(VtkField { name: "velocity_h", values: &solution, components: 3 });
        fields.push(VtkField { name: "pressure_h", values: &pressure, components: 1 });
        fields.push(VtkField { name: "velocity_exact", values: &reference, components: 3 });
    }
    let out = BufWriter::new(File::create(dir.join(name))?);
    write_vtk(space.mesh(), &fields, out)
}

/// Runs every grid point of `config` and returns the records sorted by
/// `(degree, upsilon, level)`. Failures are recorded in the `error`
/// column; the remaining points still run.
pub fn run_study(config: &StudyConfig) -> Result<Vec<StudyRecord>, StudyError> {
    config.validate()?;
    let dim = config.problem.dim();
    let grid = config.grid();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallel_jobs)
        .build()
        .map_err(|e| StudyError::Config(e.to_string()))?;
    let samples = config.hausdorff_samples_per_direction();
    let mut ups: Vec<f64> = grid.iter().map(|g| g.1).collect();
    ups.dedup();
    let records = pool.install(|| {
        let hausdorff: Vec<(f64, f64)> = ups
            .par_iter()
            .map(|&u| {
                let est = domain_for(dim, u)
                    .and_then(|d| {
                        let ball = PerturbedDomain::unit_ball(dim).map_err(|e| e.to_string())?;
                        hausdorff_distance(&ball, &d, samples).map_err(|e| e.to_string())
                    })
                    .unwrap_or(f64::NAN);
                (u, est)
            })
            .collect();
        grid.par_iter()
            .map(|&(degree, upsilon, level)| {
                let start = Instant::now();
                let res = solve_point(config, degree, upsilon, level);
                let wall = start.elapsed().as_secs_f64();
                let h = hausdorff.iter().find(|(u, _)| *u == upsilon).map_or(f64::NAN, |p| p.1);
                let base = StudyRecord {
                    problem: config.problem,
                    dim,
                    degree,
                    upsilon,
                    hausdorff_estimate: h,
                    level,
                    h_max: f64::NAN,
                    ndofs: 0,
                    l2_error: f64::NAN,
                    h1_error: f64::NAN,
                    h1_semi_error: f64::NAN,
                    solver_iterations: 0,
                    wall_time_s: wall,
                    error: String::new(),
                };
                match res {
                    Ok(p) => StudyRecord {
                        h_max: p.h_max,
                        ndofs: p.ndofs,
                        l2_error: p.l2,
                        h1_error: p.h1,
                        h1_semi_error: p.semi,
                        solver_iterations: p.iterations,
                        ..base
                    },
                    Err(e) => StudyRecord { error: e, ..base },
                }
            })
            .collect::<Vec<_>>()
    });
    Ok(records)
}

pub fn write_csv<W: Write>(records: &[StudyRecord], out: W) -> Result<(), StudyError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<StudyRecord>, StudyError> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    if header.join(",") != CSV_HEADER {
        return Err(StudyError::Config(format!("unexpected CSV header '{}'", header.join(","))));
    }
    Ok(rd.deserialize().collect::<Result<Vec<StudyRecord>, _>>()?)
}

/// Outcome of one closed-form comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub upsilon: f64,
    pub measured: f64,
    pub predicted: f64,
    /// Ratio for the shifted-disk checks, absolute deviation for the
    /// ellipse checks.
    pub score: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticReport {
    pub lines: Vec<CheckLine>,
}

impl AnalyticReport {
    pub fn all_pass(&self) -> bool {
        self.lines.iter().all(|l| l.pass)
    }
}

pub const DISK_CHECK_UPSILONS: [f64; 3] = [1e-1, 1e-2, 1e-3];
pub const DISK_RATIO_BAND: (f64, f64) = (0.9, 1.1);
pub const ELLIPSE_TOLERANCE: f64 = 1e-12;

/// Shifted-disk errors against `sqrt(pi) Υ` (L2) and `sqrt(8 Υ)` (H1) and
/// the ellipse map defect against `2Υ + Υ^2`.
pub fn run_analytic_checks() -> AnalyticReport {
    let mut lines = Vec::new();
    for &u in &DISK_CHECK_UPSILONS {
        let (l2, h1) = match shifted_disk_errors(u, 40) {
            Ok(e) => (e.l2_error, e.h1_seminorm_error),
            Err(_) => (f64::NAN, f64::NAN),
        };
        for (name, measured, predicted) in
            [("disk_l2", l2, std::f64::consts::PI.sqrt() * u), ("disk_h1", h1, (8.0 * u).sqrt())]
        {
            let score = measured / predicted;
            lines.push(CheckLine {
                name: name.into(),
                upsilon: u,
                measured,
                predicted,
                score,
                pass: score >= DISK_RATIO_BAND.0 && score <= DISK_RATIO_BAND.1,
            });
        }
    }
    let pts = disk_sample_points(8, 16);
    for &u in &DEFAULT_UPSILONS {
        let measured = ellipse_map_diagnostics(u, &pts).map_or(f64::NAN, |d| d.sup_norm_defect);
        let predicted = 2.0 * u + u * u;
        let score = (measured - predicted).abs();
        lines.push(CheckLine {
            name: "ellipse_defect".into(),
            upsilon: u,
            measured,
            predicted,
            score,
            pass: score <= ELLIPSE_TOLERANCE,
        });
    }
    AnalyticReport { lines }
}
