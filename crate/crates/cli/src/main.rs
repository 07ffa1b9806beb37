use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use perturbfem::analysis::ProblemKind;
use perturbfem::geometry::{hausdorff_distance, PerturbedDomain};
use perturbfem::meshgen::{build_mesh, write_mesh_text, write_vtk};
use perturbfem::study::{run_analytic_checks, run_study, write_csv, StudyConfig};

const EXIT_CONFIG: u8 = 1;
const EXIT_ANALYTIC: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "perturbfem", version, about = "Finite element error under domain perturbation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the convergence study and write CSV records.
    Study(CommonArgs),
    /// Compare the shifted-disk and ellipse computations with their closed forms.
    Analytic {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Print the report as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Print the sampled Hausdorff distance between the unit ball and each perturbed domain.
    Hausdorff {
        #[command(flatten)]
        common: CommonArgs,
        /// Boundary samples per angular direction.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Export the meshes of the study grid.
    Mesh {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t = MeshFormat::Vtk)]
        format: MeshFormat,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MeshFormat {
    Vtk,
    Text,
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// JSON configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<ProblemKind>,
    /// Comma separated, e.g. `1,2`.
    #[arg(long, value_delimiter = ',')]
    degrees: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    upsilons: Option<Vec<f64>>,
    /// Inclusive range `2..6` or a comma separated list.
    #[arg(long, value_parser = parse_levels)]
    levels: Option<Levels>,
    /// Output file (study) or directory (mesh).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    truncation_radius: Option<f64>,
    #[arg(long)]
    lps_alpha: Option<f64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    dump_fields: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
struct Levels(Vec<usize>);

fn parse_levels(s: &str) -> Result<Levels, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("bad level '{t}': {e}"));
    if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (lo, hi) = (num(a)?, num(b)?);
        if lo > hi {
            return Err(format!("empty level range {s}"));
        }
        return Ok(Levels((lo..=hi).collect()));
    }
    let v = s.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
    if v.is_empty() {
        return Err("no levels".into());
    }
    Ok(Levels(v))
}

fn build_config(args: &CommonArgs) -> Result<StudyConfig, String> {
    let mut cfg = match (&args.config, args.problem) {
        (Some(path), _) => StudyConfig::from_path(path).map_err(|e| e.to_string())?,
        (None, Some(p)) => StudyConfig::for_problem(p),
        (None, None) => StudyConfig::default(),
    };
    if let Some(p) = args.problem {
        cfg.problem = p;
    }
    if let Some(d) = &args.degrees {
        cfg.degrees = d.clone();
    }
    if let Some(u) = &args.upsilons {
        cfg.upsilons = u.clone();
    }
    if let Some(l) = &args.levels {
        cfg.levels = l.0.clone();
    }
    if let Some(o) = &args.out {
        cfg.output = Some(o.clone());
    }
    if let Some(t) = args.truncation_radius {
        cfg.truncation_radius = t;
    }
    if let Some(a) = args.lps_alpha {
        cfg.lps_alpha = a;
    }
    if let Some(j) = args.jobs {
        cfg.parallel_jobs = j;
    }
    if let Some(d) = &args.dump_fields {
        cfg.dump_fields = Some(d.clone());
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn cmd_study(cfg: &StudyConfig) -> Result<(), String> {
    let records = run_study(cfg).map_err(|e| e.to_string())?;
    let failed = records.iter().filter(|r| !r.is_ok()).count();
    match &cfg.output {
        Some(path) => {
            let f = File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
            write_csv(&records, BufWriter::new(f)).map_err(|e| e.to_string())?;
            eprintln!("wrote {} records to {}", records.len(), path.display());
        }
        None => write_csv(&records, io::stdout().lock()).map_err(|e| e.to_string())?,
    }
    if failed > 0 {
        eprintln!("{failed} grid point(s) failed; see the error column");
    }
    Ok(())
}

fn cmd_analytic(json: bool) -> ExitCode {
    let report = run_analytic_checks();
    if json {
        match serde_json::to_string_pretty(&report) {
            Ok(s) => println!("{s}"),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
        }
    } else {
        for l in &report.lines {
            println!(
                "{} {:<15} Υ={:<8} measured={:.6e} predicted={:.6e} score={:.6e}",
                if l.pass { "PASS" } else { "FAIL" },
                l.name,
                l.upsilon,
                l.measured,
                l.predicted,
                l.score
            );
        }
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_ANALYTIC)
    }
}

fn domain(dim: usize, upsilon: f64) -> Result<PerturbedDomain, String> {
    let d = if upsilon == 0.0 { PerturbedDomain::unit_ball(dim) } else { PerturbedDomain::radial(dim, upsilon) };
    d.map_err(|e| e.to_string())
}

fn cmd_hausdorff(cfg: &StudyConfig, samples: Option<usize>) -> Result<(), String> {
    let dim = cfg.problem.dim();
    let n = samples.unwrap_or_else(|| cfg.hausdorff_samples_per_direction());
    let ball = domain(dim, 0.0)?;
    let mut out = io::stdout().lock();
    writeln!(out, "upsilon,hausdorff_estimate").map_err(|e| e.to_string())?;
    for &u in &cfg.upsilons {
        let h = hausdorff_distance(&ball, &domain(dim, u)?, n).map_err(|e| e.to_string())?;
        writeln!(out, "{u},{h:.17e}").map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn cmd_mesh(cfg: &StudyConfig, format: MeshFormat) -> Result<(), String> {
    let dir = cfg.output.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    for (degree, u, level) in cfg.grid() {
        let dom = domain(cfg.problem.dim(), u)?;
        let mesh = build_mesh(&dom, level, degree).map_err(|e| e.to_string())?;
        let ext = match format {
            MeshFormat::Vtk => "vtk",
            MeshFormat::Text => "mesh",
        };
        let path = dir.join(format!("{}_q{degree}_u{u}_l{level}.{ext}", cfg.problem));
        write_mesh_file(&path, format, &mesh).map_err(|e| format!("{}: {e}", path.display()))?;
        eprintln!("{}: {} cells, {} nodes", path.display(), mesh.n_cells(), mesh.n_nodes());
    }
    Ok(())
}

fn write_mesh_file(path: &Path, format: MeshFormat, mesh: &perturbfem::Mesh) -> io::Result<()> {
    let w = BufWriter::new(File::create(path)?);
    match format {
        MeshFormat::Vtk => write_vtk(mesh, &[], w),
        MeshFormat::Text => write_mesh_text(mesh, w),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Analytic { config, json } => {
            if let Some(path) = config {
                if let Err(e) = StudyConfig::from_path(&path) {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            }
            return cmd_analytic(json);
        }
        Command::Study(args) => build_config(&args).and_then(|c| cmd_study(&c)),
        Command::Hausdorff { common, samples } => build_config(&common).and_then(|c| cmd_hausdorff(&c, samples)),
        Command::Mesh { common, format } => build_config(&common).and_then(|c| cmd_mesh(&c, format)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
