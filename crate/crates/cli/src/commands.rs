use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use cavity_core::io::{
    read_trace, write_field_csv, write_field_pgm, write_trace, GammaChoice, RunConfig,
};
use cavity_core::phantom::{add_noise, inclusion_recovery, render_phantom, support_overlap};
use cavity_core::recon::{error_history, neumann_iterate, ReconReport};
use cavity_core::spectral::synthesize_data;
use cavity_core::{BoundarySpec, BoundaryTrace, Error, Grid2D, Result, ScalarField};

use crate::Demo;

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn save_field(dir: &Path, stem: &str, f: &ScalarField) -> Result<()> {
    write_field_csv(dir.join(format!("{stem}.csv")), f)?;
    write_field_pgm(dir.join(format!("{stem}.pgm")), f)
}

pub fn phantom(cfg: &RunConfig) -> Result<()> {
    let grid = cfg.grid()?;
    let f = render_phantom(&cfg.bump_list(), &grid)?;
    ensure_dir(&cfg.out)?;
    save_field(&cfg.out, "phantom", &f)?;
    println!("wrote {}", cfg.out.join("phantom.{csv,pgm}").display());
    Ok(())
}

/// Spectral data on Γ plus optional noise; returns the clean phantom, the
/// (possibly noisy) trace and the realised noise ratio.
fn measure(cfg: &RunConfig, grid: &Grid2D, bspec: &BoundarySpec) -> Result<(ScalarField, BoundaryTrace, f64)> {
    let f = render_phantom(&cfg.bump_list(), grid)?;
    let clean = synthesize_data(&f, &ScalarField::constant(grid, 1.0), bspec, cfg.t_final)?;
    let noisy = add_noise(&clean, bspec, cfg.noise, cfg.seed)?;
    let mut diff = noisy.clone();
    diff.add_scaled(-1.0, &clean);
    let ratio = if cfg.noise > 0.0 { diff.norm() / clean.norm() } else { 0.0 };
    Ok((f, noisy, ratio))
}

pub fn forward(cfg: &RunConfig) -> Result<()> {
    let grid = cfg.grid()?;
    let bspec = cfg.boundary_spec(&grid)?;
    let (_, trace, ratio) = measure(cfg, &grid, &bspec)?;
    ensure_dir(&cfg.out)?;
    write_trace(cfg.out.join("trace.csv"), &trace)?;
    let metrics = format!(
        "noise_ratio={ratio:.12} noise={} seed={} steps={} nodes={} dt={}\n",
        cfg.noise,
        cfg.seed,
        trace.steps(),
        grid.boundary_len(),
        grid.dt()
    );
    write_text(&cfg.out.join("trace.metrics"), &metrics)?;
    print!("{metrics}");
    Ok(())
}

pub fn reconstruct(cfg: &RunConfig, trace_path: &Path, with_reference: bool) -> Result<()> {
    let grid = cfg.grid()?;
    let bspec = cfg.boundary_spec(&grid)?;
    let trace = read_trace(trace_path, &grid)?;
    let reference = if with_reference {
        Some(render_phantom(&cfg.bump_list(), &grid)?)
    } else {
        None
    };
    let rcfg = cfg.recon_config(&bspec).with_history(true);
    let report = neumann_iterate(&trace, &rcfg, reference.as_ref())?;
    ensure_dir(&cfg.out)?;
    let summary = save_report(&cfg.out, &report, reference.as_ref())?;
    print!("{summary}");
    Ok(())
}

/// Central horizontal row (`y` nearest 0) of each field.
fn cross_section(columns: &[(String, &ScalarField)]) -> String {
    let grid = columns[0].1.grid();
    let n = grid.n();
    let j = n.div_ceil(2);
    let mut out = String::from("x");
    for (name, _) in columns {
        write!(out, ",{name}").unwrap();
    }
    out.push('\n');
    for i in 1..=n {
        write!(out, "{}", grid.coord(i)).unwrap();
        for (_, f) in columns {
            write!(out, ",{}", f.values()[[i, j]]).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Writes the estimate, error table and cross sections; returns the
/// human-readable summary.
fn save_report(dir: &Path, report: &ReconReport, reference: Option<&ScalarField>) -> Result<String> {
    save_field(dir, "reconstruction", &report.estimate.first)?;
    let mut summary = String::new();
    if let Some(r) = reference {
        let mut table = String::from("iteration,relative_l2_error\n");
        for (k, e) in error_history(report)? {
            writeln!(table, "{k},{e}").unwrap();
            writeln!(summary, "  u^({k}) relative L2 error {:.2}%", 100.0 * e).unwrap();
        }
        write_text(&dir.join("errors.csv"), &table)?;
        save_field(dir, "phantom", r)?;
    }
    let mut columns: Vec<(String, &ScalarField)> = Vec::new();
    if let Some(r) = reference {
        columns.push(("phantom".into(), r));
    }
    for (k, u) in report.iterates.iter().enumerate() {
        columns.push((format!("u{}", k + 1), &u.first));
    }
    if !columns.is_empty() {
        write_text(&dir.join("cross_section.csv"), &cross_section(&columns))?;
    }
    Ok(summary)
}

fn gamma_label(g: GammaChoice) -> &'static str {
    match g {
        GammaChoice::Full => "full",
        GammaChoice::LeftBottom => "left_bottom",
        GammaChoice::Nodes => "nodes",
    }
}

fn run_case(cfg: &RunConfig, dir: &Path, out: &mut String) -> Result<()> {
    let grid = cfg.grid()?;
    let bspec = cfg.boundary_spec(&grid)?;
    let (f, trace, ratio) = measure(cfg, &grid, &bspec)?;
    let rcfg = cfg.recon_config(&bspec).with_history(true);
    let report = neumann_iterate(&trace, &rcfg, Some(&f))?;
    ensure_dir(dir)?;
    write_trace(dir.join("trace.csv"), &trace)?;
    writeln!(
        out,
        "gamma={} n={} T={} dt={} iterations={} subspace={} noise={}",
        gamma_label(cfg.gamma),
        cfg.n,
        cfg.t_final,
        grid.dt(),
        cfg.iterations,
        cfg.subspace.name(),
        cfg.noise
    )
    .unwrap();
    if cfg.noise > 0.0 {
        writeln!(out, "  realised noise ratio {ratio:.6}").unwrap();
    }
    out.push_str(&save_report(dir, &report, Some(&f))?);
    if cfg.noise > 0.0 {
        let dice = support_overlap(&report.estimate.first, &f)?;
        let rec = inclusion_recovery(&report.estimate.first, &cfg.bump_list());
        let worst = rec.iter().copied().fold(f64::INFINITY, f64::min);
        writeln!(out, "  half-max support overlap {dice:.3}, worst inclusion recovery {worst:.3}").unwrap();
    }
    Ok(())
}

pub fn demo(which: Demo, cfg: &RunConfig) -> Result<()> {
    let root: PathBuf = cfg.out.join(which.name());
    let mut out = format!("{}\n", which.name());
    if which == Demo::Fig2Noise {
        for (label, gamma) in [("full", GammaChoice::Full), ("partial", GammaChoice::LeftBottom)] {
            let mut case = cfg.clone();
            case.gamma = gamma;
            run_case(&case, &root.join(label), &mut out)?;
        }
    } else {
        run_case(cfg, &root, &mut out)?;
    }
    write_text(&root.join("summary.txt"), &out)?;
    print!("{out}");
    Ok(())
}
