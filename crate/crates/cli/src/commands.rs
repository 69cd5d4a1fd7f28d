//! Subcommand argument types (clap derive) and implementations. Each command
//! returns its JSON report; `main` prints it to stdout and maps errors to
//! exit codes.

use crate::config::{config_hash, ExperimentConfig};
use crate::mapio::{build_domain, load_map, save_map};
use crate::report::{fmt_f64, measured, transform_json, write_csv, write_json};
use crate::{verify, CliError};
use clap::{Args, Parser, Subcommand};
use fitting::{
    bubble_normalize, deficit_flow, fit_moebius, normalize_projection, BubbleConfig, FitConfig,
    FlowConfig, NormalizeConfig, Orientation,
};
use functionals::{deficit, degree_sphere_valued, dirichlet_energy, local_degree_field, volume};
use quadratics::{
    coercivity_spectrum, fz_lower_expansion, kernel_spectrum, polynomial_coercivity_spectrum,
    volume_expansion, QuadraticAssembly, SpectrumReport,
};
use serde_json::{json, Value};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "deficit",
    about = "Conformal isoperimetric deficit toolkit for maps of S^{n-1} into R^n"
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Conformal Dirichlet energy and signed volume of a map.
    Energy(MapArgs),
    /// Full energy report including the isoperimetric deficit.
    Deficit(MapArgs),
    /// Topological degree and a local degree field on a probe grid.
    Degree(MapArgs),
    /// Best Moebius-transform fit in the gradient distance.
    Fit(FitArgs),
    /// Kernel-projection normalization (group Newton, lambda, remainder w).
    Normalize(MapArgs),
    /// Bubble normalization of a concentrated map.
    Bubble(BubbleArgs),
    /// Eigenvalues of the stability quadratic form.
    Spectrum(SpectrumArgs),
    /// Gradient flow of the deficit with a trajectory table.
    Flow(FlowArgs),
    /// Volume expansion of id + w into the elementary symmetric terms.
    #[command(alias = "expand_volume")]
    ExpandVolume(ExpandArgs),
    /// Run the acceptance suite and report one pass/fail line per criterion.
    Verify(VerifyArgs),
}

#[derive(Args)]
pub struct MapArgs {
    /// Map JSON file ({"domain": ..., "values": [[...]]}).
    #[arg(long)]
    pub map: PathBuf,
    /// Output directory for report files.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct FitArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for the multistart sampler.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of descent starts.
    #[arg(long)]
    pub multistarts: Option<usize>,
    /// Restrict the search to the orientation-preserving component.
    #[arg(long)]
    pub preserving: bool,
}

#[derive(Args)]
pub struct BubbleArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Covering count (target share 1/(k+1) of the energy).
    #[arg(long)]
    pub k: Option<usize>,
    /// Override of the target energy share, in (0, 1/2].
    #[arg(long)]
    pub fraction: Option<f64>,
}

#[derive(Args)]
pub struct SpectrumArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value = "mesh")]
    pub backend: String,
    /// Mesh subdivision level.
    #[arg(long)]
    pub level: Option<u32>,
    /// Chart grid resolution.
    #[arg(long)]
    pub resolution: Option<u32>,
    /// Number of eigenvalues.
    #[arg(short, default_value_t = 6)]
    pub m: usize,
    /// Kernel spectrum (mean/radial deflation only) instead of coercivity.
    #[arg(long)]
    pub kernel: bool,
    /// Polynomial ansatz degree for chart backends.
    #[arg(long, default_value_t = 3)]
    pub degree: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct FlowArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub step_size: Option<f64>,
}

#[derive(Args)]
pub struct ExpandArgs {
    /// Displacement field w as a map JSON file.
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also report the pointwise lower-expansion margin at this kappa
    /// (candidate constant kappa/2).
    #[arg(long)]
    pub kappa: Option<f64>,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Experiment configuration file (flat key = value text).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated criterion numbers to run (default: all).
    #[arg(long)]
    pub criteria: Option<String>,
}

fn ensure_out(dir: &Option<PathBuf>) -> Result<Option<PathBuf>, CliError> {
    if let Some(d) = dir {
        std::fs::create_dir_all(d)
            .map_err(|e| CliError::Io(format!("{}: {e}", d.display())))?;
        Ok(Some(d.clone()))
    } else {
        Ok(None)
    }
}

fn maybe_write(out: &Option<PathBuf>, name: &str, v: &Value) -> Result<(), CliError> {
    if let Some(dir) = out {
        write_json(&dir.join(name), v)?;
    }
    Ok(())
}

pub fn cmd_energy(args: &MapArgs) -> Result<Value, CliError> {
    let u = load_map(&args.map)?;
    let out = ensure_out(&args.out)?;
    let report = json!({
        "command": "energy",
        "map": args.map.display().to_string(),
        "dirichlet": measured(dirichlet_energy(&u), 1e-3),
        "volume": measured(volume(&u), 1e-3),
    });
    maybe_write(&out, "energy.json", &report)?;
    Ok(report)
}

pub fn cmd_deficit(args: &MapArgs) -> Result<Value, CliError> {
    let u = load_map(&args.map)?;
    let out = ensure_out(&args.out)?;
    let rep = deficit(&u);
    let report = json!({
        "command": "deficit",
        "map": args.map.display().to_string(),
        "dirichlet": measured(rep.dirichlet, 1e-3),
        "volume": measured(rep.volume, 1e-3),
        "deficit": measured(rep.deficit, 2e-3),
        "deficit_infinite": rep.deficit_infinite,
        "mean": rep.mean,
        "mean_curvature": measured(rep.mean_curvature, 1e-2),
    });
    maybe_write(&out, "deficit.json", &report)?;
    Ok(report)
}

pub fn cmd_degree(args: &MapArgs) -> Result<Value, CliError> {
    let u = load_map(&args.map)?;
    let out = ensure_out(&args.out)?;
    let n = u.n();
    let rep = deficit(&u);
    let scale = rep.volume.abs().max(1e-12).powf(1.0 / n as f64);
    // Probe grid: the image mean, plus +-r * scale along each axis for radii
    // inside (0.5) and outside (1.5) the expected image sphere.
    let mut grid = vec![rep.mean.clone()];
    for &r in &[0.5, 1.5] {
        for a in 0..n {
            for s in [-1.0, 1.0] {
                let mut p = rep.mean.clone();
                p[a] += s * r * scale;
                grid.push(p);
            }
        }
    }
    let field = local_degree_field(&u, &grid);
    let sphere_degree = degree_sphere_valued(&u).ok();
    let rows: Vec<Vec<String>> = (0..grid.len())
        .map(|i| {
            let mut row: Vec<String> = grid[i].iter().map(|&c| fmt_f64(c)).collect();
            row.push(fmt_f64(field.raw[i]));
            row.push(field.degree[i].to_string());
            row.push(field.flagged[i].to_string());
            row.push(fmt_f64(field.r_min));
            row
        })
        .collect();
    if let Some(dir) = &out {
        let mut header: Vec<&str> = vec!["x0", "x1", "x2", "x3", "x4"][..n].to_vec();
        header.extend_from_slice(&["raw", "degree", "flagged", "tube_radius"]);
        write_csv(&dir.join("degree_field.csv"), &header, &rows)?;
    }
    let report = json!({
        "command": "degree",
        "map": args.map.display().to_string(),
        "volume": measured(rep.volume, 0.05),
        "sphere_valued_degree": sphere_degree,
        "tube_radius": field.r_min,
        "points": grid.len(),
        "flagged": field.flagged.iter().filter(|&&f| f).count(),
        "degrees": field.degree,
    });
    maybe_write(&out, "degree.json", &report)?;
    Ok(report)
}

pub fn cmd_fit(args: &FitArgs) -> Result<Value, CliError> {
    let u = load_map(&args.map)?;
    let out = ensure_out(&args.out)?;
    let mut cfg = FitConfig::default();
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(m) = args.multistarts {
        cfg.multistarts = m;
    }
    if args.preserving {
        cfg.orientation = Orientation::Preserving;
    }
    let fit = fit_moebius(&u, &cfg)?;
    let report = json!({
        "command": "fit",
        "map": args.map.display().to_string(),
        "seed": cfg.seed,
        "transform": transform_json(&fit.transform),
        "scale": fit.scale,
        "distance": measured(fit.distance, 5e-3),
        "deficit": measured(fit.deficit, 2e-3),
        "ratio": fit.ratio,
        "iterations": fit.iterations,
        "multistart_index": fit.multistart_index,
        "converged": fit.converged,
        "grad_norm": measured(fit.grad_norm, cfg.grad_tol),
    });
    maybe_write(&out, "fit.json", &report)?;
    Ok(report)
}

pub fn cmd_normalize(args: &MapArgs) -> Result<Value, CliError> {
    let u = load_map(&args.map)?;
    let out = ensure_out(&args.out)?;
    let cfg = NormalizeConfig::default();
    let r = normalize_projection(&u, &cfg)?;
    let wnorm = u.domain().w12_product(r.w.values(), r.w.values()).sqrt();
    let report = json!({
        "command": "normalize",
        "map": args.map.display().to_string(),
        "psi": transform_json(&r.psi),
        "lambda": measured(r.lambda, 1e-6),
        "projection_residual": measured(r.projection_residual, cfg.proj_tol),
        "w_norm_w12": wnorm,
    });
    if let Some(dir) = &out {
        save_map(&r.w, &dir.join("w.json"))?;
    }
    maybe_write(&out, "normalize.json", &report)?;
    Ok(report)
}

pub fn cmd_bubble(args: &BubbleArgs) -> Result<Value, CliError> {
    let u = load_map(&args.map)?;
    let out = ensure_out(&args.out)?;
    let mut cfg = BubbleConfig::default();
    if let Some(k) = args.k {
        cfg.k = k;
    }
    cfg.fraction = args.fraction;
    let b = bubble_normalize(&u, &cfg)?;
    let report = json!({
        "command": "bubble",
        "map": args.map.display().to_string(),
        "pole": b.pole,
        "center": b.center,
        "radius": b.radius,
        "k": b.k,
        "fraction": b.fraction,
        "transform": transform_json(&b.transform),
        "total_energy": b.total_energy,
        "cap_s": b.cap_s,
        "cap_energies": b.cap_energies,
        "window": [b.window.0, b.window.1],
    });
    if let Some(dir) = &out {
        save_map(&b.normalized, &dir.join("normalized.json"))?;
    }
    maybe_write(&out, "bubble.json", &report)?;
    Ok(report)
}

fn spectrum_json(cmdline: &str, rep: &SpectrumReport) -> Value {
    json!({
        "command": cmdline,
        "n": rep.n,
        "backend": rep.backend,
        "num_nodes": rep.num_nodes,
        "eigenvalues": rep.eigenvalues,
        "residuals": rep.residuals,
        "residual_tol": 1e-6,
        "iterations": rep.iterations,
    })
}

pub fn cmd_spectrum(args: &SpectrumArgs) -> Result<Value, CliError> {
    let out = ensure_out(&args.out)?;
    let dom = build_domain(args.n, &args.backend, args.level, args.resolution)?;
    let rep = match args.backend.as_str() {
        "mesh" => {
            let asm = QuadraticAssembly::assemble(dom)?;
            if args.kernel {
                kernel_spectrum(&asm, args.m)?
            } else {
                coercivity_spectrum(&asm, args.m)?
            }
        }
        _ => {
            if args.kernel {
                return Err(CliError::Domain(
                    "kernel spectrum is available on the mesh backend only".into(),
                ));
            }
            polynomial_coercivity_spectrum(&dom, args.degree, args.m)?
        }
    };
    let report = spectrum_json("spectrum", &rep);
    maybe_write(&out, "spectrum.json", &report)?;
    Ok(report)
}

pub fn cmd_flow(args: &FlowArgs) -> Result<Value, CliError> {
    let u = load_map(&args.map)?;
    let out = ensure_out(&args.out)?;
    let mut cfg = FlowConfig::default();
    if let Some(s) = args.steps {
        cfg.steps = s;
    }
    if let Some(s) = args.step_size {
        cfg.step_size = s;
    }
    let r = deficit_flow(&u, &cfg)?;
    let last = r.trajectory.len() - 1;
    let rows: Vec<Vec<String>> = r
        .trajectory
        .iter()
        .enumerate()
        .map(|(i, rep)| {
            vec![
                i.to_string(),
                fmt_f64(rep.dirichlet),
                fmt_f64(rep.volume),
                fmt_f64(rep.deficit),
                // The Euler-Lagrange residual is solved for once, at the end.
                if i == last { fmt_f64(r.final_residual) } else { String::new() },
                fmt_f64(cfg.slack),
            ]
        })
        .collect();
    if let Some(dir) = &out {
        write_csv(
            &dir.join("trajectory.csv"),
            &["step", "dirichlet", "volume", "deficit", "residual", "slack"],
            &rows,
        )?;
        save_map(&r.final_map, &dir.join("final.json"))?;
    }
    let report = json!({
        "command": "flow",
        "map": args.map.display().to_string(),
        "steps_taken": r.steps_taken,
        "initial_deficit": measured(r.trajectory[0].deficit, cfg.slack),
        "final_deficit": measured(r.trajectory[last].deficit, cfg.slack),
        "final_residual": r.final_residual,
    });
    maybe_write(&out, "flow.json", &report)?;
    Ok(report)
}

pub fn cmd_expand_volume(args: &ExpandArgs) -> Result<Value, CliError> {
    let w = load_map(&args.map)?;
    let out = ensure_out(&args.out)?;
    let e = volume_expansion(&w);
    let rows: Vec<Vec<String>> = (0..e.terms.len())
        .map(|k| {
            vec![
                (k + 1).to_string(),
                fmt_f64(e.terms[k]),
                fmt_f64(e.integral_terms[k]),
                fmt_f64(1e-8),
            ]
        })
        .collect();
    if let Some(dir) = &out {
        write_csv(&dir.join("expansion.csv"), &["k", "term", "integral_term", "tol"], &rows)?;
    }
    let mut report = json!({
        "command": "expand_volume",
        "map": args.map.display().to_string(),
        "terms": e.terms,
        "integral_terms": e.integral_terms,
        "sum": e.sum,
        "volume": e.volume,
        "identity_defect": measured(e.identity_defect, 1e-8),
    });
    if let Some(kappa) = args.kappa {
        let margin = fz_lower_expansion(&w, kappa, 0.5 * kappa);
        report["lower_expansion"] = json!({
            "kappa": margin.kappa,
            "c_candidate": margin.c_candidate,
            "min_margin": margin.min_margin,
            "integrated_residual": margin.integrated_residual,
        });
    }
    maybe_write(&out, "expand_volume.json", &report)?;
    Ok(report)
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<Value, CliError> {
    let cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let seed = args.seed.unwrap_or(cfg.seed);
    let text = cfg.to_text();
    eprintln!("config hash {:016x}, seed {}", config_hash(&text), seed);
    let selection: Option<Vec<usize>> = match &args.criteria {
        None => None,
        Some(list) => Some(
            list.split(',')
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| CliError::Io(format!("bad criterion number {s:?}")))
                })
                .collect::<Result<_, _>>()?,
        ),
    };
    let out = ensure_out(&args.out)?;
    let outcomes = verify::run(seed, selection.as_deref());
    let mut all_pass = true;
    for o in &outcomes {
        println!("{}", o.line());
        all_pass &= o.passed;
    }
    let report = json!({
        "command": "verify",
        "seed": seed,
        "config_hash": format!("{:016x}", config_hash(&text)),
        "criteria": outcomes.iter().map(|o| json!({
            "index": o.index,
            "name": o.name,
            "passed": o.passed,
            "details": o.details,
            "seconds": o.seconds,
        })).collect::<Vec<_>>(),
        "all_passed": all_pass,
    });
    maybe_write(&out, "verify.json", &report)?;
    if !all_pass {
        return Err(CliError::Domain("one or more acceptance criteria failed".into()));
    }
    Ok(report)
}

/// Dispatch a parsed command line.
pub fn run(cli: &Cli) -> Result<Value, CliError> {
    match &cli.cmd {
        Command::Energy(a) => cmd_energy(a),
        Command::Deficit(a) => cmd_deficit(a),
        Command::Degree(a) => cmd_degree(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Normalize(a) => cmd_normalize(a),
        Command::Bubble(a) => cmd_bubble(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Flow(a) => cmd_flow(a),
        Command::ExpandVolume(a) => cmd_expand_volume(a),
        Command::Verify(a) => cmd_verify(a),
    }
}
