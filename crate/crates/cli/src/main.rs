use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use kasar::io::dataset::{
    atomic_write, load_image, load_phase_history, load_spectrum, save_image, save_phase_history, save_spectrum,
};
use kasar::io::{export_magnitude, focus_metrics, Config, Provenance};
use kasar::pfa::{form_image, polar_format, wavenumber_scale};
use kasar::pipeline::{autofocus, measure_residual_rcm, Mode};
use kasar::structure::{necessity_limits, resolution_boundary, LimitKind};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "kasar", version, about = "Spotlight SAR simulation, polar-format imaging and 2-D autofocus")]
struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scene, geometry and error model to a phase history.
    Simulate {
        #[arg(long)]
        out: PathBuf,
        /// Leave out the configured range error.
        #[arg(long)]
        clean: bool,
    },
    /// Phase history to spectrum and image.
    Pfa {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        spectrum: PathBuf,
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        pgm: Option<PathBuf>,
    },
    /// Spectrum to refocused image and report.
    Autofocus {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        mode: Option<Mode>,
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        pgm: Option<PathBuf>,
    },
    /// Necessity limits for a resolution and quadratic coefficient.
    Limits {
        /// Azimuth resolution, m.
        #[arg(long)]
        res: f64,
        /// Range resolution, m; defaults to `--res`.
        #[arg(long)]
        res_y: Option<f64>,
        /// Quadratic APE coefficient, rad/(rad/m)².
        #[arg(long)]
        coeff: f64,
    },
    /// Focus metrics of an image.
    Metrics {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Spectrum to measure residual migration on.
        #[arg(long)]
        spectrum: Option<PathBuf>,
    },
    /// Prints the effective configuration.
    Config,
}

fn usage_error(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        matches!(
            c.downcast_ref::<kasar::Error>(),
            Some(kasar::Error::Config(_) | kasar::Error::KindMismatch { .. } | kasar::Error::UnknownKind(_))
        )
    })
}

fn load_config(cli: &Cli) -> Result<Config> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => Config::default(),
    };
    Ok(match cli.seed {
        Some(s) => cfg.with_seed(s),
        None => cfg,
    })
}

fn write_json<T: serde::Serialize>(path: &Path, v: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    atomic_write(path, text.as_bytes())?;
    Ok(())
}

/// Runs a command and returns what it prints.
fn run(cli: Cli) -> Result<String> {
    let mut text = String::new();
    let cfg = load_config(&cli)?;
    let prov = Provenance::from_config_text(&cfg.to_toml());
    match cli.command {
        Command::Simulate { out, clean } => {
            let ph = cfg.simulate_with(!clean)?;
            save_phase_history(&out, &ph, &prov)?;
            writeln!(text, "phase history {}×{} -> {}", ph.data.nrows(), ph.data.ncols(), out.display())?;
        }
        Command::Pfa { input, spectrum, image, pgm } => {
            let ph = load_phase_history(&input)?;
            let spec = polar_format(&ph, &cfg.pfa.pfa_config())?;
            let img = form_image(&spec, cfg.pfa.taper);
            save_spectrum(&spectrum, &spec, &prov)?;
            save_image(&image, &img, &prov)?;
            if let Some(p) = pgm {
                export_magnitude(&img, &p, cfg.output.dynamic_range_db)?;
            }
            writeln!(text, "spectrum -> {}\nimage -> {}", spectrum.display(), image.display())?;
        }
        Command::Autofocus { input, mode, image, report, pgm } => {
            let spec = load_spectrum(&input)?;
            let mut pc = cfg.autofocus;
            if let Some(m) = mode {
                pc.mode = m;
            }
            let (img, rep) = autofocus(&spec, &pc)?;
            save_image(&image, &img, &prov)?;
            if let Some(p) = report {
                write_json(&p, &rep)?;
            }
            if let Some(p) = pgm {
                export_magnitude(&img, &p, cfg.output.dynamic_range_db)?;
            }
            write!(text, "{}", rep.to_text())?;
        }
        Command::Limits { res, res_y, coeff } => {
            let geo = cfg.flight_geometry()?;
            let y0 =
                wavenumber_scale(geo.sin_ref(), cfg.radar_params()?.propagation_speed) * cfg.radar.center_frequency;
            let r = necessity_limits(res, res_y.unwrap_or(res), y0, coeff)?;
            writeln!(text, "rho_x {:.4} m, rho_y {:.4} m, Y0 {:.3} rad/m", r.rho_x, r.rho_y, r.y0)?;
            writeln!(text, "a_ape     {:.6e}", r.limits.a_ape)?;
            writeln!(text, "a_rcm     {:.6e}", r.limits.a_rcm)?;
            writeln!(text, "a_defocus {:.6e}", r.limits.a_defocus)?;
            writeln!(text, "coefficient {:.6e} -> region {}", r.coefficient, r.region)?;
            if coeff > 0.0 {
                for (name, kind) in [("ape", LimitKind::Ape), ("rcm", LimitKind::Rcm), ("defocus", LimitKind::Defocus)]
                {
                    writeln!(text, "boundary {name:<8} rho = {:.4} m", resolution_boundary(kind, coeff, y0)?)?;
                }
            }
            let coeffs = [1e-3, 1e-2, 1e-1, 1.0, 10.0];
            write!(text, "\n{:>8}", "rho\\a")?;
            for a in coeffs {
                write!(text, "{a:>14.0e}")?;
            }
            writeln!(text)?;
            for rho in [0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 1.0] {
                write!(text, "{rho:>8.2}")?;
                for a in coeffs {
                    write!(text, "{:>14}", necessity_limits(rho, rho, y0, a)?.region.to_string())?;
                }
                writeln!(text)?;
            }
        }
        Command::Metrics { input, out, spectrum } => {
            let img = load_image(&input)?;
            let m = &cfg.output.metrics;
            let mut fm = focus_metrics(&img, m.targets, m.radius, m.upsample)?;
            if let Some(p) = spectrum {
                fm.residual_rcm_cells = Some(measure_residual_rcm(&load_spectrum(&p)?, &cfg.autofocus.estimators)?);
            }
            if let Some(p) = out {
                write_json(&p, &fm)?;
            }
            writeln!(text, "{}", serde_json::to_string_pretty(&fm)?)?;
        }
        Command::Config => text.push_str(&cfg.to_toml()),
    }
    Ok(text)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(text) => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
            _ => ExitCode::SUCCESS,
        },
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if usage_error(&e) { 2 } else { 1 })
        }
    }
}
