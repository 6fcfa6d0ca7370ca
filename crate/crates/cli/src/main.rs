use clap::{Args, Parser, Subcommand};
use matura::calibration::{fit_material, fit_weibull, FitProblem, FitSeries};
use matura::fem::{march_maturation_with, Bvp, Phase};
use matura::io::{self, FitBlock, MeshSource, Mode, RunConfig};
use matura::matpoint::{solve_mixed_point, unloaded_maturation};
use matura::growth::GrowthState;
use matura::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Collagen maturation in textile-reinforced tissue constructs.
#[derive(Parser, Debug)]
#[command(name = "matura", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Drive a single material point through a load program.
    Matpoint(RunArgs),
    /// Unloaded density trajectory of a single material point.
    Grow(RunArgs),
    /// Calibrate the Weibull law or material parameters against CSV data.
    Fit(RunArgs),
    /// Pressure ramp followed by maturation on a hex8 mesh.
    Fem(RunArgs),
    /// Write a structured strip mesh as JSON.
    StripMesh(StripArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    #[arg(long, value_name = "DIR", default_value = "matura-out")]
    out: PathBuf,
    #[arg(long)]
    quiet: bool,
}

#[derive(Args, Debug)]
struct StripArgs {
    /// Length along x, mm.
    #[arg(long)]
    l: f64,
    /// Width along y, mm.
    #[arg(long)]
    w: f64,
    /// Thickness along z, mm.
    #[arg(long)]
    t: f64,
    #[arg(long)]
    nx: usize,
    #[arg(long)]
    ny: usize,
    #[arg(long)]
    nz: usize,
    #[arg(long, value_name = "DIR", default_value = "matura-out")]
    out: PathBuf,
    #[arg(long)]
    quiet: bool,
}

/// Exit 1 for anything the user can fix in the invocation or inputs, 2 when
/// a solver gives up.
fn exit_code(e: &Error) -> u8 {
    if e.is_solver_failure() {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cmd: Command) -> matura::Result<()> {
    match cmd {
        Command::Matpoint(a) => with_config(a, Mode::Matpoint, matpoint),
        Command::Grow(a) => with_config(a, Mode::Grow, grow),
        Command::Fit(a) => with_config(a, Mode::Fit, fit),
        Command::Fem(a) => with_config(a, Mode::Fem, fem),
        Command::StripMesh(a) => {
            let mesh = matura::fem::Mesh::strip(a.l, a.w, a.t, a.nx, a.ny, a.nz)?;
            create_dir(&a.out)?;
            let path = a.out.join("mesh.json");
            let text = serde_json::to_string_pretty(&mesh).expect("mesh serializes");
            io::write_atomic(&path, text.as_bytes())?;
            if !a.quiet {
                eprintln!("{} nodes, {} elements -> {}", mesh.n_nodes(), mesh.n_elements(), path.display());
            }
            Ok(())
        }
    }
}

struct Run {
    cfg: RunConfig,
    base: PathBuf,
    out: PathBuf,
    quiet: bool,
}

impl Run {
    fn input(&self, rel: &str) -> PathBuf {
        self.base.join(rel)
    }

    fn write(&self, name: &str, text: &str) -> matura::Result<()> {
        let p = self.out.join(name);
        io::write_atomic(&p, text.as_bytes())?;
        if !self.quiet {
            eprintln!("wrote {}", p.display());
        }
        Ok(())
    }
}

fn with_config(a: RunArgs, mode: Mode, f: fn(&Run) -> matura::Result<()>) -> matura::Result<()> {
    let text = io::read_text(&a.config)?;
    let cfg = io::parse_config(&text)?;
    if cfg.mode != mode {
        return Err(Error::Config {
            path: "mode".into(),
            message: format!("config is for {:?}, not {mode:?}", cfg.mode).to_lowercase(),
        });
    }
    create_dir(&a.out)?;
    let run = Run {
        base: a.config.parent().map(Path::to_path_buf).unwrap_or_default(),
        out: a.out,
        quiet: a.quiet,
        cfg,
    };
    run.write("config.json", &run.cfg.dump())?;
    f(&run)
}

fn create_dir(p: &Path) -> matura::Result<()> {
    std::fs::create_dir_all(p).map_err(|source| Error::Io {
        path: p.display().to_string(),
        source,
    })
}

fn matpoint(r: &Run) -> matura::Result<()> {
    let program = r.cfg.program.as_ref().expect("validated");
    let recs = solve_mixed_point(program, &r.cfg.material, &GrowthState::with_density(r.cfg.initial_density))?;
    r.write("point.csv", &io::point_records_csv(&recs))
}

fn grow(r: &Run) -> matura::Result<()> {
    let m = r.cfg.maturation.expect("validated");
    let recs = unloaded_maturation(&r.cfg.material, m.t_end, m.dt)?;
    if !r.quiet {
        if let Some(last) = recs.last() {
            eprintln!("rho({}) = {}", last.time, last.rho);
        }
    }
    r.write("trajectory.csv", &io::trajectory_csv(&recs))
}

fn fit(r: &Run) -> matura::Result<()> {
    let json = match r.cfg.fit.as_ref().expect("validated") {
        FitBlock::Weibull { data } => {
            let series = io::parse_series(&io::read_text(&r.input(data))?)?;
            let w = fit_weibull(&series)?;
            if !r.quiet {
                eprintln!("tau = {}, h = {}, rms = {}", w.tau, w.h, w.rms);
            }
            serde_json::to_string_pretty(&w)
        }
        FitBlock::Material {
            parameters,
            initial,
            lower,
            upper,
            series,
            optimizer,
        } => {
            let series = series
                .iter()
                .map(|s| {
                    Ok(FitSeries {
                        label: s.label.clone(),
                        model: s.model.clone(),
                        data: io::parse_series(&io::read_text(&r.input(&s.data))?)?,
                    })
                })
                .collect::<matura::Result<Vec<_>>>()?;
            let problem = FitProblem {
                parameters: parameters.clone(),
                initial: initial.clone(),
                lower: lower.clone(),
                upper: upper.clone(),
                base: r.cfg.material,
                series,
                optimizer: optimizer.clone(),
            };
            let rep = fit_material(&problem)?;
            if !r.quiet {
                for (n, v) in rep.parameters.iter().zip(&rep.values) {
                    eprintln!("{n} = {v}");
                }
                eprintln!("objective = {}, converged = {}", rep.objective, rep.converged);
            }
            serde_json::to_string_pretty(&rep)
        }
    }
    .expect("report serializes");
    r.write("fit.json", &(json + "\n"))
}

fn fem(r: &Run) -> matura::Result<()> {
    let block = r.cfg.fem.as_ref().expect("validated");
    let mesh = match &block.mesh {
        MeshSource::Strip(s) => s.build()?,
        MeshSource::File { path } => io::parse_mesh(&io::read_text(&r.input(path))?)?,
    };
    let bvp = Bvp {
        mesh,
        dirichlet: block.dirichlet.clone(),
        pressure: block.pressure.clone(),
        material: r.cfg.material,
        initial_density: r.cfg.initial_density,
        schedule: block.schedule.clone(),
        solver: block.solver,
    };
    let quiet = r.quiet;
    let hist = march_maturation_with(&bvp, |s| {
        if !quiet && (s.phase == Phase::Ramp || s.t.fract() == 0.0) {
            eprintln!(
                "{:?} t = {:8.4} load = {:.3} deflection = {:.6} rho = [{:.4}, {:.4}] ({} it)",
                s.phase, s.t, s.load_factor, s.max_deflection, s.rho_min, s.rho_max, s.iterations
            );
        }
    })?;
    r.write("deflection.csv", &io::step_records_csv(&hist.steps))?;
    if block.vtk {
        for (k, snap) in hist.snapshots.iter().enumerate() {
            let name = format!("snapshot_{k:03}.vtk");
            io::write_vtk(&r.out.join(&name), &bvp.mesh, snap)?;
            if !quiet {
                eprintln!("wrote {} (t = {})", r.out.join(&name).display(), snap.t);
            }
        }
    }
    Ok(())
}
