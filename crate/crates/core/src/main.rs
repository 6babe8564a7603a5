use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use systl::generators::{Family, FamilySpec};
use systl::harness::{self, exit_code, read_familyspec, read_grid, run_family, HarnessError, DEFAULT_CONSTANT};
use systl::homology::build_basis;
use systl::mesh::{load_mesh, write_smesh, EmbeddedMesh, MeshFormat};
use systl::sweep::{self, Axis, TraceOptions, DEFAULT_SAMPLES};
use systl::systole::{brute_force_systole, shortest_nonseparating};
use systl::Error;

#[derive(Parser)]
#[command(name = "systl", version, about = "Systoles and level-set sweeps on triangulated surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a mesh from a named family.
    Gen {
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        refine: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Vertex jitter as a fraction of the minimum edge length.
        #[arg(long, default_value_t = 0.0)]
        jitter: f64,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 2.0)]
        major: f64,
        #[arg(long, default_value_t = 0.5)]
        minor: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Shortest non-separating cycle.
    Systole {
        file: PathBuf,
        /// Also run the exhaustive search and compare (E ≤ 30 only).
        #[arg(long)]
        oracle: bool,
    },
    /// Non-separating level intervals along one axis.
    Sweep {
        file: PathBuf,
        #[arg(long)]
        axis: Axis,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Proof certificate for a torus with one boundary circle.
    Trace {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// Run the separating-curve construction even when case A or B fires.
        #[arg(long)]
        construct: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check the isoperimetric-type inequality on one mesh.
    Verify {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CONSTANT)]
        constant: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Verify every instance of a grid file.
    Family {
        #[arg(long)]
        grid: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Overrides the grid's constant.
        #[arg(long)]
        constant: Option<f64>,
        /// Fill the `seconds` column (output is then not reproducible).
        #[arg(long)]
        timings: bool,
    },
}

fn family_from_args(name: &str, eps: f64, refine: u32, n: usize, major: f64, minor: f64) -> Result<Family, String> {
    Ok(match name.replace('-', "_").as_str() {
        "handle_disk" => Family::HandleDisk { eps, refine },
        "genus2_disk" => Family::Genus2Disk { eps, refine },
        "revolution_torus" => Family::RevolutionTorus { major, minor, refine },
        "clifford_torus" | "clifford" => Family::CliffordTorus { n },
        "csaszar" => Family::Csaszar,
        "unit_disk" | "disk" => Family::UnitDisk { refine },
        other => return Err(format!("unknown family {other:?}")),
    })
}

fn read_mesh(path: &Path) -> Result<(EmbeddedMesh, Option<FamilySpec>), Error> {
    let text = fs::read_to_string(path)?;
    let spec = read_familyspec(&text);
    Ok((load_mesh(text.as_bytes(), MeshFormat::from_path(path))?, spec))
}

fn emit(value: &impl Serialize, output: Option<&Path>) -> Result<(), Error> {
    let json = serde_json::to_string_pretty(value)? + "\n";
    match output {
        Some(p) => fs::write(p, json)?,
        None => print!("{json}"),
    }
    Ok(())
}

fn instance_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| "mesh".into(), |s| s.to_string_lossy().into_owned())
}

fn summary_path(csv: &Path) -> PathBuf {
    csv.with_extension("summary.json")
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Gen { family, eps, refine, seed, jitter, n, major, minor, output } => {
            let family = family_from_args(&family, eps, refine, n, major, minor).map_err(HarnessError::Grid)?;
            let spec = FamilySpec { family, seed, jitter };
            let mesh = spec.build().map_err(HarnessError::from)?;
            let text = write_smesh(&mesh, &spec.comments());
            match output {
                Some(p) => fs::write(p, text)?,
                None => print!("{text}"),
            }
            Ok(0)
        }
        Command::Systole { file, oracle } => {
            let (mesh, _) = read_mesh(&file)?;
            let report = shortest_nonseparating(&mesh)?;
            if !oracle {
                emit(&report, None)?;
                return Ok(0);
            }
            let brute = brute_force_systole(&mesh)?;
            let agree = (report.length - brute.length).abs() <= 1e-12 * brute.length.max(1.0);
            #[derive(Serialize)]
            struct WithOracle<'a> {
                #[serde(flatten)]
                report: &'a systl::SystoleReport,
                oracle_length: f64,
                agree: bool,
            }
            emit(&WithOracle { report: &report, oracle_length: brute.length, agree }, None)?;
            Ok(if agree { 0 } else { 2 })
        }
        Command::Sweep { file, axis, samples, output } => {
            let (mesh, _) = read_mesh(&file)?;
            let basis = build_basis(&mesh)?;
            emit(&sweep::sweep(&mesh, &basis, axis, samples)?, output.as_deref())?;
            Ok(0)
        }
        Command::Trace { file, samples, construct, output } => {
            let (mesh, _) = read_mesh(&file)?;
            let basis = build_basis(&mesh)?;
            let opts = TraceOptions { samples, force_construction: construct };
            let cert = sweep::trace_proof_with(&mesh, &basis, &opts)?;
            emit(&cert, output.as_deref())?;
            Ok(if cert.bound_holds { 0 } else { 2 })
        }
        Command::Verify { file, constant, output } => {
            let (mesh, spec) = read_mesh(&file)?;
            let name = instance_name(&file);
            let report = if mesh.genus() >= 2 {
                harness::genus_instance(&mesh, &name, spec.as_ref(), constant)
            } else {
                harness::verify_instance(&mesh, &name, spec.as_ref(), constant)
            }?;
            emit(&report, output.as_deref())?;
            Ok(if report.pass { 0 } else { 2 })
        }
        Command::Family { grid, output, constant, timings } => {
            let (specs, grid_constant) = read_grid(&fs::read_to_string(&grid)?)?;
            let constant = constant.or(grid_constant).unwrap_or(DEFAULT_CONSTANT);
            let run = run_family(&specs, constant);
            fs::write(&output, run.to_csv(timings).map_err(Error::from)?)?;
            emit(&run.summary, Some(&summary_path(&output)))?;
            Ok(exit_code(&run.summary) as u8)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
