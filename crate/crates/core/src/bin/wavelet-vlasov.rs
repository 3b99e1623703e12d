use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use wavelet_vlasov::io::driver::{execute, Overrides};
use wavelet_vlasov::io::{load_config, output};
use wavelet_vlasov::mra2d::reconstruct_dense;
use wavelet_vlasov::{Axis, Boundary, Error, PhaseGrid, Result, SparseRep};

#[derive(Parser)]
#[command(name = "wavelet-vlasov", version, about = "Adaptive wavelet semi-Lagrangian Vlasov solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a TOML config file.
    Run {
        config: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Threshold for the adaptive scheme.
        #[arg(long)]
        eps: Option<f64>,
        /// Force the dense scheme.
        #[arg(long)]
        dense: bool,
        /// Number of time steps.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Decompose a snapshot CSV, compress it and write the reconstruction.
    Transform {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        j0: u32,
        #[arg(long)]
        j1: u32,
        /// Stencil order N (degree 2N+1).
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = BoundaryArg::Periodic)]
        x_boundary: BoundaryArg,
        #[arg(long, value_enum, default_value_t = BoundaryArg::Periodic)]
        v_boundary: BoundaryArg,
        /// Also write the retained nodes as a mesh CSV.
        #[arg(long)]
        mesh: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundaryArg {
    Periodic,
    Zero,
}

impl From<BoundaryArg> for Boundary {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::Periodic => Boundary::Periodic,
            BoundaryArg::Zero => Boundary::ZeroExtension,
        }
    }
}

/// Axis spanned by the distinct, uniformly spaced coordinates in `coords`.
fn infer_axis(coords: &mut Vec<f64>, level: u32, boundary: Boundary, name: &str) -> Result<Axis> {
    coords.sort_by(f64::total_cmp);
    coords.dedup();
    let n = coords.len();
    let per_cell = 1usize << level;
    if n < 2 || n % per_cell != 0 {
        return Err(Error::MalformedGrid(format!(
            "{n} distinct {name} values is not a multiple of 2^{level}"
        )));
    }
    let h = (coords[n - 1] - coords[0]) / (n - 1) as f64;
    Ok(Axis::new(coords[0], coords[0] + n as f64 * h, n / per_cell, boundary))
}

fn transform(
    input: &PathBuf,
    out: &PathBuf,
    j0: u32,
    j1: u32,
    order_n: usize,
    eps: f64,
    boundaries: (Boundary, Boundary),
    mesh: Option<&PathBuf>,
) -> Result<()> {
    let rows = output::read_snapshot(input)?;
    let mut xs: Vec<f64> = rows.iter().map(|r| r.x).collect();
    let mut vs: Vec<f64> = rows.iter().map(|r| r.v).collect();
    let x = infer_axis(&mut xs, j1, boundaries.0, "x")?;
    let v = infer_axis(&mut vs, j1, boundaries.1, "v")?;
    let grid = PhaseGrid::new(x, v, j0, j1, order_n)?;
    let (nx, nv) = grid.fine_dims();
    let values = output::snapshot_to_grid(&rows, nx, nv)?;
    let rep = SparseRep::from_dense(&grid, &values, eps)?;
    output::write_snapshot(&grid, &reconstruct_dense(&rep), out)?;
    if let Some(path) = mesh {
        output::write_mesh(&rep, path)?;
    }
    eprintln!(
        "retained {} of {} nodes ({:.4})",
        rep.active_count(),
        grid.fine_len(),
        rep.active_count() as f64 / grid.fine_len() as f64
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            eps,
            dense,
            steps,
        } => load_config(&config)
            .and_then(|c| Overrides { out, eps, dense, steps }.apply(c))
            .and_then(|c| execute(&c))
            .map(|s| {
                eprintln!(
                    "finished {} steps at t = {}, output in {}",
                    s.final_state.step,
                    s.final_state.t,
                    s.output_dir.display()
                )
            }),
        Command::Transform {
            input,
            output,
            j0,
            j1,
            n,
            eps,
            x_boundary,
            v_boundary,
            mesh,
        } => transform(
            &input,
            &output,
            j0,
            j1,
            n,
            eps,
            (x_boundary.into(), v_boundary.into()),
            mesh.as_ref(),
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}: {e}", e.category());
            ExitCode::FAILURE
        }
    }
}
