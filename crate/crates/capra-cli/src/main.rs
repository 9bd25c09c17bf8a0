//! `capra`: point evaluation, verification suites, and deterministic CSV
//! grid export for the extended-real conjugacy toolkit in `capra-core`.

mod suites;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use capra_core::hidden_convexity::{calL0_2d_branch, calL0_general, decompose_2d, Branch};
use capra_core::l0::{capra_conj_l0, capra_l0_primal_grid};
use capra_core::norms::{gauge_norm, support_norm, Vector};
use capra_core::conjugacy::{conjugate, sphere_grid, Coupling, GridFunction, SphereScheme};
use capra_core::xreal::ExtReal;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "capra", version, about = "Capra-conjugacy analysis of the l0 pseudonorm")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the top-k gauge norm and the k-support norm of a vector.
    Norm {
        /// Comma-separated components, e.g. 3,-4,0,12
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Number of components kept by the gauge norm (1..=d).
        #[arg(long)]
        k: usize,
    },
    /// CSV comparison of the grid-engine Capra conjugate of l0 against the
    /// closed form, over a dual grid of sphere directions times radii.
    Conj {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Number of dual sphere directions.
        #[arg(long, default_value_t = 100)]
        resolution: usize,
        /// Number of dual radii in (0, rmax].
        #[arg(long, default_value_t = 50)]
        radii: usize,
        #[arg(long, default_value_t = 5.0)]
        rmax: f64,
        /// Number of primal directions tabulated per level stratum.
        #[arg(long, default_value_t = 720)]
        primal: usize,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the convex extension L0: single point (with branch and
    /// decomposition in dimension 2) or a CSV surface/branch grid.
    L0ext {
        /// Comma-separated point, e.g. 0.3,0.4 (d = 2 closed form,
        /// d <= 5 ascent).
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        /// Emit an NxN CSV grid over [-1.1, 1.1]^2 instead.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the module verification suites; exit 0 iff all pass.
    Verify {
        /// Run a single suite: xreal, norms, conjugacy, l0, hidden.
        #[arg(long)]
        suite: Option<String>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Max deviation allowed between grid and closed-form conjugates.
        #[arg(long, default_value_t = 2e-2)]
        grid_tol: f64,
        /// Tolerance for exact-identity checks.
        #[arg(long, default_value_t = 1e-9)]
        eq_tol: f64,
        /// Test hook: flip the Capra convention at 0 (c(0,y) = y_1 instead
        /// of 0) to demonstrate that the l0 conjugate suite catches it.
        #[arg(long)]
        inject: bool,
    },
}

fn parse_vector(text: &str) -> Result<Vector, String> {
    let components: Result<Vec<f64>, _> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad component {t:?}: {e}")))
        .collect();
    Vector::new(components?).map_err(|e| e.to_string())
}

fn fmt_ext(v: ExtReal) -> String {
    match v {
        ExtReal::PosInf => "+inf".to_string(),
        ExtReal::NegInf => "-inf".to_string(),
        ExtReal::Finite(f) => format!("{f}"),
    }
}

fn emit(out: Option<PathBuf>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_norm(x: &str, k: usize) -> Result<(), String> {
    let x = parse_vector(x)?;
    let g = gauge_norm(&x, k).map_err(|e| e.to_string())?;
    println!("gauge {g}");
    if k == 0 {
        println!("support 0");
    } else {
        let s = support_norm(&x, k).map_err(|e| e.to_string())?;
        println!("support {s}");
    }
    Ok(())
}

fn cmd_conj(
    dim: usize,
    resolution: usize,
    radii: usize,
    rmax: f64,
    primal: usize,
    out: Option<PathBuf>,
) -> Result<(), String> {
    if dim < 1 || dim > 3 {
        return Err("conj supports dimensions 1..=3".to_string());
    }
    if resolution == 0 || radii == 0 || !(rmax > 0.0) {
        return Err("resolution, radii and rmax must be positive".to_string());
    }
    let xs = capra_l0_primal_grid(dim, primal, &[1.0]).map_err(|e| format!("{e:?}"))?;
    let f = GridFunction::tabulate(xs, |x| ExtReal::finite(capra_core::l0::l0(x) as f64))
        .map_err(|e| format!("{e:?}"))?;
    let dirs = sphere_grid(dim, resolution, SphereScheme::auto(dim, 0))
        .map_err(|e| format!("{e:?}"))?;
    let mut ys = vec![Vector::zeros(dim)];
    for i in 1..=radii {
        let r = rmax * i as f64 / radii as f64;
        for u in &dirs {
            ys.push(u.scale(r));
        }
    }
    let conj = conjugate(&f, &Coupling::Capra, &ys).map_err(|e| format!("{e:?}"))?;
    let mut text = String::new();
    let header: Vec<String> = (1..=dim).map(|i| format!("y_{i}")).collect();
    writeln!(text, "{},grid,closed,delta", header.join(",")).unwrap();
    for (y, v) in conj.domain().iter().zip(conj.values()) {
        let grid = v.to_f64();
        let closed = capra_conj_l0(y);
        let coords: Vec<String> = y.iter().map(|c| format!("{c}")).collect();
        writeln!(
            text,
            "{},{},{},{}",
            coords.join(","),
            grid,
            closed,
            grid - closed
        )
        .unwrap();
    }
    emit(out, &text)
}

fn print_point(x: &Vector, tol: f64, max_iter: usize) -> Result<(), String> {
    if x.dim() == 2 {
        let (value, branch) = calL0_2d_branch(x).map_err(|e| e.to_string())?;
        println!("value {}", fmt_ext(value));
        println!("branch {}", branch.as_str());
        if !matches!(
            branch,
            Branch::Infeasible | Branch::SphereAxis | Branch::SphereOffAxis
        ) {
            let dec = decompose_2d(x).map_err(|e| e.to_string())?;
            let p: Vec<String> = dec.x1bar.iter().map(|c| format!("{c}")).collect();
            let q: Vec<String> = dec.x2bar.iter().map(|c| format!("{c}")).collect();
            println!("x1bar {}", p.join(","));
            println!("x2bar {}", q.join(","));
            match dec.lambda {
                Some(l) => println!("lambda {l}"),
                None => println!("lambda -"),
            }
            println!("objective {}", dec.objective);
        }
        return Ok(());
    }
    if x.dim() > 5 {
        return Err("ascent evaluation supports d <= 5".to_string());
    }
    let r = calL0_general(x, tol, max_iter);
    println!("value {}", fmt_ext(r.value));
    println!("converged {}", r.converged);
    println!("iterations {}", r.iterations);
    Ok(())
}

fn grid_csv(n: usize) -> Result<String, String> {
    if n < 2 {
        return Err("grid resolution must be at least 2".to_string());
    }
    let mut text = String::from("x_1,x_2,value,branch\n");
    // Symmetric linspace over [-1.1, 1.1]: endpoints and (for odd n) the
    // origin come out exact.
    let m = (n - 1) as f64;
    let coord = |i: usize| (-1.1 * (m - i as f64) + 1.1 * i as f64) / m;
    for i in 0..n {
        let x1 = coord(i);
        for j in 0..n {
            let x2 = coord(j);
            let x = Vector::new(vec![x1, x2]).map_err(|e| e.to_string())?;
            let (value, branch) = calL0_2d_branch(&x).map_err(|e| e.to_string())?;
            writeln!(text, "{x1},{x2},{},{}", fmt_ext(value), branch.as_str()).unwrap();
        }
    }
    Ok(text)
}

fn cmd_l0ext(
    x: Option<String>,
    grid: Option<usize>,
    tol: f64,
    max_iter: usize,
    out: Option<PathBuf>,
) -> Result<(), String> {
    match (x, grid) {
        (Some(_), Some(_)) => Err("--x and --grid are mutually exclusive".to_string()),
        (None, None) => Err("one of --x or --grid is required".to_string()),
        (Some(x), None) => print_point(&parse_vector(&x)?, tol, max_iter),
        (None, Some(n)) => {
            let text = grid_csv(n)?;
            emit(out, &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Norm { x, k } => cmd_norm(&x, k),
        Command::Conj {
            dim,
            resolution,
            radii,
            rmax,
            primal,
            out,
        } => cmd_conj(dim, resolution, radii, rmax, primal, out),
        Command::L0ext {
            x,
            grid,
            tol,
            max_iter,
            out,
        } => cmd_l0ext(x, grid, tol, max_iter, out),
        Command::Verify {
            suite,
            seed,
            grid_tol,
            eq_tol,
            inject,
        } => {
            return match suites::run(suite.as_deref(), seed, grid_tol, eq_tol, inject) {
                Ok(true) => ExitCode::from(0),
                Ok(false) => ExitCode::from(2),
                Err(msg) => {
                    eprintln!("error: {msg}");
                    ExitCode::from(1)
                }
            };
        }
    };
    match result {
        Ok(()) => ExitCode::from(0),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
